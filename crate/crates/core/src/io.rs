//! File formats: JSON sidecar plus raw little-endian f64 payload for grids
//! and sinograms, 16-bit PGM previews and CSV tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::{AngleSet, Directions, GridGeometry, ImageGrid, Sinogram, TAxis};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridHeader {
    kind: String,
    dim: usize,
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum AngleList {
    Planar(Vec<f64>),
    Spatial(Vec<[f64; 3]>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SinogramHeader {
    kind: String,
    dim: usize,
    angles: AngleList,
    weights: Vec<f64>,
    t0: f64,
    dt: f64,
    nt: usize,
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_payload(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_payload(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(Error::SizeMismatch {
            expected: expected * 8,
            found: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_header(path: &Path) -> Result<(String, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Format(format!("{}: missing \"kind\"", path.display())))?
        .to_string();
    Ok((kind, value))
}

pub fn write_grid(grid: &ImageGrid, stem: impl AsRef<Path>) -> Result<()> {
    grid.validate()?;
    let stem = stem.as_ref();
    let g = &grid.geometry;
    let header = GridHeader {
        kind: "grid".into(),
        dim: g.dim(),
        shape: g.shape.clone(),
        origin: g.origin.clone(),
        spacing: g.spacing.clone(),
    };
    write_json(&with_suffix(stem, ".json"), &header)?;
    write_payload(&with_suffix(stem, ".f64"), &grid.values)
}

pub fn read_grid(stem: impl AsRef<Path>) -> Result<ImageGrid> {
    let stem = stem.as_ref();
    let json = with_suffix(stem, ".json");
    let (kind, value) = read_header(&json)?;
    ensure!(
        kind == "grid",
        Format,
        "{}: expected kind \"grid\", found \"{kind}\"",
        json.display()
    );
    let h: GridHeader = serde_json::from_value(value)
        .map_err(|e| Error::Format(format!("{}: {e}", json.display())))?;
    ensure!(
        h.dim == h.shape.len(),
        Format,
        "dim {} disagrees with shape {:?}",
        h.dim,
        h.shape
    );
    let geometry = GridGeometry::new(h.shape, h.origin, h.spacing)?;
    let values = read_payload(&with_suffix(stem, ".f64"), geometry.len())?;
    ImageGrid::new(geometry, values)
}

pub fn write_sinogram(sino: &Sinogram, stem: impl AsRef<Path>) -> Result<()> {
    sino.validate()?;
    let stem = stem.as_ref();
    let angles = match &sino.angles.directions {
        Directions::Planar(a) => AngleList::Planar(a.clone()),
        Directions::Spatial(d) => AngleList::Spatial(d.clone()),
    };
    let header = SinogramHeader {
        kind: "sinogram".into(),
        dim: sino.dim(),
        angles,
        weights: sino.angles.weights.clone(),
        t0: sino.axis.t0,
        dt: sino.axis.dt,
        nt: sino.axis.nt,
    };
    write_json(&with_suffix(stem, ".json"), &header)?;
    write_payload(&with_suffix(stem, ".f64"), &sino.values)
}

pub fn read_sinogram(stem: impl AsRef<Path>) -> Result<Sinogram> {
    let stem = stem.as_ref();
    let json = with_suffix(stem, ".json");
    let (kind, value) = read_header(&json)?;
    ensure!(
        kind == "sinogram",
        Format,
        "{}: expected kind \"sinogram\", found \"{kind}\"",
        json.display()
    );
    let h: SinogramHeader = serde_json::from_value(value)
        .map_err(|e| Error::Format(format!("{}: {e}", json.display())))?;
    let directions = match (h.dim, h.angles) {
        (2, AngleList::Planar(a)) => Directions::Planar(a),
        (3, AngleList::Spatial(d)) => Directions::Spatial(d),
        // an empty list parses as planar
        (3, AngleList::Planar(a)) if a.is_empty() => Directions::Spatial(Vec::new()),
        (dim, _) => {
            return Err(Error::Format(format!(
                "angle list does not match dim {dim}"
            )))
        }
    };
    let angles = AngleSet::new(directions, h.weights)?;
    let axis = TAxis::new(h.t0, h.dt, h.nt)?;
    let values = read_payload(&with_suffix(stem, ".f64"), angles.len() * axis.nt)?;
    Sinogram::new(angles, axis, values)
}

/// Binary 16-bit PGM with rows of decreasing `y`.
pub fn write_pgm(grid: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    grid.validate()?;
    ensure!(
        grid.dim() == 2,
        Unsupported,
        "PGM export needs a 2D grid, got {}D",
        grid.dim()
    );
    let path = path.as_ref();
    let bytes = pgm_bytes(grid);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn pgm_bytes(grid: &ImageGrid) -> Vec<u8> {
    let (nx, ny) = (grid.geometry.shape[0], grid.geometry.shape[1]);
    let min = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    out.reserve(2 * nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = grid.values[i * ny + j];
            let p = if max > min {
                (65535.0 * (v - min) / (max - min)).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
    out
}

/// Named columns of equal length, one row per index.
pub fn write_csv(columns: &[(&str, &[f64])], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = csv_string(columns)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_string(columns: &[(&str, &[f64])]) -> Result<String> {
    let len = columns.first().map_or(0, |c| c.1.len());
    ensure!(
        columns.iter().all(|c| c.1.len() == len),
        Validation,
        "csv columns have unequal lengths"
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(columns.iter().map(|c| c.0)).map_err(fmt_err)?;
    for r in 0..len {
        w.write_record(columns.iter().map(|c| format!("{}", c.1[r])))
            .map_err(fmt_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// CSV of heterogeneous string cells, header first.
pub fn write_table(header: &[&str], rows: &[Vec<String>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let fmt_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fmt_err)?;
    for r in rows {
        ensure!(
            r.len() == header.len(),
            Validation,
            "table row has {} cells, header has {}",
            r.len(),
            header.len()
        );
        w.write_record(r).map_err(fmt_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
