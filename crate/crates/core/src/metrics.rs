//! Relative reconstruction errors and index normalization.

use crate::error::{ensure, Result};
use crate::grid::ImageGrid;

fn check_pair(recon: &ImageGrid, truth: &ImageGrid) -> Result<()> {
    recon.validate()?;
    truth.validate()?;
    ensure!(
        recon.geometry == truth.geometry,
        Validation,
        "reconstruction and reference grids differ"
    );
    Ok(())
}

/// `||recon - truth||_2 / ||truth||_2` over all samples.
pub fn err_l2(recon: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    check_pair(recon, truth)?;
    let (num, den) = recon
        .values
        .iter()
        .zip(&truth.values)
        .fold((0.0, 0.0), |(n, d), (r, t)| (n + (r - t) * (r - t), d + t * t));
    ensure!(den > 0.0, Validation, "reference image is identically zero");
    Ok((num / den).sqrt())
}

/// `||recon - truth||_inf / ||truth||_inf` over all samples.
pub fn err_linf(recon: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    check_pair(recon, truth)?;
    let (num, den) = recon
        .values
        .iter()
        .zip(&truth.values)
        .fold((0.0f64, 0.0f64), |(n, d), (r, t)| (n.max((r - t).abs()), d.max(t.abs())));
    ensure!(den > 0.0, Validation, "reference image is identically zero");
    Ok(num / den)
}

/// Divide by the largest absolute value.
pub fn normalize_index(img: &ImageGrid) -> Result<ImageGrid> {
    img.validate()?;
    let peak = img.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure!(peak > 0.0, Validation, "cannot normalize an all-zero image");
    Ok(ImageGrid {
        geometry: img.geometry.clone(),
        values: img.values.iter().map(|v| v / peak).collect(),
    })
}
