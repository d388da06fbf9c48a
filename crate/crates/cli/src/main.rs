//! `tomo`: phantoms, projections, noise, DSM and FBP reconstructions,
//! metrics, spectra and the numerical experiments from the command line.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use radon_dsm::analysis::{default_gamma_grid, freq_curve, variance_curve};
use radon_dsm::dsm::{gamma_alpha_sweep, DsmConfig, DsmReconstructor};
use radon_dsm::fbp::{fbp_reconstruct, fbp_reconstruct_3d, FbpFilterSpec, FbpWindow};
use radon_dsm::io::{read_grid, read_sinogram, write_csv, write_grid, write_pgm, write_sinogram};
use radon_dsm::metrics::{err_l2, err_linf, normalize_index};
use radon_dsm::noise::{add_noise, NoiseModel, NoiseSpec};
use radon_dsm::phantom::{PhantomName, PhantomSpec};
use radon_dsm::radon::{forward_radon, limited_angle_weights};
use radon_dsm::repro::{analytic_sinogram, example6_with_images, run_example, write_rows, Scale, REPRO_HEADER};
use radon_dsm::{AngleSet, Error, GridGeometry, ImageGrid, Result, TAxis};

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "tomo", version, about = "Direct sampling and filtered back projection for Radon data")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads [default: all cores].
    #[arg(long, global = true, env = "TOMO_THREADS")]
    threads: Option<usize>,

    /// Resolution 200 with 720 angles in the plane, 100^3 with 900 directions in space.
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rasterize a phantom.
    Phantom(PhantomArgs),
    /// Radon data of a phantom (exact) or of a grid (projected).
    Radon(RadonArgs),
    /// Add noise to a sinogram.
    Noise(NoiseArgs),
    /// Reconstruct an image from a sinogram.
    Reconstruct(ReconstructArgs),
    /// Relative L2 and Linf errors of a reconstruction.
    Metrics(MetricsArgs),
    /// Probe spectra, variance curve and parameter sweeps.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Run numerical experiment 1..6 end to end.
    Repro(ReproArgs),
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Samples per axis [default: 128 in 2D, 48 in 3D].
    #[arg(long)]
    resolution: Option<usize>,
    /// Half-width a of the domain [-a, a]^n [default: 0.5].
    #[arg(long)]
    half_width: Option<f64>,
}

#[derive(Args, Debug)]
struct PhantomArgs {
    /// shapes2d, shepp_logan, disk, box_balls_3d, constant2d, constant3d or ball3d [default: shapes2d].
    #[arg(long)]
    name: Option<String>,
    #[command(flatten)]
    domain: DomainArgs,
    /// Output stem (`.json` and `.f64` are appended).
    #[arg(long)]
    out: PathBuf,
    /// Also write a 16-bit PGM (planar only).
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AngleArgs {
    /// Planar angle count on [-pi/2, pi/2) [default: 180, or 720 i.e. 0.25 deg with --paper-scale].
    #[arg(long, conflicts_with = "increment_deg")]
    angles: Option<usize>,
    /// Planar angular increment in degrees.
    #[arg(long)]
    increment_deg: Option<f64>,
    /// Fibonacci hemisphere directions in space [default: 400, or 900 with --paper-scale].
    #[arg(long)]
    directions: Option<usize>,
}

#[derive(Args, Debug)]
struct RadonArgs {
    /// Grid to project; without it the phantom is projected exactly.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Phantom for exact data [default: shapes2d].
    #[arg(long, conflicts_with = "input")]
    phantom: Option<String>,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    angles: AngleArgs,
    /// Offset spacing [default: the cell size].
    #[arg(long)]
    dt: Option<f64>,
    /// Offsets cover [-radius, radius] [default: a sqrt(n)].
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    /// gaussian or salt_pepper [default: gaussian].
    #[arg(long)]
    model: Option<String>,
    /// Gaussian: fraction of the data mean; salt_pepper: corrupted fraction [default: 0].
    #[arg(long)]
    level: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Dsm,
    Fbp,
}

#[derive(Args, Debug)]
struct DsmArgs {
    /// Sobolev order [default: 0.4 in 2D, 0.9 in 3D].
    #[arg(long)]
    gamma: Option<f64>,
    /// Probe exponent [default: n + 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Probe radius and offset spacing [default: the cell size].
    #[arg(long)]
    h: Option<f64>,
    /// Limited-angle half-width in radians (planar).
    #[arg(long)]
    phi: Option<f64>,
    /// Limited-angle taper width in radians [default: pi/18 when --phi is set].
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long, value_enum, default_value = "dsm")]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    dsm: DsmArgs,
    /// ramp or hamming [default: hamming].
    #[arg(long)]
    window: Option<String>,
    /// Filter cutoff as a fraction of Nyquist [default: 1].
    #[arg(long)]
    cutoff: Option<f64>,
    /// Divide by the largest absolute value before writing.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long)]
    recon: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Also write the row to a CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Analyze {
    /// Probe spectrum on a uniform frequency grid.
    Freq {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        /// [default: 1/(2h)]
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Log variance of the index against the Sobolev order.
    Variance {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.025)]
        h: f64,
        /// Comma-separated orders [default: 0.2, 0.225, ..., 0.975].
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// DSM errors over a grid of Sobolev orders and exponents.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6")]
        gammas: Vec<f64>,
        /// [default: n + 1]
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// [default: the cell size]
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// Experiment number.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    example: u8,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Write the rows here as well as to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for truth and reconstruction grids (experiment 6).
    #[arg(long)]
    images: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR:validation:{first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR:{}:{e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for anything about files (missing, unreadable, malformed), 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format(_) | Error::SizeMismatch { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let scale = if cli.paper_scale { Scale::paper() } else { Scale::desk() };
    match cli.command {
        Command::Phantom(a) => cmd_phantom(&cfg, scale, a),
        Command::Radon(a) => cmd_radon(&cfg, scale, a),
        Command::Noise(a) => cmd_noise(&cfg, a),
        Command::Reconstruct(a) => cmd_reconstruct(&cfg, scale, a),
        Command::Metrics(a) => cmd_metrics(&cfg, a),
        Command::Analyze { what } => cmd_analyze(&cfg, what),
        Command::Repro(a) => cmd_repro(&cfg, scale, a),
    }
}

fn output(cfg: &RunConfig, path: &Path) -> Result<PathBuf> {
    let p = cfg.output(path);
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    Ok(p)
}

fn default_resolution(dim: usize, scale: Scale) -> usize {
    if dim == 3 {
        scale.resolution_3d
    } else {
        scale.resolution
    }
}

fn phantom_name(flag: Option<&str>, cfg: &RunConfig) -> Result<PhantomName> {
    flag.or(cfg.phantom.name.as_deref()).unwrap_or("shapes2d").parse()
}

fn phantom_spec(name: PhantomName, domain: &DomainArgs, cfg: &RunConfig, scale: Scale) -> Result<PhantomSpec> {
    let spec = PhantomSpec {
        name,
        resolution: domain
            .resolution
            .or(cfg.phantom.resolution)
            .unwrap_or_else(|| default_resolution(name.dim(), scale)),
        half_width: domain.half_width.or(cfg.phantom.half_width).unwrap_or(0.5),
    };
    spec.validate()?;
    Ok(spec)
}

fn angle_set(dim: usize, a: &AngleArgs, cfg: &RunConfig, scale: Scale) -> Result<AngleSet> {
    if dim == 3 {
        let n = a.directions.or(cfg.angles.directions).unwrap_or(scale.n_directions_3d);
        return AngleSet::fibonacci_hemisphere(n);
    }
    if let Some(n) = a.angles {
        return AngleSet::uniform_2d(n);
    }
    if let Some(d) = a.increment_deg.or(cfg.angles.increment_deg) {
        return AngleSet::from_increment_2d(d.to_radians());
    }
    AngleSet::uniform_2d(cfg.angles.count.unwrap_or(scale.n_angles))
}

fn cmd_phantom(cfg: &RunConfig, scale: Scale, a: PhantomArgs) -> Result<()> {
    let spec = phantom_spec(phantom_name(a.name.as_deref(), cfg)?, &a.domain, cfg, scale)?;
    let grid = spec.phantom().rasterize(&spec.geometry()?);
    let out = output(cfg, &a.out)?;
    write_grid(&grid, &out)?;
    eprintln!("phantom: wrote {}", out.display());
    if let Some(p) = a.pgm {
        write_pgm(&grid, output(cfg, &p)?)?;
    }
    Ok(())
}

fn cmd_radon(cfg: &RunConfig, scale: Scale, a: RadonArgs) -> Result<()> {
    let (image, phantom) = match &a.input {
        Some(stem) => (Some(read_grid(stem)?), None),
        None => {
            let spec = phantom_spec(phantom_name(a.phantom.as_deref(), cfg)?, &a.domain, cfg, scale)?;
            (None, Some(spec))
        }
    };
    let (dim, cell, half_width) = match (&image, &phantom) {
        (Some(g), _) => (g.dim(), g.geometry.min_spacing(), 0.5 * g.geometry.min_spacing() * g.geometry.shape[0] as f64),
        (_, Some(s)) => (s.name.dim(), 2.0 * s.half_width / s.resolution as f64, s.half_width),
        _ => unreachable!(),
    };
    let angles = angle_set(dim, &a.angles, cfg, scale)?;
    let dt = a.dt.or(cfg.t_axis.dt).unwrap_or(cell);
    let radius = a
        .radius
        .or(cfg.t_axis.radius)
        .unwrap_or(half_width * (dim as f64).sqrt());
    let axis = TAxis::centered(radius, dt)?;
    let sino = match (image, phantom) {
        (Some(g), _) => forward_radon(&g, &angles, axis)?,
        (_, Some(s)) => analytic_sinogram(&s.phantom(), &angles, axis)?,
        _ => unreachable!(),
    };
    let out = output(cfg, &a.out)?;
    write_sinogram(&sino, &out)?;
    eprintln!("radon: wrote {} ({} x {})", out.display(), sino.n_angles(), sino.axis.nt);
    Ok(())
}

fn cmd_noise(cfg: &RunConfig, a: NoiseArgs) -> Result<()> {
    let sino = read_sinogram(&a.input)?;
    let model: NoiseModel = a
        .model
        .as_deref()
        .or(cfg.noise.model.as_deref())
        .unwrap_or("gaussian")
        .parse()?;
    let spec = NoiseSpec {
        model,
        level: a.level.or(cfg.noise.level).unwrap_or(0.0),
        seed: a.seed.or(cfg.noise.seed).unwrap_or(0),
    };
    let noisy = add_noise(&sino, &spec)?;
    let out = output(cfg, &a.out)?;
    write_sinogram(&noisy, &out)?;
    eprintln!("noise: wrote {}", out.display());
    Ok(())
}

fn dsm_config(dim: usize, half_width: f64, cell: f64, d: &DsmArgs, cfg: &RunConfig) -> DsmConfig {
    let mut c = DsmConfig::new(dim, d.h.or(cfg.dsm.h).unwrap_or(cell));
    c.half_width = half_width;
    c.r2 = half_width * (dim as f64).sqrt();
    if let Some(g) = d.gamma.or(cfg.dsm.gamma) {
        c.gamma = g;
    }
    if let Some(al) = d.alpha.or(cfg.dsm.alpha) {
        c.alpha = al;
    }
    if let Some(phi) = d.phi.or(cfg.dsm.phi) {
        let lambda = d.lambda.or(cfg.dsm.lambda).unwrap_or(std::f64::consts::PI / 18.0);
        c = c.with_limited_angle(phi, lambda);
    }
    c
}

fn cmd_reconstruct(cfg: &RunConfig, scale: Scale, a: ReconstructArgs) -> Result<()> {
    let sino = read_sinogram(&a.input)?;
    let dim = sino.dim();
    let res = a
        .domain
        .resolution
        .or(cfg.phantom.resolution)
        .unwrap_or_else(|| default_resolution(dim, scale));
    let half_width = a.domain.half_width.or(cfg.phantom.half_width).unwrap_or(0.5);
    let geometry = GridGeometry::centered_cube(dim, res, half_width)?;
    let cell = 2.0 * half_width / res as f64;
    let dsm = dsm_config(dim, half_width, cell, &a.dsm, cfg);
    let mut rec = match a.method {
        Method::Dsm => DsmReconstructor::new(dsm, &sino.angles, &geometry)?.reconstruct(&sino)?,
        Method::Fbp => {
            let filter = FbpFilterSpec {
                window: a
                    .window
                    .as_deref()
                    .or(cfg.fbp.window.as_deref())
                    .map(str::parse::<FbpWindow>)
                    .transpose()?
                    .unwrap_or(FbpWindow::Hamming),
                cutoff: a.cutoff.or(cfg.fbp.cutoff).unwrap_or(1.0),
            };
            if dim == 3 {
                fbp_reconstruct_3d(&sino, &filter, &geometry)?
            } else {
                let weights = match dsm.limited_angle {
                    Some(la) => Some(limited_angle_weights(&sino.angles, la.phi, la.lambda)?),
                    None => None,
                };
                fbp_reconstruct(&sino, &filter, &geometry, weights.as_deref())?
            }
        }
    };
    if a.normalize {
        rec = normalize_index(&rec)?;
    }
    let out = output(cfg, &a.out)?;
    write_grid(&rec, &out)?;
    eprintln!("reconstruct: wrote {}", out.display());
    if let Some(p) = a.pgm {
        write_pgm(&rec, output(cfg, &p)?)?;
    }
    Ok(())
}

fn cmd_metrics(cfg: &RunConfig, a: MetricsArgs) -> Result<()> {
    let rec = read_grid(&a.recon)?;
    let truth = read_grid(&a.truth)?;
    let (l2, linf) = (err_l2(&rec, &truth)?, err_linf(&rec, &truth)?);
    println!("err_l2,err_linf");
    println!("{l2},{linf}");
    if let Some(p) = a.out {
        write_csv(&[("err_l2", &[l2]), ("err_linf", &[linf])], output(cfg, &p)?)?;
    }
    Ok(())
}

fn cmd_analyze(cfg: &RunConfig, what: Analyze) -> Result<()> {
    match what {
        Analyze::Freq {
            dim,
            h,
            omega_max,
            points,
            out,
        } => {
            let c = freq_curve(dim, h, omega_max.unwrap_or(0.5 / h), points)?;
            c.write_csv(output(cfg, &out)?)
        }
        Analyze::Variance { dim, h, gammas, out } => {
            let gammas = if gammas.is_empty() { default_gamma_grid() } else { gammas };
            let c = variance_curve(dim, h, &gammas)?;
            c.write_csv(output(cfg, &out)?)
        }
        Analyze::Sweep {
            input,
            truth,
            gammas,
            alphas,
            h,
            out,
        } => {
            let sino = read_sinogram(&input)?;
            let truth: ImageGrid = read_grid(&truth)?;
            let g = &truth.geometry;
            let dim = g.dim();
            let half_width = 0.5 * g.spacing[0] * g.shape[0] as f64;
            let d = DsmArgs {
                gamma: None,
                alpha: None,
                h,
                phi: None,
                lambda: None,
            };
            let base = dsm_config(dim, half_width, g.min_spacing(), &d, cfg);
            let alphas = if alphas.is_empty() { vec![base.alpha] } else { alphas };
            let rows = gamma_alpha_sweep(&sino, &truth, &base, &gammas, &alphas)?;
            let col = |f: fn(&radon_dsm::dsm::SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
            let (gs, als, l2, linf) = (col(|r| r.gamma), col(|r| r.alpha), col(|r| r.err_l2), col(|r| r.err_linf));
            write_csv(
                &[("gamma", &gs), ("alpha", &als), ("err_l2", &l2), ("err_linf", &linf)],
                output(cfg, &out)?,
            )
        }
    }
}

fn cmd_repro(cfg: &RunConfig, scale: Scale, a: ReproArgs) -> Result<()> {
    let rows = if a.example == 6 && a.images.is_some() {
        let (rows, [truth, dsm, fbp]) = example6_with_images(scale, a.seed)?;
        let dir = cfg.output(a.images.as_deref().unwrap_or(Path::new(".")));
        for (name, grid) in [("truth", &truth), ("dsm", &dsm), ("fbp", &fbp)] {
            write_grid(grid, output(cfg, &dir.join(name))?)?;
        }
        rows
    } else {
        run_example(a.example, scale, a.seed)?
    };
    println!("{}", REPRO_HEADER.join(","));
    for r in &rows {
        println!("{}", r.fields().join(","));
    }
    if let Some(p) = a.out {
        write_rows(&rows, output(cfg, &p)?)?;
    }
    Ok(())
}
