mod selftest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use cstk_core::io::{self, Dataset, MAGIC};
use cstk_core::{
    build_stable_band, metrics, reconstruct_2d, reconstruct_3d, sample_grid, sinogram_2d, sinogram_3d, Density,
    DensityGrid, Dim, GridDensity, ScanConfig,
};

#[derive(Parser)]
#[command(name = "cstk", version, about = "Toric-section and apple Radon transforms for Compton scattering tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "2d")]
    Two,
    #[value(name = "3d")]
    Three,
}

impl From<Mode> for Dim {
    fn from(m: Mode) -> Dim {
        match m {
            Mode::Two => Dim::Two,
            Mode::Three => Dim::Three,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a phantom file onto the configured density grid.
    Phantom {
        spec: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Forward-project a phantom file or a grid file.
    Project {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Standard deviation of additive gaussian noise.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Invert a sinogram on the stable band.
    Reconstruct {
        sinogram: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        taper: Option<f64>,
        #[arg(long = "eps-norm")]
        eps_norm: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
        /// Per-frequency diagnostics CSV.
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    /// Compare a reconstruction with a reference grid.
    Metrics {
        recon: PathBuf,
        reference: PathBuf,
        /// Also report the error against the band-limited reference.
        #[arg(long)]
        band: bool,
        /// Supplies pad factor and taper for `--band`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a grid as CSV or 16-bit PGM slices.
    Export {
        grid: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<cstk_core::Error>() {
        Some(err) if err.is_numerical_guard() => 2,
        _ => 1,
    }
}

fn config(path: Option<&Path>) -> Result<ScanConfig> {
    match path {
        Some(p) => io::read_config(p).with_context(|| format!("config {}", p.display())),
        None => Ok(ScanConfig::default()),
    }
}

fn load_grid(path: &Path) -> Result<DensityGrid> {
    match io::load(path).with_context(|| format!("reading {}", path.display()))? {
        Dataset::Grid(g) => Ok(g),
        _ => bail!("{}: expected a grid file, found a sinogram", path.display()),
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

fn is_dataset(path: &Path) -> Result<bool> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(bytes.starts_with(MAGIC.as_bytes()))
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Phantom { spec, config: cfg, out } => {
            let cfg = config(cfg.as_deref())?;
            let p = io::read_phantom(&spec).with_context(|| format!("phantom {}", spec.display()))?;
            p.validate_strip(cfg.r_m, cfg.delta)?;
            let grid = sample_grid(&p, &cfg)?;
            io::save(&out, &Dataset::Grid(grid))?;
        }
        Command::Project { input, mode, config: cfg, noise, seed, out } => {
            let cfg = config(cfg.as_deref())?;
            let (grid, field, phantom);
            let density: &dyn Density = if is_dataset(&input)? {
                grid = load_grid(&input)?;
                field = GridDensity::new(&grid);
                &field
            } else {
                phantom = io::read_phantom(&input).with_context(|| format!("phantom {}", input.display()))?;
                phantom.validate_strip(cfg.r_m, cfg.delta)?;
                &phantom
            };
            let dim = density.dim();
            if let Some(m) = mode {
                if Dim::from(m) != dim {
                    bail!("--mode {}d does not match the {}-D input", Dim::from(m).count(), dim.count());
                }
            }
            let mut data = match dim {
                Dim::Two => Dataset::Sinogram2D(sinogram_2d(density, &cfg)?),
                Dim::Three => Dataset::Sinogram3D(sinogram_3d(density, &cfg)?),
            };
            if let Some(sigma) = noise {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    bail!("--noise must be a finite standard deviation >= 0, got {sigma}");
                }
                let values = match &mut data {
                    Dataset::Sinogram2D(s) => &mut s.values,
                    Dataset::Sinogram3D(s) => &mut s.values,
                    Dataset::Grid(_) => unreachable!(),
                };
                add_noise(values, sigma, seed);
            }
            io::save(&out, &data)?;
        }
        Command::Reconstruct { sinogram, config: cfg, taper, eps_norm, out, diag } => {
            let mut cfg = config(cfg.as_deref())?;
            if let Some(t) = taper {
                cfg.taper = t;
            }
            if let Some(e) = eps_norm {
                cfg.eps_norm = e;
            }
            let data = io::load(&sinogram).with_context(|| format!("reading {}", sinogram.display()))?;
            let dim = data.dim();
            let band = build_stable_band(&cfg, dim, cfg.taper)?;
            let res = match &data {
                Dataset::Sinogram2D(s) => reconstruct_2d(s, &cfg, &band)?,
                Dataset::Sinogram3D(s) => reconstruct_3d(s, &cfg, &band)?,
                Dataset::Grid(_) => bail!("{}: expected a sinogram file, found a grid", sinogram.display()),
            };
            io::save(&out, &Dataset::Grid(res.grid.clone()))?;
            if let Some(path) = diag {
                io::write_diagnostics(create(&path)?, &res.diagnostics, dim)?;
            }
            let retained = res.diagnostics.iter().filter(|d| d.retained).count();
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "frequencies {}", res.diagnostics.len())?;
            writeln!(stdout, "retained {retained}")?;
            writeln!(stdout, "dropped {}", res.dropped().count())?;
            writeln!(stdout, "stability_bound {:.16e}", res.stability_bound())?;
            eprintln!("reconstructed in {:.3} s", res.timing.total.as_secs_f64());
        }
        Command::Metrics { recon, reference, band, config: cfg } => {
            let a = load_grid(&recon)?;
            let b = load_grid(&reference)?;
            let band = if band {
                let base = config(cfg.as_deref())?;
                let cfg = band_config(&b, base);
                Some(build_stable_band(&cfg, b.dim, cfg.taper)?)
            } else {
                None
            };
            let m = metrics(&a, &b, band.as_ref())?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "rmse {:.16e}", m.rmse)?;
            writeln!(stdout, "psnr {:.16e}", m.psnr)?;
            if let Some(v) = m.band_rmse {
                writeln!(stdout, "band_rmse {v:.16e}")?;
            }
        }
        Command::Export { grid, format, out } => {
            let g = load_grid(&grid)?;
            match format {
                Format::Csv => io::write_csv(create(&out)?, &g)?,
                Format::Pgm => {
                    io::write_pgm(&g, &out)?;
                }
            }
        }
        Command::Selftest { quick } => {
            let failures = selftest::run(quick, &mut std::io::stdout().lock())?;
            if failures > 0 {
                eprintln!("error: {failures} selftest check(s) failed");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn add_noise(values: &mut [f64], sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for v in values {
        *v += normal.sample(&mut rng);
    }
}

/// Scan configuration whose translation windows reproduce the grid's
/// cell-centred axes.
fn band_config(grid: &DensityGrid, base: ScanConfig) -> ScanConfig {
    let window = |a: &cstk_core::Axis| {
        let lo = a.origin - 0.5 * a.spacing;
        ((lo, lo + a.count as f64 * a.spacing), a.count)
    };
    let (x_range, nx) = window(grid.x_axis());
    let (y_range, ny) = grid.y_axis().map(window).unwrap_or((base.y_range, base.ny));
    ScanConfig {
        r_m: grid.r_m,
        delta: grid.delta,
        x_range,
        nx,
        y_range,
        ny,
        ..base
    }
}
