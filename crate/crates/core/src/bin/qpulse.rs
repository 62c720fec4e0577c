use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Deserialize;

use qpulse::config::{preset, Scenario};
use qpulse::demux::{apply_demux, reduced_density_matrix, solve_demux_angles, DemuxOptions, RdmMethod, SupermodeBasis};
use qpulse::density::FockDensityMatrix;
use qpulse::export::{config_hash, export_plot_data, load_config, write_run, Figure, RhoFile};
use qpulse::mps::snapshot;
use qpulse::oracles::classical::{evolve_chi2, evolve_chi3, history_csv, ClassicalField};
use qpulse::oracles::waveforms::Grid;
use qpulse::phasespace::{wigner, wigner_negativity_volume, GridSpec, NegativityOptions};
use qpulse::scenario::{initial_pulses, run_scenario};
use qpulse::{Error, Result};

/// Quantum pulse propagation with matrix product states.
#[derive(Parser)]
#[command(name = "qpulse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its run directory.
    Simulate {
        /// TOML config, or the manifest.json of an earlier run.
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run trajectories one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Demultiplex an MPS snapshot onto a supermode basis and print ρ_S as JSON.
    Demux {
        mps: PathBuf,
        /// JSON file `{"modes": [[[re, im], ...], ...]}` with one or two modes.
        basis: PathBuf,
        /// Local dimension used during the cascade.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Write ρ_S here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner function and negativity volume of a single-mode ρ file.
    Wigner {
        rho: PathBuf,
        /// For two-mode files, the mode to keep (0 or 1).
        #[arg(long)]
        mode: Option<usize>,
        #[arg(long, default_value_t = 5.0)]
        half_width: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Write the grid as `x,p,W` CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical split-step propagation of the scenario's mean field.
    Classical {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid refinement factor relative to the quantum bins.
        #[arg(long, default_value_t = 1)]
        refine: usize,
        /// Snapshot stride in steps (defaults to the analysis stride).
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Write plot-ready data for a finished run.
    Export {
        run_dir: PathBuf,
        /// density_map, wigner_snapshots, negativity_map, purity_negativity or all.
        figure: String,
    },
    /// Print the default config of a scenario.
    Preset {
        /// kerr_soliton, second_order_soliton, simulton or custom.
        scenario: String,
    },
}

#[derive(Deserialize)]
struct BasisFile {
    modes: Vec<Vec<[f64; 2]>>,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QPULSE_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::Validation(format!("QPULSE_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Validation("QPULSE_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(config: &Path, out: Option<PathBuf>, sequential: bool) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(o) = out {
        cfg.output_dir = o.to_string_lossy().into_owned();
    }
    if sequential {
        cfg.mcwf.parallel = false;
    }
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let result = run_scenario(&cfg)?;
    let dir = PathBuf::from(&cfg.output_dir);
    let manifest = write_run(&dir, &result)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("run {} written to {}", manifest.config_hash, dir.display());
    println!("wall time {:.1} s, truncation weight {:.3e}", manifest.wall_time_s, manifest.cum_trunc_error);
    for s in &result.snapshots {
        let ent = s.entanglement_negativity.map(|e| format!(" entanglement {e:.6}")).unwrap_or_default();
        println!("t = {:<8} purity {:.6} wigner negativity {:.6}{ent}", s.t, s.purity, s.wigner_negativity[0]);
    }
    if let Some(h) = &result.hybrid {
        println!(
            "hybrid modes: Phi0 = {:.4}, Theta0 = {:.4}, N = {:.3e} (origin {:.3e}), negativity A0 {:.3e}, B0 {:.3e}",
            h.search.phi0, h.search.theta0, h.search.minimum, h.search.at_origin, h.wigner_negativity[0], h.wigner_negativity[1]
        );
    }
    Ok(())
}

fn demux(mps: &Path, basis: &Path, cutoff: Option<usize>, out: Option<PathBuf>) -> Result<()> {
    let mut state = snapshot::load(mps)?;
    let text = fs::read_to_string(basis).map_err(|e| Error::Validation(format!("{}: {e}", basis.display())))?;
    let file: BasisFile = serde_json::from_str(&text).map_err(|e| Error::Validation(format!("basis file: {e}")))?;
    let modes: Vec<Vec<C64>> = file.modes.iter().map(|m| m.iter().map(|[re, im]| C64::new(*re, *im)).collect()).collect();
    let s = modes.len();
    let basis = SupermodeBasis::new(modes)?;
    let plan = solve_demux_angles(&basis)?;
    eprint!("{}", plan.describe());
    apply_demux(&mut state, &plan, DemuxOptions { cutoff })?;
    let rho = reduced_density_matrix(&state, s, None, RdmMethod::Contraction)?;
    let file = RhoFile { config_hash: None, t: None, rho: rho.to_json() };
    write_or_print(out.as_deref(), &(serde_json::to_string_pretty(&file)? + "\n"))
}

fn wigner_cmd(path: &Path, mode: Option<usize>, half_width: f64, points: usize, out: Option<PathBuf>) -> Result<()> {
    let file = RhoFile::load(path)?;
    let mut rho = FockDensityMatrix::from_json(&file.rho)?;
    if rho.n_modes() == 2 {
        let k = mode.ok_or_else(|| Error::Validation("two-mode state: choose --mode 0 or 1".into()))?;
        rho = rho.partial_trace(k)?;
    }
    let grid = wigner(&rho, GridSpec::square(half_width, points))?;
    for w in &grid.warnings {
        eprintln!("warning: {w}");
    }
    let vol = wigner_negativity_volume(&rho, NegativityOptions::default())?;
    println!("purity {:.9}", rho.purity());
    println!("wigner negativity volume {vol:.9e}");
    println!("integral {:.9}", grid.total());
    if let Some(o) = out {
        fs::write(o, grid.to_csv())?;
    }
    Ok(())
}

fn classical(config: &Path, out: Option<PathBuf>, refine: usize, stride: Option<usize>) -> Result<()> {
    let cfg = load_config(config)?;
    if refine == 0 {
        return Err(Error::Validation("--refine must be at least 1".into()));
    }
    let grid = Grid::new(cfg.physics.length, cfg.physics.n_bins * refine)?;
    let pulses = initial_pulses(&cfg, &grid)?;
    let dz = grid.dz();
    let stride = stride.unwrap_or(cfg.analysis.stride).max(1);
    let (dt, steps) = (cfg.numerics.dt, cfg.numerics.steps);
    let history = if cfg.is_chi2() {
        let field = ClassicalField::chi2(dz, pulses[0].field.clone(), pulses[1].field.clone());
        evolve_chi2(&field, cfg.physics.beta, dt, steps, stride)?
    } else {
        evolve_chi3(&ClassicalField::chi3(dz, pulses[0].field.clone()), dt, steps, stride)?
    };
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    fs::create_dir_all(&dir)?;
    let path = dir.join("classical.csv");
    let text = format!("# config_hash: {}\n{}", config_hash(&cfg)?, history_csv(&history, &grid.centers()));
    fs::write(&path, text)?;
    println!("classical history written to {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config, out, sequential } => simulate(&config, out, sequential),
        Command::Demux { mps, basis, cutoff, out } => demux(&mps, &basis, cutoff, out),
        Command::Wigner { rho, mode, half_width, points, out } => wigner_cmd(&rho, mode, half_width, points, out),
        Command::Classical { config, out, refine, stride } => classical(&config, out, refine, stride),
        Command::Export { run_dir, figure } => {
            let fig: Figure = figure.parse()?;
            for p in export_plot_data(&run_dir, fig)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Preset { scenario } => {
            let s: Scenario = serde_json::from_value(serde_json::Value::String(scenario.clone()))
                .map_err(|_| Error::Validation(format!("unknown scenario '{scenario}'")))?;
            print!("{}", preset(s).to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
