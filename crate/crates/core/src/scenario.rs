//! Scenario orchestration: initial state, propagation, demultiplexing and
//! phase-space analysis at the sample times.

use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::config::{Envelope, RunConfig, Scenario};
use crate::demux::{apply_demux, reduced_density_matrix, solve_demux_angles, DemuxOptions, DemuxPlan, RdmMethod, SupermodeBasis};
use crate::density::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::evolve::{apply_schedule, average_matrices, mcwf_step, run_ensemble, LossModel, ObservableSeries};
use crate::gates::{chi2_schedule, chi3_schedule, Chi2Params, Chi3Params, GateSchedule};
use crate::linalg::CMatrix;
use crate::mps::{init_coherent_mps, Truncation, VidalMPS};
use crate::oracles::waveforms::{breather_pulse, normalized, sech_pulse, simulton_pulse, Grid, PulseMode};
use crate::phasespace::{
    disentangle_search, entanglement_negativity, two_mode_bs_transform, wigner, wigner_negativity_volume, BsSearchResult,
    GridSpec, NegativityOptions, SearchOptions, WignerGrid,
};

/// Everything needed to start a trajectory.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: Grid,
    pub chi2: bool,
    pub dims: Vec<usize>,
    pub schedule: GateSchedule,
    pub initial: VidalMPS,
    /// FH (or χ³) pulse, then the SH pulse for χ².
    pub pulses: Vec<PulseMode>,
    pub plan: DemuxPlan,
    pub demux_cutoff: usize,
    /// Step indices at which ρ_S is extracted.
    pub sample_steps: Vec<usize>,
}

fn custom_pulse(cfg: &RunConfig, grid: &Grid) -> Result<PulseMode> {
    let ph = &cfg.physics;
    let w = ph.width.unwrap_or(1.0);
    let shape = ph.envelope.unwrap_or(Envelope::Sech);
    let raw = grid.sample(|z| {
        let x = z / w;
        let v = match shape {
            Envelope::Sech => 1.0 / x.cosh(),
            Envelope::Gaussian => (-0.5 * x * x).exp(),
        };
        C64::new(v, 0.0)
    });
    let mode = normalized(&raw)?;
    let alpha = match ph.alpha {
        Some([re, im]) => C64::new(re, im),
        None => C64::new(ph.nbar.sqrt(), 0.0),
    };
    let field = mode.iter().map(|f| f * alpha / grid.dz().sqrt()).collect();
    Ok(PulseMode { field, mode, alpha })
}

/// Mean-field pulses of the scenario sampled on `grid`: one entry for χ³,
/// FH then SH for χ².
pub fn initial_pulses(cfg: &RunConfig, grid: &Grid) -> Result<Vec<PulseMode>> {
    let ph = &cfg.physics;
    Ok(match cfg.scenario {
        Scenario::KerrSoliton => vec![sech_pulse(ph.nbar, grid)?],
        Scenario::SecondOrderSoliton => vec![breather_pulse(ph.nbar, grid)?],
        Scenario::Simulton => {
            let (a, b) = simulton_pulse(ph.nbar, grid)?;
            vec![a, b]
        }
        Scenario::Custom => {
            let p = custom_pulse(cfg, grid)?;
            if cfg.is_chi2() {
                let sh = PulseMode { field: vec![C64::new(0.0, 0.0); grid.n], mode: p.mode.clone(), alpha: C64::new(0.0, 0.0) };
                vec![p, sh]
            } else {
                vec![p]
            }
        }
    })
}

/// Uniform sample steps including the first and last step.
pub fn sample_steps(steps: usize, samples: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..samples)
        .map(|k| ((k as f64) * steps as f64 / (samples.max(2) - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Build the initial state, gate schedule and demux plan for a validated config.
pub fn prepare(cfg: &RunConfig) -> Result<Setup> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    let ph = &cfg.physics;
    let nu = &cfg.numerics;
    let grid = Grid::new(ph.length, ph.n_bins)?;
    let chi2 = cfg.is_chi2();
    let trunc = Truncation::new(nu.chi_max, nu.trunc_tol);
    let pulses = initial_pulses(cfg, &grid)?;
    let (dims, schedule, basis) = if chi2 {
        let (da, db) = (nu.cutoff, cfg.cutoff_sh());
        let params = Chi2Params::new(ph.length, ph.n_bins, nu.dt, ph.beta)?;
        let dims: Vec<usize> = (0..2 * ph.n_bins).map(|k| if k % 2 == 0 { da } else { db }).collect();
        (dims, chi2_schedule(&params, da, db, nu.trotter)?, SupermodeBasis::interleaved(&pulses[0].mode, &pulses[1].mode)?)
    } else {
        let params = Chi3Params::new(ph.length, ph.n_bins, nu.dt)?;
        (vec![nu.cutoff; ph.n_bins], chi3_schedule(&params, nu.cutoff, nu.trotter)?, SupermodeBasis::new(vec![pulses[0].mode.clone()])?)
    };
    // Displacing several orthogonal supermodes is one displacement of their
    // weighted sum.
    let weight: f64 = pulses.iter().map(|p| p.alpha.norm_sqr()).sum::<f64>().sqrt();
    let envelope: Vec<C64> = if weight > 0.0 {
        let mut e = vec![C64::new(0.0, 0.0); dims.len()];
        for (r, p) in pulses.iter().enumerate() {
            for (k, f) in basis.mode(r).iter().enumerate() {
                e[k] += f * p.alpha.conj() / weight;
            }
        }
        e
    } else {
        basis.mode(0).to_vec()
    };
    let initial = init_coherent_mps(&envelope, C64::new(weight, 0.0), &dims, nu.max_deficit, trunc).map_err(|e| match e {
        Error::Capacity { site, msg } => Error::Capacity {
            site,
            msg: format!("{msg}; raise numerics.cutoff (or cutoff_sh), or relax numerics.max_deficit"),
        },
        other => other,
    })?;
    let plan = solve_demux_angles(&basis)?;
    let max_dim = dims.iter().copied().max().unwrap_or(1);
    let demux_cutoff = cfg.analysis.demux_cutoff.unwrap_or(max_dim).max(max_dim);
    if let Some(c) = &cfg.analysis.rho_cutoff {
        if c.iter().any(|&x| x > demux_cutoff) {
            return Err(Error::Validation(format!("analysis.rho_cutoff {c:?} exceeds the demux cutoff {demux_cutoff}")));
        }
    }
    Ok(Setup {
        grid,
        chi2,
        dims,
        schedule,
        initial,
        pulses,
        plan,
        demux_cutoff,
        sample_steps: sample_steps(nu.steps, cfg.analysis.samples),
    })
}

/// Raw output of one trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub series: ObservableSeries,
    /// Photon density per bin at the series times (FH, then SH for χ²).
    pub density: Vec<Vec<f64>>,
    pub density_sh: Vec<Vec<f64>>,
    /// Unrestricted ρ_S at each sample step.
    pub rhos: Vec<CMatrix>,
    pub jumps: Vec<(f64, usize)>,
    pub demux_weight: f64,
    pub final_state: VidalMPS,
}

fn snapshot_rho(state: &VidalMPS, setup: &Setup) -> Result<(CMatrix, f64)> {
    let mut work = state.clone();
    let w = apply_demux(&mut work, &setup.plan, DemuxOptions { cutoff: Some(setup.demux_cutoff) })?;
    let s = setup.pulses.len();
    let rho = reduced_density_matrix(&work, s, None, RdmMethod::Contraction)?;
    Ok((rho.matrix, w))
}

fn densities(state: &VidalMPS, setup: &Setup) -> (Vec<f64>, Vec<f64>) {
    let dz = setup.grid.dz();
    let all = state.photon_density(dz);
    if setup.chi2 {
        (all.iter().step_by(2).copied().collect(), all.iter().skip(1).step_by(2).copied().collect())
    } else {
        (all, Vec::new())
    }
}

fn observe(state: &VidalMPS, setup: &Setup, t: f64, traj: &mut Trajectory) -> Result<()> {
    let (fh, sh) = densities(state, setup);
    let dz = setup.grid.dz();
    let n_fh: f64 = fh.iter().sum::<f64>() * dz;
    let mut values = vec![
        ("photon_number".to_string(), n_fh),
        ("trunc_error".to_string(), state.cum_trunc_error()),
        ("max_bond".to_string(), state.max_bond_dim() as f64),
    ];
    if setup.chi2 {
        let n_sh: f64 = sh.iter().sum::<f64>() * dz;
        values[0].1 = n_fh;
        values.push(("photon_number_sh".into(), n_sh));
        values.push(("charge".into(), n_fh + 2.0 * n_sh));
    }
    traj.series.push(t, values)?;
    traj.density.push(fh);
    traj.density_sh.push(sh);
    Ok(())
}

/// Propagate one trajectory; `loss` carries the jump model and generator.
pub fn run_trajectory<R: rand::Rng>(
    cfg: &RunConfig,
    setup: &Setup,
    mut loss: Option<(&LossModel, &mut R)>,
) -> Result<Trajectory> {
    let nu = &cfg.numerics;
    let stride = cfg.analysis.stride;
    let mut state = setup.initial.clone();
    let mut traj = Trajectory {
        series: ObservableSeries::new(),
        density: Vec::new(),
        density_sh: Vec::new(),
        rhos: Vec::new(),
        jumps: Vec::new(),
        demux_weight: 0.0,
        final_state: setup.initial.clone(),
    };
    let mut next_sample = 0;
    for step in 0..=nu.steps {
        let t = step as f64 * nu.dt;
        if step > 0 {
            apply_schedule(&mut state, &setup.schedule)?;
            if let Some((model, rng)) = loss.as_mut() {
                if let Some(site) = mcwf_step(&mut state, model, nu.dt, &mut **rng)? {
                    traj.jumps.push((t, site));
                }
            }
            if let Some(cap) = nu.hard_cap {
                let bonds = state.bond_dims();
                if let Some((bond, &chi)) = bonds.iter().enumerate().find(|(_, &c)| c > cap) {
                    return Err(Error::BondExplosion { bond, chi, cap });
                }
            }
        }
        let sampled = setup.sample_steps.get(next_sample) == Some(&step);
        if step % stride == 0 || step == nu.steps || sampled {
            observe(&state, setup, t, &mut traj)?;
        }
        if sampled {
            let (rho, w) = snapshot_rho(&state, setup)?;
            traj.rhos.push(rho);
            traj.demux_weight += w;
            next_sample += 1;
        }
    }
    traj.final_state = state;
    Ok(traj)
}

/// Phase-space diagnostics of the ensemble-averaged ρ_S at one sample time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub rho: FockDensityMatrix,
    pub purity: f64,
    /// Negativity volume per supermode (FH, SH).
    pub wigner_negativity: Vec<f64>,
    pub mean_photons: Vec<f64>,
    /// Two-mode runs only.
    pub entanglement_negativity: Option<f64>,
    pub wigner: Vec<WignerGrid>,
}

/// Hybrid-mode analysis at the final sample of a two-mode run.
#[derive(Clone, Debug)]
pub struct HybridAnalysis {
    pub search: BsSearchResult,
    pub rho_rotated: FockDensityMatrix,
    /// Negativity volume of the rotated modes Â₀ and B̂₀.
    pub wigner_negativity: [f64; 2],
    pub wigner: [WignerGrid; 2],
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: RunConfig,
    pub z: Vec<f64>,
    pub series: ObservableSeries,
    pub density: Vec<Vec<f64>>,
    pub density_sh: Option<Vec<Vec<f64>>>,
    pub snapshots: Vec<Snapshot>,
    pub hybrid: Option<HybridAnalysis>,
    pub jumps: Vec<Vec<(f64, usize)>>,
    pub cum_trunc_error: f64,
    pub demux_trunc_error: f64,
    pub plan: DemuxPlan,
    pub warnings: Vec<String>,
    pub wall_time: f64,
    /// Final state of trajectory 0.
    pub final_state: VidalMPS,
}

fn mean_rows(rows: &[&Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let m = rows.len() as f64;
    let mut acc = rows[0].clone();
    for r in &rows[1..] {
        for (a, b) in acc.iter_mut().zip(r.iter()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    for a in &mut acc {
        for x in a.iter_mut() {
            *x /= m;
        }
    }
    acc
}

fn mean_series(all: &[&ObservableSeries]) -> Result<ObservableSeries> {
    let first = all[0];
    let mut out = ObservableSeries::new();
    for (k, &t) in first.times.iter().enumerate() {
        let mut values = Vec::new();
        for name in first.channels.keys() {
            let mut s = 0.0;
            for series in all {
                s += series.channels[name][k];
            }
            values.push((name.clone(), s / all.len() as f64));
        }
        out.push(t, values)?;
    }
    Ok(out)
}

fn wigner_spec(cfg: &RunConfig) -> GridSpec {
    GridSpec::square(cfg.analysis.wigner_half_width, cfg.analysis.wigner_points)
}

fn neg_opts(cfg: &RunConfig) -> NegativityOptions {
    NegativityOptions { spacing: cfg.analysis.negativity_spacing, ..NegativityOptions::default() }
}

/// Phase-space analysis of an averaged ρ_S.
pub fn analyze(cfg: &RunConfig, t: f64, rho: FockDensityMatrix) -> Result<Snapshot> {
    let spec = wigner_spec(cfg);
    let opts = neg_opts(cfg);
    let mut wigner_negativity = Vec::new();
    let mut mean_photons = Vec::new();
    let mut grids = Vec::new();
    let entanglement = if rho.n_modes() == 2 {
        for k in 0..2 {
            let single = rho.partial_trace(k)?;
            wigner_negativity.push(wigner_negativity_volume(&single, opts)?);
            mean_photons.push(single.mean_photons(0));
            grids.push(wigner(&single, spec)?);
        }
        Some(entanglement_negativity(&rho)?)
    } else {
        wigner_negativity.push(wigner_negativity_volume(&rho, opts)?);
        mean_photons.push(rho.mean_photons(0));
        grids.push(wigner(&rho, spec)?);
        None
    };
    Ok(Snapshot {
        t,
        purity: rho.purity(),
        rho,
        wigner_negativity,
        mean_photons,
        entanglement_negativity: entanglement,
        wigner: grids,
    })
}

/// Disentangling search on a two-mode ρ_S and the single-mode states of the
/// optimally rotated pair.
pub fn hybrid_analysis(cfg: &RunConfig, rho: &FockDensityMatrix) -> Result<HybridAnalysis> {
    let n = cfg.analysis.search_points;
    let search = disentangle_search(rho, SearchOptions { n_phi: n, n_theta: n, ..SearchOptions::default() })?;
    let rotated = two_mode_bs_transform(rho, search.phi0, search.theta0, Some(rho.dims[0].max(rho.dims[1])))?;
    let opts = neg_opts(cfg);
    let spec = wigner_spec(cfg);
    let a = rotated.partial_trace(0)?;
    let b = rotated.partial_trace(1)?;
    Ok(HybridAnalysis {
        search,
        wigner_negativity: [wigner_negativity_volume(&a, opts)?, wigner_negativity_volume(&b, opts)?],
        wigner: [wigner(&a, spec)?, wigner(&b, spec)?],
        rho_rotated: rotated,
    })
}

/// Run a scenario end to end: propagate every trajectory, average ρ_S over
/// the ensemble, and analyze each sample.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunResult> {
    let start = Instant::now();
    let setup = prepare(cfg)?;
    let mut warnings = cfg.warnings();
    let m = cfg.mcwf.trajectories;
    let loss = LossModel::new(cfg.physics.kappa)?;
    let trajectories = if cfg.physics.kappa > 0.0 {
        run_ensemble(m, cfg.mcwf.seed, cfg.mcwf.parallel, |_, rng| run_trajectory(cfg, &setup, Some((&loss, rng))))?
    } else {
        // Without loss every trajectory is identical.
        vec![run_trajectory::<rand_chacha::ChaCha8Rng>(cfg, &setup, None)?]
    };
    let series = mean_series(&trajectories.iter().map(|t| &t.series).collect::<Vec<_>>())?;
    let density = mean_rows(&trajectories.iter().map(|t| &t.density).collect::<Vec<_>>());
    let density_sh = if setup.chi2 { Some(mean_rows(&trajectories.iter().map(|t| &t.density_sh).collect::<Vec<_>>())) } else { None };
    let dims = vec![setup.demux_cutoff; setup.pulses.len()];
    let mut snapshots = Vec::new();
    for (k, &step) in setup.sample_steps.iter().enumerate() {
        let mats: Vec<CMatrix> = trajectories.iter().map(|t| t.rhos[k].clone()).collect();
        let mut rho = FockDensityMatrix::from_raw(&dims, average_matrices(&mats)?)?;
        if let Some(c) = &cfg.analysis.rho_cutoff {
            rho = rho.restrict(c)?;
        }
        let t = step as f64 * cfg.numerics.dt;
        for w in &rho.warnings {
            warnings.push(format!("t = {t}: {w}"));
        }
        snapshots.push(analyze(cfg, t, rho)?);
    }
    let hybrid = match snapshots.last() {
        Some(s) if s.rho.n_modes() == 2 && cfg.analysis.search_points > 0 => Some(hybrid_analysis(cfg, &s.rho)?),
        _ => None,
    };
    let n_traj = trajectories.len() as f64;
    let cum_trunc_error = trajectories.iter().map(|t| t.final_state.cum_trunc_error()).sum::<f64>() / n_traj;
    let demux_trunc_error = trajectories.iter().map(|t| t.demux_weight).sum::<f64>() / n_traj;
    let jumps = trajectories.iter().map(|t| t.jumps.clone()).collect();
    let final_state = trajectories.into_iter().next().map(|t| t.final_state).unwrap_or(setup.initial.clone());
    Ok(RunResult {
        config: cfg.clone(),
        z: setup.grid.centers(),
        series,
        density,
        density_sh,
        snapshots,
        hybrid,
        jumps,
        cum_trunc_error,
        demux_trunc_error,
        plan: setup.plan,
        warnings,
        wall_time: start.elapsed().as_secs_f64(),
        final_state,
    })
}
