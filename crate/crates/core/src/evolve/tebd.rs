use rand::Rng;

use super::mcwf::{mcwf_step, LossModel};
use super::series::ObservableSeries;
use crate::error::{Error, Result};
use crate::gates::{GateSchedule, Placement};
use crate::mps::VidalMPS;

/// Observable sampler called with the current time and state.
pub type Recorder<'a> = Box<dyn FnMut(f64, &VidalMPS) -> Result<Vec<(String, f64)>> + 'a>;

/// Apply every layer of one time step. Returns the total discarded weight.
pub fn apply_schedule(state: &mut VidalMPS, schedule: &GateSchedule) -> Result<f64> {
    let mut weight = 0.0;
    for layer in &schedule.layers {
        for p in &layer.placements {
            match p {
                Placement::One { site, op } => state.apply_one_site_gate(*site, op)?,
                Placement::Two { site, gate } => weight += state.apply_two_site_gate(*site, gate)?,
            }
        }
    }
    Ok(weight)
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub n_steps: usize,
    /// Sample every `stride` steps (the initial and final states are always sampled).
    pub stride: usize,
    /// Abort when any bond exceeds this dimension.
    pub hard_cap: Option<usize>,
}

impl RunOptions {
    pub fn new(n_steps: usize, stride: usize) -> Self {
        RunOptions { n_steps, stride: stride.max(1), hard_cap: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub site: usize,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub series: ObservableSeries,
    pub steps_done: usize,
    pub jumps: Vec<Jump>,
    /// Set when the run stopped early; the series holds everything recorded
    /// up to that point.
    pub aborted: Option<Error>,
}

fn record(series: &mut ObservableSeries, recorders: &mut [Recorder<'_>], t: f64, state: &VidalMPS) -> Result<()> {
    let mut values = Vec::new();
    for r in recorders.iter_mut() {
        values.extend(r(t, state)?);
    }
    if !values.is_empty() {
        series.push(t, values)?;
    }
    Ok(())
}

/// Unitary TEBD propagation for `n_steps` steps.
pub fn tebd_run(
    state: &mut VidalMPS,
    schedule: &GateSchedule,
    opts: RunOptions,
    recorders: &mut [Recorder<'_>],
) -> Result<RunOutcome> {
    propagate::<rand_chacha::ChaCha8Rng>(state, schedule, opts, recorders, None)
}

/// TEBD with an optional loss layer after each unitary sweep.
///
/// Errors in validation or in recorders are returned directly. Numerical
/// failures and bond explosions during stepping end the run with the partial
/// series and the error stored in [`RunOutcome::aborted`].
pub fn propagate<R: Rng>(
    state: &mut VidalMPS,
    schedule: &GateSchedule,
    opts: RunOptions,
    recorders: &mut [Recorder<'_>],
    mut loss: Option<(&LossModel, &mut R)>,
) -> Result<RunOutcome> {
    schedule.validate(state.local_dims())?;
    let stride = opts.stride.max(1);
    let mut series = ObservableSeries::new();
    let mut jumps = Vec::new();
    record(&mut series, recorders, 0.0, state)?;
    for step in 1..=opts.n_steps {
        let t = step as f64 * schedule.dt;
        let stepped = apply_schedule(state, schedule).and_then(|_| match loss.as_mut() {
            Some((model, rng)) => mcwf_step(state, model, schedule.dt, &mut **rng),
            None => Ok(None),
        });
        match stepped {
            Ok(Some(site)) => jumps.push(Jump { time: t, site }),
            Ok(None) => {}
            Err(e @ Error::StepSize { .. }) => return Err(e),
            Err(e) => {
                return Ok(RunOutcome { series, steps_done: step - 1, jumps, aborted: Some(e) });
            }
        }
        if let Some(cap) = opts.hard_cap {
            let bonds = state.bond_dims();
            if let Some((bond, &chi)) = bonds.iter().enumerate().find(|(_, &c)| c > cap) {
                record(&mut series, recorders, t, state)?;
                return Ok(RunOutcome {
                    series,
                    steps_done: step,
                    jumps,
                    aborted: Some(Error::BondExplosion { bond, chi, cap }),
                });
            }
        }
        if step % stride == 0 || step == opts.n_steps {
            record(&mut series, recorders, t, state)?;
        }
    }
    Ok(RunOutcome { series, steps_done: opts.n_steps, jumps, aborted: None })
}
