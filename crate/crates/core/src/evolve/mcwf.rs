use rand::Rng;

use crate::error::{Error, Result};
use crate::fock;
use crate::mps::VidalMPS;

/// Upper bound on the summed jump probability of a single step.
pub const JUMP_PROBABILITY_LIMIT: f64 = 0.1;

/// Uniform linear loss with jump operators `√κ a_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossModel {
    pub kappa: f64,
    /// Sites subject to loss; `None` means every site.
    pub sites: Option<Vec<usize>>,
}

impl LossModel {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Validation(format!("loss rate kappa must be nonnegative, got {kappa}")));
        }
        Ok(LossModel { kappa, sites: None })
    }

    fn site_list(&self, n: usize) -> Vec<usize> {
        match &self.sites {
            Some(s) => s.iter().copied().filter(|&m| m < n).collect(),
            None => (0..n).collect(),
        }
    }
}

/// One first-order MCWF loss step.
///
/// The damping `exp(−κ δt n/2)` is applied on every lossy site, and a single
/// uniform draw then selects at most one jump `a_m` with probability
/// `κ δt ⟨n_m⟩`. Damping a jumped state too keeps pure loss exact:
/// `a e^{−κτn/2} ∝ e^{−κτn/2} a`, so the jump time within the step does not
/// matter. The state is renormalized and returned to canonical form.
pub fn mcwf_step<R: Rng + ?Sized>(
    state: &mut VidalMPS,
    loss: &LossModel,
    dt: f64,
    rng: &mut R,
) -> Result<Option<usize>> {
    if loss.kappa < 0.0 || !loss.kappa.is_finite() {
        return Err(Error::Validation("loss rate kappa must be nonnegative".into()));
    }
    if loss.kappa == 0.0 {
        return Ok(None);
    }
    let sites = loss.site_list(state.n_sites());
    let probs: Vec<f64> = sites.iter().map(|&m| loss.kappa * dt * state.local_number(m)).collect();
    let total: f64 = probs.iter().sum();
    if total > JUMP_PROBABILITY_LIMIT {
        return Err(Error::StepSize { total, limit: JUMP_PROBABILITY_LIMIT });
    }
    let u: f64 = rng.random();
    for &m in &sites {
        let d = state.local_dims()[m];
        let damp = fock::diagonal(d, |n| (-0.5 * loss.kappa * dt * n as f64).exp());
        state.apply_local_operator_raw(m, &damp)?;
    }
    let mut jumped = None;
    if u < total {
        let mut acc = 0.0;
        let mut chosen = *sites.last().unwrap();
        for (&m, &p) in sites.iter().zip(&probs) {
            acc += p;
            if u < acc {
                chosen = m;
                break;
            }
        }
        let a = fock::annihilation(state.local_dims()[chosen]);
        state.apply_local_operator_raw(chosen, &a)?;
        jumped = Some(chosen);
    }
    state.canonicalize()?;
    Ok(jumped)
}
