use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Generator for trajectory `index`: the master seed keys the generator and
/// the index selects an independent stream, so the draw sequence does not
/// depend on execution order.
pub fn trajectory_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Run `m` independent trajectories, optionally in parallel. Results are
/// returned in trajectory order regardless of scheduling.
pub fn run_ensemble<T, F>(m: usize, master_seed: u64, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let run = |i: usize| {
        let mut rng = trajectory_rng(master_seed, i);
        f(i, &mut rng)
    };
    if parallel {
        (0..m).into_par_iter().map(run).collect()
    } else {
        (0..m).map(run).collect()
    }
}

/// Arithmetic mean of equally shaped matrices, summed in index order.
pub fn average_matrices(mats: &[CMatrix]) -> Result<CMatrix> {
    let first = mats.first().ok_or_else(|| Error::Validation("no matrices to average".into()))?;
    let mut acc = CMatrix::zeros(first.nrows(), first.ncols());
    for m in mats {
        if m.shape() != first.shape() {
            return Err(Error::Validation("matrices to average differ in shape".into()));
        }
        acc += m;
    }
    Ok(acc / num_complex::Complex64::new(mats.len() as f64, 0.0))
}
