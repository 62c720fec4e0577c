use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{edge_gate, hopping_gate, nl3wm_gate, spm_gate};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mps::TwoSiteGate;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterVariant {
    /// Symmetric splitting, second order in δt.
    #[default]
    Strang,
    /// The plain product `(D_even)(D_odd)(S)`, first order.
    FirstOrder,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi3Params {
    pub length: f64,
    pub n_bins: usize,
    pub dt: f64,
}

impl Chi3Params {
    pub fn new(length: f64, n_bins: usize, dt: f64) -> Result<Self> {
        let p = Chi3Params { length, n_bins, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n_bins as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::Validation("n_bins must be at least 1".into()));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Validation("domain length must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation("dt must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi2Params {
    pub length: f64,
    pub n_bins: usize,
    pub dt: f64,
    /// SH dispersion relative to FH.
    pub beta: f64,
}

impl Chi2Params {
    pub fn new(length: f64, n_bins: usize, dt: f64, beta: f64) -> Result<Self> {
        let p = Chi2Params { length, n_bins, dt, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n_bins as f64
    }

    pub fn validate(&self) -> Result<()> {
        Chi3Params { length: self.length, n_bins: self.n_bins, dt: self.dt }.validate()?;
        if !self.beta.is_finite() {
            return Err(Error::Validation("beta must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Placement {
    One { site: usize, op: CMatrix },
    Two { site: usize, gate: TwoSiteGate },
}

impl Placement {
    pub fn sites(&self) -> (usize, usize) {
        match self {
            Placement::One { site, .. } => (*site, *site),
            Placement::Two { site, .. } => (*site, site + 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub label: String,
    pub placements: Vec<Placement>,
}

/// Ordered layers of gates making up one time step. Layers are applied in
/// order; gates inside a layer touch disjoint sites.
#[derive(Clone, Debug)]
pub struct GateSchedule {
    pub dt: f64,
    pub n_sites: usize,
    pub layers: Vec<Layer>,
}

impl GateSchedule {
    /// Check that every gate matches the local dimensions it will meet, given
    /// the starting dims, and that the layout returns to its start.
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.n_sites {
            return Err(Error::Validation(format!(
                "schedule built for {} sites applied to {} sites",
                self.n_sites,
                dims.len()
            )));
        }
        let mut cur = dims.to_vec();
        for layer in &self.layers {
            let mut used = vec![false; self.n_sites];
            for p in &layer.placements {
                let (l, r) = p.sites();
                if r >= self.n_sites {
                    return Err(Error::Validation(format!("layer {} addresses site {r}", layer.label)));
                }
                if used[l] || used[r] {
                    return Err(Error::Validation(format!("layer {} reuses site {l}", layer.label)));
                }
                used[l] = true;
                used[r] = true;
                match p {
                    Placement::One { site, op } => {
                        if op.nrows() != cur[*site] {
                            return Err(Error::Validation(format!(
                                "layer {}: one-site gate of dim {} at site {site} with dim {}",
                                layer.label,
                                op.nrows(),
                                cur[*site]
                            )));
                        }
                    }
                    Placement::Two { site, gate } => {
                        if gate.d_left != cur[*site] || gate.d_right != cur[site + 1] {
                            return Err(Error::Validation(format!(
                                "layer {}: gate dims ({}, {}) at sites {site},{} with dims ({}, {})",
                                layer.label,
                                gate.d_left,
                                gate.d_right,
                                site + 1,
                                cur[*site],
                                cur[site + 1]
                            )));
                        }
                        cur[*site] = gate.out_left;
                        cur[site + 1] = gate.out_right;
                    }
                }
            }
        }
        if cur != dims {
            return Err(Error::Layout("schedule does not restore the site layout".into()));
        }
        Ok(())
    }

    /// Follow mode labels through all swap gates of one step.
    pub fn track_layout<T: Clone>(&self, labels: &[T]) -> Vec<T> {
        let mut cur = labels.to_vec();
        for layer in &self.layers {
            for p in &layer.placements {
                if let Placement::Two { site, gate } = p {
                    if gate.is_swap() {
                        cur.swap(*site, site + 1);
                    }
                }
            }
        }
        cur
    }

    /// Human-readable listing of the layers.
    pub fn describe(&self) -> String {
        let mut s = format!("schedule: {} sites, dt = {}\n", self.n_sites, self.dt);
        for (k, layer) in self.layers.iter().enumerate() {
            let _ = write!(s, "layer {k:3} {:<14}", layer.label);
            for p in &layer.placements {
                match p {
                    Placement::One { site, .. } => {
                        let _ = write!(s, " [{site}]");
                    }
                    Placement::Two { site, .. } => {
                        let _ = write!(s, " [{site},{}]", site + 1);
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Stage {
    /// χ³ on-site terms (SPM and end-bin dispersion weight).
    OnSite,
    /// χ³ hopping gates starting at even (0-based) bins.
    HopEven,
    HopOdd,
    /// χ² end-bin dispersion weights on FH and SH.
    Edge,
    Nl,
    /// χ² swap-conjugated dispersion blocks for bin pairs starting at even bins.
    BlockEven,
    BlockOdd,
}

/// Drop stages with no gates and merge neighbours of the same kind.
fn compact(stages: &[(Stage, f64)], present: impl Fn(Stage) -> bool) -> Vec<(Stage, f64)> {
    let mut out: Vec<(Stage, f64)> = Vec::new();
    for &(s, f) in stages {
        if !present(s) {
            continue;
        }
        match out.last_mut() {
            Some((last, frac)) if *last == s => *frac += f,
            _ => out.push((s, f)),
        }
    }
    out
}

pub fn chi3_schedule(params: &Chi3Params, d: usize, variant: TrotterVariant) -> Result<GateSchedule> {
    params.validate()?;
    if d == 0 {
        return Err(Error::Validation("local dimension must be positive".into()));
    }
    let n = params.n_bins;
    let dz = params.dz();
    let stages: Vec<(Stage, f64)> = match variant {
        TrotterVariant::Strang => vec![
            (Stage::OnSite, 0.5),
            (Stage::HopEven, 0.5),
            (Stage::HopOdd, 1.0),
            (Stage::HopEven, 0.5),
            (Stage::OnSite, 0.5),
        ],
        TrotterVariant::FirstOrder => {
            vec![(Stage::OnSite, 1.0), (Stage::HopEven, 1.0), (Stage::HopOdd, 1.0)]
        }
    };
    let stages = compact(&stages, |s| match s {
        Stage::HopEven => n >= 2,
        Stage::HopOdd => n >= 3,
        _ => true,
    });
    let mut layers = Vec::new();
    for (stage, frac) in stages {
        let h = frac * params.dt;
        let placements = match stage {
            Stage::OnSite => (0..n)
                .map(|m| {
                    let mut op = spm_gate(dz, h, d);
                    let ends = (m == 0) as u32 + (m == n - 1) as u32;
                    if ends > 0 {
                        op = edge_gate(dz, h, ends as f64, d) * op;
                    }
                    Placement::One { site: m, op }
                })
                .collect(),
            Stage::HopEven | Stage::HopOdd => {
                let start = if stage == Stage::HopEven { 0 } else { 1 };
                let gate = hopping_gate(dz, h, 1.0, d)?;
                (start..n.saturating_sub(1))
                    .step_by(2)
                    .map(|m| Placement::Two { site: m, gate: gate.clone() })
                    .collect()
            }
            _ => unreachable!(),
        };
        layers.push(Layer { label: format!("{stage:?}x{frac}"), placements });
    }
    Ok(GateSchedule { dt: params.dt, n_sites: n, layers })
}

/// Schedule on the interleaved layout `a1, b1, a2, b2, …` (2N sites).
///
/// Dispersion between bins `m` and `m+1` is applied as a block: a SWAP of
/// `b_m` and `a_{m+1}`, then the FH and SH hopping gates on the now adjacent
/// pairs, then the SWAP back.
pub fn chi2_schedule(params: &Chi2Params, d_a: usize, d_b: usize, variant: TrotterVariant) -> Result<GateSchedule> {
    params.validate()?;
    if d_b == 0 {
        return Err(Error::Validation("SH cutoff must be positive".into()));
    }
    let n = params.n_bins;
    let dz = params.dz();
    let beta = params.beta;
    let stages: Vec<(Stage, f64)> = match variant {
        TrotterVariant::Strang => vec![
            (Stage::Edge, 0.5),
            (Stage::Nl, 0.5),
            (Stage::BlockEven, 0.5),
            (Stage::BlockOdd, 1.0),
            (Stage::BlockEven, 0.5),
            (Stage::Nl, 0.5),
            (Stage::Edge, 0.5),
        ],
        TrotterVariant::FirstOrder => vec![
            (Stage::Edge, 1.0),
            (Stage::Nl, 1.0),
            (Stage::BlockEven, 1.0),
            (Stage::BlockOdd, 1.0),
        ],
    };
    let stages = compact(&stages, |s| match s {
        Stage::BlockEven => n >= 2,
        Stage::BlockOdd => n >= 3,
        _ => true,
    });
    let mut layers = Vec::new();
    for (stage, frac) in stages {
        let h = frac * params.dt;
        match stage {
            Stage::Edge => {
                let mut placements = Vec::new();
                for m in 0..n {
                    let ends = (m == 0) as u32 + (m == n - 1) as u32;
                    if ends == 0 {
                        continue;
                    }
                    let e = ends as f64;
                    placements.push(Placement::One { site: 2 * m, op: edge_gate(dz, h, e, d_a) });
                    placements.push(Placement::One { site: 2 * m + 1, op: edge_gate(dz, h, e * beta, d_b) });
                }
                layers.push(Layer { label: format!("Edgex{frac}"), placements });
            }
            Stage::Nl => {
                let gate = nl3wm_gate(dz, h, d_a, d_b)?;
                let placements = (0..n).map(|m| Placement::Two { site: 2 * m, gate: gate.clone() }).collect();
                layers.push(Layer { label: format!("NLx{frac}"), placements });
            }
            Stage::BlockEven | Stage::BlockOdd => {
                let start = if stage == Stage::BlockEven { 0 } else { 1 };
                let bins: Vec<usize> = (start..n - 1).step_by(2).collect();
                let swap_in = TwoSiteGate::swap(d_b, d_a);
                let swap_out = TwoSiteGate::swap(d_a, d_b);
                let ua = hopping_gate(dz, h, 1.0, d_a)?;
                let ub = hopping_gate(dz, h, beta, d_b)?;
                let tag = format!("{stage:?}x{frac}");
                layers.push(Layer {
                    label: format!("{tag}:swap"),
                    placements: bins.iter().map(|&m| Placement::Two { site: 2 * m + 1, gate: swap_in.clone() }).collect(),
                });
                let mut disp = Vec::new();
                for &m in &bins {
                    disp.push(Placement::Two { site: 2 * m, gate: ua.clone() });
                    disp.push(Placement::Two { site: 2 * m + 2, gate: ub.clone() });
                }
                layers.push(Layer { label: format!("{tag}:disp"), placements: disp });
                layers.push(Layer {
                    label: format!("{tag}:unswap"),
                    placements: bins.iter().map(|&m| Placement::Two { site: 2 * m + 1, gate: swap_out.clone() }).collect(),
                });
            }
            _ => unreachable!(),
        }
    }
    Ok(GateSchedule { dt: params.dt, n_sites: 2 * n, layers })
}
