//! Run configuration: a TOML document with `physics`, `numerics`, `mcwf`
//! and `analysis` tables.
//!
//! ```toml
//! scenario = "kerr_soliton"
//! output_dir = "runs/kerr"
//!
//! [physics]
//! length = 10.0
//! n_bins = 32
//! nbar = 3.0
//!
//! [numerics]
//! dt = 0.01
//! steps = 300
//! cutoff = 6
//! chi_max = 20
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::TrotterVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Coherent fundamental sech soliton under χ³.
    KerrSoliton,
    /// Coherent second-order soliton (breather) under χ³.
    SecondOrderSoliton,
    /// Coherent FH/SH simulton under χ².
    Simulton,
    /// User-chosen envelope and amplitude.
    Custom,
}

impl Scenario {
    pub fn is_chi2(self, custom_model: Option<Model>) -> bool {
        match self {
            Scenario::Simulton => true,
            Scenario::Custom => custom_model == Some(Model::Chi2),
            _ => false,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::KerrSoliton => "kerr_soliton",
            Scenario::SecondOrderSoliton => "second_order_soliton",
            Scenario::Simulton => "simulton",
            Scenario::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Chi3,
    Chi2,
}

/// Envelope shapes available to the custom scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Sech,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub length: f64,
    pub n_bins: usize,
    /// Mean photon number of the fundamental pulse (FH for χ²).
    pub nbar: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Custom scenario only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    /// Envelope width for the custom scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Coherent amplitude `[re, im]` for the custom scenario; defaults to `[√n̄, 0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
}

fn default_beta() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub dt: f64,
    pub steps: usize,
    /// Local Fock cutoff (FH cutoff for χ²).
    pub cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_sh: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_max: Option<usize>,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
    #[serde(default)]
    pub trotter: TrotterVariant,
    /// Largest tolerated coherent-state tail beyond the cutoff per bin.
    #[serde(default = "default_max_deficit")]
    pub max_deficit: f64,
    /// Abort a trajectory when a bond exceeds this dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_cap: Option<usize>,
}

fn default_trunc_tol() -> f64 {
    1e-10
}

fn default_max_deficit() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mcwf {
    #[serde(default = "one")]
    pub trajectories: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "yes")]
    pub parallel: bool,
}

impl Default for Mcwf {
    fn default() -> Self {
        Mcwf { trajectories: 1, seed: 1, parallel: true }
    }
}

fn one() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    /// Number of uniformly spaced snapshot times (including t = 0 and the end).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Observable sampling stride in steps.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Local dimension every bin is padded to before demultiplexing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demux_cutoff: Option<usize>,
    /// Per-mode cutoff of the stored reduced density matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_cutoff: Option<Vec<usize>>,
    #[serde(default = "default_wigner_half_width")]
    pub wigner_half_width: f64,
    #[serde(default = "default_wigner_points")]
    pub wigner_points: usize,
    /// Grid points per axis of the (Φ, Θ) search; 0 disables it.
    #[serde(default = "default_search_points")]
    pub search_points: usize,
    #[serde(default = "default_spacing")]
    pub negativity_spacing: f64,
}

fn default_samples() -> usize {
    8
}

fn default_stride() -> usize {
    10
}

fn default_wigner_half_width() -> f64 {
    5.0
}

fn default_wigner_points() -> usize {
    101
}

fn default_search_points() -> usize {
    41
}

fn default_spacing() -> f64 {
    0.05
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            samples: default_samples(),
            stride: default_stride(),
            demux_cutoff: None,
            rho_cutoff: None,
            wigner_half_width: default_wigner_half_width(),
            wigner_points: default_wigner_points(),
            search_points: default_search_points(),
            negativity_spacing: default_spacing(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "default_output")]
    pub output_dir: String,
    pub physics: Physics,
    pub numerics: Numerics,
    #[serde(default)]
    pub mcwf: Mcwf,
    #[serde(default)]
    pub analysis: Analysis,
}

fn default_output() -> String {
    "run".into()
}

impl RunConfig {
    pub fn is_chi2(&self) -> bool {
        self.scenario.is_chi2(self.physics.model)
    }

    pub fn dz(&self) -> f64 {
        self.physics.length / self.physics.n_bins as f64
    }

    pub fn cutoff_sh(&self) -> usize {
        self.numerics.cutoff_sh.unwrap_or(self.numerics.cutoff)
    }

    /// Collect every constraint violation; empty when the config is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let ph = &self.physics;
        let nu = &self.numerics;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(ph.length) {
            p.push(format!("physics.length must be positive (got {})", ph.length));
        }
        if ph.n_bins == 0 {
            p.push("physics.n_bins must be at least 1".into());
        }
        if !(ph.nbar >= 0.0 && ph.nbar.is_finite()) {
            p.push(format!("physics.nbar must be nonnegative (got {})", ph.nbar));
        }
        if self.scenario != Scenario::Custom && !positive(ph.nbar) {
            p.push(format!("physics.nbar must be positive for {} (got {})", self.scenario, ph.nbar));
        }
        if !(ph.kappa >= 0.0 && ph.kappa.is_finite()) {
            p.push(format!("physics.kappa must be nonnegative (got {})", ph.kappa));
        }
        if !ph.beta.is_finite() {
            p.push("physics.beta must be finite".into());
        }
        if self.scenario != Scenario::Custom {
            for (name, set) in [
                ("model", ph.model.is_some()),
                ("envelope", ph.envelope.is_some()),
                ("width", ph.width.is_some()),
                ("alpha", ph.alpha.is_some()),
            ] {
                if set {
                    p.push(format!("physics.{name} is only meaningful for the custom scenario"));
                }
            }
        }
        if let Some(w) = ph.width {
            if !positive(w) {
                p.push(format!("physics.width must be positive (got {w})"));
            }
        }
        if !positive(nu.dt) {
            p.push(format!("numerics.dt must be positive (got {})", nu.dt));
        }
        if nu.cutoff < 2 {
            p.push(format!("numerics.cutoff must be at least 2 (got {})", nu.cutoff));
        }
        if let Some(c) = nu.cutoff_sh {
            if c < 1 {
                p.push("numerics.cutoff_sh must be at least 1".into());
            }
            if !self.is_chi2() {
                p.push("numerics.cutoff_sh is only meaningful for χ² runs".into());
            }
        }
        if nu.chi_max == Some(0) {
            p.push("numerics.chi_max must be at least 1".into());
        }
        if !(nu.trunc_tol >= 0.0 && nu.trunc_tol < 1.0) {
            p.push(format!("numerics.trunc_tol must lie in [0, 1) (got {})", nu.trunc_tol));
        }
        if !(nu.max_deficit > 0.0 && nu.max_deficit < 1.0) {
            p.push(format!("numerics.max_deficit must lie in (0, 1) (got {})", nu.max_deficit));
        }
        if self.mcwf.trajectories == 0 {
            p.push("mcwf.trajectories must be at least 1".into());
        }
        let an = &self.analysis;
        if an.samples < 2 {
            p.push("analysis.samples must be at least 2".into());
        }
        if an.stride == 0 {
            p.push("analysis.stride must be at least 1".into());
        }
        if an.wigner_points < 2 || !positive(an.wigner_half_width) {
            p.push("analysis.wigner_points must be ≥ 2 and wigner_half_width positive".into());
        }
        if !positive(an.negativity_spacing) {
            p.push("analysis.negativity_spacing must be positive".into());
        }
        if let Some(c) = &an.rho_cutoff {
            let want = if self.is_chi2() { 2 } else { 1 };
            if c.len() != want || c.contains(&0) {
                p.push(format!("analysis.rho_cutoff needs {want} positive entries"));
            }
        }
        p
    }

    /// Advisory notes that do not block a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.scenario == Scenario::Simulton && (self.physics.beta - 2.0).abs() > 1e-12 {
            w.push(format!("simulton profile is stationary only for beta = 2; running with beta = {}", self.physics.beta));
        }
        if self.mcwf.trajectories > 1 && self.physics.kappa == 0.0 {
            w.push("several trajectories without loss are identical".into());
        }
        w
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Parse and validate configuration text. All problems are reported together.
pub fn validate_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Validation(format!("config: {}", e.message())))?;
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    Ok(cfg)
}

/// Desk-scale defaults for each named scenario.
pub fn preset(scenario: Scenario) -> RunConfig {
    let (physics, numerics, analysis) = match scenario {
        Scenario::KerrSoliton | Scenario::Custom => (
            Physics { length: 10.0, n_bins: 32, nbar: 3.0, kappa: 0.0, beta: 2.0, model: None, envelope: None, width: None, alpha: None },
            Numerics {
                dt: 0.01,
                steps: 300,
                cutoff: 6,
                cutoff_sh: None,
                chi_max: Some(20),
                trunc_tol: 1e-10,
                trotter: TrotterVariant::Strang,
                max_deficit: 1e-3,
                hard_cap: None,
            },
            Analysis { demux_cutoff: Some(26), ..Analysis::default() },
        ),
        Scenario::SecondOrderSoliton => (
            Physics { length: 12.0, n_bins: 32, nbar: 2.0, kappa: 0.0, beta: 2.0, model: None, envelope: None, width: None, alpha: None },
            Numerics {
                dt: 0.005,
                steps: 160,
                cutoff: 10,
                cutoff_sh: None,
                chi_max: Some(30),
                trunc_tol: 1e-10,
                trotter: TrotterVariant::Strang,
                max_deficit: 1e-3,
                hard_cap: None,
            },
            Analysis { search_points: 0, demux_cutoff: Some(30), ..Analysis::default() },
        ),
        Scenario::Simulton => (
            Physics { length: 20.0, n_bins: 24, nbar: 4.0, kappa: 0.0, beta: 2.0, model: None, envelope: None, width: None, alpha: None },
            Numerics {
                dt: 0.02,
                steps: 200,
                cutoff: 6,
                cutoff_sh: Some(4),
                chi_max: Some(20),
                trunc_tol: 1e-10,
                trotter: TrotterVariant::Strang,
                max_deficit: 1e-3,
                hard_cap: None,
            },
            Analysis { demux_cutoff: Some(18), rho_cutoff: Some(vec![16, 8]), ..Analysis::default() },
        ),
    };
    let mut cfg = RunConfig {
        scenario,
        output_dir: format!("runs/{scenario}"),
        physics,
        numerics,
        mcwf: Mcwf::default(),
        analysis,
    };
    if scenario == Scenario::Custom {
        cfg.physics.envelope = Some(Envelope::Gaussian);
        cfg.physics.width = Some(1.0);
        cfg.physics.model = Some(Model::Chi3);
    }
    cfg
}
