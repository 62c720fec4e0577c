//! Run directories: manifest, CSV/JSON artifacts and plot-ready exports.
//!
//! Every CSV starts with a `# config_hash: <hex>` line and every JSON file
//! carries a `config_hash` field, so files from different runs cannot be
//! mixed silently.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{validate_config, RunConfig};
use crate::density::{DensityMatrixJson, FockDensityMatrix};
use crate::error::{Error, Result};
use crate::mps::snapshot;
use crate::phasespace::{disentangle_search, wigner, GridSpec, SearchOptions};
use crate::scenario::RunResult;

pub const MANIFEST: &str = "manifest.json";
const HASH_PREFIX: &str = "# config_hash: ";

/// SHA-256 of the canonical TOML form of a config. The output directory is
/// left out so a run reproduced elsewhere carries the same hash.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.output_dir.clear();
    Ok(hex::encode(Sha256::digest(c.to_toml()?.as_bytes())))
}

fn file_digest(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub format: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub master_seed: u64,
    pub trajectories: usize,
    /// Jump count per trajectory.
    pub jumps: Vec<usize>,
    /// Ensemble mean of the summed TEBD truncation weight.
    pub cum_trunc_error: f64,
    /// Ensemble mean of the truncation weight spent in demultiplexing.
    pub demux_trunc_error: f64,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    /// SHA-256 of every artifact, keyed by path relative to the run directory.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| Error::Format(format!("{}: {e}", dir.join(MANIFEST).display())))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if config_hash(&m.config)? != m.config_hash {
            return Err(Error::Format("manifest config does not match its hash".into()));
        }
        Ok(m)
    }
}

/// ρ_S file: the density matrix plus its sample time and run hash.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RhoFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(flatten)]
    pub rho: DensityMatrixJson,
}

impl RhoFile {
    pub fn load(path: &Path) -> Result<RhoFile> {
        let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HybridFile {
    pub config_hash: String,
    pub t: f64,
    pub phi0: f64,
    pub theta0: f64,
    pub minimum: f64,
    pub at_origin: f64,
    pub wigner_negativity_a0: f64,
    pub wigner_negativity_b0: f64,
}

/// Load a run config from TOML text or from a run manifest.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Validation(format!("manifest: {e}")))?;
        let problems = m.config.problems();
        if !problems.is_empty() {
            return Err(Error::Validation(problems.join("; ")));
        }
        return Ok(m.config);
    }
    validate_config(&text)
}

fn csv_with_hash(hash: &str, body: &str) -> String {
    format!("{HASH_PREFIX}{hash}\n{body}")
}

/// Single writer for a run directory; records each file's digest.
struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    files: BTreeMap<String, String>,
}

impl Writer<'_> {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.insert(rel.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn csv(&mut self, rel: &str, body: &str) -> Result<()> {
        let text = csv_with_hash(&self.hash, body);
        self.put(rel, text.as_bytes())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(rel, text.as_bytes())
    }
}

/// Refuse to write into a directory that holds artifacts of another run.
fn check_target(dir: &Path, hash: &str) -> Result<()> {
    if !dir.exists() {
        return Ok(());
    }
    let manifest = dir.join(MANIFEST);
    if manifest.exists() {
        let m = Manifest::load(dir)?;
        if m.config_hash != hash {
            return Err(Error::Validation(format!(
                "{} holds run {} ; refusing to mix in run {hash}",
                dir.display(),
                m.config_hash
            )));
        }
        return Ok(());
    }
    if fs::read_dir(dir)?.next().is_some() {
        return Err(Error::Validation(format!("{} is not empty and has no manifest", dir.display())));
    }
    Ok(())
}

fn density_csv(times: &[f64], z: &[f64], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("t,z,value\n");
    for (t, row) in times.iter().zip(rows) {
        for (zj, v) in z.iter().zip(row) {
            let _ = writeln!(out, "{t},{zj},{v}");
        }
    }
    out
}

/// Long-format `t,key,value` rows of the propagation series and of the
/// sample-time analysis.
fn series_csv(result: &RunResult) -> String {
    let mut rows: Vec<(f64, String, f64)> = result.series.rows().into_iter().map(|(t, k, v)| (t, k.to_string(), v)).collect();
    let two = result.density_sh.is_some();
    for s in &result.snapshots {
        rows.push((s.t, "purity".into(), s.purity));
        rows.push((s.t, "wigner_negativity".into(), s.wigner_negativity[0]));
        rows.push((s.t, "supermode_photons".into(), s.mean_photons[0]));
        if two {
            rows.push((s.t, "wigner_negativity_sh".into(), s.wigner_negativity[1]));
            rows.push((s.t, "supermode_photons_sh".into(), s.mean_photons[1]));
        }
        if let Some(e) = s.entanglement_negativity {
            rows.push((s.t, "entanglement_negativity".into(), e));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = String::from("t,key,value\n");
    for (t, k, v) in rows {
        let _ = writeln!(out, "{t},{k},{v}");
    }
    out
}

fn defaults_notes(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!(
            "grid: L = {}, N = {} bins sampled at their centres; grid size and domain are run choices, not taken from a reference",
            cfg.physics.length, cfg.physics.n_bins
        ),
        format!("sample times: {} uniform snapshots including t = 0 and the final step", cfg.analysis.samples),
        "density matrices are ensemble averages over trajectories; scalar series are ensemble means".into(),
    ]
}

/// Write all artifacts of a finished run and its manifest. Returns the manifest.
pub fn write_run(dir: &Path, result: &RunResult) -> Result<Manifest> {
    let cfg = &result.config;
    let hash = config_hash(cfg)?;
    check_target(dir, &hash)?;
    fs::create_dir_all(dir)?;
    let mut w = Writer { dir, hash: hash.clone(), files: BTreeMap::new() };

    w.put("config.toml", format!("{HASH_PREFIX}{hash}\n{}", cfg.to_toml()?).as_bytes())?;
    w.csv("series.csv", &series_csv(result))?;
    w.csv("density.csv", &density_csv(&result.series.times, &result.z, &result.density))?;
    if let Some(sh) = &result.density_sh {
        w.csv("density_sh.csv", &density_csv(&result.series.times, &result.z, sh))?;
    }
    for (k, s) in result.snapshots.iter().enumerate() {
        let file = RhoFile { config_hash: Some(hash.clone()), t: Some(s.t), rho: s.rho.to_json() };
        w.json(&format!("rho/rho_{k:03}.json"), &file)?;
    }
    if let Some(h) = &result.hybrid {
        w.csv("search.csv", &h.search.to_csv())?;
        let t = result.snapshots.last().map(|s| s.t).unwrap_or(0.0);
        w.json(
            "hybrid.json",
            &HybridFile {
                config_hash: hash.clone(),
                t,
                phi0: h.search.phi0,
                theta0: h.search.theta0,
                minimum: h.search.minimum,
                at_origin: h.search.at_origin,
                wigner_negativity_a0: h.wigner_negativity[0],
                wigner_negativity_b0: h.wigner_negativity[1],
            },
        )?;
    }
    w.csv("demux_plan.csv", &result.plan.describe())?;
    let mut jumps = String::from("trajectory,t,bin\n");
    for (i, list) in result.jumps.iter().enumerate() {
        for (t, site) in list {
            let _ = writeln!(jumps, "{i},{t},{site}");
        }
    }
    w.csv("jumps.csv", &jumps)?;
    let mut state = Vec::new();
    snapshot::write_mps(&result.final_state, &mut state)?;
    w.put("final_state.mps", &state)?;

    let manifest = Manifest {
        format: "qpulse-run-1".into(),
        config_hash: hash,
        config: cfg.clone(),
        master_seed: cfg.mcwf.seed,
        trajectories: result.jumps.len(),
        jumps: result.jumps.iter().map(|j| j.len()).collect(),
        cum_trunc_error: result.cum_trunc_error,
        demux_trunc_error: result.demux_trunc_error,
        wall_time_s: result.wall_time,
        warnings: result.warnings.clone(),
        notes: defaults_notes(cfg),
        files: w.files.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST), text)?;
    Ok(manifest)
}

fn embedded_hash(path: &Path) -> Result<Option<String>> {
    let name = path.to_string_lossy();
    if name.ends_with(".csv") || name.ends_with(".toml") {
        let text = fs::read_to_string(path)?;
        let first = text.lines().next().unwrap_or("");
        return Ok(first.strip_prefix(HASH_PREFIX).map(|h| h.trim().to_string()));
    }
    if name.ends_with(".json") {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(v.get("config_hash").and_then(|h| h.as_str()).map(str::to_string));
    }
    Ok(None)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Load a run directory's manifest and check that every artifact belongs to
/// it: listed digests must match and no file may carry another run's hash.
pub fn verify_run_dir(dir: &Path) -> Result<Manifest> {
    let m = Manifest::load(dir)?;
    for (rel, digest) in &m.files {
        let p = dir.join(rel);
        if !p.exists() {
            return Err(Error::Format(format!("{rel} listed in the manifest is missing")));
        }
        if &file_digest(&p)? != digest {
            return Err(Error::Format(format!("{rel} was modified after the run")));
        }
    }
    let mut all = Vec::new();
    collect_files(dir, &mut all)?;
    for p in all {
        if p.file_name().map(|n| n == MANIFEST).unwrap_or(false) {
            continue;
        }
        if let Some(h) = embedded_hash(&p)? {
            if h != m.config_hash {
                return Err(Error::Validation(format!(
                    "{} belongs to run {h}, not {}; mixed-run directory",
                    p.display(),
                    m.config_hash
                )));
            }
        }
    }
    Ok(m)
}

/// Plot datasets derivable from a run directory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Photon density `(t, z, value)`.
    DensityMap,
    /// One Wigner grid per sample time (and per supermode).
    WignerSnapshots,
    /// `(Φ, Θ, N)` map recomputed from the final two-mode ρ_S.
    NegativityMap,
    /// Purity and negativity series at the sample times.
    PurityNegativity,
    All,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "density_map" => Figure::DensityMap,
            "wigner_snapshots" => Figure::WignerSnapshots,
            "negativity_map" => Figure::NegativityMap,
            "purity_negativity" => Figure::PurityNegativity,
            "all" => Figure::All,
            other => {
                return Err(Error::Validation(format!(
                    "unknown figure '{other}' (density_map, wigner_snapshots, negativity_map, purity_negativity, all)"
                )))
            }
        })
    }
}

fn read_csv_body(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

fn rho_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir.join("rho"))?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    v.sort();
    Ok(v)
}

/// Emit plot-ready files for `figure` under `<dir>/figures`. Returns the
/// written paths.
pub fn export_plot_data(dir: &Path, figure: Figure) -> Result<Vec<PathBuf>> {
    let m = verify_run_dir(dir)?;
    let cfg = &m.config;
    let out_dir = dir.join("figures");
    fs::create_dir_all(&out_dir)?;
    let hash = m.config_hash.clone();
    let mut written = Vec::new();
    let mut emit = |rel: String, body: String| -> Result<()> {
        let p = out_dir.join(&rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, csv_with_hash(&hash, &body))?;
        written.push(p);
        Ok(())
    };
    let all = figure == Figure::All;
    if all || figure == Figure::DensityMap {
        for name in ["density", "density_sh"] {
            let src = dir.join(format!("{name}.csv"));
            if src.exists() {
                let mut body = String::from("t,z,value\n");
                for row in read_csv_body(&src)? {
                    let _ = writeln!(body, "{}", row.join(","));
                }
                emit(format!("{name}_map.csv"), body)?;
            }
        }
    }
    if all || figure == Figure::WignerSnapshots {
        let spec = GridSpec::square(cfg.analysis.wigner_half_width, cfg.analysis.wigner_points);
        for (k, path) in rho_files(dir)?.iter().enumerate() {
            let file = RhoFile::load(path)?;
            let rho = FockDensityMatrix::from_json(&file.rho)?;
            let t = file.t.unwrap_or(0.0);
            let modes: Vec<(String, FockDensityMatrix)> = if rho.n_modes() == 2 {
                vec![("fh".into(), rho.partial_trace(0)?), ("sh".into(), rho.partial_trace(1)?)]
            } else {
                vec![(String::new(), rho)]
            };
            for (label, single) in modes {
                let g = wigner(&single, spec)?;
                let suffix = if label.is_empty() { String::new() } else { format!("_{label}") };
                emit(format!("wigner/wigner_{k:03}{suffix}.csv"), format!("# t = {t}\n{}", g.to_csv()))?;
            }
        }
    }
    if all || figure == Figure::NegativityMap {
        let files = rho_files(dir)?;
        let last = files.last().ok_or_else(|| Error::Format("run has no density matrices".into()))?;
        let rho = FockDensityMatrix::from_json(&RhoFile::load(last)?.rho)?;
        if rho.n_modes() == 2 {
            let n = cfg.analysis.search_points.max(1);
            let search = disentangle_search(&rho, SearchOptions { n_phi: n, n_theta: n, ..SearchOptions::default() })?;
            emit("negativity_map.csv".into(), search.to_csv())?;
        } else if figure == Figure::NegativityMap {
            return Err(Error::Validation("negativity_map needs a two-mode run".into()));
        }
    }
    if all || figure == Figure::PurityNegativity {
        let mut by_time: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let keys = ["purity", "wigner_negativity", "wigner_negativity_sh", "entanglement_negativity"];
        let mut present: Vec<&str> = Vec::new();
        let mut order: Vec<String> = Vec::new();
        for row in read_csv_body(&dir.join("series.csv"))? {
            if row.len() == 3 && keys.contains(&row[1].as_str()) {
                if !by_time.contains_key(&row[0]) {
                    order.push(row[0].clone());
                }
                by_time.entry(row[0].clone()).or_default().insert(row[1].clone(), row[2].clone());
                if let Some(k) = keys.iter().find(|k| **k == row[1]) {
                    if !present.contains(k) {
                        present.push(k);
                    }
                }
            }
        }
        present.sort_by_key(|k| keys.iter().position(|x| x == k));
        let mut body = format!("t,{}\n", present.join(","));
        for t in order {
            let vals: Vec<String> = present.iter().map(|k| by_time[&t].get(*k).cloned().unwrap_or_default()).collect();
            let _ = writeln!(body, "{t},{}", vals.join(","));
        }
        emit("purity_negativity.csv".into(), body)?;
    }
    Ok(written)
}
