//! Binary MPS snapshots.
//!
//! All integers are `u64` and all reals `f64`, little-endian:
//!
//! ```text
//! magic            8 bytes  "QPMPS001"
//! n_sites          u64
//! chi_max          u64      0 = unbounded
//! trunc_tol        f64
//! cum_trunc_error  f64
//! local_dims       n_sites × u64
//! bond_dims        (n_sites + 1) × u64          bond k is left of site k
//! lambdas          Σ bond_dims × f64            bond 0 first
//! gammas           per site, chi_l·d·chi_r complex values as (re, im)
//!                  pairs, ordered (left, physical, right) row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64 as C64;

use super::{Tensor3, Truncation, VidalMPS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QPMPS001";

/// Upper bound on any single dimension read from a file.
const MAX_DIM: u64 = 1 << 20;

pub fn write_mps<W: Write>(mps: &VidalMPS, mut w: W) -> Result<()> {
    let n = mps.n_sites();
    w.write_all(MAGIC)?;
    w.write_u64::<LittleEndian>(n as u64)?;
    w.write_u64::<LittleEndian>(mps.truncation.chi_max.unwrap_or(0) as u64)?;
    w.write_f64::<LittleEndian>(mps.truncation.trunc_tol)?;
    w.write_f64::<LittleEndian>(mps.cum_trunc_error())?;
    for &d in mps.local_dims() {
        w.write_u64::<LittleEndian>(d as u64)?;
    }
    for chi in mps.bond_dims() {
        w.write_u64::<LittleEndian>(chi as u64)?;
    }
    for lam in mps.lambdas() {
        for &x in lam {
            w.write_f64::<LittleEndian>(x)?;
        }
    }
    for m in 0..n {
        for c in &mps.gamma(m).data {
            w.write_f64::<LittleEndian>(c.re)?;
            w.write_f64::<LittleEndian>(c.im)?;
        }
    }
    Ok(())
}

fn read_dim<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let v = r.read_u64::<LittleEndian>()?;
    if v > MAX_DIM {
        return Err(Error::Format(format!("{what} = {v} is implausibly large")));
    }
    Ok(v as usize)
}

pub fn read_mps<R: Read>(mut r: R) -> Result<VidalMPS> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an MPS snapshot (bad magic)".into()));
    }
    let n = read_dim(&mut r, "n_sites")?;
    if n == 0 {
        return Err(Error::Format("snapshot has zero sites".into()));
    }
    let chi_max = read_dim(&mut r, "chi_max")?;
    let trunc_tol = r.read_f64::<LittleEndian>()?;
    let cum = r.read_f64::<LittleEndian>()?;
    let mut dims = Vec::with_capacity(n);
    for _ in 0..n {
        dims.push(read_dim(&mut r, "local dim")?);
    }
    let mut bonds = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        bonds.push(read_dim(&mut r, "bond dim")?);
    }
    let mut lambdas = Vec::with_capacity(n + 1);
    for &chi in &bonds {
        let mut lam = Vec::with_capacity(chi);
        for _ in 0..chi {
            lam.push(r.read_f64::<LittleEndian>()?);
        }
        lambdas.push(lam);
    }
    let mut gammas = Vec::with_capacity(n);
    for m in 0..n {
        let mut t = Tensor3::zeros(bonds[m], dims[m], bonds[m + 1]);
        for c in t.data.iter_mut() {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            *c = C64::new(re, im);
        }
        gammas.push(t);
    }
    let truncation = Truncation::new(if chi_max == 0 { None } else { Some(chi_max) }, trunc_tol);
    VidalMPS::from_vidal(gammas, lambdas, truncation, cum)
}

pub fn save(mps: &VidalMPS, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_mps(mps, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<VidalMPS> {
    let f = std::fs::File::open(path)?;
    read_mps(std::io::BufReader::new(f))
}
