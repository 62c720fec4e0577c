use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

/// Rank-4 MPO tensor indexed `(left bond, i, i', right bond)` with
/// `O[w, i, i', w'] = ⟨i| O_{w w'} |i'⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub left: usize,
    pub d: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(left: usize, d: usize, right: usize) -> Self {
        Tensor4 { left, d, right, data: vec![ZERO; left * d * d * right] }
    }

    #[inline]
    pub fn idx(&self, w: usize, i: usize, ip: usize, wp: usize) -> usize {
        ((w * self.d + i) * self.d + ip) * self.right + wp
    }

    #[inline]
    pub fn get(&self, w: usize, i: usize, ip: usize, wp: usize) -> C64 {
        self.data[self.idx(w, i, ip, wp)]
    }

    /// Place a local operator in the `(w, w')` block.
    pub fn set_block(&mut self, w: usize, wp: usize, op: &CMatrix) {
        for i in 0..self.d {
            for ip in 0..self.d {
                let k = self.idx(w, i, ip, wp);
                self.data[k] = op[(i, ip)];
            }
        }
    }
}

/// Matrix product operator: one [`Tensor4`] per site, trivial outer bonds.
#[derive(Clone, Debug)]
pub struct LocalMPO {
    pub tensors: Vec<Tensor4>,
}

impl LocalMPO {
    pub fn new(tensors: Vec<Tensor4>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Validation("an MPO needs at least one site".into()));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(Error::Validation("MPO outer bonds must have dimension 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::Validation("MPO bond dimensions do not chain".into()));
            }
        }
        Ok(LocalMPO { tensors })
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.d).collect()
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        Self::product(dims, vec![None; dims.len()])
    }

    /// Bond-dimension-1 MPO `⊗_m O_m`, with `None` meaning identity.
    pub fn product(dims: &[usize], ops: Vec<Option<CMatrix>>) -> Result<Self> {
        if ops.len() != dims.len() {
            return Err(Error::Validation("one operator slot per site required".into()));
        }
        let mut tensors = Vec::with_capacity(dims.len());
        for (m, (&d, op)) in dims.iter().zip(ops).enumerate() {
            let op = op.unwrap_or_else(|| CMatrix::identity(d, d));
            if op.shape() != (d, d) {
                return Err(Error::Validation(format!("operator at site {m} has wrong shape")));
            }
            let mut t = Tensor4::zeros(1, d, 1);
            t.set_block(0, 0, &op);
            tensors.push(t);
        }
        Self::new(tensors)
    }

    /// `Σ_m O_m` as a bond-dimension-2 MPO. `None` entries contribute nothing.
    pub fn sum_of_local(dims: &[usize], ops: &[Option<CMatrix>]) -> Result<Self> {
        let n = dims.len();
        if ops.len() != n || n == 0 {
            return Err(Error::Validation("one operator slot per site required".into()));
        }
        let mut tensors = Vec::with_capacity(n);
        for m in 0..n {
            let d = dims[m];
            let id = CMatrix::identity(d, d);
            let op = ops[m].clone().unwrap_or_else(|| CMatrix::zeros(d, d));
            if op.shape() != (d, d) {
                return Err(Error::Validation(format!("operator at site {m} has wrong shape")));
            }
            // Bond state 0: nothing placed yet; 1: operator already placed.
            let (l, r) = (if m == 0 { 1 } else { 2 }, if m == n - 1 { 1 } else { 2 });
            let mut t = Tensor4::zeros(l, d, r);
            if n == 1 {
                t.set_block(0, 0, &op);
            } else if m == 0 {
                t.set_block(0, 0, &id);
                t.set_block(0, 1, &op);
            } else if m == n - 1 {
                t.set_block(0, 0, &op);
                t.set_block(1, 0, &id);
            } else {
                t.set_block(0, 0, &id);
                t.set_block(0, 1, &op);
                t.set_block(1, 1, &id);
            }
            tensors.push(t);
        }
        Self::new(tensors)
    }

    /// Dense matrix of the operator in the product basis (site 0 most
    /// significant). Test support for small systems.
    pub fn to_dense(&self) -> CMatrix {
        let mut acc: Vec<CMatrix> = vec![CMatrix::from_element(1, 1, ONE)];
        for t in &self.tensors {
            let mut next = vec![CMatrix::zeros(1, 1); t.right];
            let dim = acc[0].nrows() * t.d;
            for x in next.iter_mut() {
                *x = CMatrix::zeros(dim, dim);
            }
            for w in 0..t.left {
                for wp in 0..t.right {
                    let block = CMatrix::from_fn(t.d, t.d, |i, ip| t.get(w, i, ip, wp));
                    if block.iter().all(|c| *c == ZERO) {
                        continue;
                    }
                    next[wp] += acc[w].kronecker(&block);
                }
            }
            acc = next;
        }
        acc.swap_remove(0)
    }
}

pub fn number_mpo(dims: &[usize], site: usize) -> Result<LocalMPO> {
    if site >= dims.len() {
        return Err(Error::Validation(format!("site {site} out of range")));
    }
    let mut ops = vec![None; dims.len()];
    ops[site] = Some(crate::fock::number(dims[site]));
    LocalMPO::product(dims, ops)
}

pub fn total_number_mpo(dims: &[usize]) -> Result<LocalMPO> {
    let ops: Vec<Option<CMatrix>> = dims.iter().map(|&d| Some(crate::fock::number(d))).collect();
    LocalMPO::sum_of_local(dims, &ops)
}

/// Manley-Rowe charge `N_a + 2 N_b` on the interleaved `a1, b1, a2, b2, …`
/// layout.
pub fn charge_mpo(dims: &[usize]) -> Result<LocalMPO> {
    if dims.len() % 2 != 0 {
        return Err(Error::Layout(format!("interleaved layout needs an even site count, got {}", dims.len())));
    }
    let ops: Vec<Option<CMatrix>> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let w = if k % 2 == 0 { 1.0 } else { 2.0 };
            Some(crate::fock::diagonal(d, |n| w * n as f64))
        })
        .collect();
    LocalMPO::sum_of_local(dims, &ops)
}
