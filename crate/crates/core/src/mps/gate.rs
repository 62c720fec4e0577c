use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Dense unitary acting on two neighbouring sites.
///
/// The matrix is indexed `[(i'·out_right + j'), (i·d_right + j)]` with the
/// left site as the more significant index. For ordinary gates the output
/// dimensions equal the input ones; a SWAP between sites of different local
/// dimension exchanges them.
#[derive(Clone, Debug)]
pub struct TwoSiteGate {
    pub d_left: usize,
    pub d_right: usize,
    pub out_left: usize,
    pub out_right: usize,
    pub matrix: CMatrix,
    /// Set for pure site exchanges, whose effect on the layout is a relabeling.
    pub exchange: bool,
    /// Index groups on which the matrix is block diagonal, if known.
    pub blocks: Option<Vec<Vec<usize>>>,
}

impl TwoSiteGate {
    pub fn new(d_left: usize, d_right: usize, matrix: CMatrix) -> Result<Self> {
        Self::with_output(d_left, d_right, d_left, d_right, matrix)
    }

    pub fn with_output(
        d_left: usize,
        d_right: usize,
        out_left: usize,
        out_right: usize,
        matrix: CMatrix,
    ) -> Result<Self> {
        let n = d_left * d_right;
        if matrix.shape() != (n, n) || out_left * out_right != n {
            return Err(Error::Validation(format!(
                "two-site gate for dims ({d_left},{d_right})->({out_left},{out_right}) has shape {:?}",
                matrix.shape()
            )));
        }
        Ok(TwoSiteGate { d_left, d_right, out_left, out_right, matrix, exchange: false, blocks: None })
    }

    pub fn identity(d_left: usize, d_right: usize) -> Self {
        let n = d_left * d_right;
        TwoSiteGate { d_left, d_right, out_left: d_left, out_right: d_right, matrix: linalg::identity(n), exchange: false, blocks: None }
    }

    /// Exchange of the two sites' contents, `|i⟩|j⟩ → |j⟩|i⟩`.
    pub fn swap(d_left: usize, d_right: usize) -> Self {
        let n = d_left * d_right;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..d_left {
            for j in 0..d_right {
                m[(j * d_left + i, i * d_right + j)] = linalg::ONE;
            }
        }
        TwoSiteGate { d_left, d_right, out_left: d_right, out_right: d_left, matrix: m, exchange: true, blocks: None }
    }

    /// Declare that the gate conserves `n_left + n_right`, which lets it be
    /// applied block by block. Fails if the matrix couples different totals.
    pub fn with_number_blocks(mut self) -> Result<Self> {
        if self.d_left != self.out_left || self.d_right != self.out_right {
            return Err(Error::Validation("number blocks need equal input and output dims".into()));
        }
        let (dl, dr) = (self.d_left, self.d_right);
        let total = |k: usize| k / dr + k % dr;
        let n = dl * dr;
        for r in 0..n {
            for c in 0..n {
                if total(r) != total(c) && self.matrix[(r, c)].norm() > 1e-13 {
                    return Err(Error::Validation(format!("gate couples total numbers at ({r}, {c})")));
                }
            }
        }
        let mut blocks = vec![Vec::new(); dl + dr - 1];
        for k in 0..n {
            blocks[total(k)].push(k);
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    /// `self.matrix · x`, exploiting block structure when present.
    pub fn apply_to(&self, x: &CMatrix) -> CMatrix {
        match &self.blocks {
            None => &self.matrix * x,
            Some(blocks) => {
                let mut y = CMatrix::zeros(self.matrix.nrows(), x.ncols());
                for idx in blocks {
                    let sub = CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])]);
                    let xs = x.select_rows(idx.iter());
                    let ys = sub * xs;
                    for (r, &i) in idx.iter().enumerate() {
                        y.row_mut(i).copy_from(&ys.row(r));
                    }
                }
                y
            }
        }
    }

    pub fn is_swap(&self) -> bool {
        self.exchange
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        TwoSiteGate {
            d_left: self.out_left,
            d_right: self.out_right,
            out_left: self.d_left,
            out_right: self.d_right,
            matrix: self.matrix.adjoint(),
            exchange: self.exchange,
            blocks: self.blocks.clone(),
        }
    }

    /// `self` applied after `first`.
    pub fn compose_after(&self, first: &TwoSiteGate) -> Result<Self> {
        if first.out_left != self.d_left || first.out_right != self.d_right {
            return Err(Error::Validation("gate dimensions do not chain".into()));
        }
        Ok(TwoSiteGate {
            d_left: first.d_left,
            d_right: first.d_right,
            out_left: self.out_left,
            out_right: self.out_right,
            matrix: &self.matrix * &first.matrix,
            exchange: false,
            blocks: if self.blocks == first.blocks { self.blocks.clone() } else { None },
        })
    }
}
