use num_complex::Complex64 as C64;

use crate::linalg::{CMatrix, ZERO};

/// Rank-3 site tensor indexed `(left bond, physical, right bond)`, stored
/// row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub left: usize,
    pub phys: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl Tensor3 {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Tensor3 { left, phys, right, data: vec![ZERO; left * phys * right] }
    }

    #[inline]
    pub fn idx(&self, a: usize, i: usize, b: usize) -> usize {
        (a * self.phys + i) * self.right + b
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> C64 {
        self.data[self.idx(a, i, b)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, b: usize, v: C64) {
        let k = self.idx(a, i, b);
        self.data[k] = v;
    }

    /// Matrix with rows `(a, i)` and columns `b`.
    pub fn to_left_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.left * self.phys, self.right, &self.data)
    }

    /// Matrix with rows `a` and columns `(i, b)`.
    pub fn to_right_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.left, self.phys * self.right, &self.data)
    }

    pub fn from_left_matrix(m: &CMatrix, left: usize, phys: usize) -> Self {
        assert_eq!(m.nrows(), left * phys);
        let right = m.ncols();
        let mut t = Tensor3::zeros(left, phys, right);
        for r in 0..m.nrows() {
            for c in 0..right {
                t.data[r * right + c] = m[(r, c)];
            }
        }
        t
    }

    pub fn from_right_matrix(m: &CMatrix, phys: usize, right: usize) -> Self {
        assert_eq!(m.ncols(), phys * right);
        let left = m.nrows();
        let mut t = Tensor3::zeros(left, phys, right);
        let cols = phys * right;
        for r in 0..left {
            for c in 0..cols {
                t.data[r * cols + c] = m[(r, c)];
            }
        }
        t
    }

    /// Apply a `phys × phys'` operator on the physical index: `T'[a,i,b] = Σ_j op[i,j] T[a,j,b]`.
    pub fn apply_physical(&self, op: &CMatrix) -> Tensor3 {
        let out_phys = op.nrows();
        assert_eq!(op.ncols(), self.phys);
        let mut out = Tensor3::zeros(self.left, out_phys, self.right);
        for a in 0..self.left {
            for i in 0..out_phys {
                for j in 0..self.phys {
                    let o = op[(i, j)];
                    if o == ZERO {
                        continue;
                    }
                    let src = self.idx(a, j, 0);
                    let dst = out.idx(a, i, 0);
                    for b in 0..self.right {
                        out.data[dst + b] += o * self.data[src + b];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }
}
