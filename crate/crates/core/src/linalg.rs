//! Dense complex linear algebra on top of LAPACK.
//!
//! Matrices are `nalgebra::DMatrix<C64>`, whose column-major contiguous
//! storage is passed to LAPACK without copies beyond the ones the routines
//! themselves require.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::os::raw::{c_char, c_int};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Thin SVD `m = u · diag(s) · vt` with singular values in nonincreasing order.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub vt: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Err(Error::Numerical { site: 0, msg: "SVD of an empty matrix".into() });
    }
    // The divide-and-conquer driver occasionally fails to converge, or
    // loses orthogonality, where the QR-iteration driver succeeds.
    match gesdd(m) {
        Ok(out) if columns_orthonormal(&out.u) => Ok(out),
        _ => gesvd(m),
    }
}

fn columns_orthonormal(u: &CMatrix) -> bool {
    let g = u.adjoint() * u;
    let tol = 1e-10 * (u.ncols() as f64).sqrt();
    g.iter().enumerate().all(|(idx, x)| {
        let diag = idx % g.nrows() == idx / g.nrows();
        (if diag { x - ONE } else { *x }).norm() < tol
    })
}

fn gesdd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let mut a = m.clone();
    let mut s = vec![0.0f64; k];
    let mut u = CMatrix::zeros(rows, k);
    let mut vt = CMatrix::zeros(k, cols);
    let (mr, nc, ld_u, ld_vt) = (rows as c_int, cols as c_int, rows as c_int, k as c_int);
    let lrwork = (5 * k * k + 7 * k).max(2 * rows.max(cols) * k + 2 * k * k + k);
    let mut rwork = vec![0.0f64; lrwork];
    let mut iwork = vec![0 as c_int; 8 * k];
    let mut info: c_int = 0;
    let mut query = [ZERO];
    let jobz = b'S' as c_char;
    unsafe {
        lapack_sys::zgesdd_(
            &jobz, &mr, &nc, a.as_mut_ptr() as *mut _, &mr, s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _, &ld_u, vt.as_mut_ptr() as *mut _, &ld_vt,
            query.as_mut_ptr() as *mut _, &-1, rwork.as_mut_ptr(), iwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(1);
    let mut work = vec![ZERO; lwork];
    let lw = lwork as c_int;
    unsafe {
        lapack_sys::zgesdd_(
            &jobz, &mr, &nc, a.as_mut_ptr() as *mut _, &mr, s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _, &ld_u, vt.as_mut_ptr() as *mut _, &ld_vt,
            work.as_mut_ptr() as *mut _, &lw, rwork.as_mut_ptr(), iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical { site: 0, msg: format!("zgesdd returned info={info}") });
    }
    Ok(Svd { u, s, vt })
}

fn gesvd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let mut a = m.clone();
    let mut s = vec![0.0f64; k];
    let mut u = CMatrix::zeros(rows, k);
    let mut vt = CMatrix::zeros(k, cols);
    let (mr, nc, ld_u, ld_vt) = (rows as c_int, cols as c_int, rows as c_int, k as c_int);
    let mut rwork = vec![0.0f64; 5 * k];
    let mut info: c_int = 0;
    let mut query = [ZERO];
    let job = b'S' as c_char;
    unsafe {
        lapack_sys::zgesvd_(
            &job, &job, &mr, &nc, a.as_mut_ptr() as *mut _, &mr, s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _, &ld_u, vt.as_mut_ptr() as *mut _, &ld_vt,
            query.as_mut_ptr() as *mut _, &-1, rwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(1);
    let mut work = vec![ZERO; lwork];
    let lw = lwork as c_int;
    unsafe {
        lapack_sys::zgesvd_(
            &job, &job, &mr, &nc, a.as_mut_ptr() as *mut _, &mr, s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _, &ld_u, vt.as_mut_ptr() as *mut _, &ld_vt,
            work.as_mut_ptr() as *mut _, &lw, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 || s.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical { site: 0, msg: format!("zgesvd returned info={info}") });
    }
    Ok(Svd { u, s, vt })
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend; eigenvectors
/// are the columns of the returned matrix. Only the lower triangle is read.
///
/// Divide and conquer (zheevd) is tried first. Some LAPACK builds return
/// non-orthogonal vectors for large, highly degenerate spectra, so the result
/// is checked and recomputed with the QR algorithm (zheev) when it fails.
pub fn eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::Validation(format!("eigh needs a square matrix, got {:?}", h.shape())));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let tol = 1e-10 * (n as f64).sqrt();
    if let Ok((w, v)) = zheevd(h) {
        if unitarity_defect(&v) < tol {
            return Ok((w, v));
        }
    }
    let (w, v) = zheev(h)?;
    if unitarity_defect(&v) >= tol {
        return Err(Error::Numerical { site: 0, msg: "Hermitian eigensolver lost orthogonality".into() });
    }
    Ok((w, v))
}

fn zheevd(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut w = vec![0.0f64; n];
    let nn = n as c_int;
    let jobz = b'V' as c_char;
    let uplo = b'L' as c_char;
    let mut info: c_int = 0;
    let mut qwork = [ZERO];
    let mut qrwork = [0.0f64];
    let mut qiwork = [0 as c_int];
    unsafe {
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            qwork.as_mut_ptr() as *mut _, &-1, qrwork.as_mut_ptr(), &-1, qiwork.as_mut_ptr(), &-1,
            &mut info,
        );
    }
    let lwork = (qwork[0].re as usize).max(1);
    let lrwork = (qrwork[0] as usize).max(1);
    let liwork = (qiwork[0] as usize).max(1);
    let mut work = vec![ZERO; lwork];
    let mut rwork = vec![0.0f64; lrwork];
    let mut iwork = vec![0 as c_int; liwork];
    unsafe {
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _, &(lwork as c_int), rwork.as_mut_ptr(), &(lrwork as c_int),
            iwork.as_mut_ptr(), &(liwork as c_int), &mut info,
        );
    }
    if info != 0 || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical { site: 0, msg: format!("zheevd returned info={info}") });
    }
    Ok((w, a))
}

fn zheev(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut w = vec![0.0f64; n];
    let nn = n as c_int;
    let jobz = b'V' as c_char;
    let uplo = b'L' as c_char;
    let mut info: c_int = 0;
    let mut qwork = [ZERO];
    let mut rwork = vec![0.0f64; (3 * n).saturating_sub(2).max(1)];
    unsafe {
        lapack_sys::zheev_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            qwork.as_mut_ptr() as *mut _, &-1, rwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = (qwork[0].re as usize).max(2 * n);
    let mut work = vec![ZERO; lwork];
    unsafe {
        lapack_sys::zheev_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _, &(lwork as c_int), rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical { site: 0, msg: format!("zheev returned info={info}") });
    }
    Ok((w, a))
}

/// `exp(i · scale · h)` for Hermitian `h`, built from its eigendecomposition so
/// the result is unitary to round-off.
pub fn exp_i_hermitian(h: &CMatrix, scale: f64) -> Result<CMatrix> {
    let (w, v) = eigh(h)?;
    let mut vd = v.clone();
    for (j, &wj) in w.iter().enumerate() {
        let ph = C64::from_polar(1.0, scale * wj);
        vd.column_mut(j).scale_mut_c(ph);
    }
    Ok(&vd * v.adjoint())
}

trait ScaleC {
    fn scale_mut_c(&mut self, c: C64);
}

impl<S> ScaleC for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_c(&mut self, c: C64) {
        for x in self.iter_mut() {
            *x *= c;
        }
    }
}

/// Max-entry deviation of `u† u` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
