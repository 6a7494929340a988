//! Thin dense linear-algebra helpers over `nalgebra` used across the crate.

use faer::complex_native::c64;
use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Once;

pub type CMatrix = DMatrix<Complex64>;

fn to_faer(m: &CMatrix) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn from_faer(m: MatRef<'_, c64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m.read(i, j);
        Complex64::new(z.re, z.im)
    })
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Column `j` of the returned matrix is the eigenvector of
/// the `j`-th eigenvalue.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // symmetrize against round-off before handing to the solver
    let h = (m + m.adjoint()).scale(0.5);
    let fast = guarded(|| {
        let evd = to_faer(&h).selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let vals: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
        (vals, from_faer(evd.u()))
    });
    let (asc, u) = fast.unwrap_or_else(|| {
        let e = h.clone().symmetric_eigen();
        sort_ascending(e.eigenvalues.as_slice(), &e.eigenvectors)
    });
    // ascending order from the solver
    let values = asc.into_iter().rev().collect();
    let mut vecs = CMatrix::zeros(n, n);
    for j in 0..n {
        vecs.set_column(j, &u.column(n - 1 - j));
    }
    (values, vecs)
}

fn sort_ascending<T: nalgebra::Scalar>(vals: &[f64], vecs: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted = idx.iter().map(|&i| vals[i]).collect();
    (sorted, vecs.select_columns(&idx))
}

static QUIET: Once = Once::new();

/// Runs a faer call, returning `None` if it panics. faer 0.19 trips an
/// internal assertion on some highly degenerate spectra.
fn guarded<T>(f: impl FnOnce() -> T) -> Option<T> {
    QUIET.call_once(|| {
        let prev = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            if !info.location().is_some_and(|l| l.file().contains("faer")) {
                prev(info);
            }
        }));
    });
    panic::catch_unwind(AssertUnwindSafe(f)).ok()
}

/// Eigenvalues (descending) and eigenvectors of a real symmetric matrix.
pub fn symmetric_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let fast = guarded(|| {
        let a = Mat::<f64>::from_fn(n, n, |i, j| sym[(i, j)]);
        let evd = a.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let u = evd.u();
        ((0..n).map(|i| s.read(i)).collect::<Vec<_>>(), DMatrix::from_fn(n, n, |i, j| u.read(i, j)))
    });
    let (asc, u) = fast.unwrap_or_else(|| {
        let e = sym.clone().symmetric_eigen();
        sort_ascending(e.eigenvalues.as_slice(), &e.eigenvectors)
    });
    let values = asc.into_iter().rev().collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    (values, vecs)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> =
        guarded(|| to_faer(m).singular_values()).unwrap_or_else(|| m.clone().singular_values().iter().copied().collect());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Thin SVD `m = U diag(s) V^†` with singular values descending.
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let fast = guarded(|| {
        let dec = to_faer(m).thin_svd();
        let s = dec.s_diagonal();
        let s: Vec<f64> = (0..s.nrows()).map(|i| s.read(i).re).collect();
        (from_faer(dec.u()), s, from_faer(dec.v()))
    });
    fast.unwrap_or_else(|| {
        let dec = m.clone().svd(true, true);
        let mut idx: Vec<usize> = (0..dec.singular_values.len()).collect();
        idx.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
        let u = dec.u.expect("requested").select_columns(&idx);
        let v = dec.v_t.expect("requested").adjoint().select_columns(&idx);
        (u, idx.iter().map(|&i| dec.singular_values[i]).collect(), v)
    })
}

/// Unitary factor `V U^†` of the polar decomposition of `X^†`, i.e. the
/// unitary `W` maximizing `Re Tr(W X)`.
pub fn polar_maximizer(x: &CMatrix) -> CMatrix {
    let (u, _, v) = svd(x);
    v * u.adjoint()
}

/// Orthonormalizes the given vectors with modified Gram-Schmidt, dropping any
/// whose residual norm falls below `tol`.
pub fn gram_schmidt(vectors: &[DVector<Complex64>], tol: f64) -> Vec<DVector<Complex64>> {
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for q in &out {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > tol {
            out.push(w / Complex64::new(norm, 0.0));
        }
    }
    out
}

/// Largest absolute entrywise deviation of `m` from the identity.
pub fn max_dev_from_identity(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Cosines of the principal angles between the column spans of two matrices
/// with orthonormal columns, descending.
pub fn principal_cosines(a: &CMatrix, b: &CMatrix) -> Vec<f64> {
    singular_values(&(a.adjoint() * b))
        .into_iter()
        .map(|c| c.min(1.0))
        .collect()
}

/// Largest principal angle (radians) between two orthonormal column spans of
/// equal dimension.
pub fn max_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    let resid = b - a * (a.adjoint() * b);
    let sin = singular_values(&resid).first().copied().unwrap_or(0.0);
    sin.min(1.0).asin()
}
