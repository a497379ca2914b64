//! Dense complex linear algebra helpers.
//!
//! Matrices are stored as `nalgebra::DMatrix<C64>`; eigendecompositions are
//! delegated to `faer`, pinned to sequential execution so results do not
//! depend on the thread pool they run in.

use std::sync::Once;

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

static SEQUENTIAL: Once = Once::new();

fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
}

fn to_faer(m: &CMatrix) -> faer::Mat<c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// `V f(Λ) V†`.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Same as [`Eigh::apply`] for a real function; the result is made exactly Hermitian.
    pub fn apply_real<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let m = self.apply(|x| C64::new(f(x), 0.0));
        symmetrize(&m)
    }
}

/// Full eigendecomposition of a Hermitian matrix (only the lower triangle is read).
pub fn eigh(m: &CMatrix) -> Result<Eigh> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "eigh needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolve("matrix has non-finite entries".into()));
    }
    ensure_sequential();
    let evd = to_faer(m).selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let values: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolve("non-finite eigenvalue".into()));
    }
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        let z = u.read(i, j);
        C64::new(z.re, z.im)
    });
    Ok(Eigh { values, vectors })
}

/// Eigenvalues of a general complex matrix, in unspecified order.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    ensure_sequential();
    let vals = to_faer(m).complex_eigenvalues();
    let out: Vec<C64> = vals.iter().map(|z| C64::new(z.re, z.im)).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolve("non-finite eigenvalue".into()));
    }
    Ok(out)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A - A†|` entrywise.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// `max |U†U - I|` entrywise.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut r: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            r = r.max((g[(i, j)] - target).norm());
        }
    }
    r
}

/// `(A + A†) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product `a ⊗ b` (index of `b` runs fastest).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Fixes the global phase of a vector so its largest-magnitude component is
/// real and positive. Ties go to the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let p = v[pivot];
    let phase = p.conj() / p.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Largest eigenvalue of a positive semidefinite Hermitian matrix (its spectral norm).
pub fn spectral_norm_psd(m: &CMatrix) -> Result<f64> {
    let e = eigh(m)?;
    Ok(e.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigh_of_pauli_y() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let e = eigh(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let back = e.apply(|x| c(x, 0.0));
        assert!(max_abs_diff(&back, &m) < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(eigh(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn eigh_rejects_nan() {
        let mut m = CMatrix::identity(3, 3);
        m[(1, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(eigh(&m), Err(Error::Eigensolve(_))));
    }

    #[test]
    fn diagonal_input_gives_unit_eigenvectors() {
        // exactly degenerate diagonal input must not be mixed
        let d = [0.0, 0.0, 0.0, 1.0, 0.0];
        let m = CMatrix::from_diagonal(&DVector::from_iterator(5, d.iter().map(|&x| c(x, 0.0))));
        let e = eigh(&m).unwrap();
        for k in 0..5 {
            let col = e.vectors.column(k);
            let nnz = col.iter().filter(|z| z.norm() > 0.0).count();
            assert_eq!(nnz, 1, "column {k} mixed: {col:?}");
        }
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let th: f64 = 0.3;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(th.cos(), 0.), c(-th.sin(), 0.), c(th.sin(), 0.), c(th.cos(), 0.)],
        );
        let mut ev: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.arg()).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + th).abs() < 1e-14 && (ev[1] - th).abs() < 1e-14);
    }

    #[test]
    fn phase_fix_makes_pivot_real_positive() {
        let mut v = CVector::from_vec(vec![c(0.1, 0.2), c(0.0, -3.0), c(1.0, 0.0)]);
        fix_phase(&mut v);
        assert!(v[1].im.abs() < 1e-15 && v[1].re > 0.0);
        assert!((v[1].re - 3.0).abs() < 1e-14);
    }
}
