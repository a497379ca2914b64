//! Operator algebra on the truncated two-level-system ⊗ Fock product space.
//!
//! Product-space index convention (used everywhere in the crate):
//! `i = 2n + s`, with photon number `n` running slow and the TLS index `s`
//! running fast; `s = 0` is the ground state and `s = 1` the excited state.
//!
//! Sign convention: `σ_z = diag(-1, +1)` in `(s = 0, s = 1)` order, so that
//! the matter term `+(ω_a/2) σ_z` puts the excited state at `+ω_a/2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Eigh, C64};

/// Hermiticity tolerance, absolute on the largest entry of `A - A†`.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub n_fock: usize,
}

impl BasisDescriptor {
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::Config(format!(
                "n_fock must be at least 2, got {n_fock}"
            )));
        }
        Ok(Self { n_fock })
    }

    /// Product-space dimension `2 n_fock`.
    pub fn dim(&self) -> usize {
        2 * self.n_fock
    }

    pub fn index(&self, n: usize, s: usize) -> usize {
        debug_assert!(n < self.n_fock && s < 2);
        2 * n + s
    }

    /// Inverse of [`BasisDescriptor::index`]: `(n, s)`.
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / 2, i % 2)
    }
}

/// Which space an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Tls,
    Fock(BasisDescriptor),
    Product(BasisDescriptor),
    /// Coefficients in a dressed (eigen) basis with the given number of states.
    Dressed(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Tls => 2,
            Space::Fock(b) => b.n_fock,
            Space::Product(b) => b.dim(),
            Space::Dressed(n) => *n,
        }
    }
}

/// Dense complex square matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    space: Space,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, space: Space) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != space.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not fit {:?} (dim {})",
                matrix.nrows(),
                matrix.ncols(),
                space,
                space.dim()
            )));
        }
        Ok(Self {
            matrix,
            space,
            hermitian_hint: false,
        })
    }

    /// Wraps a matrix the caller knows is Hermitian. The hint is verified in debug builds.
    pub fn hermitian(matrix: CMatrix, space: Space) -> Result<Self> {
        let mut op = Self::new(matrix, space)?;
        debug_assert!(
            linalg::hermiticity_residual(&op.matrix) <= 1e-12 * linalg::max_abs(&op.matrix).max(1.0),
            "hermitian hint on a non-Hermitian matrix"
        );
        op.hermitian_hint = true;
        Ok(op)
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self {
            matrix: CMatrix::identity(d, d),
            space,
            hermitian_hint: true,
        }
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self {
            matrix: CMatrix::zeros(d, d),
            space,
            hermitian_hint: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            space: self.space,
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= HERMITIAN_TOL
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entrywise distance to another operator on the same space.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Dimension(format!(
                "operators live on different spaces: {:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            space: self.space,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            space: self.space,
            hermitian_hint: false,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
            space: self.space,
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }
}

/// Photon annihilation operator `a` on `n_fock` levels: `a[n-1, n] = √n`.
pub fn fock_ladder(basis: BasisDescriptor) -> Result<OperatorMatrix> {
    let n = basis.n_fock;
    if n < 2 {
        return Err(Error::Config(format!("n_fock must be at least 2, got {n}")));
    }
    let mut m = CMatrix::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(m, Space::Fock(basis))
}

/// Photon number operator `a†a`.
pub fn number(basis: BasisDescriptor) -> Result<OperatorMatrix> {
    let a = fock_ladder(basis)?;
    let m = a.matrix().adjoint() * a.matrix();
    OperatorMatrix::hermitian(m, Space::Fock(basis))
}

/// Quadrature `X = a + a†`.
pub fn quadrature(basis: BasisDescriptor) -> Result<OperatorMatrix> {
    let a = fock_ladder(basis)?;
    let m = a.matrix() + a.matrix().adjoint();
    OperatorMatrix::hermitian(m, Space::Fock(basis))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli matrix in `(ground, excited)` order. `σ_z = diag(-1, +1)`.
pub fn pauli(axis: Axis) -> OperatorMatrix {
    let z0 = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[z0, one, one, z0]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[z0, -i, i, z0]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[-one, z0, z0, one]),
    };
    OperatorMatrix {
        matrix: m,
        space: Space::Tls,
        hermitian_hint: true,
    }
}

/// `tls_op ⊗ fock_op` laid out with index `i = 2n + s`.
pub fn embed(
    tls_op: &OperatorMatrix,
    fock_op: &OperatorMatrix,
    basis: BasisDescriptor,
) -> Result<OperatorMatrix> {
    if tls_op.dim() != 2 {
        return Err(Error::Dimension(format!(
            "TLS factor must be 2x2, got {}x{}",
            tls_op.dim(),
            tls_op.dim()
        )));
    }
    if fock_op.dim() != basis.n_fock {
        return Err(Error::Dimension(format!(
            "Fock factor must be {}x{}, got {}x{}",
            basis.n_fock,
            basis.n_fock,
            fock_op.dim(),
            fock_op.dim()
        )));
    }
    let m = embed_matrices(tls_op.matrix(), fock_op.matrix());
    Ok(OperatorMatrix {
        matrix: m,
        space: Space::Product(basis),
        hermitian_hint: tls_op.hermitian_hint && fock_op.hermitian_hint,
    })
}

/// Raw-matrix version of [`embed`]: photon index slow, TLS index fast.
pub(crate) fn embed_matrices(tls: &CMatrix, fock: &CMatrix) -> CMatrix {
    linalg::kron(fock, tls)
}

/// `V f(Λ) V†` for Hermitian `A = V Λ V†`.
pub fn hermitian_function<F>(a: &OperatorMatrix, f: F) -> Result<OperatorMatrix>
where
    F: Fn(f64) -> C64,
{
    let residual = a.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let eig = linalg::eigh(a.matrix())?;
    OperatorMatrix::new(eig.apply(f), a.space())
}

/// Real-valued variant of [`hermitian_function`]; the result carries the Hermitian hint.
pub fn hermitian_function_real<F>(a: &OperatorMatrix, f: F) -> Result<OperatorMatrix>
where
    F: Fn(f64) -> f64,
{
    let residual = a.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let eig = linalg::eigh(a.matrix())?;
    OperatorMatrix::hermitian(eig.apply_real(f), a.space())
}

/// Cached eigendecomposition of an operator, for applying many functions to it.
#[derive(Clone, Debug)]
pub struct Spectral {
    eig: Eigh,
    space: Space,
}

impl Spectral {
    pub fn new(a: &OperatorMatrix) -> Result<Self> {
        let residual = a.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self {
            eig: linalg::eigh(a.matrix())?,
            space: a.space(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eig.vectors
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        self.eig.apply(f)
    }

    pub fn apply_real<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        self.eig.apply_real(f)
    }

    /// `V diag(values) V†` with values given per eigenvalue index.
    pub fn apply_values(&self, values: &[C64]) -> CMatrix {
        let v = &self.eig.vectors;
        let mut scaled: DMatrix<C64> = v.clone();
        for (k, w) in values.iter().enumerate() {
            for i in 0..v.nrows() {
                scaled[(i, k)] *= *w;
            }
        }
        &scaled * v.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(n: usize) -> BasisDescriptor {
        BasisDescriptor::new(n).unwrap()
    }

    #[test]
    fn ladder_two_levels() {
        let a = fock_ladder(basis(2)).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(0.), c(0.)]);
        assert_eq!(a.matrix(), &want);
    }

    #[test]
    fn ladder_three_levels() {
        let a = fock_ladder(basis(3)).unwrap();
        assert_eq!(a.get(0, 1), c(1.0));
        assert_eq!(a.get(1, 2), c(2f64.sqrt()));
        let nnz = a.matrix().iter().filter(|z| z.norm() != 0.0).count();
        assert_eq!(nnz, 2);
    }

    #[test]
    fn number_operator_diagonal() {
        let n = number(basis(4)).unwrap();
        for k in 0..4 {
            assert!((n.get(k, k) - c(k as f64)).norm() < 1e-15);
        }
        assert!((n.trace() - c(6.0)).norm() < 1e-14);
    }

    #[test]
    fn ladder_rejects_single_level() {
        assert!(matches!(BasisDescriptor::new(1), Err(Error::Config(_))));
        assert!(fock_ladder(BasisDescriptor { n_fock: 1 }).is_err());
    }

    #[test]
    fn quadrature_small_cases() {
        let x = quadrature(basis(2)).unwrap();
        assert_eq!(
            x.matrix(),
            &CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)])
        );
        let x3 = quadrature(basis(3)).unwrap();
        assert_eq!(x3.get(0, 1), c(1.0));
        assert_eq!(x3.get(1, 2), c(2f64.sqrt()));
        assert_eq!(x3.get(1, 1), c(0.0));
        let ev = linalg::eigh(x.matrix()).unwrap().values;
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_is_ladder_plus_adjoint_exactly() {
        for n in 2..12 {
            let a = fock_ladder(basis(n)).unwrap();
            let x = quadrature(basis(n)).unwrap();
            assert_eq!(x.matrix(), &(a.matrix() + a.matrix().adjoint()));
        }
    }

    #[test]
    fn pauli_conventions() {
        let z = pauli(Axis::Z);
        assert_eq!(z.get(0, 0), c(-1.0));
        assert_eq!(z.get(1, 1), c(1.0));
        let x = pauli(Axis::X);
        let xx = x.try_mul(&x).unwrap();
        assert_eq!(xx, {
            let mut id = OperatorMatrix::identity(Space::Tls);
            id.hermitian_hint = false;
            id
        });
        let y = pauli(Axis::Y);
        let anti = z.try_mul(&y).unwrap().try_add(&y.try_mul(&z).unwrap()).unwrap();
        assert!(anti.max_abs() < 1e-15);
    }

    #[test]
    fn embed_number_and_sigma_z() {
        let b = basis(5);
        let n = number(b).unwrap();
        let id2 = OperatorMatrix::identity(Space::Tls);
        let big = embed(&id2, &n, b).unwrap();
        for i in 0..b.dim() {
            let (ph, _) = b.split(i);
            assert!((big.get(i, i) - c(ph as f64)).norm() < 1e-14);
        }
        let idf = OperatorMatrix::identity(Space::Fock(b));
        let sz = embed(&pauli(Axis::Z), &idf, b).unwrap();
        for i in 0..b.dim() {
            let want = if i % 2 == 0 { -1.0 } else { 1.0 };
            assert_eq!(sz.get(i, i), c(want));
        }
    }

    #[test]
    fn embed_rejects_wrong_shapes() {
        let b = basis(3);
        let idf = OperatorMatrix::identity(Space::Fock(b));
        assert!(embed(&idf, &idf, b).is_err());
        let wrong = OperatorMatrix::identity(Space::Fock(basis(4)));
        assert!(embed(&pauli(Axis::X), &wrong, b).is_err());
    }

    #[test]
    fn index_map_is_bijection() {
        let b = basis(7);
        let mut seen = vec![false; b.dim()];
        for n in 0..7 {
            for s in 0..2 {
                let i = b.index(n, s);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(b.split(i), (n, s));
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn function_of_zero_matrix() {
        let zero = OperatorMatrix::zeros(Space::Fock(basis(4)));
        let cosm = hermitian_function_real(&zero, f64::cos).unwrap();
        assert!(cosm.max_abs_diff(&OperatorMatrix::identity(Space::Fock(basis(4)))) < 1e-15);
        let j0 = hermitian_function_real(&zero, |x| crate::special::bessel_j(0, x)).unwrap();
        assert!(j0.max_abs_diff(&OperatorMatrix::identity(Space::Fock(basis(4)))) < 1e-15);
        let j3 = hermitian_function_real(&zero, |x| crate::special::bessel_j(3, x)).unwrap();
        assert_eq!(j3.max_abs(), 0.0);
    }

    #[test]
    fn exp_of_involutory_quadrature() {
        // X² = 1 for two levels, so e^{iX} = cos(1) I + i sin(1) X
        let x = quadrature(basis(2)).unwrap();
        let e = hermitian_function(&x, |v| C64::new(0.0, v).exp()).unwrap();
        let want = CMatrix::identity(2, 2).scale(1f64.cos()) + x.matrix() * C64::new(0.0, 1f64.sin());
        assert!(linalg::max_abs_diff(e.matrix(), &want) < 1e-15);
    }

    #[test]
    fn function_rejects_non_hermitian() {
        let a = fock_ladder(basis(3)).unwrap();
        assert!(matches!(
            hermitian_function_real(&a, f64::cos),
            Err(Error::NotHermitian { .. })
        ));
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let re = seed[k % seed.len()];
                let im = if i == j { 0.0 } else { seed[(k + 7) % seed.len()] };
                m[(i, j)] = C64::new(re, im);
                m[(j, i)] = C64::new(re, -im);
                k += 1;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn embed_trace_factorises(sa in prop::collection::vec(-1.0f64..1.0, 8),
                                  sb in prop::collection::vec(-1.0f64..1.0, 12)) {
            let b = basis(4);
            let a = OperatorMatrix::new(random_hermitian(2, &sa), Space::Tls).unwrap();
            let f = OperatorMatrix::new(random_hermitian(4, &sb), Space::Fock(b)).unwrap();
            let e = embed(&a, &f, b).unwrap();
            prop_assert!((e.trace() - a.trace() * f.trace()).norm() < 1e-12);
            prop_assert!(e.hermiticity_residual() < 1e-15);
        }

        #[test]
        fn identity_map_roundtrip(s in prop::collection::vec(-2.0f64..2.0, 30)) {
            let m = random_hermitian(6, &s);
            let a = OperatorMatrix::new(m.clone(), Space::Dressed(6)).unwrap();
            let back = hermitian_function_real(&a, |x| x).unwrap();
            let scale = linalg::max_abs(&m).max(1e-300);
            prop_assert!(linalg::max_abs_diff(back.matrix(), &m) / scale < 1e-12);
        }

        #[test]
        fn cos_sin_pythagoras(s in prop::collection::vec(-3.0f64..3.0, 30)) {
            let a = OperatorMatrix::new(random_hermitian(6, &s), Space::Dressed(6)).unwrap();
            let cm = hermitian_function_real(&a, f64::cos).unwrap();
            let sm = hermitian_function_real(&a, f64::sin).unwrap();
            let sum = cm.matrix() * cm.matrix() + sm.matrix() * sm.matrix();
            prop_assert!(linalg::max_abs_diff(&sum, &CMatrix::identity(6, 6)) < 1e-10);
        }
    }
}
