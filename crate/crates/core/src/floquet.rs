//! Dressed basis, Sambe-space Floquet solver and the one-period propagator.
//!
//! The Sambe matrix is assembled in the dressed basis `{E_j, |j⟩}` of the
//! static part `H_0`. By default each dressed state `j` carries its own
//! Fourier offset `n_j = floor((E_j + ω/2)/ω)`, so the block index `p` of
//! component `(p, j)` corresponds to the lab sideband `l = p - n_j`:
//!
//! ```text
//! K_{(p,j),(p',k)} = ⟨j|H_{p-p'-n_j+n_k}|k⟩ + (p - n_j) ω δ_{pp'} δ_{jk}
//! ```
//!
//! This is a relabelling of the usual `K_{l,l'} = P†H_{l-l'}P + l ω δ_{ll'}`
//! which centres every physical mode on `p ≈ 0`, so a symmetric cut
//! `|p| <= l_max` treats high-lying dressed states as well as low ones.
//! [`SambeFrame::Lab`] builds the unshifted matrix.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{FourierModes, RabiModel};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::operators::{OperatorMatrix, Space, HERMITIAN_TOL};

/// Selected modes must keep less than this weight on the outermost blocks.
pub const EDGE_WEIGHT_TOL: f64 = 1e-6;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const MIN_MONODROMY_STEPS: usize = 256;
pub const DEFAULT_MONODROMY_STEPS: usize = 4096;

/// Folds `x` into the half-open zone `[-ω/2, ω/2)`.
pub fn fold(x: f64, omega: f64) -> f64 {
    let half = 0.5 * omega;
    let mut y = x - omega * ((x + half) / omega).floor();
    if y >= half {
        y -= omega;
    }
    if y < -half {
        y += omega;
    }
    y
}

/// Circular distance between two folded values.
pub fn circular_distance(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).abs()
}

/// Bottleneck distance between two quasienergy sets under the best one-to-one
/// matching on the circle of circumference `ω`. For points on a circle the
/// optimal matching is a cyclic shift of the sorted orders, so every shift is tried.
pub fn set_distance(a: &[f64], b: &[f64], omega: f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let sorted = |v: &[f64]| {
        let mut s: Vec<f64> = v.iter().map(|&x| fold(x, omega)).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    let n = a.len();
    (0..n)
        .map(|shift| {
            (0..n)
                .map(|i| circular_distance(a[i], b[(i + shift) % n], omega))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Parity `(-1)^{n+s}` of product-basis index `i = 2n + s`.
fn index_parity(i: usize) -> f64 {
    if (i / 2 + i % 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Lowest eigenpairs of `H_0`.
#[derive(Clone, Debug)]
pub struct DressedBasis {
    energies: Vec<f64>,
    states: CMatrix,
    parities: Vec<f64>,
    params_hash: Option<u64>,
}

impl DressedBasis {
    /// Dressed basis of the static part of a model.
    pub fn for_model(model: &RabiModel) -> Result<Self> {
        let h0 = model.static_hamiltonian()?;
        let mut b = dressed_basis(&h0, model.params().n_j)?;
        b.params_hash = Some(model.params().hamiltonian_hash());
        Ok(b)
    }

    /// Dressed basis of the static mode of a precomputed mode set.
    pub fn from_modes(modes: &FourierModes, n_j: usize) -> Result<Self> {
        let h0 = OperatorMatrix::hermitian(
            linalg::symmetrize(modes.static_part().matrix()),
            modes.static_part().space(),
        )?;
        let mut b = dressed_basis(&h0, n_j)?;
        b.params_hash = Some(modes.params_hash());
        Ok(b)
    }

    pub fn n_j(&self) -> usize {
        self.energies.len()
    }

    /// Dimension of the underlying product space.
    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are the dressed states in the product basis.
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    pub fn state(&self, j: usize) -> CVector {
        self.states.column(j).into_owned()
    }

    /// `⟨j|Π|j⟩` for each dressed state; ±1 for states of definite parity.
    pub fn parities(&self) -> &[f64] {
        &self.parities
    }

    pub fn params_hash(&self) -> Option<u64> {
        self.params_hash
    }

    /// `P† A P`.
    pub fn project(&self, a: &CMatrix) -> CMatrix {
        self.states.adjoint() * a * &self.states
    }

    /// Maps dressed-basis coefficients back to the product basis.
    pub fn lift(&self, v: &CVector) -> CVector {
        &self.states * v
    }

    /// `max |⟨j|j'⟩ - δ_{jj'}|`.
    pub fn orthonormality_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.states)
    }

    /// `max_j ‖H_0|j⟩ - E_j|j⟩‖`.
    pub fn eigen_residual(&self, h0: &OperatorMatrix) -> f64 {
        let hv = h0.matrix() * &self.states;
        (0..self.n_j())
            .map(|j| {
                let r = hv.column(j) - self.states.column(j) * C64::new(self.energies[j], 0.0);
                r.norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Lowest `n_j` eigenpairs of `h0`, ascending, each eigenvector phase-fixed so
/// its largest component is real and positive.
pub fn dressed_basis(h0: &OperatorMatrix, n_j: usize) -> Result<DressedBasis> {
    let d = h0.dim();
    if n_j == 0 || n_j > d {
        return Err(Error::Config(format!("n_j = {n_j} must be in 1..={d}")));
    }
    let res = h0.hermiticity_residual();
    if res > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    let eig = linalg::eigh(h0.matrix())?;
    let mut states = CMatrix::zeros(d, n_j);
    for j in 0..n_j {
        let mut v = eig.vectors.column(j).into_owned();
        linalg::fix_phase(&mut v);
        states.set_column(j, &v);
    }
    let parities = match h0.space() {
        Space::Product(_) => (0..n_j)
            .map(|j| {
                states
                    .column(j)
                    .iter()
                    .enumerate()
                    .map(|(i, z)| index_parity(i) * z.norm_sqr())
                    .sum()
            })
            .collect(),
        _ => vec![0.0; n_j],
    };
    Ok(DressedBasis {
        energies: eig.values[..n_j].to_vec(),
        states,
        parities,
        params_hash: None,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SambeFrame {
    /// Per-state Fourier offsets; see the module docs.
    #[default]
    Folded,
    /// Plain `K_{l,l'} = P†H_{l-l'}P + l ω δ_{ll'}`.
    Lab,
}

/// Extended Floquet matrix with its block bookkeeping.
#[derive(Clone, Debug)]
pub struct SambeMatrix {
    matrix: CMatrix,
    n_j: usize,
    l_max: usize,
    omega_m: f64,
    frame: SambeFrame,
    shifts: Vec<i64>,
    parities: Vec<f64>,
    params_hash: Option<u64>,
}

impl SambeMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_j(&self) -> usize {
        self.n_j
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn frame(&self) -> SambeFrame {
        self.frame
    }

    /// Fourier offset `n_j` of each dressed state (all zero in the lab frame).
    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    /// Row of component `(p, j)`.
    pub fn index(&self, p: i64, j: usize) -> usize {
        (p + self.l_max as i64) as usize * self.n_j + j
    }

    /// Block `(p, p')` as an `n_j x n_j` matrix.
    pub fn block(&self, p: i64, q: i64) -> CMatrix {
        let (r, c) = (self.index(p, 0), self.index(q, 0));
        self.matrix.view((r, c), (self.n_j, self.n_j)).into_owned()
    }
}

/// Sambe matrix in the default (folded) frame.
pub fn build_sambe(
    p: &crate::hamiltonian::ModelParams,
    basis: &DressedBasis,
    modes: &FourierModes,
) -> Result<SambeMatrix> {
    build_sambe_in_frame(p, basis, modes, SambeFrame::Folded)
}

pub fn build_sambe_in_frame(
    p: &crate::hamiltonian::ModelParams,
    basis: &DressedBasis,
    modes: &FourierModes,
    frame: SambeFrame,
) -> Result<SambeMatrix> {
    if let Some(h) = basis.params_hash() {
        if h != modes.params_hash() || h != p.hamiltonian_hash() {
            return Err(Error::BasisMismatch);
        }
    }
    if basis.dim() != modes.static_part().dim() {
        return Err(Error::BasisMismatch);
    }
    if p.omega_m <= 0.0 {
        return Err(Error::Config(format!(
            "Floquet analysis needs omega_m > 0, got {}",
            p.omega_m
        )));
    }
    let omega = p.omega_m;
    let n = basis.n_j();
    let l = p.l_max as i64;
    let blocks = (2 * l + 1) as usize;
    let mm = modes.m_max() as i64;

    let mut projected: Vec<CMatrix> = (-mm..=mm)
        .map(|m| basis.project(modes.get(m).expect("in range").matrix()))
        .collect();
    // the static block is diagonal by construction; keeping roundoff out of
    // it preserves exact degeneracies
    projected[mm as usize] = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(basis.energies()[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    let shifts: Vec<i64> = match frame {
        SambeFrame::Folded => basis
            .energies()
            .iter()
            .map(|&e| ((e + 0.5 * omega) / omega).floor() as i64)
            .collect(),
        SambeFrame::Lab => vec![0; n],
    };

    let dim = n * blocks;
    let mut k = CMatrix::zeros(dim, dim);
    for bp in 0..blocks {
        let pp = bp as i64 - l;
        for bq in 0..blocks {
            let q = bq as i64 - l;
            for j in 0..n {
                for kk in 0..n {
                    let d = pp - q - shifts[j] + shifts[kk];
                    if d.abs() <= mm {
                        k[(bp * n + j, bq * n + kk)] = projected[(d + mm) as usize][(j, kk)];
                    }
                }
            }
        }
        for j in 0..n {
            k[(bp * n + j, bp * n + j)] += C64::new((pp - shifts[j]) as f64 * omega, 0.0);
        }
    }

    Ok(SambeMatrix {
        matrix: k,
        n_j: n,
        l_max: p.l_max,
        omega_m: omega,
        frame,
        shifts,
        parities: basis.parities().to_vec(),
        params_hash: basis.params_hash(),
    })
}

/// One selected Floquet mode.
#[derive(Clone, Debug)]
pub struct FloquetMode {
    pub quasienergy: f64,
    /// Weight on the outermost Sambe blocks.
    pub edge_weight: f64,
    /// Column of the Sambe eigendecomposition this mode came from.
    pub sambe_index: usize,
    /// `Σ_l ⟨α_l|Π|α_l⟩`.
    pub parity: f64,
    sidebands: Vec<CVector>,
}

impl FloquetMode {
    /// Sideband blocks indexed from the solution's lowest lab index.
    pub fn sidebands(&self) -> &[CVector] {
        &self.sidebands
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sidebands.iter().map(|v| v.norm_squared()).sum()
    }
}

/// Folded quasienergies with sideband states in the dressed basis.
#[derive(Clone, Debug)]
pub struct FloquetSolution {
    omega_m: f64,
    n_j: usize,
    l_max: usize,
    l_lo: i64,
    frame: SambeFrame,
    modes: Vec<FloquetMode>,
    params_hash: Option<u64>,
}

impl FloquetSolution {
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_m
    }

    pub fn n_j(&self) -> usize {
        self.n_j
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn frame(&self) -> SambeFrame {
        self.frame
    }

    pub fn params_hash(&self) -> Option<u64> {
        self.params_hash
    }

    /// Inclusive range of lab sideband indices stored. In the folded frame
    /// this extends past `±l_max` by the largest Fourier offset.
    pub fn sideband_range(&self) -> (i64, i64) {
        let len = self.modes.first().map_or(0, |m| m.sidebands.len()) as i64;
        (self.l_lo, self.l_lo + len - 1)
    }

    pub fn modes(&self) -> &[FloquetMode] {
        &self.modes
    }

    pub fn mode(&self, alpha: usize) -> Option<&FloquetMode> {
        self.modes.get(alpha)
    }

    /// Quasienergies in ascending order.
    pub fn quasienergies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.quasienergy).collect()
    }

    pub fn max_edge_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.edge_weight).fold(0.0, f64::max)
    }

    /// `|α_l⟩`, or `None` outside the stored range.
    pub fn sideband(&self, alpha: usize, l: i64) -> Option<&CVector> {
        let m = self.modes.get(alpha)?;
        if l < self.l_lo {
            return None;
        }
        m.sidebands.get((l - self.l_lo) as usize)
    }

    /// `|α(t)⟩ = Σ_l e^{i l ω t} |α_l⟩` in the dressed basis.
    pub fn mode_at(&self, alpha: usize, t: f64) -> Result<CVector> {
        let m = self.modes.get(alpha).ok_or_else(|| {
            Error::Dimension(format!("mode index {alpha} out of range 0..{}", self.modes.len()))
        })?;
        let mut out = CVector::zeros(self.n_j);
        for (k, v) in m.sidebands.iter().enumerate() {
            let l = self.l_lo + k as i64;
            out.axpy(C64::from_polar(1.0, l as f64 * self.omega_m * t), v, C64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// All `|α(t)⟩` as columns.
    pub fn modes_at(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.n_j, self.modes.len());
        for a in 0..self.modes.len() {
            out.set_column(a, &self.mode_at(a, t).expect("index in range"));
        }
        out
    }

    /// Largest `|Σ_l ⟨α_l|β_l⟩ - δ_{αβ}|` over selected modes.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.modes.len();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let s: C64 = self.modes[a]
                    .sidebands
                    .iter()
                    .zip(&self.modes[b].sidebands)
                    .map(|(x, y)| x.dotc(y))
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                r = r.max((s - target).norm());
            }
        }
        r
    }
}

/// Diagonalizes `K` and keeps one representative per physical mode: the
/// eigenpairs with eigenvalue in `[-ω/2, ω/2)` and edge weight below
/// [`EDGE_WEIGHT_TOL`]. A mode sitting on the zone boundary to within
/// roundoff is assigned to the lower edge.
pub fn solve_floquet(k: &SambeMatrix) -> Result<FloquetSolution> {
    let res = linalg::hermiticity_residual(&k.matrix);
    if res > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    let omega = k.omega_m;
    let half = 0.5 * omega;
    let n = k.n_j;
    let l = k.l_max as i64;
    let blocks = 2 * k.l_max + 1;
    let eig = linalg::eigh(&k.matrix)?;

    let edge_weight = |col: usize| -> f64 {
        let v = eig.vectors.column(col);
        let lo = v.rows(0, n).norm_squared();
        let hi = v.rows((blocks - 1) * n, n).norm_squared();
        lo + hi
    };

    let mut selected: Vec<(usize, f64, f64)> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &w)| (-half..half).contains(&w))
        .map(|(c, &w)| (c, w, edge_weight(c)))
        .filter(|&(_, _, e)| e < EDGE_WEIGHT_TOL)
        .collect();

    // a mode on the boundary can surface as two replicas one zone apart
    let tol = 1e-9 * omega.max(1.0);
    while selected.len() > n {
        let top = selected.iter().rposition(|&(_, w, _)| w > half - tol);
        let bottom = selected.iter().any(|&(_, w, _)| w < -half + tol);
        match (top, bottom) {
            (Some(i), true) => {
                selected.remove(i);
            }
            _ => break,
        }
    }

    if selected.len() != n {
        return Err(Error::TruncationInsufficient {
            found: selected.len(),
            expected: n,
            l_max: k.l_max,
        });
    }

    let s_min = k.shifts.iter().copied().min().unwrap_or(0);
    let s_max = k.shifts.iter().copied().max().unwrap_or(0);
    let l_lo = -l - s_max;
    let l_hi = l - s_min;
    let n_side = (l_hi - l_lo + 1) as usize;

    let mut modes: Vec<FloquetMode> = selected
        .into_iter()
        .map(|(col, w, edge)| {
            let mut v = eig.vectors.column(col).into_owned();
            linalg::fix_phase(&mut v);
            let mut sidebands = vec![CVector::zeros(n); n_side];
            for bp in 0..blocks {
                let pp = bp as i64 - l;
                for j in 0..n {
                    let lab = pp - k.shifts[j];
                    sidebands[(lab - l_lo) as usize][j] = v[bp * n + j];
                }
            }
            let parity = sidebands
                .iter()
                .map(|s| {
                    s.iter()
                        .zip(&k.parities)
                        .map(|(z, p)| z.norm_sqr() * p)
                        .sum::<f64>()
                })
                .sum();
            FloquetMode {
                quasienergy: w,
                edge_weight: edge,
                sambe_index: col,
                parity,
                sidebands,
            }
        })
        .collect();
    modes.sort_by(|a, b| {
        a.quasienergy
            .total_cmp(&b.quasienergy)
            .then(a.sambe_index.cmp(&b.sambe_index))
    });

    Ok(FloquetSolution {
        omega_m: omega,
        n_j: n,
        l_max: k.l_max,
        l_lo,
        frame: k.frame,
        modes,
        params_hash: k.params_hash,
    })
}

/// `|α(t)⟩` for mode `alpha`.
pub fn floquet_mode_at(sol: &FloquetSolution, alpha: usize, t: f64) -> Result<CVector> {
    sol.mode_at(alpha, t)
}

/// Amplitudes `c_α = ⟨α(0)|ψ₀⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapVector {
    pub c_alpha: Vec<C64>,
}

impl OverlapVector {
    pub fn norm_sqr(&self) -> f64 {
        self.c_alpha.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn len(&self) -> usize {
        self.c_alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_alpha.is_empty()
    }
}

pub fn initial_overlaps(sol: &FloquetSolution, psi0: &CVector) -> Result<OverlapVector> {
    if psi0.len() != sol.n_j {
        return Err(Error::Dimension(format!(
            "initial state has length {}, dressed basis has {}",
            psi0.len(),
            sol.n_j
        )));
    }
    let c_alpha = (0..sol.modes.len())
        .map(|a| sol.mode_at(a, 0.0).map(|v| v.dotc(psi0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapVector { c_alpha })
}

/// Dressed basis, Fourier modes and Floquet solution for one parameter point.
#[derive(Clone, Debug)]
pub struct FloquetAnalysis {
    pub modes: FourierModes,
    pub basis: DressedBasis,
    pub solution: FloquetSolution,
}

/// Runs the full pipeline: Fourier modes, dressed basis, Sambe matrix, mode selection.
pub fn analyze(model: &RabiModel) -> Result<FloquetAnalysis> {
    analyze_in_frame(model, SambeFrame::Folded)
}

pub fn analyze_in_frame(model: &RabiModel, frame: SambeFrame) -> Result<FloquetAnalysis> {
    let modes = model.fourier_modes()?;
    let basis = DressedBasis::from_modes(&modes, model.params().n_j)?;
    let k = build_sambe_in_frame(model.params(), &basis, &modes, frame)?;
    let solution = solve_floquet(&k)?;
    Ok(FloquetAnalysis {
        modes,
        basis,
        solution,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// `exp(-i H(t + Δ/2) Δ)` per step; second order.
    Midpoint,
    /// Fourth-order commutator-free product of two exponentials per step,
    /// with `H` sampled at the Gauss–Legendre nodes.
    #[default]
    Cf4,
}

fn exp_step(h: &CMatrix, dt: f64) -> Result<CMatrix> {
    let e = linalg::eigh(h)?;
    Ok(e.apply(|x| C64::from_polar(1.0, -x * dt)))
}

/// Time-ordered propagator over `[0, T]` for the Hamiltonian `h(t)`.
fn propagate<F>(dim: usize, period: f64, steps: usize, integrator: Integrator, h: F) -> Result<CMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    if steps < MIN_MONODROMY_STEPS {
        return Err(Error::Config(format!(
            "monodromy needs at least {MIN_MONODROMY_STEPS} steps, got {steps}"
        )));
    }
    let dt = period / steps as f64;
    let mut u = CMatrix::identity(dim, dim);
    let s3 = 3f64.sqrt();
    let (a1, a2) = ((3.0 - 2.0 * s3) / 12.0, (3.0 + 2.0 * s3) / 12.0);
    let (c1, c2) = (0.5 - s3 / 6.0, 0.5 + s3 / 6.0);
    for k in 0..steps {
        let t = k as f64 * dt;
        let step = match integrator {
            Integrator::Midpoint => exp_step(&h(t + 0.5 * dt), dt)?,
            Integrator::Cf4 => {
                let h1 = h(t + c1 * dt);
                let h2 = h(t + c2 * dt);
                let first = exp_step(&(&h1 * C64::new(a2, 0.0) + &h2 * C64::new(a1, 0.0)), dt)?;
                let second = exp_step(&(&h1 * C64::new(a1, 0.0) + &h2 * C64::new(a2, 0.0)), dt)?;
                second * first
            }
        };
        u = step * u;
    }
    let residual = linalg::unitarity_residual(&u);
    if residual > UNITARITY_TOL {
        return Err(Error::StepCount { steps, residual });
    }
    Ok(u)
}

/// One-period propagator `U(T)` in the full product space.
pub fn monodromy(model: &RabiModel, steps: usize, integrator: Integrator) -> Result<OperatorMatrix> {
    let p = model.params();
    if p.omega_m <= 0.0 {
        return Err(Error::Config("monodromy needs omega_m > 0".into()));
    }
    let u = propagate(model.basis().dim(), p.period(), steps, integrator, |t| {
        model.h_fqr(t).into_matrix()
    })?;
    OperatorMatrix::new(u, model.space())
}

/// One-period propagator of the projected Hamiltonian `P†H(t)P` on the
/// dressed subspace. This is the model the Sambe matrix describes.
pub fn monodromy_dressed(
    model: &RabiModel,
    basis: &DressedBasis,
    steps: usize,
    integrator: Integrator,
) -> Result<OperatorMatrix> {
    let p = model.params();
    if p.omega_m <= 0.0 {
        return Err(Error::Config("monodromy needs omega_m > 0".into()));
    }
    if basis.dim() != model.basis().dim() {
        return Err(Error::BasisMismatch);
    }
    let u = propagate(basis.n_j(), p.period(), steps, integrator, |t| {
        linalg::symmetrize(&basis.project(model.h_fqr(t).matrix()))
    })?;
    OperatorMatrix::new(u, Space::Dressed(basis.n_j()))
}

/// Folded quasienergies `fold(-θ_α / T)` from the eigenphases of `U(T)`, ascending.
pub fn quasienergies_from_monodromy(u: &OperatorMatrix, omega_m: f64) -> Result<Vec<f64>> {
    let residual = linalg::unitarity_residual(u.matrix());
    if residual > UNITARITY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    let period = 2.0 * PI / omega_m;
    let mut q: Vec<f64> = linalg::eigenvalues(u.matrix())?
        .iter()
        .map(|z| fold(-z.arg() / period, omega_m))
        .collect();
    q.sort_by(f64::total_cmp);
    Ok(q)
}
