//! Dressed emission operators and real excitation numbers.
//!
//! For a system operator `S`, the dressed raising part keeps only matrix
//! elements that lower the dressed energy:
//!
//! ```text
//! s⁺ = Σ_{j<k} ⟨j|S|k⟩ |j⟩⟨k|,    s⁻ = (s⁺)†
//! N(t) = Σ_{αβ} c*_α c_β e^{i(ε_α-ε_β)t} e^{-γt(1-δ_{αβ})} ⟨α(t)|s⁻s⁺|β(t)⟩
//! ```
//!
//! with `S_cav = a(1+i)/√2 + h.c.` and `S_tls = σ_x`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{DressedBasis, FloquetSolution, OverlapVector};
use crate::hamiltonian::{ModelParams, RabiModel};
use crate::linalg::{self, CMatrix, C64};
use crate::operators::{self, Axis, BasisDescriptor, OperatorMatrix, Space};

/// Steady state is taken to start this many periods after switch-on.
pub const STEADY_STATE_PERIODS: f64 = 5.0;
/// Default grid: this many periods ...
pub const DEFAULT_GRID_PERIODS: f64 = 8.0;
/// ... split into this many intervals.
pub const DEFAULT_GRID_INTERVALS: usize = 2048;

const IMAG_TOL: f64 = 1e-8;
const NEGATIVE_TOL: f64 = 1e-10;
const NORM_DEFICIT_WARN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Cav,
    Tls,
}

impl fmt::Display for LadderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LadderKind::Cav => "cav",
            LadderKind::Tls => "tls",
        })
    }
}

/// Bare system operator `S^Λ` embedded in the product space.
pub fn system_operator(kind: LadderKind, basis: BasisDescriptor) -> Result<OperatorMatrix> {
    match kind {
        LadderKind::Cav => {
            let a = operators::fock_ladder(basis)?;
            let half = a.scale(C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2));
            let s = half.try_add(&half.adjoint())?;
            operators::embed(&OperatorMatrix::identity(Space::Tls), &s, basis)
        }
        LadderKind::Tls => operators::embed(
            &operators::pauli(Axis::X),
            &OperatorMatrix::identity(Space::Fock(basis)),
            basis,
        ),
    }
}

/// `s^{Λ±}` in the energy-ordered dressed basis.
#[derive(Clone, Debug)]
pub struct DressedLadder {
    kind: LadderKind,
    plus: CMatrix,
    minus: CMatrix,
}

impl DressedLadder {
    /// Builds the ladder from a full matrix of `⟨j|S|k⟩`, keeping `k > j`.
    pub fn from_elements(kind: LadderKind, s: &CMatrix) -> Self {
        let n = s.nrows();
        let plus = CMatrix::from_fn(n, n, |j, k| if k > j { s[(j, k)] } else { C64::new(0.0, 0.0) });
        let minus = plus.adjoint();
        Self { kind, plus, minus }
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn plus(&self) -> &CMatrix {
        &self.plus
    }

    pub fn minus(&self) -> &CMatrix {
        &self.minus
    }

    /// `s⁻ s⁺`.
    pub fn number(&self) -> CMatrix {
        &self.minus * &self.plus
    }
}

pub fn dressed_raising(basis: &DressedBasis, kind: LadderKind) -> Result<DressedLadder> {
    let d = basis.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::Dimension(format!("dressed states have odd length {d}")));
    }
    let s = system_operator(kind, BasisDescriptor::new(d / 2)?)?;
    Ok(DressedLadder::from_elements(kind, &basis.project(s.matrix())))
}

/// `N_Λ(t)` for both channels with their period averages.
#[derive(Clone, Debug, Serialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub n_cav: Vec<f64>,
    pub n_tls: Vec<f64>,
    pub mean_cav: f64,
    pub mean_tls: f64,
    pub t_ss: f64,
    pub period: f64,
    /// Non-fatal conditions met while evaluating the series.
    pub warnings: Vec<String>,
}

impl ObservableSeries {
    /// `max |N(t+T) - N(t)|` over `t ∈ [t_ss, t_ss + T]`, both channels.
    pub fn periodicity_residual(&self) -> Result<f64> {
        let a = periodicity_residual(&self.times, &self.n_cav, self.t_ss, self.period)?;
        let b = periodicity_residual(&self.times, &self.n_tls, self.t_ss, self.period)?;
        Ok(a.max(b))
    }
}

/// `2048` intervals over `[0, 8T]`, so `t_ss = 5T` falls on a grid point.
pub fn default_time_grid(p: &ModelParams) -> Vec<f64> {
    uniform_grid(0.0, DEFAULT_GRID_PERIODS * p.period(), DEFAULT_GRID_INTERVALS + 1)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo; points];
    }
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| if k == points - 1 { hi } else { lo + k as f64 * h })
        .collect()
}

/// Piecewise-linear interpolation of `(times, values)` at `t`.
fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t);
    if k == 0 {
        return values[0];
    }
    if k >= times.len() {
        return values[times.len() - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Trapezoid integral of the piecewise-linear interpolant over `[a, b]`.
fn integrate(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut knots = vec![a];
    knots.extend(times.iter().copied().filter(|&t| t > a && t < b));
    knots.push(b);
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (interpolate(times, values, w[0]) + interpolate(times, values, w[1])))
        .sum()
}

fn check_span(times: &[f64], end: f64, what: &str) -> Result<()> {
    let last = times.last().copied().unwrap_or(f64::NEG_INFINITY);
    let tol = 1e-9 * end.abs().max(1.0);
    if times.len() < 2 || last < end - tol {
        return Err(Error::GridTooShort(format!(
            "{what} needs t up to {end:.6}, grid ends at {last:.6}"
        )));
    }
    Ok(())
}

/// `(1/T) ∫_{t_ss}^{t_ss+T} N dt` by the trapezoid rule.
pub fn period_mean(times: &[f64], values: &[f64], t_ss: f64, period: f64) -> Result<f64> {
    check_span(times, t_ss + period, "period average")?;
    Ok(integrate(times, values, t_ss, t_ss + period) / period)
}

/// `max |N(t+T) - N(t)|` for grid points `t ∈ [t_ss, t_ss + T]`.
pub fn periodicity_residual(times: &[f64], values: &[f64], t_ss: f64, period: f64) -> Result<f64> {
    check_span(times, t_ss + 2.0 * period, "periodicity check")?;
    let tol = 1e-9 * period;
    Ok(times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t_ss - tol && t <= t_ss + period + tol)
        .map(|(&t, &v)| (interpolate(times, values, t + period) - v).abs())
        .fold(0.0, f64::max))
}

/// Mean excitation numbers `(N̄_cav, N̄_tls)` of a series over `[t_ss, t_ss + T]`.
pub fn period_average(series: &ObservableSeries) -> Result<(f64, f64)> {
    Ok((
        period_mean(&series.times, &series.n_cav, series.t_ss, series.period)?,
        period_mean(&series.times, &series.n_tls, series.t_ss, series.period)?,
    ))
}

/// `N_Λ` on a time grid. Values below zero by more than roundoff are logged
/// and reported through `warnings`; all negatives are clamped to zero.
pub fn excitation_values(
    sol: &FloquetSolution,
    c: &OverlapVector,
    ladder: &DressedLadder,
    gamma: f64,
    times: &[f64],
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    let n = sol.modes().len();
    if c.len() != n || ladder.plus().nrows() != sol.n_j() {
        return Err(Error::Dimension(format!(
            "{} overlaps and a {}-state ladder for {} modes",
            c.len(),
            ladder.plus().nrows(),
            n
        )));
    }
    let m = ladder.number();
    let eps = sol.quasienergies();
    let mut worst_imag: f64 = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let a = sol.modes_at(t);
        let g = a.adjoint() * &m * &a;
        let damp = (-gamma * t).exp();
        let mut sum = C64::new(0.0, 0.0);
        for al in 0..n {
            for be in 0..n {
                let f = if al == be { 1.0 } else { damp };
                let phase = C64::from_polar(f, (eps[al] - eps[be]) * t);
                sum += c.c_alpha[al].conj() * c.c_alpha[be] * phase * g[(al, be)];
            }
        }
        worst_imag = worst_imag.max(sum.im.abs());
        let mut v = sum.re;
        if v < 0.0 {
            if v < -NEGATIVE_TOL {
                let msg = format!("N_{} = {v:e} at t = {t}; clamped to 0", ladder.kind());
                warn!("{msg}");
                warnings.push(msg);
            }
            v = 0.0;
        }
        out.push(v);
    }
    if worst_imag > IMAG_TOL {
        return Err(Error::Numerical(format!(
            "N_{} has imaginary residue {worst_imag:e}; sideband truncation is inadequate",
            ladder.kind()
        )));
    }
    Ok(out)
}

/// Diagonal-only steady-state value `Σ_α |c_α|² ⟨α(t)|s⁻s⁺|α(t)⟩`.
pub fn steady_state_values(
    sol: &FloquetSolution,
    c: &OverlapVector,
    ladder: &DressedLadder,
    times: &[f64],
) -> Vec<f64> {
    let m = ladder.number();
    times
        .iter()
        .map(|&t| {
            let a = sol.modes_at(t);
            (0..sol.modes().len())
                .map(|al| {
                    let v = a.column(al);
                    c.c_alpha[al].norm_sqr() * v.dotc(&(&m * v)).re
                })
                .sum()
        })
        .collect()
}

/// `Σ_{α≠β} |c_α c_β| · ‖s⁻s⁺‖`, the weight of the damped coherences.
pub fn off_diagonal_bound(c: &OverlapVector, ladder: &DressedLadder) -> Result<f64> {
    let l1: f64 = c.c_alpha.iter().map(|z| z.norm()).sum();
    let l2: f64 = c.norm_sqr();
    let norm = linalg::spectral_norm_psd(&crate::linalg::symmetrize(&ladder.number()))?;
    Ok((l1 * l1 - l2).max(0.0) * norm)
}

/// Both channels plus their period averages, with `t_ss = 5T`.
pub fn excitation_series(
    sol: &FloquetSolution,
    c: &OverlapVector,
    cav: &DressedLadder,
    tls: &DressedLadder,
    p: &ModelParams,
    times: &[f64],
) -> Result<ObservableSeries> {
    let period = 2.0 * PI / p.omega_m;
    let t_ss = STEADY_STATE_PERIODS * period;
    check_span(times, t_ss + 2.0 * period, "excitation series")?;
    let mut warnings = Vec::new();
    let deficit = (c.norm_sqr() - 1.0).abs();
    if deficit > NORM_DEFICIT_WARN {
        let msg = format!("overlap normalisation deficit {deficit:e}: initial state leaks out of the dressed subspace");
        warn!("{msg}");
        warnings.push(msg);
    }
    let n_cav = excitation_values(sol, c, cav, p.gamma, times, &mut warnings)?;
    let n_tls = excitation_values(sol, c, tls, p.gamma, times, &mut warnings)?;
    let mean_cav = period_mean(times, &n_cav, t_ss, period)?;
    let mean_tls = period_mean(times, &n_tls, t_ss, period)?;
    Ok(ObservableSeries {
        times: times.to_vec(),
        n_cav,
        n_tls,
        mean_cav,
        mean_tls,
        t_ss,
        period,
        warnings,
    })
}

/// Excitations generated from the dressed ground state `|j=0⟩`.
pub fn ground_state_series(
    analysis: &crate::floquet::FloquetAnalysis,
    p: &ModelParams,
    times: &[f64],
) -> Result<ObservableSeries> {
    let mut psi0 = crate::linalg::CVector::zeros(analysis.basis.n_j());
    psi0[0] = C64::new(1.0, 0.0);
    let c = crate::floquet::initial_overlaps(&analysis.solution, &psi0)?;
    let cav = dressed_raising(&analysis.basis, LadderKind::Cav)?;
    let tls = dressed_raising(&analysis.basis, LadderKind::Tls)?;
    excitation_series(&analysis.solution, &c, &cav, &tls, p, times)
}

/// `⟨0|a†a|0⟩` in the ground state of the undriven Rabi Hamiltonian.
pub fn virtual_photons(p: &ModelParams) -> Result<f64> {
    let model = RabiModel::new(p.clone())?;
    let e = linalg::eigh(model.qrm_hamiltonian().matrix())?;
    let g = e.vectors.column(0);
    let n = model.number_operator();
    Ok(g.dotc(&(n.matrix() * g)).re.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{analyze, initial_overlaps, FloquetAnalysis};
    use crate::linalg::CVector;

    fn params(eta0: f64, eta_m: f64) -> ModelParams {
        ModelParams {
            eta0,
            eta_m,
            n_fock: 14,
            n_j: 8,
            ..ModelParams::default()
        }
    }

    fn run(p: &ModelParams) -> FloquetAnalysis {
        analyze(&RabiModel::new(p.clone()).unwrap()).unwrap()
    }

    #[test]
    fn bare_selection_rules() {
        let p = params(0.0, 0.0);
        let a = run(&p);
        let basis = p.basis();
        let cav = dressed_raising(&a.basis, LadderKind::Cav).unwrap();
        let tls = dressed_raising(&a.basis, LadderKind::Tls).unwrap();
        // dressed state j as (n, s); bare eigenvectors may be mixed inside
        // degenerate pairs, so classify by the dominant component
        let label = |j: usize| {
            let v = a.basis.state(j);
            let i = (0..v.len()).max_by(|&x, &y| v[x].norm().total_cmp(&v[y].norm())).unwrap();
            basis.split(i)
        };
        for j in 0..8 {
            for k in 0..8 {
                let (nj, sj) = label(j);
                let (nk, sk) = label(k);
                if cav.plus()[(j, k)].norm() > 1e-12 {
                    assert!(nk == nj + 1 && sj == sk, "cav {j}<-{k}");
                }
                if tls.plus()[(j, k)].norm() > 1e-12 {
                    assert!(nj == nk && sj == 0 && sk == 1, "tls {j}<-{k}");
                }
            }
        }
    }

    #[test]
    fn ladder_structure() {
        let a = run(&params(0.0, 0.5));
        for kind in [LadderKind::Cav, LadderKind::Tls] {
            let l = dressed_raising(&a.basis, kind).unwrap();
            let n = l.plus().nrows();
            for j in 0..n {
                for k in 0..=j {
                    assert_eq!(l.plus()[(j, k)], C64::new(0.0, 0.0));
                }
            }
            assert_eq!(l.minus(), &l.plus().adjoint());
            // ⟨0|s⁻s⁺|0⟩ vanishes by structure, not by cancellation
            assert_eq!(l.number()[(0, 0)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn drive_hybridises_cavity_ladder() {
        let count = |eta_m: f64| {
            let a = run(&params(0.0, eta_m));
            let l = dressed_raising(&a.basis, LadderKind::Cav).unwrap();
            l.plus().iter().filter(|z| z.norm() > 1e-8).count()
        };
        assert!(count(0.5) > count(0.0));
    }

    #[test]
    fn cavity_operator_convention() {
        let b = BasisDescriptor::new(3).unwrap();
        let s = system_operator(LadderKind::Cav, b).unwrap();
        assert!(s.is_hermitian());
        let want = C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((s.get(b.index(0, 0), b.index(1, 0)) - want).norm() < 1e-15);
        assert!((s.get(b.index(1, 1), b.index(0, 1)) - want.conj()).norm() < 1e-15);
    }

    #[test]
    fn vacuum_stays_dark_without_drive() {
        let p = params(0.3, 0.0);
        let a = run(&p);
        let times = default_time_grid(&p);
        let s = ground_state_series(&a, &p, &times).unwrap();
        for v in s.n_cav.iter().chain(&s.n_tls) {
            assert!(v.abs() <= 1e-10);
        }
        assert!(s.mean_cav.abs() < 1e-10);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn driven_series_is_nonnegative_and_settles() {
        let p = params(0.0, 0.5);
        let a = run(&p);
        let times = default_time_grid(&p);
        let s = ground_state_series(&a, &p, &times).unwrap();
        assert!(s.n_cav.iter().chain(&s.n_tls).all(|&v| v >= 0.0));
        assert!(s.mean_cav > 0.0 && s.mean_tls > 0.0);
        let bound = (-p.gamma * s.t_ss).exp();
        assert!(s.periodicity_residual().unwrap() <= 1e-6f64.max(bound));
        let later = period_mean(&s.times, &s.n_cav, s.t_ss + s.period, s.period).unwrap();
        assert!((later - s.mean_cav).abs() <= 1e-6f64.max(bound));
    }

    #[test]
    fn damped_series_approaches_steady_state() {
        let p = ModelParams {
            gamma: 0.3,
            ..params(0.0, 0.5)
        };
        let a = run(&p);
        let times = default_time_grid(&p);
        let mut e0 = CVector::zeros(8);
        e0[0] = C64::new(1.0, 0.0);
        let c = initial_overlaps(&a.solution, &e0).unwrap();
        let ladder = dressed_raising(&a.basis, LadderKind::Cav).unwrap();
        let full = excitation_values(&a.solution, &c, &ladder, p.gamma, &times, &mut Vec::new()).unwrap();
        let diag = steady_state_values(&a.solution, &c, &ladder, &times);
        let bound_c = off_diagonal_bound(&c, &ladder).unwrap();
        let t_ss = 5.0 * p.period();
        for ((t, f), d) in times.iter().zip(&full).zip(&diag) {
            if *t >= t_ss {
                assert!((f - d).abs() <= (-p.gamma * t_ss).exp() * bound_c + 1e-12);
            }
        }
    }

    #[test]
    fn grid_too_short_is_rejected() {
        let p = params(0.0, 0.5);
        let a = run(&p);
        let times = uniform_grid(0.0, 6.0 * p.period(), 100);
        assert!(matches!(
            ground_state_series(&a, &p, &times),
            Err(Error::GridTooShort(_))
        ));
    }

    #[test]
    fn period_mean_of_constant() {
        let times = uniform_grid(0.0, 10.0, 37);
        let values = vec![2.5; 37];
        assert!((period_mean(&times, &values, 3.1, 2.0).unwrap() - 2.5).abs() < 1e-14);
        assert!(period_mean(&times, &values, 9.0, 2.0).is_err());
    }

    #[test]
    fn period_mean_of_sine_offgrid() {
        let times = uniform_grid(0.0, 20.0, 4001);
        let values: Vec<f64> = times.iter().map(|t| 1.0 + (2.0 * PI * t / 4.0).sin()).collect();
        assert!((period_mean(&times, &values, 1.234, 4.0).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn default_grid_hits_steady_state_onset() {
        let p = ModelParams::default();
        let g = default_time_grid(&p);
        assert_eq!(g.len(), 2049);
        assert_eq!(g[0], 0.0);
        assert!((g[1280] - 5.0 * p.period()).abs() < 1e-12);
        assert_eq!(*g.last().unwrap(), 8.0 * p.period());
    }

    #[test]
    fn virtual_photon_scan() {
        let base = ModelParams {
            eta_m: 0.0,
            n_fock: 30,
            ..ModelParams::default()
        };
        assert_eq!(virtual_photons(&base).unwrap(), 0.0);
        // converged in n_fock; rises to a maximum near eta0 = 0.9, then falls
        let fixtures = [
            0.0, 0.00248, 0.00970, 0.02097, 0.03512, 0.05053, 0.06512, 0.07662, 0.08298, 0.08307,
            0.07732,
        ];
        let values: Vec<f64> = (0..=10)
            .map(|k| {
                let p = ModelParams {
                    eta0: k as f64 * 0.1,
                    ..base.clone()
                };
                virtual_photons(&p).unwrap()
            })
            .collect();
        for (v, f) in values.iter().zip(fixtures) {
            assert!((v - f).abs() < 1e-5, "{v} vs {f}");
        }
        assert!(values[..10].windows(2).all(|w| w[1] >= w[0]));
        assert!(values[10] < values[9]);
    }

    #[test]
    fn bare_photons_are_not_emission() {
        // the undriven USC ground state holds virtual photons, yet emits nothing
        let p = params(0.5, 0.0);
        assert!(virtual_photons(&p).unwrap() > 1e-3);
        let a = run(&p);
        let times = default_time_grid(&p);
        let s = ground_state_series(&a, &p, &times).unwrap();
        assert!(s.n_cav.iter().all(|&v| v.abs() < 1e-10));
    }
}
