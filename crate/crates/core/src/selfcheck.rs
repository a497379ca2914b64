//! Invariant suite run by the `selfcheck` subcommand.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::floquet::{self, FloquetAnalysis, Integrator, DEFAULT_MONODROMY_STEPS, EDGE_WEIGHT_TOL};
use crate::hamiltonian::{ModelParams, RabiModel, Waveform};
use crate::linalg::{self, CVector, C64};
use crate::observables::{self, LadderKind};
use crate::operators::OperatorMatrix;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} measured {:.3e}  tolerance {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

/// `max |H(t) - Σ_m H_m e^{imωt}|` over `samples` times in one period.
pub fn resynthesis_error(model: &RabiModel, samples: usize) -> Result<(f64, f64)> {
    let modes = model.fourier_modes()?;
    let period = model.period();
    let (mut abs_err, mut rel_err) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let t = k as f64 * period / samples as f64;
        let h = model.h_fqr(t);
        let diff = linalg::max_abs_diff(h.matrix(), &modes.resynthesize(t, model.params().omega_m));
        abs_err = abs_err.max(diff);
        rel_err = rel_err.max(diff / h.max_abs());
    }
    Ok((abs_err, rel_err))
}

/// `max_m max |H_{-m} - H_m†|`.
pub fn mode_pair_residual(model: &RabiModel) -> Result<f64> {
    let modes = model.fourier_modes()?;
    let m_max = modes.m_max() as i64;
    Ok((0..=m_max)
        .map(|m| {
            modes
                .get(-m)
                .expect("in range")
                .max_abs_diff(&modes.get(m).expect("in range").adjoint())
        })
        .fold(0.0, f64::max))
}

fn ground_overlaps(a: &FloquetAnalysis) -> Result<floquet::OverlapVector> {
    let mut e0 = CVector::zeros(a.basis.n_j());
    e0[0] = C64::new(1.0, 0.0);
    floquet::initial_overlaps(&a.solution, &e0)
}

/// Runs every check at the given parameters.
pub fn run_checks(p: &ModelParams) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let model = RabiModel::new(p.clone())?;

    out.push(Check::new("mode_pairs", mode_pair_residual(&model)?, 1e-10));
    if p.waveform == Waveform::Sine {
        let (abs_err, _) = resynthesis_error(&model, 64)?;
        let scale = model.h_fqr(0.0).max_abs();
        let tol = (1e-8 * scale).max(model.truncation_tail_bound());
        out.push(Check::new("resynthesis", abs_err, tol));
    }

    let a = floquet::analyze(&model)?;
    let h0 = model.static_hamiltonian()?;
    out.push(Check::new("dressed_orthonormality", a.basis.orthonormality_residual(), 1e-10));
    let e_max = a.basis.energies().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    out.push(Check::new("dressed_residual", a.basis.eigen_residual(&h0), 1e-9 * e_max));

    let norm_dev = a
        .solution
        .modes()
        .iter()
        .map(|m| (m.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::new("floquet_normalisation", norm_dev, 1e-10));
    out.push(Check::new("edge_weight", a.solution.max_edge_weight(), EDGE_WEIGHT_TOL));

    let c = ground_overlaps(&a)?;
    out.push(Check::new("overlap_completeness", (c.norm_sqr() - 1.0).abs(), 1e-6));

    let period = a.solution.period();
    let mut pointwise: f64 = 0.0;
    for k in 0..=32 {
        let t = k as f64 * period / 32.0;
        for alpha in 0..a.solution.modes().len() {
            let v = a.solution.mode_at(alpha, t)?;
            pointwise = pointwise.max((v.norm_squared() - 1.0).abs());
        }
    }
    // Exact for the untruncated Sambe problem; the residue scales like the edge amplitude.
    let tol = 1e-8f64.max(a.solution.max_edge_weight().sqrt());
    out.push(Check::new("mode_norm_pointwise", pointwise, tol));

    let u = floquet::monodromy_dressed(&model, &a.basis, DEFAULT_MONODROMY_STEPS, Integrator::Cf4)?;
    out.push(Check::new("monodromy_unitarity", linalg::unitarity_residual(u.matrix()), 1e-8));
    let q = floquet::quasienergies_from_monodromy(&u, p.omega_m)?;
    out.push(Check::new(
        "dual_solver",
        floquet::set_distance(&q, &a.solution.quasienergies(), p.omega_m),
        1e-6,
    ));

    let times = observables::default_time_grid(p);
    let series = observables::ground_state_series(&a, p, &times)?;
    let cav = observables::dressed_raising(&a.basis, LadderKind::Cav)?;
    let tls = observables::dressed_raising(&a.basis, LadderKind::Tls)?;
    let bound_c = observables::off_diagonal_bound(&c, &cav)?.max(observables::off_diagonal_bound(&c, &tls)?);
    let tol = 1e-6f64.max((-p.gamma * series.t_ss).exp() * bound_c);
    out.push(Check::new("periodicity", series.periodicity_residual()?, tol));

    let undriven = ModelParams {
        eta_m: 0.0,
        ..p.clone()
    };
    let und_model = RabiModel::new(undriven.clone())?;
    let und = floquet::analyze(&und_model)?;
    let und_series = observables::ground_state_series(&und, &undriven, &times)?;
    let dark = und_series
        .n_cav
        .iter()
        .chain(&und_series.n_tls)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    out.push(Check::new("vacuum_fixed_point", dark, 1e-10));

    let qrm = linalg::eigh(und_model.qrm_hamiltonian().matrix())?.values;
    let qrm_dev = und
        .basis
        .energies()
        .iter()
        .zip(&qrm)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(Check::new("qrm_reduction", qrm_dev, 1e-12));

    let bare = ModelParams {
        eta0: 0.0,
        eta_m: 0.0,
        ..p.clone()
    };
    let bare_h = RabiModel::new(bare.clone())?.static_hamiltonian()?;
    let got = linalg::eigh(bare_h.matrix())?.values;
    let mut want: Vec<f64> = (0..bare.n_fock)
        .flat_map(|n| {
            let e = n as f64 * bare.omega_c;
            [e - 0.5 * bare.omega_a, e + 0.5 * bare.omega_a]
        })
        .collect();
    want.sort_by(f64::total_cmp);
    let bare_dev = got
        .iter()
        .zip(&want)
        .take(bare.n_j)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(Check::new("bare_spectrum", bare_dev, 1e-12));

    Ok(out)
}

/// `U(T)` of the undriven model against `exp(-i H T)`; used by tests.
pub fn static_monodromy_deviation(p: &ModelParams, steps: usize) -> Result<f64> {
    let model = RabiModel::new(ModelParams {
        eta_m: 0.0,
        ..p.clone()
    })?;
    let u = floquet::monodromy(&model, steps, Integrator::Cf4)?;
    let e = linalg::eigh(model.qrm_hamiltonian().matrix())?;
    let exact = OperatorMatrix::new(
        e.apply(|x| C64::from_polar(1.0, -x * model.period())),
        u.space(),
    )?;
    Ok(u.max_abs_diff(&exact))
}
