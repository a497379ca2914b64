//! Time-periodic Coulomb-gauge Rabi Hamiltonian and its Fourier modes.
//!
//! ```text
//! H(t)  = ω_c a†a + (ω_a/2) { σ_z cos[c(t)] + σ_y sin[c(t)] },   c(t) = 2 X η(t),  X = a + a†
//! H(t)  = Σ_m H_m e^{i m ω_M t}
//! ```
//!
//! For sinusoidal modulation `η(t) = η₀ + η_M sin(ω_M t)` the modes follow
//! from the Jacobi–Anger expansion:
//!
//! ```text
//! H_m = ω_c a†a δ_{m0} + (ω_a/2) { (σ_z - iσ_y)/2 · e^{+2iXη₀} + (-1)^m (σ_z + iσ_y)/2 · e^{-2iXη₀} } J_m(2Xη_M)
//! ```
//!
//! Every operator function of `X` is evaluated in the eigenbasis of `X`,
//! which is computed once per [`RabiModel`].

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::operators::{self, Axis, BasisDescriptor, OperatorMatrix, Space, Spectral};
use crate::special;

/// Samples per period used for numeric Fourier modes of non-sinusoidal waveforms.
pub const DEFAULT_NUMERIC_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Sine,
    Sawtooth,
    Tophat,
}

impl Waveform {
    /// Unit-amplitude, zero-mean shape at period fraction `u` (taken mod 1).
    ///
    /// Sawtooth rises linearly from -1 to +1 over the period; tophat is +1 on
    /// the first half-period and -1 on the second.
    pub fn shape(self, u: f64) -> f64 {
        let u = u.rem_euclid(1.0);
        match self {
            Waveform::Sine => (2.0 * PI * u).sin(),
            Waveform::Sawtooth => -1.0 + 2.0 * u,
            Waveform::Tophat => {
                if u < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Limit of the shape approached from below `u`.
    fn shape_left(self, u: f64) -> f64 {
        let u = u.rem_euclid(1.0);
        match self {
            Waveform::Sine => self.shape(u),
            Waveform::Sawtooth => {
                if u == 0.0 {
                    1.0
                } else {
                    self.shape(u)
                }
            }
            Waveform::Tophat => {
                if u == 0.0 || u > 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Period fractions where the shape jumps.
    pub fn discontinuities(self) -> &'static [f64] {
        match self {
            Waveform::Sine => &[],
            Waveform::Sawtooth => &[0.0],
            Waveform::Tophat => &[0.0, 0.5],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Waveform::Sine => "sine",
            Waveform::Sawtooth => "sawtooth",
            Waveform::Tophat => "tophat",
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Waveform::Sine),
            "sawtooth" => Ok(Waveform::Sawtooth),
            "tophat" => Ok(Waveform::Tophat),
            other => Err(Error::Config(format!(
                "unknown waveform {other:?} (expected sine, sawtooth or tophat)"
            ))),
        }
    }
}

/// Physical and truncation parameters. Frequencies and rates are in units
/// of `omega_c`, which defaults to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_a: f64,
    /// Static normalised coupling `g / ω_c`.
    pub eta0: f64,
    /// Modulation amplitude.
    pub eta_m: f64,
    /// Modulation frequency.
    pub omega_m: f64,
    /// Phenomenological damping of off-diagonal Floquet coherences.
    pub gamma: f64,
    pub n_fock: usize,
    /// Number of dressed states kept.
    pub n_j: usize,
    /// Largest Fourier index of the Hamiltonian kept.
    pub m_max: usize,
    /// Largest Floquet sideband index kept.
    pub l_max: usize,
    pub waveform: Waveform,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_a: 1.0,
            eta0: 0.0,
            eta_m: 0.5,
            omega_m: 0.5,
            gamma: 0.1,
            n_fock: 30,
            n_j: 16,
            m_max: 20,
            l_max: 20,
            waveform: Waveform::Sine,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_c", self.omega_c),
            ("omega_a", self.omega_a),
            ("eta0", self.eta0),
            ("eta_m", self.eta_m),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.omega_c <= 0.0 {
            return Err(Error::Config(format!("omega_c must be > 0, got {}", self.omega_c)));
        }
        if self.omega_a < 0.0 {
            return Err(Error::Config(format!("omega_a must be >= 0, got {}", self.omega_a)));
        }
        if self.eta_m != 0.0 && self.omega_m <= 0.0 {
            return Err(Error::Config(format!(
                "omega_m must be > 0 when eta_m != 0 (got omega_m = {}, eta_m = {})",
                self.omega_m, self.eta_m
            )));
        }
        if self.omega_m < 0.0 {
            return Err(Error::Config(format!("omega_m must be >= 0, got {}", self.omega_m)));
        }
        if self.gamma < 0.0 {
            return Err(Error::Config(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.n_fock < 2 {
            return Err(Error::Config(format!("n_fock must be >= 2, got {}", self.n_fock)));
        }
        if self.n_j == 0 || self.n_j > 2 * self.n_fock {
            return Err(Error::Config(format!(
                "n_j must be in 1..={} (2 n_fock), got {}",
                2 * self.n_fock,
                self.n_j
            )));
        }
        if self.l_max < 1 {
            return Err(Error::Config("l_max must be >= 1".into()));
        }
        Ok(())
    }

    /// Modulation period `2π / ω_M`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_m
    }

    pub fn basis(&self) -> BasisDescriptor {
        BasisDescriptor {
            n_fock: self.n_fock,
        }
    }

    /// Identifier of the parameters that determine the Fourier modes `H_m`.
    pub fn hamiltonian_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in [self.omega_c, self.omega_a, self.eta0, self.eta_m] {
            v.to_bits().hash(&mut h);
        }
        self.n_fock.hash(&mut h);
        self.waveform.hash(&mut h);
        h.finish()
    }
}

/// `η(t)` for the selected waveform.
pub fn coupling_rate(t: f64, p: &ModelParams) -> f64 {
    match p.waveform {
        Waveform::Sine => p.eta0 + p.eta_m * (p.omega_m * t).sin(),
        w => {
            if p.eta_m == 0.0 {
                return p.eta0;
            }
            p.eta0 + p.eta_m * w.shape(t / p.period())
        }
    }
}

/// Fourier modes `H_m` for `|m| <= m_max`.
#[derive(Clone, Debug)]
pub struct FourierModes {
    m_max: usize,
    modes: Vec<OperatorMatrix>,
    params_hash: u64,
}

impl FourierModes {
    pub fn params_hash(&self) -> u64 {
        self.params_hash
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `H_m`, or `None` outside the kept range.
    pub fn get(&self, m: i64) -> Option<&OperatorMatrix> {
        if m.unsigned_abs() as usize > self.m_max {
            return None;
        }
        self.modes.get((m + self.m_max as i64) as usize)
    }

    pub fn static_part(&self) -> &OperatorMatrix {
        &self.modes[self.m_max]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &OperatorMatrix)> {
        let off = self.m_max as i64;
        self.modes.iter().enumerate().map(move |(k, h)| (k as i64 - off, h))
    }

    /// `Σ_m H_m e^{i m ω t}`.
    pub fn resynthesize(&self, t: f64, omega_m: f64) -> CMatrix {
        let d = self.static_part().dim();
        let mut out = CMatrix::zeros(d, d);
        for (m, h) in self.iter() {
            let phase = C64::from_polar(1.0, m as f64 * omega_m * t);
            out += h.matrix() * phase;
        }
        out
    }
}

/// Precomputed operators for one parameter set.
#[derive(Clone, Debug)]
pub struct RabiModel {
    params: ModelParams,
    basis: BasisDescriptor,
    number: CMatrix,
    quad: Spectral,
    sigma_y: CMatrix,
    sigma_z: CMatrix,
}

impl RabiModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let basis = BasisDescriptor::new(params.n_fock)?;
        let n_fock = operators::number(basis)?;
        let id2 = OperatorMatrix::identity(Space::Tls);
        let number = operators::embed(&id2, &n_fock, basis)?.into_matrix();
        let quad = Spectral::new(&operators::quadrature(basis)?)?;
        Ok(Self {
            params,
            basis,
            number,
            quad,
            sigma_y: operators::pauli(Axis::Y).into_matrix(),
            sigma_z: operators::pauli(Axis::Z).into_matrix(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> BasisDescriptor {
        self.basis
    }

    pub fn space(&self) -> Space {
        Space::Product(self.basis)
    }

    pub fn period(&self) -> f64 {
        self.params.period()
    }

    /// Eigenvalues of `X = a + a†` in the truncated Fock space.
    pub fn quadrature_eigenvalues(&self) -> &[f64] {
        self.quad.eigenvalues()
    }

    /// Embedded photon number `a†a ⊗ I`.
    pub fn number_operator(&self) -> OperatorMatrix {
        OperatorMatrix::hermitian(self.number.clone(), self.space()).expect("dimension fixed")
    }

    /// Parity `(-1)^{n+s}`; commutes with `H(t)` for every coupling.
    pub fn parity_operator(&self) -> OperatorMatrix {
        let d = self.basis.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let (n, s) = self.basis.split(i);
            m[(i, i)] = C64::new(if (n + s) % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        OperatorMatrix::hermitian(m, self.space()).expect("dimension fixed")
    }

    pub fn coupling_rate(&self, t: f64) -> f64 {
        coupling_rate(t, &self.params)
    }

    /// Hamiltonian at a frozen coupling value `η`.
    pub fn hamiltonian_at_coupling(&self, eta: f64) -> OperatorMatrix {
        let n = self.basis.n_fock;
        let (cos, sin) = if eta == 0.0 {
            (CMatrix::identity(n, n), CMatrix::zeros(n, n))
        } else {
            (
                self.quad.apply_real(|x| (2.0 * x * eta).cos()),
                self.quad.apply_real(|x| (2.0 * x * eta).sin()),
            )
        };
        let m = self.assemble(&cos, &sin, true);
        OperatorMatrix::hermitian(m, self.space()).expect("dimension fixed")
    }

    fn assemble(&self, cos_part: &CMatrix, sin_part: &CMatrix, with_number: bool) -> CMatrix {
        let p = &self.params;
        let half = C64::new(0.5 * p.omega_a, 0.0);
        let mut m = operators::embed_matrices(&self.sigma_z, cos_part)
            + operators::embed_matrices(&self.sigma_y, sin_part);
        m *= half;
        if with_number {
            m += &self.number * C64::new(p.omega_c, 0.0);
        }
        m
    }

    /// `H_FQR(t)`.
    pub fn h_fqr(&self, t: f64) -> OperatorMatrix {
        self.hamiltonian_at_coupling(self.coupling_rate(t))
    }

    /// Time-independent Rabi Hamiltonian at the initial coupling `η(0)`.
    pub fn qrm_hamiltonian(&self) -> OperatorMatrix {
        self.hamiltonian_at_coupling(self.coupling_rate(0.0))
    }

    /// Upper bound on `‖H(t) - Σ_{|m|<=m_max} H_m e^{imωt}‖` for sine modulation:
    /// `2 ω_a Σ_{m>m_max} max_λ |J_m(2λη_M)|` over the eigenvalues `λ` of `X`.
    pub fn truncation_tail_bound(&self) -> f64 {
        let p = &self.params;
        if p.eta_m == 0.0 {
            return 0.0;
        }
        let top = p.m_max + 200;
        let mut worst = vec![0.0f64; top + 1];
        for &x in self.quad.eigenvalues() {
            let js = special::bessel_j_all(top, 2.0 * x * p.eta_m);
            for (w, j) in worst.iter_mut().zip(&js) {
                *w = w.max(j.abs());
            }
        }
        2.0 * p.omega_a * worst[p.m_max + 1..].iter().sum::<f64>()
    }

    /// Analytic `H_m` (sine waveform only).
    pub fn fourier_mode_analytic(&self, m: i64) -> Result<OperatorMatrix> {
        let p = &self.params;
        if p.waveform != Waveform::Sine && p.eta_m != 0.0 {
            return Err(Error::UnsupportedWaveform(p.waveform.to_string()));
        }
        let i = C64::new(0.0, 1.0);
        let n = self.basis.n_fock;
        // zero arguments give exact identities, keeping the bare limit exactly diagonal
        let (e_plus, e_minus) = if p.eta0 == 0.0 {
            (CMatrix::identity(n, n), CMatrix::identity(n, n))
        } else {
            (
                self.quad.apply(|x| C64::from_polar(1.0, 2.0 * x * p.eta0)),
                self.quad.apply(|x| C64::from_polar(1.0, -2.0 * x * p.eta0)),
            )
        };
        let order = m.unsigned_abs() as usize;
        let bessel = if p.eta_m == 0.0 {
            if m == 0 {
                CMatrix::identity(n, n)
            } else {
                CMatrix::zeros(n, n)
            }
        } else {
            let values: Vec<C64> = self
                .quad
                .eigenvalues()
                .iter()
                .map(|&x| {
                    let j = special::bessel_j_all(order, 2.0 * x * p.eta_m)[order];
                    let j = if m < 0 && order % 2 == 1 { -j } else { j };
                    C64::new(j, 0.0)
                })
                .collect();
            self.quad.apply_values(&values)
        };

        let t_minus = (&self.sigma_z - &self.sigma_y * i) * C64::new(0.5, 0.0);
        let t_plus = (&self.sigma_z + &self.sigma_y * i) * C64::new(0.5, 0.0);
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };

        let mut h = operators::embed_matrices(&t_minus, &(&e_plus * &bessel))
            + operators::embed_matrices(&t_plus, &(&e_minus * &bessel)) * C64::new(sign, 0.0);
        h *= C64::new(0.5 * p.omega_a, 0.0);
        if m == 0 {
            h += &self.number * C64::new(p.omega_c, 0.0);
        }
        OperatorMatrix::new(h, self.space())
    }

    /// Per-eigenvalue DFT coefficients of `cos(2λη(t))` and `sin(2λη(t))` for
    /// every mode `|m| <= m_top`. Samples landing on a jump use the mean of
    /// the one-sided limits.
    fn numeric_coefficients(&self, m_top: usize, samples: usize) -> Vec<(Vec<C64>, Vec<C64>)> {
        let p = &self.params;
        let n_modes = 2 * m_top + 1;
        let mut cos_hat = vec![vec![C64::new(0.0, 0.0); self.basis.n_fock]; n_modes];
        let mut sin_hat = vec![vec![C64::new(0.0, 0.0); self.basis.n_fock]; n_modes];
        let jumps = p.waveform.discontinuities();
        let lambdas = self.quad.eigenvalues();
        let inv = 1.0 / samples as f64;
        for k in 0..samples {
            let u = k as f64 * inv;
            let (eta_r, eta_l) = if p.waveform == Waveform::Sine {
                let e = p.eta0 + p.eta_m * (2.0 * PI * u).sin();
                (e, e)
            } else if jumps.iter().any(|&j| (j - u).abs() < 1e-15) {
                (
                    p.eta0 + p.eta_m * p.waveform.shape(u),
                    p.eta0 + p.eta_m * p.waveform.shape_left(u),
                )
            } else {
                let e = p.eta0 + p.eta_m * p.waveform.shape(u);
                (e, e)
            };
            for (idx, m) in (-(m_top as i64)..=m_top as i64).enumerate() {
                // e^{-i m ω t_k} with ω t_k = 2π u
                let w = C64::from_polar(inv, -2.0 * PI * m as f64 * u);
                for (q, &x) in lambdas.iter().enumerate() {
                    let c = 0.5 * ((2.0 * x * eta_r).cos() + (2.0 * x * eta_l).cos());
                    let s = 0.5 * ((2.0 * x * eta_r).sin() + (2.0 * x * eta_l).sin());
                    cos_hat[idx][q] += w * c;
                    sin_hat[idx][q] += w * s;
                }
            }
        }
        cos_hat.into_iter().zip(sin_hat).collect()
    }

    fn check_samples(&self, m_top: usize, samples: usize) -> Result<()> {
        let required = 4 * (m_top + 1);
        if samples < required {
            return Err(Error::Aliasing {
                samples,
                m_max: m_top,
                required,
            });
        }
        Ok(())
    }

    /// `H_m = (1/T) ∫_0^T H(t) e^{-i m ω t} dt` by uniform sampling. Works for every waveform.
    pub fn fourier_mode_numeric(&self, m: i64, samples: usize) -> Result<OperatorMatrix> {
        let top = (m.unsigned_abs() as usize).max(self.params.m_max);
        self.check_samples(top, samples)?;
        let m_abs = m.unsigned_abs() as usize;
        let coeffs = self.numeric_coefficients(m_abs, samples);
        let (c, s) = &coeffs[(m + m_abs as i64) as usize];
        Ok(self.mode_from_coefficients(m, c, s))
    }

    fn mode_from_coefficients(&self, m: i64, c: &[C64], s: &[C64]) -> OperatorMatrix {
        let cos_part = self.quad.apply_values(c);
        let sin_part = self.quad.apply_values(s);
        let h = self.assemble(&cos_part, &sin_part, m == 0);
        OperatorMatrix::new(h, self.space()).expect("dimension fixed")
    }

    pub fn fourier_modes_analytic(&self) -> Result<FourierModes> {
        let m_max = self.params.m_max;
        let modes = (-(m_max as i64)..=m_max as i64)
            .map(|m| self.fourier_mode_analytic(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(FourierModes {
            m_max,
            modes,
            params_hash: self.params.hamiltonian_hash(),
        })
    }

    pub fn fourier_modes_numeric(&self, samples: usize) -> Result<FourierModes> {
        let m_max = self.params.m_max;
        self.check_samples(m_max, samples)?;
        let coeffs = self.numeric_coefficients(m_max, samples);
        let modes = (-(m_max as i64)..=m_max as i64)
            .zip(coeffs.iter())
            .map(|(m, (c, s))| self.mode_from_coefficients(m, c, s))
            .collect();
        Ok(FourierModes {
            m_max,
            modes,
            params_hash: self.params.hamiltonian_hash(),
        })
    }

    /// Analytic modes for sine modulation (or no modulation), numeric otherwise.
    pub fn fourier_modes(&self) -> Result<FourierModes> {
        if self.params.waveform == Waveform::Sine || self.params.eta_m == 0.0 {
            self.fourier_modes_analytic()
        } else {
            self.fourier_modes_numeric(DEFAULT_NUMERIC_SAMPLES)
        }
    }

    /// `H_0`, the period average of `H(t)`.
    pub fn static_hamiltonian(&self) -> Result<OperatorMatrix> {
        let h = if self.params.waveform == Waveform::Sine || self.params.eta_m == 0.0 {
            self.fourier_mode_analytic(0)?
        } else {
            self.fourier_mode_numeric(0, DEFAULT_NUMERIC_SAMPLES)?
        };
        let m = crate::linalg::symmetrize(h.matrix());
        OperatorMatrix::hermitian(m, self.space())
    }
}

pub fn h_fqr(t: f64, p: &ModelParams) -> Result<OperatorMatrix> {
    Ok(RabiModel::new(p.clone())?.h_fqr(t))
}

pub fn fourier_mode_analytic(m: i64, p: &ModelParams) -> Result<OperatorMatrix> {
    if m.unsigned_abs() as usize > p.m_max {
        return Err(Error::Config(format!("|m| = {} exceeds m_max = {}", m.abs(), p.m_max)));
    }
    RabiModel::new(p.clone())?.fourier_mode_analytic(m)
}

pub fn fourier_mode_numeric(m: i64, p: &ModelParams, samples: usize) -> Result<OperatorMatrix> {
    RabiModel::new(p.clone())?.fourier_mode_numeric(m, samples)
}

pub fn static_hamiltonian(p: &ModelParams) -> Result<OperatorMatrix> {
    RabiModel::new(p.clone())?.static_hamiltonian()
}

pub fn qrm_hamiltonian(p: &ModelParams) -> Result<OperatorMatrix> {
    Ok(RabiModel::new(p.clone())?.qrm_hamiltonian())
}
