//! Parameter sweeps, figure presets, quasienergy tracking and resonance assignment.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, circular_distance, DressedBasis, FloquetAnalysis, SambeFrame};
use crate::hamiltonian::{ModelParams, RabiModel};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::observables::{self, LadderKind, ObservableSeries};

/// Grid density of the figure presets.
pub const PRESET_POINTS: usize = 201;
/// A sweep fails as a whole when more than this fraction of points fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;
/// Adjacent-point overlap below which a track is broken.
pub const MIN_TRACK_OVERLAP: f64 = 0.5;
/// Two candidates closer than this in overlap make a link ambiguous.
pub const AMBIGUITY_MARGIN: f64 = 0.05;
/// Excitation peaks lower than this are ignored.
pub const PEAK_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Eta0,
    EtaM,
    OmegaM,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Eta0 => "eta0",
            SweepParameter::EtaM => "eta_m",
            SweepParameter::OmegaM => "omega_m",
        }
    }

    pub fn apply(self, p: &mut ModelParams, value: f64) {
        match self {
            SweepParameter::Eta0 => p.eta0 = value,
            SweepParameter::EtaM => p.eta_m = value,
            SweepParameter::OmegaM => p.omega_m = value,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta0" => Ok(SweepParameter::Eta0),
            "eta_m" | "etaM" | "eta-m" => Ok(SweepParameter::EtaM),
            "omega_m" | "omegaM" | "omega-m" => Ok(SweepParameter::OmegaM),
            other => Err(Error::Config(format!(
                "unknown sweep parameter {other:?} (expected eta0, eta_m or omega_m)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub static_energies: bool,
    pub qrm_energies: bool,
    pub quasienergies: bool,
    pub mean_excitations: bool,
    pub timeseries: bool,
}

impl Outputs {
    fn needs_floquet(&self) -> bool {
        self.quasienergies || self.mean_excitations || self.timeseries
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub base: ModelParams,
    pub outputs: Outputs,
    /// Worker threads; 1 runs on the calling thread.
    pub workers: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(Error::Config(format!(
                "sweep range must satisfy lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::Config(format!("sweep needs at least 2 points, got {}", self.points)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        observables::uniform_grid(self.lo, self.hi, self.points)
    }

    /// Parameters at one grid value.
    pub fn params_at(&self, value: f64) -> ModelParams {
        let mut p = self.base.clone();
        self.parameter.apply(&mut p, value);
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Figure {
    #[serde(rename = "2a")]
    Fig2a,
    #[serde(rename = "2b")]
    Fig2b,
    #[serde(rename = "2c")]
    Fig2c,
    #[serde(rename = "3a")]
    Fig3a,
    #[serde(rename = "3b")]
    Fig3b,
    #[serde(rename = "3c")]
    Fig3c,
    #[serde(rename = "3d")]
    Fig3d,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig3c,
        Figure::Fig3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "2a",
            Figure::Fig2b => "2b",
            Figure::Fig2c => "2c",
            Figure::Fig3a => "3a",
            Figure::Fig3b => "3b",
            Figure::Fig3c => "3c",
            Figure::Fig3d => "3d",
        }
    }

    /// Drive amplitude of the time-series panels.
    pub fn timeseries_eta_m(self) -> Option<f64> {
        match self {
            Figure::Fig3a => Some(0.2),
            Figure::Fig3b => Some(0.5),
            _ => None,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure {s:?} (expected 2a, 2b, 2c, 3a, 3b, 3c or 3d)")))
    }
}

/// Sweep behind a figure panel; `None` for the time-series panels.
pub fn preset(figure: Figure, base: &ModelParams) -> Option<SweepSpec> {
    let spec = |parameter, lo, hi, base: ModelParams, outputs| SweepSpec {
        parameter,
        lo,
        hi,
        points: PRESET_POINTS,
        base,
        outputs,
        workers: 1,
    };
    match figure {
        Figure::Fig2a => Some(spec(
            SweepParameter::Eta0,
            0.0,
            1.0,
            ModelParams {
                eta_m: 0.5,
                ..base.clone()
            },
            Outputs {
                static_energies: true,
                qrm_energies: true,
                ..Outputs::default()
            },
        )),
        Figure::Fig2b => Some(spec(
            SweepParameter::EtaM,
            0.0,
            1.0,
            ModelParams {
                eta0: 0.0,
                ..base.clone()
            },
            Outputs {
                static_energies: true,
                qrm_energies: true,
                ..Outputs::default()
            },
        )),
        Figure::Fig2c => Some(spec(
            SweepParameter::EtaM,
            0.0,
            1.0,
            ModelParams {
                eta0: 0.0,
                ..base.clone()
            },
            Outputs {
                quasienergies: true,
                ..Outputs::default()
            },
        )),
        Figure::Fig3c => Some(spec(
            SweepParameter::EtaM,
            0.0,
            1.2,
            ModelParams {
                eta0: 0.0,
                ..base.clone()
            },
            Outputs {
                static_energies: true,
                mean_excitations: true,
                ..Outputs::default()
            },
        )),
        Figure::Fig3d => Some(spec(
            SweepParameter::OmegaM,
            0.3,
            1.5,
            ModelParams {
                eta0: 0.0,
                eta_m: 0.5,
                ..base.clone()
            },
            Outputs {
                static_energies: true,
                mean_excitations: true,
                ..Outputs::default()
            },
        )),
        Figure::Fig3a | Figure::Fig3b => None,
    }
}

/// Sideband content of one Floquet solution, kept for curve tracking.
#[derive(Clone, Debug)]
pub struct FloquetSnapshot {
    pub omega_m: f64,
    /// Dressed states in a common reference basis (columns).
    pub basis_states: CMatrix,
    /// Lowest lab sideband index stored in `modes[..].sidebands`.
    pub l_lo: i64,
    pub modes: Vec<ModeSnapshot>,
}

#[derive(Clone, Debug)]
pub struct ModeSnapshot {
    pub quasienergy: f64,
    pub parity: f64,
    pub sidebands: Vec<CVector>,
}

impl FloquetSnapshot {
    pub fn from_analysis(a: &FloquetAnalysis) -> Self {
        let (l_lo, _) = a.solution.sideband_range();
        Self {
            omega_m: a.solution.omega_m(),
            basis_states: a.basis.states().clone(),
            l_lo,
            modes: a
                .solution
                .modes()
                .iter()
                .map(|m| ModeSnapshot {
                    quasienergy: m.quasienergy,
                    parity: m.parity,
                    sidebands: m.sidebands().to_vec(),
                })
                .collect(),
        }
    }

    pub fn sideband(&self, mode: usize, l: i64) -> Option<&CVector> {
        if l < self.l_lo {
            return None;
        }
        self.modes[mode].sidebands.get((l - self.l_lo) as usize)
    }
}

/// Everything computed at one grid value.
#[derive(Clone, Debug, Default)]
pub struct PointRecord {
    pub value: f64,
    pub static_energies: Option<Vec<f64>>,
    /// `⟨j|Π|j⟩` of the dressed states.
    pub static_parities: Option<Vec<f64>>,
    pub qrm_energies: Option<Vec<f64>>,
    pub quasienergies: Option<Vec<f64>>,
    /// `(N̄_cav, N̄_tls)`.
    pub mean_excitations: Option<(f64, f64)>,
    pub series: Option<ObservableSeries>,
    pub snapshot: Option<FloquetSnapshot>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<PointRecord>,
    pub version: &'static str,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// Modulation frequency at record `i`.
    pub fn omega_m_at(&self, i: usize) -> f64 {
        self.spec.params_at(self.records[i].value).omega_m
    }
}

fn lowest_eigenvalues(m: &CMatrix, n: usize) -> Result<Vec<f64>> {
    let e = linalg::eigh(m)?;
    Ok(e.values.into_iter().take(n).collect())
}

/// Evaluates the requested outputs at one parameter point.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> Result<PointRecord> {
    let p = spec.params_at(value);
    let model = RabiModel::new(p.clone())?;
    let out = &spec.outputs;
    let mut rec = PointRecord {
        value,
        ..PointRecord::default()
    };
    if out.qrm_energies {
        rec.qrm_energies = Some(lowest_eigenvalues(model.qrm_hamiltonian().matrix(), p.n_j)?);
    }
    if !(out.static_energies || out.needs_floquet()) {
        return Ok(rec);
    }
    let modes = model.fourier_modes()?;
    let basis = DressedBasis::from_modes(&modes, p.n_j)?;
    if out.static_energies {
        rec.static_energies = Some(basis.energies().to_vec());
        rec.static_parities = Some(basis.parities().to_vec());
    }
    if !out.needs_floquet() {
        return Ok(rec);
    }
    let k = floquet::build_sambe_in_frame(&p, &basis, &modes, SambeFrame::Folded)?;
    let solution = floquet::solve_floquet(&k)?;
    let analysis = FloquetAnalysis {
        modes,
        basis,
        solution,
    };
    if out.quasienergies {
        rec.quasienergies = Some(analysis.solution.quasienergies());
        rec.snapshot = Some(FloquetSnapshot::from_analysis(&analysis));
    }
    if out.mean_excitations || out.timeseries {
        let times = observables::default_time_grid(&p);
        let series = observables::ground_state_series(&analysis, &p, &times)?;
        rec.mean_excitations = Some((series.mean_cav, series.mean_tls));
        if out.timeseries {
            rec.series = Some(series);
        }
    }
    Ok(rec)
}

/// Runs a sweep. Points are independent; records come back in grid order
/// whatever the worker count. Failed points carry their error message.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    spec.base.validate()?;
    let grid = spec.grid();
    let eval = |&v: &f64| -> PointRecord {
        match evaluate_point(spec, v) {
            Ok(r) => {
                debug!("{} = {v}: ok", spec.parameter);
                r
            }
            Err(e) => {
                let msg = format!("{} = {v}: {e}", spec.parameter);
                warn!("{msg}");
                PointRecord {
                    value: v,
                    error: Some(msg),
                    ..PointRecord::default()
                }
            }
        }
    };
    let records: Vec<PointRecord> = if spec.workers == 1 {
        grid.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", spec.workers)))?;
        pool.install(|| grid.par_iter().map(eval).collect())
    };
    let result = SweepResult {
        spec: spec.clone(),
        records,
        version: crate::VERSION,
    };
    let failed = result.failures();
    if failed as f64 > MAX_FAILURE_FRACTION * result.records.len() as f64 {
        let first = result
            .records
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_default();
        return Err(Error::SweepFailed {
            failed,
            total: result.records.len(),
            first,
        });
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackPoint {
    pub index: usize,
    pub value: f64,
    pub mode: usize,
    pub quasienergy: f64,
    /// Quasienergy continued across zone boundaries: `quasienergy + wrap ω`.
    pub unwrapped: f64,
    /// Net number of zone-boundary crossings since the track started.
    pub wrap: i64,
    /// Overlap with the previous point of the track (1 at the start).
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Track {
    pub id: usize,
    pub parity: f64,
    pub points: Vec<TrackPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackBreak {
    /// The link from `index - 1` to `index` was not made.
    pub index: usize,
    pub track: usize,
    pub best: f64,
    pub runner_up: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub track_a: usize,
    pub track_b: usize,
    pub index: usize,
    pub value: f64,
    pub size: f64,
    /// Both tracks carry the same parity, so the gap is a true anticrossing.
    pub same_symmetry: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrackSet {
    pub tracks: Vec<Track>,
    pub breaks: Vec<TrackBreak>,
    pub gaps: Vec<Gap>,
}

/// `max_k |Σ_l ⟨a_α,l| G |b_β,l-k⟩|` for `k ∈ {-1, 0, 1}`; `G = P_a† P_b`.
fn overlap_matrix(a: &FloquetSnapshot, b: &FloquetSnapshot) -> Vec<Vec<(f64, i64)>> {
    let g = a.basis_states.adjoint() * &b.basis_states;
    let transformed: Vec<Vec<CVector>> = b
        .modes
        .iter()
        .map(|m| m.sidebands.iter().map(|v| &g * v).collect())
        .collect();
    let b_side = |beta: usize, l: i64| -> Option<&CVector> {
        if l < b.l_lo {
            return None;
        }
        transformed[beta].get((l - b.l_lo) as usize)
    };
    (0..a.modes.len())
        .map(|alpha| {
            (0..b.modes.len())
                .map(|beta| {
                    let mut best = (0.0, 0);
                    for k in [0i64, -1, 1] {
                        let mut s = C64::new(0.0, 0.0);
                        for (idx, va) in a.modes[alpha].sidebands.iter().enumerate() {
                            let l = a.l_lo + idx as i64;
                            if let Some(vb) = b_side(beta, l - k) {
                                s += va.dotc(vb);
                            }
                        }
                        if s.norm() > best.0 {
                            best = (s.norm(), k);
                        }
                    }
                    best
                })
                .collect()
        })
        .collect()
}

/// Connects modes across adjacent points by maximal sideband overlap.
/// `snapshots[i]` is `None` where the point failed; tracks end there.
pub fn track_snapshots(values: &[f64], snapshots: &[Option<&FloquetSnapshot>]) -> Result<TrackSet> {
    if values.len() != snapshots.len() {
        return Err(Error::Dimension("one snapshot per grid value required".into()));
    }
    if snapshots.iter().filter(|s| s.is_some()).count() < 3 {
        return Err(Error::Config("tracking needs quasienergies at 3 or more points".into()));
    }
    let mut set = TrackSet::default();
    // track id currently attached to each mode of the previous point
    let mut open: Vec<Option<usize>> = Vec::new();
    let mut prev: Option<&FloquetSnapshot> = None;

    for (i, snap) in snapshots.iter().enumerate() {
        let Some(snap) = *snap else {
            open.clear();
            prev = None;
            continue;
        };
        let mut attached: Vec<Option<usize>> = vec![None; snap.modes.len()];
        if let Some(pa) = prev {
            let ov = overlap_matrix(pa, snap);
            let mut claims: Vec<Vec<(usize, f64, i64)>> = vec![Vec::new(); snap.modes.len()];
            for (alpha, row) in ov.iter().enumerate() {
                let Some(track) = open[alpha] else { continue };
                let mut order: Vec<usize> = (0..row.len()).collect();
                order.sort_by(|&x, &y| row[y].0.total_cmp(&row[x].0));
                let (best, k) = row[order[0]];
                let runner = order.get(1).map_or(0.0, |&j| row[j].0);
                let reason = if best < MIN_TRACK_OVERLAP {
                    Some(format!("best overlap {best:.3} below {MIN_TRACK_OVERLAP}"))
                } else if best - runner < AMBIGUITY_MARGIN {
                    Some(format!("ambiguous: {best:.3} vs {runner:.3}"))
                } else {
                    None
                };
                match reason {
                    Some(reason) => set.breaks.push(TrackBreak {
                        index: i,
                        track,
                        best,
                        runner_up: runner,
                        reason,
                    }),
                    None => claims[order[0]].push((track, best, k)),
                }
            }
            for (beta, c) in claims.into_iter().enumerate() {
                match c.as_slice() {
                    [] => {}
                    [(track, best, k)] => {
                        let t = &mut set.tracks[*track];
                        let last = t.points.last().expect("track has points");
                        let wrap = last.wrap + k;
                        let q = snap.modes[beta].quasienergy;
                        t.points.push(TrackPoint {
                            index: i,
                            value: values[i],
                            mode: beta,
                            quasienergy: q,
                            unwrapped: q + wrap as f64 * snap.omega_m,
                            wrap,
                            overlap: *best,
                        });
                        attached[beta] = Some(*track);
                    }
                    many => {
                        for (track, best, _) in many {
                            set.breaks.push(TrackBreak {
                                index: i,
                                track: *track,
                                best: *best,
                                runner_up: *best,
                                reason: format!("{} tracks claim mode {beta}", many.len()),
                            });
                        }
                    }
                }
            }
        }
        for (beta, slot) in attached.iter_mut().enumerate() {
            if slot.is_none() {
                let id = set.tracks.len();
                let m = &snap.modes[beta];
                set.tracks.push(Track {
                    id,
                    parity: m.parity,
                    points: vec![TrackPoint {
                        index: i,
                        value: values[i],
                        mode: beta,
                        quasienergy: m.quasienergy,
                        unwrapped: m.quasienergy,
                        wrap: 0,
                        overlap: 1.0,
                    }],
                });
                *slot = Some(id);
            }
        }
        open = attached;
        prev = Some(snap);
    }
    set.gaps = find_gaps(&set.tracks, values, snapshots);
    Ok(set)
}

/// Interior local minima of the separation between every pair of tracks.
fn find_gaps(tracks: &[Track], values: &[f64], snapshots: &[Option<&FloquetSnapshot>]) -> Vec<Gap> {
    let mut gaps = Vec::new();
    for a in 0..tracks.len() {
        for b in a + 1..tracks.len() {
            let (ta, tb) = (&tracks[a], &tracks[b]);
            let lo = ta.points[0].index.max(tb.points[0].index);
            let hi = ta.points.last().unwrap().index.min(tb.points.last().unwrap().index);
            if hi < lo + 2 {
                continue;
            }
            let sep: Vec<f64> = (lo..=hi)
                .map(|i| {
                    let qa = ta.points[i - ta.points[0].index].quasienergy;
                    let qb = tb.points[i - tb.points[0].index].quasienergy;
                    let omega = snapshots[i].map_or(f64::INFINITY, |s| s.omega_m);
                    circular_distance(qa, qb, omega)
                })
                .collect();
            for k in 1..sep.len() - 1 {
                if sep[k] < sep[k - 1] && sep[k] <= sep[k + 1] {
                    let index = lo + k;
                    gaps.push(Gap {
                        track_a: a,
                        track_b: b,
                        index,
                        value: values[index],
                        size: sep[k],
                        same_symmetry: ta.parity.signum() == tb.parity.signum(),
                    });
                }
            }
        }
    }
    gaps
}

pub fn quasienergy_tracks(result: &SweepResult) -> Result<TrackSet> {
    let values = result.grid();
    let snaps: Vec<Option<&FloquetSnapshot>> = result.records.iter().map(|r| r.snapshot.as_ref()).collect();
    track_snapshots(&values, &snaps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resonance {
    pub channel: LadderKind,
    pub index: usize,
    pub value: f64,
    pub height: f64,
    pub n: i64,
    pub from: usize,
    pub to: usize,
    /// `|E_to - E_from - n ω_M|`.
    pub residual: f64,
}

/// Best multiphoton assignment `0 → k` at one point: the `n ≥ 1` and
/// parity-allowed `k` minimising `|E_k - E_0 - n ω|`.
pub fn assign_resonance(energies: &[f64], parities: &[f64], omega: f64) -> Option<(i64, usize, f64)> {
    let e0 = *energies.first()?;
    let p0 = parities.first().copied().unwrap_or(0.0);
    let mut best: Option<(i64, usize, f64)> = None;
    for (k, &ek) in energies.iter().enumerate().skip(1) {
        let pk = parities.get(k).copied().unwrap_or(0.0);
        if p0 != 0.0 && pk != 0.0 && p0.signum() != pk.signum() {
            continue;
        }
        let n = ((ek - e0) / omega).round().max(1.0) as i64;
        let r = (ek - e0 - n as f64 * omega).abs();
        if best.is_none_or(|(_, _, b)| r < b) {
            best = Some((n, k, r));
        }
    }
    best
}

/// Strict interior local maxima above [`PEAK_FLOOR`]; missing values split the series.
pub fn find_peaks(values: &[Option<f64>]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| match (values[i - 1], values[i], values[i + 1]) {
            (Some(a), Some(v), Some(b)) => v > PEAK_FLOOR && v > a && v >= b,
            _ => false,
        })
        .collect()
}

/// Finds excitation peaks in both channels and assigns each to the
/// multiphoton transition out of the initial state `|j=0⟩` that is closest
/// to resonance, using the static energies at the peak.
pub fn locate_resonances(result: &SweepResult) -> Result<Vec<Resonance>> {
    if !(result.spec.outputs.mean_excitations && result.spec.outputs.static_energies) {
        return Err(Error::Config(
            "resonance location needs mean excitations and static energies".into(),
        ));
    }
    let mut out = Vec::new();
    for channel in [LadderKind::Cav, LadderKind::Tls] {
        let series: Vec<Option<f64>> = result
            .records
            .iter()
            .map(|r| {
                r.mean_excitations.map(|(c, t)| match channel {
                    LadderKind::Cav => c,
                    LadderKind::Tls => t,
                })
            })
            .collect();
        for i in find_peaks(&series) {
            let rec = &result.records[i];
            let (Some(e), Some(par)) = (&rec.static_energies, &rec.static_parities) else {
                continue;
            };
            if let Some((n, to, residual)) = assign_resonance(e, par, result.omega_m_at(i)) {
                out.push(Resonance {
                    channel,
                    index: i,
                    value: rec.value,
                    height: series[i].unwrap_or(0.0),
                    n,
                    from: 0,
                    to,
                    residual,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_base() -> ModelParams {
        ModelParams {
            n_fock: 12,
            n_j: 6,
            m_max: 16,
            l_max: 16,
            ..ModelParams::default()
        }
    }

    fn spec(parameter: SweepParameter, lo: f64, hi: f64, points: usize, outputs: Outputs) -> SweepSpec {
        SweepSpec {
            parameter,
            lo,
            hi,
            points,
            base: small_base(),
            outputs,
            workers: 1,
        }
    }

    #[test]
    fn spec_validation() {
        let o = Outputs::default();
        assert!(spec(SweepParameter::EtaM, 1.0, 0.0, 5, o).validate().is_err());
        assert!(spec(SweepParameter::EtaM, 0.0, 1.0, 1, o).validate().is_err());
        assert!(spec(SweepParameter::EtaM, 0.0, 1.0, 2, o).validate().is_ok());
        assert_eq!("etaM".parse::<SweepParameter>().unwrap(), SweepParameter::EtaM);
        assert!("g".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn presets_match_panels() {
        let base = ModelParams::default();
        let s = preset(Figure::Fig2a, &base).unwrap();
        assert_eq!((s.parameter, s.lo, s.hi, s.base.eta_m), (SweepParameter::Eta0, 0.0, 1.0, 0.5));
        let s = preset(Figure::Fig3c, &base).unwrap();
        assert_eq!((s.parameter, s.hi, s.base.gamma, s.points), (SweepParameter::EtaM, 1.2, 0.1, 201));
        assert!(preset(Figure::Fig3a, &base).is_none());
        assert_eq!(Figure::Fig3a.timeseries_eta_m(), Some(0.2));
        assert_eq!("2c".parse::<Figure>().unwrap(), Figure::Fig2c);
    }

    #[test]
    fn static_sweep_split_vs_unsplit() {
        let o = Outputs {
            static_energies: true,
            qrm_energies: true,
            ..Outputs::default()
        };
        let mut s = spec(SweepParameter::Eta0, 0.0, 1.0, 3, o);
        s.base.eta_m = 0.5;
        let r = run_sweep(&s).unwrap();
        let first = &r.records[0];
        let e = first.static_energies.as_ref().unwrap();
        let q = first.qrm_energies.as_ref().unwrap();
        assert!((q[2] - q[1]).abs() < 1e-12);
        assert!((e[2] - e[1]).abs() > 1e-3);
    }

    #[test]
    fn serial_and_parallel_records_identical() {
        let o = Outputs {
            quasienergies: true,
            mean_excitations: true,
            ..Outputs::default()
        };
        let s1 = spec(SweepParameter::EtaM, 0.1, 0.6, 4, o);
        let s4 = SweepSpec { workers: 4, ..s1.clone() };
        let (a, b) = (run_sweep(&s1).unwrap(), run_sweep(&s4).unwrap());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.value, y.value);
            assert_eq!(x.quasienergies, y.quasienergies);
            assert_eq!(x.mean_excitations, y.mean_excitations);
        }
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let o = Outputs {
            quasienergies: true,
            ..Outputs::default()
        };
        let mut s = spec(SweepParameter::EtaM, 0.0, 1.5, 4, o);
        s.base.l_max = 2;
        match run_sweep(&s) {
            Err(Error::SweepFailed { failed, total, first }) => {
                assert!(failed >= 1 && total == 4);
                assert!(first.contains("eta_m ="));
            }
            other => panic!("expected sweep failure, got {other:?}"),
        }
    }

    #[test]
    fn undriven_tracks_are_flat() {
        let o = Outputs {
            quasienergies: true,
            ..Outputs::default()
        };
        let mut s = spec(SweepParameter::OmegaM, 0.5, 0.5 + 1e-9, 5, o);
        s.base.eta_m = 0.0;
        s.base.eta0 = 0.2;
        let r = run_sweep(&s).unwrap();
        let t = quasienergy_tracks(&r).unwrap();
        assert!(t.breaks.is_empty());
        assert_eq!(t.tracks.len(), 6);
        for tr in &t.tracks {
            assert_eq!(tr.points.len(), 5);
            let q0 = tr.points[0].quasienergy;
            assert!(tr.points.iter().all(|p| (p.quasienergy - q0).abs() < 1e-8));
        }
    }

    fn toy_snapshot(lambda: f64, g: f64) -> FloquetSnapshot {
        let e = linalg::eigh(&CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(lambda, 0.0), C64::new(g, 0.0), C64::new(g, 0.0), C64::new(-lambda, 0.0)],
        ))
        .unwrap();
        FloquetSnapshot {
            omega_m: 100.0,
            basis_states: CMatrix::identity(2, 2),
            l_lo: 0,
            modes: (0..2)
                .map(|k| ModeSnapshot {
                    quasienergy: e.values[k],
                    parity: 1.0,
                    sidebands: vec![e.vectors.column(k).into_owned()],
                })
                .collect(),
        }
    }

    #[test]
    fn two_level_gap_oracle() {
        let g = 0.05;
        let values: Vec<f64> = (0..81).map(|k| -1.0 + k as f64 * 0.025).collect();
        let snaps: Vec<FloquetSnapshot> = values.iter().map(|&l| toy_snapshot(l, g)).collect();
        let refs: Vec<Option<&FloquetSnapshot>> = snaps.iter().map(Some).collect();
        let t = track_snapshots(&values, &refs).unwrap();
        assert_eq!(t.tracks.len(), 2);
        assert!(t.breaks.is_empty());
        assert_eq!(t.gaps.len(), 1);
        let gap = &t.gaps[0];
        assert!((gap.size - 2.0 * g).abs() <= 0.05 * 2.0 * g, "{}", gap.size);
        assert!(gap.value.abs() < 0.03);
        assert!(gap.same_symmetry);
    }

    #[test]
    fn tracking_needs_three_points() {
        let snaps = [toy_snapshot(0.0, 0.1), toy_snapshot(0.1, 0.1)];
        let refs: Vec<Option<&FloquetSnapshot>> = snaps.iter().map(Some).collect();
        assert!(track_snapshots(&[0.0, 0.1], &refs).is_err());
    }

    #[test]
    fn ambiguous_link_breaks_track() {
        // exactly degenerate levels at the middle point: no preferred partner
        let a = toy_snapshot(-0.5, 0.0);
        let mut mid = toy_snapshot(0.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        mid.modes[0].sidebands = vec![CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])];
        mid.modes[1].sidebands = vec![CVector::from_vec(vec![C64::new(h, 0.0), C64::new(-h, 0.0)])];
        let c = toy_snapshot(0.5, 0.0);
        let t = track_snapshots(&[-0.5, 0.0, 0.5], &[Some(&a), Some(&mid), Some(&c)]).unwrap();
        assert!(!t.breaks.is_empty());
        assert!(t.breaks[0].reason.contains("ambiguous"));
    }

    #[test]
    fn synthetic_resonance() {
        // E_3 - E_0 = 3 ω exactly at the peak
        let omega = 0.5;
        let energies = vec![-0.7, 0.2, 0.61, 0.8, 1.1];
        let parities = vec![1.0, -1.0, -1.0, 1.0, 1.0];
        let mut s = spec(SweepParameter::EtaM, 0.0, 1.0, 3, Outputs {
            static_energies: true,
            mean_excitations: true,
            ..Outputs::default()
        });
        s.base.omega_m = omega;
        let rec = |v: f64, n: f64| PointRecord {
            value: v,
            static_energies: Some(energies.clone()),
            static_parities: Some(parities.clone()),
            mean_excitations: Some((n, n)),
            ..PointRecord::default()
        };
        let r = SweepResult {
            spec: s,
            records: vec![rec(0.0, 0.01), rec(0.5, 1.0), rec(1.0, 0.02)],
            version: crate::VERSION,
        };
        let found = locate_resonances(&r).unwrap();
        assert_eq!(found.len(), 2);
        for f in &found {
            assert_eq!((f.n, f.from, f.to, f.index), (3, 0, 3, 1));
            assert!(f.residual < 1e-12);
        }
    }

    #[test]
    fn undriven_sweep_has_no_resonances() {
        let o = Outputs {
            static_energies: true,
            mean_excitations: true,
            ..Outputs::default()
        };
        let mut s = spec(SweepParameter::Eta0, 0.0, 0.6, 5, o);
        s.base.eta_m = 0.0;
        let r = run_sweep(&s).unwrap();
        assert!(locate_resonances(&r).unwrap().is_empty());
    }

    #[test]
    fn peaks_need_neighbours() {
        let v = [Some(0.0), Some(1.0), Some(0.5), None, Some(2.0), Some(1.0)];
        assert_eq!(find_peaks(&v), vec![1]);
        assert!(find_peaks(&[Some(0.0), Some(1e-9), Some(0.0)]).is_empty());
    }
}
