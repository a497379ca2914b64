//! CSV emission. Every file starts with `#` lines echoing the tool version and
//! the resolved configuration; numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::observables::ObservableSeries;
use crate::sweeps::{Resonance, SweepResult, TrackSet};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// `{:.16e}`, i.e. 17 significant digits; non-finite values as `nan`/`inf`/`-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#` lines written after the common header.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    /// The column-name line and data rows, without `#` lines.
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn render(&self, header: &[String]) -> String {
        let mut s = String::new();
        for line in header.iter().chain(&self.notes) {
            for part in line.lines() {
                let _ = writeln!(s, "# {part}");
            }
        }
        s.push_str(&self.body());
        s
    }
}

/// Writes `table` to `dir/name`, creating `dir` if needed.
pub fn write_table(dir: &Path, name: &str, header: &[String], table: &Table) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, table.render(header))?;
    Ok(path)
}

/// Lines after the `#` prefix are stripped; what remains is the comparable body.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

fn failure_notes(result: &SweepResult) -> Vec<String> {
    result
        .records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("failed: {e}")))
        .collect()
}

fn padded(values: Option<&Vec<f64>>, n: usize) -> impl Iterator<Item = Cell> + '_ {
    (0..n).map(move |k| Cell::Float(values.and_then(|v| v.get(k).copied()).unwrap_or(f64::NAN)))
}

/// Static and/or Rabi energies, one row per grid value.
pub fn energies_table(result: &SweepResult, static_part: bool, qrm: bool) -> Table {
    let n = result.spec.base.n_j;
    let mut cols = vec![result.spec.parameter.name().to_string()];
    if static_part {
        cols.extend((0..n).map(|k| format!("E_{k}")));
    }
    if qrm {
        cols.extend((0..n).map(|k| format!("Eqrm_{k}")));
    }
    let mut t = Table::new(cols);
    t.notes = failure_notes(result);
    for r in &result.records {
        let mut row = vec![Cell::Float(r.value)];
        if static_part {
            row.extend(padded(r.static_energies.as_ref(), n));
        }
        if qrm {
            row.extend(padded(r.qrm_energies.as_ref(), n));
        }
        t.rows.push(row);
    }
    t
}

/// Folded quasienergies in ascending order, one row per grid value.
pub fn quasienergy_table(result: &SweepResult) -> Table {
    let n = result.spec.base.n_j;
    let mut cols = vec![result.spec.parameter.name().to_string()];
    cols.extend((0..n).map(|k| format!("q_{k}")));
    let mut t = Table::new(cols);
    t.notes = failure_notes(result);
    for r in &result.records {
        let mut row = vec![Cell::Float(r.value)];
        row.extend(padded(r.quasienergies.as_ref(), n));
        t.rows.push(row);
    }
    t
}

pub fn mean_excitation_table(result: &SweepResult) -> Table {
    let mut t = Table::new([result.spec.parameter.name(), "nbar_cav", "nbar_tls"]);
    t.notes = failure_notes(result);
    for r in &result.records {
        let (c, s) = r.mean_excitations.unwrap_or((f64::NAN, f64::NAN));
        t.rows.push(vec![r.value.into(), c.into(), s.into()]);
    }
    t
}

/// Long format: one row per (grid value, time).
pub fn sweep_series_table(result: &SweepResult) -> Table {
    let mut t = Table::new([result.spec.parameter.name(), "t_over_T", "n_cav", "n_tls"]);
    t.notes = failure_notes(result);
    for r in &result.records {
        if let Some(s) = &r.series {
            for k in 0..s.times.len() {
                t.rows.push(vec![
                    r.value.into(),
                    (s.times[k] / s.period).into(),
                    s.n_cav[k].into(),
                    s.n_tls[k].into(),
                ]);
            }
        }
    }
    t
}

pub fn series_table(series: &ObservableSeries) -> Table {
    let mut t = Table::new(["t_over_T", "n_cav", "n_tls"]);
    t.notes.push(format!(
        "nbar_cav = {}, nbar_tls = {}, t_ss_over_T = {}",
        format_float(series.mean_cav),
        format_float(series.mean_tls),
        format_float(series.t_ss / series.period)
    ));
    t.notes.extend(series.warnings.iter().map(|w| format!("warning: {w}")));
    for k in 0..series.times.len() {
        t.rows.push(vec![
            (series.times[k] / series.period).into(),
            series.n_cav[k].into(),
            series.n_tls[k].into(),
        ]);
    }
    t
}

pub fn tracks_table(result: &SweepResult, tracks: &TrackSet) -> Table {
    let mut t = Table::new([
        "track",
        result.spec.parameter.name(),
        "mode",
        "quasienergy",
        "unwrapped",
        "wrap",
        "overlap",
        "parity",
    ]);
    for tr in &tracks.tracks {
        for p in &tr.points {
            t.rows.push(vec![
                tr.id.into(),
                p.value.into(),
                p.mode.into(),
                p.quasienergy.into(),
                p.unwrapped.into(),
                p.wrap.into(),
                p.overlap.into(),
                (tr.parity.signum() as i64).into(),
            ]);
        }
    }
    for b in &tracks.breaks {
        t.notes.push(format!(
            "break: track {} before {} = {}: {}",
            b.track,
            result.spec.parameter.name(),
            format_float(result.records[b.index].value),
            b.reason
        ));
    }
    t
}

pub fn gaps_table(result: &SweepResult, tracks: &TrackSet) -> Table {
    let mut t = Table::new(["track_a", "track_b", result.spec.parameter.name(), "gap", "same_symmetry"]);
    for g in &tracks.gaps {
        t.rows.push(vec![
            g.track_a.into(),
            g.track_b.into(),
            g.value.into(),
            g.size.into(),
            (g.same_symmetry as i64).into(),
        ]);
    }
    t
}

pub fn resonances_table(result: &SweepResult, found: &[Resonance]) -> Table {
    let mut t = Table::new([
        "channel",
        result.spec.parameter.name(),
        "height",
        "n",
        "from",
        "to",
        "residual",
    ]);
    for r in found {
        t.rows.push(vec![
            Cell::Text(r.channel.to_string()),
            r.value.into(),
            r.height.into(),
            r.n.into(),
            r.from.into(),
            r.to.into(),
            r.residual.into(),
        ]);
    }
    t
}
