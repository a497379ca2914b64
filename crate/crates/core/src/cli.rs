//! Command-line front end. `main` forwards `std::env::args` to [`run`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::config::{ConfigLayer, RunConfig, OUT_ENV};
use crate::error::{Error, Result};
use crate::floquet;
use crate::hamiltonian::{ModelParams, RabiModel, Waveform};
use crate::observables;
use crate::output::{self, Cell, Table};
use crate::selfcheck;
use crate::sweeps::{self, Figure, Outputs, SweepParameter, SweepResult, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_SELFCHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "floquet-rabi", version, about = "Floquet analysis of the modulated-coupling quantum Rabi model")]
#[command(args_conflicts_with_subcommands = false, allow_negative_numbers = true)]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON config file; flags take precedence over its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overridden by FLOQUET_RABI_OUT).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub eta0: Option<f64>,
    #[arg(long, global = true)]
    pub eta_m: Option<f64>,
    #[arg(long, global = true)]
    pub omega_m: Option<f64>,
    #[arg(long, global = true)]
    pub omega_a: Option<f64>,
    #[arg(long, global = true)]
    pub omega_c: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub n_fock: Option<usize>,
    #[arg(long, global = true)]
    pub n_j: Option<usize>,
    #[arg(long, global = true)]
    pub m_max: Option<usize>,
    #[arg(long, global = true)]
    pub l_max: Option<usize>,
    #[arg(long, global = true)]
    pub waveform: Option<Waveform>,
    /// Grid points for sweeps and time series.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Accepted for config compatibility; no computation is random.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            omega_c: self.omega_c,
            omega_a: self.omega_a,
            eta0: self.eta0,
            eta_m: self.eta_m,
            omega_m: self.omega_m,
            gamma: self.gamma,
            n_fock: self.n_fock,
            n_j: self.n_j,
            m_max: self.m_max,
            l_max: self.l_max,
            waveform: self.waveform,
            out: self.out.clone(),
            points: self.points,
            workers: self.workers,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce one figure panel (2a, 2b, 2c, 3a, 3b, 3c, 3d).
    Fig { figure: Figure },
    /// Custom one-parameter sweep.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        param: SweepParameter,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Comma list of static, qrm, quasienergies, mean, timeseries.
        #[arg(long, value_delimiter = ',', default_value = "static,mean")]
        outputs: Vec<String>,
    },
    /// Excitation numbers of the driven ground state over eight periods.
    Timeseries,
    /// Quasienergies of one parameter point.
    Quasienergies,
    /// Run the invariant suite and report each residual.
    Selfcheck,
}

fn parse_outputs(names: &[String]) -> Result<Outputs> {
    let mut o = Outputs::default();
    for n in names {
        match n.trim() {
            "static" => o.static_energies = true,
            "qrm" => o.qrm_energies = true,
            "quasienergies" => o.quasienergies = true,
            "mean" => o.mean_excitations = true,
            "timeseries" => o.timeseries = true,
            other => {
                return Err(Error::Config(format!(
                    "unknown output {other:?} (expected static, qrm, quasienergies, mean or timeseries)"
                )))
            }
        }
    }
    Ok(o)
}

fn command_line(args: &[OsString]) -> String {
    args.iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve(&cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cli.command, &cfg, &command_line(&args)) {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

fn resolve(flags: &Flags) -> Result<RunConfig> {
    let file = flags.config.as_deref().map(ConfigLayer::from_file).transpose()?;
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    RunConfig::resolve(file.as_ref(), &flags.layer(), env_out)
}

fn execute(cmd: &Command, cfg: &RunConfig, command: &str) -> Result<i32> {
    match cmd {
        Command::Fig { figure } => fig(*figure, cfg, command),
        Command::Sweep {
            param,
            lo,
            hi,
            outputs,
        } => {
            let spec = SweepSpec {
                parameter: *param,
                lo: *lo,
                hi: *hi,
                points: cfg.points.unwrap_or(sweeps::PRESET_POINTS),
                base: cfg.params.clone(),
                outputs: parse_outputs(outputs)?,
                workers: cfg.workers,
            };
            let mut cfg = cfg.clone();
            cfg.params = spec.base.clone();
            write_sweep(&format!("sweep_{}", param.name()), &spec, &cfg, command)?;
            Ok(EXIT_OK)
        }
        Command::Timeseries => {
            write_series("timeseries.csv", cfg, command)?;
            Ok(EXIT_OK)
        }
        Command::Quasienergies => {
            quasienergies(cfg, command)?;
            Ok(EXIT_OK)
        }
        Command::Selfcheck => selfcheck_command(cfg, command),
    }
}

fn fig(figure: Figure, cfg: &RunConfig, command: &str) -> Result<i32> {
    let stem = format!("fig{}", figure.name());
    if let Some(eta_m) = figure.timeseries_eta_m() {
        let mut cfg = cfg.clone();
        cfg.params = ModelParams {
            eta0: 0.0,
            eta_m,
            ..cfg.params
        };
        write_series(&format!("{stem}.csv"), &cfg, command)?;
        return Ok(EXIT_OK);
    }
    let mut spec = sweeps::preset(figure, &cfg.params).expect("sweep panel");
    if let Some(n) = cfg.points {
        spec.points = n;
    }
    spec.workers = cfg.workers;
    let mut cfg = cfg.clone();
    cfg.params = spec.base.clone();
    write_sweep(&stem, &spec, &cfg, command)?;
    Ok(EXIT_OK)
}

fn write_sweep(stem: &str, spec: &SweepSpec, cfg: &RunConfig, command: &str) -> Result<()> {
    let header = sweep_header(cfg, command, spec);
    info!("{stem}: {} points of {}", spec.points, spec.parameter);
    let result = sweeps::run_sweep(spec)?;
    let o = spec.outputs;
    let dir = &cfg.out;
    let put = |name: String, t: &Table| -> Result<()> {
        let path = output::write_table(dir, &name, &header, t)?;
        info!("wrote {}", path.display());
        Ok(())
    };
    if o.mean_excitations {
        put(format!("{stem}.csv"), &output::mean_excitation_table(&result))?;
        put(format!("{stem}_resonances.csv"), &output::resonances_table(&result, &sweeps::locate_resonances(&result)?))?;
    }
    if o.static_energies || o.qrm_energies {
        let name = if o.mean_excitations {
            format!("{stem}_energies.csv")
        } else {
            format!("{stem}.csv")
        };
        put(name, &output::energies_table(&result, o.static_energies, o.qrm_energies))?;
    }
    if o.quasienergies {
        let tracks = sweeps::quasienergy_tracks(&result)?;
        put(format!("{stem}_quasienergies.csv"), &output::quasienergy_table(&result))?;
        put(format!("{stem}_tracks.csv"), &output::tracks_table(&result, &tracks))?;
        put(format!("{stem}_gaps.csv"), &output::gaps_table(&result, &tracks))?;
    }
    if o.timeseries {
        put(format!("{stem}_timeseries.csv"), &output::sweep_series_table(&result))?;
    }
    report_failures(&result);
    Ok(())
}

fn sweep_header(cfg: &RunConfig, command: &str, spec: &SweepSpec) -> Vec<String> {
    let mut h = cfg.header(command);
    h.push(format!(
        "sweep: {} over [{}, {}] with {} points",
        spec.parameter, spec.lo, spec.hi, spec.points
    ));
    h
}

fn report_failures(result: &SweepResult) {
    for r in &result.records {
        if let Some(e) = &r.error {
            eprintln!("warning: point failed: {e}");
        }
    }
}

fn grid_for(cfg: &RunConfig) -> Vec<f64> {
    match cfg.points {
        Some(n) => observables::uniform_grid(
            0.0,
            observables::DEFAULT_GRID_PERIODS * cfg.params.period(),
            n,
        ),
        None => observables::default_time_grid(&cfg.params),
    }
}

fn write_series(name: &str, cfg: &RunConfig, command: &str) -> Result<()> {
    let model = RabiModel::new(cfg.params.clone())?;
    let analysis = floquet::analyze(&model)?;
    let series = observables::ground_state_series(&analysis, &cfg.params, &grid_for(cfg))?;
    for w in &series.warnings {
        eprintln!("warning: {w}");
    }
    output::write_table(&cfg.out, name, &cfg.header(command), &output::series_table(&series))?;
    Ok(())
}

fn quasienergies(cfg: &RunConfig, command: &str) -> Result<()> {
    let model = RabiModel::new(cfg.params.clone())?;
    let a = floquet::analyze(&model)?;
    let mut t = Table::new(["alpha", "quasienergy", "parity", "edge_weight"]);
    for (k, m) in a.solution.modes().iter().enumerate() {
        t.rows.push(vec![
            k.into(),
            m.quasienergy.into(),
            Cell::Int(m.parity.signum() as i64),
            m.edge_weight.into(),
        ]);
    }
    output::write_table(&cfg.out, "quasienergies.csv", &cfg.header(command), &t)?;
    Ok(())
}

fn selfcheck_command(cfg: &RunConfig, command: &str) -> Result<i32> {
    let checks = selfcheck::run_checks(&cfg.params)?;
    let mut t = Table::new(["check", "measured", "tolerance", "passed"]);
    for c in &checks {
        println!("{c}");
        t.rows.push(vec![
            c.name.into(),
            c.measured.into(),
            c.tolerance.into(),
            Cell::Int(c.passed as i64),
        ]);
    }
    output::write_table(&cfg.out, "selfcheck.csv", &cfg.header(command), &t)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_SELFCHECK })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["floquet-rabi", "fig", "2b", "--eta-m", "0.2", "--n-j", "8"]).unwrap();
        assert_eq!(cli.flags.eta_m, Some(0.2));
        assert_eq!(cli.flags.n_j, Some(8));
        assert!(matches!(cli.command, Command::Fig { figure: Figure::Fig2b }));
    }

    #[test]
    fn negative_values_are_numbers() {
        let cli = Cli::try_parse_from(["floquet-rabi", "sweep", "--param", "eta0", "--lo", "-0.5", "--hi", "0.5"]).unwrap();
        let Command::Sweep { lo, outputs, .. } = cli.command else {
            panic!("not a sweep")
        };
        assert_eq!(lo, -0.5);
        assert_eq!(outputs, ["static", "mean"]);
    }

    #[test]
    fn output_names() {
        let o = parse_outputs(&["qrm".into(), "quasienergies".into()]).unwrap();
        assert!(o.qrm_energies && o.quasienergies && !o.static_energies);
        assert!(parse_outputs(&["plots".into()]).is_err());
    }

    #[test]
    fn exit_codes_for_bad_input() {
        assert_eq!(run(["floquet-rabi", "fig", "9z"]), EXIT_CONFIG);
        assert_eq!(run(["floquet-rabi", "--omega-m", "0", "selfcheck"]), EXIT_CONFIG);
        assert_eq!(run(["floquet-rabi", "--help"]), EXIT_OK);
    }
}
