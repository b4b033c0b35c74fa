//! `coheng`: batch front-end for the coherence engine simulator.
//!
//! Every subcommand produces one table (CSV or JSON) written atomically to
//! `--out` or to standard output. Exit codes: 0 success, 1 verification
//! failure or runtime error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use coherence_engine::charging::{charged_qubit_state, BathSpec, SeriesConvention, DEFAULT_ACC};
use coherence_engine::coherence::coherence_report;
use coherence_engine::engine::{CyclePerformance, DEFAULT_MAX_QUBITS};
use coherence_engine::optimize::{
    grid_sweep, optimal_per_n, optimum_for_size, AxisRange, Objective, PerNOptimum, SweepGrid,
};
use coherence_engine::Error;

pub mod figure;
pub mod table;
pub mod verify;

use figure::{FigureName, FigureOptions};
use table::{emit, json_bytes, Cell, Format, Table};
use verify::Suite;

pub const MAX_QUBITS_ENV: &str = "ENGINE_MAX_QUBITS";

/// Column order shared by every engine-metric table.
pub const ENGINE_COLUMNS: &[&str] = &[
    "N",
    "beta_omega0",
    "gt",
    "c_ext_s",
    "s_bath",
    "c_int_total",
    "w_coh",
    "q_in",
    "eta",
];

pub fn performance_cells(p: &CyclePerformance) -> Vec<Cell> {
    vec![
        p.n_qubits.into(),
        p.beta_omega0.into(),
        p.gt.into(),
        p.c_ext_per_qubit.into(),
        p.s_bath.into(),
        p.c_int_total.into(),
        p.w_coh.into(),
        p.q_in.into(),
        p.eta.into(),
    ]
}

#[derive(Debug, Parser)]
#[command(
    name = "coheng",
    version,
    about = "Coherence-driven quantum heat engine simulator"
)]
pub struct Cli {
    /// Bath truncation accuracy.
    #[arg(long, global = true, default_value_t = DEFAULT_ACC)]
    pub acc: f64,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table encoding; `verify` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Whether the coherence series carries the `e^{-βω₀/2}` factor.
    #[arg(long, global = true, value_enum, default_value_t = Toggle::On)]
    pub prefactor: Toggle,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn convention(self) -> SeriesConvention {
        match self {
            Toggle::On => SeriesConvention::WithPrefactor,
            Toggle::Off => SeriesConvention::Literal,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Inverse-temperature axis as `min:max:steps`.
    #[arg(long, default_value = "0.01:3:60")]
    pub grid_beta: AxisRange,
    /// Coupling-time axis as `min:max:steps`.
    #[arg(long, default_value = "0:30:60")]
    pub grid_gt: AxisRange,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Charge one qubit and report its coherence.
    Charge {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gt: f64,
    },
    /// Evaluate the engine on every grid node.
    Sweep {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// `ext` or `eta`.
        #[arg(long, default_value = "eta")]
        objective: Objective,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Grid search plus simplex refinement, for one N or for 1..=n-max.
    Optimize {
        #[arg(long, conflicts_with = "n_max")]
        n: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value = "eta")]
        objective: Objective,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run residual checks; exits 1 if any fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Emit a figure dataset and its `<stem>.agreement.json` report.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        /// Restrict N-dependent figures to this size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::TooManyQubits { .. }
            | Error::DimensionOverflow { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Verification) => 1,
    }
}

fn max_qubits() -> Result<usize, Failure> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "{MAX_QUBITS_ENV} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(DEFAULT_MAX_QUBITS),
    }
}

fn sweep_grid(
    cli: &Cli,
    grid: &GridArgs,
    objective: Objective,
    n: usize,
) -> Result<SweepGrid, Failure> {
    Ok(SweepGrid::new(grid.grid_beta, grid.grid_gt, objective, n)?
        .with_acc(cli.acc)
        .with_max_qubits(max_qubits()?)
        .with_convention(cli.prefactor.convention()))
}

fn write_table(cli: &Cli, table: &Table) -> Result<(), Failure> {
    let bytes = table.encode(cli.format.unwrap_or(Format::Csv));
    Ok(emit(cli.out.as_deref(), &bytes)?)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Charge { beta, gt } => write_table(cli, &charge_table(cli, *beta, *gt)?),
        Command::Sweep { n, objective, grid } => {
            let grid = sweep_grid(cli, grid, *objective, *n)?;
            let mut table = Table::new(ENGINE_COLUMNS);
            for row in grid_sweep(&grid)? {
                table.push(performance_cells(&row.performance));
            }
            write_table(cli, &table)
        }
        Command::Optimize {
            n,
            n_max,
            objective,
            grid,
        } => {
            let base = sweep_grid(cli, grid, *objective, n.unwrap_or(4))?;
            let optima = match n_max {
                Some(n_max) => optimal_per_n(&base, *n_max)?,
                None => vec![optimum_for_size(&base)?],
            };
            write_table(cli, &optimum_table(&optima))
        }
        Command::Verify { suite } => {
            let report = verify::run_suite(*suite, cli.seed, cli.acc)?;
            let bytes = match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&report),
                Format::Csv => report.table().to_csv(),
            };
            emit(cli.out.as_deref(), &bytes)?;
            if report.pass {
                Ok(())
            } else {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "FAIL {}: residual {:e} vs tolerance {:e}",
                        c.name, c.residual, c.tolerance
                    );
                }
                Err(Failure::Verification)
            }
        }
        Command::Figure {
            name,
            n,
            n_max,
            grid,
        } => {
            let opts = FigureOptions {
                acc: cli.acc,
                convention: cli.prefactor.convention(),
                beta_range: grid.grid_beta,
                gt_range: grid.grid_gt,
                n: *n,
                n_max: *n_max,
                max_qubits: max_qubits()?,
            };
            let out = figure::render(*name, &opts)?;
            write_table(cli, &out.table)?;
            let sidecar = json_bytes(&out.agreement);
            match &cli.out {
                Some(path) => emit(Some(&agreement_path(path)), &sidecar)?,
                None => std::io::stderr().write_all(&sidecar)?,
            }
            if out.consistent {
                Ok(())
            } else {
                eprintln!(
                    "error: {} failed its internal consistency checks",
                    name.stem()
                );
                Err(Failure::Verification)
            }
        }
    }
}

/// `dir/efficiency-by-n.csv` → `dir/efficiency-by-n.agreement.json`.
pub fn agreement_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "figure".to_owned());
    out.with_file_name(format!("{stem}.agreement.json"))
}

fn charge_table(cli: &Cli, beta: f64, gt: f64) -> Result<Table, Failure> {
    let spec = BathSpec::new(beta, cli.acc)?;
    let charge = charged_qubit_state(&spec, gt, cli.prefactor.convention())?;
    let report = coherence_report(&charge.rho_s)?;
    let mut table = Table::new(&[
        "beta_omega0",
        "gt",
        "bath_levels",
        "delta_re",
        "delta_im",
        "delta_abs",
        "c_ext_s",
        "c_tot_s",
        "s_bath",
        "truncation_weight",
        "route_discrepancy",
    ]);
    table.push(vec![
        beta.into(),
        gt.into(),
        spec.levels().into(),
        charge.delta.re.into(),
        charge.delta.im.into(),
        charge.delta.norm().into(),
        report.c_ext.into(),
        report.c_tot.into(),
        charge.bath_entropy().into(),
        charge.truncation_weight.into(),
        charge.route_discrepancy.into(),
    ]);
    Ok(table)
}

fn optimum_table(optima: &[PerNOptimum]) -> Table {
    let mut columns = ENGINE_COLUMNS.to_vec();
    columns.extend(["objective_value", "c_int_per_qubit", "refined"]);
    let mut table = Table::new(&columns);
    for o in optima {
        let mut row = performance_cells(&o.performance);
        row.push(o.best_value.into());
        row.push((o.performance.c_int_total / o.n_qubits as f64).into());
        row.push(o.refined.into());
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_sits_next_to_dataset() {
        assert_eq!(
            agreement_path(Path::new("out/efficiency-by-n.csv")),
            PathBuf::from("out/efficiency-by-n.agreement.json")
        );
        assert_eq!(
            agreement_path(Path::new("coherence-map")),
            PathBuf::from("coherence-map.agreement.json")
        );
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["coheng", "charge", "--beta", "1"]), 2);
        assert_eq!(run(["coheng", "bogus"]), 2);
        assert_eq!(run(["coheng", "sweep", "--grid-beta", "0:1"]), 2);
        assert_eq!(run(["coheng", "--help"]), 0);
    }

    #[test]
    fn invalid_physics_exits_two() {
        assert_eq!(run(["coheng", "charge", "--beta", "-1", "--gt", "1"]), 2);
        assert_eq!(
            run([
                "coheng",
                "sweep",
                "--n",
                "13",
                "--grid-beta",
                "1:2:2",
                "--grid-gt",
                "0:1:2"
            ]),
            2
        );
    }
}
