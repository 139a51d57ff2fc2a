//! The `windplan` command line.
//!
//! Settings precedence, lowest first: built-in defaults, the scenario
//! document (including its planner sections), `--seed`, then `--set`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::astar;
use crate::diffnet::checkpoint::save_checkpoint;
use crate::diffnet::mlp::forward;
use crate::environment::{bundled, parse_document, scenario_from_table, Scenario};
use crate::error::Error;
use crate::kinorrt;
use crate::metrics::{compare, metrics_csv, refine_min_margin, Metric, MetricsReport};
use crate::pinn::{self, extract_trajectory, train_with};
use crate::settings::PlannerSettings;
use crate::svg::{comparison_svg, trajectories_svg};
use crate::trajectory::TrajectoryRecord;

pub const EXIT_PLANNER_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "windplan", version, about = "Wind-aware trajectory planning for a planar UAV")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run planners and write their trajectories.
    Plan(RunArgs),
    /// Run (or reload) planners and write metrics and figures.
    Compare(CompareArgs),
    /// Draw trajectories already written to the output directory.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file, or the name of a bundled scenario (`standard`, `dense`).
    #[arg(long, default_value = "standard")]
    pub scenario: String,
    /// Planner to run; repeat for several. Defaults to all three.
    #[arg(long = "planner", value_enum)]
    pub planners: Vec<PlannerKind>,
    /// Seed for network initialization, collocation sampling and tree growth.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override a setting with a dotted key, e.g. `train.epochs=500` or
    /// `wind.ax=0.8`. Values are TOML.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    pub set: Vec<(String, String)>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Load `<planner>_trajectory.csv` from the output directory instead of
    /// planning.
    #[arg(long)]
    pub reuse: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Time at which the wind field is drawn.
    #[arg(long, default_value_t = 0.0)]
    pub wind_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum PlannerKind {
    Pinn,
    Astar,
    Kinorrt,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Pinn, PlannerKind::Astar, PlannerKind::Kinorrt];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Pinn => "pinn",
            PlannerKind::Astar => "astar",
            PlannerKind::Kinorrt => "kinorrt",
        }
    }

    pub fn csv_name(self) -> String {
        format!("{}_trajectory.csv", self.name())
    }
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    if k.trim().is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Planner(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::ScenarioParse(_)
            | Error::ScenarioInvariant { .. }
            | Error::Csv(_)
            | Error::Checkpoint(_) => CliError::Usage(e.to_string()),
            _ => CliError::Planner(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Planner(_) => EXIT_PLANNER_FAILURE,
        }
    }
}

pub fn execute(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(&a).map(|_| ()),
        Command::Compare(a) => cmd_compare(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Planner(m) => eprintln!("planner failure: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

/// Loads the scenario and planner settings with all overrides applied.
pub fn load_inputs(args: &RunArgs) -> Result<(Scenario, PlannerSettings), CliError> {
    let path = Path::new(&args.scenario);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
    } else if let Some(t) = bundled::by_name(&args.scenario) {
        t.to_string()
    } else {
        return Err(CliError::Usage(format!("no scenario file or bundled scenario named `{}`", args.scenario)));
    };
    let mut overrides = Vec::new();
    if let Some(seed) = args.seed {
        for key in ["pinn.seed", "train.seed", "kinorrt.seed"] {
            overrides.push((key.to_string(), seed.to_string()));
        }
    }
    overrides.extend(args.set.iter().cloned());
    let table = parse_document(&text, &overrides)?;
    let scenario = scenario_from_table(&table)?;
    let settings = PlannerSettings::from_table(&table)?;
    Ok((scenario, settings))
}

fn selected(planners: &[PlannerKind]) -> Vec<PlannerKind> {
    let mut p = if planners.is_empty() { PlannerKind::ALL.to_vec() } else { planners.to_vec() };
    p.sort();
    p.dedup();
    p
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Planner(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// A planner result with the metrics computed on the shared evaluation
/// grid, the margin refined on the continuous trajectory where available.
pub struct PlannerRun {
    pub record: TrajectoryRecord,
    pub metrics: MetricsReport,
}

/// Linear interpolation of the sampled positions.
fn interpolated_position(tr: &TrajectoryRecord, t: f64) -> (f64, f64) {
    let s = tr.samples();
    let k = s.partition_point(|p| p.t <= t).clamp(1, s.len() - 1);
    let (a, b) = (&s[k - 1], &s[k]);
    let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    (a.state.x + w * (b.state.x - a.state.x), a.state.y + w * (b.state.y - a.state.y))
}

fn evaluate(record: &TrajectoryRecord, scenario: &Scenario, samples: usize, position_at: impl Fn(f64) -> (f64, f64)) -> Result<MetricsReport, CliError> {
    let grid = record.resample(samples)?;
    let mut m = MetricsReport::evaluate(&grid, &scenario.obstacles)?;
    m.d_min = refine_min_margin(&grid, &scenario.obstacles, position_at);
    Ok(m)
}

pub fn run_planner(kind: PlannerKind, scenario: &Scenario, settings: &PlannerSettings, out: &Path) -> Result<PlannerRun, CliError> {
    let started = std::time::Instant::now();
    let samples = settings.eval.samples;
    let mut log = Vec::new();
    log.push(format!("planner={}", kind.name()));
    log.push(format!("scenario={}", scenario.name));
    let run = match kind {
        PlannerKind::Pinn => {
            let cfg = settings.train;
            let interval = cfg.checkpoint_interval;
            let (params, report) = train_with(scenario, &settings.pinn, &cfg, &settings.weights, &settings.curriculum, |e, p| {
                if e.epoch % 500 == 0 {
                    eprintln!("[pinn] epoch {:5}  L_phys {:.3e}  L_bc {:.3e}  L_obj {:.3e}  L_total {:.3e}", e.epoch, e.phys, e.bc, e.obj, e.total);
                }
                if interval > 0 && e.epoch > 0 && e.epoch % interval == 0 {
                    let path = out.join(format!("pinn_checkpoint_{:06}.bin", e.epoch));
                    let f = File::create(&path)?;
                    save_checkpoint(BufWriter::new(f), &settings.pinn, p)?;
                }
                Ok(())
            })?;
            write_file(&out.join("train_report.csv"), &report.to_csv_string())?;
            let path = out.join("pinn_checkpoint.bin");
            let f = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = BufWriter::new(f);
            save_checkpoint(&mut w, &settings.pinn, &params)?;
            w.flush().map_err(|e| io_err(&path, e))?;

            let record = extract_trajectory(&params, scenario, samples)?;
            let f = report.final_losses;
            log.push(format!("epochs={}", cfg.epochs));
            log.push(format!("final_L_phys={:e}", f.phys));
            log.push(format!("final_L_bc={:e}", f.bc));
            log.push(format!("final_L_obj={:e}", f.obj));
            log.push(format!("final_L_total={:e}", f.total));
            log.push(format!("objective_with_time={:e}", report.objective_with_time));
            log.push(format!("mean_square_residual={:e}", pinn::mean_square_residual(&params, scenario, 2000)));
            log.push(format!("control_bound_violations={}", pinn::control_bound_violations(&record, scenario.u_max)));
            let horizon = scenario.horizon;
            let metrics = evaluate(&record, scenario, samples, |t| {
                let y = forward(&params, t / horizon);
                (y[0], y[1])
            })?;
            PlannerRun { record, metrics }
        }
        PlannerKind::Astar => {
            let (path, smooth, record) = astar::plan(scenario, &settings.astar, samples)?;
            log.push(format!("grid_cells={}", path.cells.len()));
            log.push(format!("grid_cost={:e}", path.cost));
            log.push(format!("grid_length={:e}", path.length()));
            log.push(format!("duration={:e}", smooth.duration()));
            let metrics = evaluate(&record, scenario, samples, |t| smooth.position(t))?;
            PlannerRun { record, metrics }
        }
        PlannerKind::Kinorrt => {
            let outcome = kinorrt::plan(scenario, &settings.kinorrt)?;
            log.push(format!("iterations={}", outcome.iterations));
            log.push(format!("tree_nodes={}", outcome.tree.nodes.len()));
            log.push(format!("goal_cost={:e}", outcome.tree.nodes[outcome.goal_node].cost));
            let record = outcome.trajectory;
            let metrics = evaluate(&record, scenario, samples, |t| interpolated_position(&record, t))?;
            PlannerRun { record, metrics }
        }
    };
    write_file(&out.join(kind.csv_name()), &run.record.to_csv_string())?;
    log.push(format!("samples={}", run.record.len()));
    write_file(&out.join(format!("{}.log", kind.name())), &(log.join("\n") + "\n"))?;
    eprintln!("[{}] done in {:.1?}", kind.name(), started.elapsed());
    Ok(run)
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))
}

pub fn cmd_plan(args: &RunArgs) -> Result<Vec<PlannerRun>, CliError> {
    let (scenario, settings) = load_inputs(args)?;
    prepare_out(&args.out)?;
    selected(&args.planners)
        .into_iter()
        .map(|k| {
            let run = run_planner(k, &scenario, &settings, &args.out)?;
            println!("{}: wrote {}", k.name(), args.out.join(k.csv_name()).display());
            Ok(run)
        })
        .collect()
}

fn load_record(out: &Path, kind: PlannerKind) -> Result<TrajectoryRecord, CliError> {
    let path = out.join(kind.csv_name());
    let f = File::open(&path).map_err(|e| CliError::Usage(format!("missing trajectory {}: {e}", path.display())))?;
    TrajectoryRecord::read_csv(kind.name(), BufReader::new(f)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let planners = selected(&args.run.planners);
    if planners.len() < 2 {
        return Err(CliError::Usage("compare needs at least two planners".into()));
    }
    let (scenario, settings) = load_inputs(&args.run)?;
    prepare_out(&args.run.out)?;
    let out = &args.run.out;
    let runs: Vec<PlannerRun> = if args.reuse {
        planners
            .iter()
            .map(|&k| {
                let record = load_record(out, k)?;
                let metrics = evaluate(&record, &scenario, settings.eval.samples, |t| interpolated_position(&record, t))?;
                Ok(PlannerRun { record, metrics })
            })
            .collect::<Result<_, CliError>>()?
    } else {
        cmd_plan(&RunArgs { planners: planners.clone(), ..args.run.clone() })?
    };

    let reports: Vec<MetricsReport> = runs.iter().map(|r| r.metrics.clone()).collect();
    write_file(&out.join("metrics.csv"), &metrics_csv(&reports))?;
    let cmp = compare(&reports)?;
    write_file(&out.join("comparison.svg"), &comparison_svg(&cmp))?;
    let records: Vec<TrajectoryRecord> = runs.into_iter().map(|r| r.record).collect();
    write_file(&out.join("trajectories.svg"), &trajectories_svg(&scenario, &records, 0.0))?;

    print!("{}", metrics_csv(&reports));
    for (m, metric) in Metric::ALL.iter().enumerate() {
        let order: Vec<&str> = cmp.ranking[m].iter().map(|&p| cmp.planners[p].as_str()).collect();
        println!("best {metric}: {}", order.join(" > "));
    }
    Ok(())
}

pub fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let (scenario, _) = load_inputs(&args.run)?;
    let out = &args.run.out;
    let planners: Vec<PlannerKind> = if args.run.planners.is_empty() {
        PlannerKind::ALL.into_iter().filter(|k| out.join(k.csv_name()).is_file()).collect()
    } else {
        selected(&args.run.planners)
    };
    let records = planners.iter().map(|&k| load_record(out, k)).collect::<Result<Vec<_>, _>>()?;
    prepare_out(out)?;
    let path = out.join("trajectories.svg");
    write_file(&path, &trajectories_svg(&scenario, &records, args.wind_time))?;
    println!("wrote {}", path.display());
    Ok(())
}
