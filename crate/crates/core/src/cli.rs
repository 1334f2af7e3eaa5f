//! The `enps-lab` command line.
//!
//! Every subcommand is a plain function taking its parsed arguments, so the
//! binary is only argument parsing plus exit-code mapping.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::engine::PSystem;
use crate::model::{parse_model, ControllerKind, ControllerParams};
use crate::roadgen::{
    export_tests, nsga2, read_test, summary_csv, write_atomic, CurvatureEvaluator, Evaluator, GaConfig,
    SearchResult, SimulationEvaluator, StopReason, TestFile,
};
use crate::sim::{
    read_trajectory_csv, render_svg, simulate, trajectory_csv, variables_csv, Outcome, PlotLayer, Point,
    RobotParams, SimLimits, SimResult, DEFAULT_MAP_SCALE, DEFAULT_ROAD_WIDTH, M1_COLOR, M2_COLOR,
};

/// A problem with the invocation rather than with the work itself; the
/// binary exits with status 2 for these.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, Parser)]
#[command(
    name = "enps-lab",
    version,
    about = "Lane-keeping P system controllers: road generation, simulation and reporting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for difficult roads and export them as JSON tests.
    Generate(GenerateArgs),
    /// Drive one controller along one road and write its traces.
    Run(RunArgs),
    /// Run every controller on every road in a directory.
    Batch(BatchArgs),
    /// Draw a road and recorded trajectories as SVG.
    Plot(PlotArgs),
    /// Batch both shipped controllers and write per-road plots and a summary.
    Report(BatchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = "ENPS_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ControllerArgs {
    /// Controller parameter file for the built-in models.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Meters per road map unit.
    #[arg(long, default_value_t = DEFAULT_MAP_SCALE)]
    pub scale: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_steps: usize,
}

fn parse_population(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(format!(
            "population must be an even number of at least 2, got {n}"
        ));
    }
    Ok(n)
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(0.0..=1.0).contains(&r) {
        return Err(format!("expected a value in [0, 1], got {r}"));
    }
    Ok(r)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive number, got {v}"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output directory for test files and summary.csv.
    #[arg(long, default_value = "tests_out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = parse_population)]
    pub pop: usize,
    #[arg(long, default_value_t = 75)]
    pub gens: usize,
    #[arg(long, default_value_t = 0.4, value_parser = parse_rate)]
    pub mutation: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_rate)]
    pub crossover: f64,
    /// Side of the square map in map units.
    #[arg(long, default_value_t = 200.0, value_parser = parse_positive)]
    pub map_size: f64,
    /// Seconds.
    #[arg(long, default_value_t = 1800.0, value_parser = parse_positive)]
    pub time_budget: f64,
    #[arg(long, default_value_t = 0.95, value_parser = parse_rate)]
    pub oob_threshold: f64,
    /// Lane width written into the tests, meters.
    #[arg(long, default_value_t = DEFAULT_ROAD_WIDTH, value_parser = parse_positive)]
    pub width: f64,
    /// Score roads by simulating this model (m1, m2 or a model file) instead
    /// of by curvature alone.
    #[arg(long)]
    pub evaluate_with: Option<String>,
    #[command(flatten)]
    pub controller: ControllerArgs,
}

impl GenerateArgs {
    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            population: self.pop,
            generations: self.gens,
            mutation_rate: self.mutation,
            crossover_rate: self.crossover,
            map_size: self.map_size,
            oob_threshold: self.oob_threshold,
            time_budget: Duration::from_secs_f64(self.time_budget),
            seed: self.seed.seed,
            min_spacing: self.width / self.controller.scale,
            ..GaConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// `m1`, `m2`, or a model file.
    #[arg(long, default_value = "m2")]
    pub model: String,
    /// Road test file (JSON).
    #[arg(long)]
    pub road: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub controller: ControllerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Models to run, repeatable; defaults to both built-in models.
    #[arg(long)]
    pub model: Vec<String>,
    #[arg(long)]
    pub tests_dir: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub controller: ControllerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub road: PathBuf,
    /// Trajectory CSV drawn in red.
    #[arg(long)]
    pub m1: Option<PathBuf>,
    /// Trajectory CSV drawn in green.
    #[arg(long)]
    pub m2: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Meters per road map unit.
    #[arg(long, default_value_t = DEFAULT_MAP_SCALE)]
    pub scale: f64,
}

/// A controller ready to simulate, with the name used in file names and reports.
#[derive(Debug, Clone)]
pub struct NamedModel {
    pub name: String,
    pub system: PSystem,
}

fn load_params(path: Option<&Path>) -> Result<ControllerParams> {
    match path {
        None => Ok(ControllerParams::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ControllerParams::parse(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

/// `m1` / `m2` build the shipped controllers; anything else is read as a model file.
pub fn load_model(spec: &str, params: Option<&Path>) -> Result<NamedModel> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Ok(kind) = spec.parse::<ControllerKind>() {
            let p = load_params(params)?;
            return Ok(NamedModel {
                name: kind.name().to_owned(),
                system: kind.build(&p)?,
            });
        }
        return Err(UsageError(format!("model `{spec}` is neither m1, m2 nor an existing file")).into());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let system = parse_model(&text).with_context(|| format!("in {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_owned());
    Ok(NamedModel { name, system })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn limits(args: &ControllerArgs, seed: u64, record_variables: bool) -> SimLimits {
    SimLimits {
        max_steps: args.max_steps,
        seed,
        record_variables,
        start: None,
    }
}

fn stats_line(name: &str, values: impl Iterator<Item = f64>) -> String {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return format!("{name}: no values");
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    format!("{name}: min {min:.5} mean {mean:.5} max {max:.5}")
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<SearchResult> {
    let config = args.ga_config();
    config.check().map_err(|e| UsageError(e.to_string()))?;
    if !(args.controller.scale > 0.0) {
        bail!(UsageError(format!(
            "scale must be positive, got {}",
            args.controller.scale
        )));
    }
    let result = match &args.evaluate_with {
        None => nsga2(&config, &CurvatureEvaluator)?,
        Some(spec) => {
            let model = load_model(spec, args.controller.params.as_deref())?;
            let evaluator = SimulationEvaluator {
                controller: model.system,
                robot: RobotParams::default(),
                limits: limits(&args.controller, config.seed, false),
                width_m: args.width,
                scale: args.controller.scale,
                oob_threshold: args.oob_threshold,
            };
            nsga2(&config, &evaluator as &dyn Evaluator)?
        }
    };
    create_dir(&args.out)?;
    let files = export_tests(&result.front, &args.out, args.width, args.map_size, config.seed)?;
    write_file(&args.out.join("summary.csv"), &summary_csv(&result.front))?;

    println!(
        "exported {} tests to {} after {} generations{}",
        files.len(),
        args.out.display(),
        result.history.len() - 1,
        if result.stop == StopReason::TimeBudget {
            " (time budget reached)"
        } else {
            ""
        }
    );
    println!("{}", stats_line("f1", result.front.iter().map(|t| t.f1)));
    println!("{}", stats_line("f2", result.front.iter().map(|t| t.f2)));
    Ok(result)
}

/// Paths written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub result: SimResult,
    pub trajectory: PathBuf,
    pub variables: PathBuf,
    pub svg: PathBuf,
}

fn plot_color(model: &str) -> &'static str {
    match model {
        "m1" => M1_COLOR,
        "m2" => M2_COLOR,
        _ => "black",
    }
}

fn load_road(path: &Path, scale: f64) -> Result<(TestFile, crate::sim::RoadGeometry)> {
    let test = read_test(path)?;
    let road = test
        .road(scale)
        .with_context(|| format!("in {}", path.display()))?;
    Ok((test, road))
}

pub fn cmd_run(args: &RunArgs) -> Result<RunArtifacts> {
    let model = load_model(&args.model, args.controller.params.as_deref())?;
    let (_, road) = load_road(&args.road, args.controller.scale)?;
    let result = simulate(
        &model.system,
        &road,
        &RobotParams::default(),
        &limits(&args.controller, args.seed.seed, true),
    )?;

    create_dir(&args.out)?;
    let base = format!("{}_{}", stem(&args.road), model.name);
    let trajectory = args.out.join(format!("{base}_trajectory.csv"));
    let variables = args.out.join(format!("{base}_variables.csv"));
    let svg = args.out.join(format!("{base}.svg"));
    write_file(&trajectory, &trajectory_csv(&result)?)?;
    if let Some(v) = &result.variables {
        write_file(&variables, &variables_csv(v)?)?;
    }
    let layer = PlotLayer {
        label: model.name.clone(),
        color: plot_color(&model.name).to_owned(),
        points: result.trajectory.iter().map(|p| p.position()).collect(),
    };
    write_file(&svg, &render_svg(Some(&road), &[layer]))?;

    match result.failure {
        Some(at) => println!(
            "{}: {} after {} steps at ({:.4}, {:.4})",
            model.name, result.outcome, result.steps, at.x, at.y
        ),
        None => println!("{}: {} after {} steps", model.name, result.outcome, result.steps),
    }
    Ok(RunArtifacts {
        result,
        trajectory,
        variables,
        svg,
    })
}

/// One `(road, model)` pair of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub road: String,
    pub model: String,
    /// `completed`, `off_road`, `step_limit` or `error`.
    pub outcome: String,
    pub steps: Option<usize>,
    pub max_curvature: Option<f64>,
    /// Trajectory positions, kept for plotting.
    pub path: Vec<Point>,
}

fn test_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir)
        .map_err(|e| UsageError(format!("cannot read tests directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!(UsageError(format!("no .json test files in {}", dir.display())));
    }
    Ok(files)
}

fn batch_models(args: &BatchArgs) -> Result<Vec<NamedModel>> {
    let specs: Vec<String> = if args.model.is_empty() {
        vec!["m1".into(), "m2".into()]
    } else {
        args.model.clone()
    };
    specs
        .iter()
        .map(|s| load_model(s, args.controller.params.as_deref()))
        .collect()
}

fn run_pairs(args: &BatchArgs, models: &[NamedModel], files: &[PathBuf]) -> Result<Vec<BatchRow>> {
    let pairs: Vec<(&PathBuf, &NamedModel)> = files
        .iter()
        .flat_map(|f| models.iter().map(move |m| (f, m)))
        .collect();
    let run_one = |(file, model): (&PathBuf, &NamedModel)| {
        let road_name = file
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let error = |curv| BatchRow {
            road: road_name.clone(),
            model: model.name.clone(),
            outcome: "error".into(),
            steps: None,
            max_curvature: curv,
            path: Vec::new(),
        };
        let Ok((test, road)) = load_road(file, args.controller.scale) else {
            return error(None);
        };
        match simulate(
            &model.system,
            &road,
            &RobotParams::default(),
            &limits(&args.controller, args.seed.seed, false),
        ) {
            Ok(r) => BatchRow {
                road: road_name.clone(),
                model: model.name.clone(),
                outcome: r.outcome.as_str().into(),
                steps: Some(r.steps),
                max_curvature: Some(test.max_curvature),
                path: r.trajectory.iter().map(|p| p.position()).collect(),
            },
            Err(_) => error(Some(test.max_curvature)),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("starting worker threads")?;
    Ok(pool.install(|| pairs.into_par_iter().map(run_one).collect()))
}

pub fn batch_csv(rows: &[BatchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["road", "model", "outcome", "steps", "max_curvature"])?;
    for r in rows {
        w.write_record([
            r.road.clone(),
            r.model.clone(),
            r.outcome.clone(),
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            r.max_curvature.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `(model, completed, runs)` in first-seen model order.
pub fn pass_rates(rows: &[BatchRow]) -> Vec<(String, usize, usize)> {
    let mut out: Vec<(String, usize, usize)> = Vec::new();
    for r in rows {
        let i = match out.iter().position(|(m, _, _)| *m == r.model) {
            Some(i) => i,
            None => {
                out.push((r.model.clone(), 0, 0));
                out.len() - 1
            }
        };
        out[i].2 += 1;
        if r.outcome == Outcome::Completed.as_str() {
            out[i].1 += 1;
        }
    }
    out
}

fn pass_rate_lines(rows: &[BatchRow]) -> String {
    let mut s = String::new();
    for (model, ok, n) in pass_rates(rows) {
        let pct = if n == 0 { 0.0 } else { 100.0 * ok as f64 / n as f64 };
        let _ = writeln!(s, "{model}: {ok}/{n} completed ({pct:.1}%)");
    }
    s
}

pub fn cmd_batch(args: &BatchArgs) -> Result<Vec<BatchRow>> {
    let files = test_files(&args.tests_dir)?;
    let models = batch_models(args)?;
    let rows = run_pairs(args, &models, &files)?;
    create_dir(&args.out)?;
    write_file(&args.out.join("batch.csv"), &batch_csv(&rows)?)?;
    print!("{}", pass_rate_lines(&rows));
    Ok(rows)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<PathBuf> {
    let (_, road) = load_road(&args.road, args.scale)?;
    let mut layers = Vec::new();
    for (label, color, path) in [("m1", M1_COLOR, &args.m1), ("m2", M2_COLOR, &args.m2)] {
        let Some(path) = path else { continue };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let rows = read_trajectory_csv(&text).with_context(|| format!("in {}", path.display()))?;
        layers.push(PlotLayer {
            label: label.into(),
            color: color.into(),
            points: rows.iter().map(|r| Point::new(r.x, r.y)).collect(),
        });
    }
    create_dir(&args.out)?;
    let out = args.out.join(format!("{}.svg", stem(&args.road)));
    write_file(&out, &render_svg(Some(&road), &layers))?;
    println!("wrote {}", out.display());
    Ok(out)
}

/// Batch, then one SVG per road with every model's trajectory, and a
/// Markdown summary listing the roads on which the models disagree.
pub fn cmd_report(args: &BatchArgs) -> Result<Vec<BatchRow>> {
    let files = test_files(&args.tests_dir)?;
    let models = batch_models(args)?;
    let rows = run_pairs(args, &models, &files)?;
    create_dir(&args.out)?;
    write_file(&args.out.join("batch.csv"), &batch_csv(&rows)?)?;

    let mut md = String::from(
        "# Lane-keeping report\n\n## Completion\n\n| model | completed | runs |\n|---|---|---|\n",
    );
    for (model, ok, n) in pass_rates(&rows) {
        let _ = writeln!(md, "| {model} | {ok} | {n} |");
    }
    md.push_str("\n## Roads\n\n| road | max curvature |");
    for m in &models {
        let _ = write!(md, " {} |", m.name);
    }
    md.push_str("\n|---|---|");
    md.push_str(&"---|".repeat(models.len()));
    md.push('\n');

    for (file, chunk) in files.iter().zip(rows.chunks(models.len())) {
        let curvature = chunk[0]
            .max_curvature
            .map(|c| format!("{c:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = write!(md, "| {} | {curvature} |", chunk[0].road);
        for r in chunk {
            let _ = write!(md, " {} |", r.outcome);
        }
        md.push('\n');
        if let Ok((_, road)) = load_road(file, args.controller.scale) {
            let layers: Vec<PlotLayer> = chunk
                .iter()
                .map(|r| PlotLayer {
                    label: r.model.clone(),
                    color: plot_color(&r.model).into(),
                    points: r.path.clone(),
                })
                .collect();
            write_file(
                &args.out.join(format!("{}.svg", stem(file))),
                &render_svg(Some(&road), &layers),
            )?;
        }
    }
    write_file(&args.out.join("report.md"), &md)?;
    print!("{}", pass_rate_lines(&rows));
    println!("report written to {}", args.out.join("report.md").display());
    Ok(rows)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a).map(drop),
        Command::Run(a) => cmd_run(&a).map(drop),
        Command::Batch(a) => cmd_batch(&a).map(drop),
        Command::Plot(a) => cmd_plot(&a).map(drop),
        Command::Report(a) => cmd_report(&a).map(drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn population_must_be_even_and_at_least_two() {
        for bad in ["1", "0", "3"] {
            assert!(
                Cli::try_parse_from(["enps-lab", "generate", "--pop", bad]).is_err(),
                "{bad}"
            );
        }
        assert!(Cli::try_parse_from(["enps-lab", "generate", "--pop", "2"]).is_ok());
    }

    #[test]
    fn generate_defaults() {
        let Command::Generate(a) = Cli::try_parse_from(["enps-lab", "generate"]).unwrap().command else {
            panic!()
        };
        let c = a.ga_config();
        assert_eq!((c.population, c.generations), (100, 75));
        assert_eq!((c.mutation_rate, c.crossover_rate), (0.4, 1.0));
        assert_eq!((c.map_size, c.oob_threshold), (200.0, 0.95));
        assert_eq!(c.time_budget, Duration::from_secs(1800));
    }

    #[test]
    fn unknown_model_is_a_usage_error() {
        let err = load_model("no-such-model", None).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn pass_rate_counts() {
        let row = |m: &str, o: &str| BatchRow {
            road: "r".into(),
            model: m.into(),
            outcome: o.into(),
            steps: None,
            max_curvature: None,
            path: vec![],
        };
        let rows = [
            row("m1", "off_road"),
            row("m2", "completed"),
            row("m1", "completed"),
        ];
        assert_eq!(pass_rates(&rows), [("m1".into(), 1, 2), ("m2".into(), 1, 1)]);
    }
}
