use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swo::coloring::assignment_to_text;
use swo::sched::{self, GenParams};
use swo_cli::{
    ablation_to_csv, load_graph, load_sched_instance, parse_cutoff, restart_study, run_ablation,
    solve_color_batch, solve_sched_batch, study_rows_to_csv, trace_run, write_output, CliError,
    SchedOptions,
    DomainKind, ExperimentSpec, OutputFormat,
};

/// Squeaky-wheel optimization solver and benchmark harness.
#[derive(Parser)]
#[command(name = "swo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonFlags {
    /// JSON experiment config; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Positive integer, 'half-n' or 'none'.
    #[arg(long)]
    restart_cutoff: Option<String>,
    #[arg(long)]
    noise: Option<f64>,
    /// 'sticky' or 'sort'.
    #[arg(long)]
    prioritizer: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// 'csv' or 'json'.
    #[arg(long)]
    format: Option<String>,
    /// Include wall-clock columns (makes outputs non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl CommonFlags {
    fn spec(&self) -> Result<ExperimentSpec, CliError> {
        let format = match self.format.as_deref() {
            None => None,
            Some("csv") => Some(OutputFormat::Csv),
            Some("json") => Some(OutputFormat::Json),
            Some(other) => {
                return Err(CliError(format!("--format must be csv|json, got '{other}'")))
            }
        };
        let mut spec = ExperimentSpec {
            seed: self.seed,
            runs: self.runs,
            iterations: self.iterations,
            restart_cutoff: self.restart_cutoff.clone(),
            noise: self.noise,
            prioritizer: self.prioritizer.clone(),
            format,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            ..Default::default()
        };
        if let Some(path) = &self.config {
            spec = spec.or(ExperimentSpec::load(path)?);
        }
        if let Some(c) = &spec.restart_cutoff {
            parse_cutoff(c)?; // validate early
        }
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scheduling instance (JSON format) over seeded runs.
    SolveSched {
        instance: Option<PathBuf>,
        /// Nested per-line improvement budget.
        #[arg(long)]
        inner_iters: Option<usize>,
        /// Use the simple in-order append constructor.
        #[arg(long)]
        append: bool,
        /// Score by number of late tasks instead of total cost.
        #[arg(long)]
        late_count: bool,
        /// Fixed initial priority order (comma-separated task ids).
        #[arg(long, value_delimiter = ',')]
        initial_order: Option<Vec<usize>>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Solve a graph coloring instance (DIMACS .col) over seeded runs.
    SolveColor {
        instance: Option<PathBuf>,
        /// Color grabbing: 'on' or 'off'.
        #[arg(long)]
        grab: Option<String>,
        /// Blame variant: 'all' or 'first'.
        #[arg(long)]
        blame: Option<String>,
        /// Also write the best assignment ('node color' per line, 1-based).
        #[arg(long)]
        assignment_out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Restart-cutoff study on a scheduling instance: success rate and mean
    /// iteration cost per (cutoff, threshold).
    RestartStudy {
        instance: Option<PathBuf>,
        /// Comma-separated restart cutoffs.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Vec<usize>,
        /// Comma-separated score thresholds, ascending.
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
        /// Iteration budget spent per cutoff.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        inner_iters: Option<usize>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Export a per-iteration trajectory (positions and scores) as CSV.
    Trace {
        /// 'sched' or 'coloring'.
        #[arg(long)]
        domain: String,
        instance: Option<PathBuf>,
        /// Use the simple in-order append constructor (sched only).
        #[arg(long)]
        append: bool,
        /// Score schedules by the number of late tasks (sched only).
        #[arg(long)]
        late_count: bool,
        /// Fixed initial priority order (comma-separated ids, sched only).
        #[arg(long, value_delimiter = ',')]
        initial_order: Option<Vec<usize>>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Coloring ablation: the grab x blame x prioritizer grid, same seeds per
    /// cell.
    Ablation {
        instances: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Generate a synthetic scheduling instance.
    GenSched {
        #[arg(long)]
        tasks: usize,
        #[arg(long)]
        lines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 6)]
        types: usize,
        #[arg(long, default_value_t = 0.1)]
        infeasible_prob: f64,
        #[arg(long, default_value_t = 0.6)]
        tightness: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn instance_path(
    flag: Option<PathBuf>,
    spec: &ExperimentSpec,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or_else(|| spec.instances.first().map(PathBuf::from))
        .ok_or_else(|| CliError(format!("no {what} instance given (argument or config)")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SolveSched {
            instance,
            inner_iters,
            append,
            late_count,
            initial_order,
            common,
        } => {
            let spec = common.spec()?;
            let path = instance_path(instance, &spec, "scheduling")?;
            let inst = load_sched_instance(&path)?;
            let cfg = spec.engine_config()?;
            let options = SchedOptions {
                inner_iters: inner_iters.or(spec.inner_iters).unwrap_or(10),
                append,
                late_count,
                initial_order,
            };
            let report = solve_sched_batch(
                &inst,
                &cfg,
                spec.runs()?,
                &options,
                &path.display().to_string(),
            )?;
            let format = spec.format.unwrap_or(if report.rows.len() == 1 {
                OutputFormat::Json
            } else {
                OutputFormat::Csv
            });
            let text = match format {
                OutputFormat::Csv => report.to_csv(common.timing),
                OutputFormat::Json => report.to_json(common.timing),
            };
            write_output(spec.out.as_deref().map(std::path::Path::new), &text)
        }
        Command::SolveColor {
            instance,
            grab,
            blame,
            assignment_out,
            common,
        } => {
            let mut spec = common.spec()?;
            spec.grab = grab.or(spec.grab);
            spec.blame = blame.or(spec.blame);
            let path = instance_path(instance, &spec, "coloring")?;
            let graph = load_graph(&path)?;
            let cfg = spec.engine_config()?;
            let (report, best) = solve_color_batch(
                &graph,
                &cfg,
                &spec.coloring_config()?,
                spec.runs()?,
                &path.display().to_string(),
            )?;
            if let Some(ap) = assignment_out {
                std::fs::write(&ap, assignment_to_text(&best))
                    .map_err(|e| CliError(format!("cannot write {}: {e}", ap.display())))?;
            }
            let format = spec.format.unwrap_or(if report.rows.len() == 1 {
                OutputFormat::Json
            } else {
                OutputFormat::Csv
            });
            let text = match format {
                OutputFormat::Csv => report.to_csv(common.timing),
                OutputFormat::Json => report.to_json(common.timing),
            };
            write_output(spec.out.as_deref().map(std::path::Path::new), &text)
        }
        Command::RestartStudy {
            instance,
            cutoffs,
            thresholds,
            budget,
            inner_iters,
            common,
        } => {
            let spec = common.spec()?;
            let path = instance_path(instance, &spec, "scheduling")?;
            let inst = load_sched_instance(&path)?;
            let cutoffs = if cutoffs.is_empty() {
                spec.cutoffs.clone().unwrap_or_default()
            } else {
                cutoffs
            };
            let thresholds = if thresholds.is_empty() {
                spec.thresholds.clone().unwrap_or_default()
            } else {
                thresholds
            };
            let rows = restart_study(
                &inst,
                &cutoffs,
                &thresholds,
                budget.or(spec.budget).unwrap_or(10_000),
                spec.seed.unwrap_or(0),
                inner_iters.or(spec.inner_iters).unwrap_or(0),
            )?;
            write_output(
                spec.out.as_deref().map(std::path::Path::new),
                &study_rows_to_csv(&rows),
            )
        }
        Command::Trace {
            domain,
            instance,
            append,
            late_count,
            initial_order,
            common,
        } => {
            let spec = common.spec()?;
            let kind = match domain.as_str() {
                "sched" => DomainKind::Sched,
                "coloring" | "color" => DomainKind::Coloring,
                other => return Err(CliError(format!("unknown domain '{other}'"))),
            };
            let path = instance_path(instance, &spec, "trace")?;
            let options = SchedOptions {
                inner_iters: spec.inner_iters.unwrap_or(10),
                append,
                late_count,
                initial_order,
            };
            let (trajectory, initial) = trace_run(&spec, kind, &path, &options)?;
            match spec.out.as_deref() {
                Some(out) => {
                    std::fs::write(out, &trajectory)
                        .map_err(|e| CliError(format!("cannot write {out}: {e}")))?;
                    let initial_path = format!("{out}.initial.csv");
                    std::fs::write(&initial_path, &initial)
                        .map_err(|e| CliError(format!("cannot write {initial_path}: {e}")))?;
                }
                None => {
                    print!("{trajectory}");
                    print!("{initial}");
                }
            }
            Ok(())
        }
        Command::Ablation { instances, common } => {
            let spec = common.spec()?;
            let paths: Vec<PathBuf> = if instances.is_empty() {
                spec.instances.iter().map(PathBuf::from).collect()
            } else {
                instances
            };
            let mut graphs = Vec::new();
            for p in &paths {
                graphs.push((p.display().to_string(), load_graph(p)?));
            }
            let cfg = spec.engine_config()?;
            let cells = run_ablation(&graphs, &cfg, spec.runs()?)?;
            write_output(
                spec.out.as_deref().map(std::path::Path::new),
                &ablation_to_csv(&cells, common.timing),
            )
        }
        Command::GenSched {
            tasks,
            lines,
            seed,
            density,
            types,
            infeasible_prob,
            tightness,
            out,
        } => {
            let params = GenParams {
                compat_density: density,
                type_count: types,
                infeasible_prob,
                due_tightness: tightness,
                ..Default::default()
            };
            let inst = sched::generate_instance(tasks, lines, &params, seed)
                .map_err(|e| CliError(e.to_string()))?;
            write_output(out.as_deref(), &sched::instance_to_json(&inst))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
