//! Benchmark harness: single-instance solves, seeded batches, the
//! restart-cutoff study, the coloring ablation grid, and trace export.
//! The binary in `main.rs` is a thin argument layer over these drivers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use swo::coloring::{self, BlameVariant, ColoringConfig, Graph};
use swo::engine::{self, EngineConfig, Prioritizer, Restart};
use swo::sched::{self, SchedDomain, SchedInstance};

/// An input or configuration problem; the binary maps this to exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Sched,
    Coloring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Experiment description, loadable from a JSON config file. Command-line
/// flags override any value set here.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub instances: Vec<String>,
    pub domain: Option<DomainKind>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub iterations: Option<usize>,
    /// "none" or an iteration count.
    pub restart_cutoff: Option<String>,
    pub noise: Option<f64>,
    /// "sticky" or "sort".
    pub prioritizer: Option<String>,
    /// "on" or "off".
    pub grab: Option<String>,
    /// "all" or "first".
    pub blame: Option<String>,
    pub inner_iters: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub cutoffs: Option<Vec<usize>>,
    pub budget: Option<usize>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError(format!("bad config {}: {e}", path.display())))
    }

    /// Fills unset fields of `self` from `other` (file values under flag
    /// values).
    pub fn or(mut self, other: ExperimentSpec) -> Self {
        if self.instances.is_empty() {
            self.instances = other.instances;
        }
        self.domain = self.domain.or(other.domain);
        self.seed = self.seed.or(other.seed);
        self.runs = self.runs.or(other.runs);
        self.iterations = self.iterations.or(other.iterations);
        self.restart_cutoff = self.restart_cutoff.or(other.restart_cutoff);
        self.noise = self.noise.or(other.noise);
        self.prioritizer = self.prioritizer.or(other.prioritizer);
        self.grab = self.grab.or(other.grab);
        self.blame = self.blame.or(other.blame);
        self.inner_iters = self.inner_iters.or(other.inner_iters);
        self.thresholds = self.thresholds.or(other.thresholds);
        self.cutoffs = self.cutoffs.or(other.cutoffs);
        self.budget = self.budget.or(other.budget);
        self.out = self.out.or(other.out);
        self.format = self.format.or(other.format);
        self
    }

    pub fn engine_config(&self) -> Result<EngineConfig, CliError> {
        let mut cfg = EngineConfig::new(self.seed.unwrap_or(0));
        cfg.max_iterations = self.iterations.unwrap_or(1000);
        if let Some(c) = &self.restart_cutoff {
            cfg.restart = parse_cutoff(c)?;
        }
        if let Some(n) = self.noise {
            if !(n >= 0.0) {
                return err(format!("noise must be non-negative, got {n}"));
            }
            cfg.noise = n;
        }
        if let Some(p) = &self.prioritizer {
            cfg.prioritizer = match p.as_str() {
                "sticky" => Prioritizer::Sticky,
                "sort" => Prioritizer::BlameSort,
                other => return err(format!("unknown prioritizer '{other}'")),
            };
        }
        Ok(cfg)
    }

    pub fn coloring_config(&self) -> Result<ColoringConfig, CliError> {
        let mut cfg = ColoringConfig::default();
        if let Some(g) = &self.grab {
            cfg.grab_enabled = match g.as_str() {
                "on" => true,
                "off" => false,
                other => return err(format!("--grab must be on|off, got '{other}'")),
            };
        }
        if let Some(b) = &self.blame {
            cfg.blame_variant = match b.as_str() {
                "all" => BlameVariant::AllOutside,
                "first" => BlameVariant::FirstOnly,
                other => return err(format!("--blame must be all|first, got '{other}'")),
            };
        }
        Ok(cfg)
    }

    pub fn runs(&self) -> Result<usize, CliError> {
        let runs = self.runs.unwrap_or(1);
        if runs == 0 {
            return err("--runs must be at least 1");
        }
        Ok(runs)
    }
}

pub fn parse_cutoff(text: &str) -> Result<Restart, CliError> {
    match text {
        "none" => Ok(Restart::Off),
        "half-n" => Ok(Restart::HalfN),
        other => match other.parse::<usize>() {
            Ok(0) | Err(_) => err(format!(
                "--restart-cutoff must be a positive integer, 'half-n' or 'none', got '{other}'"
            )),
            Ok(c) => Ok(Restart::Every(c)),
        },
    }
}

pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    coloring::parse_dimacs(&text)
        .map_err(|e| CliError(format!("cannot parse {}: {e}", path.display())))
}

pub fn load_sched_instance(path: &Path) -> Result<SchedInstance, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    sched::instance_from_json(&text)
        .map_err(|e| CliError(format!("cannot parse {}: {e}", path.display())))
}

/// One seeded engine run in a batch.
#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub best_score: f64,
    pub iteration_found: usize,
    pub iterations_run: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub instance: String,
    pub domain: DomainKind,
    pub rows: Vec<RunRow>,
    pub mean_score: f64,
    pub min_score: f64,
    pub max_score: f64,
}

impl SolveReport {
    fn aggregate(instance: String, domain: DomainKind, rows: Vec<RunRow>) -> Self {
        let scores: Vec<f64> = rows.iter().map(|r| r.best_score).collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self {
            instance,
            domain,
            rows,
            mean_score: mean,
            min_score: min,
            max_score: max,
        }
    }

    /// Fixed-header CSV. The seconds column appears only with `timing`, so
    /// default outputs are byte-identical across reruns of the same seed.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::new();
        if timing {
            out.push_str("row,seed,best_score,iteration_found,iterations_run,seconds\n");
        } else {
            out.push_str("row,seed,best_score,iteration_found,iterations_run\n");
        }
        let tail = if timing { "," } else { "" };
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "{i},{},{},{},{}",
                r.seed, r.best_score, r.iteration_found, r.iterations_run
            );
            if timing {
                let _ = write!(out, ",{:.3}", r.seconds);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "mean,,{},,{tail}", self.mean_score);
        let _ = writeln!(out, "min,,{},,{tail}", self.min_score);
        let _ = writeln!(out, "max,,{},,{tail}", self.max_score);
        out
    }

    pub fn to_json(&self, timing: bool) -> String {
        #[derive(Serialize)]
        struct JsonRow {
            seed: u64,
            best_score: f64,
            iteration_found: usize,
            iterations_run: usize,
            #[serde(skip_serializing_if = "Option::is_none")]
            seconds: Option<f64>,
        }
        #[derive(Serialize)]
        struct JsonReport<'a> {
            instance: &'a str,
            domain: DomainKind,
            runs: Vec<JsonRow>,
            mean_score: f64,
            min_score: f64,
            max_score: f64,
        }
        let report = JsonReport {
            instance: &self.instance,
            domain: self.domain,
            runs: self
                .rows
                .iter()
                .map(|r| JsonRow {
                    seed: r.seed,
                    best_score: r.best_score,
                    iteration_found: r.iteration_found,
                    iterations_run: r.iterations_run,
                    seconds: timing.then_some((r.seconds * 1000.0).round() / 1000.0),
                })
                .collect(),
            mean_score: self.mean_score,
            min_score: self.min_score,
            max_score: self.max_score,
        };
        let mut text = serde_json::to_string_pretty(&report).unwrap();
        text.push('\n');
        text
    }
}

/// Scheduling-specific solve switches beyond the engine config.
#[derive(Debug, Clone, Default)]
pub struct SchedOptions {
    pub inner_iters: usize,
    /// Append tasks in sequence order instead of best-point insertion.
    pub append: bool,
    /// Score by number of late tasks instead of total cost.
    pub late_count: bool,
    /// Fixed initial priority order, replacing the noisy heuristic.
    pub initial_order: Option<Vec<usize>>,
}

impl SchedOptions {
    pub fn with_inner_iters(inner_iters: usize) -> Self {
        Self {
            inner_iters,
            ..Default::default()
        }
    }

    fn domain<'a>(&self, instance: &'a SchedInstance, noise: f64) -> SchedDomain<'a> {
        let mut domain = SchedDomain::new(instance)
            .with_inner_iters(self.inner_iters)
            .with_heuristic_noise(noise);
        if self.append {
            domain = domain.with_mode(swo::sched::ConstructionMode::Append);
        }
        if self.late_count {
            domain = domain.with_objective(swo::sched::Objective::LateTaskCount);
        }
        if let Some(order) = &self.initial_order {
            domain = domain.with_initial_sequence(swo::engine::PrioritySequence::new(order.clone()));
        }
        domain
    }
}

/// Runs `runs` seeded engine runs on a scheduling instance. Run `i` uses
/// seed `base_seed + i`.
pub fn solve_sched_batch(
    instance: &SchedInstance,
    base_cfg: &EngineConfig,
    runs: usize,
    options: &SchedOptions,
    label: &str,
) -> Result<SolveReport, CliError> {
    let mut rows = Vec::with_capacity(runs);
    for i in 0..runs {
        let mut cfg = base_cfg.clone();
        cfg.seed = base_cfg.seed.wrapping_add(i as u64);
        let mut domain = options.domain(instance, cfg.noise);
        let t0 = Instant::now();
        let result = engine::run(&mut domain, &cfg).map_err(|e| CliError(e.to_string()))?;
        rows.push(RunRow {
            seed: cfg.seed,
            best_score: result.best_score,
            iteration_found: result.iteration_found,
            iterations_run: result.iterations_run,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(SolveReport::aggregate(
        label.to_string(),
        DomainKind::Sched,
        rows,
    ))
}

/// Runs `runs` seeded engine runs on a graph. Returns the report and the best
/// assignment found across all runs.
pub fn solve_color_batch(
    graph: &Graph,
    base_cfg: &EngineConfig,
    coloring_cfg: &ColoringConfig,
    runs: usize,
    label: &str,
) -> Result<(SolveReport, Vec<usize>), CliError> {
    let mut rows = Vec::with_capacity(runs);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for i in 0..runs {
        let mut cfg = base_cfg.clone();
        cfg.seed = base_cfg.seed.wrapping_add(i as u64);
        let t0 = Instant::now();
        let result =
            coloring::solve_coloring(graph, &cfg, coloring_cfg).map_err(|e| CliError(e.to_string()))?;
        if best.as_ref().is_none_or(|(s, _)| result.best_score < *s) {
            best = Some((result.best_score, result.best_solution.assignment.clone()));
        }
        rows.push(RunRow {
            seed: cfg.seed,
            best_score: result.best_score,
            iteration_found: result.iteration_found,
            iterations_run: result.iterations_run,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    Ok((
        SolveReport::aggregate(label.to_string(), DomainKind::Coloring, rows),
        best.unwrap().1,
    ))
}

/// One row of the restart-cutoff study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub restart_cutoff: usize,
    pub threshold: f64,
    pub success_rate: f64,
    /// Mean total iterations per success; `None` when nothing succeeded.
    pub mean_cost: Option<f64>,
    pub sample_size: usize,
}

/// Partitions a fixed iteration budget into independent passes of length
/// `cutoff` (so larger cutoffs get fewer passes), and measures, per
/// threshold, how often a pass reaches it and at what iteration cost.
/// Failed passes still spend their iterations, so the mean cost of a
/// success includes the budget wasted on failures.
pub fn restart_study(
    instance: &SchedInstance,
    cutoffs: &[usize],
    thresholds: &[f64],
    budget_per_cutoff: usize,
    base_seed: u64,
    inner_iters: usize,
) -> Result<Vec<StudyRow>, CliError> {
    if cutoffs.is_empty() {
        return err("restart study needs at least one cutoff");
    }
    if thresholds.is_empty() {
        return err("restart study needs at least one threshold");
    }
    if cutoffs.iter().any(|&c| c == 0) {
        return err("cutoffs must be positive");
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted != thresholds {
        return err("thresholds must be sorted ascending");
    }

    let mut rows = Vec::new();
    for (ci, &cutoff) in cutoffs.iter().enumerate() {
        let sample_size = budget_per_cutoff / cutoff;
        if sample_size == 0 {
            return err(format!(
                "budget {budget_per_cutoff} smaller than cutoff {cutoff}"
            ));
        }
        // consumed[t][pass] = iterations until threshold t was reached, or
        // the full cutoff if it never was.
        let mut consumed = vec![Vec::with_capacity(sample_size); thresholds.len()];
        let mut successes = vec![0usize; thresholds.len()];
        for pass in 0..sample_size {
            let mut cfg = EngineConfig::new(
                base_seed
                    .wrapping_add((ci as u64) << 32)
                    .wrapping_add(pass as u64),
            );
            cfg.max_iterations = cutoff;
            cfg.restart = Restart::Off;
            cfg.trace = true;
            let mut domain = SchedDomain::new(instance)
                .with_inner_iters(inner_iters)
                .with_heuristic_noise(cfg.noise);
            let result = engine::run(&mut domain, &cfg).map_err(|e| CliError(e.to_string()))?;
            for (ti, &threshold) in thresholds.iter().enumerate() {
                let mut best = f64::INFINITY;
                let mut hit = None;
                for rec in &result.trajectory {
                    best = best.min(rec.score);
                    if best <= threshold {
                        hit = Some(rec.iteration);
                        break;
                    }
                }
                match hit {
                    Some(iter) => {
                        successes[ti] += 1;
                        consumed[ti].push(iter);
                    }
                    None => consumed[ti].push(cutoff),
                }
            }
        }
        for (ti, &threshold) in thresholds.iter().enumerate() {
            let total: usize = consumed[ti].iter().sum();
            rows.push(StudyRow {
                restart_cutoff: cutoff,
                threshold,
                success_rate: successes[ti] as f64 / sample_size as f64,
                mean_cost: (successes[ti] > 0).then(|| total as f64 / successes[ti] as f64),
                sample_size,
            });
        }
    }
    Ok(rows)
}

pub fn study_rows_to_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("restart_cutoff,threshold,success_rate,mean_cost,sample_size\n");
    for r in rows {
        let mean = r.mean_cost.map_or(String::new(), |m| format!("{m:.1}"));
        let _ = writeln!(
            out,
            "{},{},{:.4},{},{}",
            r.restart_cutoff, r.threshold, r.success_rate, mean, r.sample_size
        );
    }
    out
}

/// One cell of the coloring ablation grid.
#[derive(Debug, Clone, Serialize)]
pub struct AblationCell {
    pub grab: bool,
    pub blame: BlameVariant,
    pub prioritizer: Prioritizer,
    pub mean_colors: f64,
    pub mean_seconds: f64,
}

/// Runs the full 2x2x2 grid (grab x blame variant x prioritizer) with the
/// same seeds in every cell, averaging colors over all instances and runs.
pub fn run_ablation(
    graphs: &[(String, Graph)],
    base_cfg: &EngineConfig,
    runs: usize,
) -> Result<Vec<AblationCell>, CliError> {
    if graphs.is_empty() {
        return err("ablation needs at least one instance");
    }
    let mut cells = Vec::new();
    for grab in [true, false] {
        for blame in [BlameVariant::AllOutside, BlameVariant::FirstOnly] {
            for prioritizer in [Prioritizer::Sticky, Prioritizer::BlameSort] {
                let coloring_cfg = ColoringConfig {
                    grab_enabled: grab,
                    blame_variant: blame,
                    reuse_enabled: true,
                };
                let mut cfg = base_cfg.clone();
                cfg.prioritizer = prioritizer;
                let t0 = Instant::now();
                let mut total = 0.0;
                let mut count = 0usize;
                for (_, graph) in graphs {
                    let (report, _) =
                        solve_color_batch(graph, &cfg, &coloring_cfg, runs, "ablation")?;
                    total += report.rows.iter().map(|r| r.best_score).sum::<f64>();
                    count += report.rows.len();
                }
                cells.push(AblationCell {
                    grab,
                    blame,
                    prioritizer,
                    mean_colors: total / count as f64,
                    mean_seconds: t0.elapsed().as_secs_f64() / count as f64,
                });
            }
        }
    }
    Ok(cells)
}

pub fn ablation_spread(cells: &[AblationCell]) -> (f64, f64) {
    let best = cells
        .iter()
        .map(|c| c.mean_colors)
        .fold(f64::INFINITY, f64::min);
    let worst = cells
        .iter()
        .map(|c| c.mean_colors)
        .fold(f64::NEG_INFINITY, f64::max);
    (best, worst)
}

pub fn ablation_to_csv(cells: &[AblationCell], timing: bool) -> String {
    let mut out = String::from(if timing {
        "grab,blame,prioritizer,mean_colors,mean_seconds\n"
    } else {
        "grab,blame,prioritizer,mean_colors\n"
    });
    for c in cells {
        let _ = write!(
            out,
            "{},{},{},{}",
            if c.grab { "on" } else { "off" },
            match c.blame {
                BlameVariant::AllOutside => "all",
                BlameVariant::FirstOnly => "first",
            },
            match c.prioritizer {
                Prioritizer::Sticky => "sticky",
                Prioritizer::BlameSort => "sort",
            },
            c.mean_colors
        );
        if timing {
            let _ = write!(out, ",{:.3}", c.mean_seconds);
        }
        out.push('\n');
    }
    let (best, worst) = ablation_spread(cells);
    let _ = writeln!(out, "# best={best} worst={worst} spread={}", worst - best);
    out
}

/// A traced run: returns (trajectory CSV, initial-ordering CSV).
pub fn trace_run(
    spec: &ExperimentSpec,
    domain_kind: DomainKind,
    path: &Path,
    sched_options: &SchedOptions,
) -> Result<(String, String), CliError> {
    let mut cfg = spec.engine_config()?;
    cfg.trace = true;
    let trajectory = match domain_kind {
        DomainKind::Sched => {
            let instance = load_sched_instance(path)?;
            let mut domain = sched_options.domain(&instance, cfg.noise);
            engine::run(&mut domain, &cfg)
                .map_err(|e| CliError(e.to_string()))?
                .trajectory
        }
        DomainKind::Coloring => {
            let graph = load_graph(path)?;
            let result = coloring::solve_coloring(&graph, &cfg, &spec.coloring_config()?)
                .map_err(|e| CliError(e.to_string()))?;
            result.trajectory
        }
    };
    let mut csv = Vec::new();
    engine::write_trajectory_csv(&mut csv, &trajectory, true)?;
    let mut initial = String::from("element,position\n");
    if let Some(first) = trajectory.first() {
        for (id, &pos) in first.positions.iter().enumerate() {
            let _ = writeln!(initial, "{id},{pos}");
        }
    }
    Ok((String::from_utf8(csv).unwrap(), initial))
}

pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, content)
                .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}
