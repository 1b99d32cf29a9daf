//! Parallel-line scheduling with sequence-dependent setups.
//!
//! Tasks carry a release time, a due date, a cable type, and per-line
//! durations (absence meaning the line is incompatible). Consecutive tasks on
//! a line pay a setup time depending on the ordered pair of cable types; some
//! pairs are infeasible. The objective is a weighted sum of lateness and
//! setup time, plus a large penalty for any infeasible adjacency the
//! constructor could not avoid.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    self, BlameVector, Domain, ElementId, EngineConfig, Prioritizer, PrioritySequence, Restart,
    SwoRng,
};

pub type Time = i64;
pub type LineId = usize;

/// Default penalty charged per infeasible adjacency left in a schedule.
pub const DEFAULT_P_INF: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedTask {
    pub id: ElementId,
    pub cable_type: usize,
    pub release: Time,
    pub due: Time,
    /// `durations[line]` is the processing time on that line, `None` if the
    /// line is incompatible.
    pub durations: Vec<Option<Time>>,
}

impl SchedTask {
    pub fn compatible_lines(&self) -> impl Iterator<Item = LineId> + '_ {
        self.durations
            .iter()
            .enumerate()
            .filter_map(|(l, d)| d.map(|_| l))
    }

    pub fn compatible_line_count(&self) -> usize {
        self.durations.iter().flatten().count()
    }

    pub fn min_duration(&self) -> Time {
        self.durations.iter().flatten().copied().min().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedInstance {
    pub line_count: usize,
    pub w_late: f64,
    pub w_setup: f64,
    pub p_inf: f64,
    pub tasks: Vec<SchedTask>,
    /// `setups[from_type][to_type]`; `None` means the changeover is infeasible.
    pub setups: Vec<Vec<Option<Time>>>,
}

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("task {0} has no compatible line")]
    NoCompatibleLine(ElementId),
    #[error("task {0} has a non-positive duration")]
    NonPositiveDuration(ElementId),
    #[error("task ids are not the contiguous range 0..n")]
    NonContiguousIds,
    #[error("setup matrix does not cover every ordered type pair")]
    IncompleteSetups,
    #[error("negative time value on task {0}")]
    NegativeTime(ElementId),
    #[error("infeasible adjacency between tasks {0} and {1}")]
    InfeasibleAdjacency(ElementId, ElementId),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SchedInstance {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Setup time from a task of type `a` to a task of type `b`.
    pub fn setup(&self, a: usize, b: usize) -> Option<Time> {
        self.setups[a][b]
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        let type_count = self.setups.len();
        if self.setups.iter().any(|row| row.len() != type_count) {
            return Err(SchedError::IncompleteSetups);
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if t.id != i {
                return Err(SchedError::NonContiguousIds);
            }
            if t.cable_type >= type_count {
                return Err(SchedError::IncompleteSetups);
            }
            if t.compatible_line_count() == 0 || t.durations.len() != self.line_count {
                return Err(SchedError::NoCompatibleLine(t.id));
            }
            if t.durations.iter().flatten().any(|&d| d <= 0) {
                return Err(SchedError::NonPositiveDuration(t.id));
            }
            if t.release < 0 || t.due < 0 {
                return Err(SchedError::NegativeTime(t.id));
            }
        }
        Ok(())
    }
}

/// A complete assignment of tasks to lines with per-line orders and start
/// times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Ordered task ids per line.
    pub lines: Vec<Vec<ElementId>>,
    /// Start time per task.
    pub start: Vec<Time>,
    /// Line per task.
    pub line_of: Vec<LineId>,
}

impl Schedule {
    pub fn completion(&self, task: ElementId, instance: &SchedInstance) -> Time {
        self.start[task] + instance.tasks[task].durations[self.line_of[task]].unwrap()
    }

    pub fn lateness(&self, task: ElementId, instance: &SchedInstance) -> Time {
        (self.completion(task, instance) - instance.tasks[task].due).max(0)
    }

    /// Exports `line,position,task,start,completion,late_by` CSV rows.
    pub fn to_csv(&self, instance: &SchedInstance) -> String {
        let mut out = String::from("line,position,task,start,completion,late_by\n");
        for (line, order) in self.lines.iter().enumerate() {
            for (pos, &t) in order.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    line,
                    pos,
                    t,
                    self.start[t],
                    self.completion(t, instance),
                    self.lateness(t, instance)
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub lateness_cost: f64,
    pub setup_cost: f64,
    pub infeasibility_penalty: f64,
    pub total: f64,
}

/// Earliest-start times for `order` on `line`: each task starts at its
/// release or at its predecessor's completion plus setup, whichever is later.
/// Fails on the first infeasible adjacency.
pub fn earliest_start_timing(
    order: &[ElementId],
    line: LineId,
    instance: &SchedInstance,
) -> Result<Vec<Time>, SchedError> {
    let mut starts = Vec::with_capacity(order.len());
    let mut prev: Option<ElementId> = None;
    let mut prev_completion = 0;
    for &t in order {
        let task = &instance.tasks[t];
        let start = match prev {
            None => task.release,
            Some(p) => {
                let setup = instance
                    .setup(instance.tasks[p].cable_type, task.cable_type)
                    .ok_or(SchedError::InfeasibleAdjacency(p, t))?;
                task.release.max(prev_completion + setup)
            }
        };
        starts.push(start);
        prev_completion = start + task.durations[line].unwrap();
        prev = Some(t);
    }
    Ok(starts)
}

/// Same timing law but tolerating infeasible adjacencies, which contribute no
/// setup time (their cost shows up as `p_inf` in the objective instead).
fn lenient_timing(order: &[ElementId], line: LineId, instance: &SchedInstance) -> Vec<Time> {
    let mut starts = Vec::with_capacity(order.len());
    let mut prev: Option<ElementId> = None;
    let mut prev_completion = 0;
    for &t in order {
        let task = &instance.tasks[t];
        let start = match prev {
            None => task.release,
            Some(p) => {
                let setup = instance
                    .setup(instance.tasks[p].cable_type, task.cable_type)
                    .unwrap_or(0);
                task.release.max(prev_completion + setup)
            }
        };
        starts.push(start);
        prev_completion = start + task.durations[line].unwrap();
        prev = Some(t);
    }
    starts
}

/// Total cost of one line's order: lateness, setups, infeasibility penalties.
pub fn line_cost(order: &[ElementId], line: LineId, instance: &SchedInstance) -> f64 {
    let starts = lenient_timing(order, line, instance);
    let mut lateness = 0.0;
    let mut setup = 0.0;
    let mut inf = 0.0;
    for (k, &t) in order.iter().enumerate() {
        let task = &instance.tasks[t];
        let completion = starts[k] + task.durations[line].unwrap();
        lateness += instance.w_late * (completion - task.due).max(0) as f64;
        if k > 0 {
            match instance.setup(instance.tasks[order[k - 1]].cable_type, task.cable_type) {
                Some(s) => setup += instance.w_setup * s as f64,
                None => inf += instance.p_inf,
            }
        }
    }
    lateness + setup + inf
}

pub fn schedule_cost(s: &Schedule, instance: &SchedInstance) -> CostBreakdown {
    let mut lateness = 0.0;
    let mut setup = 0.0;
    let mut inf = 0.0;
    for (line, order) in s.lines.iter().enumerate() {
        for (k, &t) in order.iter().enumerate() {
            lateness += instance.w_late * s.lateness(t, instance) as f64;
            if k > 0 {
                match instance.setup(
                    instance.tasks[order[k - 1]].cable_type,
                    instance.tasks[t].cable_type,
                ) {
                    Some(st) => setup += instance.w_setup * st as f64,
                    None => inf += instance.p_inf,
                }
            }
        }
        let _ = line;
    }
    CostBreakdown {
        lateness_cost: lateness,
        setup_cost: setup,
        infeasibility_penalty: inf,
        total: lateness + setup + inf,
    }
}

/// Lower bound on the cost any schedule must charge to `task`: the lateness
/// it would incur even alone on its best line. The setup floor is zero, since
/// a task may sit first or last on a line.
pub fn min_possible_cost(task: &SchedTask, instance: &SchedInstance) -> f64 {
    let best_completion = task
        .compatible_lines()
        .map(|l| task.release + task.durations[l].unwrap())
        .min()
        .unwrap();
    instance.w_late * (best_completion - task.due).max(0) as f64
}

/// Excess-cost blame: each task's actual share (its lateness, plus half of
/// each adjacent setup and infeasibility penalty) minus its lower bound,
/// clamped at zero.
pub fn analyze_schedule(s: &Schedule, instance: &SchedInstance) -> BlameVector {
    let n = instance.task_count();
    let mut actual = vec![0.0_f64; n];
    for order in &s.lines {
        for (k, &t) in order.iter().enumerate() {
            actual[t] += instance.w_late * s.lateness(t, instance) as f64;
            if k > 0 {
                let p = order[k - 1];
                let share = match instance
                    .setup(instance.tasks[p].cable_type, instance.tasks[t].cable_type)
                {
                    Some(st) => instance.w_setup * st as f64 / 2.0,
                    None => instance.p_inf / 2.0,
                };
                actual[p] += share;
                actual[t] += share;
            }
        }
    }
    BlameVector::new(
        (0..n)
            .map(|t| (actual[t] - min_possible_cost(&instance.tasks[t], instance)).max(0.0))
            .collect(),
    )
}

/// Initial heuristic: ascending compatible-line count (fewer options first),
/// jittered by `eps`; ties break by task id when `eps` is zero.
pub fn initial_sequence_sched(
    instance: &SchedInstance,
    rng: &mut SwoRng,
    eps: f64,
) -> PrioritySequence {
    let keys: Vec<f64> = instance
        .tasks
        .iter()
        .map(|t| {
            let noise = if eps > 0.0 {
                rng.random_range(-eps..=eps)
            } else {
                0.0
            };
            t.compatible_line_count() as f64 + noise
        })
        .collect();
    PrioritySequence::from_keys(&keys)
}

fn rebuild_schedule(lines: Vec<Vec<ElementId>>, instance: &SchedInstance) -> Schedule {
    let n = instance.task_count();
    let mut start = vec![0; n];
    let mut line_of = vec![0; n];
    for (line, order) in lines.iter().enumerate() {
        let starts = lenient_timing(order, line, instance);
        for (k, &t) in order.iter().enumerate() {
            start[t] = starts[k];
            line_of[t] = line;
        }
    }
    Schedule {
        lines,
        start,
        line_of,
    }
}

fn pick_min<T: Copy>(candidates: &[(T, f64)], rng: &mut SwoRng) -> T {
    let best = candidates
        .iter()
        .map(|&(_, c)| c)
        .fold(f64::INFINITY, f64::min);
    let ties: Vec<T> = candidates
        .iter()
        .filter(|&&(_, c)| c <= best)
        .map(|&(x, _)| x)
        .collect();
    *ties.choose(rng).unwrap()
}

/// Greedy insertion constructor: each task, in sequence order, is inserted at
/// the insertion point (any position on any compatible line) with the
/// smallest increase in total cost under earliest-start retiming of that
/// line. Ties break randomly. Points that would create an infeasible
/// adjacency are skipped; if every point is infeasible the task is appended
/// to the compatible-line end with the smallest penalized cost. With
/// `inner_iters > 0`, each line is then improved independently by a nested
/// in-line run of the engine.
pub fn construct_schedule(
    seq: &PrioritySequence,
    instance: &SchedInstance,
    rng: &mut SwoRng,
    inner_iters: usize,
) -> Schedule {
    let mut lines: Vec<Vec<ElementId>> = vec![Vec::new(); instance.line_count];
    let mut cost: Vec<f64> = vec![0.0; instance.line_count];

    for &t in seq.order() {
        let task = &instance.tasks[t];
        let mut candidates: Vec<((LineId, usize), f64)> = Vec::new();
        for line in task.compatible_lines() {
            let order = &lines[line];
            for pos in 0..=order.len() {
                let pred_ok = pos == 0
                    || instance
                        .setup(instance.tasks[order[pos - 1]].cable_type, task.cable_type)
                        .is_some();
                let succ_ok = pos == order.len()
                    || instance
                        .setup(task.cable_type, instance.tasks[order[pos]].cable_type)
                        .is_some();
                if !(pred_ok && succ_ok) {
                    continue;
                }
                let mut trial = order.clone();
                trial.insert(pos, t);
                candidates.push(((line, pos), line_cost(&trial, line, instance) - cost[line]));
            }
        }
        if candidates.is_empty() {
            // Every insertion point is infeasible; take the cheapest
            // compatible-line end, penalty included.
            for line in task.compatible_lines() {
                let mut trial = lines[line].clone();
                trial.push(t);
                candidates.push((
                    (line, lines[line].len()),
                    line_cost(&trial, line, instance) - cost[line],
                ));
            }
        }
        let (line, pos) = pick_min(&candidates, rng);
        lines[line].insert(pos, t);
        cost[line] = line_cost(&lines[line], line, instance);
    }

    if inner_iters > 0 {
        for line in 0..instance.line_count {
            if lines[line].len() >= 2 {
                lines[line] = improve_line(&lines[line], line, instance, inner_iters, rng);
            }
        }
    }

    rebuild_schedule(lines, instance)
}

/// Nested per-line pass: a small engine run whose elements are the line's
/// tasks, whose constructor reinserts them one at a time at the best position
/// in that single line, and whose analyzer is the excess-cost rule restricted
/// to the line. Keeps whichever order scores best, never worse than the
/// input.
fn improve_line(
    order: &[ElementId],
    line: LineId,
    instance: &SchedInstance,
    inner_iters: usize,
    rng: &mut SwoRng,
) -> Vec<ElementId> {
    struct LineDomain<'a> {
        instance: &'a SchedInstance,
        line: LineId,
        tasks: Vec<ElementId>,
    }

    impl LineDomain<'_> {
        fn to_global(&self, local: &[usize]) -> Vec<ElementId> {
            local.iter().map(|&i| self.tasks[i]).collect()
        }
    }

    impl Domain for LineDomain<'_> {
        type Solution = Vec<usize>;

        fn element_count(&self) -> usize {
            self.tasks.len()
        }

        fn initial_sequence(&mut self, _rng: &mut SwoRng) -> PrioritySequence {
            PrioritySequence::identity(self.tasks.len())
        }

        fn construct(&mut self, seq: &PrioritySequence, rng: &mut SwoRng) -> Vec<usize> {
            let mut placed: Vec<usize> = Vec::new();
            for &local in seq.order() {
                let mut candidates: Vec<(usize, f64)> = Vec::new();
                for pos in 0..=placed.len() {
                    let mut trial = placed.clone();
                    trial.insert(pos, local);
                    candidates.push((
                        pos,
                        line_cost(&self.to_global(&trial), self.line, self.instance),
                    ));
                }
                let pos = pick_min(&candidates, rng);
                placed.insert(pos, local);
            }
            placed
        }

        fn score(&self, sol: &Vec<usize>) -> f64 {
            line_cost(&self.to_global(sol), self.line, self.instance)
        }

        fn analyze(&self, sol: &Vec<usize>) -> BlameVector {
            let global = self.to_global(sol);
            let starts = lenient_timing(&global, self.line, self.instance);
            let mut actual = vec![0.0_f64; self.tasks.len()];
            let pos_of: std::collections::HashMap<ElementId, usize> = self
                .tasks
                .iter()
                .enumerate()
                .map(|(i, &t)| (t, i))
                .collect();
            for (k, &t) in global.iter().enumerate() {
                let task = &self.instance.tasks[t];
                let completion = starts[k] + task.durations[self.line].unwrap();
                actual[pos_of[&t]] +=
                    self.instance.w_late * (completion - task.due).max(0) as f64;
                if k > 0 {
                    let p = global[k - 1];
                    let share = match self
                        .instance
                        .setup(self.instance.tasks[p].cable_type, task.cable_type)
                    {
                        Some(st) => self.instance.w_setup * st as f64 / 2.0,
                        None => self.instance.p_inf / 2.0,
                    };
                    actual[pos_of[&p]] += share;
                    actual[pos_of[&t]] += share;
                }
            }
            BlameVector::new(
                self.tasks
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        (actual[i] - min_possible_cost(&self.instance.tasks[t], self.instance))
                            .max(0.0)
                    })
                    .collect(),
            )
        }
    }

    let mut domain = LineDomain {
        instance,
        line,
        tasks: order.to_vec(),
    };
    let mut cfg = EngineConfig::new(rng.next_u64());
    cfg.max_iterations = inner_iters;
    cfg.prioritizer = Prioritizer::BlameSort;
    cfg.restart = Restart::Off;
    cfg.noise = 0.0;
    let result = engine::run(&mut domain, &cfg).expect("line has >= 2 tasks");
    let improved = domain.to_global(&result.best_solution);
    if line_cost(&improved, line, instance) < line_cost(order, line, instance) {
        improved
    } else {
        order.to_vec()
    }
}

/// How the full-schedule constructor places tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionMode {
    /// Best insertion point anywhere on any compatible line.
    Insertion,
    /// Append each task, in sequence order, to the end of the cheapest
    /// compatible line — the simple in-order constructor of the walkthrough
    /// example.
    Append,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Weighted lateness + setup + infeasibility penalties.
    TotalCost,
    /// Number of late tasks.
    LateTaskCount,
}

/// The scheduling domain plugged into the engine.
pub struct SchedDomain<'a> {
    pub instance: &'a SchedInstance,
    pub inner_iters: usize,
    pub heuristic_noise: f64,
    pub mode: ConstructionMode,
    pub objective: Objective,
    pub initial_override: Option<PrioritySequence>,
}

impl<'a> SchedDomain<'a> {
    pub fn new(instance: &'a SchedInstance) -> Self {
        Self {
            instance,
            inner_iters: 10,
            heuristic_noise: 0.5,
            mode: ConstructionMode::Insertion,
            objective: Objective::TotalCost,
            initial_override: None,
        }
    }

    pub fn with_inner_iters(mut self, iters: usize) -> Self {
        self.inner_iters = iters;
        self
    }

    pub fn with_heuristic_noise(mut self, eps: f64) -> Self {
        self.heuristic_noise = eps;
        self
    }

    pub fn with_mode(mut self, mode: ConstructionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_initial_sequence(mut self, seq: PrioritySequence) -> Self {
        self.initial_override = Some(seq);
        self
    }

    fn construct_append(&self, seq: &PrioritySequence, rng: &mut SwoRng) -> Schedule {
        let mut lines: Vec<Vec<ElementId>> = vec![Vec::new(); self.instance.line_count];
        let mut cost = vec![0.0; self.instance.line_count];
        for &t in seq.order() {
            let task = &self.instance.tasks[t];
            let mut candidates: Vec<(LineId, f64)> = Vec::new();
            for line in task.compatible_lines() {
                let mut trial = lines[line].clone();
                trial.push(t);
                candidates.push((line, line_cost(&trial, line, self.instance) - cost[line]));
            }
            let line = pick_min(&candidates, rng);
            lines[line].push(t);
            cost[line] = line_cost(&lines[line], line, self.instance);
        }
        rebuild_schedule(lines, self.instance)
    }
}

impl Domain for SchedDomain<'_> {
    type Solution = Schedule;

    fn element_count(&self) -> usize {
        self.instance.task_count()
    }

    fn initial_sequence(&mut self, rng: &mut SwoRng) -> PrioritySequence {
        match &self.initial_override {
            Some(seq) => seq.clone(),
            None => initial_sequence_sched(self.instance, rng, self.heuristic_noise),
        }
    }

    fn construct(&mut self, seq: &PrioritySequence, rng: &mut SwoRng) -> Schedule {
        match self.mode {
            ConstructionMode::Insertion => {
                construct_schedule(seq, self.instance, rng, self.inner_iters)
            }
            ConstructionMode::Append => self.construct_append(seq, rng),
        }
    }

    fn score(&self, s: &Schedule) -> f64 {
        match self.objective {
            Objective::TotalCost => schedule_cost(s, self.instance).total,
            Objective::LateTaskCount => (0..self.instance.task_count())
                .filter(|&t| s.lateness(t, self.instance) > 0)
                .count() as f64,
        }
    }

    fn analyze(&self, s: &Schedule) -> BlameVector {
        analyze_schedule(s, self.instance)
    }
}

/// Parameters for the synthetic instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Probability each line is compatible with a task, in (0, 1].
    pub compat_density: f64,
    pub type_count: usize,
    pub duration_range: (Time, Time),
    pub setup_range: (Time, Time),
    /// Probability an off-diagonal type pair has an infeasible setup.
    pub infeasible_prob: f64,
    /// Scales due-date slack; smaller is tighter.
    pub due_tightness: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            compat_density: 0.5,
            type_count: 6,
            duration_range: (5, 30),
            setup_range: (1, 10),
            infeasible_prob: 0.1,
            due_tightness: 0.6,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("compatibility density must be in (0, 1], got {0}")]
    BadDensity(f64),
    #[error("need at least one task, line, and type")]
    EmptyDimension,
    #[error("invalid range: lower bound above upper bound")]
    BadRange,
}

/// Deterministic synthetic instance generator. Every task is guaranteed at
/// least one compatible line.
pub fn generate_instance(
    n_tasks: usize,
    n_lines: usize,
    params: &GenParams,
    seed: u64,
) -> Result<SchedInstance, GenError> {
    use rand::SeedableRng;
    if !(params.compat_density > 0.0 && params.compat_density <= 1.0) {
        return Err(GenError::BadDensity(params.compat_density));
    }
    if n_tasks == 0 || n_lines == 0 || params.type_count == 0 {
        return Err(GenError::EmptyDimension);
    }
    if params.duration_range.0 > params.duration_range.1
        || params.setup_range.0 > params.setup_range.1
        || params.duration_range.0 <= 0
    {
        return Err(GenError::BadRange);
    }
    let mut rng = SwoRng::seed_from_u64(seed);

    let mut setups = vec![vec![None; params.type_count]; params.type_count];
    for a in 0..params.type_count {
        for b in 0..params.type_count {
            if a == b {
                setups[a][b] = Some(0);
            } else if rng.random_range(0.0..1.0) >= params.infeasible_prob {
                setups[a][b] = Some(rng.random_range(params.setup_range.0..=params.setup_range.1));
            }
        }
    }

    let avg_dur = (params.duration_range.0 + params.duration_range.1) as f64 / 2.0;
    let horizon = (avg_dur * n_tasks as f64 / n_lines as f64).ceil() as Time;

    let mut tasks = Vec::with_capacity(n_tasks);
    for id in 0..n_tasks {
        let cable_type = rng.random_range(0..params.type_count);
        let mut durations: Vec<Option<Time>> = (0..n_lines)
            .map(|_| {
                (rng.random_range(0.0..1.0) < params.compat_density).then(|| {
                    rng.random_range(params.duration_range.0..=params.duration_range.1)
                })
            })
            .collect();
        if durations.iter().all(|d| d.is_none()) {
            let line = rng.random_range(0..n_lines);
            durations[line] =
                Some(rng.random_range(params.duration_range.0..=params.duration_range.1));
        }
        let release = rng.random_range(0..=(horizon / 2).max(1));
        let min_dur = durations.iter().flatten().copied().min().unwrap();
        let slack = rng.random_range(0..=((horizon as f64 * params.due_tightness) as Time).max(1));
        tasks.push(SchedTask {
            id,
            cable_type,
            release,
            due: release + min_dur + slack,
            durations,
        });
    }

    let instance = SchedInstance {
        line_count: n_lines,
        w_late: 1.0,
        w_setup: 1.0,
        p_inf: DEFAULT_P_INF,
        tasks,
        setups,
    };
    debug_assert!(instance.validate().is_ok());
    Ok(instance)
}

/// The three-task single-line walkthrough instance: A(dur 10, due 20),
/// B(30, 40), C(30, 60), all released at 0, no setups. Scheduling the
/// sequences <C,A,B>, <B,A,C> and <A,C,B> in order yields lateness
/// (A:20, B:30), (A:20, C:10) and (B:30) respectively.
pub fn toy_instance() -> SchedInstance {
    let mk = |id, dur, due| SchedTask {
        id,
        cable_type: 0,
        release: 0,
        due,
        durations: vec![Some(dur)],
    };
    SchedInstance {
        line_count: 1,
        w_late: 1.0,
        w_setup: 1.0,
        p_inf: DEFAULT_P_INF,
        tasks: vec![mk(0, 10, 20), mk(1, 30, 40), mk(2, 30, 60)],
        setups: vec![vec![Some(0)]],
    }
}

// --- instance file format ---------------------------------------------

#[derive(Serialize, Deserialize)]
struct TaskFile {
    id: usize,
    #[serde(rename = "type")]
    cable_type: usize,
    release: Time,
    due: Time,
    durations: BTreeMap<String, Time>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    lines: usize,
    w_late: f64,
    w_setup: f64,
    #[serde(default = "default_p_inf")]
    p_inf: f64,
    tasks: Vec<TaskFile>,
    setups: Vec<Vec<Option<Time>>>,
}

fn default_p_inf() -> f64 {
    DEFAULT_P_INF
}

pub fn instance_to_json(instance: &SchedInstance) -> String {
    let file = InstanceFile {
        lines: instance.line_count,
        w_late: instance.w_late,
        w_setup: instance.w_setup,
        p_inf: instance.p_inf,
        tasks: instance
            .tasks
            .iter()
            .map(|t| TaskFile {
                id: t.id,
                cable_type: t.cable_type,
                release: t.release,
                due: t.due,
                durations: t
                    .durations
                    .iter()
                    .enumerate()
                    .filter_map(|(l, d)| d.map(|d| (l.to_string(), d)))
                    .collect(),
            })
            .collect(),
        setups: instance.setups.clone(),
    };
    serde_json::to_string_pretty(&file).unwrap()
}

pub fn instance_from_json(text: &str) -> Result<SchedInstance, SchedError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut tasks = Vec::with_capacity(file.tasks.len());
    for t in file.tasks {
        let mut durations = vec![None; file.lines];
        for (line, dur) in t.durations {
            let line: usize = line
                .parse()
                .map_err(|_| SchedError::NoCompatibleLine(t.id))?;
            if line >= file.lines {
                return Err(SchedError::NoCompatibleLine(t.id));
            }
            durations[line] = Some(dur);
        }
        tasks.push(SchedTask {
            id: t.id,
            cable_type: t.cable_type,
            release: t.release,
            due: t.due,
            durations,
        });
    }
    let instance = SchedInstance {
        line_count: file.lines,
        w_late: file.w_late,
        w_setup: file.w_setup,
        p_inf: file.p_inf,
        tasks,
        setups: file.setups,
    };
    instance.validate()?;
    Ok(instance)
}
