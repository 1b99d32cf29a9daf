//! The domain-agnostic Construct/Analyze/Prioritize loop.
//!
//! The engine owns a [`PrioritySequence`] (a permutation of element ids) and
//! repeatedly asks a [`Domain`] to construct a solution in that order, score
//! it, and assign per-element blame. The prioritizer then moves blamed
//! elements toward the front for the next construction. Periodic restarts
//! re-seed the sequence from the domain's noisy initial heuristic.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense element index in `[0, n)`.
pub type ElementId = usize;

/// The deterministic RNG used for every random draw in a run.
pub type SwoRng = ChaCha8Rng;

/// An ordered permutation of element ids; the engine's state in priority space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrioritySequence {
    order: Vec<ElementId>,
}

impl PrioritySequence {
    /// Builds a sequence from an explicit order. Panics if `order` is not a
    /// permutation of `[0, n)`.
    pub fn new(order: Vec<ElementId>) -> Self {
        let n = order.len();
        let mut seen = vec![false; n];
        for &id in &order {
            assert!(id < n && !seen[id], "order is not a permutation of [0, n)");
            seen[id] = true;
        }
        Self { order }
    }

    /// The identity permutation `0, 1, ..., n-1`.
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[ElementId] {
        &self.order
    }

    /// Inverse view: `positions()[id]` is the sequence index of `id`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &id) in self.order.iter().enumerate() {
            pos[id] = i;
        }
        pos
    }

    /// Sorts elements by a per-element key, ascending and stable.
    pub fn from_keys(keys: &[f64]) -> Self {
        let mut order: Vec<ElementId> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
        Self { order }
    }
}

/// Per-element non-negative blame produced by a domain analyzer.
#[derive(Debug, Clone, PartialEq)]
pub struct BlameVector {
    blame: Vec<f64>,
}

impl BlameVector {
    pub fn new(blame: Vec<f64>) -> Self {
        debug_assert!(blame.iter().all(|&b| b >= 0.0 && b.is_finite()));
        Self { blame }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            blame: vec![0.0; n],
        }
    }

    pub fn get(&self, id: ElementId) -> f64 {
        self.blame[id]
    }

    pub fn len(&self) -> usize {
        self.blame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blame.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.blame.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.blame.iter().cloned().fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.blame
    }
}

/// Restart policy: re-seed the sequence from the initial heuristic every so
/// many iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Restart {
    /// Never restart.
    Off,
    /// Restart every `cutoff` iterations since the last (re)start.
    Every(usize),
    /// Restart every `ceil(n/2)` iterations, n being the element count.
    HalfN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prioritizer {
    /// Bounded-displacement sort: elements move forward a distance that
    /// grows with blame, so reaching the front takes sustained blame.
    Sticky,
    /// Plain stable sort by blame, descending.
    BlameSort,
}

/// Engine parameters. `movement_limit = None` means `L = n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub max_iterations: usize,
    pub restart: Restart,
    pub prioritizer: Prioritizer,
    pub movement_limit: Option<usize>,
    pub noise: f64,
    pub seed: u64,
    pub target_score: Option<f64>,
    pub trace: bool,
}

impl EngineConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_iterations: 1000,
            restart: Restart::HalfN,
            prioritizer: Prioritizer::Sticky,
            movement_limit: None,
            noise: 0.5,
            seed,
            target_score: None,
            trace: false,
        }
    }

    fn validate(&self, n: usize) -> Result<(), EngineError> {
        if n == 0 {
            return Err(EngineError::EmptyDomain);
        }
        if self.max_iterations == 0 {
            return Err(EngineError::ZeroIterations);
        }
        if let Restart::Every(0) = self.restart {
            return Err(EngineError::ZeroRestartCutoff);
        }
        if self.movement_limit == Some(0) {
            return Err(EngineError::ZeroMovementLimit);
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(EngineError::BadNoise(self.noise));
        }
        Ok(())
    }

    fn restart_cutoff(&self, n: usize) -> Option<usize> {
        match self.restart {
            Restart::Off => None,
            Restart::Every(c) => Some(c),
            Restart::HalfN => Some(n.div_ceil(2)),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("domain has no elements")]
    EmptyDomain,
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error("restart cutoff must be at least 1")]
    ZeroRestartCutoff,
    #[error("movement limit must be at least 1")]
    ZeroMovementLimit,
    #[error("noise amplitude must be finite and non-negative, got {0}")]
    BadNoise(f64),
}

/// One row of a traced run: the sequence and score of a single iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub score: f64,
    /// `positions[id]` = sequence index of element `id` this iteration.
    pub positions: Vec<usize>,
    pub total_blame: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<S> {
    pub best_score: f64,
    pub best_solution: S,
    pub iteration_found: usize,
    pub iterations_run: usize,
    pub restarts_performed: usize,
    pub trajectory: Vec<TrajectoryRecord>,
}

/// A problem domain pluggable into the engine.
///
/// `construct` must be total: every sequence yields a solution, possibly one
/// carrying penalty-bearing flaws. `score` and `analyze` must be
/// deterministic functions of the solution.
pub trait Domain {
    type Solution: Clone;

    fn element_count(&self) -> usize;

    /// The noisy domain heuristic used both at start and on every restart.
    fn initial_sequence(&mut self, rng: &mut SwoRng) -> PrioritySequence;

    fn construct(&mut self, seq: &PrioritySequence, rng: &mut SwoRng) -> Self::Solution;

    /// Lower is better.
    fn score(&self, solution: &Self::Solution) -> f64;

    fn analyze(&self, solution: &Self::Solution) -> BlameVector;
}

/// Stable sort by blame, descending. Equal-blame elements keep their
/// relative order from `seq`.
pub fn blame_sort(seq: &PrioritySequence, blame: &BlameVector) -> PrioritySequence {
    let mut order = seq.order().to_vec();
    order.sort_by(|&a, &b| blame.get(b).partial_cmp(&blame.get(a)).unwrap());
    PrioritySequence { order }
}

/// Bounded-displacement "sticky" sort.
///
/// Each element's sort key is its current index minus a displacement of
/// `ceil(L * blame / max_blame)` positions, plus uniform jitter in
/// `[-eps, +eps]`. Keys are sorted ascending, stably, so zero-blame elements
/// never move forward and any positive blame moves an element at least one
/// position of key credit. Travelling from the back to the front takes high
/// blame over several iterations.
pub fn sticky_sort(
    seq: &PrioritySequence,
    blame: &BlameVector,
    movement_limit: usize,
    eps: f64,
    rng: &mut SwoRng,
) -> PrioritySequence {
    assert!(movement_limit >= 1);
    assert!(eps >= 0.0);
    let n = seq.len();
    let b_max = blame.max();
    let mut keys = vec![0.0_f64; n];
    for (i, &id) in seq.order().iter().enumerate() {
        let displacement = if b_max > 0.0 {
            (movement_limit as f64 * blame.get(id) / b_max).ceil()
        } else {
            0.0
        };
        let noise = if eps > 0.0 {
            rng.random_range(-eps..=eps)
        } else {
            0.0
        };
        keys[i] = i as f64 - displacement + noise;
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
    PrioritySequence {
        order: indices.iter().map(|&i| seq.order()[i]).collect(),
    }
}

/// Runs the Construct/Analyze/Prioritize loop.
///
/// Every `restart` cutoff iterations since the last (re)start the sequence is
/// replaced by a fresh `initial_sequence`; otherwise the configured
/// prioritizer reorders it from the blame vector. The incumbent is updated on
/// strict improvement only. All randomness comes from a single generator
/// seeded by `config.seed`, so identical inputs give identical results.
pub fn run<D: Domain>(
    domain: &mut D,
    config: &EngineConfig,
) -> Result<RunResult<D::Solution>, EngineError> {
    let n = domain.element_count();
    config.validate(n)?;
    let movement_limit = config.movement_limit.unwrap_or(n).max(1);
    let cutoff = config.restart_cutoff(n);
    let mut rng = SwoRng::seed_from_u64(config.seed);

    let mut seq = domain.initial_sequence(&mut rng);
    assert_eq!(seq.len(), n, "initial sequence length must equal n");

    let mut best: Option<(f64, D::Solution, usize)> = None;
    let mut trajectory = Vec::new();
    let mut restarts = 0usize;
    let mut since_restart = 0usize;
    let mut iterations_run = 0usize;

    for iteration in 1..=config.max_iterations {
        iterations_run = iteration;
        let solution = domain.construct(&seq, &mut rng);
        let score = domain.score(&solution);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, solution.clone(), iteration));
        }
        let blame = domain.analyze(&solution);
        debug_assert_eq!(blame.len(), n);
        if config.trace {
            trajectory.push(TrajectoryRecord {
                iteration,
                score,
                positions: seq.positions(),
                total_blame: blame.total(),
            });
        }
        if config
            .target_score
            .is_some_and(|t| best.as_ref().unwrap().0 <= t)
        {
            break;
        }
        if iteration == config.max_iterations {
            break;
        }
        since_restart += 1;
        if cutoff.is_some_and(|c| since_restart >= c) {
            seq = domain.initial_sequence(&mut rng);
            since_restart = 0;
            restarts += 1;
        } else {
            seq = match config.prioritizer {
                Prioritizer::BlameSort => blame_sort(&seq, &blame),
                Prioritizer::Sticky => {
                    sticky_sort(&seq, &blame, movement_limit, config.noise, &mut rng)
                }
            };
        }
    }

    let (best_score, best_solution, iteration_found) = best.unwrap();
    Ok(RunResult {
        best_score,
        best_solution,
        iteration_found,
        iterations_run,
        restarts_performed: restarts,
        trajectory,
    })
}

/// Writes a trajectory as CSV: `iteration,score,total_blame` plus
/// `pos_<id>` columns when `with_positions` is set.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    records: &[TrajectoryRecord],
    with_positions: bool,
) -> std::io::Result<()> {
    let n = records.first().map_or(0, |r| r.positions.len());
    write!(w, "iteration,score,total_blame")?;
    if with_positions {
        for id in 0..n {
            write!(w, ",pos_{id}")?;
        }
    }
    writeln!(w)?;
    for r in records {
        write!(w, "{},{},{}", r.iteration, r.score, r.total_blame)?;
        if with_positions {
            for &p in &r.positions {
                write!(w, ",{p}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(order: &[usize]) -> PrioritySequence {
        PrioritySequence::new(order.to_vec())
    }

    fn blame(values: &[f64]) -> BlameVector {
        BlameVector::new(values.to_vec())
    }

    // Toy walkthrough tasks: A=0, B=1, C=2.
    #[test]
    fn blame_sort_descends() {
        // <C,A,B> with blame A=20, B=30, C=0 -> <B,A,C>
        let s = blame_sort(&seq(&[2, 0, 1]), &blame(&[20.0, 30.0, 0.0]));
        assert_eq!(s.order(), &[1, 0, 2]);
        // <B,A,C> with blame A=20, C=10, B=0 -> <A,C,B>
        let s = blame_sort(&seq(&[1, 0, 2]), &blame(&[20.0, 0.0, 10.0]));
        assert_eq!(s.order(), &[0, 2, 1]);
    }

    #[test]
    fn blame_sort_is_stable_on_ties() {
        let s = blame_sort(&seq(&[2, 0, 1]), &blame(&[5.0, 5.0, 5.0]));
        assert_eq!(s.order(), &[2, 0, 1]);
    }

    #[test]
    fn sticky_sort_zero_blame_zero_noise_is_identity() {
        let mut rng = SwoRng::seed_from_u64(0);
        let s = sticky_sort(&seq(&[3, 1, 0, 2]), &blame(&[0.0; 4]), 4, 0.0, &mut rng);
        assert_eq!(s.order(), &[3, 1, 0, 2]);
    }

    #[test]
    fn sticky_sort_displacement_example() {
        // <C,A,B> at indices 0,1,2 with blame C=0, A=20, B=30, L=3:
        // keys C:0, A:1-2=-1, B:2-3=-1 -> stable order <A,B,C>.
        let mut rng = SwoRng::seed_from_u64(0);
        let s = sticky_sort(
            &seq(&[2, 0, 1]),
            &blame(&[20.0, 30.0, 0.0]),
            3,
            0.0,
            &mut rng,
        );
        assert_eq!(s.order(), &[0, 1, 2]);
    }

    #[test]
    fn sticky_sort_single_blamed_element_jumps_front() {
        // <w,x,y,z> ids 0..3, blame z=10 others 0, L=4:
        // z key 3-4=-1, others keep 0..2 -> <z,w,x,y>.
        let mut rng = SwoRng::seed_from_u64(0);
        let s = sticky_sort(
            &seq(&[0, 1, 2, 3]),
            &blame(&[0.0, 0.0, 0.0, 10.0]),
            4,
            0.0,
            &mut rng,
        );
        assert_eq!(s.order(), &[3, 0, 1, 2]);
    }

    /// A domain whose score is the sum over elements of position * weight,
    /// blaming heavy elements; cheap and fully deterministic for
    /// engine-contract tests.
    struct WeightedOrder {
        weights: Vec<f64>,
    }

    impl Domain for WeightedOrder {
        type Solution = Vec<usize>;

        fn element_count(&self) -> usize {
            self.weights.len()
        }

        fn initial_sequence(&mut self, _rng: &mut SwoRng) -> PrioritySequence {
            PrioritySequence::identity(self.weights.len())
        }

        fn construct(&mut self, seq: &PrioritySequence, _rng: &mut SwoRng) -> Vec<usize> {
            seq.order().to_vec()
        }

        fn score(&self, sol: &Vec<usize>) -> f64 {
            sol.iter()
                .enumerate()
                .map(|(pos, &id)| pos as f64 * self.weights[id])
                .sum()
        }

        fn analyze(&self, sol: &Vec<usize>) -> BlameVector {
            let mut b = vec![0.0; sol.len()];
            for (pos, &id) in sol.iter().enumerate() {
                b[id] = pos as f64 * self.weights[id];
            }
            BlameVector::new(b)
        }
    }

    #[test]
    fn run_rejects_empty_domain_and_zero_iterations() {
        let mut d = WeightedOrder { weights: vec![] };
        let cfg = EngineConfig::new(1);
        assert_eq!(run(&mut d, &cfg), Err(EngineError::EmptyDomain));

        let mut d = WeightedOrder {
            weights: vec![1.0, 2.0],
        };
        let mut cfg = EngineConfig::new(1);
        cfg.max_iterations = 0;
        assert_eq!(run(&mut d, &cfg), Err(EngineError::ZeroIterations));
        let mut cfg = EngineConfig::new(1);
        cfg.restart = Restart::Every(0);
        assert_eq!(run(&mut d, &cfg), Err(EngineError::ZeroRestartCutoff));
    }

    #[test]
    fn run_single_iteration_constructs_once() {
        let mut d = WeightedOrder {
            weights: vec![3.0, 1.0, 2.0],
        };
        let mut cfg = EngineConfig::new(7);
        cfg.max_iterations = 1;
        let r = run(&mut d, &cfg).unwrap();
        assert_eq!(r.iterations_run, 1);
        assert_eq!(r.iteration_found, 1);
        assert_eq!(r.best_solution, vec![0, 1, 2]);
    }

    #[test]
    fn run_is_deterministic_for_fixed_seed() {
        let cfg = {
            let mut c = EngineConfig::new(42);
            c.max_iterations = 50;
            c.trace = true;
            c
        };
        let mut d1 = WeightedOrder {
            weights: vec![5.0, 1.0, 4.0, 2.0, 3.0],
        };
        let mut d2 = WeightedOrder {
            weights: vec![5.0, 1.0, 4.0, 2.0, 3.0],
        };
        let r1 = run(&mut d1, &cfg).unwrap();
        let r2 = run(&mut d2, &cfg).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn run_counts_restarts() {
        let mut d = WeightedOrder {
            weights: vec![1.0, 2.0, 3.0, 4.0],
        };
        let mut cfg = EngineConfig::new(0);
        cfg.max_iterations = 10;
        cfg.restart = Restart::Every(3);
        let r = run(&mut d, &cfg).unwrap();
        // Restart happens after iterations 3, 6, 9; none after the final one.
        assert_eq!(r.restarts_performed, 3);
    }

    #[test]
    fn run_stops_at_target_score() {
        let mut d = WeightedOrder {
            weights: vec![1.0, 2.0],
        };
        let mut cfg = EngineConfig::new(0);
        cfg.max_iterations = 100;
        cfg.target_score = Some(1e18);
        let r = run(&mut d, &cfg).unwrap();
        assert_eq!(r.iterations_run, 1);
    }

    #[test]
    fn zero_blame_zero_noise_is_a_fixed_point() {
        struct ZeroBlame;
        impl Domain for ZeroBlame {
            type Solution = Vec<usize>;
            fn element_count(&self) -> usize {
                4
            }
            fn initial_sequence(&mut self, _rng: &mut SwoRng) -> PrioritySequence {
                PrioritySequence::new(vec![2, 0, 3, 1])
            }
            fn construct(&mut self, seq: &PrioritySequence, _rng: &mut SwoRng) -> Vec<usize> {
                seq.order().to_vec()
            }
            fn score(&self, _sol: &Vec<usize>) -> f64 {
                1.0
            }
            fn analyze(&self, _sol: &Vec<usize>) -> BlameVector {
                BlameVector::zeros(4)
            }
        }
        let mut cfg = EngineConfig::new(0);
        cfg.max_iterations = 8;
        cfg.noise = 0.0;
        cfg.restart = Restart::Off;
        cfg.trace = true;
        let r = run(&mut ZeroBlame, &cfg).unwrap();
        let first = &r.trajectory[0].positions;
        for rec in &r.trajectory {
            assert_eq!(&rec.positions, first);
        }
    }

    #[test]
    fn trajectory_csv_has_expected_shape() {
        let records = vec![TrajectoryRecord {
            iteration: 1,
            score: 2.5,
            positions: vec![1, 0],
            total_blame: 3.0,
        }];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &records, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "iteration,score,total_blame,pos_0,pos_1\n1,2.5,3,1,0\n");
    }
}
