//! Graph coloring driven by a shrinking target color set.
//!
//! The constructor colors nodes in priority order, always trying to stay
//! inside the target set of `k` colors, where `k` is one less than the best
//! coloring found so far. A node that cannot take a target color may "grab"
//! one from already-colored neighbors if each of them can move to another
//! target color; otherwise it takes a color outside the target set and earns
//! blame for it. Every coloring produced is proper.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BlameVector, Domain, ElementId, PrioritySequence, SwoRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list, collapsing duplicates and reversed
    /// pairs and dropping self-loops.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); node_count];
        let mut unique: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&(u, v)| u != v)
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        unique.sort_unstable();
        unique.dedup();
        for &(u, v) in &unique {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Self {
            adj,
            edge_count: unique.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DimacsError {
    #[error("missing 'p edge <n> <m>' line")]
    MissingHeader,
    #[error("malformed header on line {0}")]
    MalformedHeader(usize),
    #[error("node index out of range on line {0}")]
    NodeOutOfRange(usize),
    #[error("malformed line {0}")]
    BadLine(usize),
}

/// Parses the DIMACS `.col` format: `c` comments, one `p edge <n> <m>`
/// header, `e <u> <v>` edges with 1-based node ids.
pub fn parse_dimacs(text: &str) -> Result<Graph, DimacsError> {
    let mut node_count: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("p") => {
                if node_count.is_some() {
                    return Err(DimacsError::MalformedHeader(lineno));
                }
                match (fields.next(), fields.next(), fields.next()) {
                    (Some("edge") | Some("edges") | Some("col"), Some(n), Some(_m)) => {
                        node_count =
                            Some(n.parse().map_err(|_| DimacsError::MalformedHeader(lineno))?);
                    }
                    _ => return Err(DimacsError::MalformedHeader(lineno)),
                }
            }
            Some("e") => {
                let n = node_count.ok_or(DimacsError::MissingHeader)?;
                let u: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(DimacsError::BadLine(lineno))?;
                let v: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(DimacsError::BadLine(lineno))?;
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(DimacsError::NodeOutOfRange(lineno));
                }
                edges.push((u - 1, v - 1));
            }
            // Some instances carry node lines ('n <id> <weight>'); irrelevant
            // for plain coloring.
            Some("n") => continue,
            _ => return Err(DimacsError::BadLine(lineno)),
        }
    }
    match node_count {
        Some(n) => Ok(Graph::from_edges(n, &edges)),
        None => Err(DimacsError::MissingHeader),
    }
}

/// Constructor switches. `blame_variant` picks between blaming every node
/// outside the target set or only the first node that introduced each extra
/// color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringConfig {
    pub grab_enabled: bool,
    pub blame_variant: BlameVariant,
    pub reuse_enabled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlameVariant {
    AllOutside,
    FirstOnly,
}

impl Default for ColoringConfig {
    fn default() -> Self {
        Self {
            grab_enabled: true,
            blame_variant: BlameVariant::AllOutside,
            reuse_enabled: true,
        }
    }
}

pub fn is_proper(graph: &Graph, colors: &[usize]) -> bool {
    (0..graph.node_count())
        .all(|v| graph.neighbors(v).iter().all(|&w| colors[v] != colors[w]))
}

pub fn colors_used(colors: &[usize]) -> usize {
    let mut seen: Vec<usize> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Partial coloring with per-node counts of neighbor colors, so "is color c
/// free around node v" is O(1).
struct PartialColoring<'a> {
    graph: &'a Graph,
    color: Vec<Option<usize>>,
    /// `used[v][c]` = number of colored neighbors of `v` holding color `c`.
    used: Vec<Vec<u32>>,
    palette: usize,
}

impl<'a> PartialColoring<'a> {
    fn new(graph: &'a Graph, k: usize) -> Self {
        // A greedy coloring never needs more than max_degree + 1 colors, but
        // the palette must also cover an oversized caller-supplied target set.
        let palette = (graph.max_degree() + 1).max(k);
        Self {
            graph,
            color: vec![None; graph.node_count()],
            used: vec![vec![0; palette]; graph.node_count()],
            palette,
        }
    }

    fn is_free(&self, v: usize, c: usize) -> bool {
        self.used[v][c] == 0
    }

    fn assign(&mut self, v: usize, c: usize) {
        debug_assert!(self.color[v].is_none());
        self.color[v] = Some(c);
        for &w in self.graph.neighbors(v) {
            self.used[w][c] += 1;
        }
    }

    fn reassign(&mut self, v: usize, c: usize) {
        let old = self.color[v].expect("reassign of uncolored node");
        self.color[v] = Some(c);
        for &w in self.graph.neighbors(v) {
            self.used[w][old] -= 1;
            self.used[w][c] += 1;
        }
    }

    /// How many uncolored neighbors of `v` would lose `c` as a remaining
    /// target choice.
    fn constraint_count(&self, v: usize, c: usize) -> usize {
        self.graph
            .neighbors(v)
            .iter()
            .filter(|&&w| self.color[w].is_none() && self.is_free(w, c))
            .count()
    }

    fn smallest_free_at_least(&self, v: usize, from: usize) -> usize {
        (from..self.palette)
            .find(|&c| self.is_free(v, c))
            .expect("palette covers max_degree + 1 colors")
    }
}

/// Outcome of a grab attempt: the color taken and the displaced neighbors'
/// reassignments, or failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrabOutcome {
    Grabbed {
        color: usize,
        reassignments: Vec<(usize, usize)>,
    },
    Failed,
}

fn plan_grab(
    state: &PartialColoring,
    node: usize,
    color: usize,
    k: usize,
) -> Option<Vec<(usize, usize)>> {
    let blockers: Vec<usize> = state
        .graph
        .neighbors(node)
        .iter()
        .copied()
        .filter(|&w| state.color[w] == Some(color))
        .collect();
    // Tentative view of displaced neighbors' new colors; reassignments must
    // stay conflict-free among themselves, against the rest of the partial
    // coloring, and against `node`'s prospective color.
    let mut moves: Vec<(usize, usize)> = Vec::with_capacity(blockers.len());
    for &w in &blockers {
        let taken_by_move = |c: usize| {
            moves
                .iter()
                .any(|&(m, mc)| mc == c && state.graph.neighbors(w).contains(&m))
        };
        let choice = (0..k).find(|&c| {
            c != color && state.is_free(w, c) && !taken_by_move(c)
        })?;
        moves.push((w, choice));
    }
    Some(moves)
}

/// Tries to take a target color from `node`'s already-colored neighbors.
/// A color is grabbable only if every neighbor holding it can move to some
/// other free target color without creating a conflict; among grabbable
/// colors the least constraining one for `node`'s uncolored neighbors wins,
/// and each displaced neighbor takes its lowest free target color.
pub fn try_grab(
    graph: &Graph,
    colors: &[Option<usize>],
    node: usize,
    k: usize,
) -> GrabOutcome {
    let mut state = PartialColoring::new(graph, k);
    for (v, c) in colors.iter().enumerate() {
        if let Some(c) = *c {
            state.assign(v, c);
        }
    }
    grab_in_state(&state, node, k)
}

fn grab_in_state(state: &PartialColoring, node: usize, k: usize) -> GrabOutcome {
    let mut best: Option<(usize, usize, Vec<(usize, usize)>)> = None;
    for c in 0..k {
        if state.is_free(node, c) {
            continue; // nothing to grab; a free color belongs to step 2
        }
        if let Some(moves) = plan_grab(state, node, c, k) {
            let constraint = state.constraint_count(node, c);
            if best.as_ref().is_none_or(|(bc, _, _)| constraint < *bc) {
                best = Some((constraint, c, moves));
            }
        }
    }
    match best {
        Some((_, color, reassignments)) => GrabOutcome::Grabbed {
            color,
            reassignments,
        },
        None => GrabOutcome::Failed,
    }
}

/// Colors every node in sequence order. Per node: reuse the previous
/// solution's color when legal, else the least-constraining free target
/// color, else grab, else the smallest free color outside the target set.
/// The result is always proper.
pub fn construct_coloring(
    seq: &PrioritySequence,
    graph: &Graph,
    prev: Option<&[usize]>,
    k: usize,
    cfg: &ColoringConfig,
    _rng: &mut SwoRng,
) -> Vec<usize> {
    let mut state = PartialColoring::new(graph, k);
    for &v in seq.order() {
        // 1. reuse
        if cfg.reuse_enabled {
            if let Some(prev) = prev {
                let pc = prev[v];
                if pc < k && state.is_free(v, pc) {
                    state.assign(v, pc);
                    continue;
                }
            }
        }
        // 2. least-constraining free target color
        let mut best: Option<(usize, usize)> = None;
        for c in 0..k {
            if state.is_free(v, c) {
                let constraint = state.constraint_count(v, c);
                if best.is_none_or(|(bc, _)| constraint < bc) {
                    best = Some((constraint, c));
                }
            }
        }
        if let Some((_, c)) = best {
            state.assign(v, c);
            continue;
        }
        // 3. grab
        if cfg.grab_enabled {
            if let GrabOutcome::Grabbed {
                color,
                reassignments,
            } = grab_in_state(&state, v, k)
            {
                for (w, c) in reassignments {
                    state.reassign(w, c);
                }
                state.assign(v, color);
                continue;
            }
        }
        // 4. outside the target set
        let c = state.smallest_free_at_least(v, k);
        state.assign(v, c);
    }
    let colors: Vec<usize> = state.color.into_iter().map(Option::unwrap).collect();
    debug_assert!(is_proper(graph, &colors));
    colors
}

/// Blame per extra color beyond the target set. `AllOutside` charges every
/// node outside the set `color - k + 1`; `FirstOnly` charges only the
/// earliest node (in construction order) that introduced each extra color.
pub fn analyze_coloring(
    colors: &[usize],
    k: usize,
    cfg: &ColoringConfig,
    order: &[ElementId],
) -> BlameVector {
    let n = colors.len();
    let mut blame = vec![0.0; n];
    match cfg.blame_variant {
        BlameVariant::AllOutside => {
            for v in 0..n {
                if colors[v] >= k {
                    blame[v] = (colors[v] - k + 1) as f64;
                }
            }
        }
        BlameVariant::FirstOnly => {
            let mut seen = std::collections::HashSet::new();
            for &v in order {
                if colors[v] >= k && seen.insert(colors[v]) {
                    blame[v] = (colors[v] - k + 1) as f64;
                }
            }
        }
    }
    BlameVector::new(blame)
}

/// Initial heuristic: decreasing degree with jitter `eps`; ties break by
/// node id when `eps` is zero.
pub fn initial_sequence_color(graph: &Graph, rng: &mut SwoRng, eps: f64) -> PrioritySequence {
    let keys: Vec<f64> = (0..graph.node_count())
        .map(|v| {
            let noise = if eps > 0.0 {
                rng.random_range(-eps..=eps)
            } else {
                0.0
            };
            -(graph.degree(v) as f64) + noise
        })
        .collect();
    PrioritySequence::from_keys(&keys)
}

/// One constructed coloring together with the target it was built against
/// and the order it was built in.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoringSolution {
    pub assignment: Vec<usize>,
    pub colors_used: usize,
    pub target_k: usize,
    pub order: Vec<ElementId>,
}

/// The coloring domain plugged into the engine. Keeps the previous
/// iteration's coloring for reuse and shrinks the target set to one below
/// the best coloring seen.
pub struct ColoringDomain<'a> {
    pub graph: &'a Graph,
    pub cfg: ColoringConfig,
    pub heuristic_noise: f64,
    prev: Option<Vec<usize>>,
    best_colors: Option<usize>,
}

impl<'a> ColoringDomain<'a> {
    pub fn new(graph: &'a Graph, cfg: ColoringConfig) -> Self {
        Self {
            graph,
            cfg,
            heuristic_noise: 0.5,
            prev: None,
            best_colors: None,
        }
    }

    pub fn with_heuristic_noise(mut self, eps: f64) -> Self {
        self.heuristic_noise = eps;
        self
    }

    pub fn target_k(&self) -> Option<usize> {
        self.best_colors.map(|b| (b - 1).max(1))
    }
}

impl Domain for ColoringDomain<'_> {
    type Solution = ColoringSolution;

    fn element_count(&self) -> usize {
        self.graph.node_count()
    }

    fn initial_sequence(&mut self, rng: &mut SwoRng) -> PrioritySequence {
        initial_sequence_color(self.graph, rng, self.heuristic_noise)
    }

    fn construct(&mut self, seq: &PrioritySequence, rng: &mut SwoRng) -> ColoringSolution {
        let assignment = match self.target_k() {
            // First construction: plain greedy (k = 0 puts every color
            // "outside", i.e. first-fit), which seeds the target set.
            None => {
                let cfg = ColoringConfig {
                    grab_enabled: false,
                    reuse_enabled: false,
                    ..self.cfg
                };
                construct_coloring(seq, self.graph, None, 0, &cfg, rng)
            }
            Some(k) => {
                construct_coloring(seq, self.graph, self.prev.as_deref(), k, &self.cfg, rng)
            }
        };
        let used = colors_used(&assignment);
        let target_k = self.target_k().unwrap_or_else(|| (used - 1).max(1));
        if self.best_colors.is_none_or(|b| used < b) {
            self.best_colors = Some(used);
        }
        self.prev = Some(assignment.clone());
        ColoringSolution {
            assignment,
            colors_used: used,
            target_k,
            order: seq.order().to_vec(),
        }
    }

    fn score(&self, sol: &ColoringSolution) -> f64 {
        sol.colors_used as f64
    }

    fn analyze(&self, sol: &ColoringSolution) -> BlameVector {
        analyze_coloring(&sol.assignment, sol.target_k, &self.cfg, &sol.order)
    }
}

/// Runs the engine on a graph and returns the best coloring found.
pub fn solve_coloring(
    graph: &Graph,
    engine_cfg: &crate::engine::EngineConfig,
    coloring_cfg: &ColoringConfig,
) -> Result<crate::engine::RunResult<ColoringSolution>, crate::engine::EngineError> {
    let mut domain = ColoringDomain::new(graph, *coloring_cfg)
        .with_heuristic_noise(engine_cfg.noise.max(0.1));
    crate::engine::run(&mut domain, engine_cfg)
}

/// Assignment file: one `node color` pair per line, 1-based.
pub fn assignment_to_text(colors: &[usize]) -> String {
    colors
        .iter()
        .enumerate()
        .map(|(v, c)| format!("{} {}\n", v + 1, c + 1))
        .collect()
}
