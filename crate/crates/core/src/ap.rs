//! Single-domain affinity propagation over a sparse similarity graph.
//!
//! The responsibility/availability sweeps here are shared with the hybrid
//! solver, which only swaps in adjusted preferences. Both use the reuse
//! tricks: the max and next-to-max of `s(i,·) + a(i,·)` once per row, and
//! the positive column sum of `r(·,k)` once per column, so a sweep is linear
//! in the number of stored pairs.

use crate::error::{Error, Result};
use crate::graph::{HetPotential, HeteroGraph, Similarities};
use crate::objective::{exemplars, Labeling, SolveResult};

/// Iteration controls shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight kept from the previous message value, in [0, 1).
    pub damping: f64,
    pub max_iter: usize,
    /// Consecutive unchanged iterations needed to declare convergence.
    pub conv_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 1000,
            conv_window: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.conv_window == 0 {
            return Err(Error::InvalidConfig("conv_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn damp(old: f64, new: f64, damping: f64) -> f64 {
    damping * old + (1.0 - damping) * new
}

/// Responsibilities and availabilities of one side, aligned with the CSR
/// positions of its [`Similarities`].
///
/// A forced node (no candidate but itself) keeps `r(i,i) = 0` as a
/// placeholder; its true value is +∞, so every `a(i',i)` with `i' != i` is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SideMessages {
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    ops: u64,
}

impl SideMessages {
    pub fn zeros(side: &Similarities) -> Self {
        Self {
            r: vec![0.0; side.nnz()],
            a: vec![0.0; side.nnz()],
            ops: 0,
        }
    }

    /// Message entries written so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// r(i,k) = s̄(i,k) − max_{k'≠k} [s̄(i,k') + a(i,k')], damped.
    /// `preferences[i]` is the diagonal s̄(i,i); off-diagonals come from `side`.
    pub fn update_responsibility(&mut self, side: &Similarities, preferences: &[f64], damping: f64) {
        for i in 0..side.len() {
            let row = side.row(i);
            let dpos = side.diag_pos(i);
            if side.is_forced(i) {
                self.r[dpos] = 0.0;
                self.ops += 1;
                continue;
            }
            let sbar = |p: usize| if p == dpos { preferences[i] } else { side.scaled_at(p) };
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            let mut best_pos = usize::MAX;
            for p in row.clone() {
                let x = sbar(p) + self.a[p];
                if x > best {
                    second = best;
                    best = x;
                    best_pos = p;
                } else if x > second {
                    second = x;
                }
            }
            for p in row.clone() {
                let other = if p == best_pos { second } else { best };
                let fresh = sbar(p) - other;
                self.r[p] = damp(self.r[p], fresh, damping);
            }
            self.ops += 2 * row.len() as u64;
        }
    }

    /// a(k,k) = Σ_{i'≠k} max(0, r(i',k));
    /// a(i,k) = min[0, r(k,k) + Σ_{i'∉{i,k}} max(0, r(i',k))], damped.
    pub fn update_availability(&mut self, side: &Similarities, damping: f64) {
        for k in 0..side.len() {
            let col = side.column(k);
            let dpos = side.diag_pos(k);
            let positive: f64 = col
                .iter()
                .filter(|&&p| p != dpos)
                .map(|&p| self.r[p].max(0.0))
                .sum();
            let forced = side.is_forced(k);
            let rkk = self.r[dpos];
            for &p in col {
                let fresh = if p == dpos {
                    positive
                } else if forced {
                    0.0
                } else {
                    (rkk + positive - self.r[p].max(0.0)).min(0.0)
                };
                self.a[p] = damp(self.a[p], fresh, damping);
            }
            self.ops += 2 * col.len() as u64;
        }
    }

    /// t(i,i) = r(i,i) + a(i,i).
    pub fn self_belief(&self, side: &Similarities, i: usize) -> f64 {
        let p = side.diag_pos(i);
        self.r[p] + self.a[p]
    }

    /// argmax_k t(i,k) over candidates, lowest index on ties.
    pub fn raw_assignment(&self, side: &Similarities) -> Vec<usize> {
        let beliefs: Vec<f64> = self.r.iter().zip(&self.a).map(|(r, a)| r + a).collect();
        argmax_assignment(side, &beliefs)
    }
}

/// Per-row argmax of `scores` over CSR positions; forced nodes pick themselves.
pub fn argmax_assignment(side: &Similarities, scores: &[f64]) -> Vec<usize> {
    (0..side.len())
        .map(|i| {
            if side.is_forced(i) {
                return i;
            }
            let mut best = f64::NEG_INFINITY;
            let mut arg = i;
            let mut first = true;
            // columns within a row are increasing, so strict > keeps the lowest index
            for p in side.row(i) {
                if first || scores[p] > best {
                    best = scores[p];
                    arg = side.col(p);
                    first = false;
                }
            }
            arg
        })
        .collect()
}

/// Turns a (possibly invalid) argmax labeling into a valid one.
///
/// Exemplars are the self-choosing nodes; if there are none, the node with
/// the largest `self_belief` is promoted. Any node pointing elsewhere moves to
/// its most similar exemplar candidate, or becomes its own exemplar if it has
/// no exemplar among its candidates.
pub fn repair_labeling(side: &Similarities, raw: &[usize], self_belief: &[f64]) -> Vec<usize> {
    let n = side.len();
    if n == 0 {
        return Vec::new();
    }
    let mut is_exemplar: Vec<bool> = (0..n).map(|i| raw[i] == i).collect();
    if !is_exemplar.iter().any(|&x| x) {
        let mut best = 0;
        for i in 1..n {
            if self_belief[i] > self_belief[best] {
                best = i;
            }
        }
        is_exemplar[best] = true;
    }
    let mut out = raw.to_vec();
    for i in 0..n {
        if is_exemplar[i] {
            out[i] = i;
            continue;
        }
        if is_exemplar[raw[i]] {
            continue;
        }
        let mut choice = None;
        let mut best = f64::NEG_INFINITY;
        for p in side.row(i) {
            let k = side.col(p);
            if k != i && is_exemplar[k] && (choice.is_none() || side.scaled_at(p) > best) {
                best = side.scaled_at(p);
                choice = Some(k);
            }
        }
        out[i] = choice.unwrap_or(i);
    }
    // Nodes that fell back to themselves are exemplars now; nobody else picked them.
    out
}

/// Tracks stability of the exemplar sets across iterations.
#[derive(Debug, Clone)]
pub(crate) struct ConvergenceTracker {
    window: usize,
    last: Option<(Vec<usize>, Vec<usize>)>,
    stable: usize,
}

impl ConvergenceTracker {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            last: None,
            stable: 0,
        }
    }

    /// Records this iteration's raw assignments; true once both exemplar
    /// sets have held for `window` consecutive iterations and each non-empty
    /// side has an exemplar.
    pub fn observe(&mut self, images: &[usize], tags: &[usize]) -> bool {
        let ex = |labels: &[usize]| -> Vec<usize> {
            labels
                .iter()
                .enumerate()
                .filter(|(i, &k)| *i == k)
                .map(|(i, _)| i)
                .collect()
        };
        let current = (ex(images), ex(tags));
        let has_exemplars = (images.is_empty() || !current.0.is_empty())
            && (tags.is_empty() || !current.1.is_empty());
        if self.last.as_ref() == Some(&current) {
            self.stable += 1;
        } else {
            self.stable = 0;
        }
        self.last = Some(current);
        has_exemplars && self.stable >= self.window
    }
}

/// Plain AP run independently on the image side and (if present) the tag
/// side, stepped in lockstep under one stopping rule.
#[derive(Debug, Clone)]
pub struct ApSolver<'g> {
    graph: &'g HeteroGraph,
    config: SolverConfig,
    image_prefs: Vec<f64>,
    tag_prefs: Vec<f64>,
    pub images: SideMessages,
    pub tags: SideMessages,
    iteration: usize,
    tracker: ConvergenceTracker,
    converged: bool,
}

impl<'g> ApSolver<'g> {
    pub fn new(graph: &'g HeteroGraph, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if !graph.is_scaled() {
            return Err(Error::NotScaled);
        }
        Ok(Self {
            graph,
            config,
            image_prefs: graph.images().preferences()?,
            tag_prefs: graph.tags().preferences()?,
            images: SideMessages::zeros(graph.images()),
            tags: SideMessages::zeros(graph.tags()),
            iteration: 0,
            tracker: ConvergenceTracker::new(config.conv_window),
            converged: false,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// One synchronous sweep: all r, then all a, image side before tag side.
    pub fn step(&mut self) {
        let d = self.config.damping;
        let (g, images, tags) = (self.graph, &mut self.images, &mut self.tags);
        images.update_responsibility(g.images(), &self.image_prefs, d);
        images.update_availability(g.images(), d);
        tags.update_responsibility(g.tags(), &self.tag_prefs, d);
        tags.update_availability(g.tags(), d);
        self.iteration += 1;
        let raw = self.raw_assignment();
        self.converged = self.tracker.observe(&raw.c, &raw.b);
    }

    pub fn raw_assignment(&self) -> Labeling {
        Labeling::new(
            self.images.raw_assignment(self.graph.images()),
            self.tags.raw_assignment(self.graph.tags()),
        )
    }

    pub fn labeling(&self) -> Labeling {
        let raw = self.raw_assignment();
        let g = self.graph;
        let beliefs = |m: &SideMessages, side: &Similarities| -> Vec<f64> {
            (0..side.len()).map(|i| m.self_belief(side, i)).collect()
        };
        Labeling::new(
            repair_labeling(g.images(), &raw.c, &beliefs(&self.images, g.images())),
            repair_labeling(g.tags(), &raw.b, &beliefs(&self.tags, g.tags())),
        )
    }

    /// Steps until convergence or `max_iter`; returns the repaired labeling.
    pub fn run(&mut self) -> Labeling {
        while self.iteration < self.config.max_iter && !self.converged {
            self.step();
        }
        self.labeling()
    }
}

/// Runs AP to completion. The objective is reported without heterogeneous
/// coupling; see [`SolveResult::reevaluate`] to score it under potentials.
pub fn ap_run(g: &HeteroGraph, config: &SolverConfig) -> Result<SolveResult> {
    let mut solver = ApSolver::new(g, *config)?;
    let labels = solver.run();
    debug_assert!(labels.is_valid());
    SolveResult::assemble(g, &HetPotential::zero(g), labels, solver.iteration, solver.converged)
}

/// Exemplar indices of a labeling (sorted, unique).
pub fn exemplar_set(labels: &[usize]) -> Vec<usize> {
    exemplars(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(usize, usize, f64)], n: usize) -> HeteroGraph {
        HeteroGraph::build(edges, &[], &[], n, 0)
            .unwrap()
            .scale_similarities()
            .unwrap()
    }

    fn undamped() -> f64 {
        0.0
    }

    #[test]
    fn responsibility_first_iteration() {
        // off-diagonal median -3 gives γ = 1/3; undo the scaling in the check
        let g = graph(&[(0, 0, -1.0), (0, 1, -3.0), (1, 0, -3.0), (1, 1, -1.0)], 2);
        let side = g.images();
        let mut m = SideMessages::zeros(side);
        m.update_responsibility(side, &side.preferences().unwrap(), undamped());
        let gamma = g.gamma_image();
        let r01 = m.r[side.position(0, 1).unwrap()] / gamma;
        let r00 = m.r[side.position(0, 0).unwrap()] / gamma;
        assert!((r01 + 2.0).abs() < 1e-12);
        assert!((r00 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_is_forced() {
        let g = graph(&[(0, 0, -1.0)], 1);
        let side = g.images();
        let mut m = SideMessages::zeros(side);
        m.update_responsibility(side, &side.preferences().unwrap(), 0.5);
        assert_eq!(m.r, vec![0.0]);
        let res = ap_run(&g, &SolverConfig::default()).unwrap();
        assert_eq!(res.image_assignment, vec![0]);
    }

    #[test]
    fn equal_similarities_give_equal_responsibilities() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for k in 0..4 {
                edges.push((i, k, -1.0));
            }
        }
        let g = graph(&edges, 4);
        let side = g.images();
        let mut m = SideMessages::zeros(side);
        m.update_responsibility(side, &side.preferences().unwrap(), 0.5);
        assert!(m.r.iter().all(|&r| r == m.r[0]));
    }

    #[test]
    fn availability_cases() {
        let g = graph(&[(0, 0, -1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, -1.0)], 2);
        let side = g.images();
        let mut m = SideMessages::zeros(side);
        m.update_availability(side, 0.0);
        assert!(m.a.iter().all(|&a| a == 0.0));

        let p = |i, k| side.position(i, k).unwrap();
        m.r[p(1, 0)] = 2.0;
        m.r[p(0, 0)] = -1.0;
        m.update_availability(side, 0.0);
        assert_eq!(m.a[p(0, 0)], 2.0);
        assert_eq!(m.a[p(1, 0)], -1.0);

        m.r[p(1, 0)] = -0.5;
        m.r[p(0, 1)] = -0.5;
        m.update_availability(side, 0.0);
        assert_eq!(m.a[p(0, 0)], 0.0);
        assert_eq!(m.a[p(1, 1)], 0.0);
    }

    #[test]
    fn damping_blends_old_and_new() {
        assert_eq!(damp(1.0, 3.0, 0.5), 2.0);
        assert_eq!(damp(1.0, 3.0, 0.0), 3.0);
    }

    #[test]
    fn strong_negative_preferences_give_one_exemplar() {
        let g = graph(&[(0, 0, -10.0), (1, 1, -10.0), (0, 1, -0.1), (1, 0, -0.1)], 2);
        let res = ap_run(&g, &SolverConfig::default()).unwrap();
        assert_eq!(res.image_assignment, vec![0, 0]);
        assert_eq!(res.image_exemplars, vec![0]);
    }

    #[test]
    fn zero_preferences_give_two_exemplars() {
        let g = graph(&[(0, 0, 0.0), (1, 1, 0.0), (0, 1, -10.0), (1, 0, -10.0)], 2);
        let res = ap_run(&g, &SolverConfig::default()).unwrap();
        assert_eq!(res.image_assignment, vec![0, 1]);
        assert!(res.converged);
    }

    #[test]
    fn repair_moves_to_nearest_exemplar() {
        let g = graph(
            &[
                (0, 0, -1.0),
                (1, 1, -1.0),
                (2, 2, -1.0),
                (0, 1, -1.0),
                (0, 2, -2.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (1, 0, -1.0),
            ],
            3,
        );
        // 0 -> 1 but 1 -> 2 and 2 is self-choosing: 0 moves to 2, 1 to 2
        let fixed = repair_labeling(g.images(), &[1, 2, 2], &[0.0; 3]);
        assert_eq!(fixed, vec![2, 2, 2]);
        // no exemplars at all: best self-belief is promoted
        let fixed = repair_labeling(g.images(), &[1, 2, 0], &[0.0, 3.0, 1.0]);
        assert_eq!(fixed, vec![1, 1, 1]);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            damping: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            conv_window: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn tracker_requires_window() {
        let mut t = ConvergenceTracker::new(2);
        assert!(!t.observe(&[0, 0], &[]));
        assert!(!t.observe(&[0, 0], &[]));
        assert!(t.observe(&[0, 0], &[]));
        assert!(!t.observe(&[0, 1], &[]));
        let mut t = ConvergenceTracker::new(1);
        t.observe(&[1, 0], &[]);
        assert!(!t.observe(&[1, 0], &[]), "no exemplar yet");
    }
}
