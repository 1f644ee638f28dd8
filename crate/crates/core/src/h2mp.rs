//! Hybrid message propagation: affinity propagation on the image and tag
//! sides, coupled through discardability (w) and contributability (v)
//! messages across the association edges.
//!
//! One iteration, in this order:
//!
//! 1. s̄(i,i) = s(i,i) + Σ_j v(i,j) for every image and tag;
//! 2. image r, image a, tag r, tag a (shared AP sweeps over s̄);
//! 3. w on every association edge, both directions, from the beliefs
//!    t(i,i) = r(i,i) + a(i,i) of step 2 and the previous v;
//! 4. v on every association edge, both directions, from the new w.
//!
//! All eight tables are damped with the same factor and start at zero.
//! Every step is linear in its edge set, so an iteration costs
//! O(|E^I| + |E^W| + |E^R|).

use crate::ap::{damp, repair_labeling, ConvergenceTracker, SideMessages, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{EdgePotential, HetPotential, HeteroGraph, Similarities};
use crate::objective::{Labeling, SolveResult};

/// Full parameter set of a hybrid run, preference recipe included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2mpConfig {
    pub solver: SolverConfig,
    pub lambda_image: f64,
    pub lambda_tag: f64,
    pub theta: f64,
}

impl Default for H2mpConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            lambda_image: 1.0,
            lambda_tag: 1.0,
            theta: -15.0,
        }
    }
}

/// Heterogeneous messages, indexed by association edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMessages {
    /// w(i,j): image i → tag j.
    pub w_img: Vec<f64>,
    /// w(j,i): tag j → image i.
    pub w_tag: Vec<f64>,
    /// v(i,j): tag j → image i.
    pub v_img: Vec<f64>,
    /// v(j,i): image i → tag j.
    pub v_tag: Vec<f64>,
}

impl CrossMessages {
    fn zeros(edges: usize) -> Self {
        Self {
            w_img: vec![0.0; edges],
            w_tag: vec![0.0; edges],
            v_img: vec![0.0; edges],
            v_tag: vec![0.0; edges],
        }
    }
}

/// The eight message tables plus the cached adjusted preferences.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub images: SideMessages,
    pub tags: SideMessages,
    pub cross: CrossMessages,
    pub sbar_img: Vec<f64>,
    pub sbar_tag: Vec<f64>,
    image_prefs: Vec<f64>,
    tag_prefs: Vec<f64>,
    cross_ops: u64,
    pub iteration: usize,
}

/// Contributability received by the node on one end of an edge.
///
/// `own_self` is the potential when only the receiver is its own exemplar,
/// `other_self` when only the sender is, and `w` the sender's
/// discardability. A forced sender has w = +∞, whose limit is q̄ − other_self.
#[inline]
pub fn contributability(weights: &EdgePotential, own_self: f64, other_self: f64, w: f64, sender_forced: bool) -> f64 {
    if sender_forced {
        return weights.q_bar - other_self;
    }
    own_self.max(weights.q_bar + w) - weights.q.max(other_self + w)
}

impl MessageState {
    pub fn new(g: &HeteroGraph) -> Result<Self> {
        if !g.is_scaled() {
            return Err(Error::NotScaled);
        }
        let image_prefs = g.images().preferences()?;
        let tag_prefs = g.tags().preferences()?;
        Ok(Self {
            images: SideMessages::zeros(g.images()),
            tags: SideMessages::zeros(g.tags()),
            cross: CrossMessages::zeros(g.assoc().len()),
            sbar_img: image_prefs.clone(),
            sbar_tag: tag_prefs.clone(),
            image_prefs,
            tag_prefs,
            cross_ops: 0,
            iteration: 0,
        })
    }

    /// Message entries written so far, all tables together.
    pub fn ops(&self) -> u64 {
        self.images.ops() + self.tags.ops() + self.cross_ops
    }

    /// Refreshes s̄ on both sides from the current v; off-diagonals are untouched.
    pub fn compute_sbar(&mut self, g: &HeteroGraph) {
        for i in 0..g.n_images() {
            let mut sum = 0.0;
            for &e in g.image_assoc(i) {
                sum += self.cross.v_img[e];
            }
            self.sbar_img[i] = self.image_prefs[i] + sum;
        }
        for j in 0..g.n_tags() {
            let mut sum = 0.0;
            for &e in g.tag_assoc(j) {
                sum += self.cross.v_tag[e];
            }
            self.sbar_tag[j] = self.tag_prefs[j] + sum;
        }
        self.cross_ops += 2 * g.assoc().len() as u64;
    }

    pub fn update_responsibility_h(&mut self, g: &HeteroGraph, damping: f64) {
        self.images.update_responsibility(g.images(), &self.sbar_img, damping);
        self.tags.update_responsibility(g.tags(), &self.sbar_tag, damping);
    }

    pub fn update_availability_h(&mut self, g: &HeteroGraph, damping: f64) {
        self.images.update_availability(g.images(), damping);
        self.tags.update_availability(g.tags(), damping);
    }

    /// w(i,j) = t(i,i) − v(i,j) and w(j,i) = t(j,j) − v(j,i) on every edge.
    /// A forced sender keeps a 0 placeholder (its true value is +∞).
    pub fn update_discardability(&mut self, g: &HeteroGraph, damping: f64) {
        let (imgs, tags) = (g.images(), g.tags());
        for (e, &(i, j)) in g.assoc().iter().enumerate() {
            let w_img = if imgs.is_forced(i) {
                0.0
            } else {
                self.images.self_belief(imgs, i) - self.cross.v_img[e]
            };
            let w_tag = if tags.is_forced(j) {
                0.0
            } else {
                self.tags.self_belief(tags, j) - self.cross.v_tag[e]
            };
            self.cross.w_img[e] = damp(self.cross.w_img[e], w_img, damping);
            self.cross.w_tag[e] = damp(self.cross.w_tag[e], w_tag, damping);
        }
        self.cross_ops += 2 * g.assoc().len() as u64;
    }

    /// v(i,j) = max{p(i,j), q̄ + w(j,i)} − max{q, p(j,i) + w(j,i)} and the
    /// mirrored v(j,i), on every edge.
    pub fn update_contributability(&mut self, g: &HeteroGraph, pot: &HetPotential, damping: f64) {
        let (imgs, tags) = (g.images(), g.tags());
        for (e, &(i, j)) in g.assoc().iter().enumerate() {
            let wt = pot.weight(e);
            let to_img = contributability(wt, wt.p_img, wt.p_tag, self.cross.w_tag[e], tags.is_forced(j));
            let to_tag = contributability(wt, wt.p_tag, wt.p_img, self.cross.w_img[e], imgs.is_forced(i));
            self.cross.v_img[e] = damp(self.cross.v_img[e], to_img, damping);
            self.cross.v_tag[e] = damp(self.cross.v_tag[e], to_tag, damping);
        }
        self.cross_ops += 2 * g.assoc().len() as u64;
    }

    /// One full iteration in the fixed order documented on the module.
    pub fn sweep(&mut self, g: &HeteroGraph, pot: &HetPotential, damping: f64) {
        self.compute_sbar(g);
        self.images.update_responsibility(g.images(), &self.sbar_img, damping);
        self.images.update_availability(g.images(), damping);
        self.tags.update_responsibility(g.tags(), &self.sbar_tag, damping);
        self.tags.update_availability(g.tags(), damping);
        self.update_discardability(g, damping);
        self.update_contributability(g, pot, damping);
        self.iteration += 1;
    }

    /// Per-node argmax of t = r + a, before validity repair.
    pub fn raw_assignment(&self, g: &HeteroGraph) -> Labeling {
        Labeling::new(
            self.images.raw_assignment(g.images()),
            self.tags.raw_assignment(g.tags()),
        )
    }

    /// argmax assignment on both sides followed by validity repair.
    pub fn assign_exemplars(&self, g: &HeteroGraph) -> Labeling {
        let raw = self.raw_assignment(g);
        let beliefs = |m: &SideMessages, side: &Similarities| -> Vec<f64> {
            (0..side.len()).map(|i| m.self_belief(side, i)).collect()
        };
        Labeling::new(
            repair_labeling(g.images(), &raw.c, &beliefs(&self.images, g.images())),
            repair_labeling(g.tags(), &raw.b, &beliefs(&self.tags, g.tags())),
        )
    }
}

/// Stepping driver around [`MessageState`].
#[derive(Debug, Clone)]
pub struct H2mpSolver<'a> {
    graph: &'a HeteroGraph,
    pot: &'a HetPotential,
    config: SolverConfig,
    state: MessageState,
    tracker: ConvergenceTracker,
    converged: bool,
}

impl<'a> H2mpSolver<'a> {
    pub fn new(graph: &'a HeteroGraph, pot: &'a HetPotential, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if pot.len() != graph.assoc().len() {
            return Err(Error::InvalidConfig(
                "potentials do not match the graph's association edges".into(),
            ));
        }
        Ok(Self {
            graph,
            pot,
            config,
            state: MessageState::new(graph)?,
            tracker: ConvergenceTracker::new(config.conv_window),
            converged: false,
        })
    }

    pub fn state(&self) -> &MessageState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.state.iteration
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn step(&mut self) {
        self.state.sweep(self.graph, self.pot, self.config.damping);
        let raw = self.state.raw_assignment(self.graph);
        self.converged = self.tracker.observe(&raw.c, &raw.b);
    }

    pub fn run(&mut self) -> Labeling {
        while self.state.iteration < self.config.max_iter && !self.converged {
            self.step();
        }
        self.state.assign_exemplars(self.graph)
    }
}

/// Runs hybrid propagation to convergence or `max_iter` and scores the result.
pub fn h2mp_run(g: &HeteroGraph, pot: &HetPotential, config: &SolverConfig) -> Result<SolveResult> {
    let mut solver = H2mpSolver::new(g, pot, *config)?;
    let labels = solver.run();
    debug_assert!(labels.is_valid());
    SolveResult::assemble(g, pot, labels, solver.iteration(), solver.converged)
}
