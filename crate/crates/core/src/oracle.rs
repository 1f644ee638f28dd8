//! Ground truth for small instances.
//!
//! * exhaustive enumeration of valid labelings and the exact maximizer of the
//!   joint objective;
//! * a vector-valued max-sum engine on the full factor graph (variables
//!   `c_i`, `b_j`; factors δ_k, η_k and e_ij), whose messages reduce to the
//!   scalar responsibility/availability/discardability/contributability
//!   tables by subtracting their "bar" quantities.
//!
//! Vector messages are over the full label domain of their variable;
//! non-candidate labels carry −∞ in ρ and π. Every new message is shifted so
//! its maximum is 0, which max-sum is invariant to.
//!
//! Damping: α and υ take two values (one at the distinguished label, one
//! elsewhere), so componentwise damping is exact. ρ and π are damped on
//! their sufficient statistic, the distinguished entry minus the max of the
//! rest; with damping 0 the engine is plain synchronous max-sum.

use crate::ap::{argmax_assignment, damp};
use crate::error::{Error, Result};
use crate::graph::{HetPotential, HeteroGraph, Similarities};
use crate::h2mp::MessageState;
use crate::objective::{evaluate, Labeling, ObjectiveBreakdown};

pub const MAX_ENUM_IMAGES: usize = 8;
pub const MAX_ENUM_TAGS: usize = 6;

fn check_guard(n: usize, m: usize) -> Result<()> {
    if n > MAX_ENUM_IMAGES || m > MAX_ENUM_TAGS {
        return Err(Error::EnumerationGuard { n, m });
    }
    Ok(())
}

/// Valid labelings of one side of size `n`, in lexicographic order.
fn valid_side(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        if labels.iter().all(|&k| labels[k] == k) {
            out.push(labels.clone());
        }
        // odometer, last position fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < n {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Every jointly valid (c, b), ordered lexicographically by (c, b).
pub fn enumerate_valid_labelings(n: usize, m: usize) -> Result<impl Iterator<Item = Labeling>> {
    check_guard(n, m)?;
    let cs = valid_side(n);
    let bs = valid_side(m);
    Ok(cs
        .into_iter()
        .flat_map(move |c| bs.clone().into_iter().map(move |b| Labeling::new(c.clone(), b))))
}

/// Number of valid labelings of one side, by enumeration.
pub fn count_valid_labelings(n: usize) -> Result<usize> {
    check_guard(n, 0)?;
    Ok(valid_side(n).len())
}

fn side_fit(side: &Similarities, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &k)| side.scaled(i, k).unwrap_or(f64::NEG_INFINITY))
        .sum()
}

fn self_mask(labels: &[usize]) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|(i, &k)| *i == k)
        .fold(0, |acc, (i, _)| acc | (1 << i))
}

/// Best fit and lexicographically first labeling for every self-exemplar mask.
fn best_per_mask(side: &Similarities, n: usize) -> Vec<Option<(f64, Vec<usize>)>> {
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; 1 << n];
    for labels in valid_side(n) {
        let fit = side_fit(side, &labels);
        let slot = &mut best[self_mask(&labels)];
        match slot {
            Some((f, _)) if fit <= *f => {}
            _ => *slot = Some((fit, labels)),
        }
    }
    best
}

/// Exact maximizer of S(c, b) over valid labelings; ties go to the
/// lexicographically smallest (c, b).
///
/// The heterogeneous term only sees which nodes are self-exemplars, so the
/// search keeps the best labeling per self-exemplar mask on each side and
/// then scans all mask pairs.
pub fn brute_force_optimum(g: &HeteroGraph, pot: &HetPotential) -> Result<(Labeling, ObjectiveBreakdown)> {
    let (n, m) = (g.n_images(), g.n_tags());
    check_guard(n, m)?;
    if !g.is_scaled() {
        return Err(Error::NotScaled);
    }
    let best_c = best_per_mask(g.images(), n);
    let best_b = best_per_mask(g.tags(), m);
    let mut winner: Option<(f64, &Vec<usize>, &Vec<usize>)> = None;
    for (mc, c) in best_c.iter().enumerate() {
        let Some((fit_c, c)) = c else { continue };
        for (mb, b) in best_b.iter().enumerate() {
            let Some((fit_b, b)) = b else { continue };
            let hetero: f64 = g
                .assoc()
                .iter()
                .enumerate()
                .map(|(e, &(i, j))| pot.weight(e).value(mc >> i & 1 == 1, mb >> j & 1 == 1))
                .sum();
            let total = fit_c + fit_b + hetero;
            let better = match winner {
                None => true,
                Some((t, wc, wb)) => total > t || (total == t && (c, b) < (wc, wb)),
            };
            if better {
                winner = Some((total, c, b));
            }
        }
    }
    let (_, c, b) = winner.expect("the all-self labeling is always valid");
    let labels = Labeling::new(c.clone(), b.clone());
    let breakdown = evaluate(g, pot, &labels)?;
    Ok((labels, breakdown))
}

/// Vector messages of one homogeneous side, per stored pair (i, k).
#[derive(Debug, Clone, PartialEq)]
pub struct SideVectors {
    /// ρ_{i→k}(c_i), c_i ∈ 0..n.
    pub rho: Vec<Vec<f64>>,
    /// α_{i←k}(c_i), c_i ∈ 0..n.
    pub alpha: Vec<Vec<f64>>,
}

impl SideVectors {
    fn zeros(side: &Similarities) -> Self {
        let n = side.len();
        Self {
            rho: vec![vec![0.0; n]; side.nnz()],
            alpha: vec![vec![0.0; n]; side.nnz()],
        }
    }
}

/// All vector messages of the factor graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMessages {
    pub images: SideVectors,
    pub tags: SideVectors,
    /// π_{i→e}(c_i) per association edge.
    pub pi_img: Vec<Vec<f64>>,
    /// υ_{i←e}(c_i) per association edge.
    pub ups_img: Vec<Vec<f64>>,
    /// π_{j→e}(b_j) per association edge.
    pub pi_tag: Vec<Vec<f64>>,
    /// υ_{j←e}(b_j) per association edge.
    pub ups_tag: Vec<Vec<f64>>,
}

impl VectorMessages {
    pub fn zeros(g: &HeteroGraph) -> Self {
        let (n, m, e) = (g.n_images(), g.n_tags(), g.assoc().len());
        Self {
            images: SideVectors::zeros(g.images()),
            tags: SideVectors::zeros(g.tags()),
            pi_img: vec![vec![0.0; n]; e],
            ups_img: vec![vec![0.0; n]; e],
            pi_tag: vec![vec![0.0; m]; e],
            ups_tag: vec![vec![0.0; m]; e],
        }
    }
}

fn max_except(v: &[f64], skip: usize) -> f64 {
    v.iter()
        .enumerate()
        .filter(|&(h, _)| h != skip)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn normalize(v: &mut [f64]) {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.is_finite() {
        for x in v.iter_mut() {
            *x -= top;
        }
    }
}

/// Damps the statistic v(k) − max_{h≠k} v(h) of `fresh` towards `old`.
fn damp_statistic(fresh: &mut [f64], old: &[f64], k: usize, damping: f64) {
    let rest = max_except(fresh, k);
    if !rest.is_finite() {
        return;
    }
    let new_stat = fresh[k] - rest;
    let old_stat = old[k] - max_except(old, k);
    fresh[k] = rest + damp(old_stat, new_stat, damping);
}

fn damp_componentwise(fresh: &mut [f64], old: &[f64], damping: f64) {
    for (x, &o) in fresh.iter_mut().zip(old) {
        *x = damp(o, *x, damping);
    }
}

/// s(i, c) over the full domain, −∞ off the candidate set.
fn unary(side: &Similarities, i: usize) -> Vec<f64> {
    let mut u = vec![f64::NEG_INFINITY; side.len()];
    for p in side.row(i) {
        u[side.col(p)] = side.scaled_at(p);
    }
    u
}

/// Closed-form δ_k factor message α_{i←k}(c) for all c, given the scope's
/// incoming ρ. Exact maximization over the other variables, which factorizes
/// because δ_k only cares whether each variable picks k.
fn delta_message(side: &Similarities, rho: &[Vec<f64>], k: usize, target_pos: usize) -> Vec<f64> {
    let n = side.len();
    let target = side.row_of(target_pos);
    let kk = side.diag_pos(k);
    let mut sum_max = 0.0;
    let mut sum_off = 0.0;
    for &p in side.column(k) {
        let i2 = side.row_of(p);
        if i2 == target || i2 == k {
            continue;
        }
        sum_max += rho[p].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        sum_off += max_except(&rho[p], k);
    }
    let mut out = vec![0.0; n];
    if target == k {
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = if c == k { sum_max } else { sum_off };
        }
    } else {
        let k_self = rho[kk][k];
        let k_other = max_except(&rho[kk], k);
        let chosen = k_self + sum_max;
        let not_chosen = chosen.max(k_other + sum_off);
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = if c == k { chosen } else { not_chosen };
        }
    }
    out
}

fn side_sweep(side: &Similarities, vecs: &mut SideVectors, ups: &[Vec<f64>], edges_of: &dyn Fn(usize) -> Vec<usize>, damping: f64) {
    let n = side.len();
    // ρ_{i→k}(c) = s(i,c) + Σ_e υ_{i←e}(c) + Σ_{k'≠k} α_{i←k'}(c)
    let mut new_rho = vecs.rho.clone();
    for i in 0..n {
        let s = unary(side, i);
        let edges = edges_of(i);
        for p in side.row(i) {
            let k = side.col(p);
            let mut fresh = vec![0.0; n];
            for (c, slot) in fresh.iter_mut().enumerate() {
                let mut x = s[c];
                for &e in &edges {
                    x += ups[e][c];
                }
                for p2 in side.row(i) {
                    if p2 != p {
                        x += vecs.alpha[p2][c];
                    }
                }
                *slot = x;
            }
            normalize(&mut fresh);
            damp_statistic(&mut fresh, &vecs.rho[p], k, damping);
            new_rho[p] = fresh;
        }
    }
    vecs.rho = new_rho;

    let mut new_alpha = vecs.alpha.clone();
    for k in 0..n {
        for &p in side.column(k) {
            let mut fresh = delta_message(side, &vecs.rho, k, p);
            normalize(&mut fresh);
            damp_componentwise(&mut fresh, &vecs.alpha[p], damping);
            new_alpha[p] = fresh;
        }
    }
    vecs.alpha = new_alpha;
}

/// π_{i→e} = ρ_{i→i} + α_{i←i} − υ_{i←e}: the belief of the variable seen
/// through its own δ factor, minus what e contributed.
fn variable_to_edge(side: &Similarities, vecs: &SideVectors, i: usize, ups: &[f64], old: &[f64], damping: f64) -> Vec<f64> {
    let d = side.diag_pos(i);
    let mut fresh: Vec<f64> = (0..side.len())
        .map(|c| vecs.rho[d][c] + vecs.alpha[d][c] - ups[c])
        .collect();
    normalize(&mut fresh);
    damp_statistic(&mut fresh, old, i, damping);
    fresh
}

/// One synchronous sweep of every vector message, in the same order as the
/// scalar engine: image ρ, α; tag ρ, α; all π; all υ.
pub fn vector_maxsum_iterate(vm: &mut VectorMessages, g: &HeteroGraph, pot: &HetPotential, damping: f64) {
    let img_edges = |i: usize| g.image_assoc(i).to_vec();
    let tag_edges = |j: usize| g.tag_assoc(j).to_vec();
    side_sweep(g.images(), &mut vm.images, &vm.ups_img, &img_edges, damping);
    side_sweep(g.tags(), &mut vm.tags, &vm.ups_tag, &tag_edges, damping);

    let assoc = g.assoc();
    let new_pi_img: Vec<Vec<f64>> = assoc
        .iter()
        .enumerate()
        .map(|(e, &(i, _))| variable_to_edge(g.images(), &vm.images, i, &vm.ups_img[e], &vm.pi_img[e], damping))
        .collect();
    let new_pi_tag: Vec<Vec<f64>> = assoc
        .iter()
        .enumerate()
        .map(|(e, &(_, j))| variable_to_edge(g.tags(), &vm.tags, j, &vm.ups_tag[e], &vm.pi_tag[e], damping))
        .collect();
    vm.pi_img = new_pi_img;
    vm.pi_tag = new_pi_tag;

    let (n, m) = (g.n_images(), g.n_tags());
    for (e, &(i, j)) in assoc.iter().enumerate() {
        let w = pot.weight(e);
        // υ_{i←e}(c) = max_b [e(c, b) + π_{j→e}(b)]
        let mut to_img: Vec<f64> = (0..n)
            .map(|c| {
                (0..m)
                    .map(|b| w.value(c == i, b == j) + vm.pi_tag[e][b])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let mut to_tag: Vec<f64> = (0..m)
            .map(|b| {
                (0..n)
                    .map(|c| w.value(c == i, b == j) + vm.pi_img[e][c])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        normalize(&mut to_img);
        normalize(&mut to_tag);
        damp_componentwise(&mut to_img, &vm.ups_img[e], damping);
        damp_componentwise(&mut to_tag, &vm.ups_tag[e], damping);
        vm.ups_img[e] = to_img;
        vm.ups_tag[e] = to_tag;
    }
}

/// Scalar message tables, laid out like the scalar engine's state.
/// In tables reduced from vector messages, +∞ marks an entry whose tilde
/// quantity is undefined (forced nodes, singleton domains).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTables {
    pub r_img: Vec<f64>,
    pub a_img: Vec<f64>,
    pub r_tag: Vec<f64>,
    pub a_tag: Vec<f64>,
    pub w_img: Vec<f64>,
    pub w_tag: Vec<f64>,
    pub v_img: Vec<f64>,
    pub v_tag: Vec<f64>,
}

impl ScalarTables {
    pub fn from_state(state: &MessageState) -> Self {
        Self {
            r_img: state.images.r.clone(),
            a_img: state.images.a.clone(),
            r_tag: state.tags.r.clone(),
            a_tag: state.tags.a.clone(),
            w_img: state.cross.w_img.clone(),
            w_tag: state.cross.w_tag.clone(),
            v_img: state.cross.v_img.clone(),
            v_tag: state.cross.v_tag.clone(),
        }
    }

    fn tables(&self) -> [&Vec<f64>; 8] {
        [
            &self.r_img,
            &self.a_img,
            &self.r_tag,
            &self.a_tag,
            &self.w_img,
            &self.w_tag,
            &self.v_img,
            &self.v_tag,
        ]
    }

    /// Largest |self − reduced| over entries the reduced tables define.
    pub fn max_discrepancy(&self, reduced: &ScalarTables) -> f64 {
        let mut worst: f64 = 0.0;
        for (mine, theirs) in self.tables().into_iter().zip(reduced.tables()) {
            assert_eq!(mine.len(), theirs.len(), "table shapes differ");
            for (&x, &y) in mine.iter().zip(theirs.iter()) {
                if y.is_finite() {
                    let diff = (x - y).abs();
                    worst = if diff.is_nan() { f64::INFINITY } else { worst.max(diff) };
                }
            }
        }
        worst
    }
}

/// ṽ(k) = v(k) − max_{h≠k} v(h), +∞ when the rest is empty or all −∞.
fn tilde_max(v: &[f64], k: usize) -> f64 {
    let rest = max_except(v, k);
    if rest.is_finite() {
        v[k] - rest
    } else {
        f64::INFINITY
    }
}

/// ṽ(k) = v(k) − v(c) for the shared off-k value (two-valued messages).
fn tilde_off(v: &[f64], k: usize) -> f64 {
    match (0..v.len()).find(|&c| c != k) {
        Some(c) => v[k] - v[c],
        None => f64::INFINITY,
    }
}

fn reduce_side(side: &Similarities, vecs: &SideVectors) -> (Vec<f64>, Vec<f64>) {
    let mut r = Vec::with_capacity(side.nnz());
    let mut a = Vec::with_capacity(side.nnz());
    for p in 0..side.nnz() {
        let k = side.col(p);
        r.push(tilde_max(&vecs.rho[p], k));
        a.push(tilde_off(&vecs.alpha[p], k));
    }
    (r, a)
}

/// r = ρ̃(c=k), a = α̃(c=k), w = π̃(c=i), v = υ̃(c=i).
pub fn reduce_to_scalar(vm: &VectorMessages, g: &HeteroGraph) -> ScalarTables {
    let (r_img, a_img) = reduce_side(g.images(), &vm.images);
    let (r_tag, a_tag) = reduce_side(g.tags(), &vm.tags);
    let assoc = g.assoc();
    ScalarTables {
        r_img,
        a_img,
        r_tag,
        a_tag,
        w_img: assoc.iter().enumerate().map(|(e, &(i, _))| tilde_max(&vm.pi_img[e], i)).collect(),
        w_tag: assoc.iter().enumerate().map(|(e, &(_, j))| tilde_max(&vm.pi_tag[e], j)).collect(),
        v_img: assoc.iter().enumerate().map(|(e, &(i, _))| tilde_off(&vm.ups_img[e], i)).collect(),
        v_tag: assoc.iter().enumerate().map(|(e, &(_, j))| tilde_off(&vm.ups_tag[e], j)).collect(),
    }
}

fn edge_marginal_scores(side: &Similarities, vecs: &SideVectors) -> Vec<f64> {
    (0..side.nnz())
        .map(|p| {
            let k = side.col(p);
            let marginal: Vec<f64> = vecs.rho[p].iter().zip(&vecs.alpha[p]).map(|(r, a)| r + a).collect();
            tilde_max(&marginal, k)
        })
        .collect()
}

/// Decodes each variable from the max-marginal seen at each δ_k edge:
/// c_i = argmax_k [μ_{ik}(k) − max_{h≠k} μ_{ik}(h)], μ_{ik} = ρ_{i→k} + α_{i←k}.
/// Returns the raw argmax (not repaired).
pub fn vector_assign(vm: &VectorMessages, g: &HeteroGraph) -> Labeling {
    Labeling::new(
        argmax_assignment(g.images(), &edge_marginal_scores(g.images(), &vm.images)),
        argmax_assignment(g.tags(), &edge_marginal_scores(g.tags(), &vm.tags)),
    )
}

fn belief_side(side: &Similarities, vecs: &SideVectors, ups: &[Vec<f64>], edges_of: &dyn Fn(usize) -> Vec<usize>) -> Vec<usize> {
    (0..side.len())
        .map(|i| {
            let s = unary(side, i);
            let mut best = f64::NEG_INFINITY;
            let mut arg = i;
            for p in side.row(i) {
                let c = side.col(p);
                let mut x = s[c];
                for p2 in side.row(i) {
                    x += vecs.alpha[p2][c];
                }
                for e in edges_of(i) {
                    x += ups[e][c];
                }
                if x > best {
                    best = x;
                    arg = c;
                }
            }
            arg
        })
        .collect()
}

/// argmax of the full belief: unary plus every incoming factor message.
/// Agrees with [`vector_assign`] at a fixed point of the messages.
pub fn belief_assign(vm: &VectorMessages, g: &HeteroGraph) -> Labeling {
    let img_edges = |i: usize| g.image_assoc(i).to_vec();
    let tag_edges = |j: usize| g.tag_assoc(j).to_vec();
    Labeling::new(
        belief_side(g.images(), &vm.images, &vm.ups_img, &img_edges),
        belief_side(g.tags(), &vm.tags, &vm.ups_tag, &tag_edges),
    )
}

/// Outcome of running the scalar and vector engines side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct LockstepReport {
    pub iterations: usize,
    /// Largest message discrepancy seen at any iteration.
    pub max_error: f64,
    /// Iterations at which the raw assignments differed.
    pub assignment_mismatches: usize,
}

pub const MAX_VECTOR_NODES: usize = 64;

/// Steps both engines `iterations` times from the zero state, comparing
/// every message table and the raw assignments after each sweep.
pub fn lockstep(g: &HeteroGraph, pot: &HetPotential, damping: f64, iterations: usize) -> Result<LockstepReport> {
    if g.n_images() > MAX_VECTOR_NODES || g.n_tags() > MAX_VECTOR_NODES {
        return Err(Error::InvalidConfig(format!(
            "vector engine limited to {MAX_VECTOR_NODES} nodes per side"
        )));
    }
    let mut scalar = MessageState::new(g)?;
    let mut vector = VectorMessages::zeros(g);
    let mut report = LockstepReport {
        iterations,
        max_error: 0.0,
        assignment_mismatches: 0,
    };
    for _ in 0..iterations {
        scalar.sweep(g, pot, damping);
        vector_maxsum_iterate(&mut vector, g, pot, damping);
        let err = ScalarTables::from_state(&scalar).max_discrepancy(&reduce_to_scalar(&vector, g));
        report.max_error = report.max_error.max(err);
        if scalar.raw_assignment(g) != vector_assign(&vector, g) {
            report.assignment_mismatches += 1;
        }
    }
    Ok(report)
}
