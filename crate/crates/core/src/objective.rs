//! Exact evaluation of the joint image/tag objective, the validity terms,
//! and the exemplarness report metrics.

use serde::Serialize;

use crate::error::{Error, Result, SideKind};
use crate::graph::{HetPotential, HeteroGraph};

/// Joint labeling: `c[i]` is the exemplar of image `i`, `b[j]` of tag `j`.
/// Validity is a property to query, not a construction guarantee.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Labeling {
    pub c: Vec<usize>,
    pub b: Vec<usize>,
}

impl Labeling {
    pub fn new(c: Vec<usize>, b: Vec<usize>) -> Self {
        Self { c, b }
    }

    pub fn is_valid(&self) -> bool {
        is_valid(&self.c) && is_valid(&self.b)
    }
}

/// Terms of S(c, b). Validity terms are 0 or −∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub fit_image: f64,
    pub fit_tag: f64,
    pub validity_image: f64,
    pub validity_tag: f64,
    pub hetero: f64,
    pub total: f64,
}

fn is_valid(labels: &[usize]) -> bool {
    labels.iter().all(|&k| k < labels.len() && labels[k] == k)
}

/// Σ_k δ_k(labels): −∞ if some node is chosen as exemplar without choosing itself.
pub fn validity(labels: &[usize]) -> Result<f64> {
    let n = labels.len();
    if let Some(&bad) = labels.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange {
            side: SideKind::Image,
            index: bad,
            len: n,
        });
    }
    Ok(if is_valid(labels) { 0.0 } else { f64::NEG_INFINITY })
}

/// e_ij for edge (i, j) given whether image i and tag j are their own exemplars.
pub fn het_term(pot: &HetPotential, edge: (usize, usize), image_self: bool, tag_self: bool) -> Result<f64> {
    pot.get(edge.0, edge.1)
        .map(|w| w.value(image_self, tag_self))
        .ok_or(Error::NotAnEdge(edge.0, edge.1))
}

fn check_labels(labels: &[usize], n: usize, side: SideKind) -> Result<()> {
    if labels.len() != n {
        return Err(Error::LabelLength {
            side,
            got: labels.len(),
            expected: n,
        });
    }
    if let Some(&bad) = labels.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange {
            side,
            index: bad,
            len: n,
        });
    }
    Ok(())
}

fn fit(side: &crate::graph::Similarities, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &k)| side.scaled(i, k).unwrap_or(f64::NEG_INFINITY))
        .sum()
}

/// S(c, b) on the scaled similarities, term by term.
pub fn evaluate(g: &HeteroGraph, pot: &HetPotential, labels: &Labeling) -> Result<ObjectiveBreakdown> {
    if !g.is_scaled() {
        return Err(Error::NotScaled);
    }
    check_labels(&labels.c, g.n_images(), SideKind::Image)?;
    check_labels(&labels.b, g.n_tags(), SideKind::Tag)?;
    if pot.len() != g.assoc().len() {
        return Err(Error::InvalidConfig(
            "potentials do not match the graph's association edges".into(),
        ));
    }
    let fit_image = fit(g.images(), &labels.c);
    let fit_tag = fit(g.tags(), &labels.b);
    let validity_image = validity(&labels.c)?;
    let validity_tag = validity(&labels.b)?;
    let hetero = g
        .assoc()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| pot.weight(e).value(labels.c[i] == i, labels.b[j] == j))
        .sum();
    Ok(ObjectiveBreakdown {
        fit_image,
        fit_tag,
        validity_image,
        validity_tag,
        hetero,
        total: fit_image + validity_image + fit_tag + validity_tag + hetero,
    })
}

/// Mean raw image similarity between each image and its exemplar.
pub fn visual_exemplarness(g: &HeteroGraph, c: &[usize]) -> Result<f64> {
    check_labels(c, g.n_images(), SideKind::Image)?;
    if c.is_empty() {
        return Err(Error::InvalidConfig("no images".into()));
    }
    let mut total = 0.0;
    for (i, &k) in c.iter().enumerate() {
        total += g.images().raw(i, k).ok_or(Error::MissingSimilarity {
            side: SideKind::Image,
            i,
            k,
        })?;
    }
    Ok(total / c.len() as f64)
}

/// Mean, over images, of the tag-set similarity between an image's tags and
/// its exemplar's tags. Set similarity is the mean over the image's tags of
/// the best raw tag similarity to any exemplar tag.
pub fn semantic_exemplarness(g: &HeteroGraph, c: &[usize]) -> Result<f64> {
    check_labels(c, g.n_images(), SideKind::Image)?;
    let tags_of = |i: usize| g.image_assoc(i).iter().map(|&e| g.assoc()[e].1);
    let mut total = 0.0;
    let mut counted = 0usize;
    for (i, &k) in c.iter().enumerate() {
        let mut set_total = 0.0;
        let mut matched = 0usize;
        for t in tags_of(i) {
            let best = tags_of(k)
                .filter_map(|u| g.tags().raw(t, u))
                .fold(f64::NEG_INFINITY, f64::max);
            if best > f64::NEG_INFINITY {
                set_total += best;
                matched += 1;
            }
        }
        if matched > 0 {
            total += set_total / matched as f64;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(Error::NoSemanticPairs);
    }
    Ok(total / counted as f64)
}

/// Everything a solver reports about its final labeling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub image_exemplars: Vec<usize>,
    pub image_assignment: Vec<usize>,
    pub tag_exemplars: Vec<usize>,
    pub tag_assignment: Vec<usize>,
    pub objective: ObjectiveBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub visual_exemplarness: Option<f64>,
    pub semantic_exemplarness: Option<f64>,
}

pub(crate) fn exemplars(labels: &[usize]) -> Vec<usize> {
    let mut ex: Vec<usize> = labels.to_vec();
    ex.sort_unstable();
    ex.dedup();
    ex
}

impl SolveResult {
    pub fn assemble(
        g: &HeteroGraph,
        pot: &HetPotential,
        labels: Labeling,
        iterations: usize,
        converged: bool,
    ) -> Result<Self> {
        let objective = evaluate(g, pot, &labels)?;
        let visual = if g.n_images() > 0 {
            visual_exemplarness(g, &labels.c).ok()
        } else {
            None
        };
        let semantic = semantic_exemplarness(g, &labels.c).ok();
        Ok(Self {
            image_exemplars: exemplars(&labels.c),
            tag_exemplars: exemplars(&labels.b),
            image_assignment: labels.c,
            tag_assignment: labels.b,
            objective,
            iterations,
            converged,
            visual_exemplarness: visual,
            semantic_exemplarness: semantic,
        })
    }

    pub fn labeling(&self) -> Labeling {
        Labeling::new(self.image_assignment.clone(), self.tag_assignment.clone())
    }

    /// Re-evaluates the objective under different potentials (e.g. scoring
    /// an uncoupled AP labeling against the coupled objective).
    pub fn reevaluate(&mut self, g: &HeteroGraph, pot: &HetPotential) -> Result<()> {
        self.objective = evaluate(g, pot, &self.labeling())?;
        Ok(())
    }
}
