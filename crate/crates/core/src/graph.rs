//! Heterogeneous image/tag graph: two sparse homogeneous similarity graphs
//! bridged by image-tag association edges, plus the preference and balance
//! weight recipes and the heterogeneous edge potentials.
//!
//! Similarities are stored row-wise (CSR). Every row always carries a slot
//! for its diagonal, so the preference can be set in place. An off-diagonal
//! pair that is not stored is never a candidate exemplar pair.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, SideKind};

/// A sparse, possibly directed, similarity graph over one node set.
#[derive(Debug, Clone)]
pub struct Similarities {
    kind: SideKind,
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    raw: Vec<f64>,
    scaled: Vec<f64>,
    diag: Vec<usize>,
    diag_set: Vec<bool>,
    // Column index: for column k, the CSR positions of entries (i, k).
    col_ptr: Vec<usize>,
    col_pos: Vec<usize>,
}

impl Similarities {
    fn build(kind: SideKind, n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, k, s) in edges {
            for idx in [i, k] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange {
                        side: kind,
                        index: idx,
                        len: n,
                    });
                }
            }
            if s.is_nan() || s.is_infinite() {
                return Err(Error::NonFiniteSimilarity { side: kind, i, k });
            }
            if let Some(&prev) = map.get(&(i, k)) {
                if prev != s {
                    return Err(Error::ConflictingEdge {
                        side: kind,
                        i,
                        k,
                        first: prev,
                        second: s,
                    });
                }
            }
            map.insert((i, k), s);
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(map.len() + n);
        let mut raw = Vec::with_capacity(map.len() + n);
        let mut diag = vec![0; n];
        let mut diag_set = vec![false; n];
        let mut entries = map.into_iter().peekable();
        row_ptr.push(0);
        for i in 0..n {
            let mut placed_diag = false;
            while let Some(&((row, k), s)) = entries.peek() {
                if row != i {
                    break;
                }
                if !placed_diag && k > i {
                    diag[i] = cols.len();
                    cols.push(i);
                    raw.push(0.0);
                    placed_diag = true;
                }
                if k == i {
                    diag[i] = cols.len();
                    diag_set[i] = true;
                    placed_diag = true;
                }
                cols.push(k);
                raw.push(s);
                entries.next();
            }
            if !placed_diag {
                diag[i] = cols.len();
                cols.push(i);
                raw.push(0.0);
            }
            row_ptr.push(cols.len());
        }

        let mut col_counts = vec![0usize; n + 1];
        for &k in &cols {
            col_counts[k + 1] += 1;
        }
        for k in 0..n {
            col_counts[k + 1] += col_counts[k];
        }
        let col_ptr = col_counts.clone();
        let mut fill = col_counts;
        let mut col_pos = vec![0; cols.len()];
        for (pos, &k) in cols.iter().enumerate() {
            col_pos[fill[k]] = pos;
            fill[k] += 1;
        }

        let scaled = raw.clone();
        Ok(Self {
            kind,
            n,
            row_ptr,
            cols,
            raw,
            scaled,
            diag,
            diag_set,
            col_ptr,
            col_pos,
        })
    }

    pub fn kind(&self) -> SideKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of stored entries, diagonal slots included.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// CSR positions of row `i` (candidate exemplars of node `i`).
    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// CSR positions `p` with `col(p) == k`, in increasing row order.
    pub fn column(&self, k: usize) -> &[usize] {
        &self.col_pos[self.col_ptr[k]..self.col_ptr[k + 1]]
    }

    pub fn col(&self, pos: usize) -> usize {
        self.cols[pos]
    }

    /// Row owning CSR position `pos`.
    pub fn row_of(&self, pos: usize) -> usize {
        self.row_ptr.partition_point(|&start| start <= pos) - 1
    }

    pub fn diag_pos(&self, i: usize) -> usize {
        self.diag[i]
    }

    pub fn has_preference(&self, i: usize) -> bool {
        self.diag_set[i]
    }

    /// A node whose only candidate exemplar is itself.
    pub fn is_forced(&self, i: usize) -> bool {
        self.row_ptr[i + 1] - self.row_ptr[i] == 1
    }

    pub fn raw_at(&self, pos: usize) -> f64 {
        self.raw[pos]
    }

    pub fn scaled_at(&self, pos: usize) -> f64 {
        self.scaled[pos]
    }

    pub fn position(&self, i: usize, k: usize) -> Option<usize> {
        let range = self.row(i);
        self.cols[range.clone()]
            .binary_search(&k)
            .ok()
            .map(|off| range.start + off)
    }

    /// Raw similarity s'(i, k); `None` for a missing pair or an unset diagonal.
    pub fn raw(&self, i: usize, k: usize) -> Option<f64> {
        let pos = self.position(i, k)?;
        (i != k || self.diag_set[i]).then(|| self.raw[pos])
    }

    /// Scaled similarity s(i, k) = γ·s'(i, k).
    pub fn scaled(&self, i: usize, k: usize) -> Option<f64> {
        let pos = self.position(i, k)?;
        (i != k || self.diag_set[i]).then(|| self.scaled[pos])
    }

    /// Scaled preferences s(i, i), failing on the first unset diagonal.
    pub fn preferences(&self) -> Result<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                if self.diag_set[i] {
                    Ok(self.scaled[self.diag[i]])
                } else {
                    Err(Error::MissingPreference {
                        side: self.kind,
                        node: i,
                    })
                }
            })
            .collect()
    }

    pub fn off_diagonal_raw(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .filter(move |&p| p != self.diag[i])
                .map(move |p| self.raw[p])
        })
    }

    /// Lower-middle median of the stored off-diagonal raw similarities.
    pub fn off_diagonal_median(&self) -> Option<f64> {
        let mut values: Vec<f64> = self.off_diagonal_raw().collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Some(values[(values.len() - 1) / 2])
    }

    fn set_preferences(&mut self, lambda: f64) -> Result<()> {
        let pref = match self.off_diagonal_median() {
            Some(med) => lambda * med,
            None if self.n > 1 => {
                return Err(Error::NoOffDiagonal {
                    side: self.kind,
                    n: self.n,
                })
            }
            None => {
                // Singleton: nothing to take a median of; keep what was given.
                for i in 0..self.n {
                    self.diag_set[i] = true;
                }
                return Ok(());
            }
        };
        for i in 0..self.n {
            self.raw[self.diag[i]] = pref;
            self.diag_set[i] = true;
        }
        Ok(())
    }

    fn scale(&mut self) -> Result<f64> {
        let gamma = match self.off_diagonal_median() {
            Some(med) if med == 0.0 => return Err(Error::ZeroMedian { side: self.kind }),
            Some(med) => 1.0 / med.abs(),
            None => 1.0,
        };
        for (s, &r) in self.scaled.iter_mut().zip(&self.raw) {
            *s = gamma * r;
        }
        Ok(gamma)
    }
}

/// Two homogeneous similarity graphs plus the image-tag association edges.
#[derive(Debug, Clone)]
pub struct HeteroGraph {
    images: Similarities,
    tags: Similarities,
    assoc: Vec<(usize, usize)>,
    image_edges: Vec<Vec<usize>>,
    tag_edges: Vec<Vec<usize>>,
    gamma_image: f64,
    gamma_tag: f64,
    scaled: bool,
}

impl HeteroGraph {
    /// Builds the graph from raw edge lists. Similarities are stored as given;
    /// symmetry is not enforced. Identical duplicates are merged.
    pub fn build(
        image_edges: &[(usize, usize, f64)],
        tag_edges: &[(usize, usize, f64)],
        assoc: &[(usize, usize)],
        n_images: usize,
        n_tags: usize,
    ) -> Result<Self> {
        let images = Similarities::build(SideKind::Image, n_images, image_edges)?;
        let tags = Similarities::build(SideKind::Tag, n_tags, tag_edges)?;
        let mut assoc = assoc.to_vec();
        for &(i, j) in &assoc {
            if i >= n_images {
                return Err(Error::IndexOutOfRange {
                    side: SideKind::Image,
                    index: i,
                    len: n_images,
                });
            }
            if j >= n_tags {
                return Err(Error::IndexOutOfRange {
                    side: SideKind::Tag,
                    index: j,
                    len: n_tags,
                });
            }
        }
        assoc.sort_unstable();
        assoc.dedup();
        let mut by_image = vec![Vec::new(); n_images];
        let mut by_tag = vec![Vec::new(); n_tags];
        for (e, &(i, j)) in assoc.iter().enumerate() {
            by_image[i].push(e);
            by_tag[j].push(e);
        }
        Ok(Self {
            images,
            tags,
            assoc,
            image_edges: by_image,
            tag_edges: by_tag,
            gamma_image: 1.0,
            gamma_tag: 1.0,
            scaled: false,
        })
    }

    pub fn images(&self) -> &Similarities {
        &self.images
    }

    pub fn tags(&self) -> &Similarities {
        &self.tags
    }

    pub fn side(&self, kind: SideKind) -> &Similarities {
        match kind {
            SideKind::Image => &self.images,
            SideKind::Tag => &self.tags,
        }
    }

    pub fn n_images(&self) -> usize {
        self.images.n
    }

    pub fn n_tags(&self) -> usize {
        self.tags.n
    }

    /// Association edges E^R, sorted by (image, tag); edge ids index this slice.
    pub fn assoc(&self) -> &[(usize, usize)] {
        &self.assoc
    }

    /// Edge ids incident to image `i`.
    pub fn image_assoc(&self, i: usize) -> &[usize] {
        &self.image_edges[i]
    }

    /// Edge ids incident to tag `j`.
    pub fn tag_assoc(&self, j: usize) -> &[usize] {
        &self.tag_edges[j]
    }

    pub fn edge_id(&self, i: usize, j: usize) -> Option<usize> {
        self.assoc.binary_search(&(i, j)).ok()
    }

    /// |E^R_{i.}|
    pub fn image_degree(&self, i: usize) -> usize {
        self.image_edges[i].len()
    }

    /// |E^R_{.j}|
    pub fn tag_degree(&self, j: usize) -> usize {
        self.tag_edges[j].len()
    }

    pub fn gamma_image(&self) -> f64 {
        self.gamma_image
    }

    pub fn gamma_tag(&self) -> f64 {
        self.gamma_tag
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    /// Total |E^I| + |E^W| + |E^R| (off-diagonal similarities plus associations).
    pub fn edge_count(&self) -> usize {
        self.images.nnz() - self.images.n + self.tags.nnz() - self.tags.n + self.assoc.len()
    }

    /// Sets every preference s'(i,i) to λ times the lower-middle median of
    /// that side's off-diagonal similarities. Supplied diagonals are replaced.
    pub fn set_preferences(mut self, lambda_image: f64, lambda_tag: f64) -> Result<Self> {
        if self.scaled {
            return Err(Error::AlreadyScaled);
        }
        self.images.set_preferences(lambda_image)?;
        self.tags.set_preferences(lambda_tag)?;
        Ok(self)
    }

    /// Applies s = γ·s' on both sides with γ = 1/|Med(off-diagonal s')|.
    pub fn scale_similarities(mut self) -> Result<Self> {
        if self.scaled {
            return Err(Error::AlreadyScaled);
        }
        self.images.preferences()?;
        self.tags.preferences()?;
        self.gamma_image = self.images.scale()?;
        self.gamma_tag = self.tags.scale()?;
        self.scaled = true;
        Ok(self)
    }

    /// Adds a seeded relative jitter of at most 1e-12 to every scaled
    /// similarity, breaking exact ties between otherwise symmetric candidates.
    pub fn perturb_ties(mut self, seed: u64) -> Result<Self> {
        if !self.scaled {
            return Err(Error::NotScaled);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for side in [&mut self.images, &mut self.tags] {
            for s in side.scaled.iter_mut() {
                let u: f64 = rng.gen_range(-1.0..1.0);
                *s += s.abs() * 1e-12 * u;
            }
        }
        Ok(self)
    }
}

/// The four weights of the heterogeneous potential e_ij on one association edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePotential {
    /// p(i,j): image self-exemplar, tag not.
    pub p_img: f64,
    /// p(j,i): tag self-exemplar, image not.
    pub p_tag: f64,
    /// q(i,j): neither is its own exemplar.
    pub q: f64,
    /// q̄(i,j): both are their own exemplars.
    pub q_bar: f64,
}

impl EdgePotential {
    pub const ZERO: EdgePotential = EdgePotential {
        p_img: 0.0,
        p_tag: 0.0,
        q: 0.0,
        q_bar: 0.0,
    };

    /// e_ij evaluated at the self-exemplar indicators of image i and tag j.
    pub fn value(&self, image_self: bool, tag_self: bool) -> f64 {
        match (image_self, tag_self) {
            (false, false) => self.q,
            (true, true) => self.q_bar,
            (true, false) => self.p_img,
            (false, true) => self.p_tag,
        }
    }
}

/// Heterogeneous potentials aligned with [`HeteroGraph::assoc`].
#[derive(Debug, Clone, PartialEq)]
pub struct HetPotential {
    edges: Vec<(usize, usize)>,
    weights: Vec<EdgePotential>,
}

impl HetPotential {
    /// p(i,j) = θ/|E^R_{i.}|, p(j,i) = θ/|E^R_{.j}|, q = q̄ = 0.
    pub fn build(g: &HeteroGraph, theta: f64) -> Result<Self> {
        if !(theta <= 0.0) || theta.is_infinite() {
            return Err(Error::InvalidTheta(theta));
        }
        let weights = g
            .assoc()
            .iter()
            .map(|&(i, j)| EdgePotential {
                p_img: theta / g.image_degree(i) as f64,
                p_tag: theta / g.tag_degree(j) as f64,
                q: 0.0,
                q_bar: 0.0,
            })
            .collect();
        Ok(Self {
            edges: g.assoc().to_vec(),
            weights,
        })
    }

    /// All-zero potentials (no heterogeneous coupling).
    pub fn zero(g: &HeteroGraph) -> Self {
        Self {
            edges: g.assoc().to_vec(),
            weights: vec![EdgePotential::ZERO; g.assoc().len()],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, edge: usize) -> &EdgePotential {
        &self.weights[edge]
    }

    pub fn weights(&self) -> &[EdgePotential] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [EdgePotential] {
        &mut self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&EdgePotential> {
        self.edges
            .binary_search(&(i, j))
            .ok()
            .map(|e| &self.weights[e])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    out.push((i, k, f(i, k)));
                }
            }
        }
        out
    }

    #[test]
    fn minimal_graph() {
        let g = HeteroGraph::build(&[(0, 1, -1.0), (1, 0, -1.0)], &[], &[], 2, 0).unwrap();
        assert_eq!(g.n_images(), 2);
        assert_eq!(g.n_tags(), 0);
        assert_eq!(g.images().raw(0, 1), Some(-1.0));
        assert_eq!(g.images().raw(0, 0), None);
    }

    #[test]
    fn single_association_degrees() {
        let g = HeteroGraph::build(&[], &[], &[(0, 0)], 1, 1).unwrap();
        assert_eq!(g.image_degree(0), 1);
        assert_eq!(g.tag_degree(0), 1);
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let err = HeteroGraph::build(&[(0, 1, -1.0), (0, 1, -2.0)], &[], &[], 2, 0).unwrap_err();
        assert!(matches!(err, Error::ConflictingEdge { i: 0, k: 1, .. }));
        // identical duplicates are fine
        HeteroGraph::build(&[(0, 1, -1.0), (0, 1, -1.0)], &[], &[], 2, 0).unwrap();
    }

    #[test]
    fn out_of_range_and_nan() {
        assert!(matches!(
            HeteroGraph::build(&[(0, 2, -1.0)], &[], &[], 2, 0),
            Err(Error::IndexOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            HeteroGraph::build(&[], &[], &[(0, 1)], 1, 1),
            Err(Error::IndexOutOfRange { side: SideKind::Tag, .. })
        ));
        assert!(matches!(
            HeteroGraph::build(&[(0, 1, f64::NAN)], &[], &[], 2, 0),
            Err(Error::NonFiniteSimilarity { .. })
        ));
    }

    #[test]
    fn csr_keeps_diagonal_slot_in_order() {
        let g = HeteroGraph::build(&[(1, 2, -1.0), (1, 0, -2.0), (0, 0, -4.0)], &[], &[], 3, 0)
            .unwrap();
        let s = g.images();
        let row1: Vec<usize> = s.row(1).map(|p| s.col(p)).collect();
        assert_eq!(row1, vec![0, 1, 2]);
        assert!(s.has_preference(0));
        assert!(!s.has_preference(1));
        assert!(s.is_forced(2));
        for k in 0..3 {
            for &p in s.column(k) {
                assert_eq!(s.col(p), k);
            }
        }
        assert_eq!(s.row_of(s.diag_pos(2)), 2);
    }

    #[test]
    fn median_preferences() {
        // three off-diagonal values {-1,-2,-3}
        let edges = [(0, 1, -1.0), (1, 2, -2.0), (2, 0, -3.0)];
        let g = HeteroGraph::build(&edges, &[], &[], 3, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap();
        for i in 0..3 {
            assert_eq!(g.images().raw(i, i), Some(-2.0));
        }
        let g0 = HeteroGraph::build(&edges, &[], &[], 3, 0)
            .unwrap()
            .set_preferences(0.0, 1.0)
            .unwrap();
        for i in 0..3 {
            assert_eq!(g0.images().raw(i, i), Some(0.0));
        }
    }

    #[test]
    fn even_median_takes_lower_middle() {
        let edges = [(0, 1, -1.0), (1, 0, -2.0), (0, 2, -3.0), (2, 0, -4.0)];
        let g = HeteroGraph::build(&edges, &[], &[], 3, 0)
            .unwrap()
            .set_preferences(2.0, 1.0)
            .unwrap();
        assert_eq!(g.images().raw(1, 1), Some(-6.0));
    }

    #[test]
    fn preferences_need_off_diagonals() {
        let err = HeteroGraph::build(&[(0, 0, -1.0)], &[], &[], 2, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::NoOffDiagonal { n: 2, .. }));
        // a singleton side is fine
        HeteroGraph::build(&[], &[], &[], 1, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap();
    }

    #[test]
    fn scaling_uses_absolute_median() {
        let edges = [(0, 1, -1.0), (1, 0, -2.0), (0, 2, -3.0)];
        let g = HeteroGraph::build(&edges, &[], &[], 3, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap()
            .scale_similarities()
            .unwrap();
        assert_eq!(g.gamma_image(), 0.5);
        assert_eq!(g.images().scaled(0, 1), Some(-0.5));
        assert_eq!(g.images().scaled(0, 0), Some(-1.0));
        assert!(g.is_scaled());
        assert!(matches!(
            g.clone().scale_similarities(),
            Err(Error::AlreadyScaled)
        ));
        assert!(matches!(g.set_preferences(1.0, 1.0), Err(Error::AlreadyScaled)));
    }

    #[test]
    fn unit_median_is_unchanged() {
        let g = HeteroGraph::build(&dense(3, |_, _| -1.0), &[], &[], 3, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap()
            .scale_similarities()
            .unwrap();
        assert_eq!(g.gamma_image(), 1.0);
        assert_eq!(g.images().scaled(2, 1), Some(-1.0));
    }

    #[test]
    fn zero_median_rejected() {
        let err = HeteroGraph::build(&dense(3, |_, _| 0.0), &[], &[], 3, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap()
            .scale_similarities()
            .unwrap_err();
        assert!(matches!(err, Error::ZeroMedian { side: SideKind::Image }));
    }

    #[test]
    fn scaling_requires_preferences() {
        let err = HeteroGraph::build(&dense(2, |_, _| -1.0), &[], &[], 2, 0)
            .unwrap()
            .scale_similarities()
            .unwrap_err();
        assert!(matches!(err, Error::MissingPreference { .. }));
    }

    #[test]
    fn potentials_divide_theta_by_degree() {
        let assoc = [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0), (3, 0), (4, 0)];
        let g = HeteroGraph::build(&[], &[], &assoc, 5, 3).unwrap();
        let pot = HetPotential::build(&g, -15.0).unwrap();
        for j in 0..3 {
            assert_eq!(pot.get(0, j).unwrap().p_img, -5.0);
        }
        // tag 0 is linked to 5 images
        for i in 0..5 {
            let w = pot.get(i, 0).unwrap();
            assert_eq!(w.p_tag, -3.0);
            assert_eq!((w.q, w.q_bar), (0.0, 0.0));
        }
        let zero = HetPotential::build(&g, 0.0).unwrap();
        assert!(zero.weights().iter().all(|w| *w == EdgePotential::ZERO));
        assert!(matches!(HetPotential::build(&g, 1.0), Err(Error::InvalidTheta(_))));
        assert!(matches!(
            HetPotential::build(&g, f64::NAN),
            Err(Error::InvalidTheta(_))
        ));
    }

    #[test]
    fn potentials_conserve_theta_per_image() {
        let assoc = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 0)];
        let g = HeteroGraph::build(&[], &[], &assoc, 3, 3).unwrap();
        let pot = HetPotential::build(&g, -7.0).unwrap();
        for i in 0..3 {
            let sum: f64 = g.image_assoc(i).iter().map(|&e| pot.weight(e).p_img).sum();
            assert!((sum + 7.0).abs() < 1e-12);
        }
        for j in 0..3 {
            let sum: f64 = g.tag_assoc(j).iter().map(|&e| pot.weight(e).p_tag).sum();
            assert!((sum + 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_is_seeded_and_tiny() {
        let g = HeteroGraph::build(&dense(4, |i, k| -((i + k) as f64)), &[], &[], 4, 0)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap()
            .scale_similarities()
            .unwrap();
        let a = g.clone().perturb_ties(7).unwrap();
        let b = g.clone().perturb_ties(7).unwrap();
        for p in 0..g.images().nnz() {
            assert_eq!(a.images().scaled_at(p), b.images().scaled_at(p));
            let base = g.images().scaled_at(p);
            assert!((a.images().scaled_at(p) - base).abs() <= base.abs() * 1e-12);
        }
    }
}
