//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use hetero_ap::HeteroGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Sims = Vec<(usize, usize, f64)>;

/// Raw inputs of one instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub images: Sims,
    pub tags: Sims,
    pub assoc: Vec<(usize, usize)>,
    pub n: usize,
    pub m: usize,
}

impl Instance {
    /// Graph with λ = 1 preferences, scaled.
    pub fn graph(&self) -> HeteroGraph {
        HeteroGraph::build(&self.images, &self.tags, &self.assoc, self.n, self.m)
            .unwrap()
            .set_preferences(1.0, 1.0)
            .unwrap()
            .scale_similarities()
            .unwrap()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dense_side(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Sims {
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if i != k {
                out.push((i, k, rng.gen_range(lo..hi)));
            }
        }
    }
    out
}

/// Dense uniform similarities in [lo, hi); every image gets at least one tag
/// and each further pair is linked with probability `p_link`.
pub fn dense(seed: u64, n: usize, m: usize, lo: f64, hi: f64, p_link: f64) -> Instance {
    let mut r = rng(seed);
    let images = dense_side(&mut r, n, lo, hi);
    let tags = dense_side(&mut r, m, lo, hi);
    let mut assoc = Vec::new();
    if m > 0 {
        for i in 0..n {
            let first: usize = r.gen_range(0..m);
            assoc.push((i, first));
            for j in 0..m {
                if j != first && r.gen_bool(p_link) {
                    assoc.push((i, j));
                }
            }
        }
    }
    Instance { images, tags, assoc, n, m }
}

/// Sparse random image graph with `degree` out-neighbours per node. No tags.
pub fn sparse_images(seed: u64, n: usize, degree: usize) -> Instance {
    let mut r = rng(seed);
    let images = sparse_side(&mut r, n, degree);
    Instance { images, tags: Vec::new(), assoc: Vec::new(), n, m: 0 }
}

/// Two planted clusters of equal size over images (3/3 for n = 6) and tags.
/// Within-cluster similarity `within`, across `cross`. Every image links to
/// all tags of its own cluster. The seed only permutes membership.
pub fn two_clusters(seed: u64, n: usize, m: usize, within: f64, cross: f64) -> Instance {
    let mut r = rng(seed);
    let mut img_cluster: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    img_cluster.shuffle(&mut r);
    let mut tag_cluster: Vec<usize> = (0..m).map(|j| usize::from(j >= m / 2)).collect();
    tag_cluster.shuffle(&mut r);
    let planted = |cl: &[usize]| {
        let mut out = Vec::new();
        for i in 0..cl.len() {
            for k in 0..cl.len() {
                if i != k {
                    out.push((i, k, if cl[i] == cl[k] { within } else { cross }));
                }
            }
        }
        out
    };
    let mut assoc = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if tag_cluster[j] == img_cluster[i] {
                assoc.push((i, j));
            }
        }
    }
    Instance {
        images: planted(&img_cluster),
        tags: planted(&tag_cluster),
        assoc,
        n,
        m,
    }
}

/// Topic corpus with weak visual structure and a clean tag hierarchy.
///
/// Image `i` belongs to topic `i % topics`. Tags `0..topics` are broad (one per
/// topic); every topic also has `specific` narrower tags. Broad tags sit close
/// to their topic's specific tags, specific tags are loosely related to each
/// other, and topics are far apart. The first `canonical` images of each
/// topic carry only the broad tag and are slightly more central visually;
/// every other image carries one random specific tag of its topic.
pub fn tag_hierarchy(seed: u64, topics: usize, per_topic: usize, specific: usize, canonical: usize) -> Instance {
    let mut r = rng(seed);
    let n = topics * per_topic;
    let m = topics * (specific + 1);
    let is_canonical = |i: usize| i / topics < canonical;
    let mut images = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let (lo, hi) = if i % topics != k % topics {
                (1.2, 2.7)
            } else if is_canonical(i) || is_canonical(k) {
                (0.9, 2.3)
            } else {
                (1.0, 2.5)
            };
            images.push((i, k, -r.gen_range(lo..hi)));
        }
    }
    let mut tags = Vec::new();
    for j in 0..m {
        for l in 0..m {
            if j == l {
                continue;
            }
            let s = if j % topics != l % topics {
                -r.gen_range(4.0..6.0)
            } else if j < topics || l < topics {
                -r.gen_range(0.05..0.2)
            } else {
                -r.gen_range(1.0..2.0)
            };
            tags.push((j, l, s));
        }
    }
    let mut assoc = Vec::new();
    for i in 0..n {
        let t = i % topics;
        if is_canonical(i) {
            assoc.push((i, t));
        } else {
            let narrow: Vec<usize> = (topics..m).filter(|&j| j % topics == t).collect();
            assoc.push((i, *narrow.choose(&mut r).unwrap()));
        }
    }
    Instance { images, tags, assoc, n, m }
}

fn sparse_side(r: &mut ChaCha8Rng, n: usize, degree: usize) -> Sims {
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n * degree);
    for i in 0..n {
        let picks: Vec<usize> = all
            .choose_multiple(r, degree + 1)
            .copied()
            .filter(|&k| k != i)
            .take(degree)
            .collect();
        for k in picks {
            out.push((i, k, -r.gen_range(0.1..5.0)));
        }
    }
    out
}

/// Sparse images and tags, `degree` out-neighbours per node on both sides,
/// `links` random tags per image.
pub fn sparse_hetero(seed: u64, n: usize, m: usize, degree: usize, links: usize) -> Instance {
    let mut r = rng(seed);
    let images = sparse_side(&mut r, n, degree);
    let tags = sparse_side(&mut r, m, degree);
    let all: Vec<usize> = (0..m).collect();
    let mut assoc = Vec::with_capacity(n * links);
    for i in 0..n {
        for &j in all.choose_multiple(&mut r, links) {
            assoc.push((i, j));
        }
    }
    Instance { images, tags, assoc, n, m }
}
