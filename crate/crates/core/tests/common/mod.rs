//! Brute-force references shared by the integration tests. Nothing here
//! calls into the library's algorithms.

#![allow(dead_code)]

use diffnet::ingest::ClassLabel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INF: usize = usize::MAX / 4;

/// Small graph as an adjacency matrix; self-loops never set.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Matrix {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a != b {
                adj[a][b] = true;
            }
        }
        Matrix { n, adj }
    }

    fn undirected(&self, a: usize, b: usize) -> bool {
        self.adj[a][b] || self.adj[b][a]
    }

    /// Transitive closure (reflexive).
    pub fn reach(&self) -> Vec<Vec<bool>> {
        let mut r = self.adj.clone();
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r
    }

    /// Undirected all-pairs distances by Floyd-Warshall.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut d = vec![vec![INF; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j && self.undirected(i, j) {
                    *cell = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    /// Groups nodes by an equivalence given as a boolean matrix.
    fn classes(&self, same: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for i in 0..self.n {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = (0..self.n).filter(|&j| same(i, j)).collect();
            for &j in &class {
                seen[j] = true;
            }
            out.push(class);
        }
        out
    }

    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let r = self.reach();
        self.classes(|i, j| r[i][j] && r[j][i])
    }

    pub fn wccs(&self) -> Vec<Vec<usize>> {
        let d = self.distances();
        self.classes(|i, j| d[i][j] < INF)
    }

    pub fn diameter(&self, nodes: &[usize]) -> usize {
        let d = self.distances();
        nodes
            .iter()
            .flat_map(|&i| nodes.iter().map(move |&j| (i, j)))
            .map(|(i, j)| d[i][j])
            .max()
            .unwrap_or(0)
    }

    pub fn virality(&self, nodes: &[usize]) -> f64 {
        let n = nodes.len();
        if n <= 1 {
            return 0.0;
        }
        let d = self.distances();
        let total: usize = nodes.iter().flat_map(|&i| nodes.iter().map(move |&j| (i, j))).map(|(i, j)| d[i][j]).sum();
        total as f64 / (n * (n - 1)) as f64
    }

    pub fn clustering(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for v in 0..self.n {
            let nb: Vec<usize> = (0..self.n).filter(|&u| u != v && self.undirected(u, v)).collect();
            let k = nb.len();
            if k < 2 {
                continue;
            }
            let mut closed = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if self.undirected(nb[a], nb[b]) {
                        closed += 1;
                    }
                }
            }
            sum += closed as f64 / (k * (k - 1) / 2) as f64;
        }
        sum / self.n as f64
    }

    /// Largest k such that some nonempty node subset has every member with
    /// total (in + out) degree >= k inside the subset. Exhaustive.
    pub fn main_kcore(&self) -> usize {
        let mut best = 0;
        for mask in 1u32..(1u32 << self.n) {
            let members: Vec<usize> = (0..self.n).filter(|&i| mask & (1 << i) != 0).collect();
            let min_deg = members
                .iter()
                .map(|&v| {
                    members
                        .iter()
                        .map(|&u| self.adj[v][u] as usize + self.adj[u][v] as usize)
                        .sum::<usize>()
                })
                .min()
                .unwrap_or(0);
            best = best.max(min_deg);
        }
        best
    }

    pub fn density(&self) -> f64 {
        if self.n <= 1 {
            return 0.0;
        }
        let e = self.adj.iter().flatten().filter(|&&x| x).count();
        e as f64 / (self.n * (self.n - 1)) as f64
    }
}

/// Random directed graph on 1..=max_n nodes with duplicate and self-loop
/// noise in the edge list.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=max_n);
    let p: f64 = rng.random_range(0.05..0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random::<f64>() < p {
                edges.push((a, b));
                if rng.random::<f64>() < 0.1 {
                    edges.push((a, b));
                }
            }
        }
    }
    (n, edges)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ROC area by the trapezoidal rule over the ROC curve (D positive).
pub fn trapezoid_auroc(truth: &[ClassLabel], scores: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let pos = truth.iter().filter(|&&l| l == ClassLabel::D).count() as f64;
    let neg = truth.len() as f64 - pos;
    let (mut tp, mut fp) = (0.0, 0.0);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if truth[idx[i]] == ClassLabel::D {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        let (tpr, fpr) = (tp / pos, fp / neg);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    area
}
