//! Weight-agnostic directed graph algorithms.
//!
//! Graphs are simple: parallel edges collapse and self-loops are dropped at
//! construction. Nodes are dense indices; when built from labels, indices
//! follow the lexicographic order of the labels so every result is
//! independent of insertion order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectedGraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    // undirected simple neighbourhoods
    und: Vec<Vec<usize>>,
    n_edges: usize,
}

impl DirectedGraph {
    /// Builds a graph on `n` nodes from index pairs.
    ///
    /// Panics if an edge references a node `>= n`.
    pub fn from_index_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut und: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(a, b) in &set {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            out[a].push(b);
            inc[b].push(a);
            und[a].insert(b);
            und[b].insert(a);
        }
        DirectedGraph {
            out,
            inc,
            und: und.into_iter().map(|s| s.into_iter().collect()).collect(),
            n_edges: set.len(),
        }
    }

    /// Builds a graph from labelled edges. Returns the graph and the node
    /// labels in index order (sorted).
    pub fn from_labeled_edges<'a, I>(edges: I) -> (Self, Vec<String>)
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let edges: Vec<(&str, &str)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let labels: BTreeSet<&str> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let g = Self::from_index_edges(
            labels.len(),
            edges.iter().map(|(a, b)| (index[a], index[b])),
        );
        (g, labels.into_iter().map(str::to_string).collect())
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Neighbours in the undirected simple projection.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.und[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, succ)| succ.iter().map(move |&b| (a, b)))
    }
}

/// Strongly connected components (iterative Tarjan). Each component is
/// sorted; components are ordered by their smallest node.
pub fn strongly_connected_components(g: &DirectedGraph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    // (node, position in successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.successors(v).get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Weakly connected components. Each component is sorted; components are
/// ordered by their smallest node.
pub fn weakly_connected_components(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Undirected BFS distances from `src` restricted to `member` nodes.
/// Returns the sum and the maximum of distances, and the number reached.
fn bfs_stats(g: &DirectedGraph, src: usize, member: &[bool], dist: &mut [usize]) -> (usize, usize, usize) {
    const INF: usize = usize::MAX;
    dist.iter_mut().for_each(|d| *d = INF);
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    let (mut sum, mut max, mut reached) = (0usize, 0usize, 0usize);
    while let Some(v) = queue.pop_front() {
        reached += 1;
        sum += dist[v];
        max = max.max(dist[v]);
        for &w in g.neighbors(v) {
            if member[w] && dist[w] == INF {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (sum, max, reached)
}

/// Runs BFS from every node of `nodes`; returns (Wiener sum over ordered
/// pairs, eccentricity maximum).
fn all_pairs(g: &DirectedGraph, nodes: &[usize]) -> Result<(usize, usize)> {
    let mut member = vec![false; g.node_count()];
    for &v in nodes {
        member[v] = true;
    }
    let distinct = member.iter().filter(|&&m| m).count();
    let mut dist = vec![0usize; g.node_count()];
    let (mut total, mut diameter) = (0usize, 0usize);
    for &v in nodes {
        let (sum, max, reached) = bfs_stats(g, v, &member, &mut dist);
        if reached != distinct {
            return Err(Error::Disconnected);
        }
        total += sum;
        diameter = diameter.max(max);
    }
    Ok((total, diameter))
}

/// Largest undirected shortest-path distance within `nodes`, which must
/// induce a connected subgraph. A single node has diameter 0.
pub fn diameter_undirected(g: &DirectedGraph, nodes: &[usize]) -> Result<usize> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("diameter of an empty node set".into()));
    }
    all_pairs(g, nodes).map(|(_, d)| d)
}

/// Mean undirected shortest-path distance over ordered pairs of distinct
/// nodes in `nodes` (Wiener index × 2 / (|V|(|V|-1))). Zero for one node.
pub fn structural_virality(g: &DirectedGraph, nodes: &[usize]) -> Result<f64> {
    let n = nodes.len();
    match n {
        0 => Err(Error::InvalidArgument("structural virality of an empty node set".into())),
        1 => Ok(0.0),
        _ => {
            let (total, _) = all_pairs(g, nodes)?;
            Ok(total as f64 / (n * (n - 1)) as f64)
        }
    }
}

/// Average local clustering coefficient on the undirected simple
/// projection; nodes of degree < 2 contribute 0.
pub fn average_clustering(g: &DirectedGraph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut mark = vec![false; n];
    let mut total = 0.0;
    for v in 0..n {
        let nb = g.neighbors(v);
        let k = nb.len();
        if k < 2 {
            continue;
        }
        nb.iter().for_each(|&w| mark[w] = true);
        let mut links = 0usize;
        for &w in nb {
            links += g.neighbors(w).iter().filter(|&&x| mark[x]).count();
        }
        nb.iter().for_each(|&w| mark[w] = false);
        // each triangle edge counted from both ends
        total += links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}

/// Per-node core numbers using total degree (in + out) of the simple
/// directed graph. Bucket peeling, O(V + E).
pub fn core_numbers(g: &DirectedGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n)
        .map(|v| g.successors(v).len() + g.predecessors(v).len())
        .collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    // Batagelj-Zaversnik: nodes sorted by degree with bucket offsets.
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        order[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;
    for i in 0..n {
        let v = order[i];
        let dv = degree[v];
        for &u in g.successors(v).iter().chain(g.predecessors(v)) {
            if degree[u] > dv {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree
}

/// Largest k whose k-core (total degree) is nonempty; 0 for the empty graph.
pub fn main_kcore_number(g: &DirectedGraph) -> usize {
    core_numbers(g).into_iter().max().unwrap_or(0)
}

/// |E| / (|V|(|V|-1)) with each ordered pair counted once; 0 when |V| <= 1.
pub fn density(g: &DirectedGraph) -> f64 {
    let n = g.node_count();
    if n <= 1 {
        return 0.0;
    }
    g.edge_count() as f64 / (n * (n - 1)) as f64
}
