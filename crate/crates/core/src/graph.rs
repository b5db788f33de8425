//! Bipartite view of directed networks, matchings and control configurations.
//!
//! A directed edge `l -> r` becomes the bipartite edge `(l, r)` between left
//! copy `l` and right copy `r`. Parallel edges are kept as multiplicity.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Mutable bipartite multigraph with `n` vertices on each side.
///
/// Incident edge lists are stored once in CSR form. Removing a vertex marks
/// its edges dead and updates degrees on both sides eagerly.
#[derive(Clone, Debug)]
pub struct BipartiteNet {
    n: usize,
    edges: Vec<(usize, usize)>,
    alive: Vec<bool>,
    left_off: Vec<usize>,
    left_inc: Vec<usize>,
    right_off: Vec<usize>,
    right_inc: Vec<usize>,
    deg_left: Vec<usize>,
    deg_right: Vec<usize>,
    edge_count: usize,
}

fn csr(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut off = vec![0usize; n + 1];
    for k in keys.clone() {
        off[k + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut inc = vec![0usize; off[n]];
    for (e, k) in keys.enumerate() {
        inc[fill[k]] = e;
        fill[k] += 1;
    }
    (off, inc)
}

impl BipartiteNet {
    pub fn empty(n: usize) -> Self {
        Self::from_pairs_unchecked(n, Vec::new())
    }

    /// Builds the net from `(left, right)` pairs.
    pub fn from_bipartite_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some((i, &(l, r))) = edges.iter().enumerate().find(|(_, &(l, r))| l >= n || r >= n) {
            return Err(Error::Input(format!(
                "edge {i} ({l}, {r}) has a vertex id outside [0, {n})"
            )));
        }
        Ok(Self::from_pairs_unchecked(n, edges))
    }

    pub(crate) fn from_pairs_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let (left_off, left_inc) = csr(n, edges.iter().map(|e| e.0));
        let (right_off, right_inc) = csr(n, edges.iter().map(|e| e.1));
        let deg_left = (0..n).map(|u| left_off[u + 1] - left_off[u]).collect();
        let deg_right = (0..n).map(|v| right_off[v + 1] - right_off[v]).collect();
        let edge_count = edges.len();
        BipartiteNet {
            n,
            alive: vec![true; edges.len()],
            edges,
            left_off,
            left_inc,
            right_off,
            right_inc,
            deg_left,
            deg_right,
            edge_count,
        }
    }

    /// One bipartite edge per directed edge `from -> to`.
    pub fn from_directed_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_bipartite_edges(n, edges.to_vec())
    }

    /// Each undirected edge `{i, j}` yields `(i, j)` and `(j, i)`; a self-loop yields one edge.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = Vec::with_capacity(2 * edges.len());
        for &(i, j) in edges {
            out.push((i, j));
            if i != j {
                out.push((j, i));
            }
        }
        Self::from_bipartite_edges(n, out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges still present.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, side: Side, v: usize) -> usize {
        match side {
            Side::Left => self.deg_left[v],
            Side::Right => self.deg_right[v],
        }
    }

    pub fn degrees(&self, side: Side) -> &[usize] {
        match side {
            Side::Left => &self.deg_left,
            Side::Right => &self.deg_right,
        }
    }

    fn incident(&self, side: Side, v: usize) -> &[usize] {
        match side {
            Side::Left => &self.left_inc[self.left_off[v]..self.left_off[v + 1]],
            Side::Right => &self.right_inc[self.right_off[v]..self.right_off[v + 1]],
        }
    }

    fn far_end(&self, side: Side, e: usize) -> usize {
        match side {
            Side::Left => self.edges[e].1,
            Side::Right => self.edges[e].0,
        }
    }

    /// Live neighbours of `v`, repeated according to multiplicity.
    pub fn neighbors(&self, side: Side, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident(side, v)
            .iter()
            .filter(|&&e| self.alive[e])
            .map(move |&e| self.far_end(side, e))
    }

    /// Live edges as `(left, right)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&e, _)| e)
    }

    pub fn has_edge(&self, l: usize, r: usize) -> bool {
        l < self.n && r < self.n && self.neighbors(Side::Left, l).any(|x| x == r)
    }

    /// A neighbour of `v` chosen uniformly over live incident edges.
    pub fn random_neighbor<R: Rng + ?Sized>(&self, side: Side, v: usize, rng: &mut R) -> Option<usize> {
        let d = self.degree(side, v);
        if d == 0 {
            return None;
        }
        let k = rng.random_range(0..d);
        self.neighbors(side, v).nth(k)
    }

    /// Deletes every edge at `v`. `on_drop(w, deg)` is called for each
    /// neighbour `w` on the other side with its new degree.
    pub fn remove_vertex_with(&mut self, side: Side, v: usize, mut on_drop: impl FnMut(usize, usize)) {
        if self.degree(side, v) == 0 {
            return;
        }
        let (lo, hi) = match side {
            Side::Left => (self.left_off[v], self.left_off[v + 1]),
            Side::Right => (self.right_off[v], self.right_off[v + 1]),
        };
        for i in lo..hi {
            let e = match side {
                Side::Left => self.left_inc[i],
                Side::Right => self.right_inc[i],
            };
            if !self.alive[e] {
                continue;
            }
            self.alive[e] = false;
            self.edge_count -= 1;
            let w = self.far_end(side, e);
            let d = match side {
                Side::Left => &mut self.deg_right[w],
                Side::Right => &mut self.deg_left[w],
            };
            *d -= 1;
            on_drop(w, *d);
        }
        match side {
            Side::Left => self.deg_left[v] = 0,
            Side::Right => self.deg_right[v] = 0,
        }
    }

    pub fn remove_vertex(&mut self, side: Side, v: usize) {
        self.remove_vertex_with(side, v, |_, _| {});
    }

    /// Sorted, duplicate-free right neighbours of every left vertex.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.n)
            .map(|u| self.neighbors(Side::Left, u).collect())
            .collect();
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Count of vertices per degree on one side. Counts sum to `n`.
pub fn degree_histogram(net: &BipartiteNet, side: Side) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &d in net.degrees(side) {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

/// A set of `(left, right)` pairs. Validity is checked by [`validate_matching`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(n: usize) -> Self {
        Matching { n, pairs: Vec::new() }
    }

    pub fn from_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        Matching { n, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn matched_left(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &(l, _) in &self.pairs {
            m[l] = true;
        }
        m
    }

    pub fn matched_right(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &(_, r) in &self.pairs {
            m[r] = true;
        }
        m
    }

    pub fn unmatched_right(&self) -> Vec<usize> {
        let m = self.matched_right();
        (0..self.n).filter(|&v| !m[v]).collect()
    }
}

pub fn validate_matching(net: &BipartiteNet, m: &Matching) -> bool {
    if m.n != net.n() {
        return false;
    }
    let mut seen_l = vec![false; m.n];
    let mut seen_r = vec![false; m.n];
    for &(l, r) in &m.pairs {
        if l >= m.n || r >= m.n || seen_l[l] || seen_r[r] {
            return false;
        }
        seen_l[l] = true;
        seen_r[r] = true;
        if !net.has_edge(l, r) {
            return false;
        }
    }
    true
}

/// Input placement derived from a matching.
///
/// Matched pairs read as directed edges `l -> r` split into vertex-disjoint
/// paths and cycles. Each path starts at a vertex with no matched in-edge
/// and gets its own controller. Cycles are attached round-robin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControlConfig {
    pub num_controllers: usize,
    pub driver_vertices: Vec<usize>,
    pub cycle_attachments: Vec<(usize, usize)>,
    pub b_structure: Vec<(usize, usize)>,
    pub paths: Vec<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
}

pub fn control_config(net: &BipartiteNet, m: &Matching) -> Result<ControlConfig> {
    if !validate_matching(net, m) {
        return Err(Error::Contract("matching is not valid for this network".into()));
    }
    let n = m.n;
    let mut next = vec![usize::MAX; n];
    let mut has_pred = vec![false; n];
    for &(l, r) in &m.pairs {
        next[l] = r;
        has_pred[r] = true;
    }
    let mut visited = vec![false; n];
    let mut paths = Vec::new();
    for start in (0..n).filter(|&v| !has_pred[v]) {
        let mut path = vec![start];
        visited[start] = true;
        let mut v = start;
        while next[v] != usize::MAX {
            v = next[v];
            visited[v] = true;
            path.push(v);
        }
        paths.push(path);
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut v = next[start];
        while v != start {
            visited[v] = true;
            cycle.push(v);
            v = next[v];
        }
        cycles.push(cycle);
    }
    let driver_vertices: Vec<usize> = paths.iter().map(|p| p[0]).collect();
    let num_controllers = driver_vertices.len().max(1);
    let cycle_attachments: Vec<(usize, usize)> = cycles
        .iter()
        .enumerate()
        .map(|(j, c)| (c[0], j % num_controllers))
        .collect();
    let b_structure = driver_vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .chain(cycle_attachments.iter().copied())
        .collect();
    Ok(ControlConfig {
        num_controllers,
        driver_vertices,
        cycle_attachments,
        b_structure,
        paths,
        cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directed_conversion() {
        let g = BipartiteNet::from_directed_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degrees(Side::Left), &[1, 0]);
        assert_eq!(g.degrees(Side::Right), &[0, 1]);

        let g = BipartiteNet::from_directed_edges(1, &[(0, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);

        let g = BipartiteNet::from_directed_edges(3, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(Side::Right, 1), 2);
    }

    #[test]
    fn out_of_range_id_is_reported() {
        let err = BipartiteNet::from_directed_edges(2, &[(0, 1), (2, 0)]).unwrap_err();
        assert!(err.to_string().contains("edge 1"));
    }

    #[test]
    fn undirected_conversion() {
        let g = BipartiteNet::from_undirected_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degrees(Side::Left), &[1, 1]);
        assert_eq!(BipartiteNet::from_undirected_edges(1, &[(0, 0)]).unwrap().edge_count(), 1);
        assert_eq!(
            BipartiteNet::from_undirected_edges(3, &[(0, 1), (1, 2)]).unwrap().edge_count(),
            4
        );
    }

    #[test]
    fn removal_updates_both_sides() {
        let mut g = BipartiteNet::from_directed_edges(3, &[(0, 1), (0, 1), (2, 1), (1, 0)]).unwrap();
        let mut dropped = Vec::new();
        g.remove_vertex_with(Side::Right, 1, |w, d| dropped.push((w, d)));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degrees(Side::Left), &[0, 1, 0]);
        assert_eq!(g.degrees(Side::Right), &[1, 0, 0]);
        assert_eq!(dropped, vec![(0, 1), (0, 0), (2, 0)]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 0)]);
    }

    #[test]
    fn matching_validation() {
        let c4 = BipartiteNet::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(validate_matching(&c4, &Matching::from_pairs(4, vec![(0, 1), (2, 3)])));
        assert!(!validate_matching(&c4, &Matching::from_pairs(4, vec![(0, 1), (2, 1)])));
        assert!(!validate_matching(&c4, &Matching::from_pairs(4, vec![(0, 2)])));
    }

    #[test]
    fn histograms() {
        let empty = BipartiteNet::empty(3);
        assert_eq!(degree_histogram(&empty, Side::Left), BTreeMap::from([(0, 3)]));
        let c4 = BipartiteNet::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(degree_histogram(&c4, Side::Left), BTreeMap::from([(2, 4)]));
        assert_eq!(degree_histogram(&c4, Side::Right), BTreeMap::from([(2, 4)]));
        let star = BipartiteNet::from_directed_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(degree_histogram(&star, Side::Right), BTreeMap::from([(0, 1), (1, 3)]));
    }

    #[test]
    fn perfect_cycle_needs_one_controller() {
        let n = 5;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let g = BipartiteNet::from_directed_edges(n, &edges).unwrap();
        let cc = control_config(&g, &Matching::from_pairs(n, edges)).unwrap();
        assert_eq!(cc.num_controllers, 1);
        assert!(cc.driver_vertices.is_empty());
        assert_eq!(cc.cycle_attachments, vec![(0, 0)]);
        assert_eq!(cc.b_structure.len(), 1);
    }

    #[test]
    fn empty_matching_drives_every_vertex() {
        let g = BipartiteNet::empty(3);
        let cc = control_config(&g, &Matching::new(3)).unwrap();
        assert_eq!(cc.num_controllers, 3);
        assert_eq!(cc.driver_vertices, vec![0, 1, 2]);
    }

    #[test]
    fn line_graph_decomposes_into_two_paths() {
        // 0->1->2 and 3->4 matched, two path starts 0 and 3.
        let g = BipartiteNet::from_directed_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let m = Matching::from_pairs(5, vec![(0, 1), (1, 2), (3, 4)]);
        let cc = control_config(&g, &m).unwrap();
        assert_eq!(cc.num_controllers, 2);
        assert_eq!(cc.driver_vertices, vec![0, 3]);
        assert_eq!(cc.b_structure, vec![(0, 0), (3, 1)]);
        assert_eq!(cc.paths, vec![vec![0, 1, 2], vec![3, 4]]);
    }

    #[test]
    fn cycles_attach_round_robin() {
        // Two 2-cycles plus isolated vertices 4 and 5.
        let pairs = vec![(0, 1), (1, 0), (2, 3), (3, 2)];
        let g = BipartiteNet::from_directed_edges(6, &pairs).unwrap();
        let cc = control_config(&g, &Matching::from_pairs(6, pairs)).unwrap();
        assert_eq!(cc.driver_vertices, vec![4, 5]);
        assert_eq!(cc.cycle_attachments, vec![(0, 0), (2, 1)]);
    }

    #[test]
    fn invalid_matching_is_rejected() {
        let g = BipartiteNet::empty(2);
        assert!(matches!(
            control_config(&g, &Matching::from_pairs(2, vec![(0, 1)])),
            Err(Error::Contract(_))
        ));
    }
}
