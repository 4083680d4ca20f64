//! Oriented half-edge multigraphs: homology, spanning trees, deletion and contraction.
//!
//! Vertices and edges are dense indices assigned in input order. Each edge owns two
//! half-edges, `2k` (tail) and `2k + 1` (head); tadpoles attach both to one vertex.
//! The boundary of an edge is `head - tail`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HalfEdge {
    pub id: usize,
    pub edge: usize,
    pub vertex: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_labels: Vec<i64>,
    edge_names: Vec<String>,
    half_edges: Vec<HalfEdge>,
    /// edge -> (tail half-edge, head half-edge)
    orientation: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modification {
    Delete,
    Contract,
}

/// Column `e` is `head(e) - tail(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub entries: Vec<Vec<i64>>,
}

/// Fundamental cycles of a spanning forest; one row per non-forest edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    pub rows: Vec<Vec<i64>>,
    pub tree: Vec<usize>,
}

/// Builds a graph from an edge list, creating vertices in order of first appearance.
pub fn build_graph(edges: &[(i64, i64)]) -> Result<Graph> {
    Graph::new(&[], edges)
}

impl Graph {
    /// `vertices` fixes the order (and allows isolated vertices); labels only seen in
    /// `edges` are appended on the fly.
    pub fn new(vertices: &[i64], edges: &[(i64, i64)]) -> Result<Self> {
        if vertices.is_empty() && edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut labels: Vec<i64> = Vec::new();
        for &v in vertices {
            if !labels.contains(&v) {
                labels.push(v);
            }
        }
        let index_of = |label: i64, labels: &mut Vec<i64>| -> usize {
            match labels.iter().position(|&l| l == label) {
                Some(i) => i,
                None => {
                    labels.push(label);
                    labels.len() - 1
                }
            }
        };
        let mut ends = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            let a = index_of(u, &mut labels);
            let b = index_of(v, &mut labels);
            ends.push((a, b));
        }
        let names = (1..=edges.len()).map(|k| format!("A{k}")).collect();
        Ok(Self::from_parts(labels, names, &ends))
    }

    fn from_parts(vertex_labels: Vec<i64>, edge_names: Vec<String>, ends: &[(usize, usize)]) -> Self {
        let mut half_edges = Vec::with_capacity(2 * ends.len());
        let mut orientation = Vec::with_capacity(ends.len());
        for (k, &(tail, head)) in ends.iter().enumerate() {
            half_edges.push(HalfEdge { id: 2 * k, edge: k, vertex: tail });
            half_edges.push(HalfEdge { id: 2 * k + 1, edge: k, vertex: head });
            orientation.push((2 * k, 2 * k + 1));
        }
        Self { vertex_labels, edge_names, half_edges, orientation }
    }

    /// Replaces the variable names attached to the edges.
    pub fn with_edge_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_edges() {
            return Err(Error::DimensionMismatch { expected: self.n_edges(), got: names.len() });
        }
        self.edge_names = names;
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.orientation.len()
    }

    pub fn vertex_labels(&self) -> &[i64] {
        &self.vertex_labels
    }

    pub fn vertex_index(&self, label: i64) -> Result<usize> {
        self.vertex_labels.iter().position(|&l| l == label).ok_or(Error::UnknownVertex(label))
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn orientation(&self) -> &[(usize, usize)] {
        &self.orientation
    }

    /// `(tail, head)` vertex indices of edge `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (t, h) = self.orientation[e];
        (self.half_edges[t].vertex, self.half_edges[h].vertex)
    }

    pub fn is_tadpole(&self, e: usize) -> bool {
        let (t, h) = self.endpoints(e);
        t == h
    }

    pub fn boundary_matrix(&self) -> BoundaryMatrix {
        let mut entries = vec![vec![0i64; self.n_edges()]; self.n_vertices()];
        for e in 0..self.n_edges() {
            let (t, h) = self.endpoints(e);
            entries[h][e] += 1;
            entries[t][e] -= 1;
        }
        BoundaryMatrix { entries }
    }

    /// Component index for every vertex, numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n_vertices());
        for e in 0..self.n_edges() {
            let (a, b) = self.endpoints(e);
            uf.union(a, b);
        }
        let mut ids = vec![usize::MAX; self.n_vertices()];
        let mut next = 0;
        for v in 0..self.n_vertices() {
            let r = uf.find(v);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            ids[v] = ids[r];
        }
        ids
    }

    pub fn n_components(&self) -> usize {
        self.components().iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.n_components() == 1
    }

    /// First Betti number `|E| - |V| + #components`.
    pub fn loop_number(&self) -> usize {
        self.n_edges() + self.n_components() - self.n_vertices()
    }

    /// Breadth-first spanning forest; roots are the lowest-index vertex of each component.
    /// Returns the forest edges and, per vertex, its parent edge.
    fn bfs_forest(&self) -> (Vec<usize>, Vec<Option<usize>>, Vec<usize>) {
        let n = self.n_vertices();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for e in 0..self.n_edges() {
            let (a, b) = self.endpoints(e);
            if a != b {
                adj[a].push((e, b));
                adj[b].push((e, a));
            }
        }
        let mut seen = vec![false; n];
        let mut parent = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut tree = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                order.push(x);
                for &(e, y) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        parent[y] = Some(e);
                        tree.push(e);
                        queue.push_back(y);
                    }
                }
            }
        }
        tree.sort_unstable();
        (tree, parent, order)
    }

    pub fn cycle_basis(&self) -> CycleBasis {
        let (tree, parent, order) = self.bfs_forest();
        let m = self.n_edges();
        // chain[x] has boundary x - root(x)
        let mut chain: Vec<Vec<i64>> = vec![vec![0; m]; self.n_vertices()];
        for &x in &order {
            if let Some(e) = parent[x] {
                let (t, h) = self.endpoints(e);
                let y = if h == x { t } else { h };
                let mut c = chain[y].clone();
                c[e] += if h == x { 1 } else { -1 };
                chain[x] = c;
            }
        }
        let rows = (0..m)
            .filter(|e| tree.binary_search(e).is_err())
            .map(|e| {
                let (t, h) = self.endpoints(e);
                let mut r = vec![0i64; m];
                r[e] = 1;
                for k in 0..m {
                    r[k] += chain[t][k] - chain[h][k];
                }
                r
            })
            .collect();
        CycleBasis { rows, tree }
    }

    /// All spanning trees, each as a sorted list of edge indices, by recursive
    /// contraction (keep the edge) and deletion (drop it).
    pub fn spanning_trees(&self) -> Result<Vec<Vec<usize>>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        self.trees_rec(0, UnionFind::new(self.n_vertices()), &mut chosen, &mut out);
        Ok(out)
    }

    fn trees_rec(&self, e: usize, uf: UnionFind, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if chosen.len() + 1 == self.n_vertices() {
            out.push(chosen.clone());
            return;
        }
        if e == self.n_edges() {
            return;
        }
        let (a, b) = self.endpoints(e);
        let mut contracted = uf.clone();
        if contracted.union(a, b) {
            chosen.push(e);
            self.trees_rec(e + 1, contracted, chosen, out);
            chosen.pop();
        }
        // deleting e must keep the remaining graph connected
        let mut rest = uf.clone();
        for f in e + 1..self.n_edges() {
            let (x, y) = self.endpoints(f);
            rest.union(x, y);
        }
        if rest.n_sets() == 1 {
            self.trees_rec(e + 1, uf, chosen, out);
        }
    }

    pub fn is_spanning_tree(&self, edges: &[usize]) -> bool {
        if edges.len() + 1 != self.n_vertices() || edges.iter().any(|&e| e >= self.n_edges()) {
            return false;
        }
        let mut uf = UnionFind::new(self.n_vertices());
        edges.iter().all(|&e| {
            let (a, b) = self.endpoints(e);
            uf.union(a, b)
        })
    }

    /// Deletes or contracts edge `e`. Remaining edges keep their names; contracting a
    /// tadpole only removes the edge.
    pub fn modify(&self, e: usize, mode: Modification) -> Result<Graph> {
        if e >= self.n_edges() {
            return Err(Error::UnknownEdge(e));
        }
        let (tail, head) = self.endpoints(e);
        let merge = mode == Modification::Contract && tail != head;
        let remap = |v: usize| -> usize {
            let v = if merge && v == head { tail } else { v };
            if merge && v > head {
                v - 1
            } else {
                v
            }
        };
        let labels: Vec<i64> = self
            .vertex_labels
            .iter()
            .enumerate()
            .filter(|&(v, _)| !(merge && v == head))
            .map(|(_, &l)| l)
            .collect();
        let mut names = Vec::new();
        let mut ends = Vec::new();
        for f in (0..self.n_edges()).filter(|&f| f != e) {
            let (a, b) = self.endpoints(f);
            ends.push((remap(a), remap(b)));
            names.push(self.edge_names[f].clone());
        }
        Ok(Graph::from_parts(labels, names, &ends))
    }

    /// Solves `boundary(t) = w` with `t` supported on the given spanning forest.
    /// `w[v]` is a vector of common length; each component must have zero total.
    pub fn route(&self, forest: &[usize], w: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
        let (t, residual) = self.route_unchecked(forest, w)?;
        if let Some(c) = residual.iter().position(|r| r.iter().any(|x| !x.is_zero())) {
            return Err(Error::NotDegreeZero { component: c });
        }
        Ok(t)
    }

    /// Like [`Graph::route`] but returns, per component, the amount left at the root
    /// instead of failing when it is nonzero.
    pub fn route_unchecked(
        &self,
        forest: &[usize],
        w: &[Vec<Rational>],
    ) -> Result<(Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
        if w.len() != self.n_vertices() {
            return Err(Error::DimensionMismatch { expected: self.n_vertices(), got: w.len() });
        }
        let dim = w.first().map_or(0, |x| x.len());
        if w.iter().any(|x| x.len() != dim) {
            return Err(Error::Inconsistent("momentum vectors of unequal length".into()));
        }
        let n = self.n_vertices();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut uf = UnionFind::new(n);
        for &e in forest {
            if e >= self.n_edges() {
                return Err(Error::UnknownEdge(e));
            }
            let (a, b) = self.endpoints(e);
            if !uf.union(a, b) {
                return Err(Error::InvalidTree(format!("edge {e} closes a cycle")));
            }
            adj[a].push((e, b));
            adj[b].push((e, a));
        }
        let comps = self.components();
        if uf.n_sets() != self.n_components() {
            return Err(Error::InvalidTree("forest does not span every component".into()));
        }
        let mut seen = vec![false; n];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut order = Vec::new();
        let mut roots = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            roots.push(root);
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                order.push(x);
                for &(e, y) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        parent[y] = Some((e, x));
                        stack.push(y);
                    }
                }
            }
        }
        let mut excess: Vec<Vec<Rational>> = w.to_vec();
        let mut t = vec![vec![Rational::zero(); dim]; self.n_edges()];
        for &x in order.iter().rev() {
            let Some((e, y)) = parent[x] else { continue };
            let (_, h) = self.endpoints(e);
            // boundary of e contributes +t_e at head, -t_e at tail
            let sign_x = if h == x { 1 } else { -1 };
            for d in 0..dim {
                let v = if sign_x == 1 { excess[x][d].clone() } else { -excess[x][d].clone() };
                // at y the contribution is -sign_x * t_e
                if sign_x == 1 {
                    excess[y][d] += &v;
                } else {
                    excess[y][d] -= &v;
                }
                t[e][d] = v;
            }
        }
        let mut residual = vec![vec![Rational::zero(); dim]; self.n_components()];
        for &r in &roots {
            residual[comps[r]] = excess[r].clone();
        }
        Ok((t, residual))
    }

    /// Boundary of an edge chain with vector entries.
    pub fn boundary_of(&self, t: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let dim = t.first().map_or(0, |x| x.len());
        let mut out = vec![vec![Rational::zero(); dim]; self.n_vertices()];
        for (e, te) in t.iter().enumerate() {
            let (a, b) = self.endpoints(e);
            for d in 0..dim {
                out[b][d] += &te[d];
                out[a][d] -= &te[d];
            }
        }
        out
    }
}

/// Kirchhoff matrix-tree count: any cofactor of the Laplacian (tadpoles ignored).
pub fn laplacian_tree_count(g: &Graph) -> BigInt {
    let n = g.n_vertices();
    if n == 0 {
        return BigInt::zero();
    }
    let mut lap = QMatrix::zeros(n, n);
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        if a == b {
            continue;
        }
        lap[(a, a)] += rational::int(1);
        lap[(b, b)] += rational::int(1);
        lap[(a, b)] -= rational::int(1);
        lap[(b, a)] -= rational::int(1);
    }
    let mut minor = QMatrix::zeros(n - 1, n - 1);
    for i in 1..n {
        for j in 1..n {
            minor[(i - 1, j - 1)] = lap[(i, j)].clone();
        }
    }
    minor.det().expect("square").to_integer()
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), sets: n }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb.max(ra)] = rb.min(ra);
        self.sets -= 1;
        true
    }

    pub(crate) fn n_sets(&self) -> usize {
        self.sets
    }
}
