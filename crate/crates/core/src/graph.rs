//! Network topologies and gossip (mixing) matrices.
//!
//! A [`GossipMatrix`] is a symmetric, row-stochastic matrix whose sparsity
//! pattern follows the communication graph: `w_ii > 0`, `w_ij > 0` exactly
//! on edges. Its mixing rate is summarised by
//! `rho = max(|lambda_2(W)|, |lambda_min(W)|)`, computed here as the spectral
//! norm of `W - 11^T/m`. That form also returns `rho = 1` for disconnected
//! graphs and `rho = 0` for a single agent.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Entrywise tolerance for symmetry, stochasticity and pattern checks.
pub const MATRIX_TOL: f64 = 1e-12;

/// Number of fresh Erdős–Rényi draws attempted before giving up on
/// connectivity.
pub const ER_MAX_ATTEMPTS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Complete,
    /// Node 0 is the hub.
    Star,
    Path,
    /// Square lattice with 4-neighbourhoods; `m` must be a perfect square.
    Grid2d,
    ErdosRenyi { p: f64 },
}

impl Topology {
    /// Parses the command-line spelling (`complete`, `star`, `path`, `grid2d`,
    /// `erdos_renyi`). `p` is required for, and only for, Erdős–Rényi.
    pub fn parse(name: &str, p: Option<f64>) -> Result<Self> {
        let kind = match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "complete" => Topology::Complete,
            "star" => Topology::Star,
            "path" | "line" => Topology::Path,
            "grid2d" | "grid" => Topology::Grid2d,
            "erdos_renyi" | "er" => {
                let p = p.ok_or_else(|| Error::invalid("erdos_renyi requires an edge probability p"))?;
                Topology::ErdosRenyi { p }
            }
            other => return Err(Error::invalid(format!("unknown topology {other:?}"))),
        };
        if p.is_some() && !matches!(kind, Topology::ErdosRenyi { .. }) {
            return Err(Error::invalid("edge probability p only applies to erdos_renyi"));
        }
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Complete => "complete",
            Topology::Star => "star",
            Topology::Path => "path",
            Topology::Grid2d => "grid2d",
            Topology::ErdosRenyi { .. } => "erdos_renyi",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::ErdosRenyi { p } => write!(f, "erdos_renyi(p={p})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Undirected simple graph on `m` agents, indexed from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    m: usize,
    /// Sorted, each pair stored once with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    topology: Topology,
    connected: bool,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops and duplicate edges are
    /// rejected.
    pub fn from_edges(m: usize, edges: &[(usize, usize)], topology: Topology) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("graph needs at least one agent"));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::invalid(format!("edge ({a},{b}) out of range for m={m}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); m];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let connected = bfs_connected(&neighbors);
        Ok(Self { m, edges, neighbors, topology, connected })
    }

    pub fn agents(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Writes one `i j` pair per line, 1-based.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for &(i, j) in &self.edges {
            writeln!(out, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(m: usize, input: R) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) if a >= 1 && b >= 1 => edges.push((a - 1, b - 1)),
                _ => return Err(Error::invalid(format!("edge list line {}: {line:?}", lineno + 1))),
            }
        }
        Self::from_edges(m, &edges, Topology::Complete).map(|mut g| {
            g.topology = infer_topology(&g);
            g
        })
    }
}

fn infer_topology(g: &Graph) -> Topology {
    let m = g.m;
    if g.edges.len() == m * (m - 1) / 2 {
        Topology::Complete
    } else {
        // Anything else read from disk is treated as a fixed sample.
        Topology::ErdosRenyi { p: g.edges.len() as f64 / ((m * (m.max(2) - 1)) as f64 / 2.0) }
    }
}

fn bfs_connected(neighbors: &[Vec<usize>]) -> bool {
    let m = neighbors.len();
    let mut seen = vec![false; m];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &neighbors[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == m
}

/// Constructs a topology. Erdős–Rényi graphs are redrawn with fresh
/// sub-seeds until connected, up to [`ER_MAX_ATTEMPTS`] times.
pub fn build_topology(topology: Topology, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let edges: Vec<(usize, usize)> = match topology {
        Topology::Complete => (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect(),
        Topology::Star => (1..m).map(|j| (0, j)).collect(),
        Topology::Path => (1..m).map(|j| (j - 1, j)).collect(),
        Topology::Grid2d => {
            let side = (m as f64).sqrt().round() as usize;
            if side * side != m {
                return Err(Error::invalid(format!("grid2d needs a perfect square, got m={m}")));
            }
            let mut e = Vec::new();
            for r in 0..side {
                for c in 0..side {
                    let u = r * side + c;
                    if c + 1 < side {
                        e.push((u, u + 1));
                    }
                    if r + 1 < side {
                        e.push((u, u + side));
                    }
                }
            }
            e
        }
        Topology::ErdosRenyi { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!("edge probability must lie in (0,1], got {p}")));
            }
            for attempt in 0..ER_MAX_ATTEMPTS {
                let g = erdos_renyi_draw(m, p, rng::derive_seed(seed, attempt))?;
                if g.is_connected() {
                    return Ok(g);
                }
            }
            return Err(Error::Disconnected(format!(
                "no connected G({m},{p}) sample in {ER_MAX_ATTEMPTS} attempts"
            )));
        }
    };
    Graph::from_edges(m, &edges, topology)
}

/// A single G(m, p) draw; may be disconnected.
pub fn erdos_renyi_draw(m: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("edge probability must lie in (0,1], got {p}")));
    }
    let mut rng = rng::substream(seed, rng::tags::GRAPH);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(m, &edges, Topology::ErdosRenyi { p })
}

/// Symmetric stochastic mixing matrix with cached spectral quantities.
#[derive(Clone, Debug)]
pub struct GossipMatrix {
    w: DMatrix<f64>,
    /// Nonzero entries per row in increasing column order; the mixing sum
    /// always runs in this order.
    rows: Vec<Vec<(usize, f64)>>,
    rho: f64,
    lambda_min: f64,
}

impl GossipMatrix {
    /// Wraps a dense matrix after checking symmetry and stochasticity.
    pub fn from_dense(w: DMatrix<f64>) -> Result<Self> {
        let m = w.nrows();
        if m == 0 || w.ncols() != m {
            return Err(Error::dims(format!("gossip matrix must be square, got {}x{}", w.nrows(), w.ncols())));
        }
        for i in 0..m {
            let row_sum: f64 = w.row(i).iter().sum();
            if (row_sum - 1.0).abs() > MATRIX_TOL {
                return Err(Error::invalid(format!("row {i} sums to {row_sum}")));
            }
            for j in 0..i {
                if (w[(i, j)] - w[(j, i)]).abs() > MATRIX_TOL {
                    return Err(Error::invalid(format!("W not symmetric at ({i},{j})")));
                }
            }
            if w[(i, i)] <= 0.0 {
                return Err(Error::invalid(format!("w_{i}{i} must be positive")));
            }
        }
        let rows = (0..m)
            .map(|i| (0..m).filter(|&j| w[(i, j)] != 0.0).map(|j| (j, w[(i, j)])).collect())
            .collect();
        let eig = symmetric_eigenvalues(&w)?;
        let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let rho = spectral_gap(&w)?;
        Ok(Self { w, rows, rho, lambda_min })
    }

    pub fn agents(&self) -> usize {
        self.w.nrows()
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    /// `(j, w_ij)` for the nonzero entries of row `i`, ascending in `j`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `max(|lambda_2|, |lambda_min|)`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn is_mixing(&self) -> bool {
        self.rho < 1.0 - MATRIX_TOL
    }

    /// Checks the sparsity pattern against `g`: positive diagonal, positive
    /// weights on edges, zeros elsewhere.
    pub fn check_compliance(&self, g: &Graph) -> Result<()> {
        let m = self.agents();
        if g.agents() != m {
            return Err(Error::dims(format!("graph has {} agents, W has {m}", g.agents())));
        }
        for i in 0..m {
            for j in 0..m {
                let w = self.w[(i, j)];
                let ok = if i == j || g.has_edge(i, j) { w > 0.0 } else { w.abs() <= MATRIX_TOL };
                if !ok {
                    return Err(Error::invalid(format!("w_({i},{j}) = {w} violates the graph pattern")));
                }
            }
        }
        Ok(())
    }

    /// Dense CSV dump, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.agents() {
            let line: Vec<String> = self.w.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn edge_weighted(g: &Graph, weight: impl Fn(usize, usize) -> f64) -> Result<GossipMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected(format!("{} graph on {} agents", g.topology(), g.agents())));
    }
    let m = g.agents();
    let mut w = DMatrix::zeros(m, m);
    for &(i, j) in g.edges() {
        let v = weight(g.degree(i), g.degree(j));
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    for i in 0..m {
        let off: f64 = g.neighbors(i).iter().map(|&j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    GossipMatrix::from_dense(w)
}

/// Metropolis–Hastings weights `w_ij = 1 / (1 + max(deg_i, deg_j))`.
pub fn metropolis_weights(g: &Graph) -> Result<GossipMatrix> {
    edge_weighted(g, |di, dj| 1.0 / (1.0 + di.max(dj) as f64))
}

/// Lazy Metropolis weights `w_ij = 1 / (2 max(deg_i, deg_j))`; all
/// eigenvalues are nonnegative.
pub fn lazy_metropolis_weights(g: &Graph) -> Result<GossipMatrix> {
    edge_weighted(g, |di, dj| 1.0 / (2.0 * di.max(dj) as f64))
}

/// `W = 11^T / m`, which has `rho = 0`.
pub fn uniform_average_matrix(m: usize) -> Result<GossipMatrix> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let entry = 1.0 / m as f64;
    let w = DMatrix::from_element(m, m, entry);
    let mut gm = GossipMatrix::from_dense(w)?;
    // Exact by construction; the eigensolver leaves O(eps) residue.
    gm.rho = 0.0;
    Ok(gm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Metropolis,
    LazyMetropolis,
    /// `11^T/m`; only compliant with the complete graph.
    Uniform,
}

impl WeightRule {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "metropolis" => Ok(WeightRule::Metropolis),
            "lazy_metropolis" | "lazy" => Ok(WeightRule::LazyMetropolis),
            "uniform" => Ok(WeightRule::Uniform),
            other => Err(Error::invalid(format!("unknown weight rule {other:?}"))),
        }
    }

    pub fn apply(self, g: &Graph) -> Result<GossipMatrix> {
        match self {
            WeightRule::Metropolis => metropolis_weights(g),
            WeightRule::LazyMetropolis => lazy_metropolis_weights(g),
            WeightRule::Uniform => {
                let m = g.agents();
                if g.edges().len() != m * (m - 1) / 2 {
                    return Err(Error::invalid("uniform averaging requires the complete graph"));
                }
                uniform_average_matrix(m)
            }
        }
    }
}

/// Eigenvalues of a symmetric matrix, sorted in nonincreasing order.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure(n))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// `max(|lambda_2(W)|, |lambda_min(W)|)` for a symmetric stochastic `W`,
/// evaluated as the largest eigenvalue modulus of `W - 11^T/m`.
pub fn spectral_gap(w: &DMatrix<f64>) -> Result<f64> {
    let m = w.nrows();
    let shifted = w.map(|v| v - 1.0 / m as f64);
    let eig = symmetric_eigenvalues(&shifted)?;
    Ok(eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).min(1.0))
}
