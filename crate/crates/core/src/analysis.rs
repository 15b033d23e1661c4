//! Connectivity, bonds, set diameters and the lower/upper bound calculators
//! on the number of ignorant agents needed.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{edge_density, Edge, FamilyKind, Graph, NodeId, Rational};

/// Largest graph the bipartition scans accept.
pub const MAX_SCAN_NODES: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("bond size bound must be at least 1")]
    BadSizeBound,
    #[error("graph has {0} nodes; exhaustive scans are limited to {MAX_SCAN_NODES}")]
    TooLarge(usize),
    #[error("set size {y} out of range 1..={n}")]
    SetSizeOutOfRange { y: usize, n: usize },
    #[error("invalid timing parameters: {0}")]
    InvalidTiming(String),
}

pub fn min_degree(g: &Graph) -> usize {
    (0..g.node_count()).map(|x| g.degree(x)).min().unwrap_or(0)
}

/// Unit-capacity max flow on a directed residual network.
struct UnitFlow {
    cap: Vec<Vec<i32>>,
    adj: Vec<Vec<usize>>,
}

impl UnitFlow {
    fn new(n: usize) -> Self {
        UnitFlow {
            cap: vec![vec![0; n]; n],
            adj: vec![Vec::new(); n],
        }
    }

    fn arc(&mut self, a: usize, b: usize, c: i32) {
        if self.cap[a][b] == 0 && self.cap[b][a] == 0 {
            self.adj[a].push(b);
            self.adj[b].push(a);
        }
        self.cap[a][b] += c;
    }

    /// Max flow from `s` to `t`, stopping early once `limit` is reached.
    fn run(mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.cap.len();
        let mut flow = 0;
        while flow < limit {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                if x == t {
                    break;
                }
                for &y in &self.adj[x] {
                    if prev[y] == usize::MAX && self.cap[x][y] > 0 {
                        prev[y] = x;
                        queue.push_back(y);
                    }
                }
            }
            if prev[t] == usize::MAX {
                break;
            }
            let mut y = t;
            while y != s {
                let x = prev[y];
                self.cap[x][y] -= 1;
                self.cap[y][x] += 1;
                y = x;
            }
            flow += 1;
        }
        flow
    }
}

/// Size of a minimum edge cut (0 for a single node).
pub fn edge_connectivity(g: &Graph) -> usize {
    let n = g.node_count();
    let mut best = min_degree(g);
    for t in 1..n {
        let mut net = UnitFlow::new(n);
        for e in g.edges() {
            net.arc(e.u(), e.v(), 1);
            net.arc(e.v(), e.u(), 1);
        }
        best = best.min(net.run(0, t, best));
    }
    if n == 1 {
        0
    } else {
        best
    }
}

/// Minimum vertex cut size; `n - 1` for complete graphs.
pub fn vertex_connectivity(g: &Graph) -> usize {
    let n = g.node_count();
    let mut best = n.saturating_sub(1);
    let mut s = 0;
    // Some vertex among the first best+1 lies outside a minimum separator.
    while s < n && s <= best {
        for t in s + 1..n {
            if g.has_edge(s, t) {
                continue;
            }
            // x_in = 2x, x_out = 2x + 1
            let mut net = UnitFlow::new(2 * n);
            for x in 0..n {
                let c = if x == s || x == t { n as i32 } else { 1 };
                net.arc(2 * x, 2 * x + 1, c);
            }
            for e in g.edges() {
                net.arc(2 * e.u() + 1, 2 * e.v(), 1);
                net.arc(2 * e.v() + 1, 2 * e.u(), 1);
            }
            best = best.min(net.run(2 * s + 1, 2 * t, best));
        }
        s += 1;
    }
    best
}

/// Minimal edge cut with the partition it induces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bond {
    pub edges: Vec<Edge>,
    pub side_a: Vec<NodeId>,
    pub side_b: Vec<NodeId>,
    pub is_matching: bool,
}

impl Bond {
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Endpoint of bond edge `i` on side A, then on side B.
    pub fn endpoints(&self, i: usize) -> (NodeId, NodeId) {
        let e = self.edges[i];
        if self.side_a.binary_search(&e.u()).is_ok() {
            (e.u(), e.v())
        } else {
            (e.v(), e.u())
        }
    }
}

fn induced_connected(g: &Graph, mask: u32) -> bool {
    let Some(start) = (0..g.node_count()).find(|&x| mask >> x & 1 == 1) else {
        return false;
    };
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for y in g.neighbors(x) {
            if mask >> y & 1 == 1 && seen >> y & 1 == 0 {
                seen |= 1 << y;
                stack.push(y);
            }
        }
    }
    seen == mask
}

/// All bonds with at most `max_size` edges, found by scanning vertex
/// bipartitions whose sides both induce connected subgraphs.
pub fn enumerate_bonds(g: &Graph, max_size: usize) -> Result<Vec<Bond>, AnalysisError> {
    if max_size < 1 {
        return Err(AnalysisError::BadSizeBound);
    }
    let n = g.node_count();
    if n > MAX_SCAN_NODES {
        return Err(AnalysisError::TooLarge(n));
    }
    let full: u32 = (1u32 << n) - 1;
    let mut bonds = Vec::new();
    // side A always contains node 0
    for rest in 0..(1u32 << (n - 1)) {
        let a = rest << 1 | 1;
        if a == full {
            continue;
        }
        let cut: Vec<Edge> = g
            .edges()
            .iter()
            .copied()
            .filter(|e| (a >> e.u() & 1) != (a >> e.v() & 1))
            .collect();
        if cut.len() > max_size || !induced_connected(g, a) || !induced_connected(g, full & !a) {
            continue;
        }
        let mut ends: Vec<NodeId> = cut.iter().flat_map(|e| [e.u(), e.v()]).collect();
        ends.sort_unstable();
        ends.dedup();
        let is_matching = ends.len() == 2 * cut.len();
        bonds.push(Bond {
            edges: cut,
            side_a: (0..n).filter(|&x| a >> x & 1 == 1).collect(),
            side_b: (0..n).filter(|&x| a >> x & 1 == 0).collect(),
            is_matching,
        });
    }
    bonds.sort_by(|p, q| p.edges.len().cmp(&q.edges.len()).then(p.edges.cmp(&q.edges)));
    Ok(bonds)
}

pub fn diameter(g: &Graph) -> usize {
    (0..g.node_count())
        .map(|x| g.distances(x).into_iter().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// Maximum over vertices `v` and `y`-subsets `S` of the distance from `v`
/// to the nearest member of `S`.
pub fn y_set_diameter(g: &Graph, y: usize) -> Result<usize, AnalysisError> {
    let n = g.node_count();
    if y < 1 || y > n {
        return Err(AnalysisError::SetSizeOutOfRange { y, n });
    }
    if n > MAX_SCAN_NODES {
        return Err(AnalysisError::TooLarge(n));
    }
    let dist: Vec<Vec<usize>> = (0..n).map(|x| g.distances(x)).collect();
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != y {
            continue;
        }
        for v in 0..n {
            let d = (0..n)
                .filter(|&u| mask >> u & 1 == 1)
                .map(|u| dist[v][u])
                .min()
                .unwrap_or(0);
            best = best.max(d);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    BondLower,
    VertexConnLower,
    ThetaExact,
    ThetaUpper,
    DensityFamilyExact,
    CliqueStarExact,
    LollipopExact,
    TreeExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
    Exactly,
}

/// One fact about `k*`, the minimum number of ignorant agents for which the
/// agents win from every placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundEntry {
    pub kind: BoundKind,
    pub relation: Relation,
    pub value: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    pub omitted: Vec<String>,
    pub lower: usize,
    pub upper: Option<usize>,
}

impl BoundReport {
    pub fn contains(&self, k: usize) -> bool {
        k >= self.lower && self.upper.map_or(true, |hi| k <= hi)
    }

    pub fn entry(&self, kind: BoundKind) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

/// Theta path lengths if `g` is a theta graph (by annotation).
fn theta_lengths(g: &Graph) -> Option<Vec<usize>> {
    g.theta_layout()
        .map(|t| t.paths.iter().map(Vec::len).collect())
}

pub fn bound_report(g: &Graph) -> BoundReport {
    let mut entries = Vec::new();
    let mut omitted = Vec::new();
    let mut push = |kind, relation, value, note: String| {
        entries.push(BoundEntry {
            kind,
            relation,
            value,
            note,
        })
    };

    if g.is_tree() {
        push(
            BoundKind::TreeExact,
            Relation::Exactly,
            1,
            "trees carry no removable edge".into(),
        );
    }

    match enumerate_bonds(g, g.edge_count()) {
        Ok(bonds) => match bonds.iter().filter(|b| b.is_matching).map(Bond::size).max() {
            Some(m) if m >= 2 => push(
                BoundKind::BondLower,
                Relation::AtLeast,
                m - 1,
                format!("matching bond with {m} edges blocks {} ignorant agents", m - 2),
            ),
            _ => omitted.push("bond_lower: no matching bond with at least 2 edges".into()),
        },
        Err(e) => omitted.push(format!("bond_lower: {e}")),
    }

    let kappa = vertex_connectivity(g);
    let delta = min_degree(g);
    if kappa >= 3 {
        push(
            BoundKind::VertexConnLower,
            Relation::AtLeast,
            delta - 1,
            format!("vertex connectivity {kappa}, minimum degree {delta}"),
        );
    } else {
        omitted.push(format!("vertex_conn_lower: vertex connectivity {kappa} < 3"));
    }

    let fam = g.family();
    if let Some(lengths) = theta_lengths(g) {
        let l = lengths.len();
        push(
            BoundKind::ThetaUpper,
            Relation::AtMost,
            l,
            format!("phase algorithm wins with one ignorant agent per path ({l} paths)"),
        );
        if lengths.iter().all(|&d| d >= 2) {
            push(
                BoundKind::ThetaExact,
                Relation::Exactly,
                l,
                "every path has at least 3 edges".into(),
            );
        } else {
            omitted.push("theta_exact: some path has fewer than 3 edges".into());
        }
        if let Some(f) = fam.filter(|f| f.kind == FamilyKind::DensityFamily) {
            let (n, per) = (f.params[0], f.params[1]);
            if per >= 2 {
                push(
                    BoundKind::DensityFamilyExact,
                    Relation::Exactly,
                    (n - 2) / per,
                    format!("{} paths of {per} internal nodes", (n - 2) / per),
                );
            } else {
                omitted.push("density_family_exact: paths shorter than 3 edges".into());
            }
        }
    }
    if let Some(f) = fam {
        match f.kind {
            FamilyKind::Lollipop => push(
                BoundKind::LollipopExact,
                Relation::Exactly,
                f.params[0],
                format!("clique K_{}", f.params[0] + 2),
            ),
            FamilyKind::CliqueStar => {
                let (n, lambda) = (f.params[0], f.params[1]);
                push(
                    BoundKind::CliqueStarExact,
                    Relation::Exactly,
                    clique_star_requirement(n, lambda),
                    format!("{lambda} blocks of {} nodes around a hub", (n - 1) / lambda),
                )
            }
            _ => {}
        }
    }

    let lower = entries
        .iter()
        .filter(|e| e.relation != Relation::AtMost)
        .map(|e| e.value)
        .max()
        .unwrap_or(1)
        .max(1);
    let upper = entries
        .iter()
        .filter(|e| e.relation != Relation::AtLeast)
        .map(|e| e.value)
        .min();
    BoundReport {
        entries,
        omitted,
        lower,
        upper,
    }
}

/// Ignorant agents required on `clique_star(n, lambda)`.
pub fn clique_star_requirement(n: usize, lambda: usize) -> usize {
    n + 1 - 2 * lambda
}

/// Timing questions with a closed-form answer.
#[derive(Debug, Clone, Copy)]
pub enum TimingQuery<'g> {
    /// `x` ignorant and `y` source agents packed at opposite ends of a path
    /// on `n` nodes; rounds until some ignorant agent converts.
    PathFirst { n: usize, x: usize, y: usize },
    /// Same placement; rounds until every agent is a source.
    PathAll { n: usize, y: usize },
    /// One agent of each class at the ends of a longest path of a tree.
    TreeDiameter { tree: &'g Graph },
    /// `y` sources on a set realizing the `y`-set-diameter.
    SetDiameter { graph: &'g Graph, y: usize },
}

/// Rounds the adversary can force, rounded up since distances are integral
/// and shrink by at most 2 per round.
pub fn timing_bounds(query: TimingQuery<'_>) -> Result<usize, AnalysisError> {
    let half_up = |d: usize| d.div_ceil(2);
    match query {
        TimingQuery::PathFirst { n, x, y } => {
            if x < 1 || y < 1 || x + y > n {
                return Err(AnalysisError::InvalidTiming(format!(
                    "path_first needs x, y >= 1 and x + y <= n (n={n}, x={x}, y={y})"
                )));
            }
            Ok(half_up(n - x - y))
        }
        TimingQuery::PathAll { n, y } => {
            if y < 1 || y >= n {
                return Err(AnalysisError::InvalidTiming(format!(
                    "path_all needs 1 <= y < n (n={n}, y={y})"
                )));
            }
            Ok(half_up(n - y))
        }
        TimingQuery::TreeDiameter { tree } => {
            if !tree.is_tree() {
                return Err(AnalysisError::InvalidTiming("graph is not a tree".into()));
            }
            Ok(half_up(diameter(tree)))
        }
        TimingQuery::SetDiameter { graph, y } => Ok(half_up(y_set_diameter(graph, y)?)),
    }
}

/// Everything `analyze` reports about a graph.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub density: Rational,
    pub min_degree: usize,
    pub edge_connectivity: usize,
    pub vertex_connectivity: usize,
    pub diameter: usize,
    pub bonds: Vec<Bond>,
    pub bonds_note: Option<String>,
    pub bounds: BoundReport,
}

pub fn summarize(g: &Graph, bond_cap: usize) -> GraphSummary {
    let (bonds, bonds_note) = match enumerate_bonds(g, bond_cap.max(1)) {
        Ok(b) => (b, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    GraphSummary {
        nodes: g.node_count(),
        edges: g.edge_count(),
        density: edge_density(g),
        min_degree: min_degree(g),
        edge_connectivity: edge_connectivity(g),
        vertex_connectivity: vertex_connectivity(g),
        diameter: diameter(g),
        bonds,
        bonds_note,
        bounds: bound_report(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::*;

    #[test]
    fn connectivity_examples() {
        let cs = make_clique_star(9, 2).unwrap();
        assert_eq!(edge_connectivity(&cs), 4);
        assert_eq!(vertex_connectivity(&cs), 1);
        let r6 = make_ring(6).unwrap();
        assert_eq!(
            (edge_connectivity(&r6), vertex_connectivity(&r6), min_degree(&r6)),
            (2, 2, 2)
        );
        let k5 = make_complete(5).unwrap();
        assert_eq!((vertex_connectivity(&k5), min_degree(&k5)), (4, 4));
        assert_eq!(edge_connectivity(&k5), 4);
        assert_eq!(vertex_connectivity(&make_grid(3, 3).unwrap()), 2);
        assert_eq!(edge_connectivity(&make_path(4).unwrap()), 1);
    }

    #[test]
    fn theta_middle_bond_is_matching() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let t = g.theta_layout().unwrap();
        let middle: Vec<Edge> = {
            let mut v: Vec<Edge> = (0..3).map(|i| t.path_edge(i, 1)).collect();
            v.sort();
            v
        };
        let bonds = enumerate_bonds(&g, 3).unwrap();
        let b = bonds.iter().find(|b| b.edges == middle).expect("middle bond");
        assert!(b.is_matching);
        assert_eq!(b.size(), 3);
    }

    #[test]
    fn bonds_of_small_graphs() {
        let p = make_path(5).unwrap();
        let bonds = enumerate_bonds(&p, 4).unwrap();
        assert_eq!(bonds.len(), 4);
        assert!(bonds.iter().all(|b| b.size() == 1));
        let k4 = make_complete(4).unwrap();
        let bonds = enumerate_bonds(&k4, 6).unwrap();
        assert_eq!(bonds[0].size(), 3);
        // 4 stars plus 3 balanced splits
        assert_eq!(bonds.len(), 7);
        assert_eq!(enumerate_bonds(&k4, 0), Err(AnalysisError::BadSizeBound));
    }

    #[test]
    fn set_diameter_examples() {
        assert_eq!(y_set_diameter(&make_path(8).unwrap(), 3).unwrap(), 5);
        assert_eq!(y_set_diameter(&make_complete(7).unwrap(), 2).unwrap(), 1);
        let single = Graph::new(1, []).unwrap();
        assert_eq!(y_set_diameter(&single, 1).unwrap(), 0);
        assert!(y_set_diameter(&single, 2).is_err());
    }

    #[test]
    fn bound_report_examples() {
        let k5 = bound_report(&make_complete(5).unwrap());
        assert_eq!(k5.entry(BoundKind::VertexConnLower).unwrap().value, 3);
        assert_eq!(k5.lower, 3);

        let theta = bound_report(&make_theta(&[3, 3, 3]).unwrap());
        assert_eq!((theta.lower, theta.upper), (3, Some(3)));
        assert_eq!(theta.entry(BoundKind::BondLower).unwrap().value, 2);

        let path = bound_report(&make_path(6).unwrap());
        assert_eq!((path.lower, path.upper), (1, Some(1)));
    }

    #[test]
    fn timing_examples() {
        assert_eq!(timing_bounds(TimingQuery::PathFirst { n: 10, x: 2, y: 2 }).unwrap(), 3);
        assert_eq!(timing_bounds(TimingQuery::PathAll { n: 10, y: 2 }).unwrap(), 4);
        let p7 = make_path(7).unwrap();
        assert_eq!(timing_bounds(TimingQuery::TreeDiameter { tree: &p7 }).unwrap(), 3);
        assert!(timing_bounds(TimingQuery::PathFirst { n: 3, x: 2, y: 2 }).is_err());
        let ring = make_ring(5).unwrap();
        assert!(timing_bounds(TimingQuery::TreeDiameter { tree: &ring }).is_err());
    }
}
