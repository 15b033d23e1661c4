//! Immutable undirected simple graphs and the graph families used by the
//! broadcast game: paths, rings, cliques, grids, generalized theta graphs,
//! lollipops, clique-stars and the low-density theta family.
//!
//! Nodes are dense ids `0..node_count`. Family constructors attach a
//! [`FamilyInfo`] whose labels name the structural nodes (theta poles and
//! paths, the lollipop junction, the clique-star hub) so strategies can be
//! written against structure instead of raw ids.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(NodeId, NodeId, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid node id {0}")]
    InvalidNode(NodeId),
    #[error("invalid family parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed graph file: {0}")]
    Parse(String),
}

/// Undirected edge with `0 <= u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    /// Normalizes the endpoint order. Panics on a self-loop.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert_ne!(a, b, "self-loop");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn u(self) -> NodeId {
        self.0
    }

    pub fn v(self) -> NodeId {
        self.1
    }

    pub fn other(self, x: NodeId) -> NodeId {
        if x == self.0 {
            self.1
        } else {
            self.0
        }
    }

    pub fn touches(self, x: NodeId) -> bool {
        self.0 == x || self.1 == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[NodeId; 2]>::deserialize(d)?;
        if a == b {
            return Err(serde::de::Error::custom(format!("self-loop at node {a}")));
        }
        Ok(Edge::new(a, b))
    }
}

/// Exact rational number kept in lowest terms with a positive denominator.
///
/// Always displays as `p/q`, including integers (`1/1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    /// Panics on a zero denominator.
    pub fn new(numerator: i64, denominator: i64) -> Self {
        Rational(Ratio::new(numerator, denominator))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl std::ops::Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Path,
    Ring,
    Complete,
    Grid,
    Theta,
    Lollipop,
    CliqueStar,
    DensityFamily,
    Glued,
    Contracted,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Path => "path",
            FamilyKind::Ring => "ring",
            FamilyKind::Complete => "complete",
            FamilyKind::Grid => "grid",
            FamilyKind::Theta => "theta",
            FamilyKind::Lollipop => "lollipop",
            FamilyKind::CliqueStar => "clique_star",
            FamilyKind::DensityFamily => "density_family",
            FamilyKind::Glued => "glued",
            FamilyKind::Contracted => "contracted",
        }
    }
}

impl FromStr for FamilyKind {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "path" => FamilyKind::Path,
            "ring" => FamilyKind::Ring,
            "complete" => FamilyKind::Complete,
            "grid" => FamilyKind::Grid,
            "theta" => FamilyKind::Theta,
            "lollipop" => FamilyKind::Lollipop,
            "clique_star" => FamilyKind::CliqueStar,
            "density_family" => FamilyKind::DensityFamily,
            "glued" => FamilyKind::Glued,
            "contracted" => FamilyKind::Contracted,
            other => {
                return Err(GraphError::InvalidParameters(format!(
                    "unknown family kind `{other}`"
                )))
            }
        })
    }
}

/// Family annotation carried by constructed graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyInfo {
    pub kind: FamilyKind,
    pub params: Vec<usize>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<NodeId>>,
}

/// Poles and paths of a generalized theta graph. Each path lists its
/// internal nodes ordered from the north pole to the south pole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaLayout {
    pub north: NodeId,
    pub south: NodeId,
    pub paths: Vec<Vec<NodeId>>,
}

impl ThetaLayout {
    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn is_pole(&self, x: NodeId) -> bool {
        x == self.north || x == self.south
    }

    /// Path index and 1-based offset from the north pole of an internal node.
    pub fn locate(&self, x: NodeId) -> Option<(usize, usize)> {
        self.paths.iter().enumerate().find_map(|(i, p)| {
            p.iter().position(|&y| y == x).map(|off| (i, off + 1))
        })
    }

    /// Full node sequence `N, v_1, .., v_d, S` of path `i`.
    pub fn full_path(&self, i: usize) -> Vec<NodeId> {
        let mut seq = Vec::with_capacity(self.paths[i].len() + 2);
        seq.push(self.north);
        seq.extend_from_slice(&self.paths[i]);
        seq.push(self.south);
        seq
    }

    /// Edge `j` of path `i`, counted from the north pole (`0..=d_i`).
    pub fn path_edge(&self, i: usize, j: usize) -> Edge {
        let seq = self.full_path(i);
        Edge::new(seq[j], seq[j + 1])
    }
}

/// A family name plus its integer parameters, e.g. `theta:3,3,3` or `grid:3x3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub params: Vec<usize>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, params: Vec<usize>) -> Self {
        FamilySpec { kind, params }
    }

    pub fn build(&self) -> Result<Graph, GraphError> {
        let p = &self.params;
        let want = |n: usize| -> Result<(), GraphError> {
            if p.len() == n {
                Ok(())
            } else {
                Err(GraphError::InvalidParameters(format!(
                    "{} expects {n} parameter(s), got {}",
                    self.kind.as_str(),
                    p.len()
                )))
            }
        };
        match self.kind {
            FamilyKind::Path => want(1).and_then(|_| make_path(p[0])),
            FamilyKind::Ring => want(1).and_then(|_| make_ring(p[0])),
            FamilyKind::Complete => want(1).and_then(|_| make_complete(p[0])),
            FamilyKind::Grid => want(2).and_then(|_| make_grid(p[0], p[1])),
            FamilyKind::Theta => make_theta(p),
            FamilyKind::Lollipop => want(2).and_then(|_| make_lollipop(p[0], p[1])),
            FamilyKind::CliqueStar => want(2).and_then(|_| make_clique_star(p[0], p[1])),
            FamilyKind::DensityFamily => {
                want(2).and_then(|_| make_density_family(p[0], p[1]))
            }
            FamilyKind::Glued | FamilyKind::Contracted => Err(GraphError::InvalidParameters(
                format!("{} graphs have no direct constructor", self.kind.as_str()),
            )),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = GraphError;

    /// Accepts `kind:p1,p2,..`; grid also accepts `grid:RxC`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: FamilyKind = kind.trim().parse()?;
        let params = rest
            .split(|c| c == ',' || c == 'x')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>().map_err(|_| {
                    GraphError::InvalidParameters(format!("`{t}` is not a non-negative integer"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FamilySpec { kind, params })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}:{}", self.kind.as_str(), ps.join(","))
    }
}

/// Connected, undirected, simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    family: Option<FamilyInfo>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates, out-of-range
    /// endpoints and disconnected inputs.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= node_count || b >= node_count {
                return Err(GraphError::NodeOutOfRange(a, b, node_count));
            }
            let e = Edge::new(a, b);
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.0].push((e.1, id));
            adjacency[e.1].push((e.0, id));
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        let g = Graph {
            node_count,
            edges,
            adjacency,
            family: None,
        };
        if !g.is_connected_with(|_| true) {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn with_family(mut self, family: FamilyInfo) -> Result<Self, GraphError> {
        for (label, nodes) in &family.labels {
            if let Some(&bad) = nodes.iter().find(|&&x| x >= self.node_count) {
                return Err(GraphError::InvalidParameters(format!(
                    "label `{label}` references node {bad}"
                )));
            }
        }
        self.family = Some(family);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted lexicographically; the position is the [`EdgeId`].
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn edge_id(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        if a == b || a >= self.node_count || b >= self.node_count {
            return None;
        }
        self.edges.binary_search(&Edge::new(a, b)).ok()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_id(a, b).is_some()
    }

    /// Sorted `(neighbor, edge id)` pairs.
    pub fn adjacency(&self, x: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[x]
    }

    pub fn neighbors(&self, x: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[x].iter().map(|&(y, _)| y)
    }

    pub fn degree(&self, x: NodeId) -> usize {
        self.adjacency[x].len()
    }

    pub fn family(&self) -> Option<&FamilyInfo> {
        self.family.as_ref()
    }

    pub fn family_kind(&self) -> Option<FamilyKind> {
        self.family.as_ref().map(|f| f.kind)
    }

    pub fn label(&self, name: &str) -> Option<&[NodeId]> {
        self.family
            .as_ref()
            .and_then(|f| f.labels.get(name))
            .map(Vec::as_slice)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }

    /// Connectivity of the spanning subgraph whose edges satisfy `alive`.
    pub fn is_connected_with(&self, alive: impl Fn(EdgeId) -> bool) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, e) in &self.adjacency[x] {
                if !seen[y] && alive(e) {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.node_count
    }

    /// BFS distances from `src` using edges that satisfy `alive`;
    /// unreachable nodes get `usize::MAX`.
    pub fn distances_with(&self, src: NodeId, alive: impl Fn(EdgeId) -> bool) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &self.adjacency[x] {
                if dist[y] == usize::MAX && alive(e) {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn distances(&self, src: NodeId) -> Vec<usize> {
        self.distances_with(src, |_| true)
    }

    /// Theta structure from the family labels, when present.
    pub fn theta_layout(&self) -> Option<ThetaLayout> {
        let fam = self.family.as_ref()?;
        if !matches!(fam.kind, FamilyKind::Theta | FamilyKind::DensityFamily) {
            return None;
        }
        let north = *fam.labels.get("north")?.first()?;
        let south = *fam.labels.get("south")?.first()?;
        let mut paths = Vec::new();
        while let Some(p) = fam.labels.get(&format!("path_{}", paths.len())) {
            paths.push(p.clone());
        }
        if paths.is_empty() {
            return None;
        }
        Some(ThetaLayout {
            north,
            south,
            paths,
        })
    }

    /// Grid dimensions `(rows, cols)` from the family annotation.
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        let fam = self.family.as_ref()?;
        (fam.kind == FamilyKind::Grid && fam.params.len() == 2)
            .then(|| (fam.params[0], fam.params[1]))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.node_count,
            edges: self.edges.clone(),
            family: self.family.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("graph serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| {
            GraphError::Parse(format!(
                "line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        Graph::try_from(raw)
    }
}

/// On-disk graph format. Edges are written `[u, v]` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyInfo>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(raw: GraphJson) -> Result<Self, GraphError> {
        let g = Graph::new(raw.nodes, raw.edges.iter().map(|e| (e.0, e.1)))?;
        match raw.family {
            Some(f) => g.with_family(f),
            None => Ok(g),
        }
    }
}

fn family(kind: FamilyKind, params: Vec<usize>) -> FamilyInfo {
    FamilyInfo {
        kind,
        params,
        labels: BTreeMap::new(),
    }
}

fn invalid(msg: impl Into<String>) -> GraphError {
    GraphError::InvalidParameters(msg.into())
}

pub fn make_path(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(invalid("path needs at least 2 nodes"));
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))?.with_family(family(FamilyKind::Path, vec![n]))
}

pub fn make_ring(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(invalid("ring needs at least 3 nodes"));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))?
        .with_family(family(FamilyKind::Ring, vec![n]))
}

pub fn make_complete(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(invalid("complete graph needs at least 2 nodes"));
    }
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    Graph::new(n, edges)?.with_family(family(FamilyKind::Complete, vec![n]))
}

/// Row-major grid: node `(r, c)` has id `r * cols + c`.
pub fn make_grid(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    if rows < 1 || cols < 1 || rows * cols < 2 {
        return Err(invalid("grid needs rows, cols >= 1 and at least 2 nodes"));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let x = r * cols + c;
            if c + 1 < cols {
                edges.push((x, x + 1));
            }
            if r + 1 < rows {
                edges.push((x, x + cols));
            }
        }
    }
    Graph::new(rows * cols, edges)?.with_family(family(FamilyKind::Grid, vec![rows, cols]))
}

/// Generalized theta graph: poles 0 (north) and 1 (south) joined by one
/// path per entry of `internal_lengths`, path `i` carrying that many
/// internal nodes.
pub fn make_theta(internal_lengths: &[usize]) -> Result<Graph, GraphError> {
    theta_with_kind(internal_lengths, FamilyKind::Theta, internal_lengths.to_vec())
}

fn theta_with_kind(
    lengths: &[usize],
    kind: FamilyKind,
    params: Vec<usize>,
) -> Result<Graph, GraphError> {
    if lengths.is_empty() {
        return Err(invalid("theta graph needs at least one path"));
    }
    if lengths.iter().any(|&d| d < 1) {
        return Err(invalid(
            "every theta path needs at least one internal node (d = 0 is a multi-edge)",
        ));
    }
    let (north, south) = (0, 1);
    let mut next = 2;
    let mut edges = Vec::new();
    let mut info = family(kind, params);
    info.labels.insert("north".into(), vec![north]);
    info.labels.insert("south".into(), vec![south]);
    for (i, &d) in lengths.iter().enumerate() {
        let nodes: Vec<NodeId> = (next..next + d).collect();
        next += d;
        edges.push((north, nodes[0]));
        edges.extend(nodes.windows(2).map(|w| (w[0], w[1])));
        edges.push((nodes[d - 1], south));
        info.labels.insert(format!("path_{i}"), nodes);
    }
    Graph::new(next, edges)?.with_family(info)
}

/// Clique `K_{k+2}` on nodes `0..k+2` with a pendant path of `path_edges`
/// edges hanging off node 0 (the junction).
pub fn make_lollipop(k: usize, path_edges: usize) -> Result<Graph, GraphError> {
    if k < 1 || path_edges < 1 {
        return Err(invalid("lollipop needs k >= 1 and path_edges >= 1"));
    }
    let clique = k + 2;
    let n = clique + path_edges;
    let mut edges: Vec<(NodeId, NodeId)> = (0..clique)
        .flat_map(|a| (a + 1..clique).map(move |b| (a, b)))
        .collect();
    let path: Vec<NodeId> = (clique..n).collect();
    edges.push((0, path[0]));
    edges.extend(path.windows(2).map(|w| (w[0], w[1])));
    let mut info = family(FamilyKind::Lollipop, vec![k, path_edges]);
    info.labels.insert("clique".into(), (0..clique).collect());
    info.labels.insert("junction".into(), vec![0]);
    info.labels.insert("path".into(), path);
    Graph::new(n, edges)?.with_family(info)
}

/// Hub node 0 joined to `lambda` disjoint cliques of `(n-1)/lambda` nodes.
pub fn make_clique_star(n: usize, lambda: usize) -> Result<Graph, GraphError> {
    if n < 1 || lambda < 1 || (n - 1) % lambda != 0 {
        return Err(invalid("clique_star needs lambda to divide n-1"));
    }
    let block = (n - 1) / lambda;
    if block < 2 {
        return Err(invalid("clique_star blocks need at least 2 nodes"));
    }
    let mut edges = Vec::new();
    let mut info = family(FamilyKind::CliqueStar, vec![n, lambda]);
    info.labels.insert("hub".into(), vec![0]);
    for b in 0..lambda {
        let nodes: Vec<NodeId> = (1 + b * block..1 + (b + 1) * block).collect();
        for (i, &x) in nodes.iter().enumerate() {
            edges.push((0, x));
            edges.extend(nodes[i + 1..].iter().map(|&y| (x, y)));
        }
        info.labels.insert(format!("block_{b}"), nodes);
    }
    Graph::new(n, edges)?.with_family(info)
}

/// Theta graph on `n` nodes with `(n-2)/f` paths of `f` internal nodes.
pub fn make_density_family(n: usize, f: usize) -> Result<Graph, GraphError> {
    if f < 1 || n < 2 || (n - 2) % f != 0 || n - 2 < f {
        return Err(invalid("density family needs f >= 1 dividing n-2 (n > 2)"));
    }
    let lengths = vec![f; (n - 2) / f];
    theta_with_kind(&lengths, FamilyKind::DensityFamily, vec![n, f])
}

/// Disjoint union of `g` and `h` with `v` (in `g`) and `u` (in `h`)
/// identified. Nodes of `g` keep their ids; `h`'s nodes other than `u`
/// follow in order.
pub fn glue_at_vertex(g: &Graph, v: NodeId, h: &Graph, u: NodeId) -> Result<Graph, GraphError> {
    if v >= g.node_count() {
        return Err(GraphError::InvalidNode(v));
    }
    if u >= h.node_count() {
        return Err(GraphError::InvalidNode(u));
    }
    let offset = g.node_count();
    let map = |x: NodeId| -> NodeId {
        match x.cmp(&u) {
            std::cmp::Ordering::Equal => v,
            std::cmp::Ordering::Less => offset + x,
            std::cmp::Ordering::Greater => offset + x - 1,
        }
    };
    let edges = g
        .edges()
        .iter()
        .map(|e| (e.0, e.1))
        .chain(h.edges().iter().map(|e| (map(e.0), map(e.1))));
    let mut info = family(FamilyKind::Glued, vec![]);
    info.labels.insert("glue".into(), vec![v]);
    Graph::new(g.node_count() + h.node_count() - 1, edges)?.with_family(info)
}

/// Bridges of a connected graph (Tarjan low-link), as edge ids.
pub fn bridges(g: &Graph) -> Vec<EdgeId> {
    let n = g.node_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut timer = 0;
    // iterative DFS: (node, parent edge, next adjacency index)
    let mut stack: Vec<(NodeId, Option<EdgeId>, usize)> = vec![(0, None, 0)];
    disc[0] = 0;
    low[0] = 0;
    while let Some(&mut (x, parent, ref mut idx)) = stack.last_mut() {
        if *idx < g.adjacency(x).len() {
            let (y, e) = g.adjacency(x)[*idx];
            *idx += 1;
            if Some(e) == parent {
                continue;
            }
            if disc[y] == usize::MAX {
                timer += 1;
                disc[y] = timer;
                low[y] = timer;
                stack.push((y, Some(e), 0));
            } else {
                low[x] = low[x].min(disc[y]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[x]);
                if low[x] > disc[p] {
                    out.push(parent.expect("non-root has a parent edge"));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Contracts every bridge. Returns the contracted graph and, for each
/// original node, the node it was merged into.
pub fn contract_cut_edges(g: &Graph) -> (Graph, Vec<NodeId>) {
    let n = g.node_count();
    let mut parent: Vec<NodeId> = (0..n).collect();
    fn find(parent: &mut [NodeId], x: NodeId) -> NodeId {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for e in bridges(g) {
        let edge = g.edge(e);
        let (a, b) = (find(&mut parent, edge.0), find(&mut parent, edge.1));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut mapping = vec![0; n];
    let mut next = 0;
    for x in 0..n {
        let r = find(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        mapping[x] = label[r];
    }
    let edges: BTreeSet<Edge> = g
        .edges()
        .iter()
        .filter(|e| mapping[e.0] != mapping[e.1])
        .map(|e| Edge::new(mapping[e.0], mapping[e.1]))
        .collect();
    let contracted = Graph::new(next, edges.into_iter().map(|e| (e.0, e.1)))
        .expect("contracting bridges keeps the graph connected and simple")
        .with_family(family(FamilyKind::Contracted, vec![]))
        .expect("no labels");
    (contracted, mapping)
}

/// Exact edge density `m / n`.
pub fn edge_density(g: &Graph) -> Rational {
    Rational::new(g.edge_count() as i64, g.node_count() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_counts_for_mixed_lengths() {
        let g = make_theta(&[7, 4, 2, 3, 4, 3, 1, 7]).unwrap();
        assert_eq!(g.node_count(), 33);
        assert_eq!(g.edge_count(), 39);
        let layout = g.theta_layout().unwrap();
        assert_eq!(layout.path_count(), 8);
        assert_eq!(layout.paths[6].len(), 1);
    }

    #[test]
    fn single_path_theta_is_a_path() {
        let g = make_theta(&[1]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert!(g.is_tree());
    }

    #[test]
    fn theta_rejects_bad_lengths() {
        assert!(make_theta(&[]).is_err());
        assert!(make_theta(&[3, 0, 2]).is_err());
    }

    #[test]
    fn uniform_theta_density() {
        let g = make_theta(&[4, 4, 4, 4]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (18, 20));
        // 1 + (l-2)/(l*d+2) with l = d = 4
        assert_eq!(edge_density(&g), Rational::new(1, 1) + Rational::new(2, 18));
        assert_eq!(edge_density(&g), Rational::new(10, 9));
    }

    #[test]
    fn lollipop_examples() {
        let g = make_lollipop(2, 8).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (12, 14));
        assert_eq!(edge_density(&g), Rational::new(7, 6));
        assert!(edge_density(&g) <= Rational::new(3, 2));

        let g = make_lollipop(1, 1).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (4, 4));

        let g = make_lollipop(3, 5).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (10, 15));
        assert_eq!(edge_density(&g), Rational::new(3, 2));
        assert!(make_lollipop(0, 3).is_err());
        assert!(make_lollipop(2, 0).is_err());
    }

    #[test]
    fn clique_star_examples() {
        let g = make_clique_star(9, 2).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (9, 20));
        assert_eq!(g.degree(0), 8);
        let k3 = make_clique_star(3, 1).unwrap();
        assert_eq!(k3.edge_count(), 3);
        assert!(make_clique_star(8, 2).is_err());
        assert!(make_clique_star(5, 4).is_err());
    }

    #[test]
    fn density_family_examples() {
        let g = make_density_family(18, 4).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert_eq!(g.theta_layout().unwrap().path_count(), 4);
        let c4 = make_density_family(4, 1).unwrap();
        assert_eq!((c4.node_count(), c4.edge_count()), (4, 4));
        assert!(make_density_family(17, 4).is_err());
        assert!(make_density_family(10, 0).is_err());
    }

    #[test]
    fn standard_families() {
        assert_eq!(edge_density(&make_path(5).unwrap()), Rational::new(4, 5));
        assert_eq!(edge_density(&make_ring(5).unwrap()).to_string(), "1/1");
        assert_eq!(edge_density(&make_complete(6).unwrap()), Rational::new(5, 2));
        assert_eq!(edge_density(&make_grid(2, 3).unwrap()), Rational::new(7, 6));
        assert_eq!(edge_density(&make_ring(7).unwrap()), Rational::new(1, 1));
        assert_eq!(edge_density(&make_path(9).unwrap()), Rational::new(8, 9));
        assert!(make_path(1).is_err());
        assert!(make_ring(2).is_err());
        assert!(make_grid(1, 1).is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let g = make_grid(2, 3).unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(0, 3) && !g.has_edge(2, 3));
        assert_eq!(g.grid_dims(), Some((2, 3)));
    }

    #[test]
    fn graph_rejects_malformed_edges() {
        assert_eq!(Graph::new(3, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::new(2, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(GraphError::NodeOutOfRange(..))
        ));
        assert_eq!(Graph::new(3, [(0, 1)]), Err(GraphError::Disconnected));
    }

    #[test]
    fn glue_two_triangles() {
        let k3 = make_complete(3).unwrap();
        let g = glue_at_vertex(&k3, 0, &k3, 2).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (5, 6));
        assert!(glue_at_vertex(&k3, 3, &k3, 0).is_err());
    }

    #[test]
    fn contraction_examples() {
        let (c, map) = contract_cut_edges(&make_path(5).unwrap());
        assert_eq!(c.node_count(), 1);
        assert!(map.iter().all(|&x| x == 0));

        let ring = make_ring(5).unwrap();
        let (c, _) = contract_cut_edges(&ring);
        assert_eq!(c.edges(), ring.edges());

        let (c, map) = contract_cut_edges(&make_lollipop(2, 3).unwrap());
        assert_eq!((c.node_count(), c.edge_count()), (4, 6));
        assert_eq!(map[4..], [0, 0, 0]);
    }

    #[test]
    fn json_is_byte_stable() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let text = g.to_json_string();
        let back = Graph::from_json_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json_string(), text);
        assert!(text.contains("\"kind\": \"theta\""));
    }

    #[test]
    fn json_parse_errors_carry_position() {
        let err = Graph::from_json_str("{\"nodes\": 2,\n \"edges\": [[0, 1],]}").unwrap_err();
        assert!(matches!(err, GraphError::Parse(ref m) if m.contains("line 2")), "{err}");
    }

    #[test]
    fn family_spec_parsing() {
        let s: FamilySpec = "grid:3x3".parse().unwrap();
        assert_eq!(s.params, vec![3, 3]);
        let t: FamilySpec = "theta:3,3,3".parse().unwrap();
        assert_eq!(t.build().unwrap().node_count(), 11);
        assert!("blob:1".parse::<FamilySpec>().is_err());
    }
}
