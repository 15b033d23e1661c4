//! Adversary for theta graphs with fewer ignorant agents than paths.
//!
//! One agent is placed inside each path. Every round at most one edge per
//! path is removed (two would strand the nodes between them) and at least
//! one path stays whole. Among those removals the blocker keeps every
//! ignorant agent at surviving distance at least 3 from every source, which
//! is exactly what rules out a meeting in the coming move. Ignorant agents
//! next to a pole get their pole edge cut first, so none ever reaches a
//! pole while a safe pattern exists. Further preference goes
//! to cutting, on each inhabited path, the edge between its agent and the
//! nearer pole, and between a source and an ignorant agent sharing a path.

use crate::engine::{AdversaryPolicy, Configuration, PolicyError};
use crate::graph::{EdgeId, Graph, NodeId, ThetaLayout};

#[derive(Debug, Clone, Default)]
pub struct ThetaBlocker;

/// Surviving distance below which a meeting can be forced this round.
const SAFE: usize = 3;

/// Position of a node on a theta graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSpot {
    North,
    South,
    /// Path index and offset `1..=d` from the north pole.
    Inner(usize, usize),
}

pub fn locate(t: &ThetaLayout, x: NodeId) -> ThetaSpot {
    if x == t.north {
        ThetaSpot::North
    } else if x == t.south {
        ThetaSpot::South
    } else {
        let (p, off) = t.locate(x).expect("theta node");
        ThetaSpot::Inner(p, off)
    }
}

/// Every connectivity-preserving removal of a theta graph: per path either
/// nothing or one of its `d + 1` edges, with at least one path untouched.
/// Entry `i` of a choice is the cut edge index on path `i` (None = whole).
pub fn theta_removals(t: &ThetaLayout) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![Vec::new()];
    for p in &t.paths {
        let mut next = Vec::new();
        for prefix in &out {
            for cut in std::iter::once(None).chain((0..=p.len()).map(Some)) {
                let mut v: Vec<Option<usize>> = prefix.clone();
                v.push(cut);
                next.push(v);
            }
        }
        out = next;
    }
    out.retain(|c| c.iter().any(Option::is_none));
    out
}

pub(crate) fn removal_ids(g: &Graph, t: &ThetaLayout, cuts: &[Option<usize>]) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = cuts
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| {
            let e = t.path_edge(i, j);
            g.edge_id(e.u(), e.v()).expect("theta edge")
        }))
        .collect();
    ids.sort_unstable();
    ids
}

/// Distances between theta nodes for a given cut pattern, computed on the
/// path structure.
struct CutTheta<'a> {
    t: &'a ThetaLayout,
    cuts: &'a [Option<usize>],
    pole_gap: usize,
}

impl<'a> CutTheta<'a> {
    fn new(t: &'a ThetaLayout, cuts: &'a [Option<usize>]) -> Self {
        let pole_gap = t
            .paths
            .iter()
            .zip(cuts)
            .filter(|(_, c)| c.is_none())
            .map(|(p, _)| p.len() + 1)
            .min()
            .expect("an intact path");
        CutTheta { t, cuts, pole_gap }
    }

    /// Distances from `x` to (north, south).
    fn to_poles(&self, x: ThetaSpot) -> (usize, usize) {
        match x {
            ThetaSpot::North => (0, self.pole_gap),
            ThetaSpot::South => (self.pole_gap, 0),
            ThetaSpot::Inner(p, off) => {
                let d = self.t.paths[p].len();
                // edge j joins offsets j and j+1
                let north_open = self.cuts[p].map_or(true, |j| j >= off);
                let south_open = self.cuts[p].map_or(true, |j| j < off);
                let dn = north_open.then_some(off);
                let ds = south_open.then_some(d + 1 - off);
                match (dn, ds) {
                    (Some(a), Some(b)) => (a.min(b + self.pole_gap), b.min(a + self.pole_gap)),
                    (Some(a), None) => (a, a + self.pole_gap),
                    (None, Some(b)) => (b + self.pole_gap, b),
                    (None, None) => unreachable!("one cut per path"),
                }
            }
        }
    }

    fn dist(&self, x: ThetaSpot, y: ThetaSpot) -> usize {
        let (xn, xs) = self.to_poles(x);
        let (yn, ys) = self.to_poles(y);
        let mut best = (xn + yn).min(xs + ys);
        if let (ThetaSpot::Inner(p, a), ThetaSpot::Inner(q, b)) = (x, y) {
            if p == q {
                let (lo, hi) = (a.min(b), a.max(b));
                let blocked = self.cuts[p].is_some_and(|j| j >= lo && j < hi);
                if !blocked {
                    best = best.min(hi - lo);
                }
            }
        }
        best
    }
}

fn theta_of(g: &Graph) -> Result<ThetaLayout, PolicyError> {
    g.theta_layout()
        .ok_or_else(|| PolicyError::Inapplicable("theta blocker needs a theta graph".into()))
}

/// Cut pattern the blocker uses against `config`, if any keeps all sources
/// at distance at least 3 from all ignorant agents.
pub fn blocking_cuts(t: &ThetaLayout, config: &Configuration) -> Option<Vec<Option<usize>>> {
    let sources: Vec<ThetaSpot> = config.source_positions().iter().map(|&x| locate(t, x)).collect();
    let ignorant: Vec<ThetaSpot> = config.ignorant_positions().iter().map(|&x| locate(t, x)).collect();
    let preferred = preferred_cuts(t, &sources, &ignorant);
    let mut best: Option<((usize, usize, usize, usize), Vec<Option<usize>>)> = None;
    for cuts in theta_removals(t) {
        let ct = CutTheta::new(t, &cuts);
        let mut min_d = usize::MAX;
        let mut sum = 0;
        for &s in &sources {
            for &i in &ignorant {
                let d = ct.dist(s, i);
                min_d = min_d.min(d);
                sum += d;
            }
        }
        if min_d < SAFE {
            continue;
        }
        let agree = cuts.iter().zip(&preferred).filter(|(c, p)| c == p).count();
        let score = (guarded(t, &cuts, &ignorant), min_d.min(2 * SAFE), agree, sum);
        if best.as_ref().map_or(true, |(b, _)| score > *b) {
            best = Some((score, cuts));
        }
    }
    best.map(|(_, c)| c)
}

/// Ignorant agents next to a pole whose edge to that pole is cut.
fn guarded(t: &ThetaLayout, cuts: &[Option<usize>], ignorant: &[ThetaSpot]) -> usize {
    ignorant
        .iter()
        .filter(|s| match **s {
            ThetaSpot::Inner(p, off) => {
                let d = t.paths[p].len();
                let need_north = off == 1 && cuts[p] != Some(0);
                let need_south = off == d && cuts[p] != Some(d);
                !need_north && !need_south
            }
            _ => false,
        })
        .count()
}

/// Per path: the edge between a lone ignorant agent and its nearer pole, or
/// the edge just in front of a source facing an ignorant agent.
fn preferred_cuts(t: &ThetaLayout, sources: &[ThetaSpot], ignorant: &[ThetaSpot]) -> Vec<Option<usize>> {
    (0..t.path_count())
        .map(|p| {
            let d = t.paths[p].len();
            let on = |v: &[ThetaSpot]| -> Vec<usize> {
                v.iter()
                    .filter_map(|s| match *s {
                        ThetaSpot::Inner(q, off) if q == p => Some(off),
                        _ => None,
                    })
                    .collect()
            };
            let (src, ign) = (on(sources), on(ignorant));
            match (src.first(), ign.first()) {
                (Some(&s), Some(&i)) => Some(if s < i { s } else { s - 1 }),
                (None, Some(&i)) => Some(if i <= d + 1 - i { i - 1 } else { i }),
                _ => None,
            }
        })
        .collect()
}

impl AdversaryPolicy for ThetaBlocker {
    fn name(&self) -> String {
        "theta_blocker".into()
    }

    fn decide(&mut self, g: &Graph, config: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        let t = theta_of(g)?;
        let cuts = blocking_cuts(&t, config).unwrap_or_else(|| {
            // no safe pattern: fall back to the preferred cuts that keep
            // the graph connected
            let sources: Vec<ThetaSpot> =
                config.source_positions().iter().map(|&x| locate(&t, x)).collect();
            let ignorant: Vec<ThetaSpot> =
                config.ignorant_positions().iter().map(|&x| locate(&t, x)).collect();
            let mut c = preferred_cuts(&t, &sources, &ignorant);
            if c.iter().all(Option::is_some) {
                c[0] = None;
            }
            c
        });
        Ok(removal_ids(g, &t, &cuts))
    }

    /// One agent inside each path, at its middle node: the source on path 0,
    /// ignorant agents on the following paths.
    fn place(
        &self,
        g: &Graph,
        ignorant: usize,
        sources: usize,
    ) -> Option<Result<Configuration, PolicyError>> {
        Some((|| {
            let t = theta_of(g)?;
            let l = t.path_count();
            if ignorant + sources > l {
                return Err(PolicyError::Inapplicable(format!(
                    "{} agents exceed the {l} paths",
                    ignorant + sources
                )));
            }
            let mid = |p: usize| t.paths[p][(t.paths[p].len() - 1) / 2];
            let src: Vec<NodeId> = (0..sources).map(mid).collect();
            let ign: Vec<NodeId> = (sources..sources + ignorant).map(mid).collect();
            Ok(Configuration::new(&src, &ign))
        })())
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Surviving;
    use crate::graph::*;

    #[test]
    fn removal_count() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        assert_eq!(theta_removals(&g.theta_layout().unwrap()).len(), 61);
    }

    #[test]
    fn path_distances_match_bfs() {
        let g = make_theta(&[3, 2, 4]).unwrap();
        let t = g.theta_layout().unwrap();
        for cuts in theta_removals(&t) {
            let ids = removal_ids(&g, &t, &cuts);
            let view = Surviving::without(&g, &ids);
            assert!(view.is_connected());
            let ct = CutTheta::new(&t, &cuts);
            for x in 0..g.node_count() {
                let bfs = view.distances(x);
                for y in 0..g.node_count() {
                    assert_eq!(ct.dist(locate(&t, x), locate(&t, y)), bfs[y], "{cuts:?} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn placement_one_per_path() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let c = ThetaBlocker.place(&g, 2, 1).unwrap().unwrap();
        let t = g.theta_layout().unwrap();
        let mut paths: Vec<usize> = c.positions().iter().map(|&x| t.locate(x).unwrap().0).collect();
        paths.sort_unstable();
        assert_eq!(paths, vec![0, 1, 2]);
        assert!(ThetaBlocker.place(&g, 3, 1).unwrap().is_err());
    }
}
