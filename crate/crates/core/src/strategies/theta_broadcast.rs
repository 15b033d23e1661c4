//! Phase-based agent policy for theta graphs with at least as many ignorant
//! agents as paths.
//!
//! A preprocessing step produces a first conversion. After every conversion
//! the policy restarts at phase 1:
//!
//! 1. two sources on one path walk apart until a source stands on a pole;
//! 2. a pole source and an inner source each chase an ignorant agent to the
//!    far pole;
//! 3. the two ignorant agents parked there push the two inner sources back;
//! 4. with a source anchored on one pole: spread doubled-up agents until
//!    every path carries a mover, pinch an ignorant agent lying between the
//!    anchor and an inner source, or else send every ignorant agent toward
//!    the anchor and every other source toward the far pole;
//! 5. with a source on each pole, both walk one path toward each other.
//!
//! Phases 2 and 3 are skipped when their preconditions fail. Within a phase
//! every round either brings a conversion or lowers a distance measure the
//! adversary cannot hold, so each phase ends.

use std::fmt;

use crate::engine::{AgentPolicy, Configuration, PolicyError, Surviving};
use crate::graph::{NodeId, ThetaLayout};
use crate::strategies::theta_blocker::{locate, ThetaSpot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    North,
    South,
}

impl Pole {
    fn other(self) -> Pole {
        match self {
            Pole::North => Pole::South,
            Pole::South => Pole::North,
        }
    }
}

/// One logged change of phase. Phase 0 is preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseChange {
    pub round: usize,
    pub from: u8,
    pub to: u8,
    pub sources: usize,
}

/// Phase changes the algorithm may make.
pub fn allowed_change(from: u8, to: u8) -> bool {
    matches!(
        (from, to),
        (0, 1) | (1, 2) | (2, 1) | (2, 3) | (3, 1) | (3, 2) | (3, 4) | (4, 1) | (4, 2) | (4, 5) | (5, 1)
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PreStep {
    /// Sole source walks to `toward`, pushed by ignorant agents on its path.
    Push { source: usize, path: usize, toward: Pole, helper: Option<usize> },
    Spread(Spread),
    /// Source waits on `anchor`, every path sends an ignorant agent to it.
    Gather { anchor: Pole, assign: Vec<(usize, usize)> },
}

/// Two agents on `path` walk to opposite poles.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Spread {
    path: usize,
    north: usize,
    south: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Chase {
    x: usize,
    e: usize,
    q: usize,
    y: usize,
    d: usize,
    p: usize,
    toward: Pole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pushes {
    /// (source, ignorant, path)
    pairs: [(usize, usize, usize); 2],
    toward: Pole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FourStep {
    Spread(Spread),
    Pincer { anchor: usize, inner: usize, path: usize, pole: Pole },
    Assault { pole: Pole, anchor: usize, assign: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Sweep {
    north: usize,
    south: usize,
    path: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Phase {
    Pre(Option<PreStep>),
    One(usize, usize),
    Two(Option<Chase>),
    Three(Option<Pushes>),
    Four(Option<FourStep>),
    Five(Option<Sweep>),
}

impl Phase {
    fn number(&self) -> u8 {
        match self {
            Phase::Pre(_) => 0,
            Phase::One(..) => 1,
            Phase::Two(_) => 2,
            Phase::Three(_) => 3,
            Phase::Four(_) => 4,
            Phase::Five(_) => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Memory {
    phase: Phase,
    sources: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ThetaBroadcast {
    k: usize,
    memory: Option<Memory>,
    log: Vec<PhaseChange>,
    round: usize,
}

impl ThetaBroadcast {
    /// Policy for `k` ignorant agents.
    pub fn new(k: usize) -> Self {
        ThetaBroadcast {
            k,
            memory: None,
            log: Vec::new(),
            round: 0,
        }
    }

    /// Current phase, 0 before the first conversion.
    pub fn phase(&self) -> u8 {
        self.memory.as_ref().map_or(0, |m| m.phase.number())
    }

    pub fn transitions(&self) -> &[PhaseChange] {
        &self.log
    }
}

/// Read-only helpers over one round's view.
struct Ctx<'a, 'g> {
    t: &'a ThetaLayout,
    view: &'a Surviving<'g>,
    config: &'a Configuration,
    spots: Vec<ThetaSpot>,
    active: Vec<bool>,
}

impl<'a, 'g> Ctx<'a, 'g> {
    fn new(t: &'a ThetaLayout, view: &'a Surviving<'g>, config: &'a Configuration) -> Self {
        let spots = config.positions().iter().map(|&x| locate(t, x)).collect();
        let mut active: Vec<bool> = (0..config.len()).map(|i| config.is_source(i)).collect();
        for i in config.ignorant_ids().take(t.path_count()) {
            active[i] = true;
        }
        Ctx { t, view, config, spots, active }
    }

    fn paths(&self) -> usize {
        self.t.path_count()
    }

    fn len(&self, p: usize) -> usize {
        self.t.paths[p].len()
    }

    fn node_at(&self, p: usize, off: usize) -> NodeId {
        if off == 0 {
            self.t.north
        } else if off == self.len(p) + 1 {
            self.t.south
        } else {
            self.t.paths[p][off - 1]
        }
    }

    fn pole_offset(&self, p: usize, pole: Pole) -> usize {
        match pole {
            Pole::North => 0,
            Pole::South => self.len(p) + 1,
        }
    }

    fn src(&self, i: usize) -> bool {
        self.config.is_source(i)
    }

    fn at_pole(&self, i: usize) -> Option<Pole> {
        match self.spots[i] {
            ThetaSpot::North => Some(Pole::North),
            ThetaSpot::South => Some(Pole::South),
            ThetaSpot::Inner(..) => None,
        }
    }

    fn inner(&self, i: usize) -> Option<(usize, usize)> {
        match self.spots[i] {
            ThetaSpot::Inner(p, off) => Some((p, off)),
            _ => None,
        }
    }

    /// Offset of agent `i` on path `p` (poles count as ends of every path).
    fn offset_on(&self, i: usize, p: usize) -> Option<usize> {
        match self.spots[i] {
            ThetaSpot::North => Some(0),
            ThetaSpot::South => Some(self.len(p) + 1),
            ThetaSpot::Inner(q, off) => (q == p).then_some(off),
        }
    }

    /// Next node of agent `i` walking along `p` toward `pole`; stays put
    /// when the edge is gone or the pole is reached.
    fn step(&self, i: usize, p: usize, pole: Pole) -> Result<NodeId, PolicyError> {
        let off = self
            .offset_on(i, p)
            .ok_or_else(|| PolicyError::Precondition(format!("agent {i} is not on path {p}")))?;
        let goal = self.pole_offset(p, pole);
        let here = self.node_at(p, off);
        if off == goal {
            return Ok(here);
        }
        let next = if goal > off { off + 1 } else { off - 1 };
        let there = self.node_at(p, next);
        Ok(if self.view.has_edge(here, there) { there } else { here })
    }

    fn ids(&self) -> std::ops::Range<usize> {
        0..self.config.len()
    }

    fn sources_at(&self, pole: Pole) -> Vec<usize> {
        self.ids().filter(|&i| self.src(i) && self.at_pole(i) == Some(pole)).collect()
    }

    fn active_ignorant(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids().filter(|&i| self.active[i] && !self.src(i))
    }
}

fn broken(phase: u8, msg: impl fmt::Display) -> PolicyError {
    PolicyError::Precondition(format!("phase {phase}: {msg}"))
}

/// Assigns flexible agents to the paths no inner mover covers. None if
/// there are too few.
fn cover(paths: usize, inner: &[(usize, usize)], flexible: &[usize]) -> Option<Vec<(usize, usize)>> {
    let uncovered: Vec<usize> = (0..paths).filter(|p| inner.iter().all(|&(_, q)| q != *p)).collect();
    (flexible.len() >= uncovered.len())
        .then(|| flexible.iter().copied().zip(uncovered).collect())
}

/// Lowest path holding two inner movers, with its northmost and southmost.
fn pick_spread(ctx: &Ctx<'_, '_>, inner: &[(usize, usize)]) -> Option<Spread> {
    (0..ctx.paths()).find_map(|p| {
        let mut on: Vec<(usize, usize)> = inner
            .iter()
            .filter(|&&(_, q)| q == p)
            .map(|&(i, _)| (ctx.offset_on(i, p).expect("inner"), i))
            .collect();
        if on.len() < 2 {
            return None;
        }
        on.sort_unstable();
        Some(Spread {
            path: p,
            north: on[0].1,
            south: on[on.len() - 1].1,
        })
    })
}

fn spread_done(ctx: &Ctx<'_, '_>, s: &Spread) -> bool {
    ctx.at_pole(s.north).is_some() || ctx.at_pole(s.south).is_some()
}

fn spread_moves(ctx: &Ctx<'_, '_>, s: &Spread, moves: &mut [NodeId]) -> Result<(), PolicyError> {
    moves[s.north] = ctx.step(s.north, s.path, Pole::North)?;
    moves[s.south] = ctx.step(s.south, s.path, Pole::South)?;
    Ok(())
}

enum Step {
    Next(Phase),
    Moves(Phase, Vec<NodeId>),
}

fn pre(ctx: &Ctx<'_, '_>, step: Option<PreStep>) -> Result<Step, PolicyError> {
    let mut moves = ctx.config.positions();
    let Some(step) = step else {
        let sources: Vec<usize> = ctx.ids().filter(|&i| ctx.src(i)).collect();
        for (n, &a) in sources.iter().enumerate() {
            for &b in &sources[n + 1..] {
                let shared = match (ctx.inner(a), ctx.inner(b)) {
                    (Some((p, _)), Some((q, _))) => p == q,
                    _ => true,
                };
                if shared {
                    return Ok(Step::Next(Phase::One(a, b)));
                }
            }
        }
        let s = *sources.first().ok_or_else(|| broken(0, "no source agent"))?;
        let ignorant: Vec<usize> = ctx.active_ignorant().collect();
        let inner: Vec<(usize, usize)> = ignorant
            .iter()
            .filter_map(|&i| ctx.inner(i).map(|(p, _)| (i, p)))
            .collect();
        let next = match ctx.inner(s) {
            Some((p, off)) => {
                let on_p: Vec<usize> = inner
                    .iter()
                    .filter(|&&(_, q)| q == p)
                    .map(|&(i, _)| ctx.offset_on(i, p).expect("inner"))
                    .collect();
                if !on_p.is_empty() {
                    let toward = if on_p.iter().any(|&o| o > off) { Pole::North } else { Pole::South };
                    PreStep::Push { source: s, path: p, toward, helper: None }
                } else if let Some(&h) = ignorant.iter().find(|&&i| ctx.at_pole(i).is_some()) {
                    let toward = ctx.at_pole(h).expect("pole").other();
                    PreStep::Push { source: s, path: p, toward, helper: Some(h) }
                } else {
                    PreStep::Spread(pick_spread(ctx, &inner).ok_or_else(|| broken(0, "no path to spread"))?)
                }
            }
            None => {
                let anchor = ctx.at_pole(s).expect("pole");
                let flexible: Vec<usize> = ignorant
                    .iter()
                    .copied()
                    .filter(|&i| ctx.at_pole(i) == Some(anchor.other()))
                    .collect();
                match cover(ctx.paths(), &inner, &flexible) {
                    Some(assign) => PreStep::Gather { anchor, assign },
                    None => PreStep::Spread(pick_spread(ctx, &inner).ok_or_else(|| broken(0, "no path to spread"))?),
                }
            }
        };
        return Ok(Step::Next(Phase::Pre(Some(next))));
    };
    match &step {
        PreStep::Push { source, path, toward, helper } => {
            if ctx.at_pole(*source).is_some() {
                return Ok(Step::Next(Phase::Pre(None)));
            }
            moves[*source] = ctx.step(*source, *path, *toward)?;
            for i in ctx.active_ignorant() {
                if ctx.inner(i).is_some_and(|(q, _)| q == *path) || Some(i) == *helper {
                    moves[i] = ctx.step(i, *path, *toward)?;
                }
            }
        }
        PreStep::Spread(s) => {
            if spread_done(ctx, s) {
                return Ok(Step::Next(Phase::Pre(None)));
            }
            spread_moves(ctx, s, &mut moves)?;
        }
        PreStep::Gather { anchor, assign } => {
            for i in ctx.active_ignorant() {
                if let Some((p, _)) = ctx.inner(i) {
                    moves[i] = ctx.step(i, p, *anchor)?;
                } else if let Some(&(_, p)) = assign.iter().find(|&&(j, _)| j == i) {
                    moves[i] = ctx.step(i, p, *anchor)?;
                }
            }
        }
    }
    Ok(Step::Moves(Phase::Pre(Some(step)), moves))
}

fn one(ctx: &Ctx<'_, '_>, x: usize, y: usize) -> Result<Step, PolicyError> {
    if ctx.ids().any(|i| ctx.src(i) && ctx.at_pole(i).is_some()) {
        return Ok(Step::Next(Phase::Two(None)));
    }
    let (Some((p, ox)), Some((q, oy))) = (ctx.inner(x), ctx.inner(y)) else {
        return Err(broken(1, "pair left its path"));
    };
    if p != q {
        return Err(broken(1, format!("pair split over paths {p} and {q}")));
    }
    let (north, south) = if (ox, x) < (oy, y) { (x, y) } else { (y, x) };
    let mut moves = ctx.config.positions();
    spread_moves(ctx, &Spread { path: p, north, south }, &mut moves)?;
    Ok(Step::Moves(Phase::One(x, y), moves))
}

fn choose_chase(ctx: &Ctx<'_, '_>) -> Option<Chase> {
    let north = ctx.sources_at(Pole::North);
    let south = ctx.sources_at(Pole::South);
    if !north.is_empty() && !south.is_empty() {
        return None;
    }
    let x = north.iter().chain(&south).copied().min()?;
    let from = ctx.at_pole(x)?;
    let toward = from.other();
    // every path must carry an agent
    let active: Vec<usize> = ctx.ids().filter(|&i| ctx.active[i]).collect();
    let inner: Vec<(usize, usize)> = active
        .iter()
        .filter_map(|&i| ctx.inner(i).map(|(p, _)| (i, p)))
        .collect();
    let flexible: Vec<usize> = active.iter().copied().filter(|&i| ctx.at_pole(i).is_some()).collect();
    cover(ctx.paths(), &inner, &flexible)?;
    let ahead = |from_off: usize, off: usize| match toward {
        Pole::North => off < from_off,
        Pole::South => off > from_off,
    };
    let (y, d, p) = ctx.ids().filter(|&i| ctx.src(i)).find_map(|y| {
        let (p, oy) = ctx.inner(y)?;
        ctx.active_ignorant()
            .filter_map(|i| ctx.inner(i).filter(|&(q, o)| q == p && ahead(oy, o)).map(|(_, o)| (o.abs_diff(oy), i)))
            .min()
            .map(|(_, d)| (y, d, p))
    })?;
    let (e, q) = (0..ctx.paths()).filter(|&q| q != p).find_map(|q| {
        ctx.active_ignorant()
            .filter_map(|i| ctx.inner(i).filter(|&(r, _)| r == q).map(|(_, o)| (o.abs_diff(ctx.pole_offset(q, from)), i)))
            .min()
            .map(|(_, e)| (e, q))
    })?;
    Some(Chase { x, e, q, y, d, p, toward })
}

fn two(ctx: &Ctx<'_, '_>, chase: Option<Chase>) -> Result<Step, PolicyError> {
    let Some(c) = chase else {
        return Ok(Step::Next(match choose_chase(ctx) {
            Some(c) => Phase::Two(Some(c)),
            None => Phase::Three(None),
        }));
    };
    let e_home = ctx.at_pole(c.e) == Some(c.toward);
    let d_home = ctx.at_pole(c.d) == Some(c.toward);
    if e_home && d_home {
        return Ok(Step::Next(Phase::Three(None)));
    }
    let mut moves = ctx.config.positions();
    if !e_home {
        moves[c.e] = ctx.step(c.e, c.q, c.toward)?;
        moves[c.x] = ctx.step(c.x, c.q, c.toward)?;
    }
    if !d_home {
        moves[c.d] = ctx.step(c.d, c.p, c.toward)?;
        moves[c.y] = ctx.step(c.y, c.p, c.toward)?;
    }
    Ok(Step::Moves(Phase::Two(Some(c)), moves))
}

fn choose_pushes(ctx: &Ctx<'_, '_>) -> Option<Pushes> {
    [Pole::North, Pole::South].into_iter().find_map(|home| {
        let parked: Vec<usize> = ctx.active_ignorant().filter(|&i| ctx.at_pole(i) == Some(home)).collect();
        let toward = home.other();
        if parked.len() < 2 || !ctx.sources_at(home).is_empty() || !ctx.sources_at(toward).is_empty() {
            return None;
        }
        let inner: Vec<(usize, usize)> = ctx
            .ids()
            .filter(|&i| ctx.src(i))
            .filter_map(|i| ctx.inner(i).map(|(p, _)| (i, p)))
            .collect();
        let &(y, py) = inner.first()?;
        let &(x, px) = inner.iter().find(|&&(_, p)| p != py)?;
        Some(Pushes {
            pairs: [(y, parked[0], py), (x, parked[1], px)],
            toward,
        })
    })
}

fn three(ctx: &Ctx<'_, '_>, pushes: Option<Pushes>) -> Result<Step, PolicyError> {
    let Some(ps) = pushes else {
        return Ok(Step::Next(match choose_pushes(ctx) {
            Some(ps) => Phase::Three(Some(ps)),
            None => Phase::Four(None),
        }));
    };
    if ps.pairs.iter().any(|&(s, _, _)| ctx.at_pole(s) == Some(ps.toward)) {
        return Ok(Step::Next(Phase::Four(None)));
    }
    let mut moves = ctx.config.positions();
    for &(s, i, p) in &ps.pairs {
        moves[s] = ctx.step(s, p, ps.toward)?;
        moves[i] = ctx.step(i, p, ps.toward)?;
    }
    Ok(Step::Moves(Phase::Three(Some(ps)), moves))
}

fn choose_four(ctx: &Ctx<'_, '_>) -> Result<FourStep, PolicyError> {
    let (pole, anchor) = [Pole::North, Pole::South]
        .into_iter()
        .find_map(|pole| ctx.sources_at(pole).first().map(|&a| (pole, a)))
        .ok_or_else(|| broken(4, "no source on a pole"))?;
    let far = pole.other();
    let active: Vec<usize> = ctx.ids().filter(|&i| ctx.active[i]).collect();
    let inner: Vec<(usize, usize)> = active
        .iter()
        .filter_map(|&i| ctx.inner(i).map(|(p, _)| (i, p)))
        .collect();
    let flexible: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| {
            i != anchor
                && match ctx.at_pole(i) {
                    Some(p) if p == far => !ctx.src(i),
                    Some(_) => ctx.src(i),
                    None => false,
                }
        })
        .collect();
    let Some(assign) = cover(ctx.paths(), &inner, &flexible) else {
        return pick_spread(ctx, &inner)
            .map(FourStep::Spread)
            .ok_or_else(|| broken(4, "paths uncovered and nothing to spread"));
    };
    // an ignorant agent between the anchor and an inner source gets pinched
    for p in 0..ctx.paths() {
        let home = ctx.pole_offset(p, pole);
        for &(s, q) in &inner {
            if q != p || !ctx.src(s) {
                continue;
            }
            let os = ctx.offset_on(s, p).expect("inner");
            let caught = inner.iter().any(|&(i, r)| {
                let oi = ctx.offset_on(i, p).unwrap_or(usize::MAX);
                r == p && !ctx.src(i) && oi.abs_diff(home) < os.abs_diff(home)
            });
            if caught {
                return Ok(FourStep::Pincer { anchor, inner: s, path: p, pole });
            }
        }
    }
    Ok(FourStep::Assault { pole, anchor, assign })
}

fn four(ctx: &Ctx<'_, '_>, step: Option<FourStep>) -> Result<Step, PolicyError> {
    if !ctx.sources_at(Pole::North).is_empty() && !ctx.sources_at(Pole::South).is_empty() {
        return Ok(Step::Next(Phase::Five(None)));
    }
    let Some(step) = step else {
        return Ok(Step::Next(Phase::Four(Some(choose_four(ctx)?))));
    };
    let mut moves = ctx.config.positions();
    match &step {
        FourStep::Spread(s) => {
            if spread_done(ctx, s) {
                return Ok(Step::Next(Phase::Four(None)));
            }
            spread_moves(ctx, s, &mut moves)?;
        }
        FourStep::Pincer { anchor, inner, path, pole } => {
            moves[*anchor] = ctx.step(*anchor, *path, pole.other())?;
            moves[*inner] = ctx.step(*inner, *path, *pole)?;
        }
        FourStep::Assault { pole, anchor, assign } => {
            for i in ctx.ids().filter(|&i| ctx.active[i] && i != *anchor) {
                let path = match ctx.inner(i) {
                    Some((p, _)) => p,
                    None => match assign.iter().find(|&&(j, _)| j == i) {
                        Some(&(_, p)) => p,
                        None => continue,
                    },
                };
                let toward = if ctx.src(i) { pole.other() } else { *pole };
                moves[i] = ctx.step(i, path, toward)?;
            }
            // a source facing an ignorant agent waits for it instead of
            // swapping places
            let at = ctx.config.positions();
            for i in ctx.ids() {
                if !ctx.src(i) || moves[i] == at[i] {
                    continue;
                }
                let swap = ctx
                    .ids()
                    .any(|j| !ctx.src(j) && at[j] == moves[i] && moves[j] == at[i]);
                if swap {
                    moves[i] = at[i];
                }
            }
        }
    }
    Ok(Step::Moves(Phase::Four(Some(step)), moves))
}

fn five(ctx: &Ctx<'_, '_>, sweep: Option<Sweep>) -> Result<Step, PolicyError> {
    let Some(w) = sweep else {
        let north = *ctx.sources_at(Pole::North).first().ok_or_else(|| broken(5, "north pole empty"))?;
        let south = *ctx.sources_at(Pole::South).first().ok_or_else(|| broken(5, "south pole empty"))?;
        let path = ctx
            .active_ignorant()
            .filter_map(|i| ctx.inner(i).map(|(p, _)| p))
            .min()
            .ok_or_else(|| broken(5, "no ignorant agent inside a path"))?;
        return Ok(Step::Next(Phase::Five(Some(Sweep { north, south, path }))));
    };
    let mut moves = ctx.config.positions();
    moves[w.north] = ctx.step(w.north, w.path, Pole::South)?;
    moves[w.south] = ctx.step(w.south, w.path, Pole::North)?;
    Ok(Step::Moves(Phase::Five(Some(w)), moves))
}

impl ThetaBroadcast {
    fn change(&mut self, memory: &mut Memory, to: Phase, sources: usize) {
        let (from, n) = (memory.phase.number(), to.number());
        if from != n {
            self.log.push(PhaseChange { round: self.round, from, to: n, sources });
        }
        memory.phase = to;
    }
}

impl AgentPolicy for ThetaBroadcast {
    fn name(&self) -> String {
        "theta_broadcast".into()
    }

    fn decide(&mut self, view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
        let t = view
            .graph()
            .theta_layout()
            .ok_or_else(|| PolicyError::Inapplicable("theta broadcast needs a theta graph".into()))?;
        let l = t.path_count();
        if self.k < l {
            return Err(PolicyError::Inapplicable(format!(
                "{} ignorant agents are fewer than the {l} paths",
                self.k
            )));
        }
        if config.len() < l + 1 {
            return Err(PolicyError::Precondition(format!(
                "{} agents cannot cover {l} paths",
                config.len()
            )));
        }
        self.round += 1;
        let ctx = Ctx::new(&t, view, config);
        let now: Vec<usize> = config.source_ids().collect();
        let mut memory = self.memory.take().unwrap_or(Memory {
            phase: Phase::Pre(None),
            sources: now.clone(),
        });
        let fresh = now.iter().copied().find(|i| !memory.sources.contains(i));
        if let Some(c) = fresh {
            if !matches!(memory.phase, Phase::One(..)) {
                let at = config.position(c);
                let partner = now
                    .iter()
                    .copied()
                    .find(|&j| j != c && config.position(j) == at)
                    .ok_or_else(|| broken(memory.phase.number(), "converted agent has no source beside it"))?;
                self.change(&mut memory, Phase::One(partner.min(c), partner.max(c)), now.len());
            }
        }
        memory.sources = now;
        for _ in 0..32 {
            let step = match memory.phase.clone() {
                Phase::Pre(s) => pre(&ctx, s),
                Phase::One(x, y) => one(&ctx, x, y),
                Phase::Two(c) => two(&ctx, c),
                Phase::Three(p) => three(&ctx, p),
                Phase::Four(s) => four(&ctx, s),
                Phase::Five(w) => five(&ctx, w),
            }?;
            match step {
                Step::Next(p) => {
                    let n = memory.sources.len();
                    self.change(&mut memory, p, n);
                }
                Step::Moves(p, moves) => {
                    memory.phase = p;
                    self.memory = Some(memory);
                    return Ok(moves);
                }
            }
        }
        Err(broken(memory.phase.number(), "phase changes do not settle"))
    }

    fn memory(&self) -> String {
        format!("{:?}", self.memory)
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Outcome};
    use crate::graph::*;
    use crate::strategies::{Passive, RandomTree};

    #[test]
    fn single_path_is_solved() {
        let g = make_theta(&[3]).unwrap();
        let t = g.theta_layout().unwrap();
        let c = Configuration::new(&[t.north], &[t.paths[0][2]]);
        let r = simulate(&g, &c, &mut ThetaBroadcast::new(1), &mut Passive, 50).unwrap();
        assert!(matches!(r.outcome, Outcome::Solved { .. }));
    }

    #[test]
    fn random_trees_on_three_paths() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let c = Configuration::new(&[2], &[3, 6, 9]);
        for seed in 0..10 {
            let mut p = ThetaBroadcast::new(3);
            let r = simulate(&g, &c, &mut p, &mut RandomTree::new(seed), 500).unwrap();
            assert!(matches!(r.outcome, Outcome::Solved { .. }), "seed {seed}: {:?}", r.outcome);
            assert!(p.transitions().iter().all(|c| allowed_change(c.from, c.to)));
        }
    }

    #[test]
    fn too_few_agents_rejected() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let c = Configuration::new(&[2], &[3, 6, 9]);
        let mut p = ThetaBroadcast::new(2);
        assert!(p.decide(&Surviving::full(&g), &c).is_err());
    }
}
