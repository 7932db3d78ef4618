//! Space-preserving rewrites between game kinds.
//!
//! * [`ground`] and [`multiply`]: local CFG rewrites that keep the space.
//! * [`cfg_to_asm`]: simple CFG with an acyclic support graph to sandpile.
//! * [`mcfg_split_vertex`] / [`mcfg_simplify`]: make a mutating game simple.
//! * [`mcfg_to_cfg`]: simple mutating game to plain CFG.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::engine::{EngineError, FiringPolicy, FiringRecord, GameState, Simulator};
use crate::model::{validate, EdgeMultiset, Game, GameKind, MutationSchedule, VertexId, Violation};
use crate::space::{build_space, build_space_with, ConfigSpace, SpaceError, DEFAULT_STATE_BUDGET};

pub const DEFAULT_SPLIT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("expected a chip firing game, found a {0} game")]
    NotCfg(GameKind),
    #[error("expected a mutating game, found a {0} game")]
    NotMcfg(GameKind),
    #[error("game is not simple")]
    NotSimple,
    #[error("game does not converge")]
    NonConvergent,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("`{0}` is the sink")]
    SinkVertex(VertexId),
    #[error("game has no sink")]
    NoSink,
    #[error("game has several sinks: {}", join(.0))]
    MultipleSinks(Vec<VertexId>),
    #[error("support graph has a cycle: {}", join(.0))]
    CyclicSupport(Vec<VertexId>),
    #[error("vertex `{0}` fires at most once; nothing to split")]
    VertexFiredOnce(VertexId),
    #[error("vertex `{0}` never fires")]
    NeverFired(VertexId),
    #[error("factor must be at least 1")]
    InvalidFactor,
    #[error("still not simple after {0} splits")]
    IterationBudget(usize),
    #[error("vertex name `{0}` is already taken")]
    NameCollision(VertexId),
    #[error("game fails validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Engine(EngineError),
    #[error(transparent)]
    Space(SpaceError),
}

fn join(v: &[VertexId]) -> String {
    v.iter()
        .map(VertexId::as_str)
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl From<EngineError> for TransformError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Invalid(v) => TransformError::Invalid(v),
            EngineError::UnknownVertex(v) => TransformError::UnknownVertex(v),
            other => TransformError::Engine(other),
        }
    }
}

impl From<SpaceError> for TransformError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::Engine(e) => e.into(),
            SpaceError::NonConvergent => TransformError::NonConvergent,
            SpaceError::NotSimple => TransformError::NotSimple,
            other => TransformError::Space(other),
        }
    }
}

fn ensure_valid(game: &Game) -> Result<(), TransformError> {
    let v = validate(game);
    if v.is_empty() {
        Ok(())
    } else {
        Err(TransformError::Invalid(v))
    }
}

/// Plays `game` to its fixpoint, refusing divergent games.
fn execute(game: &Game) -> Result<(Simulator, FiringRecord), TransformError> {
    ensure_valid(game)?;
    let sim = Simulator::new(game)?;
    let budget = sim.default_step_budget();
    match sim.is_convergent(budget) {
        Ok(true) => {}
        Ok(false) => return Err(TransformError::NonConvergent),
        Err(e) => return Err(e.into()),
    }
    let record = sim.run_to_fixpoint(FiringPolicy::Smallest, budget)?;
    Ok((sim, record))
}

fn require_simple_cfg(cfg: &Game) -> Result<(), TransformError> {
    if cfg.kind != GameKind::Cfg {
        return Err(TransformError::NotCfg(cfg.kind));
    }
    let (_, record) = execute(cfg)?;
    if !record.is_simple() {
        return Err(TransformError::NotSimple);
    }
    Ok(())
}

fn require_non_sink(game: &Game, v: &str) -> Result<VertexId, TransformError> {
    if !game.graph.contains(v) {
        return Err(TransformError::UnknownVertex(v.into()));
    }
    if game.graph.is_sink(v) {
        return Err(TransformError::SinkVertex(v.into()));
    }
    Ok(v.into())
}

/// Grounding: `n` more chips on `v` and `n` more edges from `v` to the sink.
pub fn ground(cfg: &Game, v: &str, n: u64) -> Result<Game, TransformError> {
    require_non_sink(cfg, v)?;
    require_simple_cfg(cfg)?;
    ground_unchecked(cfg, v, n)
}

/// [`ground`] without the simplicity check. The space is only guaranteed to
/// be preserved for simple games.
pub fn ground_unchecked(cfg: &Game, v: &str, n: u64) -> Result<Game, TransformError> {
    let v = require_non_sink(cfg, v)?;
    let sink = cfg.sink().cloned().ok_or(TransformError::NoSink)?;
    let mut out = cfg.clone();
    if n > 0 {
        out.initial.add(&v, n);
        out.graph.add_edge(v, sink, n);
    }
    Ok(out)
}

/// Multiplying: scales the indegree and the initial chips of `v` by `n`.
///
/// `σ₀(v)` becomes `n·σ₀(v)`, `v` gains `(n−1)·d⁺(v)` sink edges, and every
/// predecessor `u` gains `(n−1)·d(u, v)` edges to `v` and as many chips.
pub fn multiply(cfg: &Game, v: &str, n: u64) -> Result<Game, TransformError> {
    require_non_sink(cfg, v)?;
    if n == 0 {
        return Err(TransformError::InvalidFactor);
    }
    require_simple_cfg(cfg)?;
    multiply_unchecked(cfg, v, n)
}

/// [`multiply`] without the simplicity check.
pub fn multiply_unchecked(cfg: &Game, v: &str, n: u64) -> Result<Game, TransformError> {
    let v = require_non_sink(cfg, v)?;
    if n == 0 {
        return Err(TransformError::InvalidFactor);
    }
    let sink = cfg.sink().cloned().ok_or(TransformError::NoSink)?;
    let mut out = cfg.clone();
    if n == 1 {
        return Ok(out);
    }
    let outdeg = cfg.graph.out_degree(v.as_str());
    out.initial.set(v.clone(), n * cfg.initial.get(v.as_str()));
    out.graph.add_edge(v.clone(), sink, (n - 1) * outdeg);
    for (u, m) in cfg.graph.predecessors(v.as_str()) {
        out.graph.add_edge(u.clone(), v.clone(), (n - 1) * m);
        out.initial.add(u, (n - 1) * m);
    }
    Ok(out)
}

/// `D[v] = max over the space of d⁺(v) − σ(v)` for every non-sink vertex.
pub fn deficit_table(cfg: &Game) -> Result<BTreeMap<VertexId, i64>, TransformError> {
    if cfg.kind != GameKind::Cfg {
        return Err(TransformError::NotCfg(cfg.kind));
    }
    ensure_valid(cfg)?;
    let space = build_space(cfg, DEFAULT_STATE_BUDGET)?;
    let mut out = BTreeMap::new();
    for (i, v) in space.vertices().iter().enumerate() {
        if cfg.graph.is_sink(v.as_str()) {
            continue;
        }
        let d = cfg.graph.out_degree(v.as_str()) as i64;
        let best = space
            .states()
            .iter()
            .map(|s| d - s.chips[i] as i64)
            .max()
            .unwrap();
        out.insert(v.clone(), best);
    }
    Ok(out)
}

/// A cycle of the support graph among non-sink vertices, if any.
pub fn support_cycle(game: &Game) -> Option<Vec<VertexId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let names = game.vertex_names();
    let index: HashMap<&VertexId, usize> = names.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let succ: Vec<Vec<usize>> = names
        .iter()
        .map(|v| {
            game.graph
                .successors(v.as_str())
                .map(|(w, _)| index[w])
                .collect()
        })
        .collect();
    let mut mark = vec![Mark::New; names.len()];
    for start in 0..names.len() {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Active;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*next) {
                *next += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let at = stack.iter().position(|&(u, _)| u == w).unwrap();
                        let mut cycle: Vec<VertexId> =
                            stack[at..].iter().map(|&(u, _)| names[u].clone()).collect();
                        cycle.push(names[w].clone());
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Intermediate games of [`cfg_to_asm`].
#[derive(Debug, Clone)]
pub struct AsmConversion {
    pub asm: Game,
    /// Vertices in processing order: sink first, then each vertex after all its successors.
    pub order: Vec<VertexId>,
    pub after_step1: Game,
    pub after_step2: Game,
    /// `(vertex, factor)` for every multiplication of the first step.
    pub multiplied: Vec<(VertexId, u64)>,
    /// `(vertex, factor)` for every grounding of the second step.
    pub grounded: Vec<(VertexId, u64)>,
}

/// Converts a simple CFG whose support graph is acyclic into an equivalent sandpile.
pub fn cfg_to_asm(cfg: &Game) -> Result<Game, TransformError> {
    Ok(cfg_to_asm_traced(cfg)?.asm)
}

/// Shot-sets of a simple space as index lists, with the chip counts they
/// induce under arbitrary parameters.
struct ShotFamily {
    names: Vec<VertexId>,
    shots: Vec<Vec<usize>>,
}

impl ShotFamily {
    fn of(space: &ConfigSpace) -> Self {
        let shots = space
            .states()
            .iter()
            .map(|s| {
                s.fired
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(v, _)| v)
                    .collect()
            })
            .collect();
        ShotFamily {
            names: space.vertices().to_vec(),
            shots,
        }
    }

    /// Chips on `v` after firing `shots` once each in `game`.
    fn chips(&self, game: &Game, shots: &[usize], v: usize) -> i128 {
        let name = self.names[v].as_str();
        let mut c = game.initial.get(name) as i128;
        for &u in shots {
            c += game.graph.multiplicity(self.names[u].as_str(), name) as i128;
            if u == v {
                c -= game.graph.out_degree(name) as i128;
            }
        }
        c
    }

    /// Smallest positive `d⁺(v) − σ(v)` over the family: how many chips `v`
    /// lacks, at least, whenever it is not fireable.
    fn margin(&self, game: &Game, v: usize) -> Option<i128> {
        let d = game.graph.out_degree(self.names[v].as_str()) as i128;
        self.shots
            .iter()
            .map(|s| d - self.chips(game, s, v))
            .filter(|&m| m > 0)
            .min()
    }
}

fn step_one_holds(game: &Game, v: &str, margin: Option<i128>) -> bool {
    margin.is_none_or(|m| m > game.graph.non_sink_degree(v) as i128)
}

fn step_two_holds(game: &Game, v: &str) -> bool {
    let g = &game.graph;
    game.initial.get(v) + g.in_degree(v) + g.non_sink_degree(v) < 2 * g.out_degree(v)
}

/// Vertices `v` with some configuration in which `v` is not fireable and
/// `d⁺(v) − σ(v) ≤ d(v)`, checked on a freshly built space.
pub fn step_one_violations(game: &Game) -> Result<Vec<VertexId>, TransformError> {
    let space = build_space(game, DEFAULT_STATE_BUDGET)?;
    let mut out = Vec::new();
    for (i, v) in space.vertices().iter().enumerate() {
        if game.graph.is_sink(v.as_str()) {
            continue;
        }
        let d = game.graph.out_degree(v.as_str()) as i128;
        let bound = game.graph.non_sink_degree(v.as_str()) as i128;
        let bad = (0..space.len()).any(|s| {
            let deficit = d - space.state(s).chips[i] as i128;
            deficit > 0 && deficit <= bound
        });
        if bad {
            out.push(v.clone());
        }
    }
    Ok(out)
}

/// Non-sink vertices with `σ₀(v) + d⁻(v) + d(v) ≥ 2·d⁺(v)`.
pub fn step_two_violations(game: &Game) -> Vec<VertexId> {
    game.graph
        .vertices()
        .filter(|v| !game.graph.is_sink(v.as_str()) && !step_two_holds(game, v.as_str()))
        .cloned()
        .collect()
}

/// [`cfg_to_asm`] with every intermediate game.
///
/// The first step multiplies each vertex, in processing order, until it lacks
/// more than `d(v)` chips in every configuration where it is not fireable; the
/// shortfall is recomputed exactly from the (unchanging) shot-set family. The
/// second step grounds vertices with `σ₀(v) + d⁻(v) + d(v) ≥ 2d⁺(v)`. The
/// third adds a reverse edge `(v, u)` and one chip on `v` for every edge
/// `(u, v)` not ending in the sink.
pub fn cfg_to_asm_traced(cfg: &Game) -> Result<AsmConversion, TransformError> {
    if cfg.kind != GameKind::Cfg {
        return Err(TransformError::NotCfg(cfg.kind));
    }
    ensure_valid(cfg)?;
    let sinks: Vec<VertexId> = cfg.graph.sinks().into_iter().collect();
    let sink = match &sinks[..] {
        [] => return Err(TransformError::NoSink),
        [s] => s.clone(),
        _ => return Err(TransformError::MultipleSinks(sinks)),
    };
    if let Some(cycle) = support_cycle(cfg) {
        return Err(TransformError::CyclicSupport(cycle));
    }
    let mut game = cfg.clone();
    game.graph.set_sink(Some(sink.clone()));

    let space = build_space(&game, DEFAULT_STATE_BUDGET)?;
    if !space.is_simple() {
        return Err(TransformError::NotSimple);
    }
    let top = space.state(space.top());
    for (i, v) in space.vertices().iter().enumerate() {
        if *v != sink && top.fired[i] == 0 {
            return Err(TransformError::NeverFired(v.clone()));
        }
    }
    let family = ShotFamily::of(&space);
    let order = processing_order(&game, &sink);

    let mut multiplied = Vec::new();
    for v in order.iter().filter(|v| **v != sink) {
        let i = family.names.binary_search(v).unwrap();
        let margin = family.margin(&game, i);
        if step_one_holds(&game, v.as_str(), margin) {
            continue;
        }
        let m = margin.unwrap() as u64;
        let d = game.graph.non_sink_degree(v.as_str());
        let factor = (d + 1).div_ceil(m);
        game = multiply_unchecked(&game, v.as_str(), factor)?;
        multiplied.push((v.clone(), factor));
    }
    for (i, v) in family.names.iter().enumerate() {
        if *v != sink && !step_one_holds(&game, v.as_str(), family.margin(&game, i)) {
            return Err(TransformError::InternalInconsistency(format!(
                "`{v}` can lack at most d(v) chips after the first step"
            )));
        }
    }
    let after_step1 = game.clone();

    let mut grounded = Vec::new();
    for v in family.names.iter().filter(|v| **v != sink) {
        if step_two_holds(&game, v.as_str()) {
            continue;
        }
        let g = &game.graph;
        let (dout, din, d) = (
            g.out_degree(v.as_str()),
            g.in_degree(v.as_str()),
            g.non_sink_degree(v.as_str()),
        );
        let sigma = game.initial.get(v.as_str());
        let denominator = (2 * dout)
            .checked_sub(sigma)
            .filter(|&x| x > 0)
            .ok_or_else(|| {
                TransformError::InternalInconsistency(format!(
                    "grounding factor of `{v}` is undefined"
                ))
            })?;
        let factor = (d + din + 1).div_ceil(denominator);
        game = ground_unchecked(&game, v.as_str(), factor)?;
        grounded.push((v.clone(), factor));
    }
    if let Some(v) = step_two_violations(&game).first() {
        return Err(TransformError::InternalInconsistency(format!(
            "`{v}` may fire twice after the second step"
        )));
    }
    let after_step2 = game.clone();

    let edges: Vec<(VertexId, VertexId, u64)> = game
        .graph
        .edges()
        .filter(|(_, v, _)| **v != sink)
        .map(|(u, v, m)| (u.clone(), v.clone(), m))
        .collect();
    for (u, v, m) in edges {
        game.initial.add(&v, m);
        game.graph.add_edge(v, u, m);
    }
    game.kind = GameKind::Asm;

    if cfg!(debug_assertions) {
        if let Some(v) = step_one_violations(&after_step1)?.first() {
            return Err(TransformError::InternalInconsistency(format!(
                "first step bound fails for `{v}` on the rebuilt space"
            )));
        }
        ensure_valid(&game)?;
    }
    Ok(AsmConversion {
        asm: game,
        order,
        after_step1,
        after_step2,
        multiplied,
        grounded,
    })
}

/// Sink first, then repeatedly the smallest vertex whose successors are all listed.
fn processing_order(game: &Game, sink: &VertexId) -> Vec<VertexId> {
    let mut order = vec![sink.clone()];
    let mut marked: BTreeSet<VertexId> = BTreeSet::from([sink.clone()]);
    let all: Vec<VertexId> = game.vertex_names();
    while marked.len() < all.len() {
        let next = all
            .iter()
            .find(|v| {
                !marked.contains(*v)
                    && game
                        .graph
                        .successors(v.as_str())
                        .all(|(w, _)| marked.contains(w))
            })
            .expect("acyclic support graph")
            .clone();
        marked.insert(next.clone());
        order.push(next);
    }
    order
}

/// Result of splitting one vertex `a` of a mutating game into `a0` and `a1`.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub game: Game,
    pub split: VertexId,
    pub a0: VertexId,
    pub a1: VertexId,
    /// The coupling constant: `a0` starts with `σ(a) + n` chips.
    pub n: u64,
}

fn double(ms: &EdgeMultiset, a: &VertexId, a0: &VertexId, a1: &VertexId) -> EdgeMultiset {
    let mut out = EdgeMultiset::new();
    for (w, &m) in ms {
        if w == a {
            *out.entry(a0.clone()).or_insert(0) += m;
            *out.entry(a1.clone()).or_insert(0) += m;
        } else {
            *out.entry(w.clone()).or_insert(0) += 2 * m;
        }
    }
    out
}

/// Entry `j` of `a`'s sequence rewritten for `own` (`a0` or `a1`): other
/// targets doubled, loops kept on `own`, plus `n − d↑_j(a)` edges to `other`.
/// An empty entry stays empty, so the copy is stuck exactly when `a` is.
fn split_entry(
    ms: &EdgeMultiset,
    a: &VertexId,
    own: &VertexId,
    other: &VertexId,
    n: u64,
) -> EdgeMultiset {
    let mut out = EdgeMultiset::new();
    if ms.is_empty() {
        return out;
    }
    let mut up = 0;
    for (w, &m) in ms {
        if w == a {
            *out.entry(own.clone()).or_insert(0) += m;
        } else {
            *out.entry(w.clone()).or_insert(0) += 2 * m;
            up += m;
        }
    }
    if n > up {
        *out.entry(other.clone()).or_insert(0) += n - up;
    }
    out
}

fn trim_tail(mut entries: Vec<EdgeMultiset>) -> Vec<EdgeMultiset> {
    while entries.len() >= 2 && entries[entries.len() - 1] == entries[entries.len() - 2] {
        entries.pop();
    }
    entries
}

/// Splits `a`, which must fire at least twice, into `a#0` and `a#1` firing alternately.
pub fn mcfg_split_vertex(mcfg: &Game, a: &str) -> Result<SplitOutcome, TransformError> {
    if mcfg.kind != GameKind::Mcfg {
        return Err(TransformError::NotMcfg(mcfg.kind));
    }
    if !mcfg.graph.contains(a) {
        return Err(TransformError::UnknownVertex(a.into()));
    }
    let (_, record) = execute(mcfg)?;
    let a = VertexId::from(a);
    if record.fire_counts[&a] < 2 {
        return Err(TransformError::VertexFiredOnce(a));
    }
    let a0 = VertexId::from(format!("{a}#0"));
    let a1 = VertexId::from(format!("{a}#1"));
    for name in [&a0, &a1] {
        if mcfg.graph.contains(name.as_str()) {
            return Err(TransformError::NameCollision(name.clone()));
        }
    }
    let g = &mcfg.graph;
    let m = &mcfg.mutations;
    let last = m.last_index(a.as_str());
    let widest = (0..=last)
        .map(|j| m.non_loop_out_degree(g, a.as_str(), j))
        .max()
        .unwrap_or(0);
    let n = (2 * mcfg.total_chips()).max(widest);

    let mut entries: BTreeMap<VertexId, Vec<EdgeMultiset>> = BTreeMap::new();
    for v in g.vertices().filter(|v| **v != a) {
        let list = (0..=m.last_index(v.as_str()))
            .map(|i| double(&m.entry(g, v.as_str(), i), &a, &a0, &a1))
            .collect();
        entries.insert(v.clone(), list);
    }
    let half = last / 2 + 1;
    let a0_list = (0..=half)
        .map(|i| split_entry(&m.entry(g, a.as_str(), 2 * i), &a, &a0, &a1, n))
        .collect();
    let a1_list = (0..=half)
        .map(|i| split_entry(&m.entry(g, a.as_str(), 2 * i + 1), &a, &a1, &a0, n))
        .collect();
    entries.insert(a0.clone(), a0_list);
    entries.insert(a1.clone(), a1_list);

    let mut game = Game::new(GameKind::Mcfg, Default::default(), Default::default());
    for v in entries.keys() {
        let chips = if *v == a0 {
            mcfg.initial.get(a.as_str()) + n
        } else if *v == a1 {
            mcfg.initial.get(a.as_str())
        } else {
            2 * mcfg.initial.get(v.as_str())
        };
        game.add_vertex(v.clone(), chips);
    }
    game.graph.set_sink(g.sink().cloned());
    let mut schedule = MutationSchedule::new();
    for (v, list) in entries {
        let mut list = trim_tail(list);
        game.graph.set_out_edges(&v, &list[0]);
        list.remove(0);
        schedule.set(v, list);
    }
    game.mutations = schedule;
    Ok(SplitOutcome {
        game,
        split: a,
        a0,
        a1,
        n,
    })
}

/// Plays `original` and `outcome.game` side by side over every reachable
/// position, firing `a0` and `a1` in turn for `a`, and checks that
/// `σ′(v) = 2σ(v)` for the other vertices, that `{σ′(a0), σ′(a1)}` is
/// `(σ(a) + N, σ(a))` after an even number of firings of `a` and
/// `(σ(a), σ(a) + N)` after an odd one, and that the fireable vertices
/// correspond.
pub fn verify_split_lockstep(original: &Game, outcome: &SplitOutcome) -> Result<usize, String> {
    let sim = Simulator::new(original).map_err(|e| e.to_string())?;
    let sim2 = Simulator::new(&outcome.game).map_err(|e| e.to_string())?;
    let idx = |s: &Simulator, v: &VertexId| {
        s.index_of(v.as_str())
            .ok_or_else(|| format!("missing vertex {v}"))
    };
    let a = idx(&sim, &outcome.split)?;
    let (a0, a1) = (idx(&sim2, &outcome.a0)?, idx(&sim2, &outcome.a1)?);
    let image: Vec<Option<usize>> = sim
        .vertices()
        .iter()
        .map(|v| {
            if *v == outcome.split {
                None
            } else {
                sim2.index_of(v.as_str())
            }
        })
        .collect();
    let counterpart = |state: &GameState, v: usize| -> usize {
        match image[v] {
            Some(w) => w,
            None if state.fired[a].is_multiple_of(2) => a0,
            None => a1,
        }
    };
    let n = outcome.n;
    let mut seen: HashMap<GameState, ()> = HashMap::new();
    let mut queue = VecDeque::from([(sim.initial_state(), sim2.initial_state())]);
    seen.insert(sim.initial_state(), ());
    while let Some((s, t)) = queue.pop_front() {
        for (v, w) in image.iter().enumerate() {
            if let Some(w) = *w {
                if t.chips[w] != 2 * s.chips[v] {
                    return Err(format!("chips of {} are not doubled", sim.vertices()[v]));
                }
            }
        }
        let expected = if s.fired[a] % 2 == 0 {
            (s.chips[a] + n, s.chips[a])
        } else {
            (s.chips[a], s.chips[a] + n)
        };
        if (t.chips[a0], t.chips[a1]) != expected {
            return Err(format!(
                "split pair holds ({}, {}), expected ({}, {})",
                t.chips[a0], t.chips[a1], expected.0, expected.1
            ));
        }
        let mut want: Vec<usize> = sim
            .fireable_vertices(&s)
            .into_iter()
            .map(|v| counterpart(&s, v))
            .collect();
        want.sort_unstable();
        if sim2.fireable_vertices(&t) != want {
            return Err("fireable vertices differ".into());
        }
        for v in sim.fireable_vertices(&s) {
            let s2 = sim.fire(&s, v).map_err(|e| e.to_string())?;
            if seen.contains_key(&s2) {
                continue;
            }
            let t2 = sim2
                .fire(&t, counterpart(&s, v))
                .map_err(|e| e.to_string())?;
            seen.insert(s2.clone(), ());
            queue.push_back((s2, t2));
        }
    }
    Ok(seen.len())
}

/// Splits vertices until the game is simple; returns every split performed.
pub fn mcfg_simplify_traced(
    mcfg: &Game,
    cap: usize,
) -> Result<(Game, Vec<SplitOutcome>), TransformError> {
    if mcfg.kind != GameKind::Mcfg {
        return Err(TransformError::NotMcfg(mcfg.kind));
    }
    let mut game = mcfg.clone();
    let mut splits = Vec::new();
    loop {
        let (_, record) = execute(&game)?;
        let Some((v, &count)) = record
            .fire_counts
            .iter()
            .max_by(|x, y| x.1.cmp(y.1).then_with(|| y.0.cmp(x.0)))
        else {
            return Ok((game, splits));
        };
        if count <= 1 {
            return Ok((game, splits));
        }
        if splits.len() >= cap {
            return Err(TransformError::IterationBudget(cap));
        }
        let outcome = mcfg_split_vertex(&game, v.as_str())?;
        game = outcome.game.clone();
        splits.push(outcome);
    }
}

/// An equivalent simple mutating game, splitting at most [`DEFAULT_SPLIT_CAP`] times.
pub fn mcfg_simplify(mcfg: &Game) -> Result<Game, TransformError> {
    Ok(mcfg_simplify_traced(mcfg, DEFAULT_SPLIT_CAP)?.0)
}

/// Turns a simple mutating game into a CFG on its initial support graph.
///
/// A vertex `w` that ends with at least its initial outdegree `d⁺(w)` of chips
/// gets `conffin(w) + 1 − d⁺(w)` extra sink edges and `conffin(w) + 1 − n(w)`
/// initial chips, so that it still lacks `n(w)` chips at the start but can no
/// longer fire at the end. All mutations are then dropped.
pub fn mcfg_to_cfg(mcfg: &Game) -> Result<Game, TransformError> {
    if mcfg.kind != GameKind::Mcfg {
        return Err(TransformError::NotMcfg(mcfg.kind));
    }
    let (sim, record) = execute(mcfg)?;
    if !record.is_simple() {
        return Err(TransformError::NotSimple);
    }
    let mut out = mcfg.clone();
    let mut sink = mcfg.sink().cloned();
    for w in mcfg.graph.vertices() {
        if mcfg.graph.is_sink(w.as_str()) {
            continue;
        }
        let d = mcfg.graph.out_degree(w.as_str());
        let fin = record.final_config.get(w.as_str());
        if d == 0 || fin < d {
            continue;
        }
        let s = match &sink {
            Some(s) => s.clone(),
            None => {
                let s = out.fresh_name("sink");
                out.add_vertex(s.clone(), 0);
                out.graph.set_sink(Some(s.clone()));
                sink = Some(s.clone());
                s
            }
        };
        let needed = sim.chips_needed(w.as_str())?;
        out.graph.add_edge(w.clone(), s, fin + 1 - d);
        out.initial.set(w.clone(), fin + 1 - needed);
    }
    out.mutations = MutationSchedule::new();
    out.kind = GameKind::Cfg;
    Ok(out)
}

/// Builds both spaces and looks for an order isomorphism between them.
pub fn equivalent(a: &Game, b: &Game) -> Result<Option<Vec<usize>>, TransformError> {
    let sa = build_space(a, DEFAULT_STATE_BUDGET)?;
    let sb = build_space(b, DEFAULT_STATE_BUDGET)?;
    Ok(sa.to_poset().isomorphic(&sb.to_poset()))
}

/// Like [`equivalent`] but without the convergence pre-check, for games
/// known to converge.
pub fn equivalent_with(a: &Simulator, b: &Simulator) -> Result<Option<Vec<usize>>, TransformError> {
    let sa = build_space_with(a, DEFAULT_STATE_BUDGET)?;
    let sb = build_space_with(b, DEFAULT_STATE_BUDGET)?;
    Ok(sa.to_poset().isomorphic(&sb.to_poset()))
}
