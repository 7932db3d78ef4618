//! Games, support graphs, configurations and mutation schedules.
//!
//! A [`Game`] is a plain value keyed by vertex names. It may be structurally
//! broken (edges to unknown vertices, asymmetric sandpile edges, ...); use
//! [`validate`] to list what is wrong with it. The simulation code in
//! [`crate::engine`] refuses games that do not validate.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, Simulator};

/// Name of a vertex. Unique within a game; ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(name: impl Into<String>) -> Self {
        VertexId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl Borrow<str> for VertexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A multiset of target vertices, i.e. the outgoing edges of one vertex.
pub type EdgeMultiset = BTreeMap<VertexId, u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    /// Chip firing game on a directed multigraph.
    Cfg,
    /// Abelian sandpile model: undirected multigraph with a sink that never fires.
    Asm,
    /// Chip firing game on a mutating graph.
    Mcfg,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Cfg => "cfg",
            GameKind::Asm => "asm",
            GameKind::Mcfg => "mcfg",
        })
    }
}

/// Directed multigraph with an optional designated sink.
///
/// Sandpile games are stored in directed normal form: every undirected edge
/// `{u, v}` between non-sink vertices is a pair of opposite directed edges
/// with equal multiplicity, and an edge `{v, sink}` is the single directed
/// edge `(v, sink)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<(VertexId, VertexId), u64>,
    sink: Option<VertexId>,
}

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: impl Into<VertexId>) -> bool {
        self.vertices.insert(v.into())
    }

    /// Adds `multiplicity` copies of the edge `(from, to)`.
    pub fn add_edge(
        &mut self,
        from: impl Into<VertexId>,
        to: impl Into<VertexId>,
        multiplicity: u64,
    ) {
        *self.edges.entry((from.into(), to.into())).or_insert(0) += multiplicity;
    }

    /// Removes every copy of `(from, to)`, returning the old multiplicity.
    pub fn remove_edge(&mut self, from: &str, to: &str) -> u64 {
        self.edges
            .remove(&(VertexId::from(from), VertexId::from(to)))
            .unwrap_or(0)
    }

    pub fn set_sink(&mut self, sink: Option<VertexId>) {
        self.sink = sink;
    }

    pub fn sink(&self) -> Option<&VertexId> {
        self.sink.as_ref()
    }

    pub fn is_sink(&self, v: &str) -> bool {
        self.sink.as_ref().is_some_and(|s| s.as_str() == v)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.vertices.contains(v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// All edges `(from, to, multiplicity)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&VertexId, &VertexId, u64)> + '_ {
        self.edges.iter().map(|((u, v), &m)| (u, v, m))
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().sum()
    }

    /// `d(u, v)`: number of edges from `u` to `v`.
    pub fn multiplicity(&self, from: &str, to: &str) -> u64 {
        self.edges
            .get(&(VertexId::from(from), VertexId::from(to)))
            .copied()
            .unwrap_or(0)
    }

    pub fn successors<'a>(&'a self, v: &'a str) -> impl Iterator<Item = (&'a VertexId, u64)> + 'a {
        self.edges
            .range((VertexId::from(v), VertexId::from(""))..)
            .take_while(move |((u, _), _)| u.as_str() == v)
            .map(|((_, w), &m)| (w, m))
    }

    pub fn predecessors<'a>(
        &'a self,
        v: &'a str,
    ) -> impl Iterator<Item = (&'a VertexId, u64)> + 'a {
        self.edges
            .iter()
            .filter(move |((_, w), _)| w.as_str() == v)
            .map(|((u, _), &m)| (u, m))
    }

    pub fn out_edges(&self, v: &str) -> EdgeMultiset {
        self.successors(v).map(|(w, m)| (w.clone(), m)).collect()
    }

    /// `d⁺(v)`.
    pub fn out_degree(&self, v: &str) -> u64 {
        self.successors(v).map(|(_, m)| m).sum()
    }

    /// `d⁻(v)`.
    pub fn in_degree(&self, v: &str) -> u64 {
        self.predecessors(v).map(|(_, m)| m).sum()
    }

    /// `d⊥(v)`: edges from `v` to the designated sink.
    pub fn sink_degree(&self, v: &str) -> u64 {
        match &self.sink {
            Some(s) => self.multiplicity(v, s.as_str()),
            None => 0,
        }
    }

    /// `d(v) = d⁺(v) − d⊥(v)`.
    pub fn non_sink_degree(&self, v: &str) -> u64 {
        self.out_degree(v) - self.sink_degree(v)
    }

    pub fn loops(&self, v: &str) -> u64 {
        self.multiplicity(v, v)
    }

    /// Vertices with no outgoing edge, plus the designated sink.
    pub fn sinks(&self) -> BTreeSet<VertexId> {
        let mut out: BTreeSet<VertexId> = self
            .vertices
            .iter()
            .filter(|v| self.out_degree(v.as_str()) == 0)
            .cloned()
            .collect();
        if let Some(s) = &self.sink {
            out.insert(s.clone());
        }
        out
    }

    /// Replaces the outgoing edges of `v`.
    pub fn set_out_edges(&mut self, v: &VertexId, targets: &EdgeMultiset) {
        let old: Vec<VertexId> = self
            .successors(v.as_str())
            .map(|(w, _)| w.clone())
            .collect();
        for w in old {
            self.edges.remove(&(v.clone(), w));
        }
        for (w, &m) in targets {
            if m > 0 {
                self.add_edge(v.clone(), w.clone(), m);
            }
        }
    }
}

/// Chip count per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(BTreeMap<VertexId, u64>);

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    /// Chips on `v`; vertices without an entry hold none.
    pub fn get(&self, v: &str) -> u64 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn set(&mut self, v: impl Into<VertexId>, chips: u64) {
        self.0.insert(v.into(), chips);
    }

    pub fn add(&mut self, v: &VertexId, chips: u64) {
        *self.0.entry(v.clone()).or_insert(0) += chips;
    }

    pub fn remove(&mut self, v: &str) -> Option<u64> {
        self.0.remove(v)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, u64)> + '_ {
        self.0.iter().map(|(v, &c)| (v, c))
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }
}

impl FromIterator<(VertexId, u64)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (VertexId, u64)>>(iter: I) -> Self {
        Configuration(iter.into_iter().collect())
    }
}

/// Mutation sequences of a mutating chip firing game.
///
/// For each vertex the schedule stores `s⁽¹⁾, s⁽²⁾, …, s⁽ᵏ⁾`; entry `s⁽⁰⁾` is
/// always the vertex's outgoing edges in the support graph. Past the last
/// stored entry the sequence repeats that entry forever, so a vertex without
/// stored entries keeps its initial edges, exactly like a plain CFG vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MutationSchedule(BTreeMap<VertexId, Vec<EdgeMultiset>>);

impl MutationSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(Vec::is_empty)
    }

    /// Sets `s⁽¹⁾, s⁽²⁾, …` for `v`.
    pub fn set(&mut self, v: impl Into<VertexId>, entries: Vec<EdgeMultiset>) {
        let v = v.into();
        if entries.is_empty() {
            self.0.remove(&v);
        } else {
            self.0.insert(v, entries);
        }
    }

    /// The stored entries `s⁽¹⁾, …` of `v` (empty when stationary).
    pub fn stored(&self, v: &str) -> &[EdgeMultiset] {
        self.0.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &[EdgeMultiset])> + '_ {
        self.0.iter().map(|(v, e)| (v, e.as_slice()))
    }

    /// Index of the last distinct entry of `v`; `entry(v, i)` is constant for `i >= last_index(v)`.
    pub fn last_index(&self, v: &str) -> usize {
        self.stored(v).len()
    }

    /// `s_v⁽ⁱ⁾`, the outgoing edges of `v` after it has fired `i` times.
    pub fn entry(&self, graph: &MultiGraph, v: &str, i: usize) -> EdgeMultiset {
        let stored = self.stored(v);
        if i == 0 || stored.is_empty() {
            graph.out_edges(v)
        } else {
            stored[i.min(stored.len()) - 1].clone()
        }
    }

    /// `l_i(v)`: loops on `v` in `s_v⁽ⁱ⁾`.
    pub fn loops(&self, graph: &MultiGraph, v: &str, i: usize) -> u64 {
        self.entry(graph, v, i).get(v).copied().unwrap_or(0)
    }

    /// `d⁺_i(v)`.
    pub fn out_degree(&self, graph: &MultiGraph, v: &str, i: usize) -> u64 {
        self.entry(graph, v, i).values().sum()
    }

    /// `d↑_i(v) = d⁺_i(v) − l_i(v)`.
    pub fn non_loop_out_degree(&self, graph: &MultiGraph, v: &str, i: usize) -> u64 {
        self.out_degree(graph, v, i) - self.loops(graph, v, i)
    }

    /// `d↓_i(v) = d⁻_i(v) − l_i(v)`, where `d⁻_i` is the indegree of `v` when
    /// every vertex uses entry `i` of its own sequence.
    pub fn non_loop_in_degree(&self, graph: &MultiGraph, v: &str, i: usize) -> u64 {
        let indeg: u64 = graph
            .vertices()
            .map(|u| {
                self.entry(graph, u.as_str(), i)
                    .get(v)
                    .copied()
                    .unwrap_or(0)
            })
            .sum();
        indeg - self.loops(graph, v, i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub kind: GameKind,
    pub graph: MultiGraph,
    pub initial: Configuration,
    pub mutations: MutationSchedule,
}

impl Game {
    pub fn new(kind: GameKind, graph: MultiGraph, initial: Configuration) -> Self {
        Game {
            kind,
            graph,
            initial,
            mutations: MutationSchedule::new(),
        }
    }

    pub fn vertex_names(&self) -> Vec<VertexId> {
        self.graph.vertices().cloned().collect()
    }

    pub fn sink(&self) -> Option<&VertexId> {
        self.graph.sink()
    }

    pub fn total_chips(&self) -> u64 {
        self.initial.total()
    }

    /// The same game regarded as a mutating game with stationary sequences.
    pub fn as_mcfg(&self) -> Game {
        Game {
            kind: GameKind::Mcfg,
            ..self.clone()
        }
    }

    /// Adds a vertex with `chips` chips. Returns false when it already exists.
    pub fn add_vertex(&mut self, v: impl Into<VertexId>, chips: u64) -> bool {
        let v = v.into();
        if !self.graph.add_vertex(v.clone()) {
            return false;
        }
        self.initial.set(v, chips);
        true
    }

    /// A vertex name derived from `base` that is not used in this game.
    pub fn fresh_name(&self, base: &str) -> VertexId {
        if !self.graph.contains(base) {
            return VertexId::from(base);
        }
        (1..)
            .map(|i| format!("{base}#{i}"))
            .find(|n| !self.graph.contains(n))
            .map(VertexId::from)
            .unwrap()
    }
}

/// Convenience builder used by fixtures and tests.
///
/// Edges of a sandpile builder are undirected and converted to directed
/// normal form by [`GameBuilder::build`].
#[derive(Debug, Clone)]
pub struct GameBuilder {
    kind: GameKind,
    vertices: Vec<(VertexId, u64)>,
    edges: Vec<(VertexId, VertexId, u64)>,
    sink: Option<VertexId>,
    mutations: Vec<(VertexId, Vec<Vec<VertexId>>)>,
}

impl GameBuilder {
    pub fn new(kind: GameKind) -> Self {
        GameBuilder {
            kind,
            vertices: Vec::new(),
            edges: Vec::new(),
            sink: None,
            mutations: Vec::new(),
        }
    }

    pub fn vertex(mut self, name: &str, chips: u64) -> Self {
        self.vertices.push((name.into(), chips));
        self
    }

    pub fn edge(mut self, from: &str, to: &str, multiplicity: u64) -> Self {
        self.edges.push((from.into(), to.into(), multiplicity));
        self
    }

    pub fn sink(mut self, name: &str) -> Self {
        self.sink = Some(name.into());
        self
    }

    /// Mutation entries `s⁽¹⁾, s⁽²⁾, …` for `name`, each given as a list of targets.
    pub fn mutations(mut self, name: &str, entries: &[&[&str]]) -> Self {
        let entries = entries
            .iter()
            .map(|e| e.iter().map(|&w| VertexId::from(w)).collect())
            .collect();
        self.mutations.push((name.into(), entries));
        self
    }

    pub fn build(self) -> Game {
        let mut graph = MultiGraph::new();
        let mut initial = Configuration::new();
        for (v, c) in self.vertices {
            graph.add_vertex(v.clone());
            initial.set(v, c);
        }
        graph.set_sink(self.sink.clone());
        for (u, v, m) in self.edges {
            add_input_edge(&mut graph, self.kind, u, v, m);
        }
        let mut mutations = MutationSchedule::new();
        for (v, entries) in self.mutations {
            mutations.set(v, entries.into_iter().map(multiset_of).collect());
        }
        Game {
            kind: self.kind,
            graph,
            initial,
            mutations,
        }
    }
}

fn multiset_of(targets: Vec<VertexId>) -> EdgeMultiset {
    let mut out = EdgeMultiset::new();
    for t in targets {
        *out.entry(t).or_insert(0) += 1;
    }
    out
}

/// Adds an edge as written in an input file. Sandpile edges are undirected.
fn add_input_edge(graph: &mut MultiGraph, kind: GameKind, u: VertexId, v: VertexId, m: u64) {
    if kind != GameKind::Asm {
        graph.add_edge(u, v, m);
        return;
    }
    if graph.is_sink(u.as_str()) && !graph.is_sink(v.as_str()) {
        graph.add_edge(v, u, m);
    } else if graph.is_sink(v.as_str()) || u == v {
        graph.add_edge(u, v, m);
    } else {
        graph.add_edge(u.clone(), v.clone(), m);
        graph.add_edge(v, u, m);
    }
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    EmptyName,
    UnknownEndpoint { vertex: VertexId },
    UnknownSink { vertex: VertexId },
    ZeroMultiplicity { from: VertexId, to: VertexId },
    MissingChips { vertex: VertexId },
    ChipsForUnknownVertex { vertex: VertexId },
    SinkHasOutEdges { vertex: VertexId },
    AsmWithoutSink,
    AsymmetricAsmEdge { from: VertexId, to: VertexId },
    AsmLoop { vertex: VertexId },
    MutationsOnStaticGame { vertex: VertexId },
    MutationForUnknownVertex { vertex: VertexId },
    MutationUnknownTarget { vertex: VertexId, target: VertexId },
    SinkMutates { vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyName => write!(f, "vertex with an empty name"),
            Violation::UnknownEndpoint { vertex } => {
                write!(f, "edge endpoint `{vertex}` is not a vertex")
            }
            Violation::UnknownSink { vertex } => write!(f, "sink `{vertex}` is not a vertex"),
            Violation::ZeroMultiplicity { from, to } => {
                write!(f, "edge ({from}, {to}) has multiplicity 0")
            }
            Violation::MissingChips { vertex } => write!(f, "vertex `{vertex}` has no chip count"),
            Violation::ChipsForUnknownVertex { vertex } => {
                write!(f, "chip count given for unknown vertex `{vertex}`")
            }
            Violation::SinkHasOutEdges { vertex } => {
                write!(f, "sink `{vertex}` has outgoing edges")
            }
            Violation::AsmWithoutSink => write!(f, "sandpile game without a sink"),
            Violation::AsymmetricAsmEdge { from, to } => {
                write!(
                    f,
                    "sandpile edge ({from}, {to}) has no matching reverse edge"
                )
            }
            Violation::AsmLoop { vertex } => write!(f, "sandpile game has a loop on `{vertex}`"),
            Violation::MutationsOnStaticGame { vertex } => {
                write!(
                    f,
                    "mutation sequence for `{vertex}` in a game that does not mutate"
                )
            }
            Violation::MutationForUnknownVertex { vertex } => {
                write!(f, "mutation sequence for unknown vertex `{vertex}`")
            }
            Violation::MutationUnknownTarget { vertex, target } => {
                write!(
                    f,
                    "mutation sequence of `{vertex}` targets unknown vertex `{target}`"
                )
            }
            Violation::SinkMutates { vertex } => {
                write!(f, "sink `{vertex}` gains outgoing edges by mutation")
            }
        }
    }
}

/// Lists every structural violation of `game`. Empty means the game is well formed.
pub fn validate(game: &Game) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = &game.graph;
    if g.vertices().any(|v| v.as_str().is_empty()) {
        out.push(Violation::EmptyName);
    }
    for v in g.vertices() {
        if !game.initial.contains(v.as_str()) {
            out.push(Violation::MissingChips { vertex: v.clone() });
        }
    }
    for (v, _) in game.initial.iter() {
        if !g.contains(v.as_str()) {
            out.push(Violation::ChipsForUnknownVertex { vertex: v.clone() });
        }
    }
    let mut unknown = BTreeSet::new();
    for (u, v, m) in g.edges() {
        for end in [u, v] {
            if !g.contains(end.as_str()) {
                unknown.insert(end.clone());
            }
        }
        if m == 0 {
            out.push(Violation::ZeroMultiplicity {
                from: u.clone(),
                to: v.clone(),
            });
        }
    }
    out.extend(
        unknown
            .into_iter()
            .map(|vertex| Violation::UnknownEndpoint { vertex }),
    );
    if let Some(s) = g.sink() {
        if !g.contains(s.as_str()) {
            out.push(Violation::UnknownSink { vertex: s.clone() });
        }
        if g.out_degree(s.as_str()) > 0 {
            out.push(Violation::SinkHasOutEdges { vertex: s.clone() });
        }
        if game
            .mutations
            .stored(s.as_str())
            .iter()
            .any(|e| e.values().any(|&m| m > 0))
        {
            out.push(Violation::SinkMutates { vertex: s.clone() });
        }
    }
    if game.kind == GameKind::Asm {
        if g.sink().is_none() {
            out.push(Violation::AsmWithoutSink);
        }
        for (u, v, m) in g.edges() {
            if u == v {
                out.push(Violation::AsmLoop { vertex: u.clone() });
            } else if !g.is_sink(v.as_str()) && !g.is_sink(u.as_str()) && {
                let back = g.multiplicity(v.as_str(), u.as_str());
                back != m && (u < v || back == 0)
            } {
                out.push(Violation::AsymmetricAsmEdge {
                    from: u.clone(),
                    to: v.clone(),
                });
            }
        }
    }
    for (v, entries) in game.mutations.iter() {
        if entries.is_empty() {
            continue;
        }
        if game.kind != GameKind::Mcfg {
            out.push(Violation::MutationsOnStaticGame { vertex: v.clone() });
        }
        if !g.contains(v.as_str()) {
            out.push(Violation::MutationForUnknownVertex { vertex: v.clone() });
        }
        let targets: BTreeSet<&VertexId> = entries.iter().flat_map(|e| e.keys()).collect();
        for t in targets {
            if !g.contains(t.as_str()) {
                out.push(Violation::MutationUnknownTarget {
                    vertex: v.clone(),
                    target: t.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed game file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("vertex `{0}` is declared twice")]
    DuplicateVertex(VertexId),
    #[error("expected a sandpile game, found a {0} game")]
    NotAnAsm(GameKind),
    #[error("expected a chip firing game, found a {0} game")]
    NotACfg(GameKind),
    #[error("game fails validation: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("game does not converge")]
    NonConvergent,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn ensure_valid(game: &Game) -> Result<(), ModelError> {
    let violations = validate(game);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Invalid(violations))
    }
}

/// Reinterprets a sandpile game as a chip firing game on its directed normal form.
pub fn asm_to_cfg(asm: &Game) -> Result<Game, ModelError> {
    if asm.kind != GameKind::Asm {
        return Err(ModelError::NotAnAsm(asm.kind));
    }
    ensure_valid(asm)?;
    Ok(Game {
        kind: GameKind::Cfg,
        ..asm.clone()
    })
}

/// Rewrites a convergent CFG so that it has exactly one sink and, when it is
/// simple, no loops and no non-sink vertex that never fires.
///
/// * a non-sink vertex that never fires loses its outgoing edges;
/// * several sinks are merged into one (named after the designated sink, or
///   the smallest sink name);
/// * without any sink an isolated sink vertex is added;
/// * in a simple game a loop `(v, v)` becomes an edge `(v, sink)`.
///
/// Loops of a non-simple game are kept: removing them would change how often
/// the vertex fires.
pub fn normalize_cfg(cfg: &Game) -> Result<Game, ModelError> {
    if cfg.kind != GameKind::Cfg {
        return Err(ModelError::NotACfg(cfg.kind));
    }
    ensure_valid(cfg)?;
    let sim = Simulator::new(cfg)?;
    let budget = sim.default_step_budget();
    if !sim.is_convergent(budget)? {
        return Err(ModelError::NonConvergent);
    }
    let record = sim.run_to_fixpoint(crate::engine::FiringPolicy::Smallest, budget)?;
    let simple = record.fire_counts.values().all(|&c| c <= 1);

    let mut out = cfg.clone();
    for v in cfg.graph.vertices() {
        if record.fire_counts.get(v).copied().unwrap_or(0) == 0 && !cfg.graph.is_sink(v.as_str()) {
            out.graph.set_out_edges(v, &EdgeMultiset::new());
        }
    }

    let sinks = out.graph.sinks();
    let sink = match sinks.len() {
        0 => {
            let s = out.fresh_name("sink");
            out.add_vertex(s.clone(), 0);
            s
        }
        1 => sinks.into_iter().next().unwrap(),
        _ => {
            let keep = cfg
                .graph
                .sink()
                .cloned()
                .unwrap_or_else(|| sinks.iter().next().unwrap().clone());
            merge_sinks(&mut out, &sinks, &keep);
            keep
        }
    };
    out.graph.set_sink(Some(sink.clone()));

    if simple {
        let looped: Vec<(VertexId, u64)> = out
            .graph
            .vertices()
            .map(|v| (v.clone(), out.graph.loops(v.as_str())))
            .filter(|(_, l)| *l > 0)
            .collect();
        for (v, l) in looped {
            out.graph.remove_edge(v.as_str(), v.as_str());
            out.graph.add_edge(v, sink.clone(), l);
        }
    }
    Ok(out)
}

fn merge_sinks(game: &mut Game, sinks: &BTreeSet<VertexId>, keep: &VertexId) {
    let mut graph = MultiGraph::new();
    let mut initial = Configuration::new();
    let rename = |v: &VertexId| {
        if sinks.contains(v) {
            keep.clone()
        } else {
            v.clone()
        }
    };
    for v in game.graph.vertices() {
        let r = rename(v);
        graph.add_vertex(r.clone());
        initial.add(&r, game.initial.get(v.as_str()));
    }
    for (u, v, m) in game.graph.edges() {
        graph.add_edge(rename(u), rename(v), m);
    }
    graph.set_sink(Some(keep.clone()));
    game.graph = graph;
    game.initial = initial;
}

// ---------------------------------------------------------------------------
// JSON format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    kind: GameKind,
    vertices: Vec<VertexEntry>,
    #[serde(default)]
    sink: Option<VertexId>,
    #[serde(default)]
    edges: Vec<(VertexId, VertexId, u64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    mutations: BTreeMap<VertexId, Vec<Vec<VertexId>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    name: VertexId,
    chips: u64,
}

/// Parses a game from its JSON representation. The result is not validated.
pub fn from_json(text: &str) -> Result<Game, ModelError> {
    let file: GameFile = serde_json::from_str(text)?;
    let mut graph = MultiGraph::new();
    let mut initial = Configuration::new();
    for VertexEntry { name, chips } in file.vertices {
        if !graph.add_vertex(name.clone()) {
            return Err(ModelError::DuplicateVertex(name));
        }
        initial.set(name, chips);
    }
    graph.set_sink(file.sink);
    for (u, v, m) in file.edges {
        add_input_edge(&mut graph, file.kind, u, v, m);
    }
    let mut mutations = MutationSchedule::new();
    for (v, entries) in file.mutations {
        mutations.set(v, entries.into_iter().map(multiset_of).collect());
    }
    Ok(Game {
        kind: file.kind,
        graph,
        initial,
        mutations,
    })
}

/// Canonical JSON: vertices and edges sorted, sandpile edges listed once.
pub fn to_json(game: &Game) -> String {
    let g = &game.graph;
    let vertices = g
        .vertices()
        .map(|v| VertexEntry {
            name: v.clone(),
            chips: game.initial.get(v.as_str()),
        })
        .collect();
    let edges = g
        .edges()
        .filter(|(u, v, _)| game.kind != GameKind::Asm || g.is_sink(v.as_str()) || u <= v)
        .map(|(u, v, m)| (u.clone(), v.clone(), m))
        .collect();
    let mutations = game
        .mutations
        .iter()
        .filter(|(_, e)| !e.is_empty())
        .map(|(v, entries)| {
            let lists = entries
                .iter()
                .map(|ms| {
                    ms.iter()
                        .flat_map(|(w, &m)| std::iter::repeat_n(w.clone(), m as usize))
                        .collect()
                })
                .collect();
            (v.clone(), lists)
        })
        .collect();
    let file = GameFile {
        kind: game.kind,
        vertices,
        sink: g.sink().cloned(),
        edges,
        mutations,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("game serializes");
    text.push('\n');
    text
}
