//! Firing semantics for all three game kinds.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate, Configuration, Game, GameKind, VertexId, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("game fails validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("vertex `{0}` is not fireable")]
    NotFireable(VertexId),
    #[error("step budget of {0} firings exceeded")]
    BudgetExceeded(u64),
    #[error("convergence undecided after {0} firings")]
    Undecided(u64),
}

/// A position of the game: chips per vertex and how often each vertex has fired.
///
/// Both vectors are indexed like [`Simulator::vertices`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    pub chips: Vec<u64>,
    pub fired: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiringPolicy {
    /// Always fire the lexicographically smallest fireable vertex.
    Smallest,
    /// Fire a uniformly chosen fireable vertex, seeded.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiringRecord {
    pub sequence: Vec<VertexId>,
    #[serde(rename = "final")]
    pub final_config: Configuration,
    pub fire_counts: BTreeMap<VertexId, u64>,
}

impl FiringRecord {
    pub fn is_simple(&self) -> bool {
        self.fire_counts.values().all(|&c| c <= 1)
    }
}

/// A validated game compiled to index form.
#[derive(Debug, Clone)]
pub struct Simulator {
    kind: GameKind,
    names: Vec<VertexId>,
    sink: Option<usize>,
    /// `schedules[v][i]` is `s_v⁽ⁱ⁾`; the last entry repeats forever.
    schedules: Vec<Vec<Vec<(usize, u64)>>>,
    degrees: Vec<Vec<u64>>,
    initial: GameState,
}

impl Simulator {
    pub fn new(game: &Game) -> Result<Self, EngineError> {
        let violations = validate(game);
        if !violations.is_empty() {
            return Err(EngineError::Invalid(violations));
        }
        let names = game.vertex_names();
        let index: BTreeMap<&VertexId, usize> =
            names.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut schedules = Vec::with_capacity(names.len());
        for v in &names {
            let len = game.mutations.last_index(v.as_str()) + 1;
            let entries: Vec<Vec<(usize, u64)>> = (0..len)
                .map(|i| {
                    game.mutations
                        .entry(&game.graph, v.as_str(), i)
                        .iter()
                        .filter(|(_, &m)| m > 0)
                        .map(|(w, &m)| (index[w], m))
                        .collect()
                })
                .collect();
            schedules.push(entries);
        }
        let degrees = schedules
            .iter()
            .map(|s| s.iter().map(|e| e.iter().map(|&(_, m)| m).sum()).collect())
            .collect();
        let initial = GameState {
            chips: names.iter().map(|v| game.initial.get(v.as_str())).collect(),
            fired: vec![0; names.len()],
        };
        let sink = game.sink().map(|s| index[s]);
        Ok(Simulator {
            kind: game.kind,
            names,
            sink,
            schedules,
            degrees,
            initial,
        })
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    /// Vertex names in index order (sorted).
    pub fn vertices(&self) -> &[VertexId] {
        &self.names
    }

    pub fn index_of(&self, v: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(v)).ok()
    }

    fn require(&self, v: &str) -> Result<usize, EngineError> {
        self.index_of(v)
            .ok_or_else(|| EngineError::UnknownVertex(v.into()))
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn initial_state(&self) -> GameState {
        self.initial.clone()
    }

    fn entry_index(&self, v: usize, fired: u64) -> usize {
        (fired as usize).min(self.schedules[v].len() - 1)
    }

    /// Current outgoing edges of `v` in `state`.
    pub fn current_edges(&self, state: &GameState, v: usize) -> &[(usize, u64)] {
        &self.schedules[v][self.entry_index(v, state.fired[v])]
    }

    pub fn current_out_degree(&self, state: &GameState, v: usize) -> u64 {
        self.degrees[v][self.entry_index(v, state.fired[v])]
    }

    pub fn fireable(&self, state: &GameState, v: usize) -> bool {
        if Some(v) == self.sink {
            return false;
        }
        let d = self.current_out_degree(state, v);
        d >= 1 && state.chips[v] >= d
    }

    pub fn fireable_by_name(&self, state: &GameState, v: &str) -> Result<bool, EngineError> {
        Ok(self.fireable(state, self.require(v)?))
    }

    pub fn fireable_vertices(&self, state: &GameState) -> Vec<usize> {
        (0..self.names.len())
            .filter(|&v| self.fireable(state, v))
            .collect()
    }

    pub fn fire(&self, state: &GameState, v: usize) -> Result<GameState, EngineError> {
        if !self.fireable(state, v) {
            return Err(EngineError::NotFireable(self.names[v].clone()));
        }
        let mut next = state.clone();
        next.chips[v] -= self.current_out_degree(state, v);
        for &(w, m) in self.current_edges(state, v) {
            next.chips[w] += m;
        }
        next.fired[v] += 1;
        Ok(next)
    }

    pub fn fire_by_name(&self, state: &GameState, v: &str) -> Result<GameState, EngineError> {
        self.fire(state, self.require(v)?)
    }

    pub fn configuration(&self, state: &GameState) -> Configuration {
        self.names
            .iter()
            .cloned()
            .zip(state.chips.iter().copied())
            .collect()
    }

    fn counts(&self, state: &GameState) -> BTreeMap<VertexId, u64> {
        self.names
            .iter()
            .cloned()
            .zip(state.fired.iter().copied())
            .collect()
    }

    /// `10 · |V| · (total chips + 1)`.
    pub fn default_step_budget(&self) -> u64 {
        let total: u64 = self.initial.chips.iter().sum();
        10 * (self.names.len() as u64).max(1) * (total + 1)
    }

    /// Fires until no vertex is fireable.
    pub fn run_to_fixpoint(
        &self,
        policy: FiringPolicy,
        step_budget: u64,
    ) -> Result<FiringRecord, EngineError> {
        let mut rng = match policy {
            FiringPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            FiringPolicy::Smallest => None,
        };
        let mut state = self.initial_state();
        let mut sequence = Vec::new();
        loop {
            let fireable = self.fireable_vertices(&state);
            let Some(&first) = fireable.first() else {
                break;
            };
            if sequence.len() as u64 >= step_budget {
                return Err(EngineError::BudgetExceeded(step_budget));
            }
            let v = match rng.as_mut() {
                Some(rng) => *fireable.choose(rng).unwrap(),
                None => first,
            };
            state = self.fire(&state, v)?;
            sequence.push(self.names[v].clone());
        }
        Ok(FiringRecord {
            sequence,
            final_config: self.configuration(&state),
            fire_counts: self.counts(&state),
        })
    }

    /// Fires `sequence` from the initial state and returns every intermediate state,
    /// the initial one included.
    pub fn replay<S: AsRef<str>>(&self, sequence: &[S]) -> Result<Vec<GameState>, EngineError> {
        let mut states = vec![self.initial_state()];
        for v in sequence {
            let next = self.fire_by_name(states.last().unwrap(), v.as_ref())?;
            states.push(next);
        }
        Ok(states)
    }

    /// Decides convergence.
    ///
    /// For stationary games a path from every vertex to a vertex without
    /// outgoing edges certifies convergence. Otherwise the game is played with
    /// the default policy; reaching a fixpoint certifies convergence and a
    /// repeated position (mutation progress clamped to the stationary tail)
    /// certifies divergence.
    pub fn is_convergent(&self, step_budget: u64) -> Result<bool, EngineError> {
        if self.schedules.iter().all(|s| s.len() == 1) && self.every_vertex_reaches_a_sink() {
            return Ok(true);
        }
        let mut seen = HashSet::new();
        let mut state = self.initial_state();
        let mut steps = 0u64;
        loop {
            let Some(&v) = self.fireable_vertices(&state).first() else {
                return Ok(true);
            };
            let key = GameState {
                chips: state.chips.clone(),
                fired: (0..self.names.len())
                    .map(|u| self.entry_index(u, state.fired[u]) as u64)
                    .collect(),
            };
            if !seen.insert(key) {
                return Ok(false);
            }
            if steps >= step_budget {
                return Err(EngineError::Undecided(step_budget));
            }
            state = self.fire(&state, v)?;
            steps += 1;
        }
    }

    fn every_vertex_reaches_a_sink(&self) -> bool {
        let n = self.names.len();
        let mut preds = vec![Vec::new(); n];
        let mut good = vec![false; n];
        let mut stack = Vec::new();
        for (v, ok) in good.iter_mut().enumerate() {
            for &(w, _) in &self.schedules[v][0] {
                preds[w].push(v);
            }
            if self.degrees[v][0] == 0 || Some(v) == self.sink {
                *ok = true;
                stack.push(v);
            }
        }
        while let Some(w) = stack.pop() {
            for &u in &preds[w] {
                if !good[u] {
                    good[u] = true;
                    stack.push(u);
                }
            }
        }
        good.into_iter().all(|g| g)
    }

    /// Whether every vertex fires at most once. Relies on the firing counts
    /// being the same for every execution of a convergent game.
    pub fn is_simple(&self, step_budget: u64) -> Result<bool, EngineError> {
        Ok(self
            .run_to_fixpoint(FiringPolicy::Smallest, step_budget)?
            .is_simple())
    }

    /// `n(v) = max(0, d⁺(v) − σ₀(v))` with respect to the initial edges.
    pub fn chips_needed(&self, v: &str) -> Result<u64, EngineError> {
        let i = self.require(v)?;
        Ok(self.degrees[i][0].saturating_sub(self.initial.chips[i]))
    }
}

/// Final configuration of `game` under the default policy and budget.
pub fn final_configuration(game: &Game) -> Result<FiringRecord, EngineError> {
    let sim = Simulator::new(game)?;
    sim.run_to_fixpoint(FiringPolicy::Smallest, sim.default_step_budget())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GameBuilder;

    fn fig2() -> Game {
        GameBuilder::new(GameKind::Cfg)
            .vertex("a", 1)
            .vertex("b", 1)
            .vertex("c", 1)
            .vertex("d", 0)
            .edge("a", "c", 1)
            .edge("b", "c", 1)
            .edge("c", "d", 2)
            .sink("d")
            .build()
    }

    #[test]
    fn fig2_fireable_at_start() {
        let sim = Simulator::new(&fig2()).unwrap();
        let s = sim.initial_state();
        assert!(sim.fireable_by_name(&s, "a").unwrap());
        assert!(!sim.fireable_by_name(&s, "c").unwrap());
        assert!(!sim.fireable_by_name(&s, "d").unwrap());
    }

    #[test]
    fn fig2_runs_to_fixpoint() {
        let sim = Simulator::new(&fig2()).unwrap();
        let r = sim.run_to_fixpoint(FiringPolicy::Smallest, 100).unwrap();
        assert_eq!(
            r.sequence,
            vec![VertexId::from("a"), "b".into(), "c".into()]
        );
        assert_eq!(r.final_config.get("c"), 1);
        assert_eq!(r.final_config.get("d"), 2);
        assert!(r.is_simple());
    }

    #[test]
    fn firing_a_non_fireable_vertex_fails() {
        let sim = Simulator::new(&fig2()).unwrap();
        let s = sim.initial_state();
        assert_eq!(
            sim.fire_by_name(&s, "c"),
            Err(EngineError::NotFireable("c".into()))
        );
    }

    #[test]
    fn nothing_to_fire() {
        let game = GameBuilder::new(GameKind::Cfg)
            .vertex("v", 0)
            .vertex("s", 0)
            .edge("v", "s", 1)
            .sink("s")
            .build();
        let sim = Simulator::new(&game).unwrap();
        let r = sim.run_to_fixpoint(FiringPolicy::Smallest, 10).unwrap();
        assert!(r.sequence.is_empty());
        assert_eq!(r.final_config, game.initial);
    }

    #[test]
    fn two_cycle_oscillates() {
        let game = GameBuilder::new(GameKind::Cfg)
            .vertex("u", 1)
            .vertex("v", 0)
            .edge("u", "v", 1)
            .edge("v", "u", 1)
            .build();
        let sim = Simulator::new(&game).unwrap();
        assert_eq!(sim.is_convergent(100), Ok(false));
        assert_eq!(
            sim.run_to_fixpoint(FiringPolicy::Smallest, 50),
            Err(EngineError::BudgetExceeded(50))
        );
    }

    #[test]
    fn double_firing_is_not_simple() {
        let game = GameBuilder::new(GameKind::Cfg)
            .vertex("v", 2)
            .vertex("s", 0)
            .edge("v", "s", 1)
            .sink("s")
            .build();
        let sim = Simulator::new(&game).unwrap();
        assert_eq!(sim.is_simple(100), Ok(false));
    }

    #[test]
    fn loops_return_their_chip() {
        let game = GameBuilder::new(GameKind::Cfg)
            .vertex("v", 2)
            .vertex("s", 0)
            .edge("v", "v", 1)
            .edge("v", "s", 1)
            .sink("s")
            .build();
        let sim = Simulator::new(&game).unwrap();
        let s = sim.fire_by_name(&sim.initial_state(), "v").unwrap();
        assert_eq!(s.chips, vec![1, 1]);
        assert!(!sim.fireable_by_name(&s, "v").unwrap());
    }

    #[test]
    fn chips_needed_clamps() {
        let sim = Simulator::new(&fig2()).unwrap();
        assert_eq!(sim.chips_needed("c"), Ok(1));
        assert_eq!(sim.chips_needed("a"), Ok(0));
        let game = GameBuilder::new(GameKind::Cfg)
            .vertex("v", 5)
            .vertex("s", 0)
            .edge("v", "s", 2)
            .sink("s")
            .build();
        assert_eq!(Simulator::new(&game).unwrap().chips_needed("v"), Ok(0));
    }

    #[test]
    fn mutation_changes_edges_after_firing() {
        let game = GameBuilder::new(GameKind::Mcfg)
            .vertex("a", 2)
            .vertex("b", 0)
            .edge("a", "b", 1)
            .mutations("a", &[&[]])
            .build();
        let sim = Simulator::new(&game).unwrap();
        let r = sim.run_to_fixpoint(FiringPolicy::Smallest, 10).unwrap();
        assert_eq!(r.fire_counts[&VertexId::from("a")], 1);
        assert_eq!(r.final_config.get("a"), 1);
        assert_eq!(sim.is_convergent(10), Ok(true));
    }

    #[test]
    fn invalid_games_are_refused() {
        let mut game = fig2();
        game.graph.add_edge("a", "nowhere", 1);
        assert!(matches!(
            Simulator::new(&game),
            Err(EngineError::Invalid(_))
        ));
    }
}
