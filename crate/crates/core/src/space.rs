//! Configuration spaces: every reachable position, with single firings as covers.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, GameState, Simulator};
use crate::lattice::{FinitePoset, LatticeError};
use crate::model::{Configuration, Game, VertexId};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Largest vertex count accepted by [`space_from_first_times`].
pub const MAX_RECONSTRUCTION_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("game does not converge")]
    NonConvergent,
    #[error("configuration space exceeds {0} states")]
    BudgetExceeded(usize),
    #[error("game is not simple")]
    NotSimple,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("state {0} out of range")]
    UnknownState(usize),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("cannot enumerate subsets of {0} vertices")]
    TooManyVertices(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One labeled cover `from →vertex to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cover {
    pub from: usize,
    pub vertex: usize,
    pub to: usize,
}

/// First times of every vertex: the inclusion-minimal shot-sets at which it is fireable.
pub type FirstTimes = BTreeMap<VertexId, BTreeSet<BTreeSet<VertexId>>>;

/// The reachable positions of a game in breadth-first order (a linear
/// extension of the order), with labeled covers.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    vertices: Vec<VertexId>,
    sink: Option<usize>,
    states: Vec<GameState>,
    covers: Vec<Cover>,
    out: Vec<Vec<(usize, usize)>>,
    top: usize,
    simple: bool,
    by_fired: HashMap<Vec<u64>, usize>,
}

/// Builds the configuration space of a convergent game.
pub fn build_space(game: &Game, state_budget: usize) -> Result<ConfigSpace, SpaceError> {
    let sim = Simulator::new(game)?;
    if !sim.is_convergent(sim.default_step_budget())? {
        return Err(SpaceError::NonConvergent);
    }
    build_space_with(&sim, state_budget)
}

/// Builds the space without checking convergence first; a divergent game
/// runs into the state budget.
pub fn build_space_with(sim: &Simulator, state_budget: usize) -> Result<ConfigSpace, SpaceError> {
    let root = sim.initial_state();
    let mut index: HashMap<GameState, usize> = HashMap::new();
    let mut states = vec![root.clone()];
    index.insert(root, 0);
    let mut covers = Vec::new();
    let mut out = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for v in sim.fireable_vertices(&states[i]) {
            let next = sim.fire(&states[i], v)?;
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= state_budget {
                        return Err(SpaceError::BudgetExceeded(state_budget));
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    out.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            covers.push(Cover {
                from: i,
                vertex: v,
                to: j,
            });
            out[i].push((v, j));
        }
    }
    let terminal: Vec<usize> = (0..states.len()).filter(|&i| out[i].is_empty()).collect();
    let [top] = terminal[..] else {
        return Err(SpaceError::InternalInconsistency(format!(
            "{} positions without fireable vertices",
            terminal.len()
        )));
    };
    let simple = states[top].fired.iter().all(|&c| c <= 1);
    let by_fired = if simple {
        states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.fired.clone(), i))
            .collect()
    } else {
        HashMap::new()
    };
    Ok(ConfigSpace {
        vertices: sim.vertices().to_vec(),
        sink: sim.sink(),
        states,
        covers,
        out,
        top,
        simple,
        by_fired,
    })
}

impl ConfigSpace {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[GameState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &GameState {
        &self.states[i]
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    /// Outgoing covers of state `i` as `(vertex, target)`.
    pub fn successors(&self, i: usize) -> &[(usize, usize)] {
        &self.out[i]
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn vertex_index(&self, v: &str) -> Option<usize> {
        self.vertices.iter().position(|w| w.as_str() == v)
    }

    pub fn configuration(&self, i: usize) -> Configuration {
        self.vertices
            .iter()
            .cloned()
            .zip(self.states[i].chips.iter().copied())
            .collect()
    }

    /// Vertices fireable in state `i`, i.e. the labels of its outgoing covers.
    pub fn fireable(&self, i: usize) -> BTreeSet<VertexId> {
        self.out[i]
            .iter()
            .map(|&(v, _)| self.vertices[v].clone())
            .collect()
    }

    fn shot_indices(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.states[i]
            .fired
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, _)| v)
    }

    /// The vertices fired to reach state `i`.
    pub fn shot_set(&self, i: usize) -> Result<BTreeSet<VertexId>, SpaceError> {
        if !self.simple {
            return Err(SpaceError::NotSimple);
        }
        if i >= self.len() {
            return Err(SpaceError::UnknownState(i));
        }
        Ok(self
            .shot_indices(i)
            .map(|v| self.vertices[v].clone())
            .collect())
    }

    /// Every state's shot-set, in state order.
    pub fn shot_sets(&self) -> Result<Vec<BTreeSet<VertexId>>, SpaceError> {
        (0..self.len()).map(|i| self.shot_set(i)).collect()
    }

    /// The state with the given shot-set.
    pub fn state_with_shot_set(
        &self,
        shots: &BTreeSet<VertexId>,
    ) -> Result<Option<usize>, SpaceError> {
        if !self.simple {
            return Err(SpaceError::NotSimple);
        }
        let mut fired = vec![0u64; self.vertices.len()];
        for v in shots {
            let i = self
                .vertex_index(v.as_str())
                .ok_or_else(|| SpaceError::UnknownVertex(v.clone()))?;
            fired[i] = 1;
        }
        Ok(self.by_fired.get(&fired).copied())
    }

    /// The state whose shot-set is the union of those of `a` and `b`.
    pub fn join_by_shotsets(&self, a: usize, b: usize) -> Result<usize, SpaceError> {
        let mut union = self.shot_set(a)?;
        union.extend(self.shot_set(b)?);
        self.state_with_shot_set(&union)?.ok_or_else(|| {
            SpaceError::InternalInconsistency(format!(
                "no state carries the shot-set union of {a} and {b}"
            ))
        })
    }

    /// Minimal shot-sets, sorted, among the states where `v` is fireable.
    /// Empty when `v` never fires.
    pub fn first_times(&self, v: &str) -> Result<BTreeSet<BTreeSet<VertexId>>, SpaceError> {
        if !self.simple {
            return Err(SpaceError::NotSimple);
        }
        let vi = self
            .vertex_index(v)
            .ok_or_else(|| SpaceError::UnknownVertex(v.into()))?;
        let mut candidates: Vec<BTreeSet<VertexId>> = Vec::new();
        for i in 0..self.len() {
            if self.out[i].iter().any(|&(w, _)| w == vi) {
                candidates.push(self.shot_set(i)?);
            }
        }
        Ok(candidates
            .iter()
            .filter(|c| !candidates.iter().any(|d| d != *c && d.is_subset(c)))
            .cloned()
            .collect())
    }

    /// First times of every non-sink vertex.
    pub fn all_first_times(&self) -> Result<FirstTimes, SpaceError> {
        let mut out = FirstTimes::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if Some(i) != self.sink {
                out.insert(v.clone(), self.first_times(v.as_str())?);
            }
        }
        Ok(out)
    }

    /// The space ordered by reachability.
    pub fn to_poset(&self) -> FinitePoset {
        FinitePoset::from_relations(self.len(), self.covers.iter().map(|c| (c.from, c.to)))
            .expect("firing never revisits a position")
    }

    fn label(&self, i: usize) -> String {
        let chips: Vec<String> = self.states[i].chips.iter().map(u64::to_string).collect();
        let mut label = format!("({})", chips.join(","));
        if self.simple {
            let shots: Vec<&str> = self
                .shot_indices(i)
                .map(|v| self.vertices[v].as_str())
                .collect();
            let _ = write!(label, "\n{{{}}}", shots.join(","));
        }
        label
    }

    /// Graphviz rendering of the Hasse diagram; edges are labeled with the fired vertex.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph space {\n  rankdir=BT;\n  node [shape=box];\n");
        let names: Vec<&str> = self.vertices.iter().map(VertexId::as_str).collect();
        let _ = writeln!(s, "  // vertex order: {}", names.join(", "));
        for i in 0..self.len() {
            let _ = writeln!(s, "  s{i} [label=\"{}\"];", dot_escape(&self.label(i)));
        }
        for c in &self.covers {
            let _ = writeln!(
                s,
                "  s{} -> s{} [label=\"{}\"];",
                c.from,
                c.to,
                dot_escape(self.vertices[c.vertex].as_str())
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_export(&self) -> SpaceExport {
        let states = (0..self.len())
            .map(|i| StateExport {
                id: i,
                config: self.configuration(i),
                fire_counts: self
                    .vertices
                    .iter()
                    .cloned()
                    .zip(self.states[i].fired.iter().copied())
                    .collect(),
                shot_set: self.shot_set(i).ok(),
            })
            .collect();
        let covers = self
            .covers
            .iter()
            .map(|c| CoverExport {
                from: c.from,
                to: c.to,
                vertex: self.vertices[c.vertex].clone(),
            })
            .collect();
        SpaceExport {
            vertices: self.vertices.clone(),
            simple: self.simple,
            root: 0,
            top: self.top,
            states,
            covers,
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceExport {
    pub vertices: Vec<VertexId>,
    pub simple: bool,
    pub root: usize,
    pub top: usize,
    pub states: Vec<StateExport>,
    pub covers: Vec<CoverExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateExport {
    pub id: usize,
    pub config: Configuration,
    pub fire_counts: BTreeMap<VertexId, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shot_set: Option<BTreeSet<VertexId>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverExport {
    pub from: usize,
    pub to: usize,
    pub vertex: VertexId,
}

/// Rebuilds a space from first times: all `Y ⊆ vertices` such that every
/// `v ∈ Y` has some `Z ∈ X_v` with `Z ⊆ Y`, ordered by inclusion.
///
/// Vertices missing from `x` (or with no first time) never belong to `Y`.
/// Returns the family, sorted by size then lexicographically, and its order.
pub fn space_from_first_times(
    vertices: &[VertexId],
    x: &FirstTimes,
) -> Result<(Vec<BTreeSet<VertexId>>, FinitePoset), SpaceError> {
    let live: Vec<&VertexId> = vertices
        .iter()
        .filter(|v| x.get(*v).is_some_and(|sets| !sets.is_empty()))
        .collect();
    if live.len() > MAX_RECONSTRUCTION_VERTICES {
        return Err(SpaceError::TooManyVertices(live.len()));
    }
    let bit: HashMap<&VertexId, usize> = live.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    // A first time mentioning a vertex that can never be in Y is unusable.
    let masks: Vec<Vec<u32>> = live
        .iter()
        .map(|v| {
            x[*v]
                .iter()
                .filter_map(|z| {
                    z.iter()
                        .try_fold(0u32, |m, w| bit.get(w).map(|&b| m | 1 << b))
                })
                .collect()
        })
        .collect();
    let mut family: Vec<u32> = (0u32..(1u32 << live.len()))
        .filter(|&y| {
            (0..live.len())
                .filter(|&i| y & (1 << i) != 0)
                .all(|i| masks[i].iter().any(|&z| z & !y == 0))
        })
        .collect();
    family.sort_by_key(|&y| (y.count_ones(), y.reverse_bits()));
    let sets: Vec<BTreeSet<VertexId>> = family
        .iter()
        .map(|&y| {
            (0..live.len())
                .filter(|&i| y & (1 << i) != 0)
                .map(|i| live[i].clone())
                .collect()
        })
        .collect();
    let poset = FinitePoset::from_leq(family.len(), |i, j| family[i] & !family[j] == 0)?;
    Ok((sets, poset))
}
