//! Chip firing games, sandpiles and mutating chip firing games: simulation,
//! configuration-space lattices, and space-preserving transformations.

pub mod engine;
pub mod fixtures;
pub mod lattice;
pub mod model;
pub mod random;
pub mod space;
pub mod transform;

pub use engine::{EngineError, FiringPolicy, FiringRecord, GameState, Simulator};
pub use lattice::{FinitePoset, LatticeError, LatticeReport};
pub use model::{
    Configuration, Game, GameBuilder, GameKind, ModelError, MultiGraph, MutationSchedule, VertexId,
};
pub use space::{build_space, ConfigSpace, SpaceError};
