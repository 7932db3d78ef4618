//! Seeded generators of small random games, for property tests and benchmarks.
//!
//! Vertices are named `v0, v1, …`; the sink, when present, is `sink`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{FiringPolicy, Simulator};
use crate::model::{EdgeMultiset, Game, GameKind, MultiGraph, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SINK: &str = "sink";

fn name(i: usize) -> VertexId {
    VertexId::from(format!("v{i}"))
}

fn spread_chips<R: Rng>(rng: &mut R, game: &mut Game, count: usize, total: u64) {
    for _ in 0..total {
        let v = name(rng.gen_range(0..count));
        game.initial.add(&v, 1);
    }
}

fn empty_game(kind: GameKind, count: usize) -> Game {
    let mut game = Game::new(kind, MultiGraph::new(), Default::default());
    for i in 0..count {
        game.add_vertex(name(i), 0);
    }
    game.add_vertex(SINK, 0);
    game.graph.set_sink(Some(SINK.into()));
    game
}

/// Gives a sink edge to every vertex that cannot reach the sink.
fn connect_to_sink<R: Rng>(rng: &mut R, game: &mut Game, count: usize) {
    loop {
        let reach = reaches_sink(&game.graph, count);
        let Some(i) = (0..count).rfind(|&i| !reach[i]) else {
            return;
        };
        game.graph.add_edge(name(i), SINK, rng.gen_range(1..=2));
    }
}

fn reaches_sink(graph: &MultiGraph, count: usize) -> Vec<bool> {
    let mut reach = vec![false; count];
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..count {
            if reach[i] {
                continue;
            }
            let v = name(i);
            let ok = graph.successors(v.as_str()).any(|(w, _)| {
                w.as_str() == SINK
                    || w.as_str()[1..]
                        .parse::<usize>()
                        .is_ok_and(|j| j < count && reach[j])
            });
            if ok {
                reach[i] = true;
                changed = true;
            }
        }
    }
    reach
}

/// A CFG on `2..=max_vertices` vertices (sink included) in which every vertex
/// reaches the sink, with at most `max_chips` chips. Always convergent.
pub fn convergent_cfg<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    let count = rng.gen_range(1..max_vertices.max(2));
    let mut game = empty_game(GameKind::Cfg, count);
    for i in 0..count {
        for j in 0..count {
            if i != j && rng.gen_bool(0.35) {
                game.graph.add_edge(name(i), name(j), rng.gen_range(1..=2));
            }
        }
        if rng.gen_bool(0.1) {
            game.graph.add_edge(name(i), name(i), 1);
        }
        if rng.gen_bool(0.5) {
            game.graph.add_edge(name(i), SINK, rng.gen_range(1..=2));
        }
    }
    connect_to_sink(rng, &mut game, count);
    let total = rng.gen_range(0..=max_chips);
    spread_chips(rng, &mut game, count, total);
    game
}

/// A sandpile on `2..=max_vertices` vertices (sink included) with at most
/// `max_chips` chips. Always convergent.
pub fn convergent_asm<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    let count = rng.gen_range(1..max_vertices.max(2));
    let mut game = empty_game(GameKind::Asm, count);
    for i in 0..count {
        for j in i + 1..count {
            if rng.gen_bool(0.4) {
                let m = rng.gen_range(1..=2);
                game.graph.add_edge(name(i), name(j), m);
                game.graph.add_edge(name(j), name(i), m);
            }
        }
        if rng.gen_bool(0.4) {
            game.graph.add_edge(name(i), SINK, rng.gen_range(1..=2));
        }
    }
    connect_to_sink(rng, &mut game, count);
    let total = rng.gen_range(0..=max_chips);
    spread_chips(rng, &mut game, count, total);
    game
}

fn random_multiset<R: Rng>(rng: &mut R, count: usize, max_degree: u64) -> EdgeMultiset {
    let mut out = EdgeMultiset::new();
    for _ in 0..rng.gen_range(0..=max_degree) {
        let t = rng.gen_range(0..=count);
        let target = if t == count {
            VertexId::from(SINK)
        } else {
            name(t)
        };
        *out.entry(target).or_insert(0) += 1;
    }
    out
}

/// A mutating game with up to two stored mutation entries per vertex. May diverge.
pub fn mcfg<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    let count = rng.gen_range(1..max_vertices.max(2));
    let mut game = empty_game(GameKind::Mcfg, count);
    for i in 0..count {
        let initial = random_multiset(rng, count, 2);
        game.graph.set_out_edges(&name(i), &initial);
        let entries = (0..rng.gen_range(0..=2))
            .map(|_| random_multiset(rng, count, 3))
            .collect();
        game.mutations.set(name(i), entries);
    }
    let total = rng.gen_range(0..=max_chips);
    spread_chips(rng, &mut game, count, total);
    game
}

fn converges(game: &Game) -> bool {
    let sim = Simulator::new(game).expect("generated games are valid");
    sim.is_convergent(sim.default_step_budget()) == Ok(true)
}

fn fire_counts(game: &Game) -> Vec<u64> {
    let sim = Simulator::new(game).expect("generated games are valid");
    sim.run_to_fixpoint(FiringPolicy::Smallest, sim.default_step_budget())
        .expect("convergent")
        .fire_counts
        .into_values()
        .collect()
}

/// A convergent mutating game.
pub fn convergent_mcfg<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    loop {
        let game = mcfg(rng, max_vertices, max_chips);
        if converges(&game) {
            return game;
        }
    }
}

/// A convergent game of a uniformly chosen kind.
pub fn convergent_game<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    match rng.gen_range(0..3) {
        0 => convergent_cfg(rng, max_vertices, max_chips),
        1 => convergent_asm(rng, max_vertices, max_chips),
        _ => convergent_mcfg(rng, max_vertices, max_chips),
    }
}

/// A convergent CFG in which every vertex fires at most once.
pub fn simple_cfg<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    loop {
        let game = convergent_cfg(rng, max_vertices, max_chips);
        if fire_counts(&game).iter().all(|&c| c <= 1) {
            return game;
        }
    }
}

/// A simple CFG whose non-sink vertices form an acyclic graph and all fire
/// exactly once.
pub fn acyclic_simple_cfg<R: Rng>(rng: &mut R, max_vertices: usize) -> Game {
    let count = rng.gen_range(1..max_vertices.max(2));
    let mut game = empty_game(GameKind::Cfg, count);
    for i in 0..count {
        for j in i + 1..count {
            if rng.gen_bool(0.4) {
                game.graph.add_edge(name(i), name(j), rng.gen_range(1..=2));
            }
        }
    }
    for i in 0..count {
        let v = name(i);
        let din = game.graph.in_degree(v.as_str());
        if game.graph.out_degree(v.as_str()) == 0 || rng.gen_bool(0.3) {
            game.graph.add_edge(v.clone(), SINK, rng.gen_range(1..=2));
        }
        while 2 * game.graph.out_degree(v.as_str()) <= din {
            game.graph.add_edge(v.clone(), SINK, 1);
        }
        let dout = game.graph.out_degree(v.as_str());
        let low = dout.saturating_sub(din);
        let high = 2 * dout - din - 1;
        game.initial.set(v, rng.gen_range(low..=high));
    }
    game
}

/// A convergent mutating game where some vertex fires at least twice and at
/// most `max_extra` extra firings occur in total (so that at most that many
/// splits make it simple).
pub fn non_simple_mcfg<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_chips: u64,
    max_extra: u64,
) -> Game {
    loop {
        let game = convergent_mcfg(rng, max_vertices, max_chips);
        let extra: u64 = fire_counts(&game)
            .iter()
            .map(|&c| c.saturating_sub(1))
            .sum();
        if extra >= 1 && extra <= max_extra {
            return game;
        }
    }
}

/// A convergent mutating game in which every vertex fires at most once.
pub fn simple_mcfg<R: Rng>(rng: &mut R, max_vertices: usize, max_chips: u64) -> Game {
    loop {
        let game = convergent_mcfg(rng, max_vertices, max_chips);
        if fire_counts(&game).iter().all(|&c| c <= 1) {
            return game;
        }
    }
}
