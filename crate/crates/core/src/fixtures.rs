//! Built-in example games with their known analysis results.

use crate::model::{from_json, Game};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expected {
    pub states: usize,
    pub covers: usize,
    pub simple: bool,
    /// No cycle among the non-sink vertices of the initial support graph.
    pub acyclic: bool,
    pub uld: bool,
    pub distributive: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub json: &'static str,
    pub expected: Expected,
    /// Another fixture with an isomorphic configuration space.
    pub equivalent_to: Option<&'static str>,
}

impl Fixture {
    pub fn game(&self) -> Game {
        from_json(self.json).expect("built-in fixture parses")
    }
}

const fn expected(
    states: usize,
    covers: usize,
    simple: bool,
    acyclic: bool,
    distributive: bool,
) -> Expected {
    Expected {
        states,
        covers,
        simple,
        acyclic,
        uld: true,
        distributive,
    }
}

static CORPUS: &[Fixture] = &[
    Fixture {
        name: "fig2",
        summary: "two vertices feeding a third that holds one chip and needs two",
        json: include_str!("../fixtures/fig2.json"),
        expected: expected(7, 9, true, true, false),
        equivalent_to: None,
    },
    Fixture {
        name: "fig3",
        summary: "three-vertex mutating game; every vertex mutates after its first firing",
        json: include_str!("../fixtures/fig3.json"),
        expected: expected(18, 29, false, false, false),
        equivalent_to: None,
    },
    Fixture {
        name: "fig5",
        summary: "mutating game whose lower vertex ends above its initial outdegree",
        json: include_str!("../fixtures/fig5.json"),
        expected: expected(3, 2, true, true, true),
        equivalent_to: Some("fig5-cfg"),
    },
    Fixture {
        name: "fig5-cfg",
        summary: "plain CFG equivalent to fig5",
        json: include_str!("../fixtures/fig5-cfg.json"),
        expected: expected(3, 2, true, true, true),
        equivalent_to: Some("fig5"),
    },
    Fixture {
        name: "fig6-1",
        summary: "a two-vertex path into the sink",
        json: include_str!("../fixtures/fig6-1.json"),
        expected: expected(3, 2, true, true, true),
        equivalent_to: Some("fig6-4"),
    },
    Fixture {
        name: "fig6-2",
        summary: "fig6-1 with a reverse edge: u can no longer fire",
        json: include_str!("../fixtures/fig6-2.json"),
        expected: expected(2, 1, true, false, true),
        equivalent_to: None,
    },
    Fixture {
        name: "fig6-3",
        summary: "fig6-2 with a chip on u: v fires twice",
        json: include_str!("../fixtures/fig6-3.json"),
        expected: expected(4, 3, false, false, true),
        equivalent_to: None,
    },
    Fixture {
        name: "fig6-4",
        summary: "fig6-3 with v grounded once",
        json: include_str!("../fixtures/fig6-4.json"),
        expected: expected(3, 2, true, false, true),
        equivalent_to: Some("fig6-1"),
    },
    Fixture {
        name: "fig7-cfg",
        summary: "CFG with a cycle that is still equivalent to a sandpile",
        json: include_str!("../fixtures/fig7-cfg.json"),
        expected: expected(11, 16, true, false, false),
        equivalent_to: Some("fig7-asm"),
    },
    Fixture {
        name: "fig7-asm",
        summary: "sandpile equivalent to fig7-cfg",
        json: include_str!("../fixtures/fig7-asm.json"),
        expected: expected(11, 16, true, false, false),
        equivalent_to: Some("fig7-cfg"),
    },
    Fixture {
        name: "fig9",
        summary: "six-vertex CFG whose lattice no sandpile produces",
        json: include_str!("../fixtures/fig9.json"),
        expected: expected(39, 87, true, false, false),
        equivalent_to: None,
    },
    Fixture {
        name: "fig10-left",
        summary: "acyclic CFG where v needs one chip from a single edge",
        json: include_str!("../fixtures/fig10-left.json"),
        expected: expected(10, 14, true, true, false),
        equivalent_to: Some("fig10-right"),
    },
    Fixture {
        name: "fig10-right",
        summary: "fig10-left after multiplying v by two and reversing (v, u)",
        json: include_str!("../fixtures/fig10-right.json"),
        expected: expected(10, 14, true, false, false),
        equivalent_to: Some("fig10-left"),
    },
];

pub fn all() -> &'static [Fixture] {
    CORPUS
}

pub fn get(name: &str) -> Option<&'static Fixture> {
    CORPUS.iter().find(|f| f.name == name)
}

pub fn game(name: &str) -> Option<Game> {
    get(name).map(Fixture::game)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_json, validate};

    #[test]
    fn every_fixture_round_trips_bit_exactly() {
        for f in all() {
            let game = f.game();
            assert_eq!(validate(&game), vec![], "{}", f.name);
            assert_eq!(to_json(&game), f.json, "{}", f.name);
        }
    }

    #[test]
    fn names_are_unique_and_pairs_are_symmetric() {
        for f in all() {
            assert_eq!(all().iter().filter(|g| g.name == f.name).count(), 1);
            if let Some(other) = f.equivalent_to {
                assert_eq!(get(other).unwrap().equivalent_to, Some(f.name));
            }
        }
    }
}
