//! A deliberately naive reference implementation, keyed by vertex names,
//! used to cross-check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chipfire::{Game, GameKind};

pub type Shots = BTreeSet<String>;

/// Chips and firing count of every vertex.
pub type NaiveState = BTreeMap<String, (u64, u64)>;

pub struct NaiveGame<'a> {
    game: &'a Game,
}

impl<'a> NaiveGame<'a> {
    pub fn new(game: &'a Game) -> Self {
        NaiveGame { game }
    }

    pub fn initial(&self) -> NaiveState {
        self.game
            .graph
            .vertices()
            .map(|v| (v.to_string(), (self.game.initial.get(v.as_str()), 0)))
            .collect()
    }

    fn edges(&self, v: &str, fired: u64) -> BTreeMap<String, u64> {
        let mut lists = vec![self.game.graph.out_edges(v)];
        if self.game.kind == GameKind::Mcfg {
            lists.extend(self.game.mutations.stored(v).iter().cloned());
        }
        let i = (fired as usize).min(lists.len() - 1);
        lists[i].iter().map(|(w, &m)| (w.to_string(), m)).collect()
    }

    pub fn can_fire(&self, s: &NaiveState, v: &str) -> bool {
        if self.game.graph.sink().is_some_and(|k| k.as_str() == v) {
            return false;
        }
        let (chips, fired) = s[v];
        let d: u64 = self.edges(v, fired).values().sum();
        d > 0 && chips >= d
    }

    pub fn fire(&self, s: &NaiveState, v: &str) -> NaiveState {
        let mut t = s.clone();
        let edges = self.edges(v, s[v].1);
        let d: u64 = edges.values().sum();
        t.get_mut(v).unwrap().0 -= d;
        t.get_mut(v).unwrap().1 += 1;
        for (w, m) in edges {
            t.get_mut(&w).unwrap().0 += m;
        }
        t
    }

    pub fn fireable(&self, s: &NaiveState) -> Vec<String> {
        s.keys().filter(|v| self.can_fire(s, v)).cloned().collect()
    }

    /// Depth-first enumeration of every reachable state, with the reachability order.
    pub fn space(&self, limit: usize) -> NaiveSpace {
        let mut index: HashMap<NaiveState, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![self.initial()];
        index.insert(stack[0].clone(), 0);
        states.push(stack[0].clone());
        succ.push(vec![]);
        while let Some(s) = stack.pop() {
            let i = index[&s];
            for v in self.fireable(&s) {
                let t = self.fire(&s, &v);
                let j = match index.get(&t) {
                    Some(&j) => j,
                    None => {
                        let j = states.len();
                        assert!(j < limit, "naive space exceeds {limit} states");
                        index.insert(t.clone(), j);
                        states.push(t.clone());
                        succ.push(vec![]);
                        stack.push(t);
                        j
                    }
                };
                succ[i].push(j);
            }
        }
        let n = states.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            let mut todo = vec![i];
            while let Some(x) = todo.pop() {
                if !row[x] {
                    row[x] = true;
                    todo.extend(succ[x].iter().copied());
                }
            }
        }
        NaiveSpace {
            states,
            leq: Order { leq },
        }
    }

    /// Firing by uniformly random choice among the fireable vertices, driven by a
    /// small linear congruential generator.
    pub fn run_random(
        &self,
        mut seed: u64,
        max_steps: usize,
    ) -> (NaiveState, BTreeMap<String, u64>) {
        let mut s = self.initial();
        for _ in 0..max_steps {
            let f = self.fireable(&s);
            if f.is_empty() {
                let counts = s.iter().map(|(v, &(_, k))| (v.clone(), k)).collect();
                return (s, counts);
            }
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let v = &f[(seed >> 33) as usize % f.len()];
            s = self.fire(&s, v);
        }
        panic!("no fixpoint within {max_steps} steps");
    }
}

pub struct NaiveSpace {
    pub states: Vec<NaiveState>,
    pub leq: Order,
}

impl NaiveSpace {
    pub fn shot_set(&self, i: usize) -> Shots {
        self.states[i]
            .iter()
            .filter(|(_, &(_, k))| k > 0)
            .map(|(v, _)| v.clone())
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        self.states.iter().all(|s| s.values().all(|&(_, k)| k <= 1))
    }

    pub fn shot_sets(&self) -> BTreeSet<Shots> {
        (0..self.states.len()).map(|i| self.shot_set(i)).collect()
    }

    /// Inclusion-minimal shot-sets of states where `v` can fire.
    pub fn first_times(&self, game: &NaiveGame, v: &str) -> BTreeSet<Shots> {
        let sets: Vec<Shots> = (0..self.states.len())
            .filter(|&i| game.can_fire(&self.states[i], v))
            .map(|i| self.shot_set(i))
            .collect();
        sets.iter()
            .filter(|s| !sets.iter().any(|t| t != *s && t.is_subset(s)))
            .cloned()
            .collect()
    }
}

/// A finite order given by its full comparability matrix.
#[derive(Clone)]
pub struct Order {
    pub leq: Vec<Vec<bool>>,
}

impl Order {
    pub fn from_sets(sets: &[Shots]) -> Order {
        Order {
            leq: sets
                .iter()
                .map(|a| sets.iter().map(|b| a.is_subset(b)).collect())
                .collect(),
        }
    }

    pub fn from_poset(p: &chipfire::FinitePoset) -> Order {
        let n = p.len();
        Order {
            leq: (0..n)
                .map(|i| (0..n).map(|j| p.leq(i, j)).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.leq.len()
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq[x][y]
    }

    pub fn covers(&self, x: usize, y: usize) -> bool {
        self.lt(x, y) && !(0..self.len()).any(|z| self.lt(x, z) && self.lt(z, y))
    }

    pub fn upper_covers(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.covers(x, y)).collect()
    }

    pub fn lower_covers(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.covers(y, x)).collect()
    }

    pub fn cover_count(&self) -> usize {
        (0..self.len()).map(|x| self.upper_covers(x).len()).sum()
    }

    fn least(&self, set: &[usize]) -> Option<usize> {
        set.iter()
            .copied()
            .find(|&m| set.iter().all(|&z| self.leq[m][z]))
    }

    fn greatest(&self, set: &[usize]) -> Option<usize> {
        set.iter()
            .copied()
            .find(|&m| set.iter().all(|&z| self.leq[z][m]))
    }

    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        let ub: Vec<usize> = (0..self.len())
            .filter(|&z| self.leq[x][z] && self.leq[y][z])
            .collect();
        self.least(&ub)
    }

    pub fn meet(&self, x: usize, y: usize) -> Option<usize> {
        let lb: Vec<usize> = (0..self.len())
            .filter(|&z| self.leq[z][x] && self.leq[z][y])
            .collect();
        self.greatest(&lb)
    }

    pub fn is_lattice(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| (0..n).all(|y| self.join(x, y).is_some() && self.meet(x, y).is_some()))
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let l = self.join(x, self.meet(y, z).unwrap()).unwrap();
                    let r = self
                        .meet(self.join(x, y).unwrap(), self.join(x, z).unwrap())
                        .unwrap();
                    if l != r {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Lengths of every maximal chain, as a set.
    pub fn maximal_chain_lengths(&self) -> BTreeSet<usize> {
        let n = self.len();
        let mut memo: Vec<Option<BTreeSet<usize>>> = vec![None; n];
        fn go(o: &Order, x: usize, memo: &mut Vec<Option<BTreeSet<usize>>>) -> BTreeSet<usize> {
            if let Some(s) = &memo[x] {
                return s.clone();
            }
            let ups = o.upper_covers(x);
            let out = if ups.is_empty() {
                BTreeSet::from([0])
            } else {
                ups.iter()
                    .flat_map(|&y| go(o, y, memo))
                    .map(|l| l + 1)
                    .collect()
            };
            memo[x] = Some(out.clone());
            out
        }
        (0..n)
            .filter(|&x| self.lower_covers(x).is_empty())
            .flat_map(|x| go(self, x, &mut memo))
            .collect()
    }

    /// Every interval from `x` to the join of its upper covers is boolean:
    /// joins of distinct subsets of the covers are distinct and fill the interval.
    pub fn is_uld(&self) -> bool {
        for x in 0..self.len() {
            let ups = self.upper_covers(x);
            let k = ups.len();
            let mut seen = BTreeSet::new();
            for mask in 0u32..(1 << k) {
                let mut j = x;
                for (b, &u) in ups.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        j = self.join(j, u).unwrap();
                    }
                }
                seen.insert(j);
            }
            let top = *seen
                .iter()
                .find(|&&j| seen.iter().all(|&z| self.leq[z][j]))
                .unwrap();
            let interval = (0..self.len())
                .filter(|&z| self.leq[x][z] && self.leq[z][top])
                .count();
            if seen.len() != 1 << k || interval != 1 << k {
                return false;
            }
        }
        true
    }

    pub fn dual(&self) -> Order {
        let n = self.len();
        Order {
            leq: (0..n)
                .map(|i| (0..n).map(|j| self.leq[j][i]).collect())
                .collect(),
        }
    }

    /// Plain backtracking over bijections respecting cover degrees.
    pub fn isomorphic(&self, other: &Order) -> bool {
        let n = self.len();
        if n != other.len() || self.cover_count() != other.cover_count() {
            return false;
        }
        let deg = |o: &Order, x| (o.upper_covers(x).len(), o.lower_covers(x).len());
        let da: Vec<_> = (0..n).map(|x| deg(self, x)).collect();
        let db: Vec<_> = (0..n).map(|x| deg(other, x)).collect();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn go(
            a: &Order,
            b: &Order,
            da: &[(usize, usize)],
            db: &[(usize, usize)],
            i: usize,
            map: &mut [usize],
            used: &mut [bool],
        ) -> bool {
            if i == a.len() {
                return true;
            }
            for j in 0..b.len() {
                if used[j] || da[i] != db[j] {
                    continue;
                }
                if (0..i)
                    .all(|k| a.leq[k][i] == b.leq[map[k]][j] && a.leq[i][k] == b.leq[j][map[k]])
                {
                    map[i] = j;
                    used[j] = true;
                    if go(a, b, da, db, i + 1, map, used) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        go(self, other, &da, &db, 0, &mut map, &mut used)
    }
}

pub fn naive_order(game: &Game) -> Order {
    NaiveGame::new(game).space(100_000).leq
}
