//! Finite posets: lattice predicates and isomorphism.
//!
//! Elements are `0..n`. The order is stored as up-sets and down-sets, one
//! bitset per element, indexed by position in a fixed topological order.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("relation has a cycle through element {0}")]
    Cycle(usize),
    #[error("element {0} out of range")]
    OutOfRange(usize),
    #[error("not a lattice: {0}")]
    NotALattice(NotALattice),
    #[error("poset has no unique minimum and maximum")]
    NoUniqueExtremes,
}

/// Why a pair has no join (or meet).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotALattice {
    NoUpperBound {
        x: usize,
        y: usize,
    },
    /// `a` and `b` are incomparable minimal upper bounds of `x` and `y`.
    AmbiguousJoin {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
    },
    NoLowerBound {
        x: usize,
        y: usize,
    },
    AmbiguousMeet {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
    },
}

impl std::fmt::Display for NotALattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            NotALattice::NoUpperBound { x, y } => {
                write!(f, "{x} and {y} have no common upper bound")
            }
            NotALattice::AmbiguousJoin { x, y, a, b } => {
                write!(
                    f,
                    "{x} and {y} have incomparable minimal upper bounds {a} and {b}"
                )
            }
            NotALattice::NoLowerBound { x, y } => {
                write!(f, "{x} and {y} have no common lower bound")
            }
            NotALattice::AmbiguousMeet { x, y, a, b } => {
                write!(
                    f,
                    "{x} and {y} have incomparable maximal lower bounds {a} and {b}"
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FinitePoset {
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    topo: Vec<usize>,
    pos: Vec<usize>,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
}

impl FinitePoset {
    /// The order generated by `relations` (pairs `x < y`); need not be reduced.
    pub fn from_relations(
        n: usize,
        relations: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, LatticeError> {
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (x, y) in relations {
            if x >= n || y >= n {
                return Err(LatticeError::OutOfRange(x.max(y)));
            }
            if x == y {
                return Err(LatticeError::Cycle(x));
            }
            succ[x].push(y);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        for s in &succ {
            for &y in s {
                indeg[y] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(x) = queue.pop_front() {
            topo.push(x);
            for &y in &succ[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    queue.push_back(y);
                }
            }
        }
        if topo.len() < n {
            let stuck = (0..n).find(|&x| indeg[x] > 0).unwrap();
            return Err(LatticeError::Cycle(stuck));
        }
        let mut pos = vec![0; n];
        for (p, &x) in topo.iter().enumerate() {
            pos[x] = p;
        }

        let mut up = vec![FixedBitSet::with_capacity(n); n];
        let mut strict = vec![FixedBitSet::with_capacity(n); n];
        for &x in topo.iter().rev() {
            let mut s = FixedBitSet::with_capacity(n);
            for &y in &succ[x] {
                s.union_with(&up[y]);
            }
            let mut u = s.clone();
            u.insert(pos[x]);
            strict[x] = s;
            up[x] = u;
        }
        let mut upper = vec![Vec::new(); n];
        let mut lower = vec![Vec::new(); n];
        for x in 0..n {
            let mut covers = strict[x].clone();
            for &y in &succ[x] {
                covers.difference_with(&strict[y]);
            }
            for p in covers.ones() {
                upper[x].push(topo[p]);
                lower[topo[p]].push(x);
            }
        }
        for l in &mut lower {
            l.sort_unstable();
        }
        for u in &mut upper {
            u.sort_unstable();
        }
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for &x in &topo {
            let mut d = FixedBitSet::with_capacity(n);
            d.insert(pos[x]);
            for &l in &lower[x] {
                d.union_with(&down[l]);
            }
            down[x] = d;
        }
        Ok(FinitePoset {
            upper,
            lower,
            topo,
            pos,
            up,
            down,
        })
    }

    /// The poset on `0..n` with `x ≤ y` iff `leq(x, y)`; `leq` must be a partial order.
    pub fn from_leq(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self, LatticeError> {
        let mut rel = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && leq(x, y) {
                    rel.push((x, y));
                }
            }
        }
        Self::from_relations(n, rel)
    }

    pub fn chain(len: usize) -> Self {
        Self::from_relations(len, (1..len).map(|i| (i - 1, i))).unwrap()
    }

    /// Subsets of a `k`-element set ordered by inclusion; element `m` is the subset with bitmask `m`.
    pub fn boolean(k: u32) -> Self {
        let n = 1usize << k;
        let rel = (0..n).flat_map(|m| {
            (0..k)
                .filter(move |b| m & (1 << b) == 0)
                .map(move |b| (m, m | (1 << b)))
        });
        Self::from_relations(n, rel).unwrap()
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower[x]
    }

    /// All cover pairs `(x, y)`, `x ≺ y`, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|x| self.upper[x].iter().map(move |&y| (x, y)))
            .collect()
    }

    pub fn cover_count(&self) -> usize {
        self.upper.iter().map(Vec::len).sum()
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(self.pos[y])
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.lower[x].is_empty())
            .collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.upper[x].is_empty())
            .collect()
    }

    pub fn bottom(&self) -> Option<usize> {
        match self.minimal_elements()[..] {
            [b] => Some(b),
            _ => None,
        }
    }

    pub fn top(&self) -> Option<usize> {
        match self.maximal_elements()[..] {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn up_set_size(&self, x: usize) -> usize {
        self.up[x].count_ones(..)
    }

    pub fn down_set_size(&self, x: usize) -> usize {
        self.down[x].count_ones(..)
    }

    /// The same elements with the order reversed.
    pub fn dual(&self) -> FinitePoset {
        let topo: Vec<usize> = self.topo.iter().rev().copied().collect();
        let n = self.len();
        let mut pos = vec![0; n];
        for (p, &x) in topo.iter().enumerate() {
            pos[x] = p;
        }
        let remap = |s: &FixedBitSet| {
            let mut out = FixedBitSet::with_capacity(n);
            for p in s.ones() {
                out.insert(n - 1 - p);
            }
            out
        };
        FinitePoset {
            upper: self.lower.clone(),
            lower: self.upper.clone(),
            topo,
            pos,
            up: self.down.iter().map(remap).collect(),
            down: self.up.iter().map(remap).collect(),
        }
    }

    /// The sub-poset induced on `elements`; element `i` of the result is `elements[i]`.
    pub fn induced(&self, elements: &[usize]) -> FinitePoset {
        Self::from_leq(elements.len(), |i, j| self.leq(elements[i], elements[j])).unwrap()
    }

    /// The least common bound of `x` and `y` when `upward`, else the greatest.
    /// On failure returns the extremal candidate found and a second, incomparable one.
    fn bound(&self, x: usize, y: usize, upward: bool) -> Result<usize, Option<(usize, usize)>> {
        let sets = if upward { &self.up } else { &self.down };
        let mut common = sets[x].clone();
        common.intersect_with(&sets[y]);
        let pick = |s: &FixedBitSet| {
            if upward {
                s.ones().next()
            } else {
                s.ones().next_back()
            }
        };
        let Some(p) = pick(&common) else {
            return Err(None);
        };
        let z = self.topo[p];
        common.difference_with(&sets[z]);
        match pick(&common) {
            None => Ok(z),
            Some(q) => Err(Some((z, self.topo[q]))),
        }
    }

    pub fn join(&self, x: usize, y: usize) -> Result<usize, NotALattice> {
        self.bound(x, y, true).map_err(|e| match e {
            None => NotALattice::NoUpperBound { x, y },
            Some((a, b)) => NotALattice::AmbiguousJoin { x, y, a, b },
        })
    }

    pub fn meet(&self, x: usize, y: usize) -> Result<usize, NotALattice> {
        self.bound(x, y, false).map_err(|e| match e {
            None => NotALattice::NoLowerBound { x, y },
            Some((a, b)) => NotALattice::AmbiguousMeet { x, y, a, b },
        })
    }

    /// Join of `x` with every element of `others`.
    pub fn join_all(&self, x: usize, others: &[usize]) -> Result<usize, NotALattice> {
        others.iter().try_fold(x, |acc, &y| self.join(acc, y))
    }

    /// First pair without a join or meet, if any.
    pub fn lattice_witness(&self) -> Option<NotALattice> {
        let n = self.len();
        for x in 0..n {
            for y in x + 1..n {
                if let Err(w) = self.join(x, y) {
                    return Some(w);
                }
                if let Err(w) = self.meet(x, y) {
                    return Some(w);
                }
            }
        }
        None
    }

    pub fn is_lattice(&self) -> bool {
        !self.is_empty() && self.lattice_witness().is_none()
    }

    /// Full join and meet tables, row-major.
    pub fn joins_meets(&self) -> Result<JoinMeetTables, LatticeError> {
        let n = self.len();
        let mut join = vec![0u32; n * n];
        let mut meet = vec![0u32; n * n];
        for x in 0..n {
            for y in x..n {
                let j = self.join(x, y).map_err(LatticeError::NotALattice)? as u32;
                let m = self.meet(x, y).map_err(LatticeError::NotALattice)? as u32;
                join[x * n + y] = j;
                join[y * n + x] = j;
                meet[x * n + y] = m;
                meet[y * n + x] = m;
            }
        }
        Ok(JoinMeetTables { n, join, meet })
    }

    /// Whether all maximal chains from the minimum to the maximum have the same length.
    pub fn is_ranked(&self) -> Result<bool, LatticeError> {
        let (Some(_), Some(_)) = (self.bottom(), self.top()) else {
            return Err(LatticeError::NoUniqueExtremes);
        };
        let (short, long) = self.path_lengths();
        Ok(short == long)
    }

    /// Shortest and longest cover-path length from a minimal element to each element.
    fn path_lengths(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut short = vec![0; n];
        let mut long = vec![0; n];
        for &x in &self.topo {
            if let Some(s) = self.lower[x].iter().map(|&l| short[l] + 1).min() {
                short[x] = s;
                long[x] = self.lower[x].iter().map(|&l| long[l] + 1).max().unwrap();
            }
        }
        (short, long)
    }

    /// Length of every element's longest chain down to a minimal element.
    pub fn heights(&self) -> Vec<usize> {
        self.path_lengths().1
    }

    /// `Some(k)` when the poset is isomorphic to the subsets of a `k`-element set.
    pub fn is_hypercube(&self) -> Option<u32> {
        let bottom = self.bottom()?;
        let all: Vec<usize> = (0..self.len()).collect();
        self.interval_is_hypercube(bottom, &all)
    }

    /// `elements` must all lie above `x`.
    fn interval_is_hypercube(&self, x: usize, elements: &[usize]) -> Option<u32> {
        let atoms: Vec<usize> = self.upper[x]
            .iter()
            .copied()
            .filter(|a| elements.contains(a))
            .collect();
        let k = atoms.len() as u32;
        if k >= usize::BITS || elements.len() != 1usize << k {
            return None;
        }
        let masks: Vec<u64> = elements
            .iter()
            .map(|&z| {
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| self.leq(a, z))
                    .fold(0u64, |m, (i, _)| m | 1 << i)
            })
            .collect();
        let mut sorted = masks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != masks.len() {
            return None;
        }
        for (i, &z) in elements.iter().enumerate() {
            for (j, &w) in elements.iter().enumerate() {
                let subset = masks[i] & !masks[j] == 0;
                if subset != self.leq(z, w) {
                    return None;
                }
            }
        }
        Some(k)
    }

    /// The interval `[x, y]`.
    pub fn interval(&self, x: usize, y: usize) -> Vec<usize> {
        let mut s = self.up[x].clone();
        s.intersect_with(&self.down[y]);
        let mut out: Vec<usize> = s.ones().map(|p| self.topo[p]).collect();
        out.sort_unstable();
        out
    }

    /// Upper locally distributive: for every `x` the interval from `x` to the
    /// join of its upper covers is a hypercube. Returns the first failing `x`.
    pub fn uld_witness(&self) -> Result<Option<usize>, LatticeError> {
        if let Some(w) = self.lattice_witness() {
            return Err(LatticeError::NotALattice(w));
        }
        for x in 0..self.len() {
            let j = self
                .join_all(x, &self.upper[x])
                .map_err(LatticeError::NotALattice)?;
            if self
                .interval_is_hypercube(x, &self.interval(x, j))
                .is_none()
            {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    pub fn is_uld(&self) -> Result<bool, LatticeError> {
        Ok(self.uld_witness()?.is_none())
    }

    pub fn is_lld(&self) -> Result<bool, LatticeError> {
        self.dual().is_uld()
    }

    /// First triple violating `x ∨ (y ∧ z) = (x ∨ y) ∧ (x ∨ z)`.
    pub fn distributivity_witness(&self) -> Result<Option<(usize, usize, usize)>, LatticeError> {
        let t = self.joins_meets()?;
        let n = self.len();
        for x in 0..n {
            for y in 0..n {
                let xy = t.join(x, y);
                for z in y + 1..n {
                    if t.join(x, t.meet(y, z)) != t.meet(xy, t.join(x, z)) {
                        return Ok(Some((x, y, z)));
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn is_distributive(&self) -> Result<bool, LatticeError> {
        Ok(self.distributivity_witness()?.is_none())
    }

    fn signature(&self, x: usize, heights: &[usize]) -> (usize, usize, usize, usize, usize) {
        (
            heights[x],
            self.upper[x].len(),
            self.lower[x].len(),
            self.up_set_size(x),
            self.down_set_size(x),
        )
    }

    /// An order isomorphism `φ` with `x ≤ y ⟺ φ(x) ≤ φ(y)`, as the vector of images.
    pub fn isomorphic(&self, other: &FinitePoset) -> Option<Vec<usize>> {
        let n = self.len();
        if n != other.len() || self.cover_count() != other.cover_count() {
            return None;
        }
        let (hp, hq) = (self.heights(), other.heights());
        let sp: Vec<_> = (0..n).map(|x| self.signature(x, &hp)).collect();
        let sq: Vec<_> = (0..n).map(|x| other.signature(x, &hq)).collect();
        let mut counts: BTreeMap<_, isize> = BTreeMap::new();
        for s in &sp {
            *counts.entry(*s).or_default() += 1;
        }
        for s in &sq {
            *counts.entry(*s).or_default() -= 1;
        }
        if counts.values().any(|&c| c != 0) {
            return None;
        }
        let minimal_q = other.minimal_elements();
        let mut search = IsoSearch {
            p: self,
            q: other,
            sp: &sp,
            sq: &sq,
            minimal_q: &minimal_q,
            image: vec![usize::MAX; n],
            used: vec![false; n],
        };
        if search.assign(0) {
            Some(search.image)
        } else {
            None
        }
    }
}

struct IsoSearch<'a> {
    p: &'a FinitePoset,
    q: &'a FinitePoset,
    sp: &'a [(usize, usize, usize, usize, usize)],
    sq: &'a [(usize, usize, usize, usize, usize)],
    minimal_q: &'a [usize],
    image: Vec<usize>,
    used: Vec<bool>,
}

impl IsoSearch<'_> {
    fn assign(&mut self, k: usize) -> bool {
        if k == self.p.len() {
            return true;
        }
        let x = self.p.topo[k];
        let lower = &self.p.lower[x];
        let candidates: Vec<usize> = match lower.first() {
            None => self.minimal_q.to_vec(),
            Some(&l) => self.q.upper[self.image[l]].clone(),
        };
        for c in candidates {
            if self.used[c] || self.sq[c] != self.sp[x] {
                continue;
            }
            if !lower
                .iter()
                .all(|&l| self.q.lower[c].binary_search(&self.image[l]).is_ok())
            {
                continue;
            }
            self.image[x] = c;
            self.used[c] = true;
            if self.assign(k + 1) {
                return true;
            }
            self.used[c] = false;
            self.image[x] = usize::MAX;
        }
        false
    }
}

#[derive(Debug, Clone)]
pub struct JoinMeetTables {
    n: usize,
    join: Vec<u32>,
    meet: Vec<u32>,
}

impl JoinMeetTables {
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.n + y] as usize
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n + y] as usize
    }
}

/// Every order-theoretic property of one poset, with witnesses for failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeReport {
    pub elements: usize,
    pub covers: usize,
    pub lattice: bool,
    pub ranked: bool,
    pub uld: bool,
    pub lld: bool,
    pub distributive: bool,
    pub hypercube: bool,
    pub hypercube_dimension: Option<u32>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub counterexamples: BTreeMap<String, serde_json::Value>,
}

impl LatticeReport {
    pub fn of(p: &FinitePoset) -> LatticeReport {
        let mut counterexamples = BTreeMap::new();
        let lattice_witness = p.lattice_witness();
        let lattice = !p.is_empty() && lattice_witness.is_none();
        if let Some(w) = lattice_witness {
            counterexamples.insert("lattice".into(), serde_json::to_value(w).unwrap());
        }
        let ranked = p.is_ranked().unwrap_or(false);
        if !ranked {
            counterexamples.insert("ranked".into(), serde_json::json!(p.ranking_witness()));
        }
        let (mut uld, mut lld, mut distributive) = (false, false, false);
        if lattice {
            match p.uld_witness() {
                Ok(None) => uld = true,
                Ok(Some(x)) => {
                    counterexamples.insert("uld".into(), serde_json::json!({ "element": x }));
                }
                Err(_) => {}
            }
            match p.dual().uld_witness() {
                Ok(None) => lld = true,
                Ok(Some(x)) => {
                    counterexamples.insert("lld".into(), serde_json::json!({ "element": x }));
                }
                Err(_) => {}
            }
            match p.distributivity_witness() {
                Ok(None) => distributive = true,
                Ok(Some((x, y, z))) => {
                    counterexamples.insert(
                        "distributive".into(),
                        serde_json::json!({ "x": x, "y": y, "z": z }),
                    );
                }
                Err(_) => {}
            }
        }
        let dim = p.is_hypercube();
        LatticeReport {
            elements: p.len(),
            covers: p.cover_count(),
            lattice,
            ranked,
            uld,
            lld,
            distributive,
            hypercube: dim.is_some(),
            hypercube_dimension: dim,
            counterexamples,
        }
    }
}

impl FinitePoset {
    /// An element reachable from the minimum by cover paths of different lengths.
    fn ranking_witness(&self) -> Option<usize> {
        let (short, long) = self.path_lengths();
        (0..self.len()).find(|&x| short[x] != long[x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond_m3() -> FinitePoset {
        FinitePoset::from_relations(5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).unwrap()
    }

    fn pentagon() -> FinitePoset {
        // 0 < 1 < 2 < 4, 0 < 3 < 4
        FinitePoset::from_relations(5, [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).unwrap()
    }

    fn bowtie() -> FinitePoset {
        FinitePoset::from_relations(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
    }

    #[test]
    fn transitive_reduction() {
        let p = FinitePoset::from_relations(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(p.covers(), vec![(0, 1), (1, 2)]);
        assert!(p.leq(0, 2));
        assert!(!p.leq(2, 0));
    }

    #[test]
    fn cycle_is_rejected() {
        assert!(matches!(
            FinitePoset::from_relations(2, [(0, 1), (1, 0)]),
            Err(LatticeError::Cycle(_))
        ));
    }

    #[test]
    fn square_is_a_lattice() {
        let p = FinitePoset::boolean(2);
        assert!(p.is_lattice());
        assert_eq!(p.join(1, 2), Ok(3));
        assert_eq!(p.meet(1, 2), Ok(0));
    }

    #[test]
    fn bowtie_is_not_a_lattice() {
        let p = bowtie();
        assert!(!p.is_lattice());
        let w = p.lattice_witness().unwrap();
        assert!(matches!(
            w,
            NotALattice::NoUpperBound { .. } | NotALattice::AmbiguousJoin { .. }
        ));
        assert_eq!(
            p.join(0, 1),
            Err(NotALattice::AmbiguousJoin {
                x: 0,
                y: 1,
                a: 2,
                b: 3
            })
        );
    }

    #[test]
    fn ranking() {
        assert_eq!(FinitePoset::chain(4).is_ranked(), Ok(true));
        assert_eq!(pentagon().is_ranked(), Ok(false));
        assert_eq!(bowtie().is_ranked(), Err(LatticeError::NoUniqueExtremes));
    }

    #[test]
    fn hypercubes() {
        assert_eq!(FinitePoset::chain(1).is_hypercube(), Some(0));
        assert_eq!(FinitePoset::chain(2).is_hypercube(), Some(1));
        assert_eq!(FinitePoset::chain(3).is_hypercube(), None);
        assert_eq!(FinitePoset::boolean(3).is_hypercube(), Some(3));
        assert_eq!(diamond_m3().is_hypercube(), None);
    }

    #[test]
    fn local_distributivity() {
        assert_eq!(pentagon().is_uld(), Ok(false));
        assert_eq!(FinitePoset::boolean(3).is_uld(), Ok(true));
        assert_eq!(FinitePoset::boolean(3).is_lld(), Ok(true));
        assert_eq!(diamond_m3().is_distributive(), Ok(false));
        assert_eq!(FinitePoset::boolean(3).is_distributive(), Ok(true));
        assert!(matches!(
            bowtie().is_uld(),
            Err(LatticeError::NotALattice(_))
        ));
    }

    #[test]
    fn isomorphism() {
        let p = FinitePoset::boolean(2);
        let q = FinitePoset::from_relations(4, [(3, 0), (3, 2), (0, 1), (2, 1)]).unwrap();
        let phi = p.isomorphic(&q).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(p.leq(x, y), q.leq(phi[x], phi[y]));
            }
        }
        assert!(FinitePoset::chain(3)
            .isomorphic(&FinitePoset::boolean(2))
            .is_none());
        assert!(FinitePoset::chain(4)
            .isomorphic(&FinitePoset::boolean(2))
            .is_none());
    }

    #[test]
    fn dual_swaps_covers() {
        let p = pentagon();
        let d = p.dual();
        assert_eq!(d.upper_covers(4), p.lower_covers(4));
        assert!(d.leq(4, 0));
        assert_eq!(d.meet(1, 3), Ok(4));
    }

    #[test]
    fn report_of_a_single_point() {
        let r = LatticeReport::of(&FinitePoset::chain(1));
        assert!(r.lattice && r.ranked && r.uld && r.lld && r.distributive && r.hypercube);
        assert_eq!(r.hypercube_dimension, Some(0));
        assert!(r.counterexamples.is_empty());
    }
}
