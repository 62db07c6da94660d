//! The canonical partial order for a given ε.
//!
//! Whenever `d(x,y) > max{d(x,z), d(z,y)} + 2ε`, every ε-compatible order
//! places `z` between `x` and `y`. Starting from one seed pair, these
//! betweenness facts are propagated together with transitivity until a
//! fixpoint is reached or some pair is forced both ways.

use std::collections::VecDeque;

use crate::dissimilarity::Dissimilarity;
use crate::thresholds::{Tolerance, BETWEENNESS};

/// State of an ordered pair in a [`PartialOrderRelation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairState {
    Before,
    After,
    Unknown,
}

/// A strict order relation on `0..n` stored as a dense boolean matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrderRelation {
    n: usize,
    before: Vec<bool>,
}

impl PartialOrderRelation {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            before: vec![false; n * n],
        }
    }

    /// The chain `order[0] ≼ order[1] ≼ …`.
    pub fn from_chain(n: usize, order: &[usize]) -> Self {
        let mut rel = Self::empty(n);
        for (a, &x) in order.iter().enumerate() {
            for &y in &order[a + 1..] {
                rel.before[x * n + y] = true;
            }
        }
        rel
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `x ≼ y` with `x ≠ y`.
    #[inline]
    pub fn precedes(&self, x: usize, y: usize) -> bool {
        self.before[x * self.n + y]
    }

    #[inline]
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.precedes(x, y) || self.precedes(y, x)
    }

    pub fn state(&self, x: usize, y: usize) -> PairState {
        if self.precedes(x, y) {
            PairState::Before
        } else if self.precedes(y, x) {
            PairState::After
        } else {
            PairState::Unknown
        }
    }

    pub fn is_total(&self) -> bool {
        (0..self.n).all(|x| (x + 1..self.n).all(|y| self.comparable(x, y)))
    }

    /// Unordered pairs `(x, y)`, `x < y`, left undecided.
    pub fn incomparable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if !self.comparable(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// All ordered pairs `(x, y)` with `x ≼ y`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in 0..self.n {
                if self.precedes(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.before.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.before.iter().any(|&b| b)
    }

    pub fn dual(&self) -> Self {
        let mut out = Self::empty(self.n);
        for x in 0..self.n {
            for y in 0..self.n {
                out.before[y * self.n + x] = self.before[x * self.n + y];
            }
        }
        out
    }

    /// Whether every relation of `self` also holds in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.n == other.n && self.before.iter().zip(&other.before).all(|(&a, &b)| !a || b)
    }

    /// Whether the total order `order` (a sequence of all elements) extends
    /// this relation.
    pub fn extended_by(&self, order: &[usize]) -> bool {
        let mut pos = vec![0; self.n];
        for (r, &x) in order.iter().enumerate() {
            pos[x] = r;
        }
        self.pairs().into_iter().all(|(x, y)| pos[x] < pos[y])
    }

    /// Elements sorted along the relation; only meaningful when total.
    pub fn linear_order(&self) -> Vec<usize> {
        let mut elems: Vec<usize> = (0..self.n).collect();
        elems.sort_by_key(|&x| (0..self.n).filter(|&y| self.precedes(y, x)).count());
        elems
    }
}

/// `z` must lie between `x` and `y` (`x < y` by id).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BetweennessTriple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// Every triple with `d(x,y) > max{d(x,z), d(z,y)} + 2ε`.
pub fn betweenness_triples(d: &Dissimilarity, eps: f64) -> Vec<BetweennessTriple> {
    let tol = Tolerance::new(eps);
    let n = d.n();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let dxy = d.get(x, y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                if tol.much_greater(dxy, d.get(x, z).max(d.get(z, y)), BETWEENNESS) {
                    out.push(BetweennessTriple { x, y, z });
                }
            }
        }
    }
    out
}

/// Closing the relation forced a pair in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contradiction {
    pub x: usize,
    pub y: usize,
}

impl std::fmt::Display for Contradiction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} and {} forced in both directions", self.x, self.y)
    }
}

/// Incremental closure engine: new pairs may be asserted at any time and
/// the relation is brought back to the fixpoint after each assertion.
#[derive(Clone, Debug)]
pub struct CanonicalClosure {
    rel: PartialOrderRelation,
    triples: Vec<BetweennessTriple>,
    // triple indices keyed by unordered pair x * n + y, x < y
    by_pair: Vec<Vec<u32>>,
    queue: VecDeque<(usize, usize)>,
}

impl CanonicalClosure {
    pub fn new(d: &Dissimilarity, eps: f64) -> Self {
        let n = d.n();
        let triples = betweenness_triples(d, eps);
        let mut by_pair = vec![Vec::new(); n * n];
        for (t, tr) in triples.iter().enumerate() {
            for (a, b) in [(tr.x, tr.y), (tr.x, tr.z), (tr.z, tr.y)] {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                by_pair[a * n + b].push(t as u32);
            }
        }
        Self {
            rel: PartialOrderRelation::empty(n),
            triples,
            by_pair,
            queue: VecDeque::new(),
        }
    }

    pub fn relation(&self) -> &PartialOrderRelation {
        &self.rel
    }

    pub fn into_relation(self) -> PartialOrderRelation {
        self.rel
    }

    pub fn triples(&self) -> &[BetweennessTriple] {
        &self.triples
    }

    /// Asserts `x ≼ y` and closes.
    pub fn assert(&mut self, x: usize, y: usize) -> Result<(), Contradiction> {
        self.insert(x, y)?;
        self.propagate()
    }

    /// Asserts every pair, then closes once.
    pub fn assert_all(
        &mut self,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(), Contradiction> {
        for (x, y) in pairs {
            self.insert(x, y)?;
        }
        self.propagate()
    }

    // Adds x ≼ y together with its transitive consequences and queues every
    // newly decided pair.
    fn insert(&mut self, x: usize, y: usize) -> Result<(), Contradiction> {
        let n = self.rel.n;
        if x == y || self.rel.precedes(y, x) {
            return Err(Contradiction { x, y });
        }
        if self.rel.precedes(x, y) {
            return Ok(());
        }
        let lower: Vec<usize> = std::iter::once(x)
            .chain((0..n).filter(|&a| self.rel.precedes(a, x)))
            .collect();
        let upper: Vec<usize> = std::iter::once(y)
            .chain((0..n).filter(|&b| self.rel.precedes(y, b)))
            .collect();
        for &a in &lower {
            for &b in &upper {
                if a == b || self.rel.precedes(b, a) {
                    return Err(Contradiction { x: a, y: b });
                }
                if !self.rel.precedes(a, b) {
                    self.rel.before[a * n + b] = true;
                    self.queue.push_back((a, b));
                }
            }
        }
        Ok(())
    }

    fn propagate(&mut self) -> Result<(), Contradiction> {
        let n = self.rel.n;
        while let Some((a, b)) = self.queue.pop_front() {
            let key = if a < b { a * n + b } else { b * n + a };
            for k in 0..self.by_pair[key].len() {
                let t = self.triples[self.by_pair[key][k] as usize];
                for (p, q) in self.implied(t) {
                    self.insert(p, q)?;
                }
            }
        }
        Ok(())
    }

    // Consequences of "z between x and y" under the current relation.
    fn implied(&self, t: BetweennessTriple) -> Vec<(usize, usize)> {
        let BetweennessTriple { x, y, z } = t;
        let r = &self.rel;
        let mut out = Vec::new();
        if r.precedes(x, z) || r.precedes(z, y) || r.precedes(x, y) {
            out.push((x, z));
            out.push((z, y));
        }
        if r.precedes(z, x) || r.precedes(y, z) || r.precedes(y, x) {
            out.push((y, z));
            out.push((z, x));
        }
        out
    }
}

/// Canonical order seeded by `seed.0 ≼ seed.1`, or the contradiction that
/// shows no ε-compatible order exists.
pub fn build_canonical_order(
    d: &Dissimilarity,
    eps: f64,
    seed: (usize, usize),
) -> Result<PartialOrderRelation, Contradiction> {
    let mut closure = CanonicalClosure::new(d, eps);
    closure.assert(seed.0, seed.1)?;
    Ok(closure.into_relation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Dissimilarity {
        Dissimilarity::from_fn(n, |x, y| (y - x) as f64).unwrap()
    }

    #[test]
    fn triples_on_line() {
        let t = betweenness_triples(&line(4), 0.0);
        for (x, y, z) in [(0, 3, 1), (0, 3, 2), (1, 3, 2), (0, 2, 1)] {
            assert!(t.contains(&BetweennessTriple { x, y, z }), "{x} {y} {z}");
        }
        assert!(betweenness_triples(&line(4), 1.5).is_empty());
        assert!(betweenness_triples(&line(2), 0.0).is_empty());
    }

    #[test]
    fn line_closes_to_total_order() {
        let rel = build_canonical_order(&line(4), 0.0, (0, 1)).unwrap();
        assert!(rel.is_total());
        assert_eq!(rel.linear_order(), vec![0, 1, 2, 3]);
        assert!(rel.incomparable_pairs().is_empty());
    }

    #[test]
    fn large_eps_keeps_only_the_seed() {
        let rel = build_canonical_order(&line(3), 1.0, (0, 1)).unwrap();
        assert_eq!(rel.pairs(), vec![(0, 1)]);
        assert!(!rel.is_total());
        assert_eq!(rel.incomparable_pairs(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn single_triple_places_middle() {
        let d = Dissimilarity::from_upper(3, &[10.0, 0.0, 0.0]).unwrap();
        let rel = build_canonical_order(&d, 0.0, (0, 1)).unwrap();
        assert!(rel.precedes(0, 2) && rel.precedes(2, 1) && rel.precedes(0, 1));
    }

    #[test]
    fn contradiction_is_reported() {
        // {0,1} and {2,3} are both far pairs, each forcing the other two
        // elements between its ends.
        let d = Dissimilarity::from_upper(4, &[10.0, 1.0, 1.0, 1.0, 1.0, 10.0]).unwrap();
        assert_eq!(betweenness_triples(&d, 0.0).len(), 4);
        assert!(build_canonical_order(&d, 0.0, (0, 1)).is_err());
    }

    #[test]
    fn closure_is_a_fixpoint() {
        let d = line(6);
        let mut c = CanonicalClosure::new(&d, 0.0);
        c.assert(2, 3).unwrap();
        let before = c.relation().clone();
        for (x, y) in before.pairs() {
            c.assert(x, y).unwrap();
        }
        assert_eq!(&before, c.relation());
    }
}
