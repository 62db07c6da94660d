//! Maximal chain, holes and segments of the canonical order.
//!
//! The chain is stored with two virtual endpoints. Slot `0` is the virtual
//! left end, slots `1..=r` are the real chain elements and slot `r + 1` is
//! the virtual right end. Hole `k` (for `k` in `0..=r`) lies between slots
//! `k` and `k + 1`. Virtual endpoints carry no distances: every metric test
//! only looks at real elements.

use crate::canonical::{CanonicalClosure, Contradiction, PartialOrderRelation};
use crate::dissimilarity::Dissimilarity;
use crate::order_fit::nested_gap_within;
use crate::thresholds::{Tolerance, HOLE_SIZE};

/// The holes where an off-chain element may go: slots `lo < hi` are the
/// nearest chain elements below and above it, so its holes are
/// `lo..hi` and its bounding holes are `lo` and `hi - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub element: usize,
    pub lo: usize,
    pub hi: usize,
    /// Midrange of the distances from the element to the chain elements
    /// strictly inside the segment.
    pub midrange: f64,
}

impl Segment {
    pub fn holes(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }

    pub fn hole_count(&self) -> usize {
        self.hi - self.lo
    }

    pub fn left_bounding(&self) -> usize {
        self.lo
    }

    pub fn right_bounding(&self) -> usize {
        self.hi - 1
    }

    pub fn bounds(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }
}

/// Mutual position of two segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    /// Identical segments.
    Same,
    Disjoint,
    /// Share at least two holes, neither contains the other.
    Overlapping,
    /// Share exactly one hole.
    SharedHole,
    /// One segment is a proper part of the other; `first_inside` tells
    /// whether the first argument is the inner one.
    Nested { first_inside: bool },
}

/// Classifies two segments given as slot bounds `(lo, hi)`.
pub fn classify_segments(a: (usize, usize), b: (usize, usize)) -> PairClass {
    if a == b {
        return PairClass::Same;
    }
    let shared = a.1.min(b.1) as isize - a.0.max(b.0) as isize;
    if shared <= 0 {
        PairClass::Disjoint
    } else if b.0 <= a.0 && a.1 <= b.1 {
        PairClass::Nested { first_inside: true }
    } else if a.0 <= b.0 && b.1 <= a.1 {
        PairClass::Nested { first_inside: false }
    } else if shared == 1 {
        PairClass::SharedHole
    } else {
        PairClass::Overlapping
    }
}

/// A longest chain of `rel` (ties broken towards small ids).
pub fn longest_chain(rel: &PartialOrderRelation) -> Vec<usize> {
    let n = rel.n();
    if n == 0 {
        return Vec::new();
    }
    let mut topo: Vec<usize> = (0..n).collect();
    topo.sort_by_key(|&x| ((0..n).filter(|&y| rel.precedes(y, x)).count(), x));
    let mut len = vec![1usize; n];
    let mut prev = vec![usize::MAX; n];
    for (i, &x) in topo.iter().enumerate() {
        for &p in &topo[..i] {
            if rel.precedes(p, x) && (len[p] + 1 > len[x] || (len[p] + 1 == len[x] && p < prev[x])) {
                len[x] = len[p] + 1;
                prev[x] = p;
            }
        }
    }
    let mut end = 0;
    for x in 1..n {
        if len[x] > len[end] {
            end = x;
        }
    }
    let mut chain = vec![end];
    while prev[*chain.last().unwrap()] != usize::MAX {
        chain.push(prev[*chain.last().unwrap()]);
    }
    chain.reverse();
    chain
}

/// Chain, holes and segments for one relation at one ε.
#[derive(Clone, Debug)]
pub struct ChainContext<'a> {
    d: &'a Dissimilarity,
    tol: Tolerance,
    chain: Vec<usize>,
    segments: Vec<Segment>,
    segment_of: Vec<Option<usize>>,
}

impl<'a> ChainContext<'a> {
    /// Builds the context on a longest chain of `rel`.
    pub fn new(d: &'a Dissimilarity, eps: f64, rel: &PartialOrderRelation) -> Self {
        Self::with_chain(d, eps, rel, longest_chain(rel))
    }

    /// Builds the context on a given chain (must be a maximal chain of `rel`).
    pub fn with_chain(d: &'a Dissimilarity, eps: f64, rel: &PartialOrderRelation, chain: Vec<usize>) -> Self {
        let n = d.n();
        let r = chain.len();
        let mut on_chain = vec![false; n];
        for &a in &chain {
            on_chain[a] = true;
        }
        let mut segments = Vec::new();
        let mut segment_of = vec![None; n];
        for x in (0..n).filter(|&x| !on_chain[x]) {
            let lo = (1..=r).rev().find(|&s| rel.precedes(chain[s - 1], x)).unwrap_or(0);
            let hi = (1..=r).find(|&s| rel.precedes(x, chain[s - 1])).unwrap_or(r + 1);
            debug_assert!(hi >= lo + 2, "chain is not maximal around {x}");
            let inner: Vec<f64> = (lo + 1..hi).map(|s| d.get(x, chain[s - 1])).collect();
            segment_of[x] = Some(segments.len());
            segments.push(Segment {
                element: x,
                lo,
                hi,
                midrange: midrange(&inner),
            });
        }
        Self {
            d,
            tol: Tolerance::new(eps),
            chain,
            segments,
            segment_of,
        }
    }

    pub fn dissimilarity(&self) -> &Dissimilarity {
        self.d
    }

    pub fn eps(&self) -> f64 {
        self.tol.eps
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Real chain elements, in order.
    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    /// Number of holes, `r + 1`.
    pub fn hole_count(&self) -> usize {
        self.chain.len() + 1
    }

    /// Real element at `slot`, `None` for the virtual ends.
    pub fn slot(&self, slot: usize) -> Option<usize> {
        (1..=self.chain.len()).contains(&slot).then(|| self.chain[slot - 1])
    }

    /// Size `d(a_k, a_{k+1})` of hole `k`, undefined next to a virtual end.
    pub fn hole_size(&self, k: usize) -> Option<f64> {
        Some(self.d.get(self.slot(k)?, self.slot(k + 1)?))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn offchain(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments.iter().map(|s| s.element)
    }

    pub fn segment(&self, x: usize) -> Option<&Segment> {
        self.segment_of[x].map(|i| &self.segments[i])
    }

    fn seg(&self, x: usize) -> &Segment {
        self.segment(x).expect("element is on the chain")
    }

    pub fn midrange(&self, x: usize) -> f64 {
        self.seg(x).midrange
    }

    pub fn classify_pair(&self, x: usize, y: usize) -> PairClass {
        classify_segments(self.seg(x).bounds(), self.seg(y).bounds())
    }

    // Chain with x inserted in hole k.
    fn with_one(&self, x: usize, k: usize) -> Vec<usize> {
        let mut seq = Vec::with_capacity(self.chain.len() + 1);
        seq.extend_from_slice(&self.chain[..k]);
        seq.push(x);
        seq.extend_from_slice(&self.chain[k..]);
        seq
    }

    /// Whether placing `x` in hole `k` keeps the chain plus `x` ε-compatible.
    pub fn is_admissible_hole(&self, x: usize, k: usize) -> bool {
        debug_assert!(self.seg(x).holes().contains(&k));
        nested_gap_within(self.d, &self.with_one(x, k), self.tol.gap_limit(1.0))
    }

    /// The `x`-admissible holes of `x`'s segment.
    pub fn admissible_holes(&self, x: usize) -> Vec<usize> {
        self.seg(x).holes().filter(|&k| self.is_admissible_hole(x, k)).collect()
    }

    /// Whether `{k, k2}` is an `(x, y, c)`-admissible pair of holes. When
    /// both share a hole, either relative order of `x` and `y` may be used.
    pub fn admissible_pair(&self, x: usize, k: usize, y: usize, k2: usize, c: f64) -> bool {
        self.is_admissible_hole(x, k) && self.is_admissible_hole(y, k2) && self.pair_fits(x, k, y, k2, c)
    }

    fn pair_fits(&self, x: usize, k: usize, y: usize, k2: usize, c: f64) -> bool {
        let limit = self.tol.gap_limit(c);
        let mut seq = Vec::with_capacity(self.chain.len() + 2);
        let build = |seq: &mut Vec<usize>, first: (usize, usize), second: (usize, usize)| {
            seq.clear();
            seq.extend_from_slice(&self.chain[..first.1]);
            seq.push(first.0);
            seq.extend_from_slice(&self.chain[first.1..second.1]);
            seq.push(second.0);
            seq.extend_from_slice(&self.chain[second.1..]);
        };
        if k == k2 {
            build(&mut seq, (x, k), (y, k2));
            if nested_gap_within(self.d, &seq, limit) {
                return true;
            }
            build(&mut seq, (y, k2), (x, k));
            nested_gap_within(self.d, &seq, limit)
        } else {
            let (a, b) = if k < k2 { ((x, k), (y, k2)) } else { ((y, k2), (x, k)) };
            build(&mut seq, a, b);
            nested_gap_within(self.d, &seq, limit)
        }
    }

    /// Holes of `x` that are `x`-admissible and, for every other off-chain
    /// `y`, combine with some `y`-admissible hole into an `(x, y, 1)`-
    /// admissible pair.
    pub fn compute_ah(&self, x: usize) -> Vec<usize> {
        let admissible: Vec<Vec<usize>> = self.segments.iter().map(|s| self.admissible_holes(s.element)).collect();
        self.seg(x)
            .holes()
            .filter(|&k| self.in_ah(x, k, &admissible))
            .collect()
    }

    fn in_ah(&self, x: usize, k: usize, admissible: &[Vec<usize>]) -> bool {
        let ix = self.segment_of[x].expect("off-chain");
        if !admissible[ix].contains(&k) {
            return false;
        }
        self.segments.iter().enumerate().all(|(iy, sy)| {
            iy == ix || admissible[iy].iter().any(|&k2| self.pair_fits(x, k, sy.element, k2, 1.0))
        })
    }

    /// Order relations forced by bounding holes that are not in AH: a left
    /// bounding hole outside AH(x) yields `a_{lo+1} ≼ x`, a right one
    /// `x ≼ a_{hi-1}`.
    pub fn forced_by_ah(&self) -> Vec<(usize, usize)> {
        let admissible: Vec<Vec<usize>> = self.segments.iter().map(|s| self.admissible_holes(s.element)).collect();
        let mut out = Vec::new();
        for s in &self.segments {
            let x = s.element;
            if !self.in_ah(x, s.left_bounding(), &admissible) {
                out.push((self.chain[s.lo], x));
            }
            if !self.in_ah(x, s.right_bounding(), &admissible) {
                out.push((x, self.chain[s.hi - 2]));
            }
        }
        out
    }

    /// Inner holes that are admissible yet violate the hole-size bounds
    /// `d_x ≈₁ {d(x,a_k), d(x,a_{k+1})}` and `δ_k ≈₃ d_x`. Diagnostic.
    pub fn hole_size_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in &self.segments {
            for k in s.lo + 1..s.hi - 1 {
                if !self.is_admissible_hole(s.element, k) {
                    continue;
                }
                let (a, b) = (self.chain[k - 1], self.chain[k]);
                let ok = self.tol.approx(s.midrange, self.d.get(s.element, a), 1.0)
                    && self.tol.approx(s.midrange, self.d.get(s.element, b), 1.0)
                    && self.tol.approx(self.d.get(a, b), s.midrange, HOLE_SIZE);
                if !ok {
                    out.push((s.element, k));
                }
            }
        }
        out
    }

    /// Inner chain pairs `a_k, a_k'` of a segment farther apart than
    /// `d_x + 3ε`. Diagnostic.
    pub fn inner_spread_violations(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in &self.segments {
            for k in s.lo..s.hi - 1 {
                for k2 in k + 1..s.hi - 1 {
                    let (a, b) = (self.chain[k], self.chain[k2]);
                    if !self.tol.at_least_about(s.midrange, self.d.get(a, b), HOLE_SIZE) {
                        out.push((s.element, a, b));
                    }
                }
            }
        }
        out
    }

    /// Bounding holes that are not admissible for their element.
    pub fn inadmissible_bounding_holes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in &self.segments {
            for k in [s.left_bounding(), s.right_bounding()] {
                if !self.is_admissible_hole(s.element, k) {
                    out.push((s.element, k));
                }
            }
        }
        out
    }
}

/// `(min + max) / 2`; 0 for an empty list.
pub fn midrange(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

/// Extends the relation with every order forced by AH until all bounding
/// holes are in AH. Returns the final number of rounds.
pub fn augment(closure: &mut CanonicalClosure, d: &Dissimilarity, eps: f64) -> Result<usize, Contradiction> {
    let n = d.n();
    for round in 0..=n * n {
        let ctx = ChainContext::new(d, eps, closure.relation());
        let forced = ctx.forced_by_ah();
        if forced.is_empty() {
            return Ok(round);
        }
        closure.assert_all(forced)?;
    }
    unreachable!("every round adds at least one relation")
}
