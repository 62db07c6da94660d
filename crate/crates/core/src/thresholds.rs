//! ε-scaled comparisons and the multipliers used by the placement rules.
//!
//! All comparisons are exact floating point comparisons. For ties to be
//! decided exactly, inputs should be integers (or share a small dyadic
//! denominator); every candidate ε is then exactly representable.

/// Betweenness: `d(x,y) > max{d(x,z), d(z,y)} + 2ε` forces `z` between `x` and `y`.
pub const BETWEENNESS: f64 = 2.0;
/// Linked / separated pairs: `d(x,y)` against `max{d_x, d_y}` at `3ε`.
pub const LINKED: f64 = 3.0;
/// Hole size against `d_x` for an admissible inner hole.
pub const HOLE_SIZE: f64 = 3.0;
/// Arrow rule on midranges, and the midrange arc of the cell digraph.
pub const MIDRANGE_ARROW: f64 = 4.0;
/// Tightly linked pairs that are always joined in both directions.
pub const TIGHT_LINK: f64 = 5.0;
/// Strong separation.
pub const STRONG_SEPARATION: f64 = 9.0;
/// Compatibility factor of any pair of bounding-hole placements.
pub const PAIRWISE: f64 = 12.0;
/// Witness-distance arrow rule, and the witness arc of the cell digraph.
pub const WITNESS_ARROW: f64 = 16.0;
/// Compatibility factor guaranteed for the returned order.
pub const GUARANTEE: f64 = 16.0;

/// The current error guess together with the scaled comparisons on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        debug_assert!(eps >= 0.0);
        Self { eps }
    }

    /// `a ≪_c b`, i.e. `a + cε < b`.
    #[inline]
    pub fn much_less(self, a: f64, b: f64, c: f64) -> bool {
        a + c * self.eps < b
    }

    /// `a ≫_c b`, i.e. `a > b + cε`.
    #[inline]
    pub fn much_greater(self, a: f64, b: f64, c: f64) -> bool {
        b + c * self.eps < a
    }

    /// `a ≈_c b`, i.e. `|a - b| ≤ cε`.
    #[inline]
    pub fn approx(self, a: f64, b: f64, c: f64) -> bool {
        (a - b).abs() <= c * self.eps
    }

    /// `a ≳_c b`, i.e. `a + cε ≥ b`. Exact complement of `much_less(a, b, c)`.
    #[inline]
    pub fn at_least_about(self, a: f64, b: f64, c: f64) -> bool {
        !self.much_less(a, b, c)
    }

    /// `a ≲_c b`, i.e. `a ≤ b + cε`.
    #[inline]
    pub fn at_most_about(self, a: f64, b: f64, c: f64) -> bool {
        !self.much_greater(a, b, c)
    }

    /// Whether a nested gap fits within `c`-compatibility: `gap ≤ 2cε`.
    #[inline]
    pub fn gap_ok(self, gap: f64, c: f64) -> bool {
        gap <= 2.0 * c * self.eps
    }

    /// Limit on nested gaps for `c`-compatibility.
    #[inline]
    pub fn gap_limit(self, c: f64) -> f64 {
        2.0 * c * self.eps
    }
}
