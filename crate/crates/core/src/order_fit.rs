//! Fitting for a fixed order, compatibility checks and the list of
//! candidate errors.
//!
//! Everything here works with "nested" pairs: for a sequence of elements,
//! the pair `(u, v)` is nested in `(x, y)` when `x ⪯ u ⪯ v ⪯ y` in that
//! sequence (coincidences allowed). An order is ε-compatible when no nested
//! pair exceeds its enclosing pair by more than `2ε`.

use crate::dissimilarity::{Dissimilarity, TotalOrder};
use crate::error::{Error, Result};

/// Result of fitting a Robinsonian dissimilarity.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub order: TotalOrder,
    pub fitted: Dissimilarity,
    pub achieved_error: f64,
    pub accepted_epsilon: f64,
}

/// Largest `d(u,v) - d(x,y)` over nested pairs of `seq`, or 0.
///
/// `seq` must hold distinct elements of `d`; it may be any subsequence of
/// the ground set.
pub fn max_nested_gap(d: &Dissimilarity, seq: &[usize]) -> f64 {
    let mut gap = 0.0;
    nested_scan(d, seq, |g| {
        if g > gap {
            gap = g;
        }
        true
    });
    gap
}

/// `max_nested_gap(d, seq) <= limit`, stopping at the first violation.
pub fn nested_gap_within(d: &Dissimilarity, seq: &[usize], limit: f64) -> bool {
    nested_scan(d, seq, |g| g <= limit)
}

// Column-by-column DP for the nested maximum; `visit` sees every gap and
// may stop the scan by returning false.
fn nested_scan(d: &Dissimilarity, seq: &[usize], mut visit: impl FnMut(f64) -> bool) -> bool {
    let m = seq.len();
    if m < 3 {
        return true;
    }
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for b in 0..m {
        cur[b] = 0.0;
        let yb = seq[b];
        for a in (0..b).rev() {
            let v = d.get(seq[a], yb);
            let c = v.max(cur[a + 1]).max(prev[a]);
            cur[a] = c;
            if !visit(c - v) {
                return false;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    true
}

/// The least ε ≥ 0 for which `order` is ε-compatible with `d`.
pub fn compatibility_violation(d: &Dissimilarity, order: &TotalOrder) -> f64 {
    0.5 * max_nested_gap(d, order.as_slice())
}

/// Whether `d` is Robinsonian with respect to `order`.
pub fn check_robinson(d: &Dissimilarity, order: &TotalOrder) -> bool {
    nested_gap_within(d, order.as_slice(), 0.0)
}

/// `ď(x,y)`: the largest entry between `x` and `y` (inclusive) in `order`.
pub fn subinterval_max(d: &Dissimilarity, order: &TotalOrder) -> Dissimilarity {
    let perm = order.as_slice();
    let m = perm.len();
    let mut out = d.clone();
    // dc[a][b] for a < b over positions, filled by increasing width.
    let mut dc = vec![0.0f64; m * m];
    for width in 1..m {
        for a in 0..m - width {
            let b = a + width;
            let mut v = d.get(perm[a], perm[b]);
            if width > 1 {
                v = v.max(dc[(a + 1) * m + b]).max(dc[a * m + b - 1]);
            }
            dc[a * m + b] = v;
            out.set(perm[a], perm[b], v);
        }
    }
    out
}

/// The optimal Robinsonian fit of `d` among dissimilarities compatible with
/// `order`: `max(ď - ε̃, 0)` where `2ε̃ = ||d - ď||∞`.
pub fn fit_for_order(d: &Dissimilarity, order: &TotalOrder) -> Result<FitResult> {
    if order.len() != d.n() {
        return Err(Error::DimensionMismatch {
            left: order.len(),
            right: d.n(),
        });
    }
    let upper = subinterval_max(d, order);
    let two_eps = d
        .upper()
        .iter()
        .zip(upper.upper())
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max);
    let eps = 0.5 * two_eps;
    let values: Vec<f64> = upper.upper().iter().map(|v| (v - eps).max(0.0)).collect();
    let fitted = Dissimilarity::from_upper(d.n(), &values)?;
    Ok(FitResult {
        order: order.clone(),
        fitted,
        achieved_error: eps,
        accepted_epsilon: eps,
    })
}

/// A nested pair realising the compatibility violation of `order`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NestedWitness {
    pub outer: (usize, usize),
    pub inner: (usize, usize),
    /// `d(inner) - d(outer)`.
    pub gap: f64,
}

/// Brute-force search for the worst nested pair. `O(n^4)`; meant for
/// diagnostics and tests.
pub fn worst_nested_pair(d: &Dissimilarity, order: &TotalOrder) -> Option<NestedWitness> {
    let p = order.as_slice();
    let m = p.len();
    let mut best: Option<NestedWitness> = None;
    for a in 0..m {
        for b in a + 1..m {
            let outer = d.get(p[a], p[b]);
            for u in a..=b {
                for v in u + 1..=b {
                    let gap = d.get(p[u], p[v]) - outer;
                    if best.is_none_or(|w| gap > w.gap) {
                        best = Some(NestedWitness {
                            outer: (p[a], p[b]),
                            inner: (p[u], p[v]),
                            gap,
                        });
                    }
                }
            }
        }
    }
    best
}

/// Sorted, deduplicated `{ ½|d(x,y) - d(x',y')| }` over off-diagonal pairs.
/// Always contains 0.
pub fn candidate_errors(d: &Dissimilarity) -> Vec<f64> {
    let mut values: Vec<f64> = d.upper().to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut out = Vec::with_capacity(values.len() * values.len() / 2 + 1);
    out.push(0.0);
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            out.push(0.5 * (b - a));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
