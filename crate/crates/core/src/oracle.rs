//! Exhaustive reference solutions and random instance generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dissimilarity::{Dissimilarity, TotalOrder};
use crate::error::{Error, Result};
use crate::order_fit::{max_nested_gap, nested_gap_within, subinterval_max};

/// Largest instance the brute-force routines accept.
pub const MAX_ORACLE_N: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub epsilon_star: f64,
    pub witness_order: TotalOrder,
}

fn check_size(d: &Dissimilarity) -> Result<()> {
    if d.n() > MAX_ORACLE_N {
        return Err(Error::TooLarge {
            n: d.n(),
            max: MAX_ORACLE_N,
        });
    }
    Ok(())
}

// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

// Visits one order out of each reversal pair (element 0 before element 1);
// stops when `visit` returns false.
fn for_each_order_mod_reversal(n: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        let canonical = n < 2 || p.iter().position(|&x| x == 0) < p.iter().position(|&x| x == 1);
        if canonical && !visit(&p) {
            return;
        }
        if !next_permutation(&mut p) {
            return;
        }
    }
}

/// The optimal l∞ error over all Robinsonian dissimilarities, with an
/// order attaining it (first in lexicographic order).
pub fn exact_fit(d: &Dissimilarity) -> Result<OracleResult> {
    check_size(d)?;
    let mut best_gap = f64::INFINITY;
    let mut best = Vec::new();
    for_each_order_mod_reversal(d.n(), |p| {
        if nested_gap_within(d, p, best_gap) {
            let g = max_nested_gap(d, p);
            if g < best_gap {
                best_gap = g;
                best = p.to_vec();
            }
        }
        best_gap > 0.0
    });
    Ok(OracleResult {
        epsilon_star: 0.5 * best_gap,
        witness_order: TotalOrder::new(best)?,
    })
}

/// Whether some order is ε-compatible with `d`.
pub fn is_eps_robinsonian(d: &Dissimilarity, eps: f64) -> Result<bool> {
    check_size(d)?;
    let limit = 2.0 * eps;
    let mut found = false;
    for_each_order_mod_reversal(d.n(), |p| {
        found = nested_gap_within(d, p, limit);
        !found
    });
    Ok(found)
}

/// Every ε-compatible order, both orientations included.
pub fn compatible_orders(d: &Dissimilarity, eps: f64) -> Result<Vec<TotalOrder>> {
    check_size(d)?;
    let limit = 2.0 * eps;
    let mut out = Vec::new();
    for_each_order_mod_reversal(d.n(), |p| {
        if nested_gap_within(d, p, limit) {
            let o = TotalOrder::new(p.to_vec()).expect("permutation");
            if d.n() >= 2 {
                out.push(o.reversed());
            }
            out.push(o);
        }
        true
    });
    Ok(out)
}

/// A generated Robinsonian dissimilarity with the order it was built on.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub d: Dissimilarity,
    pub hidden_order: TotalOrder,
}

/// Random integer-valued Robinsonian dissimilarity on `n` elements.
///
/// Points are drawn on a line with random integer gaps; each pair gets its
/// line distance plus a random integer bump of at most that distance. The
/// subinterval maximum of that matrix is Robinsonian along the line, and
/// the elements are then relabelled at random.
pub fn gen_robinson(n: usize, seed: u64) -> Result<Planted> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut p = 0i64;
    for _ in 0..n {
        p += rng.gen_range(1..=6);
        points.push(p);
    }
    let raw = Dissimilarity::from_fn(n, |a, b| {
        let span = points[b] - points[a];
        (span + rng.gen_range(0..=span)) as f64
    })?;
    let along_line = subinterval_max(&raw, &TotalOrder::identity(n));
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut d = Dissimilarity::zeros(n)?;
    for a in 0..n {
        for b in a + 1..n {
            d.set(perm[a], perm[b], along_line.get(a, b));
        }
    }
    Ok(Planted {
        d,
        hidden_order: TotalOrder::new(perm)?,
    })
}

/// Grid of the perturbation noise; keeps perturbed values dyadic so that
/// all later comparisons are exact.
pub const NOISE_QUANTUM: f64 = 1.0 / 256.0;

/// Adds independent noise, uniform on the multiples of [`NOISE_QUANTUM`]
/// within `[-eta, eta]`, to every off-diagonal pair; floors at 0.
pub fn perturb(d: &Dissimilarity, eta: f64, seed: u64) -> Dissimilarity {
    assert!(eta >= 0.0 && eta.is_finite(), "eta must be a nonnegative number");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (eta / NOISE_QUANTUM).floor() as i64;
    let mut out = d.clone();
    for x in 0..d.n() {
        for y in x + 1..d.n() {
            let k = if steps == 0 { 0 } else { rng.gen_range(-steps..=steps) };
            out.set(x, y, (d.get(x, y) + k as f64 * NOISE_QUANTUM).max(0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_fit::{candidate_errors, check_robinson, compatibility_violation, fit_for_order};

    fn e4b() -> Dissimilarity {
        Dissimilarity::from_upper(4, &[1.0, 2.0, 3.0, 4.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn permutation_count_mod_reversal() {
        let mut count = 0;
        for_each_order_mod_reversal(5, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 60);
    }

    #[test]
    fn line_has_zero_error() {
        let d = Dissimilarity::from_fn(5, |x, y| (y - x) as f64).unwrap();
        let r = exact_fit(&d).unwrap();
        assert_eq!(r.epsilon_star, 0.0);
        assert!(check_robinson(&d, &r.witness_order));
    }

    #[test]
    fn e4b_optimum() {
        // Fixed-order errors over the 12 orders, computed independently.
        let mut best = f64::INFINITY;
        let mut p = vec![0, 1, 2, 3];
        loop {
            best = best.min(fit_for_order(&e4b(), &TotalOrder::new(p.clone()).unwrap()).unwrap().achieved_error);
            if !next_permutation(&mut p) {
                break;
            }
        }
        let r = exact_fit(&e4b()).unwrap();
        assert_eq!(r.epsilon_star, best);
        assert_eq!(r.epsilon_star, 0.5);
        assert_eq!(compatibility_violation(&e4b(), &r.witness_order), 0.5);
        assert!(!is_eps_robinsonian(&e4b(), 0.0).unwrap());
        assert!(is_eps_robinsonian(&e4b(), 0.5).unwrap());
    }

    #[test]
    fn small_sizes() {
        let d = Dissimilarity::from_upper(2, &[4.0]).unwrap();
        assert_eq!(exact_fit(&d).unwrap().epsilon_star, 0.0);
        let one = Dissimilarity::zeros(1).unwrap();
        assert_eq!(exact_fit(&one).unwrap().witness_order.as_slice(), &[0]);
        assert_eq!(compatible_orders(&one, 0.0).unwrap().len(), 1);
    }

    #[test]
    fn refuses_large_inputs() {
        let d = Dissimilarity::zeros(12).unwrap();
        assert!(matches!(exact_fit(&d), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn generator_is_robinson_under_hidden_order() {
        for seed in 0..20 {
            let p = gen_robinson(5 + seed as usize % 6, seed).unwrap();
            assert!(check_robinson(&p.d, &p.hidden_order));
        }
        assert_eq!(gen_robinson(7, 3).unwrap(), gen_robinson(7, 3).unwrap());
    }

    #[test]
    fn perturbation_bounds() {
        let p = gen_robinson(7, 1).unwrap();
        assert_eq!(perturb(&p.d, 0.0, 9), p.d);
        let noisy = perturb(&p.d, 0.1, 9);
        assert!(crate::dissimilarity::linf_distance(&p.d, &noisy).unwrap() <= 0.1);
        let r = exact_fit(&noisy).unwrap();
        assert!(r.epsilon_star <= 0.1);
        assert!(candidate_errors(&noisy).contains(&r.epsilon_star));
    }

    #[test]
    fn eps_robinsonian_is_monotone() {
        let d = perturb(&gen_robinson(6, 4).unwrap().d, 2.0, 4);
        let star = exact_fit(&d).unwrap().epsilon_star;
        let cands = candidate_errors(&d);
        for &e in &cands {
            assert_eq!(is_eps_robinsonian(&d, e).unwrap(), e >= star);
        }
    }
}
