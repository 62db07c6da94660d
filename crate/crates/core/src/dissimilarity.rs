//! Dissimilarity matrices and total orders on their ground set.

use crate::error::{Error, Result};

/// A symmetric, nonnegative matrix with zero diagonal.
///
/// Only the strict upper triangle is stored; `get(x, y)` and `get(y, x)`
/// read the same slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissimilarity {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl Dissimilarity {
    /// All-zero dissimilarity on `n` elements.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            n,
            upper: vec![0.0; n * (n - 1) / 2],
        })
    }

    /// Builds a dissimilarity from `f(x, y)` evaluated on pairs `x < y`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut d = Self::zeros(n)?;
        for x in 0..n {
            for y in x + 1..n {
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::NotFinite { row: x, col: y });
                }
                if v < 0.0 {
                    return Err(Error::Negative {
                        row: x,
                        col: y,
                        value: v,
                    });
                }
                d.upper[tri_index(n, x, y)] = v;
            }
        }
        Ok(d)
    }

    /// Builds a dissimilarity from its upper triangle listed row by row:
    /// `(0,1), (0,2), …, (0,n-1), (1,2), …`.
    pub fn from_upper(n: usize, values: &[f64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: expected,
            });
        }
        let mut it = values.iter().copied();
        Self::from_fn(n, |_, _| it.next().unwrap_or(0.0))
    }

    /// Parses a full square matrix. Off-diagonal pairs may differ by at most
    /// `tol` relative to their magnitude and are then averaged; diagonal
    /// entries must be within `tol` of zero.
    pub fn from_square(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    left: row.len(),
                    right: n,
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NotFinite { row: i, col: j });
                }
            }
            if row[i].abs() > tol {
                return Err(Error::NonZeroDiagonal {
                    index: i,
                    value: row[i],
                });
            }
        }
        let mut d = Self::zeros(n)?;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > tol * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        upper: a,
                        lower: b,
                    });
                }
                let v = if a == b { a } else { 0.5 * (a + b) };
                if v < 0.0 {
                    return Err(Error::Negative {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                d.upper[tri_index(n, i, j)] = v;
            }
        }
        Ok(d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => self.upper[tri_index(self.n, x, y)],
            std::cmp::Ordering::Greater => self.upper[tri_index(self.n, y, x)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Sets both `(x, y)` and `(y, x)`. Panics on the diagonal or on a
    /// negative/non-finite value.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        assert!(x != y, "diagonal entries are fixed at zero");
        assert!(value.is_finite() && value >= 0.0, "invalid entry {value}");
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.upper[tri_index(self.n, a, b)] = value;
    }

    /// Off-diagonal values in upper-triangle row order.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Pairs `(x, y, d(x,y))` with `x < y`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |x| (x + 1..self.n).map(move |y| (x, y, self.get(x, y))))
    }

    pub fn max_value(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_value(&self) -> f64 {
        if self.upper.is_empty() {
            0.0
        } else {
            self.upper.iter().sum::<f64>() / self.upper.len() as f64
        }
    }

    /// The submatrix on `elements`; local index `k` stands for `elements[k]`.
    pub fn restrict(&self, elements: &[usize]) -> Dissimilarity {
        let m = elements.len().max(1);
        let mut out = Dissimilarity {
            n: m,
            upper: vec![0.0; m * (m - 1) / 2],
        };
        for (a, &x) in elements.iter().enumerate() {
            for (b, &y) in elements.iter().enumerate().skip(a + 1) {
                out.upper[tri_index(m, a, b)] = self.get(x, y);
            }
        }
        out
    }

    /// Relabels so that new element `k` is old element `perm[k]`.
    pub fn permuted(&self, order: &TotalOrder) -> Result<Dissimilarity> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: order.len(),
                right: self.n,
            });
        }
        Ok(self.restrict(order.as_slice()))
    }

    /// Full square matrix, row-major.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|x| (0..self.n).map(|y| self.get(x, y)).collect())
            .collect()
    }
}

/// `max |d1(x,y) - d2(x,y)|` over all pairs.
pub fn linf_distance(d1: &Dissimilarity, d2: &Dissimilarity) -> Result<f64> {
    if d1.n != d2.n {
        return Err(Error::DimensionMismatch {
            left: d1.n,
            right: d2.n,
        });
    }
    Ok(d1
        .upper
        .iter()
        .zip(&d2.upper)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// A total order on `0..n`, stored as the sequence of elements from first
/// to last.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TotalOrder(Vec<usize>);

impl TotalOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &x in &perm {
            if x >= n {
                return Err(Error::InvalidOrder {
                    n,
                    reason: format!("element {x} out of range"),
                });
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidOrder {
                    n,
                    reason: format!("element {x} repeated"),
                });
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// `positions()[x]` is the rank of element `x`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (rank, &x) in self.0.iter().enumerate() {
            pos[x] = rank;
        }
        pos
    }
}
