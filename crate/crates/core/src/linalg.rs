//! Exact inversion of small integer matrices.

use crate::rational::Rational;

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.n + c]
    }
}

/// Result of a successful inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Inverse {
    pub determinant: i128,
    /// `entries[r][c]` of the exact inverse.
    pub entries: Vec<Vec<Rational>>,
}

/// Fraction-free Gauss–Jordan elimination on `[A | I]`.
///
/// Pivots are chosen by largest magnitude in the column, ties going to the
/// lowest row index. Every intermediate division is exact, so the arithmetic
/// stays in integers until the final `adj(A) / det(A)` step. Returns `None`
/// when `A` is singular.
pub fn invert(matrix: &IntMatrix) -> Option<Inverse> {
    let n = matrix.n;
    let width = 2 * n;
    let mut aug = vec![0i128; n * width];
    for r in 0..n {
        for c in 0..n {
            aug[r * width + c] = matrix.get(r, c);
        }
        aug[r * width + n + r] = 1;
    }
    let mut previous = 1i128;
    let mut swaps = 0usize;
    for k in 0..n {
        let mut pivot_row = None;
        let mut best = 0i128;
        for r in k..n {
            let magnitude = aug[r * width + k].abs();
            if magnitude > best {
                best = magnitude;
                pivot_row = Some(r);
            }
        }
        let p = pivot_row?;
        if p != k {
            for c in 0..width {
                aug.swap(p * width + c, k * width + c);
            }
            swaps += 1;
        }
        let pivot = aug[k * width + k];
        for r in 0..n {
            if r == k {
                continue;
            }
            let factor = aug[r * width + k];
            for c in 0..width {
                let value = pivot * aug[r * width + c] - factor * aug[k * width + c];
                debug_assert_eq!(
                    value % previous,
                    0,
                    "fraction-free step must divide exactly"
                );
                aug[r * width + c] = value / previous;
            }
        }
        previous = pivot;
    }
    // Left block is now `previous · I`; right block is `previous · A⁻¹`.
    let scale = previous;
    let entries = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| Rational::new(aug[r * width + n + c], scale))
                .collect()
        })
        .collect();
    let determinant = if swaps.is_multiple_of(2) {
        scale
    } else {
        -scale
    };
    Some(Inverse {
        determinant,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use num_traits::{One, Zero};

    fn product_is_identity(m: &IntMatrix, inv: &[Vec<Rational>]) -> bool {
        let n = m.size();
        (0..n).all(|r| {
            (0..n).all(|c| {
                let sum: Rational = (0..n)
                    .map(|k| Rational::from_integer(m.get(r, k)) * inv[k][c])
                    .sum();
                if r == c {
                    sum.is_one()
                } else {
                    sum.is_zero()
                }
            })
        })
    }

    #[test]
    fn triangle_incidence_inverse_is_half_signed() {
        // columns {1,2}, {2,3}, {3,1}
        let m = IntMatrix::from_rows(&[vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]]);
        let inv = invert(&m).unwrap();
        assert_eq!(inv.determinant.abs(), 2);
        assert!(inv
            .entries
            .iter()
            .flatten()
            .all(|e| *e == ratio(1, 2) || *e == ratio(-1, 2)));
        assert!(product_is_identity(&m, &inv.entries));
    }

    #[test]
    fn even_cycle_is_singular() {
        let m = IntMatrix::from_rows(&[
            vec![1, 0, 0, 1],
            vec![1, 1, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 1],
        ]);
        assert!(invert(&m).is_none());
    }

    #[test]
    fn general_integer_matrix() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        let inv = invert(&m).unwrap();
        assert_eq!(inv.determinant, 4);
        assert_eq!(inv.entries[0][0], ratio(3, 4));
        assert_eq!(inv.entries[1][1], int(1));
        assert!(product_is_identity(&m, &inv.entries));
    }

    #[test]
    fn determinant_sign_tracks_swaps() {
        let m = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        let inv = invert(&m).unwrap();
        assert_eq!(inv.determinant, -1);
        assert!(product_is_identity(&m, &inv.entries));
    }
}
