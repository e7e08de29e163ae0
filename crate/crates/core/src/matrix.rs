//! Integer matrices accumulated along splitting sequences.
//!
//! Each split contributes an elementary matrix E = I + M_{winner,loser}
//! relating old widths to new ones by λ = E·λ'. Right-multiplying the
//! accumulated product by E adds the winner's column into the loser's
//! column, so the product stays a nonnegative integer matrix of
//! determinant 1.

use crate::combinatorics::BandLabel;
use crate::numeric::{determinant, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;

/// Specification of E = I + M_{winner,loser}: entry (winner, loser) is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementaryMatrix {
    pub winner: BandLabel,
    pub loser: BandLabel,
}

impl ElementaryMatrix {
    /// Dense d×d form, rows-of-columns like [`ExpansionMatrix`].
    pub fn to_expansion(&self, d: usize) -> ExpansionMatrix {
        let mut q = ExpansionMatrix::identity(d);
        q.apply(self);
        q
    }
}

/// Nonnegative integer d×d matrix Q = E_1⋯E_n, stored by columns.
#[derive(Clone, PartialEq, Eq)]
pub struct ExpansionMatrix {
    d: usize,
    cols: Vec<Vec<BigInt>>,
}

impl fmt::Debug for ExpansionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            if i > 0 {
                writeln!(f)?;
            }
            for j in 0..self.d {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.cols[j][i])?;
            }
        }
        Ok(())
    }
}

impl ExpansionMatrix {
    pub fn identity(d: usize) -> Self {
        let cols = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        ExpansionMatrix { d, cols }
    }

    /// Builds from rows of integers (for fixtures and tests).
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let d = rows.len();
        let cols = (0..d)
            .map(|j| (0..d).map(|i| BigInt::from(rows[i][j])).collect())
            .collect();
        ExpansionMatrix { d, cols }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column(&self, l: BandLabel) -> &[BigInt] {
        &self.cols[l.index()]
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.cols[col][row]
    }

    /// Coordinate-sum norm of a column; entries are nonnegative.
    pub fn column_norm(&self, l: BandLabel) -> BigInt {
        self.cols[l.index()].iter().sum()
    }

    pub fn column_norms(&self) -> Vec<BigInt> {
        (0..self.d)
            .map(|j| self.cols[j].iter().sum())
            .collect()
    }

    /// Right-multiplication by E = I + M_{winner,loser}: the winner's column
    /// moves the loser's column.
    pub fn apply(&mut self, e: &ElementaryMatrix) {
        debug_assert_ne!(e.winner, e.loser);
        let (w, l) = (e.winner.index(), e.loser.index());
        for i in 0..self.d {
            let add = self.cols[w][i].clone();
            self.cols[l][i] += add;
        }
    }

    /// Q·v for a rational vector.
    pub fn mul_vector(&self, v: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(v.len(), self.d);
        let mut out = vec![Rational::zero(); self.d];
        for (j, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for i in 0..self.d {
                out[i] += coeff * Rational::from_integer(self.cols[j][i].clone());
            }
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.cols
            .iter()
            .all(|c| c.iter().all(|e| e > &BigInt::zero()))
    }

    pub fn max_entry(&self) -> BigInt {
        self.cols
            .iter()
            .flat_map(|c| c.iter())
            .cloned()
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Exact determinant; products of elementary matrices give 1.
    pub fn determinant(&self) -> Rational {
        let rows: Vec<Vec<Rational>> = (0..self.d)
            .map(|i| {
                (0..self.d)
                    .map(|j| Rational::from_integer(self.cols[j][i].clone()))
                    .collect()
            })
            .collect();
        determinant(&rows)
    }

    /// 0/1 positivity pattern packed row-major into a u128 (requires d ≤ 11).
    pub fn positivity_pattern(&self) -> u128 {
        assert!(self.d * self.d <= 128, "pattern only supports d*d <= 128");
        let mut bits = 0u128;
        for j in 0..self.d {
            for i in 0..self.d {
                if self.cols[j][i] > BigInt::zero() {
                    bits |= 1u128 << (i * self.d + j);
                }
            }
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_int;

    fn l(i: u32) -> BandLabel {
        BandLabel(i)
    }

    #[test]
    fn elementary_moves_winner_column_into_loser() {
        let mut q = ExpansionMatrix::identity(2);
        q.apply(&ElementaryMatrix {
            winner: l(2),
            loser: l(1),
        });
        // Column 1 becomes e1 + e2.
        assert_eq!(q, ExpansionMatrix::from_rows(&[vec![1, 0], vec![1, 1]]));
        q.apply(&ElementaryMatrix {
            winner: l(1),
            loser: l(2),
        });
        assert_eq!(q, ExpansionMatrix::from_rows(&[vec![1, 1], vec![1, 2]]));
        assert!(q.is_positive());
        assert_eq!(q.determinant(), rat_int(1));
    }

    #[test]
    fn norms_and_pattern() {
        let q = ExpansionMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(q.column_norm(l(1)), BigInt::from(1));
        assert_eq!(q.column_norm(l(2)), BigInt::from(2));
        assert!(!q.is_positive());
        assert_eq!(q.positivity_pattern(), 0b1011);
    }
}
