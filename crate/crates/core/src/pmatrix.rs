//! The bordered cut-value matrix whose determinant and first-row minors
//! decide single-transmitter optimality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cut::{state_for_column, CutValueTable};
use crate::rational::{serde_bigint, serde_bigint_vec};

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
/// Every intermediate value is itself a minor of the input, so the
/// divisions are exact.
pub fn bareiss_det(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `(n+2) × (n+2)` integer matrix indexed `0..=n+1`:
/// `entries[0][0] = 0`, `entries[i][j] = -f([i:n], {j})` for `i, j ≥ 1`
/// (column `n+1` standing for the empty state), and 1 elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PMatrix {
    pub entries: Vec<Vec<i64>>,
    #[serde(with = "serde_bigint")]
    pub det: BigInt,
    /// `minors[i]`: determinant with row 0 and column `i` removed.
    #[serde(with = "serde_bigint_vec")]
    pub minors: Vec<BigInt>,
}

impl PMatrix {
    pub fn from_entries(entries: Vec<Vec<i64>>) -> PMatrix {
        let size = entries.len();
        assert!(size >= 3 && entries.iter().all(|r| r.len() == size));
        let big: Vec<Vec<BigInt>> = entries
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        let det = bareiss_det(&big);
        let minors = (0..size)
            .map(|col| {
                let sub: Vec<Vec<BigInt>> = big[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                bareiss_det(&sub)
            })
            .collect();
        PMatrix {
            entries,
            det,
            minors,
        }
    }

    /// Number of relays.
    pub fn n(&self) -> usize {
        self.entries.len() - 2
    }

    /// `(-1)^i * minors[i]`, the Cramer numerator for unknown `i` of
    /// `P x = e_0`.
    pub fn signed_minor(&self, i: usize) -> BigInt {
        if i.is_multiple_of(2) {
            self.minors[i].clone()
        } else {
            -self.minors[i].clone()
        }
    }

    /// Cofactor expansion of `det` along row 0.
    pub fn laplace_holds(&self) -> bool {
        let sum: BigInt = (1..self.entries.len())
            .map(|i| self.signed_minor(i) * BigInt::from(self.entries[0][i]))
            .sum();
        sum == self.det
    }

    pub fn det_nonzero(&self) -> bool {
        !self.det.is_zero()
    }

    /// `sign((-1)^(n+1) P_{n+1}) * sign(det) >= 0`, evaluated without
    /// dividing. A zero numerator passes.
    pub fn ratio_sign_ok(&self) -> bool {
        let num = self.signed_minor(self.n() + 1);
        (num.signum() * self.det.signum()) >= BigInt::zero()
    }
}

/// Assembles the P matrix from a table bound to a canonical network.
pub fn build_p_matrix(table: &CutValueTable) -> PMatrix {
    let n = table.n();
    let size = n + 2;
    let mut entries = vec![vec![1i64; size]; size];
    entries[0][0] = 0;
    for (i, row) in entries.iter_mut().enumerate().skip(1) {
        for (j, cell) in row.iter_mut().enumerate().skip(1) {
            *cell = -(table.suffix_cut_value(i, state_for_column(j - 1, n)) as i64);
        }
    }
    PMatrix::from_entries(entries)
}
