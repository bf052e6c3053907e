//! Exact rational LP oracle for the cut-constrained scheduling program
//!
//! ```text
//! max t  s.t.  t ≤ Σ_S λ_S f(Ω, S)  for every constraint cut Ω,
//!              Σ_S λ_S ≤ 1,  λ ≥ 0
//! ```
//!
//! over all `2^n` states. `t` is kept non-negative; this loses nothing since
//! `(t, λ) = 0` is feasible. With that, every right-hand side is non-negative
//! and the all-slack basis is a starting vertex, so there is no phase one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cut::CutValueTable;
use crate::error::{Error, Result};
use crate::network::RelaySet;
use crate::rational::{serde_fraction, serde_fraction_map, Rational};
use crate::schedule::Schedule;

/// The oracle refuses larger networks: the tableau has `2^n + 1` columns
/// and up to `2^n + 1` rows.
pub const MAX_LP_RELAYS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(with = "serde_fraction")]
    pub value: Rational,
    /// Non-zero state weights keyed by state mask.
    #[serde(with = "serde_fraction_map")]
    pub schedule: BTreeMap<u32, Rational>,
    /// Constraint cuts (masks) that hold with equality.
    pub tight_cuts: Vec<u32>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn as_schedule(&self) -> Schedule {
        Schedule {
            lambdas: self.schedule.clone(),
            t: self.value.clone(),
        }
    }
}

/// Dictionary form of the program with every entry an integer over the
/// shared positive denominator `den` (the basis determinant up to sign):
/// for basic variable `basis[r]`,
/// `x_basis[r] = (rhs[r] - Σ_k coef[r][k] x_nonbasic[k]) / den`, and the
/// objective is `z = (z0 + Σ_k cost[k] x_nonbasic[k]) / den`.
///
/// Pivots are fraction-free: each update is a 2×2 determinant divided
/// exactly by the previous denominator, so no gcd is ever taken.
struct Dictionary {
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    coef: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    cost: Vec<BigInt>,
    z0: BigInt,
    den: BigInt,
}

/// `(p·x − a·b) / d`, exact by construction.
fn cross(p: &BigInt, x: &BigInt, a: &BigInt, b: &BigInt, d: &BigInt) -> BigInt {
    let num = p * x - a * b;
    debug_assert!((&num % d).is_zero());
    num / d
}

impl Dictionary {
    fn pivot(&mut self, r: usize, k: usize) {
        let p = self.coef[r][k].clone();
        let d = std::mem::replace(&mut self.den, p.clone());
        let prow = self.coef[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.coef.len() {
            if i == r {
                continue;
            }
            let a = self.coef[i][k].clone();
            self.rhs[i] = cross(&p, &self.rhs[i], &a, &prhs, &d);
            for (c, v) in self.coef[i].iter_mut().enumerate() {
                *v = if c == k {
                    -&a
                } else {
                    cross(&p, v, &a, &prow[c], &d)
                };
            }
        }
        let ck = self.cost[k].clone();
        self.z0 = cross(&p, &self.z0, &-&ck, &prhs, &d);
        for (c, v) in self.cost.iter_mut().enumerate() {
            *v = if c == k {
                -&ck
            } else {
                cross(&p, v, &ck, &prow[c], &d)
            };
        }
        self.coef[r][k] = d;
        std::mem::swap(&mut self.basis[r], &mut self.nonbasic[k]);
    }

    fn value(&self, num: &BigInt) -> Rational {
        Rational::new(num.clone(), self.den.clone())
    }

    /// Bland's rule: entering variable is the lowest-index improving one;
    /// ties in the ratio test go to the lowest-index basic variable.
    fn solve(&mut self, max_pivots: usize) -> Result<(LpStatus, usize)> {
        let mut pivots = 0;
        loop {
            let entering = (0..self.cost.len())
                .filter(|&k| self.cost[k].is_positive())
                .min_by_key(|&k| self.nonbasic[k]);
            let Some(k) = entering else {
                return Ok((LpStatus::Optimal, pivots));
            };
            // ratios rhs/coef compared by cross-multiplication (coef > 0)
            let mut best: Option<usize> = None;
            for r in 0..self.coef.len() {
                if !self.coef[r][k].is_positive() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(br) => {
                        let lhs = &self.rhs[r] * &self.coef[br][k];
                        let rhs = &self.rhs[br] * &self.coef[r][k];
                        lhs < rhs || (lhs == rhs && self.basis[r] < self.basis[br])
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            let Some(r) = best else {
                return Ok((LpStatus::Unbounded, pivots));
            };
            self.pivot(r, k);
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::Solver(format!("no convergence after {max_pivots} pivots")));
            }
        }
    }
}

/// Solves the program with constraint cuts `cuts` over all states.
pub fn solve_lp(table: &CutValueTable, cuts: &[RelaySet]) -> Result<LpSolution> {
    let n = table.n();
    if n > MAX_LP_RELAYS {
        return Err(Error::CapacityExceeded {
            n,
            limit: MAX_LP_RELAYS,
        });
    }
    let states: Vec<RelaySet> = RelaySet::all_subsets(n).collect();
    // variables: 0 = t, 1 + s = λ_s, then one slack per row
    let structural = 1 + states.len();
    let rows = cuts.len() + 1;
    let mut coef = Vec::with_capacity(rows);
    for &omega in cuts {
        let mut row = Vec::with_capacity(structural);
        row.push(BigInt::one());
        row.extend(
            states
                .iter()
                .map(|&s| -BigInt::from(table.cut_value(omega, s))),
        );
        coef.push(row);
    }
    let mut budget = vec![BigInt::one(); structural];
    budget[0] = BigInt::zero();
    coef.push(budget);

    let mut cost = vec![BigInt::zero(); structural];
    cost[0] = BigInt::one();
    let mut dict = Dictionary {
        basis: (structural..structural + rows).collect(),
        nonbasic: (0..structural).collect(),
        coef,
        rhs: (0..rows)
            .map(|r| if r + 1 == rows { BigInt::one() } else { BigInt::zero() })
            .collect(),
        cost,
        z0: BigInt::zero(),
        den: BigInt::one(),
    };
    let max_pivots = 50 * (structural + rows) * (structural + rows);
    let (status, pivots) = dict.solve(max_pivots)?;
    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            value: Rational::zero(),
            schedule: BTreeMap::new(),
            tight_cuts: Vec::new(),
            pivots,
        });
    }
    debug_assert!(dict.cost.iter().all(|c| !c.is_positive()));

    let mut values = vec![Rational::zero(); structural];
    for (r, &var) in dict.basis.iter().enumerate() {
        if var < structural {
            values[var] = dict.value(&dict.rhs[r]);
        }
    }
    let value = values[0].clone();
    if value != dict.value(&dict.z0) {
        return Err(Error::Inconsistency("objective and t disagree at optimum".into()));
    }
    let schedule: BTreeMap<u32, Rational> = states
        .iter()
        .zip(&values[1..])
        .filter(|(_, v)| !v.is_zero())
        .map(|(s, v)| (s.mask(), v.clone()))
        .collect();
    let sol_schedule = Schedule {
        lambdas: schedule.clone(),
        t: value.clone(),
    };
    if !sol_schedule.is_valid() {
        return Err(Error::Inconsistency("LP schedule violates the time budget".into()));
    }
    let mut tight_cuts = Vec::new();
    for &omega in cuts {
        let rate = sol_schedule.cut_rate(table, omega);
        if rate < value {
            return Err(Error::Inconsistency(format!("LP optimum violates cut {omega}")));
        }
        if rate == value {
            tight_cuts.push(omega.mask());
        }
    }
    Ok(LpSolution {
        status,
        value,
        schedule,
        tight_cuts,
        pivots,
    })
}

/// `C^LD`: all `2^n` cut constraints.
pub fn solve_full_lp(table: &CutValueTable) -> Result<LpSolution> {
    let n = table.n();
    if n > MAX_LP_RELAYS {
        return Err(Error::CapacityExceeded {
            n,
            limit: MAX_LP_RELAYS,
        });
    }
    let cuts: Vec<RelaySet> = RelaySet::all_subsets(n).collect();
    solve_lp(table, &cuts)
}

/// `C^U`: only the `n + 1` suffix cuts `[i:n]`, `i = 1..=n+1`.
pub fn solve_relaxed_lp(table: &CutValueTable) -> Result<LpSolution> {
    let n = table.n();
    let cuts: Vec<RelaySet> = (0..=n).map(|i| RelaySet::range(i, n)).collect();
    solve_lp(table, &cuts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `Σ_S λ_S f(Ω, S) − t` per cut mask.
    #[serde(with = "serde_fraction_map")]
    pub slack: BTreeMap<u32, Rational>,
    pub feasible: bool,
    /// Smallest cut rate, i.e. the rate the schedule actually supports.
    #[serde(with = "serde_fraction")]
    pub min_rate: Rational,
}

/// Evaluates a schedule against all `2^n` cuts.
pub fn verify_schedule_feasible(table: &CutValueTable, sched: &Schedule) -> FeasibilityReport {
    let n = table.n();
    let mut slack = BTreeMap::new();
    let mut min_rate: Option<Rational> = None;
    for omega in RelaySet::all_subsets(n) {
        let rate = sched.cut_rate(table, omega);
        if min_rate.as_ref().is_none_or(|m| rate < *m) {
            min_rate = Some(rate.clone());
        }
        slack.insert(omega.mask(), rate - &sched.t);
    }
    let feasible = sched.is_valid() && slack.values().all(|s| !s.is_negative());
    FeasibilityReport {
        slack,
        feasible,
        min_rate: min_rate.expect("at least the empty cut"),
    }
}
