//! Closed-form single-transmitter schedules and the two independent routes
//! used to cross-check them.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cut::{state_for_column, CutValueTable};
use crate::error::{Error, Result};
use crate::network::{map_set_to_original, RelaySet};
use crate::pmatrix::PMatrix;
use crate::rational::{self, fraction_string, from_int, serde_fraction, serde_fraction_map, Rational};

/// Time fractions per state (keyed by state mask) together with the rate
/// they support. States absent from the map have weight zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(with = "serde_fraction_map")]
    pub lambdas: BTreeMap<u32, Rational>,
    #[serde(with = "serde_fraction")]
    pub t: Rational,
}

impl Schedule {
    pub fn lambda(&self, state: RelaySet) -> Rational {
        self.lambdas.get(&state.mask()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.lambdas.values().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.lambdas.values().all(|v| !v.is_negative()) && self.total() <= rational::one()
    }

    /// True when every state carrying weight has at most one transmitter.
    pub fn supported_on_single_transmitter(&self) -> bool {
        self.lambdas
            .iter()
            .all(|(&m, v)| v.is_zero() || m.count_ones() <= 1)
    }

    /// Relabels states from canonical to original relay indices.
    pub fn to_original_labels(&self, perm: &[usize]) -> Schedule {
        self.map_states(|s| map_set_to_original(s, perm))
    }

    pub fn map_states(&self, f: impl Fn(RelaySet) -> RelaySet) -> Schedule {
        Schedule {
            lambdas: self
                .lambdas
                .iter()
                .map(|(&m, v)| (f(RelaySet::from_mask(m)).mask(), v.clone()))
                .collect(),
            t: self.t.clone(),
        }
    }

    /// `Σ_S λ_S f(Ω, S)`.
    pub fn cut_rate(&self, table: &CutValueTable, omega: RelaySet) -> Rational {
        self.lambdas
            .iter()
            .map(|(&m, v)| v * from_int(table.cut_value(omega, RelaySet::from_mask(m)) as i64))
            .sum()
    }

    /// `(state, "p/q")` pairs, singletons before larger states.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut rows: Vec<(RelaySet, &Rational)> = self
            .lambdas
            .iter()
            .map(|(&m, v)| (RelaySet::from_mask(m), v))
            .collect();
        rows.sort_by_key(|(s, _)| (s.len(), s.mask()));
        rows.into_iter()
            .map(|(s, v)| (s.to_string(), fraction_string(v)))
            .collect()
    }
}

fn single_transmitter_schedule(values: &[Rational], t: Rational) -> Schedule {
    let n = values.len() - 1;
    let lambdas = values
        .iter()
        .enumerate()
        .map(|(j, v)| (state_for_column(j, n).mask(), v.clone()))
        .collect();
    Schedule { lambdas, t }
}

/// `λ_{i} = (-1)^i P_i / det`, `λ_∅ = (-1)^(n+1) P_{n+1} / det`,
/// `t* = P_0 / det`, with every postcondition asserted.
pub fn closed_form_schedule(pm: &PMatrix) -> Result<Schedule> {
    if !pm.det_nonzero() || !pm.ratio_sign_ok() {
        return Err(Error::ConditionNotMet(format!(
            "det P = {} with empty-state numerator {}",
            pm.det,
            pm.signed_minor(pm.n() + 1)
        )));
    }
    let n = pm.n();
    let det = &pm.det;
    let ratio = |i: usize| BigRational::new(pm.signed_minor(i), det.clone());
    let values: Vec<Rational> = (1..=n + 1).map(ratio).collect();
    if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
        return Err(Error::Inconsistency(format!(
            "closed-form weight of {} is negative ({})",
            state_for_column(j, n),
            fraction_string(v)
        )));
    }
    let total: Rational = values.iter().sum();
    if total != rational::one() {
        return Err(Error::Inconsistency(format!(
            "closed-form weights sum to {}",
            fraction_string(&total)
        )));
    }
    // every row i ≥ 1 of P x = e_0 reads t = Σ λ_S f([i:n], S)
    let mut t: Option<Rational> = None;
    for row in &pm.entries[1..] {
        let g: Rational = values
            .iter()
            .zip(&row[1..])
            .map(|(v, &e)| v * from_int(-e))
            .sum();
        match &t {
            None => t = Some(g),
            Some(t0) if *t0 != g => {
                return Err(Error::Inconsistency(format!(
                    "rate differs across suffix cuts: {} vs {}",
                    fraction_string(t0),
                    fraction_string(&g)
                )))
            }
            _ => {}
        }
    }
    let t = t.expect("at least one cut row");
    if t != ratio(0) {
        return Err(Error::Inconsistency(format!(
            "rate {} disagrees with Cramer value {}",
            fraction_string(&t),
            fraction_string(&ratio(0))
        )));
    }
    Ok(single_transmitter_schedule(&values, t))
}

/// Solves `P (t, λ_{1..n}, λ_∅)ᵀ = e_0` by rational elimination.
pub fn linear_system_schedule(pm: &PMatrix) -> Result<Schedule> {
    let a: Vec<Vec<Rational>> = pm
        .entries
        .iter()
        .map(|r| r.iter().map(|&v| from_int(v)).collect())
        .collect();
    let mut b = vec![Rational::zero(); a.len()];
    b[0] = rational::one();
    let x = rational::solve(&a, &b)
        .ok_or_else(|| Error::ConditionNotMet("P is singular".into()))?;
    let t = x[0].clone();
    Ok(single_transmitter_schedule(&x[1..], t))
}

/// Backward recursion for the single-relay weights:
///
/// `λ_i (ℓ_is − ℓ_(i−1)s) = (ℓ_is − t*) + Σ_{j>i} λ_j (f([i+1:n],{j}) − ℓ_is)`
///
/// for `i = n, …, 1` (1-based, `ℓ_0s = 0`), then `λ_∅ = 1 − Σ λ_i`. Where the
/// pivot vanishes the equation leaves `λ_i` free; it is then taken from
/// `fallback` provided the residual is zero. The unused `i = 0` equation is
/// checked as a residual at the end.
pub fn schedule_via_recursion(
    table: &CutValueTable,
    t_star: &Rational,
    fallback: &Schedule,
) -> Result<Schedule> {
    let net = table.network();
    if !net.is_canonical() {
        return Err(Error::InvalidInput(
            "recursion needs relays sorted by source capacity".into(),
        ));
    }
    let n = net.n();
    let ls = |label: usize| from_int(net.source_cap_label(label) as i64);
    let f = |i: usize, j: usize| from_int(table.suffix_cut_value(i, RelaySet::singleton(j - 1)) as i64);
    let mut lambda = vec![Rational::zero(); n + 1];
    for i in (0..=n).rev() {
        let mut rhs = ls(i) - t_star;
        for j in i + 1..=n {
            rhs += &lambda[j] * (f(i + 1, j) - ls(i));
        }
        let pivot = if i == 0 { Rational::zero() } else { ls(i) - ls(i - 1) };
        if !pivot.is_zero() {
            lambda[i] = rhs / pivot;
        } else if !rhs.is_zero() {
            if i == 0 {
                return Err(Error::Inconsistency(format!(
                    "recursion residual {} on the first cut",
                    fraction_string(&rhs)
                )));
            }
            return Err(Error::RecursionInapplicable {
                relay: i,
                residual: fraction_string(&rhs),
            });
        } else if i > 0 {
            lambda[i] = fallback.lambda(RelaySet::singleton(i - 1));
        }
    }
    let mut values: Vec<Rational> = lambda[1..].to_vec();
    let empty = rational::one() - values.iter().sum::<Rational>();
    values.push(empty);
    Ok(single_transmitter_schedule(&values, t_star.clone()))
}
