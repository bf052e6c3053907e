//! KKT multipliers certifying that the single-transmitter schedule is
//! optimal for the relaxed program.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cut::{state_for_column, CutValueTable};
use crate::error::{Error, Result};
use crate::network::RelaySet;
use crate::pmatrix::{build_p_matrix, PMatrix};
use crate::rational::{
    self, fraction_string, from_int, serde_fraction, serde_fraction_map, serde_fraction_vec,
    Rational,
};

/// `σ` ranges over all `2^n` states; beyond this the certificate is not built.
pub const MAX_DUAL_RELAYS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// Multiplier of the time-sharing constraint.
    #[serde(with = "serde_fraction")]
    pub mu_p: Rational,
    /// Multipliers of the suffix cuts `[1:n], …, [n:n], ∅`.
    #[serde(with = "serde_fraction_vec")]
    pub mu: Vec<Rational>,
    /// Multipliers of `λ_S ≥ 0`, keyed by state mask.
    #[serde(with = "serde_fraction_map")]
    pub sigma: BTreeMap<u32, Rational>,
}

impl DualCertificate {
    pub fn sigma(&self, state: RelaySet) -> Rational {
        self.sigma[&state.mask()].clone()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.mu_p.is_negative()
            && self.mu.iter().all(|m| !m.is_negative())
            && self.sigma.values().all(|s| !s.is_negative())
    }
}

/// Solves `μ P = e_0` for `(μ_p, μ_1, …, μ_{n+1})` and sets
/// `σ_S = μ_p − Σ_i μ_i f([i:n], S)`. Fails when `P` is singular or any
/// multiplier comes out negative.
pub fn dual_certificate(table: &CutValueTable) -> Result<DualCertificate> {
    let pm = build_p_matrix(table);
    dual_certificate_with(table, &pm)
}

pub fn dual_certificate_with(table: &CutValueTable, pm: &PMatrix) -> Result<DualCertificate> {
    let n = table.n();
    if n > MAX_DUAL_RELAYS {
        return Err(Error::CapacityExceeded {
            n,
            limit: MAX_DUAL_RELAYS,
        });
    }
    let size = n + 2;
    // transpose, so that the row-vector system becomes Pᵀ μᵀ = e_0
    let pt: Vec<Vec<Rational>> = (0..size)
        .map(|c| (0..size).map(|r| from_int(pm.entries[r][c])).collect())
        .collect();
    let mut e0 = vec![Rational::zero(); size];
    e0[0] = rational::one();
    let sol = rational::solve(&pt, &e0)
        .ok_or_else(|| Error::ConditionNotMet("P is singular".into()))?;
    let mu_p = sol[0].clone();
    let mu: Vec<Rational> = sol[1..].to_vec();

    let total: Rational = mu.iter().sum();
    if total != rational::one() {
        return Err(Error::Inconsistency(format!(
            "cut multipliers sum to {}",
            fraction_string(&total)
        )));
    }

    let mut sigma = BTreeMap::new();
    for state in RelaySet::all_subsets(n) {
        let weighted: Rational = mu
            .iter()
            .enumerate()
            .map(|(i, m)| m * from_int(table.suffix_cut_value(i + 1, state) as i64))
            .sum();
        sigma.insert(state.mask(), &mu_p - weighted);
    }
    for j in 0..=n {
        let s = state_for_column(j, n);
        if !sigma[&s.mask()].is_zero() {
            return Err(Error::Inconsistency(format!(
                "complementary slackness fails on {s}: sigma = {}",
                fraction_string(&sigma[&s.mask()])
            )));
        }
    }
    let cert = DualCertificate { mu_p, mu, sigma };
    if !cert.is_nonnegative() {
        let worst = std::iter::once(("mu_p".to_string(), &cert.mu_p))
            .chain(cert.mu.iter().enumerate().map(|(i, m)| (format!("mu_{}", i + 1), m)))
            .chain(
                cert.sigma
                    .iter()
                    .map(|(&m, s)| (format!("sigma_{}", RelaySet::from_mask(m)), s)),
            )
            .find(|(_, v)| v.is_negative())
            .map(|(k, v)| format!("{k} = {}", fraction_string(v)))
            .unwrap_or_default();
        return Err(Error::Inconsistency(format!("negative KKT multiplier: {worst}")));
    }
    Ok(cert)
}
