//! Deciding whether single-transmitter (or single-receiver) scheduling is
//! optimal, and packaging the evidence.

use serde::{Deserialize, Serialize};

use crate::cut::CutValueTable;
use crate::dual::{dual_certificate_with, DualCertificate, MAX_DUAL_RELAYS};
use crate::error::Result;
use crate::lp::{solve_full_lp, verify_schedule_feasible, MAX_LP_RELAYS};
use crate::network::Network;
use crate::pmatrix::{build_p_matrix, PMatrix};
use crate::rational::{serde_fraction_opt, Rational};
use crate::schedule::{closed_form_schedule, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ConditionsHold,
    ConditionsFail,
    /// `det P = 0`: the sufficient conditions say nothing.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ConditionsHold => "ConditionsHold",
            Verdict::ConditionsFail => "ConditionsFail",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

/// Which family of states the report is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateFamily {
    /// `{∅, {1}, …, {n}}`: at most one relay transmits.
    SingleTransmitter,
    /// `{[n], [n]∖{1}, …, [n]∖{n}}`: at most one relay receives.
    SingleReceiver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleStatus {
    /// The schedule attains the exact LP optimum.
    Verified,
    /// The schedule is feasible but below the LP optimum; a heuristic only.
    Suboptimal,
    /// The network is too large for the LP oracle.
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub status: OracleStatus,
    /// Smallest cut rate of the schedule on the original network.
    #[serde(with = "serde_fraction_opt")]
    pub schedule_rate: Option<Rational>,
    #[serde(with = "serde_fraction_opt")]
    pub oracle_value: Option<Rational>,
}

/// Everything learned about one network.
///
/// `pmatrix` and `dual` refer to the canonical relay order of the analysed
/// network (`permutation[k]` is the original index of canonical relay `k`).
/// `schedule` is expressed in the caller's original relay labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub family: StateFamily,
    pub permutation: Vec<usize>,
    pub pmatrix: PMatrix,
    pub det_nonzero: bool,
    pub ratio_sign_ok: bool,
    pub verdict: Verdict,
    pub schedule: Option<Schedule>,
    pub dual: Option<DualCertificate>,
    pub oracle_check: Option<OracleCheck>,
}

impl TheoremReport {
    pub fn t_star(&self) -> Option<&Rational> {
        self.schedule.as_ref().map(|s| &s.t)
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::ConditionsHold
    }
}

pub fn verdict_for(pm: &PMatrix) -> Verdict {
    match (pm.det_nonzero(), pm.ratio_sign_ok()) {
        (false, _) => Verdict::Inconclusive,
        (true, true) => Verdict::ConditionsHold,
        (true, false) => Verdict::ConditionsFail,
    }
}

/// Canonicalises `net`, builds `P`, and when the sufficient conditions hold
/// attaches the closed-form schedule and (for `n ≤ 16`) the KKT certificate.
pub fn check_theorem1(net: &Network) -> Result<TheoremReport> {
    let (canon, permutation) = net.canonicalize();
    let table = CutValueTable::new(canon);
    let pmatrix = build_p_matrix(&table);
    let verdict = verdict_for(&pmatrix);
    let (schedule, dual) = if verdict == Verdict::ConditionsHold {
        let sched = closed_form_schedule(&pmatrix)?;
        let dual = if table.n() <= MAX_DUAL_RELAYS {
            Some(dual_certificate_with(&table, &pmatrix)?)
        } else {
            None
        };
        (Some(sched.to_original_labels(&permutation)), dual)
    } else {
        (None, None)
    };
    Ok(TheoremReport {
        family: StateFamily::SingleTransmitter,
        det_nonzero: pmatrix.det_nonzero(),
        ratio_sign_ok: pmatrix.ratio_sign_ok(),
        permutation,
        pmatrix,
        verdict,
        schedule,
        dual,
        oracle_check: None,
    })
}

/// Single-receiver analysis: run the single-transmitter test on the reversed
/// network and complement every state of the resulting schedule. The mapped
/// schedule is always checked against the LP oracle on `net` itself.
pub fn check_receive_mode_dual(net: &Network) -> Result<TheoremReport> {
    let table = CutValueTable::new(net.clone());
    check_receive_mode_dual_with(&table, None)
}

/// As [`check_receive_mode_dual`], for a cut table of the network in its
/// original order. `oracle_value` skips the LP when `C^LD` is already known.
pub fn check_receive_mode_dual_with(
    table: &CutValueTable,
    oracle_value: Option<&Rational>,
) -> Result<TheoremReport> {
    let net = table.network();
    let n = net.n();
    let mut report = check_theorem1(&net.reverse())?;
    report.family = StateFamily::SingleReceiver;
    if let Some(sched) = report.schedule.take() {
        let mapped = sched.map_states(|s| s.complement(n));
        report.oracle_check = Some(if n <= MAX_LP_RELAYS {
            let rate = verify_schedule_feasible(table, &mapped).min_rate;
            let oracle = match oracle_value {
                Some(v) => v.clone(),
                None => solve_full_lp(table)?.value,
            };
            OracleCheck {
                status: if rate == oracle {
                    OracleStatus::Verified
                } else {
                    OracleStatus::Suboptimal
                },
                schedule_rate: Some(rate),
                oracle_value: Some(oracle),
            }
        } else {
            OracleCheck {
                status: OracleStatus::Unverified,
                schedule_rate: None,
                oracle_value: None,
            }
        });
        report.schedule = Some(mapped);
    }
    Ok(report)
}
