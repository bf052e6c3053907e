//! Structural properties of cut values and of the closed-form solution,
//! checked exhaustively on a single network.

use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::cut::{rank_lower_bound, CutValueTable};
use crate::dual::{dual_certificate_with, MAX_DUAL_RELAYS};
use crate::lp::{solve_full_lp, solve_relaxed_lp, verify_schedule_feasible, MAX_LP_RELAYS};
use crate::network::{Network, RelaySet};
use crate::pmatrix::build_p_matrix;
use crate::rational::fraction_string;
use crate::schedule::{closed_form_schedule, linear_system_schedule, schedule_via_recursion};
use crate::theorem::{check_receive_mode_dual, verdict_for, OracleStatus, Verdict};

/// Subset-pair checks touch `8^n` triples; above this they are skipped.
pub const MAX_EXHAUSTIVE_RELAYS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "detail")]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.outcome, Outcome::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks
            .iter()
            .filter(|c| matches!(c.outcome, Outcome::Fail(_)))
    }

    fn push(&mut self, name: &str, outcome: Outcome) {
        self.checks.push(PropertyCheck {
            name: name.to_string(),
            outcome,
        });
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.outcome {
                Outcome::Pass => writeln!(f, "PASS  {}", c.name)?,
                Outcome::Fail(d) => writeln!(f, "FAIL  {}: {d}", c.name)?,
                Outcome::Skipped(d) => writeln!(f, "SKIP  {}: {d}", c.name)?,
            }
        }
        Ok(())
    }
}

fn first_failure(mut it: impl Iterator<Item = String>) -> Outcome {
    match it.next() {
        Some(d) => Outcome::Fail(d),
        None => Outcome::Pass,
    }
}

/// Lower bound everywhere, equality whenever one side of the cut is empty.
/// Compares the fast path against a full rank computation.
pub fn check_rank_bound(table: &CutValueTable) -> Outcome {
    let net = table.network();
    let n = net.n();
    let pairs = RelaySet::all_subsets(n)
        .flat_map(|o| RelaySet::all_subsets(n).map(move |s| (o, s)));
    first_failure(pairs.filter_map(|(o, s)| {
        let rank = table.cut_value_by_rank(o, s);
        let bound = rank_lower_bound(net, o, s);
        let one_sided = o.intersection(s).is_empty()
            || o.complement(n).intersection(s.complement(n)).is_empty();
        if rank < bound {
            Some(format!("f({o},{s}) = {rank} below bound {bound}"))
        } else if one_sided && rank != bound {
            Some(format!("f({o},{s}) = {rank} but closed form gives {bound}"))
        } else if table.cut_value(o, s) != rank {
            Some(format!("cached f({o},{s}) differs from rank {rank}"))
        } else {
            None
        }
    }))
}

/// `f(A,S) + f(B,S) ≥ f(A∩B,S) + f(A∪B,S)` for every state and cut pair.
pub fn check_submodular_in_cut(table: &CutValueTable) -> Outcome {
    let n = table.n();
    for s in RelaySet::all_subsets(n) {
        for a in RelaySet::all_subsets(n) {
            for b in RelaySet::all_subsets(n).filter(|b| b.mask() > a.mask()) {
                let lhs = table.cut_value(a, s) + table.cut_value(b, s);
                let rhs = table.cut_value(a.intersection(b), s) + table.cut_value(a.union(b), s);
                if lhs < rhs {
                    return Outcome::Fail(format!("state {s}, cuts {a} and {b}: {lhs} < {rhs}"));
                }
            }
        }
    }
    Outcome::Pass
}

/// `f(Ω,A) + f(Ω,B) ≥ f(Ω,A∪B) + f(Ω,A∩B)` for every cut and state pair.
pub fn check_submodular_in_state(table: &CutValueTable) -> Outcome {
    let n = table.n();
    for o in RelaySet::all_subsets(n) {
        for a in RelaySet::all_subsets(n) {
            for b in RelaySet::all_subsets(n).filter(|b| b.mask() > a.mask()) {
                let lhs = table.cut_value(o, a) + table.cut_value(o, b);
                let rhs = table.cut_value(o, a.union(b)) + table.cut_value(o, a.intersection(b));
                if lhs < rhs {
                    return Outcome::Fail(format!("cut {o}, states {a} and {b}: {lhs} < {rhs}"));
                }
            }
        }
    }
    Outcome::Pass
}

/// For sorted sources: `f([a:n],{j}) − ℓ_(a−1)s ≥ f([b:n],{j}) − ℓ_(b−1)s`
/// for all `1 ≤ b < a ≤ j ≤ n`.
pub fn check_suffix_gain(table: &CutValueTable) -> Outcome {
    let net = table.network();
    if !net.is_canonical() {
        return Outcome::Skipped("relays not sorted by source capacity".into());
    }
    let n = net.n();
    let val = |a: usize, j: usize| {
        table.suffix_cut_value(a, RelaySet::singleton(j - 1)) as i64
            - net.source_cap_label(a - 1) as i64
    };
    for j in 1..=n {
        for a in 2..=j {
            for b in 1..a {
                if val(a, j) < val(b, j) {
                    return Outcome::Fail(format!("a = {a}, b = {b}, j = {j}"));
                }
            }
        }
    }
    Outcome::Pass
}

/// If `ℓ_js = ℓ_(j−1)s = f([j:n],{j})` for some `j`, then `det P = 0`.
pub fn check_singular_condition(table: &CutValueTable) -> Outcome {
    let net = table.network();
    if !net.is_canonical() {
        return Outcome::Skipped("relays not sorted by source capacity".into());
    }
    let Some(j) = singular_witness(table) else {
        return Outcome::Skipped("hypothesis does not hold".into());
    };
    let pm = build_p_matrix(table);
    if pm.det_nonzero() {
        Outcome::Fail(format!("hypothesis holds at j = {j} but det P = {}", pm.det))
    } else {
        Outcome::Pass
    }
}

/// Smallest 1-based `j` with `ℓ_js = ℓ_(j−1)s = f([j:n],{j})`.
pub fn singular_witness(table: &CutValueTable) -> Option<usize> {
    let net = table.network();
    (1..=net.n()).find(|&j| {
        let l = net.source_cap_label(j);
        l == net.source_cap_label(j - 1)
            && l == table.suffix_cut_value(j, RelaySet::singleton(j - 1))
    })
}

/// Runs every applicable property on `net`.
pub fn run_battery(net: &Network) -> PropertyReport {
    let mut report = PropertyReport::default();
    let (canon, _) = net.canonicalize();
    let n = canon.n();
    let table = CutValueTable::new(canon);

    if n <= MAX_EXHAUSTIVE_RELAYS {
        report.push("rank lower bound and equality cases", check_rank_bound(&table));
        report.push("submodularity in the cut", check_submodular_in_cut(&table));
        report.push("submodularity in the state", check_submodular_in_state(&table));
    } else {
        for name in [
            "rank lower bound and equality cases",
            "submodularity in the cut",
            "submodularity in the state",
        ] {
            report.push(name, Outcome::Skipped(format!("n > {MAX_EXHAUSTIVE_RELAYS}")));
        }
    }
    report.push("suffix gain inequality", check_suffix_gain(&table));
    report.push("singular condition forces det P = 0", check_singular_condition(&table));

    let pm = build_p_matrix(&table);
    report.push(
        "cofactor expansion of det P",
        if pm.laplace_holds() { Outcome::Pass } else { Outcome::Fail("row-0 expansion differs".into()) },
    );

    let verdict = verdict_for(&pm);
    if verdict == Verdict::ConditionsHold && n <= MAX_DUAL_RELAYS {
        report.push(
            "KKT multipliers non-negative",
            match dual_certificate_with(&table, &pm) {
                Ok(_) => Outcome::Pass,
                Err(e) => Outcome::Fail(e.to_string()),
            },
        );
    }

    let lp_ok = n <= MAX_LP_RELAYS;
    let (full, relaxed) = if lp_ok {
        match (solve_full_lp(&table), solve_relaxed_lp(&table)) {
            (Ok(f), Ok(r)) => (Some(f), Some(r)),
            (f, r) => {
                let msg = f.err().or(r.err()).map(|e| e.to_string()).unwrap_or_default();
                report.push("exact LP oracle", Outcome::Fail(msg));
                (None, None)
            }
        }
    } else {
        (None, None)
    };
    if let (Some(full), Some(relaxed)) = (&full, &relaxed) {
        report.push(
            "relaxed optimum bounds the full optimum",
            if relaxed.value >= full.value {
                Outcome::Pass
            } else {
                Outcome::Fail(format!(
                    "C^U = {} < C^LD = {}",
                    fraction_string(&relaxed.value),
                    fraction_string(&full.value)
                ))
            },
        );
    }

    if verdict == Verdict::ConditionsHold {
        match closed_form_schedule(&pm) {
            Err(e) => report.push("closed-form schedule", Outcome::Fail(e.to_string())),
            Ok(cf) => {
                report.push("closed-form schedule", Outcome::Pass);
                let linear = linear_system_schedule(&pm);
                report.push(
                    "closed form agrees with linear solve",
                    match linear {
                        Ok(ref s) if *s == cf => Outcome::Pass,
                        Ok(_) => Outcome::Fail("schedules differ".into()),
                        Err(e) => Outcome::Fail(e.to_string()),
                    },
                );
                report.push(
                    "closed form agrees with backward recursion",
                    match schedule_via_recursion(&table, &cf.t, &cf) {
                        Ok(ref s) if *s == cf => Outcome::Pass,
                        Ok(_) => Outcome::Fail("schedules differ".into()),
                        Err(e @ crate::Error::RecursionInapplicable { .. }) => {
                            Outcome::Skipped(e.to_string())
                        }
                        Err(e) => Outcome::Fail(e.to_string()),
                    },
                );
                if n <= MAX_LP_RELAYS {
                    let feas = verify_schedule_feasible(&table, &cf);
                    report.push(
                        "closed form feasible on every cut",
                        if feas.feasible {
                            Outcome::Pass
                        } else {
                            Outcome::Fail(format!("min cut rate {}", fraction_string(&feas.min_rate)))
                        },
                    );
                }
                if let (Some(full), Some(relaxed)) = (&full, &relaxed) {
                    let ok = full.value == cf.t && relaxed.value == cf.t;
                    report.push(
                        "closed form attains C^LD and C^U",
                        if ok {
                            Outcome::Pass
                        } else {
                            Outcome::Fail(format!(
                                "t* = {}, C^LD = {}, C^U = {}",
                                fraction_string(&cf.t),
                                fraction_string(&full.value),
                                fraction_string(&relaxed.value)
                            ))
                        },
                    );
                }
                if n <= MAX_DUAL_RELAYS {
                    if let Ok(cert) = dual_certificate_with(&table, &pm) {
                        report.push(
                            "strong duality t* = mu_p",
                            if cert.mu_p == cf.t {
                                Outcome::Pass
                            } else {
                                Outcome::Fail(format!("mu_p = {}", fraction_string(&cert.mu_p)))
                            },
                        );
                    }
                }
                if cf.lambdas.values().any(|v| v.is_negative()) {
                    report.push("closed-form weights non-negative", Outcome::Fail("negative".into()));
                }
            }
        }
    }

    if lp_ok {
        report.push(
            "single-receiver schedule verified or flagged",
            match check_receive_mode_dual(net) {
                Err(e) => Outcome::Fail(e.to_string()),
                Ok(rep) => match rep.oracle_check.map(|c| c.status) {
                    None => Outcome::Skipped("reversed network fails the conditions".into()),
                    Some(OracleStatus::Verified) => Outcome::Pass,
                    Some(OracleStatus::Suboptimal) => {
                        Outcome::Skipped("flagged as suboptimal heuristic".into())
                    }
                    Some(OracleStatus::Unverified) => Outcome::Skipped("too large for oracle".into()),
                },
            },
        );
    }
    report
}
