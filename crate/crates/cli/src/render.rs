//! Human-readable text for reports.

use std::fmt::Write;

use relay_sched::lp::LpSolution;
use relay_sched::rational::{fraction_string, to_f64};
use relay_sched::theorem::{OracleStatus, StateFamily};
use relay_sched::{Rational, RelaySet, Schedule, TheoremReport};

use crate::Flags;

pub fn frac(q: &Rational, flags: Flags) -> String {
    if flags.float {
        format!("{} (~{:.6})", fraction_string(q), to_f64(q))
    } else {
        fraction_string(q)
    }
}

/// One line per state carrying weight, singletons first.
pub fn schedule_lines(out: &mut String, sched: &Schedule, flags: Flags) {
    let mut rows: Vec<(RelaySet, &Rational)> = sched
        .lambdas
        .iter()
        .map(|(&m, v)| (RelaySet::from_mask(m), v))
        .collect();
    rows.sort_by_key(|(s, _)| (s.len(), s.mask()));
    let labels: Vec<String> = rows.iter().map(|(s, _)| s.to_string()).collect();
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0);
    for (label, (_, v)) in labels.iter().zip(&rows) {
        let _ = writeln!(out, "  {label:<width$}  {}", frac(v, flags));
    }
}

pub fn theorem_text(rep: &TheoremReport, n: usize, fallback: Option<&LpSolution>, flags: Flags) -> String {
    let mut out = String::new();
    let family = match rep.family {
        StateFamily::SingleTransmitter => "single-transmitter",
        StateFamily::SingleReceiver => "single-receiver (reversed network)",
    };
    let order: Vec<String> = rep.permutation.iter().map(|p| (p + 1).to_string()).collect();
    let _ = writeln!(out, "relays: {n}, states: {family}");
    let _ = writeln!(out, "canonical order: {}", order.join(","));
    let _ = writeln!(out, "P =");
    for row in &rep.pmatrix.entries {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        let _ = writeln!(out, "  {}", cells.join(""));
    }
    let _ = writeln!(out, "det P = {}", rep.pmatrix.det);
    let minors: Vec<String> = rep.pmatrix.minors.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(out, "minors = [{}]", minors.join(", "));
    let _ = writeln!(out, "verdict: {}", rep.verdict.as_str());
    if let Some(sched) = &rep.schedule {
        let _ = writeln!(out, "t* = {}", frac(&sched.t, flags));
        let _ = writeln!(out, "schedule:");
        schedule_lines(&mut out, sched, flags);
    }
    if let Some(cert) = &rep.dual {
        let _ = writeln!(out, "mu_p = {}", frac(&cert.mu_p, flags));
        let mu: Vec<String> = cert.mu.iter().map(|m| frac(m, flags)).collect();
        let _ = writeln!(out, "mu = [{}]", mu.join(", "));
    }
    if let Some(check) = &rep.oracle_check {
        let status = match check.status {
            OracleStatus::Verified => "verified optimal by the LP oracle",
            OracleStatus::Suboptimal => "suboptimal heuristic: below the LP optimum",
            OracleStatus::Unverified => "not verified (network too large for the LP oracle)",
        };
        let _ = writeln!(out, "oracle check: {status}");
        if let (Some(r), Some(o)) = (&check.schedule_rate, &check.oracle_value) {
            let _ = writeln!(out, "  schedule rate = {}, C^LD = {}", frac(r, flags), frac(o, flags));
        }
    }
    if let Some(lp) = fallback {
        let _ = writeln!(out, "LP oracle: C^LD = {}", frac(&lp.value, flags));
    }
    out
}
