//! Seeded batch runs comparing the closed form against the LP oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::CutValueTable;
use crate::error::{Error, Result};
use crate::lp::{solve_full_lp, solve_relaxed_lp, MAX_LP_RELAYS};
use crate::network::Network;
use crate::pmatrix::build_p_matrix;
use crate::rational::fraction_string;
use crate::schedule::{closed_form_schedule, linear_system_schedule, schedule_via_recursion};
use crate::theorem::{check_receive_mode_dual_with, verdict_for, OracleStatus, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub n: usize,
    pub max_cap: u32,
    pub count: usize,
    pub seed: u64,
    /// When false, relay-to-relay links are zeroed after drawing.
    pub relay_links: bool,
    /// Worker cap; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl SweepConfig {
    /// Job `index` uses seed `seed + index` (wrapping).
    pub fn job_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    /// The network analysed by job `index`.
    pub fn network(&self, index: usize) -> Result<Network> {
        let net = Network::random(self.n, self.max_cap, self.job_seed(index))?;
        Ok(if self.relay_links { net } else { net.without_relay_links() })
    }
}

/// One line of sweep output. Rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub max_cap: u32,
    pub verdict: Verdict,
    pub det: String,
    pub t_star: Option<String>,
    pub c_ld: String,
    pub c_u: String,
    /// `t* = C^LD`; only present when the conditions hold.
    #[serde(rename = "match")]
    pub matches: Option<bool>,
    /// Whether the LP optimum found happens to use single-transmitter states only.
    pub oracle_single_transmitter: bool,
    /// Verdict of the single-receiver analysis (on the reversed network).
    pub dual_verdict: Verdict,
    /// `verified` or `suboptimal` when the dual verdict holds, else absent.
    pub dual_status: Option<String>,
}

/// A closed-form/oracle disagreement; the sweep stops at the first one.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub index: usize,
    pub seed: u64,
    pub network: Network,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
    pub matches: usize,
    pub dual_holds: usize,
    pub dual_verified: usize,
    pub dual_suboptimal: usize,
}

impl SweepSummary {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let mut s = SweepSummary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.verdict {
                Verdict::ConditionsHold => s.holds += 1,
                Verdict::ConditionsFail => s.fails += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
            }
            if r.matches == Some(true) {
                s.matches += 1;
            }
            if r.dual_verdict == Verdict::ConditionsHold {
                s.dual_holds += 1;
            }
            match r.dual_status.as_deref() {
                Some("verified") => s.dual_verified += 1,
                Some("suboptimal") => s.dual_suboptimal += 1,
                _ => {}
            }
        }
        s
    }
}

/// Analyses one network. `Err(reason)` means the closed form and the oracle
/// disagree, or the three schedule routes disagree.
pub fn analyse(
    net: &Network,
    index: usize,
    seed: u64,
    max_cap: u32,
) -> Result<std::result::Result<SweepRecord, String>> {
    let n = net.n();
    let (canon, _) = net.canonicalize();
    let table = CutValueTable::new(canon);
    let pm = build_p_matrix(&table);
    let verdict = verdict_for(&pm);
    // C^LD does not depend on relay order; solve it once on the original
    // labels so the single-receiver check can reuse both table and value
    let original = CutValueTable::new(net.clone());
    let full = solve_full_lp(&original)?;
    let relaxed = solve_relaxed_lp(&table)?;

    if relaxed.value < full.value {
        return Ok(Err(format!(
            "C^U = {} below C^LD = {}",
            fraction_string(&relaxed.value),
            fraction_string(&full.value)
        )));
    }

    let mut t_star = None;
    let mut matches = None;
    if verdict == Verdict::ConditionsHold {
        let cf = match closed_form_schedule(&pm) {
            Ok(s) => s,
            Err(e) => return Ok(Err(format!("closed form: {e}"))),
        };
        match linear_system_schedule(&pm) {
            Ok(s) if s == cf => {}
            Ok(_) => return Ok(Err("linear-system schedule differs from closed form".into())),
            Err(e) => return Ok(Err(format!("linear system: {e}"))),
        }
        match schedule_via_recursion(&table, &cf.t, &cf) {
            Ok(s) if s == cf => {}
            Ok(_) => return Ok(Err("recursion schedule differs from closed form".into())),
            Err(Error::RecursionInapplicable { .. }) => {}
            Err(e) => return Ok(Err(format!("recursion: {e}"))),
        }
        let ok = cf.t == full.value && relaxed.value == full.value;
        if !ok {
            return Ok(Err(format!(
                "t* = {}, C^LD = {}, C^U = {}",
                fraction_string(&cf.t),
                fraction_string(&full.value),
                fraction_string(&relaxed.value)
            )));
        }
        t_star = Some(fraction_string(&cf.t));
        matches = Some(true);
    }

    let dual = check_receive_mode_dual_with(&original, Some(&full.value))?;
    let dual_status = dual.oracle_check.as_ref().map(|c| {
        match c.status {
            OracleStatus::Verified => "verified",
            OracleStatus::Suboptimal => "suboptimal",
            OracleStatus::Unverified => "unverified",
        }
        .to_string()
    });

    Ok(Ok(SweepRecord {
        index,
        seed,
        n,
        max_cap,
        verdict,
        det: pm.det.to_string(),
        t_star,
        c_ld: fraction_string(&full.value),
        c_u: fraction_string(&relaxed.value),
        matches,
        oracle_single_transmitter: full.as_schedule().supported_on_single_transmitter(),
        dual_verdict: dual.verdict,
        dual_status,
    }))
}

/// Runs `config.count` jobs in parallel. Records come back ordered by job
/// index. On a mismatch the lowest-index offender is returned instead.
pub fn run_sweep(config: &SweepConfig) -> Result<std::result::Result<Vec<SweepRecord>, Mismatch>> {
    if config.n == 0 || config.n > MAX_LP_RELAYS {
        return Err(Error::CapacityExceeded {
            n: config.n,
            limit: MAX_LP_RELAYS,
        });
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;

    let results: Vec<Result<std::result::Result<SweepRecord, Mismatch>>> = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|index| {
                let seed = config.job_seed(index);
                let net = config.network(index)?;
                Ok(analyse(&net, index, seed, config.max_cap)?.map_err(|reason| Mismatch {
                    index,
                    seed,
                    network: net,
                    reason,
                }))
            })
            .collect()
    });

    let mut records = Vec::with_capacity(config.count);
    for r in results {
        match r? {
            Ok(rec) => records.push(rec),
            Err(m) => return Ok(Err(m)),
        }
    }
    Ok(Ok(records))
}
