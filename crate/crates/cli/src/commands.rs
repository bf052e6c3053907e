//! Subcommand bodies. Each builds its complete output before anything is
//! printed, so error paths never leave partial reports behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use relay_sched::cut::{rank_lower_bound, transfer_matrix};
use relay_sched::lp::{solve_full_lp, LpSolution, MAX_LP_RELAYS};
use relay_sched::rational::serde_fraction;
use relay_sched::sweep::{run_sweep, SweepConfig, SweepRecord, SweepSummary};
use relay_sched::theorem::OracleStatus;
use relay_sched::verify::run_battery;
use relay_sched::{
    check_receive_mode_dual, check_theorem1, CutValueTable, Error, Network, Rational, RelaySet,
    Result, Schedule, TheoremReport, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::render::{frac, schedule_lines, theorem_text};
use crate::{Flags, SweepFormat};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }
}

pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::Parse { .. }
        | Error::CapacityExceeded { .. }
        | Error::Io(_) => EXIT_INPUT,
        Error::ConditionNotMet(_) => EXIT_INCONCLUSIVE,
        Error::RecursionInapplicable { .. } | Error::Inconsistency(_) | Error::Solver(_) => {
            EXIT_INTERNAL
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::ConditionsHold => EXIT_OK,
        Verdict::ConditionsFail => EXIT_FAILS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn load(path: &Path) -> Result<Network> {
    let bytes = fs::read(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Network::parse(&bytes)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn analyse(net: &Network, flags: Flags) -> Result<TheoremReport> {
    if flags.dual {
        check_receive_mode_dual(net)
    } else {
        check_theorem1(net)
    }
}

pub fn check(path: &Path, flags: Flags) -> Result<Output> {
    let net = load(path)?;
    let rep = analyse(&net, flags)?;
    let code = verdict_code(rep.verdict);
    if flags.json {
        return Ok(Output {
            stdout: to_json(&rep),
            stderr: String::new(),
            code,
        });
    }
    // no verdict from the conditions: fall back to the oracle where it fits
    let wants_oracle = rep.verdict == Verdict::Inconclusive || flags.oracle;
    let fallback = if wants_oracle && net.n() <= MAX_LP_RELAYS {
        Some(solve_full_lp(&CutValueTable::new(net.clone()))?)
    } else {
        None
    };
    Ok(Output {
        stdout: theorem_text(&rep, net.n(), fallback.as_ref(), flags),
        stderr: String::new(),
        code,
    })
}

/// Result of `capacity` and `schedule`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityReport {
    #[serde(with = "serde_fraction")]
    pub value: Rational,
    /// `closed-form` or `lp`.
    pub method: String,
    pub verdict: Verdict,
    pub schedule: Schedule,
}

fn capacity_report(net: &Network, flags: Flags) -> Result<CapacityReport> {
    let rep = analyse(net, flags)?;
    let trusted = match &rep.oracle_check {
        Some(c) => c.status == OracleStatus::Verified,
        None => true,
    };
    if !flags.oracle && trusted {
        if let Some(sched) = rep.schedule {
            return Ok(CapacityReport {
                value: sched.t.clone(),
                method: "closed-form".into(),
                verdict: rep.verdict,
                schedule: sched,
            });
        }
    }
    let lp: LpSolution = solve_full_lp(&CutValueTable::new(net.clone()))?;
    Ok(CapacityReport {
        value: lp.value.clone(),
        method: "lp".into(),
        verdict: rep.verdict,
        schedule: lp.as_schedule(),
    })
}

pub fn capacity(path: &Path, flags: Flags) -> Result<Output> {
    let net = load(path)?;
    let rep = capacity_report(&net, flags)?;
    if flags.json {
        return Ok(Output::ok(to_json(&rep)));
    }
    Ok(Output::ok(format!(
        "C^LD = {} ({})\n",
        frac(&rep.value, flags),
        rep.method
    )))
}

pub fn schedule(path: &Path, flags: Flags) -> Result<Output> {
    let net = load(path)?;
    let rep = capacity_report(&net, flags)?;
    if flags.json {
        return Ok(Output::ok(to_json(&rep)));
    }
    let mut out = String::new();
    let _ = writeln!(out, "rate = {} ({})", frac(&rep.value, flags), rep.method);
    schedule_lines(&mut out, &rep.schedule, flags);
    Ok(Output::ok(out))
}

pub fn verify(path: &Path, flags: Flags) -> Result<Output> {
    let net = load(path)?;
    let rep = run_battery(&net);
    let code = if rep.all_pass() { EXIT_OK } else { EXIT_INTERNAL };
    let stdout = if flags.json {
        to_json(&rep)
    } else {
        rep.to_string()
    };
    Ok(Output {
        stdout,
        stderr: String::new(),
        code,
    })
}

pub struct SweepArgs {
    pub n: usize,
    pub max_cap: u32,
    pub count: usize,
    pub seed: u64,
    pub relay_links: bool,
    pub out: Option<PathBuf>,
    pub format: Option<SweepFormat>,
    pub repro: Option<PathBuf>,
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("RELAY_SCHED_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("RELAY_SCHED_THREADS = {v:?}"))),
    }
}

fn encode_records(records: &[SweepRecord], format: SweepFormat) -> Result<String> {
    match format {
        SweepFormat::Jsonl => {
            let mut s = String::new();
            for r in records {
                s.push_str(&serde_json::to_string(r).expect("records serialize"));
                s.push('\n');
            }
            Ok(s)
        }
        SweepFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r)
                    .map_err(|e| Error::Inconsistency(format!("csv: {e}")))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Inconsistency(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Writes through a temporary file in the target directory, so the
/// destination is either complete or untouched.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn sweep(args: SweepArgs, flags: Flags) -> Result<Output> {
    let config = SweepConfig {
        n: args.n,
        max_cap: args.max_cap,
        count: args.count,
        seed: args.seed,
        relay_links: args.relay_links,
        threads: threads_from_env()?,
    };
    let format = args.format.unwrap_or(match &args.out {
        Some(p) if p.extension().is_some_and(|e| e == "jsonl") => SweepFormat::Jsonl,
        _ => SweepFormat::Csv,
    });
    let records = match run_sweep(&config)? {
        Ok(r) => r,
        Err(m) => {
            let repro = args.repro.clone().unwrap_or_else(|| match &args.out {
                Some(p) => p.with_extension("repro.json"),
                None => PathBuf::from("sweep.repro.json"),
            });
            write_atomic(&repro, &m.network.to_json())?;
            return Ok(Output {
                stdout: String::new(),
                stderr: format!(
                    "mismatch at job {} (seed {}): {}\nnetwork written to {}\n",
                    m.index,
                    m.seed,
                    m.reason,
                    repro.display()
                ),
                code: EXIT_INTERNAL,
            });
        }
    };
    let body = encode_records(&records, format)?;
    let summary = SweepSummary::from_records(&records);
    let summary_text = if flags.json {
        to_json(&summary)
    } else {
        format!(
            "networks: {}, hold: {}, fail: {}, inconclusive: {}, matched: {}/{}\n\
             single-receiver holds: {}, verified: {}, suboptimal: {}\n",
            summary.total,
            summary.holds,
            summary.fails,
            summary.inconclusive,
            summary.matches,
            summary.holds,
            summary.dual_holds,
            summary.dual_verified,
            summary.dual_suboptimal
        )
    };
    match &args.out {
        Some(path) => {
            write_atomic(path, &body)?;
            Ok(Output::ok(summary_text))
        }
        None => Ok(Output {
            stdout: body,
            stderr: summary_text,
            code: EXIT_OK,
        }),
    }
}

/// Result of `rank`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub omega: RelaySet,
    pub state: RelaySet,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub lower_bound: u32,
    /// Row blocks: `d` then the listening relays behind the cut.
    pub row_blocks: Vec<String>,
    /// Column blocks: `s` then the transmitting relays in front of the cut.
    pub col_blocks: Vec<String>,
    pub matrix: Vec<String>,
}

pub fn rank(path: &Path, omega: &str, state: &str, flags: Flags) -> Result<Output> {
    let net = load(path)?;
    let n = net.n();
    let omega = RelaySet::parse_labels(omega, n)?;
    let state = RelaySet::parse_labels(state, n)?;
    let f = transfer_matrix(&net, omega, state)?;
    let inputs = omega.intersection(state);
    let outputs = omega.complement(n).intersection(state.complement(n));
    let mut row_blocks = vec!["d".to_string()];
    row_blocks.extend(outputs.iter().map(|i| (i + 1).to_string()));
    let mut col_blocks = vec!["s".to_string()];
    col_blocks.extend(inputs.iter().map(|j| (j + 1).to_string()));
    let rep = RankReport {
        omega,
        state,
        rows: f.rows(),
        cols: f.cols(),
        rank: f.rank(),
        lower_bound: rank_lower_bound(&net, omega, state),
        row_blocks,
        col_blocks,
        matrix: f.to_string().lines().map(str::to_string).collect(),
    };
    if flags.json {
        return Ok(Output::ok(to_json(&rep)));
    }
    let mut out = String::new();
    let _ = writeln!(out, "omega = {}, state = {}, eta = {}", rep.omega, rep.state, net.eta());
    let _ = writeln!(
        out,
        "row blocks: {}; column blocks: {}",
        rep.row_blocks.join(","),
        rep.col_blocks.join(",")
    );
    for line in &rep.matrix {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "rank = {}", rep.rank);
    let _ = writeln!(out, "lower bound = {}", rep.lower_bound);
    Ok(Output::ok(out))
}

pub fn gen(n: usize, max_cap: u32, seed: u64, out: Option<&Path>) -> Result<Output> {
    let net = Network::random(n, max_cap, seed)?;
    let mut doc = net.to_json();
    doc.push('\n');
    match out {
        Some(path) => {
            write_atomic(path, &doc)?;
            Ok(Output::ok(String::new()))
        }
        None => Ok(Output::ok(doc)),
    }
}
