//! Exact analysis of half-duplex diamond relay networks under the linear
//! deterministic model.
//!
//! Given integer link capacities, the crate computes every cut value as a
//! GF(2) rank, decides whether a schedule using at most one transmitting
//! relay at a time is optimal, builds that schedule in closed form together
//! with a KKT certificate, and cross-checks everything against an exact
//! rational simplex over all `2^n` states and cuts.

pub mod cut;
pub mod dual;
pub mod error;
pub mod gf2;
pub mod lp;
pub mod network;
pub mod pmatrix;
pub mod rational;
pub mod schedule;
pub mod sweep;
pub mod theorem;
pub mod verify;

pub use cut::CutValueTable;
pub use dual::DualCertificate;
pub use error::{Error, Result};
pub use lp::{LpSolution, LpStatus};
pub use network::{Network, RelaySet};
pub use pmatrix::PMatrix;
pub use rational::Rational;
pub use schedule::Schedule;
pub use theorem::{check_receive_mode_dual, check_theorem1, TheoremReport, Verdict};
