//! Diamond network instances under the linear deterministic model.
//!
//! Relays are indexed from 0 internally. Everything user-facing (set
//! notation, CLI arguments, reports) uses 1-based labels.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest relay count representable by a [`RelaySet`] mask.
pub const MAX_RELAYS: usize = 30;

/// A subset of the relays, used both for cuts (relays on the source side)
/// and for states (relays in transmit mode).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelaySet(u32);

impl RelaySet {
    pub const EMPTY: RelaySet = RelaySet(0);

    pub fn from_mask(mask: u32) -> Self {
        RelaySet(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// All relays `[0, n)`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_RELAYS);
        RelaySet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(relay: usize) -> Self {
        debug_assert!(relay < MAX_RELAYS);
        RelaySet(1 << relay)
    }

    /// Relays `start..end` (0-based, half open). The 1-based interval `[i:n]`
    /// is `range(i - 1, n)`.
    pub fn range(start: usize, end: usize) -> Self {
        if start >= end {
            return RelaySet::EMPTY;
        }
        RelaySet(RelaySet::full(end).0 & !RelaySet::full(start).0)
    }

    pub fn contains(self, relay: usize) -> bool {
        relay < 32 && self.0 >> relay & 1 == 1
    }

    pub fn insert(&mut self, relay: usize) {
        self.0 |= 1 << relay;
    }

    pub fn complement(self, n: usize) -> Self {
        RelaySet(!self.0 & RelaySet::full(n).0)
    }

    pub fn intersection(self, other: Self) -> Self {
        RelaySet(self.0 & other.0)
    }

    pub fn union(self, other: Self) -> Self {
        RelaySet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 >> i & 1 == 1)
    }

    /// Every subset of `[0, n)` in mask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = RelaySet> {
        (0..1u32 << n).map(RelaySet)
    }

    /// Parses a comma separated list of 1-based relay labels; the empty
    /// string is the empty set.
    pub fn parse_labels(text: &str, n: usize) -> Result<Self> {
        let mut set = RelaySet::EMPTY;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let label: usize = part
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad relay label {part:?}")))?;
            if label == 0 || label > n {
                return Err(Error::InvalidInput(format!(
                    "relay label {label} outside 1..={n}"
                )));
            }
            set.insert(label - 1);
        }
        Ok(set)
    }
}

impl fmt::Display for RelaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// An n-relay diamond network with integer link capacities.
///
/// `cap_relay[i][j]` is the capacity of the link from relay `j` into relay
/// `i`. There is no direct source to destination link.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Network {
    cap_from_source: Vec<u32>,
    cap_to_dest: Vec<u32>,
    cap_relay: Vec<Vec<u32>>,
    eta: u32,
}

impl Network {
    pub fn new(
        cap_from_source: Vec<u32>,
        cap_to_dest: Vec<u32>,
        cap_relay: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let n = cap_from_source.len();
        if n == 0 || n > MAX_RELAYS {
            return Err(Error::InvalidInput(format!(
                "relay count {n} outside 1..={MAX_RELAYS}"
            )));
        }
        if cap_to_dest.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} relay-to-destination capacities, got {}",
                cap_to_dest.len()
            )));
        }
        if cap_relay.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} rows of relay-to-relay capacities, got {}",
                cap_relay.len()
            )));
        }
        for (i, row) in cap_relay.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "relay-to-relay row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(Error::InvalidInput(format!(
                    "self-link of relay {} must be 0",
                    i + 1
                )));
            }
        }
        let eta = cap_from_source
            .iter()
            .chain(&cap_to_dest)
            .chain(cap_relay.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0);
        Ok(Network {
            cap_from_source,
            cap_to_dest,
            cap_relay,
            eta,
        })
    }

    /// Network without relay-to-relay links.
    pub fn non_interconnected(cap_from_source: Vec<u32>, cap_to_dest: Vec<u32>) -> Result<Self> {
        let n = cap_from_source.len();
        Network::new(cap_from_source, cap_to_dest, vec![vec![0; n]; n])
    }

    /// Same source and destination links, relay-to-relay links removed.
    pub fn without_relay_links(&self) -> Network {
        Network::non_interconnected(self.cap_from_source.clone(), self.cap_to_dest.clone())
            .expect("sizes already validated")
    }

    pub fn n(&self) -> usize {
        self.cap_from_source.len()
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    /// Capacity from the source into `relay`.
    pub fn from_source(&self, relay: usize) -> u32 {
        self.cap_from_source[relay]
    }

    /// Capacity from `relay` into the destination.
    pub fn to_dest(&self, relay: usize) -> u32 {
        self.cap_to_dest[relay]
    }

    /// Capacity of the link `from -> to` between relays.
    pub fn relay_link(&self, to: usize, from: usize) -> u32 {
        self.cap_relay[to][from]
    }

    pub fn cap_from_source(&self) -> &[u32] {
        &self.cap_from_source
    }

    pub fn cap_to_dest(&self) -> &[u32] {
        &self.cap_to_dest
    }

    pub fn cap_relay(&self) -> &[Vec<u32>] {
        &self.cap_relay
    }

    /// `ℓ_{is}` with the convention that index 0 (and anything below) is 0.
    /// `label` is 1-based.
    pub fn source_cap_label(&self, label: usize) -> u32 {
        if label == 0 {
            0
        } else {
            self.cap_from_source[label - 1]
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.cap_from_source.windows(2).all(|w| w[0] <= w[1])
    }

    /// Relabels relays so that `perm[k]` (an old index) becomes relay `k`.
    pub fn permuted(&self, perm: &[usize]) -> Network {
        assert_eq!(perm.len(), self.n());
        let cap_from_source = perm.iter().map(|&p| self.cap_from_source[p]).collect();
        let cap_to_dest = perm.iter().map(|&p| self.cap_to_dest[p]).collect();
        let cap_relay = perm
            .iter()
            .map(|&pi| perm.iter().map(|&pj| self.cap_relay[pi][pj]).collect())
            .collect();
        Network {
            cap_from_source,
            cap_to_dest,
            cap_relay,
            eta: self.eta,
        }
    }

    /// Sorts relays by non-decreasing source capacity. The sort is stable,
    /// so tied relays keep their original relative order. The returned
    /// permutation maps canonical index to original index.
    pub fn canonicalize(&self) -> (Network, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.n()).collect();
        perm.sort_by_key(|&i| self.cap_from_source[i]);
        (self.permuted(&perm), perm)
    }

    /// Swaps the roles of source and destination and reverses every relay
    /// link. A relay receiving in the original network corresponds to one
    /// transmitting in the reversal.
    pub fn reverse(&self) -> Network {
        let n = self.n();
        let cap_relay = (0..n)
            .map(|i| (0..n).map(|j| self.cap_relay[j][i]).collect())
            .collect();
        Network {
            cap_from_source: self.cap_to_dest.clone(),
            cap_to_dest: self.cap_from_source.clone(),
            cap_relay,
            eta: self.eta,
        }
    }

    pub fn parse(text: &[u8]) -> Result<Network> {
        let de = &mut serde_json::Deserializer::from_slice(text);
        let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkDoc::from(self)).expect("network serializes")
    }

    /// Seeded random network with every off-diagonal capacity drawn
    /// uniformly from `0..=max_cap`.
    pub fn random(n: usize, max_cap: u32, seed: u64) -> Result<Network> {
        if n == 0 || n > MAX_RELAYS {
            return Err(Error::InvalidInput(format!(
                "relay count {n} outside 1..={MAX_RELAYS}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || rng.gen_range(0..=max_cap);
        let cap_from_source = (0..n).map(|_| draw()).collect();
        let cap_to_dest = (0..n).map(|_| draw()).collect();
        let cap_relay = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { draw() }).collect())
            .collect();
        Network::new(cap_from_source, cap_to_dest, cap_relay)
    }
}

/// Maps a state mask expressed in canonical labels back to original labels.
pub fn map_set_to_original(set: RelaySet, perm: &[usize]) -> RelaySet {
    let mut out = RelaySet::EMPTY;
    for k in set.iter() {
        out.insert(perm[k]);
    }
    out
}

/// `⌈log2 g⌉⁺` for a squared channel gain `g`.
pub fn capacity_from_gain(gain_squared: f64) -> Result<u32> {
    if !gain_squared.is_finite() || gain_squared < 0.0 {
        return Err(Error::InvalidInput(format!(
            "squared gain must be finite and non-negative, got {gain_squared}"
        )));
    }
    if gain_squared <= 1.0 {
        return Ok(0);
    }
    // frexp-style exact ceiling: g = m * 2^e with m in [0.5, 1)
    let bits = gain_squared.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    let log_floor = exp - 1023;
    let ceil = if mantissa == 0 { log_floor } else { log_floor + 1 };
    Ok(ceil.max(0) as u32)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    n: i64,
    source_to_relay: Vec<i64>,
    relay_to_dest: Vec<i64>,
    relay_to_relay: Vec<Vec<i64>>,
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        let widen = |v: &[u32]| v.iter().map(|&c| c as i64).collect::<Vec<_>>();
        NetworkDoc {
            n: net.n() as i64,
            source_to_relay: widen(&net.cap_from_source),
            relay_to_dest: widen(&net.cap_to_dest),
            relay_to_relay: net.cap_relay.iter().map(|r| widen(r)).collect(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Network> {
        let err = |path: String, message: String| Error::Parse { path, message };
        if doc.n < 1 || doc.n > MAX_RELAYS as i64 {
            return Err(err("n".into(), format!("must be in 1..={MAX_RELAYS}, got {}", doc.n)));
        }
        let n = doc.n as usize;
        let cap = |path: String, v: i64| -> Result<u32> {
            u32::try_from(v).map_err(|_| err(path, format!("capacity must be a non-negative 32-bit integer, got {v}")))
        };
        let vector = |name: &str, v: &[i64]| -> Result<Vec<u32>> {
            if v.len() != n {
                return Err(err(name.into(), format!("expected {n} entries, got {}", v.len())));
            }
            v.iter()
                .enumerate()
                .map(|(i, &c)| cap(format!("{name}[{i}]"), c))
                .collect()
        };
        let cap_from_source = vector("source_to_relay", &doc.source_to_relay)?;
        let cap_to_dest = vector("relay_to_dest", &doc.relay_to_dest)?;
        if doc.relay_to_relay.len() != n {
            return Err(err(
                "relay_to_relay".into(),
                format!("expected {n} rows, got {}", doc.relay_to_relay.len()),
            ));
        }
        let mut cap_relay = Vec::with_capacity(n);
        for (i, row) in doc.relay_to_relay.iter().enumerate() {
            let name = format!("relay_to_relay[{i}]");
            let row = vector(&name, row)?;
            if row[i] != 0 {
                return Err(err(format!("{name}[{i}]"), format!("self-link must be 0, got {}", row[i])));
            }
            cap_relay.push(row);
        }
        Network::new(cap_from_source, cap_to_dest, cap_relay)
    }
}
