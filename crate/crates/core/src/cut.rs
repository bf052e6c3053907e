//! Cut values `f(Ω, S)`: the GF(2) rank of the transfer matrix from the
//! transmitting inputs on the source side of a cut to the receiving outputs
//! on the destination side.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gf2::{shift_block, Gf2Matrix};
use crate::network::{Network, RelaySet};

fn check_sets(net: &Network, omega: RelaySet, state: RelaySet) -> Result<()> {
    let full = RelaySet::full(net.n());
    if !omega.is_subset_of(full) || !state.is_subset_of(full) {
        return Err(Error::InvalidInput(format!(
            "cut {omega} or state {state} outside the {} relays",
            net.n()
        )));
    }
    Ok(())
}

/// Relays feeding the cut (`Ω ∩ S`) and relays listening behind it
/// (`Ω^c ∩ S^c`), ascending.
fn sides(net: &Network, omega: RelaySet, state: RelaySet) -> (RelaySet, RelaySet) {
    let n = net.n();
    let inputs = omega.intersection(state);
    let outputs = omega.complement(n).intersection(state.complement(n));
    (inputs, outputs)
}

/// The transfer matrix as a grid of shift blocks. Row blocks are `d` then
/// the receiving relays behind the cut; column blocks are `s` then the
/// transmitting relays in front of it.
pub fn transfer_blocks(
    net: &Network,
    omega: RelaySet,
    state: RelaySet,
) -> Result<Vec<Vec<Gf2Matrix>>> {
    check_sets(net, omega, state)?;
    let eta = net.eta() as usize;
    let (inputs, outputs) = sides(net, omega, state);
    let block = |m: u32| shift_block(eta, m as usize).expect("capacity bounded by eta");
    let mut grid = Vec::with_capacity(1 + outputs.len());
    let mut dest_row = vec![block(0)];
    dest_row.extend(inputs.iter().map(|j| block(net.to_dest(j))));
    grid.push(dest_row);
    for i in outputs.iter() {
        let mut row = vec![block(net.from_source(i))];
        row.extend(inputs.iter().map(|j| block(net.relay_link(i, j))));
        grid.push(row);
    }
    Ok(grid)
}

/// Builds `F(Ω, S)` directly, without materialising the blocks.
pub fn transfer_matrix(net: &Network, omega: RelaySet, state: RelaySet) -> Result<Gf2Matrix> {
    check_sets(net, omega, state)?;
    let eta = net.eta() as usize;
    let (inputs, outputs) = sides(net, omega, state);
    let mut f = Gf2Matrix::zeros((1 + outputs.len()) * eta, (1 + inputs.len()) * eta);
    let mut put = |row_block: usize, col_block: usize, m: u32| {
        let m = m as usize;
        for k in 0..m {
            f.set(row_block * eta + eta - m + k, col_block * eta + k, true);
        }
    };
    for (cb, j) in inputs.iter().enumerate() {
        put(0, cb + 1, net.to_dest(j));
    }
    for (rb, i) in outputs.iter().enumerate() {
        put(rb + 1, 0, net.from_source(i));
        for (cb, j) in inputs.iter().enumerate() {
            put(rb + 1, cb + 1, net.relay_link(i, j));
        }
    }
    Ok(f)
}

/// `max_{i ∈ Ω^c ∩ S^c} ℓ_is + max_{j ∈ Ω ∩ S} ℓ_dj`, empty maxima being 0.
/// Equals the cut value whenever one of the two sides is empty.
pub fn rank_lower_bound(net: &Network, omega: RelaySet, state: RelaySet) -> u32 {
    let (inputs, outputs) = sides(net, omega, state);
    let listen = outputs.iter().map(|i| net.from_source(i)).max().unwrap_or(0);
    let talk = inputs.iter().map(|j| net.to_dest(j)).max().unwrap_or(0);
    listen + talk
}

/// Memoised cut values for one network instance.
///
/// The cache lives behind a `RefCell`, so a table is confined to the thread
/// that owns it; parallel work builds one table per network.
#[derive(Debug)]
pub struct CutValueTable {
    net: Network,
    cache: RefCell<HashMap<(u32, u32), u32>>,
}

impl CutValueTable {
    pub fn new(net: Network) -> Self {
        CutValueTable {
            net,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn cached_len(&self) -> usize {
        self.cache.borrow().len()
    }

    /// `f(Ω, S)`. Uses the closed form where it is exact and the GF(2)
    /// rank everywhere else.
    pub fn cut_value(&self, omega: RelaySet, state: RelaySet) -> u32 {
        let key = (omega.mask(), state.mask());
        if let Some(&v) = self.cache.borrow().get(&key) {
            return v;
        }
        let v = self.compute(omega, state);
        self.cache.borrow_mut().insert(key, v);
        v
    }

    /// Always builds and ranks the matrix; bypasses the cache.
    pub fn cut_value_by_rank(&self, omega: RelaySet, state: RelaySet) -> u32 {
        transfer_matrix(&self.net, omega, state)
            .expect("sets validated by caller")
            .rank() as u32
    }

    fn compute(&self, omega: RelaySet, state: RelaySet) -> u32 {
        let full = RelaySet::full(self.n());
        assert!(
            omega.is_subset_of(full) && state.is_subset_of(full),
            "cut {omega} / state {state} outside [{}]",
            self.n()
        );
        let (inputs, outputs) = sides(&self.net, omega, state);
        if inputs.is_empty() || outputs.is_empty() {
            rank_lower_bound(&self.net, omega, state)
        } else {
            self.cut_value_by_rank(omega, state)
        }
    }

    /// `f([i:n], S)` for a 1-based `i` in `1..=n+1`; `i = n + 1` is the empty cut.
    pub fn suffix_cut_value(&self, i: usize, state: RelaySet) -> u32 {
        assert!((1..=self.n() + 1).contains(&i));
        self.cut_value(RelaySet::range(i - 1, self.n()), state)
    }

    /// `(f([i:n],{1}), …, f([i:n],{n}), f([i:n],∅))` for 1-based `i`.
    pub fn cut_value_row(&self, i: usize) -> Vec<u32> {
        let n = self.n();
        (0..=n)
            .map(|j| self.suffix_cut_value(i, state_for_column(j, n)))
            .collect()
    }
}

/// State for P-matrix column `j + 1` (0-based `j`): `{j}` for `j < n`, and
/// the empty state for `j = n`.
pub fn state_for_column(j: usize, n: usize) -> RelaySet {
    if j < n {
        RelaySet::singleton(j)
    } else {
        RelaySet::EMPTY
    }
}
