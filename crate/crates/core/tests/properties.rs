use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use relay_sched::cut::{rank_lower_bound, CutValueTable};
use relay_sched::dual::dual_certificate_with;
use relay_sched::gf2::Gf2Matrix;
use relay_sched::lp::{solve_full_lp, solve_relaxed_lp, verify_schedule_feasible};
use relay_sched::pmatrix::{bareiss_det, build_p_matrix};
use relay_sched::rational::{from_int, one};
use relay_sched::schedule::{closed_form_schedule, linear_system_schedule, schedule_via_recursion};
use relay_sched::theorem::{check_receive_mode_dual, verdict_for, OracleStatus};
use relay_sched::verify::{check_submodular_in_cut, check_submodular_in_state, check_suffix_gain, Outcome};
use relay_sched::{check_theorem1, Error, Network, Rational, RelaySet, Verdict};

fn arb_network(max_n: usize) -> impl Strategy<Value = Network> {
    (1..=max_n, 0u32..=8, any::<u64>()).prop_map(|(n, m, seed)| Network::random(n, m, seed).unwrap())
}

fn arb_canonical(max_n: usize) -> impl Strategy<Value = Network> {
    arb_network(max_n).prop_map(|net| net.canonicalize().0)
}

fn arb_gf2() -> impl Strategy<Value = Gf2Matrix> {
    (1usize..40, 1usize..90).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), c), r)
            .prop_map(|rows| Gf2Matrix::from_rows(&rows))
    })
}

/// Two matrices with the same number of rows.
fn arb_gf2_pair() -> impl Strategy<Value = (Gf2Matrix, Gf2Matrix)> {
    (1usize..30, 1usize..70, 1usize..70).prop_flat_map(|(r, c1, c2)| {
        let m = |c| {
            prop::collection::vec(prop::collection::vec(any::<bool>(), c), r)
                .prop_map(|rows| Gf2Matrix::from_rows(&rows))
        };
        (m(c1), m(c2))
    })
}

/// Cofactor expansion along the first row; the independent determinant.
fn laplace(m: &[Vec<BigInt>]) -> BigInt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for (c, a) in m[0].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let sub: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = a * laplace(&sub);
        if c % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_bounded_and_transpose_invariant(m in arb_gf2()) {
        let r = m.rank();
        prop_assert!(r <= m.rows().min(m.cols()));
        prop_assert_eq!(r, m.transpose().rank());
    }

    #[test]
    fn rank_subadditive_under_hstack((a, b) in arb_gf2_pair()) {
        let joined = a.hstack(&b).unwrap();
        prop_assert!(joined.rank() >= a.rank().max(b.rank()));
        prop_assert!(joined.rank() <= a.rank() + b.rank());
    }

    #[test]
    fn cut_value_bound_and_one_sided_equality(net in arb_network(5), o in any::<u32>(), s in any::<u32>()) {
        let n = net.n();
        let full = RelaySet::full(n).mask();
        let (o, s) = (RelaySet::from_mask(o & full), RelaySet::from_mask(s & full));
        let table = CutValueTable::new(net.clone());
        let f = table.cut_value_by_rank(o, s);
        let bound = rank_lower_bound(&net, o, s);
        prop_assert!(f >= bound);
        if o.intersection(s).is_empty() || o.complement(n).intersection(s.complement(n)).is_empty() {
            prop_assert_eq!(f, bound);
        }
        prop_assert_eq!(table.cut_value(o, s), f);
    }

    #[test]
    fn reversal_swaps_cut_and_state(net in arb_network(4), o in any::<u32>(), s in any::<u32>()) {
        let n = net.n();
        let full = RelaySet::full(n).mask();
        let (o, s) = (RelaySet::from_mask(o & full), RelaySet::from_mask(s & full));
        let fwd = CutValueTable::new(net.clone());
        let rev = CutValueTable::new(net.reverse());
        prop_assert_eq!(rev.cut_value(o.complement(n), s.complement(n)), fwd.cut_value(o, s));
    }

    #[test]
    fn cut_values_submodular(net in arb_network(4)) {
        let table = CutValueTable::new(net);
        prop_assert_eq!(check_submodular_in_cut(&table), Outcome::Pass);
        prop_assert_eq!(check_submodular_in_state(&table), Outcome::Pass);
    }

    #[test]
    fn suffix_gain_on_sorted_relays(net in arb_canonical(5)) {
        prop_assert_eq!(check_suffix_gain(&CutValueTable::new(net)), Outcome::Pass);
    }

    #[test]
    fn bareiss_matches_cofactor_expansion(
        rows in (1usize..=6).prop_flat_map(|k| prop::collection::vec(prop::collection::vec(-9i64..=9, k), k))
    ) {
        let m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        prop_assert_eq!(bareiss_det(&m), laplace(&m));
    }

    #[test]
    fn p_matrix_expansion_identity(net in arb_canonical(6)) {
        let pm = build_p_matrix(&CutValueTable::new(net));
        prop_assert!(pm.laplace_holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn closed_form_invariants_when_conditions_hold(net in arb_canonical(5)) {
        let table = CutValueTable::new(net);
        let pm = build_p_matrix(&table);
        prop_assume!(verdict_for(&pm) == Verdict::ConditionsHold);
        let n = table.n();
        let cf = closed_form_schedule(&pm).unwrap();
        prop_assert!(cf.lambdas.values().all(|v| !v.is_negative()));
        prop_assert_eq!(cf.total(), one());
        prop_assert!(cf.supported_on_single_transmitter());
        for i in 0..=n {
            prop_assert_eq!(cf.cut_rate(&table, RelaySet::range(i, n)), cf.t.clone());
        }
        prop_assert_eq!(linear_system_schedule(&pm).unwrap(), cf.clone());
        match schedule_via_recursion(&table, &cf.t, &cf) {
            Ok(s) => prop_assert_eq!(s, cf.clone()),
            Err(Error::RecursionInapplicable { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
        let cert = dual_certificate_with(&table, &pm).unwrap();
        prop_assert!(cert.is_nonnegative());
        prop_assert_eq!(cert.mu.iter().sum::<Rational>(), one());
        prop_assert_eq!(&cert.mu_p, &cf.t);
        for state in RelaySet::all_subsets(n) {
            let weighted: Rational = cert.mu.iter().enumerate()
                .map(|(i, m)| m * from_int(table.suffix_cut_value(i + 1, state) as i64))
                .sum();
            prop_assert!((&cert.mu_p - weighted - cert.sigma(state)).is_zero());
        }
        prop_assert!(verify_schedule_feasible(&table, &cf).feasible);
        prop_assert_eq!(solve_full_lp(&table).unwrap().value, cf.t.clone());
    }

    #[test]
    fn lp_solution_is_feasible_and_bounded_by_relaxation(net in arb_network(4)) {
        let table = CutValueTable::new(net.canonicalize().0);
        let full = solve_full_lp(&table).unwrap();
        let relaxed = solve_relaxed_lp(&table).unwrap();
        let sched = full.as_schedule();
        prop_assert!(sched.is_valid());
        prop_assert!(verify_schedule_feasible(&table, &sched).feasible);
        prop_assert!(relaxed.value >= full.value);
        prop_assert!(!full.value.is_negative());
        prop_assert!(!full.tight_cuts.is_empty());
    }

    #[test]
    fn reordering_keeps_capacity_and_untied_verdicts(net in arb_network(4), pick in any::<usize>()) {
        let perms = permutations(net.n());
        let perm = &perms[pick % perms.len()];
        let shuffled = net.permuted(perm);
        let a = check_theorem1(&net).unwrap();
        let b = check_theorem1(&shuffled).unwrap();
        let mut sources = net.cap_from_source().to_vec();
        sources.sort_unstable();
        sources.dedup();
        // tied source capacities leave the sorted order ambiguous, and the
        // verdict can depend on how the tie is broken
        if sources.len() == net.n() {
            prop_assert_eq!(a.verdict, b.verdict);
        }
        if a.holds() && b.holds() {
            prop_assert_eq!(a.t_star(), b.t_star());
        }
        let va = solve_full_lp(&CutValueTable::new(net)).unwrap().value;
        let vb = solve_full_lp(&CutValueTable::new(shuffled)).unwrap().value;
        prop_assert_eq!(va, vb);
    }

    #[test]
    fn receive_mode_is_verified_or_flagged(net in arb_network(4)) {
        let rep = check_receive_mode_dual(&net).unwrap();
        match (&rep.schedule, &rep.oracle_check) {
            (None, None) => prop_assert!(!rep.holds()),
            (Some(s), Some(check)) => {
                let n = net.n();
                prop_assert!(s.lambdas.keys().all(|&m| RelaySet::from_mask(m).complement(n).len() <= 1));
                let oracle = check.oracle_value.clone().unwrap();
                let rate = check.schedule_rate.clone().unwrap();
                prop_assert!(rate <= oracle);
                prop_assert_eq!(check.status == OracleStatus::Verified, rate == oracle);
            }
            _ => prop_assert!(false, "schedule and oracle check must come together"),
        }
    }
}

#[test]
fn capacity_invariant_under_every_relabeling_small_n() {
    for n in 1..=3 {
        for seed in 0..25 {
            let net = Network::random(n, 6, seed).unwrap();
            let base = solve_full_lp(&CutValueTable::new(net.clone())).unwrap().value;
            for perm in permutations(n) {
                let v = solve_full_lp(&CutValueTable::new(net.permuted(&perm))).unwrap().value;
                assert_eq!(v, base, "n = {n}, seed = {seed}, perm = {perm:?}");
            }
        }
    }
}
