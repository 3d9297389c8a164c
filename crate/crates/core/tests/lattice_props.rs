use kh_riesz::lattice::{
    fremlin_combine, fremlin_lhs, standard_probes, IndexMap, Regulator, RieszValue,
};
use proptest::prelude::*;

const SLACK: f64 = 1e-12;

/// Multiples of 1/1024, so sums and differences stay exact.
fn dyadic() -> impl Strategy<Value = f64> {
    (-65536i32..=65536).prop_map(|k| k as f64 / 1024.0)
}

/// Three values from the same space.
fn triple() -> impl Strategy<Value = (RieszValue, RieszValue, RieszValue)> {
    let scalar = (dyadic(), dyadic(), dyadic()).prop_map(|(a, b, c)| {
        (
            RieszValue::scalar(a),
            RieszValue::scalar(b),
            RieszValue::scalar(c),
        )
    });
    let vector = prop::collection::vec(dyadic(), 9).prop_map(|v| {
        (
            RieszValue::vector(&v[0..3]),
            RieszValue::vector(&v[3..6]),
            RieszValue::vector(&v[6..9]),
        )
    });
    let seq = || prop::collection::vec((1u64..10, dyadic()), 0..5).prop_map(RieszValue::sparse);
    let sparse = (seq(), seq(), seq());
    prop_oneof![scalar, vector, sparse]
}

fn same(a: &RieszValue, b: &RieszValue) -> bool {
    a.distance(b).unwrap() == 0.0
}

fn geometric() -> impl Strategy<Value = Regulator> {
    (0u32..=64, 1u32..=8, 1u32..=7).prop_map(|(b, r, c)| {
        Regulator::geometric(
            RieszValue::scalar(b as f64 / 8.0),
            r as f64 / 8.0,
            c as f64 / 8.0,
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn join_and_meet_bound_their_arguments((a, b, _) in triple()) {
        let (j, m) = (a.join(&b).unwrap(), a.meet(&b).unwrap());
        prop_assert!(a.leq(&j).unwrap() && b.leq(&j).unwrap());
        prop_assert!(m.leq(&a).unwrap() && m.leq(&b).unwrap());
    }

    #[test]
    fn join_plus_meet_is_sum((a, b, _) in triple()) {
        let lhs = a.join(&b).unwrap().add(&a.meet(&b).unwrap()).unwrap();
        prop_assert!(same(&lhs, &a.add(&b).unwrap()));
    }

    #[test]
    fn abs_is_multiplicative_for_scalars((a, _, _) in triple(), s in dyadic()) {
        let s = RieszValue::scalar(s);
        let lhs = a.mul(&s).unwrap().abs();
        let rhs = a.abs().mul(&s.abs()).unwrap();
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn join_meet_laws((a, b, c) in triple()) {
        prop_assert!(same(&a.join(&b).unwrap(), &b.join(&a).unwrap()));
        prop_assert!(same(&a.meet(&b).unwrap(), &b.meet(&a).unwrap()));
        prop_assert!(same(
            &a.join(&b).unwrap().join(&c).unwrap(),
            &a.join(&b.join(&c).unwrap()).unwrap()
        ));
        prop_assert!(same(&a.join(&a.meet(&b).unwrap()).unwrap(), &a));
        prop_assert!(same(&a.abs(), &a.join(&a.neg()).unwrap()));
    }

    #[test]
    fn regulators_are_antitone_in_j(reg in geometric(), i in 1u64..30, j in 1u64..40) {
        let (now, next) = (reg.entry(i, j).unwrap(), reg.entry(i, j + 1).unwrap());
        prop_assert!(next.leq_within(&now, SLACK).unwrap());
    }

    #[test]
    fn envelopes_are_antitone_in_the_probe(reg in geometric(), c in 1u64..40) {
        let env = |phi: IndexMap| reg.envelope(&phi).unwrap();
        let (small, large) = (env(IndexMap::Constant(c)), env(IndexMap::Constant(c + 1)));
        prop_assert!(large.leq_within(&small, SLACK).unwrap());
        prop_assert!(env(IndexMap::Exponential).leq_within(&env(IndexMap::Identity), SLACK).unwrap());
        let doubled = env(IndexMap::affine(2, 0).unwrap());
        prop_assert!(doubled.leq_within(&env(IndexMap::Identity), SLACK).unwrap());
    }

    #[test]
    fn constant_probe_envelopes_vanish(b in 0u32..=64, c_num in 1u32..=7, c in 1u64..40) {
        let (base, col) = (b as f64 / 8.0, c_num as f64 / 8.0);
        let reg = Regulator::geometric(RieszValue::scalar(base), 1.0, col).unwrap();
        let env = reg.envelope(&IndexMap::Constant(c)).unwrap();
        prop_assert!(env.leq_within(&RieszValue::scalar(col.powi(c as i32) * base), SLACK).unwrap());
    }

    #[test]
    fn fremlin_combination_dominates(
        family in prop::collection::vec(geometric(), 1..=5),
        u in 0u32..=64,
        s in 1usize..=50,
    ) {
        let u = RieszValue::scalar(u as f64 / 8.0);
        let combined = fremlin_combine(&family, &u).unwrap();
        for phi in standard_probes() {
            let lhs = fremlin_lhs(&family, &u, &phi, s).unwrap();
            prop_assert!(lhs.leq_within(&combined.envelope(&phi).unwrap(), SLACK).unwrap());
        }
    }
}
