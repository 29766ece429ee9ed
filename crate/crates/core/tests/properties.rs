mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn closure_axioms_and_duality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poset(&mut r, 12);
        let m = order_matrix(&p);
        let a = random_subset(&mut r, &p);
        let b = random_subset(&mut r, &p);
        let cla = p.cl(&a);
        prop_assert_eq!(cla.to_vec(), brute_cl(&m, &a.to_vec()));
        prop_assert_eq!(p.star(&a).to_vec(), brute_opn(&m, &a.to_vec()));
        prop_assert!(p.cl(&p.empty_set()).is_empty());
        prop_assert!(a.is_subset(&cla));
        prop_assert_eq!(p.cl(&cla), cla.clone());
        prop_assert_eq!(p.cl(&a.union(&b)), cla.union(&p.cl(&b)));
        prop_assert_eq!(p.mo(&a), cla.difference(&a));
        for s in 0..p.len() {
            for t in 0..p.len() {
                prop_assert_eq!(p.cl(&p.set([s])).contains(t), p.star(&p.set([t])).contains(s));
            }
        }
    }

    #[test]
    fn local_closedness_matches_convexity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poset(&mut r, 12);
        let m = order_matrix(&p);
        let a = random_subset(&mut r, &p);
        prop_assert_eq!(p.locally_closed(&a), brute_locally_closed(&m, &a.to_vec()));
    }

    #[test]
    fn boundary_of_boundary_vanishes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_simplicial(&mut r, 5, 12);
        prop_assert!(boundary_squares_to_zero(&c));
        prop_assert!(c.validate().is_empty());
    }

    #[test]
    fn betti_matches_bareiss(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_simplicial(&mut r, 6, 30);
        let p = c.poset();
        let all = p.full_set();
        let sub = p.cl(&random_subset(&mut r, p));
        prop_assert_eq!(library_betti(&c, &all, &sub).0, oracle_betti(&c, &all, &sub));
        let s = random_subset(&mut r, p);
        if p.locally_closed(&s) {
            prop_assert_eq!(library_betti(&c, &p.cl(&s), &p.mo(&s)).0, oracle_betti(&c, &p.cl(&s), &p.mo(&s)));
        }
    }

    #[test]
    fn sections_on_random_fields(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (c, v) = if seed % 2 == 0 {
            random_cycle_field(&mut r)
        } else {
            let c = random_simplicial(&mut r, 5, 12);
            let v = random_mvf(&mut r, &c);
            (c, v)
        };
        let mut tally = SectionTally::default();
        section_suite(&c, &v, &mut tally);
        prop_assert!(tally.failures.is_empty(), "{:?}", tally.failures);
    }
}
