//! Property tests for the structural invariants of each module.

use proptest::prelude::*;

use softsheaf::compord::{closed_commute, hofmann_mislove_check, interpolating_check, CompOrdSpace, FinTopSpace};
use softsheaf::corpus::{self, canonical_form};
use softsheaf::finalg::{
    algebra_to_text, commute, compose_relations, congruence_generated, congruence_join, congruence_lattice,
    kernel_congruence, parse_algebra, quotient, FinAlgebra, Signature,
};
use softsheaf::gelfand::{
    ideal_lattice, is_gelfand, o_of_ideal, pierce_decomposition, ring_from_spec, ring_to_text, parse_ring,
    FinCommRing,
};
use softsheaf::order::{
    down_set_lattice, lawson_dual, parse_poset, to_text, FinLattice, FinPoset, Preserve, WayBelow,
};
use softsheaf::sheafrep::{all_rep_maps, axiom_report, gamma_star, rep_condition};

fn poset() -> impl Strategy<Value = FinPoset> {
    (1usize..=6).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), proptest::collection::vec(any::<bool>(), pairs), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
    .prop_map(|(n, bits, perm)| {
        let mut rel = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits[k] {
                    rel.push((perm[i], perm[j]));
                }
                k += 1;
            }
        }
        FinPoset::from_relation(n, &rel).expect("acyclic relation")
    })
}

fn lattice() -> impl Strategy<Value = FinLattice> {
    let all = corpus::lattice_corpus(6);
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn magma() -> impl Strategy<Value = FinAlgebra> {
    (1usize..=4).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(0..n, n * n), proptest::collection::vec(0..n, n))
    })
    .prop_map(|(n, bin, un)| {
        let sig = Signature::new(&[("op", 2), ("f", 1)]).expect("signature");
        FinAlgebra::new(sig, n, vec![bin, un]).expect("tables in range")
    })
}

fn relabelling(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_operations_are_bounds(l in lattice()) {
        let n = l.n();
        for x in 0..n {
            for y in 0..n {
                let m = l.meet(x, y);
                let j = l.join(x, y);
                prop_assert!(l.leq(m, x) && l.leq(m, y) && l.leq(x, j) && l.leq(y, j));
                prop_assert_eq!(l.meet(x, j), x);
                prop_assert_eq!(l.join(x, m), x);
                for z in 0..n {
                    if l.leq(z, x) && l.leq(z, y) {
                        prop_assert!(l.leq(z, m));
                    }
                }
            }
        }
    }

    #[test]
    fn finite_lattices_collapse(l in lattice()) {
        prop_assert!(WayBelow::certify(&l).is_ok());
        let dual = lawson_dual(&l).unwrap();
        prop_assert_eq!(dual.filters.len(), l.n());
        for x in 0..l.n() {
            prop_assert_eq!(dual.to_op[dual.of_element[x]], x);
        }
    }

    #[test]
    fn down_sets_form_a_distributive_lattice(p in poset()) {
        let (l, sets) = down_set_lattice(&p);
        prop_assert!(l.is_distributive());
        prop_assert!(sets.iter().all(|&s| p.is_down_set(s)));
        for i in 0..l.n() {
            for j in 0..l.n() {
                prop_assert_eq!(sets[l.meet(i, j)], sets[i] & sets[j]);
                prop_assert_eq!(sets[l.join(i, j)], sets[i] | sets[j]);
            }
        }
    }

    #[test]
    fn canonical_form_ignores_labels((p, perm) in poset().prop_flat_map(|p| { let n = p.n(); (Just(p), relabelling(n)) })) {
        prop_assert_eq!(canonical_form(&p), canonical_form(&p.relabel(&perm)));
    }

    #[test]
    fn poset_text_round_trips(p in poset()) {
        let back = parse_poset(&to_text(&p)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn algebra_text_round_trips(a in magma()) {
        prop_assert_eq!(parse_algebra(&algebra_to_text(&a)).unwrap(), a);
    }

    #[test]
    fn generated_congruence_is_least(a in magma(), x in 0usize..4, y in 0usize..4) {
        let (x, y) = (x % a.n(), y % a.n());
        let theta = congruence_generated(&a, &[(x, y)]);
        prop_assert!(theta.related(x, y));
        prop_assert!(theta.compatible_with(&a).is_ok());
        let con = congruence_lattice(&a).unwrap();
        for c in &con.congruences {
            if c.related(x, y) {
                prop_assert!(theta.le(c));
            }
        }
    }

    #[test]
    fn quotient_kernel_and_joins(a in magma()) {
        let con = congruence_lattice(&a).unwrap();
        for t1 in &con.congruences {
            let (_, q) = quotient(&a, t1);
            prop_assert_eq!(&kernel_congruence(&q), t1);
            for t2 in &con.congruences {
                let m = t1.meet(t2);
                for u in 0..a.n() {
                    for v in 0..a.n() {
                        prop_assert_eq!(m.related(u, v), t1.related(u, v) && t2.related(u, v));
                    }
                }
                if commute(t1, t2).unwrap() {
                    prop_assert_eq!(congruence_join(&a, t1, t2).to_relation(), compose_relations(t1, t2).unwrap());
                }
            }
        }
    }

    #[test]
    fn closed_commute_criterion_matches_pushout(p in poset(), c1 in any::<u64>(), c2 in any::<u64>()) {
        let x = CompOrdSpace::new(p.clone());
        let r = closed_commute(&x, c1 & p.full(), c2 & p.full());
        prop_assert!(r.agree());
        prop_assert_eq!(r.criterion, r.witness.is_none());
    }

    #[test]
    fn hofmann_mislove_on_alexandrov_spaces(p in poset()) {
        let h = hofmann_mislove_check(&FinTopSpace::alexandrov(&p)).unwrap();
        prop_assert!(h.holds, "{:?}", h.failure);
        prop_assert_eq!(h.compact_saturated, h.scott_open_filters);
    }

    #[test]
    fn maps_into_chains_interpolate(p in poset(), k in 1usize..4, seed in proptest::collection::vec(0usize..4, 6)) {
        let x = CompOrdSpace::new(p.clone());
        let y = CompOrdSpace::new(FinPoset::chain(k));
        let q: Vec<usize> = (0..p.n()).map(|i| seed[i] % k).collect();
        prop_assert!(interpolating_check(&q, &x, &y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_star_matches_rep_condition(
        ai in 0usize..4,
        li in 0usize..8,
        pick in any::<prop::sample::Index>(),
    ) {
        let (_, a) = &corpus::catalog_algebras()[ai];
        let (_, l) = &corpus::catalog_lattices()[li];
        let con = congruence_lattice(a).unwrap();
        let maps = all_rep_maps(a, l, &con, Preserve::NONE);
        let h = pick.get(&maps);
        let rc = rep_condition(h);
        prop_assert!(rc.consistent(), "{:?}", rc.inconsistencies);
        prop_assert_eq!(rc.presheaf.is_k_sheaf(), rc.sheaf_condition);
        let report = axiom_report(&gamma_star(h));
        prop_assert_eq!(report.is_k_sheaf(), rc.sheaf_condition);
        prop_assert!(report.consistency_failures().is_empty());
    }

    #[test]
    fn ring_products_behave(a in 1usize..8, b in 1usize..8) {
        let r = ring_from_spec(&format!("product:zn:{a},zn:{b}")).unwrap();
        prop_assert_eq!(r.n(), a * b);
        prop_assert_eq!(parse_ring(&ring_to_text(&r)).unwrap(), r.clone());
        let g = is_gelfand(&r).unwrap();
        prop_assert!(g.agree() && g.syntactic);
        let il = ideal_lattice(&r).unwrap();
        for &j in &il.ideals {
            prop_assert!(r.is_ideal(o_of_ideal(&r, j)));
        }
        let p = pierce_decomposition(&r).unwrap();
        prop_assert!(p.product_iso);
        prop_assert_eq!(p.factors.iter().map(FinCommRing::n).product::<usize>(), a * b);
        prop_assert!(p.factors.iter().all(|f| f.idempotents().len() == 2 || f.n() == 1));
    }
}
