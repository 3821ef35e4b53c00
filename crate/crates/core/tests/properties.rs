use proptest::prelude::*;

use trigme::concurrence::{concurrence_pure, full_cut_table, max_concurrence};
use trigme::cut::{Cut, PartySet};
use trigme::document::{parse_state, StateDocument};
use trigme::linalg::max_abs;
use trigme::mixed::{minimal_purification, DEFAULT_RANK_TOL};
use trigme::random::{haar_random_pure, haar_unitary, seeded_rng};
use trigme::report::{analyze, canonical_json};
use trigme::state::{tensor_product, AnyState, PartialTrace};
use trigme::structure::finest_factorization;
use trigme::triangle::{f_total, heron_area_normalized, EdgeConvention, GmeOptions};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 3..=5).prop_filter("small total dimension", |d| d.iter().product::<usize>() <= 96)
}

fn convention() -> impl Strategy<Value = EdgeConvention> {
    prop_oneof![Just(EdgeConvention::Concurrence), Just(EdgeConvention::Squared)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heron_is_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0, t in 0.0f64..1.0, conv in convention()) {
        // c between |a-b| and a+b keeps the edges a valid triangle
        let lo = (a - b).abs();
        let c = lo + t * (a + b - lo);
        let edges = [a, b, c];
        let base = heron_area_normalized(edges, conv).unwrap();
        for p in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
            let v = heron_area_normalized([edges[p[0]], edges[p[1]], edges[p[2]]], conv).unwrap();
            prop_assert!((v - base).abs() <= 1e-12);
        }
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn equilateral_area(s in 0.0f64..1.5) {
        let a = heron_area_normalized([s, s, s], EdgeConvention::Concurrence).unwrap();
        prop_assert!((a - s * s).abs() <= 1e-12);
    }

    #[test]
    fn cut_canonicalization(n in 2usize..8, mask in 1u32..127) {
        let full = (1u32 << n) - 1;
        let m = mask & full;
        prop_assume!(m != 0 && m != full);
        let s = PartySet::from_mask(n, m);
        prop_assert_eq!(Cut::new(s).unwrap(), Cut::new(s.complement()).unwrap());
        prop_assert!(Cut::new(s).unwrap().side().contains(0));
    }

    #[test]
    fn concurrence_symmetric_and_bounded(dims in dims_strategy(), seed in any::<u64>()) {
        let psi = haar_random_pure(&dims, seed).unwrap();
        let n = dims.len();
        for mask in 1u32..(1 << n) - 1 {
            let s = PartySet::from_mask(n, mask);
            let c = concurrence_pure(&psi, &s).unwrap();
            let cc = concurrence_pure(&psi, &s.complement()).unwrap();
            prop_assert!((c - cc).abs() <= 1e-12);
            let ds: usize = s.parties().iter().map(|&p| dims[p]).product();
            let dc: usize = s.complement().parties().iter().map(|&p| dims[p]).product();
            prop_assert!(c >= 0.0 && c <= max_concurrence(ds.min(dc)) + 1e-12);
        }
    }

    #[test]
    fn local_unitaries_leave_measure_unchanged(dims in dims_strategy(), seed in any::<u64>(), conv in convention()) {
        let psi = haar_random_pure(&dims, seed).unwrap();
        let mut rng = seeded_rng(seed ^ 0x5a5a);
        let mut phi = psi.clone();
        for (p, &d) in dims.iter().enumerate() {
            phi = phi.apply_local_unitary(p, &haar_unitary(d, &mut rng)).unwrap();
        }
        let a = f_total(&psi, &GmeOptions::with_convention(conv)).unwrap().f_total;
        let b = f_total(&phi, &GmeOptions::with_convention(conv)).unwrap().f_total;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn partial_trace_composes(seed in any::<u64>()) {
        let dims = [2, 3, 2, 2];
        let psi = haar_random_pure(&dims, seed).unwrap();
        let rho = psi.to_density();
        let keep_three = PartySet::new(4, &[0, 1, 3]).unwrap();
        let step = rho.partial_trace(&keep_three).unwrap();
        // parties 0 and 3 of the original sit at positions 0 and 2 after the first trace
        let two_step = step.partial_trace(&PartySet::new(3, &[0, 2]).unwrap()).unwrap();
        let direct = psi.partial_trace(&PartySet::new(4, &[0, 3]).unwrap()).unwrap();
        prop_assert!(max_abs(&(two_step.matrix() - direct.matrix())) <= 1e-12);
    }

    #[test]
    fn document_round_trip(dims in dims_strategy(), seed in any::<u64>()) {
        let psi = haar_random_pure(&dims, seed).unwrap();
        let text = StateDocument::from_pure(&psi, None).to_json();
        let back = match parse_state(&text, 1e-9).unwrap() {
            AnyState::Pure(p) => p,
            AnyState::Mixed(_) => unreachable!(),
        };
        prop_assert_eq!(back.dims(), psi.dims());
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn purification_reproduces_state(seed in any::<u64>(), env in 2usize..5) {
        let psi = haar_random_pure(&[2, 2, 2, env], seed).unwrap();
        let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        let p = minimal_purification(&rho, DEFAULT_RANK_TOL).unwrap();
        prop_assert!(p.rank <= env);
        let back = p.state.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.matrix() - rho.matrix())) <= 1e-8);
    }

    #[test]
    fn products_are_detected(seed in any::<u64>(), split in 1usize..4) {
        let a = haar_random_pure(&vec![2; split], seed).unwrap();
        let b = haar_random_pure(&vec![2; 4 - split], seed.wrapping_add(1)).unwrap();
        let psi = tensor_product(&[a, b]).unwrap();
        prop_assert!(f_total(&psi, &GmeOptions::default()).unwrap().f_total == 0.0);
        let f = finest_factorization(&psi, 1e-6).unwrap();
        prop_assert!(!f.is_gme);
        prop_assert!(f.reconstruction_deviation <= 1e-6);
        let cut = Cut::from_parties(4, &(0..split).collect::<Vec<_>>()).unwrap();
        prop_assert!(full_cut_table(&psi).get(&cut.side()).unwrap() <= 1e-6);
    }

    #[test]
    fn report_emission_is_deterministic(seed in any::<u64>(), conv in convention()) {
        let psi = haar_random_pure(&[2, 2, 2, 2], seed).unwrap();
        let a = analyze(&psi, conv, 1e-6, "d".into(), Some(seed), vec![]).unwrap();
        let b = analyze(&psi, conv, 1e-6, "d".into(), Some(seed), vec![]).unwrap();
        prop_assert_eq!(canonical_json(&a), canonical_json(&b));
    }
}
