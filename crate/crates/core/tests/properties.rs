use proptest::prelude::*;

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::operand::{CMatrix, TensorOperand};
use traffic_tensors::partition::{mobius, mobius_from_discrete, SetPartition};
use traffic_tensors::perm::{compose, cycle_count, inverse};
use traffic_tensors::trace::{graph_trace, injective_from_plain, plain_from_injective};
use traffic_tensors::word::StarWord;

use num_complex::Complex64;

fn rgs(max_len: usize) -> impl Strategy<Value = SetPartition> {
    prop::collection::vec(0usize..max_len, 1..=max_len).prop_map(|labels| SetPartition::from_labels(&labels).unwrap())
}

fn pair(max_len: usize) -> impl Strategy<Value = (SetPartition, SetPartition)> {
    (1..=max_len).prop_flat_map(|n| {
        let one = prop::collection::vec(0..n, n).prop_map(|l| SetPartition::from_labels(&l).unwrap());
        (one.clone(), one)
    })
}

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn meet_and_join_bound_both((p, q) in pair(7)) {
        let m = p.meet(&q).unwrap();
        let j = p.join(&q).unwrap();
        prop_assert!(m.leq(&p).unwrap() && m.leq(&q).unwrap());
        prop_assert!(p.leq(&j).unwrap() && q.leq(&j).unwrap());
        prop_assert!(m.leq(&j).unwrap());
    }

    #[test]
    fn mobius_from_bottom_matches(p in rgs(7)) {
        let bottom = SetPartition::discrete(p.ground_size());
        prop_assert_eq!(mobius(&bottom, &p).unwrap(), mobius_from_discrete(&p));
    }

    #[test]
    fn mobius_rejects_incomparable_pairs((p, q) in pair(6)) {
        prop_assert_eq!(mobius(&p, &q).is_ok(), p.leq(&q).unwrap());
    }

    #[test]
    fn block_string_roundtrip(p in rgs(8)) {
        let blocks: Vec<Vec<usize>> = p.blocks();
        prop_assert_eq!(SetPartition::from_blocks(p.ground_size(), &blocks).unwrap(), p);
    }

    #[test]
    fn mobius_inversion_roundtrip(table in prop::collection::vec(-10_000i64..10_000, 15)) {
        let inj = injective_from_plain(4, &table).unwrap();
        prop_assert_eq!(plain_from_injective(4, &inj).unwrap(), table);
    }

    #[test]
    fn permutation_group_laws((p, q) in (2usize..7).prop_flat_map(|n| (perm(n), perm(n)))) {
        let id: Vec<usize> = (0..p.len()).collect();
        prop_assert_eq!(compose(&p, &inverse(&p)), id.clone());
        prop_assert_eq!(inverse(&compose(&p, &q)), compose(&inverse(&q), &inverse(&p)));
        // cycle type is a class function
        prop_assert_eq!(cycle_count(&compose(&compose(&q, &p), &inverse(&q))), cycle_count(&p));
    }

    #[test]
    fn free_reduction_is_idempotent(letters in prop::collection::vec((0usize..3, any::<bool>()), 0..8)) {
        let text: Vec<String> = letters.iter().map(|(i, s)| format!("{}{}", i + 1, if *s { "*" } else { "" })).collect();
        let w: StarWord = if text.is_empty() { StarWord::empty() } else { text.join(",").parse().unwrap() };
        let r = w.free_reduce();
        prop_assert_eq!(r.free_reduce(), r.clone());
        prop_assert!(w.concat(&w.inverse()).is_trivial());
    }

    #[test]
    fn quotient_traces_are_multilinear(entries in prop::collection::vec(-2.0f64..2.0, 8), scale in -3.0f64..3.0, p in rgs(4)) {
        prop_assume!(p.ground_size() == 4);
        let g = LinearGraph::minimal(2).unwrap().quotient(&p).unwrap();
        let a = CMatrix::from_fn(2, 2, |i, j| Complex64::new(entries[2 * i + j], entries[4 + 2 * i + j]));
        let b = CMatrix::from_fn(2, 2, |i, j| Complex64::new(entries[4 + 2 * j + i], -entries[2 * j + i]));
        let base = graph_trace(&g, &TensorOperand::Factored(vec![a.clone(), b.clone()])).unwrap();
        let scaled = graph_trace(&g, &TensorOperand::Factored(vec![a * Complex64::new(scale, 0.0), b])).unwrap();
        prop_assert!((scaled - base * scale).norm() <= 1e-9 * (1.0 + base.norm()));
    }
}
