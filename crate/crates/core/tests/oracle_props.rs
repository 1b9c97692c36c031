use num_bigint::BigInt;
use proptest::prelude::*;
use rcm_core::combin::binomial;
use rcm_core::oracle::{
    bareiss_determinant, enumerate_matrices, exact_event_probabilities, exact_expansion_distribution,
    exact_zero_column_moments, EnumerationBudget,
};

fn small() -> Vec<(usize, usize)> {
    (1..=5).flat_map(|n| (1..=n).map(move |d| (n, d))).filter(|&(n, d)| EnumerationBudget { max_states: 200_000 }.check(n, d).is_ok()).collect()
}

#[test]
fn enumeration_count_and_order() {
    for (n, d) in small() {
        let all: Vec<Vec<Vec<usize>>> = enumerate_matrices(n, d, EnumerationBudget::default()).unwrap().collect();
        assert_eq!(all.len() as u128, binomial(n as u64, d as u64).pow(n as u32));
        assert!(all.windows(2).all(|w| w[0] < w[1]), "not strictly lexicographic at ({n},{d})");
    }
}

#[test]
fn moments_events_and_expansion_agree_with_closed_forms() {
    let b = EnumerationBudget::default();
    for (n, d) in small() {
        let z = exact_zero_column_moments(n, d, b).unwrap();
        assert!(z.ex_matches_formula && z.ex2_within_bound, "({n},{d})");
        if let (Some(a), Some(f)) = (&z.pair_zero, &z.pair_formula) {
            assert_eq!(a, f);
        }
        assert_eq!(exact_event_probabilities(n, d, b).unwrap().containment_violations, 0);
        for k in 0..=n {
            let j: Vec<usize> = (0..k).collect();
            assert_eq!(exact_expansion_distribution(n, d, &j, b).unwrap().agrees, Some(true));
        }
    }
}

fn naive_det(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = a[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &v)| v).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            BigInt::from(s * a[0][j]) * naive_det(&minor)
        })
        .sum()
}

proptest! {
    #[test]
    fn bareiss_matches_cofactor_expansion(n in 1usize..6, vals in prop::collection::vec(-1000i64..1000, 36)) {
        let a: Vec<Vec<i64>> = (0..n).map(|i| vals[i * 6..i * 6 + n].to_vec()).collect();
        prop_assert_eq!(bareiss_determinant(&a), naive_det(&a));
    }
}
