use ghost_core::catalog::{self, cantor, salem, stern, zaremba};
use ghost_core::linrep::digits_of;
use ghost_core::matrix::IntMatrix;
use ghost_core::LinearRep;
use num_bigint::BigUint;
use proptest::prelude::*;

/// Random valid representation with `k ∈ [2, 4]`, `d ∈ [1, 3]`, entries in `[0, 3]`.
fn rep_strategy() -> impl Strategy<Value = LinearRep> {
    (2u64..=4, 1usize..=3).prop_flat_map(|(k, d)| {
        (
            proptest::collection::vec(0u64..=3, d),
            proptest::collection::vec(proptest::collection::vec(0u64..=3, d * d), k as usize),
        )
            .prop_filter_map("valid representation", move |(w, digits)| {
                let mats = digits
                    .into_iter()
                    .map(|e| {
                        IntMatrix::from_rows(&e.chunks(d).map(<[u64]>::to_vec).collect::<Vec<_>>())
                            .ok()
                    })
                    .collect::<Option<Vec<_>>>()?;
                LinearRep::new(k, w, mats).ok()
            })
    })
}

/// Kernel vectors for `m < limit` from `f(0) = w` and `f(km + a) = f(m) B_a`,
/// with plain integer loops.
fn kernel_table(rep: &LinearRep, limit: u64) -> Vec<Vec<u128>> {
    let d = rep.dim();
    let k = rep.k();
    let mut table: Vec<Vec<u128>> = vec![rep.w().iter().map(|&x| x as u128).collect()];
    for n in 1..limit {
        let parent = &table[(n / k) as usize];
        let b = rep.digit((n % k) as usize);
        let row = (0..d)
            .map(|j| (0..d).map(|i| parent[i] * b.get(i, j) as u128).sum())
            .collect();
        table.push(row);
    }
    table
}

fn catalog_reps() -> Vec<LinearRep> {
    let mut reps: Vec<LinearRep> = catalog::NAMES
        .iter()
        .map(|n| catalog::by_name(n).unwrap())
        .collect();
    reps.push(salem(&[1, 1]).unwrap());
    reps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_matches_bottom_up_table(rep in rep_strategy()) {
        let limit = rep.k().pow(6);
        let table = kernel_table(&rep, limit);
        for m in 0..limit {
            let got = rep.eval_kernel_vector(m);
            let want: Vec<BigUint> = table[m as usize].iter().map(|&x| BigUint::from(x)).collect();
            prop_assert_eq!(got, want, "m = {}", m);
        }
    }

    #[test]
    fn block_sum_identity_on_random_reps(rep in rep_strategy()) {
        for n in 0..=5 {
            let direct: BigUint = rep.block_values(n).unwrap().iter().sum();
            prop_assert_eq!(rep.block_sum(n), direct);
        }
    }

    #[test]
    fn rebase_preserves_values(rep in rep_strategy(), j in 1u32..=3) {
        let k = rep.k();
        let big = rep.rebase(j).unwrap();
        prop_assert_eq!(big.k(), k.pow(j));
        for m in 0..k.pow(6) {
            let full_leading_group = digits_of(m, k).unwrap().len().is_multiple_of(j as usize);
            if rep.is_zero_insensitive() || full_leading_group {
                prop_assert_eq!(big.eval_f(m), rep.eval_f(m), "m = {}", m);
            }
        }
    }

    #[test]
    fn digit_expansion_round_trips(k in 2u64..=16, seed in any::<u64>()) {
        let m = seed % k.pow(12);
        let digits = digits_of(m, k).unwrap();
        prop_assert_eq!(digits.value(), BigUint::from(m));
        prop_assert!(digits.digits().iter().all(|&d| d < k));
        prop_assert!(digits.digits().first().is_none_or(|&d| d > 0));
    }

    #[test]
    fn json_round_trips(rep in rep_strategy()) {
        prop_assert_eq!(LinearRep::from_json(&rep.to_json()).unwrap(), rep);
    }
}

#[test]
fn block_sum_identity_on_catalog() {
    for rep in catalog_reps() {
        for n in 0..=8 {
            let direct: BigUint = rep.block_values(n).unwrap().iter().sum();
            assert_eq!(rep.block_sum(n), direct, "{rep:?} n = {n}");
        }
    }
}

#[test]
fn rebase_of_zero_insensitive_catalog_reps_is_exact() {
    for rep in [stern(), cantor(), salem(&[1, 1]).unwrap()] {
        assert!(rep.is_zero_insensitive());
        for j in 1..=3 {
            let big = rep.rebase(j).unwrap();
            for m in 0..rep.k().pow(6) {
                assert_eq!(big.eval_f(m), rep.eval_f(m));
            }
        }
    }
}

#[test]
fn rebase_pads_short_leading_groups_with_b0() {
    // m = 1 is the base-4 digit 1 = (0 1) in base 2, so the rebased product is B_0 B_1.
    let z = zaremba(2).unwrap();
    assert!(!z.is_zero_insensitive());
    assert_eq!(z.eval_f(1), BigUint::from(2u32));
    assert_eq!(z.rebase(2).unwrap().eval_f(1), BigUint::from(3u32));
}

#[test]
fn digit_expansion_exhaustive_in_base_two() {
    for m in 0..1u64 << 12 {
        assert_eq!(digits_of(m, 2).unwrap().value(), BigUint::from(m));
    }
}
