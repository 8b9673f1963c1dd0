use ghost_core::catalog::{self, salem, stern, zaremba};
use ghost_core::ghost::{classify_salem, empirical_measure, sup_distance, SalemClass};
use ghost_core::{Dilation, Functional, GhostCdf, JsrConfig, LinearRep, Mode, Model};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn catalog_reps() -> Vec<LinearRep> {
    catalog::NAMES
        .iter()
        .map(|n| catalog::by_name(n).unwrap())
        .collect()
}

fn float_cdf(rep: &LinearRep) -> GhostCdf<f64> {
    GhostCdf::new(
        Dilation::float(rep, JsrConfig::default()).unwrap(),
        Functional::FIRST,
    )
    .unwrap()
}

#[test]
fn empirical_weights_sum_to_one() {
    for rep in catalog_reps() {
        for n in 0..=10u32 {
            if rep.k().pow(n) * (rep.k() - 1) > 1 << 18 {
                continue;
            }
            let mu = empirical_measure(&rep, n).unwrap();
            let total = mu
                .atoms()
                .into_iter()
                .fold(BigRational::zero(), |acc, (_, w)| acc + w);
            assert!(total.is_one(), "{rep:?} n = {n}");
            let positions: Vec<_> = mu.atoms().into_iter().map(|(p, _)| p).collect();
            assert!(positions.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn ghost_cdf_monotone_with_fixed_ends() {
    for rep in catalog_reps() {
        let values = float_cdf(&rep).grid(12).unwrap();
        assert_eq!(values[0], 0.0, "{rep:?}");
        assert_eq!(*values.last().unwrap(), 1.0, "{rep:?}");
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{rep:?}");
    }
}

#[test]
fn ghost_cdf_invariant_under_scaling() {
    for rep in [salem(&[2, 3]).unwrap(), zaremba(2).unwrap(), stern()] {
        let base = Dilation::exact(&rep, JsrConfig::default()).unwrap();
        let seven = BigRational::from_integer(BigInt::from(7));
        let reference = GhostCdf::new(base.clone(), Functional::Weight)
            .unwrap()
            .grid(8)
            .unwrap();
        let scaled_v =
            GhostCdf::new(base.with_eigenvector_scale(seven), Functional::Weight).unwrap();
        assert_eq!(scaled_v.grid(8).unwrap(), reference);
        let w7: Vec<u64> = rep.w().iter().map(|x| 7 * x).collect();
        let rep7 = rep.with_weight(w7).unwrap();
        let scaled_w = GhostCdf::new(
            Dilation::exact(&rep7, JsrConfig::default()).unwrap(),
            Functional::Weight,
        )
        .unwrap();
        assert_eq!(scaled_w.grid(8).unwrap(), reference);
    }
}

#[test]
fn empirical_measures_approach_ghost() {
    for rep in [salem(&[2, 3]).unwrap(), zaremba(2).unwrap(), stern()] {
        let ghost = float_cdf(&rep);
        let d4 = sup_distance(&empirical_measure(&rep, 4).unwrap(), &ghost, 4).unwrap();
        let d12 = sup_distance(&empirical_measure(&rep, 12).unwrap(), &ghost, 12).unwrap();
        assert!(d12 < d4, "{rep:?}: {d12} >= {d4}");
    }
}

#[test]
fn weighted_functional_converges_for_stern() {
    // Stern's row vector is e_2, so its empirical measures converge to the
    // w-weighted formula rather than the first-coordinate one.
    let rep = stern();
    let ghost = GhostCdf::new(
        Dilation::float(&rep, JsrConfig::default()).unwrap(),
        Functional::Weight,
    )
    .unwrap();
    let d12 = sup_distance(&empirical_measure(&rep, 12).unwrap(), &ghost, 12).unwrap();
    assert!(d12 < 1e-3, "{d12}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lebesgue_inputs_give_identity(k in 2usize..=4, c in 1u64..=6) {
        let digits = vec![c; k];
        prop_assert_eq!(classify_salem(&digits).unwrap(), SalemClass::Lebesgue);
        let rep = salem(&digits).unwrap();
        let Model::Exact(dil) = Model::build(&rep, Mode::Auto, JsrConfig::default()).unwrap() else {
            panic!("scalar representations are exact");
        };
        let g = GhostCdf::new(dil, Functional::FIRST).unwrap();
        let depth = if k == 2 { 8 } else { 5 };
        let top = (k as i64).pow(depth);
        for (j, v) in g.grid(depth).unwrap().into_iter().enumerate() {
            prop_assert_eq!(v, BigRational::new(BigInt::from(j), BigInt::from(top)));
        }
    }

    #[test]
    fn classification_is_total_and_exclusive(digits in (2usize..=4).prop_flat_map(|k| proptest::collection::vec(0u64..=3, k))) {
        let nonzero = digits.iter().filter(|&&b| b > 0).count();
        match classify_salem(&digits) {
            Err(_) => prop_assert_eq!(nonzero, 0),
            Ok(SalemClass::Lebesgue) => prop_assert!(digits.iter().all(|&b| b == digits[0] && b > 0)),
            Ok(SalemClass::ZeroMeasure) => prop_assert!(nonzero == 1 && digits[0] > 0),
            Ok(SalemClass::PurePoint(_)) => prop_assert!(nonzero == 1 && digits[0] == 0),
            Ok(SalemClass::SingularContinuous) => {
                prop_assert!(nonzero >= 2 && digits.iter().any(|&b| b != digits[0]))
            }
        }
    }

    #[test]
    fn ghost_of_random_salem_is_monotone(digits in (2usize..=3).prop_flat_map(|k| proptest::collection::vec(0u64..=5, k))
        .prop_filter("two nonzero digits", |d| d.iter().filter(|&&b| b > 0).count() >= 2))
    {
        let rep = salem(&digits).unwrap();
        let values = float_cdf(&rep).grid(6).unwrap();
        prop_assert_eq!(values[0], 0.0);
        prop_assert_eq!(*values.last().unwrap(), 1.0);
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }
}
