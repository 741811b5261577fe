//! Cross-module checks: structures, channels, bounds and file formats agree.

use proptest::prelude::*;
use twc_core::bounds::{inner_bound, outer_bound, region_gap};
use twc_core::channel::example_mod2_adder;
use twc_core::infocore::binary_entropy;
use twc_core::io::{format_channel, parse_channel, read_region_csv, region_rows, write_region_csv};
use twc_core::isd::{mod2_adder_structure, rectangle_capacity, to_channel};
use twc_core::poisson::{discretize, inner_rates, Mode, PoissonParams};
use twc_core::{InputConstraint, OptimizerConfig};

fn light() -> OptimizerConfig {
    OptimizerConfig {
        weights: 5,
        restarts: 3,
        ..OptimizerConfig::default()
    }
}

const NONE: InputConstraint = InputConstraint::None;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // R1 crosses to receiver 2, whose noise has crossover c2.
    #[test]
    fn mod2_rectangle_matches_binary_symmetric_capacity(c1 in 0.0f64..0.5, c2 in 0.0f64..0.5) {
        let s = mod2_adder_structure(c1, c2).unwrap();
        let r = rectangle_capacity(&s, &NONE, &NONE, &light()).unwrap();
        let ln2 = std::f64::consts::LN_2;
        prop_assert!((r.max_r1() - (ln2 - binary_entropy(c2).unwrap())).abs() < 1e-9);
        prop_assert!((r.max_r2() - (ln2 - binary_entropy(c1).unwrap())).abs() < 1e-9);
        let induced = to_channel(&s).unwrap();
        prop_assert!(induced.max_abs_diff(&example_mod2_adder(c1, c2).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn region_csv_round_trip_preserves_vertices(c in 0.0f64..0.5) {
        let r = rectangle_capacity(&mod2_adder_structure(c, c).unwrap(), &NONE, &NONE, &light()).unwrap();
        let back = read_region_csv(&write_region_csv(&region_rows("g", "s", &r)).unwrap()).unwrap();
        for (row, v) in back.iter().zip(r.vertices()) {
            prop_assert!((row.r1 - v.r1).abs() <= 1e-11 * v.r1.max(1e-300));
            prop_assert!((row.r2 - v.r2).abs() <= 1e-11 * v.r2.max(1e-300));
        }
    }
}

#[test]
fn parsed_channel_gives_the_same_bounds() {
    let ch = example_mod2_adder(0.05, 0.2).unwrap();
    let parsed = parse_channel(&format_channel(&ch)).unwrap();
    let a = inner_bound(&ch, &NONE, &NONE, &light()).unwrap();
    let b = inner_bound(&parsed, &NONE, &NONE, &light()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn slot_channel_bounds_contain_the_duty_cycle_sweep() {
    // the slot channel is a finite two-way channel; with duty cycles
    // unconstrained its Shannon inner bound dominates every Bernoulli pair
    let p = PoissonParams {
        a: 1.0,
        sigma1: 1.0,
        sigma2: 1.0,
        lambda0: 2.0,
        delta: 1e-2,
    };
    let ch = discretize(&p, Mode::Exact).unwrap().to_channel().unwrap();
    let inner = inner_bound(&ch, &NONE, &NONE, &light()).unwrap();
    let outer = outer_bound(&ch, &NONE, &NONE, &light()).unwrap();
    assert!(region_gap(&inner, &outer) >= -1e-9);
    for (pi1, pi2) in [(0.5, 0.5), (0.3, 0.2), (0.9, 0.1)] {
        let r = inner_rates(&p, pi1, pi2, Mode::Exact).unwrap();
        let per_slot = twc_core::RatePair::new(r.r1 * p.delta, r.r2 * p.delta);
        assert!(inner.contains(per_slot, 1e-9), "{per_slot:?}");
    }
}
