mod common;

use common::{random_balls, random_interior_uq, random_vec, relax, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use uqcone::chebyshev::gamma_balls;
use uqcone::cli::format::{parse_instance, write_instance, Instance, InstanceFile};
use uqcone::conesolver::{dual_value, DualPoint};
use uqcone::model::ilp_to_uq;
use uqcone::{Bound, UqInstance, Vector};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn instance_files_round_trip(seed in 0u64..10_000, n in 1usize..5, p in 1usize..6) {
        let mut r = rng(seed);
        let inst = random_interior_uq(&mut r, n, p);
        let file = InstanceFile::from_instance(&Instance::Uq(inst.clone()));
        let text = write_instance(&file);
        let parsed = parse_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&parsed), text.clone());
        let Instance::Uq(back) = parsed.to_instance().unwrap() else { panic!("kind changed") };
        let x = random_vec(&mut r, n, 2.0);
        prop_assert_eq!(back.objective(&x), inst.objective(&x));
        prop_assert_eq!(back.max_violation(&x), inst.max_violation(&x));
    }

    #[test]
    fn reduced_ilp_feasible_set_is_the_binary_feasible_set(seed in 0u64..10_000, n in 1usize..5, m in 0usize..3) {
        let mut r = rng(seed);
        let c = random_vec(&mut r, n, 3.0);
        let a = DMatrix::from_fn(m, n, |_, _| f64::from(r.random_range(-3..=3)));
        let rhs = Vector::from_fn(m, |_, _| f64::from(r.random_range(-1..=4)));
        let uq = ilp_to_uq(&c, &a, &rhs).unwrap();
        for mask in 0u32..(1 << n) {
            let x = Vector::from_fn(n, |k, _| f64::from((mask >> k) & 1));
            let ilp_ok = (0..m).all(|i| a.row(i).transpose().dot(&x) <= rhs[i]);
            prop_assert_eq!(uq.is_feasible(&x, 1e-12), ilp_ok);
            prop_assert!((uq.objective(&x) - c.dot(&x)).abs() < 1e-12);
        }
        // one fractional coordinate breaks the equality row
        let mut frac = Vector::from_fn(n, |_, _| f64::from(r.random_range(0..=1)));
        frac[r.random_range(0..n)] = r.random_range(0.05..0.95);
        prop_assert!(!uq.is_feasible(&frac, 1e-6));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn relaxation_bounds_every_feasible_point(seed in 0u64..10_000, n in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_interior_uq(&mut r, n, n + 2);
        let (res, v) = relax(&inst);
        prop_assume!(res.is_optimal());
        let tol = 1e-7 * (1.0 + v.abs());
        for _ in 0..500 {
            let x = random_vec(&mut r, n, 2.0);
            if inst.is_feasible(&x, 0.0) {
                prop_assert!(inst.objective(&x) <= v + tol, "f0 = {} > v = {v}", inst.objective(&x));
            }
        }
    }

    #[test]
    fn relaxation_value_is_translation_invariant(seed in 0u64..10_000, n in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_interior_uq(&mut r, n, n + 2);
        let shift = random_vec(&mut r, n, 1.0);
        let (moved, _) = inst.translate_origin(&shift).unwrap();
        let (ra, va) = relax(&inst);
        let (rb, vb) = relax(&moved);
        prop_assume!(ra.is_optimal() && rb.is_optimal());
        prop_assert!((va - vb).abs() <= 1e-6 * (1.0 + va.abs()), "{va} vs {vb}");
    }

    #[test]
    fn relaxation_value_is_invariant_under_linear_change_of_variables(seed in 0u64..10_000, n in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_interior_uq(&mut r, n, n + 2);
        let m = DMatrix::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + r.random_range(-0.4..0.4));
        prop_assume!(m.determinant().abs() > 0.2);
        let q = inst.q().congruence(&m);
        let b = inst.bs().iter().map(|bi| m.transpose() * bi).collect();
        let changed = UqInstance::new(q, b, inst.ds().to_vec(), inst.bounds().to_vec()).unwrap();
        let (ra, va) = relax(&inst);
        let (rb, vb) = relax(&changed);
        prop_assume!(ra.is_optimal() && rb.is_optimal());
        prop_assert!((va - vb).abs() <= 1e-6 * (1.0 + va.abs()), "{va} vs {vb}");
    }

    #[test]
    fn any_nonnegative_multiplier_bounds_the_relaxation(seed in 0u64..10_000, n in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_interior_uq(&mut r, n, n + 2);
        prop_assert!(inst.bounds().iter().all(|b| *b == Bound::upper(b.upper_or_inf())));
        let (res, v) = relax(&inst);
        prop_assume!(res.is_optimal());
        for _ in 0..20 {
            let lambda = (0..inst.p()).map(|_| r.random_range(0.0..2.0)).collect();
            let d = dual_value(&inst, &DualPoint { lambda }).unwrap();
            prop_assert!(d >= v - 1e-7 * (1.0 + v.abs()), "d = {d} < v = {v}");
        }
    }

    #[test]
    fn gamma_is_translation_invariant(seed in 0u64..10_000, p in 2usize..5) {
        let mut r = rng(seed);
        let balls = random_balls(&mut r, 2, p);
        let moved = balls.translated(&random_vec(&mut r, 2, 3.0));
        let a = gamma_balls(&balls).unwrap();
        let b = gamma_balls(&moved).unwrap();
        prop_assert!((a.gamma - b.gamma).abs() <= 1e-6, "{} vs {}", a.gamma, b.gamma);
    }
}
