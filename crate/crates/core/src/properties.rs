use nalgebra::Complex;
use proptest::prelude::*;

use crate::catalog::{decompose, enumerate, m1_solution, EnumerationMode, Permutation};
use crate::ensemble::{naimark_dilate, rescale_to_povm};
use crate::io::{parse_problem, problem_to_string};
use crate::landscape::{
    classify, directional_curvature, directional_derivative, evaluate, hessian_coordinates, hessian_matrix,
    Classification,
};
use crate::linalg::{self, expi};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::random::{
    random_block_matched_problem, random_diagonal_problem, random_hermitian, random_permutation, random_problem,
    random_unitary,
};
use crate::traps::{certify_trap, exchange_graph, survey_decomposition};

fn dims() -> impl Strategy<Value = usize> {
    2usize..=5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn value_ignores_global_phase(seed in any::<u32>(), d in dims(), phi in -3.0f64..3.0) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let u = random_unitary::<f64>(seed as u64 + 1, d);
        let v = &u * Complex::new(phi.cos(), phi.sin());
        prop_assert!((evaluate(&p, &u).unwrap() - evaluate(&p, &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn value_is_bounded_by_operator_norms(seed in any::<u32>(), d in dims()) {
        let p = random_problem::<f64>(seed as u64, d, 3);
        let u = random_unitary::<f64>(seed as u64 + 7, d);
        let bound: f64 = p
            .terms()
            .iter()
            .map(|t| t.weight * linalg::hermitian_eig(&t.operator).unwrap().values.iter().fold(0.0f64, |a, b| a.max(b.abs())))
            .sum();
        prop_assert!(evaluate(&p, &u).unwrap().abs() <= bound + 1e-12);
    }

    #[test]
    fn conjugation_moves_the_landscape(seed in any::<u32>(), d in dims()) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let w = random_unitary::<f64>(seed as u64 + 2, d);
        let u = random_unitary::<f64>(seed as u64 + 3, d);
        let q = p.conjugated(&w).unwrap();
        let moved = &w * &u * w.adjoint();
        prop_assert!((evaluate(&q, &moved).unwrap() - evaluate(&p, &u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference(seed in any::<u32>(), d in dims()) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let u = random_unitary::<f64>(seed as u64 + 4, d);
        let a = random_hermitian::<f64>(seed as u64 + 5, d);
        let h = 1e-5;
        let f = |s: f64| evaluate(&p, &(expi(&a, s).unwrap() * &u)).unwrap();
        let fd = (f(h) - f(-h)) / (2.0 * h);
        let exact = directional_derivative(&p, &u, &a).unwrap();
        let scale = a.norm() * a.norm() * p.operator_scale();
        prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(1e-12));
    }

    #[test]
    fn hessian_reproduces_curvature(seed in any::<u32>(), d in dims()) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let u = random_unitary::<f64>(seed as u64 + 6, d);
        let a = random_hermitian::<f64>(seed as u64 + 8, d);
        let h = hessian_matrix(&p, &u).unwrap();
        prop_assert!((&h - h.transpose()).amax() < 1e-12);
        let v = hessian_coordinates(&a).unwrap();
        let q = (v.transpose() * &h * &v)[(0, 0)];
        let exact = directional_curvature(&p, &u, &a).unwrap();
        prop_assert!((q - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn permutation_algebra(seed in any::<u32>(), n in 1usize..=8) {
        let a = Permutation::from_images(random_permutation(seed as u64, n)).unwrap();
        let b = Permutation::from_images(random_permutation(seed as u64 + 1, n)).unwrap();
        prop_assert_eq!(a.compose(&a.inverse()), Permutation::identity(n));
        let m = a.matrix::<f64>() * b.matrix::<f64>();
        prop_assert_eq!(m, a.compose(&b).matrix::<f64>());
        prop_assert_eq!(a.to_string().parse::<Permutation>().unwrap(), a);
    }

    #[test]
    fn problems_round_trip_through_text(seed in any::<u32>(), d in 1usize..=4, m in 1usize..=3) {
        let p = random_problem::<f64>(seed as u64, d, m);
        prop_assert_eq!(parse_problem::<f64>(&problem_to_string(&p)).unwrap(), p);
    }

    #[test]
    fn rescaling_is_affine(seed in any::<u32>(), d in dims(), complete in any::<bool>()) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let (q, rec) = rescale_to_povm(&p, complete).unwrap();
        let u = random_unitary::<f64>(seed as u64 + 9, d);
        let lhs = evaluate(&p, &u).unwrap();
        let rhs = evaluate(&q, &u).unwrap() + rec.offset;
        prop_assert!((lhs - rhs).abs() < 1e-10);
        if complete {
            prop_assert!(q.structure().povm);
            let dil = naimark_dilate(&q).unwrap();
            prop_assert!((evaluate(&dil.problem, &dil.lift(&u)).unwrap() - evaluate(&q, &u).unwrap()).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn catalog_agrees_with_engine(seed in any::<u32>(), d in 2usize..=5, m in 1usize..=3) {
        let p = random_diagonal_problem::<f64>(seed as u64, d, m);
        let dec = decompose(&p).unwrap();
        prop_assert_eq!(dec.state_blocks.iter().sum::<usize>(), d);
        let pi = Permutation::from_images(random_permutation(seed as u64 + 1, d)).unwrap();
        let pt = dec.point(&pi).unwrap();
        let r = classify(&p, &pt.representative).unwrap();
        prop_assert!((r.value - pt.value).abs() < 1e-12);
        prop_assert!(r.residual < r.tolerances.critical);
        prop_assert!(r.reconcilable);
        prop_assert_eq!(r.classification, pt.classification);
    }

    #[test]
    fn census_is_consistent(seed in any::<u32>(), d in 3usize..=5) {
        let p = random_block_matched_problem::<f64>(seed as u64, d, 3);
        let dec = decompose(&p).unwrap();
        let census = survey_decomposition(&dec).unwrap();
        let total: usize = census.entries.iter().map(|e| e.count).sum();
        prop_assert_eq!(total, census.permutations);
        prop_assert!((dec.value(&Permutation::identity(d)).unwrap() - census.global_max).abs() < 1e-12);
        for v in census.ft_values() {
            prop_assert!(*v < census.global_max - 1e-10);
        }
        for pt in enumerate(&dec, EnumerationMode::Exhaustive).unwrap() {
            let g = exchange_graph(&pt.pi, &dec).unwrap();
            let back = exchange_graph(&pt.pi.inverse(), &dec).unwrap();
            prop_assert_eq!(back.edges, g.edges.iter().map(|&(i, j)| (j, i)).collect());
            if pt.classification == Classification::LocalMax {
                prop_assert!(!g.has_two_cycle());
                let cert = certify_trap(&pt, &dec).unwrap();
                prop_assert_eq!(cert.is_false_trap, census.is_trap(pt.value, pt.classification));
            }
        }
    }

    #[test]
    fn single_term_catalog_is_trap_free(seed in any::<u32>(), d in 2usize..=5) {
        let p = random_problem::<f64>(seed as u64, d, 1);
        let s = m1_solution(&p).unwrap();
        let census = survey_decomposition(&decompose(&p).unwrap()).unwrap();
        prop_assert!(census.max_trap_values.is_empty() && census.min_trap_values.is_empty());
        prop_assert!((census.global_max - s.max_value).abs() < 1e-10);
        prop_assert!((census.global_min - s.min_value).abs() < 1e-10);
    }

    #[test]
    fn runs_are_monotone(seed in any::<u32>(), d in 2usize..=4, ascend in any::<bool>()) {
        let p = random_problem::<f64>(seed as u64, d, 2);
        let mode = if ascend { crate::landscape::Direction::Ascend } else { crate::landscape::Direction::Descend };
        let cfg = OptimizerConfig {
            seed: seed as u64,
            record_trajectory: true,
            max_iters: 500,
            ..OptimizerConfig::with_mode(mode)
        };
        let r = optimize(&p, &cfg).unwrap();
        let t = r.trajectory.unwrap();
        let sign = if ascend { 1.0 } else { -1.0 };
        prop_assert!(t.windows(2).all(|w| sign * (w[1].1 - w[0].1) >= 0.0));
        prop_assert!(linalg::unitary_deviation(&r.point) < 1e-10);
    }
}
