use std::f64::consts::PI;

use mmframe::channel::{nearest_grid_index, steering_vector};
use mmframe::frame::{self, welch_bound};
use mmframe::kron::{factor, realize};
use mmframe::linalg::{min_norm_solve, random_complex_matrix, unvec, vec};
use mmframe::polar::{normalize_measurement, polar_tighten};
use mmframe::seed::rng_from_seed;
use mmframe::solvers::{bpdn, BpdnConfig};
use mmframe::{CMatrix, CVector, Complex64, Frame, KronDims, SensingOperator};
use proptest::prelude::*;

fn random_frame(seed: u64, m: usize, n: usize) -> Frame {
    Frame::random_unit_norm(m, n, &mut rng_from_seed(seed)).unwrap()
}

fn random_unitary(seed: u64, m: usize) -> CMatrix {
    random_complex_matrix(&mut rng_from_seed(seed), m, m).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coherence_respects_welch_bound(seed in any::<u64>(), m in 2usize..6, extra in 1usize..10) {
        let f = random_frame(seed, m, m + extra);
        prop_assert!(frame::coherence(&f).unwrap() >= welch_bound(m, m + extra).unwrap() - 1e-12);
    }

    #[test]
    fn coherence_is_unitarily_invariant(seed in any::<u64>(), m in 2usize..6, extra in 1usize..8, phase in 0.0..(2.0 * PI)) {
        let f = random_frame(seed, m, m + extra);
        let mut rotated = random_unitary(seed ^ 0x5a5a, m) * f.matrix();
        let spin = Complex64::from_polar(1.0, phase);
        for z in rotated.column_mut(0).iter_mut() {
            *z *= spin;
        }
        let a = frame::coherence(&f).unwrap();
        let b = frame::coherence(&Frame::new(rotated).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gram_is_hermitian_with_unit_diagonal(seed in any::<u64>(), m in 1usize..6, extra in 0usize..6) {
        let f = random_frame(seed, m, m + extra);
        let g = frame::gram(&f);
        prop_assert!((g.adjoint() - &g).norm() < 1e-12);
        prop_assert!(g.diagonal().iter().all(|d| (d.re - 1.0).abs() < 1e-12 && d.im.abs() < 1e-12));
    }

    #[test]
    fn polar_tightening_is_tight_and_normalization_hits_target(seed in any::<u64>(), t in 1usize..4, r in 1usize..4) {
        let n = t * r * 2;
        let m = (n / 2).max(1);
        let tight = polar_tighten(&random_frame(seed, m, n)).unwrap();
        prop_assert!(frame::tightness_residual(&tight) <= 1e-10);
        let (lo, hi) = frame::frame_bounds(&tight);
        prop_assert!((hi - lo).abs() <= 1e-9 * hi);
        let phi = normalize_measurement(&tight, 2 * t, r).unwrap();
        prop_assert!((phi.matrix.norm() - ((2 * t * r) as f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn exact_kronecker_products_round_trip(seed in any::<u64>(), t in 1usize..4, r in 1usize..4, mt in 1usize..4, mr in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let u = random_complex_matrix(&mut rng, t, mt);
        let v = random_complex_matrix(&mut rng, r, mr);
        let phi = u.transpose().kronecker(&v.adjoint());
        let pair = factor(&phi, KronDims::new(t, r, mt, mr)).unwrap();
        prop_assert!((realize(&pair) - &phi).norm() <= 1e-10 * phi.norm());
        prop_assert!(pair.approx_error <= 1e-10 * phi.norm());
    }

    #[test]
    fn vec_round_trips(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        let m = random_complex_matrix(&mut rng_from_seed(seed), rows, cols);
        prop_assert_eq!(unvec(&vec(&m), rows, cols).unwrap(), m);
    }

    #[test]
    fn nearest_grid_point_is_within_half_a_step(phi in 0.0..(2.0 * PI), g in 1usize..32) {
        let k = nearest_grid_index(phi, g);
        let theta = 2.0 * PI * k as f64 / g as f64;
        let d = (phi - theta).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) <= PI / g as f64 + 1e-12);
    }

    #[test]
    fn steering_vectors_are_unit_and_periodic(phi in -10.0f64..10.0, n in 1usize..16) {
        let a = steering_vector(phi, n, 0.5);
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        prop_assert!((steering_vector(phi + 2.0 * PI, n, 0.5) - a).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bpdn_stays_inside_the_residual_ball(seed in any::<u64>(), frac in 0.01f64..0.9) {
        let mut rng = rng_from_seed(seed);
        let op = SensingOperator::new(random_complex_matrix(&mut rng, 8, 20)).unwrap();
        let y = random_complex_matrix(&mut rng, 8, 1).column(0).into_owned();
        let cfg = BpdnConfig::with_delta(frac * y.norm());
        let res = bpdn(&y, &op, &cfg).unwrap();
        prop_assert!(res.residual_norm <= cfg.delta * (1.0 + 1e-3));
        // The minimum-norm interpolant is feasible, so it bounds the optimal ℓ1 norm.
        let l1 = |x: &CVector| x.iter().map(|z| z.norm()).sum::<f64>();
        let feasible = min_norm_solve(op.matrix(), &y);
        prop_assert!(l1(&res.x_hat) <= l1(&feasible) * (1.0 + 1e-3));
    }
}
