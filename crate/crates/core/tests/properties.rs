use displace_core::displacement::{
    apply_displacement, cauchy_generators, generator_rescale, toeplitz_generators,
    verify_generators, DisplacementOperator,
};
use displace_core::matrices::numerical_rank;
use displace_core::random::{random_cauchy, random_spd_toeplitz, trial_rng};
use displace_core::{
    bareiss_factor, gko_factor, levinson_solve, materialize, DenseMatrix, GeneratorConditioning,
    HankelMatrix, ToeplitzMatrix, Vector, EPS,
};
use proptest::prelude::*;

fn entries(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

/// Toeplitz matrix with its dense vector operand.
fn toeplitz_and_vector(max_n: usize) -> impl Strategy<Value = (ToeplitzMatrix, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (entries(n), entries(n - 1), entries(n))
            .prop_map(|(c, r, x)| (ToeplitzMatrix::new(c, r).unwrap(), x))
    })
}

/// Determinant by unpivoted elimination on a matrix whose leading minors are
/// all positive.
fn det(a: &DenseMatrix, k: usize) -> f64 {
    let mut m: Vec<Vec<f64>> = (0..k).map(|i| a.row(i)[..k].to_vec()).collect();
    let mut d = 1.0;
    for p in 0..k {
        d *= m[p][p];
        for i in p + 1..k {
            let f = m[i][p] / m[p][p];
            let pivot_row = m[p].clone();
            for (mij, &mpj) in m[i].iter_mut().zip(&pivot_row).skip(p) {
                *mij -= f * mpj;
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_matvec_matches_direct((t, x) in toeplitz_and_vector(256)) {
        let fast = t.matvec_fft(&x).unwrap();
        let direct = t.matvec_direct(&x).unwrap();
        let scale = t.norm_inf() * Vector::new(x.clone()).unwrap().norm_inf();
        let n = t.n() as f64;
        prop_assert!(fast.sub(&direct).norm_inf() <= 10.0 * n.log2().max(1.0) * EPS * scale);
    }

    #[test]
    fn hankel_is_row_reversed_toeplitz(anti in (1..40usize).prop_flat_map(|n| entries(2 * n - 1))) {
        let h = HankelMatrix::new(anti).unwrap();
        let n = h.n();
        let t = h.row_reversed();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(h.entry(i, j), t.entry(n - 1 - i, j));
            }
        }
    }

    #[test]
    fn toeplitz_displacement_rank_at_most_two((t, _) in toeplitz_and_vector(64)) {
        let op = DisplacementOperator::<f64>::toeplitz();
        let d = apply_displacement(&op, &t.to_dense()).unwrap();
        prop_assert!(numerical_rank(&d, 1e-10 * d.norm_inf().max(1.0)) <= 2);
        let res = verify_generators(&op, &t.to_dense(), &toeplitz_generators(&t)).unwrap();
        prop_assert!(res <= 100.0 * t.n() as f64 * EPS);
    }

    #[test]
    fn rescaling_keeps_the_product((t, _) in toeplitz_and_vector(32), m in entries(4)) {
        let m = DenseMatrix::from_row_major(2, 2, m).unwrap();
        prop_assume!((m.row(0)[0] * m.row(1)[1] - m.row(0)[1] * m.row(1)[0]).abs() > 1.0);
        let g = toeplitz_generators(&t);
        let h = generator_rescale(&g, &m).unwrap();
        let diff = g.product().sub(&h.product()).unwrap().norm_inf();
        prop_assert!(diff <= 1e-12 * g.product().norm_inf().max(1.0));
    }

    #[test]
    fn gko_multipliers_bounded_and_factors_reconstruct(seed in any::<u64>(), n in 1..48usize) {
        let sys = random_cauchy(&mut trial_rng(seed, 0), n, 2).unwrap();
        let r: DenseMatrix = materialize(&sys).unwrap();
        for cond in GeneratorConditioning::ALL {
            let f = gko_factor(&sys, cond).unwrap();
            prop_assert!(f.l.as_slice().iter().all(|v| v.abs() <= 1.0 + 1e-12));
            let pr = DenseMatrix::from_fn(n, n, |i, j| r.row(f.perm[i])[j]);
            let lu = f.l.matmul(&f.u).unwrap();
            prop_assert!(pr.sub(&lu).unwrap().norm_inf() <= 1e3 * n as f64 * EPS * r.norm_inf() * f.growth);
        }
    }

    #[test]
    fn pivots_invariant_under_scaling(seed in any::<u64>(), n in 2..32usize, e in -20i32..20) {
        let sys = random_cauchy(&mut trial_rng(seed, 1), n, 1).unwrap();
        let c = 2f64.powi(e);
        let a = gko_factor(&sys, GeneratorConditioning::Plain).unwrap();
        let b = gko_factor(&sys.scaled(c), GeneratorConditioning::Plain).unwrap();
        prop_assert_eq!(a.perm, b.perm);
    }

    #[test]
    fn bareiss_pivots_are_ratios_of_leading_minors(seed in any::<u64>(), n in 1..12usize) {
        let t = random_spd_toeplitz(&mut trial_rng(seed, 2), n);
        let a = t.to_dense();
        let f = bareiss_factor(&t).unwrap();
        for k in 1..=n {
            let ratio = det(&a, k) / if k == 1 { 1.0 } else { det(&a, k - 1) };
            let u = f.u.row(k - 1)[k - 1];
            prop_assert!((u - ratio).abs() <= 1e-8 * ratio.abs(), "k={} u={} ratio={}", k, u, ratio);
        }
    }

    #[test]
    fn spd_reflection_coefficients_inside_unit_interval(seed in any::<u64>(), n in 1..64usize) {
        let t = random_spd_toeplitz(&mut trial_rng(seed, 3), n);
        let (_, log) = levinson_solve(&t, &vec![1.0; n]).unwrap();
        prop_assert_eq!(log.coefficients.len(), n - 1);
        prop_assert!(log.coefficients.iter().all(|k| k.abs() < 1.0));
    }
}

#[test]
fn cauchy_generators_reproduce_the_cauchy_matrix() {
    let t = Vector::new(vec![0.0, 1.0, 2.5]).unwrap();
    let s = Vector::new(vec![0.5, -1.0, 3.0]).unwrap();
    let sys = cauchy_generators(&t, &s).unwrap();
    let r: DenseMatrix = materialize(&sys).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(r.row(i)[j], 1.0 / (t[i] - s[j]));
        }
    }
}
