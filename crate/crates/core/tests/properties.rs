use proptest::prelude::*;

use rnla_core::eig::rand_power_method;
use rnla_core::generate::{gen_psd, gen_with_singular_values, haar_frame};
use rnla_core::leastsq::{kaczmarz_expected_step, row_probabilities, LsProblem, RowSampling};
use rnla_core::linalg::{orth, singular_values, sym_eigenvalues};
use rnla_core::lowrank::{nystrom_from_pivots, randomized_svd, rpcholesky, ORTH_TOL};
use rnla_core::matrix::{dot, norm2};
use rnla_core::matrix_mc::{approx_matmul, sparsify, ColumnSampling};
use rnla_core::precond::{NystromPreconditioner, Preconditioner};
use rnla_core::sketch::{build, distortion, EmbeddingKind};
use rnla_core::trace::{hutchinson, TestVectorDist};
use rnla_core::{DenseMatrix, EntryOracle, MatVecOracle, RngStream, SpectrumSpec};

fn kind_strategy() -> impl Strategy<Value = EmbeddingKind> {
    prop_oneof![Just(EmbeddingKind::Gaussian), Just(EmbeddingKind::Srtt), Just(EmbeddingKind::SparseSign)]
}

fn dist_strategy() -> impl Strategy<Value = TestVectorDist> {
    prop_oneof![Just(TestVectorDist::Signs), Just(TestVectorDist::Sphere), Just(TestVectorDist::Gaussian)]
}

/// `(n, d, s)` with `d ≤ s ≤ n`.
fn embed_dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..6, 0usize..30, 8usize..120).prop_map(|(d, extra, n)| {
        let n = n.max(d + 2);
        let s = (d + extra).min(n);
        (n, d, s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_equivalence(kind in kind_strategy(), (n, d, s) in embed_dims(), seed in any::<u64>()) {
        let u = haar_frame(n, d, &mut RngStream::new(seed, 1));
        let e = build(kind, s, n, None, &mut RngStream::new(seed, 2)).unwrap();
        let eps = distortion(&e, &u).unwrap() + 1e-10;
        let mut rng = RngStream::new(seed, 3);
        for _ in 0..1000 {
            let x = u.matvec(&rng.normal_vec(d));
            let (nx, nphi) = (norm2(&x), norm2(&e.apply_vec(&x)));
            prop_assert!((1.0 - eps) * nx <= nphi && nphi <= (1.0 + eps) * nx);
        }
    }

    #[test]
    fn inner_products_preserved(kind in kind_strategy(), (n, d, s) in embed_dims(), seed in any::<u64>()) {
        let u = haar_frame(n, d, &mut RngStream::new(seed, 1));
        let e = build(kind, s, n, None, &mut RngStream::new(seed, 2)).unwrap();
        let eps = distortion(&e, &u).unwrap();
        prop_assume!(eps <= 1.0);
        let mut rng = RngStream::new(seed, 3);
        for _ in 0..100 {
            let x = u.matvec(&rng.normal_vec(d));
            let y = u.matvec(&rng.normal_vec(d));
            let gap = (dot(&x, &y) - dot(&e.apply_vec(&x), &e.apply_vec(&y))).abs();
            prop_assert!(gap <= 10.0 * eps * norm2(&x) * norm2(&y) + 1e-12);
        }
    }

    #[test]
    fn fast_apply_matches_dense(kind in kind_strategy(), (n, _d, s) in embed_dims(), seed in any::<u64>()) {
        let e = build(kind, s, n, None, &mut RngStream::new(seed, 0)).unwrap();
        let x = RngStream::new(seed, 1).normal_matrix(n, 3);
        let diff = e.apply(&x).unwrap().sub(&e.to_dense().matmul(&x).unwrap()).unwrap().max_abs();
        prop_assert!(diff <= 1e-12 * (1.0 + x.max_abs() * (n as f64).sqrt()));
    }

    #[test]
    fn generators_hit_requested_spectra(n in 2usize..30, ratio in 0.1f64..0.95, seed in any::<u64>()) {
        let spec = SpectrumSpec::geometric(2.0, ratio, n).unwrap();
        let a = gen_psd(&spec, &mut RngStream::from_seed(seed));
        let got = sym_eigenvalues(&a).unwrap();
        for (g, w) in got.iter().zip(spec.values()) {
            prop_assert!((g - w).abs() <= 1e-10);
        }
        let k = (n / 2).max(1);
        let spec = SpectrumSpec::geometric(3.0, ratio, k).unwrap();
        let b = gen_with_singular_values(n + 3, n, &spec, &mut RngStream::from_seed(seed)).unwrap();
        let sv = singular_values(&b);
        for (i, g) in sv.iter().enumerate() {
            let w = spec.values().get(i).copied().unwrap_or(0.0);
            prop_assert!((g - w).abs() <= 1e-10);
        }
    }

    #[test]
    fn approx_matmul_is_symmetric_psd_low_rank(rows in 2usize..8, cols in 2usize..12, s in 1usize..6, seed in any::<u64>()) {
        let a = RngStream::new(seed, 0).normal_matrix(rows, cols);
        let est = approx_matmul(&a, s, ColumnSampling::Weighted, &RngStream::new(seed, 1)).unwrap();
        prop_assert!(est.matrix.asymmetry() == 0.0);
        let ev = sym_eigenvalues(&est.matrix).unwrap();
        let top = ev[0].abs().max(1e-300);
        prop_assert!(ev.iter().all(|v| *v >= -1e-10 * top));
        let rank = ev.iter().filter(|v| **v > 1e-10 * top).count();
        prop_assert!(rank <= s);
    }

    #[test]
    fn sparsifier_nnz_at_most_s(m in 1usize..10, n in 1usize..10, s in 1usize..40, seed in any::<u64>()) {
        let b = RngStream::new(seed, 0).normal_matrix(m, n);
        let sp = sparsify(&b, s, &RngStream::new(seed, 1)).unwrap();
        prop_assert!(sp.nnz() <= s);
    }

    #[test]
    fn rayleigh_quotients_in_range(n in 2usize..20, ratio in 0.0f64..1.0, t in 0usize..15, seed in any::<u64>()) {
        let spec = SpectrumSpec::geometric(1.5, ratio.max(1e-3), n).unwrap();
        let a = gen_psd(&spec, &mut RngStream::new(seed, 0));
        let tr = rand_power_method(&MatVecOracle::from_dense(&a), t, &mut RngStream::new(seed, 1)).unwrap();
        for xi in tr.estimates {
            prop_assert!((-1e-12..=1.5 * (1.0 + 1e-12)).contains(&xi));
        }
    }

    #[test]
    fn rsvd_projector_identity_and_budget(m in 5usize..30, n in 5usize..30, s in 1usize..5, seed in any::<u64>()) {
        let b = RngStream::new(seed, 0).normal_matrix(m, n);
        let o = MatVecOracle::from_dense(&b);
        let ap = randomized_svd(&o, s, false, &mut RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(o.matvec_count(), 2 * s as u64);
        let q = &ap.q;
        let defect = q.tr_matmul(q).unwrap().sub(&DenseMatrix::identity(q.cols())).unwrap().max_abs();
        prop_assert!(defect <= 1e-10);
        let proj = q.matmul(&q.tr_matmul(&b).unwrap()).unwrap();
        prop_assert!(proj.sub(&ap.to_dense()).unwrap().max_abs() <= 1e-10 * b.max_abs());
    }

    #[test]
    fn nystrom_properties(n in 3usize..25, k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(n);
        let spec = SpectrumSpec::geometric(1.0, 0.7, n).unwrap();
        let a = gen_psd(&spec, &mut RngStream::new(seed, 0));
        let o = EntryOracle::from_dense(&a).unwrap();
        let f = rpcholesky(&o, k, None, &mut RngStream::new(seed, 1)).unwrap();
        let ny = nystrom_from_pivots(&a, &f.pivots).unwrap();
        prop_assert!(ny.sub(&f.approximation()).unwrap().max_abs() <= 1e-8);
        // 0 ≼ A⟨S⟩ ≼ A
        prop_assert!(sym_eigenvalues(&ny).unwrap().iter().all(|v| *v >= -1e-10));
        prop_assert!(sym_eigenvalues(&a.sub(&ny).unwrap()).unwrap().iter().all(|v| *v >= -1e-10));
        // range(A⟨S⟩) = range(A(:, S))
        let cols = orth(&a.columns(&f.pivots), ORTH_TOL);
        let proj = cols.matmul(&cols.tr_matmul(&ny).unwrap()).unwrap();
        prop_assert!(proj.sub(&ny).unwrap().max_abs() <= 1e-10);
        let ev = sym_eigenvalues(&ny).unwrap();
        let rank = ev.iter().filter(|v| **v > 1e-10 * ev[0]).count();
        prop_assert_eq!(rank, cols.cols());
    }

    #[test]
    fn preconditioner_is_positive_definite(n in 2usize..30, k in 0usize..6, mu in 1e-6f64..1.0, seed in any::<u64>()) {
        let f = RngStream::new(seed, 0).normal_matrix(n, k.min(n));
        let p = NystromPreconditioner::from_factor(&f, mu).unwrap();
        let mut rng = RngStream::new(seed, 1);
        for _ in 0..1000 {
            let v = rng.normal_vec(n);
            prop_assert!(dot(&v, &p.apply(&v)) > 0.0);
        }
    }

    #[test]
    fn kaczmarz_step_contracts_in_expectation(n in 3usize..20, d in 1usize..4, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let a = rng.normal_matrix(n.max(d), d);
        let xs = rng.normal_vec(d);
        let p = LsProblem::new(a.clone(), a.matvec(&xs)).unwrap();
        let probs = row_probabilities(&a, RowSampling::Weighted).unwrap();
        let smin = *singular_values(&a).last().unwrap();
        let rate = 1.0 - smin * smin / a.frobenius_norm().powi(2);
        let x = rng.normal_vec(d);
        let e2: f64 = x.iter().zip(&xs).map(|(u, v)| (u - v) * (u - v)).sum();
        prop_assert!(kaczmarz_expected_step(&p, &x, &xs, &probs) <= rate * e2 * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn hutchinson_is_reproducible(n in 1usize..10, s in 1usize..20, dist in dist_strategy(), seed in any::<u64>(), id in any::<u64>()) {
        let a = RngStream::new(seed, 0).normal_matrix(n, n);
        let o = MatVecOracle::from_dense(&a);
        let x = hutchinson(&o, s, dist, &RngStream::new(seed, id)).unwrap();
        let y = hutchinson(&o, s, dist, &RngStream::new(seed, id)).unwrap();
        prop_assert_eq!(x, y);
        prop_assert_eq!(o.matvec_count(), 2 * s as u64);
    }

    #[test]
    fn substreams_do_not_depend_on_parent_position(seed in any::<u64>(), id in any::<u64>(), k in any::<u64>(), skip in 0usize..50) {
        let parent = RngStream::new(seed, id);
        let mut moved = parent.clone();
        for _ in 0..skip {
            moved.uniform();
        }
        let (mut a, mut b) = (parent.substream(k), moved.substream(k));
        prop_assert_eq!(a.normal_vec(4), b.normal_vec(4));
    }
}
