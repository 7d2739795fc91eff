//! Monte Carlo and exhaustive checks of the estimators against closed forms.

use rnla_core::eig::{power_method_from_start, rand_power_method, relative_error};
use rnla_core::generate::{gen_psd, gen_with_singular_values, haar_orthogonal, psd_from_basis};
use rnla_core::leastsq::{
    kaczmarz_rate, lsqr_dense, rand_kaczmarz, uniform_kaczmarz_rate, LsProblem, RowSampling,
};
use rnla_core::lowrank::subspace_iteration;
use rnla_core::matrix::norm2;
use rnla_core::matrix_mc::{
    ColumnOuterProducts, ColumnSampling, EntrywiseDecomposition, SampleableDecomposition,
};
use rnla_core::mmio::{read_matrix_market, write_matrix_market};
use rnla_core::precond::{build_preconditioner, pcg_solve};
use rnla_core::trace::{frobenius_sq_estimate, hutchinson, TestVectorDist};
use rnla_core::{DenseMatrix, EntryOracle, MatVecOracle, RngStream, SpectrumSpec};

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn weighted_sum<D: SampleableDecomposition>(d: &D) -> DenseMatrix {
    let (m, n) = d.dims();
    let mut acc = DenseMatrix::zeros(m, n);
    for (j, p) in d.probs().iter().enumerate() {
        if *p > 0.0 {
            acc = acc.add(&d.scaled_summand(j).scale(*p)).unwrap();
        }
    }
    acc
}

#[test]
fn hutchinson_unbiased_for_every_distribution() {
    let a = RngStream::new(5, 5).normal_matrix(5, 5);
    for (k, dist) in [TestVectorDist::Signs, TestVectorDist::Sphere, TestVectorDist::Gaussian].into_iter().enumerate() {
        let est = hutchinson(&MatVecOracle::from_dense(&a), 1_000_000, dist, &RngStream::new(6, k as u64)).unwrap();
        let (m, se) = mean_se(&est.per_sample);
        assert!((m - a.trace()).abs() <= 3.0 * se, "{dist:?}: {m} vs {} (se {se})", a.trace());
    }
}

#[test]
fn variance_shrinks_like_one_over_s() {
    let a = RngStream::new(7, 0).normal_matrix(6, 6).symmetrize();
    let mut off = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                off += 2.0 * a.get(i, j).powi(2);
            }
        }
    }
    let reps = 40_000u64;
    for s in [1usize, 4, 16] {
        let base = RngStream::new(8, s as u64);
        let vals: Vec<f64> = (0..reps)
            .map(|r| hutchinson(&MatVecOracle::from_dense(&a), s, TestVectorDist::Signs, &base.substream(r)).unwrap().value)
            .collect();
        let (m, _) = mean_se(&vals);
        let n = vals.len() as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = vals.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
        let se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).sqrt();
        let expected = off / s as f64;
        assert!((var - expected).abs() <= 3.0 * se, "s={s}: {var} vs {expected} (se {se})");
    }
}

#[test]
fn frobenius_estimate_unbiased_and_counts_two_matvecs_per_sample() {
    let b = RngStream::new(9, 0).normal_matrix(7, 4);
    let o = MatVecOracle::from_dense(&b);
    let s = 200_000;
    let est = frobenius_sq_estimate(&o, s, TestVectorDist::Gaussian, &RngStream::new(9, 1)).unwrap();
    assert_eq!(o.matvec_count(), 2 * s as u64);
    let (m, se) = mean_se(&est.per_sample);
    assert!((m - b.frobenius_norm().powi(2)).abs() <= 3.0 * se);
}

#[test]
fn samplers_are_unbiased_by_exhaustive_weighting() {
    let a = RngStream::new(10, 0).normal_matrix(4, 7);
    let aat = a.matmul(&a.transpose()).unwrap();
    for sampling in [ColumnSampling::Weighted, ColumnSampling::Uniform] {
        let d = ColumnOuterProducts::new(a.clone(), sampling).unwrap();
        assert!(weighted_sum(&d).sub(&aat).unwrap().max_abs() <= 1e-12 * aat.max_abs());
    }
    let b = RngStream::new(10, 1).normal_matrix(2, 4);
    let d = EntrywiseDecomposition::new(&b).unwrap();
    assert!(weighted_sum(&d).sub(&b).unwrap().max_abs() <= 1e-12 * b.max_abs());
}

#[test]
fn power_method_converges_from_every_gaussian_start() {
    let n: usize = 16;
    let vals: Vec<f64> = (0..n).map(|i| 0.5f64.powi(i as i32)).collect();
    let a = gen_psd(&SpectrumSpec::new(vals).unwrap(), &mut RngStream::new(11, 0));
    let base = RngStream::new(11, 1);
    for seed in 0..1000 {
        let o = MatVecOracle::from_dense(&a);
        let tr = rand_power_method(&o, 40, &mut base.substream(seed)).unwrap();
        assert_eq!(o.matvec_count(), 41);
        assert!(relative_error(tr.estimates[40], 1.0).unwrap() < 1e-6, "seed {seed}");
    }
}

#[test]
fn power_method_asymptotic_rate() {
    let lam = [1.0, 0.8, 0.5, 0.3, 0.1];
    let q = haar_orthogonal(5, &mut RngStream::new(12, 0));
    let a = psd_from_basis(&q, &lam);
    let x0 = q.matvec(&[1.0, 1.0, 1.0, 1.0, 1.0]);
    let tr = power_method_from_start(&MatVecOracle::from_dense(&a), &x0, 60).unwrap();
    let err: Vec<f64> = tr.estimates.iter().map(|x| relative_error(*x, 1.0).unwrap()).collect();
    let ratio = err[51] / err[50];
    assert!((ratio - 0.64).abs() <= 0.01 * 0.64, "ratio {ratio}");
}

#[test]
fn subspace_iteration_matvec_budget() {
    let b = RngStream::new(13, 0).normal_matrix(20, 15);
    let o = MatVecOracle::from_dense(&b);
    subspace_iteration(&o, 4, 3, false, &mut RngStream::new(13, 1)).unwrap();
    assert_eq!(o.matvec_count(), 2 * 4 * 3);
}

#[test]
fn dominant_row_rates_order_and_both_bounds_hold() {
    let mut rng = RngStream::new(14, 0);
    let mut a = rng.normal_matrix(30, 3);
    for j in 0..3 {
        a.set(0, j, 20.0 * a.get(0, j));
    }
    assert!(kaczmarz_rate(&a) < uniform_kaczmarz_rate(&a));
    let xs = rng.normal_vec(3);
    let p = LsProblem::new(a.clone(), a.matvec(&xs)).unwrap();
    let steps = 60;
    let mean_final = |sampling| {
        let v: Vec<f64> = (0..400)
            .map(|i| {
                let mut r = RngStream::new(15, i);
                rand_kaczmarz(&p, &[0.0; 3], steps, sampling, Some(&xs), &mut r).unwrap().errors[steps]
            })
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let e0 = norm2(&xs).powi(2);
    assert!(mean_final(RowSampling::Weighted) <= kaczmarz_rate(&a).powi(steps as i32) * e0);
    assert!(mean_final(RowSampling::Uniform) <= uniform_kaczmarz_rate(&a).powi(steps as i32) * e0);
}

#[test]
fn lsqr_matches_dense_solution() {
    let mut rng = RngStream::new(16, 0);
    let a = gen_with_singular_values(60, 8, &SpectrumSpec::logspace(1.0, 1e-2, 8).unwrap(), &mut rng).unwrap();
    let b = rng.normal_vec(60);
    let p = LsProblem::new(a, b).unwrap();
    let out = lsqr_dense(&p, 1e-14, 500);
    let x = p.solve_dense();
    let diff: Vec<f64> = out.x.iter().zip(&x).map(|(u, v)| u - v).collect();
    assert!(norm2(&diff) <= 1e-8 * norm2(&x));
}

#[test]
fn pcg_iterations_nonincreasing_in_rank() {
    let n = 200;
    let a = gen_psd(&SpectrumSpec::geometric(1.0, 0.9, n).unwrap(), &mut RngStream::new(17, 0));
    let b = RngStream::new(17, 1).normal_vec(n);
    let mut violations = 0;
    for seed in 0..20 {
        let mut last = usize::MAX;
        for k in [0, 10, 20, 40, 80] {
            let o = EntryOracle::from_dense(&a).unwrap();
            let pc = build_preconditioner(&o, k, 1e-4, &mut RngStream::new(18, seed)).unwrap();
            let out = pcg_solve(&a, &b, 1e-4, &pc, 1e-8, 2000).unwrap();
            assert!(out.converged);
            if out.iterations > last {
                violations += 1;
            }
            last = out.iterations;
        }
    }
    assert!(violations <= 1, "{violations} violations");
}

#[test]
fn matrix_market_round_trip() {
    let a = RngStream::new(19, 0).normal_matrix(5, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    write_matrix_market(&a, &path).unwrap();
    let back = read_matrix_market(&path).unwrap();
    assert_eq!(back.as_slice(), a.as_slice());
}
