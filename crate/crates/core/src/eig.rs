//! Randomized power method and randomized joint diagonalization.

use crate::error::{ensure_dims, ensure_domain, Result, RnlaError};
use crate::linalg::sym_eigen;
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::oracle::MatVecOracle;
use crate::rng::RngStream;

/// Iterates below this norm are treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerTrace {
    /// Rayleigh quotients `ξ_0, …, ξ_T`.
    pub estimates: Vec<f64>,
    pub matvecs: u64,
    /// Set when an iterate vanished; later estimates are reported as zero.
    pub degenerate: bool,
    /// `(seed, stream_id)` of the stream that drew the start vector.
    pub origin: (u64, u64),
}

/// Power method from a Gaussian start: `q_t = x_t/‖x_t‖`, `x_{t+1} = A q_t`,
/// `ξ_t = q_tᵀ x_{t+1}`. Uses `T + 1` matvecs.
pub fn rand_power_method(a: &MatVecOracle, t: usize, rng: &mut RngStream) -> Result<PowerTrace> {
    ensure_dims(a.is_square(), || format!("power method on non-square {} x {} oracle", a.rows(), a.cols()))?;
    let origin = (rng.seed(), rng.stream_id());
    let x0 = rng.normal_vec(a.cols());
    let mut trace = power_method_from_start(a, &x0, t)?;
    trace.origin = origin;
    Ok(trace)
}

/// Same recurrence from a caller-supplied start vector.
pub fn power_method_from_start(a: &MatVecOracle, x0: &[f64], t: usize) -> Result<PowerTrace> {
    ensure_dims(a.is_square(), || format!("power method on non-square {} x {} oracle", a.rows(), a.cols()))?;
    ensure_dims(x0.len() == a.cols(), || format!("start vector has length {}, expected {}", x0.len(), a.cols()))?;
    let mut estimates = Vec::with_capacity(t + 1);
    let mut matvecs = 0;
    let mut degenerate = false;
    let mut x = x0.to_vec();
    for _ in 0..=t {
        let nrm = norm2(&x);
        if nrm < DEGENERATE_NORM {
            degenerate = true;
            break;
        }
        let q: Vec<f64> = x.iter().map(|v| v / nrm).collect();
        x = a.apply(&q);
        matvecs += 1;
        estimates.push(dot(&q, &x));
    }
    estimates.resize(t + 1, 0.0);
    Ok(PowerTrace { estimates, matvecs, degenerate, origin: (0, 0) })
}

/// `(λ₁ − ξ)/λ₁`
pub fn relative_error(xi: f64, lambda1: f64) -> Result<f64> {
    ensure_domain(lambda1 > 0.0, || format!("lambda1 must be positive, got {lambda1}"))?;
    Ok((lambda1 - xi) / lambda1)
}

/// `√(2n)·(λ₂/λ₁)ᵗ`
pub fn gap_bound(n: usize, lambda1: f64, lambda2: f64, t: usize) -> Result<f64> {
    ensure_domain(lambda1 > lambda2 && lambda2 >= 0.0, || {
        format!("need lambda1 > lambda2 >= 0, got {lambda1}, {lambda2}")
    })?;
    Ok((2.0 * n as f64).sqrt() * (lambda2 / lambda1).powi(t as i32))
}

/// `(1 + log√(2n) + log t)/t`
pub fn gapless_bound(n: usize, t: usize) -> Result<f64> {
    ensure_domain(t >= 1, || "gapless bound needs t >= 1".into())?;
    let t = t as f64;
    Ok((1.0 + (2.0 * n as f64).sqrt().ln() + t.ln()) / t)
}

/// Smallest `t ≥ 1` with `t ≥ (1 + log√(2n) + log t)/ε`, by fixed-point
/// iteration from `t = 1`.
pub fn gapless_iterations(n: usize, eps: f64) -> Result<usize> {
    ensure_domain(eps > 0.0, || format!("eps must be positive, got {eps}"))?;
    let c = 1.0 + (2.0 * n as f64).sqrt().ln();
    let h = |t: usize| (((c + (t as f64).ln()) / eps).ceil() as usize).max(1);
    let mut t = 1;
    loop {
        let next = h(t);
        if next <= t {
            return Ok(t);
        }
        t = next;
    }
}

/// Right side of the per-start error bound
/// `err(ξ_t) ≤ Σ_{i>1} ωᵢ²λᵢ^{2t} / (ω₁² + Σ_{i>1} ωᵢ²λᵢ^{2t})`, with the
/// eigenvalues normalized by `λ₁` and `ω` the start vector in the
/// eigenbasis.
pub fn start_error_bound(lambda: &[f64], omega: &[f64], t: usize) -> f64 {
    let l1 = lambda[0];
    let tail: f64 = lambda[1..]
        .iter()
        .zip(&omega[1..])
        .map(|(l, w)| w * w * (l / l1).powi(2 * t as i32))
        .sum();
    tail / (omega[0] * omega[0] + tail)
}

#[derive(Clone, Debug)]
pub struct JointDiagonalization {
    pub q: DenseMatrix,
    /// `‖off(QᵀAQ)‖_F`
    pub off_a: f64,
    /// `‖off(QᵀBQ)‖_F`
    pub off_b: f64,
    /// Mixing weights of `C = γ₁A + γ₂B`.
    pub gamma: (f64, f64),
}

/// Frobenius norm of the off-diagonal part.
pub fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let mut s = 0.0;
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            if i != j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    ensure_dims(a.is_square(), || format!("expected square matrix, got {:?}", a.shape()))?;
    let asym = a.asymmetry();
    if asym > 1e-10 * a.max_abs().max(1.0) {
        return Err(RnlaError::NotSymmetric(asym));
    }
    Ok(())
}

/// Eigenvectors of a random combination `γ₁A + γ₂B` with standard normal
/// weights; these diagonalize a commuting pair with probability one.
pub fn joint_diagonalize(a: &DenseMatrix, b: &DenseMatrix, rng: &mut RngStream) -> Result<JointDiagonalization> {
    check_symmetric(a)?;
    check_symmetric(b)?;
    ensure_dims(a.shape() == b.shape(), || format!("shapes differ: {:?} vs {:?}", a.shape(), b.shape()))?;
    let gamma = (rng.normal(), rng.normal());
    let c = a.scale(gamma.0).add(&b.scale(gamma.1))?;
    let q = sym_eigen(&c)?.vectors;
    let qaq = q.tr_matmul(&a.matmul(&q)?)?;
    let qbq = q.tr_matmul(&b.matmul(&q)?)?;
    Ok(JointDiagonalization { off_a: off_diagonal_norm(&qaq), off_b: off_diagonal_norm(&qbq), q, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exact() {
        let a = DenseMatrix::identity(5);
        let op = MatVecOracle::from_dense(&a);
        let tr = rand_power_method(&op, 6, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(tr.estimates.len(), 7);
        assert_eq!(tr.matvecs, 7);
        assert_eq!(op.matvec_count(), 7);
        for xi in tr.estimates {
            assert!((xi - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_unrolled_two_by_two() {
        let a = DenseMatrix::from_diagonal(&[1.0, 0.5]);
        let op = MatVecOracle::from_dense(&a);
        let tr = power_method_from_start(&op, &[1.0, 1.0], 1).unwrap();
        assert!((tr.estimates[0] - 0.75).abs() < 1e-15);
        assert!((tr.estimates[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let a = DenseMatrix::zeros(3, 3);
        let op = MatVecOracle::from_dense(&a);
        let tr = rand_power_method(&op, 4, &mut RngStream::from_seed(2)).unwrap();
        assert!(tr.degenerate);
        assert_eq!(tr.estimates, vec![0.0; 5]);
    }

    #[test]
    fn scalar_formulas() {
        assert_eq!(relative_error(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(relative_error(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(relative_error(0.75, 1.0).unwrap(), 0.25);
        assert!(relative_error(0.5, 0.0).is_err());
        assert!((gap_bound(16, 1.0, 0.5, 0).unwrap() - 32f64.sqrt()).abs() < 1e-15);
        assert!((gap_bound(16, 1.0, 0.5, 4).unwrap() - 0.353_553_390_593_273_7).abs() < 1e-12);
        assert_eq!(gap_bound(16, 1.0, 0.0, 3).unwrap(), 0.0);
        assert!(gap_bound(4, 1.0, 1.0, 1).is_err());
        assert!((gapless_bound(8, 1).unwrap() - (1.0 + 4f64.ln())).abs() < 1e-15);
        assert!(gapless_bound(8, 0).is_err());
    }

    #[test]
    fn gapless_bound_decreases_after_three() {
        for n in [1, 8, 1000] {
            for t in 3..200 {
                assert!(gapless_bound(n, t + 1).unwrap() < gapless_bound(n, t).unwrap());
            }
        }
    }

    #[test]
    fn gapless_iteration_rule_is_minimal() {
        for (n, eps) in [(8, 0.5), (100, 0.1), (10_000, 0.01)] {
            let t = gapless_iterations(n, eps).unwrap();
            assert!(gapless_bound(n, t).unwrap() <= eps);
            if t > 1 {
                assert!(gapless_bound(n, t - 1).unwrap() > eps);
            }
        }
    }

    // E[c/(g²+c)] ≤ √(πc/2) by composite Simpson quadrature on [−12, 12].
    #[test]
    fn gaussian_integral_inequality() {
        let density = |g: f64| (-0.5 * g * g).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for &c in &[1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let f = |g: f64| c / (g * g + c) * density(g);
            let (a, b, m) = (-12.0f64, 12.0f64, 400_000usize);
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + h * i as f64);
            }
            let integral = s * h / 3.0;
            assert!(integral <= (std::f64::consts::PI * c / 2.0).sqrt(), "c = {c}");
        }
    }

    #[test]
    fn joint_diagonal_inputs() {
        let a = DenseMatrix::from_diagonal(&[1.0, 2.0]);
        let b = DenseMatrix::from_diagonal(&[3.0, 4.0]);
        let jd = joint_diagonalize(&a, &b, &mut RngStream::from_seed(3)).unwrap();
        assert!(jd.off_a <= 1e-10 && jd.off_b <= 1e-10);
    }

    #[test]
    fn noncommuting_pair_has_residual() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_diagonal(&[1.0, 0.0]);
        let jd = joint_diagonalize(&a, &b, &mut RngStream::from_seed(4)).unwrap();
        assert!(jd.off_a.max(jd.off_b) > 1e-3);
    }

    #[test]
    fn asymmetric_rejected() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = DenseMatrix::identity(2);
        assert!(joint_diagonalize(&a, &b, &mut RngStream::from_seed(5)).is_err());
    }
}
