//! Overdetermined least squares: randomized Kaczmarz, sketch-and-solve,
//! iterative sketching, sketched whitening, approximate null spaces, and
//! sketch-preconditioned LSQR.

use crate::error::{ensure_dims, ensure_domain, Result, RnlaError};
use crate::linalg::{orth, pivoted_qr, singular_values, solve_upper, solve_upper_transpose, svd, PivotedQr};
use crate::lowrank::ORTH_TOL;
use crate::matrix::{axpy, dot, norm2, sub_vec, DenseMatrix};
use crate::matrix_mc::DiscreteSampler;
use crate::rng::RngStream;
use crate::sketch::{distortion, Embedding};

/// `min ½‖Ax − b‖²` with `A` of size `n × d`, `n ≥ d`.
#[derive(Clone, Debug)]
pub struct LsProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

impl LsProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        ensure_dims(a.rows() == b.len(), || format!("A has {} rows, b has length {}", a.rows(), b.len()))?;
        ensure_dims(a.rows() >= a.cols(), || format!("expected n >= d, got {:?}", a.shape()))?;
        ensure_domain(b.iter().all(|v| v.is_finite()), || "b has a non-finite entry".into())?;
        Ok(Self { a, b })
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        sub_vec(&self.a.matvec(x), &self.b)
    }

    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        norm2(&self.residual(x))
    }

    /// Dense solution through pivoted QR.
    pub fn solve_dense(&self) -> Vec<f64> {
        pivoted_qr(&self.a, 1e-14).solve_least_squares(&self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowSampling {
    /// `p_i = ‖a_i‖² / ‖A‖_F²`
    Weighted,
    /// Uniform over the nonzero rows.
    Uniform,
}

/// Row distribution; zero rows get probability zero.
pub fn row_probabilities(a: &DenseMatrix, sampling: RowSampling) -> Result<Vec<f64>> {
    let norms: Vec<f64> = (0..a.rows()).map(|i| a.row(i).iter().map(|v| v * v).sum()).collect();
    let total: f64 = norms.iter().sum();
    if total == 0.0 {
        return Err(RnlaError::ZeroMatrix);
    }
    Ok(match sampling {
        RowSampling::Weighted => norms.iter().map(|v| v / total).collect(),
        RowSampling::Uniform => {
            let nz = norms.iter().filter(|v| **v > 0.0).count() as f64;
            norms.iter().map(|v| if *v > 0.0 { 1.0 / nz } else { 0.0 }).collect()
        }
    })
}

/// Projects `x` onto the hyperplane `⟨a, x⟩ = beta`.
pub fn kaczmarz_project(a: &[f64], beta: f64, x: &mut [f64]) {
    let nrm2 = dot(a, a);
    if nrm2 > 0.0 {
        axpy((beta - dot(a, x)) / nrm2, a, x);
    }
}

#[derive(Clone, Debug)]
pub struct KaczmarzTrace {
    /// `‖x_t − x⋆‖²` when a reference solution is supplied, otherwise
    /// `‖Ax_t − b‖`; `T + 1` entries.
    pub errors: Vec<f64>,
    pub x: Vec<f64>,
    pub probs: Vec<f64>,
    /// Row selected at each step.
    pub rows: Vec<usize>,
}

fn rows_of(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i)).collect()
}

/// Randomized Kaczmarz for a consistent system.
pub fn rand_kaczmarz(
    p: &LsProblem,
    x0: &[f64],
    iters: usize,
    sampling: RowSampling,
    reference: Option<&[f64]>,
    rng: &mut RngStream,
) -> Result<KaczmarzTrace> {
    let d = p.a.cols();
    ensure_dims(x0.len() == d, || format!("x0 has length {}, expected {d}", x0.len()))?;
    if let Some(r) = reference {
        ensure_dims(r.len() == d, || "reference solution has the wrong length".into())?;
    }
    let probs = row_probabilities(&p.a, sampling)?;
    let sampler = DiscreteSampler::new(&probs)?;
    let rows = rows_of(&p.a);
    let metric = |x: &[f64]| match reference {
        Some(r) => x.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum(),
        None => p.residual_norm(x),
    };
    let mut x = x0.to_vec();
    let mut errors = Vec::with_capacity(iters + 1);
    let mut chosen = Vec::with_capacity(iters);
    errors.push(metric(&x));
    for _ in 0..iters {
        let i = sampler.sample(rng);
        kaczmarz_project(&rows[i], p.b[i], &mut x);
        chosen.push(i);
        errors.push(metric(&x));
    }
    Ok(KaczmarzTrace { errors, x, probs, rows: chosen })
}

/// Exact `E‖x_next − x⋆‖²` for one Kaczmarz step from `x`, averaging over
/// every row.
pub fn kaczmarz_expected_step(p: &LsProblem, x: &[f64], x_star: &[f64], probs: &[f64]) -> f64 {
    let rows = rows_of(&p.a);
    let mut e = 0.0;
    for (i, &pi) in probs.iter().enumerate() {
        if pi > 0.0 {
            let mut y = x.to_vec();
            kaczmarz_project(&rows[i], p.b[i], &mut y);
            e += pi * y.iter().zip(x_star).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
    }
    e
}

/// `‖A‖_F / σ_min(A)`; infinite when `A` is numerically rank deficient.
pub fn demmel_cond(a: &DenseMatrix) -> f64 {
    let sv = singular_values(a);
    let smin = if sv.len() < a.cols() { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    let smax = sv.first().copied().unwrap_or(0.0);
    if smin <= smax * 1e-15 * a.rows().max(a.cols()) as f64 || smin == 0.0 {
        return f64::INFINITY;
    }
    a.frobenius_norm() / smin
}

/// Weighted contraction factor `1 − κ_dem⁻²`.
pub fn kaczmarz_rate(a: &DenseMatrix) -> f64 {
    let k = demmel_cond(a);
    1.0 - 1.0 / (k * k)
}

/// Uniform-sampling contraction factor `1 − σ_min²/(n·max‖a_i‖²)`.
pub fn uniform_kaczmarz_rate(a: &DenseMatrix) -> f64 {
    let smin = singular_values(a).last().copied().unwrap_or(0.0);
    let max_row = (0..a.rows()).map(|i| a.row(i).iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
    let nz = (0..a.rows()).filter(|&i| a.row(i).iter().any(|v| *v != 0.0)).count();
    1.0 - smin * smin / (nz as f64 * max_row)
}

#[derive(Clone, Debug)]
pub struct SketchSolve {
    pub x: Vec<f64>,
    /// `‖Ax − b‖`
    pub residual: f64,
    /// `ΦA` was numerically rank deficient; `x` is the basic solution.
    pub rank_deficient: bool,
}

fn sketched_qr(a: &DenseMatrix, e: &Embedding) -> Result<PivotedQr> {
    ensure_dims(e.n() == a.rows(), || format!("embedding ambient {} vs {} rows", e.n(), a.rows()))?;
    Ok(pivoted_qr(&e.apply(a)?, 1e-14))
}

/// Solves `min ‖Φ(Ax − b)‖` by pivoted QR of `ΦA`.
pub fn sketch_solve_ls(p: &LsProblem, e: &Embedding) -> Result<SketchSolve> {
    let qr = sketched_qr(&p.a, e)?;
    let db = e.apply_vec(&p.b);
    let x = qr.solve_least_squares(&db);
    Ok(SketchSolve { residual: p.residual_norm(&x), rank_deficient: qr.rank < p.a.cols(), x })
}

/// `(1+ε)/(1−ε)`, infinite for `ε ≥ 1`.
pub fn distortion_ratio(eps: f64) -> f64 {
    if eps >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + eps) / (1.0 - eps)
    }
}

fn full_rank_sketch(a: &DenseMatrix, e: &Embedding) -> Result<PivotedQr> {
    let qr = sketched_qr(a, e)?;
    if qr.rank < a.cols() {
        return Err(RnlaError::RankDeficient(format!(
            "sketched matrix has numerical rank {} < {}",
            qr.rank,
            a.cols()
        )));
    }
    Ok(qr)
}

/// `R⁻¹`-type solve in the original column order: returns `P R⁻¹ y`.
fn apply_pr_inv(qr: &PivotedQr, y: &[f64]) -> Vec<f64> {
    let z = solve_upper(&qr.r, y);
    let mut x = vec![0.0; z.len()];
    for (j, zj) in z.into_iter().enumerate() {
        x[qr.perm[j]] = zj;
    }
    x
}

/// `R⁻ᵀ Pᵀ g`
fn apply_pr_inv_t(qr: &PivotedQr, g: &[f64]) -> Vec<f64> {
    let pg: Vec<f64> = qr.perm.iter().map(|&j| g[j]).collect();
    solve_upper_transpose(&qr.r, &pg)
}

#[derive(Clone, Debug)]
pub struct IterativeSketch {
    pub x: Vec<f64>,
    /// `x_0` (sketch-and-solve), `x_1`, …
    pub iterates: Vec<Vec<f64>>,
    /// `‖Ax_t − b‖` per iterate.
    pub residuals: Vec<f64>,
    /// Residual grew three steps in a row.
    pub diverged: bool,
}

/// Iterative sketching `x_{t+1} = x_t − (AᵀΦᵀΦA)⁻¹ Aᵀ(Ax_t − b)` started
/// from the sketch-and-solve solution.
pub fn iterative_sketch_ls(p: &LsProblem, e: &Embedding, iters: usize) -> Result<IterativeSketch> {
    let qr = full_rank_sketch(&p.a, e)?;
    let x0 = qr.solve_least_squares(&e.apply_vec(&p.b));
    iterative_sketch_from(p, &qr, x0, iters)
}

fn iterative_sketch_from(p: &LsProblem, qr: &PivotedQr, x0: Vec<f64>, iters: usize) -> Result<IterativeSketch> {
    let mut x = x0;
    let mut r = p.residual(&x);
    let mut residuals = vec![norm2(&r)];
    let mut iterates = vec![x.clone()];
    let mut increases = 0;
    let mut diverged = false;
    for _ in 0..iters {
        let g = p.a.matvec_t(&r);
        let step = apply_pr_inv(qr, &apply_pr_inv_t(qr, &g));
        axpy(-1.0, &step, &mut x);
        r = p.residual(&x);
        let res = norm2(&r);
        let prev = *residuals.last().expect("nonempty");
        increases = if res > prev * (1.0 + 1e-12) { increases + 1 } else { 0 };
        residuals.push(res);
        iterates.push(x.clone());
        if increases >= 3 {
            diverged = true;
            break;
        }
    }
    Ok(IterativeSketch { x, iterates, residuals, diverged })
}

/// Iterative sketching from an arbitrary start.
pub fn iterative_sketch_ls_from(p: &LsProblem, e: &Embedding, x0: &[f64], iters: usize) -> Result<IterativeSketch> {
    let qr = full_rank_sketch(&p.a, e)?;
    ensure_dims(x0.len() == p.a.cols(), || "start vector has the wrong length".into())?;
    iterative_sketch_from(p, &qr, x0.to_vec(), iters)
}

/// Sketched whitening `ΦAP = QR`; `B = APR⁻¹` is well conditioned.
#[derive(Clone, Debug)]
pub struct Whitening {
    qr: PivotedQr,
    /// Measured distortion of the embedding on `range(A)`.
    pub eps: f64,
}

impl Whitening {
    /// Upper-triangular `d × d` factor.
    pub fn r(&self) -> &DenseMatrix {
        &self.qr.r
    }

    pub fn perm(&self) -> &[usize] {
        &self.qr.perm
    }

    /// `(1+ε)/(1−ε)` for the measured `ε`.
    pub fn kappa_bound(&self) -> f64 {
        distortion_ratio(self.eps)
    }

    /// `P R⁻¹ y`
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        apply_pr_inv(&self.qr, y)
    }

    /// `R⁻ᵀ Pᵀ g`
    pub fn apply_inverse_transpose(&self, g: &[f64]) -> Vec<f64> {
        apply_pr_inv_t(&self.qr, g)
    }

    /// Dense `A P R⁻¹`.
    pub fn whitened(&self, a: &DenseMatrix) -> DenseMatrix {
        let d = a.cols();
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                a.matvec(&self.apply_inverse(&e))
            })
            .collect();
        DenseMatrix::from_columns(&cols, a.rows()).expect("finite")
    }
}

pub fn whiten(a: &DenseMatrix, e: &Embedding) -> Result<Whitening> {
    let qr = full_rank_sketch(a, e)?;
    let u = orth(a, ORTH_TOL);
    let eps = distortion(e, &u)?;
    Ok(Whitening { qr, eps })
}

#[derive(Clone, Debug)]
pub struct NullSpace {
    /// `d × k` orthonormal.
    pub w: DenseMatrix,
    /// Singular values of `ΦA`, decreasing.
    pub sketched_singular_values: Vec<f64>,
}

/// Trailing `k` right singular vectors of `ΦA`.
pub fn approx_null_space(a: &DenseMatrix, k: usize, e: &Embedding) -> Result<NullSpace> {
    let d = a.cols();
    ensure_domain(k <= d, || format!("k = {k} exceeds d = {d}"))?;
    ensure_dims(e.n() == a.rows(), || format!("embedding ambient {} vs {} rows", e.n(), a.rows()))?;
    ensure_domain(e.s() >= d, || format!("embedding dimension {} below d = {d}", e.s()))?;
    let dec = svd(&e.apply(a)?);
    let idx: Vec<usize> = (d - k..d).collect();
    Ok(NullSpace { w: dec.v.columns(&idx), sketched_singular_values: dec.s })
}

#[derive(Clone, Debug)]
pub struct LsqrOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Āᵀr‖/(‖Ā‖·‖r‖)` estimate per iteration (zero once `r = 0`).
    pub history: Vec<f64>,
}

/// LSQR (Golub–Kahan bidiagonalization) on an operator given by closures.
/// Stops when `‖r‖ ≤ tol·‖b‖` or `‖Āᵀr‖ ≤ tol·‖Ā‖_F·‖r‖` (running
/// estimates).
pub fn lsqr(
    n: usize,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    apply_t: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> LsqrOutput {
    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let mut beta = norm2(&u);
    let bnorm = beta;
    if beta == 0.0 {
        return LsqrOutput { x, iterations: 0, converged: true, history: vec![] };
    }
    u.iter_mut().for_each(|v| *v /= beta);
    let mut v = apply_t(&u);
    let mut alpha = norm2(&v);
    if alpha == 0.0 {
        return LsqrOutput { x, iterations: 0, converged: true, history: vec![0.0] };
    }
    v.iter_mut().for_each(|t| *t /= alpha);
    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let mut anorm2 = 0.0;
    let mut history = Vec::new();

    for it in 1..=maxit {
        // bidiagonalization step
        let mut au = apply(&v);
        axpy(-alpha, &u, &mut au);
        u = au;
        beta = norm2(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|t| *t /= beta);
        }
        anorm2 += alpha * alpha + beta * beta;
        let mut atv = apply_t(&u);
        axpy(-beta, &v, &mut atv);
        let alpha_next = norm2(&atv);
        if alpha_next > 0.0 {
            atv.iter_mut().for_each(|t| *t /= alpha_next);
        }

        // plane rotation
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha_next;
        rho_bar = -c * alpha_next;
        let phi = c * phi_bar;
        phi_bar *= s;

        axpy(phi / rho, &w, &mut x);
        let mut w_next = atv.clone();
        axpy(-theta / rho, &w, &mut w_next);
        w = w_next;
        v = atv;
        alpha = alpha_next;

        let rnorm = phi_bar.abs();
        let arnorm = rnorm * alpha * c.abs();
        let rel = if rnorm > 0.0 { arnorm / (anorm2.sqrt() * rnorm) } else { 0.0 };
        history.push(rel);
        if rnorm <= tol * bnorm || rel <= tol || alpha == 0.0 {
            return LsqrOutput { x, iterations: it, converged: true, history };
        }
    }
    LsqrOutput { x, iterations: maxit, converged: false, history }
}

/// Plain LSQR on a dense matrix.
pub fn lsqr_dense(p: &LsProblem, tol: f64, maxit: usize) -> LsqrOutput {
    lsqr(p.a.cols(), |v| p.a.matvec(v), |u| p.a.matvec_t(u), &p.b, tol, maxit)
}

#[derive(Clone, Debug)]
pub struct PreconditionedLsqr {
    pub lsqr: LsqrOutput,
    pub whitening: Whitening,
}

/// LSQR on `min ‖(A P R⁻¹) y − b‖` with `R` from the sketched QR, returning
/// `x = P R⁻¹ y`.
pub fn sketch_precondition_lsqr(p: &LsProblem, e: &Embedding, tol: f64, maxit: usize) -> Result<PreconditionedLsqr> {
    let wh = whiten(&p.a, e)?;
    let mut out = lsqr(
        p.a.cols(),
        |y| p.a.matvec(&wh.apply_inverse(y)),
        |u| wh.apply_inverse_transpose(&p.a.matvec_t(u)),
        &p.b,
        tol,
        maxit,
    );
    out.x = wh.apply_inverse(&out.x);
    Ok(PreconditionedLsqr { lsqr: out, whitening: wh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_with_singular_values, haar_frame, SpectrumSpec};
    use crate::sketch::{build_gaussian, build_srtt};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn kaczmarz_step_satisfies_row() {
        let mut rng = RngStream::from_seed(1);
        let a = rng.normal_matrix(10, 3);
        let b = rng.normal_vec(10);
        let p = LsProblem::new(a.clone(), b.clone()).unwrap();
        let tr = rand_kaczmarz(&p, &[0.0; 3], 1, RowSampling::Weighted, None, &mut rng).unwrap();
        let i = tr.rows[0];
        assert!((dot(&a.row(i), &tr.x) - b[i]).abs() < 1e-10);
        assert!((tr.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kaczmarz_fixed_point() {
        let mut rng = RngStream::from_seed(2);
        let a = rng.normal_matrix(8, 3);
        let xs = rng.normal_vec(3);
        let p = LsProblem::new(a.clone(), a.matvec(&xs)).unwrap();
        let tr = rand_kaczmarz(&p, &xs, 20, RowSampling::Weighted, Some(&xs), &mut rng).unwrap();
        assert!(tr.errors.iter().all(|e| *e < 1e-24));
    }

    #[test]
    fn zero_rows_never_sampled() {
        let mut a = DenseMatrix::identity(3);
        a.set(1, 1, 0.0);
        let probs = row_probabilities(&a, RowSampling::Weighted).unwrap();
        assert_eq!(probs[1], 0.0);
        let probs = row_probabilities(&a, RowSampling::Uniform).unwrap();
        assert_eq!(probs, vec![0.5, 0.0, 0.5]);
        assert!(row_probabilities(&DenseMatrix::zeros(2, 2), RowSampling::Weighted).is_err());
    }

    #[test]
    fn demmel_examples() {
        assert!((demmel_cond(&DenseMatrix::identity(4)) - 2.0).abs() < 1e-14);
        assert!((demmel_cond(&DenseMatrix::from_diagonal(&[2.0, 1.0])) - 5f64.sqrt()).abs() < 1e-14);
        let sing = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(demmel_cond(&sing).is_infinite());
    }

    #[test]
    fn consistent_sketch_solve_is_exact() {
        let mut rng = RngStream::from_seed(3);
        let a = rng.normal_matrix(60, 4);
        let xs = rng.normal_vec(4);
        let p = LsProblem::new(a.clone(), a.matvec(&xs)).unwrap();
        let e = build_gaussian(20, 60, &mut rng).unwrap();
        let sol = sketch_solve_ls(&p, &e).unwrap();
        assert!(sol.residual <= 1e-8);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn iterative_sketch_stationary_at_solution() {
        let mut rng = RngStream::from_seed(4);
        let a = rng.normal_matrix(80, 5);
        let b = rng.normal_vec(80);
        let p = LsProblem::new(a, b).unwrap();
        let xs = p.solve_dense();
        let e = build_gaussian(30, 80, &mut rng).unwrap();
        let it = iterative_sketch_ls_from(&p, &e, &xs, 5).unwrap();
        assert!(close(&it.x, &xs, 1e-12));
    }

    #[test]
    fn whitening_identity() {
        let mut rng = RngStream::from_seed(5);
        let u = haar_frame(32, 4, &mut rng);
        let e = build_srtt(32, 32, &mut rng).unwrap();
        let wh = whiten(&u, &e).unwrap();
        let sv = singular_values(&wh.whitened(&u));
        assert!(sv[0] / sv[3] <= 1.0 + 1e-8);
        assert!(wh.eps <= 1e-10);
    }

    #[test]
    fn whitening_scalar_case() {
        let mut rng = RngStream::from_seed(6);
        let a = DenseMatrix::column_vector(&rng.normal_vec(40));
        let e = build_gaussian(10, 40, &mut rng).unwrap();
        let wh = whiten(&a, &e).unwrap();
        let phi_a = norm2(&e.apply_vec(a.column(0)));
        assert!((wh.r().get(0, 0).abs() - phi_a).abs() < 1e-12);
        let sigma = norm2(a.column(0)) / phi_a;
        assert!(sigma >= 1.0 / (1.0 + wh.eps) - 1e-12 && sigma <= 1.0 / (1.0 - wh.eps) + 1e-12);
    }

    #[test]
    fn null_space_exact() {
        let mut rng = RngStream::from_seed(7);
        let spec = SpectrumSpec::new(vec![3.0, 2.0, 1.0]).unwrap();
        let a = gen_with_singular_values(50, 5, &spec, &mut rng).unwrap();
        let e = build_gaussian(20, 50, &mut rng).unwrap();
        let ns = approx_null_space(&a, 2, &e).unwrap();
        assert!(a.matmul(&ns.w).unwrap().frobenius_norm() < 1e-8);
    }

    #[test]
    fn lsqr_matches_dense() {
        let mut rng = RngStream::from_seed(8);
        let a = rng.normal_matrix(40, 6);
        let b = rng.normal_vec(40);
        let p = LsProblem::new(a, b).unwrap();
        let out = lsqr_dense(&p, 1e-14, 200);
        assert!(out.converged);
        assert!(close(&out.x, &p.solve_dense(), 1e-8));
        let zero = LsProblem::new(p.a.clone(), vec![0.0; 40]).unwrap();
        let out = lsqr_dense(&zero, 1e-10, 10);
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn preconditioned_lsqr_consistent() {
        let mut rng = RngStream::from_seed(9);
        let spec = SpectrumSpec::logspace(1.0, 1e-3, 5).unwrap();
        let a = gen_with_singular_values(100, 5, &spec, &mut rng).unwrap();
        let xs = rng.normal_vec(5);
        let p = LsProblem::new(a.clone(), a.matvec(&xs)).unwrap();
        let e = build_gaussian(40, 100, &mut rng).unwrap();
        let out = sketch_precondition_lsqr(&p, &e, 1e-12, 100).unwrap();
        assert!(out.lsqr.converged);
        let err = norm2(&sub_vec(&out.lsqr.x, &xs)) / norm2(&xs);
        assert!(err <= 1e-8, "err {err}");
    }
}
