//! One function per subcommand. The problem instance is drawn from a fixed
//! stream of `--seed`; trial `i` draws from `RngStream::new(seed, 0)
//! .substream(i)` and its stream id is recorded in every row, so a single
//! trial can be replayed with `RngStream::new(seed, stream_id)`.

use rayon::prelude::*;

use rnla_core::eig::{
    gap_bound, gapless_bound, joint_diagonalize, rand_power_method, relative_error,
};
use rnla_core::generate::{gen_psd, gen_with_singular_values, haar_frame, haar_orthogonal, psd_from_basis};
use rnla_core::leastsq::{
    approx_null_space, distortion_ratio, iterative_sketch_ls, kaczmarz_rate, rand_kaczmarz, sketch_solve_ls,
    uniform_kaczmarz_rate, whiten, LsProblem, RowSampling,
};
use rnla_core::linalg::{check_psd, orth, singular_values, spectral_norm, svd, sym_eigen};
use rnla_core::lowrank::{
    gaussian_test_matrix, nystrom_from_pivots, randomized_svd_with_test_matrix, rpc_rank_needed, rpcholesky,
    rsvd_deterministic_bound, rsvd_error_bound, subspace_iteration, ORTH_TOL,
};
use rnla_core::matrix::norm2;
use rnla_core::matrix_mc::{
    approx_matmul, matrix_mc_bound, mc_stats, sparsify, ColumnOuterProducts, ColumnSampling, EntrywiseDecomposition,
};
use rnla_core::mmio::read_matrix_market;
use rnla_core::precond::{build_preconditioner, pcg_solve, IdentityPreconditioner};
use rnla_core::sketch::{build, distortion, EmbeddingKind};
use rnla_core::trace::{hutchinson, intdim, trace_samples_needed, TestVectorDist};
use rnla_core::{DenseMatrix, EntryOracle, MatVecOracle, RngStream, SpectrumSpec};

use crate::args::{Command, ExperimentArgs};
use crate::report::{quantile, Cell, Table};
use crate::{BenchError, Report, Result};

/// Stream id reserved for problem generation.
pub const PROBLEM_STREAM: u64 = u64::MAX;

pub fn problem_rng(seed: u64) -> RngStream {
    RngStream::new(seed, PROBLEM_STREAM)
}

pub fn trial_rng(seed: u64, trial: usize) -> RngStream {
    RngStream::new(seed, 0).substream(trial as u64)
}

pub fn dispatch(cmd: &Command) -> Result<Report> {
    let a = cmd.args();
    match cmd {
        Command::Trace(_) => trace(a),
        Command::Matmul(_) => matmul(a),
        Command::Sparsify(_) => sparsify_cmd(a),
        Command::Power(_) => power(a),
        Command::Rsvd(_) => rsvd(a),
        Command::Rpcholesky(_) => rpchol(a),
        Command::Kaczmarz(_) => kaczmarz(a),
        Command::SketchLs(_) => sketch_ls(a),
        Command::IterSketch(_) => iter_sketch(a),
        Command::Whiten(_) => whiten_cmd(a),
        Command::Nullspace(_) => nullspace(a),
        Command::PrecondCg(_) => precond_cg(a),
        Command::EmbedCheck(_) => embed_check(a),
        Command::Jointdiag(_) => jointdiag(a),
    }
}

fn invalid(msg: impl Into<String>) -> BenchError {
    BenchError::Validation(msg.into())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    require(v.is_finite() && v > 0.0, || format!("--{name} must be positive and finite, got {v}"))?;
    Ok(v)
}

fn at_least(name: &str, v: usize, lo: usize) -> Result<usize> {
    require(v >= lo, || format!("--{name} must be at least {lo}, got {v}"))?;
    Ok(v)
}

fn load_matrix(a: &ExperimentArgs) -> Result<Option<DenseMatrix>> {
    match &a.matrix {
        None => Ok(None),
        Some(path) => read_matrix_market(path)
            .map(Some)
            .map_err(|source| BenchError::MatrixFile { path: path.clone(), source }),
    }
}

fn load_psd(a: &ExperimentArgs) -> Result<Option<DenseMatrix>> {
    match load_matrix(a)? {
        None => Ok(None),
        Some(m) => {
            require(m.is_square(), || format!("matrix must be square, got {} x {}", m.rows(), m.cols()))?;
            check_psd(&m, 1e-10)?;
            Ok(Some(m))
        }
    }
}

fn embedding_kind(a: &ExperimentArgs, default: EmbeddingKind) -> Result<EmbeddingKind> {
    match &a.kind {
        None => Ok(default),
        Some(k) => k.parse().map_err(|_| invalid(format!("unknown --kind '{k}' (gaussian, srtt, sparse_sign)"))),
    }
}

fn trials(a: &ExperimentArgs, default: usize) -> Result<usize> {
    at_least("trials", a.trials.unwrap_or(default), 1)
}

/// Runs `f` for every trial on the worker pool and returns the results in
/// trial order.
fn par_trials<T: Send>(n: usize, f: impl Fn(usize, RngStream) -> Result<T> + Sync + Send, seed: u64) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(|i| f(i, trial_rng(seed, i))).collect()
}

fn meta(seed: u64, trial: usize) -> Vec<Cell> {
    vec![seed.into(), trial.into(), trial_rng(seed, trial).stream_id().into()]
}

fn header(extra: &[&'static str]) -> Vec<&'static str> {
    let mut h = vec!["seed", "trial", "stream_id"];
    h.extend_from_slice(extra);
    h
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    s / n as f64
}

fn report(table: Table) -> Report {
    Report { table, not_converged: false }
}

fn trace(a: &ExperimentArgs) -> Result<Report> {
    let eps = positive("eps", a.eps.unwrap_or(0.5))?;
    let ntr = trials(a, 1000)?;
    let dist: TestVectorDist = match &a.dist {
        None => TestVectorDist::Signs,
        Some(d) => d.parse().map_err(|_| invalid(format!("unknown --dist '{d}' (signs, sphere, gaussian)")))?,
    };
    let m = match load_psd(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(64), 1)?;
            let id = a.intdim.unwrap_or(8.0);
            require(id >= 1.0 && id <= n as f64, || format!("--intdim must lie in [1, n = {n}], got {id}"))?;
            let rest = if n > 1 { (id - 1.0) / (n - 1) as f64 } else { 0.0 };
            let vals: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { rest }).collect();
            gen_psd(&SpectrumSpec::new(vals)?, &mut problem_rng(a.seed))
        }
    };
    let n = m.rows();
    let tr = m.trace();
    require(tr > 0.0, || "trace of the input is zero".into())?;
    let id = intdim(&m)?;
    let s = match a.s {
        Some(s) => at_least("s", s, 1)?,
        None => trace_samples_needed(id, eps)?,
    };
    let bound = 2.0 / (eps * eps * s as f64 * id);
    let ests = par_trials(ntr, |_, rng| Ok(hutchinson(&MatVecOracle::from_dense(&m), s, dist, &rng)?.value), a.seed)?;
    let fails: Vec<bool> = ests.iter().map(|e| (e - tr).abs() >= eps * tr).collect();
    let freq = fails.iter().filter(|f| **f).count() as f64 / ntr as f64;
    let mut t = Table::new(header(&[
        "n", "s", "eps", "intdim", "trace", "estimate", "rel_err", "failure", "failure_freq", "chebyshev_bound",
    ]));
    for (i, (e, f)) in ests.iter().zip(&fails).enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            n.into(),
            s.into(),
            eps.into(),
            id.into(),
            tr.into(),
            (*e).into(),
            ((e - tr).abs() / tr).into(),
            (*f).into(),
            freq.into(),
            bound.into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn column_sampling(a: &ExperimentArgs) -> Result<ColumnSampling> {
    match a.sampling.as_deref() {
        None | Some("weighted") => Ok(ColumnSampling::Weighted),
        Some("uniform") => Ok(ColumnSampling::Uniform),
        Some(o) => Err(invalid(format!("unknown --sampling '{o}' (weighted, uniform)"))),
    }
}

fn matmul(a: &ExperimentArgs) -> Result<Report> {
    let s = at_least("s", a.s.unwrap_or(100), 1)?;
    let ntr = trials(a, 200)?;
    let sampling = column_sampling(a)?;
    let am = match load_matrix(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(8), 1)?;
            let d = at_least("d", a.d.unwrap_or(12), 1)?;
            problem_rng(a.seed).normal_matrix(n, d)
        }
    };
    let n = am.rows();
    let b = am.matmul(&am.transpose())?;
    let norm_b = spectral_norm(&b);
    let dec = ColumnOuterProducts::new(am.clone(), sampling)?;
    let stats = mc_stats(&dec);
    let bound = matrix_mc_bound(stats, n, n, s);
    let errs = par_trials(
        ntr,
        |_, rng| {
            let est = approx_matmul(&am, s, sampling, &rng)?;
            Ok(spectral_norm(&est.matrix.sub(&b)?))
        },
        a.seed,
    )?;
    let mean_err = mean(errs.iter().copied());
    let mut t = Table::new(header(&["n", "d", "s", "spectral_err", "rel_err", "mean_err", "bound", "v", "L"]));
    for (i, e) in errs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            n.into(),
            am.cols().into(),
            s.into(),
            (*e).into(),
            (e / norm_b).into(),
            mean_err.into(),
            bound.into(),
            stats.v.into(),
            stats.l.into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn sparsify_cmd(a: &ExperimentArgs) -> Result<Report> {
    let s = at_least("s", a.s.unwrap_or(1000), 1)?;
    let ntr = trials(a, 100)?;
    let b = match load_matrix(a)? {
        Some(m) => m,
        None => {
            let m = at_least("m", a.m.unwrap_or(20), 1)?;
            let n = at_least("n", a.n.unwrap_or(20), 1)?;
            problem_rng(a.seed).normal_matrix(m, n)
        }
    };
    let (m, n) = b.shape();
    let norm_b = spectral_norm(&b);
    let stats = mc_stats(&EntrywiseDecomposition::new(&b)?);
    let bound = matrix_mc_bound(stats, m, n, s);
    let res = par_trials(
        ntr,
        |_, rng| {
            let sp = sparsify(&b, s, &rng)?;
            Ok((sp.nnz(), spectral_norm(&sp.to_dense().sub(&b)?)))
        },
        a.seed,
    )?;
    let mean_err = mean(res.iter().map(|r| r.1));
    let mut t = Table::new(header(&["m", "n", "s", "nnz", "spectral_err", "rel_err", "mean_err", "bound", "v", "L"]));
    for (i, (nnz, e)) in res.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            m.into(),
            n.into(),
            s.into(),
            (*nnz).into(),
            (*e).into(),
            (e / norm_b).into(),
            mean_err.into(),
            bound.into(),
            stats.v.into(),
            stats.l.into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn power(a: &ExperimentArgs) -> Result<Report> {
    let steps = a.t.unwrap_or(20);
    let ntr = trials(a, 500)?;
    let m = match load_psd(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(16), 1)?;
            let ratio = a.ratio.unwrap_or(0.5);
            require((0.0..=1.0).contains(&ratio), || format!("--ratio must lie in [0, 1], got {ratio}"))?;
            let k = a.k.unwrap_or(1);
            require(k >= 1 && k <= n, || format!("--k must lie in [1, n = {n}], got {k}"))?;
            let vals: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { ratio.powi((i + 1 - k) as i32) }).collect();
            gen_psd(&SpectrumSpec::new(vals)?, &mut problem_rng(a.seed))
        }
    };
    let n = m.rows();
    let eig = sym_eigen(&m)?;
    let (l1, l2) = (eig.values[0], if n > 1 { eig.values[1] } else { 0.0 });
    require(l1 > 0.0, || "largest eigenvalue must be positive".into())?;
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let tr = rand_power_method(&MatVecOracle::from_dense(&m), steps, &mut rng)?;
            let errs = tr.estimates.iter().map(|x| relative_error(*x, l1)).collect::<rnla_core::Result<Vec<_>>>()?;
            Ok((tr.estimates, errs))
        },
        a.seed,
    )?;
    let mean_err: Vec<f64> = (0..=steps).map(|t| mean(runs.iter().map(|r| r.1[t]))).collect();
    let gap: Vec<Option<f64>> =
        (0..=steps).map(|t| if l2 < l1 { gap_bound(n, l1, l2, t).ok() } else { None }).collect();
    let gapless: Vec<Option<f64>> = (0..=steps).map(|t| if t >= 1 { gapless_bound(n, t).ok() } else { None }).collect();
    let mut tab = Table::new(header(&["n", "t", "xi", "err", "mean_err", "gap_bound", "gapless_bound"]));
    for (i, (xi, err)) in runs.iter().enumerate() {
        for t in 0..=steps {
            let mut row = meta(a.seed, i);
            row.extend([
                n.into(),
                t.into(),
                xi[t].into(),
                err[t].into(),
                mean_err[t].into(),
                gap[t].into(),
                gapless[t].into(),
            ]);
            tab.push(row);
        }
    }
    Ok(report(tab))
}

fn rsvd(a: &ExperimentArgs) -> Result<Report> {
    let r = a.r.unwrap_or(3);
    let s = at_least("s", a.s.unwrap_or(6), 1)?;
    let steps = at_least("T", a.t.unwrap_or(1), 1)?;
    let ntr = trials(a, 500)?;
    let b = match load_matrix(a)? {
        Some(m) => m,
        None => {
            let m = at_least("m", a.m.unwrap_or(100), 1)?;
            let n = at_least("n", a.n.unwrap_or(80), 1)?;
            let ratio = positive("ratio", a.ratio.unwrap_or(0.5))?;
            let spec = SpectrumSpec::geometric(1.0, ratio, m.min(n))?;
            gen_with_singular_values(m, n, &spec, &mut problem_rng(a.seed))?
        }
    };
    let (m, n) = b.shape();
    require(s <= m.min(n), || format!("--s must not exceed min(m, n) = {}, got {s}", m.min(n)))?;
    require(r <= s, || format!("--r must not exceed --s, got r={r}, s={s}"))?;
    let dec = svd(&b);
    let spec = SpectrumSpec::new(dec.s.clone())?;
    let bound = if s >= r + 2 && steps == 1 { rsvd_error_bound(&spec, r, s).ok() } else { None };
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let o = MatVecOracle::from_dense(&b);
            if steps == 1 {
                let omega = gaussian_test_matrix(n, s, &mut rng);
                let ap = randomized_svd_with_test_matrix(&o, &omega, false)?;
                let det = rsvd_deterministic_bound(&dec.s, &dec.v, &omega, r)?;
                Ok((b.sub(&ap.to_dense())?.frobenius_norm().powi(2), Some(det), ap.rank()))
            } else {
                let ap = subspace_iteration(&o, s, steps, false, &mut rng)?;
                Ok((b.sub(&ap.to_dense())?.frobenius_norm().powi(2), None, ap.rank()))
            }
        },
        a.seed,
    )?;
    let mean_err = mean(runs.iter().map(|x| x.0));
    let mut t = Table::new(header(&[
        "m", "n", "r", "s", "T", "rank_q", "err_fro2", "mean_err_fro2", "bound", "deterministic_bound",
    ]));
    for (i, (e, det, rank)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            m.into(),
            n.into(),
            r.into(),
            s.into(),
            steps.into(),
            (*rank).into(),
            (*e).into(),
            mean_err.into(),
            bound.into(),
            (*det).into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn rpchol(a: &ExperimentArgs) -> Result<Report> {
    let r = a.r.unwrap_or(10);
    let eps = positive("eps", a.eps.unwrap_or(0.5))?;
    let ntr = trials(a, 100)?;
    let stop_eta = match a.eta {
        None => None,
        Some(e) => Some(positive("eta", e)?),
    };
    let m = match load_psd(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(300), 1)?;
            let ratio = positive("ratio", a.ratio.unwrap_or(0.8))?;
            gen_psd(&SpectrumSpec::geometric(1.0, ratio, n)?, &mut problem_rng(a.seed))
        }
    };
    let n = m.rows();
    require(r <= n, || format!("--r must not exceed n = {n}, got {r}"))?;
    let lam = sym_eigen(&m)?.values;
    let spec = SpectrumSpec::new(lam.iter().map(|v| v.max(0.0)).collect())?;
    let trace = m.trace();
    require(trace > 0.0, || "matrix has zero trace".into())?;
    let tail = spec.tail_sum(r);
    let tail_eta = tail / trace;
    let k = match a.k {
        Some(k) => k,
        None if tail_eta > 0.0 => rpc_rank_needed(r, eps, tail_eta)?.min(n),
        None => r,
    };
    require(k <= n, || format!("--k must not exceed n = {n}, got {k}"))?;
    let bound = (1.0 + eps) * tail;
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let o = EntryOracle::from_dense(&m)?;
            let f = rpcholesky(&o, k, stop_eta, &mut rng)?;
            let evals = o.entry_eval_count();
            let approx = f.approximation();
            let err = m.trace() - f.f.frobenius_norm().powi(2);
            let ny = nystrom_from_pivots(&m, &f.pivots)?;
            let diff = ny.sub(&approx)?.max_abs();
            Ok((f.rank(), f.rejected.len(), err, evals, diff))
        },
        a.seed,
    )?;
    let mean_err = mean(runs.iter().map(|x| x.2));
    let mut t = Table::new(header(&[
        "n",
        "r",
        "k",
        "eps",
        "tail_eta",
        "rank",
        "rejected",
        "trace_err",
        "mean_trace_err",
        "bound",
        "entry_evals",
        "expected_evals",
        "nystrom_diff",
    ]));
    for (i, (rank, rej, err, evals, diff)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            n.into(),
            r.into(),
            k.into(),
            eps.into(),
            tail_eta.into(),
            (*rank).into(),
            (*rej).into(),
            (*err).into(),
            mean_err.into(),
            bound.into(),
            (*evals as usize).into(),
            ((rank + 1 + rej) * n).into(),
            (*diff).into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn row_sampling(a: &ExperimentArgs) -> Result<RowSampling> {
    match a.sampling.as_deref() {
        None | Some("weighted") => Ok(RowSampling::Weighted),
        Some("uniform") => Ok(RowSampling::Uniform),
        Some(o) => Err(invalid(format!("unknown --sampling '{o}' (weighted, uniform)"))),
    }
}

fn kaczmarz(a: &ExperimentArgs) -> Result<Report> {
    let steps = a.t.unwrap_or(200);
    let ntr = trials(a, 500)?;
    let sampling = row_sampling(a)?;
    let mut prng = problem_rng(a.seed);
    let am = match load_matrix(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(50), 1)?;
            let d = at_least("d", a.d.unwrap_or(5), 1)?;
            prng.normal_matrix(n, d)
        }
    };
    let (n, d) = am.shape();
    let x_star = prng.normal_vec(d);
    let b = am.matvec(&x_star);
    let p = LsProblem::new(am, b)?;
    let rate = match sampling {
        RowSampling::Weighted => kaczmarz_rate(&p.a),
        RowSampling::Uniform => uniform_kaczmarz_rate(&p.a),
    };
    let x0 = vec![0.0; d];
    let e0 = norm2(&x_star).powi(2);
    let runs = par_trials(
        ntr,
        |_, mut rng| Ok(rand_kaczmarz(&p, &x0, steps, sampling, Some(&x_star), &mut rng)?.errors),
        a.seed,
    )?;
    let mean_err: Vec<f64> = (0..=steps).map(|t| mean(runs.iter().map(|r| r[t]))).collect();
    let mut tab = Table::new(header(&["n", "d", "t", "err_sq", "mean_err_sq", "bound"]));
    for (i, errs) in runs.iter().enumerate() {
        for t in 0..=steps {
            let mut row = meta(a.seed, i);
            let bound = if rate < 1.0 { Some(rate.powi(t as i32) * e0) } else { None };
            row.extend([n.into(), d.into(), t.into(), errs[t].into(), mean_err[t].into(), bound.into()]);
            tab.push(row);
        }
    }
    Ok(report(tab))
}

/// Synthetic overdetermined problem: `A` Gaussian (or with a log-spaced
/// spectrum when `--cond` is given) and a Gaussian right-hand side.
fn ls_problem(a: &ExperimentArgs, n_def: usize, d_def: usize) -> Result<LsProblem> {
    let mut prng = problem_rng(a.seed);
    let am = match load_matrix(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(n_def), 1)?;
            let d = at_least("d", a.d.unwrap_or(d_def), 1)?;
            require(d <= n, || format!("--d must not exceed --n, got n={n}, d={d}"))?;
            match a.cond {
                None => prng.normal_matrix(n, d),
                Some(c) => {
                    require(c.is_finite() && c >= 1.0, || format!("--cond must be at least 1, got {c}"))?;
                    gen_with_singular_values(n, d, &SpectrumSpec::logspace(1.0, 1.0 / c, d)?, &mut prng)?
                }
            }
        }
    };
    let b = prng.normal_vec(am.rows());
    Ok(LsProblem::new(am, b)?)
}

fn embed_dim(a: &ExperimentArgs, def: usize, n: usize) -> Result<usize> {
    let s = at_least("s", a.s.unwrap_or(def.min(n)), 1)?;
    require(s <= n, || format!("--s must not exceed n = {n}, got {s}"))?;
    Ok(s)
}

fn sketch_ls(a: &ExperimentArgs) -> Result<Report> {
    let p = ls_problem(a, 200, 3)?;
    let (n, d) = p.a.shape();
    let s = embed_dim(a, 64, n)?;
    let kind = embedding_kind(a, EmbeddingKind::Gaussian)?;
    let ntr = trials(a, 100)?;
    let opt = p.residual_norm(&p.solve_dense());
    let mut ab = p.a.clone();
    ab = DenseMatrix::from_fn(n, d + 1, |i, j| if j < d { ab.get(i, j) } else { p.b[i] });
    let u = orth(&ab, ORTH_TOL);
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let e = build(kind, s, n, a.zeta, &mut rng)?;
            let eps = distortion(&e, &u)?;
            let sol = sketch_solve_ls(&p, &e)?;
            Ok((eps, sol.residual / opt))
        },
        a.seed,
    )?;
    let mut t = Table::new(header(&["kind", "n", "d", "s", "eps", "residual_ratio", "bound"]));
    for (i, (eps, ratio)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        let bound = if *eps < 1.0 { Some(distortion_ratio(*eps)) } else { None };
        row.extend([
            kind.to_string().as_str().into(),
            n.into(),
            d.into(),
            s.into(),
            (*eps).into(),
            (*ratio).into(),
            bound.into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn iter_sketch(a: &ExperimentArgs) -> Result<Report> {
    let p = ls_problem(a, 300, 10)?;
    let (n, d) = p.a.shape();
    let s = embed_dim(a, 200, n)?;
    let steps = a.t.unwrap_or(40);
    let tol = positive("tol", a.tol.unwrap_or(1e-8))?;
    let kind = embedding_kind(a, EmbeddingKind::Srtt)?;
    let ntr = trials(a, 20)?;
    let x_star = p.solve_dense();
    let xn = norm2(&x_star);
    let opt = p.residual_norm(&x_star);
    let u = orth(&p.a, ORTH_TOL);
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let e = build(kind, s, n, a.zeta, &mut rng)?;
            let eps = distortion(&e, &u)?;
            let it = iterative_sketch_ls(&p, &e, steps)?;
            let errs: Vec<f64> = it
                .iterates
                .iter()
                .map(|x| norm2(&x.iter().zip(&x_star).map(|(u, v)| u - v).collect::<Vec<_>>()) / xn)
                .collect();
            Ok((eps, errs, it.residuals, it.diverged))
        },
        a.seed,
    )?;
    let mut tab = Table::new(header(&[
        "kind",
        "n",
        "d",
        "s",
        "eps",
        "contraction",
        "t",
        "rel_x_err",
        "residual",
        "optimal_residual",
        "diverged",
    ]));
    let mut not_converged = false;
    for (i, (eps, errs, res, div)) in runs.iter().enumerate() {
        // Spectral radius of I − (AᵀΦᵀΦA)⁻¹AᵀA when σ(ΦU) ⊂ [1−ε, 1+ε].
        let contraction = if *eps < 1.0 {
            Some((1.0 - (1.0 + eps).powi(-2)).max((1.0 - eps).powi(-2) - 1.0))
        } else {
            None
        };
        if *div || errs.last().is_none_or(|e| *e > tol) {
            not_converged = true;
        }
        for (t, (e, r)) in errs.iter().zip(res).enumerate() {
            let mut row = meta(a.seed, i);
            row.extend([
                kind.to_string().as_str().into(),
                n.into(),
                d.into(),
                s.into(),
                (*eps).into(),
                contraction.into(),
                t.into(),
                (*e).into(),
                (*r).into(),
                opt.into(),
                (*div).into(),
            ]);
            tab.push(row);
        }
    }
    Ok(Report { table: tab, not_converged })
}

fn whiten_cmd(a: &ExperimentArgs) -> Result<Report> {
    let mut args = a.clone();
    if args.cond.is_none() && args.matrix.is_none() {
        args.cond = Some(1e6);
    }
    let p = ls_problem(&args, 500, 20)?;
    let (n, d) = p.a.shape();
    let s = embed_dim(a, 320, n)?;
    let kind = embedding_kind(a, EmbeddingKind::Gaussian)?;
    let ntr = trials(a, 20)?;
    let sv_a = singular_values(&p.a);
    let cond_a = sv_a[0] / sv_a[d - 1];
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let e = build(kind, s, n, a.zeta, &mut rng)?;
            let wh = whiten(&p.a, &e)?;
            let sv = singular_values(&wh.whitened(&p.a));
            Ok((wh.eps, sv[0], sv[d - 1], wh.kappa_bound()))
        },
        a.seed,
    )?;
    let mut t = Table::new(header(&[
        "kind", "n", "d", "s", "cond_a", "eps", "sigma_max", "sigma_min", "kappa", "kappa_bound",
    ]));
    for (i, (eps, hi, lo, kb)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            kind.to_string().as_str().into(),
            n.into(),
            d.into(),
            s.into(),
            cond_a.into(),
            (*eps).into(),
            (*hi).into(),
            (*lo).into(),
            (hi / lo).into(),
            if kb.is_finite() { Cell::Float(*kb) } else { Cell::Empty },
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn nullspace(a: &ExperimentArgs) -> Result<Report> {
    let mut args = a.clone();
    if args.cond.is_none() && args.matrix.is_none() {
        args.cond = Some(1e3);
    }
    let p = ls_problem(&args, 200, 10)?;
    let am = &p.a;
    let (n, d) = am.shape();
    let k = a.k.unwrap_or(2);
    require(k <= d, || format!("--k must not exceed d = {d}, got {k}"))?;
    let s = embed_dim(a, 40, n)?;
    require(s >= d, || format!("--s must be at least d = {d}, got {s}"))?;
    let kind = embedding_kind(a, EmbeddingKind::Gaussian)?;
    let ntr = trials(a, 100)?;
    let sigma = singular_values(am);
    let tail: f64 = sigma[d - k..].iter().map(|x| x * x).sum();
    let u = orth(am, ORTH_TOL);
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let e = build(kind, s, n, a.zeta, &mut rng)?;
            let eps = distortion(&e, &u)?;
            let ns = approx_null_space(am, k, &e)?;
            let aw = am.matmul(&ns.w)?.frobenius_norm().powi(2);
            let viol = ns
                .sketched_singular_values
                .iter()
                .zip(&sigma)
                .map(|(ss, s)| ((1.0 - eps) * s - ss).max(ss - (1.0 + eps) * s))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((eps, aw, viol))
        },
        a.seed,
    )?;
    let mut t = Table::new(header(&[
        "kind",
        "n",
        "d",
        "k",
        "s",
        "eps",
        "aw_fro2",
        "tail",
        "bound",
        "squared_ratio_bound",
        "singular_value_violation",
    ]));
    for (i, (eps, aw, viol)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        let ratio = if *eps < 1.0 { Some(distortion_ratio(*eps)) } else { None };
        row.extend([
            kind.to_string().as_str().into(),
            n.into(),
            d.into(),
            k.into(),
            s.into(),
            (*eps).into(),
            (*aw).into(),
            tail.into(),
            ratio.map(|q| q * tail).into(),
            ratio.map(|q| q * q * tail).into(),
            (*viol).into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn precond_cg(a: &ExperimentArgs) -> Result<Report> {
    let k = a.k.unwrap_or(50);
    let mu = positive("mu", a.mu.unwrap_or(1e-3))?;
    let tol = positive("tol", a.tol.unwrap_or(1e-8))?;
    let maxit = at_least("maxit", a.maxit.unwrap_or(1000), 1)?;
    let ntr = trials(a, 10)?;
    let m = match load_psd(a)? {
        Some(m) => m,
        None => {
            let n = at_least("n", a.n.unwrap_or(500), 1)?;
            let ratio = positive("ratio", a.ratio.unwrap_or(0.5))?;
            gen_psd(&SpectrumSpec::geometric(ratio, ratio, n)?, &mut problem_rng(a.seed))
        }
    };
    let n = m.rows();
    require(k <= n, || format!("--k must not exceed n = {n}, got {k}"))?;
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let b = rng.normal_vec(n);
            let o = EntryOracle::from_dense(&m)?;
            let pc = build_preconditioner(&o, k, mu, &mut rng)?;
            let pcg = pcg_solve(&m, &b, mu, &pc, tol, maxit)?;
            let cg = pcg_solve(&m, &b, mu, &IdentityPreconditioner, tol, maxit)?;
            Ok((pcg, cg))
        },
        a.seed,
    )?;
    let mut t = Table::new(header(&[
        "n",
        "k",
        "mu",
        "tol",
        "pcg_iters",
        "cg_iters",
        "iter_ratio",
        "pcg_residual",
        "cg_residual",
        "pcg_converged",
        "cg_converged",
    ]));
    let mut not_converged = false;
    for (i, (pcg, cg)) in runs.iter().enumerate() {
        not_converged |= !pcg.converged || !cg.converged;
        let mut row = meta(a.seed, i);
        row.extend([
            n.into(),
            k.into(),
            mu.into(),
            tol.into(),
            pcg.iterations.into(),
            cg.iterations.into(),
            (pcg.iterations as f64 / cg.iterations.max(1) as f64).into(),
            pcg.residuals.last().copied().into(),
            cg.residuals.last().copied().into(),
            pcg.converged.into(),
            cg.converged.into(),
        ]);
        t.push(row);
    }
    Ok(Report { table: t, not_converged })
}

fn embed_check(a: &ExperimentArgs) -> Result<Report> {
    let kind = embedding_kind(a, EmbeddingKind::Srtt)?;
    let ntr = trials(a, 100)?;
    let u = match load_matrix(a)? {
        Some(m) => orth(&m, ORTH_TOL),
        None => {
            let n = at_least("n", a.n.unwrap_or(256), 1)?;
            let d = at_least("d", a.d.unwrap_or(8), 1)?;
            require(d <= n, || format!("--d must not exceed --n, got n={n}, d={d}"))?;
            haar_frame(n, d, &mut problem_rng(a.seed))
        }
    };
    let (n, d) = u.shape();
    let s = embed_dim(a, 64, n)?;
    let eps = par_trials(
        ntr,
        |_, mut rng| Ok(distortion(&build(kind, s, n, a.zeta, &mut rng)?, &u)?),
        a.seed,
    )?;
    let mut sorted = eps.clone();
    sorted.sort_by(f64::total_cmp);
    let (q50, q90, max) = (quantile(&sorted, 0.5), quantile(&sorted, 0.9), sorted[sorted.len() - 1]);
    let reference = if kind == EmbeddingKind::Gaussian { Some((d as f64 / s as f64).sqrt()) } else { None };
    let mut t = Table::new(header(&[
        "kind", "n", "d", "s", "eps", "eps_q50", "eps_q90", "eps_max", "sqrt_d_over_s",
    ]));
    for (i, e) in eps.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([
            kind.to_string().as_str().into(),
            n.into(),
            d.into(),
            s.into(),
            (*e).into(),
            q50.into(),
            q90.into(),
            max.into(),
            reference.into(),
        ]);
        t.push(row);
    }
    Ok(report(t))
}

fn jointdiag(a: &ExperimentArgs) -> Result<Report> {
    require(a.matrix.is_none(), || "jointdiag generates its own commuting pair; --matrix is not supported".to_string())?;
    let n = at_least("n", a.n.unwrap_or(10), 1)?;
    let noise = a.eps.unwrap_or(0.0);
    require(noise.is_finite() && noise >= 0.0, || format!("--eps must be nonnegative, got {noise}"))?;
    let ntr = trials(a, 100)?;
    let runs = par_trials(
        ntr,
        |_, mut rng| {
            let q = haar_orthogonal(n, &mut rng);
            let l1 = rng.normal_vec(n);
            let l2 = rng.normal_vec(n);
            let am = psd_from_basis(&q, &l1);
            let mut bm = psd_from_basis(&q, &l2);
            if noise > 0.0 {
                let g = rng.normal_matrix(n, n).symmetrize().scale(noise);
                bm = bm.add(&g)?;
            }
            let comm = am.matmul(&bm)?.sub(&bm.matmul(&am)?)?.frobenius_norm();
            let jd = joint_diagonalize(&am, &bm, &mut rng)?;
            Ok((comm, jd.off_a, jd.off_b))
        },
        a.seed,
    )?;
    let mut t = Table::new(header(&["n", "noise", "commutator_fro", "off_a", "off_b"]));
    for (i, (c, oa, ob)) in runs.iter().enumerate() {
        let mut row = meta(a.seed, i);
        row.extend([n.into(), noise.into(), (*c).into(), (*oa).into(), (*ob).into()]);
        t.push(row);
    }
    Ok(report(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_are_distinct() {
        let ids: std::collections::HashSet<u64> = (0..100).map(|i| trial_rng(3, i).stream_id()).collect();
        assert_eq!(ids.len(), 100);
        assert!(!ids.contains(&PROBLEM_STREAM));
    }

    #[test]
    fn rejects_bad_intdim() {
        let a = ExperimentArgs { n: Some(4), intdim: Some(10.0), trials: Some(2), ..Default::default() };
        assert!(matches!(trace(&a), Err(BenchError::Validation(_))));
    }

    #[test]
    fn power_rows_per_step() {
        let a = ExperimentArgs { t: Some(3), trials: Some(2), ..Default::default() };
        let r = power(&a).unwrap();
        assert_eq!(r.table.rows.len(), 8);
    }
}
