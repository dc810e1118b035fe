//! Beamformer with a cap on expected leakage:
//! `max w^H U w` subject to `w^H U_bar w <= gamma`, `||w||^2 <= P` and,
//! optionally, `|w_n|^2 <= u_n`, through its SDP relaxation.

use rand::Rng;

use super::sdp::{purify_rank, solve_sdp, SdpProblem};
use super::SolverSettings;
use crate::channel::complex_gaussian_vector;
use crate::error::{Result, SolverError};
use crate::linalg::{column, hermitian_eig, top_eigenpair, ComplexMatrix, ComplexVector, HermitianMatrix, C64};

/// How the beamformer was obtained from the relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamExtraction {
    /// Eigenvector problem, no SDP needed.
    Eigen,
    /// Principal eigenvector of a rank-one SDP solution.
    Direct,
    /// Principal eigenvector after rank reduction of a degenerate solution.
    Purified,
    /// Best of the Gaussian randomization draws.
    Randomized,
    /// No feasible nonzero beamformer (every antenna out of headroom).
    Empty,
}

#[derive(Clone, Debug)]
pub struct LeakageBeam {
    pub w: ComplexVector,
    /// Optimal value of the relaxation, an upper bound on `w^H U w`.
    pub upper_bound: f64,
    /// `w^H U w`.
    pub value: f64,
    pub rank_indicator: f64,
    pub extraction: BeamExtraction,
}

// caps below this fraction of the power budget are treated as zero
const NEGLIGIBLE: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Exact,
    PerAntenna,
}

/// Orthonormal basis of `{x in span(V) : x_n = 0 for n in rows}`.
fn restrict_rows(v: &ComplexMatrix, rows: &[usize]) -> ComplexMatrix {
    if rows.is_empty() || v.ncols() == 0 {
        return v.clone();
    }
    let d = v.ncols();
    let mut r = ComplexMatrix::zeros(rows.len(), d);
    for (i, &n) in rows.iter().enumerate() {
        r.set_row(i, &v.row(n));
    }
    let gram = HermitianMatrix::hermitian_part(&(r.adjoint() * &r));
    let (evals, evecs) = hermitian_eig(&gram);
    let scale = evals[0].max(1.0);
    let null: Vec<usize> = (0..d).filter(|&i| evals[i] <= 1e-12 * scale).collect();
    let mut basis = ComplexMatrix::zeros(v.nrows(), null.len());
    for (c, &i) in null.iter().enumerate() {
        let col = v * evecs.column(i);
        basis.set_column(c, &col);
    }
    basis
}

/// Eigenvectors of `m` with eigenvalues at most `tol` times the largest.
fn low_eigenspace(m: &HermitianMatrix, tol: f64) -> ComplexMatrix {
    let (evals, evecs) = hermitian_eig(m);
    let top = evals[0].max(0.0);
    let idx: Vec<usize> = (0..evals.len()).filter(|&i| evals[i] <= tol * top).collect();
    let mut basis = ComplexMatrix::zeros(m.dim(), idx.len());
    for (c, &i) in idx.iter().enumerate() {
        basis.set_column(c, &evecs.column(i));
    }
    basis
}

fn reduce(m: &HermitianMatrix, v: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&(v.adjoint() * m.matrix() * v))
}

#[allow(clippy::too_many_arguments)]
fn solve_core<R: Rng + ?Sized>(
    u: &HermitianMatrix,
    u_bar: &HermitianMatrix,
    gamma: f64,
    p_tilde: f64,
    headroom: Option<&[f64]>,
    mode: Mode,
    l_rand: usize,
    rng: Option<&mut R>,
    settings: &SolverSettings,
) -> Result<LeakageBeam> {
    let n = u.dim();
    if !(p_tilde > 0.0) || !gamma.is_finite() && gamma != f64::INFINITY {
        return Ok(empty(n));
    }
    let mut v = ComplexMatrix::identity(n, n);
    let ub_max = hermitian_eig(u_bar).0[0];
    // leakage constraint, if any
    let mut leak = None;
    if ub_max > 0.0 && gamma.is_finite() {
        if gamma <= NEGLIGIBLE * p_tilde * ub_max {
            v = low_eigenspace(u_bar, 1e-10);
            if gamma > 0.0 {
                leak = Some(gamma);
            }
        } else {
            leak = Some(gamma);
        }
    }
    // per-antenna caps: zero headroom pins the entry, ample headroom is moot
    let mut caps = Vec::new();
    if let Some(h) = headroom {
        assert_eq!(h.len(), n, "headroom length mismatch");
        let zero: Vec<usize> = (0..n).filter(|&i| h[i] <= NEGLIGIBLE * p_tilde).collect();
        v = restrict_rows(&v, &zero);
        for (i, &cap) in h.iter().enumerate() {
            if cap > NEGLIGIBLE * p_tilde && cap < p_tilde {
                caps.push((i, cap));
            }
        }
    }
    let d = v.ncols();
    if d == 0 {
        log::warn!("no admissible beam direction; returning the zero beamformer");
        return Ok(empty(n));
    }

    let c = reduce(u, &v);
    let mut constraints = vec![(HermitianMatrix::identity(d), p_tilde)];
    if let Some(g) = leak {
        constraints.push((reduce(u_bar, &v), g));
    }
    for &(i, cap) in &caps {
        let row: ComplexVector = v.row(i).adjoint();
        constraints.push((HermitianMatrix::outer(&row), cap));
    }

    if constraints.len() == 1 {
        let (lam, x) = top_eigenpair(&c);
        let w = &v * x * C64::new(p_tilde.sqrt(), 0.0);
        return Ok(LeakageBeam {
            value: u.quad_form(&w),
            w,
            upper_bound: p_tilde * lam,
            rank_indicator: 0.0,
            extraction: BeamExtraction::Eigen,
        });
    }

    let problem = SdpProblem {
        dim: d,
        objective: c.clone(),
        constraints: constraints.clone(),
        element_caps: Vec::new(),
    };
    let sol = solve_sdp(&problem, settings)?;
    let upper_bound = sol.objective_value;
    let mut rank = sol.rank_indicator;
    let (x, extraction) = if rank <= settings.rank_tol {
        (principal(&sol.q), BeamExtraction::Direct)
    } else {
        match mode {
            Mode::Exact => {
                let q = purify_rank(&sol.q, &c, &constraints);
                rank = rank_of(&q);
                if rank > settings.rank_error_tol {
                    return Err(SolverError::UnexpectedRank { ratio: rank }.into());
                }
                (principal(&q), BeamExtraction::Purified)
            }
            Mode::PerAntenna => {
                let rng = rng.expect("randomization needs a generator");
                let (x, _) = randomize_rank_one(&sol.q, &c, &constraints, l_rand, rng);
                (x, BeamExtraction::Randomized)
            }
        }
    };
    let w = &v * x;
    Ok(LeakageBeam {
        value: u.quad_form(&w),
        w,
        upper_bound,
        rank_indicator: rank,
        extraction,
    })
}

fn empty(n: usize) -> LeakageBeam {
    LeakageBeam {
        w: ComplexVector::zeros(n),
        upper_bound: 0.0,
        value: 0.0,
        rank_indicator: 0.0,
        extraction: BeamExtraction::Empty,
    }
}

fn rank_of(q: &HermitianMatrix) -> f64 {
    let (e, _) = hermitian_eig(q);
    if e.len() < 2 || e[0] <= 0.0 {
        0.0
    } else {
        (e[1] / e[0]).max(0.0)
    }
}

/// `sqrt(lambda_1) v_1`. Feasible whenever `q` is, for PSD constraint
/// matrices, since `lambda_1 v_1 v_1^H <= q`.
fn principal(q: &HermitianMatrix) -> ComplexVector {
    let (lam, v) = top_eigenpair(q);
    v * C64::new(lam.max(0.0).sqrt(), 0.0)
}

/// Leakage-constrained beamformer under a total power cap. Ties in the
/// optimal face are broken by rank reduction; a remaining rank indicator
/// above `settings.rank_error_tol` is reported as an error.
pub fn solve_leakage_constrained(
    u: &HermitianMatrix,
    u_bar: &HermitianMatrix,
    gamma: f64,
    p_tilde: f64,
    settings: &SolverSettings,
) -> Result<LeakageBeam> {
    solve_core::<rand_chacha::ChaCha12Rng>(u, u_bar, gamma, p_tilde, None, Mode::Exact, 0, None, settings)
}

/// Leakage-constrained beamformer under total and per-antenna caps. A
/// rank-one relaxation is used directly; otherwise the best of `l_rand`
/// Gaussian draws is returned.
#[allow(clippy::too_many_arguments)]
pub fn solve_leakage_constrained_pa<R: Rng + ?Sized>(
    u: &HermitianMatrix,
    u_bar: &HermitianMatrix,
    gamma: f64,
    p_tilde: f64,
    headroom: &[f64],
    l_rand: usize,
    rng: &mut R,
    settings: &SolverSettings,
) -> Result<LeakageBeam> {
    solve_core(u, u_bar, gamma, p_tilde, Some(headroom), Mode::PerAntenna, l_rand, Some(rng), settings)
}

/// Draw `q ~ CN(0, Q*)` `l_rand` times, scale each draw by
/// `min_i sqrt(b_i / q^H A_i q)` so that it meets every constraint with the
/// tightest one active, and keep the draw with the largest `q^H C q`
/// (earliest on ties). Returns the vector and its objective value.
pub fn randomize_rank_one<R: Rng + ?Sized>(
    q_star: &HermitianMatrix,
    objective: &HermitianMatrix,
    constraints: &[(HermitianMatrix, f64)],
    l_rand: usize,
    rng: &mut R,
) -> (ComplexVector, f64) {
    let d = q_star.dim();
    let (evals, evecs) = hermitian_eig(q_star);
    if evals[0] <= 0.0 {
        return (ComplexVector::zeros(d), 0.0);
    }
    let mut root = ComplexMatrix::zeros(d, d);
    for (i, &e) in evals.iter().enumerate() {
        if e > 1e-12 * evals[0] {
            let col = column(&evecs, i);
            root += &col * col.adjoint() * C64::new(e.sqrt(), 0.0);
        }
    }
    let mut best = ComplexVector::zeros(d);
    let mut best_value = f64::NEG_INFINITY;
    for _ in 0..l_rand {
        let z = complex_gaussian_vector(d, rng);
        let q = &root * z;
        let mut rho = f64::INFINITY;
        for (a, b) in constraints {
            let load = a.quad_form(&q);
            if load > 0.0 {
                rho = rho.min((b.max(0.0) / load).sqrt());
            }
        }
        if !rho.is_finite() {
            continue;
        }
        let q = q * C64::new(rho, 0.0);
        let value = objective.quad_form(&q);
        if value > best_value {
            best_value = value;
            best = q;
        }
    }
    (best, best_value.max(0.0))
}
