//! Primal log-barrier Newton method for problems over a product of
//! Hermitian PSD cones and a real vector.
//!
//! Variables are stacked as `[vec(X_1), ..., vec(X_p), y]`, with each
//! Hermitian block vectorized in the orthonormal basis `E_ii`,
//! `(E_ij + E_ji)/sqrt(2)`, `i(E_ij - E_ji)/sqrt(2)`, so that
//! `Re tr(XY) = vec(X) . vec(Y)`. Each Newton step is taken in coordinates
//! scaled by the Cholesky factors of the current blocks, where the
//! log-determinant Hessian is the identity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SolverSettings;
use crate::error::SolverError;
use crate::linalg::{cholesky_lower, ComplexMatrix};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Value, gradient and (optional, zero if absent) Hessian of a smooth
/// function of the stacked variable.
#[derive(Clone, Debug)]
pub struct Smooth {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: Option<DMatrix<f64>>,
}

/// Convex problem `min f_0(x)` subject to `f_i(x) <= 0` and each Hermitian
/// block PSD.
pub trait BarrierProblem {
    /// Dimensions of the Hermitian blocks.
    fn blocks(&self) -> Vec<usize>;
    /// Length of the trailing real part.
    fn reals(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn objective(&self, x: &DVector<f64>) -> Smooth;
    fn constraint(&self, i: usize, x: &DVector<f64>) -> Smooth;
    fn objective_value(&self, x: &DVector<f64>) -> f64 {
        self.objective(x).value
    }
    fn constraint_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.constraint(i, x).value
    }
}

#[derive(Clone, Debug)]
pub struct BarrierResult {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Dual multipliers `1 / (t (-f_i))`.
    pub multipliers: Vec<f64>,
    /// Multipliers from the centered iterates once the gap is small, in order of increasing `t`.
    pub multiplier_trace: Vec<Vec<f64>>,
    /// Barrier parameter at exit.
    pub t: f64,
    /// Duality-gap bound `theta / t`.
    pub gap_bound: f64,
    pub newton_steps: usize,
}

pub fn herm_len(d: usize) -> usize {
    d * d
}

/// Vectorize the Hermitian part of `m`.
pub fn herm_to_vec(m: &ComplexMatrix, out: &mut [f64]) {
    let d = m.nrows();
    let mut p = 0;
    for i in 0..d {
        out[p] = m[(i, i)].re;
        p += 1;
        for j in (i + 1)..d {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[p] = std::f64::consts::SQRT_2 * z.re;
            out[p + 1] = std::f64::consts::SQRT_2 * z.im;
            p += 2;
        }
    }
}

pub fn vec_to_herm(v: &[f64], d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    let mut p = 0;
    for i in 0..d {
        m[(i, i)] = Complex64::new(v[p], 0.0);
        p += 1;
        for j in (i + 1)..d {
            let z = Complex64::new(v[p], v[p + 1]) * SQRT_HALF;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            p += 2;
        }
    }
    m
}

/// Vectorized identity matrix.
pub fn vec_identity(d: usize, out: &mut [f64]) {
    let mut p = 0;
    for i in 0..d {
        out[p] = 1.0;
        p += 1;
        for _ in (i + 1)..d {
            out[p] = 0.0;
            out[p + 1] = 0.0;
            p += 2;
        }
    }
}

fn basis_matrix(d: usize, a: usize) -> ComplexMatrix {
    let mut v = vec![0.0; herm_len(d)];
    v[a] = 1.0;
    vec_to_herm(&v, d)
}

struct Layout {
    blocks: Vec<(usize, usize)>,
    len: usize,
}

impl Layout {
    fn new(problem: &dyn BarrierProblem) -> Self {
        let mut off = 0;
        let mut blocks = Vec::new();
        for d in problem.blocks() {
            blocks.push((off, d));
            off += herm_len(d);
        }
        Layout {
            blocks,
            len: off + problem.reals(),
        }
    }

    fn block_end(&self) -> usize {
        self.blocks.last().map(|&(o, d)| o + herm_len(d)).unwrap_or(0)
    }

    fn theta(&self, m: usize) -> f64 {
        (m + self.blocks.iter().map(|b| b.1).sum::<usize>()) as f64
    }
}

/// Complex Cholesky factor of a Hermitian block, or `None` if not PD.
fn cholesky(m: ComplexMatrix) -> Option<ComplexMatrix> {
    cholesky_lower(&m)
}

fn block_logdet(layout: &Layout, x: &DVector<f64>) -> Option<(f64, Vec<ComplexMatrix>)> {
    let mut total = 0.0;
    let mut factors = Vec::with_capacity(layout.blocks.len());
    for &(off, d) in &layout.blocks {
        let m = vec_to_herm(&x.as_slice()[off..off + herm_len(d)], d);
        let l = cholesky(m)?;
        for i in 0..d {
            let v = l[(i, i)].re;
            if !(v > 0.0) || !v.is_finite() {
                return None;
            }
            total += 2.0 * v.ln();
        }
        factors.push(l);
    }
    Some((total, factors))
}

/// Barrier function `t f_0 - sum ln(-f_i) - sum ln det X_b`, or `None`
/// outside the domain.
fn merit(problem: &dyn BarrierProblem, layout: &Layout, x: &DVector<f64>, t: f64) -> Option<f64> {
    let (logdet, _) = block_logdet(layout, x)?;
    let mut v = t * problem.objective_value(x) - logdet;
    for i in 0..problem.num_constraints() {
        let f = problem.constraint_value(i, x);
        if !(f < 0.0) {
            return None;
        }
        v -= (-f).ln();
    }
    v.is_finite().then_some(v)
}

fn scaling_matrix(layout: &Layout, factors: &[ComplexMatrix]) -> DMatrix<f64> {
    let mut tm = DMatrix::zeros(layout.len, layout.len);
    let mut col = vec![0.0; 0];
    for (&(off, d), l) in layout.blocks.iter().zip(factors) {
        let n = herm_len(d);
        col.resize(n, 0.0);
        for a in 0..n {
            let b = basis_matrix(d, a);
            let s = l * b * l.adjoint();
            herm_to_vec(&s, &mut col);
            for r in 0..n {
                tm[(off + r, off + a)] = col[r];
            }
        }
    }
    for r in layout.block_end()..layout.len {
        tm[(r, r)] = 1.0;
    }
    tm
}

/// Newton direction for the barrier at `x` and parameter `t`.
struct NewtonStep {
    dx: DVector<f64>,
    decrement: f64,
    slacks: DVector<f64>,
    rows: DMatrix<f64>,
}

fn newton_step(
    problem: &dyn BarrierProblem,
    layout: &Layout,
    block_mask: &[f64],
    x: &DVector<f64>,
    t: f64,
) -> Option<NewtonStep> {
    let m = problem.num_constraints();
    let (_, factors) = block_logdet(layout, x)?;
    let obj = problem.objective(x);
    let mut g = obj.grad.clone() * t;
    let mut h0 = match &obj.hess {
        Some(hs) => hs * t,
        None => DMatrix::zeros(layout.len, layout.len),
    };
    let mut rows = DMatrix::zeros(m, layout.len);
    let mut slacks = DVector::zeros(m);
    for i in 0..m {
        let c = problem.constraint(i, x);
        let s = -c.value;
        g += &c.grad / s;
        rows.set_row(i, &c.grad.transpose());
        slacks[i] = s;
        if let Some(hs) = &c.hess {
            h0 += hs / s;
        }
    }
    let tm = scaling_matrix(layout, &factors);
    let mut gs = tm.transpose() * g;
    let mut h0s = tm.transpose() * h0 * &tm;
    for (r, &mask) in block_mask.iter().enumerate() {
        gs[r] -= mask;
        h0s[(r, r)] += 1.0;
    }
    let rows_s = &rows * &tm;
    let step = solve_newton(&h0s, &rows_s, &slacks, &gs)?;
    Some(NewtonStep {
        decrement: -gs.dot(&step),
        dx: tm * step,
        slacks,
        rows,
    })
}

/// Dual estimate `(1 + ∇f_i·Δx / s_i) / (t s_i)`, exact for the local quadratic model.
fn corrected_multipliers(step: &NewtonStep, t: f64) -> Vec<f64> {
    let moved = &step.rows * &step.dx;
    (0..step.slacks.len())
        .map(|i| {
            let s = step.slacks[i];
            (1.0 / (t * s)) * (1.0 + moved[i] / s).max(0.0)
        })
        .collect()
}

// multipliers are recorded once the gap is below this relative level
const MULTIPLIER_GAP: f64 = 1e-6;

/// Minimize from a strictly feasible `x0`.
pub fn solve_barrier(
    problem: &dyn BarrierProblem,
    x0: DVector<f64>,
    settings: &SolverSettings,
) -> Result<BarrierResult, SolverError> {
    let layout = Layout::new(problem);
    assert_eq!(x0.len(), layout.len, "starting point has the wrong length");
    let m = problem.num_constraints();
    let theta = layout.theta(m);
    let mut x = x0;
    if merit(problem, &layout, &x, 1.0).is_none() {
        return Err(SolverError::NoInterior);
    }
    let f_start = problem.objective_value(&x);
    let mut newton_steps = 0;
    let mut block_mask = vec![0.0; layout.block_end()];
    for &(off, d) in &layout.blocks {
        vec_identity(d, &mut block_mask[off..off + herm_len(d)]);
    }
    // t minimizing the H⁻¹-norm of the centering gradient at x0
    let fitted = newton_step(problem, &layout, &block_mask, &x, 0.0)
        .zip(newton_step(problem, &layout, &block_mask, &x, 1.0))
        .map(|(s0, s1)| {
            let grad = problem.objective(&x).grad;
            let curvature = -grad.dot(&(s1.dx - &s0.dx));
            grad.dot(&s0.dx) / curvature
        })
        .filter(|t| t.is_finite() && *t > 0.0);
    // otherwise stay well below theta/|f0|: damped Newton costs about t (f0 - f*) steps
    let mut t = fitted
        .unwrap_or(1e-3 * theta / f_start.abs().max(1e-6))
        .clamp(1e-6, 1e6);
    let unbounded_level = 1e14 * (1.0 + f_start.abs());
    let mut multiplier_trace = Vec::new();
    let mut multipliers;

    loop {
        // centering
        let mut decrement = f64::INFINITY;
        let mut stalls = 0;
        loop {
            if newton_steps >= settings.max_newton {
                return Err(SolverError::NotConverged {
                    iterations: newton_steps,
                    gap: theta / t,
                    decrement,
                });
            }
            let step = newton_step(problem, &layout, &block_mask, &x, t).ok_or(SolverError::NotConverged {
                iterations: newton_steps,
                gap: theta / t,
                decrement,
            })?;
            decrement = step.decrement;
            newton_steps += 1;
            if decrement < 0.0 || decrement / 2.0 <= 1e-10 {
                break;
            }
            let dx = step.dx;
            if decrement < 0.1 {
                // quadratic region: full step, no merit comparison
                let trial = &x + &dx;
                if merit(problem, &layout, &trial, t).is_some() {
                    x = trial;
                    stalls += 1;
                    if stalls > 8 {
                        break;
                    }
                    continue;
                }
            }
            let phi0 = merit(problem, &layout, &x, t).ok_or(SolverError::NoInterior)?;
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &x + &dx * s;
                if let Some(phi) = merit(problem, &layout, &trial, t) {
                    if phi <= phi0 - 0.01 * s * decrement {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted || s < 1e-12 {
                break;
            }
            if problem.objective_value(&x) < -unbounded_level || x.amax() > 1e14 {
                return Err(SolverError::Unbounded);
            }
        }
        let f = problem.objective_value(&x);
        let step = newton_step(problem, &layout, &block_mask, &x, t).ok_or(SolverError::NotConverged {
            iterations: newton_steps,
            gap: theta / t,
            decrement,
        })?;
        multipliers = corrected_multipliers(&step, t);
        if theta / t <= (MULTIPLIER_GAP * f.abs()).max(settings.barrier_floor) {
            multiplier_trace.push(multipliers.clone());
        }
        let target = (settings.barrier_gap * f.abs()).max(settings.barrier_floor);
        if theta / t <= target {
            break;
        }
        t *= settings.barrier_mu;
    }

    if multiplier_trace.is_empty() {
        multiplier_trace.push(multipliers.clone());
    }
    Ok(BarrierResult {
        objective: problem.objective_value(&x),
        x,
        multipliers,
        multiplier_trace,
        t,
        gap_bound: theta / t,
        newton_steps,
    })
}

/// Solve `(h0 + Σ r_i r_i^T / s_i²) dx = -g` on the Jacobi-equilibrated
/// matrix, with iterative refinement.
fn solve_newton(
    h0: &DMatrix<f64>,
    rows: &DMatrix<f64>,
    slacks: &DVector<f64>,
    g: &DVector<f64>,
) -> Option<DVector<f64>> {
    let mut h = h0.clone();
    for i in 0..slacks.len() {
        let r = rows.row(i).transpose();
        h.ger(1.0 / (slacks[i] * slacks[i]), &r, &r, 1.0);
    }
    let ch = jacobi_cholesky(&h).or_else(|| regularized_cholesky(&h))?;
    let rhs = -g;
    let mut step = ch.solve(&rhs);
    for _ in 0..2 {
        let res = &rhs - &h * &step;
        step += ch.solve(&res);
    }

    step.iter().all(|v| v.is_finite()).then_some(step)
}

struct ScaledCholesky {
    d: DVector<f64>,
    ch: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl ScaledCholesky {
    fn solve<C: nalgebra::Dim, S: nalgebra::storage::Storage<f64, nalgebra::Dyn, C>>(
        &self,
        b: &nalgebra::Matrix<f64, nalgebra::Dyn, C, S>,
    ) -> nalgebra::OMatrix<f64, nalgebra::Dyn, C> {
        let mut x = b.clone_owned();
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row *= self.d[i];
        }
        let mut x = self.ch.solve(&x);
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row *= self.d[i];
        }
        x
    }
}

/// Cholesky of `D h D` with `D = diag(h)^{-1/2}`; fails unless `h` is positive definite.
fn jacobi_cholesky(h: &DMatrix<f64>) -> Option<ScaledCholesky> {
    let n = h.nrows();
    let d = DVector::from_fn(n, |i, _| h[(i, i)]);
    if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let d = d.map(|v| 1.0 / v.sqrt());
    let scaled = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * d[i] * d[j]);
    let ch = scaled.cholesky()?;
    if ch.l_dirty().diagonal().iter().any(|&v| !(v > 1e-7)) {
        return None;
    }
    Some(ScaledCholesky { d, ch })
}

fn regularized_cholesky(h: &DMatrix<f64>) -> Option<ScaledCholesky> {
    let n = h.nrows();
    let d = DVector::from_fn(n, |i, _| 1.0 / h[(i, i)].abs().max(1e-300).sqrt());
    let scaled = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * d[i] * d[j]);
    let mut reg = 0.0;
    for _ in 0..8 {
        let mut hr = scaled.clone();
        for i in 0..n {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = hr.cholesky() {
            return Some(ScaledCholesky { d, ch });
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
    }
    None
}
