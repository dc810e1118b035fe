//! Zero-forcing under per-antenna power limits:
//! `max sum_k alpha_k ln(1 + |h_k q_k|^2 / N0)` with `h_j q_k = 0` for
//! `j != k` and `sum_k |q_k[n]|^2 <= P_n`, relaxed to covariances.
//!
//! The interference constraints are eliminated by writing each covariance
//! as `Q_k = G_k X_k G_k^H` with `G_k` an orthonormal basis of the null
//! space of the other users' channels.

use nalgebra::{DMatrix, DVector};

use super::barrier::{herm_len, herm_to_vec, solve_barrier, vec_identity, vec_to_herm, BarrierProblem, Smooth};
use super::SolverSettings;
use crate::error::Result;
use crate::linalg::{hermitian_eig, nullspace_basis, top_eigenpair, ComplexMatrix, ComplexVector, HermitianMatrix, C64};

#[derive(Clone, Debug)]
pub struct ZfPaSolution {
    /// Beamformers `q_k`, including power.
    pub beams: Vec<ComplexVector>,
    /// Relaxed covariances `Q_k`.
    pub covariances: Vec<HermitianMatrix>,
    /// `lambda_2 / lambda_1` per user.
    pub rank_indicators: Vec<f64>,
    /// Optimal value of the relaxation, in nats.
    pub objective: f64,
}

struct Blocks {
    d: usize,
    alpha: Vec<f64>,
    /// `vec(g_k g_k^H) / N0`
    gains: Vec<DVector<f64>>,
    /// per antenna: stacked coefficient vector
    rows: Vec<DVector<f64>>,
    caps: Vec<f64>,
}

impl Blocks {
    fn len(&self) -> usize {
        self.alpha.len() * herm_len(self.d)
    }

    fn slice<'a>(&self, x: &'a DVector<f64>, k: usize) -> &'a [f64] {
        let l = herm_len(self.d);
        &x.as_slice()[k * l..(k + 1) * l]
    }
}

impl BarrierProblem for Blocks {
    fn blocks(&self) -> Vec<usize> {
        vec![self.d; self.alpha.len()]
    }
    fn reals(&self) -> usize {
        0
    }
    fn num_constraints(&self) -> usize {
        self.rows.len()
    }
    fn objective(&self, x: &DVector<f64>) -> Smooth {
        let l = herm_len(self.d);
        let mut value = 0.0;
        let mut grad = DVector::zeros(self.len());
        let mut hess = DMatrix::zeros(self.len(), self.len());
        for (k, g) in self.gains.iter().enumerate() {
            let s: f64 = g.iter().zip(self.slice(x, k)).map(|(a, b)| a * b).sum();
            let den = 1.0 + s;
            value -= self.alpha[k] * den.ln();
            let mut gv = grad.rows_mut(k * l, l);
            gv.axpy(-self.alpha[k] / den, g, 0.0);
            let mut hv = hess.view_mut((k * l, k * l), (l, l));
            hv.ger(self.alpha[k] / (den * den), g, g, 0.0);
        }
        Smooth {
            value,
            grad,
            hess: Some(hess),
        }
    }
    fn objective_value(&self, x: &DVector<f64>) -> f64 {
        let mut value = 0.0;
        for (k, g) in self.gains.iter().enumerate() {
            let s: f64 = g.iter().zip(self.slice(x, k)).map(|(a, b)| a * b).sum();
            value -= self.alpha[k] * (1.0 + s).ln();
        }
        value
    }
    fn constraint(&self, i: usize, x: &DVector<f64>) -> Smooth {
        Smooth {
            value: self.rows[i].dot(x) - self.caps[i],
            grad: self.rows[i].clone(),
            hess: None,
        }
    }
    fn constraint_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.rows[i].dot(x) - self.caps[i]
    }
}

/// Solve the relaxation for the effective channel rows `h` (`K x N`) and
/// extract `q_k = sqrt(lambda_1) G_k x_k` from the principal eigenpair of
/// each `X_k`.
pub fn solve_zf_pa(
    h: &ComplexMatrix,
    alpha: &[f64],
    noise_power: f64,
    antenna_power: &[f64],
    settings: &SolverSettings,
) -> Result<ZfPaSolution> {
    let (k_users, n) = h.shape();
    let d = n - k_users + 1;
    let l = herm_len(d);
    let mut bases = Vec::with_capacity(k_users);
    let mut gains = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let others: Vec<usize> = (0..k_users).filter(|&j| j != k).collect();
        let mut a = ComplexMatrix::zeros(others.len(), n);
        for (r, &j) in others.iter().enumerate() {
            a.set_row(r, &h.row(j));
        }
        let g_basis = nullspace_basis(&a)?;
        let g: ComplexVector = (h.row(k) * &g_basis).adjoint();
        let mut v = DVector::zeros(l);
        herm_to_vec(HermitianMatrix::outer(&g).matrix(), v.as_mut_slice());
        gains.push(v / noise_power);
        bases.push(g_basis);
    }
    let mut rows = Vec::new();
    let mut caps = Vec::new();
    let mut buf = vec![0.0; l];
    for (ant, &cap) in antenna_power.iter().enumerate() {
        let mut row = DVector::zeros(k_users * l);
        for (k, g_basis) in bases.iter().enumerate() {
            let r: ComplexVector = g_basis.row(ant).adjoint();
            herm_to_vec(HermitianMatrix::outer(&r).matrix(), &mut buf);
            row.rows_mut(k * l, l).copy_from_slice(&buf);
        }
        if row.amax() > 0.0 {
            rows.push(row);
            caps.push(cap);
        }
    }
    let problem = Blocks {
        d,
        alpha: alpha.to_vec(),
        gains,
        rows,
        caps,
    };

    let mut x0 = DVector::zeros(problem.len());
    for k in 0..k_users {
        vec_identity(d, &mut x0.as_mut_slice()[k * l..(k + 1) * l]);
    }
    let mut eps: f64 = 1.0;
    for (row, cap) in problem.rows.iter().zip(&problem.caps) {
        let load = row.dot(&x0);
        if load > 0.0 {
            eps = eps.min(0.5 * cap / load);
        }
    }
    x0 *= eps;
    let result = solve_barrier(&problem, x0, settings)?;

    let mut beams = Vec::with_capacity(k_users);
    let mut covariances = Vec::with_capacity(k_users);
    let mut rank_indicators = Vec::with_capacity(k_users);
    for (k, g_basis) in bases.iter().enumerate() {
        let x = HermitianMatrix::hermitian_part(&vec_to_herm(problem.slice(&result.x, k), d));
        let (ev, _) = hermitian_eig(&x);
        let ratio = if ev.len() > 1 && ev[0] > 0.0 { (ev[1] / ev[0]).max(0.0) } else { 0.0 };
        if ratio > 1e-4 {
            log::warn!("ZF-PA covariance of user {k} is not rank one (ratio {ratio:.2e})");
        }
        let (lam, v) = top_eigenpair(&x);
        beams.push(g_basis * v * C64::new(lam.max(0.0).sqrt(), 0.0));
        covariances.push(HermitianMatrix::hermitian_part(&(g_basis * x.matrix() * g_basis.adjoint())));
        rank_indicators.push(ratio);
    }
    Ok(ZfPaSolution {
        beams,
        covariances,
        rank_indicators,
        objective: -result.objective,
    })
}
