//! Power allocation by successive geometric programming.
//!
//! The weighted sum of log interference-plus-noise to signal-plus-
//! interference-plus-noise ratios is minimized over the per-user powers
//! subject to leakage caps and per-antenna limits. The signal-plus-
//! interference-plus-noise posynomial is replaced by its monomial lower
//! bound at the current point, which turns each step into a convex problem
//! in `y = ln P`; the bound is refreshed until the relative power change
//! falls below `epsilon`.

use nalgebra::{DMatrix, DVector};

use super::barrier::{solve_barrier, BarrierProblem, Smooth};
use super::SolverSettings;
use crate::error::SolverError;

// powers below this fraction of the largest antenna budget count as off
const POWER_FLOOR: f64 = 1e-12;

// relative gap of each inner step; far below what the power change metric resolves
const GP_INNER_GAP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GpProblem {
    /// `lambda[j][k]`: gain of user `j`'s beam at user `k`, all positive.
    pub lambda: Vec<Vec<f64>>,
    pub noise_power: f64,
    pub alpha: Vec<f64>,
    /// Leakage caps: `P_k sum_{j != k} lambda[k][j] <= gamma[k]`.
    /// `f64::INFINITY` disables a cap.
    pub gamma: Vec<f64>,
    /// `loads[n][k] = |w_k[n]|^2` for unit-norm directions.
    pub loads: Vec<Vec<f64>>,
    /// Per-antenna limits `P_n`.
    pub antenna_power: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GpSolution {
    pub powers: Vec<f64>,
    /// Number of monomial refreshes.
    pub iterations: usize,
    /// Relative power change at exit.
    pub pd_metric: f64,
    /// Weighted log ratio objective at the start and after every refresh.
    pub objective_trace: Vec<f64>,
    /// Relative power change after every refresh.
    pub pd_trace: Vec<f64>,
}

impl GpProblem {
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// `sum_k alpha_k ln((N0 + I_k) / (N0 + S_k + I_k))`, minimized.
    pub fn objective(&self, p: &[f64]) -> f64 {
        let k_users = self.k();
        (0..k_users)
            .map(|k| {
                let interf: f64 = (0..k_users).filter(|&j| j != k).map(|j| self.lambda[j][k] * p[j]).sum();
                let signal = self.lambda[k][k] * p[k];
                self.alpha[k] * ((self.noise_power + interf).ln() - (self.noise_power + interf + signal).ln())
            })
            .sum()
    }

    /// Largest ratio of a constraint's left side to its right side.
    pub fn max_ratio(&self, p: &[f64]) -> f64 {
        let k_users = self.k();
        let mut r: f64 = 0.0;
        for (k, pk) in p.iter().enumerate().take(k_users) {
            let leak: f64 = (0..k_users).filter(|&j| j != k).map(|j| self.lambda[k][j]).sum();
            if self.gamma[k].is_finite() && leak > 0.0 {
                r = r.max(pk * leak / self.gamma[k]);
            }
        }
        for (row, cap) in self.loads.iter().zip(&self.antenna_power) {
            let load: f64 = row.iter().zip(p).map(|(l, pk)| l * pk).sum();
            r = r.max(load / cap);
        }
        r
    }
}

struct Step<'a> {
    gp: &'a GpProblem,
    free: Vec<usize>,
    /// `mu[j][k]` over free users.
    mu: Vec<Vec<f64>>,
    upper: Vec<(usize, f64)>,
    /// `ln` of the power floor, shared by every free user.
    lower: f64,
    rows: Vec<Vec<f64>>,
}

impl Step<'_> {
    fn power(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut p = vec![0.0; self.gp.k()];
        for (i, &u) in self.free.iter().enumerate() {
            p[u] = y[i].exp();
        }
        p
    }
}

impl BarrierProblem for Step<'_> {
    fn blocks(&self) -> Vec<usize> {
        vec![]
    }
    fn reals(&self) -> usize {
        self.free.len()
    }
    fn num_constraints(&self) -> usize {
        self.free.len() + self.upper.len() + self.rows.len()
    }
    fn objective(&self, y: &DVector<f64>) -> Smooth {
        let f = self.free.len();
        let gp = self.gp;
        let mut value = 0.0;
        let mut grad = DVector::zeros(f);
        let mut hess = DMatrix::zeros(f, f);
        let e: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        for (ki, &k) in self.free.iter().enumerate() {
            let a = gp.alpha[k];
            let mut s = gp.noise_power;
            let mut pi = vec![0.0; f];
            for (ji, &j) in self.free.iter().enumerate() {
                if j != k {
                    pi[ji] = gp.lambda[j][k] * e[ji];
                    s += pi[ji];
                }
            }
            value += a * s.ln();
            for v in pi.iter_mut() {
                *v /= s;
            }
            for ji in 0..f {
                value -= a * self.mu[ji][ki] * y[ji];
                grad[ji] += a * (pi[ji] - self.mu[ji][ki]);
                hess[(ji, ji)] += a * pi[ji];
                for li in 0..f {
                    hess[(ji, li)] -= a * pi[ji] * pi[li];
                }
            }
        }
        Smooth {
            value,
            grad,
            hess: Some(hess),
        }
    }
    fn constraint(&self, i: usize, y: &DVector<f64>) -> Smooth {
        let f = self.free.len();
        if i < f {
            let mut grad = DVector::zeros(f);
            grad[i] = -1.0;
            return Smooth {
                value: self.lower - y[i],
                grad,
                hess: None,
            };
        }
        let i = i - f;
        if i < self.upper.len() {
            let (idx, ub) = self.upper[i];
            let mut grad = DVector::zeros(f);
            grad[idx] = 1.0;
            return Smooth {
                value: y[idx] - ub,
                grad,
                hess: None,
            };
        }
        let row = &self.rows[i - self.upper.len()];
        // log-sum-exp of ln(c_k) + y_k
        let terms: Vec<f64> = (0..f)
            .map(|k| if row[k] > 0.0 { row[k].ln() + y[k] } else { f64::NEG_INFINITY })
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = terms.iter().map(|t| (t - m).exp()).collect();
        let total: f64 = w.iter().sum();
        let sigma: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut hess = DMatrix::zeros(f, f);
        for a in 0..f {
            hess[(a, a)] += sigma[a];
            for b in 0..f {
                hess[(a, b)] -= sigma[a] * sigma[b];
            }
        }
        Smooth {
            value: m + total.ln(),
            grad: DVector::from_vec(sigma),
            hess: Some(hess),
        }
    }
}

/// Successive GP power allocation from `p_init`; see the module docs.
pub fn solve_gp_power(
    problem: &GpProblem,
    p_init: &[f64],
    epsilon: f64,
    settings: &SolverSettings,
) -> Result<GpSolution, SolverError> {
    let k_users = problem.k();
    assert_eq!(p_init.len(), k_users, "initial power length mismatch");
    let leak: Vec<f64> = (0..k_users)
        .map(|k| (0..k_users).filter(|&j| j != k).map(|j| problem.lambda[k][j]).sum())
        .collect();
    let floor = POWER_FLOOR * problem.antenna_power.iter().cloned().fold(0.0, f64::max);
    // users that cannot carry power or gain from it
    let free: Vec<usize> = (0..k_users)
        .filter(|&k| {
            let has_load = problem.loads.iter().any(|row| row[k] > 0.0);
            let pinned = leak[k] > 0.0 && !(problem.gamma[k] > 4.0 * floor * leak[k]);
            problem.lambda[k][k] > 0.0 && has_load && !pinned
        })
        .collect();
    let mut p = vec![0.0; k_users];
    if free.is_empty() {
        return Ok(GpSolution {
            objective_trace: vec![problem.objective(&p)],
            powers: p,
            iterations: 0,
            pd_metric: 0.0,
            pd_trace: Vec::new(),
        });
    }
    for &k in &free {
        p[k] = if p_init[k].is_finite() { p_init[k].max(2.0 * floor) } else { 2.0 * floor };
    }
    let ratio = problem.max_ratio(&p);
    if ratio >= 0.99 {
        for &k in &free {
            p[k] = (p[k] * 0.99 / ratio).max(2.0 * floor);
        }
    }

    let upper: Vec<(usize, f64)> = free
        .iter()
        .enumerate()
        .filter(|&(_, &k)| problem.gamma[k].is_finite() && leak[k] > 0.0)
        .map(|(i, &k)| (i, (problem.gamma[k] / leak[k]).ln()))
        .collect();
    let rows: Vec<Vec<f64>> = problem
        .loads
        .iter()
        .zip(&problem.antenna_power)
        .filter(|(row, _)| free.iter().any(|&k| row[k] > 0.0))
        .map(|(row, cap)| free.iter().map(|&k| row[k] / cap).collect())
        .collect();

    let inner = SolverSettings {
        barrier_gap: settings.barrier_gap.max(GP_INNER_GAP),
        ..settings.clone()
    };
    let mut trace = vec![problem.objective(&p)];
    let mut pd_metric = f64::INFINITY;
    let mut pd_trace = Vec::new();
    let mut iterations = 0;
    while iterations < settings.max_gp_iterations {
        iterations += 1;
        // monomial weights at the current point, noise included
        let mut mu = vec![vec![0.0; free.len()]; free.len()];
        for (ki, &k) in free.iter().enumerate() {
            let total: f64 = problem.noise_power + free.iter().map(|&j| problem.lambda[j][k] * p[j]).sum::<f64>();
            for (ji, &j) in free.iter().enumerate() {
                mu[ji][ki] = problem.lambda[j][k] * p[j] / total;
            }
        }
        let step = Step {
            gp: problem,
            free: free.clone(),
            mu,
            upper: upper.clone(),
            lower: floor.ln(),
            rows: rows.clone(),
        };
        let y0 = DVector::from_iterator(free.len(), free.iter().map(|&k| p[k].ln()));
        let result = solve_barrier(&step, y0, &inner).map_err(|e| SolverError::GpInner {
            iterate: p.clone(),
            reason: e.to_string(),
        })?;
        let next = step.power(&result.x);
        let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let base: f64 = p.iter().map(|a| a * a).sum::<f64>().sqrt();
        pd_metric = diff / base;
        pd_trace.push(pd_metric);
        p = next;
        trace.push(problem.objective(&p));
        if pd_metric < epsilon {
            break;
        }
    }
    Ok(GpSolution {
        powers: p,
        iterations,
        pd_metric,
        objective_trace: trace,
        pd_trace,
    })
}
