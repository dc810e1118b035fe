//! `max tr(QC)` over Hermitian PSD `Q` subject to `tr(Q A_i) <= b_i` and
//! `Q_nn <= u_n`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::barrier::{herm_len, herm_to_vec, solve_barrier, vec_identity, vec_to_herm, BarrierProblem, Smooth};
use super::SolverSettings;
use crate::error::SolverError;
use crate::linalg::{hermitian_eig, HermitianMatrix};

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub dim: usize,
    /// Maximized: `tr(Q C)`.
    pub objective: HermitianMatrix,
    /// `tr(Q A_i) <= b_i`.
    pub constraints: Vec<(HermitianMatrix, f64)>,
    /// `Q_nn <= u_n`.
    pub element_caps: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub q: HermitianMatrix,
    pub objective_value: f64,
    /// Dual objective minus primal objective.
    pub duality_gap: f64,
    /// Largest `max(0, tr(Q A_i) - b_i) / max(1, |b_i|)` over all
    /// constraints and caps.
    pub max_constraint_violation: f64,
    pub min_eigenvalue: f64,
    /// `lambda_2 / lambda_1` of `Q`.
    pub rank_indicator: f64,
    /// Multipliers of `constraints`.
    pub multipliers: Vec<f64>,
    /// Multipliers of `element_caps`.
    pub cap_multipliers: Vec<f64>,
    /// Smallest eigenvalue of `sum lambda_i A_i + sum nu_n E_nn - C`.
    pub dual_min_eigenvalue: f64,
    pub newton_steps: usize,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        self.duality_gap.abs() / self.objective_value.abs().max(1e-12)
    }
}

struct SdpBarrier {
    n: usize,
    c: DVector<f64>,
    a: Vec<DVector<f64>>,
    b: Vec<f64>,
}

fn vectorize(m: &HermitianMatrix) -> DVector<f64> {
    let mut v = DVector::zeros(herm_len(m.dim()));
    herm_to_vec(m.matrix(), v.as_mut_slice());
    v
}

impl BarrierProblem for SdpBarrier {
    fn blocks(&self) -> Vec<usize> {
        vec![self.n]
    }
    fn reals(&self) -> usize {
        0
    }
    fn num_constraints(&self) -> usize {
        self.a.len()
    }
    fn objective(&self, x: &DVector<f64>) -> Smooth {
        Smooth {
            value: -self.c.dot(x),
            grad: -&self.c,
            hess: None,
        }
    }
    fn objective_value(&self, x: &DVector<f64>) -> f64 {
        -self.c.dot(x)
    }
    fn constraint(&self, i: usize, x: &DVector<f64>) -> Smooth {
        Smooth {
            value: self.a[i].dot(x) - self.b[i],
            grad: self.a[i].clone(),
            hess: None,
        }
    }
    fn constraint_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.a[i].dot(x) - self.b[i]
    }
}

fn rank_indicator(evals: &[f64]) -> f64 {
    if evals.len() < 2 || evals[0] <= 0.0 {
        return 0.0;
    }
    (evals[1] / evals[0]).max(0.0)
}

pub fn solve_sdp(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution, SolverError> {
    let n = problem.dim;
    assert_eq!(problem.objective.dim(), n, "objective dimension mismatch");
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (m, bound) in &problem.constraints {
        assert_eq!(m.dim(), n, "constraint dimension mismatch");
        a.push(vectorize(m));
        b.push(*bound);
    }
    for &(idx, cap) in &problem.element_caps {
        assert!(idx < n, "cap index out of range");
        let mut e = vec![0.0; n];
        e[idx] = 1.0;
        a.push(vectorize(&HermitianMatrix::from_real_diagonal(&e)));
        b.push(cap);
    }
    let barrier = SdpBarrier {
        n,
        c: vectorize(&problem.objective),
        a,
        b,
    };

    // strictly feasible multiple of the identity
    let mut id = DVector::zeros(herm_len(n));
    vec_identity(n, id.as_mut_slice());
    let mut eps: f64 = 1.0;
    for (ai, bi) in barrier.a.iter().zip(&barrier.b) {
        let tr = ai.dot(&id);
        if tr > 0.0 && *bi > 0.0 {
            eps = eps.min(0.5 * bi / tr);
        }
    }
    let mut start = None;
    for _ in 0..200 {
        let x = &id * eps;
        if (0..barrier.a.len()).all(|i| barrier.constraint_value(i, &x) < 0.0) {
            start = Some(x);
            break;
        }
        eps *= 0.5;
    }
    let x0 = start.ok_or(SolverError::NoInterior)?;
    let result = solve_barrier(&barrier, x0, settings)?;

    let q = HermitianMatrix::hermitian_part(&vec_to_herm(result.x.as_slice(), n));
    let objective_value = q.trace_product(&problem.objective);
    let m = problem.constraints.len();
    let mut violation: f64 = 0.0;
    for (ai, bi) in &problem.constraints {
        violation = violation.max((q.trace_product(ai) - bi).max(0.0) / bi.abs().max(1.0));
    }
    for &(idx, cap) in &problem.element_caps {
        violation = violation.max((q.diag_real(idx) - cap).max(0.0) / cap.abs().max(1.0));
    }
    let zscale = problem.objective.frobenius_norm().max(1.0);
    // constraints whose matrix is positive definite can absorb a negative dual eigenvalue
    let floors: Vec<f64> = problem
        .constraints
        .iter()
        .map(|(ai, _)| hermitian_eig(ai).0.last().copied().unwrap_or(0.0))
        .collect();
    let dual = |mult: &[f64]| {
        let mut mult = mult.to_vec();
        let assemble = |mult: &[f64]| {
            let mut z = problem.objective.scale(-1.0);
            let mut dual_obj = 0.0;
            for (i, (ai, bi)) in problem.constraints.iter().enumerate() {
                z.add_scaled(ai, mult[i]);
                dual_obj += mult[i] * bi;
            }
            let mut diag = vec![0.0; n];
            for (j, &(idx, cap)) in problem.element_caps.iter().enumerate() {
                diag[idx] += mult[m + j];
                dual_obj += mult[m + j] * cap;
            }
            z.add_scaled(&HermitianMatrix::from_real_diagonal(&diag), 1.0);
            let zmin = hermitian_eig(&z).0.last().copied().unwrap_or(0.0);
            (dual_obj, zmin)
        };
        let (mut dual_obj, mut zmin) = assemble(&mult);
        if zmin < 0.0 {
            let repair = (0..m)
                .filter(|&i| floors[i] > 0.0 && problem.constraints[i].1 >= 0.0)
                .map(|i| (i, -zmin / floors[i]))
                .min_by(|x, y| {
                    (x.1 * problem.constraints[x.0].1).total_cmp(&(y.1 * problem.constraints[y.0].1))
                });
            if let Some((i, shift)) = repair {
                mult[i] += shift * (1.0 + 1e-12);
                (dual_obj, zmin) = assemble(&mult);
            }
        }
        let gap = dual_obj - objective_value;
        let score = (gap.abs() / objective_value.abs().max(1e-12)).max(-zmin / zscale);
        (score, gap, zmin, mult)
    };
    // late iterates have slacks near the resolution of the primal variable
    let mut best = dual(&result.multipliers);
    for mult in &result.multiplier_trace {
        let cand = dual(mult);
        if cand.0 < best.0 {
            best = cand;
        }
    }
    let (_, duality_gap, dual_min_eigenvalue, best_mult) = best;
    let multipliers = best_mult[..m].to_vec();
    let cap_multipliers = best_mult[m..].to_vec();
    let (qev, _) = hermitian_eig(&q);

    Ok(SdpSolution {
        objective_value,
        duality_gap,
        max_constraint_violation: violation,
        min_eigenvalue: *qev.last().unwrap_or(&0.0),
        rank_indicator: rank_indicator(&qev),
        multipliers,
        cap_multipliers,
        dual_min_eigenvalue,
        newton_steps: result.newton_steps,
        q,
    })
}

/// Lower the rank of a feasible `q` without changing `tr(q C)` or the value
/// of any active constraint, by moving along directions in the face of the
/// PSD cone that are orthogonal to all of them until an eigenvalue hits
/// zero. Inactive constraints are kept feasible. Stops at rank one or when
/// no such direction exists.
pub fn purify_rank(
    q: &HermitianMatrix,
    objective: &HermitianMatrix,
    constraints: &[(HermitianMatrix, f64)],
) -> HermitianMatrix {
    let n = q.dim();
    let mut q = q.clone();
    for _ in 0..4 * (n + constraints.len() + 1) {
        let (evals, evecs) = hermitian_eig(&q);
        let top = evals[0];
        if top <= 0.0 {
            break;
        }
        let r = evals.iter().filter(|&&e| e > 1e-10 * top).count();
        if r <= 1 {
            break;
        }
        let mut v = evecs.columns(0, r).into_owned();
        for c in 0..r {
            let s = evals[c].sqrt();
            for row in 0..n {
                v[(row, c)] *= s;
            }
        }
        let reduce = |m: &HermitianMatrix| HermitianMatrix::hermitian_part(&(v.adjoint() * m.matrix() * &v));
        let mut rows = vec![reduce(objective)];
        let mut inactive = Vec::new();
        for (a, b) in constraints {
            let cur = q.trace_product(a);
            if b - cur <= 1e-9 * b.abs().max(1.0) {
                rows.push(reduce(a));
            } else {
                inactive.push((reduce(a), b - cur));
            }
        }
        let len = herm_len(r);
        if rows.len() >= len {
            break;
        }
        let mut gram = DMatrix::<f64>::zeros(len, len);
        let mut buf = vec![0.0; len];
        for m in &rows {
            herm_to_vec(m.matrix(), &mut buf);
            let norm = buf.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let u = DVector::from_iterator(len, buf.iter().map(|x| x / norm));
            gram.ger(1.0, &u, &u, 1.0);
        }
        let eig = SymmetricEigen::new(gram);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc });
        let dir = eig.eigenvectors.column(idx).into_owned();
        let mut delta = HermitianMatrix::hermitian_part(&vec_to_herm(dir.as_slice(), r));
        let (dev, _) = hermitian_eig(&delta);
        let (dmax, dmin) = (dev[0], dev[r - 1]);
        if dmin >= -1e-14 * dmax.abs().max(dmin.abs()) {
            delta = delta.scale(-1.0);
        }
        let (dev, _) = hermitian_eig(&delta);
        let dmin = dev[r - 1];
        if dmin >= -1e-14 {
            break;
        }
        let mut step = -1.0 / dmin;
        let mut hit_eigen = true;
        for (m, slack) in &inactive {
            let rate = m.trace_product(&delta);
            if rate > 0.0 && slack / rate < step {
                step = slack / rate;
                hit_eigen = false;
            }
        }
        let inner = HermitianMatrix::identity(r).add(&delta.scale(step));
        let next = &v * inner.matrix() * v.adjoint();
        q = HermitianMatrix::hermitian_part(&next);
        if hit_eigen {
            // drop the annihilated component exactly
            let (e2, v2) = hermitian_eig(&q);
            let keep = e2.iter().filter(|&&e| e > 1e-10 * e2[0].max(0.0)).count().min(r - 1);
            let mut m = nalgebra::DMatrix::zeros(n, n);
            for (c, &ec) in e2.iter().enumerate().take(keep) {
                let col = v2.column(c);
                m += col * col.adjoint() * num_complex::Complex64::new(ec, 0.0);
            }
            q = HermitianMatrix::hermitian_part(&m);
        }
    }
    q
}
