#![allow(dead_code)]

use leakbf::channel::complex_gaussian;
use leakbf::linalg::{hermitian_eig, ComplexMatrix, ComplexVector, HermitianMatrix, C64};
use rand::Rng;

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_vector<R: Rng>(n: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Random PSD matrix of the given rank.
pub fn random_psd<R: Rng>(n: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let g = random_matrix(n, rank, rng);
    HermitianMatrix::hermitian_part(&(&g * g.adjoint()))
}

pub fn random_pd<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    random_psd(n, n, rng).add(&HermitianMatrix::identity(n).scale(0.1))
}

/// Euclidean projection onto the PSD cone.
pub fn project_psd(m: &HermitianMatrix) -> HermitianMatrix {
    let (evals, evecs) = hermitian_eig(m);
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &e) in evals.iter().enumerate() {
        if e > 0.0 {
            let c = evecs.column(i);
            out += c * c.adjoint() * C64::new(e, 0.0);
        }
    }
    HermitianMatrix::hermitian_part(&out)
}

/// `max tr(QC)` s.t. `tr(Q A_i) <= b_i`, `Q >= 0`, by an augmented
/// Lagrangian method with accelerated projected-gradient inner steps.
pub fn sdp_oracle(c: &HermitianMatrix, cons: &[(HermitianMatrix, f64)]) -> (HermitianMatrix, f64) {
    let n = c.dim();
    let mut lam = vec![0.0; cons.len()];
    let mut rho = 10.0 / cons.iter().map(|(a, _)| a.frobenius_norm()).fold(0.0, f64::max).max(1e-12);
    let norms: f64 = cons.iter().map(|(a, _)| a.frobenius_norm().powi(2)).sum();
    let mut q = HermitianMatrix::zeros(n);
    let mut last_violation = f64::INFINITY;
    let lagrangian = |q: &HermitianMatrix, lam: &[f64], rho: f64| {
        let mut v = q.trace_product(c);
        for ((a, b), l) in cons.iter().zip(lam) {
            let m = (l + rho * (q.trace_product(a) - b)).max(0.0);
            v -= (m * m - l * l) / (2.0 * rho);
        }
        v
    };
    for _outer in 0..300 {
        let step = 1.0 / (rho * norms);
        let mut y = q.clone();
        let mut prev = q.clone();
        let mut tk: f64 = 1.0;
        let mut prev_value = lagrangian(&prev, &lam, rho);
        for _ in 0..600 {
            let mut grad = c.clone();
            for ((a, b), l) in cons.iter().zip(&lam) {
                let m = (l + rho * (y.trace_product(a) - b)).max(0.0);
                grad.add_scaled(a, -m);
            }
            let next = project_psd(&y.add(&grad.scale(step)));
            let value = lagrangian(&next, &lam, rho);
            if value < prev_value {
                // adaptive restart
                tk = 1.0;
                y = prev.clone();
                continue;
            }
            let tn = (1.0 + (1.0 + 4.0 * tk * tk).sqrt()) / 2.0;
            y = next.add(&next.add(&prev.scale(-1.0)).scale((tk - 1.0) / tn));
            prev = next;
            prev_value = value;
            tk = tn;
        }
        q = prev;
        let mut violation: f64 = 0.0;
        for ((a, b), l) in cons.iter().zip(lam.iter_mut()) {
            let r = q.trace_product(a) - b;
            violation = violation.max(r.max(-*l / rho).abs());
            *l = (*l + rho * r).max(0.0);
        }
        if violation > 0.25 * last_violation {
            rho *= 2.0;
        }
        last_violation = violation;
    }
    let value = q.trace_product(c);
    (q, value)
}

/// `min_{lambda >= 0} lambda gamma + P max(0, lambda_max(U - lambda U_bar))`
/// by a fine grid followed by golden-section refinement.
pub fn leakage_dual_oracle(u: &HermitianMatrix, u_bar: &HermitianMatrix, gamma: f64, p: f64) -> f64 {
    let f = |l: f64| {
        let m = u.add(&u_bar.scale(-l));
        l * gamma + p * hermitian_eig(&m).0[0].max(0.0)
    };
    let top = hermitian_eig(u).0[0] * p / gamma.max(1e-300);
    let hi = top.max(1e-9) * 2.0;
    let grid = 4000;
    let mut best = (0.0, f(0.0));
    for i in 0..=grid {
        let l = hi * i as f64 / grid as f64;
        let v = f(l);
        if v < best.1 {
            best = (l, v);
        }
    }
    let h = hi / grid as f64;
    let (mut a, mut b) = ((best.0 - h).max(0.0), best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    f(0.5 * (a + b)).min(best.1)
}
