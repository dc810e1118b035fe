use crate::channel::QuantizedCsi;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{column, generalized_top_eigvec, gram_of_row, pseudo_inverse, row, HermitianMatrix};

use super::{BeamformingSolution, Diagnostics, RobustStatistics, Scheme};

fn check_powers(powers: &[f64], k: usize) -> Result<()> {
    if powers.len() != k {
        return Err(Error::InvalidInput(format!("expected {k} powers, got {}", powers.len())));
    }
    if let Some(p) = powers.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::Domain { what: "per-user power", value: *p });
    }
    Ok(())
}

fn solution(scheme: Scheme, powers: &[f64], directions: Vec<crate::linalg::ComplexVector>) -> BeamformingSolution {
    BeamformingSolution {
        powers: powers.to_vec(),
        directions,
        scheme,
        thresholds: None,
        diagnostics: Diagnostics::default(),
    }
}

/// Zero forcing on the feedback channel: normalized columns of `H_check^+`.
pub fn zf(csi: &QuantizedCsi, powers: &[f64]) -> Result<BeamformingSolution> {
    if powers.len() != csi.k() {
        return Err(Error::InvalidInput(format!("expected {} powers, got {}", csi.k(), powers.len())));
    }
    let pinv = pseudo_inverse(&csi.h_check_matrix())?;
    let directions = (0..csi.k())
        .map(|k| {
            let c = column(&pinv, k);
            let nrm = c.norm();
            c.unscale(nrm)
        })
        .collect();
    Ok(solution(Scheme::Zf, powers, directions))
}

/// Maximum SLNR on the feedback channel: top generalized eigenvector of
/// `(xi_k^2 h_check_k^H h_check_k, N0/P_k I + sum_{j != k} xi_j^2 h_check_j^H h_check_j)`.
pub fn slnr(csi: &QuantizedCsi, powers: &[f64], config: &SystemConfig) -> Result<BeamformingSolution> {
    check_powers(powers, csi.k())?;
    let h = csi.h_check_matrix();
    let grams: Vec<HermitianMatrix> = (0..csi.k()).map(|k| gram_of_row(&row(&h, k))).collect();
    let n = csi.n();
    let directions = (0..csi.k())
        .map(|k| {
            let mut leak = HermitianMatrix::identity(n).scale(config.noise_power / powers[k]);
            for (j, g) in grams.iter().enumerate() {
                if j != k {
                    leak.add_scaled(g, 1.0);
                }
            }
            generalized_top_eigvec(&grams[k], &leak).map(|(_, v)| v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solution(Scheme::Slnr, powers, directions))
}

/// Maximum average SLNR: top generalized eigenvector of
/// `(xi_k^2 A_k U_k, N0/P_k I + U_bar_k)`.
pub fn aslnr(stats: &RobustStatistics, powers: &[f64], config: &SystemConfig) -> Result<BeamformingSolution> {
    check_powers(powers, stats.k())?;
    let n = stats.u[0].dim();
    let directions = (0..stats.k())
        .map(|k| {
            let signal = stats.u[k].scale(stats.xi_sq[k] * stats.a[k]);
            let leak = HermitianMatrix::identity(n)
                .scale(config.noise_power / powers[k])
                .add(&stats.u_bar[k]);
            generalized_top_eigvec(&signal, &leak).map(|(_, v)| v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solution(Scheme::Aslnr, powers, directions))
}
