use crate::channel::QuantizedCsi;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::leakage::{threshold, ThresholdKind};
use crate::linalg::{column, hermitian_eig, pseudo_inverse, ComplexVector, C64};
use crate::solvers::{solve_leakage_constrained, solve_zf_pa, SolverSettings};

use super::{split_beam, BeamformingSolution, Diagnostics, RobustStatistics, Scheme};

/// Normalized columns of `H_check^+`, used as placeholder directions for
/// users that end up without power.
pub(super) fn zf_directions(csi: &QuantizedCsi) -> Result<Vec<ComplexVector>> {
    let pinv = pseudo_inverse(&csi.h_check_matrix())?;
    Ok((0..csi.k())
        .map(|k| {
            let c = column(&pinv, k);
            let nrm = c.norm();
            c.unscale(nrm)
        })
        .collect())
}

/// Zero forcing under per-antenna budgets: the weighted sum-rate SDP over
/// covariances confined to each user's interference nullspace.
pub fn zf_pa(csi: &QuantizedCsi, config: &SystemConfig, settings: &SolverSettings) -> Result<BeamformingSolution> {
    let sol = solve_zf_pa(
        &csi.h_check_matrix(),
        &config.alpha,
        config.noise_power,
        &config.antenna_power,
        settings,
    )?;
    let fallback = zf_directions(csi)?;
    let (powers, directions) = sol
        .beams
        .iter()
        .zip(&fallback)
        .map(|(w, f)| split_beam(w, f))
        .unzip();
    Ok(BeamformingSolution {
        powers,
        directions,
        scheme: Scheme::ZfPa,
        thresholds: None,
        diagnostics: Diagnostics::default(),
    })
}

/// Per-user leakage caps for `powers`.
pub fn leakage_thresholds(
    kind: ThresholdKind,
    powers: &[f64],
    csi: &QuantizedCsi,
    config: &SystemConfig,
) -> Result<Vec<f64>> {
    (0..csi.k()).map(|k| threshold(kind, powers[k], csi, k, config)).collect()
}

/// Least-leakage direction scaled to meet both caps.
fn least_leakage_beam(stats: &RobustStatistics, k: usize, gamma: f64, p_tilde: f64) -> ComplexVector {
    let (evals, evecs) = hermitian_eig(&stats.u_bar[k]);
    let last = evals.len() - 1;
    let lam = evals[last].max(0.0);
    let p = if lam > 0.0 { p_tilde.min(gamma.max(0.0) / lam) } else { p_tilde };
    column(&evecs, last) * C64::new(p.sqrt(), 0.0)
}

/// Maximize every user's expected signal power subject to
/// `E{L_k} <= gammas[k]` and `||w_k||^2 <= powers[k]`. A threshold below the
/// least achievable leakage lowers the power instead of failing.
pub fn leakage_controlled(
    stats: &RobustStatistics,
    powers: &[f64],
    gammas: &[f64],
    settings: &SolverSettings,
) -> Result<BeamformingSolution> {
    let k_users = stats.k();
    if powers.len() != k_users || gammas.len() != k_users {
        return Err(Error::InvalidInput("powers and thresholds must have one entry per user".into()));
    }
    let mut out_powers = Vec::with_capacity(k_users);
    let mut directions = Vec::with_capacity(k_users);
    let mut fallbacks = 0;
    for k in 0..k_users {
        let fallback = least_leakage_beam(stats, k, gammas[k], powers[k]);
        let w = match solve_leakage_constrained(&stats.u[k], &stats.u_bar[k], gammas[k], powers[k], settings) {
            Ok(beam) => beam.w,
            Err(e) => {
                log::warn!("leakage-constrained beam of user {k} failed ({e}); using the least-leakage direction");
                fallbacks += 1;
                fallback.clone()
            }
        };
        let unit = if fallback.norm() > 0.0 {
            fallback.unscale(fallback.norm())
        } else {
            column(&hermitian_eig(&stats.u_bar[k]).1, stats.u_bar[k].dim() - 1)
        };
        let (p, d) = split_beam(&w, &unit);
        out_powers.push(p);
        directions.push(d);
    }
    Ok(BeamformingSolution {
        powers: out_powers,
        directions,
        scheme: Scheme::Malc,
        thresholds: Some(gammas.to_vec()),
        diagnostics: Diagnostics {
            fallbacks,
            ..Diagnostics::default()
        },
    })
}
