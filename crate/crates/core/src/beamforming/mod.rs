//! Beamforming schemes.
//!
//! Non-robust baselines (ZF, ZF-PA, SLNR) work on the feedback channel
//! `h_check_k = sqrt(A_k) h_hat_k`. The robust schemes (ASLNR, PLC, MALC,
//! RALC and their per-antenna variants) work on the expected signal and
//! leakage quadratic forms of [`RobustStatistics`].

mod algo1;
mod linear;
mod robust;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::QuantizedCsi;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::leakage::ThresholdKind;
use crate::linalg::{gram_of_row, ComplexVector, HermitianMatrix};
use crate::solvers::SolverSettings;

pub use algo1::{algo1, AlgoState};
pub use linear::{aslnr, slnr, zf};
pub use robust::{leakage_controlled, leakage_thresholds, zf_pa};

/// Beamforming scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Zf,
    ZfPa,
    Slnr,
    Aslnr,
    Plc,
    Malc,
    Ralc,
    MalcPa,
    RalcPa,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::Zf,
        Scheme::ZfPa,
        Scheme::Slnr,
        Scheme::Aslnr,
        Scheme::Plc,
        Scheme::Malc,
        Scheme::Ralc,
        Scheme::MalcPa,
        Scheme::RalcPa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Zf => "zf",
            Scheme::ZfPa => "zf-pa",
            Scheme::Slnr => "slnr",
            Scheme::Aslnr => "aslnr",
            Scheme::Plc => "plc",
            Scheme::Malc => "malc",
            Scheme::Ralc => "ralc",
            Scheme::MalcPa => "malc-pa",
            Scheme::RalcPa => "ralc-pa",
        }
    }

    /// Whether the scheme obeys per-antenna budgets (otherwise a total
    /// budget split equally over users).
    pub fn per_antenna(self) -> bool {
        matches!(self, Scheme::ZfPa | Scheme::MalcPa | Scheme::RalcPa)
    }

    /// Whether the scheme caps the expected leakage of each user.
    pub fn leakage_controlled(self) -> bool {
        matches!(
            self,
            Scheme::Plc | Scheme::Malc | Scheme::Ralc | Scheme::MalcPa | Scheme::RalcPa
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = Scheme::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidInput(format!("unknown scheme '{s}' (valid: {})", names.join(", ")))
            })
    }
}

/// Expected signal and leakage quadratic forms.
///
/// For a beamformer `w` of user `k`, `E{S_k} = xi_k^2 A_k w^H U_k w` and
/// `E{L_k} = w^H U_bar_k w`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustStatistics {
    /// `U_k = (1 - N eta/(N-1)) h_hat_k^H h_hat_k + eta/(N-1) I`.
    pub u: Vec<HermitianMatrix>,
    /// `U_bar_k = sum_{j != k} xi_j^2 A_j U_j`.
    pub u_bar: Vec<HermitianMatrix>,
    pub eta: f64,
    pub a: Vec<f64>,
    pub xi_sq: Vec<f64>,
}

impl RobustStatistics {
    pub fn k(&self) -> usize {
        self.u.len()
    }

    /// Expected power `xi_k^2 A_k w^H U_k w` of beamformer `w` at user `k`:
    /// `E{S_k}` for the user's own beam, an interference term otherwise.
    pub fn expected_power(&self, k: usize, w: &ComplexVector) -> f64 {
        self.xi_sq[k] * self.a[k] * self.u[k].quad_form(w)
    }

    /// `E{L_k}` for beamformer `w` of user `k`.
    pub fn expected_leakage(&self, k: usize, w: &ComplexVector) -> f64 {
        self.u_bar[k].quad_form(w)
    }
}

pub fn build_statistics(csi: &QuantizedCsi) -> RobustStatistics {
    let k_users = csi.k();
    let n = csi.n();
    let spread = csi.eta / (n as f64 - 1.0);
    let u: Vec<HermitianMatrix> = csi
        .h_hat
        .iter()
        .map(|h| {
            gram_of_row(h)
                .scale(1.0 - n as f64 * spread)
                .add(&HermitianMatrix::identity(n).scale(spread))
        })
        .collect();
    let u_bar = (0..k_users)
        .map(|k| {
            let mut m = HermitianMatrix::zeros(n);
            for j in (0..k_users).filter(|&j| j != k) {
                m.add_scaled(&u[j], csi.xi_sq[j] * csi.cmi[j]);
            }
            m
        })
        .collect();
    RobustStatistics {
        u,
        u_bar,
        eta: csi.eta,
        a: csi.cmi.clone(),
        xi_sq: csi.xi_sq.clone(),
    }
}

/// Per-user powers and unit-norm directions.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformingSolution {
    pub powers: Vec<f64>,
    pub directions: Vec<ComplexVector>,
    pub scheme: Scheme,
    /// Leakage caps the beams were designed against, if any.
    pub thresholds: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// Iteration counts and traces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Monomial refreshes summed over all GP solves.
    pub gp_iterations: usize,
    /// Outer iterations of the alternating optimization.
    pub outer_iterations: usize,
    /// Best-so-far surrogate after the initialization and every outer iteration.
    pub best_so_far: Vec<f64>,
    /// Surrogate of the iterate after the initialization and every outer iteration.
    pub surrogate: Vec<f64>,
    /// Relative power change after every refresh of every GP solve.
    pub pd_traces: Vec<Vec<f64>>,
    /// Users whose beam update failed and kept the previous direction.
    pub fallbacks: usize,
}

impl BeamformingSolution {
    pub fn k(&self) -> usize {
        self.powers.len()
    }

    /// `w_k = sqrt(P_k) w_tilde_k`.
    pub fn beam(&self, k: usize) -> ComplexVector {
        &self.directions[k] * crate::linalg::C64::new(self.powers[k].max(0.0).sqrt(), 0.0)
    }

    pub fn beams(&self) -> Vec<ComplexVector> {
        (0..self.k()).map(|k| self.beam(k)).collect()
    }

    /// `sum_k P_k |w_tilde_k[n]|^2` for every antenna.
    pub fn antenna_loads(&self) -> Vec<f64> {
        let n = self.directions.first().map_or(0, |d| d.len());
        (0..n)
            .map(|i| {
                self.powers
                    .iter()
                    .zip(&self.directions)
                    .map(|(p, d)| p * d[i].norm_sqr())
                    .sum()
            })
            .collect()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Split a beamformer into power and unit direction; a zero beam keeps
/// `fallback` as its direction.
pub(crate) fn split_beam(w: &ComplexVector, fallback: &ComplexVector) -> (f64, ComplexVector) {
    let p = w.norm_squared();
    if p > 0.0 {
        (p, w.unscale(p.sqrt()))
    } else {
        (0.0, fallback.clone())
    }
}

/// Compute the beamformers of `scheme`. `rng` feeds Gaussian randomization.
pub fn design<R: Rng + ?Sized>(
    scheme: Scheme,
    csi: &QuantizedCsi,
    config: &SystemConfig,
    settings: &SolverSettings,
    rng: &mut R,
) -> Result<BeamformingSolution> {
    let powers = config.equal_ue_powers();
    match scheme {
        Scheme::Zf => zf(csi, &powers),
        Scheme::ZfPa => zf_pa(csi, config, settings),
        Scheme::Slnr => slnr(csi, &powers, config),
        Scheme::Aslnr => aslnr(&build_statistics(csi), &powers, config),
        Scheme::Plc | Scheme::Malc | Scheme::Ralc => {
            let stats = build_statistics(csi);
            let gammas = match scheme {
                Scheme::Plc => vec![config.plc_p * config.plc_gamma; csi.k()],
                Scheme::Malc => leakage_thresholds(ThresholdKind::Malc, &powers, csi, config)?,
                _ => leakage_thresholds(ThresholdKind::Ralc, &powers, csi, config)?,
            };
            let mut sol = leakage_controlled(&stats, &powers, &gammas, settings)?;
            sol.scheme = scheme;
            Ok(sol)
        }
        Scheme::MalcPa => algo1(csi, config, ThresholdKind::Malc, settings, rng),
        Scheme::RalcPa => algo1(csi, config, ThresholdKind::Ralc, settings, rng),
    }
}

/// Surrogate `sum_k alpha_k log2(1 + E{S_k} / (E{I_k} + N0))`.
pub fn surrogate_rate(
    stats: &RobustStatistics,
    powers: &[f64],
    directions: &[ComplexVector],
    alpha: &[f64],
    noise_power: f64,
) -> f64 {
    let k_users = stats.k();
    (0..k_users)
        .map(|k| {
            let signal = powers[k] * stats.expected_power(k, &directions[k]);
            let interference: f64 = (0..k_users)
                .filter(|&j| j != k)
                .map(|j| powers[j] * stats.expected_power(k, &directions[j]))
                .sum();
            alpha[k] * (1.0 + signal / (interference + noise_power)).log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("MALC_PA".parse::<Scheme>().unwrap(), Scheme::MalcPa);
        let err = "zff".parse::<Scheme>().unwrap_err().to_string();
        assert!(err.contains("zf-pa"), "{err}");
    }

    #[test]
    fn flags() {
        assert!(Scheme::RalcPa.per_antenna() && Scheme::RalcPa.leakage_controlled());
        assert!(!Scheme::Slnr.per_antenna() && !Scheme::Slnr.leakage_controlled());
    }
}
