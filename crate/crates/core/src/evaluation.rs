//! Ground-truth performance of a beamformer on the true channel, constraint
//! audits and Monte Carlo averaging.

use rayon::prelude::*;

use crate::beamforming::{build_statistics, design, surrogate_rate, BeamformingSolution, RobustStatistics, Scheme};
use crate::channel::{generate_channel, quantize_channel, ChannelRealization};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::linalg::ComplexVector;
use crate::rng::{stream, Purpose, RUN_WIDE};
use crate::solvers::SolverSettings;

fn gain(h: &ComplexVector, w: &ComplexVector) -> f64 {
    h.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<crate::linalg::C64>().norm_sqr()
}

/// `xi_k^2 |h_k w_k|^2 / (sum_{j != k} xi_k^2 |h_k w_j|^2 + N0)` on the true channel.
pub fn sinr(channel: &ChannelRealization, solution: &BeamformingSolution, noise_power: f64) -> Vec<f64> {
    let beams = solution.beams();
    (0..channel.k())
        .map(|k| {
            let h = channel.row(k);
            let xi_sq = channel.xi[k] * channel.xi[k];
            let signal = xi_sq * gain(&h, &beams[k]);
            let interference: f64 = (0..beams.len())
                .filter(|&j| j != k)
                .map(|j| xi_sq * gain(&h, &beams[j]))
                .sum();
            signal / (interference + noise_power)
        })
        .collect()
}

/// `sum_k alpha_k log2(1 + SINR_k)` on the true channel, in bits/s/Hz.
pub fn weighted_sum_rate(channel: &ChannelRealization, solution: &BeamformingSolution, config: &SystemConfig) -> f64 {
    sinr(channel, solution, config.noise_power)
        .iter()
        .zip(&config.alpha)
        .map(|(s, a)| a * (1.0 + s).log2())
        .sum()
}

/// Leakage `sum_{j != k} xi_j^2 |h_j w_k|^2` of every user's beam.
pub fn realized_leakage(channel: &ChannelRealization, solution: &BeamformingSolution) -> Vec<f64> {
    let beams = solution.beams();
    (0..beams.len())
        .map(|k| {
            (0..channel.k())
                .filter(|&j| j != k)
                .map(|j| channel.xi[j] * channel.xi[j] * gain(&channel.row(j), &beams[k]))
                .sum()
        })
        .collect()
}

/// Constraint report of a solution. Violations are relative and zero when
/// the constraint holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub per_antenna_power: Vec<f64>,
    /// `max_n (load_n - P_n) / P_n`, floored at zero.
    pub max_antenna_violation: f64,
    pub sum_power: f64,
    /// `(sum_k P_k - P) / P`, floored at zero.
    pub sum_power_violation: f64,
    /// `E{L_k} = w_k^H U_bar_k w_k`, when statistics were supplied.
    pub expected_leakage: Vec<f64>,
    /// `max_k (E{L_k} - gamma_k) / gamma_k`, floored at zero.
    pub max_leakage_violation: f64,
    /// `max_k | ||w_tilde_k|| - 1 |`.
    pub direction_norm_error: f64,
}

impl AuditReport {
    /// Whether every audited constraint holds within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.max_antenna_violation <= tol
            && self.sum_power_violation <= tol
            && self.max_leakage_violation <= tol
            && self.direction_norm_error <= 1e-10
    }
}

/// Check the power budget of the scheme (per-antenna or total) and, given
/// statistics, the leakage caps attached to the solution.
pub fn audit_constraints(
    solution: &BeamformingSolution,
    config: &SystemConfig,
    stats: Option<&RobustStatistics>,
) -> AuditReport {
    let loads = solution.antenna_loads();
    let mut report = AuditReport {
        sum_power: solution.total_power(),
        direction_norm_error: solution
            .directions
            .iter()
            .map(|d| (d.norm() - 1.0).abs())
            .fold(0.0, f64::max),
        ..AuditReport::default()
    };
    if solution.scheme.per_antenna() {
        report.max_antenna_violation = loads
            .iter()
            .zip(&config.antenna_power)
            .map(|(l, cap)| ((l - cap) / cap).max(0.0))
            .fold(0.0, f64::max);
    } else {
        let total = config.total_power();
        report.sum_power_violation = ((report.sum_power - total) / total).max(0.0);
    }
    report.per_antenna_power = loads;
    if let Some(stats) = stats {
        let beams = solution.beams();
        report.expected_leakage = (0..beams.len()).map(|k| stats.expected_leakage(k, &beams[k])).collect();
        if let Some(gammas) = &solution.thresholds {
            report.max_leakage_violation = report
                .expected_leakage
                .iter()
                .zip(gammas)
                .enumerate()
                .map(|(k, (l, g))| {
                    let floor = 1e-12 * solution.powers[k] * stats.u_bar[k].trace();
                    ((l - g) / g.max(floor).max(f64::MIN_POSITIVE)).max(0.0)
                })
                .fold(0.0, f64::max);
        }
    }
    report
}

/// Outcome of one channel trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub scheme: Scheme,
    pub weighted_sum_rate: f64,
    pub per_ue_sinr: Vec<f64>,
    pub realized_leakage: Vec<f64>,
    /// Surrogate rate computed from the base station's statistics.
    pub surrogate_rate: f64,
    pub audit: AuditReport,
    pub gp_iterations: usize,
    pub outer_iterations: usize,
    pub best_so_far: Vec<f64>,
    /// Surrogate of the iterate after the initialization and every outer iteration.
    pub surrogate_trace: Vec<f64>,
    pub pd_traces: Vec<Vec<f64>>,
    pub fallbacks: usize,
}

/// Channel, feedback and beamformer of trial `trial`, each drawn from its
/// own keyed stream.
pub fn run_trial(scheme: Scheme, config: &SystemConfig, trial: u64, settings: &SolverSettings) -> Result<TrialResult> {
    let channel = generate_channel(config, &mut stream(config.seed, trial, 0, Purpose::Channel));
    let codebook_trial = if config.fixed_codebook { RUN_WIDE } else { trial };
    let csi = quantize_channel(&channel, config, &mut stream(config.seed, codebook_trial, 0, Purpose::Codebook))?;
    let mut rng = stream(config.seed, trial, 0, Purpose::Randomization);
    let solution = design(scheme, &csi, config, settings, &mut rng)?;
    let stats = build_statistics(&csi);
    let per_ue_sinr = sinr(&channel, &solution, config.noise_power);
    let weighted_sum_rate = per_ue_sinr
        .iter()
        .zip(&config.alpha)
        .map(|(s, a)| a * (1.0 + s).log2())
        .sum();
    let d = &solution.diagnostics;
    Ok(TrialResult {
        scheme,
        weighted_sum_rate,
        per_ue_sinr,
        realized_leakage: realized_leakage(&channel, &solution),
        surrogate_rate: surrogate_rate(&stats, &solution.powers, &solution.directions, &config.alpha, config.noise_power),
        audit: audit_constraints(&solution, config, Some(&stats)),
        gp_iterations: d.gp_iterations,
        outer_iterations: d.outer_iterations,
        best_so_far: d.best_so_far.clone(),
        surrogate_trace: d.surrogate.clone(),
        pd_traces: d.pd_traces.clone(),
        fallbacks: d.fallbacks,
    })
}

/// Sample mean and 95% normal-approximation half-width.
pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.959_963_984_540_054 * (var / n).sqrt())
}

/// Aggregate over trials `0..n_trials`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub scheme: Scheme,
    pub n_trials: usize,
    pub mean_rate: f64,
    pub half_width: f64,
    pub mean_surrogate: f64,
    pub mean_gp_iterations: f64,
    pub mean_outer_iterations: f64,
    pub max_antenna_violation: f64,
    pub max_sum_power_violation: f64,
    pub max_leakage_violation: f64,
    pub fallbacks: usize,
    pub trials: Vec<TrialResult>,
}

/// Run the trials in parallel and reduce them in trial order, so the result
/// does not depend on the number of workers.
pub fn average_over_trials(
    scheme: Scheme,
    config: &SystemConfig,
    n_trials: usize,
    settings: &SolverSettings,
) -> Result<TrialSummary> {
    let trials = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial(scheme, config, t, settings))
        .collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = trials.iter().map(|t| t.weighted_sum_rate).collect();
    let (mean_rate, half_width) = mean_and_half_width(&rates);
    let n = trials.len().max(1) as f64;
    let mean_of = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).sum::<f64>() / n;
    let max_of = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    Ok(TrialSummary {
        scheme,
        n_trials,
        mean_rate,
        half_width,
        mean_surrogate: mean_of(&|t| t.surrogate_rate),
        mean_gp_iterations: mean_of(&|t| t.gp_iterations as f64),
        mean_outer_iterations: mean_of(&|t| t.outer_iterations as f64),
        max_antenna_violation: max_of(&|t| t.audit.max_antenna_violation),
        max_sum_power_violation: max_of(&|t| t.audit.sum_power_violation),
        max_leakage_violation: max_of(&|t| t.audit.max_leakage_violation),
        fallbacks: trials.iter().map(|t| t.fallbacks).sum(),
        trials,
    })
}
