use rand::Rng;

use crate::channel::QuantizedCsi;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::leakage::ThresholdKind;
use crate::linalg::ComplexVector;
use crate::solvers::{solve_gp_power, solve_leakage_constrained_pa, GpProblem, SolverSettings};

use super::robust::{leakage_thresholds, zf_pa};
use super::{build_statistics, split_beam, surrogate_rate, BeamformingSolution, RobustStatistics, Scheme};

/// Iterate of the alternating power/beam optimization.
#[derive(Clone, Debug)]
pub struct AlgoState {
    pub l: usize,
    pub powers: Vec<f64>,
    pub directions: Vec<ComplexVector>,
    /// Best surrogate seen so far.
    pub perf_metric: f64,
    pub best_solution: BeamformingSolution,
}

fn gp_problem(stats: &RobustStatistics, directions: &[ComplexVector], gammas: &[f64], config: &SystemConfig) -> GpProblem {
    let k_users = stats.k();
    let lambda = (0..k_users)
        .map(|j| (0..k_users).map(|k| stats.expected_power(k, &directions[j])).collect())
        .collect();
    let loads = (0..config.n)
        .map(|n| directions.iter().map(|d| d[n].norm_sqr()).collect())
        .collect();
    GpProblem {
        lambda,
        noise_power: config.noise_power,
        alpha: config.alpha.clone(),
        gamma: gammas.to_vec(),
        loads,
        antenna_power: config.antenna_power.clone(),
    }
}

/// Largest power along `d` that fits the headroom and the leakage cap.
fn fitting_power(stats: &RobustStatistics, k: usize, d: &ComplexVector, p: f64, gamma: f64, headroom: &[f64]) -> f64 {
    let mut p = p;
    for (n, h) in headroom.iter().enumerate() {
        let load = d[n].norm_sqr();
        if load > 0.0 {
            p = p.min(h / load);
        }
    }
    let leak = stats.expected_leakage(k, d);
    if leak > 0.0 {
        p = p.min(gamma / leak);
    }
    p.max(0.0)
}

/// MALC-PA / RALC-PA: starting from ZF-PA, alternate a GP power update and
/// sequential per-user beam updates under the per-antenna headroom left by
/// the users before them, keeping the iterate with the best surrogate rate.
pub fn algo1<R: Rng + ?Sized>(
    csi: &QuantizedCsi,
    config: &SystemConfig,
    kind: ThresholdKind,
    settings: &SolverSettings,
    rng: &mut R,
) -> Result<BeamformingSolution> {
    let scheme = match kind {
        ThresholdKind::Malc => Scheme::MalcPa,
        ThresholdKind::Ralc => Scheme::RalcPa,
    };
    let stats = build_statistics(csi);
    let score = |p: &[f64], d: &[ComplexVector]| surrogate_rate(&stats, p, d, &config.alpha, config.noise_power);
    let k_users = csi.k();

    let mut init = zf_pa(csi, config, settings)?;
    init.scheme = scheme;
    init.thresholds = Some(leakage_thresholds(kind, &init.powers, csi, config)?);
    let s0 = score(&init.powers, &init.directions);
    let mut state = AlgoState {
        l: 0,
        powers: init.powers.clone(),
        directions: init.directions.clone(),
        perf_metric: s0,
        best_solution: init,
    };
    let mut diag = state.best_solution.diagnostics.clone();
    diag.best_so_far.push(s0);
    diag.surrogate.push(s0);

    for l in 0..config.l_algo1 {
        state.l = l;
        // power update with caps from the current powers
        let gammas = leakage_thresholds(kind, &state.powers, csi, config)?;
        let problem = gp_problem(&stats, &state.directions, &gammas, config);
        let powers = match solve_gp_power(&problem, &state.powers, config.epsilon, settings) {
            Ok(gp) => {
                diag.gp_iterations += gp.iterations;
                diag.pd_traces.push(gp.pd_trace);
                gp.powers
            }
            Err(e) => {
                log::warn!("power update failed at outer iteration {l} ({e}); keeping the current powers");
                diag.fallbacks += 1;
                state.powers.clone()
            }
        };

        // beam update in descending power order
        let gammas = leakage_thresholds(kind, &powers, csi, config)?;
        let mut order: Vec<usize> = (0..k_users).collect();
        order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]));
        let mut used = vec![0.0; config.n];
        let mut next_powers = powers.clone();
        let mut next_dirs = state.directions.clone();
        for &k in &order {
            let headroom: Vec<f64> = config
                .antenna_power
                .iter()
                .zip(&used)
                .map(|(cap, u)| (cap - u).max(0.0))
                .collect();
            let prev = &state.directions[k];
            let (p, d) = match solve_leakage_constrained_pa(
                &stats.u[k],
                &stats.u_bar[k],
                gammas[k],
                powers[k],
                &headroom,
                config.l_rand,
                rng,
                settings,
            ) {
                Ok(beam) => split_beam(&beam.w, prev),
                Err(e) => {
                    log::warn!("beam update of user {k} failed ({e}); keeping its previous direction");
                    diag.fallbacks += 1;
                    (fitting_power(&stats, k, prev, powers[k], gammas[k], &headroom), prev.clone())
                }
            };
            for (n, u) in used.iter_mut().enumerate() {
                *u += p * d[n].norm_sqr();
            }
            next_powers[k] = p;
            next_dirs[k] = d;
        }

        let s = score(&next_powers, &next_dirs);
        diag.surrogate.push(s);
        state.powers = next_powers;
        state.directions = next_dirs;
        if s > state.perf_metric {
            state.perf_metric = s;
            state.best_solution = BeamformingSolution {
                powers: state.powers.clone(),
                directions: state.directions.clone(),
                scheme,
                thresholds: Some(gammas),
                diagnostics: Default::default(),
            };
        }
        diag.best_so_far.push(state.perf_metric);
        diag.outer_iterations = l + 1;
    }
    let mut best = state.best_solution;
    best.diagnostics = diag;
    Ok(best)
}
