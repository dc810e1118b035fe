//! Sweeps and figure recipes.

use rayon::prelude::*;

use leakbf::beamforming::Scheme;
use leakbf::channel::{complex_gaussian_vector, quantize_cdi, sample_nullspace_direction, RvqCodebook};
use leakbf::evaluation::{average_over_trials, mean_and_half_width, TrialSummary};
use leakbf::leakage::LeakageDistribution;
use leakbf::rng::{stream, Purpose, SimRng, RUN_WIDE};
use leakbf::solvers::SolverSettings;
use leakbf::{CmiMode, SystemConfig};

use crate::error::SimError;
use crate::output::{Cell, Table};
use crate::spec::{ExperimentSpec, Recipe};

/// `(N, B)` pairs of the CDF figures.
pub const CDF_PAIRS: [(usize, u32); 4] = [(2, 2), (2, 4), (4, 4), (4, 6)];

/// Points per CDF curve.
pub const CDF_GRID: usize = 200;

pub const RATE_COLUMNS: &[&str] = &[
    "scheme",
    "variant",
    "cdi_bits",
    "cmi_mode",
    "snr_db",
    "trials",
    "mean_rate",
    "ci_half_width",
    "mean_surrogate",
    "mean_gp_iterations",
    "mean_outer_iterations",
    "max_antenna_violation",
    "max_sum_power_violation",
    "max_leakage_violation",
    "fallbacks",
];

pub const GP_COLUMNS: &[&str] = &[
    "scheme",
    "snr_db",
    "iteration",
    "mean_pd_metric",
    "mean_pd_metric_db",
    "active_trials",
    "converged_fraction",
];

pub const ALGO_COLUMNS: &[&str] = &[
    "scheme",
    "snr_db",
    "l",
    "mean_perf_metric",
    "ci_half_width",
    "mean_iterate_surrogate",
    "stabilized_fraction",
];

pub const CDF_COLUMNS: &[&str] = &["quantity", "n", "cdi_bits", "x", "analytical", "empirical", "method"];

/// One evaluated (variant, scheme, SNR) point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub variant: String,
    pub config: SystemConfig,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub summary: TrialSummary,
}

struct Variant {
    label: String,
    config: SystemConfig,
    schemes: Vec<Scheme>,
}

fn variants(spec: &ExperimentSpec) -> Vec<Variant> {
    let base = |label: String, config: SystemConfig| Variant { label, config, schemes: spec.schemes.clone() };
    match spec.recipe {
        Some(Recipe::Fig7) => CmiMode::ALL
            .into_iter()
            .map(|mode| {
                let mut c = spec.config.clone();
                c.cmi_mode = mode;
                base(mode.name().to_string(), c)
            })
            .collect(),
        Some(Recipe::Fig8) => {
            let mut out = vec![base(format!("cdi-{}", spec.config.cdi_bits), spec.config.clone())];
            if spec.config.cdi_bits != 12 {
                let mut c = spec.config.clone();
                c.cdi_bits = 12;
                out.push(base("cdi-12".into(), c));
            }
            if spec.schemes.contains(&Scheme::ZfPa) {
                let mut c = spec.config.clone();
                c.perfect_cdi = true;
                c.cmi_mode = CmiMode::Perfect;
                out.push(Variant { label: "perfect-csi".into(), config: c, schemes: vec![Scheme::ZfPa] });
            }
            out
        }
        _ => vec![base("base".into(), spec.config.clone())],
    }
}

/// Average every (variant, scheme, SNR) point of the experiment.
pub fn sweep(spec: &ExperimentSpec, settings: &SolverSettings) -> Result<Vec<SweepPoint>, SimError> {
    if spec.schemes.is_empty() {
        return Err(SimError::Usage(format!(
            "no schemes selected (valid: {})",
            Scheme::ALL.map(|s| s.name()).join(", ")
        )));
    }
    let mut points = Vec::new();
    for v in variants(spec) {
        for &scheme in &v.schemes {
            for &snr in &spec.snr_db_grid {
                let config = v.config.clone().with_snr_db(snr);
                log::info!("{scheme} [{}] at {snr} dB, {} trials", v.label, spec.n_trials);
                let summary = average_over_trials(scheme, &config, spec.n_trials, settings)?;
                points.push(SweepPoint { variant: v.label.clone(), config, scheme, snr_db: snr, summary });
            }
        }
    }
    Ok(points)
}

pub fn rate_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(RATE_COLUMNS);
    for p in points {
        let s = &p.summary;
        t.push(vec![
            p.scheme.name().into(),
            p.variant.as_str().into(),
            p.config.cdi_bits.into(),
            p.config.cmi_mode.name().into(),
            p.snr_db.into(),
            s.n_trials.into(),
            s.mean_rate.into(),
            s.half_width.into(),
            s.mean_surrogate.into(),
            s.mean_gp_iterations.into(),
            s.mean_outer_iterations.into(),
            s.max_antenna_violation.into(),
            s.max_sum_power_violation.into(),
            s.max_leakage_violation.into(),
            s.fallbacks.into(),
        ]);
    }
    t
}

/// Trace of the first power update of every trial.
pub fn first_gp_traces(summary: &TrialSummary) -> Vec<&[f64]> {
    summary
        .trials
        .iter()
        .map(|t| t.pd_traces.first().map_or(&[][..], |v| v.as_slice()))
        .collect()
}

/// Mean PD metric per GP iteration, averaged over the trials still running.
pub fn gp_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(GP_COLUMNS);
    for p in points {
        let traces = first_gp_traces(&p.summary);
        let eps = p.config.epsilon;
        let longest = traces.iter().map(|tr| tr.len()).max().unwrap_or(0);
        for i in 0..longest {
            let active: Vec<f64> = traces.iter().filter_map(|tr| tr.get(i).copied()).collect();
            let mean = active.iter().sum::<f64>() / active.len() as f64;
            let converged = traces
                .iter()
                .filter(|tr| tr.iter().take(i + 1).any(|pd| *pd < eps))
                .count();
            t.push(vec![
                p.scheme.name().into(),
                p.snr_db.into(),
                (i + 1).into(),
                mean.into(),
                (10.0 * mean.log10()).into(),
                active.len().into(),
                (converged as f64 / traces.len() as f64).into(),
            ]);
        }
    }
    t
}

/// Whether the best-so-far sequence moves by less than `tol` (relative to
/// its final value) after index `l`.
pub fn stabilized_by(best: &[f64], l: usize, tol: f64) -> bool {
    let Some(last) = best.last() else {
        return false;
    };
    best.get(l).is_some_and(|v| (last - v).abs() <= tol * last.abs())
}

/// Best-so-far surrogate after every outer iteration.
pub fn algo_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(ALGO_COLUMNS);
    for p in points {
        let trials = &p.summary.trials;
        let len = trials.iter().map(|tr| tr.best_so_far.len()).min().unwrap_or(0);
        for l in 0..len {
            let best: Vec<f64> = trials.iter().map(|tr| tr.best_so_far[l]).collect();
            let (mean, hw) = mean_and_half_width(&best);
            let iterate: Vec<f64> = trials.iter().filter_map(|tr| tr.surrogate_trace.get(l).copied()).collect();
            let mean_iterate = iterate.iter().sum::<f64>() / iterate.len().max(1) as f64;
            let stable = trials.iter().filter(|tr| stabilized_by(&tr.best_so_far, l, 1e-3)).count();
            t.push(vec![
                p.scheme.name().into(),
                p.snr_db.into(),
                l.into(),
                mean.into(),
                hw.into(),
                mean_iterate.into(),
                (stable as f64 / trials.len() as f64).into(),
            ]);
        }
    }
    t
}

/// Leakage quantity of the CDF recipes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `V = |h~ w|^2` for a unit `w` orthogonal to the codeword.
    V,
    /// `D = ||h||^2 V`.
    D,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::V => "P_V",
            Quantity::D => "P_D",
        }
    }
}

/// Draw `(V, D)` from the physical model: a Rayleigh channel, a fresh RVQ
/// codebook and a unit beam isotropic in the orthogonal complement of the
/// selected codeword.
pub fn sample_leakage(n: usize, bits: u32, samples: usize, rng: &mut SimRng) -> Result<Vec<(f64, f64)>, SimError> {
    (0..samples)
        .map(|_| {
            let h = complex_gaussian_vector(n, rng);
            let codebook = RvqCodebook::random(n, bits, rng);
            let (_, c) = quantize_cdi(&h, &codebook)?;
            // zero row product with the codeword
            let w = sample_nullspace_direction(&c.map(|x| x.conj()), rng);
            let g: leakbf::linalg::C64 = h.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            let d = g.norm_sqr();
            Ok((d / h.norm_squared(), d))
        })
        .collect()
}

/// Fraction of sorted `samples` not exceeding `x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|s| *s <= x) as f64 / sorted.len() as f64
}

/// Kolmogorov-Smirnov distance between sorted samples and `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let len = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / len).abs().max((f - (i + 1) as f64 / len).abs())
        })
        .fold(0.0, f64::max)
}

/// Sorted samples of `quantity` for curve `index` of the CDF figures.
pub fn cdf_samples(quantity: Quantity, n: usize, bits: u32, samples: usize, seed: u64, index: u64) -> Result<Vec<f64>, SimError> {
    let mut rng = stream(seed, RUN_WIDE, index, Purpose::Diagnostics);
    let mut v: Vec<f64> = sample_leakage(n, bits, samples, &mut rng)?
        .into_iter()
        .map(|(v, d)| if quantity == Quantity::V { v } else { d })
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Analytical and empirical CDFs on a grid up to the 99.9% point.
pub fn cdf_table(spec: &ExperimentSpec, quantities: &[Quantity]) -> Result<Table, SimError> {
    let jobs: Vec<(Quantity, usize, (usize, u32))> = quantities
        .iter()
        .flat_map(|&q| CDF_PAIRS.iter().enumerate().map(move |(i, &p)| (q, i, p)))
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(q, i, (n, bits))| -> Result<Vec<Vec<Cell>>, SimError> {
            let dist = LeakageDistribution::new(n, bits)?;
            let sorted = cdf_samples(q, n, bits, spec.n_trials, spec.config.seed, i as u64)?;
            let top = match q {
                Quantity::V => dist.quantile_v(0.999)?,
                Quantity::D => dist.quantile_d(0.999)?,
            };
            (1..=CDF_GRID)
                .map(|j| {
                    let x = top * j as f64 / CDF_GRID as f64;
                    let c = match q {
                        Quantity::V => dist.cdf_v(x.min(1.0))?,
                        Quantity::D => dist.cdf_d(x)?,
                    };
                    Ok(vec![
                        q.name().into(),
                        n.into(),
                        bits.into(),
                        x.into(),
                        c.value.into(),
                        empirical_cdf(&sorted, x).into(),
                        format!("{:?}", c.method).to_ascii_lowercase().into(),
                    ])
                })
                .collect()
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let mut t = Table::new(CDF_COLUMNS);
    for row in curves.into_iter().flatten() {
        t.push(row);
    }
    Ok(t)
}

/// Run the experiment recipe (or a plain sweep) and return its table.
pub fn run(spec: &ExperimentSpec, settings: &SolverSettings) -> Result<Table, SimError> {
    match spec.recipe {
        Some(Recipe::Fig2) => cdf_table(spec, &[Quantity::D]),
        Some(Recipe::Fig3) => cdf_table(spec, &[Quantity::V]),
        Some(Recipe::Fig5) => Ok(gp_table(&sweep(spec, settings)?)),
        Some(Recipe::Fig6) => Ok(algo_table(&sweep(spec, settings)?)),
        _ => Ok(rate_table(&sweep(spec, settings)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Assignments;

    #[test]
    fn empty_scheme_list_is_usage_error() {
        let spec = ExperimentSpec::parse("trials = 2", &Assignments::default()).unwrap();
        let err = run(&spec, &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, SimError::Usage(ref m) if m.contains("malc-pa")), "{err}");
    }

    #[test]
    fn stabilization() {
        assert!(stabilized_by(&[1.0, 2.0, 2.0005, 2.001], 1, 1e-3));
        assert!(!stabilized_by(&[1.0, 2.0, 2.5], 1, 1e-3));
        assert!(!stabilized_by(&[], 0, 1e-3));
    }

    #[test]
    fn empirical_and_ks() {
        let s = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(empirical_cdf(&s, 0.25), 0.5);
        assert_eq!(empirical_cdf(&s, 0.4), 1.0);
        assert!((ks_distance(&s, |x| x.clamp(0.0, 1.0)) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn fig8_variants() {
        let spec = ExperimentSpec::parse("recipe = fig8", &Assignments::default()).unwrap();
        let v = variants(&spec);
        let labels: Vec<&str> = v.iter().map(|v| v.label.as_str()).collect();
        assert_eq!(labels, ["cdi-6", "cdi-12", "perfect-csi"]);
        assert_eq!(v[2].schemes, vec![Scheme::ZfPa]);
    }
}
