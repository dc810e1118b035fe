//! Quick invariant checks behind the `verify` subcommand.

use std::fmt;

use leakbf::beamforming::{build_statistics, zf, Scheme};
use leakbf::channel::{eta, generate_channel, quantize_channel};
use leakbf::evaluation::{average_over_trials, run_trial};
use leakbf::leakage::LeakageDistribution;
use leakbf::linalg::{row, HermitianMatrix};
use leakbf::rng::{stream, Purpose};
use leakbf::solvers::{solve_sdp, SdpProblem, SolverSettings};
use leakbf::SystemConfig;
use rand::Rng;

use crate::error::SimError;
use crate::recipes::{cdf_samples, ks_distance, Quantity};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn random_psd<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let v = leakbf::channel::complex_gaussian_vector(n, rng);
    let w = leakbf::channel::complex_gaussian_vector(n, rng);
    let mut m = HermitianMatrix::outer(&v);
    m.add_scaled(&HermitianMatrix::outer(&w), 1.0);
    m
}

/// Run every check with `trials` channel trials where trials apply.
pub fn run_checks(trials: usize, seed: u64) -> Result<Vec<Check>, SimError> {
    let settings = SolverSettings::default();
    let mut out = Vec::new();

    let (e2, e4) = (eta(2, 0)?, eta(4, 0)?);
    out.push(check("eta closed form", e2 == 0.5 && e4 == 0.75, format!("eta(2,0)={e2}, eta(4,0)={e4}")));

    let dist = LeakageDistribution::new(4, 6)?;
    let sorted = cdf_samples(Quantity::V, 4, 6, 20_000, seed, 0)?;
    let ks = ks_distance(&sorted, |x| dist.cdf_v(x.clamp(0.0, 1.0)).map_or(f64::NAN, |c| c.value));
    out.push(check("P_V against sampling (N=4, B=6)", ks <= 0.02, format!("KS distance {ks:.4} (bound 0.02)")));

    let config = SystemConfig::default();
    let mut worst = 0.0f64;
    for t in 0..trials as u64 {
        let ch = generate_channel(&config, &mut stream(seed, t, 0, Purpose::Channel));
        let csi = quantize_channel(&ch, &config, &mut stream(seed, t, 0, Purpose::Codebook))?;
        let sol = zf(&csi, &config.equal_ue_powers())?;
        let h = csi.h_check_matrix();
        for k in 0..config.k {
            for j in (0..config.k).filter(|&j| j != k) {
                let r = row(&h, j);
                let v: leakbf::linalg::C64 = r.iter().zip(sol.directions[k].iter()).map(|(a, b)| a * b).sum();
                worst = worst.max(v.norm());
            }
        }
        let stats = build_statistics(&csi);
        let floor = stats.eta / (config.n as f64 - 1.0);
        for u in &stats.u {
            worst = worst.max(if leakbf::linalg::min_eigenvalue(u) >= floor * (1.0 - 1e-9) { 0.0 } else { 1.0 });
        }
    }
    out.push(check("ZF orthogonality and U_k floor", worst <= 1e-9, format!("worst residual {worst:.2e}")));

    let mut rng = stream(seed, 0, 0, Purpose::Diagnostics);
    let mut worst_gap = 0.0f64;
    let mut worst_violation = 0.0f64;
    for case in 0..trials.max(1) {
        let n = 2 + case % 7;
        let mut constraints = vec![(HermitianMatrix::identity(n), rng.random_range(0.5..3.0))];
        for _ in 0..case % 4 {
            constraints.push((random_psd(n, &mut rng), rng.random_range(0.1..2.0)));
        }
        let p = SdpProblem { dim: n, objective: random_psd(n, &mut rng), constraints, element_caps: Vec::new() };
        let s = solve_sdp(&p, &settings).map_err(leakbf::Error::from)?;
        worst_gap = worst_gap.max(s.relative_gap());
        worst_violation = worst_violation.max(s.max_constraint_violation);
    }
    out.push(check(
        "SDP certificates",
        worst_gap <= settings.gap_tol && worst_violation <= settings.feasibility_tol,
        format!("worst relative gap {worst_gap:.2e}, worst violation {worst_violation:.2e}"),
    ));

    for scheme in [Scheme::Malc, Scheme::Ralc, Scheme::ZfPa, Scheme::MalcPa] {
        let cfg = SystemConfig { seed, l_rand: 200, ..SystemConfig::default() }.with_snr_db(20.0);
        let s = average_over_trials(scheme, &cfg, trials.min(20), &settings)?;
        let ok = s.trials.iter().all(|t| t.audit.passes(1e-7));
        out.push(check(
            "constraint audit",
            ok,
            format!(
                "{scheme}: antenna {:.1e}, sum power {:.1e}, leakage {:.1e}",
                s.max_antenna_violation, s.max_sum_power_violation, s.max_leakage_violation
            ),
        ));
    }

    let cfg = SystemConfig { seed, ..SystemConfig::default() };
    let a = run_trial(Scheme::RalcPa, &cfg, 3, &settings)?;
    let b = run_trial(Scheme::RalcPa, &cfg, 3, &settings)?;
    out.push(check("replay", a == b, format!("rate {}", a.weighted_sum_rate)));
    Ok(out)
}
