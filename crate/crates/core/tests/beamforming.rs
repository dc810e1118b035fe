mod common;

use common::*;
use leakbf::beamforming::{
    algo1, aslnr, build_statistics, design, leakage_controlled, leakage_thresholds, slnr, surrogate_rate, zf, zf_pa,
    BeamformingSolution, Diagnostics, Scheme,
};
use leakbf::channel::{eta, generate_channel, quantize_channel, sample_true_direction, QuantizedCsi};
use leakbf::evaluation::{audit_constraints, average_over_trials, run_trial, weighted_sum_rate};
use leakbf::leakage::ThresholdKind;
use leakbf::linalg::{column, gram_of_row, hermitian_eig, min_eigenvalue, pseudo_inverse, top_eigenpair, ComplexVector, HermitianMatrix, C64};
use leakbf::solvers::SolverSettings;
use leakbf::{CmiMode, Error, SystemConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn csi_for(config: &SystemConfig, seed: u64) -> QuantizedCsi {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = generate_channel(config, &mut rng);
    quantize_channel(&ch, config, &mut rng).unwrap()
}

fn unit(v: ComplexVector) -> ComplexVector {
    let n = v.norm();
    v.unscale(n)
}

fn row_times(h: &ComplexVector, w: &ComplexVector) -> C64 {
    h.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn statistics_zero_bits_n4() {
    let mut config = SystemConfig::default();
    config.cdi_bits = 0;
    let csi = csi_for(&config, 3);
    assert_eq!(csi.eta, 0.75);
    let stats = build_statistics(&csi);
    for k in 0..4 {
        // 1 - N eta/(N-1) vanishes, leaving an isotropic quadratic form
        let expected = HermitianMatrix::identity(4).scale(0.25);
        assert!((stats.u[k].matrix() - expected.matrix()).norm() < 1e-14);
    }
}

#[test]
fn statistics_positive_definite_and_rebuilt() {
    for seed in 0..20 {
        let csi = csi_for(&SystemConfig::default(), seed);
        let stats = build_statistics(&csi);
        let floor = stats.eta / 3.0;
        for k in 0..4 {
            assert!(min_eigenvalue(&stats.u[k]) >= floor * (1.0 - 1e-9));
            let mut rebuilt = HermitianMatrix::zeros(4);
            for j in (0..4).filter(|&j| j != k) {
                rebuilt.add_scaled(&stats.u[j], csi.xi_sq[j] * csi.cmi[j]);
            }
            assert_eq!(rebuilt, stats.u_bar[k]);
        }
    }
}

#[test]
fn statistics_match_direction_sampling() {
    let mut config = SystemConfig::default();
    config.xi = vec![1.0, 0.7, 1.3, 0.9];
    let csi = csi_for(&config, 11);
    let stats = build_statistics(&csi);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = random_vector(4, &mut rng);
    let samples = 100_000;
    let k = 1;
    let signal: Vec<f64> = (0..samples)
        .map(|_| {
            let h = sample_true_direction(&csi.h_hat[k], 4, 6, &mut rng);
            csi.xi_sq[k] * csi.cmi[k] * row_times(&h, &w).norm_sqr()
        })
        .collect();
    let leakage: Vec<f64> = (0..samples)
        .map(|_| {
            (0..4)
                .filter(|&j| j != k)
                .map(|j| {
                    let h = sample_true_direction(&csi.h_hat[j], 4, 6, &mut rng);
                    csi.xi_sq[j] * csi.cmi[j] * row_times(&h, &w).norm_sqr()
                })
                .sum()
        })
        .collect();
    let (ms, ss) = mean_sd(&signal);
    let (ml, sl) = mean_sd(&leakage);
    assert!((ms - stats.expected_power(k, &w)).abs() <= 3.0 * ss, "{ms} vs {}", stats.expected_power(k, &w));
    assert!((ml - stats.expected_leakage(k, &w)).abs() <= 3.0 * sl, "{ml} vs {}", stats.expected_leakage(k, &w));
}

#[test]
fn statistics_exact_cdi_limit() {
    let mut config = SystemConfig::default();
    config.perfect_cdi = true;
    let csi = csi_for(&config, 4);
    let stats = build_statistics(&csi);
    for k in 0..4 {
        assert!((stats.u[k].matrix() - gram_of_row(&csi.h_hat[k]).matrix()).norm() < 1e-14);
    }
}

#[test]
fn zf_orthogonality() {
    for seed in 0..50 {
        let config = SystemConfig::default();
        let csi = csi_for(&config, seed);
        let sol = zf(&csi, &config.equal_ue_powers()).unwrap();
        let h = csi.h_check_matrix();
        for k in 0..4 {
            assert!((sol.directions[k].norm() - 1.0).abs() < 1e-12);
            for j in (0..4).filter(|&j| j != k) {
                let r = leakbf::linalg::row(&h, j);
                assert!(row_times(&r, &sol.directions[k]).norm() <= 1e-9);
            }
        }
    }
}

#[test]
fn zf_single_user_and_rank_deficiency() {
    let mut config = SystemConfig::default();
    config.k = 1;
    config.alpha = vec![1.0];
    config.xi = vec![1.0];
    let csi = csi_for(&config, 5);
    let sol = zf(&csi, &[1.0]).unwrap();
    let g = row_times(&csi.h_hat[0], &sol.directions[0]).norm();
    assert!((g - 1.0).abs() < 1e-12);

    let mut dup = csi_for(&SystemConfig::default(), 6);
    dup.h_hat[1] = dup.h_hat[0].clone();
    assert!(matches!(zf(&dup, &[1.0; 4]), Err(Error::Singular(_))));
}

fn slnr_value(signal: &HermitianMatrix, leak: &HermitianMatrix, w: &ComplexVector) -> f64 {
    signal.quad_form(w) / leak.quad_form(w)
}

#[test]
fn slnr_beats_random_search() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 21);
    let powers = config.equal_ue_powers();
    let sol = slnr(&csi, &powers, &config).unwrap();
    let h = csi.h_check_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for k in 0..4 {
        let signal = gram_of_row(&leakbf::linalg::row(&h, k));
        let mut leak = HermitianMatrix::identity(4).scale(config.noise_power / powers[k]);
        for j in (0..4).filter(|&j| j != k) {
            leak.add_scaled(&gram_of_row(&leakbf::linalg::row(&h, j)), 1.0);
        }
        let got = slnr_value(&signal, &leak, &sol.directions[k]);
        let best = (0..100_000)
            .map(|_| slnr_value(&signal, &leak, &unit(random_vector(4, &mut rng))))
            .fold(0.0, f64::max);
        assert!(got >= best * (1.0 - 1e-12), "user {k}: {got} < {best}");
    }
}

#[test]
fn aslnr_beats_random_search() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 23);
    let stats = build_statistics(&csi);
    let powers = config.equal_ue_powers();
    let sol = aslnr(&stats, &powers, &config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for k in 0..4 {
        let signal = stats.u[k].scale(stats.xi_sq[k] * stats.a[k]);
        let leak = HermitianMatrix::identity(4).scale(config.noise_power / powers[k]).add(&stats.u_bar[k]);
        let got = slnr_value(&signal, &leak, &sol.directions[k]);
        let best = (0..100_000)
            .map(|_| slnr_value(&signal, &leak, &unit(random_vector(4, &mut rng))))
            .fold(0.0, f64::max);
        assert!(got >= best * (1.0 - 1e-12), "user {k}: {got} < {best}");
    }
}

#[test]
fn single_user_slnr_and_aslnr_are_matched_filters() {
    let mut config = SystemConfig::default();
    config.k = 1;
    config.alpha = vec![1.0];
    config.xi = vec![1.0];
    let csi = csi_for(&config, 25);
    let p = config.equal_ue_powers();
    for sol in [slnr(&csi, &p, &config).unwrap(), aslnr(&build_statistics(&csi), &p, &config).unwrap()] {
        let g = row_times(&csi.h_hat[0], &sol.directions[0]).norm();
        assert!((g - 1.0).abs() < 1e-10, "{g}");
    }
}

#[test]
fn slnr_high_noise_is_matched_filter() {
    let mut config = SystemConfig::default();
    config.noise_power = 1e12;
    config.set_snr_db(-100.0);
    let csi = csi_for(&config, 26);
    let sol = slnr(&csi, &[1.0; 4], &config).unwrap();
    for k in 0..4 {
        let g = row_times(&csi.h_hat[k], &sol.directions[k]).norm();
        assert!((g - 1.0).abs() < 1e-6, "{g}");
    }
}

#[test]
fn zf_pa_single_user_equal_magnitudes_uses_full_power() {
    let mut config = SystemConfig::default();
    config.k = 1;
    config.alpha = vec![1.0];
    config.xi = vec![1.0];
    config.set_snr_db(10.0);
    let phases = [0.3, -1.1, 2.0, 0.7];
    let h = ComplexVector::from_iterator(4, phases.iter().map(|p| C64::from_polar(0.5, *p)));
    let csi = QuantizedCsi {
        h_hat: vec![h.clone()],
        cmi: vec![4.0],
        xi_sq: vec![1.0],
        cdi_bits: 6,
        cmi_mode: CmiMode::Average,
        eta: eta(4, 6).unwrap(),
    };
    let sol = zf_pa(&csi, &config, &SolverSettings::default()).unwrap();
    let p = config.total_power();
    assert!((sol.powers[0] - p).abs() <= 1e-6 * p, "{} vs {p}", sol.powers[0]);
    for (load, cap) in sol.antenna_loads().iter().zip(&config.antenna_power) {
        assert!((load - cap).abs() <= 1e-6 * cap);
    }
    let g = row_times(&h, &sol.directions[0]).norm();
    assert!((g - 1.0).abs() < 1e-6);
}

#[test]
fn zf_pa_symmetric_instance_gives_symmetric_allocation() {
    let config = SystemConfig::default();
    let basis: Vec<ComplexVector> = (0..4)
        .map(|k| ComplexVector::from_fn(4, |n, _| C64::from_polar(0.5, std::f64::consts::FRAC_PI_2 * (k * n) as f64)))
        .collect();
    let csi = QuantizedCsi {
        h_hat: basis,
        cmi: vec![4.0; 4],
        xi_sq: vec![1.0; 4],
        cdi_bits: 6,
        cmi_mode: CmiMode::Average,
        eta: eta(4, 6).unwrap(),
    };
    let mut sym = config;
    sym.alpha = vec![1.0; 4];
    let sol = zf_pa(&csi, &sym, &SolverSettings::default()).unwrap();
    let p = sym.total_power() / 4.0;
    for k in 0..4 {
        assert!((sol.powers[k] - p).abs() <= 1e-6 * p, "{:?}", sol.powers);
    }
}

#[test]
fn zf_pa_nulls_interference_and_meets_caps() {
    let settings = SolverSettings::default();
    for seed in 0..30 {
        let config = SystemConfig::default().with_snr_db([0.0, 10.0, 20.0][seed as usize % 3]);
        let csi = csi_for(&config, 100 + seed);
        let sol = zf_pa(&csi, &config, &settings).unwrap();
        let h = csi.h_check_matrix();
        for k in 0..4 {
            let w = sol.beam(k);
            for j in (0..4).filter(|&j| j != k) {
                let r = leakbf::linalg::row(&h, j);
                assert!(row_times(&r, &w).norm_sqr() <= 1e-7, "seed {seed}");
            }
        }
        let audit = audit_constraints(&sol, &config, None);
        assert!(audit.passes(1e-7), "seed {seed}: {audit:?}");
    }
}

#[test]
fn leakage_controlled_with_loose_cap_is_top_eigenvector() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 31);
    let stats = build_statistics(&csi);
    let powers = config.equal_ue_powers();
    let sol = leakage_controlled(&stats, &powers, &[1e12; 4], &SolverSettings::default()).unwrap();
    for k in 0..4 {
        let (lam, _) = top_eigenpair(&stats.u[k]);
        let got = stats.u[k].quad_form(&sol.directions[k]);
        assert!((got - lam).abs() <= 1e-8 * lam);
        assert!((sol.powers[k] - powers[k]).abs() <= 1e-8 * powers[k]);
    }
}

#[test]
fn leakage_controlled_caps_hold_and_bind() {
    let settings = SolverSettings::default();
    for (seed, kind) in (0..20).zip([ThresholdKind::Malc, ThresholdKind::Ralc].into_iter().cycle()) {
        let config = SystemConfig::default().with_snr_db(20.0);
        let csi = csi_for(&config, 200 + seed);
        let stats = build_statistics(&csi);
        let powers = config.equal_ue_powers();
        let gammas = leakage_thresholds(kind, &powers, &csi, &config).unwrap();
        let sol = leakage_controlled(&stats, &powers, &gammas, &settings).unwrap();
        let audit = audit_constraints(&sol, &config, Some(&stats));
        assert!(audit.passes(1e-7), "seed {seed}: {audit:?}");
        for k in 0..4 {
            assert!(sol.powers[k] <= powers[k] * (1.0 + 1e-7));
            let unconstrained = top_eigenpair(&stats.u[k]).0;
            let got = stats.u[k].quad_form(&sol.directions[k]);
            // the cap binds: the signal is strictly below the unconstrained maximum
            if got < unconstrained * (1.0 - 1e-6) {
                let leak = stats.expected_leakage(k, &sol.beam(k));
                assert!(leak >= gammas[k] * (1.0 - 1e-5), "seed {seed} user {k}: {leak} vs {}", gammas[k]);
            }
        }
    }
}

#[test]
fn malc_cap_is_active_with_zero_bits() {
    let mut config = SystemConfig::default();
    config.cdi_bits = 0;
    let csi = csi_for(&config, 41);
    let stats = build_statistics(&csi);
    let powers = config.equal_ue_powers();
    let gammas = leakage_thresholds(ThresholdKind::Malc, &powers, &csi, &config).unwrap();
    let sol = leakage_controlled(&stats, &powers, &gammas, &SolverSettings::default()).unwrap();
    for k in 0..4 {
        assert!((sol.powers[k] - powers[k]).abs() <= 1e-6 * powers[k]);
        let leak = stats.expected_leakage(k, &sol.beam(k));
        assert!((leak - gammas[k]).abs() <= 1e-6 * gammas[k], "{leak} vs {}", gammas[k]);
    }
}

#[test]
fn plc_uses_scaled_threshold() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 42);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sol = design(Scheme::Plc, &csi, &config, &SolverSettings::default(), &mut rng).unwrap();
    let gammas = sol.thresholds.unwrap();
    assert!(gammas.iter().all(|g| (g - 0.045).abs() < 1e-15));
}

#[test]
fn thresholds_single_user_are_zero() {
    let mut config = SystemConfig::default();
    config.k = 1;
    config.alpha = vec![1.0];
    config.xi = vec![1.0];
    let csi = csi_for(&config, 43);
    for kind in [ThresholdKind::Malc, ThresholdKind::Ralc] {
        assert_eq!(leakage_thresholds(kind, &[2.0], &csi, &config).unwrap(), vec![0.0]);
    }
}

#[test]
fn thresholds_average_and_quantized_modes() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 44);
    let p = 2.5;
    let malc = leakage_thresholds(ThresholdKind::Malc, &[p; 4], &csi, &config).unwrap();
    let ralc = leakage_thresholds(ThresholdKind::Ralc, &[p; 4], &csi, &config).unwrap();
    let eta = eta(4, 6).unwrap();
    for k in 0..4 {
        assert!((malc[k] - 4.0 * p * eta).abs() < 1e-12 * malc[k]);
        assert!(ralc[k] > malc[k]);
    }
    let mut quant = config.clone();
    quant.cmi_mode = CmiMode::Quantized;
    let mut qcsi = csi.clone();
    qcsi.cmi_mode = CmiMode::Quantized;
    let q = leakage_thresholds(ThresholdKind::Malc, &[p; 4], &qcsi, &quant).unwrap();
    for k in 0..4 {
        assert!((q[k] - malc[k]).abs() < 1e-12 * malc[k]);
    }
}

#[test]
fn relaxed_threshold_grows_with_delta_and_rejects_low_delta() {
    let config = SystemConfig::default();
    let csi = csi_for(&config, 45);
    let mut last = 0.0;
    for delta in [0.65, 0.7, 0.8, 0.9, 0.99] {
        let mut c = config.clone();
        c.delta = delta;
        let g = leakage_thresholds(ThresholdKind::Ralc, &[1.0; 4], &csi, &c).unwrap()[0];
        assert!(g >= last);
        last = g;
    }
    let mut low = config.clone();
    low.delta = 0.05;
    let err = leakage_thresholds(ThresholdKind::Ralc, &[1.0; 4], &csi, &low).unwrap_err();
    assert!(matches!(err, Error::Config(ref m) if m.contains("admissible")), "{err}");
}

#[test]
fn algo1_without_iterations_is_zf_pa() {
    let mut config = SystemConfig::default().with_snr_db(20.0);
    config.l_algo1 = 0;
    let csi = csi_for(&config, 51);
    let settings = SolverSettings::default();
    let init = zf_pa(&csi, &config, &settings).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sol = algo1(&csi, &config, ThresholdKind::Malc, &settings, &mut rng).unwrap();
    assert_eq!(sol.powers, init.powers);
    assert_eq!(sol.directions, init.directions);
    assert_eq!(sol.scheme, Scheme::MalcPa);
    assert_eq!(sol.diagnostics.best_so_far.len(), 1);
}

#[test]
fn algo1_best_so_far_and_caps() {
    let settings = SolverSettings::default();
    for seed in 0..6 {
        let mut config = SystemConfig::default().with_snr_db([10.0, 20.0][seed as usize % 2]);
        config.l_rand = 200;
        let csi = csi_for(&config, 300 + seed);
        let kind = if seed % 3 == 0 { ThresholdKind::Malc } else { ThresholdKind::Ralc };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sol = algo1(&csi, &config, kind, &settings, &mut rng).unwrap();
        let d = &sol.diagnostics;
        assert_eq!(d.best_so_far.len(), config.l_algo1 + 1);
        assert!(d.best_so_far.windows(2).all(|w| w[1] >= w[0]));
        let stats = build_statistics(&csi);
        let f = surrogate_rate(&stats, &sol.powers, &sol.directions, &config.alpha, config.noise_power);
        assert_eq!(f, *d.best_so_far.last().unwrap());
        assert!(f >= d.surrogate[0]);
        let audit = audit_constraints(&sol, &config, Some(&stats));
        assert!(audit.max_antenna_violation <= 1e-7, "seed {seed}: {audit:?}");
        assert!(audit.max_leakage_violation <= 1e-7, "seed {seed}: {audit:?}");
    }
}

#[test]
fn rate_of_single_user_matched_filter() {
    let mut config = SystemConfig::default().with_snr_db(7.0);
    config.k = 1;
    config.alpha = vec![0.8];
    config.xi = vec![1.3];
    let ch = generate_channel(&config, &mut ChaCha8Rng::seed_from_u64(61));
    let h = ch.row(0);
    let a = h.norm_squared();
    let dir = unit(h.map(|c| c.conj()));
    let p = config.total_power();
    let sol = BeamformingSolution {
        powers: vec![p],
        directions: vec![dir],
        scheme: Scheme::Zf,
        thresholds: None,
        diagnostics: Diagnostics::default(),
    };
    let expected = 0.8 * (1.0 + 1.69 * a * p / config.noise_power).log2();
    assert!((weighted_sum_rate(&ch, &sol, &config) - expected).abs() < 1e-12);
}

#[test]
fn perfect_csi_zf_rate_matches_pseudo_inverse_formula() {
    let mut config = SystemConfig::default().with_snr_db(15.0);
    config.perfect_cdi = true;
    config.cmi_mode = CmiMode::Perfect;
    config.xi = vec![1.0, 0.5, 2.0, 1.2];
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let ch = generate_channel(&config, &mut rng);
    let csi = quantize_channel(&ch, &config, &mut rng).unwrap();
    let p = config.equal_ue_powers();
    let sol = zf(&csi, &p).unwrap();
    let pinv = pseudo_inverse(&ch.h).unwrap();
    let expected: f64 = (0..4)
        .map(|k| {
            let col = column(&pinv, k).norm_squared();
            config.alpha[k] * (1.0 + p[k] * config.xi[k].powi(2) / (config.noise_power * col)).log2()
        })
        .sum();
    let got = weighted_sum_rate(&ch, &sol, &config);
    assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
    let beams = sol.beams();
    for k in 0..4 {
        let signal = row_times(&ch.row(k), &beams[k]).norm_sqr();
        for j in (0..4).filter(|&j| j != k) {
            assert!(row_times(&ch.row(k), &beams[j]).norm_sqr() <= 1e-12 * signal);
        }
    }
}

#[test]
fn audit_flags_violations() {
    let config = SystemConfig::default();
    let cap = config.antenna_power[0];
    let mut dir = ComplexVector::zeros(4);
    dir[0] = C64::new(1.0, 0.0);
    let sol = BeamformingSolution {
        powers: vec![2.0 * cap, 0.0, 0.0, 0.0],
        directions: vec![dir.clone(); 4],
        scheme: Scheme::ZfPa,
        thresholds: None,
        diagnostics: Diagnostics::default(),
    };
    let audit = audit_constraints(&sol, &config, None);
    assert!((audit.max_antenna_violation - 1.0).abs() < 1e-12);
    assert!(!audit.passes(1e-7));

    let csi = csi_for(&config, 63);
    let stats = build_statistics(&csi);
    let leaky = BeamformingSolution {
        scheme: Scheme::Malc,
        powers: vec![1.0; 4],
        thresholds: Some(vec![0.0; 4]),
        ..sol
    };
    assert!(audit_constraints(&leaky, &config, Some(&stats)).max_leakage_violation > 1.0);
}

#[test]
fn zf_pa_trials_pass_audits() {
    let config = SystemConfig::default().with_snr_db(20.0);
    let summary = average_over_trials(Scheme::ZfPa, &config, 100, &SolverSettings::default()).unwrap();
    assert!(summary.max_antenna_violation <= 1e-7, "{}", summary.max_antenna_violation);
    assert!(summary.trials.iter().all(|t| t.audit.passes(1e-7)));
}

#[test]
fn averaging_is_deterministic() {
    let config = SystemConfig::default().with_snr_db(10.0);
    let settings = SolverSettings::default();
    let a = average_over_trials(Scheme::Malc, &config, 16, &settings).unwrap();
    let b = average_over_trials(Scheme::Malc, &config, 16, &settings).unwrap();
    assert_eq!(a, b);
    let single = run_trial(Scheme::Malc, &config, 5, &settings).unwrap();
    assert_eq!(single, a.trials[5]);
}

#[test]
fn zf_rate_vanishes_at_low_snr() {
    let config = SystemConfig::default().with_snr_db(-60.0);
    let s = average_over_trials(Scheme::Zf, &config, 8, &SolverSettings::default()).unwrap();
    assert!(s.mean_rate >= 0.0 && s.mean_rate < 1e-4, "{}", s.mean_rate);
}

#[test]
fn fixed_codebook_is_shared_across_trials() {
    let mut config = SystemConfig::default();
    config.fixed_codebook = true;
    config.cdi_bits = 1;
    let settings = SolverSettings::default();
    let a = run_trial(Scheme::Zf, &config, 0, &settings).unwrap();
    let b = run_trial(Scheme::Zf, &config, 1, &settings).unwrap();
    assert_ne!(a.weighted_sum_rate, b.weighted_sum_rate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_have_unit_directions_and_respect_budgets(seed in 0u64..10_000, snr in -5.0f64..25.0, pick in 0usize..7) {
        let schemes = [Scheme::Zf, Scheme::Slnr, Scheme::Aslnr, Scheme::Plc, Scheme::Malc, Scheme::Ralc, Scheme::ZfPa];
        let scheme = schemes[pick];
        let config = SystemConfig::default().with_snr_db(snr);
        let csi = csi_for(&config, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sol = design(scheme, &csi, &config, &SolverSettings::default(), &mut rng).unwrap();
        let stats = build_statistics(&csi);
        let audit = audit_constraints(&sol, &config, Some(&stats));
        prop_assert!(audit.passes(1e-7), "{:?}", audit);
        prop_assert!(sol.powers.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn u_matrices_are_positive_definite(seed in 0u64..10_000, bits in 0u32..10) {
        let mut config = SystemConfig::default();
        config.cdi_bits = bits;
        let csi = csi_for(&config, seed);
        let stats = build_statistics(&csi);
        let floor = stats.eta / 3.0;
        for u in &stats.u {
            let (evals, _) = hermitian_eig(u);
            prop_assert!(evals.iter().all(|e| *e >= floor * (1.0 - 1e-9)));
        }
    }
}
