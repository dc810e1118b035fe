//! Scenario parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the base station learns the channel-fading magnitude `||h_k||^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmiMode {
    /// No feedback; the mean `N` is used.
    Average,
    /// `M`-bit midpoint quantization of the chi-square law.
    Quantized,
    /// Exact `||h_k||^2`.
    Perfect,
}

impl CmiMode {
    pub const ALL: [CmiMode; 3] = [CmiMode::Average, CmiMode::Quantized, CmiMode::Perfect];

    pub fn name(self) -> &'static str {
        match self {
            CmiMode::Average => "average",
            CmiMode::Quantized => "quantized",
            CmiMode::Perfect => "perfect",
        }
    }
}

impl fmt::Display for CmiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CmiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "average" | "ave" => Ok(CmiMode::Average),
            "quantized" | "quant" => Ok(CmiMode::Quantized),
            "perfect" => Ok(CmiMode::Perfect),
            other => Err(Error::Config(format!(
                "unknown CF-CMI mode '{other}' (expected average, quantized or perfect)"
            ))),
        }
    }
}

/// All parameters of one simulated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas `N`.
    pub n: usize,
    /// Users `K`.
    pub k: usize,
    /// CDI feedback bits `B`.
    pub cdi_bits: u32,
    /// CF-CMI feedback bits `M` (quantized mode only).
    pub cmi_bits: u32,
    pub cmi_mode: CmiMode,
    /// Rate weights `alpha_k`.
    pub alpha: Vec<f64>,
    /// Large-scale amplitudes `xi_k`.
    pub xi: Vec<f64>,
    /// Per-antenna budgets `P_n` (linear).
    pub antenna_power: Vec<f64>,
    /// Noise power `N0` (linear).
    pub noise_power: f64,
    /// Percentile `delta_k` used by the relaxed threshold.
    pub delta: f64,
    /// Gaussian randomization draws.
    pub l_rand: usize,
    /// GP stopping threshold on the relative power change.
    pub epsilon: f64,
    /// Outer iterations of the alternating power/beam optimization.
    pub l_algo1: usize,
    pub seed: u64,
    /// Probabilistic leakage control: threshold `gamma_k` and outage `p_k`.
    pub plc_gamma: f64,
    pub plc_p: f64,
    /// Draw one codebook per user for the whole run instead of per trial.
    pub fixed_codebook: bool,
    /// Feed back the exact channel direction (upper-bound experiments).
    pub perfect_cdi: bool,
    /// Accept `delta` at or below the minimum-leakage percentile with a
    /// warning instead of an error.
    pub allow_low_delta: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let mut c = SystemConfig {
            n: 4,
            k: 4,
            cdi_bits: 6,
            cmi_bits: 2,
            cmi_mode: CmiMode::Average,
            alpha: vec![1.5, 1.5, 1.0, 1.0],
            xi: vec![1.0; 4],
            antenna_power: vec![],
            noise_power: 1.0,
            delta: 0.8,
            l_rand: 1000,
            epsilon: 0.01,
            l_algo1: 3,
            seed: 1,
            plc_gamma: 0.9,
            plc_p: 0.05,
            fixed_codebook: false,
            perfect_cdi: false,
            allow_low_delta: false,
        };
        c.set_snr_db(10.0);
        c
    }
}

impl SystemConfig {
    /// Total power `P = sum_n P_n`.
    pub fn total_power(&self) -> f64 {
        self.antenna_power.iter().sum()
    }

    /// Spread `P = N0 * 10^(snr/10)` evenly over the antennas.
    pub fn set_snr_db(&mut self, snr_db: f64) {
        let p = self.noise_power * 10f64.powf(snr_db / 10.0);
        self.antenna_power = vec![p / self.n as f64; self.n];
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.set_snr_db(snr_db);
        self
    }

    /// Equal split `P/K` used by the per-user-power schemes.
    pub fn equal_ue_powers(&self) -> Vec<f64> {
        vec![self.total_power() / self.k as f64; self.k]
    }

    pub fn xi_sq(&self) -> Vec<f64> {
        self.xi.iter().map(|x| x * x).collect()
    }

    /// Number of RVQ codewords `2^B`.
    pub fn codebook_size(&self) -> usize {
        1usize << self.cdi_bits
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k < 1 {
            return fail("K must be at least 1".into());
        }
        if self.n < self.k {
            return fail(format!("need N >= K, got N={} K={}", self.n, self.k));
        }
        if self.n < 2 {
            return fail("N must be at least 2".into());
        }
        if self.n > 16 {
            return fail(format!("N={} exceeds the supported maximum of 16", self.n));
        }
        if self.cdi_bits > 20 {
            return fail(format!("B={} exceeds the supported maximum of 20", self.cdi_bits));
        }
        if self.cmi_mode == CmiMode::Quantized && !(1..=16).contains(&self.cmi_bits) {
            return fail(format!("quantized CF-CMI needs 1 <= M <= 16, got {}", self.cmi_bits));
        }
        if self.alpha.len() != self.k {
            return fail(format!("alpha has {} entries, expected K={}", self.alpha.len(), self.k));
        }
        if self.xi.len() != self.k {
            return fail(format!("xi has {} entries, expected K={}", self.xi.len(), self.k));
        }
        if self.antenna_power.len() != self.n {
            return fail(format!(
                "antenna_power has {} entries, expected N={}",
                self.antenna_power.len(),
                self.n
            ));
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(bad) => Err(Error::Config(format!("{name} must be positive and finite, got {bad}"))),
                None => Ok(()),
            }
        };
        positive("alpha", &self.alpha)?;
        positive("xi", &self.xi)?;
        positive("antenna_power", &self.antenna_power)?;
        positive("noise_power", &[self.noise_power])?;
        positive("epsilon", &[self.epsilon])?;
        positive("plc_gamma", &[self.plc_gamma])?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.plc_p > 0.0 && self.plc_p <= 1.0) {
            return fail(format!("plc_p must lie in (0, 1], got {}", self.plc_p));
        }
        if self.l_rand == 0 {
            return fail("l_rand must be at least 1".into());
        }
        Ok(())
    }
}
