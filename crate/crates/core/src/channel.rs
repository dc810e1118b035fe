//! Rayleigh channels, RVQ feedback and the base station's uncertainty model.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{CmiMode, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::special::{beta_fn, chi2_cdf_inverse};

/// True small-scale channels (rows `h_k`) and large-scale amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub xi: Vec<f64>,
}

impl ChannelRealization {
    pub fn k(&self) -> usize {
        self.h.nrows()
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    /// Row `h_k` as a vector of its entries.
    pub fn row(&self, k: usize) -> ComplexVector {
        crate::linalg::row(&self.h, k)
    }
}

/// One `CN(0, 1)` draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Uniformly distributed unit vector in `C^n`.
pub fn isotropic_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = complex_gaussian_vector(n, rng);
        let nrm = v.norm();
        if nrm > 1e-12 {
            return v.unscale(nrm);
        }
    }
}

pub fn generate_channel<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let h = ComplexMatrix::from_fn(config.k, config.n, |_, _| complex_gaussian(rng));
    ChannelRealization {
        h,
        xi: config.xi.clone(),
    }
}

/// Random vector quantization codebook of unit-norm codewords.
#[derive(Clone, Debug, PartialEq)]
pub struct RvqCodebook {
    codewords: Vec<ComplexVector>,
}

impl RvqCodebook {
    /// `2^bits` isotropic codewords in `C^n`.
    pub fn random<R: Rng + ?Sized>(n: usize, bits: u32, rng: &mut R) -> Self {
        let size = 1usize << bits;
        RvqCodebook {
            codewords: (0..size).map(|_| isotropic_unit_vector(n, rng)).collect(),
        }
    }

    pub fn from_codewords(codewords: Vec<ComplexVector>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::InvalidInput("codebook must not be empty".into()));
        }
        let n = codewords[0].len();
        for (i, c) in codewords.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidInput(format!("codeword {i} has wrong dimension")));
            }
            if (c.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("codeword {i} is not unit norm")));
            }
        }
        Ok(RvqCodebook { codewords })
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[ComplexVector] {
        &self.codewords
    }
}

/// `|c h^H|` for row vectors stored as `DVector`s.
pub fn inner_abs(c: &ComplexVector, h: &ComplexVector) -> f64 {
    h.dotc(c).norm()
}

/// Index and codeword maximizing `|c h~^H|`, ties to the lowest index.
pub fn quantize_cdi(h: &ComplexVector, codebook: &RvqCodebook) -> Result<(usize, ComplexVector)> {
    let nrm = h.norm();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::InvalidInput("cannot quantize a zero or non-finite channel".into()));
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, c) in codebook.codewords.iter().enumerate() {
        let v = inner_abs(c, h);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    Ok((best, codebook.codewords[best].clone()))
}

/// Split of a unit direction into its component along a codeword and a
/// unit error vector orthogonal to it.
#[derive(Clone, Debug)]
pub struct DirectionSplit {
    pub cos_theta: f64,
    pub sin_theta: f64,
    /// Unit error vector; zero when `degenerate`.
    pub error: ComplexVector,
    /// `h_hat` rotated so that `h_hat h~^H` is real and nonnegative.
    pub aligned_h_hat: ComplexVector,
    /// True when `h~` is parallel to `h_hat` and the error vector is undefined.
    pub degenerate: bool,
}

/// `h_hat` multiplied by `e^{-j phi}`, `phi = arg(h_hat h~^H)`.
pub fn align_phase(h_hat: &ComplexVector, h_tilde: &ComplexVector) -> ComplexVector {
    let ip = h_tilde.dotc(h_hat);
    if ip.norm() == 0.0 {
        return h_hat.clone();
    }
    let rot = ip.conj() / ip.norm();
    h_hat * rot
}

pub fn decompose_direction(h_tilde: &ComplexVector, h_hat: &ComplexVector) -> Result<DirectionSplit> {
    if h_tilde.len() != h_hat.len() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    for (name, v) in [("h_tilde", h_tilde), ("h_hat", h_hat)] {
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{name} must be unit norm")));
        }
    }
    let aligned = align_phase(h_hat, h_tilde);
    let cos_theta = h_tilde.dotc(&aligned).re.clamp(0.0, 1.0);
    let residual = h_tilde - &aligned * C64::new(cos_theta, 0.0);
    let sin_theta = residual.norm();
    if sin_theta < 1e-12 {
        return Ok(DirectionSplit {
            cos_theta: 1.0,
            sin_theta: 0.0,
            error: ComplexVector::zeros(h_tilde.len()),
            aligned_h_hat: aligned,
            degenerate: true,
        });
    }
    Ok(DirectionSplit {
        cos_theta,
        sin_theta,
        error: residual.unscale(sin_theta),
        aligned_h_hat: aligned,
        degenerate: false,
    })
}

/// Midpoint quantizer of `||h||^2`: level `T_i` sits at probability
/// `(2i+1)/2^{M+1}` of the chi-square law.
#[derive(Clone, Debug, PartialEq)]
pub struct CfCmiQuantizer {
    levels: Vec<f64>,
}

impl CfCmiQuantizer {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::Domain {
                what: "CF-CMI bits",
                value: bits as f64,
            });
        }
        let count = 1usize << bits;
        let denom = (1u64 << (bits + 1)) as f64;
        let levels = (0..count)
            .map(|i| chi2_cdf_inverse((2 * i + 1) as f64 / denom, n as u32))
            .collect::<Result<Vec<_>>>()?;
        Ok(CfCmiQuantizer { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Nearest level, ties to the lower index.
    pub fn quantize(&self, norm_sq: f64) -> f64 {
        let idx = self.levels.partition_point(|&t| t < norm_sq);
        if idx == 0 {
            return self.levels[0];
        }
        if idx == self.levels.len() {
            return self.levels[idx - 1];
        }
        let below = self.levels[idx - 1];
        let above = self.levels[idx];
        if norm_sq - below <= above - norm_sq {
            below
        } else {
            above
        }
    }
}

pub fn quantize_cf_cmi(norm_sq: f64, bits: u32, n: usize) -> Result<f64> {
    if !(norm_sq >= 0.0) {
        return Err(Error::Domain {
            what: "channel norm",
            value: norm_sq,
        });
    }
    Ok(CfCmiQuantizer::new(n, bits)?.quantize(norm_sq))
}

/// `eta = 2^B beta(2^B, N/(N-1))`, the mean of `Z = sin^2` of the
/// quantization angle.
pub fn eta(n: usize, bits: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain {
            what: "antenna count for eta",
            value: n as f64,
        });
    }
    let nf = n as f64;
    if bits == 0 {
        return Ok((nf - 1.0) / nf);
    }
    let m = 2f64.powi(bits as i32);
    Ok(m * beta_fn(m, nf / (nf - 1.0))?)
}

/// Draw `Z` from `P_Z(z) = 1 - (1 - z^{N-1})^{2^B}` by inversion.
pub fn sample_z<R: Rng + ?Sized>(n: usize, bits: u32, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let m = 2f64.powi(bits as i32);
    let inner = -((-u).ln_1p() / m).exp_m1();
    inner.powf(1.0 / (n as f64 - 1.0)).clamp(0.0, 1.0)
}

/// Isotropic unit vector in the orthogonal complement of the unit vector `h_hat`.
pub fn sample_nullspace_direction<R: Rng + ?Sized>(h_hat: &ComplexVector, rng: &mut R) -> ComplexVector {
    loop {
        let v = complex_gaussian_vector(h_hat.len(), rng);
        let proj = h_hat.dotc(&v);
        let e = &v - h_hat * proj;
        let nrm = e.norm();
        if nrm >= 1e-9 {
            return e.unscale(nrm);
        }
    }
}

/// One draw of `sqrt(1-Z) h_hat + sqrt(Z) e` from the uncertainty model.
pub fn sample_true_direction<R: Rng + ?Sized>(
    h_hat: &ComplexVector,
    n: usize,
    bits: u32,
    rng: &mut R,
) -> ComplexVector {
    let z = sample_z(n, bits, rng);
    let e = sample_nullspace_direction(h_hat, rng);
    h_hat * C64::new((1.0 - z).sqrt(), 0.0) + e * C64::new(z.sqrt(), 0.0)
}

/// What the base station knows about every user.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedCsi {
    /// Unit-norm direction codewords `h_hat_k`.
    pub h_hat: Vec<ComplexVector>,
    /// CF-CMI `A_k` (`N`, `A_hat_k` or `||h_k||^2`).
    pub cmi: Vec<f64>,
    pub xi_sq: Vec<f64>,
    pub cdi_bits: u32,
    pub cmi_mode: CmiMode,
    /// Mean squared sine of the quantization angle; zero for exact CDI.
    pub eta: f64,
}

impl QuantizedCsi {
    pub fn k(&self) -> usize {
        self.h_hat.len()
    }

    pub fn n(&self) -> usize {
        self.h_hat[0].len()
    }

    /// `h_check_k = sqrt(A_k) h_hat_k`.
    pub fn h_check(&self, k: usize) -> ComplexVector {
        &self.h_hat[k] * C64::new(self.cmi[k].sqrt(), 0.0)
    }

    /// Rows `xi_k h_check_k` stacked into a `K x N` matrix.
    pub fn h_check_matrix(&self) -> ComplexMatrix {
        let k = self.k();
        let n = self.n();
        ComplexMatrix::from_fn(k, n, |i, j| self.h_hat[i][j] * (self.cmi[i] * self.xi_sq[i]).sqrt())
    }
}

/// Quantize every user's channel. Codebooks are drawn from `codebook_rng`
/// in user order.
pub fn quantize_channel<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    config: &SystemConfig,
    codebook_rng: &mut R,
) -> Result<QuantizedCsi> {
    let k = channel.k();
    let n = channel.n();
    let quantizer = match config.cmi_mode {
        CmiMode::Quantized => Some(CfCmiQuantizer::new(n, config.cmi_bits)?),
        _ => None,
    };
    let mut h_hat = Vec::with_capacity(k);
    let mut cmi = Vec::with_capacity(k);
    for ue in 0..k {
        let h = channel.row(ue);
        let norm_sq = h.norm_squared();
        let h_tilde = h.unscale(norm_sq.sqrt());
        let direction = if config.perfect_cdi {
            h_tilde.clone()
        } else {
            let codebook = RvqCodebook::random(n, config.cdi_bits, codebook_rng);
            let (_, c) = quantize_cdi(&h, &codebook)?;
            align_phase(&c, &h_tilde)
        };
        h_hat.push(direction);
        cmi.push(match config.cmi_mode {
            CmiMode::Average => n as f64,
            CmiMode::Quantized => quantizer.as_ref().map(|q| q.quantize(norm_sq)).unwrap_or(n as f64),
            CmiMode::Perfect => norm_sq,
        });
    }
    Ok(QuantizedCsi {
        h_hat,
        cmi,
        xi_sq: channel.xi.iter().map(|x| x * x).collect(),
        cdi_bits: config.cdi_bits,
        cmi_mode: config.cmi_mode,
        eta: if config.perfect_cdi { 0.0 } else { eta(n, config.cdi_bits)? },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::chi2_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn channel_norm_mean_is_n() {
        let cfg = SystemConfig::default();
        let mut r = rng(1);
        let trials = 25_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let ch = generate_channel(&cfg, &mut r);
            for k in 0..cfg.k {
                acc += ch.row(k).norm_squared();
            }
        }
        let mean = acc / (trials * cfg.k) as f64;
        assert!((mean - 4.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn channel_replays_bit_identically() {
        let cfg = SystemConfig::default();
        let a = generate_channel(&cfg, &mut rng(99));
        let b = generate_channel(&cfg, &mut rng(99));
        assert_eq!(a, b);
    }

    #[test]
    fn channel_entries_have_identity_covariance() {
        let cfg = SystemConfig::default();
        let mut r = rng(2);
        let s = 20_000;
        let n = cfg.n;
        let mut cov = ComplexMatrix::zeros(n, n);
        let mut pseudo = ComplexMatrix::zeros(n, n);
        for _ in 0..s {
            let h = generate_channel(&cfg, &mut r).row(0);
            cov += &h * h.adjoint();
            pseudo += &h * h.transpose();
        }
        cov /= C64::new(s as f64, 0.0);
        pseudo /= C64::new(s as f64, 0.0);
        let err = (cov - ComplexMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        // standard error of each entry is about 1/sqrt(s)
        assert!(err < 5.0 / (s as f64).sqrt(), "{err}");
        assert!(pseudo.iter().map(|z| z.norm()).fold(0.0, f64::max) < 5.0 / (s as f64).sqrt());
    }

    #[test]
    fn codewords_are_isotropic() {
        let mut r = rng(3);
        let n = 4;
        let v = isotropic_unit_vector(n, &mut r);
        let cb = RvqCodebook::random(n, 14, &mut r);
        let vals: Vec<f64> = cb.codewords().iter().map(|c| inner_abs(c, &v).powi(2)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        // |c v^H|^2 ~ Beta(1, N-1): variance (N-1)/(N^2 (N+1))
        let sd = ((n as f64 - 1.0) / ((n * n * (n + 1)) as f64) / vals.len() as f64).sqrt();
        assert!((mean - 0.25).abs() < 4.0 * sd, "{mean}");
        for c in cb.codewords() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantize_selects_contained_direction() {
        let mut r = rng(4);
        let h = complex_gaussian_vector(4, &mut r);
        let h_tilde = h.unscale(h.norm());
        let mut words: Vec<_> = (0..7).map(|_| isotropic_unit_vector(4, &mut r)).collect();
        words.insert(5, h_tilde.clone() * C64::from_polar(1.0, 0.7));
        let cb = RvqCodebook::from_codewords(words).unwrap();
        let (idx, c) = quantize_cdi(&h, &cb).unwrap();
        assert_eq!(idx, 5);
        assert!((inner_abs(&c, &h_tilde) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantize_single_codeword_and_zero_vector() {
        let mut r = rng(5);
        let cb = RvqCodebook::random(3, 0, &mut r);
        let h = complex_gaussian_vector(3, &mut r);
        assert_eq!(quantize_cdi(&h, &cb).unwrap().0, 0);
        assert!(quantize_cdi(&ComplexVector::zeros(3), &cb).is_err());
    }

    #[test]
    fn quantize_matches_exhaustive_scan() {
        let mut r = rng(6);
        for bits in 0..=8 {
            let cb = RvqCodebook::random(4, bits, &mut r);
            for _ in 0..20 {
                let h = complex_gaussian_vector(4, &mut r);
                let (idx, _) = quantize_cdi(&h, &cb).unwrap();
                let hn = h.unscale(h.norm());
                let chosen = inner_abs(&cb.codewords()[idx], &hn);
                for (j, c) in cb.codewords().iter().enumerate() {
                    let v = inner_abs(c, &hn);
                    assert!(v <= chosen, "codeword {j} beats the choice");
                    if v == chosen {
                        assert!(idx <= j);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_cases() {
        let mut r = rng(7);
        let a = isotropic_unit_vector(4, &mut r);
        let same = decompose_direction(&a, &a).unwrap();
        assert!(same.degenerate);
        assert_eq!((same.cos_theta, same.sin_theta), (1.0, 0.0));

        let b = sample_nullspace_direction(&a, &mut r);
        let perp = decompose_direction(&b, &a).unwrap();
        assert!(perp.cos_theta.abs() < 1e-12);
        assert!((perp.sin_theta - 1.0).abs() < 1e-12);
        assert!((inner_abs(&perp.error, &b) - 1.0).abs() < 1e-12);

        for _ in 0..500 {
            let ht = isotropic_unit_vector(4, &mut r);
            let hh = isotropic_unit_vector(4, &mut r);
            let d = decompose_direction(&ht, &hh).unwrap();
            let rec = &d.aligned_h_hat * C64::new(d.cos_theta, 0.0) + &d.error * C64::new(d.sin_theta, 0.0);
            assert!((rec - &ht).norm() <= 1e-10);
            assert!((d.cos_theta.powi(2) + d.sin_theta.powi(2) - 1.0).abs() < 1e-12);
            assert!(d.aligned_h_hat.dotc(&d.error).norm() < 1e-10);
            assert!((inner_abs(&d.aligned_h_hat, &ht) - inner_abs(&hh, &ht)).abs() < 1e-14);
        }
    }

    #[test]
    fn cf_cmi_quantizer() {
        let q = CfCmiQuantizer::new(4, 1).unwrap();
        let lv = q.levels().to_vec();
        assert!((chi2_cdf(lv[0], 4) - 0.25).abs() < 1e-10);
        assert!((chi2_cdf(lv[1], 4) - 0.75).abs() < 1e-10);
        assert_eq!(q.quantize(0.0), lv[0]);
        assert_eq!(q.quantize(lv[1]), lv[1]);
        assert_eq!(quantize_cf_cmi(0.0, 1, 4).unwrap(), lv[0]);

        let q3 = CfCmiQuantizer::new(4, 3).unwrap();
        let mut r = rng(8);
        for _ in 0..2000 {
            let x: f64 = r.random::<f64>() * 15.0;
            let got = q3.quantize(x);
            let mut best = q3.levels()[0];
            for &t in q3.levels() {
                if (x - t).abs() < (x - best).abs() {
                    best = t;
                }
            }
            assert_eq!(got, best);
        }
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(2, 0).unwrap(), 0.5);
        assert_eq!(eta(4, 0).unwrap(), 0.75);
        assert!(eta(1, 3).is_err());
        for n in 2..=8 {
            for b in 0..=12 {
                let e = eta(n, b).unwrap();
                assert!(e > 0.0 && e < 1.0);
                let margin = 1.0 - n as f64 * e / (n as f64 - 1.0);
                if b == 0 {
                    assert!(margin.abs() < 1e-15);
                } else {
                    assert!(margin > 0.0, "n={n} b={b}");
                }
            }
        }
    }

    #[test]
    fn z_sampler_mean_matches_eta() {
        let mut r = rng(9);
        let s = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..s {
            let z = sample_z(4, 6, &mut r);
            sum += z;
            sum2 += z * z;
        }
        let mean = sum / s as f64;
        let sd = ((sum2 / s as f64 - mean * mean) / s as f64).sqrt();
        assert!((mean - eta(4, 6).unwrap()).abs() < 3.0 * sd);
    }

    #[test]
    fn z_uniform_for_two_antennas_no_feedback() {
        let mut r = rng(10);
        let s = 50_000;
        let mut below = 0;
        for _ in 0..s {
            if sample_z(2, 0, &mut r) < 0.3 {
                below += 1;
            }
        }
        let p = below as f64 / s as f64;
        assert!((p - 0.3).abs() < 4.0 * (0.21f64 / s as f64).sqrt());
    }

    #[test]
    fn true_direction_unit_norm() {
        let mut r = rng(11);
        let hh = isotropic_unit_vector(4, &mut r);
        for _ in 0..1000 {
            let d = sample_true_direction(&hh, 4, 4, &mut r);
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantized_csi_modes() {
        let mut cfg = SystemConfig::default();
        let mut r = rng(12);
        let ch = generate_channel(&cfg, &mut r);
        let csi = quantize_channel(&ch, &cfg, &mut r).unwrap();
        assert_eq!(csi.cmi, vec![4.0; 4]);
        for hh in &csi.h_hat {
            assert!((hh.norm() - 1.0).abs() < 1e-12);
        }
        cfg.cmi_mode = CmiMode::Perfect;
        cfg.perfect_cdi = true;
        let csi = quantize_channel(&ch, &cfg, &mut r).unwrap();
        for k in 0..4 {
            assert!((csi.cmi[k] - ch.row(k).norm_squared()).abs() < 1e-12);
            let hk = ch.row(k);
            assert!((csi.h_check(k) - hk).norm() < 1e-12);
        }
    }
}
