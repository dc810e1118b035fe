//! Experiment description: strict flat `key = value` parsing, SNR grids and
//! scheme lists.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use leakbf::beamforming::Scheme;
use leakbf::{CmiMode, SystemConfig};

use crate::error::SimError;

/// Figure-reproduction presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Recipe {
    /// CDF of the unnormalized leakage `D`.
    Fig2,
    /// CDF of the normalized leakage `V`.
    Fig3,
    /// Rate versus SNR under per-user budgets.
    Fig4,
    /// GP power-update convergence.
    Fig5,
    /// Alternating-optimization convergence.
    Fig6,
    /// CF-CMI feedback modes.
    Fig7,
    /// Rate versus SNR under per-antenna budgets.
    Fig8,
}

impl Recipe {
    pub const ALL: [Recipe; 7] = [
        Recipe::Fig2,
        Recipe::Fig3,
        Recipe::Fig4,
        Recipe::Fig5,
        Recipe::Fig6,
        Recipe::Fig7,
        Recipe::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig2 => "fig2",
            Recipe::Fig3 => "fig3",
            Recipe::Fig4 => "fig4",
            Recipe::Fig5 => "fig5",
            Recipe::Fig6 => "fig6",
            Recipe::Fig7 => "fig7",
            Recipe::Fig8 => "fig8",
        }
    }

    pub fn is_cdf(self) -> bool {
        matches!(self, Recipe::Fig2 | Recipe::Fig3)
    }

    fn default_schemes(self) -> Vec<Scheme> {
        match self {
            Recipe::Fig2 | Recipe::Fig3 => vec![],
            Recipe::Fig4 => vec![Scheme::Zf, Scheme::Slnr, Scheme::Aslnr, Scheme::Plc, Scheme::Malc, Scheme::Ralc],
            Recipe::Fig5 | Recipe::Fig6 => vec![Scheme::MalcPa, Scheme::RalcPa],
            Recipe::Fig7 | Recipe::Fig8 => vec![Scheme::ZfPa, Scheme::MalcPa, Scheme::RalcPa],
        }
    }

    fn default_grid(self) -> Vec<f64> {
        match self {
            Recipe::Fig5 | Recipe::Fig6 => vec![10.0, 20.0],
            _ => (0..=6).map(|i| 5.0 * i as f64).collect(),
        }
    }

    fn default_trials(self) -> usize {
        match self {
            Recipe::Fig2 | Recipe::Fig3 => 100_000,
            Recipe::Fig5 | Recipe::Fig6 => 200,
            _ => DEFAULT_TRIALS,
        }
    }

    fn default_l_algo1(self) -> usize {
        match self {
            Recipe::Fig5 => 1,
            Recipe::Fig6 | Recipe::Fig7 => 10,
            _ => 3,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        let key = s.trim().to_ascii_lowercase();
        Recipe::ALL.into_iter().find(|r| r.name() == key).ok_or_else(|| {
            let names: Vec<&str> = Recipe::ALL.iter().map(|r| r.name()).collect();
            SimError::Usage(format!("unknown recipe '{s}' (valid: {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(SimError::Usage(format!("unknown format '{other}' (valid: csv, json)"))),
        }
    }
}

pub const DEFAULT_TRIALS: usize = 500;

/// Bound on `N` and `K` checked before any per-antenna or per-user vector is built.
const MAX_DIM: usize = 64;

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub schemes: Vec<Scheme>,
    pub snr_db_grid: Vec<f64>,
    /// Channel trials per point, or samples per curve for CDF recipes.
    pub n_trials: usize,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub recipe: Option<Recipe>,
}

/// Recognized keys. Dashes are accepted in place of underscores.
pub const KEYS: &[&str] = &[
    "n",
    "k",
    "cdi_bits",
    "cmi_bits",
    "cmi_mode",
    "alpha",
    "xi",
    "noise_power",
    "delta",
    "l_rand",
    "epsilon",
    "l_algo1",
    "seed",
    "plc_gamma",
    "plc_p",
    "fixed_codebook",
    "perfect_cdi",
    "allow_low_delta",
    "schemes",
    "snr_db",
    "trials",
    "format",
    "out",
    "recipe",
];

fn canonical_key(raw: &str) -> Result<String, SimError> {
    let key = raw.trim().to_ascii_lowercase().replace('-', "_");
    let key = match key.as_str() {
        "scheme" => "schemes".to_string(),
        "n_trials" => "trials".to_string(),
        _ => key,
    };
    if KEYS.contains(&key.as_str()) {
        return Ok(key);
    }
    let suggestion = KEYS
        .iter()
        .map(|k| (strsim::jaro_winkler(k, &key), *k))
        .filter(|(score, _)| *score >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string());
    Err(SimError::UnknownKey { key: raw.trim().to_string(), suggestion })
}

/// Ordered key/value assignments; later ones win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignments {
    values: BTreeMap<String, String>,
}

impl Assignments {
    /// Parse flat `key = value` text. `#` starts a comment; a line starting
    /// with `#!` is an assignment, which lets output headers be read back.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut out = Assignments::default();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.trim_start().strip_prefix("#!") {
                Some(rest) => rest,
                None => raw.split('#').next().unwrap_or(""),
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SimError::Syntax {
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = canonical_key(key)?;
            if out.values.contains_key(&key) {
                return Err(SimError::Syntax { line: i + 1, message: format!("duplicate key '{key}'") });
            }
            out.values.insert(key, value.trim().to_string());
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimError> {
        let key = canonical_key(key)?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// Apply `other` on top of `self`.
    pub fn merge(&mut self, other: &Assignments) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, SimError> {
    value
        .trim()
        .parse()
        .map_err(|_| SimError::Value { key: key.to_string(), value: value.to_string(), expected: std::any::type_name::<T>() })
}

fn parse_f64(key: &str, value: &str) -> Result<f64, SimError> {
    let v: f64 = parse_num(key, value)?;
    if !v.is_finite() {
        return Err(SimError::Value { key: key.to_string(), value: value.to_string(), expected: "finite number" });
    }
    Ok(v)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, SimError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(SimError::Value { key: key.to_string(), value: value.to_string(), expected: "boolean" }),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, SimError> {
    value
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(SimError::Value { key: key.to_string(), value: value.to_string(), expected: "nonempty list" })
            } else {
                Ok(v)
            }
        })
}

/// Parse an SNR grid: `start:step:stop` (inclusive), a comma list, or a
/// single value, all in dB.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, SimError> {
    const MAX_POINTS: usize = 10_000;
    let bad = |expected: &'static str| SimError::Value { key: "snr_db".into(), value: text.to_string(), expected };
    let text = text.trim();
    if text.is_empty() {
        return Err(bad("nonempty grid"));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, step, stop] = parts.as_slice() else {
            return Err(bad("start:step:stop"));
        };
        let (start, step, stop) = (parse_f64("snr_db", start)?, parse_f64("snr_db", step)?, parse_f64("snr_db", stop)?);
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(bad("a step that moves from start towards stop"));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if !(count.is_finite() && count < MAX_POINTS as f64) {
            return Err(bad("at most 10000 points"));
        }
        return Ok((0..=count as usize).map(|i| start + step * i as f64).collect());
    }
    let grid = parse_list("snr_db", text)?;
    if grid.len() > MAX_POINTS {
        return Err(bad("at most 10000 points"));
    }
    Ok(grid)
}

/// Parse a comma-separated scheme list; `all` selects every scheme.
pub fn parse_schemes(text: &str) -> Result<Vec<Scheme>, SimError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(Scheme::ALL);
            continue;
        }
        let scheme: Scheme = item.parse().map_err(|e: leakbf::Error| SimError::Usage(e.to_string()))?;
        out.push(scheme);
    }
    if out.is_empty() {
        return Err(SimError::Usage(format!(
            "empty scheme list (valid: {})",
            Scheme::ALL.map(|s| s.name()).join(", ")
        )));
    }
    let mut seen = Vec::new();
    out.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });
    Ok(out)
}

impl ExperimentSpec {
    /// Resolve assignments against the defaults (and the recipe's presets).
    pub fn from_assignments(a: &Assignments) -> Result<Self, SimError> {
        let recipe = a.get("recipe").map(Recipe::from_str).transpose()?;
        let mut config = SystemConfig::default();
        if let Some(r) = recipe {
            config.l_algo1 = r.default_l_algo1();
        }
        let key_val = |key: &'static str| a.get(key).map(|v| (key, v));

        if let Some((k, v)) = key_val("n") {
            config.n = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("k") {
            config.k = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("cdi_bits") {
            config.cdi_bits = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("cmi_bits") {
            config.cmi_bits = parse_num(k, v)?;
        }
        if config.n > MAX_DIM || config.k > MAX_DIM {
            return Err(SimError::Usage(format!("N and K must not exceed {MAX_DIM}")));
        }
        if let Some((_, v)) = key_val("cmi_mode") {
            config.cmi_mode = v.parse::<CmiMode>().map_err(|e| SimError::Usage(e.to_string()))?;
        }
        config.alpha = match key_val("alpha") {
            Some((k, v)) => parse_list(k, v)?,
            None if config.k == 4 => config.alpha,
            None => vec![1.0; config.k],
        };
        config.xi = match key_val("xi") {
            Some((k, v)) => {
                let xi = parse_list(k, v)?;
                if xi.len() == 1 {
                    vec![xi[0]; config.k]
                } else {
                    xi
                }
            }
            None => vec![1.0; config.k],
        };
        if let Some((k, v)) = key_val("noise_power") {
            config.noise_power = parse_f64(k, v)?;
        }
        if let Some((k, v)) = key_val("delta") {
            config.delta = parse_f64(k, v)?;
        }
        if let Some((k, v)) = key_val("l_rand") {
            config.l_rand = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("epsilon") {
            config.epsilon = parse_f64(k, v)?;
        }
        if let Some((k, v)) = key_val("l_algo1") {
            config.l_algo1 = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("seed") {
            config.seed = parse_num(k, v)?;
        }
        if let Some((k, v)) = key_val("plc_gamma") {
            config.plc_gamma = parse_f64(k, v)?;
        }
        if let Some((k, v)) = key_val("plc_p") {
            config.plc_p = parse_f64(k, v)?;
        }
        if let Some((k, v)) = key_val("fixed_codebook") {
            config.fixed_codebook = parse_bool(k, v)?;
        }
        if let Some((k, v)) = key_val("perfect_cdi") {
            config.perfect_cdi = parse_bool(k, v)?;
        }
        if let Some((k, v)) = key_val("allow_low_delta") {
            config.allow_low_delta = parse_bool(k, v)?;
        }

        let snr_db_grid = match a.get("snr_db") {
            Some(v) => parse_snr_grid(v)?,
            None => recipe.map_or_else(|| vec![10.0], Recipe::default_grid),
        };
        config.set_snr_db(snr_db_grid[0]);
        config.validate().map_err(|e| SimError::Usage(e.to_string()))?;

        let schemes = match a.get("schemes") {
            Some(v) => parse_schemes(v)?,
            None => recipe.map(Recipe::default_schemes).unwrap_or_default(),
        };
        let n_trials = match key_val("trials") {
            Some((k, v)) => parse_num(k, v)?,
            None => recipe.map_or(DEFAULT_TRIALS, Recipe::default_trials),
        };
        if n_trials == 0 {
            return Err(SimError::Usage("trials must be at least 1".into()));
        }
        Ok(ExperimentSpec {
            config,
            schemes,
            snr_db_grid,
            n_trials,
            output_path: a.get("out").map(PathBuf::from),
            output_format: a.get("format").map(OutputFormat::from_str).transpose()?.unwrap_or(OutputFormat::Csv),
            recipe,
        })
    }

    /// Parse config text with flag overrides applied on top.
    pub fn parse(text: &str, overrides: &Assignments) -> Result<Self, SimError> {
        let mut a = Assignments::parse(text)?;
        a.merge(overrides);
        Self::from_assignments(&a)
    }

    /// Resolved spec in the config file format. Reading it back yields an
    /// equal spec.
    pub fn to_config_text(&self) -> String {
        let c = &self.config;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("n = {}", c.n),
            format!("k = {}", c.k),
            format!("cdi_bits = {}", c.cdi_bits),
            format!("cmi_bits = {}", c.cmi_bits),
            format!("cmi_mode = {}", c.cmi_mode),
            format!("alpha = {}", list(&c.alpha)),
            format!("xi = {}", list(&c.xi)),
            format!("noise_power = {:?}", c.noise_power),
            format!("delta = {:?}", c.delta),
            format!("l_rand = {}", c.l_rand),
            format!("epsilon = {:?}", c.epsilon),
            format!("l_algo1 = {}", c.l_algo1),
            format!("seed = {}", c.seed),
            format!("plc_gamma = {:?}", c.plc_gamma),
            format!("plc_p = {:?}", c.plc_p),
            format!("fixed_codebook = {}", c.fixed_codebook),
            format!("perfect_cdi = {}", c.perfect_cdi),
            format!("allow_low_delta = {}", c.allow_low_delta),
        ];
        if !self.schemes.is_empty() {
            lines.push(format!("schemes = {}", self.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")));
        }
        lines.push(format!("snr_db = {}", list(&self.snr_db_grid)));
        lines.push(format!("trials = {}", self.n_trials));
        if let Some(r) = self.recipe {
            lines.push(format!("recipe = {r}"));
        }
        lines.join("\n")
    }
}

/// Pull the config out of a previous output file, or return `text` as is.
pub fn extract_config(text: &str) -> Result<String, SimError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed)?;
        return v["metadata"]["config"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| SimError::Usage("JSON input has no metadata.config string".into()));
    }
    if text.lines().any(|l| l.starts_with("#!")) {
        return Ok(text.lines().filter(|l| l.starts_with("#!")).collect::<Vec<_>>().join("\n"));
    }
    Ok(text.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_defaults() {
        let spec = ExperimentSpec::parse("", &Assignments::default()).unwrap();
        let c = &spec.config;
        assert_eq!((c.n, c.k, c.cdi_bits, c.l_rand), (4, 4, 6, 1000));
        assert_eq!((c.delta, c.epsilon), (0.8, 0.01));
        assert_eq!(c.alpha, vec![1.5, 1.5, 1.0, 1.0]);
        assert_eq!(c.xi, vec![1.0; 4]);
        assert_eq!(c.antenna_power, vec![10.0 / 4.0; 4]);
        assert_eq!(spec.n_trials, DEFAULT_TRIALS);
        assert!(spec.schemes.is_empty());
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_snr_grid("0:5:30").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(parse_snr_grid("30:-10:0").unwrap(), vec![30.0, 20.0, 10.0, 0.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_grid(" 10, 20 ").unwrap(), vec![10.0, 20.0]);
        assert_eq!(parse_snr_grid("7").unwrap(), vec![7.0]);
        for bad in ["", "0:0:10", "0:5", "10:5:0", "a:1:2", "0:1e-9:1e9", "nan", "1,,2"] {
            assert!(parse_snr_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_suggestion() {
        let err = Assignments::parse("delte = 0.7").unwrap_err();
        assert!(err.to_string().contains("did you mean 'delta'"), "{err}");
        assert!(Assignments::parse("bogus_option = 1").is_err());
    }

    #[test]
    fn malformed_number_names_key() {
        let err = ExperimentSpec::parse("l_rand = many", &Assignments::default()).unwrap_err();
        assert!(err.to_string().contains("l_rand"), "{err}");
        let err = ExperimentSpec::parse("delta = inf", &Assignments::default()).unwrap_err();
        assert!(err.to_string().contains("delta"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let mut flags = Assignments::default();
        flags.set("snr-db", "0:5:30").unwrap();
        flags.set("seed", "9").unwrap();
        let spec = ExperimentSpec::parse("seed = 3\nschemes = malc, zf\n# note\n", &flags).unwrap();
        assert_eq!(spec.snr_db_grid.len(), 7);
        assert_eq!(spec.config.seed, 9);
        assert_eq!(spec.schemes, vec![Scheme::Malc, Scheme::Zf]);
    }

    #[test]
    fn config_text_round_trips() {
        let spec = ExperimentSpec::parse(
            "recipe = fig7\nk = 3\nxi = 0.5\ncmi_mode = quantized\nsnr_db = 0:10:20\ntrials = 12",
            &Assignments::default(),
        )
        .unwrap();
        let back = ExperimentSpec::parse(&spec.to_config_text(), &Assignments::default()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.config.alpha, vec![1.0; 3]);
        assert_eq!(spec.config.l_algo1, 10);
    }

    #[test]
    fn schemes_and_duplicates() {
        assert_eq!(parse_schemes("all").unwrap().len(), 9);
        assert_eq!(parse_schemes("zf,ZF").unwrap(), vec![Scheme::Zf]);
        assert!(parse_schemes(" , ").is_err());
        assert!(parse_schemes("zf,slrn").unwrap_err().to_string().contains("slnr"));
        assert!(Assignments::parse("seed = 1\nseed = 2").is_err());
    }

    #[test]
    fn headers_are_read_back() {
        let text = "#! seed = 5\n#! trials = 3\nscheme,rate\nzf,1.0\n";
        let spec = ExperimentSpec::parse(&extract_config(text).unwrap(), &Assignments::default()).unwrap();
        assert_eq!((spec.config.seed, spec.n_trials), (5, 3));
    }
}
