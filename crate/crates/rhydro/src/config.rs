//! Run configuration: plain-text `key = value` files with sections,
//! plus flag-style overrides.
//!
//! Every field is echoed back by [`RunConfig::echo`] in a form that
//! parses to the identical configuration, and the echo is written next
//! to the outputs of every run for reproducibility.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {constraint}")]
    BadValue { key: String, constraint: String },
    #[error("mode `{mode}` requires key `{key}`")]
    MissingForMode { mode: String, key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonlinear,
    Linearized,
    Picard,
    RadiationOff,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Nonlinear => "nonlinear",
            Mode::Linearized => "linearized",
            Mode::Picard => "picard",
            Mode::RadiationOff => "radiation-off",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    SineBump,
    CompactBump,
    Custom,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::SineBump => "sine-bump",
            ProfileKind::CompactBump => "compact-bump",
            ProfileKind::Custom => "custom",
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [geometry]
    pub a: f64,
    pub b: f64,
    // [gas]
    pub cv: f64,
    pub a_const: f64,
    // [grid]
    pub n: usize,
    pub cfl: f64,
    // [run]
    pub mode: Mode,
    pub t_final: f64,
    pub output_every: usize,
    pub nu: f64,
    // [initial]
    pub epsilon: f64,
    pub profile: ProfileKind,
    pub flatness_order: u32,
    pub amp_p: f64,
    pub amp_u: f64,
    pub amp_s: f64,
    /// Optional two-column `(radius, density)` file defining the mass
    /// coordinate.
    pub density_profile: Option<String>,
    /// Optional nodal sample files for custom data.
    pub custom_p: Option<String>,
    pub custom_u: Option<String>,
    pub custom_s: Option<String>,
    // [picard]
    pub picard_t: Option<f64>,
    pub picard_k_max: usize,
    pub picard_tol: f64,
    // [output]
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 2.0,
            cv: 1.5,
            a_const: 1.0,
            n: 256,
            cfl: 0.4,
            mode: Mode::Nonlinear,
            t_final: 1.0,
            output_every: 10,
            nu: 0.0,
            epsilon: 1e-3,
            profile: ProfileKind::CompactBump,
            flatness_order: 1,
            amp_p: 1.0,
            amp_u: 1.0,
            amp_s: 1.0,
            density_profile: None,
            custom_p: None,
            custom_u: None,
            custom_s: None,
            picard_t: None,
            picard_k_max: 8,
            picard_tol: 1e-10,
            out_dir: "out".into(),
        }
    }
}

impl RunConfig {
    /// Parse a config file, then apply `key=value` overrides (keys in
    /// `section.name` form), then validate.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: idx + 1, text: raw.to_string() });
            };
            let qualified = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            self.set(&qualified, value.trim())?;
        }
        Ok(())
    }

    fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
        value.parse().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            constraint: format!("expected a number, got `{value}`"),
        })
    }

    fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
        value.parse().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            constraint: format!("expected a non-negative integer, got `{value}`"),
        })
    }

    /// Set one field by qualified key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "geometry.a" => self.a = Self::parse_f64(key, value)?,
            "geometry.b" => self.b = Self::parse_f64(key, value)?,
            "gas.cv" => self.cv = Self::parse_f64(key, value)?,
            "gas.A" => self.a_const = Self::parse_f64(key, value)?,
            "grid.n" => self.n = Self::parse_usize(key, value)?,
            "grid.cfl" => self.cfl = Self::parse_f64(key, value)?,
            "run.mode" => {
                self.mode = match value {
                    "nonlinear" => Mode::Nonlinear,
                    "linearized" => Mode::Linearized,
                    "picard" => Mode::Picard,
                    "radiation-off" => Mode::RadiationOff,
                    other => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            constraint: format!(
                                "expected nonlinear|linearized|picard|radiation-off, got `{other}`"
                            ),
                        })
                    }
                }
            }
            "run.t_final" => self.t_final = Self::parse_f64(key, value)?,
            "run.output_every" => self.output_every = Self::parse_usize(key, value)?,
            "run.nu" => self.nu = Self::parse_f64(key, value)?,
            "initial.epsilon" => self.epsilon = Self::parse_f64(key, value)?,
            "initial.profile" => {
                self.profile = match value {
                    "sine-bump" => ProfileKind::SineBump,
                    "compact-bump" => ProfileKind::CompactBump,
                    "custom" => ProfileKind::Custom,
                    other => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            constraint: format!(
                                "expected sine-bump|compact-bump|custom, got `{other}`"
                            ),
                        })
                    }
                }
            }
            "initial.flatness_order" => {
                self.flatness_order = Self::parse_usize(key, value)? as u32
            }
            "initial.amp_p" => self.amp_p = Self::parse_f64(key, value)?,
            "initial.amp_u" => self.amp_u = Self::parse_f64(key, value)?,
            "initial.amp_s" => self.amp_s = Self::parse_f64(key, value)?,
            "initial.density_profile" => self.density_profile = Some(value.to_string()),
            "initial.custom_p" => self.custom_p = Some(value.to_string()),
            "initial.custom_u" => self.custom_u = Some(value.to_string()),
            "initial.custom_s" => self.custom_s = Some(value.to_string()),
            "picard.T" => self.picard_t = Some(Self::parse_f64(key, value)?),
            "picard.k_max" => self.picard_k_max = Self::parse_usize(key, value)?,
            "picard.tol" => self.picard_tol = Self::parse_f64(key, value)?,
            "output.dir" => self.out_dir = value.to_string(),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &str, constraint: &str| -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::BadValue { key: key.into(), constraint: constraint.into() })
            }
        };
        check(self.a > 0.0, "geometry.a", "must be > 0")?;
        check(self.b > self.a, "geometry.b", "must be > geometry.a")?;
        check(self.cv > 0.0, "gas.cv", "must be > 0")?;
        check(self.a_const > 0.0, "gas.A", "must be > 0")?;
        check(self.n >= 8, "grid.n", "must be >= 8")?;
        check(self.cfl > 0.0 && self.cfl <= 1.0, "grid.cfl", "must be in (0, 1]")?;
        check(self.t_final >= 0.0, "run.t_final", "must be >= 0")?;
        check(self.output_every >= 1, "run.output_every", "must be >= 1")?;
        check(self.nu >= 0.0, "run.nu", "must be >= 0")?;
        check(self.epsilon >= 0.0, "initial.epsilon", "must be >= 0")?;
        check(self.flatness_order >= 1, "initial.flatness_order", "must be >= 1")?;
        check(self.picard_k_max >= 1, "picard.k_max", "must be >= 1")?;
        check(self.picard_tol > 0.0, "picard.tol", "must be > 0")?;
        if self.mode == Mode::Picard {
            match self.picard_t {
                None => {
                    return Err(ConfigError::MissingForMode {
                        mode: "picard".into(),
                        key: "picard.T".into(),
                    })
                }
                Some(t) => check(t > 0.0, "picard.T", "must be > 0")?,
            }
        }
        if self.profile == ProfileKind::Custom {
            for (key, value) in [
                ("initial.custom_p", &self.custom_p),
                ("initial.custom_u", &self.custom_u),
                ("initial.custom_s", &self.custom_s),
            ] {
                if value.is_none() {
                    return Err(ConfigError::MissingForMode {
                        mode: "custom profile".into(),
                        key: key.into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it reproduces this configuration.
    pub fn echo(&self) -> String {
        let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let fmt_f = |v: f64| format!("{v:.17e}");
        sections.entry("geometry").or_default().push(format!("a = {}", fmt_f(self.a)));
        sections.entry("geometry").or_default().push(format!("b = {}", fmt_f(self.b)));
        sections.entry("gas").or_default().push(format!("cv = {}", fmt_f(self.cv)));
        sections.entry("gas").or_default().push(format!("A = {}", fmt_f(self.a_const)));
        sections.entry("grid").or_default().push(format!("n = {}", self.n));
        sections.entry("grid").or_default().push(format!("cfl = {}", fmt_f(self.cfl)));
        sections.entry("run").or_default().push(format!("mode = {}", self.mode));
        sections.entry("run").or_default().push(format!("t_final = {}", fmt_f(self.t_final)));
        sections.entry("run").or_default().push(format!("output_every = {}", self.output_every));
        sections.entry("run").or_default().push(format!("nu = {}", fmt_f(self.nu)));
        let ini = sections.entry("initial").or_default();
        ini.push(format!("epsilon = {}", fmt_f(self.epsilon)));
        ini.push(format!("profile = {}", self.profile.as_str()));
        ini.push(format!("flatness_order = {}", self.flatness_order));
        ini.push(format!("amp_p = {}", fmt_f(self.amp_p)));
        ini.push(format!("amp_u = {}", fmt_f(self.amp_u)));
        ini.push(format!("amp_s = {}", fmt_f(self.amp_s)));
        if let Some(p) = &self.density_profile {
            ini.push(format!("density_profile = {p}"));
        }
        if let Some(p) = &self.custom_p {
            ini.push(format!("custom_p = {p}"));
        }
        if let Some(p) = &self.custom_u {
            ini.push(format!("custom_u = {p}"));
        }
        if let Some(p) = &self.custom_s {
            ini.push(format!("custom_s = {p}"));
        }
        let pic = sections.entry("picard").or_default();
        if let Some(t) = self.picard_t {
            pic.push(format!("T = {}", fmt_f(t)));
        }
        pic.push(format!("k_max = {}", self.picard_k_max));
        pic.push(format!("tol = {}", fmt_f(self.picard_tol)));
        sections.entry("output").or_default().push(format!("dir = {}", self.out_dir));
        let mut out = String::new();
        for (name, lines) in sections {
            out.push_str(&format!("[{name}]\n"));
            for line in lines {
                out.push_str(&line);
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}
