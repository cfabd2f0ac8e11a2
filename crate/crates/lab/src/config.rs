//! Line-oriented run configuration.
//!
//! ```text
//! subcommand = excitation
//! seed = 42
//!
//! [params]
//! lambda = 1e-16 /s
//! a = 1e-5 cm
//! ```
//!
//! Comments start with `#`. Every key is known in advance; unknown keys,
//! missing units and out-of-range values are all reported together.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use qrcsl_core::excitation::NucleusSpec;
use qrcsl_core::trajectories::NoiseScheme;
use qrcsl_core::{ModelParams, ModelVariant};
use serde::Serialize;

use crate::units::{format_f64, parse_quantity, parse_quantity_list, Dimension, UnitError};

/// Seed used when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_110_406;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Kernels,
    CollapseRate,
    EnergyRate,
    Simulate,
    Excitation,
    Scan,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Kernels,
        Subcommand::CollapseRate,
        Subcommand::EnergyRate,
        Subcommand::Simulate,
        Subcommand::Excitation,
        Subcommand::Scan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Kernels => "kernels",
            Subcommand::CollapseRate => "collapse-rate",
            Subcommand::EnergyRate => "energy-rate",
            Subcommand::Simulate => "simulate",
            Subcommand::Excitation => "excitation",
            Subcommand::Scan => "scan",
        }
    }

    /// Whether results depend on random draws.
    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Subcommand::Kernels | Subcommand::Simulate)
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (csv or json)")),
        }
    }
}

/// Physical parameters in canonical units (1/s, cm, MeV).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub a: f64,
    /// Rest energy, MeV.
    pub mass: f64,
    pub alpha_fs: f64,
}

impl ParamsConfig {
    pub fn model(&self) -> qrcsl_core::Result<ModelParams> {
        ModelParams::new(self.lambda, self.a, ModelParams::mass_from_mev(self.mass))?.with_alpha_fs(self.alpha_fs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelsConfig {
    pub mu: Vec<f64>,
    /// Separations for the quasilocality profile, units of a.
    pub separations: Vec<f64>,
    pub profile_mu: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateConfig {
    /// Units of a.
    pub separation: f64,
    pub width: f64,
    pub weight_left: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRateConfig {
    pub mu_min: f64,
    pub mu_max: f64,
    pub points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub n_points: u64,
    /// Units of a.
    pub dx: f64,
    /// Units of 1/λ.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSettings {
    pub n_traj: u64,
    pub t_final: f64,
    #[serde(serialize_with = "ser_scheme")]
    pub scheme: NoiseScheme,
    pub checkpoints: u64,
    pub kinetic: f64,
    #[serde(serialize_with = "ser_variant")]
    pub variant: ModelVariant,
    pub mu: f64,
    /// Units of 1/a.
    pub p_max: f64,
}

fn ser_scheme<S: serde::Serializer>(s: &NoiseScheme, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.as_str())
}

fn ser_variant<S: serde::Serializer>(v: &ModelVariant, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(variant_name(*v))
}

fn variant_name(v: ModelVariant) -> &'static str {
    match v {
        ModelVariant::Csl => "csl",
        ModelVariant::Qrcsl => "qrcsl",
        ModelVariant::Rcsl => "rcsl",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcitationConfig {
    /// 1/cm.
    pub k: f64,
    /// s.
    pub tau: f64,
    /// MeV.
    pub delta_e: f64,
    /// 1/kg.
    pub nuclei_per_kg: f64,
}

impl ExcitationConfig {
    pub fn nucleus(&self) -> qrcsl_core::Result<NucleusSpec> {
        NucleusSpec::new("configured", self.k, self.tau, self.delta_e, self.nuclei_per_kg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: u64,
    pub a_min: f64,
    pub a_max: f64,
    pub a_points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub seed: u64,
    pub params: ParamsConfig,
    pub kernels: KernelsConfig,
    pub state: StateConfig,
    pub collapse_rate_mu: Vec<f64>,
    pub energy_rate: EnergyRateConfig,
    pub grid: GridConfig,
    pub ensemble: EnsembleSettings,
    pub excitation: ExcitationConfig,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grw = ModelParams::grw();
        let ge = NucleusSpec::ge74();
        Self {
            subcommand: Subcommand::Excitation,
            seed: DEFAULT_SEED,
            params: ParamsConfig {
                lambda: grw.lambda(),
                a: grw.a(),
                mass: qrcsl_core::constants::PROTON_MASS_MEV,
                alpha_fs: grw.alpha_fs(),
            },
            kernels: KernelsConfig {
                mu: vec![0.5, 1.0, 10.0, 100.0],
                separations: vec![0.0, 1.0, 2.0, 4.0, 8.0, 10.0],
                profile_mu: 10.0,
                samples: 200_000,
            },
            state: StateConfig {
                separation: 10.0,
                width: 0.5,
                weight_left: 0.5,
            },
            collapse_rate_mu: vec![1.0, 10.0, 100.0, 1000.0, 1e4, grw.mu()],
            energy_rate: EnergyRateConfig {
                mu_min: 1.0,
                mu_max: 1e6,
                points: 25,
            },
            grid: GridConfig {
                n_points: 64,
                dx: 0.5,
                dt: 0.05,
            },
            ensemble: EnsembleSettings {
                n_traj: 1000,
                t_final: 10.0,
                scheme: NoiseScheme::Cooked,
                checkpoints: 10,
                kinetic: 0.0,
                variant: ModelVariant::Csl,
                mu: 1e3,
                p_max: 10.0,
            },
            excitation: ExcitationConfig {
                k: ge.k,
                tau: ge.tau,
                delta_e: ge.delta_e,
                nuclei_per_kg: ge.nuclei_per_kg,
            },
            scan: ScanConfig {
                lambda_min: 1e-22,
                lambda_max: 1e-8,
                lambda_points: 15,
                a_min: 1e-7,
                a_max: 1e-3,
                a_points: 9,
            },
            output: OutputConfig {
                path: None,
                format: Format::Json,
            },
        }
    }
}

/// One validation problem, located by line when it has one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Quantity(&'static [Dimension]),
    List(&'static [Dimension]),
    Integer,
    Text,
}

use Dimension as D;

const DIMENSIONLESS: &[Dimension] = &[D::Dimensionless];

/// `(section, key, kind)`; the empty section is the top level.
const SCHEMA: &[(&str, &str, Kind)] = &[
    ("", "subcommand", Kind::Text),
    ("", "seed", Kind::Integer),
    ("params", "lambda", Kind::Quantity(&[D::Rate])),
    ("params", "a", Kind::Quantity(&[D::Length])),
    ("params", "mass", Kind::Quantity(&[D::Energy, D::Wavenumber])),
    ("params", "alpha_fs", Kind::Quantity(DIMENSIONLESS)),
    ("kernels", "mu", Kind::List(DIMENSIONLESS)),
    ("kernels", "separations", Kind::List(&[D::LatticeLength])),
    ("kernels", "profile_mu", Kind::Quantity(DIMENSIONLESS)),
    ("kernels", "samples", Kind::Integer),
    ("state", "separation", Kind::Quantity(&[D::LatticeLength])),
    ("state", "width", Kind::Quantity(&[D::LatticeLength])),
    ("state", "weight_left", Kind::Quantity(DIMENSIONLESS)),
    ("collapse-rate", "mu", Kind::List(DIMENSIONLESS)),
    ("energy-rate", "mu_min", Kind::Quantity(DIMENSIONLESS)),
    ("energy-rate", "mu_max", Kind::Quantity(DIMENSIONLESS)),
    ("energy-rate", "points", Kind::Integer),
    ("grid", "n_points", Kind::Integer),
    ("grid", "dx", Kind::Quantity(&[D::LatticeLength])),
    ("grid", "dt", Kind::Quantity(&[D::CollapseTime])),
    ("ensemble", "n_traj", Kind::Integer),
    ("ensemble", "t_final", Kind::Quantity(&[D::CollapseTime])),
    ("ensemble", "scheme", Kind::Text),
    ("ensemble", "checkpoints", Kind::Integer),
    ("ensemble", "kinetic", Kind::Quantity(DIMENSIONLESS)),
    ("ensemble", "variant", Kind::Text),
    ("ensemble", "mu", Kind::Quantity(DIMENSIONLESS)),
    ("ensemble", "p_max", Kind::Quantity(&[D::LatticeMomentum])),
    ("excitation", "k", Kind::Quantity(&[D::Wavenumber, D::Energy])),
    ("excitation", "tau", Kind::Quantity(&[D::Time])),
    ("excitation", "delta_e", Kind::Quantity(&[D::Energy])),
    ("excitation", "nuclei_per_kg", Kind::Quantity(&[D::PerMass])),
    ("scan", "lambda_min", Kind::Quantity(&[D::Rate])),
    ("scan", "lambda_max", Kind::Quantity(&[D::Rate])),
    ("scan", "lambda_points", Kind::Integer),
    ("scan", "a_min", Kind::Quantity(&[D::Length])),
    ("scan", "a_max", Kind::Quantity(&[D::Length])),
    ("scan", "a_points", Kind::Integer),
    ("output", "path", Kind::Text),
    ("output", "format", Kind::Text),
];

#[derive(Debug, Clone)]
enum Value {
    Number(f64, Dimension),
    List(Vec<f64>),
    Integer(u64),
    Text(String),
}

struct Entry {
    line: usize,
    value: Value,
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Parse and validate `text`. Returns every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section = String::new();
    let mut section_known = true;
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(ConfigError {
                    line: Some(line_no),
                    key: line.into(),
                    message: "malformed section header".into(),
                });
                continue;
            };
            section = name.trim().to_string();
            section_known = SCHEMA.iter().any(|(s, _, _)| *s == section);
            if !section_known {
                errors.push(ConfigError {
                    line: Some(line_no),
                    key: format!("[{section}]"),
                    message: "unknown section".into(),
                });
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line_no),
                key: line.into(),
                message: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        let name = qualified(&section, key);
        if !section_known {
            continue;
        }
        let Some(&(_, _, kind)) = SCHEMA.iter().find(|(s, k, _)| *s == section && *k == key) else {
            errors.push(ConfigError {
                line: Some(line_no),
                key: name,
                message: "unknown key".into(),
            });
            continue;
        };
        let parsed = match kind {
            Kind::Quantity(dims) => parse_quantity(value, dims)
                .map(|q| Value::Number(q.value, q.dimension))
                .map_err(|e| e.to_string()),
            Kind::List(dims) => parse_quantity_list(value, dims)
                .map(|qs| Value::List(qs.into_iter().map(|q| q.value).collect()))
                .map_err(|e: UnitError| e.to_string()),
            Kind::Integer => value
                .replace('_', "")
                .parse::<u64>()
                .map(Value::Integer)
                .map_err(|_| format!("`{value}` is not a nonnegative integer")),
            Kind::Text => Ok(Value::Text(value.trim_matches('"').to_string())),
        };
        match parsed {
            Ok(v) => {
                let slot = (section.clone(), key.to_string());
                if let Some(prev) = entries.get(&slot) {
                    errors.push(ConfigError {
                        line: Some(line_no),
                        key: name,
                        message: format!("duplicate key (first set on line {})", prev.line),
                    });
                } else {
                    entries.insert(
                        slot,
                        Entry {
                            line: line_no,
                            value: v,
                        },
                    );
                }
            }
            Err(message) => errors.push(ConfigError {
                line: Some(line_no),
                key: name,
                message,
            }),
        }
    }

    let mut builder = Builder {
        entries,
        errors,
        config: RunConfig::default(),
    };
    builder.fill();
    if builder.errors.is_empty() {
        Ok(builder.config)
    } else {
        Err(builder.errors)
    }
}

struct Builder {
    entries: BTreeMap<(String, String), Entry>,
    errors: Vec<ConfigError>,
    config: RunConfig,
}

impl Builder {
    fn take(&mut self, section: &str, key: &str) -> Option<(usize, Value)> {
        self.entries
            .remove(&(section.to_string(), key.to_string()))
            .map(|e| (e.line, e.value))
    }

    fn error(&mut self, line: Option<usize>, section: &str, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            key: qualified(section, key),
            message: message.into(),
        });
    }

    /// Number in canonical units; `check` returns a violated requirement.
    fn number(&mut self, section: &str, key: &str, target: &mut f64, check: fn(f64) -> Option<&'static str>) {
        let mut at = None;
        if let Some((line, value)) = self.take(section, key) {
            at = Some(line);
            if let Value::Number(v, dim) = value {
                let v = if section == "params" && key == "mass" && dim == Dimension::Wavenumber {
                    v * qrcsl_core::constants::HBAR_C_MEV_CM
                } else if section == "excitation" && key == "k" && dim == Dimension::Energy {
                    v / qrcsl_core::constants::HBAR_C_MEV_CM
                } else {
                    v
                };
                *target = v;
            }
        }
        if let Some(req) = check(*target) {
            self.error(
                at,
                section,
                key,
                format!("value {} violates: {req}", format_f64(*target)),
            );
        }
    }

    fn list(&mut self, section: &str, key: &str, target: &mut Vec<f64>, check: fn(f64) -> Option<&'static str>) {
        if let Some((line, Value::List(v))) = self.take(section, key) {
            if v.is_empty() {
                self.error(Some(line), section, key, "list must not be empty");
            }
            *target = v;
        }
        for x in target.clone() {
            if let Some(req) = check(x) {
                self.error(None, section, key, format!("entry {} violates: {req}", format_f64(x)));
            }
        }
    }

    fn integer(&mut self, section: &str, key: &str, target: &mut u64, min: u64) {
        let mut at = None;
        if let Some((line, Value::Integer(v))) = self.take(section, key) {
            *target = v;
            at = Some(line);
        }
        if *target < min {
            self.error(
                at,
                section,
                key,
                format!("value {} is below the minimum {min}", *target),
            );
        }
    }

    fn text<T: FromStr<Err = String>>(&mut self, section: &str, key: &str, target: &mut T) {
        self.text_with(section, key, target, |s| s.parse());
    }

    fn text_with<T>(&mut self, section: &str, key: &str, target: &mut T, parse: fn(&str) -> Result<T, String>) {
        if let Some((line, Value::Text(s))) = self.take(section, key) {
            match parse(&s) {
                Ok(v) => *target = v,
                Err(e) => self.error(Some(line), section, key, e),
            }
        }
    }

    fn fill(&mut self) {
        let mut c = std::mem::take(&mut self.config);
        self.text("", "subcommand", &mut c.subcommand);
        if let Some((_, Value::Integer(s))) = self.take("", "seed") {
            c.seed = s;
        }

        self.number("params", "lambda", &mut c.params.lambda, positive);
        self.number("params", "a", &mut c.params.a, positive);
        self.number("params", "mass", &mut c.params.mass, positive);
        self.number("params", "alpha_fs", &mut c.params.alpha_fs, positive);

        self.list("kernels", "mu", &mut c.kernels.mu, positive);
        self.list("kernels", "separations", &mut c.kernels.separations, nonnegative);
        self.number("kernels", "profile_mu", &mut c.kernels.profile_mu, positive);
        self.integer("kernels", "samples", &mut c.kernels.samples, 2);

        self.number("state", "separation", &mut c.state.separation, positive);
        self.number("state", "width", &mut c.state.width, positive);
        self.number("state", "weight_left", &mut c.state.weight_left, unit_interval);

        self.list("collapse-rate", "mu", &mut c.collapse_rate_mu, positive);

        self.number("energy-rate", "mu_min", &mut c.energy_rate.mu_min, positive);
        self.number("energy-rate", "mu_max", &mut c.energy_rate.mu_max, positive);
        self.integer("energy-rate", "points", &mut c.energy_rate.points, 1);
        if c.energy_rate.mu_max < c.energy_rate.mu_min {
            self.error(None, "energy-rate", "mu_max", "mu_max must be >= mu_min");
        }

        self.integer("grid", "n_points", &mut c.grid.n_points, 8);
        self.number("grid", "dx", &mut c.grid.dx, positive);
        self.number("grid", "dt", &mut c.grid.dt, positive);

        self.integer("ensemble", "n_traj", &mut c.ensemble.n_traj, 100);
        self.number("ensemble", "t_final", &mut c.ensemble.t_final, positive);
        self.text_with("ensemble", "scheme", &mut c.ensemble.scheme, parse_scheme);
        self.integer("ensemble", "checkpoints", &mut c.ensemble.checkpoints, 1);
        self.number("ensemble", "kinetic", &mut c.ensemble.kinetic, finite);
        self.text_with("ensemble", "variant", &mut c.ensemble.variant, parse_variant);
        self.number("ensemble", "mu", &mut c.ensemble.mu, positive);
        self.number("ensemble", "p_max", &mut c.ensemble.p_max, positive);

        self.number("excitation", "k", &mut c.excitation.k, positive);
        self.number("excitation", "tau", &mut c.excitation.tau, positive);
        self.number("excitation", "delta_e", &mut c.excitation.delta_e, positive);
        self.number("excitation", "nuclei_per_kg", &mut c.excitation.nuclei_per_kg, positive);

        self.number("scan", "lambda_min", &mut c.scan.lambda_min, positive);
        self.number("scan", "lambda_max", &mut c.scan.lambda_max, positive);
        self.integer("scan", "lambda_points", &mut c.scan.lambda_points, 0);
        self.number("scan", "a_min", &mut c.scan.a_min, positive);
        self.number("scan", "a_max", &mut c.scan.a_max, positive);
        self.integer("scan", "a_points", &mut c.scan.a_points, 0);
        if c.scan.lambda_max < c.scan.lambda_min {
            self.error(None, "scan", "lambda_max", "lambda_max must be >= lambda_min");
        }
        if c.scan.a_max < c.scan.a_min {
            self.error(None, "scan", "a_max", "a_max must be >= a_min");
        }

        if let Some((_, Value::Text(p))) = self.take("output", "path") {
            c.output.path = if p.is_empty() { None } else { Some(p) };
        }
        self.text("output", "format", &mut c.output.format);
        self.config = c;
    }
}

fn parse_scheme(s: &str) -> Result<NoiseScheme, String> {
    match s {
        "cooked" => Ok(NoiseScheme::Cooked),
        "raw" => Ok(NoiseScheme::Raw),
        _ => Err(format!("unknown noise scheme `{s}` (cooked or raw)")),
    }
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    match s {
        "csl" => Ok(ModelVariant::Csl),
        "qrcsl" => Ok(ModelVariant::Qrcsl),
        _ => Err(format!("unknown simulation variant `{s}` (csl or qrcsl)")),
    }
}

fn positive(x: f64) -> Option<&'static str> {
    (!(x > 0.0 && x.is_finite())).then_some("must be positive and finite")
}

fn nonnegative(x: f64) -> Option<&'static str> {
    (!(x >= 0.0 && x.is_finite())).then_some("must be nonnegative and finite")
}

fn finite(x: f64) -> Option<&'static str> {
    (!x.is_finite()).then_some("must be finite")
}

fn unit_interval(x: f64) -> Option<&'static str> {
    (!(0.0..=1.0).contains(&x)).then_some("must lie in [0, 1]")
}

fn list_text(values: &[f64]) -> String {
    values.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Canonical config text; parsing it yields `self` again.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = self;
        let _ = writeln!(s, "subcommand = {}", c.subcommand);
        let _ = writeln!(s, "seed = {}", c.seed);
        let _ = writeln!(s, "\n[params]");
        let _ = writeln!(s, "lambda = {} /s", format_f64(c.params.lambda));
        let _ = writeln!(s, "a = {} cm", format_f64(c.params.a));
        let _ = writeln!(s, "mass = {} MeV", format_f64(c.params.mass));
        let _ = writeln!(s, "alpha_fs = {}", format_f64(c.params.alpha_fs));
        let _ = writeln!(s, "\n[kernels]");
        let _ = writeln!(s, "mu = {}", list_text(&c.kernels.mu));
        let _ = writeln!(s, "separations = {} a", list_text(&c.kernels.separations));
        let _ = writeln!(s, "profile_mu = {}", format_f64(c.kernels.profile_mu));
        let _ = writeln!(s, "samples = {}", c.kernels.samples);
        let _ = writeln!(s, "\n[state]");
        let _ = writeln!(s, "separation = {} a", format_f64(c.state.separation));
        let _ = writeln!(s, "width = {} a", format_f64(c.state.width));
        let _ = writeln!(s, "weight_left = {}", format_f64(c.state.weight_left));
        let _ = writeln!(s, "\n[collapse-rate]");
        let _ = writeln!(s, "mu = {}", list_text(&c.collapse_rate_mu));
        let _ = writeln!(s, "\n[energy-rate]");
        let _ = writeln!(s, "mu_min = {}", format_f64(c.energy_rate.mu_min));
        let _ = writeln!(s, "mu_max = {}", format_f64(c.energy_rate.mu_max));
        let _ = writeln!(s, "points = {}", c.energy_rate.points);
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "n_points = {}", c.grid.n_points);
        let _ = writeln!(s, "dx = {} a", format_f64(c.grid.dx));
        let _ = writeln!(s, "dt = {} /lambda", format_f64(c.grid.dt));
        let _ = writeln!(s, "\n[ensemble]");
        let _ = writeln!(s, "n_traj = {}", c.ensemble.n_traj);
        let _ = writeln!(s, "t_final = {} /lambda", format_f64(c.ensemble.t_final));
        let _ = writeln!(s, "scheme = {}", c.ensemble.scheme.as_str());
        let _ = writeln!(s, "checkpoints = {}", c.ensemble.checkpoints);
        let _ = writeln!(s, "kinetic = {}", format_f64(c.ensemble.kinetic));
        let _ = writeln!(s, "variant = {}", variant_name(c.ensemble.variant));
        let _ = writeln!(s, "mu = {}", format_f64(c.ensemble.mu));
        let _ = writeln!(s, "p_max = {} /a", format_f64(c.ensemble.p_max));
        let _ = writeln!(s, "\n[excitation]");
        let _ = writeln!(s, "k = {} /cm", format_f64(c.excitation.k));
        let _ = writeln!(s, "tau = {} s", format_f64(c.excitation.tau));
        let _ = writeln!(s, "delta_e = {} MeV", format_f64(c.excitation.delta_e));
        let _ = writeln!(s, "nuclei_per_kg = {} /kg", format_f64(c.excitation.nuclei_per_kg));
        let _ = writeln!(s, "\n[scan]");
        let _ = writeln!(s, "lambda_min = {} /s", format_f64(c.scan.lambda_min));
        let _ = writeln!(s, "lambda_max = {} /s", format_f64(c.scan.lambda_max));
        let _ = writeln!(s, "lambda_points = {}", c.scan.lambda_points);
        let _ = writeln!(s, "a_min = {} cm", format_f64(c.scan.a_min));
        let _ = writeln!(s, "a_max = {} cm", format_f64(c.scan.a_max));
        let _ = writeln!(s, "a_points = {}", c.scan.a_points);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "path = {}", c.output.path.as_deref().unwrap_or(""));
        let _ = writeln!(s, "format = {}", c.output.format.as_str());
        s
    }
}

impl RunConfig {
    /// The config as echoed in a result envelope. The output path is left
    /// out so that the same run written to two places echoes identically.
    pub fn echo(&self) -> RunConfig {
        let mut c = self.clone();
        c.output.path = None;
        c
    }

    pub fn echo_text(&self) -> String {
        self.echo().to_text()
    }
}
