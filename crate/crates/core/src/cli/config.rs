//! Experiment configuration read from TOML.

use std::path::Path;

use serde::{de, Deserialize, Deserializer};

use super::CliError;
use crate::params::ModelParams;
use crate::rational::{serde_q, Q};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: Option<ModelParams>,
    pub admissible: Option<AdmissibleSection>,
    pub decay_fit: Option<DecayFitSection>,
    pub kernel_norm: Option<KernelNormSection>,
    pub evolve: Option<EvolveSection>,
    pub gevrey: Option<GevreySection>,
    pub toolkit: Option<ToolkitSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok((cfg, text))
    }

    /// The shared `[params]` table, validated against the standing assumptions.
    pub fn params(&self) -> Result<&ModelParams, CliError> {
        let p = self
            .params
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [params] table".into()))?;
        p.require_standing().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] table")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleSection {
    /// Theorems checked against the shared `[params]`.
    #[serde(default)]
    pub theorems: Vec<String>,
    /// Extra rows, each with its own parameters.
    #[serde(default)]
    pub cases: Vec<AdmissibleCase>,
    /// The small `ε > 0` of the 6B weights.
    #[serde(with = "serde_q", default = "default_extra")]
    pub eps_extra: Q,
}

fn default_extra() -> Q {
    crate::rational::q(1, 100)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleCase {
    pub theorem: String,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub points: usize,
    pub half_length: f64,
}

/// Gaussian data `amplitude · e^{−|x|²/(2 width²)}` for each of `u0` and `u1`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "one")]
    pub u0: f64,
    #[serde(default)]
    pub u1: f64,
    #[serde(default = "one")]
    pub width: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { u0: 1.0, u1: 0.0, width: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFitSection {
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    pub window: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Any of `u_l2`, `u_lq`, `ut_l2`.
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    #[serde(default = "default_fit_tol")]
    pub tol: f64,
    /// Mass outside `edge_radius · L` above this trips the wrap-around monitor.
    #[serde(default = "default_edge_limit")]
    pub edge_limit: f64,
    #[serde(default = "default_edge_radius")]
    pub edge_radius: f64,
}

fn default_samples() -> usize {
    25
}

fn default_observables() -> Vec<String> {
    vec!["u_l2".into()]
}

fn default_fit_tol() -> f64 {
    0.1
}

fn default_edge_limit() -> f64 {
    1e-3
}

fn default_edge_radius() -> f64 {
    0.9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelNormSection {
    pub kernel: String,
    pub band: String,
    #[serde(with = "serde_q", default = "zero_q")]
    pub a: Q,
    #[serde(default = "default_r", deserialize_with = "exponent")]
    pub r: f64,
    /// `small_t` or `large_t`.
    pub regime: String,
    /// Defaults to the regime's standard window.
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_kernel_samples")]
    pub samples: usize,
    #[serde(default = "default_kernel_tol")]
    pub tol: f64,
    /// Evaluation budget of each inner transform.
    pub budget: Option<usize>,
}

fn zero_q() -> Q {
    crate::rational::qi(0)
}

fn default_r() -> f64 {
    1.0
}

fn default_kernel_samples() -> usize {
    9
}

fn default_kernel_tol() -> f64 {
    0.15
}

/// A Lebesgue exponent: a number, or `"inf"`.
fn exponent<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Text(String),
    }
    let r = match Raw::deserialize(d)? {
        Raw::Int(v) => v as f64,
        Raw::Float(v) => v,
        Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
        Raw::Text(t) => t
            .parse()
            .map_err(|_| de::Error::custom(format!("bad exponent {t:?}")))?,
    };
    if r < 1.0 || r.is_nan() {
        return Err(de::Error::custom(format!("exponent must be ≥ 1, got {r}")));
    }
    Ok(r)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    /// Overrides `params.p`.
    #[serde(with = "serde_q::option", default)]
    pub p: Option<Q>,
    /// `u` for `|u|^p`, `ut` for `|u_t|^p`.
    #[serde(default = "default_nonlinearity")]
    pub nonlinearity: String,
    pub dt: f64,
    pub t_end: f64,
    /// Write every `stride`-th step.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_ceiling")]
    pub blowup_ceiling: f64,
    /// From this time on `‖u‖_{L²}` must not increase.
    pub monotone_from: Option<f64>,
    /// Relative slack of the monotonicity check.
    #[serde(default = "default_monotone_slack")]
    pub monotone_slack: f64,
    /// Write the final field as a binary dump next to the CSV.
    #[serde(default)]
    pub dump: bool,
}

fn default_nonlinearity() -> String {
    "u".into()
}

fn default_stride() -> usize {
    1
}

fn default_ceiling() -> f64 {
    1e6
}

fn default_monotone_slack() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreySection {
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    /// Defaults to the largest constant the damping allows.
    pub c: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_gevrey_samples")]
    pub samples: usize,
    /// Allowed ratio `E(t)/E(0)`.
    #[serde(default = "default_bound")]
    pub bound: f64,
}

fn default_gevrey_samples() -> usize {
    41
}

fn default_bound() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitSection {
    /// `bell-check`, `partitions` or `duhamel`.
    pub task: String,
    /// Largest order for `bell-check`, the order for `partitions`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// `(α, β)` lattice spacing and extent for `duhamel`.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Times entering the ratio spread.
    #[serde(default = "default_spread_from")]
    pub spread_from: f64,
    #[serde(default = "default_spread")]
    pub max_spread: f64,
}

fn default_order() -> usize {
    12
}

fn default_step() -> f64 {
    0.25
}

fn default_extent() -> f64 {
    3.0
}

fn default_times() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}

fn default_spread_from() -> f64 {
    10.0
}

fn default_spread() -> f64 {
    3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_a_position() {
        let err = ExperimentConfig::parse("[params]\nsigma = 1\nsigmaa = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("sigmaa"), "{msg}");
    }

    #[test]
    fn rationals_parse_from_strings() {
        let cfg = ExperimentConfig::parse(
            "[params]\nsigma = 2\ndelta = \"9/10\"\nn = 3\nq = 5\nm = 1\ns = \"5/2\"\n",
        )
        .unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.delta, crate::rational::q(9, 10));
        assert_eq!(p.s, crate::rational::q(5, 2));
    }

    #[test]
    fn exponent_accepts_inf() {
        let cfg = ExperimentConfig::parse(
            "[kernel_norm]\nkernel = \"K0\"\nband = \"full\"\nr = \"inf\"\nregime = \"small_t\"\n",
        )
        .unwrap();
        assert!(cfg.kernel_norm.unwrap().r.is_infinite());
    }
}
