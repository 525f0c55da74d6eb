//! Layered settings: command-line flags, then a JSON config file, then
//! defaults. Every setting is an `Option` until resolution.
//!
//! The config file is one flat JSON object whose keys are the snake_case
//! flag names (`type`, `n`, `twice_j`, `a`, `a_xy`, `a_z`, `b_z`, `b_nz`,
//! `omega`, `theta`, `theta_e`, `theta_n`, `initial`, `cycles`, `stride`,
//! `x`, `y`, `svg`, `sampler`, `threshold`, `mean`, `std`, `seed`,
//! `realizations`, `aggregate`, `series`) plus an optional `command`.
//! A run manifest is accepted too; its `parameters` object is used.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use clap::Args;
use cspin_core::{Interaction, ModelParams, SectorBasis};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// An angle in radians; parses `0.1pi` as `0.1·π` and bare numbers as radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let bad = || format!("cannot parse angle '{s}' (expected radians or a multiple like 0.1pi)");
        let value = match t.strip_suffix("pi").or_else(|| t.strip_suffix("π")) {
            Some(coef) => {
                let coef = coef.trim().trim_end_matches('*').trim();
                let c = match coef {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    c => c.parse::<f64>().map_err(|_| bad())?,
                };
                c * PI
            }
            None => t.parse::<f64>().map_err(|_| bad())?,
        };
        if value.is_finite() {
            Ok(Angle(value))
        } else {
            Err(bad())
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Angle(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_interaction(s: &str) -> Result<Interaction, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "ising" => Ok(Interaction::Ising),
        "xx" => Ok(Interaction::Xx),
        "heisenberg" => Ok(Interaction::Heisenberg),
        "xxz" => Ok(Interaction::Xxz),
        other => Err(format!("unknown interaction '{other}' (expected ising, xx, heisenberg or xxz)")),
    }
}

macro_rules! layered {
    ($(#[$meta:meta])* pub struct $name:ident { $($(#[$fmeta:meta])* pub $field:ident: Option<$ty:ty>,)* }) => {
        $(#[$meta])*
        pub struct $name {
            $($(#[$fmeta])* pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Field-wise `self`, falling back to `lower`.
            pub fn or(self, lower: Self) -> Self {
                Self { $($field: self.$field.or(lower.$field),)* }
            }
        }
    };
}

layered! {
    #[derive(Args, Clone, Debug, Default, Deserialize)]
    #[serde(default)]
    pub struct ModelFlags {
        /// Interaction class: ising, xx, heisenberg or xxz [default: heisenberg]
        #[arg(long = "type", value_name = "KIND", value_parser = parse_interaction)]
        #[serde(rename = "type")]
        pub kind: Option<Interaction>,
        /// Number of satellite spins
        #[arg(long)]
        pub n: Option<usize>,
        /// Twice the total satellite spin of the sector [default: N]
        #[arg(long = "twice-j")]
        pub twice_j: Option<usize>,
        /// Common coupling for a_xy and a_z (MHz)
        #[arg(long, allow_negative_numbers = true)]
        pub a: Option<f64>,
        /// Flip-flop coupling (MHz)
        #[arg(long = "axy", allow_negative_numbers = true)]
        pub a_xy: Option<f64>,
        /// Ising coupling (MHz)
        #[arg(long = "az", allow_negative_numbers = true)]
        pub a_z: Option<f64>,
        /// Central-spin field (MHz) [default: 100]
        #[arg(long = "bz", allow_negative_numbers = true)]
        pub b_z: Option<f64>,
        /// Satellite field (MHz) [default: 0]
        #[arg(long = "bnz", allow_negative_numbers = true)]
        pub b_nz: Option<f64>,
        /// Drive frequency (MHz), period 2π/omega [default: 1]
        #[arg(long)]
        pub omega: Option<f64>,
        /// Pulse error on every spin, e.g. 0.03pi or radians [default: 0]
        #[arg(long, allow_negative_numbers = true)]
        pub theta: Option<Angle>,
        /// Pulse error on the central spin
        #[arg(long = "theta-e", allow_negative_numbers = true)]
        pub theta_e: Option<Angle>,
        /// Pulse error on the satellites
        #[arg(long = "theta-n", allow_negative_numbers = true)]
        pub theta_n: Option<Angle>,
    }
}

impl ModelFlags {
    /// Layers flags over a config file. A flag for a shared value (`a`,
    /// `theta`) also hides the file's per-component values it would set.
    pub fn over(self, mut file: Self) -> Self {
        if self.a.is_some() {
            file.a_xy = None;
            file.a_z = None;
        }
        if self.theta.is_some() {
            file.theta_e = None;
            file.theta_n = None;
        }
        self.or(file)
    }
}

layered! {
    #[derive(Args, Clone, Debug, Default, Deserialize)]
    #[serde(default)]
    pub struct EvolveFlags {
        /// J-up, J-down or m:<twice_m>,<up|down> [default: J-down]
        #[arg(long)]
        pub initial: Option<String>,
        /// Number of drive cycles [default: 1000]
        #[arg(long)]
        pub cycles: Option<u64>,
        /// Record every stride-th cycle [default: 1]
        #[arg(long)]
        pub stride: Option<u64>,
    }
}

layered! {
    #[derive(Args, Clone, Debug, Default, Deserialize)]
    #[serde(default)]
    pub struct PhaseFlags {
        /// x axis as name:start:stop:count, name one of a, a_xy, a_z, b_z, theta
        #[arg(long)]
        pub x: Option<String>,
        /// y axis, same form as --x
        #[arg(long)]
        pub y: Option<String>,
        /// J-up, J-down or m:<twice_m>,<up|down> [default: J-up]
        #[arg(long)]
        pub initial: Option<String>,
        /// Cycles in the time average [default: 10000]
        #[arg(long)]
        pub cycles: Option<u64>,
        /// Also write an SVG heatmap
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub svg: Option<bool>,
    }
}

layered! {
    #[derive(Args, Clone, Debug, Default, Deserialize)]
    #[serde(default)]
    pub struct KrylovFlags {
        /// J-up, J-down or m:<twice_m>,<up|down> [default: J-down]
        #[arg(long)]
        pub initial: Option<String>,
        /// fig2 or stride:<s>,max:<M> [default: fig2]
        #[arg(long)]
        pub sampler: Option<String>,
        /// Overlap above which a basis state counts as occupied [default: 0.001]
        #[arg(long)]
        pub threshold: Option<f64>,
    }
}

layered! {
    #[derive(Args, Clone, Debug, Default, Deserialize)]
    #[serde(default)]
    pub struct DisorderFlags {
        /// J-up, J-down, m:<±N>,<up|down> or a u/d string, satellites first [default: J-down]
        #[arg(long)]
        pub initial: Option<String>,
        /// Mean in-plane coupling [default: the resolved a_xy]
        #[arg(long, allow_negative_numbers = true)]
        pub mean: Option<f64>,
        /// Standard deviation δA_xy of the in-plane couplings [default: 0]
        #[arg(long)]
        pub std: Option<f64>,
        /// Base seed; realization k uses stream k [default: 2024]
        #[arg(long)]
        pub seed: Option<u64>,
        /// Number of realizations [default: 10]
        #[arg(long)]
        pub realizations: Option<usize>,
        /// Cycles in the time average, or series length with --series [default: 50000]
        #[arg(long)]
        pub cycles: Option<u64>,
        /// Record every stride-th cycle in series mode [default: 1]
        #[arg(long)]
        pub stride: Option<u64>,
        /// Also write mean, standard deviation and median over realizations
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub aggregate: Option<bool>,
        /// Also write each realization's stroboscopic time series
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub series: Option<bool>,
    }
}

const KNOWN_KEYS: &[&str] = &[
    "command", "type", "n", "twice_j", "a", "a_xy", "a_z", "b_z", "b_nz", "omega", "theta", "theta_e",
    "theta_n", "initial", "cycles", "stride", "x", "y", "svg", "sampler", "threshold", "mean", "std", "seed",
    "realizations", "aggregate", "series",
];

/// The settings object of a config file or manifest, checked against the
/// key list and the running subcommand.
pub fn load_config(path: Option<&Path>, command: &str) -> CliResult<Value> {
    let Some(path) = path else {
        return Ok(Value::Object(Map::new()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if let Some(params) = value.get_mut("parameters") {
        value = params.take();
    }
    let Value::Object(map) = &value else {
        return Err(CliError::usage(format!("config {} must be a JSON object", path.display())));
    };
    if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(CliError::usage(format!("config {}: unknown key '{key}'", path.display())));
    }
    if let Some(cmd) = map.get("command") {
        if cmd.as_str() != Some(command) {
            return Err(CliError::usage(format!(
                "config {} was written for '{}', not '{command}'",
                path.display(),
                cmd.as_str().unwrap_or("?")
            )));
        }
    }
    Ok(value)
}

pub fn section<T: for<'de> Deserialize<'de>>(config: &Value) -> CliResult<T> {
    serde_json::from_value(config.clone()).map_err(|e| CliError::usage(format!("config: {e}")))
}

const DEFAULT_COUPLING: f64 = 1.3;
const DEFAULT_XXZ_A_Z: f64 = 0.4;

/// Fully resolved model settings, as recorded in manifests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedModel {
    #[serde(rename = "type")]
    pub kind: Interaction,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twice_j: Option<usize>,
    #[serde(flatten)]
    pub params: ModelParams,
}

impl ResolvedModel {
    pub fn basis(&self) -> CliResult<SectorBasis> {
        Ok(SectorBasis::new(self.n, self.twice_j.unwrap_or(self.n))?)
    }
}

/// Couplings consistent with the interaction class; an explicitly
/// contradictory combination is a usage error.
pub fn resolve_model(f: &ModelFlags, default_n: usize, with_sector: bool) -> CliResult<ResolvedModel> {
    let kind = f.kind.unwrap_or(Interaction::Heisenberg);
    let (a_xy, a_z) = match kind {
        Interaction::Ising => {
            if f.a_xy.is_some_and(|v| v != 0.0) {
                return Err(CliError::usage("--type ising requires a_xy = 0"));
            }
            (0.0, f.a_z.or(f.a).unwrap_or(DEFAULT_COUPLING))
        }
        Interaction::Xx => {
            if f.a_z.is_some_and(|v| v != 0.0) {
                return Err(CliError::usage("--type xx requires a_z = 0"));
            }
            (f.a_xy.or(f.a).unwrap_or(DEFAULT_COUPLING), 0.0)
        }
        Interaction::Heisenberg => {
            let given: Vec<f64> = [f.a, f.a_xy, f.a_z].into_iter().flatten().collect();
            if given.windows(2).any(|w| w[0] != w[1]) {
                return Err(CliError::usage(
                    "--type heisenberg locks a_xy = a_z; give one value with --a or use --type xxz",
                ));
            }
            let a = given.first().copied().unwrap_or(DEFAULT_COUPLING);
            (a, a)
        }
        Interaction::Xxz => (
            f.a_xy.or(f.a).unwrap_or(DEFAULT_COUPLING),
            f.a_z.or(f.a).unwrap_or(DEFAULT_XXZ_A_Z),
        ),
    };
    let theta = f.theta.map_or(0.0, |t| t.0);
    let params = ModelParams {
        a_xy,
        a_z,
        b_z: f.b_z.unwrap_or(100.0),
        b_nz: f.b_nz.unwrap_or(0.0),
        omega: f.omega.unwrap_or(1.0),
        theta_e: f.theta_e.map_or(theta, |t| t.0),
        theta_n: f.theta_n.map_or(theta, |t| t.0),
    };
    params.validate()?;
    let n = f.n.unwrap_or(default_n);
    if n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let model = ResolvedModel {
        kind,
        n,
        twice_j: with_sector.then(|| f.twice_j.unwrap_or(n)),
        params,
    };
    if with_sector {
        model.basis()?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        let close = |s: &str, v: f64| assert!((s.parse::<Angle>().unwrap().0 - v).abs() < 1e-15, "{s}");
        close("0.1pi", 0.1 * PI);
        close("pi", PI);
        close("-0.5pi", -0.5 * PI);
        close("0.25*pi", 0.25 * PI);
        close("0.3", 0.3);
        close("1e-2", 0.01);
        assert!("pie".parse::<Angle>().is_err());
        assert!("".parse::<Angle>().is_err());
        assert!("nan".parse::<Angle>().is_err());
    }

    #[test]
    fn angle_from_json() {
        let a: Angle = serde_json::from_str("\"0.03pi\"").unwrap();
        assert!((a.0 - 0.03 * PI).abs() < 1e-15);
        let b: Angle = serde_json::from_str("0.5").unwrap();
        assert_eq!(b.0, 0.5);
    }

    #[test]
    fn flags_beat_file_and_shared_flags_hide_components() {
        let flags = ModelFlags { theta: Some(Angle(0.2)), n: Some(4), ..Default::default() };
        let file = ModelFlags {
            theta_e: Some(Angle(0.7)),
            theta_n: Some(Angle(0.7)),
            n: Some(9),
            omega: Some(2.0),
            ..Default::default()
        };
        let m = resolve_model(&flags.over(file), 21, true).unwrap();
        assert_eq!(m.n, 4);
        assert_eq!(m.params.omega, 2.0);
        assert_eq!((m.params.theta_e, m.params.theta_n), (0.2, 0.2));
    }

    #[test]
    fn heisenberg_rejects_split_couplings() {
        let f = ModelFlags { a_xy: Some(1.0), a_z: Some(2.0), ..Default::default() };
        assert!(matches!(resolve_model(&f, 4, true), Err(CliError::Usage(_))));
        let f = ModelFlags { a_z: Some(2.0), ..Default::default() };
        let m = resolve_model(&f, 4, true).unwrap();
        assert_eq!((m.params.a_xy, m.params.a_z), (2.0, 2.0));
    }

    #[test]
    fn class_constraints() {
        let ising = ModelFlags { kind: Some(Interaction::Ising), a_xy: Some(1.0), ..Default::default() };
        assert!(resolve_model(&ising, 4, true).is_err());
        let xx = ModelFlags { kind: Some(Interaction::Xx), a: Some(0.7), ..Default::default() };
        let m = resolve_model(&xx, 4, true).unwrap();
        assert_eq!((m.params.a_xy, m.params.a_z), (0.7, 0.0));
    }

    #[test]
    fn bad_sector_is_reported() {
        let f = ModelFlags { n: Some(4), twice_j: Some(3), ..Default::default() };
        assert!(resolve_model(&f, 4, true).is_err());
        assert!(resolve_model(&f, 4, false).is_ok());
    }
}
