//! Scenario files: TOML with dotted sections, a closed schema, and unit
//! conversion at ingestion.
//!
//! Interface units are GHz, MHz (for rates, as Γ/2π), ns, dBm, fF, Ω, nA and
//! mΦ₀; [`Scenario`] accessors return SI values and rad/s.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "PHOTON_SOURCE_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Spectroscopy,
    SmithPowerSweep,
    Rabi,
    Wavepacket,
    Timetrace,
    EfficiencySweep,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Spectroscopy,
        ScenarioKind::SmithPowerSweep,
        ScenarioKind::Rabi,
        ScenarioKind::Wavepacket,
        ScenarioKind::Timetrace,
        ScenarioKind::EfficiencySweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Spectroscopy => "spectroscopy",
            ScenarioKind::SmithPowerSweep => "smith_power_sweep",
            ScenarioKind::Rabi => "rabi",
            ScenarioKind::Wavepacket => "wavepacket",
            ScenarioKind::Timetrace => "timetrace",
            ScenarioKind::EfficiencySweep => "efficiency_sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn section(self) -> &'static str {
        match self {
            ScenarioKind::Spectroscopy => "spectroscopy",
            ScenarioKind::SmithPowerSweep => "smith",
            ScenarioKind::Rabi => "rabi",
            ScenarioKind::Wavepacket => "wavepacket",
            ScenarioKind::Timetrace => "timetrace",
            ScenarioKind::EfficiencySweep => "efficiency",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One schema violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ty {
    Float,
    Int,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Any,
    Positive,
    NonNegative,
    AtLeast(i64),
    /// 0 < x ≤ 1
    Fraction,
    /// |x| < 500 (mΦ₀ within one valley)
    Valley,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Fallback {
    Required,
    Optional,
    F(f64),
    I(i64),
}

struct KeySpec {
    key: &'static str,
    ty: Ty,
    rule: Rule,
    default: Fallback,
}

const fn spec(key: &'static str, ty: Ty, rule: Rule, default: Fallback) -> KeySpec {
    KeySpec { key, ty, rule, default }
}

use Fallback::*;
use Rule::*;
use Ty::*;

const COMMON: &[KeySpec] = &[
    spec("seed", Int, AtLeast(0), I(0)),
    spec("qubit.gap_ghz", Float, Positive, F(6.728)),
    spec("qubit.persistent_current_na", Float, NonNegative, F(24.0)),
    spec("network.c_control_ff", Float, Positive, F(1.0)),
    spec("network.c_emission_ff", Float, Positive, F(5.0)),
    spec("network.impedance_ohm", Float, Positive, F(50.0)),
    spec("network.gamma1_mhz", Float, Positive, F(12.5)),
    spec("decoherence.gamma_nr_mhz", Float, NonNegative, F(0.0)),
    spec("decoherence.gamma_phi_mhz", Float, NonNegative, F(0.0)),
];

const SPECTROSCOPY: &[KeySpec] = &[
    spec("spectroscopy.flux_min_mphi0", Float, Valley, Required),
    spec("spectroscopy.flux_max_mphi0", Float, Valley, Required),
    spec("spectroscopy.flux_points", Int, AtLeast(1), Required),
    spec("spectroscopy.freq_min_ghz", Float, Positive, Required),
    spec("spectroscopy.freq_max_ghz", Float, Positive, Required),
    spec("spectroscopy.freq_points", Int, AtLeast(1), Required),
];

const SMITH: &[KeySpec] = &[
    spec("smith.power_min_dbm", Float, Any, F(-149.0)),
    spec("smith.power_max_dbm", Float, Any, F(-125.0)),
    spec("smith.power_step_db", Float, Positive, F(3.0)),
    spec("smith.detuning_span_mhz", Float, Positive, Required),
    spec("smith.detuning_points", Int, AtLeast(3), Required),
];

const RABI: &[KeySpec] = &[
    spec("rabi.rabi_mhz", Float, Positive, F(76.923)),
    spec("rabi.dt_max_ns", Float, Positive, Required),
    spec("rabi.dt_step_ns", Float, Positive, F(0.1)),
    spec("rabi.period_ns", Float, Positive, F(100.0)),
    spec("rabi.detuning_mhz", Float, Any, F(0.0)),
];

const WAVEPACKET: &[KeySpec] = &[
    spec("wavepacket.t_max_ns", Float, Positive, Required),
    spec("wavepacket.t_points", Int, AtLeast(2), Required),
    spec("wavepacket.freq_span_mhz", Float, Positive, Required),
    spec("wavepacket.freq_points", Int, AtLeast(5), Required),
];

const TIMETRACE: &[KeySpec] = &[
    spec("timetrace.period_ns", Float, Positive, F(100.0)),
    spec("timetrace.pulses", Int, AtLeast(1), I(3)),
    spec("timetrace.sample_ns", Float, Positive, F(4.0)),
    spec("timetrace.filter_mhz", Float, Positive, Optional),
    spec("timetrace.rabi_mhz", Float, Positive, F(76.923)),
    spec("timetrace.noise_sigma_rel", Float, NonNegative, F(1.0)),
    spec("timetrace.averages", Int, AtLeast(1), Required),
];

const EFFICIENCY: &[KeySpec] = &[
    spec("efficiency.freq_min_ghz", Float, Positive, Required),
    spec("efficiency.freq_max_ghz", Float, Positive, Required),
    spec("efficiency.points", Int, AtLeast(1), Required),
    spec("efficiency.bound_at_gap", Float, Fraction, Optional),
    spec("efficiency.dip_ghz", Float, Positive, Optional),
    spec("efficiency.dip_height_mhz", Float, NonNegative, F(0.0)),
    spec("efficiency.dip_width_mphi0", Float, Positive, F(1.0)),
];

fn kind_keys(kind: ScenarioKind) -> &'static [KeySpec] {
    match kind {
        ScenarioKind::Spectroscopy => SPECTROSCOPY,
        ScenarioKind::SmithPowerSweep => SMITH,
        ScenarioKind::Rabi => RABI,
        ScenarioKind::Wavepacket => WAVEPACKET,
        ScenarioKind::Timetrace => TIMETRACE,
        ScenarioKind::EfficiencySweep => EFFICIENCY,
    }
}

/// Resolved parameter value in interface units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>, diags: &mut Vec<Diagnostic>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&path, t, out, diags),
            toml::Value::Array(_) => diags.push(Diagnostic::new(path, "arrays are not supported; use scalar keys")),
            other => out.push((path, other.clone())),
        }
    }
}

fn check_rule(rule: Rule, x: f64) -> Option<String> {
    let ok = match rule {
        Any => x.is_finite(),
        Positive => x.is_finite() && x > 0.0,
        NonNegative => x.is_finite() && x >= 0.0,
        AtLeast(n) => x >= n as f64,
        Fraction => x > 0.0 && x <= 1.0,
        Valley => x.is_finite() && x.abs() < 500.0,
    };
    if ok {
        return None;
    }
    Some(match rule {
        Any => "must be finite".into(),
        Positive => format!("must be positive, got {x}"),
        NonNegative => format!("must be non-negative, got {x}"),
        AtLeast(n) => format!("must be at least {n}, got {x}"),
        Fraction => format!("must lie in (0, 1], got {x}"),
        Valley => format!("must satisfy |value| < 500 mΦ₀, got {x}"),
    })
}

fn allowed_kinds() -> String {
    ScenarioKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
}

/// Parses and validates scenario text. `default_root` is the output root used
/// when the file has no `output_dir`; the directory is `<root>/<kind>`.
pub fn parse_scenario(text: &str, default_root: &std::path::Path) -> Result<Scenario, Vec<Diagnostic>> {
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let msg = e.message().to_owned();
            return Err(vec![Diagnostic::new("<file>", format!("not valid TOML: {msg}"))]);
        }
    };
    let mut diags = Vec::new();
    let mut flat = Vec::new();
    flatten("", &table, &mut flat, &mut diags);
    let mut entries: BTreeMap<String, toml::Value> = flat.into_iter().collect();

    let kind = match entries.remove("kind") {
        None => {
            diags.push(Diagnostic::new("kind", format!("missing; allowed kinds: {}", allowed_kinds())));
            None
        }
        Some(toml::Value::String(s)) => match ScenarioKind::parse(&s) {
            Some(k) => Some(k),
            None => {
                diags.push(Diagnostic::new("kind", format!("unknown kind {s:?}; allowed kinds: {}", allowed_kinds())));
                None
            }
        },
        Some(_) => {
            diags.push(Diagnostic::new("kind", format!("must be a string; allowed kinds: {}", allowed_kinds())));
            None
        }
    };
    let output_dir = match entries.remove("output_dir") {
        None => None,
        Some(toml::Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => {
            diags.push(Diagnostic::new("output_dir", "must be a non-empty string"));
            None
        }
    };
    let Some(kind) = kind else {
        return Err(diags);
    };

    let mut parameters = BTreeMap::new();
    for ks in COMMON.iter().chain(kind_keys(kind)) {
        let raw = entries.remove(ks.key);
        let value = match (raw, ks.default) {
            (None, Required) => {
                diags.push(Diagnostic::new(ks.key, "required key is missing"));
                continue;
            }
            (None, Optional) => continue,
            (None, F(v)) => Value::Float(v),
            (None, I(v)) => Value::Int(v),
            (Some(v), _) => match (ks.ty, v) {
                (Ty::Float, toml::Value::Float(x)) => Value::Float(x),
                (Ty::Float, toml::Value::Integer(i)) => Value::Float(i as f64),
                (Ty::Int, toml::Value::Integer(i)) => Value::Int(i),
                (ty, other) => {
                    let want = match ty {
                        Ty::Float => "a number",
                        Ty::Int => "an integer",
                    };
                    diags.push(Diagnostic::new(ks.key, format!("must be {want}, got {}", other.type_str())));
                    continue;
                }
            },
        };
        let x = match &value {
            Value::Float(x) => *x,
            Value::Int(i) => *i as f64,
        };
        if let Some(msg) = check_rule(ks.rule, x) {
            diags.push(Diagnostic::new(ks.key, msg));
            continue;
        }
        parameters.insert(ks.key.to_owned(), value);
    }
    for key in entries.keys() {
        let section = kind.section();
        let hint = if key.starts_with(&format!("{section}.")) || !key.contains('.') {
            String::new()
        } else {
            format!(" (kind {kind} reads [{section}])")
        };
        diags.push(Diagnostic::new(key.clone(), format!("unknown key{hint}")));
    }

    cross_checks(kind, &parameters, &mut diags);
    if !diags.is_empty() {
        return Err(diags);
    }
    let seed = match parameters.get("seed") {
        Some(Value::Int(s)) => *s as u64,
        _ => 0,
    };
    Ok(Scenario {
        kind,
        parameters,
        seed,
        output_dir: output_dir.unwrap_or_else(|| default_root.join(kind.name())),
    })
}

fn cross_checks(kind: ScenarioKind, p: &BTreeMap<String, Value>, diags: &mut Vec<Diagnostic>) {
    let f = |k: &str| match p.get(k) {
        Some(Value::Float(x)) => Some(*x),
        Some(Value::Int(i)) => Some(*i as f64),
        _ => None,
    };
    let mut ordered = |lo: &str, hi: &str| {
        if let (Some(a), Some(b)) = (f(lo), f(hi)) {
            if a > b {
                diags.push(Diagnostic::new(hi, format!("must not be below {lo} ({b} < {a})")));
            }
        }
    };
    match kind {
        ScenarioKind::Spectroscopy => {
            ordered("spectroscopy.flux_min_mphi0", "spectroscopy.flux_max_mphi0");
            ordered("spectroscopy.freq_min_ghz", "spectroscopy.freq_max_ghz");
        }
        ScenarioKind::SmithPowerSweep => ordered("smith.power_min_dbm", "smith.power_max_dbm"),
        ScenarioKind::EfficiencySweep => {
            ordered("efficiency.freq_min_ghz", "efficiency.freq_max_ghz");
            if let (Some(g), Some(lo)) = (f("qubit.gap_ghz"), f("efficiency.freq_min_ghz")) {
                if lo < g {
                    diags.push(Diagnostic::new("efficiency.freq_min_ghz", format!("must not be below the gap {g} GHz")));
                }
            }
        }
        ScenarioKind::Rabi => {
            if let (Some(t), Some(dt)) = (f("rabi.period_ns"), f("rabi.dt_max_ns")) {
                if dt >= t {
                    diags.push(Diagnostic::new("rabi.dt_max_ns", "must be shorter than rabi.period_ns"));
                }
            }
        }
        ScenarioKind::Timetrace => {
            if let (Some(t), Some(om)) = (f("timetrace.period_ns"), f("timetrace.rabi_mhz")) {
                // π-pulse length in ns is 500/(Ω/2π in MHz)
                if 500.0 / om >= t {
                    diags.push(Diagnostic::new("timetrace.rabi_mhz", "π-pulse does not fit in timetrace.period_ns"));
                }
            }
        }
        ScenarioKind::Wavepacket => {}
    }
}

/// Diagnostics for scenario text; empty when valid.
pub fn validate(text: &str) -> Vec<Diagnostic> {
    match parse_scenario(text, std::path::Path::new("output")) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

impl Scenario {
    fn raw(&self, key: &str) -> Option<f64> {
        match self.parameters.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
        }
    }

    /// Numeric parameter in interface units.
    pub fn get(&self, key: &str) -> f64 {
        self.raw(key).unwrap_or_else(|| panic!("schema guarantees {key}"))
    }

    pub fn get_opt(&self, key: &str) -> Option<f64> {
        self.raw(key)
    }

    pub fn count(&self, key: &str) -> usize {
        self.get(key) as usize
    }

    /// GHz/MHz key → Hz.
    pub fn hz(&self, key: &str) -> f64 {
        let scale = if key.ends_with("_ghz") { 1e9 } else if key.ends_with("_mhz") { 1e6 } else { panic!("{key} is not a frequency key") };
        self.get(key) * scale
    }

    /// MHz rate key (Γ/2π) → rad/s.
    pub fn rate(&self, key: &str) -> f64 {
        crate::units::angular(self.hz(key))
    }

    /// ns key → s.
    pub fn seconds(&self, key: &str) -> f64 {
        self.get(key) * 1e-9
    }

    /// mΦ₀ key → Φ₀.
    pub fn flux(&self, key: &str) -> f64 {
        self.get(key) * 1e-3
    }

    /// Parameters as JSON, for manifests and digests.
    pub fn parameters_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.parameters).expect("parameters serialize")
    }
}
