//! Run configuration: a JSON document, validated key by key.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    fn missing(key: &str) -> Self {
        Self(format!("missing key: {key}"))
    }

    fn invalid(key: &str, expected: &str, got: &Value) -> Self {
        Self(format!("invalid value for {key}: expected {expected}, got {got}"))
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Collective,
    Correlated,
    Master,
    Crossover,
    OracleCheck,
    Rwa,
    Interaction,
}

impl Mode {
    const ALL: [(&'static str, Mode); 8] = [
        ("single", Mode::Single),
        ("collective", Mode::Collective),
        ("correlated", Mode::Correlated),
        ("master", Mode::Master),
        ("crossover", Mode::Crossover),
        ("oracle-check", Mode::OracleCheck),
        ("rwa", Mode::Rwa),
        ("interaction", Mode::Interaction),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, m)| *m == self).map(|(n, _)| *n).unwrap_or("?")
    }
}

/// Which rate curve the crossover mode searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Single,
    Collective,
    Correlated,
    Master,
    Rwa,
}

impl RateKind {
    const ALL: [(&'static str, RateKind); 5] = [
        ("single", RateKind::Single),
        ("collective", RateKind::Collective),
        ("correlated", RateKind::Correlated),
        ("master", RateKind::Master),
        ("rwa", RateKind::Rwa),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, m)| *m == self).map(|(n, _)| *n).unwrap_or("?")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BathConfig {
    Ohmic { coupling: f64, cutoff: f64, beta: f64 },
    /// `(|g|², ω)` pairs.
    Discrete { modes: Vec<(f64, f64)>, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub j: f64,
    pub theta: f64,
    pub phi: f64,
    pub omega0: f64,
    pub delta: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    pub grid_kind: GridKind,
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub measurements: usize,
    pub rotation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub quadrature_order: usize,
    pub max_panels: usize,
    pub me_step: Option<f64>,
    pub term_budget: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: Option<String>,
    pub mode: Mode,
    pub bath: BathConfig,
    pub system: SystemConfig,
    pub schedule: ScheduleConfig,
    pub crossover_rate: RateKind,
    pub output: OutputConfig,
    pub numerics: NumericsConfig,
}

/// Keys of one JSON object, tracking which were read so leftovers can be rejected.
struct Section<'a> {
    path: String,
    map: Option<&'a Map<String, Value>>,
    seen: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn root(value: &'a Value) -> Result<Self> {
        match value {
            Value::Object(map) => Ok(Self {
                path: String::new(),
                map: Some(map),
                seen: BTreeSet::new(),
            }),
            other => Err(ConfigError::invalid("<root>", "an object", other)),
        }
    }

    fn key(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.path)
        }
    }

    fn raw(&mut self, name: &'static str) -> Option<&'a Value> {
        self.seen.insert(name);
        self.map.and_then(|m| m.get(name)).filter(|v| !v.is_null())
    }

    fn child(&mut self, name: &'static str) -> Result<Section<'a>> {
        let key = self.key(name);
        let map = match self.raw(name) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(other) => return Err(ConfigError::invalid(&key, "an object", other)),
        };
        Ok(Section {
            path: key,
            map,
            seen: BTreeSet::new(),
        })
    }

    fn number(&mut self, name: &'static str) -> Result<Option<f64>> {
        let key = self.key(name);
        match self.raw(name) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| ConfigError::invalid(&key, "a finite number", v)),
        }
    }

    fn required_number(&mut self, name: &'static str) -> Result<f64> {
        let key = self.key(name);
        self.number(name)?.ok_or_else(|| ConfigError::missing(&key))
    }

    fn check(&self, name: &str, value: f64, ok: bool, expected: &str) -> Result<f64> {
        if ok {
            Ok(value)
        } else {
            Err(ConfigError::invalid(&self.key(name), expected, &json!(value)))
        }
    }

    fn count(&mut self, name: &'static str, default: usize) -> Result<usize> {
        let key = self.key(name);
        match self.raw(name) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| ConfigError::invalid(&key, "a non-negative integer", v)),
        }
    }

    fn boolean(&mut self, name: &'static str, default: bool) -> Result<bool> {
        let key = self.key(name);
        match self.raw(name) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| ConfigError::invalid(&key, "true or false", v)),
        }
    }

    fn string(&mut self, name: &'static str) -> Result<Option<&'a str>> {
        let key = self.key(name);
        match self.raw(name) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| ConfigError::invalid(&key, "a string", v)),
        }
    }

    fn choice<E: Copy>(&mut self, name: &'static str, options: &[(&str, E)], default: Option<E>) -> Result<E> {
        let key = self.key(name);
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        match self.string(name)? {
            None => default.ok_or_else(|| ConfigError::missing(&key)),
            Some(s) => options
                .iter()
                .find(|(n, _)| *n == s)
                .map(|(_, e)| *e)
                .ok_or_else(|| ConfigError(format!("invalid value for {key}: {s:?}, expected one of {}", names.join(", ")))),
        }
    }

    /// Positive number or the string `"inf"`.
    fn beta(&mut self, name: &'static str, default: f64) -> Result<f64> {
        let key = self.key(name);
        match self.raw(name) {
            None => Ok(default),
            Some(Value::String(s)) if s == "inf" => Ok(f64::INFINITY),
            Some(v) => match v.as_f64() {
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                _ => Err(ConfigError::invalid(&key, "a positive number or \"inf\"", v)),
            },
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(map) = self.map {
            for k in map.keys() {
                if !self.seen.contains(k.as_str()) {
                    return Err(ConfigError(format!("unknown key: {}", self.key(k))));
                }
            }
        }
        Ok(())
    }
}

impl RunConfig {
    /// Validates a configuration document, filling in defaults.
    pub fn from_value(value: &Value) -> Result<Self> {
        let mut root = Section::root(value)?;
        let label = root.string("label")?.map(str::to_string);
        let mode = root.choice("mode", &Mode::ALL, Some(Mode::Single))?;

        let mut b = root.child("bath")?;
        let kind = b.choice("kind", &[("ohmic", 0u8), ("discrete", 1u8)], None)?;
        let beta = b.beta("beta", 1.0)?;
        let bath = if kind == 0 {
            let coupling = b.required_number("coupling")?;
            b.check("coupling", coupling, coupling >= 0.0, "a non-negative number")?;
            let cutoff = b.required_number("cutoff")?;
            b.check("cutoff", cutoff, cutoff > 0.0, "a positive number")?;
            BathConfig::Ohmic { coupling, cutoff, beta }
        } else {
            let key = b.key("modes");
            let list = match b.raw("modes") {
                None => return Err(ConfigError::missing(&key)),
                Some(Value::Array(a)) => a,
                Some(other) => return Err(ConfigError::invalid(&key, "an array of modes", other)),
            };
            let mut modes = Vec::with_capacity(list.len());
            for (i, m) in list.iter().enumerate() {
                let mut s = Section {
                    path: format!("{key}[{i}]"),
                    map: m.as_object(),
                    seen: BTreeSet::new(),
                };
                if s.map.is_none() {
                    return Err(ConfigError::invalid(&s.path, "an object", m));
                }
                let strength = s.required_number("strength")?;
                s.check("strength", strength, strength >= 0.0, "a non-negative number")?;
                let frequency = s.required_number("frequency")?;
                s.check("frequency", frequency, frequency > 0.0, "a positive number")?;
                s.finish()?;
                modes.push((strength, frequency));
            }
            BathConfig::Discrete { modes, beta }
        };
        b.finish()?;

        let mut s = root.child("system")?;
        let j = s.number("j")?.unwrap_or(0.5);
        s.check("j", j, j > 0.0 && (2.0 * j).fract() == 0.0 && j <= 1000.0, "a positive multiple of 1/2")?;
        let theta = s.number("theta")?.unwrap_or(FRAC_PI_2);
        s.check("theta", theta, (0.0..=std::f64::consts::PI).contains(&theta), "an angle in [0, pi]")?;
        let system = SystemConfig {
            j,
            theta,
            phi: s.number("phi")?.unwrap_or(0.0),
            omega0: s.number("omega0")?.unwrap_or(0.0),
            delta: s.number("delta")?.unwrap_or(0.0),
            chi: s.number("chi")?.unwrap_or(1.0),
        };
        s.finish()?;

        let mut sc = root.child("schedule")?;
        let mut g = sc.child("grid")?;
        let grid_kind = g.choice(
            "kind",
            &[("linear", GridKind::Linear), ("geometric", GridKind::Geometric)],
            Some(GridKind::Linear),
        )?;
        let start = g.number("start")?.unwrap_or(0.01);
        let end = g.number("end")?.unwrap_or(1.0);
        let points = g.count("points", 100)?;
        g.check("start", start, start > 0.0, "a positive interval")?;
        g.check("end", end, end > start || (points == 1 && end == start), "an interval above grid.start")?;
        g.check("points", points as f64, points >= 1, "at least 1")?;
        g.finish()?;
        let measurements = sc.count("measurements", 1)?;
        sc.check("measurements", measurements as f64, measurements >= 1, "at least 1")?;
        let schedule = ScheduleConfig {
            grid_kind,
            start,
            end,
            points,
            measurements,
            rotation: sc.boolean("rotation", true)?,
        };
        sc.finish()?;

        let mut c = root.child("crossover")?;
        let crossover_rate = c.choice("rate", &RateKind::ALL, Some(RateKind::Collective))?;
        c.finish()?;

        let mut o = root.child("output")?;
        let path = o.string("path")?.map(PathBuf::from);
        let format = o.choice("format", &[("csv", Format::Csv), ("json", Format::Json)], Some(Format::Csv))?;
        o.finish()?;

        let mut n = root.child("numerics")?;
        let abs_tol = n.number("abs_tol")?.unwrap_or(1e-10);
        n.check("abs_tol", abs_tol, abs_tol > 0.0, "a positive number")?;
        let rel_tol = n.number("rel_tol")?.unwrap_or(1e-8);
        n.check("rel_tol", rel_tol, rel_tol > 0.0, "a positive number")?;
        let quadrature_order = n.count("quadrature_order", 20)?;
        n.check("quadrature_order", quadrature_order as f64, (2..=64).contains(&quadrature_order), "an integer in [2, 64]")?;
        let max_panels = n.count("max_panels", 1 << 17)?;
        n.check("max_panels", max_panels as f64, max_panels >= 32, "at least 32")?;
        let me_step = n.number("me_step")?;
        if let Some(h) = me_step {
            n.check("me_step", h, h > 0.0, "a positive step")?;
        }
        let budget = n.number("term_budget")?.unwrap_or(1e8);
        n.check("term_budget", budget, (1.0..1e30).contains(&budget), "a positive term count")?;
        let numerics = NumericsConfig {
            abs_tol,
            rel_tol,
            quadrature_order,
            max_panels,
            me_step,
            term_budget: budget as u128,
        };
        n.finish()?;
        root.finish()?;

        let config = Self {
            label,
            mode,
            bath,
            system,
            schedule,
            crossover_rate,
            output: OutputConfig { path, format },
            numerics,
        };
        config.check_mode()?;
        Ok(config)
    }

    fn check_mode(&self) -> Result<()> {
        let uses_single = self.mode == Mode::Single
            || self.mode == Mode::Rwa
            || (self.mode == Mode::Crossover && matches!(self.crossover_rate, RateKind::Single | RateKind::Rwa));
        if uses_single && self.system.j != 0.5 {
            return Err(ConfigError(format!(
                "invalid value for system.j: mode {} describes a single spin, J must be 0.5",
                self.mode.name()
            )));
        }
        Ok(())
    }

    /// The fully resolved configuration, every default written out.
    pub fn to_value(&self) -> Value {
        let beta = |b: f64| if b.is_infinite() { json!("inf") } else { json!(b) };
        let bath = match &self.bath {
            BathConfig::Ohmic { coupling, cutoff, beta: b } => json!({
                "kind": "ohmic",
                "coupling": coupling,
                "cutoff": cutoff,
                "beta": beta(*b),
            }),
            BathConfig::Discrete { modes, beta: b } => json!({
                "kind": "discrete",
                "modes": modes.iter().map(|(s, f)| json!({"strength": s, "frequency": f})).collect::<Vec<_>>(),
                "beta": beta(*b),
            }),
        };
        let mut root = Map::new();
        if let Some(l) = &self.label {
            root.insert("label".into(), json!(l));
        }
        root.insert("mode".into(), json!(self.mode.name()));
        root.insert("bath".into(), bath);
        root.insert(
            "system".into(),
            json!({
                "j": self.system.j,
                "theta": self.system.theta,
                "phi": self.system.phi,
                "omega0": self.system.omega0,
                "delta": self.system.delta,
                "chi": self.system.chi,
            }),
        );
        root.insert(
            "schedule".into(),
            json!({
                "grid": {
                    "kind": match self.schedule.grid_kind { GridKind::Linear => "linear", GridKind::Geometric => "geometric" },
                    "start": self.schedule.start,
                    "end": self.schedule.end,
                    "points": self.schedule.points,
                },
                "measurements": self.schedule.measurements,
                "rotation": self.schedule.rotation,
            }),
        );
        root.insert("crossover".into(), json!({"rate": self.crossover_rate.name()}));
        let mut output = Map::new();
        if let Some(p) = &self.output.path {
            output.insert("path".into(), json!(p.to_string_lossy()));
        }
        output.insert("format".into(), json!(self.output.format.name()));
        root.insert("output".into(), Value::Object(output));
        root.insert(
            "numerics".into(),
            json!({
                "abs_tol": self.numerics.abs_tol,
                "rel_tol": self.numerics.rel_tol,
                "quadrature_order": self.numerics.quadrature_order,
                "max_panels": self.numerics.max_panels,
                "me_step": self.numerics.me_step,
                "term_budget": self.numerics.term_budget as f64,
            }),
        );
        Value::Object(root)
    }
}

/// Applies a `key.path=value` override; the value is read as JSON, else as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("invalid override {assignment:?}: expected key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError(format!("invalid override key {path:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if doc.is_null() {
        *doc = Value::Object(Map::new());
    }
    let mut node = doc;
    for (i, k) in keys.iter().enumerate() {
        let here = keys[..i].join(".");
        let map = match node {
            Value::Object(m) => m,
            _ => return Err(ConfigError(format!("cannot set {path}: {here} is not an object"))),
        };
        if i + 1 == keys.len() {
            map.insert((*k).to_string(), value);
            return Ok(());
        }
        node = map.entry((*k).to_string()).or_insert_with(|| Value::Object(Map::new()));
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_names_the_bath_kind() {
        let err = RunConfig::from_value(&json!({})).unwrap_err();
        assert_eq!(err.to_string(), "missing key: bath.kind");
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_value(&json!({"bath": {"kind": "ohmic", "coupling": 0.01, "cutoff": 15}})).unwrap();
        assert_eq!(c.mode, Mode::Single);
        assert_eq!(c.schedule.points, 100);
        assert_eq!(c.bath, BathConfig::Ohmic { coupling: 0.01, cutoff: 15.0, beta: 1.0 });
        assert_eq!(RunConfig::from_value(&c.to_value()).unwrap(), c);
    }

    #[test]
    fn offending_keys_are_named() {
        let base = json!({"bath": {"kind": "ohmic", "coupling": 0.01, "cutoff": 15}});
        let cases = [
            ("bath.cutoff=-1", "bath.cutoff"),
            ("bath.beta=0", "bath.beta"),
            ("system.j=0.3", "system.j"),
            ("schedule.grid.points=-2", "schedule.grid.points"),
            ("bath.colour=1", "unknown key: bath.colour"),
            ("mode=fast", "mode"),
        ];
        for (assignment, needle) in cases {
            let mut doc = base.clone();
            apply_override(&mut doc, assignment).unwrap();
            let err = RunConfig::from_value(&doc).unwrap_err().to_string();
            assert!(err.contains(needle), "{assignment}: {err}");
        }
    }

    #[test]
    fn infinite_beta_round_trips() {
        let mut doc = json!({"bath": {"kind": "discrete", "modes": [{"strength": 0.04, "frequency": 3}]}});
        apply_override(&mut doc, "bath.beta=inf").unwrap();
        let c = RunConfig::from_value(&doc).unwrap();
        assert!(matches!(c.bath, BathConfig::Discrete { beta, .. } if beta.is_infinite()));
        assert_eq!(c.to_value()["bath"]["beta"], json!("inf"));
    }

    #[test]
    fn overrides_create_nested_objects() {
        let mut doc = Value::Null;
        apply_override(&mut doc, "schedule.grid.kind=geometric").unwrap();
        apply_override(&mut doc, "schedule.grid.points=9").unwrap();
        assert_eq!(doc, json!({"schedule": {"grid": {"kind": "geometric", "points": 9}}}));
        assert!(apply_override(&mut doc, "schedule.grid.kind.x=1").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }
}
