//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! command = "dimer-solve"
//! format = "csv"          # optional, the --format flag wins
//! name = "pairs"          # optional output stem, defaults to the command
//!
//! [params]
//! N = 8
//! J = 1.0
//! U = -2.5
//! phi = "0.25pi"
//! ```
//!
//! Angles are either plain numbers (radians) or strings with a `pi` suffix:
//! `"pi"`, `"-0.5pi"`, `"3pi/8"`, `"pi/4"`. Every key in `[params]` must be
//! consumed by the command; leftovers are reported as errors.

use std::sync::Mutex;
use std::collections::BTreeSet;
use std::f64::consts::PI;

use toml::{Table as TomlTable, Value};

use crate::table::Format;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Parse(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("key `{key}`: expected {expected}")]
    Type { key: String, expected: &'static str },
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unused key `{0}`")]
    Unused(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Band,
    Wannier,
    SpectrumSweep,
    GroundState,
    Wavepacket,
    DimerSolve,
    DimerDensity,
    DimerRamp,
    HeteroSolve,
    HeteroDensity,
    OracleCheck,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Band,
        Command::Wannier,
        Command::SpectrumSweep,
        Command::GroundState,
        Command::Wavepacket,
        Command::DimerSolve,
        Command::DimerDensity,
        Command::DimerRamp,
        Command::HeteroSolve,
        Command::HeteroDensity,
        Command::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Band => "band",
            Command::Wannier => "wannier",
            Command::SpectrumSweep => "spectrum-sweep",
            Command::GroundState => "ground-state",
            Command::Wavepacket => "wavepacket",
            Command::DimerSolve => "dimer-solve",
            Command::DimerDensity => "dimer-density",
            Command::DimerRamp => "dimer-ramp",
            Command::HeteroSolve => "hetero-solve",
            Command::HeteroDensity => "hetero-density",
            Command::OracleCheck => "oracle-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub command: Command,
    pub format: Option<Format>,
    pub name: Option<String>,
    pub params: TomlTable,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc: TomlTable = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_owned()))?;
        let command = match doc.remove("command") {
            Some(Value::String(s)) => Command::parse(&s).ok_or(ConfigError::UnknownCommand(s))?,
            Some(_) => return Err(type_err("command", "a string")),
            None => return Err(ConfigError::Missing("command".into())),
        };
        let format = match doc.remove("format") {
            Some(Value::String(s)) => Some(s.parse().map_err(|reason| ConfigError::Invalid { key: "format".into(), reason })?),
            Some(_) => return Err(type_err("format", "a string")),
            None => None,
        };
        let name = match doc.remove("name") {
            Some(Value::String(s)) if valid_stem(&s) => Some(s),
            Some(_) => return Err(type_err("name", "a file stem of letters, digits, `-` or `_`")),
            None => None,
        };
        let params = match doc.remove("params") {
            Some(Value::Table(t)) => t,
            Some(_) => return Err(type_err("params", "a table")),
            None => TomlTable::new(),
        };
        if let Some(k) = doc.keys().next() {
            return Err(ConfigError::Unused(k.clone()));
        }
        Ok(Self {
            command,
            format,
            name,
            params,
        })
    }

    pub fn stem(&self) -> &str {
        self.name.as_deref().unwrap_or(self.command.name())
    }
}

pub(crate) fn valid_stem(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn type_err(key: &str, expected: &'static str) -> ConfigError {
    ConfigError::Type {
        key: key.to_owned(),
        expected,
    }
}

/// Parses `"pi"`, `"-0.5pi"`, `"0.25*pi"`, `"3pi/8"`, `"-pi/4"`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (s.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let c = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    Some(c * PI / den).filter(|x| x.is_finite())
}

/// Typed, usage-tracked view of a `[params]` table.
#[derive(Debug)]
pub struct Params<'a> {
    table: &'a TomlTable,
    prefix: String,
    used: Mutex<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(table: &'a TomlTable) -> Self {
        Self::nested(table, String::new())
    }

    fn nested(table: &'a TomlTable, prefix: String) -> Self {
        Self {
            table,
            prefix,
            used: Mutex::new(BTreeSet::new()),
        }
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.used.lock().unwrap().insert(key.to_owned());
        }
        v
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn required(&self, key: &str) -> Result<&'a Value, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(self.path(key)))
    }

    fn err(&self, key: &str, expected: &'static str) -> ConfigError {
        type_err(&self.path(key), expected)
    }

    pub fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            key: self.path(key),
            reason: reason.into(),
        }
    }

    fn to_f64(&self, key: &str, v: &Value) -> Result<f64, ConfigError> {
        let x = match v {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            _ => return Err(self.err(key, "a number")),
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.invalid(key, "must be finite"))
        }
    }

    fn to_angle(&self, key: &str, v: &Value) -> Result<f64, ConfigError> {
        match v {
            Value::String(s) => parse_angle(s).ok_or_else(|| self.err(key, "an angle such as 0.3, \"pi/4\" or \"-0.5pi\"")),
            other => self.to_f64(key, other),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.required(key)?;
        self.to_f64(key, v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(v) => self.to_f64(key, v),
            None => Ok(default),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| self.to_f64(key, v)).transpose()
    }

    pub fn angle(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.required(key)?;
        self.to_angle(key, v)
    }

    pub fn angle_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(v) => self.to_angle(key, v),
            None => Ok(default),
        }
    }

    pub fn opt_angle(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| self.to_angle(key, v)).transpose()
    }

    fn to_i64(&self, key: &str, v: &Value) -> Result<i64, ConfigError> {
        match v {
            Value::Integer(i) => Ok(*i),
            _ => Err(self.err(key, "an integer")),
        }
    }

    pub fn i64(&self, key: &str) -> Result<i64, ConfigError> {
        let v = self.required(key)?;
        self.to_i64(key, v)
    }

    pub fn opt_i64(&self, key: &str) -> Result<Option<i64>, ConfigError> {
        self.get(key).map(|v| self.to_i64(key, v)).transpose()
    }

    fn to_usize(&self, key: &str, v: &Value) -> Result<usize, ConfigError> {
        usize::try_from(self.to_i64(key, v)?).map_err(|_| self.invalid(key, "must be non-negative"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.required(key)?;
        self.to_usize(key, v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            Some(v) => self.to_usize(key, v),
            None => Ok(default),
        }
    }

    /// A single integer or an array of integers.
    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        match self.required(key)? {
            Value::Array(items) => items.iter().map(|v| self.to_usize(key, v)).collect(),
            v => Ok(vec![self.to_usize(key, v)?]),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.required(key)? {
            Value::Array(items) => items.iter().map(|v| self.to_f64(key, v)).collect(),
            _ => Err(self.err(key, "an array of numbers")),
        }
    }

    pub fn angle_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.required(key)? {
            Value::Array(items) => items.iter().map(|v| self.to_angle(key, v)).collect(),
            _ => Err(self.err(key, "an array of angles")),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.err(key, "true or false")),
            None => Ok(default),
        }
    }

    pub fn str(&self, key: &str) -> Result<&'a str, ConfigError> {
        match self.required(key)? {
            Value::String(s) => Ok(s),
            _ => Err(self.err(key, "a string")),
        }
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.get(key) {
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.err(key, "a string")),
            None => Ok(None),
        }
    }

    /// Array of strings, or a single string.
    pub fn str_list_or(&self, key: &str, default: &[&str]) -> Result<Vec<String>, ConfigError> {
        match self.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Value::String(s)) => Ok(vec![s.clone()]),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| self.err(key, "an array of strings")))
                .collect(),
            Some(_) => Err(self.err(key, "an array of strings")),
        }
    }

    /// Nested table; its own keys are tracked by the returned view.
    pub fn table(&self, key: &str) -> Result<Params<'a>, ConfigError> {
        match self.required(key)? {
            Value::Table(t) => Ok(Params::nested(t, self.path(key))),
            _ => Err(self.err(key, "a table")),
        }
    }

    /// Fails on the first key that was never read.
    pub fn finish(&self) -> Result<(), ConfigError> {
        let used = self.used.lock().unwrap();
        match self.table.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(ConfigError::Unused(self.path(k))),
            None => Ok(()),
        }
    }

    /// `key = value` pairs of the whole tree, sorted, for metadata echo.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        flatten(self.table, &self.prefix, &mut out);
        out
    }
}

fn flatten(t: &TomlTable, prefix: &str, out: &mut Vec<(String, String)>) {
    for (k, v) in t {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => flatten(inner, &path, out),
            v => out.push((path, v.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("-pi"), Some(-PI));
        assert_eq!(parse_angle("0.3pi"), Some(0.3 * PI));
        assert_eq!(parse_angle("0.3 * pi"), Some(0.3 * PI));
        assert_eq!(parse_angle("pi/4"), Some(PI / 4.0));
        assert_eq!(parse_angle("-3pi/8"), Some(-3.0 * PI / 8.0));
        for bad in ["", "p", "0.3", "pi/0", "xpi", "pi/x"] {
            assert_eq!(parse_angle(bad), None, "{bad}");
        }
    }

    #[test]
    fn scenario_header() {
        let s = Scenario::parse("command = \"band\"\nformat = \"json\"\n[params]\nN = 4\n").unwrap();
        assert_eq!(s.command, Command::Band);
        assert_eq!(s.format, Some(Format::Json));
        assert_eq!(s.stem(), "band");
        assert_eq!(Scenario::parse("command = \"bands\"").unwrap_err(), ConfigError::UnknownCommand("bands".into()));
        assert_eq!(Scenario::parse("[params]\nN = 4").unwrap_err(), ConfigError::Missing("command".into()));
        assert!(matches!(Scenario::parse("command = \"band\"\nextra = 1"), Err(ConfigError::Unused(_))));
        assert!(matches!(Scenario::parse("command = \"band\"\nname = \"../x\""), Err(ConfigError::Type { .. })));
        assert!(matches!(Scenario::parse("command = "), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn typed_access_names_the_key() {
        let t: TomlTable = "N = 4\nphi = \"pi/2\"\nJ = \"one\"\n[ramp]\nend = 1\n".parse().unwrap();
        let p = Params::new(&t);
        assert_eq!(p.usize("N").unwrap(), 4);
        assert_eq!(p.angle("phi").unwrap(), PI / 2.0);
        assert_eq!(p.f64("J").unwrap_err(), ConfigError::Type { key: "J".into(), expected: "a number" });
        assert_eq!(p.f64("U").unwrap_err(), ConfigError::Missing("U".into()));
        let r = p.table("ramp").unwrap();
        assert_eq!(r.f64("start").unwrap_err(), ConfigError::Missing("ramp.start".into()));
        assert_eq!(r.finish().unwrap_err(), ConfigError::Unused("ramp.end".into()));
        assert!(p.finish().is_ok());
        assert_eq!(p.echo()[0], ("J".to_string(), "\"one\"".to_string()));
    }
}
