//! CSV and JSON artifact writers.
//!
//! CSV files open with `# ` comment lines naming the tool version, the master
//! seed and the fully resolved configuration. Numbers use Rust's shortest
//! round-trip formatting; undefined values are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Self-describing preamble shared by every artifact of one invocation.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub seed: u64,
    /// Resolved configuration as TOML.
    pub config: String,
}

impl Header {
    pub fn comment(&self) -> String {
        let mut s = format!("# cast {VERSION} {}\n# seed = {}\n# config:\n", self.command, self.seed);
        for line in self.config.lines() {
            if line.is_empty() {
                s.push_str("#\n");
            } else {
                let _ = writeln!(s, "#   {line}");
            }
        }
        s
    }
}

/// A cell value in a CSV body.
pub trait Field {
    fn field(&self) -> String;
}

impl Field for f64 {
    fn field(&self) -> String {
        format!("{self:?}")
    }
}

impl Field for u64 {
    fn field(&self) -> String {
        self.to_string()
    }
}

impl Field for usize {
    fn field(&self) -> String {
        self.to_string()
    }
}

impl Field for u32 {
    fn field(&self) -> String {
        self.to_string()
    }
}

impl Field for bool {
    fn field(&self) -> String {
        self.to_string()
    }
}

impl<T: Field> Field for Option<T> {
    fn field(&self) -> String {
        self.as_ref().map(Field::field).unwrap_or_default()
    }
}

/// Accumulates a CSV body in memory.
#[derive(Debug, Default)]
pub struct Csv {
    body: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        let mut csv = Self::default();
        csv.push_raw(columns.iter().map(|c| c.as_ref().to_string()).collect());
        csv
    }

    pub fn row(&mut self, fields: &[&dyn Field]) {
        self.push_raw(fields.iter().map(|f| f.field()).collect());
    }

    pub fn push_raw(&mut self, fields: Vec<String>) {
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn write(&self, path: &Path, header: &Header) -> Result<(), CliError> {
        write_file(path, &(header.comment() + &self.body))
    }
}

/// JSON artifacts carry the header information as fields.
#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: toml::Value,
    #[serde(flatten)]
    payload: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, header: &Header, payload: &T) -> Result<(), CliError> {
    let config: toml::Value = toml::from_str(&header.config).expect("resolved config is valid TOML");
    let wrapped = Wrapped { version: VERSION, command: header.command, seed: header.seed, config, payload };
    let mut text = serde_json::to_string_pretty(&wrapped).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, 1e-30, 2.0f64.sqrt(), -3.5e200, 0.018384_f64] {
            assert_eq!(x.field().parse::<f64>().unwrap(), x);
        }
        assert_eq!(None::<f64>.field(), "");
        assert_eq!(Some(2u64).field(), "2");
    }

    #[test]
    fn header_lines_are_comments() {
        let h = Header { command: "run", seed: 3, config: "a = 1\n\n[b]\nc = 2\n".into() };
        let text = h.comment();
        assert!(text.lines().all(|l| l.starts_with('#')));
        assert!(text.contains("seed = 3") && text.contains(VERSION));
    }

    #[test]
    fn csv_rows() {
        let mut csv = Csv::new(&["step", "x", "y"]);
        csv.row(&[&1u64, &0.5, &None::<f64>]);
        assert_eq!(csv.body(), "step,x,y\n1,0.5,\n");
    }
}
