use std::io::{self, Write};

use serde::Serialize;

/// Machine-readable result; every command fills the same five keys and
/// leaves the ones it has nothing for as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub verdict: String,
    pub lambdas: Option<Vec<f64>>,
    pub vectors: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub certificate: Option<String>,
    pub m_j: Option<Vec<usize>>,
}

impl Report {
    pub fn new(verdict: impl Into<String>) -> Self {
        Self { verdict: verdict.into(), lambdas: None, vectors: None, certificate: None, m_j: None }
    }
}

/// What a command produced: exit code, JSON report and human-readable lines.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Report,
    pub lines: Vec<String>,
    /// Printed on stdout in human mode and on stderr with `--json`.
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn emit(&self, json: bool, out: &mut impl Write, err: &mut impl Write) -> io::Result<()> {
        if json {
            writeln!(out, "{}", serde_json::to_string(&self.report).expect("serializable"))?;
            for w in &self.warnings {
                writeln!(err, "warning: {w}")?;
            }
        } else {
            for line in &self.lines {
                writeln!(out, "{line}")?;
            }
            for w in &self.warnings {
                writeln!(out, "warning: {w}")?;
            }
        }
        Ok(())
    }
}

pub fn fmt_real(v: f64) -> String {
    format!("{v:.10}")
}

pub fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(", ")
}

pub fn fmt_vector(v: &[multischmidt::Complex64]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|z| {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{:.10}{sign}{:.10}i", z.re, z.im.abs())
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_has_stable_keys() {
        let text = serde_json::to_string(&Report::new("x")).unwrap();
        assert_eq!(text, r#"{"verdict":"x","lambdas":null,"vectors":null,"certificate":null,"m_j":null}"#);
    }

    #[test]
    fn vector_formatting() {
        let v = [multischmidt::Complex64::new(0.5, -0.25)];
        assert_eq!(fmt_vector(&v), "[0.5000000000-0.2500000000i]");
    }
}
