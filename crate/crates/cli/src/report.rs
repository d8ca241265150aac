use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest as _, Sha256};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Envelope around every command's output.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the input bytes and parameters, hex.
    pub inputs_digest: String,
    pub outputs: Value,
    pub runtime_ms: u64,
    pub seed: Option<u64>,
}

/// A finished command: its report, its CSV table if it has one, and the
/// failure to signal after printing, if any.
pub struct Run {
    pub report: RunReport,
    pub csv: Option<String>,
    pub failure: Option<Failure>,
}

impl Run {
    pub fn new(command: &str, digest: Digest, outputs: Value, started: Instant, seed: Option<u64>) -> Self {
        Run {
            report: RunReport {
                command: command.to_string(),
                inputs_digest: digest.finish(),
                outputs,
                runtime_ms: started.elapsed().as_millis() as u64,
                seed,
            },
            csv: None,
            failure: None,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn emit(self, format: Format, out: Option<&Path>) -> Result<(), Failure> {
        let text = match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.report).expect("report serialises");
                s.push('\n');
                s
            }
            Format::Csv | Format::Text => {
                let csv = self
                    .csv
                    .ok_or_else(|| Failure::usage(format!("{} has no table output", self.report.command)))?;
                if format == Format::Text {
                    aligned(&csv)
                } else {
                    csv
                }
            }
        };
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
            None => {
                let mut stdout = std::io::stdout().lock();
                // a closed pipe is not worth an error
                let _ = stdout.write_all(text.as_bytes());
            }
        }
        match self.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    error: String,
    message: String,
    details: Option<Value>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            error: "Usage".into(),
            message: message.into(),
            details: None,
        }
    }

    pub fn mismatch(message: impl Into<String>, details: Value) -> Self {
        Failure {
            code: 1,
            error: "Mismatch".into(),
            message: message.into(),
            details: Some(details),
        }
    }

    /// Prints the error as JSON on standard error.
    pub fn report(&self) -> ExitCode {
        let mut body = json!({ "error": self.error, "message": self.message });
        if let Some(d) = &self.details {
            body["details"] = d.clone();
        }
        eprintln!("{body}");
        ExitCode::from(self.code)
    }
}

impl From<jointsparse::Error> for Failure {
    fn from(e: jointsparse::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 1 },
            error: e.name().to_string(),
            message: e.to_string(),
            details: None,
        }
    }
}

/// Hash of everything a command read: file bytes and parameter values, each
/// length-prefixed under a label.
pub struct Digest(Sha256);

impl Digest {
    pub fn new(command: &str) -> Self {
        let mut d = Digest(Sha256::new());
        d.bytes("command", command.as_bytes());
        d
    }

    pub fn bytes(&mut self, label: &str, data: &[u8]) -> &mut Self {
        for part in [label.as_bytes(), data] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn param(&mut self, label: &str, value: impl Serialize) -> &mut Self {
        let text = serde_json::to_string(&value).expect("parameter serialises");
        self.bytes(label, text.as_bytes())
    }

    pub fn finish(self) -> String {
        hex(&self.0.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// First 16 hex digits of the SHA-256 of `value`'s JSON.
pub fn short_digest(value: &impl Serialize) -> String {
    let text = serde_json::to_string(value).expect("value serialises");
    hex(&Sha256::digest(text.as_bytes())[..8])
}

/// CSV text with a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

/// Re-renders CSV text with space-padded columns.
fn aligned(csv: &str) -> String {
    let rows: Vec<Vec<String>> = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv.as_bytes())
        .records()
        .map(|r| r.expect("own csv parses").iter().map(str::to_string).collect())
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|c| c.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn real(v: f64) -> String {
    jointsparse::linalg::io::format_real(v)
}
