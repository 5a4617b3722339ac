//! Signal traces, CSV/JSON files and model fitting.

mod fit;

pub use fit::{fit_signal, fit_signal_with, synthetic_trace, velocity_report, FitModel, FitOptions, FitResult, VelocityReport};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub meta: BTreeMap<String, String>,
}

impl SignalTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let trace = SignalTrace {
            times,
            values,
            sigma,
            meta: BTreeMap::new(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() {
            return Err(Error::InvalidSpec("times and values differ in length".into()));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.times.len() {
                return Err(Error::InvalidSpec("sigma and times differ in length".into()));
            }
            if let Some(bad) = s.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidSpec(format!("sigma must be positive (row {})", bad + 1)));
            }
        }
        for (i, w) in self.times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotonic {
                    line: i + 2,
                    time: w[1],
                });
            }
        }
        Ok(())
    }
}

/// Write `contents` next to `path` and rename it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidSpec(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn parse_field(field: &str, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad {column} value {field:?}: {e}"),
    })
}

/// Parse the `t_seconds,signal[,sigma]` format; `# key: value` comments land
/// in `meta`.
pub fn parse_csv(text: &str) -> Result<SignalTrace> {
    let mut meta = BTreeMap::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    let names: Vec<&str> = headers.iter().collect();
    let with_sigma = match names.as_slice() {
        ["t_seconds", "signal"] => false,
        ["t_seconds", "signal", "sigma"] => true,
        _ => {
            return Err(Error::Parse {
                line: headers.position().map_or(1, |p| p.line() as usize),
                msg: format!("expected header t_seconds,signal[,sigma], found {}", names.join(",")),
            })
        }
    };
    let width = if with_sigma { 3 } else { 2 };
    let (mut times, mut values, mut sigma) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let t = parse_field(&record[0], line, "t_seconds")?;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(Error::NonMonotonic { line, time: t });
            }
        }
        times.push(t);
        values.push(parse_field(&record[1], line, "signal")?);
        if with_sigma {
            let s = parse_field(&record[2], line, "sigma")?;
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("sigma must be positive, found {s}"),
                });
            }
            sigma.push(s);
        }
    }
    let trace = SignalTrace {
        times,
        values,
        sigma: with_sigma.then_some(sigma),
        meta,
    };
    trace.validate()?;
    Ok(trace)
}

pub fn ingest_csv(path: &Path) -> Result<SignalTrace> {
    parse_csv(&fs::read_to_string(path)?)
}

/// CSV text of a trace; floats use the shortest round-trip form.
pub fn trace_to_csv(trace: &SignalTrace) -> String {
    let mut out = String::new();
    for (k, v) in &trace.meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    let sigma = trace.sigma.as_deref();
    out.push_str(if sigma.is_some() { "t_seconds,signal,sigma\n" } else { "t_seconds,signal\n" });
    for i in 0..trace.len() {
        out.push_str(&format!("{:?},{:?}", trace.times[i], trace.values[i]));
        if let Some(s) = sigma {
            out.push_str(&format!(",{:?}", s[i]));
        }
        out.push('\n');
    }
    out
}

pub fn export_trace(trace: &SignalTrace, path: &Path) -> Result<()> {
    write_atomic(path, trace_to_csv(trace).as_bytes())
}

/// CSV table with a header row.
pub fn table_to_csv(headers: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSpec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidSpec(format!("csv: {e}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub report: &'a str,
    #[serde(flatten)]
    pub body: T,
}

/// Pretty JSON with `schema_version` and a report name.
pub fn report_json<T: Serialize>(name: &str, body: T) -> Result<String> {
    let r = Report {
        schema_version: SCHEMA_VERSION,
        report: name,
        body,
    };
    Ok(serde_json::to_string_pretty(&r)? + "\n")
}
