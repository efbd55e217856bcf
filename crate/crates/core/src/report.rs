//! Machine-readable run reports: JSON lines, optionally a CSV summary.
//!
//! Floating-point numbers are written in scientific notation with 17
//! significant digits, which round-trips every `f64`; non-finite values
//! become `null`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, Serializer};

use crate::inequalities::{DMinimalityReport, InequalityReport};

#[derive(Clone, Copy, Default)]
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// One JSON object on a single line, without the trailing newline.
pub fn json_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct InvariantRecord {
    pub name: String,
    pub params: String,
    pub point: Vec<f64>,
    pub value: f64,
    pub sizes: Vec<usize>,
    pub certification_gap: Option<f64>,
    pub restarts: usize,
}

/// Payload of one report line.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Payload {
    Check(InequalityReport),
    Invariant(InvariantRecord),
    DMinimality(DMinimalityReport),
    Error {
        computation: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Record {
    pub version: &'static str,
    pub chart: String,
    pub seed: u64,
    /// Index of the sample point, absent for records spanning all points.
    pub point_index: Option<usize>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Record {
    /// Whether the record counts as a failed check.
    pub fn failed(&self) -> bool {
        match &self.payload {
            Payload::Check(r) => !r.consistent(),
            Payload::DMinimality(r) => r.contradiction,
            Payload::Invariant(_) | Payload::Error { .. } => false,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self.payload, Payload::Error { .. })
    }
}

pub fn write_jsonl<W: Write>(records: &[Record], mut out: W) -> io::Result<()> {
    for r in records {
        let line = json_line(r).map_err(io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const CSV_HEADER: &str =
    "record,chart,seed,point_index,name,params,value,rhs,slack,pass,equality,diagnostics_pass,certification_gap,message";

/// One row per record with the headline numbers.
pub fn write_csv<W: Write>(records: &[Record], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let head = [
            String::new(),
            csv_field(&r.chart),
            r.seed.to_string(),
            r.point_index.map(|i| i.to_string()).unwrap_or_default(),
        ];
        let row: Vec<String> = match &r.payload {
            Payload::Check(c) => vec![
                "check".into(),
                csv_field(&c.theorem),
                csv_field(&c.params),
                num(c.lhs),
                num(c.rhs),
                num(c.slack),
                c.pass.to_string(),
                c.equality.to_string(),
                c.diagnostics_pass.to_string(),
                opt_num(c.certification_gap),
                String::new(),
            ],
            Payload::Invariant(v) => vec![
                "invariant".into(),
                csv_field(&v.name),
                csv_field(&v.params),
                num(v.value),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                opt_num(v.certification_gap),
                String::new(),
            ],
            Payload::DMinimality(d) => {
                let witness = d
                    .witnesses
                    .values()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                vec![
                    "d_minimality".into(),
                    "d_minimality".into(),
                    String::new(),
                    num(d.max_h_d_norm),
                    num(witness),
                    String::new(),
                    (!d.contradiction).to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    if d.contradiction {
                        "CONTRADICTION".into()
                    } else {
                        String::new()
                    },
                ]
            }
            Payload::Error {
                computation,
                message,
            } => vec![
                "error".into(),
                csv_field(computation),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                csv_field(message),
            ],
        };
        let mut fields = head.to_vec();
        fields[0] = row[0].clone();
        fields.extend(row.into_iter().skip(1));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Counts per record kind, for summaries.
pub fn tally(records: &[Record]) -> BTreeMap<&'static str, usize> {
    let mut t = BTreeMap::new();
    for r in records {
        let key = match &r.payload {
            Payload::Check(_) => "check",
            Payload::Invariant(_) => "invariant",
            Payload::DMinimality(_) => "d_minimality",
            Payload::Error { .. } => "error",
        };
        *t.entry(key).or_insert(0) += 1;
        if r.failed() {
            *t.entry("failed").or_insert(0) += 1;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        #[derive(DeriveSerialize)]
        struct T {
            a: f64,
            b: f64,
            c: Vec<f64>,
        }
        let s = json_line(&T {
            a: 0.1,
            b: f64::NAN,
            c: vec![2.25, -1e-300],
        })
        .unwrap();
        assert_eq!(
            s,
            r#"{"a":1.0000000000000001e-1,"b":null,"c":[2.2500000000000000e0,-1.0000000000000000e-300]}"#
        );
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_quotes_commas() {
        let rec = Record {
            version: "0",
            chart: "sphere_in_Cq:2,1,2".into(),
            seed: 3,
            point_index: None,
            payload: Payload::Error {
                computation: "x".into(),
                message: "a \"b\"".into(),
            },
        };
        let mut buf = Vec::new();
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(
            row.starts_with("error,\"sphere_in_Cq:2,1,2\",3,,x,"),
            "{row}"
        );
        assert!(row.ends_with("\"a \"\"b\"\"\""));
    }
}
