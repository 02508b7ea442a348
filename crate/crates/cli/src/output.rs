//! Result records and their JSON/CSV rendering.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

/// A single field value.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
    /// Expanded into `name_1, name_2, …` columns in CSV.
    List(Vec<f64>),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_owned())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Flag(v)
    }
}

impl From<&[f64]> for Field {
    fn from(v: &[f64]) -> Self {
        Field::List(v.to_vec())
    }
}

/// Ordered `(name, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Field>) -> Self {
        self.0.push((name.to_owned(), value.into()));
        self
    }

    fn csv_columns(&self) -> Vec<(String, String)> {
        let mut cols = Vec::new();
        for (name, field) in &self.0 {
            match field {
                Field::List(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        cols.push((format!("{name}_{}", i + 1), fixed6(*x)));
                    }
                }
                Field::Num(x) => cols.push((name.clone(), fixed6(*x))),
                Field::Int(i) => cols.push((name.clone(), i.to_string())),
                Field::Text(s) => cols.push((name.clone(), s.clone())),
                Field::Flag(b) => cols.push((name.clone(), b.to_string())),
            }
        }
        cols
    }

    fn to_json(&self) -> Map<String, Value> {
        self.0
            .iter()
            .map(|(name, field)| {
                let v = match field {
                    Field::Num(x) => num6(*x),
                    Field::Int(i) => json!(i),
                    Field::Text(s) => json!(s),
                    Field::Flag(b) => json!(b),
                    Field::List(xs) => Value::Array(xs.iter().map(|x| num6(*x)).collect()),
                };
                (name.clone(), v)
            })
            .collect()
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Single(Record),
    Rows(Vec<Record>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Provenance of a run, attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// Manifest for `argv` (without the program name). Flag/value pairs
    /// become parameters; bare flags map to `"true"`.
    pub fn from_argv(argv: &[String], seed: u64) -> Self {
        let command = argv.iter().take_while(|a| !a.starts_with("--")).cloned().collect::<Vec<_>>().join(" ");
        let mut parameters = BTreeMap::new();
        let mut it = argv.iter().skip_while(|a| !a.starts_with("--")).peekable();
        while let Some(flag) = it.next() {
            let Some(name) = flag.strip_prefix("--") else { continue };
            if let Some((k, v)) = name.split_once('=') {
                parameters.insert(k.to_owned(), v.to_owned());
                continue;
            }
            let value = match it.peek() {
                Some(next) if !next.starts_with("--") => it.next().cloned().unwrap_or_default(),
                _ => "true".to_owned(),
            };
            parameters.insert(name.to_owned(), value);
        }
        Self {
            command,
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Six-decimal fixed formatting used for every CSV number.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    // Avoid "-0.000000".
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

fn num6(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r = (x * 1e6).round() / 1e6;
    json!(if r == 0.0 { 0.0 } else { r })
}

/// Renders JSON. The manifest, when present, is embedded under `"manifest"`.
pub fn render_json(payload: &Payload, manifest: Option<&RunManifest>) -> String {
    let manifest_value = manifest.map(|m| serde_json::to_value(m).expect("manifest serializes"));
    let value = match payload {
        Payload::Single(r) => {
            let mut obj = r.to_json();
            if let Some(m) = manifest_value {
                obj.insert("manifest".into(), m);
            }
            Value::Object(obj)
        }
        Payload::Rows(rows) => {
            let arr = Value::Array(rows.iter().map(|r| Value::Object(r.to_json())).collect());
            match manifest_value {
                Some(m) => json!({ "rows": arr, "manifest": m }),
                None => arr,
            }
        }
    };
    let mut s = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Renders CSV with a header row. Rows must share the first row's columns.
pub fn render_csv(payload: &Payload) -> Result<String, csv::Error> {
    let rows: Vec<&Record> = match payload {
        Payload::Single(r) => vec![r],
        Payload::Rows(rs) => rs.iter().collect(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.csv_columns().iter().map(|(n, _)| n))?;
    }
    for r in rows {
        w.write_record(r.csv_columns().iter().map(|(_, v)| v))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 strings"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> Record {
        Record::new().with("P", 0.0).with("S", 0.15 / 1.15).with("scheme", "linear").with("levels", &[0.5, 1.25][..])
    }

    #[test]
    fn fixed_decimals() {
        assert_eq!(fixed6(0.1304347826), "0.130435");
        assert_eq!(fixed6(-1e-9), "0.000000");
        assert_eq!(fixed6(-0.25), "-0.250000");
        assert_eq!(fixed6(3.0), "3.000000");
    }

    #[test]
    fn csv_expands_lists_and_round_trips() {
        let text = render_csv(&Payload::Rows(vec![record(), record().with_text_quote()])).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_owned).collect();
        assert_eq!(header, ["P", "S", "scheme", "levels_1", "levels_2"]);
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(&rows[0][1], "0.130435");
        assert_eq!(&rows[1][2], "a, \"quoted\" name");
    }

    #[test]
    fn json_rounds_and_embeds_manifest() {
        let m = RunManifest::from_argv(
            &["eval".into(), "linear".into(), "--Q".into(), "1".into(), "--no-manifest".into()],
            0,
        );
        assert_eq!(m.command, "eval linear");
        assert_eq!(m.parameters["Q"], "1");
        assert_eq!(m.parameters["no-manifest"], "true");
        let text = render_json(&Payload::Single(record()), Some(&m));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["S"], json!(0.130435));
        assert_eq!(v["manifest"]["command"], json!("eval linear"));
        assert!(text.find("\"P\"").unwrap() < text.find("\"S\"").unwrap());
    }

    impl Record {
        fn with_text_quote(mut self) -> Self {
            self.0[2].1 = Field::Text("a, \"quoted\" name".into());
            self
        }
    }
}
