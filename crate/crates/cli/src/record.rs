//! Output records: an ordered key/value tree written as JSON or flattened CSV.
//!
//! Floats are always written with 17 significant digits in exponent form, so a
//! re-read value is bit-identical and is never mistaken for an integer.

use std::fmt::Write as _;
use std::io::Write;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Obj(Record),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}
impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}
impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}
impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}
impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}
impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Str(x.to_string())
    }
}
impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Str(x)
    }
}
impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Null, Into::into)
    }
}
impl From<Record> for Value {
    fn from(r: Record) -> Self {
        Value::Obj(r)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.push(key, v);
        self
    }

    /// Replaces an existing key in place, otherwise appends.
    pub fn push(&mut self, key: &str, v: impl Into<Value>) {
        let v = v.into();
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v,
            None => self.0.push((key.to_string(), v)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    /// Nested objects and lists become dotted keys (`config.N`, `mc_se.0`).
    pub fn flatten(&self) -> Record {
        fn go(prefix: &str, v: &Value, out: &mut Record) {
            match v {
                Value::Obj(r) => r.0.iter().for_each(|(k, v)| go(&format!("{prefix}.{k}"), v, out)),
                Value::List(xs) => xs.iter().enumerate().for_each(|(i, v)| go(&format!("{prefix}.{i}"), v, out)),
                _ => out.0.push((prefix.to_string(), v.clone())),
            }
        }
        let mut out = Record::new();
        for (k, v) in &self.0 {
            go(k, v, &mut out);
        }
        out
    }
}

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Float(x) => fmt_float(*x),
        Value::Str(s) => s.clone(),
        Value::List(_) | Value::Obj(_) => unreachable!("flattened before writing"),
    }
}

fn write_json_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(i) => write!(out, "{i}").unwrap(),
        Value::Float(x) if x.is_finite() => out.push_str(&fmt_float(*x)),
        Value::Float(_) => out.push_str("null"),
        Value::Str(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::List(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json_value(out, x);
            }
            out.push(']');
        }
        Value::Obj(r) => write_json_object(out, r),
    }
}

fn write_json_object(out: &mut String, r: &Record) {
    out.push('{');
    for (i, (k, v)) in r.0.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&serde_json::to_string(k).unwrap());
        out.push_str(": ");
        write_json_value(out, v);
    }
    out.push('}');
}

/// One run's output: the resolved configuration and the records it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: String,
    pub config: Record,
    pub records: Vec<Record>,
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        write!(s, "{{\"schema_version\": {SCHEMA_VERSION}, \"command\": ").unwrap();
        s.push_str(&serde_json::to_string(&self.command).unwrap());
        s.push_str(", \"config\": ");
        write_json_object(&mut s, &self.config);
        s.push_str(", \"records\": [");
        for (i, r) in self.records.iter().enumerate() {
            s.push_str(if i > 0 { ",\n  " } else { "\n  " });
            write_json_object(&mut s, r);
        }
        s.push_str("\n]}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let version = v.get("schema_version").and_then(|x| x.as_i64());
        if version != Some(SCHEMA_VERSION) {
            return Err(format!("unsupported schema_version {version:?}"));
        }
        let command = v.get("command").and_then(|c| c.as_str()).ok_or("missing command")?.to_string();
        let config = match from_json_value(v.get("config").ok_or("missing config")?) {
            Value::Obj(r) => r,
            _ => return Err("config is not an object".into()),
        };
        let records = v
            .get("records")
            .and_then(|r| r.as_array())
            .ok_or("missing records")?
            .iter()
            .map(|r| match from_json_value(r) {
                Value::Obj(r) => Ok(r),
                _ => Err("record is not an object".to_string()),
            })
            .collect::<Result<_, _>>()?;
        Ok(Document { command, config, records })
    }

    /// Rows carry `schema_version`, `command` and every `config.*` column, then the
    /// union of the flattened record keys in first-seen order.
    pub fn rows(&self) -> Vec<Record> {
        let mut head = Record::new().with("schema_version", SCHEMA_VERSION).with("command", self.command.as_str());
        head.push("config", self.config.clone());
        let head = head.flatten();
        self.records
            .iter()
            .map(|r| {
                let mut row = head.clone();
                row.0.extend(r.flatten().0);
                row
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let rows = self.rows();
        let mut keys: Vec<String> = Vec::new();
        for r in &rows {
            for (k, _) in &r.0 {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&keys)?;
        for r in &rows {
            out.write_record(keys.iter().map(|k| r.get(k).map(scalar_text).unwrap_or_default()))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn from_json_value(v: &serde_json::Value) -> Value {
    use serde_json::Value as J;
    match v {
        J::Null => Value::Null,
        J::Bool(b) => Value::Bool(*b),
        J::Number(n) => n.as_i64().map_or_else(|| Value::Float(n.as_f64().unwrap_or(f64::NAN)), Value::Int),
        J::String(s) => Value::Str(s.clone()),
        J::Array(xs) => Value::List(xs.iter().map(from_json_value).collect()),
        J::Object(m) => Value::Obj(Record(m.iter().map(|(k, v)| (k.clone(), from_json_value(v))).collect())),
    }
}

fn parse_cell(s: &str) -> Value {
    if s.is_empty() {
        Value::Null
    } else if let Ok(i) = s.parse::<i64>() {
        Value::Int(i)
    } else if let Ok(x) = s.parse::<f64>() {
        Value::Float(x)
    } else if let Ok(b) = s.parse::<bool>() {
        Value::Bool(b)
    } else {
        Value::Str(s.to_string())
    }
}

/// Reads CSV written by [`Document::write_csv`] back into flat rows; empty cells are
/// dropped, matching the sparse rows of [`Document::rows`].
pub fn read_csv(text: &str) -> csv::Result<Vec<Record>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let keys: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    rd.records()
        .map(|row| {
            let row = row?;
            Ok(Record(keys.iter().zip(row.iter()).filter(|(_, c)| !c.is_empty()).map(|(k, c)| (k.clone(), parse_cell(c))).collect()))
        })
        .collect()
}
