//! Record and table output in CSV or JSON.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Field {
    Num(f64),
    Vec(Vec<f64>),
    Text(String),
    Bool(bool),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field::Vec(v)
    }
}

impl From<&[f64]> for Field {
    fn from(v: &[f64]) -> Self {
        Field::Vec(v.to_vec())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

/// Ordered key/value record. Tables are a record of scalar metadata plus
/// numeric rows.
#[derive(Debug, Clone, Default)]
pub struct Record {
    fields: Vec<(String, Field)>,
    table: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Field>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn table(mut self, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.table = Some((columns.iter().map(|c| c.to_string()).collect(), rows));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("records serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, f) in &self.fields {
            let v = match f {
                Field::Num(x) => num(*x),
                Field::Vec(v) => Value::Array(v.iter().map(|x| num(*x)).collect()),
                Field::Text(s) => json!(s),
                Field::Bool(b) => json!(b),
            };
            m.insert(k.clone(), v);
        }
        if let Some((cols, rows)) = &self.table {
            let rows = rows
                .iter()
                .map(|r| {
                    let mut o = Map::new();
                    for (c, x) in cols.iter().zip(r) {
                        o.insert(c.clone(), num(*x));
                    }
                    Value::Object(o)
                })
                .collect();
            m.insert("rows".into(), Value::Array(rows));
        }
        Value::Object(m)
    }

    /// Records become a header plus one row, vectors spread over `key_1..`.
    /// Tables put the scalar fields on `# key=value` lines above the header.
    fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some((cols, rows)) => {
                for (k, f) in &self.fields {
                    out.push_str(&format!("# {k}={}\n", field_text(f, ";")));
                }
                out.push_str(&cols.join(","));
                out.push('\n');
                for r in rows {
                    out.push_str(&r.iter().map(|x| fmt_g(*x)).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
            }
            None => {
                let mut header = Vec::new();
                let mut row = Vec::new();
                for (k, f) in &self.fields {
                    match f {
                        Field::Vec(v) => {
                            for (i, x) in v.iter().enumerate() {
                                header.push(format!("{k}_{}", i + 1));
                                row.push(fmt_g(*x));
                            }
                        }
                        _ => {
                            header.push(k.clone());
                            row.push(quote(&field_text(f, ";")));
                        }
                    }
                }
                out.push_str(&header.join(","));
                out.push('\n');
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }
}

fn field_text(f: &Field, sep: &str) -> String {
    match f {
        Field::Num(x) => fmt_g(*x),
        Field::Vec(v) => v.iter().map(|x| fmt_g(*x)).collect::<Vec<_>>().join(sep),
        Field::Text(s) => s.clone(),
        Field::Bool(b) => b.to_string(),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| json!(fmt_g(x)), Value::Number)
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
