//! Deterministic output: JSON documents `{"config", "result"}` and CSV tables
//! with a `# config:` header line. Floats carry 15 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Number, Value};

/// Round to 15 significant digits; non-finite values pass through.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

/// CSV cell for a float: shortest round-trip form of the 15-digit value.
pub fn fmt_f64(x: f64) -> String {
    format!("{:?}", sig15(x))
}

fn round_in_place(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = Number::from_f64(sig15(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_in_place),
        Value::Object(map) => map.values_mut().for_each(round_in_place),
        _ => {}
    }
}

/// Serialize with every float rounded to 15 significant digits.
pub fn rounded(value: &impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_in_place(&mut v);
    Ok(v)
}

pub struct Sink {
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { inner })
    }

    pub fn json(&mut self, config: &Value, result: &impl Serialize) -> Result<()> {
        let doc = serde_json::json!({ "config": config, "result": rounded(result)? });
        serde_json::to_writer_pretty(&mut self.inner, &doc)?;
        writeln!(self.inner)?;
        Ok(())
    }

    /// CSV with a `# config: {...}` comment line ahead of the header.
    pub fn csv(&mut self, config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        writeln!(self.inner, "# config: {}", serde_json::to_string(config)?)?;
        let mut w = csv::Writer::from_writer(&mut self.inner);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Raw text, used where the format itself leaves no room for a header.
    pub fn raw(&mut self, text: &str) -> Result<()> {
        writeln!(self.inner, "{text}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(sig15(0.1 + 0.2), 0.3);
        assert_eq!(sig15(1.0 / 3.0), 0.333333333333333);
        assert_eq!(sig15(-2.5e-300), -2.5e-300);
        assert!(sig15(f64::NAN).is_nan());
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(4.0), "4.0");
    }

    #[test]
    fn nested_values_are_rounded() {
        let v = rounded(&serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}})).unwrap();
        assert_eq!(v["a"][0].as_f64(), Some(0.333333333333333));
        assert_eq!(v["a"][1].as_i64(), Some(2));
        assert_eq!(v["b"]["c"].as_f64(), Some(0.3));
    }
}
