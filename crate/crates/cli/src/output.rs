use std::io::Write;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Pretty,
    Csv,
}

/// Rounds every float to 12 significant digits so output is stable across
/// platforms and thread counts.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, v) in o {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// Rows of the `table` field if present (arrays of objects), otherwise
/// flattened `key,value` pairs.
fn write_csv(doc: &Map<String, Value>, w: impl Write) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if let Some(Value::Array(rows)) = doc.get("table") {
        let header: Vec<String> = match rows.first() {
            Some(Value::Object(o)) => o.keys().cloned().collect(),
            _ => vec![],
        };
        wr.write_record(&header)?;
        for r in rows {
            wr.write_record(header.iter().map(|h| scalar(r.get(h).unwrap_or(&Value::Null))))?;
        }
    } else {
        let mut pairs = Vec::new();
        flatten("", &Value::Object(doc.clone()), &mut pairs);
        wr.write_record(["key", "value"])?;
        for (k, v) in pairs {
            wr.write_record([k, v])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn emit(doc: Map<String, Value>, format: Format) {
    let doc = match round_floats(Value::Object(doc)) {
        Value::Object(o) => o,
        _ => unreachable!(),
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = match format {
        Format::Json => writeln!(out, "{}", Value::Object(doc)).map_err(Into::into),
        Format::Pretty => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&Value::Object(doc)).expect("json")
        )
        .map_err(Into::into),
        Format::Csv => write_csv(&doc, &mut out),
    };
    if let Err(e) = res {
        eprintln!("kenergy: cannot write output: {e}");
        std::process::exit(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn rounds_to_twelve_digits() {
        let v = round_floats(json!({"a": [1.0 / 3.0, 2], "b": {"c": 123456789.123456789}}));
        assert_eq!(v, json!({"a": [0.333333333333, 2], "b": {"c": 123456789.123}}));
    }

    #[test]
    fn csv_table_and_pairs() {
        let doc = json!({"table": [{"x": 1, "y": "a,b"}, {"x": 2, "y": "c"}]});
        let mut buf = Vec::new();
        write_csv(doc.as_object().unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n1,\"a,b\"\n2,c\n");
        let doc = json!({"Ak": -6, "config": {"k": 1}});
        let mut buf = Vec::new();
        write_csv(doc.as_object().unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\nAk,-6\nconfig.k,1\n");
    }
}
