//! Report serialization.
//!
//! JSON output renders every float in scientific notation with 17 significant
//! digits, enough for a bitwise round trip through `str::parse::<f64>`.  The
//! CSV flavour flattens single reports into `key,value` rows and tabular
//! results (event streams, scans, traces) into one row per entry.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Serializer, Value};
use sln_core::stats::{Estimate, EventRecord};
use sln_core::witness::ViolationReport;

/// Default `Formatter` except that floats are written as `{:.16e}`, i.e. a
/// mantissa with 16 fractional digits.  That is lossless for `f64` and keeps
/// tiny violation coefficients legible next to order-one probabilities.
struct SciFloats;

impl Formatter for SciFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json(value: &Value) -> anyhow::Result<String> {
    if let Some(path) = first_non_finite(value, "$") {
        anyhow::bail!("refusing to serialize non-finite value at {path}");
    }
    let mut buf = Vec::new();
    value.serialize(&mut Serializer::with_formatter(&mut buf, SciFloats))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// `serde_json` silently maps NaN/inf to `null`; surface them as errors with
/// a JSON-pointer-ish path instead of emitting a corrupt report.
fn first_non_finite(value: &Value, path: &str) -> Option<String> {
    match value {
        Value::Null => Some(path.to_string()),
        Value::Number(n) => {
            let ok = n.as_f64().map_or(true, f64::is_finite);
            (!ok).then(|| path.to_string())
        }
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| first_non_finite(v, &format!("{path}[{i}]"))),
        Value::Object(map) => map
            .iter()
            .find_map(|(k, v)| first_non_finite(v, &format!("{path}.{k}"))),
        _ => None,
    }
}

pub fn report_json(rep: &ViolationReport) -> Value {
    json!({
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "epsilon_coeff": rep.epsilon_coeff,
        "v_coeff": rep.v_coeff,
        "lambda": rep.lambda.to_vec(),
        "argmax": {
            "a1": rep.argmax.strategy.a1,
            "a2": rep.argmax.strategy.a2,
            "t": rep.argmax.t,
        },
        "verdict": rep.verdict.as_str(),
    })
}

pub fn estimate_json(lambda: &[f64; 8], est: &Estimate) -> Value {
    json!({
        "lambda": lambda.to_vec(),
        "theta_star": est.theta_star.to_vec(),
        "epsilon_hat": est.epsilon_hat,
        "v_hat": est.v_hat,
        "n": est.n,
    })
}

/// Flatten a JSON report into `key,value` CSV rows.  Arrays get indexed
/// keys (`lambda_0`, ...), nested objects a `parent_child` prefix.
pub fn to_kv_csv(value: &Value) -> String {
    let mut rows = String::from("key,value\n");
    flatten(value, "", &mut rows);
    rows
}

fn flatten(value: &Value, prefix: &str, rows: &mut String) {
    let key = |suffix: &str| {
        if prefix.is_empty() {
            suffix.to_string()
        } else {
            format!("{prefix}_{suffix}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(v, &key(k), rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, &key(&i.to_string()), rows);
            }
        }
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                rows.push_str(&format!("{prefix},{f:.16e}\n"));
            } else {
                rows.push_str(&format!("{prefix},{n}\n"));
            }
        }
        Value::String(s) => rows.push_str(&format!("{prefix},{s}\n")),
        Value::Bool(b) => rows.push_str(&format!("{prefix},{b}\n")),
        Value::Null => rows.push_str(&format!("{prefix},\n")),
    }
}

pub fn events_csv(events: &[EventRecord]) -> String {
    let mut out = String::with_capacity(16 + 6 * events.len());
    out.push_str("setting,n_a,n_b\n");
    for e in events {
        out.push_str(&format!("{},{},{}\n", e.setting, e.n_a, e.n_b));
    }
    out
}

pub fn parse_events_csv(text: &str) -> anyhow::Result<Vec<EventRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "setting,n_a,n_b")) => {}
        Some((_, other)) => anyhow::bail!("bad header {other:?}, expected \"setting,n_a,n_b\""),
        None => anyhow::bail!("empty events file"),
    }
    let mut events = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut field = |name: &str| -> anyhow::Result<u8> {
            cols.next()
                .ok_or_else(|| anyhow::anyhow!("line {}: missing {name}", i + 1))?
                .trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("line {}: bad {name}: {e}", i + 1))
        };
        let setting = field("setting")?;
        let n_a = field("n_a")?;
        let n_b = field("n_b")?;
        if cols.next().is_some() {
            anyhow::bail!("line {}: too many columns", i + 1);
        }
        events.push(EventRecord { setting, n_a, n_b });
    }
    Ok(events)
}
