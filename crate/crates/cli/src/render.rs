//! Plain-text rendering of a JSON report.

use serde_json::Value;

pub fn text(report: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, report, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", "))
        }
        _ => None,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_value(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                out.push_str(&format!("{pad}- [{i}]\n"));
                write_value(out, x, indent + 1);
            }
        }
        x => out.push_str(&format!("{pad}{}\n", scalar(x).unwrap())),
    }
}
