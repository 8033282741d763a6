//! Canonical JSON: object keys sorted, no insignificant whitespace.

use serde::Serialize;
use serde_json::Value;

/// Serializes `value` to canonical JSON text.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("AST and engine types always serialize");
    value_to_string(&tree)
}

/// Re-emits an arbitrary JSON tree in canonical form.
pub fn value_to_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Parses `text` as JSON and re-emits it canonically.
pub fn canonicalize(text: &str) -> Result<String, serde_json::Error> {
    let tree: Value = serde_json::from_str(text)?;
    Ok(value_to_string(&tree))
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(&map[key], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
