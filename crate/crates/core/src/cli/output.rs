use serde_json::{Map, Value};

fn flatten_into(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_into(&key(k), x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                out.insert(key(&i.to_string()), x.clone());
            }
        }
        // nested tables do not fit in one row
        Value::Array(_) => {}
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

/// Dotted-path flattening of a JSON record; arrays of scalars become `key.i`.
pub fn flatten(v: &Value) -> Map<String, Value> {
    let mut out = Map::new();
    flatten_into("", v, &mut out);
    out
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Some(x) => x.to_string(),
    }
}

/// One row per record; columns are the union of flattened keys in first-seen order.
pub fn table(rows: &[Value]) -> String {
    let flat: Vec<Map<String, Value>> = rows.iter().map(flatten).collect();
    let mut cols: Vec<String> = Vec::new();
    for r in &flat {
        for k in r.keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    let mut s = cols.join(",");
    s.push('\n');
    for r in &flat {
        let line: Vec<String> = cols.iter().map(|c| cell(r.get(c))).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Two-column `key,value` listing of a single record.
pub fn key_values(v: &Value) -> String {
    let mut s = String::from("key,value\n");
    for (k, x) in flatten(v) {
        s.push_str(&format!("{},{}\n", k, cell(Some(&x))));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_nests_with_dots() {
        let f = flatten(&json!({"a": {"b": 1, "c": [2, 3]}, "d": "x", "t": [{"q": 1}]}));
        assert_eq!(f["a.b"], json!(1));
        assert_eq!(f["a.c.1"], json!(3));
        assert_eq!(f["d"], json!("x"));
        assert!(!f.contains_key("t"));
    }

    #[test]
    fn table_unions_columns() {
        let t = table(&[json!({"x": 1, "y": 2}), json!({"x": 3, "z": "a,b"})]);
        assert_eq!(t, "x,y,z\n1,2,\n3,,\"a,b\"\n");
    }

    #[test]
    fn key_values_lists_leaves() {
        assert_eq!(
            key_values(&json!({"c": 1.5, "n": 2})),
            "key,value\nc,1.5\nn,2\n"
        );
    }
}
