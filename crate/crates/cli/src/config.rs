//! `--config file.json`: a JSON object whose keys are flag names. Its entries
//! are spliced in right after the subcommand, so flags given on the command
//! line come later and win.

use std::fs;

use serde_json::Value;

pub fn expand(mut argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    if pos < 2 {
        return Err("--config must follow the subcommand".into());
    }
    let path = if let Some(p) = argv[pos].strip_prefix("--config=") {
        let p = p.to_string();
        argv.remove(pos);
        p
    } else {
        if pos + 1 >= argv.len() {
            return Err("--config needs a file path".into());
        }
        argv.remove(pos);
        argv.remove(pos)
    };
    if argv.iter().any(|a| a == "--config" || a.starts_with("--config=")) {
        return Err("--config given more than once".into());
    }
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let flags = flags_from_json(&text).map_err(|e| format!("config {path}: {e}"))?;
    argv.splice(2..2, flags);
    Ok(argv)
}

fn flags_from_json(text: &str) -> Result<Vec<String>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Value::Object(map) = value else {
        return Err("top level must be a JSON object".into());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag),
            Value::Array(items) => {
                let parts: Result<Vec<String>, String> = items.iter().map(|i| scalar(&key, i)).collect();
                out.push(flag);
                out.push(parts?.join(","));
            }
            other => {
                out.push(flag);
                out.push(scalar(&key, &other)?);
            }
        }
    }
    Ok(out)
}

fn scalar(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(format!("key {key:?}: expected a string, number, or list of them")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn json_to_flags() {
        let flags = flags_from_json(r#"{"q": "const:0.5", "n": 8, "T": 4, "n_list": [3, 7], "vectors": true, "timings": false}"#).unwrap();
        assert_eq!(flags, argv(&["--T", "4", "--n", "8", "--n-list", "3,7", "--q", "const:0.5", "--vectors"]));
        assert!(flags_from_json("[1, 2]").is_err());
        assert!(flags_from_json(r#"{"q": {"kind": "constant"}}"#).is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"n": 4}"#).unwrap();
        let out = expand(argv(&["powerq", "eigensolve", "--n", "9", &format!("--config={}", path.display())])).unwrap();
        assert_eq!(out, argv(&["powerq", "eigensolve", "--n", "4", "--n", "9"]));
        assert!(expand(argv(&["powerq", "eigensolve", "--config"])).is_err());
        assert_eq!(expand(argv(&["powerq", "eigensolve"])).unwrap(), argv(&["powerq", "eigensolve"]));
    }
}
