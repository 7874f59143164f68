use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Reproducibility stamp carried by every JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Stamp {
    /// `config` should hold the command, its resolved flags and the digests
    /// of its inputs. Object keys serialize sorted, so equal configs hash equal.
    pub fn new(seed: Option<u64>, config: &Value) -> Self {
        let canonical = serde_json::to_string(config).expect("config serializes");
        Stamp { version: env!("CARGO_PKG_VERSION"), seed, config_hash: sha256_hex(canonical.as_bytes()) }
    }

    /// `{"stamp": ..., "<key>": payload}`, pretty-printed with a final newline.
    pub fn wrap<T: Serialize>(&self, key: &str, payload: &T) -> String {
        let mut obj = json!({ "stamp": self });
        obj[key] = serde_json::to_value(payload).expect("payload serializes");
        let mut text = serde_json::to_string_pretty(&obj).expect("artifact serializes");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a = Stamp::new(Some(1), &json!({"b": 1, "a": [1, 2]}));
        let b = Stamp::new(Some(1), &serde_json::from_str(r#"{"a": [1, 2], "b": 1}"#).unwrap());
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.config_hash.len(), 64);
        assert_ne!(a.config_hash, Stamp::new(Some(1), &json!({"b": 2, "a": [1, 2]})).config_hash);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn wrapped_artifact_shape() {
        let s = Stamp::new(None, &json!({}));
        let text = s.wrap("graph", &json!({"edges": []}));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["stamp"]["seed"], Value::Null);
        assert_eq!(v["stamp"]["version"], env!("CARGO_PKG_VERSION"));
        assert!(v["graph"]["edges"].as_array().unwrap().is_empty());
        assert!(text.ends_with("}\n"));
    }
}
