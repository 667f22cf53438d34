//! Scenario configuration: defaults, then a TOML file, then `key=value`
//! overrides.
//!
//! Override keys are dotted paths into the TOML document; numeric segments
//! index arrays (`cohorts.1.coins=75`). Values are read as TOML literals and
//! fall back to plain strings, so `mode=simple` and `mode="simple"` are the
//! same.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Parse(String),
    #[error("override `{0}` is not of the form key=value")]
    Override(String),
    #[error("override key `{0}` does not name a config field")]
    UnknownKey(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Splits `key=value`.
pub fn parse_override(raw: &str) -> Result<(String, String), ConfigError> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Override(raw.to_string())),
    }
}

fn literal(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), ConfigError> {
    let unknown = || ConfigError::UnknownKey(key.to_string());
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Table(t) => {
                let slot = t.get_mut(*part).ok_or_else(unknown)?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Array(a) => {
                let idx: usize = part.parse().map_err(|_| unknown())?;
                let slot = a.get_mut(idx).ok_or_else(unknown)?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(unknown()),
        };
    }
    Err(unknown())
}

/// Builds a `T` from its defaults, an optional TOML document and overrides.
pub fn load<T>(file: Option<&str>, overrides: &[(String, String)]) -> Result<T, ConfigError>
where
    T: Default + Serialize + DeserializeOwned,
{
    let mut doc = Value::try_from(T::default()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    if let Some(text) = file {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        merge(&mut doc, Value::Table(table));
    }
    for (k, v) in overrides {
        set_path(&mut doc, k, literal(v))?;
    }
    doc.try_into().map_err(|e: toml::de::Error| ConfigError::Invalid(e.to_string()))
}

/// Default configuration of `T` as a TOML document.
pub fn render_default<T: Default + Serialize>() -> String {
    toml::to_string(&T::default()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Cohort {
        coins: u64,
        work: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct Cfg {
        seed: u64,
        mode: String,
        decay: f64,
        cohorts: Vec<Cohort>,
    }

    impl Default for Cfg {
        fn default() -> Self {
            Self {
                seed: 1,
                mode: "both".into(),
                decay: 0.05,
                cohorts: vec![Cohort { coins: 50, work: 0.05 }, Cohort { coins: 100, work: 0.2 }],
            }
        }
    }

    fn ov(pairs: &[&str]) -> Vec<(String, String)> {
        pairs.iter().map(|p| parse_override(p).unwrap()).collect()
    }

    #[test]
    fn defaults_file_and_overrides() {
        assert_eq!(load::<Cfg>(None, &[]).unwrap(), Cfg::default());
        let c: Cfg = load(Some("decay = 0.1\n"), &ov(&["seed=9", "mode=simple", "cohorts.1.coins=75"])).unwrap();
        assert_eq!(c.decay, 0.1);
        assert_eq!(c.seed, 9);
        assert_eq!(c.mode, "simple");
        assert_eq!(c.cohorts[1].coins, 75);
        assert_eq!(c.cohorts[0], Cfg::default().cohorts[0]);
    }

    #[test]
    fn file_can_replace_arrays() {
        let text = "[[cohorts]]\ncoins = 10\nwork = 0.25\n";
        let c: Cfg = load(Some(text), &[]).unwrap();
        assert_eq!(c.cohorts, vec![Cohort { coins: 10, work: 0.25 }]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_override("novalue"), Err(ConfigError::Override(_))));
        assert!(matches!(parse_override("=3"), Err(ConfigError::Override(_))));
        assert!(matches!(load::<Cfg>(None, &ov(&["nope=1"])), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(load::<Cfg>(None, &ov(&["cohorts.5.coins=1"])), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(load::<Cfg>(None, &ov(&["seed=abc"])), Err(ConfigError::Invalid(_))));
        assert!(matches!(load::<Cfg>(Some("seed = = 3"), &[]), Err(ConfigError::Parse(_))));
        assert!(matches!(load::<Cfg>(Some("extra = 3"), &[]), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn default_renders_and_reloads() {
        let text = render_default::<Cfg>();
        assert_eq!(load::<Cfg>(Some(&text), &[]).unwrap(), Cfg::default());
    }
}
