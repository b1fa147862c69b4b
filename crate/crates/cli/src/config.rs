use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cca_core::manifold::StiefelProjection;
use cca_core::rsg::{CrossCovariance, Hyperparams, PcaLog, Schedule, Whitening};
use serde::Serialize;
use toml::Value;

use crate::CliError;

/// Default output root when neither the config nor `CCA_OUTPUT_DIR` names one.
pub const DEFAULT_OUTPUT_DIR: &str = "cca-output";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Synthetic {
        d_x: usize,
        d_y: usize,
        k_true: usize,
        strengths: Vec<f64>,
        noise_scale: f64,
        n: usize,
        data_seed: u64,
    },
    Files {
        path_x: PathBuf,
        path_y: PathBuf,
        skip_header: bool,
    },
    Split {
        path: PathBuf,
        split_column: usize,
        skip_header: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: SourceSpec,
    pub hyper: Hyperparams,
    pub eval_every: usize,
    pub passes: usize,
    pub center: bool,
    pub ridge: f64,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "source",
    "d_x",
    "d_y",
    "k_true",
    "strengths",
    "noise_scale",
    "n",
    "data_seed",
    "path_x",
    "path_y",
    "path",
    "split_column",
    "skip_header",
    "center",
    "ridge",
    "k",
    "batch_size",
    "gamma0",
    "schedule",
    "stiefel_projection",
    "seed",
    "pca_log",
    "whitening",
    "cross_cov",
    "eval_every",
    "passes",
    "output_dir",
];

/// Default latent strengths `4 · 0.75^i`.
pub fn default_strengths(k_true: usize) -> Vec<f64> {
    (0..k_true).map(|i| 4.0 * 0.75f64.powi(i as i32)).collect()
}

/// A value together with the directory relative paths should be resolved against.
struct Entry {
    value: Value,
    base: Option<PathBuf>,
}

struct Fields {
    origin: String,
    entries: BTreeMap<String, Entry>,
}

impl Fields {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}: field `{key}`: {msg}", self.origin))
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(self.err(key, format!("expected a nonnegative integer, got {v}"))),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.usize_or(key, default as usize)? as u64)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Float(f)) => Ok(*f),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(v) => Err(self.err(key, format!("expected a number, got {v}"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(v) => Err(self.err(key, format!("expected true or false, got {v}"))),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(self.err(key, format!("expected a string, got {v}"))),
        }
    }

    fn parsed_or<T: std::str::FromStr<Err = String>>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.str(key)? {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| self.err(key, e)),
        }
    }

    fn path(&self, key: &str) -> Result<PathBuf, CliError> {
        let raw = self
            .str(key)?
            .ok_or_else(|| self.err(key, "required for this source"))?;
        let p = PathBuf::from(raw);
        match &self.entries[key].base {
            Some(base) if p.is_relative() => Ok(base.join(p)),
            _ => Ok(p),
        }
    }

    fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(self.err(key, format!("expected numbers, got {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(v) => Err(self.err(key, format!("expected an array, got {v}"))),
        }
    }
}

/// Parses a `--key value` override: TOML scalar/array syntax if it parses, else a bare string.
fn override_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Splits `--key value` / `--key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            return Err(CliError::Config(format!(
                "unexpected argument `{arg}` (overrides look like --key value)"
            )));
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.replace('-', "_"), v.to_string()));
        } else {
            let value = it
                .next()
                .ok_or_else(|| CliError::Config(format!("override `--{key}` is missing a value")))?;
            out.push((key.replace('-', "_"), value.clone()));
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Reads a config file and applies overrides on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf);
        Self::parse(&text, &path.display().to_string(), base, overrides)
    }

    /// Parses a flat `key = value` document. Section headers are allowed and only group
    /// keys visually; every key must be unique across sections.
    pub fn parse(
        text: &str,
        origin: &str,
        base: Option<PathBuf>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let mut entries = BTreeMap::new();
        let mut insert = |key: String, value: Value, base: Option<PathBuf>| -> Result<(), CliError> {
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("{origin}: unknown key `{key}`")));
            }
            entries.insert(key, Entry { value, base });
            Ok(())
        };
        for (key, value) in table {
            match value {
                Value::Table(section) => {
                    for (k, v) in section {
                        if matches!(v, Value::Table(_)) {
                            return Err(CliError::Config(format!("{origin}: nested section `{key}.{k}`")));
                        }
                        insert(k, v, base.clone())?;
                    }
                }
                v => insert(key, v, base.clone())?,
            }
        }
        for (k, raw) in overrides {
            insert(k.clone(), override_value(raw), None)?;
        }
        Self::from_fields(&Fields {
            origin: origin.to_string(),
            entries,
        })
    }

    fn from_fields(f: &Fields) -> Result<Self, CliError> {
        let seed = f.u64_or("seed", 0)?;
        let source = match f.str("source")?.unwrap_or("synthetic") {
            "synthetic" => {
                let k_true = f.usize_or("k_true", 4)?;
                let strengths = f.float_list("strengths")?.unwrap_or_else(|| default_strengths(k_true));
                if strengths.len() != k_true {
                    return Err(f.err(
                        "strengths",
                        format!("has {} entries, k_true is {k_true}", strengths.len()),
                    ));
                }
                SourceSpec::Synthetic {
                    d_x: f.usize_or("d_x", 50)?,
                    d_y: f.usize_or("d_y", 50)?,
                    k_true,
                    strengths,
                    noise_scale: f.f64_or("noise_scale", 0.5)?,
                    n: f.usize_or("n", 50_000)?,
                    data_seed: f.u64_or("data_seed", seed)?,
                }
            }
            "files" => SourceSpec::Files {
                path_x: f.path("path_x")?,
                path_y: f.path("path_y")?,
                skip_header: f.bool_or("skip_header", false)?,
            },
            "split" => SourceSpec::Split {
                path: f.path("path")?,
                split_column: f.usize_or("split_column", 0)?,
                skip_header: f.bool_or("skip_header", false)?,
            },
            other => return Err(f.err("source", format!("unknown source `{other}` (synthetic|files|split)"))),
        };

        let mut hyper = Hyperparams::new(f.usize_or("k", 2)?);
        hyper.batch_size = f.usize_or("batch_size", hyper.batch_size)?;
        hyper.gamma0 = f.f64_or("gamma0", hyper.gamma0)?;
        hyper.schedule = f.parsed_or::<Schedule>("schedule", hyper.schedule)?;
        hyper.stiefel_projection = f.parsed_or::<StiefelProjection>("stiefel_projection", hyper.stiefel_projection)?;
        hyper.seed = seed;
        hyper.pca_log = f.parsed_or::<PcaLog>("pca_log", hyper.pca_log)?;
        hyper.whitening = f.parsed_or::<Whitening>("whitening", hyper.whitening)?;
        hyper.cross_cov = f.parsed_or::<CrossCovariance>("cross_cov", hyper.cross_cov)?;
        hyper.validate().map_err(|e| f.err("k", e))?;

        let eval_every = f.usize_or("eval_every", 10)?;
        if eval_every == 0 {
            return Err(f.err("eval_every", "must be at least 1"));
        }
        let passes = f.usize_or("passes", 1)?;
        if passes == 0 {
            return Err(f.err("passes", "must be at least 1"));
        }
        let ridge = f.f64_or("ridge", 0.0)?;
        if !(ridge >= 0.0) {
            return Err(f.err("ridge", "must be nonnegative"));
        }
        let output_dir = match f.str("output_dir")? {
            Some(_) => f.path("output_dir")?,
            None => std::env::var_os("CCA_OUTPUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        };
        Ok(Self {
            source,
            hyper,
            eval_every,
            passes,
            center: f.bool_or("center", true)?,
            ridge,
            output_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, overrides: &[(&str, &str)]) -> Result<RunConfig, CliError> {
        let o: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::parse(text, "test.toml", None, &o)
    }

    #[test]
    fn defaults_and_sections() {
        let c = parse(
            "[data]\nsource = \"synthetic\"\nn = 1000\n[optimizer]\nk = 3\ngamma0 = 0.5\n",
            &[],
        )
        .unwrap();
        assert_eq!(c.hyper.k, 3);
        assert_eq!(c.hyper.gamma0, 0.5);
        assert_eq!(c.hyper.batch_size, 100);
        assert!(matches!(c.source, SourceSpec::Synthetic { n: 1000, d_x: 50, .. }));
        assert!(c.center);
    }

    #[test]
    fn flags_win() {
        let c = parse(
            "k = 3\nschedule = \"constant\"\n",
            &[
                ("k", "4"),
                ("schedule", "inverse_t"),
                ("stiefel_projection", "canonical"),
            ],
        )
        .unwrap();
        assert_eq!(c.hyper.k, 4);
        assert_eq!(c.hyper.schedule, Schedule::InverseT);
        assert_eq!(c.hyper.stiefel_projection, StiefelProjection::Canonical);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse("k = \"three\"\n", &[]).unwrap_err().to_string();
        assert!(e.contains("test.toml") && e.contains("`k`"), "{e}");
        let e = parse("bogus = 1\n", &[]).unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = parse("eval_every = 0\n", &[]).unwrap_err().to_string();
        assert!(e.contains("eval_every"), "{e}");
        assert!(parse("k = 3\nbatch_size = 2\n", &[]).is_err());
    }

    #[test]
    fn override_pairs() {
        let args: Vec<String> = ["--k", "3", "--gamma0=0.1", "--stiefel-projection", "paper"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let pairs = parse_overrides(&args).unwrap();
        assert_eq!(pairs[1], ("gamma0".to_string(), "0.1".to_string()));
        assert_eq!(pairs[2].0, "stiefel_projection");
        assert!(parse_overrides(&["--k".to_string()]).is_err());
        assert!(parse_overrides(&["k".to_string()]).is_err());
    }
}
