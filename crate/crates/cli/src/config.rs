//! Configuration plumbing: the flat key=value config file, flag/file
//! resolution (flags win), and the `start:step:stop` range syntax.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use ringlab::{Error, Result};

/// Parsed config file: normalized keys (lowercase, `-` → `_`) to raw values.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    /// Loads a flat key=value file: one pair per line, `#` starts a comment,
    /// blank lines ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(Error::Parse(format!(
                    "{}:{}: empty key",
                    path.display(),
                    lineno + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(&normalize_key(key)).map(String::as_str)
    }

    fn parse_value<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|e| {
                Error::Parse(format!("config key {key}: bad value {s:?}: {e}"))
            }),
        }
    }

    /// Flag value if given, else config-file value, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(flag
            .map(Ok)
            .or_else(|| self.parse_value(key).transpose())
            .transpose()?
            .unwrap_or(default))
    }

    /// Flag value if given, else config-file value, else `None`.
    pub fn resolve_opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        flag.map(Ok)
            .or_else(|| self.parse_value(key).transpose())
            .transpose()
    }

    /// Flag value if given, else config-file value, else a validation error.
    pub fn resolve_required<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.resolve_opt(key, flag)?.ok_or_else(|| {
            Error::Precondition(format!(
                "missing required setting {key} (flag --{} or config key)",
                key.replace('_', "-")
            ))
        })
    }
}

/// Parses a value list: either a single number, a comma-separated list, or an
/// inclusive `start:step:stop` range (endpoints included within half a step).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty value list".into()));
    }
    let parse_one = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite value {s:?}")));
        }
        Ok(v)
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "range must be start:step:stop, got {text:?}"
            )));
        }
        let start = parse_one(parts[0])?;
        let step = parse_one(parts[1])?;
        let stop = parse_one(parts[2])?;
        if step == 0.0 {
            return Err(Error::Parse("range step must be nonzero".into()));
        }
        if (stop - start) * step < -step.abs() / 2.0 {
            return Err(Error::Parse(format!(
                "range {text:?} is empty: stop lies before start along the step direction"
            )));
        }
        let half = step.abs() / 2.0;
        let mut out = Vec::new();
        for k in 0..=1_000_000u64 {
            let v = start + step * k as f64;
            let past_stop = if step > 0.0 {
                v > stop + half
            } else {
                v < stop - half
            };
            if past_stop {
                return Ok(out);
            }
            out.push(v);
        }
        Err(Error::Parse(format!(
            "range {text:?} would produce more than 1e6 values"
        )))
    } else if text.contains(',') {
        text.split(',').map(parse_one).collect()
    } else {
        Ok(vec![parse_one(text)?])
    }
}

/// Parses a comma-separated list of grid sizes (or a single one).
pub fn parse_grid_sizes(text: &str) -> Result<Vec<usize>> {
    text.trim()
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad grid size {s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive_within_half_step() {
        let v = parse_values("0:0.1:1").unwrap();
        assert_eq!(v.len(), 11);
        assert!((v[10] - 1.0).abs() < 1e-12);
        let v = parse_values("4e-3:-1e-3:1e-3").unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[3] - 1e-3).abs() < 1e-15);
        // Endpoint just beyond half a step is excluded.
        let v = parse_values("0:0.4:1").unwrap();
        assert_eq!(v.len(), 3); // 0, 0.4, 0.8 — 1.2 is 0.2 beyond stop
    }

    #[test]
    fn lists_and_singletons() {
        assert_eq!(parse_values("3.5").unwrap(), vec![3.5]);
        assert_eq!(parse_values("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_values("a,b").is_err());
        assert!(parse_values("0:0:1").is_err());
        assert!(parse_values("1:0.1:0").is_err());
        assert_eq!(parse_grid_sizes("64,128").unwrap(), vec![64, 128]);
        assert!(parse_grid_sizes("64,x").is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment line\nlambda = 3.0\nN=128\nrelax-tol = 1e-8 # trailing comment\n\nout=scan.csv\n",
        )
        .unwrap();
        let s = Settings::load(&path).unwrap();
        assert_eq!(s.resolve("lambda", None::<f64>, 1.0).unwrap(), 3.0);
        assert_eq!(s.resolve("n", None::<usize>, 64).unwrap(), 128);
        // Hyphen/underscore and case are normalized.
        assert_eq!(s.resolve("relax_tol", None::<f64>, 0.0).unwrap(), 1e-8);
        assert_eq!(
            s.resolve_opt("out", None::<String>).unwrap(),
            Some("scan.csv".to_string())
        );
        // Flags win over file values.
        assert_eq!(s.resolve("lambda", Some(5.0), 1.0).unwrap(), 5.0);
        // Absent keys fall back.
        assert_eq!(s.resolve("dt", None::<f64>, 1e-3).unwrap(), 1e-3);
        assert!(s.resolve_required("tol", None::<f64>).is_err());
    }

    #[test]
    fn config_file_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "lambda 3.0\n").unwrap();
        assert!(Settings::load(&path).is_err());
        std::fs::write(&path, "=3.0\n").unwrap();
        assert!(Settings::load(&path).is_err());
    }
}
