//! Plain-text domain descriptions.
//!
//! One `key = value` pair per line, `#` starts a comment:
//!
//! ```text
//! kind = ellipsoid        # disc | ball | polydisc | ellipsoid | generic
//! dim = 2
//! coeffs = 1, 4
//! ```
//!
//! Keys: `kind`, `dim`, `radius`, `radii`, `coeffs`, `rho`, `convex`,
//! `bounding_radius`. `rho` uses the grammar of [`Expr`](super::Expr).

use std::collections::BTreeMap;
use std::path::Path;

use super::{Domain, Expr};
use crate::error::{Error, Result};

const KEYS: [&str; 8] = [
    "kind",
    "dim",
    "radius",
    "radii",
    "coeffs",
    "rho",
    "convex",
    "bounding_radius",
];

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
    col: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DomainConfig {
    path: String,
    entries: BTreeMap<String, Entry>,
}

impl DomainConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = DomainConfig {
            path: origin.to_string(),
            entries: BTreeMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let indent = body.len() - body.trim_start().len();
            let Some(eq) = body.find('=') else {
                return Err(cfg.err(line, indent + 1, "expected 'key = value'"));
            };
            let key = body[..eq].trim();
            if key.is_empty() {
                return Err(cfg.err(line, indent + 1, "missing key"));
            }
            if !KEYS.contains(&key) {
                return Err(cfg.err(line, indent + 1, &format!("unknown key '{key}'")));
            }
            if cfg.entries.contains_key(key) {
                return Err(cfg.err(line, indent + 1, &format!("duplicate key '{key}'")));
            }
            let after = &body[eq + 1..];
            let value = after.trim();
            let col = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(cfg.err(line, col, "missing value"));
            }
            cfg.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                    col,
                },
            );
        }
        Ok(cfg)
    }

    /// No keys at all (an empty or comment-only file).
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn err(&self, line: usize, col: usize, msg: &str) -> Error {
        Error::Config {
            path: self.path.clone(),
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn entry_err(&self, e: &Entry, msg: &str) -> Error {
        self.err(e.line, e.col, msg)
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.entry_err(e, &format!("'{key}' must be a number"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for part in e.value.split(',') {
                    let t = part.trim();
                    let lead = part.len() - part.trim_start().len();
                    let v = t
                        .parse::<f64>()
                        .map_err(|_| self.err(e.line, e.col + offset + lead, &format!("bad number '{t}'")))?;
                    out.push(v);
                    offset += part.len() + 1;
                }
                Ok(Some(out))
            }
        }
    }

    fn dim(&self) -> Result<Option<usize>> {
        match self.get("dim") {
            None => Ok(None),
            Some(e) => match e.value.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(Some(d)),
                _ => Err(self.entry_err(e, "'dim' must be a positive integer")),
            },
        }
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        match (self.dim()?, self.get("dim")) {
            (Some(d), Some(e)) if d != expected => Err(self.entry_err(
                e,
                &format!("dim = {d} but the parameters describe dimension {expected}"),
            )),
            _ => Ok(()),
        }
    }

    fn reject(&self, keys: &[&str], kind: &str) -> Result<()> {
        for k in keys {
            if let Some(e) = self.get(k) {
                return Err(self.entry_err(e, &format!("'{k}' does not apply to kind {kind}")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Domain> {
        let kind_entry = self.get("kind").ok_or_else(|| self.err(1, 1, "missing 'kind'"))?;
        let kind = kind_entry.value.as_str();
        let located = |e: Error| match e {
            Error::Config { .. } => e,
            other => self.entry_err(kind_entry, &other.to_string()),
        };
        match kind {
            "disc" | "ball" => {
                self.reject(&["radii", "coeffs", "rho", "convex", "bounding_radius"], kind)?;
                let r = self.number("radius")?.unwrap_or(1.0);
                let n = if kind == "disc" {
                    self.check_dim(1)?;
                    1
                } else {
                    self.dim()?
                        .ok_or_else(|| self.entry_err(kind_entry, "ball needs 'dim'"))?
                };
                Domain::ball(n, r).map_err(located)
            }
            "polydisc" => {
                self.reject(&["coeffs", "rho", "convex", "bounding_radius"], kind)?;
                let radii = match (self.list("radii")?, self.dim()?) {
                    (Some(r), _) => r,
                    (None, Some(n)) => vec![self.number("radius")?.unwrap_or(1.0); n],
                    (None, None) => return Err(self.entry_err(kind_entry, "polydisc needs 'radii' or 'dim'")),
                };
                self.check_dim(radii.len())?;
                Domain::polydisc(&radii).map_err(located)
            }
            "ellipsoid" => {
                self.reject(&["radius", "radii", "rho", "convex", "bounding_radius"], kind)?;
                let coeffs = self
                    .list("coeffs")?
                    .ok_or_else(|| self.entry_err(kind_entry, "ellipsoid needs 'coeffs'"))?;
                self.check_dim(coeffs.len())?;
                Domain::ellipsoid(&coeffs).map_err(located)
            }
            "generic" => {
                self.reject(&["radius", "radii", "coeffs"], kind)?;
                let rho = self
                    .get("rho")
                    .ok_or_else(|| self.entry_err(kind_entry, "generic needs 'rho'"))?;
                let expr = Expr::parse(&rho.value).map_err(|e| match e {
                    Error::Expr { col, msg } => self.err(rho.line, rho.col + col - 1, &msg),
                    other => other,
                })?;
                let n = self.dim()?.unwrap_or(expr.max_var().max(1));
                let r = self
                    .number("bounding_radius")?
                    .ok_or_else(|| self.entry_err(kind_entry, "generic needs 'bounding_radius'"))?;
                let convex = match self.get("convex") {
                    None => false,
                    Some(e) => match e.value.as_str() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(self.entry_err(e, "'convex' must be true or false")),
                    },
                };
                Domain::generic(n, expr, r, convex).map_err(located)
            }
            other => Err(self.entry_err(kind_entry, &format!("unknown kind '{other}'"))),
        }
    }
}
