//! Service configuration: a TOML file plus two environment overrides.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! registry_dir = "registry"
//! feedback_log = "feedback.jsonl"
//! static_dir = "webapp/dist"
//! bootstrap = true
//!
//! [policy]
//! threshold = 0.6
//! min_pool = 50
//! base_corpus = "corpus.tsv"
//!
//! [routing]
//! devanagari = 0.30
//! codemix = 0.15
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use hatewatch_core::langid::RoutingThresholds;
use hatewatch_core::ExecMode;
use hatewatch_hub::RetrainPolicy;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Path of the config file.
pub const ENV_CONFIG: &str = "HATEWATCH_CONFIG";
/// Listen address, overriding the file.
pub const ENV_LISTEN: &str = "HATEWATCH_LISTEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub listen: String,
    pub registry_dir: PathBuf,
    pub feedback_log: PathBuf,
    /// Lexicon directory; the bundled lexicons when unset.
    pub lexicon_dir: Option<PathBuf>,
    /// Built web assets served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Train version 1 from the base corpus for languages without a model.
    pub bootstrap: bool,
    /// Execution mode for page scoring.
    pub mode: ExecMode,
    pub policy: RetrainPolicy,
    pub routing: RoutingThresholds,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            registry_dir: "registry".into(),
            feedback_log: "feedback.jsonl".into(),
            lexicon_dir: None,
            static_dir: None,
            bootstrap: true,
            mode: ExecMode::default(),
            policy: RetrainPolicy::default(),
            routing: RoutingThresholds::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: ServiceConfig = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    /// Loads `file` (or the defaults) and applies `listen` on top.
    pub fn resolve(file: Option<&Path>, listen: Option<String>) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(l) = listen.filter(|l| !l.trim().is_empty()) {
            cfg.listen = l;
        }
        Ok(cfg)
    }

    /// [`resolve`](Self::resolve) with `explicit` falling back to
    /// `HATEWATCH_CONFIG`, and the listen address taken from `HATEWATCH_LISTEN`.
    pub fn from_env(explicit: Option<&Path>) -> Result<Self> {
        let env_path = std::env::var_os(ENV_CONFIG).map(PathBuf::from);
        let file = explicit.map(Path::to_path_buf).or(env_path);
        Self::resolve(file.as_deref(), std::env::var(ENV_LISTEN).ok())
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.registry_dir);
        fix(&mut self.feedback_log);
        for p in [&mut self.lexicon_dir, &mut self.static_dir, &mut self.policy.base_corpus]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_paths_resolve_against_its_directory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("svc.toml");
        fs::write(
            &path,
            "listen = \"0.0.0.0:9000\"\nregistry_dir = \"reg\"\n[policy]\nthreshold = 0.7\nbase_corpus = \"/abs/c.tsv\"\n",
        )
        .unwrap();
        let cfg = ServiceConfig::resolve(Some(&path), None).unwrap();
        assert_eq!(cfg.listen, "0.0.0.0:9000");
        assert_eq!(cfg.registry_dir, dir.path().join("reg"));
        assert_eq!(cfg.feedback_log, dir.path().join("feedback.jsonl"));
        assert_eq!(cfg.policy.threshold, 0.7);
        assert_eq!(cfg.policy.min_pool, 50);
        assert_eq!(cfg.policy.base_corpus, Some(PathBuf::from("/abs/c.tsv")));
    }

    #[test]
    fn listen_override_wins() {
        let cfg = ServiceConfig::resolve(None, Some("127.0.0.1:1".into())).unwrap();
        assert_eq!(cfg.listen, "127.0.0.1:1");
        assert_eq!(ServiceConfig::resolve(None, Some(" ".into())).unwrap().listen, "127.0.0.1:8080");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("svc.toml");
        fs::write(&path, "listn = \"x\"\n").unwrap();
        assert!(matches!(ServiceConfig::from_file(&path), Err(Error::Config { .. })));
    }
}
