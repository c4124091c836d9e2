//! Per-language versioned model store.
//!
//! Layout under the registry root:
//!
//! ```text
//! registry.json            language -> current version, path, history
//! models/<lang>/v<N>/      one classifier bundle per version
//! ```
//!
//! Installing a version writes the bundle to a hidden staging directory,
//! renames it into place, rewrites the manifest through a temp file and
//! rename, and only then swaps the in-memory handle. Readers clone an
//! `Arc` to a handle that carries the classifier and its version together.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use hatewatch_core::Language;
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, ModelKind};
use crate::{Error, Result};

const MANIFEST: &str = "registry.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionEntry {
    pub version: u64,
    /// Relative to the registry root.
    pub path: PathBuf,
    pub kind: ModelKind,
    pub created_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageEntry {
    pub version: u64,
    pub path: PathBuf,
    pub history: Vec<VersionEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub languages: BTreeMap<Language, LanguageEntry>,
}

/// A loaded model version. Immutable once published.
#[derive(Debug)]
pub struct ModelHandle {
    pub language: Language,
    pub version: u64,
    pub classifier: Classifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub language: Language,
    pub version: u64,
    pub kind: ModelKind,
    pub history: Vec<VersionEntry>,
}

#[derive(Debug)]
pub struct ModelRegistry {
    root: PathBuf,
    current: RwLock<BTreeMap<Language, Arc<ModelHandle>>>,
    manifest: Mutex<Manifest>,
}

impl ModelRegistry {
    /// Opens the registry at `root`, creating it if absent, and loads the
    /// current version of every language in the manifest.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let mpath = root.join(MANIFEST);
        let manifest: Manifest = match fs::read_to_string(&mpath) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| Error::Manifest {
                path: mpath.clone(),
                reason: e.to_string(),
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => return Err(Error::io(&mpath, e)),
        };
        let mut current = BTreeMap::new();
        for (&language, entry) in &manifest.languages {
            check_history(&mpath, language, entry)?;
            let classifier = Classifier::load(&root.join(&entry.path))?;
            if classifier.language() != language {
                return Err(Error::Manifest {
                    path: mpath.clone(),
                    reason: format!("{} points at a {} model", language, classifier.language()),
                });
            }
            current.insert(
                language,
                Arc::new(ModelHandle {
                    language,
                    version: entry.version,
                    classifier,
                }),
            );
        }
        Ok(Self {
            root,
            current: RwLock::new(current),
            manifest: Mutex::new(manifest),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// The serving model for `language`.
    pub fn current(&self, language: Language) -> Option<Arc<ModelHandle>> {
        self.current.read().get(&language).cloned()
    }

    pub fn version(&self, language: Language) -> Option<u64> {
        self.current(language).map(|h| h.version)
    }

    pub fn manifest(&self) -> Manifest {
        self.manifest.lock().clone()
    }

    pub fn models(&self) -> Vec<ModelInfo> {
        let m = self.manifest.lock();
        m.languages
            .iter()
            .map(|(&language, e)| ModelInfo {
                language,
                version: e.version,
                kind: e.history.last().map(|h| h.kind).unwrap_or_default(),
                history: e.history.clone(),
            })
            .collect()
    }

    /// Persists `classifier` as the next version of its language and makes
    /// it current. Earlier versions stay on disk.
    pub fn install(&self, classifier: Classifier) -> Result<u64> {
        let language = classifier.language();
        let mut manifest = self.manifest.lock();
        let version = manifest.languages.get(&language).map_or(1, |e| e.version + 1);
        let rel = PathBuf::from("models").join(language.as_str()).join(format!("v{version}"));
        let dest = self.root.join(&rel);
        let staging = self
            .root
            .join("models")
            .join(language.as_str())
            .join(format!(".v{version}.staging"));
        for stale in [&staging, &dest] {
            if stale.exists() {
                fs::remove_dir_all(stale).map_err(|e| Error::io(stale, e))?;
            }
        }
        classifier.save(&staging)?;
        fs::rename(&staging, &dest).map_err(|e| Error::io(&dest, e))?;

        let mut next = manifest.clone();
        let entry = next.languages.entry(language).or_insert_with(|| LanguageEntry {
            version: 0,
            path: PathBuf::new(),
            history: Vec::new(),
        });
        entry.version = version;
        entry.path = rel.clone();
        entry.history.push(VersionEntry {
            version,
            path: rel,
            kind: classifier.kind(),
            created_ms: now_ms(),
        });
        write_manifest(&self.root, &next)?;
        *manifest = next;

        let handle = Arc::new(ModelHandle {
            language,
            version,
            classifier,
        });
        self.current.write().insert(language, handle);
        tracing::info!(%language, version, "model installed");
        Ok(version)
    }
}

fn check_history(path: &Path, language: Language, entry: &LanguageEntry) -> Result<()> {
    let increasing = entry.history.windows(2).all(|w| w[0].version < w[1].version);
    let last = entry.history.last().map(|h| h.version);
    if !increasing || last != Some(entry.version) {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            reason: format!("history for {language} is not a strictly increasing sequence ending at the current version"),
        });
    }
    Ok(())
}

fn write_manifest(root: &Path, manifest: &Manifest) -> Result<()> {
    let path = root.join(MANIFEST);
    let tmp = root.join(format!("{MANIFEST}.tmp"));
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::io(&tmp, e.into()))?;
    {
        let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    if let Ok(d) = File::open(root) {
        let _ = d.sync_all();
    }
    Ok(())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
