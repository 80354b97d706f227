//! Project model extraction from source trees.
//!
//! Each extractor walks a project directory in lexicographic path order and
//! builds a [`ProjectModel`] for a target architecture:
//!
//! * [`extract_osgi`]: bundle manifests, `feature.xml`, `*.product` and
//!   declarative-services component XML.
//! * [`extract_maven`]: `pom.xml` aggregators and modules, plus `@Named` /
//!   `@Inject` annotations in Java sources.
//! * [`extract_yarn`]: `yarn.lock` (v1) packages and InversifyJS bindings in
//!   TypeScript sources.
//! * [`ingest_gradle_json`]: `*.gradle-deps.json` files written by a build
//!   task (see `docs/gradle-deps.md`).
//!
//! References to artifacts outside the tree become instances whose display
//! name starts with [`EXTERNAL_PREFIX`].

pub mod manifest;

mod gradle;
mod maven;
mod osgi;
mod yarn;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use archviz_core::archmeta::ValidatedArchitecture;
use archviz_core::projmodel::{PmError, ProjectModel};
use globset::{Glob, GlobSet, GlobSetBuilder};
use thiserror::Error;

pub use gradle::ingest_gradle_json;
pub use maven::extract_maven;
pub use osgi::extract_osgi;
pub use yarn::extract_yarn;

pub const EXTERNAL_PREFIX: &str = "(external) ";

/// Directories never descended into unless explicitly included.
pub const DEFAULT_EXCLUDES: &[&str] = &["**/.git/**", "**/node_modules/**", "**/target/**"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractorKind {
    Osgi,
    Maven,
    Yarn,
    GradleJson,
}

impl ExtractorKind {
    pub const ALL: [ExtractorKind; 4] =
        [ExtractorKind::Osgi, ExtractorKind::Maven, ExtractorKind::Yarn, ExtractorKind::GradleJson];

    pub fn name(self) -> &'static str {
        match self {
            ExtractorKind::Osgi => "osgi",
            ExtractorKind::Maven => "maven",
            ExtractorKind::Yarn => "yarn",
            ExtractorKind::GradleJson => "gradle-json",
        }
    }
}

impl fmt::Display for ExtractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtractorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown extractor kind `{s}` (expected osgi, maven, yarn or gradle-json)"))
    }
}

#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    pub root: PathBuf,
    pub kind: ExtractorKind,
    /// Globs over `/`-separated paths relative to `root`. Empty means
    /// everything.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub arch: Arc<ValidatedArchitecture>,
    /// Project name recorded in the model; defaults to the root directory
    /// name.
    pub project_name: Option<String>,
}

impl ExtractionConfig {
    pub fn new(root: impl Into<PathBuf>, kind: ExtractorKind, arch: Arc<ValidatedArchitecture>) -> Self {
        Self {
            root: root.into(),
            kind,
            include: Vec::new(),
            exclude: DEFAULT_EXCLUDES.iter().map(|s| s.to_string()).collect(),
            arch,
            project_name: None,
        }
    }

    fn project_name(&self) -> String {
        self.project_name.clone().unwrap_or_else(|| {
            self.root
                .canonicalize()
                .ok()
                .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "project".to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub path: Option<String>,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(path) => write!(f, "{path}: warning: {}", self.message),
            None => write!(f, "warning: {}", self.message),
        }
    }
}

#[derive(Debug)]
pub struct Extraction {
    pub pm: ProjectModel,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("root directory `{0}` does not exist or is not a directory")]
    RootMissing(PathBuf),
    #[error("the {kind} extractor needs artifact `{artifact}` in the target architecture")]
    MissingArtifact { kind: ExtractorKind, artifact: String },
    #[error("yarn.lock not found")]
    YarnLockNotFound,
    #[error("{file}: {message}")]
    Schema { file: String, message: String },
    #[error("duplicate project id `{id}` in {file}")]
    DuplicateProject { id: String, file: String },
    #[error("invalid glob `{pattern}`: {message}")]
    Glob { pattern: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] PmError),
}

/// Runs the extractor selected by `cfg.kind`.
pub fn extract(cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    match cfg.kind {
        ExtractorKind::Osgi => extract_osgi(cfg),
        ExtractorKind::Maven => extract_maven(cfg),
        ExtractorKind::Yarn => extract_yarn(cfg),
        ExtractorKind::GradleJson => ingest_gradle_json(cfg),
    }
}

/// A file under the extraction root.
#[derive(Debug, Clone)]
pub(crate) struct SourceFile {
    pub path: PathBuf,
    /// `/`-separated, relative to the root.
    pub rel: String,
}

impl SourceFile {
    pub fn name(&self) -> &str {
        self.rel.rsplit('/').next().unwrap_or(&self.rel)
    }

    /// Relative directory, empty for files in the root.
    pub fn dir(&self) -> &str {
        self.rel.rsplit_once('/').map(|(d, _)| d).unwrap_or("")
    }
}

fn globset(patterns: &[String]) -> Result<GlobSet, ExtractError> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern)
            .map_err(|e| ExtractError::Glob { pattern: pattern.clone(), message: e.to_string() })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| ExtractError::Glob { pattern: patterns.join(", "), message: e.to_string() })
}

/// All files under the root that pass the include/exclude filters, sorted by
/// relative path.
pub(crate) fn walk(cfg: &ExtractionConfig) -> Result<Vec<SourceFile>, ExtractError> {
    if !cfg.root.is_dir() {
        return Err(ExtractError::RootMissing(cfg.root.clone()));
    }
    let include = globset(&cfg.include)?;
    let exclude = globset(&cfg.exclude)?;
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(&cfg.root).follow_links(false) {
        let entry = entry.map_err(|e| ExtractError::Io {
            path: e.path().map(|p| p.display().to_string()).unwrap_or_default(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = relative(&cfg.root, entry.path());
        if exclude.is_match(&rel) || (!cfg.include.is_empty() && !include.is_match(&rel)) {
            continue;
        }
        files.push(SourceFile { path: entry.path().to_path_buf(), rel });
    }
    files.sort_by(|a, b| a.rel.cmp(&b.rel));
    Ok(files)
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

pub(crate) fn read(file: &SourceFile) -> Result<String, ExtractError> {
    std::fs::read_to_string(&file.path).map_err(|source| ExtractError::Io { path: file.rel.clone(), source })
}

/// Collects instances and links, turning model-level rejections into
/// warnings so one bad reference does not abort an extraction.
pub(crate) struct Builder {
    pm: ProjectModel,
    warnings: Vec<Warning>,
}

impl Builder {
    pub fn new(cfg: &ExtractionConfig) -> Self {
        Self { pm: ProjectModel::new(cfg.arch.clone(), cfg.project_name()), warnings: Vec::new() }
    }

    pub fn warn(&mut self, path: Option<&str>, message: impl Into<String>) {
        self.warnings.push(Warning { path: path.map(str::to_string), message: message.into() });
    }

    pub fn has(&self, id: &str) -> bool {
        self.pm.contains_id(id)
    }

    pub fn type_of(&self, id: &str) -> Option<&str> {
        self.pm.instance(id).map(|i| self.pm.arch().artifact_name(i.artifact()))
    }

    /// Adds an instance unless one with this id exists. Returns false (with a
    /// warning) if the id is taken by another type.
    pub fn ensure(&mut self, artifact: &str, id: &str, display: Option<&str>, origin: Option<&str>) -> bool {
        match self.type_of(id).map(str::to_string) {
            Some(t) if t == artifact => true,
            Some(t) => {
                self.warn(origin, format!("`{id}` is already a {t}, not adding it as a {artifact}"));
                false
            }
            None => {
                self.pm.add_instance(artifact, id, display).expect("type checked by caller");
                true
            }
        }
    }

    /// Like [`ensure`](Self::ensure) for artifacts defined outside the tree.
    pub fn ensure_external(&mut self, artifact: &str, id: &str, origin: Option<&str>) -> bool {
        let display = format!("{EXTERNAL_PREFIX}{id}");
        self.ensure(artifact, id, Some(&display), origin)
    }

    pub fn contain(&mut self, parent: &str, child: &str, origin: Option<&str>) {
        if let Err(e) = self.pm.contain(parent, child) {
            self.warn(origin, e.to_string());
        }
    }

    pub fn connect(&mut self, connection: &str, from: &str, to: &str, origin: Option<&str>) {
        if let Err(e) = self.pm.connect(connection, from, to) {
            self.warn(origin, e.to_string());
        }
    }

    pub fn finish(self) -> Extraction {
        Extraction { pm: self.pm, warnings: self.warnings }
    }
}

/// Fails unless the architecture declares every artifact in `names`.
pub(crate) fn require_artifacts(cfg: &ExtractionConfig, names: &[&str]) -> Result<(), ExtractError> {
    for name in names {
        if cfg.arch.resolve_artifact(name).is_none() {
            return Err(ExtractError::MissingArtifact { kind: cfg.kind, artifact: (*name).to_string() });
        }
    }
    Ok(())
}
