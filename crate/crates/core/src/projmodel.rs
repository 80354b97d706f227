//! Project models: typed artifact instances conforming to an architecture,
//! with containment and connection lists navigable in both directions.
//!
//! The in-memory [`ProjectModel`] can only be built through methods that keep
//! it conforming, so [`ProjectModel::validate`] on a built model finds nothing
//! unless the reverse index was damaged. Hand-edited or foreign interchange
//! files are checked at the document level by [`validate_document`] before
//! [`load_pm`] builds a model from them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archmeta::{ArtifactId, ConnectionId, ValidatedArchitecture};

pub const FORMAT_VERSION: &str = "1";

/// A declared relation between artifact types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Containment { parent: ArtifactId, child: ArtifactId },
    Connection(ConnectionId),
}

impl Relation {
    /// `Feature contains Bundle` for a containment, `Bundle.Dependency` for a
    /// connection.
    pub fn describe(&self, arch: &ValidatedArchitecture) -> String {
        match *self {
            Relation::Containment { parent, child } => {
                format!("{} contains {}", arch.artifact_name(parent), arch.artifact_name(child))
            }
            Relation::Connection(c) => format!("{}.{}", arch.artifact_name(c.owner), arch.connection_name(c)),
        }
    }

    fn source_type(&self) -> ArtifactId {
        match *self {
            Relation::Containment { parent, .. } => parent,
            Relation::Connection(c) => c.owner,
        }
    }

    fn target_type(&self, arch: &ValidatedArchitecture) -> ArtifactId {
        match *self {
            Relation::Containment { child, .. } => child,
            Relation::Connection(c) => arch.connection_target(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactInstance {
    id: String,
    display_name: String,
    artifact: ArtifactId,
    /// One ordered id list per containment declared on the artifact type.
    children: Vec<Vec<String>>,
    /// One ordered id list per connection declared on the artifact type.
    targets: Vec<Vec<String>>,
}

impl ArtifactInstance {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn artifact(&self) -> ArtifactId {
        self.artifact
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmError {
    #[error("duplicate instance id `{0}`")]
    DuplicateId(String),
    #[error("undeclared artifact type `{0}`")]
    UndeclaredType(String),
    #[error("unknown instance id `{0}`")]
    UnknownId(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("type mismatch for {relation}: `{id}` is a {actual}, expected {expected}")]
    TypeMismatch { relation: String, id: String, actual: String, expected: String },
    #[error("{line}:{column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("project model does not conform:\n{0}")]
    Nonconforming(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub instance: String,
    pub relation: Option<String>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.relation {
            Some(rel) => write!(f, "{} [{}]: {}", self.instance, rel, self.message),
            None => write!(f, "{}: {}", self.instance, self.message),
        }
    }
}

/// Conformance findings. Empty iff the model conforms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, instance: &str, relation: Option<String>, message: impl Into<String>) {
        self.errors.push(Finding { instance: instance.to_string(), relation, message: message.into() });
    }

    fn warning(&mut self, instance: &str, relation: Option<String>, message: impl Into<String>) {
        self.warnings.push(Finding { instance: instance.to_string(), relation, message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Reverse navigation: for a target instance, the sources per relation.
type ReverseIndex = HashMap<String, BTreeMap<Relation, Vec<String>>>;

#[derive(Debug, Clone)]
pub struct ProjectModel {
    arch: Arc<ValidatedArchitecture>,
    project_name: String,
    instances: Vec<ArtifactInstance>,
    by_id: HashMap<String, usize>,
    collections: Vec<Vec<usize>>,
    reverse: ReverseIndex,
}

impl PartialEq for ProjectModel {
    fn eq(&self, other: &Self) -> bool {
        self.project_name == other.project_name
            && self.arch.model_name() == other.arch.model_name()
            && self.instances == other.instances
    }
}

impl ProjectModel {
    /// An empty model with one (empty) collection per declared artifact type.
    pub fn new(arch: Arc<ValidatedArchitecture>, project_name: impl Into<String>) -> Self {
        let collections = vec![Vec::new(); arch.artifact_count()];
        Self {
            arch,
            project_name: project_name.into(),
            instances: Vec::new(),
            by_id: HashMap::new(),
            collections,
            reverse: HashMap::new(),
        }
    }

    pub fn arch(&self) -> &Arc<ValidatedArchitecture> {
        &self.arch
    }

    pub fn project_name(&self) -> &str {
        &self.project_name
    }

    pub fn arch_name(&self) -> &str {
        self.arch.model_name()
    }

    /// Ends construction; the shared model is immutable.
    pub fn freeze(self) -> Arc<ProjectModel> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn collection_count(&self) -> usize {
        self.collections.len()
    }

    /// All instances in insertion order.
    pub fn instances(&self) -> impl Iterator<Item = &ArtifactInstance> {
        self.instances.iter()
    }

    /// Instances of one artifact type in insertion order.
    pub fn instances_of(&self, artifact: ArtifactId) -> impl Iterator<Item = &ArtifactInstance> {
        self.collections[artifact.0].iter().map(|&i| &self.instances[i])
    }

    pub fn collection_sizes(&self) -> BTreeMap<String, usize> {
        self.arch
            .artifact_ids()
            .map(|a| (self.arch.artifact_name(a).to_string(), self.collections[a.0].len()))
            .collect()
    }

    pub fn instance(&self, id: &str) -> Option<&ArtifactInstance> {
        self.by_id.get(id).map(|&i| &self.instances[i])
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn add_instance(
        &mut self,
        artifact_type: &str,
        id: impl Into<String>,
        display_name: Option<&str>,
    ) -> Result<&ArtifactInstance, PmError> {
        let artifact = self
            .arch
            .resolve_artifact(artifact_type)
            .ok_or_else(|| PmError::UndeclaredType(artifact_type.to_string()))?;
        self.insert(artifact, id.into(), display_name.map(str::to_string))
    }

    fn insert(
        &mut self,
        artifact: ArtifactId,
        id: String,
        display_name: Option<String>,
    ) -> Result<&ArtifactInstance, PmError> {
        if self.by_id.contains_key(&id) {
            return Err(PmError::DuplicateId(id));
        }
        let index = self.instances.len();
        let instance = ArtifactInstance {
            display_name: display_name.unwrap_or_else(|| id.clone()),
            id: id.clone(),
            artifact,
            children: vec![Vec::new(); self.arch.children(artifact).len()],
            targets: vec![Vec::new(); self.arch.connections(artifact).count()],
        };
        self.instances.push(instance);
        self.by_id.insert(id, index);
        self.collections[artifact.0].push(index);
        Ok(&self.instances[index])
    }

    /// Resolves `Parent contains Child` by type names.
    pub fn containment(&self, parent: &str, child: &str) -> Result<Relation, PmError> {
        let unknown = || PmError::UnknownRelation(format!("{parent} contains {child}"));
        let parent = self.arch.resolve_artifact(parent).ok_or_else(unknown)?;
        let child = self.arch.resolve_artifact(child).ok_or_else(unknown)?;
        if !self.arch.contains(parent, child) {
            return Err(unknown());
        }
        Ok(Relation::Containment { parent, child })
    }

    /// Resolves `Artifact.Connection` (optionally model-qualified).
    pub fn connection(&self, qualified: &str) -> Result<Relation, PmError> {
        self.arch
            .resolve_connection(qualified)
            .map(Relation::Connection)
            .ok_or_else(|| PmError::UnknownRelation(qualified.to_string()))
    }

    /// Adds `to` to `from`'s list for `relation` and updates the reverse
    /// index. Returns false if the link already existed.
    pub fn link(&mut self, relation: Relation, from: &str, to: &str) -> Result<bool, PmError> {
        let &from_index = self.by_id.get(from).ok_or_else(|| PmError::UnknownId(from.to_string()))?;
        let &to_index = self.by_id.get(to).ok_or_else(|| PmError::UnknownId(to.to_string()))?;
        let expected_source = relation.source_type();
        let expected_target = relation.target_type(&self.arch);
        for (id, index, expected) in [(from, from_index, expected_source), (to, to_index, expected_target)] {
            let actual = self.instances[index].artifact;
            if actual != expected {
                return Err(PmError::TypeMismatch {
                    relation: relation.describe(&self.arch),
                    id: id.to_string(),
                    actual: self.arch.artifact_name(actual).to_string(),
                    expected: self.arch.artifact_name(expected).to_string(),
                });
            }
        }
        let list = self.forward_list_mut(from_index, relation);
        if list.iter().any(|t| t == to) {
            return Ok(false);
        }
        list.push(to.to_string());
        self.reverse.entry(to.to_string()).or_default().entry(relation).or_default().push(from.to_string());
        Ok(true)
    }

    /// Containment link with the relation inferred from the two instance types.
    pub fn contain(&mut self, parent: &str, child: &str) -> Result<bool, PmError> {
        let p = self.instance(parent).ok_or_else(|| PmError::UnknownId(parent.to_string()))?.artifact;
        let c = self.instance(child).ok_or_else(|| PmError::UnknownId(child.to_string()))?.artifact;
        if !self.arch.contains(p, c) {
            return Err(PmError::UnknownRelation(format!(
                "{} contains {}",
                self.arch.artifact_name(p),
                self.arch.artifact_name(c)
            )));
        }
        self.link(Relation::Containment { parent: p, child: c }, parent, child)
    }

    /// Connection link. A bare connection name is resolved on the source's
    /// type; a dotted one (`Bundle.Dependency`, `OSGi.Bundle.Dependency`) is
    /// resolved globally and type-checked.
    pub fn connect(&mut self, connection: &str, from: &str, to: &str) -> Result<bool, PmError> {
        let owner = self.instance(from).ok_or_else(|| PmError::UnknownId(from.to_string()))?.artifact;
        let conn = if connection.contains('.') {
            self.arch.resolve_connection(connection).ok_or_else(|| PmError::UnknownRelation(connection.to_string()))?
        } else {
            self.arch.connection(owner, connection).ok_or_else(|| {
                PmError::UnknownRelation(format!("{}.{}", self.arch.artifact_name(owner), connection))
            })?
        };
        self.link(Relation::Connection(conn), from, to)
    }

    fn forward_list_mut(&mut self, index: usize, relation: Relation) -> &mut Vec<String> {
        let instance = &mut self.instances[index];
        match relation {
            Relation::Containment { parent, child } => {
                let slot = self.arch.containment_slot(parent, child).expect("checked by caller");
                &mut instance.children[slot]
            }
            Relation::Connection(c) => &mut instance.targets[c.index],
        }
    }

    /// Forward navigation along `relation` from `id`.
    pub fn forward(&self, id: &str, relation: Relation) -> &[String] {
        let Some(instance) = self.instance(id) else { return &[] };
        match relation {
            Relation::Containment { parent, child } if instance.artifact == parent => self
                .arch
                .containment_slot(parent, child)
                .map(|slot| instance.children[slot].as_slice())
                .unwrap_or(&[]),
            Relation::Connection(c) if instance.artifact == c.owner => &instance.targets[c.index],
            _ => &[],
        }
    }

    /// Reverse navigation: instances whose `relation` list holds `id`.
    pub fn reverse(&self, id: &str, relation: Relation) -> &[String] {
        self.reverse.get(id).and_then(|m| m.get(&relation)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Children of `id` of the given type.
    pub fn children_of(&self, id: &str, child: ArtifactId) -> &[String] {
        match self.instance(id) {
            Some(inst) => self.forward(id, Relation::Containment { parent: inst.artifact, child }),
            None => &[],
        }
    }

    pub fn targets_of(&self, id: &str, connection: ConnectionId) -> &[String] {
        self.forward(id, Relation::Connection(connection))
    }

    pub fn sources_of(&self, id: &str, connection: ConnectionId) -> &[String] {
        self.reverse(id, Relation::Connection(connection))
    }

    pub fn parents_of(&self, id: &str, parent: ArtifactId) -> &[String] {
        match self.instance(id) {
            Some(inst) => self.reverse(id, Relation::Containment { parent, child: inst.artifact }),
            None => &[],
        }
    }

    /// Every relation list of an instance, as `(relation, targets)`.
    pub fn relations_of<'a>(&'a self, instance: &'a ArtifactInstance) -> impl Iterator<Item = (Relation, &'a [String])> + 'a {
        let parent = instance.artifact;
        let contains = self.arch.children(parent).iter().enumerate().map(move |(slot, &child)| {
            (Relation::Containment { parent, child }, instance.children[slot].as_slice())
        });
        let connects = self
            .arch
            .connections(parent)
            .map(move |c| (Relation::Connection(c), instance.targets[c.index].as_slice()));
        contains.chain(connects)
    }

    /// Number of (containment, connection) links.
    pub fn link_counts(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        for instance in &self.instances {
            counts.0 += instance.children.iter().map(Vec::len).sum::<usize>();
            counts.1 += instance.targets.iter().map(Vec::len).sum::<usize>();
        }
        counts
    }

    /// Removes an instance together with every link to or from it.
    pub fn remove_instance(&mut self, id: &str) -> Result<(), PmError> {
        let &index = self.by_id.get(id).ok_or_else(|| PmError::UnknownId(id.to_string()))?;
        self.instances.remove(index);
        for instance in &mut self.instances {
            for list in instance.children.iter_mut().chain(instance.targets.iter_mut()) {
                list.retain(|t| t != id);
            }
        }
        self.reindex();
        Ok(())
    }

    fn reindex(&mut self) {
        self.by_id.clear();
        for c in &mut self.collections {
            c.clear();
        }
        for (i, instance) in self.instances.iter().enumerate() {
            self.by_id.insert(instance.id.clone(), i);
            self.collections[instance.artifact.0].push(i);
        }
        self.reverse = self.rebuild_reverse();
    }

    fn rebuild_reverse(&self) -> ReverseIndex {
        let mut reverse: ReverseIndex = HashMap::new();
        for instance in &self.instances {
            for (relation, targets) in self.relations_of(instance) {
                for t in targets {
                    reverse.entry(t.clone()).or_default().entry(relation).or_default().push(instance.id.clone());
                }
            }
        }
        reverse
    }

    /// Checks every forward reference and the consistency of the reverse
    /// index against one rebuilt from scratch.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for instance in &self.instances {
            for (relation, targets) in self.relations_of(instance) {
                let expected = relation.target_type(&self.arch);
                for t in targets {
                    match self.instance(t) {
                        None => report.error(
                            &instance.id,
                            Some(relation.describe(&self.arch)),
                            format!("dangling reference to `{t}`"),
                        ),
                        Some(target) if target.artifact != expected => report.error(
                            &instance.id,
                            Some(relation.describe(&self.arch)),
                            format!(
                                "`{t}` is a {}, expected {}",
                                self.arch.artifact_name(target.artifact),
                                self.arch.artifact_name(expected)
                            ),
                        ),
                        Some(_) => {}
                    }
                }
            }
        }
        let rebuilt = self.rebuild_reverse();
        let mut ids: Vec<&String> = rebuilt.keys().chain(self.reverse.keys()).collect();
        ids.sort();
        ids.dedup();
        for id in ids {
            let empty = BTreeMap::new();
            let have = self.reverse.get(id).unwrap_or(&empty);
            let want = rebuilt.get(id).unwrap_or(&empty);
            let mut relations: Vec<&Relation> = have.keys().chain(want.keys()).collect();
            relations.sort();
            relations.dedup();
            for relation in relations {
                let mut h = have.get(relation).cloned().unwrap_or_default();
                let mut w = want.get(relation).cloned().unwrap_or_default();
                h.sort();
                w.sort();
                if h != w {
                    report.error(
                        id,
                        Some(relation.describe(&self.arch)),
                        format!("reverse index lists {h:?}, forward lists imply {w:?}"),
                    );
                }
            }
        }
        report
    }

    #[doc(hidden)]
    pub fn corrupt_reverse_index_for_tests(&mut self, target: &str, relation: Relation, bogus_source: &str) {
        self.reverse.entry(target.to_string()).or_default().entry(relation).or_default().push(bogus_source.to_string());
    }

    pub fn to_document(&self) -> ProjectDocument {
        let instances = self
            .instances
            .iter()
            .map(|inst| {
                let mut contains = BTreeMap::new();
                let mut connects = BTreeMap::new();
                for (relation, targets) in self.relations_of(inst) {
                    if targets.is_empty() {
                        continue;
                    }
                    match relation {
                        Relation::Containment { child, .. } => {
                            contains.insert(self.arch.artifact_name(child).to_string(), targets.to_vec());
                        }
                        Relation::Connection(c) => {
                            connects.insert(self.arch.connection_name(c).to_string(), targets.to_vec());
                        }
                    }
                }
                InstanceDocument {
                    id: inst.id.clone(),
                    artifact_type: self.arch.artifact_name(inst.artifact).to_string(),
                    name: inst.display_name.clone(),
                    contains,
                    connects,
                }
            })
            .collect();
        ProjectDocument {
            format_version: FORMAT_VERSION.to_string(),
            architecture: self.arch.model_name().to_string(),
            project: self.project_name.clone(),
            instances,
        }
    }
}

/// The `.spvizpm.json` interchange document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ProjectDocument {
    pub format_version: String,
    pub architecture: String,
    pub project: String,
    pub instances: Vec<InstanceDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub id: String,
    #[serde(rename = "type")]
    pub artifact_type: String,
    pub name: String,
    /// Child ids keyed by contained artifact type.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub contains: BTreeMap<String, Vec<String>>,
    /// Target ids keyed by connection name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub connects: BTreeMap<String, Vec<String>>,
}

impl ProjectDocument {
    pub fn parse(text: &str) -> Result<Self, PmError> {
        serde_json::from_str(text).map_err(|e| PmError::Malformed {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Canonical text: fixed key order, two-space indent, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }
}

/// Conformance of an interchange document against an architecture.
pub fn validate_document(doc: &ProjectDocument, arch: &ValidatedArchitecture) -> ValidationReport {
    let mut report = ValidationReport::default();
    if doc.format_version != FORMAT_VERSION {
        report.error("", None, format!("unsupported formatVersion `{}`", doc.format_version));
    }
    if doc.architecture != arch.model_name() {
        report.error(
            "",
            None,
            format!("document is for architecture `{}`, expected `{}`", doc.architecture, arch.model_name()),
        );
    }

    let mut types: HashMap<&str, Option<ArtifactId>> = HashMap::new();
    for inst in &doc.instances {
        let ty = arch.resolve_artifact(&inst.artifact_type);
        if ty.is_none() {
            report.error(&inst.id, None, format!("undeclared artifact type `{}`", inst.artifact_type));
        }
        if types.insert(inst.id.as_str(), ty).is_some() {
            report.error(&inst.id, None, "duplicate instance id");
        }
    }

    for inst in &doc.instances {
        let Some(Some(ty)) = types.get(inst.id.as_str()).copied() else { continue };
        for (child_name, targets) in &inst.contains {
            let relation = format!("{} contains {}", arch.artifact_name(ty), child_name);
            match arch.artifact_id(child_name).filter(|&c| arch.contains(ty, c)) {
                Some(child) => check_targets(&mut report, arch, &types, &inst.id, relation, child, targets),
                None => report.error(&inst.id, Some(relation), "containment not declared by the architecture"),
            }
        }
        for (conn_name, targets) in &inst.connects {
            let relation = format!("{}.{}", arch.artifact_name(ty), conn_name);
            match arch.connection(ty, conn_name) {
                Some(conn) => {
                    check_targets(&mut report, arch, &types, &inst.id, relation, arch.connection_target(conn), targets)
                }
                None => report.error(&inst.id, Some(relation), "connection not declared by the architecture"),
            }
        }
    }
    report
}

fn check_targets(
    report: &mut ValidationReport,
    arch: &ValidatedArchitecture,
    types: &HashMap<&str, Option<ArtifactId>>,
    source: &str,
    relation: String,
    expected: ArtifactId,
    targets: &[String],
) {
    let mut seen = HashSet::new();
    for t in targets {
        if !seen.insert(t.as_str()) {
            report.warning(source, Some(relation.clone()), format!("duplicate reference to `{t}`"));
            continue;
        }
        match types.get(t.as_str()) {
            None => report.error(source, Some(relation.clone()), format!("dangling reference to `{t}`")),
            Some(Some(actual)) if *actual != expected => report.error(
                source,
                Some(relation.clone()),
                format!("`{t}` is a {}, expected {}", arch.artifact_name(*actual), arch.artifact_name(expected)),
            ),
            Some(_) => {}
        }
    }
}

/// Builds a model from a conforming document. Duplicate references are
/// dropped.
pub fn from_document(doc: &ProjectDocument, arch: Arc<ValidatedArchitecture>) -> Result<ProjectModel, PmError> {
    let report = validate_document(doc, &arch);
    if !report.is_clean() {
        return Err(PmError::Nonconforming(report));
    }
    let mut pm = ProjectModel::new(arch, doc.project.clone());
    for inst in &doc.instances {
        let ty = pm.arch.artifact_id(&inst.artifact_type).expect("validated");
        pm.insert(ty, inst.id.clone(), Some(inst.name.clone()))?;
    }
    for inst in &doc.instances {
        let ty = pm.arch.artifact_id(&inst.artifact_type).expect("validated");
        for (child_name, targets) in &inst.contains {
            let child = pm.arch.artifact_id(child_name).expect("validated");
            for t in targets {
                pm.link(Relation::Containment { parent: ty, child }, &inst.id, t)?;
            }
        }
        for (conn_name, targets) in &inst.connects {
            let conn = pm.arch.connection(ty, conn_name).expect("validated");
            for t in targets {
                pm.link(Relation::Connection(conn), &inst.id, t)?;
            }
        }
    }
    Ok(pm)
}

pub fn save_pm(pm: &ProjectModel) -> String {
    pm.to_document().to_canonical_string()
}

pub fn load_pm(text: &str, arch: Arc<ValidatedArchitecture>) -> Result<ProjectModel, PmError> {
    from_document(&ProjectDocument::parse(text)?, arch)
}

pub fn validate_pm(pm: &ProjectModel) -> ValidationReport {
    pm.validate()
}
