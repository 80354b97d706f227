//! Interactive state of one visualization session.
//!
//! A [`ViewContext`] records, per view, which instances are expanded (or
//! focused) and which edges the user asked to see, plus the global view
//! toggles and id filter. All state changes go through [`Action`]s, each of
//! which pushes one inverse record onto a bounded undo history.
//!
//! Views nest: an expanded instance whose type declares artifact views shows
//! those views filtered to its own scope. A [`ViewPath`] names such a nested
//! view, e.g. `["Features", "f1", "BundleDependencies"]` is the bundle
//! dependencies view inside feature `f1`. State is kept per path, so expanding
//! `b1` inside `f1` does not expand it in the top-level view.

mod action;
mod category;
mod persist;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archmeta::{ArtifactId, ConnectionId};
use crate::projmodel::ProjectModel;
use crate::vizmeta::{CategoryConnection, LinkedView, ValidatedViz, ViewId};

pub use action::{Action, Direction, HISTORY_DEPTH};
pub use category::category_edges;
pub use persist::{restore_vcm, RestoreReport, VcmDocument, VCM_FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestedView {
    pub parent: String,
    pub view: String,
}

/// A top-level view followed by zero or more `(parent instance, artifact
/// view)` steps. Serialized as a flat string list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "ViewPathRepr")]
pub struct ViewPath {
    pub view: String,
    pub nested: Vec<NestedView>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ViewPathRepr {
    Name(String),
    Segments(Vec<String>),
}

impl TryFrom<ViewPathRepr> for ViewPath {
    type Error = String;

    fn try_from(repr: ViewPathRepr) -> Result<Self, String> {
        match repr {
            ViewPathRepr::Name(view) => Ok(ViewPath::root(view)),
            ViewPathRepr::Segments(segments) => {
                if segments.len() % 2 == 0 {
                    return Err("a view path has an odd number of segments: view (parent view)*".into());
                }
                let mut iter = segments.into_iter();
                let view = iter.next().expect("odd length");
                let mut nested = Vec::new();
                while let (Some(parent), Some(view)) = (iter.next(), iter.next()) {
                    nested.push(NestedView { parent, view });
                }
                Ok(ViewPath { view, nested })
            }
        }
    }
}

impl From<ViewPath> for Vec<String> {
    fn from(path: ViewPath) -> Self {
        let mut out = vec![path.view];
        for step in path.nested {
            out.push(step.parent);
            out.push(step.view);
        }
        out
    }
}

impl ViewPath {
    pub fn root(view: impl Into<String>) -> Self {
        Self { view: view.into(), nested: Vec::new() }
    }

    pub fn child(&self, parent: impl Into<String>, view: impl Into<String>) -> Self {
        let mut path = self.clone();
        path.nested.push(NestedView { parent: parent.into(), view: view.into() });
        path
    }

    /// Name of the innermost view.
    pub fn leaf_view(&self) -> &str {
        self.nested.last().map(|n| n.view.as_str()).unwrap_or(&self.view)
    }

    pub fn depth(&self) -> usize {
        self.nested.len()
    }

    /// Instance ids this path passes through.
    pub fn parent_ids(&self) -> impl Iterator<Item = &str> {
        self.nested.iter().map(|n| n.parent.as_str())
    }

    pub fn references(&self, id: &str) -> bool {
        self.parent_ids().any(|p| p == id)
    }
}

impl fmt::Display for ViewPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.view)?;
        for step in &self.nested {
            write!(f, "/{}/{}", step.parent, step.view)?;
        }
        Ok(())
    }
}

/// Non-default state of an instance within one view. Instances without an
/// entry are collapsed. Focus implies expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementState {
    pub expanded: bool,
    pub focused: bool,
}

impl ElementState {
    pub const EXPANDED: ElementState = ElementState { expanded: true, focused: false };
    pub const FOCUSED: ElementState = ElementState { expanded: true, focused: true };
}

/// An edge the user chose to show, oriented source to target of the declared
/// connection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ShownEdge {
    pub view: ViewPath,
    pub connection: String,
    pub source: String,
    pub target: String,
}

/// An edge as rendered. Direct edges have multiplicity 1; category edges
/// aggregate the connections between their categories' contents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeInstance {
    pub connection: String,
    pub source: String,
    pub target: String,
    pub multiplicity: u32,
    pub category: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PortState {
    AllShown,
    MoreAvailable,
}

/// The comparable part of a context; history is excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextState {
    pub elements: BTreeMap<(ViewPath, String), ElementState>,
    pub shown_edges: BTreeSet<ShownEdge>,
    pub view_visibility: BTreeMap<String, bool>,
    pub id_filter: Option<String>,
    pub collapsed_area_visible: bool,
}

impl ContextState {
    fn initial(viz: &ValidatedViz) -> Self {
        Self {
            elements: BTreeMap::new(),
            shown_edges: BTreeSet::new(),
            view_visibility: viz.views().iter().map(|v| (v.name.clone(), true)).collect(),
            id_filter: None,
            collapsed_area_visible: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtxError {
    #[error("project model is for architecture `{pm}` but the visualization expects `{viz}`")]
    ArchitectureMismatch { pm: String, viz: String },
    #[error("unknown instance id `{0}`")]
    UnknownId(String),
    #[error("unknown view `{0}`")]
    UnknownView(String),
    #[error("view `{0}` is hidden")]
    ViewHidden(String),
    #[error("`{parent}` declares no artifact view `{view}`")]
    NoArtifactView { parent: String, view: String },
    #[error("`{id}` is not part of view `{view}`")]
    NotInView { id: String, view: String },
    #[error("unknown connection `{0}`")]
    UnknownConnection(String),
    #[error("connection `{connection}` is not shown in view `{view}`")]
    ConnectionNotInView { connection: String, view: String },
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("malformed view context: {0}")]
    Malformed(String),
    #[error("unsupported view context formatVersion `{0}`")]
    VersionMismatch(String),
    #[error("view context belongs to `{found}`, expected `{expected}`")]
    VisualizationMismatch { found: String, expected: String },
}

/// The instances reachable in a (possibly nested) view.
#[derive(Debug, Clone)]
pub struct Scope {
    pub view: ViewId,
    /// Members in display order: shown types in view order, then instance
    /// insertion order; for nested views, filter order then path-walk order.
    pub members: Vec<String>,
    member_set: HashSet<String>,
}

impl Scope {
    pub fn contains(&self, id: &str) -> bool {
        self.member_set.contains(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VisibleElements {
    pub collapsed: Vec<String>,
    pub expanded: Vec<String>,
    pub edges: Vec<EdgeInstance>,
}

#[derive(Debug, Clone)]
pub struct ViewContext {
    pm: Arc<ProjectModel>,
    viz: Arc<ValidatedViz>,
    state: ContextState,
    history: action::History,
}

impl PartialEq for ViewContext {
    /// Structural equality of the interaction state; history is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state
    }
}

pub fn init_view_context(pm: Arc<ProjectModel>, viz: Arc<ValidatedViz>) -> Result<ViewContext, CtxError> {
    ViewContext::new(pm, viz)
}

impl ViewContext {
    /// Everything collapsed, no edges, every view visible, empty history.
    pub fn new(pm: Arc<ProjectModel>, viz: Arc<ValidatedViz>) -> Result<Self, CtxError> {
        if **pm.arch() != **viz.arch() {
            return Err(CtxError::ArchitectureMismatch {
                pm: pm.arch_name().to_string(),
                viz: viz.arch().model_name().to_string(),
            });
        }
        let state = ContextState::initial(&viz);
        Ok(Self { pm, viz, state, history: action::History::default() })
    }

    pub fn pm(&self) -> &Arc<ProjectModel> {
        &self.pm
    }

    pub fn viz(&self) -> &Arc<ValidatedViz> {
        &self.viz
    }

    pub fn state(&self) -> &ContextState {
        &self.state
    }

    pub fn can_undo(&self) -> bool {
        self.history.can_undo()
    }

    pub fn can_redo(&self) -> bool {
        self.history.can_redo()
    }

    pub fn undo_depth(&self) -> usize {
        self.history.undo_len()
    }

    pub fn redo_depth(&self) -> usize {
        self.history.redo_len()
    }

    pub fn collapsed_area_visible(&self) -> bool {
        self.state.collapsed_area_visible
    }

    pub fn id_filter(&self) -> Option<&str> {
        self.state.id_filter.as_deref()
    }

    pub fn is_view_visible(&self, view: &str) -> bool {
        self.state.view_visibility.get(view).copied().unwrap_or(false)
    }

    pub fn element_state(&self, view: &ViewPath, id: &str) -> Option<ElementState> {
        self.state.elements.get(&(view.clone(), id.to_string())).copied()
    }

    pub fn is_expanded(&self, view: &ViewPath, id: &str) -> bool {
        self.element_state(view, id).is_some_and(|s| s.expanded)
    }

    pub fn shown_edges(&self) -> &BTreeSet<ShownEdge> {
        &self.state.shown_edges
    }

    pub(crate) fn linked_view(&self, name: &str) -> Result<(ViewId, &LinkedView), CtxError> {
        let id = self.viz.view_id(name).ok_or_else(|| CtxError::UnknownView(name.to_string()))?;
        Ok((id, self.viz.view(id)))
    }

    /// Resolves a view path to its scope. Every view on the path must exist
    /// and be visible; every parent must lie in the enclosing scope and
    /// declare the nested artifact view.
    pub fn scope(&self, path: &ViewPath) -> Result<Scope, CtxError> {
        let (root, view) = self.linked_view(&path.view)?;
        if !self.is_view_visible(&path.view) {
            return Err(CtxError::ViewHidden(path.view.clone()));
        }
        let mut members = Vec::new();
        for &artifact in &view.artifacts {
            members.extend(self.pm.instances_of(artifact).map(|i| i.id().to_string()));
        }
        let mut scope = Scope::from_members(root, members);
        for step in &path.nested {
            let parent = self.pm.instance(&step.parent).ok_or_else(|| CtxError::UnknownId(step.parent.clone()))?;
            if !scope.contains(&step.parent) {
                return Err(CtxError::NotInView { id: step.parent.clone(), view: path.to_string() });
            }
            let (view_id, _) = self.linked_view(&step.view)?;
            let artifact_view = self
                .viz
                .artifact_views(parent.artifact())
                .iter()
                .find(|av| av.view == view_id)
                .ok_or_else(|| CtxError::NoArtifactView { parent: step.parent.clone(), view: step.view.clone() })?;
            if !self.is_view_visible(&step.view) {
                return Err(CtxError::ViewHidden(step.view.clone()));
            }
            let mut members = Vec::new();
            let mut seen = HashSet::new();
            for filter in &artifact_view.filters {
                for id in self.walk(&step.parent, &filter.path[1..]) {
                    if seen.insert(id.clone()) {
                        members.push(id);
                    }
                }
            }
            scope = Scope::from_members(view_id, members);
        }
        Ok(scope)
    }

    /// Instances reached from `start` by following containment through each
    /// type of `steps` in turn.
    pub(crate) fn walk(&self, start: &str, steps: &[ArtifactId]) -> Vec<String> {
        let mut frontier = vec![start.to_string()];
        for &ty in steps {
            let mut next = Vec::new();
            let mut seen = HashSet::new();
            for id in &frontier {
                for child in self.pm.children_of(id, ty) {
                    if seen.insert(child.as_str()) {
                        next.push(child.clone());
                    }
                }
            }
            frontier = next;
        }
        frontier
    }

    fn passes_filter(&self, id: &str) -> bool {
        match &self.state.id_filter {
            None => true,
            Some(pattern) => id.to_lowercase().contains(&pattern.to_lowercase()),
        }
    }

    /// Collapsed and expanded members of a view (after the id filter) and the
    /// edges between expanded members.
    pub fn visible_elements(&self, path: &ViewPath) -> Result<VisibleElements, CtxError> {
        let scope = self.scope(path)?;
        let mut out = VisibleElements::default();
        for id in &scope.members {
            if !self.passes_filter(id) {
                continue;
            }
            if self.is_expanded(path, id) {
                out.expanded.push(id.clone());
            } else {
                out.collapsed.push(id.clone());
            }
        }
        let expanded: HashSet<&str> = out.expanded.iter().map(String::as_str).collect();
        for edge in self.edges_in(path) {
            if expanded.contains(edge.source.as_str()) && expanded.contains(edge.target.as_str()) {
                out.edges.push(EdgeInstance {
                    connection: edge.connection.clone(),
                    source: edge.source.clone(),
                    target: edge.target.clone(),
                    multiplicity: 1,
                    category: false,
                });
            }
        }
        let view = self.viz.view(scope.view);
        for decl in &view.categories {
            for edge in category::edges_in_scope(self, &scope, decl) {
                if expanded.contains(edge.source.as_str()) && expanded.contains(edge.target.as_str()) {
                    out.edges.push(edge);
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn edges_in<'a>(&'a self, path: &'a ViewPath) -> impl Iterator<Item = &'a ShownEdge> + 'a {
        self.state.shown_edges.iter().filter(move |e| &e.view == path)
    }

    /// Category connections of the innermost view of `path`.
    pub fn categories(&self, path: &ViewPath) -> Result<&[CategoryConnection], CtxError> {
        let (_, view) = self.linked_view(path.leaf_view())?;
        Ok(&view.categories)
    }

    pub(crate) fn resolve_connection(&self, name: &str) -> Result<ConnectionId, CtxError> {
        self.viz.arch().resolve_connection(name).ok_or_else(|| CtxError::UnknownConnection(name.to_string()))
    }

    /// Neighbours of `id` along a connection and direction, restricted to the
    /// scope.
    pub(crate) fn neighbours(&self, scope: &Scope, id: &str, connection: ConnectionId, direction: Direction) -> Vec<String> {
        let list = match direction {
            Direction::Outgoing => self.pm.targets_of(id, connection),
            Direction::Incoming => self.pm.sources_of(id, connection),
        };
        list.iter().filter(|n| scope.contains(n)).cloned().collect()
    }

    /// Whether every neighbour along `(connection, direction)` already has a
    /// shown edge in this view.
    pub fn port_state(
        &self,
        path: &ViewPath,
        id: &str,
        connection: &str,
        direction: Direction,
    ) -> Result<PortState, CtxError> {
        if !self.pm.contains_id(id) {
            return Err(CtxError::UnknownId(id.to_string()));
        }
        let conn = self.resolve_connection(connection)?;
        let scope = self.scope(path)?;
        let qualified = self.viz.arch().qualified_connection_name(conn);
        let pending = self.neighbours(&scope, id, conn, direction).into_iter().any(|n| {
            let (source, target) = direction.orient(id, &n);
            !self.state.shown_edges.contains(&ShownEdge {
                view: path.clone(),
                connection: qualified.clone(),
                source: source.to_string(),
                target: target.to_string(),
            })
        });
        Ok(if pending { PortState::MoreAvailable } else { PortState::AllShown })
    }

    /// Serializes the interaction state (not the history).
    pub fn export_vcm(&self) -> String {
        persist::export(self)
    }
}

impl Scope {
    fn from_members(view: ViewId, members: Vec<String>) -> Self {
        let member_set = members.iter().cloned().collect();
        Self { view, members, member_set }
    }
}

#[cfg(test)]
pub(crate) mod tests;
