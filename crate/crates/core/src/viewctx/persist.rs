use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CtxError, ElementState, ShownEdge, ViewContext, ViewPath};
use crate::projmodel::ProjectModel;
use crate::vizmeta::ValidatedViz;

pub const VCM_FORMAT_VERSION: &str = "1";

/// Interchange form of a view context. History is not persisted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VcmDocument {
    pub format_version: String,
    pub visualization: String,
    pub architecture: String,
    pub collapsed_area_visible: bool,
    pub id_filter: Option<String>,
    pub views: BTreeMap<String, bool>,
    pub elements: Vec<ElementRecord>,
    pub edges: Vec<ShownEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ElementRecord {
    pub view: ViewPath,
    pub id: String,
    pub focused: bool,
}

/// What a restore had to discard because the project model no longer
/// supports it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RestoreReport {
    /// Instance ids referenced by the document but absent from the model.
    pub dropped_ids: BTreeSet<String>,
    pub dropped_elements: Vec<ElementRecord>,
    pub dropped_edges: Vec<ShownEdge>,
    /// View or connection names the visualization no longer declares.
    pub unknown_names: BTreeSet<String>,
}

impl RestoreReport {
    pub fn is_empty(&self) -> bool {
        self.dropped_elements.is_empty() && self.dropped_edges.is_empty() && self.unknown_names.is_empty()
    }
}

pub(super) fn export(ctx: &ViewContext) -> String {
    let state = ctx.state();
    let doc = VcmDocument {
        format_version: VCM_FORMAT_VERSION.to_string(),
        visualization: ctx.viz().name().to_string(),
        architecture: ctx.viz().arch().model_name().to_string(),
        collapsed_area_visible: state.collapsed_area_visible,
        id_filter: state.id_filter.clone(),
        views: state.view_visibility.clone(),
        elements: state
            .elements
            .iter()
            .map(|((view, id), s)| ElementRecord { view: view.clone(), id: id.clone(), focused: s.focused })
            .collect(),
        edges: state.shown_edges.iter().cloned().collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

/// Rebuilds a context from an exported document against a possibly changed
/// project model. States that mention instances, views or connections the
/// model or visualization no longer has are dropped and reported; everything
/// else is kept as is. Newly added relations are not shown automatically.
pub fn restore_vcm(
    text: &str,
    pm: Arc<ProjectModel>,
    viz: Arc<ValidatedViz>,
) -> Result<(ViewContext, RestoreReport), CtxError> {
    let doc: VcmDocument = serde_json::from_str(text).map_err(|e| CtxError::Malformed(e.to_string()))?;
    if doc.format_version != VCM_FORMAT_VERSION {
        return Err(CtxError::VersionMismatch(doc.format_version));
    }
    if doc.visualization != viz.name() {
        return Err(CtxError::VisualizationMismatch { found: doc.visualization, expected: viz.name().to_string() });
    }
    let mut ctx = ViewContext::new(pm, viz)?;
    let mut report = RestoreReport::default();

    let view_known = |ctx: &ViewContext, report: &mut RestoreReport, path: &ViewPath| -> bool {
        let names = std::iter::once(path.view.as_str()).chain(path.nested.iter().map(|n| n.view.as_str()));
        let mut ok = true;
        for name in names {
            if ctx.viz().view_id(name).is_none() {
                report.unknown_names.insert(name.to_string());
                ok = false;
            }
        }
        ok
    };
    let missing = |ctx: &ViewContext, report: &mut RestoreReport, ids: Vec<&str>| -> bool {
        let mut any = false;
        for id in ids {
            if !ctx.pm().contains_id(id) {
                report.dropped_ids.insert(id.to_string());
                any = true;
            }
        }
        any
    };

    for (view, visible) in &doc.views {
        if ctx.viz().view_id(view).is_some() {
            ctx.state.view_visibility.insert(view.clone(), *visible);
        } else {
            report.unknown_names.insert(view.clone());
        }
    }
    ctx.state.collapsed_area_visible = doc.collapsed_area_visible;
    ctx.state.id_filter = doc.id_filter.filter(|p| !p.is_empty());

    for record in doc.elements {
        let mut ids: Vec<&str> = record.view.parent_ids().collect();
        ids.push(&record.id);
        let known = view_known(&ctx, &mut report, &record.view);
        if missing(&ctx, &mut report, ids) || !known {
            report.dropped_elements.push(record);
            continue;
        }
        let state = if record.focused { ElementState::FOCUSED } else { ElementState::EXPANDED };
        ctx.state.elements.insert((record.view, record.id), state);
    }

    for edge in doc.edges {
        let mut ids: Vec<&str> = edge.view.parent_ids().collect();
        ids.push(&edge.source);
        ids.push(&edge.target);
        let mut known = view_known(&ctx, &mut report, &edge.view);
        let connection = ctx.viz().arch().resolve_connection(&edge.connection);
        if connection.is_none() {
            report.unknown_names.insert(edge.connection.clone());
            known = false;
        }
        if missing(&ctx, &mut report, ids) || !known {
            report.dropped_edges.push(edge);
            continue;
        }
        ctx.state.shown_edges.insert(edge);
    }

    Ok((ctx, report))
}
