use serde::{Deserialize, Serialize};

use super::color::Hsl;
use super::layout::{LaidOutDiagram, Point, Rect};
use super::NodeKind;
use crate::viewctx::{Direction, PortState, ViewPath};

pub const DIAGRAM_FORMAT_VERSION: &str = "1";

/// The structured diagram consumed by the web front end: the laid-out node
/// tree plus the handles needed to turn gestures back into actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramDocument {
    pub format_version: String,
    pub view: String,
    pub width: f64,
    pub height: f64,
    pub nodes: Vec<DocNode>,
    pub ports: Vec<DocPort>,
    pub edges: Vec<DocEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    /// Qualified artifact type of element nodes.
    #[serde(rename = "type")]
    pub artifact_type: Option<String>,
    pub parent: Option<String>,
    pub children: Vec<String>,
    #[serde(flatten)]
    pub rect: Rect,
    pub fill: Option<Hsl>,
    pub focused: bool,
    /// View path the node lives in (areas and view containers: the view they
    /// show).
    pub view: ViewPath,
    /// Instance id, the target of element actions.
    pub instance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocPort {
    pub id: String,
    pub node: String,
    pub connection: String,
    pub direction: Direction,
    pub state: PortState,
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocEdge {
    pub id: String,
    pub source_port: String,
    pub target_port: String,
    pub connection: String,
    pub multiplicity: u32,
    pub category: bool,
    pub stroke_width: f64,
    pub points: Vec<Point>,
}

fn node_id(i: usize) -> String {
    format!("n{i}")
}

fn port_id(i: usize) -> String {
    format!("p{i}")
}

pub fn render_doc(d: &LaidOutDiagram) -> DiagramDocument {
    let g = &d.graph;
    let nodes = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| DocNode {
            id: node_id(i),
            kind: n.kind,
            label: n.label.clone(),
            artifact_type: n.artifact.map(|a| g.arch.qualified_artifact_name(a)),
            parent: n.parent.map(node_id),
            children: n.children.iter().copied().map(node_id).collect(),
            rect: d.nodes[i].rect,
            fill: d.nodes[i].fill,
            focused: n.focused,
            view: n.view.clone(),
            instance: n.instance.clone(),
        })
        .collect();
    let ports = g
        .ports
        .iter()
        .enumerate()
        .map(|(i, p)| DocPort {
            id: port_id(i),
            node: node_id(p.node),
            connection: p.connection.clone(),
            direction: p.direction,
            state: p.state,
            x: d.ports[i].x,
            y: d.ports[i].y,
            size: d.config.port_size,
        })
        .collect();
    let edges = g
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| DocEdge {
            id: format!("e{i}"),
            source_port: port_id(e.source_port),
            target_port: port_id(e.target_port),
            connection: e.connection.clone(),
            multiplicity: e.multiplicity,
            category: e.category,
            stroke_width: d.edges[i].stroke_width,
            points: d.edges[i].points.clone(),
        })
        .collect();
    DiagramDocument {
        format_version: DIAGRAM_FORMAT_VERSION.to_string(),
        view: g.view.clone(),
        width: d.width,
        height: d.height,
        nodes,
        ports,
        edges,
    }
}
