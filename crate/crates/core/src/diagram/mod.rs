//! From a view context to pictures.
//!
//! [`synthesize`] builds the nested node tree for one top-level view,
//! [`layout()`] assigns coordinates, and [`render_svg`] / [`render_doc`] emit
//! the standalone SVG and the JSON document consumed by the web front end.
//!
//! Every view is drawn as two stacked areas: collapsed instances packed in
//! rows on top, expanded instances with their edges laid out in layers below.
//! Expanded instances whose type declares artifact views contain one view
//! container per artifact view, each again holding two areas.

mod color;
mod doc;
mod layered;
mod layout;
mod svg;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::archmeta::ValidatedArchitecture;
use crate::viewctx::{CtxError, Direction, PortState, ViewContext, ViewPath};

pub use color::{assign_colors, assign_colors_with, hue, ColorAssignment, ColorConfig, Hsl, GOLDEN_FRACTION};
pub use doc::{render_doc, DiagramDocument, DIAGRAM_FORMAT_VERSION};
pub use layered::{layered_layout, LayeredLayout};
pub use layout::{layout, stroke_width, LaidOutDiagram, LayoutConfig, Point, Rect};
pub use svg::render_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Root,
    CollapsedArea,
    ExpandedArea,
    Collapsed,
    Expanded,
    ViewContainer,
}

impl NodeKind {
    pub fn is_area(self) -> bool {
        matches!(self, NodeKind::CollapsedArea | NodeKind::ExpandedArea)
    }

    pub fn is_element(self) -> bool {
        matches!(self, NodeKind::Collapsed | NodeKind::Expanded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    /// The view this node belongs to; for view containers and areas, the
    /// view they show.
    pub view: ViewPath,
    /// Instance id for element nodes.
    pub instance: Option<String>,
    pub artifact: Option<crate::archmeta::ArtifactId>,
    pub focused: bool,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub ports: Vec<usize>,
    /// Nesting depth counting elements and view containers only.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub node: usize,
    pub connection: String,
    pub direction: Direction,
    pub state: PortState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source_port: usize,
    pub target_port: usize,
    /// The expanded area the edge is drawn in.
    pub area: usize,
    pub connection: String,
    pub multiplicity: u32,
    pub category: bool,
}

/// Node tree of one top-level view. Nodes are stored in pre-order, so every
/// child has a larger index than its parent; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramGraph {
    pub view: String,
    pub arch: Arc<ValidatedArchitecture>,
    pub nodes: Vec<Node>,
    pub ports: Vec<Port>,
    pub edges: Vec<Edge>,
}

impl DiagramGraph {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Deepest semantic nesting level.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn area(&self, parent: usize, kind: NodeKind) -> Option<usize> {
        self.nodes[parent].children.iter().copied().find(|&c| self.nodes[c].kind == kind)
    }

    /// Element node for `instance` directly inside the areas of `parent`.
    pub fn element(&self, parent: usize, instance: &str) -> Option<usize> {
        self.nodes[parent]
            .children
            .iter()
            .flat_map(|&area| self.nodes[area].children.iter().copied())
            .find(|&n| self.nodes[n].instance.as_deref() == Some(instance))
    }
}

/// Builds the node tree for the top-level view `view`.
pub fn synthesize(ctx: &ViewContext, view: &str) -> Result<DiagramGraph, CtxError> {
    let path = ViewPath::root(view);
    ctx.scope(&path)?;
    let graph = DiagramGraph {
        view: view.to_string(),
        arch: ctx.viz().arch().clone(),
        nodes: Vec::new(),
        ports: Vec::new(),
        edges: Vec::new(),
    };
    let mut synth = Synth { ctx, graph, port_index: HashMap::new() };
    let root = synth.node(None, NodeKind::Root, view.to_string(), path.clone(), 0);
    synth.view_body(root, &path, 0)?;
    Ok(synth.graph)
}

struct Synth<'a> {
    ctx: &'a ViewContext,
    graph: DiagramGraph,
    port_index: HashMap<(usize, String, Direction), usize>,
}

impl Synth<'_> {
    fn node(&mut self, parent: Option<usize>, kind: NodeKind, label: String, view: ViewPath, depth: usize) -> usize {
        let index = self.graph.nodes.len();
        self.graph.nodes.push(Node {
            kind,
            label,
            view,
            instance: None,
            artifact: None,
            focused: false,
            parent,
            children: Vec::new(),
            ports: Vec::new(),
            depth,
        });
        if let Some(p) = parent {
            self.graph.nodes[p].children.push(index);
        }
        index
    }

    fn element(&mut self, area: usize, path: &ViewPath, id: &str, kind: NodeKind, depth: usize) -> usize {
        let pm = self.ctx.pm();
        let instance = pm.instance(id).expect("scope members exist");
        let node = self.node(Some(area), kind, instance.display_name().to_string(), path.clone(), depth);
        let n = &mut self.graph.nodes[node];
        n.instance = Some(id.to_string());
        n.artifact = Some(instance.artifact());
        n.focused = self.ctx.element_state(path, id).is_some_and(|s| s.focused);
        node
    }

    fn port(&mut self, node: usize, connection: &str, direction: Direction, state: PortState) -> usize {
        let key = (node, connection.to_string(), direction);
        if let Some(&p) = self.port_index.get(&key) {
            return p;
        }
        let index = self.graph.ports.len();
        self.graph.ports.push(Port { node, connection: connection.to_string(), direction, state });
        self.graph.nodes[node].ports.push(index);
        self.port_index.insert(key, index);
        index
    }

    /// Areas, elements, ports and edges of the view at `path` inside
    /// `container`.
    fn view_body(&mut self, container: usize, path: &ViewPath, depth: usize) -> Result<(), CtxError> {
        let ctx = self.ctx;
        let visible = ctx.visible_elements(path)?;
        if ctx.collapsed_area_visible() {
            let area = self.node(Some(container), NodeKind::CollapsedArea, String::new(), path.clone(), depth);
            for id in &visible.collapsed {
                self.element(area, path, id, NodeKind::Collapsed, depth + 1);
            }
        }
        let area = self.node(Some(container), NodeKind::ExpandedArea, String::new(), path.clone(), depth);
        let arch = ctx.viz().arch().clone();
        let view_id = ctx.viz().view_id(path.leaf_view()).expect("scope resolved");
        let linked = ctx.viz().view(view_id).clone();
        let mut by_id = HashMap::new();
        for id in &visible.expanded {
            let node = self.element(area, path, id, NodeKind::Expanded, depth + 1);
            by_id.insert(id.clone(), node);
            let artifact = self.graph.nodes[node].artifact.expect("element");
            for &conn in &linked.connections {
                let name = arch.qualified_connection_name(conn);
                for (direction, fits) in [
                    (Direction::Incoming, arch.connection_target(conn) == artifact),
                    (Direction::Outgoing, conn.owner == artifact),
                ] {
                    if fits {
                        let state = ctx.port_state(path, id, &name, direction)?;
                        self.port(node, &name, direction, state);
                    }
                }
            }
            for category in &linked.categories {
                if category.chain[0] == artifact {
                    let name = arch.qualified_connection_name(category.connection);
                    self.port(node, &name, Direction::Incoming, PortState::AllShown);
                    self.port(node, &name, Direction::Outgoing, PortState::AllShown);
                }
            }
            for av in ctx.viz().artifact_views(artifact) {
                let view_name = ctx.viz().view(av.view).name.clone();
                if !ctx.is_view_visible(&view_name) {
                    continue;
                }
                let inner = path.child(id.clone(), view_name.clone());
                let holder = self.node(Some(node), NodeKind::ViewContainer, view_name, inner.clone(), depth + 2);
                self.view_body(holder, &inner, depth + 2)?;
            }
        }
        for edge in &visible.edges {
            let (source, target) = (by_id[&edge.source], by_id[&edge.target]);
            let source_port = self.port(source, &edge.connection, Direction::Outgoing, PortState::AllShown);
            let target_port = self.port(target, &edge.connection, Direction::Incoming, PortState::AllShown);
            self.graph.edges.push(Edge {
                source_port,
                target_port,
                area,
                connection: edge.connection.clone(),
                multiplicity: edge.multiplicity,
                category: edge.category,
            });
        }
        Ok(())
    }
}
