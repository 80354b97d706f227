use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::color::{assign_colors_with, ColorConfig, Hsl};
use super::layered::layered_layout;
use super::{DiagramGraph, NodeKind};
use crate::viewctx::Direction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// Collapsed elements wrap to a new row past this width.
    pub max_row_width: f64,
    /// Inner margin of every container.
    pub padding: f64,
    /// Space between siblings.
    pub gap: f64,
    /// Horizontal space between layers of an expanded area.
    pub layer_gap: f64,
    /// Height reserved for the label of containers.
    pub header: f64,
    pub node_height: f64,
    pub min_node_width: f64,
    /// Approximate advance of one label character.
    pub char_width: f64,
    pub font_size: f64,
    pub port_size: f64,
    pub colors: ColorConfig,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            max_row_width: 600.0,
            padding: 8.0,
            gap: 12.0,
            layer_gap: 48.0,
            header: 22.0,
            node_height: 30.0,
            min_node_width: 48.0,
            char_width: 7.0,
            font_size: 12.0,
            port_size: 6.0,
            colors: ColorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    /// Whether `inner` fits into this rectangle shrunk by `margin` on every
    /// side.
    pub fn encloses(&self, inner: &Rect, margin: f64) -> bool {
        const EPS: f64 = 1e-9;
        inner.x >= self.x + margin - EPS
            && inner.y >= self.y + margin - EPS
            && inner.right() <= self.right() - margin + EPS
            && inner.bottom() <= self.bottom() - margin + EPS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout {
    pub rect: Rect,
    pub fill: Option<Hsl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLayout {
    pub points: Vec<Point>,
    pub stroke_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaidOutDiagram {
    pub graph: DiagramGraph,
    pub config: LayoutConfig,
    pub nodes: Vec<NodeLayout>,
    /// Port centers.
    pub ports: Vec<Point>,
    pub edges: Vec<EdgeLayout>,
    pub width: f64,
    pub height: f64,
}

pub fn stroke_width(multiplicity: u32) -> f64 {
    1.0 + f64::from(multiplicity.max(1)).ln()
}

/// Computes node rectangles bottom-up: each container is sized from the
/// layout of its children plus padding, then positions are made absolute.
pub fn layout(graph: &DiagramGraph, cfg: &LayoutConfig) -> LaidOutDiagram {
    let n = graph.nodes.len();
    let p = cfg.padding;
    let mut size = vec![(0.0f64, 0.0f64); n];
    let mut rel = vec![(0.0f64, 0.0f64); n];
    let mut bends: HashMap<usize, Vec<(f64, f64)>> = HashMap::new();
    let label_width = |label: &str| label.chars().count() as f64 * cfg.char_width;

    for i in (0..n).rev() {
        let node = &graph.nodes[i];
        match node.kind {
            NodeKind::Collapsed | NodeKind::Expanded if node.children.is_empty() => {
                size[i] = (element_width(cfg, &node.label), port_height(graph, cfg, i, cfg.node_height));
            }
            NodeKind::Expanded => {
                let (inner_w, inner_h) = stack(&node.children, &size, &mut rel, cfg.header, cfg.gap, p);
                let w = (label_width(&node.label) + 2.0 * p).max(inner_w + 2.0 * p).max(cfg.min_node_width);
                size[i] = (w, port_height(graph, cfg, i, cfg.header + inner_h + p));
            }
            NodeKind::Root | NodeKind::ViewContainer => {
                let (inner_w, inner_h) = stack(&node.children, &size, &mut rel, cfg.header, cfg.gap, p);
                let inner_w = inner_w.max(label_width(&node.label));
                for &c in &node.children {
                    size[c].0 = inner_w;
                }
                size[i] = (inner_w + 2.0 * p, cfg.header + inner_h + p);
            }
            NodeKind::CollapsedArea => {
                let mut children = node.children.clone();
                children.sort_by(|&a, &b| {
                    let (na, nb) = (&graph.nodes[a], &graph.nodes[b]);
                    na.label.cmp(&nb.label).then_with(|| na.instance.cmp(&nb.instance))
                });
                let (mut x, mut y, mut row_h, mut max_x) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                for c in children {
                    let (w, h) = size[c];
                    if x > 0.0 && x + w > cfg.max_row_width {
                        y += row_h + cfg.gap;
                        x = 0.0;
                        row_h = 0.0;
                    }
                    rel[c] = (p + x, p + y);
                    max_x = max_x.max(x + w);
                    row_h = row_h.max(h);
                    x += w + cfg.gap;
                }
                size[i] = (max_x + 2.0 * p, y + row_h + 2.0 * p);
            }
            NodeKind::ExpandedArea => {
                let local: HashMap<usize, usize> = node.children.iter().enumerate().map(|(k, &c)| (c, k)).collect();
                let sizes: Vec<(f64, f64)> = node.children.iter().map(|&c| size[c]).collect();
                let mut edge_ids = Vec::new();
                let mut pairs = Vec::new();
                for (e, edge) in graph.edges.iter().enumerate() {
                    if edge.area == i {
                        let s = graph.ports[edge.source_port].node;
                        let t = graph.ports[edge.target_port].node;
                        edge_ids.push(e);
                        pairs.push((local[&s], local[&t]));
                    }
                }
                let placed = layered_layout(&sizes, &pairs, cfg.layer_gap, cfg.gap);
                for (k, &c) in node.children.iter().enumerate() {
                    rel[c] = (placed.positions[k].0 + p, placed.positions[k].1 + p);
                }
                for (e, route) in edge_ids.into_iter().zip(placed.bends) {
                    bends.insert(e, route.into_iter().map(|(x, y)| (x + p, y + p)).collect());
                }
                size[i] = (placed.width + 2.0 * p, placed.height + 2.0 * p);
            }
            NodeKind::Collapsed => unreachable!("collapsed elements have no children"),
        }
    }

    let mut abs = vec![(0.0f64, 0.0f64); n];
    for i in 0..n {
        for &c in &graph.nodes[i].children {
            abs[c] = (abs[i].0 + rel[c].0, abs[i].1 + rel[c].1);
        }
    }

    let colors = assign_colors_with(&graph.arch, &cfg.colors);
    let nodes: Vec<NodeLayout> = (0..n)
        .map(|i| NodeLayout {
            rect: Rect { x: abs[i].0, y: abs[i].1, width: size[i].0, height: size[i].1 },
            fill: graph.nodes[i].artifact.filter(|_| graph.nodes[i].kind.is_element()).map(|a| colors.get(a)),
        })
        .collect();

    let mut ports = vec![Point { x: 0.0, y: 0.0 }; graph.ports.len()];
    for (i, node) in graph.nodes.iter().enumerate() {
        let rect = nodes[i].rect;
        for direction in [Direction::Incoming, Direction::Outgoing] {
            let side: Vec<usize> =
                node.ports.iter().copied().filter(|&port| graph.ports[port].direction == direction).collect();
            let x = if direction == Direction::Incoming { rect.x } else { rect.right() };
            for (k, &port) in side.iter().enumerate() {
                let y = rect.y + rect.height * (k as f64 + 1.0) / (side.len() as f64 + 1.0);
                ports[port] = Point { x, y };
            }
        }
    }

    let edges = graph
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let start = ports[edge.source_port];
            let end = ports[edge.target_port];
            let area = abs[edge.area];
            let mut points = vec![start];
            let source = graph.ports[edge.source_port].node;
            if source == graph.ports[edge.target_port].node {
                let top = nodes[source].rect.y - cfg.gap / 2.0;
                let out = cfg.gap / 2.0;
                points.extend([
                    Point { x: start.x + out, y: start.y },
                    Point { x: start.x + out, y: top },
                    Point { x: end.x - out, y: top },
                    Point { x: end.x - out, y: end.y },
                ]);
            } else {
                points.extend(bends[&e].iter().map(|&(x, y)| Point { x: area.0 + x, y: area.1 + y }));
            }
            points.push(end);
            EdgeLayout { points, stroke_width: stroke_width(edge.multiplicity) }
        })
        .collect();

    LaidOutDiagram {
        graph: graph.clone(),
        config: cfg.clone(),
        width: size.first().map_or(0.0, |s| s.0),
        height: size.first().map_or(0.0, |s| s.1),
        nodes,
        ports,
        edges,
    }
}

fn element_width(cfg: &LayoutConfig, label: &str) -> f64 {
    (label.chars().count() as f64 * cfg.char_width + 2.0 * cfg.padding).max(cfg.min_node_width)
}

/// Grows `height` so the ports on either side keep a minimum spacing.
fn port_height(graph: &DiagramGraph, cfg: &LayoutConfig, node: usize, height: f64) -> f64 {
    let ports = &graph.nodes[node].ports;
    let per_side = [Direction::Incoming, Direction::Outgoing]
        .iter()
        .map(|&d| ports.iter().filter(|&&p| graph.ports[p].direction == d).count())
        .max()
        .unwrap_or(0);
    height.max((per_side as f64 + 1.0) * (cfg.port_size + 4.0))
}

/// Stacks `children` vertically below a header; returns the content extent.
fn stack(children: &[usize], size: &[(f64, f64)], rel: &mut [(f64, f64)], header: f64, gap: f64, padding: f64) -> (f64, f64) {
    let mut y = header;
    let mut width: f64 = 0.0;
    for (k, &c) in children.iter().enumerate() {
        if k > 0 {
            y += gap;
        }
        rel[c] = (padding, y);
        y += size[c].1;
        width = width.max(size[c].0);
    }
    (width, y - header)
}
