use std::fmt::Write;

use super::layout::{LaidOutDiagram, Point};
use super::NodeKind;
use crate::viewctx::PortState;

/// Formats a coordinate with at most two decimals and no trailing zeros.
pub(crate) fn num(v: f64) -> String {
    let rounded = (v * 100.0).round() / 100.0;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let text = format!("{rounded:.2}");
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn points(route: &[Point]) -> String {
    route.iter().map(|p| format!("{},{}", num(p.x), num(p.y))).collect::<Vec<_>>().join(" ")
}

/// Standalone SVG 1.1 document. Output depends only on the diagram, so equal
/// diagrams render to identical bytes.
pub fn render_svg(d: &LaidOutDiagram) -> String {
    let cfg = &d.config;
    let mut out = String::new();
    let (w, h) = (num(d.width), num(d.height));
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    out.push_str(
        "  <defs>\n    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" \
         markerUnits=\"userSpaceOnUse\" orient=\"auto\">\n      <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#333333\"/>\n    </marker>\n  </defs>\n",
    );
    let font = format!("font-family=\"sans-serif\" font-size=\"{}\"", num(cfg.font_size));

    for (i, node) in d.graph.nodes.iter().enumerate() {
        let r = d.nodes[i].rect;
        let rect = format!("x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"", num(r.x), num(r.y), num(r.width), num(r.height));
        let label_x = num(r.x + cfg.padding);
        match node.kind {
            NodeKind::Root => {
                let _ = writeln!(out, "  <rect class=\"root\" {rect} fill=\"#ffffff\" stroke=\"#999999\"/>");
                let _ = writeln!(
                    out,
                    "  <text x=\"{label_x}\" y=\"{}\" {font} font-weight=\"bold\">{}</text>",
                    num(r.y + cfg.header - 6.0),
                    escape(&node.label)
                );
            }
            NodeKind::CollapsedArea | NodeKind::ExpandedArea => {
                let class = if node.kind == NodeKind::CollapsedArea { "collapsed-area" } else { "expanded-area" };
                let _ = writeln!(
                    out,
                    "  <rect class=\"{class}\" {rect} fill=\"none\" stroke=\"#dddddd\" stroke-dasharray=\"4 2\"/>"
                );
            }
            NodeKind::ViewContainer => {
                let _ = writeln!(out, "  <rect class=\"view\" {rect} fill=\"#ffffff\" stroke=\"#888888\" rx=\"2\"/>");
                let _ = writeln!(
                    out,
                    "  <text x=\"{label_x}\" y=\"{}\" {font} font-style=\"italic\">{}</text>",
                    num(r.y + cfg.header - 6.0),
                    escape(&node.label)
                );
            }
            NodeKind::Collapsed | NodeKind::Expanded => {
                let fill = d.nodes[i].fill.map(|c| c.to_hex()).unwrap_or_else(|| "#eeeeee".to_string());
                let stroke_width = if node.focused { "2.5" } else { "1" };
                let _ = writeln!(
                    out,
                    "  <rect class=\"{}\" {rect} fill=\"{fill}\" stroke=\"#000000\" stroke-width=\"{stroke_width}\" rx=\"3\"/>",
                    if node.kind == NodeKind::Collapsed { "collapsed" } else { "expanded" }
                );
                let baseline = if node.children.is_empty() {
                    r.y + r.height / 2.0 + cfg.font_size / 3.0
                } else {
                    r.y + cfg.header - 6.0
                };
                let _ = writeln!(out, "  <text x=\"{label_x}\" y=\"{}\" {font}>{}</text>", num(baseline), escape(&node.label));
            }
        }
    }

    for (e, edge) in d.graph.edges.iter().enumerate() {
        let layout = &d.edges[e];
        let dash = if edge.category { " stroke-dasharray=\"6 3\"" } else { "" };
        let _ = writeln!(
            out,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"{}\"{dash} marker-end=\"url(#arrow)\"/>",
            points(&layout.points),
            num(layout.stroke_width)
        );
    }

    let half = cfg.port_size / 2.0;
    for (p, port) in d.graph.ports.iter().enumerate() {
        let c = d.ports[p];
        let fill = match port.state {
            PortState::AllShown => "#ffffff",
            PortState::MoreAvailable => "#000000",
        };
        let _ = writeln!(
            out,
            "  <rect class=\"port\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" stroke=\"#000000\"/>",
            num(c.x - half),
            num(c.y - half),
            num(cfg.port_size),
            num(cfg.port_size)
        );
    }
    out.push_str("</svg>\n");
    out
}
