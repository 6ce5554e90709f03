use std::fmt::Write as _;

use super::layout::{Point, PositionedDiagram};
use super::EdgeKind;

/// Shortest decimal with at most two fractional digits, never `-0`.
pub(crate) fn num(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let text = format!("{rounded:.2}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    text.to_string()
}

pub(crate) fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn point(p: Point) -> String {
    format!("{},{}", num(p.x), num(p.y))
}

/// Renders an SVG 1.1 document. Output depends only on the input, so equal
/// diagrams give equal bytes.
pub fn render_svg(p: &PositionedDiagram) -> Vec<u8> {
    let c = &p.config;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"{fs}\">",
        w = num(p.width),
        h = num(p.height),
        fs = num(c.font_size),
    );
    out.push_str("  <defs>\n");
    out.push_str("    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">\n");
    out.push_str("      <polygon points=\"0,0 10,5 0,10\" fill=\"black\"/>\n");
    out.push_str("    </marker>\n");
    out.push_str("  </defs>\n");

    let b = p.boundary;
    let _ = writeln!(
        out,
        "  <rect class=\"boundary\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        num(b.x),
        num(b.y),
        num(b.w),
        num(b.h)
    );

    for center in &p.ellipse_centers {
        let _ = writeln!(
            out,
            "  <ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"white\" stroke=\"black\"/>",
            num(center.x),
            num(center.y),
            num(c.ellipse_width / 2.0),
            num(c.ellipse_height / 2.0)
        );
    }

    for i in 0..p.actor_centers.len() {
        let bx = p.actor_box(i);
        let cx = bx.x + bx.w / 2.0;
        let head_r = bx.h * 0.125;
        let head_cy = bx.y + head_r;
        let neck = bx.y + 2.0 * head_r;
        let hip = bx.y + bx.h * 0.65;
        let arms = bx.y + bx.h * 0.4;
        let at = |x: f64, y: f64| point(Point { x, y });
        let _ = writeln!(out, "  <g class=\"actor\" fill=\"none\" stroke=\"black\">");
        let _ = writeln!(
            out,
            "    <circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            num(cx),
            num(head_cy),
            num(head_r)
        );
        let _ = writeln!(
            out,
            "    <polyline points=\"{} {} {} {} {}\"/>",
            at(bx.x, bx.bottom()),
            at(cx, hip),
            at(cx, neck),
            at(cx, hip),
            at(bx.right(), bx.bottom())
        );
        let _ = writeln!(
            out,
            "    <polyline points=\"{} {}\"/>",
            at(bx.x, arms),
            at(bx.right(), arms)
        );
        out.push_str("  </g>\n");
    }

    let bend = c.padding * 0.9;
    let mut stereotypes = Vec::new();
    for (i, edge) in p.diagram.edges.iter().enumerate() {
        let (from, to) = p.edge_endpoints(i);
        match edge.kind {
            EdgeKind::Association => {
                let _ = writeln!(
                    out,
                    "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
                    num(from.x),
                    num(from.y),
                    num(to.x),
                    num(to.y)
                );
            }
            EdgeKind::Include | EdgeKind::Extend => {
                let _ = writeln!(
                    out,
                    "  <path d=\"M {} C {} {} {}\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6 4\" marker-end=\"url(#arrow)\"/>",
                    point(from),
                    point(Point { x: from.x + bend, y: from.y }),
                    point(Point { x: to.x + bend, y: to.y }),
                    point(to)
                );
                let apex = Point {
                    x: from.x + bend * 0.75 + 4.0,
                    y: (from.y + to.y) / 2.0,
                };
                let stereotype = edge.kind.stereotype().unwrap_or_default();
                stereotypes.push((apex, format!("«{stereotype}»")));
            }
        }
    }

    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>",
        num(b.x + b.w / 2.0),
        num(b.y + c.font_size + 6.0),
        escape_xml(&p.diagram.boundary_label)
    );
    let line_height = c.font_size * 1.2;
    for (center, lines) in p.ellipse_centers.iter().zip(&p.ellipse_labels) {
        let _ = write!(
            out,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">",
            num(center.x),
            num(center.y)
        );
        let first = -(lines.len().saturating_sub(1) as f64) / 2.0 * line_height;
        for (k, line) in lines.iter().enumerate() {
            let dy = if k == 0 { first } else { line_height };
            let _ = write!(
                out,
                "<tspan x=\"{}\" dy=\"{}\">{}</tspan>",
                num(center.x),
                num(dy),
                escape_xml(line)
            );
        }
        out.push_str("</text>\n");
    }
    for (i, node) in p.diagram.actor_nodes.iter().enumerate() {
        let bx = p.actor_box(i);
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            num(bx.x + bx.w / 2.0),
            num(bx.bottom() + c.font_size + 4.0),
            escape_xml(&node.name)
        );
    }
    for (apex, text) in stereotypes {
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-style=\"italic\">{}</text>",
            num(apex.x),
            num(apex.y),
            text
        );
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}
