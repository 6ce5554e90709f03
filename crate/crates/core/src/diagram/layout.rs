use serde::{Deserialize, Serialize};

use super::{Diagram, EdgeKind, NodeRef, Side};
use crate::model::Diagnostic;

/// Geometry in abstract units, mapped 1:1 to SVG user units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub ellipse_width: f64,
    pub ellipse_height: f64,
    pub actor_width: f64,
    pub actor_height: f64,
    /// Vertical spacing between stacked nodes.
    pub gap: f64,
    /// Margin inside the boundary and around the canvas.
    pub padding: f64,
    /// Horizontal distance between an actor column and the boundary.
    pub actor_margin: f64,
    pub font_size: f64,
    pub max_label_lines: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            ellipse_width: 160.0,
            ellipse_height: 60.0,
            actor_width: 40.0,
            actor_height: 80.0,
            gap: 24.0,
            padding: 32.0,
            actor_margin: 96.0,
            font_size: 12.0,
            max_label_lines: 3,
        }
    }
}

impl LayoutConfig {
    /// Rough glyph advance used for wrapping.
    pub fn char_width(&self) -> f64 {
        self.font_size * 0.6
    }

    fn label_chars_per_line(&self) -> usize {
        let usable = self.ellipse_width * 0.85;
        ((usable / self.char_width()).floor() as usize).max(4)
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
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn centered(c: Point, w: f64, h: f64) -> Rect {
        Rect {
            x: c.x - w / 2.0,
            y: c.y - h / 2.0,
            w,
            h,
        }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// `other` lies in the open interior of `self`.
    pub fn strictly_contains(&self, other: &Rect) -> bool {
        other.x > self.x && other.y > self.y && other.right() < self.right() && other.bottom() < self.bottom()
    }

    /// Interiors intersect; touching edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionedDiagram {
    pub diagram: Diagram,
    pub config: LayoutConfig,
    pub width: f64,
    pub height: f64,
    pub boundary: Rect,
    pub actor_centers: Vec<Point>,
    pub ellipse_centers: Vec<Point>,
    /// Wrapped ellipse labels, one entry per ellipse.
    pub ellipse_labels: Vec<Vec<String>>,
    pub warnings: Vec<Diagnostic>,
}

impl PositionedDiagram {
    pub fn actor_box(&self, i: usize) -> Rect {
        Rect::centered(self.actor_centers[i], self.config.actor_width, self.config.actor_height)
    }

    pub fn ellipse_box(&self, i: usize) -> Rect {
        Rect::centered(self.ellipse_centers[i], self.config.ellipse_width, self.config.ellipse_height)
    }

    /// Anchor points of an edge: actors attach on the side facing the
    /// boundary, ellipses on the side facing the actor. Ellipse-to-ellipse
    /// edges attach on the right-hand rim of both ellipses.
    pub fn edge_endpoints(&self, edge_index: usize) -> (Point, Point) {
        let edge = self.diagram.edges[edge_index];
        let half_aw = self.config.actor_width / 2.0;
        let half_ew = self.config.ellipse_width / 2.0;
        match (edge.kind, edge.from, edge.to) {
            (EdgeKind::Association, NodeRef::Actor(a), NodeRef::Ellipse(e)) => {
                let ac = self.actor_centers[a];
                let ec = self.ellipse_centers[e];
                match self.diagram.actor_nodes[a].side {
                    Side::Left => (Point { x: ac.x + half_aw, y: ac.y }, Point { x: ec.x - half_ew, y: ec.y }),
                    Side::Right => (Point { x: ac.x - half_aw, y: ac.y }, Point { x: ec.x + half_ew, y: ec.y }),
                }
            }
            (_, from, to) => {
                let center = |n: NodeRef| match n {
                    NodeRef::Actor(i) => self.actor_centers[i],
                    NodeRef::Ellipse(i) => self.ellipse_centers[i],
                };
                let (a, b) = (center(from), center(to));
                (Point { x: a.x + half_ew, y: a.y }, Point { x: b.x + half_ew, y: b.y })
            }
        }
    }
}

fn column_height(count: usize, item: f64, gap: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * item + (count - 1) as f64 * gap
    }
}

/// Three-column layout: primary actors left, the boundary with ellipses
/// stacked in declaration order, other actors right. Columns are centred
/// vertically against the tallest one.
pub fn layout(diagram: &Diagram, config: &LayoutConfig) -> PositionedDiagram {
    let c = config;
    let n = diagram.ellipse_nodes.len();
    let boundary_w = c.ellipse_width + 2.0 * c.padding;
    let boundary_h = 2.0 * c.padding + column_height(n, c.ellipse_height, c.gap);

    let left: Vec<usize> = (0..diagram.actor_nodes.len())
        .filter(|&i| diagram.actor_nodes[i].side == Side::Left)
        .collect();
    let right: Vec<usize> = (0..diagram.actor_nodes.len())
        .filter(|&i| diagram.actor_nodes[i].side == Side::Right)
        .collect();
    let left_h = column_height(left.len(), c.actor_height, c.gap);
    let right_h = column_height(right.len(), c.actor_height, c.gap);
    let content_h = boundary_h.max(left_h).max(right_h);

    let boundary = Rect {
        x: c.padding + c.actor_width + c.actor_margin,
        y: c.padding + (content_h - boundary_h) / 2.0,
        w: boundary_w,
        h: boundary_h,
    };
    let ellipse_x = boundary.x + boundary.w / 2.0;
    let ellipse_centers = (0..n)
        .map(|i| Point {
            x: ellipse_x,
            y: boundary.y + c.padding + i as f64 * (c.ellipse_height + c.gap) + c.ellipse_height / 2.0,
        })
        .collect();

    let left_x = c.padding + c.actor_width / 2.0;
    let right_x = boundary.right() + c.actor_margin + c.actor_width / 2.0;
    let mut actor_centers = vec![Point { x: 0.0, y: 0.0 }; diagram.actor_nodes.len()];
    for (column, x, height) in [(&left, left_x, left_h), (&right, right_x, right_h)] {
        let top = c.padding + (content_h - height) / 2.0;
        for (k, &i) in column.iter().enumerate() {
            actor_centers[i] = Point {
                x,
                y: top + k as f64 * (c.actor_height + c.gap) + c.actor_height / 2.0,
            };
        }
    }

    let width = if right.is_empty() {
        boundary.right() + c.padding
    } else {
        right_x + c.actor_width / 2.0 + c.padding
    };

    let mut warnings = Vec::new();
    let ellipse_labels = diagram
        .ellipse_nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let (lines, truncated) = wrap_label(&node.label, c.label_chars_per_line(), c.max_label_lines.max(1));
            if truncated {
                warnings.push(Diagnostic::warning(
                    "diagram.label_truncated",
                    format!("system_functions[{i}].label"),
                    format!("label of `{}` was cut to {} lines", node.id, lines.len()),
                ));
            }
            lines
        })
        .collect();

    PositionedDiagram {
        diagram: diagram.clone(),
        config: *config,
        width,
        height: content_h + 2.0 * c.padding,
        boundary,
        actor_centers,
        ellipse_centers,
        ellipse_labels,
        warnings,
    }
}

/// Greedy word wrap. Words longer than a line are split. Returns the lines
/// and whether text had to be dropped, in which case the last kept line ends
/// with `…`.
pub(crate) fn wrap_label(label: &str, width: usize, max_lines: usize) -> (Vec<String>, bool) {
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in label.split_whitespace() {
        let mut word: Vec<char> = word.chars().collect();
        loop {
            let current_len = current.chars().count();
            let needed = if current.is_empty() { word.len() } else { current_len + 1 + word.len() };
            if needed <= width {
                if !current.is_empty() {
                    current.push(' ');
                }
                current.extend(word.iter());
                break;
            }
            if !current.is_empty() {
                lines.push(std::mem::take(&mut current));
                continue;
            }
            let rest = word.split_off(width);
            lines.push(word.iter().collect());
            word = rest;
            if word.is_empty() {
                break;
            }
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    if lines.len() <= max_lines {
        return (lines, false);
    }
    lines.truncate(max_lines);
    let last = lines.last_mut().expect("max_lines >= 1");
    let mut chars: Vec<char> = last.chars().collect();
    chars.truncate(width.saturating_sub(1));
    while chars.last() == Some(&' ') {
        chars.pop();
    }
    *last = chars.into_iter().collect::<String>() + "…";
    (lines, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_short_label_is_one_line() {
        assert_eq!(wrap_label("Smart shooting", 20, 3), (vec!["Smart shooting".to_string()], false));
    }

    #[test]
    fn wrap_at_word_boundaries() {
        let (lines, cut) = wrap_label("Monitor the attention of the driver", 12, 3);
        assert_eq!(lines, ["Monitor the", "attention of", "the driver"]);
        assert!(!cut);
    }

    #[test]
    fn wrap_truncates_with_ellipsis() {
        let (lines, cut) = wrap_label("one two three four five six seven eight", 9, 3);
        assert!(cut);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with('…'));
        assert!(lines.iter().all(|l| l.chars().count() <= 9));
    }

    #[test]
    fn wrap_splits_long_words() {
        let (lines, _) = wrap_label("abcdefghij", 4, 5);
        assert_eq!(lines, ["abcd", "efgh", "ij"]);
    }
}
