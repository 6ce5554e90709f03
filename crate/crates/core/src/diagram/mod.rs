//! UML use-case diagrams: graph construction, layout and rendering.
//!
//! The primary actor stands left of the system boundary, every other actor to
//! its right, and each system function is an ellipse inside the boundary.
//! Associations are inferred from scenario steps: a step links its actor to
//! the function named by its `-> function` annotation, or to the first
//! declared function when it has none. `system` steps link no actor. An
//! explicit `associations` block replaces inference entirely.

mod layout;
mod plantuml;
mod svg;

use serde::{Deserialize, Serialize};

pub use layout::{layout, LayoutConfig, Point, PositionedDiagram, Rect};
pub use plantuml::{body_lines, render_textual};
pub use svg::render_svg;

use crate::error::Result;
use crate::model::{require_structurally_valid, ActorKind, ActorRole, Diagnostic, UseCase, SYSTEM_ACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorNode {
    pub name: String,
    pub kind: ActorKind,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipseNode {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Association,
    Include,
    Extend,
}

impl EdgeKind {
    pub fn stereotype(self) -> Option<&'static str> {
        match self {
            EdgeKind::Association => None,
            EdgeKind::Include => Some("include"),
            EdgeKind::Extend => Some("extend"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRef {
    Actor(usize),
    Ellipse(usize),
}

/// Associations run actor → ellipse; include runs base → included; extend
/// runs extension → base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: NodeRef,
    pub to: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub boundary_label: String,
    pub actor_nodes: Vec<ActorNode>,
    pub ellipse_nodes: Vec<EllipseNode>,
    pub edges: Vec<Edge>,
}

impl Diagram {
    /// Checks edge endpoints exist and edge kinds connect the right node types.
    pub fn check(&self) -> std::result::Result<(), String> {
        let exists = |node: NodeRef| match node {
            NodeRef::Actor(i) => i < self.actor_nodes.len(),
            NodeRef::Ellipse(i) => i < self.ellipse_nodes.len(),
        };
        for (i, edge) in self.edges.iter().enumerate() {
            if !exists(edge.from) || !exists(edge.to) {
                return Err(format!("edge {i} references a missing node"));
            }
            let shape_ok = match edge.kind {
                EdgeKind::Association => {
                    matches!((edge.from, edge.to), (NodeRef::Actor(_), NodeRef::Ellipse(_)))
                }
                EdgeKind::Include | EdgeKind::Extend => {
                    matches!((edge.from, edge.to), (NodeRef::Ellipse(a), NodeRef::Ellipse(b)) if a != b)
                }
            };
            if !shape_ok {
                return Err(format!("edge {i} connects the wrong node types"));
            }
        }
        Ok(())
    }
}

/// Builds the diagram graph. Warnings (`diagram.orphan_function`) come back
/// alongside the diagram.
pub fn build_diagram(uc: &UseCase) -> Result<(Diagram, Vec<Diagnostic>)> {
    require_structurally_valid(uc)?;

    let actors: Vec<_> = uc.actors().collect();
    let actor_nodes = actors
        .iter()
        .map(|a| ActorNode {
            name: a.name.trim().to_string(),
            kind: a.kind,
            side: if a.role == ActorRole::User {
                Side::Left
            } else {
                Side::Right
            },
        })
        .collect();
    let ellipse_nodes: Vec<EllipseNode> = uc
        .system_functions
        .iter()
        .map(|f| EllipseNode {
            id: f.id.clone(),
            label: f.label.trim().to_string(),
        })
        .collect();

    let actor_index = |reference: &str| {
        let actor = uc.resolve_actor(reference)?;
        actors.iter().position(|a| std::ptr::eq(*a, actor))
    };
    let function_index = |id: &str| uc.system_functions.iter().position(|f| f.id == id);

    let mut referenced = vec![false; ellipse_nodes.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if uc.associations.is_empty() {
        for step in uc.all_steps() {
            let func = match &step.function {
                Some(id) => function_index(id),
                None => Some(0),
            };
            let Some(func) = func else { continue };
            referenced[func] = true;
            if step.actor == SYSTEM_ACTOR {
                continue;
            }
            if let Some(actor) = actor_index(&step.actor) {
                pairs.push((actor, func));
            }
        }
    } else {
        for assoc in &uc.associations {
            if let (Some(actor), Some(func)) = (actor_index(&assoc.actor), function_index(&assoc.function)) {
                referenced[func] = true;
                pairs.push((actor, func));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let mut edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(a, f)| Edge {
            kind: EdgeKind::Association,
            from: NodeRef::Actor(a),
            to: NodeRef::Ellipse(f),
        })
        .collect();
    for kind in [EdgeKind::Include, EdgeKind::Extend] {
        for (i, func) in uc.system_functions.iter().enumerate() {
            let targets = if kind == EdgeKind::Include {
                &func.includes
            } else {
                &func.extends
            };
            for target in targets {
                if let Some(j) = function_index(target) {
                    if !edges.iter().any(|e| e.kind == kind && e.from == NodeRef::Ellipse(i) && e.to == NodeRef::Ellipse(j)) {
                        edges.push(Edge {
                            kind,
                            from: NodeRef::Ellipse(i),
                            to: NodeRef::Ellipse(j),
                        });
                    }
                    referenced[i] = true;
                    referenced[j] = true;
                }
            }
        }
    }

    let warnings = ellipse_nodes
        .iter()
        .zip(&referenced)
        .enumerate()
        .filter(|(_, (_, used))| !**used)
        .map(|(i, (node, _))| {
            Diagnostic::warning(
                "diagram.orphan_function",
                format!("system_functions[{i}]"),
                format!("function `{}` is not referenced by any step or relationship", node.id),
            )
        })
        .collect();

    let diagram = Diagram {
        boundary_label: uc.title.trim().to_string(),
        actor_nodes,
        ellipse_nodes,
        edges,
    };
    debug_assert!(diagram.check().is_ok());
    Ok((diagram, warnings))
}
