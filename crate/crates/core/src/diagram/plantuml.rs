use super::{Diagram, NodeRef};

fn quoted(text: &str) -> String {
    let flat: String = text
        .chars()
        .map(|c| if c == '"' { '\'' } else if c.is_control() { ' ' } else { c })
        .collect();
    format!("\"{flat}\"")
}

fn alias(node: NodeRef) -> String {
    match node {
        NodeRef::Actor(i) => format!("A{}", i + 1),
        NodeRef::Ellipse(i) => format!("UC{}", i + 1),
    }
}

/// PlantUML use-case description. The body has one line per actor, one per
/// use case and one per edge, wrapped in `@startuml` / `@enduml`.
pub fn render_textual(d: &Diagram) -> String {
    let mut lines = vec!["@startuml".to_string()];
    for (i, actor) in d.actor_nodes.iter().enumerate() {
        lines.push(format!("actor {} as {}", quoted(&actor.name), alias(NodeRef::Actor(i))));
    }
    for (i, ellipse) in d.ellipse_nodes.iter().enumerate() {
        lines.push(format!(
            "usecase {} as {}",
            quoted(&ellipse.label),
            alias(NodeRef::Ellipse(i))
        ));
    }
    for edge in &d.edges {
        let (from, to) = (alias(edge.from), alias(edge.to));
        lines.push(match edge.kind.stereotype() {
            None => format!("{from} --> {to}"),
            Some(s) => format!("{from} .> {to} : <<{s}>>"),
        });
    }
    lines.push("@enduml".to_string());
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// The lines between the `@startuml` / `@enduml` markers.
pub fn body_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.is_empty() && *l != "@startuml" && *l != "@enduml")
        .collect()
}
