//! Random valid use cases for property tests.
//!
//! Generation draws from two pools, a list of texts and a list of numbers,
//! and assembles a canonical [`UseCase`] from them deterministically, so
//! shrinking the pools shrinks the use case.

use proptest::collection::vec;
use proptest::prelude::*;

use crate::model::{
    actor_handle, canonicalize, Actor, ActorKind, ActorRole, ApplicationAreaRef, Association, Extension, GoalLevel,
    Misuse, ScenarioStep, SystemFunction, UseCase, SYSTEM_ACTOR,
};
use crate::risk::builtin_taxonomy;

/// Single-line and multi-line text with characters that need escaping.
pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[A-Za-z][A-Za-z0-9 ,.']{0,24}",
        2 => "[A-Za-z0-9 \"\\\\|<>&#{}:\\[\\]()-]{1,20}",
        1 => "[a-zé→ü ]{1,12}\n[a-z |]{0,12}",
        1 => "\\PC{1,10}",
        1 => "[ \t]{0,2}[a-z]{1,6}\n  [a-z \"]{1,10}\n[a-z]{1,5}[ \n]{0,2}",
    ]
    .prop_map(|s| s.trim().to_string())
    .prop_filter("non-empty", |s| !s.is_empty())
}

fn slug() -> impl Strategy<Value = String> {
    "[a-z0-9_-]{1,10}"
}

fn tag() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,10}"
}

/// Labels that sometimes contain a taxonomy keyword phrase.
fn area_label() -> impl Strategy<Value = String> {
    let keywords: Vec<String> = builtin_taxonomy()
        .entries()
        .iter()
        .flat_map(|e| e.keywords.iter().cloned())
        .collect();
    prop_oneof![
        2 => text(),
        1 => (proptest::sample::select(keywords), "[a-z ]{0,8}", "[a-z ]{0,8}")
            .prop_map(|(k, a, b)| format!("{a} {k} {b}").trim().to_string()),
    ]
}

#[derive(Debug, Clone)]
pub struct Pools {
    pub texts: Vec<String>,
    pub slugs: Vec<String>,
    pub tags: Vec<String>,
    pub labels: Vec<String>,
    pub numbers: Vec<u32>,
}

pub fn pools() -> impl Strategy<Value = Pools> {
    (
        vec(text(), 24..48),
        vec(slug(), 8),
        vec(tag(), 4),
        vec(area_label(), 4),
        vec(any::<u32>(), 96..160),
    )
        .prop_map(|(texts, slugs, tags, labels, numbers)| Pools {
            texts,
            slugs,
            tags,
            labels,
            numbers,
        })
}

struct Draw<'a> {
    pools: &'a Pools,
    text: usize,
    number: usize,
}

impl Draw<'_> {
    fn n(&mut self, bound: u32) -> u32 {
        let v = self.pools.numbers[self.number % self.pools.numbers.len()];
        self.number += 1;
        if bound == 0 {
            0
        } else {
            v % bound
        }
    }

    fn chance(&mut self, percent: u32) -> bool {
        self.n(100) < percent
    }

    fn text(&mut self) -> String {
        let t = self.pools.texts[self.text % self.pools.texts.len()].clone();
        self.text += 1;
        t
    }

    fn maybe_text(&mut self) -> String {
        if self.chance(20) {
            String::new()
        } else {
            self.text()
        }
    }

    fn pick<'b, T>(&mut self, items: &'b [T]) -> &'b T {
        &items[self.n(items.len() as u32) as usize]
    }

    fn texts(&mut self, min: u32, max: u32) -> Vec<String> {
        let count = min + self.n(max - min + 1);
        (0..count).map(|_| self.text()).collect()
    }

    fn area(&mut self) -> ApplicationAreaRef {
        let tax = builtin_taxonomy();
        if self.chance(55) {
            let entry = self.pick(tax.entries());
            ApplicationAreaRef::taxonomy(entry.area_id.clone())
        } else {
            let pools = self.pools;
            ApplicationAreaRef::other(self.pick(&pools.labels).clone())
        }
    }
}

fn kind(n: u32) -> ActorKind {
    [ActorKind::Human, ActorKind::Organization, ActorKind::System][n as usize % 3]
}

/// Assembles a valid, canonical use case from the pools.
pub fn build_use_case(pools: &Pools) -> UseCase {
    let mut d = Draw {
        pools,
        text: 0,
        number: 0,
    };

    let mut handles = Vec::new();
    let mut actor = |d: &mut Draw, role: ActorRole, fallback: &str| -> Option<Actor> {
        let mut name = d.text();
        let mut handle = actor_handle(&name);
        if handle.is_empty() || handle == SYSTEM_ACTOR || handles.contains(&handle) {
            if role != ActorRole::User {
                return None;
            }
            name = fallback.to_string();
            handle = actor_handle(&name);
        }
        handles.push(handle);
        Some(Actor::new(name, kind(d.n(3)), role))
    };

    let user = actor(&mut d, ActorRole::User, "User").expect("user always present");
    let id = d.pick(&pools.slugs).clone();
    let title = d.text();
    let mut uc = UseCase::skeleton(id, title, user);
    let targets = d.n(3);
    for _ in 0..targets {
        uc.target_persons.extend(actor(&mut d, ActorRole::TargetPerson, ""));
    }
    let secondary = d.n(3);
    for _ in 0..secondary {
        uc.secondary_actors.extend(actor(&mut d, ActorRole::Secondary, ""));
    }

    uc.intended_purpose = d.text();
    uc.safety_component = d.chance(25);
    let caps = d.n(3);
    uc.affective_capabilities = (0..caps).map(|_| d.pick(&pools.tags).clone()).collect();
    uc.context_of_use = d.maybe_text();
    let areas = 1 + d.n(3);
    uc.application_areas = (0..areas).map(|_| d.area()).collect();
    let misuses = d.n(4);
    uc.misuses = (0..misuses)
        .map(|_| Misuse {
            description: d.text(),
            area_ref: if d.chance(60) { Some(d.area()) } else { None },
        })
        .collect();
    uc.inputs = d.texts(1, 3);
    uc.outputs = d.texts(1, 3);
    uc.level = [GoalLevel::Summary, GoalLevel::UserGoal, GoalLevel::Subfunction][d.n(3) as usize];
    uc.preconditions = d.texts(0, 2);
    uc.trigger = d.maybe_text();
    uc.success_guarantee = d.maybe_text();
    uc.minimal_guarantee = d.maybe_text();

    let functions = 1 + d.n(5);
    let ids: Vec<String> = (0..functions)
        .map(|i| format!("{}{}", d.pick(&pools.slugs), i))
        .collect();
    for (i, id) in ids.iter().enumerate() {
        let mut func = SystemFunction::new(id.clone(), d.text());
        for _ in 0..d.n(3) {
            let j = d.n(functions) as usize;
            if j == i {
                continue;
            }
            if d.chance(50) {
                func.includes.push(ids[j].clone());
            } else {
                func.extends.push(ids[j].clone());
            }
        }
        uc.system_functions.push(func);
    }

    let mut refs: Vec<String> = vec![SYSTEM_ACTOR.to_string()];
    for a in uc.actors() {
        refs.push(a.name.clone());
        refs.push(a.handle());
    }
    let step = |d: &mut Draw, index: u32| {
        let mut s = ScenarioStep::new(index, d.pick(&refs).clone(), d.text());
        if d.chance(40) {
            s.function = Some(d.pick(&ids).clone());
        }
        s
    };
    let steps = 1 + d.n(6);
    uc.main_scenario = (1..=steps).map(|i| step(&mut d, i)).collect();
    let extensions = d.n(4);
    for _ in 0..extensions {
        let branch = format!("{}{}", 1 + d.n(steps), (b'a' + d.n(3) as u8) as char);
        if uc.extensions.iter().any(|e| e.branch_id == branch) {
            continue;
        }
        let count = 1 + d.n(3);
        uc.extensions.push(Extension {
            branch_id: branch,
            condition: d.text(),
            steps: (1..=count).map(|i| step(&mut d, i)).collect(),
        });
    }
    if d.chance(20) {
        let count = 1 + d.n(3);
        uc.associations = (0..count)
            .map(|_| Association {
                actor: d.pick(&refs[1..]).clone(),
                function: d.pick(&ids).clone(),
            })
            .collect();
    }

    canonicalize(&uc).unwrap_or_else(|e| panic!("generator produced an invalid use case: {e:?}\n{uc:#?}"))
}

pub fn use_case() -> impl Strategy<Value = UseCase> {
    pools().prop_map(|p| build_use_case(&p))
}
