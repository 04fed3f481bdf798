use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{format_formula, AgentId, Formula};

/// What a propositional stand-in atom was introduced for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomBinding {
    /// The context of being inside `agent`'s belief set: `B(agent, φ)` was
    /// rewritten to `atom -> φ`.
    Context(AgentId),
    /// An opaque modal or epistemic subformula.
    Opaque(Formula),
}

impl AtomBinding {
    /// Human-readable form, e.g. `B(R)` or `K(H,a)`.
    pub fn display(&self) -> String {
        match self {
            AtomBinding::Context(agent) => format!("B({agent})"),
            AtomBinding::Opaque(f) => format_formula(f),
        }
    }
}

/// Ordered, injective map from stand-in atom names to what they replace.
/// Serializes as a JSON object of name to display form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomMap {
    entries: Vec<(String, AtomBinding)>,
}

impl AtomMap {
    pub fn get(&self, name: &str) -> Option<&AtomBinding> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AtomBinding)> {
        self.entries.iter().map(|(n, b)| (n.as_str(), b))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Display form of an atom: the binding if it is a stand-in, otherwise
    /// the name itself.
    pub fn display(&self, name: &str) -> String {
        self.get(name).map(AtomBinding::display).unwrap_or_else(|| name.to_string())
    }
}

impl Serialize for AtomMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.entries.len()))?;
        for (name, binding) in &self.entries {
            m.serialize_entry(name, &binding.display())?;
        }
        m.end()
    }
}

/// Result of atomizing a single formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atomized {
    pub skeleton: Formula,
    pub map: AtomMap,
}

/// Replaces modal and epistemic subformulas with fresh atoms.
///
/// The reasoner's own belief operator is peeled rather than hidden:
/// `B(R, φ)` becomes `X -> φ'`, where `X` stands for the belief context and
/// `φ'` is `φ` atomized in turn. Every other maximal subformula rooted at
/// `B`, `K`, `box`, `dia` or `diaMQ` becomes `y1`, `y2`, ... in order of first
/// appearance, with equal subformulas sharing one atom.
#[derive(Debug, Clone)]
pub struct Atomizer {
    reasoner: Option<AgentId>,
    map: AtomMap,
    reverse: BTreeMap<Formula, String>,
    contexts: BTreeMap<AgentId, String>,
    taken: BTreeSet<String>,
    next: usize,
}

impl Atomizer {
    /// Peels `B(R, ·)`. Names in `reserved` are never used for stand-ins.
    pub fn new<'a>(reserved: impl IntoIterator<Item = &'a str>) -> Self {
        Self::with_reasoner(Some(AgentId::robot()), reserved)
    }

    /// Hides every maximal modal subformula, including `B(R, ·)`.
    pub fn maximal<'a>(reserved: impl IntoIterator<Item = &'a str>) -> Self {
        Self::with_reasoner(None, reserved)
    }

    pub fn with_reasoner<'a>(reasoner: Option<AgentId>, reserved: impl IntoIterator<Item = &'a str>) -> Self {
        Atomizer {
            reasoner,
            map: AtomMap::default(),
            reverse: BTreeMap::new(),
            contexts: BTreeMap::new(),
            taken: reserved.into_iter().map(str::to_string).collect(),
            next: 1,
        }
    }

    pub fn skeleton(&mut self, f: &Formula) -> Formula {
        use Formula::*;
        match f {
            Atom(_) => f.clone(),
            Not(a) => Formula::not(self.skeleton(a)),
            And(a, b) => Formula::and(self.skeleton(a), self.skeleton(b)),
            Or(a, b) => Formula::or(self.skeleton(a), self.skeleton(b)),
            Implies(a, b) => Formula::implies(self.skeleton(a), self.skeleton(b)),
            Iff(a, b) => Formula::iff(self.skeleton(a), self.skeleton(b)),
            Believes(agent, inner) if self.reasoner.as_ref() == Some(agent) => {
                let ctx = self.context_atom(agent);
                Formula::implies(Formula::Atom(ctx), self.skeleton(inner))
            }
            _ => Formula::Atom(self.opaque_atom(f)),
        }
    }

    pub fn finish(self) -> AtomMap {
        self.map
    }

    pub fn map(&self) -> &AtomMap {
        &self.map
    }

    fn context_atom(&mut self, agent: &AgentId) -> String {
        if let Some(name) = self.contexts.get(agent) {
            return name.clone();
        }
        let base = if agent.is_robot() { "X".to_string() } else { format!("X_{agent}") };
        let mut name = base.clone();
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{base}{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        self.contexts.insert(agent.clone(), name.clone());
        self.map.entries.push((name.clone(), AtomBinding::Context(agent.clone())));
        name
    }

    fn opaque_atom(&mut self, f: &Formula) -> String {
        if let Some(name) = self.reverse.get(f) {
            return name.clone();
        }
        let name = loop {
            let candidate = format!("y{}", self.next);
            self.next += 1;
            if !self.taken.contains(&candidate) {
                break candidate;
            }
        };
        self.taken.insert(name.clone());
        self.reverse.insert(f.clone(), name.clone());
        self.map.entries.push((name.clone(), AtomBinding::Opaque(f.clone())));
        name
    }
}

/// Atomizes one formula on its own.
pub fn atomize_modal(f: &Formula) -> Atomized {
    let mut a = Atomizer::new(f.atoms());
    let skeleton = a.skeleton(f);
    Atomized { skeleton, map: a.finish() }
}

/// Atomizes several formulas with one shared map, so that equal subformulas
/// in different inputs receive the same atom.
pub fn atomize_all(fs: &[Formula]) -> (Vec<Formula>, AtomMap) {
    let reserved: BTreeSet<&str> = fs.iter().flat_map(Formula::atoms).collect();
    let mut a = Atomizer::new(reserved);
    let skeletons = fs.iter().map(|f| a.skeleton(f)).collect();
    (skeletons, a.finish())
}

/// Inverse of atomization: substitutes bindings back into a skeleton.
pub fn restore(skeleton: &Formula, map: &AtomMap) -> Formula {
    use Formula::*;
    match skeleton {
        Atom(name) => match map.get(name) {
            Some(AtomBinding::Opaque(f)) => f.clone(),
            _ => skeleton.clone(),
        },
        Implies(a, b) => {
            if let Atom(name) = &**a {
                if let Some(AtomBinding::Context(agent)) = map.get(name) {
                    return Formula::believes(agent.clone(), restore(b, map));
                }
            }
            Formula::implies(restore(a, map), restore(b, map))
        }
        Not(a) => Formula::not(restore(a, map)),
        And(a, b) => Formula::and(restore(a, map), restore(b, map)),
        Or(a, b) => Formula::or(restore(a, map), restore(b, map)),
        Iff(a, b) => Formula::iff(restore(a, map), restore(b, map)),
        Nec(a) => Formula::nec(restore(a, map)),
        Poss(a) => Formula::poss(restore(a, map)),
        PossMq(a) => Formula::poss_mq(restore(a, map)),
        Believes(ag, a) => Formula::believes(ag.clone(), restore(a, map)),
        Knows(ag, a) => Formula::knows(ag.clone(), restore(a, map)),
    }
}
