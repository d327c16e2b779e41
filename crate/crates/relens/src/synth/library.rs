//! Reuse of previously synthesized lenses between named formats.
//!
//! When a task connects two bare names, the resulting lens is registered
//! as a correspondence. Names then fall into equivalence classes with one
//! canonical representative each; every member stores a single direct lens
//! to the representative, so translating between any two members takes one
//! forward and one backward application.

use std::collections::HashMap;

use crate::dnf_lens::VarLenses;
use crate::lens::{invert, lens_get, Lens};
use crate::regex::{Definitions, Regex};

#[derive(Default)]
pub struct LensLibrary {
    /// Name → canonical representative of its class. Absent names are
    /// their own representative.
    canonical: HashMap<String, String>,
    /// Name → lens from its format onto the representative's format.
    to_canonical: HashMap<String, Lens>,
    /// Representative → every member pointing at it.
    members: HashMap<String, Vec<String>>,
    /// Endpoint pairs exactly as registered. Answering from here keeps the
    /// recorded lens verbatim — a named lens stays a bare name instead of
    /// being rebuilt as a composite through the representative.
    direct: HashMap<(String, String), Lens>,
}

impl LensLibrary {
    pub fn new() -> LensLibrary {
        LensLibrary::default()
    }

    /// The representative of `name`'s class.
    pub fn canonical<'a>(&'a self, name: &'a str) -> &'a str {
        self.canonical.get(name).map_or(name, String::as_str)
    }

    pub fn connected(&self, a: &str, b: &str) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    fn lens_to_canonical(&self, name: &str) -> Lens {
        self.to_canonical
            .get(name)
            .cloned()
            .unwrap_or_else(|| Lens::Identity(Regex::var(name)))
    }

    /// Record `lens : a ⇔ b`, merging the two classes. `b`'s side adopts
    /// `a`'s representative; every member of `b`'s old class gets a new
    /// direct lens built through the recorded one.
    pub fn register(&mut self, a: &str, b: &str, lens: Lens) {
        if self.connected(a, b) {
            return;
        }
        self.direct.insert((a.to_string(), b.to_string()), lens.clone());
        let ca = self.canonical(a).to_string();
        let cb = self.canonical(b).to_string();
        // cb ⇔ ca goes through b and a: undo cb←b, undo a→b, then a→ca.
        let cb_to_ca = Lens::compose(
            Lens::compose(invert(&self.lens_to_canonical(b)), invert(&lens)),
            self.lens_to_canonical(a),
        );
        let mut moved = self.members.remove(&cb).unwrap_or_default();
        if !moved.contains(&cb) {
            moved.push(cb.clone());
        }
        for name in moved {
            let direct = if name == cb {
                cb_to_ca.clone()
            } else {
                Lens::compose(self.lens_to_canonical(&name), cb_to_ca.clone())
            };
            self.canonical.insert(name.clone(), ca.clone());
            self.to_canonical.insert(name.clone(), direct);
            self.members.entry(ca.clone()).or_default().push(name);
        }
    }

    /// Translate content of `name`'s format into the representative's.
    /// Used to compare example fragments across corresponding names.
    pub fn canonical_content(&self, name: &str, content: &str, defs: &Definitions) -> String {
        match self.to_canonical.get(name) {
            None => content.to_string(),
            Some(l) => lens_get(l, defs, content).unwrap_or_else(|_| content.to_string()),
        }
    }
}

impl VarLenses for LensLibrary {
    fn lens_between(&self, a: &str, b: &str) -> Option<Lens> {
        if a == b {
            return Some(Lens::Identity(Regex::var(a)));
        }
        if let Some(l) = self.direct.get(&(a.to_string(), b.to_string())) {
            return Some(l.clone());
        }
        if let Some(l) = self.direct.get(&(b.to_string(), a.to_string())) {
            return Some(invert(l));
        }
        if !self.connected(a, b) {
            return None;
        }
        Some(Lens::compose(
            self.lens_to_canonical(a),
            invert(&self.lens_to_canonical(b)),
        ))
    }
}
