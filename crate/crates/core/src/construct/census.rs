use std::collections::{BTreeMap, BTreeSet};

use super::Program;

/// Step counts of a program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Census {
    /// Steps per kind name.
    pub by_kind: BTreeMap<String, usize>,
    /// Distinct gadget instances per gadget kind (`mul`, `div`, …).
    pub gadgets: BTreeMap<String, usize>,
    pub total: usize,
}

impl Census {
    pub fn gadget_count(&self, kind: &str) -> usize {
        self.gadgets.get(kind).copied().unwrap_or(0)
    }

    pub fn kind_count(&self, kind: &str) -> usize {
        self.by_kind.get(kind).copied().unwrap_or(0)
    }
}

pub fn step_census(program: &Program) -> Census {
    let mut by_kind = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for step in &program.steps {
        *by_kind.entry(step.kind.name().to_string()).or_default() += 1;
        if let Some(g) = &step.gadget {
            labels.insert(g.as_str());
        }
    }
    let mut gadgets = BTreeMap::new();
    for label in labels {
        let kind = label.split('#').next().unwrap_or(label);
        *gadgets.entry(kind.to_string()).or_default() += 1;
    }
    Census {
        by_kind,
        gadgets,
        total: program.steps.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::fixtures::square_program;

    #[test]
    fn counts_kinds_and_gadgets() {
        let mut p = square_program();
        for (i, s) in p.steps.iter_mut().enumerate().skip(6).take(5) {
            s.gadget = Some(if i < 9 { "mul#0" } else { "mul#1" }.into());
        }
        let c = step_census(&p);
        assert_eq!(c.total, 13);
        assert_eq!(c.kind_count("given"), 4);
        assert_eq!(c.kind_count("line"), 3);
        assert_eq!(c.gadget_count("mul"), 2);
        assert_eq!(c.gadget_count("div"), 0);
    }
}
