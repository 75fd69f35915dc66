use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{GivenRole, ObjKind, Program, StepKind, DEFAULT_STEP_CAP};
use crate::expr::is_coefficient_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    DuplicateId,
    UndefinedReference,
    WrongObjectKind,
    MissingSelector,
    GivenRoleCount,
    UndeclaredCoefficient,
    BadFreeInput,
    MeanProportionalShape,
    BadOutput,
    TooManySteps,
}

/// One well-formedness violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub step: Option<String>,
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.step, self.index) {
            (Some(id), Some(i)) => write!(f, "step {i} (`{id}`): {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

fn defect(kind: DefectKind, at: Option<(usize, &str)>, message: String) -> Defect {
    Defect {
        kind,
        step: at.map(|(_, id)| id.to_string()),
        index: at.map(|(i, _)| i),
        message,
    }
}

/// Checks structural well-formedness. Returns every defect found, in
/// program order, or `Ok(())`.
pub fn validate(program: &Program) -> Result<(), Vec<Defect>> {
    let mut defects = Vec::new();
    if program.steps.len() > DEFAULT_STEP_CAP {
        defects.push(defect(
            DefectKind::TooManySteps,
            None,
            format!("{} steps exceed the cap of {DEFAULT_STEP_CAP}", program.steps.len()),
        ));
    }

    let declared: HashSet<&str> = program.inputs.coefficients.iter().map(|c| c.name.as_str()).collect();
    let mut defined: HashMap<&str, ObjKind> = HashMap::new();
    let mut roles: HashMap<&'static str, usize> = HashMap::new();
    let mut free_id = None;
    let mut seen_coeffs = HashSet::new();

    for (i, step) in program.steps.iter().enumerate() {
        let at = Some((i, step.id.as_str()));
        for (r, want) in step.all_refs() {
            match defined.get(r.as_str()) {
                None => defects.push(defect(
                    DefectKind::UndefinedReference,
                    at,
                    format!("`{r}` is used before it is defined"),
                )),
                Some(&got) if got != want => defects.push(defect(
                    DefectKind::WrongObjectKind,
                    at,
                    format!("`{r}` is a {}, expected a {}", got.name(), want.name()),
                )),
                _ => {}
            }
        }
        match &step.kind {
            StepKind::MeetLC { selector: None, .. } | StepKind::MeetCC { selector: None, .. } => {
                defects.push(defect(
                    DefectKind::MissingSelector,
                    at,
                    "two-valued intersection needs a selector".into(),
                ))
            }
            StepKind::MeanProportional { first, second } if first.1 != second.0 => {
                defects.push(defect(
                    DefectKind::MeanProportionalShape,
                    at,
                    format!("segments must share a point, got `{}` and `{}`", first.1, second.0),
                ))
            }
            StepKind::Given(role) => {
                let key = match role {
                    GivenRole::Origin => "origin",
                    GivenRole::UnitOnAxis => "unit_on_axis",
                    GivenRole::UnitOnCoAxis => "unit_on_co_axis",
                    GivenRole::Free => {
                        free_id = Some(step.id.as_str());
                        "free"
                    }
                    GivenRole::Coeff(name) => {
                        if !is_coefficient_name(name) || !declared.contains(name.as_str()) {
                            defects.push(defect(
                                DefectKind::UndeclaredCoefficient,
                                at,
                                format!("coefficient `{name}` is not declared in the inputs"),
                            ));
                        }
                        if !seen_coeffs.insert(name.as_str()) {
                            defects.push(defect(
                                DefectKind::GivenRoleCount,
                                at,
                                format!("coefficient `{name}` is given twice"),
                            ));
                        }
                        "coefficient"
                    }
                };
                *roles.entry(key).or_default() += 1;
            }
            _ => {}
        }
        if defined
            .insert(step.id.as_str(), step.kind.output_kind())
            .is_some()
        {
            defects.push(defect(
                DefectKind::DuplicateId,
                at,
                format!("id `{}` is defined twice", step.id),
            ));
        }
    }

    for (key, min, max) in [
        ("origin", 1, 1),
        ("unit_on_axis", 1, 1),
        ("unit_on_co_axis", 0, 1),
        ("free", 1, 1),
    ] {
        let n = roles.get(key).copied().unwrap_or(0);
        if n < min || n > max {
            defects.push(defect(
                DefectKind::GivenRoleCount,
                None,
                format!("expected {} `{key}` given point(s), found {n}", if min == max { format!("exactly {min}") } else { format!("at most {max}") }),
            ));
        }
    }
    if free_id.is_some_and(|f| f != program.inputs.free) {
        defects.push(defect(
            DefectKind::BadFreeInput,
            None,
            format!("inputs name `{}` as the free point but it is not", program.inputs.free),
        ));
    }
    match defined.get(program.output.as_str()) {
        Some(ObjKind::Point) => {}
        Some(k) => defects.push(defect(
            DefectKind::BadOutput,
            None,
            format!("output `{}` is a {}, expected a point", program.output, k.name()),
        )),
        None => defects.push(defect(
            DefectKind::BadOutput,
            None,
            format!("output `{}` is not defined", program.output),
        )),
    }

    if defects.is_empty() {
        Ok(())
    } else {
        Err(defects)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::fixtures::{given, square_program};
    use crate::construct::Step;

    fn kinds(p: &Program) -> Vec<DefectKind> {
        validate(p).unwrap_err().into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn fixture_is_valid() {
        assert_eq!(validate(&square_program()), Ok(()));
    }

    #[test]
    fn use_before_definition() {
        let mut p = square_program();
        p.steps.swap(4, 10);
        let d = validate(&p).unwrap_err();
        assert!(d.iter().any(|d| d.kind == DefectKind::UndefinedReference));
    }

    #[test]
    fn duplicate_and_kind_mismatch() {
        let mut p = square_program();
        p.steps.push(Step::new("ax", StepKind::Line { p: "O".into(), q: "c1".into() }));
        let k = kinds(&p);
        assert!(k.contains(&DefectKind::DuplicateId));
        assert!(k.contains(&DefectKind::WrongObjectKind));
    }

    #[test]
    fn missing_selector_and_roles() {
        let mut p = square_program();
        if let StepKind::MeetLC { selector, .. } = &mut p.steps[7].kind {
            *selector = None;
        }
        p.steps.insert(4, given("X2", GivenRole::Free));
        let k = kinds(&p);
        assert!(k.contains(&DefectKind::MissingSelector));
        assert!(k.contains(&DefectKind::GivenRoleCount));
    }

    #[test]
    fn output_must_be_a_point() {
        let mut p = square_program();
        p.output = "perp".into();
        assert_eq!(kinds(&p), vec![DefectKind::BadOutput]);
        p.output = "nowhere".into();
        assert_eq!(kinds(&p), vec![DefectKind::BadOutput]);
    }

    #[test]
    fn coefficients_must_be_declared() {
        let mut p = square_program();
        p.steps.insert(4, given("A", GivenRole::Coeff("a".into())));
        assert_eq!(kinds(&p), vec![DefectKind::UndeclaredCoefficient]);
    }
}
