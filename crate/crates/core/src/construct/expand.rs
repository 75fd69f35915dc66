use std::collections::{HashMap, HashSet};

use super::{validate, Defect, Degeneracy, Id, Program, Step, StepKind};
use crate::kernel::{CcSelector, LcSelector};

struct Expander {
    out: Vec<Step>,
    used: HashSet<Id>,
    lines: HashMap<Id, (Id, Id)>,
    counter: usize,
    gadget: Option<String>,
    degenerate_as: Option<Degeneracy>,
}

impl Expander {
    fn fresh(&mut self, base: &str) -> Id {
        loop {
            let id = format!("{base}~{}", self.counter);
            self.counter += 1;
            if !self.used.contains(&id) {
                self.used.insert(id.clone());
                return id;
            }
        }
    }

    fn emit(&mut self, id: Id, kind: StepKind) -> Id {
        if let StepKind::Line { p, q } = &kind {
            self.lines.insert(id.clone(), (p.clone(), q.clone()));
        }
        self.out.push(Step {
            id: id.clone(),
            kind,
            guard: None,
            degenerate_as: self.degenerate_as,
            gadget: self.gadget.clone(),
        });
        id
    }

    fn tmp(&mut self, base: &str, kind: StepKind) -> Id {
        let id = self.fresh(base);
        self.emit(id, kind)
    }

    fn line(&mut self, base: &str, p: &Id, q: &Id) -> Id {
        self.tmp(base, StepKind::Line { p: p.clone(), q: q.clone() })
    }

    fn circle(&mut self, base: &str, center: &Id, through: &Id, allow_zero: bool) -> Id {
        self.tmp(
            base,
            StepKind::Circle {
                center: center.clone(),
                through: through.clone(),
                allow_zero,
            },
        )
    }

    fn meet_lc(&mut self, id: Id, line: &Id, circle: &Id) -> Id {
        self.emit(
            id,
            StepKind::MeetLC {
                line: line.clone(),
                circle: circle.clone(),
                selector: Some(LcSelector::Second),
            },
        )
    }

    /// Apexes of the two equilateral triangles on `pq`, left then right.
    fn apexes(&mut self, base: &str, p: &Id, q: &Id) -> (Id, Id) {
        let c1 = self.circle(base, p, q, false);
        let c2 = self.circle(base, q, p, false);
        let mut side = |sel| {
            let id = self.fresh(base);
            self.emit(
                id,
                StepKind::MeetCC {
                    c1: c1.clone(),
                    c2: c2.clone(),
                    selector: Some(sel),
                },
            )
        };
        let left = side(CcSelector::Left);
        let right = side(CcSelector::Right);
        (left, right)
    }

    /// Perpendicular bisector meets the segment.
    fn midpoint(&mut self, id: Id, p: &Id, q: &Id) -> Id {
        let (e, f) = self.apexes(&id, p, q);
        let bis = self.line(&id, &f, &e);
        let seg = self.line(&id, p, q);
        self.emit(id, StepKind::MeetLL { l1: bis, l2: seg })
    }

    /// Through `r`, the translate of `line`: reflect its first point in the
    /// midpoint of `r` and its second point.
    fn parallel(&mut self, id: Id, line: &Id, r: &Id) -> Id {
        let (p, q) = self.lines[line].clone();
        let m_id = self.fresh(&id);
        let m = self.midpoint(m_id, r, &q);
        let pm = self.line(&id, &p, &m);
        let cm = self.circle(&id, &m, &p, false);
        let s_id = self.fresh(&id);
        let s = self.meet_lc(s_id, &pm, &cm);
        self.emit(id, StepKind::Line { p: r.clone(), q: s })
    }

    fn perp(&mut self, id: Id, line: &Id, r: &Id) -> Id {
        let (p, q) = self.lines[line].clone();
        let (e, f) = self.apexes(&id, &p, &q);
        let normal = self.line(&id, &f, &e);
        self.parallel(id, &normal, r)
    }

    /// Euclid I.2 places `|bc|` at `a`; a compass cut lays it on `along`.
    fn transfer(&mut self, id: Id, b: &Id, c: &Id, a: &Id, along: &Id) -> Id {
        let ca = self.circle(&id, a, b, false);
        let cb = self.circle(&id, b, a, false);
        let d_id = self.fresh(&id);
        let d = self.emit(
            d_id,
            StepKind::MeetCC {
                c1: ca,
                c2: cb,
                selector: Some(CcSelector::Left),
            },
        );
        let da = self.line(&id, &d, a);
        let db = self.line(&id, &d, b);
        let cbc = self.circle(&id, b, c, true);
        let g_id = self.fresh(&id);
        let g = self.meet_lc(g_id, &db, &cbc);
        let cdg = self.circle(&id, &d, &g, false);
        let l_id = self.fresh(&id);
        let l = self.meet_lc(l_id, &da, &cdg);
        let cal = self.circle(&id, a, &l, true);
        self.meet_lc(id, along, &cal)
    }

    fn mean(&mut self, id: Id, f: &Id, g: &Id, h: &Id) -> Id {
        let k_id = self.fresh(&id);
        let k = self.midpoint(k_id, f, h);
        let circ = self.circle(&id, &k, f, false);
        let fh = self.line(&id, f, h);
        let p_id = self.fresh(&id);
        let perp = self.perp(p_id, &fh, g);
        self.meet_lc(id, &perp, &circ)
    }

    fn step(&mut self, step: &Step) {
        self.gadget = step.gadget.clone();
        self.degenerate_as = step.degenerate_as;
        let id = step.id.clone();
        match &step.kind {
            StepKind::Midpoint { p, q } => {
                self.midpoint(id, p, q);
            }
            StepKind::ParallelThrough { line, point } => {
                self.parallel(id, line, point);
            }
            StepKind::PerpThrough { line, point } => {
                self.perp(id, line, point);
            }
            StepKind::TransferSegment { from, at, along } => {
                self.transfer(id, &from.0, &from.1, at, along);
            }
            StepKind::MeanProportional { first, second } => {
                self.mean(id, &first.0, &first.1, &second.1);
            }
            kind => {
                self.emit(id, kind.clone());
            }
        }
        self.out.last_mut().expect("step emitted").guard = step.guard.clone();
    }
}

/// Rewrites every macro step into primitive steps. The macro's own id names
/// the final primitive, which also inherits the guard; helper ids are
/// `<id>~<n>`. Primitive programs are returned unchanged.
pub fn expand(program: &Program) -> Result<Program, Vec<Defect>> {
    validate(program)?;
    let mut ex = Expander {
        out: Vec::with_capacity(program.steps.len() * 4),
        used: program.steps.iter().map(|s| s.id.clone()).collect(),
        lines: HashMap::new(),
        counter: 0,
        gadget: None,
        degenerate_as: None,
    };
    for step in &program.steps {
        ex.step(step);
    }
    let mut out = Program {
        steps: ex.out,
        ..program.clone()
    };
    if !program.metadata.step_counts.is_empty() {
        out.refresh_step_counts();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::fixtures::square_program;
    use crate::construct::interpret;
    use crate::expr::CoeffEnv;
    use crate::kernel::TowerElem;

    #[test]
    fn expansion_is_primitive_and_valid() {
        let p = square_program();
        let e = expand(&p).unwrap();
        assert!(!e.has_macros());
        assert_eq!(validate(&e), Ok(()));
        assert!(e.steps.len() > p.steps.len());
        assert_eq!(expand(&e).unwrap(), e);
    }

    #[test]
    fn expansion_agrees_exactly() {
        let p = square_program();
        let e = expand(&p).unwrap();
        for (n, d) in [(1, 1), (2, 1), (5, 3), (7, 2)] {
            let x = TowerElem::from_ratio(n, d);
            let a = interpret(&p, &x, &CoeffEnv::new()).unwrap();
            let b = interpret(&e, &x, &CoeffEnv::new()).unwrap();
            assert!(a.output.equals(&b.output), "{n}/{d}");
            for (id, obj) in &a.objects {
                if let crate::construct::GeoObject::Point(pa) = obj {
                    let pb = b.point(id).unwrap();
                    assert!(pa.x.equals(&pb.x) && pa.y.equals(&pb.y), "{id}");
                }
            }
        }
    }

    #[test]
    fn compiled_programs_expand_without_new_degeneracies() {
        use crate::compile::{compile_source, CompileOptions, Layout};
        for layout in Layout::ALL {
            let opts = CompileOptions {
                layout: layout.arc(),
                ..Default::default()
            };
            for src in ["x + 1", "x*x", "sqrt(x) + x", "3 - x/2", "x"] {
                let p = compile_source(src, &opts).unwrap();
                let e = expand(&p).unwrap();
                for (n, d) in [(0, 1), (1, 1), (2, 1), (1, 3)] {
                    let x = TowerElem::from_ratio(n, d);
                    let a = interpret(&p, &x, &CoeffEnv::new());
                    let b = interpret(&e, &x, &CoeffEnv::new());
                    match (a, b) {
                        (Ok(a), Ok(b)) => assert!(a.output.equals(&b.output), "{src} {n}/{d}"),
                        (Err(a), Err(b)) => assert_eq!(a.kind, b.kind, "{src} {n}/{d}"),
                        (a, b) => panic!("{src} at {n}/{d} ({layout}): {:?} vs {:?}", a.err(), b.err()),
                    }
                }
            }
        }
    }
}
