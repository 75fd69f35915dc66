//! Function graphs as swept loci of `Y′`, and their reflection in the
//! quadrant bisector.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{Program, StepError};
use crate::expr::CoeffEnv;
use crate::kernel::{rational_to_string, BackendKind};
use crate::registry::{Backend, Registry};

pub const DEFAULT_CLIP_Y: f64 = 1e3;
pub const DEFAULT_SAMPLES: usize = 401;
/// Largest sample count accepted with the exact backend.
pub const EXACT_SAMPLE_CAP: usize = 64;
/// Turn angle above which a segment pair is bisected.
pub const REFINE_ANGLE: f64 = 0.2;
pub const REFINE_LEVELS: usize = 6;

#[derive(Clone)]
pub struct TraceOptions {
    pub clip_y: f64,
    pub refine: bool,
    pub backend: Arc<dyn Backend>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            clip_y: DEFAULT_CLIP_Y,
            refine: true,
            backend: Registry::builtin().backend("f64").expect("built-in backend"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BreakReason {
    /// A step could not be constructed.
    StepError {
        error_kind: String,
        step: String,
        detail: String,
    },
    /// The ordinate left the clip band.
    Clip { y: f64 },
    /// Reflection split a branch where the new abscissa turned back.
    NonMonotone,
}

/// A gap before `branch` (equal to the branch count for a trailing gap).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Break {
    pub branch: usize,
    /// Sweep parameter of the first failing sample, when the gap came from one.
    pub sweep_x: Option<f64>,
    pub reason: BreakReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Locus {
    pub branches: Vec<Vec<[f64; 2]>>,
    pub breaks: Vec<Break>,
    pub domain: [f64; 2],
    pub samples: usize,
    pub reflected: bool,
}

impl Locus {
    pub fn points(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.branches.iter().flatten()
    }

    pub fn point_count(&self) -> usize {
        self.branches.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("range must satisfy 0 <= x_min < x_max, got [{0}, {1}]")]
    BadRange(String, String),
    #[error("at least 2 samples are needed, got {0}")]
    TooFewSamples(usize),
    #[error("the exact backend traces at most {EXACT_SAMPLE_CAP} samples, got {0}")]
    ExactSampleCap(usize),
    #[error("clip bound must be positive and finite")]
    BadClip,
}

impl From<&StepError> for BreakReason {
    fn from(e: &StepError) -> Self {
        BreakReason::StepError {
            error_kind: e.kind.name().to_string(),
            step: e.step.clone(),
            detail: e.detail.clone(),
        }
    }
}

#[derive(Clone)]
struct Sample {
    x: BigRational,
    xf: f64,
    outcome: Result<f64, BreakReason>,
}

fn sample(program: &Program, env: &CoeffEnv, opts: &TraceOptions, x: BigRational) -> Sample {
    let xf = num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN);
    let outcome = match opts.backend.interpret(program, &x, env) {
        Ok(fig) => {
            let y = fig.output().to_f64();
            if !y.is_finite() || y.abs() > opts.clip_y {
                Err(BreakReason::Clip { y })
            } else {
                Ok(y)
            }
        }
        Err(e) => Err((&e).into()),
    };
    Sample { x, xf, outcome }
}

fn sample_all(program: &Program, env: &CoeffEnv, opts: &TraceOptions, xs: Vec<BigRational>) -> Vec<Sample> {
    xs.into_par_iter().map(|x| sample(program, env, opts, x)).collect()
}

/// Branch index ranges into `samples` (which are sorted by x) plus breaks.
fn assemble(samples: &[Sample]) -> (Vec<Vec<usize>>, Vec<Break>) {
    let mut branches: Vec<Vec<usize>> = Vec::new();
    let mut breaks = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut in_gap = false;
    for (i, s) in samples.iter().enumerate() {
        match &s.outcome {
            Ok(_) => {
                current.push(i);
                in_gap = false;
            }
            Err(reason) => {
                if !current.is_empty() {
                    branches.push(std::mem::take(&mut current));
                }
                if !in_gap {
                    breaks.push(Break {
                        branch: branches.len(),
                        sweep_x: Some(s.xf),
                        reason: reason.clone(),
                    });
                    in_gap = true;
                }
            }
        }
    }
    if !current.is_empty() {
        branches.push(current);
    }
    (branches, breaks)
}

fn turn(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let (vx, vy) = (c[0] - b[0], c[1] - b[1]);
    (ux * vy - uy * vx).atan2(ux * vx + uy * vy).abs()
}

fn point(s: &Sample) -> [f64; 2] {
    [s.xf, *s.outcome.as_ref().expect("branch sample")]
}

fn two() -> BigRational {
    BigRational::from_integer(2.into())
}

/// Sweeps the free point over `range` and records `Y′`.
///
/// Samples are uniform in `range` and evaluated independently. A failing
/// or clipped sample ends the current branch; each maximal run of such
/// samples is one recorded break. With `refine`, segments next to a vertex
/// turning by more than [`REFINE_ANGLE`] are bisected, for up to
/// [`REFINE_LEVELS`] rounds. Exact traces are never refined.
pub fn trace(
    program: &Program,
    env: &CoeffEnv,
    range: (&BigRational, &BigRational),
    n: usize,
    opts: &TraceOptions,
) -> Result<Locus, TraceError> {
    let (lo, hi) = range;
    if lo.is_negative() || lo >= hi {
        return Err(TraceError::BadRange(rational_to_string(lo), rational_to_string(hi)));
    }
    if n < 2 {
        return Err(TraceError::TooFewSamples(n));
    }
    let exact = opts.backend.kind() == BackendKind::Exact;
    if exact && n > EXACT_SAMPLE_CAP {
        return Err(TraceError::ExactSampleCap(n));
    }
    if !(opts.clip_y > 0.0 && opts.clip_y.is_finite()) {
        return Err(TraceError::BadClip);
    }
    let width = hi - lo;
    let steps = BigRational::from_integer((n - 1).into());
    let xs: Vec<BigRational> = (0..n)
        .map(|i| lo + &width * BigRational::from_integer(i.into()) / &steps)
        .collect();
    let mut samples = sample_all(program, env, opts, xs);

    if opts.refine && !exact {
        for _ in 0..REFINE_LEVELS {
            let (branches, _) = assemble(&samples);
            let mut mids = Vec::new();
            for br in &branches {
                let mut marked = vec![false; br.len().saturating_sub(1)];
                for k in 1..br.len().saturating_sub(1) {
                    let a = point(&samples[br[k - 1]]);
                    let b = point(&samples[br[k]]);
                    let c = point(&samples[br[k + 1]]);
                    if turn(a, b, c) > REFINE_ANGLE {
                        marked[k - 1] = true;
                        marked[k] = true;
                    }
                }
                for (k, m) in marked.iter().enumerate() {
                    if *m {
                        mids.push((&samples[br[k]].x + &samples[br[k + 1]].x) / two());
                    }
                }
            }
            if mids.is_empty() {
                break;
            }
            samples.extend(sample_all(program, env, opts, mids));
            samples.sort_by(|a, b| a.x.cmp(&b.x));
        }
    }

    let (branches, breaks) = assemble(&samples);
    Ok(Locus {
        branches: branches
            .iter()
            .map(|br| br.iter().map(|&i| point(&samples[i])).collect())
            .collect(),
        breaks,
        domain: [
            num_traits::ToPrimitive::to_f64(lo).unwrap_or(0.0),
            num_traits::ToPrimitive::to_f64(hi).unwrap_or(0.0),
        ],
        samples: samples.len(),
        reflected: false,
    })
}

/// Splits a polyline into maximal runs strictly monotone in x, each
/// returned in increasing x.
fn monotone_runs(points: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    let mut runs: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut cur: Vec<[f64; 2]> = Vec::new();
    let mut dir = 0i8;
    for &p in points {
        if let Some(&last) = cur.last() {
            let d = if p[0] > last[0] {
                1
            } else if p[0] < last[0] {
                -1
            } else {
                0
            };
            if d == 0 || (dir != 0 && d != dir) {
                if dir < 0 {
                    cur.reverse();
                }
                runs.push(std::mem::take(&mut cur));
                dir = 0;
            } else {
                dir = d;
            }
        }
        cur.push(p);
    }
    if !cur.is_empty() {
        if dir < 0 {
            cur.reverse();
        }
        runs.push(cur);
    }
    runs
}

/// Mirrors the locus in the line `y = x`, re-segmenting every branch into
/// runs monotone in the new abscissa.
pub fn reflect(locus: &Locus) -> Locus {
    let mut branches = Vec::new();
    let mut breaks = Vec::new();
    let mut old_breaks = locus.breaks.iter().peekable();
    for (bi, br) in locus.branches.iter().enumerate() {
        while let Some(b) = old_breaks.next_if(|b| b.branch == bi) {
            breaks.push(Break {
                branch: branches.len(),
                ..b.clone()
            });
        }
        let swapped: Vec<[f64; 2]> = br.iter().map(|p| [p[1], p[0]]).collect();
        for (k, run) in monotone_runs(&swapped).into_iter().enumerate() {
            if k > 0 {
                breaks.push(Break {
                    branch: branches.len(),
                    sweep_x: None,
                    reason: BreakReason::NonMonotone,
                });
            }
            branches.push(run);
        }
    }
    for b in old_breaks {
        breaks.push(Break {
            branch: branches.len(),
            ..b.clone()
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in branches.iter().flatten() {
        lo = lo.min(p[0]);
        hi = hi.max(p[0]);
    }
    if lo > hi {
        (lo, hi) = (0.0, 0.0);
    }
    Locus {
        branches,
        breaks,
        domain: [lo, hi],
        samples: locus.samples,
        reflected: !locus.reflected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn run(src: &str, lo: i64, hi: i64, n: usize) -> Locus {
        let p = compile_source(src, &CompileOptions::default()).unwrap();
        trace(&p, &CoeffEnv::new(), (&r(lo), &r(hi)), n, &TraceOptions::default()).unwrap()
    }

    #[test]
    fn square_is_one_branch() {
        let l = run("x^2", 0, 2, 201);
        assert_eq!(l.branches.len(), 1);
        assert!(l.breaks.is_empty());
        for p in l.points() {
            assert!((p[1] - p[0] * p[0]).abs() <= 1e-9);
        }
        assert!(l.branches[0].windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn reciprocal_breaks_once_at_zero() {
        let l = run("1/x", 0, 4, 401);
        assert_eq!(l.branches.len(), 1);
        assert_eq!(l.breaks.len(), 1);
        let b = &l.breaks[0];
        assert_eq!(b.branch, 0);
        assert_eq!(b.sweep_x, Some(0.0));
        assert!(matches!(&b.reason, BreakReason::StepError { error_kind, .. } if error_kind == "division_degenerate"));
        assert!(l.points().all(|p| p[1].abs() <= DEFAULT_CLIP_Y));
    }

    #[test]
    fn clipping_records_reason() {
        let opts = TraceOptions {
            clip_y: 10.0,
            ..Default::default()
        };
        let p = compile_source("1/x", &CompileOptions::default()).unwrap();
        let l = trace(&p, &CoeffEnv::new(), (&r(0), &r(4)), 401, &opts).unwrap();
        assert_eq!(l.breaks.len(), 1);
        assert_eq!(l.branches.len(), 1);
        assert!(l.branches[0][0][0] >= 0.1 - 1e-12);
    }

    #[test]
    fn middle_gap() {
        let l = run("1/((x + 1)*(x + 1) - 4*x)", 0, 4, 41);
        assert_eq!(l.branches.len(), 2);
        assert_eq!(l.breaks.len(), 1);
        assert_eq!(l.breaks[0].branch, 1);
    }

    #[test]
    fn sqrt_known_points() {
        let l = run("sqrt(x)", 0, 4, 401);
        assert_eq!(l.branches.len(), 1);
        let has = |x: f64, y: f64| l.points().any(|p| (p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12);
        assert!(has(0.0, 0.0) && has(1.0, 1.0) && has(4.0, 2.0));
    }

    #[test]
    fn refinement_adds_samples_near_bends() {
        let p = compile_source("1/(x + 1/10)", &CompileOptions::default()).unwrap();
        let on = trace(&p, &CoeffEnv::new(), (&r(0), &r(4)), 21, &TraceOptions::default()).unwrap();
        let off = trace(
            &p,
            &CoeffEnv::new(),
            (&r(0), &r(4)),
            21,
            &TraceOptions {
                refine: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(off.samples, 21);
        assert!(on.samples > 21);
        assert!(on.branches[0].windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn reflection_of_square_is_root() {
        let l = reflect(&run("x^2", 0, 2, 801));
        assert!(l.reflected);
        assert_eq!(l.branches.len(), 1);
        for p in l.points() {
            assert!((p[1] - p[0].sqrt()).abs() <= 1e-4);
        }
        assert_eq!(reflect(&l), run("x^2", 0, 2, 801));
    }

    #[test]
    fn reflection_splits_non_monotone_branches() {
        let l = Locus {
            branches: vec![vec![[0.0, 1.0], [1.0, 0.0], [2.0, 1.0], [3.0, 2.0]]],
            breaks: vec![],
            domain: [0.0, 3.0],
            samples: 4,
            reflected: false,
        };
        let m = reflect(&l);
        assert_eq!(m.branches, vec![vec![[0.0, 1.0], [1.0, 0.0]], vec![[1.0, 2.0], [2.0, 3.0]]]);
        assert_eq!(m.breaks.len(), 1);
        assert_eq!(m.breaks[0].reason, BreakReason::NonMonotone);
    }

    #[test]
    fn exact_sample_cap() {
        let p = compile_source("x", &CompileOptions::default()).unwrap();
        let opts = TraceOptions {
            backend: Registry::builtin().backend("exact").unwrap(),
            ..Default::default()
        };
        assert_eq!(
            trace(&p, &CoeffEnv::new(), (&r(0), &r(1)), 65, &opts).unwrap_err(),
            TraceError::ExactSampleCap(65)
        );
        let l = trace(&p, &CoeffEnv::new(), (&r(0), &r(1)), 64, &opts).unwrap();
        assert_eq!(l.point_count(), 64);
    }

    #[test]
    fn bad_ranges() {
        let p = compile_source("x", &CompileOptions::default()).unwrap();
        let o = TraceOptions::default();
        assert!(trace(&p, &CoeffEnv::new(), (&r(-1), &r(1)), 10, &o).is_err());
        assert!(trace(&p, &CoeffEnv::new(), (&r(1), &r(1)), 10, &o).is_err());
        assert!(trace(&p, &CoeffEnv::new(), (&r(0), &r(1)), 1, &o).is_err());
    }
}
