//! Co-rays: gradient lines of a distance-like field.
//!
//! On a unit-weight graph a co-ray is a maximal path along which the field
//! drops by exactly one per edge. Paths stop at the zone boundary, where the
//! field is no longer known, and are marked truncated there.

use serde::Serialize;

use crate::dlfield::ScalarField;
use crate::error::{Error, Result};
use crate::space::Vertex;
use crate::window::{BallSearch, Window, UNREACHED};

const MODULE: &str = "corays";

pub const DEFAULT_MAX_PATHS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoRay {
    pub path: Vec<Vertex>,
    pub decrements: Vec<i64>,
    /// The path stopped on the zone boundary rather than at a dead end.
    pub truncated: bool,
}

impl CoRay {
    pub fn len(&self) -> usize {
        self.path.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.path.len() <= 1
    }

    pub fn start(&self) -> Vertex {
        self.path[0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoRayTrace {
    pub rays: Vec<CoRay>,
    /// Enumeration stopped at `max_paths`.
    pub capped: bool,
}

impl CoRayTrace {
    /// Paths that ended inside the zone with no way down.
    pub fn dead_ends(&self) -> impl Iterator<Item = &CoRay> {
        self.rays.iter().filter(|r| !r.truncated)
    }
}

fn zone_id(field: &ScalarField, v: Vertex) -> Result<u32> {
    field.id_of(v).ok_or(Error::OutsideWindow {
        module: MODULE,
        vertex: v,
    })
}

fn on_boundary(field: &ScalarField, id: u32) -> bool {
    field.window().dist_from_base(id) >= field.zone()
}

fn descending(field: &ScalarField, id: u32) -> impl Iterator<Item = u32> + '_ {
    let target = field.values()[id as usize] - 1;
    field
        .window()
        .neighbors(id)
        .iter()
        .copied()
        .filter(move |&w| field.value(w) == Some(target))
}

/// Enumerates maximal unit-decrement paths from `start`, depth first in
/// generator neighbor order, up to `max_paths` of them.
pub fn trace_corays(field: &ScalarField, start: Vertex, max_paths: usize) -> Result<CoRayTrace> {
    let start_id = zone_id(field, start)?;
    if !on_boundary(field, start_id) && descending(field, start_id).next().is_none() {
        return Err(Error::NoDescent(start));
    }
    let mut rays = Vec::new();
    let mut capped = false;
    let mut path = vec![start_id];
    extend(field, &mut path, max_paths.max(1), &mut rays, &mut capped);
    Ok(CoRayTrace { rays, capped })
}

fn extend(
    field: &ScalarField,
    path: &mut Vec<u32>,
    max_paths: usize,
    rays: &mut Vec<CoRay>,
    capped: &mut bool,
) {
    let tip = *path.last().unwrap();
    let next: Vec<u32> = if on_boundary(field, tip) {
        Vec::new()
    } else {
        descending(field, tip).collect()
    };
    if next.is_empty() {
        let window = field.window();
        rays.push(CoRay {
            path: path.iter().map(|&id| window.vertex(id)).collect(),
            decrements: path
                .windows(2)
                .map(|p| field.values()[p[0] as usize] - field.values()[p[1] as usize])
                .collect(),
            truncated: on_boundary(field, tip),
        });
        return;
    }
    for w in next {
        if rays.len() >= max_paths {
            *capped = true;
            return;
        }
        path.push(w);
        extend(field, path, max_paths, rays, capped);
        path.pop();
    }
}

/// Independent check of the gradient identity along `coray`: consecutive
/// vertices are adjacent, `u(v_{t2}) - u(v_{t1}) = t1 - t2` and
/// `d(v_{t1}, v_{t2}) = t2 - t1` for all `t1 <= t2`.
///
/// Errors only when a distance cannot be certified exact inside the window.
pub fn verify_gradient(coray: &CoRay, field: &ScalarField) -> Result<bool> {
    let window = field.window();
    let Some(ids) = coray
        .path
        .iter()
        .map(|&v| field.id_of(v))
        .collect::<Option<Vec<u32>>>()
    else {
        return Ok(false);
    };
    if ids.windows(2).any(|p| !window.neighbors(p[0]).contains(&p[1])) {
        return Ok(false);
    }
    let values: Vec<i64> = ids.iter().map(|&id| field.values()[id as usize]).collect();
    for t1 in 0..ids.len() {
        for t2 in t1..ids.len() {
            if values[t2] - values[t1] != t1 as i64 - t2 as i64 {
                return Ok(false);
            }
        }
    }
    let mut search = BallSearch::new(window);
    let length = ids.len() - 1;
    for (t1, &a) in ids.iter().enumerate() {
        let reach = (length - t1) as u32;
        certify(window, a, reach)?;
        search.run(window, a, reach);
        for (t2, &b) in ids.iter().enumerate().skip(t1) {
            if search.depth(b) != Some((t2 - t1) as u32) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn certify(window: &Window, from: u32, reach: u32) -> Result<()> {
    let need = window.dist_from_base(from) + reach;
    if need > window.radius() {
        return Err(Error::Validity {
            module: MODULE,
            what: format!("d(x0, {}) + path length", window.vertex(from)),
            value: need as i64,
            limit: window.radius() as i64,
            param: "--radius",
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Tight,
    Strict,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationEntry {
    pub start: Vertex,
    pub length: usize,
    /// `b_L(x) = d(x, gamma(L)) - L` at the last stored point.
    pub busemann: i64,
    /// `u(gamma(0)) + b_L(x)`.
    pub bound: i64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationReport {
    pub vertex: Vertex,
    pub value: i64,
    pub entries: Vec<RepresentationEntry>,
}

impl RepresentationReport {
    pub fn violations(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.verdict == Verdict::Violated)
            .count()
    }

    pub fn equality_achieved(&self) -> bool {
        self.entries.iter().any(|e| e.verdict == Verdict::Tight)
    }
}

/// Checks `u(x) <= u(gamma(0)) + b_gamma(x)` for each supplied co-ray, with
/// equality expected for a co-ray starting at `x`.
///
/// `b_T` is non-increasing in `T`, so an inequality violated at the last
/// stored `T` is violated in the limit. Tightness is only decided when
/// `b_T(x)` has been constant over the last `tail` steps.
pub fn representation_check(
    field: &ScalarField,
    x: Vertex,
    corays: &[CoRay],
    tail: usize,
) -> Result<RepresentationReport> {
    let window = field.window();
    let x_id = zone_id(field, x)?;
    let ux = field.values()[x_id as usize];
    let budget = window.radius() - window.dist_from_base(x_id);
    let dist = window.bfs(&[x_id], budget);
    let mut entries = Vec::with_capacity(corays.len());
    for ray in corays {
        let start = zone_id(field, ray.start())?;
        let mut busemann = Vec::with_capacity(ray.path.len());
        for (t, &v) in ray.path.iter().enumerate() {
            let id = window.require_id(v, MODULE)?;
            let d = dist[id as usize];
            if d == UNREACHED {
                return Err(Error::Validity {
                    module: MODULE,
                    what: format!("d(x0, {x}) + d({x}, {v})"),
                    value: window.dist_from_base(x_id) as i64 + window.dist_from_base(id) as i64,
                    limit: window.radius() as i64,
                    param: "--radius",
                });
            }
            busemann.push(d as i64 - t as i64);
        }
        let length = ray.len();
        let last = *busemann.last().unwrap();
        let bound = field.values()[start as usize] + last;
        let settled = length >= tail && busemann[length - tail..].iter().all(|&b| b == last);
        let verdict = if ux > bound {
            Verdict::Violated
        } else if !settled {
            Verdict::Inconclusive
        } else if ux == bound {
            Verdict::Tight
        } else {
            Verdict::Strict
        };
        entries.push(RepresentationEntry {
            start: ray.start(),
            length,
            busemann: last,
            bound,
            verdict,
        });
    }
    Ok(RepresentationReport {
        vertex: x,
        value: ux,
        entries,
    })
}

/// Number of zone neighbors of `start` where the field drops by exactly one.
pub fn uniqueness_probe(field: &ScalarField, start: Vertex) -> Result<usize> {
    let id = zone_id(field, start)?;
    if on_boundary(field, id) {
        return Err(Error::Validity {
            module: MODULE,
            what: format!("d(x0, {start})"),
            value: field.window().dist_from_base(id) as i64,
            limit: field.zone() as i64 - 1,
            param: "--zone",
        });
    }
    Ok(descending(field, id).count())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dlfield::{u_point_assigned, u_r};
    use crate::space::{Generator, GraphSpace};

    fn pa(g: Generator, radius: u32, schedule: &[u32], zone: u32) -> ScalarField {
        let w = Arc::new(Window::materialize(GraphSpace::new(g), Vertex::ORIGIN, radius).unwrap());
        u_point_assigned(w, schedule, zone, 4).unwrap().0
    }

    #[test]
    fn line_corays() {
        let f = pa(Generator::Line, 30, &[10, 20, 30], 8);
        let trace = trace_corays(&f, Vertex(2, 0), 64).unwrap();
        assert_eq!(trace.rays.len(), 1);
        let ray = &trace.rays[0];
        assert_eq!(ray.path, (2..=8).map(|x| Vertex(x, 0)).collect::<Vec<_>>());
        assert!(ray.truncated);
        assert!(verify_gradient(ray, &f).unwrap());

        let edge = trace_corays(&f, Vertex(8, 0), 64).unwrap();
        assert_eq!(edge.rays[0].len(), 0);
        assert!(edge.rays[0].truncated);
        assert!(verify_gradient(&edge.rays[0], &f).unwrap());

        assert_eq!(uniqueness_probe(&f, Vertex::ORIGIN).unwrap(), 2);
        assert!(uniqueness_probe(&f, Vertex(8, 0)).is_err());
    }

    #[test]
    fn flat_step_fails_gradient() {
        let f = pa(Generator::Line, 30, &[10, 20, 30], 8);
        let flat = CoRay {
            path: vec![Vertex(1, 0), Vertex(0, 0), Vertex(-1, 0)],
            decrements: vec![-1, 1],
            truncated: false,
        };
        assert!(!verify_gradient(&flat, &f).unwrap());
        let jump = CoRay {
            path: vec![Vertex(1, 0), Vertex(3, 0)],
            decrements: vec![2],
            truncated: false,
        };
        assert!(!verify_gradient(&jump, &f).unwrap());
    }

    #[test]
    fn representation_on_line() {
        let f = pa(Generator::Line, 30, &[10, 20, 30], 8);
        let from_origin = trace_corays(&f, Vertex::ORIGIN, 64).unwrap();
        let right = from_origin
            .rays
            .iter()
            .find(|r| r.path[1] == Vertex(1, 0))
            .unwrap()
            .clone();
        let own = trace_corays(&f, Vertex(2, 0), 64).unwrap().rays;
        let report = representation_check(&f, Vertex(2, 0), &[right, own[0].clone()], 2).unwrap();
        assert_eq!(report.value, -2);
        assert_eq!(report.entries[0].bound, -2);
        assert_eq!(report.entries[0].verdict, Verdict::Tight);
        assert_eq!(report.entries[1].verdict, Verdict::Tight);
        assert!(report.equality_achieved());
    }

    #[test]
    fn tree_descent_branches() {
        // u = -depth from the root: every vertex descends into each child
        let f = pa(Generator::Tree { branching: 2 }, 12, &[6, 8, 10, 12], 5);
        for id in 0..f.window().zone_len(4) as u32 {
            let v = f.window().vertex(id);
            assert_eq!(uniqueness_probe(&f, v).unwrap(), 2, "at {v}");
        }
        let f = pa(Generator::Tree { branching: 1 }, 12, &[6, 8, 10, 12], 5);
        for id in 0..f.window().zone_len(4) as u32 {
            let v = f.window().vertex(id);
            assert_eq!(uniqueness_probe(&f, v).unwrap(), 1, "at {v}");
        }
    }

    #[test]
    fn no_descent_is_an_error() {
        let w = Arc::new(Window::materialize(GraphSpace::new(Generator::Line), Vertex::ORIGIN, 20).unwrap());
        // u^r has a local minimum on the sphere itself
        let f = u_r(w, 3, 6).unwrap();
        assert!(matches!(
            trace_corays(&f, Vertex(3, 0), 8),
            Err(Error::NoDescent(_))
        ));
    }
}
