//! The pseudo-metric `rho(x, y) = -(u_x(y) + u_y(x)) / 2` built from
//! point-assigned fields, and the checks that go with it.
//!
//! `rho` is stored doubled so that every comparison stays in integers.

use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::dlfield::{u_point_assigned, ScalarField};
use crate::error::{Error, Result};
use crate::space::{GraphSpace, Scale, Vertex};
use crate::window::Window;

const MODULE: &str = "pseudometric";

pub const WINDOW_EVIDENCE: &str = "WINDOW-EVIDENCE";

/// Parameters shared by every point-assigned field of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldParams {
    pub radius: u32,
    pub schedule: Vec<u32>,
    pub zone: u32,
    pub tail: u32,
}

impl FieldParams {
    /// Schedule `step, 2 step, ...` up to `radius`.
    pub fn stepped(radius: u32, step: u32, zone: u32, tail: u32) -> Self {
        let step = step.max(1);
        let schedule = (1..=radius / step).map(|i| i * step).collect();
        FieldParams {
            radius,
            schedule,
            zone,
            tail,
        }
    }
}

pub fn point_assigned_at(space: GraphSpace, base: Vertex, params: &FieldParams) -> Result<ScalarField> {
    let window = Arc::new(Window::materialize(space, base, params.radius)?);
    Ok(u_point_assigned(window, &params.schedule, params.zone, params.tail)?.0)
}

/// One point-assigned field per sample point, each on its own window.
pub fn point_assigned_family(
    space: GraphSpace,
    sample: &[Vertex],
    params: &FieldParams,
) -> Result<Vec<ScalarField>> {
    sample
        .par_iter()
        .map(|&v| point_assigned_at(space, v, params))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RhoMatrix {
    pub sample: Vec<Vertex>,
    pub twice_rho: Vec<Vec<i64>>,
    pub stable: Vec<Vec<bool>>,
    /// Hop distances `d(x_i, x_j)`.
    pub distance: Vec<Vec<i64>>,
    pub scale: Scale,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub indices: Vec<usize>,
}

impl RhoMatrix {
    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// `rho(x_i, x_j)` in the units of the space.
    pub fn rho(&self, i: usize, j: usize) -> Ratio<i64> {
        self.scale.length(self.twice_rho[i][j]) / 2
    }

    /// Pseudo-metric axioms and `rho <= d`, on stable entries only.
    pub fn axiom_violations(&self) -> Vec<AxiomViolation> {
        let n = self.len();
        let mut out = Vec::new();
        let mut push = |axiom, indices: Vec<usize>| out.push(AxiomViolation { axiom, indices });
        for i in 0..n {
            if self.stable[i][i] && self.twice_rho[i][i] != 0 {
                push("zero diagonal", vec![i]);
            }
            for j in 0..n {
                if !self.stable[i][j] {
                    continue;
                }
                let r = self.twice_rho[i][j];
                if r != self.twice_rho[j][i] {
                    push("symmetry", vec![i, j]);
                }
                if r < 0 {
                    push("nonnegativity", vec![i, j]);
                }
                if r > 2 * self.distance[i][j] {
                    push("rho <= d", vec![i, j]);
                }
                for k in 0..n {
                    if self.stable[j][k]
                        && self.stable[i][k]
                        && self.twice_rho[i][k] > r + self.twice_rho[j][k]
                    {
                        push("triangle", vec![i, j, k]);
                    }
                }
            }
        }
        out
    }
}

fn stable_value(field: &ScalarField, v: Vertex) -> Result<Option<i64>> {
    let id = field.id_of(v).ok_or_else(|| Error::Validity {
        module: MODULE,
        what: format!("d({}, {v})", field.base()),
        value: field
            .window()
            .id_of(v)
            .map_or(i64::MAX, |id| field.window().dist_from_base(id) as i64),
        limit: field.zone() as i64,
        param: "--zone",
    })?;
    Ok(field.is_stable(id).then(|| field.values()[id as usize]))
}

/// Doubled `rho` matrix from point-assigned fields based at the sample points.
pub fn rho_from_fields(fields: &[ScalarField]) -> Result<RhoMatrix> {
    let sample: Vec<Vertex> = fields.iter().map(ScalarField::base).collect();
    let n = sample.len();
    let scale = fields.first().map_or(Scale::ONE, |f| f.window().space().scale);
    let mut twice_rho = vec![vec![0; n]; n];
    let mut stable = vec![vec![false; n]; n];
    let mut distance = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let uij = stable_value(&fields[i], sample[j])?;
            let uji = stable_value(&fields[j], sample[i])?;
            let w = fields[i].window();
            distance[i][j] = w.dist_from_base(w.id_of(sample[j]).unwrap()) as i64;
            let (a, b) = (
                fields[i].value_at(sample[j]).unwrap(),
                fields[j].value_at(sample[i]).unwrap(),
            );
            twice_rho[i][j] = -(a + b);
            stable[i][j] = uij.is_some() && uji.is_some();
        }
    }
    Ok(RhoMatrix {
        sample,
        twice_rho,
        stable,
        distance,
        scale,
    })
}

/// Materializes one window per sample point (radius from `params`) and
/// assembles the doubled `rho` matrix. The sample must fit in each zone.
pub fn rho_matrix(
    space: GraphSpace,
    sample: &[Vertex],
    params: &FieldParams,
) -> Result<(RhoMatrix, Vec<ScalarField>)> {
    if sample.is_empty() {
        return Err(Error::Empty {
            module: MODULE,
            what: "sample",
        });
    }
    let fields = point_assigned_family(space, sample, params)?;
    Ok((rho_from_fields(&fields)?, fields))
}

/// `u_x(y) + u_y(z) <= u_x(z)` for the bases `x, y, z` of the three fields.
pub fn anti_triangle_check(fx: &ScalarField, fy: &ScalarField, fz: &ScalarField) -> Result<bool> {
    let need = |f: &ScalarField, v: Vertex| -> Result<i64> {
        stable_value(f, v)?.ok_or_else(|| {
            Error::domain(
                MODULE,
                format!("u_{}({v}) is not stable; extend the r-schedule", f.base()),
            )
        })
    };
    let (y, z) = (fy.base(), fz.base());
    Ok(need(fx, y)? + need(fy, z)? <= need(fx, z)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LipschitzReport {
    pub sup_difference: i64,
    pub distance: i64,
    pub compared: usize,
    pub holds: bool,
}

/// `sup |u_{x0} - u_{x1}| <= d(x0, x1)` over the stable part of the shared zone.
pub fn base_lipschitz_check(fa: &ScalarField, fb: &ScalarField) -> Result<LipschitzReport> {
    let wa = fa.window();
    let distance = wa.dist_from_base(wa.require_id(fb.base(), MODULE)?) as i64;
    let mut sup = 0;
    let mut compared = 0;
    for id in 0..fa.len() as u32 {
        if !fa.is_stable(id) {
            continue;
        }
        let v = wa.vertex(id);
        if let Some(b) = fb.stable_value_at(v) {
            sup = sup.max((fa.values()[id as usize] - b).abs());
            compared += 1;
        }
    }
    Ok(LipschitzReport {
        sup_difference: sup,
        distance,
        compared,
        holds: sup <= distance,
    })
}

/// `Some(c)` when `u_a = u_b + c` on every vertex stable in both zones.
pub fn constant_difference(fa: &ScalarField, fb: &ScalarField) -> Option<i64> {
    let wa = fa.window();
    let mut diff = None;
    for id in 0..fa.len() as u32 {
        if !fa.is_stable(id) {
            continue;
        }
        if let Some(b) = fb.stable_value_at(wa.vertex(id)) {
            let d = fa.values()[id as usize] - b;
            match diff {
                None => diff = Some(d),
                Some(c) if c != d => return None,
                _ => {}
            }
        }
    }
    diff
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassPartition {
    pub blocks: Vec<Vec<Vertex>>,
    /// `offsets[b][k]`: `c` with `u_rep = u_member + c` for member `k` of block `b`.
    pub offsets: Vec<Vec<i64>>,
    pub evidence: &'static str,
}

/// Groups sample points whose fields differ by a constant on the window, and
/// cross-checks the grouping against `{rho = 0}`.
pub fn equivalence_classes(fields: &[ScalarField]) -> Result<ClassPartition> {
    let rho = rho_from_fields(fields)?;
    let n = fields.len();
    for i in 0..n {
        for j in i + 1..n {
            if !rho.stable[i][j] {
                continue;
            }
            let constant = constant_difference(&fields[i], &fields[j]).is_some();
            let zero = rho.twice_rho[i][j] == 0;
            if constant != zero {
                return Err(Error::Inconsistent(format!(
                    "{} and {}: constant difference {constant}, rho = 0 {zero}",
                    rho.sample[i], rho.sample[j]
                )));
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut blocks: Vec<Vec<Vertex>> = Vec::new();
    let mut offsets: Vec<Vec<i64>> = Vec::new();
    'points: for i in 0..n {
        for (b, &rep) in reps.iter().enumerate() {
            if let Some(c) = constant_difference(&fields[rep], &fields[i]) {
                blocks[b].push(rho.sample[i]);
                offsets[b].push(c);
                continue 'points;
            }
        }
        reps.push(i);
        blocks.push(vec![rho.sample[i]]);
        offsets.push(vec![0]);
    }
    Ok(ClassPartition {
        blocks,
        offsets,
        evidence: WINDOW_EVIDENCE,
    })
}
