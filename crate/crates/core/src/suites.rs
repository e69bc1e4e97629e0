//! Seeded invariant suites. Every suite samples its checks from a ChaCha
//! stream, so a (space, suite, trials, seed) tuple always gives the same
//! report.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::corays::{representation_check, trace_corays, verify_gradient, DEFAULT_MAX_PATHS};
use crate::dlfield::{busemann, gromov_check, horofunction, u_point_assigned, ScalarField};
use crate::error::{Error, Result};
use crate::pseudometric::{
    anti_triangle_check, base_lipschitz_check, equivalence_classes, point_assigned_family, rho_from_fields,
    FieldParams,
};
use crate::space::{Generator, GraphSpace, Vertex};
use crate::window::Window;

const MODULE: &str = "suites";

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TRIALS: usize = 200;
const SAMPLE_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Monotonicity,
    AntiTriangle,
    Lipschitz,
    Gromov,
    Corays,
    Minimality,
    Pseudometric,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Monotonicity,
        Suite::AntiTriangle,
        Suite::Lipschitz,
        Suite::Gromov,
        Suite::Corays,
        Suite::Minimality,
        Suite::Pseudometric,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::AntiTriangle => "anti-triangle",
            Suite::Lipschitz => "lipschitz",
            Suite::Gromov => "gromov",
            Suite::Corays => "corays",
            Suite::Minimality => "minimality",
            Suite::Pseudometric => "pseudometric",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
                Error::domain(MODULE, format!("unknown suite `{s}` (one of {})", names.join(", ")))
            })
    }
}

/// Window radius, zone and radius step used by the suites on a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sizing {
    pub radius: u32,
    pub zone: u32,
    pub step: u32,
}

impl Sizing {
    pub fn for_space(space: &GraphSpace) -> Self {
        match space.generator {
            Generator::Tree { branching } if branching >= 2 => {
                // keep the window near 10^5 vertices
                let mut radius = 1;
                while (branching as u64).pow(radius + 1) <= 100_000 {
                    radius += 1;
                }
                Sizing {
                    radius,
                    zone: (radius / 4).max(1),
                    step: 1,
                }
            }
            Generator::Grid2d => Sizing {
                radius: 32,
                zone: 8,
                step: 2,
            },
            _ => Sizing {
                radius: 60,
                zone: 12,
                step: 2,
            },
        }
    }

    pub fn params(&self) -> FieldParams {
        FieldParams::stepped(self.radius, self.step, self.zone, 2 * self.zone)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub space: String,
    pub seed: u64,
    pub trials: usize,
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<Value>,
}

impl SuiteReport {
    fn new(suite: Suite, space: &GraphSpace, seed: u64, trials: usize) -> Self {
        SuiteReport {
            suite,
            space: space.generator.to_string(),
            seed,
            trials,
            checked: 0,
            skipped: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run(suite: Suite, space: GraphSpace, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(suite, &space, seed, trials);
    let sizing = Sizing::for_space(&space);
    match suite {
        Suite::Monotonicity => monotonicity(&space, trials, &mut rng, &mut report)?,
        Suite::Minimality => minimality(&space, sizing, trials, &mut rng, &mut report)?,
        Suite::Pseudometric => {
            for _ in 0..trials {
                let family = Family::sample(&space, sizing, &mut rng)?;
                pseudometric(&family, &mut report)?;
            }
        }
        _ => {
            let family = Family::sample(&space, sizing, &mut rng)?;
            match suite {
                Suite::AntiTriangle => anti_triangle(&family, trials, &mut rng, &mut report)?,
                Suite::Lipschitz => lipschitz(&family, trials, &mut rng, &mut report)?,
                Suite::Gromov => gromov(&family, trials, &mut rng, &mut report),
                Suite::Corays => corays(&family, trials, &mut rng, &mut report)?,
                _ => unreachable!(),
            }
        }
    }
    Ok(report)
}

/// Point-assigned fields at a random sample close enough to the origin that
/// every sample point lies in every field's zone.
struct Family {
    fields: Vec<ScalarField>,
}

impl Family {
    fn sample(space: &GraphSpace, sizing: Sizing, rng: &mut ChaCha8Rng) -> Result<Self> {
        let near = Window::materialize(*space, Vertex::ORIGIN, sizing.zone / 2)?;
        let mut pool = near.vertices().to_vec();
        pool.shuffle(rng);
        pool.truncate(SAMPLE_SIZE);
        pool.sort();
        let fields = point_assigned_family(*space, &pool, &sizing.params())?;
        Ok(Family { fields })
    }

    fn pick<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a ScalarField {
        &self.fields[rng.gen_range(0..self.fields.len())]
    }
}

/// Radius of the window used for monotonicity sampling.
fn monotonicity_radius(space: &GraphSpace) -> u32 {
    match space.generator {
        Generator::Tree { branching } if branching >= 2 => Sizing::for_space(space).radius,
        Generator::Grid2d => 30,
        _ => 48,
    }
}

/// `u^{r1}(x) <= u^{r2}(x) <= d(x0, x)` for `d(x0, x) <= r1 < r2 <= R`.
fn monotonicity(space: &GraphSpace, trials: usize, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    let radius = monotonicity_radius(space);
    let window = Window::materialize(*space, Vertex::ORIGIN, radius)?;
    let rows: Vec<Vec<u32>> = (0..=radius)
        .map(|r| window.dist_field(&window.sphere(r)?))
        .collect::<Result<_>>()?;
    let candidates: Vec<u32> = (0..window.len() as u32)
        .filter(|&id| window.dist_from_base(id) < radius)
        .collect();
    for _ in 0..trials {
        let x = *candidates.choose(rng).unwrap();
        let d = window.dist_from_base(x);
        let r1 = rng.gen_range(d..radius);
        let r2 = rng.gen_range(r1 + 1..=radius);
        let u = |r: u32| rows[r as usize][x as usize] as i64 - r as i64;
        let (u1, u2) = (u(r1), u(r2));
        report.checked += 1;
        if u1 > u2 || u2 > d as i64 {
            report.violations.push(json!({
                "x": window.vertex(x), "r1": r1, "r2": r2, "u_r1": u1, "u_r2": u2, "d": d,
            }));
        }
    }
    Ok(())
}

fn anti_triangle(family: &Family, trials: usize, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for _ in 0..trials {
        let (fx, fy, fz) = (family.pick(rng), family.pick(rng), family.pick(rng));
        match anti_triangle_check(fx, fy, fz) {
            Ok(true) => report.checked += 1,
            Ok(false) => {
                report.checked += 1;
                report.violations.push(json!({
                    "x": fx.base(), "y": fy.base(), "z": fz.base(),
                    "u_x(y)": fx.value_at(fy.base()), "u_y(z)": fy.value_at(fz.base()),
                    "u_x(z)": fx.value_at(fz.base()),
                }));
            }
            Err(Error::Domain { .. }) => report.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn lipschitz(family: &Family, trials: usize, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for f in &family.fields {
        for (a, b) in f.lipschitz_violations() {
            report.violations.push(json!({ "base": f.base(), "edge": [a, b] }));
        }
    }
    for _ in 0..trials {
        let (fa, fb) = (family.pick(rng), family.pick(rng));
        let r = base_lipschitz_check(fa, fb)?;
        if r.compared == 0 {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        if !r.holds {
            report.violations.push(json!({
                "x0": fa.base(), "x1": fb.base(),
                "sup_difference": r.sup_difference, "distance": r.distance,
            }));
        }
    }
    Ok(())
}

/// Five integer levels drawn from the range of the field's stable values.
pub fn sample_levels(field: &ScalarField, rng: &mut impl Rng) -> Vec<i64> {
    let stable = (0..field.len() as u32).filter(|&id| field.is_stable(id));
    let values: Vec<i64> = stable.map(|id| field.values()[id as usize]).collect();
    let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
        return Vec::new();
    };
    (0..5).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn gromov(family: &Family, trials: usize, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    for _ in 0..trials {
        let f = family.pick(rng);
        let ts = sample_levels(f, rng);
        let g = gromov_check(f, &ts);
        report.checked += g.checked;
        report.skipped += g.skipped;
        for v in g.violations {
            report.violations.push(json!({ "base": f.base(), "violation": v }));
        }
    }
}

fn corays(family: &Family, trials: usize, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for _ in 0..trials {
        let f = family.pick(rng);
        let inner = f.window().zone_len(f.zone().saturating_sub(1));
        let id = rng.gen_range(0..inner as u32);
        let x = f.window().vertex(id);
        if !f.is_stable(id) {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let trace = match trace_corays(f, x, DEFAULT_MAX_PATHS) {
            Ok(t) => t,
            Err(Error::NoDescent(_)) => {
                report.violations.push(json!({ "base": f.base(), "x": x, "failure": "no descent" }));
                continue;
            }
            Err(e) => return Err(e),
        };
        for ray in &trace.rays {
            if !verify_gradient(ray, f)? {
                report.violations.push(json!({ "base": f.base(), "x": x, "failure": "gradient", "path": ray.path }));
            }
        }
        let rep = representation_check(f, x, &trace.rays[..1], 1)?;
        if rep.violations() > 0 || !rep.equality_achieved() {
            report.violations.push(json!({ "base": f.base(), "x": x, "failure": "representation", "report": rep }));
        }
    }
    Ok(())
}

fn pseudometric(family: &Family, report: &mut SuiteReport) -> Result<()> {
    let rho = rho_from_fields(&family.fields)?;
    report.checked += 1;
    for v in rho.axiom_violations() {
        let points: Vec<Vertex> = v.indices.iter().map(|&i| rho.sample[i]).collect();
        report.violations.push(json!({ "axiom": v.axiom, "points": points }));
    }
    match equivalence_classes(&family.fields) {
        Ok(_) => {}
        Err(Error::Inconsistent(msg)) => report.violations.push(json!({ "axiom": "classes", "detail": msg })),
        Err(e) => return Err(e),
    }
    Ok(())
}

/// A geodesic ray through the window, starting in the zone, for the spaces
/// where one can be written down. `None` when the space has no recipe.
pub fn random_ray(window: &Window, zone: u32, rng: &mut impl Rng) -> Option<Vec<Vertex>> {
    let space = window.space().generator;
    let inner: Vec<Vertex> = window.vertices()[..window.zone_len(zone)].to_vec();
    let reach = window.radius();
    let mut path = Vec::new();
    match space {
        Generator::Line | Generator::PendantLine | Generator::HalfLine | Generator::Tree { branching: 1 } => {
            let spine: Vec<&Vertex> = inner.iter().filter(|v| v.1 == 0).collect();
            let s = **spine.choose(rng)?;
            let two_sided = matches!(space, Generator::Line | Generator::PendantLine);
            let dir = if two_sided && rng.gen_bool(0.5) { -1 } else { 1 };
            for t in 0..=reach as i64 {
                path.push(Vertex(s.0 + dir * t, 0));
            }
        }
        Generator::Tree { branching } => {
            let s = *inner.choose(rng)?;
            let up = rng.gen_range(0..=s.0);
            let mut v = s;
            path.push(v);
            for _ in 0..up {
                v = Vertex(v.0 - 1, v.1 / branching as i64);
                path.push(v);
            }
            let b = branching as i64;
            let came_from = (up > 0).then(|| path[path.len() - 2]);
            while path.len() <= reach as usize {
                let mut child = Vertex(v.0 + 1, v.1 * b + rng.gen_range(0..b));
                while Some(child) == came_from {
                    child = Vertex(v.0 + 1, v.1 * b + rng.gen_range(0..b));
                }
                v = child;
                path.push(v);
            }
        }
        Generator::HGraph => {
            let s = *inner
                .iter()
                .filter(|v| v.1 == 0 || v.0.abs() >= v.1)
                .collect::<Vec<_>>()
                .choose(rng)?;
            let dir = match s.0.signum() {
                0 => if rng.gen_bool(0.5) { 1 } else { -1 },
                d => d,
            };
            let mut v = *s;
            path.push(v);
            while v.1 > 0 {
                v = Vertex(v.0, v.1 - 1);
                path.push(v);
            }
            while path.len() <= reach as usize {
                v = Vertex(v.0 + dir, 0);
                path.push(v);
            }
        }
        Generator::Grid2d => {
            let s = *inner.choose(rng)?;
            let (dx, dy) = *[(1, 0), (-1, 0), (0, 1), (0, -1)].choose(rng)?;
            for t in 0..=reach as i64 {
                path.push(Vertex(s.0 + dx * t, s.1 + dy * t));
            }
        }
        Generator::Cylinder { .. } => {
            let s = *inner.choose(rng)?;
            let dir = if rng.gen_bool(0.5) { 1 } else { -1 };
            for t in 0..=reach as i64 {
                path.push(Vertex(s.0, s.1 + dir * t));
            }
        }
        Generator::Stick { .. } => {
            let s = *inner.iter().filter(|v| v.1 > 0).collect::<Vec<_>>().choose(rng)?;
            for t in 0..=reach as i64 {
                path.push(Vertex(s.0, s.1 + t));
            }
        }
    }
    // keep the stretch whose far points still certify distances on the zone
    let keep = path
        .iter()
        .take_while(|&&v| {
            window
                .id_of(v)
                .is_some_and(|id| window.dist_from_base(id) + 2 * zone <= window.radius())
        })
        .count();
    path.truncate(keep);
    (path.len() > 2).then_some(path)
}

/// `u_x0 <= b - b(x0)` (even trials, Busemann) or `u_x0 <= h` (odd trials,
/// horofunction along the ray) on vertices stable in both fields.
fn minimality(
    space: &GraphSpace,
    sizing: Sizing,
    trials: usize,
    rng: &mut ChaCha8Rng,
    report: &mut SuiteReport,
) -> Result<()> {
    let window = Arc::new(Window::materialize(*space, Vertex::ORIGIN, sizing.radius)?);
    let params = sizing.params();
    let (u, _) = u_point_assigned(window.clone(), &params.schedule, sizing.zone, params.tail)?;
    for trial in 0..trials {
        let Some(ray) = random_ray(&window, sizing.zone, rng) else {
            report.skipped += 1;
            continue;
        };
        let last = ray.len() as u32 - 1;
        let schedule: Vec<u32> = (1..=last).collect();
        let tail = (last / 3).max(1);
        let (g, _) = if trial % 2 == 0 {
            busemann(window.clone(), &ray, &schedule, sizing.zone, tail)?
        } else {
            horofunction(window.clone(), &ray[1..], sizing.zone, tail).or_else(|_| {
                // the ray may approach the base first; keep the increasing part
                let ids: Vec<Vertex> = monotone_tail(&window, &ray[1..]);
                horofunction(window.clone(), &ids, sizing.zone, tail)
            })?
        };
        let Some(at_base) = g.stable_value_at(Vertex::ORIGIN) else {
            report.skipped += 1;
            continue;
        };
        for id in 0..u.len() as u32 {
            if !(u.is_stable(id) && g.is_stable(id)) {
                continue;
            }
            report.checked += 1;
            let (uv, gv) = (u.values()[id as usize], g.values()[id as usize] - at_base);
            if uv > gv {
                report.violations.push(json!({
                    "ray_start": ray[0], "kind": g.kind(), "x": window.vertex(id), "u": uv, "normalized": gv,
                }));
            }
        }
    }
    Ok(())
}

/// Suffix of `points` along which `d(x0, .)` increases strictly.
fn monotone_tail(window: &Window, points: &[Vertex]) -> Vec<Vertex> {
    let d: Vec<u32> = points
        .iter()
        .map(|&p| window.id_of(p).map_or(u32::MAX, |id| window.dist_from_base(id)))
        .collect();
    let mut start = d.len().saturating_sub(1);
    while start > 0 && d[start - 1] < d[start] {
        start -= 1;
    }
    points[start..].to_vec()
}
