//! Distance-like fields on a window: the approximants `u^r`, point-assigned
//! limits, Busemann functions, horofunctions and general set-sequence limits.
//!
//! A field stores integer hop values on the zone `B_rho(x0)` of its window
//! (the first `zone_len` window ids). Limits are reported as the last value
//! of the approximating sequence plus a per-vertex stabilization record.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{SpaceSpec, Vertex};
use crate::window::{BallSearch, VertexSet, Window, UNREACHED};

const MODULE: &str = "dlfield";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    UR,
    PointAssigned,
    Busemann,
    Horo,
    SetLimit,
}

/// Truncation certificate for a limit taken along `schedule`.
///
/// `tail` is measured in schedule units: a vertex is stable when its value
/// has not changed for schedule parameters in `[last - tail, last]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schedule: Vec<u32>,
    pub tail: u32,
    pub last_change: Vec<u32>,
    /// `max - min` of the tracked sequence over the tail.
    pub oscillation: Vec<i64>,
    pub stable: Vec<bool>,
}

impl ConvergenceReport {
    /// Summarizes `rows[i][v]`, the value at vertex `v` for `schedule[i]`.
    /// Vertex `v` only takes part from entry `first[v]` on.
    fn summarize(
        schedule: Vec<u32>,
        tail: u32,
        rows: &[Vec<i64>],
        first: &[usize],
    ) -> (Vec<i64>, Self) {
        let n = rows.first().map_or(0, Vec::len);
        let last_param = *schedule.last().expect("non-empty schedule");
        let tail_from = last_param.saturating_sub(tail);
        let mut last_change = vec![0; n];
        let mut oscillation = vec![0i64; n];
        let mut stable = vec![false; n];
        for v in 0..n {
            let start = first[v];
            last_change[v] = schedule[start];
            let (mut lo, mut hi) = (i64::MAX, i64::MIN);
            for i in start..rows.len() {
                if i > start && rows[i][v] != rows[i - 1][v] {
                    last_change[v] = schedule[i];
                }
                if schedule[i] >= tail_from {
                    lo = lo.min(rows[i][v]);
                    hi = hi.max(rows[i][v]);
                }
            }
            oscillation[v] = hi - lo;
            stable[v] = last_change[v] <= tail_from && last_param - schedule[start] >= tail;
        }
        let values = rows.last().cloned().unwrap_or_default();
        (
            values,
            ConvergenceReport {
                schedule,
                tail,
                last_change,
                oscillation,
                stable,
            },
        )
    }

    fn exact(param: u32, n: usize) -> Self {
        ConvergenceReport {
            schedule: vec![param],
            tail: 0,
            last_change: vec![param; n],
            oscillation: vec![0; n],
            stable: vec![true; n],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    window: Arc<Window>,
    kind: FieldKind,
    zone: u32,
    values: Vec<i64>,
    convergence: ConvergenceReport,
}

impl ScalarField {
    /// Assembles a field from raw parts, checking lengths only.
    pub fn from_parts(
        window: Arc<Window>,
        kind: FieldKind,
        zone: u32,
        values: Vec<i64>,
        convergence: ConvergenceReport,
    ) -> Result<Self> {
        check_zone(&window, zone)?;
        let n = window.zone_len(zone);
        if values.len() != n
            || convergence.stable.len() != n
            || convergence.last_change.len() != n
            || convergence.oscillation.len() != n
        {
            return Err(Error::domain(
                MODULE,
                format!("field has {} values but the zone holds {n} vertices", values.len()),
            ));
        }
        Ok(ScalarField {
            window,
            kind,
            zone,
            values,
            convergence,
        })
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn zone(&self) -> u32 {
        self.zone
    }

    pub fn base(&self) -> Vertex {
        self.window.base()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn convergence(&self) -> &ConvergenceReport {
        &self.convergence
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn in_zone(&self, id: u32) -> bool {
        (id as usize) < self.values.len()
    }

    pub fn value(&self, id: u32) -> Option<i64> {
        self.values.get(id as usize).copied()
    }

    pub fn is_stable(&self, id: u32) -> bool {
        self.convergence
            .stable
            .get(id as usize)
            .copied()
            .unwrap_or(false)
    }

    pub fn id_of(&self, v: Vertex) -> Option<u32> {
        self.window.id_of(v).filter(|&id| self.in_zone(id))
    }

    pub fn value_at(&self, v: Vertex) -> Option<i64> {
        self.id_of(v).and_then(|id| self.value(id))
    }

    /// Value at `v` provided it is in the zone and stable.
    pub fn stable_value_at(&self, v: Vertex) -> Option<i64> {
        self.id_of(v)
            .filter(|&id| self.is_stable(id))
            .and_then(|id| self.value(id))
    }

    /// Field shifted so that it vanishes at the window base.
    pub fn normalized_values(&self) -> Vec<i64> {
        let at_base = self.values[0];
        self.values.iter().map(|v| v - at_base).collect()
    }

    /// Zone edges across which the values differ by more than one.
    pub fn lipschitz_violations(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for u in 0..self.len() as u32 {
            for &w in self.window.neighbors(u) {
                if u < w && self.in_zone(w) && (self.values[u as usize] - self.values[w as usize]).abs() > 1 {
                    out.push((self.window.vertex(u), self.window.vertex(w)));
                }
            }
        }
        out
    }

    pub fn export(&self) -> FieldExport {
        let w = &self.window;
        FieldExport {
            space: w.space().spec(),
            base: w.base(),
            radius: w.radius(),
            zone: self.zone,
            kind: self.kind,
            schedule: self.convergence.schedule.clone(),
            tail: self.convergence.tail,
            vertices: (0..self.len())
                .map(|i| FieldRow {
                    id: i as u32,
                    coords: w.vertex(i as u32),
                    value: self.values[i],
                    stable: self.convergence.stable[i],
                    last_change: self.convergence.last_change[i],
                    oscillation: self.convergence.oscillation[i],
                })
                .collect(),
        }
    }

    /// Rebuilds a field (and its window) from an export.
    pub fn from_export(export: &FieldExport) -> Result<Self> {
        let space = export.space.build()?;
        let window = Arc::new(Window::materialize(space, export.base, export.radius)?);
        Self::from_export_in(window, export)
    }

    pub fn from_export_in(window: Arc<Window>, export: &FieldExport) -> Result<Self> {
        let n = window.zone_len(export.zone);
        if export.vertices.len() != n {
            return Err(Error::domain(
                MODULE,
                format!("export lists {} vertices, zone holds {n}", export.vertices.len()),
            ));
        }
        for row in &export.vertices {
            if window.id_of(row.coords) != Some(row.id) {
                return Err(Error::domain(
                    MODULE,
                    format!("export row {} does not match window vertex {}", row.id, row.coords),
                ));
            }
        }
        let convergence = ConvergenceReport {
            schedule: export.schedule.clone(),
            tail: export.tail,
            last_change: export.vertices.iter().map(|r| r.last_change).collect(),
            oscillation: export.vertices.iter().map(|r| r.oscillation).collect(),
            stable: export.vertices.iter().map(|r| r.stable).collect(),
        };
        let values = export.vertices.iter().map(|r| r.value).collect();
        Self::from_parts(window, export.kind, export.zone, values, convergence)
    }
}

/// Field export: one row per zone vertex, in window order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldExport {
    pub space: SpaceSpec,
    pub base: Vertex,
    pub radius: u32,
    pub zone: u32,
    pub kind: FieldKind,
    pub schedule: Vec<u32>,
    pub tail: u32,
    pub vertices: Vec<FieldRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub id: u32,
    pub coords: Vertex,
    pub value: i64,
    pub stable: bool,
    pub last_change: u32,
    pub oscillation: i64,
}

fn validity(what: impl Into<String>, value: u32, limit: i64, param: &'static str) -> Error {
    Error::Validity {
        module: MODULE,
        what: what.into(),
        value: value as i64,
        limit,
        param,
    }
}

fn check_zone(window: &Window, zone: u32) -> Result<()> {
    if zone > window.radius() {
        return Err(validity("zone", zone, window.radius() as i64, "--radius"));
    }
    Ok(())
}

/// `d(x, S_r)` is exact on `B_rho` when `rho <= r <= R` or `r + 2 rho <= R`.
fn check_sphere_radius(window: &Window, r: u32, zone: u32) -> Result<()> {
    let big_r = window.radius();
    if r > big_r {
        return Err(validity("r", r, big_r as i64, "--radius"));
    }
    if zone > r && r + 2 * zone > big_r {
        return Err(validity(
            format!("r + 2*zone (r = {r} < zone = {zone})"),
            r + 2 * zone,
            big_r as i64,
            "--radius",
        ));
    }
    Ok(())
}

/// `d(x, p)` is exact on `B_rho` when `d(x0, p) + 2 rho <= R`.
fn check_far_point(window: &Window, d: u32, zone: u32, what: &str) -> Result<()> {
    if d + 2 * zone > window.radius() {
        return Err(validity(
            format!("d(x0, {what}) + 2*zone"),
            d + 2 * zone,
            window.radius() as i64,
            "--radius",
        ));
    }
    Ok(())
}

fn check_increasing(schedule: &[u32], what: &str) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::domain(MODULE, format!("empty {what}")));
    }
    if let Some(pair) = schedule.windows(2).find(|p| p[0] >= p[1]) {
        return Err(Error::domain(
            MODULE,
            format!("{what} must be strictly increasing ({} then {})", pair[0], pair[1]),
        ));
    }
    Ok(())
}

fn zone_row(window: &Window, dist: &[u32], zone: u32, shift: i64) -> Vec<i64> {
    dist[..window.zone_len(zone)]
        .iter()
        .map(|&d| {
            debug_assert_ne!(d, UNREACHED);
            d as i64 - shift
        })
        .collect()
}

fn u_r_row(window: &Window, r: u32, zone: u32) -> Result<Vec<i64>> {
    check_sphere_radius(window, r, zone)?;
    let dist = window.dist_field(&window.sphere(r)?)?;
    Ok(zone_row(window, &dist, zone, r as i64))
}

/// `u^r(x) = d(x, S_r(x0)) - r` on the zone.
pub fn u_r(window: Arc<Window>, r: u32, zone: u32) -> Result<ScalarField> {
    check_zone(&window, zone)?;
    let values = u_r_row(&window, r, zone)?;
    let convergence = ConvergenceReport::exact(r, values.len());
    Ok(ScalarField {
        window,
        kind: FieldKind::UR,
        zone,
        values,
        convergence,
    })
}

/// Point-assigned limit `u_{x0} = lim u^r` taken as the running maximum of
/// `u^r` over an increasing schedule.
///
/// At a vertex `x` only radii `r >= d(x0, x)` enter the running maximum:
/// `u^r(x)` is non-decreasing in `r` from there on, and `d(x, S_r)` is exact
/// for every such `r <= R`. The last radius must reach the zone.
pub fn u_point_assigned(
    window: Arc<Window>,
    schedule: &[u32],
    zone: u32,
    tail: u32,
) -> Result<(ScalarField, ConvergenceReport)> {
    check_zone(&window, zone)?;
    check_increasing(schedule, "r-schedule")?;
    let last = *schedule.last().unwrap();
    if last > window.radius() {
        return Err(validity("max r", last, window.radius() as i64, "--radius"));
    }
    if last < zone {
        return Err(Error::Validity {
            module: MODULE,
            what: "zone".into(),
            value: zone as i64,
            limit: last as i64,
            param: "--r-max",
        });
    }
    let n = window.zone_len(zone);
    let mut rows: Vec<Vec<i64>> = schedule
        .par_iter()
        .map(|&r| -> Result<Vec<i64>> {
            let dist = window.dist_field(&window.sphere(r)?)?;
            Ok(zone_row(&window, &dist, zone, r as i64))
        })
        .collect::<Result<_>>()?;
    let first: Vec<usize> = (0..n as u32)
        .map(|v| {
            let d = window.dist_from_base(v);
            schedule.partition_point(|&r| r < d)
        })
        .collect();
    for v in 0..n {
        for i in first[v] + 1..rows.len() {
            rows[i][v] = rows[i][v].max(rows[i - 1][v]);
        }
    }
    let (values, report) = ConvergenceReport::summarize(schedule.to_vec(), tail, &rows, &first);
    let field = ScalarField {
        window,
        kind: FieldKind::PointAssigned,
        zone,
        values,
        convergence: report.clone(),
    };
    Ok((field, report))
}

/// Checks that `path` is an edge path with `d(path[0], path[t]) = t`,
/// using a breadth-first search certified exact inside the window.
pub fn verify_geodesic(window: &Window, path: &[Vertex]) -> Result<Vec<u32>> {
    let ids = path
        .iter()
        .map(|&v| window.require_id(v, MODULE))
        .collect::<Result<Vec<_>>>()?;
    for (step, pair) in ids.windows(2).enumerate() {
        if !window.neighbors(pair[0]).contains(&pair[1]) {
            return Err(Error::NonGeodesic {
                step: step + 1,
                detail: format!("{} and {} are not adjacent", window.vertex(pair[0]), window.vertex(pair[1])),
            });
        }
    }
    let Some(&start) = ids.first() else {
        return Err(Error::Empty {
            module: MODULE,
            what: "path",
        });
    };
    let budget = window.radius() - window.dist_from_base(start);
    let dist = window.bfs(&[start], budget);
    for (t, &id) in ids.iter().enumerate() {
        let d = dist[id as usize];
        if d == UNREACHED {
            return Err(validity(
                format!("d(x0, path[0]) + {t}"),
                window.dist_from_base(start) + t as u32,
                window.radius() as i64,
                "--radius",
            ));
        }
        if d as usize != t {
            return Err(Error::NonGeodesic {
                step: t,
                detail: format!("d(path[0], path[{t}]) = {d}"),
            });
        }
    }
    Ok(ids)
}

/// Busemann approximants `b_T(x) = d(x, ray(T)) - T` over the schedule of `T`.
pub fn busemann(
    window: Arc<Window>,
    ray: &[Vertex],
    schedule: &[u32],
    zone: u32,
    tail: u32,
) -> Result<(ScalarField, ConvergenceReport)> {
    check_zone(&window, zone)?;
    check_increasing(schedule, "T-schedule")?;
    let ids = verify_geodesic(&window, ray)?;
    for &t in schedule {
        let Some(&target) = ids.get(t as usize) else {
            return Err(validity("T", t, ids.len() as i64 - 1, "the ray length"));
        };
        check_far_point(&window, window.dist_from_base(target), zone, "ray(T)")?;
    }
    let rows: Vec<Vec<i64>> = schedule
        .par_iter()
        .map(|&t| {
            let dist = window.bfs(&[ids[t as usize]], UNREACHED);
            zone_row(&window, &dist, zone, t as i64)
        })
        .collect();
    Ok(finish(window, FieldKind::Busemann, zone, schedule.to_vec(), tail, rows))
}

/// Horofunction approximants `h_n(x) = d(x, p_n) - d(x0, p_n)`; the schedule
/// is `d(x0, p_n)`, which must increase strictly.
pub fn horofunction(
    window: Arc<Window>,
    points: &[Vertex],
    zone: u32,
    tail: u32,
) -> Result<(ScalarField, ConvergenceReport)> {
    check_zone(&window, zone)?;
    let ids = points
        .iter()
        .map(|&p| window.require_id(p, MODULE))
        .collect::<Result<Vec<_>>>()?;
    let schedule: Vec<u32> = ids.iter().map(|&id| window.dist_from_base(id)).collect();
    check_increasing(&schedule, "d(x0, p_n) sequence")?;
    for &d in &schedule {
        check_far_point(&window, d, zone, "p_n")?;
    }
    let rows: Vec<Vec<i64>> = ids
        .par_iter()
        .zip(&schedule)
        .map(|(&id, &d)| {
            let dist = window.bfs(&[id], UNREACHED);
            zone_row(&window, &dist, zone, d as i64)
        })
        .collect();
    Ok(finish(window, FieldKind::Horo, zone, schedule, tail, rows))
}

/// General limit `d(x, H_n) - c_n`; the schedule is `d(x0, H_n)`.
pub fn dl_from_sets(
    window: Arc<Window>,
    sets: &[VertexSet],
    shifts: &[i64],
    zone: u32,
    tail: u32,
) -> Result<(ScalarField, ConvergenceReport)> {
    check_zone(&window, zone)?;
    if sets.len() != shifts.len() {
        return Err(Error::domain(
            MODULE,
            format!("{} sets but {} shifts", sets.len(), shifts.len()),
        ));
    }
    let mut schedule = Vec::with_capacity(sets.len());
    for set in sets {
        let Some(d) = set.ids().iter().map(|&id| window.dist_from_base(id)).min() else {
            return Err(Error::Empty {
                module: MODULE,
                what: "set H_n",
            });
        };
        if set.ids().iter().any(|&id| id as usize >= window.len()) {
            return Err(Error::domain(MODULE, "set H_n has ids outside the window"));
        }
        check_far_point(&window, d, zone, "H_n")?;
        schedule.push(d);
    }
    check_increasing(&schedule, "d(x0, H_n) sequence")?;
    let rows: Vec<Vec<i64>> = sets
        .par_iter()
        .zip(shifts)
        .map(|(set, &c)| {
            let dist = window.bfs(set.ids(), UNREACHED);
            zone_row(&window, &dist, zone, c)
        })
        .collect();
    Ok(finish(window, FieldKind::SetLimit, zone, schedule, tail, rows))
}

fn finish(
    window: Arc<Window>,
    kind: FieldKind,
    zone: u32,
    schedule: Vec<u32>,
    tail: u32,
    rows: Vec<Vec<i64>>,
) -> (ScalarField, ConvergenceReport) {
    let first = vec![0; rows.first().map_or(0, Vec::len)];
    let (values, report) = ConvergenceReport::summarize(schedule, tail, &rows, &first);
    let field = ScalarField {
        window,
        kind,
        zone,
        values,
        convergence: report.clone(),
    };
    (field, report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GromovViolation {
    pub vertex: Vertex,
    pub t: i64,
    pub value: i64,
    /// `d(x, {u <= t})` as found, `None` when no sublevel point was reached.
    pub sublevel_distance: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GromovReport {
    pub checked: usize,
    pub skipped: usize,
    pub skipped_levels: Vec<i64>,
    pub violations: Vec<GromovViolation>,
}

impl GromovReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies `u(x) = t + d(x, {u <= t})` for every stable zone vertex with
/// `u(x) >= t`.
///
/// The identity only involves the ball of radius `u(x) - t` around `x`; a
/// vertex is checked when that ball lies in the zone and is stable, and
/// skipped otherwise. Levels with an empty sublevel set in the zone are
/// skipped with a notice.
pub fn gromov_check(field: &ScalarField, t_samples: &[i64]) -> GromovReport {
    let window = field.window();
    let mut search = BallSearch::new(window);
    let mut report = GromovReport::default();
    for &t in t_samples {
        if !field.values.iter().any(|&u| u <= t) {
            report.skipped_levels.push(t);
            continue;
        }
        for x in 0..field.len() as u32 {
            let ux = field.values[x as usize];
            if ux < t || !field.is_stable(x) {
                continue;
            }
            let reach = (ux - t) as u32;
            if window.dist_from_base(x) + reach > field.zone {
                report.skipped += 1;
                continue;
            }
            search.run(window, x, reach);
            let ball = search.visited();
            if ball.iter().any(|&v| !field.is_stable(v)) {
                report.skipped += 1;
                continue;
            }
            let found = ball
                .iter()
                .filter(|&&v| field.values[v as usize] <= t)
                .filter_map(|&v| search.depth(v))
                .min();
            report.checked += 1;
            if found != Some(reach) {
                report.violations.push(GromovViolation {
                    vertex: window.vertex(x),
                    t,
                    value: ux,
                    sublevel_distance: found,
                });
            }
        }
    }
    report
}

/// Zone vertices where the field equals `c`.
pub fn level_set(field: &ScalarField, c: i64) -> VertexSet {
    VertexSet::new(
        field
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == c)
            .map(|(i, _)| i as u32)
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    /// Zone vertices where the last field of the sequence differs from the limit.
    pub nonconvergent: Vec<Vertex>,
    /// Zone vertices where the last two fields still differ.
    pub unsettled: Vec<Vertex>,
    pub gromov: GromovReport,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.nonconvergent.is_empty() && self.gromov.passed()
    }
}

/// Checks that `fields` converge pointwise to `limit` on the zone and that
/// the limit still satisfies the Gromov identity.
pub fn stability_check(
    fields: &[ScalarField],
    limit: &ScalarField,
    t_samples: &[i64],
) -> Result<StabilityReport> {
    let window = limit.window();
    for f in fields {
        if !Arc::ptr_eq(f.window(), window) || f.zone != limit.zone {
            return Err(Error::domain(
                MODULE,
                "stability_check needs fields sharing the window and zone of the limit",
            ));
        }
    }
    let Some(last) = fields.last() else {
        return Err(Error::Empty {
            module: MODULE,
            what: "field sequence",
        });
    };
    let nonconvergent = (0..limit.len())
        .filter(|&i| last.values[i] != limit.values[i])
        .map(|i| window.vertex(i as u32))
        .collect();
    let unsettled = match fields {
        [.., a, b] => (0..limit.len())
            .filter(|&i| a.values[i] != b.values[i])
            .map(|i| window.vertex(i as u32))
            .collect(),
        _ => Vec::new(),
    };
    Ok(StabilityReport {
        nonconvergent,
        unsettled,
        gromov: gromov_check(limit, t_samples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Generator, GraphSpace};

    fn window(g: Generator, r: u32) -> Arc<Window> {
        Arc::new(Window::materialize(GraphSpace::new(g), Vertex::ORIGIN, r).unwrap())
    }

    fn schedule(step: u32, max: u32) -> Vec<u32> {
        (1..=max / step).map(|i| i * step).collect()
    }

    #[test]
    fn u_r_examples() {
        let w = window(Generator::Line, 12);
        let f = u_r(w.clone(), 10, 3).unwrap();
        assert_eq!(f.value_at(Vertex(3, 0)), Some(-3));
        assert_eq!(f.value_at(Vertex::ORIGIN), Some(0));
        assert!(u_r(w.clone(), 13, 3).is_err());
        // r < zone needs r + 2 zone <= R
        assert!(u_r(w.clone(), 2, 6).is_err());
        assert!(u_r(w, 2, 5).is_ok());

        let h = window(Generator::HGraph, 40);
        let f = u_r(h, 12, 9).unwrap();
        assert_eq!(f.value_at(Vertex(0, 3)), Some(3));
        assert_eq!(f.value_at(Vertex(4, 0)), Some(-4));
    }

    #[test]
    fn point_assigned_h_graph_and_tree() {
        let h = window(Generator::HGraph, 110);
        let (f, report) = u_point_assigned(h, &schedule(6, 96), 5, 10).unwrap();
        let id = f.id_of(Vertex(5, 0)).unwrap();
        assert_eq!(f.value(id), Some(-5));
        assert_eq!(report.last_change[id as usize], 6);
        assert!(f.is_stable(id));

        let line = window(Generator::Line, 30);
        let (f, _) = u_point_assigned(line, &[10, 20, 30], 5, 10).unwrap();
        assert_eq!(f.value_at(Vertex::ORIGIN), Some(0));

        let tree = window(Generator::Tree { branching: 2 }, 12);
        let (f, _) = u_point_assigned(tree, &[6, 8, 10, 12], 5, 4).unwrap();
        assert_eq!(f.value_at(Vertex(4, 9)), Some(-4));
        assert!(level_set(&f, -2).len() == 4);
        assert!(level_set(&f, -99).is_empty());
    }

    #[test]
    fn schedule_errors() {
        let w = window(Generator::Line, 30);
        assert!(u_point_assigned(w.clone(), &[10, 10], 3, 2).is_err());
        assert!(u_point_assigned(w.clone(), &[], 3, 2).is_err());
        assert!(u_point_assigned(w.clone(), &[10, 40], 3, 2).is_err());
        assert!(u_point_assigned(w, &[2, 4], 5, 2).is_err());
    }

    #[test]
    fn busemann_on_line() {
        let w = window(Generator::Line, 40);
        let plus: Vec<Vertex> = (0..=30).map(|t| Vertex(t, 0)).collect();
        let (b, _) = busemann(w.clone(), &plus, &[10, 20, 30], 5, 10).unwrap();
        for x in -5..=5 {
            assert_eq!(b.value_at(Vertex(x, 0)), Some(-x));
        }
        assert_eq!(b.value_at(Vertex::ORIGIN), Some(0));
        let broken = vec![Vertex(0, 0), Vertex(1, 0), Vertex(0, 0)];
        assert!(matches!(
            busemann(w.clone(), &broken, &[2], 5, 0),
            Err(Error::NonGeodesic { .. })
        ));
        let gap = vec![Vertex(0, 0), Vertex(2, 0)];
        assert!(busemann(w, &gap, &[1], 5, 0).is_err());
    }

    #[test]
    fn horofunction_matches_busemann_along_a_ray() {
        let w = window(Generator::Line, 40);
        let ray: Vec<Vertex> = (0..=30).map(|t| Vertex(-t, 0)).collect();
        let (b, _) = busemann(w.clone(), &ray, &[10, 20, 30], 5, 10).unwrap();
        let points: Vec<Vertex> = [10, 20, 30].iter().map(|&t| Vertex(-t, 0)).collect();
        let (h, _) = horofunction(w, &points, 5, 10).unwrap();
        assert_eq!(b.values(), h.values());
        assert_eq!(h.value_at(Vertex::ORIGIN), Some(0));
    }

    #[test]
    fn sets_with_dominated_extra_point() {
        let w = window(Generator::Grid2d, 30);
        let spheres: Vec<VertexSet> = [6, 10, 14].iter().map(|&r| w.sphere(r).unwrap()).collect();
        let shifts = [6, 10, 14];
        let (plain, _) = dl_from_sets(w.clone(), &spheres, &shifts, 5, 4).unwrap();
        let far = w.vertex_set(&[Vertex(0, 20)], "test").unwrap();
        let padded: Vec<VertexSet> = spheres.iter().map(|s| s.union(&far)).collect();
        let (extra, _) = dl_from_sets(w, &padded, &shifts, 5, 4).unwrap();
        assert_eq!(plain.values(), extra.values());
    }

    #[test]
    fn gromov_on_line_field() {
        let w = window(Generator::Line, 40);
        let (f, _) = u_point_assigned(w, &[10, 20, 30, 40], 8, 10).unwrap();
        let report = gromov_check(&f, &[-3, -1, 0]);
        assert!(report.passed(), "{report:?}");
        assert!(report.checked > 0);
        assert_eq!(gromov_check(&f, &[-20]).skipped_levels, vec![-20]);
    }

    #[test]
    fn gromov_flags_a_flat_spot() {
        let w = window(Generator::Line, 20);
        let f = u_r(w.clone(), 10, 6).unwrap();
        let mut values = f.values().to_vec();
        let id = w.id_of(Vertex(2, 0)).unwrap() as usize;
        values[id] = -1;
        let broken = ScalarField::from_parts(
            w,
            FieldKind::SetLimit,
            6,
            values,
            f.convergence().clone(),
        )
        .unwrap();
        assert!(!gromov_check(&broken, &[-3, -2]).passed());
    }

    #[test]
    fn export_roundtrip() {
        let w = window(Generator::HGraph, 30);
        let (f, _) = u_point_assigned(w, &[12, 18, 24, 30], 4, 6).unwrap();
        let json = serde_json::to_string(&f.export()).unwrap();
        let back: FieldExport = serde_json::from_str(&json).unwrap();
        let g = ScalarField::from_export(&back).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.convergence(), f.convergence());
    }
}
