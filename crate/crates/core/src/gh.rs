//! Pointed Gromov-Hausdorff toolkit on finite pointed metric spaces.
//!
//! Distances are scaled integers: an entry `k` of a space with scale `s`
//! stands for `k / s`. Whenever two spaces meet they are rewritten over a
//! common unit, so every comparison is an exact integer comparison and every
//! reported quantity is an exact rational.

use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dlfield::u_point_assigned;
use crate::error::{Error, Result};
use crate::space::{Generator, GraphSpace, Scale, Vertex};
use crate::window::Window;

const MODULE: &str = "gh";

/// Exact rationals as strings: `"3"`, `"-1/2"`. Parsing also accepts
/// terminating decimals such as `"0.25"`.
pub mod exact {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::error::{Error, Result};

    pub fn parse(text: &str) -> Result<Ratio<i64>> {
        let t = text.trim();
        let bad = || Error::domain("gh", format!("`{text}` is not a rational number"));
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Ratio::new(n, d));
        }
        if let Some((whole, frac)) = t.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let whole: i64 = match whole.trim_start_matches(['-', '+']) {
                "" => 0,
                w => w.parse().map_err(|_| bad())?,
            };
            let den = 10i64.pow(frac.len() as u32);
            let value = Ratio::new(whole * den + frac.parse::<i64>().map_err(|_| bad())?, den);
            return Ok(if negative { -value } else { value });
        }
        t.parse::<i64>().map(Ratio::from_integer).map_err(|_| bad())
    }

    pub fn serialize<S: Serializer>(value: &Ratio<i64>, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Ratio<i64>, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

pub const DEFAULT_MAX_POINTS: usize = 8;
pub const DEFAULT_MAX_NODES: u64 = 50_000_000;

/// Finite pointed metric space with scaled-integer distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct FiniteMetricSpace {
    n: usize,
    base: usize,
    scale: Scale,
    dist: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawSpace {
    n: usize,
    base: usize,
    #[serde(default)]
    scale: Scale,
    dist: Vec<Vec<i64>>,
}

impl TryFrom<RawSpace> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        if raw.dist.len() != raw.n {
            return Err(Error::domain(
                MODULE,
                format!("n = {} but dist has {} rows", raw.n, raw.dist.len()),
            ));
        }
        let scale = Scale::new(raw.scale.num, raw.scale.den)?;
        FiniteMetricSpace::new(raw.dist, raw.base, scale)
    }
}

impl FiniteMetricSpace {
    /// Validates shape and metric axioms. A failed axiom is reported with the
    /// offending indices.
    #[allow(clippy::needless_range_loop)]
    pub fn new(dist: Vec<Vec<i64>>, base: usize, scale: Scale) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Empty {
                module: MODULE,
                what: "metric space",
            });
        }
        if let Some(i) = dist.iter().position(|row| row.len() != n) {
            return Err(Error::domain(
                MODULE,
                format!("row {i} has {} entries, expected {n}", dist[i].len()),
            ));
        }
        if base >= n {
            return Err(Error::domain(MODULE, format!("base {base} out of range 0..{n}")));
        }
        for i in 0..n {
            if dist[i][i] != 0 {
                return Err(not_metric("nonzero diagonal", vec![i]));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(not_metric("asymmetric", vec![i, j]));
                }
                if i != j && dist[i][j] <= 0 {
                    return Err(not_metric("non-positive distance between distinct points", vec![i, j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return Err(not_metric("triangle inequality fails", vec![i, j, k]));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { n, base, scale, dist })
    }

    /// Restriction of a window's metric to `ids`, based at `ids[0]`. Every
    /// pairwise distance must be certified exact by the window.
    pub fn from_window(window: &Window, ids: &[u32]) -> Result<Self> {
        let exact = window.pairwise_dist(ids)?;
        let dist = exact
            .into_iter()
            .map(|row| row.into_iter().map(i64::from).collect())
            .collect();
        FiniteMetricSpace::new(dist, 0, window.space().scale)
    }

    /// Shortest-path closure of a complete graph with weights drawn from
    /// `1..=max_edge`, based at 0.
    #[allow(clippy::needless_range_loop)]
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, max_edge: i64, scale: Scale) -> Self {
        let mut d = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(1..=max_edge.max(1));
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        FiniteMetricSpace::new(d, 0, scale).expect("shortest-path closure is a metric")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn dist(&self) -> &[Vec<i64>] {
        &self.dist
    }

    pub fn distance(&self, i: usize, j: usize) -> Ratio<i64> {
        Ratio::new(self.dist[i][j], 1) / self.scale.ratio()
    }
}

fn not_metric(reason: &str, witness: Vec<usize>) -> Error {
    Error::NotMetric {
        reason: reason.into(),
        witness,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Both spaces rewritten over the unit `1 / lcm(num_X, num_Y)`.
struct Common {
    dx: Vec<Vec<i64>>,
    dy: Vec<Vec<i64>>,
    unit: i64,
}

impl Common {
    fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Self {
        let (sx, sy) = (x.scale, y.scale);
        let unit = sx.num / gcd(sx.num, sy.num) * sy.num;
        let fx = sx.den * (unit / sx.num);
        let fy = sy.den * (unit / sy.num);
        let rescale = |d: &[Vec<i64>], f: i64| d.iter().map(|r| r.iter().map(|v| v * f).collect()).collect();
        Common {
            dx: rescale(&x.dist, fx),
            dy: rescale(&y.dist, fy),
            unit,
        }
    }

    fn real(&self, v: i64) -> Ratio<i64> {
        Ratio::new(v, self.unit)
    }

    /// `eps` in common units, rounded down. Integer distances compare with
    /// `<= eps` exactly after flooring.
    fn floor(&self, eps: Ratio<i64>) -> i64 {
        (eps * self.unit).floor().to_integer()
    }

    fn distortion(&self, pairs: &[(usize, usize)]) -> i64 {
        let mut worst = 0;
        for &(a, b) in pairs {
            for &(c, d) in pairs {
                worst = worst.max((self.dx[a][c] - self.dy[b][d]).abs());
            }
        }
        worst
    }
}

/// Pointed correspondence with its distortion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    #[serde(with = "exact")]
    pub distortion: Ratio<i64>,
}

impl Correspondence {
    /// Checks the base pair and coverage of both sides, then computes the
    /// distortion.
    pub fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= x.n || b >= y.n) {
            return Err(Error::domain(MODULE, format!("pair ({a},{b}) out of range")));
        }
        if pairs.binary_search(&(x.base, y.base)).is_err() {
            return Err(Error::domain(
                MODULE,
                format!("base pair ({},{}) missing", x.base, y.base),
            ));
        }
        let mut seen_x = vec![false; x.n];
        let mut seen_y = vec![false; y.n];
        for &(a, b) in &pairs {
            seen_x[a] = true;
            seen_y[b] = true;
        }
        if let Some(a) = seen_x.iter().position(|s| !s) {
            return Err(Error::domain(MODULE, format!("x = {a} has no correspondent")));
        }
        if let Some(b) = seen_y.iter().position(|s| !s) {
            return Err(Error::domain(MODULE, format!("y = {b} has no correspondent")));
        }
        let common = Common::new(x, y);
        let distortion = common.real(common.distortion(&pairs));
        Ok(Correspondence { pairs, distortion })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_points: usize,
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_points: DEFAULT_MAX_POINTS,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Result of the distortion search. `proved` is false when the search was
/// cut short, in which case `correspondence` is only the best one found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinDistortion {
    pub correspondence: Correspondence,
    pub proved: bool,
    pub nodes: u64,
}

#[derive(Clone, Copy)]
enum Var {
    F(usize),
    G(usize),
}

struct Search<'a> {
    ny: usize,
    vars: Vec<Var>,
    cost: &'a [i64],
    np: usize,
    chosen: Vec<usize>,
    assigned: Vec<bool>,
    best: i64,
    best_pairs: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    complete: bool,
}

impl Search<'_> {
    fn domain(&self, var: Var) -> impl Iterator<Item = usize> + '_ {
        let (ny, nx) = (self.ny, self.np / self.ny);
        let (fixed, len) = match var {
            Var::F(a) => (a, ny),
            Var::G(b) => (b, nx),
        };
        (0..len).map(move |k| match var {
            Var::F(_) => fixed * ny + k,
            Var::G(_) => k * ny + fixed,
        })
    }

    fn run(&mut self, dist: i64, cur: &[i64]) {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.complete = false;
            return;
        }
        // forward check, and pick the unassigned variable with the largest
        // cheapest extension
        let mut pick: Option<(usize, i64)> = None;
        for (k, &var) in self.vars.iter().enumerate() {
            if self.assigned[k] {
                continue;
            }
            let cheapest = self.domain(var).map(|p| cur[p]).min().unwrap();
            if cheapest.max(dist) >= self.best {
                return;
            }
            if pick.is_none_or(|(_, c)| cheapest > c) {
                pick = Some((k, cheapest));
            }
        }
        let Some((k, _)) = pick else {
            self.best = dist;
            self.best_pairs = self.chosen.clone();
            return;
        };
        let mut candidates: Vec<usize> = self.domain(self.vars[k]).collect();
        candidates.sort_by_key(|&p| (cur[p], p));
        self.assigned[k] = true;
        for p in candidates {
            let d = dist.max(cur[p]);
            if d >= self.best {
                break;
            }
            let row = &self.cost[p * self.np..(p + 1) * self.np];
            let next: Vec<i64> = cur.iter().zip(row).map(|(&c, &r)| c.max(r)).collect();
            self.chosen.push(p);
            self.run(d, &next);
            self.chosen.pop();
            if !self.complete {
                break;
            }
        }
        self.assigned[k] = false;
    }
}

/// Minimum-distortion pointed correspondence.
///
/// Every pointed correspondence contains a union `graph(f) ∪ graph(g)` with
/// `f(x0) = y0` and `g(y0) = x0`, and distortion only grows with the
/// relation, so the search runs over such unions. Branch and bound with
/// forward checking; ties go to the first optimum in a fixed value order, so
/// the result is deterministic.
pub fn min_distortion_correspondence(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    budget: Budget,
) -> Result<MinDistortion> {
    let common = Common::new(x, y);
    let (nx, ny) = (x.n, y.n);
    let np = nx * ny;
    let mut cost = vec![0i64; np * np];
    for p in 0..np {
        for q in 0..np {
            let (a, b, c, d) = (p / ny, p % ny, q / ny, q % ny);
            cost[p * np + q] = (common.dx[a][c] - common.dy[b][d]).abs();
        }
    }
    let mut vars: Vec<Var> = (0..nx).filter(|&a| a != x.base).map(Var::F).collect();
    vars.extend((0..ny).filter(|&b| b != y.base).map(Var::G));
    let base_pair = x.base * ny + y.base;
    let max_nodes = if nx > budget.max_points || ny > budget.max_points {
        budget.max_nodes.min(DEFAULT_MAX_NODES / 10)
    } else {
        budget.max_nodes
    };
    let mut search = Search {
        ny,
        assigned: vec![false; vars.len()],
        vars,
        cost: &cost,
        np,
        chosen: vec![base_pair],
        best: i64::MAX,
        best_pairs: Vec::new(),
        nodes: 0,
        max_nodes,
        complete: true,
    };
    let start = cost[base_pair * np..(base_pair + 1) * np].to_vec();
    search.run(0, &start);
    let proved = search.complete && nx <= budget.max_points && ny <= budget.max_points;
    let pairs: Vec<(usize, usize)> = if search.best_pairs.is_empty() {
        // cut off before any leaf: fall back to the complete relation
        (0..nx).flat_map(|a| (0..ny).map(move |b| (a, b))).collect()
    } else {
        search.best_pairs.iter().map(|&p| (p / ny, p % ny)).collect()
    };
    Ok(MinDistortion {
        correspondence: Correspondence::new(x, y, pairs)?,
        proved,
        nodes: search.nodes,
    })
}

/// Minimum distortion over every relation containing the base pair. Only
/// feasible for `|X| |Y| <= 16`; used to check the reduction.
pub fn brute_force_min_distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<Ratio<i64>> {
    let (nx, ny) = (x.n, y.n);
    if nx * ny > 16 {
        return Err(Error::Validity {
            module: MODULE,
            what: "|X| |Y|".into(),
            value: (nx * ny) as i64,
            limit: 16,
            param: "a smaller space",
        });
    }
    let common = Common::new(x, y);
    let others: Vec<(usize, usize)> = (0..nx)
        .flat_map(|a| (0..ny).map(move |b| (a, b)))
        .filter(|&p| p != (x.base, y.base))
        .collect();
    let mut best = i64::MAX;
    for mask in 0u32..(1 << others.len()) {
        let mut pairs = vec![(x.base, y.base)];
        pairs.extend(
            others
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p),
        );
        let covers_x = (0..nx).all(|a| pairs.iter().any(|p| p.0 == a));
        let covers_y = (0..ny).all(|b| pairs.iter().any(|p| p.1 == b));
        if covers_x && covers_y {
            best = best.min(common.distortion(&pairs));
        }
    }
    Ok(common.real(best))
}

/// Sandwich `D*/2 <= d_GH <= D*` from the minimal distortion `D*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GhBounds {
    #[serde(with = "exact")]
    pub lower: Ratio<i64>,
    #[serde(with = "exact")]
    pub upper: Ratio<i64>,
    pub proved: bool,
    pub correspondence: Correspondence,
}

pub fn gh_bounds(x: &FiniteMetricSpace, y: &FiniteMetricSpace, budget: Budget) -> Result<GhBounds> {
    let min = min_distortion_correspondence(x, y, budget)?;
    let upper = min.correspondence.distortion;
    Ok(GhBounds {
        lower: upper / 2,
        upper,
        proved: min.proved,
        correspondence: min.correspondence,
    })
}

/// Pointed map `X -> Y` with its distortion and the smallest `eps` for which
/// its image is an `eps`-net.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsIsometry {
    pub map: Vec<usize>,
    #[serde(with = "exact")]
    pub dis: Ratio<i64>,
    #[serde(with = "exact")]
    pub net_eps: Ratio<i64>,
}

impl EpsIsometry {
    pub fn from_map(x: &FiniteMetricSpace, y: &FiniteMetricSpace, map: Vec<usize>) -> Result<Self> {
        if map.len() != x.n {
            return Err(Error::domain(
                MODULE,
                format!("map has {} entries, X has {} points", map.len(), x.n),
            ));
        }
        if let Some(i) = map.iter().position(|&j| j >= y.n) {
            return Err(Error::domain(MODULE, format!("map({i}) = {} out of range", map[i])));
        }
        if map[x.base] != y.base {
            return Err(Error::domain(MODULE, "map must send base to base"));
        }
        let common = Common::new(x, y);
        let graph: Vec<(usize, usize)> = map.iter().copied().enumerate().collect();
        let dis = common.distortion(&graph);
        let net = (0..y.n)
            .map(|b| map.iter().map(|&fb| common.dy[b][fb]).min().unwrap())
            .max()
            .unwrap();
        Ok(EpsIsometry {
            map,
            dis: common.real(dis),
            net_eps: common.real(net),
        })
    }

    /// True when the stored `dis` and `net_eps` match a recomputation.
    pub fn verify(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> bool {
        EpsIsometry::from_map(x, y, self.map.clone()).is_ok_and(|f| f == *self)
    }

    pub fn is_eps_isometry(&self, eps: Ratio<i64>) -> bool {
        self.dis <= eps && self.net_eps <= eps
    }
}

/// `f(x0) = y0`, otherwise the smallest correspondent of `x`.
pub fn build_eps_isometry(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    corr: &Correspondence,
) -> Result<EpsIsometry> {
    let corr = Correspondence::new(x, y, corr.pairs.clone())?;
    let mut map = vec![usize::MAX; x.n];
    for &(a, b) in corr.pairs.iter().rev() {
        map[a] = b;
    }
    map[x.base] = y.base;
    EpsIsometry::from_map(x, y, map)
}

/// `{(x, y) : d_Y(f(x), y) <= eps}`, whose distortion is at most `3 eps`.
pub fn corr_from_isometry(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &EpsIsometry,
    eps: Ratio<i64>,
) -> Result<Correspondence> {
    let f = EpsIsometry::from_map(x, y, f.map.clone())?;
    if !f.is_eps_isometry(eps) {
        return Err(Error::domain(
            MODULE,
            format!(
                "map is not an eps-isometry for eps = {eps}: dis = {}, net = {}; increase --eps",
                f.dis, f.net_eps
            ),
        ));
    }
    let common = Common::new(x, y);
    let e = common.floor(eps);
    let pairs = (0..x.n)
        .flat_map(|a| (0..y.n).map(move |b| (a, b)))
        .filter(|&(a, b)| common.dy[f.map[a]][b] <= e)
        .collect();
    let corr = Correspondence::new(x, y, pairs)?;
    if corr.distortion > eps * 3 {
        return Err(Error::domain(
            MODULE,
            format!("distortion {} exceeds 3 eps = {}", corr.distortion, eps * 3),
        ));
    }
    Ok(corr)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateWitness {
    /// The first net point has to be the base point.
    BaseNotFirst { side: Side, first: usize },
    /// `point` is farther than `eps` from the net.
    NotNet {
        side: Side,
        point: usize,
        #[serde(with = "exact")]
        distance: Ratio<i64>,
    },
    /// `|d_X(x_i, x_j) - d_Y(y_i, y_j)| >= delta`.
    Pair {
        i: usize,
        j: usize,
        #[serde(with = "exact")]
        dx: Ratio<i64>,
        #[serde(with = "exact")]
        dy: Ratio<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub certified: bool,
    /// `2 eps + delta`; `d_GH` is strictly below it when certified.
    #[serde(with = "exact")]
    pub bound: Ratio<i64>,
    pub witness: Option<CertificateWitness>,
}

/// Checks that the aligned nets form an `(eps, delta)`-approximation.
pub fn eps_delta_certificate(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    net_x: &[usize],
    net_y: &[usize],
    eps: Ratio<i64>,
    delta: Ratio<i64>,
) -> Result<Certificate> {
    if net_x.len() != net_y.len() {
        return Err(Error::domain(
            MODULE,
            format!("nets have different lengths ({} and {})", net_x.len(), net_y.len()),
        ));
    }
    if net_x.is_empty() {
        return Err(Error::Empty {
            module: MODULE,
            what: "net",
        });
    }
    if eps <= Ratio::from_integer(0) || delta <= Ratio::from_integer(0) {
        return Err(Error::domain(MODULE, "eps and delta must be positive"));
    }
    if let Some(&i) = net_x.iter().find(|&&i| i >= x.n) {
        return Err(Error::domain(MODULE, format!("net point {i} out of range in X")));
    }
    if let Some(&j) = net_y.iter().find(|&&j| j >= y.n) {
        return Err(Error::domain(MODULE, format!("net point {j} out of range in Y")));
    }
    let bound = eps * 2 + delta;
    let fail = |w| {
        Ok(Certificate {
            certified: false,
            bound,
            witness: Some(w),
        })
    };
    if net_x[0] != x.base {
        return fail(CertificateWitness::BaseNotFirst {
            side: Side::X,
            first: net_x[0],
        });
    }
    if net_y[0] != y.base {
        return fail(CertificateWitness::BaseNotFirst {
            side: Side::Y,
            first: net_y[0],
        });
    }
    for (side, space, net) in [(Side::X, x, net_x), (Side::Y, y, net_y)] {
        for p in 0..space.n {
            let d = net.iter().map(|&q| space.distance(p, q)).min().unwrap();
            if d > eps {
                return fail(CertificateWitness::NotNet {
                    side,
                    point: p,
                    distance: d,
                });
            }
        }
    }
    for i in 0..net_x.len() {
        for j in i + 1..net_x.len() {
            let dx = x.distance(net_x[i], net_x[j]);
            let dy = y.distance(net_y[i], net_y[j]);
            let gap = if dx > dy { dx - dy } else { dy - dx };
            if gap >= delta {
                return fail(CertificateWitness::Pair { i, j, dx, dy });
            }
        }
    }
    Ok(Certificate {
        certified: true,
        bound,
        witness: None,
    })
}

/// Explicit pointed maps between zoo spaces, all sending the origin to the
/// origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KnownMap {
    Identity,
    /// pendant_line -> line, `(i, leaf) -> (i, 0)`.
    SpineProjection,
    /// line -> pendant_line, `(i, 0) -> (i, 0)`.
    Inclusion,
    /// line -> line with `k` times finer hops, `(i, 0) -> (k i, 0)`.
    Dilation { k: i64 },
}

impl KnownMap {
    pub fn between(x: GraphSpace, y: GraphSpace) -> Result<Self> {
        use Generator::{Line, PendantLine};
        let same_scale = x.scale == y.scale;
        match (x.generator, y.generator) {
            (gx, gy) if gx == gy && same_scale => Ok(KnownMap::Identity),
            (PendantLine, Line) if same_scale => Ok(KnownMap::SpineProjection),
            (Line, PendantLine) if same_scale => Ok(KnownMap::Inclusion),
            (Line, Line) => {
                let k = y.scale.ratio() / x.scale.ratio();
                if k.is_integer() {
                    Ok(KnownMap::Dilation { k: k.to_integer() })
                } else {
                    Err(Error::domain(
                        MODULE,
                        format!("line -> line needs an integer scale ratio, got {k}"),
                    ))
                }
            }
            (gx, gy) => Err(Error::domain(
                MODULE,
                format!("no known eps-isometry from {gx} to {gy} (scales {}/{} and {}/{})",
                    x.scale.num, x.scale.den, y.scale.num, y.scale.den),
            )),
        }
    }

    /// Hops in `Y` per hop in `X`.
    pub fn hop_factor(&self) -> u32 {
        match self {
            KnownMap::Dilation { k } => *k as u32,
            _ => 1,
        }
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        match self {
            KnownMap::Identity | KnownMap::Inclusion => v,
            KnownMap::SpineProjection => Vertex(v.0, 0),
            KnownMap::Dilation { k } => Vertex(v.0 * k, v.1),
        }
    }
}

/// Window and schedule for the `X` side; the `Y` side is scaled by the
/// map's hop factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaGhParams {
    pub radius: u32,
    pub zone: u32,
    pub schedule: Vec<u32>,
    pub tail: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentVerdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaGhRow {
    pub x: Vertex,
    pub fx: Vertex,
    #[serde(with = "exact")]
    pub u_x: Ratio<i64>,
    #[serde(with = "exact")]
    pub u_y: Ratio<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaGhReport {
    pub map: KnownMap,
    #[serde(with = "exact")]
    pub eps: Ratio<i64>,
    /// Distortion of the map on the zone of `X`.
    #[serde(with = "exact")]
    pub dis: Ratio<i64>,
    /// Smallest `e` with `f(zone X)` an `e`-net of the zone of `Y`.
    #[serde(with = "exact")]
    pub net_eps: Ratio<i64>,
    pub compared: usize,
    /// Max of `|u_x0(x) - u_y0(f x)|` over stable zone vertices.
    #[serde(with = "exact")]
    pub max_deviation: Ratio<i64>,
    pub worst: Option<Vertex>,
    /// Max of `u_y0(f x) - u_x0(x)`.
    #[serde(with = "exact")]
    pub max_one_sided: Ratio<i64>,
    #[serde(with = "exact")]
    pub bound: Ratio<i64>,
    #[serde(with = "exact")]
    pub one_sided_bound: Ratio<i64>,
    pub verdict: ExperimentVerdict,
    pub unstable: Vec<Vertex>,
    pub rows: Vec<PaGhRow>,
}

/// Compares point-assigned fields on `X` and `Y` through a known
/// `2 eps`-isometry `f`, against the bounds `8 eps` and, one-sided, `4 eps`.
///
/// Only zone vertices stable in both fields are compared. The map must be a
/// `2 eps`-isometry on the zone, otherwise this is a precondition error.
pub fn pa_gh_experiment(
    space_x: GraphSpace,
    space_y: GraphSpace,
    eps: Ratio<i64>,
    params: &PaGhParams,
) -> Result<PaGhReport> {
    if eps < Ratio::from_integer(0) {
        return Err(Error::domain(MODULE, "eps must be non-negative"));
    }
    let map = KnownMap::between(space_x, space_y)?;
    let k = map.hop_factor();
    let wx = Arc::new(Window::materialize(space_x, Vertex::ORIGIN, params.radius)?);
    let wy = Arc::new(Window::materialize(space_y, Vertex::ORIGIN, params.radius * k)?);
    let schedule_y: Vec<u32> = params.schedule.iter().map(|r| r * k).collect();
    let (fx, _) = u_point_assigned(wx.clone(), &params.schedule, params.zone, params.tail)?;
    let (fy, _) = u_point_assigned(wy.clone(), &schedule_y, params.zone * k, params.tail * k)?;

    let (dis, net_eps) = map_quality(&map, &wx, &wy, params.zone, params.zone * k)?;
    let two_eps = eps * 2;
    if dis > two_eps || net_eps > two_eps {
        return Err(Error::domain(
            MODULE,
            format!(
                "{map:?} is not a 2 eps-isometry on the zone for eps = {eps}: dis = {dis}, net = {net_eps}; increase --eps"
            ),
        ));
    }

    let sx = space_x.scale.ratio();
    let sy = space_y.scale.ratio();
    let mut rows = Vec::new();
    let mut unstable = Vec::new();
    let zero = Ratio::from_integer(0);
    let (mut max_dev, mut max_one, mut worst) = (zero, None::<Ratio<i64>>, None);
    for id in 0..wx.zone_len(params.zone) as u32 {
        let x = wx.vertex(id);
        let y = map.apply(x);
        let (Some(ux), Some(uy)) = (fx.stable_value_at(x), fy.stable_value_at(y)) else {
            unstable.push(x);
            continue;
        };
        let ux = Ratio::from_integer(ux) / sx;
        let uy = Ratio::from_integer(uy) / sy;
        let diff = uy - ux;
        let dev = if diff < zero { -diff } else { diff };
        if worst.is_none() || dev > max_dev {
            max_dev = dev;
            worst = Some(x);
        }
        max_one = Some(max_one.map_or(diff, |m| m.max(diff)));
        rows.push(PaGhRow { x, fx: y, u_x: ux, u_y: uy });
    }
    let bound = eps * 8;
    let one_sided_bound = eps * 4;
    let max_one_sided = max_one.unwrap_or(zero);
    let verdict = if max_dev > bound || max_one_sided > one_sided_bound {
        ExperimentVerdict::Violated
    } else if !unstable.is_empty() || rows.is_empty() {
        ExperimentVerdict::Inconclusive
    } else {
        ExperimentVerdict::Holds
    };
    Ok(PaGhReport {
        map,
        eps,
        dis,
        net_eps,
        compared: rows.len(),
        max_deviation: max_dev,
        worst,
        max_one_sided,
        bound,
        one_sided_bound,
        verdict,
        unstable,
        rows,
    })
}

/// Distortion of `map` on the zone of `X` and its net constant on the zone
/// of `Y`, in real units.
fn map_quality(
    map: &KnownMap,
    wx: &Window,
    wy: &Window,
    zone_x: u32,
    zone_y: u32,
) -> Result<(Ratio<i64>, Ratio<i64>)> {
    let zero = Ratio::from_integer(0);
    if *map == KnownMap::Identity {
        return Ok((zero, zero));
    }
    let ids_x: Vec<u32> = (0..wx.zone_len(zone_x) as u32).collect();
    let ids_y: Vec<u32> = ids_x
        .iter()
        .map(|&id| wy.require_id(map.apply(wx.vertex(id)), MODULE))
        .collect::<Result<_>>()?;
    let x = FiniteMetricSpace::from_window(wx, &ids_x)?;
    let image = FiniteMetricSpace::from_window(wy, &ids_y).or_else(|_| {
        // a non-injective map repeats points; fall back to window distances
        let d = ids_y
            .iter()
            .map(|&a| ids_y.iter().map(|&b| wy.exact_distance(a, b).map(i64::from)).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        Ok::<_, Error>(FiniteMetricSpace {
            n: d.len(),
            base: 0,
            scale: wy.space().scale,
            dist: d,
        })
    })?;
    let common = Common::new(&x, &image);
    let graph: Vec<(usize, usize)> = (0..ids_x.len()).map(|i| (i, i)).collect();
    let dis = common.real(common.distortion(&graph));

    let image_set = wy.vertex_set(&ids_y.iter().map(|&id| wy.vertex(id)).collect::<Vec<_>>(), MODULE)?;
    let to_image = wy.dist_field(&image_set)?;
    let net = to_image[..wy.zone_len(zone_y)].iter().copied().max().unwrap_or(0);
    let net_eps = Ratio::from_integer(i64::from(net)) / wy.space().scale.ratio();
    Ok((dis, net_eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dist: Vec<Vec<i64>>) -> FiniteMetricSpace {
        FiniteMetricSpace::new(dist, 0, Scale::ONE).unwrap()
    }

    fn path3() -> FiniteMetricSpace {
        space(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]])
    }

    fn triangle() -> FiniteMetricSpace {
        space(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
    }

    #[test]
    fn exact_parsing() {
        assert_eq!(exact::parse("3").unwrap(), Ratio::from(3));
        assert_eq!(exact::parse("-1/2").unwrap(), Ratio::new(-1, 2));
        assert_eq!(exact::parse("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(exact::parse("-.5").unwrap(), Ratio::new(-1, 2));
        assert!(exact::parse("1/0").is_err());
        assert!(exact::parse("x").is_err());
        let c = Correspondence {
            pairs: vec![(0, 0)],
            distortion: Ratio::new(3, 2),
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"pairs":[[0,0]],"distortion":"3/2"}"#);
        assert_eq!(serde_json::from_str::<Correspondence>(&text).unwrap(), c);
    }

    #[test]
    fn rejects_non_metrics_with_witness() {
        let bad = FiniteMetricSpace::new(vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]], 0, Scale::ONE);
        assert_eq!(
            bad,
            Err(Error::NotMetric {
                reason: "triangle inequality fails".into(),
                witness: vec![0, 1, 2]
            })
        );
        assert!(FiniteMetricSpace::new(vec![vec![0, 0], vec![0, 0]], 0, Scale::ONE).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0, 1], vec![2, 0]], 0, Scale::ONE).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n":2,"base":0,"scale":{"num":2,"den":1},"dist":[[0,3],[3,0]]}"#;
        let s: FiniteMetricSpace = serde_json::from_str(text).unwrap();
        assert_eq!(s.distance(0, 1), Ratio::new(3, 2));
        assert_eq!(serde_json::to_string(&s).unwrap(), text);
        assert!(serde_json::from_str::<FiniteMetricSpace>(r#"{"n":2,"base":0,"dist":[[0,1],[2,0]]}"#).is_err());
    }

    #[test]
    fn identical_spaces_have_zero_distortion() {
        let b = gh_bounds(&path3(), &path3(), Budget::default()).unwrap();
        assert_eq!((b.lower, b.upper), (Ratio::from(0), Ratio::from(0)));
        assert_eq!(b.correspondence.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert!(b.proved);
    }

    #[test]
    fn two_point_example() {
        let x = space(vec![vec![0, 1], vec![1, 0]]);
        let y = space(vec![vec![0, 2], vec![2, 0]]);
        let b = gh_bounds(&x, &y, Budget::default()).unwrap();
        assert_eq!((b.lower, b.upper), (Ratio::new(1, 2), Ratio::from(1)));
        let f = build_eps_isometry(&x, &y, &b.correspondence).unwrap();
        assert_eq!(f.map, vec![0, 1]);
        assert!(f.dis <= Ratio::from(1));
        let back = corr_from_isometry(&x, &y, &f, Ratio::from(1)).unwrap();
        assert!(back.distortion <= Ratio::from(3));
    }

    #[test]
    fn scales_are_compared_in_real_units() {
        // {0,2} at scale 2 is {0,1} in real units
        let x = space(vec![vec![0, 1], vec![1, 0]]);
        let y = FiniteMetricSpace::new(vec![vec![0, 2], vec![2, 0]], 0, Scale::new(2, 1).unwrap()).unwrap();
        assert_eq!(gh_bounds(&x, &y, Budget::default()).unwrap().upper, Ratio::from(0));
        let z = FiniteMetricSpace::new(vec![vec![0, 1], vec![1, 0]], 0, Scale::new(3, 1).unwrap()).unwrap();
        assert_eq!(gh_bounds(&y, &z, Budget::default()).unwrap().upper, Ratio::new(2, 3));
    }

    #[test]
    fn path_against_triangle_matches_brute_force() {
        let (x, y) = (path3(), triangle());
        let b = gh_bounds(&x, &y, Budget::default()).unwrap();
        assert_eq!(b.upper, brute_force_min_distortion(&x, &y).unwrap());
        assert_eq!(b.upper, Ratio::from(1));
    }

    #[test]
    fn node_budget_is_flagged() {
        let budget = Budget {
            max_points: 8,
            max_nodes: 2,
        };
        let m = min_distortion_correspondence(&path3(), &triangle(), budget).unwrap();
        assert!(!m.proved);
    }

    #[test]
    fn isometry_needs_base_to_base() {
        assert!(EpsIsometry::from_map(&path3(), &triangle(), vec![1, 0, 2]).is_err());
        let f = EpsIsometry::from_map(&path3(), &triangle(), vec![0, 1, 2]).unwrap();
        assert!(f.verify(&path3(), &triangle()));
        assert!(corr_from_isometry(&path3(), &triangle(), &f, Ratio::new(1, 2)).is_err());
    }

    #[test]
    fn certificate_and_witnesses() {
        let x = path3();
        let c = eps_delta_certificate(&x, &x, &[0, 1, 2], &[0, 1, 2], Ratio::from(1), Ratio::new(1, 10)).unwrap();
        assert!(c.certified);
        let c = eps_delta_certificate(&x, &x, &[0, 1, 2], &[0, 2, 1], Ratio::from(1), Ratio::from(1)).unwrap();
        assert_eq!(
            c.witness,
            Some(CertificateWitness::Pair {
                i: 0,
                j: 1,
                dx: Ratio::from(1),
                dy: Ratio::from(2)
            })
        );
        let c = eps_delta_certificate(&x, &x, &[0], &[0], Ratio::from(1), Ratio::from(1)).unwrap();
        assert!(matches!(c.witness, Some(CertificateWitness::NotNet { point: 2, .. })));
        assert!(eps_delta_certificate(&x, &x, &[0], &[0, 1], Ratio::from(1), Ratio::from(1)).is_err());
    }

    #[test]
    fn line_vs_pendant_line_certificate() {
        let line = Window::materialize(GraphSpace::new(Generator::Line), Vertex::ORIGIN, 30).unwrap();
        let pend = Window::materialize(GraphSpace::new(Generator::PendantLine), Vertex::ORIGIN, 30).unwrap();
        let ids_x: Vec<u32> = (0..line.zone_len(8) as u32).collect();
        let ids_y: Vec<u32> = (0..pend.zone_len(9) as u32)
            .filter(|&id| pend.vertex(id).0.abs() <= 8)
            .collect();
        let x = FiniteMetricSpace::from_window(&line, &ids_x).unwrap();
        let y = FiniteMetricSpace::from_window(&pend, &ids_y).unwrap();
        let net_x: Vec<usize> = (0..x.len()).collect();
        let net_y: Vec<usize> = ids_x
            .iter()
            .map(|&id| ids_y.iter().position(|&j| pend.vertex(j) == line.vertex(id)).unwrap())
            .collect();
        let c = eps_delta_certificate(&x, &y, &net_x, &net_y, Ratio::from(1), Ratio::from(1)).unwrap();
        assert!(c.certified, "{c:?}");
        assert_eq!(c.bound, Ratio::from(3));
    }

    fn params() -> PaGhParams {
        PaGhParams {
            radius: 60,
            zone: 10,
            schedule: (1..=8).map(|i| i * 6).collect(),
            tail: 12,
        }
    }

    #[test]
    fn identity_experiment_has_no_deviation() {
        let s = GraphSpace::new(Generator::Tree { branching: 2 });
        let p = PaGhParams {
            radius: 14,
            zone: 4,
            schedule: vec![4, 6, 8, 10, 12, 14],
            tail: 4,
        };
        let r = pa_gh_experiment(s, s, Ratio::from(0), &p).unwrap();
        assert_eq!(r.max_deviation, Ratio::from(0));
        assert_eq!(r.verdict, ExperimentVerdict::Holds);
    }

    #[test]
    fn pendant_line_against_line() {
        let r = pa_gh_experiment(
            GraphSpace::new(Generator::PendantLine),
            GraphSpace::new(Generator::Line),
            Ratio::from(1),
            &params(),
        )
        .unwrap();
        assert_eq!(r.map, KnownMap::SpineProjection);
        assert_eq!(r.dis, Ratio::from(2));
        assert_eq!(r.max_deviation, Ratio::from(1));
        assert_eq!(r.max_one_sided, Ratio::from(0));
        assert_eq!(r.verdict, ExperimentVerdict::Holds);
        assert!(pa_gh_experiment(
            GraphSpace::new(Generator::PendantLine),
            GraphSpace::new(Generator::Line),
            Ratio::new(1, 2),
            &params(),
        )
        .is_err());
    }

    #[test]
    fn line_dilation() {
        let fine = GraphSpace::with_scale(Generator::Line, Scale::new(2, 1).unwrap());
        let r = pa_gh_experiment(GraphSpace::new(Generator::Line), fine, Ratio::new(1, 4), &params()).unwrap();
        assert_eq!(r.map, KnownMap::Dilation { k: 2 });
        assert_eq!(r.net_eps, Ratio::new(1, 2));
        assert_eq!(r.max_deviation, Ratio::from(0));
    }
}
