//! Infinite, locally finite, unit-weight graphs used as discrete geodesic spaces.
//!
//! Every generator names its vertices by a pair of integer coordinates. The
//! coordinates are global, so the same vertex has the same name in every
//! window materialized from the space, whatever the base point.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// A vertex of a generated graph, named by integer coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex(pub i64, pub i64);

impl Vertex {
    pub const ORIGIN: Vertex = Vertex(0, 0);
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Accepts `x,y`, `(x,y)` or a bare `x` (second coordinate 0).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parse = |p: &str| {
            p.parse::<i64>()
                .map_err(|_| Error::domain("core-metric", format!("cannot parse vertex `{s}`")))
        };
        match parts.as_slice() {
            [x] => Ok(Vertex(parse(x)?, 0)),
            [x, y] => Ok(Vertex(parse(x)?, parse(y)?)),
            _ => Err(Error::domain(
                "core-metric",
                format!("cannot parse vertex `{s}`"),
            )),
        }
    }
}

/// The catalog of graph generators.
///
/// Coordinates per generator:
/// - `Line`, `HalfLine`: `(x, 0)`.
/// - `Tree`: `(depth, index within the level)`; the root is `(0, 0)`.
/// - `Grid2d`: `(x, y)` in the square lattice.
/// - `HGraph`: integer points of the x-axis and of the rectangles
///   `(-i,0) -> (-i,i) -> (i,i) -> (i,0)` for every `i >= 1`.
/// - `Stick`: apex `(0, 0)`; otherwise `(angle, level)` with `level` the hop
///   distance from the apex. Levels `1..=spoke` are spoke interiors, levels
///   above carry circumferential edges (a capped half-cylinder).
/// - `PendantLine`: spine `(i, 0)` and the leaf `(i, 1)` hanging from it.
/// - `Cylinder`: `(angle, t)` with `angle` modulo the circumference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Line,
    HalfLine,
    Tree { branching: u32 },
    Grid2d,
    HGraph,
    Stick { circumference: u32, spoke: u32 },
    PendantLine,
    Cylinder { circumference: u32 },
}

impl Generator {
    pub const NAMES: [&'static str; 8] = [
        "line",
        "halfline",
        "tree",
        "grid2d",
        "h_graph",
        "stick",
        "pendant_line",
        "cylinder",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Line => "line",
            Generator::HalfLine => "halfline",
            Generator::Tree { .. } => "tree",
            Generator::Grid2d => "grid2d",
            Generator::HGraph => "h_graph",
            Generator::Stick { .. } => "stick",
            Generator::PendantLine => "pendant_line",
            Generator::Cylinder { .. } => "cylinder",
        }
    }

    /// Builds a generator from its name and a JSON parameter object.
    pub fn from_parts(name: &str, params: &Map<String, Value>) -> Result<Self> {
        let get = |key: &str| -> Result<u32> {
            let value = params.get(key).ok_or_else(|| Error::InvalidParams {
                generator: name.to_string(),
                reason: format!("missing parameter `{key}`"),
            })?;
            value
                .as_u64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::InvalidParams {
                    generator: name.to_string(),
                    reason: format!("parameter `{key}` must be a non-negative integer"),
                })
        };
        let generator = match name {
            "line" => Generator::Line,
            "halfline" => Generator::HalfLine,
            "tree" => Generator::Tree { branching: get("b")? },
            "grid2d" => Generator::Grid2d,
            "h_graph" => Generator::HGraph,
            "stick" => Generator::Stick {
                circumference: get("m")?,
                spoke: get("h")?,
            },
            "pendant_line" => Generator::PendantLine,
            "cylinder" => Generator::Cylinder {
                circumference: get("m")?,
            },
            other => return Err(Error::UnknownGenerator(other.to_string())),
        };
        generator.validate()?;
        Ok(generator)
    }

    pub fn params(&self) -> Map<String, Value> {
        let value = match *self {
            Generator::Tree { branching } => json!({ "b": branching }),
            Generator::Stick {
                circumference,
                spoke,
            } => json!({ "m": circumference, "h": spoke }),
            Generator::Cylinder { circumference } => json!({ "m": circumference }),
            _ => json!({}),
        };
        match value {
            Value::Object(map) => map,
            _ => unreachable!(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| {
            Err(Error::InvalidParams {
                generator: self.name().to_string(),
                reason: reason.to_string(),
            })
        };
        match *self {
            Generator::Tree { branching } if branching < 1 => invalid("b must be >= 1"),
            Generator::Tree { branching } if branching > 64 => invalid("b must be <= 64"),
            Generator::Stick { circumference, .. } | Generator::Cylinder { circumference }
                if circumference < 3 =>
            {
                invalid("m must be >= 3")
            }
            _ => Ok(()),
        }
    }

    pub fn degree_bound(&self) -> usize {
        match *self {
            Generator::Line | Generator::HalfLine => 2,
            Generator::Tree { branching } => branching as usize + 1,
            Generator::Grid2d | Generator::Cylinder { .. } => 4,
            Generator::HGraph | Generator::PendantLine => 3,
            Generator::Stick { circumference, .. } => (circumference as usize).max(4),
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        let Vertex(a, b) = v;
        match *self {
            Generator::Line => b == 0,
            Generator::HalfLine => b == 0 && a >= 0,
            Generator::Tree { branching } => {
                a >= 0
                    && b >= 0
                    && (branching as i64)
                        .checked_pow(a as u32)
                        .is_none_or(|width| b < width)
            }
            Generator::Grid2d => true,
            Generator::HGraph => b >= 0,
            Generator::Stick { circumference, .. } => {
                v == Vertex::ORIGIN || (b >= 1 && (0..circumference as i64).contains(&a))
            }
            Generator::PendantLine => b == 0 || b == 1,
            Generator::Cylinder { circumference } => (0..circumference as i64).contains(&a),
        }
    }

    /// Neighbors of `v` in a fixed, generator-defined order.
    pub fn neighbors(&self, v: Vertex, out: &mut Vec<Vertex>) {
        out.clear();
        let Vertex(x, y) = v;
        match *self {
            Generator::Line => out.extend([Vertex(x - 1, 0), Vertex(x + 1, 0)]),
            Generator::HalfLine => {
                if x > 0 {
                    out.push(Vertex(x - 1, 0));
                }
                out.push(Vertex(x + 1, 0));
            }
            Generator::Tree { branching } => {
                let b = branching as i64;
                if x > 0 {
                    out.push(Vertex(x - 1, y / b));
                }
                out.extend((0..b).map(|c| Vertex(x + 1, y * b + c)));
            }
            Generator::Grid2d => out.extend([
                Vertex(x - 1, y),
                Vertex(x + 1, y),
                Vertex(x, y - 1),
                Vertex(x, y + 1),
            ]),
            Generator::HGraph => {
                if y == 0 {
                    out.extend([Vertex(x - 1, 0), Vertex(x + 1, 0)]);
                    if x != 0 {
                        out.push(Vertex(x, 1));
                    }
                    return;
                }
                // top segment of rectangle `y`
                if x.abs() <= y {
                    if (x - 1).abs() <= y {
                        out.push(Vertex(x - 1, y));
                    }
                    if (x + 1).abs() <= y {
                        out.push(Vertex(x + 1, y));
                    }
                }
                // vertical arm at |x|
                if x.abs() >= y {
                    out.push(Vertex(x, y - 1));
                    if y < x.abs() {
                        out.push(Vertex(x, y + 1));
                    }
                }
            }
            Generator::Stick {
                circumference,
                spoke,
            } => {
                let m = circumference as i64;
                if v == Vertex::ORIGIN {
                    out.extend((0..m).map(|j| Vertex(j, 1)));
                    return;
                }
                out.push(if y == 1 { Vertex::ORIGIN } else { Vertex(x, y - 1) });
                if y > spoke as i64 {
                    out.push(Vertex((x + m - 1) % m, y));
                    out.push(Vertex((x + 1) % m, y));
                }
                out.push(Vertex(x, y + 1));
            }
            Generator::PendantLine => {
                if y == 0 {
                    out.extend([Vertex(x - 1, 0), Vertex(x + 1, 0), Vertex(x, 1)]);
                } else {
                    out.push(Vertex(x, 0));
                }
            }
            Generator::Cylinder { circumference } => {
                let m = circumference as i64;
                out.extend([
                    Vertex((x + m - 1) % m, y),
                    Vertex((x + 1) % m, y),
                    Vertex(x, y - 1),
                    Vertex(x, y + 1),
                ]);
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Tree { branching } => write!(f, "tree:{branching}"),
            Generator::Stick {
                circumference,
                spoke,
            } => write!(f, "stick:{circumference},{spoke}"),
            Generator::Cylinder { circumference } => write!(f, "cylinder:{circumference}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Inline form: `name` or `name:p1,p2` (`tree:2`, `stick:6,2`, `cylinder:5`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((name, args)) => (name.trim(), Some(args)),
            None => (s.trim(), None),
        };
        let values: Vec<u64> = match args {
            None => Vec::new(),
            Some(args) => args
                .split(',')
                .map(|a| {
                    a.trim().parse::<u64>().map_err(|_| Error::InvalidParams {
                        generator: name.to_string(),
                        reason: format!("cannot parse parameter `{a}`"),
                    })
                })
                .collect::<Result<_>>()?,
        };
        let keys: &[&str] = match name {
            "tree" => &["b"],
            "stick" => &["m", "h"],
            "cylinder" => &["m"],
            _ => &[],
        };
        if values.len() != keys.len() {
            if !Generator::NAMES.contains(&name) {
                return Err(Error::UnknownGenerator(name.to_string()));
            }
            return Err(Error::InvalidParams {
                generator: name.to_string(),
                reason: format!("expected parameters {keys:?}, got {} value(s)", values.len()),
            });
        }
        let params = keys
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), Value::from(v)))
            .collect();
        Generator::from_parts(name, &params)
    }
}

/// Positive rational scale factor: a hop count `n` stands for the distance `n / s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scale {
    pub num: i64,
    pub den: i64,
}

impl Scale {
    pub const ONE: Scale = Scale { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if num <= 0 || den <= 0 {
            return Err(Error::domain(
                "core-metric",
                format!("scale must be a positive rational, got {num}/{den}"),
            ));
        }
        let r = Ratio::new(num, den);
        Ok(Scale {
            num: *r.numer(),
            den: *r.denom(),
        })
    }

    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }

    /// Real length of `hops` unit edges.
    pub fn length(&self, hops: i64) -> Ratio<i64> {
        Ratio::from_integer(hops) / self.ratio()
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::ONE
    }
}

/// A generated graph space together with its scale factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GraphSpace {
    pub generator: Generator,
    pub scale: Scale,
}

impl GraphSpace {
    pub fn new(generator: Generator) -> Self {
        GraphSpace {
            generator,
            scale: Scale::ONE,
        }
    }

    pub fn with_scale(generator: Generator, scale: Scale) -> Self {
        GraphSpace { generator, scale }
    }

    pub fn degree_bound(&self) -> usize {
        self.generator.degree_bound()
    }

    pub fn spec(&self) -> SpaceSpec {
        SpaceSpec {
            generator: self.generator.name().to_string(),
            params: self.generator.params(),
            scale: self.scale,
        }
    }

    /// Parses either a space-spec JSON document or the inline generator form.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            let spec: SpaceSpec = serde_json::from_str(trimmed)
                .map_err(|e| Error::domain("core-metric", format!("bad space spec: {e}")))?;
            spec.build()
        } else {
            Ok(GraphSpace::new(trimmed.parse()?))
        }
    }
}

/// On-disk form: `{"generator": "tree", "params": {"b": 2}, "scale": {"num": 1, "den": 1}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub generator: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub scale: Scale,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<GraphSpace> {
        let generator = Generator::from_parts(&self.generator, &self.params)?;
        let scale = Scale::new(self.scale.num, self.scale.den)?;
        Ok(GraphSpace { generator, scale })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_generators() -> Vec<Generator> {
        vec![
            Generator::Line,
            Generator::HalfLine,
            Generator::Tree { branching: 1 },
            Generator::Tree { branching: 3 },
            Generator::Grid2d,
            Generator::HGraph,
            Generator::Stick {
                circumference: 5,
                spoke: 2,
            },
            Generator::Stick {
                circumference: 3,
                spoke: 0,
            },
            Generator::PendantLine,
            Generator::Cylinder { circumference: 4 },
        ]
    }

    #[test]
    fn adjacency_is_symmetric_and_bounded() {
        let mut out = Vec::new();
        let mut back = Vec::new();
        for g in all_generators() {
            for x in -6..=6 {
                for y in -6..=6 {
                    let v = Vertex(x, y);
                    if !g.contains(v) {
                        continue;
                    }
                    g.neighbors(v, &mut out);
                    assert!(out.len() <= g.degree_bound(), "{g} at {v}");
                    for &w in &out {
                        assert!(g.contains(w), "{g}: {v} -> {w} not a vertex");
                        assert_ne!(w, v);
                        g.neighbors(w, &mut back);
                        assert!(back.contains(&v), "{g}: {v} -> {w} not symmetric");
                    }
                }
            }
        }
    }

    #[test]
    fn h_graph_rectangles() {
        let g = Generator::HGraph;
        let mut out = Vec::new();
        g.neighbors(Vertex(3, 3), &mut out);
        assert_eq!(out, vec![Vertex(2, 3), Vertex(3, 2)]);
        g.neighbors(Vertex(0, 0), &mut out);
        assert_eq!(out, vec![Vertex(-1, 0), Vertex(1, 0)]);
        g.neighbors(Vertex(-4, 1), &mut out);
        assert_eq!(out, vec![Vertex(-4, 0), Vertex(-4, 2)]);
        g.neighbors(Vertex(1, 3), &mut out);
        assert_eq!(out, vec![Vertex(0, 3), Vertex(2, 3)]);
    }

    #[test]
    fn inline_and_json_specs() {
        assert_eq!(
            "tree:2".parse::<Generator>().unwrap(),
            Generator::Tree { branching: 2 }
        );
        assert_eq!(
            "stick:6,1".parse::<Generator>().unwrap(),
            Generator::Stick {
                circumference: 6,
                spoke: 1
            }
        );
        assert!(matches!(
            "moebius".parse::<Generator>(),
            Err(Error::UnknownGenerator(_))
        ));
        assert!(matches!(
            "stick:2,1".parse::<Generator>(),
            Err(Error::InvalidParams { .. })
        ));
        assert!(matches!(
            "tree".parse::<Generator>(),
            Err(Error::InvalidParams { .. })
        ));

        let space = GraphSpace::parse(
            r#"{"generator": "cylinder", "params": {"m": 4}, "scale": {"num": 4, "den": 2}}"#,
        )
        .unwrap();
        assert_eq!(space.generator, Generator::Cylinder { circumference: 4 });
        assert_eq!(space.scale, Scale { num: 2, den: 1 });
        let back = serde_json::to_string(&space.spec()).unwrap();
        assert_eq!(GraphSpace::parse(&back).unwrap(), space);
    }

    #[test]
    fn vertex_parsing() {
        assert_eq!("3".parse::<Vertex>().unwrap(), Vertex(3, 0));
        assert_eq!("(-2, 5)".parse::<Vertex>().unwrap(), Vertex(-2, 5));
        assert!("a,b".parse::<Vertex>().is_err());
    }

    #[test]
    fn scale_lengths() {
        let s = Scale::new(2, 1).unwrap();
        assert_eq!(s.length(3), Ratio::new(3, 2));
        assert!(Scale::new(0, 1).is_err());
    }
}
