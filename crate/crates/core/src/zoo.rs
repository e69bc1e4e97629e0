//! Catalog of generators whose distance-like functions are known in closed form.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::space::{Generator, GraphSpace, Vertex};

pub type GeneratorSpec = Generator;

pub fn build(spec: GeneratorSpec) -> Result<GraphSpace> {
    spec.validate()?;
    Ok(GraphSpace::new(spec))
}

/// Quantities for which [`oracle`] knows a closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `u_{base}` at the listed vertices.
    PointAssigned { base: Vertex, at: Vec<Vertex> },
    /// `2 rho(x, y)` for the listed pairs.
    TwiceRho(Vec<(Vertex, Vertex)>),
    /// `d(base, v)` for the listed vertices.
    Distance { base: Vertex, at: Vec<Vertex> },
    /// Listed members of `S_n((0,0))` on the H-graph, `n` a multiple of 6.
    SphereMembers(u32),
}

/// Expected values with the tolerance the comparison must use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleValues {
    pub vertices: Vec<Vertex>,
    pub values: Vec<i64>,
    pub tolerance: i64,
}

fn unsupported(spec: GeneratorSpec, what: &str) -> Error {
    Error::domain("zoo", format!("no oracle for {what} on `{spec}`"))
}

/// Hop distance on the generators that have a formula for it.
pub fn distance(spec: GeneratorSpec, a: Vertex, b: Vertex) -> Option<i64> {
    let circ = |m: u32, i: i64, j: i64| {
        let d = (i - j).rem_euclid(m as i64);
        d.min(m as i64 - d)
    };
    match spec {
        Generator::Line | Generator::HalfLine => Some((a.0 - b.0).abs()),
        Generator::Grid2d => Some((a.0 - b.0).abs() + (a.1 - b.1).abs()),
        Generator::Cylinder { circumference } => {
            Some(circ(circumference, a.0, b.0) + (a.1 - b.1).abs())
        }
        Generator::PendantLine => Some((a.0 - b.0).abs() + (a.1 + b.1) * (a != b) as i64),
        Generator::Tree { branching } => {
            let b_ = branching as i64;
            let (mut x, mut y) = (a, b);
            let mut d = 0;
            while x.0 > y.0 {
                x = Vertex(x.0 - 1, x.1 / b_);
                d += 1;
            }
            while y.0 > x.0 {
                y = Vertex(y.0 - 1, y.1 / b_);
                d += 1;
            }
            while x != y {
                x = Vertex(x.0 - 1, x.1 / b_);
                y = Vertex(y.0 - 1, y.1 / b_);
                d += 2;
            }
            Some(d)
        }
        Generator::Stick { .. } if a == Vertex::ORIGIN => Some(b.1),
        Generator::Stick { .. } if b == Vertex::ORIGIN => Some(a.1),
        Generator::HGraph if a == Vertex::ORIGIN => h_graph_norm(b),
        _ => None,
    }
}

/// `d((0,0), v)` on the H-graph.
fn h_graph_norm(v: Vertex) -> Option<i64> {
    let Vertex(x, y) = v;
    if y < 0 {
        return None;
    }
    if y == 0 {
        return Some(x.abs());
    }
    if y <= x.abs() {
        // on the arm at |x|
        return Some(x.abs() + y);
    }
    // top segment of rectangle y: reach a corner, then along the top
    Some(2 * y + (y - x.abs()))
}

/// Closed-form expected values used by the acceptance tests.
pub fn oracle(spec: GeneratorSpec, quantity: &Quantity) -> Result<OracleValues> {
    match quantity {
        Quantity::PointAssigned { base, at } => {
            let mut tolerance = 0;
            let values = at
                .iter()
                .map(|&v| point_assigned(spec, *base, v, &mut tolerance))
                .collect::<Result<_>>()?;
            Ok(OracleValues {
                vertices: at.clone(),
                values,
                tolerance,
            })
        }
        Quantity::TwiceRho(pairs) => {
            let values = pairs
                .iter()
                .map(|&(x, y)| match spec {
                    Generator::HalfLine | Generator::Tree { branching: 1 } => Ok(0),
                    Generator::Line | Generator::Tree { .. } | Generator::Grid2d => {
                        Ok(2 * distance(spec, x, y).unwrap())
                    }
                    _ => Err(unsupported(spec, "rho")),
                })
                .collect::<Result<_>>()?;
            Ok(OracleValues {
                vertices: pairs.iter().flat_map(|&(x, y)| [x, y]).collect(),
                values,
                tolerance: 0,
            })
        }
        Quantity::Distance { base, at } => {
            let values = at
                .iter()
                .map(|&v| distance(spec, *base, v).ok_or_else(|| unsupported(spec, "distance")))
                .collect::<Result<_>>()?;
            Ok(OracleValues {
                vertices: at.clone(),
                values,
                tolerance: 0,
            })
        }
        Quantity::SphereMembers(n) => {
            if spec != Generator::HGraph || n % 6 != 0 {
                return Err(unsupported(spec, "sphere members (h_graph, n = 0 mod 6)"));
            }
            let vertices = h_graph_sphere_members(*n as i64);
            Ok(OracleValues {
                values: vec![*n as i64; vertices.len()],
                vertices,
                tolerance: 0,
            })
        }
    }
}

/// The listed members of `S_n(x0)`: `(i, n-i)` for `n/2 <= i <= n` and
/// `(3i-n, i)` for `n/3 <= i <= n/2`.
pub fn h_graph_sphere_members(n: i64) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = (n / 2..=n).map(|i| Vertex(i, n - i)).collect();
    out.extend((n / 3..=n / 2).map(|i| Vertex(3 * i - n, i)));
    out.sort();
    out.dedup();
    out
}

fn point_assigned(spec: GeneratorSpec, base: Vertex, v: Vertex, tolerance: &mut i64) -> Result<i64> {
    match spec {
        Generator::HGraph if base == Vertex::ORIGIN => match v {
            Vertex(k, 0) if k >= 0 => Ok(-k),
            Vertex(0, k) if k > 0 => Ok(k),
            Vertex(k, j) if k == j && k > 0 => Ok(0),
            _ => Err(unsupported(spec, &format!("u at {v}"))),
        },
        Generator::Line | Generator::Grid2d | Generator::Cylinder { .. } => {
            Ok(-distance(spec, base, v).unwrap())
        }
        Generator::Tree { branching } if branching >= 2 => Ok(-distance(spec, base, v).unwrap()),
        Generator::Tree { .. } | Generator::HalfLine => Ok(base.0 - v.0),
        Generator::PendantLine if base.1 == 0 => {
            let leaf = v.1;
            Ok(-(v.0 - base.0).abs() + leaf)
        }
        Generator::Stick { circumference, .. } => {
            if base != Vertex::ORIGIN {
                *tolerance = (*tolerance).max(circumference as i64 / 2);
            }
            Ok(base.1 - v.1)
        }
        _ => Err(unsupported(spec, "point-assigned values")),
    }
}

/// JSON catalog printed by `zoo list`.
pub fn catalog() -> Value {
    json!([
        {"name": "line", "params": {}, "degree_bound": 2,
         "oracles": ["point_assigned", "rho", "distance"]},
        {"name": "halfline", "params": {}, "degree_bound": 2,
         "oracles": ["point_assigned", "rho", "distance"]},
        {"name": "tree", "params": {"b": "integer >= 1"}, "degree_bound": "b + 1",
         "oracles": ["point_assigned", "rho", "distance"]},
        {"name": "grid2d", "params": {}, "degree_bound": 4,
         "oracles": ["point_assigned", "rho", "distance"]},
        {"name": "h_graph", "params": {}, "degree_bound": 3,
         "oracles": ["point_assigned(p_k, x_k, q_k)", "distance from (0,0)", "sphere_members"]},
        {"name": "stick", "params": {"m": "integer >= 3", "h": "integer >= 0"},
         "degree_bound": "max(m, 4)",
         "oracles": ["point_assigned (exact at apex, tolerance m/2 elsewhere)", "distance from apex"]},
        {"name": "pendant_line", "params": {}, "degree_bound": 3,
         "oracles": ["point_assigned", "distance"]},
        {"name": "cylinder", "params": {"m": "integer >= 3"}, "degree_bound": 4,
         "oracles": ["point_assigned", "distance"]},
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::Window;

    fn brute(spec: GeneratorSpec, a: Vertex, radius: u32) -> Window {
        Window::materialize(GraphSpace::new(spec), a, radius).unwrap()
    }

    #[test]
    fn distance_formulas_match_bfs() {
        let specs = [
            Generator::Line,
            Generator::HalfLine,
            Generator::Grid2d,
            Generator::Cylinder { circumference: 5 },
            Generator::PendantLine,
            Generator::Tree { branching: 2 },
            Generator::Tree { branching: 3 },
            Generator::Stick {
                circumference: 4,
                spoke: 2,
            },
            Generator::HGraph,
        ];
        for spec in specs {
            let w = brute(spec, Vertex::ORIGIN, 9);
            for (id, &v) in w.vertices().iter().enumerate() {
                assert_eq!(
                    distance(spec, Vertex::ORIGIN, v),
                    Some(w.dist_from_base(id as u32) as i64),
                    "{spec} at {v}"
                );
            }
        }
    }

    #[test]
    fn tree_depth_three() {
        let t = Generator::Tree { branching: 2 };
        for idx in 0..8 {
            assert_eq!(distance(t, Vertex::ORIGIN, Vertex(3, idx)), Some(3));
        }
        assert_eq!(distance(t, Vertex(3, 0), Vertex(3, 7)), Some(6));
    }

    #[test]
    fn h_graph_top_midpoints() {
        let w = brute(Generator::HGraph, Vertex::ORIGIN, 40);
        for k in 1..=12 {
            let id = w.id_of(Vertex(0, k)).unwrap();
            assert_eq!(w.dist_from_base(id) as i64, 3 * k);
        }
    }

    #[test]
    fn stick_apex_to_cycle() {
        for h in 0..4 {
            let spec = Generator::Stick {
                circumference: 5,
                spoke: h,
            };
            let w = brute(spec, Vertex::ORIGIN, 8);
            let id = w.id_of(Vertex(2, h as i64 + 1)).unwrap();
            assert_eq!(w.dist_from_base(id), h + 1);
        }
    }

    #[test]
    fn h_graph_oracle_values() {
        let q = Quantity::PointAssigned {
            base: Vertex::ORIGIN,
            at: vec![Vertex(5, 0), Vertex(0, 5), Vertex(5, 5)],
        };
        let o = oracle(Generator::HGraph, &q).unwrap();
        assert_eq!(o.values, vec![-5, 5, 0]);
        let bad = Quantity::PointAssigned {
            base: Vertex::ORIGIN,
            at: vec![Vertex(-3, 1)],
        };
        assert!(oracle(Generator::HGraph, &bad).is_err());
        let sphere = oracle(Generator::HGraph, &Quantity::SphereMembers(12)).unwrap();
        assert!(sphere.vertices.contains(&Vertex(6, 6)));
        assert!(sphere.vertices.contains(&Vertex(0, 4)));
        assert!(sphere.vertices.contains(&Vertex(12, 0)));
        assert!(oracle(Generator::HGraph, &Quantity::SphereMembers(10)).is_err());
    }

    #[test]
    fn stick_tolerance() {
        let spec = Generator::Stick {
            circumference: 6,
            spoke: 1,
        };
        let at_apex = oracle(
            spec,
            &Quantity::PointAssigned {
                base: Vertex::ORIGIN,
                at: vec![Vertex(3, 4)],
            },
        )
        .unwrap();
        assert_eq!((at_apex.values[0], at_apex.tolerance), (-4, 0));
        let off = oracle(
            spec,
            &Quantity::PointAssigned {
                base: Vertex(1, 3),
                at: vec![Vertex(3, 4)],
            },
        )
        .unwrap();
        assert_eq!((off.values[0], off.tolerance), (-1, 3));
    }

    #[test]
    fn catalog_lists_every_generator() {
        let names: Vec<String> = catalog()
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["name"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(names, Generator::NAMES);
    }
}
