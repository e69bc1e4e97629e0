//! Finite windows `B_R(x0)` of an infinite graph space.
//!
//! A window is materialized by breadth-first search from its base, so
//! `dist_from_base` is the true hop distance and vertices are stored level by
//! level. Distances between other pairs are only trusted inside the zones
//! where every shortest path provably stays in the window:
//! - pairs inside `B_{R/3}(x0)`;
//! - `d(x, S_r)` for `d(x0, x) <= r <= R`, or for `r + 2 d(x0, x) <= R`;
//! - any pair `(a, b)` with `d(x0, a) + d_window(a, b) <= R`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{GraphSpace, SpaceSpec, Vertex};

/// Default cap on the number of vertices a window may hold.
pub const DEFAULT_MAX_VERTICES: usize = 2_000_000;

/// Environment variable overriding [`DEFAULT_MAX_VERTICES`].
pub const MAX_VERTICES_ENV: &str = "DLSCAPE_MAX_VERTICES";

pub const UNREACHED: u32 = u32::MAX;

pub fn max_vertices_from_env() -> usize {
    std::env::var(MAX_VERTICES_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse().ok())
        .unwrap_or(DEFAULT_MAX_VERTICES)
}

/// Sorted, duplicate-free list of window vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    pub fn new(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(&other.0).copied().collect())
    }
}

#[derive(Clone, Debug)]
pub struct Window {
    space: GraphSpace,
    base: Vertex,
    radius: u32,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, u32>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    dist: Vec<u32>,
    level_starts: Vec<usize>,
}

impl Window {
    /// Materializes `B_radius(base)` under the vertex cap from the environment.
    pub fn materialize(space: GraphSpace, base: Vertex, radius: u32) -> Result<Window> {
        Self::materialize_with_limit(space, base, radius, max_vertices_from_env())
    }

    pub fn materialize_with_limit(
        space: GraphSpace,
        base: Vertex,
        radius: u32,
        limit: usize,
    ) -> Result<Window> {
        let generator = space.generator;
        generator.validate()?;
        if !generator.contains(base) {
            return Err(Error::NotAVertex {
                generator: generator.to_string(),
                vertex: base,
            });
        }
        let mut vertices = vec![base];
        let mut dist = vec![0u32];
        let mut index = HashMap::new();
        index.insert(base, 0u32);
        let mut offsets = Vec::with_capacity(1);
        let mut targets = Vec::new();
        let mut level_starts = vec![0usize];
        let mut scratch = Vec::with_capacity(generator.degree_bound());

        let mut head = 0;
        while head < vertices.len() {
            let v = vertices[head];
            let d = dist[head];
            offsets.push(targets.len() as u32);
            generator.neighbors(v, &mut scratch);
            for &w in &scratch {
                let id = match index.get(&w) {
                    Some(&id) => id,
                    None if d < radius => {
                        if vertices.len() >= limit {
                            return Err(Error::ResourceLimit { radius, limit });
                        }
                        let id = vertices.len() as u32;
                        if dist[id as usize - 1] == d {
                            level_starts.push(id as usize);
                        }
                        vertices.push(w);
                        dist.push(d + 1);
                        index.insert(w, id);
                        id
                    }
                    None => continue,
                };
                targets.push(id);
            }
            head += 1;
        }
        offsets.push(targets.len() as u32);
        level_starts.push(vertices.len());
        debug_assert_eq!(level_starts.len(), radius as usize + 2, "empty sphere");
        Ok(Window {
            space,
            base,
            radius,
            vertices,
            index,
            offsets,
            targets,
            dist,
            level_starts,
        })
    }

    pub fn space(&self) -> &GraphSpace {
        &self.space
    }

    pub fn base(&self) -> Vertex {
        self.base
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: u32) -> Vertex {
        self.vertices[id as usize]
    }

    pub fn id_of(&self, v: Vertex) -> Option<u32> {
        self.index.get(&v).copied()
    }

    pub fn require_id(&self, v: Vertex, module: &'static str) -> Result<u32> {
        self.id_of(v)
            .ok_or(Error::OutsideWindow { module, vertex: v })
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        let lo = self.offsets[id as usize] as usize;
        let hi = self.offsets[id as usize + 1] as usize;
        &self.targets[lo..hi]
    }

    pub fn dist_from_base(&self, id: u32) -> u32 {
        self.dist[id as usize]
    }

    pub fn dists_from_base(&self) -> &[u32] {
        &self.dist
    }

    /// Number of vertices with `dist_from_base <= rho`; they are the first ids.
    pub fn zone_len(&self, rho: u32) -> usize {
        self.level_starts[(rho.min(self.radius) + 1) as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn vertex_set(&self, vs: &[Vertex], module: &'static str) -> Result<VertexSet> {
        vs.iter()
            .map(|&v| self.require_id(v, module))
            .collect::<Result<Vec<_>>>()
            .map(VertexSet::new)
    }

    /// `S_r(x0)`: every vertex at hop distance exactly `r` from the base.
    pub fn sphere(&self, r: u32) -> Result<VertexSet> {
        if r > self.radius {
            return Err(Error::Validity {
                module: "core-metric",
                what: "sphere radius".into(),
                value: r as i64,
                limit: self.radius as i64,
                param: "--radius",
            });
        }
        let lo = self.level_starts[r as usize];
        let hi = self.level_starts[r as usize + 1];
        Ok(VertexSet((lo as u32..hi as u32).collect()))
    }

    /// Multi-source breadth-first distances `d(., sources)` inside the window.
    pub fn dist_field(&self, sources: &VertexSet) -> Result<Vec<u32>> {
        if sources.is_empty() {
            return Err(Error::Empty {
                module: "core-metric",
                what: "source set",
            });
        }
        Ok(self.bfs(sources.ids(), UNREACHED))
    }

    /// Breadth-first distances from `sources`, exploring at most `max_depth` hops.
    /// Vertices beyond the horizon hold [`UNREACHED`].
    pub fn bfs(&self, sources: &[u32], max_depth: u32) -> Vec<u32> {
        let mut out = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::with_capacity(sources.len());
        for &s in sources {
            if out[s as usize] != 0 {
                out[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = out[u as usize];
            if du >= max_depth {
                continue;
            }
            for &w in self.neighbors(u) {
                if out[w as usize] == UNREACHED {
                    out[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Hop distance between two window vertices, certified exact: the
    /// in-window shortest path must satisfy `d(x0, a) + d(a, b) <= R`.
    pub fn exact_distance(&self, a: u32, b: u32) -> Result<u32> {
        let budget = self.radius - self.dist_from_base(a);
        let d = self.bfs(&[a], budget)[b as usize];
        if d == UNREACHED {
            return Err(Error::Validity {
                module: "core-metric",
                what: format!(
                    "distance certificate for {} -> {}",
                    self.vertex(a),
                    self.vertex(b)
                ),
                value: self.dist_from_base(a) as i64 + self.dist_from_base(b) as i64,
                limit: self.radius as i64,
                param: "--radius",
            });
        }
        Ok(d)
    }

    /// Exact pairwise distances for a sample inside `B_{R/3}(x0)`, rows in
    /// sample order.
    pub fn pairwise_dist(&self, sample: &[u32]) -> Result<Vec<Vec<u32>>> {
        let zone = self.radius / 3;
        for &id in sample {
            if self.dist_from_base(id) > zone {
                return Err(Error::Validity {
                    module: "core-metric",
                    what: format!("d(x0, {})", self.vertex(id)),
                    value: self.dist_from_base(id) as i64,
                    limit: zone as i64,
                    param: "--radius (pairwise zone is R/3)",
                });
            }
        }
        Ok(sample
            .iter()
            .map(|&a| {
                let row = self.bfs(&[a], 2 * zone);
                sample.iter().map(|&b| row[b as usize]).collect()
            })
            .collect())
    }

    pub fn export(&self) -> WindowExport {
        let mut edges = Vec::with_capacity(self.edge_count());
        for u in 0..self.len() as u32 {
            for &w in self.neighbors(u) {
                if u < w {
                    edges.push([u, w]);
                }
            }
        }
        WindowExport {
            space: self.space.spec(),
            base: self.base,
            radius: self.radius,
            vertices: self.vertices.clone(),
            edges,
            dist_from_base: self.dist.clone(),
        }
    }
}

/// Reusable bounded breadth-first search around a single vertex.
pub struct BallSearch {
    stamp: Vec<u32>,
    depth: Vec<u32>,
    generation: u32,
    order: Vec<u32>,
}

impl BallSearch {
    pub fn new(window: &Window) -> Self {
        BallSearch {
            stamp: vec![0; window.len()],
            depth: vec![0; window.len()],
            generation: 0,
            order: Vec::new(),
        }
    }

    /// Visits the in-window ball of `radius` hops around `center`; see
    /// [`BallSearch::visited`] for the result.
    pub fn run(&mut self, window: &Window, center: u32, radius: u32) {
        self.generation += 1;
        let generation = self.generation;
        self.order.clear();
        self.order.push(center);
        self.stamp[center as usize] = generation;
        self.depth[center as usize] = 0;
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.depth[u as usize];
            if du == radius {
                continue;
            }
            for &w in window.neighbors(u) {
                if self.stamp[w as usize] != generation {
                    self.stamp[w as usize] = generation;
                    self.depth[w as usize] = du + 1;
                    self.order.push(w);
                }
            }
        }
    }

    /// Ids reached by the last search, in breadth-first order.
    pub fn visited(&self) -> &[u32] {
        &self.order
    }

    /// Depth of `id` in the last search, if it was reached.
    pub fn depth(&self, id: u32) -> Option<u32> {
        (self.stamp[id as usize] == self.generation).then(|| self.depth[id as usize])
    }
}

/// JSON export: vertices in breadth-first order, edges as id pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowExport {
    pub space: SpaceSpec,
    pub base: Vertex,
    pub radius: u32,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[u32; 2]>,
    pub dist_from_base: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Generator;

    fn window(g: Generator, base: Vertex, r: u32) -> Window {
        Window::materialize(GraphSpace::new(g), base, r).unwrap()
    }

    #[test]
    fn line_and_halfline_sizes() {
        let w = window(Generator::Line, Vertex::ORIGIN, 5);
        assert_eq!(w.len(), 11);
        let xs: Vec<i64> = w.vertices().iter().map(|v| v.0).collect();
        assert_eq!(xs, vec![0, -1, 1, -2, 2, -3, 3, -4, 4, -5, 5]);
        let w = window(Generator::HalfLine, Vertex::ORIGIN, 5);
        assert_eq!(w.len(), 6);
        let w = window(Generator::HGraph, Vertex::ORIGIN, 0);
        assert_eq!(w.len(), 1);
        assert_eq!(w.sphere(0).unwrap().ids(), &[0]);
    }

    #[test]
    fn line_dist_field_and_sphere() {
        let w = window(Generator::Line, Vertex::ORIGIN, 5);
        let src = w.vertex_set(&[Vertex(3, 0)], "test").unwrap();
        let d = w.dist_field(&src).unwrap();
        assert_eq!(d[w.id_of(Vertex(-2, 0)).unwrap() as usize], 5);
        assert_eq!(d[w.id_of(Vertex(3, 0)).unwrap() as usize], 0);
        let s3: Vec<Vertex> = w.sphere(3).unwrap().ids().iter().map(|&i| w.vertex(i)).collect();
        assert_eq!(s3, vec![Vertex(-3, 0), Vertex(3, 0)]);
        assert!(w.sphere(6).is_err());
        assert!(w.dist_field(&VertexSet::default()).is_err());
    }

    #[test]
    fn pairwise_examples() {
        let w = window(Generator::Line, Vertex::ORIGIN, 9);
        let ids = |w: &Window, vs: &[Vertex]| -> Vec<u32> {
            vs.iter().map(|&v| w.id_of(v).unwrap()).collect()
        };
        let s = ids(&w, &[Vertex(-1, 0), Vertex(0, 0), Vertex(2, 0)]);
        assert_eq!(
            w.pairwise_dist(&s).unwrap(),
            vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]]
        );
        let single = ids(&w, &[Vertex(2, 0)]);
        assert_eq!(w.pairwise_dist(&single).unwrap(), vec![vec![0]]);
        let far = ids(&w, &[Vertex(4, 0)]);
        let err = w.pairwise_dist(&far).unwrap_err();
        assert!(err.to_string().contains("(4,0)"), "{err}");

        let h = window(Generator::HGraph, Vertex::ORIGIN, 12);
        let s = ids(&h, &[Vertex(0, 0), Vertex(2, 0), Vertex(2, 2)]);
        assert_eq!(h.pairwise_dist(&s).unwrap()[0][2], 4);
    }

    #[test]
    fn h_graph_to_sphere() {
        let w = window(Generator::HGraph, Vertex::ORIGIN, 40);
        let d = w.dist_field(&w.sphere(12).unwrap()).unwrap();
        assert_eq!(d[w.id_of(Vertex(4, 0)).unwrap() as usize], 8);
    }

    #[test]
    fn resource_limit() {
        let err = Window::materialize_with_limit(GraphSpace::new(Generator::Grid2d), Vertex::ORIGIN, 50, 100)
            .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
        let err = Window::materialize(GraphSpace::new(Generator::HalfLine), Vertex(-1, 0), 3)
            .unwrap_err();
        assert!(matches!(err, Error::NotAVertex { .. }));
    }

    #[test]
    fn exact_distance_certificate() {
        let w = window(Generator::Cylinder { circumference: 5 }, Vertex::ORIGIN, 6);
        let a = w.id_of(Vertex(0, 3)).unwrap();
        let b = w.id_of(Vertex(2, 4)).unwrap();
        assert_eq!(w.exact_distance(a, b).unwrap(), 3);
        let far = w.id_of(Vertex(0, 6)).unwrap();
        let near = w.id_of(Vertex(0, -6)).unwrap();
        assert!(w.exact_distance(far, near).is_err());
    }
}
