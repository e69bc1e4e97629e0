//! Inputs shared by the benchmarks.

use std::sync::Arc;

use dlscape::{FiniteMetricSpace, Generator, GraphSpace, Scale, Vertex, Window};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Smallest grid2d radius whose ball holds at least `n` vertices.
pub fn grid_radius_for(n: usize) -> u32 {
    let mut r = 0u32;
    while 2 * (r as usize) * (r as usize + 1) + 1 < n {
        r += 1;
    }
    r
}

pub fn window(generator: Generator, radius: u32) -> Arc<Window> {
    Arc::new(Window::materialize(GraphSpace::new(generator), Vertex::ORIGIN, radius).expect("bench window"))
}

/// A reproducible pair of random pointed spaces with `n` points each.
pub fn gh_pair(n: usize, seed: u64) -> (FiniteMetricSpace, FiniteMetricSpace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = FiniteMetricSpace::random(&mut rng, n, 6, Scale::ONE);
    let y = FiniteMetricSpace::random(&mut rng, n, 6, Scale::ONE);
    (x, y)
}
