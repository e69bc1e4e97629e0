//! Test oracle for the GH sandwich: the smallest `d_H(X, Y) + d(x0, y0)` over
//! admissible metrics on `X ⊔ Y` whose cross distances are half-integers.
//! Any admissible metric bounds `d_GH` from above, and the metric built from
//! an optimal correspondence lies on this grid, so
//! `D*/2 <= d_GH <= grid_min <= D*`.

use dlscape::gh::{gh_bounds, Budget};
use dlscape::{FiniteMetricSpace, Scale};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Oracle {
    dx: Vec<Vec<i64>>,
    dy: Vec<Vec<i64>>,
    nx: usize,
    ny: usize,
    cap: i64,
    c: Vec<i64>,
    best: i64,
}

impl Oracle {
    fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: i64) -> Self {
        let twice = |d: &[Vec<i64>]| d.iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
        Oracle {
            dx: twice(x.dist()),
            dy: twice(y.dist()),
            nx: x.len(),
            ny: y.len(),
            cap,
            c: vec![0; x.len() * y.len()],
            best: i64::MAX,
        }
    }

    fn objective(&self) -> i64 {
        let (nx, ny) = (self.nx, self.ny);
        let rows = (0..nx).map(|i| (0..ny).map(|j| self.c[i * ny + j]).min().unwrap()).max().unwrap();
        let cols = (0..ny).map(|j| (0..nx).map(|i| self.c[i * ny + j]).min().unwrap()).max().unwrap();
        rows.max(cols) + self.c[0]
    }

    /// Assigns cross distances in row-major order; bases are index 0.
    fn search(&mut self, k: usize) {
        let (nx, ny) = (self.nx, self.ny);
        if k == nx * ny {
            self.best = self.best.min(self.objective());
            return;
        }
        let (i, j) = (k / ny, k % ny);
        let (mut lo, mut hi) = (0, self.cap);
        for i2 in 0..i {
            let (c, d) = (self.c[i2 * ny + j], self.dx[i][i2]);
            lo = lo.max(c - d).max(d - c);
            hi = hi.min(c + d);
        }
        for j2 in 0..j {
            let (c, d) = (self.c[i * ny + j2], self.dy[j][j2]);
            lo = lo.max(c - d).max(d - c);
            hi = hi.min(c + d);
        }
        for v in lo..=hi {
            if k == 0 && v >= self.best {
                break;
            }
            // a finished row fixes its own contribution to d_H
            self.c[k] = v;
            if j == ny - 1 {
                let row_min = (0..ny).map(|jj| self.c[i * ny + jj]).min().unwrap();
                if row_min + self.c[0] >= self.best {
                    continue;
                }
            }
            self.search(k + 1);
        }
    }
}

fn grid_min(x: &FiniteMetricSpace, y: &FiniteMetricSpace, upper: Ratio<i64>) -> Ratio<i64> {
    let diam = |s: &FiniteMetricSpace| s.dist().iter().flatten().copied().max().unwrap();
    let cap = 2 * (diam(x) + diam(y)) + upper.ceil().to_integer();
    let mut o = Oracle::new(x, y, cap);
    o.search(0);
    Ratio::new(o.best, 2)
}

fn check(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> (Ratio<i64>, Ratio<i64>, Ratio<i64>) {
    let b = gh_bounds(x, y, Budget::default()).unwrap();
    let g = grid_min(x, y, b.upper);
    assert!(b.lower <= g && g <= b.upper, "lower {} grid {} upper {}", b.lower, g, b.upper);
    (b.lower, g, b.upper)
}

fn space(dist: Vec<Vec<i64>>) -> FiniteMetricSpace {
    FiniteMetricSpace::new(dist, 0, Scale::ONE).unwrap()
}

#[test]
fn two_point_spaces() {
    let x = space(vec![vec![0, 1], vec![1, 0]]);
    let y = space(vec![vec![0, 2], vec![2, 0]]);
    let (lower, g, upper) = check(&x, &y);
    assert_eq!((lower, upper), (Ratio::new(1, 2), Ratio::from(1)));
    // c(x0, y0) = t forces every cross distance to y1 up to at least 1 - t
    assert_eq!(g, Ratio::from(1));
}

#[test]
fn identical_spaces_have_zero_grid_distance() {
    let x = space(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]]);
    assert_eq!(check(&x, &x), (Ratio::from(0), Ratio::from(0), Ratio::from(0)));
}

#[test]
fn random_small_spaces_sit_inside_the_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let nx = rng.gen_range(1..=3);
        let ny = rng.gen_range(1..=3);
        let x = FiniteMetricSpace::random(&mut rng, nx, 4, Scale::ONE);
        let y = FiniteMetricSpace::random(&mut rng, ny, 4, Scale::ONE);
        check(&x, &y);
    }
}

#[test]
fn random_four_point_spaces_sit_inside_the_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..6 {
        let x = FiniteMetricSpace::random(&mut rng, 4, 3, Scale::ONE);
        let y = FiniteMetricSpace::random(&mut rng, 4, 3, Scale::ONE);
        check(&x, &y);
    }
}
