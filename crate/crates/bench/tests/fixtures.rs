use dlscape::Generator;
use dlscape_bench::{gh_pair, grid_radius_for, window};

#[test]
fn grid_radius_is_minimal() {
    for n in [1, 5, 13, 14, 10_000, 1_000_000] {
        let r = grid_radius_for(n);
        assert!(window(Generator::Grid2d, r).len() >= n);
        if r > 0 {
            assert!(window(Generator::Grid2d, r - 1).len() < n);
        }
    }
}

#[test]
fn gh_pairs_are_reproducible() {
    let (a, b) = gh_pair(5, 3);
    let (c, d) = gh_pair(5, 3);
    assert_eq!(a.dist(), c.dist());
    assert_eq!(b.dist(), d.dist());
    assert_eq!(a.len(), 5);
}
