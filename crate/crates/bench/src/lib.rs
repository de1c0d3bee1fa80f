//! Shared fixtures for the benchmarks.

use bessmertnyi::colligation::synthesis_grid_size;
use bessmertnyi::sampling::{halton_disk_grid, halton_halfplane_grid, random_pencil, seeded, PencilShape};
use bessmertnyi::{RealizedFunction, Tolerances};

pub type Point = Vec<bessmertnyi::Complex64>;

pub fn pencil(num_vars: usize, n: usize, p: usize, seed: u64) -> RealizedFunction {
    let mut rng = seeded(seed);
    random_pencil(&mut rng, PencilShape { num_vars, n, p }, false, Tolerances::default()).expect("random pencil")
}

pub fn halfplane_points(f: &RealizedFunction, count: usize) -> Vec<Point> {
    halton_halfplane_grid(f.num_vars(), count, 1)
}

pub fn synthesis_grid(f: &RealizedFunction) -> Vec<Point> {
    halton_disk_grid(f.num_vars(), synthesis_grid_size(f), 0.7, 1, true)
}
