#![allow(dead_code)]

use ermakov_core::fixtures::Fixture;
use ermakov_core::CartesianState;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit4(rng: &mut ChaCha8Rng) -> [f64; 4] {
    [rng.random(), rng.random(), rng.random(), rng.random()]
}

pub fn states(fixture: Fixture, n: usize, seed: u64) -> Vec<CartesianState> {
    let mut rng = rng(seed);
    (0..n).map(|_| fixture.sample_state(unit4(&mut rng))).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn max_norm(a: &CartesianState, b: &CartesianState) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}
