#![allow(dead_code)]

pub mod decorated;
pub mod domino;
pub mod feq;
pub mod padic;
pub mod pipeline;
pub mod sudoku;
pub mod tiling;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every vector of `len` digits in 0..base, last digit fastest.
pub fn odometer(len: usize, base: i64) -> impl Iterator<Item = Vec<i64>> {
    let total = (base as u64).pow(len as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0; len];
        for x in v.iter_mut().rev() {
            *x = (k % base as u64) as i64;
            k /= base as u64;
        }
        v
    })
}
