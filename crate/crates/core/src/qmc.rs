//! Randomly shifted Halton points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton points in `[0,1)^dim` with a Cranley-Patterson shift drawn from `seed`.
pub fn shifted_halton(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "Halton dimension {dim} is not supported");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|k| {
            (0..dim)
                .map(|d| (radical_inverse(k as u64 + 1, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn integrates_a_polynomial() {
        let pts = shifted_halton(2, 20000, 4);
        let s: f64 = pts.iter().map(|p| p[0] * p[0] + p[1]).sum::<f64>() / pts.len() as f64;
        assert!((s - (1.0 / 3.0 + 0.5)).abs() < 1e-3);
        assert_eq!(pts, shifted_halton(2, 20000, 4));
    }
}
