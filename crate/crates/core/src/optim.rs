//! Derivative-free minimization (Nelder-Mead with seeded restarts).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.2, max_evals: 4000, f_tol: 1e-12, x_tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

pub fn nelder_mead<F>(f: &F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    if d == 0 {
        return Minimum { x: vec![], value: f(x0), evals: 1 };
    }
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut evals = d + 1;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let flat = (worst - best).abs() <= opts.f_tol && size <= 1e-6;
        if flat || size <= opts.x_tol {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(gamma);
            let fe = eval(&xe);
            evals += 1;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let x = along(rho);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-rho);
                let v = eval(&x);
                (x, v)
            };
            evals += 1;
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + sigma * (*xi - bi);
                    }
                    *v = eval(x);
                }
                evals += d;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals }
}

/// Runs from `x0` and from `restarts - 1` seeded perturbations of it, then
/// polishes the best point once more. Returns the best result.
pub fn multistart<F>(
    f: &F,
    x0: &[f64],
    restarts: usize,
    perturbation: f64,
    seed: u64,
    opts: &NelderMeadOptions,
) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = nelder_mead(f, x0, opts);
    for _ in 1..restarts.max(1) {
        let start: Vec<f64> = x0
            .iter()
            .map(|x| x + perturbation * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let m = nelder_mead(f, &start, opts);
        if m.value < best.value {
            best = m;
        }
    }
    let polish = NelderMeadOptions { initial_step: opts.initial_step * 0.1, ..*opts };
    let m = nelder_mead(f, &best.x, &polish);
    if m.value < best.value {
        best = Minimum { evals: best.evals + m.evals, ..m };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(&f, &[-1.2, 1.0], &NelderMeadOptions { max_evals: 10_000, ..Default::default() });
        assert!(m.value < 1e-10, "{m:?}");
    }

    #[test]
    fn nonsmooth_and_restarts() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + 2.0 * (x[1] + 0.7).abs();
        let m = multistart(&f, &[0.0, 0.0], 4, 1.0, 3, &NelderMeadOptions::default());
        assert!(m.value < 1e-6, "{m:?}");
        let again = multistart(&f, &[0.0, 0.0], 4, 1.0, 3, &NelderMeadOptions::default());
        assert_eq!(m.x, again.x);
    }
}
