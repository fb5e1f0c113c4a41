//! Quadrature on the unit sphere S^{n-1}.
//!
//! Three schemes are provided:
//!
//! * `UniformAngle` (n = 2): equally spaced angles, the periodic trapezoid rule.
//! * `ProductGauss` (n = 3): Gauss-Legendre nodes in `t = cos(theta)` times
//!   uniformly spaced azimuths.
//! * `MonteCarlo` (any n >= 2): seeded Gaussian directions, symmetrized by
//!   adding every antipode.
//!
//! Every grid is antipodally symmetric with equal weights on `u` and `-u`,
//! and the antipode of each direction is stored explicitly. Weights are in
//! units of spherical Lebesgue measure, so they sum to `n * omega_n`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Volume of the unit ball in real dimension `s`: `pi^{s/2} / Gamma(1 + s/2)`.
///
/// Non-integer indices appear in the normalizing constants of the energy.
pub fn unit_ball_volume(s: f64) -> f64 {
    assert!(s >= 0.0, "unit_ball_volume: negative index {s}");
    (0.5 * s * PI.ln() - statrs::function::gamma::ln_gamma(1.0 + 0.5 * s)).exp()
}

/// Surface measure of S^{n-1}, i.e. `n * omega_n`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n as f64)
}

/// Pairwise (tree) summation. The result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[serde(alias = "uniform_angle")]
    UniformAngle,
    #[serde(alias = "product_gauss")]
    ProductGauss,
    #[serde(alias = "monte_carlo")]
    MonteCarlo,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::UniformAngle => "uniform-angle",
            Scheme::ProductGauss => "product-gauss",
            Scheme::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-angle" | "uniform_angle" => Ok(Scheme::UniformAngle),
            "product-gauss" | "product_gauss" => Ok(Scheme::ProductGauss),
            "monte-carlo" | "monte_carlo" => Ok(Scheme::MonteCarlo),
            other => Err(Error::Config(format!("unknown sphere scheme '{other}'"))),
        }
    }
}

/// Grid parameters as they appear in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub n: usize,
    pub resolution: usize,
    pub scheme: Scheme,
    #[serde(default)]
    pub seed: u64,
}

impl SphereSpec {
    pub fn build(&self) -> Result<SphereGrid> {
        SphereGrid::new(self.n, self.resolution, self.scheme, self.seed)
    }

    /// Default grid for dimension `n`: 512 angles on the circle, a 64x64
    /// product grid on S^2, 4096 Monte Carlo directions otherwise.
    pub fn default_for(n: usize) -> Self {
        match n {
            2 => SphereSpec { n, resolution: 512, scheme: Scheme::UniformAngle, seed: 0 },
            3 => SphereSpec { n, resolution: 64, scheme: Scheme::ProductGauss, seed: 0 },
            _ => SphereSpec { n, resolution: 4096, scheme: Scheme::MonteCarlo, seed: 0 },
        }
    }
}

/// Antipodally symmetric direction/weight set on S^{n-1}.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    spec: SphereSpec,
    dirs: Vec<f64>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    /// Gauss-Legendre nodes (ascending) for the product scheme.
    t_nodes: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n: usize, resolution: usize, scheme: Scheme, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("sphere dimension n={n} must be >= 2")));
        }
        if resolution < 8 || resolution % 2 != 0 {
            return Err(Error::Config(format!(
                "resolution {resolution} must be even and >= 8"
            )));
        }
        let spec = SphereSpec { n, resolution, scheme, seed };
        match (scheme, n) {
            (Scheme::UniformAngle, 2) => Ok(Self::uniform_angle(spec)),
            (Scheme::ProductGauss, 3) => Ok(Self::product_gauss(spec)),
            (Scheme::MonteCarlo, _) => Ok(Self::monte_carlo(spec)),
            (s, n) => Err(Error::Config(format!(
                "scheme {} is not available in dimension {n}",
                s.name()
            ))),
        }
    }

    fn uniform_angle(spec: SphereSpec) -> Self {
        let m = spec.resolution;
        let half = m / 2;
        let mut dirs = vec![0.0; 2 * m];
        for k in 0..half {
            let th = 2.0 * PI * k as f64 / m as f64;
            dirs[2 * k] = th.cos();
            dirs[2 * k + 1] = th.sin();
            dirs[2 * (k + half)] = -dirs[2 * k];
            dirs[2 * (k + half) + 1] = -dirs[2 * k + 1];
        }
        let weights = vec![2.0 * PI / m as f64; m];
        let antipode = (0..m).map(|k| (k + half) % m).collect();
        SphereGrid { spec, dirs, weights, antipode, t_nodes: Vec::new() }
    }

    fn product_gauss(spec: SphereSpec) -> Self {
        let r = spec.resolution;
        let (t, w) = gauss_legendre(r);
        let half = r / 2;
        let mut dirs = vec![0.0; 3 * r * r];
        let mut weights = vec![0.0; r * r];
        let mut antipode = vec![0; r * r];
        let dphi = 2.0 * PI / r as f64;
        let (mut cphi, mut sphi) = (vec![0.0; r], vec![0.0; r]);
        for j in 0..half {
            let phi = dphi * j as f64;
            cphi[j] = phi.cos();
            sphi[j] = phi.sin();
            cphi[j + half] = -cphi[j];
            sphi[j + half] = -sphi[j];
        }
        for i in 0..r {
            let s = (1.0 - t[i] * t[i]).max(0.0).sqrt();
            for j in 0..r {
                let idx = i * r + j;
                dirs[3 * idx] = s * cphi[j];
                dirs[3 * idx + 1] = s * sphi[j];
                dirs[3 * idx + 2] = t[i];
                weights[idx] = w[i] * dphi;
                antipode[idx] = (r - 1 - i) * r + (j + half) % r;
            }
        }
        SphereGrid { spec, dirs, weights, antipode, t_nodes: t }
    }

    fn monte_carlo(spec: SphereSpec) -> Self {
        let n = spec.n;
        let m = spec.resolution;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut dirs = vec![0.0; n * m];
        for k in 0..m / 2 {
            let v: Vec<f64> = loop {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let len = norm(&v);
                if len > 1e-8 {
                    break v.iter().map(|x| x / len).collect();
                }
            };
            for d in 0..n {
                dirs[n * 2 * k + d] = v[d];
                dirs[n * (2 * k + 1) + d] = -v[d];
            }
        }
        let weights = vec![sphere_area(n) / m as f64; m];
        let antipode = (0..m).map(|k| k ^ 1).collect();
        SphereGrid { spec, dirs, weights, antipode, t_nodes: Vec::new() }
    }

    pub fn spec(&self) -> SphereSpec {
        self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.n
    }
    pub fn scheme(&self) -> Scheme {
        self.spec.scheme
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn direction(&self, i: usize) -> &[f64] {
        let n = self.spec.n;
        &self.dirs[n * i..n * (i + 1)]
    }
    pub fn directions(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.dirs.chunks_exact(self.spec.n)
    }
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Index of `-u_i`.
    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }

    /// Two grids are interchangeable when they were built from the same spec.
    pub fn same_as(&self, other: &SphereGrid) -> bool {
        self.spec == other.spec
    }

    /// `sum_i w_i F(u_i)` with a deterministic reduction order.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let vals: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.direction(i)))
            .collect();
        self.integrate_values(&vals)
    }

    /// Quadrature of values already sampled at the grid directions.
    pub fn integrate_values(&self, vals: &[f64]) -> Result<f64> {
        assert_eq!(vals.len(), self.len(), "value count does not match grid");
        let mut terms = Vec::with_capacity(vals.len());
        for (i, (&v, &w)) in vals.iter().zip(&self.weights).enumerate() {
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "integrand is {v} at direction {:?}",
                    self.direction(i)
                )));
            }
            terms.push(w * v);
        }
        Ok(pairwise_sum(&terms))
    }

    /// Evaluate `f` at every direction, in parallel, preserving grid order.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| f(self.direction(i)))
            .collect()
    }

    /// Interpolate grid-sampled `values` at an arbitrary nonzero direction `u`.
    pub fn interpolate(&self, values: &[f64], u: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let len = norm(u);
        match self.spec.scheme {
            Scheme::UniformAngle => {
                let m = self.len();
                let step = 2.0 * PI / m as f64;
                let mut th = u[1].atan2(u[0]);
                if th < 0.0 {
                    th += 2.0 * PI;
                }
                let x = th / step;
                let k = (x.floor() as usize) % m;
                let frac = x - x.floor();
                values[k] * (1.0 - frac) + values[(k + 1) % m] * frac
            }
            Scheme::ProductGauss => self.interpolate_product(values, u, len),
            Scheme::MonteCarlo => self.interpolate_scattered(values, u, len),
        }
    }

    fn interpolate_product(&self, values: &[f64], u: &[f64], len: f64) -> f64 {
        let r = self.spec.resolution;
        let t = (u[2] / len).clamp(-1.0, 1.0);
        let dphi = 2.0 * PI / r as f64;
        let mut phi = u[1].atan2(u[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let x = phi / dphi;
        let j0 = (x.floor() as usize) % r;
        let j1 = (j0 + 1) % r;
        let fp = x - x.floor();
        let ring = |i: usize| values[i * r + j0] * (1.0 - fp) + values[i * r + j1] * fp;
        let ring_mean = |i: usize| values[i * r..(i + 1) * r].iter().sum::<f64>() / r as f64;
        let nodes = &self.t_nodes;
        if t <= nodes[0] {
            let pole = ring_mean(0);
            let s = (t + 1.0) / (nodes[0] + 1.0);
            return pole * (1.0 - s) + ring(0) * s;
        }
        if t >= nodes[r - 1] {
            let pole = ring_mean(r - 1);
            let s = (1.0 - t) / (1.0 - nodes[r - 1]);
            return pole * (1.0 - s) + ring(r - 1) * s;
        }
        let i = nodes.partition_point(|&v| v <= t) - 1;
        let ft = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
        ring(i) * (1.0 - ft) + ring(i + 1) * ft
    }

    fn interpolate_scattered(&self, values: &[f64], u: &[f64], len: f64) -> f64 {
        let k = 2 * self.spec.n;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, d) in self.directions().enumerate() {
            let gap = 1.0 - dot(d, u) / len;
            if gap < 1e-14 {
                return values[i];
            }
            if best.len() < k || gap < best[best.len() - 1].0 {
                let pos = best.partition_point(|&(g, _)| g < gap);
                best.insert(pos, (gap, i));
                best.truncate(k);
            }
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (gap, i) in best {
            let w = 1.0 / (gap * gap);
            num += w * values[i];
            den += w;
        }
        num / den
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1]; symmetric by construction.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Chebyshev-type initial guess for the i-th largest root.
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[m - 1 - i] = z;
        x[i] = -z;
        w[m - 1 - i] = wi;
        w[i] = wi;
    }
    (x, w)
}
