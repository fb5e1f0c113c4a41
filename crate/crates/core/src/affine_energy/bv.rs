//! The `L_1` affine energy of BV functions.
//!
//! `||x||_{1,f} = int |<x, sigma_f>| d|Df|`, `E_1(f) = (c_{n,1}/2) (int_S ||u||_{1,f}^{-n})^{-1/n}`.
//! `K_1(f)` has support `int_S ||xi||^{-n-1} |<x, xi>| dxi`, which equals
//! `2 (n+1) alpha_{n,1} V(B_1) h(Gamma_1 B_1, x)` with `Gamma_1 = Gamma_{1/2,1}`,
//! and `int h(K_1, sigma_f) d|Df| = n V(B_1) = (2 E_1 / c_{n,1})^{-n}`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_grid, companion_support_pow, independent_centroid, CrucialBound, IdentityCheck, RelationCheck,
    GRAD_FLOOR,
};
use crate::bodies::{ConvexBody, StarBody, SurfaceMeasure};
use crate::error::{Error, Result};
use crate::funcspace::{BvCharacteristic, BvFunction, GridFunction};
use crate::linalg::{dot, norm};
use crate::normalization::{alpha_np, c_np};
use crate::spherequad::{pairwise_sum, unit_ball_volume, SphereGrid};

/// A BV function given exactly (piecewise constant on convex carriers) or as
/// a smooth grid proxy with `d|Df| = |grad f| dy`.
#[derive(Clone, Debug)]
pub enum BvSource {
    Exact(BvFunction),
    Grid(GridFunction),
}

impl BvSource {
    pub fn dim(&self) -> usize {
        match self {
            BvSource::Exact(f) => f.dim(),
            BvSource::Grid(f) => f.dim(),
        }
    }

    fn check_nonzero(&self) -> Result<()> {
        match self {
            BvSource::Exact(f) => {
                if f.lq_norm(1.0)? <= 1e-12 {
                    return Err(Error::Degenerate("function is zero almost everywhere".into()));
                }
                Ok(())
            }
            BvSource::Grid(f) => f.require_nonzero(1.0),
        }
    }

    /// `int g(sigma) d|Df|` for a positively 1-homogeneous `g`, with `sigma`
    /// the inner normal (the direction of `grad f`).
    fn integrate_normal<G>(&self, g: G, grid: &SphereGrid) -> Result<f64>
    where
        G: Fn(&[f64]) -> f64 + Sync,
    {
        match self {
            BvSource::Exact(f) => {
                let mut total = 0.0;
                for piece in f.pieces() {
                    let s = piece.amplitude().signum();
                    let m = SurfaceMeasure::of(piece.carrier())?;
                    // outer normal nu: sigma = -sign(a) nu
                    total += piece.amplitude().abs()
                        * m.integrate(|nu| g(&nu.iter().map(|c| -s * c).collect::<Vec<_>>()), grid)?;
                }
                Ok(total)
            }
            BvSource::Grid(f) => {
                let q = f.quadrature();
                let terms: Vec<f64> = (0..q.len())
                    .into_par_iter()
                    .map(|i| {
                        let v = q.grad(i);
                        if norm(v) < GRAD_FLOOR {
                            0.0
                        } else {
                            q.weights[i] * g(v)
                        }
                    })
                    .collect();
                Ok(pairwise_sum(&terms))
            }
        }
    }

    /// `f*` as a source of the same kind.
    fn symmetric_rearrangement(&self) -> Result<BvSource> {
        match self {
            BvSource::Exact(f) => Ok(BvSource::Exact(level_dilates(f, &ConvexBody::ball(f.dim(), 1.0)?)?)),
            BvSource::Grid(f) => Ok(BvSource::Grid(f.symmetric_rearrangement()?)),
        }
    }

    /// `f^K` for a body `K` of volume `omega_n`.
    fn convex_symmetrization(&self, k: &ConvexBody) -> Result<BvSource> {
        match self {
            BvSource::Exact(f) => Ok(BvSource::Exact(level_dilates(f, k)?)),
            BvSource::Grid(f) => Ok(BvSource::Grid(f.convex_symmetrization(k)?)),
        }
    }
}

/// `sum_j (v_j - v_{j+1}) chi_{t_j K}` where `v_1 > v_2 > ...` are the values
/// of `|f|` and `t_j K` has the volume of `{|f| >= v_j}`; `V(K) = omega_n`.
fn level_dilates(f: &BvFunction, k: &ConvexBody) -> Result<BvFunction> {
    let n = f.dim();
    let wn = unit_ball_volume(n as f64);
    let mut levels: Vec<f64> = f.regions().iter().map(|(v, _)| v.abs()).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut pieces = Vec::with_capacity(levels.len());
    for (j, v) in levels.iter().enumerate() {
        let next = levels.get(j + 1).copied().unwrap_or(0.0);
        let mu: f64 = f.regions().iter().filter(|(w, _)| w.abs() >= *v).map(|(_, m)| m).sum();
        let t = (mu / wn).powf(1.0 / n as f64);
        pieces.push(BvCharacteristic::new(v - next, k.scaled(t)?, vec![0.0; n])?);
    }
    BvFunction::new(pieces)
}

/// `||x||_{1,f}`: exact for characteristic pieces, `int |<x, grad f>|` for grid proxies.
pub fn bv_norm(f: &BvSource, x: &[f64]) -> f64 {
    match f {
        BvSource::Exact(f) => f.bv_norm(x),
        BvSource::Grid(f) => f.quadrature().integrate(|g| dot(x, g).abs()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvEnergy {
    pub b1_volume: f64,
    pub e1: f64,
}

/// `int h(K, nu) d|Df^K|` with the outer normal `nu`, and with the inner
/// normal `sigma` as written for origin-symmetric `K`, against `E_1(f*)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationCheck {
    pub outer: f64,
    pub inner: f64,
    pub rhs: f64,
    pub symmetric_k: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvIdentities {
    /// `h(K_1, u)` against `2 (n+1) alpha_{n,1} V(B_1) h(Gamma_1 B_1, u)`.
    pub k1_relation: RelationCheck,
    /// `int h(K_1, sigma) d|Df|` against `(2 E_1 / c_{n,1})^{-n}`.
    pub energy_identity: IdentityCheck,
    /// `E_1` against `(omega_n / V(K_1))^{1/n} int h(K_1, sigma) d|Df|`.
    pub crucial: CrucialBound,
    pub symmetrization: SymmetrizationCheck,
}

/// Read-only state for `E_1(f)`: the source and `||u_i||_{1,f}` on the grid.
#[derive(Clone, Debug)]
pub struct BvContext {
    source: BvSource,
    grid: Arc<SphereGrid>,
    c: f64,
    norms: Arc<Vec<f64>>,
}

impl BvContext {
    pub fn new(source: BvSource, grid: Arc<SphereGrid>) -> Result<Self> {
        check_grid(source.dim(), &grid)?;
        source.check_nonzero()?;
        let norms = match &source {
            BvSource::Exact(f) => grid.sample(|u| f.bv_norm(u)),
            BvSource::Grid(f) => {
                let q = f.quadrature();
                (0..grid.len())
                    .into_par_iter()
                    .map(|i| {
                        let u = grid.direction(i);
                        let terms: Vec<f64> =
                            (0..q.len()).map(|k| q.weights[k] * dot(u, q.grad(k)).abs()).collect();
                        pairwise_sum(&terms)
                    })
                    .collect()
            }
        };
        if let Some(i) = norms.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Degenerate(format!(
                "||u||_{{1,f}} = {} at u = {:?}",
                norms[i],
                grid.direction(i)
            )));
        }
        Ok(BvContext { c: c_np(source.dim(), 1.0), source, grid, norms: Arc::new(norms) })
    }

    pub fn source(&self) -> &BvSource {
        &self.source
    }
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.source.dim()
    }
    pub fn norms_on_grid(&self) -> &[f64] {
        &self.norms
    }

    pub fn bv_norm(&self, x: &[f64]) -> f64 {
        bv_norm(&self.source, x)
    }

    /// `B_1(f)` with radial values `1/||u||_{1,f}`.
    pub fn b1(&self) -> Result<StarBody> {
        StarBody::sampled(self.grid.clone(), self.norms.iter().map(|v| 1.0 / v).collect())
    }

    pub fn energy(&self) -> Result<BvEnergy> {
        let n = self.dim() as f64;
        let vals: Vec<f64> = self.norms.iter().map(|v| v.powf(-n)).collect();
        let s = self.grid.integrate_values(&vals)?;
        Ok(BvEnergy { b1_volume: s / n, e1: 0.5 * self.c * s.powf(-1.0 / n) })
    }

    /// `K_1(f)` sampled on the grid.
    pub fn k1(&self) -> Result<ConvexBody> {
        let rho: Vec<f64> = self.norms.iter().map(|v| 1.0 / v).collect();
        let grid = &self.grid;
        let h: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| companion_support_pow(&rho, grid, 0.5, 1.0, grid.direction(i)) * 2.0)
            .collect();
        ConvexBody::sampled(grid.clone(), h)
    }

    /// All four relations between `E_1`, `B_1`, `K_1` and the convex symmetral
    /// `f^K` (the body `K` is rescaled to volume `omega_n`).
    pub fn identities(&self, dirs: &[Vec<f64>], k: &ConvexBody, seed: u64) -> Result<BvIdentities> {
        let n = self.dim();
        let nf = n as f64;
        let energy = self.energy()?;
        let b1 = self.b1()?;
        let rho = b1.radial_on(&self.grid);
        let k1 = self.k1()?;

        let factor = 2.0 * (nf + 1.0) * alpha_np(n, 1.0) * energy.b1_volume;
        let gamma = independent_centroid(&b1, &rho, &self.grid, 0.5, 1.0, dirs, seed)?;
        let pairs = dirs
            .iter()
            .zip(gamma)
            .map(|(u, g)| (2.0 * companion_support_pow(&rho, &self.grid, 0.5, 1.0, u), factor * g))
            .collect();
        let k1_relation = RelationCheck::from_pairs(pairs);

        let integral = self.source.integrate_normal(|s| k1.support(s), &self.grid)?;
        let energy_identity =
            IdentityCheck { lhs: integral, rhs: (2.0 * energy.e1 / self.c).powf(-nf) };
        let bound = (unit_ball_volume(nf) / k1.volume()).powf(1.0 / nf) * integral;
        let crucial = CrucialBound::new(energy.e1, bound);

        let kt = k.with_volume(unit_ball_volume(nf))?;
        kt.validate_on(&self.grid)?;
        let fk = self.source.convex_symmetrization(&kt)?;
        let outer = fk.integrate_normal(|s| kt.support(&s.iter().map(|c| -c).collect::<Vec<_>>()), &self.grid)?;
        let inner = fk.integrate_normal(|s| kt.support(s), &self.grid)?;
        let fstar = self.source.symmetric_rearrangement()?;
        let rhs = BvContext::new(fstar, self.grid.clone())?.energy()?.e1;
        let symmetrization =
            SymmetrizationCheck { outer, inner, rhs, symmetric_k: kt.asymmetry(&self.grid) < 1e-9 };

        Ok(BvIdentities { k1_relation, energy_identity, crucial, symmetrization })
    }
}

/// `E_1(f)` and `V(B_1(f))` in one call.
pub fn bv_energy(f: BvSource, grid: Arc<SphereGrid>) -> Result<BvEnergy> {
    BvContext::new(f, grid)?.energy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Polytope;
    use crate::funcspace::GridSpec;
    use crate::spherequad::Scheme;
    use std::f64::consts::PI;

    fn circle(m: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(2, m, Scheme::UniformAngle, 0).unwrap())
    }

    fn dirs() -> Vec<Vec<f64>> {
        (0..6).map(|k| { let t = 0.21 + 1.1 * k as f64; vec![t.cos(), t.sin()] }).collect()
    }

    fn exact(k: ConvexBody) -> BvSource {
        BvSource::Exact(BvFunction::single(BvCharacteristic::of(k).unwrap()))
    }

    #[test]
    fn disk_energy_is_perimeter() {
        let e = bv_energy(exact(ConvexBody::ball(2, 1.0).unwrap()), circle(512)).unwrap();
        assert!((e.e1 / (2.0 * PI) - 1.0).abs() < 1e-6, "{e:?}");
        let e = bv_energy(exact(ConvexBody::ball(2, 2.0).unwrap()), circle(512)).unwrap();
        assert!((e.e1 / (4.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ellipse_attains_affine_sobolev() {
        let k = ConvexBody::ellipsoid(nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.0, 0.7])).unwrap();
        let v = k.volume();
        let e = bv_energy(exact(k), circle(512)).unwrap().e1;
        // ||chi_E||_2 = sqrt(V), sharp constant n omega_n^{1/n}
        let rhs = 2.0 * PI.sqrt() * v.sqrt();
        assert!((e / rhs - 1.0).abs() < 1e-4, "{e} vs {rhs}");
    }

    #[test]
    fn norm_is_even_and_matches_grid_proxy() {
        let sq = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap());
        let f = exact(sq.clone());
        for x in [[0.3, 0.9], [1.0, -0.2]] {
            let a = bv_norm(&f, &x);
            assert!((a - bv_norm(&f, &[-x[0], -x[1]])).abs() < 1e-12);
            assert!((a - 4.0 * (x[0].abs() + x[1].abs())).abs() < 1e-12);
        }
        let g = GridFunction::from_fn_with_gradient(GridSpec::new(2, 6.0, 1.0 / 32.0), |x| {
            let v = (-(x[0] * x[0] + x[1] * x[1])).exp();
            (v, vec![-2.0 * x[0] * v, -2.0 * x[1] * v])
        })
        .unwrap();
        let gs = BvSource::Grid(g);
        let e = bv_energy(gs, circle(256)).unwrap();
        // radial: E_1 = ||grad f||_1 = pi^{3/2}
        assert!((e.e1 / PI.powf(1.5) - 1.0).abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn identities_for_square_characteristic() {
        let sq = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap());
        let ctx = BvContext::new(exact(sq), circle(1024)).unwrap();
        let tri = ConvexBody::polytope(vec![vec![1.0, -0.4], vec![-0.6, 0.9], vec![-0.5, -0.7]]).unwrap();
        let id = ctx.identities(&dirs(), &tri, 3).unwrap();
        assert!(id.k1_relation.max_rel_err < 1e-3, "{:?}", id.k1_relation);
        assert!(id.energy_identity.rel_diff() < 1e-3, "{:?}", id.energy_identity);
        assert!(id.crucial.gap > 0.0);
        let s = id.symmetrization;
        assert!(!s.symmetric_k);
        assert!((s.outer / s.rhs - 1.0).abs() < 1e-3, "{s:?}");
        assert!(s.inner > s.outer * 1.01, "{s:?}");
        let d = ConvexBody::ball(2, 1.0).unwrap();
        let id = BvContext::new(exact(d.clone()), circle(512)).unwrap().identities(&dirs(), &d, 3).unwrap();
        assert!(id.crucial.rel_gap().abs() < 1e-3, "{:?}", id.crucial);
        assert!((id.symmetrization.inner / id.symmetrization.rhs - 1.0).abs() < 1e-4);
    }

    #[test]
    fn degenerate_is_rejected() {
        let zero = GridFunction::from_values(GridSpec::new(2, 2.0, 0.25), vec![0.0; 256]).unwrap();
        assert!(matches!(BvContext::new(BvSource::Grid(zero), circle(64)), Err(Error::Degenerate(_))));
    }
}
