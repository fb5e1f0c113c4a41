//! The affine energies `E_{lambda,p}` and `E_1`, the bodies attached to a
//! function, and the identities tying them to centroid bodies.
//!
//! `||x||_{p,lambda,f}^p = int (1-lambda) <x, grad f>_+^p + lambda <x, grad f>_-^p dy`
//! and `E_{lambda,p}(f) = c_{n,p} (int_S ||u||^{-n} du)^{-1/n}`.

mod bv;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{centroid_support, CentroidMethod, ConvexBody, StarBody};
use crate::error::{Error, Result};
use crate::funcspace::GridFunction;
use crate::linalg::{dot, norm};
use crate::normalization::{alpha_np, c_np};
use crate::spherequad::{pairwise_sum, unit_ball_volume, SphereGrid};

pub use bv::{bv_energy, bv_norm, BvContext, BvEnergy, BvIdentities, BvSource, SymmetrizationCheck};

/// Gradients below this norm contribute nothing to the one-sided integrals.
pub const GRAD_FLOOR: f64 = 1e-12;

/// Samples used by the quasi Monte Carlo centroid route in `n >= 3`.
pub const RELATION_QMC_SAMPLES: usize = 200_000;

#[inline]
pub(crate) fn pos_pow(t: f64, p: f64) -> f64 {
    if t > 0.0 {
        t.powf(p)
    } else {
        0.0
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

pub(crate) fn check_grid(n: usize, grid: &SphereGrid) -> Result<()> {
    if grid.dim() != n {
        return Err(Error::Config(format!(
            "sphere grid dimension {} does not match function dimension {n}",
            grid.dim()
        )));
    }
    Ok(())
}

/// Two sides of an identity that should agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn rel_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

/// Largest relative mismatch of `h(K, u)` against its centroid-body form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub max_rel_err: f64,
    /// `(direct, via centroid body)` per tested direction.
    pub samples: Vec<(f64, f64)>,
}

impl RelationCheck {
    fn from_pairs(samples: Vec<(f64, f64)>) -> Self {
        let max_rel_err = samples.iter().map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
        RelationCheck { max_rel_err, samples }
    }
}

/// `energy - bound`, where `bound = (omega_n / V(K))^{1/n} (int h(K, grad f)^p)^{1/p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrucialBound {
    pub energy: f64,
    pub bound: f64,
    pub gap: f64,
}

impl CrucialBound {
    fn new(energy: f64, bound: f64) -> Self {
        CrucialBound { energy, bound, gap: energy - bound }
    }
    pub fn rel_gap(&self) -> f64 {
        self.gap / self.energy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyaSzegoGap {
    pub e_f: f64,
    pub e_fstar: f64,
    pub gap: f64,
    /// Volume of `{grad f* = 0} ∩ {0 < f* < max}`; zero is the rigidity hypothesis.
    pub plateau_measure: f64,
}

impl PolyaSzegoGap {
    pub fn rel_gap(&self) -> f64 {
        self.gap / self.e_fstar
    }
}

/// `B_{lambda,p}(f)` sampled on the grid together with `K_{lambda,p}(f)`.
#[derive(Clone, Debug)]
pub struct EnergyBody {
    pub star: StarBody,
    pub volume: f64,
    pub companion: ConvexBody,
}

/// `|||x|||^p = int_S rho^{n+p} ((1-l) <x,xi>_+^p + l <x,xi>_-^p) dxi` on `grid`.
pub(crate) fn companion_support_pow(rho: &[f64], grid: &SphereGrid, lambda: f64, p: f64, x: &[f64]) -> f64 {
    let n = grid.dim() as f64;
    let terms: Vec<f64> = (0..grid.len())
        .map(|j| {
            let t = dot(x, grid.direction(j));
            let side = (1.0 - lambda) * pos_pow(t, p) + lambda * pos_pow(-t, p);
            grid.weight(j) * rho[j].powf(n + p) * side
        })
        .collect();
    pairwise_sum(&terms)
}

/// Centroid route for `h(Gamma_{lambda,p} B, u)` that shares no code with the
/// companion integral: the exact polygon through the radial samples in the
/// plane, quasi Monte Carlo membership otherwise.
pub(crate) fn independent_centroid(
    star: &StarBody,
    rho: &[f64],
    grid: &Arc<SphereGrid>,
    lambda: f64,
    p: f64,
    dirs: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<f64>> {
    if grid.dim() == 2 {
        let pts: Vec<Vec<f64>> = (0..grid.len())
            .map(|i| grid.direction(i).iter().map(|c| c * rho[i]).collect())
            .collect();
        let poly = ConvexBody::polytope(pts)?.as_star();
        dirs.iter()
            .map(|u| centroid_support(&poly, lambda, p, u, grid, CentroidMethod::Exact))
            .collect()
    } else {
        let method = CentroidMethod::QuasiMonteCarlo { samples: RELATION_QMC_SAMPLES, seed };
        dirs.iter().map(|u| centroid_support(star, lambda, p, u, grid, method)).collect()
    }
}

/// Read-only state for `E_{lambda,p}(f)`: the function, the sphere grid and,
/// per grid direction `u_i`, the one-sided integral `int <u_i, grad f>_+^p`.
/// The `-` side at `u_i` is the `+` side at the antipode, so the table does
/// not depend on `lambda`.
#[derive(Clone, Debug)]
pub struct EnergyContext {
    f: GridFunction,
    lambda: f64,
    p: f64,
    c: f64,
    grid: Arc<SphereGrid>,
    plus: Arc<Vec<f64>>,
    /// Quadrature nodes with `|grad f| >= GRAD_FLOOR`.
    active: Arc<Vec<usize>>,
}

impl EnergyContext {
    pub fn new(f: &GridFunction, lambda: f64, p: f64, grid: Arc<SphereGrid>) -> Result<Self> {
        check_lambda(lambda)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!(
                "p must satisfy p > 1 (use the BV energy for p = 1), got {p}"
            )));
        }
        check_grid(f.dim(), &grid)?;
        f.require_nonzero(p)?;
        let q = f.quadrature();
        let active: Vec<usize> = (0..q.len()).filter(|&i| norm(q.grad(i)) >= GRAD_FLOOR).collect();
        let plus: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let u = grid.direction(i);
                let terms: Vec<f64> =
                    active.iter().map(|&k| q.weights[k] * pos_pow(dot(u, q.grad(k)), p)).collect();
                pairwise_sum(&terms)
            })
            .collect();
        for i in 0..grid.len() {
            let total = plus[i] + plus[grid.antipode(i)];
            if !(total.is_finite() && total > 0.0) {
                return Err(Error::Degenerate(format!(
                    "||u||_{{p,lambda,f}} = 0 at u = {:?}; f is constant along that direction",
                    grid.direction(i)
                )));
            }
        }
        Ok(EnergyContext {
            f: f.clone(),
            lambda,
            p,
            c: c_np(f.dim(), p),
            grid,
            plus: Arc::new(plus),
            active: Arc::new(active),
        })
    }

    /// Same function and grid with another `lambda`; the direction table is shared.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(EnergyContext { lambda, ..self.clone() })
    }

    pub fn function(&self) -> &GridFunction {
        &self.f
    }
    pub fn dim(&self) -> usize {
        self.f.dim()
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn c_np(&self) -> f64 {
        self.c
    }
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// `||u_i||^p` on every grid direction.
    pub fn norm_pow_on_grid(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| (1.0 - self.lambda) * self.plus[i] + self.lambda * self.plus[self.grid.antipode(i)])
            .collect()
    }

    /// `||u_i||_{p,lambda,f}` on every grid direction.
    pub fn norms_on_grid(&self) -> Vec<f64> {
        self.norm_pow_on_grid().iter().map(|v| v.powf(1.0 / self.p)).collect()
    }

    /// `||x||_{p,lambda,f}` for an arbitrary vector.
    pub fn body_norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Config(format!("vector has length {}, expected {}", x.len(), self.dim())));
        }
        let q = self.f.quadrature();
        let (l, p) = (self.lambda, self.p);
        let terms: Vec<f64> = self
            .active
            .iter()
            .map(|&k| {
                let t = dot(x, q.grad(k));
                q.weights[k] * ((1.0 - l) * pos_pow(t, p) + l * pos_pow(-t, p))
            })
            .collect();
        Ok(pairwise_sum(&terms).powf(1.0 / p))
    }

    /// `E_{lambda,p}(f)` from the sphere integral of `||u||^{-n}`.
    pub fn affine_energy(&self) -> Result<f64> {
        let n = self.dim() as f64;
        let vals: Vec<f64> = self.norm_pow_on_grid().iter().map(|v| v.powf(-n / self.p)).collect();
        Ok(self.c * self.grid.integrate_values(&vals)?.powf(-1.0 / n))
    }

    /// `(direct, c_{n,p} (n V(B))^{-1/n})`, the second through the star body volume.
    pub fn energy_forms(&self) -> Result<(f64, f64)> {
        let direct = self.affine_energy()?;
        let star = self.star_body()?;
        let n = self.dim() as f64;
        let via_volume = self.c * (n * star.volume_on(&self.grid)?).powf(-1.0 / n);
        Ok((direct, via_volume))
    }

    /// `B_{lambda,p}(f)` with radial values `1/||u||`.
    pub fn star_body(&self) -> Result<StarBody> {
        StarBody::sampled(self.grid.clone(), self.norms_on_grid().iter().map(|v| 1.0 / v).collect())
    }

    pub fn energy_body(&self) -> Result<EnergyBody> {
        let star = self.star_body()?;
        let volume = star.volume_on(&self.grid)?;
        let rho = star.radial_on(&self.grid);
        let grid = &self.grid;
        let (l, p) = (self.lambda, self.p);
        let h: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| companion_support_pow(&rho, grid, l, p, grid.direction(i)).powf(1.0 / p))
            .collect();
        let companion = ConvexBody::sampled(grid.clone(), h)?;
        Ok(EnergyBody { star, volume, companion })
    }

    /// `h(K, u)` against `((n+p) alpha_{n,p} V(B))^{1/p} h(Gamma_{lambda,p} B, u)`
    /// at the given directions; the centroid side is evaluated independently.
    pub fn centroid_relation(&self, dirs: &[Vec<f64>], seed: u64) -> Result<RelationCheck> {
        let body = self.energy_body()?;
        let rho = body.star.radial_on(&self.grid);
        let (n, p) = (self.dim(), self.p);
        let factor = ((n as f64 + p) * alpha_np(n, p) * body.volume).powf(1.0 / p);
        let gamma = independent_centroid(&body.star, &rho, &self.grid, self.lambda, p, dirs, seed)?;
        let pairs = dirs
            .iter()
            .zip(gamma)
            .map(|(u, g)| {
                let direct = companion_support_pow(&rho, &self.grid, self.lambda, p, u).powf(1.0 / p);
                (direct, factor * g)
            })
            .collect();
        Ok(RelationCheck::from_pairs(pairs))
    }

    /// `int h(K_{lambda,p}(f), grad f)^p dy` against `(E / c_{n,p})^{-n}`.
    pub fn energy_identity_check(&self) -> Result<IdentityCheck> {
        let body = self.energy_body()?;
        let lhs = self.integrate_support_pow(&body.companion, 1.0);
        let n = self.dim() as f64;
        let rhs = (self.affine_energy()? / self.c).powf(-n);
        Ok(IdentityCheck { lhs, rhs })
    }

    fn integrate_support_pow(&self, k: &ConvexBody, sign: f64) -> f64 {
        let q = self.f.quadrature();
        let p = self.p;
        let terms: Vec<f64> = self
            .active
            .par_iter()
            .map(|&i| {
                let g: Vec<f64> = q.grad(i).iter().map(|v| sign * v).collect();
                q.weights[i] * k.support(&g).powf(p)
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `E - (omega_n / V(K))^{1/n} (int h(K, grad f)^p)^{1/p}`, non-negative
    /// with equality when `B_{lambda,p}(f)` is an ellipsoid.
    pub fn crucial_bound_gap(&self) -> Result<CrucialBound> {
        let body = self.energy_body()?;
        let n = self.dim() as f64;
        let integral = self.integrate_support_pow(&body.companion, 1.0);
        let bound = (unit_ball_volume(n) / body.companion.volume()).powf(1.0 / n) * integral.powf(1.0 / self.p);
        Ok(CrucialBound::new(self.affine_energy()?, bound))
    }

    /// `E(f) - E(f*)` with `f*` the symmetric decreasing rearrangement on the same grid.
    pub fn polya_szego_gap(&self) -> Result<PolyaSzegoGap> {
        let fstar = self.f.symmetric_rearrangement()?;
        let star_ctx = EnergyContext::new(&fstar, self.lambda, self.p, self.grid.clone())?;
        let e_f = self.affine_energy()?;
        let e_fstar = star_ctx.affine_energy()?;
        let w = fstar.spec().width();
        let plateau_measure = fstar.critical_plateau_measure(1e-6 * fstar.max_abs() / w);
        Ok(PolyaSzegoGap { e_f, e_fstar, gap: e_f - e_fstar, plateau_measure })
    }

    /// `int h(K~, -grad f^K)^p` against `E(f*)^p`, where `K~` is the dilate of
    /// `K` with volume `omega_n` and `f^K` the convex symmetrization.
    pub fn symmetrization_identity(&self, k: &ConvexBody) -> Result<IdentityCheck> {
        let n = self.dim();
        let kt = k.with_volume(unit_ball_volume(n as f64))?;
        kt.validate_on(&self.grid)?;
        let fk = self.f.convex_symmetrization(&kt)?;
        let fk_ctx = EnergyContext::new(&fk, self.lambda, self.p, self.grid.clone())?;
        let lhs = fk_ctx.integrate_support_pow(&kt, -1.0);
        let fstar = self.f.symmetric_rearrangement()?;
        let rhs = EnergyContext::new(&fstar, self.lambda, self.p, self.grid.clone())?
            .affine_energy()?
            .powf(self.p);
        Ok(IdentityCheck { lhs, rhs })
    }
}

/// `E_{lambda,p}(f)` in one call.
pub fn affine_energy(f: &GridFunction, lambda: f64, p: f64, grid: Arc<SphereGrid>) -> Result<f64> {
    EnergyContext::new(f, lambda, p, grid)?.affine_energy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::GridSpec;
    use crate::linalg::{mat_vec, matrix_from_rows};
    use crate::spherequad::{Scheme, SphereSpec};
    use std::f64::consts::PI;

    fn circle(m: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(2, m, Scheme::UniformAngle, 0).unwrap())
    }

    fn gaussian(spec: GridSpec, a: &[f64]) -> GridFunction {
        let m = matrix_from_rows(2, a).unwrap();
        GridFunction::from_fn_with_gradient(spec, |x| {
            let y = mat_vec(&m, x);
            let v = (-0.5 * dot(&y, &y)).exp();
            let g = m.transpose() * nalgebra::DVector::from_vec(y.clone());
            (v, g.iter().map(|c| -v * c).collect())
        })
        .unwrap()
    }

    fn skewed(spec: GridSpec) -> GridFunction {
        GridFunction::from_fn_with_gradient(spec, |x| {
            let a = (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
            let (dx, dy) = (x[0] - 1.5, x[1] - 0.3);
            let b = 0.6 * (-2.0 * (dx * dx + dy * dy)).exp();
            (a + b, vec![-x[0] * a - 4.0 * dx * b, -x[1] * a - 4.0 * dy * b])
        })
        .unwrap()
    }

    fn spec() -> GridSpec {
        GridSpec::new(2, 7.0, 1.0 / 16.0)
    }

    #[test]
    fn radial_energy_matches_gradient_norm() {
        let f = gaussian(spec(), &[1.0, 0.0, 0.0, 1.0]);
        for p in [1.5, 2.0, 3.0] {
            let ctx = EnergyContext::new(&f, 0.3, p, circle(512)).unwrap();
            let e = ctx.affine_energy().unwrap();
            let g = f.sobolev_grad_norm(p).unwrap();
            assert!((e / g - 1.0).abs() < 5e-3, "p={p}: {e} vs {g}");
            let norms = ctx.norms_on_grid();
            let (lo, hi) = norms.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            assert!(hi / lo - 1.0 < 1e-2);
        }
        let ctx = EnergyContext::new(&f, 0.5, 2.0, circle(512)).unwrap();
        assert!((ctx.affine_energy().unwrap().powi(2) - PI).abs() < 2e-2);
    }

    #[test]
    fn energy_forms_agree_and_lambda_symmetry() {
        let f = skewed(spec());
        let ctx = EnergyContext::new(&f, 0.2, 1.7, circle(256)).unwrap();
        let (a, b) = ctx.energy_forms().unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
        let e = ctx.affine_energy().unwrap();
        let e_mirror = ctx.with_lambda(0.8).unwrap().affine_energy().unwrap();
        assert!((e / e_mirror - 1.0).abs() < 1e-10);
        let x = [0.3, -1.1];
        let lhs = ctx.body_norm(&x).unwrap();
        let rhs = ctx.with_lambda(0.8).unwrap().body_norm(&[-0.3, 1.1]).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_ordering_and_concavity() {
        let f = skewed(spec());
        let ctx = EnergyContext::new(&f, 0.0, 2.0, circle(256)).unwrap();
        let e: Vec<f64> = [0.0, 0.25, 0.5]
            .iter()
            .map(|l| ctx.with_lambda(*l).unwrap().affine_energy().unwrap())
            .collect();
        assert!(e[0] <= e[1] + 1e-9 && e[1] <= e[2] + 1e-9);
        assert!(e[1] >= 0.5 * (e[0] + e[2]) - 1e-9);
    }

    #[test]
    fn body_norm_bounds_and_homogeneity() {
        let f = skewed(spec());
        let ctx = EnergyContext::new(&f, 0.4, 2.5, circle(128)).unwrap();
        let g = f.sobolev_grad_norm(2.5).unwrap();
        let x = [0.6, 0.8];
        let v = ctx.body_norm(&x).unwrap();
        assert!(v <= g * 1.0 + 1e-12);
        let v3 = ctx.body_norm(&[1.8, 2.4]).unwrap();
        assert!((v3 / v - 3.0).abs() < 1e-12);
        let i = 17;
        let u = ctx.grid().direction(i).to_vec();
        assert!((ctx.body_norm(&u).unwrap() / ctx.norms_on_grid()[i] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_domain_errors() {
        let zero = GridFunction::from_values(spec(), vec![0.0; spec().len()]).unwrap();
        assert!(matches!(EnergyContext::new(&zero, 0.5, 2.0, circle(64)), Err(Error::Degenerate(_))));
        let f = skewed(spec());
        assert!(matches!(EnergyContext::new(&f, 1.5, 2.0, circle(64)), Err(Error::Domain(_))));
        assert!(matches!(EnergyContext::new(&f, 0.5, 1.0, circle(64)), Err(Error::Domain(_))));
        let s2 = Arc::new(SphereSpec::default_for(3).build().unwrap());
        assert!(matches!(EnergyContext::new(&f, 0.5, 2.0, s2), Err(Error::Config(_))));
    }

    #[test]
    fn centroid_relation_and_identity() {
        let f = skewed(spec());
        let ctx = EnergyContext::new(&f, 0.3, 1.5, circle(512)).unwrap();
        let dirs: Vec<Vec<f64>> =
            (0..7).map(|k| { let t = 0.37 + k as f64; vec![t.cos(), t.sin()] }).collect();
        let rel = ctx.centroid_relation(&dirs, 1).unwrap();
        assert!(rel.max_rel_err < 1e-3, "{rel:?}");
        let id = ctx.energy_identity_check().unwrap();
        assert!(id.rel_diff() < 1e-3, "{id:?}");
    }

    #[test]
    fn crucial_bound_zero_for_ellipsoidal_b() {
        let f = gaussian(spec(), &[1.3, 0.4, 0.0, 1.0 / 1.3]);
        let ctx = EnergyContext::new(&f, 0.5, 2.0, circle(512)).unwrap();
        let cb = ctx.crucial_bound_gap().unwrap();
        assert!(cb.rel_gap().abs() < 5e-3, "{cb:?}");
        let s = EnergyContext::new(&skewed(spec()), 0.5, 2.0, circle(512)).unwrap();
        let cb = s.crucial_bound_gap().unwrap();
        assert!(cb.gap > 0.0, "{cb:?}");
    }

    #[test]
    fn sl_covariance_of_star_body() {
        let a = [1.2, 0.5, 0.1, 1.0 / 1.2 + 0.5 * 0.1 / 1.2];
        let m = matrix_from_rows(2, &a).unwrap();
        let f = skewed(spec());
        let fa = GridFunction::from_fn_with_gradient(spec(), |x| {
            let y = mat_vec(&m, x);
            let a = (-0.5 * dot(&y, &y)).exp();
            let (dx, dy) = (y[0] - 1.5, y[1] - 0.3);
            let b = 0.6 * (-2.0 * (dx * dx + dy * dy)).exp();
            let g = [-y[0] * a - 4.0 * dx * b, -y[1] * a - 4.0 * dy * b];
            (a + b, crate::linalg::mat_t_vec(&m, &g))
        })
        .unwrap();
        let c = EnergyContext::new(&f, 0.3, 2.0, circle(256)).unwrap();
        let ca = EnergyContext::new(&fa, 0.3, 2.0, circle(256)).unwrap();
        for u in [[1.0, 0.0], [0.6, -0.8], [-0.2, 0.9]] {
            let lhs = ca.body_norm(&u).unwrap();
            let rhs = c.body_norm(&mat_vec(&m, &u)).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-2, "{lhs} vs {rhs}");
        }
        let (e, ea) = (c.affine_energy().unwrap(), ca.affine_energy().unwrap());
        assert!((e / ea - 1.0).abs() < 1e-2);
    }

    #[test]
    fn polya_szego_and_symmetrization() {
        let f = skewed(GridSpec::new(2, 7.0, 1.0 / 16.0));
        let ctx = EnergyContext::new(&f, 0.5, 2.0, circle(256)).unwrap();
        let ps = ctx.polya_szego_gap().unwrap();
        assert!(ps.gap > 0.0, "{ps:?}");
        let sq = ConvexBody::polytope(vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]])
            .unwrap();
        let id = ctx.symmetrization_identity(&sq).unwrap();
        assert!(id.rel_diff() < 2e-2, "{id:?}");
    }
}
