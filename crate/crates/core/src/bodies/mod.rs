//! Convex and star bodies: support and radial functions, polars, volumes,
//! Firey combinations, mixed volumes, centroid and projection bodies, and
//! distance functionals between bodies.

mod centroid;
mod distance;
mod dual;
mod measure;
mod polytope;
pub mod spec;

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{dot, invert, mat_t_vec, mat_vec, norm};
use crate::spherequad::{unit_ball_volume, SphereGrid, SphereSpec};

pub use centroid::{busemann_petty_deficit, centroid_body, centroid_support, CentroidMethod};
pub use distance::{banach_mazur_estimate, BanachMazurOptions};
pub use dual::{
    dual_mixed_volume, firey_combination, improved_dual_gap, polar_volume,
    symmetric_difference_ratio, DualGap,
};
pub use measure::{lp_mixed_volume, petty_product, projection_body, SurfaceMeasure};
pub use polytope::{Facet, Polytope};
pub use spec::BodySpec;

/// The body `A B_2^n` for an invertible `A`.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    map: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(map: DMatrix<f64>) -> Result<Self> {
        if !map.is_square() || map.nrows() < 2 {
            return Err(Error::InvalidBody("ellipsoid map must be square, n >= 2".into()));
        }
        if map.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBody("ellipsoid map has non-finite entries".into()));
        }
        let inverse = invert(&map)
            .map_err(|_| Error::InvalidBody("ellipsoid map is singular".into()))?;
        Ok(Ellipsoid { map, inverse })
    }

    pub fn diagonal(axes: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(axes)))
    }

    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.nrows()
    }

    /// `A A^T`; the body is `{x : x^T (A A^T)^{-1} x <= 1}`.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.map * self.map.transpose()
    }
}

/// Minkowski sum of centered segments `[-g_i, g_i]`.
#[derive(Clone, Debug)]
pub struct Zonotope {
    n: usize,
    generators: Vec<Vec<f64>>,
    polygon: Option<Polytope>,
    radial_grid: Arc<OnceLock<Arc<SphereGrid>>>,
}

impl Zonotope {
    pub fn new(n: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        if generators.iter().any(|g| g.len() != n) {
            return Err(Error::InvalidBody("zonotope generators have mixed dimensions".into()));
        }
        let generators: Vec<Vec<f64>> =
            generators.into_iter().filter(|g| norm(g) > 0.0).collect();
        let polygon = if n == 2 { Some(zonogon(&generators)?) } else { None };
        let z = Zonotope {
            n,
            generators,
            polygon,
            radial_grid: Arc::new(OnceLock::new()),
        };
        if z.volume() <= 0.0 {
            return Err(Error::InvalidBody("zonotope generators do not span R^n".into()));
        }
        Ok(z)
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.generators.iter().map(|g| dot(u, g).abs()).sum()
    }

    /// `2^n * sum over n-subsets of |det|`.
    pub fn volume(&self) -> f64 {
        if let Some(p) = &self.polygon {
            return p.volume();
        }
        let n = self.n;
        let k = self.generators.len();
        let mut total = 0.0;
        let mut idx: Vec<usize> = (0..n).collect();
        if k < n {
            return 0.0;
        }
        loop {
            let m = DMatrix::from_fn(n, n, |r, c| self.generators[idx[c]][r]);
            total += m.determinant().abs();
            // next combination
            let mut i = n;
            while i > 0 && idx[i - 1] == k - n + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..n {
                idx[j] = idx[j - 1] + 1;
            }
        }
        total * (1u64 << n) as f64
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        match &self.polygon {
            Some(p) => p.gauge(x),
            None => {
                let grid = self.radial_grid.get_or_init(|| {
                    Arc::new(
                        SphereSpec::default_for(self.n)
                            .build()
                            .expect("default sphere grid is valid"),
                    )
                });
                grid.directions()
                    .map(|v| dot(x, v) / self.support(v))
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Polygon of a planar zonotope: edges are `+-2 g_i` sorted by angle.
fn zonogon(generators: &[Vec<f64>]) -> Result<Polytope> {
    let mut gs: Vec<[f64; 2]> = generators
        .iter()
        .map(|g| {
            if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
                [-g[0], -g[1]]
            } else {
                [g[0], g[1]]
            }
        })
        .collect();
    gs.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let mut p = [0.0, 0.0];
    for g in &gs {
        p[0] -= g[0];
        p[1] -= g[1];
    }
    let mut verts = Vec::with_capacity(2 * gs.len());
    for sign in [2.0, -2.0] {
        for g in &gs {
            verts.push(vec![p[0], p[1]]);
            p[0] += sign * g[0];
            p[1] += sign * g[1];
        }
    }
    Polytope::new(verts)
}

/// Support function sampled on a sphere grid.
#[derive(Clone, Debug)]
pub struct SampledSupport {
    grid: Arc<SphereGrid>,
    values: Arc<Vec<f64>>,
    radial: Arc<OnceLock<Vec<f64>>>,
}

impl SampledSupport {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} support values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidBody(format!(
                "support value {} at direction {:?} is not positive",
                values[i],
                grid.direction(i)
            )));
        }
        Ok(SampledSupport {
            grid,
            values: Arc::new(values),
            radial: Arc::new(OnceLock::new()),
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_j <x, v_j> / h_j`, the gauge of the Wulff shape of the samples.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.grid
            .directions()
            .zip(self.values.iter())
            .map(|(v, h)| dot(x, v) / h)
            .fold(0.0, f64::max)
    }

    /// Radial values on the own grid.
    pub fn radial_values(&self) -> &[f64] {
        self.radial.get_or_init(|| {
            (0..self.grid.len())
                .into_par_iter()
                .map(|i| 1.0 / self.gauge(self.grid.direction(i)))
                .collect()
        })
    }
}

#[derive(Clone, Debug)]
pub enum ConvexBody {
    Ball { n: usize, radius: f64 },
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    /// `scale * B_q^n`; `q = f64::INFINITY` gives the cube.
    LqBall { n: usize, q: f64, scale: f64 },
    Zonotope(Zonotope),
    Sampled(SampledSupport),
}

impl ConvexBody {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        if n < 2 || !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidBody(format!(
                "ball needs n >= 2 and radius > 0 (n={n}, r={radius})"
            )));
        }
        Ok(ConvexBody::Ball { n, radius })
    }

    pub fn ellipsoid(map: DMatrix<f64>) -> Result<Self> {
        Ellipsoid::new(map).map(ConvexBody::Ellipsoid)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Polytope::new(vertices).map(ConvexBody::Polytope)
    }

    pub fn lq_ball(n: usize, q: f64, scale: f64) -> Result<Self> {
        if n < 2 || !(q >= 1.0) || !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidBody(format!(
                "lq ball needs n >= 2, q >= 1, scale > 0 (n={n}, q={q}, scale={scale})"
            )));
        }
        Ok(ConvexBody::LqBall { n, q, scale })
    }

    pub fn sampled(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        SampledSupport::new(grid, values).map(ConvexBody::Sampled)
    }

    /// Support values computed by `h` on every grid direction.
    pub fn sampled_from<F>(grid: Arc<SphereGrid>, h: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = grid.sample(h);
        Self::sampled(grid, values)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { n, .. } | ConvexBody::LqBall { n, .. } => *n,
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Zonotope(z) => z.n,
            ConvexBody::Sampled(s) => s.grid.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexBody::Ball { .. } => "ball",
            ConvexBody::Ellipsoid(_) => "ellipsoid",
            ConvexBody::Polytope(_) => "polytope",
            ConvexBody::LqBall { .. } => "lq_ball",
            ConvexBody::Zonotope(_) => "zonotope",
            ConvexBody::Sampled(_) => "sampled",
        }
    }

    /// `h(K, u)`, positively homogeneous in `u`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => radius * norm(u),
            ConvexBody::Ellipsoid(e) => norm(&mat_t_vec(&e.map, u)),
            ConvexBody::Polytope(p) => p.support(u),
            ConvexBody::LqBall { q, scale, .. } => scale * lq_norm(u, dual_exponent(*q)),
            ConvexBody::Zonotope(z) => z.support(u),
            ConvexBody::Sampled(s) => {
                let r = norm(u);
                if r == 0.0 {
                    return 0.0;
                }
                let unit: Vec<f64> = u.iter().map(|x| x / r).collect();
                r * s.grid.interpolate(&s.values, &unit)
            }
        }
    }

    /// Support values on all directions of `grid`.
    pub fn support_on(&self, grid: &SphereGrid) -> Vec<f64> {
        if let ConvexBody::Sampled(s) = self {
            if s.grid.same_as(grid) {
                return s.values.to_vec();
            }
        }
        grid.sample(|u| self.support(u))
    }

    /// Minkowski functional `||x||_K`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => norm(x) / radius,
            ConvexBody::Ellipsoid(e) => norm(&mat_vec(&e.inverse, x)),
            ConvexBody::Polytope(p) => p.gauge(x),
            ConvexBody::LqBall { q, scale, .. } => lq_norm(x, *q) / scale,
            ConvexBody::Zonotope(z) => z.gauge(x),
            ConvexBody::Sampled(s) => s.gauge(x),
        }
    }

    /// `rho(K, u)`, homogeneous of degree -1.
    pub fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    pub fn radial_on(&self, grid: &SphereGrid) -> Vec<f64> {
        if let ConvexBody::Sampled(s) = self {
            if s.grid.same_as(grid) {
                return s.radial_values().to_vec();
            }
        }
        grid.sample(|u| self.radial(u))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }

    /// Exact volume where the representation permits, radial quadrature on the
    /// body's own grid for sampled bodies.
    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Ball { n, radius } => unit_ball_volume(*n as f64) * radius.powi(*n as i32),
            ConvexBody::Ellipsoid(e) => e.map.determinant().abs() * unit_ball_volume(e.dim() as f64),
            ConvexBody::Polytope(p) => p.volume(),
            ConvexBody::LqBall { n, q, scale } => lq_ball_volume(*n, *q) * scale.powi(*n as i32),
            ConvexBody::Zonotope(z) => z.volume(),
            ConvexBody::Sampled(s) => {
                let n = s.grid.dim() as i32;
                let rho = s.radial_values();
                s.grid
                    .integrate_values(&rho.iter().map(|r| r.powi(n)).collect::<Vec<_>>())
                    .unwrap_or(f64::NAN)
                    / n as f64
            }
        }
    }

    pub fn polar(&self) -> Result<ConvexBody> {
        Ok(match self {
            ConvexBody::Ball { n, radius } => ConvexBody::Ball { n: *n, radius: 1.0 / radius },
            ConvexBody::Ellipsoid(e) => ConvexBody::Ellipsoid(Ellipsoid {
                map: e.inverse.transpose(),
                inverse: e.map.transpose(),
            }),
            ConvexBody::Polytope(p) => ConvexBody::Polytope(p.polar()?),
            ConvexBody::LqBall { n, q, scale } => ConvexBody::LqBall {
                n: *n,
                q: dual_exponent(*q),
                scale: 1.0 / scale,
            },
            ConvexBody::Zonotope(z) => match &z.polygon {
                Some(p) => ConvexBody::Polytope(p.polar()?),
                None => {
                    let grid = Arc::new(SphereSpec::default_for(z.n).build()?);
                    let values = grid.sample(|u| z.gauge(u));
                    ConvexBody::sampled(grid, values)?
                }
            },
            ConvexBody::Sampled(s) => {
                let values = s.radial_values().iter().map(|r| 1.0 / r).collect();
                ConvexBody::sampled(s.grid.clone(), values)?
            }
        })
    }

    /// The body `Phi K`.
    pub fn linear_image(&self, phi: &DMatrix<f64>) -> Result<ConvexBody> {
        let n = self.dim();
        if phi.nrows() != n || phi.ncols() != n {
            return Err(Error::Config(format!("expected a {n}x{n} matrix")));
        }
        Ok(match self {
            ConvexBody::Ball { radius, .. } => ConvexBody::ellipsoid(phi * *radius)?,
            ConvexBody::Ellipsoid(e) => ConvexBody::ellipsoid(phi * &e.map)?,
            ConvexBody::Polytope(p) => ConvexBody::Polytope(p.linear_image(phi)?),
            ConvexBody::Zonotope(z) => ConvexBody::Zonotope(Zonotope::new(
                n,
                z.generators.iter().map(|g| mat_vec(phi, g)).collect(),
            )?),
            ConvexBody::LqBall { .. } | ConvexBody::Sampled(_) => {
                invert(phi)?;
                let grid = match self {
                    ConvexBody::Sampled(s) => s.grid.clone(),
                    _ => Arc::new(SphereSpec::default_for(n).build()?),
                };
                let values = grid.sample(|u| self.support(&mat_t_vec(phi, u)));
                ConvexBody::sampled(grid, values)?
            }
        })
    }

    pub fn scaled(&self, c: f64) -> Result<ConvexBody> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("dilation factor must be positive, got {c}")));
        }
        Ok(match self {
            ConvexBody::Ball { n, radius } => ConvexBody::Ball { n: *n, radius: radius * c },
            ConvexBody::Ellipsoid(e) => ConvexBody::ellipsoid(&e.map * c)?,
            ConvexBody::Polytope(p) => ConvexBody::Polytope(p.scaled(c)),
            ConvexBody::LqBall { n, q, scale } => ConvexBody::LqBall { n: *n, q: *q, scale: scale * c },
            ConvexBody::Zonotope(z) => ConvexBody::Zonotope(Zonotope::new(
                z.n,
                z.generators.iter().map(|g| g.iter().map(|x| x * c).collect()).collect(),
            )?),
            ConvexBody::Sampled(s) => {
                ConvexBody::sampled(s.grid.clone(), s.values.iter().map(|h| h * c).collect())?
            }
        })
    }

    /// The reflection `-K`.
    pub fn negated(&self) -> Result<ConvexBody> {
        Ok(match self {
            ConvexBody::Polytope(p) => ConvexBody::Polytope(p.negated()),
            ConvexBody::Sampled(s) => {
                let g = &s.grid;
                let values = (0..g.len()).map(|i| s.values[g.antipode(i)]).collect();
                ConvexBody::sampled(g.clone(), values)?
            }
            other => other.clone(),
        })
    }

    /// Dilate of `K` with volume `target`.
    pub fn with_volume(&self, target: f64) -> Result<ConvexBody> {
        let v = self.volume();
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidBody(format!("body volume {v} is not positive")));
        }
        self.scaled((target / v).powf(1.0 / self.dim() as f64))
    }

    /// Largest relative asymmetry `|h(u) - h(-u)| / h(u)` over the grid.
    pub fn asymmetry(&self, grid: &SphereGrid) -> f64 {
        let h = self.support_on(grid);
        (0..grid.len())
            .map(|i| (h[i] - h[grid.antipode(i)]).abs() / h[i])
            .fold(0.0, f64::max)
    }

    /// Checks `h(K, u) > 0` on every grid direction.
    pub fn validate_on(&self, grid: &SphereGrid) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::Config(format!(
                "grid dimension {} does not match body dimension {}",
                grid.dim(),
                self.dim()
            )));
        }
        let h = self.support_on(grid);
        match h.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            Some(i) => Err(Error::InvalidBody(format!(
                "h(K, u) = {} <= 0 at u = {:?}; the origin is not interior",
                h[i],
                grid.direction(i)
            ))),
            None => Ok(()),
        }
    }

    pub fn as_star(&self) -> StarBody {
        StarBody::Convex(self.clone())
    }
}

fn dual_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

fn lq_norm(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if q == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        let m = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn lq_ball_volume(n: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return 2f64.powi(n as i32);
    }
    let nf = n as f64;
    (nf * (2.0 * (ln_gamma(1.0 + 1.0 / q)).exp()).ln() - ln_gamma(1.0 + nf / q)).exp()
}

/// A body star-shaped about the origin, given by its radial function.
#[derive(Clone, Debug)]
pub enum StarBody {
    Sampled { grid: Arc<SphereGrid>, values: Arc<Vec<f64>> },
    Convex(ConvexBody),
}

impl StarBody {
    pub fn sampled(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} radial values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidBody(format!(
                "radial value {} at direction {:?} is not positive and finite",
                values[i],
                grid.direction(i)
            )));
        }
        Ok(StarBody::Sampled { grid, values: Arc::new(values) })
    }

    pub fn from_radial_fn<F>(grid: Arc<SphereGrid>, rho: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = grid.sample(rho);
        Self::sampled(grid, values)
    }

    pub fn dim(&self) -> usize {
        match self {
            StarBody::Sampled { grid, .. } => grid.dim(),
            StarBody::Convex(k) => k.dim(),
        }
    }

    pub fn radial(&self, u: &[f64]) -> f64 {
        match self {
            StarBody::Sampled { grid, values } => {
                let r = norm(u);
                let unit: Vec<f64> = u.iter().map(|x| x / r).collect();
                grid.interpolate(values, &unit) / r
            }
            StarBody::Convex(k) => k.radial(u),
        }
    }

    pub fn radial_on(&self, grid: &SphereGrid) -> Vec<f64> {
        match self {
            StarBody::Sampled { grid: g, values } if g.same_as(grid) => values.to_vec(),
            StarBody::Convex(k) => k.radial_on(grid),
            _ => grid.sample(|u| self.radial(u)),
        }
    }

    /// `(1/n) int rho^n du` on `grid`.
    pub fn volume_on(&self, grid: &SphereGrid) -> Result<f64> {
        let n = grid.dim() as i32;
        let rho = self.radial_on(grid);
        Ok(grid.integrate_values(&rho.iter().map(|r| r.powi(n)).collect::<Vec<_>>())? / n as f64)
    }

    pub fn dilated(&self, c: f64) -> Result<StarBody> {
        match self {
            StarBody::Sampled { grid, values } => {
                StarBody::sampled(grid.clone(), values.iter().map(|r| r * c).collect())
            }
            StarBody::Convex(k) => Ok(StarBody::Convex(k.scaled(c)?)),
        }
    }
}

impl From<ConvexBody> for StarBody {
    fn from(k: ConvexBody) -> Self {
        StarBody::Convex(k)
    }
}

/// Volume of a body: exact where the representation permits, otherwise the
/// radial formula on `grid`.
pub fn body_volume(k: &StarBody, grid: &SphereGrid) -> Result<f64> {
    match k {
        StarBody::Convex(c) if !matches!(c, ConvexBody::Sampled(_)) => Ok(c.volume()),
        _ => k.volume_on(grid),
    }
}
