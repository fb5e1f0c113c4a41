//! Surface area measures and the quantities built from them.

use nalgebra::DMatrix;

use super::{polar_volume, ConvexBody, Ellipsoid, Zonotope};
use crate::error::{Error, Result};
use crate::linalg::{dot, invert, mat_vec, norm};
use crate::spherequad::{unit_ball_volume, SphereGrid};

/// Surface area measure `S(K, .)` of a body.
#[derive(Clone, Debug)]
pub enum SurfaceMeasure {
    /// Point masses `(normal, (n-1)-volume)` at the facet normals.
    Facets(Vec<(Vec<f64>, f64)>),
    /// Density `det(A A^T) / h(u)^{n+1}` with respect to spherical measure.
    Ellipsoid { gram: DMatrix<f64>, det_gram: f64 },
    /// Density `r^{n-1}`.
    Ball { n: usize, radius: f64 },
}

impl SurfaceMeasure {
    pub fn of(k: &ConvexBody) -> Result<Self> {
        match k {
            ConvexBody::Ball { n, radius } => Ok(SurfaceMeasure::Ball { n: *n, radius: *radius }),
            ConvexBody::Ellipsoid(e) => {
                let gram = e.gram();
                let det_gram = gram.determinant();
                Ok(SurfaceMeasure::Ellipsoid { gram, det_gram })
            }
            ConvexBody::Polytope(p) => Ok(SurfaceMeasure::Facets(
                p.facets().iter().map(|f| (f.normal.clone(), f.area)).collect(),
            )),
            other => Err(Error::Unsupported(format!(
                "surface area measure is not available for {} bodies",
                other.kind()
            ))),
        }
    }

    /// `int g dS` with exact sums for facets and quadrature on `grid` otherwise.
    pub fn integrate<F>(&self, g: F, grid: &SphereGrid) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self {
            SurfaceMeasure::Facets(fs) => Ok(fs.iter().map(|(nu, m)| g(nu) * m).sum()),
            SurfaceMeasure::Ball { n, radius } => {
                Ok(grid.integrate(&g)? * radius.powi(*n as i32 - 1))
            }
            SurfaceMeasure::Ellipsoid { gram, det_gram } => {
                let n = gram.nrows() as f64;
                grid.integrate(|u| {
                    let h = dot(u, &mat_vec(gram, u)).sqrt();
                    g(u) * det_gram / h.powf(n + 1.0)
                })
            }
        }
    }

    /// Total mass.
    pub fn total(&self, grid: &SphereGrid) -> Result<f64> {
        self.integrate(|_| 1.0, grid)
    }
}

/// `V_p(K, L) = (1/n) int h_L^p h_K^{1-p} dS_K`.
pub fn lp_mixed_volume(k: &ConvexBody, l: &ConvexBody, p: f64, grid: &SphereGrid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must satisfy p >= 1, got {p}")));
    }
    if k.dim() != l.dim() {
        return Err(Error::Config("bodies have different dimensions".into()));
    }
    let s = SurfaceMeasure::of(k)?;
    let n = k.dim() as f64;
    Ok(s.integrate(|u| l.support(u).powf(p) * k.support(u).powf(1.0 - p), grid)? / n)
}

/// `Pi_1 K` with `h(Pi_1 K, u) = (1/(2 omega_{n-1})) int |<u, v>| dS_K(v)`.
///
/// Balls and ellipsoids map to balls and ellipsoids, polytopes to zonotopes.
pub fn projection_body(k: &ConvexBody) -> Result<ConvexBody> {
    let n = k.dim();
    match k {
        ConvexBody::Ball { radius, .. } => ConvexBody::ball(n, radius.powi(n as i32 - 1)),
        ConvexBody::Ellipsoid(e) => {
            let a = e.map();
            let inv_t = invert(a)?.transpose();
            Ok(ConvexBody::Ellipsoid(Ellipsoid::new(inv_t * a.determinant().abs())?))
        }
        ConvexBody::Polytope(p) => {
            let c = 1.0 / (2.0 * unit_ball_volume(n as f64 - 1.0));
            // Parallel facets (v, -v) merge into one generator.
            let mut gens: Vec<Vec<f64>> = Vec::new();
            for f in p.facets() {
                let g: Vec<f64> = f.normal.iter().map(|x| x * f.area * c).collect();
                let unit: Vec<f64> = f.normal.clone();
                match gens.iter_mut().find(|h| {
                    let hn = norm(h);
                    (dot(h, &unit).abs() / hn - 1.0).abs() < 1e-12
                }) {
                    Some(h) => {
                        let s = dot(h, &unit).signum();
                        for (a, b) in h.iter_mut().zip(&g) {
                            *a += s * b;
                        }
                    }
                    None => gens.push(g),
                }
            }
            Ok(ConvexBody::Zonotope(Zonotope::new(n, gens)?))
        }
        other => Err(Error::Unsupported(format!(
            "projection body needs a surface area measure; {} bodies have none",
            other.kind()
        ))),
    }
}

/// `V(Pi_1^* K) V(K)^{n-1} / omega_n^n`, at most one.
pub fn petty_product(k: &ConvexBody, grid: &SphereGrid) -> Result<f64> {
    let n = k.dim() as i32;
    let pi = projection_body(k)?;
    let polar_vol = polar_volume(&pi, grid)?;
    Ok(polar_vol * k.volume().powi(n - 1) / unit_ball_volume(n as f64).powi(n))
}

#[cfg(test)]
fn support_of_projection(k: &ConvexBody, u: &[f64], grid: &SphereGrid) -> Result<f64> {
    let s = SurfaceMeasure::of(k)?;
    let n = k.dim() as f64;
    Ok(s.integrate(|v| dot(u, v).abs(), grid)? / (2.0 * unit_ball_volume(n - 1.0)))
}
