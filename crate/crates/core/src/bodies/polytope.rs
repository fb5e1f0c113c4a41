//! Convex polytopes in dimension 2 and 3, built from a vertex list.
//!
//! The facet description (outer unit normal, offset, (n-1)-volume and an
//! ordered vertex loop) is computed once at construction. The origin must lie
//! strictly inside.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm};

const PLANE_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Facet {
    /// Outer unit normal.
    pub normal: Vec<f64>,
    /// Distance of the facet hyperplane from the origin (> 0).
    pub offset: f64,
    /// (n-1)-dimensional volume.
    pub area: f64,
    /// Boundary vertices in cyclic order (n = 3) or the two endpoints (n = 2).
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Polytope {
    n: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    volume: f64,
}

impl Polytope {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidBody("vertices have mixed dimensions".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
        }
        let (vertices, facets) = match n {
            2 => hull_2d(&points)?,
            3 => hull_3d(&points)?,
            _ => {
                return Err(Error::Unsupported(format!(
                    "polytopes are supported for n in {{2, 3}}, got n={n}"
                )))
            }
        };
        let volume: f64 = facets.iter().map(|f| f.offset * f.area).sum::<f64>() / n as f64;
        let scale = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        if volume <= 1e-12 * scale.powi(n as i32) {
            return Err(Error::InvalidBody("vertex set does not span R^n".into()));
        }
        if let Some(f) = facets.iter().find(|f| f.offset <= PLANE_EPS * scale) {
            return Err(Error::InvalidBody(format!(
                "origin is not interior (facet with normal {:?} at offset {})",
                f.normal, f.offset
            )));
        }
        Ok(Polytope { n, vertices, facets, volume })
    }

    /// Axis-aligned cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Result<Self> {
        let pts = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|d| if mask >> d & 1 == 1 { r } else { -r })
                    .collect()
            })
            .collect();
        Self::new(pts)
    }

    /// Regular polygon with `k` vertices on the circle of radius `r`.
    pub fn regular_polygon(k: usize, r: f64, phase: f64) -> Result<Self> {
        let pts = (0..k)
            .map(|i| {
                let t = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        Self::new(pts)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minkowski functional `||x||_P`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| dot(x, &f.normal) / f.offset)
            .fold(0.0, f64::max)
    }

    pub fn radial(&self, x: &[f64]) -> f64 {
        1.0 / self.gauge(x)
    }

    /// Polar body: the vertices are the facet normals divided by their offsets.
    pub fn polar(&self) -> Result<Polytope> {
        Polytope::new(
            self.facets
                .iter()
                .map(|f| f.normal.iter().map(|c| c / f.offset).collect())
                .collect(),
        )
    }

    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Polytope> {
        Polytope::new(self.vertices.iter().map(|v| mat_vec(m, v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Polytope {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.iter_mut().for_each(|x| *x *= c);
        }
        for f in &mut out.facets {
            f.offset *= c;
            f.area *= c.powi(self.n as i32 - 1);
            for v in &mut f.vertices {
                v.iter_mut().for_each(|x| *x *= c);
            }
        }
        out.volume *= c.powi(self.n as i32);
        out
    }

    pub fn negated(&self) -> Polytope {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for f in &mut out.facets {
            f.normal.iter_mut().for_each(|x| *x = -*x);
            for v in &mut f.vertices {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out
    }

    /// `sum_F area(F) * normal(F)`; zero for a closed surface.
    pub fn closure_residual(&self) -> f64 {
        let mut s = vec![0.0; self.n];
        for f in &self.facets {
            for (d, c) in f.normal.iter().enumerate() {
                s[d] += f.area * c;
            }
        }
        norm(&s)
    }
}

/// Andrew's monotone chain; returns the hull in counter-clockwise order.
fn monotone_chain(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let scale = pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
    let tol = 1e-14 * scale * scale;
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn hull_2d(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Facet>)> {
    let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    let hull = monotone_chain(&pts);
    if hull.len() < 3 {
        return Err(Error::InvalidBody("vertex set does not span R^2".into()));
    }
    let k = hull.len();
    let facets = (0..k)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % k];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let normal = vec![dy / len, -dx / len];
            Facet {
                offset: normal[0] * a[0] + normal[1] * a[1],
                normal,
                area: len,
                vertices: vec![a.to_vec(), b.to_vec()],
            }
        })
        .collect();
    Ok((hull.iter().map(|p| p.to_vec()).collect(), facets))
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Brute-force facet enumeration; fine for the few dozen vertices used here.
fn hull_3d(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Facet>)> {
    let m = points.len();
    if m < 4 {
        return Err(Error::InvalidBody("need at least 4 vertices in R^3".into()));
    }
    let scale = points.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let tol = PLANE_EPS * scale.max(1.0);
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let c = cross3(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                let len = norm(&c);
                if len <= 1e-12 * scale * scale {
                    continue;
                }
                let mut nrm: Vec<f64> = c.iter().map(|x| x / len).collect();
                let mut off = dot(&nrm, &points[i]);
                let (mut above, mut below) = (false, false);
                for p in points {
                    let s = dot(&nrm, p) - off;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                if above {
                    nrm.iter_mut().for_each(|x| *x = -*x);
                    off = -off;
                }
                let dup = planes
                    .iter()
                    .any(|(q, o)| (o - off).abs() <= tol && norm(&sub(q, &nrm)) <= 1e-7);
                if !dup {
                    planes.push((nrm, off));
                }
            }
        }
    }
    let mut facets = Vec::new();
    let mut hull_vertices: Vec<Vec<f64>> = Vec::new();
    for (nrm, off) in planes {
        let on: Vec<&Vec<f64>> = points
            .iter()
            .filter(|p| (dot(&nrm, p) - off).abs() <= tol)
            .collect();
        // Orthonormal basis of the facet plane.
        let helper = if nrm[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = {
            let c = cross3(&nrm, &helper);
            let l = norm(&c);
            [c[0] / l, c[1] / l, c[2] / l]
        };
        let e2 = cross3(&nrm, &e1);
        let flat: Vec<[f64; 2]> = on.iter().map(|p| [dot(p, &e1), dot(p, &e2)]).collect();
        let loop2 = monotone_chain(&flat);
        if loop2.len() < 3 {
            continue;
        }
        let verts: Vec<Vec<f64>> = loop2
            .iter()
            .map(|q| (0..3).map(|d| nrm[d] * off + q[0] * e1[d] + q[1] * e2[d]).collect())
            .collect();
        let mut area = 0.0;
        for i in 0..loop2.len() {
            let a = loop2[i];
            let b = loop2[(i + 1) % loop2.len()];
            area += a[0] * b[1] - a[1] * b[0];
        }
        area = 0.5 * area.abs();
        for v in &verts {
            if !hull_vertices.iter().any(|w| norm(&sub(v, w)) <= tol) {
                hull_vertices.push(v.clone());
            }
        }
        facets.push(Facet { normal: nrm, offset: off, area, vertices: verts });
    }
    if facets.len() < 4 {
        return Err(Error::InvalidBody("vertex set does not span R^3".into()));
    }
    Ok((hull_vertices, facets))
}
