//! General L_p centroid bodies and the Busemann-Petty centroid deficit.
//!
//! `h(Gamma K, u)^p = (1/(alpha_{n,p} V(K))) int_K ((1-l) <u,y>_+^p + l <u,y>_-^p) dy`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{body_volume, ConvexBody, Polytope, StarBody};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::normalization::alpha_np;
use crate::qmc::shifted_halton;
use crate::spherequad::SphereGrid;

pub const QMC_SAMPLE_FLOOR: usize = 10_000;

/// How the body integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum CentroidMethod {
    /// Exact for polytopes, radial quadrature otherwise.
    #[default]
    Auto,
    /// Cone decomposition over the facets; polytopes only.
    Exact,
    /// `int_K g = (1/(n+p)) int_S g(v) rho(v)^{n+p} dv` on the grid.
    RadialQuadrature,
    /// Shifted Halton points in a bounding box with membership tests.
    QuasiMonteCarlo { samples: usize, seed: u64 },
}

fn check_params(lambda: f64, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must satisfy p >= 1, got {p}")));
    }
    Ok(())
}

#[inline]
fn pos_pow(t: f64, q: f64) -> f64 {
    if t > 0.0 {
        t.powf(q)
    } else {
        0.0
    }
}

/// First divided difference of `big` (with derivative `small`) at `a, b`.
fn divided_1(a: f64, b: f64, big: &impl Fn(f64) -> f64, small: &impl Fn(f64) -> f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if (b - a).abs() <= 1e-6 * scale || scale == 0.0 {
        small(0.5 * (a + b))
    } else {
        (big(b) - big(a)) / (b - a)
    }
}

/// Second divided difference of `g2` (derivatives `g1`, `g0`).
fn divided_2(
    xs: [f64; 3],
    g2: &impl Fn(f64) -> f64,
    g1: &impl Fn(f64) -> f64,
    g0: &impl Fn(f64) -> f64,
) -> f64 {
    let mut x = xs;
    x.sort_by(f64::total_cmp);
    let spread = x[2] - x[0];
    let scale = x[0].abs().max(x[2].abs());
    if spread <= 1e-3 * scale || scale == 0.0 {
        return 0.5 * g0((x[0] + x[1] + x[2]) / 3.0);
    }
    (divided_1(x[1], x[2], g2, g1) - divided_1(x[0], x[1], g2, g1)) / spread
}

/// `int_P t_+^p(<u,y>) dy` over a polytope, exactly.
fn polytope_one_sided(poly: &Polytope, u: &[f64], p: f64) -> f64 {
    let n = poly.dim() as f64;
    let g0 = |t: f64| pos_pow(t, p);
    let g1 = |t: f64| pos_pow(t, p + 1.0) / (p + 1.0);
    let g2 = |t: f64| pos_pow(t, p + 2.0) / ((p + 1.0) * (p + 2.0));
    poly.facets()
        .iter()
        .map(|f| {
            let face = if poly.dim() == 2 {
                let la = dot(u, &f.vertices[0]);
                let lb = dot(u, &f.vertices[1]);
                f.area * divided_1(la, lb, &g1, &g0)
            } else {
                let v = &f.vertices;
                let l0 = dot(u, &v[0]);
                (1..v.len() - 1)
                    .map(|i| {
                        let e1: Vec<f64> = v[i].iter().zip(&v[0]).map(|(a, b)| a - b).collect();
                        let e2: Vec<f64> = v[i + 1].iter().zip(&v[0]).map(|(a, b)| a - b).collect();
                        let c = [
                            e1[1] * e2[2] - e1[2] * e2[1],
                            e1[2] * e2[0] - e1[0] * e2[2],
                            e1[0] * e2[1] - e1[1] * e2[0],
                        ];
                        let area = 0.5 * norm(&c);
                        2.0 * area * divided_2([l0, dot(u, &v[i]), dot(u, &v[i + 1])], &g2, &g1, &g0)
                    })
                    .sum()
            };
            f.offset / (n + p) * face
        })
        .sum()
}

fn combine(lambda: f64, plus: f64, minus: f64) -> f64 {
    (1.0 - lambda) * plus + lambda * minus
}

enum Prepared<'a> {
    Exact { poly: &'a Polytope, volume: f64 },
    Radial { rho_pow: Vec<f64>, volume: f64 },
    Sampled { points: Vec<Vec<f64>> },
}

fn prepare<'a>(
    k: &'a StarBody,
    p: f64,
    grid: &SphereGrid,
    method: CentroidMethod,
) -> Result<Prepared<'a>> {
    let n = grid.dim();
    if k.dim() != n {
        return Err(Error::Config(format!(
            "body dimension {} does not match grid dimension {n}",
            k.dim()
        )));
    }
    let poly = match k {
        StarBody::Convex(ConvexBody::Polytope(poly)) => Some(poly),
        _ => None,
    };
    match (method, poly) {
        (CentroidMethod::Auto | CentroidMethod::Exact, Some(poly)) => {
            Ok(Prepared::Exact { poly, volume: poly.volume() })
        }
        (CentroidMethod::Exact, None) => Err(Error::Unsupported(
            "exact centroid integrals need a polytope".into(),
        )),
        (CentroidMethod::Auto | CentroidMethod::RadialQuadrature, _) => {
            let rho = k.radial_on(grid);
            let nf = n as f64;
            let volume = grid
                .integrate_values(&rho.iter().map(|r| r.powf(nf)).collect::<Vec<_>>())?
                / nf;
            if !(volume > 0.0) {
                return Err(Error::InvalidBody(format!("body volume {volume} is not positive")));
            }
            let rho_pow = rho
                .iter()
                .zip(grid.weights())
                .map(|(r, w)| w * r.powf(nf + p) / (nf + p))
                .collect();
            Ok(Prepared::Radial { rho_pow, volume })
        }
        (CentroidMethod::QuasiMonteCarlo { samples, seed }, _) => {
            if samples < QMC_SAMPLE_FLOOR {
                return Err(Error::Config(format!(
                    "quasi-Monte Carlo needs at least {QMC_SAMPLE_FLOOR} samples, got {samples}"
                )));
            }
            let (lo, hi) = bounding_box(k, grid);
            let points: Vec<Vec<f64>> = shifted_halton(n, samples, seed)
                .into_iter()
                .map(|q| q.iter().enumerate().map(|(d, t)| lo[d] + t * (hi[d] - lo[d])).collect())
                .filter(|x: &Vec<f64>| norm(x) == 0.0 || k.radial(x) >= 1.0)
                .collect();
            if points.is_empty() {
                return Err(Error::Numerical("no sample point fell inside the body".into()));
            }
            Ok(Prepared::Sampled { points })
        }
    }
}

fn bounding_box(k: &StarBody, grid: &SphereGrid) -> (Vec<f64>, Vec<f64>) {
    let n = grid.dim();
    match k {
        StarBody::Convex(c) => {
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for d in 0..n {
                let mut e = vec![0.0; n];
                e[d] = 1.0;
                hi[d] = c.support(&e);
                e[d] = -1.0;
                lo[d] = -c.support(&e);
            }
            (lo, hi)
        }
        StarBody::Sampled { values, .. } => {
            let r = values.iter().fold(0.0_f64, |m, v| m.max(*v)) * 1.01;
            (vec![-r; n], vec![r; n])
        }
    }
}

fn support_pow(prep: &Prepared, lambda: f64, p: f64, u: &[f64], grid: &SphereGrid) -> f64 {
    let n = grid.dim();
    let alpha = alpha_np(n, p);
    match prep {
        Prepared::Exact { poly, volume } => {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let plus = polytope_one_sided(poly, u, p);
            let minus = polytope_one_sided(poly, &neg, p);
            combine(lambda, plus, minus) / (alpha * volume)
        }
        Prepared::Radial { rho_pow, volume } => {
            let mut terms = Vec::with_capacity(rho_pow.len());
            for (j, rp) in rho_pow.iter().enumerate() {
                let t = dot(u, grid.direction(j));
                terms.push(rp * combine(lambda, pos_pow(t, p), pos_pow(-t, p)));
            }
            crate::spherequad::pairwise_sum(&terms) / (alpha * volume)
        }
        Prepared::Sampled { points } => {
            let terms: Vec<f64> = points
                .iter()
                .map(|y| {
                    let t = dot(u, y);
                    combine(lambda, pos_pow(t, p), pos_pow(-t, p))
                })
                .collect();
            crate::spherequad::pairwise_sum(&terms) / (alpha * points.len() as f64)
        }
    }
}

/// `h(Gamma_{lambda,p} K, u)` for a single direction.
pub fn centroid_support(
    k: &StarBody,
    lambda: f64,
    p: f64,
    u: &[f64],
    grid: &SphereGrid,
    method: CentroidMethod,
) -> Result<f64> {
    check_params(lambda, p)?;
    let prep = prepare(k, p, grid, method)?;
    Ok(support_pow(&prep, lambda, p, u, grid).powf(1.0 / p))
}

/// `Gamma_{lambda,p} K` as a body sampled on `grid`.
pub fn centroid_body(
    k: &StarBody,
    lambda: f64,
    p: f64,
    grid: Arc<SphereGrid>,
    method: CentroidMethod,
) -> Result<ConvexBody> {
    check_params(lambda, p)?;
    let prep = prepare(k, p, &grid, method)?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| support_pow(&prep, lambda, p, grid.direction(i), &grid).powf(1.0 / p))
        .collect();
    ConvexBody::sampled(grid, values)
}

/// `V(Gamma_{lambda,p} K) / V(K) - 1`, non-negative up to discretization.
pub fn busemann_petty_deficit(
    k: &StarBody,
    lambda: f64,
    p: f64,
    grid: Arc<SphereGrid>,
    method: CentroidMethod,
) -> Result<f64> {
    let vk = body_volume(k, &grid)?;
    let gamma = centroid_body(k, lambda, p, grid, method)?;
    Ok(gamma.volume() / vk - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherequad::Scheme;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle() -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(2, 512, Scheme::UniformAngle, 0).unwrap())
    }

    fn square() -> StarBody {
        ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap()).into()
    }

    #[test]
    fn exact_square_at_p2() {
        let g = circle();
        for t in [0.0, 0.3, 1.1] {
            let u = [f64::cos(t), f64::sin(t)];
            let h = centroid_support(&square(), 0.5, 2.0, &u, &g, CentroidMethod::Exact).unwrap();
            assert!((h - 2.0 / 3f64.sqrt()).abs() < 1e-12, "{h}");
        }
        let d = busemann_petty_deficit(&square(), 0.5, 2.0, g, CentroidMethod::Auto).unwrap();
        assert!((d - (PI / 3.0 - 1.0)).abs() < 2e-3, "{d}");
    }

    #[test]
    fn exact_cube_at_p2() {
        let g = SphereGrid::new(3, 16, Scheme::ProductGauss, 0).unwrap();
        let cube: StarBody = ConvexBody::Polytope(Polytope::cube(3, 1.0).unwrap()).into();
        // int_{[-1,1]^3} <u,y>^2 = 8/3; alpha_{3,2} V = alpha * 8
        let expect = ((8.0 / 3.0) / 2.0 / (alpha_np(3, 2.0) * 8.0)).sqrt();
        let u = [0.36, 0.48, 0.8];
        let h = centroid_support(&cube, 0.5, 2.0, &u, &g, CentroidMethod::Exact).unwrap();
        assert!((h - expect).abs() < 1e-12, "{h} vs {expect}");
    }

    #[test]
    fn exact_agrees_with_radial_and_qmc() {
        let g = circle();
        let poly: StarBody = ConvexBody::polytope(vec![
            vec![2.0, 0.1],
            vec![-0.5, 1.3],
            vec![-1.0, -1.0],
            vec![0.7, -0.9],
        ])
        .unwrap()
        .into();
        for (lambda, p) in [(0.0, 1.0), (0.3, 1.5), (0.5, 2.0), (1.0, 3.0)] {
            for t in [0.2, 2.0, 4.0] {
                let u = [f64::cos(t), f64::sin(t)];
                let e = centroid_support(&poly, lambda, p, &u, &g, CentroidMethod::Exact).unwrap();
                let r = centroid_support(&poly, lambda, p, &u, &g, CentroidMethod::RadialQuadrature)
                    .unwrap();
                let q = centroid_support(
                    &poly,
                    lambda,
                    p,
                    &u,
                    &g,
                    CentroidMethod::QuasiMonteCarlo { samples: 200_000, seed: 1 },
                )
                .unwrap();
                assert!((r / e - 1.0).abs() < 2e-3, "radial {r} vs exact {e}");
                assert!((q / e - 1.0).abs() < 1e-2, "qmc {q} vs exact {e}");
            }
        }
    }

    #[test]
    fn ball_is_fixed() {
        let g = circle();
        let b: StarBody = ConvexBody::ball(2, 1.3).unwrap().into();
        for lambda in [0.0, 0.25, 0.5] {
            for p in [1.0, 2.0, 3.5] {
                let gb = centroid_body(&b, lambda, p, g.clone(), CentroidMethod::Auto).unwrap();
                for h in gb.support_on(&g) {
                    assert!((h - 1.3).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn reflection_swaps_lambda() {
        // y -> -y turns Gamma_l(-K) into Gamma_{1-l}(K) and into -Gamma_l(K)
        let g = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..7)
                .map(|i| {
                    let t = i as f64 * 0.9 + rng.random_range(0.0..0.5);
                    let r = rng.random_range(0.5..2.0);
                    vec![r * t.cos() + 0.2, r * t.sin()]
                })
                .collect();
            let Ok(k) = ConvexBody::polytope(pts) else { continue };
            let neg: StarBody = k.negated().unwrap().into();
            let k: StarBody = k.into();
            let u = [0.6, 0.8];
            let mu = [-0.6, -0.8];
            let a = centroid_support(&neg, 0.2, 1.7, &u, &g, CentroidMethod::Exact).unwrap();
            let b = centroid_support(&k, 0.8, 1.7, &u, &g, CentroidMethod::Exact).unwrap();
            let c = centroid_support(&k, 0.2, 1.7, &mu, &g, CentroidMethod::Exact).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            assert!((a - c).abs() < 1e-12, "{a} vs {c}");
        }
    }

    #[test]
    fn linear_covariance() {
        let g = circle();
        let k = ConvexBody::polytope(vec![vec![2.0, 0.1], vec![-0.5, 1.3], vec![-1.0, -1.0]]).unwrap();
        let phi = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, -0.2, 0.8]);
        let img: StarBody = k.linear_image(&phi).unwrap().into();
        let d0 = busemann_petty_deficit(&k.clone().into(), 0.3, 1.5, g.clone(), CentroidMethod::Auto).unwrap();
        let d1 = busemann_petty_deficit(&img, 0.3, 1.5, g, CentroidMethod::Auto).unwrap();
        assert!((d0 - d1).abs() < 0.01 * (1.0 + d0));
    }

    #[test]
    fn qmc_sample_floor() {
        let g = circle();
        let r = centroid_support(
            &square(),
            0.5,
            2.0,
            &[1.0, 0.0],
            &g,
            CentroidMethod::QuasiMonteCarlo { samples: 9_999, seed: 0 },
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn divided_difference_fallbacks() {
        let p = 1.5;
        let g0 = |t: f64| pos_pow(t, p);
        let g1 = |t: f64| pos_pow(t, p + 1.0) / (p + 1.0);
        let g2 = |t: f64| pos_pow(t, p + 2.0) / ((p + 1.0) * (p + 2.0));
        let near = divided_2([1.0, 1.0 + 1e-9, 1.0 - 1e-9], &g2, &g1, &g0);
        assert!((near - 0.5).abs() < 1e-8);
        let far = divided_2([0.0, 1.0, 2.0], &g2, &g1, &g0);
        let expect = (g2(2.0) - 2.0 * g2(1.0) + g2(0.0)) / 2.0;
        assert!((far - expect).abs() < 1e-14);
    }
}
