//! Polar volume, Firey combinations and dual mixed volumes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConvexBody, StarBody};
use crate::error::{Error, Result};
use crate::spherequad::SphereGrid;

/// `V(K^*) = (1/n) int h(K, u)^{-n} du`.
pub fn polar_volume(k: &ConvexBody, grid: &SphereGrid) -> Result<f64> {
    k.validate_on(grid)?;
    let n = grid.dim() as i32;
    let h = k.support_on(grid);
    Ok(grid.integrate_values(&h.iter().map(|v| v.powi(-n)).collect::<Vec<_>>())? / n as f64)
}

/// Body with `h^p = alpha h_K^p + beta h_L^p`, sampled on `grid`.
pub fn firey_combination(
    alpha: f64,
    k: &ConvexBody,
    beta: f64,
    l: &ConvexBody,
    p: f64,
    grid: Arc<SphereGrid>,
) -> Result<ConvexBody> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "Firey weights must be positive, got ({alpha}, {beta})"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must satisfy p >= 1, got {p}")));
    }
    if k.dim() != l.dim() || k.dim() != grid.dim() {
        return Err(Error::Config("bodies and grid have different dimensions".into()));
    }
    let hk = k.support_on(&grid);
    let hl = l.support_on(&grid);
    let values = hk
        .iter()
        .zip(&hl)
        .map(|(a, b)| (alpha * a.powf(p) + beta * b.powf(p)).powf(1.0 / p))
        .collect();
    ConvexBody::sampled(grid, values)
}

/// `V~_{-p}(K, L) = (1/n) int rho_K^{n+p} rho_L^{-p} du`.
pub fn dual_mixed_volume(k: &StarBody, l: &StarBody, p: f64, grid: &SphereGrid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must satisfy p >= 1, got {p}")));
    }
    let n = grid.dim() as f64;
    let rk = k.radial_on(grid);
    let rl = l.radial_on(grid);
    let vals: Vec<f64> = rk
        .iter()
        .zip(&rl)
        .map(|(a, b)| a.powf(n + p) * b.powf(-p))
        .collect();
    Ok(grid.integrate_values(&vals)? / n)
}

/// Both sides of the improved dual mixed volume inequality.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualGap {
    /// `V~_{-p}(K,L) / (V(K)^{(n+p)/n} V(L)^{-p/n}) - 1`.
    pub lhs_ratio_minus_1: f64,
    /// `(p / (8n)) (V(K delta gamma L) / V(K))^2`.
    pub rhs_bound: f64,
    pub sym_diff_ratio: f64,
    pub holds: bool,
}

pub fn improved_dual_gap(k: &StarBody, l: &StarBody, p: f64, grid: &SphereGrid) -> Result<DualGap> {
    let n = grid.dim() as f64;
    let vk = k.volume_on(grid)?;
    let vl = l.volume_on(grid)?;
    let dual = dual_mixed_volume(k, l, p, grid)?;
    let lhs = dual / (vk.powf((n + p) / n) * vl.powf(-p / n)) - 1.0;
    let a = symmetric_difference_ratio(k, l, grid)?;
    let rhs = p / (8.0 * n) * a * a;
    Ok(DualGap {
        lhs_ratio_minus_1: lhs,
        rhs_bound: rhs,
        sym_diff_ratio: a,
        holds: lhs >= rhs - 1e-9,
    })
}

/// `V(K delta aL) / V(K)` with `a = (V(K)/V(L))^{1/n}`, by the radial formula.
pub fn symmetric_difference_ratio(k: &StarBody, l: &StarBody, grid: &SphereGrid) -> Result<f64> {
    let n = grid.dim() as i32;
    let rk = k.radial_on(grid);
    let rl = l.radial_on(grid);
    let pk: Vec<f64> = rk.iter().map(|r| r.powi(n)).collect();
    let pl: Vec<f64> = rl.iter().map(|r| r.powi(n)).collect();
    let vk = grid.integrate_values(&pk)?;
    let vl = grid.integrate_values(&pl)?;
    let s = vk / vl;
    let diff: Vec<f64> = pk.iter().zip(&pl).map(|(a, b)| (a - s * b).abs()).collect();
    Ok(grid.integrate_values(&diff)? / vk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Polytope;
    use crate::spherequad::Scheme;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn circle() -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(2, 512, Scheme::UniformAngle, 0).unwrap())
    }

    #[test]
    fn polar_volumes() {
        let g = circle();
        let b = ConvexBody::ball(2, 2.0).unwrap();
        assert!((polar_volume(&b, &g).unwrap() - PI / 4.0).abs() < 1e-12);
        let sq = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap());
        assert!((polar_volume(&sq, &g).unwrap() - 2.0).abs() < 0.02);
        let e = ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0])).unwrap();
        assert!((polar_volume(&e, &g).unwrap() - PI).abs() < 0.01 * PI);
    }

    #[test]
    fn firey_examples() {
        let g = circle();
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let h = firey_combination(0.5, &b, 0.5, &b, 2.0, g.clone()).unwrap();
        assert!((h.support(&[0.6, 0.8]) - 1.0).abs() < 1e-12);
        let h = firey_combination(1.0, &b, 1.0, &b, 2.0, g.clone()).unwrap();
        assert!((h.support(&[0.6, 0.8]) - 2f64.sqrt()).abs() < 1e-12);
        let sq = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap());
        let h = firey_combination(1.0, &sq, 1e-12, &b, 1.0, g.clone()).unwrap();
        assert!((h.volume() - 4.0).abs() < 0.01);
        assert!(firey_combination(0.0, &sq, 1.0, &b, 1.0, g).is_err());
    }

    #[test]
    fn dual_mixed_examples() {
        let g = circle();
        let b1: StarBody = ConvexBody::ball(2, 1.0).unwrap().into();
        let b2: StarBody = ConvexBody::ball(2, 2.0).unwrap().into();
        let v = dual_mixed_volume(&b2, &b1, 1.0, &g).unwrap();
        assert!((v - 8.0 * PI).abs() < 1e-10);
        let sq: StarBody = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap()).into();
        let v = dual_mixed_volume(&sq, &sq, 2.0, &g).unwrap();
        assert!((v - sq.volume_on(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn improved_gap_examples() {
        let g = circle();
        let b: StarBody = ConvexBody::ball(2, 1.0).unwrap().into();
        let z = improved_dual_gap(&b, &b, 1.0, &g).unwrap();
        assert!(z.lhs_ratio_minus_1.abs() < 1e-12 && z.rhs_bound < 1e-20);
        let e: StarBody = ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]))
            .unwrap()
            .into();
        let r = improved_dual_gap(&b, &e, 1.0, &g).unwrap();
        assert!(r.holds && r.lhs_ratio_minus_1 > r.rhs_bound);
        let d = improved_dual_gap(&e, &e.dilated(1.7).unwrap(), 2.0, &g).unwrap();
        assert!(d.lhs_ratio_minus_1.abs() < 1e-6 && d.rhs_bound < 1e-6);
    }

    #[test]
    fn symmetric_difference_against_rasterization() {
        let g = circle();
        let b: StarBody = ConvexBody::ball(2, 1.0).unwrap().into();
        let ek = ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        let e: StarBody = ek.clone().into();
        let a = symmetric_difference_ratio(&b, &e, &g).unwrap();
        assert!(a > 0.1);
        // count cells in exactly one of the two sets; here a = 1
        let m = 1200;
        let h = 4.4 / m as f64;
        let mut count = 0usize;
        for i in 0..m {
            for j in 0..m {
                let x = [-2.2 + (i as f64 + 0.5) * h, -2.2 + (j as f64 + 0.5) * h];
                let inb = x[0] * x[0] + x[1] * x[1] <= 1.0;
                if inb != ek.contains(&x) {
                    count += 1;
                }
            }
        }
        let raster = count as f64 * h * h / PI;
        assert!((a / raster - 1.0).abs() < 0.02, "{a} vs {raster}");
        assert!(symmetric_difference_ratio(&e, &e.dilated(3.0).unwrap(), &g).unwrap() < 1e-12);
    }
}
