//! Distribution functions and rearrangements.
//!
//! `f*` is built from the sorted cell values of `|f|`. Symmetric
//! rearrangement and convex symmetrization evaluate the piecewise-linear
//! profile through shell-averaged knots rather than assigning
//! sorted values cell by cell: rank assignment leaves lattice-scale jitter
//! that finite differences turn into spurious gradient energy. The knots are
//! shell averages: lattice radii are unevenly spaced, so a knot per rank makes
//! the slope jump between flat and steep pieces, which a non-round gauge
//! samples out of phase.

use rayon::prelude::*;

use super::GridFunction;
use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::spherequad::unit_ball_volume;

/// Non-increasing rearrangement of `|f|` on `[0, inf)`.
#[derive(Clone, Debug)]
pub struct DecreasingRearrangement {
    cell_volume: f64,
    /// `|f|` sorted in decreasing order.
    sorted: Vec<f64>,
    /// Profile knots `(s, v)`.
    knots: Vec<(f64, f64)>,
}

/// Averages the sorted values over rank bins one lattice spacing wide in the
/// radial direction (`n omega_n^{1/n} k^{(n-1)/n}` cells at rank `k`) and puts
/// a knot at each bin's midpoint.
fn shell_knots(sorted: &[f64], cell_volume: f64, n: usize) -> Vec<(f64, f64)> {
    let c = n as f64 * unit_ball_volume(n as f64).powf(1.0 / n as f64);
    let expo = (n as f64 - 1.0) / n as f64;
    let mut knots = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let width = ((c * (start as f64).powf(expo)) as usize).max(1);
        let end = (start + width).min(sorted.len());
        let mean = sorted[start..end].iter().sum::<f64>() / (end - start) as f64;
        knots.push((0.5 * (start + end) as f64 * cell_volume, mean));
        start = end;
    }
    knots
}

impl DecreasingRearrangement {
    pub fn of(f: &GridFunction) -> Self {
        let mut sorted: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        sorted.par_sort_unstable_by(|a, b| b.total_cmp(a));
        let knots = if sorted.is_empty() { Vec::new() } else { shell_knots(&sorted, f.cell_volume(), f.dim()) };
        DecreasingRearrangement { cell_volume: f.cell_volume(), sorted, knots }
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Total measure covered by the cells.
    pub fn extent(&self) -> f64 {
        self.cell_volume * self.sorted.len() as f64
    }

    /// Step function: `f*(s) = v_k` for `s` in `[k h^n, (k+1) h^n)`.
    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 {
            return self.sorted.first().copied().unwrap_or(0.0);
        }
        let k = (s / self.cell_volume).floor() as usize;
        self.sorted.get(k).copied().unwrap_or(0.0)
    }

    /// Piecewise-linear interpolant through the shell knots.
    pub fn profile(&self, s: f64) -> f64 {
        let knots = &self.knots;
        if knots.is_empty() || s >= self.extent() {
            return 0.0;
        }
        let j = knots.partition_point(|(sk, _)| *sk <= s);
        if j == 0 {
            return knots[0].1;
        }
        if j == knots.len() {
            return knots[j - 1].1;
        }
        let ((s0, v0), (s1, v1)) = (knots[j - 1], knots[j]);
        let w = (s - s0) / (s1 - s0);
        (1.0 - w) * v0 + w * v1
    }

    /// `mu(t) = h^n #{ v_k > t }`.
    pub fn distribution(&self, t: f64) -> f64 {
        let count = self.sorted.partition_point(|v| *v > t);
        count as f64 * self.cell_volume
    }

    /// `int_0^inf f*(s)^p ds` as a cell sum.
    pub fn lp_integral(&self, p: f64) -> f64 {
        crate::spherequad::pairwise_sum(&self.sorted.iter().map(|v| v.powf(p)).collect::<Vec<_>>())
            * self.cell_volume
    }
}

impl GridFunction {
    /// `mu_f(t) = V({|f| > t})`, counted in cells.
    pub fn distribution_function(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("distribution function needs t >= 0, got {t}")));
        }
        let count = self.values().iter().filter(|v| v.abs() > t).count();
        Ok(count as f64 * self.cell_volume())
    }

    pub fn decreasing_rearrangement(&self) -> DecreasingRearrangement {
        DecreasingRearrangement::of(self)
    }

    /// `f*(omega_n |x|^n)` sampled on the same grid.
    pub fn symmetric_rearrangement(&self) -> Result<GridFunction> {
        let star = self.decreasing_rearrangement();
        let n = self.dim();
        let wn = unit_ball_volume(n as f64);
        GridFunction::from_fn(*self.spec(), |x| star.profile(wn * norm(x).powi(n as i32)))
    }

    /// `f*(omega_n ||x||_K~^n)` with `K~` the dilate of `K` of volume `omega_n`.
    pub fn convex_symmetrization(&self, k: &ConvexBody) -> Result<GridFunction> {
        let n = self.dim();
        if k.dim() != n {
            return Err(Error::Config("body and function dimensions differ".into()));
        }
        let wn = unit_ball_volume(n as f64);
        let kt = k.with_volume(wn)?;
        let star = self.decreasing_rearrangement();
        GridFunction::from_fn(*self.spec(), |x| {
            if x.iter().all(|v| *v == 0.0) {
                star.profile(0.0)
            } else {
                star.profile(wn * kt.gauge(x).powi(n as i32))
            }
        })
    }

    /// Volume of `{grad f = 0} ∩ {0 < f < max f}`, the set whose null measure
    /// is the rigidity hypothesis for rearrangement equality.
    pub fn critical_plateau_measure(&self, grad_tol: f64) -> f64 {
        let max = self.max_abs();
        let lo = 1e-9 * max;
        let hi = max * (1.0 - 1e-9);
        let count = (0..self.len())
            .filter(|&i| {
                let v = self.values()[i].abs();
                v > lo && v < hi && norm(self.grad_at(i)) <= grad_tol
            })
            .count();
        count as f64 * self.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Polytope;
    use crate::funcspace::GridSpec;
    use std::f64::consts::{E, PI};

    fn ellipse_char(spec: GridSpec, a: f64, b: f64) -> GridFunction {
        GridFunction::from_fn(spec, |x| {
            if (x[0] / a).powi(2) + (x[1] / b).powi(2) < 1.0 { 1.0 } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn distribution_of_gaussian_and_characteristic() {
        let spec = GridSpec::new(2, 4.0, 1.0 / 64.0);
        let g = GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let mu = g.distribution_function(1.0 / E).unwrap();
        assert!((mu / PI - 1.0).abs() < 0.02);
        assert_eq!(g.distribution_function(1.0).unwrap(), 0.0);
        assert!(g.distribution_function(-0.1).is_err());

        let c = ellipse_char(spec, 2.0, 0.5);
        let m = c.distribution_function(0.5).unwrap();
        // one cell layer around an ellipse of perimeter < 9
        assert!((m - PI).abs() < 9.0 / 64.0);
        let star = c.decreasing_rearrangement();
        assert_eq!(star.eval(m - 1e-9), 1.0);
        assert_eq!(star.eval(m + 1e-9), 0.0);
    }

    #[test]
    fn rearrangement_is_permutation_invariant() {
        let spec = GridSpec::new(2, 5.0, 0.125);
        let f = GridFunction::from_fn(spec, |x| (x[0] - 0.3) * (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * 10.0)
            .unwrap();
        let mut vals = f.values().to_vec();
        vals.reverse();
        // the reversed array is still zero on the boundary layer
        let g = GridFunction::from_values(spec, vals).unwrap();
        assert_eq!(f.decreasing_rearrangement().sorted(), g.decreasing_rearrangement().sorted());
        let star = f.decreasing_rearrangement();
        for p in [1.0, 2.0, 3.5] {
            let direct = f.lp_norm(p).unwrap().powf(p);
            assert!((star.lp_integral(p) - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn symmetric_rearrangement_of_ellipse_is_disk() {
        let spec = GridSpec::new(2, 2.5, 1.0 / 64.0);
        let f = ellipse_char(spec, 2.0, 0.5);
        let s = f.symmetric_rearrangement().unwrap();
        let mut bad = 0;
        for i in 0..s.len() {
            let r = norm(&s.point(i));
            let expect = if r < 1.0 { 1.0 } else { 0.0 };
            if (s.values()[i] - expect).abs() > 0.5 && (r - 1.0).abs() > 2.0 / 64.0 {
                bad += 1;
            }
        }
        assert_eq!(bad, 0);
        assert!((s.lp_norm(2.0).unwrap() / f.lp_norm(2.0).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn radial_function_is_fixed() {
        let spec = GridSpec::new(2, 5.0, 1.0 / 32.0);
        let f = GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let s = f.symmetric_rearrangement().unwrap();
        let err = f.values().iter().zip(s.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 5e-3, "{err}");
        for p in [1.5, 2.0, 3.0] {
            let a = f.sobolev_grad_norm(p).unwrap();
            let b = s.sobolev_grad_norm(p).unwrap();
            assert!((b / a - 1.0).abs() < 5e-3, "p={p}: {a} vs {b}");
        }
        let ent_f = f.scaled(1.0 / f.lp_norm(2.0).unwrap()).unwrap().entropy(2.0).unwrap();
        let ent_s = s.scaled(1.0 / s.lp_norm(2.0).unwrap()).unwrap().entropy(2.0).unwrap();
        assert!((ent_s / ent_f - 1.0).abs() < 0.01);
    }

    #[test]
    fn polya_szego_on_sheared_function() {
        let spec = GridSpec::new(2, 9.0, 1.0 / 16.0);
        let f = GridFunction::from_fn(spec, |x| {
            let y = [x[0] + 0.8 * x[1], 0.5 * x[1]];
            (-(y[0] * y[0] + y[1] * y[1])).exp()
        })
        .unwrap();
        let s = f.symmetric_rearrangement().unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert!(f.sobolev_grad_norm(p).unwrap() >= s.sobolev_grad_norm(p).unwrap());
        }
    }

    #[test]
    fn convex_symmetrization_matches_body() {
        let spec = GridSpec::new(2, 3.0, 1.0 / 64.0);
        let f = ellipse_char(spec, 1.6, 0.7);
        let ball = ConvexBody::ball(2, 3.0).unwrap();
        let fb = f.convex_symmetrization(&ball).unwrap();
        let fs = f.symmetric_rearrangement().unwrap();
        assert!(fb.values().iter().zip(fs.values()).all(|(a, b)| (a - b).abs() < 1e-12));

        // f = chi of a square, K the same square: f^K is chi of the
        // square with the same area
        let sq = ConvexBody::Polytope(Polytope::cube(2, 1.0).unwrap());
        let g = GridFunction::from_fn(spec, |x| if x[0].abs() < 1.0 && x[1].abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let gk = g.convex_symmetrization(&sq).unwrap();
        for i in 0..gk.len() {
            let x = gk.point(i);
            let d = x[0].abs().max(x[1].abs());
            if (d - 1.0).abs() > 2.0 / 64.0 {
                assert_eq!(gk.values()[i].round(), if d < 1.0 { 1.0 } else { 0.0 });
            }
        }
        let t = ConvexBody::polytope(vec![vec![1.0, 0.0], vec![-0.5, 1.0], vec![-0.5, -1.0]]).unwrap();
        let gt = g.convex_symmetrization(&t).unwrap();
        assert!((gt.lp_norm(1.5).unwrap() / g.lp_norm(1.5).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn rearrangement_idempotent_in_distribution() {
        let spec = GridSpec::new(2, 6.0, 1.0 / 32.0);
        let f = GridFunction::from_fn(spec, |x| {
            (-(x[0] - 0.5).powi(2) - 3.0 * x[1] * x[1]).exp() + 0.5 * (-(x[0] + 1.5).powi(2) - x[1] * x[1]).exp()
        })
        .unwrap();
        let s = f.symmetric_rearrangement().unwrap();
        for t in [0.05, 0.2, 0.5, 0.8] {
            let a = f.distribution_function(t).unwrap();
            let b = s.distribution_function(t).unwrap();
            assert!((a - b).abs() < 0.02 * a, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn plateau_measure() {
        let spec = GridSpec::new(2, 3.0, 1.0 / 32.0);
        let f = GridFunction::from_fn(spec, |x| {
            let r = norm(x);
            if r < 1.0 { 1.0 } else if r < 2.0 { 0.5 } else { 0.0 }
        })
        .unwrap();
        // the ring 1 < r < 2 at height 1/2 is flat away from its edges
        let m = f.critical_plateau_measure(1e-12);
        assert!(m > 0.6 * 3.0 * PI && m < 3.0 * PI, "{m}");
    }
}
