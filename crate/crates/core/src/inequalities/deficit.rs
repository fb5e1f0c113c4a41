//! Deficit and distance functionals for the BV affine Sobolev inequality and
//! the centroid-body stability estimate.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::affine_energy::{BvContext, BvSource};
use crate::bodies::{banach_mazur_estimate, busemann_petty_deficit, BanachMazurOptions, CentroidMethod, ConvexBody};
use crate::error::{Error, Result};
use crate::funcspace::{BvFunction, GridFunction, GridSpec};
use crate::linalg::{spd_sqrt, sym_traceless_from_params};
use crate::optim::{multistart, NelderMeadOptions};
use crate::spherequad::{unit_ball_volume, SphereGrid};

fn is_zero(f: &BvSource) -> bool {
    match f {
        BvSource::Exact(b) => b.lq_norm(1.0).map(|v| v <= 1e-12).unwrap_or(true),
        BvSource::Grid(g) => g.max_abs() == 0.0,
    }
}

fn norms(f: &BvSource) -> Result<(f64, f64)> {
    let n = f.dim() as f64;
    let q = n / (n - 1.0);
    match f {
        BvSource::Exact(b) => Ok((b.lq_norm(1.0)?, b.lq_norm(q)?)),
        BvSource::Grid(g) => Ok((g.lp_norm(1.0)?, g.lp_norm(q)?)),
    }
}

/// `delta_a(f) = E_1(f) / (n omega_n^{1/n} ||f||_{n'}) - 1`, zero for `f = 0`.
pub fn affine_sobolev_deficit(f: &BvSource, grid: Arc<SphereGrid>) -> Result<f64> {
    if is_zero(f) {
        return Ok(0.0);
    }
    let n = f.dim() as f64;
    let e1 = BvContext::new(f.clone(), grid)?.energy()?.e1;
    let (_, nq) = norms(f)?;
    Ok(e1 / (n * unit_ball_volume(n).powf(1.0 / n) * nq) - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSobDeficits {
    pub delta_als: f64,
    pub delta_a: f64,
}

/// The log-Sobolev deficit
/// `E_1 / (n omega_n^{1/n} ||f||_{n'}) - (||f||_1/||f||_{n'}) exp((1/n) int w ln w)`,
/// `w = |f| / ||f||_1`, together with `delta_a`. Jensen gives `delta_aLS >= delta_a`.
pub fn logsob_deficit_bv(f: &BvSource, grid: Arc<SphereGrid>) -> Result<LogSobDeficits> {
    if is_zero(f) {
        return Ok(LogSobDeficits { delta_als: 0.0, delta_a: 0.0 });
    }
    let n = f.dim() as f64;
    let delta_a = affine_sobolev_deficit(f, grid)?;
    let (l1, nq) = norms(f)?;
    let ent = match f {
        BvSource::Exact(b) => b.normalized_entropy(),
        BvSource::Grid(g) => {
            let vals = g.values();
            g.cell_sum(|i| {
                let w = vals[i].abs() / l1;
                if w > 0.0 {
                    w * w.ln()
                } else {
                    0.0
                }
            })
        }
    };
    let delta_als = delta_a + 1.0 - (l1 / nq) * (ent / n).exp();
    Ok(LogSobDeficits { delta_als, delta_a })
}

/// Fraction of a cell of width `w` covered by the ellipse with inverse map
/// `linv` and center `x0`, from the signed distance of the cell center.
fn coverage(x: &[f64], x0: &[f64], linv: &DMatrix<f64>, w: f64) -> f64 {
    let n = x.len();
    let d = nalgebra::DVector::from_iterator(n, x.iter().zip(x0).map(|(a, b)| a - b));
    let z = linv * &d;
    let g = z.norm();
    if g == 0.0 {
        return 1.0;
    }
    let grad = linv.transpose() * &z / g;
    let gn = grad.norm();
    let sd = (g - 1.0) / gn;
    let l1: f64 = grad.iter().map(|c| c.abs()).sum::<f64>() / gn;
    (0.5 - sd / (w * l1)).clamp(0.0, 1.0)
}

/// Parameters `(x0, log psi, log r)` of the ellipse `x0 + r psi B`, `psi` symmetric in SL_n.
fn ellipse_from_params(n: usize, x: &[f64]) -> (Vec<f64>, DMatrix<f64>, f64) {
    let m = n * (n + 1) / 2 - 1;
    let x0 = x[..n].to_vec();
    let s = sym_traceless_from_params(n, &x[n..n + m]);
    let r = x[n + m].exp();
    let linv = (-s).exp() / r;
    (x0, linv, r)
}

fn sym_log_params(n: usize, psi: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(psi.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(1e-300).ln()));
    let s = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if !(i == n - 1 && j == n - 1) {
                out.push(s[(i, j)]);
            }
        }
    }
    out
}

/// Upper bound on `d_a(f, M)`: the smallest `||f - g||_{n'}^{n'} / ||f||_{n'}^{n'}`
/// found over `g = +-c chi_E`, `E` an ellipsoid, with `c` fixed by
/// `||g||_{n'} = ||f||_{n'}`. The search starts at the moment ellipsoid of
/// `|f|^{n'}`; `f = 0` gives zero.
pub fn distance_to_extremals(f: &GridFunction, restarts: usize, seed: u64) -> Result<f64> {
    if f.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let n = f.dim();
    let nf = n as f64;
    let q = nf / (nf - 1.0);
    let spec = *f.spec();
    let (w, cells, extent) = (spec.width(), spec.cells(), spec.extent);
    let cv = f.cell_volume();
    let vals = f.values();
    let pow: Vec<f64> = vals.iter().map(|v| v.abs().powf(q)).collect();
    let total: f64 = crate::spherequad::pairwise_sum(&pow) * cv;
    let wn = unit_ball_volume(nf);

    let objective = |x: &[f64]| -> f64 {
        let (x0, linv, r) = ellipse_from_params(n, x);
        let c = (total / (wn * r.powf(nf))).powf(1.0 / q);
        let l = match linv.clone().try_inverse() {
            Some(l) => l,
            None => return f64::INFINITY,
        };
        // index box covering the ellipse plus one cell
        let mut lo = vec![0usize; n];
        let mut hi = vec![0usize; n];
        for d in 0..n {
            let half = l.row(d).norm() + w;
            let a = ((x0[d] - half + extent) / w).floor().max(0.0) as usize;
            let b = (((x0[d] + half + extent) / w).ceil() as isize).clamp(0, cells as isize) as usize;
            if a >= b {
                return f64::INFINITY;
            }
            lo[d] = a;
            hi[d] = b;
        }
        let (mut plus, mut minus, mut inside) = (0.0, 0.0, 0.0);
        let mut idx = lo.clone();
        loop {
            let mut flat = 0;
            for d in 0..n {
                flat = flat * cells + idx[d];
            }
            let x = spec.point(flat);
            let cov = coverage(&x, &x0, &linv, w);
            if cov > 0.0 {
                let v = vals[flat];
                plus += (v - c * cov).abs().powf(q);
                minus += (v + c * cov).abs().powf(q);
                inside += pow[flat];
            }
            let mut d = n;
            loop {
                if d == 0 {
                    let best = plus.min(minus);
                    return (total / cv - inside + best) * cv / total;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < hi[d] {
                    break;
                }
                idx[d] = lo[d];
            }
        }
    };

    let (center, cov) = f.moments(q);
    // uniform measure on x0 + L B has second moments L L^T / (n + 2)
    let l0 = spd_sqrt(&(cov * (nf + 2.0)));
    let det = l0.determinant();
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::Numerical("moment ellipsoid is degenerate".into()));
    }
    let r0 = det.powf(1.0 / nf);
    let mut x0 = center;
    x0.extend(sym_log_params(n, &(l0 / r0)));
    x0.push(r0.ln());
    let opts = NelderMeadOptions { initial_step: 0.05, max_evals: 3000, f_tol: 1e-10, x_tol: 1e-8 };
    let best = multistart(&objective, &x0, restarts, 0.1, seed, &opts);
    Ok(best.value.clamp(0.0, 2f64.powf(q)))
}

/// [`distance_to_extremals`] on the rasterization of an exact BV function.
pub fn distance_to_extremals_bv(
    f: &BvFunction,
    raster: GridSpec,
    supersample: usize,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    distance_to_extremals(&f.rasterize(raster, supersample)?, restarts, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub delta_a: f64,
    pub d_a_upper: f64,
    /// `ln d_a / ln delta_a` when both lie in `(0, 1)`.
    pub exponent_witness: Option<f64>,
}

/// `delta_a` and the `d_a` upper bound side by side.
pub fn stability_check(
    f: &BvFunction,
    raster: GridSpec,
    grid: Arc<SphereGrid>,
    restarts: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let delta_a = affine_sobolev_deficit(&BvSource::Exact(f.clone()), grid)?;
    let d_a_upper = distance_to_extremals_bv(f, raster, 8, restarts, seed)?;
    let in_unit = |v: f64| v > 0.0 && v < 1.0;
    let exponent_witness =
        (in_unit(delta_a) && in_unit(d_a_upper)).then(|| d_a_upper.ln() / delta_a.ln());
    Ok(StabilityReport { delta_a, d_a_upper, exponent_witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidStability {
    /// `V(Gamma_1 K) / V(K) - 1` through the default centroid path.
    pub bp_deficit: f64,
    /// The same deficit through quasi Monte Carlo.
    pub bp_deficit_mc: f64,
    pub bm_distance_upper: f64,
}

/// `V(Gamma_1 K)/V(K) - 1` paired with the Banach-Mazur distance to the ball.
pub fn centroid_stability_check(
    k: &ConvexBody,
    grid: Arc<SphereGrid>,
    mc_samples: usize,
    seed: u64,
) -> Result<CentroidStability> {
    let star = k.as_star();
    let bp_deficit = busemann_petty_deficit(&star, 0.5, 1.0, grid.clone(), CentroidMethod::Auto)?;
    let bp_deficit_mc = busemann_petty_deficit(
        &star,
        0.5,
        1.0,
        grid.clone(),
        CentroidMethod::QuasiMonteCarlo { samples: mc_samples, seed },
    )?;
    let ball = ConvexBody::ball(k.dim(), 1.0)?;
    let opts = BanachMazurOptions { restarts: 8, seed, grid: Some(grid.spec()) };
    let bm_distance_upper = banach_mazur_estimate(k, &ball, &opts)?;
    Ok(CentroidStability { bp_deficit, bp_deficit_mc, bm_distance_upper })
}

/// The regular `m`-gon inscribed in the unit circle with its right half
/// (`x > 0`) stretched by `t` along the first axis. `t = 1` is nearly a disk
/// and the deficits grow with `t`, unlike a full affine stretch.
pub fn stretch_family_body(t: f64, m: usize) -> Result<ConvexBody> {
    if !(t >= 1.0 && t.is_finite()) || m < 8 {
        return Err(Error::Domain(format!("stretch needs t >= 1 and m >= 8 (t={t}, m={m})")));
    }
    let pts = (0..m)
        .map(|k| {
            let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            let x = th.cos();
            vec![if x > 0.0 { t * x } else { x }, th.sin()]
        })
        .collect();
    ConvexBody::polytope(pts)
}
