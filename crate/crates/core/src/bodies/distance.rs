//! Upper bounds on the Banach-Mazur distance by local search over SL_n.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::{mat_t_vec, sl_exp, spd_inv_sqrt, spd_sqrt, to_unit_det};
use crate::optim::{multistart, NelderMeadOptions};
use crate::spherequad::{SphereGrid, SphereSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BanachMazurOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Directions on which the sandwich ratio is measured.
    pub grid: Option<SphereSpec>,
}

impl Default for BanachMazurOptions {
    fn default() -> Self {
        BanachMazurOptions { restarts: 8, seed: 0, grid: None }
    }
}

const SYMMETRY_TOL: f64 = 1e-6;

/// `int rho^{n+2} u u^T du`, proportional to the second moment matrix.
fn moment_matrix(k: &ConvexBody, grid: &SphereGrid) -> DMatrix<f64> {
    let n = grid.dim();
    let rho = k.radial_on(grid);
    let mut m = DMatrix::zeros(n, n);
    for (i, r) in rho.iter().enumerate() {
        let u = grid.direction(i);
        let w = grid.weight(i) * r.powi(n as i32 + 2);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] += w * u[a] * u[b];
            }
        }
    }
    m
}

/// Best value of `log max_u h(Phi L, u)/h(K, u) - log min_u (...)` found over
/// `Phi` in SL_n. This is an upper bound on `delta_BM(K, L)`.
pub fn banach_mazur_estimate(k: &ConvexBody, l: &ConvexBody, opts: &BanachMazurOptions) -> Result<f64> {
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::Config("bodies have different dimensions".into()));
    }
    let spec = opts.grid.clone().unwrap_or_else(|| SphereSpec::default_for(n));
    if spec.n != n {
        return Err(Error::Config("grid dimension does not match the bodies".into()));
    }
    let grid = spec.build()?;
    for (name, body) in [("K", k), ("L", l)] {
        body.validate_on(&grid)?;
        let a = body.asymmetry(&grid);
        if a > SYMMETRY_TOL {
            return Err(Error::Domain(format!(
                "Banach-Mazur distance needs origin-symmetric bodies; {name} has h(u) != h(-u) (relative gap {a:.3e})"
            )));
        }
    }
    let hk = k.support_on(&grid);
    let phi0 = to_unit_det(&(spd_sqrt(&moment_matrix(k, &grid)) * spd_inv_sqrt(&moment_matrix(l, &grid))));
    let objective = |x: &[f64]| -> f64 {
        let phi = &phi0 * sl_exp(n, x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for (i, hk_i) in hk.iter().enumerate() {
            let r = l.support(&mat_t_vec(&phi, grid.direction(i))) / hk_i;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        hi.ln() - lo.ln()
    };
    let nm = NelderMeadOptions { initial_step: 0.15, max_evals: 1500, ..Default::default() };
    let best = multistart(&objective, &vec![0.0; n * n - 1], opts.restarts, 0.5, opts.seed, &nm);
    Ok(best.value.max(0.0))
}
