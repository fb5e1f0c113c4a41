//! Functions sampled on uniform Cartesian grids: gradients, norms,
//! rearrangements and anisotropic energies.

mod bv;
pub mod catalog;
mod rearrange;

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::spherequad::pairwise_sum;

pub use bv::{BvCharacteristic, BvFunction};
pub use catalog::{CatalogName, CatalogParams, FunctionSpec};
pub use rearrange::DecreasingRearrangement;

/// Boundary values must stay below this fraction of `max |f|`.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Centered cube `[-extent, extent]^n` with cell width close to `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "two")]
    pub n: usize,
    pub extent: f64,
    pub h: f64,
}

fn two() -> usize {
    2
}

impl GridSpec {
    pub fn new(n: usize, extent: f64, h: f64) -> Self {
        GridSpec { n, extent, h }
    }

    /// Cells per axis.
    pub fn cells(&self) -> usize {
        (2.0 * self.extent / self.h).round() as usize
    }

    /// Actual cell width, `2 extent / cells`.
    pub fn width(&self) -> f64 {
        2.0 * self.extent / self.cells() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.n) {
            return Err(Error::Config(format!("grid dimension must be 2 or 3, got {}", self.n)));
        }
        if !(self.h > 0.0 && self.extent > 0.0 && self.h.is_finite() && self.extent.is_finite()) {
            return Err(Error::Config(format!(
                "grid needs extent > 0 and h > 0 (extent={}, h={})",
                self.extent, self.h
            )));
        }
        let cells = self.cells();
        if cells < 4 {
            return Err(Error::Config(format!("grid has only {cells} cells per axis")));
        }
        if (cells as f64).powi(self.n as i32) > 5e7 {
            return Err(Error::Config(format!("grid with {cells}^{} cells is too large", self.n)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of cell `idx` (last axis fastest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let m = self.cells();
        let w = self.width();
        let mut x = vec![0.0; self.n];
        let mut r = idx;
        for d in (0..self.n).rev() {
            x[d] = -self.extent + (((r % m) as f64) + 0.5) * w;
            r /= m;
        }
        x
    }

    fn on_boundary(&self, idx: usize) -> bool {
        let m = self.cells();
        let mut r = idx;
        for _ in 0..self.n {
            let k = r % m;
            if k == 0 || k == m - 1 {
                return true;
            }
            r /= m;
        }
        false
    }
}

/// Which gradient enters `h(K, +-grad f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradSign {
    Plus,
    Minus,
}

/// Real function sampled at cell centers, vanishing on the boundary layer.
#[derive(Clone, Debug)]
pub struct GridFunction {
    spec: GridSpec,
    values: Arc<Vec<f64>>,
    /// Interleaved gradient, `n` entries per cell.
    gradient: Arc<OnceLock<Vec<f64>>>,
    quadrature: Arc<OnceLock<GradientQuadrature>>,
}

/// Nodes for integrals of gradient expressions `int G(grad f) dx`.
///
/// By default one node per cell at its center. Cells around an integrable
/// gradient singularity can be replaced by refined nodes.
#[derive(Clone, Debug)]
pub struct GradientQuadrature {
    n: usize,
    /// Cell each node belongs to.
    pub cells: Vec<usize>,
    pub weights: Vec<f64>,
    /// Interleaved gradients, `n` entries per node.
    pub grads: Vec<f64>,
}

impl GradientQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn grad(&self, i: usize) -> &[f64] {
        &self.grads[i * self.n..(i + 1) * self.n]
    }

    /// `sum_i w_i G(grad_i)` over nodes with nonzero gradient, in fixed order.
    pub fn integrate<G>(&self, g: G) -> f64
    where
        G: Fn(&[f64]) -> f64 + Sync,
    {
        let terms: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let v = self.grad(i);
                if v.iter().all(|x| *x == 0.0) {
                    0.0
                } else {
                    self.weights[i] * g(v)
                }
            })
            .collect();
        pairwise_sum(&terms)
    }

    fn map_grads(&self, keep: impl Fn(usize) -> Option<f64>) -> GradientQuadrature {
        let mut q = self.clone();
        for i in 0..q.len() {
            let s = keep(q.cells[i]).unwrap_or(0.0);
            for d in 0..q.n {
                q.grads[i * q.n + d] *= s;
            }
        }
        q
    }
}

impl GridFunction {
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::build(spec, values, None)
    }

    /// Values and an explicit gradient field (`n` entries per cell).
    pub fn with_gradient(spec: GridSpec, values: Vec<f64>, gradient: Vec<f64>) -> Result<Self> {
        Self::build(spec, values, Some(gradient))
    }

    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        spec.validate()?;
        let values = (0..spec.len()).into_par_iter().map(|i| f(&spec.point(i))).collect();
        Self::build(spec, values, None)
    }

    /// `f` returns the value and the gradient at a point.
    pub fn from_fn_with_gradient<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
    {
        spec.validate()?;
        let pairs: Vec<(f64, Vec<f64>)> =
            (0..spec.len()).into_par_iter().map(|i| f(&spec.point(i))).collect();
        let mut values = Vec::with_capacity(pairs.len());
        let mut grad = Vec::with_capacity(pairs.len() * spec.n);
        for (v, g) in pairs {
            values.push(v);
            grad.extend(g);
        }
        Self::build(spec, values, Some(grad))
    }

    fn build(spec: GridSpec, values: Vec<f64>, gradient: Option<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::Config(format!(
                "expected {} grid values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite function value at {:?}",
                spec.point(i)
            )));
        }
        let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some(i) = (0..values.len())
            .find(|&i| spec.on_boundary(i) && values[i].abs() > BOUNDARY_TOL * max)
        {
            return Err(Error::Domain(format!(
                "function does not vanish on the boundary of the box: |f| = {:.3e} at {:?} (max {max:.3e}); enlarge the grid extent",
                values[i].abs(),
                spec.point(i)
            )));
        }
        let cell = OnceLock::new();
        if let Some(g) = gradient {
            if g.len() != values.len() * spec.n {
                return Err(Error::Config("gradient has the wrong length".into()));
            }
            if let Some(i) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite gradient at {:?}",
                    spec.point(i / spec.n)
                )));
            }
            let _ = cell.set(g);
        }
        Ok(GridFunction {
            spec,
            values: Arc::new(values),
            gradient: Arc::new(cell),
            quadrature: Arc::new(OnceLock::new()),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.n
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn cell_volume(&self) -> f64 {
        self.spec.width().powi(self.spec.n as i32)
    }
    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.spec.point(idx)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interleaved gradient: explicit if supplied, central differences
    /// (one-sided at the box edge) otherwise.
    pub fn gradient(&self) -> &[f64] {
        self.gradient.get_or_init(|| finite_difference_gradient(&self.spec, &self.values))
    }

    pub fn grad_at(&self, idx: usize) -> &[f64] {
        let n = self.spec.n;
        &self.gradient()[idx * n..(idx + 1) * n]
    }

    /// Quadrature for gradient integrals; one node per cell unless refined.
    pub fn quadrature(&self) -> &GradientQuadrature {
        self.quadrature.get_or_init(|| {
            let w = self.cell_volume();
            GradientQuadrature {
                n: self.spec.n,
                cells: (0..self.len()).collect(),
                weights: vec![w; self.len()],
                grads: self.gradient().to_vec(),
            }
        })
    }

    /// Replaces the nodes of the `3^n` block of cells around `point` with
    /// nested 3-adic refinements (`depth` levels towards `point`), using the
    /// exact gradient `grad`. For integrable singularities such as cusps.
    pub fn with_refinement<G>(&self, point: &[f64], depth: usize, grad: G) -> Result<GridFunction>
    where
        G: Fn(&[f64]) -> Vec<f64>,
    {
        let n = self.spec.n;
        let m = self.spec.cells() as isize;
        let w = self.spec.width();
        let idx: Vec<isize> = point
            .iter()
            .map(|x| ((x + self.spec.extent) / w).floor() as isize)
            .collect();
        if idx.iter().any(|k| *k < 1 || *k > m - 2) {
            return Err(Error::Domain("refinement point is too close to the box edge".into()));
        }
        let base = self.quadrature();
        let lo: Vec<f64> = idx.iter().map(|k| -self.spec.extent + (*k as f64 - 1.0) * w).collect();
        let mut q = GradientQuadrature { n, cells: vec![], weights: vec![], grads: vec![] };
        let in_block = |cell: usize| {
            let mut r = cell;
            let mut inside = true;
            for d in (0..n).rev() {
                let k = (r % m as usize) as isize;
                r /= m as usize;
                inside &= (k - idx[d]).abs() <= 1;
            }
            inside
        };
        for i in 0..base.len() {
            if !in_block(base.cells[i]) {
                q.cells.push(base.cells[i]);
                q.weights.push(base.weights[i]);
                q.grads.extend_from_slice(base.grad(i));
            }
        }
        let cell_of = |x: &[f64]| -> usize {
            x.iter().fold(0usize, |acc, v| {
                let k = (((v + self.spec.extent) / w).floor() as isize).clamp(0, m - 1);
                acc * m as usize + k as usize
            })
        };
        // box [lo, lo + size]^n split into 3^n boxes; recurse into the one
        // holding `point`, emit 4^n midpoint sub-nodes for the others
        let mut lo = lo;
        let mut size = 3.0 * w;
        for level in 0..=depth {
            let sub = size / 3.0;
            let mut next = None;
            for b in 0..3usize.pow(n as u32) {
                let mut r = b;
                let corner: Vec<f64> = (0..n)
                    .map(|d| {
                        let k = (r % 3) as f64;
                        r /= 3;
                        lo[d] + k * sub
                    })
                    .collect();
                let holds = (0..n).all(|d| point[d] >= corner[d] && point[d] < corner[d] + sub);
                if holds && level < depth {
                    next = Some(corner);
                    continue;
                }
                let s = 4usize;
                for k in 0..s.pow(n as u32) {
                    let mut r = k;
                    let x: Vec<f64> = (0..n)
                        .map(|d| {
                            let j = (r % s) as f64;
                            r /= s;
                            corner[d] + (j + 0.5) * sub / s as f64
                        })
                        .collect();
                    let g = grad(&x);
                    if g.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Numerical(format!("non-finite gradient at {x:?}")));
                    }
                    q.cells.push(cell_of(&x));
                    q.weights.push((sub / s as f64).powi(n as i32));
                    q.grads.extend(g);
                }
            }
            match next {
                Some(c) => {
                    lo = c;
                    size = sub;
                }
                None => break,
            }
        }
        let out = self.clone_shallow();
        let _ = out.quadrature.set(q);
        Ok(out)
    }

    fn clone_shallow(&self) -> GridFunction {
        GridFunction {
            spec: self.spec,
            values: self.values.clone(),
            gradient: self.gradient.clone(),
            quadrature: Arc::new(OnceLock::new()),
        }
    }

    /// Cell sum `h^n sum_i g(i)`, reduced in a fixed order.
    pub fn cell_sum<F>(&self, g: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let terms: Vec<f64> = (0..self.len()).into_par_iter().map(g).collect();
        pairwise_sum(&terms) * self.cell_volume()
    }

    /// `(int |f|^p)^{1/p}` for any `p > 0`; a quasi-norm below 1.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("exponent must satisfy p > 0, got {p}")));
        }
        Ok(self.cell_sum(|i| self.values[i].abs().powf(p)).powf(1.0 / p))
    }

    pub fn sup_norm(&self) -> f64 {
        self.max_abs()
    }

    /// `(int |grad f|^p)^{1/p}`.
    pub fn sobolev_grad_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        Ok(self.quadrature().integrate(|g| norm(g).powf(p)).powf(1.0 / p))
    }

    /// `int h(K, +-grad f)^p dx`.
    pub fn anisotropic_dirichlet(&self, k: &ConvexBody, p: f64, sign: GradSign) -> Result<f64> {
        check_p(p)?;
        if k.dim() != self.dim() {
            return Err(Error::Config("body and function dimensions differ".into()));
        }
        let s = match sign {
            GradSign::Plus => 1.0,
            GradSign::Minus => -1.0,
        };
        Ok(self.quadrature().integrate(|g| {
            let v: Vec<f64> = g.iter().map(|x| s * x).collect();
            k.support(&v).powf(p)
        }))
    }

    /// `Ent(|f|^p) = int |f|^p ln |f|^p` for `||f||_p = 1`.
    pub fn entropy(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("entropy needs p > 1, got {p}")));
        }
        let norm = self.lp_norm(p)?;
        if (norm - 1.0).abs() > 1e-3 {
            return Err(Error::Domain(format!(
                "entropy needs ||f||_p = 1 within 1e-3, got {norm}"
            )));
        }
        Ok(self.cell_sum(|i| {
            let v = self.values[i].abs().powf(p);
            if v > 0.0 {
                v * v.ln()
            } else {
                0.0
            }
        }))
    }

    /// `c f` (gradient scaled alongside).
    pub fn scaled(&self, c: f64) -> Result<GridFunction> {
        let values = self.values.iter().map(|v| c * v).collect();
        let grad = self.gradient().iter().map(|v| c * v).collect();
        let out = GridFunction::with_gradient(self.spec, values, grad)?;
        let _ = out.quadrature.set(self.quadrature().map_grads(|_| Some(c)));
        Ok(out)
    }

    /// `f_+` with the gradient of `f` on `{f >= 0}`; together with
    /// [`negative_part`](Self::negative_part) every cell is counted once.
    pub fn positive_part(&self) -> Result<GridFunction> {
        self.masked(|v| v >= 0.0, 1.0)
    }

    /// `f_- = max(-f, 0)` with gradient `-grad f` on `{f < 0}`.
    pub fn negative_part(&self) -> Result<GridFunction> {
        self.masked(|v| v < 0.0, -1.0)
    }

    fn masked(&self, keep: impl Fn(f64) -> bool + Copy, s: f64) -> Result<GridFunction> {
        let n = self.spec.n;
        let g = self.gradient();
        let mut values = vec![0.0; self.len()];
        let mut grad = vec![0.0; self.len() * n];
        for (i, v) in self.values.iter().enumerate() {
            if keep(*v) {
                values[i] = s * v;
                for d in 0..n {
                    grad[i * n + d] = s * g[i * n + d];
                }
            }
        }
        let out = GridFunction::with_gradient(self.spec, values, grad)?;
        let q = self.quadrature().map_grads(|c| keep(self.values[c]).then_some(s));
        let _ = out.quadrature.set(q);
        Ok(out)
    }

    /// Errors with [`Error::Degenerate`] when `||f||_p <= 1e-12`.
    pub fn require_nonzero(&self, p: f64) -> Result<()> {
        let norm = self.lp_norm(p.max(1.0))?;
        if norm <= 1e-12 {
            return Err(Error::Degenerate(format!(
                "function is zero almost everywhere (||f||_{p} = {norm:.3e})"
            )));
        }
        Ok(())
    }

    /// Center and second moment matrix of the weight `|f|^q`.
    pub fn moments(&self, q: f64) -> (Vec<f64>, nalgebra::DMatrix<f64>) {
        let n = self.spec.n;
        let w: Vec<f64> = self.values.iter().map(|v| v.abs().powf(q)).collect();
        let total = pairwise_sum(&w);
        let mut c = vec![0.0; n];
        for (i, wi) in w.iter().enumerate() {
            if *wi > 0.0 {
                let x = self.point(i);
                for d in 0..n {
                    c[d] += wi * x[d];
                }
            }
        }
        c.iter_mut().for_each(|v| *v /= total);
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (i, wi) in w.iter().enumerate() {
            if *wi > 0.0 {
                let x = self.point(i);
                for a in 0..n {
                    for b in 0..n {
                        m[(a, b)] += wi * (x[a] - c[a]) * (x[b] - c[b]);
                    }
                }
            }
        }
        (c, m / total)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent must satisfy p >= 1, got {p}")));
    }
    Ok(())
}

fn finite_difference_gradient(spec: &GridSpec, values: &[f64]) -> Vec<f64> {
    let n = spec.n;
    let m = spec.cells();
    let h = spec.width();
    let strides: Vec<usize> = (0..n).map(|d| m.pow((n - 1 - d) as u32)).collect();
    let per_cell: Vec<Vec<f64>> = (0..values.len())
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|d| {
                    let k = (i / strides[d]) % m;
                    let s = strides[d];
                    if k == 0 {
                        (values[i + s] - values[i]) / h
                    } else if k == m - 1 {
                        (values[i] - values[i - s]) / h
                    } else {
                        (values[i + s] - values[i - s]) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect();
    per_cell.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(h: f64) -> GridFunction {
        GridFunction::from_fn(GridSpec::new(2, 5.0, h), |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let s = GridSpec::new(2, 1.0, 0.25);
        assert_eq!(s.cells(), 8);
        assert_eq!(s.point(0), vec![-0.875, -0.875]);
        assert_eq!(s.point(1), vec![-0.875, -0.625]);
        assert!(GridSpec::new(2, 1.0, 1.0).validate().is_err());
        assert!(GridSpec::new(4, 1.0, 0.1).validate().is_err());
    }

    #[test]
    fn linear_gradient_on_plateau() {
        let spec = GridSpec::new(2, 3.0, 1.0 / 32.0);
        let c = [0.7, -0.3];
        let f = GridFunction::from_fn(spec, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let bump = if r2 < 1.0 { 1.0 } else if r2 < 4.0 { ((4.0 - r2) / 3.0).powi(3) } else { 0.0 };
            (c[0] * x[0] + c[1] * x[1]) * bump
        })
        .unwrap();
        for i in 0..f.len() {
            let x = f.point(i);
            if x[0] * x[0] + x[1] * x[1] < 0.8 {
                let g = f.grad_at(i);
                assert!((g[0] - c[0]).abs() < 1e-12 && (g[1] - c[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_gradient_and_norms() {
        let f = gaussian(1.0 / 64.0);
        for i in (0..f.len()).step_by(997) {
            let x = f.point(i);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let exact = 2.0 * r * (-r * r).exp();
            let g = f.grad_at(i);
            let fd = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if exact > 1e-3 {
                assert!((fd / exact - 1.0).abs() < 0.01, "{fd} vs {exact}");
            }
        }
        let g2 = f.sobolev_grad_norm(2.0).unwrap().powi(2);
        assert!((g2 / PI - 1.0).abs() < 0.02);
        let zero = GridFunction::from_values(GridSpec::new(2, 1.0, 0.25), vec![0.0; 64]).unwrap();
        assert!(zero.gradient().iter().all(|g| *g == 0.0));
        assert!(matches!(zero.require_nonzero(2.0), Err(Error::Degenerate(_))));
        assert!(f.lp_norm(0.0).is_err());
        assert!(f.lp_norm(0.5).unwrap() > f.lp_norm(1.0).unwrap());
    }

    #[test]
    fn dirichlet_scaling() {
        let p = 1.5;
        let spec = GridSpec::new(2, 8.0, 1.0 / 32.0);
        let t = 1.6;
        let f = GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let ft = GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1]) / (t * t)).exp()).unwrap();
        let ratio = ft.sobolev_grad_norm(p).unwrap() / f.sobolev_grad_norm(p).unwrap();
        assert!((ratio / t.powf((2.0 - p) / p) - 1.0).abs() < 0.02);
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let a = f.anisotropic_dirichlet(&ball, p, GradSign::Minus).unwrap();
        assert!((a - f.sobolev_grad_norm(p).unwrap().powf(p)).abs() < 1e-10 * a);
    }

    #[test]
    fn entropy_examples() {
        let spec = GridSpec::new(2, 2.0, 1.0 / 16.0);
        // |f|^p uniform on the square [-1,1]^2 (measure 4)
        let f = GridFunction::from_fn(spec, |x| {
            if x[0].abs() < 1.0 && x[1].abs() < 1.0 { 0.25f64.sqrt() } else { 0.0 }
        })
        .unwrap();
        assert!((f.entropy(2.0).unwrap() - (0.25f64).ln()).abs() < 1e-12);
        let g = GridFunction::from_fn(GridSpec::new(2, 6.0, 1.0 / 32.0), |x| {
            (2.0 / PI).sqrt() * (-(x[0] * x[0] + x[1] * x[1])).exp()
        })
        .unwrap();
        let expect = (2.0 / PI).ln() - 1.0;
        assert!((g.entropy(2.0).unwrap() / expect - 1.0).abs() < 0.02);
        assert!(gaussian(0.1).entropy(2.0).is_err());
    }

    #[test]
    fn refinement_captures_cusp() {
        // f = (1 - |x|^{1/2})_+, int |grad f|^3 = 2 pi (1/8) int_0^1 r^{-1/2} dr = pi/2
        let spec = GridSpec::new(2, 1.5, 1.0 / 32.0);
        let w = spec.width();
        let c = [0.5 * w, 0.5 * w];
        let grad = |x: &[f64]| {
            let y = [x[0] - c[0], x[1] - c[1]];
            let r = norm(&y);
            if r >= 1.0 || r == 0.0 {
                vec![0.0, 0.0]
            } else {
                let d = -0.5 * r.powf(-0.5) / r;
                vec![d * y[0], d * y[1]]
            }
        };
        let f = GridFunction::from_fn_with_gradient(spec, |x| {
            let r = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
            ((1.0 - r.sqrt()).max(0.0), grad(x))
        })
        .unwrap();
        let coarse = f.sobolev_grad_norm(3.0).unwrap().powi(3);
        let fine = f.with_refinement(&c, 12, grad).unwrap();
        let refined = fine.sobolev_grad_norm(3.0).unwrap().powi(3);
        let exact = PI / 2.0;
        assert!((refined / exact - 1.0).abs() < 0.01, "{refined} vs {exact}");
        assert!((coarse / exact - 1.0).abs() > 2.0 * (refined / exact - 1.0).abs());
        let total: f64 = fine.quadrature().weights.iter().sum();
        assert!((total - 9.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_check() {
        let r = GridFunction::from_fn(GridSpec::new(2, 1.0, 0.1), |_| 1.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn sign_split_masks() {
        let f = GridFunction::from_fn(GridSpec::new(2, 5.0, 0.1), |x| {
            x[0] * (-(x[0] * x[0] + x[1] * x[1])).exp()
        })
        .unwrap();
        let fp = f.positive_part().unwrap();
        let fm = f.negative_part().unwrap();
        for i in 0..f.len() {
            assert_eq!(fp.values()[i] - fm.values()[i], f.values()[i]);
            for d in 0..2 {
                assert_eq!(fp.grad_at(i)[d] - fm.grad_at(i)[d], f.grad_at(i)[d]);
            }
        }
    }
}
