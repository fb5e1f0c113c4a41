//! Named test functions and extremal families, with analytic gradients.
//!
//! JSON form: `{"kind": "catalog", "name": ..., "params": {...}, "grid": {...}}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{BvCharacteristic, BvFunction, GridFunction, GridSpec};
use crate::bodies::BodySpec;
use crate::error::{Error, Result};
use crate::linalg::{mat_t_vec, mat_vec, matrix_from_rows, norm, random_sl};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    #[default]
    Catalog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogName {
    /// `amplitude * exp(-|A(x - x0)|^2 / sigma^2)`.
    Gaussian,
    /// `(a + |A(x - x0)|^{p/(p-1)})^{1 - n/p}`, truncated.
    SobolevExtremal,
    /// `a (1 - |A(x - x0)|^{(p-n)/(p-1)})_+`.
    MorreyExtremal,
    /// `(a + |y|^{p/(p-1)})^{-1/(alpha-1)}` for `alpha > 1`,
    /// `(a - |y|^{p/(p-1)})_+^{1/(1-alpha)}` for `alpha < 1`.
    GnExtremal,
    /// Unit `L^p` norm profile `c exp(-|sigma A(x - x0)|^{p/(p-1)})`.
    LogsobExtremal,
    /// `amplitude * chi_K(A(x - x0))`.
    Char,
    /// `amplitude * (1 - |A(x - x0)|^2 / r^2)_+^3`.
    Bump,
    /// Two bumps of different size and shape.
    TwoBump,
    /// Two to four seeded random bumps.
    RandomBumps,
}

impl CatalogName {
    pub fn as_str(self) -> &'static str {
        match self {
            CatalogName::Gaussian => "gaussian",
            CatalogName::SobolevExtremal => "sobolev_extremal",
            CatalogName::MorreyExtremal => "morrey_extremal",
            CatalogName::GnExtremal => "gn_extremal",
            CatalogName::LogsobExtremal => "logsob_extremal",
            CatalogName::Char => "char",
            CatalogName::Bump => "bump",
            CatalogName::TwoBump => "two_bump",
            CatalogName::RandomBumps => "random_bumps",
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_tau() -> f64 {
    1e-4
}
fn default_supersample() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    /// Shape constant of the extremal families.
    #[serde(default = "one")]
    pub a: f64,
    /// Overall multiplier (sign and height).
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Linear map applied to `x - x0`, row-major; identity if absent.
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    /// Power tails are cut to `(f - tau_rel max f)_+`.
    #[serde(default = "default_tau")]
    pub tau_rel: f64,
    /// Sub-samples per axis when rasterizing characteristic functions.
    #[serde(default = "default_supersample")]
    pub supersample: usize,
}

impl Default for CatalogParams {
    fn default() -> Self {
        CatalogParams {
            a: 1.0,
            amplitude: 1.0,
            matrix: None,
            x0: None,
            sigma: 1.0,
            r: 1.0,
            p: None,
            alpha: None,
            seed: 0,
            body: None,
            tau_rel: default_tau(),
            supersample: default_supersample(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default)]
    pub kind: SpecKind,
    pub name: CatalogName,
    #[serde(default)]
    pub params: CatalogParams,
    pub grid: GridSpec,
}

/// Nested refinement levels around the Morrey cusp.
const MORREY_REFINEMENT: usize = 12;

/// Radial profile `phi(rho)` and its derivative.
type Profile = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

impl FunctionSpec {
    pub fn new(name: CatalogName, params: CatalogParams, grid: GridSpec) -> Self {
        FunctionSpec { kind: SpecKind::Catalog, name, params, grid }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("function spec at line {} column {}: {e}", e.line(), e.column()))
        })
    }

    fn n(&self) -> usize {
        self.grid.n
    }

    fn matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        match &self.params.matrix {
            None => Ok(DMatrix::identity(n, n)),
            Some(a) => {
                let m = matrix_from_rows(n, a)?;
                if !(m.determinant().abs() > 1e-12) {
                    return Err(Error::Domain("matrix A must be invertible".into()));
                }
                Ok(m)
            }
        }
    }

    fn x0(&self) -> Result<Vec<f64>> {
        let n = self.n();
        match &self.params.x0 {
            None => Ok(vec![0.0; n]),
            Some(v) if v.len() == n => Ok(v.clone()),
            Some(v) => Err(Error::Config(format!("x0 has {} entries, expected {n}", v.len()))),
        }
    }

    fn need_p(&self) -> Result<f64> {
        match self.params.p {
            Some(p) if p > 1.0 && p.is_finite() => Ok(p),
            Some(p) => Err(Error::Domain(format!("{} needs p > 1, got {p}", self.name.as_str()))),
            None => Err(Error::Config(format!("{} needs the parameter p", self.name.as_str()))),
        }
    }

    /// Exact BV representation (characteristic functions only).
    pub fn build_bv(&self) -> Result<BvFunction> {
        if self.name != CatalogName::Char {
            return Err(Error::Unsupported(format!(
                "{} has no exact BV representation",
                self.name.as_str()
            )));
        }
        let body = self
            .params
            .body
            .as_ref()
            .ok_or_else(|| Error::Config("char needs a body".into()))?
            .build()?;
        if body.dim() != self.n() {
            return Err(Error::Config("body and grid dimensions differ".into()));
        }
        // f(x) = amplitude chi_K(A(x - x0)) is supported on x0 + A^{-1} K
        let a_inv = crate::linalg::invert(&self.matrix()?)?;
        let piece = BvCharacteristic::new(self.params.amplitude, body.linear_image(&a_inv)?, self.x0()?)?;
        Ok(BvFunction::single(piece))
    }

    pub fn build(&self) -> Result<GridFunction> {
        self.grid.validate()?;
        let n = self.n();
        let pr = &self.params;
        if !pr.amplitude.is_finite() || pr.amplitude == 0.0 {
            return Err(Error::Config("amplitude must be finite and nonzero".into()));
        }
        match self.name {
            CatalogName::Char => {
                let bv = self.build_bv()?;
                bv.rasterize(self.grid, pr.supersample.max(1))
            }
            CatalogName::TwoBump => {
                let bumps = vec![
                    BumpSpec { amp: 1.0, r: 1.0, center: lift(n, &[-1.3, 0.0]), map: DMatrix::identity(n, n) },
                    BumpSpec {
                        amp: 0.55,
                        r: 0.6,
                        center: lift(n, &[1.1, 0.6]),
                        map: embed(n, &DMatrix::from_row_slice(2, 2, &[1.6, 0.4, 0.0, 0.625])),
                    },
                ];
                self.compose_bumps(&bumps)
            }
            CatalogName::RandomBumps => {
                let mut rng = ChaCha8Rng::seed_from_u64(pr.seed);
                let count = rng.random_range(2..=4);
                let bumps: Vec<BumpSpec> = (0..count)
                    .map(|_| BumpSpec {
                        amp: rng.random_range(0.3..1.0),
                        r: rng.random_range(0.5..1.2),
                        center: (0..n).map(|_| rng.random_range(-1.5..1.5)).collect(),
                        map: random_sl(n, 0.4, &mut rng),
                    })
                    .collect();
                self.compose_bumps(&bumps)
            }
            _ => {
                let (profile, scale) = self.profile()?;
                let a = self.matrix()?;
                let x0 = self.x0()?;
                let amp = pr.amplitude * scale;
                let eval = |x: &[f64]| {
                    let d: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
                    let y = mat_vec(&a, &d);
                    let rho = norm(&y);
                    let (v, dv) = profile(rho);
                    let grad = if rho > 0.0 && dv != 0.0 {
                        mat_t_vec(&a, &y).into_iter().map(|g| amp * dv * g / rho).collect()
                    } else {
                        vec![0.0; n]
                    };
                    (amp * v, grad)
                };
                let f = GridFunction::from_fn_with_gradient(self.grid, eval)?;
                if self.name == CatalogName::MorreyExtremal {
                    // |grad f| ~ rho^{(1-n)/(p-1)} is singular at x0
                    f.with_refinement(&x0, MORREY_REFINEMENT, |x| eval(x).1)
                } else {
                    Ok(f)
                }
            }
        }
    }

    /// Radial profile and the constant multiplying it.
    fn profile(&self) -> Result<(Profile, f64)> {
        let n = self.n() as f64;
        let pr = &self.params;
        let a = pr.a;
        let tau = pr.tau_rel;
        if !(0.0..0.5).contains(&tau) {
            return Err(Error::Config(format!("tau_rel must lie in [0, 0.5), got {tau}")));
        }
        let positive_a = || {
            if a > 0.0 && a.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{} needs a > 0, got {a}", self.name.as_str())))
            }
        };
        Ok(match self.name {
            CatalogName::Gaussian => {
                let s = pr.sigma;
                if !(s > 0.0) {
                    return Err(Error::Domain(format!("sigma must be positive, got {s}")));
                }
                let f: Profile = Box::new(move |r| {
                    let e = (-(r * r) / (s * s)).exp();
                    (e, -2.0 * r / (s * s) * e)
                });
                (f, 1.0)
            }
            CatalogName::Bump => {
                let rr = pr.r;
                if !(rr > 0.0) {
                    return Err(Error::Domain(format!("bump radius must be positive, got {rr}")));
                }
                (Box::new(move |r| bump_profile(r / rr, 1.0 / rr)), 1.0)
            }
            CatalogName::SobolevExtremal => {
                positive_a()?;
                let p = self.need_p()?;
                if p >= n {
                    return Err(Error::Domain(format!(
                        "the Sobolev extremal needs 1 < p < n, got p={p}, n={n}"
                    )));
                }
                let q = p / (p - 1.0);
                let e = 1.0 - n / p;
                (truncated(move |r| {
                    let b = a + r.powf(q);
                    (b.powf(e), e * b.powf(e - 1.0) * q * r.powf(q - 1.0))
                }, tau), 1.0)
            }
            CatalogName::MorreyExtremal => {
                positive_a()?;
                let p = self.need_p()?;
                if p <= n {
                    return Err(Error::Domain(format!(
                        "the Morrey extremal needs p > n, got p={p}, n={n}"
                    )));
                }
                let beta = (p - n) / (p - 1.0);
                let f: Profile = Box::new(move |r| {
                    if r >= 1.0 {
                        (0.0, 0.0)
                    } else if r == 0.0 {
                        (1.0, 0.0)
                    } else {
                        (1.0 - r.powf(beta), -beta * r.powf(beta - 1.0))
                    }
                });
                (f, a)
            }
            CatalogName::GnExtremal => {
                positive_a()?;
                let p = self.need_p()?;
                let alpha = pr
                    .alpha
                    .ok_or_else(|| Error::Config("gn_extremal needs the parameter alpha".into()))?;
                if !(alpha > 0.0) || alpha == 1.0 {
                    return Err(Error::Domain(format!(
                        "the Gagliardo-Nirenberg extremal needs alpha > 0, alpha != 1, got {alpha}"
                    )));
                }
                let q = p / (p - 1.0);
                if alpha > 1.0 {
                    let e = -1.0 / (alpha - 1.0);
                    (truncated(move |r| {
                        let b = a + r.powf(q);
                        (b.powf(e), e * b.powf(e - 1.0) * q * r.powf(q - 1.0))
                    }, tau), 1.0)
                } else {
                    let e = 1.0 / (1.0 - alpha);
                    let f: Profile = Box::new(move |r| {
                        let b = a - r.powf(q);
                        if b <= 0.0 {
                            (0.0, 0.0)
                        } else {
                            (b.powf(e), -e * b.powf(e - 1.0) * q * r.powf(q - 1.0))
                        }
                    });
                    (f, 1.0)
                }
            }
            CatalogName::LogsobExtremal => {
                let p = self.need_p()?;
                let s = pr.sigma;
                if !(s > 0.0) {
                    return Err(Error::Domain(format!("sigma must be positive, got {s}")));
                }
                let q = p / (p - 1.0);
                let det = self.matrix()?.determinant().abs();
                let c = logsob_prefactor(n, p, s) * det.powf(1.0 / p);
                let f: Profile = Box::new(move |r| {
                    let t = s * r;
                    let e = (-t.powf(q)).exp();
                    (e, -q * s * t.powf(q - 1.0) * e)
                });
                (f, c)
            }
            CatalogName::Char | CatalogName::TwoBump | CatalogName::RandomBumps => unreachable!(),
        })
    }

    fn compose_bumps(&self, bumps: &[BumpSpec]) -> Result<GridFunction> {
        let n = self.n();
        let a = self.matrix()?;
        let x0 = self.x0()?;
        let amp = self.params.amplitude;
        GridFunction::from_fn_with_gradient(self.grid, |x| {
            let d: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
            let y = mat_vec(&a, &d);
            let mut v = 0.0;
            let mut gy = vec![0.0; n];
            for b in bumps.iter() {
                let z: Vec<f64> = y.iter().zip(&b.center).map(|(a, c)| a - c).collect();
                let w = mat_vec(&b.map, &z);
                let rho = norm(&w);
                let (f, df) = bump_profile(rho / b.r, 1.0 / b.r);
                v += b.amp * f;
                if rho > 0.0 && df != 0.0 {
                    for (g, m) in gy.iter_mut().zip(mat_t_vec(&b.map, &w)) {
                        *g += b.amp * df * m / rho;
                    }
                }
            }
            let grad = mat_t_vec(&a, &gy).into_iter().map(|g| amp * g).collect();
            (amp * v, grad)
        })
    }
}

struct BumpSpec {
    amp: f64,
    r: f64,
    center: Vec<f64>,
    map: DMatrix<f64>,
}

fn lift(n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| v.get(i).copied().unwrap_or(0.0)).collect()
}

fn embed(n: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::identity(n, n);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// `(1 - s^2)_+^3` at `s = r / R`, derivative in `r` (`ds/dr = inv`).
fn bump_profile(s: f64, inv: f64) -> (f64, f64) {
    if s >= 1.0 {
        (0.0, 0.0)
    } else {
        let b = 1.0 - s * s;
        (b * b * b, -6.0 * s * b * b * inv)
    }
}

/// `(phi - tau phi(0))_+` for a decreasing profile.
fn truncated<F>(phi: F, tau: f64) -> Profile
where
    F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
{
    let cut = tau * phi(0.0).0;
    Box::new(move |r| {
        let (v, dv) = phi(r);
        if v > cut {
            (v - cut, dv)
        } else {
            (0.0, 0.0)
        }
    })
}

/// `pi^{-n/2p} (sigma p^{(p-1)/p})^{n/p} (Gamma(1+n/2)/Gamma(1+n(p-1)/p))^{1/p}`.
pub fn logsob_prefactor(n: f64, p: f64, sigma: f64) -> f64 {
    let log = -n / (2.0 * p) * std::f64::consts::PI.ln()
        + n / p * (sigma * p.powf((p - 1.0) / p)).ln()
        + (ln_gamma(1.0 + n / 2.0) - ln_gamma(1.0 + n * (p - 1.0) / p)) / p;
    log.exp()
}
