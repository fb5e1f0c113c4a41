//! Sharp constants, verification of the affine functional inequalities and
//! the deficit functionals measuring distance from their equality cases.

mod deficit;

use std::f64::consts::{E, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::affine_energy::{BvContext, BvSource, EnergyContext};
use crate::bodies::{busemann_petty_deficit, petty_product, CentroidMethod, ConvexBody};
use crate::error::{Error, Result};
use crate::funcspace::{GridFunction, GridSpec};
use crate::spherequad::{unit_ball_volume, SphereGrid, SphereSpec};

pub use deficit::{
    affine_sobolev_deficit, centroid_stability_check, distance_to_extremals, distance_to_extremals_bv,
    logsob_deficit_bv, stability_check, stretch_family_body, CentroidStability, LogSobDeficits,
    StabilityReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpKind {
    Sobolev,
    Morrey,
    GnI,
    #[serde(rename = "gn_ii")]
    GnII,
    Logsob,
}

/// `G(n, alpha, p)` with its interpolation exponent and auxiliaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnConstant {
    pub g: f64,
    pub theta: f64,
    pub y: f64,
    pub q: f64,
}

fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    (num.iter().map(|x| ln_gamma(*x)).sum::<f64>() - den.iter().map(|x| ln_gamma(*x)).sum::<f64>()).exp()
}

fn check_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must satisfy n >= 2, got {n}")));
    }
    Ok(n as f64)
}

fn sobolev_range(n: f64, p: f64) -> Result<()> {
    if !(p > 1.0 && p < n) {
        return Err(Error::Domain(format!("p must satisfy p in (1, n) = (1, {n}), got p={p}")));
    }
    Ok(())
}

/// `S(n, p)`, the sharp constant in `S E_{lambda,p}(f) >= ||f||_{p*}`.
pub fn sobolev_constant(n: usize, p: f64) -> Result<f64> {
    let nf = check_n(n)?;
    sobolev_range(nf, p)?;
    Ok(PI.powf(-0.5)
        * nf.powf(-1.0 / p)
        * ((p - 1.0) / (nf - p)).powf(1.0 - 1.0 / p)
        * gamma_ratio(&[1.0 + nf / 2.0, nf], &[nf / p, 1.0 + nf - nf / p]).powf(1.0 / nf))
}

/// `b_{n,p}`, the Morrey-Sobolev constant.
pub fn morrey_constant(n: usize, p: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(p > nf && p.is_finite()) {
        return Err(Error::Domain(format!("Morrey needs p > n = {n}, got p={p}")));
    }
    Ok(nf.powf(-1.0 / p) * unit_ball_volume(nf).powf(-1.0 / nf) * ((p - 1.0) / (p - nf)).powf((p - 1.0) / p))
}

/// Gagliardo-Nirenberg constant for `alpha > 1` (branch i) or `alpha < 1` (branch ii).
///
/// Branch ii contains `Gamma(1 + z)` with `z` not otherwise defined; `z = y` is used.
pub fn gn_constant(n: usize, p: f64, alpha: f64) -> Result<GnConstant> {
    let nf = check_n(n)?;
    sobolev_range(nf, p)?;
    let amax = nf / (nf - p);
    if !(alpha > 0.0 && alpha < amax && alpha != 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0, n/(n-p)) = (0, {amax}) and differ from 1, got {alpha}"
        )));
    }
    let q = p / (p - 1.0);
    let s = alpha * p + 1.0 - alpha;
    if alpha > 1.0 {
        let theta = nf * (alpha - 1.0) / (alpha * (nf * p - s * (nf - p)));
        let y = s / (alpha - 1.0);
        let g = (y * (alpha - 1.0).powf(p) / (PI.powf(p / 2.0) * q.powf(p - 1.0) * nf)).powf(theta / p)
            * ((q * y - nf) / (q * y)).powf(1.0 / (alpha * p))
            * gamma_ratio(&[y, 1.0 + nf / 2.0], &[y - nf / q, 1.0 + nf / q]).powf(theta / nf);
        Ok(GnConstant { g, theta, y, q })
    } else {
        let theta = nf * (1.0 - alpha) / (s * (nf - alpha * (nf - p)));
        let y = s / (1.0 - alpha);
        let z = y;
        let g = (y * (1.0 - alpha).powf(p) / (PI.powf(p / 2.0) * q.powf(p - 1.0) * nf)).powf(theta / p)
            * (q * y / (q * y + nf)).powf((1.0 - theta) / (alpha * p))
            * gamma_ratio(&[y + 1.0 + nf / q, 1.0 + nf / 2.0], &[1.0 + z, 1.0 + nf / q]).powf(theta / nf);
        Ok(GnConstant { g, theta, y, q })
    }
}

/// `L_p` in `Ent(|f|^p) <= (n/p) ln(L_p E^p)`.
pub fn logsob_constant(n: usize, p: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("log-Sobolev needs p > 1, got p={p}")));
    }
    Ok(PI.powf(-p / 2.0)
        * (p / nf)
        * ((p - 1.0) / E).powf(p - 1.0)
        * gamma_ratio(&[1.0 + nf / 2.0], &[1.0 + nf * (p - 1.0) / p]).powf(p / nf))
}

/// Value of the sharp constant; `alpha` is required for the GN kinds.
pub fn sharp_constant(kind: SharpKind, n: usize, p: f64, alpha: Option<f64>) -> Result<f64> {
    match kind {
        SharpKind::Sobolev => sobolev_constant(n, p),
        SharpKind::Morrey => morrey_constant(n, p),
        SharpKind::Logsob => logsob_constant(n, p),
        SharpKind::GnI | SharpKind::GnII => {
            let a = alpha.ok_or_else(|| Error::Config("GN constants need alpha".into()))?;
            if (kind == SharpKind::GnI) != (a > 1.0) {
                return Err(Error::Domain(format!(
                    "{} needs alpha {} 1, got {a}",
                    if kind == SharpKind::GnI { "gn_i" } else { "gn_ii" },
                    if kind == SharpKind::GnI { ">" } else { "<" }
                )));
            }
            Ok(gn_constant(n, p, a)?.g)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    AffineSobolevP,
    Morrey,
    GnI,
    #[serde(rename = "gn_ii")]
    GnII,
    Logsob,
    AffineSobolevBv,
    PolyaSzego,
    BusemannPetty,
    PettyProjection,
}

impl InequalityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityKind::AffineSobolevP => "affine_sobolev_p",
            InequalityKind::Morrey => "morrey",
            InequalityKind::GnI => "gn_i",
            InequalityKind::GnII => "gn_ii",
            InequalityKind::Logsob => "logsob",
            InequalityKind::AffineSobolevBv => "affine_sobolev_bv",
            InequalityKind::PolyaSzego => "polya_szego",
            InequalityKind::BusemannPetty => "busemann_petty",
            InequalityKind::PettyProjection => "petty_projection",
        }
    }

    pub fn is_body_kind(self) -> bool {
        matches!(self, InequalityKind::BusemannPetty | InequalityKind::PettyProjection)
    }
}

/// Allowed negative deficit by reliability class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceLadder {
    /// Exact formulas and smooth quadrature.
    pub deterministic: f64,
    /// Gridded functions with cusps, supports or rearrangements.
    pub mixed: f64,
    /// Truncated heavy tails and Monte Carlo.
    pub heavy: f64,
}

impl Default for ToleranceLadder {
    fn default() -> Self {
        ToleranceLadder { deterministic: 0.01, mixed: 0.03, heavy: 0.05 }
    }
}

impl ToleranceLadder {
    pub fn scaled(&self, s: f64) -> Self {
        ToleranceLadder { deterministic: self.deterministic * s, mixed: self.mixed * s, heavy: self.heavy * s }
    }

    pub fn for_kind(&self, kind: InequalityKind) -> f64 {
        match kind {
            InequalityKind::AffineSobolevP | InequalityKind::GnI | InequalityKind::GnII => self.heavy,
            InequalityKind::Morrey | InequalityKind::Logsob | InequalityKind::PolyaSzego => self.mixed,
            InequalityKind::AffineSobolevBv
            | InequalityKind::BusemannPetty
            | InequalityKind::PettyProjection => self.deterministic,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    #[serde(default = "half")]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Overrides the ladder value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn half() -> f64 {
    0.5
}

/// Outcome of one inequality check. `lhs >= rhs` is the inequality; the
/// deficit is `lhs / rhs - 1` (for the log-Sobolev kind, the `p`-th root of
/// the exponentiated ratio).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub inequality: InequalityKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub sphere: SphereSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Content hash of the scenario that produced the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_hash: Option<String>,
    /// Only recorded on request, so that reports stay byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: InequalityKind,
        n: usize,
        params: &VerifyParams,
        lhs: f64,
        rhs: f64,
        deficit: f64,
        tolerance: f64,
        sphere: SphereSpec,
    ) -> Self {
        VerificationReport {
            id: kind.as_str().to_string(),
            inequality: kind,
            n,
            p: params.p,
            lambda: Some(params.lambda),
            alpha: params.alpha,
            lhs,
            rhs,
            deficit,
            tolerance,
            pass: deficit >= -tolerance,
            grid: None,
            sphere,
            seed: 0,
            notes: Vec::new(),
            scenario_hash: None,
            wall_time_s: None,
        }
    }
}

fn tolerance_for(kind: InequalityKind, params: &VerifyParams, ladder: &ToleranceLadder) -> Result<f64> {
    match params.tolerance {
        Some(t) if !(t >= 0.0 && t.is_finite()) => {
            Err(Error::Config(format!("tolerance must be finite and non-negative, got {t}")))
        }
        Some(t) => Ok(t),
        None => Ok(ladder.for_kind(kind)),
    }
}

fn need_p(kind: InequalityKind, params: &VerifyParams) -> Result<f64> {
    params.p.ok_or_else(|| Error::Config(format!("{} needs the exponent p", kind.as_str())))
}

fn need_grid(kind: InequalityKind, f: &BvSource) -> Result<&GridFunction> {
    match f {
        BvSource::Grid(g) => Ok(g),
        BvSource::Exact(_) => Err(Error::Config(format!(
            "{} needs a gridded function, not an exact BV function",
            kind.as_str()
        ))),
    }
}

/// Support volume: cells where `f` is nonzero.
fn support_volume(f: &GridFunction) -> f64 {
    f.values().iter().filter(|v| **v != 0.0).count() as f64 * f.cell_volume()
}

/// Checks one functional inequality on `f`. Exact BV input is accepted only
/// by [`InequalityKind::AffineSobolevBv`].
pub fn verify(
    kind: InequalityKind,
    f: &BvSource,
    params: &VerifyParams,
    grid: Arc<SphereGrid>,
    ladder: &ToleranceLadder,
) -> Result<VerificationReport> {
    if kind.is_body_kind() {
        return Err(Error::Config(format!("{} applies to bodies; use verify_body", kind.as_str())));
    }
    crate::affine_energy::check_lambda(params.lambda)?;
    let n = f.dim();
    let nf = n as f64;
    let tol = tolerance_for(kind, params, ladder)?;
    let sphere = grid.spec();
    let mut notes = Vec::new();
    let (lhs, rhs, deficit) = match kind {
        InequalityKind::AffineSobolevBv => {
            let e1 = BvContext::new(f.clone(), grid.clone())?.energy()?.e1;
            let norm = match f {
                BvSource::Exact(b) => b.lq_norm(nf / (nf - 1.0))?,
                BvSource::Grid(g) => g.lp_norm(nf / (nf - 1.0))?,
            };
            let rhs = nf * unit_ball_volume(nf).powf(1.0 / nf) * norm;
            (e1, rhs, e1 / rhs - 1.0)
        }
        _ => {
            let g = need_grid(kind, f)?;
            let p = need_p(kind, params)?;
            let ctx = || EnergyContext::new(g, params.lambda, p, grid.clone());
            match kind {
                InequalityKind::AffineSobolevP => {
                    let s = sobolev_constant(n, p)?;
                    let e = ctx()?.affine_energy()?;
                    let rhs = g.lp_norm(nf * p / (nf - p))?;
                    (s * e, rhs, s * e / rhs - 1.0)
                }
                InequalityKind::Morrey => {
                    let b = morrey_constant(n, p)?;
                    let e = ctx()?.affine_energy()?;
                    let lhs = b * support_volume(g).powf((p - nf) / (nf * p)) * e;
                    let rhs = g.sup_norm();
                    (lhs, rhs, lhs / rhs - 1.0)
                }
                InequalityKind::GnI | InequalityKind::GnII => {
                    let alpha = params
                        .alpha
                        .ok_or_else(|| Error::Config(format!("{} needs alpha", kind.as_str())))?;
                    let sk = if kind == InequalityKind::GnI { SharpKind::GnI } else { SharpKind::GnII };
                    sharp_constant(sk, n, p, Some(alpha))?;
                    let c = gn_constant(n, p, alpha)?;
                    let e = ctx()?.affine_energy()?;
                    let (big, small) = if kind == InequalityKind::GnI {
                        (alpha * (p - 1.0) + 1.0, alpha * p)
                    } else {
                        notes.push("gn_ii constant evaluated with z = y in Gamma(1 + z)".to_string());
                        (alpha * p, alpha * (p - 1.0) + 1.0)
                    };
                    let lhs = c.g * e.powf(c.theta) * g.lp_norm(big)?.powf(1.0 - c.theta);
                    let rhs = g.lp_norm(small)?;
                    (lhs, rhs, lhs / rhs - 1.0)
                }
                InequalityKind::Logsob => {
                    let l = logsob_constant(n, p)?;
                    let norm = g.lp_norm(p)?;
                    if norm <= 1e-12 {
                        return Err(Error::Degenerate("function is zero almost everywhere".into()));
                    }
                    let unit = g.scaled(1.0 / norm)?;
                    let e = ctx()?.affine_energy()? / norm;
                    let ent = unit.entropy(p)?;
                    let lhs = l * e.powf(p);
                    let rhs = (p * ent / nf).exp();
                    notes.push("f normalized to unit L^p norm".to_string());
                    (lhs, rhs, (lhs / rhs).powf(1.0 / p) - 1.0)
                }
                InequalityKind::PolyaSzego => {
                    let gap = ctx()?.polya_szego_gap()?;
                    if gap.plateau_measure > 0.0 {
                        notes.push(format!("f* critical plateau measure {:.3e}", gap.plateau_measure));
                    }
                    (gap.e_f, gap.e_fstar, gap.e_f / gap.e_fstar - 1.0)
                }
                _ => unreachable!("handled above"),
            }
        }
    };
    let mut report = VerificationReport::new(kind, n, params, lhs, rhs, deficit, tol, sphere);
    if kind == InequalityKind::AffineSobolevBv {
        report.lambda = None;
        report.p = Some(1.0);
    }
    if let BvSource::Grid(g) = f {
        report.grid = Some(*g.spec());
    }
    report.notes = notes;
    Ok(report)
}

/// Busemann-Petty `V(Gamma_{lambda,p} K) >= V(K)` or Petty projection
/// `omega_n^n >= V(Pi* K) V(K)^{n-1}` for a body.
pub fn verify_body(
    kind: InequalityKind,
    k: &ConvexBody,
    params: &VerifyParams,
    grid: Arc<SphereGrid>,
    ladder: &ToleranceLadder,
) -> Result<VerificationReport> {
    let n = k.dim();
    let tol = tolerance_for(kind, params, ladder)?;
    let sphere = grid.spec();
    let (lhs, rhs, deficit, p) = match kind {
        InequalityKind::BusemannPetty => {
            let p = need_p(kind, params)?;
            let d = busemann_petty_deficit(&k.as_star(), params.lambda, p, grid, CentroidMethod::Auto)?;
            (1.0 + d, 1.0, d, Some(p))
        }
        InequalityKind::PettyProjection => {
            let r = petty_product(k, &grid)?;
            (1.0, r, 1.0 / r - 1.0, None)
        }
        other => {
            return Err(Error::Config(format!("{} applies to functions; use verify", other.as_str())))
        }
    };
    let mut report = VerificationReport::new(kind, n, params, lhs, rhs, deficit, tol, sphere);
    report.p = p;
    if kind == InequalityKind::PettyProjection {
        report.lambda = None;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{BvCharacteristic, BvFunction, CatalogName, CatalogParams, FunctionSpec};
    use crate::spherequad::Scheme;

    fn circle(m: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(2, m, Scheme::UniformAngle, 0).unwrap())
    }

    #[test]
    fn constants_match_oracles() {
        assert!((sobolev_constant(3, 2.0).unwrap() - 0.427260542862527).abs() < 1e-12);
        assert!((sobolev_constant(2, 1.2).unwrap() - 0.279911046816674).abs() < 1e-12);
        assert!((morrey_constant(2, 3.0).unwrap() - 0.710834332443240).abs() < 1e-12);
        assert!((morrey_constant(2, 4.0).unwrap() - 0.643037068578744).abs() < 1e-12);
        assert!((logsob_constant(2, 2.0).unwrap() - 1.0 / (PI * E)).abs() < 1e-12);
        let gi = gn_constant(2, 1.5, 1.5).unwrap();
        assert!((gi.g - 0.690852811538432).abs() < 1e-12);
        assert!((gi.theta - 0.313725490196078).abs() < 1e-12);
        let gii = gn_constant(2, 1.5, 0.5).unwrap();
        assert!((gii.g - 0.526312644613060).abs() < 1e-12);
        assert!((gii.theta - 0.457142857142857).abs() < 1e-12);
    }

    #[test]
    fn logsob_constant_matches_euclidean_form() {
        // p = 2: L_2 = 2 / (n pi e)
        for n in 2..6 {
            let l = logsob_constant(n, 2.0).unwrap();
            assert!((l - 2.0 / (n as f64 * PI * E)).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors_name_the_constraint() {
        let e = sobolev_constant(2, 0.5).unwrap_err().to_string();
        assert!(e.contains("(1, n)"), "{e}");
        assert!(matches!(morrey_constant(3, 2.0), Err(Error::Domain(_))));
        assert!(matches!(gn_constant(2, 1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gn_constant(2, 1.5, 5.0), Err(Error::Domain(_))));
        assert!(matches!(sharp_constant(SharpKind::GnI, 2, 1.5, Some(0.5)), Err(Error::Domain(_))));
        assert!(matches!(logsob_constant(2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_in_unit_interval() {
        for p in [1.2, 1.5, 1.8] {
            for alpha in [0.3, 0.7, 1.3, 1.9] {
                if let Ok(c) = gn_constant(2, p, alpha) {
                    assert!(c.theta > 0.0 && c.theta < 1.0, "p={p} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn bv_equality_for_ellipse() {
        let k = ConvexBody::ellipsoid(nalgebra::DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.4, 0.8])).unwrap();
        let f = BvSource::Exact(BvFunction::single(BvCharacteristic::of(k).unwrap()));
        let r = verify(InequalityKind::AffineSobolevBv, &f, &VerifyParams::default(), circle(512), &ToleranceLadder::default())
            .unwrap();
        assert!(r.pass && r.deficit.abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn logsob_extremal_equality() {
        let spec = FunctionSpec::new(
            CatalogName::LogsobExtremal,
            CatalogParams { p: Some(2.0), ..Default::default() },
            GridSpec::new(2, 6.0, 1.0 / 32.0),
        );
        let f = BvSource::Grid(spec.build().unwrap());
        let params = VerifyParams { lambda: 0.3, p: Some(2.0), ..Default::default() };
        let r = verify(InequalityKind::Logsob, &f, &params, circle(256), &ToleranceLadder::default()).unwrap();
        assert!(r.deficit.abs() < 1e-2, "{r:?}");
    }

    #[test]
    fn body_kinds() {
        let params = VerifyParams { lambda: 0.5, p: Some(2.0), ..Default::default() };
        let ladder = ToleranceLadder::default();
        let sq_poly = ConvexBody::polytope(vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]])
            .unwrap();
        let r = verify_body(InequalityKind::BusemannPetty, &sq_poly, &params, circle(512), &ladder).unwrap();
        assert!((r.deficit - (PI / 3.0 - 1.0)).abs() < 1e-3, "{r:?}");
        let r = verify_body(InequalityKind::PettyProjection, &sq_poly, &params, circle(512), &ladder).unwrap();
        assert!((r.rhs - 8.0 / (PI * PI)).abs() < 1e-2, "{r:?}");
        assert!(verify(InequalityKind::BusemannPetty, &BvSource::Exact(BvFunction::single(BvCharacteristic::of(sq_poly.clone()).unwrap())), &params, circle(64), &ladder).is_err());
    }
}
