//! Piecewise-constant functions built from characteristic functions of convex
//! bodies, with exact perimeter integrals.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{GridFunction, GridSpec};
use crate::bodies::{projection_body, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::mat_vec;
use crate::spherequad::{unit_ball_volume, SphereSpec};

/// `a * chi_{x0 + C}`.
#[derive(Clone, Debug)]
pub struct BvCharacteristic {
    amplitude: f64,
    carrier: ConvexBody,
    offset: Vec<f64>,
    projection: ConvexBody,
    inradius: f64,
}

impl BvCharacteristic {
    pub fn new(amplitude: f64, carrier: ConvexBody, offset: Vec<f64>) -> Result<Self> {
        let n = carrier.dim();
        if !(amplitude.is_finite() && amplitude != 0.0) {
            return Err(Error::Config(format!("amplitude must be finite and nonzero, got {amplitude}")));
        }
        if offset.len() != n {
            return Err(Error::Config(format!("offset has {} entries, expected {n}", offset.len())));
        }
        if !(carrier.volume() > 0.0) {
            return Err(Error::InvalidBody("carrier has no volume".into()));
        }
        let projection = projection_body(&carrier)?;
        let grid = SphereSpec::default_for(n).build()?;
        carrier.validate_on(&grid)?;
        let inradius = carrier.radial_on(&grid).into_iter().fold(f64::INFINITY, f64::min);
        Ok(BvCharacteristic { amplitude, carrier, offset, projection, inradius })
    }

    /// Unit-amplitude characteristic function of `C`.
    pub fn of(carrier: ConvexBody) -> Result<Self> {
        let n = carrier.dim();
        Self::new(1.0, carrier, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn carrier(&self) -> &ConvexBody {
        &self.carrier
    }
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }
    pub fn volume(&self) -> f64 {
        self.carrier.volume()
    }

    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.offset).map(|(a, b)| a - b).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.carrier.contains(&self.local(x))
    }

    /// `int_{boundary} |<x, nu>| dH^{n-1} = 2 omega_{n-1} h(Pi_1 C, x)`, unscaled.
    pub fn perimeter_norm(&self, x: &[f64]) -> f64 {
        2.0 * unit_ball_volume(self.dim() as f64 - 1.0) * self.projection.support(x)
    }

    /// The function `x -> f(A^{-1} x)`.
    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        Self::new(self.amplitude, self.carrier.linear_image(a)?, mat_vec(a, &self.offset))
    }

    /// Same carrier and offset, new amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.carrier.clone(), self.offset.clone())
    }

    /// Fraction of the cell centered at `x` (width `w`) inside the set,
    /// from `s^n` sub-samples; cells far from the boundary skip sampling.
    pub fn coverage(&self, x: &[f64], w: f64, s: usize) -> f64 {
        let n = self.dim();
        let y = self.local(x);
        let g = self.carrier.gauge(&y);
        let reach = 0.5 * w * (n as f64).sqrt() / self.inradius;
        if g + reach < 1.0 {
            return 1.0;
        }
        if g - reach > 1.0 {
            return 0.0;
        }
        let total = s.pow(n as u32);
        let mut inside = 0usize;
        let mut z = vec![0.0; n];
        for k in 0..total {
            let mut r = k;
            for (d, zd) in z.iter_mut().enumerate() {
                *zd = y[d] + w * (((r % s) as f64 + 0.5) / s as f64 - 0.5);
                r /= s;
            }
            if self.carrier.gauge(&z) <= 1.0 {
                inside += 1;
            }
        }
        inside as f64 / total as f64
    }

    fn boundary_points(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let spec = if n == 2 {
            SphereSpec { resolution: 720, ..SphereSpec::default_for(2) }
        } else {
            SphereSpec::default_for(n)
        };
        let grid = spec.build()?;
        Ok(grid
            .directions()
            .map(|u| {
                let r = self.carrier.radial(u);
                u.iter().zip(&self.offset).map(|(ui, o)| o + r * ui).collect()
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Relation {
    Inside,
    Disjoint,
}

/// Finite sum of characteristic functions whose carriers are pairwise nested
/// or disjoint with separated boundaries, so `|Df|` is the sum of the
/// boundary measures.
#[derive(Clone, Debug)]
pub struct BvFunction {
    pieces: Vec<BvCharacteristic>,
    /// `(value, volume)` of the regions where `f` is constant and nonzero.
    regions: Vec<(f64, f64)>,
}

const SEPARATION: f64 = 1e-6;

impl BvFunction {
    pub fn new(pieces: Vec<BvCharacteristic>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Config("a BV function needs at least one piece".into()));
        };
        let n = first.dim();
        if pieces.iter().any(|p| p.dim() != n) {
            return Err(Error::Config("pieces have different dimensions".into()));
        }
        let m = pieces.len();
        // inside[i][j]: piece i lies inside piece j
        let mut inside = vec![vec![false; m]; m];
        let samples: Vec<Vec<Vec<f64>>> =
            pieces.iter().map(|p| p.boundary_points()).collect::<Result<_>>()?;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let rel = relation(&samples[i], &pieces[j])?;
                let back = relation(&samples[j], &pieces[i])?;
                match (rel, back) {
                    (Relation::Inside, Relation::Disjoint) => inside[i][j] = true,
                    (Relation::Disjoint, Relation::Inside) => {}
                    (Relation::Disjoint, Relation::Disjoint) => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "pieces {i} and {j} overlap without nesting; carriers must be nested or disjoint"
                        )))
                    }
                }
            }
        }
        let mut regions = Vec::with_capacity(m);
        for i in 0..m {
            let value: f64 = pieces[i].amplitude
                + (0..m).filter(|&j| inside[i][j]).map(|j| pieces[j].amplitude).sum::<f64>();
            // direct children: inside i and not inside another piece inside i
            let children: f64 = (0..m)
                .filter(|&c| inside[c][i] && !(0..m).any(|k| inside[c][k] && inside[k][i]))
                .map(|c| pieces[c].volume())
                .sum();
            let vol = pieces[i].volume() - children;
            if value != 0.0 && vol > 0.0 {
                regions.push((value, vol));
            }
        }
        if regions.is_empty() {
            return Err(Error::Degenerate("the function vanishes almost everywhere".into()));
        }
        Ok(BvFunction { pieces, regions })
    }

    pub fn single(piece: BvCharacteristic) -> Self {
        let regions = vec![(piece.amplitude, piece.volume())];
        BvFunction { pieces: vec![piece], regions }
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }
    pub fn pieces(&self) -> &[BvCharacteristic] {
        &self.pieces
    }
    pub fn regions(&self) -> &[(f64, f64)] {
        &self.regions
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.pieces.iter().filter(|p| p.contains(x)).map(|p| p.amplitude).sum()
    }

    /// `||x||_{1,f} = int |<x, sigma_f>| d|Df|`, exact.
    pub fn bv_norm(&self, x: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.amplitude.abs() * p.perimeter_norm(x)).sum()
    }

    /// `||f||_q` from the region table.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::Domain(format!("exponent must satisfy q >= 1, got {q}")));
        }
        Ok(self.regions.iter().map(|(v, m)| v.abs().powf(q) * m).sum::<f64>().powf(1.0 / q))
    }

    /// `int (|f|/||f||_1) ln(|f|/||f||_1)`.
    pub fn normalized_entropy(&self) -> f64 {
        let l1 = self.lq_norm(1.0).unwrap_or(f64::NAN);
        self.regions
            .iter()
            .map(|(v, m)| {
                let w = v.abs() / l1;
                w * w.ln() * m
            })
            .sum()
    }

    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        let pieces = self.pieces.iter().map(|p| p.linear_image(a)).collect::<Result<Vec<_>>>()?;
        let det = a.determinant().abs();
        let regions = self.regions.iter().map(|(v, m)| (*v, m * det)).collect();
        Ok(BvFunction { pieces, regions })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.with_amplitude(p.amplitude * c))
            .collect::<Result<Vec<_>>>()?;
        let regions = self.regions.iter().map(|(v, m)| (v * c, *m)).collect();
        Ok(BvFunction { pieces, regions })
    }

    /// Cell averages from `s^n` sub-samples per boundary cell.
    pub fn rasterize(&self, spec: GridSpec, s: usize) -> Result<GridFunction> {
        spec.validate()?;
        if spec.n != self.dim() {
            return Err(Error::Config("grid and function dimensions differ".into()));
        }
        let w = spec.width();
        let values = (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let x = spec.point(i);
                self.pieces.iter().map(|p| p.amplitude * p.coverage(&x, w, s)).sum()
            })
            .collect();
        GridFunction::from_values(spec, values)
    }
}

fn relation(points: &[Vec<f64>], other: &BvCharacteristic) -> Result<Relation> {
    let mut ins = 0usize;
    for x in points {
        let g = other.carrier.gauge(&other.local(x));
        if (g - 1.0).abs() <= SEPARATION {
            return Err(Error::Config(
                "carrier boundaries touch; pieces must have separated boundaries".into(),
            ));
        }
        if g < 1.0 {
            ins += 1;
        }
    }
    if ins == points.len() {
        Ok(Relation::Inside)
    } else if ins == 0 {
        Ok(Relation::Disjoint)
    } else {
        Err(Error::Config("carriers overlap without nesting; pieces must be nested or disjoint".into()))
    }
}
