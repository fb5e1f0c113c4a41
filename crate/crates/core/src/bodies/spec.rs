//! JSON description of bodies: `{"kind": ..., "params": {...}}`.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ConvexBody, Polytope};
use crate::error::{Error, Result};
use crate::linalg::matrix_from_rows;
use crate::spherequad::SphereSpec;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `A B_2^n` with `A` given row-major.
    Ellipsoid { a: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
    /// `[-r, r]^n`.
    Cube {
        n: usize,
        #[serde(default = "one")]
        r: f64,
    },
    RegularPolygon {
        k: usize,
        #[serde(default = "one")]
        r: f64,
        #[serde(default)]
        phase: f64,
    },
    LqBall {
        n: usize,
        #[serde(serialize_with = "ser_q", deserialize_with = "de_q")]
        q: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Sampled { grid: SphereSpec, values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

fn ser_q<S: Serializer>(q: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if q.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*q)
    }
}

fn de_q<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Q {
        Num(f64),
        Text(String),
    }
    match Q::deserialize(d)? {
        Q::Num(v) => Ok(v),
        Q::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
        Q::Text(t) => Err(serde::de::Error::custom(format!("invalid exponent q = {t:?}"))),
    }
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { n, radius } => ConvexBody::ball(*n, *radius),
            BodySpec::Ellipsoid { a } => {
                let n = (a.len() as f64).sqrt().round() as usize;
                ConvexBody::ellipsoid(matrix_from_rows(n, a)?)
            }
            BodySpec::Polytope { vertices } => ConvexBody::polytope(vertices.clone()),
            BodySpec::Cube { n, r } => Polytope::cube(*n, *r).map(ConvexBody::Polytope),
            BodySpec::RegularPolygon { k, r, phase } => {
                if *k < 3 {
                    return Err(Error::InvalidBody(format!("a polygon needs k >= 3, got {k}")));
                }
                Polytope::regular_polygon(*k, *r, *phase).map(ConvexBody::Polytope)
            }
            BodySpec::LqBall { n, q, scale } => ConvexBody::lq_ball(*n, *q, *scale),
            BodySpec::Sampled { grid, values } => {
                ConvexBody::sampled(Arc::new(grid.build()?), values.clone())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("body spec at line {} column {}: {e}", e.line(), e.column()))
        })
    }
}
