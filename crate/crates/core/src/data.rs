//! Labeled points, multiset bags and the extended-real values used for
//! quantiles and interval endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// A feature vector with a scalar label.
#[derive(Debug, Clone)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl LabeledPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn key(&self) -> (Vec<u64>, u64) {
        (
            self.x.iter().map(|v| canonical_bits(*v)).collect(),
            canonical_bits(self.y),
        )
    }
}

fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

impl PartialEq for LabeledPoint {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for LabeledPoint {}

impl Hash for LabeledPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

/// Unordered multiset of labeled points.
///
/// Equality and hashing ignore insertion order.
#[derive(Debug, Clone, Default)]
pub struct Bag {
    points: Vec<LabeledPoint>,
}

impl Bag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a bag, checking that all points share one feature dimension and
    /// carry finite labels.
    pub fn from_points(points: Vec<LabeledPoint>) -> Result<Self> {
        if let Some(first) = points.first() {
            let dim = first.dim();
            for p in &points {
                if p.dim() != dim {
                    return Err(Error::shape(format!("dimension {dim}"), p.dim()));
                }
                if !p.y.is_finite() {
                    return Err(Error::param(format!("non-finite label {}", p.y)));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn push(&mut self, point: LabeledPoint) -> Result<()> {
        if let Some(first) = self.points.first() {
            if first.dim() != point.dim() {
                return Err(Error::shape(format!("dimension {}", first.dim()), point.dim()));
            }
        }
        if !point.y.is_finite() {
            return Err(Error::param(format!("non-finite label {}", point.y)));
        }
        self.points.push(point);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Feature dimension, or `None` for an empty bag.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(LabeledPoint::dim)
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledPoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<LabeledPoint> {
        self.points
    }

    fn sorted_keys(&self) -> Vec<(Vec<u64>, u64)> {
        let mut keys: Vec<_> = self.points.iter().map(LabeledPoint::key).collect();
        keys.sort_unstable();
        keys
    }
}

impl PartialEq for Bag {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sorted_keys() == other.sorted_keys()
    }
}

impl Eq for Bag {}

impl Hash for Bag {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sorted_keys().hash(state);
    }
}

impl FromIterator<LabeledPoint> for Bag {
    fn from_iter<I: IntoIterator<Item = LabeledPoint>>(iter: I) -> Self {
        Self {
            points: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Bag {
    type Item = &'a LabeledPoint;
    type IntoIter = std::slice::Iter<'a, LabeledPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// A real number extended with explicit infinite sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion to `f64` using IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Finite(v) => v,
            Extended::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Extended::PosInf
        } else if v == f64::NEG_INFINITY {
            Extended::NegInf
        } else {
            Extended::Finite(v)
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => f.write_str("-inf"),
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInf => f.write_str("inf"),
        }
    }
}

/// Closed prediction interval whose endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    lower: Extended,
    upper: Extended,
}

impl PredictionInterval {
    pub fn new(lower: Extended, upper: Extended) -> Result<Self> {
        if matches!(lower, Extended::PosInf) || matches!(upper, Extended::NegInf) {
            return Err(Error::param("interval endpoints point the wrong way"));
        }
        if lower > upper {
            return Err(Error::param(format!("lower {lower} exceeds upper {upper}")));
        }
        Ok(Self { lower, upper })
    }

    /// The whole real line.
    pub fn unbounded() -> Self {
        Self {
            lower: Extended::NegInf,
            upper: Extended::PosInf,
        }
    }

    pub fn lower(&self) -> Extended {
        self.lower
    }

    pub fn upper(&self) -> Extended {
        self.upper
    }

    /// False iff either endpoint is infinite.
    pub fn is_informative(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn width(&self) -> Extended {
        match (self.lower, self.upper) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(b - a),
            _ => Extended::PosInf,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        Extended::Finite(y) >= self.lower && Extended::Finite(y) <= self.upper
    }
}

impl fmt::Display for PredictionInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}
