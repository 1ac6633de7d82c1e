//! Vectors on the nonnegative cone and the natural coupling between
//! predictions and loss vectors.
//!
//! A [`PosVector`] is a prediction direction: finite, nonnegative entries.
//! A [`LossVector`] holds one partial loss per outcome and may contain `+inf`
//! (the log loss at the boundary of the simplex, for instance). Both
//! serialize as JSON arrays of numbers, with `+inf` written as the string
//! `"inf"`.

use std::fmt;
use std::ops::Index;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeomError, Result};

/// Nonnegative finite vector of dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PosVector {
    entries: Vec<f64>,
    strictly_positive: bool,
}

impl PosVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(GeomError::DimensionTooSmall(entries.len()));
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(GeomError::InvalidEntry { index, value });
            }
        }
        let strictly_positive = entries.iter().all(|&v| v > 0.0);
        Ok(Self {
            entries,
            strictly_positive,
        })
    }

    /// Uniform point `(1/n, ..., 1/n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// The all-ones vector `1_n`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn l1(&self) -> f64 {
        l1(&self.entries)
    }

    /// True when the entries sum to one within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.l1() - 1.0).abs() <= tol
    }

    pub fn require_strictly_positive(&self) -> Result<()> {
        match self.entries.iter().position(|&v| v <= 0.0) {
            None => Ok(()),
            Some(index) => Err(GeomError::NotStrictlyPositive {
                index,
                value: self.entries[index],
            }),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.entries.iter().map(|v| v * alpha).collect())
    }
}

impl Index<usize> for PosVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Loss vector in `[0, +inf]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    entries: Vec<f64>,
}

impl LossVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(GeomError::DimensionTooSmall(entries.len()));
        }
        for (index, &value) in entries.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(GeomError::InvalidEntry { index, value });
            }
        }
        Ok(Self { entries })
    }

    /// Wraps raw entries produced by a loss map without validation. NaN
    /// entries are kept so that verification can report them.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Componentwise order `self ⪯ other`, with slack `tol` on each entry.
    pub fn dominated_by(&self, other: &LossVector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| *a <= *b + tol)
    }

    /// Largest entry-wise distance; infinities in matching positions count as equal.
    pub fn sup_distance(&self, other: &LossVector) -> f64 {
        sup_distance(&self.entries, &other.entries)
    }
}

impl Index<usize> for LossVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// `⟨x, y⟩` with the convention `0 · (+inf) = 0`.
pub fn inner(x: &PosVector, y: &LossVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(dot(x.as_slice(), y.as_slice()))
}

/// Returns `p / ‖p‖₁`.
pub fn normalize_direction(p: &PosVector) -> Result<PosVector> {
    let s = p.l1();
    if s <= 0.0 {
        return Err(GeomError::ZeroVector);
    }
    PosVector::new(p.as_slice().iter().map(|v| v / s).collect())
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| if a == 0.0 || b == 0.0 { 0.0 } else { a * b })
        .sum()
}

pub(crate) fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs()
            }
        })
        .fold(0.0, |m: f64, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

/// Normalizes a raw slice; `None` for the zero vector or a vector with
/// negative entries.
pub(crate) fn direction(p: &[f64]) -> Option<Vec<f64>> {
    if p.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return None;
    }
    let s: f64 = p.iter().sum();
    if s <= 0.0 {
        return None;
    }
    Some(p.iter().map(|v| v / s).collect())
}

struct ExtendedSeq<'a>(&'a [f64]);

impl Serialize for ExtendedSeq<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for &v in self.0 {
            if v == f64::INFINITY {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&v)?;
            }
        }
        seq.end()
    }
}

fn deserialize_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    struct ExtVisitor;

    impl<'de> Visitor<'de> for ExtVisitor {
        type Value = Vec<f64>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an array of numbers or \"inf\"")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Vec<f64>, A::Error> {
            #[derive(Deserialize)]
            #[serde(untagged)]
            enum Entry {
                Num(f64),
                Text(String),
            }
            let mut out = Vec::new();
            while let Some(e) = seq.next_element::<Entry>()? {
                match e {
                    Entry::Num(v) => out.push(v),
                    Entry::Text(s) if s.eq_ignore_ascii_case("inf") => out.push(f64::INFINITY),
                    Entry::Text(s) => {
                        return Err(de::Error::custom(format!("unexpected entry {s:?}")));
                    }
                }
            }
            Ok(out)
        }
    }

    d.deserialize_seq(ExtVisitor)
}

impl Serialize for PosVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExtendedSeq(&self.entries).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PosVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = deserialize_extended(d)?;
        PosVector::new(v).map_err(de::Error::custom)
    }
}

impl Serialize for LossVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExtendedSeq(&self.entries).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LossVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = deserialize_extended(d)?;
        LossVector::new(v).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> PosVector {
        PosVector::new(v.to_vec()).unwrap()
    }

    fn lv(v: &[f64]) -> LossVector {
        LossVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn inner_zero_times_infinity() {
        assert_eq!(inner(&pv(&[1.0, 0.0]), &lv(&[5.0, f64::INFINITY])).unwrap(), 5.0);
    }

    #[test]
    fn inner_uniform_and_arithmetic() {
        let ln2 = std::f64::consts::LN_2;
        let v = inner(&pv(&[0.5, 0.5]), &lv(&[ln2, ln2])).unwrap();
        assert!((v - ln2).abs() < 1e-15);
        let v = inner(&pv(&[0.7, 0.3]), &lv(&[0.0, 1.0])).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let err = inner(&pv(&[0.5, 0.5]), &lv(&[1.0, 1.0, 1.0])).unwrap_err();
        assert_eq!(err, GeomError::DimensionMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_direction(&pv(&[2.0, 2.0])).unwrap(), pv(&[0.5, 0.5]));
        assert_eq!(normalize_direction(&pv(&[3.0, 1.0])).unwrap(), pv(&[0.75, 0.25]));
        assert_eq!(normalize_direction(&pv(&[0.0, 5.0])).unwrap(), pv(&[0.0, 1.0]));
        assert_eq!(
            normalize_direction(&pv(&[0.0, 0.0])).unwrap_err(),
            GeomError::ZeroVector
        );
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(PosVector::new(vec![1.0]).is_err());
        assert!(PosVector::new(vec![1.0, -0.1]).is_err());
        assert!(PosVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(LossVector::new(vec![1.0, f64::INFINITY]).is_ok());
        assert!(LossVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn predicates() {
        assert!(pv(&[0.2, 0.8]).is_strictly_positive());
        assert!(!pv(&[0.0, 1.0]).is_strictly_positive());
        assert!(pv(&[0.2, 0.8]).is_normalized(1e-12));
        assert!(lv(&[0.1, 0.2]).dominated_by(&lv(&[0.1, 0.3]), 0.0));
        assert!(!lv(&[0.2, 0.2]).dominated_by(&lv(&[0.1, 0.3]), 0.0));
    }

    #[test]
    fn json_uses_inf_string() {
        let v = lv(&[0.0, f64::INFINITY]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.0,"inf"]"#);
        let back: LossVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<PosVector>(r#"[1.0,"inf"]"#).is_err());
        assert!(serde_json::from_str::<LossVector>(r#"[1.0,"nope"]"#).is_err());
    }
}
