//! Sparse integer controlled chains.
//!
//! A chain of degree `q` is a finite integer combination of ordered
//! `(q+1)`-tuples of lattice points. Tuples are not symmetrized and
//! degenerate tuples are ordinary terms. Terms are kept in a `BTreeMap`, so
//! iteration is lexicographic on the flattened vertex coordinates and chain
//! equality is structural.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticePoint, Window};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("boundary of a 0-chain is undefined")]
    DegreeUnderflow,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("spacing mismatch: {0} vs {1}")]
    SpacingMismatch(f64, f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("tuple of length {got} in a chain of degree {q}")]
    BadTuple { q: usize, got: usize },
    #[error("malformed chain document: {0}")]
    Document(String),
}

pub type Tuple = Vec<LatticePoint>;

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    q: usize,
    dim: usize,
    spacing: f64,
    terms: BTreeMap<Tuple, BigInt>,
}

/// Largest pairwise vertex distance over the support, in world units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ControlRadius {
    pub value: f64,
}

impl Chain {
    pub fn zero(q: usize, dim: usize, spacing: f64) -> Self {
        Chain { q, dim, spacing, terms: BTreeMap::new() }
    }

    /// Builds a chain from `(tuple, coefficient)` pairs, summing repeated
    /// tuples and dropping zero coefficients.
    pub fn from_terms<I>(q: usize, dim: usize, spacing: f64, terms: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (Tuple, BigInt)>,
    {
        let mut c = Chain::zero(q, dim, spacing);
        for (t, k) in terms {
            if t.len() != q + 1 {
                return Err(ChainError::BadTuple { q, got: t.len() });
            }
            if let Some(v) = t.iter().find(|v| v.dim() != dim) {
                return Err(ChainError::DimensionMismatch(dim, v.dim()));
            }
            c.add_term(t, k);
        }
        Ok(c)
    }

    pub(crate) fn add_term(&mut self, t: Tuple, k: BigInt) {
        if k.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(t) {
            Entry::Vacant(e) => {
                e.insert(k);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += k;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &[LatticePoint]) -> BigInt {
        self.terms.get(t).cloned().unwrap_or_default()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Tuple, &BigInt)> {
        self.terms.iter()
    }

    pub fn scaled(&self, k: &BigInt) -> Chain {
        let mut out = Chain::zero(self.q, self.dim, self.spacing);
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c * k);
        }
        out
    }

    pub fn to_document(&self) -> ChainDocument {
        ChainDocument {
            q: self.q,
            dim: Some(self.dim),
            spacing: self.spacing,
            terms: self
                .terms
                .iter()
                .map(|(t, c)| TermDocument {
                    vertices: t.iter().map(|v| v.0.clone()).collect(),
                    coeff: coeff_to_json(c),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &ChainDocument) -> Result<Chain, ChainError> {
        let inferred = doc.terms.first().and_then(|t| t.vertices.first()).map(Vec::len);
        let dim = doc.dim.or(inferred).unwrap_or(0);
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let c = coeff_from_json(&t.coeff)?;
                Ok((t.vertices.iter().cloned().map(LatticePoint).collect(), c))
            })
            .collect::<Result<Vec<_>, ChainError>>()?;
        Chain::from_terms(doc.q, dim, doc.spacing, terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("chain documents serialize")
    }
}

/// Wire form of a chain: `{ "q", "dim", "spacing", "terms": [{ "vertices", "coeff" }] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDocument {
    pub q: usize,
    /// Optional on input; inferred from the first vertex when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub spacing: f64,
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDocument {
    pub vertices: Vec<Vec<i64>>,
    /// A JSON integer, or a decimal string when it does not fit in 64 bits.
    pub coeff: serde_json::Value,
}

fn coeff_to_json(c: &BigInt) -> serde_json::Value {
    match c.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(c.to_string()),
    }
}

fn coeff_from_json(v: &serde_json::Value) -> Result<BigInt, ChainError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| ChainError::Document(format!("non-integer coefficient {n}"))),
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| ChainError::Document(format!("bad coefficient {s:?}"))),
        other => Err(ChainError::Document(format!("bad coefficient {other}"))),
    }
}

/// `b(x_0..x_q) = sum_i (-1)^i (x_0 .. ^x_i .. x_q)`, extended linearly.
pub fn boundary(c: &Chain) -> Result<Chain, ChainError> {
    if c.q == 0 {
        return Err(ChainError::DegreeUnderflow);
    }
    let mut out = Chain::zero(c.q - 1, c.dim, c.spacing);
    for (t, k) in &c.terms {
        for i in 0..t.len() {
            let mut face = t.clone();
            face.remove(i);
            let coeff = if i % 2 == 0 { k.clone() } else { -k.clone() };
            out.add_term(face, coeff);
        }
    }
    Ok(out)
}

/// `k1 * c1 + k2 * c2`.
pub fn combine(c1: &Chain, c2: &Chain, k1: i64, k2: i64) -> Result<Chain, ChainError> {
    if c1.q != c2.q {
        return Err(ChainError::DegreeMismatch(c1.q, c2.q));
    }
    if c1.spacing != c2.spacing {
        return Err(ChainError::SpacingMismatch(c1.spacing, c2.spacing));
    }
    let dim = match (c1.is_zero(), c2.is_zero()) {
        (false, false) if c1.dim != c2.dim => {
            return Err(ChainError::DimensionMismatch(c1.dim, c2.dim))
        }
        (true, false) => c2.dim,
        _ => c1.dim,
    };
    let (k1, k2) = (BigInt::from(k1), BigInt::from(k2));
    let mut out = Chain::zero(c1.q, dim, c1.spacing);
    for (t, k) in &c1.terms {
        out.add_term(t.clone(), k * &k1);
    }
    for (t, k) in &c2.terms {
        out.add_term(t.clone(), k * &k2);
    }
    Ok(out)
}

/// Squared lattice diameter of one tuple.
pub(crate) fn tuple_diameter_sq(t: &[LatticePoint]) -> i64 {
    let mut best = 0;
    for (i, a) in t.iter().enumerate() {
        for b in &t[i + 1..] {
            let d: i64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(d);
        }
    }
    best
}

pub fn control_radius(c: &Chain) -> ControlRadius {
    let sq = c.terms.keys().map(|t| tuple_diameter_sq(t)).max().unwrap_or(0);
    ControlRadius { value: (sq as f64).sqrt() * c.spacing }
}

/// Keeps the terms whose vertices all lie in `w`.
pub fn restrict_to_window(c: &Chain, w: &Window) -> Chain {
    let mut out = Chain::zero(c.q, c.dim, c.spacing);
    for (t, k) in &c.terms {
        if t.iter().all(|v| w.contains(v)) {
            out.terms.insert(t.clone(), k.clone());
        }
    }
    out
}
