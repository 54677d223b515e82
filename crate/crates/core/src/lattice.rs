//! Lattice windows, the oriented Kuhn triangulation and the windowed
//! fundamental cycle.
//!
//! All combinatorics run in lattice units. A window's `spacing` only scales
//! lattice coordinates into world coordinates.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::Chain;
use crate::exact::edge_det;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

/// A point of `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn to_world(&self, spacing: f64) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64 * spacing).collect()
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The cube `[-L, L]^n` of the integer lattice, scaled by `spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    #[serde(rename = "n")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: i64,
    pub spacing: f64,
    /// Width of the boundary band, in lattice units.
    pub collar: i64,
}

pub const DEFAULT_COLLAR: i64 = 2;

impl Window {
    /// Window with spacing 1 and the default collar, clamped below `L`.
    pub fn new(dim: usize, half_width: i64) -> Self {
        Window {
            dim,
            half_width,
            spacing: 1.0,
            collar: DEFAULT_COLLAR.min(half_width - 1).max(0),
        }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_collar(mut self, collar: i64) -> Self {
        self.collar = collar;
        self
    }

    /// Same dimension, spacing and collar rule with a new half-width.
    pub fn resized(&self, half_width: i64) -> Self {
        Window {
            half_width,
            collar: self.collar.min(half_width - 1).max(0),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.dim == 0 {
            return Err(LatticeError::InvalidWindow("dimension must be at least 1".into()));
        }
        if self.half_width < 1 {
            return Err(LatticeError::InvalidWindow(format!(
                "half-width must be at least 1, got {}",
                self.half_width
            )));
        }
        self.check_spacing()?;
        if self.collar < 0 || self.collar >= self.half_width {
            return Err(LatticeError::InvalidWindow(format!(
                "collar {} must lie in [0, {})",
                self.collar, self.half_width
            )));
        }
        Ok(())
    }

    fn check_spacing(&self) -> Result<(), LatticeError> {
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(LatticeError::InvalidWindow(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim && p.0.iter().all(|c| c.abs() <= self.half_width)
    }

    /// True when some coordinate of `p` lies in the boundary band.
    pub fn in_collar(&self, p: &LatticePoint) -> bool {
        p.0.iter().any(|c| c.abs() > self.half_width - self.collar)
    }
}

/// An `n`-simplex of the Kuhn triangulation with its orientation sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedSimplex {
    pub vertices: Vec<LatticePoint>,
    pub sign: i8,
}

/// All lattice points of the window, lexicographically ordered.
pub fn enumerate_window(window: &Window) -> Result<Vec<LatticePoint>, LatticeError> {
    if window.dim == 0 || window.half_width < 1 {
        return Err(LatticeError::InvalidWindow(format!(
            "cannot enumerate window with n={} L={}",
            window.dim, window.half_width
        )));
    }
    Ok(lex_box(window.dim, -window.half_width, window.half_width)
        .into_iter()
        .map(LatticePoint)
        .collect())
}

/// Every integer vector in `[lo, hi]^dim`, lexicographic.
fn lex_box(dim: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if hi < lo {
        return Vec::new();
    }
    let side = (hi - lo + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![lo; dim];
    for _ in 0..total {
        out.push(cur.clone());
        for k in (0..dim).rev() {
            if cur[k] < hi {
                cur[k] += 1;
                break;
            }
            cur[k] = lo;
        }
    }
    out
}

/// Permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    loop {
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
        out.push(perm.clone());
    }
}

/// The `n! (2L)^n` Kuhn simplices of `[-L, L]^n`.
///
/// Each simplex is `c, c + e_p(1), c + e_p(1) + e_p(2), ...` for a cube corner
/// `c` and axis permutation `p`, ordered by corner then by permutation. A
/// window with `L <= 0` has no cubes and yields no simplices.
pub fn kuhn_simplices(window: &Window) -> Result<Vec<OrientedSimplex>, LatticeError> {
    if window.dim == 0 {
        return Err(LatticeError::InvalidWindow("dimension must be at least 1".into()));
    }
    window.check_spacing()?;
    let n = window.dim;
    let corners = lex_box(n, -window.half_width, window.half_width - 1);
    let perms = permutations(n);
    let mut out = Vec::with_capacity(corners.len() * perms.len());
    for c in &corners {
        for p in &perms {
            let mut verts = Vec::with_capacity(n + 1);
            let mut v = c.clone();
            verts.push(LatticePoint(v.clone()));
            for &axis in p {
                v[axis] += 1;
                verts.push(LatticePoint(v.clone()));
            }
            let refs: Vec<&[i64]> = verts.iter().map(|v| v.coords()).collect();
            let sign = edge_det(&refs).signum() as i8;
            debug_assert!(sign != 0);
            out.push(OrientedSimplex { vertices: verts, sign });
        }
    }
    Ok(out)
}

/// `sum sign(s) * (v_0, ..., v_n)` over the Kuhn simplices of the window.
///
/// Every term realizes with positive orientation, and interior faces cancel
/// so the boundary lives on the faces of the cube.
pub fn fundamental_cycle(window: &Window) -> Result<Chain, LatticeError> {
    let simplices = kuhn_simplices(window)?;
    let terms = simplices
        .into_iter()
        .map(|s| (s.vertices, BigInt::from(s.sign)));
    Ok(Chain::from_terms(window.dim, window.dim, window.spacing, terms)
        .expect("Kuhn simplices have n + 1 vertices"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::boundary;

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    #[test]
    fn enumerate_small_windows() {
        let pts = enumerate_window(&Window::new(1, 1)).unwrap();
        assert_eq!(pts, vec![lp(&[-1]), lp(&[0]), lp(&[1])]);

        let pts = enumerate_window(&Window::new(2, 1)).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], lp(&[-1, -1]));
        assert_eq!(pts[8], lp(&[1, 1]));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));

        assert_eq!(enumerate_window(&Window::new(3, 4)).unwrap().len(), 729);
    }

    #[test]
    fn enumerate_rejects_bad_windows() {
        assert!(enumerate_window(&Window::new(0, 3)).is_err());
        assert!(enumerate_window(&Window::new(2, 0)).is_err());
    }

    #[test]
    fn validate_checks_collar_and_spacing() {
        assert!(Window::new(2, 4).validate().is_ok());
        assert!(Window::new(2, 4).with_collar(4).validate().is_err());
        assert!(Window::new(2, 4).with_spacing(0.0).validate().is_err());
        assert_eq!(Window::new(2, 1).collar, 0);
    }

    #[test]
    fn kuhn_one_dimensional() {
        let s = kuhn_simplices(&Window::new(1, 2)).unwrap();
        let got: Vec<_> = s.iter().map(|s| (s.vertices[0].0[0], s.vertices[1].0[0], s.sign)).collect();
        assert_eq!(got, vec![(-2, -1, 1), (-1, 0, 1), (0, 1, 1), (1, 2, 1)]);
    }

    #[test]
    fn kuhn_square_areas() {
        let s = kuhn_simplices(&Window::new(2, 1)).unwrap();
        assert_eq!(s.len(), 8);
        // Brute-force shoelace area of each triangle.
        let twice_area: i64 = s
            .iter()
            .map(|s| {
                let [a, b, c] = [&s.vertices[0].0, &s.vertices[1].0, &s.vertices[2].0];
                let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                assert_eq!(det.signum() as i8, s.sign);
                det.abs()
            })
            .sum();
        assert_eq!(twice_area, 8);
    }

    #[test]
    fn kuhn_counts() {
        assert_eq!(kuhn_simplices(&Window::new(3, 2)).unwrap().len(), 6 * 64);
        assert!(kuhn_simplices(&Window::new(2, 0)).unwrap().is_empty());
    }

    #[test]
    fn fundamental_cycle_line() {
        let z = fundamental_cycle(&Window::new(1, 2)).unwrap();
        assert_eq!(z.len(), 4);
        let b = boundary(&z).unwrap();
        let terms: Vec<_> = b.terms().map(|(t, c)| (t[0].0[0], c.clone())).collect();
        assert_eq!(terms, vec![(-2, BigInt::from(-1)), (2, BigInt::from(1))]);
    }

    #[test]
    fn degenerate_window_gives_zero_chain() {
        assert!(fundamental_cycle(&Window::new(1, 0)).unwrap().is_zero());
    }

    #[test]
    fn square_boundary_on_edges() {
        let w = Window::new(2, 1);
        let b = boundary(&fundamental_cycle(&w).unwrap()).unwrap();
        assert!(!b.is_zero());
        for (tuple, _) in b.terms() {
            // Both endpoints on the same edge of the square.
            let on_edge = (0..2).any(|k| {
                tuple.iter().all(|v| v.0[k] == 1) || tuple.iter().all(|v| v.0[k] == -1)
            });
            assert!(on_edge, "{tuple:?}");
        }
    }

    #[test]
    fn permutations_lexicographic() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
    }
}
