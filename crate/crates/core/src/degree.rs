//! Coarse degree by pushforward and signed covering counts.
//!
//! The windowed fundamental cycle `z` is pushed through the vertex map of
//! `f`. Away from the realization of `b(f_* z)` the signed covering number of
//! `f_* z` is locally constant, so on the largest origin-centred ball that
//! misses that realization it equals the degree. Test points are drawn from
//! that ball, and the result is accepted only when every test point agrees on
//! the window and on the half-size window.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{boundary, Chain, ChainError};
use crate::exact::{det_i128, edge_det};
use crate::lattice::{fundamental_cycle, LatticeError, LatticePoint, Window};
use crate::maps::{vertex_map, CoarseMap, MapError};
use crate::par;
use crate::sampling::{self, norm};

/// Distance (lattice units) below which a query point counts as lying on a
/// face hyperplane.
pub const GENERIC_TOLERANCE: f64 = 1e-9;
/// Test points per degree run unless the caller asks otherwise.
pub const DEFAULT_TEST_POINTS: usize = 16;

/// Fraction of the boundary clearance used for test points.
const SAFE_FRACTION: f64 = 0.9;
const MAX_JITTER_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("point {0:?} lies within tolerance of a face hyperplane")]
    NonGeneric(Vec<f64>),
    #[error("covering needs an n-chain in R^n, got a {q}-chain in R^{dim}")]
    NotTopDimensional { q: usize, dim: usize },
    #[error("map acts on R^{map} but the window is {window}-dimensional")]
    DimensionMismatch { map: usize, window: usize },
    #[error("window half-width {0} is too small for a two-rung stability check")]
    WindowTooSmall(i64),
    #[error("covering number {0} does not fit in 64 bits")]
    Overflow(BigInt),
}

/// `sum r_x (vm(x_0), ..., vm(x_q))`, merging equal image tuples.
pub fn pushforward<F, E>(c: &Chain, vm: F) -> Result<Chain, E>
where
    F: Fn(&LatticePoint) -> Result<LatticePoint, E> + Send + Sync,
    E: Send,
{
    let verts: Vec<LatticePoint> = c
        .terms()
        .flat_map(|(t, _)| t.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let images = par::try_map(&verts, |v| vm(v))?;
    let table: HashMap<&LatticePoint, LatticePoint> = verts.iter().zip(images).collect();
    let mut out = Chain::zero(c.degree(), c.dim(), c.spacing());
    for (t, k) in c.terms() {
        out.add_term(t.iter().map(|v| table[v].clone()).collect(), k.clone());
    }
    Ok(out)
}

/// A nondegenerate term prepared for point-location queries.
struct Piece {
    lo: Vec<i64>,
    hi: Vec<i64>,
    /// Coefficient times orientation sign.
    weight: BigInt,
    /// Sign of the homogeneous determinant with rows `(v_k, 1)`.
    hsign: i128,
    /// Row `i`: cofactors `C_i0 .. C_in`; replacing row `i` by `(p, 1)` gives
    /// `sum_j p_j C_ij + C_in`.
    cof: Vec<Vec<i128>>,
}

/// The realization of a top-dimensional chain, ready for repeated covering
/// queries.
pub struct Realization {
    dim: usize,
    spacing: f64,
    pieces: Vec<Piece>,
}

impl Realization {
    pub fn new(c: &Chain) -> Result<Self, DegreeError> {
        let n = c.dim();
        if c.degree() != n && !c.is_zero() {
            return Err(DegreeError::NotTopDimensional { q: c.degree(), dim: n });
        }
        let mut pieces = Vec::new();
        for (t, k) in c.terms() {
            let refs: Vec<&[i64]> = t.iter().map(|v| v.coords()).collect();
            let orient = edge_det(&refs).signum();
            if orient == 0 {
                continue;
            }
            let h: Vec<Vec<i128>> = t
                .iter()
                .map(|v| v.0.iter().map(|&x| x as i128).chain([1]).collect())
                .collect();
            let hsign = det_i128(h.clone()).signum();
            let cof = (0..=n)
                .map(|i| {
                    (0..=n)
                        .map(|j| {
                            let minor: Vec<Vec<i128>> = h
                                .iter()
                                .enumerate()
                                .filter(|(r, _)| *r != i)
                                .map(|(_, row)| {
                                    row.iter()
                                        .enumerate()
                                        .filter(|(col, _)| *col != j)
                                        .map(|(_, x)| *x)
                                        .collect()
                                })
                                .collect();
                            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                            s * det_i128(minor)
                        })
                        .collect()
                })
                .collect();
            let lo = (0..n).map(|d| t.iter().map(|v| v.0[d]).min().unwrap()).collect();
            let hi = (0..n).map(|d| t.iter().map(|v| v.0[d]).max().unwrap()).collect();
            pieces.push(Piece { lo, hi, weight: k * BigInt::from(orient as i64), hsign, cof });
        }
        Ok(Realization { dim: n, spacing: c.spacing(), pieces })
    }

    /// Number of nondegenerate terms.
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Signed covering number at a world point.
    pub fn covering(&self, p: &[f64]) -> Result<BigInt, DegreeError> {
        if p.len() != self.dim {
            return Err(DegreeError::NotTopDimensional { q: p.len(), dim: self.dim });
        }
        let q: Vec<f64> = p.iter().map(|x| x / self.spacing).collect();
        self.covering_lattice(&q).map_err(|_| DegreeError::NonGeneric(p.to_vec()))
    }

    /// Covering number at a point given in lattice units. `Err(())` marks a
    /// non-generic point.
    fn covering_lattice(&self, q: &[f64]) -> Result<BigInt, ()> {
        let tol = GENERIC_TOLERANCE;
        let mut total = BigInt::zero();
        for piece in &self.pieces {
            let in_box = (0..self.dim)
                .all(|d| q[d] >= piece.lo[d] as f64 - tol && q[d] <= piece.hi[d] as f64 + tol);
            if !in_box {
                continue;
            }
            let mut inside = true;
            let mut near = false;
            let mut outside_far = false;
            for row in &piece.cof {
                let sign = affine_sign(row, q) * piece.hsign;
                let grad: f64 = row[..self.dim].iter().map(|c| (*c as f64).powi(2)).sum::<f64>().sqrt();
                let value: f64 = row[..self.dim].iter().zip(q).map(|(c, x)| *c as f64 * x).sum::<f64>()
                    + row[self.dim] as f64;
                let dist = value.abs() / grad;
                if sign <= 0 {
                    inside = false;
                    if dist >= tol {
                        outside_far = true;
                    }
                }
                if dist < tol {
                    near = true;
                }
            }
            if near && !outside_far {
                return Err(());
            }
            if inside {
                total += &piece.weight;
            }
        }
        Ok(total)
    }
}

/// Exact sign of `sum_j row_j q_j + row_n`. A floating-point filter decides
/// clear cases; the rest are settled in rational arithmetic.
fn affine_sign(row: &[i128], q: &[f64]) -> i128 {
    let n = q.len();
    let mut value = row[n] as f64;
    let mut magnitude = (row[n] as f64).abs();
    for (c, x) in row[..n].iter().zip(q) {
        let t = *c as f64 * x;
        value += t;
        magnitude += t.abs();
    }
    let bound = magnitude * (n as f64 + 2.0) * 4.0 * f64::EPSILON;
    if value > bound {
        return 1;
    }
    if value < -bound {
        return -1;
    }
    let mut acc = BigRational::from_integer(BigInt::from(row[n]));
    for (c, x) in row[..n].iter().zip(q) {
        let x = BigRational::from_float(*x).expect("finite query point");
        acc += x * BigRational::from_integer(BigInt::from(*c));
    }
    if acc.is_positive() {
        1
    } else if acc.is_negative() {
        -1
    } else {
        0
    }
}

/// Signed number of times the chain covers `p`: the sum of
/// `r_x * orient(x) * [p in realization(x)]`. Degenerate terms contribute 0.
pub fn covering_number(c: &Chain, p: &[f64]) -> Result<BigInt, DegreeError> {
    Realization::new(c)?.covering(p)
}

/// Euclidean distance from the origin to the convex hull of `pts`.
pub(crate) fn hull_distance_to_origin(pts: &[Vec<f64>]) -> f64 {
    if pts.len() == 1 {
        return norm(&pts[0]);
    }
    let p0 = &pts[0];
    let edges: Vec<Vec<f64>> =
        pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let k = edges.len();
    // Gram system G a = -E^T p0 for the closest point of the affine hull.
    let mut g: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| sampling::dot(&edges[i], &edges[j])).collect();
            row.push(-sampling::dot(&edges[i], p0));
            row
        })
        .collect();
    if let Some(a) = solve_in_place(&mut g) {
        let lambda0 = 1.0 - a.iter().sum::<f64>();
        if lambda0 >= 0.0 && a.iter().all(|x| *x >= 0.0) {
            let x: Vec<f64> = (0..p0.len())
                .map(|d| p0[d] + edges.iter().zip(&a).map(|(e, c)| c * e[d]).sum::<f64>())
                .collect();
            return norm(&x);
        }
    }
    (0..pts.len())
        .map(|skip| {
            let sub: Vec<Vec<f64>> =
                pts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.clone()).collect();
            hull_distance_to_origin(&sub)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_in_place(m: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let k = m.len();
    let scale = m.iter().flat_map(|r| r[..k].iter()).fold(0.0f64, |a, x| a.max(x.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale.max(1.0) {
            return None;
        }
        m.swap(col, piv);
        let (top, below) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in &mut below[..k - col - 1] {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..=k].iter_mut().zip(&pivot_row[col..=k]) {
                *x -= f * p;
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][k] - s) / m[r][r];
    }
    Some(x)
}

/// Distance (lattice units) from the origin to the realization of `b`;
/// infinite for the zero chain.
pub(crate) fn boundary_clearance(b: &Chain) -> f64 {
    let faces: Vec<Vec<Vec<f64>>> = b
        .terms()
        .map(|(t, _)| t.iter().map(|v| v.0.iter().map(|&x| x as f64).collect()).collect())
        .collect();
    par::map(&faces, |f| hull_distance_to_origin(f)).into_iter().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPoint {
    pub p: Vec<f64>,
    pub covering: i64,
    pub covering_half: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub d: Option<i64>,
    pub stable: bool,
    pub window: Window,
    pub half_window: Window,
    pub spacing: f64,
    /// Distance from the origin to the image of each window's boundary,
    /// world units.
    pub clearance: [f64; 2],
    /// Radius of the ball the test points were drawn from, world units.
    pub safe_radius: f64,
    pub seed: u64,
    pub test_points: Vec<TestPoint>,
    pub reason: Option<String>,
}

struct Rung {
    image: Realization,
    clearance: f64,
}

fn prepare_rung<M: CoarseMap + ?Sized>(m: &M, w: &Window) -> Result<Rung, DegreeError> {
    let z = fundamental_cycle(w)?;
    let vm = vertex_map(m, w.spacing);
    let pushed = pushforward(&z, |v| vm.apply(v))?;
    let clearance = boundary_clearance(&boundary(&pushed)?);
    Ok(Rung { image: Realization::new(&pushed)?, clearance })
}

fn to_i64(b: BigInt) -> Result<i64, DegreeError> {
    b.to_i64().ok_or(DegreeError::Overflow(b))
}

/// Degree of `m` on `R^n` measured on `window` and its half-size twin.
///
/// `stable` is true only when every test point has the same covering number
/// on both windows; otherwise `d` is `None` and `reason` says why.
pub fn degree<M: CoarseMap + ?Sized>(
    m: &M,
    window: &Window,
    num_test_points: usize,
    seed: u64,
) -> Result<DegreeResult, DegreeError> {
    window.validate()?;
    if m.dim() != window.dim {
        return Err(DegreeError::DimensionMismatch { map: m.dim(), window: window.dim });
    }
    if window.half_width < 2 {
        return Err(DegreeError::WindowTooSmall(window.half_width));
    }
    let n = window.dim;
    let half_window = window.resized(window.half_width / 2);
    let full = prepare_rung(m, window)?;
    let half = prepare_rung(m, &half_window)?;
    let clearance = full.clearance.min(half.clearance);
    let spacing = window.spacing;
    let mut result = DegreeResult {
        d: None,
        stable: false,
        window: *window,
        half_window,
        spacing,
        clearance: [full.clearance * spacing, half.clearance * spacing],
        safe_radius: 0.0,
        seed,
        test_points: Vec::new(),
        reason: None,
    };
    if !(clearance > 1e-6) {
        result.reason = Some(format!(
            "image of the window boundary passes within {:.3e} of the origin",
            clearance * spacing
        ));
        return Ok(result);
    }
    let radius = (SAFE_FRACTION * clearance).min(window.half_width as f64);
    result.safe_radius = radius * spacing;

    // Draw in the cube inscribed in the safe ball.
    let side = radius / (n as f64).sqrt();
    let mut rng = sampling::rng(seed, 0);
    let draws: Vec<Vec<f64>> = (0..num_test_points)
        .map(|_| (0..n).map(|_| rng.gen_range(-side..=side)).collect())
        .collect();

    let evaluated = par::try_map(&draws, |base| {
        for attempt in 0..MAX_JITTER_ATTEMPTS {
            let q: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let jitter = ((i + 1) as f64 * (attempt as f64 + 1.0)) * std::f64::consts::FRAC_1_SQRT_2;
                    (x + jitter * 1e-7 * 10f64.powi(attempt as i32 / 4)).clamp(-side, side)
                })
                .collect();
            let (Ok(a), Ok(b)) = (full.image.covering_lattice(&q), half.image.covering_lattice(&q))
            else {
                continue;
            };
            return Ok(TestPoint {
                p: q.iter().map(|x| x * spacing).collect(),
                covering: to_i64(a)?,
                covering_half: to_i64(b)?,
            });
        }
        Err(DegreeError::NonGeneric(base.iter().map(|x| x * spacing).collect()))
    })?;
    result.test_points = evaluated;

    let first = result.test_points.first().map(|t| t.covering);
    let agree = result.test_points.iter().all(|t| Some(t.covering) == first && t.covering_half == t.covering);
    if agree && first.is_some() {
        result.stable = true;
        result.d = first;
    } else if first.is_none() {
        result.reason = Some("no test points requested".into());
    } else {
        result.reason = Some("covering numbers disagree across test points or windows".into());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::fundamental_cycle;
    use crate::maps::{parse_map, MapSpec};

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    #[test]
    fn pushforward_identity_is_noop() {
        let z = fundamental_cycle(&Window::new(2, 3)).unwrap();
        let id = pushforward(&z, |v| Ok::<_, ()>(v.clone())).unwrap();
        assert_eq!(id, z);
    }

    #[test]
    fn pushforward_constant_map_gives_degenerate_edges() {
        let c = Chain::from_terms(
            1,
            1,
            1.0,
            [(vec![lp(&[0]), lp(&[1])], BigInt::from(2)), (vec![lp(&[1]), lp(&[3])], BigInt::from(1))],
        )
        .unwrap();
        let k = pushforward(&c, |_| Ok::<_, ()>(lp(&[7]))).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.coefficient(&[lp(&[7]), lp(&[7])]), BigInt::from(3));
        assert!(boundary(&k).unwrap().is_zero());
    }

    #[test]
    fn pushforward_reflection_of_line() {
        let z = fundamental_cycle(&Window::new(1, 2)).unwrap();
        let r = pushforward(&z, |v| Ok::<_, ()>(lp(&[-v.0[0]]))).unwrap();
        let expected = Chain::from_terms(
            1,
            1,
            1.0,
            [[2, 1], [1, 0], [0, -1], [-1, -2]]
                .iter()
                .map(|[a, b]| (vec![lp(&[*a]), lp(&[*b])], BigInt::from(1))),
        )
        .unwrap();
        assert_eq!(r, expected);
    }

    #[test]
    fn covering_of_line_cycle() {
        let z = fundamental_cycle(&Window::new(1, 4)).unwrap();
        assert_eq!(covering_number(&z, &[0.5]).unwrap(), BigInt::from(1));
        let r = pushforward(&z, |v| Ok::<_, ()>(lp(&[-v.0[0]]))).unwrap();
        assert_eq!(covering_number(&r, &[0.5]).unwrap(), BigInt::from(-1));
        assert_eq!(covering_number(&z, &[100.5]).unwrap(), BigInt::zero());
    }

    #[test]
    fn covering_rejects_points_on_faces() {
        let z = fundamental_cycle(&Window::new(2, 2)).unwrap();
        assert!(matches!(covering_number(&z, &[0.5, 0.5]), Err(DegreeError::NonGeneric(_))));
        assert!(matches!(covering_number(&z, &[1.0, 0.3]), Err(DegreeError::NonGeneric(_))));
        assert!(matches!(covering_number(&z, &[0.3, 0.3 + 1e-12]), Err(DegreeError::NonGeneric(_))));
        assert_eq!(covering_number(&z, &[0.3, 0.31]).unwrap(), BigInt::from(1));
        // Far outside the support: nothing nearby, nothing to reject.
        assert_eq!(covering_number(&z, &[10.0, 0.0]).unwrap(), BigInt::zero());
    }

    #[test]
    fn covering_respects_spacing() {
        let z = fundamental_cycle(&Window::new(2, 2).with_spacing(0.25)).unwrap();
        assert_eq!(covering_number(&z, &[0.3, 0.1]).unwrap(), BigInt::from(1));
        assert_eq!(covering_number(&z, &[0.6, 0.1]).unwrap(), BigInt::zero());
    }

    #[test]
    fn degenerate_terms_do_not_cover() {
        let c = Chain::from_terms(
            2,
            2,
            1.0,
            [(vec![lp(&[0, 0]), lp(&[1, 1]), lp(&[2, 2])], BigInt::from(5))],
        )
        .unwrap();
        assert_eq!(covering_number(&c, &[1.0, 1.3]).unwrap(), BigInt::zero());
    }

    #[test]
    fn affine_sign_falls_back_to_exact() {
        // 3 * (1/3 as f64) - 1 is tiny and negative in exact arithmetic.
        let third = 1.0f64 / 3.0;
        let exact = BigRational::from_float(third).unwrap() * BigRational::from_integer(3.into())
            - BigRational::from_integer(1.into());
        let expected = if exact.is_positive() { 1 } else { -1 };
        assert_eq!(affine_sign(&[3, -1], &[third]), expected);
        assert_eq!(affine_sign(&[2, -1], &[0.5]), 0);
    }

    #[test]
    fn hull_distances() {
        let d = hull_distance_to_origin(&[vec![-1.0, 2.0], vec![1.0, 2.0]]);
        assert!((d - 2.0).abs() < 1e-12);
        let d = hull_distance_to_origin(&[vec![3.0, 4.0], vec![6.0, 8.0]]);
        assert!((d - 5.0).abs() < 1e-12);
        let d = hull_distance_to_origin(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!((d - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let d = hull_distance_to_origin(&[vec![2.0, 2.0], vec![2.0, 2.0], vec![4.0, 2.0]]);
        assert!((d - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degree_examples() {
        let w = Window::new(2, 8);
        let d = degree(&MapSpec::identity(2), &w, 8, 0).unwrap();
        assert_eq!((d.d, d.stable), (Some(1), true));
        let d = degree(&MapSpec::antipodal(2), &w, 8, 0).unwrap();
        assert_eq!(d.d, Some(1));
        let d = degree(&MapSpec::antipodal(3), &Window::new(3, 8), 8, 0).unwrap();
        assert_eq!(d.d, Some(-1));
        let g = parse_map("fold{translate(1)}", 2).unwrap();
        let d = degree(&g, &Window::new(2, 16), 8, 0).unwrap();
        assert_eq!((d.d, d.stable), (Some(0), true));
    }

    #[test]
    fn degree_reports_window_disagreement() {
        // The full window's image covers the origin, the half window's does not.
        let t = MapSpec::translation(vec![7.0, 0.0]);
        let d = degree(&t, &Window::new(2, 8), 8, 0).unwrap();
        assert!(!d.stable);
        assert_eq!(d.d, None);
        assert!(d.test_points.iter().all(|p| p.covering == 1 && p.covering_half == 0));

        // Boundary image through the origin leaves no region to sample.
        let t = MapSpec::translation(vec![8.0, 0.0]);
        let d = degree(&t, &Window::new(2, 8), 8, 0).unwrap();
        assert!(!d.stable && d.test_points.is_empty());
        assert!(d.reason.unwrap().contains("passes within"));
    }

    #[test]
    fn degree_argument_errors() {
        let w = Window::new(2, 8);
        assert!(matches!(
            degree(&MapSpec::identity(3), &w, 4, 0),
            Err(DegreeError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            degree(&MapSpec::identity(2), &Window::new(2, 1), 4, 0),
            Err(DegreeError::WindowTooSmall(1))
        ));
    }
}
