//! Candidate coarse maps: builtin kinds, compositions and parsed
//! expressions, the half-space fold, the lattice vertex map, and sampled
//! estimators for properness and bornology.
//!
//! Coarseness is estimated on finite windows, never certified. Every report
//! carries the window, ladder and seed it was measured with.

pub mod builtin;
pub mod expr;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticePoint, Window};
use crate::par;
use crate::sampling::{self, dist, mix64, norm};

pub use builtin::{implied_dim, parse_map};
pub use expr::{EvalError, ExprAst, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid map: {0}")]
    InvalidSpec(String),
    #[error("inner map leaves the half-space: {point:?} -> {image:?}")]
    DomainViolation { point: Vec<f64>, image: Vec<f64> },
    #[error("non-finite image {image:?} at {point:?}")]
    NonFinite { point: Vec<f64>, image: Vec<f64> },
}

/// Anything that can be sampled as an endomap of `R^dim`.
pub trait CoarseMap: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>, MapError>;
}

/// Radial profile `|x| -> scale * |x| + offset`, applied along `x / |x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Identity,
    Reflection { axis: usize },
    Antipodal,
    Translation(Vec<f64>),
    /// Row-major `dim x dim` matrix.
    Linear(Vec<f64>),
    Rotation { angle: f64, axes: (usize, usize) },
    /// `g(x, t) = f(x, |t|)` for a half-space map `f`.
    Fold(Box<MapSpec>),
    Radial(RadialProfile),
    Perturbation { base: Box<MapSpec>, eps: f64, seed: u64 },
    /// Applied left to right.
    Composition(Vec<MapSpec>),
    Expression(ExprAst),
}

/// An endomap of `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    dim: usize,
    kind: MapKind,
}

impl MapSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn identity(dim: usize) -> Self {
        MapSpec { dim, kind: MapKind::Identity }
    }

    pub fn antipodal(dim: usize) -> Self {
        MapSpec { dim, kind: MapKind::Antipodal }
    }

    pub fn reflection(dim: usize, axis: usize) -> Result<Self, MapError> {
        if axis >= dim {
            return Err(MapError::InvalidSpec(format!("axis {axis} out of range for R^{dim}")));
        }
        Ok(MapSpec { dim, kind: MapKind::Reflection { axis } })
    }

    pub fn translation(v: Vec<f64>) -> Self {
        MapSpec { dim: v.len(), kind: MapKind::Translation(v) }
    }

    pub fn linear(dim: usize, entries: Vec<f64>) -> Result<Self, MapError> {
        if entries.len() != dim * dim {
            return Err(MapError::InvalidSpec(format!(
                "linear map on R^{dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(MapSpec { dim, kind: MapKind::Linear(entries) })
    }

    pub fn scaling(dim: usize, k: f64) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = k;
        }
        MapSpec { dim, kind: MapKind::Linear(a) }
    }

    /// `x_0 += k * x_{dim-1}`; preserves the upper half-space.
    pub fn shear(dim: usize, k: f64) -> Result<Self, MapError> {
        if dim < 2 {
            return Err(MapError::InvalidSpec("shear needs dimension at least 2".into()));
        }
        let mut a = MapSpec::scaling(dim, 1.0);
        if let MapKind::Linear(m) = &mut a.kind {
            m[dim - 1] = k;
        }
        Ok(a)
    }

    pub fn rotation(dim: usize, angle: f64, i: usize, j: usize) -> Result<Self, MapError> {
        if i >= dim || j >= dim || i == j {
            return Err(MapError::InvalidSpec(format!(
                "rotation plane ({i},{j}) invalid for R^{dim}"
            )));
        }
        Ok(MapSpec { dim, kind: MapKind::Rotation { angle, axes: (i, j) } })
    }

    pub fn radial(dim: usize, profile: RadialProfile) -> Self {
        MapSpec { dim, kind: MapKind::Radial(profile) }
    }

    pub fn perturbation(base: MapSpec, eps: f64, seed: u64) -> Result<Self, MapError> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(MapError::InvalidSpec(format!("perturbation amplitude {eps}")));
        }
        Ok(MapSpec { dim: base.dim, kind: MapKind::Perturbation { base: Box::new(base), eps, seed } })
    }

    pub fn composition(parts: Vec<MapSpec>) -> Result<Self, MapError> {
        let Some(first) = parts.first() else {
            return Err(MapError::InvalidSpec("empty composition".into()));
        };
        let dim = first.dim;
        if let Some(bad) = parts.iter().find(|m| m.dim != dim) {
            return Err(MapError::DimensionMismatch { expected: dim, got: bad.dim });
        }
        Ok(MapSpec { dim, kind: MapKind::Composition(parts) })
    }

    /// Wraps a parsed expression as an endomap of `R^dim`.
    pub fn expression(ast: ExprAst, dim: usize) -> Result<Self, MapError> {
        if ast.arity() != dim {
            return Err(MapError::DimensionMismatch { expected: dim, got: ast.arity() });
        }
        Ok(MapSpec { dim, kind: MapKind::Expression(ast) })
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        if p.len() != self.dim {
            return Err(MapError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let out = match &self.kind {
            MapKind::Identity => p.to_vec(),
            MapKind::Antipodal => p.iter().map(|x| -x).collect(),
            MapKind::Reflection { axis } => {
                let mut q = p.to_vec();
                q[*axis] = -q[*axis];
                q
            }
            MapKind::Translation(v) => p.iter().zip(v).map(|(x, t)| x + t).collect(),
            MapKind::Linear(a) => (0..self.dim)
                .map(|i| (0..self.dim).map(|j| a[i * self.dim + j] * p[j]).sum())
                .collect(),
            MapKind::Rotation { angle, axes: (i, j) } => {
                let (s, c) = angle.sin_cos();
                let mut q = p.to_vec();
                q[*i] = c * p[*i] - s * p[*j];
                q[*j] = s * p[*i] + c * p[*j];
                q
            }
            MapKind::Fold(inner) => {
                let mut q = p.to_vec();
                let last = q.len() - 1;
                q[last] = q[last].abs();
                inner.evaluate(&q)?
            }
            MapKind::Radial(RadialProfile { scale, offset }) => {
                let r = norm(p);
                if r == 0.0 {
                    vec![0.0; self.dim]
                } else {
                    let k = (scale * r + offset) / r;
                    p.iter().map(|x| k * x).collect()
                }
            }
            MapKind::Perturbation { base, eps, seed } => {
                let b = base.evaluate(p)?;
                let u = perturbation_offset(*seed, p);
                b.iter().zip(u).map(|(x, d)| x + eps * d).collect()
            }
            MapKind::Composition(parts) => {
                let mut q = p.to_vec();
                for m in parts {
                    q = m.evaluate(&q)?;
                }
                q
            }
            MapKind::Expression(ast) => ast.eval(p)?,
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(MapError::NonFinite { point: p.to_vec(), image: out });
        }
        Ok(out)
    }
}

/// Deterministic offset of Euclidean norm at most 1, a pure function of
/// `(seed, p)`.
fn perturbation_offset(seed: u64, p: &[f64]) -> Vec<f64> {
    let mut h = mix64(seed);
    for &x in p {
        // +0.0 and -0.0 are the same point.
        let bits = if x == 0.0 { 0 } else { x.to_bits() };
        h = mix64(h ^ bits);
    }
    let scale = 1.0 / (p.len() as f64).sqrt();
    (0..p.len() as u64)
        .map(|k| {
            let u = mix64(h.wrapping_add(k)) >> 11;
            (u as f64 / (1u64 << 53) as f64 * 2.0 - 1.0) * scale
        })
        .collect()
}

impl CoarseMap for MapSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        self.evaluate(p)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// Canonical text in the builtin syntax; parses back to an equal map.
impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Identity => write!(f, "identity"),
            MapKind::Antipodal => write!(f, "antipodal"),
            MapKind::Reflection { axis } => write!(f, "reflect({axis})"),
            MapKind::Translation(v) => {
                write!(f, "translate(")?;
                write_list(f, v)?;
                write!(f, ")")
            }
            MapKind::Linear(a) => {
                write!(f, "linear(")?;
                write_list(f, a)?;
                write!(f, ")")
            }
            MapKind::Rotation { angle, axes: (i, j) } => write!(f, "rotate({angle},{i},{j})"),
            MapKind::Fold(inner) => write!(f, "fold{{{inner}}}"),
            MapKind::Radial(RadialProfile { scale, offset }) => write!(f, "radial({scale},{offset})"),
            MapKind::Perturbation { base, eps, seed } => write!(f, "perturb({eps},{seed}){{{base}}}"),
            MapKind::Composition(parts) => {
                write!(f, "compose{{")?;
                for (i, m) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "}}")
            }
            MapKind::Expression(ast) => write!(f, "{ast}"),
        }
    }
}

/// Parses `"(e1, ..., em)"` into an expression endomap of `R^m`.
pub fn parse_map_expr(text: &str) -> Result<MapSpec, MapError> {
    if text.trim().is_empty() {
        return Err(MapError::InvalidSpec("empty map expression".into()));
    }
    let ast = expr::parse(text)?;
    let dim = ast.arity();
    MapSpec::expression(ast, dim)
}

const FOLD_CHECK_SAMPLES: usize = 1000;
const FOLD_CHECK_SEED: u64 = 0x0f01_d5ee_d000_0001;
const FOLD_CHECK_EXTENT: f64 = 64.0;

/// `g(x_1..x_n, t) = f(x_1..x_n, |t|)`, after checking on 1000 seeded
/// half-space points that `f` keeps the last coordinate nonnegative.
pub fn fold_to_full_space(f: MapSpec) -> Result<MapSpec, MapError> {
    let dim = f.dim;
    let mut r = sampling::rng(FOLD_CHECK_SEED, 0);
    for k in 0..FOLD_CHECK_SAMPLES {
        let mut p: Vec<f64> =
            (0..dim).map(|_| r.gen_range(-FOLD_CHECK_EXTENT..=FOLD_CHECK_EXTENT)).collect();
        // Every fourth sample sits on the boundary hyperplane.
        p[dim - 1] = if k % 4 == 0 { 0.0 } else { p[dim - 1].abs() };
        let img = f.evaluate(&p)?;
        if img[dim - 1] < 0.0 {
            return Err(MapError::DomainViolation { point: p, image: img });
        }
    }
    Ok(MapSpec { dim, kind: MapKind::Fold(Box::new(f)) })
}

/// Rounds half-integers toward negative infinity.
pub fn round_half_down(x: f64) -> i64 {
    (x - 0.5).ceil() as i64
}

/// Simplicial approximation of a map on the lattice:
/// `v -> round(m(v * spacing) / spacing)`.
pub struct VertexMap<'a, M: ?Sized> {
    map: &'a M,
    spacing: f64,
}

impl<M: CoarseMap + ?Sized> VertexMap<'_, M> {
    pub fn apply(&self, v: &LatticePoint) -> Result<LatticePoint, MapError> {
        let img = self.map.eval(&v.to_world(self.spacing))?;
        Ok(LatticePoint(img.iter().map(|x| round_half_down(x / self.spacing)).collect()))
    }
}

pub fn vertex_map<M: CoarseMap + ?Sized>(m: &M, spacing: f64) -> VertexMap<'_, M> {
    VertexMap { map: m, spacing }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSample {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

/// Measured `R -> S` relation of the bornologous condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornologousModulus {
    pub samples: Vec<ModulusSample>,
    pub window: Window,
    pub pairs_per_radius: usize,
    pub seed: u64,
}

impl BornologousModulus {
    /// `S` at the smallest sampled radius `>= r`.
    pub fn s_at(&self, r: f64) -> Option<f64> {
        self.samples.iter().find(|m| m.r >= r).map(|m| m.s)
    }
}

/// Maximum stretch over `pairs` seeded pairs at distance exactly `r`, both
/// points inside `w`.
pub(crate) fn sampled_stretch<M: CoarseMap + ?Sized>(
    m: &M,
    r: f64,
    w: &Window,
    pairs: usize,
    seed: u64,
    stream: u64,
) -> Result<f64, MapError> {
    let half = ((w.half_width as f64) * w.spacing - r).max(0.0);
    let mut rng = sampling::rng(seed, stream);
    let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..pairs)
        .map(|_| {
            let p: Vec<f64> = (0..w.dim).map(|_| rng.gen_range(-half..=half)).collect();
            let u = sampling::unit_vector(&mut rng, w.dim);
            let q = p.iter().zip(&u).map(|(a, b)| a + r * b).collect();
            (p, q)
        })
        .collect();
    let stretches = par::try_map(&pts, |(p, q)| Ok::<_, MapError>(dist(&m.eval(p)?, &m.eval(q)?)))?;
    Ok(stretches.into_iter().fold(0.0, f64::max))
}

/// `S(R)` as the sampled maximum of `d(m(p), m(p'))` over pairs with
/// `d(p, p') = R`, made monotone by a running maximum.
pub fn estimate_bornologous_modulus<M: CoarseMap + ?Sized>(
    m: &M,
    radii: &[f64],
    w: &Window,
    pairs_per_radius: usize,
    seed: u64,
) -> Result<BornologousModulus, MapError> {
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|p| p[0] >= p[1]) {
        return Err(MapError::InvalidSpec("radii must be positive and ascending".into()));
    }
    let mut running = 0.0f64;
    let mut samples = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        running = running.max(sampled_stretch(m, r, w, pairs_per_radius, seed, k as u64)?);
        samples.push(ModulusSample { r, s: running });
    }
    Ok(BornologousModulus { samples, window: *w, pairs_per_radius, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ProperAtScale,
    Suspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropernessRung {
    #[serde(rename = "L")]
    pub half_width: i64,
    /// `None` when no sample landed in the ball.
    pub max_preimage_norm: Option<f64>,
    pub hits: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropernessReport {
    #[serde(rename = "T")]
    pub ball_radius: f64,
    pub rungs: Vec<PropernessRung>,
    /// Growth below this is sampling resolution, not growth.
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Sample set of a ladder rung: the lattice of `w` refined by two.
/// Rungs of one ladder give nested sample sets.
pub(crate) fn rung_samples(w: &Window) -> Vec<Vec<f64>> {
    let fine = Window::new(w.dim, 2 * w.half_width).with_spacing(w.spacing / 2.0);
    sampling::lattice_world_points(&fine)
}

pub(crate) fn rung_tolerance(w: &Window) -> f64 {
    (w.dim as f64).sqrt() * w.spacing / 2.0
}

pub(crate) fn check_ladder(ladder: &[Window]) -> Result<(), MapError> {
    if ladder.is_empty() {
        return Err(MapError::InvalidSpec("empty window ladder".into()));
    }
    if ladder.windows(2).any(|p| p[0].half_width >= p[1].half_width) {
        return Err(MapError::InvalidSpec("window ladder must be strictly increasing".into()));
    }
    for w in ladder {
        w.validate().map_err(|e| MapError::InvalidSpec(e.to_string()))?;
    }
    Ok(())
}

/// Stable iff the last rung did not grow past `tol` over the one before.
pub(crate) fn ladder_verdict(maxima: &[Option<f64>], tol: f64) -> Verdict {
    match maxima {
        [.., prev, last] => match (prev, last) {
            (_, None) => Verdict::ProperAtScale,
            (None, Some(_)) => Verdict::Suspect,
            (Some(a), Some(b)) if *b <= *a + tol => Verdict::ProperAtScale,
            _ => Verdict::Suspect,
        },
        _ => Verdict::Suspect,
    }
}

/// Largest norm of a sampled point mapping into `B(0, T)`, per rung.
pub fn check_properness<M: CoarseMap + ?Sized>(
    m: &M,
    ball_radius: f64,
    window_ladder: &[Window],
) -> Result<PropernessReport, MapError> {
    check_ladder(window_ladder)?;
    let mut rungs = Vec::with_capacity(window_ladder.len());
    for w in window_ladder {
        let pts = rung_samples(w);
        let hits = par::try_map(&pts, |p| {
            Ok::<_, MapError>((norm(&m.eval(p)?) <= ball_radius).then(|| norm(p)))
        })?;
        let inside: Vec<f64> = hits.into_iter().flatten().collect();
        rungs.push(PropernessRung {
            half_width: w.half_width,
            max_preimage_norm: inside.iter().copied().reduce(f64::max),
            hits: inside.len(),
            samples: pts.len(),
        });
    }
    let tolerance = rung_tolerance(window_ladder.last().unwrap());
    let maxima: Vec<_> = rungs.iter().map(|r| r.max_preimage_norm).collect();
    Ok(PropernessReport {
        ball_radius,
        verdict: ladder_verdict(&maxima, tolerance),
        rungs,
        tolerance,
    })
}
