//! Coarse fixed point witnesses: directions `zeta_i`, a budget `R` and points
//! `x_i` of increasing norm with `x_i` and `f(x_i)` both within `R` of the
//! ray through `zeta_i`.
//!
//! A failed search is a refutation at the given budget and radius ladder,
//! nothing more.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{CoarseMap, MapError};
use crate::par;
use crate::sampling::{self, dot, norm};

/// Interior slerp samples tried between `dir(x)` and `dir(y)`.
pub const SLERP_SAMPLES: usize = 32;

const DISTANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CfppError {
    #[error("direction must be nonzero")]
    InvalidDirection,
    #[error("both points are the origin")]
    DegeneratePair,
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("budget must be positive, got {0}")]
    InvalidBudget(f64),
    #[error("points per sphere must be positive")]
    NoPoints,
    #[error(transparent)]
    Map(#[from] MapError),
}

fn unit(p: &[f64]) -> Option<Vec<f64>> {
    let n = norm(p);
    (n > 0.0 && n.is_finite()).then(|| p.iter().map(|x| x / n).collect())
}

/// Distance from `p` to the ray `{s zeta : s >= 0}`. `zeta` is normalized
/// first.
pub fn ray_distance(p: &[f64], zeta: &[f64]) -> Result<f64, CfppError> {
    let z = unit(zeta).ok_or(CfppError::InvalidDirection)?;
    let along = dot(p, &z);
    let pp = dot(p, p);
    Ok(if along >= 0.0 { (pp - along * along).max(0.0).sqrt() } else { pp.sqrt() })
}

/// Some unit vector orthogonal to `u`.
fn perpendicular(u: &[f64]) -> Vec<f64> {
    let k = (0..u.len())
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; u.len()];
    e[k] = 1.0;
    let c = dot(&e, u);
    let v: Vec<f64> = e.iter().zip(u).map(|(a, b)| a - c * b).collect();
    unit(&v).unwrap_or(e)
}

/// The direction minimizing `max(ray_distance(x, z), ray_distance(y, z))`
/// among `dir(x)`, `dir(y)`, their bisector and `samples` slerp points
/// between them, with that maximum. Ties keep the earlier candidate.
pub fn best_common_ray_with(x: &[f64], y: &[f64], samples: usize) -> Result<(Vec<f64>, f64), CfppError> {
    let (ux, uy) = match (unit(x), unit(y)) {
        (None, None) => return Err(CfppError::DegeneratePair),
        (Some(u), None) | (None, Some(u)) => return Ok((u, 0.0)),
        (Some(a), Some(b)) => (a, b),
    };
    let cos = dot(&ux, &uy).clamp(-1.0, 1.0);
    let omega = cos.acos();
    let mut candidates = vec![ux.clone(), uy.clone()];
    let sum: Vec<f64> = ux.iter().zip(&uy).map(|(a, b)| a + b).collect();
    if let Some(b) = unit(&sum) {
        candidates.push(b);
    }
    if omega > 0.0 {
        // Antipodal pairs have no unique plane; pick one through a perpendicular.
        let (basis, step): (Vec<f64>, f64) = if omega >= PI - 1e-12 {
            (perpendicular(&ux), PI)
        } else {
            let w: Vec<f64> = uy.iter().zip(&ux).map(|(b, a)| b - cos * a).collect();
            (unit(&w).unwrap_or_else(|| perpendicular(&ux)), omega)
        };
        for k in 1..=samples {
            let a = step * k as f64 / (samples + 1) as f64;
            let z: Vec<f64> = ux.iter().zip(&basis).map(|(p, q)| a.cos() * p + a.sin() * q).collect();
            candidates.push(z);
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for z in candidates {
        let d = ray_distance(x, &z)?.max(ray_distance(y, &z)?);
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((z, d));
        }
    }
    Ok(best.unwrap())
}

pub fn best_common_ray(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64), CfppError> {
    best_common_ray_with(x, y, SLERP_SAMPLES)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub r: f64,
    pub x: Vec<f64>,
    pub zeta: Vec<f64>,
    pub dx: f64,
    pub dfx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayWitness {
    #[serde(rename = "R")]
    pub budget: f64,
    pub entries: Vec<WitnessEntry>,
}

/// The best point found on one sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusScan {
    pub r: f64,
    pub min_max_dist: f64,
    pub x: Vec<f64>,
    pub fx: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchVerdict {
    pub found: bool,
    #[serde(rename = "R")]
    pub budget: f64,
    pub points_per_sphere: usize,
    pub halfspace: bool,
    pub seed: u64,
    pub witness: Option<RayWitness>,
    pub per_radius: Vec<RadiusScan>,
}

impl SearchVerdict {
    pub fn per_radius_min(&self) -> Vec<f64> {
        self.per_radius.iter().map(|s| s.min_max_dist).collect()
    }
}

/// Deterministic quasi-uniform unit vectors; with `halfspace` the last
/// coordinate is nonnegative.
pub fn sphere_points(dim: usize, count: usize, seed: u64, halfspace: bool) -> Vec<Vec<f64>> {
    let mut rng = sampling::rng(seed, 3);
    match dim {
        0 => Vec::new(),
        1 if halfspace => vec![vec![1.0]],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            if halfspace {
                // Closed upper half circle, both endpoints included.
                let steps = count.max(2) - 1;
                (0..=steps)
                    .map(|k| {
                        let a = PI * k as f64 / steps as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect()
            } else {
                let offset: f64 = rng.gen();
                (0..count)
                    .map(|k| {
                        let a = 2.0 * PI * (k as f64 + offset) / count as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect()
            }
        }
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let spin: f64 = rng.gen::<f64>() * 2.0 * PI;
            (0..count)
                .map(|k| {
                    let s = (k as f64 + 0.5) / count as f64;
                    let z = if halfspace { s } else { 1.0 - 2.0 * s };
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let a = spin + golden * k as f64;
                    vec![rho * a.cos(), rho * a.sin(), z]
                })
                .collect()
        }
        _ => (0..count)
            .map(|_| {
                let mut u = sampling::unit_vector(&mut rng, dim);
                if halfspace {
                    let last = u.len() - 1;
                    u[last] = u[last].abs();
                }
                u
            })
            .collect(),
    }
}

/// Scans each sphere `|x| = r` and keeps the point whose pair `(x, m(x))`
/// fits one ray best. A witness exists when every radius fits the budget.
pub fn search_witness<M: CoarseMap + ?Sized>(
    m: &M,
    budget: f64,
    radii: &[f64],
    points_per_sphere: usize,
    seed: u64,
    halfspace: bool,
) -> Result<SearchVerdict, CfppError> {
    if !(budget > 0.0) {
        return Err(CfppError::InvalidBudget(budget));
    }
    if points_per_sphere == 0 {
        return Err(CfppError::NoPoints);
    }
    check_radii(radii)?;
    let dirs = sphere_points(m.dim(), points_per_sphere, seed, halfspace);
    let per_radius = par::try_map(radii, |&r| {
        let mut best: Option<RadiusScan> = None;
        for u in &dirs {
            let x: Vec<f64> = u.iter().map(|c| r * c).collect();
            let fx = m.eval(&x)?;
            let (zeta, d) = best_common_ray(&x, &fx)?;
            if best.as_ref().is_none_or(|b| d < b.min_max_dist) {
                best = Some(RadiusScan { r, min_max_dist: d, x, fx, zeta });
            }
        }
        Ok::<_, CfppError>(best.expect("at least one direction"))
    })?;
    let found = per_radius.iter().all(|s| s.min_max_dist <= budget);
    let witness = found.then(|| RayWitness {
        budget,
        entries: per_radius
            .iter()
            .map(|s| WitnessEntry {
                r: s.r,
                x: s.x.clone(),
                zeta: s.zeta.clone(),
                dx: ray_distance(&s.x, &s.zeta).unwrap(),
                dfx: ray_distance(&s.fx, &s.zeta).unwrap(),
            })
            .collect(),
    });
    Ok(SearchVerdict {
        found,
        budget,
        points_per_sphere,
        halfspace,
        seed,
        witness,
        per_radius,
    })
}

fn check_radii(radii: &[f64]) -> Result<(), CfppError> {
    if radii.is_empty() {
        return Err(CfppError::InvalidRadii("no radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(CfppError::InvalidRadii("radii must be positive".into()));
    }
    if radii.windows(2).any(|p| p[0] >= p[1]) {
        return Err(CfppError::InvalidRadii("radii must be strictly ascending".into()));
    }
    Ok(())
}

/// Re-evaluates every entry: stored and recomputed distances within the
/// budget, `|x| = r`, unit directions, strictly increasing radii.
pub fn verify_witness<M: CoarseMap + ?Sized>(m: &M, w: &RayWitness) -> bool {
    let limit = w.budget * (1.0 + DISTANCE_SLACK) + DISTANCE_SLACK;
    if w.entries.is_empty() || w.entries.windows(2).any(|p| p[0].r >= p[1].r) {
        return false;
    }
    w.entries.iter().all(|e| {
        if e.x.len() != m.dim() || e.zeta.len() != m.dim() {
            return false;
        }
        if (norm(&e.zeta) - 1.0).abs() > 1e-9 || (norm(&e.x) - e.r).abs() > 1e-9 * e.r.max(1.0) {
            return false;
        }
        let Ok(fx) = m.eval(&e.x) else { return false };
        match (ray_distance(&e.x, &e.zeta), ray_distance(&fx, &e.zeta)) {
            (Ok(dx), Ok(dfx)) => [dx, dfx, e.dx, e.dfx].iter().all(|d| *d <= limit),
            _ => false,
        }
    })
}

/// Parses `start:stop:step` into the inclusive ascending list.
pub fn parse_radii(text: &str) -> Result<Vec<f64>, CfppError> {
    let bad = || CfppError::InvalidRadii(format!("expected start:stop:step, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(start > 0.0) || stop < start || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}
