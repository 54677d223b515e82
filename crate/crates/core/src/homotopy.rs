//! Coarse homotopies: the linear homotopy from the antipodal map, sampled
//! checks for the three uniform conditions, and the similar-triangle bound
//! `dist(h(x), ray(x)) <= 2(1 + K) T`.
//!
//! Conditions quantified over all of space or all open neighborhoods are
//! measured on finite windows and finite `t`-grids; reports carry both.

use serde::{Deserialize, Serialize};

use crate::cfpp::ray_distance;
use crate::lattice::Window;
use crate::maps::{
    self, check_ladder, ladder_verdict, rung_samples, rung_tolerance, CoarseMap, MapError, MapSpec,
    ModulusSample, PropernessRung, Verdict,
};
use crate::par;
use crate::sampling::{self, dist, norm};

/// A one-parameter family `t -> H_t` for `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HomotopyFamily {
    /// `H_t(x) = t h(x) - (1 - t) x`.
    Linear(MapSpec),
    /// Pointwise linear interpolation between `(t, map)` knots, sorted by `t`.
    /// Outside the knot range the end knots apply.
    Generic(Vec<(f64, MapSpec)>),
}

impl HomotopyFamily {
    pub fn generic(mut knots: Vec<(f64, MapSpec)>) -> Result<Self, MapError> {
        if knots.is_empty() {
            return Err(MapError::InvalidSpec("a homotopy needs at least one knot".into()));
        }
        let dim = knots[0].1.dim();
        if let Some((_, m)) = knots.iter().find(|(_, m)| m.dim() != dim) {
            return Err(MapError::DimensionMismatch { expected: dim, got: m.dim() });
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(HomotopyFamily::Generic(knots))
    }

    pub fn dim(&self) -> usize {
        match self {
            HomotopyFamily::Linear(h) => h.dim(),
            HomotopyFamily::Generic(k) => k[0].1.dim(),
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, MapError> {
        match self {
            HomotopyFamily::Linear(h) => {
                let hx = h.evaluate(x)?;
                if t == 1.0 {
                    return Ok(hx);
                }
                // -x + t (h(x) + x): exact at t = 0 and t-independent when h = -x.
                Ok(hx.iter().zip(x).map(|(a, b)| -b + t * (a + b)).collect())
            }
            HomotopyFamily::Generic(knots) => {
                let first = &knots[0];
                let last = &knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1.evaluate(x);
                }
                if t >= last.0 {
                    return last.1.evaluate(x);
                }
                let i = knots.iter().rposition(|(s, _)| *s <= t).unwrap();
                let (t0, m0) = &knots[i];
                let (t1, m1) = &knots[i + 1];
                let s = (t - t0) / (t1 - t0);
                let (a, b) = (m0.evaluate(x)?, m1.evaluate(x)?);
                Ok(a.iter().zip(&b).map(|(p, q)| (1.0 - s) * p + s * q).collect())
            }
        }
    }

    /// The map `H_t`.
    pub fn at(&self, t: f64) -> Slice<'_> {
        Slice { family: self, t }
    }
}

pub struct Slice<'a> {
    family: &'a HomotopyFamily,
    t: f64,
}

impl CoarseMap for Slice<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn eval(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        self.family.eval(self.t, p)
    }
}

/// The straight-line homotopy from the antipodal map (`t = 0`) to `h`
/// (`t = 1`).
pub fn linear_homotopy(h: MapSpec) -> HomotopyFamily {
    HomotopyFamily::Linear(h)
}

/// `steps + 1` equally spaced knots on `[0, 1]`.
pub fn uniform_t_grid(steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

fn check_t_grid(t_grid: &[f64], min_len: usize) -> Result<(), MapError> {
    if t_grid.len() < min_len {
        return Err(MapError::InvalidSpec(format!("t-grid needs at least {min_len} knot(s)")));
    }
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) || t_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(MapError::InvalidSpec("t-grid must be ascending within [0, 1]".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformModulus {
    pub samples: Vec<ModulusSample>,
    pub t_grid: Vec<f64>,
    pub window: Window,
    pub pairs_per_radius: usize,
    pub seed: u64,
}

/// `S(R) = max_t S_t(R)`; every `H_t` sees the same seeded pairs.
pub fn check_uniformly_bornologous(
    fam: &HomotopyFamily,
    radii: &[f64],
    t_grid: &[f64],
    w: &Window,
    pairs_per_radius: usize,
    seed: u64,
) -> Result<UniformModulus, MapError> {
    check_t_grid(t_grid, 1)?;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|p| p[0] >= p[1]) {
        return Err(MapError::InvalidSpec("radii must be nonempty, positive and ascending".into()));
    }
    let mut running = 0.0f64;
    let mut samples = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        for &t in t_grid {
            let s = maps::sampled_stretch(&fam.at(t), r, w, pairs_per_radius, seed, k as u64)?;
            running = running.max(s);
        }
        samples.push(ModulusSample { r, s: running });
    }
    Ok(UniformModulus {
        samples,
        t_grid: t_grid.to_vec(),
        window: *w,
        pairs_per_radius,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformProperness {
    #[serde(rename = "T")]
    pub ball_radius: f64,
    pub t_grid: Vec<f64>,
    pub rungs: Vec<PropernessRung>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Largest `|x|` over sampled `x` and grid `t` with `|H_t(x)| <= T`, per
/// rung. The verdict uses the same stabilization rule as
/// [`maps::check_properness`].
pub fn check_uniformly_proper(
    fam: &HomotopyFamily,
    ball_radius: f64,
    window_ladder: &[Window],
    t_grid: &[f64],
) -> Result<UniformProperness, MapError> {
    check_t_grid(t_grid, 1)?;
    check_ladder(window_ladder)?;
    let mut rungs = Vec::with_capacity(window_ladder.len());
    for w in window_ladder {
        let pts = rung_samples(w);
        let hits = par::try_map(&pts, |x| {
            for &t in t_grid {
                if norm(&fam.eval(t, x)?) <= ball_radius {
                    return Ok(Some(norm(x)));
                }
            }
            Ok::<_, MapError>(None)
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
    Ok(UniformProperness {
        ball_radius,
        t_grid: t_grid.to_vec(),
        verdict: ladder_verdict(&maxima, tolerance),
        rungs,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pseudocontinuity {
    /// Largest jump between adjacent knots.
    #[serde(rename = "R")]
    pub max_jump: f64,
    pub grid_step: f64,
    /// The same measurement on the grid with midpoints inserted.
    pub max_jump_half_step: f64,
    /// True when refining the grid did not increase the jump.
    pub refines: bool,
    pub t_grid: Vec<f64>,
    pub window: Window,
    pub seed: u64,
    pub samples: usize,
}

fn max_adjacent_jump(fam: &HomotopyFamily, t_grid: &[f64], pts: &[Vec<f64>]) -> Result<f64, MapError> {
    let per_point = par::try_map(pts, |x| {
        let images = t_grid.iter().map(|&t| fam.eval(t, x)).collect::<Result<Vec<_>, _>>()?;
        Ok::<_, MapError>(images.windows(2).map(|p| dist(&p[0], &p[1])).fold(0.0, f64::max))
    })?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Max over sampled `x` and adjacent knots `t, t'` of `d(H_t(x), H_t'(x))`,
/// plus the same on the grid refined by midpoints.
pub fn check_pseudocontinuity(
    fam: &HomotopyFamily,
    t_grid: &[f64],
    w: &Window,
    seed: u64,
) -> Result<Pseudocontinuity, MapError> {
    check_t_grid(t_grid, 2)?;
    let mut pts = sampling::lattice_world_points(w);
    pts.extend(sampling::uniform_in_window(w, 1024, seed, 2));
    let max_jump = max_adjacent_jump(fam, t_grid, &pts)?;
    let mut fine = Vec::with_capacity(2 * t_grid.len());
    for p in t_grid.windows(2) {
        fine.push(p[0]);
        fine.push(0.5 * (p[0] + p[1]));
    }
    fine.push(*t_grid.last().unwrap());
    let max_jump_half_step = max_adjacent_jump(fam, &fine, &pts)?;
    let grid_step = t_grid.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    Ok(Pseudocontinuity {
        max_jump,
        grid_step,
        max_jump_half_step,
        refines: max_jump_half_step <= max_jump * (1.0 + 1e-12) + 1e-12,
        t_grid: t_grid.to_vec(),
        window: *w,
        seed,
        samples: pts.len(),
    })
}

fn growth_over(h: &MapSpec, pts: &[Vec<f64>]) -> Result<f64, MapError> {
    let ratios = par::try_map(pts, |x| Ok::<_, MapError>(norm(&h.evaluate(x)?) / norm(x).max(1.0)))?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Smallest `K` with `|h(x)| <= K max(|x|, 1)` over the lattice points of `w`
/// and `samples` seeded uniform points.
pub fn growth_constant(h: &MapSpec, w: &Window, samples: usize, seed: u64) -> Result<f64, MapError> {
    let mut pts = sampling::lattice_world_points(w);
    pts.extend(sampling::uniform_in_window(w, samples, seed, 1));
    growth_over(h, &pts)
}

/// Point of the segment `[a, b]` closest to the origin.
fn closest_to_origin(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let dd = sampling::dot(&d, &d);
    if dd == 0.0 {
        return a.to_vec();
    }
    let s = (-sampling::dot(a, &d) / dd).clamp(0.0, 1.0);
    a.iter().zip(&d).map(|(x, y)| x + s * y).collect()
}

/// Whether the closed segment `[a, b]` meets the closed ball `B(0, T)`.
pub fn segment_meets_ball(a: &[f64], b: &[f64], ball_radius: f64) -> bool {
    norm(&closest_to_origin(a, b)) <= ball_radius
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub x: Vec<f64>,
    pub hx: Vec<f64>,
    /// The measured quantity that broke its bound.
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleBound {
    #[serde(rename = "T")]
    pub ball_radius: f64,
    #[serde(rename = "K")]
    pub growth: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Samples with `|x| >= 2T` whose segment `[-x, h(x)]` meets the ball.
    pub tested: usize,
    pub samples: usize,
    /// `dist(h(x), ray(x)) > C T`.
    pub violations: Vec<TriangleViolation>,
    /// `d(-x, p) < |x| / 2` for the segment point `p` nearest the origin.
    pub step_violations: Vec<TriangleViolation>,
    pub window: Window,
    pub seed: u64,
}

/// Relative slack for floating-point comparisons against the bounds.
const BOUND_SLACK: f64 = 1e-9;

/// Checks `dist(h(x), ray(x)) <= 2(1 + K) T` for every sampled `x` with
/// `|x| >= 2T` whose segment `[-x, h(x)]` meets `B(0, T)`.
///
/// `K` is measured over the window lattice and the same samples, so it
/// bounds every tested point.
pub fn triangle_bound_check(
    h: &MapSpec,
    ball_radius: f64,
    w: &Window,
    num_samples: usize,
    seed: u64,
) -> Result<TriangleBound, MapError> {
    if !(ball_radius > 0.0) {
        return Err(MapError::InvalidSpec("ball radius must be positive".into()));
    }
    let samples = sampling::uniform_in_window(w, num_samples, seed, 1);
    let mut all = sampling::lattice_world_points(w);
    all.extend(samples.iter().cloned());
    let growth = growth_over(h, &all)?;
    let c = 2.0 * (1.0 + growth);
    let bound = c * ball_radius;

    type Outcome = Option<(Option<TriangleViolation>, Option<TriangleViolation>)>;
    let outcomes: Vec<Outcome> = par::try_map(&samples, |x| {
        let r = norm(x);
        if r < 2.0 * ball_radius {
            return Ok(None);
        }
        let hx = h.evaluate(x)?;
        let minus_x: Vec<f64> = x.iter().map(|v| -v).collect();
        let p = closest_to_origin(&minus_x, &hx);
        if norm(&p) > ball_radius {
            return Ok(None);
        }
        let zeta: Vec<f64> = x.iter().map(|v| v / r).collect();
        let rd = ray_distance(&hx, &zeta).expect("nonzero direction");
        let ray_violation = (rd > bound * (1.0 + BOUND_SLACK) + BOUND_SLACK).then(|| TriangleViolation {
            x: x.clone(),
            hx: hx.clone(),
            value: rd,
            bound,
        });
        let leg = dist(&minus_x, &p);
        let step_violation = (leg < 0.5 * r * (1.0 - BOUND_SLACK)).then(|| TriangleViolation {
            x: x.clone(),
            hx: hx.clone(),
            value: leg,
            bound: 0.5 * r,
        });
        Ok::<_, MapError>(Some((ray_violation, step_violation)))
    })?;
    let tested = outcomes.iter().filter(|o| o.is_some()).count();
    let (violations, step_violations): (Vec<_>, Vec<_>) = outcomes.into_iter().flatten().unzip();
    Ok(TriangleBound {
        ball_radius,
        growth,
        c,
        tested,
        samples: num_samples,
        violations: violations.into_iter().flatten().collect(),
        step_violations: step_violations.into_iter().flatten().collect(),
        window: *w,
        seed,
    })
}

/// Settings for [`run_homotopy_checks`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyConfig {
    pub radii: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub window: Window,
    pub ladder: Vec<Window>,
    #[serde(rename = "T")]
    pub ball_radius: f64,
    pub pairs_per_radius: usize,
    pub triangle_samples: usize,
    pub seed: u64,
}

impl HomotopyConfig {
    pub fn new(dim: usize) -> Self {
        HomotopyConfig {
            radii: vec![0.5, 1.0, 2.0, 4.0],
            t_grid: uniform_t_grid(16),
            window: Window::new(dim, 16),
            ladder: [4, 8, 16].iter().map(|&l| Window::new(dim, l)).collect(),
            ball_radius: 1.0,
            pairs_per_radius: 256,
            triangle_samples: 10_000,
            seed: 0,
        }
    }
}

/// The three uniform conditions for `linear_homotopy(h)` and the triangle
/// bound for `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub map: String,
    pub uniformly_bornologous: UniformModulus,
    pub uniformly_proper: UniformProperness,
    pub pseudocontinuity: Pseudocontinuity,
    pub triangle: TriangleBound,
}

pub fn run_homotopy_checks(h: &MapSpec, cfg: &HomotopyConfig) -> Result<HomotopyReport, MapError> {
    let fam = linear_homotopy(h.clone());
    Ok(HomotopyReport {
        map: h.to_string(),
        uniformly_bornologous: check_uniformly_bornologous(
            &fam,
            &cfg.radii,
            &cfg.t_grid,
            &cfg.window,
            cfg.pairs_per_radius,
            cfg.seed,
        )?,
        uniformly_proper: check_uniformly_proper(&fam, cfg.ball_radius, &cfg.ladder, &cfg.t_grid)?,
        pseudocontinuity: check_pseudocontinuity(&fam, &cfg.t_grid, &cfg.window, cfg.seed)?,
        triangle: triangle_bound_check(h, cfg.ball_radius, &cfg.window, cfg.triangle_samples, cfg.seed)?,
    })
}
