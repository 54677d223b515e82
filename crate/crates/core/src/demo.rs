//! Reproduction bundles. Each bundle runs a fixed set of checks and records
//! expected and observed values; reports are deterministic in the seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfpp::{self, CfppError};
use crate::degree::{self, DegreeError, DEFAULT_TEST_POINTS};
use crate::homotopy::{self, linear_homotopy};
use crate::lattice::Window;
use crate::maps::{self, parse_map, MapError, MapSpec, Verdict};

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Cfpp(#[from] CfppError),
    #[error("unknown bundle {0:?} (expected lemma1, lemma2, lemma3 or theorem)")]
    UnknownBundle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bundle {
    Lemma1,
    Lemma2,
    Lemma3,
    Theorem,
}

impl Bundle {
    pub const ALL: [Bundle; 4] = [Bundle::Lemma1, Bundle::Lemma2, Bundle::Lemma3, Bundle::Theorem];
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bundle::Lemma1 => "lemma1",
            Bundle::Lemma2 => "lemma2",
            Bundle::Lemma3 => "lemma3",
            Bundle::Theorem => "theorem",
        })
    }
}

impl FromStr for Bundle {
    type Err = DemoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bundle::ALL
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| DemoError::UnknownBundle(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub bundle: Bundle,
    pub version: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl DemoReport {
    fn new(bundle: Bundle, seed: u64, checks: Vec<Check>) -> Self {
        DemoReport {
            bundle,
            version: crate::VERSION.to_string(),
            seed,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

pub fn run(bundle: Bundle, seed: u64) -> Result<DemoReport, DemoError> {
    let checks = match bundle {
        Bundle::Lemma1 => lemma1(seed)?,
        Bundle::Lemma2 => lemma2(seed)?,
        Bundle::Lemma3 => lemma3(seed)?,
        Bundle::Theorem => theorem(seed)?,
    };
    Ok(DemoReport::new(bundle, seed, checks))
}

fn degree_check(name: String, m: &MapSpec, w: &Window, expected: i64, seed: u64) -> Result<Check, DemoError> {
    let r = degree::degree(m, w, DEFAULT_TEST_POINTS, seed)?;
    let observed = match r.d {
        Some(d) => format!("d={d} stable={}", r.stable),
        None => format!("undetermined: {}", r.reason.unwrap_or_default()),
    };
    Ok(Check {
        name,
        expected: format!("d={expected} stable=true"),
        pass: r.d == Some(expected) && r.stable,
        observed,
    })
}

/// Every coordinate reflection has degree -1.
fn lemma1(seed: u64) -> Result<Vec<Check>, DemoError> {
    let mut checks = Vec::new();
    for n in 1..=3 {
        let w = Window::new(n, 8);
        for i in 0..n {
            let m = MapSpec::reflection(n, i)?;
            checks.push(degree_check(format!("reflect({i}) on R^{n}"), &m, &w, -1, seed)?);
        }
    }
    Ok(checks)
}

/// The antipodal map of R^m has degree (-1)^m, and so does the composition
/// of the m coordinate reflections.
fn lemma2(seed: u64) -> Result<Vec<Check>, DemoError> {
    let mut checks = Vec::new();
    for m in 1..=3usize {
        let w = Window::new(m, 8);
        let sign = if m % 2 == 0 { 1 } else { -1 };
        checks.push(degree_check(format!("antipodal on R^{m}"), &MapSpec::antipodal(m), &w, sign, seed)?);
        let parts = (0..m).map(|i| MapSpec::reflection(m, i)).collect::<Result<Vec<_>, _>>()?;
        let composed = MapSpec::composition(parts)?;
        checks.push(degree_check(format!("{composed} on R^{m}"), &composed, &w, sign, seed)?);
    }
    Ok(checks)
}

/// Maps used for the triangle bound.
pub fn triangle_zoo() -> Vec<MapSpec> {
    [
        "identity",
        "antipodal",
        "reflect(0)",
        "rotate(1.5707963267948966)",
        "rotate(0.5)",
        "translate(5,0)",
        "translate(-3,7)",
        "scale(2)",
        "scale(0.5)",
    ]
    .iter()
    .map(|s| parse_map(s, 2).expect("zoo entries parse"))
    .collect()
}

fn lemma3(seed: u64) -> Result<Vec<Check>, DemoError> {
    let mut checks = Vec::new();
    let w = Window::new(2, 32);
    for h in triangle_zoo() {
        for t in [1.0, 2.0] {
            let tb = homotopy::triangle_bound_check(&h, t, &w, 10_000, seed)?;
            let bad = tb.violations.len() + tb.step_violations.len();
            checks.push(Check {
                name: format!("triangle bound {h}, T={t}"),
                expected: "0 violations".into(),
                observed: format!(
                    "{bad} violations, tested={} K={:.6} C={:.6}",
                    tb.tested, tb.growth, tb.c
                ),
                pass: bad == 0,
            });
        }
    }

    let ladder: Vec<Window> = [4, 8, 16].iter().map(|&l| Window::new(2, l)).collect();
    let grid = homotopy::uniform_t_grid(16);
    for (h, expected) in [
        (MapSpec::antipodal(2), Verdict::ProperAtScale),
        (MapSpec::identity(2), Verdict::Suspect),
    ] {
        let rep = homotopy::check_uniformly_proper(&linear_homotopy(h.clone()), 1.0, &ladder, &grid)?;
        let maxima: Vec<String> = rep
            .rungs
            .iter()
            .map(|r| r.max_preimage_norm.map_or("none".into(), |v| format!("{v:.4}")))
            .collect();
        checks.push(Check {
            name: format!("uniform properness of the homotopy to {h}"),
            expected: format!("{expected:?}"),
            observed: format!("{:?} (rung maxima {})", rep.verdict, maxima.join(", ")),
            pass: rep.verdict == expected,
        });
    }

    // Rotation by a right angle: no witness at budget 10, yet degree +1.
    let rot = MapSpec::rotation(2, PI / 2.0, 0, 1)?;
    let radii = cfpp::parse_radii("10:200:10")?;
    let v = cfpp::search_witness(&rot, 10.0, &radii, 256, seed, false)?;
    let worst = v
        .per_radius
        .iter()
        .map(|s| (s.min_max_dist / (s.r * (PI / 4.0).sin()) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "rotation by pi/2 refuted at budget 10".into(),
        expected: "not found, minima within 5% of r sin(pi/4)".into(),
        observed: format!("found={} max relative deviation {worst:.2e}", v.found),
        pass: !v.found && worst <= 0.05,
    });
    checks.push(degree_check("rotation by pi/2 degree".into(), &rot, &Window::new(2, 8), 1, seed)?);
    Ok(checks)
}

/// Half-plane self-maps of R x [0, inf) used for the fold pipeline.
pub fn theorem_zoo(seed: u64) -> Vec<MapSpec> {
    let mut zoo: Vec<MapSpec> = ["identity", "translate(1,0)", "shear(1)", "(x1+1, abs(x2)+1)", "scale(2)"]
        .iter()
        .map(|s| parse_map(s, 2).expect("zoo entries parse"))
        .collect();
    let noisy = MapSpec::perturbation(MapSpec::identity(2), 1.0, seed).expect("valid perturbation");
    let lift = parse_map("(x1, abs(x2))", 2).expect("zoo entries parse");
    zoo.push(MapSpec::composition(vec![noisy, lift]).expect("same dimension"));
    zoo
}

/// Budget `4 spacing + S(1)` from the sampled modulus of `g`.
pub fn theorem_budget(g: &MapSpec, w: &Window, seed: u64) -> Result<f64, MapError> {
    let s = maps::estimate_bornologous_modulus(g, &[1.0], w, 256, seed)?;
    Ok(4.0 * w.spacing + s.samples[0].s)
}

fn theorem(seed: u64) -> Result<Vec<Check>, DemoError> {
    let mut checks = Vec::new();
    let w = Window::new(2, 16);
    let radii = cfpp::parse_radii("10:100:10")?;
    for f in theorem_zoo(seed) {
        let g = maps::fold_to_full_space(f.clone())?;
        checks.push(degree_check(format!("fold of {f}"), &g, &w, 0, seed)?);
        let budget = theorem_budget(&g, &w, seed)?;
        let v = cfpp::search_witness(&g, budget, &radii, 256, seed, false)?;
        let verified = v.witness.as_ref().is_some_and(|wit| cfpp::verify_witness(&g, wit));
        let worst = v.per_radius.iter().map(|s| s.min_max_dist).fold(0.0, f64::max);
        checks.push(Check {
            name: format!("witness for fold of {f}"),
            expected: format!("found and verified, budget {budget:.4}"),
            observed: format!("found={} verified={verified} max ray distance {worst:.4}", v.found),
            pass: v.found && verified,
        });
    }
    Ok(checks)
}
