//! Self-checks on a user point set: domination of extreme by star, the
//! BMO/extreme inequality, truncation brackets, and oracle agreement.
//!
//! Evaluators are reached through the [`Evaluator`] trait so a test harness
//! can substitute a deliberately broken engine and confirm the suite notices.

use serde::{Deserialize, Serialize};

use crate::bmo::{self, BmoEstimate};
use crate::discrepancy::{self, DiscrepancyResult};
use crate::error::{Error, Result};
use crate::haar::{self, DyadicIndex, HaarCoefficient};
use crate::oracle::{self, MAX_ORACLE_DIM, MAX_ORACLE_POINTS};
use crate::pointset::PointSet;

pub trait Evaluator {
    fn star_l2(&self, points: &PointSet) -> DiscrepancyResult;
    fn extreme_l2(&self, points: &PointSet) -> DiscrepancyResult;
    fn star_l2_haar(&self, points: &PointSet, max_order: u32) -> Result<DiscrepancyResult>;
    fn extreme_l2_haar(&self, points: &PointSet, max_order: u32) -> Result<DiscrepancyResult>;
    fn bmo_discrepancy(&self, points: &PointSet, max_order: u32, search_level: u32) -> Result<BmoEstimate>;
    fn haar_coefficient(&self, points: &PointSet, index: &DyadicIndex) -> Result<HaarCoefficient>;
}

/// The library's own evaluators.
#[derive(Clone, Copy, Debug, Default)]
pub struct Engine;

impl Evaluator for Engine {
    fn star_l2(&self, points: &PointSet) -> DiscrepancyResult {
        discrepancy::star_l2(points)
    }
    fn extreme_l2(&self, points: &PointSet) -> DiscrepancyResult {
        discrepancy::extreme_l2(points)
    }
    fn star_l2_haar(&self, points: &PointSet, max_order: u32) -> Result<DiscrepancyResult> {
        discrepancy::star_l2_haar(points, max_order)
    }
    fn extreme_l2_haar(&self, points: &PointSet, max_order: u32) -> Result<DiscrepancyResult> {
        discrepancy::extreme_l2_haar(points, max_order)
    }
    fn bmo_discrepancy(&self, points: &PointSet, max_order: u32, search_level: u32) -> Result<BmoEstimate> {
        bmo::bmo_discrepancy(points, max_order, search_level)
    }
    fn haar_coefficient(&self, points: &PointSet, index: &DyadicIndex) -> Result<HaarCoefficient> {
        haar::haar_coefficient(points, index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub max_order: u32,
    pub search_level: u32,
    pub mc_samples: usize,
    pub mc_seed: u64,
    /// Allowed distance from the Monte Carlo estimate, in standard errors.
    pub mc_sigmas: f64,
}

impl VerifyConfig {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            max_order: 16,
            search_level: bmo::default_search_level(dim),
            mc_samples: 100_000,
            mc_seed: 7,
            mc_sigmas: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub dim: usize,
    pub n: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Absolute slack for comparisons of quantities of size `scale` that went
/// through different summation orders.
fn rounding(scale: f64) -> f64 {
    1e-13 * scale.abs().max(f64::MIN_POSITIVE)
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn skipped(name: &str, detail: impl Into<String>) -> Check {
    Check { name: name.into(), status: Status::Skipped, detail: detail.into() }
}

fn errored(name: &str, err: &Error) -> Check {
    match err {
        Error::SearchTooLarge(_) | Error::OracleGuard(_) => skipped(name, err.to_string()),
        _ => check(name, false, err.to_string()),
    }
}

fn initial_values(dim: usize) -> Check {
    let e = discrepancy::extreme_initial(dim);
    let b = bmo::bmo_initial(dim);
    let s = discrepancy::star_initial(dim);
    let ok = e.to_bits() == b.to_bits() && (s * s * 3f64.powi(dim as i32) - 1.0).abs() < 1e-12;
    check("initial_values", ok, format!("extreme {e:e}, bmo {b:e}, star {s:e}"))
}

fn bracket(name: &str, closed: &DiscrepancyResult, truncated: &DiscrepancyResult) -> Check {
    let tail = truncated.tail_bound.unwrap_or(0.0);
    let slack = rounding(closed.squared.max(truncated.squared));
    let lo = truncated.squared - slack;
    let hi = truncated.squared + tail + slack;
    let ok = lo <= closed.squared && closed.squared <= hi;
    check(
        name,
        ok,
        format!("closed {:e} in [{:e}, {:e}] (J = {})", closed.squared, truncated.squared, truncated.squared + tail, truncated.truncation_order.unwrap_or(0)),
    )
}

fn oracle_checks(points: &PointSet, star: &DiscrepancyResult, extreme: &DiscrepancyResult, config: &VerifyConfig) -> Vec<Check> {
    let d = points.dim();
    if d > MAX_ORACLE_DIM {
        return vec![
            skipped("oracle_star", format!("d = {d} exceeds the oracle limit {MAX_ORACLE_DIM}")),
            skipped("oracle_extreme", format!("d = {d} exceeds the oracle limit {MAX_ORACLE_DIM}")),
        ];
    }
    if d == 1 {
        let pair = |name: &str, exact: Result<f64>, closed: f64| match exact {
            Ok(v) => check(name, (v - closed).abs() <= 1e-12, format!("exact {v:e}, closed {closed:e}")),
            Err(e) => errored(name, &e),
        };
        return vec![
            pair("oracle_star", oracle::star_l2_exact_1d(points), star.value),
            pair("oracle_extreme", oracle::extreme_l2_exact_1d(points), extreme.value),
        ];
    }
    let mc = |name: &str, est: Result<(f64, f64)>, closed: f64| match est {
        Ok((mean, se)) => {
            let ok = (mean - closed).abs() <= config.mc_sigmas * se + rounding(closed);
            check(name, ok, format!("mc {mean:e} ± {se:e}, closed {closed:e}"))
        }
        Err(e) => errored(name, &e),
    };
    vec![
        mc("oracle_star", oracle::star_l2_mc(points, config.mc_samples, config.mc_seed), star.squared),
        mc("oracle_extreme", oracle::extreme_l2_mc(points, config.mc_samples, config.mc_seed), extreme.squared),
    ]
}

/// Indices probed by the coefficient spot check: every box containing a
/// point at orders up to 2, plus the first box of each level.
fn spot_indices(points: &PointSet) -> Vec<DyadicIndex> {
    let mut out = Vec::new();
    for levels in haar::levels_up_to(points.dim(), 2, true) {
        let first = DyadicIndex::new(levels.clone(), vec![0; levels.len()]).expect("valid levels");
        out.push(first);
        for x in points.iter() {
            let positions = x
                .iter()
                .zip(&levels)
                .map(|(&v, &j)| if j < 0 { 0 } else { (v * haar::pow2(j)).floor() as u64 })
                .collect();
            out.push(DyadicIndex::new(levels.clone(), positions).expect("valid position"));
        }
    }
    out.sort_by(|a, b| (a.levels(), a.positions()).cmp(&(b.levels(), b.positions())));
    out.dedup();
    out
}

fn coefficient_check(evaluator: &dyn Evaluator, points: &PointSet) -> Check {
    const NAME: &str = "haar_coefficients";
    if points.dim() > MAX_ORACLE_DIM || points.len() > MAX_ORACLE_POINTS {
        return skipped(
            NAME,
            format!("oracle limited to d <= {MAX_ORACLE_DIM}, N <= {MAX_ORACLE_POINTS}"),
        );
    }
    let mut worst = 0.0f64;
    let indices = spot_indices(points);
    for index in &indices {
        let fast = match evaluator.haar_coefficient(points, index) {
            Ok(c) => c.value,
            Err(e) => return errored(NAME, &e),
        };
        let exact = match oracle::exact_haar_coefficient(points, index) {
            Ok(v) => v,
            Err(e) => return errored(NAME, &e),
        };
        worst = worst.max((fast - exact).abs());
    }
    check(NAME, worst <= 1e-12, format!("{} coefficients, max deviation {worst:e}", indices.len()))
}

/// Runs every check. Errors other than size guards count as failures.
pub fn run_checks(evaluator: &dyn Evaluator, points: &PointSet, config: &VerifyConfig) -> VerifyReport {
    let mut checks = vec![initial_values(points.dim())];

    let star = evaluator.star_l2(points);
    let extreme = evaluator.extreme_l2(points);
    let slack = rounding(star.squared);
    checks.push(check(
        "domination",
        star.squared + slack >= extreme.squared,
        format!("star² {:e}, extreme² {:e}", star.squared, extreme.squared),
    ));

    let extreme_haar = evaluator.extreme_l2_haar(points, config.max_order);
    match &extreme_haar {
        Ok(h) => checks.push(bracket("extreme_bracket", &extreme, h)),
        Err(e) => checks.push(errored("extreme_bracket", e)),
    }
    match evaluator.star_l2_haar(points, config.max_order) {
        Ok(h) => checks.push(bracket("star_bracket", &star, &h)),
        Err(e) => checks.push(errored("star_bracket", &e)),
    }

    let search_level = config.search_level.min(config.max_order);
    match (evaluator.bmo_discrepancy(points, config.max_order, search_level), &extreme_haar) {
        (Ok(b), Ok(h)) => checks.push(check(
            "lemma3",
            b.value >= h.value,
            format!("bmo {:e} >= extreme (truncated) {:e}", b.value, h.value),
        )),
        (Err(e), _) => checks.push(errored("lemma3", &e)),
        (_, Err(e)) => checks.push(errored("lemma3", e)),
    }

    checks.extend(oracle_checks(points, &star, &extreme, config));
    checks.push(coefficient_check(evaluator, points));

    VerifyReport { dim: points.dim(), n: points.len(), checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::gen_random;

    struct ShrunkBmo;

    impl Evaluator for ShrunkBmo {
        fn star_l2(&self, p: &PointSet) -> DiscrepancyResult {
            Engine.star_l2(p)
        }
        fn extreme_l2(&self, p: &PointSet) -> DiscrepancyResult {
            Engine.extreme_l2(p)
        }
        fn star_l2_haar(&self, p: &PointSet, j: u32) -> Result<DiscrepancyResult> {
            Engine.star_l2_haar(p, j)
        }
        fn extreme_l2_haar(&self, p: &PointSet, j: u32) -> Result<DiscrepancyResult> {
            Engine.extreme_l2_haar(p, j)
        }
        fn bmo_discrepancy(&self, p: &PointSet, j: u32, l: u32) -> Result<BmoEstimate> {
            let mut b = Engine.bmo_discrepancy(p, j, l)?;
            b.value *= 0.5;
            b.squared *= 0.25;
            Ok(b)
        }
        fn haar_coefficient(&self, p: &PointSet, i: &DyadicIndex) -> Result<HaarCoefficient> {
            Engine.haar_coefficient(p, i)
        }
    }

    #[test]
    fn random_set_passes() {
        let p = gen_random(16, 2, 1).unwrap();
        let r = run_checks(&Engine, &p, &VerifyConfig::for_dim(2));
        for c in &r.checks {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn tampered_bmo_is_caught() {
        let p = gen_random(16, 2, 1).unwrap();
        let r = run_checks(&ShrunkBmo, &p, &VerifyConfig::for_dim(2));
        assert_eq!(r.exit_code(), 1);
        let failed: Vec<&str> = r.failed().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["lemma3"]);
    }

    #[test]
    fn high_dimension_skips_oracles() {
        let p = gen_random(8, 5, 3).unwrap();
        let mut config = VerifyConfig::for_dim(5);
        config.max_order = 8;
        let r = run_checks(&Engine, &p, &config);
        assert_eq!(r.exit_code(), 0);
        let status = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap().status;
        assert_eq!(status("oracle_star"), Status::Skipped);
        assert_eq!(status("haar_coefficients"), Status::Skipped);
        assert_eq!(status("domination"), Status::Pass);
        assert_eq!(status("lemma3"), Status::Pass);
    }

    #[test]
    fn one_dimension_uses_exact_oracles() {
        let p = gen_random(12, 1, 9).unwrap();
        let r = run_checks(&Engine, &p, &VerifyConfig::for_dim(1));
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.checks.iter().find(|c| c.name == "oracle_extreme").unwrap().detail.starts_with("exact"));
    }
}
