//! Curse-of-dimensionality lower bounds for the inverse of the BMO and
//! extreme L2 discrepancies, an empirical search for achievable point counts,
//! and Roth-type comparison tables.
//!
//! `N_•(ε, d)` is the least `N` for which some `N`-point set has discrepancy at
//! most `ε` times the discrepancy of the empty set. For both measures the
//! initial value is `12^{-d/2}`, and
//!
//! ```text
//! N_BMO(ε, d) ≥ N_extr(ε, d) ≥ (9/4)^d (1 − ε²) ≥ (4/3)^d (1 − ε²).
//! ```

use serde::{Deserialize, Serialize};

use crate::bmo::{bmo_discrepancy, bmo_initial};
use crate::discrepancy::{extreme_initial, extreme_l2, star_initial, star_l2, Measure};
use crate::error::{Error, Result};
use crate::pointset::{Family, PointSet};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(())
}

/// `(4/3)^d (1 − ε²)`.
pub fn curse_lower_bound_bmo(epsilon: f64, dim: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_dim(dim)?;
    Ok((dim as f64 * (4.0f64 / 3.0).ln()).exp() * (1.0 - epsilon * epsilon))
}

/// `(9/4)^d (1 − ε²)`.
pub fn curse_lower_bound_extreme(epsilon: f64, dim: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_dim(dim)?;
    Ok((dim as f64 * 2.25f64.ln()).exp() * (1.0 - epsilon * epsilon))
}

/// Evaluation settings for the BMO proxy in searches and tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmoSettings {
    pub truncation_order: u32,
    pub search_level: u32,
}

impl Default for BmoSettings {
    fn default() -> Self {
        Self { truncation_order: 12, search_level: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseSearchConfig {
    pub epsilon: f64,
    pub dim: usize,
    pub measure: Measure,
    pub family: Family,
    pub n_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub bmo: BmoSettings,
}

/// One tested point count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub n: usize,
    pub best_value: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseSearch {
    /// Smallest tested `N` with a set reaching `ε · initial`.
    pub n: Option<usize>,
    pub threshold: f64,
    /// True for the BMO proxy, whose values are only lower bounds.
    pub heuristic: bool,
    pub probes: Vec<Probe>,
}

fn initial_value(measure: Measure, dim: usize) -> f64 {
    match measure {
        Measure::StarL2 => star_initial(dim),
        Measure::ExtremeL2 => extreme_initial(dim),
        Measure::BmoLower => bmo_initial(dim),
    }
}

fn measure_value(measure: Measure, points: &PointSet, bmo: BmoSettings) -> Result<f64> {
    Ok(match measure {
        Measure::StarL2 => star_l2(points).value,
        Measure::ExtremeL2 => extreme_l2(points).value,
        Measure::BmoLower => bmo_discrepancy(points, bmo.truncation_order, bmo.search_level)?.value,
    })
}

fn restart_seed(seed: u64, n: usize, restart: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 20) ^ restart as u64
}

/// Candidate sets for one point count: the family's own set, plus
/// `restarts` random sets.
fn candidates(config: &InverseSearchConfig, n: usize) -> Result<Vec<PointSet>> {
    let mut out = Vec::new();
    match config.family {
        Family::Random => {}
        other => out.push(other.generate(n, config.dim, config.seed)?),
    }
    let random_sets = if config.family == Family::Random { config.restarts.max(1) } else { config.restarts };
    for r in 0..random_sets {
        out.push(Family::Random.generate(n, config.dim, restart_seed(config.seed, n, r))?);
    }
    Ok(out)
}

fn probe(config: &InverseSearchConfig, n: usize, threshold: f64) -> Result<Probe> {
    let mut best = f64::INFINITY;
    for set in candidates(config, n)? {
        best = best.min(measure_value(config.measure, &set, config.bmo)?);
    }
    Ok(Probe { n, best_value: best, feasible: best <= threshold })
}

/// Doubling then bisection over `N`, keeping the best of the candidate sets
/// at each `N`. For star and extreme L2 the answer is an upper bound on
/// `N_•(ε, d)`; for the BMO proxy it is only indicative.
pub fn empirical_inverse(config: &InverseSearchConfig) -> Result<InverseSearch> {
    check_epsilon(config.epsilon)?;
    check_dim(config.dim)?;
    if config.n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let threshold = config.epsilon * initial_value(config.measure, config.dim);
    let mut probes = Vec::new();

    let mut last_infeasible = 0usize;
    let mut feasible_at = None;
    let mut n = 1usize;
    loop {
        let p = probe(config, n, threshold)?;
        let ok = p.feasible;
        probes.push(p);
        if ok {
            feasible_at = Some(n);
            break;
        }
        last_infeasible = n;
        if n == config.n_max {
            break;
        }
        n = (2 * n).min(config.n_max);
    }

    let Some(mut hi) = feasible_at else {
        return Ok(InverseSearch {
            n: None,
            threshold,
            heuristic: config.measure == Measure::BmoLower,
            probes,
        });
    };
    let mut lo = last_infeasible;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let p = probe(config, mid, threshold)?;
        let ok = p.feasible;
        probes.push(p);
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(InverseSearch {
        n: Some(hi),
        threshold,
        heuristic: config.measure == Measure::BmoLower,
        probes,
    })
}

/// Lower bounds together with an optional empirical upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseBoundReport {
    pub epsilon: f64,
    pub dim: usize,
    pub bmo_lower: f64,
    pub extreme_lower: f64,
    pub measure: Measure,
    pub empirical_upper: Option<usize>,
    pub family: Family,
    pub heuristic: bool,
    pub notes: Vec<String>,
}

pub fn inverse_report(config: &InverseSearchConfig) -> Result<InverseBoundReport> {
    let bmo_lower = curse_lower_bound_bmo(config.epsilon, config.dim)?;
    let extreme_lower = curse_lower_bound_extreme(config.epsilon, config.dim)?;
    let search = empirical_inverse(config)?;
    let mut notes = vec![format!(
        "lower bounds: N_BMO >= (4/3)^d (1 - eps^2) = {bmo_lower:.6}, N_extr >= (9/4)^d (1 - eps^2) = {extreme_lower:.6}"
    )];
    match (config.measure, search.n) {
        (Measure::BmoLower, _) => notes.push(
            "BMO values are certified lower bounds only; feasibility at eps * initial is heuristic".into(),
        ),
        (_, Some(n)) => notes.push(format!("a {n}-point set reaches eps * initial: N_inv <= {n}")),
        (_, None) => notes.push(format!("no tested set up to n_max = {} reached eps * initial", config.n_max)),
    }
    Ok(InverseBoundReport {
        epsilon: config.epsilon,
        dim: config.dim,
        bmo_lower,
        extreme_lower,
        measure: config.measure,
        empirical_upper: search.n,
        family: config.family,
        heuristic: search.heuristic,
        notes,
    })
}

/// One row of the curse table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurseRow {
    pub dim: usize,
    pub bmo_lower: f64,
    pub extreme_lower: f64,
    pub initial_bmo: f64,
    pub initial_extreme: f64,
    pub initial_star: f64,
}

pub fn curse_table(epsilon: f64, dmax: usize) -> Result<Vec<CurseRow>> {
    check_dim(dmax)?;
    (1..=dmax)
        .map(|d| {
            Ok(CurseRow {
                dim: d,
                bmo_lower: curse_lower_bound_bmo(epsilon, d)?,
                extreme_lower: curse_lower_bound_extreme(epsilon, d)?,
                initial_bmo: bmo_initial(d),
                initial_extreme: extreme_initial(d),
                initial_star: star_initial(d),
            })
        })
        .collect()
}

/// `(1 + ln N)^{(d-1)/2} / N`.
pub fn roth_shape(dim: usize, n: usize) -> f64 {
    (1.0 + (n as f64).ln()).powf((dim as f64 - 1.0) / 2.0) / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RothRow {
    pub n: usize,
    pub extreme_l2: f64,
    pub bmo_lower: f64,
    pub shape: f64,
    /// `extreme_l2 / shape`, an empirical upper estimate of the constant.
    pub extreme_ratio: f64,
    pub bmo_ratio: f64,
}

pub fn roth_curve(dim: usize, n_list: &[usize], family: Family, seed: u64, bmo: BmoSettings) -> Result<Vec<RothRow>> {
    check_dim(dim)?;
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("point counts must be positive".into()));
            }
            let set = family.generate(n, dim, seed)?;
            let extreme = extreme_l2(&set).value;
            let bmo_lower = bmo_discrepancy(&set, bmo.truncation_order, bmo.search_level)?.value;
            let shape = roth_shape(dim, n);
            Ok(RothRow {
                n,
                extreme_l2: extreme,
                bmo_lower,
                shape,
                extreme_ratio: extreme / shape,
                bmo_ratio: bmo_lower / shape,
            })
        })
        .collect()
}
