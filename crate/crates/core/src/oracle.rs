//! Brute-force reference computations.
//!
//! Nothing here shares code with [`crate::haar`] or [`crate::discrepancy`]
//! beyond the point-set type, so agreement between the two is evidence for
//! both.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::DyadicIndex;
use crate::pointset::PointSet;
use crate::sum::{compensated_sum, NeumaierSum};

pub const MAX_ORACLE_DIM: usize = 3;
pub const MAX_ORACLE_POINTS: usize = 16;
pub const MAX_ORACLE_ORDER: u32 = 12;

/// `|P ∩ [lower, upper)| / N − λ_d([lower, upper))`; for the empty set only
/// the volume term remains.
pub fn local_discrepancy(points: &PointSet, lower: &[f64], upper: &[f64]) -> Result<f64> {
    let d = points.dim();
    if lower.len() != d || upper.len() != d {
        return Err(Error::InvalidArgument(format!("box corners must have {d} coordinates")));
    }
    for (&a, &b) in lower.iter().zip(upper) {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::InvalidArgument(format!("malformed box side [{a}, {b})")));
        }
    }
    let volume: f64 = lower.iter().zip(upper).map(|(a, b)| b - a).product();
    if points.is_empty() {
        return Ok(-volume);
    }
    let inside = points
        .iter()
        .filter(|x| x.iter().zip(lower.iter().zip(upper)).all(|(&x, (&a, &b))| a <= x && x < b))
        .count();
    Ok(inside as f64 / points.len() as f64 - volume)
}

/// `⟨Δ_P([0,·)), h_{j,m}⟩` by splitting the support into cells on which the
/// counting term is constant and the Haar function has one sign, then
/// integrating `count/N − Π t_i` exactly on each cell.
pub fn exact_haar_coefficient(points: &PointSet, index: &DyadicIndex) -> Result<f64> {
    let d = points.dim();
    if d != index.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if d > MAX_ORACLE_DIM || points.len() > MAX_ORACLE_POINTS || index.order() > MAX_ORACLE_ORDER {
        return Err(Error::OracleGuard(format!(
            "need d <= {MAX_ORACLE_DIM}, N <= {MAX_ORACLE_POINTS}, |j| <= {MAX_ORACLE_ORDER}; got d = {d}, N = {}, |j| = {}",
            points.len(),
            index.order()
        )));
    }

    // per coordinate: breakpoints across the support, and the sign-change point
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut mids: Vec<Option<f64>> = Vec::with_capacity(d);
    for (i, (&j, &m)) in index.levels().iter().zip(index.positions()).enumerate() {
        let (lo, hi, mid) = if j < 0 {
            (0.0, 1.0, None)
        } else {
            let len = 1.0 / (1u64 << j) as f64;
            let lo = m as f64 * len;
            (lo, lo + len, Some(lo + len / 2.0))
        };
        let mut g = vec![lo, hi];
        g.extend(mid);
        g.extend(points.iter().map(|x| x[i]).filter(|&c| lo < c && c < hi));
        g.sort_by(f64::total_cmp);
        g.dedup();
        grids.push(g);
        mids.push(mid);
    }

    let n = points.len();
    let mut total = NeumaierSum::new();
    let mut cell = vec![0usize; d];
    loop {
        let mut sign = 1.0;
        let mut vol = 1.0;
        let mut moment = 1.0;
        let mut lows = Vec::with_capacity(d);
        for i in 0..d {
            let l = grids[i][cell[i]];
            let u = grids[i][cell[i] + 1];
            if let Some(c) = mids[i] {
                if l >= c {
                    sign = -sign;
                }
            }
            vol *= u - l;
            moment *= (u - l) * (u + l) / 2.0;
            lows.push(l);
        }
        let counting = if n == 0 {
            0.0
        } else {
            let count = points.iter().filter(|x| x.iter().zip(&lows).all(|(&x, &l)| x <= l)).count();
            count as f64 / n as f64 * vol
        };
        total += sign * (counting - moment);

        // odometer over cells
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(total.value());
            }
            cell[axis] += 1;
            if cell[axis] + 1 < grids[axis].len() {
                break;
            }
            cell[axis] = 0;
            axis += 1;
        }
    }
}

fn require_1d(points: &PointSet) -> Result<Vec<f64>> {
    if points.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "one-dimensional oracle called with d = {}",
            points.dim()
        )));
    }
    let mut xs: Vec<f64> = points.iter().map(|x| x[0]).collect();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// Star L2 discrepancy for `d = 1`: between consecutive order statistics
/// `Δ(t) = k/N − t`, integrated exactly.
pub fn star_l2_exact_1d(points: &PointSet) -> Result<f64> {
    let xs = require_1d(points)?;
    let n = xs.len();
    let mut breaks = Vec::with_capacity(n + 2);
    breaks.push(0.0);
    breaks.extend(&xs);
    breaks.push(1.0);
    let mut acc = NeumaierSum::new();
    for k in 0..=n {
        let (l, u) = (breaks[k], breaks[k + 1]);
        let len = u - l;
        let level = if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let offset = level - (l + u) / 2.0;
        acc += len * (offset * offset + len * len / 12.0);
    }
    Ok(acc.value().sqrt())
}

/// Extreme L2 discrepancy for `d = 1`, integrating `(c − (y − x))²` over the
/// rectangles and triangles cut out of `{x ≤ y}` by the order statistics.
pub fn extreme_l2_exact_1d(points: &PointSet) -> Result<f64> {
    let xs = require_1d(points)?;
    let n = xs.len();
    let mut breaks = Vec::with_capacity(n + 2);
    breaks.push(0.0);
    breaks.extend(&xs);
    breaks.push(1.0);
    let inv_n = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let mut acc = NeumaierSum::new();
    for a in 0..=n {
        let (x0, x1) = (breaks[a], breaks[a + 1]);
        let wx = x1 - x0;
        // x and y in the same gap: no point in [x, y)
        acc += wx.powi(4) / 12.0;
        for b in a + 1..=n {
            let (y0, y1) = (breaks[b], breaks[b + 1]);
            let wy = y1 - y0;
            // x in gap a, y in gap b: points a+1..=b lie in [x, y)
            let c = (b - a) as f64 * inv_n;
            let offset = c + (x0 + x1) / 2.0 - (y0 + y1) / 2.0;
            acc += wx * wy * (offset * offset + wx * wx / 12.0 + wy * wy / 12.0);
        }
    }
    Ok(acc.value().sqrt())
}

const MC_CHUNK: usize = 4096;

/// Monte Carlo estimate of a squared discrepancy with its standard error.
/// Samples are drawn in fixed-size chunks, chunk `k` from ChaCha8 stream `k`,
/// so the result does not depend on the thread count.
fn monte_carlo(
    samples: usize,
    seed: u64,
    sample: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::InvalidArgument("Monte Carlo oracle needs at least 1000 samples".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut s = NeumaierSum::new();
            let mut s2 = NeumaierSum::new();
            for _ in 0..count {
                let v = sample(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s.value(), s2.value())
        })
        .collect();
    let m = samples as f64;
    let mean = compensated_sum(partial.iter().map(|p| p.0)) / m;
    let mean_sq = compensated_sum(partial.iter().map(|p| p.1)) / m;
    let var = (mean_sq - mean * mean).max(0.0) * m / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

/// Unbiased estimate of the squared extreme L2 discrepancy.
///
/// Per coordinate, `(min(u, v), max(u, v))` of two independent uniforms has
/// density 2 on `{x ≤ y}`, so `E[2^{-d} Δ_P([x, y))²]` is the integral over
/// `x ≤ y`.
pub fn extreme_l2_mc(points: &PointSet, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let d = points.dim();
    let scale = 0.5f64.powi(d as i32);
    monte_carlo(samples, seed, move |rng| {
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            lo[i] = u.min(v);
            hi[i] = u.max(v);
        }
        let delta = local_discrepancy(points, &lo, &hi).expect("box is well formed");
        scale * delta * delta
    })
}

/// Estimate of the squared star L2 discrepancy from uniform anchors `t`.
pub fn star_l2_mc(points: &PointSet, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let d = points.dim();
    let zero = vec![0.0; d];
    monte_carlo(samples, seed, move |rng| {
        let t: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let delta = local_discrepancy(points, &zero, &t).expect("box is well formed");
        delta * delta
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::{gen_corner, gen_random};

    fn idx(levels: &[i32], positions: &[u64]) -> DyadicIndex {
        DyadicIndex::new(levels.to_vec(), positions.to_vec()).unwrap()
    }

    fn single(x: f64) -> PointSet {
        PointSet::new(1, vec![vec![x]]).unwrap()
    }

    #[test]
    fn local_discrepancy_examples() {
        assert_eq!(local_discrepancy(&single(0.5), &[0.0], &[0.75]).unwrap(), 0.25);
        let e = PointSet::empty(2).unwrap();
        assert_eq!(local_discrepancy(&e, &[0.25, 0.25], &[0.75, 0.75]).unwrap(), -0.25);
        let v = local_discrepancy(&single(0.5), &[0.5], &[0.6]).unwrap();
        assert!((v - 0.9).abs() < 1e-15);
        assert!(local_discrepancy(&single(0.5), &[0.6], &[0.5]).is_err());
    }

    #[test]
    fn haar_oracle_examples() {
        let c = exact_haar_coefficient(&gen_corner(1, 1).unwrap(), &idx(&[0], &[0])).unwrap();
        assert!((c - 0.25).abs() < 1e-15);
        let h = exact_haar_coefficient(&single(0.5), &idx(&[-1], &[0])).unwrap();
        assert!(h.abs() < 1e-15);
        // x on the left endpoint of I_{2,1} = [0.25, 0.5): indicator is 1 on the support
        let a = exact_haar_coefficient(&single(0.25), &idx(&[2], &[1])).unwrap();
        let empty = exact_haar_coefficient(&PointSet::empty(1).unwrap(), &idx(&[2], &[1])).unwrap();
        assert!((a - empty).abs() < 1e-15);
        // x at the midpoint of [0,1): ∫_0^{1/2} 0 − ∫_{1/2}^1 1 = −1/2, minus volume part −1/4
        let m = exact_haar_coefficient(&single(0.5), &idx(&[0], &[0])).unwrap();
        assert!((m - (-0.5 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn empty_set_matches_hand_integrals() {
        // ⟨−Π t_i, h⟩ with ∫ t h_{j,m} = −4^{-(j+1)}, ∫ t dt = 1/2
        let e = PointSet::empty(2).unwrap();
        let v = exact_haar_coefficient(&e, &idx(&[1, -1], &[1, 0])).unwrap();
        assert!((v - (1.0 / 16.0) * 0.5).abs() < 1e-15);
        let w = exact_haar_coefficient(&e, &idx(&[0, 2], &[0, 3])).unwrap();
        assert!((w + (0.25 * (1.0 / 64.0))).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        let big = gen_random(17, 1, 0).unwrap();
        assert!(matches!(exact_haar_coefficient(&big, &idx(&[0], &[0])), Err(Error::OracleGuard(_))));
        let d4 = gen_random(2, 4, 0).unwrap();
        assert!(exact_haar_coefficient(&d4, &idx(&[0, 0, 0, 0], &[0, 0, 0, 0])).is_err());
        assert!(exact_haar_coefficient(&single(0.1), &idx(&[13], &[0])).is_err());
    }

    #[test]
    fn oracle_ignores_point_order() {
        let p = gen_random(6, 2, 8).unwrap();
        let mut rows = p.to_rows();
        rows.reverse();
        let q = PointSet::new(2, rows).unwrap();
        let i = idx(&[1, 2], &[1, 2]);
        assert_eq!(exact_haar_coefficient(&p, &i).unwrap(), exact_haar_coefficient(&q, &i).unwrap());
    }

    #[test]
    fn one_dimensional_oracles() {
        assert!((star_l2_exact_1d(&gen_corner(1, 1).unwrap()).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((star_l2_exact_1d(&single(0.5)).unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let e = PointSet::empty(1).unwrap();
        assert!((star_l2_exact_1d(&e).unwrap() - 3f64.powf(-0.5)).abs() < 1e-15);
        assert!((extreme_l2_exact_1d(&e).unwrap() - 12f64.powf(-0.5)).abs() < 1e-15);
        assert!((extreme_l2_exact_1d(&single(0.5)).unwrap() - 12f64.powf(-0.5)).abs() < 1e-15);
        assert!(star_l2_exact_1d(&PointSet::empty(2).unwrap()).is_err());
    }

    #[test]
    fn mc_is_unbiased_on_empty_set() {
        for d in 1..=3 {
            let e = PointSet::empty(d).unwrap();
            let (est, se) = extreme_l2_mc(&e, 100_000, 3).unwrap();
            let exact = 12f64.powi(-(d as i32));
            assert!((est - exact).abs() <= 3.0 * se, "d={d}: {est} vs {exact} (se {se})");
            let (s, sse) = star_l2_mc(&e, 100_000, 3).unwrap();
            assert!((s - 3f64.powi(-(d as i32))).abs() <= 3.0 * sse);
        }
    }

    #[test]
    fn mc_corner_and_rate() {
        let c = gen_corner(1, 1).unwrap();
        let (est, se) = extreme_l2_mc(&c, 100_000, 1).unwrap();
        assert!((est - 1.0 / 12.0).abs() <= 3.0 * se);
        let p = gen_random(8, 2, 2).unwrap();
        let (_, se_small) = extreme_l2_mc(&p, 1_000, 4).unwrap();
        let (_, se_big) = extreme_l2_mc(&p, 100_000, 4).unwrap();
        let ratio = se_small / se_big;
        assert!((5.0..20.0).contains(&ratio), "ratio {ratio}");
        assert!(extreme_l2_mc(&p, 999, 0).is_err());
    }

    #[test]
    fn mc_is_deterministic() {
        let p = gen_random(5, 3, 2).unwrap();
        assert_eq!(extreme_l2_mc(&p, 10_000, 9).unwrap(), extreme_l2_mc(&p, 10_000, 9).unwrap());
    }
}
