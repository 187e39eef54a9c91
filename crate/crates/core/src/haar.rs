//! Dyadic boxes, tensor Haar functions and the exact Haar coefficients of the
//! anchored local discrepancy `t ↦ Δ_P([0,t))`.
//!
//! For a point set `P` of size `N` the coefficient against `h_{j,m}` splits into
//! a counting part and a volume part,
//!
//! ```text
//! ⟨Δ_P, h_{j,m}⟩ = (1/N) Σ_n Π_i ⟨1[x_{n,i} < ·], h_{j_i,m_i}⟩ − Π_i ⟨t, h_{j_i,m_i}⟩,
//! ```
//!
//! and both factor per coordinate. With `I_{j,m} = [a, b)`, midpoint `c`:
//!
//! * counting factor: `1 − x` on level −1; for `j ≥ 0` it is `a − x` on
//!   `[a, c)`, `x − b` on `[c, b)` and `0` outside `[a, b)`;
//! * volume factor: `1/2` on level −1, `−4^{−(j+1)}` for `j ≥ 0`.
//!
//! Because the counting factor vanishes off `I_{j,m}`, on a fixed level vector
//! only the boxes holding at least one point have a nonzero counting part, and
//! the sum over all `2^{|j|}` boxes reduces to a sum over occupied boxes plus
//! an analytic term for the empty ones.
//!
//! The empty set uses `Δ_∅(B) = −λ_d(B)`, so its coefficients are the negated
//! volume parts. All downstream quantities are squares.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::sum::{compensated_sum, NeumaierSum};

/// Deepest per-coordinate level; `floor(x · 2^j)` is exact in `f64` up to here.
pub const MAX_LEVEL: i32 = 52;

/// A dyadic box `I_{j,m}` of `[0,1)^d`. A level of `-1` spans `[0,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    levels: Vec<i32>,
    positions: Vec<u64>,
}

impl DyadicIndex {
    pub fn new(levels: Vec<i32>, positions: Vec<u64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != positions.len() {
            return Err(Error::InvalidArgument(format!(
                "level vector ({}) and position vector ({}) must be nonempty and equally long",
                levels.len(),
                positions.len()
            )));
        }
        for (&j, &m) in levels.iter().zip(&positions) {
            if j < -1 {
                return Err(Error::InvalidArgument(format!("level {j} below -1")));
            }
            if j > MAX_LEVEL {
                return Err(Error::LevelTooDeep { level: j as u32, max: MAX_LEVEL as u32 });
            }
            let count = if j < 0 { 1 } else { 1u64 << j };
            if m >= count {
                return Err(Error::InvalidArgument(format!(
                    "position {m} out of range for level {j}"
                )));
            }
        }
        Ok(Self { levels, positions })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    /// `|j| = Σ max(j_i, 0)`.
    pub fn order(&self) -> u32 {
        order(&self.levels)
    }
}

pub fn order(levels: &[i32]) -> u32 {
    levels.iter().map(|&j| j.max(0) as u32).sum()
}

#[inline]
pub(crate) fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Half-open axis-aligned box `[lower, upper)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&a, &b))| a <= x && x < b)
    }
}

pub fn dyadic_interval(index: &DyadicIndex) -> AxisBox {
    let mut lower = Vec::with_capacity(index.dim());
    let mut upper = Vec::with_capacity(index.dim());
    for (&j, &m) in index.levels.iter().zip(&index.positions) {
        if j < 0 {
            lower.push(0.0);
            upper.push(1.0);
        } else {
            let w = pow2(-j);
            lower.push(m as f64 * w);
            upper.push((m + 1) as f64 * w);
        }
    }
    AxisBox { lower, upper }
}

fn haar_eval_1d(j: i32, m: u64, x: f64) -> i8 {
    if j < 0 {
        return 1;
    }
    // position of x at the next finer level: 2m is the left half, 2m+1 the right
    let fine = (x * pow2(j + 1)).floor() as u64;
    if fine == 2 * m {
        1
    } else if fine == 2 * m + 1 {
        -1
    } else {
        0
    }
}

/// `h_{j,m}(x) = Π_i h_{j_i,m_i}(x_i)`, with `+1` on the left half.
pub fn haar_eval(index: &DyadicIndex, x: &[f64]) -> i8 {
    index
        .levels
        .iter()
        .zip(&index.positions)
        .zip(x)
        .map(|((&j, &m), &x)| haar_eval_1d(j, m, x))
        .product()
}

#[inline]
fn volume_factor(j: i32) -> f64 {
    if j < 0 {
        0.5
    } else {
        -pow2(-2 * (j + 1))
    }
}

/// `⟨Π_i t_i, h_{j,m}⟩`; independent of the position vector.
pub fn volume_part_coefficient(index: &DyadicIndex) -> f64 {
    level_volume_part(&index.levels)
}

pub(crate) fn level_volume_part(levels: &[i32]) -> f64 {
    levels.iter().map(|&j| volume_factor(j)).product()
}

/// `⟨1[x < ·], h_{j,m}⟩` in one coordinate.
#[inline]
fn counting_factor(x: f64, j: i32, m: u64) -> f64 {
    if j < 0 {
        return 1.0 - x;
    }
    let w = pow2(-(j + 1));
    let a = m as f64 * 2.0 * w;
    let c = a + w;
    let b = c + w;
    if x < a || x >= b {
        0.0
    } else if x < c {
        a - x
    } else {
        x - b
    }
}

/// `⟨Π_i 1[x_i < t_i], h_{j,m}(t)⟩` for a single point.
pub fn counting_part_coefficient(x: &[f64], index: &DyadicIndex) -> f64 {
    index
        .levels
        .iter()
        .zip(&index.positions)
        .zip(x)
        .map(|((&j, &m), &x)| counting_factor(x, j, m))
        .product()
}

/// Exact Haar coefficient of the anchored local discrepancy.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoefficient {
    pub index: DyadicIndex,
    pub counting_part: f64,
    pub volume_part: f64,
    pub value: f64,
}

pub fn haar_coefficient(points: &PointSet, index: &DyadicIndex) -> Result<HaarCoefficient> {
    check_dim(points, index.dim())?;
    let volume_part = volume_part_coefficient(index);
    let counting_part = if points.is_empty() {
        0.0
    } else {
        let s = compensated_sum(points.iter().map(|x| counting_part_coefficient(x, index)));
        s / points.len() as f64
    };
    Ok(HaarCoefficient {
        index: index.clone(),
        counting_part,
        volume_part,
        value: counting_part - volume_part,
    })
}

fn check_dim(points: &PointSet, dim: usize) -> Result<()> {
    if points.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "point set has dimension {}, index has {dim}",
            points.dim()
        )));
    }
    Ok(())
}

/// A box that holds at least one point on some level vector.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupiedBox {
    pub positions: Vec<u64>,
    /// `(1/N) Σ_{x_n ∈ box} Π_i counting factor`.
    pub counting_part: f64,
}

/// Occupied boxes of one level vector, sorted by position.
#[derive(Clone, Debug)]
pub struct LevelBoxes {
    pub levels: Vec<i32>,
    pub volume_part: f64,
    pub boxes: Vec<OccupiedBox>,
}

impl LevelBoxes {
    pub fn order(&self) -> u32 {
        order(&self.levels)
    }

    /// `2^{|j|} Σ_m |⟨Δ_P, h_{j,m}⟩|²` over all boxes on this level.
    pub fn energy(&self) -> f64 {
        let k = self.order() as i32;
        let b = self.volume_part;
        let mut occupied = NeumaierSum::new();
        for bx in &self.boxes {
            let v = bx.counting_part - b;
            occupied += v * v;
        }
        let empty = pow2(k) - self.boxes.len() as f64;
        occupied += empty * b * b;
        pow2(k) * occupied.value()
    }
}

pub(crate) fn check_levels(levels: &[i32]) -> Result<()> {
    for &j in levels {
        if j < -1 {
            return Err(Error::InvalidArgument(format!("level {j} below -1")));
        }
        if j > MAX_LEVEL {
            return Err(Error::LevelTooDeep { level: j as u32, max: MAX_LEVEL as u32 });
        }
    }
    Ok(())
}

/// Groups the points by their box on level vector `levels`.
pub fn level_boxes(points: &PointSet, levels: &[i32]) -> Result<LevelBoxes> {
    check_dim(points, levels.len())?;
    check_levels(levels)?;
    Ok(level_boxes_unchecked(points, levels))
}

pub(crate) fn level_boxes_unchecked(points: &PointSet, levels: &[i32]) -> LevelBoxes {
    let d = levels.len();
    let n = points.len();
    let volume_part = level_volume_part(levels);
    if n == 0 {
        return LevelBoxes { levels: levels.to_vec(), volume_part, boxes: Vec::new() };
    }
    let scales: Vec<f64> = levels.iter().map(|&j| if j < 0 { 0.0 } else { pow2(j) }).collect();
    let mut keys = vec![0u64; n * d];
    let mut weights = vec![0.0; n];
    for (i, x) in points.iter().enumerate() {
        let key = &mut keys[i * d..(i + 1) * d];
        let mut w = 1.0;
        for c in 0..d {
            let m = (x[c] * scales[c]).floor() as u64;
            key[c] = m;
            w *= counting_factor(x[c], levels[c], m);
        }
        weights[i] = w;
    }
    let mut order_idx: Vec<usize> = (0..n).collect();
    order_idx.sort_by(|&a, &b| keys[a * d..(a + 1) * d].cmp(&keys[b * d..(b + 1) * d]).then(a.cmp(&b)));

    let inv_n = 1.0 / n as f64;
    let mut boxes: Vec<OccupiedBox> = Vec::new();
    let mut start = 0;
    while start < n {
        let key = &keys[order_idx[start] * d..(order_idx[start] + 1) * d];
        let mut acc = NeumaierSum::new();
        let mut end = start;
        while end < n && &keys[order_idx[end] * d..(order_idx[end] + 1) * d] == key {
            acc += weights[order_idx[end]];
            end += 1;
        }
        boxes.push(OccupiedBox { positions: key.to_vec(), counting_part: acc.value() * inv_n });
        start = end;
    }
    LevelBoxes { levels: levels.to_vec(), volume_part, boxes }
}

/// `2^{|j|} Σ_{m ∈ D_j} |⟨Δ_P, h_{j,m}⟩|²` for a level vector in `N_0^d`.
pub fn level_sum(points: &PointSet, levels: &[u32]) -> Result<f64> {
    let levels: Vec<i32> = levels.iter().map(|&j| j.min(i32::MAX as u32) as i32).collect();
    Ok(level_boxes(points, &levels)?.energy())
}

/// Level vectors with `|j| ≤ max_order`, order-major, lexicographic within
/// an order. With `with_whole_axis` each coordinate may also be `-1`.
pub fn levels_up_to(dim: usize, max_order: u32, with_whole_axis: bool) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for k in 0..=max_order {
        let mut current = Vec::with_capacity(dim);
        push_levels_of_order(dim, k as i32, with_whole_axis, &mut current, &mut out);
    }
    out
}

fn push_levels_of_order(
    remaining_dims: usize,
    remaining_order: i32,
    with_whole_axis: bool,
    current: &mut Vec<i32>,
    out: &mut Vec<Vec<i32>>,
) {
    if remaining_dims == 0 {
        if remaining_order == 0 {
            out.push(current.clone());
        }
        return;
    }
    let lowest = if with_whole_axis { -1 } else { 0 };
    for j in lowest..=remaining_order {
        current.push(j);
        push_levels_of_order(remaining_dims - 1, remaining_order - j.max(0), with_whole_axis, current, out);
        current.pop();
    }
}

pub(crate) fn check_order(max_order: u32) -> Result<()> {
    if max_order as i32 > MAX_LEVEL {
        return Err(Error::LevelTooDeep { level: max_order, max: MAX_LEVEL as u32 });
    }
    Ok(())
}

/// Per-level energies for every level vector with `|j| ≤ max_order`, in the
/// order of [`levels_up_to`]. Levels are processed in parallel; the output
/// order does not depend on the thread count.
pub fn level_energies(points: &PointSet, max_order: u32, with_whole_axis: bool) -> Result<Vec<(Vec<i32>, f64)>> {
    check_order(max_order)?;
    let levels = levels_up_to(points.dim(), max_order, with_whole_axis);
    Ok(levels
        .into_par_iter()
        .map(|j| {
            let e = level_boxes_unchecked(points, &j).energy();
            (j, e)
        })
        .collect())
}

/// `Σ_{j ∈ N_0^d, |j| ≤ J} level_sum(P, j)`, summed in the fixed level order.
pub fn truncated_extreme_energy(points: &PointSet, max_order: u32) -> Result<f64> {
    Ok(compensated_sum(level_energies(points, max_order, false)?.into_iter().map(|(_, e)| e)))
}

/// Same over `N_{-1}^d` (star series).
pub fn truncated_star_energy(points: &PointSet, max_order: u32) -> Result<f64> {
    Ok(compensated_sum(level_energies(points, max_order, true)?.into_iter().map(|(_, e)| e)))
}

/// Upper bound on `Σ_{k ∈ N_0^d, Σ k > J} Π_i s_i(k_i)` for nonnegative
/// sequences given exactly on `0..=J`, each with a bound on its mass past `J`.
/// Only sums of nonnegative terms are formed.
fn product_tail(sequences: &[(Vec<f64>, f64)], max_order: usize) -> f64 {
    let mut dist = vec![0.0; max_order + 1];
    dist[0] = 1.0;
    let mut over = 0.0;
    for (seq, rest) in sequences {
        debug_assert_eq!(seq.len(), max_order + 1);
        // beyond[t] = Σ_{k > t} s(k)
        let mut beyond = vec![0.0; max_order + 1];
        let mut acc = *rest;
        for t in (0..=max_order).rev() {
            beyond[t] = acc;
            acc += seq[t];
        }
        let total = acc;

        let mut next_over = over * total;
        for (p, &mass) in dist.iter().enumerate() {
            next_over += mass * beyond[max_order - p];
        }
        let mut next = vec![0.0; max_order + 1];
        for (q, slot) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..=q {
                s += dist[q - k] * seq[k];
            }
            *slot = s;
        }
        dist = next;
        over = next_over;
    }
    over
}

// covers accumulated rounding in the nonnegative sums of `product_tail`
const ROUNDING_INFLATION: f64 = 1.0 + 1e-10;

/// Bound on the counting-part energy past order `J`, averaged over points.
///
/// On one level, `Σ_m A_m² ≤ (1/N) Σ_n G_n²` by Cauchy–Schwarz within each box
/// (`G_n` the per-point product of counting factors), and the per-coordinate
/// energy `2^j g(x, j)²` is at most `2^{-j-2}`.
fn counting_tail(points: &PointSet, max_order: u32, with_whole_axis: bool) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let j_max = max_order as usize;
    let rest = pow2(-(max_order as i32) - 2);
    let per_point: Vec<f64> = points
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| {
            let seqs: Vec<(Vec<f64>, f64)> = x
                .iter()
                .map(|&xi| {
                    let mut s = Vec::with_capacity(j_max + 1);
                    for j in 0..=j_max as i32 {
                        let m = (xi * pow2(j)).floor() as u64;
                        let g = counting_factor(xi, j, m);
                        s.push(pow2(j) * g * g);
                    }
                    if with_whole_axis {
                        s[0] += (1.0 - xi) * (1.0 - xi);
                    }
                    (s, rest)
                })
                .collect();
            product_tail(&seqs, j_max)
        })
        .collect();
    compensated_sum(per_point) / points.len() as f64
}

/// Volume-part energy past order `J`: per coordinate the order-`k` mass is
/// `4^{-k}/16` (plus `1/4` at order 0 for the whole-axis level).
fn volume_tail(dim: usize, max_order: u32, with_whole_axis: bool) -> f64 {
    let j_max = max_order as usize;
    let mut s: Vec<f64> = (0..=j_max as i32).map(|k| pow2(-2 * k - 4)).collect();
    if with_whole_axis {
        s[0] += 0.25;
    }
    let rest = pow2(-2 * max_order as i32 - 4) / 3.0;
    let seqs = vec![(s, rest); dim];
    product_tail(&seqs, j_max)
}

fn combine_tails(counting: f64, volume: f64) -> f64 {
    let root = counting.sqrt() + volume.sqrt();
    root * root * ROUNDING_INFLATION
}

/// Certified upper bound on `Σ_{j ∈ N_0^d, |j| > J} level_sum(P, j)`.
pub fn tail_bound(points: &PointSet, max_order: u32) -> Result<f64> {
    check_order(max_order)?;
    Ok(combine_tails(
        counting_tail(points, max_order, false),
        volume_tail(points.dim(), max_order, false),
    ))
}

/// Same bound for the star series over `N_{-1}^d`.
pub fn star_tail_bound(points: &PointSet, max_order: u32) -> Result<f64> {
    check_order(max_order)?;
    Ok(combine_tails(
        counting_tail(points, max_order, true),
        volume_tail(points.dim(), max_order, true),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::{gen_corner, gen_random};

    fn idx(levels: &[i32], positions: &[u64]) -> DyadicIndex {
        DyadicIndex::new(levels.to_vec(), positions.to_vec()).unwrap()
    }

    fn single(x: &[f64]) -> PointSet {
        PointSet::new(x.len(), vec![x.to_vec()]).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(DyadicIndex::new(vec![1], vec![2]).is_err());
        assert!(DyadicIndex::new(vec![-1], vec![1]).is_err());
        assert!(DyadicIndex::new(vec![-2], vec![0]).is_err());
        assert!(matches!(DyadicIndex::new(vec![53], vec![0]), Err(Error::LevelTooDeep { .. })));
        assert_eq!(idx(&[2, -1, 3], &[1, 0, 0]).order(), 5);
    }

    #[test]
    fn intervals() {
        assert_eq!(dyadic_interval(&idx(&[1], &[1])), AxisBox { lower: vec![0.5], upper: vec![1.0] });
        let full = dyadic_interval(&idx(&[0, -1], &[0, 0]));
        assert_eq!(full, AxisBox { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0] });
        let b = dyadic_interval(&idx(&[2], &[2]));
        assert_eq!(b, AxisBox { lower: vec![0.5], upper: vec![0.75] });
        assert_eq!(b.volume(), 0.25);
        assert_eq!(dyadic_interval(&idx(&[1, 3], &[1, 5])).volume(), pow2(-4));
    }

    #[test]
    fn haar_values() {
        assert_eq!(haar_eval(&idx(&[0], &[0]), &[0.25]), 1);
        assert_eq!(haar_eval(&idx(&[1], &[1]), &[0.80]), -1);
        assert_eq!(haar_eval(&idx(&[1], &[1]), &[0.20]), 0);
        assert_eq!(haar_eval(&idx(&[0, 0], &[0, 0]), &[0.25, 0.75]), -1);
        assert_eq!(haar_eval(&idx(&[-1], &[0]), &[0.9]), 1);
    }

    #[test]
    fn volume_parts() {
        assert_eq!(volume_part_coefficient(&idx(&[0], &[0])), -0.25);
        assert_eq!(volume_part_coefficient(&idx(&[0, 0], &[0, 0])), 1.0 / 16.0);
        assert_eq!(volume_part_coefficient(&idx(&[-1], &[0])), 0.5);
        // magnitude 2^{-2(d+|j|)}
        assert_eq!(volume_part_coefficient(&idx(&[1, 2], &[0, 3])).abs(), pow2(-2 * (2 + 3)));
    }

    #[test]
    fn counting_parts() {
        // left endpoint gives zero at any level
        assert_eq!(counting_part_coefficient(&[0.25], &idx(&[2], &[1])), 0.0);
        assert_eq!(counting_part_coefficient(&[0.0], &idx(&[0], &[0])), 0.0);
        assert_eq!(counting_part_coefficient(&[0.5], &idx(&[0], &[0])), -0.5);
        assert_eq!(counting_part_coefficient(&[0.3], &idx(&[-1], &[0])), 0.7);
        assert_eq!(counting_part_coefficient(&[0.3], &idx(&[1], &[1])), 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let c = haar_coefficient(&gen_corner(1, 1).unwrap(), &idx(&[0], &[0])).unwrap();
        assert_eq!(c.value, 0.25);
        let e = haar_coefficient(&PointSet::empty(1).unwrap(), &idx(&[1], &[0])).unwrap();
        assert_eq!(e.counting_part, 0.0);
        assert_eq!(e.value, 1.0 / 16.0);
        let h = haar_coefficient(&single(&[0.5]), &idx(&[-1], &[0])).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn coefficient_magnitude_bound() {
        let p = gen_random(5, 3, 11).unwrap();
        for levels in levels_up_to(3, 5, false) {
            let k = order(&levels) as i32;
            let bound = pow2(-k - 3) + pow2(-2 * (k + 3));
            let boxes = level_boxes(&p, &levels).unwrap();
            for b in &boxes.boxes {
                let idx = DyadicIndex::new(levels.clone(), b.positions.clone()).unwrap();
                let c = haar_coefficient(&p, &idx).unwrap();
                assert!(c.value.abs() <= bound);
            }
        }
    }

    #[test]
    fn level_sums() {
        let empty = PointSet::empty(1).unwrap();
        assert_eq!(level_sum(&empty, &[0]).unwrap(), 1.0 / 16.0);
        assert_eq!(level_sum(&empty, &[2]).unwrap(), 1.0 / 256.0);
        assert_eq!(level_sum(&gen_corner(1, 1).unwrap(), &[0]).unwrap(), 1.0 / 16.0);
        let e2 = PointSet::empty(2).unwrap();
        assert_eq!(level_sum(&e2, &[1, 2]).unwrap(), (1.0 / 64.0) * (1.0 / 256.0));
    }

    #[test]
    fn level_sum_matches_box_enumeration() {
        let p = gen_random(7, 2, 3).unwrap();
        for levels in levels_up_to(2, 4, true) {
            let mut direct = 0.0;
            let counts: Vec<u64> = levels.iter().map(|&j| if j < 0 { 1 } else { 1 << j }).collect();
            for m0 in 0..counts[0] {
                for m1 in 0..counts[1] {
                    let c = haar_coefficient(&p, &idx(&levels, &[m0, m1])).unwrap();
                    direct += c.value * c.value;
                }
            }
            direct *= pow2(order(&levels) as i32);
            let fast = level_boxes(&p, &levels).unwrap().energy();
            assert!((fast - direct).abs() < 1e-15, "{levels:?}: {fast} vs {direct}");
        }
    }

    #[test]
    fn level_order_is_order_major() {
        let l = levels_up_to(2, 2, false);
        assert_eq!(l, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        let s = levels_up_to(1, 1, true);
        assert_eq!(s, vec![vec![-1], vec![0], vec![1]]);
        // |N_{-1}^2 ∩ {|j| = 0}| = 4
        assert_eq!(levels_up_to(2, 0, true).len(), 4);
    }

    #[test]
    fn empty_tail_covers_geometric_remainder() {
        let empty = PointSet::empty(1).unwrap();
        for j in 0..30 {
            let exact = pow2(-2 * (j + 1)) / 12.0;
            let bound = tail_bound(&empty, j as u32).unwrap();
            assert!(bound >= exact, "J={j}: {bound} < {exact}");
            assert!(bound <= exact * (1.0 + 1e-9));
        }
    }

    #[test]
    fn tail_is_monotone_and_small() {
        let p = gen_random(50, 4, 5).unwrap();
        let mut prev = f64::INFINITY;
        for j in 0..=40 {
            let b = tail_bound(&p, j).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(prev < 1e-9);
        let big = gen_random(10_000, 4, 1).unwrap();
        assert!(tail_bound(&big, 40).unwrap() < 1e-9);
    }

    #[test]
    fn deep_levels_are_rejected() {
        let p = gen_random(3, 1, 0).unwrap();
        assert!(level_sum(&p, &[53]).is_err());
        assert!(tail_bound(&p, 53).is_err());
    }
}
