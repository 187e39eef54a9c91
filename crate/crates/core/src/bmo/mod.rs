//! Lower bounds on the dyadic product BMO seminorm of the local discrepancy,
//!
//! ```text
//! ‖Δ_P‖²_BMO = sup_U (1/λ_d(U)) Σ_{j ∈ N_0^d} 2^{|j|} Σ_{m : I_{j,m} ⊆ U} |⟨Δ_P, h_{j,m}⟩|²,
//! ```
//!
//! The supremum over measurable `U` is out of reach, so every routine here
//! evaluates the ratio for concrete sets `U` with the inner sum truncated at
//! `|j| ≤ J`. Each evaluation is therefore a lower bound on the seminorm.
//!
//! Three candidate families are searched:
//!
//! 1. the full cube, whose value is the truncated extreme L2 series;
//! 2. single dyadic boxes `I_{u,m}` with `|u| ≤ L`;
//! 3. unions of level-`(L, …, L)` cells, maximized exactly by Dinkelbach
//!    iteration over a maximum-weight closure solved by min-cut.

mod maxflow;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{self, pow2, DyadicIndex, LevelBoxes};
use crate::pointset::PointSet;
use crate::sum::NeumaierSum;

pub use maxflow::FlowNetwork;

/// Most cells a union search may use.
pub const MAX_UNION_CELLS: u64 = 1 << 20;
/// Most nodes (dyadic boxes with every level at most the cell level) in the
/// closure graph before the search coarsens its cell level.
pub const MAX_UNION_NODES: u64 = 1 << 21;

const DINKELBACH_MAX_ITERATIONS: usize = 64;

/// `12^{-d/2}`, the BMO seminorm of `Δ_∅`.
pub fn bmo_initial(dim: usize) -> f64 {
    12f64.powf(-(dim as f64) / 2.0)
}

/// The value of the BMO ratio at `U = [0,1)^d`; shares its code path with
/// [`crate::discrepancy::extreme_l2_haar`].
pub fn bmo_global(points: &PointSet, max_order: u32) -> Result<f64> {
    haar::truncated_extreme_energy(points, max_order)
}

/// The maximizing candidate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CandidateSet {
    FullCube,
    DyadicBox { levels: Vec<i32>, positions: Vec<u64> },
    CellUnion { level: u32, cells: Vec<Vec<u64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoEstimate {
    pub value: f64,
    pub squared: f64,
    pub candidate_u: CandidateSet,
    pub truncation_order: u32,
    pub search_level: u32,
    pub global_term_squared: f64,
    /// Tail bound of the full-cube term.
    pub tail_bound: f64,
    /// Cell level the union search actually used (may be below
    /// `search_level` when the closure graph would be too large).
    pub union_level: u32,
}

/// Occupied boxes on every level vector `j ∈ N_0^d`, `|j| ≤ J`.
struct EnergyTable {
    dim: usize,
    levels: Vec<LevelBoxes>,
}

impl EnergyTable {
    fn build(points: &PointSet, max_order: u32) -> Result<Self> {
        haar::check_order(max_order)?;
        let levels = haar::levels_up_to(points.dim(), max_order, false)
            .into_par_iter()
            .map(|j| haar::level_boxes_unchecked(points, &j))
            .collect();
        Ok(Self { dim: points.dim(), levels })
    }

    /// Per-box energies aggregated to the ancestor box at level `coarse(j)`,
    /// for every level vector `j` with `keep(j)`. Returns, for each target
    /// level vector, the energy of a box holding no points and the energies
    /// of boxes that do.
    fn aggregate(
        &self,
        targets: &[Vec<i32>],
        target_of: impl Fn(&[i32]) -> Option<usize>,
    ) -> Vec<AggregatedLevel> {
        let mut out: Vec<AggregatedLevel> = targets
            .iter()
            .map(|t| AggregatedLevel {
                levels: t.clone(),
                empty: NeumaierSum::new(),
                corrections: BTreeMap::new(),
            })
            .collect();
        for lb in &self.levels {
            let Some(t) = target_of(&lb.levels) else { continue };
            let target = &targets[t];
            let k = lb.order() as i32;
            let coarse = haar::order(target) as i32;
            let b = lb.volume_part;
            let agg = &mut out[t];
            // a box at level target contains 2^{|j| - |target|} boxes of level j
            agg.empty += pow2(k) * pow2(k - coarse) * b * b;
            for bx in &lb.boxes {
                let anc: Vec<u64> = bx
                    .positions
                    .iter()
                    .zip(lb.levels.iter().zip(target))
                    .map(|(&m, (&j, &u))| m >> (j - u))
                    .collect();
                let a = bx.counting_part;
                // (a - b)^2 replaces the b^2 counted in `empty`
                *agg.corrections.entry(anc).or_default() += pow2(k) * a * (a - 2.0 * b);
            }
        }
        debug_assert!(out.iter().all(|a| a.levels.len() == self.dim));
        out
    }
}

struct AggregatedLevel {
    levels: Vec<i32>,
    empty: NeumaierSum,
    corrections: BTreeMap<Vec<u64>, NeumaierSum>,
}

impl AggregatedLevel {
    fn empty_energy(&self) -> f64 {
        self.empty.value()
    }

    fn energy_at(&self, positions: &[u64]) -> f64 {
        let base = self.empty.value();
        let e = match self.corrections.get(positions) {
            Some(c) => {
                let mut s = self.empty;
                s += c.value();
                s.value()
            }
            None => base,
        };
        e.max(0.0)
    }
}

fn is_descendant_level(levels: &[i32], of: &[i32]) -> bool {
    levels.iter().zip(of).all(|(j, u)| j >= u)
}

fn check_box_levels(index: &DyadicIndex) -> Result<()> {
    if index.levels().iter().any(|&j| j < 0) {
        return Err(Error::InvalidArgument(
            "a level of -1 does not define a proper sub-box; use the full-cube term".into(),
        ));
    }
    Ok(())
}

/// The BMO ratio at `U = I_{u,m}`, truncated at `|j| ≤ J`.
pub fn bmo_dyadic_box(points: &PointSet, index: &DyadicIndex, max_order: u32) -> Result<f64> {
    check_box_levels(index)?;
    if index.dim() != points.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if max_order < index.order() {
        return Err(Error::InvalidArgument(format!(
            "truncation order {max_order} below the box order {}",
            index.order()
        )));
    }
    let table = EnergyTable::build(points, max_order)?;
    let u = index.levels().to_vec();
    let agg = table.aggregate(std::slice::from_ref(&u), |j| is_descendant_level(j, &u).then_some(0));
    Ok(pow2(index.order() as i32) * agg[0].energy_at(index.positions()))
}

/// Best single dyadic box over all `u ∈ N_0^d` with `|u| ≤ max_box_order`.
/// Ties go to the first box in (order, level vector, position) order.
fn best_dyadic_box(table: &EnergyTable, max_box_order: u32) -> Option<(DyadicIndex, f64)> {
    let targets = haar::levels_up_to(table.dim, max_box_order, false);
    let mut best: Option<(DyadicIndex, f64)> = None;
    for u in &targets {
        let agg = table.aggregate(std::slice::from_ref(u), |j| is_descendant_level(j, u).then_some(0));
        let level = &agg[0];
        let scale = pow2(haar::order(u) as i32);

        let mut candidates: Vec<(Vec<u64>, f64)> = level
            .corrections
            .keys()
            .map(|m| (m.clone(), scale * level.energy_at(m)))
            .collect();
        if let Some(m) = first_unoccupied(u, &level.corrections) {
            candidates.push((m, scale * level.empty_energy().max(0.0)));
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        for (m, v) in candidates {
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                best = Some((DyadicIndex::new(u.clone(), m).expect("valid box"), v));
            }
        }
    }
    best
}

/// Lexicographically first position on level `u` absent from `occupied`.
fn first_unoccupied<V>(u: &[i32], occupied: &BTreeMap<Vec<u64>, V>) -> Option<Vec<u64>> {
    let total: u128 = u.iter().map(|&j| 1u128 << j).product();
    if (occupied.len() as u128) >= total {
        return None;
    }
    let mut m = vec![0u64; u.len()];
    for key in occupied.keys() {
        if *key != m {
            return Some(m);
        }
        // advance m in lexicographic order (last coordinate fastest)
        let mut i = u.len();
        loop {
            i -= 1;
            m[i] += 1;
            if m[i] < (1u64 << u[i]) {
                break;
            }
            m[i] = 0;
        }
    }
    Some(m)
}

/// Result of the cell-union search.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionSearch {
    /// Cell level actually used.
    pub level: u32,
    /// Selected cells, sorted, as positions on level `(level, …, level)`.
    pub cells: Vec<Vec<u64>>,
    pub squared: f64,
    pub dinkelbach_iterations: usize,
}

/// Dyadic boxes with every level at most `cell_level`, stored level by level.
struct Hierarchy {
    cell_level: u32,
    level_vectors: Vec<Vec<i32>>,
    offsets: Vec<usize>,
    node_count: usize,
}

impl Hierarchy {
    fn new(dim: usize, cell_level: u32) -> Self {
        let radix = cell_level as usize + 1;
        let total = radix.pow(dim as u32);
        // lexicographic, first coordinate most significant (matches `level_index`)
        let level_vectors: Vec<Vec<i32>> = (0..total)
            .map(|mut t| {
                let mut k = vec![0i32; dim];
                for slot in k.iter_mut().rev() {
                    *slot = (t % radix) as i32;
                    t /= radix;
                }
                k
            })
            .collect();
        let mut offsets = Vec::with_capacity(level_vectors.len());
        let mut acc = 0usize;
        for k in &level_vectors {
            offsets.push(acc);
            acc += 1usize << haar::order(k);
        }
        Self { cell_level, level_vectors, offsets, node_count: acc }
    }

    fn node_count_for(dim: usize, cell_level: u32) -> u128 {
        ((1u128 << (cell_level + 1)) - 1).pow(dim as u32)
    }

    fn level_index(&self, k: &[i32]) -> usize {
        k.iter().fold(0usize, |acc, &j| acc * (self.cell_level as usize + 1) + j as usize)
    }

    fn flat(k: &[i32], positions: &[u64]) -> usize {
        k.iter()
            .zip(positions)
            .fold(0usize, |acc, (&j, &m)| (acc << j) | m as usize)
    }

    fn unflat(k: &[i32], mut flat: usize) -> Vec<u64> {
        let mut out = vec![0u64; k.len()];
        for i in (0..k.len()).rev() {
            out[i] = (flat & ((1usize << k[i]) - 1)) as u64;
            flat >>= k[i];
        }
        out
    }

    fn node(&self, k: &[i32], positions: &[u64]) -> usize {
        self.offsets[self.level_index(k)] + Self::flat(k, positions)
    }

    fn is_cell(&self, k: &[i32]) -> bool {
        k.iter().all(|&j| j as u32 == self.cell_level)
    }

    /// The two halves of a non-cell box, split along its first coarse axis.
    fn children(&self, k: &[i32], positions: &[u64]) -> Option<[usize; 2]> {
        let axis = k.iter().position(|&j| (j as u32) < self.cell_level)?;
        let mut ck = k.to_vec();
        ck[axis] += 1;
        let mut cp = positions.to_vec();
        cp[axis] *= 2;
        let left = self.node(&ck, &cp);
        cp[axis] += 1;
        Some([left, self.node(&ck, &cp)])
    }
}

/// Maximizes the BMO ratio over unions of level-`(L, …, L)` cells.
pub fn bmo_union_search(points: &PointSet, cell_level: u32, max_order: u32) -> Result<UnionSearch> {
    let table = EnergyTable::build(points, max_order)?;
    union_search_with(&table, cell_level, max_order)
}

fn union_search_with(table: &EnergyTable, cell_level: u32, max_order: u32) -> Result<UnionSearch> {
    let d = table.dim;
    if max_order < cell_level {
        return Err(Error::InvalidArgument(format!(
            "truncation order {max_order} below the cell level {cell_level}"
        )));
    }
    let cells_log2 = d as u64 * cell_level as u64;
    if cells_log2 > MAX_UNION_CELLS.trailing_zeros() as u64 {
        return Err(Error::SearchTooLarge(format!(
            "2^{cells_log2} cells at level {cell_level} in dimension {d} exceed 2^20; use a smaller search level"
        )));
    }
    let mut level = cell_level;
    while level > 0 && Hierarchy::node_count_for(d, level) > MAX_UNION_NODES as u128 {
        level -= 1;
    }

    let hierarchy = Hierarchy::new(d, level);
    let lmax = level as i32;
    let weights = box_weights(table, &hierarchy, lmax);
    let cell_count = 1usize << (d * level as usize);
    let cell_volume = pow2(-(d as i32) * lmax);

    let cell_nodes: Vec<usize> = {
        let k = vec![lmax; d];
        let off = hierarchy.offsets[hierarchy.level_index(&k)];
        (off..off + cell_count).collect()
    };

    let all = vec![true; cell_count];
    let mut best_cells = all.clone();
    let mut best_ratio = ratio_of(&hierarchy, &weights, &all, cell_volume);
    let mut lambda = best_ratio;
    let mut iterations = 0;

    while iterations < DINKELBACH_MAX_ITERATIONS {
        iterations += 1;
        let Some(selected) = max_closure(&hierarchy, &weights, &cell_nodes, lambda, cell_volume) else {
            break;
        };
        let ratio = ratio_of(&hierarchy, &weights, &selected, cell_volume);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_cells = selected;
        }
        if ratio <= lambda {
            break;
        }
        lambda = ratio;
    }

    let k = vec![lmax; d];
    let cells = best_cells
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(flat, _)| Hierarchy::unflat(&k, flat))
        .collect();
    Ok(UnionSearch { level, cells, squared: best_ratio.max(0.0), dinkelbach_iterations: iterations })
}

/// Energy of the boxes `I_{j,m}` (over `|j| ≤ J`) whose smallest enclosing
/// hierarchy box is each node. A box lies in a cell union exactly when that
/// node does.
fn box_weights(table: &EnergyTable, hierarchy: &Hierarchy, lmax: i32) -> Vec<f64> {
    let targets = &hierarchy.level_vectors;
    let agg = table.aggregate(targets, |j| {
        let k: Vec<i32> = j.iter().map(|&x| x.min(lmax)).collect();
        Some(hierarchy.level_index(&k))
    });
    let mut weights = vec![0.0; hierarchy.node_count];
    for (t, level) in agg.iter().enumerate() {
        let k = &targets[t];
        let off = hierarchy.offsets[t];
        let count = 1usize << haar::order(k);
        let empty = level.empty_energy().max(0.0);
        weights[off..off + count].fill(empty);
        for m in level.corrections.keys() {
            weights[off + Hierarchy::flat(k, m)] = level.energy_at(m);
        }
    }
    weights
}

/// `f(S) / λ_d(S)` for a set of cells given as a mask over flat cell indices.
fn ratio_of(hierarchy: &Hierarchy, weights: &[f64], cells: &[bool], cell_volume: f64) -> f64 {
    let chosen = cells.iter().filter(|&&c| c).count();
    if chosen == 0 {
        return 0.0;
    }
    let inside = closure_mask(hierarchy, cells);
    let mut energy = NeumaierSum::new();
    for (w, &inside) in weights.iter().zip(&inside) {
        if inside {
            energy += *w;
        }
    }
    energy.value() / (chosen as f64 * cell_volume)
}

/// Which hierarchy boxes lie inside the union of the chosen cells.
fn closure_mask(hierarchy: &Hierarchy, cells: &[bool]) -> Vec<bool> {
    let mut inside = vec![false; hierarchy.node_count];
    // finer levels have larger order; fill from the cells upward
    let mut order_idx: Vec<usize> = (0..hierarchy.level_vectors.len()).collect();
    order_idx.sort_by_key(|&t| std::cmp::Reverse(haar::order(&hierarchy.level_vectors[t])));
    for t in order_idx {
        let k = &hierarchy.level_vectors[t];
        let off = hierarchy.offsets[t];
        let count = 1usize << haar::order(k);
        if hierarchy.is_cell(k) {
            inside[off..off + count].copy_from_slice(cells);
            continue;
        }
        for flat in 0..count {
            let m = Hierarchy::unflat(k, flat);
            let [a, b] = hierarchy.children(k, &m).expect("non-cell box has children");
            inside[off + flat] = inside[a] && inside[b];
        }
    }
    inside
}

/// Maximum-weight closure for `f(S) − λ·λ_d(S)`; returns the chosen cells,
/// or `None` when no set has positive value.
fn max_closure(
    hierarchy: &Hierarchy,
    weights: &[f64],
    cell_nodes: &[usize],
    lambda: f64,
    cell_volume: f64,
) -> Option<Vec<bool>> {
    let n = hierarchy.node_count;
    let (source, sink) = (n, n + 1);
    let scale = weights.iter().fold(lambda * cell_volume, |m, &w| m.max(w.abs()));
    let mut g = FlowNetwork::new(n + 2, scale * 1e-14);
    let mut net = weights.to_vec();
    for &c in cell_nodes {
        net[c] -= lambda * cell_volume;
    }
    let mut positive = NeumaierSum::new();
    for (t, k) in hierarchy.level_vectors.iter().enumerate() {
        let off = hierarchy.offsets[t];
        for flat in 0..(1usize << haar::order(k)) {
            let node = off + flat;
            let w = net[node];
            if w > 0.0 {
                g.add_edge(source, node, w);
                positive += w;
            } else if w < 0.0 {
                g.add_edge(node, sink, -w);
            }
            if let Some([a, b]) = hierarchy.children(k, &Hierarchy::unflat(k, flat)) {
                g.add_edge(node, a, f64::INFINITY);
                g.add_edge(node, b, f64::INFINITY);
            }
        }
    }
    let cut = g.max_flow(source, sink);
    if positive.value() - cut <= 0.0 {
        return None;
    }
    let side = g.source_side(source);
    let cells: Vec<bool> = cell_nodes.iter().map(|&c| side[c]).collect();
    cells.iter().any(|&c| c).then_some(cells)
}

/// Default search level `min(4, floor(20 / d))`.
pub fn default_search_level(dim: usize) -> u32 {
    4.min(20 / dim.max(1)) as u32
}

/// Best lower bound on `‖Δ_P‖_BMO` over the full cube, dyadic boxes with
/// `|u| ≤ L`, and unions of level-`L` cells.
pub fn bmo_discrepancy(points: &PointSet, max_order: u32, search_level: u32) -> Result<BmoEstimate> {
    if max_order < search_level {
        return Err(Error::InvalidArgument(format!(
            "truncation order {max_order} below the search level {search_level}"
        )));
    }
    let global = bmo_global(points, max_order)?;
    let tail = haar::tail_bound(points, max_order)?;
    let table = EnergyTable::build(points, max_order)?;

    let mut squared = global;
    let mut candidate = CandidateSet::FullCube;

    if let Some((index, v)) = best_dyadic_box(&table, search_level) {
        if v > squared {
            squared = v;
            candidate = CandidateSet::DyadicBox {
                levels: index.levels().to_vec(),
                positions: index.positions().to_vec(),
            };
        }
    }
    let union = union_search_with(&table, search_level, max_order)?;
    if union.squared > squared {
        squared = union.squared;
        candidate = CandidateSet::CellUnion { level: union.level, cells: union.cells };
    }

    Ok(BmoEstimate {
        value: squared.sqrt(),
        squared,
        candidate_u: candidate,
        truncation_order: max_order,
        search_level,
        global_term_squared: global,
        tail_bound: tail,
        union_level: union.level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::extreme_l2_haar;
    use crate::pointset::{gen_corner, gen_random};

    fn idx(levels: &[i32], positions: &[u64]) -> DyadicIndex {
        DyadicIndex::new(levels.to_vec(), positions.to_vec()).unwrap()
    }

    #[test]
    fn initial_values() {
        assert!((bmo_initial(1) - 0.288_675_134_594_812_9).abs() < 1e-16);
        assert!((bmo_initial(2) - 1.0 / 12.0).abs() < 1e-17);
        assert!((bmo_initial(3) - 0.024_056_261_216_234_4).abs() < 1e-17);
    }

    #[test]
    fn global_term_examples() {
        let e = PointSet::empty(1).unwrap();
        assert!((bmo_global(&e, 30).unwrap() - 1.0 / 12.0).abs() < 1e-18);
        let c = gen_corner(1, 1).unwrap();
        assert!((bmo_global(&c, 20).unwrap() - 1.0 / 12.0).abs() < 1e-9);
        let p = gen_random(12, 3, 1).unwrap();
        assert_eq!(bmo_global(&p, 8).unwrap(), extreme_l2_haar(&p, 8).unwrap().squared);
    }

    #[test]
    fn empty_set_dyadic_boxes() {
        // for Δ_∅ the box I_{u,m} gives 12^{-d} 4^{-|u|} in the limit
        let e = PointSet::empty(1).unwrap();
        let full = bmo_dyadic_box(&e, &idx(&[0], &[0]), 20).unwrap();
        assert!((full - 1.0 / 12.0).abs() < 1e-6);
        let half = bmo_dyadic_box(&e, &idx(&[1], &[1]), 30).unwrap();
        assert!((half - 1.0 / 48.0).abs() < 1e-15);
        let e2 = PointSet::empty(2).unwrap();
        let b = bmo_dyadic_box(&e2, &idx(&[1, 2], &[0, 3]), 40).unwrap();
        assert!((b - 1.0 / 144.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_box_errors() {
        let p = gen_random(4, 2, 0).unwrap();
        assert!(bmo_dyadic_box(&p, &idx(&[-1, 0], &[0, 0]), 5).is_err());
        assert!(bmo_dyadic_box(&p, &idx(&[3, 3], &[0, 0]), 5).is_err());
    }

    #[test]
    fn dyadic_box_matches_direct_sum() {
        let p = gen_random(6, 2, 21).unwrap();
        let u = idx(&[1, 0], &[1, 0]);
        let j_max = 6;
        let mut direct = 0.0;
        for levels in haar::levels_up_to(2, j_max, false) {
            if levels[0] < 1 {
                continue;
            }
            let k = haar::order(&levels) as i32;
            for m0 in 0..(1u64 << levels[0]) {
                if m0 >> (levels[0] - 1) != 1 {
                    continue;
                }
                for m1 in 0..(1u64 << levels[1]) {
                    let c = haar::haar_coefficient(&p, &idx(&levels, &[m0, m1])).unwrap().value;
                    direct += pow2(k) * c * c;
                }
            }
        }
        direct *= 2.0;
        let fast = bmo_dyadic_box(&p, &u, j_max).unwrap();
        assert!((fast - direct).abs() < 1e-15, "{fast} vs {direct}");
    }

    #[test]
    fn union_search_on_empty_set_is_full_cube() {
        let e = PointSet::empty(1).unwrap();
        let u = bmo_union_search(&e, 2, 12).unwrap();
        assert!((u.squared - 1.0 / 12.0).abs() < 1e-6);
        assert_eq!(u.cells.len(), 4);
    }

    #[test]
    fn union_dominates_global_and_boxes() {
        for seed in 0..4 {
            let p = gen_random(10, 2, seed).unwrap();
            let table = EnergyTable::build(&p, 8).unwrap();
            let u = union_search_with(&table, 2, 8).unwrap();
            let g = bmo_global(&p, 8).unwrap();
            assert!(u.squared >= g * (1.0 - 1e-12));
            // every box with all levels ≤ 2 is a union of level-2 cells
            for levels in haar::levels_up_to(2, 4, false) {
                if levels.iter().any(|&j| j > 2) {
                    continue;
                }
                for m0 in 0..(1u64 << levels[0]) {
                    for m1 in 0..(1u64 << levels[1]) {
                        let b = bmo_dyadic_box(&p, &idx(&levels, &[m0, m1]), 8).unwrap();
                        assert!(u.squared >= b * (1.0 - 1e-12), "seed {seed} box {levels:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn union_ratio_is_maximal_by_enumeration() {
        // d = 1, level 2: 15 nonempty unions of 4 cells
        let p = gen_random(5, 1, 3).unwrap();
        let table = EnergyTable::build(&p, 10).unwrap();
        let found = union_search_with(&table, 2, 10).unwrap();
        let h = Hierarchy::new(1, 2);
        let w = box_weights(&table, &h, 2);
        let mut best: f64 = 0.0;
        for mask in 1u32..16 {
            let cells: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            best = best.max(ratio_of(&h, &w, &cells, 0.25));
        }
        assert!((found.squared - best).abs() <= 1e-15 * best, "{} vs {best}", found.squared);
    }

    #[test]
    fn union_size_guard() {
        let p = gen_random(3, 5, 0).unwrap();
        assert!(matches!(bmo_union_search(&p, 5, 6), Err(Error::SearchTooLarge(_))));
    }

    #[test]
    fn first_unoccupied_position() {
        let mut occ: BTreeMap<Vec<u64>, ()> = BTreeMap::new();
        assert_eq!(first_unoccupied(&[1, 1], &occ), Some(vec![0, 0]));
        occ.insert(vec![0, 0], ());
        occ.insert(vec![0, 1], ());
        assert_eq!(first_unoccupied(&[1, 1], &occ), Some(vec![1, 0]));
        occ.insert(vec![1, 0], ());
        occ.insert(vec![1, 1], ());
        assert_eq!(first_unoccupied(&[1, 1], &occ), None);
    }

    #[test]
    fn estimates() {
        let e = PointSet::empty(2).unwrap();
        let est = bmo_discrepancy(&e, 20, 2).unwrap();
        assert!((est.value - 1.0 / 12.0).abs() < 1e-9);
        assert!(est.squared <= 1.0 / 144.0);
        let c = gen_corner(1, 1).unwrap();
        let ce = bmo_discrepancy(&c, 20, 2).unwrap();
        assert!(ce.value >= 12f64.powf(-0.5) - 1e-9);
        let p = gen_random(30, 2, 5).unwrap();
        let pe = bmo_discrepancy(&p, 10, 3).unwrap();
        assert!(pe.squared >= pe.global_term_squared);
        assert!(pe.value >= extreme_l2_haar(&p, 10).unwrap().value);
    }

    #[test]
    fn hierarchy_layout() {
        let h = Hierarchy::new(2, 2);
        assert_eq!(h.level_vectors.len(), 9);
        assert_eq!(h.node_count, 49);
        assert_eq!(Hierarchy::node_count_for(2, 2), 49);
        let m = Hierarchy::unflat(&[1, 2], Hierarchy::flat(&[1, 2], &[1, 3]));
        assert_eq!(m, vec![1, 3]);
    }
}
