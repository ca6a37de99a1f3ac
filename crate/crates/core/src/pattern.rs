//! 2x2 ordinal patterns and their types.
//!
//! A window `(w1 w2; w3 w4)` is read row-major: top-left, top-right,
//! bottom-left, bottom-right. Its ordinal pattern is the quadruple of ranks
//! `r_k = #{j : w_j <= w_k}`, so 1 marks the minimum and 4 the maximum.
//!
//! Pattern indices run from 1 to 24: 1-8 are the type I patterns, 9-16 type II
//! and 17-24 type III. Inside each block patterns are sorted
//! lexicographically by `(r1, r2, r3, r4)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par::{self, Execution};

/// Number of distinct 2x2 ordinal patterns.
pub const PATTERN_COUNT: usize = 24;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x0D0E_2023;

/// Default relative amplitude of the tie-breaking perturbation.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum TypeLabel {
    /// Smooth: rows and columns change in parallel.
    I = 1,
    /// Edge or curve: parallel change along one axis only.
    II = 2,
    /// Saddle or noise: one diagonal lies above the other.
    III = 3,
}

impl TypeLabel {
    pub const ALL: [TypeLabel; 3] = [TypeLabel::I, TypeLabel::II, TypeLabel::III];

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(value: u8) -> Option<Self> {
        match value {
            1 => Some(TypeLabel::I),
            2 => Some(TypeLabel::II),
            3 => Some(TypeLabel::III),
            _ => None,
        }
    }

    /// Type of the pattern with the given 1-based index.
    pub fn of_index(index: u8) -> Option<Self> {
        match index {
            1..=24 => Self::from_value((index - 1) / 8 + 1),
            _ => None,
        }
    }

    #[inline]
    fn slot(self) -> usize {
        self as usize - 1
    }
}

/// Ranks `(r1, r2, r3, r4)` of one window, always a permutation of 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankQuad([u8; 4]);

impl RankQuad {
    pub fn new(ranks: [u8; 4]) -> Result<Self> {
        if is_permutation(ranks) {
            Ok(Self(ranks))
        } else {
            Err(Error::InvalidInput(format!(
                "{ranks:?} is not a permutation of 1..=4"
            )))
        }
    }

    pub fn ranks(self) -> [u8; 4] {
        self.0
    }

    /// Pattern with the given 1-based index.
    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            1..=24 => Some(Self(PATTERNS[index as usize - 1])),
            _ => None,
        }
    }

    /// All 24 patterns in index order.
    pub fn all() -> impl Iterator<Item = RankQuad> {
        PATTERNS.iter().map(|&r| RankQuad(r))
    }

    pub fn type_label(self) -> TypeLabel {
        match type_of_ranks(self.0) {
            1 => TypeLabel::I,
            2 => TypeLabel::II,
            _ => TypeLabel::III,
        }
    }

    #[inline]
    fn code(self) -> usize {
        code_of(self.0)
    }
}

const fn is_permutation(r: [u8; 4]) -> bool {
    let mut seen = [false; 5];
    let mut k = 0;
    while k < 4 {
        if r[k] < 1 || r[k] > 4 || seen[r[k] as usize] {
            return false;
        }
        seen[r[k] as usize] = true;
        k += 1;
    }
    true
}

#[inline]
const fn code_of(r: [u8; 4]) -> usize {
    ((r[0] as usize - 1) << 6) | ((r[1] as usize - 1) << 4) | ((r[2] as usize - 1) << 2) | (r[3] as usize - 1)
}

/// The row/column comparison rule, applied to distinct values.
const fn type_of_ranks(r: [u8; 4]) -> u8 {
    let mut a = (r[0] < r[1]) as u8 + (r[2] < r[3]) as u8;
    if a == 2 {
        a = 0;
    }
    let mut b = (r[0] < r[2]) as u8 + (r[1] < r[3]) as u8;
    if b == 2 {
        b = 0;
    }
    a + b + 1
}

/// `INDEX_BY_CODE[code]` is the 1-based pattern index, 0 for non-permutations.
static INDEX_BY_CODE: [u8; 256] = build_index_table();
static PATTERNS: [[u8; 4]; 24] = build_pattern_list();

const fn decode(code: usize) -> [u8; 4] {
    [
        ((code >> 6) & 3) as u8 + 1,
        ((code >> 4) & 3) as u8 + 1,
        ((code >> 2) & 3) as u8 + 1,
        (code & 3) as u8 + 1,
    ]
}

// Codes increase with lexicographic order of the ranks, so scanning codes in
// ascending order visits each type block in the required order.
const fn build_index_table() -> [u8; 256] {
    let mut table = [0u8; 256];
    let mut filled = [0u8; 3];
    let mut code = 0;
    while code < 256 {
        let r = decode(code);
        if is_permutation(r) {
            let t = type_of_ranks(r) as usize - 1;
            filled[t] += 1;
            table[code] = (t as u8) * 8 + filled[t];
        }
        code += 1;
    }
    table
}

const fn build_pattern_list() -> [[u8; 4]; 24] {
    let table = build_index_table();
    let mut list = [[0u8; 4]; 24];
    let mut code = 0;
    while code < 256 {
        if table[code] != 0 {
            list[table[code] as usize - 1] = decode(code);
        }
        code += 1;
    }
    list
}

fn check_distinct(w: [f64; 4]) -> Result<()> {
    for i in 0..4 {
        for j in i + 1..4 {
            if w[i] == w[j] {
                return Err(Error::Tie(w));
            }
        }
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite window {w:?}")));
    }
    Ok(())
}

/// Ranks of four pairwise distinct values.
pub fn rank_window(w: [f64; 4]) -> Result<RankQuad> {
    check_distinct(w)?;
    let mut r = [0u8; 4];
    for k in 0..4 {
        r[k] = w.iter().filter(|&&wj| wj <= w[k]).count() as u8;
    }
    Ok(RankQuad(r))
}

/// Type of a window of four pairwise distinct values.
///
/// Only row and column comparisons are used:
/// `a = (w1<w2) + (w3<w4)`, `b = (w1<w3) + (w2<w4)`, each reset to 0 when it
/// equals 2, and the type is `a + b + 1`.
pub fn classify_type(w: [f64; 4]) -> Result<TypeLabel> {
    check_distinct(w)?;
    let mut a = (w[0] < w[1]) as u8 + (w[2] < w[3]) as u8;
    if a == 2 {
        a = 0;
    }
    let mut b = (w[0] < w[2]) as u8 + (w[1] < w[3]) as u8;
    if b == 2 {
        b = 0;
    }
    Ok(TypeLabel::from_value(a + b + 1).expect("a + b + 1 is in 1..=3"))
}

/// 1-based canonical index of a pattern.
pub fn pattern_index(quad: RankQuad) -> u8 {
    INDEX_BY_CODE[quad.code()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakMode {
    /// Seeded uniform noise on `[0, delta)`.
    Noise,
    /// Value at flat index `i` of `n` cells is raised by `delta * i / n`.
    Deterministic,
}

/// How equal values are forced into a strict order before ranking.
///
/// `delta = epsilon * g`, where `g` is the smallest nonzero gap between
/// distinct grid values (1 for a constant grid). With `epsilon <= 1` every
/// perturbation is smaller than `g`, so strict inequalities of the input
/// survive. Exact ties that remain after rounding are ordered by flat index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieBreakPolicy {
    pub mode: TieBreakMode,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TieBreakPolicy {
    fn default() -> Self {
        Self::noise(DEFAULT_EPSILON, DEFAULT_SEED)
    }
}

impl TieBreakPolicy {
    pub fn noise(epsilon: f64, seed: u64) -> Self {
        Self {
            mode: TieBreakMode::Noise,
            epsilon,
            seed,
        }
    }

    pub fn deterministic(epsilon: f64) -> Self {
        Self {
            mode: TieBreakMode::Deterministic,
            epsilon,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "tie-break epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Smallest positive difference between distinct values, if any.
fn smallest_gap(values: &[f64]) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .min_by(f64::total_cmp)
}

/// Returns a perturbed copy of `grid` without ties. The input is untouched.
pub fn break_ties(grid: &Grid, policy: &TieBreakPolicy) -> Result<Grid> {
    policy.validate()?;
    let values = grid.values();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value {v}")));
    }
    let delta = policy.epsilon * smallest_gap(values).unwrap_or(1.0);
    let n = values.len() as f64;
    let out: Vec<f64> = match policy.mode {
        TieBreakMode::Deterministic => values
            .iter()
            .enumerate()
            .map(|(i, &v)| v + delta * (i as f64 / n))
            .collect(),
        TieBreakMode::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
            values
                .iter()
                .map(|&v| v + delta * rng.random::<f64>())
                .collect()
        }
    };
    Ok(Grid::from_parts_unchecked(grid.rows(), grid.cols(), out))
}

/// Vertical and horizontal offsets between the pixels of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Delay {
    pub rows: usize,
    pub cols: usize,
}

impl Delay {
    pub fn isotropic(d: usize) -> Self {
        Self { rows: d, cols: d }
    }

    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    fn check(self, grid: &Grid) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidInput("delay must be positive".into()));
        }
        if self.rows >= grid.rows() || self.cols >= grid.cols() {
            return Err(Error::DelayTooLarge {
                delay: self.rows.max(self.cols),
                rows: grid.rows(),
                cols: grid.cols(),
            });
        }
        Ok(())
    }
}

/// `(M - dy) x (N - dx)` field of window types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeField {
    rows: usize,
    cols: usize,
    delay: Delay,
    labels: Vec<TypeLabel>,
}

impl TypeField {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn delay(&self) -> Delay {
        self.delay
    }

    pub fn labels(&self) -> &[TypeLabel] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> TypeLabel {
        self.labels[row * self.cols + col]
    }

    /// Number of windows of each type.
    pub fn counts(&self) -> [u64; 3] {
        let mut counts = [0u64; 3];
        for &t in &self.labels {
            counts[t.slot()] += 1;
        }
        counts
    }

    pub fn from_labels(rows: usize, cols: usize, delay: Delay, labels: Vec<TypeLabel>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} labels do not fill a {rows}x{cols} field",
                labels.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            delay,
            labels,
        })
    }
}

/// Field of 1-based pattern indices, same shape as the matching [`TypeField`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternField {
    rows: usize,
    cols: usize,
    indices: Vec<u8>,
}

impl PatternField {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.indices[row * self.cols + col]
    }

    /// Number of windows per pattern, position `k` holding index `k + 1`.
    pub fn counts(&self) -> [u64; PATTERN_COUNT] {
        let mut counts = [0u64; PATTERN_COUNT];
        for &i in &self.indices {
            counts[i as usize - 1] += 1;
        }
        counts
    }

    /// Type field implied by the block structure of the indices.
    pub fn to_type_field(&self, delay: Delay) -> TypeField {
        TypeField {
            rows: self.rows,
            cols: self.cols,
            delay,
            labels: self
                .indices
                .iter()
                .map(|&i| TypeLabel::of_index(i).expect("valid pattern index"))
                .collect(),
        }
    }
}

/// Breaks ties with `policy`, then extracts type and pattern fields at delay `d`.
pub fn extract_fields(grid: &Grid, d: usize, policy: &TieBreakPolicy) -> Result<(TypeField, PatternField)> {
    extract_fields_with(grid, Delay::isotropic(d), policy, Execution::default())
}

/// [`extract_fields`] with separate vertical/horizontal delays and an explicit schedule.
pub fn extract_fields_with(
    grid: &Grid,
    delay: Delay,
    policy: &TieBreakPolicy,
    exec: Execution,
) -> Result<(TypeField, PatternField)> {
    delay.check(grid)?;
    let strict = break_ties(grid, policy)?;
    let patterns = pattern_field_of_ordered(&strict, delay, exec)?;
    let types = patterns.to_type_field(delay);
    Ok((types, patterns))
}

/// Pattern field of a grid whose values are taken as already tie-free.
///
/// Any remaining exact ties are resolved by flat index, the earlier cell
/// ranking lower.
pub fn pattern_field_of_ordered(grid: &Grid, delay: Delay, exec: Execution) -> Result<PatternField> {
    delay.check(grid)?;
    let rows = grid.rows() - delay.rows;
    let cols = grid.cols() - delay.cols;
    let mut indices = vec![0u8; rows * cols];
    let n = grid.cols();
    let values = grid.values();
    par::for_each_chunk_mut(exec, &mut indices, cols, |m, out| {
        let top = &values[m * n..(m + 1) * n];
        let bottom = &values[(m + delay.rows) * n..(m + delay.rows + 1) * n];
        for (c, slot) in out.iter_mut().enumerate() {
            let w = [top[c], top[c + delay.cols], bottom[c], bottom[c + delay.cols]];
            *slot = INDEX_BY_CODE[code_of(ranks_position_tiebreak(w))];
        }
    });
    Ok(PatternField {
        rows,
        cols,
        indices,
    })
}

/// Ranks with ties resolved by window position, which for a window is
/// the same as flat-index order.
#[inline]
fn ranks_position_tiebreak(w: [f64; 4]) -> [u8; 4] {
    let mut r = [1u8; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            // (w_i, i) < (w_j, j) unless w_j is strictly smaller
            if w[j] < w[i] {
                r[i] += 1;
            } else {
                r[j] += 1;
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_permutations() -> Vec<[u8; 4]> {
        let mut out = Vec::new();
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                for c in 1..=4u8 {
                    for d in 1..=4u8 {
                        if is_permutation([a, b, c, d]) {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }

    fn as_values(r: [u8; 4]) -> [f64; 4] {
        r.map(f64::from)
    }

    #[test]
    fn rank_window_examples() {
        assert_eq!(rank_window([0.5, 0.9, 0.1, 0.3]).unwrap().ranks(), [3, 4, 1, 2]);
        assert_eq!(rank_window([1.0, 2.0, 3.0, 4.0]).unwrap().ranks(), [1, 2, 3, 4]);
        assert_eq!(rank_window([4.0, 3.0, 2.0, 1.0]).unwrap().ranks(), [4, 3, 2, 1]);
    }

    #[test]
    fn ties_are_rejected() {
        assert!(matches!(rank_window([1.0, 1.0, 2.0, 3.0]), Err(Error::Tie(_))));
        assert!(matches!(classify_type([0.0, 1.0, 2.0, 0.0]), Err(Error::Tie(_))));
        assert!(rank_window([f64::NAN, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn classify_type_examples() {
        assert_eq!(classify_type([1.0, 2.0, 3.0, 4.0]).unwrap(), TypeLabel::I);
        assert_eq!(classify_type([1.0, 4.0, 2.0, 3.0]).unwrap(), TypeLabel::II);
        assert_eq!(classify_type([3.0, 1.0, 2.0, 4.0]).unwrap(), TypeLabel::III);
    }

    #[test]
    fn eight_patterns_per_type() {
        let mut counts = [0; 3];
        for r in all_permutations() {
            counts[classify_type(as_values(r)).unwrap().slot()] += 1;
        }
        assert_eq!(counts, [8, 8, 8]);
    }

    #[test]
    fn type_is_rank_sharing_diagonal_with_four() {
        // Diagonals are positions {0, 3} and {1, 2}.
        for r in all_permutations() {
            let four = r.iter().position(|&x| x == 4).unwrap();
            let partner = r[3 - four];
            assert_eq!(classify_type(as_values(r)).unwrap().value(), partner, "{r:?}");
        }
    }

    #[test]
    fn pattern_index_is_block_ordered_bijection() {
        let mut seen = [false; 25];
        for r in all_permutations() {
            let quad = RankQuad::new(r).unwrap();
            let idx = pattern_index(quad);
            assert!((1..=24).contains(&idx));
            assert!(!seen[idx as usize]);
            seen[idx as usize] = true;
            assert_eq!(TypeLabel::of_index(idx), Some(classify_type(as_values(r)).unwrap()));
            assert_eq!(RankQuad::from_index(idx), Some(quad));
        }
        assert_eq!(pattern_index(RankQuad::new([1, 2, 3, 4]).unwrap()), 1);
        for block in RankQuad::all().collect::<Vec<_>>().chunks(8) {
            assert!(block.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(RankQuad::new([1, 1, 2, 3]).is_err());
        assert!(RankQuad::new([0, 1, 2, 3]).is_err());
    }

    #[test]
    fn break_ties_deterministic_on_constant_grid() {
        let g = Grid::new(3, 3, vec![0.0; 9]).unwrap();
        let s = break_ties(&g, &TieBreakPolicy::deterministic(1e-6)).unwrap();
        assert!(s.values().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.values(), &[0.0; 9]);
        let (types, patterns) = extract_fields(&g, 1, &TieBreakPolicy::deterministic(1e-6)).unwrap();
        assert!(types.labels().iter().all(|&t| t == TypeLabel::I));
        assert!(patterns.indices().iter().all(|&i| i == 1));
    }

    #[test]
    fn break_ties_preserves_strict_order() {
        let g = Grid::from_fn(5, 7, |r, c| ((r * 31 + c * 17) % 35) as f64 * 0.5).unwrap();
        for policy in [TieBreakPolicy::deterministic(1.0), TieBreakPolicy::noise(1.0, 9)] {
            let s = break_ties(&g, &policy).unwrap();
            for i in 0..g.len() {
                for j in 0..g.len() {
                    if g.values()[i] < g.values()[j] {
                        assert!(s.values()[i] < s.values()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn break_ties_rejects_bad_epsilon() {
        let g = Grid::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(break_ties(&g, &TieBreakPolicy::noise(0.0, 1)).is_err());
        assert!(break_ties(&g, &TieBreakPolicy::noise(-1.0, 1)).is_err());
        assert!(break_ties(&g, &TieBreakPolicy::deterministic(2.0)).is_err());
    }

    #[test]
    fn noise_seed_reproducibility() {
        // 4x4 8-bit values, half of them duplicates
        let g = Grid::new(
            4,
            4,
            vec![
                10., 10., 20., 20., 30., 30., 40., 40., 10., 50., 20., 60., 70., 30., 80., 40.,
            ],
        )
        .unwrap();
        let a = extract_fields(&g, 1, &TieBreakPolicy::noise(1e-6, 5)).unwrap();
        let b = extract_fields(&g, 1, &TieBreakPolicy::noise(1e-6, 5)).unwrap();
        assert_eq!(a, b);
        let differs = (0..50u64)
            .any(|s| extract_fields(&g, 1, &TieBreakPolicy::noise(1e-6, s)).unwrap().0 != a.0);
        assert!(differs);
    }

    #[test]
    fn extract_examples() {
        let g = Grid::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let (t, p) = extract_fields(&g, 1, &TieBreakPolicy::default()).unwrap();
        assert_eq!((t.rows(), t.cols()), (1, 1));
        assert_eq!(t.get(0, 0), TypeLabel::I);
        assert_eq!(p.get(0, 0), 1);

        assert!(matches!(
            extract_fields(&g, 2, &TieBreakPolicy::default()),
            Err(Error::DelayTooLarge { .. })
        ));
        assert!(extract_fields(&g, 0, &TieBreakPolicy::default()).is_err());
    }

    #[test]
    fn extract_uses_delayed_corners() {
        let g = Grid::from_fn(6, 5, |r, c| ((r * 7 + c * 3) % 11) as f64 + 0.01 * (r * 5 + c) as f64).unwrap();
        let policy = TieBreakPolicy::deterministic(1e-6);
        for (dy, dx) in [(1, 1), (2, 3), (3, 1)] {
            let (t, p) = extract_fields_with(&g, Delay::new(dy, dx), &policy, Execution::Sequential).unwrap();
            assert_eq!((t.rows(), t.cols()), (6 - dy, 5 - dx));
            for m in 0..t.rows() {
                for n in 0..t.cols() {
                    let w = [g.get(m, n), g.get(m, n + dx), g.get(m + dy, n), g.get(m + dy, n + dx)];
                    assert_eq!(t.get(m, n), classify_type(w).unwrap());
                    assert_eq!(p.get(m, n), pattern_index(rank_window(w).unwrap()));
                }
            }
        }
    }

    #[test]
    fn schedule_does_not_change_fields() {
        let g = crate::synth::white_noise(40, 33, 3).unwrap();
        let policy = TieBreakPolicy::default();
        let a = extract_fields_with(&g, Delay::isotropic(2), &policy, Execution::Sequential).unwrap();
        let b = extract_fields_with(&g, Delay::isotropic(2), &policy, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn residual_ties_follow_position() {
        assert_eq!(ranks_position_tiebreak([0.0; 4]), [1, 2, 3, 4]);
        assert_eq!(ranks_position_tiebreak([1.0, 0.0, 1.0, 0.0]), [3, 1, 4, 2]);
    }
}
