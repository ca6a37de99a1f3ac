//! Exact white-noise statistics of types in a 3x3 block.
//!
//! Under white noise every ordering of the nine values of a 3x3 block is
//! equally likely. Enumerating all 9! = 362880 orderings and recording the
//! types of the four 2x2 sub-windows (upper-left, upper-right, lower-left,
//! lower-right) gives the joint law of neighboring types. Everything here is
//! computed from integer counts; rationals are exact.

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::pattern::{classify_type, TypeLabel};

pub type Rational = Ratio<i64>;
pub type Matrix3 = [[Rational; 3]; 3];

/// 9!
pub const BLOCK_PERMUTATIONS: usize = 362_880;

/// Sub-window positions inside the 3x3 block.
pub const UPPER_LEFT: usize = 0;
pub const UPPER_RIGHT: usize = 1;
pub const LOWER_LEFT: usize = 2;
pub const LOWER_RIGHT: usize = 3;

/// Pairs of sub-windows sharing an edge (row or column neighbors).
pub const ADJACENT_PAIRS: [(usize, usize); 4] = [
    (UPPER_LEFT, UPPER_RIGHT),
    (LOWER_LEFT, LOWER_RIGHT),
    (UPPER_LEFT, LOWER_LEFT),
    (UPPER_RIGHT, LOWER_RIGHT),
];

/// Top-left cell of each sub-window in the row-major 3x3 block.
const SUB_WINDOW_ORIGIN: [usize; 4] = [0, 1, 3, 4];

/// Types of the four sub-windows for every ordering of a 3x3 block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMatrix {
    rows: Vec<[TypeLabel; 4]>,
}

impl TypeMatrix {
    pub fn rows(&self) -> &[[TypeLabel; 4]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn total(&self) -> i64 {
        self.rows.len() as i64
    }
}

/// Types of the four sub-windows of a row-major 3x3 block of distinct values.
pub fn block_types(block: &[u8; 9]) -> [TypeLabel; 4] {
    SUB_WINDOW_ORIGIN.map(|o| {
        let w = [block[o], block[o + 1], block[o + 3], block[o + 4]].map(f64::from);
        classify_type(w).expect("block values are distinct")
    })
}

/// Rearranges `v` into the next lexicographic permutation; false after the last one.
fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

pub fn build_type_matrix() -> TypeMatrix {
    build_type_matrix_with(Execution::default())
}

/// Enumerates the orderings of 1..=9 in lexicographic order.
///
/// Work is split by the first two entries (72 prefixes of 7! orderings each);
/// chunks are concatenated in prefix order, so the result does not depend on
/// the schedule.
pub fn build_type_matrix_with(exec: Execution) -> TypeMatrix {
    let prefixes: Vec<(u8, u8)> = (1..=9u8)
        .flat_map(|a| (1..=9u8).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let chunks = par::map_slice(exec, &prefixes, |&(a, b)| {
        let mut tail: Vec<u8> = (1..=9u8).filter(|&x| x != a && x != b).collect();
        let mut out = Vec::with_capacity(5040);
        loop {
            let mut block = [0u8; 9];
            block[0] = a;
            block[1] = b;
            block[2..].copy_from_slice(&tail);
            out.push(block_types(&block));
            if !next_permutation(&mut tail) {
                break;
            }
        }
        out
    });
    TypeMatrix {
        rows: chunks.into_iter().flatten().collect(),
    }
}

/// `counts[j][k]`: rows with type `j + 1` at `first` and `k + 1` at `second`.
pub fn joint_counts(tm: &TypeMatrix, first: usize, second: usize) -> [[u64; 3]; 3] {
    let mut counts = [[0u64; 3]; 3];
    for row in tm.rows() {
        counts[row[first] as usize - 1][row[second] as usize - 1] += 1;
    }
    counts
}

/// `Cov(Y_j, Z_k) = P(first = j, second = k) - 1/9`, exact.
pub fn pair_covariance(tm: &TypeMatrix, first: usize, second: usize) -> Matrix3 {
    let counts = joint_counts(tm, first, second);
    let n = tm.total();
    counts.map(|row| row.map(|c| Rational::new(c as i64, n) - Rational::new(1, 9)))
}

/// Covariance matrix of the types of two horizontally neighboring windows.
pub fn neighbor_covariance(tm: &TypeMatrix) -> Matrix3 {
    pair_covariance(tm, UPPER_LEFT, UPPER_RIGHT)
}

pub fn vertical_neighbor_covariance(tm: &TypeMatrix) -> Matrix3 {
    pair_covariance(tm, UPPER_LEFT, LOWER_LEFT)
}

/// Covariance of diagonal neighbors; zero under white noise.
pub fn diagonal_neighbor_covariance(tm: &TypeMatrix) -> Matrix3 {
    pair_covariance(tm, UPPER_LEFT, LOWER_RIGHT)
}

pub fn anti_diagonal_neighbor_covariance(tm: &TypeMatrix) -> Matrix3 {
    pair_covariance(tm, UPPER_RIGHT, LOWER_LEFT)
}

/// Asymptotic covariance structure of `q1, q2, q3` for white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub neighbor: Matrix3,
    pub diagonal: Matrix3,
    /// `U * Cov(q_j, q_k)`.
    pub scaled_cov: Matrix3,
    /// `U * Var(tau)`.
    pub var_tau: Rational,
    /// `U * Var(kappa)`.
    pub var_kappa: Rational,
    /// `U * Cov(tau, kappa)`.
    pub cov_tau_kappa: Rational,
    /// Squared correlation of `tau` and `kappa`, exact.
    pub correlation_squared: Rational,
    pub correlation: f64,
    /// `U * Cov(q3 - 1/3, q1 - q2)`.
    pub cov_alt: Rational,
}

/// Neglecting borders, each window has four row/column neighbors whose
/// covariance is `c_jk`; all other pairs are independent. With the
/// single-window variance `2/9` and covariance `-1/9`:
/// `U Cov(q_j, q_k) = 4 c_jk + 2/9` if `j = k`, else `4 c_jk - 1/9`.
pub fn scaled_covariance(neighbor: &Matrix3) -> Matrix3 {
    let mut out = [[Rational::from_integer(0); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let own = if j == k {
                Rational::new(2, 9)
            } else {
                Rational::new(-1, 9)
            };
            out[j][k] = Rational::from_integer(4) * neighbor[j][k] + own;
        }
    }
    out
}

pub fn asymptotic_covariance(tm: &TypeMatrix) -> CovarianceReport {
    let neighbor = neighbor_covariance(tm);
    let diagonal = diagonal_neighbor_covariance(tm);
    let v = scaled_covariance(&neighbor);
    let var_tau = v[0][0];
    let var_kappa = v[1][1] + v[2][2] - Rational::from_integer(2) * v[1][2];
    let cov_tau_kappa = v[0][1] - v[0][2];
    let correlation_squared = cov_tau_kappa * cov_tau_kappa / (var_tau * var_kappa);
    let correlation = ratio_to_f64(cov_tau_kappa) / (ratio_to_f64(var_tau) * ratio_to_f64(var_kappa)).sqrt();
    let cov_alt = v[2][0] - v[2][1];
    CovarianceReport {
        neighbor,
        diagonal,
        scaled_cov: v,
        var_tau,
        var_kappa,
        cov_tau_kappa,
        correlation_squared,
        correlation,
        cov_alt,
    }
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Probability that a sub-window is type III given neighboring type III windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalType3 {
    pub baseline: Rational,
    /// One row/column neighbor is type III.
    pub one: Rational,
    /// Both neighbors of the window within the block are type III.
    pub two: Rational,
    /// The other three windows of the block are type III.
    pub three: Rational,
}

impl ConditionalType3 {
    pub fn as_f64(&self) -> [f64; 4] {
        [self.baseline, self.one, self.two, self.three].map(ratio_to_f64)
    }
}

/// Row/column neighbors of each sub-window within the block.
const NEIGHBORS: [[usize; 2]; 4] = [
    [UPPER_RIGHT, LOWER_LEFT],
    [UPPER_LEFT, LOWER_RIGHT],
    [UPPER_LEFT, LOWER_RIGHT],
    [UPPER_RIGHT, LOWER_LEFT],
];

/// Conditional type III probabilities, pooled over all symmetric placements.
///
/// The "two" configuration conditions on the two windows adjacent to the
/// target; they lie diagonal to each other and form an L with the target.
/// Conditioning instead on two windows in the same row as each other
/// (one adjacent, one diagonal to the target) yields 29/77 ≈ 0.377.
pub fn conditional_type3(tm: &TypeMatrix) -> ConditionalType3 {
    let is3 = |t: TypeLabel| t == TypeLabel::III;
    let (mut base, mut one_hit, mut one_all, mut two_hit, mut two_all, mut three_hit, mut three_all) =
        (0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64);
    for row in tm.rows() {
        let iii = row.map(is3);
        base += iii[UPPER_LEFT] as i64;
        for target in 0..4 {
            for &n in &NEIGHBORS[target] {
                if iii[n] {
                    one_all += 1;
                    one_hit += iii[target] as i64;
                }
            }
            let [a, b] = NEIGHBORS[target];
            if iii[a] && iii[b] {
                two_all += 1;
                two_hit += iii[target] as i64;
            }
            let others = (0..4).filter(|&k| k != target).all(|k| iii[k]);
            if others {
                three_all += 1;
                three_hit += iii[target] as i64;
            }
        }
    }
    ConditionalType3 {
        baseline: Rational::new(base, tm.total()),
        one: Rational::new(one_hit, one_all),
        two: Rational::new(two_hit, two_all),
        three: Rational::new(three_hit, three_all),
    }
}

/// Same quantity for two windows of one row conditioning a window below one of them.
pub fn conditional_type3_same_row(tm: &TypeMatrix) -> Rational {
    let mut hit = 0;
    let mut all = 0;
    for row in tm.rows() {
        if row[UPPER_LEFT] == TypeLabel::III && row[UPPER_RIGHT] == TypeLabel::III {
            all += 1;
            hit += (row[LOWER_LEFT] == TypeLabel::III) as i64;
        }
    }
    Rational::new(hit, all)
}

/// Bin of a type 4-tuple in lexicographic order, `(1,1,1,1)` -> 0, `(3,3,3,3)` -> 80.
pub fn combo_bin(types: [TypeLabel; 4]) -> usize {
    types.iter().fold(0, |acc, &t| acc * 3 + (t as usize - 1))
}

pub fn combo_from_bin(bin: usize) -> [TypeLabel; 4] {
    let mut out = [TypeLabel::I; 4];
    let mut b = bin;
    for k in (0..4).rev() {
        out[k] = TypeLabel::from_value((b % 3) as u8 + 1).expect("digit in 0..3");
        b /= 3;
    }
    out
}

/// Counts of the 81 type combinations of a block.
pub fn combo_histogram(tm: &TypeMatrix) -> [u64; 81] {
    let mut h = [0u64; 81];
    for row in tm.rows() {
        h[combo_bin(*row)] += 1;
    }
    h
}

const CACHE_MAGIC: &str = "ordpat-type-matrix";
const CACHE_VERSION: u32 = 1;

/// Writes the matrix as a text header line followed by one byte per row
/// holding its [`combo_bin`].
pub fn write_cache(tm: &TypeMatrix, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CACHE_MAGIC} v{CACHE_VERSION} rows={}", tm.len())?;
    let bytes: Vec<u8> = tm.rows().iter().map(|r| combo_bin(*r) as u8).collect();
    out.write_all(&bytes)
}

pub fn read_cache(input: impl Read) -> Result<TypeMatrix> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let expected = format!("{CACHE_MAGIC} v{CACHE_VERSION} rows={BLOCK_PERMUTATIONS}");
    if header.trim_end() != expected {
        return Err(Error::InvalidInput(format!(
            "unrecognized type matrix cache header {:?}",
            header.trim_end()
        )));
    }
    let mut bytes = Vec::with_capacity(BLOCK_PERMUTATIONS);
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != BLOCK_PERMUTATIONS || bytes.iter().any(|&b| b >= 81) {
        return Err(Error::InvalidInput("corrupt type matrix cache".into()));
    }
    Ok(TypeMatrix {
        rows: bytes.into_iter().map(|b| combo_from_bin(b as usize)).collect(),
    })
}

/// Loads the matrix from `path`, rebuilding and rewriting it if missing or stale.
pub fn cached_type_matrix(path: &Path) -> Result<TypeMatrix> {
    if let Ok(file) = fs::File::open(path) {
        if let Ok(tm) = read_cache(file) {
            return Ok(tm);
        }
    }
    let tm = build_type_matrix();
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    write_cache(&tm, &mut file)?;
    file.flush()?;
    Ok(tm)
}

/// One comparison between a published constant and the enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, expected: impl ToString, computed: impl ToString, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass,
        }
    }
}

/// Everything the `verify` command prints.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub rows: usize,
    pub covariance: CovarianceReport,
    pub vertical: Matrix3,
    pub conditional: ConditionalType3,
    pub combos: [u64; 81],
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn matrix(scale: i64, entries: [[i64; 3]; 3]) -> Matrix3 {
    entries.map(|row| row.map(|e| Rational::new(e, scale)))
}

pub fn format_matrix(m: &Matrix3) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|row| row.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[[{}]]", rows.join("], ["))
}

/// Published neighbor covariance matrix `C`.
pub fn expected_neighbor_covariance() -> Matrix3 {
    matrix(180, [[1, 0, -1], [0, 1, -1], [-1, -1, 2]])
}

/// Published `U * Cov(q)`.
pub fn expected_scaled_covariance() -> Matrix3 {
    matrix(45, [[11, -5, -6], [-5, 11, -6], [-6, -6, 12]])
}

/// Runs every oracle against the published constants.
pub fn verify(tm: &TypeMatrix) -> VerificationReport {
    let cov = asymptotic_covariance(tm);
    let vertical = vertical_neighbor_covariance(tm);
    let cond = conditional_type3(tm);
    let combos = combo_histogram(tm);
    let zero = [[Rational::from_integer(0); 3]; 3];
    let mut checks = Vec::new();

    checks.push(Check::new(
        "rows",
        BLOCK_PERMUTATIONS,
        tm.len(),
        tm.len() == BLOCK_PERMUTATIONS,
    ));
    let marginals: Vec<Rational> = (0..4)
        .flat_map(|col| {
            let n = tm.total();
            let counts = joint_counts(tm, col, col);
            (0..3).map(move |j| Rational::new(counts[j][j] as i64, n))
        })
        .collect();
    checks.push(Check::new(
        "type marginals",
        "1/3 for every type and sub-window",
        marginals.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
        marginals.iter().all(|&r| r == Rational::new(1, 3)),
    ));
    let c = expected_neighbor_covariance();
    checks.push(Check::new(
        "neighbor covariance (horizontal)",
        format_matrix(&c),
        format_matrix(&cov.neighbor),
        cov.neighbor == c,
    ));
    checks.push(Check::new(
        "neighbor covariance (vertical)",
        format_matrix(&c),
        format_matrix(&vertical),
        vertical == c,
    ));
    checks.push(Check::new(
        "diagonal neighbor covariance",
        format_matrix(&zero),
        format_matrix(&cov.diagonal),
        cov.diagonal == zero,
    ));
    let v = expected_scaled_covariance();
    checks.push(Check::new(
        "U Cov(q)",
        format_matrix(&v),
        format_matrix(&cov.scaled_cov),
        cov.scaled_cov == v,
    ));
    for (name, expected, computed) in [
        ("U Var(tau)", Rational::new(11, 45), cov.var_tau),
        ("U Var(kappa)", Rational::new(35, 45), cov.var_kappa),
        ("U Cov(tau, kappa)", Rational::new(1, 45), cov.cov_tau_kappa),
        ("corr(tau, kappa)^2", Rational::new(1, 385), cov.correlation_squared),
        ("U Cov(q3 - 1/3, q1 - q2)", Rational::from_integer(0), cov.cov_alt),
    ] {
        checks.push(Check::new(name, expected, computed, expected == computed));
    }
    for (name, expected, computed) in [
        ("P(III)", 0.333, cond.baseline),
        ("P(III | one neighbor III)", 0.367, cond.one),
        ("P(III | two neighbors III)", 0.414, cond.two),
        ("P(III | three neighbors III)", 0.575, cond.three),
    ] {
        let x = ratio_to_f64(computed);
        let rounded = (x * 1000.0).round() / 1000.0;
        checks.push(Check::new(
            name,
            format!("{expected:.3}"),
            format!("{computed} = {x:.6}"),
            (rounded - expected).abs() <= 5e-4,
        ));
    }

    let bin = |t: [u8; 4]| combo_bin(t.map(|v| TypeLabel::from_value(v).unwrap()));
    let top = bin([3, 3, 3, 3]);
    let max_other = (0..81).filter(|&b| b != top).map(|b| combos[b]).max().unwrap_or(0);
    checks.push(Check::new(
        "combination (3,3,3,3) most frequent",
        format!("> {max_other}"),
        combos[top],
        combos[top] > max_other,
    ));
    let seconds = [bin([1, 1, 1, 1]), bin([2, 2, 2, 2])];
    let rest_max = (0..81)
        .filter(|b| *b != top && !seconds.contains(b))
        .map(|b| combos[b])
        .max()
        .unwrap_or(0);
    checks.push(Check::new(
        "combinations (1,1,1,1), (2,2,2,2) next",
        format!("> {rest_max}"),
        format!("{}, {}", combos[seconds[0]], combos[seconds[1]]),
        seconds.iter().all(|&b| combos[b] > rest_max && combos[b] < combos[top]),
    ));
    let lows: Vec<usize> = one_i_three_iii_bins();
    let rest_min = (0..81).filter(|b| !lows.contains(b)).map(|b| combos[b]).min().unwrap_or(0);
    checks.push(Check::new(
        "one I + three III least frequent",
        format!("< {rest_min}"),
        lows.iter().map(|&b| combos[b].to_string()).collect::<Vec<_>>().join(", "),
        lows.iter().all(|&b| combos[b] < rest_min),
    ));

    VerificationReport {
        rows: tm.len(),
        covariance: cov,
        vertical,
        conditional: cond,
        combos,
        checks,
    }
}

/// Bins with exactly one type I and three type III windows.
pub fn one_i_three_iii_bins() -> Vec<usize> {
    (0..81)
        .filter(|&b| {
            let t = combo_from_bin(b);
            t.iter().filter(|&&x| x == TypeLabel::I).count() == 1
                && t.iter().filter(|&&x| x == TypeLabel::III).count() == 3
        })
        .collect()
}
