//! Seeded synthetic images.
//!
//! Random draws come from `ChaCha8Rng` seeded with `seed_from_u64`, which is
//! stable across platforms. Gaussian draws use `rand_distr::StandardNormal`
//! (ziggurat method).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid;

fn check_size(rows: usize, cols: usize) -> Result<()> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidInput(format!(
            "generated grids need at least 2x2 cells, got {rows}x{cols}"
        )));
    }
    Ok(())
}

/// I.i.d. standard uniform values.
pub fn white_noise(rows: usize, cols: usize, seed: u64) -> Result<Grid> {
    check_size(rows, cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    Grid::new(rows, cols, values)
}

/// `low` where `row + col` is even, `high` elsewhere.
pub fn checkerboard(rows: usize, cols: usize, low: f64, high: f64) -> Result<Grid> {
    check_size(rows, cols)?;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    if !(low < high) {
        return Err(Error::InvalidInput(format!(
            "checkerboard needs low < high, got {low} and {high}"
        )));
    }
    Grid::from_fn(rows, cols, |r, c| if (r + c) % 2 == 0 { low } else { high })
}

/// The plane `x[m][n] = a m + b n + c`; both slopes must be nonzero.
pub fn ramp(rows: usize, cols: usize, a: f64, b: f64, c: f64) -> Result<Grid> {
    check_size(rows, cols)?;
    if a == 0.0 || b == 0.0 {
        return Err(Error::InvalidInput(format!(
            "ramp slopes must be nonzero, got a = {a}, b = {b}"
        )));
    }
    Grid::from_fn(rows, cols, |m, n| a * m as f64 + b * n as f64 + c)
}

/// Parameters of a midpoint-displacement surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalSpec {
    /// The surface has `2^level + 1` cells per side.
    pub level: u32,
    pub hurst: f64,
    pub seed: u64,
    pub sigma0: f64,
}

impl FractalSpec {
    pub const MAX_LEVEL: u32 = 14;

    pub fn new(level: u32, hurst: f64, seed: u64) -> Self {
        Self {
            level,
            hurst,
            seed,
            sigma0: 1.0,
        }
    }

    pub fn side(&self) -> usize {
        (1usize << self.level) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.level == 0 || self.level > Self::MAX_LEVEL {
            return Err(Error::InvalidInput(format!(
                "fractal level must lie in 1..={}, got {}",
                Self::MAX_LEVEL,
                self.level
            )));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::InvalidInput(format!(
                "Hurst exponent must lie strictly inside (0, 1), got {}",
                self.hurst
            )));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma0 must be positive, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }
}

/// Diamond-square midpoint displacement.
///
/// Corners start as `sigma0 * N(0, 1)`. At depth `l = 1..=level` the diamond
/// step sets each square center to the mean of its four corners, and the
/// square step sets each edge midpoint to the mean of its (three or four)
/// axis neighbors; both add `sigma0 * 2^(-l H) * N(0, 1)`. Cells are visited
/// row-major within each step, so a seed fixes the surface bit for bit.
pub fn fractal_surface(spec: &FractalSpec) -> Result<Grid> {
    spec.validate()?;
    let side = spec.side();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = move || -> f64 { rng.sample(StandardNormal) };
    let mut z = vec![0.0f64; side * side];
    let at = |r: usize, c: usize| r * side + c;

    let last = side - 1;
    for (r, c) in [(0, 0), (0, last), (last, 0), (last, last)] {
        z[at(r, c)] = spec.sigma0 * gauss();
    }

    let mut step = last;
    for depth in 1..=spec.level {
        let half = step / 2;
        let sd = spec.sigma0 * 2f64.powf(-(depth as f64) * spec.hurst);

        for r in (half..side).step_by(step) {
            for c in (half..side).step_by(step) {
                let mean = 0.25
                    * (z[at(r - half, c - half)]
                        + z[at(r - half, c + half)]
                        + z[at(r + half, c - half)]
                        + z[at(r + half, c + half)]);
                z[at(r, c)] = mean + sd * gauss();
            }
        }

        for r in (0..side).step_by(half) {
            let start = if (r / half).is_multiple_of(2) { half } else { 0 };
            for c in (start..side).step_by(step) {
                let mut sum = 0.0;
                let mut n = 0.0;
                if r >= half {
                    sum += z[at(r - half, c)];
                    n += 1.0;
                }
                if r + half < side {
                    sum += z[at(r + half, c)];
                    n += 1.0;
                }
                if c >= half {
                    sum += z[at(r, c - half)];
                    n += 1.0;
                }
                if c + half < side {
                    sum += z[at(r, c + half)];
                    n += 1.0;
                }
                z[at(r, c)] = sum / n + sd * gauss();
            }
        }
        step = half;
    }
    Grid::new(side, side, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_is_seeded() {
        let a = white_noise(8, 9, 1).unwrap();
        assert_eq!(a, white_noise(8, 9, 1).unwrap());
        assert_ne!(a, white_noise(8, 9, 2).unwrap());
        assert!(a.values().iter().all(|v| (0.0..1.0).contains(v)));
        assert!(white_noise(1, 9, 1).is_err());
    }

    #[test]
    fn checkerboard_layout() {
        let g = checkerboard(3, 3, 0.0, 1.0).unwrap();
        assert_eq!(g.values(), &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert!(checkerboard(3, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn ramp_requires_both_slopes() {
        assert!(ramp(3, 3, 0.0, 1.0, 0.0).is_err());
        assert!(ramp(3, 3, 1.0, 0.0, 0.0).is_err());
        let g = ramp(2, 3, 2.0, -1.0, 5.0).unwrap();
        assert_eq!(g.values(), &[5., 4., 3., 7., 6., 5.]);
    }

    #[test]
    fn fractal_fills_every_cell_once() {
        // a cell the recursion never writes stays exactly 0
        for level in 1..=6 {
            let spec = FractalSpec::new(level, 0.5, 11);
            let g = fractal_surface(&spec).unwrap();
            assert_eq!((g.rows(), g.cols()), (spec.side(), spec.side()));
            assert!(g.values().iter().all(|&v| v != 0.0));
        }
    }

    #[test]
    fn fractal_is_reproducible() {
        let spec = FractalSpec::new(5, 0.3, 77);
        assert_eq!(fractal_surface(&spec).unwrap(), fractal_surface(&spec).unwrap());
        let other = FractalSpec { seed: 78, ..spec };
        assert_ne!(fractal_surface(&spec).unwrap(), fractal_surface(&other).unwrap());
    }

    #[test]
    fn fractal_spec_validation() {
        assert!(FractalSpec::new(0, 0.5, 0).validate().is_err());
        assert!(FractalSpec::new(3, 0.0, 0).validate().is_err());
        assert!(FractalSpec::new(3, 1.0, 0).validate().is_err());
        let bad = FractalSpec {
            sigma0: 0.0,
            ..FractalSpec::new(3, 0.5, 0)
        };
        assert!(bad.validate().is_err());
    }
}
