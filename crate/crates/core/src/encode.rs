//! Regression targets, the sampling grid, additive noise and deterministic
//! rate coding of grid locations into spike trains.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SpikeRaster;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum TargetFunction {
    /// `x^2`
    Square,
    /// 1 for `x <= 0`, 2 for `x > 0`
    Discontinuity,
    /// `sin(k x) / k^2`
    Sine { k: f64 },
}

impl TargetFunction {
    pub const DEFAULT_SINE_K: f64 = 1.2;

    pub fn all() -> [TargetFunction; 3] {
        [
            TargetFunction::Square,
            TargetFunction::Discontinuity,
            TargetFunction::Sine {
                k: Self::DEFAULT_SINE_K,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TargetFunction::Square => "square",
            TargetFunction::Discontinuity => "discontinuity",
            TargetFunction::Sine { .. } => "sine",
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::Sine { k } if *k != Self::DEFAULT_SINE_K => write!(f, "sine:{k}"),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// `square`, `discontinuity`, `sine` or `sine:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            None => match s.as_str() {
                "square" => Ok(TargetFunction::Square),
                "discontinuity" | "disc" => Ok(TargetFunction::Discontinuity),
                "sine" | "sin" => Ok(TargetFunction::Sine {
                    k: Self::DEFAULT_SINE_K,
                }),
                other => Err(Error::InvalidParameter(format!("unknown function '{other}'"))),
            },
            Some(("sine", k)) => {
                let k: f64 = k
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad sine frequency '{k}'")))?;
                if k == 0.0 || !k.is_finite() {
                    return Err(Error::InvalidParameter("sine frequency must be non-zero".into()));
                }
                Ok(TargetFunction::Sine { k })
            }
            _ => Err(Error::InvalidParameter(format!("unknown function '{s}'"))),
        }
    }
}

pub fn evaluate_target(func: TargetFunction, x: f64) -> f64 {
    match func {
        TargetFunction::Square => x * x,
        TargetFunction::Discontinuity => {
            if x <= 0.0 {
                1.0
            } else {
                2.0
            }
        }
        TargetFunction::Sine { k } => (k * x).sin() / (k * k),
    }
}

/// Evenly spaced collocation points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_x: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n_x: 100,
            x_min: -1.0,
            x_max: 1.0,
        }
    }
}

impl Grid {
    pub fn new(n_x: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let grid = Self { n_x, x_min, x_max };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
        }
        // the discontinuity at 0 has to lie strictly inside the domain
        if !(self.x_min < 0.0 && 0.0 < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "grid domain [{}, {}] must satisfy x_min < 0 < x_max",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let span = self.x_max - self.x_min;
        let last = self.n_x - 1;
        (0..self.n_x)
            .map(|i| {
                if i == last {
                    self.x_max
                } else {
                    self.x_min + span * i as f64 / last as f64
                }
            })
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
    pub enabled: bool,
}

impl NoiseSpec {
    pub fn off() -> Self {
        Self {
            sigma: 0.1,
            seed: 0,
            enabled: false,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            sigma,
            seed,
            enabled: true,
        }
    }
}

/// `f(x_j) + eps_j`, with `eps_j ~ N(0, sigma^2)` drawn in grid order from a
/// generator seeded with `noise.seed`.
pub fn sample_targets(func: TargetFunction, grid: &Grid, noise: &NoiseSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    let exact = grid.points().into_iter().map(|x| evaluate_target(func, x));
    if !noise.enabled || noise.sigma == 0.0 {
        return Ok(exact.collect());
    }
    let normal = Normal::new(0.0, noise.sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise sigma {}: {e}", noise.sigma)))?;
    let mut rng = StdRng::seed_from_u64(noise.seed);
    Ok(exact.map(|y| y + normal.sample(&mut rng)).collect())
}

/// Deterministic rate coder.
///
/// A location maps linearly to a rate `r in [r_min, 1]`; the train carries
/// `s = round(r * n_t)` spikes placed by an integer accumulator, which spaces
/// them as evenly as the step grid allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEncoder {
    pub n_t: usize,
    pub r_min: f64,
}

impl Default for RateEncoder {
    fn default() -> Self {
        Self { n_t: 150, r_min: 0.1 }
    }
}

impl RateEncoder {
    pub fn new(n_t: usize) -> Self {
        Self { n_t, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidParameter("n_t must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.r_min) {
            return Err(Error::InvalidParameter("r_min must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn spike_count(&self, x: f64, grid: &Grid) -> Result<usize> {
        if !grid.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                min: grid.x_min,
                max: grid.x_max,
            });
        }
        let frac = (x - grid.x_min) / (grid.x_max - grid.x_min);
        let rate = self.r_min + (1.0 - self.r_min) * frac;
        // f64::round breaks ties away from zero
        Ok(((rate * self.n_t as f64).round() as usize).min(self.n_t))
    }

    pub fn encode(&self, x: f64, grid: &Grid) -> Result<Vec<bool>> {
        self.validate()?;
        let s = self.spike_count(x, grid)?;
        let n = self.n_t;
        Ok((0..n).map(|t| (t + 1) * s / n > t * s / n).collect())
    }

    pub fn encode_all(&self, grid: &Grid) -> Result<EncodedInput> {
        grid.validate()?;
        let rows = grid
            .points()
            .into_iter()
            .map(|x| self.encode(x, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(EncodedInput {
            raster: SpikeRaster::from_rows(rows)?,
            grid: *grid,
        })
    }
}

/// Spike train for `x` with the default `r_min`.
pub fn encode_spike_train(x: f64, grid: &Grid, n_t: usize) -> Result<Vec<bool>> {
    RateEncoder::new(n_t).encode(x, grid)
}

pub fn encode_all(grid: &Grid, n_t: usize) -> Result<EncodedInput> {
    RateEncoder::new(n_t).encode_all(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedInput {
    pub raster: SpikeRaster,
    pub grid: Grid,
}

impl EncodedInput {
    pub fn n_t(&self) -> usize {
        self.raster.n_t()
    }

    /// Header `n_x n_t x_min x_max`, then one line of 0/1 per point.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} {} {} {}",
            self.raster.n_x(),
            self.raster.n_t(),
            self.grid.x_min,
            self.grid.x_max
        )?;
        for row in self.raster.rows() {
            let line: String = row.iter().map(|&s| if s { '1' } else { '0' }).collect();
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::default()
    }

    #[test]
    fn target_values() {
        assert_eq!(evaluate_target(TargetFunction::Square, 0.0), 0.0);
        assert_eq!(evaluate_target(TargetFunction::Discontinuity, 0.0), 1.0);
        assert_eq!(evaluate_target(TargetFunction::Discontinuity, 1e-9), 2.0);
        let s = evaluate_target(TargetFunction::Sine { k: 1.2 }, 1.0);
        assert!((s - 1.2f64.sin() / 1.44).abs() < 1e-15);
        assert!((s - 0.647249).abs() < 1e-6);
    }

    #[test]
    fn function_parsing() {
        assert_eq!("square".parse::<TargetFunction>().unwrap(), TargetFunction::Square);
        assert_eq!(
            "sine:2".parse::<TargetFunction>().unwrap(),
            TargetFunction::Sine { k: 2.0 }
        );
        assert!("sine:0".parse::<TargetFunction>().is_err());
        assert!("cubic".parse::<TargetFunction>().is_err());
    }

    #[test]
    fn grid_points_and_validation() {
        let g = Grid::new(3, -1.0, 1.0).unwrap();
        assert_eq!(g.points(), vec![-1.0, 0.0, 1.0]);
        let pts = grid().points();
        assert_eq!(pts.len(), 100);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[99], 1.0);
        assert!(Grid::new(1, 0.0, 0.0).is_err());
        assert!(Grid::new(10, 0.0, 1.0).is_err());
        assert!(Grid::new(10, -1.0, 0.0).is_err());
    }

    #[test]
    fn noiseless_samples() {
        let g = Grid::new(3, -1.0, 1.0).unwrap();
        let y = sample_targets(TargetFunction::Square, &g, &NoiseSpec::off()).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 1.0]);
        let y0 = sample_targets(TargetFunction::Square, &g, &NoiseSpec::gaussian(0.0, 5)).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn noise_statistics() {
        let g = grid();
        let exact = sample_targets(TargetFunction::Sine { k: 1.2 }, &g, &NoiseSpec::off()).unwrap();
        let noisy = sample_targets(TargetFunction::Sine { k: 1.2 }, &g, &NoiseSpec::gaussian(0.1, 42)).unwrap();
        let eps: Vec<f64> = noisy.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let mean = eps.iter().sum::<f64>() / eps.len() as f64;
        let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (eps.len() - 1) as f64;
        assert!(mean.abs() <= 0.04, "mean {mean}");
        assert!((0.07..=0.13).contains(&var.sqrt()), "std {}", var.sqrt());

        let again = sample_targets(TargetFunction::Sine { k: 1.2 }, &g, &NoiseSpec::gaussian(0.1, 42)).unwrap();
        assert_eq!(noisy, again);
        let other = sample_targets(TargetFunction::Sine { k: 1.2 }, &g, &NoiseSpec::gaussian(0.1, 43)).unwrap();
        assert_ne!(noisy, other);
    }

    #[test]
    fn encode_edges() {
        let g = grid();
        let full = encode_spike_train(1.0, &g, 10).unwrap();
        assert_eq!(full, vec![true; 10]);

        let low = encode_spike_train(-1.0, &g, 150).unwrap();
        assert_eq!(low.iter().filter(|&&s| s).count(), 15);
        // brute force: the 15 spikes are exactly 10 steps apart
        let idx: Vec<usize> = (0..150).filter(|&t| low[t]).collect();
        let expected: Vec<usize> = (0..15).map(|k| 10 * k + 9).collect();
        assert_eq!(idx, expected);

        let mid = encode_spike_train(0.0, &g, 150).unwrap();
        assert_eq!(mid.iter().filter(|&&s| s).count(), 83);
    }

    #[test]
    fn encode_rejects_outside_domain() {
        let g = grid();
        assert!(matches!(
            encode_spike_train(1.5, &g, 150),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(encode_spike_train(-1.0000001, &g, 150).is_err());
    }

    #[test]
    fn encode_all_small_grid() {
        let g = Grid::new(2, -1.0, 1.0).unwrap();
        let enc = encode_all(&g, 10).unwrap();
        assert_eq!(enc.raster.row_count(0), 1);
        assert_eq!(enc.raster.row_count(1), 10);
        assert_eq!(enc.raster.total(), 11);
    }

    #[test]
    fn raster_text_export() {
        let g = Grid::new(2, -1.0, 1.0).unwrap();
        let enc = encode_all(&g, 10).unwrap();
        let mut buf = Vec::new();
        enc.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "2 10 -1 1\n0000000001\n1111111111\n");
    }

    #[test]
    fn default_grid_rows_monotone_and_even() {
        let enc = encode_all(&grid(), 150).unwrap();
        let counts: Vec<usize> = (0..100).map(|j| enc.raster.row_count(j)).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        assert!(counts.iter().all(|&c| (15..=150).contains(&c)));
        for row in enc.raster.rows() {
            let idx: Vec<usize> = (0..row.len()).filter(|&t| row[t]).collect();
            let gaps: Vec<usize> = idx.windows(2).map(|w| w[1] - w[0]).collect();
            if let (Some(lo), Some(hi)) = (gaps.iter().min(), gaps.iter().max()) {
                assert!(hi - lo <= 1);
            }
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn spike_count_monotone(a in -1.0f64..=1.0, b in -1.0f64..=1.0, n_t in 1usize..400) {
                let g = Grid::default();
                let enc = RateEncoder::new(n_t);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let cl = enc.encode(lo, &g).unwrap().iter().filter(|&&s| s).count();
                let ch = enc.encode(hi, &g).unwrap().iter().filter(|&&s| s).count();
                prop_assert!(cl <= ch);
                prop_assert!(cl >= (0.1 * n_t as f64).round() as usize);
                prop_assert!(ch <= n_t);
            }

            #[test]
            fn spacing_within_one_step(x in -1.0f64..=1.0, n_t in 1usize..400) {
                let train = RateEncoder::new(n_t).encode(x, &Grid::default()).unwrap();
                let idx: Vec<usize> = (0..n_t).filter(|&t| train[t]).collect();
                let gaps: Vec<usize> = idx.windows(2).map(|w| w[1] - w[0]).collect();
                if let (Some(lo), Some(hi)) = (gaps.iter().min(), gaps.iter().max()) {
                    prop_assert!(hi - lo <= 1);
                }
                prop_assert_eq!(train.clone(), RateEncoder::new(n_t).encode(x, &Grid::default()).unwrap());
            }
        }
    }
}
