//! Measurement noise: additive Gaussian scaled by the data mean, and
//! salt-and-pepper detector failures.
//!
//! Streams come from ChaCha20 seeded with a 64-bit value and are consumed in
//! flat sinogram order (angle-major, then `t`), so results are identical
//! across platforms and thread counts.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::grid::Sinogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    Gaussian,
    SaltPepper,
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseModel::Gaussian),
            "salt_pepper" => Ok(NoiseModel::SaltPepper),
            _ => Err(Error::Validation(format!("unknown noise model '{s}'"))),
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::Gaussian => "gaussian",
            NoiseModel::SaltPepper => "salt_pepper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Gaussian: fraction of the data mean. Salt-and-pepper: corrupted fraction.
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(level: f64, seed: u64) -> Self {
        NoiseSpec {
            model: NoiseModel::Gaussian,
            level,
            seed,
        }
    }

    pub fn salt_pepper(level: f64, seed: u64) -> Self {
        NoiseSpec {
            model: NoiseModel::SaltPepper,
            level,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.level >= 0.0 && self.level.is_finite(),
            Validation,
            "noise level must be non-negative, got {}",
            self.level
        );
        if self.model == NoiseModel::SaltPepper {
            ensure!(
                self.level <= 1.0,
                Validation,
                "salt-and-pepper level must not exceed 1, got {}",
                self.level
            );
        }
        Ok(())
    }
}

/// `g + eps * mean(g) * level`, `eps ~ N(0, 1)` per entry.
pub fn add_gaussian(sino: &Sinogram, spec: &NoiseSpec) -> Result<Sinogram> {
    ensure!(
        spec.model == NoiseModel::Gaussian,
        Validation,
        "expected a gaussian noise spec"
    );
    spec.validate()?;
    if spec.level == 0.0 {
        return Ok(sino.clone());
    }
    let delta = sino.mean() * spec.level;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let values = sino
        .values
        .iter()
        .map(|v| {
            let eps: f64 = rng.sample(StandardNormal);
            v + eps * delta
        })
        .collect();
    sino.with_values(values)
}

/// Replace `round(level * N)` distinct entries by the minimum or maximum
/// of the exact data, each with probability one half.
pub fn add_salt_pepper(sino: &Sinogram, spec: &NoiseSpec) -> Result<Sinogram> {
    ensure!(
        spec.model == NoiseModel::SaltPepper,
        Validation,
        "expected a salt_pepper noise spec"
    );
    spec.validate()?;
    let n = sino.values.len();
    let count = (spec.level * n as f64).round() as usize;
    if count == 0 {
        return Ok(sino.clone());
    }
    let lo = sino.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sino.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut values = sino.values.clone();
    for (i, high) in corrupted_entries(n, count, spec.seed) {
        values[i] = if high { hi } else { lo };
    }
    sino.with_values(values)
}

/// Sorted distinct positions and their min/max choice (`true` for max).
fn corrupted_entries(n: usize, count: usize, seed: u64) -> Vec<(usize, bool)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, n, count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| (i, rng.random_bool(0.5))).collect()
}

/// Dispatch on the model.
pub fn add_noise(sino: &Sinogram, spec: &NoiseSpec) -> Result<Sinogram> {
    match spec.model {
        NoiseModel::Gaussian => add_gaussian(sino, spec),
        NoiseModel::SaltPepper => add_salt_pepper(sino, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AngleSet, TAxis};

    fn ramp(n_angles: usize, nt: usize) -> Sinogram {
        let angles = AngleSet::uniform_2d(n_angles).unwrap();
        let axis = TAxis::new(-1.0, 2.0 / (nt - 1) as f64, nt).unwrap();
        let values = (0..n_angles * nt).map(|i| 1.0 + (i % 17) as f64).collect();
        Sinogram::new(angles, axis, values).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let s = ramp(4, 11);
        assert_eq!(add_gaussian(&s, &NoiseSpec::gaussian(0.0, 1)).unwrap(), s);
        assert_eq!(add_salt_pepper(&s, &NoiseSpec::salt_pepper(0.0, 1)).unwrap(), s);
    }

    #[test]
    fn same_seed_same_output() {
        let s = ramp(5, 31);
        let a = add_gaussian(&s, &NoiseSpec::gaussian(0.2, 42)).unwrap();
        let b = add_gaussian(&s, &NoiseSpec::gaussian(0.2, 42)).unwrap();
        let c = add_gaussian(&s, &NoiseSpec::gaussian(0.2, 43)).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn gaussian_spread_and_mean() {
        let s = ramp(1000, 1000);
        let spec = NoiseSpec::gaussian(0.1, 7);
        let noisy = add_gaussian(&s, &spec).unwrap();
        let delta = s.mean() * 0.1;
        let n = s.values.len() as f64;
        let diffs: Vec<f64> = noisy.values.iter().zip(&s.values).map(|(a, b)| a - b).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd / delta - 1.0).abs() < 0.01, "{sd} vs {delta}");
        assert!(mean.abs() < 3.0 * delta / n.sqrt());
    }

    #[test]
    fn salt_pepper_counts_and_values() {
        let s = ramp(40, 101);
        let noisy = add_salt_pepper(&s, &NoiseSpec::salt_pepper(0.08, 3)).unwrap();
        let n = s.values.len();
        let want = (0.08 * n as f64).round() as usize;
        let picked = corrupted_entries(n, want, 3);
        assert_eq!(picked.len(), want);
        assert!(picked.windows(2).all(|w| w[0].0 < w[1].0));
        for (i, high) in &picked {
            assert_eq!(noisy.values[*i], if *high { 17.0 } else { 1.0 });
        }
        let untouched = (0..n).filter(|i| picked.binary_search_by_key(i, |p| p.0).is_err());
        assert!(untouched.into_iter().all(|i| noisy.values[i] == s.values[i]));
        let lo = 1.0;
        let hi = 17.0;
        for (a, b) in noisy.values.iter().zip(&s.values) {
            if a != b {
                assert!(*a == lo || *a == hi);
            }
        }
    }

    #[test]
    fn salt_pepper_level_above_one_is_rejected() {
        let s = ramp(2, 5);
        assert!(add_salt_pepper(&s, &NoiseSpec::salt_pepper(1.5, 0)).is_err());
    }
}
