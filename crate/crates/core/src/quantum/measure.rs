use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use super::state::{StateVector, TargetBasis};
use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::format::float17;

/// Tolerance on the total probability of a distribution.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementScope {
    /// Control register alone; the target is traced out.
    ControlOnly,
    /// Every qubit in the standard basis, labels `k * n + x`.
    JointStandardBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDistribution {
    pub probabilities: Vec<f64>,
    pub labels: Vec<usize>,
}

impl MeasurementDistribution {
    pub fn new(probabilities: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if probabilities.len() != labels.len() || probabilities.is_empty() {
            return Err(Error::InvalidArgument("probabilities and labels must be nonempty and of equal length".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(MeasurementDistribution { probabilities, labels })
    }

    pub fn probability_of(&self, label: usize) -> f64 {
        self.labels.iter().position(|&l| l == label).map_or(0.0, |i| self.probabilities[i])
    }

    /// CSV with header `outcome,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        for (l, p) in self.labels.iter().zip(&self.probabilities) {
            out.push_str(&format!("{l},{}\n", float17(*p)));
        }
        out
    }
}

/// Exact outcome probabilities of `state`.
///
/// The joint scope rotates the target amplitudes into the grid basis with the
/// eigenvector matrix before squaring.
pub fn measurement_distribution(
    state: &StateVector,
    scope: MeasurementScope,
    eig: &EigenSystem,
) -> Result<MeasurementDistribution> {
    let layout = state.layout();
    let (dim, n) = (layout.control_dim(), layout.target_dim());
    let probabilities = match scope {
        MeasurementScope::ControlOnly => {
            let mut p = vec![0.0; dim];
            for s in 0..n {
                if let Some(b) = state.block(s) {
                    p.iter_mut().zip(b).for_each(|(acc, a)| *acc += a.norm_sqr());
                }
            }
            p
        }
        MeasurementScope::JointStandardBasis => {
            let standard = match state.basis() {
                TargetBasis::Standard => state.clone(),
                TargetBasis::Eigen => state.clone().into_standard_basis(eig)?,
            };
            standard.to_joint().iter().map(|a| a.norm_sqr()).collect()
        }
    };
    let labels = (0..probabilities.len()).collect();
    MeasurementDistribution::new(probabilities, labels)
}

/// `count` i.i.d. outcome labels drawn with a SplitMix64 generator seeded by
/// `seed`.
pub fn sample_outcomes(dist: &MeasurementDistribution, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let index = WeightedIndex::new(&dist.probabilities)
        .map_err(|e| Error::InvalidArgument(format!("cannot sample distribution: {e}")))?;
    let mut rng = SplitMix64::seed_from_u64(seed);
    Ok((0..count).map(|_| dist.labels[index.sample(&mut rng)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::constant_eigensystem;
    use crate::quantum::{init_state, RegisterLayout};
    use num_complex::Complex64;

    #[test]
    fn delta_and_uniform() {
        let eig = constant_eigensystem(0.0, 1).unwrap();
        let s = init_state(RegisterLayout::new(2, 1).unwrap(), &[Complex64::new(1.0, 0.0)], TargetBasis::Eigen).unwrap();
        let d = measurement_distribution(&s, MeasurementScope::ControlOnly, &eig).unwrap();
        assert_eq!(d.probabilities, vec![1.0, 0.0, 0.0, 0.0]);
        let u = measurement_distribution(&s.apply_hadamard_layer(), MeasurementScope::ControlOnly, &eig).unwrap();
        for p in u.probabilities {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn joint_scope_rotates_target() {
        let eig = constant_eigensystem(0.2, 3).unwrap();
        let s = init_state(
            RegisterLayout::new(1, 3).unwrap(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            TargetBasis::Eigen,
        )
        .unwrap();
        let d = measurement_distribution(&s, MeasurementScope::JointStandardBasis, &eig).unwrap();
        assert_eq!(d.labels.len(), 6);
        // ground eigenvector squared: (2/4) sin^2(pi x / 4)
        for x in 0..3 {
            let v = (std::f64::consts::PI * (x + 1) as f64 / 4.0).sin();
            assert!((d.probabilities[x] - 0.5 * v * v).abs() < 1e-14);
        }
        assert!(d.probabilities[3..].iter().all(|p| *p == 0.0));
    }

    #[test]
    fn sampling_is_seeded() {
        let delta = MeasurementDistribution::new(vec![0.0, 1.0, 0.0], vec![0, 1, 2]).unwrap();
        assert!(sample_outcomes(&delta, 50, 7).unwrap().iter().all(|&k| k == 1));
        let d = MeasurementDistribution::new(vec![0.2, 0.3, 0.5], vec![0, 1, 2]).unwrap();
        assert_eq!(sample_outcomes(&d, 100, 42).unwrap(), sample_outcomes(&d, 100, 42).unwrap());
        assert_ne!(sample_outcomes(&d, 100, 42).unwrap(), sample_outcomes(&d, 100, 43).unwrap());
        assert!(sample_outcomes(&d, 0, 1).is_err());
    }

    #[test]
    fn empirical_frequencies_within_three_sigma() {
        let probs = vec![0.05, 0.15, 0.3, 0.5];
        let d = MeasurementDistribution::new(probs.clone(), vec![0, 1, 2, 3]).unwrap();
        let count = 100_000;
        let samples = sample_outcomes(&d, count, 2024).unwrap();
        for (k, p) in probs.iter().enumerate() {
            let hits = samples.iter().filter(|&&s| s == k).count() as f64;
            let sigma = (count as f64 * p * (1.0 - p)).sqrt();
            assert!((hits - count as f64 * p).abs() <= 3.0 * sigma, "outcome {k}: {hits}");
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(MeasurementDistribution::new(vec![0.5, 0.4], vec![0, 1]).is_err());
        assert!(MeasurementDistribution::new(vec![1.5, -0.5], vec![0, 1]).is_err());
    }

    #[test]
    fn csv_dump() {
        let d = MeasurementDistribution::new(vec![0.25, 0.75], vec![0, 1]).unwrap();
        let csv = d.to_csv();
        assert!(csv.starts_with("outcome,probability\n0,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
