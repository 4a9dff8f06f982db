//! Potentials `q: [0, 1] -> [0, 1]` for the operator `-u'' + q u`.
//!
//! Three representations are supported. Constants and polynomials can be
//! evaluated anywhere; sampled potentials carry one value per interior grid
//! point `j / (n + 1)`, `j = 1..=n`, which is all the finite-difference matrix
//! ever consumes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equispaced points used to check polynomial class bounds.
pub const BOUND_CHECK_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    Constant { value: f64 },
    /// Values at `j / (n + 1)` for `j = 1..=n`.
    Sampled { samples: Vec<f64> },
    /// Coefficients in increasing degree: `c0 + c1 x + c2 x^2 + ...`.
    Polynomial { coeffs: Vec<f64> },
}

impl PotentialSpec {
    pub fn constant(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidPotential {
                index: 0,
                x: f64::NAN,
                reason: format!("constant value {value} outside [0, 1]"),
            });
        }
        Ok(PotentialSpec::Constant { value })
    }

    pub fn sampled(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("sampled potential needs at least one value".into()));
        }
        let n = samples.len();
        for (i, &v) in samples.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidPotential {
                    index: i + 1,
                    x: (i + 1) as f64 / (n + 1) as f64,
                    reason: format!("sample {v} outside [0, 1]"),
                });
            }
        }
        Ok(PotentialSpec::Sampled { samples })
    }

    /// Builds a polynomial potential, checking `max |q^(i)| <= 1` for
    /// `i = 0, 1, 2` and `q >= 0` on a dense grid.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one coefficient".into()));
        }
        let d1 = derivative(&coeffs);
        let d2 = derivative(&d1);
        for i in 0..BOUND_CHECK_POINTS {
            let x = i as f64 / (BOUND_CHECK_POINTS - 1) as f64;
            let v = horner(&coeffs, x);
            let checks = [
                (v, (0.0..=1.0).contains(&v), "q"),
                (horner(&d1, x), horner(&d1, x).abs() <= 1.0, "q'"),
                (horner(&d2, x), horner(&d2, x).abs() <= 1.0, "q''"),
            ];
            for (value, ok, name) in checks {
                if !ok {
                    return Err(Error::InvalidPotential {
                        index: i,
                        x,
                        reason: format!("{name}(x) = {value} violates the class bound"),
                    });
                }
            }
        }
        Ok(PotentialSpec::Polynomial { coeffs })
    }

    /// Value at the interior grid point `j / (n + 1)`, `1 <= j <= n`.
    pub fn grid_value(&self, j: usize, n: usize) -> Result<f64> {
        let x = j as f64 / (n + 1) as f64;
        match self {
            PotentialSpec::Constant { value } => Ok(*value),
            PotentialSpec::Polynomial { coeffs } => Ok(horner(coeffs, x)),
            PotentialSpec::Sampled { samples } => {
                if samples.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "sampled potential has {} values but the grid has n = {n}",
                        samples.len()
                    )));
                }
                Ok(samples[j - 1])
            }
        }
    }

    /// The constant value, if this is a constant potential.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            PotentialSpec::Constant { value } => Some(*value),
            _ => None,
        }
    }

    /// Whether the `C^2` class bounds were verified for this representation.
    ///
    /// Sampled potentials cannot be checked for derivative bounds, so they
    /// are accepted with this flag cleared.
    pub fn derivative_bounds_checked(&self) -> bool {
        !matches!(self, PotentialSpec::Sampled { .. })
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.derivative_bounds_checked() {
            Vec::new()
        } else {
            vec!["sampled potential: derivative bounds of the class are not verified".to_string()]
        }
    }

    /// Reads a CSV file holding one sample per record (first column), with an
    /// optional non-numeric header line.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => samples.push(v),
                Err(_) if line_no == 0 => continue,
                Err(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "line {}: cannot parse sample {field:?}",
                        line_no + 1
                    )))
                }
            }
        }
        PotentialSpec::sampled(samples)
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        match self {
            PotentialSpec::Constant { value } => write!(f, "const:{value}"),
            PotentialSpec::Sampled { samples } => write!(f, "samples:{}", join(samples)),
            PotentialSpec::Polynomial { coeffs } => write!(f, "poly:{}", join(coeffs)),
        }
    }
}

/// Parses the inline forms `const:V`, `poly:C0,C1,...` and `samples:V1,V2,...`.
impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("potential {s:?}: expected KIND:VALUES")))?;
        let numbers = || -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("potential {s:?}: bad number {t:?}")))
                })
                .collect()
        };
        match kind {
            "const" => {
                let v = numbers()?;
                if v.len() != 1 {
                    return Err(Error::InvalidArgument(format!("potential {s:?}: const takes one value")));
                }
                PotentialSpec::constant(v[0])
            }
            "poly" => PotentialSpec::polynomial(numbers()?),
            "samples" => PotentialSpec::sampled(numbers()?),
            other => Err(Error::InvalidArgument(format!("unknown potential kind {other:?}"))),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inline_forms() {
        assert_eq!("const:0.5".parse::<PotentialSpec>().unwrap(), PotentialSpec::Constant { value: 0.5 });
        let p: PotentialSpec = "poly:0.1,0.2,0.05".parse().unwrap();
        assert_eq!(p, PotentialSpec::Polynomial { coeffs: vec![0.1, 0.2, 0.05] });
        assert!("const:1.5".parse::<PotentialSpec>().is_err());
        assert!("wave:1".parse::<PotentialSpec>().is_err());
        assert!("const".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn polynomial_derivative_bounds() {
        // q = x^2 / 2: q'' = 1, q' <= 1, q in [0, 0.5]
        assert!(PotentialSpec::polynomial(vec![0.0, 0.0, 0.5]).is_ok());
        // q'' = 1.2 breaks the class
        let err = PotentialSpec::polynomial(vec![0.0, 0.0, 0.6]).unwrap_err();
        assert!(matches!(err, Error::InvalidPotential { .. }));
        // negative values
        assert!(PotentialSpec::polynomial(vec![-0.1]).is_err());
    }

    #[test]
    fn sampled_reports_offending_point() {
        let err = PotentialSpec::sampled(vec![0.2, 1.3, 0.1]).unwrap_err();
        match err {
            Error::InvalidPotential { index, x, .. } => {
                assert_eq!(index, 2);
                assert!((x - 0.5).abs() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn sampled_carries_warning() {
        let p = PotentialSpec::sampled(vec![0.1, 0.2]).unwrap();
        assert!(!p.derivative_bounds_checked());
        assert_eq!(p.warnings().len(), 1);
        assert!(PotentialSpec::constant(0.3).unwrap().warnings().is_empty());
    }

    #[test]
    fn csv_samples() {
        let p = PotentialSpec::from_csv_str("q\n0.1\n0.2\n\n0.3\n").unwrap();
        assert_eq!(p, PotentialSpec::Sampled { samples: vec![0.1, 0.2, 0.3] });
        assert!(PotentialSpec::from_csv_str("0.1\nabc\n").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["const:0.25", "poly:0.1,0.2,0.05", "samples:0.5,0.75"] {
            let p: PotentialSpec = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<PotentialSpec>().unwrap(), p);
        }
    }
}
