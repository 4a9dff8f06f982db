use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest frequency set the recursions will build.
pub const FREQUENCY_SET_LIMIT: usize = 1 << 24;

/// Exponents of the final amplitudes (`m_set`) and of the outcome
/// probabilities (`l_set`) as trigonometric polynomials in `q / 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencySet {
    pub powers: Vec<u64>,
    pub m_set: Vec<i64>,
    pub l_set: Vec<i64>,
}

impl FrequencySet {
    pub fn query_count(&self) -> usize {
        self.powers.len()
    }

    /// `|L_T| == 3^T`, the largest size the recursion allows.
    pub fn is_sharp(&self) -> bool {
        u32::try_from(self.powers.len())
            .ok()
            .and_then(|t| 3usize.checked_pow(t))
            .is_some_and(|max| max == self.l_set.len())
    }

    /// The set for the first `t` powers only.
    pub fn truncated(&self, t: usize) -> Result<FrequencySet> {
        frequency_sets(&self.powers[..t.min(self.powers.len())])
    }
}

/// `M_{j+1} = M_j u (M_j + p_{j+1})` and `L_{j+1} = {l, l + p, l - p : l in L_j}`,
/// both starting from `{0}`. An empty power list gives the zero-query sets.
pub fn frequency_sets(powers: &[u64]) -> Result<FrequencySet> {
    let mut m: BTreeSet<i64> = BTreeSet::from([0]);
    let mut l: BTreeSet<i64> = BTreeSet::from([0]);
    for (j, &p) in powers.iter().enumerate() {
        let p = i64::try_from(p).map_err(|_| Error::InvalidArgument(format!("power {p} too large")))?;
        let shift = |x: i64, d: i64| {
            x.checked_add(d).ok_or_else(|| Error::InvalidArgument(format!("frequency overflow at step {}", j + 1)))
        };
        let mut next_m = m.clone();
        for &x in &m {
            next_m.insert(shift(x, p)?);
        }
        let mut next_l = l.clone();
        for &x in &l {
            next_l.insert(shift(x, p)?);
            next_l.insert(shift(x, -p)?);
        }
        if next_l.len() > FREQUENCY_SET_LIMIT {
            return Err(Error::SymbolicLimit { step: j + 1, entries: next_l.len(), limit: FREQUENCY_SET_LIMIT });
        }
        m = next_m;
        l = next_l;
    }
    Ok(FrequencySet { powers: powers.to_vec(), m_set: m.into_iter().collect(), l_set: l.into_iter().collect() })
}

/// `{m1 - m2 : m1, m2 in m_set}` by enumerating every pair.
pub fn difference_set(m_set: &[i64]) -> Vec<i64> {
    let mut out = BTreeSet::new();
    for &a in m_set {
        for &b in m_set {
            out.insert(a - b);
        }
    }
    out.into_iter().collect()
}
