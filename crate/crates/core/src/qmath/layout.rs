use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered local dimensions of a composite system.
///
/// Composite basis indices are mixed-radix with factor 0 as the most
/// significant digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::LayoutMismatch("layout has no factors".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::LayoutMismatch(format!(
                "local dimension {d} is below 2"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::LayoutMismatch("total dimension overflows".into()))?;
        Ok(Self { dims })
    }

    /// `n` factors of local dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(2, n)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, factor: usize) -> usize {
        self.dims[factor]
    }

    /// Product of all local dimensions.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Place value of each factor's digit in a composite index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Concatenation `self ⊗ other`.
    pub fn join(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SubsystemLayout { dims }
    }

    /// Layout of the listed factors, in the listed order.
    pub fn select(&self, factors: &[usize]) -> Result<SubsystemLayout> {
        self.check_selection(factors, false)?;
        Ok(SubsystemLayout {
            dims: factors.iter().map(|&k| self.dims[k]).collect(),
        })
    }

    /// Factor indices not present in `factors`, ascending.
    pub fn complement(&self, factors: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|k| !factors.contains(k)).collect()
    }

    /// Validates that `factors` are in range and pairwise distinct.
    pub(crate) fn check_selection(&self, factors: &[usize], allow_empty: bool) -> Result<()> {
        if factors.is_empty() && !allow_empty {
            return Err(Error::InvalidSelection("empty factor set".into()));
        }
        let mut seen = vec![false; self.len()];
        for &k in factors {
            if k >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    factors: self.len(),
                });
            }
            if seen[k] {
                return Err(Error::InvalidSelection(format!("factor {k} repeated")));
            }
            seen[k] = true;
        }
        Ok(())
    }

    /// Composite-index offsets of every joint basis state of `factors`,
    /// enumerated with the first listed factor most significant.
    pub(crate) fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &k in factors {
            let d = self.dims[k];
            let mut next = Vec::with_capacity(out.len() * d);
            for &base in &out {
                for digit in 0..d {
                    next.push(base + digit * strides[k]);
                }
            }
            out = next;
        }
        out
    }
}

impl TryFrom<Vec<usize>> for SubsystemLayout {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<SubsystemLayout> for Vec<usize> {
    fn from(layout: SubsystemLayout) -> Self {
        layout.dims
    }
}
