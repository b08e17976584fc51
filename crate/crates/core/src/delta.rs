use std::fmt;

/// One bit per cycle: `false` selects the cycle's first maximal matching,
/// `true` the second.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DeltaVector(Vec<bool>);

impl DeltaVector {
    pub fn zeros(q: usize) -> Self {
        DeltaVector(vec![false; q])
    }

    /// Bit `j` of `mask` becomes entry `j`. Requires `q <= 64`.
    pub fn from_mask(q: usize, mask: u64) -> Self {
        assert!(q <= 64);
        DeltaVector((0..q).map(|j| mask >> j & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |m, (j, &b)| m | (b as u64) << j),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    /// 0 or 1, for indexing matching pairs.
    pub fn bit(&self, j: usize) -> usize {
        self.0[j] as usize
    }

    pub fn flip(&mut self, j: usize) {
        self.0[j] = !self.0[j];
    }

    pub fn flipped(&self, j: usize) -> Self {
        let mut d = self.clone();
        d.flip(j);
        d
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for DeltaVector {
    fn from(bits: Vec<bool>) -> Self {
        DeltaVector(bits)
    }
}

impl fmt::Display for DeltaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
