use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N_n = 2^{2^n}` for `n ≥ 1` and `N_0 = 1`, saturating at `usize::MAX`.
pub fn block_cap(n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    if n >= 6 {
        return usize::MAX;
    }
    1usize.checked_shl(1 << n).unwrap_or(usize::MAX)
}

/// Admissible partition sequence: `levels[n]` is a list of blocks of point indices.
///
/// Serializes as nested arrays `level → block → index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartitionTree {
    pub levels: Vec<Vec<Vec<usize>>>,
}

fn invalid<T>(level: usize, reason: impl Into<String>) -> Result<T> {
    Err(Error::InvalidTree { level, reason: reason.into() })
}

impl PartitionTree {
    /// The one-level tree of a singleton (or empty) set.
    pub fn trivial(points: usize) -> Self {
        Self { levels: vec![vec![(0..points).collect()]] }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Checks base, caps, partition property, refinement and singleton leaves for `points` points.
    pub fn validate(&self, points: usize) -> Result<()> {
        let Some(first) = self.levels.first() else {
            return invalid(0, "tree has no levels");
        };
        let all: Vec<usize> = (0..points).collect();
        if first.len() != 1 || {
            let mut b = first[0].clone();
            b.sort_unstable();
            b != all
        } {
            return invalid(0, "level 0 must be the single block {T}");
        }
        let mut parent = vec![0usize; points];
        for (n, level) in self.levels.iter().enumerate() {
            if level.len() > block_cap(n) {
                return invalid(n, format!("{} blocks exceed the cap {}", level.len(), block_cap(n)));
            }
            let mut owner = vec![usize::MAX; points];
            for (b, block) in level.iter().enumerate() {
                if block.is_empty() {
                    return invalid(n, "empty block");
                }
                for &i in block {
                    if i >= points {
                        return invalid(n, format!("index {i} out of range"));
                    }
                    if owner[i] != usize::MAX {
                        return invalid(n, format!("index {i} appears twice"));
                    }
                    owner[i] = b;
                }
                if n > 0 && block.iter().any(|&i| parent[i] != parent[block[0]]) {
                    return invalid(n, format!("block {b} straddles two parent blocks"));
                }
            }
            if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
                return invalid(n, format!("index {i} is missing"));
            }
            parent = owner;
        }
        let last = self.levels.len() - 1;
        if self.levels[last].iter().any(|b| b.len() > 1) {
            return invalid(last, "final level must consist of singletons");
        }
        Ok(())
    }

    /// The tree induced on `keep` (original indices), renumbered `0..keep.len()` in the given order.
    /// Empty blocks disappear, so caps, refinement and singleton leaves carry over.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut new_index = std::collections::HashMap::with_capacity(keep.len());
        for (j, &i) in keep.iter().enumerate() {
            new_index.insert(i, j);
        }
        let levels = self
            .levels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|b| b.iter().filter_map(|i| new_index.get(i).copied()).collect::<Vec<_>>())
                    .filter(|b| !b.is_empty())
                    .collect()
            })
            .collect();
        Self { levels }
    }

    /// Block index of point `t` at every level.
    pub fn chains(&self, points: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(self.levels.len()); points];
        for level in &self.levels {
            for (b, block) in level.iter().enumerate() {
                for &i in block {
                    out[i].push(b);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps() {
        assert_eq!(block_cap(0), 1);
        assert_eq!(block_cap(1), 4);
        assert_eq!(block_cap(2), 16);
        assert_eq!(block_cap(3), 256);
        assert_eq!(block_cap(4), 65536);
        assert_eq!(block_cap(5), 1 << 32);
        assert_eq!(block_cap(9), usize::MAX);
    }

    #[test]
    fn validation_names_the_level() {
        let ok = PartitionTree { levels: vec![vec![vec![0, 1, 2]], vec![vec![0, 2], vec![1]], vec![vec![0], vec![2], vec![1]]] };
        ok.validate(3).unwrap();
        let straddle = PartitionTree { levels: vec![vec![vec![0, 1, 2]], vec![vec![0], vec![1, 2]], vec![vec![0, 1], vec![2]]] };
        assert!(matches!(straddle.validate(3), Err(Error::InvalidTree { level: 2, .. })));
        let too_many = PartitionTree { levels: vec![vec![(0..5).collect()], (0..5).map(|i| vec![i]).collect()] };
        assert!(matches!(too_many.validate(5), Err(Error::InvalidTree { level: 1, .. })));
        let base = PartitionTree { levels: vec![vec![vec![0], vec![1]]] };
        assert!(matches!(base.validate(2), Err(Error::InvalidTree { level: 0, .. })));
        let leaves = PartitionTree { levels: vec![vec![vec![0, 1]]] };
        assert!(matches!(leaves.validate(2), Err(Error::InvalidTree { level: 0, .. })));
    }

    #[test]
    fn json_round_trip_is_nested_arrays() {
        let t = PartitionTree { levels: vec![vec![vec![0, 1]], vec![vec![0], vec![1]]] };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, "[[[0,1]],[[0],[1]]]");
        assert_eq!(serde_json::from_str::<PartitionTree>(&s).unwrap(), t);
    }
}
