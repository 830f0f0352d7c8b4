use serde::{Deserialize, Serialize};

use super::GraphError;

/// Sorted set of vertices of a graph with `host_n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSet {
    members: Vec<usize>,
    host_n: usize,
}

impl VertexSet {
    /// Sorts and deduplicates `members`; fails on an index `>= host_n`.
    pub fn new<I>(host_n: usize, members: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&v) = members.last() {
            if v >= host_n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: host_n });
            }
        }
        Ok(VertexSet { members, host_n })
    }

    pub(crate) fn from_sorted_unchecked(host_n: usize, members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.last().is_none_or(|&v| v < host_n));
        VertexSet { members, host_n }
    }

    pub fn empty(host_n: usize) -> Self {
        VertexSet { members: Vec::new(), host_n }
    }

    pub fn full(host_n: usize) -> Self {
        VertexSet { members: (0..host_n).collect(), host_n }
    }

    pub fn range(host_n: usize, range: std::ops::Range<usize>) -> Self {
        assert!(range.end <= host_n);
        VertexSet { members: range.collect(), host_n }
    }

    pub fn singleton(host_n: usize, v: usize) -> Result<Self, GraphError> {
        Self::new(host_n, [v])
    }

    /// Builds the set of `i` with `mask[i]` true.
    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet {
            members: mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect(),
            host_n: mask.len(),
        }
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.host_n];
        for &v in &self.members {
            mask[v] = true;
        }
        mask
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| !other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut members = self.members.clone();
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        members.dedup();
        VertexSet { members, host_n: self.host_n.max(other.host_n) }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            members: self.members.iter().copied().filter(|&v| !other.contains(v)).collect(),
            host_n: self.host_n,
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            members: self.members.iter().copied().filter(|&v| other.contains(v)).collect(),
            host_n: self.host_n,
        }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter().copied()
    }
}
