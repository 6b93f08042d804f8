use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

use super::SymmetricMatrix;

/// A proper, strictly increasing set of 0-based indices into a parent of
/// dimension `parent_dim`. Selects the columns of a nested model or the
/// rows/columns of a principal submatrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnSubset {
    indices: Vec<usize>,
    parent_dim: usize,
}

impl ColumnSubset {
    pub fn new(indices: Vec<usize>, parent_dim: usize) -> Result<Self> {
        if parent_dim == 0 {
            return Err(Error::input("parent dimension must be positive"));
        }
        if indices.is_empty() {
            return Err(Error::input("subset must not be empty"));
        }
        for pair in indices.windows(2) {
            if pair[1] == pair[0] {
                return Err(Error::input(format!("index {} listed twice", pair[0])));
            }
            if pair[1] < pair[0] {
                return Err(Error::input(format!(
                    "indices must be strictly increasing ({} follows {})",
                    pair[1], pair[0]
                )));
            }
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= parent_dim) {
            return Err(Error::input(format!(
                "index {bad} out of range for dimension {parent_dim}"
            )));
        }
        if indices.len() >= parent_dim {
            return Err(Error::input(format!(
                "subset keeps all {parent_dim} indices; a nested model must drop at least one"
            )));
        }
        Ok(Self {
            indices,
            parent_dim,
        })
    }

    /// `{0, 1, …, len−1}`.
    pub fn leading(len: usize, parent_dim: usize) -> Result<Self> {
        Self::new((0..len).collect(), parent_dim)
    }

    /// Parses a comma-separated index list such as `"0,2"`.
    pub fn parse(text: &str, parent_dim: usize) -> Result<Self> {
        let indices = text
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<usize>()
                    .map_err(|_| Error::input(format!("subset entry {tok:?} is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices, parent_dim)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn parent_dim(&self) -> usize {
        self.parent_dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of indices removed from the parent.
    pub fn removed(&self) -> usize {
        self.parent_dim - self.indices.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

impl fmt::Display for ColumnSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for ColumnSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices.serialize(serializer)
    }
}

/// The matrix obtained from `a` by keeping rows and columns `keep`.
pub fn principal_submatrix(a: &SymmetricMatrix, keep: &ColumnSubset) -> Result<SymmetricMatrix> {
    if keep.parent_dim() != a.dim() {
        return Err(Error::input(format!(
            "subset is defined for dimension {} but the matrix has dimension {}",
            keep.parent_dim(),
            a.dim()
        )));
    }
    let idx = keep.indices();
    Ok(SymmetricMatrix::from_upper(idx.len(), |r, s| {
        a.get(idx[r], idx[s])
    }))
}
