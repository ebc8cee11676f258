use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary clique-by-vertex incidence matrix, stored as one sorted member list per row.
///
/// Rows may be empty (inference keeps empty cliques around); columns are the
/// vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CliqueMatrixJson", into = "CliqueMatrixJson")]
pub struct CliqueMatrix {
    vertex_count: usize,
    rows: Vec<Vec<u32>>,
    column_counts: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct CliqueMatrixJson {
    n_cliques: usize,
    vertices: usize,
    rows: Vec<Vec<u32>>,
}

impl TryFrom<CliqueMatrixJson> for CliqueMatrix {
    type Error = Error;

    fn try_from(raw: CliqueMatrixJson) -> Result<Self> {
        if raw.n_cliques != raw.rows.len() {
            return Err(Error::InvalidArgument(format!(
                "n_cliques = {} but {} rows given",
                raw.n_cliques,
                raw.rows.len()
            )));
        }
        CliqueMatrix::new(raw.vertices, raw.rows)
    }
}

impl From<CliqueMatrix> for CliqueMatrixJson {
    fn from(z: CliqueMatrix) -> Self {
        CliqueMatrixJson {
            n_cliques: z.rows.len(),
            vertices: z.vertex_count,
            rows: z.rows,
        }
    }
}

impl CliqueMatrix {
    /// Builds a matrix from member lists. Rows are sorted and deduplicated;
    /// indices must be below `vertex_count`.
    pub fn new(vertex_count: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut column_counts = vec![0u32; vertex_count];
        for (n, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &v in row.iter() {
                let slot = column_counts.get_mut(v as usize).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "row {n} references vertex {v} but only {vertex_count} vertices exist"
                    ))
                })?;
                *slot += 1;
            }
        }
        Ok(Self {
            vertex_count,
            rows,
            column_counts,
        })
    }

    /// Infers the vertex count as one past the largest index used.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let k = rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0);
        Self::new(k, rows).expect("vertex count covers every index")
    }

    pub fn empty() -> Self {
        Self {
            vertex_count: 0,
            rows: Vec::new(),
            column_counts: Vec::new(),
        }
    }

    pub fn num_cliques(&self) -> usize {
        self.rows.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[u32] {
        &self.rows[n]
    }

    pub fn column_counts(&self) -> &[u32] {
        &self.column_counts
    }

    pub fn contains(&self, n: usize, v: u32) -> bool {
        self.rows[n].binary_search(&v).is_ok()
    }

    pub fn empty_row_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_empty()).count()
    }

    /// True when every vertex belongs to at least one clique.
    pub fn has_no_empty_columns(&self) -> bool {
        self.column_counts.iter().all(|&m| m > 0)
    }

    pub fn total_entries(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Same matrix with rows reordered: row `n` of the result is row `order[n]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.rows.len() {
            return Err(Error::InvalidArgument("row permutation has wrong length".into()));
        }
        let mut seen = vec![false; order.len()];
        let mut rows = Vec::with_capacity(order.len());
        for &o in order {
            if o >= seen.len() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            rows.push(self.rows[o].clone());
        }
        Ok(Self {
            vertex_count: self.vertex_count,
            rows,
            column_counts: self.column_counts.clone(),
        })
    }

    /// Relabels vertices: vertex `v` becomes `mapping[v]`.
    pub fn relabel_columns(&self, mapping: &[u32]) -> Result<Self> {
        if mapping.len() != self.vertex_count {
            return Err(Error::InvalidArgument("column mapping has wrong length".into()));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| mapping[v as usize]).collect())
            .collect();
        Self::new(self.vertex_count, rows)
    }

    /// Drops all-zero rows.
    pub fn without_empty_rows(&self) -> Self {
        Self {
            vertex_count: self.vertex_count,
            rows: self.rows.iter().filter(|r| !r.is_empty()).cloned().collect(),
            column_counts: self.column_counts.clone(),
        }
    }

    /// Rows as a sorted list, i.e. the cover viewed as a multiset of cliques.
    pub fn canonical_rows(&self) -> Vec<Vec<u32>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_rows() {
        let z = CliqueMatrix::new(4, vec![vec![2, 0, 1], vec![2, 3], vec![]]).unwrap();
        assert_eq!(z.column_counts(), &[1, 1, 2, 1]);
        assert_eq!(z.row(0), &[0, 1, 2]);
        assert_eq!(z.empty_row_count(), 1);
        assert!(z.has_no_empty_columns());
        assert!(CliqueMatrix::new(2, vec![vec![2]]).is_err());
    }

    #[test]
    fn json_layout() {
        let z = CliqueMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"n_cliques":2,"vertices":3,"rows":[[0,1],[1,2]]}"#);
        let back: CliqueMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        assert!(
            serde_json::from_str::<CliqueMatrix>(r#"{"n_cliques":3,"vertices":3,"rows":[[0]]}"#).is_err()
        );
    }

    #[test]
    fn permutation_checks() {
        let z = CliqueMatrix::from_rows(vec![vec![0], vec![1]]);
        assert!(z.permute_rows(&[0, 0]).is_err());
        assert_eq!(z.permute_rows(&[1, 0]).unwrap().row(0), &[1]);
    }
}
