//! Point clouds with stable identities.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stable identifier of a data point. Identities survive reordering, so
/// rankings and schedules refer to points by id rather than by row.
pub type PointId = u64;

/// `m` points in `d` dimensions, row-aligned with their ids.
#[derive(Debug, Clone)]
pub struct FeatureSet<T> {
    points: Array2<T>,
    ids: Vec<PointId>,
    rows: HashMap<PointId, usize>,
}

impl<T: Scalar> FeatureSet<T> {
    /// Validates and wraps a feature matrix. Requires `m >= 2`, `d >= 1`,
    /// finite entries and unique ids.
    pub fn new(points: Array2<T>, ids: Vec<PointId>) -> Result<Self> {
        let (m, d) = points.dim();
        if m < 2 {
            return Err(Error::input(format!("need at least 2 points, got {m}")));
        }
        if d < 1 {
            return Err(Error::input("feature dimension must be at least 1"));
        }
        if ids.len() != m {
            return Err(Error::input(format!(
                "{} ids supplied for {m} points",
                ids.len()
            )));
        }
        if let Some(((row, col), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite feature at row {row}, column {col}"
            )));
        }
        let mut rows = HashMap::with_capacity(m);
        for (row, &id) in ids.iter().enumerate() {
            if rows.insert(id, row).is_some() {
                return Err(Error::input(format!("duplicate point id {id}")));
            }
        }
        Ok(Self { points, ids, rows })
    }

    /// Ids `0..m` in row order.
    pub fn with_sequential_ids(points: Array2<T>) -> Result<Self> {
        let ids = (0..points.nrows() as PointId).collect();
        Self::new(points, ids)
    }

    /// Builds a set from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("rows have differing lengths"));
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::input(e.to_string()))?;
        Self::with_sequential_ids(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<T> {
        &self.points
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn row(&self, row: usize) -> ArrayView1<'_, T> {
        self.points.row(row)
    }

    pub fn id(&self, row: usize) -> PointId {
        self.ids[row]
    }

    pub fn row_of(&self, id: PointId) -> Option<usize> {
        self.rows.get(&id).copied()
    }

    /// Row indices of `ids`, failing on the first unknown id.
    pub fn rows_of(&self, ids: &[PointId]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|&id| {
                self.row_of(id)
                    .ok_or_else(|| Error::input(format!("unknown point id {id}")))
            })
            .collect()
    }

    /// Copies the given rows into a dense matrix.
    pub fn gather(&self, rows: &[usize]) -> Array2<T> {
        self.points.select(Axis(0), rows)
    }

    /// Same points and ids at another precision.
    pub fn cast<U: Scalar>(&self) -> FeatureSet<U> {
        FeatureSet {
            points: self.points.mapv(|v| U::of(v.to_f64_lossless())),
            ids: self.ids.clone(),
            rows: self.rows.clone(),
        }
    }

    /// Reorders rows; `order[k]` is the source row of output row `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let points = self.gather(order);
        let ids = order.iter().map(|&r| self.ids[r]).collect();
        Self::new(points, ids)
    }
}
