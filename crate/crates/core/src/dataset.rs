//! Point sets, explicit distance matrices and group assignments.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative tolerance used when checking a distance matrix for symmetry
/// and a zero diagonal.
pub const MATRIX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    /// Row-major `n × dim` coordinates, Euclidean distance.
    Points { dim: usize, coords: Vec<f64> },
    /// Row-major `n × n` symmetric matrix with a zero diagonal.
    Matrix { values: Vec<f64> },
}

/// A finite metric instance: `n ≥ 2` points and a distance between every pair.
///
/// Immutable after construction, so it can be shared freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceModel {
    n: usize,
    source: Source,
}

impl DistanceModel {
    /// Builds a Euclidean model from point coordinates.
    pub fn from_points(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::invalid("points need at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(n * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    row: r,
                    col: row.len().min(dim),
                    msg: format!("expected {dim} columns, found {}", row.len()),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse { row: r, col: c, msg: "non-finite coordinate".into() });
            }
            coords.extend(row);
        }
        Ok(DistanceModel { n, source: Source::Points { dim, coords } })
    }

    /// Builds a model from an explicit square distance matrix.
    ///
    /// Entries must be finite and non-negative. Asymmetry beyond
    /// [`MATRIX_TOLERANCE`] (relative) is rejected; within tolerance the upper
    /// triangle wins. Diagonal entries within tolerance are forced to zero.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        let mut scale = 0.0f64;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("non-finite entry at ({i}, {j})")));
                }
                if v < 0.0 {
                    return Err(Error::InvalidMatrix(format!("negative entry at ({i}, {j})")));
                }
                if i != j {
                    scale = scale.max(v);
                }
            }
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let d = rows[i][i];
            if d > MATRIX_TOLERANCE * scale.max(1.0) {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal entry {d} at ({i}, {i})")));
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > MATRIX_TOLERANCE * a.max(b) {
                    return Err(Error::InvalidMatrix(format!("asymmetric entries at ({i}, {j}): {a} vs {b}")));
                }
                values[i * n + j] = a;
                values[j * n + i] = a;
            }
        }
        Ok(DistanceModel { n, source: Source::Matrix { values } })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: a model holds at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn has_coordinates(&self) -> bool {
        matches!(self.source, Source::Points { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.source {
            Source::Points { dim, .. } => Some(*dim),
            Source::Matrix { .. } => None,
        }
    }

    /// Coordinates of point `i`, in points mode.
    pub fn point(&self, i: usize) -> Option<&[f64]> {
        match &self.source {
            Source::Points { dim, coords } => Some(&coords[i * dim..(i + 1) * dim]),
            Source::Matrix { .. } => None,
        }
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.source {
            Source::Points { dim, coords } => {
                let a = &coords[i * dim..(i + 1) * dim];
                let b = &coords[j * dim..(j + 1) * dim];
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            Source::Matrix { values } => values[i * self.n + j],
        }
    }
}

/// How a point CSV is laid out.
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Drop the last column (a class label, for instance).
    pub label_col: bool,
}

fn read_rows<R: Read>(reader: R, has_header: bool, drop_last: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(has_header).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { row: r, col: 0, msg: e.to_string() })?;
        let cells = record.len() - usize::from(drop_last && !record.is_empty());
        let mut row = Vec::with_capacity(cells);
        for (c, cell) in record.iter().take(cells).enumerate() {
            let v: f64 =
                cell.parse().map_err(|_| Error::Parse { row: r, col: c, msg: format!("not a number: {cell:?}") })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads a point set (one point per row) from CSV text.
pub fn read_points<R: Read>(reader: R, opts: CsvOptions) -> Result<DistanceModel> {
    DistanceModel::from_points(read_rows(reader, opts.has_header, opts.label_col)?)
}

/// Reads a square distance matrix from CSV text.
pub fn read_matrix<R: Read>(reader: R, has_header: bool) -> Result<DistanceModel> {
    DistanceModel::from_matrix(read_rows(reader, has_header, false)?)
}

pub fn load_csv(path: impl AsRef<Path>, opts: CsvOptions) -> Result<DistanceModel> {
    read_points(open(path.as_ref())?, opts)
}

pub fn load_matrix(path: impl AsRef<Path>, has_header: bool) -> Result<DistanceModel> {
    read_matrix(open(path.as_ref())?, has_header)
}

/// Assignment of `n` points to `k` nonempty groups with ids in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labels {
    assign: Vec<usize>,
    k: usize,
}

impl Labels {
    /// Validates that ids form the contiguous range `0..k` with no empty group.
    pub fn new(assign: Vec<usize>) -> Result<Self> {
        let k = match assign.iter().max() {
            Some(&m) => m + 1,
            None => return Err(Error::InvalidLabels("no points".into())),
        };
        let mut seen = vec![false; k];
        for &g in &assign {
            seen[g] = true;
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLabels(format!("group {g} is empty")));
        }
        Ok(Labels { assign, k })
    }

    /// Builds labels from explicit groups; group `g` gets id `g`.
    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut assign = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidLabels(format!("group {g} is empty")));
            }
            for &p in members {
                if p >= n {
                    return Err(Error::InvalidLabels(format!("point {p} out of range")));
                }
                if assign[p] != usize::MAX {
                    return Err(Error::InvalidLabels(format!("point {p} assigned twice")));
                }
                assign[p] = g;
            }
        }
        if let Some(p) = assign.iter().position(|&g| g == usize::MAX) {
            return Err(Error::InvalidLabels(format!("point {p} unassigned")));
        }
        Ok(Labels { assign, k: groups.len() })
    }

    /// Renumbers groups in order of their smallest member.
    pub fn canonical(&self) -> Labels {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let assign = self
            .assign
            .iter()
            .map(|&g| {
                if map[g] == usize::MAX {
                    map[g] = next;
                    next += 1;
                }
                map[g]
            })
            .collect();
        Labels { assign, k: self.k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assign
    }

    pub fn group_of(&self, point: usize) -> usize {
        self.assign[point]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.assign {
            sizes[g] += 1;
        }
        sizes
    }

    /// Members of each group, each list in ascending point order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (p, &g) in self.assign.iter().enumerate() {
            groups[g].push(p);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(text: &str) -> Result<DistanceModel> {
        read_points(text.as_bytes(), CsvOptions::default())
    }

    #[test]
    fn pythagorean_distances() {
        let m = points("0,0\n3,4\n0,1\n").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.dim(), Some(2));
        assert_eq!(m.dist(0, 1), 5.0);
        assert_eq!(m.dist(0, 2), 1.0);
        assert_eq!(m.dist(1, 0), 5.0);
    }

    #[test]
    fn single_row_is_rejected() {
        let err = points("1,2\n").unwrap_err();
        assert!(err.to_string().contains("need at least 2 points"), "{err}");
    }

    #[test]
    fn chaining_example_points() {
        let m = points("100,1\n100,2\n200,1\n200,2\n100,3\n").unwrap();
        assert_eq!(m.dist(0, 2), 100.0);
    }

    #[test]
    fn header_and_label_column() {
        let m = read_points("x,y,class\n0,0,a\n3,4,b\n".as_bytes(), CsvOptions { has_header: true, label_col: true })
            .unwrap();
        assert_eq!(m.dim(), Some(2));
        assert_eq!(m.dist(0, 1), 5.0);
    }

    #[test]
    fn parse_error_names_cell() {
        match points("0,0\n1,zz\n").unwrap_err() {
            Error::Parse { row, col, .. } => assert_eq!((row, col), (1, 1)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(points("0,0\n1\n").is_err());
    }

    #[test]
    fn matrix_two_by_two() {
        let m = read_matrix("0,7\n7,0\n".as_bytes(), false).unwrap();
        assert_eq!(m.dist(0, 1), 7.0);
        assert!(!m.has_coordinates());
    }

    #[test]
    fn matrix_asymmetric() {
        let err = read_matrix("0,7\n6,0\n".as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("asymmetric"), "{err}");
    }

    #[test]
    fn matrix_all_ties_is_valid() {
        let m = read_matrix("0,0,0\n0,0,0\n0,0,0\n".as_bytes(), false).unwrap();
        assert_eq!(m.dist(1, 2), 0.0);
    }

    #[test]
    fn matrix_shape_and_sign_errors() {
        assert!(read_matrix("0,1,2\n1,0,3\n".as_bytes(), false).is_err());
        assert!(read_matrix("0,-1\n-1,0\n".as_bytes(), false).is_err());
        assert!(read_matrix("1,2\n2,0\n".as_bytes(), false).is_err());
    }

    #[test]
    fn matrix_diagonal_within_tolerance_forced_to_zero() {
        let m = read_matrix("1e-12,5\n5,0\n".as_bytes(), false).unwrap();
        assert_eq!(m.dist(0, 0), 0.0);
    }

    #[test]
    fn all_pairs_queried_once() {
        let m = points("0,0\n1,0\n0,1\n5,5\n2,3\n").unwrap();
        let n = m.len();
        let pairs: std::collections::BTreeSet<(usize, usize)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        assert_eq!(pairs.len(), n * (n - 1) / 2);
        for &(i, j) in &pairs {
            assert_eq!(m.dist(i, j), m.dist(j, i));
        }
    }

    #[test]
    fn labels_validation() {
        assert!(Labels::new(vec![0, 2, 2]).is_err());
        let l = Labels::new(vec![1, 0, 1]).unwrap();
        assert_eq!(l.k(), 2);
        assert_eq!(l.canonical().as_slice(), &[0, 1, 0]);
        assert_eq!(l.groups(), vec![vec![1], vec![0, 2]]);
        assert!(Labels::from_groups(3, &[vec![0], vec![1]]).is_err());
        assert!(Labels::from_groups(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn euclidean_is_a_metric(
            pts in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 3), 3..8),
        ) {
            let m = DistanceModel::from_points(pts).unwrap();
            let n = m.len();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m.dist(i, j), m.dist(j, i));
                    for l in 0..n {
                        prop_assert!(m.dist(i, l) <= m.dist(i, j) + m.dist(j, l) + 1e-9);
                    }
                }
            }
        }
    }
}
