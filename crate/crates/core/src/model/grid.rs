//! Dense containers used by the instance and plan documents.
//!
//! All of them serialize as nested JSON arrays in row-major order. Binary
//! containers serialize their cells as `0`/`1` integers and reject anything
//! else on the way in.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Square `n x n` matrix indexed by node position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.n + j] = value;
    }

    /// Writes `value` at `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, value: T) {
        self.set(i, j, value);
        self.set(j, i, value);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }
}

impl<T: Serialize + Copy + Default> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[T]> = self.rows().collect();
        rows.serialize(serializer)
    }
}

impl<'de, T: Deserialize<'de> + Copy + Default> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<T>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(D::Error::custom(format!(
                "matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

/// Rectangular 0/1 grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[bool] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).iter().filter(|&&b| b).count()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Column of the single set cell in row `r`, if exactly one is set.
    pub fn single_in_row(&self, r: usize) -> Option<usize> {
        let mut found = None;
        for (c, &b) in self.row(r).iter().enumerate() {
            if b {
                if found.is_some() {
                    return None;
                }
                found = Some(c);
            }
        }
        found
    }

    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols.max(1);
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(idx, _)| (idx / cols, idx % cols))
    }
}

impl Serialize for BinaryGrid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|&b| u8::from(b)).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinaryGrid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<u8>> = Vec::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, Vec::len);
        let mut grid = BinaryGrid::new(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(D::Error::custom(format!("ragged binary grid at row {r}")));
            }
            for (c, &v) in row.iter().enumerate() {
                grid.set(r, c, bit::<D::Error>(v)?);
            }
        }
        Ok(grid)
    }
}

fn bit<E: serde::de::Error>(v: u8) -> Result<bool, E> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(E::custom(format!(
            "binary entry must be 0 or 1, got {other}"
        ))),
    }
}

/// Symmetric 0/1 link matrix over nodes. `(i, j)` and `(j, i)` share a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RouteMatrix {
    n: usize,
    // upper triangle including the diagonal, row-major
    cells: Vec<bool>,
}

impl RouteMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * (n + 1) / 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let slot = self.slot(i, j);
        self.cells[slot] = value;
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    /// Set links as `(i, j)` with `i <= j`, in row-major order.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
    }
}

impl Serialize for RouteMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| u8::from(self.get(i, j))).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RouteMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<u8>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        let mut m = RouteMatrix::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(D::Error::custom(format!(
                    "route matrix is not square at row {i}"
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                let b = bit::<D::Error>(v)?;
                if j >= i {
                    m.set(i, j, b);
                } else if m.get(i, j) != b {
                    return Err(D::Error::custom(format!(
                        "route matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }
}

/// Serde adapter for `Vec<bool>` written as a list of 0/1 integers.
pub mod bits {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], serializer: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&b| u8::from(b))
            .collect::<Vec<u8>>()
            .serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<bool>, D::Error> {
        Vec::<u8>::deserialize(deserializer)?
            .into_iter()
            .map(super::bit::<D::Error>)
            .collect()
    }
}
