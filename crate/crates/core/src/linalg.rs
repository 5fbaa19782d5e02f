//! Exact linear algebra over the rationals.
//!
//! Every cohomology group and every spectral-sequence cell in this crate is a
//! subquotient of a finite-dimensional rational vector space. Vectors are sparse
//! (`BTreeMap<index, Rational>`), subspaces are kept in reduced row echelon form so
//! two subspaces are equal exactly when their bases are equal.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Sparse vector: index to nonzero coefficient.
pub type SparseVec = BTreeMap<usize, Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("subspace B is not contained in Z")]
    NotContained,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `a += c * b`, dropping entries that cancel.
pub fn axpy(a: &mut SparseVec, c: &Rational, b: &SparseVec) {
    if c.is_zero() {
        return;
    }
    for (&i, x) in b {
        let prod = c * x;
        match a.get_mut(&i) {
            Some(y) => {
                *y += prod;
                if y.is_zero() {
                    a.remove(&i);
                }
            }
            None => {
                a.insert(i, prod);
            }
        }
    }
}

pub fn scale(v: &SparseVec, c: &Rational) -> SparseVec {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(&i, x)| (i, x * c)).collect()
}

pub fn unit(i: usize) -> SparseVec {
    let mut v = SparseVec::new();
    v.insert(i, Rational::one());
    v
}

/// Sparse matrix keyed by `(row, col)`. Stored entries are always nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "from_i64: wrong data length");
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rat(data[r * cols + c]));
            }
        }
        m
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "from_dense: ragged rows");
            for (c, x) in row.iter().enumerate() {
                m.set(r, c, x.clone());
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[SparseVec]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (&r, x) in col {
                m.set(r, c, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn set(&mut self, r: usize, c: usize, x: Rational) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        if x.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), x);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, x: &Rational) {
        let cur = self.get(r, c);
        self.set(r, c, cur + x);
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.entries.iter().map(|(&(r, c), x)| (r, c, x))
    }

    pub fn row_vectors(&self) -> Vec<SparseVec> {
        let mut out = vec![SparseVec::new(); self.rows];
        for (&(r, c), x) in &self.entries {
            out[r].insert(c, x.clone());
        }
        out
    }

    pub fn column_vectors(&self) -> Vec<SparseVec> {
        let mut out = vec![SparseVec::new(); self.cols];
        for (&(r, c), x) in &self.entries {
            out[c].insert(r, x.clone());
        }
        out
    }

    pub fn column(&self, c: usize) -> SparseVec {
        self.entries
            .iter()
            .filter(|((_, cc), _)| *cc == c)
            .map(|(&(r, _), x)| (r, x.clone()))
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|(&(r, c), x)| ((c, r), x.clone())).collect(),
        }
    }

    pub fn mul_vec(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&(r, c), x) in &self.entries {
            if let Some(y) = v.get(&c) {
                let e = out.entry(r).or_insert_with(Rational::zero);
                *e += x * y;
            }
        }
        out.retain(|_, x| !x.is_zero());
        out
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols = other.column_vectors();
        let mut out = Matrix::zeros(self.rows, other.cols);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in self.mul_vec(col) {
                out.set(r, c, x);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::Dimension("sub: shape mismatch".into()));
        }
        let mut out = self.clone();
        for (&(r, c), x) in &other.entries {
            out.add_to(r, c, &-x);
        }
        Ok(out)
    }

    /// Submatrix on the given row and column index lists (in that order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let row_pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let col_pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (&(r, c), x) in &self.entries {
            if let (Some(&i), Some(&j)) = (row_pos.get(&r), col_pos.get(&c)) {
                out.set(i, j, x.clone());
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.cols);
        for row in self.row_vectors() {
            e.insert(row);
        }
        e.len()
    }
}

/// Incrementally maintained reduced row echelon basis.
///
/// Every stored row has leading entry 1 at its pivot and is zero at every other
/// row's pivot.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ambient: usize,
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new(ambient: usize) -> Self {
        Echelon { ambient, rows: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Remainder of `v` after clearing every pivot position.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        for (p, row) in &self.rows {
            if let Some(c) = v.get(p).cloned() {
                axpy(&mut v, &-c, row);
            }
        }
        v
    }

    /// Inserts `v`; returns true if it enlarged the span.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        debug_assert!(v.keys().all(|&i| i < self.ambient));
        let mut r = self.reduce(v);
        let Some((&pivot, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.recip();
        r = scale(&r, &inv);
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(&pivot).cloned() {
                axpy(row, &-c, &r);
            }
        }
        self.rows.insert(pivot, r);
        true
    }

    pub fn into_subspace(self) -> Subspace {
        Subspace { ambient_dim: self.ambient, basis: self.rows.into_values().collect() }
    }
}

/// A linear subspace of `Q^ambient_dim` with canonical (reduced echelon) basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: (0..ambient_dim).map(unit).collect() }
    }

    pub fn span<I: IntoIterator<Item = SparseVec>>(ambient_dim: usize, vectors: I) -> Self {
        let mut e = Echelon::new(ambient_dim);
        for v in vectors {
            e.insert(v);
        }
        e.into_subspace()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|v| *v.keys().next().expect("nonzero basis vector")).collect()
    }

    fn echelon(&self) -> Echelon {
        Echelon {
            ambient: self.ambient_dim,
            rows: self.basis.iter().map(|v| (*v.keys().next().unwrap(), v.clone())).collect(),
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.echelon().reduce(v.clone()).is_empty()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        let e = other.echelon();
        self.basis.iter().all(|v| e.reduce(v.clone()).is_empty())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut e = self.echelon();
        for v in &other.basis {
            e.insert(v.clone());
        }
        e.into_subspace()
    }

    /// Image of this subspace under `m` (which must have `cols == ambient_dim`).
    pub fn map(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient_dim, "map: dimension mismatch");
        Subspace::span(m.rows(), self.basis.iter().map(|v| m.mul_vec(v)))
    }

    /// Coordinates of `v` (assumed to lie in the subspace) in the echelon basis.
    pub fn coordinates(&self, v: &SparseVec) -> Vec<Rational> {
        self.basis
            .iter()
            .map(|b| v.get(b.keys().next().unwrap()).cloned().unwrap_or_else(Rational::zero))
            .collect()
    }
}

/// `{v : M v = 0}` with a canonical basis.
pub fn kernel(m: &Matrix) -> Subspace {
    let mut e = Echelon::new(m.cols());
    for row in m.row_vectors() {
        e.insert(row);
    }
    let pivots: Vec<usize> = e.pivots().collect();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut vectors = Vec::new();
    for free in (0..m.cols()).filter(|c| !pivot_set.contains(c)) {
        let mut v = unit(free);
        for (p, row) in &e.rows {
            if let Some(x) = row.get(&free) {
                v.insert(*p, -x);
            }
        }
        vectors.push(v);
    }
    Subspace::span(m.cols(), vectors)
}

/// Column space of `m`.
pub fn image(m: &Matrix) -> Subspace {
    Subspace::span(m.rows(), m.column_vectors())
}

/// The quotient `Z / B` together with explicit coordinate maps.
///
/// `projector` is `dim x ambient` and is only meaningful on vectors of `Z`;
/// `section` is `ambient x dim` and picks representatives in `Z`.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub dim: usize,
    pub projector: Matrix,
    pub section: Matrix,
    /// Representatives of the quotient basis (columns of `section`).
    pub representatives: Vec<SparseVec>,
}

impl Subquotient {
    pub fn project(&self, v: &SparseVec) -> SparseVec {
        self.projector.mul_vec(v)
    }
}

pub fn subquotient(z: &Subspace, b: &Subspace) -> Result<Subquotient, LinalgError> {
    if z.ambient_dim != b.ambient_dim {
        return Err(LinalgError::Dimension("subquotient: ambient mismatch".into()));
    }
    if !b.is_subspace_of(z) {
        return Err(LinalgError::NotContained);
    }
    let z_pivots = z.pivots();
    // B written in Z's echelon coordinates.
    let mut eb = Echelon::new(z.dim());
    for v in &b.basis {
        let coords: SparseVec = z
            .coordinates(v)
            .into_iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .collect();
        eb.insert(coords);
    }
    let b_pivots: std::collections::BTreeSet<usize> = eb.pivots().collect();
    let free: Vec<usize> = (0..z.dim()).filter(|i| !b_pivots.contains(i)).collect();
    let free_pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(k, &i)| (i, k)).collect();

    let dim = free.len();
    let mut projector = Matrix::zeros(dim, z.ambient_dim);
    for (&i, &k) in &free_pos {
        projector.set(k, z_pivots[i], Rational::one());
    }
    for (q, row) in &eb.rows {
        for (f, x) in row {
            if let Some(&k) = free_pos.get(f) {
                projector.set(k, z_pivots[*q], -x);
            }
        }
    }
    let representatives: Vec<SparseVec> = free.iter().map(|&i| z.basis[i].clone()).collect();
    let section = Matrix::from_columns(z.ambient_dim, &representatives);
    Ok(Subquotient { dim, projector, section, representatives })
}

/// Inverse of a square matrix, if it is invertible.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    if m.rows() != m.cols() {
        return None;
    }
    let n = m.rows();
    // Row-reduce [M | I].
    let mut e = Echelon::new(2 * n);
    for (r, mut row) in m.row_vectors().into_iter().enumerate() {
        row.insert(n + r, Rational::one());
        e.insert(row);
    }
    if e.len() != n || e.pivots().take(n).collect::<Vec<_>>() != (0..n).collect::<Vec<_>>() {
        return None;
    }
    let mut out = Matrix::zeros(n, n);
    for (p, row) in &e.rows {
        for (&c, x) in row.range(n..) {
            out.set(*p, c - n, x.clone());
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen_bool(density) {
                    m.set(r, c, ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3)));
                }
            }
        }
        m
    }

    /// Plain dense Gaussian elimination, kept independent of `Echelon`.
    fn oracle_rank(m: &Matrix) -> usize {
        let mut a: Vec<Vec<Rational>> =
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect()).collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
            a.swap(rank, p);
            for r in 0..a.len() {
                if r != rank && !a[r][c].is_zero() {
                    let f = &a[r][c] / &a[rank][c];
                    let pivot_row = a[rank].clone();
                    for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                        *x -= &f * y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        assert_eq!(kernel(&Matrix::identity(3)).dim(), 0);
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let k = kernel(&Matrix::zeros(2, 3));
        assert_eq!(k.dim(), 3);
        assert_eq!(k, Subspace::full(3));
    }

    #[test]
    fn image_extremes() {
        assert_eq!(image(&Matrix::identity(4)), Subspace::full(4));
        assert_eq!(image(&Matrix::zeros(3, 5)).dim(), 0);
    }

    #[test]
    fn random_kernel_and_image_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let m = random_matrix(&mut rng, 5, 7, 0.5);
            let r = oracle_rank(&m);
            let k = kernel(&m);
            assert_eq!(k.dim(), 7 - r);
            assert_eq!(image(&m).dim(), r);
            for v in k.basis() {
                assert!(m.mul_vec(v).is_empty());
            }
        }
    }

    #[test]
    fn subquotient_trivial_cases() {
        let z = Subspace::full(3);
        let sq = subquotient(&z, &Subspace::zero(3)).unwrap();
        assert_eq!(sq.dim, 3);
        assert_eq!(sq.projector, Matrix::identity(3));
        assert_eq!(subquotient(&z, &z).unwrap().dim, 0);
    }

    #[test]
    fn subquotient_rejects_non_nested() {
        let z = Subspace::span(3, [unit(0)]);
        let b = Subspace::span(3, [unit(1)]);
        assert_eq!(subquotient(&z, &b).unwrap_err(), LinalgError::NotContained);
    }

    #[test]
    fn random_nested_subquotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let gens = random_matrix(&mut rng, 8, 5, 0.6).column_vectors();
            let z = Subspace::span(8, gens.iter().cloned());
            let k = rng.gen_range(0..=gens.len());
            let b_gens: Vec<SparseVec> = (0..k)
                .map(|_| {
                    let mut v = SparseVec::new();
                    for g in &gens {
                        axpy(&mut v, &rat(rng.gen_range(-2..=2)), g);
                    }
                    v
                })
                .collect();
            let b = Subspace::span(8, b_gens.iter().cloned());
            let sq = subquotient(&z, &b).unwrap();
            // Oracle: rank of stacked generators.
            let stacked = Matrix::from_columns(8, &b_gens);
            assert_eq!(b.dim(), oracle_rank(&stacked));
            assert_eq!(sq.dim, z.dim() - b.dim());
            let ps = sq.projector.mul(&sq.section).unwrap();
            assert_eq!(ps, Matrix::identity(sq.dim));
            for v in b.basis() {
                assert!(sq.project(v).is_empty());
            }
        }
    }

    #[test]
    fn subquotient_dim_invariant_under_automorphism_fixing_b() {
        // Z = Q^3, B = span(e0); shear e2 -> e2 + e1 fixes B.
        let z = Subspace::full(3);
        let b = Subspace::span(3, [unit(0)]);
        let shear = Matrix::from_i64(3, 3, &[1, 0, 0, 0, 1, 1, 0, 0, 1]);
        let z2 = z.map(&shear);
        let b2 = b.map(&shear);
        assert_eq!(subquotient(&z, &b).unwrap().dim, subquotient(&z2, &b2).unwrap().dim);
    }

    #[test]
    fn basis_is_independent_of_insertion_order() {
        let vs = vec![
            SparseVec::from([(0, rat(1)), (2, rat(3))]),
            SparseVec::from([(1, rat(2)), (2, rat(-1))]),
            SparseVec::from([(0, rat(2)), (1, rat(2)), (2, rat(5))]),
        ];
        let a = Subspace::span(3, vs.clone());
        let b = Subspace::span(3, vs.into_iter().rev());
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_i64(3, 3, &[2, 1, 0, 0, 1, 4, 1, 0, 1]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(3));
        assert!(inverse(&Matrix::from_i64(2, 2, &[1, 2, 2, 4])).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix() -> impl Strategy<Value = Matrix> {
            (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-3i64..=3, r * c)
                    .prop_map(move |data| Matrix::from_i64(r, c, &data))
            })
        }

        proptest! {
            #[test]
            fn rank_nullity(m in arb_matrix()) {
                prop_assert_eq!(kernel(&m).dim() + image(&m).dim(), m.cols());
            }
        }
    }
}
