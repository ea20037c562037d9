//! Exact integer linear algebra: sparse matrices, Smith normal form with transforms, and a
//! column-reduction path that only reports elementary divisors.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Column-major sparse integer matrix; each column is sorted by row with no zero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, BigInt)>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.columns[i].push((i, BigInt::one()));
        }
        m
    }

    pub fn from_dense(rows: usize, cols: usize, entries: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, row) in entries.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    m.columns[c].push((r, v.clone()));
                }
            }
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let dense: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        Self::from_dense(rows.len(), cols, &dense)
    }

    /// Builds from unsorted, possibly repeated triplets; repeated entries are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, BigInt)>) -> Self {
        let mut columns: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            columns[c].push((r, v));
        }
        for col in &mut columns {
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, BigInt)> = Vec::with_capacity(col.len());
            for (r, v) in col.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => merged.push((r, v)),
                }
            }
            merged.retain(|e| !e.1.is_zero());
            *col = merged;
        }
        Self { rows, cols, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(usize, BigInt)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        match self.columns[c].binary_search_by_key(&r, |e| e.0) {
            Ok(i) => self.columns[c][i].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        let col = &mut self.columns[c];
        match col.binary_search_by_key(&r, |e| e.0) {
            Ok(i) if v.is_zero() => {
                col.remove(i);
            }
            Ok(i) => col[i].1 = v,
            Err(_) if v.is_zero() => {}
            Err(i) => col.insert(i, (r, v)),
        }
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> + '_ {
        self.columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v.clone();
        }
        d
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v.clone())))
    }

    /// `self · other`.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc: std::collections::BTreeMap<usize, BigInt> = Default::default();
                for (k, v) in col {
                    for (r, w) in &self.columns[*k] {
                        *acc.entry(*r).or_default() += v * w;
                    }
                }
                acc.into_iter().filter(|e| !e.1.is_zero()).collect()
            })
            .collect();
        IntMatrix { rows: self.rows, cols: other.cols, columns }
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch in sum");
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()).map(|(r, c, v)| (r, c, v.clone())))
    }

    pub fn neg(&self) -> IntMatrix {
        Self::from_triplets(self.rows, self.cols, self.triplets().map(|(r, c, v)| (r, c, -v)))
    }

    /// Copy of `self` placed at `(row, col)` inside a `rows × cols` zero matrix.
    pub fn embed(&self, rows: usize, cols: usize, row: usize, col: usize) -> IntMatrix {
        Self::from_triplets(rows, cols, self.triplets().map(|(r, c, v)| (r + row, c + col, v.clone())))
    }

    /// The `nrows × ncols` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> IntMatrix {
        let columns = (col..col + ncols)
            .map(|c| {
                self.columns[c]
                    .iter()
                    .filter(|(r, _)| (row..row + nrows).contains(r))
                    .map(|(r, v)| (r - row, v.clone()))
                    .collect()
            })
            .collect();
        IntMatrix { rows: nrows, cols: ncols, columns }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![BigInt::zero(); self.rows];
        for (r, c, w) in self.triplets() {
            if !v[c].is_zero() {
                out[r] += w * &v[c];
            }
        }
        out
    }

    /// Columns `keep` in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: keep.len(), columns: keep.iter().map(|&c| self.columns[c].clone()).collect() }
    }

    pub fn negate_entry(&mut self, r: usize, c: usize) {
        let v = self.get(r, c);
        self.set(r, c, -v);
    }

    /// Sparse triplet text: a `rows cols nnz` header, then `row col value` per line.
    pub fn to_triplet_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{r} {c} {v}");
        }
        s
    }

    pub fn parse_triplet_text(text: &str) -> Option<IntMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines.next()?.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
        let [rows, cols, nnz] = header[..] else { return None };
        let mut triplets = Vec::with_capacity(nnz);
        for line in lines {
            let mut it = line.split_whitespace();
            let r = it.next()?.parse().ok()?;
            let c = it.next()?.parse().ok()?;
            let v: BigInt = it.next()?.parse().ok()?;
            if r >= rows || c >= cols {
                return None;
            }
            triplets.push((r, c, v));
        }
        (triplets.len() == nnz).then(|| IntMatrix::from_triplets(rows, cols, triplets))
    }
}

/// `S = rows·M·cols` with `S` diagonal, `d₁ | d₂ | …`, and both transforms unimodular.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    pub form: IntMatrix,
    pub rows: IntMatrix,
    pub cols: IntMatrix,
    pub rows_inv: IntMatrix,
    pub cols_inv: IntMatrix,
}

struct Dense {
    a: Vec<Vec<BigInt>>,
    p: Vec<Vec<BigInt>>,
    p_inv: Vec<Vec<BigInt>>,
    q: Vec<Vec<BigInt>>,
    q_inv: Vec<Vec<BigInt>>,
}

fn dense_identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

impl Dense {
    // row_i += k·row_j, mirrored on P and P⁻¹
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for m in [&mut self.a, &mut self.p] {
            let src = m[j].clone();
            for (x, y) in m[i].iter_mut().zip(src) {
                *x += k * y;
            }
        }
        for row in &mut self.p_inv {
            let t = k * &row[i];
            row[j] -= t;
        }
    }

    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for m in [&mut self.a, &mut self.q] {
            for row in m.iter_mut() {
                let t = k * &row[j];
                row[i] += t;
            }
        }
        let src = self.q_inv[i].clone();
        for (x, y) in self.q_inv[j].iter_mut().zip(src) {
            *x -= k * y;
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.p.swap(i, j);
            for row in &mut self.p_inv {
                row.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for row in self.a.iter_mut().chain(self.q.iter_mut()) {
                row.swap(i, j);
            }
            self.q_inv.swap(i, j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.p] {
            for x in &mut m[i] {
                *x = -&*x;
            }
        }
        for row in &mut self.p_inv {
            row[i] = -&row[i];
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (r, c) = (m.rows(), m.cols());
    let mut d = Dense { a: m.to_dense(), p: dense_identity(r), p_inv: dense_identity(r), q: dense_identity(c), q_inv: dense_identity(c) };
    let mut t = 0;
    while t < r.min(c) {
        // smallest nonzero entry of the trailing block; a unit ends the search
        let mut best: Option<(usize, usize)> = None;
        'search: for i in t..r {
            for j in t..c {
                let v = &d.a[i][j];
                if v.is_zero() {
                    continue;
                }
                if best.is_none_or(|(k, l)| v.magnitude() < d.a[k][l].magnitude()) {
                    best = Some((i, j));
                    if v.magnitude().is_one() {
                        break 'search;
                    }
                }
            }
        }
        let Some((pi, pj)) = best else {
            break;
        };
        d.swap_rows(t, pi);
        d.swap_cols(t, pj);
        loop {
            let pivot = d.a[t][t].clone();
            let mut dirty = false;
            for i in t + 1..r {
                if d.a[i][t].is_zero() {
                    continue;
                }
                let q = d.a[i][t].div_floor(&pivot);
                d.add_row(i, t, &-q);
                dirty |= !d.a[i][t].is_zero();
            }
            for j in t + 1..c {
                if d.a[t][j].is_zero() {
                    continue;
                }
                let q = d.a[t][j].div_floor(&pivot);
                d.add_col(j, t, &-q);
                dirty |= !d.a[t][j].is_zero();
            }
            if dirty {
                let (i, j) = (t..r)
                    .map(|i| (i, t))
                    .chain((t..c).map(|j| (t, j)))
                    .filter(|&(i, j)| !d.a[i][j].is_zero())
                    .min_by(|&(i, j), &(k, l)| d.a[i][j].magnitude().cmp(d.a[k][l].magnitude()))
                    .expect("pivot row or column nonzero");
                d.swap_rows(t, i);
                d.swap_cols(t, j);
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !d.a[i][j].is_multiple_of(&pivot)));
            match bad {
                Some(i) => d.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if d.a[t][t].is_negative() {
            d.negate_row(t);
        }
        t += 1;
    }
    let diagonal: Vec<BigInt> = (0..r.min(c)).map(|i| d.a[i][i].clone()).collect();
    let rank = diagonal.iter().filter(|v| !v.is_zero()).count();
    Smith {
        rank,
        form: IntMatrix::from_dense(r, c, &d.a),
        rows: IntMatrix::from_dense(r, r, &d.p),
        cols: IntMatrix::from_dense(c, c, &d.q),
        rows_inv: IntMatrix::from_dense(r, r, &d.p_inv),
        cols_inv: IntMatrix::from_dense(c, c, &d.q_inv),
        diagonal,
    }
}

/// Determinant by fraction-free elimination.
pub fn determinant(m: &IntMatrix) -> BigInt {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.to_dense();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

/// Saturated basis (as columns) of the integer kernel.
pub fn kernel(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let keep: Vec<usize> = (s.rank..m.cols()).collect();
    s.cols.select_columns(&keep)
}

/// A basis, in echelon form, of the lattice spanned by the columns. At most `rows` columns.
pub fn column_basis(m: &IntMatrix) -> IntMatrix {
    lattice_basis(
        m.rows(),
        (0..m.cols()).map(|j| {
            let mut v = vec![BigInt::zero(); m.rows()];
            for (r, x) in m.column(j) {
                v[*r] = x.clone();
            }
            v
        }),
    )
}

/// Like `column_basis`, for dense columns of length `n` produced one at a time.
pub fn lattice_basis(n: usize, columns: impl IntoIterator<Item = Vec<BigInt>>) -> IntMatrix {
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    for mut v in columns {
        while let Some(p) = v.iter().position(|x| !x.is_zero()) {
            let Some(b) = pivot_of[p] else {
                pivot_of[p] = Some(basis.len());
                basis.push(v);
                break;
            };
            let (a, c) = (basis[b][p].clone(), v[p].clone());
            if c.is_multiple_of(&a) {
                let q = &c / &a;
                for (x, y) in v.iter_mut().zip(&basis[b]) {
                    *x -= &q * y;
                }
                continue;
            }
            // unimodular 2×2 step leaving gcd(a, c) in the pivot row
            let e = a.extended_gcd(&c);
            let (ag, cg) = (&a / &e.gcd, &c / &e.gcd);
            let row = &basis[b];
            let merged: Vec<BigInt> = row.iter().zip(&v).map(|(y, x)| &e.x * y + &e.y * x).collect();
            let rest: Vec<BigInt> = row.iter().zip(&v).map(|(y, x)| &ag * x - &cg * y).collect();
            basis[b] = merged;
            v = rest;
        }
    }
    IntMatrix::from_triplets(
        n,
        basis.len(),
        basis.iter().enumerate().flat_map(|(j, c)| c.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(i, v)| (i, j, v.clone()))),
    )
}

/// An integer solution of `m·x = b`, if one exists.
pub fn solve(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    solve_with(&smith_normal_form(m), b)
}

pub fn solve_with(s: &Smith, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let pb = s.rows.apply(b);
    let mut y = vec![BigInt::zero(); s.cols.rows()];
    for (i, v) in pb.iter().enumerate() {
        if i < s.rank {
            let (q, r) = v.div_rem(&s.diagonal[i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !v.is_zero() {
            return None;
        }
    }
    Some(s.cols.apply(&y))
}

/// Rank and the elementary divisors greater than one, in divisibility order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divisors {
    pub rank: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub nontrivial: Vec<BigInt>,
}

pub(crate) fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_i64() {
            Some(i) => seq.serialize_element(&i)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn mul_sub(&self, k: &Self, w: &Self) -> Option<Self>;
    /// `(g, x, y)` with `g = x·a + y·b`, `g > 0`.
    fn ext_gcd(a: &Self, b: &Self) -> Option<(Self, Self, Self)>;
    fn div_exact(&self, d: &Self) -> Option<Self>;
    fn lin(x: &Self, a: &Self, y: &Self, b: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn neg(&self) -> Option<Self>;
}

impl Coeff for i64 {
    fn nil() -> Self {
        0
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        self.abs() == 1
    }
    fn mul_sub(&self, k: &Self, w: &Self) -> Option<Self> {
        self.checked_sub(k.checked_mul(*w)?)
    }
    fn ext_gcd(a: &Self, b: &Self) -> Option<(Self, Self, Self)> {
        let e = a.extended_gcd(b);
        Some((e.gcd, e.x, e.y))
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        (self % d == 0).then(|| self / d)
    }
    fn lin(x: &Self, a: &Self, y: &Self, b: &Self) -> Option<Self> {
        x.checked_mul(*a)?.checked_add(y.checked_mul(*b)?)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
}

impl Coeff for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn mul_sub(&self, k: &Self, w: &Self) -> Option<Self> {
        Some(self - k * w)
    }
    fn ext_gcd(a: &Self, b: &Self) -> Option<(Self, Self, Self)> {
        let e = a.extended_gcd(b);
        Some((e.gcd, e.x, e.y))
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        r.is_nil().then_some(q)
    }
    fn lin(x: &Self, a: &Self, y: &Self, b: &Self) -> Option<Self> {
        Some(x * a + y * b)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
}

type Col<T> = Vec<(usize, T)>;

fn low<T>(col: &Col<T>) -> Option<(usize, &T)> {
    col.last().map(|(r, v)| (*r, v))
}

/// `a - k·b`, merged by row.
fn axpy<T: Coeff>(a: &Col<T>, k: &T, b: &Col<T>) -> Option<Col<T>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, T::nil().mul_sub(k, &b[j].1)?));
            j += 1;
        } else {
            let v = a[i].1.mul_sub(k, &b[j].1)?;
            if !v.is_nil() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

/// `x·a + y·b`, merged by row.
fn combine<T: Coeff>(x: &T, a: &Col<T>, y: &T, b: &Col<T>) -> Option<Col<T>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let z = T::nil();
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map_or(usize::MAX, |e| e.0);
        let rb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (row, va, vb) = if ra < rb {
            i += 1;
            (ra, &a[i - 1].1, &z)
        } else if rb < ra {
            j += 1;
            (rb, &z, &b[j - 1].1)
        } else {
            i += 1;
            j += 1;
            (ra, &a[i - 1].1, &b[j - 1].1)
        };
        let v = T::lin(x, va, y, vb)?;
        if !v.is_nil() {
            out.push((row, v));
        }
    }
    Some(out)
}

/// Column echelon form by lowest-row pivots; `None` on coefficient overflow.
fn echelon<T: Coeff>(rows: usize, columns: Vec<Col<T>>) -> Option<Vec<Option<Col<T>>>> {
    let mut by_low: Vec<Option<Col<T>>> = vec![None; rows];
    for col in columns {
        let mut work = Some(col);
        while let Some(mut c) = work.take() {
            let Some((r, v)) = low(&c) else { break };
            let v = v.clone();
            let Some(pivot_col) = by_low[r].take() else {
                by_low[r] = Some(c);
                break;
            };
            let p = low(&pivot_col).expect("stored columns are nonzero").1.clone();
            if let Some(k) = v.div_exact(&p) {
                c = axpy(&c, &k, &pivot_col)?;
                by_low[r] = Some(pivot_col);
                work = Some(c);
            } else {
                // unimodular 2x2 column operation putting gcd(p, v) at the pivot
                let (g, x, y) = T::ext_gcd(&p, &v)?;
                let new_pivot = combine(&x, &pivot_col, &y, &c)?;
                let pg = p.div_exact(&g)?;
                let vg = v.div_exact(&g)?;
                let rest = combine(&vg, &pivot_col, &pg.neg()?, &c)?;
                by_low[r] = Some(new_pivot);
                work = Some(rest);
            }
        }
    }
    Some(by_low)
}

fn divisors_in<T: Coeff>(rows: usize, columns: Vec<Col<T>>) -> Option<Divisors> {
    let by_low = echelon(rows, columns)?;
    let mut unit_rows = vec![false; rows];
    let mut units: Vec<Option<&Col<T>>> = vec![None; rows];
    let mut others: Vec<Col<T>> = Vec::new();
    for (r, c) in by_low.iter().enumerate() {
        if let Some(c) = c {
            if low(c).expect("nonzero").1.is_unit() {
                unit_rows[r] = true;
                units[r] = Some(c);
            } else {
                others.push(c.clone());
            }
        }
    }
    let unit_count = unit_rows.iter().filter(|&&u| u).count();
    // clear unit-pivot rows from the remaining columns, bottom up
    let mut residual = Vec::with_capacity(others.len());
    for mut c in others {
        while let Some(&(r, ref v)) = c.iter().rev().find(|e| unit_rows[e.0]) {
            let u = units[r].expect("unit pivot");
            let k = v.div_exact(low(u).expect("nonzero").1)?;
            c = axpy(&c, &k, u)?;
        }
        residual.push(c);
    }
    let mut row_index = vec![usize::MAX; rows];
    let mut next = 0;
    for c in &residual {
        for (r, _) in c {
            if row_index[*r] == usize::MAX {
                row_index[*r] = next;
                next += 1;
            }
        }
    }
    let row_index = &row_index;
    let dense = IntMatrix::from_triplets(
        next,
        residual.len(),
        residual.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(r, v)| (row_index[*r], j, v.to_big()))),
    );
    let s = smith_normal_form(&dense);
    let nontrivial = s.diagonal.iter().filter(|d| !d.is_nil() && !d.is_one()).cloned().collect();
    Some(Divisors { rank: unit_count + s.rank, nontrivial })
}

/// Rank and nontrivial elementary divisors, without transforms.
pub fn elementary_divisors(m: &IntMatrix) -> Divisors {
    let small: Option<Vec<Col<i64>>> =
        m.columns.iter().map(|c| c.iter().map(|(r, v)| v.to_i64().map(|v| (*r, v))).collect()).collect();
    if let Some(cols) = small {
        if let Some(d) = divisors_in(m.rows(), cols) {
            return d;
        }
    }
    divisors_in(m.rows(), m.columns.clone()).expect("big integers do not overflow")
}

pub fn rank(m: &IntMatrix) -> usize {
    elementary_divisors(m).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn column_basis_spans_the_same_lattice() {
        let m = IntMatrix::from_i64(&[vec![4, 6, 2, 0], vec![0, 3, 3, 9], vec![2, 2, 0, 4]]);
        let b = column_basis(&m);
        assert!(b.cols() <= 3);
        let (sm, sb) = (smith_normal_form(&m), smith_normal_form(&b));
        for j in 0..m.cols() {
            let col: Vec<BigInt> = (0..3).map(|i| m.get(i, j)).collect();
            assert!(solve_with(&sb, &col).is_some());
        }
        for j in 0..b.cols() {
            let col: Vec<BigInt> = (0..3).map(|i| b.get(i, j)).collect();
            assert!(solve_with(&sm, &col).is_some());
        }
        assert_eq!(elementary_divisors(&m), elementary_divisors(&b));
    }

    fn check_smith(m: &IntMatrix) -> Smith {
        let s = smith_normal_form(m);
        assert_eq!(s.rows.mul(m).mul(&s.cols), s.form);
        assert_eq!(s.rows.mul(&s.rows_inv), IntMatrix::identity(m.rows()));
        assert_eq!(s.cols.mul(&s.cols_inv), IntMatrix::identity(m.cols()));
        assert!(determinant(&s.rows).abs().is_one());
        assert!(determinant(&s.cols).abs().is_one());
        for (i, d) in s.diagonal.iter().enumerate() {
            assert!(!d.is_negative());
            if let Some(next) = s.diagonal.get(i + 1) {
                assert!(d.is_zero() && next.is_zero() || (!d.is_zero() && next.is_multiple_of(d)));
            }
        }
        for (r, c, _) in s.form.triplets() {
            assert_eq!(r, c);
        }
        s
    }

    #[test]
    fn diag_two_three() {
        let s = check_smith(&IntMatrix::from_i64(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(s.diagonal, big(&[1, 6]));
    }

    #[test]
    fn zero_matrix_keeps_identity_transforms() {
        let s = check_smith(&IntMatrix::zeros(2, 3));
        assert!(s.form.is_zero());
        assert_eq!(s.rows, IntMatrix::identity(2));
        assert_eq!(s.cols, IntMatrix::identity(3));
    }

    #[test]
    fn all_ones() {
        let s = check_smith(&IntMatrix::from_i64(&[vec![1, 1], vec![1, 1]]));
        assert_eq!(s.diagonal, big(&[1, 0]));
    }

    #[test]
    fn kernel_and_solve() {
        let m = IntMatrix::from_i64(&[vec![2, 4, 6], vec![1, 2, 3]]);
        let k = kernel(&m);
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
        assert_eq!(solve(&m, &big(&[4, 2])).map(|x| m.apply(&x)), Some(big(&[4, 2])));
        assert_eq!(solve(&m, &big(&[1, 0])), None);
    }

    #[test]
    fn triplet_text_round_trip() {
        let m = IntMatrix::from_i64(&[vec![0, -3], vec![7, 0]]);
        assert_eq!(IntMatrix::parse_triplet_text(&m.to_triplet_text()), Some(m));
    }

    #[test]
    fn sparse_divisors_match_dense() {
        let m = IntMatrix::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let d = elementary_divisors(&m);
        assert_eq!(d, Divisors { rank: 3, nontrivial: big(&[2, 6, 12]) });
    }

    proptest! {
        #[test]
        fn smith_is_unimodular(entries in proptest::collection::vec(-9i64..10, 12), shape in 0usize..3) {
            let (r, c) = [(3, 4), (4, 3), (2, 6)][shape];
            let rows: Vec<Vec<i64>> = entries.chunks(c).take(r).map(<[i64]>::to_vec).collect();
            let m = IntMatrix::from_i64(&rows);
            let s = check_smith(&m);
            let d = elementary_divisors(&m);
            prop_assert_eq!(d.rank, s.rank);
            let expected: Vec<BigInt> = s.diagonal.iter().filter(|v| !v.is_zero() && !v.is_one()).cloned().collect();
            prop_assert_eq!(d.nontrivial, expected);
        }
    }
}
