//! Exact arithmetic and dense linear algebra over prime fields GF(p).
//!
//! Elements are stored as reduced `u64` residues. Matrices keep their field
//! order alongside a row-major residue buffer, so every entry is guaranteed to
//! live in the same field.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("field order mismatch: GF({left}) vs GF({right})")]
    OrderMismatch { left: u64, right: u64 },
}

/// Witnesses that make Miller-Rabin deterministic for every 64-bit input
/// (valid up to 3.3 * 10^24).
const MR_WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &w in &MR_WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Order of a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FieldOrder(u64);

impl<'de> Deserialize<'de> for FieldOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        FieldOrder::new(p).map_err(serde::de::Error::custom)
    }
}

impl FieldOrder {
    pub fn new(p: u64) -> Result<Self, GfError> {
        if is_prime(p) {
            Ok(Self(p))
        } else {
            Err(GfError::NotPrime(p))
        }
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    /// Number of field elements as a `usize`.
    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Canonical residue of an arbitrary signed integer.
    pub fn reduce(self, v: i128) -> u64 {
        v.rem_euclid(self.0 as i128) as u64
    }

    pub fn element(self, v: i128) -> FieldElement {
        FieldElement { value: self.reduce(v), order: self }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.0)
    }

    pub fn pow(self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.0)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.0) {
            None
        } else {
            Some(pow_mod(a, self.0 - 2, self.0))
        }
    }

    /// Signed representative in `(-p/2, p/2]`, handy for display.
    pub fn signed(self, a: u64) -> i128 {
        if a > self.0 / 2 {
            a as i128 - self.0 as i128
        } else {
            a as i128
        }
    }
}

impl fmt::Display for FieldOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0)
    }
}

/// A single element of GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    order: FieldOrder,
}

impl FieldElement {
    pub fn new(value: u64, order: FieldOrder) -> Self {
        Self { value: value % order.get(), order }
    }

    pub fn zero(order: FieldOrder) -> Self {
        Self { value: 0, order }
    }

    pub fn one(order: FieldOrder) -> Self {
        Self { value: 1 % order.get(), order }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn order(self) -> FieldOrder {
        self.order
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        self.order.inv(self.value).map(|value| Self { value, order: self.order })
    }

    pub fn pow(self, e: u64) -> Self {
        Self { value: self.order.pow(self.value, e), order: self.order }
    }

    fn check(self, other: Self) {
        assert_eq!(self.order, other.order, "mixed field orders in arithmetic");
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(rhs);
        Self { value: self.order.add(self.value, rhs.value), order: self.order }
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.check(rhs);
        Self { value: self.order.sub(self.value, rhs.value), order: self.order }
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check(rhs);
        Self { value: self.order.mul(self.value, rhs.value), order: self.order }
    }
}

impl Div for FieldElement {
    type Output = Self;
    /// Panics on division by zero.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.inv().expect("division by zero in prime field")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: self.order.neg(self.value), order: self.order }
    }
}

/// Dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    order: FieldOrder,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// Result of row reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    /// Reduced row echelon form: pivots are 1 and their columns are otherwise zero.
    pub matrix: FieldMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

impl FieldMatrix {
    pub fn zeros(order: FieldOrder, rows: usize, cols: usize) -> Self {
        Self { order, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(order: FieldOrder, n: usize) -> Self {
        let mut m = Self::zeros(order, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[i64]>>(order: FieldOrder, rows: &[R]) -> Result<Self, GfError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(GfError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r.iter().map(|&v| order.reduce(v as i128)));
        }
        Ok(Self { order, rows: rows.len(), cols, data })
    }

    /// Builds a matrix from already-reduced residues.
    pub fn from_residues(order: FieldOrder, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self, GfError> {
        if data.len() != rows * cols {
            return Err(GfError::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        let p = order.get();
        Ok(Self { order, rows, cols, data: data.into_iter().map(|v| v % p).collect() })
    }

    pub fn order(&self) -> FieldOrder {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.order.get();
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.order, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Sub-matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.order, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    /// Sub-matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self { order: self.order, rows: rows.len(), cols: self.cols, data }
    }

    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, GfError> {
        if v.len() != self.cols {
            return Err(GfError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let p = self.order;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(&a, &b)| a != 0 && b != 0)
                    .fold(0, |acc, (&a, &b)| p.add(acc, p.mul(a, b)))
            })
            .collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GfError> {
        if self.order != other.order {
            return Err(GfError::OrderMismatch { left: self.order.get(), right: other.order.get() });
        }
        if self.cols != other.rows {
            return Err(GfError::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let p = self.order;
        let mut out = Self::zeros(p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = p.add(out.data[idx], p.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn reduce_row_echelon(&self) -> Echelon {
        let p = self.order;
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = p.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j);
                m.data[r * m.cols + j] = p.mul(v, inv);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let sub = p.mul(factor, m.get(r, j));
                    let idx = i * m.cols + j;
                    m.data[idx] = p.sub(m.data[idx], sub);
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        Echelon { matrix: m, rank: r, pivot_cols }
    }

    pub fn rank(&self) -> usize {
        self.reduce_row_echelon().rank
    }

    /// Finds some `x` with `self * x = rhs`. Free variables are set to zero.
    /// Returns `Ok(None)` when the system is inconsistent.
    pub fn solve(&self, rhs: &[u64]) -> Result<Option<Vec<u64>>, GfError> {
        if rhs.len() != self.rows {
            return Err(GfError::DimensionMismatch { expected: self.rows, found: rhs.len() });
        }
        let p = self.order;
        let mut aug = Self::zeros(p, self.rows, self.cols + 1);
        for (r, &b) in rhs.iter().enumerate() {
            aug.data[r * (self.cols + 1)..r * (self.cols + 1) + self.cols].copy_from_slice(self.row(r));
            aug.data[r * (self.cols + 1) + self.cols] = b % p.get();
        }
        let ech = aug.reduce_row_echelon();
        if ech.pivot_cols.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (i, &c) in ech.pivot_cols.iter().enumerate() {
            x[c] = ech.matrix.get(i, self.cols);
        }
        Ok(Some(x))
    }

    /// Basis of the right null space, one basis vector per column of the result
    /// (`cols x (cols - rank)`).
    pub fn kernel_basis(&self) -> Self {
        let p = self.order;
        let ech = self.reduce_row_echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivot_cols.contains(c)).collect();
        let mut basis = Self::zeros(p, self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            basis.set(f, j, 1);
            for (i, &pc) in ech.pivot_cols.iter().enumerate() {
                basis.set(pc, j, p.neg(ech.matrix.get(i, f)));
            }
        }
        basis
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u64::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldOrder {
        FieldOrder::new(p).unwrap()
    }

    #[test]
    fn primality_small_and_large() {
        let primes: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(FieldOrder::new(1).is_err());
        assert!(FieldOrder::new(9).is_err());
        assert_eq!(next_prime_above(10), 11);
        assert_eq!(next_prime_above(6), 7);
        assert_eq!(next_prime_above(1), 2);
    }

    #[test]
    fn element_arithmetic() {
        let p = gf(7);
        let a = p.element(3);
        let b = p.element(-2);
        assert_eq!(b.value(), 5);
        assert_eq!((a + b).value(), 1);
        assert_eq!((a - b).value(), 5);
        assert_eq!((a * b).value(), 1);
        assert_eq!((a / b * b), a);
        assert_eq!((-a).value(), 4);
        assert!(p.element(0).inv().is_none());
        for v in 1..7 {
            assert_eq!(p.mul(v, p.inv(v).unwrap()), 1);
        }
    }

    #[test]
    fn rref_identity_and_zero() {
        let id = FieldMatrix::identity(gf(2), 3);
        let e = id.reduce_row_echelon();
        assert_eq!(e.rank, 3);
        assert_eq!(e.pivot_cols, vec![0, 1, 2]);
        let z = FieldMatrix::zeros(gf(5), 2, 4);
        assert_eq!(z.reduce_row_echelon().rank, 0);
    }

    #[test]
    fn rref_dependent_triple_gf3() {
        let m = FieldMatrix::from_rows(gf(3), &[[1, 2, 0], [0, 2, 1], [2, 0, 1]]).unwrap();
        let e = m.reduce_row_echelon();
        assert_eq!(e.rank, 2);
        assert!(e.pivot_cols.windows(2).all(|w| w[0] < w[1]));
        // b1 + 2 b2 + b3 = 0 (mod 3)
        let k = m.transpose().kernel_basis();
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        let scale = gf(3).inv(v[0]).unwrap();
        let v: Vec<u64> = v.iter().map(|&x| gf(3).mul(x, scale)).collect();
        assert_eq!(v, vec![1, 2, 1]);
    }

    #[test]
    fn solve_examples() {
        let id = FieldMatrix::identity(gf(2), 2);
        assert_eq!(id.solve(&[1, 0]).unwrap(), Some(vec![1, 0]));

        let m = FieldMatrix::from_rows(gf(3), &[[1, 2], [2, 1]]).unwrap();
        let x = m.solve(&[2, 1]).unwrap().expect("consistent");
        assert_eq!(m.mul_vec(&x).unwrap(), vec![2, 1]);

        let dup = FieldMatrix::from_rows(gf(2), &[[1, 1], [1, 1]]).unwrap();
        assert_eq!(dup.solve(&[0, 1]).unwrap(), None);
        assert!(matches!(dup.solve(&[0]), Err(GfError::DimensionMismatch { .. })));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(FieldMatrix::identity(gf(5), 4).kernel_basis().cols(), 0);
        let parity = FieldMatrix::from_rows(gf(2), &[[1, 1]]).unwrap();
        let k = parity.kernel_basis();
        assert_eq!(k.cols(), 1);
        assert_eq!(k.column(0), vec![1, 1]);
    }

    #[test]
    fn multiplication() {
        let a = FieldMatrix::from_rows(gf(5), &[[1, 2], [3, 4]]).unwrap();
        let b = FieldMatrix::from_rows(gf(5), &[[0, 1], [1, 0]]).unwrap();
        let c = a.mul(&b).unwrap();
        assert_eq!(c, FieldMatrix::from_rows(gf(5), &[[2, 1], [4, 3]]).unwrap());
        let other = FieldMatrix::identity(gf(3), 2);
        assert!(matches!(a.mul(&other), Err(GfError::OrderMismatch { .. })));
    }
}
