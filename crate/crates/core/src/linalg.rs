//! Exact rational arithmetic and symmetric integer matrices.
//!
//! Everything here is exact: determinants use fraction-free (Bareiss)
//! elimination over the integers, the independent definiteness oracle uses an
//! LDLᵀ factorization over the rationals, and linear solves are carried out in
//! `BigRational`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always stored reduced with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix must have dimension at least 1")]
    Empty,
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    Shape {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("matrix is singular")]
    SingularMatrix,
}

/// Dense symmetric matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, rejecting non-symmetric input.
    pub fn from_row_major(dim: usize, entries: Vec<BigInt>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::Shape {
                dim,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for row in 0..dim {
            for col in row + 1..dim {
                if entries[row * dim + col] != entries[col * dim + row] {
                    return Err(LinalgError::NotSymmetric { row, col });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::Shape {
                    dim,
                    expected: dim * dim,
                    got: rows.iter().map(Vec::len).sum(),
                });
            }
            entries.extend(row.iter().cloned().map(Into::into));
        }
        Self::from_row_major(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.dim)
    }

    /// Leading principal minors `det M_1, …, det M_n`, as far as fraction-free
    /// elimination without pivoting can go. Stops after the first zero minor,
    /// since later minors are not recoverable from the same elimination.
    pub fn leading_minors(&self) -> Vec<BigInt> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut minors = Vec::with_capacity(n);
        let mut prev = BigInt::one();
        for k in 0..n {
            let pivot = a[k * n + k].clone();
            minors.push(pivot.clone());
            if pivot.is_zero() {
                break;
            }
            // Bareiss step: every division below is exact.
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &pivot * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = pivot;
        }
        minors
    }

    /// Determinant by Bareiss elimination with row pivoting.
    pub fn determinant(&self) -> BigInt {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut prev = BigInt::one();
        let mut negate = false;
        for k in 0..n {
            if a[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                negate = !negate;
            }
            let pivot = a[k * n + k].clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &pivot * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = pivot;
        }
        if negate {
            -prev
        } else {
            prev
        }
    }

    /// Matrix-vector product over the rationals.
    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows()
            .map(|row| {
                row.iter().zip(x).fold(Rational::zero(), |acc, (m, xi)| {
                    acc + Rational::from_integer(m.clone()) * xi
                })
            })
            .collect()
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(
                self.rows()
                    .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()),
            )
            .finish()
    }
}

/// Sylvester-type criterion: `M` is negative definite iff `sign(det M_k) = (-1)^k`
/// for every leading principal minor.
pub fn is_negative_definite_minors(m: &SymMatrix) -> bool {
    let minors = m.leading_minors();
    if minors.len() < m.dim() {
        return false;
    }
    minors.iter().enumerate().all(|(k, d)| {
        // k is zero-based, so the (k+1)-th minor must have sign (-1)^(k+1).
        if k % 2 == 0 {
            d.is_negative()
        } else {
            d.is_positive()
        }
    })
}

/// Negative definiteness via exact LDLᵀ: true iff every pivot is strictly
/// negative. Shares no code with [`is_negative_definite_minors`].
pub fn is_negative_definite_ldl(m: &SymMatrix) -> bool {
    let n = m.dim();
    let mut a: Vec<Rational> = m
        .entries
        .iter()
        .map(|v| Rational::from_integer(v.clone()))
        .collect();
    for k in 0..n {
        let d = a[k * n + k].clone();
        if !d.is_negative() {
            return false;
        }
        for i in k + 1..n {
            let l = &a[i * n + k] / &d;
            if l.is_zero() {
                continue;
            }
            for j in k + 1..=i {
                let v = &a[i * n + j] - &l * &a[k * n + j];
                a[i * n + j] = v.clone();
                a[j * n + i] = v;
            }
        }
    }
    true
}

/// Solves `M x = b` exactly by Gaussian elimination over the rationals.
pub fn solve_exact(m: &SymMatrix, b: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
    let n = m.dim();
    if b.len() != n {
        return Err(LinalgError::RhsLength {
            expected: n,
            got: b.len(),
        });
    }
    // Augmented matrix, n rows of n+1 columns.
    let w = n + 1;
    let mut a: Vec<Rational> = Vec::with_capacity(n * w);
    for (row, rhs) in m.rows().zip(b) {
        a.extend(row.iter().map(|v| Rational::from_integer(v.clone())));
        a.push(rhs.clone());
    }
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[i * w + k].is_zero())
            .ok_or(LinalgError::SingularMatrix)?;
        if p != k {
            for j in 0..w {
                a.swap(k * w + j, p * w + j);
            }
        }
        let pivot = a[k * w + k].clone();
        for i in k + 1..n {
            let factor = &a[i * w + k] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for j in k..w {
                let v = &a[i * w + j] - &factor * &a[k * w + j];
                a[i * w + j] = v;
            }
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = a[i * w + n].clone();
        for j in i + 1..n {
            acc -= &a[i * w + j] * &x[j];
        }
        x[i] = acc / &a[i * w + i];
    }
    Ok(x)
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn denominator_lcm<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("bad denominator in {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Serde adapter writing rationals as `"p/q"` strings (integers as `"p"`).
pub mod rational_str {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn minors_examples() {
        assert!(is_negative_definite_minors(&mat(&[&[-1]])));
        assert!(is_negative_definite_minors(&mat(&[&[-2, 1], &[1, -2]])));
        assert!(!is_negative_definite_minors(&mat(&[&[-1, 1], &[1, -1]])));
        assert_eq!(
            mat(&[&[-2, 1], &[1, -2]]).leading_minors(),
            vec![BigInt::from(-2), BigInt::from(3)]
        );
    }

    #[test]
    fn ldl_examples() {
        assert!(is_negative_definite_ldl(&mat(&[&[-1]])));
        assert!(is_negative_definite_ldl(&mat(&[
            &[-3, 1, 1],
            &[1, -3, 1],
            &[1, 1, -3]
        ])));
        assert!(!is_negative_definite_ldl(&mat(&[&[0]])));
        assert!(!is_negative_definite_ldl(&mat(&[&[-1, 1], &[1, -1]])));
    }

    #[test]
    fn solve_examples() {
        assert_eq!(
            solve_exact(&mat(&[&[-1]]), &[q(-1, 1)]).unwrap(),
            vec![q(1, 1)]
        );
        assert_eq!(
            solve_exact(&mat(&[&[-2, 1], &[1, -3]]), &[q(0, 1), q(1, 1)]).unwrap(),
            vec![q(-1, 5), q(-2, 5)]
        );
        assert_eq!(
            solve_exact(&mat(&[&[-2, 1], &[1, -2]]), &[q(0, 1), q(0, 1)]).unwrap(),
            vec![q(0, 1), q(0, 1)]
        );
    }

    #[test]
    fn singular_solve_is_an_error() {
        let err = solve_exact(&mat(&[&[-1, 1], &[1, -1]]), &[q(1, 1), q(0, 1)]);
        assert_eq!(err, Err(LinalgError::SingularMatrix));
    }

    #[test]
    fn zero_leading_entry_needs_pivot() {
        let m = mat(&[&[0, 1], &[1, 0]]);
        assert_eq!(m.determinant(), BigInt::from(-1));
        assert_eq!(
            solve_exact(&m, &[q(2, 1), q(3, 1)]).unwrap(),
            vec![q(3, 1), q(2, 1)]
        );
        assert!(!is_negative_definite_minors(&m));
        assert!(!is_negative_definite_ldl(&m));
    }

    #[test]
    fn rejects_asymmetric_and_empty() {
        let r = SymMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(r, Err(LinalgError::NotSymmetric { row: 0, col: 1 }));
        assert_eq!(
            SymMatrix::from_row_major(0, vec![]),
            Err(LinalgError::Empty)
        );
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("-2/4").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(q(-1, 3).to_string(), "-1/3");
        assert_eq!(q(4, 2).to_string(), "2");
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [q(-1, 6), q(1, 4), q(3, 1)];
        assert_eq!(denominator_lcm(&v), BigInt::from(12));
    }
}
