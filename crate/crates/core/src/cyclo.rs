//! Exact scalars of the form `ρ·e^{2πi t}` with `ρ` a positive rational and
//! `t ∈ [0, 1)` rational: the multiplicative group ℚ⁺ × μ_∞.
//!
//! This group is closed under products, integer powers and those roots whose
//! magnitude stays rational, which is all the plumbing construction needs.
//! Sums are deliberately unsupported.

use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{rational_str, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("zero is not a cyclotomic scalar")]
    Zero,
    #[error("root exponent must be nonzero")]
    ZeroExponent,
    #[error("magnitude {magnitude} has no rational {degree}-th root")]
    IrrationalMagnitudeRoot { magnitude: Rational, degree: u64 },
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScalar", into = "RawScalar")]
pub struct CyclotomicScalar {
    magnitude: Rational,
    phase: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawScalar {
    #[serde(with = "rational_str")]
    magnitude: Rational,
    #[serde(with = "rational_str")]
    phase: Rational,
}

impl TryFrom<RawScalar> for CyclotomicScalar {
    type Error = ScalarError;

    fn try_from(raw: RawScalar) -> Result<Self, ScalarError> {
        Self::new(raw.magnitude, raw.phase)
    }
}

impl From<CyclotomicScalar> for RawScalar {
    fn from(s: CyclotomicScalar) -> Self {
        RawScalar {
            magnitude: s.magnitude,
            phase: s.phase,
        }
    }
}

/// Reduces a rational into `[0, 1)`.
fn frac(t: Rational) -> Rational {
    &t - t.floor()
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl CyclotomicScalar {
    /// `magnitude · e^{2πi·phase}`. A negative magnitude is folded into the
    /// phase, so every scalar has a unique representation.
    pub fn new(magnitude: Rational, phase: Rational) -> Result<Self, ScalarError> {
        if magnitude.is_zero() {
            return Err(ScalarError::Zero);
        }
        let (magnitude, phase) = if magnitude.is_negative() {
            (-magnitude, phase + Rational::new(1.into(), 2.into()))
        } else {
            (magnitude, phase)
        };
        Ok(Self {
            magnitude,
            phase: frac(phase),
        })
    }

    pub fn one() -> Self {
        Self {
            magnitude: Rational::one(),
            phase: Rational::zero(),
        }
    }

    pub fn minus_one() -> Self {
        Self::root_of_unity(Rational::new(1.into(), 2.into()))
    }

    /// `(-1)^n`.
    pub fn sign_power(n: i64) -> Self {
        if n.is_even() {
            Self::one()
        } else {
            Self::minus_one()
        }
    }

    pub fn root_of_unity(phase: Rational) -> Self {
        Self {
            magnitude: Rational::one(),
            phase: frac(phase),
        }
    }

    pub fn from_rational(x: Rational) -> Result<Self, ScalarError> {
        Self::new(x, Rational::zero())
    }

    pub fn from_integer(n: i64) -> Result<Self, ScalarError> {
        Self::from_rational(rat(n))
    }

    pub fn magnitude(&self) -> &Rational {
        &self.magnitude
    }

    pub fn phase(&self) -> &Rational {
        &self.phase
    }

    pub fn is_one(&self) -> bool {
        self.magnitude.is_one() && self.phase.is_zero()
    }

    pub fn inv(&self) -> Self {
        Self {
            magnitude: self.magnitude.recip(),
            phase: frac(-self.phase.clone()),
        }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, n: i64) -> Self {
        let magnitude = if self.magnitude.is_one() {
            Rational::one()
        } else {
            let base = if n < 0 {
                self.magnitude.recip()
            } else {
                self.magnitude.clone()
            };
            num_traits::Pow::pow(base, n.unsigned_abs())
        };
        Self {
            magnitude,
            phase: frac(&self.phase * rat(n)),
        }
    }

    /// Multiplies the phase by `e^{2πi·delta}`.
    pub fn rotated(&self, delta: &Rational) -> Self {
        Self {
            magnitude: self.magnitude.clone(),
            phase: frac(&self.phase + delta),
        }
    }
}

impl Mul for &CyclotomicScalar {
    type Output = CyclotomicScalar;

    fn mul(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        CyclotomicScalar {
            magnitude: &self.magnitude * &rhs.magnitude,
            phase: frac(&self.phase + &rhs.phase),
        }
    }
}

impl Mul for CyclotomicScalar {
    type Output = CyclotomicScalar;

    fn mul(self, rhs: CyclotomicScalar) -> CyclotomicScalar {
        &self * &rhs
    }
}

impl Div for &CyclotomicScalar {
    type Output = CyclotomicScalar;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        self * &rhs.inv()
    }
}

impl fmt::Display for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase.is_zero() {
            write!(f, "{}", self.magnitude)
        } else {
            write!(f, "{}·e^(2πi·{})", self.magnitude, self.phase)
        }
    }
}

impl fmt::Debug for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, t={})", self.magnitude, self.phase)
    }
}

/// Exact `degree`-th root of a nonnegative integer, if there is one.
fn exact_int_root(x: &BigInt, degree: u64) -> Option<BigInt> {
    if x.is_zero() || x.is_one() {
        return Some(x.clone());
    }
    // x >= 2 has no integer root of degree beyond its bit length.
    if degree > x.bits() {
        return None;
    }
    let root = x.nth_root(degree.to_u32()?);
    (num_traits::Pow::pow(&root, degree) == *x).then_some(root)
}

/// The `|n|` solutions of `x^n = s`, ordered by increasing phase. The first one
/// is the canonical root.
#[derive(Debug, Clone)]
pub struct NthRoots {
    magnitude: Rational,
    base_phase: Rational,
    count: u64,
    next: u64,
}

impl NthRoots {
    /// Smallest-phase root.
    pub fn canonical(&self) -> CyclotomicScalar {
        self.root(0)
    }

    fn root(&self, j: u64) -> CyclotomicScalar {
        let step = Rational::new(BigInt::from(j), BigInt::from(self.count));
        CyclotomicScalar {
            magnitude: self.magnitude.clone(),
            phase: &self.base_phase + step,
        }
    }
}

impl Iterator for NthRoots {
    type Item = CyclotomicScalar;

    fn next(&mut self) -> Option<CyclotomicScalar> {
        (self.next < self.count).then(|| {
            self.next += 1;
            self.root(self.next - 1)
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for NthRoots {}

/// All `x` with `x^n = s`.
///
/// For `n < 0` these are the inverses of the `|n|`-th roots of `s`; with
/// `t̂ = t` for `n > 0` and `t̂ = -t mod 1` for `n < 0`, the phases are
/// `(t̂ + j)/|n|` for `j = 0..|n|`.
pub fn nth_roots_of(s: &CyclotomicScalar, n: i64) -> Result<NthRoots, ScalarError> {
    if n == 0 {
        return Err(ScalarError::ZeroExponent);
    }
    let degree = n.unsigned_abs();
    let irrational = || ScalarError::IrrationalMagnitudeRoot {
        magnitude: s.magnitude.clone(),
        degree,
    };
    let num = exact_int_root(s.magnitude.numer(), degree).ok_or_else(irrational)?;
    let den = exact_int_root(s.magnitude.denom(), degree).ok_or_else(irrational)?;
    let root = BigRational::new(num, den);
    let (magnitude, base) = if n > 0 {
        (root, s.phase.clone())
    } else {
        (root.recip(), frac(-s.phase.clone()))
    };
    Ok(NthRoots {
        magnitude,
        base_phase: base / rat(degree as i64),
        count: degree,
        next: 0,
    })
}

/// Canonical (smallest phase) solution of `x^n = s`.
pub fn canonical_root(s: &CyclotomicScalar, n: i64) -> Result<CyclotomicScalar, ScalarError> {
    nth_roots_of(s, n).map(|r| r.canonical())
}
