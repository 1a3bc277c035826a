//! Coefficient domains.
//!
//! Arithmetic goes through a field object rather than through operator traits on
//! the elements, so a prime field can carry its modulus at runtime.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Arithmetic context for a coefficient domain.
pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Display + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of a rational number; fails when the denominator vanishes in the field.
    fn from_rational(&self, q: &BigRational) -> Result<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Determinant of a square matrix.
    fn det(&self, m: &Matrix<Self::Elem>) -> Result<Self::Elem> {
        linalg::det_gauss(self, m)
    }
}

/// The rational numbers with arbitrary precision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_rational(&self, q: &BigRational) -> Result<BigRational> {
        Ok(q.clone())
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn det(&self, m: &Matrix<BigRational>) -> Result<BigRational> {
        linalg::det_bareiss(m)
    }
}

/// The prime field F_p for a word-sized prime `p < 2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Panics if `p` is not a prime below 2^32.
    pub fn new(p: u64) -> Self {
        assert!(p < (1 << 32), "modulus must fit in 32 bits");
        assert!(is_prime(p), "{p} is not prime");
        PrimeField { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Canonical representative of an integer.
    pub fn reduce_int(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.p)).to_u64().expect("reduced value fits")
    }

    /// Symmetric lift into (-p/2, p/2].
    pub fn lift(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (a * b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
    fn from_rational(&self, q: &BigRational) -> Result<u64> {
        let num = self.reduce_int(q.numer());
        let den = self.reduce_int(q.denom());
        let den_inv = self.inv(&den).ok_or_else(|| Error::NotRepresentable(format!("{q} mod {}", self.p)))?;
        Ok(self.mul(&num, &den_inv))
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

/// Double-precision complex numbers. Not exact; used for numeric evaluation only.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexFloat;

impl Field for ComplexFloat {
    type Elem = Complex64;

    fn zero(&self) -> Complex64 {
        Complex64::zero()
    }
    fn one(&self) -> Complex64 {
        Complex64::one()
    }
    fn is_zero(&self, a: &Complex64) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn inv(&self, a: &Complex64) -> Option<Complex64> {
        if a.is_zero() {
            None
        } else {
            Some(a.inv())
        }
    }
    fn from_rational(&self, q: &BigRational) -> Result<Complex64> {
        Ok(Complex64::new(rational_to_f64(q), 0.0))
    }
    fn from_i64(&self, v: i64) -> Complex64 {
        Complex64::new(v as f64, 0.0)
    }
}

/// Nearest double to a rational, robust to numerators and denominators beyond f64 range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
    // rescale by 2^-shift so both parts are comparable, then undo
    let scaled = if shift >= 0 {
        BigRational::new(q.numer().clone(), q.denom() << (shift as usize))
    } else {
        BigRational::new(q.numer() << ((-shift) as usize), q.denom().clone())
    };
    let n = scaled.numer().to_f64().unwrap_or(f64::NAN);
    let d = scaled.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d * 2f64.powi(shift as i32)
    } else {
        let bits = scaled.numer().bits().max(scaled.denom().bits()) as usize;
        let cut = bits.saturating_sub(60);
        let n = (scaled.numer() >> cut).to_f64().unwrap_or(0.0);
        let d = (scaled.denom() >> cut).to_f64().unwrap_or(1.0);
        n / d * 2f64.powi(shift as i32)
    }
}

/// Deterministic primality test for 64-bit inputs by trial division up to sqrt.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parses `q` (rationals) or `fp:<p>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals,
    Prime(u64),
}

impl std::str::FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "q" || s == "Q" {
            return Ok(FieldSpec::Rationals);
        }
        if let Some(rest) = s.strip_prefix("fp:") {
            let p: u64 = rest.parse().map_err(|_| Error::Parse(format!("bad prime in field spec {s:?}")))?;
            if p >= (1 << 32) || !is_prime(p) {
                return Err(Error::Parse(format!("{p} is not a prime below 2^32")));
            }
            return Ok(FieldSpec::Prime(p));
        }
        Err(Error::Parse(format!("unknown field spec {s:?} (expected q or fp:<p>)")))
    }
}

impl Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "q"),
            FieldSpec::Prime(p) => write!(f, "fp:{p}"),
        }
    }
}
