//! Complex scalars in two interchangeable modes: exact Gaussian rationals and
//! double-precision complex floats.
//!
//! Exact-mode arithmetic never rounds; float-mode comparisons always go
//! through an explicit tolerance. Values of the two modes never mix inside a
//! single arithmetic expression: binary operators panic on a mode mismatch,
//! and matrix-level operations check modes up front and return typed errors.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use num_complex::Complex64;

/// Which arithmetic backend a scalar (and everything built from it) uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    Exact,
    Float,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Exact => write!(f, "exact"),
            ScalarMode::Float => write!(f, "float"),
        }
    }
}

/// A complex number with rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn zero() -> Self {
        Self::from_integers(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// |z|^2 as an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of approximations when numerator/denominator
        // individually overflow f64.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// A complex scalar in one of the two modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Box<GaussianRational>),
    Float(Complex64),
}

impl Scalar {
    pub fn exact(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(Box::new(GaussianRational::new(re, im)))
    }

    pub fn exact_int(re: i64, im: i64) -> Self {
        Scalar::Exact(Box::new(GaussianRational::from_integers(re, im)))
    }

    /// Exact rational re/den + (im/den)i with integer inputs.
    pub fn exact_ratio(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Scalar::exact(
            BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        )
    }

    pub fn float(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    pub fn zero(mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::Exact => Scalar::exact_int(0, 0),
            ScalarMode::Float => Scalar::float(0.0, 0.0),
        }
    }

    pub fn one(mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::Exact => Scalar::exact_int(1, 0),
            ScalarMode::Float => Scalar::float(1.0, 0.0),
        }
    }

    pub fn from_usize(mode: ScalarMode, n: usize) -> Self {
        match mode {
            ScalarMode::Exact => Scalar::exact(
                BigRational::from_integer(BigInt::from(n)),
                BigRational::zero(),
            ),
            ScalarMode::Float => Scalar::float(n as f64, 0.0),
        }
    }

    /// n! in the given mode. Exact mode is exact for any n; float mode
    /// saturates to infinity past f64 range.
    pub fn factorial(mode: ScalarMode, n: usize) -> Self {
        match mode {
            ScalarMode::Exact => {
                let mut acc = BigInt::one();
                for k in 2..=n {
                    acc *= BigInt::from(k);
                }
                Scalar::exact(BigRational::from_integer(acc), BigRational::zero())
            }
            ScalarMode::Float => {
                let mut acc = 1.0f64;
                for k in 2..=n {
                    acc *= k as f64;
                }
                Scalar::float(acc, 0.0)
            }
        }
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Exact(_) => ScalarMode::Exact,
            Scalar::Float(_) => ScalarMode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    /// |z| as f64. Exact values are approximated; callers that need exact
    /// decisions compare `norm_sqr` rationals instead.
    pub fn abs(&self) -> f64 {
        match self {
            Scalar::Exact(g) => rational_to_f64(&g.norm_sqr()).sqrt(),
            Scalar::Float(z) => z.norm(),
        }
    }

    /// |self - other| as f64 (same-mode values only).
    pub fn dist(&self, other: &Scalar) -> f64 {
        (self - other).abs()
    }

    /// True when |self - other| <= eps. Exact mode ignores eps and compares
    /// exactly.
    pub fn approx_eq(&self, other: &Scalar, eps: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.dist(other) <= eps,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(Box::new(g.conj())),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    /// Multiplicative inverse; `None` for exact zero (float zero yields inf).
    pub fn try_inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(g) => g.inv().map(|v| Scalar::Exact(Box::new(v))),
            Scalar::Float(z) => {
                if z.re == 0.0 && z.im == 0.0 {
                    None
                } else {
                    Some(Scalar::Float(z.inv()))
                }
            }
        }
    }

    /// Lossy conversion to a double-precision complex value.
    pub fn to_complex64(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_complex64(),
            Scalar::Float(z) => *z,
        }
    }

    /// Convert to float mode (identity on float scalars).
    pub fn to_float_mode(&self) -> Scalar {
        Scalar::Float(self.to_complex64())
    }

    pub fn re_f64(&self) -> f64 {
        match self {
            Scalar::Exact(g) => rational_to_f64(&g.re),
            Scalar::Float(z) => z.re,
        }
    }

    pub fn im_f64(&self) -> f64 {
        match self {
            Scalar::Exact(g) => rational_to_f64(&g.im),
            Scalar::Float(z) => z.im,
        }
    }

    /// Lexicographic key (re, im) for canonical eigenvalue ordering.
    pub fn lex_key(&self) -> (f64, f64) {
        (self.re_f64(), self.im_f64())
    }

    pub fn pow(&self, n: usize) -> Scalar {
        let mut acc = Scalar::one(self.mode());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    fn expect_same_mode(&self, other: &Scalar, op: &str) {
        if self.mode() != other.mode() {
            panic!("scalar mode mismatch in {op}: {} vs {}", self.mode(), other.mode());
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    write!(f, "{}", g.re)
                } else if g.im.is_negative() {
                    write!(f, "{}-{}i", g.re, -g.im.clone())
                } else {
                    write!(f, "{}+{}i", g.re, g.im)
                }
            }
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.im < 0.0 {
                    write!(f, "{}-{}i", z.re, -z.im)
                } else {
                    write!(f, "{}+{}i", z.re, z.im)
                }
            }
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt, $name:literal) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.expect_same_mode(rhs, $name);
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Box::new(
                        GaussianRational {
                            re: &a.re $op &b.re,
                            im: &a.im $op &b.im,
                        },
                    )),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    _ => unreachable!(),
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +, "add");
scalar_binop!(Sub, sub, -, "sub");

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.expect_same_mode(rhs, "mul");
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Box::new(a.mul(b))),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a * b),
            _ => unreachable!(),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    /// Panics on exact division by zero; float division follows IEEE.
    fn div(self, rhs: &Scalar) -> Scalar {
        self.expect_same_mode(rhs, "div");
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let inv = b.inv().expect("exact division by zero");
                Scalar::Exact(Box::new(a.mul(&inv)))
            }
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a / b),
            _ => unreachable!(),
        }
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(Box::new(GaussianRational {
                re: -g.re.clone(),
                im: -g.im.clone(),
            })),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Tolerances for float-mode decisions. Exact mode ignores all three.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value / pivot threshold for rank decisions.
    pub rank_eps: f64,
    /// Entrywise residual bound for reconstruction checks.
    pub recon_eps: f64,
    /// Minimum separation between distinct eigenvalue clusters.
    pub cluster_eps: f64,
}

impl Tolerance {
    pub fn new(rank_eps: f64, recon_eps: f64, cluster_eps: f64) -> Self {
        assert!(
            rank_eps.is_finite() && rank_eps >= 0.0,
            "rank_eps must be finite and nonnegative"
        );
        assert!(
            recon_eps.is_finite() && recon_eps >= 0.0,
            "recon_eps must be finite and nonnegative"
        );
        assert!(
            cluster_eps.is_finite() && cluster_eps >= 0.0,
            "cluster_eps must be finite and nonnegative"
        );
        Self {
            rank_eps,
            recon_eps,
            cluster_eps,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_eps: 1e-9,
            recon_eps: 1e-8,
            cluster_eps: 1e-7,
        }
    }
}

/// Parse a real number in exact mode: "p/q", an integer, or a finite decimal.
pub fn parse_exact_real(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<BigRational>() {
        return Some(r);
    }
    // Finite decimal like "-12.375".
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(BigInt::from(sign) * numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_is_closed() {
        let a = Scalar::exact_ratio(1, 3, 1, 7);
        let b = Scalar::exact_ratio(2, 5, -1, 2);
        let c = &(&a * &b) + &a;
        // (1/3 + i/7)(2/5 - i/2): re = 2/15 + 1/14 = 43/210, im = -1/6 + 2/35 = -23/210
        // plus a: re = 43/210 + 1/3 = 113/210, im = -23/210 + 1/7 = 1/30
        let want = Scalar::exact_ratio(113, 210, 1, 30);
        assert_eq!(c, want);
    }

    #[test]
    fn float_comparison_needs_tolerance() {
        let a = Scalar::float(1.0, 0.0);
        let b = Scalar::float(1.0 + 1e-12, 0.0);
        assert!(a.approx_eq(&b, 1e-9));
        assert!(!a.approx_eq(&b, 1e-15));
    }

    #[test]
    #[should_panic(expected = "mode mismatch")]
    fn mixed_mode_panics() {
        let _ = &Scalar::float(1.0, 0.0) + &Scalar::exact_int(1, 0);
    }

    #[test]
    fn parses_rational_and_decimal_strings() {
        assert_eq!(
            parse_exact_real("3/4").unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(4))
        );
        assert_eq!(
            parse_exact_real("-0.125").unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(8))
        );
        assert_eq!(
            parse_exact_real("17").unwrap(),
            BigRational::from_integer(BigInt::from(17))
        );
        assert!(parse_exact_real("1e-3").is_none());
    }

    #[test]
    fn factorial_modes_agree() {
        for n in 0..10 {
            let e = Scalar::factorial(ScalarMode::Exact, n).to_complex64().re;
            let f = Scalar::factorial(ScalarMode::Float, n).to_complex64().re;
            assert_eq!(e, f);
        }
    }
}
