//! Gaussian rationals: exact complex numbers `re + im·√-1` with
//! arbitrary-precision rational parts.
//!
//! Every identity in this crate is checked by *exact* equality of these
//! scalars; floating point enters only when a caller converts a result for
//! numerical evaluation. Values are overwhelmingly small integers, so the
//! representation keeps an `i64` fast path and promotes to big rationals on
//! overflow or on any non-integer part. All constructors normalize, so
//! equality and hashing never depend on how a value was produced.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// A plain integer (imaginary part zero).
    Int(i64),
    /// Anything else, exactly.
    Big(Box<(BigRational, BigRational)>),
}

/// An element of ℚ(√-1), stored as exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar(Repr);

fn normalize(re: BigRational, im: BigRational) -> Scalar {
    if im.is_zero() && re.is_integer() {
        if let Some(n) = re.numer().to_i64() {
            return Scalar(Repr::Int(n));
        }
    }
    Scalar(Repr::Big(Box::new((re, im))))
}

impl Scalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        normalize(re, im)
    }

    pub fn zero() -> Self {
        Scalar(Repr::Int(0))
    }

    pub fn one() -> Self {
        Scalar(Repr::Int(1))
    }

    /// The imaginary unit √-1.
    pub fn i() -> Self {
        Scalar(Repr::Big(Box::new((BigRational::zero(), BigRational::one()))))
    }

    /// `i^m`, for the phase attached to an order-`m` momentum word.
    pub fn i_pow(m: usize) -> Self {
        match m % 4 {
            0 => Scalar::one(),
            1 => Scalar::i(),
            2 => -Scalar::one(),
            _ => -Scalar::i(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(Repr::Int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        normalize(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Int(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Int(1))
    }

    pub fn re(&self) -> BigRational {
        match &self.0 {
            Repr::Int(n) => BigRational::from_integer(BigInt::from(*n)),
            Repr::Big(b) => b.0.clone(),
        }
    }

    pub fn im(&self) -> BigRational {
        match &self.0 {
            Repr::Int(_) => BigRational::zero(),
            Repr::Big(b) => b.1.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        match &self.0 {
            Repr::Int(_) => self.clone(),
            Repr::Big(b) => normalize(b.0.clone(), -b.1.clone()),
        }
    }

    /// Exact inverse; panics on zero (callers check first).
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero scalar");
        match &self.0 {
            Repr::Int(1) => Scalar::one(),
            Repr::Int(-1) => Scalar::from_int(-1),
            _ => {
                let (re, im) = (self.re(), self.im());
                let norm = &re * &re + &im * &im;
                normalize(&re / &norm, -&im / &norm)
            }
        }
    }

    /// Nearest `Complex64`; the bridge into the numerical geometry layer.
    pub fn to_complex(&self) -> Complex64 {
        match &self.0 {
            Repr::Int(n) => Complex64::new(*n as f64, 0.0),
            Repr::Big(b) => Complex64::new(
                b.0.to_f64().expect("rational out of f64 range"),
                b.1.to_f64().expect("rational out of f64 range"),
            ),
        }
    }

    fn add_ref(&self, rhs: &Scalar) -> Scalar {
        match (&self.0, &rhs.0) {
            (Repr::Int(a), Repr::Int(b)) => match a.checked_add(*b) {
                Some(n) => Scalar(Repr::Int(n)),
                None => normalize(
                    BigRational::from_integer(BigInt::from(*a) + BigInt::from(*b)),
                    BigRational::zero(),
                ),
            },
            _ => normalize(self.re() + rhs.re(), self.im() + rhs.im()),
        }
    }

    fn mul_ref(&self, rhs: &Scalar) -> Scalar {
        match (&self.0, &rhs.0) {
            (Repr::Int(a), Repr::Int(b)) => match a.checked_mul(*b) {
                Some(n) => Scalar(Repr::Int(n)),
                None => normalize(
                    BigRational::from_integer(BigInt::from(*a) * BigInt::from(*b)),
                    BigRational::zero(),
                ),
            },
            _ => {
                let (ar, ai) = (self.re(), self.im());
                let (br, bi) = (rhs.re(), rhs.im());
                normalize(&ar * &br - &ai * &bi, &ar * &bi + &ai * &br)
            }
        }
    }

    fn neg_ref(&self) -> Scalar {
        match &self.0 {
            Repr::Int(n) => match n.checked_neg() {
                Some(m) => Scalar(Repr::Int(m)),
                None => normalize(
                    BigRational::from_integer(-BigInt::from(*n)),
                    BigRational::zero(),
                ),
            },
            Repr::Big(b) => normalize(-b.0.clone(), -b.1.clone()),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Int(n) => write!(f, "{n}"),
            Repr::Big(b) => {
                let (re, im) = (&b.0, &b.1);
                if im.is_zero() {
                    write!(f, "{re}")
                } else if re.is_zero() {
                    write!(f, "{im}i")
                } else if im.is_negative() {
                    write!(f, "{re}{im}i")
                } else {
                    write!(f, "{re}+{im}i")
                }
            }
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.add_ref(&rhs)
    }
}

impl<'a> Add<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        self.add_ref(rhs)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = self.add_ref(rhs);
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.add_ref(&rhs.neg_ref())
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = self.add_ref(&rhs.neg_ref());
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.mul_ref(&rhs)
    }
}

impl<'a, 'b> Mul<&'b Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'b Scalar) -> Scalar {
        self.mul_ref(rhs)
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = self.mul_ref(rhs);
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        self.mul_ref(&rhs.inv())
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

/// Exact binomial coefficient `binom(a, r)` for integer (possibly negative)
/// upper argument, as used in binomial series expansions.
pub fn binomial(a: i64, r: u32) -> Scalar {
    // The running product is always divisible by s!, so stay in integers.
    let mut num: i128 = 1;
    for s in 0..r as i64 {
        match num.checked_mul((a - s) as i128) {
            Some(n) => num = n / (s as i128 + 1),
            None => return binomial_big(a, r),
        }
    }
    match i64::try_from(num) {
        Ok(n) => Scalar::from_int(n),
        Err(_) => binomial_big(a, r),
    }
}

fn binomial_big(a: i64, r: u32) -> Scalar {
    let mut num = BigRational::one();
    for s in 0..r as i64 {
        num *= BigRational::from_integer(BigInt::from(a - s));
        num /= BigRational::from_integer(BigInt::from(s + 1));
    }
    Scalar::new(num, BigRational::zero())
}
