use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a positive denominator.
pub type Rat = BigRational;

/// Builds `num/den` as a reduced rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `f64 -> Rat` conversion (every finite double is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// An element `p + q·√2` of the ordered field ℚ(√2).
///
/// The pair `(p, q)` is unique for a given real number, so equality and hashing are componentwise.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QSqrt2 {
    p: Rat,
    q: Rat,
}

impl QSqrt2 {
    pub fn new(p: Rat, q: Rat) -> Self {
        QSqrt2 { p, q }
    }

    pub fn from_rat(p: Rat) -> Self {
        QSqrt2 { p, q: Rat::zero() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rat(Rat::from_integer(BigInt::from(v)))
    }

    /// `num/den` with no √2 part.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::from_rat(rat(num, den))
    }

    pub fn sqrt2() -> Self {
        QSqrt2 { p: Rat::zero(), q: Rat::one() }
    }

    /// `r·√2`.
    pub fn sqrt2_times(r: Rat) -> Self {
        QSqrt2 { p: Rat::zero(), q: r }
    }

    pub fn rational_part(&self) -> &Rat {
        &self.p
    }

    pub fn sqrt2_part(&self) -> &Rat {
        &self.q
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Galois conjugate `p − q√2`.
    pub fn conj(&self) -> Self {
        QSqrt2 { p: self.p.clone(), q: -self.q.clone() }
    }

    /// Field norm `p² − 2q²`; zero iff `self` is zero.
    pub fn norm(&self) -> Rat {
        &self.p * &self.p - Rat::from_integer(BigInt::from(2)) * &self.q * &self.q
    }

    /// Exact sign of the real number `p + q√2`: −1, 0 or +1.
    pub fn signum(&self) -> i8 {
        let sp = rat_sign(&self.p);
        let sq = rat_sign(&self.q);
        if sq == 0 {
            return sp;
        }
        if sp == 0 || sp == sq {
            return sq;
        }
        // opposite signs: |p| vs |q|√2 decided by p² − 2q²
        sp * rat_sign(&self.norm())
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Option<Self> {
        let nrm = self.norm();
        if nrm.is_zero() {
            return None;
        }
        Some(QSqrt2 { p: &self.p / &nrm, q: -(&self.q / &nrm) })
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        p + q * std::f64::consts::SQRT_2
    }

    /// Multiply by a rational scalar.
    pub fn scale(&self, r: &Rat) -> Self {
        QSqrt2 { p: &self.p * r, q: &self.q * r }
    }
}

pub(crate) fn rat_sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact sign of `x` in {−1, 0, +1}.
pub fn sign_of(x: &QSqrt2) -> i8 {
    x.signum()
}

impl Zero for QSqrt2 {
    fn zero() -> Self {
        QSqrt2 { p: Rat::zero(), q: Rat::zero() }
    }
    fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }
}

impl One for QSqrt2 {
    fn one() -> Self {
        QSqrt2 { p: Rat::one(), q: Rat::zero() }
    }
}

impl From<Rat> for QSqrt2 {
    fn from(p: Rat) -> Self {
        QSqrt2::from_rat(p)
    }
}

impl From<i64> for QSqrt2 {
    fn from(v: i64) -> Self {
        QSqrt2::from_int(v)
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl<'a> Add<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { p: &self.p + &o.p, q: &self.q + &o.q }
    }
}

impl<'a> Sub<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { p: &self.p - &o.p, q: &self.q - &o.q }
    }
}

impl<'a> Mul<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: &QSqrt2) -> QSqrt2 {
        if self.q.is_zero() && o.q.is_zero() {
            return QSqrt2::from_rat(&self.p * &o.p);
        }
        let two = Rat::from_integer(BigInt::from(2));
        QSqrt2 {
            p: &self.p * &o.p + two * &self.q * &o.q,
            q: &self.p * &o.q + &self.q * &o.p,
        }
    }
}

impl<'a> Div<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    /// Panics on division by zero.
    fn div(self, o: &QSqrt2) -> QSqrt2 {
        if o.q.is_zero() {
            assert!(!o.p.is_zero(), "division by zero in Q(sqrt2)");
            return QSqrt2 { p: &self.p / &o.p, q: &self.q / &o.p };
        }
        self * &o.inv().expect("division by zero in Q(sqrt2)")
    }
}

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { p: -self.p.clone(), q: -self.q.clone() }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { p: -self.p, q: -self.q }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, o: QSqrt2) -> QSqrt2 {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, o: &QSqrt2) -> QSqrt2 {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<QSqrt2> for &'a QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, o: QSqrt2) -> QSqrt2 {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&QSqrt2> for QSqrt2 {
    fn add_assign(&mut self, o: &QSqrt2) {
        self.p += &o.p;
        self.q += &o.q;
    }
}

impl AddAssign for QSqrt2 {
    fn add_assign(&mut self, o: QSqrt2) {
        self.p += o.p;
        self.q += o.q;
    }
}

impl SubAssign<&QSqrt2> for QSqrt2 {
    fn sub_assign(&mut self, o: &QSqrt2) {
        self.p -= &o.p;
        self.q -= &o.q;
    }
}

impl std::iter::Sum for QSqrt2 {
    fn sum<I: Iterator<Item = QSqrt2>>(iter: I) -> Self {
        iter.fold(QSqrt2::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
