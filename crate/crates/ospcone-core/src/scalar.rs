use alloc::string::{String, ToString};
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact element `re + im·i` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl GaussianRational {
    pub fn new(re: Q, im: Q) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(Q::zero(), Q::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(Q::from_integer(BigInt::from(n)), Q::zero())
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::new(q(n, d), Q::zero())
    }

    pub fn from_q(re: Q) -> Self {
        Self::new(re, Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`, the field norm down to ℚ.
    pub fn norm(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    /// A square root inside ℚ(i), when one exists.
    pub fn sqrt(&self) -> Option<Self> {
        if self.im.is_zero() {
            return if self.re.is_negative() {
                sqrt_q(&-self.re.clone()).map(|r| Self::new(Q::zero(), r))
            } else {
                sqrt_q(&self.re).map(Self::from_q)
            };
        }
        // (x + yi)² = a + bi  ⇒  x² = (a + |z|)/2, y = b/2x
        let r = sqrt_q(&self.norm())?;
        let x = sqrt_q(&((&self.re + &r) / Q::from_integer(BigInt::from(2))))?;
        let y = &self.im / &(&x * Q::from_integer(BigInt::from(2)));
        Some(Self::new(x, y))
    }
}

fn sqrt_q(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (p, q) = (x.numer().sqrt(), x.denom().sqrt());
    if &(&p * &p) == x.numer() && &(&q * &q) == x.denom() {
        Some(BigRational::new(p, q))
    } else {
        None
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_q(f: &mut fmt::Formatter<'_>, x: &Q) -> fmt::Result {
    if x.denom().is_one() {
        write!(f, "{}", x.numer())
    } else {
        write!(f, "{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_q(f, &self.re)?;
        if !self.im.is_zero() {
            f.write_str(if self.im.is_negative() { "-" } else { "+" })?;
            write_q(f, &self.im.abs())?;
            f.write_str("*i")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseScalarError(pub String);

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed scalar {:?}", self.0)
    }
}

fn parse_unsigned_q(s: &str) -> Option<Q> {
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if !digits(n) || !digits(d) {
        return None;
    }
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n.parse().ok()?, d))
}

fn parse_signed_q(s: &str) -> Option<Q> {
    match s.strip_prefix('-') {
        Some(rest) => parse_unsigned_q(rest).map(|x| -x),
        None => parse_unsigned_q(s),
    }
}

impl FromStr for GaussianRational {
    type Err = ParseScalarError;

    /// Accepts `p`, `p/q`, `p/q+r/s*i`, `p/q-r/s*i` and a bare imaginary `r/s*i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        if let Some(body) = s.strip_suffix("*i") {
            // the sign separating the two parts is the last +/- that is not leading
            let split = body
                .char_indices()
                .skip(1)
                .filter(|&(_, c)| c == '+' || c == '-')
                .map(|(k, _)| k)
                .last();
            return match split {
                Some(k) => {
                    let re = parse_signed_q(&body[..k]).ok_or_else(err)?;
                    let im = parse_signed_q(&body[k..].trim_start_matches('+')).ok_or_else(err)?;
                    if body[k..].starts_with("+-") || body[k..].starts_with("--") {
                        return Err(err());
                    }
                    Ok(Self::new(re, im))
                }
                None => Ok(Self::new(Q::zero(), parse_signed_q(body).ok_or_else(err)?)),
            };
        }
        Ok(Self::from_q(parse_signed_q(s).ok_or_else(err)?))
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::from_q(&self.re * &o.re);
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self * &o.inv().expect("division by zero")
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

macro_rules! by_value {
    ($tr:ident, $f:ident) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $f(self, o: GaussianRational) -> GaussianRational {
                (&self).$f(&o)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $f(self, o: &GaussianRational) -> GaussianRational {
                (&self).$f(o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn g(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = g("1/3+1/2*i");
        let b = g("-2+1*i");
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&a - &a, GaussianRational::zero());
        assert_eq!(&GaussianRational::i() * &GaussianRational::i(), GaussianRational::from_int(-1));
        assert_eq!(a.conj().conj(), a);
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-3", "5/7", "1/2+3/4*i", "-1/2-1*i", "0+1*i"] {
            assert_eq!(format!("{}", g(s)), s);
        }
        assert_eq!(g("2/4"), g("1/2"));
        assert_eq!(g("-1*i"), GaussianRational::i().conj());
    }

    #[test]
    fn square_roots() {
        for s in ["4", "-9/4", "0+2*i", "3+4*i", "-5-12*i", "0"] {
            let z = g(s);
            let r = z.sqrt().unwrap();
            assert_eq!(&r * &r, z, "{s}");
        }
        assert!(g("2").sqrt().is_none());
        assert!(g("0+1*i").sqrt().is_none());
    }

    #[test]
    fn rejects_malformed() {
        for s in ["1.5", "", "1/0", "i", "1+*i", "1 /2", "1+-2*i", "a", "--1"] {
            assert!(s.parse::<GaussianRational>().is_err(), "{s}");
        }
    }
}
