//! Exact scalars: arbitrary-precision rationals, Gaussian rationals, and the
//! reciprocal-Gamma ratio kernel used by every Γ-series coefficient.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational; the base field of everything here is Q(i).
pub type Rat = num::BigRational;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ScalarError {
    /// γ is a negative integer, so the normalizing term 1/Γ(γ+1) is itself
    /// zero and the series cannot be based at this lattice point.
    #[error("degenerate base point: gamma = {0} is a negative integer")]
    DegenerateBase(String),
    #[error("cannot parse rational literal `{0}`")]
    BadRational(String),
}

/// Shorthand for a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// True iff `x` is an integer.
pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Parse "p/q" or "p" into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, ScalarError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| ScalarError::BadRational(s.into()))?;
    let d: BigInt = den.parse().map_err(|_| ScalarError::BadRational(s.into()))?;
    if d.is_zero() {
        return Err(ScalarError::BadRational(s.into()));
    }
    Ok(Rat::new(n, d))
}

/// Format a rational as "p" or "p/q".
pub fn fmt_rat(x: &Rat) -> String {
    if is_integer(x) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact square root of a nonnegative rational, if it is a rational square.
pub fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// A Gaussian rational `re + im·i`, stored in lowest terms (num::BigRational
/// keeps canonical form). This is the coefficient field for all series.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gaussian {
    pub re: Rat,
    pub im: Rat,
}

impl Gaussian {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gaussian { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        Gaussian { re, im: Rat::zero() }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rat(rint(n))
    }

    pub fn zero() -> Self {
        Self::from_rat(Rat::zero())
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Gaussian { re: Rat::zero(), im: Rat::one() }
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
        Gaussian { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Squared modulus `re² + im²` (a rational).
    pub fn norm(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero Gaussian rational");
        let n = self.norm();
        Gaussian { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Gaussian { re: &self.re * c, im: &self.im * c }
    }

    /// Integer power (negative allowed for nonzero values).
    pub fn powi(&self, k: i64) -> Self {
        if k < 0 {
            return self.inv().powi(-k);
        }
        let mut acc = Gaussian::one();
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Canonical square root in Q(i), if one exists: the root with positive
    /// real part, tie broken by positive imaginary part.
    pub fn sqrt(&self) -> Option<Gaussian> {
        if self.is_zero() {
            return Some(Gaussian::zero());
        }
        if self.im.is_zero() {
            if self.re.is_positive() {
                return rat_sqrt(&self.re).map(Gaussian::from_rat);
            }
            // negative real: root is purely imaginary, canonical +i side
            return rat_sqrt(&(-self.re.clone())).map(|s| Gaussian::new(Rat::zero(), s));
        }
        // w = c + d·i with c² = (re + |z|)/2, d = im / (2c)
        let modulus = rat_sqrt(&self.norm())?;
        let c2 = (&self.re + &modulus) / rint(2);
        let c = rat_sqrt(&c2)?;
        if c.is_zero() {
            return None; // im != 0 excludes this, defensive
        }
        let d = &self.im / (rint(2) * &c);
        // c > 0 already: canonical branch
        Some(Gaussian::new(c, d))
    }
}

impl fmt::Debug for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        if self.re.is_zero() {
            return write!(f, "{}*i", fmt_rat(&self.im));
        }
        if self.im.is_negative() {
            write!(f, "{}-{}*i", fmt_rat(&self.re), fmt_rat(&-self.im.clone()))
        } else {
            write!(f, "{}+{}*i", fmt_rat(&self.re), fmt_rat(&self.im))
        }
    }
}

/// Parse "p/q", "p/q+r/s*i", "p/q-r/s*i" or "r/s*i" into a Gaussian rational.
pub fn parse_gaussian(s: &str) -> Result<Gaussian, ScalarError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = s.strip_suffix("*i") {
        // split at the last +/- that is not leading
        for (idx, ch) in body.char_indices().rev() {
            if idx == 0 {
                break;
            }
            if ch == '+' || ch == '-' {
                let re = parse_rat(&body[..idx])?;
                let im_str = if ch == '+' { &body[idx + 1..] } else { &body[idx..] };
                let im = parse_rat(im_str)?;
                return Ok(Gaussian::new(re, im));
            }
        }
        return Ok(Gaussian::new(Rat::zero(), parse_rat(body)?));
    }
    Ok(Gaussian::from_rat(parse_rat(&s)?))
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl<'a, 'b> $trait<&'b Gaussian> for &'a Gaussian {
            type Output = Gaussian;
            fn $method(self, other: &'b Gaussian) -> Gaussian {
                let $a = self;
                let $b = other;
                $body
            }
        }
        impl $trait<Gaussian> for Gaussian {
            type Output = Gaussian;
            fn $method(self, other: Gaussian) -> Gaussian {
                $trait::$method(&self, &other)
            }
        }
        impl<'b> $trait<&'b Gaussian> for Gaussian {
            type Output = Gaussian;
            fn $method(self, other: &'b Gaussian) -> Gaussian {
                $trait::$method(&self, other)
            }
        }
    };
}

impl_binop!(Add, add, |a, b| Gaussian { re: &a.re + &b.re, im: &a.im + &b.im });
impl_binop!(Sub, sub, |a, b| Gaussian { re: &a.re - &b.re, im: &a.im - &b.im });
impl_binop!(Mul, mul, |a, b| Gaussian {
    re: &a.re * &b.re - &a.im * &b.im,
    im: &a.re * &b.im + &a.im * &b.re,
});
impl_binop!(Div, div, |a, b| a * &b.inv());

impl Neg for Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -self.re, im: -self.im }
    }
}

impl Neg for &Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&Gaussian> for Gaussian {
    fn add_assign(&mut self, other: &Gaussian) {
        self.re += &other.re;
        self.im += &other.im;
    }
}

impl SubAssign<&Gaussian> for Gaussian {
    fn sub_assign(&mut self, other: &Gaussian) {
        self.re -= &other.re;
        self.im -= &other.im;
    }
}

impl MulAssign<&Gaussian> for Gaussian {
    fn mul_assign(&mut self, other: &Gaussian) {
        *self = &*self * other;
    }
}

/// Γ(γ+1)/Γ(γ+l+1) as an exact rational, with the reciprocal-Gamma vanishing
/// convention: when 1/Γ(γ+l+1) vanishes (γ+l+1 a nonpositive integer) the
/// result is exact zero, so the zero propagates correctly through products.
///
/// For l ≥ 0 this is 1/∏_{j=1..l}(γ+j); for l < 0 it is ∏_{j=0..−l−1}(γ−j).
///
/// Errors with [`ScalarError::DegenerateBase`] when γ itself is a negative
/// integer: the series must then be renormalized at a different base point.
pub fn invgamma_ratio(gamma: &Rat, l: i64) -> Result<Rat, ScalarError> {
    if is_integer(gamma) && gamma.is_negative() {
        return Err(ScalarError::DegenerateBase(fmt_rat(gamma)));
    }
    if l >= 0 {
        // If γ is an integer ≥ 0, all factors γ+j are positive: no zero can occur.
        let mut denom = Rat::one();
        for j in 1..=l {
            denom *= gamma + rint(j);
        }
        Ok(denom.recip())
    } else {
        let mut prod = Rat::one();
        for j in 0..(-l) {
            let factor = gamma - rint(j);
            if factor.is_zero() {
                return Ok(Rat::zero());
            }
            prod *= factor;
        }
        Ok(prod)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invgamma_single_factor() {
        // 1/(γ+1) at γ = −1/2
        assert_eq!(invgamma_ratio(&rat(-1, 2), 1).unwrap(), rint(2));
    }

    #[test]
    fn invgamma_vanishes_at_nonpositive_integer_target() {
        // 1/Γ(−1) = 0 via the product (0)(−1)
        assert_eq!(invgamma_ratio(&rint(0), -2).unwrap(), Rat::zero());
    }

    #[test]
    fn invgamma_pochhammer_oracle() {
        // 1/((2/3)(5/3)) = 9/10, by direct Pochhammer product
        assert_eq!(invgamma_ratio(&rat(-1, 3), 2).unwrap(), rat(9, 10));
    }

    #[test]
    fn invgamma_zero_shift_is_one() {
        for g in [rat(3, 7), rat(-5, 2), rint(4)] {
            assert_eq!(invgamma_ratio(&g, 0).unwrap(), Rat::one());
        }
    }

    #[test]
    fn invgamma_negative_integer_gamma_errors() {
        assert!(matches!(invgamma_ratio(&rint(-1), 3), Err(ScalarError::DegenerateBase(_))));
        assert!(matches!(invgamma_ratio(&rint(-7), 0), Err(ScalarError::DegenerateBase(_))));
        // zero is fine
        assert!(invgamma_ratio(&rint(0), 3).is_ok());
    }

    #[test]
    fn invgamma_telescopes() {
        let g = rat(-1, 3);
        let whole = invgamma_ratio(&g, 5).unwrap();
        let first = invgamma_ratio(&g, 2).unwrap();
        let second = invgamma_ratio(&(&g + rint(2)), 3).unwrap();
        assert_eq!(whole, first * second);
    }

    #[test]
    fn gaussian_field_ops() {
        let i = Gaussian::i();
        assert_eq!(&i * &i, Gaussian::from_i64(-1));
        assert_eq!(i.inv(), -Gaussian::i());
        let z = Gaussian::new(rat(1, 2), rat(-2, 3));
        assert!((&z * &z.inv()).is_one());
    }

    #[test]
    fn gaussian_sqrt_canonical() {
        // sqrt(-16) = 4i (canonical: positive imaginary on the tie)
        let s = Gaussian::from_i64(-16).sqrt().unwrap();
        assert_eq!(s, Gaussian::new(Rat::zero(), rint(4)));
        // sqrt(2i) = 1 + i
        let s = Gaussian::new(Rat::zero(), rint(2)).sqrt().unwrap();
        assert_eq!(s, Gaussian::new(rint(1), rint(1)));
        // sqrt(9/4) = 3/2
        let s = Gaussian::from_rat(rat(9, 4)).sqrt().unwrap();
        assert_eq!(s, Gaussian::from_rat(rat(3, 2)));
        // 2 has no rational square root
        assert!(Gaussian::from_i64(2).sqrt().is_none());
        // 3 + 4i = (2 + i)^2
        let s = Gaussian::new(rint(3), rint(4)).sqrt().unwrap();
        assert_eq!(s, Gaussian::new(rint(2), rint(1)));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-5").unwrap(), rint(-5));
        assert!(parse_rat("1/0").is_err());
        let g = parse_gaussian("1/2-2/3*i").unwrap();
        assert_eq!(g, Gaussian::new(rat(1, 2), rat(-2, 3)));
        assert_eq!(parse_gaussian("-3/4*i").unwrap(), Gaussian::new(Rat::zero(), rat(-3, 4)));
        assert_eq!(format!("{}", g), "1/2-2/3*i");
    }
}
