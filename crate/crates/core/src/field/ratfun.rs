use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gcd::gcd;
use super::poly::{Monomial, MultiPoly};
use super::FieldError;

/// An element of ℚ(v₀, v₁, …) in normal form: `gcd(num, den) = 1` and the
/// leading coefficient of `den` is one.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFun {
    num: MultiPoly,
    den: MultiPoly,
}

impl Default for RatFun {
    fn default() -> Self {
        RatFun::zero()
    }
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun {
            num: MultiPoly::zero(),
            den: MultiPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun::from_poly(MultiPoly::one())
    }

    pub fn from_int(n: i64) -> Self {
        RatFun::from_poly(MultiPoly::from_int(n))
    }

    pub fn from_rational(q: BigRational) -> Self {
        RatFun::from_poly(MultiPoly::constant(q))
    }

    pub fn var(index: usize) -> Self {
        RatFun::from_poly(MultiPoly::var(index))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RatFun {
            num: p,
            den: MultiPoly::one(),
        }
    }

    /// Normalizes `num / den`.
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            return RatFun::zero();
        }
        if let Some(c) = den.constant_value() {
            return RatFun::from_poly(num.scale(&c.recip()));
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        Self::fix_leading(num, den)
    }

    fn fix_leading(num: MultiPoly, den: MultiPoly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFun { num, den }
        } else {
            let inv = lc.recip();
            RatFun {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn numer(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denom(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match (self.num.max_var(), self.den.max_var()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn contains_var(&self, index: usize) -> bool {
        self.num.contains_var(index) || self.den.contains_var(index)
    }

    pub fn neg(&self) -> Self {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_signed(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_signed(other, true)
    }

    fn add_signed(&self, other: &Self, negate: bool) -> Self {
        let combine = |a: &MultiPoly, b: &MultiPoly| if negate { a.sub(b) } else { a.add(b) };
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg() } else { other.clone() };
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFun::from_poly(combine(&self.num, &other.num));
        }
        if self.den == other.den {
            let num = combine(&self.num, &other.num);
            return Self::reduce_against(num, self.den.clone(), &self.den);
        }
        // Henrici: only factors of gcd(d1, d2) can cancel
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = combine(&self.num.mul(&other.den), &other.num.mul(&self.den));
            return Self::fix_leading(num, self.den.mul(&other.den));
        }
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = other.den.div_exact(&g).unwrap();
        let num = combine(&self.num.mul(&d2), &other.num.mul(&d1));
        let den = self.den.mul(&d2);
        Self::reduce_against(num, den, &g)
    }

    /// Normal form of `num / den` where any common factor divides `g`.
    fn reduce_against(num: MultiPoly, den: MultiPoly, g: &MultiPoly) -> Self {
        if num.is_zero() {
            return RatFun::zero();
        }
        let h = gcd(&num, g);
        if h.is_one() {
            return Self::fix_leading(num, den);
        }
        Self::normalize(num.div_exact(&h).unwrap(), den.div_exact(&h).unwrap())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFun::from_poly(self.num.mul(&other.num));
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Self::fix_leading(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::fix_leading(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Ok(RatFun {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// Partial derivative with respect to variable `index` (quotient rule).
    pub fn partial(&self, index: usize) -> Self {
        if !self.contains_var(index) {
            return RatFun::zero();
        }
        if self.den.is_one() {
            return RatFun::from_poly(self.num.derivative(index));
        }
        // (n/d)' = (n' d - n d') / d^2; common factors can only come from d
        let dn = self.num.derivative(index);
        let dd = self.den.derivative(index);
        if dd.is_zero() {
            return Self::reduce_against(dn, self.den.clone(), &self.den);
        }
        let g = gcd(&self.den, &dd);
        let dg = self.den.div_exact(&g).unwrap();
        let ddg = dd.div_exact(&g).unwrap();
        // (n' d - n d') / d^2 = (n' dg - n ddg) / (d dg)
        let num = dn.mul(&dg).sub(&self.num.mul(&ddg));
        let den = self.den.mul(&dg);
        Self::reduce_against(num, den, &self.den)
    }

    /// Image under the ring homomorphism sending variable `i` to
    /// `images[i]`. Variables without an image must not occur.
    pub fn substitute(&self, images: &[Option<RatFun>]) -> Result<Self, FieldError> {
        let n = eval_poly(&self.num, images)?;
        let d = eval_poly(&self.den, images)?;
        if d.is_zero() {
            return Err(FieldError::DenominatorVanishes);
        }
        n.div(&d)
    }

    /// Renders as the canonical interchange text `(num)/(den)`.
    pub fn render(&self, names: &[String]) -> String {
        format!("({})/({})", self.num.render(names), self.den.render(names))
    }
}

fn eval_poly(p: &MultiPoly, images: &[Option<RatFun>]) -> Result<RatFun, FieldError> {
    let mut acc = RatFun::zero();
    let mut cache: Vec<Vec<RatFun>> = vec![Vec::new(); images.len()];
    for (m, c) in p.terms() {
        let mut term = RatFun::from_rational(c.clone());
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let img = images
                .get(i)
                .and_then(|x| x.as_ref())
                .ok_or(FieldError::MissingAssignment(i))?;
            let powers = &mut cache[i];
            if powers.is_empty() {
                powers.push(RatFun::one());
            }
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(img);
                powers.push(next);
            }
            term = term.mul(&powers[e as usize]);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

impl From<MultiPoly> for RatFun {
    fn from(p: MultiPoly) -> Self {
        RatFun::from_poly(p)
    }
}

impl From<i64> for RatFun {
    fn from(n: i64) -> Self {
        RatFun::from_int(n)
    }
}

impl From<Monomial> for RatFun {
    fn from(m: Monomial) -> Self {
        RatFun::from_poly(MultiPoly::term(m, BigRational::one()))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<&RatFun> for &RatFun {
            type Output = RatFun;
            fn $f(self, rhs: &RatFun) -> RatFun {
                RatFun::$f(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&RatFun> for &RatFun {
    type Output = RatFun;
    /// Panics on division by zero; use [`RatFun::div`] for the checked form.
    fn div(self, rhs: &RatFun) -> RatFun {
        RatFun::div(self, rhs).expect("division by zero")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun::neg(self)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}
