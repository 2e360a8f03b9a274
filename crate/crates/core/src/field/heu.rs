//! Heuristic polynomial gcd over ℤ (Char, Geddes, Gonnet).
//!
//! One variable is evaluated at a large integer `ξ`, the gcd of the images is
//! computed recursively, and a candidate is rebuilt from the `ξ`-adic digits
//! of its coefficients. With `ξ ≥ 2·min(‖a‖∞, ‖b‖∞) + 2` a primitive candidate
//! dividing both inputs is the gcd, so every `Some` answer is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, MultiPoly};

const ATTEMPTS: usize = 4;
const MAX_BITS: u64 = 50_000;

/// Integer polynomial, terms in decreasing monomial order.
#[derive(Clone, Debug, PartialEq, Eq)]
struct IntPoly(Vec<(Monomial, BigInt)>);

impl IntPoly {
    fn from_map(map: BTreeMap<Monomial, BigInt>) -> Self {
        IntPoly(
            map.into_iter()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        )
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn max_var(&self) -> Option<usize> {
        self.0.iter().filter_map(|(m, _)| m.max_var()).max()
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.0.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    fn norm(&self) -> BigInt {
        self.0
            .iter()
            .map(|(_, c)| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn constant(&self) -> Option<BigInt> {
        match self.0.as_slice() {
            [] => Some(BigInt::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.0 {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    /// Divides by the integer content; leading coefficient positive.
    fn primitive(mut self) -> Self {
        let mut g = self.content();
        if g.is_zero() {
            return self;
        }
        if self.0[0].1.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for (_, c) in &mut self.0 {
                *c = &*c / &g;
            }
        }
        self
    }

    fn coefficients_in(&self, v: usize) -> Vec<IntPoly> {
        let mut buckets: Vec<BTreeMap<Monomial, BigInt>> =
            vec![BTreeMap::new(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.0 {
            *buckets[m.exp(v) as usize]
                .entry(m.with_exp(v, 0))
                .or_insert_with(BigInt::zero) += c;
        }
        buckets.into_iter().map(IntPoly::from_map).collect()
    }

    fn evaluate(&self, v: usize, xi: &BigInt) -> IntPoly {
        let mut powers = vec![BigInt::one()];
        for _ in 0..self.degree_in(v) {
            let next = powers.last().unwrap() * xi;
            powers.push(next);
        }
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in &self.0 {
            *map.entry(m.with_exp(v, 0)).or_insert_with(BigInt::zero) +=
                c * &powers[m.exp(v) as usize];
        }
        IntPoly::from_map(map)
    }

    /// Inverse of [`IntPoly::evaluate`] for coefficients in `(−ξ/2, ξ/2]`.
    fn interpolate(&self, v: usize, xi: &BigInt) -> IntPoly {
        let half = xi / BigInt::from(2);
        let mut rest: Vec<(Monomial, BigInt)> = self.0.clone();
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        let mut k = 0u32;
        while !rest.is_empty() {
            let mut next = Vec::with_capacity(rest.len());
            for (m, c) in rest {
                let mut r = c.mod_floor(xi);
                if r > half {
                    r -= xi;
                }
                let q = (&c - &r) / xi;
                if !r.is_zero() {
                    map.insert(m.with_exp(v, m.exp(v) + k), r);
                }
                if !q.is_zero() {
                    next.push((m, q));
                }
            }
            rest = next;
            k += 1;
        }
        IntPoly::from_map(map)
    }

    /// Exact quotient over ℤ, if any.
    fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        let (lm, lc) = d.0.first()?;
        let nvars = self.max_var().max(d.max_var()).map_or(0, |v| v + 1);
        if (0..nvars).any(|v| d.degree_in(v) > self.degree_in(v)) {
            return None;
        }
        let mut rem: BTreeMap<Monomial, BigInt> = self.0.iter().cloned().collect();
        let mut quot: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(lm)?;
            let (qc, r) = c.div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            for (dm, dc) in d.0.iter().skip(1) {
                let key = qm.mul(dm);
                let e = rem.entry(key.clone()).or_insert_with(BigInt::zero);
                *e -= &qc * dc;
                if e.is_zero() {
                    rem.remove(&key);
                }
            }
            quot.insert(qm, qc);
        }
        Some(IntPoly::from_map(quot))
    }
}

fn to_int(p: &MultiPoly) -> IntPoly {
    let mut den = BigInt::one();
    for (_, c) in p.terms() {
        den = den.lcm(c.denom());
    }
    IntPoly(
        p.terms()
            .iter()
            .map(|(m, c)| (m.clone(), c.numer() * (&den / c.denom())))
            .collect(),
    )
    .primitive()
}

fn to_multi(p: IntPoly) -> MultiPoly {
    MultiPoly::from_terms(
        p.0.into_iter()
            .map(|(m, c)| (m, BigRational::from_integer(c))),
    )
}

/// Gcd of `a` and `b` up to a rational unit, or `None` when the heuristic
/// gives up.
pub(super) fn gcd(a: &MultiPoly, b: &MultiPoly) -> Option<MultiPoly> {
    heu(&to_int(a), &to_int(b)).map(to_multi)
}

/// Gcd over ℤ including the integer content, leading coefficient positive.
fn heu(a: &IntPoly, b: &IntPoly) -> Option<IntPoly> {
    if let (Some(x), Some(y)) = (a.constant(), b.constant()) {
        return Some(IntPoly::from_map(BTreeMap::from([(
            Monomial::one(),
            x.gcd(&y),
        )])));
    }
    let c = a.content().gcd(&b.content());
    Some(heu_primitive(&a.clone().primitive(), &b.clone().primitive())?.scale(&c))
}

fn heu_primitive(a: &IntPoly, b: &IntPoly) -> Option<IntPoly> {
    let v = a.max_var().max(b.max_var())?;
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 || db == 0 {
        return heu_content(a, b, v);
    }
    let mut xi = BigInt::from(2) * a.norm().min(b.norm()) + BigInt::from(2);
    for _ in 0..ATTEMPTS {
        if xi.bits() > MAX_BITS {
            return None;
        }
        let (fa, fb) = (a.evaluate(v, &xi), b.evaluate(v, &xi));
        if let Some(h) = heu(&fa, &fb) {
            let cand = h.interpolate(v, &xi).primitive();
            if divides_both(&cand, a, b) {
                return Some(cand);
            }
            for (f, ff) in [(a, &fa), (b, &fb)] {
                if let Some(co) = ff.div_exact(&h) {
                    if let Some(g) = f.div_exact(&co.interpolate(v, &xi)) {
                        let g = g.primitive();
                        if divides_both(&g, a, b) {
                            return Some(g);
                        }
                    }
                }
            }
        }
        xi = &xi * BigInt::from(73794) * xi.sqrt().sqrt() / BigInt::from(27011);
    }
    None
}

fn divides_both(c: &IntPoly, a: &IntPoly, b: &IntPoly) -> bool {
    !c.is_zero() && a.div_exact(c).is_some() && b.div_exact(c).is_some()
}

/// One operand is free of `v`; the gcd divides every coefficient in `v` of
/// the other.
fn heu_content(a: &IntPoly, b: &IntPoly, v: usize) -> Option<IntPoly> {
    let (free, other) = if a.degree_in(v) == 0 { (a, b) } else { (b, a) };
    let mut acc = free.clone();
    for c in other.coefficients_in(v) {
        if c.is_zero() {
            continue;
        }
        acc = heu(&acc, &c)?;
        if acc.constant().is_some_and(|k| k.is_one()) {
            break;
        }
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(&[u32], i64)]) -> MultiPoly {
        MultiPoly::from_terms(terms.iter().map(|(e, c)| {
            (
                Monomial::new(e.to_vec()),
                BigRational::from_integer((*c).into()),
            )
        }))
    }

    #[test]
    fn recovers_shared_factor() {
        // (x + 2y + 3)(x − y), (x + 2y + 3)(x² + 1)
        let f = p(&[(&[1, 0], 1), (&[0, 1], 2), (&[0, 0], 3)]);
        let a = f.mul(&p(&[(&[1, 0], 1), (&[0, 1], -1)]));
        let b = f.mul(&p(&[(&[2, 0], 1), (&[0, 0], 1)]));
        assert_eq!(gcd(&a, &b).unwrap().monic(), f.monic());
    }

    #[test]
    fn interpolate_inverts_evaluate() {
        let a = to_int(&p(&[(&[3, 1], -7), (&[1, 2], 5), (&[0, 0], 2)]));
        let xi = BigInt::from(1001);
        assert_eq!(a.evaluate(1, &xi).interpolate(1, &xi), a);
    }
}
