//! Multivariate gcd over ℚ by content / primitive-part recursion.
//!
//! The main variable is always the smallest variable index occurring in either
//! operand. Coefficients with respect to it are polynomials in the remaining
//! variables; their gcd (the content) is computed recursively and the
//! primitive parts are combined with a primitive pseudo-remainder sequence.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::poly::MultiPoly;

const PRIME: u64 = 2_147_483_647;

/// Monic gcd of `a` and `b` (leading coefficient 1 in grlex). `gcd(0, 0) = 0`.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one();
    }
    if a == b {
        return a.monic();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a1 = a.div_monomial(&ma).expect("monomial content divides");
    let b1 = b.div_monomial(&mb).expect("monomial content divides");
    let g = if a1.is_constant() || b1.is_constant() {
        MultiPoly::one()
    } else {
        gcd_stripped(&a1, &b1)
    };
    g.mul_monomial(&mg).monic()
}

/// Operands are nonconstant and free of monomial content.
fn gcd_stripped(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_monomial() || b.is_monomial() {
        // a monomial without monomial content is a constant
        return MultiPoly::one();
    }
    // cheap exact-divisibility shortcut, common for denominators
    if a.total_degree() <= b.total_degree() {
        if b.div_exact(a).is_some() {
            return a.monic();
        }
    } else if a.div_exact(b).is_some() {
        return b.monic();
    }
    if coprime_by_specialization(a, b) {
        return MultiPoly::one();
    }
    if let Some(h) = super::heu::gcd(a, b) {
        return h.monic();
    }
    let v = match (a.min_var(), b.min_var()) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return MultiPoly::one(),
    };
    if !a.contains_var(v) {
        return content_with(b, v, a.clone());
    }
    if !b.contains_var(v) {
        return content_with(a, v, b.clone());
    }
    // Work from the smaller operand so the larger one is never split into
    // content and primitive part.
    let (small, big) = if a.terms().len() <= b.terms().len() {
        (a, b)
    } else {
        (b, a)
    };
    let cs = content(small, v);
    let ps = small.div_exact(&cs).expect("content divides");
    let c = content_with(big, v, cs);
    let g = if big.degree_in(v) >= ps.degree_in(v) {
        // ps is primitive, so gcd(big, ps) = gcd(ps, prem(big, ps))
        let r = pseudo_remainder(big, &ps, v);
        if r.is_zero() {
            ps.monic()
        } else {
            gcd(&ps, &r)
        }
    } else {
        let cb = content(big, v);
        primitive_prs(big.div_exact(&cb).expect("content divides"), ps, v)
    };
    c.mul(&g).monic()
}

/// `gcd(seed, coefficients of p in v)`.
fn content_with(p: &MultiPoly, v: usize, seed: MultiPoly) -> MultiPoly {
    let mut acc = seed;
    let mut coeffs = p.coefficients_in(v);
    coeffs.sort_by_key(|c| c.terms().len());
    for c in coeffs {
        if acc.is_one() {
            break;
        }
        if !c.is_zero() {
            acc = gcd(&acc, &c);
        }
    }
    acc.monic()
}

/// Proves `gcd(a, b) = 1` when possible. For each variable `v`, the other
/// variables are specialized to integers and the coefficients reduced mod a
/// prime; if both leading coefficients in `v` survive, the degree of the
/// univariate gcd bounds `deg_v gcd(a, b)` from above. A `false` answer is
/// inconclusive.
fn coprime_by_specialization(a: &MultiPoly, b: &MultiPoly) -> bool {
    let nvars = a.max_var().max(b.max_var()).map_or(0, |v| v + 1);
    for v in 0..nvars {
        if !(a.contains_var(v) && b.contains_var(v)) {
            continue;
        }
        let mut proved = false;
        for attempt in 0..3u64 {
            let point: Vec<u64> = (0..nvars as u64)
                .map(|i| (7919 * (i + 1) + 104_729 * attempt + 3) % PRIME)
                .collect();
            let (Some(ua), Some(ub)) = (specialize(a, v, &point), specialize(b, v, &point)) else {
                continue;
            };
            if ua.len() != a.degree_in(v) as usize + 1 || ub.len() != b.degree_in(v) as usize + 1 {
                continue;
            }
            proved = univariate_gcd_degree(ua, ub) == 0;
            break;
        }
        if !proved {
            return false;
        }
    }
    true
}

fn mod_p(c: &num_rational::BigRational) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let reduce = |x: &BigInt| {
        let r = x % &p;
        let r = if r < BigInt::zero() { r + &p } else { r };
        r.to_u64().expect("reduced")
    };
    let d = reduce(c.denom());
    if d == 0 {
        return None;
    }
    Some(reduce(c.numer()) * pow_mod(d, PRIME - 2) % PRIME)
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    acc
}

/// Coefficients in `v` (low to high, trailing zeros trimmed) after
/// evaluating the other variables at `point`, mod `PRIME`.
fn specialize(p: &MultiPoly, v: usize, point: &[u64]) -> Option<Vec<u64>> {
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut x = mod_p(c)?;
        for (i, &e) in m.exponents().iter().enumerate() {
            if i != v && e > 0 {
                x = x * pow_mod(point[i], e as u64) % PRIME;
            }
        }
        let k = m.exp(v) as usize;
        out[k] = (out[k] + x) % PRIME;
    }
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    Some(out)
}

fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    let trim = |x: &mut Vec<u64>| {
        while x.last() == Some(&0) {
            x.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let inv = pow_mod(*b.last().unwrap(), PRIME - 2);
        while a.len() >= b.len() {
            let f = a.last().unwrap() * inv % PRIME;
            let shift = a.len() - b.len();
            for (j, bj) in b.iter().enumerate() {
                a[shift + j] = (a[shift + j] + PRIME - f * bj % PRIME) % PRIME;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Gcd of the coefficients of `p` with respect to variable `v`, monic.
pub fn content(p: &MultiPoly, v: usize) -> MultiPoly {
    content_with(p, v, MultiPoly::zero())
}

fn primitive_part(p: &MultiPoly, v: usize) -> MultiPoly {
    let c = content(p, v);
    p.div_exact(&c).expect("content divides").monic()
}

/// Gcd of two polynomials primitive with respect to `v`, both of positive
/// degree in `v`.
fn primitive_prs(a: MultiPoly, b: MultiPoly, v: usize) -> MultiPoly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = pseudo_remainder(&a, &b, v);
        if r.is_zero() {
            return b.monic();
        }
        if r.degree_in(v) == 0 {
            return MultiPoly::one();
        }
        a = b;
        b = primitive_part(&r, v);
    }
}

/// `lc(b)^(deg a - deg b + 1) * a mod b` with respect to `v`.
pub fn pseudo_remainder(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let bc = b.coefficients_in(v);
    let m = bc.len() - 1;
    let lc = &bc[m];
    let mut r = a.coefficients_in(v);
    if r.len() <= m {
        return a.clone();
    }
    let n = r.len() - 1;
    for k in (m..=n).rev() {
        let t = r[k].clone();
        for coeff in r.iter_mut().take(k) {
            *coeff = coeff.mul(lc);
        }
        r[k] = MultiPoly::zero();
        if !t.is_zero() {
            for (j, bj) in bc.iter().enumerate().take(m) {
                let idx = k - m + j;
                r[idx] = r[idx].sub(&t.mul(bj));
            }
        }
        r.truncate(k);
    }
    MultiPoly::from_coefficients_in(v, &r)
}

/// Least common multiple, monic.
pub fn lcm(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() || b.is_zero() {
        return MultiPoly::zero();
    }
    let g = gcd(a, b);
    a.div_exact(&g).expect("gcd divides").mul(b).monic()
}
