//! Seeded random instances and independent oracles for the paradiff test
//! suites. Nothing here is used by the engine itself.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use paradiff::conn::{gauge_transform, DiffModule};
use paradiff::diffstruct::{
    build_structure, Derivation, DiffMorphism, DiffStructure, OmegaElement, ParamStructure,
};
use paradiff::field::{FieldSpec, Monomial, MultiPoly, RatFun};
use paradiff::jet::{Jet1, Jet2};
use paradiff::matrix::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let n: i64 = rng.gen_range(-6..=6);
    let d: i64 = if rng.gen_bool(0.2) { rng.gen_range(1..=3) } else { 1 };
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Polynomial in the listed variables with at most `terms` terms of total
/// degree at most `deg`.
pub fn poly_in<R: Rng>(rng: &mut R, vars: &[usize], deg: u32, terms: usize) -> MultiPoly {
    let n = vars.iter().copied().max().map_or(0, |v| v + 1);
    let mut out = MultiPoly::zero();
    for _ in 0..rng.gen_range(1..=terms) {
        let mut exps = vec![0u32; n];
        let mut budget = rng.gen_range(0..=deg);
        while budget > 0 && !vars.is_empty() {
            let v = vars[rng.gen_range(0..vars.len())];
            exps[v] += 1;
            budget -= 1;
        }
        out = out.add(&MultiPoly::term(Monomial::new(exps), small_rational(rng)));
    }
    out
}

pub fn poly<R: Rng>(rng: &mut R, nvars: usize, deg: u32, terms: usize) -> MultiPoly {
    let vars: Vec<usize> = (0..nvars).collect();
    poly_in(rng, &vars, deg, terms)
}

pub fn nonzero_poly<R: Rng>(rng: &mut R, nvars: usize, deg: u32, terms: usize) -> MultiPoly {
    loop {
        let p = poly(rng, nvars, deg, terms);
        if !p.is_zero() {
            return p;
        }
    }
}

/// A random element of `ℚ(v₀..v_{n−1})`, polynomial with probability ½.
pub fn ratfun<R: Rng>(rng: &mut R, nvars: usize) -> RatFun {
    let num = poly(rng, nvars, 2, 3);
    if rng.gen_bool(0.5) {
        RatFun::from_poly(num)
    } else {
        let den = nonzero_poly(rng, nvars, 2, 2);
        RatFun::new(num, den).expect("nonzero denominator")
    }
}

pub fn nonzero_ratfun<R: Rng>(rng: &mut R, nvars: usize) -> RatFun {
    loop {
        let x = ratfun(rng, nvars);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn derivation<R: Rng>(rng: &mut R, nvars: usize) -> Derivation {
    Derivation::new((0..nvars).map(|_| ratfun(rng, nvars)).collect())
}

pub fn omega<R: Rng>(rng: &mut R, s: &DiffStructure) -> OmegaElement {
    let n = s.base().len();
    OmegaElement::new((0..s.dim()).map(|_| ratfun(rng, n)).collect())
}

/// A member of `P²`: `η = S + ½dω` with `S` symmetric. `augmented` forces
/// `a = 0`.
pub fn jet2_member<R: Rng>(rng: &mut R, s: &DiffStructure, augmented: bool) -> Jet2 {
    let n = s.base().len();
    let d = s.dim();
    let a = if augmented { RatFun::zero() } else { ratfun(rng, n) };
    let w = omega(rng, s);
    let dw = s.d1(&w);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut sym = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let x = ratfun(rng, n);
            sym.set(i, j, x.clone());
            sym.set(j, i, x);
        }
    }
    let eta = Matrix::from_fn(d, d, |i, j| sym.get(i, j).add(&dw.get(i, j).scale(&half)));
    Jet2 { a, w, eta }
}

/// Symmetric `η` with `a = 0`, `ω = 0`: an element of `Sym²Ω`.
pub fn sym2_element<R: Rng>(rng: &mut R, s: &DiffStructure) -> Jet2 {
    let n = s.base().len();
    let d = s.dim();
    let mut eta = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let x = ratfun(rng, n);
            eta.set(i, j, x.clone());
            eta.set(j, i, x);
        }
    }
    Jet2 { a: RatFun::zero(), w: OmegaElement::zero(d), eta }
}

/// `x₁..x_p, t₁..t_q` with coordinate principal and parameter derivations.
pub fn coordinate_ps(p: usize, q: usize) -> ParamStructure {
    let names: Vec<String> = (1..=p)
        .map(|i| format!("x{i}"))
        .chain((1..=q).map(|j| format!("t{j}")))
        .collect();
    let f = FieldSpec::new(&names).expect("valid names");
    let principal: Vec<&str> = names[..p].iter().map(String::as_str).collect();
    let parameter: Vec<&str> = names[p..].iter().map(String::as_str).collect();
    ParamStructure::coordinate(&f, &principal, &parameter).expect("coordinate structure")
}

/// Three structures with different bracket behaviour: coordinate partials on
/// `ℚ(x,y)`, `{∂x, ∂y, z∂z}` on `ℚ(x,y,z)`, and the affine pair
/// `{∂x, x∂x + ∂y}` (with `[δ₁,δ₂] = δ₁`) on `ℚ(x,y)`.
pub fn sample_structures() -> Vec<DiffStructure> {
    let xy = FieldSpec::new(&["x", "y"]).unwrap();
    let xyz = FieldSpec::new(&["x", "y", "z"]).unwrap();
    let d = |f: &FieldSpec, c: &[&str]| Derivation::new(c.iter().map(|s| f.parse(s).unwrap()).collect());
    vec![
        DiffStructure::coordinate(&xy, &["x", "y"]).unwrap(),
        build_structure(
            &xyz,
            vec![d(&xyz, &["1", "0", "0"]), d(&xyz, &["0", "1", "0"]), d(&xyz, &["0", "0", "z"])],
        )
        .unwrap(),
        build_structure(&xy, vec![d(&xy, &["1", "0"]), d(&xy, &["x", "1"])]).unwrap(),
    ]
}

/// Coefficient of degree ≤ 1 in the principal variables, with constant
/// coefficients that may involve the parameters.
fn gauge_entry<R: Rng>(rng: &mut R, ps: &ParamStructure) -> RatFun {
    let p = ps.principal_count();
    let params: Vec<usize> = (p..ps.base().len()).collect();
    let mut acc = MultiPoly::zero();
    for v in 0..=p {
        if rng.gen_bool(0.5) {
            continue;
        }
        let c = if params.is_empty() || rng.gen_bool(0.5) {
            MultiPoly::constant(small_rational(rng))
        } else {
            poly_in(rng, &params, 1, 2)
        };
        acc = if v == p {
            acc.add(&c)
        } else {
            acc.add(&c.mul(&MultiPoly::var(v)))
        };
    }
    RatFun::from_poly(acc)
}

/// `T = L·U` (unit triangular, entries of degree ≤ 1 in the principal
/// variables) or, with `pole`, `T = L·diag(1, …, x₁ + c)`. Entries have degree
/// at most 2 and `det T` is 1 or `x₁ + c`.
pub fn gauge_matrix<R: Rng>(rng: &mut R, ps: &ParamStructure, m: usize, pole: bool) -> Matrix {
    let mut l = Matrix::identity(m);
    let mut u = Matrix::identity(m);
    for i in 0..m {
        for j in 0..i {
            l.set(i, j, gauge_entry(rng, ps));
            if !pole {
                u.set(j, i, gauge_entry(rng, ps));
            }
        }
    }
    if pole && ps.principal_count() > 0 {
        let c: i64 = rng.gen_range(1..=4);
        u.set(m - 1, m - 1, RatFun::var(0).add(&RatFun::from_int(c)));
    }
    l.mul(&u)
}

/// The gauge transform of the trivial module: `A_i = −T⁻¹∂ᵢT`.
pub fn gauge_flat_module<R: Rng>(rng: &mut R, ps: &ParamStructure, m: usize) -> (DiffModule, Matrix) {
    let pole = rng.gen_bool(0.3);
    let t = gauge_matrix(rng, ps, m, pole);
    let module = gauge_transform(&DiffModule::trivial(ps, m), &t).expect("invertible gauge");
    (module, t)
}

/// A gauge-flat module with a random polynomial matrix added to the first
/// connection matrix.
pub fn perturbed_module<R: Rng>(rng: &mut R, ps: &ParamStructure, m: usize) -> DiffModule {
    let (flat, _) = gauge_flat_module(rng, ps, m);
    let n = ps.base().len();
    let mut conn = flat.matrices().to_vec();
    let mut bump = Matrix::zeros(m, m);
    while bump.is_zero() {
        bump = Matrix::from_fn(m, m, |_, _| {
            if rng.gen_bool(0.4) {
                RatFun::from_poly(poly(rng, n, 1, 2))
            } else {
                RatFun::zero()
            }
        });
    }
    conn[0] = conn[0].add(&bump);
    DiffModule::new(ps.clone(), m, conn).expect("shapes agree")
}

/// Matrix with entries constant for the principal derivations.
pub fn principal_constant_matrix<R: Rng>(rng: &mut R, ps: &ParamStructure, rows: usize, cols: usize) -> Matrix {
    let p = ps.principal_count();
    let params: Vec<usize> = (p..ps.base().len()).collect();
    Matrix::from_fn(rows, cols, |_, _| {
        if params.is_empty() || rng.gen_bool(0.5) {
            RatFun::from_rational(small_rational(rng))
        } else {
            RatFun::from_poly(poly_in(rng, &params, 1, 2))
        }
    })
}

/// Invertible matrix with entries constant for the principal derivations.
pub fn principal_constant_invertible<R: Rng>(rng: &mut R, ps: &ParamStructure, m: usize) -> Matrix {
    loop {
        let c = principal_constant_matrix(rng, ps, m, m);
        if c.inverse().is_some() {
            return c;
        }
    }
}

/// For gauge-flat `M₁ = T₁·𝟙`, `M₂ = T₂·𝟙`, the matrix `T₂⁻¹ C T₁` is a
/// morphism `M₁ → M₂` for any principal-constant `C`.
pub fn gauge_morphism(t1: &Matrix, t2: &Matrix, c: &Matrix) -> Matrix {
    t2.inverse().expect("invertible").mul(c).mul(t1)
}

/// Maximal degree in the principal variables of numerators and denominators
/// of the entries of `T⁻¹`.
pub fn inverse_degree(t: &Matrix, principal: usize) -> u32 {
    let deg = |p: &MultiPoly| {
        p.terms()
            .iter()
            .map(|(m, _)| m.exponents().iter().take(principal).sum::<u32>())
            .max()
            .unwrap_or(0)
    };
    t.inverse()
        .expect("invertible")
        .entries()
        .iter()
        .map(|x| deg(x.numer()).max(deg(x.denom())))
        .max()
        .unwrap_or(0)
}

/// `[δ_k, δ_j]` computed on the derivations themselves and expressed back
/// in the basis.
pub fn bracket_coords_by_action(s: &DiffStructure, k: usize, j: usize) -> Vec<RatFun> {
    let br = s.basis()[k].bracket(&s.basis()[j]);
    s.coordinates(&br).expect("basis is closed")
}

/// `L_{δ_k}(ω)(δ_j) = δ_k(ω(δ_j)) − ω([δ_k, δ_j])` with the bracket taken
/// from the action on the field.
pub fn lie_by_definition(s: &DiffStructure, k: usize, w: &OmegaElement) -> OmegaElement {
    OmegaElement::new(
        (0..s.dim())
            .map(|j| {
                let br = bracket_coords_by_action(s, k, j);
                s.apply(k, w.get(j)).sub(&w.pair(&br))
            })
            .collect(),
    )
}

/// Action induced on a quotient: `basis = [W | I]` spans an `A`-invariant
/// subspace whose last columns span an invariant sub; returns the action on
/// the first `quotient_dim` columns modulo the rest. The basis must be
/// constant so that the derivation part of the connection passes through.
pub fn induced_quotient(a: &Matrix, basis: &Matrix, quotient_dim: usize) -> Option<Matrix> {
    let k = basis.cols();
    let image = a.mul(basis);
    let mut coords = Matrix::zeros(k, k);
    for c in 0..k {
        let col = basis.solve(&image.column(c))?;
        for (r, v) in col.into_iter().enumerate() {
            coords.set(r, c, v);
        }
    }
    if !coords.block(0, quotient_dim, quotient_dim, k - quotient_dim).is_zero() {
        return None;
    }
    Some(coords.block(0, 0, quotient_dim, quotient_dim))
}

/// Baer sum of `E₁, E₂` (each `[[A_Q,0],[C,A_S]]`) through the fiber
/// product over `Q` modulo the antidiagonal copy of `S`, in the basis
/// `((q,0,q,0), (0,s,0,0))`.
pub fn baer_by_pullback(a1: &Matrix, a2: &Matrix, qr: usize, sr: usize) -> Option<Matrix> {
    let n = qr + sr;
    let a = Matrix::block_diag(&[a1, a2]);
    let mut basis = Matrix::zeros(2 * n, qr + 2 * sr);
    for i in 0..qr {
        basis.set(i, i, RatFun::one());
        basis.set(n + i, i, RatFun::one());
    }
    for s in 0..sr {
        basis.set(qr + s, qr + s, RatFun::one());
        // antidiagonal copy (0, s, 0, −s) spans the sub being divided out
        basis.set(qr + s, qr + sr + s, RatFun::one());
        basis.set(n + qr + s, qr + sr + s, RatFun::from_int(-1));
    }
    induced_quotient(&a, &basis, qr + sr)
}

/// `At¹(M)` computed inside `M ⊗ P¹` over the full structure: the weak
/// action `∂(Σ e_k⊗u_k) = Σ ∂(e_k)⊗u_k + e_k⊗(∂a_k + L_∂ w_k)`, read back in
/// the basis `(f̄, ē⊗ω_t)` through the `r`-linear structure.
pub fn prolong_via_jets(m: &DiffModule) -> Vec<Matrix> {
    let ps = m.ps();
    let full = ps.full();
    let (p, q, r) = (ps.principal_count(), ps.parameter_count(), m.rank());
    let d = full.dim();
    let n = r * (1 + q);
    // basis elements as vectors of Jet1 indexed by e_k
    let mut basis: Vec<Vec<Jet1>> = Vec::with_capacity(n);
    for j in 0..r {
        basis.push(paradiff::conn::phi1_right(m, j));
    }
    for s in 0..q {
        for j in 0..r {
            basis.push(
                (0..r)
                    .map(|k| Jet1 {
                        a: RatFun::zero(),
                        w: if k == j {
                            OmegaElement::basis(d, p + s)
                        } else {
                            OmegaElement::zero(d)
                        },
                    })
                    .collect(),
            );
        }
    }
    (0..p)
        .map(|i| {
            let a = m.matrix(i);
            let mut out = Matrix::zeros(n, n);
            for (col, u) in basis.iter().enumerate() {
                // ∂(e_k) = −Σ_l e_l A[l][k]
                let acted: Vec<Jet1> = (0..r)
                    .map(|l| {
                        let mut acc = Jet1 {
                            a: full.apply(i, &u[l].a),
                            w: full.lie_derivative(i, &u[l].w),
                        };
                        for (k, uk) in u.iter().enumerate() {
                            let c = a.get(l, k);
                            if !c.is_zero() {
                                acc = acc.sub(&Jet1 {
                                    a: c.mul(&uk.a),
                                    w: uk.w.scale(c),
                                });
                            }
                        }
                        acc
                    })
                    .collect();
                // coordinates: z_f = a, z_(s,k) = w_{k,p+s} − ∂̃_s(a_k)
                for k in 0..r {
                    out.set(k, col, acted[k].a.neg());
                }
                for s in 0..q {
                    for k in 0..r {
                        let z = acted[k].w.get(p + s).sub(&full.apply(p + s, &acted[k].a));
                        out.set((s + 1) * r + k, col, z.neg());
                    }
                }
            }
            out
        })
        .collect()
}

/// `ℚ(x,y,z)` with `{∂x, ∂y, z∂z}` mapped to coordinate `ℚ(x,y)` by
/// `z ↦ 0`, sending `(1/z)dz` to `f dx + g dy`.
pub fn z_quotient_morphism(f: &RatFun, g: &RatFun) -> DiffMorphism {
    let s = &sample_structures()[1];
    let xy = FieldSpec::new(&["x", "y"]).unwrap();
    let target = DiffStructure::coordinate(&xy, &["x", "y"]).unwrap();
    let omega = Matrix::from_rows(vec![
        vec![RatFun::one(), RatFun::zero(), f.clone()],
        vec![RatFun::zero(), RatFun::one(), g.clone()],
    ]);
    DiffMorphism::new(s.clone(), target, vec![RatFun::var(0), RatFun::var(1), RatFun::zero()], omega)
        .expect("shapes agree")
}

/// Polynomial self-map of a coordinate structure with `φ_*` the Jacobian.
pub fn polynomial_map<R: Rng>(rng: &mut R, s: &DiffStructure) -> DiffMorphism {
    let n = s.base().len();
    let images: Vec<RatFun> = (0..n).map(|_| RatFun::from_poly(poly(rng, n, 2, 3))).collect();
    let omega = Matrix::from_fn(n, n, |r, c| images[c].partial(r));
    DiffMorphism::new(s.clone(), s.clone(), images, omega).expect("shapes agree")
}
