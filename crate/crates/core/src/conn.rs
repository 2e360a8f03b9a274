//! Differential modules over `(K, D_{K/k})` given by connection matrices.
//!
//! Convention: for the basis row `ē` and a principal derivation `∂`,
//! `∂(ē) = −ē·A_∂`, so a coordinate column `v` is horizontal iff
//! `∂v = A_∂ v`. The matrix of `∇_∂` on `ē` is `−A_∂`
//! ([`DiffModule::nabla`]).
//!
//! `hom(M, N)` is vectorized row-major: the coordinate of `Ψ[a][b]` (`a` a
//! basis index of `N`, `b` of `M`) is `a·m + b`. With this order `hom(M, N)`
//! and `N ⊗ M^∨` have identical matrices.

use std::collections::BTreeSet;

use num_rational::BigRational;
use thiserror::Error;

use crate::diffstruct::{DiffMorphism, MorphismVerdict, OmegaElement, ParamStructure};
use crate::field::{gcd, lcm, FieldError, Monomial, MultiPoly, RatFun};
use crate::jet::{Jet1, JetRing};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnError {
    #[error("modules live over different parameterized structures")]
    StructureMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("module is not integrable: curvature in directions ({i}, {j})")]
    NotFlat { i: usize, j: usize },
    #[error("invalid morphism: {0}")]
    MorphismInvalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffModule {
    ps: ParamStructure,
    rank: usize,
    conn: Vec<Matrix>,
    flat: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Integrability {
    Flat,
    /// `∂ᵢAⱼ − ∂ⱼAᵢ − [Aᵢ,Aⱼ] − Σ_q c_ij^q A_q ≠ 0`.
    Curved {
        i: usize,
        j: usize,
        residual: Matrix,
    },
}

impl Integrability {
    pub fn is_flat(&self) -> bool {
        matches!(self, Integrability::Flat)
    }
}

impl DiffModule {
    /// One `rank × rank` matrix per principal derivation.
    pub fn new(ps: ParamStructure, rank: usize, conn: Vec<Matrix>) -> Result<Self, ConnError> {
        if conn.len() != ps.principal_count() {
            return Err(ConnError::Shape(format!(
                "{} connection matrices for {} principal derivations",
                conn.len(),
                ps.principal_count()
            )));
        }
        if let Some(a) = conn.iter().find(|a| a.shape() != (rank, rank)) {
            return Err(ConnError::Shape(format!(
                "connection matrix is {}x{}, rank is {rank}",
                a.rows(),
                a.cols()
            )));
        }
        Ok(DiffModule {
            ps,
            rank,
            conn,
            flat: false,
        })
    }

    pub fn trivial(ps: &ParamStructure, rank: usize) -> Self {
        let conn = vec![Matrix::zeros(rank, rank); ps.principal_count()];
        DiffModule {
            ps: ps.clone(),
            rank,
            conn,
            flat: true,
        }
    }

    pub fn ps(&self) -> &ParamStructure {
        &self.ps
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `A_i`.
    pub fn matrix(&self, i: usize) -> &Matrix {
        &self.conn[i]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.conn
    }

    /// Matrix of `∇_{∂ᵢ}` on the basis, `−A_i`.
    pub fn nabla(&self, i: usize) -> Matrix {
        self.conn[i].neg()
    }

    /// True once integrability has been verified.
    pub fn is_certified_flat(&self) -> bool {
        self.flat
    }

    /// Verifies integrability and records it.
    pub fn certify(mut self) -> Result<Self, ConnError> {
        if !self.flat {
            if let Integrability::Curved { i, j, .. } = check_integrability(&self) {
                return Err(ConnError::NotFlat { i, j });
            }
            self.flat = true;
        }
        Ok(self)
    }

    pub(crate) fn with_flat(mut self, flat: bool) -> Self {
        self.flat = flat;
        self
    }

    fn same_structure(&self, other: &Self) -> Result<(), ConnError> {
        if self.ps == other.ps {
            Ok(())
        } else {
            Err(ConnError::StructureMismatch)
        }
    }

    /// Entrywise action of principal derivation `i`.
    pub fn derive(&self, i: usize, m: &Matrix) -> Matrix {
        m.map(|a| self.ps.principal(i).apply(a))
    }
}

pub fn check_integrability(m: &DiffModule) -> Integrability {
    let s = m.ps.relative();
    let p = m.conn.len();
    for i in 0..p {
        for j in i + 1..p {
            let ai = &m.conn[i];
            let aj = &m.conn[j];
            let mut r = m
                .derive(i, aj)
                .sub(&m.derive(j, ai))
                .sub(&ai.mul(aj).sub(&aj.mul(ai)));
            for (q, c) in s.bracket_coords(i, j).iter().enumerate() {
                if !c.is_zero() {
                    r = r.sub(&m.conn[q].scale(c));
                }
            }
            if !r.is_zero() {
                return Integrability::Curved { i, j, residual: r };
            }
        }
    }
    Integrability::Flat
}

pub fn tensor(m: &DiffModule, n: &DiffModule) -> Result<DiffModule, ConnError> {
    m.same_structure(n)?;
    let (im, in_) = (Matrix::identity(m.rank), Matrix::identity(n.rank));
    let conn = m
        .conn
        .iter()
        .zip(&n.conn)
        .map(|(a, b)| a.kron(&in_).add(&im.kron(b)))
        .collect();
    Ok(DiffModule::new(m.ps.clone(), m.rank * n.rank, conn)?.with_flat(m.flat && n.flat))
}

pub fn dual(m: &DiffModule) -> DiffModule {
    let conn = m.conn.iter().map(|a| a.transpose().neg()).collect();
    DiffModule {
        ps: m.ps.clone(),
        rank: m.rank,
        conn,
        flat: m.flat,
    }
}

/// `Hom(M, N)`, see the module docs for the vectorization.
pub fn hom(m: &DiffModule, n: &DiffModule) -> Result<DiffModule, ConnError> {
    m.same_structure(n)?;
    let (im, in_) = (Matrix::identity(m.rank), Matrix::identity(n.rank));
    let conn = m
        .conn
        .iter()
        .zip(&n.conn)
        .map(|(a, b)| b.kron(&im).sub(&in_.kron(&a.transpose())))
        .collect();
    Ok(DiffModule::new(m.ps.clone(), m.rank * n.rank, conn)?.with_flat(m.flat && n.flat))
}

pub fn direct_sum(m: &DiffModule, n: &DiffModule) -> Result<DiffModule, ConnError> {
    m.same_structure(n)?;
    let conn = m
        .conn
        .iter()
        .zip(&n.conn)
        .map(|(a, b)| Matrix::block_diag(&[a, b]))
        .collect();
    Ok(DiffModule::new(m.ps.clone(), m.rank + n.rank, conn)?.with_flat(m.flat && n.flat))
}

/// Base change `ē ↦ ē·T`: `A' = T⁻¹AT − T⁻¹∂T`. `T` is a morphism from the
/// result to `m`.
pub fn gauge_transform(m: &DiffModule, t: &Matrix) -> Result<DiffModule, ConnError> {
    if t.shape() != (m.rank, m.rank) {
        return Err(ConnError::Shape(
            "gauge matrix must be square of the module rank".into(),
        ));
    }
    let ti = t
        .inverse()
        .ok_or_else(|| ConnError::Shape("gauge matrix is singular".into()))?;
    let conn = (0..m.conn.len())
        .map(|i| ti.mul(&m.conn[i]).mul(t).sub(&ti.mul(&m.derive(i, t))))
        .collect();
    Ok(DiffModule::new(m.ps.clone(), m.rank, conn)?.with_flat(m.flat))
}

/// Transports `m` along `φ: R → S`: `A^S_∂ = Σᵢ bᵢ(∂) φ(A^R_i)`, with `bᵢ`
/// the structure map of `φ`.
///
/// Only d-compatibility of `φ` is required; if `φ` fails integrability the
/// result is a well-defined but possibly curved connection.
pub fn extend_scalars(
    phi: &DiffMorphism,
    target: &ParamStructure,
    m: &DiffModule,
) -> Result<DiffModule, ConnError> {
    if phi.source() != m.ps.full() || phi.target() != target.full() {
        return Err(ConnError::StructureMismatch);
    }
    if let MorphismVerdict::DCompatFail { variable, .. } = phi.check()? {
        return Err(ConnError::MorphismInvalid(format!(
            "not compatible with d on source variable `{}`",
            m.ps.base().variables()[variable]
        )));
    }
    let (p_r, p_s) = (m.ps.principal_count(), target.principal_count());
    let images: Vec<Matrix> = m
        .conn
        .iter()
        .map(|a| phi.apply_matrix(a))
        .collect::<Result<_, _>>()?;
    let mut conn = Vec::with_capacity(p_s);
    for s in 0..p_s {
        let b = phi.structure_map(s);
        if b[p_r..].iter().any(|c| !c.is_zero()) {
            return Err(ConnError::MorphismInvalid(format!(
                "principal derivation {s} of the target maps onto a parameter direction"
            )));
        }
        let mut acc = Matrix::zeros(m.rank, m.rank);
        for (i, a) in images.iter().enumerate() {
            if !b[i].is_zero() {
                acc = acc.add(&a.scale(&b[i]));
            }
        }
        conn.push(acc);
    }
    DiffModule::new(target.clone(), m.rank, conn)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismCheck {
    Ok,
    /// `∂ᵢT − (A_i^N T − T A_i^M)`.
    Fail {
        i: usize,
        residual: Matrix,
    },
}

impl MorphismCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, MorphismCheck::Ok)
    }
}

pub fn morphism_check(
    t: &Matrix,
    m: &DiffModule,
    n: &DiffModule,
) -> Result<MorphismCheck, ConnError> {
    m.same_structure(n)?;
    if t.shape() != (n.rank, m.rank) {
        return Err(ConnError::Shape(format!(
            "morphism matrix is {}x{}, expected {}x{}",
            t.rows(),
            t.cols(),
            n.rank,
            m.rank
        )));
    }
    for i in 0..m.conn.len() {
        let residual = m
            .derive(i, t)
            .sub(&n.conn[i].mul(t).sub(&t.mul(&m.conn[i])));
        if !residual.is_zero() {
            return Ok(MorphismCheck::Fail { i, residual });
        }
    }
    Ok(MorphismCheck::Ok)
}

/// A horizontal map `src → dst` given by its `dst.rank × src.rank` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMorphism {
    src: DiffModule,
    dst: DiffModule,
    t: Matrix,
}

impl ModMorphism {
    pub fn new(src: DiffModule, dst: DiffModule, t: Matrix) -> Result<Self, ConnError> {
        if let MorphismCheck::Fail { i, .. } = morphism_check(&t, &src, &dst)? {
            return Err(ConnError::MorphismInvalid(format!(
                "does not intertwine principal derivation {i}"
            )));
        }
        Ok(ModMorphism { src, dst, t })
    }

    pub fn identity(m: &DiffModule) -> Self {
        ModMorphism {
            src: m.clone(),
            dst: m.clone(),
            t: Matrix::identity(m.rank),
        }
    }

    pub fn src(&self) -> &DiffModule {
        &self.src
    }

    pub fn dst(&self) -> &DiffModule {
        &self.dst
    }

    pub fn matrix(&self) -> &Matrix {
        &self.t
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ModMorphism) -> Result<ModMorphism, ConnError> {
        if self.dst.rank != other.src.rank || self.dst.conn != other.src.conn {
            return Err(ConnError::Shape("morphisms are not composable".into()));
        }
        Ok(ModMorphism {
            src: self.src.clone(),
            dst: other.dst.clone(),
            t: other.t.mul(&self.t),
        })
    }
}

/// An element of `Ω_{K/k} ⊗ M`: one coordinate column per principal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaTensorVector {
    pub components: Vec<Vec<RatFun>>,
}

impl OmegaTensorVector {
    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(RatFun::is_zero)
    }
}

/// `φ¹(e_j) = 1⊗e_j − ∇(e_j) ∈ P¹⊗M` over the relative structure; entry `k`
/// is the `P¹` coefficient of `e_k`.
pub fn phi1(m: &DiffModule, j: usize) -> Vec<Jet1> {
    let p = m.conn.len();
    (0..m.rank)
        .map(|k| Jet1 {
            a: if k == j {
                RatFun::one()
            } else {
                RatFun::zero()
            },
            w: OmegaElement::new((0..p).map(|i| m.conn[i].get(k, j).clone()).collect()),
        })
        .collect()
}

/// The same element written in `M ⊗ P¹` over the full structure: the basis
/// vector `f_j = e_j⊗1 − Σᵢ ē·Aᵢ[:, j]⊗ω̃ᵢ`.
pub fn phi1_right(m: &DiffModule, j: usize) -> Vec<Jet1> {
    let d = m.ps.full().dim();
    phi1(m, j)
        .into_iter()
        .map(|u| {
            let mut w = u.w.neg().coeffs().to_vec();
            w.resize(d, RatFun::zero());
            Jet1 {
                a: u.a,
                w: OmegaElement::new(w),
            }
        })
        .collect()
}

/// `λ(Σ_k e_k ⊗ (a_k + w_k))`: the principal component `i` is
/// `∂ᵢa − Aᵢa − (w_{k,i})_k`. Its kernel is `At¹(M)`.
pub fn lambda(m: &DiffModule, u: &[Jet1]) -> OmegaTensorVector {
    let a: Vec<RatFun> = u.iter().map(|x| x.a.clone()).collect();
    let components = (0..m.conn.len())
        .map(|i| {
            let da: Vec<RatFun> = a.iter().map(|c| m.ps.principal(i).apply(c)).collect();
            let aa = m.conn[i].mul_vec(&a);
            (0..m.rank)
                .map(|k| da[k].sub(&aa[k]).sub(u[k].w.get(i)))
                .collect()
        })
        .collect();
    OmegaTensorVector { components }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Ok,
    /// `(id⊗φ¹)(φ¹(e_basis))`, coefficient of `e_component`, is not in `P²`;
    /// the antisymmetric defect sits at the form pair `(i, j)`.
    Fail {
        i: usize,
        j: usize,
        basis: usize,
        component: usize,
    },
}

impl Membership {
    pub fn is_ok(&self) -> bool {
        matches!(self, Membership::Ok)
    }
}

/// Checks that `(id⊗φ¹)∘φ¹` lands in `P²⊗M`, by direct expansion in
/// `P¹⊗P¹⊗M`.
pub fn phi2_membership(m: &DiffModule) -> Membership {
    let rel = m.ps.relative();
    let jets = JetRing::new(&rel);
    let first: Vec<Vec<Jet1>> = (0..m.rank).map(|j| phi1(m, j)).collect();
    let d = rel.dim();
    let mut defects = Vec::new();
    for (j, u) in first.iter().enumerate() {
        for l in 0..m.rank {
            let mut t = jets.tensor(&u[0], &first[0][l]);
            for (k, uk) in u.iter().enumerate().skip(1) {
                t = t.add(&jets.tensor(uk, &first[k][l]));
            }
            if t.alpha != t.beta {
                // never reached: both slots equal the (l, j) entries of the A_i
                defects.push((0, 0, j, l));
                continue;
            }
            for a in 0..d {
                for b in a + 1..d {
                    let anti = t.h.get(a, b).sub(t.h.get(b, a));
                    let expect = rel
                        .bracket_coords(a, b)
                        .iter()
                        .zip(t.alpha.coeffs())
                        .fold(RatFun::zero(), |acc, (c, w)| acc.add(&c.mul(w)));
                    if anti != expect {
                        defects.push((a, b, j, l));
                    }
                }
            }
        }
    }
    match defects.into_iter().min() {
        None => Membership::Ok,
        Some((i, j, basis, component)) => Membership::Fail {
            i,
            j,
            basis,
            component,
        },
    }
}

/// True iff every principal derivation kills `a`.
pub fn constants_check(a: &RatFun, ps: &ParamStructure) -> bool {
    ps.is_constant(a)
}

/// Horizontal vectors `v` (`∂ᵢv = Aᵢv`) of the form `N/D`.
///
/// Variables that no principal derivation moves are treated as constants;
/// the ansatz is over `k' = ℚ(those variables)`. `D` is the product of a
/// coprime, squarefree basis of the denominators of the `Aᵢ` (restricted to
/// factors in the moving variables), each to the power `degree_bound`; the
/// numerators range over monomials of degree `≤ degree_bound + deg D` in the
/// moving variables. The result is a `k'`-basis of the solutions of that
/// shape.
pub fn horizontal_space(m: &DiffModule, degree_bound: u32) -> Vec<Vec<RatFun>> {
    let n_vars = m.ps.base().len();
    let p = m.conn.len();
    let moving: Vec<usize> = (0..n_vars)
        .filter(|&v| (0..p).any(|i| !m.ps.principal(i).coeffs()[v].is_zero()))
        .collect();
    let is_moving = |v: usize| moving.contains(&v);

    let dens: Vec<MultiPoly> = m
        .conn
        .iter()
        .flat_map(|a| a.entries().iter().map(|x| x.denom().clone()))
        .filter(|d| !d.is_constant())
        .collect();
    let basis = coprime_basis(dens, &moving);
    let mut den = MultiPoly::one();
    for f in basis
        .iter()
        .filter(|f| moving.iter().any(|&v| f.contains_var(v)))
    {
        den = den.mul(&f.pow(degree_bound));
    }
    let den_deg = moving_degree(&den, &is_moving);
    let monos = monomials_up_to(&moving, degree_bound as u64 + den_deg);
    let den_rf = RatFun::from_poly(den);

    // columns: unknown (component r, monomial μ); value ∂ᵢ(μ/D) e_r − Aᵢ (μ/D) e_r
    let unknowns: Vec<(usize, &Monomial)> = (0..m.rank)
        .flat_map(|r| monos.iter().map(move |mu| (r, mu)))
        .collect();
    let base_fns: Vec<RatFun> = monos
        .iter()
        .map(|mu| {
            RatFun::from(mu.clone())
                .div(&den_rf)
                .expect("denominator is nonzero")
        })
        .collect();
    let mut rows: Vec<Vec<RatFun>> = Vec::new();
    for i in 0..p {
        let der: Vec<RatFun> = base_fns
            .iter()
            .map(|g| m.ps.principal(i).apply(g))
            .collect();
        for comp in 0..m.rank {
            let exprs: Vec<RatFun> = unknowns
                .iter()
                .enumerate()
                .map(|(idx, &(r, _))| {
                    let mu_idx = idx % monos.len();
                    let mut e = m.conn[i].get(comp, r).mul(&base_fns[mu_idx]).neg();
                    if comp == r {
                        e = e.add(&der[mu_idx]);
                    }
                    e
                })
                .collect();
            rows.extend(split_equations(&exprs, &is_moving));
        }
    }
    Matrix::sparse_nullspace(rows, unknowns.len())
        .into_iter()
        .map(|c| {
            (0..m.rank)
                .map(|r| {
                    let mut acc = RatFun::zero();
                    for (idx, coeff) in c.iter().enumerate() {
                        if unknowns[idx].0 == r && !coeff.is_zero() {
                            acc = acc.add(&coeff.mul(&base_fns[idx % monos.len()]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Clears denominators of `Σ_u c_u exprs[u] = 0` and splits by monomials in
/// the moving variables, giving linear equations over `k'`.
fn split_equations(exprs: &[RatFun], is_moving: &impl Fn(usize) -> bool) -> Vec<Vec<RatFun>> {
    if exprs.iter().all(RatFun::is_zero) {
        return Vec::new();
    }
    let mut common = MultiPoly::one();
    for e in exprs.iter().filter(|e| !e.is_zero()) {
        common = lcm(&common, e.denom());
    }
    let common_rf = RatFun::from_poly(common);
    let nums: Vec<MultiPoly> = exprs
        .iter()
        .map(|e| {
            let v = e.mul(&common_rf);
            debug_assert!(v.is_polynomial());
            v.numer().clone()
        })
        .collect();
    let mut keys: BTreeSet<Monomial> = BTreeSet::new();
    let split: Vec<Vec<(Monomial, Monomial, BigRational)>> = nums
        .iter()
        .map(|p| {
            p.terms()
                .iter()
                .map(|(mono, c)| {
                    let (mv, cst) = split_monomial(mono, is_moving);
                    keys.insert(mv.clone());
                    (mv, cst, c.clone())
                })
                .collect()
        })
        .collect();
    keys.iter()
        .map(|key| {
            split
                .iter()
                .map(|terms| {
                    let coeff = MultiPoly::from_terms(
                        terms
                            .iter()
                            .filter(|(mv, _, _)| mv == key)
                            .map(|(_, cst, c)| (cst.clone(), c.clone())),
                    );
                    RatFun::from_poly(coeff)
                })
                .collect()
        })
        .collect()
}

fn split_monomial(m: &Monomial, is_moving: &impl Fn(usize) -> bool) -> (Monomial, Monomial) {
    let mut mv = Vec::with_capacity(m.exponents().len());
    let mut cst = Vec::with_capacity(m.exponents().len());
    for (i, &e) in m.exponents().iter().enumerate() {
        if is_moving(i) {
            mv.push(e);
            cst.push(0);
        } else {
            mv.push(0);
            cst.push(e);
        }
    }
    (Monomial::new(mv), Monomial::new(cst))
}

fn moving_degree(p: &MultiPoly, is_moving: &impl Fn(usize) -> bool) -> u64 {
    p.terms()
        .iter()
        .map(|(m, _)| {
            m.exponents()
                .iter()
                .enumerate()
                .filter(|(i, _)| is_moving(*i))
                .map(|(_, &e)| e as u64)
                .sum()
        })
        .max()
        .unwrap_or(0)
}

/// Monomials in `vars` of total degree at most `deg`, in a fixed order.
fn monomials_up_to(vars: &[usize], deg: u64) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for &v in vars {
        let mut next = Vec::new();
        for m in &out {
            let mut e = 0u32;
            loop {
                let cand = m.with_exp(v, e);
                if cand.degree() > deg {
                    break;
                }
                next.push(cand);
                e += 1;
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Pairwise coprime, squarefree polynomials whose products give the radicals
/// of the inputs. No factorization is performed.
fn coprime_basis(polys: Vec<MultiPoly>, moving: &[usize]) -> Vec<MultiPoly> {
    let mut work: Vec<MultiPoly> = Vec::new();
    for p in polys {
        let sq = squarefree(&p, moving);
        if !sq.is_constant() && !work.contains(&sq) {
            work.push(sq);
        }
    }
    loop {
        let mut changed = false;
        'outer: for a in 0..work.len() {
            for b in a + 1..work.len() {
                let g = gcd(&work[a], &work[b]);
                if g.is_constant() {
                    continue;
                }
                let x = work[a].div_exact(&g).expect("gcd divides");
                let y = work[b].div_exact(&g).expect("gcd divides");
                let mut next: Vec<MultiPoly> = work
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != a && *k != b)
                    .map(|(_, p)| p.clone())
                    .collect();
                for q in [x, y, g] {
                    let q = q.monic();
                    if !q.is_constant() && !next.contains(&q) {
                        next.push(q);
                    }
                }
                work = next;
                changed = true;
                break 'outer;
            }
        }
        if !changed {
            work.sort_by(|a, b| a.terms().cmp(b.terms()));
            return work;
        }
    }
}

fn squarefree(p: &MultiPoly, moving: &[usize]) -> MultiPoly {
    let mut q = p.monic();
    for &v in moving {
        if !q.contains_var(v) {
            continue;
        }
        let g = gcd(&q, &q.derivative(v));
        if !g.is_constant() {
            q = q.div_exact(&g).expect("gcd divides").monic();
        }
    }
    q
}
