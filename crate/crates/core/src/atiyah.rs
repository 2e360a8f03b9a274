//! Parameterized Atiyah prolongation of differential modules.
//!
//! `At¹(M)` has the basis `(f̄, ē⊗ω_{t,1}, …, ē⊗ω_{t,q})`, where
//! `f̄ = ē⊗1 − Σᵢ ē·Aᵢ⊗ω̃_{x,i}`. For a principal `∂` its connection matrix
//! is block lower triangular,
//!
//! ```text
//! [ A   0  …  0 ]
//! [ B₁  A  …  0 ]       B_s = −∂̃_s(A) − A_{[∂, ∂̃_s]}
//! [ ⋮      ⋱    ]
//! [ B_q 0  …  A ]
//! ```
//!
//! and it sits in `0 → Ω_k⊗M → At¹(M) → M → 0`. Inclusion and projection
//! are stored as `dst × src` matrices: `incl = [0; I]` (`m(1+q) × mq`) and
//! `proj = [I 0]` (`m × m(1+q)`).

use std::collections::VecDeque;

use thiserror::Error;

use crate::conn::{
    check_integrability, direct_sum, dual, morphism_check, tensor, ConnError, DiffModule,
    Integrability, ModMorphism, MorphismCheck,
};
use crate::diffstruct::Derivation;
use crate::field::RatFun;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtiyahError {
    #[error("module is not integrable: curvature in directions ({i}, {j})")]
    NotFlat { i: usize, j: usize },
    #[error("double prolongation does not preserve the symmetric subspace")]
    RestrictionFails,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid morphism: {0}")]
    MorphismInvalid(String),
    #[error(transparent)]
    Conn(#[from] ConnError),
}

fn require_flat(m: &DiffModule) -> Result<(), AtiyahError> {
    if m.is_certified_flat() {
        return Ok(());
    }
    match check_integrability(m) {
        Integrability::Flat => Ok(()),
        Integrability::Curved { i, j, .. } => Err(AtiyahError::NotFlat { i, j }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProlongedModule {
    pub core: DiffModule,
    pub parent_rank: usize,
    pub q: usize,
    pub incl: Matrix,
    pub proj: Matrix,
}

impl ProlongedModule {
    /// `Ω_k ⊗ M`: `q` copies of `M`.
    pub fn sub_module(parent: &DiffModule) -> DiffModule {
        let q = parent.ps().parameter_count();
        let conn = parent
            .matrices()
            .iter()
            .map(|a| Matrix::block_diag(&vec![a; q]))
            .collect();
        DiffModule::new(parent.ps().clone(), parent.rank() * q, conn).expect("block shapes agree")
    }

    /// The `(s+1, 0)` block of the `i`-th connection matrix.
    pub fn b_block(&self, i: usize, s: usize) -> Matrix {
        let m = self.parent_rank;
        self.core.matrix(i).block((s + 1) * m, 0, m, m)
    }

    pub fn as_extension(&self) -> Extension {
        Extension {
            module: self.core.clone(),
            quotient_rank: self.parent_rank,
            sub_rank: self.parent_rank * self.q,
        }
    }
}

/// `B = −∂̃(A) − A_ξ`, where `ξ = [∂, ∂̃] = Σ_k bracket[k] ∂_k` must be a
/// combination of principal directions and `conn` holds their matrices.
pub fn prolongation_block(
    param: &Derivation,
    a: &Matrix,
    bracket: &[RatFun],
    conn: &[Matrix],
) -> Matrix {
    let mut b = a.map(|x| param.apply(x)).neg();
    for (c, ak) in bracket.iter().zip(conn) {
        if !c.is_zero() {
            b = b.sub(&ak.scale(c));
        }
    }
    b
}

fn prolong_unchecked(m: &DiffModule) -> ProlongedModule {
    let ps = m.ps();
    let (p, q, r) = (ps.principal_count(), ps.parameter_count(), m.rank());
    let full = ps.full();
    let n = r * (1 + q);
    let conn: Vec<Matrix> = (0..p)
        .map(|i| {
            let a = m.matrix(i);
            let mut big = Matrix::zeros(n, n);
            for blk in 0..=q {
                big.set_block(blk * r, blk * r, a);
            }
            for s in 0..q {
                let bracket = &full.bracket_coords(i, p + s)[..p];
                let b = prolongation_block(ps.parameter(s), a, bracket, m.matrices());
                big.set_block((s + 1) * r, 0, &b);
            }
            big
        })
        .collect();
    let core = DiffModule::new(ps.clone(), n, conn).expect("block shapes agree");
    let mut incl = Matrix::zeros(n, r * q);
    incl.set_block(r, 0, &Matrix::identity(r * q));
    let mut proj = Matrix::zeros(r, n);
    proj.set_block(0, 0, &Matrix::identity(r));
    ProlongedModule {
        core,
        parent_rank: r,
        q,
        incl,
        proj,
    }
}

/// `At¹(M)`; refuses curved modules.
pub fn prolong_module(m: &DiffModule) -> Result<ProlongedModule, AtiyahError> {
    require_flat(m)?;
    let mut pm = prolong_unchecked(m);
    pm.core = pm.core.certify()?;
    Ok(pm)
}

/// `At¹(T)`: diagonal blocks `T`, first block column `−∂̃_s(T)`.
pub fn prolong_morphism(t: &ModMorphism) -> Result<ModMorphism, AtiyahError> {
    let src = prolong_module(t.src())?;
    let dst = prolong_module(t.dst())?;
    let ps = t.src().ps();
    let q = ps.parameter_count();
    let (n, m) = (t.dst().rank(), t.src().rank());
    let mut big = Matrix::zeros(n * (1 + q), m * (1 + q));
    for blk in 0..=q {
        big.set_block(blk * n, blk * m, t.matrix());
    }
    for s in 0..q {
        let d = t.matrix().map(|x| ps.parameter(s).apply(x)).neg();
        big.set_block((s + 1) * n, 0, &d);
    }
    ModMorphism::new(src.core, dst.core, big)
        .map_err(|e| AtiyahError::MorphismInvalid(e.to_string()))
}

/// `At²(M)` as the `σ`-invariant part of `At¹(At¹(M))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct At2Module {
    pub core: DiffModule,
    /// Inclusion into `double`, `m(1+q)² × m(1+q+q(q+1)/2)`.
    pub incl: Matrix,
    pub double: DiffModule,
    pub parent_rank: usize,
    pub q: usize,
}

/// Pairs `(o, i)`, `o ≤ i ≤ q`, in lexicographic order.
fn sym_pairs(q: usize) -> Vec<(usize, usize)> {
    (0..=q).flat_map(|o| (o..=q).map(move |i| (o, i))).collect()
}

/// The swap of the two `ω_t` slots on `At¹(At¹(M))`; index `(o, i, k)` is
/// `o·m(1+q) + i·m + k`.
pub fn sigma(m: usize, q: usize) -> Matrix {
    let n = m * (1 + q);
    let idx = |o: usize, i: usize, k: usize| o * n + i * m + k;
    let mut s = Matrix::zeros(n * (1 + q), n * (1 + q));
    for o in 0..=q {
        for i in 0..=q {
            for k in 0..m {
                s.set(idx(i, o, k), idx(o, i, k), RatFun::one());
            }
        }
    }
    s
}

pub fn at2_module(m: &DiffModule) -> Result<At2Module, AtiyahError> {
    require_flat(m)?;
    let q = m.ps().parameter_count();
    let r = m.rank();
    let first = prolong_unchecked(m);
    let double = prolong_unchecked(&first.core).core;
    let n = r * (1 + q);
    let idx = |o: usize, i: usize, k: usize| o * n + i * r + k;
    let pairs = sym_pairs(q);
    let small = r * pairs.len();
    let mut j = Matrix::zeros(n * (1 + q), small);
    let mut left = Matrix::zeros(small, n * (1 + q));
    for (c, &(o, i)) in pairs.iter().enumerate() {
        for k in 0..r {
            let col = c * r + k;
            j.set(idx(o, i, k), col, RatFun::one());
            j.set(idx(i, o, k), col, RatFun::one());
            left.set(col, idx(o, i, k), RatFun::one());
        }
    }
    let mut conn = Vec::with_capacity(double.matrices().len());
    for big in double.matrices() {
        let bj = big.mul(&j);
        let a2 = left.mul(&bj);
        if bj != j.mul(&a2) {
            return Err(AtiyahError::RestrictionFails);
        }
        conn.push(a2);
    }
    let core = DiffModule::new(m.ps().clone(), small, conn)?.certify()?;
    Ok(At2Module {
        core,
        incl: j,
        double: double.certify()?,
        parent_rank: r,
        q,
    })
}

/// An extension `0 → S → E → Q → 0` presented block lower triangular:
/// `A_E = [[A_Q, 0], [C, A_S]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub module: DiffModule,
    pub quotient_rank: usize,
    pub sub_rank: usize,
}

impl Extension {
    pub fn new(
        module: DiffModule,
        quotient_rank: usize,
        sub_rank: usize,
    ) -> Result<Self, AtiyahError> {
        if quotient_rank + sub_rank != module.rank() {
            return Err(AtiyahError::ShapeMismatch(
                "block ranks do not add up".into(),
            ));
        }
        let e = Extension {
            module,
            quotient_rank,
            sub_rank,
        };
        for a in e.module.matrices() {
            if !a.block(0, quotient_rank, quotient_rank, sub_rank).is_zero() {
                return Err(AtiyahError::ShapeMismatch(
                    "upper right block is not zero".into(),
                ));
            }
        }
        Ok(e)
    }

    pub fn quotient_block(&self, i: usize) -> Matrix {
        let qr = self.quotient_rank;
        self.module.matrix(i).block(0, 0, qr, qr)
    }

    pub fn sub_block(&self, i: usize) -> Matrix {
        let (qr, sr) = (self.quotient_rank, self.sub_rank);
        self.module.matrix(i).block(qr, qr, sr, sr)
    }

    pub fn off_block(&self, i: usize) -> Matrix {
        let (qr, sr) = (self.quotient_rank, self.sub_rank);
        self.module.matrix(i).block(qr, 0, sr, qr)
    }

    fn with_off_blocks(&self, off: Vec<Matrix>) -> Result<Self, AtiyahError> {
        let conn = off
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut a = self.module.matrix(i).clone();
                a.set_block(self.quotient_rank, 0, c);
                a
            })
            .collect();
        Ok(Extension {
            module: DiffModule::new(self.module.ps().clone(), self.module.rank(), conn)?,
            quotient_rank: self.quotient_rank,
            sub_rank: self.sub_rank,
        })
    }

    /// The split extension `Q ⊕ S`.
    pub fn trivial_like(&self) -> Result<Self, AtiyahError> {
        let zero = Matrix::zeros(self.sub_rank, self.quotient_rank);
        self.with_off_blocks(vec![zero; self.module.matrices().len()])
    }

    /// Negative in the Baer group.
    pub fn negate(&self) -> Result<Self, AtiyahError> {
        let off = (0..self.module.matrices().len())
            .map(|i| self.off_block(i).neg())
            .collect();
        self.with_off_blocks(off)
    }
}

pub fn baer_sum(e1: &Extension, e2: &Extension) -> Result<Extension, AtiyahError> {
    if e1.quotient_rank != e2.quotient_rank
        || e1.sub_rank != e2.sub_rank
        || e1.module.ps() != e2.module.ps()
    {
        return Err(AtiyahError::ShapeMismatch(
            "extensions have different shapes".into(),
        ));
    }
    let p = e1.module.matrices().len();
    for i in 0..p {
        if e1.quotient_block(i) != e2.quotient_block(i) || e1.sub_block(i) != e2.sub_block(i) {
            return Err(AtiyahError::ShapeMismatch(
                "extensions have different quotient or sub connections".into(),
            ));
        }
    }
    let off = (0..p)
        .map(|i| e1.off_block(i).add(&e2.off_block(i)))
        .collect();
    e1.with_off_blocks(off)
}

/// Compares the `B` blocks of `At¹(M⊗N)` with `B(M)⊗I + I⊗B(N)`.
pub fn check_tensor_compat(m: &DiffModule, n: &DiffModule) -> Result<bool, AtiyahError> {
    let pm = prolong_module(m)?;
    let pn = prolong_module(n)?;
    let pmn = prolong_module(&tensor(m, n)?)?;
    let (im, in_) = (Matrix::identity(m.rank()), Matrix::identity(n.rank()));
    for i in 0..m.matrices().len() {
        for s in 0..pm.q {
            let expect = pm.b_block(i, s).kron(&in_).add(&im.kron(&pn.b_block(i, s)));
            if pmn.b_block(i, s) != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureEntry {
    pub label: String,
    pub module: DiffModule,
    /// Number of nested prolongations.
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub entries: Vec<ClosureEntry>,
    /// Some candidate was skipped because of the rank cap or entry limit.
    pub truncated: bool,
}

pub const DEFAULT_MAX_ENTRIES: usize = 64;

/// Breadth-first enumeration of modules built from `m` with dual, `At¹`
/// (nested at most `depth` times), `⊗` and `⊕`. Each processed entry is
/// combined with every entry before it (and itself). Candidates of rank above
/// `rank_cap`, or past `max_entries`, are dropped and flagged.
pub fn generate_closure(
    m: &DiffModule,
    depth: usize,
    rank_cap: usize,
    max_entries: usize,
) -> Result<Closure, AtiyahError> {
    require_flat(m)?;
    let mut out = Closure {
        entries: Vec::new(),
        truncated: false,
    };
    if m.rank() > rank_cap || max_entries == 0 {
        out.truncated = true;
        return Ok(out);
    }
    out.entries.push(ClosureEntry {
        label: "M".into(),
        module: m.clone(),
        depth: 0,
    });
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(cur) = queue.pop_front() {
        let x = out.entries[cur].clone();
        let mut candidates: Vec<(String, usize, Option<DiffModule>)> = Vec::new();
        candidates.push((format!("dual({})", x.label), x.depth, Some(dual(&x.module))));
        if x.depth < depth {
            let rank = x.module.rank() * (1 + x.module.ps().parameter_count());
            let built = (rank <= rank_cap)
                .then(|| prolong_module(&x.module).map(|p| p.core))
                .transpose()?;
            candidates.push((format!("At1({})", x.label), x.depth + 1, built));
        }
        for y in out.entries[..=cur].to_vec() {
            let d = x.depth.max(y.depth);
            let rt = y.module.rank() * x.module.rank();
            let t = (rt <= rank_cap)
                .then(|| tensor(&y.module, &x.module))
                .transpose()?;
            candidates.push((format!("tensor({},{})", y.label, x.label), d, t));
            let rs = y.module.rank() + x.module.rank();
            let s = (rs <= rank_cap)
                .then(|| direct_sum(&y.module, &x.module))
                .transpose()?;
            candidates.push((format!("sum({},{})", y.label, x.label), d, s));
        }
        for (label, d, module) in candidates {
            let Some(module) = module else {
                out.truncated = true;
                continue;
            };
            let seen = out.entries.iter().any(|e| {
                e.module.rank() == module.rank() && e.module.matrices() == module.matrices()
            });
            if seen {
                continue;
            }
            if out.entries.len() >= max_entries {
                out.truncated = true;
                continue;
            }
            queue.push_back(out.entries.len());
            out.entries.push(ClosureEntry {
                label,
                module,
                depth: d,
            });
        }
    }
    Ok(out)
}

/// Checks that the exact-sequence maps of a prolongation are horizontal.
pub fn check_exact_sequence(
    pm: &ProlongedModule,
    parent: &DiffModule,
) -> Result<bool, AtiyahError> {
    let sub = ProlongedModule::sub_module(parent);
    let incl_ok = morphism_check(&pm.incl, &sub, &pm.core)? == MorphismCheck::Ok;
    let proj_ok = morphism_check(&pm.proj, &pm.core, parent)? == MorphismCheck::Ok;
    let zero = pm.proj.mul(&pm.incl).is_zero();
    let ranks = pm.incl.rank() + pm.proj.rank() == pm.core.rank();
    Ok(incl_ok && proj_ok && zero && ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffstruct::ParamStructure;
    use crate::field::FieldSpec;

    fn xt_power() -> (FieldSpec, DiffModule) {
        let f = FieldSpec::new(&["x", "t"]).unwrap();
        let ps = ParamStructure::coordinate(&f, &["x"], &["t"]).unwrap();
        let a = Matrix::from_rows(vec![vec![f.parse("t/x").unwrap()]]);
        (f.clone(), DiffModule::new(ps, 1, vec![a]).unwrap())
    }

    #[test]
    fn power_function_prolongation() {
        let (f, m) = xt_power();
        let pm = prolong_module(&m).unwrap();
        assert_eq!(
            pm.core.matrix(0).render(&f),
            "[[(t)/(x), (0)/(1)], [(-1)/(x), (t)/(x)]]"
        );
        assert!(check_exact_sequence(&pm, &m).unwrap());
    }

    #[test]
    fn power_function_at2() {
        let (f, m) = xt_power();
        let at2 = at2_module(&m).unwrap();
        let p = |s: &str| f.parse(s).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![p("t/x"), p("0"), p("0")],
            vec![p("-1/x"), p("t/x"), p("0")],
            vec![p("0"), p("-2/x"), p("t/x")],
        ]);
        assert_eq!(at2.core.matrix(0), &expect);
        assert_eq!(sigma(1, 1).mul(&at2.incl), at2.incl);
    }

    #[test]
    fn bracket_term_enters_the_block() {
        // synthetic: [∂, ∂̃] = 2∂ gives B = −∂̃(A) − 2A
        let f = FieldSpec::new(&["x", "t"]).unwrap();
        let a = Matrix::from_rows(vec![vec![f.parse("t*x").unwrap()]]);
        let dt = Derivation::partial(2, 1);
        let b = prolongation_block(&dt, &a, &[RatFun::from_int(2)], std::slice::from_ref(&a));
        assert_eq!(
            b,
            Matrix::from_rows(vec![vec![f.parse("-x-2*t*x").unwrap()]])
        );
        let b0 = prolongation_block(&dt, &a, &[RatFun::zero()], std::slice::from_ref(&a));
        assert_eq!(b0, Matrix::from_rows(vec![vec![f.parse("-x").unwrap()]]));
    }

    #[test]
    fn curved_module_is_refused() {
        let f = FieldSpec::new(&["x", "y"]).unwrap();
        let ps = ParamStructure::coordinate(&f, &["x", "y"], &[]).unwrap();
        let m = DiffModule::new(
            ps,
            1,
            vec![
                Matrix::from_rows(vec![vec![f.parse("-y").unwrap()]]),
                Matrix::zeros(1, 1),
            ],
        )
        .unwrap();
        assert_eq!(
            prolong_module(&m).unwrap_err(),
            AtiyahError::NotFlat { i: 0, j: 1 }
        );
    }

    #[test]
    fn closure_depth_one_contains_prolongation() {
        let (_, m) = xt_power();
        let c = generate_closure(&m, 1, 2, DEFAULT_MAX_ENTRIES).unwrap();
        assert!(c
            .entries
            .iter()
            .any(|e| e.label == "At1(M)" && e.module.rank() == 2));
        assert!(c.truncated);
        let c0 = generate_closure(&m, 0, 2, DEFAULT_MAX_ENTRIES).unwrap();
        assert!(c0.entries.iter().all(|e| e.depth == 0));
        assert_eq!(c0.entries[1].label, "dual(M)");
    }
}
