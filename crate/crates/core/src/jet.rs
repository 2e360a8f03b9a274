//! First and second jet rings of a differential structure.
//!
//! * `P¹ = R ⊕ Ω`, with `Ω·Ω = 0`: [`Jet1`] is `a + ω`.
//! * `P¹ ⊗_R P¹` in left-coefficient normal form: [`Jet11`] is
//!   `a(1⊗1) + Σ αᵢ ωᵢ⊗1 + Σ βⱼ 1⊗ωⱼ + Σ Hᵢⱼ ωᵢ⊗ωⱼ`. Every scalar sits on
//!   the outer left; a scalar `c` next to the middle `⊗` is moved with
//!   `1⊗cγ = r(c)⊗γ = c(1⊗γ) + dc⊗γ`. Each rewrite strictly lowers the number
//!   of scalars to the right of `⊗`, so the normal form is reached and unique.
//! * `P² ⊂ P¹⊗P¹`: [`Jet2`] is `a⊗1 + 1⊗ω + ω⊗1 − η`, a member iff
//!   `ηᵢⱼ − ηⱼᵢ = (dω)ᵢⱼ`.
//!
//! With this normal form `r₂(a) = (a, da, 0)`; the `η` of a product
//! `r₂(a)·r₂(b)` is zero because `δᵢδⱼ(ab)` already absorbs the cross terms
//! `δᵢa δⱼb + δⱼa δᵢb`.

use thiserror::Error;

use crate::diffstruct::{DiffStructure, OmegaElement};
use crate::field::{FieldSpec, RatFun};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("not a second jet: antisymmetric part of eta differs from d(omega) at ({i}, {j})")]
    MembershipViolated { i: usize, j: usize },
    #[error("element is not in the augmentation ideal")]
    NotInAugmentationIdeal,
    #[error("tensor has different left and right 1-form parts")]
    NotDiagonal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet1 {
    pub a: RatFun,
    pub w: OmegaElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet11 {
    pub a: RatFun,
    pub alpha: OmegaElement,
    pub beta: OmegaElement,
    pub h: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet2 {
    pub a: RatFun,
    pub w: OmegaElement,
    pub eta: Matrix,
}

impl Jet1 {
    pub fn add(&self, o: &Self) -> Self {
        Jet1 {
            a: &self.a + &o.a,
            w: self.w.add(&o.w),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet1 {
            a: &self.a - &o.a,
            w: self.w.sub(&o.w),
        }
    }

    /// `(a+ω)(b+η) = ab + aη + bω`.
    pub fn mul(&self, o: &Self) -> Self {
        Jet1 {
            a: &self.a * &o.a,
            w: o.w.scale(&self.a).add(&self.w.scale(&o.a)),
        }
    }

    pub fn e(&self) -> RatFun {
        self.a.clone()
    }

    pub fn antipode(&self) -> Self {
        Jet1 {
            a: self.a.clone(),
            w: self.w.neg(),
        }
    }

    pub fn render(&self, field: &FieldSpec) -> (String, Vec<String>) {
        (field.render(&self.a), self.w.render(field))
    }
}

impl Jet11 {
    pub fn add(&self, o: &Self) -> Self {
        Jet11 {
            a: &self.a + &o.a,
            alpha: self.alpha.add(&o.alpha),
            beta: self.beta.add(&o.beta),
            h: self.h.add(&o.h),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet11 {
            a: &self.a - &o.a,
            alpha: self.alpha.sub(&o.alpha),
            beta: self.beta.sub(&o.beta),
            h: self.h.sub(&o.h),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.alpha.dim();
        let h = self
            .h
            .scale(&o.a)
            .add(&o.h.scale(&self.a))
            .add(&outer(&self.alpha, &o.beta))
            .add(&outer(&o.alpha, &self.beta));
        debug_assert_eq!(h.shape(), (d, d));
        Jet11 {
            a: &self.a * &o.a,
            alpha: o.alpha.scale(&self.a).add(&self.alpha.scale(&o.a)),
            beta: o.beta.scale(&self.a).add(&self.beta.scale(&o.a)),
            h,
        }
    }

    /// `e ⊗ id`: kills the left 1-form slot.
    pub fn e_id(&self) -> Jet1 {
        Jet1 {
            a: self.a.clone(),
            w: self.beta.clone(),
        }
    }

    /// `id ⊗ e`: kills the right 1-form slot.
    pub fn id_e(&self) -> Jet1 {
        Jet1 {
            a: self.a.clone(),
            w: self.alpha.clone(),
        }
    }
}

impl Jet2 {
    pub fn add(&self, o: &Self) -> Self {
        Jet2 {
            a: &self.a + &o.a,
            w: self.w.add(&o.w),
            eta: self.eta.add(&o.eta),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet2 {
            a: &self.a - &o.a,
            w: self.w.sub(&o.w),
            eta: self.eta.sub(&o.eta),
        }
    }

    /// Multiplication by a rational number; both scalar structures agree.
    pub fn scale_rational(&self, c: &RatFun) -> Self {
        debug_assert!(c.is_constant());
        Jet2 {
            a: &self.a * c,
            w: self.w.scale(c),
            eta: self.eta.scale(c),
        }
    }

    pub fn e(&self) -> RatFun {
        self.a.clone()
    }

    pub fn proj1(&self) -> Jet1 {
        Jet1 {
            a: self.a.clone(),
            w: self.w.clone(),
        }
    }

    /// The value `−η` of an element of `Sym²Ω` (`a = 0`, `ω = 0`).
    pub fn sym2_value(&self) -> Option<Matrix> {
        (self.a.is_zero() && self.w.is_zero()).then(|| self.eta.neg())
    }

    pub fn render(&self, field: &FieldSpec) -> (String, Vec<String>, Vec<Vec<String>>) {
        (
            field.render(&self.a),
            self.w.render(field),
            self.eta.render_rows(field),
        )
    }
}

fn outer(u: &OmegaElement, v: &OmegaElement) -> Matrix {
    Matrix::from_fn(u.dim(), v.dim(), |i, j| u.get(i) * v.get(j))
}

/// Jet constructions over a fixed [`DiffStructure`].
#[derive(Clone, Copy, Debug)]
pub struct JetRing<'a> {
    s: &'a DiffStructure,
}

impl<'a> JetRing<'a> {
    pub fn new(s: &'a DiffStructure) -> Self {
        JetRing { s }
    }

    pub fn structure(&self) -> &DiffStructure {
        self.s
    }

    fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn l1(&self, a: &RatFun) -> Jet1 {
        Jet1 {
            a: a.clone(),
            w: OmegaElement::zero(self.dim()),
        }
    }

    pub fn r1(&self, a: &RatFun) -> Jet1 {
        Jet1 {
            a: a.clone(),
            w: self.s.d0(a),
        }
    }

    pub fn l2(&self, a: &RatFun) -> Jet2 {
        Jet2 {
            a: a.clone(),
            w: OmegaElement::zero(self.dim()),
            eta: Matrix::zeros(self.dim(), self.dim()),
        }
    }

    pub fn r2(&self, a: &RatFun) -> Jet2 {
        Jet2 {
            a: a.clone(),
            w: self.s.d0(a),
            eta: Matrix::zeros(self.dim(), self.dim()),
        }
    }

    /// `u ⊗ v` in [`Jet11`] normal form.
    pub fn tensor(&self, u: &Jet1, v: &Jet1) -> Jet11 {
        let d = self.dim();
        let db = self.s.d0(&v.a);
        let dbeta: Vec<OmegaElement> = v.w.coeffs().iter().map(|b| self.s.d0(b)).collect();
        Jet11 {
            a: &u.a * &v.a,
            alpha: db.scale(&u.a).add(&u.w.scale(&v.a)),
            beta: v.w.scale(&u.a),
            h: Matrix::from_fn(d, d, |i, j| {
                u.a.mul(dbeta[j].get(i)).add(&u.w.get(i).mul(v.w.get(j)))
            }),
        }
    }

    /// First pair `(i, j)`, `i < j`, where membership fails.
    pub fn membership_defect(&self, x: &Jet2) -> Option<(usize, usize)> {
        let dw = self.s.d1(&x.w);
        let d = self.dim();
        for i in 0..d {
            for j in i + 1..d {
                let anti = x.eta.get(i, j).sub(x.eta.get(j, i));
                if anti != dw.get(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_member(&self, x: &Jet2) -> bool {
        self.membership_defect(x).is_none()
    }

    fn check(&self, x: &Jet2) -> Result<(), JetError> {
        match self.membership_defect(x) {
            Some((i, j)) => Err(JetError::MembershipViolated { i, j }),
            None => Ok(()),
        }
    }

    /// `Δ: P² → P¹⊗P¹`.
    pub fn delta(&self, x: &Jet2) -> Jet11 {
        let d = self.dim();
        let dw: Vec<OmegaElement> = x.w.coeffs().iter().map(|c| self.s.d0(c)).collect();
        Jet11 {
            a: x.a.clone(),
            alpha: x.w.clone(),
            beta: x.w.clone(),
            h: Matrix::from_fn(d, d, |i, j| dw[j].get(i).sub(x.eta.get(i, j))),
        }
    }

    /// Reads a normal-form tensor as `a⊗1 + 1⊗ω + ω⊗1 − η`, checking that it
    /// lies in `P²`.
    pub fn from_tensor(&self, t: &Jet11) -> Result<Jet2, JetError> {
        if t.alpha != t.beta {
            return Err(JetError::NotDiagonal);
        }
        let d = self.dim();
        let dw: Vec<OmegaElement> = t.alpha.coeffs().iter().map(|c| self.s.d0(c)).collect();
        let x = Jet2 {
            a: t.a.clone(),
            w: t.alpha.clone(),
            eta: Matrix::from_fn(d, d, |i, j| dw[j].get(i).sub(t.h.get(i, j))),
        };
        self.check(&x)?;
        Ok(x)
    }

    pub fn mul2(&self, x: &Jet2, y: &Jet2) -> Result<Jet2, JetError> {
        self.check(x)?;
        self.check(y)?;
        self.from_tensor(&self.delta(x).mul(&self.delta(y)))
    }

    /// Divided square `γ(1⊗ω + ω⊗1 − η) = ω⊗ω`.
    pub fn gamma(&self, x: &Jet2) -> Result<Matrix, JetError> {
        if !x.a.is_zero() {
            return Err(JetError::NotInAugmentationIdeal);
        }
        self.check(x)?;
        Ok(outer(&x.w, &x.w))
    }

    /// `⟨ω⟩ = 1⊗ω + ω⊗1 − ½ dω`, the antisymmetric lift of `dω`.
    pub fn bracket_lift(&self, w: &OmegaElement) -> Jet2 {
        let d = self.dim();
        let dw = self.s.d1(w);
        let half = RatFun::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
        Jet2 {
            a: RatFun::zero(),
            w: w.clone(),
            eta: Matrix::from_fn(d, d, |i, j| dw.get(i, j).mul(&half)),
        }
    }
}
