//! Derivation bases, structure constants, 1- and 2-forms, the de Rham
//! differential, Lie derivatives, morphisms of differential fields and
//! parameterized (split) structures.
//!
//! Derivations are stored extrinsically, as coefficient vectors over the
//! coordinate partials of a [`FieldSpec`]. A [`DiffStructure`] fixes a basis
//! `δ₁..δ_d` of such derivations closed under the bracket; 1-forms are
//! coordinate vectors over the dual basis `ω₁..ω_d`.
//!
//! Morphism checks are finite: d-compatibility is tested on the source
//! variables and integrability on the source dual basis. Both conditions are
//! additive, and for `a ∈ R`, `ω ∈ Ω_R`
//!
//! ```text
//! d(φ(a)) − φ_*(da)            is a derivation of R into Ω_S along φ,
//! d(φ_*(aω)) − φ_*(d(aω))  = φ(a)·(d(φ_*ω) − φ_*(dω)) + (d φ(a) − φ_*(da)) ∧ φ_*ω,
//! ```
//!
//! so vanishing on generators and on a basis implies vanishing everywhere.

use thiserror::Error;

use crate::field::{FieldError, FieldSpec, RatFun};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("a derivation basis must be nonempty")]
    EmptyBasis,
    #[error("derivation has {found} coefficients, field has {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis derivations are linearly dependent")]
    NotIndependent,
    #[error("bracket of basis elements {i} and {j} leaves the span")]
    NotClosed {
        i: usize,
        j: usize,
        residual: Derivation,
    },
    #[error("basis elements {i} and {j} do not commute")]
    NotCommuting { i: usize, j: usize },
    #[error("principal derivation {derivation} does not annihilate constant `{variable}`")]
    PrincipalMovesConstants { derivation: usize, variable: String },
    #[error("parameter derivations are dependent on the constant subfield")]
    DegenerateParameters,
    #[error("morphism data has the wrong shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `Σᵢ coeffs[i] · ∂/∂vᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    coeffs: Vec<RatFun>,
}

impl Derivation {
    pub fn new(coeffs: Vec<RatFun>) -> Self {
        Derivation { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Derivation::new(vec![RatFun::zero(); n])
    }

    /// The coordinate partial `∂/∂v_index` in a field with `n` variables.
    pub fn partial(n: usize, index: usize) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[index] = RatFun::one();
        d
    }

    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RatFun::is_zero)
    }

    pub fn apply(&self, a: &RatFun) -> RatFun {
        let mut acc = RatFun::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() || !a.contains_var(i) {
                continue;
            }
            acc = acc.add(&c.mul(&a.partial(i)));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        Derivation::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Derivation::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        Derivation::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `[self, other]_k = self(other_k) − other(self_k)`.
    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "bracket of derivations over different fields"
        );
        Derivation::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| self.apply(b).sub(&other.apply(a)))
                .collect(),
        )
    }

    /// `(variable, coefficient)` pairs for the nonzero coefficients.
    pub fn render(&self, field: &FieldSpec) -> Vec<(String, String)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (field.variables()[i].clone(), field.render(c)))
            .collect()
    }
}

pub fn bracket(a: &Derivation, b: &Derivation) -> Derivation {
    a.bracket(b)
}

/// A 1-form `Σ coeffs[i] ωᵢ` over the dual basis of some [`DiffStructure`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OmegaElement {
    coeffs: Vec<RatFun>,
}

impl OmegaElement {
    pub fn new(coeffs: Vec<RatFun>) -> Self {
        OmegaElement { coeffs }
    }

    pub fn zero(d: usize) -> Self {
        OmegaElement::new(vec![RatFun::zero(); d])
    }

    /// The dual basis element `ω_i`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut w = Self::zero(d);
        w.coeffs[i] = RatFun::one();
        w
    }

    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn get(&self, i: usize) -> &RatFun {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RatFun::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        OmegaElement::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        OmegaElement::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        OmegaElement::new(self.coeffs.iter().map(RatFun::neg).collect())
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        OmegaElement::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Pairing with a derivation given by its basis coordinates.
    pub fn pair(&self, coords: &[RatFun]) -> RatFun {
        self.coeffs
            .iter()
            .zip(coords)
            .fold(RatFun::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    pub fn wedge(&self, other: &Self) -> TwoForm {
        let d = self.dim();
        TwoForm::from_fn(d, |i, j| {
            self.coeffs[i]
                .mul(&other.coeffs[j])
                .sub(&self.coeffs[j].mul(&other.coeffs[i]))
        })
    }

    pub fn render(&self, field: &FieldSpec) -> Vec<String> {
        self.coeffs.iter().map(|c| field.render(c)).collect()
    }
}

/// `Σ_{i<j} c_ij ωᵢ∧ωⱼ`, pairs stored in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoForm {
    dim: usize,
    coeffs: Vec<RatFun>,
}

impl TwoForm {
    pub fn zero(dim: usize) -> Self {
        TwoForm {
            dim,
            coeffs: vec![RatFun::zero(); dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Builds from the values on pairs `i < j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> RatFun) -> Self {
        let mut coeffs = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
        for i in 0..dim {
            for j in i + 1..dim {
                coeffs.push(f(i, j));
            }
        }
        TwoForm { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Evaluation on `(δᵢ, δⱼ)`; antisymmetric in `i, j`.
    pub fn get(&self, i: usize, j: usize) -> RatFun {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.coeffs[self.index(i, j)].clone(),
            Greater => self.coeffs[self.index(j, i)].neg(),
            Equal => RatFun::zero(),
        }
    }

    /// Coefficients on `i < j` in lexicographic order.
    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &RatFun)> + '_ {
        let d = self.dim;
        (0..d)
            .flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
            .zip(self.coeffs.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RatFun::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        TwoForm {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        TwoForm {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        TwoForm {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `((i, j), coefficient)` for the nonzero coefficients.
    pub fn render(&self, field: &FieldSpec) -> Vec<((usize, usize), String)> {
        self.pairs()
            .filter(|(_, c)| !c.is_zero())
            .map(|(ij, c)| (ij, field.render(c)))
            .collect()
    }
}

/// A derivation basis on a rational function field, closed under the bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffStructure {
    base: FieldSpec,
    basis: Vec<Derivation>,
    /// `c[i][j][q]` with `[δᵢ,δⱼ] = Σ_q c[i][j][q] δ_q`, stored for all `i, j`.
    constants: Vec<Vec<Vec<RatFun>>>,
}

pub fn build_structure(
    base: &FieldSpec,
    basis: Vec<Derivation>,
) -> Result<DiffStructure, DiffError> {
    if basis.is_empty() {
        return Err(DiffError::EmptyBasis);
    }
    let n = base.len();
    if let Some(b) = basis.iter().find(|b| b.len() != n) {
        return Err(DiffError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let d = basis.len();
    // columns are the basis derivations, so `coef * c = v` expresses v in the basis
    let coef = Matrix::from_fn(n, d, |k, i| basis[i].coeffs[k].clone());
    if coef.rank() < d {
        return Err(DiffError::NotIndependent);
    }
    let mut constants = vec![vec![vec![RatFun::zero(); d]; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let br = basis[i].bracket(&basis[j]);
            if br.is_zero() {
                continue;
            }
            let c = coef
                .solve(br.coeffs())
                .ok_or(DiffError::NotClosed { i, j, residual: br })?;
            constants[j][i] = c.iter().map(RatFun::neg).collect();
            constants[i][j] = c;
        }
    }
    Ok(DiffStructure {
        base: base.clone(),
        basis,
        constants,
    })
}

impl DiffStructure {
    /// The coordinate partials with respect to the named variables.
    pub fn coordinate(base: &FieldSpec, names: &[&str]) -> Result<Self, DiffError> {
        let basis = names
            .iter()
            .map(|v| Ok(Derivation::partial(base.len(), base.index_of(v)?)))
            .collect::<Result<Vec<_>, FieldError>>()?;
        build_structure(base, basis)
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    pub fn basis(&self) -> &[Derivation] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `c_ij^q`.
    pub fn structure_constant(&self, i: usize, j: usize, q: usize) -> &RatFun {
        &self.constants[i][j][q]
    }

    pub fn bracket_coords(&self, i: usize, j: usize) -> &[RatFun] {
        &self.constants[i][j]
    }

    pub fn is_commutative(&self) -> bool {
        self.constants
            .iter()
            .flatten()
            .flatten()
            .all(RatFun::is_zero)
    }

    pub fn apply(&self, i: usize, a: &RatFun) -> RatFun {
        self.basis[i].apply(a)
    }

    /// Entrywise `δᵢ` on a matrix.
    pub fn apply_matrix(&self, i: usize, m: &Matrix) -> Matrix {
        m.map(|a| self.basis[i].apply(a))
    }

    /// Derivation `Σ coords[k] δ_k`.
    pub fn derivation(&self, coords: &[RatFun]) -> Derivation {
        let n = self.base.len();
        coords
            .iter()
            .zip(&self.basis)
            .fold(Derivation::zero(n), |acc, (c, b)| acc.add(&b.scale(c)))
    }

    /// Basis coordinates of `v`, if it lies in the span.
    pub fn coordinates(&self, v: &Derivation) -> Option<Vec<RatFun>> {
        let coef = Matrix::from_fn(self.base.len(), self.dim(), |k, i| {
            self.basis[i].coeffs[k].clone()
        });
        coef.solve(v.coeffs())
    }

    /// `d a` with `(d a)ᵢ = δᵢ(a)`.
    pub fn d0(&self, a: &RatFun) -> OmegaElement {
        OmegaElement::new(self.basis.iter().map(|b| b.apply(a)).collect())
    }

    /// `(dω)ᵢⱼ = δᵢ(ωⱼ) − δⱼ(ωᵢ) − Σ_q c_ij^q ω_q`.
    pub fn d1(&self, w: &OmegaElement) -> TwoForm {
        TwoForm::from_fn(self.dim(), |i, j| {
            let mut v = self.apply(i, w.get(j)).sub(&self.apply(j, w.get(i)));
            for (q, c) in self.constants[i][j].iter().enumerate() {
                if !c.is_zero() {
                    v = v.sub(&c.mul(w.get(q)));
                }
            }
            v
        })
    }

    /// `L_{δ_k}(ω)`.
    pub fn lie_derivative(&self, k: usize, w: &OmegaElement) -> OmegaElement {
        let mut coords = vec![RatFun::zero(); self.dim()];
        coords[k] = RatFun::one();
        self.lie_derivative_general(&coords, w)
    }

    /// `L_D(ω) = d(ω(D)) + ι_D dω` for `D = Σ coords[k] δ_k`.
    pub fn lie_derivative_general(&self, coords: &[RatFun], w: &OmegaElement) -> OmegaElement {
        let dw = self.d1(w);
        let mut out = self.d0(&w.pair(coords));
        for (k, a) in coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let contraction = (0..self.dim()).map(|j| a.mul(&dw.get(k, j))).collect();
            out = out.add(&OmegaElement::new(contraction));
        }
        out
    }
}

/// A morphism of differential fields `φ: (R, D_R) → (S, D_S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffMorphism {
    source: DiffStructure,
    target: DiffStructure,
    images: Vec<RatFun>,
    /// `d_S × d_R`; column `i` is `φ_*(ωᵢ)` in the target dual basis.
    omega: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismVerdict {
    Ok,
    /// `d(φ(v)) − φ_*(dv)` for source variable `variable`.
    DCompatFail {
        variable: usize,
        residual: OmegaElement,
    },
    /// `d(φ_*ωᵢ) − φ_*(dωᵢ)` for source basis form `form`.
    IntegrabilityFail {
        form: usize,
        witness: TwoForm,
    },
}

impl MorphismVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, MorphismVerdict::Ok)
    }
}

impl DiffMorphism {
    pub fn new(
        source: DiffStructure,
        target: DiffStructure,
        images: Vec<RatFun>,
        omega: Matrix,
    ) -> Result<Self, DiffError> {
        if images.len() != source.base.len() {
            return Err(DiffError::Shape(format!(
                "{} images for {} source variables",
                images.len(),
                source.base.len()
            )));
        }
        if omega.shape() != (target.dim(), source.dim()) {
            return Err(DiffError::Shape(format!(
                "omega matrix is {}x{}, expected {}x{}",
                omega.rows(),
                omega.cols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(DiffMorphism {
            source,
            target,
            images,
            omega,
        })
    }

    pub fn identity(s: &DiffStructure) -> Self {
        DiffMorphism {
            source: s.clone(),
            target: s.clone(),
            images: (0..s.base.len()).map(RatFun::var).collect(),
            omega: Matrix::identity(s.dim()),
        }
    }

    pub fn source(&self) -> &DiffStructure {
        &self.source
    }

    pub fn target(&self) -> &DiffStructure {
        &self.target
    }

    pub fn images(&self) -> &[RatFun] {
        &self.images
    }

    pub fn omega_matrix(&self) -> &Matrix {
        &self.omega
    }

    fn assignment(&self) -> Vec<Option<RatFun>> {
        self.images.iter().cloned().map(Some).collect()
    }

    /// `φ(a)`.
    pub fn apply(&self, a: &RatFun) -> Result<RatFun, FieldError> {
        a.substitute(&self.assignment())
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Result<Matrix, FieldError> {
        let asg = self.assignment();
        m.try_map(|a| a.substitute(&asg))
    }

    /// `φ_*(ω)` for `ω` in the source dual basis.
    pub fn push_forward(&self, w: &OmegaElement) -> Result<OmegaElement, FieldError> {
        let img: Vec<RatFun> = w
            .coeffs()
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<_, _>>()?;
        Ok(OmegaElement::new(self.omega.mul_vec(&img)))
    }

    pub fn push_forward2(&self, w: &TwoForm) -> Result<TwoForm, FieldError> {
        let mut out = TwoForm::zero(self.target.dim());
        for ((a, b), c) in w.pairs() {
            if c.is_zero() {
                continue;
            }
            let wedge = self.column(a).wedge(&self.column(b));
            out = out.add(&wedge.scale(&self.apply(c)?));
        }
        Ok(out)
    }

    fn column(&self, i: usize) -> OmegaElement {
        OmegaElement::new(self.omega.column(i))
    }

    /// Structure map coefficients: `D_φ(∂_s) = Σᵢ bᵢ(∂_s) δᵢ` with
    /// `bᵢ(∂_s) = omega[s][i]`.
    pub fn structure_map(&self, s: usize) -> Vec<RatFun> {
        self.omega.row(s).to_vec()
    }

    pub fn check(&self) -> Result<MorphismVerdict, FieldError> {
        check_morphism(self)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &DiffMorphism) -> Result<DiffMorphism, DiffError> {
        compose(self, other)
    }
}

pub fn check_morphism(m: &DiffMorphism) -> Result<MorphismVerdict, FieldError> {
    let (src, tgt) = (&m.source, &m.target);
    for v in 0..src.base.len() {
        let lhs = tgt.d0(&m.images[v]);
        let rhs = m.push_forward(&src.d0(&RatFun::var(v)))?;
        let residual = lhs.sub(&rhs);
        if !residual.is_zero() {
            return Ok(MorphismVerdict::DCompatFail {
                variable: v,
                residual,
            });
        }
    }
    for i in 0..src.dim() {
        let lhs = tgt.d1(&m.column(i));
        let rhs = m.push_forward2(&src.d1(&OmegaElement::basis(src.dim(), i)))?;
        let witness = lhs.sub(&rhs);
        if !witness.is_zero() {
            return Ok(MorphismVerdict::IntegrabilityFail { form: i, witness });
        }
    }
    Ok(MorphismVerdict::Ok)
}

/// `psi ∘ phi`.
pub fn compose(phi: &DiffMorphism, psi: &DiffMorphism) -> Result<DiffMorphism, DiffError> {
    if phi.target.base != psi.source.base || phi.target.basis != psi.source.basis {
        return Err(DiffError::Shape("morphisms are not composable".into()));
    }
    let images = phi
        .images
        .iter()
        .map(|a| psi.apply(a))
        .collect::<Result<_, _>>()?;
    let omega = psi.omega.mul(&psi.apply_matrix(&phi.omega)?);
    DiffMorphism::new(phi.source.clone(), psi.target.clone(), images, omega)
}

/// A fully commuting structure whose first `p` basis elements are the
/// principal directions (killing the constant variables) and whose last `q`
/// are parameter directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamStructure {
    full: DiffStructure,
    p: usize,
    q: usize,
    constants: Vec<usize>,
}

pub fn build_param_structure(
    base: &FieldSpec,
    principal: Vec<Derivation>,
    parameter: Vec<Derivation>,
    constant_variables: &[&str],
) -> Result<ParamStructure, DiffError> {
    let constants = constant_variables
        .iter()
        .map(|v| base.index_of(v))
        .collect::<Result<Vec<_>, _>>()?;
    let (p, q) = (principal.len(), parameter.len());
    let basis: Vec<Derivation> = principal.into_iter().chain(parameter).collect();
    if basis.is_empty() {
        return Err(DiffError::EmptyBasis);
    }
    let full = match build_structure(base, basis) {
        Ok(s) => s,
        Err(DiffError::NotClosed { i, j, .. }) => return Err(DiffError::NotCommuting { i, j }),
        Err(e) => return Err(e),
    };
    for i in 0..full.dim() {
        for j in i + 1..full.dim() {
            if full.bracket_coords(i, j).iter().any(|c| !c.is_zero()) {
                return Err(DiffError::NotCommuting { i, j });
            }
        }
    }
    for (i, b) in full.basis[..p].iter().enumerate() {
        if let Some(&c) = constants.iter().find(|&&c| !b.coeffs[c].is_zero()) {
            return Err(DiffError::PrincipalMovesConstants {
                derivation: i,
                variable: base.variables()[c].clone(),
            });
        }
    }
    // the structure map restricted to the splitting must be injective
    let restricted = Matrix::from_fn(q, constants.len(), |j, c| {
        full.basis[p + j].coeffs[constants[c]].clone()
    });
    if restricted.rank() < q {
        return Err(DiffError::DegenerateParameters);
    }
    Ok(ParamStructure {
        full,
        p,
        q,
        constants,
    })
}

impl ParamStructure {
    /// Coordinate partials: principal and parameter variables by name, with
    /// the parameter variables as constants.
    pub fn coordinate(
        base: &FieldSpec,
        principal: &[&str],
        parameter: &[&str],
    ) -> Result<Self, DiffError> {
        let part = |names: &[&str]| {
            names
                .iter()
                .map(|v| Ok(Derivation::partial(base.len(), base.index_of(v)?)))
                .collect::<Result<Vec<_>, FieldError>>()
        };
        build_param_structure(base, part(principal)?, part(parameter)?, parameter)
    }

    pub fn full(&self) -> &DiffStructure {
        &self.full
    }

    pub fn base(&self) -> &FieldSpec {
        &self.full.base
    }

    pub fn principal_count(&self) -> usize {
        self.p
    }

    pub fn parameter_count(&self) -> usize {
        self.q
    }

    pub fn constant_variables(&self) -> &[usize] {
        &self.constants
    }

    pub fn principal(&self, i: usize) -> &Derivation {
        &self.full.basis[i]
    }

    pub fn parameter(&self, j: usize) -> &Derivation {
        &self.full.basis[self.p + j]
    }

    /// The relative structure `D_{K/k}` spanned by the principal directions.
    pub fn relative(&self) -> DiffStructure {
        let d = self.p;
        DiffStructure {
            base: self.full.base.clone(),
            basis: self.full.basis[..d].to_vec(),
            constants: vec![vec![vec![RatFun::zero(); d]; d]; d],
        }
    }

    /// True iff every principal derivation kills `a`, i.e. `a ∈ k`.
    pub fn is_constant(&self, a: &RatFun) -> bool {
        self.full.basis[..self.p]
            .iter()
            .all(|b| b.apply(a).is_zero())
    }
}
