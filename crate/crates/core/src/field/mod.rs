//! Exact arithmetic in multivariate rational function fields ℚ(v₁,…,v_N).

mod gcd;
mod heu;
mod parse;
mod poly;
mod ratfun;

pub use gcd::{content, gcd, lcm, pseudo_remainder};
pub use parse::ParseError;
pub use poly::{Monomial, MultiPoly};
pub use ratfun::RatFun;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("denominator vanishes under substitution")]
    DenominatorVanishes,
    #[error("no image assigned to variable #{0}")]
    MissingAssignment(usize),
}

/// The ordered variable list of a rational function field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    variables: Vec<String>,
}

impl FieldSpec {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, FieldError> {
        let mut variables: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let valid = n
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(FieldError::InvalidVariable(n.to_string()));
            }
            if variables.iter().any(|v| v == n) {
                return Err(FieldError::DuplicateVariable(n.to_string()));
            }
            variables.push(n.to_string());
        }
        Ok(FieldSpec { variables })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, FieldError> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| FieldError::UnknownVariable(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<RatFun, FieldError> {
        Ok(RatFun::var(self.index_of(name)?))
    }

    /// `∂x/∂name`.
    pub fn partial_derivative(&self, x: &RatFun, name: &str) -> Result<RatFun, FieldError> {
        Ok(x.partial(self.index_of(name)?))
    }

    /// Canonical interchange text, e.g. `(-1*t)/(x^2)`.
    pub fn render(&self, x: &RatFun) -> String {
        x.render(&self.variables)
    }

    pub fn parse(&self, text: &str) -> Result<RatFun, ParseError> {
        parse::parse_ratfun(text, self)
    }

    /// Builds the substitution table for [`RatFun::substitute`] from a
    /// name-keyed partial assignment. Images live in the target field.
    pub fn assignment<'a, I>(&self, pairs: I) -> Result<Vec<Option<RatFun>>, FieldError>
    where
        I: IntoIterator<Item = (&'a str, RatFun)>,
    {
        let mut out = vec![None; self.len()];
        for (name, img) in pairs {
            out[self.index_of(name)?] = Some(img);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xt() -> FieldSpec {
        FieldSpec::new(&["x", "t"]).unwrap()
    }

    #[test]
    fn field_spec_rejects_duplicates_and_empty_names() {
        assert_eq!(
            FieldSpec::new(&["x", "x"]),
            Err(FieldError::DuplicateVariable("x".into()))
        );
        assert!(matches!(
            FieldSpec::new(&[""]),
            Err(FieldError::InvalidVariable(_))
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let f = xt();
        let p = |s: &str| f.parse(s).unwrap();
        assert_eq!(&p("1/x") + &p("1/x"), p("2/x"));
        assert_eq!(p("x^2-t^2").div(&p("x-t")).unwrap(), p("x+t"));
        assert_eq!(&p("t/x") * &p("x/t"), RatFun::one());
        assert_eq!(p("x").div(&RatFun::zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn derivative_examples() {
        let f = xt();
        let p = |s: &str| f.parse(s).unwrap();
        assert_eq!(f.partial_derivative(&p("t/x"), "x").unwrap(), p("-t/x^2"));
        assert_eq!(f.partial_derivative(&p("t/x"), "t").unwrap(), p("1/x"));
        assert_eq!(
            f.partial_derivative(&p("x"), "y"),
            Err(FieldError::UnknownVariable("y".into()))
        );
        let g = FieldSpec::new(&["x", "y"]).unwrap();
        assert!(g
            .partial_derivative(&g.parse("x").unwrap(), "y")
            .unwrap()
            .is_zero());
    }

    #[test]
    fn substitution_examples() {
        let f = FieldSpec::new(&["x", "y", "z"]).unwrap();
        let target = FieldSpec::new(&["x", "y"]).unwrap();
        let a = f
            .assignment([
                ("x", target.var("x").unwrap()),
                ("y", target.var("y").unwrap()),
                ("z", RatFun::zero()),
            ])
            .unwrap();
        let e = f.parse("x+z").unwrap();
        assert_eq!(e.substitute(&a).unwrap(), target.var("x").unwrap());
        let pole = f.parse("1/z").unwrap();
        assert_eq!(pole.substitute(&a), Err(FieldError::DenominatorVanishes));

        let g = xt();
        let sq = g
            .assignment([("x", g.parse("x^2").unwrap()), ("t", g.var("t").unwrap())])
            .unwrap();
        assert_eq!(
            g.parse("t/x").unwrap().substitute(&sq).unwrap(),
            g.parse("t/x^2").unwrap()
        );
    }

    #[test]
    fn canonical_rendering() {
        let f = xt();
        let d = f.partial_derivative(&f.parse("t/x").unwrap(), "x").unwrap();
        assert_eq!(f.render(&d), "(-1*t)/(x^2)");
        assert_eq!(f.render(&RatFun::zero()), "(0)/(1)");
        let r = f.parse("(3*x+1)/(2*t)").unwrap();
        assert_eq!(f.render(&r), "(3/2*x+1/2)/(t)");
        assert_eq!(f.parse(&f.render(&r)).unwrap(), r);
    }
}
