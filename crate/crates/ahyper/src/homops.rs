//! Horn θ-operators and annihilation checking on Puiseux series.
//!
//! An operator is a sum of terms `z^m · P(θ_1, …, θ_d)` where the θ-polynomial
//! acts first (diagonally, with offset-aware eigenvalues) and the monomial
//! multiplies afterwards — the standard Horn form and the convention of all
//! the operator tables handled here. Coefficients of P are polynomials in the
//! family parameter r over the Gaussian rationals.
//!
//! Operators are written in a small expression grammar over the tokens
//! `theta(var)`, `r`, `i`, rational literals, variable monomials, `+ - * ^`
//! and parentheses; juxtaposition multiplies, so table expressions like
//! `x(2theta(x)-theta(y)+1-r)(2theta(x)-theta(y)+2-r)` parse as printed.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::pseries::{PuiseuxSeries, SeriesError};
use crate::scalars::{Gaussian, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character `{0}` at byte {1}")]
    BadChar(char, usize),
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("unexpected end of input")]
    Eof,
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("expression is not an operator polynomial: {0}")]
    NotOperator(String),
    #[error("negative or huge exponent")]
    BadExponent,
}

/// Polynomial in the parameter r over the Gaussian rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RPoly {
    coeffs: Vec<Gaussian>,
}

impl RPoly {
    pub fn zero() -> Self {
        RPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Gaussian) -> Self {
        let mut p = RPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    /// a + b·r
    pub fn linear(a: Gaussian, b: Gaussian) -> Self {
        let mut p = RPoly { coeffs: vec![a, b] };
        p.trim();
        p
    }

    pub fn r() -> Self {
        RPoly::linear(Gaussian::zero(), Gaussian::one())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Gaussian::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(Gaussian::zero);
            let b = other.coeffs.get(k).cloned().unwrap_or_else(Gaussian::zero);
            coeffs.push(a + b);
        }
        let mut p = RPoly { coeffs };
        p.trim();
        p
    }

    pub fn neg(&self) -> Self {
        RPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RPoly::zero();
        }
        let mut coeffs = vec![Gaussian::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = a * b;
                coeffs[i + j] += &prod;
            }
        }
        let mut p = RPoly { coeffs };
        p.trim();
        p
    }

    pub fn eval(&self, r: &Rat) -> Gaussian {
        let mut acc = Gaussian::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(r) + c.clone();
        }
        acc
    }
}

/// Polynomial in θ_1..θ_d with [`RPoly`] coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaPoly {
    pub terms: BTreeMap<Vec<u32>, RPoly>,
}

impl ThetaPoly {
    /// Evaluate at a rational eigenvalue vector after instantiating r.
    fn eval(&self, r: &Rat, q: &[Rat]) -> Gaussian {
        let mut acc = Gaussian::zero();
        for (alpha, rp) in &self.terms {
            let c = rp.eval(r);
            if c.is_zero() {
                continue;
            }
            let mut m = Rat::one();
            for (j, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    m *= &q[j];
                }
            }
            acc += &c.scale(&m);
        }
        acc
    }
}

/// Sum of (z-monomial, θ-polynomial) terms, the θ-polynomial acting first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaOperator {
    nvars: usize,
    terms: Vec<(Vec<i64>, ThetaPoly)>,
    source: String,
}

impl ThetaOperator {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Grid weight of the largest monomial shift among the terms: the number
    /// of valid leading orders the operator consumes.
    pub fn degree_shift(&self, ram: &[u32]) -> i64 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().zip(ram).map(|(&e, &k)| e * k as i64).sum())
            .max()
            .unwrap_or(0)
    }

    /// Apply at a fixed rational r: θ-polynomials act diagonally with
    /// offset-aware eigenvalues, monomials shift; the output order drops by
    /// the degree shift.
    pub fn apply(&self, s: &PuiseuxSeries, r: &Rat) -> PuiseuxSeries {
        let ram = s.grid().ram().to_vec();
        let shift = self.degree_shift(&ram);
        let order = s.order() - shift;
        let mut acc = PuiseuxSeries::zero(s.grid().clone(), order).with_offset(s.offset().to_vec());
        for (mono, poly) in &self.terms {
            let key_shift: Vec<i64> =
                mono.iter().zip(&ram).map(|(&e, &k)| e * k as i64).collect();
            let terms: Vec<(Vec<i64>, Gaussian)> = s
                .terms()
                .map(|(m, c)| {
                    let q: Vec<Rat> = (0..s.nvars())
                        .map(|j| {
                            &s.offset()[j]
                                + Rat::new(m.0[j].into(), (ram[j] as i64).into())
                        })
                        .collect();
                    let scale = poly.eval(r, &q);
                    let key: Vec<i64> =
                        m.0.iter().zip(&key_shift).map(|(&e, &d)| e + d).collect();
                    (key, c * &scale)
                })
                .filter(|(_, c)| !c.is_zero())
                .collect();
            let part =
                PuiseuxSeries::from_terms(s.grid().clone(), s.offset().to_vec(), order, terms);
            acc = acc.add(&part);
        }
        acc
    }

    /// Check that the operator annihilates the series at parameter r.
    pub fn annihilation_check(
        &self,
        s: &PuiseuxSeries,
        r: &Rat,
    ) -> Result<AnnihilationOutcome, SeriesError> {
        let shift = self.degree_shift(s.grid().ram());
        if s.order() <= shift {
            return Err(SeriesError::InsufficientOrder { available: s.order(), needed: shift });
        }
        let res = self.apply(s, r);
        match res.first_nonzero() {
            None => Ok(AnnihilationOutcome::Verified { order: res.order() }),
            Some((exponents, coefficient)) => {
                Ok(AnnihilationOutcome::Failed { exponents, coefficient })
            }
        }
    }
}

/// Result of an annihilation check: the maximal verified order, or the first
/// nonzero residual monomial with its coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnihilationOutcome {
    Verified { order: i64 },
    Failed { exponents: Vec<Rat>, coefficient: Gaussian },
}

impl AnnihilationOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, AnnihilationOutcome::Verified { .. })
    }
}

impl fmt::Display for AnnihilationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnihilationOutcome::Verified { order } => write!(f, "annihilated to order {order}"),
            AnnihilationOutcome::Failed { exponents, coefficient } => write!(
                f,
                "residual at z^({}) = {}",
                crate::pseries::fmt_exponents(exponents),
                coefficient
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// expression grammar (shared with family files)

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Num(Rat),
    Ident(String),
    LPar,
    RPar,
    Plus,
    Minus,
    Star,
    Caret,
    Comma,
    Semi,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push(Token::LPar);
                i += 1;
            }
            ')' => {
                out.push(Token::RPar);
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            ';' => {
                out.push(Token::Semi);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let num: String = bytes[start..i].iter().collect();
                // rational literal p/q
                if i + 1 < bytes.len() && bytes[i] == '/' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    let dstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let den: String = bytes[dstart..i].iter().collect();
                    out.push(Token::Num(Rat::new(
                        num.parse().expect("digits"),
                        den.parse().expect("digits"),
                    )));
                } else {
                    out.push(Token::Num(Rat::new(num.parse().expect("digits"), 1.into())));
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(ParseError::BadChar(other, i)),
        }
    }
    Ok(out)
}

/// Syntax tree of the shared expression grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rat),
    Var(String),
    Call(String, Vec<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Names that parse as function calls; every other identifier followed by a
/// parenthesis is a juxtaposed product like `x(theta(x)+r)`.
const FUNCTIONS: &[&str] = &["theta", "sqrt", "pow", "inv", "divmono"];

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { tokens: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Token) -> Result<(), ParseError> {
        match self.next() {
            Some(got) if &got == t => Ok(()),
            Some(got) => Err(ParseError::Unexpected(format!("{got:?}"))),
            None => Err(ParseError::Eof),
        }
    }

    pub fn parse_full(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        match self.peek() {
            None => Ok(e),
            Some(t) => Err(ParseError::Unexpected(format!("{t:?}"))),
        }
    }

    /// Parse one expression and return it with the remaining parser state
    /// (used by argument lists in family files).
    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.next();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                // juxtaposition: `x (θ…)(θ…)`, `2 r`
                Some(Token::Num(_)) | Some(Token::Ident(_)) | Some(Token::LPar) => {
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let mut base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            let neg = if let Some(Token::Minus) = self.peek() {
                self.next();
                true
            } else {
                false
            };
            match self.next() {
                Some(Token::Num(n)) if n.denom().is_one() => {
                    let k: i64 =
                        i64::try_from(n.numer().clone()).map_err(|_| ParseError::BadExponent)?;
                    base = Expr::Pow(Box::new(base), if neg { -k } else { k });
                }
                _ => return Err(ParseError::BadExponent),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Expr::Num(n)),
            Some(Token::Ident(name)) => {
                if FUNCTIONS.contains(&name.as_str()) && self.peek() == Some(&Token::LPar) {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek() == Some(&Token::RPar) {
                        self.next();
                        return Ok(Expr::Call(name, args));
                    }
                    loop {
                        args.push(self.expr()?);
                        match self.next() {
                            Some(Token::RPar) => break,
                            Some(Token::Comma) | Some(Token::Semi) => continue,
                            Some(t) => return Err(ParseError::Unexpected(format!("{t:?}"))),
                            None => return Err(ParseError::Eof),
                        }
                    }
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Token::LPar) => {
                let e = self.expr()?;
                self.expect(&Token::RPar)?;
                Ok(e)
            }
            Some(t) => Err(ParseError::Unexpected(format!("{t:?}"))),
            None => Err(ParseError::Eof),
        }
    }
}

/// Flat commutative polynomial over the symbols z-monomial × θ-monomial × r,
/// the normal form for operator expressions before ordering is applied.
#[derive(Debug, Clone, Default)]
struct PolyBag {
    // (z exponents, θ exponents, r power) -> coefficient
    terms: BTreeMap<(Vec<i64>, Vec<u32>, u32), Gaussian>,
}

impl PolyBag {
    fn constant(d: usize, c: Gaussian) -> Self {
        let mut bag = PolyBag::default();
        if !c.is_zero() {
            bag.terms.insert((vec![0; d], vec![0; d], 0), c);
        }
        bag
    }

    fn add_term(&mut self, key: (Vec<i64>, Vec<u32>, u32), c: Gaussian) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Gaussian::zero);
        *entry += &c;
        if entry.is_zero() {
            let key2 = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key2 {
                self.terms.remove(&k);
            }
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        PolyBag { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = PolyBag::default();
        for ((za, ta, ra), ca) in &self.terms {
            for ((zb, tb, rb), cb) in &other.terms {
                let z: Vec<i64> = za.iter().zip(zb).map(|(&a, &b)| a + b).collect();
                let t: Vec<u32> = ta.iter().zip(tb).map(|(&a, &b)| a + b).collect();
                out.add_term((z, t, ra + rb), ca * cb);
            }
        }
        out
    }
}

fn expr_to_bag(e: &Expr, vars: &[String]) -> Result<PolyBag, ParseError> {
    let d = vars.len();
    match e {
        Expr::Num(n) => Ok(PolyBag::constant(d, Gaussian::from_rat(n.clone()))),
        Expr::Var(name) => match name.as_str() {
            "r" => {
                let mut bag = PolyBag::default();
                bag.add_term((vec![0; d], vec![0; d], 1), Gaussian::one());
                Ok(bag)
            }
            "i" => Ok(PolyBag::constant(d, Gaussian::i())),
            v => {
                let j = var_index(v, vars)?;
                let mut z = vec![0i64; d];
                z[j] = 1;
                let mut bag = PolyBag::default();
                bag.add_term((z, vec![0; d], 0), Gaussian::one());
                Ok(bag)
            }
        },
        Expr::Call(name, args) if name == "theta" && args.len() == 1 => {
            let Expr::Var(v) = &args[0] else {
                return Err(ParseError::NotOperator("theta() needs a variable".into()));
            };
            let j = var_index(v, vars)?;
            let mut t = vec![0u32; d];
            t[j] = 1;
            let mut bag = PolyBag::default();
            bag.add_term((vec![0; d], t, 0), Gaussian::one());
            Ok(bag)
        }
        Expr::Call(name, _) => Err(ParseError::NotOperator(format!("call `{name}`"))),
        Expr::Add(a, b) => Ok(expr_to_bag(a, vars)?.add(&expr_to_bag(b, vars)?)),
        Expr::Sub(a, b) => Ok(expr_to_bag(a, vars)?.add(&expr_to_bag(b, vars)?.neg())),
        Expr::Mul(a, b) => Ok(expr_to_bag(a, vars)?.mul(&expr_to_bag(b, vars)?)),
        Expr::Neg(a) => Ok(expr_to_bag(a, vars)?.neg()),
        Expr::Pow(a, k) => {
            if *k < 0 {
                return Err(ParseError::BadExponent);
            }
            let base = expr_to_bag(a, vars)?;
            let mut acc = PolyBag::constant(vars.len(), Gaussian::one());
            for _ in 0..*k {
                acc = acc.mul(&base);
            }
            Ok(acc)
        }
    }
}

pub fn var_index(name: &str, vars: &[String]) -> Result<usize, ParseError> {
    vars.iter()
        .position(|v| v == name)
        .ok_or_else(|| ParseError::UnknownVar(name.to_string()))
}

/// Parse an operator expression into normal form. The fixed convention: in
/// every term the θ-polynomial acts first, then the z-monomial multiplies.
pub fn parse_operator(src: &str, vars: &[String]) -> Result<ThetaOperator, ParseError> {
    let expr = Parser::new(src)?.parse_full()?;
    let bag = expr_to_bag(&expr, vars)?;
    let d = vars.len();
    // group by z-monomial
    let mut groups: BTreeMap<Vec<i64>, BTreeMap<Vec<u32>, RPoly>> = BTreeMap::new();
    for ((z, t, rp), c) in &bag.terms {
        if z.iter().any(|&e| e < 0) {
            return Err(ParseError::NotOperator("negative monomial exponent".into()));
        }
        let theta_terms = groups.entry(z.clone()).or_default();
        let mut mono = vec![Gaussian::zero(); *rp as usize + 1];
        mono[*rp as usize] = c.clone();
        let add = RPoly { coeffs: mono };
        let slot = theta_terms.entry(t.clone()).or_insert_with(RPoly::zero);
        *slot = slot.add(&add);
    }
    let terms: Vec<(Vec<i64>, ThetaPoly)> = groups
        .into_iter()
        .map(|(z, t)| {
            (
                z,
                ThetaPoly {
                    terms: t.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
                },
            )
        })
        .filter(|(_, p)| !p.terms.is_empty())
        .collect();
    Ok(ThetaOperator { nvars: d, terms, source: src.to_string() })
}

/// Parse a polynomial in r (and i) only — used for solution coefficients.
pub fn parse_rpoly(src: &str) -> Result<RPoly, ParseError> {
    let expr = Parser::new(src)?.parse_full()?;
    let bag = expr_to_bag(&expr, &[])?;
    let mut out = RPoly::zero();
    for ((_, _, rp), c) in &bag.terms {
        let mut mono = vec![Gaussian::zero(); *rp as usize + 1];
        mono[*rp as usize] = c.clone();
        out = out.add(&RPoly { coeffs: mono });
    }
    Ok(out)
}

pub fn default_var_names(d: usize) -> Vec<String> {
    match d {
        1 => vec!["z".into()],
        2 => vec!["x".into(), "y".into()],
        _ => (1..=d).map(|j| format!("z{j}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseries::{Branch, ExponentGrid};
    use crate::scalars::{rat, rint};

    fn vars2() -> Vec<String> {
        default_var_names(2)
    }

    fn table2_op1() -> ThetaOperator {
        parse_operator(
            "theta(x)(theta(x) - 1/2) - x(theta(x)+theta(y)+r)(theta(x)+theta(y)+r+1/2)",
            &vars2(),
        )
        .unwrap()
    }

    #[test]
    fn operator_shape() {
        let op = table2_op1();
        assert_eq!(op.nvars(), 2);
        // grid weight of the x shift on a ram-2 grid
        assert_eq!(op.degree_shift(&[2, 2]), 2);
    }

    #[test]
    fn constant_series_killed_at_r_zero() {
        let grid = ExponentGrid::uniform(2, 2);
        let one = PuiseuxSeries::one(grid, 8);
        let res = table2_op1().apply(&one, &Rat::zero());
        assert!(res.is_zero());
    }

    #[test]
    fn g3_operators_annihilate_puiseux_monomial() {
        let vars = vars2();
        let op1 = parse_operator(
            "theta(x)(-theta(x)+2theta(y)+r) - x(2theta(x)-theta(y)-r+1)(2theta(x)-theta(y)-r+2)",
            &vars,
        )
        .unwrap();
        let op2 = parse_operator(
            "theta(y)(2theta(x)-theta(y)+1-r) - y(-theta(x)+2theta(y)+r)(-theta(x)+2theta(y)+r+1)",
            &vars,
        )
        .unwrap();
        let r = rat(1, 3);
        // x^{(r-2)/3} y^{-(r+1)/3}
        let grid = ExponentGrid::uniform(2, 1);
        let m = PuiseuxSeries::one(grid, 8)
            .with_offset(vec![(&r - rint(2)) / rint(3), -(&r + rint(1)) / rint(3)]);
        for op in [&op1, &op2] {
            let out = op.annihilation_check(&m, &r).unwrap();
            assert!(out.is_verified(), "{}", out);
        }
    }

    #[test]
    fn theta_only_operator_on_sqrt_x() {
        let grid = ExponentGrid::uniform(2, 2);
        let op = parse_operator("theta(x)", &vars2()).unwrap();
        let sx = PuiseuxSeries::monomial(grid, vec![1, 0], Gaussian::one(), 8);
        let out = op.apply(&sx, &rat(1, 3));
        assert_eq!(out.coeff(&[1, 0]), Gaussian::from_rat(rat(1, 2)));
        assert_eq!(out.order(), 8);
    }

    #[test]
    fn linearity_on_random_pairs() {
        let grid = ExponentGrid::uniform(2, 2);
        let op = table2_op1();
        let r = rat(2, 5);
        let lambda = Gaussian::new(rat(3, 7), rat(-1, 2));
        let a = PuiseuxSeries::one(grid.clone(), 6)
            .add(&PuiseuxSeries::monomial(grid.clone(), vec![1, 2], Gaussian::i(), 6));
        let b = PuiseuxSeries::monomial(grid.clone(), vec![2, 0], Gaussian::from_i64(3), 6)
            .add(&PuiseuxSeries::monomial(grid, vec![0, 1], Gaussian::one(), 6));
        let lhs = op.apply(&a.add(&b.scale(&lambda)), &r);
        let rhs = op.apply(&a, &r).add(&op.apply(&b, &r).scale(&lambda));
        assert!(lhs.first_mismatch(&rhs).is_none());
    }

    #[test]
    fn failure_certificate_on_non_solution() {
        let grid = ExponentGrid::uniform(2, 2);
        let x = PuiseuxSeries::monomial(grid.clone(), vec![2, 0], Gaussian::one(), 8);
        let s = PuiseuxSeries::one(grid, 8).add(&x);
        let out = table2_op1().annihilation_check(&s, &rat(1, 3)).unwrap();
        match out {
            AnnihilationOutcome::Failed { exponents, coefficient } => {
                assert_eq!(exponents, vec![rint(1), rint(0)]);
                assert_eq!(coefficient, Gaussian::from_rat(rat(2, 9)));
            }
            other => panic!("expected failure, got {other}"),
        }
    }

    #[test]
    fn insufficient_order_detected() {
        let grid = ExponentGrid::uniform(2, 2);
        let one = PuiseuxSeries::one(grid, 2);
        assert!(matches!(
            table2_op1().annihilation_check(&one, &rat(1, 3)),
            Err(SeriesError::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn rpoly_parse_and_eval() {
        let p = parse_rpoly("2r(2r+1)").unwrap();
        assert_eq!(p.eval(&rat(1, 3)), Gaussian::from_rat(rat(10, 9)));
        let q = parse_rpoly("-2 i r").unwrap();
        assert_eq!(q.eval(&rat(1, 2)), Gaussian::new(Rat::zero(), rint(-1)));
    }

    #[test]
    fn sqrt_branch_interplay() {
        // θ_x (√x·u) where u = (1-x)^{1/2}: eigenvalues include the offset ½
        let grid = ExponentGrid::uniform(1, 2);
        let x = PuiseuxSeries::monomial(grid.clone(), vec![2], Gaussian::one(), 9);
        let u = PuiseuxSeries::one(grid.clone(), 9).sub(&x).sqrt(Branch::Plus).unwrap();
        let sx = PuiseuxSeries::monomial(grid, vec![1], Gaussian::one(), 9);
        let vars = vec!["x".to_string()];
        let op = parse_operator("theta(x)", &vars).unwrap();
        let applied = op.apply(&sx.mul(&u), &Rat::zero());
        // leading term ½√x
        let (e, c) = applied.first_nonzero().unwrap();
        assert_eq!(e, vec![rat(1, 2)]);
        assert_eq!(c, Gaussian::from_rat(rat(1, 2)));
    }
}
