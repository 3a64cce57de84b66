//! Recipe ASTs for the algebraic closed forms, algebraic-root series solving,
//! and the family registry.
//!
//! Each registry entry carries the full A-hypergeometric data of one family
//! (point configuration, β(r), lattice generators, triangulation, γ-vectors,
//! Horn operators, solution coefficients) together with recipes for its
//! closed form. Square roots in recipes carry declared branch slots; grid
//! variables can carry root-orientation slots (√x ↦ −√x). The verifier
//! searches the ≤ 2^k assignments and reports which one validates.

use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::geometry::{simplex_volume, IMat, IVec, LatticeBasis, PointConfig, Triangulation};
use crate::homops::{parse_operator, RPoly, ThetaOperator};
use crate::pseries::{Branch, ExponentGrid, PuiseuxSeries, SeriesError};
use crate::scalars::{rat, rint, Gaussian, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("seed {0} is not a root of the constant-term polynomial")]
    SeedNotRoot(String),
    #[error("root is ramified (Newton stalls) and no ramification hint was given")]
    RamificationRequired,
    #[error("root iteration stalled before reaching the target order")]
    RootStalled,
    #[error("branch slot {0} not covered by the assignment")]
    MissingSlot(usize),
}

/// Affine function of r: `a + b·r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffR {
    pub a: Rat,
    pub b: Rat,
}

impl AffR {
    pub fn new(a: Rat, b: Rat) -> Self {
        AffR { a, b }
    }

    pub fn constant(a: Rat) -> Self {
        AffR { a, b: Rat::zero() }
    }

    pub fn r() -> Self {
        AffR { a: Rat::zero(), b: Rat::one() }
    }

    pub fn eval(&self, r: &Rat) -> Rat {
        &self.a + &self.b * r
    }

    pub fn scale(&self, c: &Rat) -> Self {
        AffR { a: &self.a * c, b: &self.b * c }
    }

    pub fn add(&self, o: &Self) -> Self {
        AffR { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl fmt::Display for AffR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", crate::scalars::fmt_rat(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}r", crate::scalars::fmt_rat(&self.b));
        }
        write!(
            f,
            "{}{:+}r",
            crate::scalars::fmt_rat(&self.a),
            self.b
        )
    }
}

/// Branch slot declaration: a square-root sign or a grid-root orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    /// Sign of a square root relative to the canonical root.
    SqrtSign,
    /// Orientation of the grid root of variable j: Minus evaluates the
    /// variable's root monomial with a −1 coefficient.
    VarTwist(usize),
}

/// Closed-form recipe AST. Evaluation at fixed r and a branch assignment is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    Const(Gaussian),
    /// The grid unit monomial of variable j (z_j^{1/k_j}), subject to twists.
    VarRoot(usize),
    Add(Vec<Recipe>),
    Mul(Vec<Recipe>),
    Neg(Box<Recipe>),
    Inv(Box<Recipe>),
    /// Base raised to an affine-in-r rational exponent.
    PowRat(Box<Recipe>, AffR),
    /// Square root with a declared branch slot.
    Sqrt(Box<Recipe>, usize),
    /// Exact division by the monomial z^m; failure is the verdict.
    DivMonomialStrict(Box<Recipe>, Vec<Rat>),
    /// Series root of Σ coeffs[k]·f^k = 0 with f(0) = seed.
    AlgRoot {
        coeffs: Vec<Recipe>,
        seed: Gaussian,
        ram_hint: Option<Vec<u32>>,
        slot: Option<usize>,
    },
}

/// Evaluation context: family grid, truncation order, parameter r, and the
/// branch assignment for the declared slots.
pub struct EvalCtx<'a> {
    pub grid: &'a ExponentGrid,
    pub order: i64,
    pub r: &'a Rat,
    pub slots: &'a [SlotSpec],
    pub assignment: &'a [Branch],
}

impl<'a> EvalCtx<'a> {
    fn branch(&self, slot: usize) -> Result<Branch, EvalError> {
        self.assignment.get(slot).copied().ok_or(EvalError::MissingSlot(slot))
    }

    fn var_sign(&self, j: usize) -> Gaussian {
        let mut neg = false;
        for (spec, b) in self.slots.iter().zip(self.assignment) {
            if spec.kind == SlotKind::VarTwist(j) && *b == Branch::Minus {
                neg = !neg;
            }
        }
        if neg {
            Gaussian::from_i64(-1)
        } else {
            Gaussian::one()
        }
    }
}

/// Exact truncated expansion of a closed-form recipe.
pub fn eval_recipe(rec: &Recipe, ctx: &EvalCtx) -> Result<PuiseuxSeries, EvalError> {
    match rec {
        Recipe::Const(c) => Ok(PuiseuxSeries::constant(ctx.grid.clone(), c.clone(), ctx.order)),
        Recipe::VarRoot(j) => {
            let mut key = vec![0i64; ctx.grid.nvars()];
            key[*j] = 1;
            Ok(PuiseuxSeries::monomial(ctx.grid.clone(), key, ctx.var_sign(*j), ctx.order))
        }
        Recipe::Add(parts) => {
            let mut acc = PuiseuxSeries::zero(ctx.grid.clone(), ctx.order);
            for p in parts {
                acc = acc.add(&eval_recipe(p, ctx)?);
            }
            Ok(acc)
        }
        Recipe::Mul(parts) => {
            let mut acc = PuiseuxSeries::one(ctx.grid.clone(), ctx.order);
            for p in parts {
                acc = acc.mul(&eval_recipe(p, ctx)?);
            }
            Ok(acc)
        }
        Recipe::Neg(inner) => Ok(eval_recipe(inner, ctx)?.neg()),
        Recipe::Inv(inner) => Ok(eval_recipe(inner, ctx)?.invert()?),
        Recipe::PowRat(inner, alpha) => {
            let base = eval_recipe(inner, ctx)?;
            Ok(base.pow_rational(&alpha.eval(ctx.r), Branch::Plus)?)
        }
        Recipe::Sqrt(inner, slot) => {
            let base = eval_recipe(inner, ctx)?;
            Ok(base.sqrt(ctx.branch(*slot)?)?)
        }
        Recipe::DivMonomialStrict(inner, m) => {
            let base = eval_recipe(inner, ctx)?;
            Ok(base.monomial_div_strict(m)?)
        }
        Recipe::AlgRoot { coeffs, seed, ram_hint, slot } => {
            let cs: Vec<PuiseuxSeries> =
                coeffs.iter().map(|c| eval_recipe(c, ctx)).collect::<Result<_, _>>()?;
            let branch = match slot {
                Some(s) => ctx.branch(*s)?,
                None => Branch::Plus,
            };
            algebraic_root(&cs, seed, ram_hint.as_deref(), branch)
        }
    }
}

fn poly_eval(coeffs: &[PuiseuxSeries], f: &PuiseuxSeries) -> PuiseuxSeries {
    let mut acc = coeffs.last().expect("nonempty polynomial").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(f).add(c);
    }
    acc
}

fn derivative_coeffs(coeffs: &[PuiseuxSeries]) -> Vec<PuiseuxSeries> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&Gaussian::from_i64(k as i64)))
        .collect()
}

/// Series root f of P(f) = Σ coeffs[k]·f^k = 0 with constant term `seed`.
///
/// When the seed is a simple root of the constant polynomial, Newton iteration
/// applies. When the Jacobian vanishes at the origin (a double root), the
/// ramification hint refines the grid and the root is produced by the
/// quadratic-closure iteration `h ← (−q₁ + √(q₁²−4Aq₀))/(2A)` with
/// `A = Σ_{k≥2} q_k h^{k−2}`, solving order by order; the square-root branch
/// is the declared slot.
pub fn algebraic_root(
    coeffs: &[PuiseuxSeries],
    seed: &Gaussian,
    ram_hint: Option<&[u32]>,
    branch: Branch,
) -> Result<PuiseuxSeries, EvalError> {
    assert!(coeffs.len() >= 2, "polynomial must have positive degree");
    let grid = coeffs[0].grid().clone();
    let order = coeffs.iter().map(|c| c.order()).min().unwrap();
    let f0 = PuiseuxSeries::constant(grid.clone(), seed.clone(), order);
    let residual0 = poly_eval(coeffs, &f0);
    if !residual0.coeff(&vec![0; grid.nvars()]).is_zero() {
        return Err(EvalError::SeedNotRoot(format!("{seed}")));
    }
    let dcoeffs = derivative_coeffs(coeffs);
    let c1 = poly_eval(&dcoeffs, &f0).coeff(&vec![0; grid.nvars()]);
    if !c1.is_zero() {
        // simple root: Newton, quadratic convergence
        let mut f = f0;
        let mut last_val: Option<i64> = None;
        for _ in 0..64 {
            let res = poly_eval(coeffs, &f);
            let Some((m, _)) = res.first_term() else {
                return Ok(f);
            };
            let val = m.weight();
            if last_val.is_some_and(|v| val <= v) {
                return Err(EvalError::RootStalled);
            }
            last_val = Some(val);
            let step = res.mul(&poly_eval(&dcoeffs, &f).invert().map_err(EvalError::Series)?);
            f = f.sub(&step);
        }
        return Err(EvalError::RootStalled);
    }
    // double root at the origin
    let d2: Vec<PuiseuxSeries> = coeffs
        .iter()
        .enumerate()
        .skip(2)
        .map(|(k, c)| c.scale(&Gaussian::from_rat(rat((k * (k - 1) / 2) as i64, 1))))
        .collect();
    let c2 = poly_eval(&d2, &f0).coeff(&vec![0; grid.nvars()]);
    if c2.is_zero() {
        return Err(EvalError::RamificationRequired);
    }
    let Some(hint) = ram_hint else {
        return Err(EvalError::RamificationRequired);
    };
    let ram: Vec<u32> = grid
        .ram()
        .iter()
        .zip(hint)
        .map(|(&k, &h)| num::integer::lcm(k, h.max(1)))
        .collect();
    let coeffs: Vec<PuiseuxSeries> = coeffs.iter().map(|c| c.refine_ram(&ram)).collect();
    let grid = coeffs[0].grid().clone();
    let order = coeffs.iter().map(|c| c.order()).min().unwrap();
    // q_k = Σ_{j≥k} C(j,k)·seed^{j−k}·p_j  (coefficients of P(seed + h) in h)
    let deg = coeffs.len() - 1;
    let mut q: Vec<PuiseuxSeries> = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let mut acc = PuiseuxSeries::zero(grid.clone(), order);
        for j in k..=deg {
            let scale = seed.powi((j - k) as i64).scale(&rint(binomial(j, k)));
            acc = acc.add(&coeffs[j].scale(&scale));
        }
        q.push(acc);
    }
    // lowest graded pieces pin the ramified leading term of h:
    // c₂·h₁² + [q₁]₁·h₁ + [q₀]₂ = 0 with c₂ = q₂(0)
    let c2g = q[2].coeff(&vec![0; grid.nvars()]);
    let q1_lead = q[1].graded_part(1);
    let q0_lead = q[0].graded_part(2);
    let disc = q1_lead
        .mul(&q1_lead)
        .sub(&q0_lead.scale(&(Gaussian::from_i64(4) * &c2g)));
    let s = if disc.is_zero() {
        disc.clone()
    } else {
        redeclare_order(&disc.sqrt(branch).map_err(EvalError::Series)?, order)
    };
    let half_c2_inv = (Gaussian::from_i64(2) * &c2g).inv();
    let h1 = redeclare_order(&q1_lead.neg().add(&s).scale(&half_c2_inv), order);
    let mut f = PuiseuxSeries::constant(grid.clone(), seed.clone(), order).add(&h1);
    // the linearization now has a single-monomial leading part; divide the
    // residual by it order by order
    let dcoeffs = derivative_coeffs(&coeffs);
    let lead = poly_eval(&dcoeffs, &f).graded_part(1);
    if lead.term_count() != 1 {
        return Err(EvalError::RootStalled);
    }
    let (lmono, lcoeff, lead_weight) = {
        let (m, c) = lead.first_term().expect("single term");
        (lead.abs_exponent(m), c.clone(), m.weight())
    };
    let lscale = -lcoeff.inv();
    let mut last_val: Option<i64> = None;
    let max_iters = (order as usize) + 8;
    for _ in 0..max_iters {
        let res = poly_eval(&coeffs, &f);
        let Some((m, _)) = res.first_term() else {
            // a zero residual at this order only pins f below
            // order − val(P'(f)): truncate the overclaimed top slice
            return Ok(f.truncate(order - lead_weight));
        };
        let val = m.weight();
        if last_val.is_some_and(|v| val <= v) {
            return Err(EvalError::RootStalled);
        }
        last_val = Some(val);
        // only the lowest homogeneous piece is guaranteed divisible by the
        // lead monomial; kill it and let higher weights resolve in later rounds
        let step = res
            .graded_part(val)
            .monomial_div_strict(&lmono)
            .map_err(|_| EvalError::RootStalled)?
            .scale(&lscale);
        f = f.add(&redeclare_order(&step, order));
    }
    Err(EvalError::RootStalled)
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut acc = 1i64;
    for j in 0..k {
        acc = acc * (n - j) as i64 / (j + 1) as i64;
    }
    acc
}

/// Re-declare the truncation order of a fully-known series (a homogeneous
/// graded piece or a polynomial); sound only because no unknown region exists.
fn redeclare_order(s: &PuiseuxSeries, order: i64) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(
        s.grid().clone(),
        s.offset().to_vec(),
        order,
        s.terms().map(|(m, c)| (m.0.clone(), c.clone())),
    )
}

/// A named series identity `lhs = rhs` attached to a family (defining
/// polynomial of an algebraic root, factored-square-root consistency,
/// discriminant identity).
#[derive(Debug, Clone)]
pub struct Relation {
    pub name: String,
    pub lhs: Recipe,
    pub rhs: Recipe,
}

/// A pure Puiseux monomial solution (the Horn-only extra of G3), with affine
/// exponents.
#[derive(Debug, Clone)]
pub struct PuiseuxMonomialSpec {
    pub exponents: Vec<AffR>,
}

impl PuiseuxMonomialSpec {
    pub fn eval(&self, grid: &ExponentGrid, r: &Rat, order: i64) -> PuiseuxSeries {
        let offset: Vec<Rat> = self.exponents.iter().map(|e| e.eval(r)).collect();
        PuiseuxSeries::one(grid.clone(), order).with_offset(offset)
    }
}

/// One registry entry: the complete data of a family.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub name: String,
    pub display: String,
    /// FC arity (number of z variables); equals d for the FC families.
    pub n: usize,
    /// Number of classical variables.
    pub d: usize,
    pub config: PointConfig,
    pub beta: Vec<AffR>,
    pub lattice: LatticeBasis,
    pub triangulation: Triangulation,
    /// One γ per basis element, in triangulation order.
    pub gammas: Vec<Vec<AffR>>,
    /// Classical variable signs: x_j = σ_j·z^{b_j}.
    pub signs: Vec<i8>,
    pub grid: ExponentGrid,
    pub horn_ops: Vec<ThetaOperator>,
    /// Solution coefficients c_k(r) on the basis, when the family states them.
    pub coeffs: Option<Vec<RPoly>>,
    /// Full closed form Φ(r).
    pub closed_form: Recipe,
    /// The f and g of Φ = f^r·g, when the family has that shape.
    pub recipe_f: Option<Recipe>,
    pub recipe_g: Option<Recipe>,
    pub relations: Vec<Relation>,
    pub slots: Vec<SlotSpec>,
    pub extra_horn: Vec<PuiseuxMonomialSpec>,
    pub rank: i64,
    /// Expected to verify end-to-end; false flags a known defective table
    /// whose verdict is certificates plus empirical extraction.
    pub validated: bool,
    pub default_order: i64,
    pub variant: Option<String>,
}

impl FamilySpec {
    /// Grid weight consumed by the family's operators (order padding).
    pub fn op_shift(&self) -> i64 {
        self.horn_ops.iter().map(|op| op.degree_shift(self.grid.ram())).max().unwrap_or(2)
    }

    pub fn beta_at(&self, r: &Rat) -> Vec<Rat> {
        self.beta.iter().map(|a| a.eval(r)).collect()
    }

    pub fn gamma_at(&self, k: usize, r: &Rat) -> Vec<Rat> {
        self.gammas[k].iter().map(|a| a.eval(r)).collect()
    }

    /// Sanity of the stored data: A·γ_k(r) = β(r) at three rationals, lattice
    /// relations, and the rank/volume match.
    pub fn check_invariants(&self) -> Result<(), String> {
        for r in [rat(1, 3), rat(2, 5), rat(3, 7)] {
            let beta = self.beta_at(&r);
            for k in 0..self.gammas.len() {
                let g = self.gamma_at(k, &r);
                if self.config.apply(&g) != beta {
                    return Err(format!("{}: A·γ_{} ≠ β at r = {}", self.name, k + 1, r));
                }
            }
        }
        let vol = simplex_volume(&self.config, &self.triangulation).map_err(|e| e.to_string())?;
        if vol != self.rank {
            return Err(format!("{}: volume {} ≠ rank {}", self.name, vol, self.rank));
        }
        if self.gammas.len() != self.triangulation.simplices.len() {
            return Err(format!("{}: one γ per simplex expected", self.name));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// registry

fn g(n: i64, d: i64) -> Gaussian {
    Gaussian::from_rat(rat(n, d))
}

fn cst(n: i64, d: i64) -> Recipe {
    Recipe::Const(g(n, d))
}

fn var(j: usize) -> Recipe {
    Recipe::VarRoot(j)
}

fn add(parts: Vec<Recipe>) -> Recipe {
    Recipe::Add(parts)
}

fn mul(parts: Vec<Recipe>) -> Recipe {
    Recipe::Mul(parts)
}

fn neg(r: Recipe) -> Recipe {
    Recipe::Neg(Box::new(r))
}

fn inv(r: Recipe) -> Recipe {
    Recipe::Inv(Box::new(r))
}

fn powc(r: Recipe, k: i64) -> Recipe {
    Recipe::PowRat(Box::new(r), AffR::constant(rint(k)))
}

/// base^(a + b·r)
fn powr(base: Recipe, a: Rat, b: Rat) -> Recipe {
    Recipe::PowRat(Box::new(base), AffR::new(a, b))
}

fn sqrt(r: Recipe, slot: usize) -> Recipe {
    Recipe::Sqrt(Box::new(r), slot)
}

fn aff(an: i64, ad: i64, bn: i64, bd: i64) -> AffR {
    AffR::new(rat(an, ad), rat(bn, bd))
}

fn aff_vec_add(a: &[AffR], b: &[AffR]) -> Vec<AffR> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn aff_scale_ivec(v: &IVec, c: &AffR) -> Vec<AffR> {
    v.iter().map(|&e| c.scale(&rint(e))).collect()
}

fn rpoly(src: &str) -> RPoly {
    crate::homops::parse_rpoly(src).expect("registry coefficient parses")
}

fn ops2(src1: &str, src2: &str) -> Vec<ThetaOperator> {
    let vars = crate::homops::default_var_names(2);
    vec![
        parse_operator(src1, &vars).expect("registry operator parses"),
        parse_operator(src2, &vars).expect("registry operator parses"),
    ]
}

/// `Σ_j √z_j over the given variable indexes` as a recipe.
fn root_sum(vars: impl Iterator<Item = usize>) -> Recipe {
    add(vars.map(var).collect())
}

/// The closed form Φ = f^r·g as a recipe.
fn power_form(f: &Recipe, gg: &Option<Recipe>) -> Recipe {
    let p = powr(f.clone(), Rat::zero(), Rat::one());
    match gg {
        Some(grec) => mul(vec![p, grec.clone()]),
        None => p,
    }
}

fn gauss_family(which: u8) -> FamilySpec {
    let config = PointConfig::new(vec![
        vec![1, 0, 0, 1],
        vec![0, 1, 0, 1],
        vec![0, 0, 1, -1],
    ])
    .unwrap();
    let lattice = LatticeBasis::from_rows(&config, vec![vec![-1, -1, 1, 1]]).unwrap();
    let triangulation = Triangulation::from_one_based(vec![vec![1, 2, 3], vec![1, 2, 4]]);
    let z = || var(0); // ram-2 grid: VarRoot = √z
    let zz = || mul(vec![var(0), var(0)]);
    let (name, display, beta, gammas, slots, closed_form, recipe_f, recipe_g): (
        &str,
        String,
        Vec<AffR>,
        Vec<Vec<AffR>>,
        Vec<SlotSpec>,
        Recipe,
        Option<Recipe>,
        Option<Recipe>,
    ) = match which {
        1 => {
            // ½((√(1−z)+i√z)^{2r} + (√(1−z)−i√z)^{2r})
            let root = || sqrt(add(vec![cst(1, 1), neg(zz())]), 0);
            let plus = add(vec![root(), mul(vec![Recipe::Const(Gaussian::i()), z()])]);
            let minus = add(vec![root(), neg(mul(vec![Recipe::Const(Gaussian::i()), z()]))]);
            let phi = mul(vec![
                cst(1, 2),
                add(vec![
                    powr(plus, Rat::zero(), rint(2)),
                    powr(minus, Rat::zero(), rint(2)),
                ]),
            ]);
            (
                "gauss1",
                "2F1(r, -r, 1/2 | z)".to_string(),
                vec![aff(0, 1, -1, 1), aff(0, 1, 1, 1), aff(-1, 2, 0, 1)],
                vec![
                    vec![aff(0, 1, -1, 1), aff(0, 1, 1, 1), aff(-1, 2, 0, 1), aff(0, 1, 0, 1)],
                    vec![aff(-1, 2, -1, 1), aff(-1, 2, 1, 1), aff(0, 1, 0, 1), aff(1, 2, 0, 1)],
                ],
                vec![SlotSpec { name: "sqrt(1-z)".into(), kind: SlotKind::SqrtSign }],
                phi,
                None,
                None,
            )
        }
        2 => {
            // ½((1+√z)^{−2r} + (1−√z)^{−2r})
            let phi = mul(vec![
                cst(1, 2),
                add(vec![
                    powr(add(vec![cst(1, 1), z()]), Rat::zero(), rint(-2)),
                    powr(add(vec![cst(1, 1), neg(z())]), Rat::zero(), rint(-2)),
                ]),
            ]);
            (
                "gauss2",
                "2F1(r, r+1/2, 1/2 | z)".to_string(),
                vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 2, 0, 1)],
                vec![
                    vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 2, 0, 1), aff(0, 1, 0, 1)],
                    vec![aff(-1, 2, -1, 1), aff(-1, 1, -1, 1), aff(0, 1, 0, 1), aff(1, 2, 0, 1)],
                ],
                vec![],
                phi,
                None,
                None,
            )
        }
        3 => {
            // ((1+√(1−z))/2)^{1−2r} / √(1−z) = f^r·g with
            // f = ((1+√(1−z))/2)^{−2}, g = (1+√(1−z))/(2√(1−z))
            let root = || sqrt(add(vec![cst(1, 1), neg(zz())]), 0);
            let u = || mul(vec![cst(1, 2), add(vec![cst(1, 1), root()])]);
            let f = powc(u(), -2);
            let gg = mul(vec![u(), inv(root())]);
            let phi = power_form(&f, &Some(gg.clone()));
            (
                "gauss3",
                "2F1(r, r+1/2, 2r | z)".to_string(),
                vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 1, 2, 1)],
                vec![
                    vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 1, 2, 1), aff(0, 1, 0, 1)],
                    vec![aff(-1, 1, 1, 1), aff(-3, 2, 1, 1), aff(0, 1, 0, 1), aff(1, 1, -2, 1)],
                ],
                vec![SlotSpec { name: "sqrt(1-z)".into(), kind: SlotKind::SqrtSign }],
                phi,
                Some(f),
                Some(gg),
            )
        }
        _ => unreachable!(),
    };
    FamilySpec {
        name: name.into(),
        display,
        n: 1,
        d: 1,
        config,
        beta,
        lattice,
        triangulation,
        gammas,
        signs: vec![1],
        grid: ExponentGrid::uniform(1, 2),
        horn_ops: Vec::new(),
        coeffs: Some(vec![rpoly("1"), rpoly("0")]),
        closed_form,
        recipe_f,
        recipe_g,
        relations: Vec::new(),
        slots,
        extra_horn: Vec::new(),
        rank: 2,
        validated: true,
        default_order: 24,
        variant: None,
    }
}

/// A, lattice and triangulation of the Lauricella F_C shape with n variables:
/// A = {e1, …, e_{n+2}, e1+e2−e3, …, e1+e2−e_{n+2}} ⊂ Z^{n+2}.
fn fc_geometry(n: usize) -> (PointConfig, LatticeBasis, Triangulation, Vec<IVec>) {
    let r = n + 2;
    let cols = 2 * n + 2;
    let mut a = vec![vec![0i64; cols]; r];
    for i in 0..r {
        a[i][i] = 1;
    }
    for i in 0..n {
        let c = r + i;
        a[0][c] = 1;
        a[1][c] = 1;
        a[2 + i][c] = -1;
    }
    let config = PointConfig::new(a).unwrap();
    let rows: Vec<IVec> = (0..n)
        .map(|i| {
            let mut row = vec![0i64; cols];
            row[0] = -1;
            row[1] = -1;
            row[2 + i] = 1;
            row[r + i] = 1;
            row
        })
        .collect();
    let lattice = LatticeBasis::from_rows(&config, rows.clone()).unwrap();
    // simplices {1,2} ∪ {i+2 : i ∉ T} ∪ {n+i+2 : i ∈ T}, T in the order of
    // the coefficient tables (vary the first variable slowest)
    let mut simplices = Vec::with_capacity(1 << n);
    for mask in 0..(1u32 << n) {
        let mut s = vec![0usize, 1usize];
        for i in 0..n {
            if mask & (1 << (n - 1 - i)) == 0 {
                s.push(2 + i);
            } else {
                s.push(r + i);
            }
        }
        s.sort_unstable();
        simplices.push(s);
    }
    // order: reverse-binary (last variable varies fastest) so the table order
    // Φ1, Φ2(√y), Φ3(√x), Φ4(√xy) comes out for n = 2
    simplices.sort_by_key(|s| {
        let mut key = 0u32;
        for i in 0..n {
            if s.contains(&(r + i)) {
                key |= 1 << (n - 1 - i);
            }
        }
        key
    });
    (config, lattice, Triangulation { simplices }, rows)
}

fn fc_family(which: u8, n: usize) -> FamilySpec {
    assert!(n >= 2, "FC families need n >= 2");
    let (config, lattice, triangulation, rows) = fc_geometry(n);
    let npts = 2 * n + 2;
    // β and γ_ref per family
    let mut beta: Vec<AffR> = Vec::with_capacity(n + 2);
    beta.push(aff(0, 1, -1, 1)); // −r
    match which {
        1 => beta.push(aff(0, 1, 1, 1)),  // r
        _ => beta.push(aff(-1, 2, -1, 1)), // −r−½
    }
    for i in 0..n {
        if which == 3 && i == n - 1 {
            beta.push(aff(-1, 1, 2, 1)); // 2r−1
        } else {
            beta.push(aff(-1, 2, 0, 1)); // −½
        }
    }
    let mut gamma_ref: Vec<AffR> = beta.clone();
    gamma_ref.extend((0..n).map(|_| aff(0, 1, 0, 1)));
    assert_eq!(gamma_ref.len(), npts);
    // per-direction lattice shifts: ½·b_i, except the last direction of
    // family 3 which shifts by (1−2r)·b_i
    let shift_coeff = |i: usize| -> AffR {
        if which == 3 && i == n - 1 {
            aff(1, 1, -2, 1)
        } else {
            aff(1, 2, 0, 1)
        }
    };
    let gammas: Vec<Vec<AffR>> = triangulation
        .simplices
        .iter()
        .map(|s| {
            let mut gk = gamma_ref.clone();
            for i in 0..n {
                if s.contains(&(n + 2 + i)) {
                    gk = aff_vec_add(&gk, &aff_scale_ivec(&rows[i], &shift_coeff(i)));
                }
            }
            gk
        })
        .collect();
    let horn_ops = if n == 2 {
        match which {
            1 => ops2(
                "theta(x)(theta(x)-1/2) - x(theta(x)+theta(y)+r)(theta(x)+theta(y)-r)",
                "theta(y)(theta(y)-1/2) - y(theta(x)+theta(y)+r)(theta(x)+theta(y)-r)",
            ),
            2 => ops2(
                "theta(x)(theta(x)-1/2) - x(theta(x)+theta(y)+r)(theta(x)+theta(y)+r+1/2)",
                "theta(y)(theta(y)-1/2) - y(theta(x)+theta(y)+r)(theta(x)+theta(y)+r+1/2)",
            ),
            3 => ops2(
                "theta(x)(theta(x)-1/2) - x(theta(x)+theta(y)+r)(theta(x)+theta(y)+r+1/2)",
                "theta(y)(theta(y)+2r-1) - y(theta(x)+theta(y)+r)(theta(x)+theta(y)+r+1/2)",
            ),
            _ => unreachable!(),
        }
    } else {
        Vec::new()
    };
    let coeffs = if n == 2 {
        Some(match which {
            1 => vec![rpoly("1"), rpoly("2 i r"), rpoly("-2 i r"), rpoly("4 r^2")],
            2 => vec![rpoly("1"), rpoly("2r"), rpoly("2r"), rpoly("2r(2r+1)")],
            3 => vec![rpoly("1"), rpoly("0"), rpoly("2r"), rpoly("0")],
            _ => unreachable!(),
        })
    } else {
        None
    };
    let s_all = || root_sum(0..n);
    let (display, slots, closed_form, recipe_f, recipe_g, relations): (
        String,
        Vec<SlotSpec>,
        Recipe,
        Option<Recipe>,
        Option<Recipe>,
        Vec<Relation>,
    ) = match which {
        1 => {
            // f = h + √(h²−1) stored factored: h + 2i·s·√(1−s²), h = 1−2s²
            let h = || add(vec![cst(1, 1), neg(mul(vec![cst(2, 1), s_all(), s_all()]))]);
            let root = sqrt(add(vec![cst(1, 1), neg(mul(vec![s_all(), s_all()]))]), 0);
            let f = add(vec![
                h(),
                mul(vec![Recipe::Const(Gaussian::i().scale(&rint(2))), s_all(), root]),
            ]);
            let relations = vec![Relation {
                name: "factored-sqrt".into(),
                lhs: powc(add(vec![f.clone(), neg(h())]), 2),
                rhs: add(vec![powc(h(), 2), cst(-1, 1)]),
            }];
            let slots = vec![
                SlotSpec { name: "sqrt(1-s^2)".into(), kind: SlotKind::SqrtSign },
                SlotSpec { name: "root(z1)".into(), kind: SlotKind::VarTwist(0) },
            ];
            (
                format!("FC(r, -r, 1/2, ..., 1/2 | z1..z{n})"),
                slots,
                power_form(&f, &None),
                Some(f),
                None,
                relations,
            )
        }
        2 => {
            // f = (√z1+…+√zn − 1)^{−2}
            let f = powc(add(vec![s_all(), cst(-1, 1)]), -2);
            (
                format!("FC(r, r+1/2, 1/2, ..., 1/2 | z1..z{n})"),
                vec![],
                power_form(&f, &None),
                Some(f),
                None,
                vec![],
            )
        }
        3 => {
            // h = √z1+…+√z_{n−1} − 1, S = √(h²−z_n),
            // f = (8h² − 4z_n + 8hS)/z_n², g = ½ − h/(2S)
            let h = || add(vec![root_sum(0..n - 1), cst(-1, 1)]);
            let zn = || mul(vec![var(n - 1), var(n - 1)]);
            let s_root = || {
                sqrt(add(vec![powc(h(), 2), neg(zn())]), 0)
            };
            let mut divisor = vec![Rat::zero(); n];
            divisor[n - 1] = rint(2);
            let numerator = add(vec![
                mul(vec![cst(8, 1), powc(h(), 2)]),
                mul(vec![cst(-4, 1), zn()]),
                mul(vec![cst(8, 1), h(), s_root()]),
            ]);
            let f = Recipe::DivMonomialStrict(Box::new(numerator), divisor);
            let gg = add(vec![
                cst(1, 2),
                neg(mul(vec![h(), inv(mul(vec![cst(2, 1), s_root()]))])),
            ]);
            (
                format!("FC(r, r+1/2, 1/2, ..., 1/2, 2r | z1..z{n})"),
                vec![SlotSpec { name: "sqrt(h^2-zn)".into(), kind: SlotKind::SqrtSign }],
                power_form(&f, &Some(gg.clone())),
                Some(f),
                Some(gg),
                vec![],
            )
        }
        _ => unreachable!(),
    };
    FamilySpec {
        name: format!("fc{which}"),
        display,
        n,
        d: n,
        config,
        beta,
        lattice,
        triangulation,
        gammas,
        signs: vec![1; n],
        grid: ExponentGrid::uniform(n, 2),
        horn_ops,
        coeffs,
        closed_form,
        recipe_f,
        recipe_g,
        relations,
        slots,
        extra_horn: Vec::new(),
        rank: 1 << n,
        validated: true,
        default_order: if n == 2 { 12 } else { 8 },
        variant: None,
    }
}

fn g3_family(plus_x: bool) -> FamilySpec {
    let config = PointConfig::new(vec![vec![1, 0, -1, 2], vec![1, 1, 1, 1]]).unwrap();
    let lattice =
        LatticeBasis::from_rows(&config, vec![vec![1, -2, 1, 0], vec![-2, 1, 0, 1]]).unwrap();
    let triangulation = Triangulation::from_one_based(vec![vec![1, 2], vec![2, 3], vec![1, 4]]);
    let beta = vec![aff(0, 1, -1, 1), aff(-1, 1, 0, 1)];
    let gammas = vec![
        vec![aff(0, 1, -1, 1), aff(-1, 1, 1, 1), aff(0, 1, 0, 1), aff(0, 1, 0, 1)],
        vec![aff(0, 1, 0, 1), aff(-1, 1, -1, 1), aff(0, 1, 1, 1), aff(0, 1, 0, 1)],
        vec![aff(-2, 1, 1, 1), aff(0, 1, 0, 1), aff(0, 1, 0, 1), aff(1, 1, -1, 1)],
    ];
    let horn_ops = ops2(
        "theta(x)(-theta(x)+2theta(y)+r) - x(2theta(x)-theta(y)-r+1)(2theta(x)-theta(y)-r+2)",
        "theta(y)(2theta(x)-theta(y)+1-r) - y(-theta(x)+2theta(y)+r)(-theta(x)+2theta(y)+r+1)",
    );
    // the cubic y·f³ + f² − f ∓ x = 0; the printed table carries +x, the
    // equation display carries −x: the discriminant identity picks −x and the
    // +x variant is kept as a falsification demonstration
    let x_coeff = if plus_x { var(0) } else { neg(var(0)) };
    let f = Recipe::AlgRoot {
        coeffs: vec![x_coeff.clone(), cst(-1, 1), cst(1, 1), var(1)],
        seed: Gaussian::one(),
        ram_hint: None,
        slot: None,
    };
    // g = −3y²f² − 2yf + 4y + 1; Φ = f^r √(g/Δ)
    let g_poly = add(vec![
        mul(vec![cst(-3, 1), var(1), var(1), f.clone(), f.clone()]),
        mul(vec![cst(-2, 1), var(1), f.clone()]),
        mul(vec![cst(4, 1), var(1)]),
        cst(1, 1),
    ]);
    let delta = add(vec![
        cst(1, 1),
        mul(vec![cst(4, 1), var(0)]),
        mul(vec![cst(4, 1), var(1)]),
        mul(vec![cst(18, 1), var(0), var(1)]),
        mul(vec![cst(-27, 1), var(0), var(0), var(1), var(1)]),
    ]);
    let g_slot = sqrt(mul(vec![g_poly.clone(), inv(delta.clone())]), 0);
    let closed_form = mul(vec![powr(f.clone(), Rat::zero(), Rat::one()), g_slot.clone()]);
    // discriminant of y·t³ + t² − t + d with respect to t, via
    // 18abcd − 4b³d + b²c² − 4ac³ − 27a²d² at a = y, b = 1, c = −1
    let d_rec = x_coeff;
    let disc = add(vec![
        mul(vec![cst(-18, 1), var(1), d_rec.clone()]),
        mul(vec![cst(-4, 1), d_rec.clone()]),
        cst(1, 1),
        mul(vec![cst(4, 1), var(1)]),
        mul(vec![cst(-27, 1), var(1), var(1), d_rec.clone(), d_rec.clone()]),
    ]);
    let relations = vec![
        Relation {
            name: "cubic".into(),
            lhs: add(vec![
                mul(vec![var(1), powc(f.clone(), 3)]),
                powc(f.clone(), 2),
                neg(f.clone()),
                d_rec,
            ]),
            rhs: cst(0, 1),
        },
        Relation { name: "discriminant".into(), lhs: disc, rhs: delta },
    ];
    FamilySpec {
        name: "g3".into(),
        display: "G3(r, 1-r | x, y)".to_string(),
        n: 2,
        d: 2,
        config,
        beta,
        lattice,
        triangulation,
        gammas,
        signs: vec![-1, -1],
        grid: ExponentGrid::uniform(2, 1),
        horn_ops,
        coeffs: Some(vec![rpoly("1"), rpoly("0"), rpoly("0"), rpoly("0")]),
        closed_form,
        recipe_f: Some(f),
        recipe_g: Some(g_slot),
        relations,
        slots: vec![SlotSpec { name: "sqrt(g/Delta)".into(), kind: SlotKind::SqrtSign }],
        extra_horn: vec![PuiseuxMonomialSpec {
            exponents: vec![aff(-2, 3, 1, 3), aff(-1, 3, -1, 3)],
        }],
        rank: 3,
        validated: !plus_x,
        default_order: 12,
        variant: plus_x.then(|| "table4-plus-x".to_string()),
    }
}

fn h4_geometry() -> (PointConfig, LatticeBasis, Triangulation, Vec<IVec>) {
    let config = PointConfig::new(vec![
        vec![1, 0, 0, 0, 2, 1],
        vec![0, 1, 0, 0, 0, 1],
        vec![0, 0, 1, 0, -1, 0],
        vec![0, 0, 0, 1, 0, -1],
    ])
    .unwrap();
    let rows = vec![vec![-2, 0, 1, 0, 1, 0], vec![-1, -1, 0, 1, 0, 1]];
    let lattice = LatticeBasis::from_rows(&config, rows.clone()).unwrap();
    let triangulation = Triangulation::from_one_based(vec![
        vec![1, 2, 3, 4],
        vec![1, 2, 3, 6],
        vec![1, 2, 4, 5],
        vec![1, 2, 5, 6],
    ]);
    (config, lattice, triangulation, rows)
}

fn h4_family(which: u8) -> FamilySpec {
    let (config, lattice, triangulation, rows) = h4_geometry();
    let beta = match which {
        1 => vec![aff(0, 1, -1, 1), aff(0, 1, 1, 1), aff(-1, 2, 0, 1), aff(-1, 2, 0, 1)],
        2 => vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 2, 0, 1), aff(-1, 2, 0, 1)],
        3 => vec![aff(0, 1, -1, 1), aff(-1, 2, -1, 1), aff(-1, 2, 0, 1), aff(-1, 1, 2, 1)],
        _ => unreachable!(),
    };
    let mut gamma_ref: Vec<AffR> = beta.clone();
    gamma_ref.push(aff(0, 1, 0, 1));
    gamma_ref.push(aff(0, 1, 0, 1));
    let half = aff(1, 2, 0, 1);
    let y_shift = if which == 3 { aff(1, 1, -2, 1) } else { half.clone() };
    let gammas = vec![
        gamma_ref.clone(),
        aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[1], &y_shift)),
        aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[0], &half)),
        aff_vec_add(
            &aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[0], &half)),
            &aff_scale_ivec(&rows[1], &y_shift),
        ),
    ];
    let horn_ops = match which {
        1 => ops2(
            "theta(x)(theta(x)-1/2) - x(2theta(x)+theta(y)+r)(2theta(x)+theta(y)+r+1)",
            "theta(y)(theta(y)-1/2) - y(2theta(x)+theta(y)+r)(theta(y)-r)",
        ),
        2 => ops2(
            "theta(x)(theta(x)-1/2) - x(2theta(x)+theta(y)+r)(2theta(x)+theta(y)+r+1)",
            "theta(y)(theta(y)-1/2) - y(2theta(x)+theta(y)+r)(theta(y)+r+1/2)",
        ),
        3 => ops2(
            "theta(x)(theta(x)-1/2) - x(2theta(x)+theta(y)+r)(2theta(x)+theta(y)+r+1)",
            "theta(y)(theta(y)+2r-1) - y(2theta(x)+theta(y)+r)(theta(y)+r+1/2)",
        ),
        _ => unreachable!(),
    };
    let coeffs = Some(match which {
        1 => vec![rpoly("1"), rpoly("-2 i r"), rpoly("2r"), rpoly("-2 i r(2r+1)")],
        2 => vec![rpoly("1"), rpoly("-2r"), rpoly("2r"), rpoly("-2r(2r+1)")],
        3 => vec![rpoly("1"), rpoly("0"), rpoly("2r"), rpoly("0")],
        _ => unreachable!(),
    });
    let sx = || var(0);
    let y = || mul(vec![var(1), var(1)]);
    let (display, slots, f, gg, relations, validated): (
        String,
        Vec<SlotSpec>,
        Recipe,
        Option<Recipe>,
        Vec<Relation>,
        bool,
    ) = match which {
        1 => {
            // (1−2√x+2y+2√(y(−1+2√x+y)))/(1−2√x)²
            let den = || add(vec![cst(1, 1), mul(vec![cst(-2, 1), sx()])]);
            let arg = mul(vec![
                y(),
                add(vec![cst(-1, 1), mul(vec![cst(2, 1), sx()]), y()]),
            ]);
            let f = mul(vec![
                add(vec![
                    cst(1, 1),
                    mul(vec![cst(-2, 1), sx()]),
                    mul(vec![cst(2, 1), y()]),
                    mul(vec![cst(2, 1), sqrt(arg, 0)]),
                ]),
                inv(powc(den(), 2)),
            ]);
            (
                "H4(r, -r, 1/2, 1/2 | x, y)".to_string(),
                vec![
                    SlotSpec { name: "sqrt(y(2sqrt(x)+y-1))".into(), kind: SlotKind::SqrtSign },
                    SlotSpec { name: "root(x)".into(), kind: SlotKind::VarTwist(0) },
                ],
                f,
                None,
                vec![],
                true,
            )
        }
        2 => {
            // 1/(√(1−2√x)+√y)²
            let root = sqrt(add(vec![cst(1, 1), mul(vec![cst(-2, 1), sx()])]), 0);
            let f = inv(powc(add(vec![root, var(1)]), 2));
            (
                "H4(r, r+1/2, 1/2, 1/2 | x, y)".to_string(),
                vec![
                    SlotSpec { name: "sqrt(1-2sqrt(x))".into(), kind: SlotKind::SqrtSign },
                    SlotSpec { name: "root(y)".into(), kind: SlotKind::VarTwist(1) },
                ],
                f,
                None,
                vec![],
                true,
            )
        }
        3 => {
            // (8−16√x−4y−4h)/y², h = √((2√x−1)(2√x+y−1)), g = ½+(1−2√x)/(2h)
            let harg = mul(vec![
                add(vec![mul(vec![cst(2, 1), sx()]), cst(-1, 1)]),
                add(vec![mul(vec![cst(2, 1), sx()]), y(), cst(-1, 1)]),
            ]);
            let hroot = || sqrt(harg.clone(), 0);
            let numerator = add(vec![
                cst(8, 1),
                mul(vec![cst(-16, 1), sx()]),
                mul(vec![cst(-4, 1), y()]),
                mul(vec![cst(-4, 1), hroot()]),
            ]);
            let f = Recipe::DivMonomialStrict(
                Box::new(numerator),
                vec![Rat::zero(), rint(2)],
            );
            let gg = add(vec![
                cst(1, 2),
                mul(vec![
                    add(vec![cst(1, 1), mul(vec![cst(-2, 1), sx()])]),
                    inv(mul(vec![cst(2, 1), hroot()])),
                ]),
            ]);
            (
                "H4(r, r+1/2, 1/2, 2r | x, y)".to_string(),
                vec![SlotSpec {
                    name: "sqrt((2sqrt(x)-1)(2sqrt(x)+y-1))".into(),
                    kind: SlotKind::SqrtSign,
                }],
                f,
                Some(gg),
                vec![],
                false,
            )
        }
        _ => unreachable!(),
    };
    FamilySpec {
        name: format!("h4{which}"),
        display,
        n: 2,
        d: 2,
        config,
        beta,
        lattice,
        triangulation,
        gammas,
        signs: vec![1, 1],
        grid: ExponentGrid::uniform(2, 2),
        horn_ops,
        coeffs,
        closed_form: power_form(&f, &gg),
        recipe_f: Some(f),
        recipe_g: gg,
        relations,
        slots,
        extra_horn: Vec::new(),
        rank: 4,
        validated,
        default_order: 12,
        variant: None,
    }
}

fn h5_family() -> FamilySpec {
    let config = PointConfig::new(vec![
        vec![1, 0, 0, 2, 1],
        vec![0, 1, 0, -1, 1],
        vec![0, 0, 1, 0, -1],
    ])
    .unwrap();
    let rows = vec![vec![-2, 1, 0, 1, 0], vec![-1, -1, 1, 0, 1]];
    let lattice = LatticeBasis::from_rows(&config, rows.clone()).unwrap();
    // the published simplex list for this family is malformed (it indexes six
    // points); this fan around a1 triangulates conv(A) with the four simplices
    // matching the published basis elements in order
    let triangulation = Triangulation::from_one_based(vec![
        vec![1, 2, 3],
        vec![1, 2, 5],
        vec![1, 3, 4],
        vec![1, 4, 5],
    ]);
    let beta = vec![aff(0, 1, -1, 1), aff(0, 1, 1, 1), aff(-1, 2, 0, 1)];
    let gamma_ref = vec![
        aff(0, 1, -1, 1),
        aff(0, 1, 1, 1),
        aff(-1, 2, 0, 1),
        aff(0, 1, 0, 1),
        aff(0, 1, 0, 1),
    ];
    let half = aff(1, 2, 0, 1);
    let minus_r = aff(0, 1, -1, 1);
    let half_minus_r = aff(1, 2, -1, 1);
    let gammas = vec![
        gamma_ref.clone(),
        aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[1], &half)),
        aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[0], &minus_r)),
        aff_vec_add(
            &aff_vec_add(&gamma_ref, &aff_scale_ivec(&rows[0], &half_minus_r)),
            &aff_scale_ivec(&rows[1], &half),
        ),
    ];
    let horn_ops = ops2(
        "theta(x)(-theta(x)+theta(y)-r) - x(2theta(x)+theta(y)+r)(2theta(x)+theta(y)+r+1)",
        "theta(y)(theta(y)-1/2) - y(2theta(x)+theta(y)+r)(-theta(x)+theta(y)-r)",
    );
    // x² f⁴ + 2x f³ + (1−2x) f² + (4y−2) f + 1 = 0; the constant-term
    // polynomial has the double root f = 1, so the root is ramified in √y
    let x = || var(0);
    let y = || mul(vec![var(1), var(1)]);
    let f = Recipe::AlgRoot {
        coeffs: vec![
            cst(1, 1),
            add(vec![mul(vec![cst(4, 1), y()]), cst(-2, 1)]),
            add(vec![cst(1, 1), mul(vec![cst(-2, 1), x()])]),
            mul(vec![cst(2, 1), x()]),
            mul(vec![x(), x()]),
        ],
        seed: Gaussian::one(),
        ram_hint: Some(vec![1, 2]),
        slot: Some(0),
    };
    let relations = vec![Relation {
        name: "quartic".into(),
        lhs: add(vec![
            mul(vec![x(), x(), powc(f.clone(), 4)]),
            mul(vec![cst(2, 1), x(), powc(f.clone(), 3)]),
            mul(vec![add(vec![cst(1, 1), mul(vec![cst(-2, 1), x()])]), powc(f.clone(), 2)]),
            mul(vec![add(vec![mul(vec![cst(4, 1), y()]), cst(-2, 1)]), f.clone()]),
            cst(1, 1),
        ]),
        rhs: cst(0, 1),
    }];
    FamilySpec {
        name: "h5".into(),
        display: "H5(r, -r, 1/2 | x, y)".to_string(),
        n: 2,
        d: 2,
        config,
        beta,
        lattice,
        triangulation,
        gammas,
        signs: vec![-1, 1],
        grid: ExponentGrid::new(vec![1, 2]),
        horn_ops,
        coeffs: Some(vec![rpoly("1"), rpoly("2 i r"), rpoly("0"), rpoly("0")]),
        closed_form: power_form(&f, &None),
        recipe_f: Some(f),
        recipe_g: None,
        relations,
        slots: vec![SlotSpec { name: "root-branch".into(), kind: SlotKind::SqrtSign }],
        extra_horn: Vec::new(),
        rank: 4,
        validated: true,
        default_order: 12,
        variant: None,
    }
}

/// All eleven registry families at their default arity.
pub fn registry() -> Vec<FamilySpec> {
    vec![
        gauss_family(1),
        gauss_family(2),
        gauss_family(3),
        fc_family(1, 2),
        fc_family(2, 2),
        fc_family(3, 2),
        g3_family(false),
        h4_family(1),
        h4_family(2),
        h4_family(3),
        h5_family(),
    ]
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LookupError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("unknown variant `{0}` for family `{1}`")]
    UnknownVariant(String, String),
    #[error("family `{0}` does not take an arity parameter")]
    NoArity(String),
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

/// Find a family by (case- and punctuation-insensitive) name or alias, with
/// an optional FC arity and variant.
pub fn lookup(name: &str, n: Option<usize>, variant: Option<&str>) -> Result<FamilySpec, LookupError> {
    let key = normalize(name);
    let canonical = match key.as_str() {
        "gauss1" | "g1" => "gauss1",
        "gauss2" | "g2" => "gauss2",
        "gauss3" => "gauss3",
        "fc1" | "f41" => "fc1",
        "fc2" | "f42" => "fc2",
        "fc3" | "f43" => "fc3",
        "g3" => "g3",
        "h41" => "h41",
        "h42" => "h42",
        "h43" => "h43",
        "h5" => "h5",
        _ => return Err(LookupError::UnknownFamily(name.to_string())),
    };
    if let Some(v) = variant {
        if canonical != "g3" {
            return Err(LookupError::UnknownVariant(v.to_string(), canonical.to_string()));
        }
        let vkey = normalize(v);
        if vkey == "table4plusx" || vkey == "plusx" {
            return Ok(g3_family(true));
        }
        if vkey == "eq3" || vkey == "minusx" || vkey == "default" {
            return Ok(g3_family(false));
        }
        return Err(LookupError::UnknownVariant(v.to_string(), canonical.to_string()));
    }
    let fam = match canonical {
        "gauss1" => gauss_family(1),
        "gauss2" => gauss_family(2),
        "gauss3" => gauss_family(3),
        "fc1" => fc_family(1, n.unwrap_or(2)),
        "fc2" => fc_family(2, n.unwrap_or(2)),
        "fc3" => fc_family(3, n.unwrap_or(2)),
        "g3" => g3_family(false),
        "h41" => h4_family(1),
        "h42" => h4_family(2),
        "h43" => h4_family(3),
        "h5" => h5_family(),
        _ => unreachable!(),
    };
    if n.is_some() && !canonical.starts_with("fc") && n != Some(fam.n) {
        return Err(LookupError::NoArity(canonical.to_string()));
    }
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseries::Branch;
    use crate::scalars::rat;

    fn ctx_on<'a>(
        fam: &'a FamilySpec,
        r: &'a Rat,
        order: i64,
        assignment: &'a [Branch],
    ) -> EvalCtx<'a> {
        EvalCtx { grid: &fam.grid, order, r, slots: &fam.slots, assignment }
    }

    #[test]
    fn registry_invariants_hold() {
        for fam in registry() {
            fam.check_invariants().unwrap();
            // the stored lattice spans the kernel
            let kern = crate::geometry::lattice_kernel(&fam.config);
            for row in kern.rows() {
                assert!(fam.lattice.coordinates(row).is_some(), "{}", fam.name);
            }
            assert_eq!(fam.lattice.invariant_factor_gcd(), 1, "{}", fam.name);
        }
    }

    #[test]
    fn fc_arities_scale() {
        for n in [2, 3, 4] {
            let fam = fc_family(2, n);
            fam.check_invariants().unwrap();
            assert_eq!(fam.rank, 1 << n);
            assert_eq!(fam.triangulation.simplices.len(), 1 << n);
        }
    }

    #[test]
    fn table2_f_binomial_head() {
        let fam = fc_family(2, 2);
        let r = rat(1, 3);
        let ctx = ctx_on(&fam, &r, 6, &[]);
        let f = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx).unwrap();
        // (1−u−v)^{−2} = 1 + 2u + 2v + 3u² + 6uv + 3v² + …
        assert_eq!(f.coeff(&[0, 0]), Gaussian::one());
        assert_eq!(f.coeff(&[1, 0]), Gaussian::from_i64(2));
        assert_eq!(f.coeff(&[0, 1]), Gaussian::from_i64(2));
        assert_eq!(f.coeff(&[2, 0]), Gaussian::from_i64(3));
        assert_eq!(f.coeff(&[1, 1]), Gaussian::from_i64(6));
        assert_eq!(f.coeff(&[0, 2]), Gaussian::from_i64(3));
    }

    #[test]
    fn gauss3_z_coefficient() {
        // coefficient of z at r = 1/3 is (r+1/2)/2 = 5/12
        let fam = gauss_family(3);
        let r = rat(1, 3);
        let ctx = ctx_on(&fam, &r, 10, &[Branch::Plus]);
        let phi = eval_recipe(&fam.closed_form, &ctx).unwrap();
        assert_eq!(phi.coeff(&[2]), Gaussian::from_rat(rat(5, 12)));
        // the minus branch of √(1−z) makes the power base non-unit
        let bad = ctx_on(&fam, &r, 10, &[Branch::Minus]);
        assert!(eval_recipe(&fam.closed_form, &bad).is_err());
    }

    #[test]
    fn table3_divisibility_depends_on_branch() {
        let fam = fc_family(3, 2);
        let r = rat(1, 3);
        let ok = ctx_on(&fam, &r, 12, &[Branch::Plus]);
        let f = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ok).unwrap();
        assert_eq!(f.coeff(&[0, 0]), Gaussian::one(), "leading coefficient of f");
        let bad = ctx_on(&fam, &r, 12, &[Branch::Minus]);
        match eval_recipe(fam.recipe_f.as_ref().unwrap(), &bad) {
            Err(EvalError::Series(SeriesError::NotDivisible(_))) => {}
            other => panic!("expected NotDivisible, got {other:?}"),
        }
        // g(0) = 1 under the validating branch
        let gg = eval_recipe(fam.recipe_g.as_ref().unwrap(), &ok).unwrap();
        assert_eq!(gg.coeff(&[0, 0]), Gaussian::one());
    }

    #[test]
    fn g3_cubic_root_matches_quadratic_oracle_at_y_zero() {
        let fam = g3_family(false);
        let r = rat(1, 3);
        let ctx = ctx_on(&fam, &r, 10, &[Branch::Plus]);
        let f = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx).unwrap();
        // (1+√(1+4x))/2 = 1 + x − x² + 2x³ − 5x⁴ …
        assert_eq!(f.coeff(&[0, 0]), Gaussian::one());
        assert_eq!(f.coeff(&[1, 0]), Gaussian::one());
        assert_eq!(f.coeff(&[2, 0]), Gaussian::from_i64(-1));
        assert_eq!(f.coeff(&[3, 0]), Gaussian::from_i64(2));
        assert_eq!(f.coeff(&[4, 0]), Gaussian::from_i64(-5));
    }

    #[test]
    fn g3_discriminant_identity_picks_the_sign() {
        let r = rat(2, 5);
        for (plus_x, should_match) in [(false, true), (true, false)] {
            let fam = g3_family(plus_x);
            let ctx = ctx_on(&fam, &r, 10, &[Branch::Plus]);
            let rel = fam.relations.iter().find(|rel| rel.name == "discriminant").unwrap();
            let lhs = eval_recipe(&rel.lhs, &ctx).unwrap();
            let rhs = eval_recipe(&rel.rhs, &ctx).unwrap();
            let mismatch = lhs.first_mismatch(&rhs);
            if should_match {
                assert!(mismatch.is_none(), "discriminant should equal Δ: {mismatch:?}");
            } else {
                let m = mismatch.expect("plus-x variant must fail");
                assert_eq!(m.exponents, vec![rint(1), rint(0)], "mismatch at x^1");
            }
        }
    }

    #[test]
    fn h5_quartic_root_is_ramified() {
        let fam = h5_family();
        let r = rat(1, 3);
        let ctx = ctx_on(&fam, &r, 12, &[Branch::Plus]);
        let f = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx).unwrap();
        // restricted to y = 0: (−1+√(1+4x))/(2x) = 1 − x + 2x² − 5x³ …
        assert_eq!(f.coeff_abs(&[rint(0), rint(0)]), Gaussian::one());
        assert_eq!(f.coeff_abs(&[rint(1), rint(0)]), Gaussian::from_i64(-1));
        assert_eq!(f.coeff_abs(&[rint(2), rint(0)]), Gaussian::from_i64(2));
        assert_eq!(f.coeff_abs(&[rint(3), rint(0)]), Gaussian::from_i64(-5));
        // ramified leading term ±2i√y
        assert_eq!(
            f.coeff_abs(&[rint(0), rat(1, 2)]),
            Gaussian::i().scale(&rint(2))
        );
        // quartic residual identically zero
        let rel = &fam.relations[0];
        let lhs = eval_recipe(&rel.lhs, &ctx).unwrap();
        assert!(lhs.is_zero(), "quartic residual: {lhs}");
        // the other branch flips the ramified term
        let ctx2 = ctx_on(&fam, &r, 12, &[Branch::Minus]);
        let f2 = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx2).unwrap();
        assert_eq!(
            f2.coeff_abs(&[rint(0), rat(1, 2)]),
            -Gaussian::i().scale(&rint(2))
        );
    }

    #[test]
    fn algroot_requires_hint_for_double_root() {
        // the H5 quartic with the hint stripped
        let fam = h5_family();
        let Some(Recipe::AlgRoot { coeffs, seed, slot, .. }) = fam.recipe_f else {
            panic!("H5 f is an algebraic root")
        };
        let stripped = Recipe::AlgRoot { coeffs, seed, ram_hint: None, slot };
        let r = rat(1, 3);
        let grid = ExponentGrid::uniform(2, 1);
        let ctx = EvalCtx {
            grid: &grid,
            order: 8,
            r: &r,
            slots: &fam.slots,
            assignment: &[Branch::Plus],
        };
        assert!(matches!(eval_recipe(&stripped, &ctx), Err(EvalError::RamificationRequired)));
    }

    #[test]
    fn algroot_linear_and_seed_errors() {
        let grid = ExponentGrid::uniform(1, 1);
        let one = PuiseuxSeries::one(grid.clone(), 8);
        let x = PuiseuxSeries::var_root(grid.clone(), 0, 8);
        // f − (1+x) = 0
        let root = algebraic_root(
            &[one.add(&x).neg(), one.clone()],
            &Gaussian::one(),
            None,
            Branch::Plus,
        )
        .unwrap();
        assert!(root.first_mismatch(&one.add(&x)).is_none());
        // wrong seed
        assert!(matches!(
            algebraic_root(&[one.add(&x).neg(), one.clone()], &Gaussian::from_i64(7), None, Branch::Plus),
            Err(EvalError::SeedNotRoot(_))
        ));
    }

    #[test]
    fn lookup_aliases_and_variants() {
        assert_eq!(lookup("F4-2", None, None).unwrap().name, "fc2");
        assert_eq!(lookup("fc2", Some(3), None).unwrap().n, 3);
        assert_eq!(lookup("G3", None, Some("table4-plus-x")).unwrap().variant.as_deref(), Some("table4-plus-x"));
        assert!(lookup("nosuch", None, None).is_err());
        assert!(lookup("h5", None, Some("plus-x")).is_err());
    }

    #[test]
    fn fc1_factored_relation_holds_either_twist() {
        let fam = fc_family(1, 2);
        let r = rat(1, 3);
        for twist in [Branch::Plus, Branch::Minus] {
            let assignment = [Branch::Plus, twist];
            let ctx = ctx_on(&fam, &r, 10, &assignment);
            let rel = &fam.relations[0];
            let lhs = eval_recipe(&rel.lhs, &ctx).unwrap();
            let rhs = eval_recipe(&rel.rhs, &ctx).unwrap();
            assert!(lhs.first_mismatch(&rhs).is_none());
        }
    }
}
