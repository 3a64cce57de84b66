//! Truncated multivariate Puiseux series over the Gaussian rationals.
//!
//! A series lives on a ramified exponent grid: variable `z_j` is stored in
//! units of `1/k_j` for a per-variable ramification index `k_j`, and the whole
//! series carries a global rational exponent offset per variable (the monomial
//! prefactor, e.g. the `1−2r` of `y^{1−2r}·F(x,y)` or a bare `√x`). Exponent
//! keys are nonnegative integer vectors in grid units; "grid weight" of a key
//! is the sum of its entries, and `order` means the series is only known for
//! keys of weight strictly below it (measured from the offset).
//!
//! Truncation orders shrink under operations exactly as much as soundness
//! requires, so an annihilation check can never claim more digits than are
//! valid.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalars::{fmt_rat, is_integer, parse_rat, rint, Gaussian, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series is not a unit (zero constant term)")]
    NonUnit,
    #[error("constant term {0} raised to power {1} is not a Gaussian rational")]
    NonRepresentableConstantPower(String, String),
    #[error("not divisible: offending monomial z^({0})")]
    NotDivisible(String),
    #[error("series order {available} too small, need more than {needed}")]
    InsufficientOrder { available: i64, needed: i64 },
    #[error("incompatible series: {0}")]
    Incompatible(String),
}

/// Branch choice for square roots (relative to the canonical root, which has
/// positive real part, tie broken by positive imaginary part).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

/// Exponent grid: `nvars` base variables, variable `j` measured in units of
/// `1/ram[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentGrid {
    ram: Vec<u32>,
}

impl ExponentGrid {
    pub fn new(ram: Vec<u32>) -> Self {
        assert!(ram.iter().all(|&k| k >= 1), "ramification indices must be >= 1");
        ExponentGrid { ram }
    }

    /// Uniform grid: `nvars` variables, all with ramification `k`.
    pub fn uniform(nvars: usize, k: u32) -> Self {
        Self::new(vec![k; nvars])
    }

    pub fn nvars(&self) -> usize {
        self.ram.len()
    }

    pub fn ram(&self) -> &[u32] {
        &self.ram
    }
}

/// Exponent key in grid units, ordered by (total weight, lex).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<i64>);

impl Mono {
    pub fn weight(&self) -> i64 {
        self.0.iter().sum()
    }
    pub fn zero(n: usize) -> Self {
        Mono(vec![0; n])
    }
    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Truncated multivariate Puiseux series.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PuiseuxSeries {
    grid: ExponentGrid,
    offset: Vec<Rat>,
    coeffs: BTreeMap<Mono, Gaussian>,
    order: i64,
}

impl PuiseuxSeries {
    pub fn zero(grid: ExponentGrid, order: i64) -> Self {
        let n = grid.nvars();
        PuiseuxSeries { grid, offset: vec![Rat::zero(); n], coeffs: BTreeMap::new(), order }
    }

    pub fn constant(grid: ExponentGrid, c: Gaussian, order: i64) -> Self {
        let mut s = Self::zero(grid, order);
        if !c.is_zero() && order > 0 {
            s.coeffs.insert(Mono::zero(s.grid.nvars()), c);
        }
        s
    }

    pub fn one(grid: ExponentGrid, order: i64) -> Self {
        Self::constant(grid, Gaussian::one(), order)
    }

    /// The grid monomial `z_j^{1/k_j}` (the grid unit for variable `j`).
    pub fn var_root(grid: ExponentGrid, j: usize, order: i64) -> Self {
        let mut key = vec![0i64; grid.nvars()];
        key[j] = 1;
        Self::monomial(grid, key, Gaussian::one(), order)
    }

    /// Assemble a series from raw (key, coefficient) terms on a given offset.
    /// Zero coefficients and keys at or beyond the order are dropped.
    pub fn from_terms(
        grid: ExponentGrid,
        offset: Vec<Rat>,
        order: i64,
        terms: impl IntoIterator<Item = (Vec<i64>, Gaussian)>,
    ) -> Self {
        let mut s = Self::zero(grid, order).with_offset(offset);
        for (key, c) in terms {
            assert!(key.iter().all(|&e| e >= 0), "term keys must be nonnegative");
            s.add_at(Mono(key), c);
        }
        s
    }

    /// A single monomial `c · z^{key/ram}` (key in grid units, nonnegative).
    pub fn monomial(grid: ExponentGrid, key: Vec<i64>, c: Gaussian, order: i64) -> Self {
        assert!(key.iter().all(|&e| e >= 0), "monomial keys must be nonnegative");
        let mut s = Self::zero(grid, order);
        let m = Mono(key);
        if !c.is_zero() && m.weight() < order {
            s.coeffs.insert(m, c);
        }
        s
    }

    pub fn grid(&self) -> &ExponentGrid {
        &self.grid
    }

    pub fn offset(&self) -> &[Rat] {
        &self.offset
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.grid.nvars()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Gaussian)> {
        self.coeffs.iter()
    }

    /// Replace the offset wholesale (exponent bookkeeping outside the keys).
    pub fn with_offset(mut self, offset: Vec<Rat>) -> Self {
        assert_eq!(offset.len(), self.nvars());
        self.offset = offset;
        self
    }

    /// Absolute exponent vector of a key: offset + key/ram.
    pub fn abs_exponent(&self, m: &Mono) -> Vec<Rat> {
        m.0.iter()
            .zip(self.offset.iter())
            .zip(self.grid.ram.iter())
            .map(|((&e, off), &k)| off + Rat::new(e.into(), (k as i64).into()))
            .collect()
    }

    /// Coefficient at a key (zero if absent).
    pub fn coeff(&self, key: &[i64]) -> Gaussian {
        self.coeffs.get(&Mono(key.to_vec())).cloned().unwrap_or_else(Gaussian::zero)
    }

    /// Coefficient at an absolute rational exponent vector, offset included.
    pub fn coeff_abs(&self, expo: &[Rat]) -> Gaussian {
        let mut key = Vec::with_capacity(self.nvars());
        for j in 0..self.nvars() {
            let rel = (&expo[j] - &self.offset[j]) * rint(self.grid.ram[j] as i64);
            if !is_integer(&rel) || rel.is_negative() {
                return Gaussian::zero();
            }
            key.push(rel.to_integer().try_into().expect("exponent fits i64"));
        }
        self.coeff(&key)
    }

    /// Lowest nonzero term by (weight, lex): (key, coefficient).
    pub fn first_term(&self) -> Option<(&Mono, &Gaussian)> {
        self.coeffs.iter().next()
    }

    /// The homogeneous part of the given grid weight (relative to the offset).
    pub fn graded_part(&self, w: i64) -> Self {
        let mut out = PuiseuxSeries {
            grid: self.grid.clone(),
            offset: self.offset.clone(),
            coeffs: BTreeMap::new(),
            order: self.order,
        };
        for (m, c) in &self.coeffs {
            if m.weight() == w {
                out.coeffs.insert(m.clone(), c.clone());
            }
        }
        out
    }

    fn insert(&mut self, m: Mono, c: Gaussian) {
        if !c.is_zero() && m.weight() < self.order {
            self.coeffs.insert(m, c);
        }
    }

    fn add_at(&mut self, m: Mono, c: Gaussian) {
        if c.is_zero() || m.weight() >= self.order {
            return;
        }
        match self.coeffs.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Lower the truncation order, dropping keys at or beyond it.
    pub fn truncate(mut self, order: i64) -> Self {
        if order < self.order {
            self.order = order;
            self.coeffs.retain(|m, _| m.weight() < order);
        }
        self
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn scale(&self, c: &Gaussian) -> Self {
        if c.is_zero() {
            return Self::zero(self.grid.clone(), self.order);
        }
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = &*v * c;
        }
        out
    }

    /// Refine the grid to finer per-variable ramification (public alias used
    /// by algebraic-root solving when a ramification hint is applied).
    pub fn refine_ram(&self, ram: &[u32]) -> Self {
        self.rescale_to(ram)
    }

    /// Rescale the grid to finer per-variable ramification.
    /// Order shrinks by the most conservative factor when they differ.
    fn rescale_to(&self, ram: &[u32]) -> Self {
        if ram == self.grid.ram.as_slice() {
            return self.clone();
        }
        let factors: Vec<i64> = ram
            .iter()
            .zip(self.grid.ram.iter())
            .map(|(&new, &old)| {
                assert!(new % old == 0, "grid rescale must refine");
                (new / old) as i64
            })
            .collect();
        let fmin = factors.iter().copied().min().unwrap_or(1);
        let order = self.order.saturating_mul(fmin);
        let mut coeffs = BTreeMap::new();
        for (m, c) in &self.coeffs {
            let key: Vec<i64> = m.0.iter().zip(&factors).map(|(&e, &f)| e * f).collect();
            let key = Mono(key);
            if key.weight() < order {
                coeffs.insert(key, c.clone());
            }
        }
        PuiseuxSeries {
            grid: ExponentGrid::new(ram.to_vec()),
            offset: self.offset.clone(),
            coeffs,
            order,
        }
    }

    /// Common refinement of two grids, additionally fine enough to express
    /// `extra` rationals (offset differences) in grid units.
    fn join_ram(a: &Self, b: &Self, extra: &[Rat]) -> Vec<u32> {
        assert_eq!(a.nvars(), b.nvars(), "variable count mismatch");
        let mut ram = Vec::with_capacity(a.nvars());
        for j in 0..a.nvars() {
            let mut k = num::integer::lcm(a.grid.ram[j] as i64, b.grid.ram[j] as i64);
            if let Some(d) = extra.get(j) {
                k = num::integer::lcm(k, d.denom().try_into().expect("small denominator"));
            }
            ram.push(k as u32);
        }
        ram
    }

    /// Bring two series to a common grid and common offset (componentwise
    /// minimum), preserving validity. Returns the shifted pair.
    pub fn align_pair(a: &Self, b: &Self) -> (Self, Self) {
        let diffs: Vec<Rat> = a.offset.iter().zip(&b.offset).map(|(x, y)| x - y).collect();
        let ram = Self::join_ram(a, b, &diffs);
        let mut a2 = a.rescale_to(&ram);
        let mut b2 = b.rescale_to(&ram);
        let common: Vec<Rat> =
            a2.offset.iter().zip(&b2.offset).map(|(x, y)| x.min(y).clone()).collect();
        a2.shift_offset_down(&common);
        b2.shift_offset_down(&common);
        (a2, b2)
    }

    /// Bring a whole collection of series to one common grid and offset (the
    /// componentwise minimum), preserving validity. Used by linear algebra
    /// over several basis elements at once.
    pub fn align_all(series: &[Self]) -> Vec<Self> {
        if series.is_empty() {
            return Vec::new();
        }
        let n = series[0].nvars();
        assert!(series.iter().all(|s| s.nvars() == n), "variable count mismatch");
        let mut offset_min: Vec<Rat> = series[0].offset.clone();
        for s in series.iter().skip(1) {
            for j in 0..n {
                if s.offset[j] < offset_min[j] {
                    offset_min[j] = s.offset[j].clone();
                }
            }
        }
        let mut ram: Vec<i64> = vec![1; n];
        for s in series {
            for j in 0..n {
                ram[j] = num::integer::lcm(ram[j], s.grid.ram[j] as i64);
                let diff = &s.offset[j] - &offset_min[j];
                ram[j] = num::integer::lcm(
                    ram[j],
                    i64::try_from(diff.denom().clone()).expect("small denominator"),
                );
            }
        }
        let ram: Vec<u32> = ram.iter().map(|&k| k as u32).collect();
        series
            .iter()
            .map(|s| {
                let mut t = s.rescale_to(&ram);
                t.shift_offset_down(&offset_min);
                t
            })
            .collect()
    }

    /// Lower the offset to `new_offset` (componentwise <= current), moving the
    /// difference into the keys.
    fn shift_offset_down(&mut self, new_offset: &[Rat]) {
        let mut shift = Vec::with_capacity(self.nvars());
        let mut total = 0i64;
        for j in 0..self.nvars() {
            let d = (&self.offset[j] - &new_offset[j]) * rint(self.grid.ram[j] as i64);
            assert!(is_integer(&d) && !d.is_negative(), "offset shift must be a grid step down");
            let d: i64 = d.to_integer().try_into().expect("offset shift fits i64");
            shift.push(d);
            total += d;
        }
        if total == 0 {
            self.offset = new_offset.to_vec();
            return;
        }
        let coeffs = std::mem::take(&mut self.coeffs);
        self.order += total;
        for (m, c) in coeffs {
            let key: Vec<i64> = m.0.iter().zip(&shift).map(|(&e, &s)| e + s).collect();
            self.coeffs.insert(Mono(key), c);
        }
        self.offset = new_offset.to_vec();
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::align_pair(self, other);
        let order = a.order.min(b.order);
        a = a.truncate(order);
        for (m, c) in b.coeffs {
            if m.weight() < order {
                a.add_at(m, c);
            }
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact truncated convolution. Offsets add; order is the minimum of the
    /// two (measured from the combined offset).
    pub fn mul(&self, other: &Self) -> Self {
        let ram = Self::join_ram(self, other, &[]);
        let a = self.rescale_to(&ram);
        let b = other.rescale_to(&ram);
        let order = a.order.min(b.order);
        let offset: Vec<Rat> = a.offset.iter().zip(&b.offset).map(|(x, y)| x + y).collect();
        let mut out = PuiseuxSeries {
            grid: a.grid.clone(),
            offset,
            coeffs: BTreeMap::new(),
            order,
        };
        // convolve the smaller term set on the outside
        let (small, big) = if a.coeffs.len() <= b.coeffs.len() { (&a, &b) } else { (&b, &a) };
        for (ma, ca) in &small.coeffs {
            let wa = ma.weight();
            if wa >= order {
                continue;
            }
            for (mb, cb) in &big.coeffs {
                if wa + mb.weight() >= order {
                    continue;
                }
                let key: Vec<i64> = ma.0.iter().zip(&mb.0).map(|(&x, &y)| x + y).collect();
                out.add_at(Mono(key), ca * cb);
            }
        }
        out
    }

    /// Multiply by the monomial `z^g` for a rational exponent vector `g`
    /// (possibly negative): pure offset arithmetic, order unchanged.
    pub fn mul_monomial(&self, g: &[Rat]) -> Self {
        let mut out = self.clone();
        for j in 0..out.nvars() {
            out.offset[j] = &out.offset[j] + &g[j];
        }
        out
    }

    /// Multiplicative inverse of a unit series. The offset negates.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let n = self.nvars();
        let c0 = self.coeff(&vec![0; n]);
        if c0.is_zero() {
            return Err(SeriesError::NonUnit);
        }
        let c0inv = c0.inv();
        let mut inv = PuiseuxSeries {
            grid: self.grid.clone(),
            offset: self.offset.iter().map(|o| -o.clone()).collect(),
            coeffs: BTreeMap::new(),
            order: self.order,
        };
        // u(m) = -(Σ_{0<k<=m} a(k) u(m-k)) / c0, in increasing weight order
        let keys = enumerate_simplex(n, self.order);
        for key in keys {
            let m = Mono(key);
            if m.is_origin() {
                inv.coeffs.insert(m, c0inv.clone());
                continue;
            }
            let mut acc = Gaussian::zero();
            for (k, ak) in &self.coeffs {
                if k.is_origin() {
                    continue;
                }
                if k.0.iter().zip(&m.0).all(|(&a, &b)| a <= b) {
                    let rest: Vec<i64> = m.0.iter().zip(&k.0).map(|(&a, &b)| a - b).collect();
                    if let Some(u) = inv.coeffs.get(&Mono(rest)) {
                        acc += &(ak * u);
                    }
                }
            }
            if !acc.is_zero() {
                inv.coeffs.insert(m, -&acc * &c0inv);
            }
        }
        Ok(inv)
    }

    /// Rational power via formal exp/log: `a^α = exp(α·log(a/c))·c^α` after
    /// splitting off the offset and the support's common monomial factor.
    ///
    /// The constant `c` must satisfy: `c = 1`, or α is an integer, or α has
    /// denominator 2 and `c` has an exact square root in the Gaussian
    /// rationals — `branch` then selects ±√c relative to the canonical root.
    pub fn pow_rational(&self, alpha: &Rat, branch: Branch) -> Result<Self, SeriesError> {
        // nonnegative integer powers are plain products and need no unit
        if is_integer(alpha) && !alpha.is_negative() {
            let mut k: i64 = alpha.to_integer().try_into().expect("integer power fits i64");
            let mut acc = Self::one(self.grid.clone(), self.order);
            let mut base = self.clone();
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&base);
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul(&base);
                }
            }
            return Ok(acc);
        }
        if self.is_zero() {
            return Err(SeriesError::NonUnit);
        }
        let n = self.nvars();
        // factor out the componentwise-min monomial of the support
        let mut mmin = vec![i64::MAX; n];
        for m in self.coeffs.keys() {
            for j in 0..n {
                mmin[j] = mmin[j].min(m.0[j]);
            }
        }
        let strip: i64 = mmin.iter().sum();
        let mut body = PuiseuxSeries {
            grid: self.grid.clone(),
            offset: vec![Rat::zero(); n],
            coeffs: BTreeMap::new(),
            order: self.order - strip,
        };
        for (m, c) in &self.coeffs {
            let key: Vec<i64> = m.0.iter().zip(&mmin).map(|(&e, &s)| e - s).collect();
            body.coeffs.insert(Mono(key), c.clone());
        }
        let c0 = body.coeff(&vec![0; n]);
        if c0.is_zero() {
            return Err(SeriesError::NonUnit);
        }
        // total exponent prefactor: offset + mmin/ram, raised to α
        let result_offset: Vec<Rat> = (0..n)
            .map(|j| {
                (&self.offset[j] + Rat::new(mmin[j].into(), (self.grid.ram[j] as i64).into()))
                    * alpha
            })
            .collect();
        // c0^α
        let c_pow = if is_integer(alpha) {
            let k: i64 = alpha.to_integer().try_into().expect("integer power fits i64");
            c0.powi(k)
        } else if alpha.denom() == &num::BigInt::from(2) {
            let mut s = c0.sqrt().ok_or_else(|| {
                SeriesError::NonRepresentableConstantPower(format!("{}", c0), fmt_rat(alpha))
            })?;
            if branch == Branch::Minus {
                s = -s;
            }
            let p: i64 = alpha.numer().try_into().expect("power numerator fits i64");
            s.powi(p)
        } else if c0.is_one() {
            Gaussian::one()
        } else {
            return Err(SeriesError::NonRepresentableConstantPower(
                format!("{}", c0),
                fmt_rat(alpha),
            ));
        };
        // unit part: exp(α log(body/c0))
        let unit = body.scale(&c0.inv());
        let logs = unit.log_of_unit();
        let alog = logs.scale(&Gaussian::from_rat(alpha.clone()));
        let mut out = alog.exp_of_small().scale(&c_pow);
        out.offset = result_offset;
        Ok(out)
    }

    pub fn sqrt(&self, branch: Branch) -> Result<Self, SeriesError> {
        self.pow_rational(&Rat::new(1.into(), 2.into()), branch)
    }

    /// Formal log of a series with constant term exactly 1.
    fn log_of_unit(&self) -> Self {
        let n = self.nvars();
        let mut u = self.clone();
        let origin = Mono::zero(n);
        u.coeffs.remove(&origin); // u = self - 1, valuation >= 1
        let mut acc = Self::zero(self.grid.clone(), self.order);
        let mut upow = Self::one(self.grid.clone(), self.order);
        for k in 1..=self.order.max(0) {
            upow = upow.mul(&u);
            if upow.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { Rat::one() } else { -Rat::one() };
            acc = acc.add(&upow.scale(&Gaussian::from_rat(sign / rint(k))));
        }
        acc
    }

    /// Formal exp of a series with zero constant term (valuation >= 1).
    fn exp_of_small(&self) -> Self {
        let mut acc = Self::one(self.grid.clone(), self.order);
        let mut term = Self::one(self.grid.clone(), self.order);
        for k in 1..=self.order.max(0) {
            term = term.mul(self).scale(&Gaussian::from_rat(Rat::one() / rint(k)));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Euler operator θ_j = z_j ∂/∂z_j: scales each monomial by its total
    /// z_j-exponent (offset included). Order unchanged.
    pub fn theta(&self, j: usize) -> Self {
        let mut out = PuiseuxSeries {
            grid: self.grid.clone(),
            offset: self.offset.clone(),
            coeffs: BTreeMap::new(),
            order: self.order,
        };
        for (m, c) in &self.coeffs {
            let q = &self.offset[j] + Rat::new(m.0[j].into(), (self.grid.ram[j] as i64).into());
            if !q.is_zero() {
                out.coeffs.insert(m.clone(), c.scale(&q));
            }
        }
        out
    }

    /// Strict division by the monomial `z^m`: every stored key must be
    /// divisible (componentwise, in grid units). The offset is untouched and
    /// the order drops by the monomial's grid weight.
    pub fn monomial_div_strict(&self, m: &[Rat]) -> Result<Self, SeriesError> {
        let n = self.nvars();
        let mut g = Vec::with_capacity(n);
        for j in 0..n {
            let u = &m[j] * rint(self.grid.ram[j] as i64);
            if !is_integer(&u) {
                return Err(SeriesError::NotDivisible(fmt_exponents(m)));
            }
            g.push(i64::try_from(u.to_integer()).expect("divisor exponent fits i64"));
        }
        if let Some(bad) = self
            .coeffs
            .keys()
            .find(|key| key.0.iter().zip(&g).any(|(&e, &d)| e < d))
        {
            return Err(SeriesError::NotDivisible(fmt_exponents(&self.abs_exponent(bad))));
        }
        let total: i64 = g.iter().sum();
        let mut out = PuiseuxSeries {
            grid: self.grid.clone(),
            offset: self.offset.clone(),
            coeffs: BTreeMap::new(),
            order: self.order - total,
        };
        for (key, c) in &self.coeffs {
            let k: Vec<i64> = key.0.iter().zip(&g).map(|(&e, &d)| e - d).collect();
            out.coeffs.insert(Mono(k), c.clone());
        }
        Ok(out)
    }

    /// Laurent division by the monomial `z^m`: the offset absorbs the shift.
    /// Also reports the lowest monomial that blocks strict division, if any
    /// (the mismatch certificate for the strict mode).
    pub fn monomial_div_laurent(&self, m: &[Rat]) -> (Self, Option<Vec<Rat>>) {
        let neg: Vec<Rat> = m.iter().map(|x| -x.clone()).collect();
        let out = self.mul_monomial(&neg);
        let offending = self
            .coeffs
            .keys()
            .find(|key| {
                (0..self.nvars()).any(|j| {
                    Rat::new(key.0[j].into(), (self.grid.ram[j] as i64).into()) < m[j]
                })
            })
            .map(|key| self.abs_exponent(key));
        (out, offending)
    }

    /// First monomial (by grid weight, then lex) where the two series differ,
    /// with both coefficients: the falsification primitive. `None` means equal
    /// up to the common valid order.
    pub fn first_mismatch(&self, other: &Self) -> Option<Mismatch> {
        let (a, b) = Self::align_pair(self, other);
        let order = a.order.min(b.order);
        let mut keys: Vec<&Mono> = a.coeffs.keys().chain(b.coeffs.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            if key.weight() >= order {
                continue;
            }
            let ca = a.coeffs.get(key).cloned().unwrap_or_else(Gaussian::zero);
            let cb = b.coeffs.get(key).cloned().unwrap_or_else(Gaussian::zero);
            if ca != cb {
                return Some(Mismatch { exponents: a.abs_exponent(key), lhs: ca, rhs: cb });
            }
        }
        None
    }

    /// First nonzero term as (absolute exponents, coefficient).
    pub fn first_nonzero(&self) -> Option<(Vec<Rat>, Gaussian)> {
        self.first_term().map(|(m, c)| (self.abs_exponent(m), c.clone()))
    }

    pub fn to_repr(&self) -> SeriesRepr {
        SeriesRepr {
            ram: self.grid.ram.clone(),
            offset: self.offset.iter().map(fmt_rat).collect(),
            order: self.order,
            terms: self
                .coeffs
                .iter()
                .map(|(m, c)| (m.0.clone(), fmt_rat(&c.re), fmt_rat(&c.im)))
                .collect(),
        }
    }

    pub fn from_repr(repr: &SeriesRepr) -> Result<Self, SeriesError> {
        let grid = ExponentGrid::new(repr.ram.clone());
        let n = grid.nvars();
        let mut offset = Vec::with_capacity(n);
        for s in &repr.offset {
            offset.push(parse_rat(s).map_err(|e| SeriesError::Incompatible(e.to_string()))?);
        }
        if offset.len() != n {
            return Err(SeriesError::Incompatible("offset length".into()));
        }
        let mut out = PuiseuxSeries { grid, offset, coeffs: BTreeMap::new(), order: repr.order };
        for (key, re, im) in &repr.terms {
            if key.len() != n {
                return Err(SeriesError::Incompatible("key length".into()));
            }
            let c = Gaussian::new(
                parse_rat(re).map_err(|e| SeriesError::Incompatible(e.to_string()))?,
                parse_rat(im).map_err(|e| SeriesError::Incompatible(e.to_string()))?,
            );
            out.insert(Mono(key.clone()), c);
        }
        Ok(out)
    }
}

/// The first monomial at which two series disagree, with both coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub exponents: Vec<Rat>,
    pub lhs: Gaussian,
    pub rhs: Gaussian,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^({}): lhs = {}, rhs = {}", fmt_exponents(&self.exponents), self.lhs, self.rhs)
    }
}

pub fn fmt_exponents(e: &[Rat]) -> String {
    e.iter().map(fmt_rat).collect::<Vec<_>>().join(",")
}

/// Stable serialization form: ramification header, offset vector, term list.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeriesRepr {
    pub ram: Vec<u32>,
    pub offset: Vec<String>,
    pub order: i64,
    pub terms: Vec<(Vec<i64>, String, String)>,
}

/// All nonnegative integer vectors of length `n` with coordinate sum < bound,
/// in increasing (weight, lex) order.
pub fn enumerate_simplex(n: usize, bound: i64) -> Vec<Vec<i64>> {
    fn comp(out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, pos: usize, left: i64) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            comp(out, cur, pos + 1, left - v);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if bound <= 0 {
        return out;
    }
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0i64; n];
    for w in 0..bound {
        comp(&mut out, &mut cur, 0, w);
    }
    out
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 + O(order {})", self.order);
        }
        let mut first = true;
        for (m, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let expo = self.abs_exponent(m);
            let mono: Vec<String> = expo
                .iter()
                .enumerate()
                .filter(|(_, e)| !e.is_zero())
                .map(|(j, e)| {
                    if e.is_one() {
                        format!("z{}", j + 1)
                    } else {
                        format!("z{}^({})", j + 1, fmt_rat(e))
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", c)?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "({})*{}", c, mono.join("*"))?;
            }
        }
        write!(f, " + O(order {})", self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    fn g2() -> ExponentGrid {
        ExponentGrid::uniform(2, 1)
    }

    fn gauss(n: i64) -> Gaussian {
        Gaussian::from_i64(n)
    }

    fn u(order: i64) -> PuiseuxSeries {
        PuiseuxSeries::var_root(g2(), 0, order)
    }

    fn v(order: i64) -> PuiseuxSeries {
        PuiseuxSeries::var_root(g2(), 1, order)
    }

    #[test]
    fn mul_difference_of_squares() {
        let one = PuiseuxSeries::one(g2(), 8);
        let a = one.add(&u(8)).add(&v(8));
        let b = one.sub(&u(8)).sub(&v(8));
        let p = a.mul(&b);
        // 1 - u^2 - 2uv - v^2
        assert_eq!(p.coeff(&[0, 0]), gauss(1));
        assert_eq!(p.coeff(&[2, 0]), gauss(-1));
        assert_eq!(p.coeff(&[1, 1]), gauss(-2));
        assert_eq!(p.coeff(&[0, 2]), gauss(-1));
        assert_eq!(p.coeff(&[1, 0]), gauss(0));
    }

    #[test]
    fn sqrt_times_sqrt_is_x_offset_arithmetic() {
        // sqrt(x) as series with offset 1/2
        let grid = ExponentGrid::uniform(1, 1);
        let sx = PuiseuxSeries::one(grid, 6).with_offset(vec![rat(1, 2)]);
        let x = sx.mul(&sx);
        assert_eq!(x.offset()[0], rint(1));
        assert_eq!(x.coeff(&[0]), gauss(1));
    }

    #[test]
    fn mul_order_min_rule() {
        let a = PuiseuxSeries::one(g2(), 5).add(&u(5));
        let b = PuiseuxSeries::one(g2(), 3).add(&v(3));
        assert_eq!(a.mul(&b).order(), 3);
    }

    #[test]
    fn invert_geometric() {
        let grid = ExponentGrid::uniform(1, 1);
        let one = PuiseuxSeries::one(grid.clone(), 6);
        let x = PuiseuxSeries::var_root(grid, 0, 6);
        let inv = one.sub(&x).invert().unwrap();
        for k in 0..6 {
            assert_eq!(inv.coeff(&[k]), gauss(1));
        }
        assert!(one.sub(&x).mul(&inv).sub(&one).is_zero());
    }

    #[test]
    fn invert_gaussian_constant() {
        let grid = ExponentGrid::uniform(1, 1);
        let i = PuiseuxSeries::constant(grid, Gaussian::i(), 4);
        let inv = i.invert().unwrap();
        assert_eq!(inv.coeff(&[0]), -Gaussian::i());
    }

    #[test]
    fn invert_nonunit_errors() {
        let grid = ExponentGrid::uniform(1, 1);
        let x = PuiseuxSeries::var_root(grid.clone(), 0, 4);
        assert_eq!(x.invert().unwrap_err(), SeriesError::NonUnit);
        let z = PuiseuxSeries::zero(grid, 4);
        assert_eq!(z.invert().unwrap_err(), SeriesError::NonUnit);
    }

    #[test]
    fn pow_binomial_sqrt() {
        let grid = ExponentGrid::uniform(1, 1);
        let one = PuiseuxSeries::one(grid.clone(), 5);
        let z = PuiseuxSeries::var_root(grid, 0, 5);
        let s = one.sub(&z).pow_rational(&rat(1, 2), Branch::Plus).unwrap();
        // (1-z)^{1/2} = 1 - z/2 - z^2/8 - z^3/16 - ...
        assert_eq!(s.coeff(&[0]), Gaussian::one());
        assert_eq!(s.coeff(&[1]), Gaussian::from_rat(rat(-1, 2)));
        assert_eq!(s.coeff(&[2]), Gaussian::from_rat(rat(-1, 8)));
        assert_eq!(s.coeff(&[3]), Gaussian::from_rat(rat(-1, 16)));
        // negated branch
        let sm = one.sub(&z).pow_rational(&rat(1, 2), Branch::Minus).unwrap();
        assert!(s.add(&sm).is_zero());
        // square back
        assert!(s.mul(&s).sub(&one.sub(&z)).is_zero());
    }

    #[test]
    fn pow_zero_exponent_is_one() {
        let grid = ExponentGrid::uniform(1, 1);
        let one = PuiseuxSeries::one(grid.clone(), 5);
        let z = PuiseuxSeries::var_root(grid, 0, 5);
        let a = one.add(&z.scale(&gauss(3)));
        let p = a.pow_rational(&Rat::zero(), Branch::Plus).unwrap();
        assert!(p.sub(&one).is_zero());
    }

    #[test]
    fn pow_nonunit_sqrt_with_monomial_factor() {
        // sqrt(y(-1+y)) = i*sqrt(y)*(1 - y/2 - ...) on a ram-2 grid
        let grid = ExponentGrid::uniform(1, 2);
        let y = PuiseuxSeries::monomial(grid.clone(), vec![2], Gaussian::one(), 8);
        let arg = y.mul(&y.sub(&PuiseuxSeries::one(grid, 8)));
        let s = arg.sqrt(Branch::Plus).unwrap();
        assert_eq!(s.offset()[0], rat(1, 2));
        assert_eq!(s.coeff(&[0]), Gaussian::i());
        assert_eq!(s.coeff(&[2]), Gaussian::new(Rat::zero(), rat(-1, 2)));
        // square back equals the argument
        assert!(s.mul(&s).first_mismatch(&arg).is_none());
    }

    #[test]
    fn pow_irrational_constant_errors() {
        let grid = ExponentGrid::uniform(1, 1);
        let two = PuiseuxSeries::constant(grid.clone(), gauss(2), 4);
        assert!(matches!(
            two.pow_rational(&rat(1, 2), Branch::Plus),
            Err(SeriesError::NonRepresentableConstantPower(_, _))
        ));
        let minus_one = PuiseuxSeries::constant(grid, gauss(-1), 4);
        assert!(matches!(
            minus_one.pow_rational(&rat(2, 3), Branch::Plus),
            Err(SeriesError::NonRepresentableConstantPower(_, _))
        ));
    }

    #[test]
    fn theta_examples() {
        // θ_x(x^2 y) = 2 x^2 y
        let grid = ExponentGrid::uniform(2, 1);
        let m = PuiseuxSeries::monomial(grid.clone(), vec![2, 1], Gaussian::one(), 8);
        assert_eq!(m.theta(0).coeff(&[2, 1]), gauss(2));
        // θ_x(√x) = ½√x, in grid units
        let grid2 = ExponentGrid::uniform(1, 2);
        let sx = PuiseuxSeries::monomial(grid2, vec![1], Gaussian::one(), 8);
        assert_eq!(sx.theta(0).coeff(&[1]), Gaussian::from_rat(rat(1, 2)));
        // θ_y(y^{1-2r}) at r = 1/3: eigenvalue 1/3 from the offset
        let grid1 = ExponentGrid::uniform(1, 1);
        let s = PuiseuxSeries::one(grid1, 4).with_offset(vec![rat(1, 3)]);
        assert_eq!(s.theta(0).coeff(&[0]), Gaussian::from_rat(rat(1, 3)));
    }

    #[test]
    fn monomial_div_strict_and_laurent() {
        let grid = ExponentGrid::uniform(2, 1);
        let xy = PuiseuxSeries::monomial(grid.clone(), vec![1, 1], Gaussian::one(), 6);
        let q = xy.monomial_div_strict(&[rint(1), rint(0)]).unwrap();
        assert_eq!(q.coeff(&[0, 1]), gauss(1));
        // (x + y)/x strict fails at monomial y
        let x = PuiseuxSeries::var_root(grid.clone(), 0, 6);
        let y = PuiseuxSeries::var_root(grid.clone(), 1, 6);
        let e = x.add(&y).monomial_div_strict(&[rint(1), rint(0)]).unwrap_err();
        assert_eq!(e, SeriesError::NotDivisible("0,1".into()));
        // y^{1-2r} / y -> offset -2r (r = 1/3 here: offset 1/3 becomes -2/3)
        let s = PuiseuxSeries::one(grid, 6).with_offset(vec![Rat::zero(), rat(1, 3)]);
        let (lau, offending) = s.monomial_div_laurent(&[Rat::zero(), rint(1)]);
        assert_eq!(lau.offset()[1], rat(-2, 3));
        assert!(offending.is_some());
    }

    #[test]
    fn align_mixed_offsets() {
        // x^{1/3}·1 + x·1 on a ram-1 grid: common grid must refine to 3
        let grid = ExponentGrid::uniform(1, 1);
        let a = PuiseuxSeries::one(grid.clone(), 4).with_offset(vec![rat(1, 3)]);
        let b = PuiseuxSeries::var_root(grid, 0, 4);
        let s = a.add(&b);
        assert_eq!(s.grid().ram(), &[3]);
        assert_eq!(s.coeff_abs(&[rat(1, 3)]), gauss(1));
        assert_eq!(s.coeff_abs(&[rint(1)]), gauss(1));
    }

    #[test]
    fn serde_roundtrip() {
        let grid = ExponentGrid::uniform(2, 2);
        let s = PuiseuxSeries::monomial(grid.clone(), vec![1, 0], Gaussian::i(), 9)
            .add(&PuiseuxSeries::one(grid, 9))
            .with_offset(vec![rat(-2, 3), Rat::zero()]);
        let json = serde_json::to_string(&s.to_repr()).unwrap();
        let back = PuiseuxSeries::from_repr(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
