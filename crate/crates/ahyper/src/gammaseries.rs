//! Γ-series construction, dehomogenization, and exact ∂/Euler/structure
//! operator action on homogenized series.
//!
//! A twisted series is the formal object `z^γ · Σ_m c(m) z^{Bᵀm}` with
//! `c(m) = ∏_i Γ(γ_i+1)/Γ(γ_i+(Bᵀm)_i+1)` — the Γ-series normalized to
//! leading coefficient 1. Its dehomogenization is a Puiseux series in the d
//! classical variables `t_j = z^{b_j}`, with a rational exponent offset
//! solving `γ − γ_ref = Bᵀδ`.

use std::collections::BTreeMap;

use num::{One, Zero};
use thiserror::Error;

use crate::geometry::{LatticeBasis, PointConfig};
use crate::pseries::{ExponentGrid, PuiseuxSeries};
use crate::scalars::{invgamma_ratio, rint, Gaussian, Rat, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GammaError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("gamma - gamma_ref is not in the rational row span of the lattice basis")]
    OffsetUnsolvable,
    #[error("series support leaves the positive lattice orthant at {0:?}")]
    NegativeSupport(Vec<i64>),
    #[error("vector is not in the lattice of relations")]
    NotInLattice,
}

/// `z^γ · Σ_m c(m) z^{Bᵀm}` with exact Gaussian-rational coefficients indexed
/// by lattice coordinates m, supported in the ℓ1-ball of the given radius.
#[derive(Debug, Clone)]
pub struct TwistedSeries {
    pub gamma: Vec<Rat>,
    pub basis: LatticeBasis,
    pub coeffs: BTreeMap<Vec<i64>, Gaussian>,
    pub radius: i64,
}

/// Γ-series coefficients on the lattice: `c(m) = ∏_i invgamma_ratio(γ_i, (Bᵀm)_i)`,
/// with `c(0) = 1`. Support is limited to ‖m‖₁ ≤ radius; the reciprocal-Gamma
/// convention kills everything outside the convergence cone of γ.
pub fn gamma_series(
    basis: &LatticeBasis,
    gamma: &[Rat],
    radius: i64,
) -> Result<TwistedSeries, GammaError> {
    let d = basis.dim();
    let mut coeffs = BTreeMap::new();
    for m in l1_ball(d, radius) {
        let l = basis.relation(&m);
        let mut c = Rat::one();
        let mut zero = false;
        for (i, g) in gamma.iter().enumerate() {
            let f = invgamma_ratio(g, l[i])?;
            if f.is_zero() {
                zero = true;
                break;
            }
            c *= f;
        }
        if !zero {
            coeffs.insert(m, Gaussian::from_rat(c));
        }
    }
    Ok(TwistedSeries { gamma: gamma.to_vec(), basis: basis.clone(), coeffs, radius })
}

/// All m ∈ Z^d with ‖m‖₁ ≤ radius.
pub fn l1_ball(d: usize, radius: i64) -> Vec<Vec<i64>> {
    fn rec(out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, pos: usize, left: i64) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in -left..=left {
            cur[pos] = v;
            rec(out, cur, pos + 1, left - v.abs());
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    rec(&mut out, &mut cur, 0, radius);
    out
}

/// The dehomogenization frame of a family: the reference γ, the classical
/// variable grid, and the signs σ_j relating classical variables to the
/// lattice monomials (`x_j = σ_j · z^{b_j}`).
#[derive(Debug, Clone)]
pub struct DehomFrame {
    pub gamma_ref: Vec<Rat>,
    pub grid: ExponentGrid,
    pub signs: Vec<i8>,
}

impl DehomFrame {
    /// Twist factor turning a t-monomial coefficient into the classical one:
    /// `σ_j^{e_j/k_j}` per variable with the canonical phase `(−1)^{1/2} = i`.
    fn twist(&self, key: &[i64]) -> Gaussian {
        let mut t = Gaussian::one();
        for (j, &e) in key.iter().enumerate() {
            if self.signs[j] >= 0 {
                continue;
            }
            let k = self.grid.ram()[j];
            assert!(k <= 2, "sign twist only supported for ramification <= 2");
            let phase = if k == 1 { Gaussian::from_i64(-1) } else { Gaussian::i() };
            t = t * phase.powi(e.rem_euclid(4));
        }
        t
    }
}

/// Rewrite a twisted series as a Puiseux series in the d classical variables,
/// with monomial offset δ solving γ − γ_ref = Bᵀδ. Coefficients are twisted by
/// the frame signs so the result lives in the classical variables.
pub fn dehomogenize(ts: &TwistedSeries, frame: &DehomFrame) -> Result<PuiseuxSeries, GammaError> {
    let diff: Vec<Rat> = ts.gamma.iter().zip(&frame.gamma_ref).map(|(a, b)| a - b).collect();
    let delta = ts
        .basis
        .rational_coordinates(&diff)
        .ok_or(GammaError::OffsetUnsolvable)?;
    let d = ts.basis.dim();
    let ram = frame.grid.ram();
    let mut terms = Vec::with_capacity(ts.coeffs.len());
    for (m, c) in &ts.coeffs {
        if m.iter().any(|&e| e < 0) {
            return Err(GammaError::NegativeSupport(m.clone()));
        }
        let key: Vec<i64> = (0..d).map(|j| m[j] * ram[j] as i64).collect();
        let coeff = c * &frame.twist(&key);
        terms.push((key, coeff));
    }
    Ok(PuiseuxSeries::from_terms(frame.grid.clone(), delta, ts.radius, terms))
}

/// `z^μ · S(t)` with `t_j = z^{b_j}`: the homogeneous carrier for the
/// structure and Euler checks. S may be Puiseux in t.
#[derive(Debug, Clone)]
pub struct HomogenizedSeries {
    pub mu: Vec<Rat>,
    pub basis: LatticeBasis,
    pub series: PuiseuxSeries,
}

impl HomogenizedSeries {
    /// Embed a twisted series canonically (S in plain t-coordinates).
    pub fn from_twisted(ts: &TwistedSeries, grid: &ExponentGrid) -> Result<Self, GammaError> {
        let d = ts.basis.dim();
        let ram = grid.ram();
        let mut terms = Vec::with_capacity(ts.coeffs.len());
        for (m, c) in &ts.coeffs {
            if m.iter().any(|&e| e < 0) {
                return Err(GammaError::NegativeSupport(m.clone()));
            }
            let key: Vec<i64> = (0..d).map(|j| m[j] * ram[j] as i64).collect();
            terms.push((key, c.clone()));
        }
        let series = PuiseuxSeries::from_terms(
            grid.clone(),
            vec![Rat::zero(); d],
            ts.radius,
            terms,
        );
        Ok(HomogenizedSeries { mu: ts.gamma.clone(), basis: ts.basis.clone(), series })
    }

    /// Homogenize a classical-variable Puiseux series: μ = γ_ref + Bᵀ·offset
    /// and S carries the same keys with the sign twist undone.
    pub fn from_classical(s: &PuiseuxSeries, basis: &LatticeBasis, frame: &DehomFrame) -> Self {
        let n = basis.npoints();
        let d = basis.dim();
        let offset = s.offset();
        let mu: Vec<Rat> = (0..n)
            .map(|i| {
                let mut acc = frame.gamma_ref[i].clone();
                for j in 0..d {
                    acc += &offset[j] * rint(basis.row(j)[i]);
                }
                acc
            })
            .collect();
        let terms: Vec<(Vec<i64>, Gaussian)> = s
            .terms()
            .map(|(m, c)| (m.0.clone(), c * &frame.twist(&m.0).inv()))
            .collect();
        let series = PuiseuxSeries::from_terms(
            s.grid().clone(),
            vec![Rat::zero(); d],
            s.order(),
            terms,
        );
        HomogenizedSeries { mu, basis: basis.clone(), series }
    }

    /// Exact action of ∂_i: μ ← μ − e_i and S ← (μ_i + Σ_j B_{j,i} θ_{t_j}) S.
    pub fn apply_partial(&self, i: usize) -> Self {
        let mut s = self.series.scale(&Gaussian::from_rat(self.mu[i].clone()));
        for j in 0..self.basis.dim() {
            let b = self.basis.row(j)[i];
            if b != 0 {
                s = s.add(&self.series.theta(j).scale(&Gaussian::from_i64(b)));
            }
        }
        let mut mu = self.mu.clone();
        mu[i] = &mu[i] - Rat::one();
        HomogenizedSeries { mu, basis: self.basis.clone(), series: s }
    }
}

/// Residual of the structure equation for l ∈ L: computes
/// `(∏_{l_i>0} ∂_i^{l_i}) hs − (∏_{l_i<0} ∂_i^{−l_i}) hs`, aligns the two
/// sides through the t-monomial of l, and returns the series difference.
/// Zero up to the valid order iff the structure equation holds there.
pub fn structure_residual(hs: &HomogenizedSeries, l: &[i64]) -> Result<PuiseuxSeries, GammaError> {
    let m = hs.basis.coordinates(l).ok_or(GammaError::NotInLattice)?;
    let mut pos = hs.clone();
    let mut neg = hs.clone();
    for (i, &li) in l.iter().enumerate() {
        for _ in 0..li.max(0) {
            pos = pos.apply_partial(i);
        }
        for _ in 0..(-li).max(0) {
            neg = neg.apply_partial(i);
        }
    }
    // μ_pos − μ_neg = −l = Bᵀ(−m): bring the positive side into the negative
    // side's frame by multiplying with t^{−m}
    let shift: Vec<Rat> = m.iter().map(|&c| rint(-c)).collect();
    Ok(pos.series.mul_monomial(&shift).sub(&neg.series))
}

/// Residuals of the Euler equations, one per row of A: computed literally as
/// `Σ_i a_{ji}(μ_i + Σ_k B_{k,i}θ_k)S − β_j S`. Algebraically this reduces to
/// `((A·μ)_j − β_j)·S` because A·Bᵀ = 0; the reduction is asserted as a
/// property in the tests, not assumed here.
pub fn euler_residual(
    hs: &HomogenizedSeries,
    cfg: &PointConfig,
    beta: &[Rat],
) -> Vec<PuiseuxSeries> {
    let d = hs.basis.dim();
    let thetas: Vec<PuiseuxSeries> = (0..d).map(|j| hs.series.theta(j)).collect();
    (0..cfg.rank())
        .map(|j| {
            let mut scalar = -beta[j].clone();
            for i in 0..cfg.npoints() {
                let a = cfg.matrix()[j][i];
                if a != 0 {
                    scalar += &hs.mu[i] * rint(a);
                }
            }
            let mut res = hs.series.scale(&Gaussian::from_rat(scalar));
            for (k, th) in thetas.iter().enumerate() {
                let mut w = 0i64;
                for i in 0..cfg.npoints() {
                    w += cfg.matrix()[j][i] * hs.basis.row(k)[i];
                }
                if w != 0 {
                    res = res.add(&th.scale(&Gaussian::from_i64(w)));
                }
            }
            res
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gamma_candidates;
    use crate::scalars::rat;

    fn f4_setup() -> (PointConfig, LatticeBasis) {
        let cfg = PointConfig::new(vec![
            vec![1, 0, 0, 0, 1, 1],
            vec![0, 1, 0, 0, 1, 1],
            vec![0, 0, 1, 0, -1, 0],
            vec![0, 0, 0, 1, 0, -1],
        ])
        .unwrap();
        let basis = LatticeBasis::from_rows(
            &cfg,
            vec![vec![-1, -1, 1, 0, 1, 0], vec![-1, -1, 0, 1, 0, 1]],
        )
        .unwrap();
        (cfg, basis)
    }

    fn f4_gamma1(r: &Rat) -> Vec<Rat> {
        vec![-r.clone(), -(r + rat(1, 2)), rat(-1, 2), rat(-1, 2), rat(0, 1), rat(0, 1)]
    }

    #[test]
    fn f4_gamma_series_coefficients() {
        let (_, basis) = f4_setup();
        let r = rat(1, 3);
        let ts = gamma_series(&basis, &f4_gamma1(&r), 6).unwrap();
        assert_eq!(ts.coeffs.get(&vec![0, 0]).unwrap(), &Gaussian::one());
        // c(1,0) = 2r(r+1/2) = 5/9 at r = 1/3
        assert_eq!(ts.coeffs.get(&vec![1, 0]).unwrap(), &Gaussian::from_rat(rat(5, 9)));
        // c(-1,0) vanishes through the γ₅ = 0 slot
        assert!(ts.coeffs.get(&vec![-1, 0]).is_none());
    }

    #[test]
    fn degenerate_base_propagates() {
        let (_, basis) = f4_setup();
        let gamma =
            vec![rat(0, 1), rat(-1, 1), rat(-1, 2), rat(-1, 2), rat(0, 1), rat(0, 1)];
        assert!(matches!(
            gamma_series(&basis, &gamma, 3),
            Err(GammaError::Scalar(ScalarError::DegenerateBase(_)))
        ));
    }

    /// Direct F4 double sum: Σ (a)_{m+n}(b)_{m+n}/((c1)_m (c2)_n m! n!) x^m y^n.
    fn f4_direct_coeff(a: &Rat, b: &Rat, c1: &Rat, c2: &Rat, m: i64, n: i64) -> Rat {
        fn poch(x: &Rat, k: i64) -> Rat {
            let mut p = Rat::one();
            for j in 0..k {
                p *= x + rint(j);
            }
            p
        }
        let num = poch(a, m + n) * poch(b, m + n);
        let den = poch(c1, m) * poch(c2, n) * poch(&Rat::one(), m) * poch(&Rat::one(), n);
        num / den
    }

    #[test]
    fn f4_dehomogenization_matches_double_sum() {
        let (_, basis) = f4_setup();
        let r = rat(1, 3);
        let gamma = f4_gamma1(&r);
        let ts = gamma_series(&basis, &gamma, 16).unwrap();
        let frame = DehomFrame {
            gamma_ref: gamma.clone(),
            grid: ExponentGrid::uniform(2, 2),
            signs: vec![1, 1],
        };
        let s = dehomogenize(&ts, &frame).unwrap();
        let (a, b, c1, c2) = (r.clone(), &r + rat(1, 2), rat(1, 2), rat(1, 2));
        for m in 0..4 {
            for n in 0..4 {
                let got = s.coeff(&[2 * m, 2 * n]);
                let want = f4_direct_coeff(&a, &b, &c1, &c2, m, n);
                assert_eq!(got, Gaussian::from_rat(want), "coefficient ({m},{n})");
            }
        }
    }

    #[test]
    fn f4_basis_offsets() {
        let (cfg, basis) = f4_setup();
        let r = rat(1, 3);
        let beta = vec![-r.clone(), -(&r + rat(1, 2)), rat(-1, 2), rat(-1, 2)];
        let frame = DehomFrame {
            gamma_ref: f4_gamma1(&r),
            grid: ExponentGrid::uniform(2, 2),
            signs: vec![1, 1],
        };
        let simplices: Vec<Vec<usize>> =
            vec![vec![0, 1, 2, 3], vec![0, 1, 2, 5], vec![0, 1, 3, 4], vec![0, 1, 4, 5]];
        let expected = [
            [rat(0, 1), rat(0, 1)],
            [rat(0, 1), rat(1, 2)],
            [rat(1, 2), rat(0, 1)],
            [rat(1, 2), rat(1, 2)],
        ];
        for (simplex, want) in simplices.iter().zip(&expected) {
            let gammas = gamma_candidates(&cfg, &basis, &beta, simplex).unwrap();
            assert_eq!(gammas.len(), 1);
            let ts = gamma_series(&basis, &gammas[0], 4).unwrap();
            let s = dehomogenize(&ts, &frame).unwrap();
            assert_eq!(s.offset(), want.as_slice());
        }
        let ts = gamma_series(&basis, &f4_gamma1(&r), 4).unwrap();
        assert_eq!(dehomogenize(&ts, &frame).unwrap().offset(), &[rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn partial_on_bare_monomial() {
        let (_, basis) = f4_setup();
        let mu = vec![rat(2, 3), rat(-1, 3), rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)];
        let grid = ExponentGrid::uniform(2, 2);
        let hs = HomogenizedSeries {
            mu: mu.clone(),
            basis: basis.clone(),
            series: PuiseuxSeries::one(grid, 6),
        };
        let d1 = hs.apply_partial(0);
        assert_eq!(d1.mu[0], rat(-1, 3));
        assert_eq!(d1.series.coeff(&[0, 0]), Gaussian::from_rat(rat(2, 3)));
        let a = hs.apply_partial(0).apply_partial(1);
        let b = hs.apply_partial(1).apply_partial(0);
        assert_eq!(a.mu, b.mu);
        assert!(a.series.first_mismatch(&b.series).is_none());
    }

    #[test]
    fn gamma_series_satisfies_structure_and_euler() {
        let (cfg, basis) = f4_setup();
        let r = rat(2, 5);
        let gamma = f4_gamma1(&r);
        let beta = vec![-r.clone(), -(&r + rat(1, 2)), rat(-1, 2), rat(-1, 2)];
        let ts = gamma_series(&basis, &gamma, 6).unwrap();
        let hs = HomogenizedSeries::from_twisted(&ts, &ExponentGrid::uniform(2, 2)).unwrap();
        for row in basis.rows() {
            let res = structure_residual(&hs, row).unwrap();
            assert!(res.is_zero(), "structure residual for {row:?}: {res}");
        }
        for res in euler_residual(&hs, &cfg, &beta) {
            assert!(res.is_zero(), "euler residual: {res}");
        }
    }

    #[test]
    fn structure_residual_of_bare_monomial() {
        let (_, basis) = f4_setup();
        let r = rat(1, 3);
        // z^μ with μ = γ₁: both □ sides are single monomials, one vanishing;
        // the surviving coefficient is μ₁μ₂ = r(r+1/2) up to the □ sign.
        let hs = HomogenizedSeries {
            mu: f4_gamma1(&r),
            basis: basis.clone(),
            series: PuiseuxSeries::one(ExponentGrid::uniform(2, 2), 6),
        };
        let res = structure_residual(&hs, &[-1, -1, 1, 0, 1, 0]).unwrap();
        let (_, c) = res.first_nonzero().expect("nonzero residual");
        let want = &r * (&r + rat(1, 2));
        assert_eq!(c, Gaussian::from_rat(-want));
    }

    #[test]
    fn euler_residual_detects_beta_shift() {
        let (cfg, basis) = f4_setup();
        let r = rat(1, 3);
        let gamma = f4_gamma1(&r);
        let mut beta = vec![-r.clone(), -(&r + rat(1, 2)), rat(-1, 2), rat(-1, 2)];
        let hs = HomogenizedSeries {
            mu: gamma,
            basis,
            series: PuiseuxSeries::one(ExponentGrid::uniform(2, 2), 6),
        };
        let ok = euler_residual(&hs, &cfg, &beta);
        assert!(ok.iter().all(|s| s.is_zero()));
        beta[0] = &beta[0] + Rat::one();
        let bad = euler_residual(&hs, &cfg, &beta);
        assert_eq!(bad[0].coeff(&[0, 0]), Gaussian::from_i64(-1));
        assert!(bad[1..].iter().all(|s| s.is_zero()));
    }
}
