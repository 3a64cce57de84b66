//! The verification layer: basis building, linear decomposition, full family
//! verification, the power relation, and empirical f/g extraction.
//!
//! Every check is exact — "pass" means zero residual to the stated valid
//! order, and every failure carries a mismatch certificate: the lowest
//! monomial at which two series disagree, with both coefficients.

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closedforms::{eval_recipe, EvalCtx, EvalError, FamilySpec, SlotKind};
use crate::gammaseries::{
    dehomogenize, euler_residual, gamma_series, structure_residual, DehomFrame, GammaError,
    HomogenizedSeries,
};
use crate::geometry::{gamma_candidates, simplex_volume, GeomError};
use crate::homops::AnnihilationOutcome;
use crate::pseries::{fmt_exponents, Branch, PuiseuxSeries, SeriesError};
use crate::scalars::{fmt_rat, is_integer, rat, rint, Gaussian, Rat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("resonant parameter r = {0}: 2r is an integer, the basis degenerates")]
    ResonantR(String),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("basis is rank deficient on the probed monomials")]
    RankDeficient,
    #[error("decomposition leaves a nonzero residual at z^({exponents}): lhs {lhs}, rhs {rhs}")]
    ResidualNonzero { exponents: String, lhs: String, rhs: String },
    #[error("family `{0}` has no stated solution coefficients; use the closed-form route")]
    NoCoefficients(String),
    #[error("{0}")]
    Unsupported(String),
}

/// Reject r with 2r ∈ Z (the standing assumption r ∉ ½Z).
pub fn check_nonresonant(r: &Rat) -> Result<(), AnalysisError> {
    if is_integer(&(r * rint(2))) {
        return Err(AnalysisError::ResonantR(fmt_rat(r)));
    }
    Ok(())
}

/// The dehomogenization frame of a family at parameter r.
fn frame_at(fam: &FamilySpec, r: &Rat) -> DehomFrame {
    DehomFrame {
        gamma_ref: fam.gamma_at(0, r),
        grid: fam.grid.clone(),
        signs: fam.signs.clone(),
    }
}

/// One dehomogenized Γ-series per (simplex, γ), count = volume; for families
/// with Horn-only Puiseux monomial solutions those are appended at the end.
pub fn build_basis(
    fam: &FamilySpec,
    r: &Rat,
    order: i64,
) -> Result<Vec<PuiseuxSeries>, AnalysisError> {
    check_nonresonant(r)?;
    let frame = frame_at(fam, r);
    let mut out = Vec::with_capacity(fam.gammas.len() + fam.extra_horn.len());
    for k in 0..fam.gammas.len() {
        let ts = gamma_series(&fam.lattice, &fam.gamma_at(k, r), order)?;
        out.push(dehomogenize(&ts, &frame)?);
    }
    for mono in &fam.extra_horn {
        out.push(mono.eval(&fam.grid, r, order));
    }
    Ok(out)
}

/// The registry linear combination Σ c_k(r)·Φ_k, built from Γ-series. Basis
/// elements whose coefficient vanishes at this r are skipped (this keeps the
/// combination total at parameter values where an unused γ would degenerate).
pub fn basis_combination(
    fam: &FamilySpec,
    r: &Rat,
    order: i64,
) -> Result<PuiseuxSeries, AnalysisError> {
    let coeffs = fam
        .coeffs
        .as_ref()
        .ok_or_else(|| AnalysisError::NoCoefficients(fam.name.clone()))?;
    let frame = frame_at(fam, r);
    let mut acc = PuiseuxSeries::zero(fam.grid.clone(), order);
    for (k, c) in coeffs.iter().enumerate() {
        let scale = c.eval(r);
        if scale.is_zero() {
            continue;
        }
        if k < fam.gammas.len() {
            let ts = gamma_series(&fam.lattice, &fam.gamma_at(k, r), order)?;
            acc = acc.add(&dehomogenize(&ts, &frame)?.scale(&scale));
        } else {
            let mono = &fam.extra_horn[k - fam.gammas.len()];
            acc = acc.add(&mono.eval(&fam.grid, r, order).scale(&scale));
        }
    }
    Ok(acc)
}

/// Exact linear solve of target = Σ c_k·basis_k by matching coefficients on
/// every monomial up to the common valid order; the solution is re-checked on
/// all monomials (overdetermined consistency).
pub fn decompose(
    target: &PuiseuxSeries,
    basis: &[PuiseuxSeries],
) -> Result<Vec<Gaussian>, AnalysisError> {
    let mut all: Vec<PuiseuxSeries> = basis.to_vec();
    all.push(target.clone());
    let aligned = PuiseuxSeries::align_all(&all);
    let order = aligned.iter().map(|s| s.order()).min().unwrap_or(0);
    let k = basis.len();
    let mut keys: Vec<Vec<i64>> = Vec::new();
    for s in &aligned {
        for (m, _) in s.terms() {
            if m.weight() < order && !keys.contains(&m.0) {
                keys.push(m.0.clone());
            }
        }
    }
    keys.sort_by_key(|e| (e.iter().sum::<i64>(), e.clone()));
    // rows: Σ_i basis_i[key]·c_i = target[key]
    let mut rows: Vec<Vec<Gaussian>> = keys
        .iter()
        .map(|key| {
            let mut row: Vec<Gaussian> = (0..k).map(|i| aligned[i].coeff(key)).collect();
            row.push(aligned[k].coeff(key));
            row
        })
        .collect();
    // Gaussian elimination over Q(i)
    let mut pivots: Vec<usize> = Vec::new();
    let mut prow = 0usize;
    for col in 0..k {
        let Some(sel) = (prow..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(prow, sel);
        let p = rows[prow][col].inv();
        for j in col..=k {
            rows[prow][j] = &rows[prow][j] * &p;
        }
        for i in 0..rows.len() {
            if i != prow && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in col..=k {
                    let s = &rows[prow][j] * &f;
                    rows[i][j] -= &s;
                }
            }
        }
        pivots.push(col);
        prow += 1;
        if prow == rows.len() {
            break;
        }
    }
    if pivots.len() < k {
        return Err(AnalysisError::RankDeficient);
    }
    let mut solution = vec![Gaussian::zero(); k];
    for (row, &col) in pivots.iter().enumerate() {
        solution[col] = rows[row][k].clone();
    }
    // residual re-check on ALL monomials to the common order
    let mut combo = PuiseuxSeries::zero(aligned[0].grid().clone(), order)
        .with_offset(aligned[0].offset().to_vec());
    for (i, c) in solution.iter().enumerate() {
        combo = combo.add(&aligned[i].scale(c));
    }
    if let Some(m) = aligned[k].first_mismatch(&combo) {
        return Err(AnalysisError::ResidualNonzero {
            exponents: fmt_exponents(&m.exponents),
            lhs: m.lhs.to_string(),
            rhs: m.rhs.to_string(),
        });
    }
    Ok(solution)
}

/// A first-mismatch certificate in serialized form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Certificate {
    pub exponents: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

impl Certificate {
    fn from_mismatch(m: &crate::pseries::Mismatch) -> Self {
        Certificate {
            exponents: m.exponents.iter().map(fmt_rat).collect(),
            lhs: m.lhs.to_string(),
            rhs: m.rhs.to_string(),
        }
    }

    fn from_first_nonzero(e: &[Rat], c: &Gaussian) -> Self {
        Certificate {
            exponents: e.iter().map(fmt_rat).collect(),
            lhs: c.to_string(),
            rhs: "0".to_string(),
        }
    }
}

/// Status of a single check within a verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_order: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn pass(name: &str, order: Option<i64>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            verified_order: order,
            certificate: None,
            detail: None,
        }
    }

    fn fail(name: &str, certificate: Option<Certificate>, detail: Option<String>) -> Self {
        CheckReport { name: name.into(), passed: false, verified_order: None, certificate, detail }
    }
}

/// Outcome of one branch assignment during the search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchAttempt {
    pub branch: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<CheckReport>,
}

/// Full verification verdict for one (family, r).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub n: usize,
    pub r: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    pub order: i64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub branch_attempts: Vec<BranchAttempt>,
}

fn assignment_label(fam: &FamilySpec, assignment: &[Branch]) -> String {
    if assignment.is_empty() {
        return "-".to_string();
    }
    fam.slots
        .iter()
        .zip(assignment)
        .map(|(s, b)| format!("{}={}", s.name, b.symbol()))
        .collect::<Vec<_>>()
        .join(",")
}

fn assignments(count: usize) -> Vec<Vec<Branch>> {
    let mut out = Vec::with_capacity(1 << count);
    for mask in 0..(1u32 << count) {
        out.push(
            (0..count)
                .map(|i| if mask & (1 << i) == 0 { Branch::Plus } else { Branch::Minus })
                .collect(),
        );
    }
    out
}

/// Run all checks of one family at one r under one branch assignment.
fn run_branch(
    fam: &FamilySpec,
    r: &Rat,
    order: i64,
    eval_order: i64,
    assignment: &[Branch],
    basis: Option<&[PuiseuxSeries]>,
) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let ctx = EvalCtx {
        grid: &fam.grid,
        order: eval_order,
        r,
        slots: &fam.slots,
        assignment,
    };
    let phi = match eval_recipe(&fam.closed_form, &ctx) {
        Ok(phi) => {
            reports.push(CheckReport::pass("closed-form-eval", Some(phi.order())));
            phi
        }
        Err(e) => {
            reports.push(CheckReport::fail("closed-form-eval", None, Some(e.to_string())));
            return reports;
        }
    };
    if !fam.horn_ops.is_empty() {
        for (i, op) in fam.horn_ops.iter().enumerate() {
            let name = format!("horn-annihilation-{}", i + 1);
            match op.annihilation_check(&phi, r) {
                Ok(AnnihilationOutcome::Verified { order: v }) => {
                    reports.push(CheckReport::pass(&name, Some(v)));
                }
                Ok(AnnihilationOutcome::Failed { exponents, coefficient }) => {
                    reports.push(CheckReport::fail(
                        &name,
                        Some(Certificate::from_first_nonzero(&exponents, &coefficient)),
                        None,
                    ));
                }
                Err(e) => reports.push(CheckReport::fail(&name, None, Some(e.to_string()))),
            }
        }
    } else {
        // A-hypergeometric route: structure and Euler residuals of the
        // homogenized closed form
        let hs = HomogenizedSeries::from_classical(&phi, &fam.lattice, &frame_at(fam, r));
        let mut structure_ok = true;
        for row in fam.lattice.rows() {
            match structure_residual(&hs, row) {
                Ok(res) => {
                    if let Some((e, c)) = res.first_nonzero() {
                        reports.push(CheckReport::fail(
                            "gkz-structure",
                            Some(Certificate::from_first_nonzero(&e, &c)),
                            Some(format!("generator {row:?}")),
                        ));
                        structure_ok = false;
                        break;
                    }
                }
                Err(e) => {
                    reports.push(CheckReport::fail("gkz-structure", None, Some(e.to_string())));
                    structure_ok = false;
                    break;
                }
            }
        }
        if structure_ok {
            reports.push(CheckReport::pass("gkz-structure", Some(order)));
        }
        let beta = fam.beta_at(r);
        let residuals = euler_residual(&hs, &fam.config, &beta);
        match residuals.iter().find_map(|res| res.first_nonzero()) {
            None => reports.push(CheckReport::pass("gkz-euler", Some(order))),
            Some((e, c)) => reports.push(CheckReport::fail(
                "gkz-euler",
                Some(Certificate::from_first_nonzero(&e, &c)),
                None,
            )),
        }
    }
    if let (Some(basis), Some(coeffs)) = (basis, fam.coeffs.as_ref()) {
        let mut expected = PuiseuxSeries::zero(fam.grid.clone(), eval_order);
        for (b, c) in basis.iter().zip(coeffs) {
            expected = expected.add(&b.scale(&c.eval(r)));
        }
        match phi.first_mismatch(&expected) {
            None => reports.push(CheckReport::pass("basis-identity", Some(order))),
            Some(m) => reports.push(CheckReport::fail(
                "basis-identity",
                Some(Certificate::from_mismatch(&m)),
                None,
            )),
        }
    }
    for rel in &fam.relations {
        let name = format!("relation-{}", rel.name);
        let lhs = eval_recipe(&rel.lhs, &ctx);
        let rhs = eval_recipe(&rel.rhs, &ctx);
        match (lhs, rhs) {
            (Ok(lhs), Ok(rhs)) => match lhs.first_mismatch(&rhs) {
                None => reports.push(CheckReport::pass(&name, Some(lhs.order().min(rhs.order())))),
                Some(m) => reports.push(CheckReport::fail(
                    &name,
                    Some(Certificate::from_mismatch(&m)),
                    None,
                )),
            },
            (Err(e), _) | (_, Err(e)) => {
                reports.push(CheckReport::fail(&name, None, Some(e.to_string())));
            }
        }
    }
    reports
}

/// Verify one family at one r: branch search over the declared slots, then
/// per-branch Horn annihilation or GKZ structure/Euler residuals, the basis
/// identity against the stated coefficients, and the defining relations.
pub fn verify_family(fam: &FamilySpec, r: &Rat, order: i64) -> Result<Verdict, AnalysisError> {
    check_nonresonant(r)?;
    let eval_order = order + fam.op_shift();
    let basis = if fam.coeffs.is_some() {
        Some(build_basis(fam, r, eval_order)?)
    } else {
        None
    };
    let mut attempts: Vec<BranchAttempt> = Vec::new();
    let mut first_fail_checks: Option<(String, Vec<CheckReport>)> = None;
    for assignment in assignments(fam.slots.len()) {
        let label = assignment_label(fam, &assignment);
        let checks = run_branch(fam, r, order, eval_order, &assignment, basis.as_deref());
        let pass = checks.iter().all(|c| c.passed);
        attempts.push(BranchAttempt {
            branch: label.clone(),
            pass,
            first_failure: checks.iter().find(|c| !c.passed).cloned(),
        });
        if pass {
            return Ok(Verdict {
                family: fam.name.clone(),
                variant: fam.variant.clone(),
                n: fam.n,
                r: fmt_rat(r),
                s: None,
                order,
                pass: true,
                branch: Some(label),
                checks,
                branch_attempts: attempts,
            });
        }
        if first_fail_checks.is_none() {
            first_fail_checks = Some((label, checks));
        }
    }
    let (label, checks) = first_fail_checks.expect("at least one branch attempted");
    Ok(Verdict {
        family: fam.name.clone(),
        variant: fam.variant.clone(),
        n: fam.n,
        r: fmt_rat(r),
        s: None,
        order,
        pass: false,
        branch: Some(label),
        checks,
        branch_attempts: attempts,
    })
}

/// Which route the power relation uses to produce Φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiRoute {
    GammaBasis,
    ClosedForm,
}

/// Check Φ(r)·Φ(s) = Φ((r+s)/2)² to the given order.
pub fn power_relation_check(
    fam: &FamilySpec,
    r: &Rat,
    s: &Rat,
    order: i64,
    route: PhiRoute,
) -> Result<Verdict, AnalysisError> {
    let mid = (r + s) / rint(2);
    let phi = |t: &Rat, assignment: &[Branch]| -> Result<PuiseuxSeries, AnalysisError> {
        match route {
            PhiRoute::GammaBasis => {
                check_nonresonant(t)?;
                basis_combination(fam, t, order)
            }
            PhiRoute::ClosedForm => {
                let ctx = EvalCtx {
                    grid: &fam.grid,
                    order,
                    r: t,
                    slots: &fam.slots,
                    assignment,
                };
                Ok(eval_recipe(&fam.closed_form, &ctx)?)
            }
        }
    };
    let branch_sets = match route {
        PhiRoute::GammaBasis => vec![Vec::new()],
        PhiRoute::ClosedForm => assignments(fam.slots.len()),
    };
    let mut attempts = Vec::new();
    let mut first_fail: Option<(String, CheckReport)> = None;
    for assignment in branch_sets {
        let label = match route {
            PhiRoute::GammaBasis => "gamma-basis".to_string(),
            PhiRoute::ClosedForm => assignment_label(fam, &assignment),
        };
        let outcome = (|| -> Result<CheckReport, AnalysisError> {
            let a = phi(r, &assignment)?;
            let b = phi(s, &assignment)?;
            let c = phi(&mid, &assignment)?;
            let residual = a.mul(&b).sub(&c.mul(&c));
            Ok(match residual.first_nonzero() {
                None => CheckReport::pass("power-relation", Some(residual.order())),
                Some((e, co)) => CheckReport::fail(
                    "power-relation",
                    Some(Certificate::from_first_nonzero(&e, &co)),
                    None,
                ),
            })
        })();
        let report = match outcome {
            Ok(rep) => rep,
            Err(AnalysisError::ResonantR(x)) => return Err(AnalysisError::ResonantR(x)),
            Err(e) => CheckReport::fail("power-relation", None, Some(e.to_string())),
        };
        let pass = report.passed;
        attempts.push(BranchAttempt {
            branch: label.clone(),
            pass,
            first_failure: (!pass).then(|| report.clone()),
        });
        if pass {
            return Ok(Verdict {
                family: fam.name.clone(),
                variant: fam.variant.clone(),
                n: fam.n,
                r: fmt_rat(r),
                s: Some(fmt_rat(s)),
                order,
                pass: true,
                branch: Some(label),
                checks: vec![report],
                branch_attempts: attempts,
            });
        }
        if first_fail.is_none() {
            first_fail = Some((label, report));
        }
    }
    let (label, report) = first_fail.expect("at least one attempt");
    Ok(Verdict {
        family: fam.name.clone(),
        variant: fam.variant.clone(),
        n: fam.n,
        r: fmt_rat(r),
        s: Some(fmt_rat(s)),
        order,
        pass: false,
        branch: Some(label),
        checks: vec![report],
        branch_attempts: attempts,
    })
}

/// Empirical closed-form extraction from the Γ-series combination:
/// f = (Φ(r1)/Φ(r2))^{1/(r1−r2)} and g = Φ(r1)·f^{−r1} (which equals Φ(0)).
pub fn extract_fg(
    fam: &FamilySpec,
    r1: &Rat,
    r2: &Rat,
    order: i64,
) -> Result<(PuiseuxSeries, PuiseuxSeries), AnalysisError> {
    check_nonresonant(r1)?;
    check_nonresonant(r2)?;
    if r1 == r2 {
        return Err(AnalysisError::Unsupported("extract_fg needs r1 != r2".into()));
    }
    let phi1 = basis_combination(fam, r1, order)?;
    let phi2 = basis_combination(fam, r2, order)?;
    let ratio = phi1.mul(&phi2.invert()?);
    let alpha = Rat::one() / (r1 - r2);
    let f = ratio.pow_rational(&alpha, Branch::Plus)?;
    let g = phi1.mul(&f.pow_rational(&-r1.clone(), Branch::Plus)?);
    Ok((f, g))
}

/// Rank census: simplex volume, γ-candidate counts per simplex (and their
/// sum), plus the extra Horn-only solutions with their annihilation and
/// structure-residual status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusReport {
    pub family: String,
    pub n: usize,
    pub volume: i64,
    pub per_simplex: Vec<i64>,
    pub gamma_total: i64,
    pub extra_horn: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horn_only: Option<HornOnlyReport>,
}

/// Checks on a Horn-only Puiseux monomial: the Horn operators must annihilate
/// it, while some structure equation must leave a nonzero residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HornOnlyReport {
    pub horn_annihilated: bool,
    pub structure_residual_nonzero: bool,
}

pub fn rank_census(fam: &FamilySpec) -> Result<CensusReport, AnalysisError> {
    let volume = simplex_volume(&fam.config, &fam.triangulation)?;
    let r = rat(1, 3);
    let beta = fam.beta_at(&r);
    let mut per_simplex = Vec::new();
    for simplex in &fam.triangulation.simplices {
        let cands = gamma_candidates(&fam.config, &fam.lattice, &beta, simplex)?;
        per_simplex.push(cands.len() as i64);
    }
    let gamma_total: i64 = per_simplex.iter().sum();
    let horn_only = if fam.extra_horn.is_empty() {
        None
    } else {
        let order = 8;
        let mono = fam.extra_horn[0].eval(&fam.grid, &r, order);
        let horn_annihilated = fam
            .horn_ops
            .iter()
            .all(|op| matches!(op.annihilation_check(&mono, &r), Ok(o) if o.is_verified()));
        let hs = HomogenizedSeries::from_classical(&mono, &fam.lattice, &frame_at(fam, &r));
        let gens = fam.lattice.rows();
        let mut probes: Vec<Vec<i64>> = gens.to_vec();
        for i in 0..gens.len() {
            for j in (i + 1)..gens.len() {
                probes.push((0..gens[i].len()).map(|t| gens[i][t] + gens[j][t]).collect());
                probes.push((0..gens[i].len()).map(|t| gens[i][t] - gens[j][t]).collect());
            }
        }
        let structure_residual_nonzero = probes
            .iter()
            .any(|l| matches!(structure_residual(&hs, l), Ok(res) if !res.is_zero()));
        Some(HornOnlyReport { horn_annihilated, structure_residual_nonzero })
    };
    Ok(CensusReport {
        family: fam.name.clone(),
        n: fam.n,
        volume,
        per_simplex,
        gamma_total,
        extra_horn: fam.extra_horn.len(),
        horn_only,
    })
}

/// One row of the verify-all matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRow {
    pub family: String,
    pub n: usize,
    pub r: String,
    pub expected: String,
    pub ok: bool,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction: Option<ExtractionReport>,
}

/// For defective tables: empirical f/g extraction with the pair-independence
/// and power-relation consistency checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub pairs: Vec<(String, String)>,
    pub f_consistent: bool,
    pub g_consistent: bool,
    pub power_relation_ok: bool,
}

/// Cross-check extract_fg across r-value pairs and against the power
/// relation, for families whose printed formulas do not validate.
pub fn extraction_consistency(fam: &FamilySpec, order: i64) -> Result<ExtractionReport, AnalysisError> {
    let rs = [rat(1, 3), rat(2, 5), rat(3, 7)];
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    let mut labels = Vec::new();
    for (i, j) in pairs {
        let (f, g) = extract_fg(fam, &rs[i], &rs[j], order)?;
        fs.push(f);
        gs.push(g);
        labels.push((fmt_rat(&rs[i]), fmt_rat(&rs[j])));
    }
    let f_consistent = fs[1..].iter().all(|f| fs[0].first_mismatch(f).is_none());
    let g_consistent = gs[1..].iter().all(|g| gs[0].first_mismatch(g).is_none());
    // Φ(r)·Φ(s) = f^{r+s}·g² with the extracted pair
    let (r, s) = (rat(1, 3), rat(1, 5));
    let lhs = basis_combination(fam, &r, order)?.mul(&basis_combination(fam, &s, order)?);
    let rhs = fs[0]
        .pow_rational(&(&r + &s), Branch::Plus)?
        .mul(&gs[0].mul(&gs[0]));
    let power_relation_ok = lhs.first_mismatch(&rhs).is_none();
    Ok(ExtractionReport { pairs: labels, f_consistent, g_consistent, power_relation_ok })
}

/// The tested parameter values: denominators coprime to 2, r ∉ ½Z.
pub fn standard_r_values() -> Vec<Rat> {
    vec![rat(1, 3), rat(2, 5), rat(3, 7)]
}

/// The full acceptance matrix: every registry family at the standard r values
/// (plus the n = 3, 4 Lauricella rows), fanned out in parallel, merged in
/// deterministic order.
pub fn verify_all(order: Option<i64>) -> Result<Vec<MatrixRow>, AnalysisError> {
    let mut jobs: Vec<(FamilySpec, Rat)> = Vec::new();
    for fam in crate::closedforms::registry() {
        for r in standard_r_values() {
            jobs.push((fam.clone(), r));
        }
    }
    for n in [3usize, 4] {
        let fam = crate::closedforms::lookup("fc2", Some(n), None).expect("registry family");
        jobs.push((fam, rat(2, 5)));
    }
    let rows: Vec<Result<MatrixRow, AnalysisError>> = jobs
        .par_iter()
        .map(|(fam, r)| {
            let ord = order.unwrap_or(fam.default_order);
            let verdict = verify_family(fam, r, ord)?;
            let (expected, ok, extraction) = if fam.validated {
                ("pass".to_string(), verdict.pass, None)
            } else {
                let extraction = extraction_consistency(fam, 10)?;
                let emitted_certificates = !verdict.pass
                    && verdict.branch_attempts.iter().all(|a| a.first_failure.is_some());
                let ok = emitted_certificates
                    && extraction.f_consistent
                    && extraction.g_consistent
                    && extraction.power_relation_ok;
                ("certificate+extraction".to_string(), ok, Some(extraction))
            };
            Ok(MatrixRow {
                family: fam.name.clone(),
                n: fam.n,
                r: fmt_rat(r),
                expected,
                ok,
                verdict,
                extraction,
            })
        })
        .collect();
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedforms::lookup;

    #[test]
    fn resonance_guard() {
        assert!(check_nonresonant(&rat(1, 3)).is_ok());
        assert!(check_nonresonant(&rat(1, 2)).is_err());
        assert!(check_nonresonant(&rint(2)).is_err());
        assert!(check_nonresonant(&Rat::zero()).is_err());
    }

    #[test]
    fn f4_basis_count_and_projection() {
        let fam = lookup("fc2", None, None).unwrap();
        let r = rat(1, 3);
        let basis = build_basis(&fam, &r, 10).unwrap();
        assert_eq!(basis.len(), 4);
        // decomposing a basis element returns a unit coordinate vector
        for (k, b) in basis.iter().enumerate() {
            let c = decompose(b, &basis).unwrap();
            for (i, ci) in c.iter().enumerate() {
                if i == k {
                    assert!(ci.is_one());
                } else {
                    assert!(ci.is_zero());
                }
            }
        }
        // offsets (0,0), (0,1/2), (1/2,0), (1/2,1/2)
        let offsets: Vec<Vec<Rat>> = basis.iter().map(|b| b.offset().to_vec()).collect();
        assert_eq!(
            offsets,
            vec![
                vec![rint(0), rint(0)],
                vec![rint(0), rat(1, 2)],
                vec![rat(1, 2), rint(0)],
                vec![rat(1, 2), rat(1, 2)],
            ]
        );
    }

    #[test]
    fn g3_basis_includes_puiseux_monomial() {
        let fam = lookup("g3", None, None).unwrap();
        let r = rat(1, 3);
        let basis = build_basis(&fam, &r, 8).unwrap();
        assert_eq!(basis.len(), 4);
        // exponent pair ((r−2)/3, −(r+1)/3) = (−5/9, −4/9) at r = 1/3
        assert_eq!(basis[3].offset(), &[rat(-5, 9), rat(-4, 9)]);
    }

    #[test]
    fn lemma1_decomposition() {
        let fam = lookup("fc2", None, None).unwrap();
        let r = rat(1, 3);
        let basis = build_basis(&fam, &r, 12).unwrap();
        // (√x+√y−1)^{−2r} as the closed-form recipe
        let ctx = EvalCtx {
            grid: &fam.grid,
            order: 12,
            r: &r,
            slots: &fam.slots,
            assignment: &[],
        };
        let phi = eval_recipe(&fam.closed_form, &ctx).unwrap();
        let c = decompose(&phi, &basis).unwrap();
        // (1, 2r, 2r, 2r(2r+1)) at r = 1/3
        assert_eq!(c[0], Gaussian::one());
        assert_eq!(c[1], Gaussian::from_rat(rat(2, 3)));
        assert_eq!(c[2], Gaussian::from_rat(rat(2, 3)));
        assert_eq!(c[3], Gaussian::from_rat(rat(10, 9)));
    }

    #[test]
    fn decompose_certificate_on_corrupted_target() {
        let fam = lookup("fc2", None, None).unwrap();
        let r = rat(1, 3);
        let basis = build_basis(&fam, &r, 8).unwrap();
        let junk = PuiseuxSeries::one(fam.grid.clone(), 8)
            .add(&PuiseuxSeries::monomial(
                fam.grid.clone(),
                vec![2, 0],
                Gaussian::i(),
                8,
            ));
        match decompose(&junk, &basis) {
            Err(AnalysisError::ResidualNonzero { .. }) => {}
            other => panic!("expected residual certificate, got {other:?}"),
        }
    }

    #[test]
    fn verify_f4_family2_passes() {
        let fam = lookup("fc2", None, None).unwrap();
        let verdict = verify_family(&fam, &rat(1, 3), 12).unwrap();
        assert!(verdict.pass, "verdict: {verdict:?}");
        assert!(verdict.checks.iter().any(|c| c.name.starts_with("horn-annihilation")));
        assert!(verdict.checks.iter().any(|c| c.name == "basis-identity"));
    }

    #[test]
    fn verify_g3_and_its_broken_variant() {
        let good = lookup("g3", None, None).unwrap();
        let verdict = verify_family(&good, &rat(1, 3), 12).unwrap();
        assert!(verdict.pass, "verdict: {verdict:?}");

        let bad = lookup("g3", None, Some("table4-plus-x")).unwrap();
        let verdict = verify_family(&bad, &rat(1, 3), 12).unwrap();
        assert!(!verdict.pass);
        // some check fails with a certificate at the x^1 coefficient
        let cert = verdict
            .checks
            .iter()
            .find_map(|c| c.certificate.as_ref())
            .expect("certificate");
        assert_eq!(cert.exponents, vec!["1".to_string(), "0".to_string()]);
    }

    #[test]
    fn power_relation_gamma_route() {
        let fam = lookup("fc2", None, None).unwrap();
        let verdict =
            power_relation_check(&fam, &rat(1, 3), &rat(1, 5), 10, PhiRoute::GammaBasis).unwrap();
        assert!(verdict.pass, "{verdict:?}");
        // r = s is trivially zero
        let verdict =
            power_relation_check(&fam, &rat(1, 3), &rat(1, 3), 8, PhiRoute::GammaBasis).unwrap();
        assert!(verdict.pass);
    }

    #[test]
    fn power_relation_closed_route_resonant_values() {
        let fam = lookup("fc2", None, None).unwrap();
        let verdict =
            power_relation_check(&fam, &rint(0), &rint(2), 10, PhiRoute::ClosedForm).unwrap();
        assert!(verdict.pass, "{verdict:?}");
        // the Γ route must reject resonant r
        assert!(matches!(
            power_relation_check(&fam, &rint(0), &rint(2), 8, PhiRoute::GammaBasis),
            Err(AnalysisError::ResonantR(_))
        ));
    }

    #[test]
    fn extract_fg_f4_family2() {
        let fam = lookup("fc2", None, None).unwrap();
        let (f, g) = extract_fg(&fam, &rat(1, 3), &rat(2, 5), 10).unwrap();
        // g = 1
        assert!(g.sub(&PuiseuxSeries::one(fam.grid.clone(), 10)).is_zero());
        // f = (√x+√y−1)^{−2}
        let ctx = EvalCtx {
            grid: &fam.grid,
            order: 10,
            r: &rat(1, 3),
            slots: &fam.slots,
            assignment: &[],
        };
        let f_ref = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx).unwrap();
        assert!(f.first_mismatch(&f_ref).is_none());
    }

    #[test]
    fn census_reports() {
        let g3 = lookup("g3", None, None).unwrap();
        let report = rank_census(&g3).unwrap();
        assert_eq!(report.volume, 3);
        assert_eq!(report.gamma_total, 3);
        assert_eq!(report.extra_horn, 1);
        let horn_only = report.horn_only.unwrap();
        assert!(horn_only.horn_annihilated);
        assert!(horn_only.structure_residual_nonzero);

        let fc3 = lookup("fc2", Some(3), None).unwrap();
        let report = rank_census(&fc3).unwrap();
        assert_eq!(report.volume, 8);
        assert_eq!(report.gamma_total, 8);
    }

    #[test]
    fn verdict_json_round_trip() {
        let fam = lookup("gauss2", None, None).unwrap();
        let verdict = verify_family(&fam, &rat(1, 3), 8).unwrap();
        assert!(verdict.pass, "{verdict:?}");
        let json = serde_json::to_string_pretty(&verdict).unwrap();
        let back: Verdict = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&verdict).unwrap());
    }
}
