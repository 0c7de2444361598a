use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::simplex::{maximize, LpSolution};
use crate::error::{Error, Result};

/// Largest horizon the dense simplex is asked to handle.
pub const MAX_LP_HORIZON: usize = 12;
const DUAL_TOLERANCE: f64 = 1e-9;

/// x^n by repeated multiplication; unlike `powi` the result does not depend
/// on how the compiler lowers the call.
fn ipow(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpVariant {
    SmVsOpt,
    GreedyCommitVsOpt,
}

impl LpVariant {
    pub fn name(self) -> &'static str {
        match self {
            LpVariant::SmVsOpt => "sm_vs_opt",
            LpVariant::GreedyCommitVsOpt => "greedy_commit_vs_opt",
        }
    }

    /// Coefficient of Y_j in the domination rows.
    fn domination_factor(self) -> f64 {
        match self {
            LpVariant::SmVsOpt => 2.0,
            LpVariant::GreedyCommitVsOpt => 1.0,
        }
    }

    /// Smallest t for which the printed closed forms are defined.
    fn certificate_min_t(self) -> usize {
        match self {
            LpVariant::SmVsOpt => 2,
            LpVariant::GreedyCommitVsOpt => 3,
        }
    }

    /// t/(t−1) or t/(t−2).
    fn base(self, t: usize) -> f64 {
        let t = t as f64;
        match self {
            LpVariant::SmVsOpt => t / (t - 1.0),
            LpVariant::GreedyCommitVsOpt => t / (t - 2.0),
        }
    }
}

impl fmt::Display for LpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "sm" | "sm_vs_opt" => Ok(LpVariant::SmVsOpt),
            "gc" | "greedy_commit" | "greedy_commit_vs_opt" => Ok(LpVariant::GreedyCommitVsOpt),
            _ => Err(Error::Domain(format!("unknown LP variant {s:?}"))),
        }
    }
}

/// Sparse `Σ coeff·x ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpRow {
    pub label: String,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Primal over X_i, X_{i,j}, Y_j, laid out in that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorLp {
    pub t: usize,
    pub variant: LpVariant,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl FactorLp {
    pub fn var_count(&self) -> usize {
        self.t * self.t + 2 * self.t
    }

    /// Index of X_i, 1-based i.
    pub fn x(&self, i: usize) -> usize {
        i - 1
    }

    /// Index of X_{i,j}, 1-based.
    pub fn xx(&self, i: usize, j: usize) -> usize {
        self.t + (i - 1) * self.t + (j - 1)
    }

    /// Index of Y_j, 1-based.
    pub fn y(&self, j: usize) -> usize {
        self.t + self.t * self.t + (j - 1)
    }

    pub fn add_row(&mut self, label: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(LpRow { label: label.into(), coeffs, rhs });
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// First row (by position) that `x` violates beyond `tol`, if any.
    pub fn violated_row(&self, x: &[f64], tol: f64) -> Option<usize> {
        if x.iter().any(|&v| v < -tol) {
            return Some(self.rows.len());
        }
        self.rows.iter().position(|row| {
            let lhs: f64 = row.coeffs.iter().map(|&(k, c)| c * x[k]).sum();
            lhs > row.rhs + tol
        })
    }

    fn dense(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.var_count();
        let a = self
            .rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(k, c) in &row.coeffs {
                    dense[k] += c;
                }
                dense
            })
            .collect();
        (a, self.rows.iter().map(|r| r.rhs).collect())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        if self.t > MAX_LP_HORIZON {
            return Err(Error::LimitExceeded { what: "lp horizon", actual: self.t, limit: MAX_LP_HORIZON });
        }
        let (a, b) = self.dense();
        maximize(&self.objective, &a, &b)
    }
}

pub fn build_primal(t: usize, variant: LpVariant) -> Result<FactorLp> {
    if t == 0 {
        return Err(Error::Domain("LP horizon must be at least 1".into()));
    }
    let mut lp = FactorLp { t, variant, objective: Vec::new(), rows: Vec::new() };
    let n = lp.var_count();
    lp.objective = (0..n).map(|k| if k < t + t * t { 1.0 } else { 0.0 }).collect();
    let dom = variant.domination_factor();
    for i in 1..=t {
        for j in 1..=t {
            let mut coeffs = vec![(lp.x(i), 1.0)];
            coeffs.extend((j..=t).map(|q| (lp.xx(i, q), 1.0)));
            coeffs.push((lp.y(j), -dom));
            lp.add_row(format!("domination[{i},{j}]"), coeffs, 0.0);
        }
    }
    for j in 1..=t {
        let mut coeffs: Vec<(usize, f64)> = (1..=t).map(|i| (lp.xx(i, j), 1.0)).collect();
        coeffs.push((lp.y(j), -2.0));
        lp.add_row(format!("charging[{j}]"), coeffs, 0.0);
    }
    let coeffs = (1..=t).map(|j| (lp.y(j), 1.0)).collect();
    lp.add_row("normalization", coeffs, 1.0);
    Ok(lp)
}

pub fn solve_lp(lp: &FactorLp) -> Result<f64> {
    Ok(lp.solve()?.objective)
}

/// Optimum of the primal at horizon t: 2 + 2/(b^t − 1) with b the variant's
/// base, written with ρ = b^{−t} so it stays finite for every t ≥ 1.
pub fn u_closed_form(t: usize, variant: LpVariant) -> Result<f64> {
    if t == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let tf = t as f64;
    let shift = match variant {
        LpVariant::SmVsOpt => 1.0,
        LpVariant::GreedyCommitVsOpt => 2.0,
    };
    let rho = ipow((tf - shift) / tf, t);
    Ok(2.0 + 2.0 * rho / (1.0 - rho))
}

/// lim_{t→∞} u(t).
pub fn u_limit(variant: LpVariant) -> f64 {
    match variant {
        LpVariant::SmVsOpt => 2.0 + 2.0 / (E - 1.0),
        LpVariant::GreedyCommitVsOpt => 2.0 + 2.0 / (E * E - 1.0),
    }
}

pub fn approximation_factor(t: usize, variant: LpVariant) -> Result<f64> {
    check_domain(t, variant)?;
    Ok(1.0 / u_closed_form(t, variant)?)
}

fn check_domain(t: usize, variant: LpVariant) -> Result<()> {
    let min = variant.certificate_min_t();
    if t < min {
        return Err(Error::Domain(format!("{variant} closed forms need t >= {min}, got {t}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateForm {
    /// The published expressions, evaluated as written.
    Printed,
    /// The exactly optimal dual at this horizon.
    FiniteHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate {
    pub t: usize,
    pub variant: LpVariant,
    pub form: CertificateForm,
    /// `f[i][j]`, 0-based.
    pub f: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub u: f64,
}

pub fn dual_certificate(t: usize, variant: LpVariant, form: CertificateForm) -> Result<DualCertificate> {
    check_domain(t, variant)?;
    let tf = t as f64;
    let b = variant.base(t);
    let bt = ipow(b, t);
    let u = u_closed_form(t, variant)?;
    let (scale, c): (f64, Vec<f64>) = match (form, variant) {
        (CertificateForm::Printed, LpVariant::SmVsOpt) => (
            1.0 / (1.0 + tf * (E - 1.0)),
            (1..=t).map(|j| 1.0 - (ipow(b, j) - 1.0) / (b * E - 1.0)).collect(),
        ),
        (CertificateForm::Printed, LpVariant::GreedyCommitVsOpt) => (
            2.0 / (tf * (E * E - 1.0)),
            (1..=t).map(|j| 1.0 - (ipow(b, j) - 1.0) / (b * (E * E - 1.0))).collect(),
        ),
        (CertificateForm::FiniteHorizon, _) => {
            let shift = tf / b;
            let scale = match variant {
                LpVariant::SmVsOpt => 1.0 / (shift * (bt - 1.0)),
                LpVariant::GreedyCommitVsOpt => 2.0 / (shift * (bt - 1.0)),
            };
            (scale, (1..=t).map(|j| 1.0 - (ipow(b, j) - 1.0) / (bt - 1.0)).collect())
        }
    };
    let row: Vec<f64> = (0..t).map(|j| scale * ipow(b, j)).collect();
    Ok(DualCertificate { t, variant, form, f: vec![row; t], c, u })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCheck {
    pub feasible: bool,
    /// Label of the first violated constraint.
    pub violated: Option<String>,
    /// Amount by which it is violated.
    pub excess: f64,
}

/// Checks every dual row and sign constraint within 1e−9.
pub fn verify_dual_feasible(cert: &DualCertificate, t: usize, variant: LpVariant) -> DualCheck {
    let fail = |label: String, excess: f64| DualCheck { feasible: false, violated: Some(label), excess };
    if cert.t != t || cert.f.len() != t || cert.c.len() != t || cert.f.iter().any(|r| r.len() != t) {
        return fail("dimensions".into(), f64::NAN);
    }
    let tol = DUAL_TOLERANCE;
    if cert.u < -tol {
        return fail("u >= 0".into(), -cert.u);
    }
    for i in 0..t {
        for j in 0..t {
            if cert.f[i][j] < -tol {
                return fail(format!("F[{},{}] >= 0", i + 1, j + 1), -cert.f[i][j]);
            }
        }
    }
    for j in 0..t {
        if cert.c[j] < -tol {
            return fail(format!("c[{}] >= 0", j + 1), -cert.c[j]);
        }
    }
    for i in 0..t {
        for j in 0..t {
            let lhs: f64 = cert.f[i][..=j].iter().sum::<f64>() + cert.c[j];
            if lhs < 1.0 - tol {
                return fail(format!("prefix[{},{}]", i + 1, j + 1), 1.0 - lhs);
            }
        }
    }
    let col_factor = match variant {
        LpVariant::SmVsOpt => 2.0,
        LpVariant::GreedyCommitVsOpt => 1.0,
    };
    for j in 0..t {
        let lhs = col_factor * (0..t).map(|i| cert.f[i][j]).sum::<f64>() + 2.0 * cert.c[j];
        if lhs > cert.u + tol {
            return fail(format!("column[{}]", j + 1), lhs - cert.u);
        }
    }
    for i in 0..t {
        let s: f64 = cert.f[i].iter().sum();
        if s < 1.0 - tol {
            return fail(format!("row_sum[{}]", i + 1), 1.0 - s);
        }
    }
    DualCheck { feasible: true, violated: None, excess: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOTH: [LpVariant; 2] = [LpVariant::SmVsOpt, LpVariant::GreedyCommitVsOpt];

    /// Independent evaluation of the published u(t) expressions.
    fn u_printed(t: usize, variant: LpVariant) -> f64 {
        let tf = t as f64;
        match variant {
            LpVariant::SmVsOpt => {
                let a = (tf - 1.0).powi(t as i32);
                2.0 + 2.0 * a / (tf.powi(t as i32) - a)
            }
            LpVariant::GreedyCommitVsOpt => {
                let a = (tf - 2.0).powi(t as i32);
                let b = (tf - 2.0).powi(t as i32 - 1);
                2.0 + 2.0 * a / (2.0 * b + tf.powi(t as i32) - tf * b)
            }
        }
    }

    #[test]
    fn shape() {
        let lp = build_primal(3, LpVariant::SmVsOpt).unwrap();
        assert_eq!(lp.var_count(), 15);
        assert_eq!(lp.rows.len(), 9 + 3 + 1);
        assert!(build_primal(0, LpVariant::SmVsOpt).is_err());
    }

    #[test]
    fn t1_optima() {
        assert!((solve_lp(&build_primal(1, LpVariant::SmVsOpt).unwrap()).unwrap() - 2.0).abs() < 1e-9);
        // X_1 + X_11 ≤ Y_1 ≤ 1 caps the objective at 1
        assert!((solve_lp(&build_primal(1, LpVariant::GreedyCommitVsOpt).unwrap()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn forced_zero_row_gives_zero() {
        let mut lp = build_primal(1, LpVariant::SmVsOpt).unwrap();
        let y = lp.y(1);
        lp.add_row("y = 0", vec![(y, 1.0)], 0.0);
        assert_eq!(solve_lp(&lp).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_printed_expression() {
        for v in BOTH {
            for t in v.certificate_min_t()..=40 {
                let a = u_closed_form(t, v).unwrap();
                let b = u_printed(t, v);
                assert!((a - b).abs() < 1e-9 * b, "{v} t={t}");
            }
        }
    }

    #[test]
    fn simplex_matches_closed_form() {
        for v in BOTH {
            for t in 1..=8 {
                let lp = build_primal(t, v).unwrap();
                let sol = lp.solve().unwrap();
                assert!((sol.objective - u_closed_form(t, v).unwrap()).abs() < 1e-7, "{v} t={t}");
                assert_eq!(lp.violated_row(&sol.x, 1e-9), None);
                assert!((lp.objective_at(&sol.x) - sol.objective).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sm_t2_value() {
        assert!((u_closed_form(2, LpVariant::SmVsOpt).unwrap() - 8.0 / 3.0).abs() < 1e-12);
        assert!((approximation_factor(2, LpVariant::SmVsOpt).unwrap() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn increasing_and_bounded() {
        for v in BOTH {
            let mut prev = 0.0;
            for t in v.certificate_min_t()..=200 {
                let u = u_closed_form(t, v).unwrap();
                assert!(u > prev, "{v} t={t}");
                assert!(u < u_limit(v));
                prev = u;
            }
            assert!((prev - u_limit(v)).abs() < 0.02);
        }
        assert!(1.0 / u_limit(LpVariant::SmVsOpt) >= 0.316);
        assert!(1.0 / u_limit(LpVariant::GreedyCommitVsOpt) >= 0.43);
        assert!((1.0 / u_limit(LpVariant::SmVsOpt) - (E - 1.0) / (2.0 * E)).abs() < 1e-12);
    }

    #[test]
    fn domains() {
        assert!(dual_certificate(1, LpVariant::SmVsOpt, CertificateForm::Printed).is_err());
        assert!(dual_certificate(2, LpVariant::GreedyCommitVsOpt, CertificateForm::FiniteHorizon).is_err());
        assert!(approximation_factor(2, LpVariant::GreedyCommitVsOpt).is_err());
    }

    #[test]
    fn finite_horizon_certificates_are_feasible_and_tight() {
        for v in BOTH {
            for t in v.certificate_min_t()..=12 {
                let cert = dual_certificate(t, v, CertificateForm::FiniteHorizon).unwrap();
                let check = verify_dual_feasible(&cert, t, v);
                assert!(check.feasible, "{v} t={t}: {check:?}");
                if t <= 8 {
                    let opt = solve_lp(&build_primal(t, v).unwrap()).unwrap();
                    assert!((opt - cert.u).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn printed_certificates_fall_short_of_the_row_sum_at_finite_t() {
        // row sums of F are t·scale·(b^t − 1)/(b − 1) < 1 for every finite t
        let cert = dual_certificate(5, LpVariant::SmVsOpt, CertificateForm::Printed).unwrap();
        let s: f64 = cert.f[0].iter().sum();
        assert!((s - 0.8557).abs() < 1e-3);
        let check = verify_dual_feasible(&cert, 5, LpVariant::SmVsOpt);
        assert!(!check.feasible);
        assert_eq!(check.violated.as_deref(), Some("row_sum[1]"));
        // the row sums approach 1 as t grows
        let big = dual_certificate(2000, LpVariant::SmVsOpt, CertificateForm::Printed).unwrap();
        assert!((big.f[0].iter().sum::<f64>() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn printed_gc_certificate_has_negative_c() {
        let cert = dual_certificate(10, LpVariant::GreedyCommitVsOpt, CertificateForm::Printed).unwrap();
        assert!(cert.c[9] < 0.0);
        assert!(!verify_dual_feasible(&cert, 10, LpVariant::GreedyCommitVsOpt).feasible);
    }

    #[test]
    fn perturbation_names_the_row() {
        let mut cert = dual_certificate(5, LpVariant::SmVsOpt, CertificateForm::FiniteHorizon).unwrap();
        cert.f[2][0] -= 0.5;
        let check = verify_dual_feasible(&cert, 5, LpVariant::SmVsOpt);
        assert!(!check.feasible);
        assert_eq!(check.violated.as_deref(), Some("F[3,1] >= 0"));

        let mut cert = dual_certificate(5, LpVariant::SmVsOpt, CertificateForm::FiniteHorizon).unwrap();
        cert.f[2][4] -= 0.1;
        let check = verify_dual_feasible(&cert, 5, LpVariant::SmVsOpt);
        assert_eq!(check.violated.as_deref(), Some("prefix[3,5]"));
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("sm".parse::<LpVariant>().unwrap(), LpVariant::SmVsOpt);
        assert_eq!("gc".parse::<LpVariant>().unwrap(), LpVariant::GreedyCommitVsOpt);
        assert!("x".parse::<LpVariant>().is_err());
    }
}
