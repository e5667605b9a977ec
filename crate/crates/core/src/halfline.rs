//! Scattering on `[0, inf)` with `alpha psi(0) + beta psi'(0) / k = 0`, solved
//! through the trivial extension of the potential to the full line.

use serde::Serialize;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::lowenergy::{eval_series, Branch};
use crate::numerics::{Mat2C, C64, I, ONE, ZERO};
use crate::potential::{truncate, PotentialSpec};
use crate::propagate::transfer_matrix;
use crate::zeroenergy::LowEnergyCoefficients;

#[derive(Clone, Copy, Debug)]
pub enum BoundaryCondition {
    Constant { alpha: C64, beta: C64 },
    /// `k -> (alpha, beta)`; accepted by [`reflection`] only.
    WavenumberDependent(fn(C64) -> (C64, C64)),
}

impl BoundaryCondition {
    pub fn constant(alpha: C64, beta: C64) -> Result<Self> {
        if alpha == ZERO && beta == ZERO {
            return Err(Error::InvalidInput("alpha and beta cannot both vanish".into()));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidInput("alpha and beta must be finite".into()));
        }
        let s = alpha.norm().max(beta.norm());
        Ok(Self::Constant { alpha: alpha / s, beta: beta / s })
    }

    pub fn dirichlet() -> Self {
        Self::Constant { alpha: ONE, beta: ZERO }
    }

    pub fn neumann() -> Self {
        Self::Constant { alpha: ZERO, beta: ONE }
    }

    /// `(alpha, beta)` at `k`, scaled to unit max-modulus.
    pub fn at(&self, k: C64) -> Result<(C64, C64)> {
        let (alpha, beta) = match *self {
            Self::Constant { alpha, beta } => (alpha, beta),
            Self::WavenumberDependent(f) => f(k),
        };
        let s = alpha.norm().max(beta.norm());
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("boundary coefficients at k = {k} are zero or non-finite")));
        }
        Ok((alpha / s, beta / s))
    }

    fn constant_pair(&self) -> Result<(C64, C64)> {
        match *self {
            Self::Constant { alpha, beta } => Ok((alpha, beta)),
            Self::WavenumberDependent(_) => {
                Err(Error::Unsupported("low-energy series need constant alpha and beta".into()))
            }
        }
    }

    /// `(alpha + i beta) / (alpha - i beta)`; exactly 1 for Dirichlet and -1 for Neumann.
    /// `None` when `alpha = i beta`.
    pub fn gamma(&self, k: C64) -> Result<Option<C64>> {
        let (alpha, beta) = self.at(k)?;
        if beta == ZERO {
            return Ok(Some(ONE));
        }
        if alpha == ZERO {
            return Ok(Some(-ONE));
        }
        let den = alpha - I * beta;
        Ok(if den == ZERO { None } else { Some((alpha + I * beta) / den) })
    }

    /// `alpha / beta`, `None` for `beta = 0`.
    pub fn rho(&self) -> Result<Option<C64>> {
        let (alpha, beta) = self.constant_pair()?;
        Ok(if beta == ZERO { None } else { Some(alpha / beta) })
    }
}

#[derive(Clone, Debug)]
pub struct HalfLineProblem {
    pub potential: PotentialSpec,
    pub bc: BoundaryCondition,
}

impl HalfLineProblem {
    pub fn new(potential: PotentialSpec, bc: BoundaryCondition) -> Result<Self> {
        for (i, t) in potential.terms.iter().enumerate() {
            let (lo, _) = t.support();
            if lo < 0.0 {
                return Err(Error::InvalidInput(format!("terms[{i}] reaches x = {lo} < 0")));
            }
        }
        Ok(Self { potential, bc })
    }
}

/// Full-line potential equal to the half-line one for `x >= 0` and zero elsewhere.
pub fn extend(problem: &HalfLineProblem) -> Result<PotentialSpec> {
    HalfLineProblem::new(problem.potential.clone(), problem.bc)?;
    Ok(problem.potential.clone())
}

/// `(M11 - gamma M12) / (M21 - gamma M22)` written with `alpha, beta` so that
/// `alpha = i beta` needs no special case.
pub fn reflection_from_transfer(m: &Mat2C, alpha: C64, beta: C64, atol: f64) -> Result<C64> {
    let (p, q) = (alpha - I * beta, alpha + I * beta);
    let num = p * m.m11 - q * m.m12;
    let den = p * m.m21 - q * m.m22;
    if den.norm() <= atol * (p.norm() + q.norm()) {
        return Err(Error::HalfLineSingularity(0.0));
    }
    Ok(num / den)
}

pub fn reflection(problem: &HalfLineProblem, k: C64, settings: &Settings) -> Result<C64> {
    let spec = extend(problem)?;
    let window = truncate(&spec, settings.eps_tail, settings.max_order)?;
    let tm = transfer_matrix(&spec, k, &window, &settings.tolerances())?;
    let (alpha, beta) = problem.bc.at(k)?;
    reflection_from_transfer(&tm.m, alpha, beta, settings.atol).map_err(|e| match e {
        Error::HalfLineSingularity(_) => Error::HalfLineSingularity(k.re),
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    B2,
    B1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfLineVerdict {
    pub resonant: bool,
    pub criterion: Criterion,
    pub margin: f64,
}

/// Dirichlet: `b2 = 0`; otherwise `b1 = 0`.
pub fn classify_halfline_resonance(problem: &HalfLineProblem, c: &LowEnergyCoefficients, tau: f64) -> Result<HalfLineVerdict> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput("tau must be positive".into()));
    }
    let (criterion, margin) = match problem.bc.rho()? {
        None => (Criterion::B2, c.b2.norm() / 1f64.max(c.a2.norm()).max(c.b1.norm())),
        Some(_) => (Criterion::B1, c.b1.norm() / 1f64.max(c.a1.norm()).max(c.b2.norm())),
    };
    Ok(HalfLineVerdict { resonant: margin < tau, criterion, margin })
}

/// Low-energy series of the half-line reflection amplitude in powers of `k ell`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionSeries {
    pub branch: Branch,
    pub criterion: Criterion,
    pub coeffs: Vec<C64>,
    pub truncation_order: usize,
    pub ell: f64,
}

impl ReflectionSeries {
    pub fn evaluate(&self, k: C64) -> C64 {
        eval_series(&self.coeffs, k * self.ell)
    }
}

pub fn reflection_series(
    problem: &HalfLineProblem,
    c: &LowEnergyCoefficients,
    order: usize,
    tau: f64,
) -> Result<ReflectionSeries> {
    let verdict = classify_halfline_resonance(problem, c, tau)?;
    let (a1, a2, b1, b2) = (c.a1, c.a2, c.b1, c.b2);
    let (branch, mut coeffs) = match (problem.bc.rho()?, verdict.resonant) {
        (None, true) => (Branch::Resonant, vec![ONE]),
        (None, false) => (Branch::Generic, vec![-ONE, -I * 2.0 * a2 / b2]),
        (Some(rho), false) => {
            (Branch::Generic, vec![-ONE, -I * 2.0 * a1 / b1, (a1 * a1 - I * rho) * 2.0 / (b1 * b1)])
        }
        (Some(rho), true) => {
            let q = rho * b2 * b2 + I;
            if q.norm() < tau {
                return Err(Error::Contradiction);
            }
            let mut v = vec![-(rho * b2 * b2 - I) / q];
            if order >= 1 {
                v.push(-I * 2.0 * b2 * (rho * rho * a2 * b2 * b2 + c.g1()?) / (q * q));
            }
            (Branch::Resonant, v)
        }
    };
    coeffs.truncate(order + 1);
    Ok(ReflectionSeries { branch, criterion: verdict.criterion, truncation_order: coeffs.len() - 1, coeffs, ell: c.ell })
}
