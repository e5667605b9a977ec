//! Quick engine-versus-oracle suite behind `dynscat validate`.

use rayon::prelude::*;

use crate::config::Settings;
use crate::error::Result;
use crate::halfline::{reflection, BoundaryCondition, HalfLineProblem};
use crate::lowenergy::amplitude_series;
use crate::numerics::{Mat2C, C64, ONE};
use crate::oracles::{barrier_lowk, barrier_transfer, delta_coefficients, delta_halfline_reflection, delta_series, BarrierParams, DeltaParams};
use crate::potential::{truncate, PotentialSpec};
use crate::propagate::transfer_matrix;
use crate::zeroenergy::{low_energy_coefficients, m0_dyson, m0_ode, solve_phi, LowEnergyCoefficients};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<34} {:>12} {:>10}  result\n", "check", "error", "tol");
        for c in &self.checks {
            let r = if c.passed() { "PASS" } else { "FAIL" };
            s.push_str(&format!("{:<34} {:>12.3e} {:>10.1e}  {r}\n", c.name, c.value, c.tol));
        }
        s
    }
}

fn rel_entrywise(a: &Mat2C, b: &Mat2C) -> f64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).norm() / y.norm().max(1e-300)).fold(0.0, f64::max)
}

fn coeff_err(a: &LowEnergyCoefficients, b: &LowEnergyCoefficients) -> f64 {
    let g = match (a.g1, b.g1) {
        (Some(x), Some(y)) => (x - y).norm(),
        _ => f64::INFINITY,
    };
    [(a.a1 - b.a1).norm(), (a.a2 - b.a2).norm(), (a.b1 - b.b1).norm(), (a.b2 - b.b2).norm(), g]
        .into_iter()
        .fold(0.0, f64::max)
}

fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn barrier_transfer_check(s: &Settings) -> Result<f64> {
    let p = BarrierParams::new(C64::new(1.0, 1.0), 0.5, 1.0, 1.0)?;
    let spec = PotentialSpec::barrier(p.z, p.a, p.len, p.ell)?;
    let w = truncate(&spec, s.eps_tail, s.max_order)?;
    let errs: Vec<f64> = [0.05, 0.3, 1.0, 5.0]
        .par_iter()
        .map(|&k| {
            let k = C64::from(k);
            Ok(rel_entrywise(&transfer_matrix(&spec, k, &w, &s.tolerances())?.m, &barrier_transfer(&p, k)?))
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

fn barrier_lowk_check(s: &Settings) -> Result<f64> {
    let p = BarrierParams::new(C64::from(-2.0), 0.5, 1.0, 1.0)?;
    let spec = PotentialSpec::barrier(p.z, p.a, p.len, p.ell)?;
    let w = truncate(&spec, s.eps_tail, s.max_order)?;
    let f = solve_phi(&spec, &w, s)?;
    Ok(coeff_err(&low_energy_coefficients(&f), &barrier_lowk(&p)))
}

fn delta_coeff_check(s: &Settings) -> Result<f64> {
    let d = DeltaParams::new(C64::new(-0.6, 1.1), 0.7)?;
    let spec = PotentialSpec::delta(d.z, d.a, d.ell())?;
    let w = truncate(&spec, s.eps_tail, s.max_order)?;
    let f = solve_phi(&spec, &w, s)?;
    Ok(coeff_err(&low_energy_coefficients(&f), &delta_coefficients(&d)))
}

fn delta_series_check(s: &Settings) -> Result<f64> {
    let d = DeltaParams::new(C64::new(1.3, -0.4), -0.9)?;
    let got = amplitude_series(&delta_coefficients(&d), 3, s.tau)?;
    let want = delta_series(&d, 3);
    let diff = |a: &[C64], b: &[C64]| {
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    Ok(diff(&got.rl, &want.rl).max(diff(&got.rr, &want.rr)).max(diff(&got.t, &want.t)))
}

fn dyson_check(s: &Settings) -> Result<f64> {
    let spec = PotentialSpec::barrier(C64::new(-2.0, 1.0), 0.2, 1.0, 1.0)?;
    let w = truncate(&spec, s.eps_tail, s.max_order)?;
    let d = m0_dyson(&spec, &w, 12, s)?;
    let o = m0_ode(&solve_phi(&spec, &w, s)?);
    Ok((d.m0 - o.m0).max_abs())
}

fn halfline_check(s: &Settings) -> Result<f64> {
    let d = DeltaParams::new(C64::new(-0.8, 0.3), 1.3)?;
    let p = HalfLineProblem::new(PotentialSpec::delta(d.z, d.a, d.ell())?, BoundaryCondition::dirichlet())?;
    let mut worst: f64 = 0.0;
    for k in [0.05, 0.5, 2.0] {
        let k = C64::from(k);
        worst = worst.max((reflection(&p, k, s)? - delta_halfline_reflection(&d, ONE, k)).norm());
    }
    Ok(worst)
}

fn det_check(s: &Settings) -> Result<f64> {
    let spec = PotentialSpec::barrier(C64::new(3.0, -2.0), -0.4, 1.5, 1.0)?;
    let w = truncate(&spec, s.eps_tail, s.max_order)?;
    let mut worst: f64 = 0.0;
    for k in [0.1, 1.0, 3.0] {
        worst = worst.max(transfer_matrix(&spec, C64::from(k), &w, &s.tolerances())?.det_residual());
    }
    Ok(worst)
}

type Suite = (&'static str, fn(&Settings) -> Result<f64>, f64);

pub fn run_all() -> Report {
    let s = Settings::default();
    let suites: [Suite; 7] = [
        ("barrier transfer (relative)", barrier_transfer_check, 1e-8),
        ("barrier zero-energy coefficients", barrier_lowk_check, 1e-10),
        ("delta zero-energy coefficients", delta_coeff_check, 1e-12),
        ("delta amplitude series", delta_series_check, 1e-10),
        ("dyson M0 vs ODE M0", dyson_check, 1e-10),
        ("half-line delta reflection", halfline_check, 1e-8),
        ("det M = 1", det_check, 1e-9),
    ];
    let checks = suites
        .par_iter()
        .map(|(name, f, tol)| Check { name, value: or_inf(f(&s)), tol: *tol })
        .collect();
    Report { checks }
}
