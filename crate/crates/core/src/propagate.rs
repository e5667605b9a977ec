//! Finite-k dynamics: the matrix Hamiltonian, exact delta jumps, the
//! transfer matrix by ODE composition or truncated Dyson series, and the
//! scattering amplitudes.

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshOptions};
use crate::numerics::{integrate_linear_ode, Mat2C, Tolerances, C64, I, ONE, ZERO};
use crate::potential::{evaluate, PotentialSpec, SupportWindow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub k: C64,
    pub m: Mat2C,
}

impl TransferMatrix {
    pub fn det_residual(&self) -> f64 {
        (self.m.det() - ONE).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitudes {
    pub k: C64,
    pub rl: C64,
    pub rr: C64,
    pub t: C64,
}

/// `e^{-ikx s3} K e^{ikx s3} = [[1, e^{-2ikx}], [-e^{2ikx}, -1]]`
fn rotated_k(x: f64, k: C64) -> Mat2C {
    let e = (I * k * (2.0 * x)).exp();
    Mat2C::new(ONE, e.inv(), -e, -ONE)
}

/// `H(x;k)` for a given value of the smooth potential at `x`.
pub fn hamiltonian_from_v(v: C64, x: f64, k: C64) -> Mat2C {
    if v == ZERO {
        return Mat2C::zero();
    }
    rotated_k(x, k).scale(v / (2.0 * k))
}

/// `H(x;k)` built from the smooth part of the potential.
pub fn hamiltonian(spec: &PotentialSpec, x: f64, k: C64) -> Result<Mat2C> {
    check_k(k)?;
    Ok(hamiltonian_from_v(evaluate(spec, x), x, k))
}

/// `I - (i z / 2k) e^{-ika s3} K e^{ika s3}`.
pub fn delta_jump(strength: C64, center: f64, k: C64) -> Result<Mat2C> {
    check_k(k)?;
    Ok(Mat2C::identity() - rotated_k(center, k).scale(I * strength / (2.0 * k)))
}

fn check_k(k: C64) -> Result<()> {
    if k == ZERO {
        Err(Error::ZeroWavenumber)
    } else if !(k.re.is_finite() && k.im.is_finite()) {
        Err(Error::InvalidInput("k must be finite".into()))
    } else {
        Ok(())
    }
}

/// Complex k must stay inside the strip where the tail keeps M analytic.
pub fn check_strip(spec: &PotentialSpec, k: C64) -> Result<()> {
    if let Some(t) = spec.tail {
        if k.im <= -t.mu {
            return Err(Error::Unsupported(format!(
                "Im k = {} is outside the analyticity strip Im k > -{}",
                k.im, t.mu
            )));
        }
    }
    Ok(())
}

/// True when `|k|` is small enough that the 1/k Hamiltonian is ill-conditioned.
pub fn below_small_k_guard(k: C64, window: &SupportWindow, settings: &Settings) -> bool {
    k.norm() * window.width().max(f64::MIN_POSITIVE) < settings.small_k_guard
}

/// `U(x_+, x_-; k)`: adaptive ODE runs between delta centres, exact jumps at them.
pub fn transfer_matrix(spec: &PotentialSpec, k: C64, window: &SupportWindow, tol: &Tolerances) -> Result<TransferMatrix> {
    check_k(k)?;
    check_strip(spec, k)?;
    let mesh = Mesh::build(spec, window, MeshOptions { intervals: 8, max_h: None })?;
    let mut u = Mat2C::identity();
    for (b, blk) in mesh.blocks.iter().enumerate() {
        let z = mesh.jumps[b];
        if z != ZERO {
            u = delta_jump(z, blk.lo, k)? * u;
        }
        if !blk.is_zero() {
            u = integrate_linear_ode(|x| hamiltonian_from_v(blk.v(x), x, k), blk.lo, blk.hi, u, tol)?;
        }
    }
    Ok(TransferMatrix { k, m: u })
}

/// `Rl = -M21/M22`, `Rr = M12/M22`, `T = 1/M22`.
pub fn amplitudes(tm: &TransferMatrix, atol: f64) -> Result<Amplitudes> {
    let m = tm.m;
    if m.m22.norm() <= atol {
        return Err(Error::SpectralSingularity(m.m22.norm()));
    }
    Ok(Amplitudes { k: tm.k, rl: -m.m21 / m.m22, rr: m.m12 / m.m22, t: m.m22.inv() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DysonTransfer {
    pub tm: TransferMatrix,
    pub order: usize,
    /// `I^{N+1}/(N+1)! e^I` with `I` the integrated norm of H including delta jumps.
    pub remainder_bound: f64,
    /// Norm of the last included term.
    pub last_term_norm: f64,
}

/// Partial Dyson sum through `order`, each order one cumulative integral of the previous one.
pub fn dyson_transfer(
    spec: &PotentialSpec,
    k: C64,
    window: &SupportWindow,
    order: usize,
    settings: &Settings,
) -> Result<DysonTransfer> {
    check_k(k)?;
    check_strip(spec, k)?;
    if order == 0 {
        return Err(Error::InvalidInput("Dyson order must be at least 1".into()));
    }
    let opts = MeshOptions { intervals: settings.mesh_intervals, max_h: Some(0.01 / k.norm()) };
    let mesh = Mesh::build(spec, window, opts)?;
    let h_field = mesh.map(|b, _, x| hamiltonian_from_v(mesh.blocks[b].v(x), x, k));
    let jump_gen: Vec<Mat2C> = mesh
        .blocks
        .iter()
        .zip(&mesh.jumps)
        .map(|(blk, &z)| rotated_k(blk.lo, k).scale(z / (2.0 * k)))
        .collect();

    let norm_field = mesh.map(|b, i, _| C64::from(h_field[b][i].norm()));
    let norm_cum = mesh.cumulative(&norm_field, |b| C64::from(jump_gen[b].norm()));
    let total = norm_cum.last().unwrap().last().unwrap().re;

    let mut term = mesh.map(|_, _, _| Mat2C::identity());
    let mut sum = Mat2C::identity();
    let mut last_norm = 1.0;
    for _ in 0..order {
        let integrand = mesh.map(|b, i, _| (h_field[b][i] * term[b][i]).scale(-I));
        let prev = &term;
        term = mesh.cumulative(&integrand, |b| (jump_gen[b] * *prev[b - 1].last().unwrap()).scale(-I));
        let end = *term.last().unwrap().last().unwrap();
        last_norm = end.norm();
        sum += end;
    }
    let n1 = order as f64 + 1.0;
    let log_bound = n1 * total.ln() - ln_factorial(order + 1) + total;
    let remainder_bound = if total == 0.0 { 0.0 } else { log_bound.exp() };
    Ok(DysonTransfer { tm: TransferMatrix { k, m: sum }, order, remainder_bound, last_term_norm: last_norm })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
