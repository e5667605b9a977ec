//! Laurent expansion of the evolution operator about k = 0 by the D_m/G_m
//! recursion, the low-energy amplitude series, and full-line resonance
//! classification.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::MeshField;
use crate::numerics::{Mat2C, Row, C64, I, ONE, ZERO};
use crate::zeroenergy::{LowEnergyCoefficients, ZeroEnergyField};

/// The nonzero top rows of a matrix field with vanishing second row.
pub type RowField = MeshField<Row>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScdCoefficients {
    pub s: Ratio<i128>,
    pub c: Ratio<i128>,
    pub d: Ratio<i128>,
}

impl ScdCoefficients {
    pub fn as_f64(&self) -> (f64, f64, f64) {
        let f = |r: Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
        (f(self.s), f(self.c), f(self.d))
    }
}

/// Largest n whose `(2n + 2)!` fits in an i128.
pub const SCD_MAX_N: u32 = 15;

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// Maclaurin coefficients of `sin 2t / 2t`, `(1 - cos 2t) / 2t^2`, `(1 + cos 2t) / 2`.
pub fn scd_coefficients(n: u32) -> Result<ScdCoefficients> {
    if n < 1 {
        return Err(Error::InvalidInput("s/c/d coefficients start at n = 1".into()));
    }
    if n > SCD_MAX_N {
        return Err(Error::InvalidInput(format!("n = {n} exceeds the exact range (n <= {SCD_MAX_N})")));
    }
    let p = (-4i128).pow(n);
    Ok(ScdCoefficients {
        s: Ratio::new(p, factorial(2 * n + 1)),
        c: Ratio::new(2 * p, factorial(2 * n + 2)),
        d: Ratio::new(p, 2 * factorial(2 * n)),
    })
}

/// D_n and G_n for every label already computed.
#[derive(Clone, Debug)]
pub struct RecursionState {
    /// `d[n + 1]` holds `D_n`, starting with `D_{-1} = 0`.
    pub d: Vec<RowField>,
    /// `g[n + 1]` holds `G_n`.
    pub g: Vec<RowField>,
}

#[derive(Clone, Debug)]
pub struct RecursionOutput {
    pub m: i32,
    pub d_next: RowField,
    pub g: RowField,
    pub cal_g: RowField,
    pub s: RowField,
}

impl RecursionState {
    pub fn new(field: &ZeroEnergyField) -> Self {
        Self { d: vec![field.mesh().map(|_, _, _| Row::default())], g: Vec::new() }
    }

    /// Label of the next step.
    pub fn next_m(&self) -> i32 {
        self.g.len() as i32 - 1
    }

    pub fn push(&mut self, out: RecursionOutput) -> Result<()> {
        if out.m != self.next_m() {
            return Err(Error::Sequencing(format!("expected step {}, got {}", self.next_m(), out.m)));
        }
        self.g.push(out.g);
        self.d.push(out.d_next);
        Ok(())
    }

    fn d(&self, n: i32) -> &RowField {
        &self.d[(n + 1) as usize]
    }

    fn g(&self, n: i32) -> &RowField {
        &self.g[(n + 1) as usize]
    }
}

/// One step of the recursion: `G_m`, its antiderivative and `D_{m+1}` from
/// all `D_n`, `G_n` with `n < m` (and `D_m`).
pub fn recursion_step(m: i32, state: &RecursionState, field: &ZeroEnergyField) -> Result<RecursionOutput> {
    if m < -1 {
        return Err(Error::InvalidInput("recursion starts at m = -1".into()));
    }
    if state.next_m() != m || state.d.len() != (m + 2) as usize {
        return Err(Error::Sequencing(format!(
            "step {m} needs D_n for n <= {m} and G_n for n < {m}; state is ready for step {}",
            state.next_m()
        )));
    }
    let mesh = field.mesh();
    let ell = field.ell();
    let zero_row = Row::default();

    // E_m and F_m
    let (e, f): (RowField, RowField) = if m <= 0 {
        (mesh.map(|_, _, _| zero_row), mesh.map(|_, _, _| zero_row))
    } else {
        let mut terms_d = Vec::new();
        for n in 1..=(m / 2 + 1) {
            let (s, _, d) = scd_coefficients(n as u32)?.as_f64();
            terms_d.push((2 * n, s, d, state.d(m + 1 - 2 * n)));
        }
        let mut terms_g = Vec::new();
        for n in 1..=((m + 1) / 2) {
            let (s, c, _) = scd_coefficients(n as u32)?.as_f64();
            terms_g.push((2 * n + 1, c, s, state.g(m - 2 * n)));
        }
        let build = |use_second: bool| {
            mesh.map(|b, i, x| {
                let mut acc = zero_row;
                for (p, s, d, dn) in &terms_d {
                    acc = acc + dn[b][i] * (if use_second { *d } else { *s } * x.powi(*p));
                }
                for (p, c, s, gn) in &terms_g {
                    acc = acc - gn[b][i] * (if use_second { *s } else { *c } * x.powi(*p));
                }
                acc
            })
        };
        (build(false), build(true))
    };

    // J(x) = int x v (F - E), S = J + F
    let moment = mesh.map(|b, i, x| (f[b][i] - e[b][i]) * (mesh.blocks[b].v(x) * x));
    let j = mesh.cumulative(&moment, |b| {
        let a = mesh.blocks[b].lo;
        (*f[b - 1].last().unwrap() - *e[b - 1].last().unwrap()) * (mesh.jumps[b] * a)
    });
    let s = mesh.map(|b, i, _| j[b][i] + f[b][i]);

    let weighted = |phi: &MeshField<C64>| {
        let integrand = mesh.map(|b, i, x| s[b][i] * (mesh.blocks[b].v(x) * phi[b][i]));
        mesh.cumulative(&integrand, |b| *s[b - 1].last().unwrap() * (mesh.jumps[b] * *phi[b - 1].last().unwrap()))
    };
    let a1 = weighted(&field.phi1);
    let a2 = weighted(&field.phi2);
    let scale = field.phi1_left().inv() * ell;

    let base = |b: usize, i: usize, derivative: bool| -> Row {
        match m {
            -1 => Row::delta(-I * if derivative { field.dphi1[b][i] } else { field.phi1[b][i] }),
            0 => Row::gamma(if derivative { field.dphi2[b][i] } else { field.phi2[b][i] } * ell),
            _ => zero_row,
        }
    };
    let cal_g = mesh.map(|b, i, _| {
        base(b, i, false) + (a2[b][i] * field.phi1[b][i] - a1[b][i] * field.phi2[b][i]) * scale
    });
    let g = mesh.map(|b, i, _| {
        base(b, i, true) + (a2[b][i] * field.dphi1[b][i] - a1[b][i] * field.dphi2[b][i]) * scale
    });
    let d_next = mesh.map(|b, i, x| j[b][i] + g[b][i] * x - cal_g[b][i]);
    Ok(RecursionOutput { m, d_next, g, cal_g, s })
}

/// Laurent coefficients `U^(m)(x_+, x_-)` for `m = -1 ..= m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentExpansion {
    pub coeffs: Vec<Mat2C>,
    pub ell: f64,
}

impl LaurentExpansion {
    pub const ORDER_MIN: i32 = -1;

    pub fn m_max(&self) -> i32 {
        self.coeffs.len() as i32 - 2
    }

    pub fn coeff(&self, m: i32) -> Mat2C {
        self.coeffs[(m + 1) as usize]
    }

    /// `sum_{m=-1}^{upto} U^(m) k^m`.
    pub fn evaluate(&self, k: C64, upto: i32) -> Mat2C {
        (Self::ORDER_MIN..=upto.min(self.m_max())).fold(Mat2C::zero(), |acc, m| acc + self.coeff(m) * k.powi(m))
    }
}

/// `U^(m) = [K G_m - i K^T D_m] / 2` for rows `G_m = (g1, g2)`, `D_m = (d1, d2)`.
pub fn u_coefficient(g: Row, d: Row) -> Mat2C {
    let [g1, g2] = g.0;
    let [d1, d2] = d.0;
    Mat2C::new(g1 - I * d1, g2 - I * d2, -g1 - I * d1, -g2 - I * d2) * 0.5
}

pub fn laurent_expansion(field: &ZeroEnergyField, m_max: i32) -> Result<LaurentExpansion> {
    if m_max < 1 {
        return Err(Error::InvalidInput("m_max must be at least 1".into()));
    }
    let mut state = RecursionState::new(field);
    for m in -1..=m_max {
        let out = recursion_step(m, &state, field)?;
        state.push(out)?;
    }
    let end = |f: &RowField| *f.last().unwrap().last().unwrap();
    let coeffs = (-1..=m_max).map(|m| u_coefficient(end(state.g(m)), end(state.d(m)))).collect();
    Ok(LaurentExpansion { coeffs, ell: field.ell() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Generic,
    Resonant,
}

/// Power series in `k ell` for the left/right reflection and transmission amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSeries {
    pub branch: Branch,
    pub rl: Vec<C64>,
    pub rr: Vec<C64>,
    pub t: Vec<C64>,
    pub truncation_order: usize,
    pub ell: f64,
}

pub fn eval_series(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

impl AmplitudeSeries {
    /// `(Rl, Rr, T)` at wavenumber k.
    pub fn evaluate(&self, k: C64) -> (C64, C64, C64) {
        let x = k * self.ell;
        (eval_series(&self.rl, x), eval_series(&self.rr, x), eval_series(&self.t, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResonanceVerdict {
    pub resonant: bool,
    pub margin: f64,
}

/// Zero-energy resonance iff `|b1| < tau max(1, |a1|, |b2|)`.
pub fn classify_resonance(c: &LowEnergyCoefficients, tau: f64) -> Result<ResonanceVerdict> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput("tau must be positive".into()));
    }
    let margin = c.b1.norm() / 1f64.max(c.a1.norm()).max(c.b2.norm());
    Ok(ResonanceVerdict { resonant: margin < tau, margin })
}

pub const GENERIC_MAX_ORDER: usize = 3;
pub const RESONANT_MAX_ORDER: usize = 1;

/// Low-energy series of Rl, Rr, T. Orders above what the branch provides
/// (3 generic, 1 resonant) are clamped.
pub fn amplitude_series(c: &LowEnergyCoefficients, order: usize, tau: f64) -> Result<AmplitudeSeries> {
    let verdict = classify_resonance(c, tau)?;
    let (a1, a2, b1, b2) = (c.a1, c.a2, c.b1, c.b2);
    if verdict.resonant {
        if b2.norm() < tau {
            return Err(Error::Contradiction);
        }
        let order = order.min(RESONANT_MAX_ORDER);
        let q = b2 * b2 + ONE;
        let mut rl = vec![(b2 * b2 - ONE) / q];
        let mut rr = vec![-(b2 * b2 - ONE) / q];
        let mut t = vec![b2 * 2.0 / q];
        if order >= 1 {
            let g1 = c.g1()?;
            let q2 = q * q;
            rl.push(I * 2.0 * b2 * (b2 * b2 * g1 - a2) / q2);
            rr.push(I * 2.0 * b2 * (g1 - a2 * b2 * b2) / q2);
            t.push(I * 2.0 * b2 * b2 * (a2 + g1) / q2);
        }
        return Ok(AmplitudeSeries { branch: Branch::Resonant, rl, rr, t, truncation_order: order, ell: c.ell });
    }
    if verdict.margin < 10.0 * tau {
        log::warn!("near-resonant input (margin {:e}): generic-branch coefficients lose accuracy", verdict.margin);
    }
    let order = order.min(GENERIC_MAX_ORDER);
    let r_order = order.min(2);
    let rl_full = [-ONE, -I * 2.0 * b2 / b1, (b2 * b2 + ONE) * 2.0 / (b1 * b1)];
    let rr_full = [-ONE, -I * 2.0 * a1 / b1, (a1 * a1 + ONE) * 2.0 / (b1 * b1)];
    let mut t = vec![ZERO, -I * 2.0 / b1, (a1 + b2) * 2.0 / (b1 * b1)];
    if order >= 3 {
        let g1 = c.g1()?;
        t.push(I * 2.0 * (a1 * a1 + b2 * b2 + a1 * b2 - b1 * g1 + ONE) / (b1 * b1 * b1));
    }
    t.truncate(order + 1);
    Ok(AmplitudeSeries {
        branch: Branch::Generic,
        rl: rl_full[..=r_order].to_vec(),
        rr: rr_full[..=r_order].to_vec(),
        t,
        truncation_order: order,
        ell: c.ell,
    })
}
