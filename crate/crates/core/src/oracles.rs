//! Closed-form references for the rectangular barrier and the delta
//! potential, plus a Cauchy-contour extractor for Laurent coefficients.

use crate::error::{Error, Result};
use crate::lowenergy::{AmplitudeSeries, Branch};
use crate::numerics::{Mat2C, C64, I, ONE, ZERO};
use crate::zeroenergy::{LowEnergyCoefficients, PhiValues};

/// `v = z` on `[a, a + len]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierParams {
    pub z: C64,
    pub a: f64,
    pub len: f64,
    pub ell: f64,
}

impl BarrierParams {
    pub fn new(z: C64, a: f64, len: f64, ell: f64) -> Result<Self> {
        if !(len > 0.0) || !(ell > 0.0) {
            return Err(Error::InvalidInput("barrier needs len > 0 and ell > 0".into()));
        }
        Ok(Self { z, a, len, ell })
    }
}

const SERIES_CUTOFF: f64 = 1e-3;

/// `cosh(sqrt w)`, even in the square root so no branch is chosen.
pub fn cosh_sqrt(w: C64) -> C64 {
    if w.norm() < SERIES_CUTOFF {
        // w^n / (2n)!
        let mut term = ONE;
        let mut sum = ONE;
        for n in 1..8 {
            term = term * w / ((2 * n - 1) * (2 * n)) as f64;
            sum += term;
        }
        return sum;
    }
    w.sqrt().cosh()
}

/// `sinh(sqrt w) / sqrt w`, with the value 1 at `w = 0`.
pub fn sinhc_sqrt(w: C64) -> C64 {
    if w.norm() < SERIES_CUTOFF {
        // w^n / (2n+1)!
        let mut term = ONE;
        let mut sum = ONE;
        for n in 1..8 {
            term = term * w / ((2 * n) * (2 * n + 1)) as f64;
            sum += term;
        }
        return sum;
    }
    let r = w.sqrt();
    r.sinh() / r
}

pub fn barrier_transfer(p: &BarrierParams, k: C64) -> Result<Mat2C> {
    if k == ZERO {
        return Err(Error::ZeroWavenumber);
    }
    let l = p.len;
    let w = (p.z - k * k) * (l * l);
    let (c, s) = (cosh_sqrt(w), sinhc_sqrt(w));
    let q = (p.z - k * k * 2.0) * l * s / (k * 2.0);
    let off = p.z * l * s / (k * 2.0);
    let phase = I * k * (2.0 * p.a + l);
    Ok(Mat2C::new(
        (-I * k * l).exp() * (c - I * q),
        -I * off * (-phase).exp(),
        I * off * phase.exp(),
        (I * k * l).exp() * (c + I * q),
    ))
}

/// `(c, s)` with `c = cosh(L sqrt z)` and `s = sinh(L sqrt z) / (L sqrt z)`.
pub fn barrier_cs(p: &BarrierParams) -> (C64, C64) {
    let w = p.z * (p.len * p.len);
    (cosh_sqrt(w), sinhc_sqrt(w))
}

pub fn barrier_lowk(p: &BarrierParams) -> LowEnergyCoefficients {
    let (c, s) = barrier_cs(p);
    let (z, a, l, ell) = (p.z, p.a, p.len, p.ell);
    LowEnergyCoefficients {
        a1: c - z * s * (l * (a + l)),
        b1: z * s * (ell * l),
        a2: -(c + (z * (a * (a + l)) - ONE) * s) * (l / ell),
        b2: c + z * s * (a * l),
        g1: Some(-(c - (z * (2.0 * a * a + 2.0 * a * l + l * l) + ONE) * s) * (l / (2.0 * ell))),
        ell,
    }
}

/// Zero-energy solutions with `phi1 -> 1`, `phi2 -> x / ell` to the left of the barrier.
pub fn barrier_phi(p: &BarrierParams, x: f64) -> PhiValues {
    let inside = |t: f64| {
        let w = p.z * (t * t);
        let (c, s) = (cosh_sqrt(w), sinhc_sqrt(w));
        // d/dt cosh(sqrt z t) = z t s, d/dt [t s] = c
        let phi1 = c;
        let dphi1 = p.z * t * s;
        let phi2 = (c * p.a + s * t) / p.ell;
        let dphi2 = (dphi1 * p.a + c) / p.ell;
        PhiValues { phi1, dphi1, phi2, dphi2 }
    };
    if x <= p.a {
        return PhiValues { phi1: ONE, dphi1: ZERO, phi2: C64::from(x / p.ell), dphi2: C64::from(1.0 / p.ell) };
    }
    if x <= p.a + p.len {
        return inside(x - p.a);
    }
    let e = inside(p.len);
    let d = x - p.a - p.len;
    PhiValues { phi1: e.phi1 + e.dphi1 * d, dphi1: e.dphi1, phi2: e.phi2 + e.dphi2 * d, dphi2: e.dphi2 }
}

/// `v = z delta(x - a)`, with `ell = 1/|z|` and `z = e^{i zeta} / ell`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaParams {
    pub z: C64,
    pub a: f64,
}

impl DeltaParams {
    pub fn new(z: C64, a: f64) -> Result<Self> {
        if z == ZERO || !z.is_finite() {
            return Err(Error::InvalidInput("delta strength must be finite and nonzero".into()));
        }
        Ok(Self { z, a })
    }

    pub fn from_zeta(zeta: f64, ell: f64, a: f64) -> Result<Self> {
        Self::new(C64::from_polar(1.0 / ell, zeta), a)
    }

    pub fn ell(&self) -> f64 {
        1.0 / self.z.norm()
    }

    pub fn zeta(&self) -> f64 {
        self.z.arg()
    }

    pub fn a_hat(&self) -> f64 {
        self.a / self.ell()
    }

    fn e(&self) -> C64 {
        C64::from_polar(1.0, self.zeta())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaRecord {
    pub transfer: Option<Mat2C>,
    pub m0: Mat2C,
    pub coeffs: LowEnergyCoefficients,
    pub series: AmplitudeSeries,
}

pub fn delta_transfer(p: &DeltaParams, k: C64) -> Result<Mat2C> {
    if k == ZERO {
        return Err(Error::ZeroWavenumber);
    }
    let h = I * p.z / (k * 2.0);
    let e = (I * k * (2.0 * p.a)).exp();
    Ok(Mat2C::new(ONE - h, -h / e, h * e, ONE + h))
}

pub fn delta_coefficients(p: &DeltaParams) -> LowEnergyCoefficients {
    let (e, ah) = (p.e(), p.a_hat());
    LowEnergyCoefficients {
        a1: ONE - e * ah,
        b1: e,
        a2: -e * (ah * ah),
        b2: ONE + e * ah,
        g1: Some(e * (ah * ah)),
        ell: p.ell(),
    }
}

/// Printed low-energy series of `Rl`, `Rr` (through `(k ell)^2`) and `T`
/// (through `(k ell)^3`), truncated to `order`.
pub fn delta_series(p: &DeltaParams, order: usize) -> AmplitudeSeries {
    let (ah, em) = (p.a_hat(), p.e().inv());
    let rl = [-ONE, -I * 2.0 * (em + ah), (em * em * 2.0 + em * (2.0 * ah) + ah * ah) * 2.0];
    let rr = [-ONE, I * 2.0 * (C64::from(ah) - em), (em * em * 2.0 - em * (2.0 * ah) + ah * ah) * 2.0];
    let t = [ZERO, -I * 2.0 * em, em * em * 4.0, I * 8.0 * em * em * em];
    let order = order.min(3);
    let r = order.min(2);
    AmplitudeSeries {
        branch: Branch::Generic,
        rl: rl[..=r].to_vec(),
        rr: rr[..=r].to_vec(),
        t: t[..=order].to_vec(),
        truncation_order: order,
        ell: p.ell(),
    }
}

/// Exact `(Rl, Rr, T)`.
pub fn delta_amplitudes(p: &DeltaParams, k: C64) -> (C64, C64, C64) {
    let d = p.z - I * k * 2.0;
    let e = (I * k * (2.0 * p.a)).exp();
    (-p.z * e / d, -p.z / (e * d), -I * k * 2.0 / d)
}

pub fn delta_all(p: &DeltaParams, k: C64, order: usize) -> DeltaRecord {
    let coeffs = delta_coefficients(p);
    DeltaRecord {
        transfer: delta_transfer(p, k).ok(),
        m0: coeffs.m0(),
        coeffs,
        series: delta_series(p, order),
    }
}

/// Exact half-line reflection for the delta with constant `gamma`.
pub fn delta_halfline_reflection(p: &DeltaParams, gamma: C64, k: C64) -> C64 {
    let e = (I * k * (2.0 * p.a)).exp();
    (p.z * (ONE - gamma / e) + I * k * 2.0) / (p.z * (gamma - e) - I * gamma * k * 2.0)
}

/// Half-line series for the delta: Dirichlet (`rho = None`, through
/// `k ell`) or `beta != 0` with `rho = alpha / beta` (through `(k ell)^2`).
pub fn delta_halfline_series(p: &DeltaParams, rho: Option<C64>) -> Vec<C64> {
    let (ah, em) = (p.a_hat(), p.e().inv());
    match rho {
        None if (p.z * p.a + ONE).norm() < 1e-14 => vec![ONE],
        None => vec![-ONE, I * 2.0 * ah * ah / (em + ah)],
        Some(rho) => {
            let u = C64::from(ah) - em;
            // the rho term enters with -i; this is what the exact reflection expands to
            vec![-ONE, I * 2.0 * u, (u * u - I * rho * em * em) * 2.0]
        }
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput("bisection bracket has no sign change".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo <= 4.0 * f64::EPSILON * mid.abs() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest negative root of `tanh(sqrt z) + sqrt(z) / a = 0`. With
/// `z = -q^2` this is `tan q + q / a = 0`, bracketed in `(pi/2, pi)`.
pub fn tanh_condition_root(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput("a must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    let q = bisect(pi / 2.0 + 1e-12, pi, |q| q.sin() / q.cos() + q / a)?;
    Ok(-q * q)
}

/// Smallest negative `z` with `cosh(L sqrt z) + a sqrt z sinh(L sqrt z) = 0`,
/// i.e. `cos(qL) - a q sin(qL) = 0` for `z = -q^2`, bracketed in `(0, pi/L)`.
pub fn barrier_b2_root(a: f64, len: f64) -> Result<f64> {
    if !(a > 0.0) || !(len > 0.0) {
        return Err(Error::InvalidInput("a and len must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    let q = bisect(0.0, pi / len, |q| (q * len).cos() - a * q * (q * len).sin())?;
    Ok(-q * q)
}

/// Laurent coefficients `(1/2 pi i) \oint f(k) k^{-m-1} dk`, `m = -1 ..= m_max`,
/// by the trapezoid rule on `nodes` points of the circle `|k| = radius`.
pub fn contour_laurent(
    f: impl Fn(C64) -> Result<Mat2C>,
    radius: f64,
    nodes: usize,
    m_max: i32,
) -> Result<Vec<Mat2C>> {
    if !(radius > 0.0) || nodes < 4 {
        return Err(Error::InvalidInput("contour needs radius > 0 and at least 4 nodes".into()));
    }
    let samples: Vec<(C64, Mat2C)> = (0..nodes)
        .map(|j| {
            let k = C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / nodes as f64);
            f(k).map(|m| (k, m))
        })
        .collect::<Result<_>>()?;
    Ok((-1..=m_max)
        .map(|m| {
            let sum = samples.iter().fold(Mat2C::zero(), |acc, (k, v)| acc + *v * k.powi(-m));
            sum * (1.0 / nodes as f64)
        })
        .collect())
}
