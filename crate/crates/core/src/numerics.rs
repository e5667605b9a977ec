//! Complex 2x2 algebra, quadrature on sampled grids, and an adaptive
//! Dormand-Prince integrator for linear matrix ODEs `i U' = H(x) U`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Vector-space values that the quadrature and recursion code can accumulate.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Linear for C64 {
    fn zero() -> Self {
        ZERO
    }
}

/// Complex 2x2 matrix, row-major fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl Mat2C {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.m11.conj(), self.m12.conj(), self.m21.conj(), self.m22.conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(c * self.m11, c * self.m12, c * self.m21, c * self.m22)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inverse of a matrix with unit determinant is its adjugate.
    pub fn adjugate(&self) -> Self {
        Self::new(self.m22, -self.m12, -self.m21, self.m11)
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl AddAssign for Mat2C {
    fn add_assign(&mut self, o: Mat2C) {
        *self = *self + o;
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        Mat2C::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, b: Mat2C) -> Mat2C {
        Mat2C::new(
            self.m11 * b.m11 + self.m12 * b.m21,
            self.m11 * b.m12 + self.m12 * b.m22,
            self.m21 * b.m11 + self.m22 * b.m21,
            self.m21 * b.m12 + self.m22 * b.m22,
        )
    }
}

impl Mul<C64> for Mat2C {
    type Output = Mat2C;
    fn mul(self, c: C64) -> Mat2C {
        self.scale(c)
    }
}

impl Mul<f64> for Mat2C {
    type Output = Mat2C;
    fn mul(self, c: f64) -> Mat2C {
        Mat2C::new(self.m11 * c, self.m12 * c, self.m21 * c, self.m22 * c)
    }
}

impl Linear for Mat2C {
    fn zero() -> Self {
        Mat2C::zero()
    }
}

pub fn mat_mul(a: Mat2C, b: Mat2C) -> Mat2C {
    a * b
}

pub fn mat_det(a: Mat2C) -> C64 {
    a.det()
}

/// Top row of a 2x2 matrix whose second row vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Row(pub [C64; 2]);

impl Row {
    pub const fn new(a: C64, b: C64) -> Self {
        Row([a, b])
    }

    /// `[1, 1]`, the nonzero row of Delta.
    pub fn delta(c: C64) -> Self {
        Row([c, c])
    }

    /// `[1, -1]`, the nonzero row of Gamma.
    pub fn gamma(c: C64) -> Self {
        Row([c, -c])
    }

    pub fn scale(self, c: C64) -> Self {
        Row([self.0[0] * c, self.0[1] * c])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    pub fn as_matrix(&self) -> Mat2C {
        Mat2C::new(self.0[0], self.0[1], ZERO, ZERO)
    }
}

impl Add for Row {
    type Output = Row;
    fn add(self, o: Row) -> Row {
        Row([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Row {
    type Output = Row;
    fn sub(self, o: Row) -> Row {
        Row([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Mul<f64> for Row {
    type Output = Row;
    fn mul(self, c: f64) -> Row {
        Row([self.0[0] * c, self.0[1] * c])
    }
}

impl Mul<C64> for Row {
    type Output = Row;
    fn mul(self, c: C64) -> Row {
        self.scale(c)
    }
}

impl Linear for Row {
    fn zero() -> Self {
        Row::default()
    }
}

/// The fixed matrices the dynamical formulation is written in.
#[derive(Clone, Copy, Debug)]
pub struct StructuralConstants {
    pub sigma1: Mat2C,
    pub sigma2: Mat2C,
    pub sigma3: Mat2C,
    /// `sigma3 + i sigma2 = [[1, 1], [-1, -1]]`, nilpotent.
    pub k: Mat2C,
    pub k_transpose: Mat2C,
    pub gamma: Mat2C,
    pub delta: Mat2C,
    pub identity: Mat2C,
}

pub fn structural_constants() -> StructuralConstants {
    let k = Mat2C::from_real(1.0, 1.0, -1.0, -1.0);
    StructuralConstants {
        sigma1: Mat2C::from_real(0.0, 1.0, 1.0, 0.0),
        sigma2: Mat2C::new(ZERO, -I, I, ZERO),
        sigma3: Mat2C::from_real(1.0, 0.0, 0.0, -1.0),
        k,
        k_transpose: k.transpose(),
        gamma: Mat2C::from_real(1.0, -1.0, 0.0, 0.0),
        delta: Mat2C::from_real(1.0, 1.0, 0.0, 0.0),
        identity: Mat2C::identity(),
    }
}

/// Samples of a complex function on strictly increasing nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    values: Vec<C64>,
}

impl Grid {
    pub fn new(nodes: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid nodes must be finite".into()));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn uniform(a: f64, b: f64, count: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput("uniform grid needs at least 2 nodes".into()));
        }
        let h = (b - a) / (count - 1) as f64;
        let nodes = (0..count).map(|i| if i + 1 == count { b } else { a + h * i as f64 }).collect();
        Self::from_fn(nodes, f)
    }

    /// Builds nodes by bisecting blocks of 8 equal intervals until the
    /// block-level quadrature estimate meets `tol` (scaled by block length).
    pub fn sample_adaptive(a: f64, b: f64, tol: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        if !(b > a) || !(tol > 0.0) {
            return Err(Error::InvalidInput("adaptive sampling needs a < b and tol > 0".into()));
        }
        const BLOCK: usize = 8;
        let block_integral = |lo: f64, hi: f64, n: usize| -> C64 {
            let h = (hi - lo) / n as f64;
            let vals: Vec<C64> = (0..=n).map(|i| f(lo + h * i as f64)).collect();
            *cumulative_uniform(h, &vals, ZERO).last().unwrap()
        };
        let mut nodes = vec![a];
        let mut stack = vec![(a, b, 0u32)];
        // Depth-first, right half pushed first so leaves come out in order.
        while let Some((lo, hi, depth)) = stack.pop() {
            let coarse = block_integral(lo, hi, BLOCK);
            let fine = block_integral(lo, hi, 2 * BLOCK);
            let err = (coarse - fine).norm() / 15.0;
            if err > tol * (hi - lo) / (b - a) && depth < 40 {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            } else {
                let h = (hi - lo) / BLOCK as f64;
                nodes.extend((1..=BLOCK).map(|i| if i == BLOCK { hi } else { lo + h * i as f64 }));
            }
        }
        Self::from_fn(nodes, f)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A definite integral with an estimate of its discretisation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    pub error: f64,
}

fn same_spacing(h0: f64, h1: f64) -> bool {
    (h1 - h0).abs() <= 1e-9 * h0.abs().max(h1.abs())
}

/// Composite quadrature of a sampled integrand.
///
/// Maximal runs of equally spaced nodes get the trapezoid rule with a cubic
/// end correction (fourth order); isolated intervals fall back to trapezoid.
pub fn quad(grid: &Grid) -> Result<Quadrature> {
    let x = grid.nodes();
    let f = grid.values();
    if x.len() < 2 {
        return Err(Error::InvalidInput("quadrature needs at least 2 nodes".into()));
    }
    let mut value = ZERO;
    let mut error = 0.0;
    let mut start = 0;
    while start + 1 < x.len() {
        let h = x[start + 1] - x[start];
        let mut end = start + 1;
        while end + 1 < x.len() && same_spacing(h, x[end + 1] - x[end]) {
            end += 1;
        }
        let run = &f[start..=end];
        let h = (x[end] - x[start]) / (end - start) as f64;
        let trap: C64 = run.windows(2).map(|w| (w[0] + w[1]) * (0.5 * h)).sum();
        if run.len() >= 3 {
            let corrected = *cumulative_uniform(h, run, ZERO).last().unwrap();
            value += corrected;
            error += if run.len() >= 7 && run.len() % 2 == 1 {
                let half: Vec<C64> = run.iter().step_by(2).copied().collect();
                (corrected - *cumulative_uniform(2.0 * h, &half, ZERO).last().unwrap()).norm() / 15.0
            } else {
                (corrected - trap).norm()
            };
        } else {
            value += trap;
            error += 0.5 * h * (run[1] - run[0]).norm();
        }
        start = end;
    }
    Ok(Quadrature { value, error })
}

/// Running integral `start + int_{x_0}^{x_i} f` on a uniform grid of spacing `h`.
///
/// Each interval uses the cubic through the four nearest samples (quadratic
/// when only three nodes exist), so the result is exact for cubics.
pub fn cumulative_uniform<T: Linear>(h: f64, f: &[T], start: T) -> Vec<T> {
    let n = f.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(start);
    let mut acc = start;
    match n {
        1 => {}
        2 => {
            acc = acc + (f[0] + f[1]) * (0.5 * h);
            out.push(acc);
        }
        3 => {
            let w = h / 12.0;
            acc = acc + (f[0] * 5.0 + f[1] * 8.0 - f[2]) * w;
            out.push(acc);
            acc = acc + (f[1] * 8.0 + f[2] * 5.0 - f[0]) * w;
            out.push(acc);
        }
        _ => {
            let w = h / 24.0;
            for i in 0..n - 1 {
                let piece = if i == 0 {
                    f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]
                } else if i == n - 2 {
                    f[n - 4] - f[n - 3] * 5.0 + f[n - 2] * 19.0 + f[n - 1] * 9.0
                } else {
                    (f[i] + f[i + 1]) * 13.0 - f[i - 1] - f[i + 2]
                };
                acc = acc + piece * w;
                out.push(acc);
            }
        }
    }
    out
}

/// Relative/absolute tolerances for the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(Self { rtol, atol })
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

struct Stepper<'a, F: Fn(f64) -> Mat2C> {
    rhs: &'a F,
    tol: Tolerances,
    /// Step size suggestion carried between calls.
    h: Option<f64>,
}

impl<F: Fn(f64) -> Mat2C> Stepper<'_, F> {
    fn deriv(&self, x: f64, u: &Mat2C) -> Mat2C {
        // i U' = H U  =>  U' = -i H U
        (*self.rhs)(x).scale(-I) * *u
    }

    fn err_norm(&self, err: &Mat2C, y0: &Mat2C, y1: &Mat2C) -> f64 {
        let e = err.entries();
        let a = y0.entries();
        let b = y1.entries();
        (0..4).fold(0.0_f64, |acc, i| {
            let sc = self.tol.atol + self.tol.rtol * a[i].norm().max(b[i].norm());
            acc.max(e[i].norm() / sc)
        })
    }

    fn initial_step(&self, x0: f64, u0: &Mat2C, f0: &Mat2C, span: f64) -> f64 {
        let scaled = |m: &Mat2C| {
            let e = m.entries();
            let y = u0.entries();
            (0..4).fold(0.0_f64, |acc, i| {
                acc.max(e[i].norm() / (self.tol.atol + self.tol.rtol * y[i].norm()))
            })
        };
        let d0 = scaled(u0);
        let d1 = scaled(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let u1 = *u0 + *f0 * h0;
        let f1 = self.deriv(x0 + h0, &u1);
        let d2 = scaled(&(f1 - *f0)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances `u` from `x0` to `x1` (either direction).
    fn advance(&mut self, x0: f64, x1: f64, mut u: Mat2C) -> Result<Mat2C> {
        let span = (x1 - x0).abs();
        if span == 0.0 {
            return Ok(u);
        }
        let dir = if x1 > x0 { 1.0 } else { -1.0 };
        let mut x = x0;
        let mut k1 = self.deriv(x, &u);
        let mut h = match self.h {
            Some(h) => h.min(span),
            None => self.initial_step(x0, &u, &k1, span),
        };
        let mut steps = 0usize;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;
            let k2 = self.deriv(x + C2 * hs, &(u + k1 * (A21 * hs)));
            let k3 = self.deriv(x + C3 * hs, &(u + (k1 * A31 + k2 * A32) * hs));
            let k4 = self.deriv(x + C4 * hs, &(u + (k1 * A41 + k2 * A42 + k3 * A43) * hs));
            let k5 = self.deriv(
                x + C5 * hs,
                &(u + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs),
            );
            let x_new = if last { x1 } else { x + hs };
            let k6 = self.deriv(
                x + hs,
                &(u + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs),
            );
            let u_new = u + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * hs;
            let k7 = self.deriv(x_new, &u_new);
            let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;
            let en = self.err_norm(&err, &u, &u_new);
            if !en.is_finite() || !u_new.is_finite() {
                return Err(Error::Integration { x, reason: "non-finite state".into() });
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            if en <= 1.0 {
                x = x_new;
                u = u_new;
                k1 = k7;
                if !last {
                    h *= factor;
                } else {
                    // keep the pre-truncation suggestion for the next call
                    h = h.max(hs.abs() * factor);
                }
            } else {
                h = hs.abs() * factor.min(1.0);
                if h <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
                    return Err(Error::Integration { x, reason: "step size underflow".into() });
                }
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration { x, reason: "step budget exhausted".into() });
            }
        }
        self.h = Some(h);
        Ok(u)
    }
}

/// Solves `i dU/dx = rhs(x) U` from `x0` to `x1` with `U(x0) = u0`.
///
/// `rhs` must be continuous on the interval; jumps are composed by callers.
pub fn integrate_linear_ode<F: Fn(f64) -> Mat2C>(
    rhs: F,
    x0: f64,
    x1: f64,
    u0: Mat2C,
    tol: &Tolerances,
) -> Result<Mat2C> {
    check_tol(tol)?;
    let mut stepper = Stepper { rhs: &rhs, tol: *tol, h: None };
    stepper.advance(x0, x1, u0)
}

/// Same as [`integrate_linear_ode`] but reports the solution at every node
/// of the ascending sequence `nodes`, starting from `u0` at `nodes[0]`.
pub fn integrate_linear_ode_dense<F: Fn(f64) -> Mat2C>(
    rhs: F,
    nodes: &[f64],
    u0: Mat2C,
    tol: &Tolerances,
) -> Result<Vec<Mat2C>> {
    check_tol(tol)?;
    let mut out = Vec::with_capacity(nodes.len());
    if nodes.is_empty() {
        return Ok(out);
    }
    let mut stepper = Stepper { rhs: &rhs, tol: *tol, h: None };
    let mut u = u0;
    out.push(u);
    for w in nodes.windows(2) {
        u = stepper.advance(w[0], w[1], u)?;
        out.push(u);
    }
    Ok(out)
}

fn check_tol(tol: &Tolerances) -> Result<()> {
    if tol.rtol > 0.0 && tol.atol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput("tolerances must be positive".into()))
    }
}
