//! Zero-energy solutions phi1, phi2, the coefficients a_j, b_j, g1, the
//! Green's function of `-d^2/dx^2 + v`, and the zero-energy transfer matrix
//! both from the solutions and from its Dyson series.

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshField};
use crate::numerics::{integrate_linear_ode, integrate_linear_ode_dense, Mat2C, Tolerances, C64, I, ONE, ZERO};
use crate::potential::{PotentialSpec, SupportWindow};

/// Samples of phi1, phi2 and their derivatives on a block mesh.
#[derive(Clone, Debug)]
pub struct ZeroEnergyField {
    mesh: Mesh,
    ell: f64,
    tol: Tolerances,
    pub phi1: MeshField<C64>,
    pub dphi1: MeshField<C64>,
    pub phi2: MeshField<C64>,
    pub dphi2: MeshField<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiValues {
    pub phi1: C64,
    pub dphi1: C64,
    pub phi2: C64,
    pub dphi2: C64,
}

/// The constants that parameterise every low-energy series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowEnergyCoefficients {
    pub a1: C64,
    pub a2: C64,
    pub b1: C64,
    pub b2: C64,
    pub g1: Option<C64>,
    pub ell: f64,
}

impl LowEnergyCoefficients {
    pub fn wronskian_residual(&self) -> f64 {
        (self.a1 * self.b2 - self.a2 * self.b1 - ONE).norm()
    }

    pub fn m0(&self) -> Mat2C {
        Mat2C::new(self.a1, self.a2, self.b1, self.b2)
    }

    pub fn g1(&self) -> Result<C64> {
        self.g1.ok_or_else(|| Error::InvalidInput("g1 has not been computed for these coefficients".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTransferMatrix {
    pub m0: Mat2C,
}

/// `i U' = rhs U` with `-i rhs = [[0, 1], [v, 0]]`.
fn phi_rhs(v: C64) -> Mat2C {
    Mat2C::new(ZERO, I, I * v, ZERO)
}

fn free_shift(d: f64) -> Mat2C {
    Mat2C::new(ONE, C64::from(d), ZERO, ONE)
}

/// Integrates `phi'' = v phi` across the mesh; `phi'` jumps by `z phi(a)` at a delta.
pub fn solve_phi(spec: &PotentialSpec, window: &SupportWindow, settings: &Settings) -> Result<ZeroEnergyField> {
    settings.validate()?;
    let mesh = Mesh::build(spec, window, settings.mesh())?;
    let ell = spec.ell;
    let tol = settings.tolerances();
    let x0 = mesh.x_minus();
    // rows (phi, phi'), columns (phi1, phi2)
    let mut state = Mat2C::new(ONE, C64::from(x0 / ell), ZERO, C64::from(1.0 / ell));
    let mut samples: Vec<Vec<Mat2C>> = Vec::with_capacity(mesh.blocks.len());
    for (b, blk) in mesh.blocks.iter().enumerate() {
        let z = mesh.jumps[b];
        if z != ZERO {
            state = Mat2C::new(ONE, ZERO, z, ONE) * state;
        }
        let col = if blk.is_zero() {
            blk.nodes.iter().map(|&x| free_shift(x - blk.lo) * state).collect()
        } else {
            integrate_linear_ode_dense(|x| phi_rhs(blk.v(x)), &blk.nodes, state, &tol)?
        };
        state = *col.last().unwrap();
        samples.push(col);
    }
    let pick = |f: fn(&Mat2C) -> C64| samples.iter().map(|c| c.iter().map(f).collect()).collect();
    Ok(ZeroEnergyField {
        phi1: pick(|m| m.m11),
        phi2: pick(|m| m.m12),
        dphi1: pick(|m| m.m21),
        dphi2: pick(|m| m.m22),
        mesh,
        ell,
        tol,
    })
}

impl ZeroEnergyField {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// All nodes in order; block boundaries appear twice.
    pub fn nodes(&self) -> Vec<f64> {
        self.mesh.blocks.iter().flat_map(|b| b.nodes.iter().copied()).collect()
    }

    fn last<T: Copy>(f: &MeshField<T>) -> T {
        *f.last().unwrap().last().unwrap()
    }

    pub fn at_right_end(&self) -> PhiValues {
        PhiValues {
            phi1: Self::last(&self.phi1),
            dphi1: Self::last(&self.dphi1),
            phi2: Self::last(&self.phi2),
            dphi2: Self::last(&self.dphi2),
        }
    }

    /// Computed `phi1(x_-)`, which the initial data pin to 1.
    pub fn phi1_left(&self) -> C64 {
        self.phi1[0][0]
    }

    /// `max |ell (phi1 phi2' - phi1' phi2) - 1|` over the nodes.
    pub fn wronskian_residual(&self) -> f64 {
        let w = self.mesh.map(|b, i, _| {
            (self.ell * (self.phi1[b][i] * self.dphi2[b][i] - self.dphi1[b][i] * self.phi2[b][i]) - ONE).norm()
        });
        w.iter().flatten().fold(0.0, |a, &r| a.max(r))
    }

    /// phi values anywhere: affine continuation outside the mesh, a short
    /// ODE run from the nearest node to the left inside it.
    pub fn phi_at(&self, x: f64) -> Result<PhiValues> {
        let to_values = |m: Mat2C| PhiValues { phi1: m.m11, phi2: m.m12, dphi1: m.m21, dphi2: m.m22 };
        let at = |b: usize, i: usize| {
            Mat2C::new(self.phi1[b][i], self.phi2[b][i], self.dphi1[b][i], self.dphi2[b][i])
        };
        if x < self.mesh.x_minus() {
            return Ok(to_values(free_shift(x - self.mesh.x_minus()) * at(0, 0)));
        }
        let nb = self.mesh.blocks.len();
        if x >= self.mesh.x_plus() {
            let n = self.mesh.blocks[nb - 1].nodes.len() - 1;
            return Ok(to_values(free_shift(x - self.mesh.x_plus()) * at(nb - 1, n)));
        }
        let b = self.mesh.locate(x);
        let blk = &self.mesh.blocks[b];
        let i = blk.nodes.partition_point(|&n| n <= x).saturating_sub(1);
        let start = at(b, i);
        let xi = blk.nodes[i];
        if x == xi {
            return Ok(to_values(start));
        }
        let m = if blk.is_zero() {
            free_shift(x - xi) * start
        } else {
            integrate_linear_ode(|t| phi_rhs(blk.v(t)), xi, x, start, &self.tol)?
        };
        Ok(to_values(m))
    }
}

/// `a_j = phi_j - x phi_j'`, `b_j = ell phi_j'` at the right end; g1 left unset.
pub fn coefficients(field: &ZeroEnergyField) -> LowEnergyCoefficients {
    let p = field.at_right_end();
    let xp = field.mesh.x_plus();
    LowEnergyCoefficients {
        a1: p.phi1 - p.dphi1 * xp,
        a2: p.phi2 - p.dphi2 * xp,
        b1: p.dphi1 * field.ell,
        b2: p.dphi2 * field.ell,
        g1: None,
        ell: field.ell,
    }
}

/// `ell [phi1(x) phi2(xt) - phi2(x) phi1(xt)] / phi1(x_-)`.
pub fn green(field: &ZeroEnergyField, x: f64, xt: f64) -> Result<C64> {
    let p = field.phi_at(x)?;
    let q = field.phi_at(xt)?;
    Ok((p.phi1 * q.phi2 - p.phi2 * q.phi1) * field.ell / field.phi1_left())
}

/// Analytic x-derivative of [`green`].
pub fn green_dx(field: &ZeroEnergyField, x: f64, xt: f64) -> Result<C64> {
    let p = field.phi_at(x)?;
    let q = field.phi_at(xt)?;
    Ok((p.dphi1 * q.phi2 - p.dphi2 * q.phi1) * field.ell / field.phi1_left())
}

/// `varsigma` at every node.
pub fn varsigma_field(field: &ZeroEnergyField) -> MeshField<C64> {
    let mesh = &field.mesh;
    let moment = mesh.map(|b, i, x| mesh.blocks[b].v(x) * field.phi1[b][i] * x.powi(3));
    let cum = mesh.cumulative(&moment, |b| {
        let a = mesh.blocks[b].lo;
        mesh.jumps[b] * field.phi1[b][0] * a.powi(3)
    });
    mesh.map(|b, i, x| {
        let p = field.phi1[b][i];
        let dp = field.dphi1[b][i];
        -((p * 3.0 - dp * x) * (x * x) + cum[b][i]) / 3.0
    })
}

/// `varsigma(x)` at an arbitrary point inside or beyond the mesh.
pub fn varsigma(field: &ZeroEnergyField, x: f64) -> Result<C64> {
    let mesh = &field.mesh;
    let s = varsigma_field(field);
    if x < mesh.x_minus() {
        return Ok(C64::from(-x * x));
    }
    // varsigma' = -2 x phi1, continuous across deltas
    let (x0, s0) = if x >= mesh.x_plus() {
        let nb = mesh.blocks.len() - 1;
        (mesh.x_plus(), *s[nb].last().unwrap())
    } else {
        let b = mesh.locate(x);
        let blk = &mesh.blocks[b];
        let i = blk.nodes.partition_point(|&n| n <= x).saturating_sub(1);
        (blk.nodes[i], s[b][i])
    };
    if x == x0 {
        return Ok(s0);
    }
    // 5-point Gauss-Legendre on [x0, x]; the span is at most one node spacing
    const GL: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let (c, r) = (0.5 * (x + x0), 0.5 * (x - x0));
    let mut acc = ZERO;
    for (t, w) in GL {
        let xt = c + r * t;
        acc += field.phi_at(xt)?.phi1 * (xt * w);
    }
    Ok(s0 - acc * (2.0 * r))
}

/// `g1 = ell^{-1} int d_x G(x_+, xt) v(xt) varsigma(xt) dxt`, delta terms included.
pub fn g1_coefficient(field: &ZeroEnergyField) -> C64 {
    let mesh = &field.mesh;
    let s = varsigma_field(field);
    let weight = |phi: &MeshField<C64>| {
        let f = mesh.map(|b, i, x| mesh.blocks[b].v(x) * phi[b][i] * s[b][i]);
        let cum = mesh.cumulative(&f, |b| {
            let left = b - 1;
            mesh.jumps[b] * *phi[left].last().unwrap() * *s[left].last().unwrap()
        });
        *cum.last().unwrap().last().unwrap()
    };
    let j1 = weight(&field.phi1);
    let j2 = weight(&field.phi2);
    let p = field.at_right_end();
    (p.dphi1 * j2 - p.dphi2 * j1) / field.phi1_left()
}

/// All five coefficients, g1 included.
pub fn low_energy_coefficients(field: &ZeroEnergyField) -> LowEnergyCoefficients {
    LowEnergyCoefficients { g1: Some(g1_coefficient(field)), ..coefficients(field) }
}

/// `M0 = [[a1, a2], [b1, b2]]` read off the zero-energy solutions.
pub fn m0_ode(field: &ZeroEnergyField) -> ZeroTransferMatrix {
    ZeroTransferMatrix { m0: coefficients(field).m0() }
}

/// Partial Dyson sums `U0_ij(x, x_-)` at every node of a mesh.
pub struct U0Field {
    pub mesh: Mesh,
    pub u: MeshField<Mat2C>,
    /// Norm of each order's contribution at the right end.
    pub term_norms: Vec<f64>,
}

/// The Dyson series of `U0` through `order`, computed as scalar iterated
/// integrals: `Q_1 = v w`, `Q_{n+1}(x) = v(x) int (x - xt) Q_n(xt) dxt` for
/// the weights `w = 1` and `w = x`.
pub fn u0_dyson(spec: &PotentialSpec, window: &SupportWindow, order: usize, settings: &Settings, cuts: &[f64]) -> Result<U0Field> {
    if order == 0 {
        return Err(Error::InvalidInput("Dyson order must be at least 1".into()));
    }
    settings.validate()?;
    let mesh = Mesh::build_with_cuts(spec, window, settings.mesh(), cuts)?;
    let ell = spec.ell;
    let zero_field = || mesh.map(|_, _, _| ZERO);
    // [sum of int Q_n, sum of int x Q_n] for each weight
    let mut sums = [[zero_field(), zero_field()], [zero_field(), zero_field()]];
    let mut term_norms = vec![0.0; order];
    for (wi, sum) in sums.iter_mut().enumerate() {
        let weight = |x: f64| if wi == 0 { 1.0 } else { x };
        let mut q = mesh.map(|b, _, x| mesh.blocks[b].v(x) * weight(x));
        let mut mass: Vec<C64> =
            mesh.blocks.iter().zip(&mesh.jumps).map(|(blk, &z)| z * weight(blk.lo)).collect();
        for norm in term_norms.iter_mut() {
            let c = mesh.cumulative(&q, |b| mass[b]);
            let xq = mesh.map(|b, i, x| q[b][i] * x);
            let mx = mesh.cumulative(&xq, |b| mass[b] * mesh.blocks[b].lo);
            for (b, blk) in mesh.blocks.iter().enumerate() {
                for i in 0..blk.nodes.len() {
                    sum[0][b][i] += c[b][i];
                    sum[1][b][i] += mx[b][i];
                }
            }
            let end = |f: &MeshField<C64>| f.last().unwrap().last().unwrap().norm();
            let scale = if wi == 0 { ell.max(1.0 / ell) } else { 1.0 };
            *norm += scale * (end(&c) + end(&mx));
            q = mesh.map(|b, i, x| mesh.blocks[b].v(x) * (c[b][i] * x - mx[b][i]));
            mass = (0..mesh.blocks.len())
                .map(|b| {
                    if b == 0 || mesh.jumps[b] == ZERO {
                        return ZERO;
                    }
                    let a = mesh.blocks[b].lo;
                    let cl = *c[b - 1].last().unwrap();
                    let ml = *mx[b - 1].last().unwrap();
                    mesh.jumps[b] * (cl * a - ml)
                })
                .collect();
        }
    }
    let [[c1, m1], [cx, mxx]] = &sums;
    let u = mesh.map(|b, i, _| {
        Mat2C::new(ONE - m1[b][i], -mxx[b][i] / ell, c1[b][i] * ell, ONE + cx[b][i])
    });
    Ok(U0Field { mesh, u, term_norms })
}

pub fn m0_dyson(spec: &PotentialSpec, window: &SupportWindow, order: usize, settings: &Settings) -> Result<ZeroTransferMatrix> {
    let f = u0_dyson(spec, window, order, settings, &[])?;
    Ok(ZeroTransferMatrix { m0: *f.u.last().unwrap().last().unwrap() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiFromU0 {
    pub phi1: C64,
    pub phi2: C64,
    pub phi1_minus_x_dphi1: C64,
}

/// `phi1 = U0_11 + x U0_21 / ell`, `phi2 = U0_12 + x U0_22 / ell`,
/// `phi1 - x phi1' = U0_11`, with `U0(x, x_-)` from the Dyson series.
///
/// At a delta centre the left limit is returned.
pub fn phi_from_u0(spec: &PotentialSpec, window: &SupportWindow, x: f64, settings: &Settings) -> Result<PhiFromU0> {
    let ell = spec.ell;
    let compose = |u: Mat2C| PhiFromU0 {
        phi1: u.m11 + u.m21 * (x / ell),
        phi2: u.m12 + u.m22 * (x / ell),
        phi1_minus_x_dphi1: u.m11,
    };
    let inside = x > window.x_minus && x < window.x_plus;
    let cut = [x];
    let f = u0_dyson(spec, window, settings.dyson_order, settings, if inside { &cut[..] } else { &[] })?;
    let u = if x <= f.mesh.x_minus() {
        Mat2C::identity()
    } else if x >= f.mesh.x_plus() {
        *f.u.last().unwrap().last().unwrap()
    } else {
        let b = f.mesh.blocks.iter().rposition(|blk| blk.hi <= x).map_or(0, |b| b);
        let blk = &f.mesh.blocks[b];
        if blk.hi <= x {
            *f.u[b].last().unwrap()
        } else {
            // x sits inside the first (zero) padding block
            f.u[b][0]
        }
    };
    Ok(compose(u))
}
