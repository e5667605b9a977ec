//! Property bodies shared by the `properties` test and the acceptance run.
#![allow(dead_code)]

use dynscat::cli;
use dynscat::config::Settings;
use dynscat::halfline::{reflection, reflection_series, BoundaryCondition, HalfLineProblem};
use dynscat::lowenergy::{amplitude_series, classify_resonance, laurent_expansion, Branch};
use dynscat::numerics::{integrate_linear_ode, mat_det, mat_mul, quad, Grid, Mat2C, Tolerances, C64, I, ONE, ZERO};
use dynscat::oracles::{barrier_lowk, barrier_transfer, cosh_sqrt, sinhc_sqrt, BarrierParams};
use dynscat::potential::{evaluate, parse_potential, to_json, truncate, PotentialSpec, PotentialTerm, Segment, TailBound};
use dynscat::propagate::{dyson_transfer, transfer_matrix};
use dynscat::zeroenergy::{low_energy_coefficients, m0_dyson, m0_ode, solve_phi, varsigma, LowEnergyCoefficients};
use dynscat::SupportWindow;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Outcome = (&'static str, Result<(), String>);

pub fn check<S: Strategy>(
    name: &'static str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 64, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    (name, runner.run(&strategy, test).map_err(|e| e.to_string()))
}

pub fn fast_settings() -> Settings {
    Settings { mesh_intervals: 512, ..Settings::default() }
}

pub fn cplx(r: f64) -> impl Strategy<Value = C64> + Clone {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn unit_disk() -> impl Strategy<Value = C64> + Clone {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn mat(entry: impl Strategy<Value = C64> + Clone) -> impl Strategy<Value = Mat2C> {
    (entry.clone(), entry.clone(), entry.clone(), entry).prop_map(|(a, b, c, d)| Mat2C::new(a, b, c, d))
}

/// Up to four segments and two deltas on [-2, 2].
pub fn arb_potential(real: bool) -> impl Strategy<Value = PotentialSpec> {
    let value = move |r: f64| (-r..r, -r..r).prop_map(move |(a, b)| C64::new(a, if real { 0.0 } else { b }));
    let seg = (value(4.0), -2.0..1.5f64, 0.1..1.5f64).prop_map(|(value, x_lo, w)| Segment { x_lo, x_hi: (x_lo + w).min(2.0), value });
    let segs = proptest::collection::vec(seg.prop_map(|s| PotentialTerm::Piecewise(vec![s])), 1..4);
    let delta = (value(3.0), -2.0..2.0f64).prop_map(|(strength, center)| PotentialTerm::Delta { strength, center });
    let deltas = proptest::collection::vec(delta, 0..3);
    (0.5..2.0f64, segs, deltas).prop_map(|(ell, s, d)| {
        let mut terms = s;
        terms.extend(d);
        PotentialSpec::new(ell, None, terms).unwrap()
    })
}

fn window(spec: &PotentialSpec) -> SupportWindow {
    truncate(spec, 1e-12, 3).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn numerics(cases: u32) -> Vec<Outcome> {
    vec![
        check("det multiplicative", cases, (mat(unit_disk()), mat(unit_disk())), |(a, b)| {
            let d = mat_det(mat_mul(a, b)) - mat_det(a) * mat_det(b);
            prop_assert!(d.norm() <= 1e-14 * 16.0, "{d}");
            Ok(())
        }),
        check("traceless ode keeps det", cases, (cplx(2.0), cplx(2.0), cplx(2.0), cplx(1.0)), |(a, b, c, s)| {
            let tol = Tolerances::default();
            let rhs = move |x: f64| Mat2C::new(a + s * x, b, c, -a - s * x);
            let u = integrate_linear_ode(rhs, 0.0, 1.0, Mat2C::identity(), &tol).unwrap();
            prop_assert!((u.det() - ONE).norm() <= 10.0 * tol.rtol * u.norm().max(1.0).powi(2));
            Ok(())
        }),
        check("quad exact for affine", cases, (proptest::collection::vec(0.01..1.0f64, 1..40), cplx(3.0), cplx(3.0), -5.0..5.0f64), |(steps, p, q, x0)| {
            let mut xs = vec![x0];
            for h in steps {
                xs.push(xs.last().unwrap() + h);
            }
            let (a, b) = (xs[0], *xs.last().unwrap());
            let g = Grid::from_fn(xs, |x| p + q * x).unwrap();
            let exact = p * (b - a) + q * (0.5 * (b * b - a * a));
            prop_assert!((quad(&g).unwrap().value - exact).norm() <= 1e-12 * exact.norm().max(1.0) * (b - a).max(1.0));
            Ok(())
        }),
    ]
}

fn arb_any_spec() -> impl Strategy<Value = PotentialSpec> {
    let seg = (cplx(5.0), -5.0..5.0f64, 0.01..2.0f64)
        .prop_map(|(value, x_lo, w)| PotentialTerm::Piecewise(vec![Segment { x_lo, x_hi: x_lo + w, value }]));
    let delta = (cplx(5.0), -5.0..5.0f64).prop_map(|(strength, center)| PotentialTerm::Delta { strength, center });
    let sampled = (proptest::collection::vec(cplx(5.0), 2..10), -5.0..5.0f64, 0.05..0.5f64).prop_map(|(v, x0, h)| {
        let xs = (0..v.len()).map(|i| x0 + h * i as f64).collect();
        PotentialTerm::Sampled(Grid::new(xs, v).unwrap())
    });
    let term = prop_oneof![delta, seg, sampled];
    (0.1..10.0f64, proptest::collection::vec(term, 1..5), 0.2..3.0f64, 0.1..5.0f64)
        .prop_map(|(ell, terms, mu, c)| PotentialSpec::new(ell, Some(TailBound { mu, c }), terms).unwrap())
}

pub fn potential(cases: u32) -> Vec<Outcome> {
    vec![
        check("evaluate linear in terms", cases, (arb_any_spec(), arb_any_spec(), -8.0..8.0f64), |(a, b, x)| {
            let mut u = a.clone();
            u.terms.extend(b.terms.iter().cloned());
            let (l, r) = (evaluate(&u, x), evaluate(&a, x) + evaluate(&b, x));
            // summation order differs, so equality is up to rounding
            prop_assert!((l - r).norm() <= 4.0 * f64::EPSILON * (1.0 + r.norm()) * (u.terms.len() as f64));
            Ok(())
        }),
        check("window grows as eps shrinks", cases, (arb_any_spec(), 1e-14..1e-2f64, 1e-3..1.0f64, 0u32..4), |(s, e, f, n)| {
            let (w1, w2) = (truncate(&s, e, n).unwrap(), truncate(&s, e * f, n).unwrap());
            prop_assert!(w2.x_minus <= w1.x_minus && w2.x_plus >= w1.x_plus);
            Ok(())
        }),
        check("json round trip", cases, arb_any_spec(), |s| {
            prop_assert_eq!(parse_potential(to_json(&s).as_bytes()).unwrap(), s);
            Ok(())
        }),
    ]
}

pub fn propagate(cases: u32) -> Vec<Outcome> {
    let tol = Tolerances::default();
    vec![
        check("det M = 1", cases, (arb_potential(false), 0.05..5.0f64, -0.5..0.5f64), move |(s, kr, ki)| {
            let k = C64::new(kr, ki);
            let m = transfer_matrix(&s, k, &window(&s), &tol).unwrap();
            prop_assert!(m.det_residual() <= 10.0 * tol.rtol * m.m.norm().max(1.0).powi(2), "{}", m.det_residual());
            Ok(())
        }),
        check("composition", cases, (arb_potential(false), 0.05..5.0f64, 0.05..0.95f64), move |(s, k, t)| {
            let w = window(&s);
            let c = w.x_minus + t * w.width();
            prop_assume!(s.deltas().all(|(_, a)| (a - c).abs() > 1e-9));
            let k = C64::from(k);
            let full = transfer_matrix(&s, k, &w, &tol).unwrap().m;
            let keep = |left: bool| {
                let mut t = s.clone();
                t.terms.retain(|term| match term {
                    PotentialTerm::Delta { center, .. } => (*center < c) == left,
                    _ => true,
                });
                t
            };
            let left = transfer_matrix(&keep(true), k, &SupportWindow::new(w.x_minus, c).unwrap(), &tol).unwrap().m;
            let right = transfer_matrix(&keep(false), k, &SupportWindow::new(c, w.x_plus).unwrap(), &tol).unwrap().m;
            let scale = left.norm() * right.norm();
            prop_assert!((right * left - full).max_abs() <= 1e-8 * scale.max(1.0));
            Ok(())
        }),
        check("real symmetry", cases, (arb_potential(true), 0.05..5.0f64), move |(s, k)| {
            let m = transfer_matrix(&s, C64::from(k), &window(&s), &tol).unwrap().m;
            let sc = 1e-8 * m.norm().max(1.0);
            prop_assert!((m.m11 - m.m22.conj()).norm() <= sc && (m.m12 - m.m21.conj()).norm() <= sc);
            Ok(())
        }),
        check("dyson remainder factorial", cases / 10 + 1, barrier_params(4.0), |p| {
            let s = PotentialSpec::barrier(p.z, p.a, p.len, p.ell).unwrap();
            let w = window(&s);
            let st = fast_settings();
            let k = C64::from(1.0 / p.len);
            let r: Vec<f64> = (4..=10).map(|n| dyson_transfer(&s, k, &w, n, &st).unwrap().remainder_bound).collect();
            let ratios: Vec<f64> = r.windows(2).map(|x| x[1] / x[0]).collect();
            prop_assert!(ratios.windows(2).all(|x| x[1] < x[0]), "{ratios:?}");
            Ok(())
        }),
    ]
}

/// Barriers with `|z| L^2 <= bound`.
pub fn barrier_params(bound: f64) -> impl Strategy<Value = BarrierParams> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU, -1.0..1.0f64, 0.3..2.0f64).prop_map(move |(r, t, a, l)| {
        let z = C64::from_polar(r * bound / (l * l), t);
        let ell = l.max(1.0 / z.norm().max(1e-12).sqrt()).min(10.0);
        BarrierParams::new(z, a, l, ell).unwrap()
    })
}

fn coeffs_of(s: &PotentialSpec, st: &Settings) -> LowEnergyCoefficients {
    low_energy_coefficients(&solve_phi(s, &window(s), st).unwrap())
}

pub fn zeroenergy(cases: u32) -> Vec<Outcome> {
    vec![
        check("wronskian constant", cases, arb_potential(false), |s| {
            let st = fast_settings();
            let f = solve_phi(&s, &window(&s), &st).unwrap();
            let scale = f.at_right_end().phi2.norm().max(1.0) * f.at_right_end().dphi1.norm().max(1.0) * s.ell;
            prop_assert!(f.wronskian_residual() <= 10.0 * st.rtol * scale.max(1.0), "{}", f.wronskian_residual());
            Ok(())
        }),
        check("det M0 = 1", cases, arb_potential(false), |s| {
            let c = coeffs_of(&s, &fast_settings());
            let scale = (c.a1.norm() * c.b2.norm()).max(c.a2.norm() * c.b1.norm()).max(1.0);
            prop_assert!(c.wronskian_residual() <= 1e-9 * scale);
            Ok(())
        }),
        check("dyson M0 non-increasing", cases / 10 + 1, barrier_params(4.0), |p| {
            let s = PotentialSpec::barrier(p.z, p.a, p.len, p.ell).unwrap();
            let w = window(&s);
            let st = fast_settings();
            let reference = m0_ode(&solve_phi(&s, &w, &st).unwrap()).m0;
            let errs: Vec<f64> = (3..=12).map(|n| (m0_dyson(&s, &w, n, &st).unwrap().m0 - reference).max_abs()).collect();
            // the highest order sits at the mesh quadrature floor; steps below it are noise
            let floor = errs[errs.len() - 1];
            prop_assert!(errs.windows(2).all(|e| e[1] <= e[0] + floor), "{errs:?}");
            Ok(())
        }),
        check("refinement invariance", cases / 10 + 1, arb_potential(false), |s| {
            let w = window(&s);
            let coarse = Settings { mesh_intervals: 2048, ..Settings::default() };
            let fine = Settings { mesh_intervals: 4096, ..Settings::default() };
            let (fc, ff) = (solve_phi(&s, &w, &coarse).unwrap(), solve_phi(&s, &w, &fine).unwrap());
            let x = w.x_plus;
            let (sc, sf) = (varsigma(&fc, x).unwrap(), varsigma(&ff, x).unwrap());
            let (gc, gf) = (low_energy_coefficients(&fc).g1.unwrap(), low_energy_coefficients(&ff).g1.unwrap());
            prop_assert!(rel(sc, sf) <= 1e-8 && rel(gc, gf) <= 1e-8, "{} {}", rel(sc, sf), rel(gc, gf));
            Ok(())
        }),
        check("ell covariance", cases, (arb_potential(false), prop_oneof![Just(0.5), Just(2.0), 0.3..3.0f64]), |(s, lam)| {
            let st = Settings::default();
            let c = coeffs_of(&s, &st);
            let d = coeffs_of(&s.with_ell(s.ell * lam).unwrap(), &st);
            prop_assert!(rel(d.a1, c.a1) <= 1e-10 && rel(d.b2, c.b2) <= 1e-10);
            prop_assert!(rel(d.b1, c.b1 * lam) <= 1e-10 && rel(d.a2, c.a2 / lam) <= 1e-10);
            prop_assert!(rel(d.g1.unwrap(), c.g1.unwrap() / lam) <= 1e-10);
            Ok(())
        }),
    ]
}

/// Power series `p / q` through `n` terms.
pub fn series_div(p: &[C64], q: &[C64], n: usize) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = p.get(i).copied().unwrap_or(ZERO);
        for (j, o) in out.iter().enumerate() {
            acc -= o * q.get(i - j).copied().unwrap_or(ZERO);
        }
        out.push(acc / q[0]);
    }
    out
}

pub fn lowenergy(cases: u32) -> Vec<Outcome> {
    vec![
        check("U(-1) proportional to K", cases, arb_potential(false), |s| {
            let st = fast_settings();
            let f = solve_phi(&s, &window(&s), &st).unwrap();
            let l = laurent_expansion(&f, 1).unwrap();
            let c = low_energy_coefficients(&f);
            let want = Mat2C::new(ONE, ONE, -ONE, -ONE) * (-I * c.b1 / (2.0 * s.ell));
            prop_assert!((l.coeff(-1) - want).max_abs() <= 1e-10 * want.max_abs().max(1.0));
            Ok(())
        }),
        check("series from Laurent ratios", cases, arb_potential(false), |s| {
            let st = fast_settings();
            let f = solve_phi(&s, &window(&s), &st).unwrap();
            let c = low_energy_coefficients(&f);
            prop_assume!(!classify_resonance(&c, 1e-2).unwrap().resonant);
            let l = laurent_expansion(&f, 2).unwrap();
            let col = |pick: fn(&Mat2C) -> C64| (-1..=2).map(|m| pick(&l.coeff(m))).collect::<Vec<_>>();
            let (u21, u12, u22) = (col(|m| m.m21), col(|m| m.m12), col(|m| m.m22));
            let neg: Vec<C64> = u21.iter().map(|z| -z).collect();
            let rl = series_div(&neg, &u22, 3);
            let rr = series_div(&u12, &u22, 3);
            let mut t = vec![ZERO];
            t.extend(series_div(&[ONE], &u22, 3));
            let a = amplitude_series(&c, 3, st.tau).unwrap();
            prop_assert_eq!(a.branch, Branch::Generic);
            for (n, (x, y)) in a.rl.iter().zip(&rl).enumerate() {
                prop_assert!(rel(*x, *y * s.ell.powi(-(n as i32))) <= 1e-10, "rl {n}: {x} vs {y}");
            }
            for (n, (x, y)) in a.rr.iter().zip(&rr).enumerate() {
                prop_assert!(rel(*x, *y * s.ell.powi(-(n as i32))) <= 1e-10, "rr {n}: {x} vs {y}");
            }
            for (n, (x, y)) in a.t.iter().zip(&t).enumerate() {
                prop_assert!(rel(*x, *y * s.ell.powi(-(n as i32))) <= 1e-10, "t {n}: {x} vs {y}");
            }
            Ok(())
        }),
        check("resonant branch a1 = 1/b2", cases, (1u32..3, -1.0..1.0f64, 0.3..2.0f64), |(n, a, l)| {
            let z = C64::from(-(std::f64::consts::PI * n as f64 / l).powi(2));
            let s = PotentialSpec::barrier(z, a, l, l).unwrap();
            let c = coeffs_of(&s, &Settings::default());
            prop_assert!(classify_resonance(&c, 1e-8).unwrap().resonant);
            prop_assert!(rel(c.a1, c.b2.inv()) <= 1e-9);
            Ok(())
        }),
        check("ell independence", cases, (arb_potential(false), prop_oneof![Just(0.5), Just(2.0)]), |(s, lam)| {
            let st = Settings::default();
            let f = solve_phi(&s, &window(&s), &st).unwrap();
            let g = solve_phi(&s.with_ell(s.ell * lam).unwrap(), &window(&s), &st).unwrap();
            let (l1, l2) = (laurent_expansion(&f, 1).unwrap(), laurent_expansion(&g, 1).unwrap());
            for m in -1..=1 {
                let (x, y) = (l1.coeff(m), l2.coeff(m));
                prop_assert!((x - y).max_abs() <= 1e-10 * x.max_abs().max(1.0), "m = {m}");
            }
            let (c1, c2) = (low_energy_coefficients(&f), low_energy_coefficients(&g));
            if let (Ok(a1), Ok(a2)) = (amplitude_series(&c1, 3, st.tau), amplitude_series(&c2, 3, st.tau)) {
                prop_assume!(a1.branch == a2.branch);
                for (u, v) in [(&a1.rl, &a2.rl), (&a1.rr, &a2.rr), (&a1.t, &a2.t)] {
                    for (n, (x, y)) in u.iter().zip(v.iter()).enumerate() {
                        prop_assert!(rel(*y * lam.powi(n as i32), *x) <= 1e-10, "term {n}");
                    }
                }
            }
            Ok(())
        }),
    ]
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = (xs.iter().map(|x| x.ln()).collect(), ys.iter().map(|y| y.ln()).collect());
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    slope(xs, ys)
}

pub fn halfline(cases: u32) -> Vec<Outcome> {
    let real_bc = (-2.0..2.0f64, -2.0..2.0f64).prop_filter("nonzero", |(a, b)| a.abs() + b.abs() > 1e-3);
    vec![
        check("unitarity", cases, (arb_potential(true).prop_filter("x >= 0", |s| s.terms.iter().all(|t| t.support().0 >= 0.0)), real_bc, 0.05..5.0f64), |(s, (a, b), k)| {
            let p = HalfLineProblem::new(s, BoundaryCondition::constant(C64::from(a), C64::from(b)).unwrap()).unwrap();
            match reflection(&p, C64::from(k), &fast_settings()) {
                Ok(r) => prop_assert!((r.norm() - 1.0).abs() <= 1e-8, "{}", r.norm()),
                Err(e) => return Err(TestCaseError::reject(e.to_string())),
            }
            Ok(())
        }),
        check("series remainder slope", cases, (cplx(3.0), 0.1..2.0f64, prop_oneof![Just(None), (-2.0..2.0f64).prop_map(Some)]), |(z, a, rho)| {
            prop_assume!(z.norm() > 0.2);
            let s = PotentialSpec::delta(z, a, 1.0 / z.norm()).unwrap();
            let bc = match rho {
                None => BoundaryCondition::dirichlet(),
                Some(r) => BoundaryCondition::constant(C64::from(r), ONE).unwrap(),
            };
            let p = HalfLineProblem::new(s.clone(), bc).unwrap();
            let st = fast_settings();
            let c = coeffs_of(&s, &st);
            let series = reflection_series(&p, &c, 4, st.tau).unwrap();
            prop_assume!(series.branch == Branch::Generic);
            let ks: Vec<f64> = (0..6).map(|i| 1e-3 * 2f64.powi(i) / s.ell).collect();
            let errs: Vec<f64> = ks
                .iter()
                .map(|&k| (reflection(&p, C64::from(k), &st).unwrap() - series.evaluate(C64::from(k))).norm())
                .collect();
            prop_assume!(errs.iter().all(|e| *e > 1e-13));
            let sl = slope(&ks, &errs);
            prop_assert!(sl >= series.truncation_order as f64, "slope {sl}");
            Ok(())
        }),
        check("dirichlet and neumann gamma exact", cases, (0.0..1e6f64).prop_filter("nonzero", |x| *x > 0.0), |scale| {
            let d = BoundaryCondition::constant(C64::from(scale), ZERO).unwrap();
            let n = BoundaryCondition::constant(ZERO, C64::from(scale)).unwrap();
            prop_assert_eq!(d.gamma(ONE).unwrap(), Some(ONE));
            prop_assert_eq!(n.gamma(ONE).unwrap(), Some(-ONE));
            Ok(())
        }),
    ]
}

pub fn oracles(cases: u32) -> Vec<Outcome> {
    vec![
        check("barrier det and symmetry", cases, (barrier_params(10.0), 0.1..5.0f64, -0.3..0.3f64), |(p, kr, ki)| {
            let k = C64::new(kr, ki);
            let m = barrier_transfer(&p, k).unwrap();
            let mm = barrier_transfer(&p, -k).unwrap();
            let sc = 1e-12 * m.norm().max(1.0).powi(2);
            prop_assert!((m.det() - ONE).norm() <= sc, "{}", (m.det() - ONE).norm());
            prop_assert!((m.m11 - mm.m22).norm() <= sc && (m.m12 - mm.m21).norm() <= sc);
            Ok(())
        }),
        check("barrier coefficient wronskian", cases, barrier_params(10.0), |p| {
            let c = barrier_lowk(&p);
            let sc = (c.a1.norm() * c.b2.norm()).max(c.a2.norm() * c.b1.norm()).max(1.0);
            prop_assert!(c.wronskian_residual() <= 1e-12 * sc);
            Ok(())
        }),
        check("branch invariance", cases, cplx(20.0), |w| {
            let r = w.sqrt();
            let (c1, s1) = (cosh_sqrt(w), sinhc_sqrt(w));
            let (c2, s2) = ((-r).cosh(), (-r).sinh() / (-r));
            prop_assert!(rel(c1, c2) <= 1e-12 && rel(s1, s2) <= 1e-12);
            Ok(())
        }),
    ]
}

pub fn cli(cases: u32) -> Vec<Outcome> {
    vec![
        check("deterministic output", cases / 10 + 1, (arb_potential(false), 1usize..5, prop_oneof![Just("json"), Just("csv")]), |(s, n, fmt)| {
            let dir = tempfile::tempdir().unwrap();
            let pot = dir.path().join("p.json");
            std::fs::write(&pot, to_json(&s)).unwrap();
            let mut outs = Vec::new();
            for (i, threads) in ["1", "3"].iter().enumerate() {
                let out = dir.path().join(format!("o{i}"));
                let status = std::process::Command::new(env!("CARGO_BIN_EXE_dynscat"))
                    .args([
                        "transfer", "--potential", pot.to_str().unwrap(), "--k", &format!("0.1:3:{n}"),
                        "--format", fmt, "--threads", threads, "--out", out.to_str().unwrap(),
                    ])
                    .output()
                    .unwrap()
                    .status;
                prop_assert_eq!(status.code(), Some(0));
                outs.push(std::fs::read(out).unwrap());
            }
            prop_assert_eq!(&outs[0], &outs[1]);
            Ok(())
        }),
        check("bad grids exit 2", cases, "[a-z0-9:.][a-z0-9:.-]{0,11}", |g| {
            prop_assume!(cli::KGrid::parse(&g).is_err());
            let dir = tempfile::tempdir().unwrap();
            let pot = dir.path().join("p.json");
            std::fs::write(&pot, to_json(&PotentialSpec::free(1.0).unwrap())).unwrap();
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_dynscat"))
                .args(["transfer", "--potential", pot.to_str().unwrap(), "--k", &g])
                .output()
                .unwrap();
            prop_assert_eq!(out.status.code(), Some(2));
            prop_assert!(out.stdout.is_empty());
            Ok(())
        }),
    ]
}

pub fn all_modules(cases: u32) -> Vec<(&'static str, Vec<Outcome>)> {
    vec![
        ("numerics", numerics(cases)),
        ("potential", potential(cases)),
        ("propagate", propagate(cases)),
        ("zeroenergy", zeroenergy(cases)),
        ("lowenergy", lowenergy(cases)),
        ("halfline", halfline(cases)),
        ("oracles", oracles(cases)),
        ("cli", cli(cases)),
    ]
}
