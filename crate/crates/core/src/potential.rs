//! Potentials v(x): delta terms, piecewise-constant segments and sampled
//! data, with JSON I/O and tail truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Grid, C64, ZERO};

/// `|v(x)| <= c e^{-mu |x|}` outside the sampled data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub mu: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialTerm {
    /// `strength * delta(x - center)`
    Delta { strength: C64, center: f64 },
    Piecewise(Vec<Segment>),
    /// Linearly interpolated samples, zero outside the grid.
    Sampled(Grid),
}

impl PotentialTerm {
    /// Closed hull of the points where the term can be nonzero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PotentialTerm::Delta { center, .. } => (*center, *center),
            PotentialTerm::Piecewise(segs) => segs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.x_lo), hi.max(s.x_hi))
            }),
            PotentialTerm::Sampled(g) => (g.nodes()[0], *g.nodes().last().unwrap()),
        }
    }

    /// A sampled term whose end samples are nonzero is taken to continue past the data.
    fn open_ended(&self) -> bool {
        match self {
            PotentialTerm::Sampled(g) => g.values()[0] != ZERO || *g.values().last().unwrap() != ZERO,
            _ => false,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            PotentialTerm::Delta { strength, .. } => strength.im == 0.0,
            PotentialTerm::Piecewise(segs) => segs.iter().all(|s| s.value.im == 0.0),
            PotentialTerm::Sampled(g) => g.values().iter().all(|v| v.im == 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub ell: f64,
    pub tail: Option<TailBound>,
    pub terms: Vec<PotentialTerm>,
}

/// The interval `[x_minus, x_plus]` the computation is restricted to.
///
/// A lone delta has a one-point support, so `x_minus == x_plus` is allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportWindow {
    pub x_minus: f64,
    pub x_plus: f64,
}

impl SupportWindow {
    pub fn new(x_minus: f64, x_plus: f64) -> Result<Self> {
        if !(x_minus.is_finite() && x_plus.is_finite()) || x_minus > x_plus {
            return Err(Error::InvalidInput(format!("bad window [{x_minus}, {x_plus}]")));
        }
        Ok(Self { x_minus, x_plus })
    }

    pub fn width(&self) -> f64 {
        self.x_plus - self.x_minus
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_minus && x <= self.x_plus
    }
}

impl PotentialSpec {
    pub fn new(ell: f64, tail: Option<TailBound>, terms: Vec<PotentialTerm>) -> Result<Self> {
        let spec = Self { ell, tail, terms };
        spec.validate().map_err(|(path, message)| Error::Parse { path, message })?;
        Ok(spec)
    }

    pub fn delta(strength: C64, center: f64, ell: f64) -> Result<Self> {
        Self::new(ell, None, vec![PotentialTerm::Delta { strength, center }])
    }

    /// `z` on `[a, a + len]`, zero elsewhere.
    pub fn barrier(z: C64, a: f64, len: f64, ell: f64) -> Result<Self> {
        Self::new(ell, None, vec![PotentialTerm::Piecewise(vec![Segment { x_lo: a, x_hi: a + len, value: z }])])
    }

    /// The zero potential, represented by a zero-strength delta at the origin.
    pub fn free(ell: f64) -> Result<Self> {
        Self::delta(ZERO, 0.0, ell)
    }

    pub fn with_ell(&self, ell: f64) -> Result<Self> {
        Self::new(ell, self.tail, self.terms.clone())
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(PotentialTerm::is_real)
    }

    pub fn deltas(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        self.terms.iter().filter_map(|t| match t {
            PotentialTerm::Delta { strength, center } => Some((*strength, *center)),
            _ => None,
        })
    }

    fn validate(&self) -> std::result::Result<(), (String, String)> {
        let err = |p: String, m: &str| Err((p, m.to_string()));
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return err("ell".into(), "must be a positive finite number");
        }
        if let Some(t) = self.tail {
            if !(t.mu > 0.0 && t.mu.is_finite()) {
                return err("tail.mu".into(), "must be positive");
            }
            if !(t.c > 0.0 && t.c.is_finite()) {
                return err("tail.C".into(), "must be positive");
            }
        }
        if self.terms.is_empty() {
            return err("terms".into(), "at least one term is required");
        }
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        for (i, term) in self.terms.iter().enumerate() {
            match term {
                PotentialTerm::Delta { strength, center } => {
                    if !center.is_finite() {
                        return err(format!("terms[{i}].delta.center"), "must be finite");
                    }
                    if !finite(*strength) {
                        return err(format!("terms[{i}].delta.strength"), "must be finite");
                    }
                }
                PotentialTerm::Piecewise(segs) => {
                    if segs.is_empty() {
                        return err(format!("terms[{i}].piecewise"), "needs at least one segment");
                    }
                    for (j, s) in segs.iter().enumerate() {
                        let p = format!("terms[{i}].piecewise[{j}]");
                        if !(s.x_lo.is_finite() && s.x_hi.is_finite()) || !finite(s.value) {
                            return err(p, "non-finite segment data");
                        }
                        if s.x_lo >= s.x_hi {
                            return err(p, "xlo must be smaller than xhi");
                        }
                    }
                    let mut sorted: Vec<(usize, &Segment)> = segs.iter().enumerate().collect();
                    sorted.sort_by(|a, b| a.1.x_lo.total_cmp(&b.1.x_lo));
                    for w in sorted.windows(2) {
                        if w[1].1.x_lo < w[0].1.x_hi {
                            return err(format!("terms[{i}].piecewise[{}]", w[1].0), "segments overlap");
                        }
                    }
                }
                PotentialTerm::Sampled(g) => {
                    if g.len() < 2 {
                        return err(format!("terms[{i}].sampled.x"), "needs at least two samples");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Smooth part of v at `x`; delta terms do not contribute.
///
/// Segments are half-open `[x_lo, x_hi)`.
pub fn evaluate(spec: &PotentialSpec, x: f64) -> C64 {
    spec.terms.iter().map(|t| evaluate_term(t, x)).sum()
}

pub fn evaluate_term(term: &PotentialTerm, x: f64) -> C64 {
    match term {
        PotentialTerm::Delta { .. } => ZERO,
        PotentialTerm::Piecewise(segs) => {
            segs.iter().filter(|s| s.x_lo <= x && x < s.x_hi).map(|s| s.value).sum()
        }
        PotentialTerm::Sampled(g) => interpolate(g, x),
    }
}

fn interpolate(g: &Grid, x: f64) -> C64 {
    let xs = g.nodes();
    let vs = g.values();
    if x < xs[0] || x > xs[xs.len() - 1] {
        return ZERO;
    }
    let i = match xs.partition_point(|&n| n <= x) {
        0 => 0,
        p if p >= xs.len() => xs.len() - 2,
        p => p - 1,
    };
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    vs[i] * (1.0 - t) + vs[i + 1] * t
}

/// Smallest `X >= 0` with `c e^{-mu x} (1 + x)^p < eps` for every `x > X`.
pub fn tail_cutoff(tail: TailBound, eps: f64, p: i32) -> f64 {
    let f = |x: f64| tail.c * (-tail.mu * x).exp() * (1.0 + x).powi(p);
    let peak = (p as f64 / tail.mu - 1.0).max(0.0);
    if f(peak) < eps {
        return peak;
    }
    let mut lo = peak;
    let mut hi = peak + 1.0;
    while f(hi) >= eps {
        lo = hi;
        hi = 2.0 * hi + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    hi
}

/// Support window on which every term is kept, with sampled data that runs
/// open-ended into a tail cut where the moment-weighted bound drops below `eps_tail`.
pub fn truncate(spec: &PotentialSpec, eps_tail: f64, max_order: u32) -> Result<SupportWindow> {
    if !(eps_tail > 0.0) {
        return Err(Error::InvalidInput("eps_tail must be positive".into()));
    }
    let cut = if spec.terms.iter().any(PotentialTerm::open_ended) {
        let tail = spec.tail.ok_or_else(|| {
            Error::Config("sampled term does not vanish at its ends; tail metadata {mu, C} is required".into())
        })?;
        Some(tail_cutoff(tail, eps_tail, 2 * max_order as i32 + 1))
    } else {
        None
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for term in &spec.terms {
        let (a, b) = term.support();
        let (a, b) = match (term, cut) {
            (PotentialTerm::Sampled(_), Some(x)) => (a.max(-x), b.min(x)),
            _ => (a, b),
        };
        if a <= b {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if !lo.is_finite() {
        // every term lies outside the cut; collapse onto the support point
        // nearest the origin, which the first term to survive a larger cut contains
        let p = spec
            .terms
            .iter()
            .map(|t| {
                let (a, b) = t.support();
                0.0f64.clamp(a, b)
            })
            .min_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        return SupportWindow::new(p, p);
    }
    SupportWindow::new(lo, hi)
}

// JSON layer ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    ell: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<RawTail>,
    terms: Vec<RawTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    mu: f64,
    #[serde(rename = "C")]
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawTerm {
    Delta(RawDelta),
    Piecewise(Vec<RawSegment>),
    Sampled(RawSampled),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelta {
    strength: [f64; 2],
    center: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    xlo: f64,
    xhi: f64,
    value: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampled {
    x: Vec<f64>,
    v: Vec<[f64; 2]>,
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn arr(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn parse_potential(text: &[u8]) -> Result<PotentialSpec> {
    let de = &mut serde_json::Deserializer::from_slice(text);
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if path.is_empty() || path == "." {
            format!("line {} column {}", inner.line(), inner.column())
        } else {
            path
        };
        Error::Parse { path, message: inner.to_string() }
    })?;
    let mut terms = Vec::with_capacity(raw.terms.len());
    for (i, t) in raw.terms.into_iter().enumerate() {
        terms.push(match t {
            RawTerm::Delta(d) => PotentialTerm::Delta { strength: c(d.strength), center: d.center },
            RawTerm::Piecewise(segs) => PotentialTerm::Piecewise(
                segs.into_iter().map(|s| Segment { x_lo: s.xlo, x_hi: s.xhi, value: c(s.value) }).collect(),
            ),
            RawTerm::Sampled(s) => {
                let values = s.v.into_iter().map(c).collect();
                PotentialTerm::Sampled(Grid::new(s.x, values).map_err(|e| Error::Parse {
                    path: format!("terms[{i}].sampled"),
                    message: e.to_string(),
                })?)
            }
        });
    }
    PotentialSpec::new(raw.ell, raw.tail.map(|t| TailBound { mu: t.mu, c: t.c }), terms)
}

pub fn to_json(spec: &PotentialSpec) -> String {
    let raw = RawSpec {
        ell: spec.ell,
        tail: spec.tail.map(|t| RawTail { mu: t.mu, c: t.c }),
        terms: spec
            .terms
            .iter()
            .map(|t| match t {
                PotentialTerm::Delta { strength, center } => {
                    RawTerm::Delta(RawDelta { strength: arr(*strength), center: *center })
                }
                PotentialTerm::Piecewise(segs) => RawTerm::Piecewise(
                    segs.iter().map(|s| RawSegment { xlo: s.x_lo, xhi: s.x_hi, value: arr(s.value) }).collect(),
                ),
                PotentialTerm::Sampled(g) => RawTerm::Sampled(RawSampled {
                    x: g.nodes().to_vec(),
                    v: g.values().iter().map(|&z| arr(z)).collect(),
                }),
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("potential serialisation cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_delta() {
        let s = parse_potential(br#"{"ell":1,"terms":[{"delta":{"strength":[1,0],"center":0}}]}"#).unwrap();
        assert_eq!(s.ell, 1.0);
        assert_eq!(s.terms, vec![PotentialTerm::Delta { strength: C64::new(1.0, 0.0), center: 0.0 }]);
    }

    #[test]
    fn parses_barrier() {
        let s = parse_potential(br#"{"ell":1,"terms":[{"piecewise":[{"xlo":0,"xhi":1,"value":[2,0]}]}]}"#).unwrap();
        match &s.terms[0] {
            PotentialTerm::Piecewise(segs) => assert_eq!(segs.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_reversed_segment() {
        let e = parse_potential(br#"{"ell":1,"terms":[{"piecewise":[{"xlo":1,"xhi":1,"value":[2,0]}]}]}"#).unwrap_err();
        match e {
            Error::Parse { path, .. } => assert_eq!(path, "terms[0].piecewise[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_overlap_and_bad_ell() {
        let overlap = br#"{"ell":1,"terms":[{"piecewise":[{"xlo":0,"xhi":2,"value":[1,0]},{"xlo":1,"xhi":3,"value":[1,0]}]}]}"#;
        assert!(matches!(parse_potential(overlap), Err(Error::Parse { .. })));
        let ell = br#"{"ell":0,"terms":[{"delta":{"strength":[1,0],"center":0}}]}"#;
        assert!(matches!(parse_potential(ell), Err(Error::Parse { path, .. }) if path == "ell"));
    }

    #[test]
    fn rejects_unknown_fields_with_path() {
        let e = parse_potential(br#"{"ell":1,"terms":[{"delta":{"strength":[1,0],"center":0,"width":2}}]}"#).unwrap_err();
        match e {
            Error::Parse { path, .. } => assert!(path.starts_with("terms[0]"), "{path}"),
            other => panic!("{other:?}"),
        }
        assert!(parse_potential(b"{not json").is_err());
    }

    #[test]
    fn barrier_values() {
        let z = C64::new(2.0, -1.0);
        let s = PotentialSpec::barrier(z, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(evaluate(&s, 1.0), z);
        assert_eq!(evaluate(&s, -0.5), ZERO);
    }

    #[test]
    fn delta_has_no_smooth_part() {
        let s = PotentialSpec::delta(C64::new(3.0, 0.0), 1.0, 1.0).unwrap();
        for x in [-1.0, 0.0, 1.0, 2.0] {
            assert_eq!(evaluate(&s, x), ZERO);
        }
    }

    #[test]
    fn sampled_interpolates_linearly() {
        let g = Grid::new(vec![0.0, 1.0, 3.0], vec![ZERO, C64::new(2.0, 2.0), ZERO]).unwrap();
        let s = PotentialSpec::new(1.0, None, vec![PotentialTerm::Sampled(g)]).unwrap();
        assert_eq!(evaluate(&s, 0.5), C64::new(1.0, 1.0));
        assert_eq!(evaluate(&s, 2.0), C64::new(1.0, 1.0));
        assert_eq!(evaluate(&s, 3.5), ZERO);
    }

    #[test]
    fn finite_windows() {
        let s = PotentialSpec::barrier(C64::new(1.0, 0.0), 0.0, 1.0, 1.0).unwrap();
        assert_eq!(truncate(&s, 1e-12, 1).unwrap(), SupportWindow { x_minus: 0.0, x_plus: 1.0 });
        let mut s2 = s.clone();
        s2.terms.push(PotentialTerm::Delta { strength: C64::new(1.0, 0.0), center: 3.0 });
        assert_eq!(truncate(&s2, 1e-12, 1).unwrap(), SupportWindow { x_minus: 0.0, x_plus: 3.0 });
    }

    fn open_sampled(tail: Option<TailBound>) -> PotentialSpec {
        let xs: Vec<f64> = (0..=400).map(|i| -20.0 + 0.1 * i as f64).collect();
        let g = Grid::from_fn(xs, |x| C64::new((-2.0 * x.abs()).exp(), 0.0)).unwrap();
        PotentialSpec::new(1.0, tail, vec![PotentialTerm::Sampled(g)]).unwrap()
    }

    #[test]
    fn tail_window_by_bisection() {
        let s = open_sampled(Some(TailBound { mu: 2.0, c: 1.0 }));
        let w = truncate(&s, 1e-12, 1).unwrap();
        // independent root: Newton on log f(x) = -2x + 3 ln(1+x) + 12 ln 10
        let mut x: f64 = 15.0;
        for _ in 0..50 {
            let g = -2.0 * x + 3.0 * (1.0 + x).ln() + 12.0 * 10f64.ln();
            let dg = -2.0 + 3.0 / (1.0 + x);
            x -= g / dg;
        }
        assert!((w.x_plus - x).abs() < 1e-9, "{} vs {x}", w.x_plus);
        assert!((w.x_minus + x).abs() < 1e-9);
    }

    #[test]
    fn missing_tail_is_config_error() {
        assert!(matches!(truncate(&open_sampled(None), 1e-12, 1), Err(Error::Config(_))));
    }

    fn arb_spec() -> impl Strategy<Value = PotentialSpec> {
        let cplx = (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| C64::new(a, b));
        let delta = (cplx.clone(), -5.0..5.0f64).prop_map(|(strength, center)| PotentialTerm::Delta { strength, center });
        let seg = (cplx.clone(), -5.0..5.0f64, 0.01..2.0f64).prop_map(|(value, x_lo, w)| {
            PotentialTerm::Piecewise(vec![Segment { x_lo, x_hi: x_lo + w, value }])
        });
        let sampled = (proptest::collection::vec(cplx, 2..10), -5.0..5.0f64).prop_map(|(vals, x0)| {
            let xs = (0..vals.len()).map(|i| x0 + 0.37 * i as f64).collect();
            PotentialTerm::Sampled(Grid::new(xs, vals).unwrap())
        });
        let term = prop_oneof![delta, seg, sampled];
        (0.1..10.0f64, proptest::collection::vec(term, 1..5))
            .prop_map(|(ell, terms)| PotentialSpec::new(ell, Some(TailBound { mu: 1.5, c: 2.0 }), terms).unwrap())
    }

    proptest! {
        #[test]
        fn evaluate_is_linear_in_terms(a in arb_spec(), b in arb_spec(), x in -8.0..8.0f64) {
            let mut u = a.clone();
            u.terms.extend(b.terms.iter().cloned());
            let (l, r) = (evaluate(&u, x), evaluate(&a, x) + evaluate(&b, x));
            prop_assert!((l - r).norm() <= 1e-12 * (1.0 + r.norm()));
        }

        #[test]
        fn window_grows_as_eps_shrinks(e1 in 1e-14..1e-2f64, f in 1e-3..1.0f64, n in 0u32..4) {
            let s = open_sampled(Some(TailBound { mu: 0.5, c: 3.0 }));
            let w1 = truncate(&s, e1, n).unwrap();
            let w2 = truncate(&s, e1 * f, n).unwrap();
            prop_assert!(w2.x_plus >= w1.x_plus && w2.x_minus <= w1.x_minus);
        }

        #[test]
        fn json_round_trip(s in arb_spec()) {
            let back = parse_potential(to_json(&s).as_bytes()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
