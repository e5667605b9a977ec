//! Block mesh over a support window.
//!
//! The window is split at every segment edge, sampled node and delta centre,
//! so the smooth part of v is affine (`p + q x`) inside each block. Each block
//! carries its own uniform nodes; a block boundary therefore appears twice,
//! once as the left limit and once as the right limit, which is how jumps at
//! delta centres are stored.

use crate::error::{Error, Result};
use crate::numerics::{cumulative_uniform, Linear, C64, ZERO};
use crate::potential::{PotentialSpec, PotentialTerm, SupportWindow};

#[derive(Clone, Debug)]
pub struct Block {
    pub lo: f64,
    pub hi: f64,
    pub p: C64,
    pub q: C64,
    pub nodes: Vec<f64>,
}

impl Block {
    pub fn v(&self, x: f64) -> C64 {
        self.p + self.q * x
    }

    pub fn is_zero(&self) -> bool {
        self.p == ZERO && self.q == ZERO
    }

    pub fn h(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }
}

/// Values of some quantity at every node of every block.
pub type MeshField<T> = Vec<Vec<T>>;

#[derive(Clone, Debug)]
pub struct Mesh {
    pub blocks: Vec<Block>,
    /// `jumps[b]` is the total delta strength sitting at `blocks[b].lo`.
    pub jumps: Vec<C64>,
}

#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    /// Target number of intervals across the padded window.
    pub intervals: usize,
    /// Optional cap on node spacing (used for oscillatory integrands).
    pub max_h: Option<f64>,
}

const MIN_BLOCK_INTERVALS: usize = 8;

impl Mesh {
    pub fn build(spec: &PotentialSpec, window: &SupportWindow, opts: MeshOptions) -> Result<Self> {
        if opts.intervals == 0 {
            return Err(Error::InvalidInput("mesh needs a positive interval count".into()));
        }
        for (_, c) in spec.deltas() {
            if !window.contains(c) {
                return Err(Error::InvalidInput(format!("delta at {c} lies outside the window")));
            }
        }
        let (wl, wr) = (window.x_minus, window.x_plus);
        let pad = window.width().max(spec.ell) / 64.0;
        let (xl, xr) = (wl - pad, wr + pad);

        let mut cuts = vec![xl, wl, wr, xr];
        for term in &spec.terms {
            match term {
                PotentialTerm::Delta { center, .. } => cuts.push(*center),
                PotentialTerm::Piecewise(segs) => {
                    for s in segs {
                        cuts.extend([s.x_lo, s.x_hi].into_iter().filter(|x| *x > wl && *x < wr));
                    }
                }
                PotentialTerm::Sampled(g) => {
                    cuts.extend(g.nodes().iter().copied().filter(|x| *x > wl && *x < wr));
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let merge = 1e-12 * (xr - xl);
        cuts.dedup_by(|b, a| *b - *a <= merge);

        let h_target = (xr - xl) / opts.intervals as f64;
        let mut blocks = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (p, q) = affine_part(spec, lo, hi, window);
            let vmax = (p + q * lo).norm().max((p + q * hi).norm());
            let mut h = h_target;
            if vmax > 0.0 {
                h = h.min(0.05 / vmax.sqrt());
            }
            if let Some(m) = opts.max_h {
                h = h.min(m);
            }
            let n = (((hi - lo) / h).ceil() as usize).max(MIN_BLOCK_INTERVALS);
            let step = (hi - lo) / n as f64;
            let nodes = (0..=n).map(|i| if i == n { hi } else { lo + step * i as f64 }).collect();
            blocks.push(Block { lo, hi, p, q, nodes });
        }
        let mut jumps = vec![ZERO; blocks.len()];
        for (z, c) in spec.deltas() {
            // the padding guarantees c is an interior boundary
            let b = blocks
                .iter()
                .position(|blk| (blk.lo - c).abs() <= merge)
                .ok_or_else(|| Error::InvalidInput(format!("delta at {c} not on a block boundary")))?;
            jumps[b] += z;
        }
        Ok(Self { blocks, jumps })
    }

    pub fn x_minus(&self) -> f64 {
        self.blocks[0].lo
    }

    pub fn x_plus(&self) -> f64 {
        self.blocks.last().unwrap().hi
    }

    pub fn node_count(&self) -> usize {
        self.blocks.iter().map(|b| b.nodes.len()).sum()
    }

    /// Index of the block containing `x` (right-limit convention at interior boundaries).
    pub fn locate(&self, x: f64) -> usize {
        self.blocks.partition_point(|b| b.hi <= x).min(self.blocks.len() - 1)
    }

    pub fn map<T>(&self, mut f: impl FnMut(usize, usize, f64) -> T) -> MeshField<T> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| blk.nodes.iter().enumerate().map(|(i, &x)| f(b, i, x)).collect())
            .collect()
    }

    /// Running integral of `integrand` from the left end, adding `mass(b)` when
    /// crossing into block `b` at a delta centre.
    pub fn cumulative<T: Linear>(&self, integrand: &MeshField<T>, mut mass: impl FnMut(usize) -> T) -> MeshField<T> {
        let mut out: MeshField<T> = Vec::with_capacity(self.blocks.len());
        let mut acc = T::zero();
        for (b, blk) in self.blocks.iter().enumerate() {
            if b > 0 && self.jumps[b] != ZERO {
                acc = acc + mass(b);
            }
            let col = cumulative_uniform(blk.h(), &integrand[b], acc);
            acc = *col.last().unwrap();
            out.push(col);
        }
        out
    }
}

impl Mesh {
    /// [`Mesh::build`] with extra breakpoints.
    pub fn build_with_cuts(spec: &PotentialSpec, window: &SupportWindow, opts: MeshOptions, cuts: &[f64]) -> Result<Self> {
        if cuts.is_empty() {
            return Mesh::build(spec, window, opts);
        }
        // A zero-strength delta adds a breakpoint without changing v.
        let mut s = spec.clone();
        for &c in cuts {
            s.terms.push(PotentialTerm::Delta { strength: ZERO, center: c });
        }
        Mesh::build(&s, window, opts)
    }
}

/// `v = p + q x` on `(lo, hi)`, clipped to the window.
fn affine_part(spec: &PotentialSpec, lo: f64, hi: f64, window: &SupportWindow) -> (C64, C64) {
    let mid = 0.5 * (lo + hi);
    if mid < window.x_minus || mid > window.x_plus {
        return (ZERO, ZERO);
    }
    let mut p = ZERO;
    let mut q = ZERO;
    for term in &spec.terms {
        match term {
            PotentialTerm::Delta { .. } => {}
            PotentialTerm::Piecewise(segs) => {
                for s in segs {
                    if s.x_lo <= mid && mid < s.x_hi {
                        p += s.value;
                    }
                }
            }
            PotentialTerm::Sampled(g) => {
                let xs = g.nodes();
                if mid > xs[0] && mid < xs[xs.len() - 1] {
                    let i = xs.partition_point(|&n| n <= mid) - 1;
                    let vs = g.values();
                    let slope = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
                    p += vs[i] - slope * xs[i];
                    q += slope;
                }
            }
        }
    }
    (p, q)
}
