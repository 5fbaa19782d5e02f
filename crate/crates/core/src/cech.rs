//! Čech complexes of `gr E` on the two-chart cover of `CP^{1|m}`.
//!
//! Cochains are stored in the `U0` trivialization. A degree-0 basis vector is
//! `s_i · z^k ζ_I` on `U0` (`k ≥ 0`) or on `U1` (`k ≤ a_i - |I|`); a degree-1
//! basis vector is `s_i · z^k ζ_I` on `U01` (any `k`). The split differential is
//! `d(c0, c1) = c1 - c0`.
//!
//! Cochain spaces are truncated to a window of Laurent exponents per exterior
//! degree. The truncated complex is a filtered subcomplex whose quotient is
//! acyclic as soon as every window contains `[min(0, t+1), max(0, t)]` for all
//! retract twists `t` and no differential leaves it; the auto windows satisfy
//! both conditions.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{CoeffMatrix, ExteriorMonomial, GradedCoefficient, Parity};
use crate::geometry::{Chart, ChartModel, SuperSpace, Window};
use crate::linalg::{kernel, Matrix, Rational};
use crate::sheaf::{SheafDescriptor, Summand};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CechError {
    #[error("explicit Čech complexes need n = 1, got n = {0}")]
    NotP1(usize),
    #[error("window {window} too small: a term z^{exponent} in exterior degree {degree} leaves it")]
    WindowTooSmall { window: Window, degree: usize, exponent: i64 },
    #[error("cocycle size {got} does not match descriptor rank {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("cocycle uses ζ{index} but the superspace has m = {m}")]
    OddIndexOutOfRange { index: usize, m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowSpec {
    Auto,
    Fixed(Window),
}

impl std::str::FromStr for WindowSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(WindowSpec::Auto);
        }
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi or auto, got {s:?}"))?;
        let lo: i64 = lo.trim().parse().map_err(|_| format!("bad window bound {lo:?}"))?;
        let hi: i64 = hi.trim().parse().map_err(|_| format!("bad window bound {hi:?}"))?;
        Window::new(lo, hi).map(WindowSpec::Fixed).ok_or_else(|| format!("empty window {lo}:{hi}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CochainBasisVector {
    pub cech_degree: u8,
    pub chart: Chart,
    pub summand: usize,
    pub laurent_exp: i64,
    pub zeta: ExteriorMonomial,
    /// Parity of the section `s_i z^k ζ_I` itself.
    pub sheaf_parity: Parity,
}

impl CochainBasisVector {
    pub fn filtration_index(&self) -> usize {
        self.zeta.degree()
    }

    /// Total parity of the cochain: even cochains are `C^{2q}(E_0) ⊕ C^{2q+1}(E_1)`.
    pub fn cochain_parity(&self) -> Parity {
        self.sheaf_parity + Parity::of_degree(self.cech_degree as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Split,
    Twisted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CechComplex {
    space: SuperSpace,
    summands: Vec<Summand>,
    windows: Vec<Window>,
    c0: Vec<CochainBasisVector>,
    c1: Vec<CochainBasisVector>,
    differential: Matrix,
    origin: Origin,
}

/// `[min(t_min, 0) - m - 1, max(t_max, 0) + m + 1]` over all retract twists.
pub fn auto_window(desc: &SheafDescriptor) -> Window {
    let m = desc.space().m as i64;
    let mut lo = 0;
    let mut hi = 0;
    for piece in desc.retract_decomposition() {
        if let (Some(a), Some(b)) = (piece.twists.min_twist(), piece.twists.max_twist()) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    Window { lo: lo - m - 1, hi: hi + m + 1 }
}

pub(crate) fn resolve_windows(desc: &SheafDescriptor, spec: WindowSpec, span: Option<(i64, i64)>) -> Vec<Window> {
    let m = desc.space().m;
    match spec {
        WindowSpec::Fixed(w) => vec![w; m + 1],
        WindowSpec::Auto => {
            let base = auto_window(desc);
            let (down, up) = span.map_or((0, 0), |(lo, hi)| (lo.min(0), hi.max(0)));
            (0..=m as i64).map(|p| Window { lo: base.lo + p * down, hi: base.hi + p * up }).collect()
        }
    }
}

fn check_base(desc: &SheafDescriptor) -> Result<(), CechError> {
    if desc.space().n != 1 {
        return Err(CechError::NotP1(desc.space().n));
    }
    Ok(())
}

pub fn build_split_complex(desc: &SheafDescriptor, spec: WindowSpec) -> Result<CechComplex, CechError> {
    check_base(desc)?;
    let windows = resolve_windows(desc, spec, None);
    CechComplex::assemble(desc, windows, None)
}

impl CechComplex {
    /// Builds the complex with differential `d0 + N` on the `U1` component,
    /// where `N` (if given) strictly raises exterior degree.
    pub(crate) fn assemble(
        desc: &SheafDescriptor,
        windows: Vec<Window>,
        perturbation: Option<&CoeffMatrix>,
    ) -> Result<CechComplex, CechError> {
        let space = desc.space();
        let summands = desc.summands();
        let mut c0 = Vec::new();
        let mut c1 = Vec::new();
        for (p, window) in windows.iter().enumerate() {
            for zeta in ExteriorMonomial::all_of_degree(space.m, p) {
                for (i, s) in summands.iter().enumerate() {
                    let sheaf_parity = s.parity + zeta.parity();
                    let twist = s.twist + SuperSpace::ZETA_TWIST * p as i64;
                    let mk = |cech_degree, chart, k| CochainBasisVector {
                        cech_degree,
                        chart,
                        summand: i,
                        laurent_exp: k,
                        zeta,
                        sheaf_parity,
                    };
                    for k in ChartModel::chart_sections(Chart::U0, twist, *window) {
                        c0.push(mk(0, Chart::U0, k));
                    }
                    for k in ChartModel::chart_sections(Chart::U1, twist, *window) {
                        c0.push(mk(0, Chart::U1, k));
                    }
                    for k in ChartModel::chart_sections(Chart::U01, twist, *window) {
                        c1.push(mk(1, Chart::U01, k));
                    }
                }
            }
        }
        let index: HashMap<(usize, ExteriorMonomial, i64), usize> =
            c1.iter().enumerate().map(|(r, v)| ((v.summand, v.zeta, v.laurent_exp), r)).collect();

        let mut differential = Matrix::zeros(c1.len(), c0.len());
        for (col, v) in c0.iter().enumerate() {
            let row = index[&(v.summand, v.zeta, v.laurent_exp)];
            match v.chart {
                Chart::U0 => differential.set(row, col, -Rational::one()),
                _ => differential.set(row, col, Rational::one()),
            }
            let (Some(n), Chart::U1) = (perturbation, v.chart) else { continue };
            let g = GradedCoefficient::term(Rational::one(), v.laurent_exp, v.zeta);
            for (r, _) in summands.iter().enumerate() {
                let entry = n.get(r, v.summand);
                if entry.is_zero() {
                    continue;
                }
                for (k, zeta, q) in (entry * &g).terms() {
                    let p = zeta.degree();
                    let Some(&row) = index.get(&(r, zeta, k)) else {
                        return Err(CechError::WindowTooSmall { window: windows[p.min(space.m)], degree: p, exponent: k });
                    };
                    differential.add_to(row, col, q);
                }
            }
        }
        Ok(CechComplex {
            space,
            summands,
            windows,
            c0,
            c1,
            differential,
            origin: if perturbation.is_some() { Origin::Twisted } else { Origin::Split },
        })
    }

    pub fn space(&self) -> SuperSpace {
        self.space
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn basis(&self, cech_degree: usize) -> &[CochainBasisVector] {
        match cech_degree {
            0 => &self.c0,
            1 => &self.c1,
            _ => &[],
        }
    }

    pub fn differential(&self) -> &Matrix {
        &self.differential
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_empty() && self.c1.is_empty()
    }

    /// Position of `s_i z^k ζ_I` among the degree-1 basis vectors.
    pub fn c1_index(&self, summand: usize, zeta: ExteriorMonomial, k: i64) -> Option<usize> {
        self.c1.iter().position(|v| v.summand == summand && v.zeta == zeta && v.laurent_exp == k)
    }

    /// Checks that `d` never lowers the filtration, preserves sheaf parity and
    /// is odd for the total cochain parity.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (r, c, _) in self.differential.entries() {
            let (src, dst) = (&self.c0[c], &self.c1[r]);
            if dst.filtration_index() < src.filtration_index() {
                return Err(format!("differential lowers filtration at ({r},{c})"));
            }
            if dst.sheaf_parity != src.sheaf_parity || dst.cochain_parity() == src.cochain_parity() {
                return Err(format!("differential is not parity-odd at ({r},{c})"));
            }
        }
        // With two Čech degrees d∘d lands in C^2 = 0.
        Ok(())
    }

    pub fn filtered(&self) -> crate::spectral::FilteredComplex {
        let info = |v: &CochainBasisVector| crate::spectral::CellInfo { filtration: v.filtration_index(), parity: v.sheaf_parity };
        crate::spectral::FilteredComplex::new(
            vec![self.c0.iter().map(info).collect(), self.c1.iter().map(info).collect()],
            vec![self.differential.clone()],
            self.space.m,
        )
        .expect("Čech complex is a valid filtered complex")
    }
}

/// Dimensions split by parity of the sheaf (`H^k(E_0) | H^k(E_1)`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ParityDims {
    pub even: u64,
    pub odd: u64,
}

impl ParityDims {
    pub fn total(&self) -> u64 {
        self.even + self.odd
    }

    pub fn add(&mut self, parity: Parity, n: u64) {
        match parity {
            Parity::Even => self.even += n,
            Parity::Odd => self.odd += n,
        }
    }
}

impl std::fmt::Display for ParityDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}|{}", self.even, self.odd)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyTable {
    /// Indexed by cohomological degree.
    pub h: Vec<ParityDims>,
    /// `(p, q) -> dim H^{p+q}(M, gr E_p)`, present for split complexes.
    pub bigraded: Option<BTreeMap<(usize, i64), ParityDims>>,
}

impl CohomologyTable {
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        out.insert("h".into(), serde_json::to_value(&self.h).expect("dims serialize"));
        if let Some(b) = &self.bigraded {
            let map: serde_json::Map<String, serde_json::Value> =
                b.iter().map(|((p, q), d)| (format!("{p},{q}"), d.total().into())).collect();
            out.insert("bigraded".into(), map.into());
        }
        out.into()
    }
}

/// Kernel and cokernel dimensions of the block of `d` between the given index sets.
fn block_dims(d: &Matrix, rows: &[usize], cols: &[usize]) -> (u64, u64) {
    let block = d.select(rows, cols);
    let ker = kernel(&block).dim();
    let rank = cols.len() - ker;
    (ker as u64, (rows.len() - rank) as u64)
}

pub fn cohomology(cx: &CechComplex) -> CohomologyTable {
    let mut h = vec![ParityDims::default(); 2];
    let d = &cx.differential;
    for parity in [Parity::Even, Parity::Odd] {
        let cols: Vec<usize> = (0..cx.c0.len()).filter(|&i| cx.c0[i].sheaf_parity == parity).collect();
        let rows: Vec<usize> = (0..cx.c1.len()).filter(|&i| cx.c1[i].sheaf_parity == parity).collect();
        let (h0, h1) = block_dims(d, &rows, &cols);
        h[0].add(parity, h0);
        h[1].add(parity, h1);
    }
    let bigraded = (cx.origin == Origin::Split).then(|| {
        let mut out = BTreeMap::new();
        for p in 0..=cx.space.m {
            let mut h0 = ParityDims::default();
            let mut h1 = ParityDims::default();
            for parity in [Parity::Even, Parity::Odd] {
                let sel = |v: &CochainBasisVector| v.sheaf_parity == parity && v.filtration_index() == p;
                let cols: Vec<usize> = (0..cx.c0.len()).filter(|&i| sel(&cx.c0[i])).collect();
                let rows: Vec<usize> = (0..cx.c1.len()).filter(|&i| sel(&cx.c1[i])).collect();
                let (a, b) = block_dims(d, &rows, &cols);
                h0.add(parity, a);
                h1.add(parity, b);
            }
            out.insert((p, -(p as i64)), h0);
            out.insert((p, 1 - p as i64), h1);
        }
        out
    });
    CohomologyTable { h, bigraded }
}

/// True iff the cohomology of the split complex does not change when every
/// window is widened by `padding` on both sides.
pub fn window_stability_check(desc: &SheafDescriptor, spec: WindowSpec, padding: u32) -> Result<bool, CechError> {
    check_base(desc)?;
    let windows = resolve_windows(desc, spec, None);
    let wider: Vec<Window> = windows.iter().map(|w| w.widen(padding as i64)).collect();
    let a = cohomology(&CechComplex::assemble(desc, windows, None)?);
    let b = cohomology(&CechComplex::assemble(desc, wider, None)?);
    Ok(a.h == b.h)
}

/// Closed-form prediction: `Σ_p Σ_{(t, parity) ∈ gr E_p} dim H^q(CP^1, O(t))`.
pub fn bott_prediction(desc: &SheafDescriptor) -> Vec<ParityDims> {
    let mut h = vec![ParityDims::default(); 2];
    for piece in desc.retract_decomposition() {
        for (q, slot) in h.iter_mut().enumerate() {
            let (e, o) = piece.twists.cohomology(desc.space().n, q);
            slot.even += e;
            slot.odd += o;
        }
    }
    h
}
