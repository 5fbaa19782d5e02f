//! The projective superspace `CP^{n|m}`: closed-form line bundle cohomology on
//! `CP^n`, the structure sheaf pieces `gr O_p`, and the explicit two-chart model
//! of `CP^1`.
//!
//! Chart conventions (used everywhere in the crate): `U0 = {w0 ≠ 0}` with
//! coordinate `z`, `U1 = {w1 ≠ 0}` with coordinate `w = 1/z`. A section of
//! `O(d)` written in the `U0` frame as `σ0(z)` has `U1` coefficient `z^d σ0`,
//! and the odd coordinates transform as `ζ^(1) = z^{-1} ζ^(0)`. All cochains
//! are stored in the `U0` (z) trivialization.

use std::fmt;

use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::coeff::Parity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperSpace {
    pub n: usize,
    pub m: usize,
}

impl SuperSpace {
    pub fn new(n: usize, m: usize) -> Option<Self> {
        (n >= 1).then_some(SuperSpace { n, m })
    }

    /// Twist carried by every odd coordinate `ζ_a`.
    pub const ZETA_TWIST: i64 = -1;
}

impl fmt::Display for SuperSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CP^{{{}|{}}}", self.n, self.m)
    }
}

/// `dim H^q(CP^n, O(d))`.
pub fn bott_dim(n: usize, d: i64, q: usize) -> u64 {
    let n_i = n as i64;
    if q == 0 && d >= 0 {
        binomial((n_i + d) as u64, n as u64)
    } else if q == n && d < -n_i {
        binomial((-d - 1) as u64, n as u64)
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwistEntry {
    pub twist: i64,
    pub parity: Parity,
    pub multiplicity: usize,
}

/// A direct sum `⊕ O(d)` / `⊕ ΠO(d)` with multiplicities, canonically sorted by
/// `(twist, parity)` with equal keys merged.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TwistList {
    entries: Vec<TwistEntry>,
}

impl TwistList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (i64, Parity, usize)>>(items: I) -> Self {
        let mut out = Self::new();
        for (t, p, k) in items {
            out.push(t, p, k);
        }
        out
    }

    pub fn push(&mut self, twist: i64, parity: Parity, multiplicity: usize) {
        if multiplicity == 0 {
            return;
        }
        match self.entries.binary_search_by(|e| (e.twist, e.parity).cmp(&(twist, parity))) {
            Ok(i) => self.entries[i].multiplicity += multiplicity,
            Err(i) => self.entries.insert(i, TwistEntry { twist, parity, multiplicity }),
        }
    }

    pub fn extend(&mut self, other: &TwistList) {
        for e in &other.entries {
            self.push(e.twist, e.parity, e.multiplicity);
        }
    }

    pub fn entries(&self) -> &[TwistEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Twists with multiplicity, ignoring parity.
    pub fn twists(&self) -> Vec<i64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.twist, e.multiplicity)).collect()
    }

    pub fn min_twist(&self) -> Option<i64> {
        self.entries.first().map(|e| e.twist)
    }

    pub fn max_twist(&self) -> Option<i64> {
        self.entries.last().map(|e| e.twist)
    }

    /// `Σ dim H^q(CP^n, ·)` split by parity as `(even, odd)`.
    pub fn cohomology(&self, n: usize, q: usize) -> (u64, u64) {
        let mut out = (0, 0);
        for e in &self.entries {
            let d = bott_dim(n, e.twist, q) * e.multiplicity as u64;
            match e.parity {
                Parity::Even => out.0 += d,
                Parity::Odd => out.1 += d,
            }
        }
        out
    }
}

impl fmt::Display for TwistList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                let base = match e.parity {
                    Parity::Even => format!("O({})", e.twist),
                    Parity::Odd => format!("ΠO({})", e.twist),
                };
                if e.multiplicity == 1 {
                    base
                } else {
                    format!("{base}^{}", e.multiplicity)
                }
            })
            .collect();
        f.write_str(&parts.join(" ⊕ "))
    }
}

/// `gr O_p ≅ O(-p)^{C(m,p)}`, of parity `p mod 2`.
pub fn structure_sheaf_component(space: SuperSpace, p: usize) -> TwistList {
    if p > space.m {
        return TwistList::new();
    }
    TwistList::from_entries([(
        SuperSpace::ZETA_TWIST * p as i64,
        Parity::of_degree(p as i64),
        binomial(space.m, p),
    )])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    U0,
    U1,
    U01,
}

/// Inclusive range of Laurent exponents kept by a truncated cochain space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Option<Self> {
        (lo <= hi).then_some(Window { lo, hi })
    }

    pub fn widen(&self, pad: i64) -> Window {
        Window { lo: self.lo - pad, hi: self.hi + pad }
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Two-chart model of `CP^{1|m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChartModel {
    pub space: SuperSpace,
}

impl ChartModel {
    pub fn new(m: usize) -> Self {
        ChartModel { space: SuperSpace { n: 1, m } }
    }

    /// Exponent `e` of the transition `s^(1) = z^e s^(0)` for `O(twist)`.
    pub fn transition_exponent(twist: i64) -> i64 {
        twist
    }

    /// Exponent of `ζ^(1) = z^e ζ^(0)`.
    pub fn zeta_transition_exponent() -> i64 {
        SuperSpace::ZETA_TWIST
    }

    /// Exponents `k` such that `z^k` (in the z-trivialization) is a section of
    /// `O(twist)` over the chart, intersected with the window.
    pub fn chart_sections(chart: Chart, twist: i64, window: Window) -> Vec<i64> {
        let (lo, hi) = match chart {
            Chart::U0 => (window.lo.max(0), window.hi),
            Chart::U1 => (window.lo, window.hi.min(twist)),
            Chart::U01 => (window.lo, window.hi),
        };
        (lo..=hi).collect()
    }

    /// True if `z^k` in the z-trivialization is regular on `U1` for `O(twist)`.
    pub fn regular_on_u1(k: i64, twist: i64) -> bool {
        k <= twist
    }

    pub fn regular_on_u0(k: i64) -> bool {
        k >= 0
    }
}
