//! Sheaf descriptors and their retract data.
//!
//! A descriptor records `E_red = ⊕ O(a_i) ⊕ ⊕ ΠO(b_j)`; the retract is
//! `gr E = ∧ gr O_1 ⊗ E_red` with pieces `gr E_p = O(-p)^{C(m,p)} ⊗ E_red`.

use std::fmt;

use num_integer::binomial;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::Parity;
use crate::geometry::{bott_dim, SuperSpace, TwistList};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error("descriptor has rank 0|0")]
    EmptyRank,
    #[error("n must be at least 1")]
    InvalidBase,
    #[error("cannot extend from m={from} to m={to}")]
    ExtendBelow { from: usize, to: usize },
    #[error("cannot restrict from m={from} to m={to}")]
    RestrictAbove { from: usize, to: usize },
    #[error("invalid descriptor JSON: {0}")]
    Json(String),
}

/// One summand of `E_red`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Summand {
    pub twist: i64,
    pub parity: Parity,
}

/// A locally free sheaf on `CP^{n|m}` given by the twists of its reduction.
///
/// Twist lists are kept sorted in descending order; summand indices (used by
/// cocycle files) enumerate even twists first, then odd twists, in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SheafDescriptor {
    space: SuperSpace,
    even_twists: Vec<i64>,
    odd_twists: Vec<i64>,
}

impl SheafDescriptor {
    pub fn new(space: SuperSpace, mut even_twists: Vec<i64>, mut odd_twists: Vec<i64>) -> Self {
        even_twists.sort_unstable_by(|a, b| b.cmp(a));
        odd_twists.sort_unstable_by(|a, b| b.cmp(a));
        SheafDescriptor { space, even_twists, odd_twists }
    }

    /// Convenience constructor for `CP^{n|m}`; panics if `n == 0`.
    pub fn on(n: usize, m: usize, even: &[i64], odd: &[i64]) -> Self {
        let space = SuperSpace::new(n, m).expect("n >= 1");
        Self::new(space, even.to_vec(), odd.to_vec())
    }

    pub fn space(&self) -> SuperSpace {
        self.space
    }

    pub fn even_twists(&self) -> &[i64] {
        &self.even_twists
    }

    pub fn odd_twists(&self) -> &[i64] {
        &self.odd_twists
    }

    /// `(p, q)` for a sheaf of rank `p|q`.
    pub fn rank(&self) -> (usize, usize) {
        (self.even_twists.len(), self.odd_twists.len())
    }

    pub fn total_rank(&self) -> usize {
        self.even_twists.len() + self.odd_twists.len()
    }

    pub fn validate(&self) -> Result<(), SheafError> {
        if self.total_rank() == 0 {
            return Err(SheafError::EmptyRank);
        }
        Ok(())
    }

    pub fn summands(&self) -> Vec<Summand> {
        let even = self.even_twists.iter().map(|&t| Summand { twist: t, parity: Parity::Even });
        let odd = self.odd_twists.iter().map(|&t| Summand { twist: t, parity: Parity::Odd });
        even.chain(odd).collect()
    }

    /// `gr E_p` for `p = 0..=m`.
    pub fn retract_decomposition(&self) -> Vec<GradedPiece> {
        let m = self.space.m;
        (0..=m)
            .map(|p| {
                let copies = binomial(m, p);
                let shift = SuperSpace::ZETA_TWIST * p as i64;
                let deg_parity = Parity::of_degree(p as i64);
                let twists =
                    TwistList::from_entries(self.summands().into_iter().map(|s| (s.twist + shift, s.parity + deg_parity, copies)));
                GradedPiece { degree: p, twists }
            })
            .collect()
    }

    /// `End_p gr E`: endomorphisms raising the exterior degree by exactly `p`,
    /// decomposed into line bundles.
    pub fn end_block(&self, p: usize) -> EndBlock {
        let m = self.space.m;
        let mut twists = TwistList::new();
        if p <= m {
            let copies = binomial(m, p);
            let shift = SuperSpace::ZETA_TWIST * p as i64;
            if p % 2 == 1 {
                for &a in &self.even_twists {
                    for &b in &self.odd_twists {
                        twists.push(shift + a - b, Parity::Even, copies);
                        twists.push(shift + b - a, Parity::Even, copies);
                    }
                }
            } else {
                for &a in &self.even_twists {
                    for &a2 in &self.even_twists {
                        twists.push(shift + a - a2, Parity::Even, copies);
                    }
                }
                for &b in &self.odd_twists {
                    for &b2 in &self.odd_twists {
                        twists.push(shift + b - b2, Parity::Even, copies);
                    }
                }
            }
        }
        EndBlock { p, twists }
    }

    /// `dim H^1(M, End_p gr E)` for `p = 1..=m`.
    pub fn obstruction_dims(&self) -> Vec<(usize, u64)> {
        (1..=self.space.m).map(|p| (p, self.end_block(p).cohomology(self.space.n, 1))).collect()
    }

    /// The descriptor of `O_k ⊗ E` pulled back along `CP^{1|target} -> CP^{1|k}`:
    /// same reduction, larger odd dimension.
    pub fn extend(&self, target_m: usize) -> Result<SheafDescriptor, SheafError> {
        if target_m < self.space.m {
            return Err(SheafError::ExtendBelow { from: self.space.m, to: target_m });
        }
        Ok(SheafDescriptor { space: SuperSpace { n: self.space.n, m: target_m }, ..self.clone() })
    }

    pub fn restrict(&self, target_m: usize) -> Result<SheafDescriptor, SheafError> {
        if target_m > self.space.m {
            return Err(SheafError::RestrictAbove { from: self.space.m, to: target_m });
        }
        Ok(SheafDescriptor { space: SuperSpace { n: self.space.n, m: target_m }, ..self.clone() })
    }

    pub fn to_file(&self) -> DescriptorFile {
        DescriptorFile {
            n: self.space.n,
            m: self.space.m,
            even_twists: self.even_twists.clone(),
            odd_twists: self.odd_twists.clone(),
        }
    }

    /// Canonical single-line JSON (twist arrays sorted descending).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<SheafDescriptor, SheafError> {
        let file: DescriptorFile = serde_json::from_str(text)
            .map_err(|e| SheafError::Json(format!("line {} column {}: {e}", e.line(), e.column())))?;
        file.into_descriptor()
    }
}

impl fmt::Display for SheafDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} even={:?} odd={:?}", self.space, self.even_twists, self.odd_twists)
    }
}

/// On-disk descriptor format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorFile {
    pub n: usize,
    pub m: usize,
    pub even_twists: Vec<i64>,
    pub odd_twists: Vec<i64>,
}

impl DescriptorFile {
    pub fn into_descriptor(self) -> Result<SheafDescriptor, SheafError> {
        let space = SuperSpace::new(self.n, self.m).ok_or(SheafError::InvalidBase)?;
        let d = SheafDescriptor::new(space, self.even_twists, self.odd_twists);
        d.validate()?;
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedPiece {
    pub degree: usize,
    pub twists: TwistList,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndBlock {
    pub p: usize,
    pub twists: TwistList,
}

impl EndBlock {
    pub fn cohomology(&self, n: usize, q: usize) -> u64 {
        self.twists.entries().iter().map(|e| bott_dim(n, e.twist, q) * e.multiplicity as u64).sum()
    }
}

/// Both ends of `0 → ∧^{p+1}G ⊗ G* → T_p → ∧^p G ⊗ Θ → 0` on `CP^1`
/// (`Θ = O(2)`), for `G = ⊕ O(g_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TangentTerms {
    pub p: i64,
    pub sub: TwistList,
    pub quot: TwistList,
}

impl TangentTerms {
    pub fn rank(&self) -> usize {
        self.sub.rank() + self.quot.rank()
    }
}

pub const TANGENT_TWIST_P1: i64 = 2;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    (0u32..(1u32 << n))
        .filter(|b| b.count_ones() as usize == k)
        .map(|b| (0..n).filter(|i| b & (1 << i) != 0).collect())
        .collect()
}

pub fn tangent_terms(g_twists: &[i64], p: i64) -> TangentTerms {
    assert!(p >= -1, "tangent degree starts at -1");
    let parity = Parity::of_degree(p);
    let rank = g_twists.len();
    let mut sub = TwistList::new();
    for s in subsets(rank, (p + 1) as usize) {
        let wedge: i64 = s.iter().map(|&i| g_twists[i]).sum();
        for &g in g_twists {
            sub.push(wedge - g, parity, 1);
        }
    }
    let mut quot = TwistList::new();
    if p >= 0 {
        for s in subsets(rank, p as usize) {
            let wedge: i64 = s.iter().map(|&i| g_twists[i]).sum();
            quot.push(wedge + TANGENT_TWIST_P1, parity, 1);
        }
    }
    TangentTerms { p, sub, quot }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flagship() -> SheafDescriptor {
        SheafDescriptor::on(1, 1, &[0], &[-1])
    }

    #[test]
    fn retract_of_flagship() {
        let pieces = flagship().retract_decomposition();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].twists, TwistList::from_entries([(0, Parity::Even, 1), (-1, Parity::Odd, 1)]));
        assert_eq!(pieces[1].twists, TwistList::from_entries([(-1, Parity::Odd, 1), (-2, Parity::Even, 1)]));
    }

    #[test]
    fn retract_without_odd_directions() {
        let d = SheafDescriptor::on(1, 0, &[3, 1], &[2]);
        let pieces = d.retract_decomposition();
        assert_eq!(pieces.len(), 1);
        assert_eq!(
            pieces[0].twists,
            TwistList::from_entries([(3, Parity::Even, 1), (1, Parity::Even, 1), (2, Parity::Odd, 1)])
        );
    }

    #[test]
    fn retract_top_piece_on_cp12() {
        let d = SheafDescriptor::on(1, 2, &[1], &[]);
        assert_eq!(d.retract_decomposition()[2].twists, TwistList::from_entries([(-1, Parity::Even, 1)]));
    }

    #[test]
    fn rank_of_retract() {
        for (m, even, odd) in [(0usize, vec![1], vec![]), (2, vec![0, 3], vec![-1]), (3, vec![], vec![2, 2])] {
            let d = SheafDescriptor::on(1, m, &even, &odd);
            let total: usize = d.retract_decomposition().iter().map(|p| p.twists.rank()).sum();
            assert_eq!(total, (1 << m) * d.total_rank());
        }
    }

    #[test]
    fn end_blocks() {
        assert_eq!(flagship().end_block(1).twists, TwistList::from_entries([(0, Parity::Even, 1), (-2, Parity::Even, 1)]));
        assert!(SheafDescriptor::on(1, 1, &[3], &[]).end_block(1).twists.is_empty());
        let d = SheafDescriptor::on(1, 2, &[2, -1], &[0]);
        let e0 = d.end_block(0).twists;
        assert_eq!(e0.twists().iter().filter(|&&t| t == 0).count(), 3);
        assert_eq!(e0.rank(), 5);
        assert!(d.end_block(3).twists.is_empty());
    }

    #[test]
    fn end_block_hom_part_is_negation_symmetric() {
        let d = SheafDescriptor::on(1, 3, &[2, -1, 0], &[1, -3]);
        for p in [1usize, 2, 3] {
            let shift = -(p as i64);
            let mut hom: Vec<i64> = d.end_block(p).twists.twists().iter().map(|t| t - shift).collect();
            let mut neg: Vec<i64> = hom.iter().map(|t| -t).collect();
            hom.sort();
            neg.sort();
            assert_eq!(hom, neg, "p={p}");
        }
    }

    #[test]
    fn obstruction_dims_examples() {
        assert_eq!(flagship().obstruction_dims(), vec![(1, 1)]);
        assert_eq!(SheafDescriptor::on(1, 1, &[4], &[]).obstruction_dims(), vec![(1, 0)]);
        assert_eq!(SheafDescriptor::on(1, 1, &[], &[-2]).obstruction_dims(), vec![(1, 0)]);
        assert_eq!(SheafDescriptor::on(2, 1, &[3], &[-3]).obstruction_dims(), vec![(1, 0)]);
        assert_eq!(SheafDescriptor::on(1, 1, &[0], &[0]).end_block(1).twists, TwistList::from_entries([(-1, Parity::Even, 2)]));
    }

    #[test]
    fn obstructions_vanish_for_n_at_least_two() {
        for n in 2..=3 {
            for m in 1..=3 {
                let d = SheafDescriptor::on(n, m, &[3, -2], &[1, -3]);
                assert!(d.obstruction_dims().iter().all(|&(_, h)| h == 0));
            }
        }
    }

    #[test]
    fn extension() {
        let d = flagship();
        let e = d.extend(3).unwrap();
        assert_eq!(e.even_twists(), d.even_twists());
        assert_eq!(e.space().m, 3);
        assert_eq!(e.restrict(1).unwrap(), d);
        assert_eq!(e.obstruction_dims()[0], (1, 3));
        assert!(d.extend(0).is_err());
    }

    #[test]
    fn tangent_examples() {
        let t = tangent_terms(&[-1], 0);
        assert_eq!(t.sub.twists(), vec![0]);
        assert_eq!(t.quot.twists(), vec![2]);
        let t = tangent_terms(&[-1], -1);
        assert_eq!(t.sub.twists(), vec![1]);
        assert!(t.quot.is_empty());
        let t = tangent_terms(&[3, -2], 2);
        assert!(t.sub.is_empty());
        assert_eq!(t.quot.twists(), vec![3]);
        assert_eq!(tangent_terms(&[1, 2, 3], 1).rank(), 3 * 3 + 3);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let d = SheafDescriptor::from_json(r#"{"n":1,"m":2,"even_twists":[-1,3],"odd_twists":[0,2,-4]}"#).unwrap();
        assert_eq!(d.to_canonical_json(), r#"{"n":1,"m":2,"even_twists":[3,-1],"odd_twists":[2,0,-4]}"#);
        assert_eq!(SheafDescriptor::from_json(&d.to_canonical_json()).unwrap(), d);
        assert_eq!(
            SheafDescriptor::from_json(r#"{"n":1,"m":0,"even_twists":[],"odd_twists":[]}"#).unwrap_err(),
            SheafError::EmptyRank
        );
        assert!(SheafDescriptor::from_json(r#"{"n":0,"m":0,"even_twists":[1],"odd_twists":[]}"#).is_err());
    }
}
