//! Non-split sheaves glued from `gr E` by a unipotent cocycle `a = exp(A)` on
//! `U01`, the order of a cocycle, its symbols, and the twisted Čech complex.
//!
//! Regularity of an endomorphism entry `(r, c)` with monomial `ζ_J` (in the z
//! frame): on `U0` the Laurent exponents must be `≥ 0`, on `U1` they must be
//! `≤ t_r - t_c - |J|`. Exponents strictly between those bounds span the
//! corresponding `H^1` of `End gr E`.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cech::{resolve_windows, CechComplex, CechError, WindowSpec};
use crate::coeff::{CoeffMatrix, ExteriorMonomial, GradedCoefficient, Parity};
use crate::linalg::{ratio, Rational};
use crate::sheaf::SheafDescriptor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GluingError {
    #[error("degree-0 part of the matrix is not the identity")]
    NotUnipotent,
    #[error("log has a component of exterior degree {min_degree} < {p}")]
    NotInFiltration { min_degree: usize, p: usize },
    #[error("entry ({row},{col}) has a term of exterior degree 0")]
    DegreeZero { row: usize, col: usize },
    #[error("entry ({row},{col}) has the wrong parity for its summand pair")]
    Parity { row: usize, col: usize },
    #[error("matrix size {got} does not match descriptor rank {expected}")]
    Size { expected: usize, got: usize },
    #[error("entry ({row},{col}) uses ζ{index} but m = {m}")]
    OddIndex { row: usize, col: usize, index: usize, m: usize },
    #[error("invalid cocycle file: {0}")]
    Json(String),
}

/// A 1-cochain on `U01` with values in `End_(1) gr E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndomorphismCochain {
    m: usize,
    matrix: CoeffMatrix,
}

impl EndomorphismCochain {
    pub fn zero(desc: &SheafDescriptor) -> Self {
        EndomorphismCochain { m: desc.space().m, matrix: CoeffMatrix::zero(desc.total_rank()) }
    }

    /// Validates degree `≥ 1`, entry parity `π_r + π_c` and generator range.
    pub fn new(desc: &SheafDescriptor, matrix: CoeffMatrix) -> Result<Self, GluingError> {
        let m = desc.space().m;
        check_shape(desc, &matrix, 1)?;
        Ok(EndomorphismCochain { m, matrix })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &CoeffMatrix {
        &self.matrix
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.matrix.min_degree()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn degree_component(&self, k: usize) -> EndomorphismCochain {
        EndomorphismCochain { m: self.m, matrix: self.matrix.degree_component(k) }
    }
}

fn check_shape(desc: &SheafDescriptor, matrix: &CoeffMatrix, min_degree: usize) -> Result<(), GluingError> {
    let m = desc.space().m;
    let summands = desc.summands();
    if matrix.size() != summands.len() {
        return Err(GluingError::Size { expected: summands.len(), got: matrix.size() });
    }
    for (row, col, x) in matrix.entries() {
        let want = summands[row].parity + summands[col].parity;
        for (_, zeta, _) in x.terms() {
            if zeta.max_index() > m {
                return Err(GluingError::OddIndex { row, col, index: zeta.max_index(), m });
            }
            if zeta.degree() < min_degree {
                return Err(GluingError::DegreeZero { row, col });
            }
            if zeta.parity() != want {
                return Err(GluingError::Parity { row, col });
            }
        }
    }
    Ok(())
}

/// The transition `a = δ0 ∘ δ1⁻¹` on `U01` (base automorphism the identity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingCocycle {
    m: usize,
    a: CoeffMatrix,
}

impl GluingCocycle {
    pub fn identity(desc: &SheafDescriptor) -> Self {
        GluingCocycle { m: desc.space().m, a: CoeffMatrix::identity(desc.total_rank()) }
    }

    /// Accepts `a` if its degree-0 part is the identity.
    pub fn from_matrix(desc: &SheafDescriptor, a: CoeffMatrix) -> Result<Self, GluingError> {
        let m = desc.space().m;
        if a.size() != desc.total_rank() {
            return Err(GluingError::Size { expected: desc.total_rank(), got: a.size() });
        }
        if a.degree_component(0) != CoeffMatrix::identity(a.size()) {
            return Err(GluingError::NotUnipotent);
        }
        let n = a.sub(&CoeffMatrix::identity(a.size()));
        check_shape(desc, &n, 1)?;
        Ok(GluingCocycle { m, a })
    }

    pub fn matrix(&self) -> &CoeffMatrix {
        &self.a
    }

    pub fn size(&self) -> usize {
        self.a.size()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `a - I`, the nilpotent part.
    pub fn nilpotent_part(&self) -> CoeffMatrix {
        self.a.sub(&CoeffMatrix::identity(self.a.size()))
    }

    pub fn is_identity(&self) -> bool {
        self.nilpotent_part().is_zero()
    }

    /// `g a g⁻¹` for a global automorphism `g` with inverse `g_inv`.
    pub fn conjugate(&self, g: &CoeffMatrix, g_inv: &CoeffMatrix) -> GluingCocycle {
        GluingCocycle { m: self.m, a: g.mul(&self.a).mul(g_inv) }
    }

    /// `h0 a h1⁻¹` for chartwise changes of frame.
    pub fn change_frames(&self, h0: &CoeffMatrix, h1_inv: &CoeffMatrix) -> GluingCocycle {
        GluingCocycle { m: self.m, a: h0.mul(&self.a).mul(h1_inv) }
    }
}

/// `exp(N)` for `N` with entries of exterior degree `≥ 1`; the series stops at `N^m`.
pub fn exp_nilpotent(n: &CoeffMatrix, m: usize) -> CoeffMatrix {
    let size = n.size();
    let mut out = CoeffMatrix::identity(size);
    let mut power = CoeffMatrix::identity(size);
    let mut factorial = Rational::one();
    for j in 1..=m {
        power = power.mul(n);
        if power.is_zero() {
            break;
        }
        factorial *= Rational::from_integer(j.into());
        out = out.add(&power.scale(&factorial.recip()));
    }
    out
}

/// `log(a) = Σ (-1)^{j+1} (a - I)^j / j`.
pub fn log_unipotent(a: &CoeffMatrix, m: usize) -> Result<CoeffMatrix, GluingError> {
    let size = a.size();
    if a.degree_component(0) != CoeffMatrix::identity(size) {
        return Err(GluingError::NotUnipotent);
    }
    let n = a.sub(&CoeffMatrix::identity(size));
    let mut out = CoeffMatrix::zero(size);
    let mut power = CoeffMatrix::identity(size);
    for j in 1..=m as i64 {
        power = power.mul(&n);
        if power.is_zero() {
            break;
        }
        let sign = if j % 2 == 1 { 1 } else { -1 };
        out = out.add(&power.scale(&ratio(sign, j)));
    }
    Ok(out)
}

pub fn exp(a: &EndomorphismCochain) -> GluingCocycle {
    GluingCocycle { m: a.m, a: exp_nilpotent(&a.matrix, a.m) }
}

pub fn log(a: &GluingCocycle) -> EndomorphismCochain {
    let matrix = log_unipotent(&a.a, a.m).expect("cocycles are unipotent by construction");
    EndomorphismCochain { m: a.m, matrix }
}

/// Upper bound `t_r - t_c - |J|` for `U1`-regular exponents of entry `(r, c)`.
pub fn u1_bound(desc: &SheafDescriptor, row: usize, col: usize, zeta: ExteriorMonomial) -> i64 {
    let s = desc.summands();
    s[row].twist - s[col].twist - zeta.degree() as i64
}

/// One coordinate of a symbol class: the coefficient of `z^exponent ζ_J` in
/// entry `(row, col)`, with `exponent` in the gap between the chart bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCoordinate {
    pub row: usize,
    pub col: usize,
    pub zetas: Vec<usize>,
    pub z: i64,
    #[serde(serialize_with = "ser_rational")]
    pub coeff: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// The exterior-degree-`k` layer of `log(a)` and its class in `H^1(End_k gr E)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolClass {
    pub k: usize,
    pub cochain: EndomorphismCochain,
    pub cohomology_class: Vec<ClassCoordinate>,
}

impl SymbolClass {
    pub fn is_zero(&self) -> bool {
        self.cohomology_class.is_empty()
    }
}

/// Splits a homogeneous degree-`k` cochain as `A = b1 - b0` with `b0` regular
/// on `U0` and `b1` regular on `U1`, or returns the leftover class.
pub fn split_coboundary(
    desc: &SheafDescriptor,
    cochain: &CoeffMatrix,
) -> (CoeffMatrix, CoeffMatrix, Vec<ClassCoordinate>) {
    let size = cochain.size();
    let mut b0 = CoeffMatrix::zero(size);
    let mut b1 = CoeffMatrix::zero(size);
    let mut class = Vec::new();
    for (row, col, x) in cochain.entries() {
        let mut e0 = GradedCoefficient::zero();
        let mut e1 = GradedCoefficient::zero();
        for (k, zeta, q) in x.terms() {
            let bound = u1_bound(desc, row, col, zeta);
            if k <= bound {
                e1.add_term(k, zeta, q.clone());
            } else if k >= 0 {
                e0.add_term(k, zeta, -q.clone());
            } else {
                class.push(ClassCoordinate { row, col, zetas: zeta.indices(), z: k, coeff: q.clone() });
            }
        }
        b0.set(row, col, e0);
        b1.set(row, col, e1);
    }
    (b0, b1, class)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Order {
    /// Every degree was absorbed: the cocycle is cohomologous to the identity.
    SplitRepresentative,
    Order(usize),
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::SplitRepresentative => f.write_str("split-representative"),
            Order::Order(k) => write!(f, "{k}"),
        }
    }
}

/// Outcome of the degree-wise absorption loop.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub order: Order,
    /// `g0 a g1⁻¹`, where `g0` is regular on `U0` and `g1` on `U1`.
    pub representative: GluingCocycle,
    pub g0: CoeffMatrix,
    pub g1: CoeffMatrix,
    pub g1_inv: CoeffMatrix,
    /// The obstructing symbol when the loop stopped early.
    pub symbol: Option<SymbolClass>,
}

/// Absorbs coboundary symbols degree by degree below `stop_before` (or all
/// the way to `m`).
pub fn absorb(desc: &SheafDescriptor, a: &GluingCocycle, stop_before: Option<usize>) -> Reduction {
    let m = a.m;
    let size = a.size();
    let mut rep = a.clone();
    let mut g0 = CoeffMatrix::identity(size);
    let mut g1 = CoeffMatrix::identity(size);
    let mut g1_inv = CoeffMatrix::identity(size);
    let limit = stop_before.map_or(m, |s| s.saturating_sub(1).min(m));
    for k in 1..=limit {
        let layer = log(&rep).matrix.degree_component(k);
        if layer.is_zero() {
            continue;
        }
        let (b0, b1, class) = split_coboundary(desc, &layer);
        if !class.is_empty() {
            let symbol = SymbolClass { k, cochain: EndomorphismCochain { m, matrix: layer }, cohomology_class: class };
            return Reduction { order: Order::Order(k), representative: rep, g0, g1, g1_inv, symbol: Some(symbol) };
        }
        let h0 = exp_nilpotent(&b0, m);
        let h1 = exp_nilpotent(&b1, m);
        let h1_inv = exp_nilpotent(&b1.scale(&-Rational::one()), m);
        rep = rep.change_frames(&h0, &h1_inv);
        g0 = h0.mul(&g0);
        g1 = h1.mul(&g1);
        g1_inv = g1_inv.mul(&h1_inv);
        debug_assert!(log(&rep).matrix.degree_component(k).is_zero());
    }
    let order = match rep.nilpotent_part().min_degree() {
        None => Order::SplitRepresentative,
        Some(k) => Order::Order(k),
    };
    Reduction { order, representative: rep, g0, g1, g1_inv, symbol: None }
}

/// The order of `a`, stable under degree-wise coboundary absorption.
pub fn order(desc: &SheafDescriptor, a: &GluingCocycle) -> Order {
    absorb(desc, a, None).order
}

fn symbol_of(desc: &SheafDescriptor, a: &GluingCocycle, k: usize) -> SymbolClass {
    let layer = log(a).matrix.degree_component(k);
    let (_, _, class) = split_coboundary(desc, &layer);
    SymbolClass { k, cochain: EndomorphismCochain { m: a.m, matrix: layer }, cohomology_class: class }
}

/// `μ_k(a)`: the degree-`k` layer of `log(a)` after absorbing every
/// absorbable layer below `k`, with its class.
pub fn mu_k(desc: &SheafDescriptor, a: &GluingCocycle, k: usize) -> SymbolClass {
    let reduced = absorb(desc, a, Some(k));
    symbol_of(desc, &reduced.representative, k)
}

/// `λ_p(a)`: the degree-`p` layer of `log(a)` for `a ∈ Aut_(p)`.
pub fn lambda_p(desc: &SheafDescriptor, a: &GluingCocycle, p: usize) -> Result<SymbolClass, GluingError> {
    if let Some(min_degree) = log(a).min_degree() {
        if min_degree < p {
            return Err(GluingError::NotInFiltration { min_degree, p });
        }
    }
    Ok(symbol_of(desc, a, p))
}

/// Čech complex with differential `d(c0, c1) = a·c1 - c0`.
pub fn twisted_complex(desc: &SheafDescriptor, a: &GluingCocycle, window: WindowSpec) -> Result<CechComplex, CechError> {
    if desc.space().n != 1 {
        return Err(CechError::NotP1(desc.space().n));
    }
    if a.size() != desc.total_rank() {
        return Err(CechError::RankMismatch { expected: desc.total_rank(), got: a.size() });
    }
    let n = a.nilpotent_part();
    if n.max_generator() > desc.space().m {
        return Err(CechError::OddIndexOutOfRange { index: n.max_generator(), m: desc.space().m });
    }
    if n.is_zero() {
        return crate::cech::build_split_complex(desc, window);
    }
    let windows = resolve_windows(desc, window, n.laurent_span());
    CechComplex::assemble(desc, windows, Some(&n))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    z: i64,
    zetas: Vec<usize>,
    coeff: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    row: usize,
    col: usize,
    terms: Vec<TermFile>,
}

fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: num_bigint::BigInt = n.trim().parse().ok()?;
            let d: num_bigint::BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Rational::new(n, d))
        }
        None => s.parse::<num_bigint::BigInt>().ok().map(Rational::from_integer),
    }
}

/// Parses a cocycle file, interpreted as `A = log(a)`.
pub fn cochain_from_json(desc: &SheafDescriptor, text: &str) -> Result<EndomorphismCochain, GluingError> {
    let entries: Vec<EntryFile> = serde_json::from_str(text)
        .map_err(|e| GluingError::Json(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let size = desc.total_rank();
    let mut matrix = CoeffMatrix::zero(size);
    for (i, entry) in entries.iter().enumerate() {
        if entry.row >= size || entry.col >= size {
            return Err(GluingError::Json(format!("entry {i}: index ({},{}) out of range for rank {size}", entry.row, entry.col)));
        }
        let mut x = matrix.get(entry.row, entry.col).clone();
        for (j, t) in entry.terms.iter().enumerate() {
            let zeta = ExteriorMonomial::new(&t.zetas)
                .ok_or_else(|| GluingError::Json(format!("entry {i} term {j}: zetas must be strictly increasing, 1-based")))?;
            let q = parse_rational(&t.coeff)
                .ok_or_else(|| GluingError::Json(format!("entry {i} term {j}: bad coefficient {:?}", t.coeff)))?;
            x.add_term(t.z, zeta, q);
        }
        matrix.set(entry.row, entry.col, x);
    }
    EndomorphismCochain::new(desc, matrix)
}

pub fn cochain_to_json(a: &EndomorphismCochain) -> String {
    let entries: Vec<EntryFile> = a
        .matrix
        .entries()
        .filter(|(_, _, x)| !x.is_zero())
        .map(|(row, col, x)| EntryFile {
            row,
            col,
            terms: x.terms().map(|(z, zeta, q)| TermFile { z, zetas: zeta.indices(), coeff: q.to_string() }).collect(),
        })
        .collect();
    serde_json::to_string(&entries).expect("cochain serializes")
}

/// Parameters for random cochains.
#[derive(Clone, Copy, Debug)]
pub struct RandomCochain {
    pub z_range: (i64, i64),
    /// Probability that a given `(entry, monomial)` slot is populated.
    pub density: f64,
    pub min_degree: usize,
}

impl Default for RandomCochain {
    fn default() -> Self {
        RandomCochain { z_range: (-2, 2), density: 0.35, min_degree: 1 }
    }
}

fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let n = rng.gen_range(-3..=3);
        if n != 0 {
            return ratio(n, rng.gen_range(1..=2));
        }
    }
}

/// Random valid quasi-derivation `A` (entries of degree `≥ min_degree` and correct parity).
pub fn random_cochain<R: Rng>(desc: &SheafDescriptor, rng: &mut R, cfg: RandomCochain) -> EndomorphismCochain {
    let m = desc.space().m;
    let summands = desc.summands();
    let size = summands.len();
    let mut matrix = CoeffMatrix::zero(size);
    for r in 0..size {
        for c in 0..size {
            let want = summands[r].parity + summands[c].parity;
            let mut x = GradedCoefficient::zero();
            for zeta in ExteriorMonomial::all(m) {
                if zeta.degree() < cfg.min_degree.max(1) || zeta.parity() != want || !rng.gen_bool(cfg.density) {
                    continue;
                }
                x.add_term(rng.gen_range(cfg.z_range.0..=cfg.z_range.1), zeta, random_rational(rng));
            }
            matrix.set(r, c, x);
        }
    }
    EndomorphismCochain { m, matrix }
}

/// Random global invertible degree-0 automorphism of `gr E` and its inverse.
///
/// Entries link summands of equal parity with `t_r ≥ t_c` (so they are global
/// sections of `O(t_r - t_c)`); summands are sorted by descending twist within
/// each parity, which makes the off-diagonal part strictly upper triangular.
pub fn random_global_automorphism<R: Rng>(desc: &SheafDescriptor, rng: &mut R) -> (CoeffMatrix, CoeffMatrix) {
    let summands = desc.summands();
    let size = summands.len();
    let mut diag = CoeffMatrix::zero(size);
    let mut diag_inv = CoeffMatrix::zero(size);
    let mut upper = CoeffMatrix::zero(size);
    for r in 0..size {
        let q = random_rational(rng);
        diag_inv.set(r, r, GradedCoefficient::constant(q.recip()));
        diag.set(r, r, GradedCoefficient::constant(q));
        for c in r + 1..size {
            let (sr, sc) = (summands[r], summands[c]);
            if sr.parity != sc.parity || sr.twist < sc.twist || !rng.gen_bool(0.6) {
                continue;
            }
            let k = rng.gen_range(0..=sr.twist - sc.twist);
            upper.set(r, c, GradedCoefficient::term(random_rational(rng), k, ExteriorMonomial::one()));
        }
    }
    let g = diag.add(&upper);
    // g = D (I + D⁻¹U) with D⁻¹U nilpotent.
    let nil = diag_inv.mul(&upper).scale(&-Rational::one());
    let mut series = CoeffMatrix::identity(size);
    let mut power = CoeffMatrix::identity(size);
    for _ in 0..size {
        power = power.mul(&nil);
        series = series.add(&power);
    }
    let g_inv = series.mul(&diag_inv);
    debug_assert_eq!(g.mul(&g_inv), CoeffMatrix::identity(size));
    (g, g_inv)
}

/// The flagship cochain `z^{z_exp} ζ1 · E_{f←e}` on a descriptor with one even
/// and one odd summand.
pub fn elementary_cochain(desc: &SheafDescriptor, row: usize, col: usize, z_exp: i64, zetas: &[usize]) -> Result<EndomorphismCochain, GluingError> {
    let mut matrix = CoeffMatrix::zero(desc.total_rank());
    let zeta = ExteriorMonomial::new(zetas).ok_or_else(|| GluingError::Json("bad monomial".into()))?;
    if row >= matrix.size() || col >= matrix.size() {
        return Err(GluingError::Size { expected: desc.total_rank(), got: row.max(col) + 1 });
    }
    matrix.set(row, col, GradedCoefficient::term(Rational::one(), z_exp, zeta));
    EndomorphismCochain::new(desc, matrix)
}

/// Parity of `End` entry `(r, c)` required by the summand parities.
pub fn entry_parity(desc: &SheafDescriptor, row: usize, col: usize) -> Parity {
    let s = desc.summands();
    s[row].parity + s[col].parity
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::{build_split_complex, cohomology, ParityDims};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flagship() -> SheafDescriptor {
        SheafDescriptor::on(1, 1, &[0], &[-1])
    }

    fn flagship_cocycle(z: i64) -> GluingCocycle {
        exp(&elementary_cochain(&flagship(), 1, 0, z, &[1]).unwrap())
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let d = flagship();
        assert_eq!(exp(&EndomorphismCochain::zero(&d)), GluingCocycle::identity(&d));
    }

    #[test]
    fn exp_square_zero() {
        let a = elementary_cochain(&flagship(), 1, 0, -1, &[1]).unwrap();
        let e = exp(&a);
        assert_eq!(e.matrix(), &CoeffMatrix::identity(2).add(a.matrix()));
        assert_eq!(log(&e), a);
    }

    #[test]
    fn log_exp_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=3 {
            let d = SheafDescriptor::on(1, m, &[1, -1], &[0]);
            for _ in 0..10 {
                let a = random_cochain(&d, &mut rng, RandomCochain { density: 0.6, ..Default::default() });
                let e = exp(&a);
                assert_eq!(log(&e), a);
                assert_eq!(exp(&log(&e)), e);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let d = flagship();
        let mut bad = CoeffMatrix::zero(2);
        bad.set(0, 0, GradedCoefficient::zeta(1));
        assert_eq!(EndomorphismCochain::new(&d, bad).unwrap_err(), GluingError::Parity { row: 0, col: 0 });
        let mut deg0 = CoeffMatrix::zero(2);
        deg0.set(0, 0, GradedCoefficient::z_pow(3));
        assert_eq!(EndomorphismCochain::new(&d, deg0).unwrap_err(), GluingError::DegreeZero { row: 0, col: 0 });
        let mut not_unip = CoeffMatrix::identity(2);
        not_unip.set(0, 0, GradedCoefficient::z_pow(1));
        assert_eq!(log_unipotent(&not_unip, 1).unwrap_err(), GluingError::NotUnipotent);
        assert_eq!(GluingCocycle::from_matrix(&d, not_unip).unwrap_err(), GluingError::NotUnipotent);
    }

    #[test]
    fn orders() {
        let d = flagship();
        assert_eq!(order(&d, &GluingCocycle::identity(&d)), Order::SplitRepresentative);
        assert_eq!(order(&d, &flagship_cocycle(-1)), Order::Order(1));
        assert_eq!(order(&d, &flagship_cocycle(0)), Order::SplitRepresentative);
        assert_eq!(order(&d, &flagship_cocycle(-3)), Order::SplitRepresentative);
    }

    #[test]
    fn absorption_certificate_is_exact() {
        let d = flagship();
        let a = flagship_cocycle(0);
        let red = absorb(&d, &a, None);
        assert!(red.representative.is_identity());
        assert_eq!(red.g0.mul(a.matrix()).mul(&red.g1_inv), CoeffMatrix::identity(2));
        assert_eq!(red.g1.mul(&red.g1_inv), CoeffMatrix::identity(2));
    }

    #[test]
    fn symbols() {
        let d = flagship();
        assert!(mu_k(&d, &GluingCocycle::identity(&d), 1).is_zero());
        let s = mu_k(&d, &flagship_cocycle(-1), 1);
        assert_eq!(s.cohomology_class.len(), 1);
        assert_eq!((s.cohomology_class[0].row, s.cohomology_class[0].col, s.cohomology_class[0].z), (1, 0, -1));
        let l = lambda_p(&d, &flagship_cocycle(-1), 1).unwrap();
        assert_eq!(l, s);

        let d2 = SheafDescriptor::on(1, 2, &[0], &[0]);
        let a = exp(&elementary_cochain(&d2, 0, 0, -1, &[1, 2]).unwrap());
        assert!(mu_k(&d2, &a, 1).cochain.is_zero());
        assert!(!mu_k(&d2, &a, 2).is_zero());
        assert!(lambda_p(&d2, &a, 1).unwrap().cochain.is_zero());
        assert_eq!(lambda_p(&d2, &a, 2).unwrap(), mu_k(&d2, &a, 2));
        assert_eq!(order(&d2, &a), Order::Order(2));

        let deg1 = exp(&elementary_cochain(&d2, 0, 1, -1, &[1]).unwrap());
        assert_eq!(lambda_p(&d2, &deg1, 2).unwrap_err(), GluingError::NotInFiltration { min_degree: 1, p: 2 });
    }

    #[test]
    fn identity_twist_is_bit_identical() {
        for d in [flagship(), SheafDescriptor::on(1, 2, &[3, -1], &[0])] {
            let split = build_split_complex(&d, WindowSpec::Auto).unwrap();
            let tw = twisted_complex(&d, &GluingCocycle::identity(&d), WindowSpec::Auto).unwrap();
            assert_eq!(split, tw);
        }
    }

    #[test]
    fn flagship_twisted_dims() {
        let d = flagship();
        let cx = twisted_complex(&d, &flagship_cocycle(-1), WindowSpec::Auto).unwrap();
        cx.check_invariants().unwrap();
        assert_eq!(cohomology(&cx).h, vec![ParityDims::default(); 2]);
    }

    #[test]
    fn small_fixed_window_is_rejected() {
        let d = flagship();
        let w = WindowSpec::Fixed(crate::geometry::Window::new(-3, 3).unwrap());
        let err = twisted_complex(&d, &flagship_cocycle(-1), w).unwrap_err();
        assert!(matches!(err, CechError::WindowTooSmall { .. }));
    }

    #[test]
    fn conjugation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = SheafDescriptor::on(1, 2, &[1, 0, 0], &[-1]);
        let a = exp(&random_cochain(&d, &mut rng, RandomCochain::default()));
        let base = cohomology(&twisted_complex(&d, &a, WindowSpec::Auto).unwrap()).h;
        for _ in 0..3 {
            let (g, g_inv) = random_global_automorphism(&d, &mut rng);
            assert_eq!(g.mul(&g_inv), CoeffMatrix::identity(4));
            let b = a.conjugate(&g, &g_inv);
            assert_eq!(cohomology(&twisted_complex(&d, &b, WindowSpec::Auto).unwrap()).h, base);
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = SheafDescriptor::on(1, 2, &[0], &[-1]);
        let text = r#"[{"row":1,"col":0,"terms":[{"z":-1,"zetas":[1],"coeff":"1"},{"z":2,"zetas":[2],"coeff":"-3/4"}]}]"#;
        let a = cochain_from_json(&d, text).unwrap();
        assert_eq!(cochain_from_json(&d, &cochain_to_json(&a)).unwrap(), a);
        assert!(matches!(cochain_from_json(&d, r#"[{"row":0,"col":0,"terms":[{"z":0,"zetas":[1],"coeff":"1"}]}]"#), Err(GluingError::Parity { .. })));
        assert!(matches!(cochain_from_json(&d, r#"[{"row":1,"col":0,"terms":[{"z":0,"zetas":[3],"coeff":"1"}]}]"#), Err(GluingError::OddIndex { .. })));
        assert!(matches!(cochain_from_json(&d, "[{\"row\":1}]"), Err(GluingError::Json(_))));
    }
}
