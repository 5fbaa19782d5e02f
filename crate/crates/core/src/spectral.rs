//! The spectral sequence of a filtered cochain complex.
//!
//! Pages are computed straight from the subquotients
//! `E_r^{p,q} = C_r^{p,q} / (C_{r-1}^{p+1,q-1} + d C_{r-1}^{p-r+1,q+r-2})` with
//! `C_r^{p,q} = {c ∈ F_p C^{p+q} : dc ∈ F_{p+r} C^{p+q+1}}`; the page-homology
//! law `E_{r+1} = H(E_r, d_r)` is then checked as an independent cross-check.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cech::{CechComplex, CechError, ParityDims, WindowSpec};
use crate::coeff::Parity;
use crate::gluing::{absorb, twisted_complex, GluingCocycle, Order};
use crate::linalg::{kernel, subquotient, Matrix, SparseVec, Subquotient, Subspace};
use crate::sheaf::SheafDescriptor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("invalid filtered complex: {0}")]
    Invalid(String),
    #[error("internal inconsistency: {0}")]
    NonConvergent(String),
    #[error(transparent)]
    Cech(#[from] CechError),
}

/// Filtration index and (sheaf) parity of one basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellInfo {
    pub filtration: usize,
    pub parity: Parity,
}

/// Cochain spaces `C^0..C^N` with `d^k: C^k -> C^{k+1}` that never lower the
/// filtration and preserve parity.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    cochains: Vec<Vec<CellInfo>>,
    differentials: Vec<Matrix>,
    max_filtration: usize,
}

impl FilteredComplex {
    pub fn new(cochains: Vec<Vec<CellInfo>>, differentials: Vec<Matrix>, max_filtration: usize) -> Result<Self, SpectralError> {
        if differentials.len() + 1 != cochains.len() && !(cochains.is_empty() && differentials.is_empty()) {
            return Err(SpectralError::Invalid("need one differential between consecutive degrees".into()));
        }
        for (k, d) in differentials.iter().enumerate() {
            if d.cols() != cochains[k].len() || d.rows() != cochains[k + 1].len() {
                return Err(SpectralError::Invalid(format!("d^{k} has the wrong shape")));
            }
            for (r, c, _) in d.entries() {
                let (src, dst) = (cochains[k][c], cochains[k + 1][r]);
                if dst.filtration < src.filtration {
                    return Err(SpectralError::Invalid(format!("d^{k} lowers the filtration at ({r},{c})")));
                }
                if dst.parity != src.parity {
                    return Err(SpectralError::Invalid(format!("d^{k} is not parity-odd at ({r},{c})")));
                }
            }
            if k + 1 < differentials.len() {
                let dd = differentials[k + 1].mul(d).map_err(|e| SpectralError::Invalid(e.to_string()))?;
                if !dd.is_zero() {
                    return Err(SpectralError::Invalid(format!("d^{} d^{k} != 0", k + 1)));
                }
            }
        }
        if cochains.iter().flatten().any(|c| c.filtration > max_filtration) {
            return Err(SpectralError::Invalid("filtration index above the declared maximum".into()));
        }
        Ok(FilteredComplex { cochains, differentials, max_filtration })
    }

    pub fn top_degree(&self) -> usize {
        self.cochains.len().saturating_sub(1)
    }

    pub fn max_filtration(&self) -> usize {
        self.max_filtration
    }

    pub fn dim(&self, n: i64) -> usize {
        self.cells(n).len()
    }

    fn cells(&self, n: i64) -> &[CellInfo] {
        if n < 0 {
            return &[];
        }
        self.cochains.get(n as usize).map_or(&[], |v| v.as_slice())
    }

    /// `d^n`, or a zero map at the ends.
    fn d(&self, n: i64) -> Matrix {
        match (n >= 0).then(|| self.differentials.get(n as usize)).flatten() {
            Some(d) => d.clone(),
            None => Matrix::zeros(self.dim(n + 1), self.dim(n)),
        }
    }

    fn in_filtration(&self, n: i64, p: i64) -> Vec<usize> {
        self.cells(n).iter().enumerate().filter(|(_, c)| c.filtration as i64 >= p).map(|(i, _)| i).collect()
    }

    fn parity_of(&self, n: i64, v: &SparseVec) -> Option<Parity> {
        let cells = self.cells(n);
        let mut it = v.keys().map(|&i| cells[i].parity);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Total cohomology computed directly as `ker d / im d`, split by parity.
    pub fn direct_cohomology(&self) -> Vec<ParityDims> {
        let mut out = Vec::new();
        for n in 0..self.cochains.len() as i64 {
            let mut dims = ParityDims::default();
            for parity in [Parity::Even, Parity::Odd] {
                let sel = |k: i64| -> Vec<usize> {
                    self.cells(k).iter().enumerate().filter(|(_, c)| c.parity == parity).map(|(i, _)| i).collect()
                };
                let (here, next, prev) = (sel(n), sel(n + 1), sel(n - 1));
                let ker = kernel(&self.d(n).select(&next, &here)).dim();
                let im = self.d(n - 1).select(&here, &prev).rank();
                dims.add(parity, (ker - im) as u64);
            }
            out.push(dims);
        }
        out
    }
}

/// One cell `E_r^{p,q}` with its subquotient data.
#[derive(Clone, Debug)]
pub struct Cell {
    pub dims: ParityDims,
    pub quotient: Subquotient,
    /// Parity of each basis representative.
    pub parities: Vec<Parity>,
}

#[derive(Clone, Debug)]
pub struct SpectralPage {
    pub r: usize,
    pub cells: BTreeMap<(i64, i64), Cell>,
}

impl SpectralPage {
    pub fn dims(&self) -> BTreeMap<(i64, i64), ParityDims> {
        self.cells.iter().map(|(k, c)| (*k, c.dims)).collect()
    }

    pub fn total(&self, n: i64) -> ParityDims {
        let mut out = ParityDims::default();
        for ((p, q), c) in &self.cells {
            if p + q == n {
                out.even += c.dims.even;
                out.odd += c.dims.odd;
            }
        }
        out
    }
}

/// `d_r`, one matrix per source cell, mapping `(p, q)` to `(p + r, q - r + 1)`.
#[derive(Clone, Debug)]
pub struct PageDifferential {
    pub r: usize,
    pub maps: BTreeMap<(i64, i64), Matrix>,
}

impl PageDifferential {
    pub fn is_zero(&self) -> bool {
        self.maps.values().all(Matrix::is_zero)
    }

    pub fn target(&self, (p, q): (i64, i64)) -> (i64, i64) {
        (p + self.r as i64, q - self.r as i64 + 1)
    }
}

/// Page computations with the `C_r^{p,q}` spaces cached.
pub struct SpectralSequence<'a> {
    fc: &'a FilteredComplex,
    z_cache: HashMap<(i64, i64, i64), Subspace>,
    pages: BTreeMap<usize, SpectralPage>,
}

impl<'a> SpectralSequence<'a> {
    pub fn new(fc: &'a FilteredComplex) -> Self {
        SpectralSequence { fc, z_cache: HashMap::new(), pages: BTreeMap::new() }
    }

    pub fn complex(&self) -> &FilteredComplex {
        self.fc
    }

    /// `C_r^p` in total degree `n`.
    fn z(&mut self, p: i64, r: i64, n: i64) -> Subspace {
        let max = self.fc.max_filtration as i64;
        // Clamp to keep cache keys finite: F_p is everything for p <= 0 and
        // nothing beyond max; the condition on dc is vacuous once p + r <= 0
        // and maximal once p + r > max + 1.
        let pc = p.clamp(0, max + 1);
        let tc = (p + r).clamp(0, max + 1);
        let key = (pc, tc, n);
        if let Some(s) = self.z_cache.get(&key) {
            return s.clone();
        }
        let dim = self.fc.dim(n);
        let cols = self.fc.in_filtration(n, pc);
        let rows: Vec<usize> = self
            .fc
            .cells(n + 1)
            .iter()
            .enumerate()
            .filter(|(_, c)| (c.filtration as i64) < tc)
            .map(|(i, _)| i)
            .collect();
        let block = self.fc.d(n).select(&rows, &cols);
        let ker = kernel(&block);
        let embedded = Subspace::span(
            dim,
            ker.basis().iter().map(|v| v.iter().map(|(&i, x)| (cols[i], x.clone())).collect::<SparseVec>()),
        );
        self.z_cache.insert(key, embedded.clone());
        embedded
    }

    fn cell(&mut self, r: usize, p: i64, q: i64) -> Cell {
        let n = p + q;
        let ri = r as i64;
        let num = self.z(p, ri, n);
        let denom_a = self.z(p + 1, ri - 1, n);
        let pre = self.z(p - ri + 1, ri - 1, n - 1);
        let d_prev = self.fc.d(n - 1);
        let denom = denom_a.sum(&pre.map(&d_prev));
        let quotient = subquotient(&num, &denom).expect("denominator lies in numerator");
        let parities: Vec<Parity> = quotient
            .representatives
            .iter()
            .map(|v| self.fc.parity_of(n, v).expect("echelon representatives are parity-homogeneous"))
            .collect();
        let mut dims = ParityDims::default();
        for par in &parities {
            dims.add(*par, 1);
        }
        Cell { dims, quotient, parities }
    }

    pub fn page(&mut self, r: usize) -> &SpectralPage {
        if !self.pages.contains_key(&r) {
            let mut cells = BTreeMap::new();
            for n in 0..=self.fc.top_degree() as i64 {
                for p in 0..=self.fc.max_filtration as i64 {
                    if self.fc.dim(n) > 0 {
                        cells.insert((p, n - p), self.cell(r, p, n - p));
                    }
                }
            }
            self.pages.insert(r, SpectralPage { r, cells });
        }
        &self.pages[&r]
    }

    pub fn differential(&mut self, r: usize) -> PageDifferential {
        let page = self.page(r).clone();
        let mut maps = BTreeMap::new();
        for (&(p, q), cell) in &page.cells {
            let target = (p + r as i64, q - r as i64 + 1);
            let n = p + q;
            let t_dim = page.cells.get(&target).map_or(0, |c| c.quotient.dim);
            let mut mat = Matrix::zeros(t_dim, cell.quotient.dim);
            if let Some(tc) = page.cells.get(&target) {
                let d = self.fc.d(n);
                for (j, rep) in cell.quotient.representatives.iter().enumerate() {
                    let image = tc.quotient.project(&d.mul_vec(rep));
                    for (i, x) in image {
                        mat.set(i, j, x);
                    }
                }
            }
            maps.insert((p, q), mat);
        }
        PageDifferential { r, maps }
    }

    /// `F_p H^n / F_{p+1} H^n`, computed from `ker d ∩ F_p` and `im d`.
    pub fn graded_cohomology(&mut self) -> BTreeMap<(i64, i64), ParityDims> {
        let mut out = BTreeMap::new();
        for n in 0..=self.fc.top_degree() as i64 {
            if self.fc.dim(n) == 0 {
                continue;
            }
            let boundaries = Subspace::span(self.fc.dim(n), self.fc.d(n - 1).column_vectors());
            let max = self.fc.max_filtration as i64;
            let f_h = |s: &mut Self, p: i64| -> (Subspace, Subspace) {
                let z = s.z(p, i64::MAX / 4, n);
                (z.sum(&boundaries), z)
            };
            for p in 0..=max {
                let (here, _) = f_h(self, p);
                let (next, _) = f_h(self, p + 1);
                let q = subquotient(&here, &next).expect("filtration is decreasing");
                let mut dims = ParityDims::default();
                for v in &q.representatives {
                    dims.add(self.fc.parity_of(n, v).expect("homogeneous"), 1);
                }
                out.insert((p, n), dims);
            }
        }
        out
    }
}

pub fn page(fc: &FilteredComplex, r: usize) -> SpectralPage {
    SpectralSequence::new(fc).page(r).clone()
}

pub fn differential(fc: &FilteredComplex, r: usize) -> PageDifferential {
    SpectralSequence::new(fc).differential(r)
}

/// Dimensions of `H(E_r, d_r)` at every cell of page `r`.
pub fn page_homology(page: &SpectralPage, d: &PageDifferential) -> BTreeMap<(i64, i64), ParityDims> {
    let r = d.r as i64;
    let mut out = BTreeMap::new();
    for (&(p, q), cell) in &page.cells {
        let mut dims = ParityDims::default();
        for parity in [Parity::Even, Parity::Odd] {
            let sel = |c: &Cell| -> Vec<usize> { (0..c.parities.len()).filter(|&i| c.parities[i] == parity).collect() };
            let here = sel(cell);
            let out_rank = match page.cells.get(&(p + r, q - r + 1)) {
                Some(t) => d.maps[&(p, q)].select(&sel(t), &here).rank(),
                None => 0,
            };
            let in_rank = match page.cells.get(&(p - r, q + r - 1)) {
                Some(s) => d.maps[&(p - r, q + r - 1)].select(&here, &sel(s)).rank(),
                None => 0,
            };
            dims.add(parity, (here.len() - out_rank - in_rank) as u64);
        }
        out.insert((p, q), dims);
    }
    out
}

/// Bidegree, parity and `d_r ∘ d_r = 0` checks for one differential.
pub fn check_differential(page: &SpectralPage, d: &PageDifferential) -> Result<(), String> {
    let r = d.r as i64;
    for (&(p, q), mat) in &d.maps {
        let source = &page.cells[&(p, q)];
        let target = page.cells.get(&(p + r, q - r + 1));
        if target.is_none() && !mat.is_zero() {
            return Err(format!("d_{r} from ({p},{q}) leaves the page"));
        }
        for (i, j, _) in mat.entries() {
            if target.expect("nonzero map has a target").parities[i] != source.parities[j] {
                return Err(format!("d_{r} from ({p},{q}) is not parity-odd"));
            }
        }
        if let Some(next) = d.maps.get(&(p + r, q - r + 1)) {
            let dd = next.mul(mat).map_err(|e| e.to_string())?;
            if !dd.is_zero() {
                return Err(format!("d_{r} ∘ d_{r} != 0 at ({p},{q})"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageDims {
    pub r: usize,
    #[serde(serialize_with = "ser_cells")]
    pub cells: BTreeMap<(i64, i64), ParityDims>,
}

fn ser_cells<S: serde::Serializer>(cells: &BTreeMap<(i64, i64), ParityDims>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(cells.len()))?;
    for ((p, q), d) in cells {
        map.serialize_entry(&format!("{p},{q}"), d)?;
    }
    map.end()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub pages: Vec<PageDims>,
    /// `r_0(q) = q + m + 2`.
    #[serde(skip)]
    pub stabilization: BTreeMap<i64, usize>,
    #[serde(serialize_with = "ser_cells")]
    pub e_infinity: BTreeMap<(i64, i64), ParityDims>,
    /// `dim F_p H^k / F_{p+1} H^k`, keyed by `(p, k)`.
    #[serde(serialize_with = "ser_cells")]
    pub gr_h: BTreeMap<(i64, i64), ParityDims>,
    pub direct_h: Vec<ParityDims>,
    pub corollary_ok: bool,
    /// `E_{r_0(q)}^{p,q} = E_∞^{p,q}` on every cell.
    pub r0_bound_ok: bool,
    pub page_homology_ok: bool,
    pub differentials_ok: bool,
    pub graded_ok: bool,
}

impl ConvergenceReport {
    pub fn all_ok(&self) -> bool {
        self.corollary_ok && self.page_homology_ok && self.differentials_ok && self.graded_ok
    }

    pub fn e_infinity_totals(&self) -> Vec<ParityDims> {
        let mut out = vec![ParityDims::default(); self.direct_h.len()];
        for ((p, q), d) in &self.e_infinity {
            if let Some(slot) = out.get_mut((p + q) as usize) {
                slot.even += d.even;
                slot.odd += d.odd;
            }
        }
        out
    }
}

/// Computes pages `0..=m+2` (every `d_r` with `r > m` vanishes since the
/// filtration has length `m + 1`), checks the page-homology, bidegree and
/// parity laws, and compares `E_∞` with the directly computed cohomology.
pub fn converge(fc: &FilteredComplex) -> ConvergenceReport {
    let m = fc.max_filtration();
    let last = m + 2;
    let mut ss = SpectralSequence::new(fc);
    let mut pages = Vec::new();
    let mut page_homology_ok = true;
    let mut differentials_ok = true;
    for r in 0..=last {
        let page = ss.page(r).clone();
        pages.push(PageDims { r, cells: page.dims() });
        if r < last {
            let d = ss.differential(r);
            differentials_ok &= check_differential(&page, &d).is_ok();
            let next = ss.page(r + 1).dims();
            page_homology_ok &= page_homology(&page, &d) == next;
        }
    }
    let stable = pages[last].cells.clone();
    let mut stabilization = BTreeMap::new();
    let mut r0_bound_ok = true;
    for &(p, q) in stable.keys() {
        let r0 = (q + m as i64 + 2).max(0) as usize;
        stabilization.insert(q, r0);
        let at_r0 = ss.page(r0.min(last)).dims();
        r0_bound_ok &= at_r0[&(p, q)] == stable[&(p, q)];
    }
    let direct_h = fc.direct_cohomology();
    let gr_h = ss.graded_cohomology();
    let mut report = ConvergenceReport {
        pages,
        stabilization,
        e_infinity: stable.clone(),
        gr_h: gr_h.clone(),
        direct_h: direct_h.clone(),
        corollary_ok: false,
        r0_bound_ok,
        page_homology_ok,
        differentials_ok,
        graded_ok: stable.iter().all(|(&(p, q), d)| gr_h.get(&(p, p + q)) == Some(d)),
    };
    report.corollary_ok = report.e_infinity_totals() == direct_h;
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem8Report {
    /// `None` for a split representative.
    pub k: Option<usize>,
    pub first_nonzero_page: Option<usize>,
    /// `d_r = 0` for every `r < k`.
    pub lower_pages_zero: bool,
    /// `d_k` equals the action of `μ_k` on `E_k` representatives.
    pub symbol_match: Option<bool>,
    pub d_k_rank: usize,
}

/// Checks the order-`k` pattern on the twisted complex of the absorbed
/// representative of `a`.
pub fn theorem8_check(desc: &SheafDescriptor, a: &GluingCocycle) -> Result<Theorem8Report, SpectralError> {
    let reduced = absorb(desc, a, None);
    let cx = twisted_complex(desc, &reduced.representative, WindowSpec::Auto)?;
    let fc = cx.filtered();
    let m = fc.max_filtration();
    let mut ss = SpectralSequence::new(&fc);
    let mut first_nonzero_page = None;
    let mut diffs = BTreeMap::new();
    for r in 1..=m + 1 {
        let d = ss.differential(r);
        if first_nonzero_page.is_none() && !d.is_zero() {
            first_nonzero_page = Some(r);
        }
        diffs.insert(r, d);
    }
    let k = match reduced.order {
        Order::SplitRepresentative => None,
        Order::Order(k) => Some(k),
    };
    let Some(k) = k else {
        return Ok(Theorem8Report { k: None, first_nonzero_page, lower_pages_zero: true, symbol_match: None, d_k_rank: 0 });
    };
    let lower_pages_zero = (1..k).all(|r| diffs[&r].is_zero());
    // μ_k acts on the U1 component of the degree-p part of each representative.
    let n_k = reduced.representative.nilpotent_part().degree_component(k);
    let page = ss.page(k).clone();
    let dk = &diffs[&k];
    let symbol_cx = CechComplex::assemble(desc, cx.windows().to_vec(), Some(&n_k))?;
    let split_cx = CechComplex::assemble(desc, cx.windows().to_vec(), None)?;
    let action = symbol_cx.differential().sub(split_cx.differential()).expect("same shapes");
    let mut symbol_match = true;
    let mut d_k_rank = 0;
    for (&(p, q), cell) in &page.cells {
        if p + q != 0 {
            continue;
        }
        let target = (p + k as i64, q - k as i64 + 1);
        let Some(tc) = page.cells.get(&target) else { continue };
        let mut s_mat = Matrix::zeros(tc.quotient.dim, cell.quotient.dim);
        for (j, rep) in cell.quotient.representatives.iter().enumerate() {
            let degree_p: SparseVec = rep
                .iter()
                .filter(|(&i, _)| cx.basis(0)[i].filtration_index() as i64 == p)
                .map(|(&i, x)| (i, x.clone()))
                .collect();
            for (i, x) in tc.quotient.project(&action.mul_vec(&degree_p)) {
                if !x.is_zero() {
                    s_mat.set(i, j, x);
                }
            }
        }
        let d_mat = &dk.maps[&(p, q)];
        d_k_rank += d_mat.rank();
        symbol_match &= *d_mat == s_mat;
    }
    Ok(Theorem8Report { k: Some(k), first_nonzero_page, lower_pages_zero, symbol_match: Some(symbol_match), d_k_rank })
}
