//! Finite topological spaces and finite compact ordered spaces.
//!
//! A finite compact ordered space carries the discrete topology, so it is
//! just a finite poset. Every subset is closed, every function is
//! continuous into `Y^↓`, and the opens of `X` are all subsets.

use thiserror::Error;

use crate::order::{
    bit, down_set_lattice, enumerate_monotone_maps, filters, format_set, full_mask, members,
    FinLattice, FinPoset, OrderError, Preserve, ScottTest,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopError {
    #[error("not a topology: {0}")]
    NotTopology(String),
    #[error("not T0: points {0} and {1} have the same neighbourhoods")]
    NotT0(usize, usize),
    #[error("{what} has {n} points, cap is {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },
    #[error(transparent)]
    Order(#[from] OrderError),
}

pub type Result<T> = std::result::Result<T, TopError>;

/// Default point cap for the decomposition bijection.
pub const BIJECTION_CAP: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinTopSpace {
    n: usize,
    opens: Vec<u64>,
}

impl FinTopSpace {
    pub fn new(n: usize, opens: &[u64]) -> Result<Self> {
        if n > 63 {
            return Err(TopError::CapExceeded { what: "space", n, cap: 63 });
        }
        let full = full_mask(n);
        let mut opens: Vec<u64> = opens.to_vec();
        opens.sort_unstable();
        opens.dedup();
        let bad = |m: String| TopError::NotTopology(m);
        if let Some(u) = opens.iter().find(|&&u| u & !full != 0) {
            return Err(bad(format!("{} has points outside 0..{n}", format_set(*u))));
        }
        if opens.binary_search(&0).is_err() {
            return Err(bad("∅ is missing".into()));
        }
        if opens.binary_search(&full).is_err() {
            return Err(bad("the whole space is missing".into()));
        }
        for &u in &opens {
            for &v in &opens {
                if opens.binary_search(&(u | v)).is_err() {
                    return Err(bad(format!("{} ∪ {} is not open", format_set(u), format_set(v))));
                }
                if opens.binary_search(&(u & v)).is_err() {
                    return Err(bad(format!("{} ∩ {} is not open", format_set(u), format_set(v))));
                }
            }
        }
        Ok(FinTopSpace { n, opens })
    }

    pub fn discrete(n: usize) -> Self {
        FinTopSpace { n, opens: (0..=full_mask(n)).collect() }
    }

    /// The Alexandrov topology whose opens are the up-sets of `p`.
    pub fn alexandrov(p: &FinPoset) -> Self {
        FinTopSpace { n: p.n(), opens: p.up_sets() }
    }

    /// `{∅, {1}, {0, 1}}`.
    pub fn sierpinski() -> Self {
        FinTopSpace { n: 2, opens: vec![0, 0b10, 0b11] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Opens in ascending bitmask order.
    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn is_open(&self, s: u64) -> bool {
        self.opens.binary_search(&s).is_ok()
    }

    /// Smallest open containing `s`.
    pub fn saturation(&self, s: u64) -> u64 {
        self.opens.iter().filter(|&&u| u & s == s).fold(full_mask(self.n), |a, &u| a & u)
    }

    /// `x ⊑ y` iff every open containing `x` contains `y`.
    pub fn specialization(&self) -> Result<FinPoset> {
        let m: Vec<Vec<bool>> = (0..self.n)
            .map(|x| (0..self.n).map(|y| self.saturation(bit(x)) & bit(y) != 0).collect())
            .collect();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if m[x][y] && m[y][x] {
                    return Err(TopError::NotT0(x, y));
                }
            }
        }
        Ok(crate::order::check_poset(&m)?)
    }

    /// `Ω(S)` ordered by inclusion, indexed like [`FinTopSpace::opens`].
    pub fn frame(&self) -> FinLattice {
        FinLattice::of_sets(&self.opens).expect("opens form a lattice")
    }
}

/// A finite compact ordered space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompOrdSpace {
    pub poset: FinPoset,
}

impl CompOrdSpace {
    pub fn new(poset: FinPoset) -> Self {
        CompOrdSpace { poset }
    }

    pub fn n(&self) -> usize {
        self.poset.n()
    }
}

/// `X^↓`: the open down-sets.
pub fn down_space(x: &CompOrdSpace) -> FinTopSpace {
    FinTopSpace::new(x.n(), &x.poset.down_sets()).expect("down-sets form a topology")
}

/// `X^↑`: the open up-sets.
pub fn up_space(x: &CompOrdSpace) -> FinTopSpace {
    FinTopSpace::new(x.n(), &x.poset.up_sets()).expect("up-sets form a topology")
}

/// The compact saturated sets ordered by inclusion. On a finite space
/// every subset is compact, so these are the intersections of opens.
pub fn compact_saturated(s: &FinTopSpace) -> Result<(FinLattice, Vec<u64>)> {
    s.specialization()?;
    let mut sets: Vec<u64> = (0..=full_mask(s.n)).map(|k| s.saturation(k)).collect();
    sets.sort_unstable();
    sets.dedup();
    Ok((FinLattice::of_sets(&sets)?, sets))
}

/// Checks that complement sends `Ω(X^↓)` onto `K(X^↑)` reversing order.
pub fn complement_duality_check(x: &CompOrdSpace) -> bool {
    let full = x.poset.full();
    let opens = down_space(x).opens().to_vec();
    let Ok((_, ks)) = compact_saturated(&up_space(x)) else { return false };
    let mut images: Vec<u64> = opens.iter().map(|&u| !u & full).collect();
    images.sort_unstable();
    images == ks
        && opens.iter().all(|&u| {
            opens.iter().all(|&v| (u & !v == 0) == ((!v & full) & !(!u & full) == 0))
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HofmannMislove {
    pub holds: bool,
    pub compact_saturated: usize,
    pub scott_open_filters: usize,
    pub scott_test: ScottTest,
    pub failure: Option<String>,
}

/// `Φ(K) = {U : K ⊆ U}` is an order isomorphism from `K(S)^op` onto the
/// Scott-open filters of `Ω(S)`, with inverse `k ↦ ⋂ k`.
pub fn hofmann_mislove_check(s: &FinTopSpace) -> Result<HofmannMislove> {
    let (_, ks) = compact_saturated(s)?;
    let frame = s.frame();
    let (fs, scott_test) = filters(&frame);
    let sof: Vec<u64> = fs.iter().filter(|f| f.scott_open).map(|f| f.members).collect();
    let phi = |k: u64| -> u64 {
        s.opens.iter().enumerate().filter(|(_, &u)| u & k == k).fold(0, |m, (i, _)| m | bit(i))
    };
    let inter = |f: u64| -> u64 { members(f).fold(full_mask(s.n), |a, i| a & s.opens[i]) };
    let mut out = HofmannMislove {
        holds: true,
        compact_saturated: ks.len(),
        scott_open_filters: sof.len(),
        scott_test,
        failure: None,
    };
    let mut fail = |m: String| {
        if out.failure.is_none() {
            out.failure = Some(m);
        }
    };
    let images: Vec<u64> = ks.iter().map(|&k| phi(k)).collect();
    for (&k, &f) in ks.iter().zip(&images) {
        if sof.binary_search(&f).is_err() {
            fail(format!("Φ({}) is not a Scott-open filter", format_set(k)));
        }
        if inter(f) != k {
            fail(format!("⋂Φ({}) ≠ {}", format_set(k), format_set(k)));
        }
    }
    for &f in &sof {
        if phi(inter(f)) != f {
            fail(format!("Φ(⋂k) ≠ k for k = {}", format_set(f)));
        }
    }
    for (i, &k1) in ks.iter().enumerate() {
        for (j, &k2) in ks.iter().enumerate() {
            if (k1 & !k2 == 0) != (images[j] & !images[i] == 0) {
                fail(format!("order not reversed at {}, {}", format_set(k1), format_set(k2)));
            }
        }
    }
    if ks.len() != sof.len() {
        fail(format!("{} compact saturated sets, {} Scott-open filters", ks.len(), sof.len()));
    }
    out.holds = out.failure.is_none();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedCommute {
    pub criterion: bool,
    pub pushout: bool,
    /// A comparable pair `(lower, upper)` with no interpolant.
    pub witness: Option<(usize, usize)>,
}

impl ClosedCommute {
    pub fn agree(&self) -> bool {
        self.criterion == self.pushout
    }
}

/// Do the equivalence relations on `X_*` cut out by the closed sets `c1`,
/// `c2` commute? Decided by the interpolation criterion and compared with
/// the poset pushout of `c1 ← c1 ∩ c2 → c2`.
pub fn closed_commute(x: &CompOrdSpace, c1: u64, c2: u64) -> ClosedCommute {
    let p = &x.poset;
    let both = c1 & c2;
    let mut witness = None;
    'outer: for a in members(c1) {
        for b in members(c2) {
            for (lo, hi) in [(a, b), (b, a)] {
                if p.leq(lo, hi) && members(both).all(|z| !(p.leq(lo, z) && p.leq(z, hi))) {
                    witness = Some((lo, hi));
                    break 'outer;
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for c in [c1, c2] {
        for a in members(c) {
            for b in members(c) {
                if p.leq(a, b) {
                    pairs.push((a, b));
                }
            }
        }
    }
    let glued = FinPoset::from_relation(p.n(), &pairs).expect("sub-relation of a partial order");
    let union = c1 | c2;
    let pushout = members(union).all(|a| members(union).all(|b| glued.leq(a, b) == p.leq(a, b)));
    ClosedCommute { criterion: witness.is_none(), pushout, witness }
}

/// For each `x1 ≤ x2` there is `z` with `x1 ≤ z ≤ x2`, `q(x1) ≤ q(z)` and
/// `q(x2) ≤ q(z)`. Returns the first failing pair.
pub fn interpolation_failure(q: &[usize], x: &CompOrdSpace, y: &CompOrdSpace) -> Option<(usize, usize)> {
    let (px, py) = (&x.poset, &y.poset);
    for a in 0..px.n() {
        for b in members(px.up(a)) {
            let ok = members(px.up(a) & px.down(b)).any(|z| py.leq(q[a], q[z]) && py.leq(q[b], q[z]));
            if !ok {
                return Some((a, b));
            }
        }
    }
    None
}

pub fn interpolating_check(q: &[usize], x: &CompOrdSpace, y: &CompOrdSpace) -> bool {
    interpolation_failure(q, x, y).is_none()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub functions: usize,
    pub decompositions: usize,
    pub frame_homs: usize,
    pub commuting_frame_homs: usize,
    /// `q ↦ q⁻¹` is a bijection from decompositions onto commuting frame homs.
    pub bijection: bool,
    /// For every function, interpolating iff its preimage map has commuting image.
    pub pointwise_agreement: bool,
    pub failure: Option<String>,
}

impl BijectionReport {
    pub fn pass(&self) -> bool {
        self.bijection && self.pointwise_agreement && self.decompositions == self.commuting_frame_homs
    }
}

fn all_functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|f: Vec<usize>| {
                (0..m).map(move |v| {
                    let mut g = f.clone();
                    g.push(v);
                    g
                })
            })
            .collect();
    }
    out
}

/// Every interpolating decomposition `X → Y^↓`, in lexicographic order.
pub fn interpolating_decompositions(x: &CompOrdSpace, y: &CompOrdSpace) -> Vec<Vec<usize>> {
    all_functions(x.n(), y.n()).into_iter().filter(|q| interpolating_check(q, x, y)).collect()
}

/// Opens of `X` commute when their closed complements do.
fn opens_commute(x: &CompOrdSpace, u: u64, v: u64) -> bool {
    let full = x.poset.full();
    closed_commute(x, !u & full, !v & full).criterion
}

/// Compares interpolating decompositions `X → Y^↓` with frame
/// homomorphisms `Ω(Y^↓) → Ω(X)` whose images pairwise commute. The two
/// sides are enumerated independently.
pub fn decomposition_bijection_check(x: &CompOrdSpace, y: &CompOrdSpace) -> Result<BijectionReport> {
    decomposition_bijection_check_with(x, y, BIJECTION_CAP)
}

pub fn decomposition_bijection_check_with(
    x: &CompOrdSpace,
    y: &CompOrdSpace,
    cap: usize,
) -> Result<BijectionReport> {
    for (what, s) in [("X", x), ("Y", y)] {
        if s.n() > cap {
            return Err(TopError::CapExceeded { what, n: s.n(), cap });
        }
    }
    let (dy, downs) = down_set_lattice(&y.poset);
    let px = FinLattice::boolean(x.n());
    let homs: Vec<Vec<u64>> = enumerate_monotone_maps(&dy, &px, Preserve::FRAME, false)
        .into_iter()
        .map(|m| m.val.iter().map(|&v| v as u64).collect())
        .collect();
    let commuting: Vec<&Vec<u64>> = homs
        .iter()
        .filter(|h| h.iter().all(|&u| h.iter().all(|&v| opens_commute(x, u, v))))
        .collect();
    let preimage = |q: &[usize]| -> Vec<u64> {
        downs.iter().map(|&d| (0..x.n()).filter(|&i| d & bit(q[i]) != 0).fold(0, |m, i| m | bit(i))).collect()
    };
    let functions = all_functions(x.n(), y.n());
    let mut report = BijectionReport {
        functions: functions.len(),
        decompositions: 0,
        frame_homs: homs.len(),
        commuting_frame_homs: commuting.len(),
        bijection: true,
        pointwise_agreement: true,
        failure: None,
    };
    let mut hit = vec![false; commuting.len()];
    for q in &functions {
        let psi = preimage(q);
        let interp = interpolating_check(q, x, y);
        let comm = psi.iter().all(|&u| psi.iter().all(|&v| opens_commute(x, u, v)));
        if interp != comm {
            report.pointwise_agreement = false;
            report.failure.get_or_insert(format!("q = {q:?}: interpolating {interp}, commuting image {comm}"));
        }
        if !homs.contains(&psi) {
            report.bijection = false;
            report.failure.get_or_insert(format!("preimage of q = {q:?} is not a frame homomorphism"));
        }
        if interp {
            report.decompositions += 1;
            match commuting.iter().position(|h| **h == psi) {
                Some(i) if !hit[i] => hit[i] = true,
                Some(_) => {
                    report.bijection = false;
                    report.failure.get_or_insert(format!("two decompositions share the image of q = {q:?}"));
                }
                None => {
                    report.bijection = false;
                    report.failure.get_or_insert(format!("q = {q:?} has no commuting frame homomorphism"));
                }
            }
        }
    }
    if hit.iter().any(|h| !h) {
        report.bijection = false;
        report.failure.get_or_insert("a commuting frame homomorphism is not a preimage map".into());
    }
    Ok(report)
}
