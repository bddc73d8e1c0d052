//! Presheaves of finite algebras over finite lattices.
//!
//! A presheaf `F` on a lattice `P` is contravariant: for `p ≤ q` there is a
//! restriction `F(q) → F(p)`. Congruence-valued maps `θ` on `P` are read the
//! same way, so `p ≤ q` forces `θ(q) ⊆ θ(p)`. Under this reading, preserving
//! finite infima of `P^op` means `θ(⊥) = ∇` and `θ(p ∨ q) = θ(p) ∧ θ(q)`,
//! and preserving arbitrary suprema means `θ(⊤) = Δ` and
//! `θ(p ∧ q) = θ(p) ∨ θ(q)`.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::finalg::{
    all_homomorphisms, commute, congruence_join, congruence_lattice, factor_through,
    kernel_congruence, quotient, AlgError, ConLattice, Congruence, FinAlgebra,
    Homomorphism,
};
use crate::order::{
    bit, enumerate_monotone_maps, format_set, lawson_dual, members, scott_open_filters, FinLattice,
    LawsonDual, OrderError, Preserve,
};

/// Largest base on which subsets are enumerated for the limit and colimit
/// axioms. Larger bases only run the max/min reductions.
pub const SUBSET_BASE_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SheafError {
    #[error("invalid presheaf: {0}")]
    InvalidPresheaf(String),
    #[error("invalid representation map: {0}")]
    InvalidRepMap(String),
    #[error("presheaf is not soft: restriction from top to {0} is not surjective")]
    NotSoft(usize),
    #[error("global comparison map is not an isomorphism")]
    PhiNotIso,
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

pub type Result<T> = std::result::Result<T, SheafError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    base: FinLattice,
    objects: Vec<FinAlgebra>,
    /// `res[q * n + p]` is the map `F(q) → F(p)` when `p ≤ q`, else empty.
    res: Vec<Vec<usize>>,
}

impl Presheaf {
    /// Builds a presheaf from maps on covers. Each entry `(p, q, map)` with
    /// `p ⋖ q` gives `F(q) → F(p)`. Composites along different cover paths
    /// must agree.
    pub fn new(
        base: FinLattice,
        objects: Vec<FinAlgebra>,
        covers: Vec<(usize, usize, Vec<usize>)>,
    ) -> Result<Self> {
        let n = base.n();
        let bad = |m: String| SheafError::InvalidPresheaf(m);
        if objects.len() != n {
            return Err(bad(format!("{} objects for a base of {n}", objects.len())));
        }
        if let Some(p) = objects.iter().position(|o| o.sig() != objects[0].sig()) {
            return Err(bad(format!("object at {p} has a different signature")));
        }
        let mut cover_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (p, q, map) in covers {
            Homomorphism::new(objects[q].clone(), objects[p].clone(), map.clone())
                .map_err(|e| bad(format!("restriction {q}→{p}: {e}")))?;
            cover_map.insert((p, q), map);
        }
        let covers = base.poset().covers();
        for &(p, q) in &covers {
            if !cover_map.contains_key(&(p, q)) {
                return Err(bad(format!("missing restriction for cover {p}⋖{q}")));
            }
        }
        if let Some(&(p, q)) = cover_map.keys().find(|k| !covers.contains(k)) {
            return Err(bad(format!("{p}⋖{q} is not a cover")));
        }
        let mut res = vec![Vec::new(); n * n];
        let mut order = base.poset().linear_extension();
        order.reverse();
        for &p in &order {
            res[p * n + p] = (0..objects[p].n()).collect();
            for q in members(base.up(p) & !bit(p)) {
                let mut found: Option<Vec<usize>> = None;
                for &(c, r) in covers.iter().filter(|&&(c, r)| c == p && base.leq(r, q)) {
                    let upper = &res[q * n + r];
                    let step = &cover_map[&(c, r)];
                    let cand: Vec<usize> = upper.iter().map(|&x| step[x]).collect();
                    match &found {
                        None => found = Some(cand),
                        Some(f) if *f != cand => {
                            return Err(bad(format!("restrictions {q}→{p} differ along cover paths")))
                        }
                        _ => {}
                    }
                }
                res[q * n + p] = found.expect("some cover above p lies below q");
            }
        }
        Ok(Presheaf { base, objects, res })
    }

    /// Builds a presheaf from a restriction function on all pairs `p ≤ q`.
    pub fn from_fn(
        base: FinLattice,
        objects: Vec<FinAlgebra>,
        res: impl Fn(usize, usize) -> Vec<usize>,
    ) -> Result<Self> {
        let covers = base.poset().covers().into_iter().map(|(p, q)| (p, q, res(q, p))).collect();
        Self::new(base, objects, covers)
    }

    pub fn constant(base: FinLattice, a: &FinAlgebra) -> Self {
        let objects = vec![a.clone(); base.n()];
        Self::from_fn(base, objects, |_, _| (0..a.n()).collect()).expect("constant presheaf")
    }

    pub fn base(&self) -> &FinLattice {
        &self.base
    }

    pub fn object(&self, p: usize) -> &FinAlgebra {
        &self.objects[p]
    }

    pub fn objects(&self) -> &[FinAlgebra] {
        &self.objects
    }

    /// The map `F(q) → F(p)` for `p ≤ q`.
    pub fn res_map(&self, q: usize, p: usize) -> &[usize] {
        let m = &self.res[q * self.base.n() + p];
        assert!(self.base.leq(p, q), "restriction needs {p} ≤ {q}");
        m
    }

    pub fn restriction(&self, q: usize, p: usize) -> Homomorphism {
        Homomorphism {
            dom: self.objects[q].clone(),
            cod: self.objects[p].clone(),
            map: self.res_map(q, p).to_vec(),
        }
    }

    /// Moves the presheaf along an order isomorphism `iso: base → new_base`.
    pub fn transport(&self, new_base: FinLattice, iso: &[usize]) -> Result<Presheaf> {
        let n = self.base.n();
        let mut inv = vec![0; n];
        for (p, &q) in iso.iter().enumerate() {
            inv[q] = p;
        }
        let objects = (0..n).map(|q| self.objects[inv[q]].clone()).collect();
        Presheaf::from_fn(new_base, objects, |q, p| self.res_map(inv[q], inv[p]).to_vec())
    }
}

fn is_surjective_map(map: &[usize], cod: usize) -> bool {
    let mut hit = vec![false; cod];
    for &v in map {
        hit[v] = true;
    }
    hit.into_iter().all(|h| h)
}

fn is_injective_map(map: &[usize], cod: usize) -> bool {
    let mut hit = vec![false; cod];
    map.iter().all(|&v| !std::mem::replace(&mut hit[v], true))
}

/// Counts the compatible families over `s`: tuples `(a_y)` with
/// `F(y → z)(a_y) = a_z` whenever `z ≤ y` in `s`.
fn count_families(f: &Presheaf, s: u64) -> usize {
    let mut order: Vec<usize> = members(s).collect();
    order.sort_by_key(|&y| std::cmp::Reverse(f.base.down(y).count_ones()));
    let mut chosen = vec![usize::MAX; f.base.n()];
    fn go(f: &Presheaf, order: &[usize], i: usize, chosen: &mut Vec<usize>) -> usize {
        if i == order.len() {
            return 1;
        }
        let y = order[i];
        // An element above `y` already chosen forces the value at `y`.
        let forced = order[..i].iter().find(|&&z| f.base.leq(y, z)).map(|&z| f.res_map(z, y)[chosen[z]]);
        let candidates: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => (0..f.objects[y].n()).collect(),
        };
        let mut total = 0;
        for v in candidates {
            let ok = order[..i].iter().all(|&z| !f.base.leq(y, z) || f.res_map(z, y)[chosen[z]] == v);
            if ok {
                chosen[y] = v;
                total += go(f, order, i + 1, chosen);
            }
        }
        chosen[y] = usize::MAX;
        total
    }
    go(f, &order, 0, &mut chosen)
}

/// Is the cone `(F(apex → y))_{y ∈ s}` a limit of `F` restricted to `s`?
/// In a variety the limit is the algebra of compatible families, so this
/// checks that the cone map is a bijection onto them.
pub fn cone_is_limit(f: &Presheaf, s: u64, apex: usize) -> bool {
    let ys: Vec<usize> = members(s).collect();
    assert!(ys.iter().all(|&y| f.base.leq(y, apex)));
    let mut seen = std::collections::HashSet::new();
    for a in 0..f.objects[apex].n() {
        let fam: Vec<usize> = ys.iter().map(|&y| f.res_map(apex, y)[a]).collect();
        if !seen.insert(fam) {
            return false;
        }
    }
    seen.len() == count_families(f, s)
}

/// Quotients and hom-sets reused across universal-property searches.
#[derive(Default)]
pub struct CoconeCache {
    quotients: HashMap<FinAlgebra, Vec<FinAlgebra>>,
    homs: HashMap<(FinAlgebra, FinAlgebra), Vec<Vec<usize>>>,
}

impl CoconeCache {
    fn quotients(&mut self, a: &FinAlgebra) -> Vec<FinAlgebra> {
        self.quotients
            .entry(a.clone())
            .or_insert_with(|| match congruence_lattice(a) {
                Ok(c) => c.congruences.iter().map(|t| quotient(a, t).0).collect(),
                Err(_) => vec![a.clone()],
            })
            .clone()
    }

    fn homs(&mut self, a: &FinAlgebra, b: &FinAlgebra) -> Vec<Vec<usize>> {
        self.homs.entry((a.clone(), b.clone())).or_insert_with(|| all_homomorphisms(a, b)).clone()
    }

    /// Candidate cocone targets: the objects in the diagram and their quotients.
    fn targets(&mut self, f: &Presheaf, s: u64) -> Vec<FinAlgebra> {
        let mut out: Vec<FinAlgebra> = Vec::new();
        for y in members(s) {
            for q in self.quotients(&f.objects[y]) {
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
        out
    }
}

/// Checks by search that the cocone `(F(y → apex))_{y ∈ s}` is a colimit
/// against every cocone into the bounded target family. Returns the number
/// of cocones examined, or a description of the first failure.
pub fn verify_colimit(f: &Presheaf, s: u64, apex: usize) -> std::result::Result<usize, String> {
    verify_colimit_cached(f, s, apex, &mut CoconeCache::default())
}

pub fn verify_colimit_cached(
    f: &Presheaf,
    s: u64,
    apex: usize,
    cache: &mut CoconeCache,
) -> std::result::Result<usize, String> {
    let mut ys: Vec<usize> = members(s).collect();
    ys.sort_by_key(|&y| (f.base.down(y).count_ones(), y));
    if !ys.iter().all(|&y| f.base.leq(apex, y)) {
        return Err(format!("{apex} is not below {}", format_set(s)));
    }
    let mut examined = 0;
    for t in cache.targets(f, s) {
        let homs: HashMap<usize, Vec<Vec<usize>>> =
            ys.iter().map(|&y| (y, cache.homs(&f.objects[y], &t))).collect();
        let apex_homs = cache.homs(&f.objects[apex], &t);
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
        while let Some((i, picks)) = stack.pop() {
            if i == ys.len() {
                examined += 1;
                let mediating = apex_homs
                    .iter()
                    .filter(|u| {
                        ys.iter().zip(&picks).all(|(&y, &h)| {
                            let hy = &homs[&y][h];
                            f.res_map(y, apex).iter().enumerate().all(|(a, &b)| u[b] == hy[a])
                        })
                    })
                    .count();
                if mediating != 1 {
                    return Err(format!(
                        "cocone over {} into a {}-element target has {mediating} mediating maps",
                        format_set(s),
                        t.n()
                    ));
                }
                continue;
            }
            let y = ys[i];
            for (h, hy) in homs[&y].iter().enumerate() {
                // Compatibility with components already chosen below `y`.
                let ok = ys[..i].iter().zip(&picks).all(|(&x, &hx)| {
                    !f.base.leq(x, y)
                        || f.res_map(y, x).iter().enumerate().all(|(a, &b)| homs[&x][hx][b] == hy[a])
                });
                if ok {
                    let mut next = picks.clone();
                    next.push(h);
                    stack.push((i + 1, next));
                }
            }
        }
    }
    Ok(examined)
}

/// The axiom flags of a presheaf, with the first counterexample of each
/// failed axiom.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SheafReport {
    pub k1: bool,
    pub k2: bool,
    pub k3: bool,
    pub k4: bool,
    pub o1: bool,
    pub o2: bool,
    pub o3: bool,
    pub soft: bool,
    pub global_iso: Option<bool>,
    /// Every restriction out of the top is surjective.
    pub soft_top: bool,
    /// Every restriction is surjective.
    pub soft_pairwise: bool,
    /// Cones over non-empty meet-closed subsets are limits.
    pub meet_closed_limits: bool,
    /// `F(⊤)` maps onto the colimit over each Scott-open filter.
    pub omega_soft: bool,
    /// Subsets of the base were enumerated, not only the max/min reductions.
    pub subsets_enumerated: bool,
    pub distributive_base: bool,
    /// Every K4 square had surjective sides, so the quotient criterion applied.
    pub k4_by_quotients: bool,
    pub counterexamples: Vec<(String, String)>,
}

impl SheafReport {
    pub fn is_k_sheaf(&self) -> bool {
        self.k1 && self.k2 && self.k3
    }

    pub fn is_omega_sheaf(&self) -> bool {
        self.o1 && self.o2 && self.o3
    }

    /// Internal agreements that must hold for every presheaf. The
    /// meet-closed limit form is only compared on distributive bases: on
    /// `M3` a presheaf can satisfy Ω2 and Ω3 while the cone over the atoms
    /// and `⊥` fails to be a limit.
    pub fn consistency_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.soft_top != self.soft_pairwise {
            out.push("the two softness formulations disagree".to_string());
        }
        if self.subsets_enumerated
            && self.distributive_base
            && (self.o2 && self.o3) != self.meet_closed_limits
        {
            out.push("pullback + directed limits disagrees with meet-closed limits".to_string());
        }
        if self.k1 != self.o1 || self.k2 != self.o2 {
            out.push("K1/K2 disagree with Ω1/Ω2".to_string());
        }
        out
    }

    fn fail(&mut self, axiom: &str, msg: String) {
        if !self.counterexamples.iter().any(|(a, _)| a == axiom) {
            self.counterexamples.push((axiom.to_string(), msg));
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AxiomOptions {
    pub subset_cap: usize,
    /// Also verify K3 colimits by bounded cocone search.
    pub literal_colimits: bool,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions { subset_cap: SUBSET_BASE_CAP, literal_colimits: false }
    }
}

pub fn axiom_report(f: &Presheaf) -> SheafReport {
    axiom_report_with(f, AxiomOptions::default())
}

/// Is the square at `p, q` a pushout? Returns `(holds, by_quotients)`.
fn square_is_pushout(f: &Presheaf, p: usize, q: usize, cache: &mut CoconeCache) -> (bool, bool) {
    let l = &f.base;
    let (top, bot) = (l.join(p, q), l.meet(p, q));
    let r1 = f.restriction(top, p);
    let r2 = f.restriction(top, q);
    let s1 = f.res_map(p, bot);
    let s2 = f.res_map(q, bot);
    let diag = f.restriction(top, bot);
    let nb = f.objects[bot].n();
    if r1.is_surjective() && r2.is_surjective() && is_surjective_map(s1, nb) && is_surjective_map(s2, nb) {
        let j = congruence_join(&f.objects[top], &kernel_congruence(&r1), &kernel_congruence(&r2));
        return (kernel_congruence(&diag) == j, true);
    }
    let s = bit(top) | bit(p) | bit(q) | bit(bot);
    let (fp, fq, fb) = (&f.objects[p], &f.objects[q], &f.objects[bot]);
    for t in cache.targets(f, s) {
        let up = cache.homs(fp, &t);
        let vq = cache.homs(fq, &t);
        let wb = cache.homs(fb, &t);
        for u in &up {
            for v in &vq {
                let commutes = (0..f.objects[top].n()).all(|a| u[r1.map[a]] == v[r2.map[a]]);
                if !commutes {
                    continue;
                }
                let mediating = wb
                    .iter()
                    .filter(|w| (0..fp.n()).all(|a| w[s1[a]] == u[a]) && (0..fq.n()).all(|a| w[s2[a]] == v[a]))
                    .count();
                if mediating != 1 {
                    return (false, false);
                }
            }
        }
    }
    (true, false)
}

pub fn axiom_report_with(f: &Presheaf, opts: AxiomOptions) -> SheafReport {
    let l = &f.base;
    let n = l.n();
    let mut cache = CoconeCache::default();
    let mut r = SheafReport {
        k4_by_quotients: true,
        distributive_base: l.is_distributive(),
        ..Default::default()
    };

    r.k1 = f.objects[l.bot()].n() <= 1;
    if !r.k1 {
        r.fail("K1", format!("F(⊥) has {} elements", f.objects[l.bot()].n()));
    }
    r.o1 = r.k1;

    r.k2 = true;
    r.k4 = true;
    for p in 0..n {
        for q in p..n {
            let (top, bot) = (l.join(p, q), l.meet(p, q));
            // The pullback of F(p) → F(p∧q) ← F(q) is the set of compatible families.
            let iso = cone_is_limit(f, bit(p) | bit(q) | bit(bot), top);
            if !iso && r.k2 {
                r.k2 = false;
                r.fail("K2", format!("square at p={p}, q={q} is not a pullback"));
            }
            let (po, by_q) = square_is_pushout(f, p, q, &mut cache);
            r.k4_by_quotients &= by_q;
            if !po && r.k4 {
                r.k4 = false;
                r.fail("K4", format!("square at p={p}, q={q} is not a pushout"));
            }
        }
    }
    r.o2 = r.k2;

    r.soft_top = (0..n).all(|p| is_surjective_map(f.res_map(l.top(), p), f.objects[p].n()));
    r.soft_pairwise = (0..n)
        .all(|p| members(l.up(p)).all(|q| is_surjective_map(f.res_map(q, p), f.objects[p].n())));
    r.soft = r.soft_top && r.soft_pairwise;
    if !r.soft_top {
        let p = (0..n).find(|&p| !is_surjective_map(f.res_map(l.top(), p), f.objects[p].n())).unwrap();
        r.fail("soft", format!("F(⊤) → F({p}) is not surjective"));
    }

    r.k3 = true;
    r.o3 = true;
    r.meet_closed_limits = true;
    r.subsets_enumerated = n <= opts.subset_cap;
    if r.subsets_enumerated {
        for s in 1..=l.full() {
            let poset = l.poset();
            if poset.is_codirected(s) {
                match poset.min_of(s) {
                    Some(m) if m == l.inf(s) => {
                        if opts.literal_colimits {
                            if let Err(e) = verify_colimit_cached(f, s, m, &mut cache) {
                                r.k3 = false;
                                r.fail("K3", e);
                            }
                        }
                    }
                    _ => {
                        r.k3 = false;
                        r.fail("K3", format!("codirected {} lacks its infimum", format_set(s)));
                    }
                }
            }
            if poset.is_directed(s) && !cone_is_limit(f, s, l.sup(s)) {
                r.o3 = false;
                r.fail("Ω3", format!("cone over directed {} is not a limit", format_set(s)));
            }
            let meet_closed = members(s).all(|a| members(s).all(|b| s & bit(l.meet(a, b)) != 0));
            if meet_closed && !cone_is_limit(f, s, l.sup(s)) {
                r.meet_closed_limits = false;
                r.fail("meet-closed", format!("cone over {} is not a limit", format_set(s)));
            }
        }
    }

    r.omega_soft = scott_open_filters(l).iter().all(|k| match l.poset().min_of(k.members) {
        Some(m) => is_surjective_map(f.res_map(l.top(), m), f.objects[m].n()),
        None => false,
    });
    r
}

/// A congruence-valued map on a lattice, read contravariantly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepMap {
    pub base: FinLattice,
    pub algebra: FinAlgebra,
    pub theta: Vec<Congruence>,
}

impl RepMap {
    pub fn new(base: FinLattice, algebra: FinAlgebra, theta: Vec<Congruence>) -> Result<Self> {
        let bad = |m: String| SheafError::InvalidRepMap(m);
        if theta.len() != base.n() {
            return Err(bad(format!("{} congruences for a base of {}", theta.len(), base.n())));
        }
        for (p, t) in theta.iter().enumerate() {
            if t.n() != algebra.n() {
                return Err(bad(format!("congruence at {p} has the wrong carrier")));
            }
            t.compatible_with(&algebra).map_err(|op| bad(format!("θ({p}) is not compatible with {op}")))?;
        }
        for p in 0..base.n() {
            for q in members(base.up(p)) {
                if !theta[q].le(&theta[p]) {
                    return Err(bad(format!("{p} ≤ {q} but θ({q}) ⊄ θ({p})")));
                }
            }
        }
        Ok(RepMap { base, algebra, theta })
    }

    pub fn pointwise_le(&self, other: &RepMap) -> bool {
        self.theta.iter().zip(&other.theta).all(|(a, b)| a.le(b))
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> =
            self.theta.iter().enumerate().map(|(p, t)| format!("{p}↦{}", t.display())).collect();
        parts.join(" ")
    }
}

/// `p ↦ A/θ(p)` with the induced maps between quotients.
pub fn gamma_star(h: &RepMap) -> Presheaf {
    let quotients: Vec<(FinAlgebra, Homomorphism)> =
        h.theta.iter().map(|t| quotient(&h.algebra, t)).collect();
    let objects = quotients.iter().map(|(q, _)| q.clone()).collect();
    Presheaf::from_fn(h.base.clone(), objects, |q, p| {
        factor_through(&quotients[q].1, &quotients[p].1).expect("θ(q) ⊆ θ(p)").map
    })
    .expect("quotient maps compose")
}

/// The projection `A → A/θ(⊤) = γ∗H(⊤)`.
pub fn canonical_phi(h: &RepMap) -> Homomorphism {
    quotient(&h.algebra, &h.theta[h.base.top()]).1
}

/// Recovers `θ(p) = ker(F(⊤ → p) ∘ φ)` from a soft presheaf, with the
/// isomorphisms `A/θ(p) → F(p)` witnessing `γ∗H_F ≅ F`.
pub fn extract_h(f: &Presheaf, phi: &Homomorphism) -> Result<(RepMap, Vec<Homomorphism>)> {
    let l = &f.base;
    if phi.cod != f.objects[l.top()] || !phi.is_iso() {
        return Err(SheafError::PhiNotIso);
    }
    if let Some(p) = (0..l.n()).find(|&p| !f.restriction(l.top(), p).is_surjective()) {
        return Err(SheafError::NotSoft(p));
    }
    let mut theta = Vec::new();
    let mut witness = Vec::new();
    for p in 0..l.n() {
        let hp = phi.then(&f.restriction(l.top(), p));
        let t = kernel_congruence(&hp);
        let (_, proj) = quotient(&phi.dom, &t);
        let w = factor_through(&proj, &hp).expect("kernel factorisation");
        if !w.is_iso() {
            return Err(SheafError::Inconsistent(format!("A/θ({p}) → F({p}) is not bijective")));
        }
        theta.push(t);
        witness.push(w);
    }
    let h = RepMap::new(l.clone(), phi.dom.clone(), theta)?;
    let g = gamma_star(&h);
    for p in 0..l.n() {
        for q in members(l.up(p)) {
            let lhs: Vec<usize> = g.res_map(q, p).iter().map(|&x| witness[p].map[x]).collect();
            let rhs: Vec<usize> = witness[q].map.iter().map(|&x| f.res_map(q, p)[x]).collect();
            if lhs != rhs {
                return Err(SheafError::Inconsistent(format!("witness is not natural at {p} ≤ {q}")));
            }
        }
    }
    Ok((h, witness))
}

/// The order-theoretic conditions on `H` next to the presheaf properties of
/// `γ∗H` that each one is equivalent to.
#[derive(Clone, Debug)]
pub struct RepCondition {
    pub empty_inf: bool,
    pub binary_inf: bool,
    pub binary_sup: bool,
    pub directed_sup: bool,
    pub commuting: bool,
    pub top: bool,
    /// Finite infima, non-empty suprema and commuting image.
    pub sheaf_condition: bool,
    /// Finite infima, arbitrary suprema and commuting image.
    pub soft_condition: bool,
    pub presheaf: SheafReport,
    pub product_injective: bool,
    pub top_iso: bool,
    pub inconsistencies: Vec<String>,
}

impl RepCondition {
    pub fn consistent(&self) -> bool {
        self.inconsistencies.is_empty()
    }
}

pub fn rep_condition(h: &RepMap) -> RepCondition {
    let l = &h.base;
    let a = &h.algebra;
    let n = l.n();
    let th = &h.theta;
    let empty_inf = th[l.bot()].is_all();
    let top = th[l.top()].is_diagonal();
    let mut binary_inf = true;
    let mut binary_sup = true;
    let mut commuting = true;
    for p in 0..n {
        for q in 0..n {
            binary_inf &= th[l.join(p, q)] == th[p].meet(&th[q]);
            binary_sup &= th[l.meet(p, q)] == congruence_join(a, &th[p], &th[q]);
            commuting &= commute(&th[p], &th[q]).expect("same carrier");
        }
    }
    let mut directed_sup = true;
    if n <= SUBSET_BASE_CAP {
        for s in 1..=l.full() {
            if l.poset().is_codirected(s) {
                let sup = members(s).fold(th[members(s).next().unwrap()].clone(), |acc, p| {
                    congruence_join(a, &acc, &th[p])
                });
                directed_sup &= th[l.inf(s)] == sup;
            }
        }
    }
    let f = gamma_star(h);
    let presheaf = axiom_report(&f);
    let mut product_injective = true;
    for p in 0..n {
        for q in 0..n {
            let j = l.join(p, q);
            let (rp, rq) = (f.res_map(j, p), f.res_map(j, q));
            let pairs: Vec<usize> = (0..f.objects[j].n()).map(|x| rp[x] * f.objects[q].n() + rq[x]).collect();
            product_injective &= is_injective_map(&pairs, f.objects[p].n() * f.objects[q].n());
        }
    }
    let top_iso = canonical_phi(h).is_iso();
    let sheaf_condition = empty_inf && binary_inf && binary_sup && directed_sup && commuting;
    let soft_condition = sheaf_condition && top;
    let mut inconsistencies = presheaf.consistency_failures();
    let mut pair = |name: &str, x: bool, y: bool| {
        if x != y {
            inconsistencies.push(format!("{name}: map says {x}, presheaf says {y}"));
        }
    };
    pair("empty infimum vs K1", empty_inf, presheaf.k1);
    pair("binary infima vs injective product map", binary_inf, product_injective);
    pair("binary suprema vs K4", binary_sup, presheaf.k4);
    pair("directed suprema vs K3", directed_sup, presheaf.k3);
    pair("top vs global iso", top, top_iso);
    pair("softness", true, presheaf.soft);
    RepCondition {
        empty_inf,
        binary_inf,
        binary_sup,
        directed_sup,
        commuting,
        top,
        sheaf_condition,
        soft_condition,
        presheaf,
        product_injective,
        top_iso,
        inconsistencies,
    }
}

/// Every contravariant monotone congruence-valued map on `p`.
pub fn all_rep_maps(a: &FinAlgebra, p: &FinLattice, con: &ConLattice, flags: Preserve) -> Vec<RepMap> {
    enumerate_monotone_maps(p, &con.lattice, flags, true)
        .into_iter()
        .map(|m| RepMap {
            base: p.clone(),
            algebra: a.clone(),
            theta: m.val.iter().map(|&i| con.congruences[i].clone()).collect(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SoftReps {
    pub con: ConLattice,
    pub reps: Vec<RepMap>,
    /// `order[i][j]` iff `reps[i] ≤ reps[j]` pointwise.
    pub order: Vec<Vec<bool>>,
}

/// The maps preserving finite infima and arbitrary suprema whose images
/// consist of pairwise commuting congruences, in lexicographic order.
pub fn enumerate_soft_reps(a: &FinAlgebra, p: &FinLattice) -> Result<SoftReps> {
    let con = congruence_lattice(a)?;
    let reps: Vec<RepMap> = all_rep_maps(a, p, &con, Preserve::FRAME)
        .into_iter()
        .filter(|h| {
            h.theta.iter().all(|x| h.theta.iter().all(|y| commute(x, y).expect("same carrier")))
        })
        .collect();
    let order = reps.iter().map(|x| reps.iter().map(|y| x.pointwise_le(y)).collect()).collect();
    Ok(SoftReps { con, reps, order })
}

/// Searches for a morphism of representations `(γ∗H, H(⊤)) → (γ∗J, J(⊤))`:
/// a natural transformation whose top component commutes with the global
/// maps out of `A`.
pub fn representation_morphism(h: &RepMap, j: &RepMap) -> Option<Vec<Vec<usize>>> {
    let (fh, fj) = (gamma_star(h), gamma_star(j));
    let l = &h.base;
    let n = l.n();
    let (ph, pj) = (canonical_phi(h), canonical_phi(j));
    let homs: Vec<Vec<Vec<usize>>> =
        (0..n).map(|p| all_homomorphisms(&fh.objects[p], &fj.objects[p])).collect();
    let mut order = l.poset().linear_extension();
    order.reverse();
    let mut picks = vec![usize::MAX; n];
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        order: &[usize],
        l: &FinLattice,
        homs: &[Vec<Vec<usize>>],
        fh: &Presheaf,
        fj: &Presheaf,
        ph: &Homomorphism,
        pj: &Homomorphism,
        picks: &mut Vec<usize>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let p = order[i];
        for (k, d) in homs[p].iter().enumerate() {
            if p == l.top() && (0..ph.dom.n()).any(|a| d[ph.map[a]] != pj.map[a]) {
                continue;
            }
            let natural = order[..i].iter().all(|&q| {
                !l.leq(p, q) || {
                    let dq = &homs[q][picks[q]];
                    (0..fh.objects[q].n()).all(|x| d[fh.res_map(q, p)[x]] == fj.res_map(q, p)[dq[x]])
                }
            });
            if natural {
                picks[p] = k;
                if go(i + 1, order, l, homs, fh, fj, ph, pj, picks) {
                    return true;
                }
            }
        }
        false
    }
    if go(0, &order, l, &homs, &fh, &fj, &ph, &pj, &mut picks) {
        Some((0..n).map(|p| homs[p][picks[p]].clone()).collect())
    } else {
        None
    }
}

/// What the Kan operations established about the finite collapse.
#[derive(Clone, Debug, Default)]
pub struct KanCertificate {
    /// Each filter had a least element, each `{k : x ∈ k}` a least filter.
    pub collapse: bool,
    /// (Co)limits confirmed by universal-property search or family counting.
    pub verified: usize,
    pub cocones_examined: usize,
    pub failures: Vec<String>,
}

/// `k ↦ colim_{x ∈ k} G(x)` over the Scott-open filters of the base of `g`,
/// as a presheaf on `σFilt(L)^op`. Each colimit is the value at the least
/// element of `k`, confirmed by cocone search.
pub fn kan_transfer(g: &Presheaf) -> Result<(Presheaf, LawsonDual, KanCertificate)> {
    let l = &g.base;
    let dual = lawson_dual(l)?;
    let mut cert = KanCertificate { collapse: true, ..Default::default() };
    let mut cache = CoconeCache::default();
    let mut least = Vec::new();
    for k in &dual.filters {
        match l.poset().min_of(k.members) {
            Some(m) => {
                match verify_colimit_cached(g, k.members, m, &mut cache) {
                    Ok(c) => {
                        cert.verified += 1;
                        cert.cocones_examined += c;
                    }
                    Err(e) => cert.failures.push(e),
                }
                least.push(m);
            }
            None => {
                cert.collapse = false;
                return Err(SheafError::Inconsistent(format!(
                    "filter {} has no least element",
                    format_set(k.members)
                )));
            }
        }
    }
    let base = dual.lattice.opposite();
    let objects = least.iter().map(|&m| g.objects[m].clone()).collect();
    // In σFilt(L)^op, i ≤ j means k_j ⊆ k_i, so the least element of k_i
    // lies below that of k_j.
    let f = Presheaf::from_fn(base, objects, |j, i| g.res_map(least[j], least[i]).to_vec())?;
    Ok((f, dual, cert))
}

/// `x ↦ lim_{k ∋ x} F(k)` for a presheaf `F` on `σFilt(L)^op`, as a
/// presheaf on `L`. Each limit is the value at `↑x`, confirmed by counting
/// compatible families.
pub fn kan_restrict(f: &Presheaf, l: &FinLattice, dual: &LawsonDual) -> Result<(Presheaf, KanCertificate)> {
    let d = &f.base;
    let mut cert = KanCertificate { collapse: true, ..Default::default() };
    let mut apex = Vec::new();
    for x in 0..l.n() {
        let ux = dual.filters.iter().enumerate().filter(|(_, k)| k.contains(x)).fold(0u64, |m, (i, _)| m | bit(i));
        // The least filter under inclusion is the greatest element in σFilt^op.
        let top = d.poset().max_of(ux).ok_or_else(|| {
            SheafError::Inconsistent(format!("filters containing {x} have no least member"))
        })?;
        if dual.filters[top].members != l.up(x) {
            cert.collapse = false;
        }
        if cone_is_limit(f, ux, top) {
            cert.verified += 1;
        } else {
            cert.failures.push(format!("limit over filters containing {x} is not F(↑{x})"));
        }
        apex.push(top);
    }
    let objects = apex.iter().map(|&k| f.objects[k].clone()).collect();
    let g = Presheaf::from_fn(l.clone(), objects, |y, x| f.res_map(apex[y], apex[x]).to_vec())?;
    Ok((g, cert))
}

/// One clause of the main verification, with its first counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug)]
pub struct MainReport {
    pub monotone_maps: usize,
    pub k_sheaves: usize,
    pub soft_reps: usize,
    pub ordered_pairs: usize,
    pub clauses: Vec<Clause>,
}

impl MainReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

struct PerMap {
    sheaf_condition_ok: Option<String>,
    soft_condition_ok: Option<String>,
    soft_ok: Option<String>,
    k_sheaf: bool,
    in_n: bool,
}

fn first<T>(items: impl IntoIterator<Item = Option<T>>) -> Option<T> {
    items.into_iter().flatten().next()
}

/// Exhaustive check, over every monotone `H: P^op → Con(A)`, of:
/// 1. `γ∗H` is a K-sheaf iff `H` preserves finite infima and non-empty
///    suprema with commuting image;
/// 2. the same with `θ(⊤) = Δ` iff arbitrary suprema are preserved too;
/// 3. on the soft representations, `extract_h ∘ gamma_star` is the identity
///    and pointwise order matches the existence of morphisms;
/// 4. the two softness formulations agree;
/// 5. each soft K-sheaf, moved to `σFilt(P)^op` and restricted back along
///    the Kan formulas, is a soft Ω-sheaf and the round trip is the identity.
pub fn verify_main_theorems(a: &FinAlgebra, p: &FinLattice) -> Result<MainReport> {
    let con = congruence_lattice(a)?;
    let all = all_rep_maps(a, p, &con, Preserve::NONE);
    let per: Vec<PerMap> = all
        .par_iter()
        .map(|h| {
            let rc = rep_condition(h);
            let ks = rc.presheaf.is_k_sheaf();
            let tag = || h.describe();
            PerMap {
                sheaf_condition_ok: (ks != rc.sheaf_condition || !rc.consistent())
                    .then(|| format!("{}: K-sheaf={ks}, condition={} {:?}", tag(), rc.sheaf_condition, rc.inconsistencies)),
                soft_condition_ok: ((ks && rc.top_iso) != rc.soft_condition)
                    .then(|| format!("{}: K-sheaf with iso={}, condition={}", tag(), ks && rc.top_iso, rc.soft_condition)),
                soft_ok: (rc.presheaf.soft_top != rc.presheaf.soft_pairwise).then(tag),
                k_sheaf: ks,
                in_n: rc.soft_condition,
            }
        })
        .collect();

    let mut clauses = Vec::new();
    clauses.push(clause("sheaf-condition", first(per.iter().map(|m| m.sheaf_condition_ok.clone()))));
    clauses.push(clause("soft-condition", first(per.iter().map(|m| m.soft_condition_ok.clone()))));

    let n_set: Vec<&RepMap> = all.iter().zip(&per).filter(|(_, m)| m.in_n).map(|(h, _)| h).collect();
    let soft = enumerate_soft_reps(a, p)?;
    let mut bijection = None;
    if soft.reps.len() != n_set.len() || soft.reps.iter().zip(&n_set).any(|(x, y)| x != *y) {
        bijection = Some(format!(
            "{} maps satisfy the condition but the preserving enumeration found {}",
            n_set.len(),
            soft.reps.len()
        ));
    }
    let round_trip = first(soft.reps.par_iter().map(|h| {
        let f = gamma_star(h);
        match extract_h(&f, &canonical_phi(h)) {
            Ok((back, _)) if back == *h => None,
            Ok((back, _)) => Some(format!("{} came back as {}", h.describe(), back.describe())),
            Err(e) => Some(format!("{}: {e}", h.describe())),
        }
    }).collect::<Vec<_>>());
    let idx: Vec<(usize, usize)> =
        (0..soft.reps.len()).flat_map(|i| (0..soft.reps.len()).map(move |j| (i, j))).collect();
    let ordered_pairs = idx.iter().filter(|&&(i, j)| soft.order[i][j]).count();
    let morphisms = first(idx.par_iter().map(|&(i, j)| {
        let exists = representation_morphism(&soft.reps[i], &soft.reps[j]).is_some();
        (exists != soft.order[i][j]).then(|| {
            format!(
                "{} vs {}: pointwise ≤ is {}, morphism exists is {exists}",
                soft.reps[i].describe(),
                soft.reps[j].describe(),
                soft.order[i][j]
            )
        })
    }).collect::<Vec<_>>());
    clauses.push(clause("round-trip", first([bijection, round_trip, morphisms])));
    clauses.push(clause("softness", first(per.iter().map(|m| m.soft_ok.clone()))));

    let dual = lawson_dual(p)?;
    let d_base = dual.lattice.opposite();
    let omega = first(soft.reps.par_iter().map(|h| omega_side(h, p, &dual, &d_base).err()).collect::<Vec<_>>());
    clauses.push(clause("omega-side", omega));

    Ok(MainReport {
        monotone_maps: all.len(),
        k_sheaves: per.iter().filter(|m| m.k_sheaf).count(),
        soft_reps: soft.reps.len(),
        ordered_pairs,
        clauses,
    })
}

fn clause(name: &'static str, counterexample: Option<String>) -> Clause {
    Clause { name, pass: counterexample.is_none(), counterexample }
}

/// Moves `γ∗H` to `σFilt(P)^op` along `p ↦ ↑p`, restricts it back to `P`
/// and checks the Ω-sheaf axioms, Ω-softness and both round trips.
fn omega_side(h: &RepMap, p: &FinLattice, dual: &LawsonDual, d_base: &FinLattice) -> std::result::Result<(), String> {
    let tag = h.describe();
    let f = gamma_star(h);
    let k_side = f.transport(d_base.clone(), &dual.of_element).map_err(|e| format!("{tag}: {e}"))?;
    let (g, cert) = kan_restrict(&k_side, p, dual).map_err(|e| format!("{tag}: {e}"))?;
    if !cert.collapse || !cert.failures.is_empty() {
        return Err(format!("{tag}: limit collapse failed {:?}", cert.failures));
    }
    let r = axiom_report(&g);
    if !(r.is_omega_sheaf() && r.soft && r.omega_soft) {
        return Err(format!("{tag}: restricted presheaf fails Ω axioms {:?}", r.counterexamples));
    }
    if g != f {
        return Err(format!("{tag}: restriction does not return γ∗H"));
    }
    let (back, _, cert) = kan_transfer(&g).map_err(|e| format!("{tag}: {e}"))?;
    if !cert.collapse || !cert.failures.is_empty() {
        return Err(format!("{tag}: colimit collapse failed {:?}", cert.failures));
    }
    if back != k_side {
        return Err(format!("{tag}: transfer does not return the K-side presheaf"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finalg::{chain_semilattice, cyclic_group};

    fn set3_pair() -> (Congruence, Congruence) {
        (
            Congruence::from_blocks(3, &[&[0, 1], &[2]]),
            Congruence::from_blocks(3, &[&[0], &[1, 2]]),
        )
    }

    #[test]
    fn constant_one_element_presheaf_passes_everything() {
        let f = Presheaf::constant(FinLattice::boolean(2), &FinAlgebra::set(1));
        let r = axiom_report_with(&f, AxiomOptions { literal_colimits: true, ..Default::default() });
        assert!(r.is_k_sheaf() && r.k4 && r.is_omega_sheaf() && r.soft && r.meet_closed_limits);
        assert!(r.consistency_failures().is_empty());
    }

    #[test]
    fn diagonal_everywhere_is_constant() {
        let a = cyclic_group(4);
        let p = FinLattice::chain(3);
        let h = RepMap::new(p.clone(), a.clone(), vec![Congruence::diagonal(4); 3]).unwrap();
        let f = gamma_star(&h);
        assert_eq!(f, Presheaf::constant(p, &a));
        let r = axiom_report(&f);
        assert!(r.soft && r.k2 && r.k3);
        // F(⊥) = A has four elements.
        assert!(!r.k1);
    }

    #[test]
    fn two_chain_on_z2() {
        let a = cyclic_group(2);
        let h = RepMap::new(FinLattice::chain(2), a.clone(), vec![Congruence::all(2), Congruence::diagonal(2)])
            .unwrap();
        let f = gamma_star(&h);
        assert_eq!(f.object(1), &a);
        assert_eq!(f.object(0).n(), 1);
    }

    #[test]
    fn non_commuting_pair_breaks_pullback() {
        let (t1, t2) = set3_pair();
        let theta = vec![Congruence::all(3), t1, t2, Congruence::diagonal(3)];
        let h = RepMap::new(FinLattice::boolean(2), FinAlgebra::set(3), theta).unwrap();
        let rc = rep_condition(&h);
        assert!(!rc.commuting);
        assert!(!rc.presheaf.k2);
        assert!(rc.consistent(), "{:?}", rc.inconsistencies);
        assert!(!rc.sheaf_condition);
    }

    #[test]
    fn z4_equal_halves_on_boolean_square() {
        // θ(a) ∧ θ(b) = {0,2|1,3} ≠ Δ = θ(⊤): binary infima fail, so
        // Z/4 → Z/2 ×_1 Z/2 is not injective and the square is no pullback.
        let half = Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]);
        let theta = vec![Congruence::all(4), half.clone(), half, Congruence::diagonal(4)];
        let h = RepMap::new(FinLattice::boolean(2), cyclic_group(4), theta).unwrap();
        let f = gamma_star(&h);
        assert_eq!(f.object(1).n(), 2);
        assert_eq!(f.object(2).n(), 2);
        assert_eq!(f.object(0).n(), 1);
        let rc = rep_condition(&h);
        assert!(rc.consistent(), "{:?}", rc.inconsistencies);
        assert!(!rc.binary_inf && !rc.product_injective && !rc.presheaf.k2);
        assert!(rc.empty_inf && rc.commuting && rc.top);
        assert!(!rc.sheaf_condition);
    }

    #[test]
    fn z4_complementary_corners_on_boolean_square() {
        let half = Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]);
        let theta = vec![Congruence::all(4), half, Congruence::all(4), Congruence::diagonal(4)];
        let h = RepMap::new(FinLattice::boolean(2), cyclic_group(4), theta).unwrap();
        let rc = rep_condition(&h);
        assert!(rc.consistent(), "{:?}", rc.inconsistencies);
        assert!(!rc.binary_inf && !rc.presheaf.k2);
        let theta = vec![Congruence::all(4), Congruence::diagonal(4), Congruence::all(4), Congruence::diagonal(4)];
        let h = RepMap::new(FinLattice::boolean(2), cyclic_group(4), theta).unwrap();
        let rc = rep_condition(&h);
        assert!(rc.presheaf.is_k_sheaf() && rc.presheaf.k4);
        assert!(rc.sheaf_condition && rc.soft_condition && rc.consistent());
    }

    #[test]
    fn meet_closed_limits_need_distributivity() {
        // Klein group on M3 with the three subgroup congruences on the atoms.
        let v4 = cyclic_group(2).product(&cyclic_group(2)).unwrap();
        let theta = vec![
            Congruence::all(4),
            Congruence::from_blocks(4, &[&[0, 1], &[2, 3]]),
            Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]),
            Congruence::from_blocks(4, &[&[0, 3], &[1, 2]]),
            Congruence::diagonal(4),
        ];
        let h = RepMap::new(FinLattice::m3(), v4, theta).unwrap();
        let f = gamma_star(&h);
        let r = axiom_report(&f);
        assert!(r.o2 && r.o3 && !r.distributive_base);
        assert!(!r.meet_closed_limits);
        // Eight compatible families over {⊥, a, b, c} against four elements of F(⊤).
        assert_eq!(count_families(&f, 0b01111), 8);
        assert!(r.consistency_failures().is_empty());
    }

    #[test]
    fn family_count_matches_explicit_pullback() {
        let a = cyclic_group(2).product(&cyclic_group(2)).unwrap();
        let con = congruence_lattice(&a).unwrap();
        let b = FinLattice::boolean(2);
        for h in all_rep_maps(&a, &b, &con, Preserve::NONE) {
            let f = gamma_star(&h);
            let pb = crate::finalg::pullback(&f.restriction(1, 0), &f.restriction(2, 0)).unwrap();
            let iso = pb.mediate(&f.restriction(3, 1), &f.restriction(3, 2)).map(|m| m.is_iso()).unwrap();
            assert_eq!(iso, cone_is_limit(&f, 0b0111, 3), "{}", h.describe());
        }
    }

    #[test]
    fn extract_round_trip() {
        let a = cyclic_group(4);
        let half = Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]);
        let h = RepMap::new(FinLattice::chain(3), a.clone(), vec![Congruence::all(4), half, Congruence::diagonal(4)])
            .unwrap();
        let (back, witness) = extract_h(&gamma_star(&h), &canonical_phi(&h)).unwrap();
        assert_eq!(back, h);
        assert!(witness.iter().all(|w| w.is_iso()));
        let c = Presheaf::constant(FinLattice::chain(2), &a);
        let (back, _) = extract_h(&c, &Homomorphism::identity(&a)).unwrap();
        assert!(back.theta.iter().all(|t| t.is_diagonal()));
    }

    #[test]
    fn extract_rejects_non_soft() {
        let s2 = chain_semilattice(2);
        // F(1) = 1-element, F(0) = 2-element: restriction cannot be onto.
        let one = FinAlgebra::terminal(s2.sig());
        let f = Presheaf::from_fn(FinLattice::chain(2), vec![s2.clone(), one.clone()], |_, _| vec![0]);
        let f = f.unwrap();
        let phi = Homomorphism::identity(&one);
        assert_eq!(extract_h(&f, &phi).unwrap_err(), SheafError::NotSoft(0));
    }

    #[test]
    fn functoriality_is_validated() {
        let a = FinAlgebra::set(2);
        let swap = vec![1, 0];
        let id = vec![0, 1];
        // Two cover paths from ⊤ to ⊥ in the square: swap∘id versus id∘id.
        let covers = vec![(0, 1, id.clone()), (0, 2, id.clone()), (1, 3, swap), (2, 3, id)];
        let err = Presheaf::new(FinLattice::boolean(2), vec![a; 4], covers).unwrap_err();
        assert!(matches!(err, SheafError::InvalidPresheaf(_)));
    }

    #[test]
    fn soft_reps_examples() {
        // On a one-point base ⊥ = ⊤ forces θ = ∇ = Δ, so only trivial algebras.
        let trivial = FinAlgebra::terminal(cyclic_group(2).sig());
        let r = enumerate_soft_reps(&trivial, &FinLattice::chain(1)).unwrap();
        assert_eq!(r.reps.len(), 1);
        assert!(r.reps[0].theta[0].is_diagonal());
        let r = enumerate_soft_reps(&cyclic_group(4), &FinLattice::chain(1)).unwrap();
        assert!(r.reps.is_empty());
        let r = enumerate_soft_reps(&FinAlgebra::set(3), &FinLattice::chain(2)).unwrap();
        assert_eq!(r.reps.len(), 1);
        assert!(r.reps[0].theta[0].is_all() && r.reps[0].theta[1].is_diagonal());
    }

    #[test]
    fn soft_reps_on_z4_boolean_match_brute_force() {
        // Oracle: all 3^4 assignments of Con(Z/4) to the square, filtered by
        // the preservation equations written out directly.
        let a = cyclic_group(4);
        let b = FinLattice::boolean(2);
        let con = congruence_lattice(&a).unwrap();
        let cs = &con.congruences;
        let mut count = 0;
        for code in 0..81usize {
            let t: Vec<&Congruence> = (0..4).map(|i| &cs[code / 3usize.pow(i as u32) % 3]).collect();
            let ok = t[0].is_all()
                && t[3].is_diagonal()
                && t[1].meet(t[2]) == *t[3]
                && congruence_join(&a, t[1], t[2]) == *t[0]
                && t[1].le(t[0]) && t[2].le(t[0]) && t[3].le(t[1]) && t[3].le(t[2]);
            if ok {
                count += 1;
            }
        }
        let r = enumerate_soft_reps(&a, &b).unwrap();
        assert_eq!(r.reps.len(), count);
        assert_eq!(count, 2);
    }

    #[test]
    fn literal_colimits_agree_with_reduction() {
        let theta = vec![Congruence::all(4), Congruence::diagonal(4), Congruence::all(4), Congruence::diagonal(4)];
        let h = RepMap::new(FinLattice::boolean(2), cyclic_group(4), theta).unwrap();
        let f = gamma_star(&h);
        let fast = axiom_report(&f);
        let slow = axiom_report_with(&f, AxiomOptions { literal_colimits: true, ..Default::default() });
        assert_eq!(fast.k3, slow.k3);
        assert!(slow.k3);
    }

    #[test]
    fn non_surjective_square_uses_cocone_search() {
        // Inclusion of the 1-element subsemilattice {1} into the 2-chain at the
        // bottom corner; the square is not a pushout of surjections.
        let s2 = chain_semilattice(2);
        let one = FinAlgebra::terminal(s2.sig());
        let f = Presheaf::from_fn(FinLattice::chain(2), vec![s2.clone(), one], |q, p| {
            if q == p { (0..[2, 1][p]).collect() } else { vec![1] }
        })
        .unwrap();
        let r = axiom_report(&f);
        assert!(!r.k4_by_quotients);
        assert!(!r.soft);
        assert!(r.consistency_failures().is_empty());
    }

    #[test]
    fn kan_transfer_collapses_to_least_elements() {
        let half = Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]);
        let h = RepMap::new(FinLattice::chain(3), cyclic_group(4), vec![Congruence::all(4), half, Congruence::diagonal(4)])
            .unwrap();
        let g = gamma_star(&h);
        let (f, dual, cert) = kan_transfer(&g).unwrap();
        assert!(cert.collapse && cert.failures.is_empty() && cert.verified == 3);
        for x in 0..3 {
            assert_eq!(f.object(dual.of_element[x]), g.object(x));
        }
        let (back, cert) = kan_restrict(&f, g.base(), &dual).unwrap();
        assert!(cert.collapse && cert.failures.is_empty());
        assert_eq!(back, g);
    }

    #[test]
    fn main_theorems_small_instances() {
        let r = verify_main_theorems(&FinAlgebra::set(3), &FinLattice::chain(2)).unwrap();
        assert!(r.pass(), "{:?}", r.clauses);
        assert_eq!(r.soft_reps, 1);
        let one = FinAlgebra::terminal(cyclic_group(2).sig());
        let r = verify_main_theorems(&one, &FinLattice::boolean(2)).unwrap();
        assert!(r.pass());
        assert_eq!(r.monotone_maps, 1);
        let r = verify_main_theorems(&cyclic_group(4), &FinLattice::boolean(2)).unwrap();
        assert!(r.pass(), "{:?}", r.clauses);
        assert_eq!(r.soft_reps, 2);
    }
}
