//! Finite commutative rings: ideal frames, the Gelfand condition, and the
//! soft sheaf representations over Jacobson radical ideals and over the
//! idempotents (Pierce).

use thiserror::Error;

use crate::finalg::{find_isomorphism, quotient, AlgError, Congruence, FinAlgebra, Homomorphism, Signature};
use crate::order::{
    bit, find_poset_isomorphism, format_set, full_mask, is_normal_frame, lawson_dual, members,
    FinLattice, LawsonDual, Normality, OrderError,
};
use crate::sheafrep::{axiom_report, gamma_star, kan_restrict, kan_transfer, Presheaf, RepMap, SheafError, SheafReport};

pub const RING_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("not a commutative unital ring: {0}")]
    NotRing(String),
    #[error("ring has {n} elements, cap is {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("not a frame: {0}")]
    NotFrame(String),
    #[error("map does not preserve finite infima and arbitrary suprema: {0}")]
    PreservationFailure(String),
    #[error("bad ring spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

pub type Result<T> = std::result::Result<T, RingError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCommRing {
    n: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
    zero: usize,
    one: usize,
}

impl FinCommRing {
    /// Validates the ring axioms by scanning the tables.
    pub fn new(n: usize, add: Vec<usize>, mul: Vec<usize>, zero: usize, one: usize) -> Result<Self> {
        if n == 0 || n > RING_CAP {
            return Err(RingError::CapExceeded { n, cap: RING_CAP });
        }
        let bad = |m: String| RingError::NotRing(m);
        if add.len() != n * n || mul.len() != n * n {
            return Err(bad("tables must have n² entries".into()));
        }
        if add.iter().chain(&mul).any(|&v| v >= n) || zero >= n || one >= n {
            return Err(bad("entry out of range".into()));
        }
        let r = FinCommRing { n, add, mul, zero, one };
        for a in 0..n {
            if r.add(a, zero) != a {
                return Err(bad(format!("{zero} is not an additive identity at {a}")));
            }
            if r.mul(a, one) != a {
                return Err(bad(format!("{one} is not a multiplicative identity at {a}")));
            }
            if !(0..n).any(|b| r.add(a, b) == zero) {
                return Err(bad(format!("{a} has no additive inverse")));
            }
            for b in 0..n {
                if r.add(a, b) != r.add(b, a) || r.mul(a, b) != r.mul(b, a) {
                    return Err(bad(format!("not commutative at ({a}, {b})")));
                }
                for c in 0..n {
                    if r.add(r.add(a, b), c) != r.add(a, r.add(b, c)) {
                        return Err(bad(format!("addition not associative at ({a}, {b}, {c})")));
                    }
                    if r.mul(r.mul(a, b), c) != r.mul(a, r.mul(b, c)) {
                        return Err(bad(format!("multiplication not associative at ({a}, {b}, {c})")));
                    }
                    if r.mul(a, r.add(b, c)) != r.add(r.mul(a, b), r.mul(a, c)) {
                        return Err(bad(format!("not distributive at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn zn(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(RingError::Spec("Z/0 is infinite".into()));
        }
        let add = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        let mul = (0..n * n).map(|i| (i / n) * (i % n) % n).collect();
        Self::new(n, add, mul, 0, 1 % n)
    }

    /// Componentwise product; `(a, b)` has index `a·|S| + b`.
    pub fn product(&self, other: &FinCommRing) -> Result<Self> {
        let m = other.n;
        let n = self.n * m;
        let split = |i: usize| (i / m, i % m);
        let op = |f: &dyn Fn(&FinCommRing, usize, usize) -> usize, g: &dyn Fn(&FinCommRing, usize, usize) -> usize| {
            (0..n * n)
                .map(|i| {
                    let ((a1, b1), (a2, b2)) = (split(i / n), split(i % n));
                    f(self, a1, a2) * m + g(other, b1, b2)
                })
                .collect::<Vec<usize>>()
        };
        let add = op(&|r, x, y| r.add(x, y), &|r, x, y| r.add(x, y));
        let mul = op(&|r, x, y| r.mul(x, y), &|r, x, y| r.mul(x, y));
        Self::new(n, add, mul, self.zero * m + other.zero, self.one * m + other.one)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.n + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    pub fn neg(&self, a: usize) -> usize {
        (0..self.n).find(|&b| self.add(a, b) == self.zero).expect("validated")
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn is_unit(&self, a: usize) -> bool {
        (0..self.n).any(|b| self.mul(a, b) == self.one)
    }

    pub fn signature() -> Signature {
        Signature::new(&[("add", 2), ("mul", 2), ("neg", 1), ("zero", 0), ("one", 0)]).expect("distinct names")
    }

    pub fn to_algebra(&self) -> FinAlgebra {
        let neg = (0..self.n).map(|a| self.neg(a)).collect();
        FinAlgebra::new(
            Self::signature(),
            self.n,
            vec![self.add.clone(), self.mul.clone(), neg, vec![self.zero], vec![self.one]],
        )
        .expect("ring tables fit the signature")
    }

    pub fn from_algebra(a: &FinAlgebra) -> Result<Self> {
        if a.sig() != &Self::signature() {
            return Err(RingError::NotRing("signature is not add/mul/neg/zero/one".into()));
        }
        Self::new(a.n(), a.table(0).to_vec(), a.table(1).to_vec(), a.table(3)[0], a.table(4)[0])
    }

    /// `{ra : r ∈ R}`.
    pub fn principal(&self, a: usize) -> u64 {
        (0..self.n).fold(0, |m, r| m | bit(self.mul(r, a)))
    }

    pub fn ideal_sum(&self, i: u64, j: u64) -> u64 {
        let mut out = 0;
        for a in members(i) {
            for b in members(j) {
                out |= bit(self.add(a, b));
            }
        }
        out
    }

    pub fn is_ideal(&self, s: u64) -> bool {
        s & bit(self.zero) != 0
            && members(s).all(|a| {
                members(s).all(|b| s & bit(self.add(a, b)) != 0)
                    && (0..self.n).all(|r| s & bit(self.mul(r, a)) != 0)
            })
    }

    pub fn annihilator(&self, a: usize) -> u64 {
        (0..self.n).filter(|&b| self.mul(a, b) == self.zero).fold(0, |m, b| m | bit(b))
    }

    pub fn full(&self) -> u64 {
        full_mask(self.n)
    }

    /// `a ~ b` iff `a − b ∈ I`.
    pub fn ideal_congruence(&self, i: u64) -> Congruence {
        let labels: Vec<usize> =
            (0..self.n).map(|a| members(i).map(|x| self.add(a, x)).min().expect("ideal contains 0")).collect();
        Congruence::from_labels(&labels)
    }

    pub fn quotient_ring(&self, i: u64) -> (FinCommRing, Homomorphism) {
        let (q, h) = quotient(&self.to_algebra(), &self.ideal_congruence(i));
        (FinCommRing::from_algebra(&q).expect("quotient of a ring"), h)
    }

    /// Non-zero with the non-units closed under addition.
    pub fn is_local(&self) -> bool {
        let non_units: Vec<usize> = (0..self.n).filter(|&a| !self.is_unit(a)).collect();
        self.n > 1 && non_units.iter().all(|&a| non_units.iter().all(|&b| !self.is_unit(self.add(a, b))))
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.n).filter(|&e| self.mul(e, e) == e).collect()
    }
}

/// Parses `zn:<n>` or `product:<spec>,<spec>,...`.
pub fn ring_from_spec(spec: &str) -> Result<FinCommRing> {
    let spec = spec.trim();
    if let Some(n) = spec.strip_prefix("zn:") {
        let n: usize = n.parse().map_err(|_| RingError::Spec(format!("bad modulus in {spec}")))?;
        return FinCommRing::zn(n);
    }
    if let Some(rest) = spec.strip_prefix("product:") {
        let mut parts = rest.split(',').map(ring_from_spec);
        let first = parts.next().ok_or_else(|| RingError::Spec("empty product".into()))??;
        return parts.try_fold(first, |acc, r| acc.product(&r?));
    }
    Err(RingError::Spec(format!("expected zn:<n> or product:..., got {spec}")))
}

/// Parses `ring <n>`, then `zero <z> one <u>`, then `add` and `mul` tables.
pub fn parse_ring(text: &str) -> Result<FinCommRing> {
    let tokens: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .collect();
    let mut it = tokens.into_iter();
    let mut expect = |word: &str| match it.next() {
        Some(t) if t == word => Ok(()),
        other => Err(RingError::Spec(format!("expected {word}, got {other:?}"))),
    };
    expect("ring")?;
    let rest: Vec<&str> = it.collect();
    let num = |t: &str| t.parse::<usize>().map_err(|_| RingError::Spec(format!("not a number: {t}")));
    let n = num(rest.first().ok_or_else(|| RingError::Spec("missing size".into()))?)?;
    if rest.len() != 1 + 4 + 2 * (1 + n * n) {
        return Err(RingError::Spec(format!("expected {} tokens after size", 4 + 2 * (1 + n * n))));
    }
    if rest[1] != "zero" || rest[3] != "one" || rest[5] != "add" || rest[6 + n * n] != "mul" {
        return Err(RingError::Spec("expected zero, one, add, mul sections in order".into()));
    }
    let table = |s: &[&str]| s.iter().map(|t| num(t)).collect::<Result<Vec<usize>>>();
    FinCommRing::new(
        n,
        table(&rest[6..6 + n * n])?,
        table(&rest[7 + n * n..])?,
        num(rest[2])?,
        num(rest[4])?,
    )
}

pub fn ring_to_text(r: &FinCommRing) -> String {
    let row = |t: &[usize], a: usize| {
        t[a * r.n..(a + 1) * r.n].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = format!("ring {}\nzero {} one {}\nadd\n", r.n, r.zero, r.one);
    for a in 0..r.n {
        out += &row(&r.add, a);
        out.push('\n');
    }
    out += "mul\n";
    for a in 0..r.n {
        out += &row(&r.mul, a);
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug)]
pub struct IdealLattice {
    pub lattice: FinLattice,
    /// Ideals as member masks, ascending.
    pub ideals: Vec<u64>,
    pub prime: Vec<bool>,
    pub maximal: Vec<bool>,
}

impl IdealLattice {
    pub fn index_of(&self, i: u64) -> Option<usize> {
        self.ideals.binary_search(&i).ok()
    }

    /// Intersection of the primes containing `i`; the whole ring if none.
    pub fn radical(&self, i: u64) -> u64 {
        self.ideals
            .iter()
            .zip(&self.prime)
            .filter(|&(&p, &pr)| pr && i & !p == 0)
            .fold(self.ideals[self.lattice.top()], |a, (&p, _)| a & p)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.ideals.iter().zip(&self.prime).filter(|(_, &p)| p).map(|(&i, _)| i)
    }

    pub fn maximals(&self) -> impl Iterator<Item = u64> + '_ {
        self.ideals.iter().zip(&self.maximal).filter(|(_, &m)| m).map(|(&i, _)| i)
    }
}

/// All ideals, as sums of principal ideals, ordered by inclusion.
pub fn ideal_lattice(r: &FinCommRing) -> Result<IdealLattice> {
    let mut ideals: Vec<u64> = (0..r.n).map(|a| r.principal(a)).collect();
    ideals.sort_unstable();
    ideals.dedup();
    // Close under pairwise sums; restart the scan after every insertion.
    'scan: loop {
        for k in 0..ideals.len() {
            for j in 0..k {
                let s = r.ideal_sum(ideals[k], ideals[j]);
                if let Err(pos) = ideals.binary_search(&s) {
                    ideals.insert(pos, s);
                    continue 'scan;
                }
            }
        }
        break;
    }
    let lattice = FinLattice::of_sets(&ideals)?;
    for x in 0..ideals.len() {
        for y in 0..ideals.len() {
            if ideals[lattice.meet(x, y)] != ideals[x] & ideals[y]
                || ideals[lattice.join(x, y)] != r.ideal_sum(ideals[x], ideals[y])
            {
                return Err(RingError::NotRing("ideal lattice operations are not ∩ and +".into()));
            }
        }
    }
    let full = r.full();
    let prime: Vec<bool> = ideals
        .iter()
        .map(|&p| {
            p != full
                && (0..r.n).all(|a| {
                    p & bit(a) != 0 || (0..r.n).all(|b| p & bit(b) != 0 || p & bit(r.mul(a, b)) == 0)
                })
        })
        .collect();
    let maximal = ideals
        .iter()
        .map(|&m| m != full && ideals.iter().all(|&j| j == m || j == full || m & !j != 0))
        .collect();
    Ok(IdealLattice { lattice, ideals, prime, maximal })
}

/// Radical ideals ordered by inclusion.
pub fn radical_ideals(il: &IdealLattice) -> Result<(FinLattice, Vec<u64>)> {
    let sets: Vec<u64> = il.ideals.iter().copied().filter(|&i| il.radical(i) == i).collect();
    Ok((FinLattice::of_sets(&sets)?, sets))
}

/// Ideals `J` such that `a ∈ J` whenever `1 + ra` is invertible modulo `J`
/// for every `r`.
pub fn is_jacobson_radical(r: &FinCommRing, j: u64) -> bool {
    let inv_mod = |x: usize| (0..r.n).any(|s| j & bit(r.sub(r.mul(x, s), r.one)) != 0);
    (0..r.n).all(|a| j & bit(a) != 0 || !(0..r.n).all(|t| inv_mod(r.add(r.one, r.mul(t, a)))))
}

pub fn jacobson_radical_ideals(r: &FinCommRing, il: &IdealLattice) -> Result<(FinLattice, Vec<u64>)> {
    let sets: Vec<u64> = il.ideals.iter().copied().filter(|&j| is_jacobson_radical(r, j)).collect();
    Ok((FinLattice::of_sets(&sets)?, sets))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GelfandReport {
    /// `x + y = 1` implies `(1 + xa)(1 + yb) = 0` for some `a, b`.
    pub syntactic: bool,
    /// Every prime lies in exactly one maximal ideal.
    pub semantic: bool,
    /// The frame of radical ideals is normal.
    pub frame_normal: bool,
    pub witness: Option<String>,
}

impl GelfandReport {
    pub fn agree(&self) -> bool {
        self.syntactic == self.semantic && self.semantic == self.frame_normal
    }
}

pub fn is_gelfand(r: &FinCommRing) -> Result<GelfandReport> {
    let il = ideal_lattice(r)?;
    let mut witness = None;
    let mut syntactic = true;
    for x in 0..r.n {
        let y = r.sub(r.one, x);
        let found = (0..r.n).any(|a| {
            let u = r.add(r.one, r.mul(x, a));
            (0..r.n).any(|b| r.mul(u, r.add(r.one, r.mul(y, b))) == r.zero)
        });
        if !found {
            syntactic = false;
            witness.get_or_insert(format!("x = {x}, y = {y} admit no a, b"));
            break;
        }
    }
    let maximals: Vec<u64> = il.maximals().collect();
    let mut semantic = true;
    for p in il.primes() {
        let above = maximals.iter().filter(|&&m| p & !m == 0).count();
        if above != 1 {
            semantic = false;
            witness.get_or_insert(format!("prime {} lies in {above} maximal ideals", format_set(p)));
        }
    }
    let (rid, _) = radical_ideals(&il)?;
    let frame_normal = match is_normal_frame(&rid)? {
        Normality::Normal => true,
        Normality::NotNormal { g, h } => {
            witness.get_or_insert(format!("radical ideals {g} and {h} are not separated"));
            false
        }
    };
    Ok(GelfandReport { syntactic, semantic, frame_normal, witness })
}

fn require_frame(l: &FinLattice) -> Result<()> {
    match l.distributivity_failure() {
        Some((x, y, z)) => Err(RingError::NotFrame(format!("distributivity fails at ({x}, {y}, {z})"))),
        None => Ok(()),
    }
}

/// Every element is the join of the elements well inside it, where
/// `x ≺ y` iff some `c` has `c ∧ x = ⊥` and `c ∨ y = ⊤`. Finite frames
/// are compact.
pub fn compact_regular_check(l: &FinLattice) -> Result<bool> {
    require_frame(l)?;
    let well_inside =
        |x: usize, y: usize| (0..l.n()).any(|c| l.meet(c, x) == l.bot() && l.join(c, y) == l.top());
    Ok((0..l.n()).all(|y| {
        let below = (0..l.n()).filter(|&x| well_inside(x, y)).fold(0, |m, x| m | bit(x));
        l.sup(below) == y
    }))
}

#[derive(Clone, Debug)]
pub struct SelfDuality {
    pub holds: bool,
    pub dual: LawsonDual,
    /// `x ↦` index of `{y : x ∨ y = ⊤}` in `dual.filters`.
    pub to_filter: Vec<usize>,
    /// Filter index `↦ sup {x : ∃y ∈ k, x ∧ y = ⊥}`.
    pub from_filter: Vec<usize>,
}

/// Checks that `x ↦ {y : x ∨ y = ⊤}` is an order isomorphism onto the
/// Scott-open filters with inverse `k ↦ sup {x : ∃y ∈ k, x ∧ y = ⊥}`.
pub fn lawson_selfdual_check(l: &FinLattice) -> Result<SelfDuality> {
    require_frame(l)?;
    let dual = lawson_dual(l)?;
    let nf = dual.filters.len();
    let mut holds = nf == l.n();
    let to_filter: Vec<usize> = (0..l.n())
        .map(|x| {
            let k = (0..l.n()).filter(|&y| l.join(x, y) == l.top()).fold(0, |m, y| m | bit(y));
            dual.filters.iter().position(|f| f.members == k).unwrap_or_else(|| {
                holds = false;
                usize::MAX
            })
        })
        .collect();
    let from_filter: Vec<usize> = dual
        .filters
        .iter()
        .map(|k| {
            let s = (0..l.n())
                .filter(|&x| members(k.members).any(|y| l.meet(x, y) == l.bot()))
                .fold(0, |m, x| m | bit(x));
            l.sup(s)
        })
        .collect();
    if holds {
        holds = (0..l.n()).all(|x| from_filter[to_filter[x]] == x)
            && (0..nf).all(|i| to_filter[from_filter[i]] == i)
            && (0..l.n()).all(|x| {
                (0..l.n()).all(|y| {
                    let (kx, ky) = (dual.filters[to_filter[x]].members, dual.filters[to_filter[y]].members);
                    l.leq(x, y) == (kx & !ky == 0)
                })
            });
    }
    Ok(SelfDuality { holds, dual, to_filter, from_filter })
}

/// How a map `f: L → Id(R)` of frames interacts with finite infima and
/// arbitrary suprema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preservation {
    pub finite_infima: bool,
    pub arbitrary_suprema: bool,
    pub witness: Option<String>,
}

impl Preservation {
    pub fn holds(&self) -> bool {
        self.finite_infima && self.arbitrary_suprema
    }
}

pub fn preservation(r: &FinCommRing, l: &FinLattice, f: &[u64]) -> Preservation {
    let mut p = Preservation { finite_infima: true, arbitrary_suprema: true, witness: None };
    if f[l.top()] != r.full() {
        p.finite_infima = false;
        p.witness.get_or_insert(format!("top goes to {}", format_set(f[l.top()])));
    }
    if f[l.bot()] != bit(r.zero) {
        p.arbitrary_suprema = false;
        p.witness.get_or_insert(format!("bottom goes to {}, not (0)", format_set(f[l.bot()])));
    }
    for x in 0..l.n() {
        for y in 0..l.n() {
            if f[l.meet(x, y)] != f[x] & f[y] {
                p.finite_infima = false;
                p.witness.get_or_insert(format!("meet of {x}, {y}"));
            }
            if f[l.join(x, y)] != r.ideal_sum(f[x], f[y]) {
                p.arbitrary_suprema = false;
                p.witness.get_or_insert(format!("join of {x}, {y}"));
            }
        }
    }
    p
}

/// A soft sheaf over a finite compact regular frame `L`, built from a map
/// `h: L → Con(A)` preserving finite infima and arbitrary suprema.
#[derive(Clone, Debug)]
pub struct FrameRepresentation {
    /// The presheaf on `σFilt(L)^op`, indexed like `duality.dual.filters`.
    pub k_side: Presheaf,
    /// The sheaf on `L`.
    pub sheaf: Presheaf,
    pub duality: SelfDuality,
    pub report: SheafReport,
    pub global_iso: bool,
    pub round_trip: bool,
    pub failures: Vec<String>,
}

impl FrameRepresentation {
    pub fn pass(&self) -> bool {
        let r = &self.report;
        self.failures.is_empty()
            && self.global_iso
            && self.round_trip
            && r.is_k_sheaf()
            && r.k4
            && r.is_omega_sheaf()
            && r.soft
            && r.omega_soft
    }
}

pub fn frame_representation(a: &FinAlgebra, l: &FinLattice, h: &[Congruence]) -> Result<FrameRepresentation> {
    let duality = lawson_selfdual_check(l)?;
    if !duality.holds {
        return Err(RingError::NotFrame("not self-dual under the Lawson dual".into()));
    }
    let d_base = duality.dual.lattice.opposite();
    let theta = duality.from_filter.iter().map(|&x| h[x].clone()).collect();
    let rep = RepMap::new(d_base, a.clone(), theta).map_err(RingError::from)?;
    let k_side = gamma_star(&rep);
    let (sheaf, cert) = kan_restrict(&k_side, l, &duality.dual)?;
    let mut failures = cert.failures.clone();
    if !cert.collapse {
        failures.push("limits did not collapse to principal filters".into());
    }
    let report = axiom_report(&sheaf);
    failures.extend(report.consistency_failures());
    let phi = quotient(a, &h[l.bot()]).1;
    let global_iso = phi.cod == *sheaf.object(l.top()) && phi.is_iso();
    let (back, _, cert) = kan_transfer(&sheaf)?;
    failures.extend(cert.failures);
    let round_trip = back == k_side;
    Ok(FrameRepresentation { k_side, sheaf, duality, report, global_iso, round_trip, failures })
}

#[derive(Clone, Debug)]
pub struct Stalk {
    pub maximal: u64,
    pub o_m: u64,
    pub size: usize,
    /// The stalk is literally `R/O_m`.
    pub equals_quotient: bool,
    pub iso_to_quotient: bool,
    pub local: bool,
}

#[derive(Clone, Debug)]
pub struct GelfandRepresentation {
    pub gelfand: GelfandReport,
    pub frame: FinLattice,
    pub frame_ideals: Vec<u64>,
    pub radical_ideals: Vec<u64>,
    pub compact_regular: bool,
    /// The inclusion `JRId ↪ Id`.
    pub inclusion: Preservation,
    /// `J ↦ O_J = {a : J + Ann(a) = R}`.
    pub o_map: Vec<u64>,
    pub o_preservation: Preservation,
    pub representation: FrameRepresentation,
    pub stalks: Vec<Stalk>,
}

impl GelfandRepresentation {
    pub fn pass(&self) -> bool {
        self.gelfand.agree()
            && self.gelfand.syntactic
            && self.compact_regular
            && self.representation.duality.holds
            && self.o_preservation.holds()
            && self.representation.pass()
            && self.stalks.iter().all(|s| s.equals_quotient && s.iso_to_quotient && s.local)
    }
}

/// `O_m = {a : ∃b ∉ m, ab = 0}`.
pub fn o_of_maximal(r: &FinCommRing, m: u64) -> u64 {
    (0..r.n)
        .filter(|&a| (0..r.n).any(|b| m & bit(b) == 0 && r.mul(a, b) == r.zero))
        .fold(0, |s, a| s | bit(a))
}

/// `O_J = {a : J + Ann(a) = R}`.
pub fn o_of_ideal(r: &FinCommRing, j: u64) -> u64 {
    (0..r.n)
        .filter(|&a| r.ideal_sum(j, r.annihilator(a)) == r.full())
        .fold(0, |s, a| s | bit(a))
}

pub fn gelfand_representation(r: &FinCommRing) -> Result<GelfandRepresentation> {
    let gelfand = is_gelfand(r)?;
    let il = ideal_lattice(r)?;
    let (_, rid) = radical_ideals(&il)?;
    let (frame, frame_ideals) = jacobson_radical_ideals(r, &il)?;
    let compact_regular = compact_regular_check(&frame)?;
    let inclusion = preservation(r, &frame, &frame_ideals);
    let o_map: Vec<u64> = frame_ideals.iter().map(|&j| o_of_ideal(r, j)).collect();
    if let Some(&bad) = o_map.iter().find(|&&o| !r.is_ideal(o)) {
        return Err(RingError::NotRing(format!("O_J = {} is not an ideal", format_set(bad))));
    }
    let o_preservation = preservation(r, &frame, &o_map);
    if !o_preservation.holds() {
        return Err(RingError::PreservationFailure(o_preservation.witness.clone().unwrap_or_default()));
    }
    let a = r.to_algebra();
    let h: Vec<Congruence> = o_map.iter().map(|&o| r.ideal_congruence(o)).collect();
    let representation = frame_representation(&a, &frame, &h)?;
    let mut stalks = Vec::new();
    for m in il.maximals() {
        // The point of JRId at m: the frame elements not contained in m.
        let k = (0..frame.n()).filter(|&i| frame_ideals[i] & !m != 0).fold(0, |s, i| s | bit(i));
        let idx = representation.duality.dual.filters.iter().position(|f| f.members == k).ok_or_else(|| {
            RingError::NotFrame(format!("no Scott-open filter at maximal ideal {}", format_set(m)))
        })?;
        let stalk = representation.k_side.object(idx);
        let o_m = o_of_maximal(r, m);
        let (q, _) = r.quotient_ring(o_m);
        let qa = q.to_algebra();
        stalks.push(Stalk {
            maximal: m,
            o_m,
            size: stalk.n(),
            equals_quotient: *stalk == qa,
            iso_to_quotient: find_isomorphism(stalk, &qa).is_some(),
            local: q.is_local(),
        });
    }
    Ok(GelfandRepresentation {
        gelfand,
        frame,
        frame_ideals,
        radical_ideals: rid,
        compact_regular,
        inclusion,
        o_map,
        o_preservation,
        representation,
        stalks,
    })
}

#[derive(Clone, Debug)]
pub struct PierceReport {
    pub idempotents: Vec<usize>,
    pub atoms: Vec<usize>,
    /// The rings `Re` for each atom `e`, with unit `e`.
    pub factors: Vec<FinCommRing>,
    /// `r ↦ (re)_e` is a ring isomorphism onto the product of the factors.
    pub product_iso: bool,
    pub preservation: Preservation,
    pub base_boolean: bool,
    pub representation: FrameRepresentation,
}

impl PierceReport {
    pub fn pass(&self) -> bool {
        self.product_iso && self.preservation.holds() && self.base_boolean && self.representation.pass()
    }
}

/// The ring `Re` with unit `e`, re-indexed ascending.
pub fn corner_ring(r: &FinCommRing, e: usize) -> Result<(FinCommRing, Vec<usize>)> {
    let mut elems: Vec<usize> = (0..r.n).map(|x| r.mul(x, e)).collect();
    elems.sort_unstable();
    elems.dedup();
    let idx = |x: usize| elems.binary_search(&x).expect("closed under the operations");
    let k = elems.len();
    let add = (0..k * k).map(|i| idx(r.add(elems[i / k], elems[i % k]))).collect();
    let mul = (0..k * k).map(|i| idx(r.mul(elems[i / k], elems[i % k]))).collect();
    let ring = FinCommRing::new(k, add, mul, idx(r.zero), idx(e))?;
    Ok((ring, elems))
}

pub fn pierce_decomposition(r: &FinCommRing) -> Result<PierceReport> {
    let idempotents = r.idempotents();
    let le = |e: usize, f: usize| r.mul(e, f) == e;
    let atoms: Vec<usize> = idempotents
        .iter()
        .copied()
        .filter(|&e| e != r.zero && idempotents.iter().all(|&f| f == r.zero || f == e || !le(f, e)))
        .collect();
    // Ideals of the Boolean ring E(R) are its principal ideals eE.
    let mut e_ideals: Vec<u64> = idempotents
        .iter()
        .map(|&e| idempotents.iter().filter(|&&f| le(f, e)).fold(0, |m, &f| m | bit(f)))
        .collect();
    e_ideals.sort_unstable();
    e_ideals.dedup();
    let base = FinLattice::of_sets(&e_ideals)?;
    let generated: Vec<u64> = e_ideals
        .iter()
        .map(|&j| members(j).fold(bit(r.zero), |acc, e| r.ideal_sum(acc, r.principal(e))))
        .collect();
    let preservation = preservation(r, &base, &generated);
    if !preservation.holds() {
        return Err(RingError::PreservationFailure(preservation.witness.clone().unwrap_or_default()));
    }
    let base_boolean = find_poset_isomorphism(base.poset(), FinLattice::boolean(atoms.len()).poset()).is_some();
    let mut factors = Vec::new();
    let mut product: Option<FinCommRing> = None;
    let mut coords: Vec<Vec<usize>> = vec![Vec::new(); r.n];
    for &e in &atoms {
        let (f, elems) = corner_ring(r, e)?;
        for (x, c) in coords.iter_mut().enumerate() {
            c.push(elems.binary_search(&r.mul(x, e)).expect("in Re"));
        }
        product = Some(match product {
            None => f.clone(),
            Some(p) => p.product(&f)?,
        });
        factors.push(f);
    }
    let product = product.unwrap_or(FinCommRing::zn(1)?);
    let map: Vec<usize> = coords
        .iter()
        .map(|c| c.iter().zip(&factors).fold(0, |acc, (&v, f)| acc * f.n() + v))
        .collect();
    let product_iso = Homomorphism::new(r.to_algebra(), product.to_algebra(), map)
        .map(|h| h.is_iso())
        .unwrap_or(false);
    let h: Vec<Congruence> = generated.iter().map(|&g| r.ideal_congruence(g)).collect();
    let representation = frame_representation(&r.to_algebra(), &base, &h)?;
    Ok(PierceReport { idempotents, atoms, factors, product_iso, preservation, base_boolean, representation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multiples(n: usize, d: usize) -> u64 {
        (0..n).filter(|x| x % d == 0).fold(0, |m, x| m | bit(x))
    }

    #[test]
    fn ring_constructors() {
        let z1 = FinCommRing::zn(1).unwrap();
        assert_eq!(z1.zero(), z1.one());
        let z4 = FinCommRing::zn(4).unwrap();
        assert_eq!(z4.n(), 4);
        let z6 = FinCommRing::zn(6).unwrap();
        let p = FinCommRing::zn(2).unwrap().product(&FinCommRing::zn(3).unwrap()).unwrap();
        assert!(find_isomorphism(&z6.to_algebra(), &p.to_algebra()).is_some());
        let z4 = FinCommRing::zn(4).unwrap();
        let v = FinCommRing::zn(2).unwrap().product(&FinCommRing::zn(2).unwrap()).unwrap();
        assert!(find_isomorphism(&z4.to_algebra(), &v.to_algebra()).is_none());
    }

    #[test]
    fn ring_validation() {
        let mut mul: Vec<usize> = (0..9).map(|i| (i / 3) * (i % 3) % 3).collect();
        mul[3 + 2] = 0;
        let add = (0..9).map(|i| (i / 3 + i % 3) % 3).collect();
        assert!(matches!(FinCommRing::new(3, add, mul, 0, 1), Err(RingError::NotRing(_))));
    }

    #[test]
    fn spec_and_text_round_trip() {
        let r = ring_from_spec("product:zn:2,zn:3").unwrap();
        assert_eq!(r.n(), 6);
        assert_eq!(parse_ring(&ring_to_text(&r)).unwrap(), r);
        assert!(ring_from_spec("zn:x").is_err());
        assert!(ring_from_spec("q:3").is_err());
    }

    #[test]
    fn ideals_of_z12() {
        let r = FinCommRing::zn(12).unwrap();
        let il = ideal_lattice(&r).unwrap();
        let mut expect: Vec<u64> = [1, 2, 3, 4, 6, 12].iter().map(|&d| multiples(12, d)).collect();
        expect.sort_unstable();
        assert_eq!(il.ideals, expect);
        let primes: Vec<u64> = il.primes().collect();
        let mut want = vec![multiples(12, 2), multiples(12, 3)];
        want.sort_unstable();
        assert_eq!(primes, want);
        assert_eq!(il.radical(bit(0)), multiples(12, 6));
        let (_, rid) = radical_ideals(&il).unwrap();
        let mut want: Vec<u64> = [1, 2, 3, 6].iter().map(|&d| multiples(12, d)).collect();
        want.sort_unstable();
        assert_eq!(rid, want);
        let (_, jr) = jacobson_radical_ideals(&r, &il).unwrap();
        assert_eq!(jr, rid);
    }

    #[test]
    fn ideals_match_congruences() {
        for n in [4, 6, 8, 12] {
            let r = FinCommRing::zn(n).unwrap();
            let il = ideal_lattice(&r).unwrap();
            let con = crate::finalg::congruences_by_principals(&r.to_algebra(), 64).unwrap();
            assert_eq!(il.ideals.len(), con.len());
            for &i in &il.ideals {
                assert!(con.contains(&r.ideal_congruence(i)));
            }
        }
    }

    #[test]
    fn field_and_z8_frames() {
        let r = FinCommRing::zn(5).unwrap();
        let il = ideal_lattice(&r).unwrap();
        assert_eq!(il.ideals, vec![bit(0), r.full()]);
        let (_, jr) = jacobson_radical_ideals(&r, &il).unwrap();
        assert_eq!(jr, vec![bit(0), r.full()]);
        let r = FinCommRing::zn(8).unwrap();
        let il = ideal_lattice(&r).unwrap();
        let (_, jr) = jacobson_radical_ideals(&r, &il).unwrap();
        assert_eq!(jr, vec![multiples(8, 2), r.full()]);
    }

    #[test]
    fn gelfand_predicates() {
        for n in [5, 12] {
            let g = is_gelfand(&FinCommRing::zn(n).unwrap()).unwrap();
            assert!(g.syntactic && g.semantic && g.frame_normal, "Z/{n}: {g:?}");
        }
    }

    #[test]
    fn compact_regular_examples() {
        assert!(compact_regular_check(&FinLattice::boolean(2)).unwrap());
        assert!(compact_regular_check(&FinLattice::boolean(3)).unwrap());
        assert!(!compact_regular_check(&FinLattice::chain(3)).unwrap());
        assert!(compact_regular_check(&FinLattice::chain(1)).unwrap());
        assert!(matches!(compact_regular_check(&FinLattice::n5()), Err(RingError::NotFrame(_))));
        assert!(lawson_selfdual_check(&FinLattice::boolean(2)).unwrap().holds);
        assert!(lawson_selfdual_check(&FinLattice::chain(1)).unwrap().holds);
        assert!(!lawson_selfdual_check(&FinLattice::chain(3)).unwrap().holds);
    }

    #[test]
    fn gelfand_representation_z12() {
        let r = FinCommRing::zn(12).unwrap();
        let g = gelfand_representation(&r).unwrap();
        assert!(g.pass(), "{:?}", g.representation.failures);
        assert_eq!(g.frame.n(), 4);
        // The bottom of JRId is (6), so the inclusion misses the empty join.
        assert!(g.inclusion.finite_infima && !g.inclusion.arbitrary_suprema);
        let mut stalks: Vec<(u64, u64, usize)> = g.stalks.iter().map(|s| (s.maximal, s.o_m, s.size)).collect();
        stalks.sort_unstable();
        let mut want = vec![
            (multiples(12, 2), multiples(12, 4), 4),
            (multiples(12, 3), multiples(12, 3), 3),
        ];
        want.sort_unstable();
        assert_eq!(stalks, want);
    }

    #[test]
    fn o_map_on_z12() {
        let r = FinCommRing::zn(12).unwrap();
        assert_eq!(o_of_ideal(&r, multiples(12, 6)), bit(0));
        assert_eq!(o_of_ideal(&r, multiples(12, 2)), multiples(12, 4));
        assert_eq!(o_of_ideal(&r, multiples(12, 3)), multiples(12, 3));
        assert_eq!(o_of_ideal(&r, r.full()), r.full());
    }

    #[test]
    fn gelfand_representation_small_cases() {
        let f = gelfand_representation(&FinCommRing::zn(5).unwrap()).unwrap();
        assert!(f.pass());
        assert_eq!(f.stalks.len(), 1);
        assert_eq!(f.stalks[0].size, 5);
        assert!(f.inclusion.holds());
        let s = gelfand_representation(&FinCommRing::zn(6).unwrap()).unwrap();
        assert!(s.pass());
        let mut sizes: Vec<usize> = s.stalks.iter().map(|s| s.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 3]);
    }

    #[test]
    fn pierce_examples() {
        let r = FinCommRing::zn(6).unwrap();
        let p = pierce_decomposition(&r).unwrap();
        assert_eq!(p.idempotents, vec![0, 1, 3, 4]);
        assert_eq!(p.atoms, vec![3, 4]);
        assert!(p.pass());
        let sizes: Vec<usize> = p.factors.iter().map(|f| f.n()).collect();
        assert_eq!(sizes, vec![2, 3]);
        assert!(find_isomorphism(&p.factors[0].to_algebra(), &FinCommRing::zn(2).unwrap().to_algebra()).is_some());
        assert!(find_isomorphism(&p.factors[1].to_algebra(), &FinCommRing::zn(3).unwrap().to_algebra()).is_some());
        let p = pierce_decomposition(&FinCommRing::zn(4).unwrap()).unwrap();
        assert_eq!(p.idempotents, vec![0, 1]);
        assert_eq!(p.factors.len(), 1);
        assert!(p.pass());
        let v = ring_from_spec("product:zn:2,zn:2").unwrap();
        let p = pierce_decomposition(&v).unwrap();
        assert_eq!(p.factors.len(), 2);
        assert!(p.factors.iter().all(|f| f.n() == 2));
        assert!(p.pass());
    }
}
