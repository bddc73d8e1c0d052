//! Finite algebras over a fixed finitary signature: homomorphisms,
//! congruences, quotients, pullbacks and pushouts of quotient spans.

use std::collections::HashMap;

use thiserror::Error;

use crate::order::{check_lattice, check_poset, FinLattice, OrderError, ParseError, MAX_ELEMENTS};

/// Largest carrier on which congruences are found by enumerating partitions.
pub const PARTITION_CAP: usize = 8;

/// Largest carrier handled by the principal-congruence route.
pub const CARRIER_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgError {
    #[error("duplicate operation name `{0}`")]
    DuplicateOp(String),
    #[error("table for `{op}` has {got} entries, expected {expected}")]
    TableShape { op: String, expected: usize, got: usize },
    #[error("table for `{op}` has entry {value} outside the carrier")]
    EntryOutOfRange { op: String, value: usize },
    #[error("empty carrier with constant `{0}`")]
    EmptyWithConstants(String),
    #[error("map has length {got}, expected {expected}")]
    MapShape { expected: usize, got: usize },
    #[error("map does not commute with `{op}` at {args:?}")]
    NotHomomorphism { op: String, args: Vec<usize> },
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("congruences live on different algebras")]
    AlgebraMismatch,
    #[error("maps have different codomains")]
    CodomainMismatch,
    #[error("partition is not compatible with `{0}`")]
    NotCongruence(String),
    #[error("carrier of size {n} exceeds cap {cap}")]
    CarrierTooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Order(#[from] OrderError),
}

pub type Result<T> = std::result::Result<T, AlgError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    ops: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(ops: &[(&str, usize)]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (name, _) in ops {
            if !seen.insert(*name) {
                return Err(AlgError::DuplicateOp(name.to_string()));
            }
        }
        Ok(Signature { ops: ops.iter().map(|(s, a)| (s.to_string(), *a)).collect() })
    }

    pub fn empty() -> Self {
        Signature { ops: Vec::new() }
    }

    pub fn ops(&self) -> &[(String, usize)] {
        &self.ops
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|(s, _)| s == name)
    }
}

/// An algebra given by operation tables. A table of arity `k` is flattened
/// row-major: the entry for `(t0, .., tk-1)` sits at `Σ ti·n^(k-1-i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinAlgebra {
    sig: Signature,
    n: usize,
    tables: Vec<Vec<usize>>,
}

fn table_len(n: usize, arity: usize) -> usize {
    n.pow(arity as u32)
}

/// All tuples of length `k` over `0..n`, in row-major order.
fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = table_len(n, k);
    (0..total).map(move |mut code| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        t
    })
}

impl FinAlgebra {
    pub fn new(sig: Signature, n: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if tables.len() != sig.ops.len() {
            return Err(AlgError::TableShape {
                op: "<signature>".into(),
                expected: sig.ops.len(),
                got: tables.len(),
            });
        }
        for ((name, arity), t) in sig.ops.iter().zip(&tables) {
            if n == 0 && *arity == 0 {
                return Err(AlgError::EmptyWithConstants(name.clone()));
            }
            let expected = table_len(n, *arity);
            if t.len() != expected {
                return Err(AlgError::TableShape { op: name.clone(), expected, got: t.len() });
            }
            if let Some(&value) = t.iter().find(|&&v| v >= n) {
                return Err(AlgError::EntryOutOfRange { op: name.clone(), value });
            }
        }
        Ok(FinAlgebra { sig, n, tables })
    }

    /// A bare set of `n` elements.
    pub fn set(n: usize) -> Self {
        FinAlgebra { sig: Signature::empty(), n, tables: Vec::new() }
    }

    /// Builds tables from closures, one per operation.
    #[allow(clippy::type_complexity)]
    pub fn from_fns(sig: Signature, n: usize, fns: &[&dyn Fn(&[usize]) -> usize]) -> Result<Self> {
        let tables = sig
            .ops
            .iter()
            .zip(fns)
            .map(|((_, k), f)| tuples(n, *k).map(|t| f(&t)).collect())
            .collect();
        Self::new(sig, n, tables)
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self, op: usize) -> &[usize] {
        &self.tables[op]
    }

    pub fn arity(&self, op: usize) -> usize {
        self.sig.ops[op].1
    }

    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let idx = args.iter().fold(0, |acc, &a| acc * self.n + a);
        self.tables[op][idx]
    }

    pub fn apply_named(&self, name: &str, args: &[usize]) -> usize {
        let op = self.sig.position(name).unwrap_or_else(|| panic!("no operation `{name}`"));
        self.apply(op, args)
    }

    /// Componentwise product; the pair `(a, b)` has index `a·|B| + b`.
    pub fn product(&self, other: &FinAlgebra) -> Result<FinAlgebra> {
        if self.sig != other.sig {
            return Err(AlgError::SignatureMismatch);
        }
        let m = other.n;
        let pairs: Vec<(usize, usize)> =
            (0..self.n).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
        Ok(self.subalgebra_of_product(other, &pairs))
    }

    /// The subalgebra of `self × other` on `pairs`, which must be closed
    /// under the operations; indices follow the order of `pairs`.
    fn subalgebra_of_product(&self, other: &FinAlgebra, pairs: &[(usize, usize)]) -> FinAlgebra {
        let index: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let n = pairs.len();
        let tables = self
            .sig
            .ops
            .iter()
            .enumerate()
            .map(|(op, (_, k))| {
                tuples(n, *k)
                    .map(|t| {
                        let left: Vec<usize> = t.iter().map(|&i| pairs[i].0).collect();
                        let right: Vec<usize> = t.iter().map(|&i| pairs[i].1).collect();
                        index[&(self.apply(op, &left), other.apply(op, &right))]
                    })
                    .collect()
            })
            .collect();
        FinAlgebra { sig: self.sig.clone(), n, tables }
    }

    /// The terminal algebra of this signature.
    pub fn terminal(sig: &Signature) -> FinAlgebra {
        let tables = sig.ops.iter().map(|_| vec![0]).collect();
        FinAlgebra { sig: sig.clone(), n: 1, tables }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    pub dom: FinAlgebra,
    pub cod: FinAlgebra,
    pub map: Vec<usize>,
}

impl Homomorphism {
    pub fn new(dom: FinAlgebra, cod: FinAlgebra, map: Vec<usize>) -> Result<Self> {
        if dom.sig != cod.sig {
            return Err(AlgError::SignatureMismatch);
        }
        if map.len() != dom.n {
            return Err(AlgError::MapShape { expected: dom.n, got: map.len() });
        }
        if let Some(&value) = map.iter().find(|&&v| v >= cod.n) {
            return Err(AlgError::EntryOutOfRange { op: "<map>".into(), value });
        }
        for (op, (name, k)) in dom.sig.ops.iter().enumerate() {
            for t in tuples(dom.n, *k) {
                let image: Vec<usize> = t.iter().map(|&a| map[a]).collect();
                if map[dom.apply(op, &t)] != cod.apply(op, &image) {
                    return Err(AlgError::NotHomomorphism { op: name.clone(), args: t });
                }
            }
        }
        Ok(Homomorphism { dom, cod, map })
    }

    pub fn identity(a: &FinAlgebra) -> Self {
        Homomorphism { dom: a.clone(), cod: a.clone(), map: (0..a.n).collect() }
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod.n];
        for &v in &self.map {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.cod.n];
        self.map.iter().all(|&v| !std::mem::replace(&mut hit[v], true))
    }

    pub fn is_iso(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        assert_eq!(self.cod, other.dom, "composable maps");
        Homomorphism {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            map: self.map.iter().map(|&a| other.map[a]).collect(),
        }
    }
}

/// An equivalence relation in canonical form: each element maps to the least
/// element of its block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    leaders: Vec<usize>,
}

impl Congruence {
    pub fn diagonal(n: usize) -> Self {
        Congruence { leaders: (0..n).collect() }
    }

    pub fn all(n: usize) -> Self {
        Congruence { leaders: vec![0; n] }
    }

    /// Canonicalises any labelling of blocks.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first: HashMap<usize, usize> = HashMap::new();
        let leaders = labels.iter().enumerate().map(|(i, l)| *first.entry(*l).or_insert(i)).collect();
        Congruence { leaders }
    }

    pub fn from_blocks(n: usize, blocks: &[&[usize]]) -> Self {
        let mut labels: Vec<usize> = (0..n).map(|i| n + i).collect();
        for (b, block) in blocks.iter().enumerate() {
            for &x in *block {
                labels[x] = b;
            }
        }
        Self::from_labels(&labels)
    }

    pub fn n(&self) -> usize {
        self.leaders.len()
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn leader(&self, x: usize) -> usize {
        self.leaders[x]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.leaders[a] == self.leaders[b]
    }

    pub fn block_count(&self) -> usize {
        self.leaders.iter().enumerate().filter(|(i, l)| *i == **l).count()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n()];
        for x in 0..self.n() {
            let l = self.leaders[x];
            if slot[l] == usize::MAX {
                slot[l] = out.len();
                out.push(Vec::new());
            }
            out[slot[l]].push(x);
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        self.leaders.iter().enumerate().all(|(i, &l)| i == l)
    }

    pub fn is_all(&self) -> bool {
        self.leaders.iter().all(|&l| l == 0)
    }

    /// `self ⊆ other` as relations.
    pub fn le(&self, other: &Congruence) -> bool {
        (0..self.n()).all(|x| other.related(x, self.leaders[x]))
    }

    pub fn meet(&self, other: &Congruence) -> Congruence {
        let labels: Vec<usize> =
            (0..self.n()).map(|x| self.leaders[x] * self.n() + other.leaders[x]).collect();
        Congruence::from_labels(&labels)
    }

    pub fn to_relation(&self) -> Relation {
        let n = self.n();
        let pairs = (0..n * n).map(|i| self.related(i / n, i % n)).collect();
        Relation { n, pairs }
    }

    /// Is the partition compatible with every operation of `a`?
    pub fn compatible_with(&self, a: &FinAlgebra) -> std::result::Result<(), String> {
        for (op, (name, k)) in a.sig.ops.iter().enumerate() {
            for t in tuples(a.n, *k) {
                let base = a.apply(op, &t);
                for i in 0..*k {
                    let mut s = t.clone();
                    s[i] = self.leaders[t[i]];
                    if !self.related(base, a.apply(op, &s)) {
                        return Err(name.clone());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn display(&self) -> String {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        blocks.join("|")
    }
}

/// An arbitrary binary relation on a carrier, as an `n×n` matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub n: usize,
    pub pairs: Vec<bool>,
}

impl Relation {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs[a * self.n + b]
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn from_leaders(leaders: &[usize]) -> Self {
        Dsu { parent: leaders.to_vec() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root so that roots stay block minima.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn into_congruence(mut self) -> Congruence {
        let leaders = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Congruence { leaders }
    }
}

/// Closes `start ∪ pairs` to a congruence. Only edges that merge two blocks
/// are propagated through the operations: they span every block, so their
/// images suffice for compatibility.
fn close(a: &FinAlgebra, start: &Congruence, pairs: &[(usize, usize)]) -> Congruence {
    let mut dsu = Dsu::from_leaders(start.leaders());
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for x in 0..a.n {
        if start.leader(x) != x {
            queue.push((start.leader(x), x));
        }
    }
    for &(x, y) in pairs {
        if dsu.union(x, y) {
            queue.push((x, y));
        }
    }
    let n = a.n;
    let push = |dsu: &mut Dsu, queue: &mut Vec<(usize, usize)>, fx: usize, fy: usize| {
        if dsu.union(fx, fy) {
            queue.push((fx, fy));
        }
    };
    while let Some((x, y)) = queue.pop() {
        for (op, (_, k)) in a.sig.ops.iter().enumerate() {
            let table = &a.tables[op];
            match *k {
                0 => continue,
                1 => {
                    push(&mut dsu, &mut queue, table[x], table[y]);
                    continue;
                }
                2 => {
                    for r in 0..n {
                        push(&mut dsu, &mut queue, table[x * n + r], table[y * n + r]);
                        push(&mut dsu, &mut queue, table[r * n + x], table[r * n + y]);
                    }
                    continue;
                }
                _ => {}
            }
            for rest in tuples(a.n, k - 1) {
                for i in 0..*k {
                    let mut t = Vec::with_capacity(*k);
                    t.extend_from_slice(&rest[..i]);
                    t.push(x);
                    t.extend_from_slice(&rest[i..]);
                    let fx = a.apply(op, &t);
                    t[i] = y;
                    let fy = a.apply(op, &t);
                    push(&mut dsu, &mut queue, fx, fy);
                }
            }
        }
    }
    dsu.into_congruence()
}

/// The least congruence containing `pairs`.
pub fn congruence_generated(a: &FinAlgebra, pairs: &[(usize, usize)]) -> Congruence {
    close(a, &Congruence::diagonal(a.n), pairs)
}

/// `θ1 ∨ θ2` in the congruence lattice.
pub fn congruence_join(a: &FinAlgebra, t1: &Congruence, t2: &Congruence) -> Congruence {
    let pairs: Vec<(usize, usize)> = (0..a.n).map(|x| (x, t2.leader(x))).collect();
    close(a, t1, &pairs)
}

/// Validates a partition (given by any block labels) as a congruence.
pub fn congruence_from_labels(a: &FinAlgebra, labels: &[usize]) -> Result<Congruence> {
    if labels.len() != a.n {
        return Err(AlgError::MapShape { expected: a.n, got: labels.len() });
    }
    let c = Congruence::from_labels(labels);
    c.compatible_with(a).map_err(AlgError::NotCongruence)?;
    Ok(c)
}

pub fn kernel_congruence(h: &Homomorphism) -> Congruence {
    Congruence::from_labels(&h.map)
}

/// The quotient `A/θ` with blocks indexed by ascending leader, and the
/// projection.
pub fn quotient(a: &FinAlgebra, theta: &Congruence) -> (FinAlgebra, Homomorphism) {
    let mut index = vec![usize::MAX; a.n];
    let mut reps = Vec::new();
    for x in 0..a.n {
        if theta.leader(x) == x {
            index[x] = reps.len();
            reps.push(x);
        }
    }
    let proj: Vec<usize> = (0..a.n).map(|x| index[theta.leader(x)]).collect();
    let m = reps.len();
    let tables = a
        .sig
        .ops
        .iter()
        .enumerate()
        .map(|(op, (_, k))| {
            tuples(m, *k)
                .map(|t| {
                    let args: Vec<usize> = t.iter().map(|&i| reps[i]).collect();
                    proj[a.apply(op, &args)]
                })
                .collect()
        })
        .collect();
    let q = FinAlgebra { sig: a.sig.clone(), n: m, tables };
    let h = Homomorphism { dom: a.clone(), cod: q.clone(), map: proj };
    (q, h)
}

/// Factors `h = m ∘ e` with `e` onto the image and `m` injective.
pub fn image_factorization(h: &Homomorphism) -> (Homomorphism, Homomorphism) {
    let (img, e) = quotient(&h.dom, &kernel_congruence(h));
    let mut m = vec![0; img.n];
    for x in 0..h.dom.n {
        m[e.map[x]] = h.map[x];
    }
    let m = Homomorphism { dom: img, cod: h.cod.clone(), map: m };
    (e, m)
}

/// The unique `g` with `f = g ∘ q`, when `ker q ⊆ ker f`.
pub fn factor_through(q: &Homomorphism, f: &Homomorphism) -> Option<Homomorphism> {
    if q.dom != f.dom || !q.is_surjective() {
        return None;
    }
    let mut g = vec![usize::MAX; q.cod.n];
    for x in 0..q.dom.n {
        let slot = &mut g[q.map[x]];
        if *slot == usize::MAX {
            *slot = f.map[x];
        } else if *slot != f.map[x] {
            return None;
        }
    }
    Homomorphism::new(q.cod.clone(), f.cod.clone(), g).ok()
}

#[derive(Clone, Debug)]
pub struct ConLattice {
    pub lattice: FinLattice,
    pub congruences: Vec<Congruence>,
    index: HashMap<Congruence, usize>,
}

impl ConLattice {
    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn diagonal(&self) -> usize {
        self.lattice.bot()
    }

    pub fn all(&self) -> usize {
        self.lattice.top()
    }
}

/// Restricted growth strings of length `n`, i.e. all set partitions.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn go(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            go(i + 1, max.max(b), cur, out);
        }
    }
    if n == 0 {
        out.push(Vec::new());
    } else {
        go(1, 0, &mut cur, &mut out);
    }
    out
}

/// Congruences by filtering every partition of the carrier.
pub fn congruences_by_partitions(a: &FinAlgebra) -> Result<Vec<Congruence>> {
    if a.n > PARTITION_CAP {
        return Err(AlgError::CarrierTooLarge { n: a.n, cap: PARTITION_CAP });
    }
    let mut out: Vec<Congruence> = partitions(a.n)
        .iter()
        .map(|p| Congruence::from_labels(p))
        .filter(|c| c.compatible_with(a).is_ok())
        .collect();
    sort_canonical(&mut out);
    Ok(out)
}

/// Congruences as the join-closure of the principal ones.
pub fn congruences_by_principals(a: &FinAlgebra, max_count: usize) -> Result<Vec<Congruence>> {
    if a.n > CARRIER_CAP {
        return Err(AlgError::CarrierTooLarge { n: a.n, cap: CARRIER_CAP });
    }
    let mut seen: std::collections::HashSet<Congruence> = std::collections::HashSet::new();
    let mut all = vec![Congruence::diagonal(a.n)];
    seen.insert(all[0].clone());
    let mut principals = Vec::new();
    for x in 0..a.n {
        for y in x + 1..a.n {
            let c = congruence_generated(a, &[(x, y)]);
            if seen.insert(c.clone()) {
                principals.push(c.clone());
                all.push(c);
            }
        }
    }
    let mut frontier = all.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in &frontier {
            for p in &principals {
                let j = congruence_join(a, c, p);
                if seen.insert(j.clone()) {
                    if seen.len() > max_count {
                        return Err(AlgError::CarrierTooLarge { n: seen.len(), cap: max_count });
                    }
                    next.push(j.clone());
                    all.push(j);
                }
            }
        }
        frontier = next;
    }
    sort_canonical(&mut all);
    Ok(all)
}

/// Most blocks first, then by leader array; `Δ` comes first and `∇` last.
fn sort_canonical(cs: &mut [Congruence]) {
    cs.sort_by(|x, y| {
        y.block_count().cmp(&x.block_count()).then_with(|| x.leaders.cmp(&y.leaders))
    });
}

/// `Con(A)` ordered by inclusion, with meets checked against intersection
/// and joins against the generated congruence.
pub fn congruence_lattice(a: &FinAlgebra) -> Result<ConLattice> {
    let congruences = if a.n <= PARTITION_CAP {
        congruences_by_partitions(a)?
    } else {
        congruences_by_principals(a, MAX_ELEMENTS)?
    };
    lattice_of_congruences(a, congruences)
}

/// Orders a list of congruences (assumed closed under meet and join) and
/// validates the lattice operations.
pub fn lattice_of_congruences(a: &FinAlgebra, congruences: Vec<Congruence>) -> Result<ConLattice> {
    if congruences.len() > MAX_ELEMENTS {
        return Err(AlgError::Order(OrderError::TooLarge(congruences.len())));
    }
    let m: Vec<Vec<bool>> =
        congruences.iter().map(|x| congruences.iter().map(|y| x.le(y)).collect()).collect();
    let lattice = check_lattice(check_poset(&m)?)?;
    let index: HashMap<Congruence, usize> =
        congruences.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    for i in 0..congruences.len() {
        for j in 0..congruences.len() {
            let meet = congruences[i].meet(&congruences[j]);
            let join = congruence_join(a, &congruences[i], &congruences[j]);
            if index.get(&meet) != Some(&lattice.meet(i, j)) {
                return Err(OrderError::NoMeet(i, j).into());
            }
            if index.get(&join) != Some(&lattice.join(i, j)) {
                return Err(OrderError::NoJoin(i, j).into());
            }
        }
    }
    Ok(ConLattice { lattice, congruences, index })
}

/// `θ1 ∘ θ2 = {(a, c) : ∃b. a θ1 b ∧ b θ2 c}`.
pub fn compose_relations(t1: &Congruence, t2: &Congruence) -> Result<Relation> {
    if t1.n() != t2.n() {
        return Err(AlgError::AlgebraMismatch);
    }
    let n = t1.n();
    let mut pairs = vec![false; n * n];
    for x in 0..n {
        for y in 0..n {
            if t1.related(x, y) {
                for z in 0..n {
                    if t2.related(y, z) {
                        pairs[x * n + z] = true;
                    }
                }
            }
        }
    }
    Ok(Relation { n, pairs })
}

pub fn commute(t1: &Congruence, t2: &Congruence) -> Result<bool> {
    Ok(compose_relations(t1, t2)? == compose_relations(t2, t1)?)
}

/// The pushout of `A/θ1 ← A → A/θ2`, realised as `A/(θ1 ∨ θ2)`.
#[derive(Clone, Debug)]
pub struct QuotientPushout {
    pub q1: Homomorphism,
    pub q2: Homomorphism,
    pub apex: FinAlgebra,
    pub eta1: Homomorphism,
    pub eta2: Homomorphism,
}

pub fn pushout_of_quotients(a: &FinAlgebra, t1: &Congruence, t2: &Congruence) -> QuotientPushout {
    let (_, q1) = quotient(a, t1);
    let (_, q2) = quotient(a, t2);
    let (apex, q) = quotient(a, &congruence_join(a, t1, t2));
    let eta1 = factor_through(&q1, &q).expect("θ1 ⊆ θ1 ∨ θ2");
    let eta2 = factor_through(&q2, &q).expect("θ2 ⊆ θ1 ∨ θ2");
    QuotientPushout { q1, q2, apex, eta1, eta2 }
}

#[derive(Clone, Debug)]
pub struct Pullback {
    pub apex: FinAlgebra,
    /// Pairs `(b, c)` with `h1(b) = h2(c)`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    pub p1: Homomorphism,
    pub p2: Homomorphism,
}

impl Pullback {
    /// The map `X → apex` induced by `f1: X → B`, `f2: X → C`.
    pub fn mediate(&self, f1: &Homomorphism, f2: &Homomorphism) -> Option<Homomorphism> {
        let index: HashMap<(usize, usize), usize> =
            self.pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let map: Option<Vec<usize>> =
            (0..f1.dom.n).map(|x| index.get(&(f1.map[x], f2.map[x])).copied()).collect();
        Homomorphism::new(f1.dom.clone(), self.apex.clone(), map?).ok()
    }
}

pub fn pullback(h1: &Homomorphism, h2: &Homomorphism) -> Result<Pullback> {
    if h1.cod != h2.cod {
        return Err(AlgError::CodomainMismatch);
    }
    let mut pairs = Vec::new();
    for b in 0..h1.dom.n {
        for c in 0..h2.dom.n {
            if h1.map[b] == h2.map[c] {
                pairs.push((b, c));
            }
        }
    }
    let apex = h1.dom.subalgebra_of_product(&h2.dom, &pairs);
    let p1 = Homomorphism { dom: apex.clone(), cod: h1.dom.clone(), map: pairs.iter().map(|p| p.0).collect() };
    let p2 = Homomorphism { dom: apex.clone(), cod: h2.dom.clone(), map: pairs.iter().map(|p| p.1).collect() };
    Ok(Pullback { apex, pairs, p1, p2 })
}

/// The four equivalent formulations of "θ1 and θ2 commute".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutingReport {
    pub composites_equal: bool,
    pub sup_kernel_is_composite: bool,
    pub regular_pushout: bool,
    pub quotient_pullback: bool,
}

impl CommutingReport {
    pub fn agree(&self) -> bool {
        let v = self.composites_equal;
        self.sup_kernel_is_composite == v && self.regular_pushout == v && self.quotient_pullback == v
    }

    pub fn value(&self) -> bool {
        self.composites_equal
    }
}

pub fn commuting_equivalences_report(
    a: &FinAlgebra,
    t1: &Congruence,
    t2: &Congruence,
) -> Result<CommutingReport> {
    let composites_equal = commute(t1, t2)?;
    let po = pushout_of_quotients(a, t1, t2);
    let sup = kernel_congruence(&po.q1.then(&po.eta1));
    let sup_kernel_is_composite = sup.to_relation() == compose_relations(t1, t2)?;
    let pb = pullback(&po.eta1, &po.eta2)?;
    let regular_pushout = pb.mediate(&po.q1, &po.q2).expect("square commutes").is_surjective();
    let (_, q12) = quotient(a, &t1.meet(t2));
    let r1 = factor_through(&q12, &po.q1).expect("θ1 ∧ θ2 ⊆ θ1");
    let r2 = factor_through(&q12, &po.q2).expect("θ1 ∧ θ2 ⊆ θ2");
    let quotient_pullback = pb.mediate(&r1, &r2).expect("square commutes").is_iso();
    Ok(CommutingReport { composites_equal, sup_kernel_is_composite, regular_pushout, quotient_pullback })
}

/// Searches for an isomorphism `a → b` by backtracking.
pub fn find_isomorphism(a: &FinAlgebra, b: &FinAlgebra) -> Option<Homomorphism> {
    if a.sig != b.sig || a.n != b.n {
        return None;
    }
    let n = a.n;
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn consistent(a: &FinAlgebra, b: &FinAlgebra, map: &[usize], upto: usize) -> bool {
        for (op, (_, k)) in a.sig.ops.iter().enumerate() {
            for t in tuples(upto, *k) {
                if *k > 0 && !t.contains(&(upto - 1)) {
                    continue;
                }
                let r = a.apply(op, &t);
                if map[r] == usize::MAX {
                    continue;
                }
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                if b.apply(op, &img) != map[r] {
                    return false;
                }
            }
        }
        true
    }
    fn go(a: &FinAlgebra, b: &FinAlgebra, i: usize, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if i == a.n {
            return (1..=a.n).all(|u| consistent(a, b, map, u));
        }
        for j in 0..b.n {
            if used[j] {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if (1..=i + 1).all(|u| consistent(a, b, map, u)) && go(a, b, i + 1, map, used) {
                return true;
            }
            used[j] = false;
            map[i] = usize::MAX;
        }
        false
    }
    if go(a, b, 0, &mut map, &mut used) {
        Homomorphism::new(a.clone(), b.clone(), map).ok()
    } else {
        None
    }
}

/// Every homomorphism `a → b`, as maps in lexicographic order.
pub fn all_homomorphisms(a: &FinAlgebra, b: &FinAlgebra) -> Vec<Vec<usize>> {
    if a.sig != b.sig {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut map = vec![0usize; a.n];
    // Checks every tuple over `0..=i` whose value is also in `0..=i`.
    fn ok_upto(a: &FinAlgebra, b: &FinAlgebra, map: &[usize], i: usize) -> bool {
        for (op, (_, k)) in a.sig.ops.iter().enumerate() {
            for t in tuples(i + 1, *k) {
                if *k > 0 && !t.contains(&i) {
                    continue;
                }
                let r = a.apply(op, &t);
                if r > i {
                    continue;
                }
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                if b.apply(op, &img) != map[r] {
                    return false;
                }
            }
        }
        // Values landing on `i` from earlier tuples.
        for (op, (_, k)) in a.sig.ops.iter().enumerate() {
            for t in tuples(i, *k) {
                if a.apply(op, &t) == i {
                    let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                    if b.apply(op, &img) != map[i] {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn go(a: &FinAlgebra, b: &FinAlgebra, i: usize, map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == a.n {
            out.push(map.clone());
            return;
        }
        for j in 0..b.n {
            map[i] = j;
            if ok_upto(a, b, map, i) {
                go(a, b, i + 1, map, out);
            }
        }
    }
    go(a, b, 0, &mut map, &mut out);
    out
}

/// Parses the text form:
///
/// ```text
/// algebra 2
/// sig mul/2 inv/1 e/0
/// 0 1 1 0
/// 0 1
/// 0
/// ```
///
/// Tables follow the signature order, row-major, and may span lines.
pub fn parse_algebra(text: &str) -> std::result::Result<FinAlgebra, ParseError> {
    let perr = |line: usize, msg: String| ParseError { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["algebra", n] => n.parse().map_err(|_| perr(hl, "bad carrier size".into()))?,
        _ => return Err(perr(hl, "expected `algebra <n>`".into())),
    };
    let mut ops: Vec<(String, usize)> = Vec::new();
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut sig_line = hl;
    for (ln, l) in lines {
        if let Some(rest) = l.strip_prefix("sig") {
            sig_line = ln;
            for w in rest.split_whitespace() {
                let (name, ar) = w.split_once('/').ok_or_else(|| perr(ln, format!("bad op `{w}`")))?;
                let ar: usize = ar.parse().map_err(|_| perr(ln, format!("bad arity in `{w}`")))?;
                ops.push((name.to_string(), ar));
            }
        } else {
            tokens.extend(l.split_whitespace().map(|t| (ln, t)));
        }
    }
    let names: Vec<(&str, usize)> = ops.iter().map(|(s, a)| (s.as_str(), *a)).collect();
    let sig = Signature::new(&names).map_err(|e| perr(sig_line, e.to_string()))?;
    let mut it = tokens.into_iter();
    let mut tables = Vec::new();
    for (name, k) in &ops {
        let len = table_len(n, *k);
        let mut t = Vec::with_capacity(len);
        for _ in 0..len {
            let (ln, tok) = it
                .next()
                .ok_or_else(|| perr(sig_line, format!("table for `{name}` is too short")))?;
            t.push(tok.parse().map_err(|_| perr(ln, format!("bad entry `{tok}`")))?);
        }
        tables.push(t);
    }
    if let Some((ln, _)) = it.next() {
        return Err(perr(ln, "trailing table entries".into()));
    }
    FinAlgebra::new(sig, n, tables).map_err(|e| perr(sig_line, e.to_string()))
}

pub fn algebra_to_text(a: &FinAlgebra) -> String {
    let mut s = format!("algebra {}\nsig", a.n);
    for (name, k) in &a.sig.ops {
        s.push_str(&format!(" {name}/{k}"));
    }
    s.push('\n');
    for t in &a.tables {
        let row: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// `Z/n` as a group with `mul/2 inv/1 e/0`.
pub fn cyclic_group(n: usize) -> FinAlgebra {
    group_from_mul(n, |a, b| (a + b) % n)
}

/// Group signature `mul/2 inv/1 e/0`.
pub fn group_signature() -> Signature {
    Signature::new(&[("mul", 2), ("inv", 1), ("e", 0)]).expect("distinct names")
}

/// Builds a group from its multiplication, with identity `0`.
pub fn group_from_mul(n: usize, mul: impl Fn(usize, usize) -> usize) -> FinAlgebra {
    let table: Vec<usize> = (0..n * n).map(|i| mul(i / n, i % n)).collect();
    let inv: Vec<usize> = (0..n)
        .map(|a| (0..n).find(|&b| table[a * n + b] == 0).expect("group has inverses"))
        .collect();
    FinAlgebra::new(group_signature(), n, vec![table, inv, vec![0]]).expect("group tables")
}

/// Meet-semilattice on a chain of `n` elements, `meet/2 = min`.
pub fn chain_semilattice(n: usize) -> FinAlgebra {
    let sig = Signature::new(&[("meet", 2)]).expect("one op");
    FinAlgebra::from_fns(sig, n, &[&|t: &[usize]| t[0].min(t[1])]).expect("semilattice")
}

/// A lattice as an algebra with `meet/2 join/2`.
pub fn lattice_algebra(l: &FinLattice) -> FinAlgebra {
    let sig = Signature::new(&[("meet", 2), ("join", 2)]).expect("two ops");
    FinAlgebra::from_fns(sig, l.n(), &[&|t: &[usize]| l.meet(t[0], t[1]), &|t: &[usize]| l.join(t[0], t[1])])
        .expect("lattice tables")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> FinAlgebra {
        cyclic_group(4)
    }

    #[test]
    fn signature_rejects_duplicates() {
        assert_eq!(Signature::new(&[("f", 1), ("f", 2)]), Err(AlgError::DuplicateOp("f".into())));
    }

    #[test]
    fn empty_algebra_needs_constant_free_signature() {
        assert!(FinAlgebra::new(Signature::new(&[("f", 1)]).unwrap(), 0, vec![vec![]]).is_ok());
        let sig = Signature::new(&[("c", 0)]).unwrap();
        assert!(matches!(FinAlgebra::new(sig, 0, vec![vec![]]), Err(AlgError::EmptyWithConstants(_))));
    }

    #[test]
    fn image_factorization_examples() {
        let s2 = chain_semilattice(2);
        let s3 = chain_semilattice(3);
        // Constant map onto the idempotent 1.
        let h = Homomorphism::new(s2.clone(), s3.clone(), vec![1, 1]).unwrap();
        let (e, m) = image_factorization(&h);
        assert_eq!(e.cod.n(), 1);
        assert!(e.is_surjective() && m.is_injective());
        assert_eq!(e.then(&m).map, h.map);
        let inc = Homomorphism::new(s2.clone(), s3, vec![0, 2]).unwrap();
        let (e, m) = image_factorization(&inc);
        assert!(e.is_iso());
        assert_eq!(m.map, vec![0, 2]);
        let id = Homomorphism::identity(&s2);
        let (e, m) = image_factorization(&id);
        assert_eq!(e.map, id.map);
        assert_eq!(m.map, id.map);
    }

    #[test]
    fn kernel_examples() {
        let (z2, q) = quotient(&z4(), &Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]));
        assert_eq!(z2, cyclic_group(2));
        assert_eq!(kernel_congruence(&q).display(), "0,2|1,3");
        let inj = Homomorphism::identity(&z4());
        assert!(kernel_congruence(&inj).is_diagonal());
        let t = FinAlgebra::set(1);
        let c = Homomorphism::new(FinAlgebra::set(3), t, vec![0, 0, 0]).unwrap();
        assert!(kernel_congruence(&c).is_all());
    }

    #[test]
    fn generated_examples() {
        assert!(congruence_generated(&z4(), &[]).is_diagonal());
        assert_eq!(congruence_generated(&z4(), &[(0, 2)]).display(), "0,2|1,3");
        assert!(congruence_generated(&z4(), &[(0, 1)]).is_all());
    }

    #[test]
    fn generated_matches_fixpoint_closure() {
        // Naive closure: repeat over all related pairs until nothing changes.
        fn naive(a: &FinAlgebra, pairs: &[(usize, usize)]) -> Congruence {
            let n = a.n();
            let mut rel = vec![false; n * n];
            for i in 0..n {
                rel[i * n + i] = true;
            }
            for &(x, y) in pairs {
                rel[x * n + y] = true;
                rel[y * n + x] = true;
            }
            loop {
                let mut changed = false;
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            if rel[x * n + y] && rel[y * n + z] && !rel[x * n + z] {
                                rel[x * n + z] = true;
                                changed = true;
                            }
                        }
                    }
                }
                for (op, (_, k)) in a.sig().ops().iter().enumerate() {
                    for s in tuples(n, *k) {
                        for t in tuples(n, *k) {
                            if s.iter().zip(&t).all(|(&p, &q)| rel[p * n + q]) {
                                let (u, v) = (a.apply(op, &s), a.apply(op, &t));
                                if !rel[u * n + v] {
                                    rel[u * n + v] = true;
                                    changed = true;
                                }
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let labels: Vec<usize> = (0..n).map(|x| (0..n).find(|&y| rel[x * n + y]).unwrap()).collect();
            Congruence::from_labels(&labels)
        }
        let algs = [z4(), cyclic_group(6), chain_semilattice(4), lattice_algebra(&FinLattice::n5())];
        for a in &algs {
            for x in 0..a.n() {
                for y in 0..a.n() {
                    assert_eq!(congruence_generated(a, &[(x, y)]), naive(a, &[(x, y)]));
                }
            }
        }
    }

    #[test]
    fn congruence_lattice_examples() {
        assert_eq!(congruence_lattice(&FinAlgebra::set(2)).unwrap().congruences.len(), 2);
        let p3 = congruence_lattice(&FinAlgebra::set(3)).unwrap();
        assert_eq!(p3.congruences.len(), 5);
        let c = congruence_lattice(&z4()).unwrap();
        let shown: Vec<String> = c.congruences.iter().map(|x| x.display()).collect();
        assert_eq!(shown, vec!["0|1|2|3", "0,2|1,3", "0,1,2,3"]);
        assert!(c.lattice.poset().covers().len() == 2);
        assert!(c.congruences[c.diagonal()].is_diagonal());
        assert!(c.congruences[c.all()].is_all());
    }

    #[test]
    fn both_congruence_routes_agree() {
        let algs = [
            FinAlgebra::set(4),
            z4(),
            cyclic_group(6),
            cyclic_group(2).product(&cyclic_group(4)).unwrap(),
            chain_semilattice(5),
            lattice_algebra(&FinLattice::m3()),
        ];
        for a in &algs {
            assert_eq!(congruences_by_partitions(a).unwrap(), congruences_by_principals(a, 64).unwrap());
        }
    }

    #[test]
    fn composition_examples() {
        let t1 = Congruence::from_blocks(3, &[&[0, 1], &[2]]);
        let t2 = Congruence::from_blocks(3, &[&[0], &[1, 2]]);
        let r = compose_relations(&t1, &t2).unwrap();
        assert!(r.contains(0, 2));
        assert!(!r.contains(2, 0));
        assert!(!commute(&t1, &t2).unwrap());
        let d = Congruence::diagonal(3);
        assert_eq!(compose_relations(&d, &t1).unwrap(), t1.to_relation());
        assert!(commute(&d, &t1).unwrap());
        assert_eq!(compose_relations(&d, &Congruence::diagonal(2)), Err(AlgError::AlgebraMismatch));
    }

    #[test]
    fn quotient_examples() {
        let a = z4();
        let (q, h) = quotient(&a, &Congruence::diagonal(4));
        assert_eq!(q, a);
        assert!(h.is_iso());
        let (q, _) = quotient(&a, &Congruence::all(4));
        assert_eq!(q.n(), 1);
        let (q, _) = quotient(&FinAlgebra::set(0), &Congruence::all(0));
        assert_eq!(q.n(), 0);
    }

    #[test]
    fn pushout_examples() {
        let a = z4();
        let half = Congruence::from_blocks(4, &[&[0, 2], &[1, 3]]);
        let po = pushout_of_quotients(&a, &half, &Congruence::diagonal(4));
        assert_eq!(po.apex.n(), 2);
        assert!(po.eta1.is_iso());
        let po = pushout_of_quotients(&a, &half, &half);
        assert_eq!(po.apex, cyclic_group(2));
        let t1 = Congruence::from_blocks(3, &[&[0, 1], &[2]]);
        let t2 = Congruence::from_blocks(3, &[&[0], &[1, 2]]);
        let po = pushout_of_quotients(&FinAlgebra::set(3), &t1, &t2);
        assert_eq!(po.apex.n(), 1);
        assert_eq!(po.q1.then(&po.eta1).map, po.q2.then(&po.eta2).map);
    }

    #[test]
    fn pullback_examples() {
        let z2 = cyclic_group(2);
        let one = FinAlgebra::terminal(z2.sig());
        let bang = Homomorphism::new(z2.clone(), one, vec![0, 0]).unwrap();
        let pb = pullback(&bang, &bang).unwrap();
        assert_eq!(pb.apex, z2.product(&z2).unwrap());
        let id = Homomorphism::identity(&z2);
        let pb = pullback(&id, &id).unwrap();
        assert_eq!(pb.pairs, vec![(0, 0), (1, 1)]);
        assert!(pb.p1.is_iso());
        let z4id = Homomorphism::identity(&z4());
        assert_eq!(pullback(&id, &z4id).unwrap_err(), AlgError::CodomainMismatch);
    }

    #[test]
    fn commuting_report_examples() {
        let t1 = Congruence::from_blocks(3, &[&[0, 1], &[2]]);
        let t2 = Congruence::from_blocks(3, &[&[0], &[1, 2]]);
        let r = commuting_equivalences_report(&FinAlgebra::set(3), &t1, &t2).unwrap();
        assert_eq!(
            r,
            CommutingReport {
                composites_equal: false,
                sup_kernel_is_composite: false,
                regular_pushout: false,
                quotient_pullback: false
            }
        );
        let r = commuting_equivalences_report(&FinAlgebra::set(3), &t1, &t1).unwrap();
        assert!(r.agree() && r.value());
        let g = cyclic_group(2).product(&cyclic_group(2)).unwrap();
        let con = congruence_lattice(&g).unwrap();
        for x in &con.congruences {
            for y in &con.congruences {
                let r = commuting_equivalences_report(&g, x, y).unwrap();
                assert!(r.agree() && r.value());
            }
        }
    }

    #[test]
    fn isomorphism_search() {
        let z6 = cyclic_group(6);
        let z23 = cyclic_group(2).product(&cyclic_group(3)).unwrap();
        assert!(find_isomorphism(&z6, &z23).is_some());
        let z22 = cyclic_group(2).product(&cyclic_group(2)).unwrap();
        assert!(find_isomorphism(&z4(), &z22).is_none());
    }

    #[test]
    fn homomorphism_enumeration_matches_brute_force() {
        let cases = [
            (cyclic_group(4), cyclic_group(2)),
            (cyclic_group(2), cyclic_group(4)),
            (chain_semilattice(3), chain_semilattice(2)),
            (FinAlgebra::set(2), FinAlgebra::set(3)),
            (lattice_algebra(&FinLattice::chain(3)), lattice_algebra(&FinLattice::boolean(2))),
        ];
        for (a, b) in &cases {
            let fast = all_homomorphisms(a, b);
            let brute: Vec<Vec<usize>> = tuples(b.n(), a.n())
                .filter(|m| Homomorphism::new(a.clone(), b.clone(), m.clone()).is_ok())
                .collect();
            assert_eq!(fast, brute);
        }
        assert_eq!(all_homomorphisms(&cyclic_group(4), &cyclic_group(4)).len(), 4);
    }

    #[test]
    fn text_round_trip() {
        let a = z4();
        assert_eq!(parse_algebra(&algebra_to_text(&a)).unwrap(), a);
        let e = parse_algebra("algebra 2\nsig f/1\n0\n").unwrap_err();
        assert!(e.msg.contains("too short"));
        let e = parse_algebra("algebra 2\nsig f/1\n0 5\n").unwrap_err();
        assert!(e.msg.contains("outside"));
    }
}
