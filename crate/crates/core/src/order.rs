//! Finite posets and lattices, with way-below, Scott-open filters, the
//! Lawson dual, Wilker's condition and frame normality.
//!
//! Elements are dense indices `0..n` and subsets are `u64` bitmasks, so every
//! structure here has at most 64 elements.

use std::fmt::Write as _;

use thiserror::Error;

pub const MAX_ELEMENTS: usize = 64;

/// Largest carrier on which subsets are enumerated literally.
pub const SUBSET_CAP: usize = 16;

/// Largest carrier on which the finite-subcover form of way-below is
/// evaluated (it walks all pairs `X ⊆ Y`, i.e. `3^n` steps).
pub const SUBCOVER_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("order matrix is not square")]
    NotSquare,
    #[error("{0} elements exceeds the limit of {MAX_ELEMENTS}")]
    TooLarge(usize),
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("not reflexive at {0}")]
    NotReflexive(usize),
    #[error("not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("not transitive at ({0}, {1}, {2})")]
    NotTransitive(usize, usize, usize),
    #[error("no meet for ({0}, {1})")]
    NoMeet(usize, usize),
    #[error("no join for ({0}, {1})")]
    NoJoin(usize, usize),
    #[error("no bottom element")]
    NoBottom,
    #[error("no top element")]
    NoTop,
    #[error("not distributive at ({0}, {1}, {2})")]
    NotDistributive(usize, usize, usize),
    #[error("{what}: size {n} exceeds cap {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("Lawson dual is inconsistent: {0}")]
    LawsonNotLattice(String),
    #[error("finite collapse failed: {0}")]
    CollapseFailed(String),
}

pub type Result<T> = std::result::Result<T, OrderError>;

#[inline]
pub fn bit(i: usize) -> u64 {
    1u64 << i
}

pub fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the indices set in `mask`, ascending.
pub fn members(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

pub fn mask_of(items: &[usize]) -> u64 {
    items.iter().fold(0, |m, &i| m | bit(i))
}

pub fn format_set(mask: u64) -> String {
    let items: Vec<String> = members(mask).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// A finite partial order given by its order matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinPoset {
    n: usize,
    leq: Vec<bool>,
    up: Vec<u64>,
    down: Vec<u64>,
}

/// Validates an order matrix, reporting the first violated axiom.
pub fn check_poset(matrix: &[Vec<bool>]) -> Result<FinPoset> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(OrderError::NotSquare);
    }
    if n > MAX_ELEMENTS {
        return Err(OrderError::TooLarge(n));
    }
    for i in 0..n {
        if !matrix[i][i] {
            return Err(OrderError::NotReflexive(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if matrix[i][j] && matrix[j][i] {
                return Err(OrderError::NotAntisymmetric(i, j));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !matrix[i][j] {
                continue;
            }
            for k in 0..n {
                if matrix[j][k] && !matrix[i][k] {
                    return Err(OrderError::NotTransitive(i, j, k));
                }
            }
        }
    }
    let leq: Vec<bool> = matrix.iter().flatten().copied().collect();
    Ok(FinPoset::from_validated(n, leq))
}

impl FinPoset {
    fn from_validated(n: usize, leq: Vec<bool>) -> Self {
        let mut up = vec![0u64; n];
        let mut down = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if leq[i * n + j] {
                    up[i] |= bit(j);
                    down[j] |= bit(i);
                }
            }
        }
        FinPoset { n, leq, up, down }
    }

    /// Builds the reflexive-transitive closure of `pairs` (read as `a ≤ b`)
    /// and validates it.
    pub fn from_relation(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(OrderError::TooLarge(n));
        }
        let mut m = vec![vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= n {
                return Err(OrderError::IndexOutOfRange(a));
            }
            if b >= n {
                return Err(OrderError::IndexOutOfRange(b));
            }
            m[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if m[i][k] {
                    for j in 0..n {
                        if m[k][j] {
                            m[i][j] = true;
                        }
                    }
                }
            }
        }
        check_poset(&m)
    }

    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_relation(n, &pairs).expect("chain is a poset")
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_relation(n, &[]).expect("antichain is a poset")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.n + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    /// `↑i` as a bitmask.
    #[inline]
    pub fn up(&self, i: usize) -> u64 {
        self.up[i]
    }

    /// `↓i` as a bitmask.
    #[inline]
    pub fn down(&self, i: usize) -> u64 {
        self.down[i]
    }

    pub fn full(&self) -> u64 {
        full_mask(self.n)
    }

    pub fn matrix(&self) -> Vec<Vec<bool>> {
        self.leq.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn opposite(&self) -> FinPoset {
        let n = self.n;
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = self.leq(j, i);
            }
        }
        FinPoset::from_validated(n, leq)
    }

    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.lt(i, j) {
                    let between = self.up[i] & self.down[j] & !bit(i) & !bit(j);
                    if between == 0 {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }

    /// Length of the longest chain ending at each element.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.n];
        for i in self.linear_extension() {
            for j in members(self.down[i] & !bit(i)) {
                h[i] = h[i].max(h[j] + 1);
            }
        }
        h
    }

    /// Elements ordered so that `i < j` in the order implies `i` comes first.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by_key(|&i| (self.down[i].count_ones(), i));
        idx
    }

    pub fn is_down_set(&self, s: u64) -> bool {
        members(s).all(|i| self.down[i] & !s == 0)
    }

    pub fn is_up_set(&self, s: u64) -> bool {
        members(s).all(|i| self.up[i] & !s == 0)
    }

    pub fn down_closure(&self, s: u64) -> u64 {
        members(s).fold(0, |m, i| m | self.down[i])
    }

    pub fn up_closure(&self, s: u64) -> u64 {
        members(s).fold(0, |m, i| m | self.up[i])
    }

    /// Nonempty and every pair has an upper bound inside `s`.
    pub fn is_directed(&self, s: u64) -> bool {
        if s == 0 {
            return false;
        }
        for a in members(s) {
            for b in members(s) {
                if b > a && self.up[a] & self.up[b] & s == 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Nonempty and every pair has a lower bound inside `s`.
    pub fn is_codirected(&self, s: u64) -> bool {
        if s == 0 {
            return false;
        }
        for a in members(s) {
            for b in members(s) {
                if b > a && self.down[a] & self.down[b] & s == 0 {
                    return false;
                }
            }
        }
        true
    }

    /// The greatest element of `s`, if it has one.
    pub fn max_of(&self, s: u64) -> Option<usize> {
        members(s).find(|&i| s & !self.down[i] == 0)
    }

    /// The least element of `s`, if it has one.
    pub fn min_of(&self, s: u64) -> Option<usize> {
        members(s).find(|&i| s & !self.up[i] == 0)
    }

    fn subset_guard(&self, what: &'static str) -> Result<()> {
        if self.n > SUBSET_CAP {
            return Err(OrderError::CapExceeded { what, n: self.n, cap: SUBSET_CAP });
        }
        Ok(())
    }

    /// All directed subsets, by literal enumeration.
    pub fn directed_subsets(&self) -> Result<Vec<u64>> {
        self.subset_guard("directed subsets")?;
        Ok((1..=self.full()).filter(|&s| self.is_directed(s)).collect())
    }

    pub fn codirected_subsets(&self) -> Result<Vec<u64>> {
        self.subset_guard("codirected subsets")?;
        Ok((1..=self.full()).filter(|&s| self.is_codirected(s)).collect())
    }

    /// All up-sets, sorted by bitmask.
    pub fn up_sets(&self) -> Vec<u64> {
        let mut order = self.linear_extension();
        order.reverse();
        let mut out = Vec::new();
        fn go(p: &FinPoset, order: &[usize], k: usize, cur: u64, out: &mut Vec<u64>) {
            if k == order.len() {
                out.push(cur);
                return;
            }
            let x = order[k];
            go(p, order, k + 1, cur, out);
            if p.up[x] & !bit(x) & !cur == 0 {
                go(p, order, k + 1, cur | bit(x), out);
            }
        }
        go(self, &order, 0, 0, &mut out);
        out.sort_unstable();
        out
    }

    /// All down-sets, sorted by bitmask.
    pub fn down_sets(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.up_sets().into_iter().map(|u| !u & self.full()).collect();
        out.sort_unstable();
        out
    }

    /// Restriction of the order to `s`, re-indexed ascending.
    pub fn induced(&self, s: u64) -> FinPoset {
        let idx: Vec<usize> = members(s).collect();
        let k = idx.len();
        let mut leq = vec![false; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                leq[a * k + b] = self.leq(i, j);
            }
        }
        FinPoset::from_validated(k, leq)
    }

    /// Applies a permutation: element `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> FinPoset {
        let n = self.n;
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[perm[i] * n + perm[j]] = self.leq(i, j);
            }
        }
        FinPoset::from_validated(n, leq)
    }
}

/// Searches for an order isomorphism `a → b` by backtracking.
pub fn find_poset_isomorphism(a: &FinPoset, b: &FinPoset) -> Option<Vec<usize>> {
    if a.n != b.n {
        return None;
    }
    let n = a.n;
    let sig = |p: &FinPoset, i: usize| (p.up[i].count_ones(), p.down[i].count_ones());
    let mut sa: Vec<_> = (0..n).map(|i| sig(a, i)).collect();
    let mut sb: Vec<_> = (0..n).map(|i| sig(b, i)).collect();
    let (ca, cb) = (sa.clone(), sb.clone());
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = 0u64;
    fn go(
        a: &FinPoset,
        b: &FinPoset,
        ca: &[(u32, u32)],
        cb: &[(u32, u32)],
        i: usize,
        map: &mut Vec<usize>,
        used: &mut u64,
    ) -> bool {
        if i == a.n {
            return true;
        }
        for j in 0..b.n {
            if *used & bit(j) != 0 || ca[i] != cb[j] {
                continue;
            }
            let ok = (0..i).all(|k| {
                a.leq(k, i) == b.leq(map[k], j) && a.leq(i, k) == b.leq(j, map[k])
            });
            if ok {
                map[i] = j;
                *used |= bit(j);
                if go(a, b, ca, cb, i + 1, map, used) {
                    return true;
                }
                *used &= !bit(j);
            }
        }
        false
    }
    if go(a, b, &ca, &cb, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// A finite lattice: a poset with cached meet and join tables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinLattice {
    poset: FinPoset,
    meet: Vec<usize>,
    join: Vec<usize>,
    bot: usize,
    top: usize,
}

/// Computes meets, joins, bottom and top, or reports the first one missing.
pub fn check_lattice(p: FinPoset) -> Result<FinLattice> {
    let n = p.n;
    let all = p.full();
    let bot = p.min_of(all).ok_or(OrderError::NoBottom)?;
    let top = p.max_of(all).ok_or(OrderError::NoTop)?;
    let mut meet = vec![0; n * n];
    let mut join = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            meet[x * n + y] = p.max_of(p.down[x] & p.down[y]).ok_or(OrderError::NoMeet(x, y))?;
            join[x * n + y] = p.min_of(p.up[x] & p.up[y]).ok_or(OrderError::NoJoin(x, y))?;
        }
    }
    Ok(FinLattice { poset: p, meet, join, bot, top })
}

impl FinLattice {
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self> {
        check_lattice(FinPoset::from_relation(n, covers)?)
    }

    pub fn chain(n: usize) -> Self {
        check_lattice(FinPoset::chain(n)).expect("nonempty chain")
    }

    /// The Boolean lattice of subsets of a `k`-element set; element `i` is
    /// the subset with bitmask `i`.
    pub fn boolean(k: usize) -> Self {
        let n = 1usize << k;
        let mut pairs = Vec::new();
        for i in 0..n {
            for b in 0..k {
                if i & (1 << b) == 0 {
                    pairs.push((i, i | (1 << b)));
                }
            }
        }
        Self::from_covers(n, &pairs).expect("powerset is a lattice")
    }

    /// The pentagon: `0 < 1 < 2 < 4` and `0 < 3 < 4`.
    pub fn n5() -> Self {
        Self::from_covers(5, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).expect("N5")
    }

    /// The diamond: three atoms `1, 2, 3` between `0` and `4`.
    pub fn m3() -> Self {
        Self::from_covers(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).expect("M3")
    }

    /// Subsets in `family` ordered by inclusion, indexed in the given order.
    pub fn of_sets(family: &[u64]) -> Result<Self> {
        let m: Vec<Vec<bool>> = family
            .iter()
            .map(|&a| family.iter().map(|&b| a & !b == 0).collect())
            .collect();
        check_lattice(check_poset(&m)?)
    }

    pub fn poset(&self) -> &FinPoset {
        &self.poset
    }

    pub fn n(&self) -> usize {
        self.poset.n
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn top(&self) -> usize {
        self.top
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.poset.leq(x, y)
    }

    #[inline]
    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n() + y]
    }

    #[inline]
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.n() + y]
    }

    pub fn up(&self, x: usize) -> u64 {
        self.poset.up(x)
    }

    pub fn down(&self, x: usize) -> u64 {
        self.poset.down(x)
    }

    pub fn full(&self) -> u64 {
        self.poset.full()
    }

    /// Supremum of a subset; the empty supremum is bottom.
    pub fn sup(&self, s: u64) -> usize {
        members(s).fold(self.bot, |acc, x| self.join(acc, x))
    }

    /// Infimum of a subset; the empty infimum is top.
    pub fn inf(&self, s: u64) -> usize {
        members(s).fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn opposite(&self) -> FinLattice {
        check_lattice(self.poset.opposite()).expect("dual of a lattice")
    }

    pub fn check_index(&self, x: usize) -> Result<()> {
        if x < self.n() {
            Ok(())
        } else {
            Err(OrderError::IndexOutOfRange(x))
        }
    }

    /// First triple violating `x∧(y∨z) = (x∧y)∨(x∧z)`, if any.
    pub fn distributivity_failure(&self) -> Option<(usize, usize, usize)> {
        let n = self.n();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let lhs = self.meet(x, self.join(y, z));
                    let rhs = self.join(self.meet(x, y), self.meet(x, z));
                    if lhs != rhs {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    pub fn is_distributive(&self) -> bool {
        self.distributivity_failure().is_none()
    }

    /// Sup of every subset, indexed by mask.
    fn sup_table(&self) -> Vec<usize> {
        let size = 1usize << self.n();
        let mut t = vec![self.bot; size];
        for s in 1..size {
            let low = s.trailing_zeros() as usize;
            t[s] = self.join(t[s & (s - 1)], low);
        }
        t
    }
}

/// Way-below by its finite-subcover form: `x ≪ y` iff every `Y` with
/// `y ≤ sup Y` has a finite `X ⊆ Y` with `x ≤ sup X`.
pub fn way_below_subcover_table(l: &FinLattice) -> Result<Vec<u64>> {
    let n = l.n();
    if n > SUBCOVER_CAP {
        return Err(OrderError::CapExceeded { what: "finite-subcover way-below", n, cap: SUBCOVER_CAP });
    }
    let sups = l.sup_table();
    let mut wb = vec![l.full(); n];
    for y_set in 0..sups.len() {
        let s = sups[y_set];
        let mut reach = l.down(sups[0]);
        let mut x_set = y_set;
        loop {
            reach |= l.down(sups[x_set]);
            if x_set == 0 {
                break;
            }
            x_set = (x_set - 1) & y_set;
        }
        for (y, row) in wb.iter_mut().enumerate() {
            if l.leq(y, s) {
                *row &= reach;
            }
        }
    }
    Ok(wb)
}

/// Way-below by its directed form: `x ≪ y` iff every directed `D` with
/// `y ≤ sup D` has some `d ∈ D` with `x ≤ d`.
pub fn way_below_directed_table(l: &FinLattice) -> Result<Vec<u64>> {
    let n = l.n();
    let mut wb = vec![l.full(); n];
    for d in l.poset.directed_subsets()? {
        let s = l.sup(d);
        let reach = l.poset.down_closure(d);
        for (y, row) in wb.iter_mut().enumerate() {
            if l.leq(y, s) {
                *row &= reach;
            }
        }
    }
    Ok(wb)
}

/// Literal way-below test for one pair.
pub fn way_below(l: &FinLattice, x: usize, y: usize) -> Result<bool> {
    l.check_index(x)?;
    l.check_index(y)?;
    let table = if l.n() <= SUBCOVER_CAP {
        way_below_subcover_table(l)?
    } else {
        way_below_directed_table(l)?
    };
    Ok(table[y] & bit(x) != 0)
}

/// Way-below on one lattice, computed literally once and then certified equal
/// to `≤` so that later queries can use the order.
#[derive(Clone, Debug)]
pub struct WayBelow {
    /// `table[y]` is the mask of all `x ≪ y`.
    table: Vec<u64>,
    pub collapses_to_order: bool,
}

impl WayBelow {
    pub fn compute(l: &FinLattice) -> Result<Self> {
        let table = way_below_directed_table(l)?;
        if l.n() <= SUBCOVER_CAP {
            let other = way_below_subcover_table(l)?;
            if other != table {
                return Err(OrderError::CollapseFailed(
                    "directed and finite-subcover way-below disagree".into(),
                ));
            }
        }
        let collapses_to_order = (0..l.n()).all(|y| table[y] == l.down(y));
        Ok(WayBelow { table, collapses_to_order })
    }

    /// Computes the relation and insists that it equals `≤`.
    pub fn certify(l: &FinLattice) -> Result<Self> {
        let wb = Self::compute(l)?;
        if !wb.collapses_to_order {
            return Err(OrderError::CollapseFailed("way-below differs from ≤".into()));
        }
        Ok(wb)
    }

    #[inline]
    pub fn holds(&self, x: usize, y: usize) -> bool {
        self.table[y] & bit(x) != 0
    }

    /// `⇊y` as a bitmask.
    pub fn below(&self, y: usize) -> u64 {
        self.table[y]
    }
}

pub fn is_continuous(l: &FinLattice) -> Result<bool> {
    let wb = WayBelow::compute(l)?;
    Ok(continuous_with(l, &wb))
}

fn continuous_with(l: &FinLattice, wb: &WayBelow) -> bool {
    (0..l.n()).all(|x| l.poset.is_directed(wb.below(x)) && l.sup(wb.below(x)) == x)
}

pub fn is_stably_continuous(l: &FinLattice) -> Result<bool> {
    let wb = WayBelow::compute(l)?;
    if !continuous_with(l, &wb) || !wb.holds(l.top(), l.top()) {
        return Ok(false);
    }
    let n = l.n();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if wb.holds(x, y) && wb.holds(x, z) && !wb.holds(x, l.meet(y, z)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScottTest {
    /// Every directed subset was enumerated.
    Literal,
    /// Above the subset cap: a finite directed set contains its supremum.
    MaxReduction,
}

/// A filter, stored as a member bitmask with its computed least element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Filter {
    pub members: u64,
    /// Meet of all members; a member exactly when the filter is principal.
    pub least: usize,
    pub principal: bool,
    pub scott_open: bool,
}

impl Filter {
    pub fn contains(&self, x: usize) -> bool {
        self.members & bit(x) != 0
    }
}

fn is_filter(l: &FinLattice, s: u64) -> bool {
    if s == 0 || !l.poset.is_up_set(s) {
        return false;
    }
    members(s).all(|a| members(s).all(|b| s & bit(l.meet(a, b)) != 0))
}

fn scott_open_literal(l: &FinLattice, directed: &[u64], s: u64) -> bool {
    directed.iter().all(|&d| s & bit(l.sup(d)) == 0 || d & s != 0)
}

/// All filters in ascending bitmask order, each with its Scott-open flag.
pub fn filters(l: &FinLattice) -> (Vec<Filter>, ScottTest) {
    let directed = l.poset.directed_subsets().ok();
    let test = if directed.is_some() { ScottTest::Literal } else { ScottTest::MaxReduction };
    let out = l
        .poset
        .up_sets()
        .into_iter()
        .filter(|&s| is_filter(l, s))
        .map(|s| {
            let least = l.inf(s);
            let principal = s == l.up(least);
            let scott_open = match &directed {
                Some(d) => scott_open_literal(l, d, s),
                None => true,
            };
            Filter { members: s, least, principal, scott_open }
        })
        .collect();
    (out, test)
}

pub fn scott_open_filters(l: &FinLattice) -> Vec<Filter> {
    filters(l).0.into_iter().filter(|f| f.scott_open).collect()
}

/// `σFilt(L)` ordered by inclusion, with the isomorphism onto `L^op`.
#[derive(Clone, Debug)]
pub struct LawsonDual {
    pub lattice: FinLattice,
    pub filters: Vec<Filter>,
    /// `to_op[i]` is the `x` with `filters[i] = ↑x`.
    pub to_op: Vec<usize>,
    /// `of_element[x]` is the index of `↑x`.
    pub of_element: Vec<usize>,
}

pub fn lawson_dual(l: &FinLattice) -> Result<LawsonDual> {
    let fs = scott_open_filters(l);
    let family: Vec<u64> = fs.iter().map(|f| f.members).collect();
    let bad = |m: String| OrderError::LawsonNotLattice(m);
    let dual = FinLattice::of_sets(&family).map_err(|e| bad(e.to_string()))?;
    let index_of = |s: u64| family.iter().position(|&f| f == s);
    for i in 0..family.len() {
        for j in 0..family.len() {
            let inter = family[i] & family[j];
            if index_of(inter) != Some(dual.meet(i, j)) {
                return Err(bad(format!("meet of filters {i},{j} is not their intersection")));
            }
            let mut gen = 0u64;
            for u in members(family[i]) {
                for v in members(family[j]) {
                    gen |= bit(l.meet(u, v));
                }
            }
            if index_of(l.poset.up_closure(gen)) != Some(dual.join(i, j)) {
                return Err(bad(format!("join of filters {i},{j} is not ↑{{u∧v}}")));
            }
        }
    }
    let to_op: Vec<usize> = fs.iter().map(|f| f.least).collect();
    let mut of_element = vec![usize::MAX; l.n()];
    for (i, f) in fs.iter().enumerate() {
        if !f.principal {
            return Err(bad(format!("filter {} is not principal", format_set(f.members))));
        }
        of_element[f.least] = i;
    }
    if let Some(x) = of_element.iter().position(|&i| i == usize::MAX) {
        return Err(bad(format!("↑{x} is missing")));
    }
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            if dual.leq(i, j) != l.leq(to_op[j], to_op[i]) {
                return Err(bad(format!("↑x ↦ x is not order-reversing at {i},{j}")));
            }
        }
    }
    Ok(LawsonDual { lattice: dual, filters: fs, to_op, of_element })
}

/// Pass/fail of one item, with the first counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemResult {
    pub item: &'static str,
    pub pass: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScottFilterReport {
    pub items: Vec<ItemResult>,
    /// For each pair `l ≪ k` in `σFilt(L)`, an `x ∈ k` with `l ⊆ ↑x`.
    pub way_below_witnesses: Vec<(usize, usize, usize)>,
}

impl ScottFilterReport {
    pub fn pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

fn item(name: &'static str, failure: Option<String>) -> ItemResult {
    ItemResult { item: name, pass: failure.is_none(), counterexample: failure }
}

/// Checks the five standard properties of Scott-open filters on a domain and
/// `⇊D = ⇊sup D` for every directed `D`.
pub fn scott_filter_properties_check(l: &FinLattice) -> Result<ScottFilterReport> {
    let n = l.n();
    let wb = WayBelow::compute(l)?;
    let dual = lawson_dual(l)?;
    let ks: Vec<u64> = dual.filters.iter().map(|f| f.members).collect();
    let m = ks.len();
    let swb = WayBelow::compute(&dual.lattice)?;
    let has = |k: usize, x: usize| ks[k] & bit(x) != 0;

    let mut a = None;
    'a: for x in 0..n {
        for y in 0..n {
            let rhs = (0..m).any(|k| has(k, x) && ks[k] & !l.up(y) == 0);
            if wb.holds(y, x) != rhs {
                a = Some(format!("x={x}, y={y}: y≪x is {} but filter test is {rhs}", wb.holds(y, x)));
                break 'a;
            }
        }
    }

    let mut b = None;
    'b: for x in 0..n {
        for k in 0..m {
            if has(k, x) && wb.below(x) & ks[k] == 0 {
                b = Some(format!("x={x}, k={}", format_set(ks[k])));
                break 'b;
            }
        }
    }

    let mut c = None;
    let mut witnesses = Vec::new();
    'c: for k in 0..m {
        for li in 0..m {
            let w = members(ks[k]).find(|&x| ks[li] & !l.up(x) == 0);
            if swb.holds(li, k) != w.is_some() {
                c = Some(format!("l={}, k={}", format_set(ks[li]), format_set(ks[k])));
                break 'c;
            }
            if let Some(x) = w {
                witnesses.push((li, k, x));
            }
        }
    }

    let mut d = None;
    'd: for x in 0..n {
        for k in 0..m {
            if has(k, x) && !(0..m).any(|li| swb.holds(li, k) && has(li, x)) {
                d = Some(format!("x={x}, k={}", format_set(ks[k])));
                break 'd;
            }
        }
    }

    let mut e = None;
    for x in 0..n {
        let s = (0..m).filter(|&k| has(k, x)).fold(0u64, |acc, k| acc | bit(k));
        if !dual.lattice.poset().is_codirected(s) {
            e = Some(format!("x={x}"));
            break;
        }
    }

    let mut down = None;
    for dset in l.poset().directed_subsets()? {
        let lhs = members(dset).fold(0u64, |acc, d| acc | wb.below(d));
        if lhs != wb.below(l.sup(dset)) {
            down = Some(format!("D={}", format_set(dset)));
            break;
        }
    }

    Ok(ScottFilterReport {
        items: vec![
            item("a", a),
            item("b", b),
            item("c", c),
            item("d", d),
            item("e", e),
            item("downset", down),
        ],
        way_below_witnesses: witnesses,
    })
}

#[derive(Clone, Debug)]
pub struct WilkerReport {
    pub holds: bool,
    /// `(x, y, l, k, k')` with indices of filters into `scott_open_filters`.
    pub witnesses: Vec<(usize, usize, usize, usize, usize)>,
    pub failure: Option<(usize, usize, usize)>,
}

/// For all `x, y` and Scott-open `l ∋ x∨y`, searches Scott-open `k ∋ x`,
/// `k' ∋ y` with `k ∩ k' ⊆ l`.
pub fn wilker_check(l: &FinLattice) -> WilkerReport {
    let ks: Vec<u64> = scott_open_filters(l).iter().map(|f| f.members).collect();
    let n = l.n();
    let mut witnesses = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let xy = l.join(x, y);
            for (li, &lf) in ks.iter().enumerate() {
                if lf & bit(xy) == 0 {
                    continue;
                }
                let found = ks.iter().enumerate().find_map(|(ki, &k)| {
                    if k & bit(x) == 0 {
                        return None;
                    }
                    ks.iter()
                        .position(|&k2| k2 & bit(y) != 0 && k & k2 & !lf == 0)
                        .map(|k2i| (ki, k2i))
                });
                match found {
                    Some((ki, k2i)) => witnesses.push((x, y, li, ki, k2i)),
                    None => {
                        return WilkerReport { holds: false, witnesses, failure: Some((x, y, li)) }
                    }
                }
            }
        }
    }
    WilkerReport { holds: true, witnesses, failure: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normality {
    Normal,
    /// First pair `g ∨ h = ⊤` admitting no separating `u, v`.
    NotNormal { g: usize, h: usize },
}

/// Frame normality: whenever `g ∨ h = ⊤` there are `u, v` with
/// `u ∨ g = v ∨ h = ⊤` and `u ∧ v = ⊥`.
pub fn is_normal_frame(l: &FinLattice) -> Result<Normality> {
    if let Some((x, y, z)) = l.distributivity_failure() {
        return Err(OrderError::NotDistributive(x, y, z));
    }
    let (n, top, bot) = (l.n(), l.top(), l.bot());
    for g in 0..n {
        for h in 0..n {
            if l.join(g, h) != top {
                continue;
            }
            let ok = (0..n).any(|u| {
                l.join(u, g) == top && (0..n).any(|v| l.join(v, h) == top && l.meet(u, v) == bot)
            });
            if !ok {
                return Ok(Normality::NotNormal { g, h });
            }
        }
    }
    Ok(Normality::Normal)
}

/// Down-sets of a poset ordered by inclusion, indexed by ascending bitmask.
pub fn down_set_lattice(p: &FinPoset) -> (FinLattice, Vec<u64>) {
    let sets = p.down_sets();
    (FinLattice::of_sets(&sets).expect("down-sets form a lattice"), sets)
}

/// Preservation requirements for [`enumerate_monotone_maps`], read in the
/// domain as seen by the map (`P^op` when contravariant).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Preserve {
    pub finite_infima: bool,
    pub arbitrary_suprema: bool,
    pub nonempty_suprema: bool,
}

impl Preserve {
    pub const NONE: Preserve =
        Preserve { finite_infima: false, arbitrary_suprema: false, nonempty_suprema: false };
    pub const FRAME: Preserve =
        Preserve { finite_infima: true, arbitrary_suprema: true, nonempty_suprema: false };
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotoneMap {
    pub val: Vec<usize>,
    /// The map is read as `dom^op → cod`.
    pub contravariant: bool,
}

impl MonotoneMap {
    pub fn is_monotone(&self, dom: &FinPoset, cod: &FinPoset) -> bool {
        let n = dom.n();
        self.val.len() == n
            && (0..n).all(|x| {
                (0..n).all(|y| {
                    !dom.leq(x, y)
                        || if self.contravariant {
                            cod.leq(self.val[y], self.val[x])
                        } else {
                            cod.leq(self.val[x], self.val[y])
                        }
                })
            })
    }
}

/// The domain lattice as the map sees it.
struct View<'a> {
    l: &'a FinLattice,
    flip: bool,
}

impl View<'_> {
    fn leq(&self, a: usize, b: usize) -> bool {
        if self.flip {
            self.l.leq(b, a)
        } else {
            self.l.leq(a, b)
        }
    }
    fn meet(&self, a: usize, b: usize) -> usize {
        if self.flip {
            self.l.join(a, b)
        } else {
            self.l.meet(a, b)
        }
    }
    fn join(&self, a: usize, b: usize) -> usize {
        if self.flip {
            self.l.meet(a, b)
        } else {
            self.l.join(a, b)
        }
    }
    fn top(&self) -> usize {
        if self.flip {
            self.l.bot()
        } else {
            self.l.top()
        }
    }
    fn bot(&self) -> usize {
        if self.flip {
            self.l.top()
        } else {
            self.l.bot()
        }
    }
}

enum Constraint {
    Fixed(usize, usize),
    Leq(usize, usize),
    Meet(usize, usize, usize),
    Join(usize, usize, usize),
}

/// Every monotone map `P → Q` (or `P^op → Q`) meeting the preservation
/// flags, in lexicographic order of value arrays.
pub fn enumerate_monotone_maps(
    p: &FinLattice,
    q: &FinLattice,
    flags: Preserve,
    contravariant: bool,
) -> Vec<MonotoneMap> {
    let v = View { l: p, flip: contravariant };
    let n = p.n();
    let mut at: Vec<Vec<Constraint>> = (0..n).map(|_| Vec::new()).collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && v.leq(a, b) {
                at[a.max(b)].push(Constraint::Leq(a, b));
            }
            if b <= a {
                continue;
            }
            let m = v.meet(a, b);
            let j = v.join(a, b);
            if flags.finite_infima {
                at[a.max(b).max(m)].push(Constraint::Meet(a, b, m));
            }
            if flags.arbitrary_suprema || flags.nonempty_suprema {
                at[a.max(b).max(j)].push(Constraint::Join(a, b, j));
            }
        }
    }
    if flags.finite_infima {
        at[v.top()].push(Constraint::Fixed(v.top(), q.top()));
    }
    if flags.arbitrary_suprema {
        at[v.bot()].push(Constraint::Fixed(v.bot(), q.bot()));
    }
    let mut out = Vec::new();
    let mut val = vec![0usize; n];
    fn go(
        i: usize,
        q: &FinLattice,
        at: &[Vec<Constraint>],
        val: &mut Vec<usize>,
        out: &mut Vec<MonotoneMap>,
        contravariant: bool,
    ) {
        if i == val.len() {
            out.push(MonotoneMap { val: val.clone(), contravariant });
            return;
        }
        for c in 0..q.n() {
            val[i] = c;
            let ok = at[i].iter().all(|k| match *k {
                Constraint::Fixed(x, y) => val[x] == y,
                Constraint::Leq(a, b) => q.leq(val[a], val[b]),
                Constraint::Meet(a, b, m) => val[m] == q.meet(val[a], val[b]),
                Constraint::Join(a, b, j) => val[j] == q.join(val[a], val[b]),
            });
            if ok {
                go(i + 1, q, at, val, out, contravariant);
            }
        }
    }
    if n > 0 {
        go(0, q, &at, &mut val, &mut out, contravariant);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn perr(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

/// Parses a poset in one of two text forms:
///
/// ```text
/// lattice 3        matrix 2
/// 0<1              1 1
/// 1<2              0 1
/// ```
///
/// Cover lists are closed reflexively and transitively. Matrices are taken
/// as given and validated. `#` starts a comment.
pub fn parse_poset(text: &str) -> std::result::Result<FinPoset, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut words = header.split_whitespace();
    let kind = words.next().unwrap_or("");
    let n: usize = words
        .next()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| perr(hl, "expected `lattice <n>` or `matrix <n>`"))?;
    match kind {
        "lattice" | "poset" => {
            let mut pairs = Vec::new();
            for (ln, l) in lines {
                let (a, b) = l.split_once('<').ok_or_else(|| perr(ln, "expected `i<j`"))?;
                let a: usize = a.trim().parse().map_err(|_| perr(ln, "bad element"))?;
                let b: usize = b.trim().parse().map_err(|_| perr(ln, "bad element"))?;
                if a >= n || b >= n {
                    return Err(perr(ln, format!("element out of range 0..{n}")));
                }
                pairs.push((a, b));
            }
            FinPoset::from_relation(n, &pairs).map_err(|e| perr(hl, e.to_string()))
        }
        "matrix" => {
            let mut rows = Vec::new();
            for (ln, l) in lines {
                let row: std::result::Result<Vec<bool>, _> = l
                    .split_whitespace()
                    .map(|w| match w {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => Err(perr(ln, "matrix entries must be 0 or 1")),
                    })
                    .collect();
                let row = row?;
                if row.len() != n {
                    return Err(perr(ln, format!("expected {n} entries")));
                }
                rows.push(row);
            }
            if rows.len() != n {
                return Err(perr(hl, format!("expected {n} rows")));
            }
            check_poset(&rows).map_err(|e| perr(hl, e.to_string()))
        }
        other => Err(perr(hl, format!("unknown header `{other}`"))),
    }
}

pub fn to_text(p: &FinPoset) -> String {
    let mut s = format!("lattice {}\n", p.n());
    for (a, b) in p.covers() {
        let _ = writeln!(s, "{a}<{b}");
    }
    s
}

/// Hasse diagram in DOT, one rank per height.
pub fn to_dot(p: &FinPoset, name: &str) -> String {
    let mut s = format!("digraph \"{name}\" {{\n  rankdir=BT;\n");
    let h = p.heights();
    let max_h = h.iter().copied().max().unwrap_or(0);
    for level in 0..=max_h {
        let nodes: Vec<String> = (0..p.n()).filter(|&i| h[i] == level).map(|i| i.to_string()).collect();
        if !nodes.is_empty() {
            let _ = writeln!(s, "  {{ rank=same; {}; }}", nodes.join("; "));
        }
    }
    for (a, b) in p.covers() {
        let _ = writeln!(s, "  {a} -> {b};");
    }
    s.push_str("}\n");
    s
}
