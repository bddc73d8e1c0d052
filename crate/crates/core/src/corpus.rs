//! Deterministic test corpus: lattices and posets up to isomorphism,
//! finite T0 spaces, small groups and a menagerie of algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compord::FinTopSpace;
use crate::finalg::{
    chain_semilattice, cyclic_group, group_from_mul, lattice_algebra, FinAlgebra, Signature,
};
use crate::order::{bit, check_lattice, check_poset, find_poset_isomorphism, FinLattice, FinPoset};

/// Lattices with `n` elements up to isomorphism, for `n = 1..=8`.
pub const LATTICE_COUNTS: [usize; 8] = [1, 1, 1, 2, 5, 15, 53, 222];

/// Posets with `n` elements up to isomorphism, for `n = 0..=6`.
pub const POSET_COUNTS: [usize; 7] = [1, 1, 2, 5, 16, 63, 318];

/// Row masks of `p` relabelled by `perm` (`perm[old] = new`).
fn rows_under(p: &FinPoset, perm: &[usize]) -> Vec<u64> {
    let n = p.n();
    let mut rows = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if p.leq(i, j) {
                rows[perm[i]] |= bit(perm[j]);
            }
        }
    }
    rows
}

/// Canonical form: the lexicographically least row-mask vector over all
/// relabellings that keep the refinement classes (height, number of
/// elements below, number above) in ascending order.
pub fn canonical_form(p: &FinPoset) -> Vec<u64> {
    let n = p.n();
    let heights = p.heights();
    let key = |x: usize| (heights[x], p.down(x).count_ones(), p.up(x).count_ones());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| key(x));
    // Class boundaries in the sorted order; permutations only act inside.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &x in &order {
        match classes.last_mut() {
            Some(c) if key(c[0]) == key(x) => c.push(x),
            _ => classes.push(vec![x]),
        }
    }
    let mut best: Option<Vec<u64>> = None;
    let mut perm = vec![0usize; n];
    fn go(
        p: &FinPoset,
        classes: &mut [Vec<usize>],
        ci: usize,
        start: usize,
        perm: &mut Vec<usize>,
        best: &mut Option<Vec<u64>>,
    ) {
        if ci == classes.len() {
            let rows = rows_under(p, perm);
            if best.as_ref().is_none_or(|b| rows < *b) {
                *best = Some(rows);
            }
            return;
        }
        let len = classes[ci].len();
        let mut items = classes[ci].clone();
        permute(&mut items, 0, &mut |arr: &[usize]| {
            for (k, &x) in arr.iter().enumerate() {
                perm[x] = start + k;
            }
            go(p, classes, ci + 1, start + len, perm, best);
        });
    }
    fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }
    go(p, &mut classes, 0, 0, &mut perm, &mut best);
    best.unwrap_or_default()
}

/// Poset from canonical row masks.
pub fn poset_from_rows(rows: &[u64]) -> FinPoset {
    let n = rows.len();
    let m: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| rows[i] & bit(j) != 0).collect()).collect();
    check_poset(&m).expect("rows of a partial order")
}

/// Naturally labelled posets on `n` points (`i ≤ j` only if `i ≤ j` as
/// integers), as row masks.
fn natural_posets(n: usize) -> Vec<Vec<u64>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for code in 0u64..(1u64 << pairs.len()) {
        let mut rows: Vec<u64> = (0..n).map(bit).collect();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if code & bit(k) != 0 {
                rows[i] |= bit(j);
            }
        }
        // Transitively closed exactly when every row contains the rows above it.
        let closed = (0..n).all(|i| (0..n).all(|j| rows[i] & bit(j) == 0 || rows[j] & !rows[i] == 0));
        if closed {
            out.push(rows);
        }
    }
    out
}

/// Posets on `n` points up to isomorphism, sorted by canonical form.
pub fn posets_up_to_iso(n: usize) -> Vec<FinPoset> {
    let mut forms: Vec<Vec<u64>> =
        natural_posets(n).into_iter().map(|r| canonical_form(&poset_from_rows(&r))).collect();
    forms.sort_unstable();
    forms.dedup();
    forms.iter().map(|r| poset_from_rows(r)).collect()
}

/// Posets with `lo..=hi` points up to isomorphism, smallest first.
pub fn posets_up_to_iso_range(lo: usize, hi: usize) -> Vec<FinPoset> {
    (lo..=hi).flat_map(posets_up_to_iso).collect()
}

/// Lattices with `n` elements up to isomorphism: a bottom, a top and a
/// naturally labelled poset in between, deduplicated by canonical form.
pub fn lattices_up_to_iso(n: usize) -> Vec<FinLattice> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![FinLattice::chain(1)];
    }
    let mut forms: Vec<Vec<u64>> = Vec::new();
    for mid in natural_posets(n - 2) {
        let full = (1u64 << n) - 1;
        let mut rows = vec![full];
        rows.extend(mid.iter().map(|r| (r << 1) | bit(n - 1)));
        rows.push(bit(n - 1));
        let p = poset_from_rows(&rows);
        if check_lattice(p.clone()).is_ok() {
            forms.push(canonical_form(&p));
        }
    }
    forms.sort_unstable();
    forms.dedup();
    forms.iter().map(|r| check_lattice(poset_from_rows(r)).expect("canonical lattice")).collect()
}

/// Every lattice with at most `cap` elements, smallest first.
pub fn lattice_corpus(cap: usize) -> Vec<FinLattice> {
    (1..=cap).flat_map(lattices_up_to_iso).collect()
}

/// Second enumerator: all partial orders on `n` points from arbitrary
/// relations, deduplicated by pairwise isomorphism search.
pub fn posets_by_isomorphism_search(n: usize) -> Vec<FinPoset> {
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut reps: Vec<FinPoset> = Vec::new();
    for code in 0u64..(1u64 << pairs.len()) {
        let m: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| i == j || pairs.iter().position(|&p| p == (i, j)).is_some_and(|k| code & bit(k) != 0))
                    .collect()
            })
            .collect();
        if let Ok(p) = check_poset(&m) {
            if !reps.iter().any(|r| find_poset_isomorphism(r, &p).is_some()) {
                reps.push(p);
            }
        }
    }
    reps
}

/// Second enumerator for lattices: bounded posets from the isomorphism
/// search, filtered by the lattice check.
pub fn lattices_by_isomorphism_search(n: usize) -> Vec<FinLattice> {
    if n <= 1 {
        return lattices_up_to_iso(n);
    }
    let mut reps: Vec<FinLattice> = Vec::new();
    for mid in posets_by_isomorphism_search(n - 2) {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..n - 2 {
            pairs.push((0, i + 1));
            pairs.push((i + 1, n - 1));
            for j in 0..n - 2 {
                if i != j && mid.leq(i, j) {
                    pairs.push((i + 1, j + 1));
                }
            }
        }
        pairs.push((0, n - 1));
        let p = FinPoset::from_relation(n, &pairs).expect("bounded poset");
        if let Ok(l) = check_lattice(p) {
            if !reps.iter().any(|r| find_poset_isomorphism(r.poset(), l.poset()).is_some()) {
                reps.push(l);
            }
        }
    }
    reps
}

/// Every finite T0 space with at most `cap` points, up to homeomorphism:
/// the Alexandrov topologies of the posets.
pub fn t0_spaces(cap: usize) -> Vec<FinTopSpace> {
    posets_up_to_iso_range(1, cap).iter().map(FinTopSpace::alexandrov).collect()
}

/// Second enumerator for small spaces: every family of subsets of `n`
/// points that is a T0 topology, up to relabelling. Feasible for `n ≤ 4`.
pub fn t0_spaces_by_brute_force(n: usize) -> Vec<FinTopSpace> {
    assert!(n <= 4, "2^(2^n) families");
    let subsets = 1usize << n;
    let full = (1u64 << n) - 1;
    let mut reps: Vec<FinPoset> = Vec::new();
    let mut out = Vec::new();
    for code in 0u64..(1u64 << subsets) {
        if code & 1 == 0 || code & bit(full as usize) == 0 {
            continue;
        }
        let opens: Vec<u64> = (0..subsets as u64).filter(|&s| code & bit(s as usize) != 0).collect();
        let Ok(space) = FinTopSpace::new(n, &opens) else { continue };
        let Ok(spec) = space.specialization() else { continue };
        if !reps.iter().any(|r| find_poset_isomorphism(r, &spec).is_some()) {
            reps.push(spec);
            out.push(space);
        }
    }
    out
}

/// Groups of order at most 8 up to isomorphism.
pub fn small_groups() -> Vec<(String, FinAlgebra)> {
    let mut out: Vec<(String, FinAlgebra)> = (1..=8).map(|n| (format!("Z{n}"), cyclic_group(n))).collect();
    let z2 = cyclic_group(2);
    let v4 = z2.product(&z2).expect("same signature");
    out.push(("Z2xZ2".into(), v4.clone()));
    out.push(("Z2xZ4".into(), z2.product(&cyclic_group(4)).expect("same signature")));
    out.push(("Z2xZ2xZ2".into(), v4.product(&z2).expect("same signature")));
    out.push(("S3".into(), permutation_group(3, &[vec![1, 0, 2], vec![1, 2, 0]])));
    out.push(("D4".into(), permutation_group(4, &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]])));
    out.push(("Q8".into(), quaternion_group()));
    out
}

/// The group generated by permutations of `0..k`, identity first.
pub fn permutation_group(k: usize, gens: &[Vec<usize>]) -> FinAlgebra {
    let id: Vec<usize> = (0..k).collect();
    let mut elems = vec![id];
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let h: Vec<usize> = (0..k).map(|x| g[elems[i][x]]).collect();
            if !elems.contains(&h) {
                elems.push(h);
            }
        }
        i += 1;
    }
    let index = |p: &Vec<usize>| elems.iter().position(|e| e == p).expect("closed");
    let n = elems.len();
    group_from_mul(n, |a, b| index(&(0..k).map(|x| elems[a][elems[b][x]]).collect()))
}

/// `{±1, ±i, ±j, ±k}` with `2u + s` encoding sign `s` and unit `u`.
pub fn quaternion_group() -> FinAlgebra {
    // Unit products: (sign, unit) for 1, i, j, k.
    const T: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    group_from_mul(8, |a, b| {
        let (s, u) = T[a / 2][b / 2];
        2 * u + ((a % 2 + b % 2 + s) % 2)
    })
}

/// Associativity, identity `e` and inverses, by table scan.
pub fn is_group(a: &FinAlgebra) -> bool {
    let (Some(m), Some(i), Some(e)) = (a.sig().position("mul"), a.sig().position("inv"), a.sig().position("e"))
    else {
        return false;
    };
    let e = a.apply(e, &[]);
    let n = a.n();
    (0..n).all(|x| {
        a.apply(m, &[x, e]) == x
            && a.apply(m, &[e, x]) == x
            && a.apply(m, &[x, a.apply(i, &[x])]) == e
            && (0..n).all(|y| (0..n).all(|z| a.apply(m, &[a.apply(m, &[x, y]), z]) == a.apply(m, &[x, a.apply(m, &[y, z])])))
    })
}

/// A binary magma with uniformly random table.
pub fn random_magma(n: usize, rng: &mut ChaCha8Rng) -> FinAlgebra {
    let sig = Signature::new(&[("op", 2)]).expect("one op");
    let table = (0..n * n).map(|_| rng.gen_range(0..n)).collect();
    FinAlgebra::new(sig, n, vec![table]).expect("entries in range")
}

/// Algebras used across the verification suites, with stable names.
pub fn algebra_menagerie(seed: u64) -> Vec<(String, FinAlgebra)> {
    let mut out = catalog_algebras();
    for (name, l) in catalog_lattices() {
        out.push((format!("lattice-{name}"), lattice_algebra(&l)));
    }
    out.extend(small_groups().into_iter().filter(|(name, _)| name != "Z4" && name != "Z2xZ2"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..4 {
        let n = 2 + k % 3;
        out.push((format!("magma{k}-{n}"), random_magma(n, &mut rng)));
    }
    out
}

/// The algebras of the main verification catalog.
pub fn catalog_algebras() -> Vec<(String, FinAlgebra)> {
    let z2 = cyclic_group(2);
    vec![
        ("set3".into(), FinAlgebra::set(3)),
        ("Z4".into(), cyclic_group(4)),
        ("Z2xZ2".into(), z2.product(&z2).expect("same signature")),
        ("semilattice2".into(), chain_semilattice(2)),
    ]
}

/// The lattices of the main verification catalog.
pub fn catalog_lattices() -> Vec<(String, FinLattice)> {
    let mut out: Vec<(String, FinLattice)> = (1..=5).map(|k| (format!("chain{k}"), FinLattice::chain(k))).collect();
    out.push(("bool4".into(), FinLattice::boolean(2)));
    out.push(("N5".into(), FinLattice::n5()));
    out.push(("M3".into(), FinLattice::m3()));
    out
}

/// Looks up a catalog or menagerie algebra, or a `zn:<n>`/`group:<name>` shorthand.
pub fn named_algebra(name: &str) -> Option<FinAlgebra> {
    if let Some(n) = name.strip_prefix("zn:").and_then(|s| s.parse::<usize>().ok()) {
        return (n > 0).then(|| cyclic_group(n));
    }
    if let Some(n) = name.strip_prefix("set").and_then(|s| s.parse::<usize>().ok()) {
        return Some(FinAlgebra::set(n));
    }
    let name = name.strip_prefix("group:").unwrap_or(name);
    catalog_algebras()
        .into_iter()
        .chain(small_groups())
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, a)| a)
}

/// Looks up a catalog lattice by name, also `chain<k>` and `bool<2^k>`.
pub fn named_lattice(name: &str) -> Option<FinLattice> {
    if let Some(k) = name.strip_prefix("chain").and_then(|s| s.parse::<usize>().ok()) {
        return (1..=64).contains(&k).then(|| FinLattice::chain(k));
    }
    if let Some(m) = name.strip_prefix("bool").and_then(|s| s.parse::<usize>().ok()) {
        return (m.is_power_of_two() && m <= 64).then(|| FinLattice::boolean(m.trailing_zeros() as usize));
    }
    catalog_lattices().into_iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, l)| l)
}
