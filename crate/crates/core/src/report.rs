//! Uniform check records and the verification suites shared by the CLI and
//! the acceptance tests. Every suite returns its checks in a canonical order
//! regardless of how the work was scheduled.

use rayon::prelude::*;
use serde::Serialize;

use crate::compord::{closed_commute, decomposition_bijection_check_with, hofmann_mislove_check, CompOrdSpace};
use crate::corpus;
use crate::finalg::{commuting_equivalences_report, congruence_lattice, FinAlgebra};
use crate::gelfand::{gelfand_representation, pierce_decomposition, FinCommRing};
use crate::order::{
    down_set_lattice, filters, format_set, is_normal_frame, lawson_dual, mask_of, scott_filter_properties_check,
    wilker_check, FinLattice, FinPoset, Normality, WayBelow,
};
use crate::sheafrep::verify_main_theorems;

/// One verified statement on one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub theorem: String,
    pub instance: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl Check {
    pub fn new(theorem: &str, instance: impl Into<String>, failure: Option<String>) -> Self {
        Check { theorem: theorem.into(), instance: instance.into(), pass: failure.is_none(), counterexample: failure }
    }

    pub fn to_text(&self) -> String {
        let mark = if self.pass { "ok  " } else { "FAIL" };
        match &self.counterexample {
            Some(c) => format!("{mark} {} [{}]: {c}", self.theorem, self.instance),
            None => format!("{mark} {} [{}]", self.theorem, self.instance),
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Size limits for the exhaustive suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest lattice in the lattice corpus.
    pub lattice: usize,
    /// Largest space for Hofmann–Mislove and the closed-commute comparison.
    pub points: usize,
    /// Largest `X` and `Y` in the decomposition bijection.
    pub bijection: usize,
    /// Largest `n` in the `Z/n` sweep.
    pub ring: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { lattice: 6, points: 5, bijection: 4, ring: 60 }
    }
}

/// Short printable form of a lattice: size and cover pairs.
pub fn describe_lattice(l: &FinLattice) -> String {
    describe_poset(l.poset())
}

pub fn describe_poset(p: &FinPoset) -> String {
    let covers: Vec<String> = p.covers().iter().map(|(a, b)| format!("{a}<{b}")).collect();
    format!("n={} {{{}}}", p.n(), covers.join(","))
}

/// The main theorems on one algebra and base lattice, one check per clause.
pub fn main_theorem_checks(algebra: &str, a: &FinAlgebra, lattice: &str, p: &FinLattice) -> Vec<Check> {
    let instance = format!("{algebra} on {lattice}");
    match verify_main_theorems(a, p) {
        Ok(report) => report
            .clauses
            .iter()
            .map(|c| Check::new(clause_theorem(c.name), instance.clone(), c.counterexample.clone()))
            .collect(),
        Err(e) => vec![Check::new("main-theorems", instance, Some(e.to_string()))],
    }
}

fn clause_theorem(clause: &str) -> &'static str {
    match clause {
        "sheaf-condition" => "k-sheaf-condition",
        "soft-condition" => "soft-representation-condition",
        "round-trip" => "representation-round-trip",
        "softness" => "softness-formulations",
        "omega-side" => "omega-sheaf-correspondence",
        _ => "main-theorems",
    }
}

/// The checks selected by a `verify` target name.
pub fn clause_selected(target: &str, theorem: &str) -> bool {
    match target {
        "thm-gamma" => matches!(theorem, "k-sheaf-condition" | "softness-formulations"),
        "cor-main" => matches!(theorem, "soft-representation-condition" | "representation-round-trip"),
        "t-gen" => theorem == "omega-sheaf-correspondence",
        _ => true,
    }
}

/// Main theorems over every catalog algebra and base lattice.
pub fn catalog_suite() -> Vec<Check> {
    let algebras = corpus::catalog_algebras();
    let lattices = corpus::catalog_lattices();
    let pairs: Vec<(usize, usize)> =
        (0..lattices.len()).flat_map(|i| (0..algebras.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| main_theorem_checks(&algebras[j].0, &algebras[j].1, &lattices[i].0, &lattices[i].1))
        .collect::<Vec<_>>()
        .concat()
}

/// The four commuting predicates agree on every pair of congruences.
pub fn commuting_check(name: &str, a: &FinAlgebra) -> Check {
    let failure = (|| {
        let con = congruence_lattice(a).map_err(|e| e.to_string())?;
        let cs = &con.congruences;
        for (i, t1) in cs.iter().enumerate() {
            for t2 in &cs[i..] {
                let r = commuting_equivalences_report(a, t1, t2).map_err(|e| e.to_string())?;
                if !r.agree() {
                    return Err(format!("{} vs {}: {r:?}", t1.display(), t2.display()));
                }
            }
        }
        Ok(())
    })()
    .err();
    Check::new("commuting-equivalences", name, failure)
}

pub fn commuting_suite(algebras: &[(String, FinAlgebra)]) -> Vec<Check> {
    algebras.par_iter().map(|(name, a)| commuting_check(name, a)).collect()
}

/// Every pair of congruences of a group commutes.
pub fn malcev_check(name: &str, g: &FinAlgebra) -> Check {
    let failure = (|| {
        let con = congruence_lattice(g).map_err(|e| e.to_string())?;
        let cs = &con.congruences;
        for (i, t1) in cs.iter().enumerate() {
            for t2 in &cs[i + 1..] {
                if !crate::finalg::commute(t1, t2).map_err(|e| e.to_string())? {
                    return Err(format!("{} and {} do not commute", t1.display(), t2.display()));
                }
            }
        }
        Ok(())
    })()
    .err();
    Check::new("malcev-commuting", name, failure)
}

pub fn malcev_suite() -> Vec<Check> {
    corpus::small_groups().par_iter().map(|(name, g)| malcev_check(name, g)).collect()
}

/// Wilker's condition on the Scott-open filters.
pub fn wilker_lattice_check(l: &FinLattice) -> Check {
    let w = wilker_check(l);
    let failure = w.failure.map(|(x, y, k)| format!("x={x}, y={y}, filter #{k} has no splitting pair"));
    Check::new("wilker", describe_lattice(l), failure)
}

/// The Scott-open filter properties, including `⇊D = ⇊sup D`.
pub fn scott_filter_check(l: &FinLattice) -> Check {
    let failure = match scott_filter_properties_check(l) {
        Ok(r) => r.items.iter().find(|i| !i.pass).map(|i| {
            format!("item {}: {}", i.item, i.counterexample.clone().unwrap_or_default())
        }),
        Err(e) => Some(e.to_string()),
    };
    Check::new("scott-filter-properties", describe_lattice(l), failure)
}

/// Finite collapse: way-below is `≤`, every filter is principal and
/// Scott-open, and `σFilt(L) ≅ L^op`.
pub fn collapse_check(l: &FinLattice) -> Check {
    let failure = (|| {
        WayBelow::certify(l).map_err(|e| e.to_string())?;
        let (fs, _) = filters(l);
        if let Some(f) = fs.iter().find(|f| !f.principal || !f.scott_open) {
            return Err(format!("filter {} principal={} scott_open={}", format_set(f.members), f.principal, f.scott_open));
        }
        if fs.len() != l.n() {
            return Err(format!("{} filters on {} elements", fs.len(), l.n()));
        }
        lawson_dual(l).map_err(|e| e.to_string())?;
        Ok(())
    })()
    .err();
    Check::new("finite-collapse", describe_lattice(l), failure)
}

/// Wilker, Scott-filter properties and collapse certificates on every
/// lattice up to the cap.
pub fn lattice_suite(cap: usize) -> Vec<Check> {
    corpus::lattice_corpus(cap)
        .par_iter()
        .map(|l| vec![wilker_lattice_check(l), scott_filter_check(l), collapse_check(l)])
        .collect::<Vec<_>>()
        .concat()
}

pub fn hofmann_mislove_suite(points: usize) -> Vec<Check> {
    corpus::posets_up_to_iso_range(1, points)
        .par_iter()
        .map(|p| {
            let s = crate::compord::FinTopSpace::alexandrov(p);
            let failure = match hofmann_mislove_check(&s) {
                Ok(h) => h.failure,
                Err(e) => Some(e.to_string()),
            };
            Check::new("hofmann-mislove", format!("alexandrov {}", describe_poset(p)), failure)
        })
        .collect()
}

/// The interpolation criterion against the poset pushout for every pair of
/// (closed) subsets of one finite compact ordered space.
pub fn closed_commute_check(p: &FinPoset) -> Check {
    let x = CompOrdSpace::new(p.clone());
    let full = p.full();
    let mut disagreements = 0usize;
    let mut first = None;
    for c1 in 0..=full {
        for c2 in c1..=full {
            let r = closed_commute(&x, c1, c2);
            if !r.agree() {
                disagreements += 1;
                first.get_or_insert((c1, c2, r));
            }
        }
    }
    let failure = first.map(|(c1, c2, r)| {
        format!(
            "{disagreements} disagreements, first at {} {}: criterion={} pushout={}",
            format_set(c1),
            format_set(c2),
            r.criterion,
            r.pushout
        )
    });
    Check::new("closed-commute-pushout", describe_poset(p), failure)
}

pub fn closed_commute_suite(points: usize) -> Vec<Check> {
    corpus::posets_up_to_iso_range(1, points).par_iter().map(closed_commute_check).collect()
}

/// Counts `(decompositions, commuting frame homomorphisms)` with the check.
pub fn bijection_check(x: &FinPoset, y: &FinPoset, cap: usize) -> (Check, Option<(usize, usize)>) {
    let instance = format!("X {} Y {}", describe_poset(x), describe_poset(y));
    match decomposition_bijection_check_with(&CompOrdSpace::new(x.clone()), &CompOrdSpace::new(y.clone()), cap) {
        Ok(r) => {
            let failure = (!r.pass()).then(|| {
                r.failure.clone().unwrap_or_else(|| {
                    format!("{} decompositions, {} commuting frame homs", r.decompositions, r.commuting_frame_homs)
                })
            });
            (Check::new("decomposition-bijection", instance, failure), Some((r.decompositions, r.commuting_frame_homs)))
        }
        Err(e) => (Check::new("decomposition-bijection", instance, Some(e.to_string())), None),
    }
}

pub fn bijection_suite(cap: usize) -> Vec<Check> {
    let ps = corpus::posets_up_to_iso_range(1, cap);
    let pairs: Vec<(usize, usize)> = (0..ps.len()).flat_map(|i| (0..ps.len()).map(move |j| (i, j))).collect();
    pairs.par_iter().map(|&(i, j)| bijection_check(&ps[i], &ps[j], cap).0).collect()
}

/// The Gelfand pipeline on one ring.
pub fn gelfand_check(name: &str, r: &FinCommRing) -> Check {
    let failure = match gelfand_representation(r) {
        Ok(g) if g.pass() => None,
        Ok(g) => Some(format!(
            "gelfand={:?} compact_regular={} self_dual={} failures={:?} stalks_ok={}",
            g.gelfand,
            g.compact_regular,
            g.representation.duality.holds,
            g.representation.failures,
            g.stalks.iter().all(|s| s.equals_quotient && s.iso_to_quotient && s.local)
        )),
        Err(e) => Some(e.to_string()),
    };
    Check::new("gelfand-representation", name, failure)
}

/// The Pierce decomposition, with the expected factor sizes when given.
pub fn pierce_check(name: &str, r: &FinCommRing, expected_factors: Option<&[usize]>) -> Check {
    let failure = match pierce_decomposition(r) {
        Ok(p) => {
            let mut sizes: Vec<usize> = p.factors.iter().map(|f| f.n()).collect();
            sizes.sort_unstable();
            if !p.pass() {
                Some(format!("product_iso={} base_boolean={} failures={:?}", p.product_iso, p.base_boolean, p.representation.failures))
            } else if expected_factors.is_some_and(|e| e != sizes.as_slice()) {
                Some(format!("factor sizes {sizes:?}, expected {:?}", expected_factors.unwrap_or_default()))
            } else {
                None
            }
        }
        Err(e) => Some(e.to_string()),
    };
    Check::new("pierce-decomposition", name, failure)
}

pub fn gelfand_suite(max_n: usize) -> Vec<Check> {
    let mut out: Vec<Check> = (1..=max_n)
        .into_par_iter()
        .map(|n| {
            let r = FinCommRing::zn(n).expect("n is within the ring cap");
            vec![gelfand_check(&format!("Z/{n}"), &r), pierce_check(&format!("Z/{n}"), &r, None)]
        })
        .collect::<Vec<_>>()
        .concat();
    if max_n >= 6 {
        out.push(pierce_check("Z/6 = Z/2 x Z/3", &FinCommRing::zn(6).expect("small ring"), Some(&[2, 3])));
    }
    out
}

/// The down-set frame of `{x ≤ y, x ≤ z}` is not normal, and the first
/// offending pair is `({x,y}, {x,z})`.
pub fn normality_negative_check() -> Check {
    let v = FinPoset::from_relation(3, &[(0, 1), (0, 2)]).expect("poset");
    let (frame, sets) = down_set_lattice(&v);
    let expected = (mask_of(&[0, 1]), mask_of(&[0, 2]));
    let failure = match is_normal_frame(&frame) {
        Ok(Normality::NotNormal { g, h }) if (sets[g], sets[h]) == expected => None,
        Ok(Normality::NotNormal { g, h }) => {
            Some(format!("witness ({}, {})", format_set(sets[g]), format_set(sets[h])))
        }
        Ok(Normality::Normal) => Some("reported normal".into()),
        Err(e) => Some(e.to_string()),
    };
    Check::new("non-normal-down-set-frame", "x<y, x<z", failure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_serializes_without_empty_counterexample() {
        let c = Check::new("t", "i", None);
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"theorem":"t","instance":"i","pass":true}"#);
        let c = Check::new("t", "i", Some("x".into()));
        assert!(serde_json::to_string(&c).unwrap().contains(r#""counterexample":"x""#));
    }

    #[test]
    fn negative_normality_witness() {
        assert!(normality_negative_check().pass);
    }

    #[test]
    fn small_suites_pass() {
        assert!(all_pass(&lattice_suite(4)));
        assert!(all_pass(&hofmann_mislove_suite(3)));
        assert!(all_pass(&closed_commute_suite(3)));
        assert!(all_pass(&malcev_suite()));
    }

    #[test]
    fn verify_targets_partition_the_clauses() {
        for t in [
            "k-sheaf-condition",
            "soft-representation-condition",
            "representation-round-trip",
            "softness-formulations",
            "omega-sheaf-correspondence",
        ] {
            let n = ["thm-gamma", "cor-main", "t-gen"].iter().filter(|g| clause_selected(g, t)).count();
            assert_eq!(n, 1, "{t}");
        }
    }
}
