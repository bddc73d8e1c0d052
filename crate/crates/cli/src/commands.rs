use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use softsheaf::compord::{interpolating_decompositions, CompOrdSpace};
use softsheaf::corpus;
use softsheaf::finalg::{
    commuting_equivalences_report, congruence_from_labels, congruence_lattice, parse_algebra, FinAlgebra,
};
use softsheaf::gelfand::{
    gelfand_representation, ideal_lattice, parse_ring, pierce_decomposition, ring_from_spec, ring_to_text,
    FinCommRing, RING_CAP,
};
use softsheaf::order::{check_lattice, format_set, parse_poset, to_dot, to_text, FinLattice, FinPoset};
use softsheaf::report::{self, Caps, Check};

use crate::output::{Format, Output};
use crate::{Cli, Command, CompordCommand, Target};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("cap violation: {0}")]
    Cap(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

/// Hard ceilings for the caps; beyond these the enumerations blow up.
const MAX_CAPS: Caps = Caps { lattice: 8, points: 6, bijection: 5, ring: RING_CAP };

pub fn parse_caps(spec: Option<&str>) -> Result<Caps> {
    let mut caps = Caps::default();
    let Some(spec) = spec else { return Ok(caps) };
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| CliError::Cap(format!("expected key=value, got `{part}`")))?;
        let v: usize = value.trim().parse().map_err(|_| CliError::Cap(format!("bad value in `{part}`")))?;
        let (slot, max) = match key.trim() {
            "lattice" => (&mut caps.lattice, MAX_CAPS.lattice),
            "points" => (&mut caps.points, MAX_CAPS.points),
            "bijection" => (&mut caps.bijection, MAX_CAPS.bijection),
            "ring" => (&mut caps.ring, MAX_CAPS.ring),
            other => return Err(CliError::Cap(format!("unknown cap `{other}`"))),
        };
        if v == 0 || v > max {
            return Err(CliError::Cap(format!("{key} must be in 1..={max}, got {v}")));
        }
        *slot = v;
    }
    Ok(caps)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Parse { path: path.display().to_string(), msg: e.to_string() })
}

fn parse_err(path: &Path, msg: impl ToString) -> CliError {
    CliError::Parse { path: path.display().to_string(), msg: msg.to_string() }
}

fn load_poset(path: &Path) -> Result<FinPoset> {
    parse_poset(&read(path)?).map_err(|e| parse_err(path, e))
}

fn load_lattice(spec: &str) -> Result<(String, FinLattice)> {
    let path = Path::new(spec);
    if path.is_file() {
        let l = check_lattice(load_poset(path)?).map_err(|e| parse_err(path, e))?;
        return Ok((spec.to_string(), l));
    }
    corpus::named_lattice(spec)
        .map(|l| (spec.to_string(), l))
        .ok_or_else(|| CliError::Unknown { what: "lattice", name: spec.into() })
}

fn load_algebra(spec: &str) -> Result<(String, FinAlgebra)> {
    let path = Path::new(spec);
    if path.is_file() {
        let a = parse_algebra(&read(path)?).map_err(|e| parse_err(path, e))?;
        return Ok((spec.to_string(), a));
    }
    corpus::named_algebra(spec)
        .map(|a| (spec.to_string(), a))
        .ok_or_else(|| CliError::Unknown { what: "algebra", name: spec.into() })
}

fn load_ring(spec: &str) -> Result<FinCommRing> {
    let path = Path::new(spec);
    if path.is_file() {
        return parse_ring(&read(path)?).map_err(|e| parse_err(path, e));
    }
    ring_from_spec(spec).map_err(|e| CliError::Invalid(e.to_string()))
}

fn sets(masks: &[u64]) -> Value {
    masks.iter().map(|&m| format_set(m)).collect()
}

pub fn run(cli: Cli) -> Result<bool> {
    let caps = parse_caps(cli.caps.as_deref())?;
    if let Command::GenerateCorpus = cli.command {
        return generate_corpus(cli.out.as_deref(), cli.seed, caps, cli.format);
    }
    let mut out = Output::new(cli.format, cli.out.as_deref())?;
    match cli.command {
        Command::CheckLattice { file } => check_lattice_cmd(&mut out, &file)?,
        Command::CheckAlgebra { file } => check_algebra_cmd(&mut out, &file)?,
        Command::ConLattice { algebra } => con_lattice_cmd(&mut out, &algebra)?,
        Command::Verify { target, algebra, lattice, poset, theta1, theta2 } => {
            let pair = theta1.zip(theta2);
            verify_cmd(&mut out, target, algebra.as_deref(), lattice.as_deref(), poset.as_deref(), pair, caps, cli.seed)?
        }
        Command::Compord { command: CompordCommand::Bijection { x, y } } => {
            bijection_cmd(&mut out, x.as_deref().zip(y.as_deref()), caps)?
        }
        Command::Gelfand { ring } => gelfand_cmd(&mut out, &ring)?,
        Command::Pierce { ring } => pierce_cmd(&mut out, &ring)?,
        Command::GenerateCorpus => unreachable!("handled above"),
    }
    Ok(out.finish()?)
}

fn lattice_checks(l: &FinLattice) -> Vec<Check> {
    vec![report::wilker_lattice_check(l), report::scott_filter_check(l), report::collapse_check(l)]
}

fn check_lattice_cmd(out: &mut Output, file: &Path) -> Result<()> {
    let p = load_poset(file)?;
    let l = check_lattice(p).map_err(|e| parse_err(file, e))?;
    out.info("elements", json!(l.n()))?;
    out.info("distributive", json!(l.is_distributive()))?;
    out.dot(&to_dot(l.poset(), "lattice"))?;
    out.checks(&lattice_checks(&l))?;
    Ok(())
}

fn check_algebra_cmd(out: &mut Output, file: &Path) -> Result<()> {
    let a = parse_algebra(&read(file)?).map_err(|e| parse_err(file, e))?;
    let name = file.display().to_string();
    let con = congruence_lattice(&a).map_err(|e| CliError::Invalid(e.to_string()))?;
    out.info("elements", json!(a.n()))?;
    let ops: Vec<String> = a.sig().ops().iter().map(|(n, k)| format!("{n}/{k}")).collect();
    out.info("signature", json!(ops))?;
    out.info("congruences", json!(con.congruences.len()))?;
    out.check(&report::commuting_check(&name, &a))?;
    if corpus::is_group(&a) {
        out.check(&report::malcev_check(&name, &a))?;
    }
    Ok(())
}

fn con_lattice_cmd(out: &mut Output, spec: &str) -> Result<()> {
    let (name, a) = load_algebra(spec)?;
    let con = congruence_lattice(&a).map_err(|e| CliError::Invalid(e.to_string()))?;
    out.info("algebra", json!(name))?;
    out.info("size", json!(con.congruences.len()))?;
    let blocks: Vec<String> = con.congruences.iter().enumerate().map(|(i, c)| format!("{i}: {}", c.display())).collect();
    out.info("congruences", json!(blocks))?;
    out.info("covers", json!(con.lattice.poset().covers()))?;
    let mut dot = to_dot(con.lattice.poset(), "congruences");
    let labels: String =
        con.congruences.iter().enumerate().map(|(i, c)| format!("  {i} [label=\"{}\"];\n", c.display())).collect();
    dot.insert_str(dot.len() - 2, &labels);
    out.dot(&dot)?;
    out.check(&Check::new("congruence-lattice", name, None))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    out: &mut Output,
    target: Target,
    algebra: Option<&str>,
    lattice: Option<&str>,
    poset: Option<&Path>,
    thetas: Option<(String, String)>,
    caps: Caps,
    seed: u64,
) -> Result<()> {
    let checks = match target {
        Target::ThmGamma | Target::CorMain | Target::TGen => {
            let algebras = match algebra {
                Some(s) => vec![load_algebra(s)?],
                None => corpus::catalog_algebras(),
            };
            let lattices = match lattice {
                Some(s) => vec![load_lattice(s)?],
                None => corpus::catalog_lattices(),
            };
            let mut all = Vec::new();
            for (ln, l) in &lattices {
                for (an, a) in &algebras {
                    all.extend(report::main_theorem_checks(an, a, ln, l));
                }
            }
            all.retain(|c| report::clause_selected(target.name(), &c.theorem));
            all
        }
        Target::Wilker => match lattice {
            Some(s) => lattice_checks(&load_lattice(s)?.1),
            None => report::lattice_suite(caps.lattice),
        },
        Target::HofmannMislove => match poset {
            Some(p) => {
                let space = softsheaf::compord::FinTopSpace::alexandrov(&load_poset(p)?);
                let failure = match softsheaf::compord::hofmann_mislove_check(&space) {
                    Ok(h) => h.failure,
                    Err(e) => Some(e.to_string()),
                };
                vec![Check::new("hofmann-mislove", p.display().to_string(), failure)]
            }
            None => report::hofmann_mislove_suite(caps.points),
        },
        Target::CommuteTriple => match (algebra, thetas) {
            (Some(s), Some((t1, t2))) => {
                let (name, a) = load_algebra(s)?;
                let labels = |t: &str| -> Result<Vec<usize>> {
                    t.split(',').map(|w| w.trim().parse().map_err(|_| CliError::Invalid(format!("bad label list `{t}`")))).collect()
                };
                let c1 = congruence_from_labels(&a, &labels(&t1)?).map_err(|e| CliError::Invalid(e.to_string()))?;
                let c2 = congruence_from_labels(&a, &labels(&t2)?).map_err(|e| CliError::Invalid(e.to_string()))?;
                let r = commuting_equivalences_report(&a, &c1, &c2).map_err(|e| CliError::Invalid(e.to_string()))?;
                out.info("composites_equal", json!(r.composites_equal))?;
                out.info("sup_kernel_is_composite", json!(r.sup_kernel_is_composite))?;
                out.info("regular_pushout", json!(r.regular_pushout))?;
                out.info("quotient_pullback", json!(r.quotient_pullback))?;
                let failure = (!r.agree()).then(|| format!("{r:?}"));
                vec![Check::new("commuting-equivalences", format!("{name} {} {}", c1.display(), c2.display()), failure)]
            }
            (Some(s), None) => {
                let (name, a) = load_algebra(s)?;
                vec![report::commuting_check(&name, &a)]
            }
            (None, _) => {
                let mut all = report::commuting_suite(&corpus::algebra_menagerie(seed));
                all.extend(report::malcev_suite());
                all
            }
        },
    };
    out.checks(&checks)?;
    Ok(())
}

fn decomposition_dot(x: &FinPoset, y: &FinPoset, qs: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for (k, q) in qs.iter().enumerate() {
        let _ = writeln!(s, "digraph \"q{k}\" {{\n  rankdir=BT;");
        for (side, p) in [("x", x), ("y", y)] {
            let _ = writeln!(s, "  subgraph cluster_{side} {{ label=\"{}\";", side.to_uppercase());
            for i in 0..p.n() {
                let _ = writeln!(s, "    {side}{i} [label=\"{i}\"];");
            }
            for (a, b) in p.covers() {
                let _ = writeln!(s, "    {side}{a} -> {side}{b};");
            }
            s.push_str("  }\n");
        }
        for (i, &v) in q.iter().enumerate() {
            let _ = writeln!(s, "  x{i} -> y{v} [style=dashed, label=\"q\"];");
        }
        s.push_str("}\n");
    }
    s
}

fn bijection_cmd(out: &mut Output, files: Option<(&Path, &Path)>, caps: Caps) -> Result<()> {
    let Some((xf, yf)) = files else {
        out.checks(&report::bijection_suite(caps.bijection))?;
        return Ok(());
    };
    let (x, y) = (load_poset(xf)?, load_poset(yf)?);
    for (what, p) in [("X", &x), ("Y", &y)] {
        if p.n() > caps.bijection {
            return Err(CliError::Cap(format!("{what} has {} points, cap is {}", p.n(), caps.bijection)));
        }
    }
    let (check, counts) = report::bijection_check(&x, &y, caps.bijection);
    if let Some((d, h)) = counts {
        out.info("decompositions", json!(d))?;
        out.info("commuting_frame_homs", json!(h))?;
    }
    if out.format() == Format::Dot {
        let qs = interpolating_decompositions(&CompOrdSpace::new(x.clone()), &CompOrdSpace::new(y.clone()));
        out.dot(&decomposition_dot(&x, &y, &qs))?;
    }
    out.check(&check)?;
    Ok(())
}

fn gelfand_cmd(out: &mut Output, spec: &str) -> Result<()> {
    let r = load_ring(spec)?;
    let il = ideal_lattice(&r).map_err(|e| CliError::Invalid(e.to_string()))?;
    out.info("ring", json!(spec))?;
    out.info("elements", json!(r.n()))?;
    out.info("ideals", sets(&il.ideals))?;
    out.info("primes", sets(&il.primes().collect::<Vec<_>>()))?;
    out.info("maximals", sets(&il.maximals().collect::<Vec<_>>()))?;
    match gelfand_representation(&r) {
        Ok(g) => {
            out.info("jrid_frame_size", json!(g.frame.n()))?;
            out.info("jrid_frame", sets(&g.frame_ideals))?;
            out.info("radical_ideals", sets(&g.radical_ideals))?;
            out.info("gelfand", json!({
                "syntactic": g.gelfand.syntactic,
                "semantic": g.gelfand.semantic,
                "frame_normal": g.gelfand.frame_normal,
            }))?;
            out.info("compact_regular", json!(g.compact_regular))?;
            out.info("inclusion_preserves", json!({
                "finite_infima": g.inclusion.finite_infima,
                "arbitrary_suprema": g.inclusion.arbitrary_suprema,
            }))?;
            out.info("o_map", sets(&g.o_map))?;
            let stalks: Vec<Value> = g
                .stalks
                .iter()
                .map(|s| json!({ "maximal": format_set(s.maximal), "o_m": format_set(s.o_m), "size": s.size, "local": s.local }))
                .collect();
            out.info("stalks", json!(stalks))?;
            out.dot(&to_dot(g.frame.poset(), "jrid"))?;
        }
        Err(e) => out.info("error", json!(e.to_string()))?,
    }
    out.check(&report::gelfand_check(spec, &r))?;
    Ok(())
}

fn pierce_cmd(out: &mut Output, spec: &str) -> Result<()> {
    let r = load_ring(spec)?;
    if let Ok(p) = pierce_decomposition(&r) {
        out.info("idempotents", json!(p.idempotents))?;
        out.info("atoms", json!(p.atoms))?;
        out.info("factor_sizes", json!(p.factors.iter().map(FinCommRing::n).collect::<Vec<_>>()))?;
        out.info("product_iso", json!(p.product_iso))?;
    }
    out.check(&report::pierce_check(spec, &r, None))?;
    Ok(())
}

/// Writes the corpus under `dir` (or only prints the manifest) and returns
/// whether the enumeration counts match the known values.
fn generate_corpus(dir: Option<&Path>, seed: u64, caps: Caps, format: Format) -> Result<bool> {
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let mut lattices = Vec::new();
    let mut counts_ok = true;
    for n in 1..=caps.lattice {
        let ls = corpus::lattices_up_to_iso(n);
        counts_ok &= corpus::LATTICE_COUNTS.get(n - 1).is_none_or(|&c| c == ls.len());
        for (k, l) in ls.iter().enumerate() {
            let path = PathBuf::from(format!("lattices/lattice-{n}-{k:03}.lat"));
            lattices.push(json!({ "file": path, "elements": n }));
            files.push((path, to_text(l.poset())));
        }
    }
    let mut spaces = Vec::new();
    for n in 1..=caps.points {
        let ps = corpus::posets_up_to_iso(n);
        counts_ok &= corpus::POSET_COUNTS.get(n).is_none_or(|&c| c == ps.len());
        for (k, p) in ps.iter().enumerate() {
            let path = PathBuf::from(format!("spaces/space-{n}-{k:03}.pos"));
            let text = format!("# specialization order; the space carries its up-set topology\n{}", to_text(p).replacen("lattice", "poset", 1));
            spaces.push(json!({ "file": path, "points": n }));
            files.push((path, text));
        }
    }
    let mut algebras = Vec::new();
    for (name, a) in corpus::algebra_menagerie(seed) {
        let path = PathBuf::from(format!("algebras/{name}.alg"));
        algebras.push(json!({ "file": path, "name": name, "elements": a.n() }));
        files.push((path, softsheaf::finalg::algebra_to_text(&a)));
    }
    let mut rings = Vec::new();
    for n in 1..=caps.ring {
        let r = FinCommRing::zn(n).map_err(|e| CliError::Invalid(e.to_string()))?;
        let path = PathBuf::from(format!("rings/zn-{n:02}.ring"));
        rings.push(json!({ "file": path, "spec": format!("zn:{n}") }));
        files.push((path, ring_to_text(&r)));
    }
    let manifest = json!({
        "seed": seed,
        "caps": { "lattice": caps.lattice, "points": caps.points, "ring": caps.ring },
        "lattices": lattices,
        "spaces": spaces,
        "algebras": algebras,
        "rings": rings,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("json value") + "\n";
    match dir {
        Some(dir) => {
            for (path, body) in &files {
                let full = dir.join(path);
                fs::create_dir_all(full.parent().expect("relative file path"))?;
                fs::write(full, body)?;
            }
            fs::create_dir_all(dir)?;
            fs::write(dir.join("manifest.json"), &text)?;
            if format == Format::Text {
                println!("{} lattices, {} spaces, {} algebras, {} rings written to {}", array_len(&manifest, "lattices"), array_len(&manifest, "spaces"), array_len(&manifest, "algebras"), array_len(&manifest, "rings"), dir.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(counts_ok)
}

fn array_len(manifest: &Value, key: &str) -> usize {
    manifest[key].as_array().map_or(0, Vec::len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_parse_partially_and_reject_out_of_range() {
        assert_eq!(parse_caps(None).unwrap(), Caps::default());
        let c = parse_caps(Some("lattice=4, ring=12")).unwrap();
        assert_eq!((c.lattice, c.points, c.ring), (4, 5, 12));
        assert!(parse_caps(Some("lattice=0")).is_err());
        assert!(parse_caps(Some("points=7")).is_err());
        assert!(parse_caps(Some("width=3")).is_err());
        assert!(parse_caps(Some("ring")).is_err());
    }
}
