use crate::{Cli, Command, Example, ExperimentName, ExportKind, Failure, Format, Opts};
use anyhow::Context;
use outspace::baseline::Baseline;
use outspace::export::{cover_dot, graph_dot, graph_from_json, morphism_from_json, Document, GraphRecord, PathRecord};
use outspace::folding::greedy_folding_path;
use outspace::free_group::{fiber_product, parse_words, DEFAULT_ALPHABET};
use outspace::marked_graph::{classify_attachment, color, core_cover, omega_data, same_color, Attachment, OmegaData};
use outspace::optimal_maps::{
    difference_of_markings, dilatation, eigenvector_exact, make_optimal, transition_matrix, GraphMorphism,
};
use outspace::par::Mode;
use outspace::random::{random_automorphism, rng};
use outspace::subfactor::{
    axis_map, axis_subgroup, behrstock, bgi_proxy, distance4_chain, distance_lower_bound, finiteness, hamenstadt_demo,
    natural_path, polynomial_growth_demo, projection_s, rank3_panel, same_color_groups, Axis, BehrstockConfig,
    ChainMark, LowerBound, PredicateFlags, SubfactorError, SurrogateConfig,
};
use outspace::{Automorphism, MarkedGraph, Scalar, SubgroupGraph, Word, Q, QL};
use serde::Serialize;
use std::fs;
use std::path::Path;

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    match &cli.command {
        Command::Repro { example: Example::Figure1 } => figure1(o),
        Command::Repro { example: Example::Dist4 } => dist4(o),
        Command::Repro { example: Example::Colors } => colors(o),
        Command::Project { a, b } => project(o, a, b),
        Command::Fold { from, guide } => fold(o, from, guide),
        Command::Experiment { name } => experiment(o, *name),
        Command::Export { kind, from, subgroup } => export(o, *kind, from.as_deref(), subgroup.as_deref()),
    }
}

fn mode(o: &Opts) -> Mode {
    if o.jobs <= 1 {
        Mode::Sequential
    } else {
        Mode::Parallel
    }
}

fn show(h: &SubgroupGraph) -> String {
    h.display_with(DEFAULT_ALPHABET)
}

fn subgroup(rank: usize, gens: &str, alphabet: &str) -> Result<SubgroupGraph, Failure> {
    let ws = parse_words(gens, alphabet).map_err(|e| Failure::input(format!("{gens:?}: {e}")))?;
    SubgroupGraph::new(rank, &ws).map_err(|e| Failure::input(format!("{gens:?}: {e}")))
}

fn subfactor_failure(e: SubfactorError) -> Failure {
    let code = match e {
        SubfactorError::SelfProjection | SubfactorError::NotFreeFactor => 3,
        _ => 2,
    };
    Failure { code, message: format!("{}: {e}", e.code()) }
}

fn write(o: &Opts, text: &str) -> Outcome {
    match &o.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(Failure::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(o: &Opts, kind: &str, data: T) -> Outcome {
    let mut s = Document::new(kind, data).to_json();
    s.push('\n');
    write(o, &s)
}

/// Several DOT files: one file each inside `--out`, or concatenated on stdout.
fn write_dots(o: &Opts, files: &[(String, String)]) -> Outcome {
    match &o.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, dot) in files {
                let p = dir.join(format!("{name}.dot"));
                fs::write(&p, dot).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
        None => {
            for (_, dot) in files {
                print!("{dot}");
            }
            Ok(())
        }
    }
}

fn no_dot(what: &str) -> Failure {
    Failure::input(format!("DOT output is not available for {what}"))
}

fn finish(mismatches: Vec<String>) -> Outcome {
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(mismatches.join("; ")))
    }
}

#[derive(Serialize)]
struct CoverRow {
    k: i64,
    subgroup: String,
    vertices: usize,
    edges: usize,
    attachment: Attachment,
    omega: OmegaData,
}

#[derive(Serialize)]
struct PredicateRow {
    k: i64,
    #[serde(flatten)]
    flags: PredicateFlags,
    doubly_covered: bool,
}

#[derive(Serialize)]
struct Dilatation {
    minimal_polynomial: &'static str,
    exact_root: bool,
    value: f64,
    eigenvector: Vec<String>,
}

#[derive(Serialize)]
struct Figure1 {
    covers: Vec<CoverRow>,
    predicates: Vec<PredicateRow>,
    dilatation: Dilatation,
    mismatches: Vec<String>,
}

fn figure1(o: &Opts) -> Outcome {
    let axis = Axis::new();
    let a = axis_subgroup();
    let rows = axis.rows(&a, -6..=11).map_err(subfactor_failure)?;
    let covers: Vec<_> = rows.iter().filter(|r| (-5..=7).contains(&r.k)).collect();
    let mut mismatches = Vec::new();
    let at = |k: i64| rows.iter().find(|r| r.k == k).expect("row");
    if at(2).subgroup != subgroup(3, "x,z", "xyz")? {
        mismatches.push("phi^2(A) is not <x,z>".to_string());
    }
    if at(6).subgroup != subgroup(3, "zxy,zzx", "xyz")? {
        mismatches.push("phi^6(A) is not <zxy,zzx>".to_string());
    }
    for r in &rows {
        let want = (r.k <= -1, (0..=8).contains(&r.k), r.k >= 9, r.k >= 7 || r.k <= -5);
        if (r.flags.p1, r.flags.p2, r.flags.p3, r.doubly_covered) != want {
            mismatches.push(format!("predicates at k={}", r.k));
        }
    }
    let l = QL::lambda();
    let exact_root = l.pow(3) - l.pow(2) - QL::one() == QL::zero();
    let t = transition_matrix(&axis_map()).map_err(|e| Failure::check(e.to_string()))?;
    let value = dilatation(&t).estimate;
    let ev = eigenvector_exact(&t, &l).map_err(|e| Failure::check(e.to_string()))?;
    if !exact_root || (value - 1.46557).abs() >= 1e-5 || ev != vec![QL::one(), l.clone(), l.pow(2)] {
        mismatches.push("dilatation".to_string());
    }
    let xyz = |h: &SubgroupGraph| h.display_with("xyz");
    match o.format {
        Format::Dot => {
            let files: Vec<(String, String)> = covers
                .iter()
                .map(|r| (format!("figure1_k{}", r.k), cover_dot(&r.cover, &r.omega, &format!("k={}", r.k))))
                .collect();
            write_dots(o, &files)?;
        }
        Format::Json => {
            let data = Figure1 {
                covers: covers
                    .iter()
                    .map(|r| CoverRow {
                        k: r.k,
                        subgroup: xyz(&r.subgroup),
                        vertices: r.cover.carrier().num_vertices(),
                        edges: r.cover.carrier().num_edges(),
                        attachment: r.attachment,
                        omega: r.omega.clone(),
                    })
                    .collect(),
                predicates: rows
                    .iter()
                    .map(|r| PredicateRow { k: r.k, flags: r.flags, doubly_covered: r.doubly_covered })
                    .collect(),
                dilatation: Dilatation {
                    minimal_polynomial: "x^3 - x^2 - 1",
                    exact_root,
                    value,
                    eigenvector: ev.iter().map(|c| c.to_string()).collect(),
                },
                mismatches: mismatches.clone(),
            };
            json(o, "figure1", data)?;
        }
        Format::Text => {
            let mut s = String::from("k\tsubgroup\tvertices\tedges\tP1\tP2\tP3\tdoubly_covered\n");
            for r in &rows {
                s += &format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.k,
                    xyz(&r.subgroup),
                    r.cover.carrier().num_vertices(),
                    r.cover.carrier().num_edges(),
                    r.flags.p1,
                    r.flags.p2,
                    r.flags.p3,
                    r.doubly_covered
                );
            }
            s += &format!("lambda = {value:.8} (root of x^3 - x^2 - 1: {exact_root})\n");
            s += &format!("eigenvector = {}\n", ev.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" : "));
            for m in &mismatches {
                s += &format!("MISMATCH {m}\n");
            }
            write(o, &s)?;
        }
    }
    finish(mismatches)
}

#[derive(Serialize)]
struct ChainReport {
    a: String,
    b: String,
    case: u8,
    factors: Vec<String>,
    marks: Vec<ChainMark>,
    length: usize,
    verified: Result<(), String>,
    fiber_product_ranks: Vec<usize>,
}

fn dist4(o: &Opts) -> Outcome {
    let g = MarkedGraph::<Q>::standard_rose(4);
    let a = subgroup(4, "abaab,cb,abd", DEFAULT_ALPHABET)?;
    let b = subgroup(4, "a,c,d", DEFAULT_ALPHABET)?;
    let w = distance4_chain(&a, &b, &g).map_err(subfactor_failure)?;
    let fp = fiber_product(&a, &b).map_err(|e| Failure::check(e.to_string()))?;
    let rep = ChainReport {
        a: show(&a),
        b: show(&b),
        case: w.case,
        factors: w.factors.iter().map(show).collect(),
        marks: w.links.iter().map(|l| l.mark).collect(),
        length: w.len(),
        verified: w.verify(),
        fiber_product_ranks: fp.iter().map(|c| c.rank).collect(),
    };
    let mut mismatches = Vec::new();
    if rep.length != 4 || rep.verified.is_err() {
        mismatches.push(format!("chain of length {} (verified: {:?})", rep.length, rep.verified));
    }
    match o.format {
        Format::Json => json(o, "distance4_chain", &rep)?,
        Format::Dot => return Err(no_dot("dist4")),
        Format::Text => {
            let mut s = format!("A = {}\nB = {}\ncase {}\n", rep.a, rep.b, rep.case);
            s += &rep.factors[0];
            for (f, m) in rep.factors[1..].iter().zip(&rep.marks) {
                s += &format!(" {} {f}", if *m == ChainMark::Down { "⊃" } else { "⊂" });
            }
            s += &format!("\nlength {}, verified {}\n", rep.length, rep.verified.is_ok());
            s += &format!("fiber product component ranks {:?}\n", rep.fiber_product_ranks);
            write(o, &s)?;
        }
    }
    finish(mismatches)
}

#[derive(Serialize)]
struct ColorCheck {
    a: String,
    b: String,
    same_color: bool,
    expected: bool,
}

#[derive(Serialize)]
struct ColorsReport {
    checks: Vec<ColorCheck>,
    double_covers: usize,
}

fn colors(o: &Opts) -> Outcome {
    let mut checks = Vec::new();
    for (x, y, expected) in [("a,cbC", "a,b", false), ("cabABabAB", "c", true)] {
        let (a, b) = (subgroup(3, x, DEFAULT_ALPHABET)?, subgroup(3, y, DEFAULT_ALPHABET)?);
        checks.push(ColorCheck { a: show(&a), b: show(&b), same_color: same_color(&a, &b), expected });
    }
    let rep = ColorsReport { double_covers: color(&subgroup(3, "a", DEFAULT_ALPHABET)?).covers.len(), checks };
    let mut mismatches: Vec<String> = rep
        .checks
        .iter()
        .filter(|c| c.same_color != c.expected)
        .map(|c| format!("same_color({}, {})", c.a, c.b))
        .collect();
    if rep.double_covers != 7 {
        mismatches.push(format!("{} double covers", rep.double_covers));
    }
    match o.format {
        Format::Json => json(o, "colors", &rep)?,
        Format::Dot => return Err(no_dot("colors")),
        Format::Text => {
            let mut s = String::new();
            for c in &rep.checks {
                s += &format!("same_color({}, {}) = {}\n", c.a, c.b, c.same_color);
            }
            s += &format!("{} double covers\n", rep.double_covers);
            write(o, &s)?;
        }
    }
    finish(mismatches)
}

#[derive(Serialize)]
struct SplittingRecord {
    kept_edges: Vec<usize>,
    vertex_groups: Vec<String>,
}

#[derive(Serialize)]
struct ProjectionReport {
    a: String,
    b: String,
    gate: outspace::subfactor::Definedness,
    lower_bound: LowerBound,
    graph: GraphRecord,
    splittings: Vec<SplittingRecord>,
    factors: Vec<String>,
}

fn project(o: &Opts, a: &str, b: &str) -> Outcome {
    let a = subgroup(o.rank, a, DEFAULT_ALPHABET)?;
    let b = subgroup(o.rank, b, DEFAULT_ALPHABET)?;
    let p = projection_s(&a, &b).map_err(subfactor_failure)?;
    let rep = ProjectionReport {
        a: show(&a),
        b: show(&b),
        gate: p.gate,
        lower_bound: distance_lower_bound(&a, &b, false),
        graph: GraphRecord::from_graph(&p.graph),
        splittings: p
            .splittings
            .iter()
            .map(|s| SplittingRecord {
                kept_edges: s.kept().to_vec(),
                vertex_groups: s.vertex_groups().iter().map(show).collect(),
            })
            .collect(),
        factors: p.factors().iter().map(show).collect(),
    };
    match o.format {
        Format::Json => json(o, "projection", &rep),
        Format::Dot => write(o, &graph_dot(&p.graph, "embedding", &[])),
        Format::Text => {
            let mut s =
                format!("A = {}\nB = {}\ngate {:?}\nlower bound {}\n", rep.a, rep.b, rep.gate, rep.lower_bound.value);
            for sp in &rep.splittings {
                s += &format!("splitting {:?}: {}\n", sp.kept_edges, sp.vertex_groups.join(" "));
            }
            s += &format!("factors in the basis of A: {}\n", rep.factors.join(" "));
            write(o, &s)
        }
    }
}

fn read(p: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
}

fn fold(o: &Opts, from: &Path, guide: &Path) -> Outcome {
    let source = graph_from_json(&read(from)?).map_err(|e| Failure::input(format!("{}: {e}", from.display())))?;
    let text = read(guide)?;
    let kind = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", guide.display())))?
        .get("kind")
        .and_then(|k| k.as_str().map(str::to_string))
        .unwrap_or_default();
    let bad_guide = |e: String| Failure::input(format!("{}: {e}", guide.display()));
    let phi: GraphMorphism<Q> = if kind == "morphism" {
        let m = morphism_from_json(&text).map_err(|e| bad_guide(e.to_string()))?;
        let target = m.target.to_graph().map_err(|e| bad_guide(e.to_string()))?;
        if m.lifts.is_empty() {
            difference_of_markings(&source, &target).map_err(|e| bad_guide(e.to_string()))?
        } else {
            let lifts = m
                .lifts
                .iter()
                .map(|s| Word::parse(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad_guide(e.to_string()))?;
            GraphMorphism::from_lifts(source, target, lifts).map_err(|e| bad_guide(e.to_string()))?
        }
    } else {
        let target = graph_from_json(&text).map_err(|e| bad_guide(e.to_string()))?;
        difference_of_markings(&source, &target).map_err(|e| bad_guide(e.to_string()))?
    };
    let phi = make_optimal(&phi).map_err(|e| Failure::input(e.to_string()))?;
    let path = greedy_folding_path(&phi).map_err(|e| Failure::input(e.to_string()))?;
    let rec = PathRecord::from_path(&path);
    match o.format {
        Format::Json => json(o, "folding_path", &rec),
        Format::Dot => {
            let mut files = Vec::new();
            for (i, f) in rec.frames.iter().enumerate() {
                let g = f.graph.to_graph().map_err(|e| Failure::check(e.to_string()))?;
                files.push((format!("frame{i:03}"), graph_dot(&g, &format!("t={}", f.time), &[])));
            }
            write_dots(o, &files)
        }
        Format::Text => {
            let mut s = format!("initial volume {}\nend time {}\n", rec.initial_volume, rec.end_time);
            for e in &rec.events {
                s += &format!("event {} at {}: {:?}\n", e.index, e.time, e.kind);
            }
            write(o, &s)
        }
    }
}

fn surrogate(o: &Opts) -> SurrogateConfig {
    SurrogateConfig { kmax: o.kmax.unwrap_or(SurrogateConfig::default().kmax), ..SurrogateConfig::default() }
}

fn baseline() -> Result<Baseline, Failure> {
    Baseline::current().map_err(|e| Failure::input(e.to_string()))
}

#[derive(Serialize)]
struct WithBaseline<T> {
    report: T,
    /// Present when the run used the baseline parameters.
    baseline_match: Option<bool>,
}

fn experiment(o: &Opts, name: ExperimentName) -> Outcome {
    if o.format == Format::Dot {
        return Err(no_dot("experiments"));
    }
    let m = mode(o);
    let err = |e: SubfactorError| subfactor_failure(e);
    match name {
        ExperimentName::Behrstock => {
            let base = baseline()?;
            let r = &base.behrstock;
            let cfg = BehrstockConfig {
                rank: o.rank,
                samples: o.samples.unwrap_or(r.samples),
                seed: o.seed.unwrap_or(r.seed),
                moves: r.moves,
                pool: r.pool,
                quantile: r.quantile,
                surrogate: surrogate(o),
            };
            let rep = behrstock(&cfg, m).map_err(err)?;
            let at_baseline = cfg.rank == r.rank
                && cfg.samples == r.samples
                && cfg.seed == r.seed
                && cfg.surrogate == SurrogateConfig::default();
            let baseline_match = at_baseline.then(|| {
                let mut counts = std::collections::BTreeMap::new();
                for t in &rep.triples {
                    for d in t.distances.iter().flatten() {
                        *counts.entry(*d).or_insert(0usize) += 1;
                    }
                }
                rep.xi_hat == r.xi_hat && counts.into_iter().collect::<Vec<_>>() == r.distance_counts
            });
            let mut failures = Vec::new();
            if !rep.violations.is_empty() {
                failures.push(format!("{} triples with two coordinates above xi_hat", rep.violations.len()));
            }
            if baseline_match == Some(false) {
                failures.push("report differs from the baseline".to_string());
            }
            if o.format == Format::Json {
                json(o, "behrstock", WithBaseline { report: &rep, baseline_match })?;
            } else {
                let mut s = String::new();
                for t in &rep.triples {
                    s += &format!("{} {} {} -> {:?}\n", t.factors[0], t.factors[1], t.factors[2], t.distances);
                }
                s += &format!(
                    "{} triples, {} skipped, xi_hat = {}, {} violations, baseline match {:?}\n",
                    rep.triples.len(),
                    rep.skipped,
                    rep.xi_hat,
                    rep.violations.len(),
                    baseline_match
                );
                write(o, &s)?;
            }
            finish(failures)
        }
        ExperimentName::Finiteness => {
            let cfg = BehrstockConfig {
                rank: o.rank,
                seed: o.seed.unwrap_or(1),
                pool: 2000,
                surrogate: surrogate(o),
                ..BehrstockConfig::default()
            };
            let group = same_color_groups(&cfg).into_iter().max_by_key(|g| g.len()).unwrap_or_default();
            if group.len() < 3 {
                return Err(Failure::check("no color class with three factors"));
            }
            let n = o.samples.map_or(group.len(), |s| (s + 2).min(group.len()));
            let rep = finiteness(&group[0], &group[1], &group[2..n], 2, &cfg.surrogate, m).map_err(err)?;
            if o.format == Format::Json {
                json(o, "finiteness", &rep)?;
            } else {
                let mut s = format!("A = {}\nB = {}\n", rep.a, rep.b);
                for r in &rep.rows {
                    s += &format!("{} {:?} {:?}\n", r.factor, r.gate, r.distance);
                }
                s += &format!("{} above {}, {} skipped\n", rep.above.len(), rep.threshold, rep.skipped);
                write(o, &s)?;
            }
            Ok(())
        }
        ExperimentName::Bgi => {
            let mut r = rng(o.seed.unwrap_or(1));
            let phi = random_automorphism(o.rank, 6, &mut r);
            let path = natural_path(&phi).map_err(err)?;
            let gens: Vec<Word> = (0..o.rank - 1).map(Word::generator).collect();
            let a = SubgroupGraph::new(o.rank, &gens).map_err(|e| Failure::input(e.to_string()))?;
            let rep = bgi_proxy(&path, &a, &surrogate(o)).map_err(err)?;
            if o.format == Format::Json {
                json(o, "bgi", &rep)?;
            } else {
                let s = format!(
                    "A = {}\n{} samples, middle {:?}\ndiameters {:?}\ndiameter {:?}, outside the middle {:?}\n{} interval violations\n",
                    rep.factor,
                    rep.samples,
                    rep.middle,
                    rep.sample_diameters,
                    rep.diameter,
                    rep.outside_middle_diameter,
                    rep.interval_violations.len()
                );
                write(o, &s)?;
            }
            finish(rep.interval_violations.clone())
        }
        ExperimentName::Hamenstadt => {
            let base = baseline()?;
            let h = &base.hamenstadt;
            let seed = o.seed.unwrap_or(h.seed);
            let rep = hamenstadt_demo(&h.lengths, seed, &surrogate(o), m).map_err(err)?;
            let got: Vec<Option<u32>> = rep.rows.iter().map(|r| r.max_diameter).collect();
            let at_baseline = seed == h.seed && surrogate(o) == SurrogateConfig::default();
            let baseline_match =
                at_baseline.then(|| got == h.max_diameters.iter().map(|&d| Some(d)).collect::<Vec<_>>());
            if o.format == Format::Json {
                json(o, "hamenstadt", WithBaseline { report: &rep, baseline_match })?;
            } else {
                let mut s = String::from("length\tevents\tmax_diameter\tword\n");
                for r in &rep.rows {
                    s += &format!("{}\t{}\t{:?}\t{}\n", r.length, r.events, r.max_diameter, r.word);
                }
                s += &format!("constant {}, baseline match {:?}\n", rep.constant, baseline_match);
                write(o, &s)?;
            }
            let mut failures = Vec::new();
            if !rep.constant {
                failures.push(format!("diameters {got:?} are not constant"));
            }
            if baseline_match == Some(false) {
                failures.push("report differs from the baseline".to_string());
            }
            finish(failures)
        }
        ExperimentName::Polygrowth => {
            let phi = Automorphism::parse(3, &["a", "ba", "cb"], DEFAULT_ALPHABET).expect("automorphism");
            let rows = polynomial_growth_demo(&phi, &[1, 2, 4, 8], &rank3_panel(), &surrogate(o), m).map_err(err)?;
            if o.format == Format::Json {
                json(o, "polygrowth", &rows)?;
            } else {
                let mut s = String::from("power\tevents\tmax_diameter\n");
                for r in &rows {
                    s += &format!("{}\t{}\t{:?}\n", r.power, r.events, r.max_diameter);
                }
                write(o, &s)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CoverExport {
    base: GraphRecord,
    subgroup: String,
    cover: GraphRecord,
    attachment: Attachment,
    omega: OmegaData,
}

fn export(o: &Opts, kind: ExportKind, from: Option<&Path>, sub: Option<&str>) -> Outcome {
    let g = match from {
        Some(p) => graph_from_json(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => MarkedGraph::<Q>::standard_rose(o.rank),
    };
    let Some(gens) = sub else {
        return match kind {
            ExportKind::Dot => write(o, &graph_dot(&g, "graph", &[])),
            ExportKind::Json => json(o, "marked_graph", GraphRecord::from_graph(&g)),
        };
    };
    let h = subgroup(g.rank(), gens, DEFAULT_ALPHABET)?;
    let c = core_cover(&h, &g).map_err(|e| Failure::input(e.to_string()))?;
    let omega = omega_data(&c);
    match kind {
        ExportKind::Dot => write(o, &cover_dot(&c, &omega, &show(&h))),
        ExportKind::Json => json(
            o,
            "cover",
            CoverExport {
                base: GraphRecord::from_graph(&g),
                subgroup: show(&h),
                cover: GraphRecord::from_graph(&c.as_marked_graph()),
                attachment: classify_attachment(&c),
                omega,
            },
        ),
    }
}
