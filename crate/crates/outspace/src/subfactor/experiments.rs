use super::induced::{classify_intervals, induced_path};
use super::projection::{
    dedup_classes, definedness_gate, factor_set_diameter, projection_s, Definedness, SurrogateConfig,
};
use super::SubfactorError;
use crate::folding::{greedy_folding_path, GreedyFoldingPath};
use crate::free_group::{Automorphism, SubgroupGraph, Word};
use crate::marked_graph::{color, core_cover, one_edge_splittings, Color, MarkedGraph};
use crate::optimal_maps::{difference_of_markings, make_optimal};
use crate::par::{self, Mode};
use crate::random::{random_automorphism, rng};
use crate::scalar::{Scalar, Q};
use crate::whitehead::image;
use serde::Serialize;

/// Parameters of the Behrstock sampling experiment.
#[derive(Clone, Debug, Serialize)]
pub struct BehrstockConfig {
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    /// Nielsen moves per random automorphism.
    pub moves: usize,
    /// Number of random corank-one factors drawn before grouping by color.
    pub pool: usize,
    /// Quantile defining the empirical threshold, as numerator and denominator.
    pub quantile: (usize, usize),
    pub surrogate: SurrogateConfig,
}

impl Default for BehrstockConfig {
    fn default() -> BehrstockConfig {
        BehrstockConfig {
            rank: 3,
            samples: 100,
            seed: 1,
            moves: 6,
            pool: 4000,
            quantile: (19, 20),
            surrogate: SurrogateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleRecord {
    pub factors: [String; 3],
    /// `d_A(B, C)`, `d_B(A, C)`, `d_C(A, B)`.
    pub distances: [Option<u32>; 3],
}

impl TripleRecord {
    /// Number of coordinates strictly above `xi`; undefined coordinates count as above.
    pub fn above(&self, xi: u32) -> usize {
        self.distances.iter().filter(|d| d.is_none_or(|d| d > xi)).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BehrstockReport {
    pub config: BehrstockConfig,
    pub triples: Vec<TripleRecord>,
    /// Triples discarded by the definedness gate or a failed projection.
    pub skipped: usize,
    /// Empirical quantile of all defined coordinates.
    pub xi_hat: u32,
    /// Indices of triples with two or more coordinates above `xi_hat`.
    pub violations: Vec<usize>,
}

impl BehrstockReport {
    /// Triples with two or more coordinates above `xi`.
    pub fn violations_at(&self, xi: u32) -> Vec<usize> {
        (0..self.triples.len()).filter(|&i| self.triples[i].above(xi) >= 2).collect()
    }
}

fn display(h: &SubgroupGraph) -> String {
    h.display_with(crate::free_group::DEFAULT_ALPHABET)
}

/// Nearest-rank quantile of a sorted sample.
fn quantile(sorted: &[u32], (num, den): (usize, usize)) -> u32 {
    if sorted.is_empty() {
        return 0;
    }
    let k = (sorted.len() * num).div_ceil(den).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Random corank-one free factors grouped by color, in order of first appearance, with
/// conjugates removed.
pub fn same_color_groups(cfg: &BehrstockConfig) -> Vec<Vec<SubgroupGraph>> {
    let mut r = rng(cfg.seed);
    let base = SubgroupGraph::new(cfg.rank, &(0..cfg.rank - 1).map(Word::generator).collect::<Vec<_>>()).expect("rank");
    let mut groups: Vec<(Color, Vec<SubgroupGraph>)> = Vec::new();
    for _ in 0..cfg.pool {
        let a = image(&random_automorphism(cfg.rank, cfg.moves, &mut r), &base);
        let c = color(&a);
        match groups.iter_mut().find(|(k, _)| *k == c) {
            Some((_, g)) => {
                if !g.iter().any(|h| h.is_conjugate_to(&a)) {
                    g.push(a)
                }
            }
            None => groups.push((c, vec![a])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn triple_distances(t: &[SubgroupGraph; 3], cfg: &SurrogateConfig) -> Result<Option<[Option<u32>; 3]>, SubfactorError> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if definedness_gate(&t[i], &t[j]) == Definedness::Unknown {
            return Ok(None);
        }
    }
    let mut out = [None; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let a = &t[k];
        let (b, c) = (&t[(k + 1) % 3], &t[(k + 2) % 3]);
        let mut set = projection_s(a, b)?.factors();
        set.extend(projection_s(a, c)?.factors());
        *slot = factor_set_diameter(&dedup_classes(set), cfg)?;
    }
    Ok(Some(out))
}

/// Triples of pairwise same-colored corank-one factors, and the three projection distances of
/// each. At most one coordinate per triple is expected to exceed the threshold.
pub fn behrstock(cfg: &BehrstockConfig, mode: Mode) -> Result<BehrstockReport, SubfactorError> {
    if cfg.rank < 3 {
        return Err(SubfactorError::RankTooSmall(cfg.rank));
    }
    let mut triples: Vec<[SubgroupGraph; 3]> = Vec::new();
    'outer: for g in same_color_groups(cfg) {
        for t in g.chunks_exact(3) {
            if triples.len() == cfg.samples {
                break 'outer;
            }
            triples.push([t[0].clone(), t[1].clone(), t[2].clone()]);
        }
    }
    let results = par::map(mode, &triples, |t| triple_distances(t, &cfg.surrogate));
    let mut records = Vec::new();
    let mut skipped = cfg.samples.saturating_sub(triples.len());
    for (t, res) in triples.iter().zip(results) {
        match res {
            Ok(Some(distances)) => records.push(TripleRecord { factors: t.clone().map(|h| display(&h)), distances }),
            Ok(None) | Err(_) => skipped += 1,
        }
    }
    let mut all: Vec<u32> = records.iter().flat_map(|r| r.distances.iter().flatten().copied()).collect();
    all.sort();
    let xi_hat = quantile(&all, cfg.quantile);
    let mut report = BehrstockReport { config: cfg.clone(), triples: records, skipped, xi_hat, violations: Vec::new() };
    report.violations = report.violations_at(xi_hat);
    Ok(report)
}

/// Distinct nontrivial vertex groups of the one-edge splittings of `A|G`, in the basis of `A`.
pub fn graph_projection<S: Scalar>(
    a: &SubgroupGraph,
    g: &MarkedGraph<S>,
) -> Result<Vec<SubgroupGraph>, SubfactorError> {
    Ok(splitting_factors(&core_cover(a, g)?.as_marked_graph()))
}

/// Distinct nontrivial vertex groups of the one-edge splittings of a marked graph.
pub fn splitting_factors<S: Scalar>(g: &MarkedGraph<S>) -> Vec<SubgroupGraph> {
    let mut out = Vec::new();
    for s in one_edge_splittings(g) {
        out.extend(s.vertex_groups().iter().filter(|h| !h.is_trivial()).cloned());
    }
    dedup_classes(out)
}

/// Greedy folding path from the rose with equal lengths to the rose marked by `phi`.
pub fn natural_path(phi: &Automorphism) -> Result<GreedyFoldingPath<Q>, SubfactorError> {
    let n = phi.rank();
    let lengths = vec![Q::ratio(1, n as i64); n];
    let r = MarkedGraph::rose(n, lengths.clone())?;
    let t = MarkedGraph::rose_with_words(phi.inverse().images().to_vec(), lengths)?;
    let m = difference_of_markings(&r, &t).map_err(|e| SubfactorError::Degenerate(e.to_string()))?;
    let m = make_optimal(&m).map_err(|e| SubfactorError::Degenerate(e.to_string()))?;
    Ok(greedy_folding_path(&m)?)
}

/// The corank-one factors of `F_3` spanned by two elements of `{a, b, c, ab, bc, ac}` that
/// extend to a basis.
pub fn rank3_panel() -> Vec<SubgroupGraph> {
    [["a", "b"], ["a", "c"], ["b", "c"], ["ab", "c"], ["a", "bc"], ["ac", "b"]]
        .iter()
        .map(|g| SubgroupGraph::new(3, &g.map(|w| Word::parse(w).expect("word"))).expect("subgroup"))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PanelRow {
    pub factor: String,
    /// Diameter of the union of the projections at all sample times.
    pub diameter: Option<u32>,
}

/// Projections of each factor of the panel along the path, sampled at the start, every
/// interval midpoint and every event.
pub fn panel_diameters(
    path: &GreedyFoldingPath<Q>,
    panel: &[SubgroupGraph],
    cfg: &SurrogateConfig,
) -> Result<Vec<PanelRow>, SubfactorError> {
    let graphs = path.sample_times().iter().map(|t| path.graph_at(t)).collect::<Result<Vec<_>, _>>()?;
    panel
        .iter()
        .map(|a| {
            let mut set = Vec::new();
            for g in &graphs {
                set.extend(graph_projection(a, g)?);
            }
            Ok(PanelRow { factor: display(a), diameter: factor_set_diameter(&dedup_classes(set), cfg)? })
        })
        .collect()
}

/// Maximum of the values, `None` if any is undefined.
fn max_defined(values: impl IntoIterator<Item = Option<u32>>) -> Option<u32> {
    values.into_iter().try_fold(0, |m, d| d.map(|d| m.max(d)))
}

#[derive(Clone, Debug, Serialize)]
pub struct HamenstadtRow {
    pub length: usize,
    pub word: String,
    pub events: usize,
    pub panel: Vec<PanelRow>,
    pub max_diameter: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HamenstadtReport {
    pub seed: u64,
    pub rows: Vec<HamenstadtRow>,
    /// Whether every row has the same maximal diameter.
    pub constant: bool,
}

/// The automorphism `a ↦ a, b ↦ b, c ↦ cw`.
pub fn hamenstadt_automorphism(w: &Word) -> Automorphism {
    Automorphism::new(3, vec![Word::generator(0), Word::generator(1), Word::generator(2).mul(w)]).expect("automorphism")
}

/// Reduced words in `a, b` of the given lengths, drawn from one seeded stream.
pub fn hamenstadt_words(lengths: &[usize], seed: u64) -> Vec<Word> {
    let mut r = rng(seed);
    lengths.iter().map(|&l| crate::random::random_word(2, l, &mut r)).collect()
}

/// Projection diameters of the panel along the natural folding path from the rose to its image
/// under `a ↦ a, b ↦ b, c ↦ cw` for words `w` of the given lengths.
pub fn hamenstadt_demo(
    lengths: &[usize],
    seed: u64,
    cfg: &SurrogateConfig,
    mode: Mode,
) -> Result<HamenstadtReport, SubfactorError> {
    let words = hamenstadt_words(lengths, seed);
    let panel = rank3_panel();
    let rows = par::map(mode, &words, |w| -> Result<HamenstadtRow, SubfactorError> {
        let path = natural_path(&hamenstadt_automorphism(w))?;
        let panel = panel_diameters(&path, &panel, cfg)?;
        Ok(HamenstadtRow {
            length: w.len(),
            word: w.display_with(crate::free_group::DEFAULT_ALPHABET),
            events: path.events().len(),
            max_diameter: max_defined(panel.iter().map(|r| r.diameter)),
            panel,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let constant = rows.windows(2).all(|p| p[0].max_diameter == p[1].max_diameter);
    Ok(HamenstadtReport { seed, rows, constant })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub power: i64,
    pub events: usize,
    pub panel: Vec<PanelRow>,
    pub max_diameter: Option<u32>,
}

/// Projection diameters of the panel along natural folding paths from the rose to its images
/// under powers of `phi`. For polynomially growing `phi` they stay bounded.
pub fn polynomial_growth_demo(
    phi: &Automorphism,
    powers: &[i64],
    panel: &[SubgroupGraph],
    cfg: &SurrogateConfig,
    mode: Mode,
) -> Result<Vec<GrowthRow>, SubfactorError> {
    par::map(mode, powers, |&m| {
        let path = natural_path(&phi.pow(m))?;
        let panel = panel_diameters(&path, panel, cfg)?;
        Ok(GrowthRow {
            power: m,
            events: path.events().len(),
            max_diameter: max_defined(panel.iter().map(|r| r.diameter)),
            panel,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BgiReport {
    pub factor: String,
    pub samples: usize,
    /// Sample index range of the middle interval.
    pub middle: (usize, usize),
    pub sample_diameters: Vec<Option<u32>>,
    pub diameter: Option<u32>,
    /// Diameter of the union over samples outside the middle interval.
    pub outside_middle_diameter: Option<u32>,
    pub interval_violations: Vec<String>,
}

/// Projections of the induced path of `A` to the factors of `A`, sample by sample, split by
/// the three-interval classification.
pub fn bgi_proxy(
    path: &GreedyFoldingPath<Q>,
    a: &SubgroupGraph,
    cfg: &SurrogateConfig,
) -> Result<BgiReport, SubfactorError> {
    let ip = induced_path(a, path)?;
    let cls = classify_intervals(&ip);
    let middle = cls.middle();
    let mut sets = Vec::new();
    for s in &ip.samples {
        sets.push(splitting_factors(&s.cover.as_marked_graph()));
    }
    let sample_diameters = sets.iter().map(|s| factor_set_diameter(s, cfg)).collect::<Result<Vec<_>, _>>()?;
    let union = |pick: &dyn Fn(usize) -> bool| -> Result<Option<u32>, SubfactorError> {
        let u: Vec<SubgroupGraph> =
            sets.iter().enumerate().filter(|(i, _)| pick(*i)).flat_map(|(_, s)| s.clone()).collect();
        factor_set_diameter(&dedup_classes(u), cfg)
    };
    Ok(BgiReport {
        factor: display(a),
        samples: ip.samples.len(),
        middle: (middle.start, middle.end),
        sample_diameters,
        diameter: union(&|_| true)?,
        outside_middle_diameter: union(&|i| !middle.contains(&i))?,
        interval_violations: cls.violations.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FinitenessRow {
    pub factor: String,
    pub gate: Option<Definedness>,
    pub distance: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinitenessReport {
    pub a: String,
    pub b: String,
    pub threshold: u32,
    pub rows: Vec<FinitenessRow>,
    /// Candidates `C` with `d_C(A, B)` above the threshold.
    pub above: Vec<String>,
    pub skipped: usize,
}

/// `d_C(A, B)` for each candidate `C` on which both projections pass the definedness gate.
pub fn finiteness(
    a: &SubgroupGraph,
    b: &SubgroupGraph,
    candidates: &[SubgroupGraph],
    threshold: u32,
    cfg: &SurrogateConfig,
    mode: Mode,
) -> Result<FinitenessReport, SubfactorError> {
    let rows = par::map(mode, candidates, |c| {
        let (ga, gb) = (definedness_gate(c, a), definedness_gate(c, b));
        let gate = if ga == Definedness::Unknown || gb == Definedness::Unknown { None } else { Some(ga) };
        let distance = gate.and_then(|_| {
            let mut set = projection_s(c, a).ok()?.factors();
            set.extend(projection_s(c, b).ok()?.factors());
            factor_set_diameter(&dedup_classes(set), cfg).ok().flatten()
        });
        FinitenessRow { factor: display(c), gate, distance }
    });
    let skipped = rows.iter().filter(|r| r.distance.is_none()).count();
    let above = rows.iter().filter(|r| r.distance.is_some_and(|d| d > threshold)).map(|r| r.factor.clone()).collect();
    Ok(FinitenessReport { a: display(a), b: display(b), threshold, rows, above, skipped })
}

/// Parameters of the projection stability experiment.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityConfig {
    pub seed: u64,
    /// Same-colored pairs `(A, B)` drawn from the color groups of [`BehrstockConfig`].
    pub pairs: usize,
    /// Graphs in which `B` is embedded, per pair.
    pub graphs: usize,
    /// Nielsen moves fixing `B` applied to the complement of each graph.
    pub moves: usize,
    pub pool: BehrstockConfig,
}

impl Default for StabilityConfig {
    fn default() -> StabilityConfig {
        StabilityConfig { seed: 3, pairs: 20, graphs: 20, moves: 4, pool: BehrstockConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub a: String,
    pub b: String,
    /// Diameter of the union of the projections of `B` computed from every graph.
    pub diameter: Option<u32>,
    /// Graphs in which `A` is pinched.
    pub pinched: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub config: StabilityConfig,
    pub rows: Vec<StabilityRow>,
    pub max_diameter: Option<u32>,
    pub pinched: usize,
}

/// Projection of `B` to the factors of a same-colored `A`, computed from many roses in which
/// `B` is embedded. Also counts roses in which `A` is pinched, which should never happen for
/// distinct same-colored factors.
pub fn projection_stability(cfg: &StabilityConfig, mode: Mode) -> Result<StabilityReport, SubfactorError> {
    let pairs: Vec<(u64, SubgroupGraph, SubgroupGraph)> = same_color_groups(&cfg.pool)
        .into_iter()
        .filter(|g| g.len() >= 2)
        .take(cfg.pairs)
        .enumerate()
        .map(|(i, g)| (cfg.seed.wrapping_add(i as u64), g[0].clone(), g[1].clone()))
        .collect();
    let rows = par::map(mode, &pairs, |(seed, a, b)| -> Result<StabilityRow, SubfactorError> {
        let mut r = rng(*seed);
        let d0 = crate::whitehead::complement(b)?.basis();
        let mut set = Vec::new();
        let mut pinched = 0;
        for i in 0..cfg.graphs {
            let d = if i == 0 { d0.clone() } else { super::projection::twisted_complement(b, &d0, cfg.moves, &mut r) };
            let g = super::projection::embedding_rose(b, &d)?;
            let cover = core_cover(a, &g)?;
            pinched += crate::marked_graph::classify_attachment(&cover).pinched as usize;
            set.extend(splitting_factors(&cover.as_marked_graph()));
        }
        Ok(StabilityRow {
            a: display(a),
            b: display(b),
            diameter: factor_set_diameter(&dedup_classes(set), &cfg.pool.surrogate)?,
            pinched,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let max_diameter = max_defined(rows.iter().map(|r| r.diameter));
    let pinched = rows.iter().map(|r| r.pinched).sum();
    Ok(StabilityReport { config: cfg.clone(), rows, max_diameter, pinched })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_quantile() {
        let xs = [1, 1, 1, 2, 5];
        assert_eq!(quantile(&xs, (1, 2)), 1);
        assert_eq!(quantile(&xs, (4, 5)), 2);
        assert_eq!(quantile(&xs, (19, 20)), 5);
        assert_eq!(quantile(&[], (1, 2)), 0);
    }

    #[test]
    fn panel_factors_extend_to_bases() {
        for a in rank3_panel() {
            assert!(crate::whitehead::is_free_factor_bool(&a));
        }
    }

    #[test]
    fn short_words_fold_letter_by_letter() {
        let rep = hamenstadt_demo(&[1, 2], 1, &SurrogateConfig::default(), Mode::Sequential).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows.iter().all(|r| r.events == r.length));
    }
}
