use super::predicates::{GatedCover, PredicateFlags};
use super::SubfactorError;
use crate::free_group::{Automorphism, SubgroupGraph, Word};
use crate::marked_graph::{classify_attachment, core_cover, omega_data, Attachment, CoreCover, MarkedGraph, OmegaData};
use crate::optimal_maps::{difference_of_markings, train_track_gates, GateStructure, GraphMorphism};
use crate::scalar::{Scalar, QL};

/// The automorphism `x ↦ y, y ↦ z, z ↦ zx` on `F_3 = ⟨x, y, z⟩`.
pub fn axis_automorphism() -> Automorphism {
    Automorphism::parse(3, &["y", "z", "zx"], "xyz").expect("valid automorphism")
}

/// The rose with lengths proportional to `1 : λ : λ²`, normalized to volume one.
pub fn axis_rose() -> MarkedGraph<QL> {
    let l = QL::lambda();
    MarkedGraph::rose(3, vec![QL::one(), l.clone(), l.clone() * l]).expect("rose").normalized()
}

/// Train track representative of the axis automorphism on [`axis_rose`].
pub fn axis_map() -> GraphMorphism<QL> {
    let g = axis_rose();
    let h = MarkedGraph::rose_with_words(axis_automorphism().inverse().images().to_vec(), g.lengths().to_vec())
        .expect("rose");
    difference_of_markings(&g, &h).expect("same rank")
}

/// Cover of the graph `k` steps along the axis, realized as the cover of the rose by the
/// image of the subgroup under the `k`-th power.
#[derive(Clone, Debug)]
pub struct AxisRow {
    pub k: i64,
    pub subgroup: SubgroupGraph,
    pub cover: CoreCover<QL>,
    pub omega: OmegaData,
    pub flags: PredicateFlags,
    pub doubly_covered: bool,
    pub attachment: Attachment,
}

pub struct Axis {
    rose: MarkedGraph<QL>,
    gates: GateStructure,
    phi: Automorphism,
}

impl Axis {
    pub fn new() -> Axis {
        let map = axis_map();
        let gates = train_track_gates(&map).expect("self-map");
        Axis { rose: axis_rose(), gates, phi: axis_automorphism() }
    }

    pub fn rose(&self) -> &MarkedGraph<QL> {
        &self.rose
    }
    pub fn gates(&self) -> &GateStructure {
        &self.gates
    }

    pub fn row(&self, a: &SubgroupGraph, k: i64) -> Result<AxisRow, SubfactorError> {
        let pk = self.phi.pow(k);
        let gens: Vec<Word> = a.basis().iter().map(|w| pk.apply(w)).collect();
        let subgroup = SubgroupGraph::new(3, &gens)?;
        let cover = core_cover(&subgroup, &self.rose)?;
        let omega = omega_data(&cover);
        let flags = GatedCover { cover: &cover, gates: &self.gates }.flags(&self.rose.volume());
        let doubly_covered = omega.omega_is_everything();
        let attachment = classify_attachment(&cover);
        Ok(AxisRow { k, subgroup, cover, omega, flags, doubly_covered, attachment })
    }

    pub fn rows(&self, a: &SubgroupGraph, ks: impl IntoIterator<Item = i64>) -> Result<Vec<AxisRow>, SubfactorError> {
        ks.into_iter().map(|k| self.row(a, k)).collect()
    }
}

impl Default for Axis {
    fn default() -> Axis {
        Axis::new()
    }
}

/// The subgroup `⟨x, y⟩`.
pub fn axis_subgroup() -> SubgroupGraph {
    SubgroupGraph::new(3, &[Word::generator(0), Word::generator(1)]).expect("subgroup")
}

/// Covers for `k = -5..=7`.
pub fn figure1() -> Result<Vec<AxisRow>, SubfactorError> {
    Axis::new().rows(&axis_subgroup(), -5..=7)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse_with(s, "xyz").unwrap()).collect();
        SubgroupGraph::new(3, &ws).unwrap()
    }

    #[test]
    fn named_images() {
        let rows = figure1().unwrap();
        assert_eq!(rows.len(), 13);
        assert_eq!(rows[7].subgroup, sub(&["x", "z"]));
        assert_eq!(rows[11].subgroup, sub(&["zxy", "zzx"]));
        assert_eq!(rows[5].cover.carrier().num_vertices(), 1);
    }

    #[test]
    fn predicate_table() {
        let axis = Axis::new();
        for r in axis.rows(&axis_subgroup(), -6..=11).unwrap() {
            assert_eq!(r.flags.p1, r.k <= -1, "P1 at k={}", r.k);
            assert_eq!(r.flags.p3, r.k >= 9, "P3 at k={}", r.k);
            assert_eq!(r.flags.p2, (0..=8).contains(&r.k), "P2 at k={}", r.k);
            assert_eq!(r.doubly_covered, r.k >= 7 || r.k <= -5, "doubly covered at k={}", r.k);
        }
    }
}
