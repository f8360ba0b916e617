//! Coset calculi and Schreier diagrams.
//!
//! For a subgroup `H ≤ G` the right cosets `K = Hg` carry a digraph with
//! an arrow `K → Kh` per `h ∈ S`; unlike group lattices it may have loops
//! (`Kh = K`) and multiple arrows (`Kh = Kh'`, `h ≠ h'`). Functions on
//! cosets embed into the lattice calculus as the span of the indicators
//! `e^K = Σ_{g∈K} e^g`; the restricted calculus obeys
//! `d e^K = Σ_h (e^{Kh⁻¹} − e^K) θ^h` and `θ^h e^K = e^{Kh⁻¹} θ^h`.
//! Loops and multi-edges give the reduction relations `e^K θ^h` and
//! `e^K (θ^{h₁} − θ^{h₂})`; they are reported, not imposed.

use crate::algebra::ScalarFn;
use crate::forms::{Calculus, Form, ScalarForm};
use crate::group::Elem;
use crate::lattice::GroupLattice;
use crate::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Value};

const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The Schreier diagram of `(G, S, H)`.
#[derive(Debug, Clone)]
pub struct CosetDiagram {
    subgroup: Vec<Elem>,
    /// Sorted cosets, ordered by least element; the representative of a
    /// coset is its least element.
    cosets: Vec<Vec<Elem>>,
    coset_of: Vec<usize>,
    /// `action[k][pos]`: index of `K · s[pos]`.
    action: Vec<Vec<usize>>,
}

/// One reduction relation of a coset calculus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionRelation {
    /// `e^K θ^h = 0` for a loop at coset `K` (s-position `h`).
    Loop { coset: usize, h: usize },
    /// `e^K (θ^{h₁} − θ^{h₂}) = 0` for a multiple arrow.
    MultiEdge { coset: usize, h1: usize, h2: usize },
}

pub fn build_coset_diagram(lattice: &GroupLattice, subgroup: &[Elem]) -> Result<CosetDiagram> {
    let group = lattice.group();
    let mut h: Vec<Elem> = subgroup.to_vec();
    h.sort_unstable();
    h.dedup();
    if !group.is_subgroup(&h) {
        let labels: Vec<&str> = h.iter().map(|&g| group.label(g)).collect();
        return Err(Error::NotSubgroup(format!("{{{}}}", labels.join(","))));
    }
    let n = group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut cosets: Vec<Vec<Elem>> = Vec::new();
    for g in group.elements() {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let id = cosets.len();
        let mut members: Vec<Elem> = h.iter().map(|&x| group.mul(x, g)).collect();
        members.sort_unstable();
        for &m in &members {
            coset_of[m] = id;
        }
        cosets.push(members);
    }
    let action = cosets
        .iter()
        .map(|members| {
            lattice
                .s()
                .iter()
                .map(|&s| coset_of[group.mul(members[0], s)])
                .collect()
        })
        .collect();
    Ok(CosetDiagram {
        subgroup: h,
        cosets,
        coset_of,
        action,
    })
}

impl CosetDiagram {
    pub fn subgroup(&self) -> &[Elem] {
        &self.subgroup
    }

    pub fn num_cosets(&self) -> usize {
        self.cosets.len()
    }

    pub fn coset(&self, k: usize) -> &[Elem] {
        &self.cosets[k]
    }

    pub fn coset_of(&self, g: Elem) -> usize {
        self.coset_of[g]
    }

    pub fn representative(&self, k: usize) -> Elem {
        self.cosets[k][0]
    }

    /// `K · s[pos]`.
    pub fn act(&self, k: usize, pos: usize) -> usize {
        self.action[k][pos]
    }

    /// Coset label: `H` for the subgroup itself, else `H` + representative.
    pub fn label(&self, lattice: &GroupLattice, k: usize) -> String {
        let rep = self.representative(k);
        if rep == lattice.group().identity() {
            "H".to_string()
        } else {
            format!("H{}", lattice.group().label(rep))
        }
    }

    /// The full edge multiset `(K, s-position, K')`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.action
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(pos, &k2)| (k, pos, k2)))
    }

    /// Loops `(K, s-position)` with `K · h = K`.
    pub fn loops(&self) -> Vec<(usize, usize)> {
        self.edges()
            .filter_map(|(k, pos, k2)| (k == k2).then_some((k, pos)))
            .collect()
    }

    /// Unordered multi-edge groups: `(K, K', positions)` with at least two
    /// distinct `h` sending `K` to `K'`.
    pub fn multi_edges(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let mut out = Vec::new();
        for k in 0..self.num_cosets() {
            let mut by_target: Vec<(usize, Vec<usize>)> = Vec::new();
            for (pos, &k2) in self.action[k].iter().enumerate() {
                match by_target.iter_mut().find(|(t, _)| *t == k2) {
                    Some((_, v)) => v.push(pos),
                    None => by_target.push((k2, vec![pos])),
                }
            }
            for (k2, positions) in by_target {
                if positions.len() >= 2 {
                    out.push((k, k2, positions));
                }
            }
        }
        out
    }

    /// All loop and multi-edge reduction relations, deterministically
    /// ordered; multi-edge groups are reported pairwise against the first
    /// member.
    pub fn reduction_relations(&self) -> Vec<ReductionRelation> {
        let mut out = Vec::new();
        for (coset, h) in self.loops() {
            out.push(ReductionRelation::Loop { coset, h });
        }
        for (coset, _, positions) in self.multi_edges() {
            for &later in &positions[1..] {
                out.push(ReductionRelation::MultiEdge {
                    coset,
                    h1: positions[0],
                    h2: later,
                });
            }
        }
        out
    }

    /// The 1-form of a reduction relation in the ambient calculus.
    pub fn relation_1form(&self, rel: &ReductionRelation) -> ScalarForm {
        let mut out = Form::zero(1);
        match rel {
            ReductionRelation::Loop { coset, h } => {
                for &g in &self.cosets[*coset] {
                    out.add_term(g, vec![*h as u8], C_ONE);
                }
            }
            ReductionRelation::MultiEdge { coset, h1, h2 } => {
                for &g in &self.cosets[*coset] {
                    out.add_term(g, vec![*h1 as u8], C_ONE);
                    out.add_term(g, vec![*h2 as u8], -C_ONE);
                }
            }
        }
        out
    }

    /// DOT rendering with loops and parallel edges preserved.
    pub fn to_dot(&self, lattice: &GroupLattice) -> String {
        let mut out = String::from("digraph coset {\n");
        for k in 0..self.num_cosets() {
            out.push_str(&format!("  \"{}\";\n", self.label(lattice, k)));
        }
        for (k, pos, k2) in self.edges() {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.label(lattice, k),
                self.label(lattice, k2),
                lattice.group().label(lattice.s()[pos])
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Action table as JSON: `{coset_label: {h_label: coset_label}}`, plus
    /// coset membership.
    pub fn to_json(&self, lattice: &GroupLattice) -> Value {
        let group = lattice.group();
        let cosets: serde_json::Map<String, Value> = (0..self.num_cosets())
            .map(|k| {
                (
                    self.label(lattice, k),
                    json!(self.cosets[k]
                        .iter()
                        .map(|&g| group.label(g).to_string())
                        .collect::<Vec<_>>()),
                )
            })
            .collect();
        let action: serde_json::Map<String, Value> = (0..self.num_cosets())
            .map(|k| {
                let row: serde_json::Map<String, Value> = lattice
                    .s()
                    .iter()
                    .enumerate()
                    .map(|(pos, &h)| {
                        (
                            group.label(h).to_string(),
                            json!(self.label(lattice, self.action[k][pos])),
                        )
                    })
                    .collect();
                (self.label(lattice, k), Value::Object(row))
            })
            .collect();
        json!({
            "cosets": cosets,
            "action": action,
            "loops": self
                .loops()
                .iter()
                .map(|(k, pos)| json!([self.label(lattice, *k), group.label(lattice.s()[*pos])]))
                .collect::<Vec<_>>(),
        })
    }
}

/// The restricted calculus on functions of cosets, evaluated inside the
/// ambient lattice calculus.
pub struct CosetCalculus<'a> {
    cal: &'a Calculus,
    diagram: &'a CosetDiagram,
}

impl<'a> CosetCalculus<'a> {
    pub fn new(cal: &'a Calculus, diagram: &'a CosetDiagram) -> Self {
        CosetCalculus { cal, diagram }
    }

    /// `e^K` as an element of the ambient algebra.
    pub fn e_coset(&self, k: usize) -> ScalarFn {
        ScalarFn::indicator_set(self.cal.group().order(), self.diagram.coset(k))
    }

    /// A coset function `F = Σ F(K) e^K` embedded in the ambient algebra.
    pub fn embed(&self, values: &[Complex64]) -> ScalarFn {
        let n = self.cal.group().order();
        ScalarFn::from_fn(n, |g| values[self.diagram.coset_of(g)])
    }

    /// Whether an ambient function lies in the coset subalgebra.
    pub fn is_coset_function(&self, f: &ScalarFn, tol: f64) -> bool {
        (0..self.diagram.num_cosets()).all(|k| {
            let members = self.diagram.coset(k);
            let v = f.value(members[0]);
            members.iter().all(|&g| (f.value(g) - v).norm() <= tol)
        })
    }

    /// `d e^K`, computed in the ambient calculus; equals
    /// `Σ_h (e^{Kh⁻¹} − e^K) θ^h` by the restricted formula.
    pub fn d_coset(&self, k: usize) -> ScalarForm {
        self.cal
            .d(&ScalarForm::from_function(&self.e_coset(k)))
    }

    /// The restricted-formula version of `d e^K`, for cross-checks:
    /// `Σ_h (e^{Kh⁻¹} − e^K) θ^h`.
    pub fn d_coset_restricted(&self, k: usize) -> ScalarForm {
        let group = self.cal.group();
        let lattice = self.cal.lattice();
        let n = group.order();
        let mut out = Form::zero(1);
        for (pos, &h) in lattice.s().iter().enumerate() {
            // K h⁻¹ as a coset: representative rep(K) h⁻¹
            let rep = self.diagram.representative(k);
            let target = self.diagram.coset_of(group.mul(rep, group.inv(h)));
            let coeff = ScalarFn::indicator_set(n, self.diagram.coset(target))
                .sub(&self.e_coset(k));
            for g in group.elements() {
                let c = *coeff.value(g);
                if c.norm() > 0.0 {
                    out.add_term(g, vec![pos as u8], c);
                }
            }
        }
        out
    }

    /// Verifies that `d` of each reduction relation lies in the 2-form span
    /// of the relation-generated ideal (relation · Ω¹ + Ω¹ · relation),
    /// so no new higher relations appear.
    pub fn relations_close_under_d(&self, rels: &[ReductionRelation]) -> Result<bool> {
        let cal = self.cal;
        let lattice = cal.lattice();
        let group = cal.group();
        let n = group.order();
        let s_len = lattice.s_len();
        let dim = n * s_len * s_len;
        let flatten = |form: &ScalarForm| -> Result<Vec<f64>> {
            let nf = cal.normal_form(form)?;
            let mut v = vec![0.0; dim];
            for ((g, w), c) in nf.terms() {
                debug_assert!(c.im.abs() < 1e-9);
                v[(g * s_len + w[0] as usize) * s_len + w[1] as usize] = c.re;
            }
            Ok(v)
        };
        // span generated by rel · e^g θ^p and e^g θ^p · rel, restricted to
        // the sites where the products are nonzero
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for rel in rels {
            let rho = self.diagram.relation_1form(rel);
            let mut support: Vec<Elem> = Vec::new();
            let mut targets: Vec<Elem> = Vec::new();
            for ((g, w), _) in rho.terms() {
                support.push(*g);
                targets.push(group.mul(*g, lattice.s()[w[0] as usize]));
            }
            support.sort_unstable();
            support.dedup();
            targets.sort_unstable();
            targets.dedup();
            for pos in 0..s_len {
                for &t in &targets {
                    let basis = ScalarForm::monomial(t, vec![pos as u8], C_ONE);
                    columns.push(flatten(&cal.mul(&rho, &basis))?);
                }
                for &sup in &support {
                    // e^g θ^pos · ρ is nonzero iff g · s[pos] hits the support
                    let g = group.mul(sup, group.inv(lattice.s()[pos]));
                    let basis = ScalarForm::monomial(g, vec![pos as u8], C_ONE);
                    columns.push(flatten(&cal.mul(&basis, &rho))?);
                }
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for mut col in columns {
            if dot(&col, &col).sqrt() <= 1e-12 {
                continue;
            }
            for q in &ortho {
                let d = dot(q, &col);
                if d != 0.0 {
                    for (c, qv) in col.iter_mut().zip(q) {
                        *c -= d * qv;
                    }
                }
            }
            let norm = dot(&col, &col).sqrt();
            if norm > 1e-9 {
                for c in col.iter_mut() {
                    *c /= norm;
                }
                ortho.push(col);
            }
        }
        for rel in rels {
            let rho = self.diagram.relation_1form(rel);
            let mut target = flatten(&cal.d(&rho))?;
            for q in &ortho {
                let d = dot(q, &target);
                for (t, qv) in target.iter_mut().zip(q) {
                    *t -= d * qv;
                }
            }
            if dot(&target, &target).sqrt() > 1e-9 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Reduction relations rendered as JSON.
pub fn relations_to_json(
    lattice: &GroupLattice,
    diagram: &CosetDiagram,
    rels: &[ReductionRelation],
) -> Value {
    let group = lattice.group();
    json!(rels
        .iter()
        .map(|rel| match rel {
            ReductionRelation::Loop { coset, h } => json!({
                "kind": "loop",
                "coset": diagram.label(lattice, *coset),
                "form": format!(
                    "e^{} θ^{}",
                    diagram.label(lattice, *coset),
                    group.label(lattice.s()[*h])
                ),
            }),
            ReductionRelation::MultiEdge { coset, h1, h2 } => json!({
                "kind": "multi-edge",
                "coset": diagram.label(lattice, *coset),
                "form": format!(
                    "e^{} (θ^{} − θ^{})",
                    diagram.label(lattice, *coset),
                    group.label(lattice.s()[*h1]),
                    group.label(lattice.s()[*h2])
                ),
            }),
        })
        .collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec};

    fn calculus(spec: &str, s: &str) -> Calculus {
        let g = build_group(&GroupSpec::parse(spec).unwrap()).unwrap();
        Calculus::new(GroupLattice::from_labels(g, s).unwrap())
    }

    #[test]
    fn s3_cosets_with_loops() {
        let cal = calculus("S(3)", "(12),(13),(23)");
        let group = cal.group();
        let h: Vec<Elem> = ["e", "(12)"].iter().map(|l| group.resolve(l).unwrap()).collect();
        let d = build_coset_diagram(cal.lattice(), &h).unwrap();
        assert_eq!(d.num_cosets(), 3);
        // action row of H: (12) ↦ H, (13) ↦ H(13), (23) ↦ H(23),
        // cosets identified by membership
        let coset_of = |l: &str| d.coset_of(group.resolve(l).unwrap());
        assert_eq!(d.label(cal.lattice(), 0), "H");
        let pos = |l: &str| cal.lattice().s_index(group.resolve(l).unwrap()).unwrap();
        assert_eq!(d.act(0, pos("(12)")), 0);
        assert_eq!(d.act(0, pos("(13)")), coset_of("(13)"));
        assert_eq!(d.act(0, pos("(23)")), coset_of("(23)"));
        // loops: H ↺ (12), H(13) ↺ (23), H(23) ↺ (13)
        let loops = d.loops();
        assert_eq!(loops.len(), 3);
        let rels = d.reduction_relations();
        assert_eq!(rels.len(), 3);
        let loop_ids: Vec<(usize, &str)> = loops
            .iter()
            .map(|(k, pos)| (*k, group.label(cal.lattice().s()[*pos])))
            .collect();
        assert!(loop_ids.contains(&(coset_of("e"), "(12)")));
        assert!(loop_ids.contains(&(coset_of("(13)"), "(23)")));
        assert!(loop_ids.contains(&(coset_of("(23)"), "(13)")));
        // the diagram DOT has self-loop edges
        let dot = d.to_dot(cal.lattice());
        assert!(dot.contains("\"H\" -> \"H\""));
        // no new higher relations from d
        let cc = CosetCalculus::new(&cal, &d);
        assert!(cc.relations_close_under_d(&rels).unwrap());
    }

    #[test]
    fn s3_multi_edges() {
        let cal = calculus("S(3)", "(12),(13),(23)");
        let group = cal.group();
        let h: Vec<Elem> = ["e", "(123)", "(132)"]
            .iter()
            .map(|l| group.resolve(l).unwrap())
            .collect();
        let d = build_coset_diagram(cal.lattice(), &h).unwrap();
        assert_eq!(d.num_cosets(), 2);
        let multi = d.multi_edges();
        // all three transpositions map H ↔ H(12): one triple each way
        assert_eq!(multi.len(), 2);
        assert!(multi.iter().all(|(_, _, positions)| positions.len() == 3));
        let rels = d.reduction_relations();
        // pairwise relations θ^{(12)} = θ^{(13)} = θ^{(23)} on both cosets
        assert_eq!(rels.len(), 4);
        let cc = CosetCalculus::new(&cal, &d);
        assert!(cc.relations_close_under_d(&rels).unwrap());
    }

    #[test]
    fn z6_coset_diagram() {
        let cal = calculus("Z(6)", "1,2,3");
        let d = build_coset_diagram(cal.lattice(), &[0, 2, 4]).unwrap();
        assert_eq!(d.num_cosets(), 2);
        // h=2 loops at both cosets; h ∈ {1,3} are double arrows each way
        let loops = d.loops();
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|&(_, pos)| cal.lattice().s()[pos] == 2));
        let multi = d.multi_edges();
        assert_eq!(multi.len(), 2);
        for (k, k2, positions) in &multi {
            assert_ne!(k, k2);
            let steps: Vec<Elem> = positions.iter().map(|&p| cal.lattice().s()[p]).collect();
            assert_eq!(steps, vec![1, 3]);
        }
        // Schreier out-multiplicity: each coset emits |S| arrows
        for k in 0..d.num_cosets() {
            assert_eq!(d.edges().filter(|(a, _, _)| *a == k).count(), 3);
        }
    }

    #[test]
    fn trivial_subgroup_reproduces_lattice() {
        let cal = calculus("Z(4)", "1,2");
        let d = build_coset_diagram(cal.lattice(), &[0]).unwrap();
        assert_eq!(d.num_cosets(), 4);
        assert!(d.loops().is_empty());
        assert!(d.multi_edges().is_empty());
        for g in cal.group().elements() {
            for (pos, &h) in cal.lattice().s().iter().enumerate() {
                assert_eq!(d.act(d.coset_of(g), pos), d.coset_of(cal.group().mul(g, h)));
            }
        }
        // restriction is the full calculus: every function is a coset function
        let cc = CosetCalculus::new(&cal, &d);
        let f = ScalarFn::from_fn(4, |g| Complex64::new(g as f64, 1.0));
        assert!(cc.is_coset_function(&f, 1e-12));
    }

    #[test]
    fn not_a_subgroup_is_rejected() {
        let cal = calculus("S(3)", "(12),(13),(23)");
        let group = cal.group();
        let bad: Vec<Elem> = ["e", "(12)", "(13)"]
            .iter()
            .map(|l| group.resolve(l).unwrap())
            .collect();
        assert!(matches!(
            build_coset_diagram(cal.lattice(), &bad),
            Err(Error::NotSubgroup(_))
        ));
    }

    #[test]
    fn restricted_calculus_formulas() {
        let cal = calculus("S(3)", "(12),(13),(23)");
        let group = cal.group();
        let h: Vec<Elem> = ["e", "(12)"].iter().map(|l| group.resolve(l).unwrap()).collect();
        let d = build_coset_diagram(cal.lattice(), &h).unwrap();
        let cc = CosetCalculus::new(&cal, &d);
        for k in 0..d.num_cosets() {
            // ambient d agrees with the restricted formula
            let ambient = cc.d_coset(k);
            let restricted = cc.d_coset_restricted(k);
            assert!(ambient.sub(&restricted).max_norm() < 1e-12);
            // θ^h e^K = e^{Kh⁻¹} θ^h
            for pos in 0..cal.lattice().s_len() {
                let th = cal.theta_h(pos);
                let ek = ScalarForm::from_function(&cc.e_coset(k));
                let lhs = cal.mul(&th, &ek);
                let hinv = group.inv(cal.lattice().s()[pos]);
                let target = d.coset_of(group.mul(d.representative(k), hinv));
                let rhs = cal.mul(&ScalarForm::from_function(&cc.e_coset(target)), &th);
                assert!(lhs.sub(&rhs).max_norm() < 1e-12);
            }
        }
        // Leibniz within the coset algebra
        let f = cc.embed(&[
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 1.5),
        ]);
        let f2 = cc.embed(&[
            Complex64::new(2.0, -1.0),
            Complex64::new(0.25, 1.0),
            Complex64::new(1.0, 0.0),
        ]);
        let lhs = cal.d(&ScalarForm::from_function(&f.mul(&f2)));
        let rhs = cal
            .mul(&cal.d(&ScalarForm::from_function(&f)), &ScalarForm::from_function(&f2))
            .add(&cal.mul(
                &ScalarForm::from_function(&f),
                &cal.d(&ScalarForm::from_function(&f2)),
            ));
        assert!(lhs.sub(&rhs).max_norm() < 1e-12);
        // d of each relation computed two ways:
        // d(ρ) = θρ + ρθ − Δ(ρ) exactly, so d(ρ) ≡ −Δ(ρ) modulo the
        // relation-generated ideal (θρ and ρθ are multiples of ρ)
        let theta = cal.theta();
        for rel in d.reduction_relations() {
            let rho = d.relation_1form(&rel);
            let lhs = cal.d(&rho);
            let rhs = cal
                .mul(&theta, &rho)
                .add(&cal.mul(&rho, &theta))
                .sub(&cal.delta(&rho));
            assert!(cal.forms_equal(&lhs, &rhs).unwrap());
            // −Δ(ρ) = −e^K Δ(θ^h)-style: Δ of the loop relations vanishes
            // on the transposition lattice (S₁ = ∅)
            assert!(cal.delta(&rho).is_zero_exact());
        }
    }

    #[test]
    fn z2_loop_calculus_powers() {
        // ℤ₂/ℤ₂: d θ^{2r} = 0 and d θ^{2r+1} = 2 (θ¹)^{2(r+1)}
        let g = build_group(&GroupSpec::Cyclic(2)).unwrap();
        let lattice = GroupLattice::from_labels(g, "1").unwrap();
        let cal = Calculus::with_options(lattice, 1e-9, 8);
        let d = build_coset_diagram(cal.lattice(), &[0, 1]).unwrap();
        assert_eq!(d.num_cosets(), 1);
        assert_eq!(d.loops().len(), 1);
        let th = cal.theta_h(0);
        let mut power = cal.one_with(&C_ONE);
        let mut powers = vec![power.clone()];
        for _ in 0..7 {
            power = cal.mul(&power, &th);
            powers.push(power.clone());
        }
        for r in 0..=2usize {
            let even = cal.d(&powers[2 * r]);
            assert!(cal.normal_form(&even).unwrap().max_norm() < 1e-12);
            let odd = cal.d(&powers[2 * r + 1]);
            let expected = powers[2 * (r + 1)].scale(Complex64::new(2.0, 0.0));
            assert!(cal.forms_equal(&odd, &expected).unwrap());
        }
    }

    #[test]
    fn z3_single_point_coset_formulas() {
        // ℤ₃/ℤ₃: dθ¹ = 2(θ¹)² − (θ²)² + θ¹θ² + θ²θ¹ and the mirror formula
        let cal = calculus("Z(3)", "1,2");
        let d = build_coset_diagram(cal.lattice(), &[0, 1, 2]).unwrap();
        assert_eq!(d.num_cosets(), 1);
        let d1 = cal.d(&cal.theta_h(0));
        let d2 = cal.d(&cal.theta_h(1));
        let mut e1 = Form::zero(2);
        let mut e2 = Form::zero(2);
        for g in cal.group().elements() {
            e1.add_term(g, vec![0, 0], C_ONE * 2.0);
            e1.add_term(g, vec![1, 1], -C_ONE);
            e1.add_term(g, vec![0, 1], C_ONE);
            e1.add_term(g, vec![1, 0], C_ONE);
            e2.add_term(g, vec![1, 1], C_ONE * 2.0);
            e2.add_term(g, vec![0, 0], -C_ONE);
            e2.add_term(g, vec![0, 1], C_ONE);
            e2.add_term(g, vec![1, 0], C_ONE);
        }
        assert!(d1.sub(&e1).max_norm() < 1e-12);
        assert!(d2.sub(&e2).max_norm() < 1e-12);
    }

    #[test]
    fn s4_eight_coset_table() {
        let cal = calculus("S(4)", "(12),(13),(14),(23),(24),(34)");
        let group = cal.group();
        let h: Vec<Elem> = ["e", "(123)", "(132)"]
            .iter()
            .map(|l| group.resolve(l).unwrap())
            .collect();
        let d = build_coset_diagram(cal.lattice(), &h).unwrap();
        assert_eq!(d.num_cosets(), 8);
        // golden action table keyed by membership labels
        let coset_by_member = |label: &str| -> usize {
            d.coset_of(group.resolve(label).unwrap())
        };
        let table = [
            ("e", [("(12)", "(12)"), ("(13)", "(12)"), ("(14)", "(14)"), ("(23)", "(12)"), ("(24)", "(24)"), ("(34)", "(34)")]),
            ("(12)", [("(12)", "e"), ("(13)", "e"), ("(14)", "(124)"), ("(23)", "e"), ("(24)", "(142)"), ("(34)", "(12)(34)")]),
            ("(14)", [("(12)", "(142)"), ("(13)", "(12)(34)"), ("(14)", "e"), ("(23)", "(124)"), ("(24)", "(124)"), ("(34)", "(124)")]),
            ("(24)", [("(12)", "(124)"), ("(13)", "(142)"), ("(14)", "(142)"), ("(23)", "(12)(34)"), ("(24)", "e"), ("(34)", "(142)")]),
            ("(34)", [("(12)", "(12)(34)"), ("(13)", "(124)"), ("(14)", "(12)(34)"), ("(23)", "(142)"), ("(24)", "(12)(34)"), ("(34)", "e")]),
            ("(12)(34)", [("(12)", "(34)"), ("(13)", "(14)"), ("(14)", "(34)"), ("(23)", "(24)"), ("(24)", "(34)"), ("(34)", "(12)")]),
            ("(142)", [("(12)", "(14)"), ("(13)", "(24)"), ("(14)", "(24)"), ("(23)", "(34)"), ("(24)", "(12)"), ("(34)", "(24)")]),
            ("(124)", [("(12)", "(24)"), ("(13)", "(34)"), ("(14)", "(12)"), ("(23)", "(14)"), ("(24)", "(14)"), ("(34)", "(14)")]),
        ];
        for (row_member, entries) in table {
            let row = coset_by_member(row_member);
            for (h_label, target_member) in entries {
                let pos = cal.lattice().s_index(group.resolve(h_label).unwrap()).unwrap();
                assert_eq!(
                    d.act(row, pos),
                    coset_by_member(target_member),
                    "row {row_member}, h {h_label}"
                );
            }
        }
        // 8 multi-edge groups yield the displayed relation structure:
        // each coset has one outgoing triple
        let multi = d.multi_edges();
        assert_eq!(multi.len(), 8);
        assert!(multi.iter().all(|(_, _, p)| p.len() == 3));
        let rels = d.reduction_relations();
        assert_eq!(rels.len(), 16); // two pairwise relations per triple
    }
}
