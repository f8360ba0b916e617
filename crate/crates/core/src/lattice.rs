//! The group lattice `(G, S)` and its combinatorial structure.
//!
//! Arrows run `g -> gh` for `h` in `S`. The set `S` splits into
//! `S₀ = {h | h⁻¹ ∈ S}` (biangles), `S₁ = S² ∩ S` (triangles) and the
//! classes `S₂ = S² \ Sₑ` (quadrangles), with multiplicity
//! `|g| = #{(h,h') | hh' = g}` per quadrangle class.

use crate::group::{Elem, GroupTable};
use crate::{Error, Result};
use serde_json::{json, Value};

/// A total map `G -> G`, stored as an index table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteMap {
    map: Vec<Elem>,
}

impl SiteMap {
    pub fn new(map: Vec<Elem>) -> Self {
        SiteMap { map }
    }

    pub fn from_fn(n: usize, f: impl Fn(Elem) -> Elem) -> Self {
        SiteMap {
            map: (0..n).map(f).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |g| g)
    }

    /// Left translation `L_g : g' -> g g'`.
    pub fn left_translation(group: &GroupTable, g: Elem) -> Self {
        Self::from_fn(group.order(), |x| group.mul(g, x))
    }

    /// Right translation `R_g : g' -> g' g`.
    pub fn right_translation(group: &GroupTable, g: Elem) -> Self {
        Self::from_fn(group.order(), |x| group.mul(x, g))
    }

    #[inline]
    pub fn apply(&self, g: Elem) -> Elem {
        self.map[g]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        for &t in &self.map {
            if seen[t] {
                return false;
            }
            seen[t] = true;
        }
        true
    }

    /// `self` after `other`: `(self ∘ other)(g) = self(other(g))`.
    pub fn compose(&self, other: &SiteMap) -> SiteMap {
        SiteMap {
            map: other.map.iter().map(|&g| self.map[g]).collect(),
        }
    }

    pub fn inverse(&self) -> Option<SiteMap> {
        let mut inv = vec![usize::MAX; self.map.len()];
        for (g, &t) in self.map.iter().enumerate() {
            if inv[t] != usize::MAX {
                return None;
            }
            inv[t] = g;
        }
        Some(SiteMap { map: inv })
    }

    /// Preimage lists per target element.
    pub fn preimages(&self) -> Vec<Vec<Elem>> {
        let mut pre = vec![Vec::new(); self.map.len()];
        for (g, &t) in self.map.iter().enumerate() {
            pre[t].push(g);
        }
        pre
    }
}

/// Biangles, triangles and quadrangle classes of a lattice.
///
/// Entries hold positions into `S`, except quadrangle class keys which are
/// group elements.
#[derive(Debug, Clone)]
pub struct Polygons {
    /// Unordered pairs `(i, j)`, `i <= j`, with `s[i] s[j] = e`.
    pub biangles: Vec<(usize, usize)>,
    /// Triples `(h0, h1, h2)` with `s[h1] s[h2] = s[h0]`.
    pub triangles: Vec<(usize, usize, usize)>,
    /// Per class `g` in `S₂`: all ordered pairs `(i, j)` with `s[i] s[j] = g`.
    pub quadrangles: Vec<(Elem, Vec<(usize, usize)>)>,
}

#[derive(Debug, Clone)]
pub struct GroupLattice {
    group: GroupTable,
    s: Vec<Elem>,
    s_pos: Vec<Option<usize>>,
    s0: Vec<Elem>,
    s1: Vec<Elem>,
    s2: Vec<Elem>,
    multiplicity: Vec<(Elem, usize)>,
    bicovariant: bool,
}

impl GroupLattice {
    pub fn new(group: GroupTable, s: &[Elem]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::EmptyS);
        }
        let mut seen = vec![false; group.order()];
        let mut s_vec = Vec::with_capacity(s.len());
        for &h in s {
            if h >= group.order() {
                return Err(Error::UnknownElement(format!("index {h}")));
            }
            if h == group.identity() {
                return Err(Error::IdentityInS);
            }
            if !seen[h] {
                seen[h] = true;
                s_vec.push(h);
            }
        }
        let mut s_pos = vec![None; group.order()];
        for (i, &h) in s_vec.iter().enumerate() {
            s_pos[h] = Some(i);
        }
        let in_s = |g: Elem| s_pos[g].is_some();
        let s0: Vec<Elem> = s_vec.iter().copied().filter(|&h| in_s(group.inv(h))).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        let mut multiplicity: Vec<(Elem, usize)> = Vec::new();
        let mut square_count = vec![0usize; group.order()];
        for &a in &s_vec {
            for &b in &s_vec {
                square_count[group.mul(a, b)] += 1;
            }
        }
        for (g, &count) in square_count.iter().enumerate() {
            if count == 0 {
                continue;
            }
            if in_s(g) {
                s1.push(g);
            } else if g != group.identity() {
                s2.push(g);
                multiplicity.push((g, count));
            }
        }
        let bicovariant = s_vec
            .iter()
            .all(|&g| s_vec.iter().all(|&h| in_s(group.conjugate(g, h))));
        Ok(GroupLattice {
            group,
            s: s_vec,
            s_pos,
            s0,
            s1,
            s2,
            multiplicity,
            bicovariant,
        })
    }

    /// Convenience constructor resolving `S` from labels.
    pub fn from_labels(group: GroupTable, s_labels: &str) -> Result<Self> {
        let s = group.resolve_list(s_labels)?;
        Self::new(group, &s)
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn s(&self) -> &[Elem] {
        &self.s
    }

    pub fn s_len(&self) -> usize {
        self.s.len()
    }

    /// Position of `h` in `S`, if present.
    pub fn s_index(&self, h: Elem) -> Option<usize> {
        self.s_pos[h]
    }

    pub fn s0(&self) -> &[Elem] {
        &self.s0
    }

    pub fn s1(&self) -> &[Elem] {
        &self.s1
    }

    pub fn s2(&self) -> &[Elem] {
        &self.s2
    }

    /// Quadrangle multiplicity `|g|` for `g ∈ S₂` (0 otherwise).
    pub fn multiplicity(&self, g: Elem) -> usize {
        self.multiplicity
            .iter()
            .find(|(k, _)| *k == g)
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }

    /// All arrows `(g, s-position, gh)` in deterministic order.
    pub fn arrows(&self) -> impl Iterator<Item = (Elem, usize, Elem)> + '_ {
        self.group.elements().flat_map(move |g| {
            self.s
                .iter()
                .enumerate()
                .map(move |(i, &h)| (g, i, self.group.mul(g, h)))
        })
    }

    /// Weakly connected components, each sorted, ordered by least element.
    pub fn connected_components(&self) -> Vec<Vec<Elem>> {
        let n = self.order();
        let mut comp = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut head = 0;
            while head < members.len() {
                let g = members[head];
                head += 1;
                for &h in &self.s {
                    for next in [self.group.mul(g, h), self.group.mul(g, self.group.inv(h))] {
                        if comp[next] == usize::MAX {
                            comp[next] = id;
                            members.push(next);
                        }
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// Whether `Sₑ = S ∪ {e}` is a subgroup, in which case the calculus on
    /// each component is the universal one.
    pub fn is_universal(&self) -> bool {
        let mut se: Vec<Elem> = self.s.clone();
        se.push(self.group.identity());
        self.group.is_subgroup(&se)
    }

    pub fn polygons(&self) -> Polygons {
        let mut biangles = Vec::new();
        let mut triangles = Vec::new();
        for (i, &a) in self.s.iter().enumerate() {
            for (j, &b) in self.s.iter().enumerate() {
                let p = self.group.mul(a, b);
                if p == self.group.identity() {
                    if i <= j {
                        biangles.push((i, j));
                    }
                } else if let Some(k) = self.s_pos[p] {
                    triangles.push((k, i, j));
                }
            }
        }
        let quadrangles = self
            .s2
            .iter()
            .map(|&g| {
                let pairs: Vec<(usize, usize)> = self
                    .s
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &a)| {
                        self.s.iter().enumerate().filter_map(move |(j, &b)| {
                            (self.group.mul(a, b) == g).then_some((i, j))
                        })
                    })
                    .collect();
                (g, pairs)
            })
            .collect();
        Polygons {
            biangles,
            triangles,
            quadrangles,
        }
    }

    pub fn is_bicovariant(&self) -> bool {
        self.bicovariant
    }

    /// Whether the right translation `R_g` is differentiable, i.e.
    /// `ad(g⁻¹) S ⊆ S`.
    pub fn is_right_differentiable(&self, g: Elem) -> bool {
        let gi = self.group.inv(g);
        self.s
            .iter()
            .all(|&h| self.s_pos[self.group.conjugate(gi, h)].is_some())
    }

    /// Partitions the ordered pair set of `g ∈ S²` into cycles
    /// `h₁h₂ = h₂h₃ = … = h_r h₁`, each reported as `[h₁, …, h_r]`
    /// (positions into `S`). Requires bicovariance.
    pub fn cycles(&self, g: Elem) -> Result<Vec<Vec<usize>>> {
        if !self.bicovariant {
            let bad = self
                .s
                .iter()
                .find(|&&a| {
                    self.s
                        .iter()
                        .any(|&h| self.s_pos[self.group.conjugate(a, h)].is_none())
                })
                .copied()
                .unwrap_or(self.group.identity());
            return Err(Error::NotBicovariant(self.group.label(bad).to_string()));
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (i, &a) in self.s.iter().enumerate() {
            for (j, &b) in self.s.iter().enumerate() {
                if self.group.mul(a, b) == g {
                    pairs.push((i, j));
                }
            }
        }
        let mut used = vec![false; pairs.len()];
        let mut cycles = Vec::new();
        for start in 0..pairs.len() {
            if used[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut current = pairs[start];
            loop {
                let idx = pairs
                    .iter()
                    .position(|&p| p == current)
                    .expect("successor pair stays in the class under ad-closure");
                if used[idx] {
                    break;
                }
                used[idx] = true;
                cycle.push(current.0);
                // (h1, h2) -> (h2, ad(h2^{-1}) h1)
                let h1 = self.s[current.0];
                let h2 = self.s[current.1];
                let h3 = self.group.conjugate(self.group.inv(h2), h1);
                current = (
                    current.1,
                    self.s_pos[h3].expect("ad-closure keeps cycle inside S"),
                );
            }
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
        }
        Ok(cycles)
    }

    /// All arrows `(g, gh)` whose image under `phi` is neither an arrow nor
    /// a point; empty iff `phi` is differentiable.
    pub fn differentiability_witnesses(&self, phi: &SiteMap) -> Vec<(Elem, Elem)> {
        let mut witnesses = Vec::new();
        for g in self.group.elements() {
            for &h in &self.s {
                let gh = self.group.mul(g, h);
                let step = self.group.mul(self.group.inv(phi.apply(g)), phi.apply(gh));
                if step != self.group.identity() && self.s_pos[step].is_none() {
                    witnesses.push((g, gh));
                }
            }
        }
        witnesses
    }

    pub fn is_differentiable_map(&self, phi: &SiteMap) -> bool {
        self.differentiability_witnesses(phi).is_empty()
    }

    /// DOT rendering with one labeled edge per arrow.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lattice {\n");
        for g in self.group.elements() {
            out.push_str(&format!("  \"{}\";\n", self.group.label(g)));
        }
        for (g, i, gh) in self.arrows() {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.group.label(g),
                self.group.label(gh),
                self.group.label(self.s[i])
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Classification report: `{S0, S1, S2: [{g, multiplicity, pairs, cycles}]}`.
    pub fn classification_json(&self) -> Value {
        let labels = |set: &[Elem]| -> Vec<String> {
            set.iter().map(|&g| self.group.label(g).to_string()).collect()
        };
        let s2: Vec<Value> = self
            .s2
            .iter()
            .map(|&g| {
                let pairs: Vec<Value> = self
                    .polygons()
                    .quadrangles
                    .iter()
                    .find(|(k, _)| *k == g)
                    .map(|(_, pairs)| {
                        pairs
                            .iter()
                            .map(|&(i, j)| {
                                json!([
                                    self.group.label(self.s[i]),
                                    self.group.label(self.s[j])
                                ])
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                let cycles: Value = if self.bicovariant {
                    let cycles = self.cycles(g).unwrap_or_default();
                    json!(cycles
                        .iter()
                        .map(|c| c
                            .iter()
                            .map(|&i| self.group.label(self.s[i]).to_string())
                            .collect::<Vec<_>>())
                        .collect::<Vec<_>>())
                } else {
                    Value::Null
                };
                json!({
                    "g": self.group.label(g),
                    "multiplicity": self.multiplicity(g),
                    "pairs": pairs,
                    "cycles": cycles,
                })
            })
            .collect();
        json!({
            "S0": labels(&self.s0),
            "S1": labels(&self.s1),
            "S2": s2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec};

    fn lattice(spec: &str, s: &str) -> GroupLattice {
        let g = build_group(&GroupSpec::parse(spec).unwrap()).unwrap();
        GroupLattice::from_labels(g, s).unwrap()
    }

    #[test]
    fn z4_arrows() {
        let l = lattice("Z(4)", "1,2");
        assert_eq!(l.arrows().count(), 8);
        let p = l.polygons();
        assert_eq!(p.biangles, vec![(1, 1)]); // s[1] = 2, 2+2 = 0
        assert_eq!(p.triangles, vec![(1, 0, 0)]); // 1+1 = 2
        assert_eq!(p.quadrangles.len(), 1);
        assert_eq!(p.quadrangles[0].0, 3);
        assert_eq!(p.quadrangles[0].1, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn s3_transposition_classification() {
        let l = lattice("S(3)", "(12),(13),(23)");
        assert_eq!(l.s0().len(), 3);
        assert!(l.s1().is_empty());
        let s2: Vec<&str> = l.s2().iter().map(|&g| l.group().label(g)).collect();
        assert_eq!(s2, vec!["(123)", "(132)"]);
        let p = l.polygons();
        assert_eq!(p.biangles.len(), 3);
        assert!(p.triangles.is_empty());
        for (_, pairs) in &p.quadrangles {
            assert_eq!(pairs.len(), 3);
        }
        assert!(l.is_bicovariant());
    }

    #[test]
    fn z6_classification() {
        let l = lattice("Z(6)", "1,2,3");
        let lbl = |set: &[Elem]| -> Vec<&str> {
            set.iter().map(|&g| l.group().label(g)).collect::<Vec<_>>()
        };
        assert_eq!(lbl(l.s0()), vec!["3"]);
        assert_eq!(lbl(l.s1()), vec!["2", "3"]);
        assert_eq!(lbl(l.s2()), vec!["4", "5"]);
    }

    #[test]
    fn disconnected_rotations() {
        let l = lattice("S(3)", "(123),(132)");
        let comps = l.connected_components();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.len() == 3));
        assert!(l.is_universal());
        // component of the unit equals the subgroup closure of S
        assert_eq!(comps[0], l.group().subgroup_closure(l.s()));
    }

    #[test]
    fn components_are_left_cosets() {
        let l = lattice("Z(4)", "2");
        let comps = l.connected_components();
        assert_eq!(comps, vec![vec![0, 2], vec![1, 3]]);
        // BFS oracle for the component of 1
        let g = l.group();
        let h = g.subgroup_closure(l.s());
        let coset: Vec<Elem> = {
            let mut c: Vec<Elem> = h.iter().map(|&x| g.mul(1, x)).collect();
            c.sort_unstable();
            c
        };
        assert_eq!(comps[1], coset);
    }

    #[test]
    fn bicovariance_cases() {
        assert!(lattice("S(3)", "(12),(13),(23)").is_bicovariant());
        assert!(!lattice("S(3)", "(12),(123)").is_bicovariant());
        let a5 = lattice("A(5)", "(12345),(15432),(12)(34)");
        assert!(!a5.is_bicovariant());
        assert_eq!(a5.order(), 60);
        assert!(a5.is_connected());
    }

    #[test]
    fn right_differentiability_matches_map_check() {
        let l = lattice("S(3)", "(12),(123)");
        for g in l.group().elements() {
            let rg = SiteMap::right_translation(l.group(), g);
            assert_eq!(l.is_differentiable_map(&rg), l.is_right_differentiable(g));
        }
        // left translations are always differentiable
        for g in l.group().elements() {
            let lg = SiteMap::left_translation(l.group(), g);
            assert!(l.is_differentiable_map(&lg));
        }
    }

    #[test]
    fn s3_cycles() {
        let l = lattice("S(3)", "(12),(13),(23)");
        let g123 = l.group().resolve("(123)").unwrap();
        let cycles = l.cycles(g123).unwrap();
        assert_eq!(cycles.len(), 1);
        let labels: Vec<&str> = cycles[0].iter().map(|&i| l.group().label(l.s()[i])).collect();
        assert_eq!(labels, vec!["(12)", "(13)", "(23)"]);
    }

    #[test]
    fn a4_cycles_split_in_two() {
        let l = lattice("A(4)", "(123),(243),(134),(142)");
        assert!(l.is_bicovariant());
        assert_eq!(l.s2().len(), 4);
        for &g in l.s2() {
            let cycles = l.cycles(g).unwrap();
            assert_eq!(cycles.len(), 2, "class {}", l.group().label(g));
            let mut lens: Vec<usize> = cycles.iter().map(|c| c.len()).collect();
            lens.sort_unstable();
            assert_eq!(lens, vec![1, 3]);
        }
    }

    #[test]
    fn abelian_cycles_are_short() {
        let l = lattice("Z(6)", "1,2,3");
        for &g in l.s2() {
            for c in l.cycles(g).unwrap() {
                assert!(c.len() <= 2);
            }
        }
        let not_bicov = lattice("S(3)", "(12),(123)");
        assert!(not_bicov.cycles(0).is_err());
    }

    #[test]
    fn cycles_partition_their_class() {
        for (spec, s) in [
            ("Z(6)", "1,2,3"),
            ("S(3)", "(12),(13),(23)"),
            ("A(4)", "(123),(243),(134),(142)"),
        ] {
            let l = lattice(spec, s);
            let g_table = l.group();
            for &class in l.s2() {
                let mut seen_pairs = Vec::new();
                for cycle in l.cycles(class).unwrap() {
                    for (i, &a) in cycle.iter().enumerate() {
                        let b = cycle[(i + 1) % cycle.len()];
                        // consecutive products all equal the class key
                        assert_eq!(g_table.mul(l.s()[a], l.s()[b]), class);
                        seen_pairs.push((a, b));
                    }
                }
                // disjoint and covering
                let mut expected: Vec<(usize, usize)> = Vec::new();
                for (i, &a) in l.s().iter().enumerate() {
                    for (j, &b) in l.s().iter().enumerate() {
                        if g_table.mul(a, b) == class {
                            expected.push((i, j));
                        }
                    }
                }
                seen_pairs.sort_unstable();
                expected.sort_unstable();
                assert_eq!(seen_pairs, expected, "{spec} class {class}");
            }
        }
    }

    #[test]
    fn dot_export_shape() {
        let l = lattice("Z(2)", "1");
        let dot = l.to_dot();
        assert_eq!(dot.matches("->").count(), 2);
        let l4 = lattice("Z(4)", "1,2");
        assert_eq!(l4.to_dot().matches("->").count(), 8);
        assert!(l4.to_dot().contains("label=\"2\""));
    }

    #[test]
    fn independent_two_form_count() {
        let s4 = lattice("S(4)", "(12),(13),(14),(23),(24),(34)");
        assert_eq!(s4.s2().len(), 11);
        assert_eq!(s4.s_len() * s4.s_len() - s4.s2().len(), 25);
    }
}
