//! Exact finite group arithmetic.
//!
//! Groups are stored as dense multiplication tables over integer element
//! indices; labels exist for I/O only. The composition convention is
//! left-to-right: `mul(g, h)` means "apply `g`, then `h`", which
//! reproduces `(12)(13) = (123)` in cycle notation.

use crate::{Error, Result};
use std::collections::HashMap;

/// An element index into a [`GroupTable`].
pub type Elem = usize;

/// Default cap on the order of constructed groups.
pub const DEFAULT_ORDER_CAP: usize = 10_000;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone)]
pub struct GroupTable {
    labels: Vec<String>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: Elem,
    label_index: HashMap<String, Elem>,
}

impl GroupTable {
    /// Builds a table from a multiplication closure. The closure must
    /// describe an associative operation with `elements[identity]` as unit.
    pub fn from_mul_fn(
        labels: Vec<String>,
        identity: Elem,
        mul_fn: impl Fn(Elem, Elem) -> Elem,
    ) -> Result<Self> {
        let n = labels.len();
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let c = mul_fn(a, b);
                if c >= n {
                    return Err(Error::Invalid(format!(
                        "multiplication result out of range: {a} * {b} -> {c}"
                    )));
                }
                mul[a * n + b] = c as u32;
            }
        }
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a * n + b] as usize == identity {
                    inv[a] = b as u32;
                    break;
                }
            }
            if inv[a] == u32::MAX {
                return Err(Error::Invalid(format!("element {a} has no inverse")));
            }
        }
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(GroupTable {
            labels,
            mul,
            inv,
            identity,
            label_index,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    /// Product `g · h` ("apply g, then h").
    #[inline]
    pub fn mul(&self, g: Elem, h: Elem) -> Elem {
        self.mul[g * self.order() + h] as usize
    }

    #[inline]
    pub fn inv(&self, g: Elem) -> Elem {
        self.inv[g] as usize
    }

    #[inline]
    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn label(&self, g: Elem) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order()
    }

    /// Conjugation `ad(g)h = g h g⁻¹`.
    pub fn conjugate(&self, g: Elem, h: Elem) -> Elem {
        self.mul(self.mul(g, h), self.inv(g))
    }

    /// Product of a word of elements, left to right; empty word is the unit.
    pub fn product(&self, word: &[Elem]) -> Elem {
        word.iter().fold(self.identity, |acc, &g| self.mul(acc, g))
    }

    /// The smallest subset containing the unit and `gens`, closed under
    /// multiplication and inversion. Returned sorted by element index.
    pub fn subgroup_closure(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut member = vec![false; self.order()];
        member[self.identity] = true;
        let mut queue: Vec<Elem> = vec![self.identity];
        for &g in gens {
            if !member[g] {
                member[g] = true;
                queue.push(g);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let a = queue[head];
            head += 1;
            let push = |e: Elem, member: &mut Vec<bool>, queue: &mut Vec<Elem>| {
                if !member[e] {
                    member[e] = true;
                    queue.push(e);
                }
            };
            push(self.inv(a), &mut member, &mut queue);
            for i in 0..queue.len() {
                let b = queue[i];
                push(self.mul(a, b), &mut member, &mut queue);
                push(self.mul(b, a), &mut member, &mut queue);
            }
        }
        let mut out: Vec<Elem> = member
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether `set` (deduplicated) is a subgroup.
    pub fn is_subgroup(&self, set: &[Elem]) -> bool {
        let mut member = vec![false; self.order()];
        for &g in set {
            member[g] = true;
        }
        if !member[self.identity] {
            return false;
        }
        for &a in set {
            if !member[self.inv(a)] {
                return false;
            }
            for &b in set {
                if !member[self.mul(a, b)] {
                    return false;
                }
            }
        }
        true
    }

    /// Resolves an element from its textual form. Accepts the canonical
    /// label, `e` for the unit, and non-canonical cycle notation.
    pub fn resolve(&self, text: &str) -> Result<Elem> {
        let norm: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(&i) = self.label_index.get(&norm) {
            return Ok(i);
        }
        if norm == "e" {
            return Ok(self.identity);
        }
        if let Some(canon) = canonicalize_cycles(&norm) {
            if let Some(&i) = self.label_index.get(&canon) {
                return Ok(i);
            }
        }
        Err(Error::UnknownElement(text.to_string()))
    }

    /// Resolves a comma separated list of element literals. Commas inside
    /// parentheses (tuples, cycles) do not split.
    pub fn resolve_list(&self, text: &str) -> Result<Vec<Elem>> {
        split_top_level(text)
            .into_iter()
            .map(|part| self.resolve(&part))
            .collect()
    }

    /// Checks the table invariants: Latin square, two-sided inverses, and
    /// associativity (exhaustive up to order 60, seeded sampling above).
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        for a in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for b in 0..n {
                let r = self.mul(a, b);
                let c = self.mul(b, a);
                if seen_row[r] || seen_col[c] {
                    return Err(Error::Invalid(format!(
                        "multiplication table is not a Latin square at row {a}"
                    )));
                }
                seen_row[r] = true;
                seen_col[c] = true;
            }
            if self.mul(a, self.inv(a)) != self.identity
                || self.mul(self.inv(a), a) != self.identity
            {
                return Err(Error::Invalid(format!("bad inverse for element {a}")));
            }
            if self.mul(a, self.identity) != a || self.mul(self.identity, a) != a {
                return Err(Error::Invalid(format!("unit law fails for element {a}")));
            }
        }
        let check = |a: Elem, b: Elem, c: Elem| -> Result<()> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::Invalid(format!(
                    "associativity fails at ({a}, {b}, {c})"
                )));
            }
            Ok(())
        };
        if n <= 60 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            // deterministic LCG sample of 200k triples
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..200_000 {
                let mut next = || {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 33) as usize % n
                };
                let (a, b, c) = (next(), next(), next());
                check(a, b, c)?;
            }
        }
        Ok(())
    }
}

/// A constructor tree for finite groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(u32),
    Symmetric(u32),
    Alternating(u32),
    DirectProduct(Box<GroupSpec>, Box<GroupSpec>),
}

impl GroupSpec {
    /// Parses the spec grammar: `Z(4)`, `S(3)`, `A(5)`, `Z(3)xZ(3)`
    /// (`x` is the direct product, left-associative).
    pub fn parse(text: &str) -> Result<Self> {
        let clean: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let parts: Vec<&str> = clean.split('x').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Spec(format!("empty factor in `{text}`")));
        }
        let mut spec: Option<GroupSpec> = None;
        for part in parts {
            let atom = Self::parse_atom(part)?;
            spec = Some(match spec {
                None => atom,
                Some(prev) => GroupSpec::DirectProduct(Box::new(prev), Box::new(atom)),
            });
        }
        spec.ok_or_else(|| Error::Spec(format!("empty spec `{text}`")))
    }

    fn parse_atom(part: &str) -> Result<Self> {
        let bad = || Error::Spec(format!("expected Z(n), S(n) or A(n), got `{part}`"));
        let (kind, rest) = part.split_at(1.min(part.len()));
        let arg = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let n: u32 = arg.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::Spec(format!("group parameter must be >= 1 in `{part}`")));
        }
        match kind {
            "Z" => Ok(GroupSpec::Cyclic(n)),
            "S" => Ok(GroupSpec::Symmetric(n)),
            "A" => Ok(GroupSpec::Alternating(n)),
            _ => Err(bad()),
        }
    }

    /// The order of the group this spec describes.
    pub fn order(&self) -> u128 {
        match self {
            GroupSpec::Cyclic(m) => *m as u128,
            GroupSpec::Symmetric(n) => factorial(*n),
            GroupSpec::Alternating(n) => {
                let f = factorial(*n);
                if *n <= 1 {
                    1
                } else {
                    f / 2
                }
            }
            GroupSpec::DirectProduct(a, b) => a.order().saturating_mul(b.order()),
        }
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupSpec::Cyclic(m) => write!(f, "Z({m})"),
            GroupSpec::Symmetric(n) => write!(f, "S({n})"),
            GroupSpec::Alternating(n) => write!(f, "A({n})"),
            GroupSpec::DirectProduct(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// Builds a group with the default order cap.
pub fn build_group(spec: &GroupSpec) -> Result<GroupTable> {
    build_group_capped(spec, DEFAULT_ORDER_CAP)
}

/// Builds a group, rejecting orders above `cap`.
pub fn build_group_capped(spec: &GroupSpec, cap: usize) -> Result<GroupTable> {
    let order = spec.order();
    if order > cap as u128 {
        return Err(Error::OrderCap { order, cap });
    }
    match spec {
        GroupSpec::Cyclic(m) => build_cyclic(*m),
        GroupSpec::Symmetric(n) => build_permutation_group(*n, false),
        GroupSpec::Alternating(n) => build_permutation_group(*n, true),
        GroupSpec::DirectProduct(a, b) => {
            let ga = build_group_capped(a, cap)?;
            let gb = build_group_capped(b, cap)?;
            build_product(&ga, &gb)
        }
    }
}

fn build_cyclic(m: u32) -> Result<GroupTable> {
    let m = m as usize;
    let labels = (0..m).map(|k| k.to_string()).collect();
    GroupTable::from_mul_fn(labels, 0, |a, b| (a + b) % m)
}

fn build_permutation_group(n: u32, even_only: bool) -> Result<GroupTable> {
    let n = n as usize;
    if n > 9 {
        return Err(Error::Spec(
            "permutation groups support degree up to 9".into(),
        ));
    }
    let mut perms: Vec<Vec<u8>> = Vec::new();
    let mut current: Vec<u8> = (0..n as u8).collect();
    loop {
        if !even_only || perm_is_even(&current) {
            perms.push(current.clone());
        }
        if !next_permutation(&mut current) {
            break;
        }
    }
    let index: HashMap<Vec<u8>, usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let labels = perms.iter().map(|p| cycle_label(p)).collect();
    let compose = |a: Elem, b: Elem| {
        // apply a, then b
        let pa = &perms[a];
        let pb = &perms[b];
        let image: Vec<u8> = pa.iter().map(|&i| pb[i as usize]).collect();
        index[&image]
    };
    GroupTable::from_mul_fn(labels, 0, compose)
}

fn build_product(ga: &GroupTable, gb: &GroupTable) -> Result<GroupTable> {
    let (na, nb) = (ga.order(), gb.order());
    let mut labels = Vec::with_capacity(na * nb);
    for a in 0..na {
        for b in 0..nb {
            labels.push(format!("({},{})", ga.label(a), gb.label(b)));
        }
    }
    let identity = ga.identity() * nb + gb.identity();
    GroupTable::from_mul_fn(labels, identity, |x, y| {
        let (xa, xb) = (x / nb, x % nb);
        let (ya, yb) = (y / nb, y % nb);
        ga.mul(xa, ya) * nb + gb.mul(xb, yb)
    })
}

fn next_permutation(p: &mut [u8]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn perm_is_even(p: &[u8]) -> bool {
    let mut visited = vec![false; p.len()];
    let mut transpositions = 0;
    for start in 0..p.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !visited[k] {
            visited[k] = true;
            k = p[k] as usize;
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 0
}

/// Canonical disjoint-cycle label: cycles sorted by smallest point, each
/// starting at its smallest point, fixed points omitted; identity is `e`.
fn cycle_label(p: &[u8]) -> String {
    let mut visited = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if visited[start] || p[start] as usize == start {
            visited[start] = true;
            continue;
        }
        out.push('(');
        let mut k = start;
        while !visited[k] {
            visited[k] = true;
            out.push_str(&(k + 1).to_string());
            k = p[k] as usize;
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push('e');
    }
    out
}

/// Reparses cycle notation with single-digit points and re-emits the
/// canonical label, or `None` if the text is not cycle shaped.
fn canonicalize_cycles(text: &str) -> Option<String> {
    if !text.starts_with('(') || !text.ends_with(')') {
        return None;
    }
    let mut mapping: HashMap<u8, u8> = HashMap::new();
    let mut max_point = 0u8;
    for cycle in text[1..text.len() - 1].split(")(") {
        let points: Vec<u8> = cycle
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<Vec<_>>>()?;
        if points.iter().any(|&p| p == 0) || points.is_empty() {
            return None;
        }
        for (i, &p) in points.iter().enumerate() {
            let next = points[(i + 1) % points.len()];
            if mapping.insert(p - 1, next - 1).is_some() {
                return None; // point repeated across cycles
            }
            max_point = max_point.max(p);
        }
    }
    let images: Vec<u8> = (0..max_point)
        .map(|i| *mapping.get(&i).unwrap_or(&i))
        .collect();
    // mapping must be a permutation
    let mut seen = vec![false; max_point as usize];
    for &im in &images {
        if seen[im as usize] {
            return None;
        }
        seen[im as usize] = true;
    }
    Some(cycle_label(&images))
}

/// Splits on top-level commas only (commas inside parentheses stay).
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s3() -> GroupTable {
        build_group(&GroupSpec::parse("S(3)").unwrap()).unwrap()
    }

    #[test]
    fn cyclic_four() {
        let g = build_group(&GroupSpec::Cyclic(4)).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.mul(1, 1), 2);
        assert_eq!(g.inv(1), 3);
        g.validate().unwrap();
    }

    #[test]
    fn s3_composition_convention() {
        let g = s3();
        assert_eq!(g.order(), 6);
        let t12 = g.resolve("(12)").unwrap();
        let t13 = g.resolve("(13)").unwrap();
        // left-to-right: (12)(13) = (123)
        assert_eq!(g.label(g.mul(t12, t13)), "(123)");
        g.validate().unwrap();
    }

    #[test]
    fn a5_order_and_a4_labels() {
        let a5 = build_group(&GroupSpec::Alternating(5)).unwrap();
        assert_eq!(a5.order(), 60);
        a5.validate().unwrap();
        let a4 = build_group(&GroupSpec::Alternating(4)).unwrap();
        assert_eq!(a4.order(), 12);
        for l in ["(123)", "(243)", "(134)", "(142)", "(12)(34)"] {
            a4.resolve(l).unwrap();
        }
    }

    #[test]
    fn conjugation_examples() {
        let g = s3();
        let t12 = g.resolve("(12)").unwrap();
        let t13 = g.resolve("(13)").unwrap();
        // brute-force oracle over the table
        let mut expected = None;
        for h in g.elements() {
            if g.mul(g.mul(t12, t13), g.inv(t12)) == h {
                expected = Some(h);
            }
        }
        assert_eq!(g.conjugate(t12, t13), expected.unwrap());
        assert_eq!(g.label(g.conjugate(t12, t13)), "(23)");
        for h in g.elements() {
            assert_eq!(g.conjugate(g.identity(), h), h);
        }
        let z6 = build_group(&GroupSpec::Cyclic(6)).unwrap();
        assert_eq!(z6.conjugate(2, 3), 3);
    }

    #[test]
    fn closure_examples() {
        let g = s3();
        let r = g.resolve("(123)").unwrap();
        let r2 = g.resolve("(132)").unwrap();
        let closure = g.subgroup_closure(&[r, r2]);
        assert_eq!(closure.len(), 3);
        assert!(closure.contains(&g.identity()));

        let any = build_group(&GroupSpec::Cyclic(5)).unwrap();
        assert_eq!(any.subgroup_closure(&[]), vec![0]);

        let z4 = build_group(&GroupSpec::Cyclic(4)).unwrap();
        // brute-force closure oracle
        let mut set = vec![0, 2];
        loop {
            let mut grew = false;
            for &a in set.clone().iter() {
                for &b in set.clone().iter() {
                    let c = z4.mul(a, b);
                    if !set.contains(&c) {
                        set.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        set.sort_unstable();
        assert_eq!(z4.subgroup_closure(&[2]), set);
        assert_eq!(z4.subgroup_closure(&[2]), vec![0, 2]);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(GroupSpec::parse("Z(4)").unwrap(), GroupSpec::Cyclic(4));
        let p = GroupSpec::parse("Z(3)xZ(3)").unwrap();
        assert_eq!(p.order(), 9);
        assert!(GroupSpec::parse("Q(8)").is_err());
        assert!(GroupSpec::parse("Z()").is_err());
        assert!(GroupSpec::parse("Z(0)").is_err());
        let cap = build_group_capped(&GroupSpec::Symmetric(8), 10_000);
        assert!(matches!(cap, Err(Error::OrderCap { .. })));
    }

    #[test]
    fn product_labels_and_resolution() {
        let spec = GroupSpec::parse("Z(3)xZ(3)").unwrap();
        let g = build_group(&spec).unwrap();
        assert_eq!(g.order(), 9);
        let e01 = g.resolve("(0,1)").unwrap();
        let e10 = g.resolve("(1, 0)").unwrap();
        assert_eq!(g.label(g.mul(e01, e10)), "(1,1)");
        g.validate().unwrap();
    }

    #[test]
    fn noncanonical_cycles_resolve() {
        let g = s3();
        assert_eq!(g.resolve("(21)").unwrap(), g.resolve("(12)").unwrap());
        let s4 = build_group(&GroupSpec::Symmetric(4)).unwrap();
        assert_eq!(
            s4.resolve("(34)(12)").unwrap(),
            s4.resolve("(12)(34)").unwrap()
        );
    }

    proptest! {
        #[test]
        fn conjugation_is_a_bijection(seed in 0u64..500) {
            let g = s3();
            let x = (seed as usize) % g.order();
            let mut image: Vec<Elem> = g.elements().map(|h| g.conjugate(x, h)).collect();
            image.sort_unstable();
            image.dedup();
            prop_assert_eq!(image.len(), g.order());
        }

        #[test]
        fn closure_is_a_fixed_point(mask in 0usize..64) {
            let g = s3();
            let gens: Vec<Elem> = g.elements().filter(|&e| mask & (1 << e) != 0).collect();
            let c1 = g.subgroup_closure(&gens);
            let c2 = g.subgroup_closure(&c1);
            prop_assert_eq!(c1, c2);
        }
    }
}
