//! Discrete and basic vector fields on a group lattice.
//!
//! A vector field is `X = Σ_h X^h · ℓ_h`. Discrete fields have indicator
//! components with at most one nonzero per site and are the same thing as
//! maps `s_X : G → Sₑ`; their flow is `φ_X(g) = g s_X(g)` and
//! `I + X = φ*_X` on functions. Basic fields have exactly one outgoing
//! and one incoming arrow everywhere, hence an invertible flow encoded by
//! the map `r_X`.

use crate::algebra::ScalarFn;
use crate::forms::{Calculus, Form, ScalarForm};
use crate::group::Elem;
use crate::lattice::{GroupLattice, SiteMap};
use crate::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::HashMap;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A general vector field, one coefficient function per direction in `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<ScalarFn>,
}

impl VectorField {
    pub fn from_components(comps: Vec<ScalarFn>) -> Self {
        VectorField { comps }
    }

    pub fn zero(lattice: &GroupLattice) -> Self {
        let n = lattice.order();
        VectorField {
            comps: (0..lattice.s_len()).map(|_| ScalarFn::zero(n)).collect(),
        }
    }

    pub fn components(&self) -> &[ScalarFn] {
        &self.comps
    }

    pub fn component(&self, pos: usize) -> &ScalarFn {
        &self.comps[pos]
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.comps.iter().map(|c| c.norm_inf()).fold(0.0, f64::max)
    }

    /// `X f = Σ_h X^h (ℓ_h f)`.
    pub fn apply(&self, lattice: &GroupLattice, f: &ScalarFn) -> ScalarFn {
        let group = lattice.group();
        let mut out = ScalarFn::zero(group.order());
        for (pos, &h) in lattice.s().iter().enumerate() {
            out = out.add(&self.comps[pos].mul(&f.ell(group, h)));
        }
        out
    }

    /// Contraction with a 1-form: `⟨X, α⟩ = Σ_h X^h α_h` pointwise.
    pub fn pair(&self, lattice: &GroupLattice, alpha: &ScalarForm) -> Result<ScalarFn> {
        if alpha.grade() != 1 {
            return Err(Error::GradeMismatch(alpha.grade(), 1));
        }
        let n = lattice.order();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for ((g, w), c) in alpha.terms() {
            values[*g] += self.comps[w[0] as usize].value(*g) * c;
        }
        Ok(ScalarFn::from_values(values))
    }
}

/// Flow invertibility data for a discrete field.
#[derive(Debug, Clone)]
pub struct Invertibility {
    pub invertible: bool,
    /// `r_X`, the incoming-arrow map, when invertible.
    pub r_map: Option<Vec<Elem>>,
    /// A site with no unique incoming arrow, when not invertible.
    pub witness: Option<Elem>,
}

/// A discrete vector field, stored as the map `s_X : G → Sₑ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteVF {
    s: Vec<Elem>,
}

impl DiscreteVF {
    /// Builds a discrete field from its `s`-map; values must lie in `Sₑ`.
    pub fn from_s_map(lattice: &GroupLattice, s: Vec<Elem>) -> Result<Self> {
        if s.len() != lattice.order() {
            return Err(Error::NotDiscrete(format!(
                "s-map has {} entries for a lattice of order {}",
                s.len(),
                lattice.order()
            )));
        }
        for (g, &step) in s.iter().enumerate() {
            if step != lattice.group().identity() && lattice.s_index(step).is_none() {
                return Err(Error::NotDiscrete(format!(
                    "s({}) = {} is not in S ∪ {{e}}",
                    lattice.group().label(g),
                    lattice.group().label(step)
                )));
            }
        }
        Ok(DiscreteVF { s })
    }

    pub fn from_fn(lattice: &GroupLattice, f: impl FnMut(Elem) -> Elem) -> Result<Self> {
        Self::from_s_map(lattice, lattice.group().elements().map(f).collect())
    }

    /// The constant field `ℓ_h` (pass the identity for the zero field).
    pub fn constant(lattice: &GroupLattice, h: Elem) -> Result<Self> {
        Self::from_s_map(lattice, vec![h; lattice.order()])
    }

    /// Recovers a discrete field from indicator components: each `X^h` must
    /// be 0/1 valued with at most one 1 per site.
    pub fn validate_discrete(lattice: &GroupLattice, x: &VectorField, tol: f64) -> Result<Self> {
        let group = lattice.group();
        let mut s = vec![group.identity(); group.order()];
        for g in group.elements() {
            let mut hits = Vec::new();
            for (pos, comp) in x.components().iter().enumerate() {
                let v = comp.value(g);
                if (v - ONE).norm() <= tol {
                    hits.push(pos);
                } else if v.norm() > tol {
                    return Err(Error::NotDiscrete(format!(
                        "component {} at site {} is {} (not 0 or 1)",
                        group.label(lattice.s()[pos]),
                        group.label(g),
                        v
                    )));
                }
            }
            match hits.as_slice() {
                [] => {}
                [pos] => s[g] = lattice.s()[*pos],
                _ => {
                    return Err(Error::NotDiscrete(format!(
                        "two nonzero components at site {}",
                        group.label(g)
                    )))
                }
            }
        }
        Ok(DiscreteVF { s })
    }

    #[inline]
    pub fn s(&self, g: Elem) -> Elem {
        self.s[g]
    }

    pub fn s_map(&self) -> &[Elem] {
        &self.s
    }

    /// Indicator components `X^h(g) = δ^h_{s(g)}`.
    pub fn to_vector_field(&self, lattice: &GroupLattice) -> VectorField {
        let n = lattice.order();
        let comps = lattice
            .s()
            .iter()
            .map(|&h| {
                ScalarFn::from_fn(n, |g| {
                    if self.s[g] == h {
                        ONE
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        VectorField::from_components(comps)
    }

    /// The flow map `φ_X(g) = g s_X(g)`.
    pub fn flow_map(&self, lattice: &GroupLattice) -> SiteMap {
        let group = lattice.group();
        SiteMap::from_fn(group.order(), |g| group.mul(g, self.s[g]))
    }

    /// `(I + X) f = φ*_X f = Σ_{h∈Sₑ} X^h R*_h f`.
    pub fn apply_flow(&self, lattice: &GroupLattice, f: &ScalarFn) -> ScalarFn {
        let group = lattice.group();
        ScalarFn::from_fn(group.order(), |g| *f.value(group.mul(g, self.s[g])))
    }

    /// `X f`.
    pub fn apply(&self, lattice: &GroupLattice, f: &ScalarFn) -> ScalarFn {
        self.apply_flow(lattice, f).sub(f)
    }

    /// Tests flow invertibility and returns `r_X` when the flow is
    /// invertible: every site must have exactly one incoming step in `Sₑ`.
    pub fn invertibility(&self, lattice: &GroupLattice) -> Invertibility {
        let group = lattice.group();
        let mut r = vec![usize::MAX; group.order()];
        let mut witness = None;
        for g in group.elements() {
            let mut incoming = Vec::new();
            if self.s[g] == group.identity() {
                incoming.push(group.identity());
            }
            for &h in lattice.s() {
                if self.s[group.mul(g, group.inv(h))] == h {
                    incoming.push(h);
                }
            }
            if incoming.len() == 1 {
                r[g] = incoming[0];
            } else if witness.is_none() {
                witness = Some(g);
            }
        }
        if let Some(site) = witness {
            Invertibility {
                invertible: false,
                r_map: None,
                witness: Some(site),
            }
        } else {
            Invertibility {
                invertible: true,
                r_map: Some(r),
                witness: None,
            }
        }
    }

    /// `r_X`, failing when the flow is not invertible.
    pub fn r_map(&self, lattice: &GroupLattice) -> Result<Vec<Elem>> {
        let inv = self.invertibility(lattice);
        inv.r_map.ok_or_else(|| {
            Error::FlowNotInvertible(
                lattice
                    .group()
                    .label(inv.witness.unwrap_or_default())
                    .to_string(),
            )
        })
    }

    /// Step map of the inverse flow, `g ↦ r_X(g)⁻¹`. The inverse of `I+X`
    /// is `I + X̌` with these steps; they need not lie in `Sₑ`.
    pub fn inverse_step_map(&self, lattice: &GroupLattice) -> Result<Vec<Elem>> {
        let group = lattice.group();
        Ok(self
            .r_map(lattice)?
            .into_iter()
            .map(|h| group.inv(h))
            .collect())
    }

    /// Basic: values in `S` everywhere and invertible flow.
    pub fn is_basic(&self, lattice: &GroupLattice) -> bool {
        let group = lattice.group();
        self.s.iter().all(|&h| h != group.identity())
            && self.invertibility(lattice).invertible
    }

    pub fn is_flow_differentiable(&self, lattice: &GroupLattice) -> bool {
        lattice.is_differentiable_map(&self.flow_map(lattice))
    }

    pub fn to_json(&self, lattice: &GroupLattice) -> Value {
        let group = lattice.group();
        let map: serde_json::Map<String, Value> = group
            .elements()
            .map(|g| (group.label(g).to_string(), json!(group.label(self.s[g]))))
            .collect();
        Value::Object(map)
    }
}

/// Theorem-level invertibility cross-check: three conditions computed
/// independently — `(automorphism, arrow_matching, unit_sum)`.
pub fn invertibility_conditions(lattice: &GroupLattice, x: &DiscreteVF) -> (bool, bool, bool) {
    let group = lattice.group();
    // (1) I+X is an automorphism ⇔ φ_X is a bijection
    let automorphism = x.flow_map(lattice).is_bijective();
    // (2) sites with an outgoing X-arrow have exactly one incoming one,
    //     sites without have none
    let arrow_matching = group.elements().all(|g| {
        let incoming = lattice
            .s()
            .iter()
            .filter(|&&h| x.s(group.mul(g, group.inv(h))) == h)
            .count();
        if x.s(g) == group.identity() {
            incoming == 0
        } else {
            incoming == 1
        }
    });
    // (3) Σ_{h∈Sₑ} X^h(g h⁻¹) = 1 for all g
    let unit_sum = group.elements().all(|g| {
        let mut total = 0usize;
        if x.s(g) == group.identity() {
            total += 1;
        }
        for &h in lattice.s() {
            if x.s(group.mul(g, group.inv(h))) == h {
                total += 1;
            }
        }
        total == 1
    });
    (automorphism, arrow_matching, unit_sum)
}

/// The differentiability condition of the flow in `s`-map form:
/// `s(g)⁻¹ · (g⁻¹g') · s(g') ∈ Sₑ` for every arrow `g → g'`.
pub fn flow_s_condition(lattice: &GroupLattice, x: &DiscreteVF) -> bool {
    let group = lattice.group();
    group.elements().all(|g| {
        lattice.s().iter().all(|&h| {
            let gh = group.mul(g, h);
            let step = group.mul(group.mul(group.inv(x.s(g)), h), x.s(gh));
            step == group.identity() || lattice.s_index(step).is_some()
        })
    })
}

/// For discrete `Y`, the discrete `Z` with `φ*_Y φ*_X = φ*_X φ*_Z`,
/// available when the flow of `X` is differentiable. At sites without an
/// incoming `X`-arrow the value of `s_Z` is not determined by the
/// condition; it is set to the identity there.
pub fn intertwiner(lattice: &GroupLattice, x: &DiscreteVF, y: &DiscreteVF) -> Result<DiscreteVF> {
    let group = lattice.group();
    let mut s_z = vec![group.identity(); group.order()];
    for g in group.elements() {
        // s_Z(g s_X(g)) = s_X(g)⁻¹ s_Y(g) s_X(g s_Y(g))
        let target = group.mul(g, x.s(g));
        let value = group.mul(
            group.mul(group.inv(x.s(g)), y.s(g)),
            x.s(group.mul(g, y.s(g))),
        );
        if value != group.identity() && lattice.s_index(value).is_none() {
            return Err(Error::NotDifferentiable(
                group.label(g).to_string(),
                group.label(target).to_string(),
            ));
        }
        s_z[target] = value;
    }
    DiscreteVF::from_s_map(lattice, s_z)
}

/// Checks `φ*_Y φ*_X = φ*_X φ*_Z` on the indicator basis.
pub fn intertwines(
    lattice: &GroupLattice,
    x: &DiscreteVF,
    y: &DiscreteVF,
    z: &DiscreteVF,
) -> bool {
    let group = lattice.group();
    let n = group.order();
    (0..n).all(|b| {
        let e_b = ScalarFn::indicator(n, b);
        let lhs = y.apply_flow(lattice, &x.apply_flow(lattice, &e_b));
        let rhs = x.apply_flow(lattice, &z.apply_flow(lattice, &e_b));
        lhs.sub(&rhs).norm_inf() < 1e-12
    })
}

// ---- basic bases ----------------------------------------------------------

/// Whether the fields form a basis of basic fields with the standard
/// parametrization: all basic, `{s_{X_h}(g)} = S` at every site, and
/// `s_{X_h}(e) = s[h]`.
pub fn is_basic_basis(lattice: &GroupLattice, fields: &[DiscreteVF]) -> bool {
    if fields.len() != lattice.s_len() {
        return false;
    }
    if !fields.iter().all(|x| x.is_basic(lattice)) {
        return false;
    }
    let e = lattice.group().identity();
    for (k, x) in fields.iter().enumerate() {
        if x.s(e) != lattice.s()[k] {
            return false;
        }
    }
    lattice.group().elements().all(|g| {
        let mut steps: Vec<Elem> = fields.iter().map(|x| x.s(g)).collect();
        steps.sort_unstable();
        let mut s_sorted = lattice.s().to_vec();
        s_sorted.sort_unstable();
        steps == s_sorted
    })
}

/// Searches for a basis of basic vector fields parametrized by
/// `s_{X_h}(e) = h`: per-site bijections `S → S` whose slices all have
/// invertible flows. Backtracking over sites; the constant assignment
/// (giving `X_h = ℓ_h`) is tried first.
pub fn basic_basis(lattice: &GroupLattice) -> Result<Vec<DiscreteVF>> {
    let constant: Vec<DiscreteVF> = lattice
        .s()
        .iter()
        .map(|&h| DiscreteVF::constant(lattice, h).unwrap())
        .collect();
    if is_basic_basis(lattice, &constant) {
        return Ok(constant);
    }
    let s_len = lattice.s_len();
    let n = lattice.order();
    let perms = permutations(s_len);
    let identity_perm: Vec<usize> = (0..s_len).collect();
    let mut assignment: Vec<Vec<usize>> = Vec::with_capacity(n);
    if !search_basis(lattice, &perms, &mut assignment, &identity_perm) {
        return Err(Error::Invalid(
            "no basis of basic vector fields found".into(),
        ));
    }
    let fields = (0..s_len)
        .map(|k| {
            DiscreteVF::from_s_map(
                lattice,
                (0..n).map(|g| lattice.s()[assignment[g][k]]).collect(),
            )
            .unwrap()
        })
        .collect();
    Ok(fields)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..k {
            let mut p = rest.clone();
            p.insert(slot, k - 1);
            out.push(p);
        }
    }
    out
}

fn partial_flows_injective(lattice: &GroupLattice, assignment: &[Vec<usize>]) -> bool {
    let group = lattice.group();
    for k in 0..lattice.s_len() {
        let mut seen = vec![false; group.order()];
        for (g, perm) in assignment.iter().enumerate() {
            let target = group.mul(g, lattice.s()[perm[k]]);
            if seen[target] {
                return false;
            }
            seen[target] = true;
        }
    }
    true
}

fn search_basis(
    lattice: &GroupLattice,
    perms: &[Vec<usize>],
    assignment: &mut Vec<Vec<usize>>,
    identity_perm: &[usize],
) -> bool {
    let g = assignment.len();
    if g == lattice.order() {
        return true;
    }
    // the unit site is pinned to the identity permutation by s_{X_h}(e) = h
    let unit_only = [identity_perm.to_vec()];
    let candidates: &[Vec<usize>] = if g == lattice.group().identity() {
        &unit_only
    } else {
        perms
    };
    for perm in candidates {
        assignment.push(perm.clone());
        if partial_flows_injective(lattice, assignment)
            && search_basis(lattice, perms, assignment, identity_perm)
        {
            return true;
        }
        assignment.pop();
    }
    false
}

/// Dual basis of 1-forms: `α^h = Σ_g e^g θ^{s_{X_h}(g)}`, so that
/// `⟨X_h, α^{h'}⟩ = δ` and `Σ_h α^h = θ`.
pub fn dual_basis(cal: &Calculus, basis: &[DiscreteVF]) -> Result<Vec<ScalarForm>> {
    let lattice = cal.lattice();
    if !is_basic_basis(lattice, basis) {
        return Err(Error::Invalid("not a basic basis".into()));
    }
    Ok(basis
        .iter()
        .map(|x| {
            let mut alpha = Form::zero(1);
            for g in lattice.group().elements() {
                let pos = lattice.s_index(x.s(g)).expect("basic field steps in S");
                alpha.add_term(g, vec![pos as u8], ONE);
            }
            alpha
        })
        .collect())
}

// ---- R_X and its relatives ----------------------------------------------

/// `R_X ω = Σ_{h∈Sₑ} X^h R*_h ω`: at each site `g` the value of
/// `R*_{s_X(g)} ω`. Requires a bicovariant lattice.
pub fn r_x(cal: &Calculus, x: &DiscreteVF, omega: &ScalarForm) -> Result<ScalarForm> {
    site_dependent_pullback(cal, omega, |g| x.s(g))
}

/// `R_X⁻¹ ω`: at each site `g` the value of `R*_{r_X(g)⁻¹} ω`.
pub fn r_x_inv(cal: &Calculus, x: &DiscreteVF, omega: &ScalarForm) -> Result<ScalarForm> {
    let group = cal.group();
    let r = x.r_map(cal.lattice())?;
    site_dependent_pullback(cal, omega, |g| group.inv(r[g]))
}

fn site_dependent_pullback(
    cal: &Calculus,
    omega: &ScalarForm,
    step: impl Fn(Elem) -> Elem,
) -> Result<ScalarForm> {
    if !cal.lattice().is_bicovariant() {
        return Err(Error::NotBicovariant("S".into()));
    }
    let group = cal.group();
    let mut pulled: HashMap<Elem, ScalarForm> = HashMap::new();
    let mut out = Form::zero(omega.grade());
    for g in group.elements() {
        let h = step(g);
        let pomega = match pulled.entry(h) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(cal.r_pullback(h, omega)?),
        };
        for ((site, w), c) in pomega.terms() {
            if *site == g {
                out.add_term(g, w.clone(), *c);
            }
        }
    }
    Ok(out)
}

/// `R_{X∗} Y` for discrete `Y`: the discrete field with
/// `s(g) = ad(r_X(g)⁻¹) s_Y(g r_X(g)⁻¹)`.
pub fn r_x_star(cal: &Calculus, x: &DiscreteVF, y: &DiscreteVF) -> Result<DiscreteVF> {
    if !cal.lattice().is_bicovariant() {
        return Err(Error::NotBicovariant("S".into()));
    }
    let group = cal.group();
    let r = x.r_map(cal.lattice())?;
    let s_map = group
        .elements()
        .map(|g| {
            let ri = group.inv(r[g]);
            group.conjugate(ri, y.s(group.mul(g, ri)))
        })
        .collect();
    DiscreteVF::from_s_map(cal.lattice(), s_map)
}

/// `R_{X∗} Y` for a general vector field, via
/// `R_{X∗}Y = Σ_h (R*_{h⁻¹}X^h) · R_{h∗}Y` with `R_{h∗}ℓ_{h'} = ℓ_{ad(h⁻¹)h'}`.
pub fn r_x_star_general(cal: &Calculus, x: &DiscreteVF, y: &VectorField) -> Result<VectorField> {
    if !cal.lattice().is_bicovariant() {
        return Err(Error::NotBicovariant("S".into()));
    }
    let lattice = cal.lattice();
    let group = cal.group();
    let r = x.r_map(lattice)?;
    let n = group.order();
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); n]; lattice.s_len()];
    for g in group.elements() {
        let h = r[g];
        if h == group.identity() {
            for (pos, comp) in comps.iter_mut().enumerate() {
                comp[g] += *y.component(pos).value(g);
            }
            continue;
        }
        // ℓ_{h'}-component at g: (R*_{h⁻¹} Y^{ad(h)h'})(g)
        for (pos, &hp) in lattice.s().iter().enumerate() {
            let upper = group.conjugate(h, hp);
            let upper_pos = lattice.s_index(upper).expect("ad-closure");
            comps[pos][g] += *y.component(upper_pos).value(group.mul(g, group.inv(h)));
        }
    }
    Ok(VectorField::from_components(
        comps.into_iter().map(ScalarFn::from_values).collect(),
    ))
}

/// Pushforward `φ_∗ Y` of a discrete field along an invertible
/// differentiable map: the discrete field of `φ ∘ φ_Y ∘ φ⁻¹`.
pub fn push_forward(lattice: &GroupLattice, phi: &SiteMap, y: &DiscreteVF) -> Result<DiscreteVF> {
    if let Some((g, gh)) = lattice.differentiability_witnesses(phi).first() {
        return Err(Error::NotDifferentiable(
            lattice.group().label(*g).to_string(),
            lattice.group().label(*gh).to_string(),
        ));
    }
    let phi_inv = phi
        .inverse()
        .ok_or_else(|| Error::Invalid("map is not invertible".into()))?;
    let group = lattice.group();
    let composite = phi.compose(&y.flow_map(lattice)).compose(&phi_inv);
    let s_map: Vec<Elem> = group
        .elements()
        .map(|g| group.mul(group.inv(g), composite.apply(g)))
        .collect();
    DiscreteVF::from_s_map(lattice, s_map)
}

// ---- polygon relations -----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolygonKind {
    Biangle,
    Triangle,
    Quadrangle,
    None,
}

/// Classifies basic fields against the polygon conditions: `[X, Y]` form a
/// biangle if `s_Y s_X = e` pointwise, `[X, Y, Z]` a triangle if
/// `s_Y s_X = s_Z`, `[X, Y, Z, W]` a quadrangle if
/// `s_Y s_X = s_W s_Z ∉ Sₑ`. Cross-checked against
/// `R_X R_{R_{X∗}Y} = R*_{s_Y · s_X}` on the indicator basis.
pub fn polygon_relation(cal: &Calculus, fields: &[&DiscreteVF]) -> Result<PolygonKind> {
    let lattice = cal.lattice();
    if !lattice.is_bicovariant() {
        return Err(Error::NotBicovariant("S".into()));
    }
    for f in fields {
        if !f.is_basic(lattice) {
            return Err(Error::Invalid("polygon fields must be basic".into()));
        }
    }
    let group = cal.group();
    let (x, y) = match fields {
        [x, y, ..] => (*x, *y),
        _ => return Err(Error::Invalid("need 2 to 4 fields".into())),
    };
    // operator identity check on indicators
    let rxy = r_x_star(cal, x, y)?;
    let n = group.order();
    for b in group.elements() {
        let e_b = ScalarFn::indicator(n, b);
        let lhs = {
            let inner = ScalarFn::from_fn(n, |g| *e_b.value(group.mul(g, rxy.s(g))));
            ScalarFn::from_fn(n, |g| *inner.value(group.mul(g, x.s(g))))
        };
        let rhs = ScalarFn::from_fn(n, |g| *e_b.value(group.mul(g, group.mul(y.s(g), x.s(g)))));
        if lhs.sub(&rhs).norm_inf() > 1e-12 {
            return Err(Error::Invalid(
                "operator identity for R_X R_{R_{X*}Y} failed".into(),
            ));
        }
    }
    let product = |g: Elem| group.mul(y.s(g), x.s(g));
    match fields.len() {
        2 => {
            let ok = group.elements().all(|g| product(g) == group.identity());
            Ok(if ok {
                PolygonKind::Biangle
            } else {
                PolygonKind::None
            })
        }
        3 => {
            let z = fields[2];
            let ok = group.elements().all(|g| product(g) == z.s(g));
            Ok(if ok {
                PolygonKind::Triangle
            } else {
                PolygonKind::None
            })
        }
        4 => {
            let (z, w) = (fields[2], fields[3]);
            let ok = group.elements().all(|g| {
                let p = product(g);
                p == group.mul(w.s(g), z.s(g))
                    && p != group.identity()
                    && lattice.s_index(p).is_none()
            });
            Ok(if ok {
                PolygonKind::Quadrangle
            } else {
                PolygonKind::None
            })
        }
        _ => Err(Error::Invalid("need 2 to 4 fields".into())),
    }
}

// ---- Lie derivative and contraction ---------------------------------------

/// `L_X f = X f`.
pub fn lie_function(lattice: &GroupLattice, x: &DiscreteVF, f: &ScalarFn) -> ScalarFn {
    x.apply(lattice, f)
}

/// `L_X ω = φ*_X ω − ω`; requires a differentiable flow.
pub fn lie_form(cal: &Calculus, x: &DiscreteVF, omega: &ScalarForm) -> Result<ScalarForm> {
    let phi = x.flow_map(cal.lattice());
    Ok(cal.pullback(&phi, omega)?.sub(omega))
}

/// `L_X Y = Y − φ_{X∗} Y` for discrete `Y`; requires an invertible
/// differentiable flow.
pub fn lie_vector_field(cal: &Calculus, x: &DiscreteVF, y: &DiscreteVF) -> Result<VectorField> {
    let lattice = cal.lattice();
    let phi = x.flow_map(lattice);
    let pushed = push_forward(lattice, &phi, y)?;
    Ok(y
        .to_vector_field(lattice)
        .sub(&pushed.to_vector_field(lattice)))
}

/// Contraction `X ⌟ ω` of a discrete field with differentiable flow, by
/// the graded rule `X⌟(ωω') = (X⌟ω) φ*_X ω' + (−1)^r ω (X⌟ω')`.
pub fn contract(cal: &Calculus, x: &DiscreteVF, omega: &ScalarForm) -> Result<ScalarForm> {
    let lattice = cal.lattice();
    let phi = x.flow_map(lattice);
    if let Some((g, gh)) = lattice.differentiability_witnesses(&phi).first() {
        return Err(Error::NotDifferentiable(
            lattice.group().label(*g).to_string(),
            lattice.group().label(*gh).to_string(),
        ));
    }
    if omega.grade() == 0 {
        return Ok(Form::zero(0));
    }
    let pre = phi.preimages();
    let mut pull_memo: HashMap<(Elem, Vec<u8>), ScalarForm> = HashMap::new();
    let mut out = Form::zero(omega.grade() - 1);
    for ((site, w), c) in omega.terms() {
        out = out.add(&contract_monomial(cal, x, *site, w, &pre, &mut pull_memo).scale(*c));
    }
    Ok(out)
}

fn contract_monomial(
    cal: &Calculus,
    x: &DiscreteVF,
    site: Elem,
    word: &[u8],
    pre: &[Vec<Elem>],
    pull_memo: &mut HashMap<(Elem, Vec<u8>), ScalarForm>,
) -> ScalarForm {
    let group = cal.group();
    let s_elem = cal.lattice().s()[word[0] as usize];
    let next_site = group.mul(site, s_elem);
    let head_hit = x.s(site) == s_elem;
    if word.len() == 1 {
        let mut f = Form::zero(0);
        if head_hit {
            f.add_term(site, Vec::new(), ONE);
        }
        return f;
    }
    let rest = &word[1..];
    let mut out = Form::zero(word.len() - 1);
    if head_hit {
        // (X ⌟ e^site θ^{w0}) · φ*(e^{next} θ^{rest}), localized at site
        let pulled = pulled_monomial(cal, next_site, rest, pre, pull_memo);
        for ((s2, w2), c2) in pulled.terms() {
            if *s2 == site {
                out.add_term(site, w2.clone(), *c2);
            }
        }
    }
    // −(e^site θ^{w0}) · (X ⌟ e^{next} θ^{rest})
    let tail = contract_monomial(cal, x, next_site, rest, pre, pull_memo);
    let head = ScalarForm::monomial(site, vec![word[0]], ONE);
    out.sub(&cal.mul(&head, &tail))
}

/// Pullback of the monomial `e^site θ^word` along the map with the given
/// preimages; shares one memo across a whole contraction.
fn pulled_monomial(
    cal: &Calculus,
    site: Elem,
    word: &[u8],
    pre: &[Vec<Elem>],
    memo: &mut HashMap<(Elem, Vec<u8>), ScalarForm>,
) -> ScalarForm {
    if let Some(f) = memo.get(&(site, word.to_vec())) {
        return f.clone();
    }
    let group = cal.group();
    let result = if word.is_empty() {
        let mut f = Form::zero(0);
        for &k in &pre[site] {
            f.add_term(k, Vec::new(), ONE);
        }
        f
    } else {
        let next = group.mul(site, cal.lattice().s()[word[0] as usize]);
        let mut alpha = Form::zero(1);
        for &k in &pre[site] {
            for &k2 in &pre[next] {
                if k == k2 {
                    for i in 0..cal.lattice().s_len() {
                        alpha.add_term(k, vec![i as u8], -ONE);
                    }
                } else if let Some(p) = cal.lattice().s_index(group.mul(group.inv(k), k2)) {
                    alpha.add_term(k, vec![p as u8], ONE);
                }
            }
        }
        let rest = pulled_monomial(cal, next, &word[1..], pre, memo);
        cal.mul(&alpha, &rest)
    };
    memo.insert((site, word.to_vec()), result.clone());
    result
}

// ---- integral curves --------------------------------------------------------

/// The integral curve `γ(t+1) = γ(t) s_X(γ(t))` from `g0`, length `steps + 1`.
pub fn integral_curve(lattice: &GroupLattice, x: &DiscreteVF, g0: Elem, steps: usize) -> Vec<Elem> {
    let group = lattice.group();
    let mut curve = Vec::with_capacity(steps + 1);
    let mut g = g0;
    curve.push(g);
    for _ in 0..steps {
        g = group.mul(g, x.s(g));
        curve.push(g);
    }
    curve
}

/// `(I + X)^t f`.
pub fn flow_power(lattice: &GroupLattice, x: &DiscreteVF, f: &ScalarFn, t: usize) -> ScalarFn {
    let mut out = f.clone();
    for _ in 0..t {
        out = x.apply_flow(lattice, &out);
    }
    out
}

pub fn curve_to_json(lattice: &GroupLattice, curve: &[Elem]) -> Value {
    json!(curve
        .iter()
        .map(|&g| lattice.group().label(g).to_string())
        .collect::<Vec<_>>())
}

// ---- exhaustive samples for the test suites -------------------------------

/// All discrete fields with values in `S` and invertible flow — optionally
/// also differentiable. Exhausts the `|S|^|G|` s-maps, so only for small
/// lattices; errors when the space exceeds `cap`.
pub fn enumerate_basic(
    lattice: &GroupLattice,
    require_differentiable: bool,
    cap: usize,
) -> Result<Vec<DiscreteVF>> {
    enumerate_s_maps(lattice, false, cap, |x| {
        x.is_basic(lattice) && (!require_differentiable || x.is_flow_differentiable(lattice))
    })
}

/// All discrete fields (values in `Sₑ`) with differentiable flow.
pub fn enumerate_discrete_differentiable(
    lattice: &GroupLattice,
    cap: usize,
) -> Result<Vec<DiscreteVF>> {
    enumerate_s_maps(lattice, true, cap, |x| x.is_flow_differentiable(lattice))
}

fn enumerate_s_maps(
    lattice: &GroupLattice,
    include_rest: bool,
    cap: usize,
    keep: impl Fn(&DiscreteVF) -> bool,
) -> Result<Vec<DiscreteVF>> {
    let radix = lattice.s_len() + usize::from(include_rest);
    let n = lattice.order();
    match (radix as u128).checked_pow(n as u32) {
        Some(t) if t <= cap as u128 => {}
        _ => {
            return Err(Error::Invalid(format!(
                "enumeration space {radix}^{n} exceeds cap {cap}"
            )))
        }
    }
    let e = lattice.group().identity();
    let step = |d: usize| -> Elem {
        if include_rest {
            if d == 0 {
                e
            } else {
                lattice.s()[d - 1]
            }
        } else {
            lattice.s()[d]
        }
    };
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let x = DiscreteVF {
            s: digits.iter().map(|&d| step(d)).collect(),
        };
        if keep(&x) {
            out.push(x);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < radix {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Calculus;
    use crate::group::{build_group, GroupSpec};

    fn s3_calculus() -> Calculus {
        let g = build_group(&GroupSpec::parse("S(3)").unwrap()).unwrap();
        Calculus::new(GroupLattice::from_labels(g, "(12),(13),(23)").unwrap())
    }

    /// The worked basic field on S₃: steps (12) on rotations, (13) on
    /// transpositions.
    fn x12(cal: &Calculus) -> DiscreteVF {
        let lattice = cal.lattice();
        let group = cal.group();
        let t12 = group.resolve("(12)").unwrap();
        let t13 = group.resolve("(13)").unwrap();
        DiscreteVF::from_fn(lattice, |g| {
            let label = group.label(g);
            if label == "e" || label == "(123)" || label == "(132)" {
                t12
            } else {
                t13
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_field_is_ell_h() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let h = lattice.s()[0];
        let x = DiscreteVF::constant(lattice, h).unwrap();
        assert!(x.is_basic(lattice));
        let n = lattice.order();
        let f = ScalarFn::from_fn(n, |g| Complex64::new(g as f64, 1.0));
        let lhs = x.apply(lattice, &f);
        let rhs = f.ell(lattice.group(), h);
        assert!(lhs.sub(&rhs).norm_inf() < 1e-12);
        // φ_{ℓ_h} = R_h
        assert_eq!(
            x.flow_map(lattice),
            SiteMap::right_translation(lattice.group(), h)
        );
    }

    #[test]
    fn discrete_leibniz_rule() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let x = x12(&cal);
        let n = lattice.order();
        let f = ScalarFn::from_fn(n, |g| Complex64::new(g as f64 + 0.5, -(g as f64)));
        let f2 = ScalarFn::from_fn(n, |g| Complex64::new(1.0, g as f64 * 0.3));
        let lhs = x.apply(lattice, &f.mul(&f2));
        let xf = x.apply(lattice, &f);
        let xf2 = x.apply(lattice, &f2);
        let rhs = xf.mul(&f2).add(&f.mul(&xf2)).add(&xf.mul(&xf2));
        assert!(lhs.sub(&rhs).norm_inf() < 1e-12);
    }

    #[test]
    fn round_trip_components() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let x = x12(&cal);
        let vf = x.to_vector_field(lattice);
        let back = DiscreteVF::validate_discrete(lattice, &vf, 1e-12).unwrap();
        assert_eq!(back, x);
        // two ones at a site are rejected
        let mut comps = vf.components().to_vec();
        comps[0] = ScalarFn::one(lattice.order());
        comps[1] = ScalarFn::one(lattice.order());
        let bad = VectorField::from_components(comps);
        assert!(DiscreteVF::validate_discrete(lattice, &bad, 1e-12).is_err());
    }

    #[test]
    fn s3_example_field_is_basic_and_differentiable() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let x = x12(&cal);
        assert!(x.is_basic(lattice));
        assert!(x.is_flow_differentiable(lattice));
        let inv = x.invertibility(lattice);
        assert!(inv.invertible);
        let r = inv.r_map.unwrap();
        let group = lattice.group();
        // r and s interlock: s(g r(g)⁻¹) = r(g), r(g s(g)) = s(g)
        for g in group.elements() {
            assert_eq!(x.s(group.mul(g, group.inv(r[g]))), r[g]);
            assert_eq!(r[group.mul(g, x.s(g))], x.s(g));
        }
        // (I+X)(I+X̌) = I on the indicator basis
        let inv_steps = x.inverse_step_map(lattice).unwrap();
        let n = group.order();
        for b in group.elements() {
            let e_b = ScalarFn::indicator(n, b);
            let forward = x.apply_flow(lattice, &e_b);
            let back = ScalarFn::from_fn(n, |g| *forward.value(group.mul(g, inv_steps[g])));
            assert!(back.sub(&e_b).norm_inf() < 1e-12);
        }
    }

    #[test]
    fn flow_pullback_on_theta() {
        let cal = s3_calculus();
        let x = x12(&cal);
        let lattice = cal.lattice();
        let group = cal.group();
        let pos = |l: &str| lattice.s_index(group.resolve(l).unwrap()).unwrap();
        let phi = x.flow_map(lattice);
        // φ*_X θ^{(12)} = θ^{(13)}
        let pulled = cal.pullback(&phi, &cal.theta_h(pos("(12)"))).unwrap();
        assert!(pulled.sub(&cal.theta_h(pos("(13)"))).max_norm() < 1e-12);
        // R_X θ^{(12)} is the displayed mixed expression, different from φ*
        let rx = r_x(&cal, &x, &cal.theta_h(pos("(12)"))).unwrap();
        let mut expected = Form::zero(1);
        for g in group.elements() {
            let label = group.label(g);
            let rot = label == "e" || label == "(123)" || label == "(132)";
            let word = if rot { pos("(12)") } else { pos("(23)") };
            expected.add_term(g, vec![word as u8], ONE);
        }
        assert!(rx.sub(&expected).max_norm() < 1e-12);
        assert!(!cal.forms_equal(&rx, &pulled).unwrap());
    }

    #[test]
    fn z3z3_field_not_differentiable() {
        let g = build_group(&GroupSpec::parse("Z(3)xZ(3)").unwrap()).unwrap();
        let lattice = GroupLattice::from_labels(g, "(0,1),(1,0)").unwrap();
        let group = lattice.group();
        let s01 = group.resolve("(0,1)").unwrap();
        let s10 = group.resolve("(1,0)").unwrap();
        let ones = ["(2,0)", "(1,1)", "(0,2)"];
        let x = DiscreteVF::from_fn(&lattice, |g| {
            if ones.contains(&group.label(g)) {
                s10
            } else {
                s01
            }
        })
        .unwrap();
        assert!(x.is_basic(&lattice));
        assert!(!x.is_flow_differentiable(&lattice));
        let witnesses = lattice.differentiability_witnesses(&x.flow_map(&lattice));
        let g10 = group.resolve("(1,0)").unwrap();
        let g20 = group.resolve("(2,0)").unwrap();
        assert!(witnesses.contains(&(g10, g20)));
    }

    #[test]
    fn invertibility_conditions_agree_and_witness() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let group = lattice.group();
        // one arrow into a site that also keeps its own rest state
        let t12 = group.resolve("(12)").unwrap();
        let e = group.identity();
        let mut s = vec![e; group.order()];
        s[e] = t12;
        let x = DiscreteVF::from_s_map(lattice, s).unwrap();
        let inv = x.invertibility(lattice);
        assert!(!inv.invertible);
        assert!(inv.witness.is_some());
        let (a, b, c) = invertibility_conditions(lattice, &x);
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert!(!a);
    }

    #[test]
    fn basic_basis_and_dual() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let basis = basic_basis(lattice).unwrap();
        assert!(is_basic_basis(lattice, &basis));
        // {ℓ_h} is a valid basis here
        let constant: Vec<DiscreteVF> = lattice
            .s()
            .iter()
            .map(|&h| DiscreteVF::constant(lattice, h).unwrap())
            .collect();
        assert!(is_basic_basis(lattice, &constant));
        let duals = dual_basis(&cal, &constant).unwrap();
        for (k, alpha) in duals.iter().enumerate() {
            assert!(alpha.sub(&cal.theta_h(k)).max_norm() < 1e-12);
        }
        // the worked basis: X_{(12)} plus companions
        let group = cal.group();
        let resolve = |l: &str| group.resolve(l).unwrap();
        let by_label = |rot: &str, transp: &str| {
            let r = resolve(rot);
            let t = resolve(transp);
            DiscreteVF::from_fn(lattice, |g| {
                let label = group.label(g);
                if label == "e" || label == "(123)" || label == "(132)" {
                    r
                } else {
                    t
                }
            })
            .unwrap()
        };
        let fields = vec![
            by_label("(12)", "(13)"),
            by_label("(13)", "(23)"),
            by_label("(23)", "(12)"),
        ];
        assert!(is_basic_basis(lattice, &fields));
        let duals = dual_basis(&cal, &fields).unwrap();
        // Σ_h α^h = θ
        let total = duals.iter().fold(Form::zero(1), |acc, a| acc.add(a));
        assert!(total.sub(&cal.theta()).max_norm() < 1e-12);
        // ⟨X_h, α^{h'}⟩ = δ, and df = Σ (X_h f) α^h
        let n = group.order();
        let f = ScalarFn::from_fn(n, |g| Complex64::new((g * 3) as f64, 0.7));
        let mut df2 = Form::zero(1);
        for (i, x) in fields.iter().enumerate() {
            for (j, alpha) in duals.iter().enumerate() {
                let pairing = x.to_vector_field(lattice).pair(lattice, alpha).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                for g in group.elements() {
                    assert!((pairing.value(g) - Complex64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
            let xf = x.apply(lattice, &f);
            df2 = df2.add(&cal.mul(&ScalarForm::from_function(&xf), &duals[i]));
        }
        let df = cal.d(&ScalarForm::from_function(&f));
        assert!(df.sub(&df2).max_norm() < 1e-10);
    }

    #[test]
    fn r_x_inverse_and_star() {
        let cal = s3_calculus();
        let x = x12(&cal);
        let lattice = cal.lattice();
        // R_X⁻¹ R_X = id on forms
        let omega = cal.mul(&cal.theta_h(0), &cal.theta_h(1));
        let round = r_x_inv(&cal, &x, &r_x(&cal, &x, &omega).unwrap()).unwrap();
        assert!(round.sub(&omega).max_norm() < 1e-12);
        // X = 0: R_X = id
        let zero = DiscreteVF::constant(lattice, lattice.group().identity()).unwrap();
        assert!(r_x(&cal, &zero, &omega).unwrap().sub(&omega).max_norm() < 1e-15);
        // discrete R_{X*}Y matches the general formula on components
        let y = x12(&cal);
        let star = r_x_star(&cal, &x, &y).unwrap();
        let star_general = r_x_star_general(&cal, &x, &y.to_vector_field(lattice)).unwrap();
        let diff = star.to_vector_field(lattice).sub(&star_general);
        assert!(diff.norm_inf() < 1e-12);
    }

    #[test]
    fn polygon_classification() {
        // ℤ₄ with S = {1, 2}: ℓ₁, ℓ₁, ℓ₂ forms a triangle (1 + 1 = 2)
        let g = build_group(&GroupSpec::Cyclic(4)).unwrap();
        let lattice = GroupLattice::from_labels(g, "1,2").unwrap();
        let cal = Calculus::new(lattice);
        let l1 = DiscreteVF::constant(cal.lattice(), 1).unwrap();
        let l2 = DiscreteVF::constant(cal.lattice(), 2).unwrap();
        assert_eq!(
            polygon_relation(&cal, &[&l1, &l1, &l2]).unwrap(),
            PolygonKind::Triangle
        );
        // ℓ₂, ℓ₂ is a biangle (2 + 2 = 0)
        assert_eq!(
            polygon_relation(&cal, &[&l2, &l2]).unwrap(),
            PolygonKind::Biangle
        );
        // 1 + 2 = 3 ∉ Sₑ: not a biangle, but a quadrangle with the swap
        assert_eq!(
            polygon_relation(&cal, &[&l1, &l2]).unwrap(),
            PolygonKind::None
        );
        assert_eq!(
            polygon_relation(&cal, &[&l1, &l2, &l2, &l1]).unwrap(),
            PolygonKind::Quadrangle
        );
        // biangle from pointwise inverse steps
        let x = l2.clone();
        let y = DiscreteVF::from_fn(cal.lattice(), |g| {
            cal.group().inv(x.s(g))
        })
        .unwrap();
        assert_eq!(
            polygon_relation(&cal, &[&x, &y]).unwrap(),
            PolygonKind::Biangle
        );
        // S₃: s-map product of ℓ_{(13)}, ℓ_{(12)} is the constant (123) ∉ Sₑ
        let cal3 = s3_calculus();
        let group = cal3.group();
        let l12 = DiscreteVF::constant(cal3.lattice(), group.resolve("(12)").unwrap()).unwrap();
        let l13 = DiscreteVF::constant(cal3.lattice(), group.resolve("(13)").unwrap()).unwrap();
        let prod = group.mul(l12.s(0), l13.s(0));
        assert_eq!(group.label(prod), "(123)");
        assert!(cal3.lattice().s_index(prod).is_none());
        // and the matching quadrangle: (12)(13) = (23)(12) = (123)
        let l23 = DiscreteVF::constant(cal3.lattice(), group.resolve("(23)").unwrap()).unwrap();
        assert_eq!(
            polygon_relation(&cal3, &[&l13, &l12, &l12, &l23]).unwrap(),
            PolygonKind::Quadrangle
        );
    }

    #[test]
    fn lie_derivative_rules() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let group = cal.group();
        // L_{ℓ_h} θ^{h'} = θ^{ad(h)h'} − θ^{h'}
        for &h in lattice.s() {
            let lh = DiscreteVF::constant(lattice, h).unwrap();
            for (pos, &hq) in lattice.s().iter().enumerate() {
                let got = lie_form(&cal, &lh, &cal.theta_h(pos)).unwrap();
                let image = lattice.s_index(group.conjugate(h, hq)).unwrap();
                let expected = cal.theta_h(image).sub(&cal.theta_h(pos));
                assert!(got.sub(&expected).max_norm() < 1e-12);
            }
            // L_X 𝟙 = 0
            let one = cal.one_with(&ONE);
            assert!(lie_form(&cal, &lh, &one).unwrap().max_norm() < 1e-15);
            // L_{ℓ_h} ℓ_{h'} = ℓ_{h'} − ℓ_{ad(h⁻¹)h'}
            for &hq in lattice.s() {
                let lhq = DiscreteVF::constant(lattice, hq).unwrap();
                let got = lie_vector_field(&cal, &lh, &lhq).unwrap();
                let image = group.conjugate(group.inv(h), hq);
                let expected = lhq.to_vector_field(lattice).sub(
                    &DiscreteVF::constant(lattice, image)
                        .unwrap()
                        .to_vector_field(lattice),
                );
                assert!(got.sub(&expected).norm_inf() < 1e-12);
            }
        }
        // abelian: L_{ℓ_h} ℓ_{h'} = 0
        let z6 = build_group(&GroupSpec::Cyclic(6)).unwrap();
        let lat6 = GroupLattice::from_labels(z6, "1,2,3").unwrap();
        let cal6 = Calculus::new(lat6);
        let l1 = DiscreteVF::constant(cal6.lattice(), 1).unwrap();
        let l2 = DiscreteVF::constant(cal6.lattice(), 2).unwrap();
        let lie = lie_vector_field(&cal6, &l1, &l2).unwrap();
        assert!(lie.norm_inf() < 1e-15);
        // product rule L_X(ψω) = (L_Xψ)ω + ψ L_Xω + (L_Xψ)(L_Xω)
        let x = x12(&cal);
        let psi = cal.theta_h(0);
        let omega = cal.theta_h(1);
        let lhs = lie_form(&cal, &x, &cal.mul(&psi, &omega)).unwrap();
        let lp = lie_form(&cal, &x, &psi).unwrap();
        let lo = lie_form(&cal, &x, &omega).unwrap();
        let rhs = cal
            .mul(&lp, &omega)
            .add(&cal.mul(&psi, &lo))
            .add(&cal.mul(&lp, &lo));
        assert!(lhs.sub(&rhs).max_norm() < 1e-12);
    }

    #[test]
    fn contraction_rules() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        // ℓ_{h'} ⌟ θ^h = δ
        for hp in 0..lattice.s_len() {
            let lh = DiscreteVF::constant(lattice, lattice.s()[hp]).unwrap();
            for pos in 0..lattice.s_len() {
                let got = contract(&cal, &lh, &cal.theta_h(pos)).unwrap();
                if pos == hp {
                    let one = cal.one_with(&ONE);
                    assert!(got.sub(&one).max_norm() < 1e-12);
                } else {
                    assert!(got.max_norm() < 1e-15);
                }
            }
        }
        // basic X: X ⌟ θ = 𝟙
        let x = x12(&cal);
        let got = contract(&cal, &x, &cal.theta()).unwrap();
        assert!(got.sub(&cal.one_with(&ONE)).max_norm() < 1e-12);
        // X ⌟ df = X f
        let n = lattice.order();
        let f = ScalarFn::from_fn(n, |g| Complex64::new((g * g) as f64, g as f64));
        let df = cal.d(&ScalarForm::from_function(&f));
        let got = contract(&cal, &x, &df).unwrap();
        let expected = ScalarForm::from_function(&x.apply(lattice, &f));
        assert!(got.sub(&expected).max_norm() < 1e-12);
        // ℓ_h ⌟ (relation 2-form) = 0
        for (_, rel) in cal.relation_generators() {
            for &h in lattice.s() {
                let lh = DiscreteVF::constant(lattice, h).unwrap();
                let got = contract(&cal, &lh, &rel).unwrap();
                assert!(got.max_norm() < 1e-12);
            }
        }
        // X ⌟ f = 0
        let f0 = ScalarForm::from_function(&f);
        assert!(contract(&cal, &x, &f0).unwrap().is_zero_exact());
    }

    #[test]
    fn integral_curves() {
        // X = ℓ₁ on ℤ₆ from 0: 0,1,2,3,4,5,0
        let z6 = build_group(&GroupSpec::Cyclic(6)).unwrap();
        let lat = GroupLattice::from_labels(z6, "1").unwrap();
        let l1 = DiscreteVF::constant(&lat, 1).unwrap();
        assert_eq!(integral_curve(&lat, &l1, 0, 6), vec![0, 1, 2, 3, 4, 5, 0]);
        // X = 0: constant curve
        let zero = DiscreteVF::constant(&lat, 0).unwrap();
        assert_eq!(integral_curve(&lat, &zero, 3, 4), vec![3; 5]);
        // S₃ worked orbit from e: period 6
        let cal = s3_calculus();
        let x = x12(&cal);
        let group = cal.group();
        let e = group.identity();
        let curve = integral_curve(cal.lattice(), &x, e, 6);
        let labels: Vec<&str> = curve.iter().map(|&g| group.label(g)).collect();
        assert_eq!(
            labels,
            vec!["e", "(12)", "(123)", "(23)", "(132)", "(13)", "e"]
        );
        // f(γ(t)) = ((I+X)^t f)(g0)
        let n = group.order();
        for t in 0..=6 {
            for b in group.elements() {
                let f = ScalarFn::indicator(n, b);
                let lhs = *f.value(curve[t]);
                let rhs = *flow_power(cal.lattice(), &x, &f, t).value(e);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_differentiability_equivalences() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let x = x12(&cal);
        assert!(flow_s_condition(lattice, &x));
        // the intertwiner exists and intertwines for Y over {ℓ_h}
        for &h in lattice.s() {
            let y = DiscreteVF::constant(lattice, h).unwrap();
            let z = intertwiner(lattice, &x, &y).unwrap();
            assert!(intertwines(lattice, &x, &y, &z));
        }
        // a non-differentiable field fails the s-condition
        let g = build_group(&GroupSpec::parse("Z(3)xZ(3)").unwrap()).unwrap();
        let lat = GroupLattice::from_labels(g, "(0,1),(1,0)").unwrap();
        let group = lat.group();
        let s10 = group.resolve("(1,0)").unwrap();
        let s01 = group.resolve("(0,1)").unwrap();
        let ones = ["(2,0)", "(1,1)", "(0,2)"];
        let bad = DiscreteVF::from_fn(&lat, |g| {
            if ones.contains(&group.label(g)) {
                s10
            } else {
                s01
            }
        })
        .unwrap();
        assert!(!flow_s_condition(&lat, &bad));
        assert!(lat.s().iter().any(|&h| {
            intertwiner(&lat, &bad, &DiscreteVF::constant(&lat, h).unwrap()).is_err()
        }));
    }

    #[test]
    fn pushforward_preserves_discreteness() {
        let cal = s3_calculus();
        let lattice = cal.lattice();
        let x = x12(&cal);
        let phi = x.flow_map(lattice);
        for &h in lattice.s() {
            let y = DiscreteVF::constant(lattice, h).unwrap();
            let pushed = push_forward(lattice, &phi, &y).unwrap();
            assert!(pushed
                .s_map()
                .iter()
                .all(|&s| s == lattice.group().identity() || lattice.s_index(s).is_some()));
        }
    }

    #[test]
    fn enumeration_counts() {
        let cal = s3_calculus();
        let diff_basics = enumerate_basic(cal.lattice(), true, 1_000_000).unwrap();
        assert!(diff_basics.iter().all(|x| x.is_basic(cal.lattice())));
        for &h in cal.lattice().s() {
            let lh = DiscreteVF::constant(cal.lattice(), h).unwrap();
            assert!(diff_basics.contains(&lh));
        }
        assert!(diff_basics.contains(&x12(&cal)));
    }
}
