//! Gauge theory on a group lattice.
//!
//! A gauge field is the 1-form `W = θ + A = Σ_h W_h θ^h` with matrix
//! coefficients; its field strength `F = dA + A² = W² − Δ(W) − Δᵉ` splits
//! into biangle, triangle and quadrangle parts, each a parallel transport
//! around one plaquette species. The Yang-Mills action sums the squared
//! parts with weights `1/(2m)` and `1/|g|` per quadrangle class; it is
//! invariant under `W_h ↦ γ W_h (R*_h γ⁻¹)`.

use crate::algebra::{CMat, Coefficient, Function, MatrixFn};
use crate::forms::{Calculus, Form, MatrixForm, ScalarForm};
use crate::group::Elem;
use crate::lattice::GroupLattice;
use crate::vector_fields::VectorField;
use crate::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A gauge field: one transport matrix per arrow, `W_h(g)` on `g → gh`.
#[derive(Debug, Clone)]
pub struct GaugeField {
    m: usize,
    w: Vec<MatrixFn>,
}

impl GaugeField {
    pub fn from_w(lattice: &GroupLattice, m: usize, w: Vec<MatrixFn>) -> Result<Self> {
        if w.len() != lattice.s_len() {
            return Err(Error::Invalid(format!(
                "expected {} link functions, got {}",
                lattice.s_len(),
                w.len()
            )));
        }
        for f in &w {
            if f.len() != lattice.order()
                || f.values().iter().any(|v| v.nrows() != m || v.ncols() != m)
            {
                return Err(Error::Invalid("link matrix of wrong shape".into()));
            }
        }
        Ok(GaugeField { m, w })
    }

    /// The vacuum `W = θ`, i.e. `W_h = I` everywhere (`A = 0`).
    pub fn theta(lattice: &GroupLattice, m: usize) -> Self {
        GaugeField {
            m,
            w: (0..lattice.s_len())
                .map(|_| MatrixFn::identity(lattice.order(), m))
                .collect(),
        }
    }

    /// Random unitary links (orthonormalized complex Gaussians).
    pub fn random_unitary(lattice: &GroupLattice, m: usize, rng: &mut impl Rng) -> Self {
        GaugeField {
            m,
            w: (0..lattice.s_len())
                .map(|_| Function::from_fn(lattice.order(), |_| random_unitary(m, rng)))
                .collect(),
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn w(&self, pos: usize) -> &MatrixFn {
        &self.w[pos]
    }

    pub fn links(&self) -> &[MatrixFn] {
        &self.w
    }

    /// `A_h = W_h − I`.
    pub fn a(&self, pos: usize) -> MatrixFn {
        let eye = CMat::identity(self.m, self.m);
        self.w[pos].map(|w| w - &eye)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let eye = CMat::identity(self.m, self.m);
        self.w.iter().all(|f| {
            f.values()
                .iter()
                .all(|w| (w.adjoint() * w - &eye).norm() < tol)
        })
    }

    /// `W = Σ_h W_h θ^h` as a matrix 1-form.
    pub fn w_form(&self, cal: &Calculus) -> MatrixForm {
        let mut out = Form::zero(1);
        for g in cal.group().elements() {
            for pos in 0..self.w.len() {
                out.add_term(g, vec![pos as u8], self.w[pos].value(g).clone());
            }
        }
        out
    }

    /// `A = W − θ` as a matrix 1-form.
    pub fn a_form(&self, cal: &Calculus) -> MatrixForm {
        let mut out = Form::zero(1);
        let eye = CMat::identity(self.m, self.m);
        for g in cal.group().elements() {
            for pos in 0..self.w.len() {
                out.add_term(g, vec![pos as u8], self.w[pos].value(g) - &eye);
            }
        }
        out
    }

    /// The curvature 2-form `F = W² − Δ(W) − Δᵉ` (equal to `dA + A²`
    /// modulo the 2-form relations).
    pub fn field_strength_form(&self, cal: &Calculus) -> MatrixForm {
        let w = self.w_form(cal);
        let eye = CMat::identity(self.m, self.m);
        cal.mul(&w, &w)
            .sub(&cal.delta(&w))
            .sub(&cal.delta_e_with(&eye))
    }

    /// Per-plaquette field strength parts.
    pub fn field_strength_parts(&self, cal: &Calculus) -> FieldStrength {
        let lattice = cal.lattice();
        let group = cal.group();
        let polygons = lattice.polygons();
        let eye = CMat::identity(self.m, self.m);
        // transport around the plaquette opening: W_h (R*_h W_{h'}) per site
        let loop_product = |i: usize, j: usize| -> MatrixFn {
            let hi = lattice.s()[i];
            Function::from_fn(group.order(), |g| {
                self.w[i].value(g) * self.w[j].value(group.mul(g, hi))
            })
        };
        let mut biangle = Vec::new();
        for &(i, j) in &polygons.biangles {
            let mut oriented = vec![(i, j)];
            if i != j {
                oriented.push((j, i));
            }
            for (a, b) in oriented {
                let f = loop_product(a, b).map(|u| u - &eye);
                biangle.push(((a, b), f));
            }
        }
        let mut triangle = Vec::new();
        for &(h0, i, j) in &polygons.triangles {
            let product = loop_product(i, j);
            let f = Function::from_fn(group.order(), |g| product.value(g) - self.w[h0].value(g));
            triangle.push(((h0, i, j), f));
        }
        let mut quadrangle = Vec::new();
        for (class, pairs) in &polygons.quadrangles {
            let raw: Vec<((usize, usize), MatrixFn)> = pairs
                .iter()
                .map(|&(i, j)| ((i, j), loop_product(i, j)))
                .collect();
            quadrangle.push((*class, raw));
        }
        FieldStrength {
            m: self.m,
            biangle,
            triangle,
            quadrangle,
        }
    }

    /// `W'_h = γ W_h (R*_h γ⁻¹)`.
    pub fn gauge_transform(&self, cal: &Calculus, gamma: &GaugeTransform) -> Result<GaugeField> {
        let group = cal.group();
        let inv = gamma.inverse(group)?;
        let w = self
            .w
            .iter()
            .enumerate()
            .map(|(pos, wh)| {
                let h = cal.lattice().s()[pos];
                Function::from_fn(group.order(), |g| {
                    gamma.gamma.value(g) * wh.value(g) * inv.value(group.mul(g, h))
                })
            })
            .collect();
        Ok(GaugeField { m: self.m, w })
    }

    /// The Yang-Mills action and its per-species breakdown.
    pub fn yang_mills(&self, cal: &Calculus) -> YangMills {
        let group = cal.group();
        let n = group.order();
        let parts = self.field_strength_parts(cal);
        let mut biangle = vec![0.0; n];
        let mut triangle = vec![0.0; n];
        let mut quadrangle = vec![0.0; n];
        for (_, f) in &parts.biangle {
            for g in group.elements() {
                let u = f.value(g);
                biangle[g] += (u.adjoint() * u).trace().re;
            }
        }
        for (_, f) in &parts.triangle {
            for g in group.elements() {
                let u = f.value(g);
                triangle[g] += (u.adjoint() * u).trace().re;
            }
        }
        for (class, raw) in &parts.quadrangle {
            let mult = cal.lattice().multiplicity(*class) as f64;
            for g in group.elements() {
                // (p_g F, p_g F) = Σ F̌† (|g| F̌ − Σ F̌), weighted by 1/|g|
                let total = raw
                    .iter()
                    .fold(CMat::zeros(self.m, self.m), |acc, (_, f)| acc + f.value(g));
                let mut acc = 0.0;
                for (_, f) in raw {
                    let comp = f.value(g) * Complex64::new(mult, 0.0) - &total;
                    acc += (f.value(g).adjoint() * comp).trace().re;
                }
                quadrangle[g] += acc / mult;
            }
        }
        let weight = 1.0 / (2.0 * self.m as f64);
        let lagrangian: Vec<f64> = (0..n)
            .map(|g| weight * (biangle[g] + triangle[g] + quadrangle[g]))
            .collect();
        YangMills {
            total: lagrangian.iter().sum(),
            biangle: weight * biangle.iter().sum::<f64>(),
            triangle: weight * triangle.iter().sum::<f64>(),
            quadrangle: weight * quadrangle.iter().sum::<f64>(),
            lagrangian,
        }
    }
}

/// Field strength split by plaquette species: biangle entries carry
/// `W_h R*_h W_{h'} − I`, triangles `W_h R*_h W_{h'} − W_{h₀}`, and
/// quadrangles the raw transports `W_h R*_h W_{h'}` per pair (their
/// differences are the gauge-covariant quadrangle parts).
#[derive(Debug, Clone)]
pub struct FieldStrength {
    m: usize,
    pub biangle: Vec<((usize, usize), MatrixFn)>,
    pub triangle: Vec<((usize, usize, usize), MatrixFn)>,
    pub quadrangle: Vec<(Elem, Vec<((usize, usize), MatrixFn)>)>,
}

impl FieldStrength {
    /// `F₍g₎ h,h';ĥ,ĥ' = W_h R*_h W_{h'} − W_ĥ R*_ĥ W_ĥ'` at one site.
    pub fn quadrangle_difference(
        &self,
        class: Elem,
        pair: (usize, usize),
        hat: (usize, usize),
        site: Elem,
    ) -> Option<CMat> {
        let raw = &self.quadrangle.iter().find(|(g, _)| *g == class)?.1;
        let a = &raw.iter().find(|(p, _)| *p == pair)?.1;
        let b = &raw.iter().find(|(p, _)| *p == hat)?.1;
        Some(a.value(site) - b.value(site))
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }
}

/// Yang-Mills action values.
#[derive(Debug, Clone)]
pub struct YangMills {
    pub total: f64,
    pub biangle: f64,
    pub triangle: f64,
    pub quadrangle: f64,
    /// Per-site Lagrangian.
    pub lagrangian: Vec<f64>,
}

/// A pointwise invertible matrix function acting as a gauge transformation.
#[derive(Debug, Clone)]
pub struct GaugeTransform {
    gamma: MatrixFn,
}

impl GaugeTransform {
    pub fn new(gamma: MatrixFn) -> Self {
        GaugeTransform { gamma }
    }

    pub fn identity(n: usize, m: usize) -> Self {
        GaugeTransform {
            gamma: MatrixFn::identity(n, m),
        }
    }

    pub fn random_unitary(n: usize, m: usize, rng: &mut impl Rng) -> Self {
        GaugeTransform {
            gamma: Function::from_fn(n, |_| random_unitary(m, rng)),
        }
    }

    pub fn gamma(&self) -> &MatrixFn {
        &self.gamma
    }

    /// Applying `self` after `other` equals the single transform `self · other`.
    pub fn compose(&self, other: &GaugeTransform) -> GaugeTransform {
        GaugeTransform {
            gamma: self.gamma.mul(&other.gamma),
        }
    }

    pub fn inverse(&self, group: &crate::group::GroupTable) -> Result<MatrixFn> {
        let mut values = Vec::with_capacity(self.gamma.len());
        for g in group.elements() {
            let inv = self
                .gamma
                .value(g)
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::SingularGauge(group.label(g).to_string()))?;
            values.push(inv);
        }
        Ok(Function::from_values(values))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.gamma
            .values()
            .iter()
            .all(|g| (g.adjoint() * g - CMat::identity(g.nrows(), g.ncols())).norm() < tol)
    }
}

/// Random unitary from Gram-Schmidt of a complex Gaussian matrix.
pub fn random_unitary(m: usize, rng: &mut impl Rng) -> CMat {
    let a = CMat::from_fn(m, m, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut cols: Vec<DVector<Complex64>> = (0..m).map(|j| a.column(j).into_owned()).collect();
    for j in 0..m {
        for k in 0..j {
            let proj = cols[k].dotc(&cols[j]);
            let prev = cols[k].clone();
            cols[j] -= prev * proj;
        }
        let norm = cols[j].norm();
        cols[j] /= Complex64::new(norm, 0.0);
    }
    CMat::from_fn(m, m, |i, j| cols[j][i])
}

// ---- matter fields ---------------------------------------------------------

/// A 0-form matter field `ψ : G → ℂ^m` (column; transforms as `ψ' = γψ`).
#[derive(Debug, Clone)]
pub struct MatterField {
    vals: Vec<DVector<Complex64>>,
}

impl MatterField {
    pub fn from_values(vals: Vec<DVector<Complex64>>) -> Self {
        MatterField { vals }
    }

    pub fn random(n: usize, m: usize, rng: &mut impl Rng) -> Self {
        MatterField {
            vals: (0..n)
                .map(|_| {
                    DVector::from_fn(m, |_, _| {
                        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    })
                })
                .collect(),
        }
    }

    pub fn value(&self, g: Elem) -> &DVector<Complex64> {
        &self.vals[g]
    }

    pub fn transform(&self, gamma: &GaugeTransform) -> MatterField {
        MatterField {
            vals: self
                .vals
                .iter()
                .enumerate()
                .map(|(g, v)| gamma.gamma.value(g) * v)
                .collect(),
        }
    }
}

/// `∇_{ℓ_h} ψ = W_h R*_h ψ − ψ`, one vector per site and direction.
pub fn covariant_derivative(
    lattice: &GroupLattice,
    w: &GaugeField,
    psi: &MatterField,
) -> Vec<Vec<DVector<Complex64>>> {
    let group = lattice.group();
    lattice
        .s()
        .iter()
        .enumerate()
        .map(|(pos, &h)| {
            group
                .elements()
                .map(|g| w.w(pos).value(g) * psi.value(group.mul(g, h)) - psi.value(g))
                .collect()
        })
        .collect()
}

/// Row-field covariant derivative `∇_{ℓ_h} φ = (R*_h φ) W_h⁻¹ − φ`, for
/// `φ` transforming as `φ' = φ γ⁻¹`.
pub fn covariant_derivative_row(
    lattice: &GroupLattice,
    w: &GaugeField,
    phi_rows: &[nalgebra::RowDVector<Complex64>],
) -> Result<Vec<Vec<nalgebra::RowDVector<Complex64>>>> {
    let group = lattice.group();
    lattice
        .s()
        .iter()
        .enumerate()
        .map(|(pos, &h)| {
            group
                .elements()
                .map(|g| {
                    let winv = w.w(pos).value(g).clone().try_inverse().ok_or_else(|| {
                        Error::SingularTransport {
                            h: group.label(h).to_string(),
                            site: group.label(g).to_string(),
                        }
                    })?;
                    Ok(&phi_rows[group.mul(g, h)] * winv - &phi_rows[g])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// `𝕊_ψ = Σ_g ½ Σ_h ‖∇_{ℓ_h}ψ(g)‖²`: real, nonnegative, and invariant
/// under unitary gauge transforms.
pub fn matter_action(lattice: &GroupLattice, w: &GaugeField, psi: &MatterField) -> f64 {
    covariant_derivative(lattice, w, psi)
        .iter()
        .map(|per_site| per_site.iter().map(|v| 0.5 * v.norm_squared()).sum::<f64>())
        .sum()
}

// ---- inner products of forms ----------------------------------------------

/// Inner product of forms of equal grade ≤ 2, sesquilinear in the left
/// slot: `(θ^h, θ^{h'}) = δ`, biangle/triangle words likewise, and
/// `(θ^{h₁}θ^{h₂}, ψ) = ψ₍g₎ h₁,h₂` on quadrangle words. `unit` fixes the
/// coefficient shape of the resulting function.
pub fn form_inner_product<C: Coefficient>(
    cal: &Calculus,
    a: &Form<C>,
    b: &Form<C>,
    unit: &C,
) -> Result<Function<C>> {
    if a.grade() != b.grade() {
        return Err(Error::GradeMismatch(a.grade(), b.grade()));
    }
    let n = cal.group().order();
    let zero = unit.zero_like();
    let mut values = vec![zero.clone(); n];
    match a.grade() {
        0 | 1 => {
            for ((g, w), ca) in a.terms() {
                if let Some(cb) = b.coeff(*g, w) {
                    values[*g] = values[*g].add(&ca.adjoint().mul(cb));
                }
            }
        }
        2 => {
            let da = cal.decompose_2form(a)?;
            let db = cal.decompose_2form(b)?;
            {
                let mut direct = |pa: &Form<C>, pb: &Form<C>| {
                    for ((g, w), ca) in pa.terms() {
                        if let Some(cb) = pb.coeff(*g, w) {
                            values[*g] = values[*g].add(&ca.adjoint().mul(cb));
                        }
                    }
                };
                direct(&da.biangle, &db.biangle);
                for ((_, pa), (_, pb)) in da.triangles.iter().zip(db.triangles.iter()) {
                    direct(pa, pb);
                }
            }
            // quadrangle: Σ ǎ† · (b-component)
            for ((_, raw), (_, comps)) in da.quad_raw.iter().zip(db.quad_components.iter()) {
                for ((g, w), ca) in raw.terms() {
                    if let Some(cb) = comps.get(&(*g, (w[0], w[1]))) {
                        values[*g] = values[*g].add(&ca.adjoint().mul(cb));
                    }
                }
            }
        }
        g => return Err(Error::GradeCap(g, 2)),
    }
    Ok(Function::from_values(values))
}

// ---- connections on a free module ------------------------------------------

/// An element of the free module `𝒜^m`: one column per site.
pub type ModuleElement = Vec<DVector<Complex64>>;

/// A connection on the free left module `𝒜^m`, stored through its parallel
/// transport matrices: `(𝒱_{ℓ_h} E)(g) = M_h(g) E(gh⁻¹)`.
#[derive(Debug, Clone)]
pub struct ModuleConnection {
    m: usize,
    transports: Vec<MatrixFn>,
}

impl ModuleConnection {
    pub fn new(lattice: &GroupLattice, m: usize, transports: Vec<MatrixFn>) -> Result<Self> {
        if transports.len() != lattice.s_len() {
            return Err(Error::Invalid("one transport per direction required".into()));
        }
        Ok(ModuleConnection { m, transports })
    }

    /// Builds a connection from abstract per-direction linear operators,
    /// verifying the transport property
    /// `𝒱_{ℓ_h}(e^g E) = e^{gh} 𝒱_{ℓ_h}(E)` and extracting the matrices.
    pub fn from_transport_ops(
        lattice: &GroupLattice,
        m: usize,
        ops: &[&dyn Fn(&ModuleElement) -> ModuleElement],
    ) -> Result<Self> {
        if ops.len() != lattice.s_len() {
            return Err(Error::Invalid("one transport per direction required".into()));
        }
        let group = lattice.group();
        let n = group.order();
        let zero_c = Complex64::new(0.0, 0.0);
        let basis = |g: Elem, i: usize| -> ModuleElement {
            (0..n)
                .map(|x| {
                    DVector::from_fn(m, |k, _| if x == g && k == i { C_ONE } else { zero_c })
                })
                .collect()
        };
        let constant = |i: usize| -> ModuleElement {
            (0..n)
                .map(|_| DVector::from_fn(m, |k, _| if k == i { C_ONE } else { zero_c }))
                .collect()
        };
        let mut transports = Vec::with_capacity(ops.len());
        for (pos, op) in ops.iter().enumerate() {
            let h = lattice.s()[pos];
            let images: Vec<ModuleElement> = (0..m).map(|i| op(&constant(i))).collect();
            let matrix = Function::from_fn(n, |g| CMat::from_fn(m, m, |k, i| images[i][g][k]));
            // transport property on localized elements
            for g in group.elements() {
                for i in 0..m {
                    let localized = op(&basis(g, i));
                    let target = group.mul(g, h);
                    for x in group.elements() {
                        let expected = if x == target {
                            matrix.value(x).column(i).into_owned()
                        } else {
                            DVector::zeros(m)
                        };
                        if (&localized[x] - expected).norm() > 1e-9 {
                            return Err(Error::SingularTransport {
                                h: group.label(h).to_string(),
                                site: group.label(g).to_string(),
                            });
                        }
                    }
                }
            }
            transports.push(matrix);
        }
        Ok(ModuleConnection { m, transports })
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn transport_matrix(&self, pos: usize) -> &MatrixFn {
        &self.transports[pos]
    }

    /// `(𝒱_{ℓ_h} E)(g) = M_h(g) E(gh⁻¹)`.
    pub fn transport(
        &self,
        lattice: &GroupLattice,
        pos: usize,
        e: &ModuleElement,
    ) -> ModuleElement {
        let group = lattice.group();
        let h = lattice.s()[pos];
        group
            .elements()
            .map(|g| self.transports[pos].value(g) * &e[group.mul(g, group.inv(h))])
            .collect()
    }

    /// Transport along a vector field: `𝒱_X = Σ_h (R*_{h⁻¹} X^h) 𝒱_{ℓ_h}`.
    pub fn transport_along(
        &self,
        lattice: &GroupLattice,
        x: &VectorField,
        e: &ModuleElement,
    ) -> ModuleElement {
        let group = lattice.group();
        group
            .elements()
            .map(|g| {
                let mut acc = DVector::zeros(self.m);
                for (pos, &h) in lattice.s().iter().enumerate() {
                    let src = group.mul(g, group.inv(h));
                    let coeff = *x.component(pos).value(src);
                    if coeff.norm() > 0.0 {
                        acc += (self.transports[pos].value(g) * &e[src]) * coeff;
                    }
                }
                acc
            })
            .collect()
    }

    /// `∇E = θ ⊗ E − 𝒱(E)` as per-direction components
    /// `(∇E)_h(g) = E(g) − M_h(g) E(gh⁻¹)`.
    pub fn nabla(&self, lattice: &GroupLattice, e: &ModuleElement) -> Vec<ModuleElement> {
        (0..lattice.s_len())
            .map(|pos| {
                let transported = self.transport(lattice, pos, e);
                e.iter()
                    .zip(transported)
                    .map(|(orig, t)| orig - t)
                    .collect()
            })
            .collect()
    }

    /// Connection 1-form `Γ_{ji} = δ_{ji} θ − Σ_h (R*_h (M_h)_{ji}) θ^h`, so
    /// that `∇(Σ ω_i ⊗ E_i)_j = dω_j + (−1)^r Σ_i ω_i Γ_{ji}`.
    pub fn gamma_form(&self, cal: &Calculus, j: usize, i: usize) -> ScalarForm {
        let group = cal.group();
        let mut out = Form::zero(1);
        for g in group.elements() {
            for (pos, &h) in cal.lattice().s().iter().enumerate() {
                let mut c = -self.transports[pos].value(group.mul(g, h))[(j, i)];
                if i == j {
                    c += C_ONE;
                }
                out.add_term(g, vec![pos as u8], c);
            }
        }
        out
    }

    /// Covariant derivative on `Ω^r ⊗ 𝒜^m` elements written as coefficient
    /// forms per basis column.
    pub fn nabla_tensor(&self, cal: &Calculus, t: &[ScalarForm], grade: usize) -> Vec<ScalarForm> {
        let sign = if grade % 2 == 0 { 1.0 } else { -1.0 };
        (0..self.m)
            .map(|j| {
                let mut out = cal.d(&t[j]);
                for i in 0..self.m {
                    let term = cal.mul(&t[i], &self.gamma_form(cal, j, i));
                    out = out.add(&term.scale(Complex64::new(sign, 0.0)));
                }
                out
            })
            .collect()
    }

    /// Curvature `ℛ(E_i) = −∇²E_i`, as 2-form coefficients per basis column.
    pub fn curvature(&self, cal: &Calculus) -> Vec<Vec<ScalarForm>> {
        (0..self.m)
            .map(|i| {
                let basis: Vec<ScalarForm> = (0..self.m)
                    .map(|j| if i == j { cal.one_with(&C_ONE) } else { Form::zero(0) })
                    .collect();
                let first = self.nabla_tensor(cal, &basis, 0);
                self.nabla_tensor(cal, &first, 1)
                    .into_iter()
                    .map(|f| f.neg())
                    .collect()
            })
            .collect()
    }
}

/// Multiplies a module element by a scalar function pointwise.
pub fn scale_element(e: &ModuleElement, f: &crate::algebra::ScalarFn) -> ModuleElement {
    e.iter().enumerate().map(|(g, v)| v * *f.value(g)).collect()
}
