//! Linear connections on the 1-forms of a group lattice.
//!
//! A linear connection is determined by coefficients `V^h_{h',h''} ∈ 𝒜`
//! through `𝒱_{ℓ_{h'}}(θ^h) = Σ_{h''} (R*_{h'⁻¹} V^h_{h',h''}) θ^{h''}`,
//! i.e. `∇θ^h = θ ⊗ θ^h − Σ_{h'} V^h_{h'} ⊗ θ^{h'}`. Torsion measures the
//! failure of the dual transport `Ṽ` to close biangles, triangles and
//! quadrangles; curvature is `ℛ = −∇²`.

use crate::algebra::{CMat, ScalarFn};
use crate::forms::{Calculus, Form, ScalarForm};
use crate::group::Elem;
use crate::lattice::GroupLattice;
use crate::vector_fields::VectorField;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A linear connection: coefficients `V^h_{h₁,h₂}` as functions on `G`,
/// indexed by `S`-positions `(upper, lower1, lower2)`.
#[derive(Debug, Clone)]
pub struct LinearConnection {
    s_len: usize,
    v: Vec<ScalarFn>,
}

impl LinearConnection {
    pub fn from_fn(
        lattice: &GroupLattice,
        f: impl Fn(usize, usize, usize, Elem) -> Complex64,
    ) -> Self {
        let s_len = lattice.s_len();
        let n = lattice.order();
        let mut v = Vec::with_capacity(s_len * s_len * s_len);
        for upper in 0..s_len {
            for lo1 in 0..s_len {
                for lo2 in 0..s_len {
                    v.push(ScalarFn::from_fn(n, |g| f(upper, lo1, lo2, g)));
                }
            }
        }
        LinearConnection { s_len, v }
    }

    pub fn zero(lattice: &GroupLattice) -> Self {
        Self::from_fn(lattice, |_, _, _, _| Complex64::new(0.0, 0.0))
    }

    /// The canonical torsion-free connection
    /// `V^h_{h₁,h₂} = δ^h_{h₁h₂ (when h₁h₂ ∈ S)} − δ^h_{h₁}`.
    pub fn canonical(lattice: &GroupLattice) -> Self {
        let group = lattice.group();
        Self::from_fn(lattice, |upper, lo1, lo2, _| {
            let product = group.mul(lattice.s()[lo1], lattice.s()[lo2]);
            let mut c = Complex64::new(0.0, 0.0);
            if lattice.s_index(product) == Some(upper) {
                c += C_ONE;
            }
            if upper == lo1 {
                c -= C_ONE;
            }
            c
        })
    }

    /// Uniform random coefficients in the unit complex box.
    pub fn random(lattice: &GroupLattice, rng: &mut impl Rng) -> Self {
        let s_len = lattice.s_len();
        let n = lattice.order();
        let mut v = Vec::with_capacity(s_len * s_len * s_len);
        for _ in 0..s_len * s_len * s_len {
            v.push(ScalarFn::from_fn(n, |_| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            }));
        }
        LinearConnection { s_len, v }
    }

    /// Random permutation-valued `V_h` matrices, constant in `g`.
    pub fn random_permutation(lattice: &GroupLattice, rng: &mut impl Rng) -> Self {
        let s_len = lattice.s_len();
        let perms: Vec<Vec<usize>> = (0..s_len)
            .map(|_| {
                let mut p: Vec<usize> = (0..s_len).collect();
                for i in (1..s_len).rev() {
                    p.swap(i, rng.random_range(0..=i));
                }
                p
            })
            .collect();
        Self::from_fn(lattice, |upper, lo1, lo2, _| {
            if perms[lo1][lo2] == upper {
                C_ONE
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `V^h_{h₁,h₂}` as a function.
    pub fn v(&self, upper: usize, lo1: usize, lo2: usize) -> &ScalarFn {
        &self.v[(upper * self.s_len + lo1) * self.s_len + lo2]
    }

    /// The matrix `V_{h'}(g)` with entry `(h, h'') = V^h_{h',h''}(g)`.
    pub fn v_matrix(&self, lo1: usize, site: Elem) -> CMat {
        CMat::from_fn(self.s_len, self.s_len, |upper, lo2| {
            *self.v(upper, lo1, lo2).value(site)
        })
    }

    /// The 1-form `V^h_{h'} = Σ_{h''} V^h_{h'',h'} θ^{h''}`.
    pub fn v_form(&self, cal: &Calculus, upper: usize, lo2: usize) -> ScalarForm {
        let mut out = Form::zero(1);
        for g in cal.group().elements() {
            for h2 in 0..self.s_len {
                out.add_term(g, vec![h2 as u8], *self.v(upper, h2, lo2).value(g));
            }
        }
        out
    }

    /// `∇θ^h` as components over `θ^{h'}`: `(∇θ^h)_{h'} = θ δ^h_{h'} − V^h_{h'}`.
    pub fn nabla_theta(&self, cal: &Calculus, upper: usize) -> Vec<ScalarForm> {
        (0..self.s_len)
            .map(|lo2| {
                let mut out = self.v_form(cal, upper, lo2).neg();
                if lo2 == upper {
                    out = out.add(&cal.theta());
                }
                out
            })
            .collect()
    }

    /// `𝒱_{ℓ_h} α` for a 1-form: component `h''` is
    /// `Σ_{h'} R*_{h⁻¹}(α_{h'} V^{h'}_{h,h''})`.
    pub fn transport_1form(&self, cal: &Calculus, dir: usize, alpha: &ScalarForm) -> Result<ScalarForm> {
        if alpha.grade() != 1 {
            return Err(Error::GradeMismatch(alpha.grade(), 1));
        }
        let group = cal.group();
        let h = cal.lattice().s()[dir];
        let mut out = Form::zero(1);
        for ((g, w), c) in alpha.terms() {
            let hp = w[0] as usize;
            for h2 in 0..self.s_len {
                let coeff = c * self.v(hp, dir, h2).value(*g);
                out.add_term(group.mul(*g, h), vec![h2 as u8], coeff);
            }
        }
        Ok(out)
    }

    /// `Ṽ_{ℓ_h} Y`: component vector `(Ṽ Y)(g) = V_h(g) · Y(gh)`.
    pub fn vtilde_transport_vf(
        &self,
        lattice: &GroupLattice,
        dir: usize,
        y: &VectorField,
    ) -> VectorField {
        let group = lattice.group();
        let h = lattice.s()[dir];
        let n = group.order();
        let comps = (0..self.s_len)
            .map(|h2| {
                ScalarFn::from_fn(n, |g| {
                    let gh = group.mul(g, h);
                    (0..self.s_len)
                        .map(|hp| self.v(h2, dir, hp).value(g) * y.component(hp).value(gh))
                        .sum()
                })
            })
            .collect();
        VectorField::from_components(comps)
    }

    /// `V̂_{ℓ_h} := Ṽ_{ℓ_{h⁻¹}}`, defined for symmetric lattices only.
    pub fn vhat_transport_vf(
        &self,
        lattice: &GroupLattice,
        dir: usize,
        y: &VectorField,
    ) -> Result<VectorField> {
        let group = lattice.group();
        if lattice.s().iter().any(|&h| lattice.s_index(group.inv(h)).is_none()) {
            return Err(Error::Invalid(
                "V-hat requires a symmetric lattice (S = S⁻¹)".into(),
            ));
        }
        let inv_dir = lattice
            .s_index(group.inv(lattice.s()[dir]))
            .expect("symmetric lattice");
        Ok(self.vtilde_transport_vf(lattice, inv_dir, y))
    }

    /// `U_h(g) = V_h(g)⁻¹` per direction and site; errors at the first
    /// singular matrix.
    pub fn u_matrices(&self, lattice: &GroupLattice) -> Result<Vec<Vec<CMat>>> {
        let group = lattice.group();
        (0..self.s_len)
            .map(|dir| {
                group
                    .elements()
                    .map(|g| {
                        self.v_matrix(dir, g).try_inverse().ok_or_else(|| {
                            Error::SingularTransport {
                                h: group.label(lattice.s()[dir]).to_string(),
                                site: group.label(g).to_string(),
                            }
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `𝒰_{ℓ_h} Y`: `(𝒰 Y)(g) = U_h(gh⁻¹) · Y(gh⁻¹)`.
    pub fn u_transport_vf(
        &self,
        lattice: &GroupLattice,
        dir: usize,
        y: &VectorField,
    ) -> Result<VectorField> {
        let u = self.u_matrices(lattice)?;
        let group = lattice.group();
        let h = lattice.s()[dir];
        let n = group.order();
        let comps = (0..self.s_len)
            .map(|h2| {
                ScalarFn::from_fn(n, |g| {
                    let src = group.mul(g, group.inv(h));
                    (0..self.s_len)
                        .map(|hp| u[dir][src][(h2, hp)] * y.component(hp).value(src))
                        .sum()
                })
            })
            .collect();
        Ok(VectorField::from_components(comps))
    }

    /// `∇_{ℓ_h} Y = Y − 𝒰_{ℓ_h} Y`.
    pub fn nabla_vf(
        &self,
        lattice: &GroupLattice,
        dir: usize,
        y: &VectorField,
    ) -> Result<VectorField> {
        Ok(y.sub(&self.u_transport_vf(lattice, dir, y)?))
    }

    /// `∇_{ℓ_h} α = α − 𝒱_{ℓ_h} α`.
    pub fn nabla_1form(&self, cal: &Calculus, dir: usize, alpha: &ScalarForm) -> Result<ScalarForm> {
        Ok(alpha.sub(&self.transport_1form(cal, dir, alpha)?))
    }

    /// Whether all `V_h(g)` are permutation matrices (a "discrete"
    /// connection: it maps discrete vector fields to discrete ones).
    pub fn is_discrete(&self, lattice: &GroupLattice, tol: f64) -> bool {
        lattice.group().elements().all(|g| {
            (0..self.s_len).all(|dir| {
                let m = self.v_matrix(dir, g);
                let zero_one = m
                    .iter()
                    .all(|c| (c.norm() < tol) || ((c - C_ONE).norm() < tol));
                let rows = (0..self.s_len).all(|i| {
                    ((0..self.s_len)
                        .map(|j| m[(i, j)])
                        .sum::<Complex64>()
                        - C_ONE)
                        .norm()
                        < tol
                });
                let cols = (0..self.s_len).all(|j| {
                    ((0..self.s_len)
                        .map(|i| m[(i, j)])
                        .sum::<Complex64>()
                        - C_ONE)
                        .norm()
                        < tol
                });
                zero_one && rows && cols
            })
        })
    }

    /// Torsion 2-forms
    /// `Θ^h = Σ (δ^h_{h₁} − δ^h_{h₁h₂} + V^h_{h₁,h₂}) θ^{h₁}θ^{h₂}`.
    pub fn torsion(&self, cal: &Calculus) -> Vec<ScalarForm> {
        let lattice = cal.lattice();
        let group = cal.group();
        (0..self.s_len)
            .map(|upper| {
                let mut out = Form::zero(2);
                for g in group.elements() {
                    for h1 in 0..self.s_len {
                        for h2 in 0..self.s_len {
                            let mut c = *self.v(upper, h1, h2).value(g);
                            if upper == h1 {
                                c += C_ONE;
                            }
                            let product = group.mul(lattice.s()[h1], lattice.s()[h2]);
                            if lattice.s_index(product) == Some(upper) {
                                c -= C_ONE;
                            }
                            out.add_term(g, vec![h1 as u8, h2 as u8], c);
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Per-polygon torsion residuals; all vanish iff the connection is
    /// torsion free.
    pub fn torsion_report(&self, cal: &Calculus) -> TorsionReport {
        let lattice = cal.lattice();
        let group = cal.group();
        let polygons = lattice.polygons();
        let max_over = |h1: usize, h2: usize, expect: &dyn Fn(usize) -> Complex64| -> f64 {
            let mut worst: f64 = 0.0;
            for upper in 0..self.s_len {
                for g in group.elements() {
                    let r = (self.v(upper, h1, h2).value(g) - expect(upper)).norm();
                    worst = worst.max(r);
                }
            }
            worst
        };
        let mut biangle = Vec::new();
        for &(i, j) in &polygons.biangles {
            let mut oriented = vec![(i, j)];
            if i != j {
                oriented.push((j, i));
            }
            for (a, b) in oriented {
                // biangle-free ⇔ V^h_{h₁,h₂} = −δ^h_{h₁}
                let residual = max_over(a, b, &|upper| {
                    if upper == a {
                        -C_ONE
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                biangle.push(((a, b), residual));
            }
        }
        let mut triangle = Vec::new();
        for &(h0, i, j) in &polygons.triangles {
            // triangle-free ⇔ V^h_{h₁,h₂} = δ^h_{h₀} − δ^h_{h₁}
            let residual = max_over(i, j, &|upper| {
                let mut c = Complex64::new(0.0, 0.0);
                if upper == h0 {
                    c += C_ONE;
                }
                if upper == i {
                    c -= C_ONE;
                }
                c
            });
            triangle.push(((h0, i, j), residual));
        }
        let mut quadrangle = Vec::new();
        for (class, pairs) in &polygons.quadrangles {
            // quadrangle-free ⇔ V^h_{h₁,h₂} − V^h_{ĥ₁,ĥ₂} = δ^h_{ĥ₁} − δ^h_{h₁}
            let mut worst: f64 = 0.0;
            for &(h1, h2) in pairs {
                for &(k1, k2) in pairs {
                    for upper in 0..self.s_len {
                        for g in group.elements() {
                            let mut expect = Complex64::new(0.0, 0.0);
                            if upper == k1 {
                                expect += C_ONE;
                            }
                            if upper == h1 {
                                expect -= C_ONE;
                            }
                            let diff = self.v(upper, h1, h2).value(g)
                                - self.v(upper, k1, k2).value(g);
                            worst = worst.max((diff - expect).norm());
                        }
                    }
                }
            }
            quadrangle.push((*class, worst));
        }
        TorsionReport {
            biangle,
            triangle,
            quadrangle,
        }
    }

    pub fn is_torsion_free(&self, cal: &Calculus) -> Result<bool> {
        let report = self.torsion_report(cal);
        let by_parts = report.max_residual() <= cal.tol();
        // cross-check: every Θ^h ≡ 0 modulo relations
        let zero = Form::zero(2);
        for theta_h in self.torsion(cal) {
            if cal.forms_equal(&theta_h, &zero)? != by_parts {
                return Err(Error::Invalid(
                    "torsion parts and torsion 2-forms disagree".into(),
                ));
            }
        }
        Ok(by_parts)
    }

    /// Curvature components `ℛ^h_{h'} ∈ Ω²` with
    /// `ℛ(θ^h) = Σ ℛ^h_{h'} ⊗ θ^{h'}`, by the direct expansion
    /// `−Δᵉ δ^h_{h'} − Σ V^h_{h₁,h'} Δ(θ^{h₁})
    ///  + Σ V^h_{h₁,h₃}(R*_{h₁}V^{h₃}_{h₂,h'}) θ^{h₁}θ^{h₂}`.
    pub fn curvature(&self, cal: &Calculus) -> Vec<Vec<ScalarForm>> {
        let group = cal.group();
        let lattice = cal.lattice();
        (0..self.s_len)
            .map(|upper| {
                (0..self.s_len)
                    .map(|lo2| {
                        let mut out = Form::zero(2);
                        if upper == lo2 {
                            out = out.sub(&cal.delta_e());
                        }
                        for h1 in 0..self.s_len {
                            let dtheta = cal.delta(&cal.theta_h(h1));
                            out = out.sub(&dtheta.mul_fn_left(self.v(upper, h1, lo2)));
                        }
                        for h1 in 0..self.s_len {
                            let s1 = lattice.s()[h1];
                            for h2 in 0..self.s_len {
                                for h3 in 0..self.s_len {
                                    for g in group.elements() {
                                        let c = self.v(upper, h1, h3).value(g)
                                            * self.v(h3, h2, lo2).value(group.mul(g, s1));
                                        out.add_term(g, vec![h1 as u8, h2 as u8], c);
                                    }
                                }
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    }

    /// Covariant derivative on `Ω^r ⊗ Ω¹` elements written as coefficient
    /// forms per `θ^{h'}`: `∇T_k = dω_k + (−1)^r (ω_k θ − Σ_{h'} ω_{h'} V^{h'}_k)`.
    pub fn nabla_tensor(&self, cal: &Calculus, t: &[ScalarForm], grade: usize) -> Vec<ScalarForm> {
        let sign = Complex64::new(if grade % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        (0..self.s_len)
            .map(|k| {
                let mut out = cal.d(&t[k]);
                out = out.add(&cal.mul(&t[k], &cal.theta()).scale(sign));
                for hp in 0..self.s_len {
                    let term = cal.mul(&t[hp], &self.v_form(cal, hp, k));
                    out = out.sub(&term.scale(sign));
                }
                out
            })
            .collect()
    }

    /// `V` as JSON: `{h': {site: matrix over (h, h'')}}`.
    pub fn v_to_json(&self, cal: &Calculus) -> Value {
        let lattice = cal.lattice();
        let group = cal.group();
        let per_direction: serde_json::Map<String, Value> = (0..self.s_len)
            .map(|lo1| {
                let per_site: serde_json::Map<String, Value> = group
                    .elements()
                    .map(|g| {
                        let m = self.v_matrix(lo1, g);
                        (
                            group.label(g).to_string(),
                            crate::algebra::matrix_to_json(&m),
                        )
                    })
                    .collect();
                (
                    group.label(lattice.s()[lo1]).to_string(),
                    Value::Object(per_site),
                )
            })
            .collect();
        Value::Object(per_direction)
    }

    pub fn torsion_report_json(&self, cal: &Calculus) -> Value {
        let lattice = cal.lattice();
        let group = cal.group();
        let report = self.torsion_report(cal);
        let label = |pos: usize| group.label(lattice.s()[pos]).to_string();
        json!({
            "biangle": report
                .biangle
                .iter()
                .map(|((i, j), r)| json!({"pair": [label(*i), label(*j)], "residual": r}))
                .collect::<Vec<_>>(),
            "triangle": report
                .triangle
                .iter()
                .map(|((h0, i, j), r)| {
                    json!({"head": label(*h0), "pair": [label(*i), label(*j)], "residual": r})
                })
                .collect::<Vec<_>>(),
            "quadrangle": report
                .quadrangle
                .iter()
                .map(|(g, r)| json!({"class": group.label(*g), "residual": r}))
                .collect::<Vec<_>>(),
            "torsion_free": report.max_residual() <= cal.tol(),
        })
    }
}

/// Residual norms of the torsion conditions, per polygon.
#[derive(Debug, Clone)]
pub struct TorsionReport {
    pub biangle: Vec<((usize, usize), f64)>,
    pub triangle: Vec<((usize, usize, usize), f64)>,
    pub quadrangle: Vec<(Elem, f64)>,
}

impl TorsionReport {
    pub fn max_residual(&self) -> f64 {
        let b = self.biangle.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        let t = self.triangle.iter().map(|(_, r)| *r).fold(b, f64::max);
        self.quadrangle.iter().map(|(_, r)| *r).fold(t, f64::max)
    }
}

/// First Bianchi residual:
/// `Θ^h θ + Δ(Θ^h) − Σ V^h_{h'} Θ^{h'} + π ℛ(θ^h)` modulo relations.
pub fn first_bianchi_residual(cal: &Calculus, conn: &LinearConnection) -> Result<f64> {
    let torsion = conn.torsion(cal);
    let curvature = conn.curvature(cal);
    let theta = cal.theta();
    let s_len = cal.lattice().s_len();
    let mut worst: f64 = 0.0;
    for upper in 0..s_len {
        let mut lhs = cal.mul(&torsion[upper], &theta);
        lhs = lhs.add(&cal.delta(&torsion[upper]));
        for hp in 0..s_len {
            lhs = lhs.sub(&cal.mul(&conn.v_form(cal, upper, hp), &torsion[hp]));
        }
        // π ℛ(θ^h) = Σ ℛ^h_{h'} θ^{h'}
        let mut pi_r = Form::zero(3);
        for hp in 0..s_len {
            pi_r = pi_r.add(&cal.mul(&curvature[upper][hp], &cal.theta_h(hp)));
        }
        worst = worst.max(cal.residual(&lhs, &pi_r.neg())?);
    }
    Ok(worst)
}

/// Second Bianchi residual:
/// `Δ(ℛ^h_{h'}) − Σ (V^h_{h''} ℛ^{h''}_{h'} − ℛ^h_{h''} V^{h''}_{h'})`.
pub fn second_bianchi_residual(cal: &Calculus, conn: &LinearConnection) -> Result<f64> {
    let curvature = conn.curvature(cal);
    let s_len = cal.lattice().s_len();
    let mut worst: f64 = 0.0;
    for upper in 0..s_len {
        for lo in 0..s_len {
            let lhs = cal.delta(&curvature[upper][lo]);
            let mut rhs = Form::zero(3);
            for mid in 0..s_len {
                rhs = rhs.add(&cal.mul(&conn.v_form(cal, upper, mid), &curvature[mid][lo]));
                rhs = rhs.sub(&cal.mul(&curvature[upper][mid], &conn.v_form(cal, mid, lo)));
            }
            worst = worst.max(cal.residual(&lhs, &rhs)?);
        }
    }
    Ok(worst)
}
