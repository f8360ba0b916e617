//! The algebra of functions on `G` and its difference operators.
//!
//! Functions are complex valued (scalar or square-matrix valued) with the
//! indicator basis `e^g`. Right and left translations act by pullback,
//! `(R*_g f)(x) = f(xg)` and `(L*_g f)(x) = f(gx)`, and `ℓ_h = R*_h − I`
//! is the forward difference along an arrow.

use crate::group::{Elem, GroupTable};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

/// Square complex matrix used for matrix-valued functions and forms.
pub type CMat = DMatrix<Complex64>;

/// Coefficient ring shared by functions and forms: complex numbers or
/// square complex matrices.
pub trait Coefficient: Clone + std::fmt::Debug + PartialEq {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Noncommutative product; `self` is the left factor.
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, z: Complex64) -> Self;
    /// Hermitian conjugate (complex conjugation for scalars).
    fn adjoint(&self) -> Self;
    /// Frobenius norm.
    fn norm(&self) -> f64;
    /// Multiplicative unit of the same shape.
    fn one_like(&self) -> Self;
    fn zero_like(&self) -> Self;
}

impl Coefficient for Complex64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, z: Complex64) -> Self {
        self * z
    }
    fn adjoint(&self) -> Self {
        self.conj()
    }
    fn norm(&self) -> f64 {
        num_complex::Complex::norm(*self)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
}

impl Coefficient for CMat {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, z: Complex64) -> Self {
        self * z
    }
    fn adjoint(&self) -> Self {
        CMat::adjoint(self)
    }
    fn norm(&self) -> f64 {
        nalgebra::Matrix::norm(self)
    }
    fn one_like(&self) -> Self {
        CMat::identity(self.nrows(), self.ncols())
    }
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
}

/// Which translation a pullback follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An element of the function algebra: one coefficient per site.
#[derive(Debug, Clone, PartialEq)]
pub struct Function<C> {
    values: Vec<C>,
}

/// Scalar complex function on `G`.
pub type ScalarFn = Function<Complex64>;
/// Matrix valued function on `G`.
pub type MatrixFn = Function<CMat>;

impl<C: Coefficient> Function<C> {
    pub fn from_values(values: Vec<C>) -> Self {
        Function { values }
    }

    pub fn from_fn(n: usize, f: impl FnMut(Elem) -> C) -> Self {
        Function {
            values: (0..n).map(f).collect(),
        }
    }

    #[inline]
    pub fn value(&self, g: Elem) -> &C {
        &self.values[g]
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    /// Pointwise product; `self` provides the left factors.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map(|a| a.scale(z))
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint())
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        Function {
            values: self.values.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        assert_eq!(self.len(), other.len(), "functions on different groups");
        Function {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// `(R*_g f)(x) = f(xg)` or `(L*_g f)(x) = f(gx)`.
    pub fn pullback(&self, group: &GroupTable, side: Side, g: Elem) -> Self {
        Function {
            values: group
                .elements()
                .map(|x| {
                    let src = match side {
                        Side::Right => group.mul(x, g),
                        Side::Left => group.mul(g, x),
                    };
                    self.values[src].clone()
                })
                .collect(),
        }
    }

    /// Pullback along an arbitrary site map: `(φ* f)(x) = f(φ(x))`.
    pub fn pullback_map(&self, phi: &crate::lattice::SiteMap) -> Self {
        Function {
            values: (0..self.len())
                .map(|x| self.values[phi.apply(x)].clone())
                .collect(),
        }
    }

    /// Forward difference `ℓ_h f = R*_h f − f`.
    pub fn ell(&self, group: &GroupTable, h: Elem) -> Self {
        self.pullback(group, Side::Right, h).sub(self)
    }

    /// Backward difference `ℓ̄_h f = f − R*_{h⁻¹} f`.
    pub fn bar_ell(&self, group: &GroupTable, h: Elem) -> Self {
        self.sub(&self.pullback(group, Side::Right, group.inv(h)))
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl ScalarFn {
    /// Indicator `e^g` on a group of order `n`.
    pub fn indicator(n: usize, g: Elem) -> Self {
        Self::from_fn(n, |x| {
            if x == g {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Indicator of a subset, `e^K = Σ_{g∈K} e^g`.
    pub fn indicator_set(n: usize, set: &[Elem]) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for &g in set {
            values[g] = Complex64::new(1.0, 0.0);
        }
        Function { values }
    }

    pub fn one(n: usize) -> Self {
        Self::from_fn(n, |_| Complex64::new(1.0, 0.0))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_| Complex64::new(0.0, 0.0))
    }

    pub fn to_json(&self, group: &GroupTable) -> Value {
        let map: serde_json::Map<String, Value> = group
            .elements()
            .map(|g| {
                let v = self.values[g];
                (group.label(g).to_string(), json!([v.re, v.im]))
            })
            .collect();
        Value::Object(map)
    }
}

impl MatrixFn {
    pub fn identity(n: usize, m: usize) -> Self {
        Self::from_fn(n, |_| CMat::identity(m, m))
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::from_fn(n, |_| CMat::zeros(m, m))
    }

    pub fn dim(&self) -> usize {
        self.values.first().map(|m| m.nrows()).unwrap_or(0)
    }

    pub fn to_json(&self, group: &GroupTable) -> Value {
        let map: serde_json::Map<String, Value> = group
            .elements()
            .map(|g| (group.label(g).to_string(), matrix_to_json(&self.values[g])))
            .collect();
        Value::Object(map)
    }
}

pub fn matrix_to_json(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols())
                .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            json!(row)
        })
        .collect();
    json!(rows)
}

pub fn matrix_from_json(v: &Value) -> Option<CMat> {
    let rows = v.as_array()?;
    let nrows = rows.len();
    let ncols = rows.first()?.as_array()?.len();
    let mut m = CMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array()?;
        if row.len() != ncols {
            return None;
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry.as_array()?;
            m[(i, j)] = Complex64::new(pair.first()?.as_f64()?, pair.get(1)?.as_f64()?);
        }
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec};
    use proptest::prelude::*;

    fn z4() -> GroupTable {
        build_group(&GroupSpec::Cyclic(4)).unwrap()
    }

    #[test]
    fn indicator_basis_identities() {
        let g = z4();
        let n = g.order();
        for a in g.elements() {
            for b in g.elements() {
                let prod = ScalarFn::indicator(n, a).mul(&ScalarFn::indicator(n, b));
                let expect = if a == b {
                    ScalarFn::indicator(n, a)
                } else {
                    ScalarFn::zero(n)
                };
                assert_eq!(prod, expect);
            }
        }
        let sum = g
            .elements()
            .map(|a| ScalarFn::indicator(n, a))
            .fold(ScalarFn::zero(n), |acc, f| acc.add(&f));
        assert_eq!(sum, ScalarFn::one(n));
    }

    #[test]
    fn pullback_of_indicators() {
        let g = z4();
        let n = g.order();
        // R*_g e^{g'} = e^{g' g^{-1}}
        for a in g.elements() {
            for b in g.elements() {
                let lhs = ScalarFn::indicator(n, b).pullback(&g, Side::Right, a);
                let rhs = ScalarFn::indicator(n, g.mul(b, g.inv(a)));
                assert_eq!(lhs, rhs);
            }
        }
        // R*_1 e^0 = e^3
        assert_eq!(
            ScalarFn::indicator(n, 0).pullback(&g, Side::Right, 1),
            ScalarFn::indicator(n, 3)
        );
        // R*_e f = f
        let f = ScalarFn::from_fn(n, |x| Complex64::new(x as f64, 1.0));
        assert_eq!(f.pullback(&g, Side::Right, g.identity()), f);
    }

    #[test]
    fn ell_examples() {
        let g = z4();
        let n = g.order();
        assert_eq!(ScalarFn::one(n).ell(&g, 1), ScalarFn::zero(n));
        // ℓ_h e^g = e^{gh⁻¹} − e^g
        for a in g.elements() {
            for h in 1..n {
                let lhs = ScalarFn::indicator(n, a).ell(&g, h);
                let rhs = ScalarFn::indicator(n, g.mul(a, g.inv(h)))
                    .sub(&ScalarFn::indicator(n, a));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn telescoping_sum_over_cyclic_group() {
        // Σ_g (ℓ_1 f)(g) = 0 for every f on Z_m
        for m in [3usize, 5, 7] {
            let g = build_group(&GroupSpec::Cyclic(m as u32)).unwrap();
            let f = ScalarFn::from_fn(m, |x| Complex64::new((x * x) as f64, x as f64));
            let total: Complex64 = f.ell(&g, 1).values().iter().sum();
            assert!(total.norm() < 1e-12);
        }
    }

    #[test]
    fn pullback_composition_orientation() {
        // R*_g ∘ R*_{g'} = R*_{g g'} (checked on a nonabelian group)
        let g = build_group(&GroupSpec::Symmetric(3)).unwrap();
        let n = g.order();
        let f = ScalarFn::from_fn(n, |x| Complex64::new((x * 2 + 1) as f64, x as f64));
        for a in g.elements() {
            for b in g.elements() {
                let lhs = f.pullback(&g, Side::Right, b).pullback(&g, Side::Right, a);
                let rhs = f.pullback(&g, Side::Right, g.mul(a, b));
                assert_eq!(lhs, rhs);
            }
        }
    }

    proptest! {
        #[test]
        fn modified_leibniz_rule(vals in proptest::collection::vec(-5.0f64..5.0, 12)) {
            let g = build_group(&GroupSpec::Symmetric(3)).unwrap();
            let n = g.order();
            let f = ScalarFn::from_fn(n, |x| Complex64::new(vals[x], vals[x + n] * 0.5));
            let f2 = ScalarFn::from_fn(n, |x| Complex64::new(vals[x + n], -vals[x]));
            for h in 1..n {
                // ℓ_h(ff') = (ℓ_h f)(R*_h f') + f (ℓ_h f')
                let lhs = f.mul(&f2).ell(&g, h);
                let rhs = f
                    .ell(&g, h)
                    .mul(&f2.pullback(&g, Side::Right, h))
                    .add(&f.mul(&f2.ell(&g, h)));
                prop_assert!(lhs.sub(&rhs).norm_inf() < 1e-12);
            }
        }

        #[test]
        fn pullbacks_are_homomorphisms(vals in proptest::collection::vec(-3.0f64..3.0, 12)) {
            let g = build_group(&GroupSpec::Symmetric(3)).unwrap();
            let n = g.order();
            let f = ScalarFn::from_fn(n, |x| Complex64::new(vals[x], vals[x + n]));
            let f2 = ScalarFn::from_fn(n, |x| Complex64::new(vals[x + n], vals[x]));
            for a in g.elements() {
                let lhs = f.mul(&f2).pullback(&g, Side::Right, a);
                let rhs = f
                    .pullback(&g, Side::Right, a)
                    .mul(&f2.pullback(&g, Side::Right, a));
                prop_assert!(lhs.sub(&rhs).norm_inf() < 1e-12);
            }
        }
    }
}
