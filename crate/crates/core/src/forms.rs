//! The graded differential calculus of a group lattice.
//!
//! A form of grade `r` is a sum `Σ c(g, w) e^g θ^{w₁}…θ^{w_r}` over sites
//! `g` and words `w` in `S`; all function factors are kept on the left via
//! the commutation rule `θ^h f = (R*_h f) θ^h`. Grades ≥ 2 are understood
//! modulo the 2-form relations `Σ_{hh' = g̃} θ^h θ^{h'} = 0` for
//! `g̃ ∉ Sₑ`, embedded at every word position; equality and normal forms
//! project onto the orthogonal complement of that relation span, site by
//! site.

use crate::algebra::{Coefficient, ScalarFn};
use crate::group::{Elem, GroupTable};
use crate::lattice::{GroupLattice, SiteMap};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

/// A word in `S`, stored as positions into the ordered set `S`.
pub type Word = Vec<u8>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const DROP_EPS: f64 = 1e-13;

/// A differential form with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<C> {
    grade: usize,
    terms: BTreeMap<(Elem, Word), C>,
}

/// Scalar-coefficient form.
pub type ScalarForm = Form<Complex64>;
/// Matrix-coefficient form (gauge theory).
pub type MatrixForm = Form<crate::algebra::CMat>;

impl<C: Coefficient> Form<C> {
    pub fn zero(grade: usize) -> Self {
        Form {
            grade,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(site: Elem, word: Word, coeff: C) -> Self {
        let mut f = Form::zero(word.len());
        f.add_term(site, word, coeff);
        f
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Elem, Word), &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero_exact(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, site: Elem, word: &[u8]) -> Option<&C> {
        self.terms.get(&(site, word.to_vec()))
    }

    pub fn add_term(&mut self, site: Elem, word: Word, coeff: C) {
        debug_assert_eq!(word.len(), self.grade);
        match self.terms.entry((site, word)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if coeff.norm() != 0.0 {
                    e.insert(coeff);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.norm() == 0.0 {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grade, other.grade, "grade mismatch in add");
        let mut out = self.clone();
        for ((g, w), c) in &other.terms {
            out.add_term(*g, w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map(|c| c.scale(z))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        Form {
            grade: self.grade,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), f(c)))
                .collect(),
        }
    }

    /// Largest coefficient norm.
    pub fn max_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Left multiplication by a function: `f · ω`.
    pub fn mul_fn_left(&self, f: &crate::algebra::Function<C>) -> Self {
        let mut out = Form::zero(self.grade);
        for ((g, w), c) in &self.terms {
            out.add_term(*g, w.clone(), f.value(*g).mul(c));
        }
        out
    }

    fn prune(mut self, eps: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > eps);
        self
    }
}

impl ScalarForm {
    /// Grade-0 form from a scalar function (dense).
    pub fn from_function(f: &ScalarFn) -> Self {
        let mut out = Form::zero(0);
        for (g, v) in f.values().iter().enumerate() {
            out.add_term(g, Vec::new(), *v);
        }
        out
    }

    /// Grade-0 form back to a dense function on a group of order `n`.
    pub fn to_function(&self, n: usize) -> ScalarFn {
        assert_eq!(self.grade, 0);
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for ((g, _), c) in &self.terms {
            values[*g] = *c;
        }
        ScalarFn::from_values(values)
    }

    pub fn to_json(&self, lattice: &GroupLattice) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((g, w), c)| {
                json!({
                    "site": lattice.group().label(*g),
                    "word": w
                        .iter()
                        .map(|&i| lattice.group().label(lattice.s()[i as usize]))
                        .collect::<Vec<_>>(),
                    "coeff": [c.re, c.im],
                })
            })
            .collect();
        json!({ "grade": self.grade, "terms": terms })
    }
}

/// Orthonormal basis of the per-site relation span at one grade.
struct RelationBasis {
    /// `|S|^r × rank`, orthonormal columns; empty when there are no relations.
    q: DMatrix<f64>,
    /// Rows with any nonzero entry.
    support: Vec<usize>,
}

impl RelationBasis {
    fn rank(&self) -> usize {
        self.q.ncols()
    }
}

/// Outcome of solving `df = α`.
#[derive(Debug, Clone)]
pub enum Exactness {
    Exact(ScalarFn),
    NotExact {
        site: Elem,
        direction: Elem,
        residual: f64,
    },
}

/// The 2-form split into biangle, triangle and quadrangle parts.
#[derive(Debug, Clone)]
pub struct Decomposition2<C> {
    /// `p₍e₎ψ`: words with `h h' = e`.
    pub biangle: Form<C>,
    /// `p₍h₎ψ` per `h ∈ S₁`.
    pub triangles: Vec<(Elem, Form<C>)>,
    /// `p₍g₎ψ` per `g ∈ S₂`, raw representative coefficients.
    pub quad_raw: Vec<(Elem, Form<C>)>,
    /// Gauge-invariant quadrangle components `ψ₍g₎ h,h'` per class, keyed
    /// by `(site, (h-pos, h'-pos))`.
    pub quad_components: Vec<(Elem, BTreeMap<(Elem, (u8, u8)), C>)>,
}

/// Differential calculus context: the lattice plus cached relation data.
pub struct Calculus {
    lattice: GroupLattice,
    tol: f64,
    grade_cap: usize,
    rel: Vec<OnceLock<RelationBasis>>,
    /// Per position `k` in `S`: all `(a, b)` with `s[a] s[b] = s[k]`.
    triangle_pairs: Vec<Vec<(u8, u8)>>,
    /// Per class `g ∈ S₂`: all `(a, b)` with `s[a] s[b] = g`.
    class_pairs: Vec<(Elem, Vec<(u8, u8)>)>,
}

impl Calculus {
    pub fn new(lattice: GroupLattice) -> Self {
        Self::with_options(lattice, 1e-9, 4)
    }

    pub fn with_options(lattice: GroupLattice, tol: f64, grade_cap: usize) -> Self {
        let s_len = lattice.s_len();
        let group = lattice.group();
        let mut triangle_pairs = vec![Vec::new(); s_len];
        for (i, &a) in lattice.s().iter().enumerate() {
            for (j, &b) in lattice.s().iter().enumerate() {
                if let Some(k) = lattice.s_index(group.mul(a, b)) {
                    triangle_pairs[k].push((i as u8, j as u8));
                }
            }
        }
        let class_pairs = lattice
            .s2()
            .iter()
            .map(|&g| {
                let pairs = lattice
                    .s()
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &a)| {
                        lattice.s().iter().enumerate().filter_map(move |(j, &b)| {
                            (group.mul(a, b) == g).then_some((i as u8, j as u8))
                        })
                    })
                    .collect();
                (g, pairs)
            })
            .collect();
        let rel = (0..=grade_cap).map(|_| OnceLock::new()).collect();
        Calculus {
            lattice,
            tol,
            grade_cap,
            rel,
            triangle_pairs,
            class_pairs,
        }
    }

    pub fn lattice(&self) -> &GroupLattice {
        &self.lattice
    }

    pub fn group(&self) -> &GroupTable {
        self.lattice.group()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn grade_cap(&self) -> usize {
        self.grade_cap
    }

    fn s_len(&self) -> usize {
        self.lattice.s_len()
    }

    /// Group element of an `S`-position.
    fn s_elem(&self, pos: u8) -> Elem {
        self.lattice.s()[pos as usize]
    }

    /// Product of the letters of a word.
    pub fn word_product(&self, w: &[u8]) -> Elem {
        w.iter().fold(self.group().identity(), |acc, &i| {
            self.group().mul(acc, self.s_elem(i))
        })
    }

    // ---- constructors ------------------------------------------------

    /// The 1-form `θ^h` for the `S`-position `pos`.
    pub fn theta_h(&self, pos: usize) -> ScalarForm {
        let mut f = Form::zero(1);
        for g in self.group().elements() {
            f.add_term(g, vec![pos as u8], ONE);
        }
        f
    }

    /// `θ = Σ_h θ^h`, with unit coefficient `unit` (pass `1` or `I_m`).
    pub fn theta_with<C: Coefficient>(&self, unit: &C) -> Form<C> {
        let mut f = Form::zero(1);
        for g in self.group().elements() {
            for i in 0..self.s_len() {
                f.add_term(g, vec![i as u8], unit.clone());
            }
        }
        f
    }

    pub fn theta(&self) -> ScalarForm {
        self.theta_with(&ONE)
    }

    /// `Δᵉ = Σ_{h∈S₀} θ^h θ^{h⁻¹}`.
    pub fn delta_e_with<C: Coefficient>(&self, unit: &C) -> Form<C> {
        let mut f = Form::zero(2);
        for &h in self.lattice.s0() {
            let i = self.lattice.s_index(h).unwrap() as u8;
            let j = self.lattice.s_index(self.group().inv(h)).unwrap() as u8;
            for g in self.group().elements() {
                f.add_term(g, vec![i, j], unit.clone());
            }
        }
        f
    }

    pub fn delta_e(&self) -> ScalarForm {
        self.delta_e_with(&ONE)
    }

    /// The constant grade-0 form `𝟙` (unit coefficient at every site).
    pub fn one_with<C: Coefficient>(&self, unit: &C) -> Form<C> {
        let mut f = Form::zero(0);
        for g in self.group().elements() {
            f.add_term(g, Vec::new(), unit.clone());
        }
        f
    }

    // ---- ring structure ------------------------------------------------

    /// Product of forms. On monomials `(e^g θ^w)(e^{g'} θ^{w'})` is nonzero
    /// iff `g' = g · w₁⋯w_r`, giving `e^g θ^{w w'}`.
    pub fn mul<C: Coefficient>(&self, a: &Form<C>, b: &Form<C>) -> Form<C> {
        let mut by_site: HashMap<Elem, Vec<(&Word, &C)>> = HashMap::new();
        for ((g, w), c) in &b.terms {
            by_site.entry(*g).or_default().push((w, c));
        }
        let mut out = Form::zero(a.grade + b.grade);
        for ((g, w), c) in &a.terms {
            let target = self.group().mul(*g, self.word_product(w));
            if let Some(rights) = by_site.get(&target) {
                for (w2, c2) in rights {
                    let mut word = w.clone();
                    word.extend_from_slice(w2);
                    out.add_term(*g, word, c.mul(c2));
                }
            }
        }
        out
    }

    /// The bimodule morphism `Δ`: `Δ(θ^h) = Σ_{h'h''=h} θ^{h'} θ^{h''}`,
    /// extended as a graded derivation with `Δ(f) = 0`.
    pub fn delta<C: Coefficient>(&self, a: &Form<C>) -> Form<C> {
        let mut out = Form::zero(a.grade + 1);
        for ((g, w), c) in &a.terms {
            for (i, &letter) in w.iter().enumerate() {
                let signed = if i % 2 == 0 { c.clone() } else { c.neg() };
                for &(x, y) in &self.triangle_pairs[letter as usize] {
                    let mut word = Vec::with_capacity(w.len() + 1);
                    word.extend_from_slice(&w[..i]);
                    word.push(x);
                    word.push(y);
                    word.extend_from_slice(&w[i + 1..]);
                    out.add_term(*g, word, signed.clone());
                }
            }
        }
        out
    }

    /// Exterior derivative `dω = [θ, ω] − Δ(ω)` (graded commutator).
    pub fn d<C: Coefficient>(&self, a: &Form<C>) -> Form<C> {
        let unit = match a.terms.values().next() {
            Some(c) => c.one_like(),
            None => return Form::zero(a.grade + 1),
        };
        let theta = self.theta_with(&unit);
        let left = self.mul(&theta, a);
        let right = self.mul(a, &theta);
        let commutator = if a.grade % 2 == 0 {
            left.sub(&right)
        } else {
            left.add(&right)
        };
        commutator.sub(&self.delta(a))
    }

    /// `d` of the indicator `e^g`.
    pub fn d_indicator(&self, g: Elem) -> ScalarForm {
        let f = ScalarFn::indicator(self.group().order(), g);
        self.d(&ScalarForm::from_function(&f))
    }

    // ---- relation quotient ----------------------------------------------

    fn relation_basis(&self, grade: usize) -> Result<&RelationBasis> {
        if grade > self.grade_cap {
            return Err(Error::GradeCap(grade, self.grade_cap));
        }
        Ok(self.rel[grade].get_or_init(|| self.build_relation_basis(grade)))
    }

    fn build_relation_basis(&self, grade: usize) -> RelationBasis {
        let s_len = self.s_len();
        if grade < 2 || self.class_pairs.is_empty() {
            return RelationBasis {
                q: DMatrix::zeros(s_len.pow(grade as u32) as usize, 0),
                support: Vec::new(),
            };
        }
        let dim = s_len.pow(grade as u32);
        let mut generators: Vec<Vec<f64>> = Vec::new();
        for pos in 0..=(grade - 2) {
            for prefix in words(s_len, pos) {
                for (_, pairs) in &self.class_pairs {
                    for suffix in words(s_len, grade - 2 - pos) {
                        let mut gen = vec![0.0; dim];
                        for &(a, b) in pairs {
                            let mut w = Vec::with_capacity(grade);
                            w.extend_from_slice(&prefix);
                            w.push(a);
                            w.push(b);
                            w.extend_from_slice(&suffix);
                            gen[word_index(&w, s_len)] += 1.0;
                        }
                        generators.push(gen);
                    }
                }
            }
        }
        // modified Gram-Schmidt with drop tolerance
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for mut gen in generators {
            for col in &columns {
                let dot: f64 = col.iter().zip(&gen).map(|(a, b)| a * b).sum();
                for (g, c) in gen.iter_mut().zip(col) {
                    *g -= dot * c;
                }
            }
            let norm: f64 = gen.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                for x in gen.iter_mut() {
                    *x /= norm;
                }
                columns.push(gen);
            }
        }
        let rank = columns.len();
        let q = DMatrix::from_fn(dim, rank, |i, j| columns[j][i]);
        let support = (0..dim)
            .filter(|&i| (0..rank).any(|j| q[(i, j)].abs() > 1e-14))
            .collect();
        RelationBasis { q, support }
    }

    /// Dimension of the per-site relation span at the given grade.
    pub fn relation_rank(&self, grade: usize) -> Result<usize> {
        Ok(self.relation_basis(grade)?.rank())
    }

    /// Number of independent per-site 2-form words, `|S|² − |S₂|`.
    pub fn independent_2form_words(&self) -> usize {
        self.s_len() * self.s_len() - self.lattice.s2().len()
    }

    /// The global 2-form relation generators `Σ_{hh'=g̃} θ^h θ^{h'}`, one
    /// per `g̃ ∈ S₂`.
    pub fn relation_generators(&self) -> Vec<(Elem, ScalarForm)> {
        self.class_pairs
            .iter()
            .map(|(g, pairs)| {
                let mut f = Form::zero(2);
                for site in self.group().elements() {
                    for &(a, b) in pairs {
                        f.add_term(site, vec![a, b], ONE);
                    }
                }
                (*g, f)
            })
            .collect()
    }

    /// Canonical representative modulo the relation ideal: per site, the
    /// coefficient vector is projected onto the orthogonal complement of
    /// the relation span.
    pub fn normal_form<C: Coefficient>(&self, a: &Form<C>) -> Result<Form<C>> {
        if a.grade < 2 || a.terms.is_empty() {
            return Ok(a.clone().prune(DROP_EPS));
        }
        let basis = self.relation_basis(a.grade)?;
        if basis.rank() == 0 {
            return Ok(a.clone().prune(DROP_EPS));
        }
        let s_len = self.s_len();
        let mut by_site: BTreeMap<Elem, Vec<(&Word, &C)>> = BTreeMap::new();
        for ((g, w), c) in &a.terms {
            by_site.entry(*g).or_default().push((w, c));
        }
        let mut out = Form::zero(a.grade);
        for (site, entries) in by_site {
            let zero = entries[0].1.zero_like();
            // c_k = Σ_w q[w, k] · coeff(w)
            let mut comps: Vec<C> = vec![zero.clone(); basis.rank()];
            for (w, c) in &entries {
                let row = word_index(w, s_len);
                for (k, comp) in comps.iter_mut().enumerate() {
                    let q = basis.q[(row, k)];
                    if q != 0.0 {
                        *comp = comp.add(&c.scale(Complex64::new(q, 0.0)));
                    }
                }
            }
            // start from the original coefficients
            let mut dense: BTreeMap<usize, C> = entries
                .iter()
                .map(|(w, c)| (word_index(w, s_len), (*c).clone()))
                .collect();
            // subtract the projection
            for &row in &basis.support {
                let mut corr = zero.clone();
                for (k, comp) in comps.iter().enumerate() {
                    let q = basis.q[(row, k)];
                    if q != 0.0 {
                        corr = corr.add(&comp.scale(Complex64::new(q, 0.0)));
                    }
                }
                if corr.norm() != 0.0 {
                    let entry = dense.entry(row).or_insert_with(|| zero.clone());
                    *entry = entry.sub(&corr);
                }
            }
            for (row, c) in dense {
                if c.norm() > DROP_EPS {
                    out.add_term(site, word_from_index(row, s_len, a.grade), c);
                }
            }
        }
        Ok(out)
    }

    /// Equality modulo the relation ideal, at the calculus tolerance.
    pub fn forms_equal<C: Coefficient>(&self, a: &Form<C>, b: &Form<C>) -> Result<bool> {
        if a.grade != b.grade {
            return Err(Error::GradeMismatch(a.grade, b.grade));
        }
        Ok(self.normal_form(&a.sub(b))?.max_norm() <= self.tol)
    }

    /// Residual norm of `a − b` modulo relations.
    pub fn residual<C: Coefficient>(&self, a: &Form<C>, b: &Form<C>) -> Result<f64> {
        if a.grade != b.grade {
            return Err(Error::GradeMismatch(a.grade, b.grade));
        }
        Ok(self.normal_form(&a.sub(b))?.max_norm())
    }

    // ---- pullbacks -------------------------------------------------------

    /// `R*_g` on forms: `R*_g e^{g'} = e^{g'g⁻¹}`, `R*_g θ^h = θ^{ad(g)h}`.
    /// Defined when `R_g` is differentiable.
    pub fn r_pullback<C: Coefficient>(&self, g: Elem, a: &Form<C>) -> Result<Form<C>> {
        if !self.lattice.is_right_differentiable(g) {
            return Err(Error::NotDifferentiable(
                format!("R_{}", self.group().label(g)),
                "S is not ad-closed".into(),
            ));
        }
        let gi = self.group().inv(g);
        let mut out = Form::zero(a.grade);
        for ((site, w), c) in &a.terms {
            let new_site = self.group().mul(*site, gi);
            let new_word: Word = w
                .iter()
                .map(|&i| {
                    let image = self.group().conjugate(g, self.s_elem(i));
                    self.lattice.s_index(image).expect("ad-closure") as u8
                })
                .collect();
            out.add_term(new_site, new_word, c.clone());
        }
        Ok(out)
    }

    /// `L*_g` on forms: `L*_g e^{g'} = e^{g⁻¹g'}`, `L*_g θ^h = θ^h`.
    pub fn l_pullback<C: Coefficient>(&self, g: Elem, a: &Form<C>) -> Form<C> {
        let gi = self.group().inv(g);
        let mut out = Form::zero(a.grade);
        for ((site, w), c) in &a.terms {
            out.add_term(self.group().mul(gi, *site), w.clone(), c.clone());
        }
        out
    }

    /// Pullback of a form along a differentiable map, via the recursion
    /// `φ*(e^g θ^{w₁ w'}) = (e^{φ⁻¹{g}} d e^{φ⁻¹{g w₁}}) · φ*(e^{g w₁} θ^{w'})`.
    pub fn pullback(&self, phi: &SiteMap, a: &ScalarForm) -> Result<ScalarForm> {
        if let Some(&(g, gh)) = self.lattice.differentiability_witnesses(phi).first() {
            return Err(Error::NotDifferentiable(
                self.group().label(g).to_string(),
                self.group().label(gh).to_string(),
            ));
        }
        let pre = phi.preimages();
        let mut memo: HashMap<(Elem, Word), ScalarForm> = HashMap::new();
        let mut out = Form::zero(a.grade);
        for ((site, w), c) in &a.terms {
            let pulled = self.pull_monomial(*site, w, &pre, &mut memo);
            out = out.add(&pulled.scale(*c));
        }
        Ok(out)
    }

    fn pull_monomial(
        &self,
        site: Elem,
        word: &[u8],
        pre: &[Vec<Elem>],
        memo: &mut HashMap<(Elem, Word), ScalarForm>,
    ) -> ScalarForm {
        if let Some(f) = memo.get(&(site, word.to_vec())) {
            return f.clone();
        }
        let result = if word.is_empty() {
            let mut f = Form::zero(0);
            for &k in &pre[site] {
                f.add_term(k, Vec::new(), ONE);
            }
            f
        } else {
            let next_site = self.group().mul(site, self.s_elem(word[0]));
            // e^K d e^{K'} with K = φ⁻¹{site}, K' = φ⁻¹{next_site}
            let mut alpha = Form::zero(1);
            for &k in &pre[site] {
                for &k2 in &pre[next_site] {
                    if k == k2 {
                        for i in 0..self.s_len() {
                            alpha.add_term(k, vec![i as u8], -ONE);
                        }
                    } else if let Some(p) =
                        self.lattice.s_index(self.group().mul(self.group().inv(k), k2))
                    {
                        alpha.add_term(k, vec![p as u8], ONE);
                    }
                }
            }
            let rest = self.pull_monomial(next_site, &word[1..], pre, memo);
            self.mul(&alpha, &rest)
        };
        memo.insert((site, word.to_vec()), result.clone());
        result
    }

    // ---- 2-form structure --------------------------------------------

    /// Splits a 2-form into its biangle, triangle and quadrangle parts and
    /// computes the gauge-invariant quadrangle components
    /// `ψ₍g₎ h,h' = |g| ψ̌_{h,h'} − Σ_{ĥĥ'=g} ψ̌_{ĥ,ĥ'}`.
    pub fn decompose_2form<C: Coefficient>(&self, psi: &Form<C>) -> Result<Decomposition2<C>> {
        if psi.grade != 2 {
            return Err(Error::GradeMismatch(psi.grade, 2));
        }
        let mut biangle = Form::zero(2);
        let mut triangles: Vec<(Elem, Form<C>)> = self
            .lattice
            .s1()
            .iter()
            .map(|&h| (h, Form::zero(2)))
            .collect();
        let mut quad_raw: Vec<(Elem, Form<C>)> = self
            .lattice
            .s2()
            .iter()
            .map(|&g| (g, Form::zero(2)))
            .collect();
        for ((g, w), c) in &psi.terms {
            let p = self.word_product(w);
            if p == self.group().identity() {
                biangle.add_term(*g, w.clone(), c.clone());
            } else if self.lattice.s_index(p).is_some() {
                let slot = triangles.iter_mut().find(|(h, _)| *h == p).unwrap();
                slot.1.add_term(*g, w.clone(), c.clone());
            } else {
                let slot = quad_raw.iter_mut().find(|(k, _)| *k == p).unwrap();
                slot.1.add_term(*g, w.clone(), c.clone());
            }
        }
        let mut quad_components = Vec::new();
        for (class, raw) in &quad_raw {
            let pairs = &self
                .class_pairs
                .iter()
                .find(|(g, _)| g == class)
                .unwrap()
                .1;
            let mult = pairs.len() as f64;
            let mut sites: BTreeMap<Elem, Vec<(&Word, &C)>> = BTreeMap::new();
            for ((g, w), c) in &raw.terms {
                sites.entry(*g).or_default().push((w, c));
            }
            let mut comps: BTreeMap<(Elem, (u8, u8)), C> = BTreeMap::new();
            for (site, entries) in sites {
                let zero = entries[0].1.zero_like();
                let lookup = |pair: (u8, u8)| -> C {
                    entries
                        .iter()
                        .find(|(w, _)| w[0] == pair.0 && w[1] == pair.1)
                        .map(|(_, c)| (*c).clone())
                        .unwrap_or_else(|| zero.clone())
                };
                let total = pairs
                    .iter()
                    .fold(zero.clone(), |acc, &p| acc.add(&lookup(p)));
                for &p in pairs {
                    let comp = lookup(p)
                        .scale(Complex64::new(mult, 0.0))
                        .sub(&total);
                    comps.insert((site, p), comp);
                }
            }
            quad_components.push((*class, comps));
        }
        Ok(Decomposition2 {
            biangle,
            triangles,
            quad_raw,
            quad_components,
        })
    }

    // ---- braiding and wedge -----------------------------------------

    /// The bimodule braiding `σ(θ^{h₁} ⊗ θ^{h₂}) = θ^{ad(h₁)h₂} ⊗ θ^{h₁}`
    /// on grade-2 forms read as free tensors. Requires bicovariance.
    pub fn sigma<C: Coefficient>(&self, psi: &Form<C>) -> Result<Form<C>> {
        self.braid(psi, false)
    }

    /// Inverse braiding `σ⁻¹(θ^{h₁} ⊗ θ^{h₂}) = θ^{h₂} ⊗ θ^{ad(h₂⁻¹)h₁}`.
    pub fn sigma_inv<C: Coefficient>(&self, psi: &Form<C>) -> Result<Form<C>> {
        self.braid(psi, true)
    }

    fn braid<C: Coefficient>(&self, psi: &Form<C>, inverse: bool) -> Result<Form<C>> {
        if psi.grade != 2 {
            return Err(Error::GradeMismatch(psi.grade, 2));
        }
        if !self.lattice.is_bicovariant() {
            return Err(Error::NotBicovariant("S".into()));
        }
        let mut out = Form::zero(2);
        for ((g, w), c) in &psi.terms {
            let (a, b) = (w[0], w[1]);
            let word = if inverse {
                let image = self
                    .group()
                    .conjugate(self.group().inv(self.s_elem(b)), self.s_elem(a));
                vec![b, self.lattice.s_index(image).expect("ad-closure") as u8]
            } else {
                let image = self.group().conjugate(self.s_elem(a), self.s_elem(b));
                vec![self.lattice.s_index(image).expect("ad-closure") as u8, a]
            };
            out.add_term(*g, word, c.clone());
        }
        Ok(out)
    }

    /// Woronowicz wedge `α ∧ β = ½(id − σ)(α ⊗ β)` of two 1-forms; the
    /// result is a free 2-tensor.
    pub fn wedge<C: Coefficient>(&self, a: &Form<C>, b: &Form<C>) -> Result<Form<C>> {
        if a.grade != 1 || b.grade != 1 {
            return Err(Error::GradeMismatch(a.grade.max(b.grade), 1));
        }
        let t = self.mul(a, b);
        Ok(t.sub(&self.sigma(&t)?).scale(Complex64::new(0.5, 0.0)))
    }

    // ---- exactness and cohomology -------------------------------------

    /// Solves `ℓ_h f = α_h` for all `(g, h)`; the solution is pinned by
    /// `f = 0` at the least element of each connected component.
    pub fn solve_exact(&self, alpha: &ScalarForm) -> Result<Exactness> {
        if alpha.grade != 1 {
            return Err(Error::GradeMismatch(alpha.grade, 1));
        }
        let group = self.group();
        let n = group.order();
        let coeff = |g: Elem, pos: usize| -> Complex64 {
            alpha
                .coeff(g, &[pos as u8])
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0))
        };
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        let mut assigned = vec![false; n];
        for component in self.lattice.connected_components() {
            let rep = component[0];
            f[rep] = Complex64::new(0.0, 0.0);
            assigned[rep] = true;
            let mut queue = vec![rep];
            let mut head = 0;
            while head < queue.len() {
                let g = queue[head];
                head += 1;
                for (pos, &h) in self.lattice.s().iter().enumerate() {
                    let fwd = group.mul(g, h);
                    if !assigned[fwd] {
                        f[fwd] = f[g] + coeff(g, pos);
                        assigned[fwd] = true;
                        queue.push(fwd);
                    }
                    let back = group.mul(g, group.inv(h));
                    if !assigned[back] {
                        f[back] = f[g] - coeff(back, pos);
                        assigned[back] = true;
                        queue.push(back);
                    }
                }
            }
        }
        for g in group.elements() {
            for (pos, &h) in self.lattice.s().iter().enumerate() {
                let residual = (f[group.mul(g, h)] - f[g] - coeff(g, pos)).norm();
                if residual > self.tol {
                    return Ok(Exactness::NotExact {
                        site: g,
                        direction: h,
                        residual,
                    });
                }
            }
        }
        Ok(Exactness::Exact(ScalarFn::from_values(f)))
    }

    /// `dim(closed 1-forms) − dim(exact 1-forms)` via rank computations on
    /// the projected `d` matrices.
    pub fn h1_dimension(&self) -> Result<usize> {
        let group = self.group();
        let n = group.order();
        let s_len = self.s_len();
        let dim2 = s_len * s_len;
        // d restricted to 1-forms, after projection modulo relations
        let cols1 = n * s_len;
        let mut d1 = DMatrix::<f64>::zeros(n * dim2, cols1);
        for g in group.elements() {
            for pos in 0..s_len {
                let basis_form = Form::monomial(g, vec![pos as u8], ONE);
                let image = self.normal_form(&self.d(&basis_form))?;
                let col = g * s_len + pos;
                for ((site, w), c) in &image.terms {
                    debug_assert!(c.im.abs() < 1e-12);
                    d1[(site * dim2 + word_index(w, s_len), col)] = c.re;
                }
            }
        }
        let rank1 = matrix_rank(&d1, 1e-7);
        let closed = cols1 - rank1;
        // d on functions
        let mut d0 = DMatrix::<f64>::zeros(cols1, n);
        for g in group.elements() {
            let image = self.d_indicator(g);
            for ((site, w), c) in &image.terms {
                d0[(site * s_len + w[0] as usize, g)] = c.re;
            }
        }
        let exact = matrix_rank(&d0, 1e-7);
        Ok(closed - exact)
    }
}

fn matrix_rank(m: &DMatrix<f64>, eps: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    svd.singular_values.iter().filter(|&&s| s > eps).count()
}

/// All words of the given length over `0..s_len`, lexicographic.
fn words(s_len: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * s_len);
        for w in &out {
            for i in 0..s_len {
                let mut w2 = w.clone();
                w2.push(i as u8);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

fn word_index(w: &[u8], s_len: usize) -> usize {
    w.iter().fold(0usize, |acc, &i| acc * s_len + i as usize)
}

fn word_from_index(mut idx: usize, s_len: usize, len: usize) -> Word {
    let mut w = vec![0u8; len];
    for slot in (0..len).rev() {
        w[slot] = (idx % s_len) as u8;
        idx /= s_len;
    }
    w
}
