//! Seeded invariant suites over a lattice calculus.
//!
//! Each suite draws deterministic random data from a ChaCha stream and
//! reports the worst residual seen, so the same seed reproduces the same
//! numbers bit for bit. Used by the `check` CLI command and by the
//! acceptance tests.


use crate::forms::{Calculus, Form, ScalarForm};
use crate::gauge::{matter_action, GaugeField, GaugeTransform, MatterField};
use crate::lattice::GroupLattice;
use crate::lincon::{first_bianchi_residual, second_bianchi_residual, LinearConnection};
use crate::vector_fields::{
    self, contract, enumerate_basic, enumerate_discrete_differentiable, invertibility_conditions,
    DiscreteVF,
};
use crate::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Result of one invariant suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Present when the suite does not apply to this lattice.
    pub skipped: Option<String>,
}

impl SuiteOutcome {
    fn passed(name: &str, trials: usize, max_residual: f64, tol: f64) -> Self {
        SuiteOutcome {
            name: name.to_string(),
            trials,
            max_residual,
            tol,
            pass: max_residual <= tol,
            skipped: None,
        }
    }

    fn skipped(name: &str, reason: String) -> Self {
        SuiteOutcome {
            name: name.to_string(),
            trials: 0,
            max_residual: 0.0,
            tol: 0.0,
            pass: true,
            skipped: Some(reason),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.skipped {
            Some(reason) => json!({
                "name": self.name,
                "skipped": reason,
                "pass": true,
            }),
            None => json!({
                "name": self.name,
                "trials": self.trials,
                "max_residual": self.max_residual,
                "tol": self.tol,
                "pass": self.pass,
            }),
        }
    }
}

/// Dense random form of the given grade, coefficients in the unit box.
pub fn random_form(cal: &Calculus, grade: usize, rng: &mut impl Rng) -> ScalarForm {
    let mut out = Form::zero(grade);
    let s_len = cal.lattice().s_len();
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..grade {
        words = words
            .iter()
            .flat_map(|w| {
                (0..s_len).map(move |i| {
                    let mut w2 = w.clone();
                    w2.push(i as u8);
                    w2
                })
            })
            .collect();
    }
    for g in cal.group().elements() {
        for w in &words {
            out.add_term(
                g,
                w.clone(),
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            );
        }
    }
    out
}

/// Random discrete field: `s(g)` uniform over `Sₑ`.
pub fn random_discrete(lattice: &GroupLattice, rng: &mut impl Rng) -> DiscreteVF {
    let e = lattice.group().identity();
    DiscreteVF::from_fn(lattice, |_| {
        let pick = rng.random_range(0..=lattice.s_len());
        if pick == 0 {
            e
        } else {
            lattice.s()[pick - 1]
        }
    })
    .expect("values lie in S ∪ {e}")
}

const ENUM_CAP: usize = 2_000_000;

/// Pool of basic fields with differentiable flow: exhaustive on small
/// lattices, otherwise the constant fields `ℓ_h` that qualify.
pub fn differentiable_basic_pool(lattice: &GroupLattice) -> Vec<DiscreteVF> {
    if let Ok(pool) = enumerate_basic(lattice, true, ENUM_CAP) {
        return pool;
    }
    lattice
        .s()
        .iter()
        .filter_map(|&h| {
            let x = DiscreteVF::constant(lattice, h).ok()?;
            x.is_flow_differentiable(lattice).then_some(x)
        })
        .collect()
}

/// Pool of discrete fields (rest allowed) with differentiable flow.
pub fn differentiable_discrete_pool(lattice: &GroupLattice) -> Vec<DiscreteVF> {
    if let Ok(pool) = enumerate_discrete_differentiable(lattice, ENUM_CAP) {
        return pool;
    }
    let mut pool = differentiable_basic_pool(lattice);
    if let Ok(zero) = DiscreteVF::constant(lattice, lattice.group().identity()) {
        pool.push(zero);
    }
    pool
}

/// `d ∘ d ≡ 0` on random forms of grade ≤ 2.
pub fn suite_d_squared(cal: &Calculus, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let grade = t % 3;
        let omega = random_form(cal, grade, &mut rng);
        let dd = cal.d(&cal.d(&omega));
        worst = worst.max(cal.normal_form(&dd)?.max_norm());
    }
    Ok(SuiteOutcome::passed("d_squared", trials, worst, cal.tol()))
}

/// `Δ²ω ≡ −[Δᵉ, ω]`, `Δ(Δᵉ) ≡ 0` and `θ² − Δ(θ) ≡ Δᵉ`.
pub fn suite_delta_rules(cal: &Calculus, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let de = cal.delta_e();
    let mut worst: f64 = cal.normal_form(&cal.delta(&de))?.max_norm();
    let theta = cal.theta();
    let structural = cal
        .mul(&theta, &theta)
        .sub(&cal.delta(&theta))
        .sub(&de);
    worst = worst.max(cal.normal_form(&structural)?.max_norm());
    for t in 0..trials {
        let grade = 1 + t % 2;
        let omega = random_form(cal, grade, &mut rng);
        let lhs = cal.delta(&cal.delta(&omega));
        // graded commutator with the even form Δᵉ
        let rhs = cal.mul(&de, &omega).sub(&cal.mul(&omega, &de)).neg();
        worst = worst.max(cal.residual(&lhs, &rhs)?);
    }
    Ok(SuiteOutcome::passed("delta_rules", trials, worst, cal.tol()))
}

/// Lie-Cartan `L_X ω ≡ X⌟dω + d(X⌟ω)` for basic `X` with differentiable
/// flow, and `X⌟X⌟ω ≡ 0` for discrete `X` with differentiable flow.
pub fn suite_lie_cartan(cal: &Calculus, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let lattice = cal.lattice();
    let basics = differentiable_basic_pool(lattice);
    if basics.is_empty() {
        return Ok(SuiteOutcome::skipped(
            "lie_cartan",
            "no basic field with differentiable flow".into(),
        ));
    }
    let discretes = differentiable_discrete_pool(lattice);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let grade = 1 + t % 2;
        let omega = random_form(cal, grade, &mut rng);
        let x = &basics[rng.random_range(0..basics.len())];
        let lie = vector_fields::lie_form(cal, x, &omega)?;
        let cartan = contract(cal, x, &cal.d(&omega))?.add(&cal.d(&contract(cal, x, &omega)?));
        worst = worst.max(cal.residual(&lie, &cartan)?);
        // X ⌟ X ⌟ ω for a discrete field with differentiable flow
        let y = &discretes[rng.random_range(0..discretes.len())];
        let double = contract(cal, y, &contract(cal, y, &omega)?)?;
        if double.grade() >= 2 {
            worst = worst.max(cal.normal_form(&double)?.max_norm());
        } else {
            worst = worst.max(double.max_norm());
        }
    }
    Ok(SuiteOutcome::passed("lie_cartan", trials, worst, cal.tol()))
}

/// The three flow-invertibility conditions agree on random discrete
/// fields, and the flow-differentiability characterizations match: the
/// arrow criterion, the `s`-map condition, and (on bicovariant lattices)
/// the existence of intertwiners for `Y` over `{ℓ_h}`.
pub fn suite_invertibility(cal: &Calculus, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let lattice = cal.lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0usize;
    for _ in 0..trials {
        let x = random_discrete(lattice, &mut rng);
        let (a, b, c) = invertibility_conditions(lattice, &x);
        if a != b || b != c {
            disagreements += 1;
        }
        // r/s interlocking when invertible
        if a {
            let group = cal.group();
            let r = x.r_map(lattice)?;
            for g in group.elements() {
                if x.s(group.mul(g, group.inv(r[g]))) != r[g]
                    || r[group.mul(g, x.s(g))] != x.s(g)
                {
                    disagreements += 1;
                }
            }
        }
        // differentiable flow ⇔ s-condition
        let diff = x.is_flow_differentiable(lattice);
        if diff != vector_fields::flow_s_condition(lattice, &x) {
            disagreements += 1;
        }
        // intertwiners for Y over {ℓ_h}: they certify differentiability,
        // and for invertible flows (where the assignment of s_Z is single
        // valued) differentiability produces them
        let intertwined = lattice.s().iter().all(|&h| {
            let y = DiscreteVF::constant(lattice, h).expect("h in S");
            match vector_fields::intertwiner(lattice, &x, &y) {
                Ok(z) => vector_fields::intertwines(lattice, &x, &y, &z),
                Err(_) => false,
            }
        });
        if intertwined && !diff {
            disagreements += 1;
        }
        if diff && x.invertibility(lattice).invertible && !intertwined {
            disagreements += 1;
        }
    }
    Ok(SuiteOutcome::passed(
        "invertibility_conditions",
        trials,
        disagreements as f64,
        0.0,
    ))
}

/// First and second Bianchi identities for random linear connections.
pub fn suite_bianchi(cal: &Calculus, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let conn = LinearConnection::random(cal.lattice(), &mut rng);
        worst = worst.max(first_bianchi_residual(cal, &conn)?);
        worst = worst.max(second_bianchi_residual(cal, &conn)?);
    }
    // the canonical connection stays torsion free
    let canonical = LinearConnection::canonical(cal.lattice());
    if !canonical.is_torsion_free(cal)? {
        worst = worst.max(1.0);
    }
    Ok(SuiteOutcome::passed("bianchi", trials, worst, cal.tol()))
}

/// Gauge invariance of the Yang-Mills and matter actions under random
/// unitary transforms, plus vanishing of the vacuum and pure-gauge action.
pub fn suite_gauge(cal: &Calculus, m: usize, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let lattice = cal.lattice();
    let n = cal.group().order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let w = GaugeField::random_unitary(lattice, m, &mut rng);
    let psi = MatterField::random(n, m, &mut rng);
    let base_ym = w.yang_mills(cal).total;
    let base_matter = matter_action(lattice, &w, &psi);
    for _ in 0..trials {
        let gamma = GaugeTransform::random_unitary(n, m, &mut rng);
        let wt = w.gauge_transform(cal, &gamma)?;
        worst = worst.max((wt.yang_mills(cal).total - base_ym).abs());
        worst = worst.max((matter_action(lattice, &wt, &psi.transform(&gamma)) - base_matter).abs());
        let pure = GaugeField::theta(lattice, m).gauge_transform(cal, &gamma)?;
        worst = worst.max(pure.yang_mills(cal).total.abs());
    }
    worst = worst.max(GaugeField::theta(lattice, m).yang_mills(cal).total.abs());
    Ok(SuiteOutcome::passed("gauge_invariance", trials, worst, 1e-8))
}

/// Runs every suite with per-suite seeds derived from `seed`.
pub fn run_all(cal: &Calculus, m: usize, seed: u64, trials: usize) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        suite_d_squared(cal, seed, trials)?,
        suite_delta_rules(cal, seed.wrapping_add(1), trials)?,
        suite_lie_cartan(cal, seed.wrapping_add(2), trials)?,
        suite_invertibility(cal, seed.wrapping_add(3), trials)?,
        suite_bianchi(cal, seed.wrapping_add(4), trials.min(20))?,
        suite_gauge(cal, m, seed.wrapping_add(5), trials.min(20))?,
    ])
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
    fn suites_pass_on_z4() {
        let cal = calculus("Z(4)", "1,2");
        for outcome in run_all(&cal, 1, 7, 10).unwrap() {
            assert!(outcome.pass, "{}: {}", outcome.name, outcome.max_residual);
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let cal = calculus("S(3)", "(12),(13),(23)");
        let a = suite_d_squared(&cal, 42, 5).unwrap();
        let b = suite_d_squared(&cal, 42, 5).unwrap();
        assert_eq!(a.max_residual, b.max_residual);
        let c = suite_gauge(&cal, 2, 9, 3).unwrap();
        let d = suite_gauge(&cal, 2, 9, 3).unwrap();
        assert_eq!(c.max_residual, d.max_residual);
    }

    #[test]
    fn lie_cartan_skips_without_candidates() {
        // the A5 fullerene lattice is not bicovariant: no ℓ_h qualifies
        let cal = calculus("A(5)", "(12345),(15432),(12)(34)");
        let outcome = suite_lie_cartan(&cal, 1, 1).unwrap();
        assert!(outcome.skipped.is_some());
        assert!(outcome.pass);
    }
}
