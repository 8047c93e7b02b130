//! Built-in invariant suites. Each suite draws (or enumerates) instances,
//! checks one property per instance, and on failure shrinks the first
//! failing instance to a small counterexample.
//!
//! Suite `k` in registry order draws from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream `k`, so suites are independent of each other and of the order
//! in which they run.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use kfcalc_core::composition::{compose, pushforward_setfn, s_adjoint, Endomorphism};
use kfcalc_core::gaussian::{
    expectation_product, ito_integral, monte_carlo_cov, q_mu_project, t_mu, t_mu_adjoint,
    v_adjoint, GaussianElement,
};
use kfcalc_core::krein_feller::{nabla_adjoint, nabla_of};
use kfcalc_core::measure::{check_pairwise_disjoint, DensityVector, MeasurableSet, MeasureSpace, SimpleFunction};
use kfcalc_core::multi::{
    anticipating_check, chain_rule_check, chain_rule_support_condition, independence_check,
    joint_ito, mutually_singular, projection_identity, reversibility_check, MeasureFamily,
};
use kfcalc_core::random::{random_density, random_disjoint_family, random_invariant_pair, random_set, random_space};
use kfcalc_core::rkhs::{
    domination_check, gram_psd_check_with, kernel_eval, membership_test, partition_functional,
    sobolev_membership, AdditiveSetFunction, DirectGram, GramAssembler, Mode, DEFAULT_PSD_TOL,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{num, Tool, TOOL};

pub const VERIFY_SCHEMA: &str = "kfcalc.verify/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level `{other}` (expected fast or full)")),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

/// A finite test case: atom weights, sets, complex vectors and an optional
/// self-map, interpreted by each suite in its own way.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub weights: Vec<f64>,
    pub sets: Vec<Vec<usize>>,
    pub densities: Vec<Vec<Complex64>>,
    pub map: Option<Vec<usize>>,
}

impl Instance {
    fn new(weights: Vec<f64>) -> Self {
        Self {
            weights,
            sets: Vec::new(),
            densities: Vec::new(),
            map: None,
        }
    }

    fn n(&self) -> usize {
        self.weights.len()
    }

    fn space(&self) -> Option<MeasureSpace> {
        MeasureSpace::from_weights(&self.weights).ok()
    }

    fn set(&self, k: usize) -> Option<MeasurableSet> {
        MeasurableSet::from_indices(self.n(), self.sets.get(k)?.iter().copied()).ok()
    }

    fn density(&self, k: usize) -> Option<DensityVector> {
        let d = self.densities.get(k)?;
        (d.len() == self.n()).then(|| DensityVector::new(d.clone()).ok())?
    }

    fn real_density(&self, k: usize) -> Option<Vec<f64>> {
        self.densities.get(k).map(|d| d.iter().map(|z| z.re).collect())
    }

    fn sigma(&self) -> Option<Endomorphism> {
        Endomorphism::new(self.map.clone()?).ok().filter(|s| s.len() == self.n())
    }

    fn without_atom(&self, x: usize) -> Option<Self> {
        let shift = |i: usize| if i > x { i - 1 } else { i };
        let map = match &self.map {
            Some(m) => {
                if m.iter().enumerate().any(|(y, &t)| y != x && t == x) {
                    return None;
                }
                Some(
                    m.iter()
                        .enumerate()
                        .filter(|&(y, _)| y != x)
                        .map(|(_, &t)| shift(t))
                        .collect(),
                )
            }
            None => None,
        };
        let mut weights = self.weights.clone();
        weights.remove(x);
        Some(Self {
            weights,
            sets: self
                .sets
                .iter()
                .map(|s| s.iter().filter(|&&i| i != x).map(|&i| shift(i)).collect())
                .collect(),
            densities: self
                .densities
                .iter()
                .map(|d| {
                    let mut d = d.clone();
                    if x < d.len() {
                        d.remove(x);
                    }
                    d
                })
                .collect(),
            map,
        })
    }

    /// Smaller or simpler variants, most aggressive first.
    fn shrink_candidates(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for x in 0..self.n() {
            if let Some(c) = self.without_atom(x) {
                out.push(c);
            }
        }
        for k in 0..self.sets.len() {
            let mut c = self.clone();
            c.sets.remove(k);
            out.push(c);
        }
        for x in 0..self.n() {
            for w in [1.0, 0.0] {
                if self.weights[x] != w {
                    let mut c = self.clone();
                    c.weights[x] = w;
                    out.push(c);
                }
            }
        }
        for k in 0..self.densities.len() {
            for x in 0..self.densities[k].len() {
                for v in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] {
                    if self.densities[k][x] != v {
                        let mut c = self.clone();
                        c.densities[k][x] = v;
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn to_json(&self) -> Value {
        json!({
            "weights": self.weights.iter().map(|&w| num(w)).collect::<Vec<_>>(),
            "sets": self.sets,
            "densities": self.densities.iter()
                .map(|d| d.iter().map(|z| json!([num(z.re), num(z.im)])).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "map": self.map,
        })
    }
}

/// Outcome of checking one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    /// The instance does not meet the property's hypotheses.
    Invalid,
}

fn verdict(ok: bool, msg: impl FnOnce() -> String) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(msg())
    }
}

/// Unwraps an option, treating `None` as an invalid instance.
macro_rules! need {
    ($e:expr) => {
        match $e {
            Some(v) => v,
            None => return Verdict::Invalid,
        }
    };
}

/// Unwraps a result, treating an error as a failure.
macro_rules! must {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Verdict::Fail(format!("unexpected error: {e}")),
        }
    };
}

/// Greedily applies shrink steps that keep the instance failing.
pub fn shrink(instance: Instance, check: impl Fn(&Instance) -> Verdict) -> (Instance, String) {
    let mut current = instance;
    let mut message = match check(&current) {
        Verdict::Fail(m) => m,
        _ => String::new(),
    };
    for _ in 0..500 {
        let next = current
            .shrink_candidates()
            .into_iter()
            .find_map(|c| match check(&c) {
                Verdict::Fail(m) => Some((c, m)),
                _ => None,
            });
        match next {
            Some((c, m)) => {
                current = c;
                message = m;
            }
            None => break,
        }
    }
    (current, message)
}

pub struct Env<'a> {
    pub gram: &'a dyn GramAssembler,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub message: String,
    pub instance: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub level: Level,
    pub cases: usize,
    pub failures: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn level(&self) -> Level;
    fn run(&self, rng: &mut ChaCha8Rng, env: &Env) -> SuiteResult;
}

type Generate = fn(&mut ChaCha8Rng, usize) -> Instance;
type Check = fn(&Instance, &Env) -> Verdict;

/// A property checked on `cases` generated instances.
pub struct PropertySuite {
    pub name: &'static str,
    pub level: Level,
    pub cases: usize,
    pub generate: Generate,
    pub check: Check,
}

impl Suite for PropertySuite {
    fn name(&self) -> &'static str {
        self.name
    }

    fn level(&self) -> Level {
        self.level
    }

    fn run(&self, rng: &mut ChaCha8Rng, env: &Env) -> SuiteResult {
        let mut failures = 0;
        let mut first = None;
        let mut valid = 0;
        for case in 0..self.cases {
            let inst = (self.generate)(rng, case);
            match (self.check)(&inst, env) {
                Verdict::Pass => valid += 1,
                Verdict::Invalid => {}
                Verdict::Fail(_) => {
                    valid += 1;
                    failures += 1;
                    first.get_or_insert(inst);
                }
            }
        }
        let counterexample = first.map(|inst| {
            let (small, message) = shrink(inst, |i| (self.check)(i, env));
            Counterexample {
                message,
                instance: small.to_json(),
            }
        });
        SuiteResult {
            name: self.name,
            level: self.level,
            cases: valid,
            failures,
            pass: failures == 0,
            counterexample,
            note: None,
            elapsed_ms: None,
        }
    }
}

fn dyadic_weights(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(r.random_range(0u32..=80)) / 8.0).collect()
}

fn with_densities(r: &mut ChaCha8Rng, weights: Vec<f64>, count: usize) -> Instance {
    let n = weights.len();
    let mut inst = Instance::new(weights);
    inst.densities = (0..count).map(|_| random_density(r, n).into_values()).collect();
    inst
}

fn random_weights(r: &mut ChaCha8Rng, max: usize) -> Vec<f64> {
    let n = r.random_range(1..=max);
    random_space(r, n, 0.15).weights().to_vec()
}

fn rel_close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm())
}

// ------------------------------------------------------------------- checks

fn additivity(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let a = need!(inst.set(0));
    let b = need!(inst.set(1)).difference(&a);
    let whole = must!(s.measure_of(&a.union(&b)));
    let parts = must!(s.measure_of(&a)) + must!(s.measure_of(&b));
    verdict(whole == parts, || format!("μ(A ∪ B) = {whole} but μ(A) + μ(B) = {parts}"))
}

fn disjointify(inst: &Instance, _: &Env) -> Verdict {
    let coeffs = need!(inst.densities.first());
    if coeffs.len() != inst.sets.len() {
        return Verdict::Invalid;
    }
    let mut f = SimpleFunction::new(inst.n());
    for (k, c) in coeffs.iter().enumerate() {
        must!(f.push(*c, need!(inst.set(k))));
    }
    let d = f.disjointify();
    let parts: Vec<MeasurableSet> = d.terms().iter().map(|(_, s)| s.clone()).collect();
    if check_pairwise_disjoint(&parts).is_err() {
        return Verdict::Fail("output sets overlap".into());
    }
    for x in 0..inst.n() {
        if d.eval(x) != f.eval(x) {
            return Verdict::Fail(format!("value at atom {x} changed from {} to {}", f.eval(x), d.eval(x)));
        }
    }
    Verdict::Pass
}

fn gram(inst: &Instance, env: &Env) -> Verdict {
    let s = need!(inst.space());
    let sets: Vec<MeasurableSet> = need!((0..inst.sets.len()).map(|k| inst.set(k)).collect());
    let check = must!(gram_psd_check_with(env.gram, &s, &sets, DEFAULT_PSD_TOL));
    let g = check.gram.entries();
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            let want = must!(kernel_eval(&s, &sets[i], &sets[j]));
            if g[(i, j)] != want {
                return Verdict::Fail(format!(
                    "Gram entry ({i}, {j}) is {} but μ(Aᵢ ∩ Aⱼ) = {want}",
                    g[(i, j)]
                ));
            }
        }
    }
    verdict(check.psd, || format!("minimum eigenvalue {}", check.min_eigenvalue))
}

fn density_setfn(s: &MeasureSpace, h: &DensityVector) -> AdditiveSetFunction {
    let m: Vec<Complex64> = (0..s.len()).map(|x| h[x] * s.weight(x)).collect();
    AdditiveSetFunction::from_atom_values(&m)
}

fn membership(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let h = need!(inst.density(0)).canonical(&s);
    let report = must!(membership_test(&s, &density_setfn(&s, &h), 2.0, Mode::Atomic));
    let norm_sq: f64 = (0..s.len()).map(|x| h[x].norm_sqr() * s.weight(x)).sum();
    if !report.member || (report.best_constant - norm_sq).abs() > 1e-10 * norm_sq {
        return Verdict::Fail(format!("best constant {} but ‖h‖² = {norm_sq}", report.best_constant));
    }
    let rec = need!(report.recovered_density);
    verdict(
        (0..s.len()).all(|x| rel_close(rec[x], h[x], 4.0 * f64::EPSILON) || rec[x] == h[x]),
        || "recovered density differs from h".into(),
    )
}

fn brute_force(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let h = need!(inst.density(0)).canonical(&s);
    let m = density_setfn(&s, &h);
    let brute = must!(membership_test(&s, &m, 2.0, Mode::BruteForce));
    let atomic = must!(membership_test(&s, &m, 2.0, Mode::Atomic));
    verdict(
        (brute.best_constant - atomic.best_constant).abs() <= 1e-10 * atomic.best_constant,
        || format!("brute force {} vs singleton partition {}", brute.best_constant, atomic.best_constant),
    )
}

fn domination(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let h = need!(inst.density(0)).canonical(&s);
    let m = density_setfn(&s, &h);
    let best = must!(membership_test(&s, &m, 2.0, Mode::Atomic)).best_constant;
    if !(best > 0.0) {
        return Verdict::Invalid;
    }
    let atoms: Vec<MeasurableSet> = (0..s.len()).map(|x| s.singleton(x)).collect();
    let above = must!(domination_check(&s, &m, &atoms, best * (1.0 + 1e-6), 1e-12));
    let below = must!(domination_check(&s, &m, &atoms, best * (1.0 - 1e-6), 1e-12));
    verdict(above && !below, || format!("above: {above}, below: {below}"))
}

fn sobolev_identity(inst: &Instance, _: &Env) -> Verdict {
    let xs = &inst.weights;
    if xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Verdict::Invalid;
    }
    let fs: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let got = must!(sobolev_membership(xs, &fs, 2.0)).criterion_value;
    let want = xs[xs.len() - 1] - xs[0];
    verdict(got == want, || format!("criterion {got}, span {want}"))
}

fn unitarity(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let g = need!(inst.density(0));
    let lifted = must!(nabla_adjoint(&s, &g));
    let atoms: Vec<Complex64> = must!((0..s.len()).map(|x| lifted.value(&s, &s.singleton(x))).collect());
    let back = must!(nabla_of(&s, &AdditiveSetFunction::from_atom_values(&atoms)));
    let want = g.canonical(&s);
    verdict(
        (0..s.len()).all(|x| back[x] == want[x] || rel_close(back[x], want[x], 1e-12)),
        || "∇∇*g differs from g off null atoms".into(),
    )
}

fn isometry(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let (f, g) = (need!(inst.density(0)), need!(inst.density(1)));
    let got = must!(expectation_product(&must!(ito_integral(&s, &f)), &must!(ito_integral(&s, &g))));
    let mut want = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for x in 0..s.len() {
        want += f[x] * g[x].conj() * s.weight(x);
        scale += f[x].norm() * g[x].norm() * s.weight(x);
    }
    // naive summation carries an error proportional to Σ|f||g|w
    verdict((got - want).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE), || {
        format!("E[Vf conj(Vg)] = {got} but ⟨f, g⟩ = {want}")
    })
}

fn projection(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let psi = GaussianElement::new(need!(inst.densities.first()).clone());
    if psi.len() != s.len() {
        return Verdict::Invalid;
    }
    let q = must!(q_mu_project(&s, &psi));
    let vv = must!(ito_integral(&s, &must!(v_adjoint(&s, &psi))));
    let tt = must!(t_mu_adjoint(&s, &must!(t_mu(&s, &psi))));
    for x in 0..s.len() {
        let target = q.coeffs()[x];
        for (name, got) in [("VV*", vv.coeffs()[x]), ("T*T", tt.coeffs()[x])] {
            if got != target && !rel_close(got, target, 4.0 * f64::EPSILON) {
                return Verdict::Fail(format!("{name} differs from the projection at atom {x}"));
            }
        }
    }
    Verdict::Pass
}

fn family(inst: &Instance, count: usize) -> Option<MeasureFamily> {
    let densities = (0..count).map(|k| inst.real_density(k)).collect::<Option<Vec<_>>>()?;
    MeasureFamily::new(inst.space()?, densities).ok()
}

fn reversibility(inst: &Instance, _: &Env) -> Verdict {
    let fam = need!(family(inst, 2));
    let (a, b) = (need!(inst.set(0)), need!(inst.set(1)));
    let r = must!(reversibility_check(&fam, 0, 1, &a, &b, 1e-12));
    verdict(r.pass, || format!("lhs {}, mid {}, rhs {}", r.lhs, r.mid, r.rhs))
}

fn uhs(inst: &Instance, _: &Env) -> Verdict {
    // densities[0] holds f₁; densities[1] the exponents k₁, k₂ with ρᵢ = 4^kᵢ
    let fam = need!(family(inst, 0).and_then(|_| {
        let ks = inst.densities.get(1)?;
        let rho1 = ks.iter().map(|z| 4f64.powi(z.re as i32)).collect();
        let rho2 = ks.iter().map(|z| 4f64.powi(z.im as i32)).collect();
        MeasureFamily::new(inst.space()?, vec![rho1, rho2]).ok()
    }));
    let f1 = need!(inst.density(0));
    let ks = &inst.densities[1];
    if ks.len() != inst.n() {
        return Verdict::Invalid;
    }
    let f2 = need!(DensityVector::new(
        (0..inst.n())
            .map(|x| f1[x] * 2f64.powi(ks[x].re as i32 - ks[x].im as i32))
            .collect()
    )
    .ok());
    let a = must!(joint_ito(&fam, 0, &f1));
    let b = must!(joint_ito(&fam, 1, &f2));
    verdict(a == b, || "equivalent pairs give different integrals".into())
}

fn pattern_instance(weights: Vec<f64>, patterns: &[u64], r: &mut ChaCha8Rng) -> Instance {
    let n = weights.len();
    let mut inst = Instance::new(weights);
    inst.densities = patterns
        .iter()
        .map(|&p| {
            (0..n)
                .map(|x| {
                    let v = if (p >> x) & 1 == 1 { r.random_range(0.1..=5.0) } else { 0.0 };
                    Complex64::new(v, 0.0)
                })
                .collect()
        })
        .collect();
    inst
}

fn singularity(inst: &Instance, _: &Env) -> Verdict {
    let fam = need!(family(inst, 2));
    let n = inst.n();
    let sets: Vec<MeasurableSet> = (0..n).map(|x| MeasurableSet::singleton(n, x)).collect();
    let singular = must!(mutually_singular(&fam, 0, 1));
    let uncorrelated = must!(independence_check(&fam, 0, 1, &sets, 0.0));
    verdict(singular == uncorrelated, || {
        format!("mutually singular: {singular}, uncorrelated: {uncorrelated}")
    })
}

fn anticipation(inst: &Instance, _: &Env) -> Verdict {
    let fam = need!(family(inst, 2));
    let ant = must!(anticipating_check(&fam, 0, 1));
    let proj = must!(projection_identity(&fam, 0, 1));
    verdict(ant == proj, || format!("support inclusion {ant}, projection identity {proj}"))
}

fn chain_rule(inst: &Instance, _: &Env) -> Verdict {
    let fam = need!(family(inst, 3));
    let holds = must!(chain_rule_check(&fam, 0, 1, 2, 1e-12)).holds;
    let support = must!(chain_rule_support_condition(&fam, 0, 1, 2));
    if holds != support {
        return Verdict::Fail(format!("chain rule {holds}, support condition {support}"));
    }
    if must!(anticipating_check(&fam, 1, 2)) {
        for l in 0..3 {
            if !must!(chain_rule_check(&fam, l, 1, 2, 1e-12)).holds {
                return Verdict::Fail(format!("anticipating transition but chain rule fails from measure {l}"));
            }
        }
    }
    Verdict::Pass
}

fn composition(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let sigma = need!(inst.sigma());
    let (f, g) = (need!(inst.density(0)), need!(inst.density(1)));
    let h = match s_adjoint(&s, &sigma, &g) {
        Ok(h) => h,
        Err(kfcalc_core::Error::Precondition(_)) => return Verdict::Invalid,
        Err(e) => return Verdict::Fail(format!("unexpected error: {e}")),
    };
    let sf = must!(compose(&s, &sigma, &f));
    let lhs = must!(sf.inner(&g, &s));
    let rhs = must!(f.inner(&h, &s));
    let scale: f64 = (0..s.len()).map(|x| sf[x].norm() * g[x].norm() * s.weight(x)).sum();
    if (lhs - rhs).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Verdict::Fail(format!("⟨Sf, g⟩ = {lhs} but ⟨f, S*g⟩ = {rhs}"));
    }
    let (a, b) = (must!(sf.norm_sq(&s)), must!(f.norm_sq(&s)));
    verdict((a - b).abs() <= 1e-12 * a.max(b), || format!("‖Sf‖² = {a} but ‖f‖² = {b}"))
}

fn pushforward_bound(inst: &Instance, _: &Env) -> Verdict {
    let s = need!(inst.space());
    let sigma = need!(inst.sigma());
    if !kfcalc_core::composition::check_invariance(&s, &sigma).map(|r| r.0).unwrap_or(false) {
        return Verdict::Invalid;
    }
    let g = need!(inst.density(0));
    let parts: Vec<MeasurableSet> = need!((0..inst.sets.len()).map(|k| inst.set(k)).collect());
    if check_pairwise_disjoint(&parts).is_err() {
        return Verdict::Invalid;
    }
    let m = must!(pushforward_setfn(&s, &sigma, &g));
    let lhs = must!(partition_functional(&s, &m, &parts, 2.0));
    let bound = must!(g.norm_sq(&s));
    verdict(lhs <= bound * (1.0 + 1e-12), || format!("functional {lhs} exceeds ‖g‖² = {bound}"))
}

// --------------------------------------------------------------- generators

fn gen_additivity(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let n = r.random_range(1..=40);
    let mut inst = Instance::new(dyadic_weights(r, n));
    inst.sets = (0..2).map(|_| random_set(r, n).indices()).collect();
    inst
}

fn gen_disjointify(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let n = r.random_range(1..=12);
    let terms = r.random_range(0..=6);
    let mut inst = Instance::new(vec![1.0; n]);
    inst.sets = (0..terms).map(|_| random_set(r, n).indices()).collect();
    inst.densities = vec![(0..terms)
        .map(|_| Complex64::new(f64::from(r.random_range(-4..=4)), f64::from(r.random_range(-4..=4))))
        .collect()];
    inst
}

fn gen_gram(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let w = random_weights(r, 16);
    let n = w.len();
    let mut inst = Instance::new(w);
    let k = r.random_range(2..=8);
    inst.sets = (0..k).map(|_| random_set(r, n).indices()).collect();
    inst
}

fn gen_one_density(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let w = random_weights(r, 32);
    with_densities(r, w, 1)
}

fn gen_small_density(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let n = 1 + case % 8;
    let w = random_space(r, n, 0.15).weights().to_vec();
    with_densities(r, w, 1)
}

fn gen_two_densities(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let w = random_weights(r, 64);
    with_densities(r, w, 2)
}

fn gen_grid(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let k = r.random_range(0..50);
    let mut xs: Vec<f64> = (0..k).map(|_| r.random_range(0.0..1.0)).collect();
    xs.extend([0.0, 1.0]);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Instance::new(xs)
}

fn gen_family_sets(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let w = random_weights(r, 32);
    let n = w.len();
    let mut inst = Instance::new(w);
    inst.densities = (0..2)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(if r.random_bool(0.25) { 0.0 } else { r.random_range(0.0..=5.0) }, 0.0))
                .collect()
        })
        .collect();
    inst.sets = (0..2).map(|_| random_set(r, n).indices()).collect();
    inst
}

fn gen_uhs(r: &mut ChaCha8Rng, _: usize) -> Instance {
    let n = r.random_range(1..=20);
    let mut inst = Instance::new(dyadic_weights(r, n));
    inst.densities = vec![
        random_density(r, n).into_values(),
        (0..n)
            .map(|_| Complex64::new(f64::from(r.random_range(0..=3)), f64::from(r.random_range(0..=3))))
            .collect(),
    ];
    inst
}

const PATTERN_WEIGHTS: [f64; 6] = [1.0, 2.5, 0.75, 4.0, 0.5, 3.25];

fn gen_singularity(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let (p, q) = ((case & 15) as u64, (case >> 4) as u64);
    pattern_instance(PATTERN_WEIGHTS[..4].to_vec(), &[p, q], r)
}

/// Enumerates every pair of support patterns on 1..=6 atoms.
fn gen_anticipation(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let mut rest = case;
    for n in 1..=6 {
        let count = 1usize << (2 * n);
        if rest < count {
            let (p, q) = ((rest & ((1 << n) - 1)) as u64, (rest >> n) as u64);
            return pattern_instance(PATTERN_WEIGHTS[..n].to_vec(), &[p, q], r);
        }
        rest -= count;
    }
    unreachable!("case index beyond the enumeration")
}

const ANTICIPATION_CASES: usize = 4 + 16 + 64 + 256 + 1024 + 4096;

fn gen_chain_rule(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let p = [(case & 7) as u64, ((case >> 3) & 7) as u64, ((case >> 6) & 7) as u64];
    pattern_instance(PATTERN_WEIGHTS[..3].to_vec(), &p, r)
}

fn gen_composition(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let n = r.random_range(1..=24);
    let (s, sigma) = random_invariant_pair(r, n, case % 2 == 1);
    let mut inst = with_densities(r, s.weights().to_vec(), 2);
    inst.map = Some(sigma.map().to_vec());
    inst
}

fn gen_bound(r: &mut ChaCha8Rng, case: usize) -> Instance {
    let n = r.random_range(1..=24);
    let (s, sigma) = random_invariant_pair(r, n, case % 2 == 0);
    let mut inst = with_densities(r, s.weights().to_vec(), 1);
    inst.map = Some(sigma.map().to_vec());
    inst.sets = random_disjoint_family(r, n).iter().map(MeasurableSet::indices).collect();
    inst
}

/// Sampled covariances at 10⁵ replicas against μ(A∩B).
struct MonteCarloSuite;

impl Suite for MonteCarloSuite {
    fn name(&self) -> &'static str {
        "gaussian.monte_carlo"
    }

    fn level(&self) -> Level {
        Level::Full
    }

    fn run(&self, rng: &mut ChaCha8Rng, _: &Env) -> SuiteResult {
        let n = 12;
        let space = random_space(rng, n, 0.1);
        let seed: u64 = rng.random();
        let mut outside = Vec::new();
        for k in 0..100u64 {
            let (a, b) = (random_set(rng, n), random_set(rng, n));
            let target = space.measure_of(&a.intersection(&b)).unwrap_or(f64::NAN);
            let z = monte_carlo_cov(&space, &a, &b, 100_000, seed.wrapping_add(k))
                .map(|e| e.z_score(target))
                .unwrap_or(f64::INFINITY);
            if !(z <= 4.0) {
                outside.push((a, b, z));
            }
        }
        let pass = outside.len() <= 5;
        let counterexample = (!pass).then(|| {
            let (a, b, z) = &outside[0];
            let mut inst = Instance::new(space.weights().to_vec());
            inst.sets = vec![a.indices(), b.indices()];
            Counterexample {
                message: format!("{} of 100 pairs beyond 4 standard errors (first z = {z})", outside.len()),
                instance: inst.to_json(),
            }
        });
        SuiteResult {
            name: self.name(),
            level: self.level(),
            cases: 100,
            failures: outside.len(),
            pass,
            counterexample,
            note: Some("passes when at least 95 of 100 pairs lie within 4 standard errors".into()),
            elapsed_ms: None,
        }
    }
}

macro_rules! property {
    ($name:literal, $level:ident, $cases:expr, $generate:ident, $check:ident) => {
        &PropertySuite {
            name: $name,
            level: Level::$level,
            cases: $cases,
            generate: $generate,
            check: $check,
        }
    };
}

static SUITES: &[&dyn Suite] = &[
    property!("measure.additivity", Fast, 500, gen_additivity, additivity),
    property!("measure.disjointify", Fast, 500, gen_disjointify, disjointify),
    property!("rkhs.gram", Fast, 300, gen_gram, gram),
    property!("rkhs.membership", Fast, 300, gen_one_density, membership),
    property!("rkhs.domination", Fast, 100, gen_one_density, domination),
    property!("rkhs.sobolev_identity", Fast, 300, gen_grid, sobolev_identity),
    property!("krein_feller.unitarity", Fast, 300, gen_one_density, unitarity),
    property!("gaussian.isometry", Fast, 500, gen_two_densities, isometry),
    property!("gaussian.projection", Fast, 300, gen_one_density, projection),
    property!("multi.uhs_well_defined", Fast, 300, gen_uhs, uhs),
    property!("multi.reversibility", Fast, 300, gen_family_sets, reversibility),
    property!("multi.singularity", Fast, 256, gen_singularity, singularity),
    property!("multi.anticipation", Fast, ANTICIPATION_CASES, gen_anticipation, anticipation),
    property!("multi.chain_rule", Fast, 512, gen_chain_rule, chain_rule),
    property!("composition.adjoint", Fast, 300, gen_composition, composition),
    property!("composition.bound", Fast, 300, gen_bound, pushforward_bound),
    property!("rkhs.brute_force", Full, 200, gen_small_density, brute_force),
    &MonteCarloSuite,
];

pub fn suites() -> &'static [&'static dyn Suite] {
    SUITES
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub suites: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub tool: Tool,
    pub level: Level,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub summary: VerifySummary,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

pub fn verify(level: Level, seed: u64, timings: bool) -> VerifyReport {
    verify_with(level, seed, timings, &DirectGram)
}

/// Runs every suite at or below `level`, with `gram` assembling the Gram
/// matrices checked by the kernel suite.
pub fn verify_with(level: Level, seed: u64, timings: bool, gram: &dyn GramAssembler) -> VerifyReport {
    let env = Env { gram };
    let selected: Vec<(usize, &&dyn Suite)> = SUITES
        .iter()
        .enumerate()
        .filter(|(_, s)| s.level() <= level)
        .collect();
    let results: Vec<SuiteResult> = selected
        .par_iter()
        .map(|&(k, suite)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let start = Instant::now();
            let mut result = suite.run(&mut rng, &env);
            if timings {
                result.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            result
        })
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    VerifyReport {
        schema: VERIFY_SCHEMA,
        tool: TOOL,
        level,
        seed,
        summary: VerifySummary {
            suites: results.len(),
            passed,
            failed: results.len() - passed,
        },
        suites: results,
    }
}
