//! The experiment registry. Each operation validates its parameters when
//! the scenario is loaded and produces a boxed [`Experiment`]; running it
//! yields outputs and a list of checks.

use kfcalc_core::composition::{check_invariance, compose, pushforward_setfn, s_adjoint, Endomorphism};
use kfcalc_core::gaussian::{brownian_rv, expectation_product, ito_integral, monte_carlo_cov};
use kfcalc_core::krein_feller::{nabla_adjoint, nabla_of};
use kfcalc_core::measure::{DensityVector, MeasurableSet, MeasureSpace};
use kfcalc_core::multi::{
    anticipating_check, chain_rule_check, chain_rule_support_condition, cross_cov,
    independence_check, joint_ito, mutually_singular, projection_identity, reversibility_check,
    transition_eval, MeasureFamily,
};
use kfcalc_core::rkhs::{
    domination_spectrum, gram_psd_check, membership_test, partition_functional, psd_threshold,
    sobolev_membership, AdditiveSetFunction, Mode, DEFAULT_PSD_TOL,
};
use kfcalc_core::{Error, Result};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{num, Check};
use crate::scenario::{parse_params, FunctionSpec, LoadContext, SetFnSpec, C};

/// What a running experiment can see.
pub struct RunContext<'a> {
    pub space: &'a MeasureSpace,
    pub family: Option<&'a MeasureFamily>,
    /// Seed for this experiment, already mixed with its index.
    pub seed: u64,
    pub replicas: u64,
}

impl RunContext<'_> {
    fn family(&self) -> Result<&MeasureFamily> {
        self.family
            .ok_or_else(|| Error::Precondition("no measure family in this scenario".into()))
    }
}

pub struct Outcome {
    pub pass: bool,
    pub outputs: Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    /// Passes iff every check passes.
    fn checked(outputs: Value, checks: Vec<Check>) -> Self {
        Self {
            pass: checks.iter().all(|c| c.pass),
            outputs,
            checks,
        }
    }
}

pub trait Experiment: Send + Sync {
    fn run(&self, ctx: &RunContext) -> Result<Outcome>;
}

type Parser = fn(&Value, &LoadContext) -> std::result::Result<Box<dyn Experiment>, String>;

/// A registered operation.
pub struct OpKind {
    pub name: &'static str,
    pub summary: &'static str,
    pub parse: Parser,
}

macro_rules! op {
    ($name:literal, $summary:literal, $params:ty) => {
        OpKind {
            name: $name,
            summary: $summary,
            parse: |v, ctx| Ok(Box::new(parse_params::<$params>(v)?.validate(ctx)?)),
        }
    };
}

static OPS: &[OpKind] = &[
    op!("covariance", "E[W_A·W_B] of the Brownian field against μ(A∩B)", CovarianceParams),
    op!("ito_isometry", "E[V f · conj(V g)] against ⟨f, g⟩_μ", IsometryParams),
    op!("monte_carlo", "sampled E[W_A·W_B] within z_max standard errors of μ(A∩B)", MonteCarloParams),
    op!("gram_psd", "Gram matrix of the kernel μ(A∩B) is positive semidefinite", GramParams),
    op!("membership", "partition-supremum membership test for a set function", MembershipParams),
    op!("domination", "positivity of μ(A∩B) − M(A)·conj(M(B))/C on a family", DominationParams),
    op!("derivative", "Krein-Feller derivative of a set function", DerivativeParams),
    op!("unitarity", "∇∇* and ∇*∇ round trips", UnitarityParams),
    op!("sobolev", "difference-quotient L^p criterion on sample points", SobolevParams),
    op!("cross_cov", "cross covariance of two fields of a family", CrossCovParams),
    op!("reversibility", "three routes to the cross covariance agree", ReversibilityParams),
    op!("transition", "transition kernel P(x, B) between two measures", TransitionParams),
    op!("singularity", "mutual singularity against vanishing cross covariance", SingularityParams),
    op!("anticipating", "support inclusion against the projection identity", AnticipatingParams),
    op!("chain_rule", "chain rule for transitions through a middle measure", ChainRuleParams),
    op!("invariance", "whether μ is invariant under an endomorphism", InvarianceParams),
    op!("composition_adjoint", "⟨Sf, g⟩ = ⟨f, S*g⟩ and ‖Sf‖ = ‖f‖", CompositionParams),
    op!("pushforward_bound", "Σ|M_g(A)|²/μ(A) ≤ ‖g‖² on a disjoint family", PushforwardParams),
];

pub fn ops() -> &'static [OpKind] {
    OPS
}

pub fn op_kind(name: &str) -> Option<&'static OpKind> {
    OPS.iter().find(|k| k.name == name)
}

fn tight() -> f64 {
    1e-12
}

fn psd_tol() -> f64 {
    DEFAULT_PSD_TOL
}

fn two() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

fn set_json(s: &MeasurableSet) -> Value {
    json!(s.indices())
}

fn complex_json(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn density_json(d: &DensityVector) -> Value {
    Value::Array(d.values().iter().map(|&z| complex_json(z)).collect())
}

/// Component checks for a complex quantity, passing when
/// `|actual − expected| ≤ tol·max(|actual|, |expected|)`.
fn complex_checks(quantity: &str, expected: Complex64, actual: Complex64, tol: f64) -> [Check; 2] {
    let pass = (actual - expected).norm() <= tol * actual.norm().max(expected.norm());
    [
        Check::new(format!("{quantity} (re)"), expected.re, actual.re, pass),
        Check::new(format!("{quantity} (im)"), expected.im, actual.im, pass),
    ]
}

fn check_tol(tol: f64) -> std::result::Result<(), String> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(format!("`tol` must be finite and nonnegative, got {tol}"))
    }
}

fn set_pairs(ctx: &LoadContext, pairs: &[[Vec<usize>; 2]]) -> std::result::Result<Vec<(MeasurableSet, MeasurableSet)>, String> {
    if pairs.is_empty() {
        return Err("`pairs` must not be empty".into());
    }
    pairs
        .iter()
        .enumerate()
        .map(|(k, [a, b])| {
            Ok((
                ctx.set(&format!("pairs[{k}][0]"), a)?,
                ctx.set(&format!("pairs[{k}][1]"), b)?,
            ))
        })
        .collect()
}

fn endomorphism(ctx: &LoadContext, map: Vec<usize>) -> std::result::Result<Endomorphism, String> {
    if map.len() != ctx.atoms() {
        return Err(format!(
            "`map` has {} entries but the space has {} atoms",
            map.len(),
            ctx.atoms()
        ));
    }
    Endomorphism::new(map).map_err(|e| format!("`map`: {e}"))
}

// ---------------------------------------------------------------- covariance

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceParams {
    pairs: Vec<[Vec<usize>; 2]>,
    #[serde(default = "tight")]
    tol: f64,
}

impl CovarianceParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Covariance, String> {
        check_tol(self.tol)?;
        Ok(Covariance {
            pairs: set_pairs(ctx, &self.pairs)?,
            tol: self.tol,
        })
    }
}

struct Covariance {
    pairs: Vec<(MeasurableSet, MeasurableSet)>,
    tol: f64,
}

impl Experiment for Covariance {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let mut checks = Vec::new();
        let mut values = Vec::new();
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            let want = ctx.space.measure_of(&a.intersection(b))?;
            let got = expectation_product(&brownian_rv(ctx.space, a)?, &brownian_rv(ctx.space, b)?)?;
            checks.push(Check::relative(format!("E[W_A W_B] pair {k}"), want, got.re, self.tol));
            checks.push(Check::exact(format!("Im E[W_A W_B] pair {k}"), 0.0, got.im));
            values.push(num(got.re));
        }
        Ok(Outcome::checked(json!({ "covariances": values }), checks))
    }
}

// -------------------------------------------------------------- ito_isometry

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IsometryParams {
    f: Vec<C>,
    g: Vec<C>,
    #[serde(default = "tight")]
    tol: f64,
}

impl IsometryParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Isometry, String> {
        check_tol(self.tol)?;
        Ok(Isometry {
            f: ctx.density("f", &self.f)?,
            g: ctx.density("g", &self.g)?,
            tol: self.tol,
        })
    }
}

struct Isometry {
    f: DensityVector,
    g: DensityVector,
    tol: f64,
}

impl Experiment for Isometry {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let want = self.f.inner(&self.g, ctx.space)?;
        let got = expectation_product(&ito_integral(ctx.space, &self.f)?, &ito_integral(ctx.space, &self.g)?)?;
        Ok(Outcome::checked(
            json!({ "expectation": complex_json(got), "inner_product": complex_json(want) }),
            complex_checks("E[Vf conj(Vg)]", want, got, self.tol).to_vec(),
        ))
    }
}

// --------------------------------------------------------------- monte_carlo

fn z_default() -> f64 {
    4.0
}

fn fraction_default() -> f64 {
    0.95
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MonteCarloParams {
    pairs: Vec<[Vec<usize>; 2]>,
    #[serde(default)]
    replicas: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default = "z_default")]
    z_max: f64,
    #[serde(default = "fraction_default")]
    min_fraction: f64,
}

impl MonteCarloParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<MonteCarlo, String> {
        if !(self.z_max > 0.0) {
            return Err(format!("`z_max` must be positive, got {}", self.z_max));
        }
        if !(0.0..=1.0).contains(&self.min_fraction) {
            return Err(format!("`min_fraction` must lie in [0, 1], got {}", self.min_fraction));
        }
        if let Some(r) = self.replicas.filter(|&r| r < 2) {
            return Err(format!("`replicas` must be at least 2, got {r}"));
        }
        Ok(MonteCarlo {
            pairs: set_pairs(ctx, &self.pairs)?,
            replicas: self.replicas,
            seed: self.seed,
            z_max: self.z_max,
            min_fraction: self.min_fraction,
        })
    }
}

struct MonteCarlo {
    pairs: Vec<(MeasurableSet, MeasurableSet)>,
    replicas: Option<u64>,
    seed: Option<u64>,
    z_max: f64,
    min_fraction: f64,
}

impl Experiment for MonteCarlo {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let replicas = self.replicas.unwrap_or(ctx.replicas);
        let seed = self.seed.unwrap_or(ctx.seed);
        let mut checks = Vec::new();
        let mut estimates = Vec::new();
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            let target = ctx.space.measure_of(&a.intersection(b))?;
            let est = monte_carlo_cov(ctx.space, a, b, replicas, seed.wrapping_add(k as u64))?;
            let z = est.z_score(target);
            checks.push(Check::new(format!("E[W_A W_B] pair {k}"), target, est.estimate, z <= self.z_max));
            estimates.push(json!({
                "estimate": num(est.estimate),
                "standard_error": num(est.standard_error),
                "target": num(target),
                "z": num(z),
            }));
        }
        let within = checks.iter().filter(|c| c.pass).count();
        let fraction = within as f64 / checks.len() as f64;
        Ok(Outcome {
            pass: fraction >= self.min_fraction,
            outputs: json!({
                "replicas": replicas,
                "seed": seed,
                "within": within,
                "fraction": num(fraction),
                "estimates": estimates,
            }),
            checks,
        })
    }
}

// ------------------------------------------------------------------ gram_psd

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GramParams {
    sets: Vec<Vec<usize>>,
    #[serde(default = "psd_tol")]
    tol: f64,
}

impl GramParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Gram, String> {
        if !(self.tol > 0.0) {
            return Err(format!("`tol` must be positive, got {}", self.tol));
        }
        Ok(Gram {
            sets: ctx.sets("sets", &self.sets)?,
            tol: self.tol,
        })
    }
}

struct Gram {
    sets: Vec<MeasurableSet>,
    tol: f64,
}

impl Experiment for Gram {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let check = gram_psd_check(ctx.space, &self.sets, self.tol)?;
        let g = check.gram.entries();
        let max_abs = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rows: Vec<Value> = (0..g.nrows())
            .map(|i| Value::Array((0..g.ncols()).map(|j| num(g[(i, j)])).collect()))
            .collect();
        Ok(Outcome::checked(
            json!({ "gram": rows, "min_eigenvalue": num(check.min_eigenvalue) }),
            vec![Check::new(
                "min eigenvalue vs threshold",
                psd_threshold(self.tol, max_abs),
                check.min_eigenvalue,
                check.psd,
            )],
        ))
    }
}

// ---------------------------------------------------------------- membership

fn atomic() -> String {
    "atomic".into()
}

fn parse_mode(mode: &str) -> std::result::Result<Mode, String> {
    mode.parse().map_err(|e: Error| format!("`mode`: {e}"))
}

fn check_p(p: f64) -> std::result::Result<(), String> {
    if p > 1.0 && p <= kfcalc_core::rkhs::MAX_EXPONENT {
        Ok(())
    } else {
        Err(format!(
            "`p` must lie in (1, {}], got {p}",
            kfcalc_core::rkhs::MAX_EXPONENT
        ))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MembershipParams {
    m: SetFnSpec,
    #[serde(default = "two")]
    p: f64,
    #[serde(default = "atomic")]
    mode: String,
    #[serde(default = "yes")]
    expect_member: bool,
    #[serde(default)]
    expected_constant: Option<f64>,
    #[serde(default = "tight")]
    tol: f64,
}

impl MembershipParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Membership, String> {
        check_p(self.p)?;
        check_tol(self.tol)?;
        Ok(Membership {
            m: self.m.build("m", ctx)?,
            p: self.p,
            mode: parse_mode(&self.mode)?,
            expect_member: self.expect_member,
            expected_constant: self.expected_constant,
            tol: self.tol,
        })
    }
}

struct Membership {
    m: AdditiveSetFunction,
    p: f64,
    mode: Mode,
    expect_member: bool,
    expected_constant: Option<f64>,
    tol: f64,
}

impl Experiment for Membership {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let report = membership_test(ctx.space, &self.m, self.p, self.mode)?;
        let mut checks = vec![Check::flag("member", self.expect_member, report.member)];
        if let Some(want) = self.expected_constant {
            checks.push(Check::relative("best constant", want, report.best_constant, self.tol));
        }
        Ok(Outcome::checked(
            json!({
                "member": report.member,
                "best_constant": num(report.best_constant),
                "mode": self.mode.to_string(),
                "witness": report.witness.iter().map(set_json).collect::<Vec<_>>(),
                "recovered_density": report.recovered_density.as_ref().map(density_json),
            }),
            checks,
        ))
    }
}

// ---------------------------------------------------------------- domination

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DominationParams {
    m: SetFnSpec,
    sets: Vec<Vec<usize>>,
    c: f64,
    #[serde(default = "psd_tol")]
    tol: f64,
    #[serde(default = "yes")]
    expect: bool,
}

impl DominationParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Domination, String> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(format!("`c` must be positive and finite, got {}", self.c));
        }
        check_tol(self.tol)?;
        Ok(Domination {
            m: self.m.build("m", ctx)?,
            sets: ctx.sets("sets", &self.sets)?,
            c: self.c,
            tol: self.tol,
            expect: self.expect,
        })
    }
}

struct Domination {
    m: AdditiveSetFunction,
    sets: Vec<MeasurableSet>,
    c: f64,
    tol: f64,
    expect: bool,
}

impl Experiment for Domination {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let (min_eig, max_abs) = domination_spectrum(ctx.space, &self.m, &self.sets, self.c)?;
        let dominated = min_eig >= psd_threshold(self.tol, max_abs);
        Ok(Outcome::checked(
            json!({ "dominated": dominated, "min_eigenvalue": num(min_eig), "max_abs_entry": num(max_abs) }),
            vec![Check::flag("dominated", self.expect, dominated)],
        ))
    }
}

// ---------------------------------------------------------------- derivative

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DerivativeParams {
    m: SetFnSpec,
    #[serde(default)]
    expected: Option<Vec<C>>,
    #[serde(default = "tight")]
    tol: f64,
}

impl DerivativeParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Derivative, String> {
        check_tol(self.tol)?;
        Ok(Derivative {
            m: self.m.build("m", ctx)?,
            expected: self.expected.map(|e| ctx.density("expected", &e)).transpose()?,
            tol: self.tol,
        })
    }
}

struct Derivative {
    m: AdditiveSetFunction,
    expected: Option<DensityVector>,
    tol: f64,
}

impl Experiment for Derivative {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let h = match nabla_of(ctx.space, &self.m) {
            Ok(h) => h,
            Err(Error::NotMember { witness }) => {
                return Ok(Outcome::checked(
                    json!({ "member": false, "witness": witness.iter().map(set_json).collect::<Vec<_>>() }),
                    vec![Check::flag("member", true, false)],
                ))
            }
            Err(e) => return Err(e),
        };
        let mut checks = vec![Check::flag("member", true, true)];
        if let Some(want) = &self.expected {
            for x in 0..ctx.space.len() {
                checks.extend(complex_checks(&format!("density at atom {x}"), want[x], h[x], self.tol));
            }
        }
        Ok(Outcome::checked(json!({ "member": true, "density": density_json(&h) }), checks))
    }
}

// ----------------------------------------------------------------- unitarity

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitarityParams {
    g: Vec<C>,
    #[serde(default)]
    sets: Option<Vec<Vec<usize>>>,
    #[serde(default = "tight")]
    tol: f64,
}

impl UnitarityParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Unitarity, String> {
        check_tol(self.tol)?;
        let sets = match self.sets {
            Some(s) => ctx.sets("sets", &s)?,
            None => (0..ctx.atoms()).map(|x| ctx.space.singleton(x)).collect(),
        };
        Ok(Unitarity {
            g: ctx.density("g", &self.g)?,
            sets,
            tol: self.tol,
        })
    }
}

struct Unitarity {
    g: DensityVector,
    sets: Vec<MeasurableSet>,
    tol: f64,
}

impl Experiment for Unitarity {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let space = ctx.space;
        let lifted = nabla_adjoint(space, &self.g)?;
        // read ∇*g back through its singleton values, then differentiate
        let atoms: Vec<Complex64> = (0..space.len())
            .map(|x| lifted.value(space, &space.singleton(x)))
            .collect::<Result<_>>()?;
        let back = nabla_of(space, &AdditiveSetFunction::from_atom_values(&atoms))?;
        let want = self.g.canonical(space);
        let mut checks = Vec::new();
        for x in 0..space.len() {
            checks.extend(complex_checks(&format!("∇∇*g at atom {x}"), want[x], back[x], self.tol));
        }
        let again = nabla_adjoint(space, &nabla_of(space, &lifted.to_set_function())?)?;
        for (k, a) in self.sets.iter().enumerate() {
            checks.extend(complex_checks(
                &format!("∇*∇M on set {k}"),
                lifted.value(space, a)?,
                again.value(space, a)?,
                self.tol,
            ));
        }
        Ok(Outcome::checked(json!({ "norm_sq": num(lifted.norm_sq()) }), checks))
    }
}

// ------------------------------------------------------------------- sobolev

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformGrid {
    lo: f64,
    hi: f64,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SobolevParams {
    #[serde(default)]
    points: Option<Vec<f64>>,
    #[serde(default)]
    grid: Option<UniformGrid>,
    #[serde(default)]
    values: Option<Vec<C>>,
    #[serde(default)]
    function: Option<FunctionSpec>,
    #[serde(default = "two")]
    p: f64,
    #[serde(default)]
    expected: Option<f64>,
    #[serde(default = "tight")]
    tol: f64,
}

impl SobolevParams {
    fn validate(self, _ctx: &LoadContext) -> std::result::Result<Sobolev, String> {
        check_p(self.p)?;
        check_tol(self.tol)?;
        let xs = match (self.points, self.grid) {
            (Some(p), None) => p,
            (None, Some(g)) => {
                if g.n == 0 || !(g.lo < g.hi) {
                    return Err("`grid` needs n ≥ 1 and lo < hi".into());
                }
                // i/n first, so [0, 1] grids hit the exact values i/n
                (0..=g.n)
                    .map(|i| g.lo + (g.hi - g.lo) * (i as f64 / g.n as f64))
                    .collect()
            }
            _ => return Err("give exactly one of `points` or `grid`".into()),
        };
        let fs = match (self.values, self.function) {
            (Some(v), None) => v.into_iter().map(|c| c.0).collect(),
            (None, Some(f)) => {
                let func = kfcalc_core::measure::build_density(&f.kind, &f.params)
                    .map_err(|e| format!("`function`: {e}"))?;
                xs.iter().map(|&x| Complex64::new(func.eval(x), 0.0)).collect()
            }
            _ => return Err("give exactly one of `values` or `function`".into()),
        };
        Ok(Sobolev {
            xs,
            fs,
            p: self.p,
            expected: self.expected,
            tol: self.tol,
        })
    }
}

struct Sobolev {
    xs: Vec<f64>,
    fs: Vec<Complex64>,
    p: f64,
    expected: Option<f64>,
    tol: f64,
}

impl Experiment for Sobolev {
    fn run(&self, _ctx: &RunContext) -> Result<Outcome> {
        let r = sobolev_membership(&self.xs, &self.fs, self.p)?;
        let checks = self
            .expected
            .map(|want| vec![Check::relative("criterion", want, r.criterion_value, self.tol)])
            .unwrap_or_default();
        Ok(Outcome::checked(
            json!({
                "criterion": num(r.criterion_value),
                "density_estimate": r.density_estimate.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            }),
            checks,
        ))
    }
}

// ----------------------------------------------------------------- cross_cov

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossCovParams {
    i: usize,
    j: usize,
    pairs: Vec<[Vec<usize>; 2]>,
    #[serde(default)]
    expected: Option<Vec<f64>>,
    #[serde(default = "tight")]
    tol: f64,
}

impl CrossCovParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<CrossCov, String> {
        check_tol(self.tol)?;
        let pairs = set_pairs(ctx, &self.pairs)?;
        if let Some(e) = self.expected.as_ref().filter(|e| e.len() != pairs.len()) {
            return Err(format!("`expected` has {} values for {} pairs", e.len(), pairs.len()));
        }
        Ok(CrossCov {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            pairs,
            expected: self.expected,
            tol: self.tol,
        })
    }
}

struct CrossCov {
    i: usize,
    j: usize,
    pairs: Vec<(MeasurableSet, MeasurableSet)>,
    expected: Option<Vec<f64>>,
    tol: f64,
}

impl Experiment for CrossCov {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let fam = ctx.family()?;
        let mut checks = Vec::new();
        let mut values = Vec::new();
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            let got = cross_cov(fam, self.i, self.j, a, b)?;
            let joint = expectation_product(
                &joint_ito(fam, self.i, &DensityVector::indicator(a))?,
                &joint_ito(fam, self.j, &DensityVector::indicator(b))?,
            )?;
            checks.push(Check::relative(format!("joint model pair {k}"), joint.re, got, self.tol));
            if let Some(e) = &self.expected {
                checks.push(Check::relative(format!("expected pair {k}"), e[k], got, self.tol));
            }
            values.push(num(got));
        }
        Ok(Outcome::checked(json!({ "cross_cov": values }), checks))
    }
}

// ------------------------------------------------------------- reversibility

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReversibilityParams {
    i: usize,
    j: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    #[serde(default = "tight")]
    tol: f64,
}

impl ReversibilityParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Reversibility, String> {
        check_tol(self.tol)?;
        Ok(Reversibility {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            a: ctx.set("a", &self.a)?,
            b: ctx.set("b", &self.b)?,
            tol: self.tol,
        })
    }
}

struct Reversibility {
    i: usize,
    j: usize,
    a: MeasurableSet,
    b: MeasurableSet,
    tol: f64,
}

impl Experiment for Reversibility {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let r = reversibility_check(ctx.family()?, self.i, self.j, &self.a, &self.b, self.tol)?;
        Ok(Outcome::checked(
            json!({ "lhs": num(r.lhs), "mid": num(r.mid), "rhs": num(r.rhs) }),
            vec![
                Check::relative("∫_A P(x,B) dμ_i", r.rhs, r.lhs, self.tol),
                Check::relative("∫_B Q(y,A) dμ_j", r.rhs, r.mid, self.tol),
                Check::flag("three-way agreement", true, r.pass),
            ],
        ))
    }
}

// ---------------------------------------------------------------- transition

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionParams {
    i: usize,
    j: usize,
    x: usize,
    b: Vec<usize>,
    #[serde(default)]
    expected: Option<f64>,
    #[serde(default = "tight")]
    tol: f64,
}

impl TransitionParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Transition, String> {
        check_tol(self.tol)?;
        Ok(Transition {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            x: ctx.atom("x", self.x)?,
            b: ctx.set("b", &self.b)?,
            expected: self.expected,
            tol: self.tol,
        })
    }
}

struct Transition {
    i: usize,
    j: usize,
    x: usize,
    b: MeasurableSet,
    expected: Option<f64>,
    tol: f64,
}

impl Experiment for Transition {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let fam = ctx.family()?;
        let value = transition_eval(fam, self.i, self.j, self.x, &self.b)?;
        // derivative of A ↦ E[W_A^(i) W_B^(j)] with respect to μ_i, at x
        let singleton = fam.reference().singleton(self.x);
        let derivative = cross_cov(fam, self.i, self.j, &singleton, &self.b)? / fam.atom_mass(self.i, self.x)?;
        let mut checks = vec![Check::relative("covariance derivative", derivative, value, self.tol)];
        if let Some(want) = self.expected {
            checks.push(Check::relative("expected", want, value, self.tol));
        }
        Ok(Outcome::checked(json!({ "value": num(value) }), checks))
    }
}

// --------------------------------------------------------------- singularity

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingularityParams {
    i: usize,
    j: usize,
    #[serde(default)]
    sets: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    tol: f64,
}

impl SingularityParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Singularity, String> {
        check_tol(self.tol)?;
        let sets = match self.sets {
            Some(s) => ctx.sets("sets", &s)?,
            None => (0..ctx.atoms()).map(|x| ctx.space.singleton(x)).collect(),
        };
        Ok(Singularity {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            sets,
            tol: self.tol,
        })
    }
}

struct Singularity {
    i: usize,
    j: usize,
    sets: Vec<MeasurableSet>,
    tol: f64,
}

impl Experiment for Singularity {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let fam = ctx.family()?;
        let singular = mutually_singular(fam, self.i, self.j)?;
        let independent = independence_check(fam, self.i, self.j, &self.sets, self.tol)?;
        Ok(Outcome::checked(
            json!({ "mutually_singular": singular, "uncorrelated": independent }),
            vec![Check::flag("singular iff uncorrelated", singular, independent)],
        ))
    }
}

// -------------------------------------------------------------- anticipating

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnticipatingParams {
    i: usize,
    j: usize,
    #[serde(default)]
    expect: Option<bool>,
}

impl AnticipatingParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Anticipating, String> {
        Ok(Anticipating {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            expect: self.expect,
        })
    }
}

struct Anticipating {
    i: usize,
    j: usize,
    expect: Option<bool>,
}

impl Experiment for Anticipating {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let fam = ctx.family()?;
        let ant = anticipating_check(fam, self.i, self.j)?;
        let proj = projection_identity(fam, self.i, self.j)?;
        let mut checks = vec![Check::flag("support inclusion iff projection identity", ant, proj)];
        if let Some(e) = self.expect {
            checks.push(Check::flag("anticipating", e, ant));
        }
        Ok(Outcome::checked(
            json!({ "anticipating": ant, "projection_identity": proj }),
            checks,
        ))
    }
}

// ---------------------------------------------------------------- chain_rule

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainRuleParams {
    i: usize,
    j: usize,
    k: usize,
    #[serde(default = "tight")]
    tol: f64,
    #[serde(default)]
    expect: Option<bool>,
}

impl ChainRuleParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<ChainRule, String> {
        check_tol(self.tol)?;
        Ok(ChainRule {
            i: ctx.measure_index("i", self.i)?,
            j: ctx.measure_index("j", self.j)?,
            k: ctx.measure_index("k", self.k)?,
            tol: self.tol,
            expect: self.expect,
        })
    }
}

struct ChainRule {
    i: usize,
    j: usize,
    k: usize,
    tol: f64,
    expect: Option<bool>,
}

impl Experiment for ChainRule {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let fam = ctx.family()?;
        let r = chain_rule_check(fam, self.i, self.j, self.k, self.tol)?;
        let support = chain_rule_support_condition(fam, self.i, self.j, self.k)?;
        let ant = anticipating_check(fam, self.j, self.k)?;
        let mut checks = vec![Check::flag("chain rule iff support condition", support, r.holds)];
        if let Some(e) = self.expect {
            checks.push(Check::flag("chain rule", e, r.holds));
        }
        Ok(Outcome::checked(
            json!({
                "holds": r.holds,
                "witness": r.witness.as_ref().map(|(x, b)| json!({ "x": x, "b": set_json(b) })),
                "support_condition": support,
                "anticipating": ant,
                // the chain rule depends on the first measure, anticipation does not
                "anticipation_differs": ant != r.holds,
            }),
            checks,
        ))
    }
}

// ---------------------------------------------------------------- invariance

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InvarianceParams {
    map: Vec<usize>,
    #[serde(default = "yes")]
    expect: bool,
}

impl InvarianceParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Invariance, String> {
        Ok(Invariance {
            sigma: endomorphism(ctx, self.map)?,
            expect: self.expect,
        })
    }
}

struct Invariance {
    sigma: Endomorphism,
    expect: bool,
}

impl Experiment for Invariance {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let (invariant, witness) = check_invariance(ctx.space, &self.sigma)?;
        Ok(Outcome::checked(
            json!({ "invariant": invariant, "witness": witness.as_ref().map(set_json) }),
            vec![Check::flag("invariant", self.expect, invariant)],
        ))
    }
}

// ------------------------------------------------------- composition_adjoint

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompositionParams {
    map: Vec<usize>,
    f: Vec<C>,
    g: Vec<C>,
    #[serde(default = "tight")]
    tol: f64,
}

impl CompositionParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Composition, String> {
        check_tol(self.tol)?;
        Ok(Composition {
            sigma: endomorphism(ctx, self.map)?,
            f: ctx.density("f", &self.f)?,
            g: ctx.density("g", &self.g)?,
            tol: self.tol,
        })
    }
}

struct Composition {
    sigma: Endomorphism,
    f: DensityVector,
    g: DensityVector,
    tol: f64,
}

impl Experiment for Composition {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let space = ctx.space;
        let sf = compose(space, &self.sigma, &self.f)?;
        let h = s_adjoint(space, &self.sigma, &self.g)?;
        let lhs = sf.inner(&self.g, space)?;
        let rhs = self.f.inner(&h, space)?;
        let mut checks = complex_checks("⟨Sf, g⟩ vs ⟨f, S*g⟩", lhs, rhs, self.tol).to_vec();
        checks.push(Check::relative("‖Sf‖² vs ‖f‖²", self.f.norm_sq(space)?, sf.norm_sq(space)?, self.tol));
        Ok(Outcome::checked(
            json!({ "composed": density_json(&sf), "adjoint": density_json(&h) }),
            checks,
        ))
    }
}

// --------------------------------------------------------- pushforward_bound

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PushforwardParams {
    map: Vec<usize>,
    g: Vec<C>,
    parts: Vec<Vec<usize>>,
    #[serde(default = "tight")]
    tol: f64,
}

impl PushforwardParams {
    fn validate(self, ctx: &LoadContext) -> std::result::Result<Pushforward, String> {
        check_tol(self.tol)?;
        let parts = ctx.sets("parts", &self.parts)?;
        kfcalc_core::measure::check_pairwise_disjoint(&parts).map_err(|e| format!("`parts`: {e}"))?;
        Ok(Pushforward {
            sigma: endomorphism(ctx, self.map)?,
            g: ctx.density("g", &self.g)?,
            parts,
            tol: self.tol,
        })
    }
}

struct Pushforward {
    sigma: Endomorphism,
    g: DensityVector,
    parts: Vec<MeasurableSet>,
    tol: f64,
}

impl Experiment for Pushforward {
    fn run(&self, ctx: &RunContext) -> Result<Outcome> {
        let m = pushforward_setfn(ctx.space, &self.sigma, &self.g)?;
        let lhs = partition_functional(ctx.space, &m, &self.parts, 2.0)?;
        let bound = self.g.norm_sq(ctx.space)?;
        Ok(Outcome::checked(
            json!({ "functional": num(lhs), "norm_sq": num(bound) }),
            vec![Check::new("Σ|M_g(A)|²/μ(A) ≤ ‖g‖²", bound, lhs, lhs <= bound * (1.0 + self.tol))],
        ))
    }
}
