//! Scenario files: a versioned JSON document naming a measure space, an
//! optional family of densities over it, and a list of experiments.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real).
//! Sets are sorted arrays of atom indices.

use std::collections::BTreeMap;
use std::path::Path;

use kfcalc_core::measure::{build_density, grid_space, MeasurableSet, MeasureSpace};
use kfcalc_core::multi::MeasureFamily;
use kfcalc_core::rkhs::{AdditiveSetFunction, SetTable};
use kfcalc_core::DensityVector;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::experiments::{op_kind, Experiment};
use crate::InputError;

pub const SCHEMA: &str = "kfcalc.scenario/1";

fn default_replicas() -> u64 {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_replicas")]
    replicas: u64,
    space: SpaceSpec,
    #[serde(default)]
    family: Option<FamilySpec>,
    experiments: Vec<ExperimentSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSpec {
    #[serde(default)]
    atoms: Option<Vec<AtomSpec>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    grid: Option<GridSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    label: String,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    lo: f64,
    hi: f64,
    cells: usize,
    density: FunctionSpec,
}

/// A named function from the density registry.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    densities: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSpec {
    #[serde(default)]
    id: Option<String>,
    op: String,
    #[serde(default = "empty_object")]
    params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// A loaded, validated experiment.
pub struct LoadedExperiment {
    pub id: String,
    pub op: &'static str,
    pub params: Value,
    pub experiment: Box<dyn Experiment>,
}

/// A fully validated scenario.
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub replicas: u64,
    pub space: MeasureSpace,
    pub family: Option<MeasureFamily>,
    pub experiments: Vec<LoadedExperiment>,
    /// SHA-256 of the file's bytes.
    pub digest: String,
}

/// What experiment parsers may consult while validating their inputs.
pub struct LoadContext<'a> {
    pub space: &'a MeasureSpace,
    pub family: Option<&'a MeasureFamily>,
}

impl LoadContext<'_> {
    pub fn atoms(&self) -> usize {
        self.space.len()
    }

    pub fn family(&self) -> Result<&MeasureFamily, String> {
        self.family
            .ok_or_else(|| "this operation requires a `family` in the scenario".to_string())
    }

    pub fn measure_index(&self, field: &str, i: usize) -> Result<usize, String> {
        let len = self.family()?.len();
        if i < len {
            Ok(i)
        } else {
            Err(format!("`{field}` = {i} but the family has {len} measures"))
        }
    }

    pub fn atom(&self, field: &str, x: usize) -> Result<usize, String> {
        if x < self.atoms() {
            Ok(x)
        } else {
            Err(format!("`{field}` = {x} but the space has {} atoms", self.atoms()))
        }
    }

    pub fn set(&self, field: &str, indices: &[usize]) -> Result<MeasurableSet, String> {
        if let Some(w) = indices.windows(2).find(|w| w[1] <= w[0]) {
            return Err(format!(
                "`{field}` must be a sorted array of distinct atom indices ({} then {})",
                w[0], w[1]
            ));
        }
        MeasurableSet::from_indices(self.atoms(), indices.iter().copied())
            .map_err(|e| format!("`{field}`: {e}"))
    }

    pub fn sets(&self, field: &str, sets: &[Vec<usize>]) -> Result<Vec<MeasurableSet>, String> {
        sets.iter()
            .enumerate()
            .map(|(k, s)| self.set(&format!("{field}[{k}]"), s))
            .collect()
    }

    pub fn density(&self, field: &str, values: &[C]) -> Result<DensityVector, String> {
        if values.len() != self.atoms() {
            return Err(format!(
                "`{field}` has {} entries but the space has {} atoms",
                values.len(),
                self.atoms()
            ));
        }
        DensityVector::new(values.iter().map(|c| c.0).collect()).map_err(|e| format!("`{field}`: {e}"))
    }
}

/// A complex number written as `[re, im]` or as a bare real.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(from = "ComplexRepr")]
pub struct C(pub Complex64);

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for C {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(x) => C(Complex64::new(x, 0.0)),
            ComplexRepr::Pair([re, im]) => C(Complex64::new(re, im)),
        }
    }
}

/// An additive set function, given by exactly one of: the density `h` of
/// `M = ∫h dμ`, the values of `M` on singletons, or explicit entries.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFnSpec {
    #[serde(default)]
    pub density: Option<Vec<C>>,
    #[serde(default)]
    pub atoms: Option<Vec<C>>,
    #[serde(default)]
    pub table: Option<Vec<TableEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub set: Vec<usize>,
    pub value: C,
}

impl SetFnSpec {
    pub fn build(&self, field: &str, ctx: &LoadContext) -> Result<AdditiveSetFunction, String> {
        match (&self.density, &self.atoms, &self.table) {
            (Some(h), None, None) => {
                let h = ctx.density(&format!("{field}.density"), h)?;
                let m: Vec<Complex64> = (0..ctx.atoms()).map(|x| h[x] * ctx.space.weight(x)).collect();
                Ok(AdditiveSetFunction::from_atom_values(&m))
            }
            (None, Some(values), None) => {
                let v = ctx.density(&format!("{field}.atoms"), values)?;
                Ok(AdditiveSetFunction::from_atom_values(v.values()))
            }
            (None, None, Some(entries)) => {
                let mut table = SetTable::new();
                for (k, e) in entries.iter().enumerate() {
                    let set = ctx.set(&format!("{field}.table[{k}].set"), &e.set)?;
                    table
                        .insert(set, e.value.0)
                        .map_err(|err| format!("`{field}.table[{k}]`: {err}"))?;
                }
                Ok(AdditiveSetFunction::Table(table))
            }
            _ => Err(format!(
                "`{field}` needs exactly one of `density`, `atoms` or `table`"
            )),
        }
    }
}

fn build_space(spec: &SpaceSpec) -> Result<MeasureSpace, String> {
    match (&spec.atoms, &spec.weights, &spec.grid) {
        (Some(atoms), None, None) => {
            MeasureSpace::new(atoms.iter().map(|a| (a.label.clone(), a.weight))).map_err(|e| format!("`space.atoms`: {e}"))
        }
        (None, Some(w), None) => MeasureSpace::from_weights(w).map_err(|e| format!("`space.weights`: {e}")),
        (None, None, Some(g)) => {
            let density = build_density(&g.density.kind, &g.density.params)
                .map_err(|e| format!("`space.grid.density`: {e}"))?;
            grid_space(g.lo, g.hi, g.cells, density.as_ref()).map_err(|e| format!("`space.grid`: {e}"))
        }
        _ => Err("`space` needs exactly one of `atoms`, `weights` or `grid`".into()),
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let bytes = std::fs::read(path)
            .map_err(|e| InputError::new(format!("cannot read {}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::from_bytes(&bytes, &stem)
    }

    pub fn from_bytes(bytes: &[u8], default_name: &str) -> Result<Self, InputError> {
        let file: ScenarioFile =
            serde_json::from_slice(bytes).map_err(|e| InputError::new(format!("scenario: {e}")))?;
        if file.schema != SCHEMA {
            return Err(InputError::new(format!(
                "`schema`: expected \"{SCHEMA}\", found \"{}\"",
                file.schema
            )));
        }
        let space = build_space(&file.space).map_err(InputError::new)?;
        let family = file
            .family
            .map(|f| {
                MeasureFamily::new(space.clone(), f.densities).map_err(|e| InputError::new(format!("`family.densities`: {e}")))
            })
            .transpose()?;
        let ctx = LoadContext {
            space: &space,
            family: family.as_ref(),
        };
        let mut experiments = Vec::with_capacity(file.experiments.len());
        for (k, spec) in file.experiments.into_iter().enumerate() {
            let kind = op_kind(&spec.op).ok_or_else(|| {
                InputError::new(format!("`experiments[{k}].op`: unknown operation `{}`", spec.op))
            })?;
            let experiment = (kind.parse)(&spec.params, &ctx).map_err(|e| {
                InputError::new(format!("`experiments[{k}].params` (op `{}`): {e}", kind.name))
            })?;
            experiments.push(LoadedExperiment {
                id: spec.id.unwrap_or_else(|| format!("{}-{k}", kind.name)),
                op: kind.name,
                params: spec.params,
                experiment,
            });
        }
        Ok(Scenario {
            name: file.name.unwrap_or_else(|| default_name.to_string()),
            seed: file.seed,
            replicas: file.replicas,
            space,
            family,
            experiments,
            digest: crate::report::sha256_hex(bytes),
        })
    }
}

/// Deserializes `params` into `T`, mapping serde's message (which names the
/// offending field) into a plain string.
pub fn parse_params<T: serde::de::DeserializeOwned>(params: &Value) -> Result<T, String> {
    T::deserialize(params).map_err(|e| e.to_string())
}
