//! Experiment configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! name = "sphere_sweep"
//! lambdas = [1.5, 2.0]
//! methods = ["quadrature", "series"]
//! resolution = 3
//! seed = 7
//!
//! [model]
//! family = "space_form"
//! dim = 3
//! curvature = 1.0
//!
//! [radii]
//! start = 0.2
//! levels = 4
//!
//! [outputs]
//! dir = "out"
//! plots = true
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use geocap_core::metric::Generator;
use geocap_core::{CurvatureTensor, MetricModel, Resolution, Warp};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Random validation points drawn per model.
pub const VALIDATION_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Series,
    Variational,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::Series => "series",
            Method::Variational => "variational",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpKind {
    Sin,
    Sinh,
    Linear,
    Quintic,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    SpaceForm {
        dim: usize,
        curvature: f64,
    },
    WarpedProduct {
        dim: usize,
        warp: WarpKind,
        /// Curvature at the center for `sin`/`sinh`, the quintic coefficient for `quintic`.
        #[serde(default)]
        parameter: f64,
    },
    CurvaturePolynomial {
        dim: usize,
        /// `(i, k, j, l, value)`, zero-based; closed under the curvature symmetries.
        generators: Vec<Generator>,
        #[serde(default)]
        valid_radius: Option<f64>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> geocap_core::Result<MetricModel> {
        match self {
            ModelSpec::SpaceForm { dim, curvature } => MetricModel::space_form(*dim, *curvature),
            ModelSpec::WarpedProduct { dim, warp, parameter } => {
                let warp = match warp {
                    WarpKind::Sin => Warp::Sin { curvature: *parameter },
                    WarpKind::Sinh => Warp::Sinh { curvature: *parameter },
                    WarpKind::Linear => Warp::Linear,
                    WarpKind::Quintic => Warp::Quintic { coefficient: *parameter },
                };
                MetricModel::warped_product(*dim, warp)
            }
            ModelSpec::CurvaturePolynomial { dim, generators, valid_radius } => {
                let tensor = CurvatureTensor::from_generators(*dim, generators)?;
                MetricModel::curvature_polynomial(tensor, *valid_radius)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RadiiSpec {
    List(Vec<f64>),
    /// `start · 2^{−k}` for `k = 0..levels`.
    Dyadic { start: f64, levels: usize },
}

impl RadiiSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RadiiSpec::List(v) => v.clone(),
            RadiiSpec::Dyadic { start, levels } => (0..*levels).map(|k| start * 0.5f64.powi(k as i32)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Defaults to `<name>.csv`.
    #[serde(default)]
    pub csv: Option<String>,
    /// Defaults to `<name>.json`.
    #[serde(default)]
    pub json: Option<String>,
    #[serde(default)]
    pub plots: bool,
    #[serde(default)]
    pub field_dumps: Option<FieldFormat>,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), csv: None, json: None, plots: false, field_dumps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSpec,
    pub lambdas: Vec<f64>,
    pub radii: RadiiSpec,
    pub methods: BTreeSet<Method>,
    /// Solver level; see [`Resolution::level`].
    #[serde(default)]
    pub resolution: Option<u32>,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

/// A config that parsed and validated, with its model built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub model: MetricModel,
    pub radii: Vec<f64>,
    pub resolution: Resolution,
}

impl Experiment {
    pub fn csv_path(&self) -> PathBuf {
        let name = self.spec.outputs.csv.clone().unwrap_or_else(|| format!("{}.csv", self.spec.name));
        self.spec.outputs.dir.join(name)
    }

    pub fn json_path(&self) -> PathBuf {
        let name = self.spec.outputs.json.clone().unwrap_or_else(|| format!("{}.json", self.spec.name));
        self.spec.outputs.dir.join(name)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn parse(text: &str) -> Result<ExperimentSpec, CliError> {
    toml::from_str(text).map_err(|e| invalid(format!("config does not parse: {e}")))
}

pub fn load(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

impl ExperimentSpec {
    /// Checks every invariant and builds the model. `level` overrides the
    /// configured resolution.
    pub fn validate(self, level: Option<u32>) -> Result<Experiment, CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid(format!("name {:?} is not a plain file stem", self.name)));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("no lambdas given"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 1.0 && l.is_finite())) {
            return Err(invalid(format!("lambda must exceed 1, got {l}")));
        }
        if self.methods.is_empty() {
            return Err(invalid("no methods given"));
        }
        let mut radii = self.radii.values();
        if radii.is_empty() {
            return Err(invalid("no radii given"));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(invalid(format!("radius must be positive, got {r}")));
        }
        radii.sort_by(|a, b| b.total_cmp(a));
        if radii.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("radii must be distinct"));
        }
        let model = self.model.build().map_err(|e| invalid(format!("model rejected: {e}")))?;
        let diag = model.validate_with_seed(self.seed, VALIDATION_SAMPLES);
        if !diag.accepted() {
            return Err(invalid(format!("model fails validation, worst violation {:e}", diag.worst_violation)));
        }
        let max_lambda = self.lambdas.iter().cloned().fold(f64::MIN, f64::max);
        let max_r = radii.iter().cloned().fold(f64::MIN, f64::max);
        if max_r * max_lambda > model.validity_radius() {
            return Err(invalid(format!(
                "outer radius {} exceeds the validity radius {} of {model}",
                max_r * max_lambda,
                model.validity_radius()
            )));
        }
        if self.methods.contains(&Method::Quadrature) && !model.is_rotationally_symmetric() {
            return Err(invalid(format!("quadrature needs a rotationally symmetric model, {model} is not")));
        }
        if self.methods.contains(&Method::Variational) && model.dim() != 3 {
            return Err(invalid(format!("variational solves need dimension 3, got {}", model.dim())));
        }
        let resolution = level.or(self.resolution).map(Resolution::level).unwrap_or_default();
        if resolution.coarsened().is_none() {
            return Err(invalid(format!("resolution {resolution} has no coarse companion")));
        }
        Ok(Experiment { spec: self, model, radii, resolution })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"
        name = "s3"
        lambdas = [2.0, 1.5]
        methods = ["quadrature"]
        [model]
        family = "space_form"
        dim = 3
        curvature = 1
        [radii]
        start = 0.2
        levels = 4
    "#;

    #[test]
    fn parses_dyadic_radii() {
        let spec = parse(SPHERE).unwrap();
        assert_eq!(spec.radii.values(), vec![0.2, 0.1, 0.05, 0.025]);
        let exp = spec.validate(None).unwrap();
        assert_eq!(exp.model.scalar_curvature(), 6.0);
        assert_eq!(exp.resolution, Resolution::default());
        assert_eq!(exp.csv_path(), PathBuf::from("./s3.csv"));
    }

    #[test]
    fn parses_generators_and_lists() {
        let spec = parse(
            r#"
            name = "sxr"
            lambdas = [2]
            radii = [0.3, 0.1]
            methods = ["variational", "series"]
            resolution = 2
            [model]
            family = "curvature_polynomial"
            dim = 3
            generators = [[0, 1, 0, 1, 1.0]]
            "#,
        )
        .unwrap();
        let exp = spec.validate(Some(1)).unwrap();
        assert_eq!(exp.model.scalar_curvature(), 2.0);
        assert_eq!(exp.resolution, Resolution::level(1));
        assert_eq!(exp.spec.methods.iter().collect::<Vec<_>>(), vec![&Method::Series, &Method::Variational]);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_lambda = SPHERE.replace("[2.0, 1.5]", "[0.9]");
        assert!(matches!(parse(&bad_lambda).unwrap().validate(None), Err(CliError::Validation(_))));
        let too_big = SPHERE.replace("start = 0.2", "start = 1.0");
        assert!(matches!(parse(&too_big).unwrap().validate(None), Err(CliError::Validation(_))));
        let unknown = SPHERE.replace("\"quadrature\"", "\"monte_carlo\"");
        assert!(matches!(parse(&unknown), Err(CliError::Validation(_))));
        let hyper4 = SPHERE.replace("dim = 3", "dim = 4").replace("\"quadrature\"", "\"variational\"");
        assert!(matches!(parse(&hyper4).unwrap().validate(None), Err(CliError::Validation(_))));
    }
}
