//! JSON run configuration.
//!
//! ```json
//! {
//!   "mesh": { "cylinder": { "radius": 0.5, "height": 1.0, "levels": [1, 2, 3] } },
//!   "order": 0,
//!   "problem": { "field": { "bessel": { "current": 1.0, "omega": 1.0, "mu": 1.0,
//!                "sigma": 1.0, "radius": 0.5, "height": 1.0 } }, "alpha": 1e-3 },
//!   "seed": 7
//! }
//! ```

use anyhow::{bail, ensure, Context, Result};
use eddy_core::analytic::ElectrodeParams;
use eddy_core::config::{constant_field, CVec3, Coefficient, ProblemConfig, VectorField, C64};
use eddy_core::mesh::{generate_cube, generate_cylinder, parse_msh, CylinderSpec, Mesh};
use eddy_core::wirtinger::BfgsOptions;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GenMesh,
    Validate,
    GradCheck,
    Optimize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must agree with the subcommand on the command line.
    #[serde(default)]
    pub command: Option<Command>,
    pub mesh: MeshSource,
    #[serde(default)]
    pub order: usize,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub grad_check: GradCheckSpec,
    /// Used when `--out` is not given.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Write legacy VTK files of the computed fields.
    #[serde(default)]
    pub vtk: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    /// Structured cylinder family; level `m` has `n_r = m`, 6 sectors, `n_z = 2m`.
    Cylinder {
        #[serde(default = "half")]
        radius: f64,
        #[serde(default = "one")]
        height: f64,
        levels: Vec<usize>,
    },
    /// Unit cube split into `n^3` cells of six tets each.
    Cube { levels: Vec<usize> },
    /// Gmsh 2.2 ASCII files, coarsest first. Relative paths are resolved
    /// against the directory of the config file.
    Files(Vec<PathBuf>),
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

/// A named mesh of a family.
pub struct Level {
    pub label: String,
    pub mesh: Mesh,
}

impl MeshSource {
    pub fn levels(&self, base: &Path) -> Result<Vec<Level>> {
        let out: Vec<Level> = match self {
            Self::Cylinder {
                radius,
                height,
                levels,
            } => levels
                .iter()
                .map(|&m| {
                    ensure!(m >= 1, "cylinder level must be at least 1");
                    let mesh = generate_cylinder(&CylinderSpec::level(*radius, *height, m))?;
                    Ok(Level {
                        label: format!("m{m}"),
                        mesh,
                    })
                })
                .collect::<Result<_>>()?,
            Self::Cube { levels } => levels
                .iter()
                .map(|&n| {
                    Ok(Level {
                        label: format!("n{n}"),
                        mesh: generate_cube(n)?,
                    })
                })
                .collect::<Result<_>>()?,
            Self::Files(paths) => paths
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let path = base.join(p);
                    let bytes = std::fs::read(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let mesh =
                        parse_msh(&bytes).with_context(|| format!("parsing {}", path.display()))?;
                    Ok(Level {
                        label: format!("f{i}"),
                        mesh,
                    })
                })
                .collect::<Result<_>>()?,
        };
        ensure!(!out.is_empty(), "the mesh source lists no levels");
        Ok(out)
    }
}

/// Complex 3-vector written as `[[re, im], [re, im], [re, im]]`.
pub type ComplexVec = [[f64; 2]; 3];

pub fn to_cvec(v: &ComplexVec) -> CVec3 {
    CVec3::new(
        C64::new(v[0][0], v[0][1]),
        C64::new(v[1][0], v[1][1]),
        C64::new(v[2][0], v[2][1]),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Field of the single cylindrical electrode: the state coefficients are
    /// taken from the electrode (curl coefficient σ, mass coefficient μ).
    Bessel(ElectrodeParams),
    /// Constant field `c` with the matching source `iωκc`.
    Constant(ComplexVec),
    /// Target `u_d = 0`.
    Zero,
}

/// Scalar or row-major symmetric 3x3 tensor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tensor {
    Scalar(f64),
    Matrix([[f64; 3]; 3]),
}

impl Tensor {
    fn coefficient(&self) -> Coefficient {
        match self {
            Self::Scalar(s) => Coefficient::scalar(*s),
            Self::Matrix(m) => Coefficient::Constant(Matrix3::from_fn(|i, j| m[i][j])),
        }
    }

    fn matrix(&self) -> Matrix3<f64> {
        match self.coefficient() {
            Coefficient::Constant(m) => m,
            Coefficient::Field(_) => unreachable!("tensors from the config are constant"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "zero_field")]
    pub field: FieldSpec,
    /// Curl coefficient. Not allowed with a Bessel field.
    #[serde(default)]
    pub mu: Option<Tensor>,
    /// Mass coefficient. Not allowed with a Bessel field.
    #[serde(default)]
    pub kappa: Option<Tensor>,
    #[serde(default)]
    pub omega: Option<f64>,
    /// Constant source current; replaces the source implied by `field`.
    #[serde(default)]
    pub source: Option<ComplexVec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub quad_degree: Option<usize>,
}

fn zero_field() -> FieldSpec {
    FieldSpec::Zero
}

fn default_alpha() -> f64 {
    1e-3
}

fn default_solver_tol() -> f64 {
    1e-10
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            field: FieldSpec::Zero,
            mu: None,
            kappa: None,
            omega: None,
            source: None,
            alpha: default_alpha(),
            beta: 0.0,
            solver_tol: default_solver_tol(),
            quad_degree: None,
        }
    }
}

/// Known solution used by `validate`.
pub struct ExactField {
    pub value: VectorField,
    pub curl: VectorField,
    /// Whether the field lies in every discrete space (errors should vanish).
    pub interpolable: bool,
}

impl ProblemSpec {
    pub fn problem_config(&self) -> Result<ProblemConfig> {
        let mut config = match &self.field {
            FieldSpec::Bessel(params) => {
                if self.mu.is_some() || self.kappa.is_some() || self.omega.is_some() {
                    bail!(
                        "mu, kappa and omega come from the electrode parameters of a Bessel field"
                    );
                }
                params.validate()?;
                params.problem_config(self.alpha, self.beta)
            }
            FieldSpec::Constant(_) | FieldSpec::Zero => {
                let c = self.constant().unwrap_or_else(CVec3::zeros);
                let kappa = self.kappa.clone().unwrap_or(Tensor::Scalar(1.0));
                let omega = self.omega.unwrap_or(1.0);
                let source = kappa.matrix().map(C64::from) * c * C64::new(0.0, omega);
                ProblemConfig {
                    mu: self
                        .mu
                        .as_ref()
                        .unwrap_or(&Tensor::Scalar(1.0))
                        .coefficient(),
                    kappa: kappa.coefficient(),
                    omega,
                    source: (source != CVec3::zeros()).then(|| constant_field(source)),
                    target: Some(constant_field(c)),
                    alpha: self.alpha,
                    beta: self.beta,
                    ..ProblemConfig::default()
                }
            }
        };
        if let Some(s) = &self.source {
            config.source = Some(constant_field(to_cvec(s)));
        }
        config.solver_tol = self.solver_tol;
        config.quad_degree = self.quad_degree;
        config.validate()?;
        Ok(config)
    }

    fn constant(&self) -> Option<CVec3> {
        match &self.field {
            FieldSpec::Constant(v) => Some(to_cvec(v)),
            _ => None,
        }
    }

    /// The state solution when the boundary data are its own trace.
    pub fn exact_field(&self) -> Result<ExactField> {
        ensure!(
            self.source.is_none(),
            "validate needs a known solution; remove the explicit source"
        );
        Ok(match &self.field {
            FieldSpec::Bessel(params) => {
                let p = *params;
                ExactField {
                    value: Arc::new(move |x| p.exact_h(x).unwrap_or_else(|_| CVec3::zeros())),
                    curl: Arc::new(move |x| p.exact_curl_h(x).unwrap_or_else(|_| CVec3::zeros())),
                    interpolable: false,
                }
            }
            FieldSpec::Constant(_) | FieldSpec::Zero => ExactField {
                value: constant_field(self.constant().unwrap_or_else(CVec3::zeros)),
                curl: constant_field(CVec3::zeros()),
                interpolable: true,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub c1: f64,
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let d = BfgsOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            c1: d.c1,
            c2: d.c2,
            max_line_search: d.max_line_search,
        }
    }
}

impl From<OptimizerSpec> for BfgsOptions {
    fn from(s: OptimizerSpec) -> Self {
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            c1: s.c1,
            c2: s.c2,
            max_line_search: s.max_line_search,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradCheckSpec {
    /// Index into the mesh levels.
    pub level: usize,
    /// Steps `t = 10^-1 … 10^-decades`.
    pub decades: usize,
    /// Accepted range of the fitted decay slope.
    pub slope_min: f64,
    pub slope_max: f64,
}

impl Default for GradCheckSpec {
    fn default() -> Self {
        Self {
            level: 0,
            decades: 12,
            slope_min: 0.8,
            slope_max: 1.2,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"mesh": {"cube": {"levels": [1]}}}"#).unwrap();
        assert_eq!(c.order, 0);
        assert!(matches!(c.problem.field, FieldSpec::Zero));
        assert_eq!(c.optimizer.tol, 1e-9);
        assert_eq!(c.grad_check.decades, 12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"mesh": {"cube": {"levels": [1]}}, "oder": 1}"#
        )
        .is_err());
    }

    #[test]
    fn bessel_field_refuses_explicit_coefficients() {
        let spec: ProblemSpec = serde_json::from_str(
            r#"{"field": {"bessel": {"current": 1, "omega": 1, "mu": 1, "sigma": 1, "radius": 0.5, "height": 1}}, "omega": 2}"#,
        )
        .unwrap();
        assert!(spec.problem_config().is_err());
    }

    #[test]
    fn constant_field_gets_matching_source() {
        let spec: ProblemSpec = serde_json::from_str(
            r#"{"field": {"constant": [[1, 0], [0, 0], [0, 2]]}, "kappa": 3, "omega": 2}"#,
        )
        .unwrap();
        let config = spec.problem_config().unwrap();
        let s = config.source_at(&eddy_core::mesh::Point::zeros());
        assert_eq!(
            s,
            CVec3::new(C64::new(0.0, 6.0), C64::default(), C64::new(-12.0, 0.0))
        );
        assert!(spec.exact_field().unwrap().interpolable);
    }

    #[test]
    fn tensors_parse_as_scalar_or_matrix() {
        let t: Tensor = serde_json::from_str("2.5").unwrap();
        assert_eq!(t.matrix(), Matrix3::identity() * 2.5);
        let t: Tensor = serde_json::from_str("[[2, 0, 0], [0, 3, 0], [0, 0, 4]]").unwrap();
        assert_eq!(
            t.matrix(),
            Matrix3::from_diagonal(&nalgebra::Vector3::new(2.0, 3.0, 4.0))
        );
    }

    #[test]
    fn shipped_configs_parse() {
        for text in [
            include_str!("../../../configs/gen_mesh.json"),
            include_str!("../../../configs/validate_bessel.json"),
            include_str!("../../../configs/grad_check.json"),
            include_str!("../../../configs/optimize_bessel.json"),
        ] {
            let c: RunConfig = serde_json::from_str(text).unwrap();
            c.problem.problem_config().unwrap();
        }
    }
}
