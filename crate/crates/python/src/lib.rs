//! Python module `eddy`: meshes, Nédélec spaces, the reduced control
//! problem with its Wirtinger gradient, BFGS and the cylinder Bessel field.

use eddy_core::analytic::{bessel_i, ElectrodeParams};
use eddy_core::config::{constant_field, CVec3, Coefficient, ProblemConfig, C64};
use eddy_core::mesh::{
    generate_cube, generate_cylinder, parse_msh, write_msh, CylinderSpec, Point,
};
use eddy_core::study::convergence_level;
use eddy_core::wirtinger::{bfgs_minimize, BfgsOptions, CostReport, Objective};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::sync::Arc;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_err(e: eddy_core::Error) -> PyErr {
    match e {
        eddy_core::Error::Config(_)
        | eddy_core::Error::Dimension { .. }
        | eddy_core::Error::Mesh(_)
        | eddy_core::Error::NotSpd { .. }
        | eddy_core::Error::BesselDomain(_)
        | eddy_core::Error::OutsideDomain(_) => value_err(e),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn cvec(v: [C64; 3]) -> CVec3 {
    CVec3::new(v[0], v[1], v[2])
}

/// Tetrahedral mesh.
#[pyclass(frozen, module = "eddy")]
struct Mesh {
    inner: Arc<eddy_core::Mesh>,
}

#[pymethods]
impl Mesh {
    /// Structured cylinder mesh of refinement level `level`.
    #[staticmethod]
    #[pyo3(signature = (level, radius = 0.5, height = 1.0))]
    fn cylinder(level: usize, radius: f64, height: f64) -> PyResult<Self> {
        let mesh =
            generate_cylinder(&CylinderSpec::level(radius, height, level)).map_err(value_err)?;
        Ok(Self {
            inner: Arc::new(mesh),
        })
    }

    /// Unit cube split into `n^3` cells of six tetrahedra.
    #[staticmethod]
    fn cube(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(generate_cube(n).map_err(value_err)?),
        })
    }

    /// Parses Gmsh 2.2 ASCII text.
    #[staticmethod]
    fn from_msh(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(parse_msh(text.as_bytes()).map_err(value_err)?),
        })
    }

    fn to_msh(&self) -> String {
        write_msh(&self.inner)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.vertices().len()
    }

    #[getter]
    fn num_tets(&self) -> usize {
        self.inner.tets().len()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.edges().len()
    }

    #[getter]
    fn num_boundary_edges(&self) -> usize {
        self.inner.boundary_edges().len()
    }

    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner
            .vertices()
            .iter()
            .map(|p| [p.x, p.y, p.z])
            .collect()
    }

    fn tets(&self) -> Vec<[usize; 4]> {
        self.inner.tets().to_vec()
    }

    /// Vertex pairs of the boundary edges, in control-coefficient order.
    fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.inner
            .boundary_edges()
            .iter()
            .map(|b| self.inner.edges()[b.edge])
            .collect()
    }

    fn mesh_size(&self) -> PyResult<f64> {
        self.inner.mesh_size().map_err(value_err)
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, tets={})",
            self.num_vertices(),
            self.num_tets()
        )
    }
}

/// Nédélec space of order 0 or 1 on a mesh.
#[pyclass(frozen, module = "eddy")]
struct FeSpace {
    inner: Arc<eddy_core::FeSpace>,
}

#[pymethods]
impl FeSpace {
    #[new]
    #[pyo3(signature = (mesh, order = 0))]
    fn new(mesh: &Mesh, order: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(eddy_core::FeSpace::new(mesh.inner.clone(), order).map_err(core_err)?),
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn ndofs(&self) -> usize {
        self.inner.ndofs()
    }

    #[getter]
    fn num_boundary_dofs(&self) -> usize {
        self.inner.boundary_dofs().len()
    }
}

/// Physical data of the single cylindrical electrode.
#[pyclass(frozen, from_py_object, module = "eddy")]
#[derive(Clone, Copy)]
struct Electrode {
    inner: ElectrodeParams,
}

#[pymethods]
impl Electrode {
    #[new]
    #[pyo3(signature = (current = 1.0, omega = 1.0, mu = 1.0, sigma = 1.0, radius = 0.5, height = 1.0))]
    fn new(
        current: f64,
        omega: f64,
        mu: f64,
        sigma: f64,
        radius: f64,
        height: f64,
    ) -> PyResult<Self> {
        let inner = ElectrodeParams {
            current,
            omega,
            mu,
            sigma,
            radius,
            height,
        };
        inner.validate().map_err(core_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma(&self) -> C64 {
        self.inner.gamma()
    }

    /// Magnetic field at `(x, y, z)`.
    fn h(&self, x: f64, y: f64, z: f64) -> PyResult<[C64; 3]> {
        let v = self.inner.exact_h(&Point::new(x, y, z)).map_err(core_err)?;
        Ok([v[0], v[1], v[2]])
    }

    /// Electric field at `(x, y, z)`.
    fn e(&self, x: f64, y: f64, z: f64) -> PyResult<[C64; 3]> {
        let v = self.inner.exact_e(&Point::new(x, y, z)).map_err(core_err)?;
        Ok([v[0], v[1], v[2]])
    }

    /// Convergence study of the FE approximation of the field on the
    /// cylinder levels given; returns rows and the fitted slope.
    #[pyo3(signature = (levels, order = 0))]
    fn convergence_study<'py>(
        &self,
        py: Python<'py>,
        levels: Vec<usize>,
        order: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let p = self.inner;
        let config = p.problem_config(1e-3, 0.0);
        let exact = move |x: &Point| p.exact_h(x).unwrap_or_else(|_| CVec3::zeros());
        let curl = move |x: &Point| p.exact_curl_h(x).unwrap_or_else(|_| CVec3::zeros());
        let mut rows = Vec::new();
        for m in levels {
            let mesh = generate_cylinder(&CylinderSpec::level(p.radius, p.height, m))
                .map_err(value_err)?;
            rows.push(
                py.detach(|| convergence_level(Arc::new(mesh), order, &config, &exact, &curl))
                    .map_err(core_err)?,
            );
        }
        let study = eddy_core::study::ConvergenceStudy::from_rows(order, rows);
        let out = PyDict::new(py);
        out.set_item("h", study.rows.iter().map(|r| r.h).collect::<Vec<_>>())?;
        out.set_item(
            "ndofs",
            study.rows.iter().map(|r| r.ndofs).collect::<Vec<_>>(),
        )?;
        out.set_item(
            "error",
            study.rows.iter().map(|r| r.hcurl).collect::<Vec<_>>(),
        )?;
        out.set_item("slope", study.slope)?;
        Ok(out)
    }
}

fn cost_dict<'py>(py: Python<'py>, c: &CostReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("J", c.j)?;
    d.set_item("J1", c.j1)?;
    d.set_item("J2", c.j2)?;
    d.set_item("J3", c.j3)?;
    Ok(d)
}

/// Reduced boundary control problem `z ↦ J(S z, z)`.
#[pyclass(frozen, module = "eddy")]
struct ReducedProblem {
    inner: eddy_core::ReducedProblem,
}

#[pymethods]
impl ReducedProblem {
    /// Tracks the electrode field on `mesh`; coefficients come from the electrode.
    #[staticmethod]
    #[pyo3(signature = (mesh, order = 0, alpha = 1e-3, beta = 0.0, electrode = None))]
    fn bessel(
        mesh: &Mesh,
        order: usize,
        alpha: f64,
        beta: f64,
        electrode: Option<Electrode>,
    ) -> PyResult<Self> {
        let params = electrode.map(|e| e.inner).unwrap_or_default();
        Self::build(mesh, order, &params.problem_config(alpha, beta))
    }

    /// Constant coefficients, constant target and constant source.
    #[staticmethod]
    #[pyo3(signature = (mesh, order = 0, target = [C64::new(0.0, 0.0); 3], source = [C64::new(0.0, 0.0); 3],
                        mu = 1.0, kappa = 1.0, omega = 1.0, alpha = 1e-3, beta = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn constant(
        mesh: &Mesh,
        order: usize,
        target: [C64; 3],
        source: [C64; 3],
        mu: f64,
        kappa: f64,
        omega: f64,
        alpha: f64,
        beta: f64,
    ) -> PyResult<Self> {
        let config = ProblemConfig {
            mu: Coefficient::scalar(mu),
            kappa: Coefficient::scalar(kappa),
            omega,
            target: Some(constant_field(cvec(target))),
            source: Some(constant_field(cvec(source))),
            alpha,
            beta,
            ..ProblemConfig::default()
        };
        Self::build(mesh, order, &config)
    }

    /// Number of complex control coefficients.
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn cost<'py>(&self, py: Python<'py>, z: Vec<C64>) -> PyResult<Bound<'py, PyDict>> {
        let c = py
            .detach(|| self.inner.reduced_cost(&z))
            .map_err(core_err)?;
        cost_dict(py, &c)
    }

    /// Cost and Wirtinger gradient `G` (directional derivative `2 Re(ξ̄ᵀG)`).
    fn gradient<'py>(
        &self,
        py: Python<'py>,
        z: Vec<C64>,
    ) -> PyResult<(Bound<'py, PyDict>, Vec<C64>)> {
        let (c, g) = py
            .detach(|| self.inner.reduced_gradient(&z))
            .map_err(core_err)?;
        Ok((cost_dict(py, &c)?, g.g))
    }

    fn directional_derivative(&self, py: Python<'_>, z: Vec<C64>, xi: Vec<C64>) -> PyResult<f64> {
        py.detach(|| self.inner.directional_derivative(&z, &xi))
            .map_err(core_err)
    }

    /// Tangential-trace data `z` lifted to the full finite-element state.
    fn state(&self, py: Python<'_>, z: Vec<C64>) -> PyResult<Vec<C64>> {
        py.detach(|| self.inner.operator().solve_state(&z))
            .map_err(core_err)
    }

    /// BFGS from `z0` (zero by default) until `‖G‖ ≤ tol`.
    #[pyo3(signature = (z0 = None, tol = 1e-9, max_iter = 5000))]
    fn minimize<'py>(
        &self,
        py: Python<'py>,
        z0: Option<Vec<C64>>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let z0 = z0.unwrap_or_else(|| vec![C64::default(); self.inner.dim()]);
        let opts = BfgsOptions {
            tol,
            max_iter,
            ..BfgsOptions::default()
        };
        let res = py
            .detach(|| bfgs_minimize(&self.inner, &z0, &opts))
            .map_err(core_err)?;
        let d = PyDict::new(py);
        d.set_item("z", res.z)?;
        d.set_item("cost", cost_dict(py, &res.cost)?)?;
        d.set_item("grad_norm", res.grad_norm)?;
        d.set_item("iterations", res.iterations)?;
        d.set_item("evaluations", res.evaluations)?;
        d.set_item("converged", res.converged)?;
        Ok(d)
    }
}

impl ReducedProblem {
    fn build(mesh: &Mesh, order: usize, config: &ProblemConfig) -> PyResult<Self> {
        let space = Arc::new(eddy_core::FeSpace::new(mesh.inner.clone(), order).map_err(core_err)?);
        Ok(Self {
            inner: eddy_core::ReducedProblem::from_config(space, config).map_err(core_err)?,
        })
    }
}

/// Modified Bessel function `I_nu(x)` for `nu` in {0, 1}.
#[pyfunction(name = "bessel_i")]
fn py_bessel_i(nu: u32, x: C64) -> PyResult<C64> {
    bessel_i(nu, x).map_err(core_err)
}

#[pymodule]
fn eddy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<FeSpace>()?;
    m.add_class::<Electrode>()?;
    m.add_class::<ReducedProblem>()?;
    m.add_function(wrap_pyfunction!(py_bessel_i, m)?)?;
    Ok(())
}
