use crate::config::{Level, RunConfig};
use anyhow::{Context, Result};
use eddy_core::config::C64;
use eddy_core::export::vtk_legacy;
use eddy_core::mesh::write_msh;
use eddy_core::nedelec::FeSpace;
use eddy_core::study::{
    convergence_level, gradient_check, optimize_level, relative_gaps, solve_with_boundary_field,
    ConvergenceStudy, OptimizationRow,
};
use eddy_core::wirtinger::{history_csv, BfgsOptions, Objective, ReducedProblem};
use eddy_core::StateOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// A named pass/fail check recorded in `summary.json`; the process exits
/// nonzero when any check fails.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }
}

/// Result of a command: the summary body and the checks it ran.
pub struct Report {
    pub results: Value,
    pub checks: Vec<Check>,
}

fn timings_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("level,seconds\n");
    for (label, s) in rows {
        out.push_str(&format!("{label},{s:.3}\n"));
    }
    out
}

pub fn gen_mesh(levels: &[Level], out: &Output) -> Result<Report> {
    let mut meshes = Vec::new();
    let mut checks = Vec::new();
    for level in levels {
        let mesh = &level.mesh;
        let file = format!("mesh_{}.msh", level.label);
        out.write(&file, write_msh(mesh))?;
        let chi = mesh.boundary_euler_characteristic();
        checks.push(Check::new(
            format!("{}: closed boundary surface", level.label),
            chi == 2,
            format!("euler characteristic {chi}"),
        ));
        meshes.push(json!({
            "label": level.label,
            "file": file,
            "vertices": mesh.vertices().len(),
            "edges": mesh.edges().len(),
            "faces": mesh.faces().len(),
            "tets": mesh.tets().len(),
            "boundary_faces": mesh.boundary_faces().len(),
            "boundary_edges": mesh.boundary_edges().len(),
            "h": mesh.mesh_size()?,
            "volume": mesh.volume(),
            "boundary_area": mesh.boundary_area(),
        }));
    }
    Ok(Report {
        results: json!({ "meshes": meshes }),
        checks,
    })
}

pub fn validate(config: &RunConfig, levels: Vec<Level>, out: &Output) -> Result<Report> {
    let problem = config.problem.problem_config()?;
    let exact = config.problem.exact_field()?;
    let order = config.order;
    let labels: Vec<String> = levels.iter().map(|l| l.label.clone()).collect();
    let meshes: Vec<_> = levels.into_iter().map(|l| Arc::new(l.mesh)).collect();

    // Levels are independent; run them together and keep results in order.
    let results: Vec<_> = meshes
        .par_iter()
        .map(|m| convergence_level(m.clone(), order, &problem, &*exact.value, &*exact.curl))
        .collect();
    let mut rows = Vec::new();
    let mut failure = None;
    for (label, r) in labels.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some(anyhow::Error::new(e).context(format!("level {label}")));
                break;
            }
        }
    }
    let study = ConvergenceStudy::from_rows(order, rows);
    out.write("convergence.csv", study.csv())?;
    let times: Vec<_> = labels
        .iter()
        .cloned()
        .zip(study.rows.iter().map(|r| r.seconds))
        .collect();
    out.write("timings.csv", timings_csv(&times))?;
    if let Some(e) = failure {
        return Err(e);
    }

    if config.vtk {
        for (label, mesh) in labels.iter().zip(&meshes) {
            let space = Arc::new(FeSpace::new(mesh.clone(), order)?);
            let op = StateOperator::new(space.clone(), &problem)?;
            let u = solve_with_boundary_field(&op, &*exact.value, 2 * order + 4)?;
            out.write(
                &format!("solution_{label}.vtk"),
                vtk_legacy(&space, &u, "u"),
            )?;
        }
    }

    let max_error = study.rows.iter().map(|r| r.hcurl).fold(0.0, f64::max);
    let checks = if exact.interpolable {
        let scale = study.rows.iter().map(|r| r.h).fold(0.0, f64::max).max(1.0);
        vec![Check::new(
            "interpolable field is reproduced",
            max_error <= 1e-9 * scale,
            format!("max error {max_error:e}"),
        )]
    } else if study.rows.len() >= 2 {
        let expected = 0.9 * (order + 1) as f64;
        vec![Check::new(
            "convergence rate",
            study.slope >= expected,
            format!("slope {:.4}, required {expected:.2}", study.slope),
        )]
    } else {
        Vec::new()
    };
    let results = json!({
        "order": order,
        "levels": labels,
        "slope": finite_or_null(study.slope),
        "max_error": max_error,
        "rows": study.rows,
    });
    Ok(Report { results, checks })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Uniform samples in the unit square of the complex plane.
fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn grad_check(config: &RunConfig, levels: Vec<Level>, out: &Output) -> Result<Report> {
    let spec = config.grad_check;
    let n_levels = levels.len();
    let level = levels.into_iter().nth(spec.level).with_context(|| {
        format!(
            "grad_check.level {} out of range ({n_levels} levels)",
            spec.level
        )
    })?;
    let space = Arc::new(FeSpace::new(Arc::new(level.mesh), config.order)?);
    let problem = ReducedProblem::from_config(space, &config.problem.problem_config()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let z = random_vector(&mut rng, problem.dim());
    let xi = random_vector(&mut rng, problem.dim());
    let check = gradient_check(&problem, &z, &xi, spec.decades)?;
    out.write("gradcheck.csv", check.csv())?;

    let mismatch = (check.derivative - check.independent).abs()
        / check.derivative.abs().max(f64::MIN_POSITIVE);
    let checks = vec![
        Check::new(
            "decay slope",
            (spec.slope_min..=spec.slope_max).contains(&check.fit.slope),
            format!(
                "slope {:.4} over {:.1} decades",
                check.fit.slope, check.fit.decades
            ),
        ),
        Check::new(
            "pairing matches independent derivative",
            mismatch <= 1e-10,
            format!("relative mismatch {mismatch:e}"),
        ),
    ];
    let results = json!({
        "level": level.label,
        "order": config.order,
        "ncontrols": problem.dim(),
        "derivative": check.derivative,
        "independent_derivative": check.independent,
        "slope": check.fit.slope,
        "fitted_decades": check.fit.decades,
        "plateau": check.fit.plateau,
    });
    Ok(Report { results, checks })
}

pub fn optimize(config: &RunConfig, levels: Vec<Level>, out: &Output) -> Result<Report> {
    let problem = config.problem.problem_config()?;
    let opts: BfgsOptions = config.optimizer.into();
    let order = config.order;
    let results: Vec<_> = levels
        .par_iter()
        .map(|l| optimize_level(Arc::new(l.mesh.clone()), order, &problem, &opts))
        .collect();

    let mut rows: Vec<OptimizationRow> = Vec::new();
    let mut labels = Vec::new();
    let mut failure = None;
    for (level, r) in levels.iter().zip(results) {
        let (row, res) = match r {
            Ok(v) => v,
            Err(e) => {
                failure = Some(anyhow::Error::new(e).context(format!("level {}", level.label)));
                break;
            }
        };
        out.write(
            &format!("history_{}.csv", level.label),
            history_csv(&res.history),
        )?;
        let mesh = &level.mesh;
        let edges: Vec<[usize; 2]> = mesh
            .boundary_edges()
            .iter()
            .map(|b| mesh.edges()[b.edge])
            .collect();
        let dump = json!({
            "level": level.label,
            "boundary_edges": edges,
            "re": res.z.iter().map(|c| c.re).collect::<Vec<_>>(),
            "im": res.z.iter().map(|c| c.im).collect::<Vec<_>>(),
            "result": res,
        });
        out.write_json(&format!("control_{}.json", level.label), &dump)?;
        if config.vtk {
            let space = Arc::new(FeSpace::new(Arc::new(mesh.clone()), order)?);
            let u = StateOperator::new(space.clone(), &problem)?.solve_state(&res.z)?;
            out.write(
                &format!("state_{}.vtk", level.label),
                vtk_legacy(&space, &u, "u"),
            )?;
        }
        labels.push(level.label.clone());
        rows.push(row);
    }
    relative_gaps(&mut rows);
    let mut csv = String::from("level,");
    csv.push_str(OptimizationRow::csv_header());
    for (label, row) in labels.iter().zip(&rows) {
        csv.push_str(&format!("{label},{}", row.csv_line()));
    }
    out.write("optimization.csv", csv)?;
    let times: Vec<_> = labels
        .iter()
        .cloned()
        .zip(rows.iter().map(|r| r.seconds))
        .collect();
    out.write("timings.csv", timings_csv(&times))?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mut checks: Vec<Check> = labels
        .iter()
        .zip(&rows)
        .map(|(label, r)| {
            Check::new(
                format!("{label}: converged"),
                r.converged,
                format!("|G| = {:e} after {} iterations", r.grad_norm, r.iterations),
            )
        })
        .collect();
    if rows.len() >= 3 {
        let below = &rows[..rows.len() - 1];
        let decreasing =
            |f: fn(&OptimizationRow) -> f64| below.windows(2).all(|w| f(&w[1]) < f(&w[0]));
        checks.push(Check::new(
            "gap in J decreases",
            decreasing(|r| r.gap_j),
            "against the finest level",
        ));
        checks.push(Check::new(
            "gap in J1 decreases",
            decreasing(|r| r.gap_j1),
            "against the finest level",
        ));
    }
    let results = json!({ "order": order, "levels": labels, "rows": rows });
    Ok(Report { results, checks })
}
