//! Python bindings for `secular_forge`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use secular_forge::config::ExperimentConfig;
use secular_forge::dynamics::{integrate, track_elements, SystemConfig};
use secular_forge::kepler::{self, MassParameters};
use secular_forge::nf::compare_order6;
use secular_forge::secular::{self, SecularPoint};
use secular_forge::steepness::{self, SearchOptions};
use secular_forge::suite;

fn err(e: secular_forge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Root of `ζ − e sin ζ = rhs`.
#[pyfunction]
fn solve_kepler(e: f64, rhs: f64) -> PyResult<f64> {
    kepler::solve_kepler(e, rhs).map_err(err)
}

/// `−m³M²/(2Λ²)`.
#[pyfunction]
fn kepler_energy(big_lambda: f64, big_m: f64, m: f64) -> PyResult<f64> {
    kepler::kepler_energy(big_lambda, big_m, m).map_err(err)
}

/// Quadrupole secular term at a point, as `(quadrature, closed_form)`.
#[pyfunction]
#[pyo3(signature = (big_lambda, eta, xi, p, q, mbar = (1.0, 1.0), mu = 1e-3, nodes = 256))]
fn secular_f2(
    big_lambda: [f64; 2],
    eta: [f64; 2],
    xi: [f64; 2],
    p: f64,
    q: f64,
    mbar: (f64, f64),
    mu: f64,
    nodes: usize,
) -> PyResult<(f64, f64)> {
    let params = MassParameters::new(1.0, mu, vec![mbar.0, mbar.1]).map_err(err)?;
    let pt = SecularPoint { lambda: big_lambda, eta, xi, p, q };
    Ok((
        secular::double_average_f2(&pt, &params, nodes).map_err(err)?,
        secular::closed_form_f2(&pt, &params).map_err(err)?,
    ))
}

/// Exact order-6 normal form as `(monomial, leading, exact)` rows, with
/// `l1 = 1/Λ₁`, `l2 = 1/Λ₂`.
#[pyfunction]
fn normal_form() -> PyResult<Vec<(String, String, String)>> {
    let nf = suite::exact_normal_form(&ExperimentConfig::default()).map_err(err)?;
    Ok(nf
        .normal_part
        .terms
        .iter()
        .map(|(e, c)| {
            (
                secular_forge::series::action_label(e),
                c.leading().map(|l| l.to_string()).unwrap_or_else(|| "0".into()),
                c.to_string(),
            )
        })
        .collect())
}

/// Comparison against the displayed order-6 table, as
/// `(monomial, expected, computed, matches)` rows.
#[pyfunction]
fn order6_check() -> PyResult<Vec<(String, String, String, bool)>> {
    let nf = suite::exact_normal_form(&ExperimentConfig::default()).map_err(err)?;
    Ok(compare_order6(&nf.normal_part).into_iter().map(|c| (c.monomial, c.expected, c.computed, c.matches)).collect())
}

/// Three-jet verdicts for `draws` random parameter draws.
#[pyfunction]
#[pyo3(signature = (draws, seed = 0, spatial = false))]
fn three_jet_sweep(draws: usize, seed: u64, spatial: bool) -> PyResult<Vec<(String, f64)>> {
    let rows = steepness::sweep(spatial, draws, seed, &SearchOptions::default()).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.verdict, r.relative_residual)).collect())
}

/// Planar two-planet integration; returns conservation and drift diagnostics.
#[pyfunction]
#[pyo3(signature = (mu, a1, a2, e1, e2, periods, samples = 101))]
fn integrate_planar(mu: f64, a1: f64, a2: f64, e1: f64, e2: f64, periods: f64, samples: usize) -> PyResult<HashMap<String, f64>> {
    let mut cfg = SystemConfig::planar(mu, a1, a2, e1, e2, periods);
    cfg.samples = samples;
    let traj = integrate(&cfg).map_err(err)?;
    if let Some(r) = traj.aborted {
        return Err(PyValueError::new_err(r));
    }
    let rep = track_elements(&traj, &cfg.masses).map_err(err)?;
    Ok(HashMap::from([
        ("energy_rel_error".to_string(), rep.energy_rel_error),
        ("angular_momentum_rel_error".to_string(), rep.angular_momentum_rel_error),
        ("max_lambda1_drift".to_string(), rep.max_big_lambda_drift[0]),
        ("max_lambda2_drift".to_string(), rep.max_big_lambda_drift[1]),
        ("max_e1_drift".to_string(), rep.max_e_drift[0]),
        ("max_e2_drift".to_string(), rep.max_e_drift[1]),
        ("max_out_of_plane".to_string(), rep.max_out_of_plane),
    ]))
}

/// Runs a verification suite from a JSON config (empty string for defaults)
/// and returns `(id, name, passed, value, tolerance)` per criterion.
#[pyfunction]
#[pyo3(signature = (command, config_json = ""))]
fn run_suite(command: &str, config_json: &str) -> PyResult<Vec<(u32, String, Option<bool>, f64, f64)>> {
    let cfg = if config_json.is_empty() { ExperimentConfig::default() } else { ExperimentConfig::from_json(config_json).map_err(err)? };
    let out = match command {
        "verify-chart" => suite::run_chart(&cfg),
        "verify-secular" => suite::run_secular(&cfg),
        "birkhoff" => suite::run_birkhoff(&cfg, false),
        "reduce" => suite::run_reduce(&cfg),
        "steepness" => suite::run_steepness(&cfg),
        "integrate" => suite::run_integrate(&cfg),
        other => return Err(PyValueError::new_err(format!("unknown command {other}"))),
    }
    .map_err(err)?;
    Ok(out.criteria.into_iter().map(|c| (c.id, c.name, c.passed, c.value, c.tolerance)).collect())
}

#[pymodule]
fn secular_forge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve_kepler, m)?)?;
    m.add_function(wrap_pyfunction!(kepler_energy, m)?)?;
    m.add_function(wrap_pyfunction!(secular_f2, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(order6_check, m)?)?;
    m.add_function(wrap_pyfunction!(three_jet_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_planar, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
