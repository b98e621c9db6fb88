use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use constellation_spares::optimizer::{self, ProblemKind};
use constellation_spares::orbital::{nodal_precession_rate, CircularOrbit, EarthConstants};
use constellation_spares::scenario::ScenarioFile;
use constellation_spares::simulator::{self, SimConfig};
use constellation_spares::system::{self, SingleChannelPolicy};
use constellation_spares::units::TimeUnit;
use constellation_spares::Error;

create_exception!(constellation_spares_py, NoFeasibleSolutionError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(msg) => PyValueError::new_err(msg),
        Error::NoFeasibleSolution { best_violation } => {
            NoFeasibleSolutionError::new_err(format!("no feasible solution; best violation {best_violation:e}"))
        }
        other => PyArithmeticError::new_err(other.to_string()),
    }
}

/// Serialized through JSON so nested results arrive as plain dicts and lists.
fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Scenario", skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioFile,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ScenarioFile::from_json(text).map(|inner| PyScenario { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        ScenarioFile::load(&path).map(|inner| PyScenario { inner }).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn policy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.policy())
    }

    /// Copy with some policy fields replaced.
    #[pyo3(signature = (*, r1=None, r2=None, q1=None, q2=None, alpha_w=None, k_r=None, k_q=None, n_parking=None, h_parking_km=None, h_s=None))]
    #[allow(clippy::too_many_arguments)]
    fn with_policy(
        &self,
        r1: Option<i32>,
        r2: Option<i32>,
        q1: Option<u32>,
        q2: Option<u32>,
        alpha_w: Option<f64>,
        k_r: Option<u32>,
        k_q: Option<u32>,
        n_parking: Option<u32>,
        h_parking_km: Option<f64>,
        h_s: Option<f64>,
    ) -> PyResult<Self> {
        let mut f = self.inner.clone();
        let p = &mut f.policy;
        p.r1 = r1.unwrap_or(p.r1);
        p.r2 = r2.or(p.r2);
        p.q1 = q1.unwrap_or(p.q1);
        p.q2 = q2.or(p.q2);
        p.alpha_w = alpha_w.or(p.alpha_w);
        p.k_r = k_r.unwrap_or(p.k_r);
        p.k_q = k_q.unwrap_or(p.k_q);
        f.parking.n_parking = n_parking.unwrap_or(f.parking.n_parking);
        f.parking.h_parking_km = h_parking_km.unwrap_or(f.parking.h_parking_km);
        f.costs.h_s_musd_per_sat_year = h_s.unwrap_or(f.costs.h_s_musd_per_sat_year);
        f.validate().map_err(to_py)?;
        Ok(PyScenario { inner: f })
    }

    #[pyo3(signature = (single_channel=false))]
    fn evaluate<'py>(&self, py: Python<'py>, single_channel: bool) -> PyResult<Bound<'py, PyAny>> {
        let m = if single_channel {
            let mut config = self.inner.config();
            config.dual_channel_enabled = false;
            let p = self.inner.policy();
            let sp = SingleChannelPolicy {
                r1: p.plane.r1,
                q1: p.plane.q1,
                parking: p.parking,
                n_parking: p.n_parking,
                h_parking_km: p.h_parking_km,
            };
            system::evaluate_single_channel(&config, &sp)
        } else {
            system::evaluate(&self.inner.config(), &self.inner.policy())
        }
        .map_err(to_py)?;
        to_dict(py, &m)
    }

    /// Pooled statistics and model errors; the per-replication records are dropped.
    #[pyo3(signature = (replications=100, years=30, seed=0))]
    fn simulate<'py>(&self, py: Python<'py>, replications: u32, years: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let sim = SimConfig { horizon_years: years, replications, master_seed: seed, ..SimConfig::default() };
        sim.validate().map_err(to_py)?;
        let (config, policy) = (self.inner.config(), self.inner.policy());
        let stats = py.detach(|| simulator::run(&config, &policy, &sim)).map_err(to_py)?;
        let errors = system::evaluate(&config, &policy).ok().map(|m| simulator::error_metrics(&stats.pooled, &m));
        to_dict(
            py,
            &serde_json::json!({ "pooled": stats.pooled, "counts": stats.total_counts, "errors": errors }),
        )
    }

    #[pyo3(signature = (kind=None, seed=None, generations=None, population=None))]
    fn optimize<'py>(
        &self,
        py: Python<'py>,
        kind: Option<&str>,
        seed: Option<u64>,
        generations: Option<usize>,
        population: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mut spec = self.inner.problem.clone().ok_or_else(|| PyValueError::new_err("scenario has no problem section"))?;
        match kind {
            Some("or") => spec.kind = ProblemKind::Or,
            Some("va") => spec.kind = ProblemKind::Va,
            Some(other) => return Err(PyValueError::new_err(format!("unknown problem kind {other:?}; use 'or' or 'va'"))),
            None => {}
        }
        spec.seed = seed.unwrap_or(spec.seed);
        spec.ga.generations = generations.unwrap_or(spec.ga.generations);
        spec.ga.population = population.unwrap_or(spec.ga.population);
        spec.validate().map_err(to_py)?;
        let config = self.inner.config();
        let report = py
            .detach(|| match spec.kind {
                ProblemKind::Or => optimizer::solve_or(&config, &spec),
                ProblemKind::Va => optimizer::solve_va(&config, &spec),
            })
            .map_err(to_py)?;
        to_dict(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?})", self.inner.name)
    }
}

/// J2 nodal precession rate of a circular orbit, rad per week (or per day).
#[pyfunction]
#[pyo3(signature = (altitude_km, inclination_deg, unit="week"))]
fn precession_rate(altitude_km: f64, inclination_deg: f64, unit: &str) -> PyResult<f64> {
    let unit = match unit {
        "week" => TimeUnit::Week,
        "day" => TimeUnit::Day,
        other => return Err(PyValueError::new_err(format!("unknown time unit {other:?}"))),
    };
    let orbit = CircularOrbit::from_degrees(altitude_km, inclination_deg).map_err(to_py)?;
    Ok(nodal_precession_rate(&orbit, &EarthConstants::default(), unit))
}

#[pymodule]
fn constellation_spares_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(precession_rate, m)?)?;
    m.add("NoFeasibleSolutionError", m.py().get_type::<NoFeasibleSolutionError>())?;
    Ok(())
}
