//! Python bindings: code construction, verification, scans and protocol simulation.

use codeswitch::bundle::{Bundle, CodeParams, Recipe};
use codeswitch::decoders::{Basis, Budgets, DecoderMode};
use codeswitch::hgp::{css_validate, CssCode};
use codeswitch::homomorphic::{cnot_schedule, layer_embedding, verify_chain_map, verify_logical_cnot};
use codeswitch::noise::NoiseModel;
use codeswitch::protocol::{run_protocol, CodeContext, ProtocolSetup, Step};
use codeswitch::scans::{confinement_scan, soundness_scan, ScanBudget};
use codeswitch::stats::{mann_kendall, wilson_interval};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn basis(name: &str) -> PyResult<Basis> {
    match name {
        "X" | "x" => Ok(Basis::X),
        "Z" | "z" => Ok(Basis::Z),
        other => Err(PyValueError::new_err(format!("basis must be 'X' or 'Z', got {other:?}"))),
    }
}

/// A CSS code together with the recipe it was built from.
#[pyclass(name = "Code", frozen)]
struct PyCode {
    recipe: Recipe,
    code: CssCode,
}

#[pymethods]
impl PyCode {
    /// Builds a code from a JSON recipe and certifies distances within `cap` steps.
    #[staticmethod]
    #[pyo3(signature = (recipe_json, cap = 1 << 20))]
    fn from_recipe(recipe_json: &str, cap: u64) -> PyResult<Self> {
        let recipe: Recipe = serde_json::from_str(recipe_json).map_err(err)?;
        let mut code = recipe.build().map_err(err)?.code;
        if cap > 0 {
            code.certify_distances(cap);
        }
        Ok(Self { recipe, code })
    }

    #[staticmethod]
    #[pyo3(signature = (l, cap = 1 << 20))]
    fn toric(l: usize, cap: u64) -> PyResult<Self> {
        Self::from_recipe(&serde_json::to_string(&Recipe::Toric { l }).map_err(err)?, cap)
    }

    /// The 3D code Q_G of size `l`: toric base and ring graph.
    #[staticmethod]
    #[pyo3(signature = (l, cap = 1 << 20))]
    fn qg(l: usize, cap: u64) -> PyResult<Self> {
        Self::from_recipe(&serde_json::to_string(&Recipe::qg(l)).map_err(err)?, cap)
    }

    #[getter]
    fn n(&self) -> usize {
        self.code.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.code.k()
    }

    #[getter]
    fn d_x(&self) -> Option<usize> {
        self.code.d_x
    }

    #[getter]
    fn d_z(&self) -> Option<usize> {
        self.code.d_z
    }

    #[getter]
    fn d_ss(&self) -> Option<usize> {
        self.code.d_ss
    }

    #[getter]
    fn descriptor(&self) -> String {
        self.code.descriptor.clone()
    }

    #[getter]
    fn recipe(&self) -> PyResult<String> {
        serde_json::to_string(&self.recipe).map_err(err)
    }

    /// Certified parameters as a JSON object.
    fn params(&self) -> PyResult<String> {
        serde_json::to_string(&CodeParams::of(&self.code)).map_err(err)
    }

    /// Row supports of `H_X`, `H_Z`, `M_Z`, `G_X` or `G_Z`.
    fn matrix(&self, name: &str) -> PyResult<Vec<Vec<usize>>> {
        let m = match name {
            "H_X" => &self.code.h_x,
            "H_Z" => &self.code.h_z,
            "G_X" => &self.code.g_x,
            "G_Z" => &self.code.g_z,
            "M_Z" => self.code.m_z.as_ref().ok_or_else(|| PyValueError::new_err("code has no metacheck"))?,
            other => return Err(PyValueError::new_err(format!("unknown matrix {other:?}"))),
        };
        Ok(m.row_supports().to_vec())
    }

    /// Failed CSS invariants; empty when the code is valid.
    fn validate(&self) -> Vec<String> {
        css_validate(&self.code).failures
    }

    fn bundle_text(&self, name: &str) -> PyResult<String> {
        let (mut b, _) = Bundle::build(name, &self.recipe, 0).map_err(err)?;
        b.header.params = CodeParams::of(&self.code);
        Ok(b.to_text())
    }

    fn __repr__(&self) -> String {
        format!("Code({}, n={}, k={})", self.code.descriptor, self.code.n(), self.code.k())
    }
}

/// Parses a bundle and returns the failures of its verification.
#[pyfunction]
fn verify_bundle(text: &str) -> PyResult<Vec<String>> {
    Ok(Bundle::parse(text).map_err(err)?.verify().failures)
}

/// Homomorphic CNOT schedule from layer `layer` of a 3D code onto its base code.
#[pyfunction]
#[pyo3(signature = (source, target, layer = 0))]
fn schedule(source: &PyCode, target: &PyCode, layer: usize) -> PyResult<Vec<(usize, usize)>> {
    let phi = layer_embedding(&source.code, &target.code, layer).map_err(err)?;
    if !verify_chain_map(&phi).passed() {
        return Err(PyValueError::new_err("layer embedding is not a chain map"));
    }
    Ok(cnot_schedule(&phi).map_err(err)?.pairs)
}

/// True when the layer-`layer` transversal CNOT implements the logical CNOT.
#[pyfunction]
#[pyo3(signature = (source, target, layer = 0))]
fn logical_cnot_ok(source: &PyCode, target: &PyCode, layer: usize) -> PyResult<bool> {
    let phi = layer_embedding(&source.code, &target.code, layer).map_err(err)?;
    let sched = cnot_schedule(&phi).map_err(err)?;
    Ok(verify_logical_cnot(&source.code, &target.code, &sched).passed())
}

/// Minimum syndrome weight per reduced error weight, and the scan mode.
#[pyfunction]
#[pyo3(signature = (code, t, basis_name = "X", max_enumeration = 1 << 20, seed = 0))]
fn confinement(code: &PyCode, t: usize, basis_name: &str, max_enumeration: u64, seed: u64) -> PyResult<(Vec<(usize, usize)>, String)> {
    let budget = ScanBudget { max_enumeration, seed, ..Default::default() };
    let tab = confinement_scan(&code.code, t, basis(basis_name)?, budget);
    Ok((tab.min_syndrome.into_iter().collect(), tab.mode.name().into()))
}

/// Maximum preimage weight per syndrome weight and the fitted slope α.
#[pyfunction]
#[pyo3(signature = (code, t, basis_name = "X", max_enumeration = 1 << 20, seed = 0))]
fn soundness(code: &PyCode, t: usize, basis_name: &str, max_enumeration: u64, seed: u64) -> PyResult<(Vec<(usize, usize)>, f64)> {
    let budget = ScanBudget { max_enumeration, seed, ..Default::default() };
    let tab = soundness_scan(&code.code, t, basis(basis_name)?, budget);
    Ok((tab.max_preimage.into_iter().collect(), tab.alpha))
}

/// Runs a JSON script on the named codes; returns `(failures, failures_x, failures_z, metacode_failures)`.
#[pyfunction]
#[pyo3(signature = (codes, script_json, p, q, trials, seed = 0, cap = 1 << 14, scalable = false))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    codes: Vec<(String, PyRef<'_, PyCode>)>,
    script_json: &str,
    p: f64,
    q: f64,
    trials: u64,
    seed: u64,
    cap: u64,
    scalable: bool,
) -> PyResult<(u64, u64, u64, u64)> {
    let script: Vec<Step> = serde_json::from_str(script_json).map_err(err)?;
    let budgets = Budgets { mode: if scalable { DecoderMode::Scalable } else { DecoderMode::Oracle }, cap };
    let mut setup = ProtocolSetup::default();
    for (name, c) in &codes {
        setup.add_code(CodeContext::new(name.clone(), c.code.clone(), budgets));
    }
    for (src, c3) in &codes {
        for (tgt, c2) in &codes {
            if c3.recipe.base() == Some(&c2.recipe) {
                let sched = layer_embedding(&c3.code, &c2.code, 0).and_then(|phi| cnot_schedule(&phi)).map_err(err)?;
                setup.schedules.insert((src.clone(), tgt.clone()), sched);
            }
        }
    }
    let noise = NoiseModel::new(p, q, seed).map_err(err)?;
    let (_, s) = run_protocol(&setup, &script, noise, trials).map_err(err)?;
    Ok((s.failures, s.failures_x, s.failures_z, s.metacode_failures))
}

/// Wilson score interval at confidence `1 − alpha`.
#[pyfunction]
#[pyo3(signature = (successes, trials, alpha = 0.05))]
fn wilson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    wilson_interval(successes, trials, alpha)
}

/// Mann–Kendall statistic `S` and one-sided p-value for an upward trend.
#[pyfunction]
fn mann_kendall_trend(series: Vec<f64>) -> (i64, f64) {
    let r = mann_kendall(&series);
    (r.s, r.p_increasing)
}

#[pymodule]
fn codeswitch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCode>()?;
    m.add_function(wrap_pyfunction!(verify_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(logical_cnot_ok, m)?)?;
    m.add_function(wrap_pyfunction!(confinement, m)?)?;
    m.add_function(wrap_pyfunction!(soundness, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(wilson, m)?)?;
    m.add_function(wrap_pyfunction!(mann_kendall_trend, m)?)?;
    Ok(())
}
