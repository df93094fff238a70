//! Python bindings for the gomet library: Lie algebra construction,
//! homogeneous-space data, invariant metric families, and geodesic-orbit
//! certification. Reports come back as JSON strings, matching the CLI.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gomet::gocheck::{certify_go, scan_parameters, section5_pipeline, CertifyConfig};
use gomet::homspace::{
    build_space, isotypic_decompose_with, normalizer, reductive_split, HomogeneousSpace,
    ModuleDecomposition, SpaceSpec,
};
use gomet::invmetrics::{
    apply_normalizer_constraint, default_grid, eigen_constraints, instantiate, metric_space,
    MetricFamily,
};
use gomet::liealg::{AlgebraVector, Family, LieAlgebra};

fn to_py_err(e: gomet::Error) -> PyErr {
    match e {
        gomet::Error::InvalidSpec(_) | gomet::Error::InvalidArgument(_) | gomet::Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A compact matrix Lie algebra with its Q-orthogonal basis.
#[pyclass(name = "LieAlgebra")]
struct PyLieAlgebra {
    inner: Arc<LieAlgebra>,
}

#[pymethods]
impl PyLieAlgebra {
    #[new]
    fn new(family: &str, n: usize) -> PyResult<Self> {
        let family = Family::from_str(family).map_err(to_py_err)?;
        let inner = LieAlgebra::new(family, n, Default::default()).map_err(to_py_err)?;
        Ok(PyLieAlgebra { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family.to_string()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    /// Lie bracket of two coefficient vectors.
    fn bracket(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let xv = self.vector(x)?;
        let yv = self.vector(y)?;
        let out = xv.bracket(&yv).map_err(to_py_err)?;
        Ok(out.coeffs().iter().copied().collect())
    }

    /// Ad-invariant inner product Q(X, Y) = -trace(XY).
    fn inner(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let xv = self.vector(x)?;
        let yv = self.vector(y)?;
        xv.inner(&yv).map_err(to_py_err)
    }

    /// The bar involution on the off-diagonal e/f span.
    fn bar(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let xv = self.vector(x)?;
        let out = xv.bar().map_err(to_py_err)?;
        Ok(out.coeffs().iter().copied().collect())
    }

    fn structure_constant(&self, i: usize, j: usize, k: usize) -> PyResult<f64> {
        if i >= self.inner.dim || j >= self.inner.dim || k >= self.inner.dim {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.structure_constant(i, j, k))
    }

    fn basis_index(&self, label: &str) -> Option<usize> {
        self.inner.basis_index(label)
    }

    fn __repr__(&self) -> String {
        format!("LieAlgebra({}({}), dim {})", self.inner.family, self.inner.n, self.inner.dim)
    }
}

impl PyLieAlgebra {
    fn vector(&self, coeffs: Vec<f64>) -> PyResult<AlgebraVector> {
        AlgebraVector::new(self.inner.clone(), DVector::from_vec(coeffs)).map_err(to_py_err)
    }
}

/// A homogeneous space G/H with its decomposition and reduced metric family.
#[pyclass(name = "Space")]
struct PySpace {
    space: HomogeneousSpace,
    decomp: ModuleDecomposition,
    reduced: MetricFamily,
    seed: u64,
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (family, n, blocks, det_one = false, seed = 2024))]
    fn new(family: &str, n: usize, blocks: Vec<usize>, det_one: bool, seed: u64) -> PyResult<Self> {
        let family = Family::from_str(family).map_err(to_py_err)?;
        let spec = SpaceSpec::new(family, n, blocks, det_one).map_err(to_py_err)?;
        let space = build_space(&spec).map_err(to_py_err)?;
        let norm = normalizer(&space).map_err(to_py_err)?;
        let split = reductive_split(&space, &norm).map_err(to_py_err)?;
        let decomp = isotypic_decompose_with(&space, &norm, &split, seed).map_err(to_py_err)?;
        let full = metric_space(&space, &decomp).map_err(to_py_err)?;
        let constrained =
            apply_normalizer_constraint(&space, &decomp, &split, &full).map_err(to_py_err)?;
        let reduced = eigen_constraints(&space, &decomp, &constrained).map_err(to_py_err)?;
        Ok(PySpace {
            space,
            decomp,
            reduced,
            seed,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.space.spec.to_string()
    }

    #[getter]
    fn dim_g(&self) -> usize {
        self.space.g.dim
    }

    #[getter]
    fn dim_h(&self) -> usize {
        self.space.dim_h()
    }

    #[getter]
    fn dim_m(&self) -> usize {
        self.space.dim_m()
    }

    #[getter]
    fn n_dim(&self) -> usize {
        self.decomp.n_dim
    }

    fn summand_dims(&self) -> Vec<usize> {
        self.decomp.dims()
    }

    fn class_ids(&self) -> Vec<usize> {
        self.decomp.class_ids()
    }

    /// Parameter names of the reduced metric family.
    fn metric_parameters(&self) -> Vec<String> {
        self.reduced.parameter_names()
    }

    /// Certifies one instantiated metric; returns a JSON verdict.
    #[pyo3(signature = (params = None, samples = 200, seed = None))]
    fn certify(
        &self,
        params: Option<BTreeMap<String, f64>>,
        samples: usize,
        seed: Option<u64>,
    ) -> PyResult<String> {
        let params = params.unwrap_or_default();
        let lambda = instantiate(&self.reduced, &params).map_err(to_py_err)?;
        let config = CertifyConfig::default()
            .with_samples(samples)
            .with_seed(seed.unwrap_or(self.seed));
        let verdict = certify_go(&self.space, &lambda, &self.decomp, &config).map_err(to_py_err)?;
        let json = serde_json::json!({
            "kind": format!("{:?}", verdict.kind),
            "samples": verdict.samples,
            "max_residual": verdict.max_residual,
            "seed": verdict.seed,
        });
        Ok(json.to_string())
    }

    /// Certifies the default grid of the reduced family; returns JSON with
    /// the passing set.
    #[pyo3(signature = (samples = 200, seed = None))]
    fn scan(&self, samples: usize, seed: Option<u64>) -> PyResult<String> {
        let grid = default_grid(&self.reduced);
        let config = CertifyConfig::default()
            .with_samples(samples)
            .with_seed(seed.unwrap_or(self.seed));
        let report = scan_parameters(&self.space, &self.reduced, &self.decomp, &grid, &config)
            .map_err(to_py_err)?;
        let json = serde_json::json!({
            "space": report.space,
            "parameters": report.family_parameters,
            "grid": report.grid,
            "verdicts": report
                .verdicts
                .iter()
                .map(|v| format!("{:?}", v.kind))
                .collect::<Vec<_>>(),
            "passing_set": report.passing_points(),
            "seed": report.seed,
        });
        Ok(json.to_string())
    }

    fn __repr__(&self) -> String {
        format!(
            "Space({}, dim h = {}, dim m = {})",
            self.space.spec,
            self.space.dim_h(),
            self.space.dim_m()
        )
    }
}

/// Runs the SU(5)/S(U(2)xU(2)) end-to-end pipeline; returns the full JSON
/// report.
#[pyfunction]
#[pyo3(signature = (samples = 200, seed = 2024))]
fn section5(samples: usize, seed: u64) -> PyResult<String> {
    let config = CertifyConfig::default().with_samples(samples).with_seed(seed);
    let report = section5_pipeline(&config).map_err(to_py_err)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Structure-tensor sanity check used by the smoke test: bracket of two
/// labelled basis elements.
#[pyfunction]
fn bracket_by_label(family: &str, n: usize, x: &str, y: &str) -> PyResult<Vec<(String, f64)>> {
    let family = Family::from_str(family).map_err(to_py_err)?;
    let alg = LieAlgebra::new(family, n, Default::default()).map_err(to_py_err)?;
    let xv = AlgebraVector::from_label(&alg, x).map_err(to_py_err)?;
    let yv = AlgebraVector::from_label(&alg, y).map_err(to_py_err)?;
    let out = xv.bracket(&yv).map_err(to_py_err)?;
    Ok(out.labelled_coeffs(1e-12))
}

#[pymodule]
fn gomet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLieAlgebra>()?;
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(section5, m)?)?;
    m.add_function(wrap_pyfunction!(bracket_by_label, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
