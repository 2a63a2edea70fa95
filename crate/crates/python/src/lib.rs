//! Python bindings.

use erasure_spectra::empirics::{self, EmpiricalDistribution, ExperimentConfig};
use erasure_spectra::{mats, spectra, theory};
use erasure_spectra::{Ensemble, Error, LawParams, Normalization, RngSeed, C64};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err.exit_code() {
        2 => PyValueError::new_err(err.to_string()),
        3 => PyIOError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn params(p: f64, q: f64) -> PyResult<LawParams> {
    LawParams::new(p, q).map_err(to_py)
}

fn parse<T: std::str::FromStr>(what: &str, raw: &str) -> PyResult<T> {
    raw.parse()
        .map_err(|_| PyValueError::new_err(format!("unknown {what} `{raw}`")))
}

/// Limiting spectral law for erasure probabilities `p` (columns) and `q`
/// (rows).
#[pyclass(name = "SpectralLaw", module = "erasure_spectra_py", frozen)]
struct PySpectralLaw {
    inner: theory::SpectralLaw,
}

#[pymethods]
impl PySpectralLaw {
    #[new]
    #[pyo3(signature = (p, q, normalization = "theorem"))]
    fn new(p: f64, q: f64, normalization: &str) -> PyResult<Self> {
        let norm: Normalization = parse("normalization", normalization)?;
        Ok(Self {
            inner: theory::SpectralLaw::new(params(p, q)?, norm),
        })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.params().p()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.params().q()
    }

    #[getter]
    fn normalization(&self) -> String {
        self.inner.normalization().to_string()
    }

    /// `(r_minus, r_plus)`.
    fn edges(&self) -> (f64, f64) {
        let e = self.inner.edges();
        (e.r_minus, e.r_plus)
    }

    /// `(atom at 0, atom at 1)`.
    fn atoms(&self) -> (f64, f64) {
        self.inner.atoms()
    }

    fn density(&self, x: f64) -> PyResult<f64> {
        self.inner.density(x).map_err(to_py)
    }

    fn singular_density(&self, x: f64) -> PyResult<f64> {
        self.inner.singular_density(x).map_err(to_py)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(to_py)
    }

    fn continuous_mass(&self) -> f64 {
        self.inner.continuous_mass()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// `(grid, density)` on Chebyshev points spanning the support.
    fn sample_curve(&self, grid_size: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let curve = self.inner.sample_curve(grid_size).map_err(to_py)?;
        Ok((curve.grid, curve.values))
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralLaw(p={}, q={}, normalization='{}')",
            self.p(),
            self.q(),
            self.normalization()
        )
    }
}

/// Pooled spectra from a Monte Carlo run.
#[pyclass(name = "Experiment", module = "erasure_spectra_py", frozen)]
struct PyExperiment {
    inner: EmpiricalDistribution,
}

#[pymethods]
impl PyExperiment {
    /// All eigenvalues, ascending.
    #[getter]
    fn pooled(&self) -> Vec<f64> {
        self.inner.pooled.clone()
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[getter]
    fn atom1_freq(&self) -> f64 {
        self.inner.atom1_freq
    }

    /// Eigenvalues of one trial, descending.
    fn trial(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .samples
            .get(index)
            .map(|s| s.values.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no trial {index}")))
    }

    /// `(bin edges, densities)`.
    fn histogram(&self) -> (Vec<f64>, Vec<f64>) {
        let h = &self.inner.histogram;
        (h.edges.clone(), h.density())
    }

    /// Distances to the theorem law as a dict.
    fn compare<'py>(&self, py: Python<'py>, law: &PySpectralLaw) -> PyResult<Bound<'py, PyDict>> {
        let r = empirics::compare(&self.inner, &law.inner).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("ks_distance", r.ks_distance)?;
        out.set_item("l1_hist_distance", r.l1_hist_distance)?;
        out.set_item("atom1_error", r.atom1_error)?;
        out.set_item("mean_error", r.mean_error)?;
        out.set_item("p", r.p)?;
        out.set_item("q", r.q)?;
        out.set_item("empirical_atom1", r.empirical_atom1)?;
        out.set_item("theoretical_atom1", r.theoretical_atom1)?;
        out.set_item("empirical_mean", r.empirical_mean)?;
        out.set_item("theoretical_mean", r.theoretical_mean)?;
        out.set_item("pooled_size", r.pooled_size)?;
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn eta(p: f64, q: f64, z: C64) -> PyResult<C64> {
    theory::eta(params(p, q)?, z).map_err(to_py)
}

#[pyfunction]
fn stieltjes(p: f64, q: f64, z: C64) -> PyResult<C64> {
    theory::stieltjes(params(p, q)?, z).map_err(to_py)
}

#[pyfunction]
fn eta_fixed_point_residual(p: f64, q: f64, z: C64) -> PyResult<f64> {
    theory::eta_fixed_point_residual(params(p, q)?, z).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, q, x, omega = theory::DEFAULT_INVERSION_OFFSET))]
fn inverted_density(p: f64, q: f64, x: f64, omega: f64) -> PyResult<f64> {
    theory::inverted_density(params(p, q)?, x, omega).map_err(to_py)
}

/// Unitary DFT matrix as a list of rows.
#[pyfunction]
fn dft_matrix(n: usize) -> PyResult<Vec<Vec<C64>>> {
    let m = mats::dft_matrix(n).map_err(to_py)?;
    Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (n, seed, stream = 0))]
fn haar_sample(n: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<C64>>> {
    let m = mats::haar_sample(n, RngSeed::new(seed, stream)).map_err(to_py)?;
    Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
}

/// Eigenvalues of one randomly restricted `n × n` matrix, descending.
#[pyfunction]
#[pyo3(signature = (ensemble, n, p, q, seed, stream = 0))]
fn restricted_spectrum(ensemble: &str, n: usize, p: f64, q: f64, seed: u64, stream: u64) -> PyResult<Vec<f64>> {
    let ensemble: Ensemble = parse("ensemble", ensemble)?;
    spectra::restricted_spectrum(ensemble, n, params(p, q)?, RngSeed::new(seed, stream))
        .map(|s| s.values)
        .map_err(to_py)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (ensemble, p, q, target_dim = 100, trials = 100, seed = 1, bins = 50))]
fn run_experiment(
    py: Python<'_>,
    ensemble: &str,
    p: f64,
    q: f64,
    target_dim: usize,
    trials: usize,
    seed: u64,
    bins: usize,
) -> PyResult<PyExperiment> {
    let ensemble: Ensemble = parse("ensemble", ensemble)?;
    let mut config = ExperimentConfig::new(ensemble, params(p, q)?, target_dim, trials, seed);
    config.bins = bins;
    let inner = py.detach(|| empirics::run_experiment(&config)).map_err(to_py)?;
    Ok(PyExperiment { inner })
}

#[pymodule]
fn erasure_spectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralLaw>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(eta_fixed_point_residual, m)?)?;
    m.add_function(wrap_pyfunction!(inverted_density, m)?)?;
    m.add_function(wrap_pyfunction!(dft_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(haar_sample, m)?)?;
    m.add_function(wrap_pyfunction!(restricted_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
