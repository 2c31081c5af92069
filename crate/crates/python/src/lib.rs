//! Python bindings: catalog, cost model, learners, CFAR and whole episodes.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cradar_core::bandit::{exp3_distribution, ContextVector, TsState};
use cradar_core::harness::{run_episode, ExperimentConfig};
use cradar_core::signalchain::{cfar_2d as core_cfar, threshold_factor as core_tau, CfarWindow};
use cradar_core::spectrum::{Catalog as CoreCatalog, CatalogSpec, ChannelGrid, CostModel as CoreCostModel, CostWeights, InterferenceVector};

fn err(e: cradar_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "cradar")]
#[derive(Clone)]
pub struct Waveform {
    id: usize,
    fc_hz: f64,
    bw_hz: f64,
    duration_s: f64,
    amplitude: f64,
}

#[pymethods]
impl Waveform {
    fn __repr__(&self) -> String {
        format!(
            "Waveform(id={}, fc_hz={}, bw_hz={}, duration_s={}, amplitude={})",
            self.id, self.fc_hz, self.bw_hz, self.duration_s, self.amplitude
        )
    }
}

impl From<&cradar_core::spectrum::Waveform> for Waveform {
    fn from(w: &cradar_core::spectrum::Waveform) -> Self {
        Self {
            id: w.id,
            fc_hz: w.fc_hz,
            bw_hz: w.bw_hz,
            duration_s: w.duration_s,
            amplitude: w.amplitude,
        }
    }
}

/// LFM catalog over a shared channel split into equal sub-channels.
#[pyclass(module = "cradar")]
pub struct Catalog {
    inner: CoreCatalog,
}

#[pymethods]
impl Catalog {
    #[new]
    #[pyo3(signature = (bandwidth_hz=100e6, subchannels=10, harmful_threshold_dbm=-90.0))]
    fn new(bandwidth_hz: f64, subchannels: usize, harmful_threshold_dbm: f64) -> PyResult<Self> {
        let grid = ChannelGrid::new(bandwidth_hz, subchannels, harmful_threshold_dbm).map_err(err)?;
        let inner = CoreCatalog::from_spec(&grid, &CatalogSpec::default()).map_err(err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, id: usize) -> PyResult<Waveform> {
        self.inner
            .waveforms()
            .get(id)
            .map(Waveform::from)
            .ok_or_else(|| PyIndexError::new_err(format!("no waveform {id}")))
    }

    fn waveforms(&self) -> Vec<Waveform> {
        self.inner.iter().map(Waveform::from).collect()
    }

    fn find(&self, fc_hz: f64, bw_hz: f64) -> Option<usize> {
        self.inner.find(fc_hz, bw_hz)
    }

    fn widest(&self) -> usize {
        self.inner.widest()
    }

    /// Sub-channel occupancy of a waveform, lowest sub-channel first.
    fn occupancy(&self, id: usize) -> PyResult<String> {
        if id >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("no waveform {id}")));
        }
        let s = InterferenceVector::from_bits(self.inner.mask(id), self.inner.grid().subchannels()).map_err(err)?;
        Ok(s.to_string())
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(err)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }
}

fn parse_s(bits: &str) -> PyResult<InterferenceVector> {
    bits.parse().map_err(err)
}

/// Collision, missed-bandwidth and distortion cost over a catalog.
#[pyclass(module = "cradar")]
pub struct CostModel {
    inner: CoreCostModel,
}

#[pymethods]
impl CostModel {
    #[new]
    #[pyo3(signature = (catalog, beta=(1.0/3.0, 1.0/3.0, 1.0/3.0), dhat=0.2))]
    fn new(catalog: PyRef<'_, Catalog>, beta: (f64, f64, f64), dhat: f64) -> PyResult<Self> {
        let weights = CostWeights::normalized(&catalog.inner, [beta.0, beta.1, beta.2], dhat).map_err(err)?;
        let inner = CoreCostModel::new(catalog.inner.clone(), weights).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma(&self) -> (f64, f64) {
        let w = self.inner.weights();
        (w.gamma1, w.gamma2)
    }

    #[pyo3(signature = (id, s, prev=None))]
    fn cost(&self, id: usize, s: &str, prev: Option<usize>) -> PyResult<f64> {
        self.check(id)?;
        Ok(self.inner.cost(id, &parse_s(s)?, prev))
    }

    #[pyo3(signature = (id, s, prev=None))]
    fn breakdown<'py>(&self, py: Python<'py>, id: usize, s: &str, prev: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
        self.check(id)?;
        let b = self.inner.breakdown(id, &parse_s(s)?, prev);
        let d = PyDict::new(py);
        d.set_item("collision", b.collision)?;
        d.set_item("missed", b.missed)?;
        d.set_item("distortion", b.distortion)?;
        d.set_item("total", b.total)?;
        Ok(d)
    }

    #[pyo3(signature = (id, prev=None))]
    fn distortion(&self, id: usize, prev: Option<usize>) -> PyResult<f64> {
        self.check(id)?;
        Ok(self.inner.distortion(id, prev))
    }

    /// Ids whose distortion after `prev` is below the tolerance.
    #[pyo3(signature = (prev=None))]
    fn admissible(&self, prev: Option<usize>) -> PyResult<Vec<usize>> {
        let cat = self.inner.catalog();
        if let Some(p) = prev {
            self.check(p)?;
        }
        Ok(cradar_core::bandit::constrain_actions(cat, prev.map(|p| cat.get(p)), self.inner.weights()))
    }
}

impl CostModel {
    fn check(&self, id: usize) -> PyResult<()> {
        if id >= self.inner.catalog().len() {
            return Err(PyIndexError::new_err(format!("no waveform {id}")));
        }
        Ok(())
    }
}

/// Linear Thompson sampling over three-feature contexts.
#[pyclass(module = "cradar")]
pub struct ThompsonSampler {
    inner: TsState,
    rng: rand_chacha::ChaCha8Rng,
}

#[pymethods]
impl ThompsonSampler {
    #[new]
    #[pyo3(signature = (scale=1.0, seed=0))]
    fn new(scale: f64, seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            inner: TsState::with_scale(scale),
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[getter]
    fn theta_hat(&self) -> [f64; 3] {
        let t = self.inner.theta_hat();
        [t[0], t[1], t[2]]
    }

    fn update(&mut self, x: [f64; 3], cost: f64) {
        self.inner.update(&ContextVector::new(x[0], x[1], x[2]), cost);
    }

    /// Picks an id from `(id, [mean, variance, last])` pairs.
    fn select(&mut self, contexts: Vec<(usize, [f64; 3])>) -> PyResult<usize> {
        let ctx: Vec<(usize, ContextVector)> = contexts
            .into_iter()
            .map(|(id, x)| (id, ContextVector::new(x[0], x[1], x[2])))
            .collect();
        cradar_core::bandit::ts_select(&ctx, &self.inner, &mut self.rng).map_err(err)
    }
}

#[pyfunction]
#[pyo3(name = "exp3_distribution")]
fn py_exp3_distribution(cum_cost: Vec<f64>, epsilon: f64, gamma: f64, pi: Vec<f64>) -> PyResult<Vec<f64>> {
    if cum_cost.len() != pi.len() {
        return Err(PyValueError::new_err("cum_cost and pi must have equal length"));
    }
    Ok(exp3_distribution(&cum_cost, epsilon, gamma, &pi))
}

#[pyfunction]
fn threshold_factor(n: usize, pfa: f64) -> f64 {
    core_tau(n, pfa)
}

/// CA-CFAR on a row-major power map; returns flagged `(row, col)` cells.
#[pyfunction]
#[pyo3(signature = (power, pfa, guard=(2, 2), training=(8, 8)))]
fn cfar_2d(power: Vec<Vec<f64>>, pfa: f64, guard: (usize, usize), training: (usize, usize)) -> PyResult<Vec<(usize, usize)>> {
    let rows = power.len();
    let cols = power.first().map_or(0, |r| r.len());
    if power.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged power map"));
    }
    let flat: Vec<f64> = power.into_iter().flatten().collect();
    let report = core_cfar(&flat, rows, cols, pfa, &CfarWindow { guard, training }).map_err(err)?;
    Ok(report.detections)
}

/// Experiment configuration, edited through dotted keys.
#[pyclass(skip_from_py_object, module = "cradar")]
#[derive(Clone)]
pub struct Config {
    inner: ExperimentConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(t) => ExperimentConfig::from_toml_str(t).map_err(err)?,
            None => ExperimentConfig::default(),
        };
        Ok(Self { inner })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map(|_| ()).map_err(err)
    }
}

#[pyclass(frozen, get_all, module = "cradar")]
pub struct Episode {
    waveforms: Vec<usize>,
    costs: Vec<f64>,
    distortions: Vec<f64>,
    regret: Vec<f64>,
    s_true: Vec<String>,
    /// One list per CPI of `(pfa, detected, targets, false_alarms)`.
    cpi_scores: Vec<Vec<(f64, usize, usize, usize)>>,
}

#[pyfunction]
#[pyo3(name = "run_episode", signature = (config, run=0))]
fn py_run_episode(py: Python<'_>, config: PyRef<'_, Config>, run: usize) -> PyResult<Episode> {
    let cfg = config.inner.clone();
    let ep = py.detach(move || run_episode(&cfg, run)).map_err(err)?;
    Ok(Episode {
        waveforms: ep.pris.iter().map(|p| p.waveform).collect(),
        costs: ep.pris.iter().map(|p| p.cost).collect(),
        distortions: ep.pris.iter().map(|p| p.distortion).collect(),
        regret: ep.pris.iter().map(|p| p.regret_cum).collect(),
        s_true: ep.pris.iter().map(|p| p.s_true.to_string()).collect(),
        cpi_scores: ep
            .cpis
            .iter()
            .map(|c| {
                c.scores
                    .iter()
                    .map(|s| (s.pfa_desired, s.detected, s.targets, s.false_alarms))
                    .collect()
            })
            .collect(),
    })
}

#[pymodule]
fn cradar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Waveform>()?;
    m.add_class::<Catalog>()?;
    m.add_class::<CostModel>()?;
    m.add_class::<ThompsonSampler>()?;
    m.add_class::<Config>()?;
    m.add_class::<Episode>()?;
    m.add_function(wrap_pyfunction!(py_exp3_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_factor, m)?)?;
    m.add_function(wrap_pyfunction!(cfar_2d, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_episode, m)?)?;
    Ok(())
}
