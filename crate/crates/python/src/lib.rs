//! Python bindings: records, simulation, hand features, SDAE and ELM
//! training, ROC analysis and model bundles.

use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use exhaust_sentinel::dae::DaeConfig;
use exhaust_sentinel::elm::{class_weights, init_elm, score_batch, ElmModel};
use exhaust_sentinel::eval;
use exhaust_sentinel::features_hand::{compute_hand_features, HAND_FEATURE_NAMES};
use exhaust_sentinel::linalg::matrix_from_rows;
use exhaust_sentinel::pipeline::{
    fit_bundle, load_model, save_model, FeatureSet, ModelBundle, PipelineConfig,
};
use exhaust_sentinel::profiles::{self, Label, TcRecord};
use exhaust_sentinel::rng::stream;
use exhaust_sentinel::sdae::{extract_all, train_sdae, SdaeModel};
use exhaust_sentinel::simdata::{gen_dataset, FaultDistribution, SimConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// One thermocouple ring sample.
#[pyclass(name = "Record", from_py_object)]
#[derive(Clone)]
pub struct PyRecord {
    inner: TcRecord,
}

#[pymethods]
impl PyRecord {
    #[new]
    #[pyo3(signature = (timestamp, tc_temps, dwatt, tnh, label = "unlabeled"))]
    fn new(timestamp: i64, tc_temps: Vec<f64>, dwatt: f64, tnh: f64, label: &str) -> PyResult<Self> {
        let label = Label::from_str(label)
            .map_err(|_| PyValueError::new_err(format!("unknown label '{label}'")))?;
        Ok(Self { inner: TcRecord { timestamp, tc_temps, dwatt, tnh, label } })
    }

    #[getter]
    fn timestamp(&self) -> i64 {
        self.inner.timestamp
    }

    #[getter]
    fn tc_temps(&self) -> Vec<f64> {
        self.inner.tc_temps.clone()
    }

    #[getter]
    fn dwatt(&self) -> f64 {
        self.inner.dwatt
    }

    #[getter]
    fn tnh(&self) -> f64 {
        self.inner.tnh
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label.as_str()
    }

    fn __repr__(&self) -> String {
        format!(
            "Record(timestamp={}, n_tc={}, label='{}')",
            self.inner.timestamp,
            self.inner.tc_temps.len(),
            self.inner.label
        )
    }
}

fn unwrap_records(records: Vec<PyRecord>) -> Vec<TcRecord> {
    records.into_iter().map(|r| r.inner).collect()
}

/// Subtract the ring mean from each temperature.
#[pyfunction]
fn mean_normalize(temps: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(profiles::mean_normalize(&temps).map_err(value_err)?.into_values())
}

/// Handcrafted features of one record as a name -> value list.
#[pyfunction]
fn hand_features(record: PyRecord) -> PyResult<Vec<(&'static str, f64)>> {
    let f = compute_hand_features(&record.inner).map_err(value_err)?;
    Ok(HAND_FEATURE_NAMES.iter().copied().zip(f.values).collect())
}

/// Simulated records with injected cold-spot faults.
#[pyfunction]
#[pyo3(signature = (seed = 0, n_normal = 5000, n_fault = 33))]
fn simulate(seed: u64, n_normal: usize, n_fault: usize) -> PyResult<Vec<PyRecord>> {
    let cfg = SimConfig { seed, n_normal, n_fault, ..SimConfig::default() };
    let ds = gen_dataset(&cfg, &FaultDistribution::default()).map_err(value_err)?;
    Ok(ds.records.into_iter().map(|inner| PyRecord { inner }).collect())
}

/// ROC curve as `(fpr, tpr)` lists.
#[pyfunction]
fn roc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let curve = eval::roc(&scores, &labels).map_err(value_err)?;
    Ok(curve.points.iter().map(|p| (p.fpr, p.tpr)).unzip())
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    Ok(eval::auc(&eval::roc(&scores, &labels).map_err(value_err)?))
}

#[pyfunction]
#[pyo3(signature = (scores, labels, fpr = eval::FPR_OPERATING_POINT))]
fn tpr_at_fpr(scores: Vec<f64>, labels: Vec<u8>, fpr: f64) -> PyResult<f64> {
    Ok(eval::tpr_at_fpr(&eval::roc(&scores, &labels).map_err(value_err)?, fpr))
}

/// Greedily trained stack of denoising autoencoders.
#[pyclass(name = "Sdae")]
pub struct PySdae {
    model: SdaeModel,
    losses: Vec<Vec<f64>>,
}

#[pymethods]
impl PySdae {
    /// Train on rows in [0, 1]. `sizes` lists the hidden widths per layer.
    #[staticmethod]
    #[pyo3(signature = (data, sizes, epochs = 200, seed = 0))]
    fn train(data: Vec<Vec<f64>>, sizes: Vec<usize>, epochs: usize, seed: u64) -> PyResult<Self> {
        let d_in = data.first().map_or(0, Vec::len);
        let mut prev = d_in;
        let specs: Vec<DaeConfig> = sizes
            .iter()
            .map(|&h| {
                let mut c = DaeConfig::new(prev, h);
                c.epochs = epochs;
                prev = h;
                c
            })
            .collect();
        let t = train_sdae(&data, &specs, &mut stream(seed)).map_err(value_err)?;
        Ok(Self { model: t.model, losses: t.epoch_losses })
    }

    /// Top-layer codes for each row.
    fn encode(&self, data: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        extract_all(&data, &self.model).map_err(value_err)
    }

    /// Per-layer, per-epoch mean clean reconstruction loss.
    #[getter]
    fn epoch_losses(&self) -> Vec<Vec<f64>> {
        self.losses.clone()
    }

    /// `(out, in)` weight shape per layer.
    #[getter]
    fn shapes(&self) -> Vec<(usize, usize)> {
        self.model.shapes()
    }
}

/// Class-weighted extreme learning machine.
#[pyclass(name = "Elm")]
pub struct PyElm {
    model: ElmModel,
}

#[pymethods]
impl PyElm {
    #[staticmethod]
    #[pyo3(signature = (x, labels, n_hidden = 1000, ridge = 1e-6, seed = 0))]
    fn fit(x: Vec<Vec<f64>>, labels: Vec<u8>, n_hidden: usize, ridge: f64, seed: u64) -> PyResult<Self> {
        let d = x.first().map_or(0, Vec::len);
        if x.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("rows must all have the same width"));
        }
        let weights = class_weights(&labels).map_err(value_err)?;
        let mut model = init_elm(d, n_hidden, ridge, &mut stream(seed));
        let targets: Vec<f64> = labels.iter().map(|l| f64::from(*l)).collect();
        model.fit(&matrix_from_rows(&x, d), &targets, &weights).map_err(value_err)?;
        Ok(Self { model })
    }

    /// Scores clamped to [0, 1].
    fn score(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let d = self.model.d_in();
        if x.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err(format!("rows must have width {d}")));
        }
        score_batch(&matrix_from_rows(&x, d), &self.model).map_err(value_err)
    }
}

/// Fitted preprocessing, optional SDAE and ELM in one unit.
#[pyclass(name = "Model")]
pub struct PyModel {
    bundle: ModelBundle,
}

#[pymethods]
impl PyModel {
    /// Fit on labeled records. `config` takes `key=value` lines.
    #[staticmethod]
    #[pyo3(signature = (records, features = "learned", config = None, seed = 0))]
    fn train(records: Vec<PyRecord>, features: &str, config: Option<&str>, seed: u64) -> PyResult<Self> {
        let fs = match features {
            "hand" => FeatureSet::Hand,
            "learned" => FeatureSet::Learned,
            other => return Err(PyValueError::new_err(format!("unknown feature set '{other}'"))),
        };
        let mut cfg = PipelineConfig::default();
        if let Some(text) = config {
            cfg.apply_kv(text).map_err(value_err)?;
        }
        cfg.seed = seed;
        let bundle = fit_bundle(&unwrap_records(records), fs, None, &cfg, seed).map_err(value_err)?;
        Ok(Self { bundle })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        load_model(path).map(|bundle| Self { bundle }).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ModelBundle::from_json(text).map(|bundle| Self { bundle }).map_err(value_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_model(&self.bundle, path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        self.bundle.to_json()
    }

    /// One score per record; `None` for records the filter drops.
    fn score(&self, records: Vec<PyRecord>) -> PyResult<Vec<Option<f64>>> {
        self.bundle.score_records(&unwrap_records(records)).map_err(value_err)
    }

    #[getter]
    fn feature_set(&self) -> &'static str {
        match self.bundle.feature_set {
            FeatureSet::Hand => "hand",
            FeatureSet::Learned => "learned",
        }
    }
}

#[pymodule]
pub fn exhaust_sentinel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRecord>()?;
    m.add_class::<PySdae>()?;
    m.add_class::<PyElm>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(mean_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(hand_features, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(roc, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(tpr_at_fpr, m)?)?;
    Ok(())
}
