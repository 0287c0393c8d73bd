//! Python bindings for the v2vgeo channel model.

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use v2vgeo_core::plos::{self, HeightModel, SensitivityTable};
use v2vgeo_core::propagation::{self, RadioConfig};
use v2vgeo_core::relay::{self, PowerBasis, RelayTechnique};
use v2vgeo_core::scenario::{self, SpacingMode, UrbanSpec};
use v2vgeo_core::{classify, Environment, HighwaySpec, RangeConfig, SceneIndex};

fn to_py(err: v2vgeo_core::Error) -> PyErr {
    match err {
        v2vgeo_core::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A snapshot of vehicles and static objects.
#[pyclass(frozen, module = "v2vgeo")]
struct Scene {
    inner: v2vgeo_core::Scene,
}

#[pymethods]
impl Scene {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: v2vgeo_core::Scene::from_json(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: scenario::load_scene(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        scenario::save_scene(&self.inner, path).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Straight multi-lane road with exponential vehicle spacing.
    #[staticmethod]
    #[pyo3(signature = (seed=0, road_length=12_500.0, lanes=4, density=None, merged=false, tall_fraction=None))]
    fn highway(
        seed: u64,
        road_length: f64,
        lanes: usize,
        density: Option<f64>,
        merged: bool,
        tall_fraction: Option<f64>,
    ) -> PyResult<Self> {
        let mut spec = HighwaySpec::a28(seed);
        if let Some(d) = density {
            spec = spec.with_density(d);
        }
        spec.road_length = road_length;
        spec.lanes = lanes;
        if merged {
            spec.spacing = SpacingMode::Merged;
        }
        if let Some(t) = tall_fraction {
            spec.tall_fraction = t;
        }
        Ok(Self { inner: scenario::synth_highway(&spec).map_err(to_py)? })
    }

    /// Manhattan grid of buildings and foliage with vehicles on the streets.
    #[staticmethod]
    #[pyo3(signature = (blocks_x=4, blocks_y=4, seed=0))]
    fn urban(blocks_x: usize, blocks_y: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: scenario::synth_urban(&UrbanSpec::new(blocks_x, blocks_y, seed)).map_err(to_py)? })
    }

    #[getter]
    fn timestamp(&self) -> f64 {
        self.inner.timestamp()
    }

    #[getter]
    fn n_vehicles(&self) -> usize {
        self.inner.vehicles().len()
    }

    #[getter]
    fn n_statics(&self) -> usize {
        self.inner.statics().len()
    }

    fn vehicle_ids(&self) -> Vec<u64> {
        self.inner.vehicles().iter().map(|v| v.id).collect()
    }

    /// `(x, y)` of a vehicle.
    fn position(&self, id: u64) -> PyResult<(f64, f64)> {
        let v = self.inner.vehicle(id).ok_or_else(|| PyKeyError::new_err(id))?;
        Ok((v.position.x, v.position.y))
    }

    fn is_tall(&self, id: u64) -> PyResult<bool> {
        let v = self.inner.vehicle(id).ok_or_else(|| PyKeyError::new_err(id))?;
        Ok(v.class == v2vgeo_core::VehicleClass::Tall)
    }

    fn __repr__(&self) -> String {
        format!("Scene(t={}, vehicles={}, statics={})", self.inner.timestamp(), self.n_vehicles(), self.n_statics())
    }
}

/// Result of evaluating one link.
#[pyclass(frozen, get_all, module = "v2vgeo")]
struct LinkReport {
    tx: u64,
    rx: u64,
    distance: f64,
    link_class: String,
    mechanism: String,
    n_blockers: usize,
    large_scale_dbm: Option<f64>,
    sigma_db: f64,
    faded_dbm: Option<f64>,
}

impl From<v2vgeo_core::LinkReport> for LinkReport {
    fn from(r: v2vgeo_core::LinkReport) -> Self {
        Self {
            tx: r.tx,
            rx: r.rx,
            distance: r.distance,
            link_class: r.class.as_str().to_string(),
            mechanism: r.mechanism.as_str().to_string(),
            n_blockers: r.n_blockers(),
            large_scale_dbm: r.large_scale.dbm(),
            sigma_db: r.sigma_db,
            faded_dbm: r.faded.dbm(),
        }
    }
}

#[pymethods]
impl LinkReport {
    fn __repr__(&self) -> String {
        format!(
            "LinkReport(tx={}, rx={}, distance={:.2}, class={}, faded_dbm={:?})",
            self.tx, self.rx, self.distance, self.link_class, self.faded_dbm
        )
    }
}

/// Radio, range and fading configuration.
#[pyclass(frozen, module = "v2vgeo")]
struct ChannelModel {
    inner: v2vgeo_core::ChannelModel,
}

#[pymethods]
impl ChannelModel {
    #[new]
    #[pyo3(signature = (freq_hz=5.9e9, tx_dbm=20.0, gain_dbi=0.0, env="highway", seed=0))]
    fn new(freq_hz: f64, tx_dbm: f64, gain_dbi: f64, env: &str, seed: u64) -> PyResult<Self> {
        let env = match env {
            "highway" => Environment::Highway,
            "urban" => Environment::Urban,
            other => return Err(PyValueError::new_err(format!("unknown environment {other:?}"))),
        };
        let inner = v2vgeo_core::ChannelModel {
            radio: RadioConfig {
                frequency_hz: freq_hz,
                tx_power_dbm: tx_dbm,
                tx_gain_dbi: gain_dbi,
                rx_gain_dbi: gain_dbi,
                ..RadioConfig::default()
            },
            ranges: RangeConfig::for_environment(env),
            fading: v2vgeo_core::FadingConfig::with_seed(seed),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: v2vgeo_core::ChannelModel =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("model serializes")
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.radio.wavelength()
    }

    /// Every pair within range, ordered by `(tx, rx)`.
    fn evaluate(&self, py: Python<'_>, scene: &Scene) -> Vec<LinkReport> {
        let reports = py.detach(|| self.inner.evaluate_scene(&scene.inner));
        reports.into_iter().map(LinkReport::from).collect()
    }

    fn evaluate_pair(&self, scene: &Scene, tx: u64, rx: u64) -> PyResult<LinkReport> {
        let index = SceneIndex::build(&scene.inner);
        self.inner
            .evaluate_pair(&index, tx, rx)
            .map(LinkReport::from)
            .ok_or_else(|| PyKeyError::new_err(format!("vehicle {tx} or {rx} not in scene")))
    }

    /// `(bin_lo, bin_hi, sent, received)` per distance bin at a DSRC data rate.
    #[pyo3(signature = (scene, data_rate_mbps, bin_width=50.0))]
    fn packet_success_rate(
        &self,
        py: Python<'_>,
        scene: &Scene,
        data_rate_mbps: f64,
        bin_width: f64,
    ) -> PyResult<Vec<(f64, f64, usize, usize)>> {
        let reports = py.detach(|| self.inner.evaluate_scene(&scene.inner));
        let bins =
            plos::packet_success_rate(&reports, data_rate_mbps, &SensitivityTable::dsrc(), bin_width).map_err(to_py)?;
        Ok(bins.into_iter().map(|b| (b.lo, b.hi, b.sent, b.received)).collect())
    }

    fn __repr__(&self) -> String {
        let r = &self.inner.radio;
        format!("ChannelModel(freq_hz={}, tx_dbm={}, seed={})", r.frequency_hz, r.tx_power_dbm, self.inner.fading.seed)
    }
}

/// Knife-edge diffraction loss in dB for clearance parameter `v`.
#[pyfunction]
fn knife_edge_loss(v: f64) -> f64 {
    propagation::knife_edge_loss(v)
}

/// First Fresnel zone radius at `d_obs` along a link of length `d`.
#[pyfunction]
fn fresnel_radius(d: f64, d_obs: f64, wavelength: f64) -> PyResult<f64> {
    classify::fresnel_radius(d, d_obs, wavelength).map_err(to_py)
}

/// Fresnel reflection coefficient at grazing angle `theta` (radians).
#[pyfunction]
#[pyo3(signature = (theta, eps_r, polarization="vertical"))]
fn reflection_coefficient(theta: f64, eps_r: f64, polarization: &str) -> PyResult<f64> {
    let pol = match polarization {
        "vertical" => propagation::Polarization::Vertical,
        "horizontal" => propagation::Polarization::Horizontal,
        other => return Err(PyValueError::new_err(format!("unknown polarization {other:?}"))),
    };
    propagation::reflection_coefficient(theta, eps_r, pol).map_err(to_py)
}

/// Foliage attenuation in dB per metre.
#[pyfunction]
#[pyo3(signature = (freq_hz=5.9e9))]
fn foliage_db_per_m(freq_hz: f64) -> f64 {
    propagation::foliage_mel_db_per_m(freq_hz)
}

/// Mean line-of-sight probability over vehicles with neighbours in `range`.
#[pyfunction]
#[pyo3(signature = (scene, range, freq_hz=5.9e9))]
fn p_los_system(py: Python<'_>, scene: &Scene, range: f64, freq_hz: f64) -> Option<f64> {
    let lambda = RadioConfig { frequency_hz: freq_hz, ..RadioConfig::default() }.wavelength();
    py.detach(|| plos::p_los_system(&scene.inner, range, &HeightModel::default(), lambda))
}

#[pyfunction]
fn x_max_solve(mu_s: f64, sigma_s: f64, mu_t: f64, sigma_t: f64) -> PyResult<f64> {
    relay::x_max_solve(mu_s, sigma_s, mu_t, sigma_t).map_err(to_py)
}

#[pyfunction]
fn p_tall_within(gamma_tall: f64, lambda_s: f64, x_max: f64) -> f64 {
    relay::p_tall_within(gamma_tall, lambda_s, x_max)
}

fn technique(name: &str, x_max: f64) -> PyResult<RelayTechnique> {
    match name {
        "farthest" => Ok(RelayTechnique::Farthest),
        "most_new_neighbors" | "most-new-neighbors" => Ok(RelayTechnique::MostNewNeighbors),
        "tvr" => Ok(RelayTechnique::Tvr { x_max }),
        other => Err(PyValueError::new_err(format!("unknown technique {other:?}"))),
    }
}

/// Relay technique comparison over scenes evaluated with `model`. Returns one
/// dict per technique.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (scenes, model, techniques=vec!["farthest".to_string(), "most_new_neighbors".to_string(), "tvr".to_string()], n_pairs=1000, seed=0, threshold_dbm=-90.0, x_max=relay::DEFAULT_X_MAX))]
fn compare_relays<'py>(
    py: Python<'py>,
    scenes: Vec<PyRef<'py, Scene>>,
    model: &ChannelModel,
    techniques: Vec<String>,
    n_pairs: usize,
    seed: u64,
    threshold_dbm: f64,
    x_max: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let techs = techniques.iter().map(|t| technique(t, x_max)).collect::<PyResult<Vec<_>>>()?;
    let scenes: Vec<&v2vgeo_core::Scene> = scenes.iter().map(|s| &s.inner).collect();
    let cmp = py.detach(|| {
        let graphs: Vec<_> =
            scenes.iter().map(|s| relay::build_graph(s, &model.inner, threshold_dbm, PowerBasis::Faded)).collect();
        relay::compare_techniques(&graphs, &techs, n_pairs, seed, relay::DEFAULT_HOP_LIMIT)
    });
    cmp.summaries
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("technique", &s.technique)?;
            d.set_item("best_route_pct", s.best_route_pct)?;
            d.set_item("success_pct", s.success_pct)?;
            d.set_item("mean_hops", s.mean_hops)?;
            d.set_item("relay_usage_pct", s.relay_usage_pct)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn v2vgeo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scene>()?;
    m.add_class::<ChannelModel>()?;
    m.add_class::<LinkReport>()?;
    m.add_function(wrap_pyfunction!(knife_edge_loss, m)?)?;
    m.add_function(wrap_pyfunction!(fresnel_radius, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(foliage_db_per_m, m)?)?;
    m.add_function(wrap_pyfunction!(p_los_system, m)?)?;
    m.add_function(wrap_pyfunction!(x_max_solve, m)?)?;
    m.add_function(wrap_pyfunction!(p_tall_within, m)?)?;
    m.add_function(wrap_pyfunction!(compare_relays, m)?)?;
    Ok(())
}
