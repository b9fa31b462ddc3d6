//! Single-satellite orbit search, scenario documents, and the drivers that
//! turn a scenario into CSV/JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constellnet::{time_grid, Network, RateTimeSeries, RoutingOptions};
use crate::earthgeo::{
    geodetic_to_ecef, ground_distance_km, midpoint_longitude_deg, CityRecord, CityTable, EarthModel, GeodeticPoint,
};
use crate::error::{Error, Result};
use crate::linkbudget::{eta_atm, eta_fs, slant_range_km, to_db, LinkParams};
use crate::orbitprop::{walker_polar, CircularOrbit, Constellation, RaanSpread, MAX_ALTITUDE_KM, MIN_ALTITUDE_KM, MU_EARTH_KM3_S2};
use crate::relaychain::{sweep_chain, ChainCurve};

/// How orbit RAANs relate to the rotating Earth at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaanAnchor {
    /// RAAN 0 sits over the longitude midway between the two OGSs.
    #[default]
    MidpointLongitude,
    /// RAAN 0 sits over the prime meridian.
    PrimeMeridian,
}

impl RaanAnchor {
    pub fn offset_rad(self, ogs1: &GeodeticPoint, ogs2: &GeodeticPoint) -> f64 {
        match self {
            RaanAnchor::MidpointLongitude => midpoint_longitude_deg(ogs1, ogs2).to_radians(),
            RaanAnchor::PrimeMeridian => 0.0,
        }
    }
}

fn degree_steps(start: f64, end_exclusive: f64, step: f64) -> Vec<f64> {
    let n = ((end_exclusive - start) / step).ceil() as usize;
    (0..n).map(|i| start + i as f64 * step).collect()
}

/// Cartesian grid searched by [`optimize_single_sat`]. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizationGrid {
    pub altitudes_km: Vec<f64>,
    pub inclinations_deg: Vec<f64>,
    pub raans_deg: Vec<f64>,
    pub phases_deg: Vec<f64>,
    pub raan_anchor: RaanAnchor,
}

impl Default for OptimizationGrid {
    fn default() -> Self {
        Self {
            altitudes_km: vec![500.0, 800.0, 1000.0, 2000.0],
            inclinations_deg: degree_steps(0.0, 90.0 + 2.5, 5.0),
            raans_deg: degree_steps(0.0, 360.0, 10.0),
            phases_deg: degree_steps(0.0, 360.0, 30.0),
            raan_anchor: RaanAnchor::MidpointLongitude,
        }
    }
}

/// One point of an [`OptimizationGrid`], in degrees as listed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub phase_deg: f64,
}

impl OptimizationGrid {
    /// A grid holding exactly one orbit.
    pub fn single(altitude_km: f64, inclination_deg: f64, raan_deg: f64, phase_deg: f64) -> Self {
        Self {
            altitudes_km: vec![altitude_km],
            inclinations_deg: vec![inclination_deg],
            raans_deg: vec![raan_deg],
            phases_deg: vec![phase_deg],
            raan_anchor: RaanAnchor::MidpointLongitude,
        }
    }

    pub fn len(&self) -> usize {
        self.altitudes_km.len() * self.inclinations_deg.len() * self.raans_deg.len() * self.phases_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point `index` in altitude-major, then inclination, RAAN, phase order.
    pub fn point(&self, index: usize) -> GridPoint {
        let np = self.phases_deg.len();
        let nr = self.raans_deg.len();
        let ni = self.inclinations_deg.len();
        GridPoint {
            index,
            phase_deg: self.phases_deg[index % np],
            raan_deg: self.raans_deg[(index / np) % nr],
            inclination_deg: self.inclinations_deg[(index / (np * nr)) % ni],
            altitude_km: self.altitudes_km[index / (np * nr * ni)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("grid.altitudes_km", &self.altitudes_km),
            ("grid.inclinations_deg", &self.inclinations_deg),
            ("grid.raans_deg", &self.raans_deg),
            ("grid.phases_deg", &self.phases_deg),
        ];
        for (field, axis) in axes {
            if axis.is_empty() {
                return Err(Error::scenario(field, "must not be empty"));
            }
            if let Some(v) = axis.iter().find(|v| !v.is_finite()) {
                return Err(Error::scenario(field, format!("{v} is not finite")));
            }
        }
        if let Some(h) = self.altitudes_km.iter().find(|h| !(MIN_ALTITUDE_KM..=MAX_ALTITUDE_KM).contains(*h)) {
            return Err(Error::scenario(
                "grid.altitudes_km",
                format!("{h} km outside [{MIN_ALTITUDE_KM}, {MAX_ALTITUDE_KM}]"),
            ));
        }
        if let Some(i) = self.inclinations_deg.iter().find(|i| !(0.0..=180.0).contains(*i)) {
            return Err(Error::scenario("grid.inclinations_deg", format!("{i} outside [0, 180]")));
        }
        Ok(())
    }
}

/// Sampling window shared by every time sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeWindow {
    pub window_s: f64,
    pub step_s: f64,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self {
            window_s: 86_400.0,
            step_s: 10.0,
        }
    }
}

/// Best max rate found at one altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeBest {
    pub altitude_km: f64,
    pub max_rate_hz: f64,
    pub point: GridPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSatResult {
    pub best: GridPoint,
    /// The winning orbit with its RAAN anchor applied.
    pub orbit: CircularOrbit,
    pub series: RateTimeSeries,
    pub per_altitude: Vec<AltitudeBest>,
}

/// Exhaustive search for the single orbit with the highest max rate between
/// two OGSs. Ties keep the earliest grid point.
pub fn optimize_single_sat(
    ogs1: &GeodeticPoint,
    ogs2: &GeodeticPoint,
    grid: &OptimizationGrid,
    params: &LinkParams,
    earth: &EarthModel,
    window: &TimeWindow,
) -> Result<SingleSatResult> {
    grid.validate()?;
    params.validate()?;
    let times = time_grid(window.window_s, window.step_s)?;
    let g1 = geodetic_to_ecef(ogs1, earth)?;
    let g2 = geodetic_to_ecef(ogs2, earth)?;
    let anchor = grid.raan_anchor.offset_rad(ogs1, ogs2);
    let orbit_at = |pt: &GridPoint| {
        CircularOrbit::new(
            pt.altitude_km,
            pt.inclination_deg.to_radians(),
            pt.raan_deg.to_radians() + anchor,
            pt.phase_deg.to_radians(),
        )
    };

    let maxima: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let c = Constellation::single(orbit_at(&grid.point(i))?);
            Ok(Network::new(&c, params, earth).sweep_stats(&g1, &g2, &times).max_rate_hz)
        })
        .collect::<Result<_>>()?;

    let mut per_altitude: Vec<AltitudeBest> = Vec::new();
    let mut best = 0usize;
    for (i, &m) in maxima.iter().enumerate() {
        if m > maxima[best] {
            best = i;
        }
        let pt = grid.point(i);
        match per_altitude.iter_mut().find(|a| a.altitude_km == pt.altitude_km) {
            Some(a) if m > a.max_rate_hz => {
                a.max_rate_hz = m;
                a.point = pt;
            }
            Some(_) => {}
            None => per_altitude.push(AltitudeBest {
                altitude_km: pt.altitude_km,
                max_rate_hz: m,
                point: pt,
            }),
        }
    }

    let point = grid.point(best);
    let orbit = orbit_at(&point)?;
    let c = Constellation::single(orbit);
    let series = Network::new(&c, params, earth).time_sweep(ogs1, ogs2, window.window_s, window.step_s)?;
    Ok(SingleSatResult {
        best: point,
        orbit,
        series,
        per_altitude,
    })
}

/// A ground station given by city name or explicit coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OgsSpec {
    City(String),
    Point(GeodeticPoint),
}

impl OgsSpec {
    pub fn label(&self) -> String {
        match self {
            OgsSpec::City(name) => name.clone(),
            OgsSpec::Point(p) => format!("{},{}", p.latitude_deg, p.longitude_deg),
        }
    }

    /// Accepts a city name or `lat,lon` in degrees.
    pub fn parse(text: &str) -> Self {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if let [lat, lon] = parts[..] {
            if let (Ok(lat), Ok(lon)) = (lat.parse(), lon.parse()) {
                return OgsSpec::Point(GeodeticPoint {
                    latitude_deg: lat,
                    longitude_deg: lon,
                    altitude_km: 0.0,
                });
            }
        }
        OgsSpec::City(text.trim().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Fig3,
    SingleSat,
    ChainSweep,
    Constellation,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Fig3 => "fig3",
            ScenarioKind::SingleSat => "single_sat",
            ScenarioKind::ChainSweep => "chain_sweep",
            ScenarioKind::Constellation => "constellation",
        }
    }
}

/// Transmittance-versus-ground-distance curve settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Spec {
    pub altitude_km: f64,
    pub max_ground_km: f64,
    pub step_km: f64,
}

impl Default for Fig3Spec {
    fn default() -> Self {
        Self {
            altitude_km: 500.0,
            max_ground_km: 2000.0,
            step_km: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSpec {
    pub altitudes_km: Vec<f64>,
    pub min_ground_km: f64,
    pub max_ground_km: f64,
    pub step_km: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self {
            altitudes_km: vec![500.0, 800.0, 1000.0, 2000.0],
            min_ground_km: 100.0,
            max_ground_km: 20_000.0,
            step_km: 50.0,
        }
    }
}

impl ChainSpec {
    pub fn ground_grid(&self) -> Vec<f64> {
        let n = ((self.max_ground_km - self.min_ground_km) / self.step_km * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|i| self.min_ground_km + i as f64 * self.step_km).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationSpec {
    pub planes: usize,
    pub slots: usize,
    pub altitude_km: f64,
    pub phase_offset_deg: f64,
    pub raan_spread: RaanSpread,
    pub raan_anchor: RaanAnchor,
    pub routing: RoutingOptions,
}

impl Default for ConstellationSpec {
    fn default() -> Self {
        Self {
            planes: 5,
            slots: 5,
            altitude_km: 500.0,
            phase_offset_deg: 0.0,
            raan_spread: RaanSpread::Half,
            raan_anchor: RaanAnchor::MidpointLongitude,
            routing: RoutingOptions::default(),
        }
    }
}

impl ConstellationSpec {
    pub fn build(&self, ogs1: &GeodeticPoint, ogs2: &GeodeticPoint) -> Result<Constellation> {
        let c = walker_polar(
            self.planes,
            self.slots,
            self.altitude_km,
            self.phase_offset_deg.to_radians(),
            self.raan_spread,
        )?;
        Ok(c.with_raan_offset(self.raan_anchor.offset_rad(ogs1, ogs2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// A complete experiment description. Every section has defaults; which
/// sections matter depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub ogs_pair: Option<[OgsSpec; 2]>,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub earth: EarthModel,
    #[serde(default)]
    pub time: TimeWindow,
    #[serde(default)]
    pub grid: OptimizationGrid,
    #[serde(default)]
    pub constellation: ConstellationSpec,
    #[serde(default)]
    pub chain: ChainSpec,
    #[serde(default)]
    pub fig3: Fig3Spec,
    /// Extra or replacement entries for the built-in city table.
    #[serde(default)]
    pub cities: Vec<CityRecord>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Scenario {
    /// Defaults for `kind`, with a representative OGS pair where one is needed.
    pub fn new(kind: ScenarioKind) -> Self {
        let pair = |a: &str, b: &str| Some([OgsSpec::City(a.into()), OgsSpec::City(b.into())]);
        Self {
            kind,
            ogs_pair: match kind {
                ScenarioKind::SingleSat => pair("Los Angeles", "Santa Barbara"),
                ScenarioKind::Constellation => pair("Los Angeles", "New York"),
                _ => None,
            },
            link: LinkParams::default(),
            earth: EarthModel::default(),
            time: TimeWindow::default(),
            grid: OptimizationGrid::default(),
            constellation: ConstellationSpec::default(),
            chain: ChainSpec::default(),
            fig3: Fig3Spec::default(),
            cities: Vec::new(),
            output: OutputSpec::default(),
        }
    }

    /// Parses a scenario document; errors carry the offending field path.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::scenario(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn city_table(&self) -> Result<CityTable> {
        let mut table = CityTable::builtin();
        for (i, rec) in self.cities.iter().enumerate() {
            table
                .insert(rec.clone())
                .map_err(|e| Error::scenario(format!("cities[{i}]"), strip_prefix(e)))?;
        }
        Ok(table)
    }

    /// The two OGS locations, with city names looked up.
    pub fn resolve_ogs(&self) -> Result<[GeodeticPoint; 2]> {
        let Some(pair) = &self.ogs_pair else {
            return Err(Error::scenario(
                "ogs_pair",
                format!("required for kind `{}`", self.kind.as_str()),
            ));
        };
        let table = self.city_table()?;
        let resolve = |i: usize| -> Result<GeodeticPoint> {
            let field = format!("ogs_pair[{i}]");
            match &pair[i] {
                OgsSpec::City(name) => table
                    .get(name)
                    .ok_or_else(|| Error::scenario(field, format!("unknown city `{name}`"))),
                OgsSpec::Point(p) => {
                    p.validate().map_err(|e| Error::scenario(field, strip_prefix(e)))?;
                    Ok(*p)
                }
            }
        };
        Ok([resolve(0)?, resolve(1)?])
    }

    /// Checks everything the scenario's kind depends on.
    pub fn validate(&self) -> Result<()> {
        self.link.validate().map_err(wrap("link"))?;
        self.earth.validate().map_err(wrap("earth"))?;
        self.city_table()?;
        match self.kind {
            ScenarioKind::Fig3 => {
                let f = &self.fig3;
                if !(f.altitude_km > self.earth.karman_altitude_km && f.altitude_km.is_finite()) {
                    return Err(Error::scenario("fig3.altitude_km", "must lie above the Karman line"));
                }
                if !(f.step_km > 0.0 && f.max_ground_km >= 0.0 && f.max_ground_km.is_finite()) {
                    return Err(Error::scenario("fig3", "need step_km > 0 and a finite max_ground_km >= 0"));
                }
            }
            ScenarioKind::ChainSweep => {
                let c = &self.chain;
                if c.altitudes_km.is_empty() {
                    return Err(Error::scenario("chain.altitudes_km", "must not be empty"));
                }
                if let Some(h) = c.altitudes_km.iter().find(|h| !(**h > self.earth.karman_altitude_km && h.is_finite())) {
                    return Err(Error::scenario("chain.altitudes_km", format!("{h} km is not above the Karman line")));
                }
                let half = std::f64::consts::PI * self.earth.radius_km;
                if !(c.step_km > 0.0 && c.min_ground_km >= 0.0 && c.min_ground_km <= c.max_ground_km && c.max_ground_km <= half) {
                    return Err(Error::scenario(
                        "chain",
                        format!("need step_km > 0 and 0 <= min_ground_km <= max_ground_km <= {half:.1}"),
                    ));
                }
            }
            ScenarioKind::SingleSat => {
                self.resolve_ogs()?;
                self.grid.validate()?;
                time_grid(self.time.window_s, self.time.step_s).map_err(wrap("time"))?;
            }
            ScenarioKind::Constellation => {
                let [a, b] = self.resolve_ogs()?;
                self.constellation.build(&a, &b).map_err(wrap("constellation"))?;
                time_grid(self.time.window_s, self.time.step_s).map_err(wrap("time"))?;
            }
        }
        Ok(())
    }

    /// The resolved parameter set written into every summary. The output
    /// location is left out so identical runs in different directories
    /// produce identical bytes.
    pub fn params_echo(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self).expect("scenario serializes");
        let obj = v.as_object_mut().expect("scenario is an object");
        obj.remove("output");
        if self.ogs_pair.is_some() {
            let pts = self.resolve_ogs()?;
            let labels = self.ogs_pair.as_ref().map(|p| [p[0].label(), p[1].label()]).unwrap_or_default();
            obj.insert(
                "ogs_resolved".into(),
                json!([
                    {"label": labels[0], "point": pts[0]},
                    {"label": labels[1], "point": pts[1]},
                ]),
            );
            obj.insert("ogs_ground_distance_km".into(), json!(ground_distance_km(&pts[0], &pts[1], &self.earth)?));
        }
        let altitudes: Vec<f64> = match self.kind {
            ScenarioKind::Fig3 => vec![self.fig3.altitude_km],
            ScenarioKind::ChainSweep => self.chain.altitudes_km.clone(),
            ScenarioKind::SingleSat => self.grid.altitudes_km.clone(),
            ScenarioKind::Constellation => vec![self.constellation.altitude_km],
        };
        let cutoffs: Vec<_> = altitudes
            .iter()
            .map(|&h| json!({"altitude_km": h, "ground_cutoff_km": self.link.ground_cutoff_km(h, &self.earth)}))
            .collect();
        obj.insert(
            "constants".into(),
            json!({
                "mu_earth_km3_s2": MU_EARTH_KM3_S2,
                "min_orbit_altitude_km": MIN_ALTITUDE_KM,
                "max_orbit_altitude_km": MAX_ALTITUDE_KM,
                "downlink_cutoffs": cutoffs,
            }),
        );
        Ok(v)
    }
}

fn wrap(field: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::scenario(field, strip_prefix(e))
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::InvalidInput(m) => m,
        Error::Scenario { field, message } => format!("{field}: {message}"),
        other => other.to_string(),
    }
}

/// One row of the transmittance-versus-ground-distance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub ground_km: f64,
    pub eta_fs: f64,
    pub eta_atm: f64,
    pub db_fs: f64,
    pub db_atm: f64,
}

/// Diffraction and atmospheric transmittance of a downlink from altitude
/// `curve.altitude_km` to an OGS at each ground distance.
pub fn fig3_curve(curve: &Fig3Spec, params: &LinkParams, earth: &EarthModel) -> Vec<Fig3Row> {
    let n = (curve.max_ground_km / curve.step_km * (1.0 + 1e-12)).floor() as usize;
    (0..=n)
        .map(|i| {
            let g = i as f64 * curve.step_km;
            let l = slant_range_km(curve.altitude_km, g / earth.radius_km, earth);
            let fs = eta_fs(l * 1000.0, params.beam_waist_m, params.ogs_aperture_m, params.wavelength_m);
            let atm = eta_atm(curve.altitude_km, l, params.eta_zenith, earth.radius_km);
            Fig3Row {
                ground_km: g,
                eta_fs: fs,
                eta_atm: atm,
                db_fs: to_db(fs),
                db_atm: to_db(atm),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct ChainRow {
    h_km: f64,
    #[serde(rename = "D_km")]
    d_km: f64,
    k: usize,
    rate_hz: f64,
    rate_db_loss: f64,
}

#[derive(Serialize)]
struct RateRow<'a> {
    t_s: f64,
    rate_hz: f64,
    path_color: Option<&'a str>,
    eps_plane: Option<usize>,
    eps_slot: Option<usize>,
}

fn rate_rows(series: &RateTimeSeries) -> Vec<RateRow<'static>> {
    series
        .times_s
        .iter()
        .zip(&series.rates_hz)
        .zip(&series.chosen)
        .map(|((&t_s, &rate_hz), c)| RateRow {
            t_s,
            rate_hz,
            path_color: c.map(|c| c.color.as_str()),
            eps_plane: c.map(|c| c.eps.plane),
            eps_slot: c.map(|c| c.eps.slot),
        })
        .collect()
}

fn encode<T: Serialize>(rows: &[T], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).expect("rows serialize to CSV");
            }
            w.into_inner().expect("in-memory CSV writer")
        }
        OutputFormat::Json => pretty(&rows),
    }
}

fn pretty<T: Serialize + ?Sized>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("value serializes to JSON");
    out.push(b'\n');
    out
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

/// Files produced by one scenario run, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// The contents of `summary.json`.
    pub summary: serde_json::Value,
}

/// Validates `s`, runs it, and writes its artifacts under `s.output.dir`.
pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    s.validate()?;
    let fmt = s.output.format;
    let data_name = |stem: &str| format!("{stem}.{}", extension(fmt));
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let echo = s.params_echo()?;

    let summary = match s.kind {
        ScenarioKind::Fig3 => {
            let rows = fig3_curve(&s.fig3, &s.link, &s.earth);
            files.push((data_name("fig3"), encode(&rows, fmt)));
            json!({"rows": rows.len(), "params_echo": echo})
        }
        ScenarioKind::ChainSweep => {
            let curves = sweep_chain(&s.chain.ground_grid(), &s.chain.altitudes_km, &s.link, &s.earth)?;
            let rows: Vec<ChainRow> = curves
                .iter()
                .flat_map(|c| {
                    c.points.iter().map(|p| ChainRow {
                        h_km: c.altitude_km,
                        d_km: p.ground_distance_km,
                        k: p.satellite_count,
                        rate_hz: p.rate_hz,
                        rate_db_loss: p.rate_db_loss(&s.link),
                    })
                })
                .collect();
            files.push((data_name("chain"), encode(&rows, fmt)));
            let disc = chain_discontinuities(&curves);
            files.push(("chain_discontinuities.json".into(), pretty(&disc)));
            json!({"discontinuities": disc, "params_echo": echo})
        }
        ScenarioKind::SingleSat => {
            let [a, b] = s.resolve_ogs()?;
            let r = optimize_single_sat(&a, &b, &s.grid, &s.link, &s.earth, &s.time)?;
            files.push((data_name("rates"), encode(&rate_rows(&r.series), fmt)));
            json!({
                "max_rate_hz": r.series.max_rate_hz,
                "mean_all_hz": r.series.mean_all_hz,
                "mean_visible_hz": r.series.mean_visible_hz,
                "best_point": r.best,
                "best_orbit": r.orbit,
                "per_altitude": r.per_altitude,
                "params_echo": echo,
            })
        }
        ScenarioKind::Constellation => {
            let [a, b] = s.resolve_ogs()?;
            let c = s.constellation.build(&a, &b)?;
            let series = Network::new(&c, &s.link, &s.earth)
                .with_routing(s.constellation.routing)
                .time_sweep(&a, &b, s.time.window_s, s.time.step_s)?;
            files.push((data_name("rates"), encode(&rate_rows(&series), fmt)));
            json!({
                "max_rate_hz": series.max_rate_hz,
                "mean_all_hz": series.mean_all_hz,
                "mean_visible_hz": series.mean_visible_hz,
                "params_echo": echo,
            })
        }
    };
    files.push(("summary.json".into(), pretty(&summary)));

    let dir = &s.output.dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
        written.push(path);
    }
    Ok(RunReport { files: written, summary })
}

fn chain_discontinuities(curves: &[ChainCurve]) -> serde_json::Value {
    json!(curves
        .iter()
        .map(|c| json!({"altitude_km": c.altitude_km, "discontinuities": c.discontinuities}))
        .collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = OptimizationGrid::default();
        assert_eq!(g.inclinations_deg.len(), 19);
        assert_eq!(*g.inclinations_deg.last().unwrap(), 90.0);
        assert_eq!(g.raans_deg.len(), 36);
        assert_eq!(g.phases_deg.len(), 12);
        assert_eq!(g.len(), 4 * 19 * 36 * 12);
        let last = g.point(g.len() - 1);
        assert_eq!((last.altitude_km, last.inclination_deg, last.raan_deg, last.phase_deg), (2000.0, 90.0, 350.0, 330.0));
        let p = g.point(12 * 36 + 12 + 1);
        assert_eq!((p.altitude_km, p.inclination_deg, p.raan_deg, p.phase_deg), (500.0, 5.0, 10.0, 30.0));
    }

    #[test]
    fn one_point_grid_returns_that_orbit() {
        let e = EarthModel::default();
        let a = GeodeticPoint::ground(34.05, -118.24).unwrap();
        let b = GeodeticPoint::ground(40.71, -74.01).unwrap();
        let g = OptimizationGrid::single(500.0, 45.0, 20.0, 60.0);
        let w = TimeWindow {
            window_s: 3600.0,
            step_s: 60.0,
        };
        let r = optimize_single_sat(&a, &b, &g, &LinkParams::default(), &e, &w).unwrap();
        assert_eq!(r.best.index, 0);
        assert_eq!(r.orbit.inclination_rad, 45f64.to_radians());
        assert_eq!(r.series.rates_hz.len(), 60);
    }

    #[test]
    fn ogs_spec_parsing() {
        assert_eq!(OgsSpec::parse("Tokyo"), OgsSpec::City("Tokyo".into()));
        match OgsSpec::parse(" 10.5, -20 ") {
            OgsSpec::Point(p) => assert_eq!((p.latitude_deg, p.longitude_deg), (10.5, -20.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scenario_json_rejects_unknown_keys_with_path() {
        let err = Scenario::from_json_str(r#"{"kind":"fig3","link":{"wavelength":1}}"#).unwrap_err();
        match err {
            Error::Scenario { field, .. } => assert_eq!(field, "link.wavelength"),
            other => panic!("{other:?}"),
        }
        let s = Scenario::from_json_str(
            r#"{"kind":"constellation","ogs_pair":["Tokyo",{"latitude_deg":1,"longitude_deg":2}]}"#,
        )
        .unwrap();
        assert_eq!(s.resolve_ogs().unwrap()[1].longitude_deg, 2.0);
    }

    #[test]
    fn validation_names_fields() {
        let mut s = Scenario::new(ScenarioKind::Constellation);
        s.ogs_pair = Some([OgsSpec::City("Atlantis".into()), OgsSpec::City("Tokyo".into())]);
        let field = |s: &Scenario| match s.validate().unwrap_err() {
            Error::Scenario { field, .. } => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(&s), "ogs_pair[0]");
        s.cities.push(CityRecord {
            name: "Atlantis".into(),
            lat_deg: 30.0,
            lon_deg: -40.0,
        });
        s.validate().unwrap();
        s.link.eta_zenith = 1.5;
        assert_eq!(field(&s), "link");
        s.link.eta_zenith = 0.47;
        s.constellation.planes = 0;
        assert_eq!(field(&s), "constellation");
        let mut g = Scenario::new(ScenarioKind::SingleSat);
        g.grid.phases_deg.clear();
        assert_eq!(field(&g), "grid.phases_deg");
        g.ogs_pair = None;
        assert_eq!(field(&g), "ogs_pair");
    }

    #[test]
    fn fig3_zenith_point() {
        let rows = fig3_curve(&Fig3Spec::default(), &LinkParams::default(), &EarthModel::default());
        assert_eq!(rows.len(), 201);
        assert_eq!(rows[0].eta_atm, 0.47);
        assert_eq!(rows[200].ground_km, 2000.0);
        assert!(rows.windows(2).all(|w| w[1].eta_fs < w[0].eta_fs && w[1].eta_atm < w[0].eta_atm));
    }

    #[test]
    fn chain_ground_grid() {
        let g = ChainSpec::default().ground_grid();
        assert_eq!(g.first(), Some(&100.0));
        assert_eq!(g.last(), Some(&20_000.0));
        assert_eq!(g.len(), 399);
    }
}
