//! Circular two-body orbits and polar Walker constellations.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::earthgeo::{rotate_to_ecef, EarthModel, Ecef, Eci, Vec3Km};
use crate::error::{Error, Result};

/// Earth's standard gravitational parameter, km³/s².
pub const MU_EARTH_KM3_S2: f64 = 3.986_004_418e5;

pub const MIN_ALTITUDE_KM: f64 = 160.0;
pub const MAX_ALTITUDE_KM: f64 = 36_000.0;

pub fn orbital_period_s(altitude_km: f64, earth: &EarthModel) -> f64 {
    let a = earth.radius_km + altitude_km;
    TAU * (a * a * a / MU_EARTH_KM3_S2).sqrt()
}

/// Circular-orbit speed in km/s.
pub fn orbital_speed_km_s(altitude_km: f64, earth: &EarthModel) -> f64 {
    TAU * (earth.radius_km + altitude_km) / orbital_period_s(altitude_km, earth)
}

fn check_altitude(altitude_km: f64) -> Result<()> {
    if (MIN_ALTITUDE_KM..=MAX_ALTITUDE_KM).contains(&altitude_km) {
        Ok(())
    } else {
        Err(Error::input(format!(
            "altitude {altitude_km} km outside [{MIN_ALTITUDE_KM}, {MAX_ALTITUDE_KM}]"
        )))
    }
}

fn wrap_tau(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    pub altitude_km: f64,
    pub inclination_rad: f64,
    pub raan_rad: f64,
    /// Argument of latitude at t = 0.
    pub phase_rad: f64,
}

impl CircularOrbit {
    /// Validates altitude and inclination; RAAN and phase are wrapped into [0, 2π).
    pub fn new(altitude_km: f64, inclination_rad: f64, raan_rad: f64, phase_rad: f64) -> Result<Self> {
        check_altitude(altitude_km)?;
        if !(0.0..=PI).contains(&inclination_rad) {
            return Err(Error::input(format!(
                "inclination {inclination_rad} rad outside [0, π]"
            )));
        }
        if !raan_rad.is_finite() || !phase_rad.is_finite() {
            return Err(Error::input("RAAN and phase must be finite"));
        }
        Ok(Self {
            altitude_km,
            inclination_rad,
            raan_rad: wrap_tau(raan_rad),
            phase_rad: wrap_tau(phase_rad),
        })
    }

    pub fn period_s(&self, earth: &EarthModel) -> f64 {
        orbital_period_s(self.altitude_km, earth)
    }

    pub fn propagator(&self, earth: &EarthModel) -> Propagator {
        Propagator::new(self, earth)
    }
}

/// Inertial position at time `t_s` (uniform circular motion).
pub fn propagate(orbit: &CircularOrbit, t_s: f64, earth: &EarthModel) -> Vec3Km<Eci> {
    orbit.propagator(earth).position_eci(t_s)
}

/// Orbit with its plane rotation and mean motion precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Propagator {
    radius_km: f64,
    mean_motion_rad_s: f64,
    phase_rad: f64,
    // columns of the perifocal → inertial rotation
    p: [f64; 3],
    q: [f64; 3],
}

impl Propagator {
    pub fn new(orbit: &CircularOrbit, earth: &EarthModel) -> Self {
        let (si, ci) = orbit.inclination_rad.sin_cos();
        let (so, co) = orbit.raan_rad.sin_cos();
        Self {
            radius_km: earth.radius_km + orbit.altitude_km,
            mean_motion_rad_s: TAU / orbit.period_s(earth),
            phase_rad: orbit.phase_rad,
            p: [co, so, 0.0],
            q: [-so * ci, co * ci, si],
        }
    }

    #[inline]
    pub fn position_eci(&self, t_s: f64) -> Vec3Km<Eci> {
        let (su, cu) = (self.phase_rad + self.mean_motion_rad_s * t_s).sin_cos();
        let (a, b) = (self.radius_km * cu, self.radius_km * su);
        Vec3Km::new(
            a * self.p[0] + b * self.q[0],
            a * self.p[1] + b * self.q[1],
            a * self.p[2] + b * self.q[2],
        )
    }

    /// Earth-fixed position given the Earth rotation angle's sine and cosine.
    #[inline]
    pub(crate) fn position_ecef_rot(&self, t_s: f64, sin_rot: f64, cos_rot: f64) -> Vec3Km<Ecef> {
        rotate_to_ecef(&self.position_eci(t_s), sin_rot, cos_rot)
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }
}

/// Satellite index within a constellation. Ordering is lexicographic (plane, slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatId {
    pub plane: usize,
    pub slot: usize,
}

impl SatId {
    pub const fn new(plane: usize, slot: usize) -> Self {
        Self { plane, slot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub id: SatId,
    pub position: Vec3Km<Ecef>,
    pub time_s: f64,
}

/// Angular extent over which polar plane RAANs are spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaanSpread {
    /// Planes over 180°; a polar plane already covers both hemispheres.
    #[default]
    Half,
    /// Planes over 360°, for sensitivity checks.
    Full,
}

impl RaanSpread {
    fn span_rad(self) -> f64 {
        match self {
            RaanSpread::Half => PI,
            RaanSpread::Full => TAU,
        }
    }
}

/// An N×M polar Walker grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct Constellation {
    planes: usize,
    slots: usize,
    altitude_km: f64,
    orbits: Vec<CircularOrbit>,
}

impl Constellation {
    pub fn planes(&self) -> usize {
        self.planes
    }

    pub fn slots_per_plane(&self) -> usize {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn altitude_km(&self) -> f64 {
        self.altitude_km
    }

    pub fn orbit(&self, id: SatId) -> &CircularOrbit {
        &self.orbits[self.flat(id)]
    }

    pub fn orbits(&self) -> &[CircularOrbit] {
        &self.orbits
    }

    pub fn ids(&self) -> impl Iterator<Item = SatId> + '_ {
        (0..self.planes).flat_map(move |p| (0..self.slots).map(move |s| SatId::new(p, s)))
    }

    pub(crate) fn flat(&self, id: SatId) -> usize {
        id.plane * self.slots + id.slot
    }

    /// A one-satellite "constellation" wrapping an arbitrary orbit.
    pub fn single(orbit: CircularOrbit) -> Self {
        Self {
            planes: 1,
            slots: 1,
            altitude_km: orbit.altitude_km,
            orbits: vec![orbit],
        }
    }

    /// Rotate every plane's RAAN by `delta_rad`; used to anchor the grid to a longitude.
    pub fn with_raan_offset(mut self, delta_rad: f64) -> Self {
        for o in &mut self.orbits {
            o.raan_rad = wrap_tau(o.raan_rad + delta_rad);
        }
        self
    }

    pub fn propagators(&self, earth: &EarthModel) -> Vec<Propagator> {
        self.orbits.iter().map(|o| o.propagator(earth)).collect()
    }

    pub fn states(&self, t_s: f64, earth: &EarthModel) -> Vec<SatelliteState> {
        let (s, c) = (earth.rotation_rate_rad_s * t_s).sin_cos();
        self.ids()
            .zip(self.propagators(earth))
            .map(|(id, p)| SatelliteState {
                id,
                position: p.position_ecef_rot(t_s, s, c),
                time_s: t_s,
            })
            .collect()
    }
}

/// Polar Walker constellation: `planes` equispaced planes with `slots` equally
/// phased satellites each. Plane `i` has RAAN `i·span/planes`; slot `j` in
/// plane `i` starts at argument of latitude `j·2π/slots + i·phase_offset_rad`.
pub fn walker_polar(
    planes: usize,
    slots: usize,
    altitude_km: f64,
    phase_offset_rad: f64,
    spread: RaanSpread,
) -> Result<Constellation> {
    if planes == 0 || slots == 0 {
        return Err(Error::input("constellation needs at least one plane and one slot"));
    }
    check_altitude(altitude_km)?;
    let raan_step = spread.span_rad() / planes as f64;
    let slot_step = TAU / slots as f64;
    let mut orbits = Vec::with_capacity(planes * slots);
    for i in 0..planes {
        for j in 0..slots {
            orbits.push(CircularOrbit::new(
                altitude_km,
                PI / 2.0,
                i as f64 * raan_step,
                j as f64 * slot_step + i as f64 * phase_offset_rad,
            )?);
        }
    }
    Ok(Constellation {
        planes,
        slots,
        altitude_km,
        orbits,
    })
}
