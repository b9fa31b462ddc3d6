//! Spherical-Earth geometry.
//!
//! Positions are Earth-centered Cartesian vectors in kilometers, tagged at the
//! type level with the frame they live in ([`Eci`] or [`Ecef`]). The two frames
//! coincide at simulation time `t = 0` and the rotating frame turns at the
//! sidereal rate about the shared z-axis.

use std::f64::consts::{PI, TAU};
use std::marker::PhantomData;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod cities;
pub use cities::{CityRecord, CityTable};

/// Mean Earth radius used throughout the model, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
/// Top of the atmosphere for inter-satellite links, km.
pub const KARMAN_ALTITUDE_KM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EarthModel {
    pub radius_km: f64,
    pub rotation_rate_rad_s: f64,
    pub karman_altitude_km: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            radius_km: EARTH_RADIUS_KM,
            rotation_rate_rad_s: EARTH_ROTATION_RAD_S,
            karman_altitude_km: KARMAN_ALTITUDE_KM,
        }
    }
}

impl EarthModel {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.radius_km, self.rotation_rate_rad_s, self.karman_altitude_km]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::input("earth model constants must be finite and strictly positive"))
        }
    }

    /// Great-circle ground distance for a central angle.
    pub fn ground_distance_km(&self, central_angle_rad: f64) -> f64 {
        self.radius_km * central_angle_rad
    }

    /// Length of one sidereal day for this model, in seconds.
    pub fn sidereal_day_s(&self) -> f64 {
        TAU / self.rotation_rate_rad_s
    }
}

/// Inertial frame marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eci {}

/// Earth-fixed frame marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ecef {}

/// Earth-centered Cartesian vector in km, tagged with its frame.
#[derive(Debug)]
pub struct Vec3Km<F> {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    frame: PhantomData<F>,
}

impl<F> Clone for Vec3Km<F> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<F> Copy for Vec3Km<F> {}

impl<F> PartialEq for Vec3Km<F> {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.y == other.y && self.z == other.z
    }
}

impl<F> Vec3Km<F> {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            x,
            y,
            z,
            frame: PhantomData,
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    fn key(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }
}

impl<F> Add for Vec3Km<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<F> Sub for Vec3Km<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<F> Mul<f64> for Vec3Km<F> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Location on the spherical Earth. Latitude is geocentric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodeticPoint {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_km: f64,
}

impl GeodeticPoint {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_km: f64) -> Result<Self> {
        let p = Self {
            latitude_deg,
            longitude_deg,
            altitude_km,
        };
        p.validate()?;
        Ok(p)
    }

    /// Ground-level point.
    pub fn ground(latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        Self::new(latitude_deg, longitude_deg, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::input(format!(
                "latitude {} deg outside [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::input(format!(
                "longitude {} deg outside [-180, 180]",
                self.longitude_deg
            )));
        }
        if !(self.altitude_km >= 0.0 && self.altitude_km.is_finite()) {
            return Err(Error::input(format!(
                "altitude {} km must be finite and non-negative",
                self.altitude_km
            )));
        }
        Ok(())
    }
}

pub fn geodetic_to_ecef(p: &GeodeticPoint, earth: &EarthModel) -> Result<Vec3Km<Ecef>> {
    p.validate()?;
    let r = earth.radius_km + p.altitude_km;
    let (slat, clat) = p.latitude_deg.to_radians().sin_cos();
    let (slon, clon) = p.longitude_deg.to_radians().sin_cos();
    Ok(Vec3Km::new(r * clat * clon, r * clat * slon, r * slat))
}

/// Inverse of [`geodetic_to_ecef`]. Longitude at the poles is reported as 0.
pub fn ecef_to_geodetic(v: &Vec3Km<Ecef>, earth: &EarthModel) -> Result<GeodeticPoint> {
    let r = v.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::input("cannot convert the zero vector to geodetic"));
    }
    let lat = (v.z / r).clamp(-1.0, 1.0).asin().to_degrees();
    let lon = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        v.y.atan2(v.x).to_degrees()
    };
    Ok(GeodeticPoint {
        latitude_deg: lat,
        longitude_deg: lon,
        altitude_km: (r - earth.radius_km).max(0.0),
    })
}

/// Rotate an inertial vector into the Earth-fixed frame at time `t_s`.
pub fn eci_to_ecef(v: &Vec3Km<Eci>, t_s: f64, earth: &EarthModel) -> Vec3Km<Ecef> {
    let (s, c) = (earth.rotation_rate_rad_s * t_s).sin_cos();
    rotate_to_ecef(v, s, c)
}

/// Rotation by the angle whose sine/cosine are given; lets sweeps reuse one
/// `sin_cos` per time sample across many satellites.
#[inline]
pub(crate) fn rotate_to_ecef(v: &Vec3Km<Eci>, sin_theta: f64, cos_theta: f64) -> Vec3Km<Ecef> {
    Vec3Km::new(
        cos_theta * v.x + sin_theta * v.y,
        -sin_theta * v.x + cos_theta * v.y,
        v.z,
    )
}

/// Inverse of [`eci_to_ecef`].
pub fn ecef_to_eci(v: &Vec3Km<Ecef>, t_s: f64, earth: &EarthModel) -> Vec3Km<Eci> {
    let (s, c) = (earth.rotation_rate_rad_s * t_s).sin_cos();
    Vec3Km::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Angle subtended at Earth's center by two position vectors, in [0, π].
pub fn central_angle<F>(a: &Vec3Km<F>, b: &Vec3Km<F>) -> Result<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::input("central angle of a zero vector is undefined"));
    }
    // atan2 form stays accurate near 0 and π where acos loses precision
    let cross = a.cross(b).norm();
    Ok(cross.atan2(a.dot(b)).clamp(0.0, PI))
}

/// Lowest altitude reached along the straight segment between `a` and `b`.
///
/// Negative when the segment dips below the surface.
pub fn los_min_altitude<F>(a: &Vec3Km<F>, b: &Vec3Km<F>, earth: &EarthModel) -> f64 {
    // fixed endpoint order so the result is bit-identical under exchange
    let (a, b) = if a.key() <= b.key() { (a, b) } else { (b, a) };
    let d = *b - *a;
    let dd = d.dot(&d);
    let s = if dd == 0.0 {
        0.0
    } else {
        (-a.dot(&d) / dd).clamp(0.0, 1.0)
    };
    (*a + d * s).norm() - earth.radius_km
}

/// Longitude of the great-circle midpoint of two ground points; anchors the
/// scenario epoch. Falls back to `a`'s longitude for antipodal pairs.
pub fn midpoint_longitude_deg(a: &GeodeticPoint, b: &GeodeticPoint) -> f64 {
    let earth = EarthModel::default();
    let (Ok(va), Ok(vb)) = (geodetic_to_ecef(a, &earth), geodetic_to_ecef(b, &earth)) else {
        return a.longitude_deg;
    };
    let m = va * (1.0 / va.norm()) + vb * (1.0 / vb.norm());
    if m.x.abs() < 1e-12 && m.y.abs() < 1e-12 {
        a.longitude_deg
    } else {
        m.y.atan2(m.x).to_degrees()
    }
}

/// Ground distance between two surface points in km.
pub fn ground_distance_km(a: &GeodeticPoint, b: &GeodeticPoint, earth: &EarthModel) -> Result<f64> {
    let va = geodetic_to_ecef(a, earth)?;
    let vb = geodetic_to_ecef(b, earth)?;
    Ok(earth.ground_distance_km(central_angle(&va, &vb)?))
}
