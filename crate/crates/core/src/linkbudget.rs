//! Per-link transmittance: Gaussian-beam diffraction, Beer-Lambert atmosphere
//! along a slant path, relay optics and pointing, and the two-arm pair rate.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::earthgeo::EarthModel;
use crate::error::{Error, Result};

pub const WAVELENGTH_810_NM: f64 = 810e-9;
pub const WAVELENGTH_1550_NM: f64 = 1550e-9;

/// Absorbs round-off when a ground distance is recovered from a slant range,
/// so a satellite placed exactly at the cutoff still serves.
const CUTOFF_SLACK_KM: f64 = 1e-6;

/// How the transmit waist of inter-satellite links is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamWaistMode {
    /// Use `beam_waist_m` everywhere.
    #[default]
    Fixed,
    /// ISLs use the waist that maximizes collection at their own length.
    PerLinkOptimal,
}

/// Rule that decides when a satellite is close enough to serve an OGS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// Ground distance to the nadir must not exceed `max_downlink_ground_km`
    /// at every altitude.
    GroundDistance,
    /// The zenith angle reached at `max_downlink_ground_km` from a satellite at
    /// `cutoff_reference_altitude_km` is the limit at every altitude.
    #[default]
    ZenithEquivalent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    pub wavelength_m: f64,
    pub beam_waist_m: f64,
    /// Receive aperture radius at the ground telescope.
    pub ogs_aperture_m: f64,
    /// Receive aperture radius on relay satellites.
    pub sat_aperture_m: f64,
    /// Atmospheric transmittance at zenith.
    pub eta_zenith: f64,
    /// Port-to-port throughput of one satellite.
    pub relay_efficiency: f64,
    pub pointing_efficiency: f64,
    pub source_rate_hz: f64,
    pub max_downlink_ground_km: f64,
    pub cutoff_rule: CutoffRule,
    pub cutoff_reference_altitude_km: f64,
    pub beam_waist_mode: BeamWaistMode,
    /// Apply `pointing_efficiency` to satellite-to-ground links too.
    pub pointing_on_downlinks: bool,
    /// Charge the emitting satellite's optics with one relay factor per arm.
    pub relay_on_source: bool,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            wavelength_m: WAVELENGTH_810_NM,
            beam_waist_m: 0.10,
            ogs_aperture_m: 0.75,
            sat_aperture_m: 0.25,
            eta_zenith: 0.47,
            relay_efficiency: 0.99,
            pointing_efficiency: 0.80,
            source_rate_hz: 1e9,
            max_downlink_ground_km: 1000.0,
            cutoff_rule: CutoffRule::ZenithEquivalent,
            cutoff_reference_altitude_km: 500.0,
            beam_waist_mode: BeamWaistMode::Fixed,
            pointing_on_downlinks: false,
            relay_on_source: true,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("eta_zenith", self.eta_zenith),
            ("relay_efficiency", self.relay_efficiency),
            ("pointing_efficiency", self.pointing_efficiency),
        ];
        for (name, v) in unit {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::input(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("beam_waist_m", self.beam_waist_m),
            ("ogs_aperture_m", self.ogs_aperture_m),
            ("sat_aperture_m", self.sat_aperture_m),
            ("source_rate_hz", self.source_rate_hz),
            ("max_downlink_ground_km", self.max_downlink_ground_km),
            ("cutoff_reference_altitude_km", self.cutoff_reference_altitude_km),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} = {v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    /// Largest nadir ground distance (km) at which a satellite at
    /// `altitude_km` may serve an OGS.
    pub fn ground_cutoff_km(&self, altitude_km: f64, earth: &EarthModel) -> f64 {
        match self.cutoff_rule {
            CutoffRule::GroundDistance => self.max_downlink_ground_km,
            CutoffRule::ZenithEquivalent => {
                let r = earth.radius_km;
                let theta_ref = self.max_downlink_ground_km / r;
                let rs = r + self.cutoff_reference_altitude_km;
                let l = slant_range_km(self.cutoff_reference_altitude_km, theta_ref, earth);
                let cos_zeta = ((rs * theta_ref.cos() - r) / l).clamp(-1.0, 1.0);
                let zeta_max = cos_zeta.acos();
                // central angle at which a satellite at `altitude_km` sits at zeta_max
                let s = (r * zeta_max.sin() / (r + altitude_km)).asin();
                r * (zeta_max - s)
            }
        }
    }
}

/// Which kind of hop a segment is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Isl,
    Downlink,
}

/// Constraint that zeroed a segment or a whole path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blocked {
    /// Satellite outside the downlink service radius.
    Cutoff,
    /// Satellite at or below the OGS horizon.
    Horizon,
    /// ISL dips below the Karman line.
    Karman,
    /// Cross-plane ISL disabled by a latitude limit.
    CrossPlaneDisabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub diffraction: f64,
    pub atmosphere: f64,
    pub relay: f64,
    pub pointing: f64,
    /// 0 when a geometric constraint blocks the segment, else 1.
    pub visibility: f64,
}

impl LossBreakdown {
    fn product(&self) -> f64 {
        self.diffraction * self.atmosphere * self.relay * self.pointing * self.visibility
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSegment {
    pub kind: SegmentKind,
    pub length_km: f64,
    pub transmittance: f64,
    pub breakdown: LossBreakdown,
    pub blocked: Option<Blocked>,
}

impl LinkSegment {
    fn from_breakdown(kind: SegmentKind, length_km: f64, breakdown: LossBreakdown, blocked: Option<Blocked>) -> Self {
        Self {
            kind,
            length_km,
            transmittance: breakdown.product(),
            breakdown,
            blocked,
        }
    }

    /// Same segment with the relay factor removed.
    pub fn without_relay(self) -> Self {
        let breakdown = LossBreakdown {
            relay: 1.0,
            ..self.breakdown
        };
        Self::from_breakdown(self.kind, self.length_km, breakdown, self.blocked)
    }

    /// Same segment forced to zero by `reason`.
    pub fn block(self, reason: Blocked) -> Self {
        let breakdown = LossBreakdown {
            visibility: 0.0,
            ..self.breakdown
        };
        Self::from_breakdown(self.kind, self.length_km, breakdown, Some(reason))
    }

    pub fn loss_db(&self) -> f64 {
        to_db(self.transmittance)
    }
}

/// Loss in dB for a transmittance; `inf` for zero.
pub fn to_db(transmittance: f64) -> f64 {
    -10.0 * transmittance.log10()
}

pub fn from_db(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// d_R = π w0² / λ, in meters.
pub fn rayleigh_range(w0_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(w0_m > 0.0 && wavelength_m > 0.0) {
        return Err(Error::input(format!(
            "beam waist ({w0_m}) and wavelength ({wavelength_m}) must be > 0"
        )));
    }
    Ok(PI * w0_m * w0_m / wavelength_m)
}

/// Fraction of a Gaussian beam of waist `w0_m` collected by an aperture of
/// radius `ra_m` after `l_m` meters of vacuum.
pub fn eta_fs(l_m: f64, w0_m: f64, ra_m: f64, wavelength_m: f64) -> f64 {
    let d_r = PI * w0_m * w0_m / wavelength_m;
    let z = l_m / d_r;
    let spot2 = w0_m * w0_m * (1.0 + z * z);
    -(-2.0 * ra_m * ra_m / spot2).exp_m1()
}

/// Far-field limit of [`eta_fs`]; quadratic in 1/L.
pub fn eta_fs_farfield(l_m: f64, w0_m: f64, ra_m: f64, wavelength_m: f64) -> f64 {
    let x = std::f64::consts::SQRT_2 * PI * ra_m * w0_m / (l_m * wavelength_m);
    x * x
}

/// Zenith angle at the OGS for a satellite at altitude `h_km` and slant range
/// `l_km`. Returns a value past π/2 for satellites below the horizon.
pub fn zenith_angle(h_km: f64, l_km: f64, earth_radius_km: f64) -> Result<f64> {
    if !(l_km >= h_km) {
        return Err(Error::input(format!(
            "slant range {l_km} km shorter than altitude {h_km} km"
        )));
    }
    if l_km == 0.0 {
        return Ok(0.0);
    }
    let c = h_km / l_km - 0.5 * (l_km * l_km - h_km * h_km) / (l_km * earth_radius_km);
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Beer-Lambert transmittance η0^sec ζ; zero at and beyond the horizon.
pub fn eta_atm(h_km: f64, l_km: f64, eta_zenith: f64, earth_radius_km: f64) -> f64 {
    match zenith_angle(h_km, l_km.max(h_km), earth_radius_km) {
        Ok(zeta) => eta_atm_at(zeta, eta_zenith),
        Err(_) => 0.0,
    }
}

pub fn eta_atm_at(zeta_rad: f64, eta_zenith: f64) -> f64 {
    if zeta_rad.abs() < FRAC_PI_2 {
        eta_zenith.powf(1.0 / zeta_rad.cos())
    } else {
        0.0
    }
}

/// Waist maximizing [`eta_fs`] at distance `l_m`: sqrt(Lλ/π).
pub fn optimal_beam_waist(l_m: f64, wavelength_m: f64) -> f64 {
    (l_m * wavelength_m / PI).sqrt()
}

/// Slant range (km) from a surface point to a satellite at `h_km` whose
/// nadir is `central_angle_rad` away.
pub fn slant_range_km(h_km: f64, central_angle_rad: f64, earth: &EarthModel) -> f64 {
    let r = earth.radius_km;
    let rs = r + h_km;
    (r * r + rs * rs - 2.0 * r * rs * central_angle_rad.cos()).max(0.0).sqrt()
}

/// Inverse of [`slant_range_km`]: central angle for a given slant range.
pub fn central_angle_for_slant(h_km: f64, l_km: f64, earth: &EarthModel) -> f64 {
    let r = earth.radius_km;
    let rs = r + h_km;
    ((r * r + rs * rs - l_km * l_km) / (2.0 * r * rs)).clamp(-1.0, 1.0).acos()
}

pub fn isl_transmittance(l_m: f64, params: &LinkParams) -> LinkSegment {
    let w0 = match params.beam_waist_mode {
        BeamWaistMode::Fixed => params.beam_waist_m,
        BeamWaistMode::PerLinkOptimal if l_m > 0.0 => optimal_beam_waist(l_m, params.wavelength_m),
        BeamWaistMode::PerLinkOptimal => params.beam_waist_m,
    };
    let breakdown = LossBreakdown {
        diffraction: eta_fs(l_m, w0, params.sat_aperture_m, params.wavelength_m),
        atmosphere: 1.0,
        relay: params.relay_efficiency,
        pointing: params.pointing_efficiency,
        visibility: 1.0,
    };
    LinkSegment::from_breakdown(SegmentKind::Isl, l_m / 1000.0, breakdown, None)
}

/// Satellite-to-OGS segment for a satellite at altitude `h_km` and slant
/// range `l_km`.
pub fn downlink_transmittance(h_km: f64, l_km: f64, params: &LinkParams, earth: &EarthModel) -> LinkSegment {
    let l_km = l_km.max(h_km);
    let zeta = zenith_angle(h_km, l_km, earth.radius_km).unwrap_or(0.0);
    let breakdown = LossBreakdown {
        diffraction: eta_fs(l_km * 1000.0, params.beam_waist_m, params.ogs_aperture_m, params.wavelength_m),
        atmosphere: eta_atm_at(zeta, params.eta_zenith),
        relay: params.relay_efficiency,
        pointing: if params.pointing_on_downlinks {
            params.pointing_efficiency
        } else {
            1.0
        },
        visibility: 1.0,
    };
    let seg = LinkSegment::from_breakdown(SegmentKind::Downlink, l_km, breakdown, None);
    if zeta >= FRAC_PI_2 {
        return seg.block(Blocked::Horizon);
    }
    let ground = earth.ground_distance_km(central_angle_for_slant(h_km, l_km, earth));
    if ground > params.ground_cutoff_km(h_km, earth) + CUTOFF_SLACK_KM {
        return seg.block(Blocked::Cutoff);
    }
    seg
}

/// N_EPS times the product of every segment transmittance in both arms.
///
/// Factors are multiplied in sorted order so the result does not depend on
/// how the segments are split between or ordered within the arms.
pub fn pair_rate(arm1: &[LinkSegment], arm2: &[LinkSegment], params: &LinkParams) -> Result<f64> {
    for (name, arm) in [("first", arm1), ("second", arm2)] {
        match arm.last() {
            Some(seg) if seg.kind == SegmentKind::Downlink => {}
            _ => {
                return Err(Error::input(format!(
                    "{name} arm must end in a downlink segment"
                )))
            }
        }
    }
    let mut factors: Vec<f64> = arm1.iter().chain(arm2).map(|s| s.transmittance).collect();
    factors.sort_by(f64::total_cmp);
    Ok(params.source_rate_hz * factors.iter().product::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 810e-9;

    fn earth() -> EarthModel {
        EarthModel::default()
    }

    /// Zenith angle by plane geometry: satellite at central angle θ from the OGS.
    fn zenith_by_geometry(h: f64, theta: f64) -> (f64, f64) {
        let r = 6371.0;
        let (ox, oy) = (r, 0.0);
        let (sx, sy) = ((r + h) * theta.cos(), (r + h) * theta.sin());
        let (dx, dy) = (sx - ox, sy - oy);
        let l = (dx * dx + dy * dy).sqrt();
        // local vertical at the OGS is +x
        (l, dx / l)
    }

    #[test]
    fn rayleigh_values() {
        let d = rayleigh_range(0.10, LAMBDA).unwrap();
        assert!((d - 38_785.0).abs() < 1.0, "{d}");
        let d2 = rayleigh_range(0.20, LAMBDA).unwrap();
        assert!((d2 / d - 4.0).abs() < 1e-12);
        let d3 = rayleigh_range(0.6797, LAMBDA).unwrap();
        assert!((d3 - 1.792e6).abs() < 1e3, "{d3}");
        assert!(rayleigh_range(0.0, LAMBDA).is_err());
        assert!(rayleigh_range(0.1, -1.0).is_err());
    }

    #[test]
    fn eta_fs_values() {
        let v = eta_fs(0.0, 0.10, 0.75, LAMBDA);
        assert!((v - (1.0 - (-112.5f64).exp())).abs() < 1e-15);
        // direct evaluation: 1 - exp(-1.125 / (0.01 (1 + (5e5/38785.09)^2))) = 0.48976
        let v = eta_fs(500e3, 0.10, 0.75, LAMBDA);
        assert!((v - 0.48976).abs() < 5e-5, "{v}");
        let v = eta_fs(1000e3, 0.10, 0.25, LAMBDA);
        assert!((v - 0.0186).abs() < 2e-4, "{v}");
    }

    #[test]
    fn farfield_values() {
        let v = eta_fs_farfield(1000e3, 0.10, 0.25, LAMBDA);
        assert!((v - 0.0188).abs() < 2e-4, "{v}");
        let v2 = eta_fs_farfield(2000e3, 0.10, 0.25, LAMBDA);
        assert!((v / v2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zenith_values() {
        assert_eq!(zenith_angle(500.0, 500.0, 6371.0).unwrap(), 0.0);
        let theta = 1000.0 / 6371.0;
        let (l, cos_geom) = zenith_by_geometry(500.0, theta);
        assert!((l - 1151.9).abs() < 0.5, "{l}");
        let z = zenith_angle(500.0, l, 6371.0).unwrap();
        assert!((z.cos() - cos_geom).abs() < 1e-12);
        assert!((z.cos() - 0.3607).abs() < 0.002);
        // horizon: cos ζ = 0 ⇒ L² = h² + 2 h R_E
        let lh = (500.0f64 * 500.0 + 2.0 * 500.0 * 6371.0).sqrt();
        assert!((lh - 2574.0).abs() < 1.0);
        assert!((zenith_angle(500.0, lh, 6371.0).unwrap() - FRAC_PI_2).abs() < 1e-9);
        assert!(zenith_angle(500.0, 400.0, 6371.0).is_err());
    }

    #[test]
    fn eta_atm_values() {
        assert_eq!(eta_atm(500.0, 500.0, 0.47, 6371.0), 0.47);
        let (l, cos_geom) = zenith_by_geometry(500.0, 1000.0 / 6371.0);
        let expect = 0.47f64.powf(1.0 / cos_geom);
        let v = eta_atm(500.0, l, 0.47, 6371.0);
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.123).abs() < 0.005, "{v}");
        assert_eq!(eta_atm_at(FRAC_PI_2, 0.47), 0.0);
        assert_eq!(eta_atm(500.0, 3000.0, 0.47, 6371.0), 0.0);
    }

    fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn optimal_waist_matches_golden_section() {
        let l = 1.792e6;
        let w = optimal_beam_waist(l, LAMBDA);
        let oracle = golden_section_max(|w0| eta_fs(l, w0, 0.25, LAMBDA), 0.01, 5.0);
        assert!((w - 0.680).abs() < 1e-3, "{w}");
        assert!((w - oracle).abs() < 1e-4, "{w} vs {oracle}");
        assert!((optimal_beam_waist(4.0 * l, LAMBDA) / w - 2.0).abs() < 1e-12);
        let best = eta_fs(l, w, 0.25, LAMBDA);
        for i in 0..200 {
            let w0 = 1e-3 * 10f64.powf(i as f64 * 4.0 / 199.0);
            assert!(eta_fs(l, w0, 0.25, LAMBDA) <= best + 1e-15);
        }
    }

    #[test]
    fn isl_values() {
        let lossless = LinkParams {
            relay_efficiency: 1.0,
            pointing_efficiency: 1.0,
            ..LinkParams::default()
        };
        let s = isl_transmittance(700e3, &lossless);
        assert_eq!(s.transmittance, eta_fs(700e3, 0.10, 0.25, LAMBDA));
        let p = LinkParams::default();
        let s = isl_transmittance(1000e3, &p);
        let expect = eta_fs(1000e3, 0.10, 0.25, LAMBDA) * 0.99 * 0.80;
        assert!((s.transmittance - expect).abs() < 1e-15);
        assert!((s.transmittance - 0.01473).abs() < 2e-4);
        let mut last = f64::INFINITY;
        for km in (1..100).map(|i| i as f64 * 100.0) {
            let t = isl_transmittance(km * 1000.0, &p).transmittance;
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn downlink_values() {
        let e = earth();
        let p = LinkParams {
            relay_efficiency: 1.0,
            ..LinkParams::default()
        };
        let s = downlink_transmittance(500.0, 500.0, &p, &e);
        assert!((s.transmittance - 0.227).abs() < 0.005, "{}", s.transmittance);
        assert!(s.blocked.is_none());

        let fixed = LinkParams {
            cutoff_rule: CutoffRule::GroundDistance,
            ..p
        };
        for params in [p, fixed] {
            let l_in = slant_range_km(500.0, 999.0 / 6371.0, &e);
            let l_out = slant_range_km(500.0, 1001.0 / 6371.0, &e);
            assert!(downlink_transmittance(500.0, l_in, &params, &e).transmittance > 0.0);
            let out = downlink_transmittance(500.0, l_out, &params, &e);
            assert_eq!(out.transmittance, 0.0);
            assert_eq!(out.blocked, Some(Blocked::Cutoff));
        }
        let huge = LinkParams {
            cutoff_rule: CutoffRule::GroundDistance,
            max_downlink_ground_km: 10_000.0,
            ..p
        };
        let beyond = downlink_transmittance(500.0, 2700.0, &huge, &e);
        assert_eq!(beyond.transmittance, 0.0);
        assert_eq!(beyond.blocked, Some(Blocked::Horizon));
    }

    #[test]
    fn zenith_equivalent_cutoff_reproduces_reference_and_grows_with_altitude() {
        let e = earth();
        let p = LinkParams::default();
        assert!((p.ground_cutoff_km(500.0, &e) - 1000.0).abs() < 1e-6);
        let g2000 = p.ground_cutoff_km(2000.0, &e);
        // the zenith angle at the cutoff must match the reference one
        let l_ref = slant_range_km(500.0, 1000.0 / 6371.0, &e);
        let z_ref = zenith_angle(500.0, l_ref, 6371.0).unwrap();
        let l = slant_range_km(2000.0, g2000 / 6371.0, &e);
        let z = zenith_angle(2000.0, l, 6371.0).unwrap();
        assert!((z - z_ref).abs() < 1e-9);
        assert!(g2000 > p.ground_cutoff_km(1000.0, &e));
        assert!(p.ground_cutoff_km(1000.0, &e) > 1000.0);
    }

    #[test]
    fn pair_rate_cases() {
        let e = earth();
        let p = LinkParams {
            relay_efficiency: 1.0,
            ..LinkParams::default()
        };
        let d = downlink_transmittance(500.0, 500.0, &p, &e);
        let r = pair_rate(&[d], &[d], &p).unwrap();
        assert!((r - 51.5e6).abs() < 2e6, "{r}");

        let isl = isl_transmittance(900e3, &p);
        let far = downlink_transmittance(500.0, 900.0, &p, &e);
        let a = pair_rate(&[isl, d], &[far], &p).unwrap();
        let b = pair_rate(&[far], &[isl, d], &p).unwrap();
        assert_eq!(a, b);

        let dead = d.block(Blocked::Cutoff);
        assert_eq!(pair_rate(&[isl, dead], &[d], &p).unwrap(), 0.0);
        assert!(pair_rate(&[d, isl], &[d], &p).is_err());
        assert!(pair_rate(&[], &[d], &p).is_err());

        let doubled = LinkParams {
            source_rate_hz: 2.0 * p.source_rate_hz,
            ..p
        };
        assert_eq!(pair_rate(&[isl, d], &[far], &doubled).unwrap(), 2.0 * a);
    }

    #[test]
    fn db_round_trip() {
        for t in [1.0, 0.5, 0.123, 1e-9] {
            assert!((from_db(to_db(t)) - t).abs() <= 1e-12 * t.max(1e-300) + 1e-300);
        }
        assert!(to_db(0.0).is_infinite());
    }

    #[test]
    fn without_relay_keeps_product_invariant() {
        let s = isl_transmittance(800e3, &LinkParams::default()).without_relay();
        let b = s.breakdown;
        assert_eq!(s.transmittance, b.diffraction * b.atmosphere * b.relay * b.pointing * b.visibility);
        assert_eq!(b.relay, 1.0);
    }
}
