//! Single relay chains between two ground stations.
//!
//! Both OGSs sit on the equator of a local frame, `D` km apart. A chain of `k`
//! satellites (k odd) at altitude `h` spans the arc between them with the two
//! end satellites at the OGS zeniths and the source in the middle. With `k = 1`
//! a lone satellite hovers over the midpoint and downlinks to both stations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::earthgeo::{los_min_altitude, EarthModel, Ecef, Vec3Km};
use crate::error::{Error, Result};
use crate::linkbudget::{
    downlink_transmittance, isl_transmittance, pair_rate, slant_range_km, to_db, Blocked, LinkParams, LinkSegment,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    pub ground_distance_km: f64,
    pub altitude_km: f64,
    pub satellite_count: usize,
    /// Central angle between neighboring satellites; 0 for a single satellite.
    pub angular_spacing_rad: f64,
    pub hop_chord_km: f64,
    pub eps_index: usize,
    pub satellites: Vec<Vec3Km<Ecef>>,
    pub ogs: [Vec3Km<Ecef>; 2],
}

fn point_at(angle: f64, radius: f64) -> Vec3Km<Ecef> {
    let (s, c) = angle.sin_cos();
    Vec3Km::new(radius * c, radius * s, 0.0)
}

fn check_inputs(d_km: f64, h_km: f64, earth: &EarthModel) -> Result<()> {
    let half = std::f64::consts::PI * earth.radius_km;
    if !(0.0..=half).contains(&d_km) {
        return Err(Error::input(format!(
            "ground distance {d_km} km outside [0, {half:.1}] km"
        )));
    }
    if !(h_km > earth.karman_altitude_km && h_km.is_finite()) {
        return Err(Error::input(format!(
            "altitude {h_km} km must be above the Karman line ({} km)",
            earth.karman_altitude_km
        )));
    }
    Ok(())
}

/// Half of the largest hop angle that keeps a chord above the Karman line.
fn max_half_hop_angle(h_km: f64, earth: &EarthModel) -> f64 {
    ((earth.radius_km + earth.karman_altitude_km) / (earth.radius_km + h_km)).acos()
}

/// Whether a single satellite over the midpoint can serve both OGSs.
pub fn single_satellite_feasible(d_km: f64, h_km: f64, params: &LinkParams, earth: &EarthModel) -> bool {
    0.5 * d_km <= params.ground_cutoff_km(h_km, earth)
}

/// Smallest odd satellite count whose chain keeps every hop above the Karman line.
pub fn min_relay_count(d_km: f64, h_km: f64, params: &LinkParams, earth: &EarthModel) -> Result<usize> {
    check_inputs(d_km, h_km, earth)?;
    if single_satellite_feasible(d_km, h_km, params, earth) {
        return Ok(1);
    }
    let alpha = d_km / earth.radius_km;
    let beta = max_half_hop_angle(h_km, earth);
    let mut hops = ((alpha / (2.0 * beta)).ceil() as usize).max(2);
    hops += hops % 2;
    // the closed form can be off by one step either way through rounding;
    // settle it with the same segment test the rate evaluation applies
    hops = hops.saturating_sub(2).max(2);
    while !build_chain_with_count(d_km, h_km, hops + 1, earth)?.clears_karman(earth) {
        hops += 2;
    }
    Ok(hops + 1)
}

/// Chain with an explicit satellite count (odd, ≥ 1). Does not check the
/// Karman constraint; see [`ChainGeometry::clears_karman`].
pub fn build_chain_with_count(d_km: f64, h_km: f64, count: usize, earth: &EarthModel) -> Result<ChainGeometry> {
    check_inputs(d_km, h_km, earth)?;
    if count == 0 || count % 2 == 0 {
        return Err(Error::input(format!("satellite count {count} must be odd")));
    }
    let alpha = d_km / earth.radius_km;
    let r = earth.radius_km + h_km;
    let (spacing, satellites) = if count == 1 {
        (0.0, vec![point_at(0.5 * alpha, r)])
    } else {
        let spacing = alpha / (count - 1) as f64;
        (spacing, (0..count).map(|i| point_at(i as f64 * spacing, r)).collect())
    };
    Ok(ChainGeometry {
        ground_distance_km: d_km,
        altitude_km: h_km,
        satellite_count: count,
        angular_spacing_rad: spacing,
        hop_chord_km: 2.0 * r * (0.5 * spacing).sin(),
        eps_index: (count - 1) / 2,
        satellites,
        ogs: [point_at(0.0, earth.radius_km), point_at(alpha, earth.radius_km)],
    })
}

pub fn build_chain(d_km: f64, h_km: f64, params: &LinkParams, earth: &EarthModel) -> Result<ChainGeometry> {
    let k = min_relay_count(d_km, h_km, params, earth)?;
    build_chain_with_count(d_km, h_km, k, earth)
}

impl ChainGeometry {
    /// Re-checks every hop with the segment line-of-sight test.
    pub fn clears_karman(&self, earth: &EarthModel) -> bool {
        self.satellites
            .windows(2)
            .all(|w| los_min_altitude(&w[0], &w[1], earth) >= earth.karman_altitude_km)
    }

    /// Chain traversed from the other end.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.satellites.reverse();
        out.ogs.reverse();
        out
    }

    /// The two arms as segment lists, each starting at the source.
    pub fn arms(&self, params: &LinkParams, earth: &EarthModel) -> [Vec<LinkSegment>; 2] {
        let eps = self.eps_index;
        let toward_first: Vec<usize> = (0..=eps).rev().collect();
        let toward_last: Vec<usize> = (eps..self.satellites.len()).collect();
        [(toward_first, 0), (toward_last, 1)].map(|(nodes, ogs)| self.arm(&nodes, ogs, params, earth))
    }

    fn arm(&self, nodes: &[usize], ogs: usize, params: &LinkParams, earth: &EarthModel) -> Vec<LinkSegment> {
        let mut segs = Vec::with_capacity(nodes.len());
        for w in nodes.windows(2) {
            let (a, b) = (&self.satellites[w[0]], &self.satellites[w[1]]);
            let seg = isl_transmittance(a.distance(b) * 1000.0, params);
            let seg = if los_min_altitude(a, b, earth) < earth.karman_altitude_km {
                seg.block(Blocked::Karman)
            } else {
                seg
            };
            segs.push(seg);
        }
        let last = &self.satellites[*nodes.last().expect("arm has at least the source")];
        let l_km = last.distance(&self.ogs[ogs]);
        segs.push(downlink_transmittance(self.altitude_km, l_km, params, earth));
        if !params.relay_on_source {
            segs[0] = segs[0].without_relay();
        }
        segs
    }
}

/// End-to-end pair rate of a chain, in Hz.
pub fn chain_rate(chain: &ChainGeometry, params: &LinkParams, earth: &EarthModel) -> f64 {
    let [a, b] = chain.arms(params, earth);
    pair_rate(&a, &b, params).expect("chain arms end in downlinks")
}

/// Rate of a lone satellite over the midpoint, regardless of relay feasibility.
pub fn single_satellite_rate(d_km: f64, h_km: f64, params: &LinkParams, earth: &EarthModel) -> f64 {
    let l = slant_range_km(h_km, 0.5 * d_km / earth.radius_km, earth);
    let mut dl = downlink_transmittance(h_km, l, params, earth);
    if !params.relay_on_source {
        dl = dl.without_relay();
    }
    pair_rate(&[dl], &[dl], params).expect("single downlink arms")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub ground_distance_km: f64,
    pub satellite_count: usize,
    pub rate_hz: f64,
    pub baseline_rate_hz: f64,
}

/// Ground distance at which the minimum satellite count steps up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discontinuity {
    pub from_count: usize,
    pub to_count: usize,
    pub ground_distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCurve {
    pub altitude_km: f64,
    pub points: Vec<ChainPoint>,
    pub discontinuities: Vec<Discontinuity>,
}

impl ChainPoint {
    pub fn rate_db_loss(&self, params: &LinkParams) -> f64 {
        to_db(self.rate_hz / params.source_rate_hz)
    }
}

/// Distances in `[lo, hi]` where `min_relay_count` increments, from closed forms.
pub fn discontinuities(lo_km: f64, hi_km: f64, h_km: f64, params: &LinkParams, earth: &EarthModel) -> Vec<Discontinuity> {
    let mut out = Vec::new();
    let single_limit = 2.0 * params.ground_cutoff_km(h_km, earth);
    let beta = max_half_hop_angle(h_km, earth);
    let mut from = 1;
    let mut d = single_limit;
    let half = std::f64::consts::PI * earth.radius_km;
    loop {
        // count for distances just beyond `d`
        let next_hops = if from == 1 {
            let alpha = single_limit / earth.radius_km;
            let mut hops = ((alpha / (2.0 * beta)).ceil() as usize).max(2);
            hops += hops % 2;
            hops
        } else {
            from + 1
        };
        let to = next_hops + 1;
        if d > hi_km || d > half {
            break;
        }
        if d >= lo_km {
            out.push(Discontinuity {
                from_count: from,
                to_count: to,
                ground_distance_km: d,
            });
        }
        from = to;
        // largest distance still served by `to` satellites
        d = 2.0 * earth.radius_km * (to - 1) as f64 * beta;
    }
    out
}

/// Rate-versus-distance curves for each altitude, with the lone-satellite
/// baseline and the distances where relays are added.
pub fn sweep_chain(d_grid_km: &[f64], altitudes_km: &[f64], params: &LinkParams, earth: &EarthModel) -> Result<Vec<ChainCurve>> {
    if d_grid_km.is_empty() || altitudes_km.is_empty() {
        return Err(Error::input("chain sweep needs nonempty distance and altitude grids"));
    }
    let lo = d_grid_km.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d_grid_km.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    altitudes_km
        .iter()
        .map(|&h| {
            let points = d_grid_km
                .par_iter()
                .map(|&d| {
                    let chain = build_chain(d, h, params, earth)?;
                    Ok(ChainPoint {
                        ground_distance_km: d,
                        satellite_count: chain.satellite_count,
                        rate_hz: chain_rate(&chain, params, earth),
                        baseline_rate_hz: single_satellite_rate(d, h, params, earth),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ChainCurve {
                altitude_km: h,
                points,
                discontinuities: discontinuities(lo, hi, h, params, earth),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::BeamWaistMode;

    fn earth() -> EarthModel {
        EarthModel::default()
    }

    #[test]
    fn relay_count_examples() {
        let (p, e) = (LinkParams::default(), earth());
        assert_eq!(min_relay_count(0.0, 500.0, &p, &e).unwrap(), 1);
        assert_eq!(min_relay_count(300.0, 500.0, &p, &e).unwrap(), 1);
        assert_eq!(min_relay_count(10_000.0, 500.0, &p, &e).unwrap(), 5);
        assert!(min_relay_count(20_100.0, 500.0, &p, &e).is_err());
        assert!(min_relay_count(1000.0, 90.0, &p, &e).is_err());
    }

    #[test]
    fn relay_count_non_increasing_in_altitude() {
        let (p, e) = (LinkParams::default(), earth());
        for d in [3000.0, 8000.0, 15_000.0, 20_000.0] {
            let mut last = usize::MAX;
            for h in (3..40).map(|i| i as f64 * 50.0) {
                let k = min_relay_count(d, h, &p, &e).unwrap();
                assert!(k <= last, "d={d} h={h}");
                last = k;
            }
        }
    }

    #[test]
    fn chain_geometry_examples() {
        let (p, e) = (LinkParams::default(), earth());
        let c = build_chain(0.0, 500.0, &p, &e).unwrap();
        assert_eq!(c.satellite_count, 1);
        let c = build_chain(10_000.0, 500.0, &p, &e).unwrap();
        assert_eq!(c.satellite_count, 5);
        assert_eq!(c.eps_index, 2);
        assert!((c.hop_chord_km - 2679.0).abs() < 1.0, "{}", c.hop_chord_km);
        let cart = c.satellites[0].distance(&c.satellites[1]);
        assert!((cart - c.hop_chord_km).abs() < 1e-6);
        assert!(c.clears_karman(&e));
        // end satellites at the OGS zeniths
        for (sat, ogs) in [(c.satellites[0], c.ogs[0]), (c.satellites[4], c.ogs[1])] {
            let l = sat.distance(&ogs);
            let z = crate::linkbudget::zenith_angle(500.0, l.max(500.0), e.radius_km).unwrap();
            assert!(z.abs() < 1e-6);
        }
        assert!(build_chain_with_count(100.0, 500.0, 4, &e).is_err());
    }

    #[test]
    fn single_satellite_chain_matches_zenith_pair() {
        let (p, e) = (LinkParams::default(), earth());
        let c = build_chain(0.0, 500.0, &p, &e).unwrap();
        let dl = downlink_transmittance(500.0, 500.0, &p, &e);
        let expect = pair_rate(&[dl], &[dl], &p).unwrap();
        assert_eq!(chain_rate(&c, &p, &e), expect);
    }

    #[test]
    fn three_satellites_at_zero_distance_add_isl_factors() {
        let (p, e) = (LinkParams::default(), earth());
        let one = chain_rate(&build_chain_with_count(0.0, 500.0, 1, &e).unwrap(), &p, &e);
        let three = chain_rate(&build_chain_with_count(0.0, 500.0, 3, &e).unwrap(), &p, &e);
        let isl = isl_transmittance(0.0, &p).transmittance;
        assert!((three - one * isl * isl).abs() <= 1e-12 * one);
        assert!(three < one);
    }

    #[test]
    fn chain_rate_reversal_symmetric() {
        let (p, e) = (LinkParams::default(), earth());
        for d in [1500.0, 4000.0, 9000.0, 17_000.0] {
            let c = build_chain(d, 700.0, &p, &e).unwrap();
            assert_eq!(chain_rate(&c, &p, &e), chain_rate(&c.reversed(), &p, &e));
        }
    }

    #[test]
    fn ten_thousand_km_rate() {
        let e = earth();
        let p = LinkParams {
            beam_waist_mode: BeamWaistMode::PerLinkOptimal,
            sat_aperture_m: 0.75,
            ..LinkParams::default()
        };
        let c = build_chain(10_000.0, 500.0, &p, &e).unwrap();
        // hand product: ISL 1 − exp(−π r_a²/(Lλ)) · 0.99 · 0.8 twice per arm,
        // zenith downlink η_fs(500 km) · 0.47 · 0.99
        let l = c.hop_chord_km * 1000.0;
        let isl = -(-std::f64::consts::PI * 0.75 * 0.75 / (l * 810e-9)).exp_m1() * 0.99 * 0.8;
        let dl = crate::linkbudget::eta_fs(500e3, 0.1, 0.75, 810e-9) * 0.47 * 0.99;
        let hand = 1e9 * (isl * isl * dl).powi(2);
        let r = chain_rate(&c, &p, &e);
        assert!((r - hand).abs() <= 1e-9 * hand, "{r} vs {hand}");

        let small = LinkParams {
            sat_aperture_m: 0.25,
            ..p
        };
        let r = chain_rate(&c, &small, &e);
        assert!((1e2..1e5).contains(&r), "{r}");
    }

    #[test]
    fn sweep_marks_increments() {
        let (p, e) = (LinkParams::default(), earth());
        let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 100.0).collect();
        let curves = sweep_chain(&grid, &[500.0, 1000.0, 2000.0], &p, &e).unwrap();
        let counts: Vec<usize> = curves.iter().map(|c| c.discontinuities.len()).collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
        for c in &curves {
            for w in c.points.windows(2) {
                if w[0].satellite_count != w[1].satellite_count {
                    let d = c
                        .discontinuities
                        .iter()
                        .find(|x| x.from_count == w[0].satellite_count)
                        .expect("increment is marked");
                    assert!(d.ground_distance_km >= w[0].ground_distance_km);
                    assert!(d.ground_distance_km < w[1].ground_distance_km);
                    assert_eq!(d.to_count, w[1].satellite_count);
                }
            }
            let last = c.points.last().unwrap();
            assert_eq!(last.baseline_rate_hz, 0.0);
            assert!(last.rate_hz > 0.0);
        }
        assert!(sweep_chain(&[], &[500.0], &p, &e).is_err());
    }

    #[test]
    fn chosen_chain_is_live_at_every_marked_distance() {
        let e = EarthModel::default();
        let p = LinkParams::default();
        for h in [300.0, 500.0, 800.0, 1000.0, 2000.0] {
            for d in discontinuities(0.0, 20_000.0, h, &p, &e) {
                for x in [d.ground_distance_km - 1e-6, d.ground_distance_km, d.ground_distance_km + 1e-6] {
                    let chain = build_chain(x, h, &p, &e).unwrap();
                    assert!(chain_rate(&chain, &p, &e) > 0.0, "h={h} D={x}");
                }
            }
        }
    }
}
