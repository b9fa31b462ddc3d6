//! Routing over an N×M polar grid and time-swept end-to-end rates.
//!
//! Each OGS attaches to its nearest satellite. Two Manhattan paths join the
//! attachment satellites on the plane/slot torus: the black path moves along
//! the slot axis first, the white path along the plane axis first. The middle
//! node of a path emits the pairs and the better of the two paths is used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::earthgeo::{geodetic_to_ecef, los_min_altitude, EarthModel, Ecef, GeodeticPoint, Vec3Km};
use crate::error::{Error, Result};
use crate::linkbudget::{downlink_transmittance, isl_transmittance, pair_rate, Blocked, LinkParams, LinkSegment};
use crate::orbitprop::{Constellation, Propagator, SatId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathColor {
    Black,
    White,
}

impl PathColor {
    pub fn as_str(self) -> &'static str {
        match self {
            PathColor::Black => "black",
            PathColor::White => "white",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPath {
    pub nodes: Vec<SatId>,
    pub color: PathColor,
}

impl GridPath {
    /// Index of the emitting satellite within `nodes`.
    pub fn eps_index(&self) -> usize {
        self.nodes.len() / 2
    }

    pub fn eps_node(&self) -> SatId {
        self.nodes[self.eps_index()]
    }

    /// Consecutive nodes are torus neighbors and no node repeats.
    pub fn is_valid(&self, planes: usize, slots: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        !self.nodes.is_empty()
            && self.nodes.iter().all(|n| n.plane < planes && n.slot < slots && seen.insert(*n))
            && self.nodes.windows(2).all(|w| are_neighbors(w[0], w[1], planes, slots))
    }
}

/// Grid adjacency with wrap-around in both indices.
pub fn are_neighbors(a: SatId, b: SatId, planes: usize, slots: usize) -> bool {
    let ring_step = |x: usize, y: usize, n: usize| n > 1 && ((x + 1) % n == y || (y + 1) % n == x);
    (a.plane == b.plane && a.slot != b.slot && ring_step(a.slot, b.slot, slots))
        || (a.slot == b.slot && a.plane != b.plane && ring_step(a.plane, b.plane, planes))
}

/// Shortest signed step count from `from` to `to` on a ring of `n`; a tie at
/// n/2 goes the positive way.
fn ring_displacement(from: usize, to: usize, n: usize) -> isize {
    let d = (to + n - from) % n;
    if 2 * d > n {
        d as isize - n as isize
    } else {
        d as isize
    }
}

fn ring_add(x: usize, step: isize, n: usize) -> usize {
    (x as isize + step).rem_euclid(n as isize) as usize
}

fn walk(start: SatId, plane_steps: isize, slot_steps: isize, planes: usize, slots: usize, planes_first: bool) -> Vec<SatId> {
    let mut nodes = vec![start];
    let mut cur = start;
    let along_planes = |cur: &mut SatId, nodes: &mut Vec<SatId>| {
        for _ in 0..plane_steps.unsigned_abs() {
            cur.plane = ring_add(cur.plane, plane_steps.signum(), planes);
            nodes.push(*cur);
        }
    };
    let along_slots = |cur: &mut SatId, nodes: &mut Vec<SatId>| {
        for _ in 0..slot_steps.unsigned_abs() {
            cur.slot = ring_add(cur.slot, slot_steps.signum(), slots);
            nodes.push(*cur);
        }
    };
    if planes_first {
        along_planes(&mut cur, &mut nodes);
        along_slots(&mut cur, &mut nodes);
    } else {
        along_slots(&mut cur, &mut nodes);
        along_planes(&mut cur, &mut nodes);
    }
    nodes
}

/// The black (slot axis first) and white (plane axis first) paths from `s1`
/// to `s2`. Wrap ties resolve toward increasing index as seen from the
/// lexicographically smaller endpoint, so exchanging the endpoints yields the
/// same two node sets.
pub fn candidate_paths(s1: SatId, s2: SatId, planes: usize, slots: usize) -> [GridPath; 2] {
    if s1 == s2 {
        return [PathColor::Black, PathColor::White].map(|color| GridPath {
            nodes: vec![s1],
            color,
        });
    }
    if s2 < s1 {
        let [black, white] = candidate_paths(s2, s1, planes, slots);
        let flip = |p: GridPath, color| GridPath {
            nodes: p.nodes.into_iter().rev().collect(),
            color,
        };
        return [flip(white, PathColor::Black), flip(black, PathColor::White)];
    }
    let dp = ring_displacement(s1.plane, s2.plane, planes);
    let ds = ring_displacement(s1.slot, s2.slot, slots);
    [
        GridPath {
            nodes: walk(s1, dp, ds, planes, slots, false),
            color: PathColor::Black,
        },
        GridPath {
            nodes: walk(s1, dp, ds, planes, slots, true),
            color: PathColor::White,
        },
    ]
}

/// Routing switches beyond the link model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingOptions {
    /// Disable cross-plane ISLs when either end is poleward of this latitude.
    pub cross_plane_max_lat_deg: Option<f64>,
}

/// Satellite positions at one instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time_s: f64,
    pub positions: Vec<Vec3Km<Ecef>>,
}

/// Outcome of evaluating one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub rate_hz: f64,
    pub blocked: Option<Blocked>,
}

/// Summary of the path picked at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChosenPath {
    pub color: PathColor,
    pub eps: SatId,
    pub s1: SatId,
    pub s2: SatId,
    pub node_count: usize,
}

/// Sampled best rate over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTimeSeries {
    pub times_s: Vec<f64>,
    pub rates_hz: Vec<f64>,
    /// `None` where the rate is zero.
    pub chosen: Vec<Option<ChosenPath>>,
    /// Constraint responsible for each zero sample.
    pub blocked: Vec<Option<Blocked>>,
    pub max_rate_hz: f64,
    pub mean_all_hz: f64,
    pub mean_visible_hz: f64,
}

/// Max, all-sample mean and nonzero-sample mean of a rate sequence.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateStats {
    pub max_rate_hz: f64,
    pub mean_all_hz: f64,
    pub mean_visible_hz: f64,
    pub samples: usize,
    pub visible_samples: usize,
}

impl RateStats {
    pub fn from_rates(rates: &[f64]) -> Self {
        let mut acc = StatsAcc::default();
        rates.iter().for_each(|&r| acc.push(r));
        acc.finish()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct StatsAcc {
    max: f64,
    sum: f64,
    n: usize,
    visible: usize,
}

impl StatsAcc {
    fn push(&mut self, r: f64) {
        self.max = self.max.max(r);
        self.sum += r;
        self.n += 1;
        if r > 0.0 {
            self.visible += 1;
        }
    }

    fn finish(self) -> RateStats {
        RateStats {
            max_rate_hz: self.max,
            mean_all_hz: if self.n > 0 { self.sum / self.n as f64 } else { 0.0 },
            mean_visible_hz: if self.visible > 0 {
                self.sum / self.visible as f64
            } else {
                0.0
            },
            samples: self.n,
            visible_samples: self.visible,
        }
    }
}

/// Sample times `0, step, 2·step, …` strictly inside `[0, window)`.
pub fn time_grid(window_s: f64, step_s: f64) -> Result<Vec<f64>> {
    if !(step_s > 0.0 && step_s.is_finite()) {
        return Err(Error::input(format!("time step {step_s} s must be > 0")));
    }
    if !(window_s >= step_s && window_s.is_finite()) {
        return Err(Error::input(format!(
            "window {window_s} s must be at least one step ({step_s} s)"
        )));
    }
    let n = (window_s / step_s * (1.0 + 1e-12)).floor() as usize;
    let n = if (n as f64) * step_s >= window_s { n.max(1) } else { n + 1 };
    Ok((0..n).map(|i| i as f64 * step_s).collect())
}

/// A constellation together with the link model and two ground stations.
#[derive(Debug, Clone)]
pub struct Network<'a> {
    constellation: &'a Constellation,
    params: &'a LinkParams,
    earth: &'a EarthModel,
    routing: RoutingOptions,
    props: Vec<Propagator>,
    /// cosine of the largest serviceable nadir central angle
    cos_cutoff: f64,
    /// cosine of the central angle at which a satellite sets
    cos_horizon: f64,
}

impl<'a> Network<'a> {
    pub fn new(constellation: &'a Constellation, params: &'a LinkParams, earth: &'a EarthModel) -> Self {
        let h = constellation.altitude_km();
        let cutoff_angle = params.ground_cutoff_km(h, earth) / earth.radius_km;
        Self {
            constellation,
            params,
            earth,
            routing: RoutingOptions::default(),
            props: constellation.propagators(earth),
            cos_cutoff: cutoff_angle.min(std::f64::consts::PI).cos(),
            cos_horizon: earth.radius_km / (earth.radius_km + h),
        }
    }

    pub fn with_routing(mut self, routing: RoutingOptions) -> Self {
        self.routing = routing;
        self
    }

    pub fn constellation(&self) -> &Constellation {
        self.constellation
    }

    pub fn snapshot(&self, t_s: f64) -> Snapshot {
        let mut positions = Vec::with_capacity(self.props.len());
        self.fill_positions(t_s, &mut positions);
        Snapshot { time_s: t_s, positions }
    }

    fn fill_positions(&self, t_s: f64, out: &mut Vec<Vec3Km<Ecef>>) {
        let (s, c) = (self.earth.rotation_rate_rad_s * t_s).sin_cos();
        out.clear();
        out.extend(self.props.iter().map(|p| p.position_ecef_rot(t_s, s, c)));
    }

    /// Satellite closest in slant range; ties go to the lowest (plane, slot).
    pub fn nearest_in(&self, snap: &Snapshot, ogs: &Vec3Km<Ecef>) -> SatId {
        let mut best = (f64::INFINITY, 0usize);
        for (i, p) in snap.positions.iter().enumerate() {
            let d = p.distance(ogs);
            if d < best.0 {
                best = (d, i);
            }
        }
        let slots = self.constellation.slots_per_plane();
        SatId::new(best.1 / slots, best.1 % slots)
    }

    fn pos(&self, snap: &Snapshot, id: SatId) -> Vec3Km<Ecef> {
        snap.positions[self.constellation.flat(id)]
    }

    /// Reason a satellite cannot serve an OGS, found from the nadir angle alone.
    fn downlink_gate(&self, sat: &Vec3Km<Ecef>, ogs: &Vec3Km<Ecef>) -> Option<Blocked> {
        let c = sat.dot(ogs) / (sat.norm() * ogs.norm());
        if c <= self.cos_horizon {
            Some(Blocked::Horizon)
        } else if c < self.cos_cutoff {
            Some(Blocked::Cutoff)
        } else {
            None
        }
    }

    fn downlink(&self, sat: &Vec3Km<Ecef>, ogs: &Vec3Km<Ecef>) -> LinkSegment {
        let h = sat.norm() - self.earth.radius_km;
        downlink_transmittance(h, sat.distance(ogs), self.params, self.earth)
    }

    fn isl(&self, a: SatId, b: SatId, pa: &Vec3Km<Ecef>, pb: &Vec3Km<Ecef>) -> LinkSegment {
        let seg = isl_transmittance(pa.distance(pb) * 1000.0, self.params);
        if los_min_altitude(pa, pb, self.earth) < self.earth.karman_altitude_km {
            return seg.block(Blocked::Karman);
        }
        if let Some(limit) = self.routing.cross_plane_max_lat_deg {
            let lat = |p: &Vec3Km<Ecef>| (p.z / p.norm()).asin().to_degrees().abs();
            if a.plane != b.plane && (lat(pa) > limit || lat(pb) > limit) {
                return seg.block(Blocked::CrossPlaneDisabled);
            }
        }
        seg
    }

    fn arm(&self, snap: &Snapshot, nodes: &[SatId], ogs: &Vec3Km<Ecef>) -> Vec<LinkSegment> {
        let mut segs: Vec<LinkSegment> = nodes
            .windows(2)
            .map(|w| self.isl(w[0], w[1], &self.pos(snap, w[0]), &self.pos(snap, w[1])))
            .collect();
        let last = nodes.last().expect("path has nodes");
        segs.push(self.downlink(&self.pos(snap, *last), ogs));
        if !self.params.relay_on_source {
            segs[0] = segs[0].without_relay();
        }
        segs
    }

    /// The two arms of `path`, each running from the emitting node to an OGS.
    pub fn path_arms(&self, path: &GridPath, snap: &Snapshot, ogs: [&Vec3Km<Ecef>; 2]) -> [Vec<LinkSegment>; 2] {
        let e = path.eps_index();
        let toward_first: Vec<SatId> = path.nodes[..=e].iter().rev().copied().collect();
        [
            self.arm(snap, &toward_first, ogs[0]),
            self.arm(snap, &path.nodes[e..], ogs[1]),
        ]
    }

    pub fn path_outcome(&self, path: &GridPath, snap: &Snapshot, ogs: [&Vec3Km<Ecef>; 2]) -> PathOutcome {
        let [a, b] = self.path_arms(path, snap, ogs);
        let rate_hz = pair_rate(&a, &b, self.params).expect("arms end in downlinks");
        let blocked = a.iter().chain(&b).find_map(|s| s.blocked);
        PathOutcome { rate_hz, blocked }
    }

    /// Best of the two candidate paths between the OGSs' nearest satellites.
    pub fn best_in(&self, snap: &Snapshot, ogs: [&Vec3Km<Ecef>; 2]) -> (PathOutcome, GridPath) {
        let s1 = self.nearest_in(snap, ogs[0]);
        let s2 = self.nearest_in(snap, ogs[1]);
        let [black, white] = candidate_paths(
            s1,
            s2,
            self.constellation.planes(),
            self.constellation.slots_per_plane(),
        );
        let ob = self.path_outcome(&black, snap, ogs);
        let ow = self.path_outcome(&white, snap, ogs);
        if ow.rate_hz > ob.rate_hz {
            (ow, white)
        } else {
            (ob, black)
        }
    }

    /// One sample, short-circuiting when either attachment satellite is out of reach.
    fn sample(&self, t_s: f64, ogs: [&Vec3Km<Ecef>; 2], buf: &mut Vec<Vec3Km<Ecef>>) -> (PathOutcome, Option<ChosenPath>) {
        self.fill_positions(t_s, buf);
        let snap = Snapshot {
            time_s: t_s,
            positions: std::mem::take(buf),
        };
        let s1 = self.nearest_in(&snap, ogs[0]);
        let s2 = self.nearest_in(&snap, ogs[1]);
        let gate = self
            .downlink_gate(&self.pos(&snap, s1), ogs[0])
            .or_else(|| self.downlink_gate(&self.pos(&snap, s2), ogs[1]));
        let out = match gate {
            Some(reason) => (
                PathOutcome {
                    rate_hz: 0.0,
                    blocked: Some(reason),
                },
                None,
            ),
            None => {
                let (o, path) = self.best_in(&snap, ogs);
                let chosen = (o.rate_hz > 0.0).then(|| ChosenPath {
                    color: path.color,
                    eps: path.eps_node(),
                    s1,
                    s2,
                    node_count: path.nodes.len(),
                });
                (o, chosen)
            }
        };
        *buf = snap.positions;
        out
    }

    /// Full per-sample series over `[0, window_s)`.
    pub fn time_sweep(&self, ogs1: &GeodeticPoint, ogs2: &GeodeticPoint, window_s: f64, step_s: f64) -> Result<RateTimeSeries> {
        let times = time_grid(window_s, step_s)?;
        let g1 = geodetic_to_ecef(ogs1, self.earth)?;
        let g2 = geodetic_to_ecef(ogs2, self.earth)?;
        let samples: Vec<(PathOutcome, Option<ChosenPath>)> = times
            .par_iter()
            .map_init(Vec::new, |buf, &t| self.sample(t, [&g1, &g2], buf))
            .collect();
        let rates_hz: Vec<f64> = samples.iter().map(|(o, _)| o.rate_hz).collect();
        let stats = RateStats::from_rates(&rates_hz);
        Ok(RateTimeSeries {
            blocked: samples
                .iter()
                .map(|(o, _)| if o.rate_hz > 0.0 { None } else { o.blocked })
                .collect(),
            chosen: samples.into_iter().map(|(_, c)| c).collect(),
            times_s: times,
            rates_hz,
            max_rate_hz: stats.max_rate_hz,
            mean_all_hz: stats.mean_all_hz,
            mean_visible_hz: stats.mean_visible_hz,
        })
    }

    /// Summary statistics only; sequential and allocation-light, for use
    /// inside an outer parallel search.
    pub fn sweep_stats(&self, g1: &Vec3Km<Ecef>, g2: &Vec3Km<Ecef>, times: &[f64]) -> RateStats {
        let mut buf = Vec::with_capacity(self.props.len());
        let mut acc = StatsAcc::default();
        for &t in times {
            acc.push(self.sample(t, [g1, g2], &mut buf).0.rate_hz);
        }
        acc.finish()
    }
}

pub fn nearest_satellite(ogs: &GeodeticPoint, constellation: &Constellation, t_s: f64, earth: &EarthModel) -> Result<SatId> {
    let params = LinkParams::default();
    let net = Network::new(constellation, &params, earth);
    let g = geodetic_to_ecef(ogs, earth)?;
    Ok(net.nearest_in(&net.snapshot(t_s), &g))
}

#[allow(clippy::too_many_arguments)]
pub fn path_rate(
    path: &GridPath,
    constellation: &Constellation,
    ogs1: &GeodeticPoint,
    ogs2: &GeodeticPoint,
    t_s: f64,
    params: &LinkParams,
    earth: &EarthModel,
) -> Result<f64> {
    if !path.is_valid(constellation.planes(), constellation.slots_per_plane()) {
        return Err(Error::input("path is not a valid grid walk for this constellation"));
    }
    let net = Network::new(constellation, params, earth);
    let (g1, g2) = (geodetic_to_ecef(ogs1, earth)?, geodetic_to_ecef(ogs2, earth)?);
    Ok(net.path_outcome(path, &net.snapshot(t_s), [&g1, &g2]).rate_hz)
}

pub fn best_rate(
    ogs1: &GeodeticPoint,
    ogs2: &GeodeticPoint,
    constellation: &Constellation,
    t_s: f64,
    params: &LinkParams,
    earth: &EarthModel,
) -> Result<(f64, GridPath)> {
    let net = Network::new(constellation, params, earth);
    let (g1, g2) = (geodetic_to_ecef(ogs1, earth)?, geodetic_to_ecef(ogs2, earth)?);
    let (o, path) = net.best_in(&net.snapshot(t_s), [&g1, &g2]);
    Ok((o.rate_hz, path))
}

pub fn time_sweep(
    ogs1: &GeodeticPoint,
    ogs2: &GeodeticPoint,
    constellation: &Constellation,
    window_s: f64,
    step_s: f64,
    params: &LinkParams,
    earth: &EarthModel,
) -> Result<RateTimeSeries> {
    Network::new(constellation, params, earth).time_sweep(ogs1, ogs2, window_s, step_s)
}
