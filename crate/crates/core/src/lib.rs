//! Entanglement-distribution rate simulator for low-Earth-orbit satellite
//! networks with inter-satellite laser links.
//!
//! The crate is organized bottom-up:
//!
//! * [`earthgeo`]: spherical Earth, frames, line-of-sight altitude, city table
//! * [`orbitprop`]: circular orbits and polar Walker constellations
//! * [`linkbudget`]: diffraction, atmosphere, relay and pointing losses, pair rate
//! * [`relaychain`]: single relay chains between two ground stations
//! * [`constellnet`]: grid routing and time-swept rates over a constellation
//! * [`scenarios`]: orbit optimization, scenario files and output writers

pub mod constellnet;
pub mod earthgeo;
pub mod error;
pub mod linkbudget;
pub mod orbitprop;
pub mod relaychain;
pub mod scenarios;

pub use error::{Error, Result};
