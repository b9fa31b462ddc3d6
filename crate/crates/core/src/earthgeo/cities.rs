//! Built-in table of city coordinates, overridable per scenario.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GeodeticPoint;
use crate::error::{Error, Result};

const CITIES_CSV: &str = include_str!("../../data/cities.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityRecord {
    pub name: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
}

/// Case-insensitive name → ground point lookup.
#[derive(Debug, Clone)]
pub struct CityTable {
    entries: BTreeMap<String, (String, GeodeticPoint)>,
}

impl CityTable {
    /// The embedded table.
    pub fn builtin() -> Self {
        Self::from_csv(CITIES_CSV).expect("embedded city table is well formed")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut table = Self {
            entries: BTreeMap::new(),
        };
        for (row, rec) in reader.deserialize::<CityRecord>().enumerate() {
            let rec = rec.map_err(|e| Error::input(format!("cities.csv row {}: {e}", row + 1)))?;
            table.insert(rec)?;
        }
        Ok(table)
    }

    /// Add or replace an entry.
    pub fn insert(&mut self, rec: CityRecord) -> Result<()> {
        let point = GeodeticPoint::ground(rec.lat_deg, rec.lon_deg)?;
        self.entries
            .insert(rec.name.trim().to_lowercase(), (rec.name.trim().to_string(), point));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<GeodeticPoint> {
        self.entries.get(&name.trim().to_lowercase()).map(|(_, p)| *p)
    }

    /// Canonical display names in sorted order.
    pub fn names(&self) -> Vec<&str> {
        self.entries.values().map(|(n, _)| n.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
