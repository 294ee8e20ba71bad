//! A shared cache of upper-half-plane zeros, extended in height on demand.
//!
//! Lookups take a read lock; extensions are computed outside any lock and
//! merged under a short write lock, so independent families and orders
//! proceed in parallel.

use std::collections::BTreeMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdpoly::Family;
use crate::realroots::zero_strip;
use crate::zerofinder::{scan_zeros, sort_zeros, ComplexZero};

/// Padding added on both sides of the rigorous zero strip.
pub const ENVELOPE_PAD: f64 = 0.05;
const BAND: f64 = 10.0;

/// Zeros of one polynomial with `0 < Im z ≤ height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub family: Family,
    pub n: u64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub zeros: Vec<ComplexZero>,
}

/// The vertical strip searched for zeros of `family` at order `n`.
pub fn search_envelope(family: Family, n: u64) -> Result<(f64, f64)> {
    let (l, r) = zero_strip(&family.build(n)?)?;
    Ok((l - ENVELOPE_PAD, r + ENVELOPE_PAD))
}

#[derive(Debug)]
pub struct ZeroCatalog {
    tol: f64,
    entries: RwLock<BTreeMap<(Family, u64), CatalogRecord>>,
}

impl ZeroCatalog {
    pub fn new(tol: f64) -> Self {
        ZeroCatalog {
            tol,
            entries: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Height already covered for `(family, n)`.
    pub fn height(&self, family: Family, n: u64) -> f64 {
        self.entries
            .read()
            .expect("catalog lock")
            .get(&(family, n))
            .map_or(0.0, |r| r.height)
    }

    /// Zeros with `0 < Im z ≤ height`, extending the scan when needed.
    pub fn zeros(&self, family: Family, n: u64, height: f64) -> Result<Vec<ComplexZero>> {
        if !(height > 0.0) {
            return Err(Error::precondition("height must be positive"));
        }
        let known = self.entries.read().expect("catalog lock").get(&(family, n)).cloned();
        let record = match known {
            Some(r) if r.height >= height => r,
            prior => {
                let extended = self.extend(family, n, prior, height)?;
                let mut map = self.entries.write().expect("catalog lock");
                let slot = map.entry((family, n)).or_insert_with(|| extended.clone());
                if slot.height < extended.height {
                    *slot = extended;
                }
                slot.clone()
            }
        };
        Ok(record
            .zeros
            .into_iter()
            .filter(|z| z.im <= height)
            .collect())
    }

    fn extend(
        &self,
        family: Family,
        n: u64,
        prior: Option<CatalogRecord>,
        height: f64,
    ) -> Result<CatalogRecord> {
        let poly = family.build(n)?;
        let x_range = search_envelope(family, n)?;
        let (from, mut zeros) = match prior {
            Some(r) => (r.height, r.zeros),
            None => (0.0, Vec::new()),
        };
        let mut last = None;
        for attempt in 0..8u32 {
            let top = height + 1e-4 * (attempt as f64 * 0.618_033_988_7).fract();
            match scan_zeros(&poly, x_range, (from, top), BAND, self.tol) {
                Ok(found) => {
                    zeros.extend(found.into_iter().filter(|z| z.im > 0.0));
                    sort_zeros(&mut zeros);
                    return Ok(CatalogRecord {
                        family,
                        n,
                        height: top,
                        x_range,
                        zeros,
                    });
                }
                Err(e @ Error::Boundary { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// All records, ordered by family and `n`.
    pub fn records(&self) -> Vec<CatalogRecord> {
        self.entries.read().expect("catalog lock").values().cloned().collect()
    }

    /// Adopts a previously computed record unless a taller one is present.
    pub fn insert(&self, record: CatalogRecord) {
        let mut map = self.entries.write().expect("catalog lock");
        let key = (record.family, record.n);
        match map.get(&key) {
            Some(r) if r.height >= record.height => {}
            _ => {
                map.insert(key, record);
            }
        }
    }
}
