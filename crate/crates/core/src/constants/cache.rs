//! Versioned CSV cache of estimated constants.
//!
//! Columns: `version,kind,d,side,n_replicates,seed,symbol,value,se`, one row
//! per constant. Rows sharing `(kind, d, side, n_replicates, seed)` form one
//! [`FunctionalConstants`] entry.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FunctionalConstants, Symbol};
use crate::error::{invalid_input, Result};
use crate::functional::Functional;
use crate::mc::Estimate;

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    version: u32,
    kind: String,
    d: usize,
    side: f64,
    n_replicates: usize,
    seed: u64,
    symbol: String,
    value: f64,
    se: f64,
}

pub fn write_cache<W: Write>(writer: W, entries: &[FunctionalConstants]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for c in entries {
        for (sym, est) in &c.values {
            wtr.serialize(Row {
                version: CACHE_VERSION,
                kind: c.kind.to_string(),
                d: c.d,
                side: c.side,
                n_replicates: c.n_replicates,
                seed: c.seed,
                symbol: sym.name().to_string(),
                value: est.value,
                se: est.se,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(reader: R) -> Result<Vec<FunctionalConstants>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut order = Vec::new();
    let mut entries: BTreeMap<(String, usize, u64, usize, u64), FunctionalConstants> = BTreeMap::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        if row.version != CACHE_VERSION {
            return Err(invalid_input(format!(
                "constants cache version {} (expected {CACHE_VERSION})",
                row.version
            )));
        }
        let kind: Functional = row.kind.parse()?;
        let key = (row.kind.clone(), row.d, row.side.to_bits(), row.n_replicates, row.seed);
        let entry = entries.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            FunctionalConstants {
                kind,
                d: row.d,
                side: row.side,
                n_replicates: row.n_replicates,
                seed: row.seed,
                values: BTreeMap::new(),
            }
        });
        let sym: Symbol = row.symbol.parse()?;
        entry.set(sym, Estimate { value: row.value, se: row.se });
    }
    Ok(order.into_iter().map(|k| entries.remove(&k).expect("key recorded")).collect())
}

/// First cached entry for `(kind, d)`.
pub fn lookup(entries: &[FunctionalConstants], kind: Functional, d: usize) -> Option<&FunctionalConstants> {
    entries.iter().find(|c| c.kind == kind && c.d == d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut a = FunctionalConstants::analytic(Functional::Knn(2), 3);
        a.set(Symbol::VarDeltaDown, Estimate { value: 1.25, se: 0.01 });
        a.side = 12.6;
        a.n_replicates = 50;
        a.seed = 9;
        let mut b = FunctionalConstants::analytic(Functional::Mst, 2);
        b.set(Symbol::EDeltaSq, Estimate { value: 5.1, se: 0.02 });
        let mut buf = Vec::new();
        write_cache(&mut buf, &[a.clone(), b.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("version,kind,d,side,n_replicates,seed,symbol,value,se\n"));
        let back = read_cache(buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = "version,kind,d,side,n_replicates,seed,symbol,value,se\n9,knn1,2,1,50,0,e_delta_up,1,0\n";
        assert!(read_cache(text.as_bytes()).is_err());
    }
}
