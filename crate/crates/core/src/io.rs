//! Plot-ready CSV and JSON renderings of profiles, solutions and sweeps.
//!
//! All float output uses Rust's shortest round-trip formatting, so equal
//! values always render to equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::TunnelingResult;
use crate::error::{Error, Result};
use crate::grid::PriceGrid;
use crate::potential::PotentialProfile;

/// `price,value` rows over the grid's bin centers.
pub fn profile_csv(grid: &PriceGrid, values: &[f64]) -> String {
    let mut out = String::from("price,value\n");
    for (p, v) in grid.centers().iter().zip(values) {
        let _ = writeln!(out, "{p},{v}");
    }
    out
}

/// Parses `price,value` rows back into centers and values.
pub fn parse_profile_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut prices = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if i == 0 {
            if rec.iter().ne(["price", "value"]) {
                return Err(Error::Parse {
                    line,
                    message: "expected header `price,value`".into(),
                });
            }
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("`{s}`: {e}"),
            })
        };
        prices.push(num(&rec[0])?);
        values.push(num(&rec[1])?);
    }
    Ok((prices, values))
}

/// Loads a `price,value` file as a potential on the grid its centers imply.
pub fn read_potential_csv(path: impl AsRef<Path>) -> Result<PotentialProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (centers, values) = parse_profile_csv(&text)?;
    let grid = PriceGrid::from_centers(&centers)?;
    PotentialProfile::from_raw(grid, values)
}

/// `n,energy` rows, `n` starting at 1.
pub fn energies_csv(energies: &[f64]) -> String {
    let mut out = String::from("n,energy\n");
    for (n, e) in energies.iter().enumerate() {
        let _ = writeln!(out, "{},{e}", n + 1);
    }
    out
}

pub fn tunneling_csv(sweep: &[TunnelingResult]) -> String {
    let mut out = String::from("energy,transmission,reflection\n");
    for r in sweep {
        let _ = writeln!(out, "{},{},{}", r.energy, r.transmission, r.reflection);
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_price_grid;
    use proptest::prelude::*;

    #[test]
    fn profile_layout() {
        let g = build_price_grid(0.0, 4.0, 2).unwrap();
        assert_eq!(profile_csv(&g, &[0.5, 1.0]), "price,value\n1,0.5\n3,1\n");
    }

    #[test]
    fn bad_profile_csv() {
        assert!(parse_profile_csv("p,v\n1,2\n").is_err());
        assert!(parse_profile_csv("price,value\n1,x\n").is_err());
    }

    proptest! {
        #[test]
        fn profile_round_trip(lo in -50.0f64..50.0, span in 0.1f64..100.0, vals in proptest::collection::vec(0.0f64..1.0, 2..50)) {
            let g = build_price_grid(lo, lo + span, vals.len()).unwrap();
            let v = PotentialProfile::from_raw(g.clone(), vals).unwrap();
            let (c, back) = parse_profile_csv(&profile_csv(&g, &v.values)).unwrap();
            prop_assert_eq!(c.as_slice(), g.centers());
            prop_assert_eq!(back, v.values);
        }
    }
}
