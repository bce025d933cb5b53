//! CSV tables with 17 significant digits and the JSON simulation record.

use std::fmt::Write;

use serde::Serialize;

use casimir_core::closed_form::{DensityProfile, Region};
use casimir_core::lattice_sim::{SimEstimate, SimParams};
use casimir_core::ForceResult;

/// Scientific notation with 17 significant digits; parses back bit-exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::Outside => "outside",
        Region::Inside => "inside",
    }
}

pub fn sweep_csv(rows: &[(f64, ForceResult)], beta: f64) -> String {
    let mut s = String::from("L,force,method,beta\n");
    for (l, f) in rows {
        let _ = writeln!(s, "{},{},{},{}", num(*l), num(f.value), f.method, num(beta));
    }
    s
}

pub fn density_csv(profiles: &[DensityProfile]) -> String {
    let mut s = String::from("x,rho,source\n");
    for p in profiles {
        for q in &p.points {
            let _ = writeln!(s, "{},{},{}", num(q.x), num(q.rho), region_name(p.region));
        }
    }
    s
}

pub fn simulation_csv(est: &SimEstimate) -> String {
    let mut s = String::from("x,rho,sigma,source\n");
    for p in [&est.density_outside, &est.density_inside] {
        for q in &p.points {
            let _ = writeln!(s, "{},{},{},{}", num(q.x), num(q.rho), num(q.sigma), region_name(p.region));
        }
    }
    s
}

#[derive(Debug, Serialize)]
pub struct SimulationRecord<'a> {
    pub params: &'a SimParams,
    pub estimate: &'a SimEstimate,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 2.765_781_953_962_737e-1, 1e-300, -7.5e12, f64::MIN_POSITIVE, 0.0] {
            let back: f64 = num(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
        }
    }
}
