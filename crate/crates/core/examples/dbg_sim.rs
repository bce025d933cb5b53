use casimir_core::closed_form::*;
use casimir_core::lattice_sim::*;
use casimir_core::ModelParams;
use std::time::Instant;
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = &args[1];
    let eps: f64 = args[2].parse().unwrap();
    let l: f64 = args[3].parse().unwrap();
    let model = if mode == "r" { ModelParams::reflecting(1.0, l) } else { ModelParams::absorbing(1.0, l) }.unwrap();
    let p = SimParams::new(model, eps, 8.0, 5.0, 50.0, 32, 42).unwrap()
        .with_parity_intervals(vec![(0.0, l / 2.0), (-6.0, -2.0)]).unwrap();
    let t = Instant::now();
    let e = simulate(&p).unwrap();
    println!("time {:?} events {}", t.elapsed(), e.metadata.events[0].events);
    println!("bulk measurement {:?}", e.bulk);
    let bulk: Vec<_> = e.density_outside.points.iter().filter(|q| q.x > -6.0 && q.x < -2.0).collect();
    let m = bulk.iter().map(|q| q.rho).sum::<f64>() / bulk.len() as f64;
    let s = bulk.iter().map(|q| q.sigma).sum::<f64>() / bulk.len() as f64;
    println!("bulk mean {m} (point sigma {s}) target {}", model.bulk_density());
    for q in &e.parity { println!("parity {:?}", q); }
    println!("wall {:#?}", e.wall);
    println!("force {:?} drift {}", e.force_estimate, e.metadata.drift_z);
    if mode == "r" {
        println!("closed F {} rho_in {} rho_out {} V(L/2) {}", force_reflecting(&model).unwrap().value, rho_reflecting_inside(&model).unwrap(), rho_reflecting_outside(&model).unwrap(), parity_reflecting(&model, l/2.0).unwrap());
    } else {
        println!("closed F {}", force_absorbing(&model).unwrap().value);
    }
}
