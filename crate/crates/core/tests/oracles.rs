use casimir_core::closed_form::{density_inside_absorbing, fourier_coefficients, force_absorbing, force_reflecting};
use casimir_core::pde_oracle::*;
use casimir_core::ModelParams;

#[test]
fn reflecting_oracle_matches_closed_form() {
    for beta in [0.5, 2.0] {
        for l in [0.5, 2.0] {
            let p = ModelParams::reflecting(beta, l).unwrap();
            let oracle = force_reflecting_oracle(&p, 4096).unwrap().value;
            let exact = force_reflecting(&p).unwrap().value;
            assert!((oracle / exact - 1.0).abs() < 1e-6, "beta={beta} L={l}");
        }
    }
}

#[test]
fn one_d_wall_density_converges_at_second_order() {
    let p = ModelParams::reflecting(1.0, 1.0).unwrap();
    let exact = casimir_core::closed_form::rho_reflecting_inside(&p).unwrap();
    let err = |n: usize| (wall_density_1d(&solve_parity_1d(&p, n).unwrap()).unwrap() - exact).abs();
    let (e1, e2, e3) = (err(64), err(128), err(256));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn two_d_parity_matches_fourier_series() {
    let p = ModelParams::absorbing(1.0, 1.0).unwrap();
    let coarse = solve_parity_2d(&p, 128).unwrap();
    let fine = solve_parity_2d(&p, 256).unwrap();
    let series = fourier_coefficients(&p, 1000).unwrap();
    for (i, j) in [(32, 96), (16, 64), (64, 112), (40, 48)] {
        let rich = (4.0 * fine.at(2 * i, 2 * j) - coarse.at(i, j)) / 3.0;
        let (x, y) = (i as f64 / 128.0, j as f64 / 128.0);
        assert!((rich - series.reconstruct(x, y)).abs() < 1e-7, "({x}, {y})");
    }
}

#[test]
fn two_d_inside_density_matches_series() {
    let p = ModelParams::absorbing(1.0, 1.0).unwrap();
    let coarse = solve_parity_2d(&p, 256).unwrap();
    let fine = solve_parity_2d(&p, 512).unwrap();
    let xs = [0.125, 0.25, 0.5, 0.75];
    let rich = density_inside_richardson(&coarse, &fine, &xs).unwrap();
    for (x, v) in xs.iter().zip(rich) {
        let exact = density_inside_absorbing(&p, *x, usize::MAX).unwrap().value;
        assert!((v - exact).abs() < 1e-7, "x={x}: {v} vs {exact}");
    }
}

#[test]
fn absorbing_oracle_matches_closed_form() {
    let p = ModelParams::absorbing(1.0, 1.0).unwrap();
    let oracle = force_absorbing_oracle(&p, default_force_grid(&p)).unwrap();
    let exact = force_absorbing(&p).unwrap().value;
    assert!((oracle.value / exact - 1.0).abs() < 1e-5);
    assert!(oracle.uncertainty.unwrap() < 1e-4);
}

#[test]
fn default_grid_scales_with_the_correlation_length() {
    let g = |beta: f64, l: f64| default_force_grid(&ModelParams::absorbing(beta, l).unwrap());
    assert_eq!(g(1.0, 0.5), 256);
    assert_eq!(g(1.0, 1.0), 512);
    assert_eq!(g(1.0, 2.0), 1024);
    assert_eq!(g(4.0, 1.0), 1024);
    assert_eq!(g(1e-6, 1.0), 64);
}
