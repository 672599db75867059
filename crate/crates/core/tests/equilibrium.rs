use num_complex::Complex64;
use wpa_core::equilibrium::{extremal_function, solve_equilibrium, EquilibriumOptions, WeightedCompact};
use wpa_core::lemniscate::{self, classify, Region};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts(gap_tol: f64) -> EquilibriumOptions {
    EquilibriumOptions {
        max_iters: 1_000_000,
        gap_tol,
        record_history: false,
    }
}

fn loop_compact(m: usize) -> WeightedCompact {
    WeightedCompact::closed_curve(lemniscate::boundary_points(m).unwrap(), "loop")
        .unwrap()
        .with_field(lemniscate::field)
        .unwrap()
}

#[test]
fn scaling_the_weight_shifts_f_by_log_t() {
    let k = WeightedCompact::circle(c(0.0, 0.0), 1.0, 256)
        .unwrap()
        .with_field(|z| 0.5 * (1.0 + z.re))
        .unwrap();
    let t = 2.0;
    let a = solve_equilibrium(&k, &opts(1e-9)).unwrap();
    let b = solve_equilibrium(&k.scale_weights(t).unwrap(), &opts(1e-9)).unwrap();
    assert!((b.f_const - (a.f_const - t.ln())).abs() <= 1e-6);
    let worst = a
        .measure
        .masses()
        .iter()
        .zip(b.measure.masses())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-4, "masses moved by {worst:e}");
}

#[test]
fn disk_inside_the_loop_keeps_its_potential_below_f_off_k() {
    let (center, radius) = (c(-0.1, 0.0), 0.15);
    let k = WeightedCompact::disk(center, radius, 256, 0.01)
        .unwrap()
        .with_field(lemniscate::field)
        .unwrap();
    let sol = solve_equilibrium(&k, &opts(1e-7)).unwrap();
    let on_k = sol
        .node_potentials
        .iter()
        .zip(k.q_values())
        .map(|(u, q)| (u + q - sol.f_const).abs())
        .fold(0.0, f64::max);
    assert!(on_k <= 1e-2, "deviation on K {on_k}");
    for z in [c(0.12, 0.0), c(0.2, 0.0), c(-0.32, 0.0), c(-0.1, 0.21), c(-0.1, -0.21), c(0.1, 0.12)] {
        assert_eq!(classify(z), Region::InsideRight);
        assert!((z - center).norm() - radius >= 0.05);
        let g = sol.potential(z) + lemniscate::field(z) - sol.f_const;
        assert!(g < -1e-2, "{z}: {g}");
    }
}

#[test]
fn increasing_fields_give_increasing_extremal_functions() {
    let base = WeightedCompact::circle(c(0.0, 0.0), 1.0, 256).unwrap();
    let q = |z: Complex64| 0.5 * (1.0 + z.re);
    let probes = [c(1.5, 0.0), c(-2.0, 0.0), c(0.0, 2.0), c(1.0, 1.0), c(-1.2, -0.8)];
    let values = |scale: f64| {
        let k = base.clone().with_field(move |z| scale * q(z)).unwrap();
        let sol = solve_equilibrium(&k, &opts(1e-9)).unwrap();
        probes.map(|z| extremal_function(&sol, z))
    };
    let limit = values(1.0);
    let mut prev: Option<[f64; 5]> = None;
    for j in [1u32, 2, 4, 8, 16, 32, 64, 128] {
        let v = values(1.0 / (1.0 + 1.0 / j as f64));
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(&v) {
                assert!(b >= &(a - 1e-6), "j = {j}: {a} -> {b}");
            }
        }
        prev = Some(v);
    }
    let last = prev.unwrap();
    for (a, b) in last.iter().zip(&limit) {
        assert!((a - b).abs() <= 1e-2);
    }
}

#[test]
fn frank_wolfe_energies_do_not_increase() {
    let k = loop_compact(256);
    let sol = solve_equilibrium(
        &k,
        &EquilibriumOptions {
            record_history: true,
            ..opts(1e-8)
        },
    )
    .unwrap();
    assert!(sol.energy_history.len() > 10);
    for w in sol.energy_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn doubling_the_nodes_settles_f() {
    let f: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&m| solve_equilibrium(&loop_compact(m), &opts(1e-7)).unwrap().f_const)
        .collect();
    let (d1, d2) = ((f[1] - f[0]).abs(), (f[2] - f[1]).abs());
    assert!(d2 <= 2.0 * d1, "{f:?}");
    assert!((f[2] - 4f64.ln()).abs() <= 2e-2);
}
