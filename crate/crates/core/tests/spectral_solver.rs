use sigmadamp::kernel_analysis::fit_power_law;
use sigmadamp::params::reference::linear_1d;
use sigmadamp::rational::{q, qi};
use sigmadamp::spectral::{
    linear_evolve, semilinear_solve, Field, LinearPropagator, SemilinearConfig, Space, TorusGrid,
};
use sigmadamp::ModelParams;

/// Classical RK4 on v'' + b v' + c v = 0, written independently of the kernel formulas.
fn rk4_mode(b: f64, c: f64, v0: f64, w0: f64, t: f64, steps: usize) -> (f64, f64) {
    let h = t / steps as f64;
    let f = |v: f64, w: f64| (w, -b * w - c * v);
    let (mut v, mut w) = (v0, w0);
    for _ in 0..steps {
        let (a1, b1) = f(v, w);
        let (a2, b2) = f(v + 0.5 * h * a1, w + 0.5 * h * b1);
        let (a3, b3) = f(v + 0.5 * h * a2, w + 0.5 * h * b2);
        let (a4, b4) = f(v + h * a3, w + h * b3);
        v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        w += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    (v, w)
}

#[test]
fn linear_modes_match_independent_integration() {
    let g = TorusGrid::new(1, 64, 8.0).unwrap();
    let u0 = Field::gaussian(&g, 1.0, 1.0);
    let u1 = Field::from_fn(&g, |x| 0.5 * (-x[0] * x[0]).exp() * x[0]);
    let params = linear_1d();
    let t = 2.5;
    let s = linear_evolve(&u0, &u1, t, &params).unwrap();
    let a = u0.clone().to_spectral();
    let b = u1.clone().to_spectral();
    let radii = g.radii();
    for i in 0..g.len() {
        let rho = radii[i];
        let (bb, cc) = (rho.sqrt(), rho * rho);
        let (vr, wr) = rk4_mode(bb, cc, a.values[i].re, b.values[i].re, t, 20_000);
        let (vi, wi) = rk4_mode(bb, cc, a.values[i].im, b.values[i].im, t, 20_000);
        assert!((s.u.values[i].re - vr).abs() < 1e-10 && (s.u.values[i].im - vi).abs() < 1e-10);
        assert!((s.ut.values[i].re - wr).abs() < 1e-9 && (s.ut.values[i].im - wi).abs() < 1e-9);
    }
}

#[test]
fn linear_energy_is_non_increasing() {
    let g = TorusGrid::new(2, 32, 6.0).unwrap();
    let params = ModelParams::new(qi(2), q(3, 4), 2);
    let u0 = Field::gaussian(&g, 1.0, 1.0);
    let u1 = Field::gaussian(&g, -0.3, 2.0);
    let prop = LinearPropagator::new(&u0, &u1, &params).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..40 {
        let s = prop.at(0.25 * i as f64).unwrap();
        let e = s.u.sobolev_seminorm(2.0).unwrap().powi(2) + s.ut.l2_norm().powi(2);
        assert!(e <= last * (1.0 + 1e-12));
        last = e;
    }
}

#[test]
fn semilinear_scheme_is_second_order() {
    let g = TorusGrid::new(1, 128, 12.0).unwrap();
    let params = linear_1d();
    let u0 = Field::gaussian(&g, 0.8, 1.0);
    let u1 = Field::gaussian(&g, 0.3, 1.5);
    let run = |dt: f64| {
        let cfg = SemilinearConfig::new(3.0, dt, 2.0);
        let tr = semilinear_solve(&u0, &u1, &params, &cfg).unwrap();
        assert!(tr.blow_up.is_none());
        tr.last().u.clone()
    };
    let (a, b, c) = (run(0.1), run(0.05), run(0.025));
    let diff = |x: &Field, y: &Field| {
        let d = Field {
            grid: x.grid.clone(),
            space: Space::Spectral,
            values: x.values.iter().zip(&y.values).map(|(p, q)| p - q).collect(),
        };
        d.l2_norm()
    };
    let order = (diff(&a, &b) / diff(&b, &c)).log2();
    assert!((1.8..=2.2).contains(&order), "observed order {order}");
}

#[test]
fn zero_power_forcing_vanishes_for_zero_data() {
    let g = TorusGrid::new(1, 32, 5.0).unwrap();
    let z = Field::zeros(&g, Space::Physical);
    let tr = semilinear_solve(&z, &z, &linear_1d(), &SemilinearConfig::new(2.0, 0.1, 1.0)).unwrap();
    assert!(tr.norms.iter().all(|r| r.u_l2 == 0.0));
}

#[test]
fn large_data_trips_the_blow_up_detector() {
    let g = TorusGrid::new(1, 64, 5.0).unwrap();
    let u0 = Field::gaussian(&g, 20.0, 1.0);
    let u1 = Field::gaussian(&g, 20.0, 1.0);
    let mut cfg = SemilinearConfig::new(3.0, 0.01, 5.0);
    cfg.blowup_ceiling = 1e4;
    let tr = semilinear_solve(&u0, &u1, &linear_1d(), &cfg).unwrap();
    let b = tr.blow_up.expect("blow-up expected");
    assert!(b.t < 5.0);
    assert_eq!(tr.last().t, b.t);
}

#[test]
fn l2_decay_rate_of_the_reference_problem() {
    let g = TorusGrid::new(1, 1 << 15, 400.0).unwrap();
    let u0 = Field::gaussian(&g, 1.0, 1.0);
    let u1 = Field::zeros(&g, Space::Physical);
    let prop = LinearPropagator::new(&u0, &u1, &linear_1d()).unwrap();
    let ts: Vec<f64> = (0..25).map(|i| 10.0 * 50f64.powf(i as f64 / 24.0)).collect();
    let norms: Vec<f64> = ts.iter().map(|&t| prop.at(t).unwrap().u.l2_norm()).collect();
    let fit = fit_power_law(&ts, &norms).unwrap();
    println!("fitted exponent {}", fit.exponent);
    assert!((fit.exponent + 1.0 / 3.0).abs() <= 0.1 / 3.0);
}
