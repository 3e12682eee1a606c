use derham_ns::exterior::{d, hodge_star};
use derham_ns::nonlinearity::{builtin, Builtin};
use derham_ns::radial::{
    algebraic_bump, amplitude_sweep, lift_radial, radial_evolve, radial_rhs, selfsim_integrate, selfsim_shoot,
    series_coefficient, stability_limit, RadialProfile, RadialStatus, SelfSimOptions, SelfSimilarProfile,
    DECAY_WINDOW,
};
use derham_ns::{Grid, GridForm};

// Independent high-resolution shooting (scipy DOP853, rtol 1e-12, bisection to
// the last representable kappa) for n = 5, gamma = 1, y_max = 1.2.
const FIXTURE_KAPPA: f64 = 39.642378034;
const FIXTURE_C: f64 = 11.4168885632;

fn matched() -> SelfSimilarProfile {
    selfsim_shoot(5, 1.0, 1.2, &SelfSimOptions::default()).unwrap()
}

#[test]
fn shooting_reproduces_the_fixture() {
    let p = matched();
    assert!(p.matched);
    assert!((p.kappa - FIXTURE_KAPPA).abs() <= 1e-8 * FIXTURE_KAPPA, "kappa {}", p.kappa);
    assert!((p.c - FIXTURE_C).abs() <= 1e-8 * FIXTURE_C, "c {}", p.c);
}

#[test]
fn matched_profile_is_positive_and_decays_like_inverse_square() {
    let p = matched();
    assert!(p.w.iter().all(|w| *w > 0.0));
    let spread = p.decay_spread(DECAY_WINDOW);
    assert!(spread <= 0.05, "spread {spread}");
    assert!((p.w[0] - 1.0).abs() < 1e-6);
}

/// One classical RK4 sweep with many substeps between consecutive samples.
fn defect(p: &SelfSimilarProfile, i: usize) -> f64 {
    let nf = p.n as f64;
    let f = |y: f64, w: f64, q: f64| {
        (q, -(nf + 1.0) / y * q + p.kappa * y * q - (nf + 2.0) * w * w - 3.0 * y * w * q + p.kappa_coeff * p.kappa * w)
    };
    let sub = 64;
    let h = (p.y[i + 1] - p.y[i]) / sub as f64;
    let (mut y, mut w, mut q) = (p.y[i], p.w[i], p.dw[i]);
    for _ in 0..sub {
        let k1 = f(y, w, q);
        let k2 = f(y + h / 2.0, w + h / 2.0 * k1.0, q + h / 2.0 * k1.1);
        let k3 = f(y + h / 2.0, w + h / 2.0 * k2.0, q + h / 2.0 * k2.1);
        let k4 = f(y + h, w + h * k3.0, q + h * k3.1);
        w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        y += h;
    }
    let scale = 1.0 + p.w[i + 1].abs() + p.dw[i + 1].abs();
    ((w - p.w[i + 1]).abs() + (q - p.dw[i + 1]).abs()) / scale
}

#[test]
fn profile_satisfies_the_ode_between_samples() {
    let p = matched();
    let worst = (0..p.y.len() - 1).step_by(7).map(|i| defect(&p, i)).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "defect {worst:e}");
    let q = selfsim_integrate(3, 0.4, 2.0, 2.0, &SelfSimOptions::default()).unwrap();
    let worst = (0..q.y.len() - 1).step_by(11).map(|i| defect(&q, i)).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "defect {worst:e}");
}

#[test]
fn series_start_matches_symbolic_substitution() {
    // 2 a (n + 2) = 2κγ - (n+2)γ² from the y^0 terms of the equation
    for (n, g, k) in [(5, 1.0, 3.5), (3, 0.4, 2.0), (8, 2.0, 0.3)] {
        let a = series_coefficient(n, g, k, 2.0);
        let lhs = 2.0 * a * (n as f64 + 2.0);
        assert!((lhs - (2.0 * k * g - (n as f64 + 2.0) * g * g)).abs() < 1e-14);
    }
    // the variant coefficient changes the start accordingly
    assert!((series_coefficient(5, 1.0, 3.5, 1.0) - (3.5 - 7.0) / 14.0).abs() < 1e-15);
}

#[test]
fn self_similar_field_satisfies_the_radial_equation() {
    let p = matched();
    let horizon = 1.0;
    for t in [0.0, 0.5, 0.9] {
        let v = p.to_radial(horizon, t, 2001).unwrap();
        let rhs = radial_rhs(&v);
        let scale = (0..v.len()).map(|i| p.time_derivative(horizon, t, v.r(i)).unwrap().abs()).fold(0.0, f64::max);
        let worst = (0..v.len() - 1)
            .map(|i| (rhs.values[i] - p.time_derivative(horizon, t, v.r(i)).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4 * scale, "t={t}: {:e}", worst / scale);
    }
}

#[test]
fn large_data_blows_up_sooner_in_five_dimensions() {
    let amps = [50.0, 100.0, 200.0, 400.0, 800.0];
    let rows = amplitude_sweep(5, &amps, 0.01, 0.05).unwrap();
    let times: Vec<f64> = rows
        .iter()
        .map(|r| match r.status {
            RadialStatus::BlowUp { t_star } => t_star,
            RadialStatus::Completed => panic!("A = {} did not blow up", r.amplitude),
        })
        .collect();
    eprintln!("t* = {times:?}");
    assert!(times.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn blowup_time_is_insensitive_to_the_outer_radius() {
    let a = 100.0;
    let dr = 0.01;
    let t_star = |radius: f64| {
        let points = (radius / dr).round() as usize + 1;
        let v0 = RadialProfile::from_fn(5, radius, points, |r| algebraic_bump(a, r)).unwrap();
        match radial_evolve(&v0, 0.05, stability_limit(5, v0.dr), 1).unwrap().status {
            RadialStatus::BlowUp { t_star } => t_star,
            RadialStatus::Completed => panic!("no blow-up"),
        }
    };
    let (t1, t2) = (t_star(128.0), t_star(256.0));
    assert!((t1 - t2).abs() <= 0.01 * t1, "{t1} vs {t2}");
}

#[test]
fn moderate_data_decays_in_three_dimensions() {
    for a in [1.0, 5.0] {
        let v0 = RadialProfile::from_fn(3, 64.0, 1281, |r| algebraic_bump(a, r)).unwrap();
        let run = radial_evolve(&v0, 1.0, stability_limit(3, v0.dr), 4).unwrap();
        assert_eq!(run.status, RadialStatus::Completed);
        let peaks: Vec<f64> = run.snapshots.iter().map(RadialProfile::max_abs).collect();
        assert!(peaks.windows(2).all(|w| w[1] < w[0]), "A={a}: {peaks:?}");
    }
}

#[test]
fn first_two_nodes_agree_to_second_order() {
    let v0 = RadialProfile::from_fn(3, 20.0, 401, |r| (-r * r).exp()).unwrap();
    let run = radial_evolve(&v0, 0.2, stability_limit(3, v0.dr), 2).unwrap();
    let v = run.last();
    assert!((v.values[0] - v.values[1]).abs() <= 10.0 * v.dr * v.dr * v.max_abs());
}

#[test]
fn lifted_field_is_curl_free() {
    let g = Grid::new(3, 32, 5.0).unwrap();
    let v = RadialProfile::from_fn(3, 10.0, 2001, |r| (-r * r).exp()).unwrap();
    let u = lift_radial(&v, &g).unwrap();
    let curl = hodge_star(&d(&u));
    assert!(curl.max_abs() <= 1e-6 * u.max_abs(), "{:e}", curl.max_abs());
}

#[test]
fn lifted_field_turns_the_nonlinearity_into_the_radial_reaction() {
    // PS(b) on -2 v x is -2 x times the reaction part of the radial equation, up to sign
    let g = Grid::new(3, 48, 6.0).unwrap();
    let v = RadialProfile::from_fn(3, 12.0, 4001, |r| (-r * r).exp()).unwrap();
    let u = lift_radial(&v, &g).unwrap();
    let want = GridForm::from_fn(&g, 1, |x, c| {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let (w, dw) = ((-r * r).exp(), -2.0 * r * (-r * r).exp());
        2.0 * x[c] * (5.0 * w * w + 3.0 * r * w * dw)
    });
    for b in [0.0, 1.0] {
        let got = builtin(Builtin::Ps, 3, Some(b)).unwrap().apply_n(&u).unwrap();
        let err = (&got - &want).max_abs() / want.max_abs();
        assert!(err <= 1e-5, "b={b}: {err:e}");
    }
}
