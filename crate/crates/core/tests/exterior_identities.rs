use derham_ns::exterior::{d, d_star, hodge_laplacian, hodge_star, laplacian, wedge};
use derham_ns::random::{band_limited_form, Seeded};
use derham_ns::{Grid, GridForm};
use proptest::prelude::*;

fn weitzenbock_residual(u: &GridForm) -> f64 {
    (&hodge_laplacian(u) + &laplacian(u)).max_abs() / u.max_abs()
}

#[test]
fn complex_identities_all_degrees() {
    for (n, points) in [(2, 16), (3, 12), (4, 8)] {
        let g = Grid::new(n, points, 1.3).unwrap();
        let mut rng = Seeded::new(n as u64);
        for q in 0..=n {
            let u = band_limited_form(&g, q, points / 2 - 1, &mut rng);
            let scale = u.max_abs();
            assert!(d(&d(&u)).max_abs() <= 1e-12 * scale, "dd n={n} q={q}");
            assert!(d_star(&d_star(&u)).max_abs() <= 1e-12 * scale, "d*d* n={n} q={q}");
            let r = weitzenbock_residual(&u);
            assert!(r <= 1e-10, "Weitzenbock n={n} q={q}: {r:e}");
            let sign = if (q * (n - q)) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(hodge_star(&hodge_star(&u)), u.scaled(sign));
        }
    }
}

#[test]
fn d_star_is_adjoint_of_d() {
    let g = Grid::new(3, 8, 2.0).unwrap();
    let mut rng = Seeded::new(9);
    for q in 0..3 {
        let u = band_limited_form(&g, q, 3, &mut rng);
        let v = band_limited_form(&g, q + 1, 3, &mut rng);
        let lhs = d(&u).inner(&v).unwrap();
        let rhs = u.inner(&d_star(&v)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }
}

fn form_strategy(n: usize, q: usize) -> impl Strategy<Value = GridForm> {
    form_on(n, q, 6)
}

fn form_on(n: usize, q: usize, points: usize) -> impl Strategy<Value = GridForm> {
    any::<u64>().prop_map(move |seed| {
        let g = Grid::new(n, points, 1.0).unwrap();
        band_limited_form(&g, q, 2, &mut Seeded::new(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wedge_graded_anticommutative(
        a in form_strategy(4, 1),
        b in form_strategy(4, 2),
    ) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        // (-1)^{1*2} = +1
        prop_assert!((&ab - &ba).max_abs() <= 1e-14 * ab.max_abs().max(1.0));
    }

    #[test]
    fn wedge_of_one_forms_anticommutes(a in form_strategy(3, 1), b in form_strategy(3, 1)) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        prop_assert!((&ab + &ba).max_abs() <= 1e-14 * ab.max_abs().max(1.0));
    }

    #[test]
    fn wedge_is_bilinear(
        a in form_strategy(3, 1),
        b in form_strategy(3, 1),
        c in form_strategy(3, 2),
        s in -3.0f64..3.0,
    ) {
        let lhs = wedge(&(&a + &b.scaled(s)), &c).unwrap();
        let rhs = &wedge(&a, &c).unwrap() + &wedge(&b, &c).unwrap().scaled(s);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-13 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn d_obeys_leibniz(f in form_on(3, 0, 10), u in form_on(3, 1, 10)) {
        // d(f u) = df ∧ u + f du for a 0-form f
        let fu = wedge(&f, &u).unwrap();
        let lhs = d(&fu);
        let rhs = &wedge(&d(&f), &u).unwrap() + &wedge(&f, &d(&u)).unwrap();
        // modes <= 2 on N = 10: the product stays below Nyquist
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-10 * rhs.max_abs().max(1.0));
    }
}
