use orthoplex::expression::{parse, Expr, Func};
use orthoplex::interaction::{finite_mixture, rate_function, sup_psi};
use orthoplex::model::{
    check_concavity_grid, entropy_lower_bound, entropy_n, entropy_upper_bound, Lattice, PartitionTable,
};
use orthoplex::thermo::{ensemble_map, inverse_map, limiting_entropy};
use orthoplex::{Interaction, ModelPoint};
use proptest::prelude::*;

fn interior_point() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..5.0, -0.98f64..0.98).prop_map(|(rho, frac)| (frac * rho, rho))
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::Var), (0u32..2000).prop_map(|c| Expr::Const(c as f64 / 8.0))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let func = prop_oneof![Just(Func::Exp), Just(Func::Ln), Just(Func::Cos), Just(Func::Abs)];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), -3i32..5).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            (func, inner).prop_map(|(f, a)| Expr::Func(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_function_is_even_in_m(n in 2usize..300, (m, rho) in interior_point()) {
        let table = PartitionTable::new(n).unwrap();
        let (mag, part) = (m * n as f64, rho * n as f64);
        prop_assert_eq!(table.log_z_interior_totals(mag, part), table.log_z_interior_totals(-mag, part));
    }

    #[test]
    fn entropy_bounds_hold(n in 3usize..400, (m, rho) in interior_point()) {
        let p = ModelPoint::interior(m, rho).unwrap();
        let t = ensemble_map(&p).unwrap();
        let s = entropy_n(n, &p).unwrap();
        let tol = 1e-12 * s.abs().max(1.0);
        prop_assert!(entropy_lower_bound(n, &p) <= s + tol);
        prop_assert!(s <= entropy_upper_bound(n, &p, &t) + tol);
    }

    #[test]
    fn scaling_rho_shifts_the_limit_entropy(frac in -0.95f64..0.95, rho in 0.1f64..4.0, c in 0.2f64..5.0) {
        // s(c m, c rho) = s(m, rho) + ln c
        let a = limiting_entropy(&ModelPoint::interior(frac * rho, rho).unwrap()).unwrap();
        let b = limiting_entropy(&ModelPoint::interior(c * frac * rho, c * rho).unwrap()).unwrap();
        prop_assert!((b - a - c.ln()).abs() < 1e-12);
    }

    #[test]
    fn ensemble_map_round_trips((m, rho) in interior_point()) {
        let p = ModelPoint::interior(m, rho).unwrap();
        let t = ensemble_map(&p).unwrap();
        prop_assert!(t.mu() > t.beta().abs());
        let back = inverse_map(&t).unwrap();
        prop_assert!((back.m() - m).abs() < 1e-10 * rho.max(1.0));
        prop_assert!((back.rho() - rho).abs() < 1e-10 * rho.max(1.0));
    }

    #[test]
    fn rate_is_nonnegative(beta_j in 0.0f64..3.0, h in -0.5f64..0.5, m in -1.0f64..=1.0) {
        let g = Interaction::CurieWeiss { beta_j, h };
        let sup = sup_psi(&g).unwrap();
        let i = rate_function(&g, m).unwrap();
        prop_assert!(i >= -1e-9 * sup.abs().max(1.0), "I({}) = {}", m, i);
    }

    #[test]
    fn printed_expressions_parse_back(e in expr_tree()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mixture_mass_is_additive(n in 10usize..120, a in -1.0f64..0.0, b in 0.0f64..1.0) {
        let mix = finite_mixture(&Interaction::CurieWeiss { beta_j: 1.3, h: 0.1 }, n).unwrap();
        let whole = mix.mass(a, b).unwrap();
        let parts = mix.mass(a, 0.0).unwrap() + mix.mass(0.0, b).unwrap();
        prop_assert!((whole - parts).abs() < 1e-8);
        prop_assert!(whole <= 1.0 + 1e-10);
    }
}

#[test]
fn finite_entropy_is_concave() {
    let grid = Lattice { m_min: -1.9, m_max: 1.9, m_count: 39, rho_min: 0.1, rho_max: 2.0, rho_count: 20 };
    for n in [4, 25, 200] {
        let report = check_concavity_grid(n, &grid, 1e-12).unwrap();
        assert!(report.checked > 1000);
        assert!(report.violations.is_empty(), "n={n}: {:?}", &report.violations[..1]);
    }
}
