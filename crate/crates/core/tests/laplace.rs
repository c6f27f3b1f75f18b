use std::f64::consts::PI;

use orthoplex::bessel::{scaled_increment, taylor_quadratic_form, w_n_numeric};
use orthoplex::interaction::{analyze, weight_w};
use orthoplex::{Error, Interaction};

#[test]
fn zero_interaction_weight_is_closed_form() {
    let w = weight_w(&Interaction::Zero, 0.0).unwrap();
    assert!((w - 2.0 * PI.powf(1.5) / 1f64.exp()).abs() < 1e-12);
}

#[test]
fn window_size_does_not_matter_for_large_n() {
    let n = 2000;
    let g = Interaction::Zero;
    let a = w_n_numeric(&g, 0.0, 0.3, n).unwrap();
    let b = w_n_numeric(&g, 0.0, 0.9, n).unwrap();
    assert!((a / b - 1.0).abs() < 1e-10, "{a} vs {b}");

    let g = Interaction::CurieWeiss { beta_j: 1.0, h: 0.0 };
    let m = analyze(&g).unwrap()[1].m_star;
    let a = w_n_numeric(&g, m, 0.1, n).unwrap();
    let b = w_n_numeric(&g, m, 0.2, n).unwrap();
    assert!((a / b - 1.0).abs() < 1e-7, "{a} vs {b}");
}

#[test]
fn degenerate_maximizer_converges_slowly() {
    // at betaJ = 1/2 the maximizer has type 2 and the correction is O(n^{-1/2})
    let g = Interaction::CurieWeiss { beta_j: 0.5, h: 0.0 };
    let w = weight_w(&g, 0.0).unwrap();
    let errs: Vec<f64> =
        [400, 1600, 6400].iter().map(|&n| (w_n_numeric(&g, 0.0, 0.9, n).unwrap() / w - 1.0).abs()).collect();
    for pair in errs.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(ratio > 0.4 && ratio < 0.6, "{errs:?}");
    }
}

#[test]
fn large_systems_stay_finite() {
    let g = Interaction::CurieWeiss { beta_j: 0.5, h: 0.0 };
    let w = weight_w(&g, 0.0).unwrap();
    let r = w_n_numeric(&g, 0.0, 0.9, 25_600).unwrap() / w;
    assert!((r - 1.0).abs() < 5e-3, "{r}");
}

#[test]
fn scaled_increment_tends_to_taylor_form() {
    let cases = [
        (Interaction::Zero, 0.0, 0.5),
        (Interaction::CurieWeiss { beta_j: 0.5, h: 0.0 }, 0.0, 0.25),
        (Interaction::CurieWeiss { beta_j: 1.0, h: 0.0 }, 0.7861513777574234, 0.5),
    ];
    for (g, m, exponent) in cases {
        let q = taylor_quadratic_form(&g, m, 0.7, -0.4, 0.5).unwrap();
        let mut last = f64::INFINITY;
        for n in [1e2, 1e4, 1e6, 1e8] {
            let err = (scaled_increment(&g, m, n, 0.7, -0.4, 0.5).unwrap() - q).abs();
            // the remainder shrinks at least like n^{-1/(2k)}
            assert!(err < last && err * f64::powf(n, exponent) < 1.0, "{g} n={n}: {err}");
            last = err;
        }
    }
}

#[test]
fn windows_must_be_valid() {
    let g = Interaction::CurieWeiss { beta_j: 1.0, h: 0.0 };
    let m = analyze(&g).unwrap()[1].m_star;
    assert!(matches!(w_n_numeric(&g, m, 0.5, 100), Err(Error::InvalidArgument(_))));
    assert!(matches!(w_n_numeric(&g, 0.0, 0.1, 100), Err(Error::InvalidArgument(_))));
    assert!(matches!(w_n_numeric(&g, m, 0.0, 100), Err(Error::InvalidArgument(_))));
}
