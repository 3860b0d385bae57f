//! Property tests for the operator identities and the weighted norm.

use std::sync::Arc;

use proptest::prelude::*;

use deadcore::barrier::l1s_norm;
use deadcore::exterior::{ExteriorSpec, Shell};
use deadcore::field::Field;
use deadcore::grid::{build_grid, DomainGrid, DomainKind};
use deadcore::kernel::{ExtremalSign, KernelSpec, PolicyField};
use deadcore::operator::{eval_extremal, eval_linear};

fn grid() -> Arc<DomainGrid> {
    Arc::new(build_grid(1, DomainKind::Interval, &[1.0], &[0.0], 1.0 / 24.0, 8.0).unwrap())
}

fn exterior(v1: f64, v2: f64) -> ExteriorSpec {
    ExteriorSpec::new(
        vec![
            Shell { r_inner: 1.0, r_outer: 3.0, value: v1 },
            Shell { r_inner: 3.0, r_outer: 8.0, value: v2 },
        ],
        0.0,
    )
}

fn field_strategy() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    let g = grid();
    (
        proptest::collection::vec(-2.0f64..2.0, g.n_nodes()),
        -1.5f64..1.5,
        -1.5f64..1.5,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extremal_brackets_every_policy((values, v1, v2) in field_strategy(), mu_t in 0.0f64..1.0) {
        let g = grid();
        let k = KernelSpec::new(1, 0.5, 0.5, 2.0).unwrap();
        let f = Field::new(g.clone(), values, exterior(v1, v2)).unwrap();
        let mu = PolicyField::constant(g.n_nodes(), 1, k.lambda + mu_t * (k.big_lambda - k.lambda));
        let x = g.node(g.n_nodes() / 2);
        let plus = eval_extremal(&f, x, ExtremalSign::Plus, &k).unwrap();
        let minus = eval_extremal(&f, x, ExtremalSign::Minus, &k).unwrap();
        let lin = eval_linear(&f, x, &mu, &k).unwrap();
        let scale = plus.abs().max(minus.abs()).max(1.0);
        prop_assert!(lin <= plus + 1e-12 * scale);
        prop_assert!(lin >= minus - 1e-12 * scale);
    }

    #[test]
    fn sign_flip_is_exact((values, v1, v2) in field_strategy()) {
        let g = grid();
        let k = KernelSpec::new(1, 0.75, 0.5, 2.0).unwrap();
        let f = Field::new(g.clone(), values.clone(), exterior(v1, v2)).unwrap();
        let neg = Field::new(
            g.clone(),
            values.iter().map(|v| -v).collect(),
            exterior(-v1, -v2),
        )
        .unwrap();
        let x = g.node(g.n_nodes() / 3);
        let plus_neg = eval_extremal(&neg, x, ExtremalSign::Plus, &k).unwrap();
        let minus = eval_extremal(&f, x, ExtremalSign::Minus, &k).unwrap();
        prop_assert_eq!(plus_neg, -minus);
    }

    #[test]
    fn positive_homogeneity_and_shift((values, v1, v2) in field_strategy(), c in 0.0f64..3.0, shift in -2.0f64..2.0) {
        let g = grid();
        let k = KernelSpec::new(1, 0.25, 0.5, 2.0).unwrap();
        let f = Field::new(g.clone(), values.clone(), exterior(v1, v2)).unwrap();
        let scaled = Field::new(
            g.clone(),
            values.iter().map(|v| c * v).collect(),
            exterior(c * v1, c * v2),
        )
        .unwrap();
        let shifted = Field::new(
            g.clone(),
            values.iter().map(|v| v + shift).collect(),
            ExteriorSpec::new(
                vec![
                    Shell { r_inner: 1.0, r_outer: 3.0, value: v1 + shift },
                    Shell { r_inner: 3.0, r_outer: 8.0, value: v2 + shift },
                ],
                shift,
            ),
        )
        .unwrap();
        let x = g.node(2 * g.n_nodes() / 3);
        for sign in [ExtremalSign::Plus, ExtremalSign::Minus] {
            let base = eval_extremal(&f, x, sign, &k).unwrap();
            let s = eval_extremal(&scaled, x, sign, &k).unwrap();
            let tol = 1e-12 * base.abs().max(1.0) * c.max(1.0);
            prop_assert!((s - c * base).abs() <= tol, "homogeneity: {} vs {}", s, c * base);
            let sh = eval_extremal(&shifted, x, sign, &k).unwrap();
            prop_assert!((sh - base).abs() <= 1e-12 * base.abs().max(1.0) * (1.0 + shift.abs()));
        }
    }

    #[test]
    fn monotone_at_touching_points((values, v1, v2) in field_strategy(), bump in 0.0f64..1.0) {
        // g >= f with g(x) = f(x): M[f](x) <= M[g](x)
        let g = grid();
        let k = KernelSpec::new(1, 0.5, 0.5, 2.0).unwrap();
        let touch = g.n_nodes() / 2;
        let f = Field::new(g.clone(), values.clone(), exterior(v1, v2)).unwrap();
        let mut raised = values.clone();
        for (i, r) in raised.iter_mut().enumerate() {
            if i != touch {
                *r += bump;
            }
        }
        let fg = Field::new(g.clone(), raised, exterior(v1 + bump, v2 + bump)).unwrap();
        let x = g.node(touch);
        for sign in [ExtremalSign::Plus, ExtremalSign::Minus] {
            let lo = eval_extremal(&f, x, sign, &k).unwrap();
            let hi = eval_extremal(&fg, x, sign, &k).unwrap();
            prop_assert!(lo <= hi + 1e-11 * lo.abs().max(1.0));
        }
    }

    #[test]
    fn l1s_norm_is_a_norm((values, v1, v2) in field_strategy(), (values2, w1, w2) in field_strategy(), c in -3.0f64..3.0) {
        let g = grid();
        let s = 0.5;
        let f = Field::new(g.clone(), values.clone(), exterior(v1, v2)).unwrap();
        let f2 = Field::new(g.clone(), values2.clone(), exterior(w1, w2)).unwrap();
        let nf = l1s_norm(&f, s);
        let nf2 = l1s_norm(&f2, s);
        prop_assert!(nf >= 0.0);
        // absolute homogeneity
        let scaled = Field::new(
            g.clone(),
            values.iter().map(|v| c * v).collect(),
            exterior(c * v1, c * v2),
        )
        .unwrap();
        let ns = l1s_norm(&scaled, s);
        prop_assert!((ns - c.abs() * nf).abs() <= 1e-10 * nf.max(1.0) * c.abs().max(1.0));
        // triangle inequality
        let sum = Field::new(
            g.clone(),
            values.iter().zip(&values2).map(|(a, b)| a + b).collect(),
            exterior(v1 + w1, v2 + w2),
        )
        .unwrap();
        prop_assert!(l1s_norm(&sum, s) <= nf + nf2 + 1e-10);
    }
}

#[test]
fn l1s_zero_only_for_zero_field() {
    let g = grid();
    let zero = Field::constant(g.clone(), 0.0, ExteriorSpec::zero(&g)).unwrap();
    assert_eq!(l1s_norm(&zero, 0.5), 0.0);
    let mut values = vec![0.0; g.n_nodes()];
    values[3] = 1e-9;
    let tiny = Field::new(g.clone(), values, ExteriorSpec::zero(&g)).unwrap();
    assert!(l1s_norm(&tiny, 0.5) > 0.0);
}
