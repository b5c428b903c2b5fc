use gbcurv::curvinv::{gauss_bonnet, newton_transform, random_curvature, sigma_k, CurvatureContext};
use gbcurv::dfalg::{random_form, random_symmetric, DoubleForm};
use gbcurv::exec::{pairwise_sum, with_jobs, Exec};
use gbcurv::exprlang::parse;
use gbcurv::models::{product, space_form, sphere, ModelSpec};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric (p,p) form.
fn sym(n: usize, p: usize, r: &mut ChaCha8Rng) -> DoubleForm {
    random_form(n, p, p, r).unwrap().symmetrized().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn n1_is_linear(n in 4usize..=7, p in 1usize..=2, seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let (a, b) = (sym(n, p, &mut r), sym(n, p, &mut r));
        let lhs = newton_transform(&a.axpy(s, &b).unwrap(), 1).unwrap();
        let rhs = newton_transform(&a, 1).unwrap().axpy(s, &newton_transform(&b, 1).unwrap()).unwrap();
        prop_assert!(lhs.max_diff(&rhs).unwrap() <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn n1_is_self_adjoint(n in 4usize..=7, p in 1usize..=2, seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (sym(n, p, &mut r), sym(n, p, &mut r));
        let x = newton_transform(&a, 1).unwrap().inner(&b).unwrap();
        let y = a.inner(&newton_transform(&b, 1).unwrap()).unwrap();
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
    }

    #[test]
    fn sigma_matches_spectrum(n in 2usize..=8, seed in any::<u64>()) {
        let h = random_symmetric(n, &mut rng(seed)).unwrap();
        let eigs = SymmetricEigen::new(h.to_matrix().unwrap()).eigenvalues;
        // e_k by brute force over index subsets.
        for k in 0..=n {
            let mut e = 0.0;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize == k {
                    e += (0..n).filter(|i| mask >> i & 1 == 1).map(|i| eigs[i]).product::<f64>();
                }
            }
            let s = sigma_k(&h, k).unwrap();
            prop_assert!((s - e).abs() <= 1e-9 * e.abs().max(1.0), "k={} {} vs {}", k, s, e);
        }
    }

    #[test]
    fn gauss_bonnet_scales_with_curvature(n in 4usize..=7, seed in any::<u64>(), t in 0.2f64..3.0) {
        let ctx = random_curvature(n, 2, seed).unwrap();
        let scaled = CurvatureContext::new(ctx.riemann().scale(t)).unwrap();
        for k in 0..=n / 2 {
            let a = gauss_bonnet(&scaled, k).unwrap();
            let b = t.powi(k as i32) * gauss_bonnet(&ctx, k).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

#[test]
fn n1_fixes_weyl_tensor() {
    for n in 4..=8 {
        let ctx = random_curvature(n, 3, 40 + n as u64).unwrap();
        let w = ctx.weyl().unwrap();
        assert!(newton_transform(w, 1).unwrap().max_diff(w).unwrap() < 1e-10 * w.max_abs());
    }
}

#[test]
fn model_oracles_agree() {
    let specs = [
        ModelSpec::SpaceForm { n: 5, kappa: -0.7 },
        ModelSpec::Sphere { n: 6, radius: 2.0 },
        ModelSpec::FlatTorus { n: 4, side: 1.0 },
        ModelSpec::Product {
            factors: vec![ModelSpec::Sphere { n: 3, radius: 0.5 }, ModelSpec::SpaceForm { n: 3, kappa: -1.0 }],
        },
    ];
    for s in &specs {
        let m = s.build().unwrap();
        assert!(m.oracle_agreement().unwrap().relative() < 1e-10, "{}", m.name());
        let pts = m.sample_points(5, 3);
        assert!(m.chart_agreement(&pts).unwrap().relative() < 1e-6, "{}", m.name());
    }
}

#[test]
fn product_of_sphere_squares() {
    let s2 = sphere(2, 1.0).unwrap();
    let m = product(&s2, &s2).unwrap();
    assert!((m.oracle().gauss_bonnet[2] - 2.0).abs() < 1e-12);
    assert!(product(&space_form(6, 1.0).unwrap(), &space_form(7, 1.0).unwrap()).is_err());
}

#[test]
fn model_spec_json() {
    let s: ModelSpec = serde_json::from_str(r#"{"model":"space_form","n":4,"kappa":0.5}"#).unwrap();
    assert_eq!(s, ModelSpec::SpaceForm { n: 4, kappa: 0.5 });
    assert!(serde_json::from_str::<ModelSpec>(r#"{"model":"space_form","n":4}"#).is_err());
    assert!(serde_json::from_str::<ModelSpec>(r#"{"model":"cube","n":4}"#).is_err());
}

#[test]
fn expressions_respect_chart_dimension() {
    let e = parse("exp(-x1^2) * cos(x3)").unwrap();
    assert!(e.check_dim(3).is_ok());
    assert!(e.check_dim(2).is_err());
    assert_eq!(parse("-x1^2").unwrap().eval(&[3.0]).unwrap(), -9.0);
}

#[test]
fn exec_policies_agree() {
    let values: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.37).sin() / (1.0 + i as f64)).collect();
    let f = |i: usize| values[i] * values[i];
    let seq = Exec::Sequential.map_range(values.len(), f);
    for jobs in [1, 2, 5] {
        let par = with_jobs(jobs, || Exec::Parallel.map_range(values.len(), f));
        assert_eq!(seq, par);
        assert_eq!(pairwise_sum(&seq).to_bits(), pairwise_sum(&par).to_bits());
    }
}
