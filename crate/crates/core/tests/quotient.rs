use instanton_core::concomitants::{concomitants_at, ernst_calibrate};
use instanton_core::identities::{find, run_suite, SuiteOptions, ALPHAS};
use instanton_core::metrics::*;
use instanton_core::quotient::*;

fn bundles(model: &MetricModel, n: usize, seed: u64, offset: f64) -> Vec<QuotientScalars> {
    let cal = ernst_calibrate(model).unwrap().with_twist_offset(offset);
    sample_points(model, n, seed, 0.1)
        .unwrap()
        .into_iter()
        .filter_map(|p| quotient_bundle(&concomitants_at(model, p, 4, &cal).unwrap()).ok())
        .collect()
}

#[test]
fn orbit_metric_annihilates_the_killing_field() {
    for model in catalogue().unwrap().into_iter().filter(|m| m.name != "flat" && m.name != "taub-nut") {
        let qs = bundles(&model, 15, 1, 0.0);
        assert_eq!(qs.len(), 15, "{}", model.name);
        for q in &qs {
            let scale = q.gamma.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(q.gamma_xi < 1e-12 * scale, "{}: {}", model.name, q.gamma_xi);
            assert!(q.a_xi < 1e-12, "{}", model.name);
            assert!((q.theta - (1.0 - q.w[0] * q.w[1])).abs() < 1e-14);
        }
    }
}

#[test]
fn static_metric_has_no_connection_form() {
    let model = MetricModel::schwarzschild(1.0).unwrap();
    for q in bundles(&model, 15, 2, 0.0) {
        assert!(q.a.iter().all(|x| x.abs() < 1e-14));
        assert_eq!(q.w[0], q.w[1]);
        assert!((q.k4[0] - q.k4[1]).abs() < 1e-12 * q.k4[0].abs());
        // w = m/(r − m), k⁴ = |∇w|²/λ = m² / (r − m)⁴ · (1 − 2m/r) / λ
        let r = q.point[1];
        assert!((q.w[0] - 1.0 / (r - 1.0)).abs() < 1e-12);
        assert!((q.k4[0] - (r - 1.0).powi(-4)).abs() < 1e-10 * q.k4[0]);
    }
}

#[test]
fn simon_tensor_is_small_on_type_d_sides() {
    for model in [MetricModel::kerr(1.0, 0.3).unwrap(), MetricModel::taub_bolt(1.0).unwrap()] {
        for q in bundles(&model, 15, 3, 0.0) {
            for p in q.p.iter().flatten() {
                let m = p.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                assert!(m < 1e-9, "{}: {m}", model.name);
            }
        }
    }
}

#[test]
fn correspondence_holds_for_every_alpha() {
    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    for offset in [0.0, 0.3] {
        let opts = SuiteOptions { n_points: 20, seed: 4, twist_offset: offset, ..SuiteOptions::default() };
        let reports = ddkw_correspondence(&model, &ALPHAS, opts).unwrap();
        assert_eq!(reports.len(), ALPHAS.len());
        for r in &reports {
            assert!(r.pass, "offset {offset} {}: {}", r.identity, r.max_rel_residual);
            assert!(r.sides.iter().any(|s| s.n_checked > 0));
        }
    }
    assert!(ddkw_correspondence(&model, &[2.0], SuiteOptions::default()).is_err());
}

#[test]
fn divergence_dictionary_and_twist_conservation() {
    let suite = vec![find("C.dictionary").unwrap(), find("eq:divom").unwrap(), find("eq:Th").unwrap(), find("eq:kpm").unwrap()];
    for model in [MetricModel::kerr(1.0, 0.3).unwrap(), MetricModel::taub_bolt(1.0).unwrap(), MetricModel::schwarzschild(1.0).unwrap()] {
        let opts = SuiteOptions { n_points: 20, seed: 6, ..SuiteOptions::default() };
        for r in run_suite(&model, &suite, opts).unwrap() {
            assert!(r.pass, "{} {}: {}", model.name, r.identity, r.max_rel_residual);
        }
    }
}

#[test]
fn normalization_violation_is_reported() {
    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    let cal = ernst_calibrate(&model).unwrap().with_twist_offset(5.0);
    let c = concomitants_at(&model, [0.0, 5.0, 1.0, 0.0], 4, &cal).unwrap();
    assert!(quotient_bundle(&c).is_err());
}
