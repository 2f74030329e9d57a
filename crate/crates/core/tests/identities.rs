use instanton_core::identities::*;
use instanton_core::metrics::*;

const EXPECTED_IDS: &[&str] = &[
    "eq:F2munu",
    "eq:Fsigma",
    "eq:sigmasq",
    "eq:Ecal-lam-om",
    "eq:lamF",
    "eq:FcalFcal1contr",
    "eq:epseps1",
    "eq:epseps2",
    "eq:nablaFcal",
    "eq:nablaFsq",
    "eq:dsigmapm",
    "eq:divsigma",
    "eq:laplaceFsq",
    "eq:DeltaEcal",
    "eq:currents:T",
    "eq:currents:D",
    "eq:currents:E",
    "eq:Jcurrdef",
    "eq:nabla+Gamma",
    "eq:nablaMSscalar",
    "eq:MSid",
    "eq:LaplaceMSscalarprel",
    "eq:LaplaceMSscalar:1/2",
    "eq:LaplaceMSscalar:1",
    "eq:LaplaceMSscalar:2",
    "eq:LaplaceMSscalar:3",
    "prop:Vpos:1/2",
    "prop:Vpos:1",
    "prop:Vpos:2",
    "eq:Psquares",
    "eq:DivPsialpha:1/2",
    "eq:DivPsialpha:1",
    "eq:DivPsialpha:2",
    "eq:DivPsialpha:3",
    "lem:DivPsi1-positivity",
    "eq:divom",
    "C.dictionary",
    "eq:Th",
    "eq:kpm",
    "C.eq:ddkw:0",
    "C.eq:ddkw:1",
    "C.eq:ddkw:3",
];

fn opts(n: usize, seed: u64) -> SuiteOptions {
    SuiteOptions { n_points: n, seed, ..SuiteOptions::default() }
}

fn failures(reports: &[VerificationReport]) -> Vec<(String, f64)> {
    reports.iter().filter(|r| !r.pass).map(|r| (r.identity.clone(), r.max_rel_residual)).collect()
}

#[test]
fn registry_is_complete_and_stable() {
    let ids: Vec<String> = registry().into_iter().map(|s| s.id).collect();
    assert_eq!(ids, EXPECTED_IDS);
    for id in EXPECTED_IDS {
        assert_eq!(find(id).unwrap().id, *id);
    }
    assert!(find("eq:nonexistent").is_none());
    let core: Vec<String> = core_suite().into_iter().map(|s| s.id).collect();
    assert!(core.contains(&"eq:DivPsialpha:3".to_string()));
    assert!(!core.iter().any(|id| id.starts_with("C.")));
}

#[test]
fn full_registry_holds_on_every_curved_metric() {
    for model in catalogue().unwrap().into_iter().filter(|m| m.name != "flat") {
        let reports = run_suite(&model, &registry(), opts(25, 3)).unwrap();
        assert_eq!(reports.len(), EXPECTED_IDS.len());
        assert!(failures(&reports).is_empty(), "{}: {:?}", model.name, failures(&reports));
        for r in &reports {
            assert!(r.max_rel_residual < 1e-8 || r.max_abs_residual < 1e-10, "{} {}", model.name, r.identity);
        }
    }
}

#[test]
fn shifted_twist_exercises_mars_simon_identities() {
    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    let o = SuiteOptions { twist_offset: 0.3, ..opts(25, 4) };
    let reports = run_suite(&model, &registry(), o).unwrap();
    assert!(failures(&reports).is_empty(), "{:?}", failures(&reports));
    let msid = reports.iter().find(|r| r.identity == "eq:MSid").unwrap();
    assert!(msid.sides.iter().all(|s| s.n_checked > 0));
    assert!(msid.scale > 1e-8, "scale {}", msid.scale);
}

#[test]
fn metric_perturbation_breaks_field_equation_identities() {
    let model = MetricModel::kerr(1.0, 0.3).unwrap().perturbed(1e-3);
    let reports = run_suite(&model, &registry(), opts(20, 5)).unwrap();
    let get = |id: &str| reports.iter().find(|r| r.identity == id).unwrap();
    for id in ["eq:nablaFcal", "eq:DeltaEcal", "eq:laplaceFsq", "eq:MSid", "eq:DivPsialpha:1"] {
        assert!(!get(id).pass, "{id} survived the perturbation");
    }
    // these hold for any Killing field
    for id in ["eq:currents:T", "eq:divom", "C.dictionary", "eq:F2munu"] {
        assert!(get(id).pass, "{id} should not depend on the field equations");
    }
}

#[test]
fn flat_space_passes_or_skips() {
    let model = MetricModel::flat(2.0 * std::f64::consts::PI).unwrap();
    let reports = run_suite(&model, &registry(), opts(20, 1)).unwrap();
    for r in &reports {
        assert!(r.pass, "{}", r.identity);
    }
    let ms = reports.iter().find(|r| r.identity == "eq:MSid").unwrap();
    assert!(ms.sides.iter().all(|s| s.n_checked == 0 && s.skipped.is_some()));
}

#[test]
fn half_flat_side_is_skipped_not_failed() {
    let model = MetricModel::taub_nut(1.0).unwrap();
    let reports = run_suite(&model, &[find("eq:DivPsialpha:1").unwrap()], opts(20, 2)).unwrap();
    let r = &reports[0];
    assert!(r.pass);
    assert_eq!(r.sides[1].n_checked, 0);
    assert!(r.sides[1].skipped.is_some());
}

#[test]
fn suite_is_deterministic_in_the_seed() {
    let model = MetricModel::taub_bolt(1.0).unwrap();
    let suite = core_suite();
    let a = serde_json::to_string(&run_suite(&model, &suite, opts(15, 9)).unwrap()).unwrap();
    let b = serde_json::to_string(&run_suite(&model, &suite, opts(15, 9)).unwrap()).unwrap();
    let c = serde_json::to_string(&run_suite(&model, &suite, opts(15, 10)).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn zero_points_is_a_config_error() {
    let model = MetricModel::schwarzschild(1.0).unwrap();
    assert!(run_suite(&model, &core_suite(), opts(0, 1)).is_err());
}

#[test]
fn epsilon_contractions_hold_everywhere() {
    for model in catalogue().unwrap() {
        for p in sample_points(&model, 10, 8, 0.1).unwrap() {
            let b = model.curvature(p, 3).unwrap();
            for (id, abs, scale) in epsilon_identity_suite(&b) {
                assert!(abs <= 1e-10 * scale.max(1.0), "{} {id}: {abs} / {scale}", model.name);
            }
        }
    }
}

#[test]
fn markdown_table_lists_every_report() {
    let model = MetricModel::schwarzschild(1.0).unwrap();
    let reports = run_suite(&model, &core_suite()[..3], opts(5, 1)).unwrap();
    let md = markdown_table(&reports);
    assert_eq!(md.lines().count(), 2 + reports.len());
    assert!(md.contains("eq:F2munu"));
}
