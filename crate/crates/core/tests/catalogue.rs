use std::collections::BTreeMap;
use std::f64::consts::PI;

use instanton_core::concomitants::ernst_calibrate;
use instanton_core::flux::fixed_point_limits;
use instanton_core::metrics::*;
use instanton_core::{Error, Side};

#[test]
fn every_catalogued_metric_passes_its_gate() {
    for model in catalogue().unwrap() {
        let gate = validate(&model, 100, 7).unwrap();
        assert!(gate.max_ricci < 1e-9, "{} Ricci {}", model.name, gate.max_ricci);
        assert!(gate.max_killing < 1e-9, "{} Killing {}", model.name, gate.max_killing);
        let lams: Vec<f64> = gate.radial_lambda.iter().map(|&(_, l)| l).collect();
        assert!(lams.iter().all(|&l| l <= 1.0 + 1e-12), "{}", model.name);
        if model.name != "flat" {
            assert!(lams.windows(2).all(|w| w[1] > w[0]), "{} λ not increasing: {lams:?}", model.name);
            assert!(1.0 - lams.last().unwrap() < 1e-3);
        }
    }
}

#[test]
fn non_default_parameters_pass_the_gate() {
    for model in [
        MetricModel::schwarzschild(2.5).unwrap(),
        MetricModel::kerr(1.0, 0.7).unwrap(),
        MetricModel::kerr(2.0, 0.5).unwrap(),
        MetricModel::taub_nut(0.5).unwrap(),
        MetricModel::taub_bolt(2.0).unwrap(),
    ] {
        let gate = validate(&model, 30, 1).unwrap();
        assert!(gate.max_ricci < 1e-9 && gate.max_killing < 1e-9, "{}", model.name);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(MetricModel::kerr(1.0, 1.0).is_err());
    assert!(MetricModel::schwarzschild(-1.0).is_err());
    assert!(MetricModel::taub_nut(0.0).is_err());
    let mut p = BTreeMap::new();
    p.insert("a".to_string(), 0.2);
    assert!(matches!(MetricModel::from_name("schwarzschild", &p), Err(Error::Config(_))));
}

#[test]
fn sample_points_respect_lambda_floor() {
    for model in catalogue().unwrap() {
        for lam_min in [0.1, 0.5] {
            for p in sample_points(&model, 50, 3, lam_min).unwrap() {
                assert!(model.lambda(p) >= lam_min);
            }
        }
    }
    let m = MetricModel::schwarzschild(1.0).unwrap();
    assert!(sample_points(&m, 5, 1, 0.0).is_err());
    assert!(sample_points(&m, 5, 1, 1.0).is_err());
}

#[test]
fn schwarzschild_sample_matches_golden() {
    let m = MetricModel::schwarzschild(1.0).unwrap();
    let pts = sample_points(&m, 12, 7, 0.1).unwrap();
    let path = format!("{}/tests/golden/schwarzschild_points_seed7.json", env!("CARGO_MANIFEST_DIR"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&pts).unwrap() + "\n").unwrap();
    }
    let want: Vec<[f64; 4]> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(pts, want);
    assert_eq!(sample_points(&m, 12, 7, 0.1).unwrap(), pts);
    assert_ne!(sample_points(&m, 12, 8, 0.1).unwrap(), pts);
}

fn bolt_of(model: &MetricModel) -> FixedPointLocus {
    model.metadata.fixed_points[0].clone()
}

#[test]
fn schwarzschild_bolt_gravity() {
    // λ = 1 − 2m/r gives κ² = lim |∇λ|²/(4λ) = (2m/r²)²(1 − 2m/r)/(4(1 − 2m/r)) at r = 2m
    for m in [0.5, 1.0, 3.0] {
        let model = MetricModel::schwarzschild(m).unwrap();
        let SurfaceGravity::Bolt { kappa, nu_limit } = surface_gravities(&model, &bolt_of(&model)).unwrap() else {
            panic!("expected a bolt")
        };
        let want = 1.0 / (4.0 * m);
        assert!(((kappa - want) / want).abs() < 1e-7, "m={m}: {kappa}");
        assert!(nu_limit.abs() < 1e-8 * kappa * kappa);
    }
}

#[test]
fn taub_bolt_gravity() {
    let model = MetricModel::taub_bolt(1.0).unwrap();
    let SurfaceGravity::Bolt { kappa, nu_limit } = surface_gravities(&model, &bolt_of(&model)).unwrap() else {
        panic!("expected a bolt")
    };
    // V'(2n)/2 with V = (r − 2n)(r − n/2)/(r² − n²)
    let n = 1.0;
    let want = 0.5 * (2.0 * n - 0.5 * n) / (4.0 * n * n - n * n);
    assert!(((kappa - want) / want).abs() < 1e-7);
    assert!(nu_limit.abs() < 1e-8 * kappa * kappa);
}

#[test]
fn taub_nut_nut_is_self_dual() {
    let model = MetricModel::taub_nut(1.0).unwrap();
    let SurfaceGravity::Nut { kappa } = surface_gravities(&model, &bolt_of(&model)).unwrap() else {
        panic!("expected a nut")
    };
    assert!((kappa[0].abs() - kappa[1].abs()).abs() < 1e-7 * kappa[0].abs());
    assert!((kappa[0] - 0.25).abs() < 1e-7);
}

#[test]
fn kerr_nut_gravities() {
    let (m, a) = (1.0f64, 0.3f64);
    let model = MetricModel::kerr(m, a).unwrap();
    // Euclidean section: Δ = r² − 2mr − a², so r₊ = m + √(m² + a²)
    let rp = m + (m * m + a * a).sqrt();
    let kappa = (rp - m) / (2.0 * m * rp);
    let omega = a / (2.0 * m * rp);
    for locus in &model.metadata.fixed_points {
        let SurfaceGravity::Nut { kappa: k } = surface_gravities(&model, locus).unwrap() else { panic!() };
        assert!((k[0].abs() - kappa).abs() < 1e-7 * kappa, "{k:?}");
        assert!((k[1].abs() - omega).abs() < 1e-7 * kappa, "{k:?}");
    }
}

#[test]
fn flat_space_has_nothing_to_extract() {
    let model = MetricModel::flat(2.0 * PI).unwrap();
    assert!(model.metadata.fixed_points.is_empty());
    let fake = FixedPointLocus::Nut { label: "origin".into(), r: 0.0, theta: 0.0, kappa: [1.0, 1.0] };
    assert!(matches!(surface_gravities(&model, &fake), Err(Error::ContractViolation(_))));
}

#[test]
fn nut_gravities_reproduce_field_strength_limits() {
    for model in [MetricModel::kerr(1.0, 0.3).unwrap(), MetricModel::taub_nut(1.0).unwrap()] {
        let cal = ernst_calibrate(&model).unwrap();
        for locus in &model.metadata.fixed_points {
            let levels = instanton_core::flux::default_levels(&model, locus);
            let fine: Vec<f64> = (0..4).map(|k| levels[2] * 0.5f64.powi(k)).collect();
            for side in Side::BOTH {
                if model.metadata.petrov[side.index()] == PetrovType::HalfFlat {
                    continue;
                }
                let (lim, _) = fixed_point_limits(&model, locus, side, &fine, &cal).unwrap();
                let (est, _) = neville_at_zero(&lim.levels, &lim.values);
                let scale = lim.values[0].max(lim.target).max(1e-3);
                assert!((est - lim.target).abs() < 1e-5 * scale, "{} {} {:?}: {est} vs {}", model.name, locus.label(), side, lim.target);
            }
        }
    }
}

#[test]
fn key_value_files() {
    let kv = parse_key_values("# comment\nmetric = kerr\n\nseed=3\n").unwrap();
    assert_eq!(kv, vec![("metric".into(), "kerr".into()), ("seed".into(), "3".into())]);
    assert!(parse_key_values("no equals sign").is_err());
}
