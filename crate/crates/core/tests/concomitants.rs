use std::f64::consts::PI;

use instanton_core::concomitants::*;
use instanton_core::identities::asymptotic_decay_suite;
use instanton_core::jet::DIM;
use instanton_core::metrics::*;
use instanton_core::Side;

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * y.abs().max(1.0)
}

/// Closed-form `[E⁺, E⁻]` at `(r, θ)`, written independently of the chart code.
fn ernst_oracle(kind: MetricKind, r: f64, theta: f64) -> [f64; 2] {
    match kind {
        MetricKind::Flat { .. } => [1.0, 1.0],
        MetricKind::Schwarzschild { m } => [1.0 - 2.0 * m / r; 2],
        MetricKind::Kerr { m, a } => {
            let c = a * theta.cos();
            [1.0 - 2.0 * m / (r - c), 1.0 - 2.0 * m / (r + c)]
        }
        MetricKind::TaubNut { n } => [(r - 3.0 * n) / (r + n), 1.0],
        MetricKind::TaubBolt { n } => [(r - 3.5 * n) / (r + n), (r - 1.5 * n) / (r - n)],
    }
}

fn curved() -> Vec<MetricModel> {
    catalogue().unwrap().into_iter().filter(|m| m.name != "flat").collect()
}

#[test]
fn ernst_potentials_match_closed_forms() {
    for model in curved() {
        let cal = ernst_calibrate(&model).unwrap();
        for p in sample_points(&model, 12, 5, 0.1).unwrap() {
            let c = concomitants_at(&model, p, 3, &cal).unwrap();
            let want = ernst_oracle(model.kind, p[1], p[2]);
            for side in Side::BOTH {
                let got = c.side(side).ernst.value();
                assert!(close(got, want[side.index()], 1e-8), "{} {:?} at {p:?}: {got} vs {}", model.name, side, want[side.index()]);
            }
            let lam = 0.5 * (want[0] + want[1]);
            assert!(close(c.lambda.value(), lam, 1e-10), "{} λ", model.name);
        }
    }
}

#[test]
fn asymptotic_ernst_coefficients() {
    let cases: [(MetricModel, [f64; 2]); 5] = [
        (MetricModel::schwarzschild(1.0).unwrap(), [-2.0, -2.0]),
        (MetricModel::schwarzschild(2.5).unwrap(), [-5.0, -5.0]),
        (MetricModel::kerr(1.0, 0.3).unwrap(), [-2.0, -2.0]),
        (MetricModel::taub_nut(1.0).unwrap(), [-4.0, 0.0]),
        (MetricModel::taub_bolt(1.0).unwrap(), [-4.5, -0.5]),
    ];
    for (model, want) in cases {
        let cal = ernst_calibrate(&model).unwrap();
        for k in 0..2 {
            assert!((cal.b[k] - want[k]).abs() < 1e-7 * model.scale, "{}: b = {:?}", model.name, cal.b);
        }
    }
}

#[test]
fn schwarzschild_is_static() {
    let model = MetricModel::schwarzschild(1.0).unwrap();
    let cal = ernst_calibrate(&model).unwrap();
    for p in sample_points(&model, 20, 11, 0.05).unwrap() {
        let c = concomitants_at(&model, p, 3, &cal).unwrap();
        assert!(c.twist.value().abs() < 1e-12);
        assert!(c.twist_form.iter().all(|w| w.value().abs() < 1e-12));
        assert!(c.nu.value().abs() < 1e-12);
        for side in Side::BOTH {
            assert!(close(c.side(side).ernst.value(), c.lambda.value(), 1e-12));
        }
        // 1 − λ = 2m/r
        assert!(close(1.0 - c.lambda.value(), 2.0 / p[1], 1e-12));
    }
}

#[test]
fn self_dual_squares_differ_by_eight_nu() {
    for model in curved() {
        let cal = ernst_calibrate(&model).unwrap();
        for p in sample_points(&model, 10, 2, 0.1).unwrap() {
            let c = concomitants_at(&model, p, 3, &cal).unwrap();
            let (fp, fm) = (c.sides[0].f2.value(), c.sides[1].f2.value());
            let (mu, nu) = (c.mu.value(), c.nu.value());
            let scale = fp.abs() + fm.abs() + 1e-300;
            assert!((fp - fm - 8.0 * nu).abs() < 1e-9 * scale, "{}", model.name);
            assert!((fp + fm - 8.0 * mu).abs() < 1e-9 * scale, "{}", model.name);
        }
    }
}

#[test]
fn ernst_gradient_is_sigma() {
    for model in curved() {
        let cal = ernst_calibrate(&model).unwrap();
        for p in sample_points(&model, 6, 9, 0.1).unwrap() {
            let c = concomitants_at(&model, p, 4, &cal).unwrap();
            for side in Side::BOTH {
                let sf = c.side(side);
                for a in 0..DIM {
                    let d = sf.ernst.gradient_value(a);
                    let s = sf.sigma[a].value();
                    assert!((d - s).abs() < 1e-9 * (s.abs() + 1e-3), "{} {:?} a={a}: {d} vs {s}", model.name, side);
                }
            }
        }
    }
}

#[test]
fn flat_space_has_no_field_strength() {
    let model = MetricModel::flat(2.0 * PI).unwrap();
    let cal = ernst_calibrate(&model).unwrap();
    assert_eq!(cal.b, [0.0, 0.0]);
    for p in sample_points(&model, 10, 4, 0.5).unwrap() {
        let c = concomitants_at(&model, p, 3, &cal).unwrap();
        assert!(c.f.comps.iter().all(|x| x.value().abs() < 1e-14));
        for side in Side::BOTH {
            assert!((c.side(side).ernst.value() - 1.0).abs() < 1e-14);
            assert!(c.side(side).mars_simon.is_none());
        }
    }
}

#[test]
fn quotient_theta_values() {
    let model = MetricModel::schwarzschild(1.0).unwrap();
    let cal = ernst_calibrate(&model).unwrap();
    let c = concomitants_at(&model, [0.0, 4.0, 1.0, 0.0], 3, &cal).unwrap();
    let q = quotient_scalars(&c).unwrap();
    assert!((q.theta.value() - 8.0 / 9.0).abs() < 1e-12);

    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    let cal = ernst_calibrate(&model).unwrap();
    for p in sample_points(&model, 10, 3, 0.1).unwrap() {
        let c = concomitants_at(&model, p, 3, &cal).unwrap();
        let q = quotient_scalars(&c).unwrap();
        let [ep, em] = ernst_oracle(model.kind, p[1], p[2]);
        let want = 2.0 * (ep + em) / ((1.0 + ep) * (1.0 + em));
        assert!((q.theta.value() - want).abs() < 1e-8);
    }
}

#[test]
fn twist_potential_is_path_independent() {
    for model in [MetricModel::kerr(1.0, 0.3).unwrap(), MetricModel::taub_nut(1.0).unwrap(), MetricModel::taub_bolt(1.0).unwrap()] {
        let cal = ernst_calibrate(&model).unwrap();
        for p in sample_points(&model, 6, 21, 0.1).unwrap() {
            let w1 = twist_potential(&model, &cal, p[1], p[2]).unwrap();
            let w2 = twist_potential_alt(&model, &cal, p[1], p[2]).unwrap();
            assert!((w1 - w2).abs() < 1e-9 * model.scale, "{} at {p:?}: {w1} vs {w2}", model.name);
        }
    }
}

#[test]
fn twist_offset_shifts_ernst_only() {
    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    let cal = ernst_calibrate(&model).unwrap();
    let shifted = cal.clone().with_twist_offset(0.25);
    let p = [0.0, 5.0, 1.1, 0.0];
    let c0 = concomitants_at(&model, p, 3, &cal).unwrap();
    let c1 = concomitants_at(&model, p, 3, &shifted).unwrap();
    assert!((c1.sides[0].ernst.value() - c0.sides[0].ernst.value() - 0.25).abs() < 1e-14);
    assert!((c1.sides[1].ernst.value() - c0.sides[1].ernst.value() + 0.25).abs() < 1e-14);
    for a in 0..DIM {
        assert_eq!(c0.sides[0].sigma[a].value(), c1.sides[0].sigma[a].value());
    }
}

#[test]
fn petrov_types_match_declarations() {
    for model in curved() {
        let reports = petrov_survey(&model, 40, 13).unwrap();
        for (rep, declared) in reports.iter().zip(model.metadata.petrov) {
            assert!(rep.verdict.matches(declared), "{} {:?}: {:?}", model.name, rep.side, rep);
            if declared == PetrovType::TypeD {
                assert!(rep.max_s_over_w < 1e-7, "{} {:?}", model.name, rep);
                assert!(rep.s2_spread < 1e-6, "{} {:?}", model.name, rep);
            }
        }
    }
}

#[test]
fn decay_rates() {
    for model in curved() {
        let rep = asymptotic_decay_suite(&model).unwrap();
        assert!(rep.pass, "{}: {:?}", model.name, rep.fits.iter().map(|f| (&f.quantity, f.exponent)).collect::<Vec<_>>());
        for (k, b2) in rep.b_squared.iter().enumerate() {
            if *b2 > 0.0 {
                assert!(((rep.r4_f2_limit[k] - b2) / b2).abs() < 0.01);
            }
        }
    }
    let s = asymptotic_decay_suite(&MetricModel::schwarzschild(1.0).unwrap()).unwrap();
    let omega = s.fits.iter().find(|f| f.quantity == "omega").unwrap();
    assert!(omega.exponent.is_none());
    let k = asymptotic_decay_suite(&MetricModel::kerr(1.0, 0.3).unwrap()).unwrap();
    let omega = k.fits.iter().find(|f| f.quantity == "omega").unwrap();
    assert_eq!(omega.target, -2.0);
    let t = asymptotic_decay_suite(&MetricModel::taub_nut(1.0).unwrap()).unwrap();
    let omega = t.fits.iter().find(|f| f.quantity == "omega").unwrap();
    assert_eq!(omega.target, -1.0);
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let rule = gauss_legendre(8);
    let v = composite_gl(&mut |x| Ok(x.powi(7) + x * x), 0.0, 2.0, 3, &rule).unwrap();
    assert!((v - (256.0 / 8.0 + 8.0 / 3.0)).abs() < 1e-12);
    let v = integrate_adaptive(&mut |x| Ok(x.sin()), 0.0, PI, 1e-14).unwrap();
    assert!((v - 2.0).abs() < 1e-13);
}
