//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use instanton_core::combinatorics::config::sgn;
use instanton_core::combinatorics::enumerate::{nut_types, EnumerationBounds};
use instanton_core::combinatorics::signature::rhs_at_zero;
use instanton_core::combinatorics::*;
use instanton_core::concomitants::petrov_survey;
use instanton_core::flux::{charges, global_balance};
use instanton_core::identities::*;
use instanton_core::metrics::*;
use instanton_core::Side;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IDENTITY_POINTS: usize = 100;
const IDENTITY_SEED: u64 = 7;
const IDENTITY_REL_TOL: f64 = 1e-8;
const ABS_FLOOR_SHOWN: f64 = instanton_core::tolerances::ABS_FLOOR;
const IDENTITY_BUDGET: Duration = Duration::from_secs(120);
const MUTATION_DELTA: f64 = 1e-3;
const MUTATION_FRACTION: f64 = 0.9;
const POSITIVITY_SLACK: f64 = 1e-10;
const PSQUARES_TOL: f64 = 1e-8;
const PETROV_POINTS: usize = 24;
const S2_SPREAD_TOL: f64 = 1e-6;
const S_OVER_W_TOL: f64 = 1e-7;
const NUT_CHARGE_REL_TOL: f64 = 1e-4;
const BOLT_CHARGE_ABS_TOL: f64 = 1e-6;
const BALANCE_REL_TOL: f64 = 1e-5;
const SCHWARZSCHILD_LEDGER_TOL: f64 = 1e-6;
const RANDOM_CONFIGS: usize = 1000;
const CASE_BUDGET: Duration = Duration::from_secs(300);
const DECAY_EXPONENT_TOL: f64 = 0.1;
const DECAY_LIMIT_REL_TOL: f64 = 0.01;
/// Twist shift at which the Mars–Simon tensors of type-D sides are nonzero.
const SHIFTED_TWIST: f64 = 0.3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn curved() -> Vec<MetricModel> {
    catalogue().unwrap().into_iter().filter(|m| m.name != "flat").collect()
}

fn opts(offset: f64) -> SuiteOptions {
    SuiteOptions { n_points: IDENTITY_POINTS, seed: IDENTITY_SEED, twist_offset: offset, rel_tol: IDENTITY_REL_TOL, ..SuiteOptions::default() }
}

fn identity_suite() -> Verdict {
    let start = Instant::now();
    let suite = core_suite();
    let mut worst = (0.0f64, String::new());
    let mut half_flat_abs = 0.0f64;
    let mut failed = Vec::new();
    for model in curved() {
        for offset in [0.0, SHIFTED_TWIST] {
            for r in run_suite(&model, &suite, opts(offset)).unwrap() {
                if !r.pass {
                    failed.push(format!("{}/{}@{offset}", model.name, r.identity));
                }
                for (sr, declared) in r.sides.iter().zip(model.metadata.petrov) {
                    if declared == PetrovType::HalfFlat {
                        half_flat_abs = half_flat_abs.max(sr.max_abs_residual);
                    } else if sr.max_rel_above_floor > worst.0 {
                        worst = (sr.max_rel_above_floor, format!("{}/{}", model.name, r.identity));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} identities × 4 metrics × 2 twist offsets at {IDENTITY_POINTS} points; worst rel above the {ABS_FLOOR_SHOWN:.0e} floor {:.2e} ({}); half-flat side max abs {:.1e}; {:.1}s; failures {:?}",
        suite.len(),
        worst.0,
        worst.1,
        half_flat_abs,
        elapsed.as_secs_f64(),
        failed
    );
    verdict(failed.is_empty() && elapsed < IDENTITY_BUDGET, detail)
}

fn mutation() -> Verdict {
    let model = MetricModel::kerr(1.0, 0.3).unwrap().perturbed(MUTATION_DELTA);
    let suite: Vec<IdentitySpec> = registry().into_iter().filter(|s| s.differential).collect();
    let reports = run_suite(&model, &suite, SuiteOptions { n_points: 20, ..opts(0.0) }).unwrap();
    let survivors: Vec<&str> = reports.iter().filter(|r| r.pass).map(|r| r.identity.as_str()).collect();
    let failing = reports.len() - survivors.len();
    let frac = failing as f64 / reports.len() as f64;
    verdict(
        frac >= MUTATION_FRACTION,
        format!("{failing}/{} differential identities fail on perturbed kerr ({:.0}%, need {:.0}%); unaffected: {survivors:?}", reports.len(), 100.0 * frac, 100.0 * MUTATION_FRACTION),
    )
}

fn positivity() -> Verdict {
    let mut suite: Vec<IdentitySpec> = registry().into_iter().filter(|s| s.id.starts_with("prop:Vpos")).collect();
    suite.push(find("eq:Psquares").unwrap());
    let mut failed = Vec::new();
    let mut checked = 0;
    for model in curved() {
        for offset in [0.0, SHIFTED_TWIST] {
            let o = SuiteOptions { abs_floor: POSITIVITY_SLACK * model.scale, rel_tol: PSQUARES_TOL, ..opts(offset) };
            for r in run_suite(&model, &suite, o).unwrap() {
                checked += r.sides.iter().map(|s| s.n_checked).sum::<usize>();
                if !r.pass {
                    failed.push(format!("{}/{}@{offset}: {:.2e}", model.name, r.identity, r.max_rel_residual));
                }
            }
        }
    }
    verdict(failed.is_empty() && checked > 0, format!("{checked} side-point checks; failures {failed:?}"))
}

fn petrov() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for model in curved() {
        let reps = petrov_survey(&model, PETROV_POINTS, 7).unwrap();
        let verdicts = [reps[0].verdict, reps[1].verdict];
        let good = match model.name.as_str() {
            "taub-nut" => {
                let half = verdicts.iter().filter(|v| **v == instanton_core::concomitants::PetrovVerdict::HalfFlat).count();
                half == 1 && reps.iter().zip(model.metadata.petrov).all(|(r, d)| r.verdict.matches(d))
            }
            _ => reps.iter().all(|r| {
                r.verdict == instanton_core::concomitants::PetrovVerdict::TypeD
                    && r.s2_spread < S2_SPREAD_TOL
                    && r.max_s_over_w < S_OVER_W_TOL
            }),
        };
        ok &= good;
        parts.push(format!("{} {:?}/{:?}", model.name, verdicts[0], verdicts[1]));
    }
    verdict(ok, parts.join(", "))
}

fn fixed_point_charges() -> Verdict {
    let tn = charges(&MetricModel::taub_nut(1.0).unwrap()).unwrap();
    let SurfaceGravity::Nut { kappa } = tn[0].gravity else { return verdict(false, "taub-nut nut not found") };
    let target = PI / (2.0 * kappa[0] * kappa[1]);
    let rel = ((tn[0].charge.estimate - target) / target).abs();
    let sz = charges(&MetricModel::schwarzschild(1.0).unwrap()).unwrap();
    let bolt = sz[0].charge.estimate.abs();
    verdict(
        rel < NUT_CHARGE_REL_TOL && bolt < BOLT_CHARGE_ABS_TOL,
        format!("taub-nut N = {:.10} vs π/(2κ¹κ²) = {target:.10} (rel {rel:.1e}); schwarzschild bolt |N| = {bolt:.1e}", tn[0].charge.estimate),
    )
}

fn balance() -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for model in [MetricModel::schwarzschild(1.0).unwrap(), MetricModel::kerr(1.0, 0.3).unwrap(), MetricModel::taub_bolt(1.0).unwrap()] {
        for side in Side::BOTH {
            let l = global_balance(&model, side).unwrap();
            ok &= l.imbalance < BALANCE_REL_TOL && l.pass == Some(true);
            worst = worst.max(l.imbalance);
        }
    }
    let m = 1.0;
    let model = MetricModel::schwarzschild(m).unwrap();
    let SurfaceGravity::Bolt { kappa, .. } = surface_gravities(&model, &model.metadata.fixed_points[0]).unwrap() else {
        return verdict(false, "schwarzschild bolt not found");
    };
    // −2π ℓ∞ χ + 4π² χ[B]/κ with ℓ∞ = 2π/κ, χ = χ[B] = 2
    let inf = -2.0 * PI * (2.0 * PI / kappa) * 2.0;
    let bolt = 4.0 * PI * PI * 2.0 / kappa;
    let want = 32.0 * PI * PI * m;
    let cross = ((inf + want) / want).abs().max(((bolt - want) / want).abs()).max(((inf + bolt) / want).abs());
    ok &= cross < SCHWARZSCHILD_LEDGER_TOL;
    verdict(ok, format!("worst imbalance {worst:.1e} over 3 metrics × 2 sides; schwarzschild κ = {kappa:.12}, −32π²m + 32π²m residual {cross:.1e}"))
}

fn golden(name: &str) -> BTreeSet<String> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).map(|l| l.trim().to_string()).collect()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Right-hand side of the signature formula, term by term at `g`.
fn rhs_direct(config: &FixedPointConfig, g: &BigRational) -> BigRational {
    let one = BigRational::one();
    let pow = |k: u32| (0..k).fold(BigRational::one(), |acc, _| acc * g);
    let mut total = BigRational::from_integer(BigInt::from(sgn(config.e)));
    for n in &config.nuts {
        let (ga, gb) = (pow(n.w1), pow(n.w2));
        total += (&ga + &one) * (&gb + &one) / ((&ga - &one) * (&gb - &one)) * BigRational::from_integer(BigInt::from(n.epsilon));
    }
    let gm1 = g - &one;
    total + q(4 * config.bolt_defect(), 1) * g / (&gm1 * &gm1)
}

fn combinatorics_golden() -> Verdict {
    let family = |chi, sign| -> BTreeSet<String> {
        enumerate_configs(&EnumerationBounds::nuts_only(chi, sign, 0, 6, 6)).unwrap().configs.iter().map(|c| c.to_string()).collect()
    };
    let two = family(2, 0) == golden("two_nut_family_w6.txt");
    let three = family(3, 1) == golden("three_nut_family_w6.txt");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let types = nut_types(7);
    let mut disagreements = 0;
    let mut holding = 0;
    for _ in 0..RANDOM_CONFIGS {
        let n = rng.gen_range(1..=4);
        let mut list: Vec<NutData> = (0..n).map(|_| types[rng.gen_range(0..types.len())]).collect();
        let paired = rng.gen_bool(0.25);
        if paired {
            // opposite pairs cancel, so these satisfy the identity
            list = list.iter().flat_map(|t| [*t, NutData::new(-t.epsilon, t.w1, t.w2).unwrap()]).collect();
        }
        let bolts = if !paired && rng.gen_bool(0.3) { vec![BoltData::new(2 * rng.gen_range(-1..=1), rng.gen_range(-3..=3)).unwrap()] } else { vec![] };
        let e = if paired { 0 } else { rng.gen_range(-2..=2) };
        let config = FixedPointConfig::new(list, bolts, e);
        let sign = rhs_at_zero(&config);
        let cert = check_signature_identity(&config, sign.clone().try_into().unwrap());
        let target = BigRational::from_integer(sign);
        let all = (0..5).all(|_| {
            let g = loop {
                let g = q(rng.gen_range(2..60), rng.gen_range(1..60));
                if !g.is_one() {
                    break g;
                }
            };
            rhs_direct(&config, &g) == target
        });
        disagreements += (all != cert.holds) as usize;
        holding += cert.holds as usize;
    }
    verdict(
        two && three && disagreements == 0 && holding > 100,
        format!("two-nut family {two}, three-nut family {three}; {RANDOM_CONFIGS} random configs, {holding} identities hold, {disagreements} disagreements"),
    )
}

fn case_analyses() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [Topology::Kerr, Topology::TaubBolt, Topology::ChenTeo] {
        let r = case_analysis(t, 12, 6, BoltBounds::default()).unwrap();
        ok &= r.pass && r.counterexamples.is_empty();
        parts.push(format!("{t:?}: {} admissible, {} counterexamples", r.admissible, r.counterexamples.len()));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < CASE_BUDGET;
    verdict(ok, format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64()))
}

fn asymptotics() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for model in curved() {
        let rep = asymptotic_decay_suite(&model).unwrap();
        for f in &rep.fits {
            if let Some(e) = f.exponent {
                ok &= (e - f.target).abs() <= DECAY_EXPONENT_TOL;
            }
        }
        for k in 0..2 {
            let b2 = rep.b_squared[k];
            ok &= if b2 == 0.0 { rep.r4_f2_limit[k].abs() < 1e-6 } else { ((rep.r4_f2_limit[k] - b2) / b2).abs() < DECAY_LIMIT_REL_TOL };
        }
        let om = rep.fits.iter().find(|f| f.quantity == "omega").unwrap();
        parts.push(format!("{} ω {}", model.name, om.exponent.map_or("≡ 0".to_string(), |e| format!("{e:.3} (target {})", om.target))));
    }
    verdict(ok, parts.join(", "))
}

fn strip_envelope(text: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(text) {
        Ok(mut doc) => {
            doc.as_object_mut().unwrap().remove("envelope");
            doc.to_string()
        }
        Err(_) => text.lines().skip(1).collect::<Vec<_>>().join("\n"),
    }
}

fn determinism() -> Verdict {
    let model = MetricModel::kerr(1.0, 0.3).unwrap();
    let o = SuiteOptions { n_points: 10, ..opts(0.0) };
    let a = serde_json::to_string(&run_suite(&model, &core_suite(), o).unwrap()).unwrap();
    let b = serde_json::to_string(&run_suite(&model, &core_suite(), o).unwrap()).unwrap();
    let mut ok = a == b;
    let runs: [&[&str]; 3] = [
        &["verify-identities", "--metric", "taub-bolt", "--points", "10", "--seed", "7"],
        &["petrov", "--metric", "kerr"],
        &["classify", "--chi", "3", "--sign", "1", "--max-weight", "6"],
    ];
    for args in runs {
        let out: Vec<String> = (0..2)
            .map(|_| {
                let o = Command::new(env!("CARGO_BIN_EXE_instanton")).args(args).output().unwrap();
                strip_envelope(&String::from_utf8(o.stdout).unwrap())
            })
            .collect();
        ok &= out[0] == out[1] && !out[0].is_empty();
    }
    verdict(ok, "library suite and three CLI commands rerun with fixed seeds, envelope excluded")
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("identity suite", identity_suite),
        ("mutation sensitivity", mutation),
        ("positivity", positivity),
        ("petrov types", petrov),
        ("fixed-point charges", fixed_point_charges),
        ("boundary balance", balance),
        ("combinatorics golden results", combinatorics_golden),
        ("case analyses", case_analyses),
        ("asymptotics", asymptotics),
        ("determinism", determinism),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        passed += v.pass as usize;
        println!("[{}] {:>2}. {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
