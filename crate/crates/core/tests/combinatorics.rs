use std::collections::BTreeSet;

use instanton_core::combinatorics::config::sgn;
use instanton_core::combinatorics::enumerate::{nut_types, EnumerationBounds};
use instanton_core::combinatorics::signature::rhs_at_zero;
use instanton_core::combinatorics::*;
use instanton_core::Side;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nut(s: &str) -> NutData {
    s.parse().unwrap()
}

fn nuts(list: &[&str]) -> FixedPointConfig {
    FixedPointConfig::nuts_only(list.iter().map(|s| nut(s)).collect(), 0)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow(g: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * g)
}

/// Right-hand side of the signature formula evaluated term by term.
fn rhs_direct(config: &FixedPointConfig, g: &BigRational) -> BigRational {
    let one = BigRational::one();
    let mut total = BigRational::from_integer(BigInt::from(sgn(config.e)));
    for n in &config.nuts {
        let (ga, gb) = (pow(g, n.w1), pow(g, n.w2));
        let term = (&ga + &one) * (&gb + &one) / ((&ga - &one) * (&gb - &one));
        total += term * BigRational::from_integer(BigInt::from(n.epsilon));
    }
    let c = config.bolt_defect();
    let gm1 = g - &one;
    total + q(4 * c, 1) * g / (&gm1 * &gm1)
}

fn golden(name: &str) -> BTreeSet<String> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.trim().to_string())
        .collect()
}

fn enumerated(chi: i64, sign: i64, w_max: u32) -> BTreeSet<String> {
    let en = enumerate_configs(&EnumerationBounds::nuts_only(chi, sign, 0, 6, w_max)).unwrap();
    en.configs.iter().map(|c| c.to_string()).collect()
}

#[test]
fn single_positive_nut_rhs() {
    let rhs = g_signature_rhs(&nuts(&["+,1,1"]));
    let mut num = IntPolynomial::one();
    num.mul_binomial(1, 1);
    num.mul_binomial(1, 1);
    let mut den = IntPolynomial::one();
    den.mul_binomial(1, -1);
    den.mul_binomial(1, -1);
    assert_eq!(rhs, IntRationalFunction::new(num, den));
}

#[test]
fn opposite_pair_cancels() {
    for (a, b) in [(1, 1), (1, 2), (2, 3), (3, 7)] {
        let c = nuts(&[&format!("+,{a},{b}"), &format!("-,{a},{b}")]);
        assert_eq!(g_signature_rhs(&c).as_constant(), Some(BigRational::zero()));
    }
}

#[test]
fn signature_identity_examples() {
    assert!(check_signature_identity(&nuts(&["+,1,2", "-,1,2"]), 0).holds);

    let bad = check_signature_identity(&nuts(&["+,1,2", "-,1,3"]), 0);
    assert!(!bad.holds);
    assert_ne!(bad.residual, "0");
    let c = nuts(&["+,1,2", "-,1,3"]);
    assert_ne!(rhs_direct(&c, &q(2, 1)), rhs_direct(&c, &q(3, 1)));
}

#[test]
fn three_nut_family_has_signature_opposite_to_first_nut() {
    for (a, b) in [(1u32, 2u32), (1, 1), (2, 3), (3, 5)] {
        let minus_first = nuts(&[&format!("+,{a},{b}"), &format!("-,{a},{}", a + b), &format!("-,{b},{}", a + b)]);
        assert!(check_signature_identity(&minus_first, -1).holds);
        assert!(!check_signature_identity(&minus_first, 1).holds);
        let plus_pair = nuts(&[&format!("-,{a},{b}"), &format!("+,{a},{}", a + b), &format!("+,{b},{}", a + b)]);
        assert!(check_signature_identity(&plus_pair, 1).holds);
    }
}

#[test]
fn weight_lemma_examples() {
    assert!(jang_lemma_checks(&nuts(&["+,1,2", "-,1,2"])).pass);

    let lone = jang_lemma_checks(&nuts(&["+,1,2"]));
    assert!(!lone.pass);
    assert!(lone.violated().contains(&Lemma::WeightBalance));

    let chen_teo = jang_lemma_checks(&nuts(&["+,1,1", "-,1,2", "-,1,2"]));
    assert!(chen_teo.pass, "{chen_teo:?}");
}

#[test]
fn phi_examples() {
    let kerr = nuts(&["+,1,1", "-,1,1"]);
    assert_eq!(phi_values(&kerr), [BigRational::zero(), BigRational::zero()]);

    let taub_bolt = FixedPointConfig::new(vec![], vec![BoltData::new(2, 1).unwrap()], 1);
    assert_eq!(phi_values(&taub_bolt), [BigRational::zero(), BigRational::zero()]);

    let p = nut("+,1,1");
    assert_eq!(z_value(&p, Side::Plus), q(2, 1));
    assert_eq!(z_value(&p, Side::Minus), q(0, 1));
}

#[test]
fn two_nut_family_matches_golden() {
    let want = golden("two_nut_family_w6.txt");
    assert_eq!(want.len(), 12);
    assert_eq!(enumerated(2, 0, 6), want);
}

#[test]
fn three_nut_family_matches_golden() {
    let want = golden("three_nut_family_w6.txt");
    assert_eq!(want.len(), 6);
    assert_eq!(enumerated(3, 1, 6), want);
}

#[test]
fn small_weight_families() {
    let two: BTreeSet<String> = ["{-,1,1} {+,1,1} e=0", "{-,1,2} {+,1,2} e=0", "{-,1,3} {+,1,3} e=0", "{-,2,3} {+,2,3} e=0"]
        .into_iter()
        .map(String::from)
        .collect();
    assert_eq!(enumerated(2, 0, 3), two);
    let three: BTreeSet<String> =
        ["{-,1,1} {+,1,2} {+,1,2} e=0", "{-,1,2} {+,1,3} {+,2,3} e=0"].into_iter().map(String::from).collect();
    assert_eq!(enumerated(3, 1, 3), three);
}

#[test]
fn one_nut_cannot_carry_euler_characteristic_two() {
    let en = enumerate_configs(&EnumerationBounds::nuts_only(2, 0, 0, 1, 6)).unwrap();
    assert!(en.configs.is_empty());
}

#[test]
fn oversized_search_is_refused() {
    let mut b = EnumerationBounds::nuts_only(12, 0, 0, 12, 40);
    b.cap = 1e3;
    assert!(matches!(enumerate_configs(&b), Err(instanton_core::Error::SearchSpace { .. })));
}

#[test]
fn enumerated_configs_are_certified() {
    let b = EnumerationBounds { bolts: BoltBounds::default(), ..EnumerationBounds::nuts_only(2, 1, 1, 4, 5) };
    let en = enumerate_configs(&b).unwrap();
    assert!(!en.configs.is_empty());
    for c in &en.configs {
        assert!(check_signature_identity(c, 1).holds, "{c}");
        assert!(jang_lemma_checks(c).pass, "{c}");
        assert_eq!(rhs_at_zero(c), BigInt::from(1));
    }
}

fn case(t: Topology, bolts: BoltBounds) -> CaseReport {
    case_analysis(t, 12, 6, bolts).unwrap()
}

#[test]
fn kerr_case_has_no_counterexamples() {
    let r = case(Topology::Kerr, BoltBounds::default());
    assert!(r.pass && r.counterexamples.is_empty());
    assert_eq!(r.admissible, r.equality + r.excluded);
    let nuts_only = case(Topology::Kerr, BoltBounds::none());
    assert_eq!(nuts_only.equality, nuts_only.admissible);
}

#[test]
fn taub_bolt_case_has_no_counterexamples() {
    let r = case(Topology::TaubBolt, BoltBounds::default());
    assert!(r.pass && r.counterexamples.is_empty());
    assert!(r.admissible > 0);
}

#[test]
fn chen_teo_case_has_no_counterexamples() {
    let r = case(Topology::ChenTeo, BoltBounds::default());
    assert!(r.pass && r.counterexamples.is_empty());
    let nuts_only = case(Topology::ChenTeo, BoltBounds::none());
    assert_eq!(nuts_only.equality, nuts_only.admissible);
    for e in &nuts_only.entries {
        assert_eq!(e.phi[1], "0", "{}", e.config);
        assert_eq!(e.status[0], PhiStatus::Unconstrained);
    }
    let p = nuts_only.three_nut_patterns.unwrap();
    assert!(p.matching > 0);
    assert_eq!(p.other, 0);
}

fn random_config(rng: &mut ChaCha8Rng) -> FixedPointConfig {
    let types = nut_types(7);
    let n = rng.gen_range(1..=4);
    let list: Vec<NutData> = (0..n).map(|_| types[rng.gen_range(0..types.len())]).collect();
    let bolts = if rng.gen_bool(0.3) { vec![BoltData::new(2 * rng.gen_range(-1..=1), rng.gen_range(-3..=3)).unwrap()] } else { vec![] };
    FixedPointConfig::new(list, bolts, rng.gen_range(-2..=2))
}

#[test]
fn certificate_agrees_with_rational_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut holding = 0;
    for k in 0..1000 {
        let config = if k % 4 == 0 {
            let (a, b) = (rng.gen_range(1..6u32), rng.gen_range(1..6u32));
            if num_integer::Integer::gcd(&a, &b) != 1 {
                continue;
            }
            nuts(&[&format!("-,{},{}", a.min(b), a.max(b)), &format!("+,{},{}", a.min(b), a.max(b))])
        } else {
            random_config(&mut rng)
        };
        let sign = rhs_at_zero(&config);
        let sign_i: i64 = sign.clone().try_into().unwrap();
        let cert = check_signature_identity(&config, sign_i);
        let points: Vec<BigRational> = (0..5)
            .map(|_| loop {
                let g = q(rng.gen_range(2..60), rng.gen_range(1..60));
                if g != BigRational::one() {
                    break g;
                }
            })
            .collect();
        let rhs = g_signature_rhs(&config);
        let target = BigRational::from_integer(sign);
        let mut all_equal = true;
        for g in &points {
            let direct = rhs_direct(&config, g);
            assert_eq!(rhs.eval(g), Some(direct.clone()), "{config} at {g}");
            all_equal &= direct == target;
        }
        assert_eq!(cert.holds, all_equal, "{config}");
        holding += cert.holds as usize;
    }
    assert!(holding > 100);
}

fn arb_nut() -> impl Strategy<Value = NutData> {
    (any::<bool>(), 1u32..9, 1u32..9)
        .prop_filter("coprime", |(_, a, b)| num_integer::Integer::gcd(a, b) == 1)
        .prop_map(|(p, a, b)| NutData::new(if p { 1 } else { -1 }, a.min(b), a.max(b)).unwrap())
}

fn arb_config() -> impl Strategy<Value = FixedPointConfig> {
    (
        prop::collection::vec(arb_nut(), 0..5),
        prop::collection::vec(((-1i64..=1), (-4i64..=4)), 0..3),
        -3i64..=3,
    )
        .prop_map(|(n, b, e)| FixedPointConfig::new(n, b.into_iter().map(|(c, s)| BoltData::new(2 * c, s).unwrap()).collect(), e))
}

proptest! {
    #[test]
    fn value_at_zero_is_orientation_count(config in arb_config()) {
        let rhs = g_signature_rhs(&config);
        let at_zero = rhs.eval(&BigRational::zero()).unwrap();
        let expect: i64 = config.nuts.iter().map(|n| n.epsilon as i64).sum::<i64>() + sgn(config.e);
        prop_assert_eq!(at_zero, q(expect, 1));
        prop_assert_eq!(rhs_at_zero(&config), BigInt::from(expect));
    }

    #[test]
    fn normal_form_matches_direct_evaluation(config in arb_config(), p in 2i64..80, d in 1i64..80) {
        prop_assume!(p != d);
        let g = q(p, d);
        prop_assert_eq!(g_signature_rhs(&config).eval(&g), Some(rhs_direct(&config, &g)));
    }

    #[test]
    fn certificate_holds_iff_rhs_is_the_constant(config in arb_config(), sign in -4i64..=4) {
        let cert = check_signature_identity(&config, sign);
        let constant = g_signature_rhs(&config).as_constant();
        prop_assert_eq!(cert.holds, constant == Some(q(sign, 1)));
    }

    #[test]
    fn canonical_order_is_permutation_invariant(mut list in prop::collection::vec(arb_nut(), 0..5), e in -2i64..=2) {
        let a = FixedPointConfig::nuts_only(list.clone(), e);
        list.reverse();
        let b = FixedPointConfig::nuts_only(list, e);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn nut_display_round_trips(n in arb_nut()) {
        prop_assert_eq!(n.to_string().parse::<NutData>().unwrap(), n);
    }
}

#[test]
fn invalid_nut_data_is_rejected() {
    assert!(NutData::new(1, 2, 4).is_err());
    assert!(NutData::new(0, 1, 1).is_err());
    assert!(NutData::new(1, 0, 1).is_err());
    assert!(BoltData::new(3, 0).is_err());
    assert!("+,1".parse::<NutData>().is_err());
}
