//! Enumeration of admissible fixed-point configurations.
//!
//! Nut multisets are found by meet-in-the-middle on the signature formula:
//! each nut term is evaluated at a few points modulo a large prime, half
//! multisets are tabulated by their sums, and matching halves become
//! candidates. Every candidate is then certified by the exact polynomial
//! test and the weight lemmas, so the modular step only prunes.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{sgn, BoltData, FixedPointConfig, NutData};
use super::jang::jang_lemma_checks;
use super::signature::signature_residual;
use crate::{Error, Result};

const P: u64 = (1 << 61) - 1;
const POINTS: usize = 4;
type Key = [u64; POINTS];

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

fn negmod(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        P - a
    }
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, P - 2)
}

fn from_i64(x: i64) -> u64 {
    if x >= 0 {
        x as u64 % P
    } else {
        negmod((-x) as u64 % P)
    }
}

/// Evaluation points whose powers up to `w_max` avoid 1 modulo `P`.
fn sample_points(w_max: u32) -> Key {
    let mut pts = [0; POINTS];
    let mut cand = 3u64;
    let mut k = 0;
    while k < POINTS {
        if (1..=w_max as u64 + 1).all(|w| powmod(cand, w) != 1) {
            pts[k] = cand;
            k += 1;
        }
        cand += 2;
    }
    pts
}

struct Modular {
    points: Key,
}

impl Modular {
    fn nut(&self, n: &NutData) -> Key {
        std::array::from_fn(|k| {
            let g = self.points[k];
            let (ga, gb) = (powmod(g, n.w1 as u64), powmod(g, n.w2 as u64));
            let num = mulmod(addmod(ga, 1), addmod(gb, 1));
            let den = mulmod(addmod(ga, P - 1), addmod(gb, P - 1));
            let v = mulmod(num, invmod(den));
            if n.epsilon > 0 {
                v
            } else {
                negmod(v)
            }
        })
    }

    /// `(sign − sgn(e)) − c · 4g/(g−1)²`.
    fn target(&self, sign: i64, e: i64, c: i64) -> Key {
        std::array::from_fn(|k| {
            let g = self.points[k];
            let gm1 = addmod(g, P - 1);
            let kern = mulmod(mulmod(4, g), invmod(mulmod(gm1, gm1)));
            addmod(from_i64(sign - sgn(e)), negmod(mulmod(from_i64(c), kern)))
        })
    }
}

fn add_key(a: &Key, b: &Key) -> Key {
    std::array::from_fn(|k| addmod(a[k], b[k]))
}

fn sub_key(a: &Key, b: &Key) -> Key {
    std::array::from_fn(|k| addmod(a[k], negmod(b[k])))
}

/// Bounds on bolts: allowed Euler characteristics, `|B·B|` and count.
#[derive(Debug, Clone, Serialize)]
pub struct BoltBounds {
    pub euler_chars: Vec<i64>,
    pub max_abs_self_intersection: i64,
    pub max_bolts: usize,
}

impl BoltBounds {
    pub fn none() -> Self {
        BoltBounds { euler_chars: Vec::new(), max_abs_self_intersection: 0, max_bolts: 0 }
    }
}

impl Default for BoltBounds {
    /// Genus ≤ 2, `|B·B| ≤ 8`, at most two bolts.
    fn default() -> Self {
        BoltBounds { euler_chars: vec![2, 0, -2], max_abs_self_intersection: 8, max_bolts: 2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationBounds {
    pub chi: i64,
    pub sign: i64,
    pub e: i64,
    pub n_max: usize,
    pub w_max: u32,
    pub bolts: BoltBounds,
    /// Cap on the number of half-multisets tabulated.
    pub cap: f64,
}

/// Default cap on tabulated half-multisets.
pub const DEFAULT_CAP: f64 = 2e7;

impl EnumerationBounds {
    pub fn nuts_only(chi: i64, sign: i64, e: i64, n_max: usize, w_max: u32) -> Self {
        EnumerationBounds { chi, sign, e, n_max, w_max, bolts: BoltBounds::none(), cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub bounds: EnumerationBounds,
    pub configs: Vec<FixedPointConfig>,
    /// Nut multisets (per bolt defect) passing the modular signature filter.
    pub candidates: usize,
    /// Candidates rejected by the exact signature test.
    pub modular_false_positives: usize,
    /// Candidates rejected per weight lemma.
    pub rejected_by_lemma: BTreeMap<String, usize>,
    /// Size of the unpruned space of nut multisets times bolt groups.
    pub naive_space: f64,
}

/// Coprime weight pairs up to `w_max` with both orientations, in canonical
/// order.
pub fn nut_types(w_max: u32) -> Vec<NutData> {
    let mut out = Vec::new();
    for eps in [-1i8, 1] {
        for a in 1..=w_max {
            for b in a..=w_max {
                if a.gcd(&b) == 1 {
                    out.push(NutData { epsilon: eps, w1: a, w2: b });
                }
            }
        }
    }
    out
}

fn multisets(types: usize, size: usize) -> Vec<Vec<u16>> {
    fn go(start: usize, types: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for t in start..types {
            cur.push(t as u16);
            go(t, types, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, types, size, &mut Vec::new(), &mut out);
    out
}

fn binom_multiset(t: usize, k: usize) -> f64 {
    // C(t + k − 1, k)
    (0..k).fold(1.0, |acc, i| acc * (t + i) as f64 / (i + 1) as f64)
}

fn bolt_groups(bounds: &EnumerationBounds) -> BTreeMap<(usize, i64), Vec<Vec<BoltData>>> {
    let b = &bounds.bolts;
    let mut types = Vec::new();
    for &chi in &b.euler_chars {
        for s in -b.max_abs_self_intersection..=b.max_abs_self_intersection {
            types.push(BoltData { euler_char: chi, self_intersection: s });
        }
    }
    types.sort();
    let mut groups: BTreeMap<(usize, i64), Vec<Vec<BoltData>>> = BTreeMap::new();
    for size in 0..=b.max_bolts {
        for set in multisets(types.len(), size) {
            let bolts: Vec<BoltData> = set.iter().map(|&i| types[i as usize]).collect();
            let chi_b: i64 = bolts.iter().map(|x| x.euler_char).sum();
            let n = bounds.chi - chi_b;
            if n < 0 || n as usize > bounds.n_max {
                continue;
            }
            let c = bounds.e - bolts.iter().map(|x| x.self_intersection).sum::<i64>();
            groups.entry((n as usize, c)).or_default().push(bolts);
        }
    }
    groups
}

pub fn enumerate_configs(bounds: &EnumerationBounds) -> Result<Enumeration> {
    if bounds.w_max == 0 {
        return Err(Error::Config("maximal weight must be at least 1".into()));
    }
    let types = nut_types(bounds.w_max);
    let t = types.len();
    let groups = bolt_groups(bounds);
    let mut by_n: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for &(n, c) in groups.keys() {
        by_n.entry(n).or_default().push(c);
    }
    let mut work = 0.0;
    let mut naive_space = 0.0;
    for (&n, cs) in &by_n {
        let n1 = n / 2;
        work += binom_multiset(t, n1) + binom_multiset(t, n - n1);
        naive_space += binom_multiset(t, n) * cs.len() as f64;
    }
    if work > bounds.cap {
        return Err(Error::SearchSpace { size: work, cap: bounds.cap });
    }

    let modular = Modular { points: sample_points(bounds.w_max) };
    let keys: Vec<Key> = types.iter().map(|n| modular.nut(n)).collect();
    let sum_keys = |set: &[u16]| set.iter().fold([0; POINTS], |acc, &i| add_key(&acc, &keys[i as usize]));

    let mut tables: HashMap<usize, HashMap<Key, Vec<Vec<u16>>>> = HashMap::new();
    let mut candidates: Vec<(Vec<u16>, i64)> = Vec::new();
    for (&n, cs) in &by_n {
        let n1 = n / 2;
        let n2 = n - n1;
        let table = tables.entry(n2).or_insert_with(|| {
            let mut m: HashMap<Key, Vec<Vec<u16>>> = HashMap::new();
            for set in multisets(t, n2) {
                m.entry(sum_keys(&set)).or_default().push(set);
            }
            m
        });
        let targets: Vec<(i64, Key)> = cs.iter().map(|&c| (c, modular.target(bounds.sign, bounds.e, c))).collect();
        let found: Vec<(Vec<u16>, i64)> = multisets(t, n1)
            .into_par_iter()
            .flat_map_iter(|left| {
                let sa = sum_keys(&left);
                let max_a = left.last().copied().unwrap_or(0);
                let mut out = Vec::new();
                for (c, target) in &targets {
                    if let Some(rights) = table.get(&sub_key(target, &sa)) {
                        for right in rights {
                            if right.first().map_or(true, |&m| m >= max_a) {
                                let mut all = left.clone();
                                all.extend_from_slice(right);
                                out.push((all, *c));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        candidates.extend(found);
    }

    let n_candidates = candidates.len();
    let verdicts: Vec<(Option<Vec<FixedPointConfig>>, Option<String>)> = candidates
        .into_par_iter()
        .map(|(set, c)| {
            let nuts: Vec<NutData> = set.iter().map(|&i| types[i as usize]).collect();
            let group = &groups[&(nuts.len(), c)];
            let probe = FixedPointConfig::new(nuts.clone(), group[0].clone(), bounds.e);
            let (res, _) = signature_residual(&probe, bounds.sign);
            if !res.is_zero() {
                return (None, Some("modular".to_string()));
            }
            let jang = jang_lemma_checks(&probe);
            if !jang.pass {
                let first = jang.violated()[0];
                return (None, Some(serde_json::to_string(&first).unwrap_or_default().trim_matches('"').to_string()));
            }
            let configs = group.iter().map(|b| FixedPointConfig::new(nuts.clone(), b.clone(), bounds.e)).collect();
            (Some(configs), None)
        })
        .collect();

    let mut configs = Vec::new();
    let mut rejected_by_lemma: BTreeMap<String, usize> = BTreeMap::new();
    let mut modular_false_positives = 0;
    for (ok, why) in verdicts {
        if let Some(c) = ok {
            configs.extend(c);
        }
        match why.as_deref() {
            Some("modular") => modular_false_positives += 1,
            Some(l) => *rejected_by_lemma.entry(l.to_string()).or_default() += 1,
            None => {}
        }
    }
    configs.sort();
    configs.dedup();
    Ok(Enumeration {
        bounds: bounds.clone(),
        configs,
        candidates: n_candidates,
        modular_false_positives,
        rejected_by_lemma,
        naive_space,
    })
}
