//! Necessary conditions on nut weights: weight balance, companion nuts and
//! nuts of highest weight.

use serde::Serialize;

use super::config::{FixedPointConfig, NutData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    WeightBalance,
    CompanionNuts,
    HighestWeight,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaVerdict {
    pub lemma: Lemma,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct JangReport {
    pub verdicts: Vec<LemmaVerdict>,
    pub pass: bool,
}

impl JangReport {
    pub fn violated(&self) -> Vec<Lemma> {
        self.verdicts.iter().filter(|v| !v.holds).map(|v| v.lemma).collect()
    }
}

/// Whether the nuts in `idx` split into disjoint pairs allowed by `ok`.
fn perfect_matching(idx: &[usize], ok: &dyn Fn(usize, usize) -> bool) -> bool {
    fn go(rest: &mut Vec<usize>, ok: &dyn Fn(usize, usize) -> bool) -> bool {
        let Some(first) = rest.pop() else { return true };
        for k in 0..rest.len() {
            let other = rest[k];
            if ok(first, other) {
                rest.remove(k);
                if go(rest, ok) {
                    return true;
                }
                rest.insert(k, other);
            }
        }
        rest.push(first);
        false
    }
    if idx.len() % 2 != 0 {
        return false;
    }
    let mut rest = idx.to_vec();
    go(&mut rest, ok)
}

fn weight_values(nuts: &[NutData]) -> Vec<u32> {
    let mut ws: Vec<u32> = nuts.iter().flat_map(|n| n.weights()).filter(|&w| w > 1).collect();
    ws.sort_unstable();
    ws.dedup();
    ws
}

/// Runs the three checks on the nuts of `config`. Weights equal to 1 are
/// exempt: bolts contribute fictitious weight-one nuts to the signature
/// formula, so only weights above 1 are constrained.
pub fn jang_lemma_checks(config: &FixedPointConfig) -> JangReport {
    let nuts = &config.nuts;
    let ws = weight_values(nuts);
    let mut verdicts = Vec::new();

    let odd: Vec<u32> = ws
        .iter()
        .copied()
        .filter(|&w| nuts.iter().map(|n| n.weights().iter().filter(|&&x| x == w).count()).sum::<usize>() % 2 == 1)
        .collect();
    verdicts.push(LemmaVerdict {
        lemma: Lemma::WeightBalance,
        holds: odd.is_empty(),
        detail: if odd.is_empty() { "every weight > 1 occurs an even number of times".into() } else { format!("odd count for weights {odd:?}") },
    });

    let mut unmatched = Vec::new();
    for &w in &ws {
        let idx: Vec<usize> = (0..nuts.len()).filter(|&i| nuts[i].other_weight(w).is_some()).collect();
        let ok = |i: usize, j: usize| {
            let (p, q) = (&nuts[i], &nuts[j]);
            let (a, b) = (p.other_weight(w).unwrap() as i64, q.other_weight(w).unwrap() as i64);
            let w = w as i64;
            if p.epsilon == q.epsilon {
                (a + b).rem_euclid(w) == 0
            } else {
                (a - b).rem_euclid(w) == 0
            }
        };
        if !perfect_matching(&idx, &ok) {
            unmatched.push(w);
        }
    }
    verdicts.push(LemmaVerdict {
        lemma: Lemma::CompanionNuts,
        holds: unmatched.is_empty(),
        detail: if unmatched.is_empty() {
            "nuts sharing each weight w > 1 pair up with a ≡ ∓b mod w".into()
        } else {
            format!("no companion pairing for weights {unmatched:?}")
        },
    });

    let w = config.max_weight();
    let (holds, detail) = if w <= 1 {
        (true, "all weights equal 1".to_string())
    } else {
        let idx: Vec<usize> = (0..nuts.len()).filter(|&i| nuts[i].other_weight(w).is_some()).collect();
        let ok = |i: usize, j: usize| {
            let (p, q) = (&nuts[i], &nuts[j]);
            let (a, b) = (p.other_weight(w).unwrap(), q.other_weight(w).unwrap());
            if p.epsilon == q.epsilon {
                a + b == w
            } else {
                a == b
            }
        };
        if perfect_matching(&idx, &ok) {
            (true, format!("nuts of highest weight {w} pair with w = a + b or a = b"))
        } else {
            (false, format!("nuts of highest weight {w} cannot be paired"))
        }
    };
    verdicts.push(LemmaVerdict { lemma: Lemma::HighestWeight, holds, detail });

    let pass = verdicts.iter().all(|v| v.holds);
    JangReport { verdicts, pass }
}
