//! Compliance with the four rationality axioms, scored per item group.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::record::{CanonChoice, TrialRecord};
use crate::task_battery::{Domain, Payload};

/// Compliance rate for one axiom. Groups containing a transport failure
/// or missing members are excluded; unparsed answers count as violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomRate {
    pub compliant: usize,
    pub n_groups: usize,
    pub excluded: usize,
    pub rate: Option<f64>,
}

impl AxiomRate {
    pub fn from_groups(results: &[Option<bool>]) -> Self {
        let scored: Vec<bool> = results.iter().flatten().copied().collect();
        let compliant = scored.iter().filter(|&&c| c).count();
        let n_groups = scored.len();
        Self {
            compliant,
            n_groups,
            excluded: results.len() - n_groups,
            rate: (n_groups > 0).then(|| compliant as f64 / n_groups as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomScores {
    pub completeness: AxiomRate,
    pub transitivity: AxiomRate,
    pub continuity: AxiomRate,
    pub independence: AxiomRate,
    /// Equal-weight mean over axioms that have at least one scored group.
    pub overall: Option<f64>,
}

/// Both orders map to the same underlying option, or both are Indifferent.
pub fn completeness_ok(first: Option<CanonChoice>, second: Option<CanonChoice>) -> bool {
    matches!((first, second), (Some(a), Some(b)) if a == b)
}

/// No strict preference cycle among the compared items. Indifference adds
/// no strict edge, so a weak chain such as `A~B, B~C, A>C` passes.
/// Each entry is `(pair, choice)` where option 0 is `pair[0]`.
pub fn transitivity_ok(prefs: &[([usize; 2], Option<CanonChoice>)]) -> bool {
    let n = prefs.iter().flat_map(|(p, _)| p.iter()).max().map_or(0, |m| m + 1);
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pair, choice) in prefs {
        match choice {
            None => return false,
            Some(CanonChoice::Indifferent) => {}
            Some(CanonChoice::Option(i)) => edges[pair[*i]].push(pair[1 - *i]),
        }
    }
    // Kahn's algorithm: acyclic iff every node is eventually removed.
    let mut indeg = vec![0usize; n];
    for e in edges.iter().flatten() {
        indeg[*e] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &edges[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    seen == n
}

/// Sweep ordered by probability, option 0 = lottery. Passes when the
/// answers read `L* I* S*` or `S* I* L*`: at most one switch, with
/// indifference only where the switch happens.
pub fn continuity_ok(seq: &[Option<CanonChoice>]) -> bool {
    if seq.iter().any(Option::is_none) {
        return false;
    }
    let code: Vec<u8> = seq
        .iter()
        .map(|c| match c {
            Some(CanonChoice::Option(0)) => b'L',
            Some(CanonChoice::Option(_)) => b'S',
            _ => b'I',
        })
        .collect();
    let monotone = |first: u8, last: u8| {
        let mut stage = 0;
        for &c in &code {
            let s = if c == first {
                0
            } else if c == b'I' {
                1
            } else if c == last {
                2
            } else {
                unreachable!()
            };
            if s < stage {
                return false;
            }
            stage = s;
        }
        true
    };
    monotone(b'L', b'S') || monotone(b'S', b'L')
}

/// Same direction in the base and mixed pair; indifference must be kept.
pub fn independence_ok(base: Option<CanonChoice>, mixed: Option<CanonChoice>) -> bool {
    completeness_ok(base, mixed)
}

pub(crate) fn groups<'a>(records: &[&'a TrialRecord], domain: Domain) -> BTreeMap<&'a str, Vec<&'a TrialRecord>> {
    let mut m: BTreeMap<&str, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.trial.domain == domain) {
        m.entry(r.trial.group_key.as_str()).or_default().push(r);
    }
    m
}

/// Group result: `None` when the group cannot be scored.
fn usable(group: &[&TrialRecord], domain: Domain) -> bool {
    Some(group.len()) == domain.group_size() && !group.iter().any(|r| r.is_transport_failure())
}

pub fn score_completeness(records: &[&TrialRecord]) -> (AxiomRate, Vec<Option<bool>>) {
    let d = Domain::RationalityCompleteness;
    let res: Vec<Option<bool>> = groups(records, d)
        .values()
        .map(|g| usable(g, d).then(|| completeness_ok(g[0].choice(), g[1].choice())))
        .collect();
    (AxiomRate::from_groups(&res), res)
}

pub fn score_transitivity(records: &[&TrialRecord]) -> (AxiomRate, Vec<Option<bool>>) {
    let d = Domain::RationalityTransitivity;
    let res: Vec<Option<bool>> = groups(records, d)
        .values()
        .map(|g| {
            usable(g, d).then(|| {
                let prefs: Vec<_> = g
                    .iter()
                    .filter_map(|r| match &r.trial.payload {
                        Payload::Transitivity { pair, .. } => Some((*pair, r.choice())),
                        _ => None,
                    })
                    .collect();
                prefs.len() == g.len() && transitivity_ok(&prefs)
            })
        })
        .collect();
    (AxiomRate::from_groups(&res), res)
}

pub fn score_continuity(records: &[&TrialRecord]) -> (AxiomRate, Vec<Option<bool>>) {
    let d = Domain::RationalityContinuity;
    let res: Vec<Option<bool>> = groups(records, d)
        .values()
        .map(|g| {
            usable(g, d).then(|| {
                let mut sweep: Vec<(u32, Option<CanonChoice>)> = g
                    .iter()
                    .filter_map(|r| match r.trial.payload {
                        Payload::Continuity { p_percent, .. } => Some((p_percent, r.choice())),
                        _ => None,
                    })
                    .collect();
                sweep.sort_by_key(|s| s.0);
                let seq: Vec<_> = sweep.into_iter().map(|s| s.1).collect();
                seq.len() == g.len() && continuity_ok(&seq)
            })
        })
        .collect();
    (AxiomRate::from_groups(&res), res)
}

pub fn score_independence(records: &[&TrialRecord]) -> (AxiomRate, Vec<Option<bool>>) {
    let d = Domain::RationalityIndependence;
    let res: Vec<Option<bool>> = groups(records, d)
        .values()
        .map(|g| {
            usable(g, d).then(|| {
                let pick = |want: bool| {
                    g.iter().find(|r| matches!(r.trial.payload, Payload::Independence { mixed, .. } if mixed == want))
                };
                match (pick(false), pick(true)) {
                    (Some(b), Some(m)) => independence_ok(b.choice(), m.choice()),
                    _ => false,
                }
            })
        })
        .collect();
    (AxiomRate::from_groups(&res), res)
}

pub fn score_axioms(records: &[&TrialRecord]) -> AxiomScores {
    let completeness = score_completeness(records).0;
    let transitivity = score_transitivity(records).0;
    let continuity = score_continuity(records).0;
    let independence = score_independence(records).0;
    let rates: Vec<f64> =
        [completeness, transitivity, continuity, independence].iter().filter_map(|a| a.rate).collect();
    let overall = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
    AxiomScores { completeness, transitivity, continuity, independence, overall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CanonChoice::{Indifferent as I, Option as O};

    const PAIRS: [[usize; 2]; 3] = [[0, 1], [1, 2], [0, 2]];

    /// Brute force: some strict ranking of three items agrees with every
    /// strict answer.
    fn ranking_exists(answers: &[CanonChoice; 3]) -> bool {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        perms.iter().any(|rank| {
            PAIRS.iter().zip(answers).all(|(pair, a)| match a {
                I => true,
                O(i) => rank[pair[*i]] < rank[pair[1 - *i]],
            })
        })
    }

    #[test]
    fn transitivity_matches_exhaustive_check_on_27_triples() {
        let opts = [O(0), O(1), I];
        let mut cycles = 0;
        for a in opts {
            for b in opts {
                for c in opts {
                    let answers = [a, b, c];
                    let prefs: Vec<_> = PAIRS.iter().zip(answers).map(|(p, x)| (*p, Some(x))).collect();
                    let got = transitivity_ok(&prefs);
                    assert_eq!(got, ranking_exists(&answers), "{answers:?}");
                    cycles += usize::from(!got);
                }
            }
        }
        assert_eq!(cycles, 2);
    }

    #[test]
    fn transitivity_examples() {
        let p = |a: CanonChoice, b: CanonChoice, c: CanonChoice| {
            transitivity_ok(&[([0, 1], Some(a)), ([1, 2], Some(b)), ([0, 2], Some(c))])
        };
        assert!(p(O(0), O(0), O(0)));
        assert!(!p(O(0), O(0), O(1)));
        assert!(p(I, I, O(0)));
        assert!(!transitivity_ok(&[([0, 1], None), ([1, 2], Some(O(0))), ([0, 2], Some(O(0)))]));
    }

    fn switches(bits: &[bool]) -> usize {
        bits.windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn continuity_matches_switch_count_on_all_binary_sequences() {
        for mask in 0u32..256 {
            let bits: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
            let seq: Vec<_> = bits.iter().map(|&b| Some(O(usize::from(b)))).collect();
            assert_eq!(continuity_ok(&seq), switches(&bits) <= 1, "{mask:08b}");
        }
    }

    #[test]
    fn continuity_indifference_only_at_switch() {
        let s = |code: &str| -> Vec<Option<CanonChoice>> {
            code.chars()
                .map(|c| {
                    Some(match c {
                        'L' => O(0),
                        'S' => O(1),
                        _ => I,
                    })
                })
                .collect()
        };
        assert!(continuity_ok(&s("SSSIILLL")));
        assert!(continuity_ok(&s("LLLL")));
        assert!(continuity_ok(&s("LLIS")));
        assert!(!continuity_ok(&s("LILL")));
        assert!(!continuity_ok(&s("ISLS")));
        assert!(!continuity_ok(&s("SLSL")));
        let mut with_gap = s("SSLL");
        with_gap[1] = None;
        assert!(!continuity_ok(&with_gap));
    }

    #[test]
    fn pairwise_examples() {
        assert!(completeness_ok(Some(O(0)), Some(O(0))));
        assert!(completeness_ok(Some(I), Some(I)));
        assert!(!completeness_ok(Some(O(0)), Some(O(1))));
        assert!(!completeness_ok(None, Some(O(1))));
        assert!(independence_ok(Some(O(1)), Some(O(1))));
        assert!(!independence_ok(Some(O(0)), Some(O(1))));
        assert!(!independence_ok(Some(I), Some(O(1))));
        assert!(independence_ok(Some(I), Some(I)));
    }

    #[test]
    fn rate_bookkeeping() {
        let r = AxiomRate::from_groups(&[Some(true), Some(false), None, Some(true)]);
        assert_eq!((r.compliant, r.n_groups, r.excluded), (2, 3, 1));
        assert_eq!(r.rate, Some(2.0 / 3.0));
        assert_eq!(AxiomRate::from_groups(&[None]).rate, None);
    }
}
