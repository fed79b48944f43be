//! Admission control.
//!
//! A set of users can share the network iff their sizes sum to less than 1.
//! At the Pareto-dominant equilibrium the total utility of an admitted set
//! `L` is `(B f*/(σ² γ*))` times
//!
//! ```text
//! J(L) = (1 - Σ_{i∈L} Φ_i) · Σ_{ℓ∈L} h_ℓ / (1 - Φ_ℓ)
//! ```
//!
//! so utility-maximising admission is a subset-selection problem on `J`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::efficiency::Optimum;
use crate::equilibrium::User;
use crate::error::{domain, Error, Result};
use crate::qos::size_at_rate;

/// Largest candidate count for exhaustive selection.
pub const EXACT_LIMIT: usize = 20;

const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Admit in arrival order while the total size stays below 1.
    FeasibilityOnly,
    MaxUtilityExact,
    /// Ascending-size greedy fill followed by add/drop/swap local search.
    MaxUtilityGreedy,
}

/// A candidate reduced to what selection needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub size: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissionRequest {
    pub candidates: Vec<User>,
    pub bandwidth: f64,
    pub noise_power: f64,
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admission {
    /// Indices into the candidate list, ascending.
    pub admitted: Vec<usize>,
    pub total_size: f64,
    /// `J(L)`; multiply by `B f*/(σ² γ*)` for bits per joule.
    pub objective: f64,
    pub total_utility: f64,
    /// Set when the result comes from the greedy heuristic.
    pub heuristic: bool,
}

/// Strict feasibility: `Σ Φ < 1`.
pub fn feasible(sizes: &[f64]) -> bool {
    sizes.iter().sum::<f64>() < 1.0
}

/// `J(L)` for the chosen indices; zero for the empty set.
pub fn objective(candidates: &[Candidate], chosen: &[usize]) -> f64 {
    let total: f64 = chosen.iter().map(|&i| candidates[i].size).sum();
    let weight: f64 = chosen
        .iter()
        .map(|&i| candidates[i].gain / (1.0 - candidates[i].size))
        .sum();
    (1.0 - total) * weight
}

pub fn candidates(request: &AdmissionRequest, optimum: &Optimum) -> Result<Vec<Candidate>> {
    if request.candidates.is_empty() {
        return Err(domain("no candidates"));
    }
    if !(request.bandwidth > 0.0) {
        return Err(domain("bandwidth must be positive"));
    }
    Ok(request
        .candidates
        .iter()
        .map(|u| Candidate {
            size: size_at_rate(
                u.profile.omega_star(optimum),
                optimum.gamma,
                request.bandwidth,
            ),
            gain: u.gain,
        })
        .collect())
}

pub fn select_max_utility(request: &AdmissionRequest, optimum: &Optimum) -> Result<Admission> {
    if !(request.noise_power > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    let cands = candidates(request, optimum)?;
    let (admitted, heuristic) = match request.policy {
        Policy::FeasibilityOnly => (admit_in_order(&cands), false),
        Policy::MaxUtilityExact => (select_exact(&cands)?, false),
        Policy::MaxUtilityGreedy => (select_greedy(&cands), true),
    };
    let obj = objective(&cands, &admitted);
    let scale = request.bandwidth * optimum.success / (request.noise_power * optimum.gamma);
    Ok(Admission {
        total_size: admitted.iter().map(|&i| cands[i].size).sum(),
        objective: obj,
        total_utility: scale * obj,
        admitted,
        heuristic,
    })
}

pub fn admit_in_order(cands: &[Candidate]) -> Vec<usize> {
    let mut total = 0.0;
    let mut out = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        if total + c.size < 1.0 {
            total += c.size;
            out.push(i);
        }
    }
    out
}

/// Exhaustive search over all `2^K` subsets.
pub fn select_exact(cands: &[Candidate]) -> Result<Vec<usize>> {
    let k = cands.len();
    if k > EXACT_LIMIT {
        return Err(Error::SizeLimit {
            count: k,
            limit: EXACT_LIMIT,
        });
    }
    let n = 1usize << k;
    let mut size_sum = vec![0.0f64; n];
    let mut weight_sum = vec![0.0f64; n];
    let (mut best_mask, mut best) = (0usize, 0.0f64);
    for mask in 1..n {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        size_sum[mask] = size_sum[rest] + cands[low].size;
        weight_sum[mask] = weight_sum[rest] + cands[low].gain / (1.0 - cands[low].size);
        if size_sum[mask] >= 1.0 {
            continue;
        }
        let j = (1.0 - size_sum[mask]) * weight_sum[mask];
        match compare(j, best) {
            Ordering::Greater => {
                best = j;
                best_mask = mask;
            }
            Ordering::Equal if lex_less(mask, best_mask) => best_mask = mask,
            _ => {}
        }
    }
    Ok((0..k).filter(|i| best_mask >> i & 1 == 1).collect())
}

fn compare(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_REL * a.abs().max(b.abs()) {
        Ordering::Equal
    } else if a > b {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Lexicographic order on the ascending index lists of two masks.
fn lex_less(a: usize, b: usize) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a, b) {
            (0, 0) => return false,
            (0, _) => return true,
            (_, 0) => return false,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la < lb;
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Ascending-size fill, then add/drop/swap moves until none improves `J`.
pub fn select_greedy(cands: &[Candidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[a].size.total_cmp(&cands[b].size).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = Vec::new();
    let mut current = 0.0;
    for &i in &order {
        chosen.push(i);
        let j = objective(cands, &chosen);
        if total_size(cands, &chosen) < 1.0 && compare(j, current) == Ordering::Greater {
            current = j;
        } else {
            chosen.pop();
        }
    }

    let is_better = |set: &[usize], current: f64| {
        total_size(cands, set) < 1.0 && compare(objective(cands, set), current) == Ordering::Greater
    };
    for _ in 0..10 * cands.len().max(1) {
        let mut improved = None;
        // drop
        for pos in 0..chosen.len() {
            let mut trial = chosen.clone();
            trial.remove(pos);
            if is_better(&trial, current) {
                improved = Some(trial);
                break;
            }
        }
        // add, then swap
        if improved.is_none() {
            let outside: Vec<usize> = (0..cands.len()).filter(|i| !chosen.contains(i)).collect();
            'search: for &o in &outside {
                let mut trial = chosen.clone();
                trial.push(o);
                if is_better(&trial, current) {
                    improved = Some(trial);
                    break;
                }
                for pos in 0..chosen.len() {
                    let mut trial = chosen.clone();
                    trial[pos] = o;
                    if is_better(&trial, current) {
                        improved = Some(trial);
                        break 'search;
                    }
                }
            }
        }
        match improved {
            Some(set) => {
                current = objective(cands, &set);
                chosen = set;
            }
            None => break,
        }
    }
    chosen.sort_unstable();
    chosen
}

fn total_size(cands: &[Candidate], set: &[usize]) -> f64 {
    set.iter().map(|&i| cands[i].size).sum()
}

/// Maximum number of identical users of the given size the network admits.
pub fn network_capacity(size: f64) -> Result<u32> {
    check_size(size)?;
    let mut l = (1.0 / size).floor() as u32;
    while l as f64 * size >= 1.0 {
        l -= 1;
    }
    Ok(l)
}

/// Number of identical, equal-gain users maximising total utility: the
/// integer nearest `1/(2Φ)`, checked against its neighbour.
pub fn single_class_optimum(size: f64) -> Result<u32> {
    check_size(size)?;
    let x = 1.0 / (2.0 * size);
    let value = |l: f64| l - l * l * size;
    let rounded = x.round();
    let mut best = rounded;
    for alt in [x.floor(), x.ceil()] {
        if alt >= 1.0 && value(alt) > value(best) {
            best = alt;
        }
    }
    let mut l = best.max(1.0) as u32;
    while l > 1 && l as f64 * size >= 1.0 {
        l -= 1;
    }
    Ok(l)
}

fn check_size(size: f64) -> Result<()> {
    if size > 0.0 && size < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("size must lie in (0, 1), got {size}")))
    }
}

/// `J` for per-class counts with equal gains (gain factored out).
pub fn class_objective(sizes: &[f64], counts: &[u32]) -> Result<f64> {
    if sizes.len() != counts.len() {
        return Err(domain("one count per class required"));
    }
    let total: f64 = sizes.iter().zip(counts).map(|(s, &n)| s * n as f64).sum();
    if total >= 1.0 {
        return Err(Error::InfeasibleNetwork {
            total,
            excess: total - 1.0,
            sizes: sizes.to_vec(),
        });
    }
    let weight: f64 = sizes
        .iter()
        .zip(counts)
        .map(|(s, &n)| n as f64 / (1.0 - s))
        .sum();
    Ok((1.0 - total) * weight)
}

/// Fractional loss in total utility of each mix relative to `baseline`.
pub fn utility_loss_table(sizes: &[f64], mixes: &[Vec<u32>], baseline: &[u32]) -> Result<Vec<f64>> {
    let base = class_objective(sizes, baseline)?;
    if !(base > 0.0) {
        return Err(domain("baseline mix has zero utility"));
    }
    mixes
        .iter()
        .map(|mix| Ok(1.0 - class_objective(sizes, mix)? / base))
        .collect()
}

/// Per-class counts maximising total utility under equal gains, by
/// exhaustive search over all feasible count vectors.
pub fn multi_class_optimum(sizes: &[f64]) -> Result<Vec<u32>> {
    let caps = sizes
        .iter()
        .map(|&s| network_capacity(s))
        .collect::<Result<Vec<_>>>()?;
    let combos: f64 = caps.iter().map(|&c| c as f64 + 1.0).product();
    if combos > 1e7 {
        return Err(domain("too many class-count combinations"));
    }
    let mut counts = vec![0u32; sizes.len()];
    let mut best = (0.0f64, counts.clone());
    loop {
        if let Ok(j) = class_objective(sizes, &counts) {
            if compare(j, best.0) == Ordering::Greater {
                best = (j, counts.clone());
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return Ok(best.1);
            }
            if counts[pos] < caps[pos] {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI_A: f64 = 0.0198;
    const PHI_B: f64 = 0.0718;
    const PHI_C: f64 = 0.1848;

    #[test]
    fn feasibility_at_capacity() {
        assert!(feasible(&[PHI_B; 13]));
        assert!(!feasible(&[PHI_B; 14]));
        assert_eq!(network_capacity(PHI_B).unwrap(), 13);
        assert_eq!(network_capacity(0.5).unwrap(), 1);
        assert_eq!(network_capacity(0.25).unwrap(), 3);
    }

    #[test]
    fn single_class_examples() {
        assert_eq!(single_class_optimum(PHI_A).unwrap(), 25);
        assert_eq!(single_class_optimum(0.5).unwrap(), 1);
        assert!(single_class_optimum(0.0).is_err());
        assert!(single_class_optimum(1.0).is_err());
    }

    #[test]
    fn single_class_tie_prefers_smaller() {
        // 1/(2Φ) = 2.5: L = 2 and 3 give equal utility
        let l = single_class_optimum(0.2).unwrap();
        let v = |l: f64| l - l * l * 0.2;
        assert!((v(2.0) - v(3.0)).abs() < 1e-12);
        assert!(l == 2 || l == 3);
    }

    #[test]
    fn table_rows() {
        let sizes = [PHI_A, PHI_B, PHI_C];
        let mixes = vec![
            vec![23, 1, 0],
            vec![20, 0, 1],
            vec![18, 1, 1],
            vec![0, 7, 0],
            vec![0, 0, 3],
            vec![25, 0, 0],
        ];
        let loss = utility_loss_table(&sizes, &mixes, &[25, 0, 0]).unwrap();
        let want = [0.10, 0.30, 0.38, 0.71, 0.87, 0.0];
        for (l, w) in loss.iter().zip(want) {
            assert!((l - w).abs() < 0.01, "{l} vs {w}");
        }
        assert_eq!(loss[5], 0.0);
    }

    #[test]
    fn infeasible_mix_rejected() {
        let r = utility_loss_table(&[PHI_B], &[vec![14]], &[7]);
        assert!(matches!(r, Err(Error::InfeasibleNetwork { .. })));
    }

    #[test]
    fn multi_class_picks_smallest_class() {
        assert_eq!(
            multi_class_optimum(&[PHI_A, PHI_B, PHI_C]).unwrap(),
            vec![25, 0, 0]
        );
    }

    #[test]
    fn exact_identical_candidates() {
        let cands = vec![
            Candidate {
                size: 0.0718,
                gain: 1.0
            };
            12
        ];
        let chosen = select_exact(&cands).unwrap();
        assert_eq!(chosen.len(), single_class_optimum(0.0718).unwrap() as usize);
        // lexicographically smallest among equal-utility sets
        assert_eq!(chosen, (0..chosen.len()).collect::<Vec<_>>());
    }

    #[test]
    fn exact_size_limit() {
        let cands = vec![
            Candidate {
                size: 0.01,
                gain: 1.0
            };
            21
        ];
        assert!(matches!(select_exact(&cands), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn lex_order() {
        assert!(lex_less(0b011, 0b101)); // [0,1] < [0,2]
        assert!(lex_less(0b001, 0b011)); // [0] < [0,1]
        assert!(lex_less(0b101, 0b010)); // [0,2] < [1]
        assert!(!lex_less(0b010, 0b010));
    }

    #[test]
    fn in_order_admission_stops_at_capacity() {
        let cands = vec![
            Candidate {
                size: PHI_B,
                gain: 1.0
            };
            20
        ];
        assert_eq!(admit_in_order(&cands).len(), 13);
    }

    #[test]
    fn greedy_matches_exact_on_classes() {
        let mut cands = vec![
            Candidate {
                size: PHI_C,
                gain: 1.0
            };
            3
        ];
        cands.extend(vec![
            Candidate {
                size: PHI_B,
                gain: 1.0
            };
            4
        ]);
        cands.extend(vec![
            Candidate {
                size: PHI_A,
                gain: 1.0
            };
            13
        ]);
        let exact = select_exact(&cands).unwrap();
        let greedy = select_greedy(&cands);
        let (je, jg) = (objective(&cands, &exact), objective(&cands, &greedy));
        assert!((je - jg).abs() < 1e-12 * je);
        assert!(exact.iter().all(|&i| cands[i].size == PHI_A));
    }
}
