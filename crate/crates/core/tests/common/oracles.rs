use std::collections::HashMap;

use stylo::baselines::BOUNDARY;
use stylo::eval::SegmentPrediction;
use stylo::numkernel::Rng;

/// Every window enumerated by index, keyed by the symbol vector.
pub fn brute_force_ngrams(seq: &[String], n_min: usize, n_max: usize) -> HashMap<Vec<String>, usize> {
    let mut out = HashMap::new();
    for start in 0..seq.len() {
        for n in n_min..=n_max {
            if start + n <= seq.len() {
                *out.entry(seq[start..start + n].to_vec()).or_insert(0) += 1;
            }
        }
    }
    out
}

pub fn random_sequence(rng: &mut Rng, alphabet: usize) -> Vec<String> {
    let len = rng.below(40);
    (0..len)
        .map(|_| {
            let k = rng.below(alphabet + 1);
            if k == alphabet {
                BOUNDARY.to_string()
            } else {
                format!("s{k}")
            }
        })
        .collect()
}

pub fn random_probs(rng: &mut Rng, classes: usize) -> Vec<f64> {
    // Coarse values so that vote and mass ties actually occur.
    let raw: Vec<f64> = (0..classes).map(|_| rng.below(4) as f64).collect();
    let s: f64 = raw.iter().sum();
    if s == 0.0 {
        vec![1.0 / classes as f64; classes]
    } else {
        raw.iter().map(|x| x / s).collect()
    }
}

/// Candidates with the most votes, then those with the most mass, then the
/// smallest index.
pub fn brute_force_vote(preds: &[SegmentPrediction]) -> usize {
    let classes = preds[0].probs.len();
    let votes: Vec<usize> = (0..classes).map(|c| preds.iter().filter(|p| p.predicted == c).count()).collect();
    let top = *votes.iter().max().unwrap();
    let tied: Vec<usize> = (0..classes).filter(|&c| votes[c] == top).collect();
    let mass = |c: usize| preds.iter().map(|p| p.probs[c]).sum::<f64>();
    let best_mass = tied.iter().map(|&c| mass(c)).fold(f64::NEG_INFINITY, f64::max);
    *tied.iter().find(|&&c| mass(c) == best_mass).unwrap()
}
