//! Measurement statistics: readout probabilities, sampling, and the
//! Hellinger distance used to compare count distributions.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Probability of each bitstring for a pure state of qutrits. Readout is
/// thresholded: level 0 reads as '0', levels 1 and 2 read as '1'.
pub fn bitstring_probs_pure(psi: &Array1<C64>, num_qutrits: usize) -> Vec<(String, f64)> {
    let dim = 3usize.pow(num_qutrits as u32);
    assert_eq!(psi.len(), dim);
    bitstring_probs_from_diag(&(0..dim).map(|i| psi[i].norm_sqr()).collect::<Vec<_>>(), num_qutrits)
}

/// Same for a density matrix (uses the diagonal).
pub fn bitstring_probs_open(rho: &Array2<C64>, num_qutrits: usize) -> Vec<(String, f64)> {
    let dim = 3usize.pow(num_qutrits as u32);
    assert_eq!(rho.nrows(), dim);
    bitstring_probs_from_diag(
        &(0..dim).map(|i| rho[[i, i]].re).collect::<Vec<_>>(),
        num_qutrits,
    )
}

fn bitstring_probs_from_diag(diag: &[f64], num_qutrits: usize) -> Vec<(String, f64)> {
    let mut acc: BTreeMap<String, f64> = BTreeMap::new();
    for (idx, &p) in diag.iter().enumerate() {
        let mut key = String::with_capacity(num_qutrits);
        let mut rem = idx;
        let mut digits = vec![0usize; num_qutrits];
        for d in (0..num_qutrits).rev() {
            digits[d] = rem % 3;
            rem /= 3;
        }
        for &d in &digits {
            key.push(if d == 0 { '0' } else { '1' });
        }
        *acc.entry(key).or_insert(0.0) += p.max(0.0);
    }
    acc.into_iter().collect()
}

/// Draw `shots` samples from a probability list. Deterministic for a given
/// seed; returns only outcomes that occurred.
pub fn sample_counts(
    probs: &[(String, f64)],
    shots: usize,
    seed: u64,
) -> BTreeMap<String, usize> {
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..shots {
        let mut r = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
        let mut chosen = probs.len() - 1;
        for (i, (_, p)) in probs.iter().enumerate() {
            if r < *p {
                chosen = i;
                break;
            }
            r -= p;
        }
        *counts.entry(probs[chosen].0.clone()).or_insert(0) += 1;
    }
    counts
}

/// Hellinger distance `sqrt(1 - sum_i sqrt(p_i q_i))` between two
/// distributions over the union of their keys.
pub fn hellinger(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut bc = 0.0;
    for (k, pv) in p {
        if let Some(qv) = q.get(k) {
            bc += (pv * qv).sqrt();
        }
    }
    (1.0 - bc).max(0.0).sqrt()
}

/// Normalize counts into a distribution.
pub fn counts_to_dist(counts: &BTreeMap<String, usize>) -> BTreeMap<String, f64> {
    let total: usize = counts.values().sum();
    counts
        .iter()
        .map(|(k, &v)| (k.clone(), v as f64 / total.max(1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn hellinger_uniform_vs_point() {
        let u = dist(&[("0", 0.5), ("1", 0.5)]);
        let p = dist(&[("0", 1.0)]);
        let h = hellinger(&u, &p);
        assert!((h - 0.5412).abs() < 1e-4, "H = {h}");
    }

    #[test]
    fn hellinger_extremes() {
        let a = dist(&[("0", 1.0)]);
        let b = dist(&[("1", 1.0)]);
        assert!((hellinger(&a, &b) - 1.0).abs() < 1e-12);
        assert!(hellinger(&a, &a).abs() < 1e-7);
    }

    #[test]
    fn threshold_readout_lumps_leakage() {
        let mut psi = Array1::<C64>::zeros(3);
        psi[0] = C64::new((0.25f64).sqrt(), 0.0);
        psi[1] = C64::new((0.50f64).sqrt(), 0.0);
        psi[2] = C64::new(0.0, (0.25f64).sqrt());
        let probs = bitstring_probs_pure(&psi, 1);
        let m: BTreeMap<_, _> = probs.into_iter().collect();
        assert!((m["0"] - 0.25).abs() < 1e-12);
        assert!((m["1"] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_close() {
        let probs = vec![("00".to_string(), 0.7), ("11".to_string(), 0.3)];
        let a = sample_counts(&probs, 10000, 42);
        let b = sample_counts(&probs, 10000, 42);
        assert_eq!(a, b);
        let f = a["00"] as f64 / 10000.0;
        assert!((f - 0.7).abs() < 0.02);
    }
}
