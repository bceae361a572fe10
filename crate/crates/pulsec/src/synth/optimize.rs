//! Derivative-free minimization (Nelder-Mead) plus a deterministic
//! multistart driver. Used by the synthesis search for decompositions that
//! have no closed form; the multistart points fan out over worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parallel::par_map;

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_iter: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_iter: 4000,
            f_tol: 1e-12,
            x_tol: 1e-9,
        }
    }
}

/// Classic Nelder-Mead simplex descent. Returns the best point and value.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, opts: NmOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        let v = f(x0);
        return (x0.to_vec(), v);
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let spread = values[n] - values[0];
        let xspread = (0..n)
            .map(|d| {
                simplex
                    .iter()
                    .map(|p| p[d])
                    .fold(f64::NEG_INFINITY, f64::max)
                    - simplex.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        if spread < opts.f_tol && xspread < opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();

        let lerp = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + t * (centroid[d] - simplex[n][d]))
                .collect()
        };

        let xr = lerp(alpha);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = lerp(gamma);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = lerp(rho);
                let v = f(&xc);
                (xc, v)
            } else {
                let xc: Vec<f64> = (0..n)
                    .map(|d| centroid[d] - rho * (centroid[d] - simplex[n][d]))
                    .collect();
                let v = f(&xc);
                (xc, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    for d in 0..n {
                        simplex[i][d] = simplex[0][d] + sigma * (simplex[i][d] - simplex[0][d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
        .unwrap();
    (simplex[best].clone(), values[best])
}

/// Multistart Nelder-Mead: runs descents from `starts` seed points in
/// parallel, then polishes the winner with two restarted descents using a
/// shrinking initial simplex.
pub fn multistart_minimize<F>(
    f: &F,
    starts: Vec<Vec<f64>>,
    step: f64,
    opts: NmOptions,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!starts.is_empty());
    let results = par_map(starts, |x0| nelder_mead(f, &x0, step, opts));
    let mut best = results
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    for shrink in [0.2, 0.02] {
        let polished = nelder_mead(f, &best.0, step * shrink, opts);
        if polished.1 < best.1 {
            best = polished;
        }
    }
    best
}

/// Deterministic bundle of start points: the caller's structured guesses
/// followed by uniform random points in `[-range, range]^dim`.
pub fn seeded_starts(
    structured: Vec<Vec<f64>>,
    dim: usize,
    count: usize,
    range: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = structured;
    starts.retain(|s| s.len() == dim);
    while starts.len() < count {
        starts.push((0..dim).map(|_| rng.gen_range(-range..range)).collect());
    }
    starts.truncate(count);
    starts
}
