//! Small dense linear algebra toolkit for 2x2 .. 4x4 complex matrices.
//!
//! Everything here is sized for gate-level work: hand-rolled Jacobi
//! diagonalisation, Kronecker products, and phase-invariant distances.
//! No external LAPACK dependency, so results are bit-reproducible across
//! machines.

use ndarray::Array2;
use num_complex::Complex64;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const DEG: f64 = std::f64::consts::PI / 180.0;

/// Degrees to radians.
pub fn rad(deg: f64) -> f64 {
    deg * DEG
}

/// Fold an angle in degrees into the half-open interval (-180, 180].
pub fn normalize_angle_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().sum()
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Distance between unitaries with the global phase optimised away:
/// `min_phi || U - e^{i phi} V ||_F = sqrt(2n - 2 |tr(V^dag U)|)`.
///
/// Cancellation puts a floor of roughly 3e-8 under this value even for
/// exactly equal inputs; use `phase_aligned_diff` when asserting
/// machine-precision agreement.
pub fn phase_distance(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let n = u.nrows() as f64;
    let t = trace(&dagger(v).dot(u)).norm();
    (2.0 * n - 2.0 * t).max(0.0).sqrt()
}

/// Max elementwise difference after rotating `v` by the phase that best
/// aligns it with `u`. Numerically exact for equal inputs, unlike
/// `phase_distance`.
pub fn phase_aligned_diff(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let t = trace(&dagger(v).dot(u));
    let phase = if t.norm() > 1e-300 {
        t / t.norm()
    } else {
        c(1.0, 0.0)
    };
    u.iter()
        .zip(v.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Determinant by LU with partial pivoting. Matrices here are tiny, so a
/// dense O(n^3) pass is fine.
pub fn det(m: &Array2<C64>) -> C64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut d = c(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[[k, k]].norm();
        for i in k + 1..n {
            if a[[i, k]].norm() > best {
                best = a[[i, k]].norm();
                piv = i;
            }
        }
        if best == 0.0 {
            return c(0.0, 0.0);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[[k, j]];
                a[[k, j]] = a[[piv, j]];
                a[[piv, j]] = tmp;
            }
            d = -d;
        }
        d *= a[[k, k]];
        for i in k + 1..n {
            let f = a[[i, k]] / a[[k, k]];
            for j in k..n {
                let sub = f * a[[k, j]];
                a[[i, j]] -= sub;
            }
        }
    }
    d
}

/// Cyclic Jacobi diagonalisation of a real symmetric matrix.
/// Returns eigenvalues ascending and the matching orthonormal eigenvector
/// columns.
pub fn eigh_real_symmetric(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = 1.0 + m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = cos * mkp - sin * mkq;
                    m[[k, q]] = sin * mkp + cos * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = cos * mpk - sin * mqk;
                    m[[q, k]] = sin * mpk + cos * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = cos * vkp - sin * vkq;
                    v[[k, q]] = sin * vkp + cos * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vecs[[k, col]] = v[[k, i]];
        }
    }
    (vals, vecs)
}

/// Hermitian eigendecomposition through the real-symmetric embedding
/// `[[Re, -Im], [Im, Re]]`. Every eigenvalue of H appears twice in the
/// embedding; a complex Gram-Schmidt pass picks one representative per
/// copy.
pub fn eigh_hermitian(h: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let mut s = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = h[[i, j]].re;
            s[[i, j + n]] = -h[[i, j]].im;
            s[[i + n, j]] = h[[i, j]].im;
            s[[i + n, j + n]] = h[[i, j]].re;
        }
    }
    let (vals2, vecs2) = eigh_real_symmetric(&s);
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Array2::<C64>::zeros((n, n));
    let mut picked: Vec<(f64, Vec<C64>)> = Vec::new();
    for idx in 0..2 * n {
        if picked.len() == n {
            break;
        }
        let lam = vals2[idx];
        let mut v: Vec<C64> = (0..n)
            .map(|k| c(vecs2[[k, idx]], vecs2[[k + n, idx]]))
            .collect();
        // Orthogonalise against previously selected vectors of (numerically)
        // the same eigenvalue; the pair partner projects to zero here.
        for (plam, pv) in &picked {
            if (lam - plam).abs() < 1e-8 * (1.0 + lam.abs()) {
                let dot: C64 = pv.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, pvi) in v.iter_mut().zip(pv.iter()) {
                    *vi -= dot * pvi;
                }
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            picked.push((lam, v));
        }
    }
    assert_eq!(picked.len(), n, "eigenvector selection failed");
    for (col, (lam, v)) in picked.into_iter().enumerate() {
        vals.push(lam);
        for k in 0..n {
            vecs[[k, col]] = v[k];
        }
    }
    (vals, vecs)
}

/// `exp(-i * H * t)` for Hermitian H.
pub fn expm_i_hermitian(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let n = h.nrows();
    let (vals, vecs) = eigh_hermitian(h);
    let mut d = Array2::<C64>::zeros((n, n));
    for k in 0..n {
        d[[k, k]] = c(0.0, -vals[k] * t).exp();
    }
    vecs.dot(&d).dot(&dagger(&vecs))
}

/// Try to factor a 4x4 matrix as `A (x) B` with 2x2 unitary factors.
/// Returns `None` when the residual exceeds `tol`.
pub fn kron_factor_2x2(m: &Array2<C64>, tol: f64) -> Option<(Array2<C64>, Array2<C64>)> {
    assert_eq!(m.dim(), (4, 4));
    let mut best = (0usize, 0usize);
    let mut best_abs = -1.0;
    for i in 0..4 {
        for j in 0..4 {
            if m[[i, j]].norm() > best_abs {
                best_abs = m[[i, j]].norm();
                best = (i, j);
            }
        }
    }
    let (bi, bj) = (best.0 / 2, best.1 / 2);
    let mut b = Array2::<C64>::zeros((2, 2));
    for k in 0..2 {
        for l in 0..2 {
            b[[k, l]] = m[[2 * bi + k, 2 * bj + l]];
        }
    }
    let nb = frobenius_norm(&b);
    if nb < 1e-12 {
        return None;
    }
    let b = b.mapv(|z| z * c(std::f64::consts::SQRT_2 / nb, 0.0));
    let mut a = Array2::<C64>::zeros((2, 2));
    for r in 0..2 {
        for s in 0..2 {
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += b[[k, l]].conj() * m[[2 * r + k, 2 * s + l]];
                }
            }
            a[[r, s]] = acc / c(2.0, 0.0);
        }
    }
    let rebuilt = kron(&a, &b);
    if max_abs_diff(&rebuilt, m) < tol {
        Some((a, b))
    } else {
        None
    }
}

/// Haar-ish random unitary via complex Gram-Schmidt on a Gaussian matrix.
/// Deterministic for a fixed RNG stream; used by tests and benches.
pub fn random_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    use rand::distributions::Distribution;
    let normal = rand_distr_standard_normal();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let mut v: Vec<C64> = (0..n)
                .map(|_| c(normal.sample(rng), normal.sample(rng)))
                .collect();
            for p in &cols {
                let dot: C64 = p.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, pi) in v.iter_mut().zip(p.iter()) {
                    *vi -= dot * pi;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                cols.push(v);
                break;
            }
        }
    }
    let mut u = Array2::<C64>::zeros((n, n));
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            u[[i, j]] = col[i];
        }
    }
    u
}

// Box-Muller standard normal; avoids pulling in rand_distr just for this.
struct StdNormal;

impl rand::distributions::Distribution<f64> for StdNormal {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn rand_distr_standard_normal() -> StdNormal {
    StdNormal
}

/// Golden-section minimization of a scalar function on [lo, hi].
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
