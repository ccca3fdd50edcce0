//! Shared numeric helpers: entropy functions, quadrature, one-dimensional and
//! simplex optimizers, and small binomial utilities.
//!
//! Everything here is deterministic; the optimizers take explicit starting
//! data rather than drawing randomness themselves.

/// `x · ln x` with the convention `0 · ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in bits: `h(p) = -p log₂ p - (1-p) log₂ (1-p)`.
pub fn h_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(xlnx(p) + xlnx(1.0 - p)) / std::f64::consts::LN_2
}

/// Inverse of [`h_bits`] on `[0, ½]`, by bisection to `1e-12` (capped at 200
/// iterations). Input is clamped to `[0, 1]`.
pub fn h_inv_bits(y: f64) -> f64 {
    let y = y.clamp(0.0, 1.0);
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_bits(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Binary convolution `a * b = a(1-b) + b(1-a)`: the crossover probability of
/// two cascaded binary symmetric channels.
pub fn binary_convolve(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Binomial probability `P[Binom(n, p) = k]`, by direct accumulation of the
/// product `C(n,k) p^k (1-p)^{n-k}`. Intended for the small `n` (≤ 64) used
/// throughout; accurate to full precision there.
pub fn binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    // Multiply binomial-coefficient factors and probability factors together
    // to keep intermediates in range even for moderate n.
    let q = 1.0 - p;
    let mut acc = 0.0_f64; // log-space accumulator
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    if p > 0.0 {
        acc += (k as f64) * p.ln();
    } else if k > 0 {
        return 0.0;
    }
    if q > 0.0 {
        acc += ((n - k) as f64) * q.ln();
    } else if n - k > 0 {
        return 0.0;
    }
    acc.exp()
}

/// Binomial CDF `P[Binom(n, p) ≤ k]` for signed `k` (negative ⇒ 0).
pub fn binom_cdf(n: usize, k: i64, p: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = (k as usize).min(n);
    let mut s = 0.0;
    for j in 0..=k {
        s += binom_pmf(n, j, p);
    }
    s.min(1.0)
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`. Tolerance is on the argument.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9; // 1/φ
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fc >= fd && fc >= fx {
        (c, fc)
    } else if fd >= fx {
        (d, fd)
    } else {
        (x, fx)
    }
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial `P_m`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1, "quadrature order must be positive");
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        // Standard initial guess for the i-th root of P_m.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_m and P_m' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let dpm = if m == 1 {
                1.0
            } else {
                (m as f64) * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = pm / dpm;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0_f64, x);
        for k in 2..=m {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dpm = if m == 1 {
            1.0
        } else {
            (m as f64) * (x * p1 - p0) / (x * x - 1.0)
        };
        let w = 2.0 / ((1.0 - x * x) * dpm * dpm);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Integrate `f` over `[lo, hi]` with an `m`-point Gauss–Legendre rule.
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rule: &[(f64, f64)]) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Nelder–Mead maximization of `f` over `R^d`, starting from `x0` with the
/// given initial step. Deterministic. Returns `(argmax, max)`.
///
/// The stop rule is simplex diameter ≤ `diam_tol` (a derivative-free stand-in
/// for a vanishing-gradient test) or `max_iter` reflections.
pub fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    diam_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    if d == 0 {
        let v = f(x0);
        return (x0.to_vec(), v);
    }
    // Work with negated values so the classic minimizing formulation applies.
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    pts.push(x0.to_vec());
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| -f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        // Order ascending by negated value (best first).
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let reorder_p: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
        let reorder_v: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
        pts = reorder_p;
        vals = reorder_v;

        let diam = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if diam <= diam_tol {
            break;
        }

        let centroid: Vec<f64> = (0..d)
            .map(|j| pts[..d].iter().map(|p| p[j]).sum::<f64>() / d as f64)
            .collect();
        let worst = pts[d].clone();
        let reflect: Vec<f64> = (0..d)
            .map(|j| centroid[j] + alpha * (centroid[j] - worst[j]))
            .collect();
        let fr = -f(&reflect);

        if fr < vals[0] {
            let expand: Vec<f64> = (0..d)
                .map(|j| centroid[j] + gamma * (centroid[j] - worst[j]))
                .collect();
            let fe = -f(&expand);
            if fe < fr {
                pts[d] = expand;
                vals[d] = fe;
            } else {
                pts[d] = reflect;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = reflect;
            vals[d] = fr;
        } else {
            let contract: Vec<f64> = (0..d)
                .map(|j| centroid[j] + rho * (worst[j] - centroid[j]))
                .collect();
            let fc = -f(&contract);
            if fc < vals[d] {
                pts[d] = contract;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    let p: Vec<f64> = (0..d)
                        .map(|j| pts[0][j] + sigma * (pts[i][j] - pts[0][j]))
                        .collect();
                    vals[i] = -f(&p);
                    pts[i] = p;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=d {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    (pts[best].clone(), -vals[best])
}

/// Softmax onto the probability simplex (numerically shifted).
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// All compositions of `denom` into `parts` summing parts, scaled to the
/// simplex: the regular grid of mesh `1/denom` on the `(parts-1)`-simplex.
pub fn simplex_grid(parts: usize, denom: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, denom: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / denom as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(parts - 1, denom, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(parts, denom, denom, &mut cur, &mut out);
    out
}

/// Draws a symmetric Dirichlet(α,…,α) vector of length `n` by Gamma
/// normalization (works for runtime-sized alphabets).
pub fn sample_dirichlet<R: rand::Rng + ?Sized>(rng: &mut R, alpha: f64, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution as _, Gamma};
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // Tiny shapes can underflow every coordinate; retry in that case.
        if total > 1e-290 {
            return draws.into_iter().map(|v| v / total).collect();
        }
    }
}

/// SplitMix64 step, used to derive independent sub-seeds deterministically.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
