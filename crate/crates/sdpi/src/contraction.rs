//! Contraction coefficients of f-divergences for finite channels.
//!
//! For a channel `W` and divergence `D_f`, the contraction coefficient
//!
//! `η_f(W) = sup { D_f(W∘P ‖ W∘Q) / D_f(P ‖ Q) : 0 < D_f(P‖Q) < ∞ }`
//!
//! measures the worst-case shrinkage of the divergence through the channel;
//! the input-restricted variant `η_f(W, Q)` fixes the second argument. Facts
//! used throughout this module:
//!
//! * `η_TV` equals the maximum total variation between two rows of `W`
//!   (the Dobrushin coefficient) and dominates every other `η_f`.
//! * For fixed `Q`, `η_χ²(W, Q)` is the squared second-largest singular
//!   value of the normalized joint matrix `diag(Q)^½ · W · diag(W∘Q)^{−½}`
//!   (equivalently, the squared maximal correlation of the joint law).
//! * `η_KL(W) = η_χ²(W) = sup_Q η_χ²(W, Q)`, so the KL coefficient is
//!   computed spectrally.
//! * For binary-input channels, `η_KL(W) = sup_{β∈(0,1)} LC_β(row₀ ‖ row₁)`,
//!   a one-dimensional concave maximization solved exactly.
//! * `η_KL(W, Q) < 1` iff the bipartite support graph
//!   `{(x, y) : Q(x) > 0, W(y|x) > 0}` is connected.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{push_forward, Channel};
use crate::numerics::{golden_max, nelder_mead_max, sample_dirichlet, simplex_grid, softmax};
use crate::probcore::{divergence, Distribution, DivergenceKind};
use crate::{Error, Result};

/// How an [`EtaReport`] obtained its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EtaMethod {
    /// Degenerate cases settled exactly by the Dobrushin coefficient
    /// (identical rows ⇒ 0; disconnected support graph ⇒ 1).
    DobrushinExact,
    /// Supremum of spectral values over input distributions via grid plus
    /// multi-start ascent (a lower bound, not certified).
    SpectralSup,
    /// Exact binary-input path through the Le Cam supremum.
    LecamBinaryExact,
    /// Simplex-grid evaluation only (lower bound, no ascent).
    GridLowerBound,
}

impl std::fmt::Display for EtaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EtaMethod::DobrushinExact => "DOBRUSHIN_EXACT",
            EtaMethod::SpectralSup => "SPECTRAL_SUP",
            EtaMethod::LecamBinaryExact => "LECAM_BINARY_EXACT",
            EtaMethod::GridLowerBound => "GRID_LOWER_BOUND",
        };
        f.write_str(s)
    }
}

/// Which fields of an [`EtaReport`] are certified exact (as opposed to
/// certified lower bounds from incomplete optimization).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedFlags {
    pub eta_tv: bool,
    pub eta_chi2_sup: bool,
    pub eta_kl: bool,
}

/// Contraction-coefficient report for a channel.
///
/// Invariants: `eta_kl == eta_chi2_sup` (both fields are filled from the one
/// spectral computation) and `eta_chi2_sup ≤ eta_tv + 1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta_tv: f64,
    pub eta_chi2_sup: f64,
    pub eta_kl: f64,
    pub method: EtaMethod,
    pub certified: CertifiedFlags,
}

impl EtaReport {
    /// Checks the report's structural invariants.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_tv", self.eta_tv),
            ("eta_chi2_sup", self.eta_chi2_sup),
            ("eta_kl", self.eta_kl),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} lies outside [0,1]"
                )));
            }
        }
        if self.eta_kl != self.eta_chi2_sup {
            return Err(Error::InvalidParameter(format!(
                "eta_kl = {} must equal eta_chi2_sup = {}",
                self.eta_kl, self.eta_chi2_sup
            )));
        }
        if self.eta_chi2_sup > self.eta_tv + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "eta_chi2_sup = {} exceeds eta_tv = {} beyond 1e-9",
                self.eta_chi2_sup, self.eta_tv
            )));
        }
        Ok(())
    }
}

/// Options for [`eta_kl`]'s optimization path (ignored on exact paths).
#[derive(Debug, Clone)]
pub struct EtaOptions {
    /// Seed for any randomized restarts beyond the deterministic grid.
    pub seed: u64,
    /// Simplex-grid mesh denominator; `None` picks an input-size-adaptive
    /// default.
    pub grid_denom: Option<usize>,
    /// Number of local-ascent multistarts seeded from the best grid points
    /// (0 disables ascent and reports a pure grid lower bound).
    pub multistarts: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            grid_denom: None,
            multistarts: 20,
        }
    }
}

/// Dobrushin coefficient: maximum total variation between two rows. Exact.
pub fn eta_tv(w: &Channel) -> f64 {
    let n = w.input_size();
    let mut best = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let tv = 0.5
                * w.row_slice(a)
                    .iter()
                    .zip(w.row_slice(b))
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>();
            best = best.max(tv);
        }
    }
    best.min(1.0)
}

struct Chi2Spectral {
    value: f64,
    /// Zero-sum perturbation direction in input space attaining the value
    /// locally (absent when the channel is degenerate on the support).
    direction: Option<Vec<f64>>,
}

/// Spectral computation of `η_χ²(w, p)` with the optimal perturbation
/// direction. Inputs outside `supp(p)` and outputs with zero induced mass are
/// dropped before normalization.
fn eta_chi2_spectral(w: &Channel, p: &Distribution) -> Result<Chi2Spectral> {
    if p.len() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: w.input_size(),
        });
    }
    let in_idx: Vec<usize> = (0..p.len()).filter(|&x| p.prob(x) > 0.0).collect();
    if in_idx.len() < 2 {
        return Err(Error::InvalidParameter(
            "second-argument distribution must not be a point mass".into(),
        ));
    }
    let q = push_forward(w, p)?;
    let out_idx: Vec<usize> = (0..q.len()).filter(|&y| q.prob(y) > 0.0).collect();
    let (nx, ny) = (in_idx.len(), out_idx.len());
    if ny < 2 {
        // Everything maps to one output: maximal correlation 0.
        return Ok(Chi2Spectral {
            value: 0.0,
            direction: None,
        });
    }
    let sqrt_p: Vec<f64> = in_idx.iter().map(|&x| p.prob(x).sqrt()).collect();
    let sqrt_q: Vec<f64> = out_idx.iter().map(|&y| q.prob(y).sqrt()).collect();
    let m_entry = |i: usize, j: usize| sqrt_p[i] * w.prob(in_idx[i], out_idx[j]) / sqrt_q[j];

    let (sigma2_sq, u2) = if nx.max(ny) <= 64 {
        let m = DMatrix::from_fn(nx, ny, m_entry);
        let svd = m.svd(true, false);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        if order.len() < 2 {
            (0.0, None)
        } else {
            let second = order[1];
            let sigma = svd.singular_values[second];
            let u = svd.u.as_ref().expect("u requested");
            let u2: Vec<f64> = (0..nx).map(|i| u[(i, second)]).collect();
            (sigma * sigma, Some(u2))
        }
    } else {
        // Power iteration on the deflated Gram operator. The top singular
        // pair is known analytically: (1, √p, √q).
        let matvec = |v: &[f64]| -> Vec<f64> {
            let mut y = vec![0.0; nx];
            for (i, yi) in y.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..ny {
                    s += m_entry(i, j) * v[j];
                }
                *yi = s;
            }
            y
        };
        let matvec_t = |y: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; ny];
            for (j, vj) in v.iter_mut().enumerate() {
                let mut s = 0.0;
                for i in 0..nx {
                    s += m_entry(i, j) * y[i];
                }
                *vj = s;
            }
            v
        };
        let deflate = |v: &mut [f64]| {
            let dot: f64 = v.iter().zip(&sqrt_q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(&sqrt_q) {
                *vi -= dot * qi;
            }
        };
        let mut v: Vec<f64> = (0..ny)
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        deflate(&mut v);
        let mut norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            v = vec![0.0; ny];
            v[0] = 1.0;
            deflate(&mut v);
            norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        for vi in &mut v {
            *vi /= norm;
        }
        let mut lambda_prev = f64::NAN;
        let mut lambda = 0.0;
        for _ in 0..100_000 {
            let y = matvec(&v);
            let mut z = matvec_t(&y);
            deflate(&mut z);
            lambda = v.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
            let zn: f64 = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            if zn < 1e-300 {
                lambda = 0.0;
                break;
            }
            for (vi, zi) in v.iter_mut().zip(&z) {
                *vi = zi / zn;
            }
            if (lambda - lambda_prev).abs() <= 1e-13 * lambda.abs().max(1.0) {
                break;
            }
            lambda_prev = lambda;
        }
        let lambda = lambda.max(0.0);
        if lambda > 0.0 {
            let y = matvec(&v);
            let yn: f64 = y.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u2: Option<Vec<f64>> = if yn > 0.0 {
                Some(y.into_iter().map(|x| x / yn).collect())
            } else {
                None
            };
            (lambda, u2)
        } else {
            (lambda, None)
        }
    };

    let direction = u2.map(|u| {
        let mut d = vec![0.0; p.len()];
        for (k, &x) in in_idx.iter().enumerate() {
            d[x] = u[k] * sqrt_p[k];
        }
        // The direction is orthogonal to √p in theory; remove any numerical
        // drift of total mass so q + ε·d stays on the simplex.
        let mean: f64 = d.iter().sum::<f64>() / in_idx.len() as f64;
        for &x in &in_idx {
            d[x] -= mean;
        }
        d
    });
    Ok(Chi2Spectral {
        value: sigma2_sq.clamp(0.0, 1.0),
        direction,
    })
}

/// Fixed-input chi-squared contraction coefficient `η_χ²(w, p)`: the squared
/// second-largest singular value of the normalized joint matrix, equal to the
/// squared maximal correlation of the joint law `p × w`.
///
/// Errors when `p` is a point mass; returns 0 for channels whose rows agree
/// on the support of `p`.
pub fn eta_chi2_at(w: &Channel, p: &Distribution) -> Result<f64> {
    Ok(eta_chi2_spectral(w, p)?.value)
}

/// Supremum of the Le Cam divergence over the weight: `sup_β LC_β(p‖q)`.
///
/// Writing `LC_β = 1 − ∑ᵢ pᵢqᵢ/(βpᵢ + β̄qᵢ)` shows `β ↦ LC_β` is concave
/// (each summand is convex in β), so golden-section search is exact; a
/// unimodality pre-scan guards the assumption and falls back to a dense
/// 10⁴-point grid if it ever failed. Returns `(value, argmax β)`.
pub fn lc_sup(p: &Distribution, q: &Distribution) -> Result<(f64, f64)> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let lc = |beta: f64| -> f64 {
        let bb = beta * (1.0 - beta);
        let mut s = 0.0;
        for (&a, &b) in p.as_slice().iter().zip(q.as_slice()) {
            let mix = beta * a + (1.0 - beta) * b;
            if mix > 0.0 {
                s += (a - b) * (a - b) / mix;
            }
        }
        bb * s
    };
    const EPS: f64 = 1e-9;
    const COARSE: usize = 129;
    let grid: Vec<f64> = (0..COARSE)
        .map(|k| EPS + (1.0 - 2.0 * EPS) * k as f64 / (COARSE - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&b| lc(b)).collect();
    let mut argmax = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[argmax] {
            argmax = i;
        }
    }
    let scale = vals[argmax].abs().max(1.0);
    let unimodal = (0..argmax).all(|i| vals[i] <= vals[i + 1] + 1e-12 * scale)
        && (argmax..COARSE - 1).all(|i| vals[i] >= vals[i + 1] - 1e-12 * scale);
    if unimodal {
        let lo = grid[argmax.saturating_sub(1)];
        let hi = grid[(argmax + 1).min(COARSE - 1)];
        let (beta, value) = golden_max(lc, lo, hi, 1e-12);
        if value >= vals[argmax] {
            return Ok((value.min(1.0), beta));
        }
        return Ok((vals[argmax].min(1.0), grid[argmax]));
    }
    // Fallback: dense grid plus local polish around its best cell.
    let mut best = (vals[argmax], grid[argmax]);
    const DENSE: usize = 10_000;
    for k in 0..=DENSE {
        let b = EPS + (1.0 - 2.0 * EPS) * k as f64 / DENSE as f64;
        let v = lc(b);
        if v > best.0 {
            best = (v, b);
        }
    }
    let width = 1.0 / DENSE as f64;
    let (beta, value) = golden_max(
        lc,
        (best.1 - width).max(EPS),
        (best.1 + width).min(1.0 - EPS),
        1e-12,
    );
    if value > best.0 {
        best = (value, beta);
    }
    Ok((best.0.min(1.0), best.1))
}

/// True iff the bipartite support graph `{(x, y) : p(x) > 0, w(y|x) > 0}` is
/// connected — equivalently, iff `η_KL(w, p) < 1`.
pub fn is_contractive(w: &Channel, p: &Distribution) -> Result<bool> {
    if p.len() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: w.input_size(),
        });
    }
    let supported: Vec<usize> = (0..p.len()).filter(|&x| p.prob(x) > 0.0).collect();
    if supported.len() <= 1 {
        return Ok(true);
    }
    // Two supported inputs are adjacent when they share an output symbol.
    let mut outputs_to_inputs: Vec<Vec<usize>> = vec![Vec::new(); w.output_size()];
    for &x in &supported {
        for y in 0..w.output_size() {
            if w.prob(x, y) > 0.0 {
                outputs_to_inputs[y].push(x);
            }
        }
    }
    let mut seen = vec![false; p.len()];
    let mut stack = vec![supported[0]];
    seen[supported[0]] = true;
    let mut output_used = vec![false; w.output_size()];
    while let Some(x) = stack.pop() {
        for y in 0..w.output_size() {
            if w.prob(x, y) > 0.0 && !output_used[y] {
                output_used[y] = true;
                for &x2 in &outputs_to_inputs[y] {
                    if !seen[x2] {
                        seen[x2] = true;
                        stack.push(x2);
                    }
                }
            }
        }
    }
    Ok(supported.iter().all(|&x| seen[x]))
}

/// Lower bound on `sup_p η_χ²(w, p)` by simplex-grid evaluation, pairwise
/// support-line searches, and multi-start local ascent in softmax coordinates.
/// Deterministic for fixed options.
pub fn eta_chi2_sup_lower(w: &Channel, opts: &EtaOptions) -> f64 {
    let d = w.input_size();
    if d < 2 {
        return 0.0;
    }
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut best = 0.0_f64;
    let mut consider = |val: f64, p: &[f64], keep: &mut Vec<(f64, Vec<f64>)>| {
        if val > best {
            best = val;
        }
        keep.push((val, p.to_vec()));
    };

    // Simplex grid, mesh adapted to the alphabet size.
    let mut denom = opts.grid_denom.unwrap_or(match d {
        2 => 64,
        3 => 32,
        4 => 12,
        5 => 8,
        6 => 6,
        _ => 4,
    });
    loop {
        // Number of grid points is C(d-1+denom, denom); shrink until modest.
        let mut count = 1.0_f64;
        for i in 1..d {
            count *= (denom + i) as f64 / i as f64;
        }
        if count <= 20_000.0 || denom <= 2 {
            break;
        }
        denom -= 1;
    }
    for p in simplex_grid(d, denom) {
        if p.iter().filter(|&&v| v > 0.0).count() < 2 {
            continue;
        }
        if let Ok(dist) = Distribution::new(p.clone()) {
            if let Ok(val) = eta_chi2_at(w, &dist) {
                consider(val, &p, &mut candidates);
            }
        }
    }

    // Two-point-support lines: for all input pairs, scan and polish the
    // mixture weight (for binary inputs this covers the entire simplex).
    let eval_pair = |i: usize, j: usize, s: f64| -> f64 {
        let mut p = vec![0.0; d];
        p[i] = 1.0 - s;
        p[j] = s;
        match Distribution::new(p) {
            Ok(dist) => eta_chi2_at(w, &dist).unwrap_or(0.0),
            Err(_) => 0.0,
        }
    };
    const SCAN: usize = 129;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut best_k = 1;
            let mut best_v = f64::NEG_INFINITY;
            for k in 1..SCAN {
                let s = k as f64 / SCAN as f64;
                let v = eval_pair(i, j, s);
                if v > best_v {
                    best_v = v;
                    best_k = k;
                }
            }
            let lo = (best_k as f64 - 1.0) / SCAN as f64;
            let hi = (best_k as f64 + 1.0) / SCAN as f64;
            let (s_star, v_star) = golden_max(|s| eval_pair(i, j, s), lo, hi, 1e-10);
            let v = v_star.max(best_v);
            let s = if v_star >= best_v {
                s_star
            } else {
                best_k as f64 / SCAN as f64
            };
            let mut p = vec![0.0; d];
            p[i] = 1.0 - s;
            p[j] = s;
            consider(v, &p, &mut candidates);
        }
    }

    // Multi-start ascent from the most promising candidates.
    if opts.multistarts > 0 {
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        candidates.truncate(opts.multistarts);
        if candidates.len() < opts.multistarts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            while candidates.len() < opts.multistarts {
                let p = sample_dirichlet(&mut rng, 1.0, d);
                candidates.push((0.0, p));
            }
        }
        let objective = |z: &[f64]| -> f64 {
            let p = softmax(z);
            match Distribution::new(p) {
                Ok(dist) => eta_chi2_at(w, &dist).unwrap_or(0.0),
                Err(_) => 0.0,
            }
        };
        for (_, p) in &candidates {
            let z0: Vec<f64> = p.iter().map(|&v| (v + 1e-6).ln()).collect();
            let (_, val) = nelder_mead_max(objective, &z0, 0.3, 1e-9, 250);
            if val > best {
                best = val;
            }
        }
    }
    best.clamp(0.0, 1.0)
}

/// Full contraction report for a channel: exact Dobrushin `η_TV`, and
/// `η_KL = η_χ²` through the appropriate path (exact for binary inputs and
/// for degenerate channels, optimized lower bound otherwise).
pub fn eta_kl(w: &Channel, opts: &EtaOptions) -> Result<EtaReport> {
    let tv = eta_tv(w);
    // All rows identical: every coefficient is zero, exactly.
    if tv == 0.0 {
        return Ok(EtaReport {
            eta_tv: 0.0,
            eta_chi2_sup: 0.0,
            eta_kl: 0.0,
            method: EtaMethod::DobrushinExact,
            certified: CertifiedFlags {
                eta_tv: true,
                eta_chi2_sup: true,
                eta_kl: true,
            },
        });
    }
    if w.input_size() == 2 {
        let (value, _beta) = lc_sup(&w.row(0), &w.row(1))?;
        let report = EtaReport {
            eta_tv: tv,
            eta_chi2_sup: value,
            eta_kl: value,
            method: EtaMethod::LecamBinaryExact,
            certified: CertifiedFlags {
                eta_tv: true,
                eta_chi2_sup: true,
                eta_kl: true,
            },
        };
        report.validate()?;
        return Ok(report);
    }
    // Disconnected support graph under a full-support input: η = 1 exactly.
    let uniform = Distribution::uniform(w.input_size())?;
    if !is_contractive(w, &uniform)? {
        return Ok(EtaReport {
            eta_tv: 1.0,
            eta_chi2_sup: 1.0,
            eta_kl: 1.0,
            method: EtaMethod::DobrushinExact,
            certified: CertifiedFlags {
                eta_tv: true,
                eta_chi2_sup: true,
                eta_kl: true,
            },
        });
    }
    let lower = eta_chi2_sup_lower(w, opts);
    let method = if opts.multistarts > 0 {
        EtaMethod::SpectralSup
    } else {
        EtaMethod::GridLowerBound
    };
    let report = EtaReport {
        eta_tv: tv,
        eta_chi2_sup: lower,
        eta_kl: lower,
        method,
        certified: CertifiedFlags {
            eta_tv: true,
            eta_chi2_sup: false,
            eta_kl: false,
        },
    };
    report.validate()?;
    Ok(report)
}

/// Certified **upper** bound on the unrestricted KL contraction
/// coefficient: exact for binary-input channels (the Le Cam supremum),
/// the Dobrushin total-variation coefficient otherwise. Safe wherever a
/// sound upper bound is required (network bounds, erasure comparison).
pub fn eta_kl_certified_upper(w: &Channel) -> Result<f64> {
    if w.input_size() == 2 {
        Ok(lc_sup(&w.row(0), &w.row(1))?.0)
    } else {
        Ok(eta_tv(w))
    }
}

fn check_bsc_power_params(delta: f64, n: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "crossover probability must lie in [0,1], got {delta}"
        )));
    }
    if n == 0 || n > 64 {
        return Err(Error::InvalidParameter(format!(
            "tensor power must lie in 1..=64, got {n}"
        )));
    }
    Ok(())
}

/// Exact Dobrushin coefficient of the `n`-fold tensor power of a binary
/// symmetric channel, without materializing the `2ⁿ × 2ⁿ` matrix: the
/// maximum row-pair total variation is attained by the two complementary
/// extreme rows, whose total variation collapses over Hamming weight to
/// `½ ∑ₖ C(n,k) |δ̄^{n−k} δ^k − δ^{n−k} δ̄^k|`.
pub fn bsc_tensor_eta_tv_exact(delta: f64, n: u32) -> Result<f64> {
    check_bsc_power_params(delta, n)?;
    let mut tv = 0.0;
    let mut c = 1.0; // C(n, k), updated multiplicatively
    for k in 0..=n {
        let a = (1.0 - delta).powi((n - k) as i32) * delta.powi(k as i32);
        let b = delta.powi((n - k) as i32) * (1.0 - delta).powi(k as i32);
        tv += 0.5 * c * (a - b).abs();
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(tv.min(1.0))
}

/// Closed-form upper bounds on the contraction of the `n`-fold binary
/// symmetric tensor power: `(1 − (4δδ̄)ⁿ, 1 − (2δ)ⁿ)` — the first bounds the
/// KL coefficient even with feedback, the second the Dobrushin coefficient.
/// Requires `δ ∈ (0, ½)` where both expressions are valid bounds.
pub fn bsc_tensor_eta_bounds(delta: f64, n: u32) -> Result<(f64, f64)> {
    check_bsc_power_params(delta, n)?;
    if delta >= 0.5 || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bounds need a crossover probability in (0, ½), got {delta}"
        )));
    }
    let kl = 1.0 - (4.0 * delta * (1.0 - delta)).powi(n as i32);
    let tv = 1.0 - (2.0 * delta).powi(n as i32);
    Ok((kl, tv))
}

/// Certified lower bound on the KL contraction coefficient of the `n`-fold
/// binary symmetric tensor power: the Le Cam supremum of the two extreme
/// rows, collapsed over Hamming weight (a sufficient statistic for that
/// pair), so no `2ⁿ`-sized object is built. Restricting the input to the
/// two extreme words can only shrink the coefficient.
pub fn bsc_tensor_eta_kl_lower(delta: f64, n: u32) -> Result<f64> {
    check_bsc_power_params(delta, n)?;
    let mut p = Vec::with_capacity(n as usize + 1);
    let mut q = Vec::with_capacity(n as usize + 1);
    let mut c = 1.0; // C(n, k), updated multiplicatively
    for k in 0..=n {
        p.push(c * (1.0 - delta).powi((n - k) as i32) * delta.powi(k as i32));
        q.push(c * delta.powi((n - k) as i32) * (1.0 - delta).powi(k as i32));
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(lc_sup(&Distribution::new(p)?, &Distribution::new(q)?)?.0)
}

/// Bounds on the input-restricted `η_KL(w, q)`:
/// `(lower, upper) = (η_χ²(w, q), min(1, η_χ²(w, q)/min_x q(x)))`.
/// The min-mass upper bound needs `q` strictly positive; otherwise only the
/// lower bound is returned.
pub fn eta_kl_upper_bounds(w: &Channel, q: &Distribution) -> Result<(f64, Option<f64>)> {
    let lower = eta_chi2_at(w, q)?;
    let upper = if q.has_full_support() {
        Some((lower / q.min_prob()).min(1.0))
    } else {
        None
    };
    Ok((lower, upper))
}

/// Brute-force lower-bound oracle for `η_f(w, q)`: the best ratio
/// `D_f(W∘P ‖ W∘Q) / D_f(P ‖ Q)` over sampled `P` (uniform and
/// boundary-biased Dirichlet draws), mixture scans toward `q` along point
/// masses and the spectral perturbation direction, and local refinement of
/// the best candidates. Deterministic for a fixed seed; every returned value
/// is a genuine divergence ratio, hence a lower bound on `η_f(w, q)`.
pub fn eta_f_ratio_oracle(
    w: &Channel,
    kind: DivergenceKind,
    q: &Distribution,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if q.len() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: q.len(),
            right: w.input_size(),
        });
    }
    if q.as_slice().iter().filter(|&&v| v > 0.0).count() < 2 {
        return Err(Error::InvalidParameter(
            "second-argument distribution must not be a point mass".into(),
        ));
    }
    let wq = push_forward(w, q)?;
    let n = q.len();
    let ratio = |pv: &[f64]| -> Option<f64> {
        let p = Distribution::new(pv.to_vec()).ok()?;
        let den = divergence(kind, &p, q).ok()?;
        // A computed divergence carries ~1e-16 absolute noise (log-argument
        // rounding) that does not shrink with ‖P−q‖, while the true value is
        // quadratic in ‖P−q‖. Below this floor the ratio noise would exceed
        // 1e-9; probes that close to q add nothing over the ε-ladder anyway.
        if !den.is_finite() || den <= 1e-6 {
            return None;
        }
        let wp = push_forward(w, &p).ok()?;
        let num = divergence(kind, &wp, &wq).ok()?;
        if !num.is_finite() {
            return None;
        }
        Some(num / den)
    };

    let mut best = 0.0_f64;
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let consider = |val: f64, p: Vec<f64>, best: &mut f64, top: &mut Vec<(f64, Vec<f64>)>| {
        if val > *best {
            *best = val;
        }
        top.push((val, p));
        if top.len() > 24 {
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(12);
        }
    };

    // Random sampling: uniform and boundary-biased halves.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let alpha = if trial % 2 == 0 { 1.0 } else { 0.1 };
        let p = sample_dirichlet(&mut rng, alpha, n);
        if let Some(v) = ratio(&p) {
            consider(v, p, &mut best, &mut top);
        }
    }

    // Mixture scans toward q: point-mass directions and the spectral one.
    const EPS_LADDER: [f64; 9] = [0.5, 0.2, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4];
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut d: Vec<f64> = q.as_slice().iter().map(|&v| -v).collect();
        d[i] += 1.0;
        directions.push(d);
    }
    if let Ok(spec) = eta_chi2_spectral(w, q) {
        if let Some(dir) = spec.direction {
            // Largest step keeping q + τ·dir non-negative.
            let mut tau = f64::INFINITY;
            for (x, &dx) in dir.iter().enumerate() {
                if dx < 0.0 {
                    tau = tau.min(-q.prob(x) / dx);
                }
            }
            if tau.is_finite() && tau > 0.0 {
                directions.push(dir.iter().map(|&dx| dx * tau).collect());
            }
        }
    }
    for dir in &directions {
        for &eps in &EPS_LADDER {
            let p: Vec<f64> = q
                .as_slice()
                .iter()
                .zip(dir)
                .map(|(&qi, &di)| (qi + eps * di).max(0.0))
                .collect();
            if let Some(v) = ratio(&p) {
                consider(v, p, &mut best, &mut top);
            }
        }
    }

    // Local refinement of the best candidates.
    top.sort_by(|a, b| b.0.total_cmp(&a.0));
    top.truncate(5);
    let starts: Vec<Vec<f64>> = top.iter().map(|(_, p)| p.clone()).collect();
    for p in &starts {
        let z0: Vec<f64> = p.iter().map(|&v| (v + 1e-9).ln()).collect();
        let (z_best, val) = nelder_mead_max(
            |z| ratio(&softmax(z)).unwrap_or(-1.0),
            &z0,
            0.25,
            1e-9,
            200,
        );
        if val > best {
            best = val;
        }
        // Mixture scan from the refined point toward q.
        let p_ref = softmax(&z_best);
        for &eps in &EPS_LADDER {
            let p: Vec<f64> = q
                .as_slice()
                .iter()
                .zip(&p_ref)
                .map(|(&qi, &pi)| (1.0 - eps) * qi + eps * pi)
                .collect();
            if let Some(v) = ratio(&p) {
                if v > best {
                    best = v;
                }
            }
        }
    }
    Ok(best)
}

/// Sandwich of the binary-input contraction coefficient by Hellinger
/// quantities, evaluated literally and as a diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HellingerSandwich {
    /// `H²(row₀, row₁) / 2` — the lower bound.
    pub lower: f64,
    /// The exact binary-input coefficient `sup_β LC_β`.
    pub eta: f64,
    /// The literal quartic upper bound `H² − H⁴/2`.
    pub upper: f64,
    /// The alternative quartic form `H² − H⁴/4` (the Cauchy–Schwarz route
    /// yields this constant; included for comparison).
    pub upper_quartic_quarter: f64,
    /// Whether `lower ≤ eta ≤ upper` holds with `1e-9` slack.
    pub literal_holds: bool,
    /// Whether `lower ≤ eta ≤ H² − H⁴/4` holds with `1e-9` slack.
    pub quarter_holds: bool,
}

/// Evaluates the Hellinger sandwich `(H²/2, η, H² − H⁴/2)` for a binary-input
/// channel. This is a soft check: violations of the literal upper bound are
/// reported in the flags, not asserted (see the crate tests for the recorded
/// behavior of each quartic form).
pub fn hellinger_sandwich_check(w: &Channel) -> Result<HellingerSandwich> {
    if w.input_size() != 2 {
        return Err(Error::InvalidParameter(format!(
            "Hellinger sandwich needs a binary-input channel, got {} inputs",
            w.input_size()
        )));
    }
    let p = w.row(0);
    let q = w.row(1);
    let h2 = divergence(DivergenceKind::HellingerSq, &p, &q)?;
    let (eta, _) = lc_sup(&p, &q)?;
    let lower = h2 / 2.0;
    let upper = h2 - h2 * h2 / 2.0;
    let upper_quarter = h2 - h2 * h2 / 4.0;
    Ok(HellingerSandwich {
        lower,
        eta,
        upper,
        upper_quartic_quarter: upper_quarter,
        literal_holds: lower <= eta + 1e-9 && eta <= upper + 1e-9,
        quarter_holds: lower <= eta + 1e-9 && eta <= upper_quarter + 1e-9,
    })
}
