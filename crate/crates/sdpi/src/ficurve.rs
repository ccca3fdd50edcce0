//! Mutual-information transfer curves `F(t) = sup { I(U;Y) : I(U;X) ≤ t }`.
//!
//! All information quantities in this module are measured in **bits**.
//!
//! A [`Curve`] is a piecewise-linear function through validated sample
//! points obeying the three structural laws every transfer curve satisfies:
//! `F(t) ≤ t`, `F(t)/t` nonincreasing, and `t − F(t)` nondecreasing. BSC
//! curves come from the one-step dissipation map
//! `ψ(t) = t − 1 + h(δ ⋆ h⁻¹((1−t)⁺))` ([`bsc_step`]); erasure-channel
//! bounds come from binomial averaging of the single-use curve
//! ([`erasure_fi_bound`]), with linear-code witnesses showing tightness.
//! [`fi_estimate`] produces certified lower-bound curves for arbitrary
//! channels from explicit auxiliary-variable witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::numerics::{
    binary_convolve, binom_cdf, binom_pmf, h_bits, h_inv_bits, nelder_mead_max, sample_dirichlet,
    softmax, splitmix64,
};
use crate::{Error, Result};

/// Slack allowed when validating curve invariants.
pub const CURVE_TOL: f64 = 1e-9;

/// What a curve's values assert about the true transfer curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveKind {
    /// Values are achieved by explicit witnesses: true curve ≥ these.
    FLowerBound,
    /// Values dominate the true curve.
    FUpperBound,
    /// Values equal the true curve (closed forms).
    Exact,
}

/// A piecewise-linear information transfer curve through sample points
/// `(t_i, f_i)` with `0 ≤ t_1 < t_2 < …`.
///
/// Invariants (validated on construction, each with [`CURVE_TOL`] slack):
/// `0 ≤ f_i ≤ t_i`; `f_i/t_i` nonincreasing; `t_i − f_i` nondecreasing.
/// Between points the curve is the chord; below `t_1` it is the chord from
/// the origin; above `t_n` it continues with unit slope (the steepest
/// continuation the third invariant allows, so evaluation of upper-bound
/// curves stays an upper bound).
///
/// Serializes as `{"t": […], "f": […], "interpretation": "F_LOWER_BOUND",
/// "tmax": …}` where `tmax` is the largest knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct Curve {
    t: Vec<f64>,
    f: Vec<f64>,
    kind: CurveKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCurve {
    t: Vec<f64>,
    f: Vec<f64>,
    #[serde(default = "default_kind")]
    interpretation: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tmax: Option<f64>,
}

fn default_kind() -> CurveKind {
    CurveKind::FLowerBound
}

impl TryFrom<RawCurve> for Curve {
    type Error = Error;
    fn try_from(raw: RawCurve) -> Result<Self> {
        let c = Curve::new(raw.t, raw.f)?.with_kind(raw.interpretation);
        if let Some(tmax) = raw.tmax {
            if (tmax - c.domain_max()).abs() > 1e-12 {
                return Err(Error::InvalidCurve(format!(
                    "declared tmax {tmax} does not match the largest knot {}",
                    c.domain_max()
                )));
            }
        }
        Ok(c)
    }
}

impl From<Curve> for RawCurve {
    fn from(c: Curve) -> RawCurve {
        let tmax = Some(c.domain_max());
        RawCurve {
            t: c.t,
            f: c.f,
            interpretation: c.kind,
            tmax,
        }
    }
}

impl Curve {
    /// Validates the invariants and builds the curve (marked
    /// [`CurveKind::FLowerBound`]; see [`Curve::with_kind`]).
    pub fn new(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != f.len() {
            return Err(Error::InvalidCurve(
                "need equally many t and f values, at least one".into(),
            ));
        }
        for (&ti, &fi) in t.iter().zip(&f) {
            if !ti.is_finite() || !fi.is_finite() {
                return Err(Error::InvalidCurve("non-finite curve entry".into()));
            }
            if ti < 0.0 {
                return Err(Error::InvalidCurve(format!("negative argument t = {ti}")));
            }
            if fi < -CURVE_TOL {
                return Err(Error::InvalidCurve(format!("negative value f = {fi}")));
            }
            if fi > ti + CURVE_TOL {
                return Err(Error::InvalidCurve(format!(
                    "f({ti}) = {fi} exceeds t (data processing violated)"
                )));
            }
        }
        for w in t.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidCurve(
                    "arguments must be strictly increasing".into(),
                ));
            }
        }
        for i in 1..t.len() {
            if t[i - 1] > 0.0 {
                let r0 = f[i - 1] / t[i - 1];
                let r1 = f[i] / t[i];
                if r1 > r0 + CURVE_TOL {
                    return Err(Error::InvalidCurve(format!(
                        "f/t increases between t = {} and t = {}",
                        t[i - 1],
                        t[i]
                    )));
                }
            }
            let d0 = t[i - 1] - f[i - 1];
            let d1 = t[i] - f[i];
            if d1 < d0 - CURVE_TOL {
                return Err(Error::InvalidCurve(format!(
                    "t − f decreases between t = {} and t = {}",
                    t[i - 1],
                    t[i]
                )));
            }
        }
        Ok(Curve {
            t,
            f,
            kind: CurveKind::FLowerBound,
        })
    }

    /// Re-labels what the values assert (bounds vs exact).
    pub fn with_kind(mut self, kind: CurveKind) -> Self {
        self.kind = kind;
        self
    }

    /// What the values assert about the true transfer curve.
    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Sample arguments.
    pub fn args(&self) -> &[f64] {
        &self.t
    }

    /// Sample values.
    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// Number of sample points.
    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// Always false; a curve holds at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest sampled argument.
    pub fn domain_max(&self) -> f64 {
        *self.t.last().expect("non-empty")
    }

    /// Evaluates the piecewise-linear curve (chord from the origin below the
    /// first point, unit slope beyond the last).
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "curve argument must be finite and nonnegative, got {t}"
            )));
        }
        let n = self.t.len();
        if t <= self.t[0] {
            if self.t[0] == 0.0 {
                return Ok(self.f[0]);
            }
            return Ok(t * self.f[0] / self.t[0]);
        }
        if t >= self.t[n - 1] {
            return Ok(self.f[n - 1] + (t - self.t[n - 1]));
        }
        let hi = self.t.partition_point(|&x| x < t);
        let (t0, t1) = (self.t[hi - 1], self.t[hi]);
        let (f0, f1) = (self.f[hi - 1], self.f[hi]);
        Ok(f0 + (f1 - f0) * (t - t0) / (t1 - t0))
    }

    /// Largest-slack repair of noisy pointwise lower bounds into a valid
    /// curve that is still a pointwise lower bound of any true transfer
    /// curve dominating the input. Steps: clip at `t`; forward running
    /// maximum (a transfer curve is nondecreasing); backward pass raising
    /// `f_i` to `max(f_{i+1} − (t_{i+1} − t_i), f_{i+1}·t_i/t_{i+1})`
    /// (justified by the `t − F` and `F/t` monotonicity laws).
    pub fn repair_lower_bound(t: Vec<f64>, mut f: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != f.len() {
            return Err(Error::InvalidCurve(
                "need equally many t and f values, at least one".into(),
            ));
        }
        for (&ti, fi) in t.iter().zip(f.iter_mut()) {
            *fi = fi.max(0.0).min(ti);
        }
        for i in 1..f.len() {
            f[i] = f[i].max(f[i - 1]);
        }
        for i in (0..f.len() - 1).rev() {
            let slack = f[i + 1] - (t[i + 1] - t[i]);
            let ratio = if t[i + 1] > 0.0 {
                f[i + 1] * t[i] / t[i + 1]
            } else {
                0.0
            };
            f[i] = f[i].max(slack).max(ratio);
        }
        Curve::new(t, f)
    }

    /// CSV rendering with header `t,value,interpretation`; every row carries
    /// the given interpretation label (for example `upper_bound`).
    pub fn to_csv(&self, interpretation: &str) -> String {
        let mut out = String::from("t,value,interpretation\n");
        for (&ti, &fi) in self.t.iter().zip(&self.f) {
            out.push_str(&format!("{ti},{fi},{interpretation}\n"));
        }
        out
    }
}

/// Upper concave envelope of raw sample points, evaluated back on the same
/// grid: the upper convex hull over the points augmented with the origin.
/// Accepts any finite data with `t` strictly increasing, `0 ≤ f_i ≤ t_i`
/// (the ratio/difference monotonicity laws are *not* required of the input —
/// the envelope restores them, since a concave function through the origin
/// satisfies both). The result dominates the input pointwise and touches it
/// at every hull vertex.
pub fn concavify(t: &[f64], f: &[f64]) -> Result<Curve> {
    if t.is_empty() || t.len() != f.len() {
        return Err(Error::InvalidCurve(
            "need equally many t and f values, at least one".into(),
        ));
    }
    for (&ti, &fi) in t.iter().zip(f) {
        if !ti.is_finite() || !fi.is_finite() || ti < 0.0 {
            return Err(Error::InvalidCurve(
                "envelope input must be finite with t ≥ 0".into(),
            ));
        }
        if fi < -CURVE_TOL || fi > ti + CURVE_TOL {
            return Err(Error::InvalidCurve(format!(
                "envelope input f({ti}) = {fi} outside [0, t]"
            )));
        }
    }
    for w in t.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidCurve(
                "arguments must be strictly increasing".into(),
            ));
        }
    }
    // Upper hull by a monotone (Andrew) scan over origin-augmented points.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(t.len() + 1);
    if t[0] > 0.0 {
        pts.push((0.0, 0.0));
    }
    pts.extend(t.iter().copied().zip(f.iter().map(|&v| v.clamp(0.0, f64::MAX))));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or below chord a–p (counter-clockwise
            // turn required for an upper hull).
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    // Evaluate the hull back on the input grid.
    let mut out = Vec::with_capacity(t.len());
    let mut seg = 0usize;
    for &ti in t {
        while seg + 1 < hull.len() && hull[seg + 1].0 < ti {
            seg += 1;
        }
        let v = if seg + 1 == hull.len() {
            hull[seg].1
        } else {
            let (x0, y0) = hull[seg];
            let (x1, y1) = hull[seg + 1];
            y0 + (y1 - y0) * (ti - x0) / (x1 - x0)
        };
        out.push(v.min(ti).max(0.0));
    }
    Curve::new(t.to_vec(), out)
}

/// One-step information dissipation map of the binary symmetric channel
/// with crossover `δ`, in bits: `ψ(t) = t − 1 + h(δ ⋆ h⁻¹((1−t)⁺))`, where
/// `h` is the binary entropy, `h⁻¹` its inverse on `[0, ½]`, and `⋆` binary
/// convolution. `ψ(0) = 0`, `ψ(1) = h(δ)`, and `ψ(t) = t − (1 − h(δ))` for
/// `t ≥ 1`.
pub fn bsc_step(t: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "crossover must lie in (0, ½], got {delta}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "argument must be finite and nonnegative, got {t}"
        )));
    }
    let a = h_inv_bits((1.0 - t).max(0.0));
    Ok((t - 1.0 + h_bits(binary_convolve(delta, a))).clamp(0.0, t))
}

/// `n`-fold composition `ψⁿ(t)` of [`bsc_step`].
pub fn bsc_step_iter(t: f64, delta: f64, n: usize) -> Result<f64> {
    let mut v = t;
    for _ in 0..n {
        v = bsc_step(v, delta)?;
    }
    Ok(v)
}

/// Exact single-use transfer curve of the BSC: `F(t) = t − ψ(t)`, i.e.
/// `1 − h(δ ⋆ h⁻¹(1−t))` for `t ≤ 1` and the capacity `1 − h(δ)` beyond.
pub fn bsc_fi_exact(t: f64, delta: f64) -> Result<f64> {
    Ok(t - bsc_step(t, delta)?)
}

/// Upper bound on the transfer curve of `n` adaptive (feedback) uses of a
/// BSC: `F(t) ≤ t − ψⁿ(t)`.
pub fn bsc_feedback_fi_bound(t: f64, delta: f64, n: usize) -> Result<f64> {
    Ok((t - bsc_step_iter(t, delta, n)?).max(0.0))
}

/// Exact single-use transfer curve of the `q`-ary erasure channel with
/// erasure probability `δ`: `F(t) = (1−δ)·min(t, log₂ q)`.
pub fn erasure_single_use_fi(t: f64, q: usize, delta: f64) -> Result<f64> {
    check_erasure_params(1, q, delta)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "argument must be finite and nonnegative, got {t}"
        )));
    }
    Ok((1.0 - delta) * t.min((q as f64).log2()))
}

fn check_erasure_params(n: usize, q: usize, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one use".into()));
    }
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet size must be at least 2, got {q}"
        )));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "erasure probability must lie in [0,1], got {delta}"
        )));
    }
    Ok(())
}

/// Upper bound on the transfer curve of `n` (possibly adaptive) uses of a
/// `q`-ary erasure channel: `F(t) ≤ E[min(B·log₂ q, t)]` with
/// `B ~ Binomial(n, 1−δ)`, evaluated in closed form through binomial tail
/// probabilities.
pub fn erasure_fi_bound(t: f64, n: usize, q: usize, delta: f64) -> Result<f64> {
    check_erasure_params(n, q, delta)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "argument must be finite and nonnegative, got {t}"
        )));
    }
    let l = (q as f64).log2();
    let pbar = 1.0 - delta;
    let x = t / l;
    let k = x.floor() as i64;
    // E[min(B, x)] = x + (1−δ)(n−x)·P[B' ≤ k−1] − xδ·P[B' ≤ k], B' ~ Bin(n−1, 1−δ).
    let cdf_km1 = binom_cdf(n - 1, k - 1, pbar);
    let cdf_k = binom_cdf(n - 1, k, pbar);
    let e_min = x + pbar * (n as f64 - x) * cdf_km1 - x * delta * cdf_k;
    Ok(l * e_min)
}

/// [`erasure_fi_bound`] computed by direct summation over the binomial
/// support; kept as an independent cross-check of the closed form.
pub fn erasure_fi_bound_direct(t: f64, n: usize, q: usize, delta: f64) -> Result<f64> {
    check_erasure_params(n, q, delta)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "argument must be finite and nonnegative, got {t}"
        )));
    }
    let l = (q as f64).log2();
    let pbar = 1.0 - delta;
    let mut total = 0.0;
    for b in 0..=n {
        total += binom_pmf(n, b, pbar) * (b as f64 * l).min(t);
    }
    Ok(total)
}

/// Linear codes whose uniform-message ensembles meet the erasure bound with
/// equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessCode {
    /// Rate `1/n`: every coordinate repeats the message symbol.
    Repetition,
    /// Rate `(n−1)/n` over the binary alphabet: message bits plus one
    /// parity bit.
    SingleParity,
}

/// Result of an erasure tightness check: the message rate `t = I(U;Xⁿ)`,
/// the mutual information `I(U; Eⁿ)` the code actually achieves through the
/// erasure channel, and the binomial upper bound at `t`. For the listed
/// codes `achieved = bound`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErasureWitness {
    pub t: f64,
    pub achieved: f64,
    pub bound: f64,
}

/// Computes `I(U; Eⁿ)` exactly for a uniform message over the chosen linear
/// code sent through `n` independent `q`-ary erasure channels, by averaging
/// the entropy of the codeword projection over erasure patterns, and
/// compares it to [`erasure_fi_bound`] at the code rate.
pub fn erasure_tightness_witness(
    n: usize,
    q: usize,
    delta: f64,
    code: WitnessCode,
) -> Result<ErasureWitness> {
    check_erasure_params(n, q, delta)?;
    let k = match code {
        WitnessCode::Repetition => 1usize,
        WitnessCode::SingleParity => {
            if q != 2 {
                return Err(Error::InvalidParameter(
                    "the single-parity witness needs a binary alphabet".into(),
                ));
            }
            if n < 2 {
                return Err(Error::InvalidParameter(
                    "the single-parity witness needs at least two uses".into(),
                ));
            }
            n - 1
        }
    };
    let codewords: Vec<Vec<usize>> = match code {
        WitnessCode::Repetition => (0..q).map(|s| vec![s; n]).collect(),
        WitnessCode::SingleParity => (0..(1usize << k))
            .map(|u| {
                let mut w: Vec<usize> = (0..k).map(|j| (u >> j) & 1).collect();
                let parity = w.iter().sum::<usize>() % 2;
                w.push(parity);
                w
            })
            .collect(),
    };
    if n > 20 || codewords.len().saturating_mul(1 << n) > (1 << 24) {
        return Err(Error::SizeCap {
            requested: codewords.len() << n,
            cap: 1 << 24,
        });
    }
    let l = (q as f64).log2();
    let pbar = 1.0 - delta;
    let mut achieved = 0.0;
    for mask in 0u32..(1u32 << n) {
        let m = mask.count_ones() as i32;
        let p_mask = pbar.powi(m) * delta.powi(n as i32 - m);
        if p_mask == 0.0 {
            continue;
        }
        // The projection of the uniform codeword ensemble onto the unerased
        // coordinates is uniform over its image (the projection is linear),
        // so its entropy is the log of the image size.
        let mut images = std::collections::HashSet::new();
        for w in &codewords {
            let proj: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| w[i]).collect();
            images.insert(proj);
        }
        achieved += p_mask * (images.len() as f64).log2();
    }
    let t = k as f64 * l;
    let bound = erasure_fi_bound(t, n, q, delta)?;
    Ok(ErasureWitness { t, achieved, bound })
}

/// Pointwise network composition step for transfer-curve upper bounds:
/// given a bound `f_v` for the already-processed sinks, the curve `f_wc` of
/// the channel feeding the new sink, and a bound `f_paw` for the new sink's
/// parents, returns `f_v(t) + f_wc(f_paw(t) − f_v(t))`.
pub fn compose_bound_fn(
    f_v: impl Fn(f64) -> f64,
    f_wc: impl Fn(f64) -> f64,
    f_paw: impl Fn(f64) -> f64,
    t: f64,
) -> f64 {
    let v = f_v(t);
    v + f_wc((f_paw(t) - v).max(0.0))
}

/// [`compose_bound_fn`] applied across `f_v`'s grid, producing a new curve.
/// Requires `f_wc` to be nondecreasing across its sample points (a channel
/// transfer curve always is); the composed samples must again satisfy the
/// curve invariants or an error is returned.
pub fn curve_compose_bound(f_v: &Curve, f_wc: &Curve, f_paw: &Curve) -> Result<Curve> {
    for i in 1..f_wc.len() {
        if f_wc.f[i] < f_wc.f[i - 1] - CURVE_TOL {
            return Err(Error::InvalidCurve(
                "channel curve must be nondecreasing for composition".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(f_v.len());
    for &t in f_v.args() {
        let v = f_v.eval(t)?;
        let arg = (f_paw.eval(t)? - v).max(0.0);
        out.push(v + f_wc.eval(arg)?);
    }
    Ok(Curve::new(f_v.t.clone(), out)?.with_kind(CurveKind::FUpperBound))
}

/// Options for [`fi_estimate`].
#[derive(Debug, Clone)]
pub struct FiEstimateOptions {
    /// Auxiliary alphabet size (`0` = the channel's input size plus two).
    pub u_size: usize,
    /// Random restarts per grid point, beyond the structured seed.
    pub restarts: usize,
    /// Simplex-search iterations per start.
    pub nm_iters: usize,
    /// Seed for the restart stream.
    pub seed: u64,
}

impl Default for FiEstimateOptions {
    fn default() -> Self {
        Self {
            u_size: 0,
            restarts: 12,
            nm_iters: 180,
            seed: 0,
        }
    }
}

/// Mutual informations `(I(U;X), I(U;Y))` in bits for the witness
/// `(p_U, P_{X|U})` pushed through `w`. No validation; inputs must be
/// stochastic.
fn witness_mi(pu: &[f64], rows: &[Vec<f64>], w: &Channel) -> (f64, f64) {
    let nx = w.input_size();
    let ny = w.output_size();
    let mut mx = vec![0.0; nx];
    for (u, row) in rows.iter().enumerate() {
        for x in 0..nx {
            mx[x] += pu[u] * row[x];
        }
    }
    let mut my = vec![0.0; ny];
    let mut ix = 0.0;
    let mut iy = 0.0;
    let mut rows_y = vec![vec![0.0; ny]; rows.len()];
    for (u, row) in rows.iter().enumerate() {
        for x in 0..nx {
            let p = row[x];
            if p > 0.0 && mx[x] > 0.0 {
                ix += pu[u] * p * (p / mx[x]).ln();
            }
            for y in 0..ny {
                rows_y[u][y] += p * w.prob(x, y);
            }
        }
        for y in 0..ny {
            my[y] += pu[u] * rows_y[u][y];
        }
    }
    for (u, ry) in rows_y.iter().enumerate() {
        for y in 0..ny {
            let p = ry[y];
            if p > 0.0 && my[y] > 0.0 {
                iy += pu[u] * p * (p / my[y]).ln();
            }
        }
    }
    (ix.max(0.0) / std::f64::consts::LN_2, iy.max(0.0) / std::f64::consts::LN_2)
}

/// Shrinks the witness toward its own input marginal until `I(U;X) ≤ t`.
/// Mixing `P_{X|U}` with the marginal keeps both marginals fixed and moves
/// the joint along a segment toward independence, on which the mutual
/// information is convex and vanishes at the far end, so it is nonincreasing
/// and a bisection on the mixing weight is valid.
fn project_feasible(pu: &[f64], rows: &mut [Vec<f64>], w: &Channel, t: f64) {
    let (ix, _) = witness_mi(pu, rows, w);
    if ix <= t {
        return;
    }
    let nx = w.input_size();
    let mut mx = vec![0.0; nx];
    for (u, row) in rows.iter().enumerate() {
        for x in 0..nx {
            mx[x] += pu[u] * row[x];
        }
    }
    let base = rows.to_vec();
    let mix = |g: f64, rows: &mut [Vec<f64>]| {
        for (u, row) in rows.iter_mut().enumerate() {
            for x in 0..nx {
                row[x] = (1.0 - g) * base[u][x] + g * mx[x];
            }
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        mix(mid, rows);
        let (ix, _) = witness_mi(pu, rows, w);
        if ix > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(hi, rows);
}

/// Structured seed: `P_{X|U=u} = (1−λ)·δ_{x_u} + λ·uniform` with distinct
/// anchor symbols and uniform `U`, with `λ` bisected so that `I(U;X) ≈ t`.
fn structured_seed(w: &Channel, u_size: usize, t: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let nx = w.input_size();
    let pu = vec![1.0 / u_size as f64; u_size];
    let build = |lambda: f64| -> Vec<Vec<f64>> {
        (0..u_size)
            .map(|u| {
                let mut row = vec![lambda / nx as f64; nx];
                row[u % nx] += 1.0 - lambda;
                row
            })
            .collect()
    };
    let ix_of = |lambda: f64| witness_mi(&pu, &build(lambda), w).0;
    if ix_of(0.0) <= t {
        return (pu, build(0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ix_of(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (pu, build(hi))
}

/// Lower-bound estimate of the transfer curve
/// `F(t) = sup { I(U;Y) : U → X → Y, I(U;X) ≤ t }` of `w` on the grid `ts`
/// (bits). Every reported value is the mutual information of an explicit
/// feasible witness, so the curve is a certified pointwise lower bound; the
/// samples are then repaired into a valid [`Curve`] without ever raising a
/// value above what some witness achieves.
pub fn fi_estimate(w: &Channel, ts: &[f64], opts: &FiEstimateOptions) -> Result<Curve> {
    if ts.is_empty() {
        return Err(Error::InvalidCurve("need at least one grid point".into()));
    }
    for &t in ts {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidCurve(format!(
                "grid points must be finite and nonnegative, got {t}"
            )));
        }
    }
    for pair in ts.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidCurve(
                "grid points must be strictly increasing".into(),
            ));
        }
    }
    let u_size = if opts.u_size == 0 {
        w.input_size() + 2
    } else {
        opts.u_size.max(2)
    };
    let nx = w.input_size();
    let dim = u_size + u_size * nx;

    let unpack = |z: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>) {
        let pu = softmax(&z[..u_size]);
        let rows = (0..u_size)
            .map(|u| softmax(&z[u_size + u * nx..u_size + (u + 1) * nx]))
            .collect();
        (pu, rows)
    };
    let pack = |pu: &[f64], rows: &[Vec<f64>]| -> Vec<f64> {
        let mut z = Vec::with_capacity(dim);
        for &p in pu {
            z.push((p + 1e-9).ln());
        }
        for row in rows {
            for &p in row {
                z.push((p + 1e-9).ln());
            }
        }
        z
    };

    let mut best_f = vec![0.0f64; ts.len()];
    for (i, &t) in ts.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let mut best = 0.0f64;
        let mut consider = |pu: &[f64], rows: &mut Vec<Vec<f64>>| {
            project_feasible(pu, rows, w, t);
            let (_, iy) = witness_mi(pu, rows, w);
            if iy > best {
                best = iy;
            }
        };

        let (pu0, rows0) = structured_seed(w, u_size, t);
        let mut rows_seed = rows0.clone();
        consider(&pu0, &mut rows_seed);

        // Local refinement from the structured seed and random restarts,
        // with escalating penalties for exceeding the information budget,
        // followed by feasibility projection of the resulting witness.
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(
            opts.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ));
        let mut starts: Vec<Vec<f64>> = vec![pack(&pu0, &rows0)];
        for r in 0..opts.restarts {
            let alpha = if r % 3 == 2 { 0.3 } else { 1.0 };
            let pu = sample_dirichlet(&mut rng, alpha, u_size);
            let rows: Vec<Vec<f64>> =
                (0..u_size).map(|_| sample_dirichlet(&mut rng, alpha, nx)).collect();
            starts.push(pack(&pu, &rows));
        }
        for z0 in starts {
            let mut z = z0;
            for &mu in &[50.0, 2500.0] {
                let objective = |zz: &[f64]| {
                    let (pu, rows) = unpack(zz);
                    let (ix, iy) = witness_mi(&pu, &rows, w);
                    iy - mu * (ix - t).max(0.0).powi(2)
                };
                let (zn, _) = nelder_mead_max(objective, &z, 0.25, 1e-9, opts.nm_iters);
                z = zn;
            }
            let (pu, mut rows) = unpack(&z);
            consider(&pu, &mut rows);
        }
        best_f[i] = best;
    }
    Curve::repair_lower_bound(ts.to_vec(), best_f)
}
