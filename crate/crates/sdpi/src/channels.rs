//! Finite channels (row-stochastic matrices), their composition algebra, and
//! joint distributions.
//!
//! A channel `W` from an input alphabet of size `n` to an output alphabet of
//! size `m` is an `n×m` matrix whose rows are probability distributions.
//! Serial composition, tensor (parallel) products, push-forwards of input
//! distributions, and the joint `P_XY = p × W` all live here, together with
//! the two named constructors used throughout:
//!
//! * `make_bsc(δ)` — the binary symmetric channel, which flips its input bit
//!   with probability `δ`;
//! * `make_ec(q, δ)` — the `q`-ary erasure channel, which replaces its input
//!   with the erasure symbol (always the **last** output index) with
//!   probability `δ`.
//!
//! Multi-letter indices use the big-endian convention: the word `x₀…x_{n−1}`
//! over an alphabet of size `b` maps to the integer `∑ x_j · b^{n−1−j}`.

use serde::{Deserialize, Serialize};

use crate::probcore::{mutual_information, Distribution, LogBase, MASS_TOL};
use crate::{Error, Result};

/// Default cap on the number of matrix entries a tensor product may produce.
pub const DEFAULT_TENSOR_CAP: usize = 1 << 20;

/// A channel: row-stochastic matrix from inputs to outputs.
///
/// Serializes as `{"input_size": n, "output_size": m, "matrix": [[…], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct Channel {
    matrix: Vec<Vec<f64>>,
    input_size: usize,
    output_size: usize,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    input_size: usize,
    output_size: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<RawChannel> for Channel {
    type Error = Error;
    fn try_from(raw: RawChannel) -> Result<Self> {
        let ch = Channel::from_rows(raw.matrix)?;
        if ch.input_size != raw.input_size || ch.output_size != raw.output_size {
            return Err(Error::InvalidChannel(format!(
                "declared size {}×{} does not match matrix shape {}×{}",
                raw.input_size, raw.output_size, ch.input_size, ch.output_size
            )));
        }
        Ok(ch)
    }
}

impl From<Channel> for RawChannel {
    fn from(ch: Channel) -> RawChannel {
        RawChannel {
            input_size: ch.input_size,
            output_size: ch.output_size,
            matrix: ch.matrix,
        }
    }
}

impl Channel {
    /// Builds a channel from rows, validating that each row is a probability
    /// vector (non-negative, mass 1 within `1e-12`; renormalized).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidChannel("channel needs at least one row".into()));
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return Err(Error::InvalidChannel("channel needs at least one output".into()));
        }
        let mut matrix = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!(
                    "row {i} has length {}, expected {output_size}",
                    row.len()
                )));
            }
            let d = Distribution::new(row).map_err(|e| {
                Error::InvalidChannel(format!("row {i} is not a distribution: {e}"))
            })?;
            matrix.push(Vec::from(d));
        }
        Ok(Self {
            input_size: matrix.len(),
            output_size,
            matrix,
        })
    }

    /// The identity channel on `n` symbols.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidChannel("channel needs at least one row".into()));
        }
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self::from_rows(rows)
    }

    /// Number of input symbols.
    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// Number of output symbols.
    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// Transition probability `W(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Row `x` as a slice.
    pub fn row_slice(&self, x: usize) -> &[f64] {
        &self.matrix[x]
    }

    /// Row `x` as a [`Distribution`].
    pub fn row(&self, x: usize) -> Distribution {
        Distribution::new(self.matrix[x].clone()).expect("rows are validated at construction")
    }

    /// The full matrix.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

/// Push-forward of `p` through `w`: `(w ∘ p)_y = ∑ₓ pₓ · w(y|x)`.
pub fn push_forward(w: &Channel, p: &Distribution) -> Result<Distribution> {
    if p.len() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: w.input_size(),
        });
    }
    let mut out = vec![0.0; w.output_size()];
    for x in 0..w.input_size() {
        let px = p.prob(x);
        if px == 0.0 {
            continue;
        }
        for (y, o) in out.iter_mut().enumerate() {
            *o += px * w.prob(x, y);
        }
    }
    Distribution::new(out)
}

/// Pushes the column variable of a joint through `w`:
/// `(u, y) ↦ ∑ₓ joint(u, x) · w(y|x)`. The row variable is untouched.
pub fn push_forward_joint(joint: &JointDistribution, w: &Channel) -> Result<JointDistribution> {
    if joint.cols() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: joint.cols(),
            right: w.input_size(),
        });
    }
    let mut rows = vec![vec![0.0; w.output_size()]; joint.rows()];
    for (u, out_row) in rows.iter_mut().enumerate() {
        for x in 0..joint.cols() {
            let m = joint.prob(u, x);
            if m == 0.0 {
                continue;
            }
            for (y, o) in out_row.iter_mut().enumerate() {
                *o += m * w.prob(x, y);
            }
        }
    }
    JointDistribution::new(rows)
}

/// Serial composition `w2 ∘ w1` (apply `w1` first, then `w2`).
pub fn compose(w2: &Channel, w1: &Channel) -> Result<Channel> {
    if w1.output_size() != w2.input_size() {
        return Err(Error::AlphabetMismatch {
            left: w1.output_size(),
            right: w2.input_size(),
        });
    }
    let mut rows = vec![vec![0.0; w2.output_size()]; w1.input_size()];
    for x in 0..w1.input_size() {
        for y in 0..w1.output_size() {
            let a = w1.prob(x, y);
            if a == 0.0 {
                continue;
            }
            for z in 0..w2.output_size() {
                rows[x][z] += a * w2.prob(y, z);
            }
        }
    }
    Channel::from_rows(rows)
}

/// Tensor (parallel) product with the big-endian index convention: the first
/// factor is the most significant digit of both the input and output index.
pub fn tensor(w1: &Channel, w2: &Channel) -> Result<Channel> {
    tensor_with_cap(w1, w2, DEFAULT_TENSOR_CAP)
}

/// [`tensor`] with an explicit cap on the number of matrix entries produced.
pub fn tensor_with_cap(w1: &Channel, w2: &Channel, cap: usize) -> Result<Channel> {
    let in_size = w1.input_size() * w2.input_size();
    let out_size = w1.output_size() * w2.output_size();
    let entries = in_size.checked_mul(out_size).ok_or(Error::SizeCap {
        requested: usize::MAX,
        cap,
    })?;
    if entries > cap {
        return Err(Error::SizeCap {
            requested: entries,
            cap,
        });
    }
    let mut rows = vec![vec![0.0; out_size]; in_size];
    for x1 in 0..w1.input_size() {
        for x2 in 0..w2.input_size() {
            let x = x1 * w2.input_size() + x2;
            for y1 in 0..w1.output_size() {
                let a = w1.prob(x1, y1);
                if a == 0.0 {
                    continue;
                }
                for y2 in 0..w2.output_size() {
                    rows[x][y1 * w2.output_size() + y2] = a * w2.prob(x2, y2);
                }
            }
        }
    }
    Channel::from_rows(rows)
}

/// `n`-fold tensor power of `w` (big-endian digit order).
pub fn tensor_power(w: &Channel, n: usize) -> Result<Channel> {
    tensor_power_with_cap(w, n, DEFAULT_TENSOR_CAP)
}

/// [`tensor_power`] with an explicit entry cap.
pub fn tensor_power_with_cap(w: &Channel, n: usize, cap: usize) -> Result<Channel> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "tensor power requires at least one factor".into(),
        ));
    }
    let mut acc = w.clone();
    for _ in 1..n {
        acc = tensor_with_cap(&acc, w, cap)?;
    }
    Ok(acc)
}

/// Tensor product of a whole sequence of channels (big-endian: the first
/// channel is the most significant digit on both sides).
pub fn tensor_all(ws: &[Channel]) -> Result<Channel> {
    let (first, rest) = ws.split_first().ok_or_else(|| {
        Error::InvalidParameter("tensor product requires at least one factor".into())
    })?;
    let mut acc = first.clone();
    for w in rest {
        acc = tensor(&acc, w)?;
    }
    Ok(acc)
}

/// Binary symmetric channel with crossover probability `δ ∈ [0, 1]`.
pub fn make_bsc(delta: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "crossover probability must lie in [0,1], got {delta}"
        )));
    }
    Channel::from_rows(vec![vec![1.0 - delta, delta], vec![delta, 1.0 - delta]])
}

/// `q`-ary erasure channel with erasure probability `δ ∈ [0, 1]`; the erasure
/// symbol is the last output index (`q`).
pub fn make_ec(q: usize, delta: f64) -> Result<Channel> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "erasure channel needs an input alphabet of at least 2 symbols, got {q}"
        )));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "erasure probability must lie in [0,1], got {delta}"
        )));
    }
    let mut rows = vec![vec![0.0; q + 1]; q];
    for (x, row) in rows.iter_mut().enumerate() {
        row[x] = 1.0 - delta;
        row[q] = delta;
    }
    Channel::from_rows(rows)
}

/// A joint probability matrix over a product alphabet.
///
/// Serializes as a plain nested JSON array; total mass must be 1 within
/// `1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JointDistribution {
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for JointDistribution {
    type Error = Error;
    fn try_from(m: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(m)
    }
}

impl From<JointDistribution> for Vec<Vec<f64>> {
    fn from(j: JointDistribution) -> Vec<Vec<f64>> {
        j.matrix
    }
}

impl JointDistribution {
    /// Validates a joint matrix: rectangular, non-negative, mass 1 within `1e-9`.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.is_empty() || matrix[0].is_empty() {
            return Err(Error::InvalidJoint("joint matrix must be non-empty".into()));
        }
        let cols = matrix[0].len();
        let mut total = 0.0;
        for row in &matrix {
            if row.len() != cols {
                return Err(Error::InvalidJoint(
                    "joint matrix rows have unequal lengths".into(),
                ));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidJoint(format!(
                        "joint entries must be finite and non-negative, got {v}"
                    )));
                }
                total += v;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidJoint(format!(
                "joint mass is {total}, which is farther than 1e-9 from 1"
            )));
        }
        Ok(Self { matrix })
    }

    /// Row dimension (first coordinate's alphabet size).
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    /// Column dimension (second coordinate's alphabet size).
    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    /// Probability of the pair `(i, j)`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Marginal of the first coordinate.
    pub fn marginal_rows(&self) -> Result<Distribution> {
        let sums: Vec<f64> = self.matrix.iter().map(|r| r.iter().sum()).collect();
        normalize_marginal(sums)
    }

    /// Marginal of the second coordinate.
    pub fn marginal_cols(&self) -> Result<Distribution> {
        let mut sums = vec![0.0; self.cols()];
        for row in &self.matrix {
            for (j, &v) in row.iter().enumerate() {
                sums[j] += v;
            }
        }
        normalize_marginal(sums)
    }

    /// Conditional channel of the second coordinate given the first. Rows
    /// with zero marginal mass are filled uniformly (they never matter when
    /// re-multiplied by the marginal).
    pub fn conditional(&self) -> Result<Channel> {
        let cols = self.cols();
        let rows: Vec<Vec<f64>> = self
            .matrix
            .iter()
            .map(|r| {
                let mass: f64 = r.iter().sum();
                if mass > 0.0 {
                    r.iter().map(|&v| v / mass).collect()
                } else {
                    vec![1.0 / cols as f64; cols]
                }
            })
            .collect();
        Channel::from_rows(rows)
    }

    /// Mutual information between the two coordinates.
    pub fn mutual_information(&self, base: LogBase) -> Result<f64> {
        mutual_information(&self.matrix, base)
    }
}

// Joint masses are validated at 1e-9, looser than the 1e-12 a Distribution
// demands, so marginals are renormalized before construction.
fn normalize_marginal(mut sums: Vec<f64>) -> Result<Distribution> {
    let total: f64 = sums.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidJoint("joint matrix has no mass".into()));
    }
    for v in &mut sums {
        *v /= total;
    }
    // Guard against accumulated rounding leaving the sum just outside the
    // strict construction tolerance.
    let s: f64 = sums.iter().sum();
    if (s - 1.0).abs() > MASS_TOL {
        let last = sums.len() - 1;
        sums[last] += 1.0 - s;
    }
    Distribution::new(sums)
}

/// The joint distribution `p × w`: `joint[i][j] = pᵢ · w(j|i)`.
pub fn joint(p: &Distribution, w: &Channel) -> Result<JointDistribution> {
    if p.len() != w.input_size() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: w.input_size(),
        });
    }
    let matrix: Vec<Vec<f64>> = (0..p.len())
        .map(|i| w.row_slice(i).iter().map(|&v| p.prob(i) * v).collect())
        .collect();
    JointDistribution::new(matrix)
}

/// Encodes a word to an integer with the big-endian convention
/// `∑ x_j · base^{n−1−j}` (first letter most significant).
pub fn encode_multi(word: &[usize], base: usize) -> usize {
    word.iter().fold(0, |acc, &d| acc * base + d)
}

/// Decodes an integer back to a word of length `n` (big-endian).
pub fn decode_multi(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut word = vec![0; n];
    for slot in word.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::binary_convolve;

    #[test]
    fn channel_json_round_trip() {
        let w = make_bsc(0.11).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert!(json.contains("\"input_size\":2"));
        let back: Channel = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
        // Declared sizes must match the matrix.
        let bad = r#"{"input_size":3,"output_size":2,"matrix":[[0.5,0.5],[0.1,0.9]]}"#;
        assert!(serde_json::from_str::<Channel>(bad).is_err());
        // Non-stochastic rows are rejected.
        let bad = r#"{"input_size":2,"output_size":2,"matrix":[[0.5,0.4],[0.1,0.9]]}"#;
        assert!(serde_json::from_str::<Channel>(bad).is_err());
    }

    #[test]
    fn named_constructors() {
        let w = make_bsc(0.0).unwrap();
        assert_eq!(w, Channel::identity(2).unwrap());
        let w = make_bsc(0.11).unwrap();
        assert_eq!(w.row_slice(0), &[0.89, 0.11]);
        assert_eq!(w.row_slice(1), &[0.11, 0.89]);
        let w = make_ec(2, 1.0).unwrap();
        for x in 0..2 {
            assert_eq!(w.prob(x, 2), 1.0);
        }
        assert!(make_bsc(1.5).is_err());
        assert!(make_ec(1, 0.5).is_err());
    }

    #[test]
    fn push_forward_examples() {
        let p = Distribution::bernoulli(0.0).unwrap(); // point mass at 0
        let w = make_bsc(0.1).unwrap();
        let out = push_forward(&w, &p).unwrap();
        assert!((out.prob(1) - 0.1).abs() < 1e-15);

        let id = Channel::identity(3).unwrap();
        let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(push_forward(&id, &p).unwrap(), p);

        let ec = make_ec(2, 0.3).unwrap();
        let half = Distribution::bernoulli(0.5).unwrap();
        let out = push_forward(&ec, &half).unwrap();
        for (got, want) in out.as_slice().iter().zip([0.35, 0.35, 0.3]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn compose_of_bscs_convolves() {
        let (d1, d2) = (0.1, 0.25);
        let w = compose(&make_bsc(d1).unwrap(), &make_bsc(d2).unwrap()).unwrap();
        let expect = binary_convolve(d1, d2);
        assert!((w.prob(0, 1) - expect).abs() < 1e-15);
        assert!((w.prob(1, 0) - expect).abs() < 1e-15);

        let id = Channel::identity(3).unwrap();
        let any = Channel::from_rows(vec![vec![0.2, 0.3, 0.5], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(compose(&id, &any).unwrap(), any);

        // A constant-row second stage absorbs the first.
        let constant =
            Channel::from_rows(vec![vec![0.4, 0.6], vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let absorbed = compose(&constant, &any).unwrap();
        for x in 0..2 {
            assert_eq!(absorbed.row_slice(x), &[0.4, 0.6]);
        }
    }

    #[test]
    fn tensor_matches_product_formula() {
        let delta = 0.2;
        let w = make_bsc(delta).unwrap();
        let w2 = tensor(&w, &w).unwrap();
        assert_eq!(w2.input_size(), 4);
        for x in 0..4 {
            for y in 0..4 {
                let xd = decode_multi(x, 2, 2);
                let yd = decode_multi(y, 2, 2);
                let expect: f64 = (0..2).map(|j| w.prob(xd[j], yd[j])).product();
                assert!((w2.prob(x, y) - expect).abs() < 1e-15);
            }
        }
        // Stochasticity is preserved for the erasure product too.
        let e2 = tensor(&make_ec(2, 0.3).unwrap(), &make_ec(2, 0.3).unwrap()).unwrap();
        for x in 0..e2.input_size() {
            let s: f64 = e2.row_slice(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_power_respects_cap() {
        let w = make_bsc(0.1).unwrap();
        assert!(tensor_power_with_cap(&w, 8, 1 << 10).is_err());
        let ok = tensor_power(&w, 5).unwrap();
        assert_eq!(ok.input_size(), 32);
    }

    #[test]
    fn multi_index_round_trip() {
        for base in 2..=4usize {
            for n in 1..=3usize {
                let total = base.pow(n as u32);
                for idx in 0..total {
                    let word = decode_multi(idx, base, n);
                    assert!(word.iter().all(|&d| d < base));
                    assert_eq!(encode_multi(&word, base), idx);
                }
            }
        }
        // Big-endian: first letter is most significant.
        assert_eq!(encode_multi(&[1, 0], 2, ), 2);
        assert_eq!(decode_multi(6, 2, 3), vec![1, 1, 0]);
    }

    #[test]
    fn joint_and_extractors() {
        let p = Distribution::bernoulli(0.5).unwrap();
        let w = make_bsc(0.11).unwrap();
        let j = joint(&p, &w).unwrap();
        let expect = [[0.445, 0.055], [0.055, 0.445]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((j.prob(a, b) - expect[a][b]).abs() < 1e-15);
            }
        }
        assert_eq!(j.marginal_rows().unwrap(), p);
        assert_eq!(j.marginal_cols().unwrap(), push_forward(&w, &p).unwrap());
        let cond = j.conditional().unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((cond.prob(x, y) - w.prob(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_validation() {
        assert!(JointDistribution::new(vec![vec![0.5, 0.5], vec![0.5]]).is_err());
        assert!(JointDistribution::new(vec![vec![0.7, 0.5]]).is_err());
        assert!(JointDistribution::new(vec![vec![1.0, -0.1, 0.1]]).is_err());
    }

    #[test]
    fn push_forward_joint_acts_on_columns() {
        let p = Distribution::bernoulli(0.3).unwrap();
        let w = make_bsc(0.11).unwrap();
        let j = joint(&p, &w).unwrap();
        let v = make_bsc(0.2).unwrap();
        let pushed = push_forward_joint(&j, &v).unwrap();
        // Row marginal unchanged; conditional becomes the composition.
        let rows = pushed.marginal_rows().unwrap();
        for a in 0..2 {
            assert!((rows.prob(a) - p.prob(a)).abs() < 1e-15);
        }
        let expect = joint(&p, &compose(&v, &w).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((pushed.prob(a, b) - expect.prob(a, b)).abs() < 1e-15);
            }
        }
        let w3 = Channel::identity(3).unwrap();
        assert!(push_forward_joint(&j, &w3).is_err());
    }

    #[test]
    fn tensor_all_matches_pairwise_tensor() {
        let a = make_bsc(0.1).unwrap();
        let b = make_ec(2, 0.3).unwrap();
        let c = make_bsc(0.25).unwrap();
        let fold = tensor_all(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let pair = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        assert_eq!(fold.matrix(), pair.matrix());
        let single = tensor_all(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.matrix(), a.matrix());
        assert!(tensor_all(&[]).is_err());
    }
}
