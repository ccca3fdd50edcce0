//! Finite probability distributions and f-divergences.
//!
//! The five divergence kinds computed here, for distributions `p`, `q` on a
//! common finite alphabet:
//!
//! * total variation            `TV(p,q)   = ½ ∑ᵢ |pᵢ − qᵢ|`
//! * Kullback–Leibler           `KL(p‖q)   = ∑ᵢ pᵢ ln(pᵢ/qᵢ)`
//! * chi-squared                `χ²(p‖q)   = ∑ᵢ (pᵢ − qᵢ)²/qᵢ`
//! * squared Hellinger          `H²(p,q)   = 2 − 2 ∑ᵢ √(pᵢ qᵢ)`
//! * Le Cam with weight β       `LCᵦ(p‖q)  = ββ̄ ∑ᵢ (pᵢ − qᵢ)²/(βpᵢ + β̄qᵢ)`
//!
//! with the usual conventions `0·f(0/0) = 0` and `0·f(a/0) = lim_{x↓0} x f(a/x)`,
//! so KL and χ² take the value `+∞` (a representable value, not an error)
//! exactly when `p` puts mass outside the support of `q`.
//!
//! Also provided: mutual information of a joint matrix, a quadrature oracle
//! that recovers KL from an integral of chi-squared divergences along the
//! mixture path between the two arguments, and the maximal coupling whose
//! off-diagonal mass equals the total variation.

use serde::{Deserialize, Serialize};

use crate::numerics::{gauss_legendre, gl_integrate};
use crate::{Error, Result};

/// Tolerance within which a probability vector must sum to 1 at construction.
pub const MASS_TOL: f64 = 1e-12;

/// A probability distribution on a finite alphabet `{0, …, n−1}`.
///
/// Entries are non-negative and sum to 1 within `1e-12`; the vector is
/// renormalized to unit mass on construction. Serializes as a plain JSON
/// array of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and renormalizes a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "alphabet must have at least one symbol".into(),
            ));
        }
        if let Some(bad) = probs.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entries must be finite and non-negative, got {bad}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, which is farther than {MASS_TOL} from 1"
            )));
        }
        let probs = probs.into_iter().map(|v| v / total).collect();
        Ok(Self { probs })
    }

    /// The uniform distribution on `n` symbols.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution(
                "alphabet must have at least one symbol".into(),
            ));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// The point mass at symbol `at` on an alphabet of `n` symbols.
    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if n == 0 || at >= n {
            return Err(Error::InvalidDistribution(format!(
                "point mass at {at} needs alphabet larger than {at}, got {n}"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// The distribution `(1−p, p)` on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "Bernoulli parameter must lie in [0,1], got {p}"
            )));
        }
        Ok(Self {
            probs: vec![1.0 - p, p],
        })
    }

    /// Number of symbols in the alphabet.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// True when the alphabet has exactly one symbol.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Probability of symbol `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// The probabilities as a slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Smallest entry (used by mass-based contraction bounds).
    pub fn min_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// True when every symbol has positive probability.
    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&v| v > 0.0)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Vec<f64> {
        d.probs
    }
}

/// Which f-divergence to compute.
///
/// Serializes as the strings `"tv"`, `"kl"`, `"chi2"`, `"hellinger2"`, and
/// `"lecam:<beta>"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceKind {
    /// Total variation distance.
    Tv,
    /// Kullback–Leibler divergence (nats).
    Kl,
    /// Chi-squared divergence.
    Chi2,
    /// Squared Hellinger distance (range `[0, 2]`).
    HellingerSq,
    /// Le Cam divergence with mixing weight `β ∈ (0, 1)`.
    LeCam(f64),
}

impl DivergenceKind {
    /// Constructs the Le Cam kind, rejecting weights outside `(0, 1)`.
    pub fn le_cam(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Le Cam weight must lie strictly inside (0,1), got {beta}"
            )));
        }
        Ok(Self::LeCam(beta))
    }
}

impl std::fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Tv => write!(f, "tv"),
            Self::Kl => write!(f, "kl"),
            Self::Chi2 => write!(f, "chi2"),
            Self::HellingerSq => write!(f, "hellinger2"),
            Self::LeCam(beta) => write!(f, "lecam:{beta}"),
        }
    }
}

impl std::str::FromStr for DivergenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" => Ok(Self::Tv),
            "kl" => Ok(Self::Kl),
            "chi2" => Ok(Self::Chi2),
            "hellinger2" => Ok(Self::HellingerSq),
            _ => {
                if let Some(rest) = s.strip_prefix("lecam:") {
                    let beta: f64 = rest.parse().map_err(|_| {
                        Error::Parse(format!("cannot parse Le Cam weight in {s:?}"))
                    })?;
                    Self::le_cam(beta)
                } else {
                    Err(Error::Parse(format!(
                        "unknown divergence kind {s:?} (expected tv, kl, chi2, hellinger2, or lecam:<beta>)"
                    )))
                }
            }
        }
    }
}

impl Serialize for DivergenceKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DivergenceKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Output logarithm base for information-valued quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    /// Natural logarithm (information in nats).
    Nats,
    /// Base-2 logarithm (information in bits).
    Bits,
}

impl LogBase {
    /// Factor converting a nat-valued quantity into this base.
    pub fn from_nats(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }
}

fn check_same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

/// Computes an f-divergence between two distributions on a common alphabet.
///
/// KL and χ² return `+∞` when `p` charges a symbol outside the support of
/// `q`; the other kinds are always finite. KL is returned in nats.
pub fn divergence(kind: DivergenceKind, p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_alphabet(p, q)?;
    let (pv, qv) = (p.as_slice(), q.as_slice());
    let val = match kind {
        DivergenceKind::Tv => 0.5 * pv.iter().zip(qv).map(|(a, b)| (a - b).abs()).sum::<f64>(),
        DivergenceKind::Kl => {
            let mut s = 0.0;
            for (&a, &b) in pv.iter().zip(qv) {
                if a > 0.0 {
                    if b <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    s += a * (a / b).ln();
                }
            }
            s.max(0.0)
        }
        DivergenceKind::Chi2 => {
            let mut s = 0.0;
            for (&a, &b) in pv.iter().zip(qv) {
                if b > 0.0 {
                    s += (a - b) * (a - b) / b;
                } else if a > 0.0 {
                    return Ok(f64::INFINITY);
                }
            }
            s
        }
        DivergenceKind::HellingerSq => {
            let bc: f64 = pv.iter().zip(qv).map(|(a, b)| (a * b).sqrt()).sum();
            (2.0 - 2.0 * bc).max(0.0)
        }
        DivergenceKind::LeCam(beta) => {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "Le Cam weight must lie strictly inside (0,1), got {beta}"
                )));
            }
            let bb = beta * (1.0 - beta);
            let mut s = 0.0;
            for (&a, &b) in pv.iter().zip(qv) {
                let mix = beta * a + (1.0 - beta) * b;
                if mix > 0.0 {
                    s += (a - b) * (a - b) / mix;
                }
            }
            bb * s
        }
    };
    Ok(val)
}

/// Mutual information of a joint probability matrix, in the requested base.
///
/// `joint[i][j]` is `P[A = i, B = j]`; entries must be non-negative and sum
/// to 1 within `1e-9`. Returns `D(P_AB ‖ P_A × P_B) ≥ 0`.
pub fn mutual_information(joint: &[Vec<f64>], base: LogBase) -> Result<f64> {
    if joint.is_empty() || joint[0].is_empty() {
        return Err(Error::InvalidJoint("joint matrix must be non-empty".into()));
    }
    let cols = joint[0].len();
    let mut total = 0.0;
    for row in joint {
        if row.len() != cols {
            return Err(Error::InvalidJoint("joint matrix rows have unequal lengths".into()));
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
    let rows = joint.len();
    let mut pa = vec![0.0; rows];
    let mut pb = vec![0.0; cols];
    for (i, row) in joint.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            pa[i] += v;
            pb[j] += v;
        }
    }
    let mut nats = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > 0.0 {
                nats += v * (v / (pa[i] * pb[j])).ln();
            }
        }
    }
    Ok(nats.max(0.0) * base.from_nats())
}

/// Recovers `KL(p‖q)` by integrating chi-squared divergences along the line
/// of mixtures between `q` and `p`, as an oracle independent of the direct
/// log-sum formula:
///
/// `KL(p‖q) = ∫₀¹ (1−s) ∑ᵢ (pᵢ−qᵢ)² / (s·pᵢ + (1−s)·qᵢ) ds`.
///
/// The integrand is a rational function with poles beyond `s = 1`, clustering
/// toward it when likelihood ratios are extreme, so the unit interval is split
/// into panels that halve geometrically toward `s = 1`, each integrated with a
/// `quad_points`-point Gauss–Legendre rule. Agrees with `divergence(Kl, ·, ·)`
/// to well within `1e-4` for likelihood ratios up to 100.
///
/// Errors when `p` charges a symbol outside the support of `q` (the KL is
/// infinite and the integral diverges), or when `quad_points < 16`.
pub fn kl_via_chi2_integral(p: &Distribution, q: &Distribution, quad_points: usize) -> Result<f64> {
    check_same_alphabet(p, q)?;
    if quad_points < 16 {
        return Err(Error::InvalidParameter(format!(
            "quadrature order must be at least 16, got {quad_points}"
        )));
    }
    for (&a, &b) in p.as_slice().iter().zip(q.as_slice()) {
        if a > 0.0 && b <= 0.0 {
            return Err(Error::InfiniteDivergence);
        }
    }
    let rule = gauss_legendre(quad_points);
    let integrand = |s: f64| -> f64 {
        let mut acc = 0.0;
        for (&a, &b) in p.as_slice().iter().zip(q.as_slice()) {
            let diff = a - b;
            if diff == 0.0 {
                continue;
            }
            let mix = s * a + (1.0 - s) * b;
            acc += diff * diff / mix;
        }
        (1.0 - s) * acc
    };
    // Panels [0, 1/2], [1/2, 3/4], …: geometric refinement toward s = 1 where
    // the integrand's poles accumulate for small likelihood ratios.
    const PANELS: usize = 14;
    let mut total = 0.0;
    let mut lo = 0.0;
    for k in 0..PANELS {
        let hi = if k + 1 == PANELS {
            1.0
        } else {
            1.0 - 0.5_f64.powi(k as i32 + 1)
        };
        total += gl_integrate(integrand, lo, hi, &rule);
        lo = hi;
    }
    Ok(total.max(0.0))
}

/// Builds a maximal coupling of `p` and `q`: a joint matrix with marginals
/// `p` (rows) and `q` (columns) whose off-diagonal mass equals `TV(p, q)`.
///
/// The diagonal carries the overlap `min(pᵢ, qᵢ)`; the residual masses are
/// coupled as a product.
pub fn maximal_coupling(p: &Distribution, q: &Distribution) -> Result<Vec<Vec<f64>>> {
    check_same_alphabet(p, q)?;
    let n = p.len();
    let mut joint = vec![vec![0.0; n]; n];
    let mut pu = vec![0.0; n]; // residual of p above the overlap
    let mut qu = vec![0.0; n]; // residual of q above the overlap
    let mut tv = 0.0;
    for i in 0..n {
        let overlap = p.prob(i).min(q.prob(i));
        joint[i][i] = overlap;
        pu[i] = p.prob(i) - overlap;
        qu[i] = q.prob(i) - overlap;
        tv += pu[i];
    }
    if tv > 0.0 {
        for i in 0..n {
            if pu[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if qu[j] > 0.0 {
                    joint[i][j] += pu[i] * qu[j] / tv;
                }
            }
        }
    }
    Ok(joint)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, -0.1, 0.6]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err()); // mass 1.1
        let d = Distribution::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(d.len(), 2);
        // A vector within 1e-12 of unit mass is accepted and renormalized.
        let d = Distribution::new(vec![0.5, 0.5 + 5e-13]).unwrap();
        let s: f64 = d.as_slice().iter().sum();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn divergence_kind_strings_round_trip() {
        for s in ["tv", "kl", "chi2", "hellinger2", "lecam:0.25"] {
            let k: DivergenceKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("lecam:1.5".parse::<DivergenceKind>().is_err());
        assert!("lecam:0".parse::<DivergenceKind>().is_err());
        assert!("ell1".parse::<DivergenceKind>().is_err());
        let json = serde_json::to_string(&DivergenceKind::Chi2).unwrap();
        assert_eq!(json, "\"chi2\"");
        let back: DivergenceKind = serde_json::from_str("\"lecam:0.5\"").unwrap();
        assert_eq!(back, DivergenceKind::LeCam(0.5));
    }

    #[test]
    fn frozen_divergence_values() {
        // Disjoint supports.
        let d = divergence(DivergenceKind::Tv, &bern(0.0), &bern(1.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        // Identical arguments.
        let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(divergence(DivergenceKind::Kl, &p, &p).unwrap(), 0.0);
        // Direct evaluations.
        let d = divergence(DivergenceKind::Tv, &bern(0.5), &bern(0.25)).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        let d = divergence(DivergenceKind::Chi2, &bern(0.5), &bern(0.25)).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kl_and_chi2_are_infinite_outside_support() {
        let p = bern(0.5);
        let q = bern(0.0);
        assert_eq!(divergence(DivergenceKind::Kl, &p, &q).unwrap(), f64::INFINITY);
        assert_eq!(divergence(DivergenceKind::Chi2, &p, &q).unwrap(), f64::INFINITY);
        // Hellinger and TV stay finite.
        assert!(divergence(DivergenceKind::HellingerSq, &p, &q).unwrap().is_finite());
    }

    #[test]
    fn tv_equals_one_minus_overlap() {
        let p = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = Distribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let tv = divergence(DivergenceKind::Tv, &p, &q).unwrap();
        let overlap: f64 = p
            .as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(a, b)| a.min(*b))
            .sum();
        assert!((tv - (1.0 - overlap)).abs() < 1e-15);
    }

    #[test]
    fn le_cam_half_dominates_half_squared_hellinger() {
        let cases = [
            (bern(0.5), bern(0.25)),
            (bern(0.0), bern(1.0)),
            (
                Distribution::new(vec![0.7, 0.2, 0.1]).unwrap(),
                Distribution::new(vec![0.1, 0.1, 0.8]).unwrap(),
            ),
        ];
        for (p, q) in cases {
            let lc = divergence(DivergenceKind::LeCam(0.5), &p, &q).unwrap();
            let h2 = divergence(DivergenceKind::HellingerSq, &p, &q).unwrap();
            assert!(lc >= h2 / 2.0 - 1e-12, "LC_1/2 = {lc} < H²/2 = {}", h2 / 2.0);
        }
    }

    #[test]
    fn mutual_information_frozen_values() {
        // Perfectly correlated bits.
        let joint = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        let nats = mutual_information(&joint, LogBase::Nats).unwrap();
        assert!((nats - std::f64::consts::LN_2).abs() < 1e-12);
        let bits = mutual_information(&joint, LogBase::Bits).unwrap();
        assert!((bits - 1.0).abs() < 1e-12);
        // Independence.
        let joint = vec![vec![0.25, 0.25], vec![0.25, 0.25]];
        assert_eq!(mutual_information(&joint, LogBase::Nats).unwrap(), 0.0);
        // Direct evaluation: 2·0.4·ln 1.6 + 2·0.1·ln 0.4.
        let joint = vec![vec![0.4, 0.1], vec![0.1, 0.4]];
        let expect = 0.8 * 1.6_f64.ln() + 0.2 * 0.4_f64.ln();
        let got = mutual_information(&joint, LogBase::Nats).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_rejects_bad_mass() {
        let joint = vec![vec![0.5, 0.0], vec![0.0, 0.6]];
        assert!(mutual_information(&joint, LogBase::Nats).is_err());
        let joint = vec![vec![0.5, -0.1], vec![0.1, 0.5]];
        assert!(mutual_information(&joint, LogBase::Nats).is_err());
    }

    #[test]
    fn integral_oracle_matches_direct_kl() {
        let cases = [
            (bern(0.3), bern(0.3)),
            (bern(0.3), bern(0.5)),
            (bern(0.1), bern(0.9)),
            (
                Distribution::new(vec![0.6, 0.3, 0.1]).unwrap(),
                Distribution::new(vec![0.2, 0.3, 0.5]).unwrap(),
            ),
        ];
        for (p, q) in cases {
            let direct = divergence(DivergenceKind::Kl, &p, &q).unwrap();
            let quad = kl_via_chi2_integral(&p, &q, 16).unwrap();
            assert!(
                (direct - quad).abs() < 1e-4,
                "direct {direct} vs quadrature {quad}"
            );
        }
    }

    #[test]
    fn integral_oracle_rejects_infinite_case_and_low_order() {
        assert!(kl_via_chi2_integral(&bern(0.5), &bern(0.0), 16).is_err());
        assert!(kl_via_chi2_integral(&bern(0.3), &bern(0.5), 8).is_err());
    }

    #[test]
    fn maximal_coupling_has_right_marginals_and_mass() {
        let cases = [
            (bern(0.3), bern(0.3), 0.0),
            (bern(0.0), bern(1.0), 1.0),
            (bern(0.5), bern(0.25), 0.25),
        ];
        for (p, q, want) in cases {
            let joint = maximal_coupling(&p, &q).unwrap();
            let n = p.len();
            let mut off = 0.0;
            for i in 0..n {
                let row: f64 = joint[i].iter().sum();
                assert!((row - p.prob(i)).abs() < 1e-12);
                let col: f64 = (0..n).map(|r| joint[r][i]).sum();
                assert!((col - q.prob(i)).abs() < 1e-12);
                for j in 0..n {
                    if i != j {
                        off += joint[i][j];
                    }
                }
            }
            assert!((off - want).abs() < 1e-12, "off-diagonal {off} vs {want}");
        }
    }
}
