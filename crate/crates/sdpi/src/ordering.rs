//! The less-noisy channel order, erasure-channel domination, tensorization,
//! and the subset-sampling information bound.
//!
//! A channel `W′` is *less noisy* than `W` (same input) when
//! `I(U;Y′) ≥ I(U;Y)` for every `U → X → (Y, Y′)`; equivalently, when
//! `D(P_Y ‖ Q_Y) ≤ D(P_{Y′} ‖ Q_{Y′})` for all input laws `P, Q`. The order
//! quantifies over all priors, so these checks are sampled **falsifiers**:
//! a [`LessNoisyVerdict::NoCounterexampleFound`] is evidence, never proof,
//! while a [`LessNoisyVerdict::NotLessNoisy`] ships a concrete witness.
//!
//! Mutual informations and violation gaps are reported in **bits**;
//! divergence comparisons happen in nats internally (the verdicts are
//! scale-free).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{
    make_ec, push_forward, push_forward_joint, tensor, tensor_all, Channel, JointDistribution,
};
use crate::contraction::{eta_kl, eta_kl_certified_upper, EtaOptions};
use crate::numerics::{sample_dirichlet, splitmix64};
use crate::probcore::{divergence, DivergenceKind, LogBase};
use crate::{Error, Result};

/// MI gap a counterexample witness must exhibit to be conclusive (bits).
pub const WITNESS_GAP_TOL: f64 = 1e-9;

/// Outcome of a sampled less-noisy comparison of `w` against an allegedly
/// less noisy `w′`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LessNoisyVerdict {
    /// No sampled prior pair violated the divergence criterion beyond
    /// numerical tolerance. `max_violation` is the largest finite value of
    /// `D(P_Y‖Q_Y) − D(P_{Y′}‖Q_{Y′})` seen (bits; ≤ 0 up to noise).
    NoCounterexampleFound { trials: usize, max_violation: f64 },
    /// A concrete `P_UX` with `I(U;Y) − I(U;Y′) = mi_gap >` [`WITNESS_GAP_TOL`]
    /// (bits), disproving that `w′` is less noisy than `w`.
    NotLessNoisy {
        witness: JointDistribution,
        mi_gap: f64,
    },
}

impl LessNoisyVerdict {
    /// True on the no-counterexample branch.
    pub fn is_clean(&self) -> bool {
        matches!(self, LessNoisyVerdict::NoCounterexampleFound { .. })
    }
}

/// `I(U;Y)` in bits for the prior `joint` (rows `U`, columns `X`) pushed
/// through `w`.
pub fn mi_through(joint: &JointDistribution, w: &Channel) -> Result<f64> {
    push_forward_joint(joint, w)?.mutual_information(LogBase::Bits)
}

fn sample_simplex(rng: &mut ChaCha8Rng, n: usize, flavor: u8) -> Vec<f64> {
    match flavor {
        // Point-mass-perturbed draw probing support boundaries.
        0 => {
            let spike = rng.random_range(0..n);
            let mut v: Vec<f64> = sample_dirichlet(rng, 1.0, n).iter().map(|x| 0.05 * x).collect();
            v[spike] += 0.95;
            v
        }
        // Low-entropy spike.
        1 => sample_dirichlet(rng, 0.2, n),
        _ => sample_dirichlet(rng, 1.0, n),
    }
}

/// Best binary-`U` witness obtained by placing `(P, Q)` as the two
/// conditional rows with mixing weights swept toward the endpoints.
fn best_mi_gap_witness(
    p: &[f64],
    q: &[f64],
    w: &Channel,
    w_prime: &Channel,
) -> Result<Option<(JointDistribution, f64)>> {
    const LAMBDAS: [f64; 6] = [0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999];
    let mut best: Option<(JointDistribution, f64)> = None;
    for &lam in &LAMBDAS {
        for &(a, b) in &[(lam, 1.0 - lam), (1.0 - lam, lam)] {
            let rows = vec![
                p.iter().map(|&v| a * v).collect::<Vec<f64>>(),
                q.iter().map(|&v| b * v).collect::<Vec<f64>>(),
            ];
            let joint = JointDistribution::new(rows)?;
            let gap = mi_through(&joint, w)? - mi_through(&joint, w_prime)?;
            if best.as_ref().map_or(true, |(_, g)| gap > *g) {
                best = Some((joint, gap));
            }
        }
    }
    Ok(best.filter(|(_, g)| *g > 0.0))
}

/// Sampled falsifier for "`w_prime` is less noisy than `w`": draws prior
/// pairs `(P, Q)` (uniform-Dirichlet, low-entropy, and point-mass-perturbed
/// flavors, sharded deterministically by seed) and checks
/// `D(P_Y‖Q_Y) ≤ D(P_{Y′}‖Q_{Y′})`. On a violation it converts the pair
/// into an auxiliary-variable witness and returns
/// [`LessNoisyVerdict::NotLessNoisy`] as soon as the witness gap is
/// conclusive.
pub fn less_noisy_sampled(
    w: &Channel,
    w_prime: &Channel,
    trials: usize,
    seed: u64,
) -> Result<LessNoisyVerdict> {
    if w.input_size() != w_prime.input_size() {
        return Err(Error::AlphabetMismatch {
            left: w.input_size(),
            right: w_prime.input_size(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let n = w.input_size();
    const SHARD: usize = 4096;
    let mut max_violation = f64::NEG_INFINITY;
    let mut done = 0usize;
    let mut shard_index = 0u64;
    while done < trials {
        let count = SHARD.min(trials - done);
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(shard_index)));
        for k in 0..count {
            let flavor = ((done + k) % 5) as u8; // flavors 0,1 ≈ 40% boundary probes
            let p = sample_simplex(&mut rng, n, flavor);
            let q = sample_simplex(&mut rng, n, if flavor == 0 { 2 } else { flavor });
            let pd = crate::probcore::Distribution::new(p.clone())?;
            let qd = crate::probcore::Distribution::new(q.clone())?;
            let dw = divergence(DivergenceKind::Kl, &push_forward(w, &pd)?, &push_forward(w, &qd)?)?;
            let dwp = divergence(
                DivergenceKind::Kl,
                &push_forward(w_prime, &pd)?,
                &push_forward(w_prime, &qd)?,
            )?;
            let violated = if dw.is_infinite() {
                dwp.is_finite()
            } else {
                dw > dwp + 1e-12
            };
            if dw.is_finite() && dwp.is_finite() {
                max_violation = max_violation.max(dw - dwp);
            }
            if violated {
                if let Some((witness, gap)) = best_mi_gap_witness(&p, &q, w, w_prime)? {
                    if gap > WITNESS_GAP_TOL {
                        return Ok(LessNoisyVerdict::NotLessNoisy { witness, mi_gap: gap });
                    }
                }
            }
        }
        done += count;
        shard_index += 1;
    }
    if !max_violation.is_finite() {
        max_violation = 0.0;
    }
    Ok(LessNoisyVerdict::NoCounterexampleFound {
        trials,
        max_violation: max_violation / std::f64::consts::LN_2,
    })
}

/// Result of comparing a channel against its matched erasure channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErasureDominanceReport {
    /// Lower estimate of the KL contraction coefficient (exact for binary
    /// inputs).
    pub eta_lower: f64,
    /// Certified upper bound actually used for the construction.
    pub eta_upper: f64,
    /// True when the two coincide (binary-input exact path).
    pub eta_exact: bool,
    /// Erasure probability `1 − eta_upper` of the comparison channel.
    pub erasure_delta: f64,
    pub verdict: LessNoisyVerdict,
    /// Largest `|I(U;E) − (1−δ)·I(U;X)|` (bits) over sampled priors — the
    /// erasure identity, expected at numerical zero.
    pub max_identity_gap: f64,
}

/// Builds the erasure channel with erasure probability `1 − η` (using a
/// certified upper bound `η ≥ η_KL(w)`, exact for binary inputs) and checks
/// by sampling that it is less noisy than `w`, along with the exact linear
/// erasure identity `I(U;E) = (1−δ)·I(U;X)`.
pub fn erasure_dominance_check(
    w: &Channel,
    trials: usize,
    seed: u64,
) -> Result<ErasureDominanceReport> {
    let report = eta_kl(
        w,
        &EtaOptions {
            seed,
            ..EtaOptions::default()
        },
    )?;
    let eta_upper = eta_kl_certified_upper(w)?;
    let eta_exact = report.certified.eta_kl;
    let delta = (1.0 - eta_upper).clamp(0.0, 1.0);
    let ec = make_ec(w.input_size(), delta)?;
    let verdict = less_noisy_sampled(w, &ec, trials, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x00e7_a5u64));
    let mut max_gap = 0.0f64;
    for trial in 0..trials.min(256) {
        let u_size = 2 + trial % 3;
        let flat = sample_simplex(&mut rng, u_size * w.input_size(), (trial % 5) as u8);
        let joint = JointDistribution::new(
            flat.chunks(w.input_size()).map(|c| c.to_vec()).collect(),
        )?;
        let iux = joint.mutual_information(LogBase::Bits)?;
        let iue = mi_through(&joint, &ec)?;
        max_gap = max_gap.max((iue - (1.0 - delta) * iux).abs());
    }
    Ok(ErasureDominanceReport {
        eta_lower: report.eta_kl,
        eta_upper,
        eta_exact,
        erasure_delta: delta,
        verdict,
        max_identity_gap: max_gap,
    })
}

fn decode_component(index: usize, sizes: &[usize], coord: usize) -> usize {
    let mut stride = 1usize;
    for &s in &sizes[coord + 1..] {
        stride *= s;
    }
    (index / stride) % sizes[coord]
}

/// Subset-averaged information bound: the exact value of
/// `∑_{σ⊆[n]} (∏_{i∈σ} η_i)(∏_{i∉σ} (1−η_i)) · I(U; X_σ)` in bits, with
/// `I(U;X_∅) = 0`. Columns of `joint_ux` are multi-indexed over
/// `X₁ × … × Xₙ` (first coordinate most significant).
pub fn samorodnitsky_rhs(
    etas: &[f64],
    joint_ux: &JointDistribution,
    component_sizes: &[usize],
) -> Result<f64> {
    let n = etas.len();
    if n == 0 || n != component_sizes.len() {
        return Err(Error::InvalidParameter(
            "need matching, non-empty eta and size lists".into(),
        ));
    }
    if n > 12 {
        return Err(Error::SizeCap {
            requested: n,
            cap: 12,
        });
    }
    for &e in etas {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidParameter(format!(
                "contraction coefficients must lie in [0,1], got {e}"
            )));
        }
    }
    let mut total_cols = 1usize;
    for &s in component_sizes {
        if s == 0 {
            return Err(Error::InvalidParameter("component size zero".into()));
        }
        total_cols = total_cols.checked_mul(s).ok_or(Error::SizeCap {
            requested: usize::MAX,
            cap: 1 << 16,
        })?;
    }
    if total_cols != joint_ux.cols() {
        return Err(Error::AlphabetMismatch {
            left: total_cols,
            right: joint_ux.cols(),
        });
    }
    let rows = joint_ux.rows();
    let mut value = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut weight = 1.0;
        for (i, &e) in etas.iter().enumerate() {
            weight *= if mask & (1 << i) != 0 { e } else { 1.0 - e };
        }
        if weight == 0.0 {
            continue;
        }
        // Marginalize the columns onto the coordinates in the subset.
        let kept: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub_cols: usize = kept.iter().map(|&i| component_sizes[i]).product();
        let mut marg = vec![vec![0.0; sub_cols]; rows];
        for u in 0..rows {
            for c in 0..total_cols {
                let m = joint_ux.prob(u, c);
                if m == 0.0 {
                    continue;
                }
                let mut sub = 0usize;
                for &i in &kept {
                    sub = sub * component_sizes[i] + decode_component(c, component_sizes, i);
                }
                marg[u][sub] += m;
            }
        }
        value += weight * crate::probcore::mutual_information(&marg, LogBase::Bits)?;
    }
    // The empty subset contributes weight·0.
    Ok(value)
}

/// Checks `I(U;Yⁿ) ≤ ∑_σ (∏_{i∈σ} η_i)(∏_{i∉σ}(1−η_i)) I(U;X_σ)` with
/// `η_i` a certified upper bound on each component's KL contraction
/// coefficient (exact for binary inputs). Evaluates the given prior and
/// `trials` sampled priors of the same shape; returns the largest
/// `LHS − RHS` in bits (must be ≤ 1e-9 up to numerics).
pub fn samorodnitsky_verify(
    components: &[Channel],
    joint_ux: &JointDistribution,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if components.is_empty() {
        return Err(Error::InvalidParameter("need at least one component".into()));
    }
    let sizes: Vec<usize> = components.iter().map(|w| w.input_size()).collect();
    let total: usize = sizes.iter().product();
    if joint_ux.rows().saturating_mul(total) > (1 << 16) {
        return Err(Error::SizeCap {
            requested: joint_ux.rows() * total,
            cap: 1 << 16,
        });
    }
    let etas: Vec<f64> = components
        .iter()
        .map(eta_kl_certified_upper)
        .collect::<Result<_>>()?;
    let product = tensor_all(components)?;
    let check = |joint: &JointDistribution| -> Result<f64> {
        let lhs = mi_through(joint, &product)?;
        let rhs = samorodnitsky_rhs(&etas, joint, &sizes)?;
        Ok(lhs - rhs)
    };
    let mut worst = check(joint_ux)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    for trial in 0..trials {
        let flat = sample_simplex(&mut rng, joint_ux.rows() * total, (trial % 5) as u8);
        let joint =
            JointDistribution::new(flat.chunks(total).map(|c| c.to_vec()).collect())?;
        worst = worst.max(check(&joint)?);
    }
    Ok(worst)
}

/// Tensorization probe for the less-noisy order: with `w1′ ⪰ w1` and
/// `w2′ ⪰ w2` letter-wise, samples priors `P_{U,X₁,X₂}` and returns the
/// largest `I(U;Y₁,Y₂) − I(U;Y₁′,Y₂′)` in bits (≤ 1e-9 up to numerics when
/// the letter-wise dominances hold).
pub fn tensorize_check(
    w1: &Channel,
    w1p: &Channel,
    w2: &Channel,
    w2p: &Channel,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if w1.input_size() != w1p.input_size() {
        return Err(Error::AlphabetMismatch {
            left: w1.input_size(),
            right: w1p.input_size(),
        });
    }
    if w2.input_size() != w2p.input_size() {
        return Err(Error::AlphabetMismatch {
            left: w2.input_size(),
            right: w2p.input_size(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let weak = tensor(w1, w2)?;
    let strong = tensor(w1p, w2p)?;
    let cols = weak.input_size();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..trials {
        let u_size = 2 + trial % 3;
        let flat = sample_simplex(&mut rng, u_size * cols, (trial % 5) as u8);
        let joint = JointDistribution::new(flat.chunks(cols).map(|c| c.to_vec()).collect())?;
        let gap = mi_through(&joint, &weak)? - mi_through(&joint, &strong)?;
        worst = worst.max(gap);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::make_bsc;

    fn identity2() -> Channel {
        Channel::identity(2).unwrap()
    }

    #[test]
    fn equal_channels_have_no_counterexample() {
        let w = make_bsc(0.3).unwrap();
        let v = less_noisy_sampled(&w, &w, 400, 0).unwrap();
        match v {
            LessNoisyVerdict::NoCounterexampleFound { trials, max_violation } => {
                assert_eq!(trials, 400);
                assert!(max_violation <= 1e-9, "max violation {max_violation}");
            }
            _ => panic!("expected no counterexample"),
        }
    }

    #[test]
    fn identity_dominates_bsc() {
        let v = less_noisy_sampled(&make_bsc(0.3).unwrap(), &identity2(), 400, 1).unwrap();
        assert!(v.is_clean());
        // And degradedness orders BSCs by crossover.
        let v = less_noisy_sampled(
            &make_bsc(0.25).unwrap(),
            &make_bsc(0.1).unwrap(),
            400,
            2,
        )
        .unwrap();
        assert!(v.is_clean());
    }

    #[test]
    fn bsc_does_not_dominate_identity() {
        let v = less_noisy_sampled(&identity2(), &make_bsc(0.3).unwrap(), 400, 3).unwrap();
        match v {
            LessNoisyVerdict::NotLessNoisy { witness, mi_gap } => {
                assert!(mi_gap > WITNESS_GAP_TOL);
                // Re-verify the witness from scratch.
                let direct = mi_through(&witness, &identity2()).unwrap()
                    - mi_through(&witness, &make_bsc(0.3).unwrap()).unwrap();
                assert!((direct - mi_gap).abs() < 1e-12);
            }
            _ => panic!("expected a counterexample"),
        }
        // Reversed BSC order also fails.
        let v = less_noisy_sampled(
            &make_bsc(0.1).unwrap(),
            &make_bsc(0.25).unwrap(),
            400,
            4,
        )
        .unwrap();
        assert!(!v.is_clean());
    }

    #[test]
    fn mismatched_inputs_and_zero_trials_error() {
        let w3 = Channel::identity(3).unwrap();
        assert!(less_noisy_sampled(&identity2(), &w3, 10, 0).is_err());
        assert!(less_noisy_sampled(&identity2(), &identity2(), 0, 0).is_err());
    }

    #[test]
    fn erasure_dominates_bsc() {
        let r = erasure_dominance_check(&make_bsc(0.2).unwrap(), 800, 0).unwrap();
        assert!((r.eta_upper - 0.36).abs() < 1e-9);
        assert!(r.eta_exact);
        assert!((r.erasure_delta - 0.64).abs() < 1e-9);
        assert!(r.verdict.is_clean());
        assert!(r.max_identity_gap < 1e-12, "identity gap {}", r.max_identity_gap);
    }

    #[test]
    fn erasure_dominance_degenerate_cases() {
        // Noiseless channel: η = 1, erasure probability 0, E ≡ X.
        let r = erasure_dominance_check(&identity2(), 200, 0).unwrap();
        assert!((r.eta_upper - 1.0).abs() < 1e-12);
        assert!(r.erasure_delta.abs() < 1e-12);
        assert!(r.verdict.is_clean());
        // An erasure channel is dominated by itself.
        let r = erasure_dominance_check(&make_ec(2, 0.3).unwrap(), 400, 5).unwrap();
        assert!((r.eta_upper - 0.7).abs() < 1e-9);
        assert!((r.erasure_delta - 0.3).abs() < 1e-9);
        assert!(r.verdict.is_clean());
    }

    #[test]
    fn rhs_hand_values() {
        // n = 1: η · I(U;X).
        let j = JointDistribution::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let i = j.mutual_information(LogBase::Bits).unwrap();
        let r = samorodnitsky_rhs(&[0.37], &j, &[2]).unwrap();
        assert!((r - 0.37 * i).abs() < 1e-12);
        // X₁ = X₂ = U ~ Bern(½), η = ½ each: 0.75 bits.
        let j2 = JointDistribution::new(vec![
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5],
        ])
        .unwrap();
        let r = samorodnitsky_rhs(&[0.5, 0.5], &j2, &[2, 2]).unwrap();
        assert!((r - 0.75).abs() < 1e-12, "got {r}");
        // All η = 1 collapses to I(U;Xⁿ).
        let r = samorodnitsky_rhs(&[1.0, 1.0], &j2, &[2, 2]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // Shape guards.
        assert!(samorodnitsky_rhs(&[0.5], &j2, &[2, 2]).is_err());
        assert!(samorodnitsky_rhs(&[0.5, 0.5], &j2, &[2, 3]).is_err());
        assert!(samorodnitsky_rhs(&[1.5, 0.5], &j2, &[2, 2]).is_err());
    }

    #[test]
    fn subset_bound_holds_on_random_priors() {
        let w = make_bsc(0.2).unwrap();
        let j = JointDistribution::new(vec![
            vec![0.3, 0.1, 0.05, 0.05],
            vec![0.05, 0.05, 0.1, 0.3],
        ])
        .unwrap();
        let worst = samorodnitsky_verify(&[w.clone(), w.clone()], &j, 60, 0).unwrap();
        assert!(worst <= 1e-9, "violation {worst}");
        // Noiseless components: the bound is met with equality (η = 1).
        let worst = samorodnitsky_verify(&[identity2(), identity2()], &j, 20, 1).unwrap();
        assert!(worst.abs() <= 1e-9);
    }

    #[test]
    fn tensorization_probe() {
        let w = make_bsc(0.3).unwrap();
        // Identical channels: zero gap.
        let v = tensorize_check(&w, &w, &w, &w, 60, 0).unwrap();
        assert!(v.abs() <= 1e-9);
        // Matched erasure dominators on both letters.
        let eta = 0.16; // (1 − 2·0.3)²
        let ec = make_ec(2, 1.0 - eta).unwrap();
        let v = tensorize_check(&w, &ec, &w, &ec, 80, 1).unwrap();
        assert!(v <= 1e-9, "violation {v}");
    }
}
