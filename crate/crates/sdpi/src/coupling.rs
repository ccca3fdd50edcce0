//! Simultaneously optimal couplings of two joint distributions.
//!
//! For joints `P_XY`, `Q_XY` there is always a coupling `π` of the two that
//! attains `π[(X,Y) ≠ (X′,Y′)] = d_TV(P_XY, Q_XY)` and `π[X ≠ X′] =
//! d_TV(P_X, Q_X)` at the same time. [`doubly_optimal_coupling`] constructs
//! one by solving the transportation linear program with cost
//! `1{(x,y)≠(x′,y′)} + 1{x≠x′}`, whose optimum equals the sum of the two
//! total variations. Adding the third term `1{y≠y′}`
//! ([`triple_coupling_min`]) shows the analogous *triple* of equalities can
//! be unattainable: on `P = diag(½,½)`, `Q = antidiag(½,½)` the three-term
//! optimum is 2 while the TV sum is only 1.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::channels::JointDistribution;
use crate::{Error, Result};

/// Cap on `|X|·|Y|`; the LP has `(|X||Y|)²` variables.
pub const COUPLING_SUPPORT_CAP: usize = 32;

/// Entrywise tolerance for marginal-constraint satisfaction.
pub const COUPLING_CONSTRAINT_TOL: f64 = 1e-9;

/// Tolerance on the optimal value against its total-variation expression.
pub const COUPLING_OPTIMALITY_TOL: f64 = 1e-8;

/// A coupling of two joint distributions over a common product alphabet,
/// optimal for the two-term transportation cost.
///
/// `joint[i][j]` couples cell `i = x·|Y| + y` of the left joint with cell
/// `j = x′·|Y| + y′` of the right one; rows sum to the left joint and
/// columns to the right joint, entrywise within [`COUPLING_CONSTRAINT_TOL`].
#[derive(Debug, Clone, Serialize)]
pub struct Coupling {
    pub joint: Vec<Vec<f64>>,
    pub x_size: usize,
    pub y_size: usize,
    pub left_marginal: JointDistribution,
    pub right_marginal: JointDistribution,
    /// Optimal two-term cost `π[(X,Y)≠(X′,Y′)] + π[X≠X′]`.
    pub cost: f64,
    pub pr_pair_differs: f64,
    pub pr_x_differs: f64,
    pub pr_y_differs: f64,
    pub tv_joint: f64,
    pub tv_x: f64,
    pub tv_y: f64,
}

fn flatten(j: &JointDistribution) -> Vec<f64> {
    let mut out = Vec::with_capacity(j.rows() * j.cols());
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            out.push(j.prob(x, y));
        }
    }
    out
}

fn tv_vec(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn marginal_x(j: &JointDistribution) -> Result<Vec<f64>> {
    Ok(j.marginal_rows()?.as_slice().to_vec())
}

fn marginal_y(j: &JointDistribution) -> Result<Vec<f64>> {
    Ok(j.marginal_cols()?.as_slice().to_vec())
}

fn check_shapes(p: &JointDistribution, q: &JointDistribution) -> Result<()> {
    if p.rows() != q.rows() {
        return Err(Error::AlphabetMismatch {
            left: p.rows(),
            right: q.rows(),
        });
    }
    if p.cols() != q.cols() {
        return Err(Error::AlphabetMismatch {
            left: p.cols(),
            right: q.cols(),
        });
    }
    let n = p.rows() * p.cols();
    if n > COUPLING_SUPPORT_CAP {
        return Err(Error::SizeCap {
            requested: n,
            cap: COUPLING_SUPPORT_CAP,
        });
    }
    Ok(())
}

/// Solves the transportation LP between the flattened joints under the given
/// cell-pair cost, returning the optimal value and the coupling matrix.
/// Variables and constraints are laid out in a fixed lexicographic order, so
/// the result is deterministic.
fn solve_transport(
    p_flat: &[f64],
    q_flat: &[f64],
    cost: impl Fn(usize, usize) -> f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = p_flat.len();
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            vars.push(prob.add_var(cost(i, j), (0.0, 1.0)));
        }
    }
    for (i, &mass) in p_flat.iter().enumerate() {
        let expr: Vec<_> = (0..n).map(|j| (vars[i * n + j], 1.0)).collect();
        prob.add_constraint(expr.as_slice(), ComparisonOp::Eq, mass);
    }
    for (j, &mass) in q_flat.iter().enumerate() {
        let expr: Vec<_> = (0..n).map(|i| (vars[i * n + j], 1.0)).collect();
        prob.add_constraint(expr.as_slice(), ComparisonOp::Eq, mass);
    }
    let solution = prob.solve().map_err(|e| Error::LpFailure(e.to_string()))?;
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            matrix[i][j] = solution[vars[i * n + j]].max(0.0);
        }
    }
    for (i, &mass) in p_flat.iter().enumerate() {
        let row_sum: f64 = matrix[i].iter().sum();
        if (row_sum - mass).abs() > COUPLING_CONSTRAINT_TOL {
            return Err(Error::LpFailure(format!(
                "left marginal constraint violated at cell {i}: {row_sum} vs {mass}"
            )));
        }
    }
    for (j, &mass) in q_flat.iter().enumerate() {
        let col_sum: f64 = matrix.iter().map(|r| r[j]).sum();
        if (col_sum - mass).abs() > COUPLING_CONSTRAINT_TOL {
            return Err(Error::LpFailure(format!(
                "right marginal constraint violated at cell {j}: {col_sum} vs {mass}"
            )));
        }
    }
    Ok((solution.objective(), matrix))
}

fn mismatch_probs(matrix: &[Vec<f64>], cols: usize) -> (f64, f64, f64) {
    let n = matrix.len();
    let (mut pair, mut xm, mut ym) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let m = matrix[i][j];
            if m == 0.0 {
                continue;
            }
            if i != j {
                pair += m;
            }
            if i / cols != j / cols {
                xm += m;
            }
            if i % cols != j % cols {
                ym += m;
            }
        }
    }
    (pair, xm, ym)
}

/// Couples `p` and `q` minimizing `π[(X,Y)≠(X′,Y′)] + π[X≠X′]`. Any optimum
/// of this two-term cost attains both total variations simultaneously; the
/// construction verifies that the optimal value equals
/// `d_TV(P_XY,Q_XY) + d_TV(P_X,Q_X)` within [`COUPLING_OPTIMALITY_TOL`].
pub fn doubly_optimal_coupling(p: &JointDistribution, q: &JointDistribution) -> Result<Coupling> {
    check_shapes(p, q)?;
    let cols = p.cols();
    let p_flat = flatten(p);
    let q_flat = flatten(q);
    let cost = |i: usize, j: usize| {
        let mut c = 0.0;
        if i != j {
            c += 1.0;
        }
        if i / cols != j / cols {
            c += 1.0;
        }
        c
    };
    let (value, matrix) = solve_transport(&p_flat, &q_flat, cost)?;
    let tv_joint = tv_vec(&p_flat, &q_flat);
    let tv_x = tv_vec(&marginal_x(p)?, &marginal_x(q)?);
    let tv_y = tv_vec(&marginal_y(p)?, &marginal_y(q)?);
    if (value - (tv_joint + tv_x)).abs() > COUPLING_OPTIMALITY_TOL {
        return Err(Error::LpFailure(format!(
            "optimal cost {value} deviates from TV sum {}",
            tv_joint + tv_x
        )));
    }
    let (pr_pair_differs, pr_x_differs, pr_y_differs) = mismatch_probs(&matrix, cols);
    Ok(Coupling {
        joint: matrix,
        x_size: p.rows(),
        y_size: cols,
        left_marginal: p.clone(),
        right_marginal: q.clone(),
        cost: value,
        pr_pair_differs,
        pr_x_differs,
        pr_y_differs,
        tv_joint,
        tv_x,
        tv_y,
    })
}

/// Minimum of the three-term cost
/// `π[(X,Y)≠(X′,Y′)] + π[X≠X′] + π[Y≠Y′]` over couplings of `p` and `q`.
/// Exceeding `d_TV(P_XY,Q_XY) + d_TV(P_X,Q_X) + d_TV(P_Y,Q_Y)` certifies
/// that no coupling attains all three total variations at once.
pub fn triple_coupling_min(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    check_shapes(p, q)?;
    let cols = p.cols();
    let cost = |i: usize, j: usize| {
        let mut c = 0.0;
        if i != j {
            c += 1.0;
        }
        if i / cols != j / cols {
            c += 1.0;
        }
        if i % cols != j % cols {
            c += 1.0;
        }
        c
    };
    let (value, _) = solve_transport(&flatten(p), &flatten(q), cost)?;
    Ok(value)
}
