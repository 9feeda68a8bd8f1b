//! Guessing strategies as per-y rank bijections, their q-normalized moments,
//! and the Q^(G) pmf canonically attached to a strategy.
//!
//! A strategy assigns, for every side-information value y, a rank in
//! 1..=|X| to each symbol; rank 1 is guessed first. The optimal strategy
//! guesses in decreasing order of the q-escort of the conditional pmf, which
//! minimizes E_q[G^rho] simultaneously for every rho > 0. Ties are broken by
//! ascending label position so results are reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{close, log_sum_exp_iter};
use crate::pmf::{JointPmf, NEParams, Pmf};

/// Per-y bijection from symbol positions to guess ranks 1..=|X|.
/// Unconditional strategies are the |Y| = 1 case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy", into = "RawStrategy")]
pub struct GuessingStrategy {
    y_labels: Vec<String>,
    /// ranks[yi][xi] = guess number of symbol xi when Y = y_labels[yi].
    ranks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawStrategy {
    y_labels: Vec<String>,
    ranks: Vec<Vec<usize>>,
}

impl TryFrom<RawStrategy> for GuessingStrategy {
    type Error = Error;
    fn try_from(raw: RawStrategy) -> Result<Self> {
        GuessingStrategy::new(raw.y_labels, raw.ranks)
    }
}

impl From<GuessingStrategy> for RawStrategy {
    fn from(g: GuessingStrategy) -> RawStrategy {
        RawStrategy { y_labels: g.y_labels, ranks: g.ranks }
    }
}

impl GuessingStrategy {
    /// Validates that every row is a permutation of 1..=|X|.
    pub fn new<L: Into<String>>(y_labels: Vec<L>, ranks: Vec<Vec<usize>>) -> Result<Self> {
        let y_labels: Vec<String> = y_labels.into_iter().map(Into::into).collect();
        if y_labels.is_empty() || ranks.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if y_labels.len() != ranks.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} y labels vs {} rank rows",
                y_labels.len(),
                ranks.len()
            )));
        }
        let m = ranks[0].len();
        if m == 0 {
            return Err(Error::EmptyAlphabet);
        }
        for row in &ranks {
            if row.len() != m {
                return Err(Error::AlphabetMismatch("ragged rank rows".into()));
            }
            let mut seen = vec![false; m];
            for &r in row {
                if r < 1 || r > m || seen[r - 1] {
                    return Err(Error::AlphabetMismatch(format!(
                        "row is not a permutation of 1..={m}"
                    )));
                }
                seen[r - 1] = true;
            }
        }
        Ok(GuessingStrategy { y_labels, ranks })
    }

    /// Identity ranking (1, 2, ..., |X|) for every y.
    pub fn identity<L: Into<String>>(y_labels: Vec<L>, x_len: usize) -> Result<Self> {
        let rows = y_labels.iter().map(|_| (1..=x_len).collect()).collect();
        GuessingStrategy::new(y_labels, rows)
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn x_len(&self) -> usize {
        self.ranks[0].len()
    }

    pub fn y_len(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, yi: usize, xi: usize) -> usize {
        self.ranks[yi][xi]
    }

    pub fn rank_rows(&self) -> &[Vec<usize>] {
        &self.ranks
    }

    pub(crate) fn matches_joint(&self, j: &JointPmf) -> Result<()> {
        if self.y_labels != j.y_labels() || self.x_len() != j.x_len() {
            return Err(Error::AlphabetMismatch(
                "strategy alphabet does not match the source".into(),
            ));
        }
        Ok(())
    }
}

/// G^rho with integer fast paths for rho = 1 and 2.
pub fn rank_pow(g: usize, rho: f64) -> f64 {
    if rho == 1.0 {
        g as f64
    } else if rho == 2.0 {
        (g * g) as f64
    } else {
        (rho * (g as f64).ln()).exp()
    }
}

fn ranks_by_descending_key(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    // stable sort keeps ascending label position on ties
    order.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).expect("finite sort keys"));
    let mut ranks = vec![0usize; keys.len()];
    for (pos, &xi) in order.iter().enumerate() {
        ranks[xi] = pos + 1;
    }
    ranks
}

/// Optimal unconditional strategy: ranks in decreasing order of the q-escort
/// P_q(x), ties by ascending label position.
pub fn optimal_strategy(p: &Pmf, q: f64) -> GuessingStrategy {
    let keys: Vec<f64> = p.log_probs().iter().map(|&lp| q * lp).collect();
    GuessingStrategy::new(vec![crate::pmf::SINGLETON_Y.to_string()], vec![ranks_by_descending_key(&keys)])
        .expect("sorted ranks form a permutation")
}

/// Optimal conditional strategy: per y, ranks in decreasing order of
/// P_q(x|y).
pub fn optimal_strategy_joint(j: &JointPmf, q: f64) -> GuessingStrategy {
    let rows: Vec<Vec<usize>> = (0..j.y_len())
        .map(|yi| {
            let keys: Vec<f64> = j.log_row(yi).iter().map(|&lp| q * lp).collect();
            ranks_by_descending_key(&keys)
        })
        .collect();
    GuessingStrategy::new(j.y_labels().to_vec(), rows).expect("sorted ranks form a permutation")
}

/// Strategy built from a mismatched source Q: guesses in decreasing order of
/// Q_q(x|y). Named alias of [`optimal_strategy_joint`] so mismatch
/// experiments read literally.
pub fn mismatched_strategy(qj: &JointPmf, q: f64) -> GuessingStrategy {
    optimal_strategy_joint(qj, q)
}

/// ln E_q[G(X|Y)^rho], the work-horse behind moments and redundancies.
pub fn log_q_moment(g: &GuessingStrategy, j: &JointPmf, params: &NEParams) -> Result<f64> {
    g.matches_joint(j)?;
    let (q, rho) = (params.q(), params.rho());
    let num = log_sum_exp_iter((0..j.y_len()).flat_map(|yi| {
        let row = j.log_row(yi);
        (0..j.x_len()).map(move |xi| q * row[xi] + rho * (g.rank(yi, xi) as f64).ln())
    }));
    let den = j.log_power_sum(q);
    let value = num - den;

    // Internal dual route: the escort form of the q-normalized expectation,
    // sum_y P_q(.,y) sum_x P_q(x|y) G^rho, materialized linearly.
    #[cfg(debug_assertions)]
    {
        let ej = j.escort_joint(q);
        let mut escort_form = 0.0;
        for yi in 0..j.y_len() {
            for xi in 0..j.x_len() {
                escort_form += ej.prob(yi, xi) * rank_pow(g.rank(yi, xi), rho);
            }
        }
        debug_assert!(
            close(value.exp(), escort_form, 1e-12, 1e-300),
            "direct and escort moment forms disagree: {} vs {escort_form}",
            value.exp()
        );
    }
    Ok(value)
}

/// E_q[G(X|Y)^rho] = sum G^rho P^q / sum P^q.
pub fn q_moment(g: &GuessingStrategy, j: &JointPmf, params: &NEParams) -> Result<f64> {
    Ok(log_q_moment(g, j, params)?.exp())
}

/// Unconditional overload of [`q_moment`].
pub fn q_moment_pmf(g: &GuessingStrategy, p: &Pmf, params: &NEParams) -> Result<f64> {
    q_moment(g, &p.to_joint(), params)
}

/// E_q[ln G(X|Y)] = sum P^q ln G / sum P^q.
pub fn q_log_moment(g: &GuessingStrategy, j: &JointPmf, q: f64) -> Result<f64> {
    g.matches_joint(j)?;
    let lw = j.log_power_sum(q);
    let mut acc = 0.0;
    for yi in 0..j.y_len() {
        for (xi, &lp) in j.log_row(yi).iter().enumerate() {
            acc += (q * lp - lw).exp() * (g.rank(yi, xi) as f64).ln();
        }
    }
    Ok(acc)
}

/// Unconditional overload of [`q_log_moment`].
pub fn q_log_moment_pmf(g: &GuessingStrategy, p: &Pmf, q: f64) -> Result<f64> {
    q_log_moment(g, &p.to_joint(), q)
}

/// The joint pmf Q^(G) attached to a strategy:
/// Q^(G)(x,y) = 1/(|Y| s_{rho,q} G(x|y)^{(1+rho)/q}) with
/// s_{rho,q} = sum_{i=1..|X|} i^{-(1+rho)/q}. Its conditional q-escort is
/// 1/(s_{rho,1} G^{1+rho}), so the escort-optimal strategy for Q^(G)
/// recovers G. Requires q != 0. `x_labels` names the X alphabet the ranks
/// refer to (the strategy itself only carries y labels).
pub fn q_pmf_from_strategy(
    g: &GuessingStrategy,
    params: &NEParams,
    x_labels: &[String],
) -> Result<JointPmf> {
    params.require_nonzero_q()?;
    if x_labels.len() != g.x_len() {
        return Err(Error::AlphabetMismatch(format!(
            "{} x labels vs strategy width {}",
            x_labels.len(),
            g.x_len()
        )));
    }
    let (q, rho) = (params.q(), params.rho());
    let expo = (1.0 + rho) / q;
    let m = g.x_len();
    let s: f64 = (1..=m).map(|i| (-expo * (i as f64).ln()).exp()).sum();
    let k = g.y_len() as f64;
    let rows: Vec<Vec<f64>> = (0..g.y_len())
        .map(|yi| {
            (0..m)
                .map(|xi| (-expo * (g.rank(yi, xi) as f64).ln()).exp() / (k * s))
                .collect()
        })
        .collect();
    let total: f64 = rows.iter().flatten().sum();
    assert!((total - 1.0).abs() <= 1e-12, "Q^(G) must sum to 1, got {total}");
    let qj = JointPmf::new(x_labels.to_vec(), g.y_labels().to_vec(), &rows)?;

    // The proof's display: conditional q-escort equals 1/(s_{rho,1} G^{1+rho}).
    let s1: f64 = (1..=m).map(|i| (i as f64).powf(-(1.0 + rho))).sum();
    for yi in 0..g.y_len() {
        let esc = qj.conditional_by_index(yi).escort(q);
        for xi in 0..m {
            let closed = 1.0 / (s1 * rank_pow(g.rank(yi, xi), 1.0 + rho));
            assert!(
                close(esc.prob(xi), closed, 1e-12, 1e-15),
                "conditional escort of Q^(G) deviates from the closed form"
            );
        }
    }
    Ok(qj)
}
