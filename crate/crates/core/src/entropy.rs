//! Entropy and divergence functionals: Shannon, Renyi, the two-parameter
//! logarithmic norm entropy (LNE) with its conditional extension (CLNE) and
//! diagonal limits, Kullback-Leibler, and the relative (alpha,beta)-entropy
//! in unconditional and conditional-joint forms.
//!
//! All values are in nats. Parameters within [`SINGULARITY_TOL`] of a
//! removable singularity (alpha = 1 for Renyi, beta = alpha for LNE/CLNE)
//! must be routed to the closed-form limit operation; the off-diagonal
//! functions refuse them instead of limping through catastrophic
//! cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::log_sum_exp_iter;
use crate::pmf::{JointPmf, Pmf};

/// Distance from a removable singularity below which the closed-form limit
/// operation must be used instead.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// Order pair for the LNE/CLNE family and the relative (alpha,beta)-entropy:
/// alpha > 0, beta real. Operations that need beta != alpha or beta != 0
/// check it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    alpha: f64,
    beta: f64,
}

impl AlphaBeta {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::NonPositiveOrder(alpha));
        }
        if !beta.is_finite() {
            return Err(Error::DegenerateParameters(format!("beta = {beta} must be finite")));
        }
        Ok(AlphaBeta { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn require_off_diagonal(&self) -> Result<()> {
        if (self.beta - self.alpha).abs() < SINGULARITY_TOL {
            return Err(Error::DegenerateParameters(format!(
                "beta = {} is within {SINGULARITY_TOL} of alpha = {}; use the diagonal-limit form",
                self.beta, self.alpha
            )));
        }
        Ok(())
    }

    fn require_nonzero_beta(&self) -> Result<()> {
        if self.beta.abs() < SINGULARITY_TOL {
            return Err(Error::DegenerateParameters(
                "beta must be bounded away from 0 (the relative entropy divides by beta)".into(),
            ));
        }
        Ok(())
    }
}

/// Shannon entropy -sum P ln P.
pub fn shannon(p: &Pmf) -> f64 {
    -p.probs().iter().zip(p.log_probs()).map(|(&pr, &lp)| pr * lp).sum::<f64>()
}

/// Renyi entropy of order alpha: ln(sum P^alpha)/(1-alpha); within
/// [`SINGULARITY_TOL`] of alpha = 1 it returns the Shannon limit.
pub fn renyi(p: &Pmf, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveOrder(alpha));
    }
    if (alpha - 1.0).abs() < SINGULARITY_TOL {
        return Ok(shannon(p));
    }
    Ok(p.log_power_sum(alpha) / (1.0 - alpha))
}

/// Logarithmic norm entropy
/// (alpha*beta/(beta-alpha)) * ln[(sum P^alpha)^(1/alpha) / (sum P^beta)^(1/beta)],
/// evaluated as (beta*lnW_alpha - alpha*lnW_beta)/(beta-alpha), which is also
/// exact at beta = 0.
pub fn lne(p: &Pmf, ab: AlphaBeta) -> Result<f64> {
    ab.require_off_diagonal()?;
    let (a, b) = (ab.alpha, ab.beta);
    Ok((b * p.log_power_sum(a) - a * p.log_power_sum(b)) / (b - a))
}

/// Diagonal limit of the LNE at alpha = beta:
/// -alpha * (sum P^alpha ln P)/W_alpha + ln W_alpha. Equals Shannon at
/// alpha = 1.
pub fn lne_diag(p: &Pmf, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveOrder(alpha));
    }
    let lw = p.log_power_sum(alpha);
    let tilted: f64 = p.log_probs().iter().map(|&lp| (alpha * lp - lw).exp() * lp).sum();
    Ok(-alpha * tilted + lw)
}

/// Conditional logarithmic norm entropy over a joint pmf:
/// (alpha/(beta-alpha)) * ln[ sum_y (sum_x P^alpha)^(beta/alpha) / sum_y sum_x P^beta ].
pub fn clne(j: &JointPmf, ab: AlphaBeta) -> Result<f64> {
    ab.require_off_diagonal()?;
    let (a, b) = (ab.alpha, ab.beta);
    let num = log_sum_exp_iter((0..j.y_len()).map(|yi| (b / a) * j.row_log_power_sum(yi, a)));
    let den = j.log_power_sum(b);
    Ok(a / (b - a) * (num - den))
}

/// Diagonal limit of the CLNE at alpha = beta, two-term closed form:
/// -alpha * (ΣΣ P^a ln P)/W + (Σ_y S_y ln S_y)/W with S_y = Σ_x P(x,y)^a and
/// W = Σ_y S_y.
pub fn clne_diag(j: &JointPmf, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveOrder(alpha));
    }
    let lw = j.log_power_sum(alpha);
    let mut tilted = 0.0;
    for yi in 0..j.y_len() {
        for &lp in j.log_row(yi) {
            tilted += (alpha * lp - lw).exp() * lp;
        }
    }
    let mut rows = 0.0;
    for yi in 0..j.y_len() {
        let ls = j.row_log_power_sum(yi, alpha);
        rows += (ls - lw).exp() * ls;
    }
    Ok(-alpha * tilted + rows)
}

/// Kullback-Leibler relative entropy sum Q ln(Q/P), >= 0.
pub fn kl(q: &Pmf, p: &Pmf) -> Result<f64> {
    if !q.same_alphabet(p) {
        return Err(Error::AlphabetMismatch("kl requires identical alphabets".into()));
    }
    Ok(q
        .probs()
        .iter()
        .zip(q.log_probs())
        .zip(p.log_probs())
        .map(|((&qv, &lq), &lp)| qv * (lq - lp))
        .sum())
}

/// Relative (alpha,beta)-entropy of P from Q (unconditional form):
///
/// ln(sum P^alpha)/(alpha-beta)
///   - (alpha/(beta(alpha-beta))) * ln(sum P^beta Q^(alpha-beta))
///   + ln(sum Q^alpha)/beta.
///
/// A proper divergence: >= 0 with equality iff P = Q.
pub fn relative_ab(p: &Pmf, q: &Pmf, ab: AlphaBeta) -> Result<f64> {
    if !p.same_alphabet(q) {
        return Err(Error::AlphabetMismatch("relative_ab requires identical alphabets".into()));
    }
    ab.require_off_diagonal()?;
    ab.require_nonzero_beta()?;
    let (a, b) = (ab.alpha, ab.beta);
    let cross = log_sum_exp_iter(
        p.log_probs().iter().zip(q.log_probs()).map(|(&lp, &lq)| b * lp + (a - b) * lq),
    );
    Ok(p.log_power_sum(a) / (a - b) - a / (b * (a - b)) * cross + q.log_power_sum(a) / b)
}

/// Conditional-joint relative (alpha,beta)-entropy:
///
/// (alpha/(beta(beta-alpha))) * ln[
///   sum_y {sum_x P^beta Q^(alpha-beta)} {sum_x Q^alpha}^(beta/alpha - 1)
///   / sum_y {sum_x P^alpha}^(beta/alpha) ].
///
/// Reduces to [`relative_ab`] when |Y| = 1 and satisfies the defining
/// identity q*RE = (1/rho) ln L* - CLNE at (alpha,beta) = (q/(1+rho), q).
pub fn relative_ab_cond(pj: &JointPmf, qj: &JointPmf, ab: AlphaBeta) -> Result<f64> {
    if !pj.same_alphabets(qj) {
        return Err(Error::AlphabetMismatch(
            "relative_ab_cond requires identical X and Y alphabets".into(),
        ));
    }
    ab.require_off_diagonal()?;
    ab.require_nonzero_beta()?;
    let (a, b) = (ab.alpha, ab.beta);
    let num = log_sum_exp_iter((0..pj.y_len()).map(|yi| {
        let cross = log_sum_exp_iter(
            pj.log_row(yi).iter().zip(qj.log_row(yi)).map(|(&lp, &lq)| b * lp + (a - b) * lq),
        );
        cross + (b / a - 1.0) * qj.row_log_power_sum(yi, a)
    }));
    let den = log_sum_exp_iter((0..pj.y_len()).map(|yi| (b / a) * pj.row_log_power_sum(yi, a)));
    Ok(a / (b * (b - a)) * (num - den))
}
