//! Probability-simplex data model: validated pmfs, joint pmfs, escort
//! transforms and power sums.
//!
//! Zero probabilities are forbidden by construction: the non-extensivity
//! index q may be negative, so every stored entry must satisfy `p > 0` for
//! `p^q` to stay finite. Entries are kept both linearly and as natural logs;
//! every power sum goes through log-sum-exp.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::math::log_sum_exp_iter;

/// Absolute tolerance on the total mass after construction-time
/// renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Placeholder side-information label used when an unconditional problem is
/// lifted to a single-row joint.
pub const SINGLETON_Y: &str = "_";

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::NonPositiveWeight { index: i, value: w });
        }
    }
    Ok(())
}

/// Strictly positive pmf over a finite labeled alphabet.
///
/// Labels are canonical and preserved; all vectors are positionally aligned
/// to them. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf", into = "RawPmf")]
pub struct Pmf {
    labels: Vec<String>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPmf {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<RawPmf> for Pmf {
    type Error = Error;
    fn try_from(raw: RawPmf) -> Result<Self> {
        Pmf::new(raw.labels, &raw.probs)
    }
}

impl From<Pmf> for RawPmf {
    fn from(p: Pmf) -> RawPmf {
        RawPmf { labels: p.labels, probs: p.probs }
    }
}

impl Pmf {
    /// Validates labels and weights, renormalizes the weights to unit mass
    /// and stores both linear and log entries.
    pub fn new<L: Into<String>>(labels: Vec<L>, weights: &[f64]) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        check_weights(weights)?;
        if labels.len() != weights.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let sum: f64 = probs.iter().sum();
        debug_assert!((sum - 1.0).abs() <= NORMALIZATION_TOL);
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Pmf { labels, probs, log_probs })
    }

    /// Uniform pmf over generated labels `x1..xn`.
    pub fn uniform(n: usize) -> Result<Self> {
        let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        Pmf::new(labels, &vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// W_t(P) = sum_x P(x)^t, evaluated through log-sum-exp.
    pub fn power_sum(&self, t: f64) -> f64 {
        self.log_power_sum(t).exp()
    }

    /// ln W_t(P).
    pub fn log_power_sum(&self, t: f64) -> f64 {
        log_sum_exp_iter(self.log_probs.iter().map(|&lp| t * lp))
    }

    /// q-escort distribution P_q = P^q / W_q(P), same labels and order.
    pub fn escort(&self, q: f64) -> Pmf {
        let lw = self.log_power_sum(q);
        let weights: Vec<f64> = self.log_probs.iter().map(|&lp| (q * lp - lw).exp()).collect();
        Pmf::new(self.labels.clone(), &weights).expect("escort entries are positive")
    }

    /// Lifts an unconditional pmf to a joint with a single y row.
    pub fn to_joint(&self) -> JointPmf {
        JointPmf::new(
            self.labels.clone(),
            vec![SINGLETON_Y.to_string()],
            std::slice::from_ref(&self.probs),
        )
        .expect("valid single-row joint")
    }

    pub fn same_alphabet(&self, other: &Pmf) -> bool {
        self.labels == other.labels
    }
}

/// Strictly positive joint pmf over X x Y. Rows are indexed by y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct JointPmf {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    /// Row-major, y-major: probs[yi * |X| + xi].
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawJoint {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<RawJoint> for JointPmf {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        JointPmf::new(raw.x_labels, raw.y_labels, &raw.probs)
    }
}

impl From<JointPmf> for RawJoint {
    fn from(j: JointPmf) -> RawJoint {
        let rows = (0..j.y_len()).map(|yi| j.row(yi).to_vec()).collect();
        RawJoint { x_labels: j.x_labels, y_labels: j.y_labels, probs: rows }
    }
}

impl JointPmf {
    /// Validates alphabets and entries, renormalizes to unit total mass.
    /// `rows` are indexed by y.
    pub fn new<L: Into<String>, M: Into<String>>(
        x_labels: Vec<L>,
        y_labels: Vec<M>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let x_labels: Vec<String> = x_labels.into_iter().map(Into::into).collect();
        let y_labels: Vec<String> = y_labels.into_iter().map(Into::into).collect();
        check_labels(&x_labels)?;
        check_labels(&y_labels)?;
        if rows.len() != y_labels.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} rows vs {} y labels",
                rows.len(),
                y_labels.len()
            )));
        }
        let mut flat = Vec::with_capacity(x_labels.len() * y_labels.len());
        for row in rows {
            if row.len() != x_labels.len() {
                return Err(Error::AlphabetMismatch(format!(
                    "row of length {} vs {} x labels",
                    row.len(),
                    x_labels.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        check_weights(&flat)?;
        let total: f64 = flat.iter().sum();
        let probs: Vec<f64> = flat.iter().map(|w| w / total).collect();
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL);
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(JointPmf { x_labels, y_labels, probs, log_probs })
    }

    /// Independent product P_X (x) P_Y.
    pub fn product(px: &Pmf, py: &Pmf) -> JointPmf {
        let rows: Vec<Vec<f64>> = py
            .probs()
            .iter()
            .map(|&wy| px.probs().iter().map(|&wx| wx * wy).collect())
            .collect();
        JointPmf::new(px.labels().to_vec(), py.labels().to_vec(), &rows)
            .expect("product of valid pmfs is valid")
    }

    pub fn x_len(&self) -> usize {
        self.x_labels.len()
    }

    pub fn y_len(&self) -> usize {
        self.y_labels.len()
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn prob(&self, yi: usize, xi: usize) -> f64 {
        self.probs[yi * self.x_len() + xi]
    }

    pub fn log_prob(&self, yi: usize, xi: usize) -> f64 {
        self.log_probs[yi * self.x_len() + xi]
    }

    pub fn row(&self, yi: usize) -> &[f64] {
        &self.probs[yi * self.x_len()..(yi + 1) * self.x_len()]
    }

    pub fn log_row(&self, yi: usize) -> &[f64] {
        &self.log_probs[yi * self.x_len()..(yi + 1) * self.x_len()]
    }

    pub fn same_alphabets(&self, other: &JointPmf) -> bool {
        self.x_labels == other.x_labels && self.y_labels == other.y_labels
    }

    /// Marginal pmf of Y: row sums.
    pub fn marginal_y(&self) -> Pmf {
        let weights: Vec<f64> = (0..self.y_len()).map(|yi| self.row(yi).iter().sum()).collect();
        Pmf::new(self.y_labels.clone(), &weights).expect("row sums are positive")
    }

    /// Conditional pmf of X given Y = y (row renormalized).
    pub fn conditional_given_y(&self, y: &str) -> Result<Pmf> {
        let yi = self
            .y_labels
            .iter()
            .position(|l| l == y)
            .ok_or_else(|| Error::UnknownLabel(y.to_string()))?;
        Ok(self.conditional_by_index(yi))
    }

    pub fn conditional_by_index(&self, yi: usize) -> Pmf {
        Pmf::new(self.x_labels.clone(), self.row(yi)).expect("row entries are positive")
    }

    /// Joint escort: entries P(x,y)^q normalized by the full double sum. The
    /// induced y-marginal is the escort marginal P_q(.,y).
    pub fn escort_joint(&self, q: f64) -> JointPmf {
        let lw = self.log_power_sum(q);
        let rows: Vec<Vec<f64>> = (0..self.y_len())
            .map(|yi| self.log_row(yi).iter().map(|&lp| (q * lp - lw).exp()).collect())
            .collect();
        JointPmf::new(self.x_labels.clone(), self.y_labels.clone(), &rows)
            .expect("escort entries are positive")
    }

    /// ln sum_{x,y} P(x,y)^t.
    pub fn log_power_sum(&self, t: f64) -> f64 {
        log_sum_exp_iter(self.log_probs.iter().map(|&lp| t * lp))
    }

    /// ln sum_x P(x,y)^t for one y row.
    pub fn row_log_power_sum(&self, yi: usize, t: f64) -> f64 {
        let row = self.log_row(yi);
        log_sum_exp_iter(row.iter().map(|&lp| t * lp))
    }

    /// Full power sum as a linear value.
    pub fn power_sum(&self, t: f64) -> f64 {
        self.log_power_sum(t).exp()
    }
}

/// The pair (q, rho) governing non-extensive moments: q is the
/// non-extensivity index, rho > 0 the moment order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct NEParams {
    q: f64,
    rho: f64,
}

#[derive(Deserialize)]
struct RawParams {
    q: f64,
    rho: f64,
}

impl TryFrom<RawParams> for NEParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        NEParams::new(raw.q, raw.rho)
    }
}

impl NEParams {
    pub fn new(q: f64, rho: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::DegenerateParameters(format!("q = {q} must be finite")));
        }
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::NonPositiveOrder(rho));
        }
        Ok(NEParams { q, rho })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Requires q != 0 (Q^(G) construction raises G to (1+rho)/q).
    pub fn require_nonzero_q(&self) -> Result<()> {
        if self.q == 0.0 {
            return Err(Error::ZeroQ);
        }
        Ok(())
    }

    /// Requires q > 0 (relative-entropy links need alpha = q/(1+rho) > 0).
    pub fn require_positive_q(&self) -> Result<()> {
        if self.q <= 0.0 || self.q.is_nan() {
            return Err(Error::NonPositiveQ(self.q));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(probs: &[f64]) -> Pmf {
        let labels: Vec<String> = (1..=probs.len()).map(|i| format!("x{i}")).collect();
        Pmf::new(labels, probs).unwrap()
    }

    fn joint(rows: &[Vec<f64>]) -> JointPmf {
        let xl: Vec<String> = (1..=rows[0].len()).map(|i| format!("x{i}")).collect();
        let yl: Vec<String> = (1..=rows.len()).map(|i| format!("y{i}")).collect();
        JointPmf::new(xl, yl, rows).unwrap()
    }

    #[test]
    fn validate_normalizes_equal_weights() {
        let p = Pmf::new(vec!["a", "b"], &[1.0, 1.0]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn validate_single_point() {
        let p = Pmf::new(vec!["a"], &[7.3]).unwrap();
        assert_eq!(p.probs(), &[1.0]);
    }

    #[test]
    fn validate_rejects_zero_weight() {
        let err = Pmf::new(vec!["a", "b"], &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { index: 0, .. }));
    }

    #[test]
    fn validate_rejects_duplicates_and_empty() {
        assert!(matches!(
            Pmf::new(vec!["a", "a"], &[1.0, 1.0]).unwrap_err(),
            Error::DuplicateLabel(_)
        ));
        assert!(matches!(Pmf::new(Vec::<String>::new(), &[]).unwrap_err(), Error::EmptyAlphabet));
    }

    #[test]
    fn power_sum_normalization_and_zeroth_power() {
        let p = pmf(&[0.3, 0.45, 0.25]);
        assert!((p.power_sum(1.0) - 1.0).abs() < 1e-14);
        assert!((p.power_sum(0.0) - 3.0).abs() < 1e-14);
        // direct evaluation of sum P^t
        assert!((pmf(&[0.5, 0.5]).power_sum(2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_sum_extreme_exponents_stay_finite() {
        let mut w = vec![1e-9; 63];
        w.push(1.0 - 63.0 * 1e-9);
        let p = pmf(&w);
        for &t in &[-20.0, 20.0] {
            assert!(p.log_power_sum(t).is_finite(), "t={t}");
        }
    }

    #[test]
    fn escort_identity_at_q1_and_uniform_fixed_point() {
        let p = pmf(&[0.2, 0.5, 0.3]);
        let e = p.escort(1.0);
        for (a, b) in e.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let u = Pmf::uniform(4).unwrap();
        for &q in &[-3.0, 0.7, 5.0] {
            for v in u.escort(q).probs() {
                assert!((v - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn escort_direct_value() {
        let e = pmf(&[0.8, 0.2]).escort(2.0);
        assert!((e.prob(0) - 16.0 / 17.0).abs() < 1e-15);
        assert!((e.prob(1) - 1.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn escort_at_zero_is_uniform() {
        let e = pmf(&[0.7, 0.1, 0.2]).escort(0.0);
        for v in e.probs() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn escort_composition_law_spot() {
        let p = pmf(&[0.55, 0.15, 0.3]);
        let a = p.escort(1.7).escort(-0.6);
        let b = p.escort(1.7 * -0.6);
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn marginal_and_conditional() {
        let j = joint(&[vec![0.4, 0.1], vec![0.2, 0.3]]);
        let my = j.marginal_y();
        assert!((my.prob(0) - 0.5).abs() < 1e-15);
        assert!((my.prob(1) - 0.5).abs() < 1e-15);
        let c2 = j.conditional_given_y("y2").unwrap();
        assert!((c2.prob(0) - 0.4).abs() < 1e-15);
        assert!((c2.prob(1) - 0.6).abs() < 1e-15);
        assert!(matches!(j.conditional_given_y("zz").unwrap_err(), Error::UnknownLabel(_)));
    }

    #[test]
    fn conditional_of_product_is_marginal() {
        let px = pmf(&[0.2, 0.5, 0.3]);
        let py = pmf(&[0.6, 0.4]);
        let j = JointPmf::product(&px, &py);
        for yi in 0..j.y_len() {
            let c = j.conditional_by_index(yi);
            for (a, b) in c.probs().iter().zip(px.probs()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn uniform_joint_conditional() {
        let j = joint(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let c = j.conditional_given_y("y1").unwrap();
        assert_eq!(c.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn escort_joint_values() {
        let j = joint(&[vec![0.4, 0.1], vec![0.2, 0.3]]);
        let e = j.escort_joint(2.0);
        let expect = [0.16 / 0.30, 0.01 / 0.30, 0.04 / 0.30, 0.09 / 0.30];
        for (i, &v) in expect.iter().enumerate() {
            assert!((e.prob(i / 2, i % 2) - v).abs() < 1e-14);
        }
        // q = 1 identity and uniform fixed point
        let e1 = j.escort_joint(1.0);
        for yi in 0..2 {
            for xi in 0..2 {
                assert!((e1.prob(yi, xi) - j.prob(yi, xi)).abs() < 1e-15);
            }
        }
        let u = joint(&[vec![1.0, 1.0], vec![1.0, 1.0]]).escort_joint(3.3);
        for yi in 0..2 {
            for xi in 0..2 {
                assert!((u.prob(yi, xi) - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditional_escort_commutes_with_joint_escort() {
        let j = joint(&[vec![0.31, 0.07, 0.12], vec![0.05, 0.25, 0.2]]);
        for &q in &[-1.5, 0.4, 2.0] {
            let ej = j.escort_joint(q);
            for yi in 0..j.y_len() {
                let via_joint = ej.conditional_by_index(yi);
                let via_cond = j.conditional_by_index(yi).escort(q);
                for (a, b) in via_joint.probs().iter().zip(via_cond.probs()) {
                    assert!((a - b).abs() <= 1e-12, "q={q} yi={yi}");
                }
            }
        }
    }

    #[test]
    fn power_sum_is_log_convex_in_t() {
        let p = pmf(&[0.62, 0.23, 0.1, 0.05]);
        let grid: Vec<f64> = (-8..=8).map(|k| k as f64 / 2.0).collect();
        for w in grid.windows(2) {
            let (t1, t2) = (w[0], w[1]);
            let mid = p.log_power_sum((t1 + t2) / 2.0);
            let avg = (p.log_power_sum(t1) + p.log_power_sum(t2)) / 2.0;
            assert!(mid <= avg + 1e-12);
        }
    }

    #[test]
    fn ne_params_validation() {
        assert!(NEParams::new(1.0, 0.0).is_err());
        assert!(NEParams::new(1.0, -1.0).is_err());
        assert!(NEParams::new(f64::INFINITY, 1.0).is_err());
        let p = NEParams::new(0.0, 1.0).unwrap();
        assert!(matches!(p.require_nonzero_q().unwrap_err(), Error::ZeroQ));
        assert!(matches!(NEParams::new(-1.0, 1.0).unwrap().require_positive_q().unwrap_err(), Error::NonPositiveQ(_)));
    }

    #[test]
    fn json_round_trip_renormalizes() {
        let text = r#"{"labels":["a","b"],"probs":[4.0,1.0]}"#;
        let p: Pmf = serde_json::from_str(text).unwrap();
        assert_eq!(p.probs(), &[0.8, 0.2]);
        let back = serde_json::to_string(&p).unwrap();
        let p2: Pmf = serde_json::from_str(&back).unwrap();
        assert_eq!(p, p2);

        let jt = r#"{"x_labels":["a","b"],"y_labels":["u","v"],"probs":[[0.4,0.1],[0.2,0.3]]}"#;
        let j: JointPmf = serde_json::from_str(jt).unwrap();
        assert_eq!(j.prob(1, 0), 0.2);
        let jz = r#"{"x_labels":["a","b"],"y_labels":["u"],"probs":[[0.4,0.0]]}"#;
        assert!(serde_json::from_str::<JointPmf>(jz).is_err());
    }
}
