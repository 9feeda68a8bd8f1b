//! Independent oracles and randomized property sweeps: exhaustive strategy
//! enumeration, dense-grid minimax search, seeded Dirichlet(1) instance
//! generation, and the registered check suite behind `verify`.
//!
//! Sweeps are deterministic: every random draw derives from (seed, trial)
//! through a counter-based ChaCha8 stream, and aggregation follows trial
//! order, so identical configs produce byte-identical CSV. Each registered
//! check can be re-run with a designated formula perturbed by +1e-3
//! ([`Mutation`]) to prove the harness actually detects violations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_l, bound_l_cond, bound_l_star, log_slack, lower_factor, redundancy, BoundReport,
    TheoremId,
};
use crate::entropy::{
    clne, clne_diag, lne, lne_diag, relative_ab, relative_ab_cond, AlphaBeta,
};
use crate::error::{Error, Result};
use crate::guessing::{
    mismatched_strategy, optimal_strategy_joint, q_log_moment, q_moment, q_pmf_from_strategy,
    rank_pow, GuessingStrategy,
};
use crate::math::log_sum_exp_iter;
use crate::minimax::SourceFamily;
use crate::pmf::{JointPmf, NEParams, Pmf};

/// Enumeration budget for exhaustive strategy search.
pub const ENUMERATION_BUDGET: f64 = 1e6;

/// Size of the additive perturbation used by the mutation suite.
pub const MUTATION_BUMP: f64 = 1e-3;

/// Formula perturbed (+1e-3) in a mutated sweep; `None` is the normal run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    None,
    BoundL,
    BoundLCond,
    BoundLStar,
    QMoment,
    QLogMoment,
    Lne,
    Clne,
    DiagLimit,
    RelativeAb,
    RelativeAbCond,
    QPmf,
    BruteValue,
}

fn bump(v: f64, mutation: Mutation, target: Mutation) -> f64 {
    if mutation == target {
        v + MUTATION_BUMP
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// seeded sampling

fn stream_rng(stream: u64, trial: u64) -> ChaCha8Rng {
    // splitmix-style mixing keeps (stream, trial) pairs independent
    let mut z = stream
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(trial)
        .wrapping_add(0x243f6a8885a308d3);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

fn dirichlet_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Dirichlet(1) = normalized unit exponentials; entries clamped below at
    // 1e-9 so q < 0 stays finite while still probing near the boundary.
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v = (*v / total).max(1e-9);
    }
    w
}

/// Seeded Dirichlet(1) pmf over labels `x1..xm`.
pub fn sample_pmf(stream: u64, trial: u64, m: usize) -> Pmf {
    let mut rng = stream_rng(stream, trial);
    let labels: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    Pmf::new(labels, &dirichlet_weights(&mut rng, m)).expect("sampled weights are positive")
}

/// Seeded Dirichlet(1) joint pmf over `x1..xm` x `y1..yk`.
pub fn sample_joint(stream: u64, trial: u64, m: usize, k: usize) -> JointPmf {
    let mut rng = stream_rng(stream, trial);
    let w = dirichlet_weights(&mut rng, m * k);
    let rows: Vec<Vec<f64>> = w.chunks(m).map(|c| c.to_vec()).collect();
    let xl: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let yl: Vec<String> = (1..=k).map(|i| format!("y{i}")).collect();
    JointPmf::new(xl, yl, &rows).expect("sampled weights are positive")
}

/// Seeded uniformly random strategy for the alphabets of `j`.
pub fn sample_strategy(stream: u64, trial: u64, j: &JointPmf) -> GuessingStrategy {
    let mut rng = stream_rng(stream, trial);
    let m = j.x_len();
    let rows: Vec<Vec<usize>> = (0..j.y_len())
        .map(|_| {
            let mut perm: Vec<usize> = (1..=m).collect();
            for i in (1..m).rev() {
                let pick = rng.gen_range(0..=i);
                perm.swap(i, pick);
            }
            perm
        })
        .collect();
    GuessingStrategy::new(j.y_labels().to_vec(), rows).expect("permutation rows")
}

// ---------------------------------------------------------------------------
// oracles

/// Exhaustive minimizer of E_q[G^rho]: enumerates every per-y rank
/// permutation (the moment is additive across y, so rows minimize
/// independently) and returns the lexicographically-least minimizer with its
/// moment. Errors with `BudgetExceeded` when |X|!^|Y| > 1e6.
pub fn brute_force_optimal(j: &JointPmf, params: &NEParams) -> Result<(GuessingStrategy, f64)> {
    let m = j.x_len();
    let k = j.y_len();
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    let space = fact.powi(k as i32);
    if space > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(space, ENUMERATION_BUDGET));
    }
    let (q, rho) = (params.q(), params.rho());
    let gpow: Vec<f64> = (0..=m).map(|g| if g == 0 { 0.0 } else { rank_pow(g, rho) }).collect();

    let perms: Vec<Vec<usize>> =
        itertools::Itertools::permutations((1..=m).collect::<Vec<_>>().into_iter(), m).collect();

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut log_row_mins: Vec<f64> = Vec::with_capacity(k);
    for yi in 0..k {
        // scaled weights u_x = exp(q ln P - c) keep q = -20 on tiny entries finite
        let lrow = j.log_row(yi);
        let c = lrow.iter().map(|&lp| q * lp).fold(f64::NEG_INFINITY, f64::max);
        let u: Vec<f64> = lrow.iter().map(|&lp| (q * lp - c).exp()).collect();
        let mut best_val = f64::INFINITY;
        let mut best_perm: Option<&Vec<usize>> = None;
        for perm in &perms {
            let v: f64 = perm.iter().zip(&u).map(|(&g, &w)| gpow[g] * w).sum();
            if v < best_val {
                best_val = v;
                best_perm = Some(perm);
            }
        }
        rows.push(best_perm.expect("nonempty permutation set").clone());
        log_row_mins.push(c + best_val.ln());
    }
    let value = (log_sum_exp_iter(log_row_mins.into_iter()) - j.log_power_sum(q)).exp();
    let strategy = GuessingStrategy::new(j.y_labels().to_vec(), rows)?;
    Ok((strategy, value))
}

/// Dense-grid minimizer of F(Q) = max_P q RE_{(q/(1+rho),q)}(P,Q) over the
/// joint simplex at the given step. Interior points only (every coordinate
/// at least one grid cell). Requires simplex dimension |X||Y| - 1 <= 3.
pub fn grid_minimax(family: &SourceFamily, params: &NEParams, step: f64) -> Result<f64> {
    params.require_positive_q()?;
    let d = family.x_len() * family.y_len();
    if d - 1 > 3 {
        return Err(Error::DimensionTooLarge(d - 1, 3));
    }
    if step <= 0.0 || step.is_nan() || step >= 1.0 {
        return Err(Error::InvalidConfig(format!("grid step {step} must lie in (0,1)")));
    }
    let n = (1.0 / step).round() as usize;
    if n < d {
        return Err(Error::InvalidConfig("grid too coarse for the simplex dimension".into()));
    }

    let (q, rho) = (params.q(), params.rho());
    let a = q / (1.0 + rho); // alpha
    let b = q; // beta
    let coef = q * a / (b * (b - a)); // q * alpha/(beta(beta-alpha)) > 0

    // power tables over grid values v = t/n
    let mut pow_a = vec![0.0; n + 1];
    let mut pow_amb = vec![0.0; n + 1];
    for t in 1..=n {
        let v = t as f64 / n as f64;
        pow_a[t] = v.powf(a);
        pow_amb[t] = v.powf(a - b);
    }

    let members = family.members();
    let m = family.x_len();
    let k = family.y_len();
    // P^beta per member, flattened, and the Q-free denominators
    let pb: Vec<Vec<f64>> = members
        .iter()
        .map(|p| {
            (0..k).flat_map(|yi| p.row(yi).iter().map(|&v| v.powf(b)).collect::<Vec<_>>()).collect()
        })
        .collect();
    let inv_dens: Vec<f64> = members
        .iter()
        .map(|p| {
            let den: f64 =
                (0..k).map(|yi| ((b / a) * p.row_log_power_sum(yi, a)).exp()).sum();
            1.0 / den
        })
        .collect();

    // b/a - 1 = rho; integer and half-integer orders avoid powf in the hot loop
    let rho_pow: Box<dyn Fn(f64) -> f64> = if rho == 1.0 {
        Box::new(|v| v)
    } else if rho == 2.0 {
        Box::new(|v| v * v)
    } else if rho == 0.5 {
        Box::new(|v| v.sqrt())
    } else {
        Box::new(move |v: f64| v.powf(rho))
    };

    // worst-member ratio at one grid point, counts expressed per coordinate
    let eval = |counts: &[usize]| -> f64 {
        let mut row_weight = [0.0f64; 8]; // bq_y^rho, |Y| <= 4 when d <= 4
        for (yi, w) in row_weight.iter_mut().enumerate().take(k) {
            let base = yi * m;
            let mut bq = 0.0;
            for xi in 0..m {
                bq += pow_a[counts[base + xi]];
            }
            *w = rho_pow(bq);
        }
        let mut worst = f64::NEG_INFINITY;
        for (mi, pbm) in pb.iter().enumerate() {
            let mut num = 0.0;
            for (yi, w) in row_weight.iter().enumerate().take(k) {
                let base = yi * m;
                let mut cross = 0.0;
                for xi in 0..m {
                    cross += pbm[base + xi] * pow_amb[counts[base + xi]];
                }
                num += cross * w;
            }
            let ratio = num * inv_dens[mi];
            if ratio > worst {
                worst = ratio;
            }
        }
        worst
    };

    let mut best = f64::INFINITY;
    let mut counts = vec![1usize; d];
    match d {
        1 => {
            counts[0] = n;
            best = eval(&counts);
        }
        2 => {
            for i in 1..n {
                counts[0] = i;
                counts[1] = n - i;
                let v = eval(&counts);
                if v < best {
                    best = v;
                }
            }
        }
        3 => {
            for i in 1..n - 1 {
                counts[0] = i;
                for jj in 1..n - i {
                    counts[1] = jj;
                    counts[2] = n - i - jj;
                    let v = eval(&counts);
                    if v < best {
                        best = v;
                    }
                }
            }
        }
        4 => {
            for i in 1..n - 2 {
                counts[0] = i;
                for jj in 1..n - i - 1 {
                    counts[1] = jj;
                    for l in 1..n - i - jj {
                        counts[2] = l;
                        counts[3] = n - i - jj - l;
                        let v = eval(&counts);
                        if v < best {
                            best = v;
                        }
                    }
                }
            }
        }
        _ => unreachable!("dimension checked above"),
    }
    Ok(coef * best.ln())
}

// ---------------------------------------------------------------------------
// sweep configuration and report

/// Sweep settings; deserializable from the `verify` subcommand's JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: u64,
    pub alphabet_sizes: Vec<usize>,
    pub y_sizes: Vec<usize>,
    pub q_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 20259,
            trials: 100,
            alphabet_sizes: vec![2, 3, 4, 5, 6],
            y_sizes: vec![1, 2, 3],
            q_grid: vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
            rho_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            tolerance: 1e-10,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.alphabet_sizes.is_empty()
            || self.y_sizes.is_empty()
            || self.q_grid.is_empty()
            || self.rho_grid.is_empty()
        {
            return Err(Error::InvalidConfig("grids must be non-empty".into()));
        }
        if self.alphabet_sizes.contains(&0) || self.y_sizes.contains(&0) {
            return Err(Error::InvalidConfig("alphabet sizes must be positive".into()));
        }
        if self.tolerance <= 0.0 || self.tolerance.is_nan() {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.rho_grid.iter().any(|&r| r <= 0.0 || r.is_nan()) {
            return Err(Error::InvalidConfig("rho grid entries must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregate of one registered check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Largest amount by which any instance exceeded its tolerance (0 when
    /// everything passed).
    pub max_violation: f64,
    /// Full inputs of the first few failing instances.
    pub counterexamples: Vec<String>,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        CheckOutcome { name, instances: 0, failures: 0, max_violation: 0.0, counterexamples: Vec::new() }
    }

    fn record(&mut self, violation: f64, dump: impl FnOnce() -> String) {
        self.instances += 1;
        if violation > 0.0 {
            self.failures += 1;
            self.max_violation = self.max_violation.max(violation);
            if self.counterexamples.len() < 3 {
                self.counterexamples.push(dump());
            }
        }
    }
}

/// Outcome of a sweep: per-check aggregates plus the CSV of every emitted
/// bound report.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub checks: Vec<CheckOutcome>,
    #[serde(skip)]
    pub csv: String,
}

impl SweepReport {
    pub fn failures_total(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            failures_total: usize,
            checks: &'a [CheckOutcome],
        }
        serde_json::to_string_pretty(&Summary { failures_total: self.failures_total(), checks: &self.checks })
            .expect("summary serializes")
    }
}

// ---------------------------------------------------------------------------
// the registered checks

struct Instances {
    pmfs: Vec<(u64, Pmf)>,
    joints: Vec<(u64, JointPmf)>,
}

fn degenerate_fixtures() -> (Pmf, JointPmf, JointPmf) {
    let single = Pmf::new(vec!["x1"], &[1.0]).unwrap();
    let single_joint = JointPmf::new(vec!["x1"], vec!["y1", "y2"], &[vec![0.5], vec![0.5]]).unwrap();
    let near_degenerate = Pmf::new(vec!["x1", "x2"], &[1.0 - 1e-8, 1e-8]).unwrap().to_joint();
    (single, single_joint, near_degenerate)
}

struct Sweep<'a> {
    cfg: &'a SweepConfig,
    mutation: Mutation,
    csv: Vec<String>,
    checks: Vec<CheckOutcome>,
}

impl<'a> Sweep<'a> {
    fn grid(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &q in &self.cfg.q_grid {
            for &rho in &self.cfg.rho_grid {
                out.push((q, rho));
            }
        }
        out
    }

    fn positive_grid(&self) -> Vec<(f64, f64)> {
        self.grid().into_iter().filter(|&(q, _)| q > 0.0).collect()
    }

    fn emit(&mut self, rep: &BoundReport, ax: usize, ay: usize, seed: u64) {
        self.csv.push(rep.csv_row(ax, ay, seed));
    }

    fn instances(&self) -> Instances {
        let cfg = self.cfg;
        let mut pmfs = Vec::new();
        let mut joints = Vec::new();
        for trial in 0..cfg.trials {
            let m = cfg.alphabet_sizes[(trial as usize) % cfg.alphabet_sizes.len()];
            let k = cfg.y_sizes[(trial as usize) % cfg.y_sizes.len()];
            pmfs.push((trial, sample_pmf(cfg.seed, trial, m)));
            joints.push((trial, sample_joint(cfg.seed.wrapping_add(1), trial, m, k)));
        }
        Instances { pmfs, joints }
    }

    fn check_theorem1(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("theorem1_lower");
        let (single, _, _) = degenerate_fixtures();
        let mut cases: Vec<(u64, Pmf)> = vec![(u64::MAX, single)];
        cases.extend(inst.pmfs.iter().cloned());
        for (trial, p) in &cases {
            let j = p.to_joint();
            for (q, rho) in self.grid() {
                let params = NEParams::new(q, rho).unwrap();
                let strategies = [
                    optimal_strategy_joint(&j, q),
                    sample_strategy(self.cfg.seed.wrapping_add(2), *trial, &j),
                ];
                for g in &strategies {
                    let moment = q_moment(g, &j, &params).unwrap();
                    let l = bump(bound_l(p, &params), self.mutation, Mutation::BoundL);
                    let lower = lower_factor(p.len(), rho) * l;
                    let rep = BoundReport::new(TheoremId::T1, &params, moment, lower, f64::INFINITY);
                    out.record(if rep.violated { -rep.slack_lower } else { 0.0 }, || {
                        format!("theorem1 trial={trial} q={q} rho={rho} p={:?} g={:?}", p.probs(), g.rank_rows())
                    });
                    self.emit(&rep, p.len(), 1, *trial);
                }
            }
        }
        self.checks.push(out);
    }

    fn check_theorem2(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("theorem2_lower");
        let (_, single_joint, _) = degenerate_fixtures();
        let mut cases: Vec<(u64, JointPmf)> = vec![(u64::MAX, single_joint)];
        cases.extend(inst.joints.iter().cloned());
        for (trial, j) in &cases {
            for (q, rho) in self.grid() {
                let params = NEParams::new(q, rho).unwrap();
                let strategies = [
                    optimal_strategy_joint(j, q),
                    sample_strategy(self.cfg.seed.wrapping_add(3), *trial, j),
                ];
                for g in &strategies {
                    let moment = q_moment(g, j, &params).unwrap();
                    let l = bump(bound_l_cond(j, &params), self.mutation, Mutation::BoundLCond);
                    let lower = lower_factor(j.x_len(), rho) * l;
                    let rep = BoundReport::new(TheoremId::T2, &params, moment, lower, f64::INFINITY);
                    out.record(if rep.violated { -rep.slack_lower } else { 0.0 }, || {
                        format!("theorem2 trial={trial} q={q} rho={rho}")
                    });
                    self.emit(&rep, j.x_len(), j.y_len(), *trial);
                }
            }
        }
        self.checks.push(out);
    }

    fn check_theorem3(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("theorem3_sandwich");
        let (single, _, near) = degenerate_fixtures();
        let mut cases: Vec<(u64, JointPmf)> = vec![(u64::MAX, single.to_joint()), (u64::MAX - 1, near)];
        cases.extend(inst.joints.iter().cloned());
        for (trial, j) in &cases {
            for (q, rho) in self.grid() {
                let params = NEParams::new(q, rho).unwrap();
                let g = optimal_strategy_joint(j, q);
                let moment = bump(q_moment(&g, j, &params).unwrap(), self.mutation, Mutation::QMoment);
                let l = bound_l_cond(j, &params);
                let lower = lower_factor(j.x_len(), rho) * l;
                let rep = BoundReport::new(TheoremId::T3Sandwich, &params, moment, lower, l);
                out.record(
                    if rep.violated { rep.slack_lower.min(rep.slack_upper).abs() } else { 0.0 },
                    || format!("theorem3 trial={trial} q={q} rho={rho}"),
                );
                self.emit(&rep, j.x_len(), j.y_len(), *trial);
            }
        }
        self.checks.push(out);
    }

    fn check_mismatch_sandwich(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("mismatch_sandwich");
        let (single, _, near) = degenerate_fixtures();
        let mut cases: Vec<(u64, JointPmf, JointPmf)> = vec![
            (u64::MAX, single.to_joint(), single.to_joint()),
            (u64::MAX - 1, near.clone(), near),
        ];
        for (trial, pj) in &inst.joints {
            let qj = sample_joint(self.cfg.seed.wrapping_add(4), *trial, pj.x_len(), pj.y_len());
            cases.push((*trial, pj.clone(), qj));
        }
        for (trial, pj, qj) in &cases {
            for (q, rho) in self.grid() {
                if q == 0.0 {
                    continue;
                }
                let params = NEParams::new(q, rho).unwrap();
                let g_q = mismatched_strategy(qj, q);
                let moment =
                    bump(q_moment(&g_q, pj, &params).unwrap(), self.mutation, Mutation::QMoment);
                let upper = bound_l_star(pj, qj, &params).unwrap();
                let q_g = q_pmf_from_strategy(&g_q, &params, pj.x_labels()).unwrap();
                let lstar_low =
                    bump(bound_l_star(pj, &q_g, &params).unwrap(), self.mutation, Mutation::BoundLStar);
                let lower = lower_factor(pj.x_len(), rho) * lstar_low;
                let rep = BoundReport::new(TheoremId::M1, &params, moment, lower, upper);
                out.record(
                    if rep.violated { rep.slack_lower.min(rep.slack_upper).abs() } else { 0.0 },
                    || format!("mismatch_sandwich trial={trial} q={q} rho={rho}"),
                );
                self.emit(&rep, pj.x_len(), pj.y_len(), *trial);
            }
        }
        self.checks.push(out);
    }

    fn check_mismatch2(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("mismatch2_lower");
        let (single, _, _) = degenerate_fixtures();
        let mut cases: Vec<(u64, JointPmf)> = vec![(u64::MAX, single.to_joint())];
        cases.extend(inst.joints.iter().cloned());
        for (trial, pj) in &cases {
            let g = sample_strategy(self.cfg.seed.wrapping_add(5), *trial, pj);
            for (q, rho) in self.grid() {
                if q == 0.0 {
                    continue;
                }
                let params = NEParams::new(q, rho).unwrap();
                let moment = q_moment(&g, pj, &params).unwrap();
                let q_g = q_pmf_from_strategy(&g, &params, pj.x_labels()).unwrap();
                let lstar =
                    bump(bound_l_star(pj, &q_g, &params).unwrap(), self.mutation, Mutation::BoundLStar);
                let lower = lower_factor(pj.x_len(), rho) * lstar;
                let rep = BoundReport::new(TheoremId::M2, &params, moment, lower, f64::INFINITY);
                out.record(if rep.violated { -rep.slack_lower } else { 0.0 }, || {
                    format!("mismatch2 trial={trial} q={q} rho={rho}")
                });
                self.emit(&rep, pj.x_len(), pj.y_len(), *trial);
            }
        }
        self.checks.push(out);
    }

    fn check_mismatch3(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("mismatch3_deviation");
        let (single, _, _) = degenerate_fixtures();
        let mut cases: Vec<(u64, JointPmf)> = vec![(u64::MAX, single.to_joint())];
        cases.extend(inst.joints.iter().cloned());
        for (trial, pj) in &cases {
            let g = sample_strategy(self.cfg.seed.wrapping_add(6), *trial, pj);
            for (q, rho) in self.positive_grid() {
                let params = NEParams::new(q, rho).unwrap();
                let r = redundancy(pj, &g, &params).unwrap();
                let q_g = q_pmf_from_strategy(&g, &params, pj.x_labels()).unwrap();
                let ab = AlphaBeta::new(q / (1.0 + rho), q).unwrap();
                let re = bump(
                    relative_ab_cond(pj, &q_g, ab).unwrap(),
                    self.mutation,
                    Mutation::RelativeAbCond,
                );
                let band = log_slack(pj.x_len());
                let rep = BoundReport::new(TheoremId::M3Redundancy, &params, r, q * re - band, q * re + band);

                // cross identity: q RE = (1/rho) ln L* - CLNE, for the same Q^(G)
                let lhs = q * re;
                let rhs = bound_l_star(pj, &q_g, &params).unwrap().ln() / rho - clne(pj, ab).unwrap();
                let identity_violation = (lhs - rhs).abs() - 1e-9;

                let violation = if rep.violated {
                    rep.slack_lower.min(rep.slack_upper).abs()
                } else {
                    identity_violation.max(0.0)
                };
                out.record(violation, || format!("mismatch3 trial={trial} q={q} rho={rho}"));
                self.emit(&rep, pj.x_len(), pj.y_len(), *trial);
            }
        }
        self.checks.push(out);
    }

    fn check_lne_identities(&mut self, inst: &Instances) {
        let tol = self.cfg.tolerance;
        let mut lne_out = CheckOutcome::new("lne_identity");
        let mut clne_out = CheckOutcome::new("clne_identity");
        for (trial, p) in &inst.pmfs {
            for (q, rho) in self.positive_grid() {
                let params = NEParams::new(q, rho).unwrap();
                let ab = AlphaBeta::new(q / (1.0 + rho), q).unwrap();
                let lhs = bump(bound_l(p, &params), self.mutation, Mutation::BoundL).ln();
                let rhs = rho * bump(lne(p, ab).unwrap(), self.mutation, Mutation::Lne);
                lne_out.record(((lhs - rhs).abs() - tol).max(0.0), || {
                    format!("lne_identity trial={trial} q={q} rho={rho} p={:?}", p.probs())
                });
            }
        }
        for (trial, j) in &inst.joints {
            for (q, rho) in self.positive_grid() {
                let params = NEParams::new(q, rho).unwrap();
                let ab = AlphaBeta::new(q / (1.0 + rho), q).unwrap();
                let lhs = bump(bound_l_cond(j, &params), self.mutation, Mutation::BoundLCond).ln();
                let rhs = rho * bump(clne(j, ab).unwrap(), self.mutation, Mutation::Clne);
                clne_out.record(((lhs - rhs).abs() - tol).max(0.0), || {
                    format!("clne_identity trial={trial} q={q} rho={rho}")
                });
            }
        }
        self.checks.push(lne_out);
        self.checks.push(clne_out);
    }

    fn check_diag_limits(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("diag_limits");
        let tol = 1e-4f64.max(self.cfg.tolerance);
        let alphas = [0.5, 1.0, 2.0];
        for (trial, p) in &inst.pmfs {
            for &a in &alphas {
                let exact = bump(lne_diag(p, a).unwrap(), self.mutation, Mutation::DiagLimit);
                for &eps in &[1e-6, -1e-6] {
                    let near = lne(p, AlphaBeta::new(a, a + eps).unwrap()).unwrap();
                    out.record(((near - exact).abs() - tol).max(0.0), || {
                        format!("lne_diag trial={trial} alpha={a} eps={eps}")
                    });
                }
            }
        }
        for (trial, j) in &inst.joints {
            for &a in &alphas {
                let exact = bump(clne_diag(j, a).unwrap(), self.mutation, Mutation::DiagLimit);
                for &eps in &[1e-6, -1e-6] {
                    let near = clne(j, AlphaBeta::new(a, a + eps).unwrap()).unwrap();
                    out.record(((near - exact).abs() - tol).max(0.0), || {
                        format!("clne_diag trial={trial} alpha={a} eps={eps}")
                    });
                }
            }
        }
        self.checks.push(out);
    }

    fn check_divergence_properties(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("divergence_properties");
        let tol = self.cfg.tolerance;
        let param_grid = [(0.5, 2.0), (2.0, 0.5)];
        for (trial, p) in &inst.pmfs {
            let q = sample_pmf(self.cfg.seed.wrapping_add(7), *trial, p.len());
            for &(a, b) in &param_grid {
                let ab = AlphaBeta::new(a, b).unwrap();
                let v = bump(relative_ab(p, &q, ab).unwrap(), self.mutation, Mutation::RelativeAb);
                out.record((-v - tol).max(0.0), || {
                    format!("relative_ab nonneg trial={trial} a={a} b={b}")
                });
                let zero = bump(relative_ab(p, p, ab).unwrap(), self.mutation, Mutation::RelativeAb);
                out.record((zero.abs() - tol).max(0.0), || {
                    format!("relative_ab zero trial={trial} a={a} b={b}")
                });
                let cond = relative_ab_cond(&p.to_joint(), &q.to_joint(), ab).unwrap();
                let flat = bump(relative_ab(p, &q, ab).unwrap(), self.mutation, Mutation::RelativeAb);
                out.record(((cond - flat).abs() - tol).max(0.0), || {
                    format!("relative_ab single-y trial={trial} a={a} b={b}")
                });
            }
        }
        self.checks.push(out);
    }

    fn check_brute_force_equivalence(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("brute_force_equivalence");
        for (trial, j) in &inst.joints {
            let m = j.x_len().min(5);
            let k = j.y_len().min(2);
            let small = sample_joint(self.cfg.seed.wrapping_add(8), *trial, m, k);
            for (q, rho) in self.grid() {
                let params = NEParams::new(q, rho).unwrap();
                let (brute_g, brute_v) = brute_force_optimal(&small, &params).unwrap();
                let brute_v = bump(brute_v, self.mutation, Mutation::BruteValue);
                let opt = optimal_strategy_joint(&small, q);
                let opt_v = q_moment(&opt, &small, &params).unwrap();
                let diff = (opt_v - brute_v).abs();
                out.record((diff - 1e-12 * opt_v.max(1.0)).max(0.0), || {
                    format!("brute trial={trial} q={q} rho={rho}")
                });
                // strategies agree whenever conditionals are distinct per y
                if distinct_rows(&small) && brute_g != opt {
                    out.record(1.0, || {
                        format!("brute strategy mismatch trial={trial} q={q} rho={rho}")
                    });
                }
            }
        }
        self.checks.push(out);
    }

    fn check_rho_zero(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("rho_zero_limits");
        for (trial, j) in &inst.joints {
            let m = j.x_len().min(5);
            let small = sample_joint(self.cfg.seed.wrapping_add(9), *trial, m, j.y_len().min(2));
            for &q in self.cfg.q_grid.iter().filter(|&&q| q > 0.0) {
                let opt = optimal_strategy_joint(&small, q);
                let lm = bump(
                    q_log_moment(&opt, &small, q).unwrap(),
                    self.mutation,
                    Mutation::QLogMoment,
                );
                let diag = clne_diag(&small, q).unwrap();
                // one-sided limit bound plus the sandwich gap
                out.record((lm - diag - 1e-12).max(0.0), || {
                    format!("rho_zero upper trial={trial} q={q}")
                });
                out.record(((diag - lm) - log_slack(small.x_len()) - 1e-12).max(0.0), || {
                    format!("rho_zero gap trial={trial} q={q}")
                });
                // optimal strategy minimizes E_q[ln G] (exhaustive per y)
                let brute_min = brute_force_log_moment_min(&small, q);
                out.record((lm - brute_min - 1e-12).max(0.0), || {
                    format!("rho_zero minimality trial={trial} q={q}")
                });
            }
        }
        self.checks.push(out);
    }

    fn check_qpmf_validity(&mut self, inst: &Instances) {
        let mut out = CheckOutcome::new("qpmf_validity");
        for (trial, j) in &inst.joints {
            let g = sample_strategy(self.cfg.seed.wrapping_add(10), *trial, j);
            for (q, rho) in self.grid() {
                if q == 0.0 {
                    continue;
                }
                let params = NEParams::new(q, rho).unwrap();
                let q_g = q_pmf_from_strategy(&g, &params, j.x_labels()).unwrap();
                let mut total: f64 =
                    (0..q_g.y_len()).map(|yi| q_g.row(yi).iter().sum::<f64>()).sum();
                total = bump(total, self.mutation, Mutation::QPmf);
                out.record(((total - 1.0).abs() - 1e-12).max(0.0), || {
                    format!("qpmf sum trial={trial} q={q} rho={rho}")
                });

                let s1: f64 = (1..=j.x_len()).map(|i| (i as f64).powf(-(1.0 + rho))).sum();
                let mut worst: f64 = 0.0;
                for yi in 0..j.y_len() {
                    let esc = q_g.conditional_by_index(yi).escort(q);
                    for xi in 0..j.x_len() {
                        let closed = bump(
                            1.0 / (s1 * rank_pow(g.rank(yi, xi), 1.0 + rho)),
                            self.mutation,
                            Mutation::QPmf,
                        );
                        worst = worst.max((esc.prob(xi) - closed).abs());
                    }
                }
                out.record((worst - 1e-12).max(0.0), || {
                    format!("qpmf escort trial={trial} q={q} rho={rho}")
                });
            }
        }
        self.checks.push(out);
    }
}

fn distinct_rows(j: &JointPmf) -> bool {
    for yi in 0..j.y_len() {
        let row = j.row(yi);
        for a in 0..row.len() {
            for b in (a + 1)..row.len() {
                if row[a] == row[b] {
                    return false;
                }
            }
        }
    }
    true
}

/// Exhaustive min over strategies of E_q[ln G(X|Y)] (additive across y).
fn brute_force_log_moment_min(j: &JointPmf, q: f64) -> f64 {
    let m = j.x_len();
    let perms: Vec<Vec<usize>> =
        itertools::Itertools::permutations((1..=m).collect::<Vec<_>>().into_iter(), m).collect();
    let lw = j.log_power_sum(q);
    let mut total = 0.0;
    for yi in 0..j.y_len() {
        let w: Vec<f64> = j.log_row(yi).iter().map(|&lp| (q * lp - lw).exp()).collect();
        let mut best = f64::INFINITY;
        for perm in &perms {
            let v: f64 =
                perm.iter().zip(&w).map(|(&g, &wx)| wx * (g as f64).ln()).sum();
            if v < best {
                best = v;
            }
        }
        total += best;
    }
    total
}

/// Runs every registered check; failures are report content, not errors.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    run_sweep_mutated(config, Mutation::None)
}

/// Sweep with one designated formula perturbed by +1e-3; the mutation suite
/// asserts each check catches its own perturbation.
pub fn run_sweep_mutated(config: &SweepConfig, mutation: Mutation) -> Result<SweepReport> {
    config.validate()?;
    let mut sweep = Sweep { cfg: config, mutation, csv: Vec::new(), checks: Vec::new() };
    let inst = sweep.instances();
    sweep.check_theorem1(&inst);
    sweep.check_theorem2(&inst);
    sweep.check_theorem3(&inst);
    sweep.check_mismatch_sandwich(&inst);
    sweep.check_mismatch2(&inst);
    sweep.check_mismatch3(&inst);
    sweep.check_lne_identities(&inst);
    sweep.check_diag_limits(&inst);
    sweep.check_divergence_properties(&inst);
    sweep.check_brute_force_equivalence(&inst);
    sweep.check_rho_zero(&inst);
    sweep.check_qpmf_validity(&inst);

    let mut csv = String::from(BoundReport::csv_header());
    csv.push('\n');
    for row in &sweep.csv {
        csv.push_str(row);
        csv.push('\n');
    }
    Ok(SweepReport { checks: sweep.checks, csv })
}
