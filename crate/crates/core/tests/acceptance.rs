//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them). Tolerances are pinned in the
//! assertions.
//!
//! Criterion 8 is split: `criterion_08a_rho_zero_equality` encodes the
//! literal equality E_q[ln G*] = CLNE_diag and is EXPECTED TO FAIL — the
//! equality is mathematically false (uniform sources give ln(M!)/M vs ln M;
//! only the sandwich with gap ln(1+ln|X|) holds, which
//! `criterion_08b_rho_zero_minimality_and_sandwich` verifies). The test is
//! kept faithful rather than weakened; see the failure message for the
//! measured gaps.

use qguess::bounds::{
    bound_l, bound_l_star, check_mismatch3, check_mismatch_sandwich, check_theorem1,
    check_theorem2, check_theorem3, clne_identity_check, lne_identity_check, log_slack,
};
use qguess::entropy::{clne, clne_diag, lne, lne_diag, relative_ab, relative_ab_cond, renyi};
use qguess::guessing::{
    optimal_strategy_joint, q_log_moment, q_moment, q_pmf_from_strategy, rank_pow,
};
use qguess::minimax::{objective, robust_strategy, solve_minimax, worst_redundancy};
use qguess::verify::{
    brute_force_optimal, grid_minimax, run_sweep_mutated, sample_joint, sample_pmf,
    sample_strategy, Mutation, SweepConfig,
};
use qguess::{AlphaBeta, GuessingStrategy, JointPmf, NEParams, SolverConfig, SourceFamily};

const Q_GRID: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
const RHO_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const POS_GRID: [f64; 3] = [0.5, 1.0, 2.0];

fn params(q: f64, rho: f64) -> NEParams {
    NEParams::new(q, rho).unwrap()
}

fn ab(a: f64, b: f64) -> AlphaBeta {
    AlphaBeta::new(a, b).unwrap()
}

#[test]
fn criterion_01_theorem1_lower_bound() {
    let mut violations = 0usize;
    for trial in 0..1000u64 {
        let m = 2 + (trial % 7) as usize; // alphabets 2..=8
        let p = sample_pmf(1000, trial, m);
        let j = p.to_joint();
        for &q in &Q_GRID {
            let strategies =
                [optimal_strategy_joint(&j, q), sample_strategy(1001, trial, &j)];
            for &rho in &RHO_GRID {
                let pr = params(q, rho);
                for g in &strategies {
                    if check_theorem1(&p, g, &pr).unwrap().violated {
                        violations += 1;
                    }
                }
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 1: PASS - theorem-1 lower bound, 1000 pmfs x 30 (q,rho) x 2 strategies, zero violations");
}

#[test]
fn criterion_02_theorem2_conditional_lower_bound() {
    let mut violations = 0usize;
    for trial in 0..1000u64 {
        let m = 2 + (trial % 7) as usize;
        let k = 2 + (trial % 2) as usize; // |Y| in {2,3}
        let j = sample_joint(2000, trial, m, k);
        for &q in &Q_GRID {
            let strategies =
                [optimal_strategy_joint(&j, q), sample_strategy(2001, trial, &j)];
            for &rho in &RHO_GRID {
                let pr = params(q, rho);
                for g in &strategies {
                    if check_theorem2(&j, g, &pr).unwrap().violated {
                        violations += 1;
                    }
                }
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 2: PASS - theorem-2 conditional lower bound, |Y| in {{2,3}}, zero violations");
}

#[test]
fn criterion_03_theorem3_sandwich() {
    let mut violations = 0usize;
    for trial in 0..1000u64 {
        let m = 2 + (trial % 7) as usize;
        let k = 1 + (trial % 3) as usize;
        let j = sample_joint(3000, trial, m, k);
        for &q in &Q_GRID {
            for &rho in &RHO_GRID {
                if check_theorem3(&j, &params(q, rho)).unwrap().violated {
                    violations += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 3: PASS - theorem-3 sandwich for the optimal strategy, zero violations");
}

#[test]
fn criterion_04_optimality_oracle() {
    let mut worst_rel = 0.0f64;
    for trial in 0..200u64 {
        let m = 2 + (trial % 5) as usize; // |X| <= 6
        let k = 1 + (trial % 2) as usize; // |Y| <= 2
        let j = sample_joint(4000, trial, m, k);
        for &q in &Q_GRID {
            let opt = optimal_strategy_joint(&j, q);
            for &rho in &RHO_GRID {
                let pr = params(q, rho);
                let opt_v = q_moment(&opt, &j, &pr).unwrap();
                let (_, brute_v) = brute_force_optimal(&j, &pr).unwrap();
                let rel = (opt_v - brute_v).abs() / brute_v.max(1.0);
                worst_rel = worst_rel.max(rel);
                assert!(rel <= 1e-12, "trial={trial} q={q} rho={rho}: {opt_v} vs {brute_v}");
            }
        }
    }
    println!("criterion 4: PASS - optimal strategy matches exhaustive enumeration across the rho grid (max rel dev {worst_rel:.2e})");
}

#[test]
fn criterion_05_q1_classical_reduction() {
    for trial in 0..200u64 {
        let m = 2 + (trial % 7) as usize;
        let p = sample_pmf(5000, trial, m);
        let j = p.to_joint();
        for &rho in &RHO_GRID {
            let pr = params(1.0, rho);
            // ln L_{1,rho} = rho * Renyi_{1/(1+rho)}
            let lhs = bound_l(&p, &pr).ln();
            let rhs = rho * renyi(&p, 1.0 / (1.0 + rho)).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10, "identity trial={trial} rho={rho}");

            // Arikan's sandwich with the (1+ln|X|) factor
            let g = optimal_strategy_joint(&j, 1.0);
            let log_min_moment = q_moment(&g, &j, &pr).unwrap().ln() / rho;
            let entropy = renyi(&p, 1.0 / (1.0 + rho)).unwrap();
            let slack = log_slack(m);
            assert!(
                log_min_moment <= entropy + 1e-10 && log_min_moment >= entropy - slack - 1e-10,
                "sandwich trial={trial} rho={rho}"
            );
        }
    }
    println!("criterion 5: PASS - q=1 reduces to the classical Renyi-entropy sandwich, 200 instances");
}

#[test]
fn criterion_06_lne_identities() {
    for trial in 0..500u64 {
        let m = 2 + (trial % 5) as usize;
        let k = 1 + (trial % 3) as usize;
        let p = sample_pmf(6000, trial, m);
        let j = sample_joint(6500, trial, m, k);
        for &q in &POS_GRID {
            for &rho in &RHO_GRID {
                let pr = params(q, rho);
                let (a, b) = lne_identity_check(&p, &pr).unwrap();
                assert!((a - b).abs() <= 1e-10, "lne trial={trial} q={q} rho={rho}");
                let (c, d) = clne_identity_check(&j, &pr).unwrap();
                assert!((c - d).abs() <= 1e-10, "clne trial={trial} q={q} rho={rho}");
            }
        }
    }
    println!("criterion 6: PASS - ln L = rho * LNE and the conditional analogue, 500 instances, 1e-10");
}

#[test]
fn criterion_07_diagonal_limits() {
    for trial in 0..100u64 {
        let m = 2 + (trial % 5) as usize;
        let k = 1 + (trial % 3) as usize;
        let p = sample_pmf(7000, trial, m);
        let j = sample_joint(7500, trial, m, k);
        for &alpha in &POS_GRID {
            let lp = lne_diag(&p, alpha).unwrap();
            let lj = clne_diag(&j, alpha).unwrap();
            for &eps in &[1e-6, -1e-6] {
                let near_p = lne(&p, ab(alpha, alpha + eps)).unwrap();
                assert!((near_p - lp).abs() < 1e-4, "lne trial={trial} alpha={alpha}");
                let near_j = clne(&j, ab(alpha, alpha + eps)).unwrap();
                assert!((near_j - lj).abs() < 1e-4, "clne trial={trial} alpha={alpha}");
            }
        }
    }
    println!("criterion 7: PASS - diagonal limits match the +/-1e-6 numerical limits within 1e-4");
}

/// EXPECTED RED. The literal criterion asserts the equality
/// E_q[ln G*] = CLNE_diag(J, q), which does not hold: taking rho -> 0 in the
/// moment sandwich only pinches to a band of width ln(1+ln|X|). The gap is
/// structural (uniform sources: ln(M!)/M vs ln M), not numerical.
#[test]
fn criterion_08a_rho_zero_equality() {
    let mut max_gap = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut failures = 0usize;
    let total = 100 * POS_GRID.len();
    for trial in 0..100u64 {
        let m = 2 + (trial % 4) as usize; // |X| <= 5
        let k = 1 + (trial % 2) as usize;
        let j = sample_joint(8000, trial, m, k);
        for &q in &POS_GRID {
            let g = optimal_strategy_joint(&j, q);
            let lm = q_log_moment(&g, &j, q).unwrap();
            let diag = clne_diag(&j, q).unwrap();
            let gap = (lm - diag).abs();
            max_gap = max_gap.max(gap);
            min_gap = min_gap.min(gap);
            if gap >= 1e-9 {
                failures += 1;
            }
        }
    }
    if failures > 0 {
        println!("criterion 8a: FAIL - |E_q[ln G*] - clne_diag| < 1e-9 violated on {failures}/{total} instances (gap range [{min_gap:.3e}, {max_gap:.3e}])");
    } else {
        println!("criterion 8a: PASS");
    }
    assert_eq!(
        failures, 0,
        "The rho->0 equality E_q[ln G*] = CLNE_diag is false as stated: observed \
         gaps in [{min_gap:.6}, {max_gap:.6}] across {total} instances. The limit of the \
         moment sandwich only gives CLNE_diag - ln(1+ln|X|) <= E_q[ln G*] <= CLNE_diag, \
         which criterion 8b verifies (it passes). Exact counterexample: uniform source \
         over M symbols has E_q[ln G*] = ln(M!)/M < ln M = CLNE_diag."
    );
}

#[test]
fn criterion_08b_rho_zero_minimality_and_sandwich() {
    for trial in 0..100u64 {
        let m = 2 + (trial % 4) as usize; // |X| <= 5
        let k = 1 + (trial % 2) as usize;
        let j = sample_joint(8000, trial, m, k);
        for &q in &POS_GRID {
            let g = optimal_strategy_joint(&j, q);
            let lm = q_log_moment(&g, &j, q).unwrap();

            // exhaustive minimality of E_q[ln G] over every strategy
            let min_lm = exhaustive_log_moment_min(&j, q);
            assert!(lm <= min_lm + 1e-12, "minimality trial={trial} q={q}");

            // the true rho -> 0 statement: one-sided limit plus the sandwich gap
            let diag = clne_diag(&j, q).unwrap();
            assert!(lm <= diag + 1e-12, "upper trial={trial} q={q}");
            assert!(diag - lm <= log_slack(m) + 1e-12, "gap trial={trial} q={q}");
        }
    }
    println!("criterion 8b: PASS - G* minimizes E_q[ln G] (exhaustive, |X|<=5) and the rho->0 sandwich holds");
}

fn exhaustive_log_moment_min(j: &JointPmf, q: f64) -> f64 {
    let m = j.x_len();
    let perms = permutations(m);
    let lw = j.log_power_sum(q);
    let mut total = 0.0;
    for yi in 0..j.y_len() {
        let w: Vec<f64> = j.log_row(yi).iter().map(|&lp| (q * lp - lw).exp()).collect();
        let mut best = f64::INFINITY;
        for perm in &perms {
            let v: f64 = perm.iter().zip(&w).map(|(&g, &wx)| wx * (g as f64).ln()).sum();
            best = best.min(v);
        }
        total += best;
    }
    total
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for partial in out {
            for g in 1..=m {
                if !partial.contains(&g) {
                    let mut np = partial.clone();
                    np.push(g);
                    next.push(np);
                }
            }
        }
        out = next;
    }
    out
}

#[test]
fn criterion_09_divergence_properties() {
    let pairs = [(0.5, 2.0), (2.0, 0.5)];
    for &(a, b) in &pairs {
        let alpha_beta = ab(a, b);
        for trial in 0..1000u64 {
            let m = 2 + (trial % 4) as usize;
            let p = sample_pmf(9000, trial, m);
            let q = sample_pmf(9100, trial, m);
            let v = relative_ab(&p, &q, alpha_beta).unwrap();
            assert!(v >= -1e-10, "uncond trial={trial} ({a},{b})");
            assert!(relative_ab(&p, &p, alpha_beta).unwrap().abs() <= 1e-10);

            let k = 1 + (trial % 2) as usize;
            let pj = sample_joint(9200, trial, m, k);
            let qj = sample_joint(9300, trial, m, k);
            let vc = relative_ab_cond(&pj, &qj, alpha_beta).unwrap();
            assert!(vc >= -1e-10, "cond trial={trial} ({a},{b})");
            assert!(relative_ab_cond(&pj, &pj, alpha_beta).unwrap().abs() <= 1e-10);

            // |Y| = 1 conditional form equals the unconditional form
            let flat = relative_ab_cond(&p.to_joint(), &q.to_joint(), alpha_beta).unwrap();
            assert!((flat - v).abs() <= 1e-10, "reduction trial={trial} ({a},{b})");
        }
    }
    println!("criterion 9: PASS - relative (alpha,beta)-entropies nonnegative, zero at P=Q, |Y|=1 reduction, 1000 pairs per (alpha,beta)");
}

#[test]
fn criterion_10_mismatch_sandwich_and_qpmf() {
    let mut violations = 0usize;
    for trial in 0..500u64 {
        let m = 2 + (trial % 3) as usize;
        let k = 1 + (trial % 2) as usize;
        let pj = sample_joint(10000, trial, m, k);
        let qj = sample_joint(10100, trial, m, k);
        for &q in &POS_GRID {
            for &rho in &POS_GRID {
                let pr = params(q, rho);
                if check_mismatch_sandwich(&pj, &qj, &pr).unwrap().violated {
                    violations += 1;
                }

                // Q^(G) construction: unit mass and the closed-form escort
                let g = sample_strategy(10200, trial, &pj);
                let q_g = q_pmf_from_strategy(&g, &pr, pj.x_labels()).unwrap();
                let total: f64 = (0..k).map(|yi| q_g.row(yi).iter().sum::<f64>()).sum();
                assert!((total - 1.0).abs() <= 1e-12);
                let s1: f64 = (1..=m).map(|i| (i as f64).powf(-(1.0 + rho))).sum();
                for yi in 0..k {
                    let esc = q_g.conditional_by_index(yi).escort(q);
                    for xi in 0..m {
                        let closed = 1.0 / (s1 * rank_pow(g.rank(yi, xi), 1.0 + rho));
                        assert!((esc.prob(xi) - closed).abs() <= 1e-12);
                    }
                }
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 10: PASS - mismatch sandwich on 500 (P,Q) pairs and Q^(G) closed forms at 1e-12");
}

#[test]
fn criterion_11_mismatch3_deviation_and_identity() {
    let mut violations = 0usize;
    for trial in 0..500u64 {
        let m = 2 + (trial % 3) as usize;
        let k = 1 + (trial % 2) as usize;
        let pj = sample_joint(11000, trial, m, k);
        let g = sample_strategy(11100, trial, &pj);
        for &q in &POS_GRID {
            for &rho in &POS_GRID {
                let pr = params(q, rho);
                if check_mismatch3(&pj, &g, &pr).unwrap().violated {
                    violations += 1;
                }

                // cross identity q RE = (1/rho) ln L* - CLNE at (q/(1+rho), q)
                let q_g = q_pmf_from_strategy(&g, &pr, pj.x_labels()).unwrap();
                let alpha_beta = ab(q / (1.0 + rho), q);
                let lhs = q * relative_ab_cond(&pj, &q_g, alpha_beta).unwrap();
                let rhs = bound_l_star(&pj, &q_g, &pr).unwrap().ln() / rho
                    - clne(&pj, alpha_beta).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9, "identity trial={trial} q={q} rho={rho}");
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 11: PASS - |R_q - q RE| <= ln(1+ln|X|) on 500 instances with the cross identity at 1e-9");
}

fn family_instance(trial: u64) -> (SourceFamily, NEParams, f64) {
    let m = 2 + (trial % 3) as usize; // |X| in {2,3,4}
    let n_members = 2 + (trial % 2) as usize; // |P| in {2,3}
    let members: Vec<JointPmf> =
        (0..n_members).map(|i| sample_joint(12000 + i as u64 * 100, trial, m, 1)).collect();
    let family = SourceFamily::new(members).unwrap();
    let q = POS_GRID[((trial / 3) % 3) as usize];
    let rho = POS_GRID[((trial / 9) % 3) as usize];
    let step = if m == 2 { 1e-4 } else { 1e-3 };
    (family, params(q, rho), step)
}

#[test]
fn criterion_12_minimax_solver_and_robust_strategy() {
    let mut max_dev = 0.0f64;
    for trial in 0..50u64 {
        let (family, pr, step) = family_instance(trial);
        let m = family.x_len();
        let cfg = SolverConfig::default();
        let res = solve_minimax(&family, &pr, &cfg).unwrap();
        let grid = grid_minimax(&family, &pr, step).unwrap();
        let dev = (res.c_value - grid).abs();
        max_dev = max_dev.max(dev);
        assert!(dev <= 1e-3, "trial={trial} solver={} grid={grid}", res.c_value);

        let (g_tilde, report) = robust_strategy(&family, &pr, &cfg).unwrap();
        assert!(!report.violated, "trial={trial}");
        let worst = worst_redundancy(&family, &g_tilde, &pr).unwrap();
        let band = log_slack(m);
        assert!(worst <= res.c_value + band + 1e-9, "upper trial={trial}");

        // exhaustive lower bound: no strategy beats C - ln(1+ln|X|)
        for perm in permutations(m) {
            let g = GuessingStrategy::new(family.members()[0].y_labels().to_vec(), vec![perm])
                .unwrap();
            let w = worst_redundancy(&family, &g, &pr).unwrap();
            assert!(w >= res.c_value - band - 1e-9, "lower trial={trial}");
        }
    }
    println!("criterion 12: PASS - solver matches the grid oracle (max |dev| {max_dev:.2e} <= 1e-3) and the robust guarantee holds on 50 instances");
}

#[test]
fn criterion_13_mutation_suite() {
    // harness-level mutations: each registered check must catch its own
    // +1e-3 perturbation
    let cfg = SweepConfig {
        trials: 8,
        alphabet_sizes: vec![2, 3, 4],
        y_sizes: vec![1, 2],
        q_grid: vec![-1.0, 0.5, 1.0, 2.0],
        rho_grid: vec![0.5, 1.0, 2.0],
        ..SweepConfig::default()
    };
    let expectations = [
        (Mutation::BoundL, "theorem1_lower"),
        (Mutation::BoundLCond, "theorem2_lower"),
        (Mutation::QMoment, "theorem3_sandwich"),
        (Mutation::QMoment, "mismatch_sandwich"),
        (Mutation::BoundLStar, "mismatch2_lower"),
        (Mutation::RelativeAbCond, "mismatch3_deviation"),
        (Mutation::Lne, "lne_identity"),
        (Mutation::Clne, "clne_identity"),
        (Mutation::DiagLimit, "diag_limits"),
        (Mutation::RelativeAb, "divergence_properties"),
        (Mutation::BruteValue, "brute_force_equivalence"),
        (Mutation::QLogMoment, "rho_zero_limits"),
        (Mutation::QPmf, "qpmf_validity"),
    ];
    for (mutation, check) in expectations {
        let rep = run_sweep_mutated(&cfg, mutation).unwrap();
        let outcome = rep.checks.iter().find(|c| c.name == check).unwrap();
        assert!(outcome.failures > 0, "mutation {mutation:?} not caught by {check}");
    }
    let clean = run_sweep_mutated(&cfg, Mutation::None).unwrap();
    assert_eq!(clean.failures_total(), 0, "unmutated sweep must be clean");

    // criterion-5 identity flips when bound_l is bumped
    let p = sample_pmf(13000, 0, 4);
    let pr = params(1.0, 1.0);
    let bumped = (bound_l(&p, &pr) + 1e-3).ln();
    let rhs = renyi(&p, 0.5).unwrap();
    assert!((bumped - rhs).abs() > 1e-10, "criterion-5 check must catch a bumped bound_l");

    // criterion-12 comparison flips when the grid value is bumped; pick an
    // instance whose continuous optimum sits strictly below the grid
    let (family, pr12, step) = family_instance(1);
    let res = solve_minimax(&family, &pr12, &SolverConfig::default()).unwrap();
    let grid = grid_minimax(&family, &pr12, step).unwrap();
    assert!(grid - res.c_value > 1e-9, "need a strictly off-grid optimum for the flip");
    assert!((res.c_value - (grid + 1e-3)).abs() > 1e-3, "criterion-12 check must catch a bumped grid value");

    println!("criterion 13: PASS - every check fails under its designated +1e-3 formula perturbation");
}

#[test]
fn minimax_certificate_and_symmetry_extras() {
    // exchange-symmetric family: averaging check and near-uniform Q*
    let p = JointPmf::new(vec!["a", "b"], vec!["_"], &[vec![0.8, 0.2]]).unwrap();
    let q = JointPmf::new(vec!["a", "b"], vec!["_"], &[vec![0.2, 0.8]]).unwrap();
    let fam = SourceFamily::new(vec![p, q]).unwrap();
    let pr = params(1.0, 1.0);
    let res = solve_minimax(&fam, &pr, &SolverConfig::default()).unwrap();
    assert!(res.converged);
    assert!(res.certificate_gap >= 0.0);
    assert!((res.q_star.prob(0, 0) - 0.5).abs() <= 1e-6, "q* = {:?}", res.q_star.row(0));
    let sym = JointPmf::new(
        res.q_star.x_labels().to_vec(),
        res.q_star.y_labels().to_vec(),
        &[vec![
            (res.q_star.prob(0, 0) + res.q_star.prob(0, 1)) / 2.0,
            (res.q_star.prob(0, 0) + res.q_star.prob(0, 1)) / 2.0,
        ]],
    )
    .unwrap();
    assert!(objective(&fam, &sym, &pr).unwrap() <= objective(&fam, &res.q_star, &pr).unwrap() + 1e-9);
}
