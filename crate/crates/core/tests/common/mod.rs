#![allow(dead_code)]

use mealsolve::lp::{certificate, CertificateReport, LpProblem, Sense, Solution};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GAP_TOL: f64 = 1e-6;
pub const PRIMAL_TOL: f64 = 1e-7;
pub const DUAL_TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `min c·x  s.t.  A x ≤ b, x ≥ 0` with up to 6 variables and 6 rows,
/// coefficients in [-5, 5] and right-hand sides in [1, 10].
pub fn random_le_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let mut p = LpProblem::with_objective(c).unwrap();
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        p.add_constraint("", a, Sense::Le, rng.gen_range(1.0..=10.0)).unwrap();
    }
    p
}

/// Like [`random_le_lp`] but with mixed senses and signed right-hand sides,
/// so infeasible instances show up too.
pub fn random_mixed_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=5);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let mut p = LpProblem::with_objective(c).unwrap();
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let sense = match rng.gen_range(0..3) {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        p.add_constraint("", a, sense, rng.gen_range(-10..=10) as f64).unwrap();
    }
    p
}

/// Beale's example: Dantzig's rule with lowest-index tie-breaking returns to
/// the starting basis after six degenerate pivots. Optimum −1/20 at
/// x = (1/25, 0, 1, 0).
pub fn beale() -> LpProblem {
    LpProblem::with_objective(vec![-0.75, 150.0, -0.02, 6.0])
        .unwrap()
        .subject_to(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0)
        .unwrap()
        .subject_to(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0)
        .unwrap()
        .subject_to(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0)
        .unwrap()
}

/// Certificate with the per-component tolerances asserted.
pub fn assert_certified(problem: &LpProblem, solution: &Solution) -> CertificateReport {
    let r = certificate(problem, solution).expect("certificate on an optimal solve");
    assert!(r.duality_gap <= GAP_TOL, "gap {r:?}");
    assert!(r.primal_violation <= PRIMAL_TOL, "primal {r:?}");
    assert!(r.dual_violation <= DUAL_TOL, "dual {r:?}");
    assert!(r.complementary_slackness <= GAP_TOL, "cs {r:?}");
    r
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Chvátal's cycling example, as a minimization: Dantzig's rule with
/// lowest-index ties cycles through six degenerate bases. Optimum −1 at
/// x = (1, 0, 1, 0).
pub fn chvatal() -> LpProblem {
    LpProblem::with_objective(vec![-10.0, 57.0, 9.0, 24.0])
        .unwrap()
        .subject_to(vec![0.5, -5.5, -2.5, 9.0], Sense::Le, 0.0)
        .unwrap()
        .subject_to(vec![0.5, -1.5, -0.5, 1.0], Sense::Le, 0.0)
        .unwrap()
        .subject_to(vec![1.0, 0.0, 0.0, 0.0], Sense::Le, 1.0)
        .unwrap()
}
