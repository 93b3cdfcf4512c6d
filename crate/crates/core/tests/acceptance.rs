//! Release gate for the workspace: ten go/no-go criteria spanning the exact
//! combinatorial layer, the Weingarten calculus, and the Monte Carlo
//! concentration experiments. One test per criterion, so the harness prints
//! one pass/fail line for each. The five heavy simulations run once, behind
//! a shared lazy cell, and their results feed criteria 7–9.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::LazyLock;

use nalgebra::{Complex, DMatrix};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mklab_core::nc::NonCrossingPartition;
use mklab_core::scalar::ratio;
use mklab_core::sim::{
    haar_trace_moment_mc, run_concentration_experiment, EnsembleFamily, EnsembleSpec,
    ExperimentResult,
};
use mklab_core::transform::{
    cumulants_to_moments, mk_forward, mk_inverse, moments_to_cumulants, FreeCumulantSequence,
    MomentSequence, SequenceKind,
};
use mklab_core::verify::{
    decomposition_count_suite, group_isomorphism_suite, moment_identity_suite,
    random_rational_vec, weingarten_asymptotics_suite,
};
use mklab_core::weingarten::{haar_mixed_moment, SqMatrix};

fn nc(s: &str) -> NonCrossingPartition {
    NonCrossingPartition::from_str(s).expect("golden partitions parse")
}

// ---------------------------------------------------------------------------
// Criterion 1: the closed-form lattice sum for Rayleigh-measure moments, the
// complement-weighted sum, and the transition-measure recursion agree exactly
// on random rational free-cumulant sequences, k = 1..8, 100 sequences per k.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_moment_identity_exact() {
    let report = moment_identity_suite(8, 100, 1729);
    assert!(
        report.passed,
        "counterexample: {:?}",
        report.counterexample
    );
    assert_eq!(report.lines.len(), 8);
    assert_eq!(report.total_checks(), 8 * 100 * 3);
}

// ---------------------------------------------------------------------------
// Criterion 2: every ρ ∈ NC(k) has exactly |ρ|−1 Kreweras decompositions and
// each reassembles to ρ — exhaustively for k = 2..9 (4862 partitions at k=9).
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_decomposition_counts_exhaustive() {
    let report = decomposition_count_suite(9);
    assert!(
        report.passed,
        "counterexample: {:?}",
        report.counterexample
    );
    assert_eq!(report.lines.len(), 8, "one line per k = 2..=9");
}

// ---------------------------------------------------------------------------
// Criterion 3: the documented worked examples reproduce bit-exactly.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_worked_examples_bit_exact() {
    // Kreweras complement of a 9-point partition.
    let rho = nc("{1,7|2,5,6|3|4|8,9}");
    assert_eq!(rho.kreweras().to_string(), "{1,6|2,3,4|5|7,9|8}");

    // Insertion sites are the last points of the complement's blocks, and
    // splicing a 3-point partition in at site 4 yields the documented
    // 12-point result.
    assert_eq!(rho.kreweras_points(), vec![4, 5, 6, 8, 9]);
    let inner = nc("{1,3|2}");
    let spliced = NonCrossingPartition::insert_at(&rho, 4, &inner).expect("4 is a legal site");
    assert_eq!(spliced.to_string(), "{1,10|2,8,9|3|4|5,7|6|11,12}");

    // The 10-point partition with exactly four inner partitions.
    let ten = nc("{1,8|2,3|4,6,7|5|9,10}");
    let decomps = ten.kreweras_decompositions();
    assert_eq!(decomps.len(), 4);
    let inners: BTreeSet<String> = decomps.iter().map(|d| d.inner.to_string()).collect();
    let expected: BTreeSet<String> = ["{1,2|3,5,6|4}", "{1,3,4|2}", "{1}", "{1,2}"]
        .into_iter()
        .map(String::from)
        .collect();
    assert_eq!(inners, expected);
    for d in &decomps {
        assert_eq!(d.reassemble().expect("decomposition is valid"), ten);
    }

    // The 27-point partition with 14 blocks and 13 decompositions.
    let big = nc("{1,8,9,16|2,7|3,6|4,5|10,11|12,14|13|15|17,20|18,19|21,24,27|22,23|25|26}");
    assert_eq!(big.num_blocks(), 14);
    assert_eq!(big.kreweras_decompositions().len(), 13);
}

// ---------------------------------------------------------------------------
// Criterion 4: the order isomorphism between NC(k) and the geodesic
// permutations — complements, lengths, and Möbius transport — exhaustively
// for k ≤ 7.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_lattice_group_isomorphism() {
    let report = group_isomorphism_suite(7);
    assert!(
        report.passed,
        "counterexample: {:?}",
        report.counterexample
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: exact Weingarten values shrink onto their signed-Catalan
// asymptotics at ratio ≤ 1/3 per doubling of N for k ≤ 5, and the k = 2
// closed forms hold exactly.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_weingarten_asymptotics() {
    let report = weingarten_asymptotics_suite(5);
    assert!(
        report.passed,
        "counterexample: {:?}",
        report.counterexample
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: the exact rational mixed-moment formula agrees with a direct
// Monte Carlo average over sampled Haar unitaries (10⁵ samples, N = 8,
// k ≤ 3) within five standard errors.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_haar_moment_cross_validation() {
    let n = 8usize;
    let entry_a = |m: usize, i: usize, j: usize| ((3 * m + 5 * i + 7 * j) % 5) as i64 - 2;
    let entry_b = |m: usize, i: usize, j: usize| ((2 * m + 3 * i + j) % 5) as i64 - 2;

    let exact_mats = |entry: &dyn Fn(usize, usize, usize) -> i64| -> Vec<SqMatrix<_>> {
        (0..3)
            .map(|m| {
                SqMatrix::from_rows(
                    (0..n)
                        .map(|i| (0..n).map(|j| ratio(entry(m, i, j), 1)).collect())
                        .collect(),
                )
                .expect("square")
            })
            .collect()
    };
    let float_mats = |entry: &dyn Fn(usize, usize, usize) -> i64| -> Vec<DMatrix<Complex<f64>>> {
        (0..3)
            .map(|m| {
                DMatrix::from_fn(n, n, |i, j| Complex::new(entry(m, i, j) as f64, 0.0))
            })
            .collect()
    };

    let (ae, be) = (exact_mats(&entry_a), exact_mats(&entry_b));
    let (af, bf) = (float_mats(&entry_a), float_mats(&entry_b));

    for k in 1..=3 {
        let exact = haar_mixed_moment(&ae[..k], &be[..k])
            .expect("k and N within caps")
            .to_f64()
            .expect("rational fits in f64");
        let mc = haar_trace_moment_mc(&af[..k], &bf[..k], 100_000, 86)
            .expect("well-formed inputs");
        let dev = (mc.mean - exact).abs();
        assert!(
            dev <= 5.0 * mc.stderr,
            "k={k}: exact {exact}, Monte Carlo {} ± {}, deviation {dev} > 5 stderr",
            mc.mean,
            mc.stderr
        );
    }
}

// ---------------------------------------------------------------------------
// Criteria 7–9 share five concentration experiments: GUE N = 300 (k ≤ 6) and
// the N ∈ {50, 100, 200, 400} trend runs (k ≤ 2), each with 200 trials and
// the seed pinned to N. Any interlacing violation or numerical failure
// aborts the corresponding run, so a populated result is itself evidence of
// zero violations.
// ---------------------------------------------------------------------------

struct Experiments {
    gue300: ExperimentResult,
    trend: Vec<ExperimentResult>,
}

static EXPERIMENTS: LazyLock<Result<Experiments, String>> = LazyLock::new(|| {
    let spec = EnsembleSpec::new(EnsembleFamily::Gue, 300, 300).map_err(|e| e.to_string())?;
    let gue300 = run_concentration_experiment(&spec, 6, 200).map_err(|e| e.to_string())?;
    let mut trend = Vec::new();
    for n in [50usize, 100, 200, 400] {
        let spec =
            EnsembleSpec::new(EnsembleFamily::Gue, n, n as u64).map_err(|e| e.to_string())?;
        trend.push(run_concentration_experiment(&spec, 2, 200).map_err(|e| e.to_string())?);
    }
    Ok(Experiments { gue300, trend })
});

fn experiments() -> &'static Experiments {
    EXPERIMENTS
        .as_ref()
        .expect("concentration experiments complete without aborting")
}

#[test]
fn criterion_07_concentration_at_n300() {
    let run = &experiments().gue300;
    let allowance = 30.0 / run.spec.n as f64;
    let targets = [0.0, 2.0, 0.0, 6.0, 0.0, 20.0];
    for (row, &target) in run.rows.iter().zip(&targets) {
        assert_eq!(row.pred_l1, target, "limit prediction at k={}", row.k);
        let dev = (row.mean - target).abs();
        let tol = 3.0 * row.stderr + allowance;
        assert!(
            dev <= tol,
            "k={}: mean {} vs {target}, |dev| {dev} > {tol}",
            row.k,
            row.mean
        );
    }
    let m2 = &run.rows[1];
    let dev_sq = (m2.mean_sq - 4.0).abs();
    let tol_sq = 3.0 * m2.stderr_sq + 60.0 / run.spec.n as f64;
    assert!(
        dev_sq <= tol_sq,
        "second moment squared: {} vs 4, |dev| {dev_sq} > {tol_sq}",
        m2.mean_sq
    );
}

#[test]
fn criterion_08_rate_trend_in_n() {
    let trend = &experiments().trend;
    let devs: Vec<(usize, f64, f64)> = trend
        .iter()
        .map(|run| {
            let row = &run.rows[1];
            assert_eq!(row.k, 2);
            (run.spec.n, (row.mean - 2.0).abs(), row.stderr)
        })
        .collect();
    for pair in devs.windows(2) {
        let (n0, d0, s0) = pair[0];
        let (n1, d1, s1) = pair[1];
        let slack = (s0 * s0 + s1 * s1).sqrt();
        assert!(
            d1 <= d0 + slack,
            "|mean M₂ − 2| grew from {d0} (N={n0}) to {d1} (N={n1}), slack {slack}"
        );
    }
}

#[test]
fn criterion_09_interlacing_zero_violations() {
    let exps = experiments();
    assert_eq!(exps.gue300.interlacing_violations, 0);
    for run in &exps.trend {
        assert_eq!(
            run.interlacing_violations, 0,
            "violations at N={}",
            run.spec.n
        );
    }
}

// ---------------------------------------------------------------------------
// Criterion 10: moments↔cumulants and the transition-measure recursion and
// its inverse round-trip exactly on 50 random rational sequences of order 10.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_transform_round_trips() {
    let mut rng = ChaCha12Rng::seed_from_u64(102_026);
    for _ in 0..50 {
        let values = random_rational_vec(&mut rng, 10);

        let m = MomentSequence::new(SequenceKind::Raw, values.clone()).expect("nonempty");
        let fc = moments_to_cumulants(&m).expect("order within cap");
        let back = cumulants_to_moments(&fc).expect("order within cap");
        assert_eq!(back.values(), m.values());

        let fc_direct = FreeCumulantSequence::new(values.clone()).expect("nonempty");
        let inflated = cumulants_to_moments(&fc_direct).expect("order within cap");
        let recovered = moments_to_cumulants(&inflated).expect("order within cap");
        assert_eq!(recovered.values(), fc_direct.values());

        let tau = mk_forward(&m);
        assert_eq!(mk_inverse(&tau).values(), m.values());
        let untau = mk_inverse(&m);
        assert_eq!(mk_forward(&untau).values(), m.values());
    }
}
