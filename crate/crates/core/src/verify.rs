//! Exact verification suites over the combinatorial core.
//!
//! Each suite sweeps a family of identities, counts the checks it performed
//! per order `k`, and reports the first counterexample if one exists. The
//! command-line harness renders these reports and turns `passed` into an
//! exit code; the acceptance tests call the same functions, so there is one
//! implementation of every check.

use crate::nc::{self, NonCrossingPartition};
use crate::perm::{embed_nc, Permutation};
use crate::scalar::ratio;
use crate::transform::{
    cumulants_to_moments, mk_forward, rayleigh_moment_limit, rayleigh_moment_nc_sum,
    FreeCumulantSequence,
};
use crate::weingarten::{asymptotic_error, build_table, mu_asymptotic};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::fmt;
use std::time::Instant;

/// Per-order progress line of a suite run.
#[derive(Clone, Debug)]
pub struct SuiteLine {
    pub label: String,
    pub checks: u64,
    pub millis: u128,
}

/// Outcome of one verification suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub lines: Vec<SuiteLine>,
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport {
            suite,
            passed: true,
            lines: Vec::new(),
            counterexample: None,
        }
    }

    pub fn total_checks(&self) -> u64 {
        self.lines.iter().map(|l| l.checks).sum()
    }

    /// Record a failure; only the first counterexample is kept.
    fn fail(&mut self, counterexample: String) {
        if self.passed {
            self.passed = false;
            self.counterexample = Some(counterexample);
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {} ({} checks)",
            self.suite,
            if self.passed { "PASS" } else { "FAIL" },
            self.total_checks()
        )?;
        for line in &self.lines {
            writeln!(f, "  {}: {} checks, {} ms", line.label, line.checks, line.millis)?;
        }
        if let Some(ce) = &self.counterexample {
            writeln!(f, "  counterexample: {ce}")?;
        }
        Ok(())
    }
}

/// Small random rationals (numerators in `−9..=9`, denominators in `1..=9`)
/// for exact identity sweeps.
pub fn random_rational_vec(rng: &mut impl Rng, len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|_| ratio(rng.random_range(-9i64..=9), rng.random_range(1i64..=9)))
        .collect()
}

fn render_seq(fc: &FreeCumulantSequence<BigRational>) -> String {
    let parts: Vec<String> = fc.values().iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// The central moment identity: for random exact free-cumulant sequences,
/// the closed-form lattice sum with coefficient `k + 1 − |ρ|`, the
/// complement-weighted sum with coefficient `|K(ρ)|`, and the Markov–Krein
/// recursion applied to the moment–cumulant expansion all produce the same
/// Rayleigh moment, exactly.
pub fn moment_identity_suite(k_max: usize, sequences_per_k: u32, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("moment-identity");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for k in 1..=k_max {
        let start = Instant::now();
        let mut checks = 0u64;
        for _ in 0..sequences_per_k {
            let fc = FreeCumulantSequence::new(random_rational_vec(&mut rng, k))
                .expect("k >= 1");
            let closed = rayleigh_moment_nc_sum(&fc, k).expect("k within caps");
            let via_complement = rayleigh_moment_limit(&fc, k, 1).expect("k within caps");
            let via_recursion =
                mk_forward(&cumulants_to_moments(&fc).expect("k within caps"));
            let recursion_value = via_recursion.moment(k);
            if &closed != recursion_value || closed != via_complement {
                report.fail(format!(
                    "k={k}, fc={}: lattice sum {closed}, recursion {recursion_value}, \
                     complement route {via_complement}",
                    render_seq(&fc)
                ));
            }
            checks += 3;
        }
        report.lines.push(SuiteLine {
            label: format!("k={k}"),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

/// Every partition of `NC(k)` has exactly `|ρ| − 1` Kreweras decompositions,
/// and each decomposition reassembles to the partition it came from.
pub fn decomposition_count_suite(k_max: usize) -> SuiteReport {
    let mut report = SuiteReport::new("decompositions");
    for k in 2..=k_max {
        let start = Instant::now();
        let mut checks = 0u64;
        let mut total_decomps = 0u64;
        for rho in nc::enumerate_nc(k).expect("k within enumeration cap") {
            let decomps = rho.kreweras_decompositions();
            if decomps.len() != rho.num_blocks() - 1 {
                report.fail(format!(
                    "{rho} has {} decompositions, expected {}",
                    decomps.len(),
                    rho.num_blocks() - 1
                ));
            }
            for d in &decomps {
                match d.reassemble() {
                    Ok(back) if back == rho => {}
                    Ok(back) => report.fail(format!(
                        "{rho} decomposition at p={} reassembles to {back}",
                        d.insertion_point
                    )),
                    Err(e) => report.fail(format!(
                        "{rho} decomposition at p={} fails to reassemble: {e}",
                        d.insertion_point
                    )),
                }
            }
            total_decomps += decomps.len() as u64;
            checks += 1 + decomps.len() as u64;
        }
        report.lines.push(SuiteLine {
            label: format!("k={k} (sum of |rho|-1 = {total_decomps})"),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

/// Möbius function sanity: `μ̃(ρ,ρ) = 1`, `μ̃(0_k,1_k)` is the signed
/// Catalan number, and the deltas `Σ_{σ ≤ ν ≤ ρ} μ̃(ν,ρ) = δ_{σ,ρ}` hold —
/// exhaustively through `k = 6`, on deterministic samples above that.
pub fn mobius_suite(k_max: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("mobius");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for k in 1..=k_max {
        let start = Instant::now();
        let mut checks = 0u64;
        let full = NonCrossingPartition::full(k);
        let zero = NonCrossingPartition::singletons(k);
        let signed_catalan = if k % 2 == 0 { -1i64 } else { 1 } * nc::catalan(k - 1) as i64;
        if nc::mobius_nc(&zero, &full).expect("comparable") != signed_catalan {
            report.fail(format!(
                "mobius(0_{k}, 1_{k}) != {signed_catalan}"
            ));
        }
        checks += 1;

        let list = nc::enumerate_nc(k).expect("k within enumeration cap");
        for rho in &list {
            if nc::mobius_nc(rho, rho).expect("comparable") != 1 {
                report.fail(format!("mobius({rho}, {rho}) != 1"));
            }
            checks += 1;
        }

        let pairs: Vec<(usize, usize)> = if k <= 6 {
            let mut all = Vec::new();
            for (i, sigma) in list.iter().enumerate() {
                for (j, rho) in list.iter().enumerate() {
                    if sigma.leq(rho).expect("same ground set") {
                        all.push((i, j));
                    }
                }
            }
            all
        } else {
            (0..200)
                .filter_map(|_| {
                    let i = rng.random_range(0..list.len());
                    let j = rng.random_range(0..list.len());
                    let (fine, coarse) = (i.min(j), i.max(j));
                    // Enumeration order is not the lattice order, so accept
                    // whichever orientation happens to be comparable.
                    if list[fine].leq(&list[coarse]).expect("same ground set") {
                        Some((fine, coarse))
                    } else {
                        None
                    }
                })
                .collect()
        };
        for (i, j) in pairs {
            let sigma = &list[i];
            let rho = &list[j];
            let mut total = 0i64;
            for nu in &list {
                if sigma.leq(nu).expect("same ground set")
                    && nu.leq(rho).expect("same ground set")
                {
                    total += nc::mobius_nc(nu, rho).expect("comparable");
                }
            }
            let want = i64::from(sigma == rho);
            if total != want {
                report.fail(format!(
                    "interval [{sigma}, {rho}] sums to {total}, expected {want}"
                ));
            }
            checks += 1;
        }

        report.lines.push(SuiteLine {
            label: format!("k={k}"),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

/// Weingarten large-`N` behavior: for every cycle type of every `k ≤ k_max`,
/// the error `e(N) = N^{k+|σ|}·Wg(σ,N) − μ(σ)` contracts by at least 3× per
/// doubling along `N = 2k, 4k, 8k`, and the order-2 values match their
/// closed forms `1/(N²−1)` and `−1/(N(N²−1))`.
pub fn weingarten_asymptotics_suite(k_max: usize) -> SuiteReport {
    let mut report = SuiteReport::new("weingarten-asym");
    for k in 1..=k_max {
        let start = Instant::now();
        let mut checks = 0u64;
        let ns = [2 * k as u64, 4 * k as u64, 8 * k as u64];
        let tables: Vec<_> = ns
            .iter()
            .map(|&n| build_table(k, n).expect("k within table cap"))
            .collect();
        let types: Vec<_> = tables[0].entries().map(|(t, _)| t.clone()).collect();
        for t in &types {
            let errs: Vec<BigRational> = tables
                .iter()
                .map(|tab| asymptotic_error(tab, t))
                .collect();
            for w in errs.windows(2) {
                // |e(2N)| ≤ |e(N)|/3, i.e. 3·|e(2N)| ≤ |e(N)|.
                if BigRational::from_integer(BigInt::from(3)) * w[1].abs() > w[0].abs() {
                    report.fail(format!(
                        "cycle type {t} at k={k}: errors {} then {} shrink slower than 3x",
                        w[0], w[1]
                    ));
                }
                checks += 1;
            }
        }
        report.lines.push(SuiteLine {
            label: format!("k={k} ({} cycle types)", types.len()),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }

    if k_max >= 2 {
        let start = Instant::now();
        let mut checks = 0u64;
        for n in [2u64, 3, 5, 9, 16] {
            let table = build_table(2, n).expect("order 2");
            let n2 = BigRational::from_integer(BigInt::from((n * n) as i64));
            let nn = BigRational::from_integer(BigInt::from(n as i64));
            let pair = BigRational::one() / (n2.clone() - BigRational::one());
            let swap = -BigRational::one() / (nn * (n2 - BigRational::one()));
            let got_pair = table
                .value(&crate::perm::CycleType::new(vec![1, 1]))
                .expect("type present");
            let got_swap = table
                .value(&crate::perm::CycleType::new(vec![2]))
                .expect("type present");
            if got_pair != &pair || got_swap != &swap {
                report.fail(format!(
                    "order-2 closed forms at N={n}: got ({got_pair}, {got_swap})"
                ));
            }
            checks += 2;
        }
        report.lines.push(SuiteLine {
            label: "k=2 closed forms".into(),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

/// The lattice–group dictionary, exhaustively per order: the refinement
/// order matches geodesic order for the embedded permutations, the interval
/// Möbius function transports to the signed-Catalan product over cycles of
/// `𝒫_ν⁻¹𝒫_ρ`, and the group-side complement `𝒫_ρ⁻¹γ_k` has cycle
/// structure equal to the Kreweras complement.
pub fn group_isomorphism_suite(k_max: usize) -> SuiteReport {
    let mut report = SuiteReport::new("group-iso");
    for k in 1..=k_max {
        let start = Instant::now();
        let mut checks = 0u64;
        let list = nc::enumerate_nc(k).expect("k within enumeration cap");
        let embeds: Vec<Permutation> = list.iter().map(embed_nc).collect();

        for (rho, p_rho) in list.iter().zip(&embeds) {
            let lattice = rho.kreweras();
            let group = crate::perm::complement_via_group(rho).expect("valid complement");
            if lattice != group {
                report.fail(format!(
                    "complement of {rho}: lattice {lattice}, group route {group}"
                ));
            }
            checks += 1;

            // |ρ| + |K(ρ)| = k + 1 restated on the group side:
            // |𝒫_ρ| + |𝒫_ρ⁻¹γ| = |γ| = k − 1.
            let to_gamma = p_rho
                .inverse()
                .compose(&Permutation::full_cycle(k))
                .expect("same degree");
            if p_rho.length() + to_gamma.length() != k - 1 {
                report.fail(format!("{rho} does not sit on a geodesic to the full cycle"));
            }
            checks += 1;
        }

        for (nu, p_nu) in list.iter().zip(&embeds) {
            for (rho, p_rho) in list.iter().zip(&embeds) {
                let lattice_leq = nu.leq(rho).expect("same ground set");
                let between = p_nu.inverse().compose(p_rho).expect("same degree");
                let group_leq = p_nu.length() + between.length() == p_rho.length();
                if lattice_leq != group_leq {
                    report.fail(format!(
                        "order mismatch for ({nu}, {rho}): lattice {lattice_leq}, group {group_leq}"
                    ));
                }
                checks += 1;

                if lattice_leq {
                    let transported = mu_asymptotic(&between.cycle_type());
                    let direct = nc::mobius_nc(nu, rho).expect("comparable");
                    if transported != direct {
                        report.fail(format!(
                            "mobius transport for ({nu}, {rho}): interval {direct}, \
                             cycle product {transported}"
                        ));
                    }
                    checks += 1;
                }
            }
        }

        report.lines.push(SuiteLine {
            label: format!("k={k} ({} partitions)", list.len()),
            checks,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_passes_at_small_order() {
        let r = moment_identity_suite(5, 20, 71);
        assert!(r.passed, "{r}");
        assert_eq!(r.lines.len(), 5);
        assert_eq!(r.total_checks(), 5 * 20 * 3);
    }

    #[test]
    fn decomposition_suite_passes_and_counts() {
        let r = decomposition_count_suite(6);
        assert!(r.passed, "{r}");
        // Lines for k = 2..6.
        assert_eq!(r.lines.len(), 5);
    }

    #[test]
    fn mobius_suite_passes_exhaustively_small() {
        let r = mobius_suite(5, 13);
        assert!(r.passed, "{r}");
    }

    #[test]
    fn weingarten_suite_passes_to_order_three() {
        let r = weingarten_asymptotics_suite(3);
        assert!(r.passed, "{r}");
    }

    #[test]
    fn group_suite_passes_to_order_five() {
        let r = group_isomorphism_suite(5);
        assert!(r.passed, "{r}");
    }

    #[test]
    fn reports_render_with_status_line() {
        let r = mobius_suite(3, 1);
        let text = r.to_string();
        assert!(text.starts_with("suite mobius: PASS"));
        assert!(text.contains("k=3"));
    }

    #[test]
    fn random_rationals_are_in_documented_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for v in random_rational_vec(&mut rng, 200) {
            assert!(v.denom() <= &BigInt::from(9) && v.denom() >= &BigInt::from(1));
            assert!(v.numer().abs() <= BigInt::from(9));
        }
    }
}
