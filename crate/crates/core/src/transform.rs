//! Moment-level transforms for the Markov–Krein correspondence.
//!
//! Everything here works on truncated moment sequences `M_1..M_K` and free
//! cumulant sequences `fc_1..fc_K`. The transforms are formal: no positivity
//! or Hankel condition is checked, and the `kind` tag on a sequence is purely
//! descriptive. All recursions are lower-triangular in the order `k`, so an
//! order-`K` input determines an order-`K` output with no tail assumptions.
//!
//! The same Rayleigh-moment number can be computed three ways — the
//! Markov–Krein recursion ([`mk_forward`] after [`cumulants_to_moments`]),
//! the closed-form lattice sum with coefficient `k + 1 − |ρ|`
//! ([`rayleigh_moment_nc_sum`]), and the complement-weighted sum with
//! coefficient `|K(ρ)|` ([`rayleigh_moment_limit`]). They share no code path
//! on the coefficient, which is exactly what makes agreement a meaningful
//! check.

use crate::nc::{self, NonCrossingPartition};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use thiserror::Error;

/// Largest order accepted by the lattice-sum routes (they enumerate `NC(k)`
/// and evaluate Möbius values, so they inherit [`nc::MAX_MOBIUS_K`]). The
/// plain recursions [`mk_forward`] / [`mk_inverse`] have no cap.
pub const MAX_TRANSFORM_K: usize = nc::MAX_MOBIUS_K;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("a sequence must contain at least one entry")]
    Empty,
    #[error("order {k} out of range (this operation supports k <= {max})")]
    OrderOutOfRange { k: usize, max: usize },
    #[error("spectrum lengths must differ by one: got {full} and {sub}")]
    LengthMismatch { full: usize, sub: usize },
    #[error("moment power {ell} unsupported (only 1 and 2)")]
    EllOutOfRange { ell: usize },
    #[error(transparent)]
    Nc(#[from] nc::NcError),
}

/// What a moment sequence describes. Descriptive only — no arithmetic
/// branches on it, and no positivity is implied or verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    /// Moments of a transition measure (probability-measure side).
    Transition,
    /// Moments of a Rayleigh measure (signed side; mass-one paired
    /// difference of point masses in the empirical case).
    Rayleigh,
    /// Anything else, e.g. raw empirical spectral moments.
    Raw,
}

impl SequenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceKind::Transition => "transition",
            SequenceKind::Rayleigh => "rayleigh",
            SequenceKind::Raw => "raw",
        }
    }
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A truncated moment sequence `M_1..M_K` (there is no `M_0` slot; every
/// measure in play has unit total mass).
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence<T: Scalar> {
    kind: SequenceKind,
    values: Vec<T>,
}

/// A truncated free cumulant sequence `fc_1..fc_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeCumulantSequence<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> MomentSequence<T> {
    /// `values[i]` is `M_{i+1}`. Rejects empty input.
    pub fn new(kind: SequenceKind, values: Vec<T>) -> Result<Self, TransformError> {
        if values.is_empty() {
            return Err(TransformError::Empty);
        }
        Ok(MomentSequence { kind, values })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `M_k`, 1-based; panics if `k` is 0 or beyond the truncation order.
    pub fn moment(&self, k: usize) -> &T {
        &self.values[k - 1]
    }

    /// Multiplicative extension over blocks: `M_ν = Π_{B ∈ ν} M_{|B|}`.
    pub fn product_over_blocks(&self, nu: &NonCrossingPartition) -> Result<T, TransformError> {
        if nu.k() > self.order() {
            return Err(TransformError::OrderOutOfRange {
                k: nu.k(),
                max: self.order(),
            });
        }
        Ok(product_of_sizes(&self.values, nu.block_sizes()))
    }

    /// Multiplicative extension over cycles: `M_σ = Π_{c ∈ σ} M_{|c|}`.
    pub fn product_over_cycles(&self, sigma: &Permutation) -> Result<T, TransformError> {
        if sigma.k() > self.order() {
            return Err(TransformError::OrderOutOfRange {
                k: sigma.k(),
                max: self.order(),
            });
        }
        Ok(product_of_sizes(
            &self.values,
            sigma.cycles().iter().map(Vec::len),
        ))
    }

    /// `{kind, K, scalar_mode, values}` with rationals rendered `"p/q"`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.as_str(),
            "K": self.order(),
            "scalar_mode": T::MODE,
            "values": self.values.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

impl<T: Scalar> FreeCumulantSequence<T> {
    /// `values[i]` is `fc_{i+1}`. Rejects empty input.
    pub fn new(values: Vec<T>) -> Result<Self, TransformError> {
        if values.is_empty() {
            return Err(TransformError::Empty);
        }
        Ok(FreeCumulantSequence { values })
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `fc_k`, 1-based; panics if `k` is 0 or beyond the truncation order.
    pub fn cumulant(&self, k: usize) -> &T {
        &self.values[k - 1]
    }

    /// Multiplicative extension over blocks: `fc_ρ = Π_{B ∈ ρ} fc_{|B|}`.
    pub fn product_over_blocks(&self, rho: &NonCrossingPartition) -> Result<T, TransformError> {
        if rho.k() > self.order() {
            return Err(TransformError::OrderOutOfRange {
                k: rho.k(),
                max: self.order(),
            });
        }
        Ok(product_of_sizes(&self.values, rho.block_sizes()))
    }

    /// `{K, scalar_mode, values}` with rationals rendered `"p/q"`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "K": self.order(),
            "scalar_mode": T::MODE,
            "values": self.values.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

fn product_of_sizes<T: Scalar>(values: &[T], sizes: impl Iterator<Item = usize>) -> T {
    let mut acc = T::one();
    for s in sizes {
        acc = acc * values[s - 1].clone();
    }
    acc
}

/// Free cumulants from moments via the Möbius sum
/// `fc_k = Σ_{ν ∈ NC(k)} M_ν · μ̃(ν, 1_k)`. Exact inverse of
/// [`cumulants_to_moments`].
pub fn moments_to_cumulants<T: Scalar>(
    m: &MomentSequence<T>,
) -> Result<FreeCumulantSequence<T>, TransformError> {
    let order = m.order();
    if order > MAX_TRANSFORM_K {
        return Err(TransformError::OrderOutOfRange {
            k: order,
            max: MAX_TRANSFORM_K,
        });
    }
    let mut fc = Vec::with_capacity(order);
    for k in 1..=order {
        let full = NonCrossingPartition::full(k);
        let mut acc = T::zero();
        for nu in nc::enumerate_nc(k)? {
            let mu = nc::mobius_nc(&nu, &full)?;
            acc = acc + m.product_over_blocks(&nu)? * T::from_int(mu);
        }
        fc.push(acc);
    }
    FreeCumulantSequence::new(fc)
}

/// Moments from free cumulants via the lattice sum
/// `M_k = Σ_{ρ ∈ NC(k)} fc_ρ`. The result is tagged
/// [`SequenceKind::Transition`].
pub fn cumulants_to_moments<T: Scalar>(
    fc: &FreeCumulantSequence<T>,
) -> Result<MomentSequence<T>, TransformError> {
    let order = fc.order();
    if order > MAX_TRANSFORM_K {
        return Err(TransformError::OrderOutOfRange {
            k: order,
            max: MAX_TRANSFORM_K,
        });
    }
    let mut m = Vec::with_capacity(order);
    for k in 1..=order {
        let mut acc = T::zero();
        for rho in nc::enumerate_nc(k)? {
            acc = acc + fc.product_over_blocks(&rho)?;
        }
        m.push(acc);
    }
    MomentSequence::new(SequenceKind::Transition, m)
}

/// Rayleigh-measure moments from transition-measure moments:
/// `M_k(τ) = k·M_k(𝔪) − Σ_{r=1}^{k−1} M_r(τ)·M_{k−r}(𝔪)` — the relation
/// satisfied by Newton power sums and complete homogeneous symmetric
/// functions. Order-preserving and uncapped.
pub fn mk_forward<T: Scalar>(m: &MomentSequence<T>) -> MomentSequence<T> {
    let mv = m.values();
    let mut tau: Vec<T> = Vec::with_capacity(mv.len());
    for k in 1..=mv.len() {
        let mut v = T::from_int(k as i64) * mv[k - 1].clone();
        for r in 1..k {
            v = v - tau[r - 1].clone() * mv[k - r - 1].clone();
        }
        tau.push(v);
    }
    MomentSequence {
        kind: SequenceKind::Rayleigh,
        values: tau,
    }
}

/// Transition-measure moments from Rayleigh-measure moments; the same
/// recursion solved for `M_k(𝔪)`. Exact inverse of [`mk_forward`] over
/// rationals, and the only place this module divides.
pub fn mk_inverse<T: Scalar>(tau: &MomentSequence<T>) -> MomentSequence<T> {
    let tv = tau.values();
    let mut m: Vec<T> = Vec::with_capacity(tv.len());
    for k in 1..=tv.len() {
        let mut v = tv[k - 1].clone();
        for r in 1..k {
            v = v + tv[r - 1].clone() * m[k - r - 1].clone();
        }
        m.push(v / T::from_int(k as i64));
    }
    MomentSequence {
        kind: SequenceKind::Transition,
        values: m,
    }
}

/// Closed-form Rayleigh moment from free cumulants:
/// `M_k(τ) = Σ_{ρ ∈ NC(k)} (k + 1 − |ρ|)·fc_ρ`. Kept deliberately
/// independent of [`mk_forward`] so the two can be compared exactly.
pub fn rayleigh_moment_nc_sum<T: Scalar>(
    fc: &FreeCumulantSequence<T>,
    k: usize,
) -> Result<T, TransformError> {
    let cap = MAX_TRANSFORM_K.min(fc.order());
    if k == 0 || k > cap {
        return Err(TransformError::OrderOutOfRange { k, max: cap });
    }
    let mut acc = T::zero();
    for rho in nc::enumerate_nc(k)? {
        let coeff = (k + 1 - rho.num_blocks()) as i64;
        acc = acc + fc.product_over_blocks(&rho)? * T::from_int(coeff);
    }
    Ok(acc)
}

/// Limit prediction for `E[M_k(κ_N)^ℓ]` when the free cumulants are
/// deterministic: `ℓ=1` gives `Σ_ρ |K(ρ)|·fc_ρ`, `ℓ=2` the double sum
/// `Σ_{ρ₁,ρ₂} |K(ρ₁)|·|K(ρ₂)|·fc_{ρ₁}·fc_{ρ₂}`. The weights come from the
/// Kreweras complement itself, not from the block-count shortcut, so the
/// equality with [`rayleigh_moment_nc_sum`] at `ℓ=1` is a genuine
/// cross-check of `|K(ρ)| = k + 1 − |ρ|`.
pub fn rayleigh_moment_limit<T: Scalar>(
    fc: &FreeCumulantSequence<T>,
    k: usize,
    ell: usize,
) -> Result<T, TransformError> {
    let cap = MAX_TRANSFORM_K.min(fc.order());
    if k == 0 || k > cap {
        return Err(TransformError::OrderOutOfRange { k, max: cap });
    }
    let mut weighted: Vec<(i64, T)> = Vec::new();
    for rho in nc::enumerate_nc(k)? {
        let w = rho.kreweras().num_blocks() as i64;
        weighted.push((w, fc.product_over_blocks(&rho)?));
    }
    match ell {
        1 => {
            let mut acc = T::zero();
            for (w, v) in weighted {
                acc = acc + v * T::from_int(w);
            }
            Ok(acc)
        }
        2 => {
            let mut acc = T::zero();
            for (w1, v1) in &weighted {
                for (w2, v2) in &weighted {
                    acc = acc + v1.clone() * v2.clone() * T::from_int(w1 * w2);
                }
            }
            Ok(acc)
        }
        other => Err(TransformError::EllOutOfRange { ell: other }),
    }
}

/// Moments of the empirical Rayleigh measure `κ = Σ_i δ_{λ_i} − Σ_j δ_{λ̃_j}`
/// of a spectrum and a once-smaller spectrum:
/// `M_k(κ) = Σ_i λ_i^k − Σ_j λ̃_j^k` for `k = 1..k_max`.
pub fn rayleigh_moments(
    lambda: &[f64],
    lambda_tilde: &[f64],
    k_max: usize,
) -> Result<MomentSequence<f64>, TransformError> {
    if lambda_tilde.len() + 1 != lambda.len() {
        return Err(TransformError::LengthMismatch {
            full: lambda.len(),
            sub: lambda_tilde.len(),
        });
    }
    if k_max == 0 {
        return Err(TransformError::Empty);
    }
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let pos: f64 = lambda.iter().map(|x| x.powi(k as i32)).sum();
        let neg: f64 = lambda_tilde.iter().map(|x| x.powi(k as i32)).sum();
        values.push(pos - neg);
    }
    MomentSequence::new(SequenceKind::Rayleigh, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn rational_moments(kind: SequenceKind, vals: &[(i64, i64)]) -> MomentSequence<BigRational> {
        MomentSequence::new(kind, vals.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    fn rational_cumulants(vals: &[(i64, i64)]) -> FreeCumulantSequence<BigRational> {
        FreeCumulantSequence::new(vals.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    /// A deterministic bank of small rational cumulant sequences for identity
    /// checks that want variety without randomness.
    fn cumulant_bank(order: usize) -> Vec<FreeCumulantSequence<BigRational>> {
        let mut bank = Vec::new();
        for s in 0..12i64 {
            let vals: Vec<BigRational> = (1..=order as i64)
                .map(|j| ratio((s * j + 3) % 7 - 3, (s + j) % 4 + 1))
                .collect();
            bank.push(FreeCumulantSequence::new(vals).unwrap());
        }
        bank
    }

    #[test]
    fn construction_rejects_empty_sequences() {
        assert_eq!(
            MomentSequence::<BigRational>::new(SequenceKind::Raw, vec![]),
            Err(TransformError::Empty)
        );
        assert_eq!(
            FreeCumulantSequence::<BigRational>::new(vec![]),
            Err(TransformError::Empty)
        );
    }

    #[test]
    fn kind_tags_render_by_name() {
        assert_eq!(SequenceKind::Transition.to_string(), "transition");
        assert_eq!(SequenceKind::Rayleigh.to_string(), "rayleigh");
        assert_eq!(SequenceKind::Raw.to_string(), "raw");
    }

    #[test]
    fn point_mass_moments_have_single_cumulant() {
        // M_k = a^k collapses to fc = (a, 0, 0, ...): every non-singleton
        // block pattern cancels under the Möbius sum.
        for a in [2i64, -1] {
            let m = rational_moments(
                SequenceKind::Transition,
                &[(a, 1), (a * a, 1), (a * a * a, 1), (a * a * a * a, 1)],
            );
            let fc = moments_to_cumulants(&m).unwrap();
            assert_eq!(
                fc.values(),
                &[ratio(a, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)]
            );
            // δ_a is a fixed point of the correspondence.
            assert_eq!(mk_forward(&m).values(), m.values());
            assert_eq!(mk_inverse(&m).values(), m.values());
        }
    }

    #[test]
    fn single_cumulant_inflates_to_powers() {
        let fc = rational_cumulants(&[(3, 1), (0, 1), (0, 1), (0, 1), (0, 1)]);
        let m = cumulants_to_moments(&fc).unwrap();
        assert_eq!(
            m.values(),
            &[
                ratio(3, 1),
                ratio(9, 1),
                ratio(27, 1),
                ratio(81, 1),
                ratio(243, 1)
            ]
        );
        assert_eq!(m.kind(), SequenceKind::Transition);
        for k in 1..=5 {
            assert_eq!(
                rayleigh_moment_nc_sum(&fc, k).unwrap(),
                ratio(3i64.pow(k as u32), 1)
            );
        }
    }

    #[test]
    fn semicircle_chain_is_exact() {
        // Moments (0,1,0,2,0,5) -> cumulants (0,1,0,0,0,0) -> Rayleigh
        // moments (0,2,0,6,0,20), and back.
        let m = rational_moments(
            SequenceKind::Transition,
            &[(0, 1), (1, 1), (0, 1), (2, 1), (0, 1), (5, 1)],
        );
        let fc = moments_to_cumulants(&m).unwrap();
        assert_eq!(
            fc.values(),
            &[
                ratio(0, 1),
                ratio(1, 1),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1)
            ]
        );
        assert_eq!(cumulants_to_moments(&fc).unwrap().values(), m.values());

        let tau = mk_forward(&m);
        assert_eq!(tau.kind(), SequenceKind::Rayleigh);
        assert_eq!(
            tau.values(),
            &[
                ratio(0, 1),
                ratio(2, 1),
                ratio(0, 1),
                ratio(6, 1),
                ratio(0, 1),
                ratio(20, 1)
            ]
        );
        assert_eq!(mk_inverse(&tau).values(), m.values());

        for (k, want) in [(2usize, 2i64), (4, 6), (6, 20)] {
            assert_eq!(rayleigh_moment_nc_sum(&fc, k).unwrap(), ratio(want, 1));
            assert_eq!(rayleigh_moment_limit(&fc, k, 1).unwrap(), ratio(want, 1));
        }
        assert_eq!(rayleigh_moment_limit(&fc, 2, 2).unwrap(), ratio(4, 1));
    }

    #[test]
    fn zero_sequences_stay_zero() {
        let zeros = rational_moments(SequenceKind::Raw, &[(0, 1); 5]);
        assert!(moments_to_cumulants(&zeros)
            .unwrap()
            .values()
            .iter()
            .all(|v| v == &ratio(0, 1)));
        assert!(mk_forward(&zeros).values().iter().all(|v| v == &ratio(0, 1)));
        assert!(mk_inverse(&zeros).values().iter().all(|v| v == &ratio(0, 1)));
    }

    #[test]
    fn constant_cumulants_give_narayana_moments() {
        // fc_k = c for all k sums to M_k = Σ_r (#partitions with r blocks)·c^r,
        // i.e. Narayana-weighted powers: c, c+c², c+3c²+c³, c+6c²+6c³+c⁴.
        let c = ratio(1, 2);
        let fc = FreeCumulantSequence::new(vec![c.clone(); 4]).unwrap();
        let m = cumulants_to_moments(&fc).unwrap();
        assert_eq!(
            m.values(),
            &[ratio(1, 2), ratio(3, 4), ratio(11, 8), ratio(45, 16)]
        );
    }

    #[test]
    fn multiplicative_extensions_follow_blocks_and_cycles() {
        let m = rational_moments(
            SequenceKind::Raw,
            &[(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 1), (9, 1)],
        );
        let rho: NonCrossingPartition = "{1,7|2,5,6|3|4|8,9}".parse().unwrap();
        // Block sizes 2,3,1,1,2 -> 2·3·1·1·2 = 12.
        assert_eq!(m.product_over_blocks(&rho).unwrap(), ratio(12, 1));
        let sigma = crate::perm::embed_nc(&rho);
        assert_eq!(m.product_over_cycles(&sigma).unwrap(), ratio(12, 1));

        let short = rational_moments(SequenceKind::Raw, &[(1, 1), (2, 1)]);
        assert!(matches!(
            short.product_over_blocks(&rho),
            Err(TransformError::OrderOutOfRange { k: 9, max: 2 })
        ));
    }

    #[test]
    fn lattice_sum_recursion_and_complement_route_agree() {
        for fc in cumulant_bank(6) {
            let tau = mk_forward(&cumulants_to_moments(&fc).unwrap());
            for k in 1..=6 {
                let closed = rayleigh_moment_nc_sum(&fc, k).unwrap();
                assert_eq!(&closed, tau.moment(k), "k={k}");
                assert_eq!(closed, rayleigh_moment_limit(&fc, k, 1).unwrap(), "k={k}");
            }
        }
    }

    #[test]
    fn convolution_identity_matches_block_count_weights() {
        // Σ_ρ (|ρ|−1)·fc_ρ == Σ_{r=1}^{k−1} M_r(τ)·M_{k−r}(𝔪): the same
        // rearrangement that turns the recursion into the lattice sum.
        for fc in cumulant_bank(6) {
            let m = cumulants_to_moments(&fc).unwrap();
            let tau = mk_forward(&m);
            for k in 1..=6usize {
                let mut lhs = BigRational::from_int(0);
                for rho in nc::enumerate_nc(k).unwrap() {
                    let coeff = (rho.num_blocks() - 1) as i64;
                    lhs += fc.product_over_blocks(&rho).unwrap()
                        * BigRational::from_int(coeff);
                }
                let mut rhs = BigRational::from_int(0);
                for r in 1..k {
                    rhs += tau.moment(r) * m.moment(k - r);
                }
                assert_eq!(lhs, rhs, "k={k}");
            }
        }
    }

    #[test]
    fn squared_prediction_factorizes_for_deterministic_cumulants() {
        for fc in cumulant_bank(5) {
            for k in 1..=5 {
                let e1 = rayleigh_moment_limit(&fc, k, 1).unwrap();
                let e2 = rayleigh_moment_limit(&fc, k, 2).unwrap();
                assert_eq!(e2, e1.clone() * e1, "k={k}");
            }
        }
        let fc = rational_cumulants(&[(1, 1), (1, 1)]);
        assert_eq!(
            rayleigh_moment_limit(&fc, 2, 3),
            Err(TransformError::EllOutOfRange { ell: 3 })
        );
    }

    #[test]
    fn empirical_rayleigh_moments_are_power_sums() {
        let m = rayleigh_moments(&[0.0, 1.0], &[0.5], 2).unwrap();
        assert_eq!(m.kind(), SequenceKind::Rayleigh);
        assert_eq!(m.values(), &[0.5, 0.75]);

        // If the smaller spectrum repeats the first N−1 points, everything
        // telescopes to powers of the last one.
        let lam = [-1.5, 0.25, 2.0, 3.0];
        let m = rayleigh_moments(&lam, &lam[..3], 4).unwrap();
        for k in 1..=4usize {
            assert!((m.moment(k) - 3.0f64.powi(k as i32)).abs() < 1e-12);
        }

        assert_eq!(
            rayleigh_moments(&[1.0, 2.0], &[1.0, 2.0], 2),
            Err(TransformError::LengthMismatch { full: 2, sub: 2 })
        );
    }

    #[test]
    fn json_embeds_kind_order_and_scalar_mode() {
        let m = rational_moments(SequenceKind::Transition, &[(1, 2), (-3, 4)]);
        assert_eq!(
            m.to_json(),
            serde_json::json!({
                "kind": "transition",
                "K": 2,
                "scalar_mode": "rational",
                "values": ["1/2", "-3/4"],
            })
        );
        let f = rayleigh_moments(&[0.0, 1.0], &[0.5], 2).unwrap();
        assert_eq!(
            f.to_json(),
            serde_json::json!({
                "kind": "rayleigh",
                "K": 2,
                "scalar_mode": "float",
                "values": [0.5, 0.75],
            })
        );
        let fc = rational_cumulants(&[(0, 1), (1, 1)]);
        assert_eq!(
            fc.to_json(),
            serde_json::json!({ "K": 2, "scalar_mode": "rational", "values": ["0/1", "1/1"] })
        );
    }

    #[test]
    fn lattice_routes_enforce_the_order_cap() {
        let m = MomentSequence::new(
            SequenceKind::Raw,
            (1..=11).map(|p| ratio(p, 1)).collect(),
        )
        .unwrap();
        assert!(matches!(
            moments_to_cumulants(&m),
            Err(TransformError::OrderOutOfRange { k: 11, max: 10 })
        ));
        let fc = rational_cumulants(&[(1, 1), (1, 1)]);
        assert!(matches!(
            rayleigh_moment_nc_sum(&fc, 3),
            Err(TransformError::OrderOutOfRange { k: 3, max: 2 })
        ));
        assert!(rayleigh_moment_nc_sum(&fc, 0).is_err());
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-9i64..=9, 1i64..=9).prop_map(|(p, q)| ratio(p, q))
    }

    proptest! {
        #[test]
        fn moments_and_cumulants_round_trip(vals in prop::collection::vec(small_rational(), 1..=6)) {
            let m = MomentSequence::new(SequenceKind::Transition, vals).unwrap();
            let fc = moments_to_cumulants(&m).unwrap();
            let back = cumulants_to_moments(&fc).unwrap();
            prop_assert_eq!(back.values(), m.values());
        }

        #[test]
        fn correspondence_round_trips_both_ways(vals in prop::collection::vec(small_rational(), 1..=8)) {
            let m = MomentSequence::new(SequenceKind::Transition, vals).unwrap();
            let there_and_back = mk_inverse(&mk_forward(&m));
            prop_assert_eq!(there_and_back.values(), m.values());
            let reversed = mk_forward(&mk_inverse(&m));
            prop_assert_eq!(reversed.values(), m.values());
        }

        #[test]
        fn transforms_are_lower_triangular(vals in prop::collection::vec(small_rational(), 2..=6)) {
            // An order-(K−1) prefix transforms to the prefix of the
            // order-K transform: nothing flows downward from higher k.
            let m = MomentSequence::new(SequenceKind::Transition, vals.clone()).unwrap();
            let prefix = MomentSequence::new(SequenceKind::Transition, vals[..vals.len() - 1].to_vec()).unwrap();
            let full_tau = mk_forward(&m);
            let pre_tau = mk_forward(&prefix);
            prop_assert_eq!(pre_tau.values(), &full_tau.values()[..vals.len() - 1]);
            let full_fc = moments_to_cumulants(&m).unwrap();
            let pre_fc = moments_to_cumulants(&prefix).unwrap();
            prop_assert_eq!(pre_fc.values(), &full_fc.values()[..vals.len() - 1]);
        }
    }
}
