//! Exact Weingarten calculus for the unitary group `U(N)`.
//!
//! The Weingarten function `Wg(σ, N)` is the inverse, in the group algebra of
//! `S_k`, of the Gram matrix `G(σ, π) = N^{#(σ⁻¹π)}`. It is characterized by
//!
//! ```text
//!     Σ_{π ∈ S_k} N^{#(σ⁻¹π)} · Wg(π, N) = [σ = identity]   for all σ ∈ S_k,
//! ```
//!
//! and is constant on conjugacy classes. [`build_table`] solves this system
//! exactly over big rationals, with one unknown and one equation per cycle
//! type. Mixed moments of products `A_i U B_i U*` over Haar-distributed `U`
//! are then finite sums of trace products weighted by Weingarten values
//! ([`haar_mixed_moment`]), and the large-`N` behaviour of `Wg` is governed
//! by signed Catalan products ([`mu_asymptotic`]).

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::nc::catalan;
use crate::perm::{all_permutations, CycleType, PermError, Permutation};
use crate::scalar::Scalar;

/// Cap on `k` for table construction (`S_8` iteration).
pub const MAX_WG_K: usize = 8;

/// Cap on `k` for the mixed-moment double sum over `S_k × S_k`.
pub const MAX_MIXED_K: usize = 6;

#[derive(Debug, Error)]
pub enum WgError {
    #[error("k = {k} out of range (supported: 1..={max})")]
    KOutOfRange { k: usize, max: usize },
    #[error("dimension N = {n} must be at least k = {k}")]
    DimensionTooSmall { n: u64, k: usize },
    #[error("defining system is singular at k = {k}, N = {n}")]
    Singular { k: usize, n: u64 },
    #[error("expected {want} matrices of size {n}×{n}, got {got}")]
    MatrixShape { want: usize, n: usize, got: String },
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Exact Weingarten values for fixed `k` and `N`, one per cycle type.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    k: usize,
    n: u64,
    entries: BTreeMap<CycleType, BigRational>,
}

impl WeingartenTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Entries in deterministic (lexicographic descending-parts) order.
    pub fn entries(&self) -> impl Iterator<Item = (&CycleType, &BigRational)> {
        self.entries.iter()
    }

    pub fn value(&self, t: &CycleType) -> Option<&BigRational> {
        self.entries.get(t)
    }

    pub fn value_of(&self, sigma: &Permutation) -> Option<&BigRational> {
        self.value(&sigma.cycle_type())
    }

    /// Serialization used by the CLI: numerator and denominator as decimal
    /// strings, since the values overflow machine integers quickly.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(t, v)| {
                serde_json::json!({
                    "cycle_type": t.parts(),
                    "numerator": v.numer().to_string(),
                    "denominator": v.denom().to_string(),
                })
            })
            .collect();
        serde_json::json!({ "k": self.k, "N": self.n, "entries": entries })
    }
}

/// Solves the defining system exactly for all of `S_k` at dimension `N`.
///
/// The system is reduced by conjugacy: for one representative `σ_t` per cycle
/// type the coefficient of the unknown `Wg(u)` is
/// `Σ_{π: type(π) = u} N^{#(σ_t⁻¹π)}`, giving a square rational system of
/// size "number of partitions of k". Requires `N ≥ k`, which keeps the Gram
/// matrix invertible.
pub fn build_table(k: usize, n: u64) -> Result<WeingartenTable, WgError> {
    if k == 0 || k > MAX_WG_K {
        return Err(WgError::KOutOfRange { k, max: MAX_WG_K });
    }
    if n < k as u64 {
        return Err(WgError::DimensionTooSmall { n, k });
    }
    let perms = all_permutations(k)?;
    let mut reps: BTreeMap<CycleType, Permutation> = BTreeMap::new();
    for p in &perms {
        reps.entry(p.cycle_type()).or_insert_with(|| p.clone());
    }
    let types: Vec<CycleType> = reps.keys().cloned().collect();
    let index: HashMap<&CycleType, usize> = types.iter().zip(0..).collect();
    let m = types.len();

    // powers of N up to N^k
    let pow: Vec<BigRational> = (0..=k)
        .map(|c| BigRational::from_integer(BigInt::from(n).pow(c as u32)))
        .collect();

    let mut coeffs = vec![vec![BigRational::zero(); m]; m];
    for (row, t) in types.iter().enumerate() {
        let rep_inv = reps[t].inverse();
        for pi in &perms {
            let col = index[&pi.cycle_type()];
            let c = rep_inv.compose(pi)?.cycle_count();
            coeffs[row][col] += &pow[c];
        }
    }
    let identity_type = CycleType::new(vec![1; k]);
    let rhs: Vec<BigRational> = types
        .iter()
        .map(|t| {
            if *t == identity_type {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect();

    let solution = solve_rational(coeffs, rhs).ok_or(WgError::Singular { k, n })?;
    Ok(WeingartenTable {
        k,
        n,
        entries: types.into_iter().zip(solution).collect(),
    })
}

/// Exact Gaussian elimination over the rationals.
fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        b[col] *= &inv;
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..m {
                    let sub = &factor * &a[col][c];
                    a[r][c] -= sub;
                }
                let sub = &factor * &b[col];
                b[r] -= sub;
            }
        }
    }
    Some(b)
}

/// Checks every equation of the (unreduced) defining system against a table:
/// `Σ_{π ∈ S_k} N^{#(σ⁻¹π)} Wg(type(π)) = [σ = e]` for *all* `σ`, not just
/// class representatives. Quadratic in `k!`, so intended for `k ≤ 5`.
pub fn verify_defining_system(table: &WeingartenTable) -> Result<bool, WgError> {
    let k = table.k;
    let perms = all_permutations(k)?;
    let pow: Vec<BigRational> = (0..=k)
        .map(|c| BigRational::from_integer(BigInt::from(table.n).pow(c as u32)))
        .collect();
    for sigma in &perms {
        let sigma_inv = sigma.inverse();
        let mut total = BigRational::zero();
        for pi in &perms {
            let c = sigma_inv.compose(pi)?.cycle_count();
            total += &pow[c] * table.value_of(pi).expect("table covers S_k");
        }
        let expect = if sigma.length() == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
        if total != expect {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Leading coefficient of `Wg` at large `N`: for a permutation with cycle
/// lengths `c_j`,
///
/// ```text
///     N^{k + |σ|} · Wg(σ, N)  =  Π_j (−1)^{c_j − 1} C_{c_j − 1}  +  O(1/N²).
/// ```
pub fn mu_asymptotic(t: &CycleType) -> i64 {
    t.parts()
        .iter()
        .map(|&c| {
            let sign = if (c - 1) % 2 == 0 { 1 } else { -1 };
            sign * catalan(c - 1) as i64
        })
        .product()
}

/// The exact deviation `N^{k+|σ|} · Wg(σ, N) − μ(σ)` of a table entry from
/// its limit. Shrinks like `1/N²`.
pub fn asymptotic_error(table: &WeingartenTable, t: &CycleType) -> BigRational {
    let k = table.k;
    let length = k - t.parts().len();
    let scale = BigRational::from_integer(BigInt::from(table.n).pow((k + length) as u32));
    let wg = table.value(t).expect("cycle type of degree k");
    scale * wg - BigRational::from_integer(BigInt::from(mu_asymptotic(t)))
}

/// Dense square matrix over an exact or float scalar, just big enough for
/// trace-product bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct SqMatrix<T> {
    n: usize,
    data: Vec<T>, // row-major
}

impl<T: Scalar> SqMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(vec![T::one(); n])
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let n = diag.len();
        let mut data = vec![T::zero(); n * n];
        for (i, d) in diag.into_iter().enumerate() {
            data[i * n + i] = d;
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if *a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] =
                        data[i * n + j].clone() + a.clone() * other.get(l, j).clone();
                }
            }
        }
        Self { n, data }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }
}

/// `Tr_σ[A_1, …, A_k] = Π_{cycles (i₁,…,i_p)} Tr(A_{i₁} A_{i₂} ⋯ A_{i_p})`,
/// each cycle read from its smallest element in the order of `σ`.
pub fn trace_product<T: Scalar>(
    sigma: &Permutation,
    mats: &[SqMatrix<T>],
) -> Result<T, WgError> {
    let k = sigma.k();
    shape_check(mats, k)?;
    let mut result = T::one();
    for cyc in sigma.cycles() {
        let mut prod = mats[cyc[0] - 1].clone();
        for &i in &cyc[1..] {
            prod = prod.mul(&mats[i - 1]);
        }
        result = result * prod.trace();
    }
    Ok(result)
}

fn shape_check<T: Scalar>(mats: &[SqMatrix<T>], want: usize) -> Result<usize, WgError> {
    let shapes: Vec<usize> = mats.iter().map(SqMatrix::n).collect();
    if mats.len() != want || shapes.windows(2).any(|w| w[0] != w[1]) {
        return Err(WgError::MatrixShape {
            want,
            n: shapes.first().copied().unwrap_or(0),
            got: format!("{} matrices of sizes {shapes:?}", mats.len()),
        });
    }
    Ok(shapes[0])
}

/// Exact Haar average `E Tr[(A₁ U B₁ U*)(A₂ U B₂ U*) ⋯ (A_k U B_k U*)]` for
/// `U` Haar-distributed on `U(N)`:
///
/// ```text
///     Σ_{σ, π ∈ S_k} Tr_σ[A] · Tr_π[B] · Wg(type(π⁻¹σ⁻¹γ_k), N).
/// ```
///
/// `N` is the common matrix dimension; requires `k ≤ 6` and `N ≥ k`.
pub fn haar_mixed_moment<T: Scalar>(
    a: &[SqMatrix<T>],
    b: &[SqMatrix<T>],
) -> Result<T, WgError> {
    let k = a.len();
    if k == 0 || k > MAX_MIXED_K {
        return Err(WgError::KOutOfRange { k, max: MAX_MIXED_K });
    }
    let n = shape_check(a, k)?;
    shape_check(b, k)?;
    if b[0].n() != n {
        return Err(WgError::MatrixShape {
            want: k,
            n,
            got: format!("B matrices of size {}", b[0].n()),
        });
    }
    let table = build_table(k, n as u64)?;
    let gamma = Permutation::full_cycle(k);
    let perms = all_permutations(k)?;
    let tr_a: Vec<T> = perms
        .iter()
        .map(|s| trace_product(s, a))
        .collect::<Result<_, _>>()?;
    let tr_b: Vec<T> = perms
        .iter()
        .map(|s| trace_product(s, b))
        .collect::<Result<_, _>>()?;
    let mut total = T::zero();
    for (si, sigma) in perms.iter().enumerate() {
        let sigma_inv_gamma = sigma.inverse().compose(&gamma)?;
        for (pi_i, pi) in perms.iter().enumerate() {
            let arg = pi.inverse().compose(&sigma_inv_gamma)?;
            let wg = table.value_of(&arg).expect("degree-k cycle type");
            total = total + tr_a[si].clone() * tr_b[pi_i].clone() * T::from_rational(wg);
        }
    }
    Ok(total)
}
