//! Permutations of `{1, …, k}`, their cycle structure, and Cayley-graph
//! geodesics with respect to full cycles.
//!
//! Distance on the Cayley graph generated by all transpositions is
//! `|σ| = k − #(σ)`, where `#` counts cycles (fixed points included). The
//! permutations lying on a geodesic from the identity to the full cycle
//! `γ_k = (1, 2, …, k)` are exactly the images of non-crossing partitions
//! under [`embed_nc`], which sends a block `{i₁ < … < i_p}` to the cycle
//! `(i₁, …, i_p)`. That embedding, the induced complement
//! `𝒫_ρ⁻¹ γ_k = 𝒫_{K(ρ)}`, and the two-cycle variant on `S_{2k}` are all
//! exposed here; the partition-side routines in [`crate::nc`] never call into
//! this module, so the two can be compared as independent computations.

use std::fmt;

use thiserror::Error;

use crate::nc::{self, NonCrossingPartition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("images do not form a bijection of 1..={k}: {reason}")]
    NotABijection { k: usize, reason: String },
    #[error("permutations act on different ground sets ({0} vs {1})")]
    GroundSetMismatch(usize, usize),
    #[error("ground set size {k} out of range (supported: 1..={max})")]
    SizeOutOfRange { k: usize, max: usize },
}

/// A permutation of `{1, …, k}` stored as its image array
/// (`images[i-1] = σ(i)`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Self {
            images: (1..=k).collect(),
        }
    }

    /// The full cycle `γ_k = (1, 2, …, k)`.
    pub fn full_cycle(k: usize) -> Self {
        Self {
            images: (1..=k).map(|i| i % k + 1).collect(),
        }
    }

    /// Validates that `images` is a bijection of `1..=k` (with `k` the array
    /// length).
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let k = images.len();
        let mut seen = vec![false; k + 1];
        for &y in &images {
            if y == 0 || y > k {
                return Err(PermError::NotABijection {
                    k,
                    reason: format!("image {y} outside 1..={k}"),
                });
            }
            if seen[y] {
                return Err(PermError::NotABijection {
                    k,
                    reason: format!("image {y} repeated"),
                });
            }
            seen[y] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation of `1..=k` from disjoint cycles; points not
    /// mentioned are fixed.
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (1..=k).collect();
        let mut moved = vec![false; k + 1];
        for cyc in cycles {
            for (t, &x) in cyc.iter().enumerate() {
                if x == 0 || x > k {
                    return Err(PermError::NotABijection {
                        k,
                        reason: format!("point {x} outside 1..={k}"),
                    });
                }
                if moved[x] {
                    return Err(PermError::NotABijection {
                        k,
                        reason: format!("point {x} in two cycles"),
                    });
                }
                moved[x] = true;
                images[x - 1] = cyc[(t + 1) % cyc.len()];
            }
        }
        Ok(Self { images })
    }

    pub fn k(&self) -> usize {
        self.images.len()
    }

    /// `σ(x)` for `x ∈ 1..=k`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Function composition `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self, PermError> {
        if self.k() != other.k() {
            return Err(PermError::GroundSetMismatch(self.k(), other.k()));
        }
        Ok(Self {
            images: other.images.iter().map(|&y| self.images[y - 1]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.k()];
        for (i, &y) in self.images.iter().enumerate() {
            images[y - 1] = i + 1;
        }
        Self { images }
    }

    /// Cycles (fixed points included), each starting at its smallest point,
    /// ordered by smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut seen = vec![false; k + 1];
        let mut out = Vec::new();
        for start in 1..=k {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            out.push(cyc);
        }
        out
    }

    /// Number of cycles `#(σ)`, fixed points included.
    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Cayley-graph distance from the identity in the transposition
    /// generators: `|σ| = k − #(σ)`.
    pub fn length(&self) -> usize {
        self.k() - self.cycle_count()
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::new(self.cycles().iter().map(Vec::len).collect())
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation, e.g. `(1,7)(2,5,6)(3)(4)(8,9)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cyc in self.cycles() {
            let pts: Vec<String> = cyc.iter().map(usize::to_string).collect();
            write!(f, "({})", pts.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A conjugacy class of `S_k`: cycle lengths in weakly decreasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType(Vec<usize>);

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Self {
        assert!(parts.iter().all(|&p| p >= 1), "cycle lengths must be ≥ 1");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Size of the ground set: the sum of the parts.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl fmt::Debug for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Largest `n` for which [`all_permutations`] will enumerate `S_n`
/// (`8! = 40 320`).
pub const MAX_ENUM_PERM: usize = 8;

/// All of `S_n` in lexicographic order of image arrays.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>, PermError> {
    if n == 0 || n > MAX_ENUM_PERM {
        return Err(PermError::SizeOutOfRange {
            k: n,
            max: MAX_ENUM_PERM,
        });
    }
    fn rec(images: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Permutation>) {
        if images.len() == n {
            out.push(Permutation {
                images: images.clone(),
            });
            return;
        }
        for y in 1..=n {
            if !used[y] {
                used[y] = true;
                images.push(y);
                rec(images, used, n, out);
                images.pop();
                used[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n + 1], n, &mut out);
    Ok(out)
}

/// The permutation `𝒫_ρ` associated with a non-crossing partition: each block
/// `{i₁ < … < i_p}` becomes the cycle `(i₁, …, i_p)`.
pub fn embed_nc(rho: &NonCrossingPartition) -> Permutation {
    let mut images: Vec<usize> = (1..=rho.k()).collect();
    for block in rho.blocks() {
        for (t, &x) in block.iter().enumerate() {
            images[x - 1] = block[(t + 1) % block.len()];
        }
    }
    Permutation { images }
}

/// Whether `σ` lies on a geodesic from the identity to `target`:
/// `|σ| + |σ⁻¹ target| = |target|`.
pub fn is_geodesic(sigma: &Permutation, target: &Permutation) -> Result<bool, PermError> {
    let rest = sigma.inverse().compose(target)?;
    Ok(sigma.length() + rest.length() == target.length())
}

/// The Kreweras complement computed entirely on the group side:
/// the cycles of `𝒫_ρ⁻¹ γ_k` read as blocks. Independent of
/// [`NonCrossingPartition::kreweras`], which works on the planar diagram;
/// the two must agree.
pub fn complement_via_group(rho: &NonCrossingPartition) -> Result<NonCrossingPartition, nc::NcError> {
    let k = rho.k();
    let sigma = embed_nc(rho)
        .inverse()
        .compose(&Permutation::full_cycle(k))
        .expect("same ground set");
    NonCrossingPartition::new(k, sigma.cycles())
}

/// The product of two disjoint full cycles `(1,…,k)(k+1,…,2k)` in `S_{2k}`.
pub fn two_full_cycles(k: usize) -> Permutation {
    let images = (1..=2 * k)
        .map(|i| {
            if i == k {
                1
            } else if i == 2 * k {
                k + 1
            } else {
                i + 1
            }
        })
        .collect();
    Permutation { images }
}

/// Largest `k` for which [`geodesic_pairs_two_cycle`] materializes its
/// result (the pair count grows like the square of the interval count of
/// `NC(k)`).
pub const MAX_TWO_CYCLE_K: usize = 5;

/// All pairs `(σ, π)` in `S_{2k}` with
/// `|σ| + |σ⁻¹π| + |π⁻¹ γ⁽¹⁾γ⁽²⁾| = 2k − 2`, i.e. `σ ≤ π` on a geodesic to
/// the product of two disjoint full cycles. For `2k ≤ 8` this is found by
/// exhaustive iteration over `S_{2k}`; for larger `k` the pairs are generated
/// from `NC(k) × NC(k)` images (the two routes agree — see the tests). The
/// result is sorted by image arrays.
pub fn geodesic_pairs_two_cycle(
    k: usize,
) -> Result<Vec<(Permutation, Permutation)>, PermError> {
    if k == 0 || k > MAX_TWO_CYCLE_K {
        return Err(PermError::SizeOutOfRange {
            k,
            max: MAX_TWO_CYCLE_K,
        });
    }
    let target = two_full_cycles(k);
    let tlen = target.length(); // 2k − 2
    let mut pairs = if 2 * k <= MAX_ENUM_PERM {
        let on_geodesic: Vec<Permutation> = all_permutations(2 * k)?
            .into_iter()
            .filter(|s| is_geodesic(s, &target).unwrap())
            .collect();
        let mut pairs = Vec::new();
        for sigma in &on_geodesic {
            for pi in &on_geodesic {
                let mid = sigma.inverse().compose(pi).unwrap();
                let rest = pi.inverse().compose(&target).unwrap();
                if sigma.length() + mid.length() + rest.length() == tlen {
                    pairs.push((sigma.clone(), pi.clone()));
                }
            }
        }
        pairs
    } else {
        nc_image_pairs(k)
    };
    pairs.sort_unstable();
    Ok(pairs)
}

/// Geodesic pairs generated from the `NC(k) × NC(k)` image: `π` ranges over
/// embeddings of pairs `(ρ₁, ρ₂)` and `σ` over embeddings of componentwise
/// refinements.
fn nc_image_pairs(k: usize) -> Vec<(Permutation, Permutation)> {
    let all = nc::enumerate_nc(k).expect("k within enumeration range");
    // (embedded image on 1..=k, embedded images of all refinements)
    let sides: Vec<(Permutation, Vec<Permutation>)> = all
        .iter()
        .map(|rho| {
            let below: Vec<Permutation> = all
                .iter()
                .filter(|nu| nu.leq(rho).unwrap())
                .map(embed_nc)
                .collect();
            (embed_nc(rho), below)
        })
        .collect();
    let mut pairs = Vec::new();
    for (rho1, below1) in &sides {
        for (rho2, below2) in &sides {
            let pi = block_diag(rho1, rho2);
            for nu1 in below1 {
                for nu2 in below2 {
                    pairs.push((block_diag(nu1, nu2), pi.clone()));
                }
            }
        }
    }
    pairs
}

/// The permutation acting as `a` on `1..=k` and as `b` shifted to
/// `k+1..=k+m`.
fn block_diag(a: &Permutation, b: &Permutation) -> Permutation {
    let k = a.k();
    let mut images: Vec<usize> = a.images.clone();
    images.extend(b.images.iter().map(|&y| y + k));
    Permutation { images }
}
