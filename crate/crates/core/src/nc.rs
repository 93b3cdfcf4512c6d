//! The lattice of non-crossing partitions of `{1, …, k}`.
//!
//! A partition is *non-crossing* when no two blocks interleave: there are no
//! points `a < c < b < d` with `a, b` in one block and `c, d` in another.
//! Under refinement these partitions form a lattice `NC(k)` counted by the
//! Catalan numbers. This module provides:
//!
//! * validated construction, parsing and printing in canonical block form;
//! * full enumeration of `NC(k)` in a documented deterministic order;
//! * the Kreweras complement, computed from the planar diagram (the bars
//!   `1̄, …, k̄` interleaved with the solid points are grouped by the face of
//!   the diagram they fall in) — deliberately *not* via the symmetric-group
//!   embedding, so the two routes can cross-check each other;
//! * insertion of a partition at a Kreweras point and the inverse operation,
//!   enumeration of all Kreweras decompositions;
//! * the Möbius function of intervals, computed by a recursive sieve with
//!   memoization per interval factor (no closed-form shortcut).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Largest ground set for which full enumeration of `NC(k)` is supported
/// (`C_12 = 208 012` partitions).
pub const MAX_ENUM_K: usize = 12;

/// Largest ground set for which the Möbius sieve is supported. The sieve
/// scans coarsening pairs, which is quadratic in `C_k`; `k = 10` builds its
/// table in seconds, `k = 12` would not.
pub const MAX_MOBIUS_K: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NcError {
    #[error("ground set size {k} out of range (supported: 1..={max})")]
    SizeOutOfRange { k: usize, max: usize },
    #[error("not a partition of 1..={k}: {reason}")]
    Malformed { k: usize, reason: String },
    #[error("blocks {0} and {1} cross")]
    Crossing(String, String),
    #[error("partitions live on different ground sets ({0} vs {1})")]
    GroundSetMismatch(usize, usize),
    #[error("{nu} is not a refinement of {rho}")]
    NotComparable { nu: String, rho: String },
    #[error("{p} is not a Kreweras point of {outer}")]
    NotAKrewerasPoint { p: usize, outer: String },
    #[error("cannot parse partition: {0}")]
    Parse(String),
}

/// A non-crossing partition of `{1, …, k}` in canonical form: every block is
/// stored in increasing order and blocks are ordered by their minima.
///
/// The derived `Ord` therefore orders partitions lexicographically on the
/// canonical block form, which is the order used by [`enumerate_nc`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonCrossingPartition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl NonCrossingPartition {
    /// Builds and validates a partition from arbitrary block order.
    pub fn new(k: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self, NcError> {
        if k == 0 {
            return Err(NcError::SizeOutOfRange { k, max: usize::MAX });
        }
        for b in &mut blocks {
            if b.is_empty() {
                return Err(NcError::Malformed {
                    k,
                    reason: "empty block".into(),
                });
            }
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut seen = vec![false; k + 1];
        for b in &blocks {
            for &x in b {
                if x == 0 || x > k {
                    return Err(NcError::Malformed {
                        k,
                        reason: format!("point {x} outside 1..={k}"),
                    });
                }
                if seen[x] {
                    return Err(NcError::Malformed {
                        k,
                        reason: format!("point {x} appears twice"),
                    });
                }
                seen[x] = true;
            }
        }
        if let Some(x) = (1..=k).find(|&x| !seen[x]) {
            return Err(NcError::Malformed {
                k,
                reason: format!("point {x} is not covered"),
            });
        }
        let part = Self { k, blocks };
        if let Some((a, b)) = part.find_crossing() {
            return Err(NcError::Crossing(
                format_block(&part.blocks[a]),
                format_block(&part.blocks[b]),
            ));
        }
        Ok(part)
    }

    /// Internal constructor for blocks already known to form a non-crossing
    /// partition (ascending within blocks; any block order).
    fn from_valid_blocks(k: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        blocks.sort_by_key(|b| b[0]);
        let part = Self { k, blocks };
        debug_assert!(part.find_crossing().is_none(), "blocks cross: {part}");
        debug_assert_eq!(part.blocks.iter().map(Vec::len).sum::<usize>(), k);
        part
    }

    /// The discrete partition `{{1}, …, {k}}`.
    pub fn singletons(k: usize) -> Self {
        Self::from_valid_blocks(k, (1..=k).map(|x| vec![x]).collect())
    }

    /// The one-block partition `{{1, …, k}}`.
    pub fn full(k: usize) -> Self {
        Self::from_valid_blocks(k, vec![(1..=k).collect()])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Blocks in canonical order.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks, usually written `|ρ|`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }

    /// Block index of every point; entry `i` is the block containing `i + 1`.
    pub fn block_ids(&self) -> Vec<u32> {
        let mut ids = vec![0u32; self.k];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &x in b {
                ids[x - 1] = bi as u32;
            }
        }
        ids
    }

    /// Detects a crossing with a single left-to-right sweep: when a block is
    /// revisited, every block opened since its previous point must already be
    /// finished, i.e. the revisited block must sit on top of the stack.
    fn find_crossing(&self) -> Option<(usize, usize)> {
        let ids = self.block_ids();
        let mut last = vec![0usize; self.blocks.len()]; // rightmost point per block
        for b in 0..self.blocks.len() {
            last[b] = *self.blocks[b].last().unwrap();
        }
        let mut stack: Vec<u32> = Vec::new();
        let mut open = vec![false; self.blocks.len()];
        for x in 1..=self.k {
            let b = ids[x - 1];
            if !open[b as usize] {
                open[b as usize] = true;
                stack.push(b);
            } else if *stack.last().unwrap() != b {
                return Some((*stack.last().unwrap() as usize, b as usize));
            }
            if last[b as usize] == x {
                stack.pop();
            }
        }
        None
    }

    /// Refinement order: `self ≤ coarser` iff every block of `self` is
    /// contained in a block of `coarser`.
    pub fn leq(&self, coarser: &Self) -> Result<bool, NcError> {
        if self.k != coarser.k {
            return Err(NcError::GroundSetMismatch(self.k, coarser.k));
        }
        let fine = self.block_ids();
        let coarse = coarser.block_ids();
        let mut map = vec![u32::MAX; self.num_blocks()];
        Ok(refines(&fine, &coarse, &mut map))
    }

    /// The Kreweras complement, read off the planar diagram.
    ///
    /// Interleave bars with the solid points as `1, 1̄, 2, 2̄, …, k, k̄` and draw
    /// each block as a hump over its points. Two bars belong to the same
    /// complement block exactly when they lie in the same face of the diagram.
    /// The face of bar `ī` is determined by the innermost block whose span
    /// strictly contains the bar together with the gap between consecutive
    /// block elements the bar falls in; bars outside every span share the
    /// outer face.
    pub fn kreweras(&self) -> Self {
        // face key: (enclosing block index or usize::MAX for the outer face,
        // index of the gap within that block)
        let mut faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for bar in 1..=self.k {
            let mut key = (usize::MAX, 0);
            let mut innermost_min = 0;
            for (bi, block) in self.blocks.iter().enumerate() {
                let (min, max) = (block[0], *block.last().unwrap());
                if min <= bar && bar < max && min > innermost_min {
                    innermost_min = min;
                    let gap = block.partition_point(|&x| x <= bar) - 1;
                    key = (bi, gap);
                }
            }
            faces.entry(key).or_default().push(bar);
        }
        Self::from_valid_blocks(self.k, faces.into_values().collect())
    }

    /// The largest point of each block of the Kreweras complement, sorted
    /// ascending. These are the admissible positions for [`Self::insert_at`].
    pub fn kreweras_points(&self) -> Vec<usize> {
        let mut pts: Vec<usize> = self
            .kreweras()
            .blocks
            .iter()
            .map(|b| *b.last().unwrap())
            .collect();
        pts.sort_unstable();
        pts
    }

    /// Splices `inner` into `outer` directly after point `p`, which must be a
    /// Kreweras point of `outer`. Points of `outer` above `p` are shifted up
    /// by `inner.k()`; `inner` occupies `p+1 ..= p+inner.k()`.
    pub fn insert_at(outer: &Self, p: usize, inner: &Self) -> Result<Self, NcError> {
        if p == 0 || p > outer.k || !outer.kreweras_points().contains(&p) {
            return Err(NcError::NotAKrewerasPoint {
                p,
                outer: outer.to_string(),
            });
        }
        let m = inner.k;
        let mut blocks: Vec<Vec<usize>> = outer
            .blocks
            .iter()
            .map(|b| b.iter().map(|&x| if x > p { x + m } else { x }).collect())
            .collect();
        blocks.extend(
            inner
                .blocks
                .iter()
                .map(|b| b.iter().map(|&x| x + p).collect::<Vec<_>>()),
        );
        // Insertion at a Kreweras point cannot create a crossing: the inner
        // partition occupies a contiguous stretch, and the face structure of
        // `outer` is undisturbed.
        Ok(Self::from_valid_blocks(outer.k + m, blocks))
    }

    /// All ways to write this partition as an outer part with an inner part
    /// inserted at one of the outer part's Kreweras points. Candidates are
    /// scanned by support interval `[i..=j]`, in increasing `(i, j)` order;
    /// a partition with `b` blocks always has exactly `b - 1` decompositions.
    pub fn kreweras_decompositions(&self) -> Vec<KrewerasDecomposition> {
        let k = self.k;
        let mut out = Vec::new();
        for i in 2..=k {
            'interval: for j in i..=k {
                if j - i + 1 == k {
                    break;
                }
                let mut inner_blocks: Vec<Vec<usize>> = Vec::new();
                let mut outer_blocks: Vec<Vec<usize>> = Vec::new();
                for b in &self.blocks {
                    let inside = b.iter().filter(|&&x| i <= x && x <= j).count();
                    if inside == b.len() {
                        inner_blocks.push(b.iter().map(|&x| x - (i - 1)).collect());
                    } else if inside == 0 {
                        let m = j - i + 1;
                        outer_blocks
                            .push(b.iter().map(|&x| if x > j { x - m } else { x }).collect());
                    } else {
                        continue 'interval; // a block straddles the interval
                    }
                }
                let outer = Self::from_valid_blocks(k - (j - i + 1), outer_blocks);
                let p = i - 1;
                if outer.kreweras_points().contains(&p) {
                    let inner = Self::from_valid_blocks(j - i + 1, inner_blocks);
                    out.push(KrewerasDecomposition {
                        outer,
                        inner,
                        insertion_point: p,
                    });
                }
            }
        }
        out
    }
}

/// One way of writing a partition `ρ` as `insert_at(outer, p, inner)`.
///
/// Both parts are relabelled to their own ground sets `1..=r` and `1..=m`;
/// in the original labels the inner part occupied
/// `insertion_point + 1 ..= insertion_point + inner.k()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KrewerasDecomposition {
    pub outer: NonCrossingPartition,
    pub inner: NonCrossingPartition,
    pub insertion_point: usize,
}

impl KrewerasDecomposition {
    /// Reassembles the partition this decomposition came from.
    pub fn reassemble(&self) -> Result<NonCrossingPartition, NcError> {
        NonCrossingPartition::insert_at(&self.outer, self.insertion_point, &self.inner)
    }
}

/// `fine ≤ coarse` as block-id arrays. `map` must have one slot per fine
/// block and is reset here.
fn refines(fine: &[u32], coarse: &[u32], map: &mut [u32]) -> bool {
    map.fill(u32::MAX);
    for (f, c) in fine.iter().zip(coarse) {
        let slot = &mut map[*f as usize];
        if *slot == u32::MAX {
            *slot = *c;
        } else if *slot != *c {
            return false;
        }
    }
    true
}

fn format_block(b: &[usize]) -> String {
    let strs: Vec<String> = b.iter().map(usize::to_string).collect();
    strs.join(",")
}

impl fmt::Display for NonCrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.blocks.iter().map(|b| format_block(b)).collect();
        write!(f, "{{{}}}", blocks.join("|"))
    }
}

impl fmt::Debug for NonCrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for NonCrossingPartition {
    type Err = NcError;

    /// Parses the canonical rendering, e.g. `{1,7|2,5,6|3|4|8,9}`. Blocks may
    /// be given in any order; the result is canonicalized and validated.
    fn from_str(s: &str) -> Result<Self, NcError> {
        let s = s.trim();
        let body = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| NcError::Parse(format!("expected {{…}}, got {s:?}")))?;
        let mut blocks = Vec::new();
        let mut count = 0usize;
        for chunk in body.split('|') {
            let mut block = Vec::new();
            for tok in chunk.split(',') {
                let x: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| NcError::Parse(format!("bad point {tok:?}")))?;
                block.push(x);
                count += 1;
            }
            blocks.push(block);
        }
        NonCrossingPartition::new(count, blocks)
    }
}

/// The `n`-th Catalan number, exact (`n ≤ 33` fits in `u64`).
pub fn catalan(n: usize) -> u64 {
    assert!(n <= 33, "catalan({n}) overflows u64");
    let mut c = vec![0u64; n + 1];
    c[0] = 1;
    for m in 1..=n {
        for i in 0..m {
            c[m] += c[i] * c[m - 1 - i];
        }
    }
    c[n]
}

/// Every non-crossing partition of `{1, …, k}`, sorted lexicographically on
/// the canonical block form (so `{1|2|…|k}` comes first and the result is
/// reproducible across runs). Length is the Catalan number `C_k`.
pub fn enumerate_nc(k: usize) -> Result<Vec<NonCrossingPartition>, NcError> {
    Ok(level(k)?.list.clone())
}

/// Cached per-`k` enumeration shared by the Möbius sieve and the transform
/// layer. The lists are retained for the life of the process.
pub(crate) struct LevelData {
    pub list: Vec<NonCrossingPartition>,
    pub index: HashMap<NonCrossingPartition, usize>,
}

static LEVELS: OnceLock<Mutex<HashMap<usize, Arc<LevelData>>>> = OnceLock::new();

pub(crate) fn level(k: usize) -> Result<Arc<LevelData>, NcError> {
    if k == 0 || k > MAX_ENUM_K {
        return Err(NcError::SizeOutOfRange { k, max: MAX_ENUM_K });
    }
    let levels = LEVELS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(data) = levels.lock().unwrap().get(&k) {
        return Ok(data.clone());
    }
    let mut list = enumerate_raw(k);
    list.sort_unstable();
    let index = list
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let data = Arc::new(LevelData { list, index });
    levels.lock().unwrap().insert(k, data.clone());
    Ok(data)
}

/// Depth-first generation. At each point we either open a new block or join
/// one of the currently open blocks; joining a non-top block closes every
/// block above it for good (extending a closed block would cross). Every
/// non-crossing partition arises from exactly one choice sequence.
fn enumerate_raw(k: usize) -> Vec<NonCrossingPartition> {
    fn rec(
        x: usize,
        k: usize,
        blocks: &mut Vec<Vec<usize>>,
        stack: &mut Vec<usize>,
        out: &mut Vec<NonCrossingPartition>,
    ) {
        if x > k {
            // blocks are created in order of their minima and kept ascending
            out.push(NonCrossingPartition {
                k,
                blocks: blocks.clone(),
            });
            return;
        }
        // open a new block
        blocks.push(vec![x]);
        stack.push(blocks.len() - 1);
        rec(x + 1, k, blocks, stack, out);
        stack.pop();
        blocks.pop();
        // join an open block, closing everything stacked above it
        for pos in (0..stack.len()).rev() {
            let tail: Vec<usize> = stack.drain(pos + 1..).collect();
            blocks[stack[pos]].push(x);
            rec(x + 1, k, blocks, stack, out);
            blocks[stack[pos]].pop();
            stack.extend(tail);
        }
    }
    let mut out = Vec::with_capacity(catalan(k) as usize);
    rec(1, k, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Möbius function of the lattice
// ---------------------------------------------------------------------------

static MOBIUS_TABLES: OnceLock<Mutex<HashMap<usize, Arc<Vec<i64>>>>> = OnceLock::new();

/// `μ̃(σ, 1_n)` for every `σ ∈ NC(n)`, indexed like `level(n).list`.
///
/// Built by the defining sieve: `μ̃(1_n, 1_n) = 1` and for `σ < 1_n`
/// `μ̃(σ, 1_n) = −Σ_{τ > σ} μ̃(τ, 1_n)`, processing partitions with few blocks
/// first so every coarsening is already known.
fn mobius_top_table(n: usize) -> Result<Arc<Vec<i64>>, NcError> {
    if n == 0 || n > MAX_MOBIUS_K {
        return Err(NcError::SizeOutOfRange {
            k: n,
            max: MAX_MOBIUS_K,
        });
    }
    let tables = MOBIUS_TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap().get(&n) {
        return Ok(t.clone());
    }
    let lvl = level(n)?;
    let ids: Vec<Vec<u32>> = lvl.list.iter().map(|p| p.block_ids()).collect();
    let nb: Vec<usize> = lvl.list.iter().map(|p| p.num_blocks()).collect();
    let mut order: Vec<usize> = (0..lvl.list.len()).collect();
    order.sort_by_key(|&i| nb[i]);
    let mut table = vec![0i64; lvl.list.len()];
    let mut map = vec![u32::MAX; n];
    for (pos, &si) in order.iter().enumerate() {
        if nb[si] == 1 {
            table[si] = 1;
            continue;
        }
        let mut acc = 0i64;
        for &ti in &order[..pos] {
            // strict coarsenings have strictly fewer blocks
            if nb[ti] < nb[si] && refines(&ids[si], &ids[ti], &mut map[..nb[si]]) {
                acc += table[ti];
            }
        }
        table[si] = -acc;
    }
    let table = Arc::new(table);
    tables.lock().unwrap().insert(n, table.clone());
    Ok(table)
}

/// Möbius function `μ̃(ν, ρ)` of the interval `[ν, ρ]` in `NC(k)`.
///
/// The interval factors over the blocks of `ρ` (the restriction of `ν` to a
/// block of `ρ` is again non-crossing after relabelling), and each factor is
/// a top interval `[ν|_B, 1_{|B|}]` looked up in the sieve table. Values are
/// always integers. Errors if `ν ≰ ρ` or a block exceeds [`MAX_MOBIUS_K`].
pub fn mobius_nc(nu: &NonCrossingPartition, rho: &NonCrossingPartition) -> Result<i64, NcError> {
    if !nu.leq(rho)? {
        return Err(NcError::NotComparable {
            nu: nu.to_string(),
            rho: rho.to_string(),
        });
    }
    let mut result = 1i64;
    for block in &rho.blocks {
        if block.len() == 1 {
            continue;
        }
        let pos: HashMap<usize, usize> = block
            .iter()
            .enumerate()
            .map(|(t, &x)| (x, t + 1))
            .collect();
        let sub_blocks: Vec<Vec<usize>> = nu
            .blocks
            .iter()
            .filter(|b| pos.contains_key(&b[0]))
            .map(|b| b.iter().map(|x| pos[x]).collect())
            .collect();
        let sub = NonCrossingPartition::from_valid_blocks(block.len(), sub_blocks);
        let lvl = level(block.len())?;
        let table = mobius_top_table(block.len())?;
        result *= table[lvl.index[&sub]];
    }
    Ok(result)
}
