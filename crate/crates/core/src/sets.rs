//! The path families: membership predicates, exhaustive enumerators, closed
//! form cardinalities and seeded uniform samplers.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Path;

/// Default largest `n` swept by filter enumeration (`2^24` candidate walks).
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 12;

/// Hard ceiling for enumeration: candidate walks are indexed by a `u64` word.
pub const MAX_ENUMERABLE_N: usize = 31;

/// Largest `n` the unranking sampler can count with `u128`.
const MAX_UNRANK_N: usize = 60;

/// The eight named families of `2n`-step walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetId {
    /// Every walk.
    S,
    /// Walks ending at 0.
    A,
    /// Walks that never revisit 0.
    B,
    /// Members of `A` whose first step is up.
    #[serde(rename = "Aprime")]
    APrime,
    /// Walks strictly positive after time 0.
    #[serde(rename = "Bprime")]
    BPrime,
    /// Non-negative walks ending at 0.
    T,
    /// Members of `T` with no interior return to 0.
    C,
    /// Members of `T` with exactly one interior return to 0.
    D,
}

impl SetId {
    pub const ALL: [SetId; 8] = [
        SetId::S,
        SetId::A,
        SetId::B,
        SetId::APrime,
        SetId::BPrime,
        SetId::T,
        SetId::C,
        SetId::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SetId::S => "S",
            SetId::A => "A",
            SetId::B => "B",
            SetId::APrime => "Aprime",
            SetId::BPrime => "Bprime",
            SetId::T => "T",
            SetId::C => "C",
            SetId::D => "D",
        }
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<SetId> {
        Ok(match s.trim() {
            "S" | "s" => SetId::S,
            "A" | "a" => SetId::A,
            "B" | "b" => SetId::B,
            "Aprime" | "aprime" | "A'" | "a'" => SetId::APrime,
            "Bprime" | "bprime" | "B'" | "b'" => SetId::BPrime,
            "T" | "t" => SetId::T,
            "C" | "c" => SetId::C,
            "D" | "d" => SetId::D,
            other => return Err(Error::Syntax(format!("unknown set {other:?}"))),
        })
    }
}

/// An exact, non-negative count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cardinality(pub BigUint);

impl Cardinality {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for Cardinality {
    fn from(v: u64) -> Self {
        Cardinality(BigUint::from(v))
    }
}

/// Number of `i` in `1..=n-1` with `S_{2i} = 0`.
pub fn zero_touch_count(p: &Path) -> usize {
    zero_touches(p.positions())
}

fn zero_touches(pos: &[i32]) -> usize {
    let n = (pos.len() - 1) / 2;
    (1..n).filter(|&i| pos[2 * i] == 0).count()
}

/// Membership test on a raw position slice that already satisfies the walk
/// invariants.
pub(crate) fn is_member_positions(pos: &[i32], set: SetId) -> bool {
    let last = pos.len() - 1;
    let interior = &pos[1..last];
    let end = pos[last];
    let non_negative_bridge = || end == 0 && interior.iter().all(|&v| v >= 0);
    match set {
        SetId::S => true,
        SetId::A => end == 0,
        SetId::B => pos[1..].iter().all(|&v| v != 0),
        SetId::APrime => end == 0 && pos[1] > 0,
        SetId::BPrime => pos[1..].iter().all(|&v| v > 0),
        SetId::T => non_negative_bridge(),
        SetId::C => non_negative_bridge() && zero_touches(pos) == 0,
        SetId::D => non_negative_bridge() && zero_touches(pos) == 1,
    }
}

pub fn is_member(p: &Path, set: SetId) -> bool {
    is_member_positions(p.positions(), set)
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    let effective = limit.min(MAX_ENUMERABLE_N);
    if n > effective {
        return Err(Error::LimitExceeded { n, limit: effective });
    }
    Ok(())
}

/// Lazily sweeps candidate step words and yields members of one family in
/// lexicographic step order (`Down < Up`).
#[derive(Debug, Clone)]
pub struct Enumeration {
    n: usize,
    set: SetId,
    next: u64,
    end: u64,
    buf: Vec<i32>,
}

impl Enumeration {
    /// Sweeps only the words in `words`, a sub-range of `0..4^n`.
    pub fn over(n: usize, set: SetId, words: Range<u64>) -> Enumeration {
        assert!((1..=MAX_ENUMERABLE_N).contains(&n));
        assert!(words.end <= word_count(n));
        Enumeration {
            n,
            set,
            next: words.start,
            end: words.end,
            buf: vec![0; 2 * n + 1],
        }
    }

    fn decode(&mut self, word: u64) {
        let len = 2 * self.n;
        let mut h = 0;
        for i in 0..len {
            h += if (word >> (len - 1 - i)) & 1 == 1 { 1 } else { -1 };
            self.buf[i + 1] = h;
        }
    }
}

impl Iterator for Enumeration {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        while self.next < self.end {
            let word = self.next;
            self.next += 1;
            self.decode(word);
            if is_member_positions(&self.buf, self.set) {
                return Some(Path::from_positions_unchecked(self.buf.clone()));
            }
        }
        None
    }
}

/// `4^n`, the number of candidate step words.
pub fn word_count(n: usize) -> u64 {
    1u64 << (2 * n)
}

/// All members of `set` at size `n`, by filtering every walk.
pub fn enumerate(n: usize, set: SetId, limit: usize) -> Result<Enumeration> {
    if n == 0 {
        return Err(Error::InvalidLength(0));
    }
    check_limit(n, limit)?;
    Ok(Enumeration::over(n, set, 0..word_count(n)))
}

/// Splits `0..4^n` into at most `parts` contiguous, ordered chunks.
pub fn partition_words(n: usize, parts: usize) -> Vec<Range<u64>> {
    let total = word_count(n);
    let parts = (parts.max(1) as u64).min(total);
    let chunk = total.div_ceil(parts);
    (0..parts)
        .map(|i| (i * chunk).min(total)..((i + 1) * chunk).min(total))
        .filter(|r| !r.is_empty())
        .collect()
}

/// Same output as [`enumerate`], with the sweep split by step prefix across
/// `workers` rayon tasks and concatenated in prefix order.
pub fn enumerate_par(n: usize, set: SetId, limit: usize, workers: usize) -> Result<Vec<Path>> {
    if n == 0 {
        return Err(Error::InvalidLength(0));
    }
    check_limit(n, limit)?;
    let chunks: Vec<Vec<Path>> = partition_words(n, workers)
        .into_par_iter()
        .map(|r| Enumeration::over(n, set, r).collect())
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Builds the `C` family directly: first step up, strictly positive interior,
/// return to 0 at time `2n`. Output order matches [`enumerate`].
pub fn enumerate_excursions(n: usize, limit: usize) -> Result<Vec<Path>> {
    if n == 0 {
        return Err(Error::InvalidLength(0));
    }
    check_limit(n, limit)?;
    let len = 2 * n;
    let mut out = Vec::new();
    let mut pos = vec![0i32; len + 1];
    pos[1] = 1;
    extend_excursion(&mut pos, 1, len, &mut out);
    Ok(out)
}

fn extend_excursion(pos: &mut Vec<i32>, i: usize, len: usize, out: &mut Vec<Path>) {
    if i == len {
        if pos[len] == 0 {
            out.push(Path::from_positions_unchecked(pos.clone()));
        }
        return;
    }
    let h = pos[i];
    let remaining = (len - i) as i32;
    for next in [h - 1, h + 1] {
        let is_last = i + 1 == len;
        let ok = if is_last { next == 0 } else { next > 0 && next < remaining };
        if ok {
            pos[i + 1] = next;
            extend_excursion(pos, i + 1, len, out);
        }
    }
}

/// `C(n, k)` by the multiplicative formula; every partial product is an
/// integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `|C_n| = (2n-2)! / ((n-1)! n!)`.
pub fn excursion_count(n: u64) -> BigUint {
    assert!(n >= 1);
    factorial(2 * n - 2) / (factorial(n - 1) * factorial(n))
}

/// `|D_n|` as the first-return convolution of excursion counts.
pub fn single_touch_count(n: u64) -> BigUint {
    (1..n).map(|k| excursion_count(k) * excursion_count(n - k)).sum()
}

/// Closed-form `|set|` at size `n`; no enumeration.
pub fn count_formula(n: usize, set: SetId) -> Cardinality {
    assert!(n >= 1, "families are defined for n >= 1");
    let m = n as u64;
    let central = || binomial(2 * m, m);
    Cardinality(match set {
        SetId::S => BigUint::from(4u32).pow(n as u32),
        SetId::A | SetId::B => central(),
        SetId::APrime | SetId::BPrime => central() / 2u32,
        SetId::T => central() / (m + 1),
        SetId::C => excursion_count(m),
        SetId::D => single_touch_count(m),
    })
}

/// Completion counts for a family, used to rank and unrank its members in
/// enumeration order.
#[derive(Debug, Clone)]
struct CompletionTable {
    n: usize,
    set: SetId,
    /// `ways[i][h + 2n][z]`: completions from time `i` at height `h` after `z`
    /// interior even-time zeros (capped at 2).
    ways: Vec<Vec<[u128; 3]>>,
}

impl CompletionTable {
    fn new(n: usize, set: SetId) -> Self {
        assert!(n <= MAX_UNRANK_N);
        let len = 2 * n;
        let width = 2 * len + 1;
        let mut ways = vec![vec![[0u128; 3]; width]; len + 1];
        for h in -(len as i32)..=(len as i32) {
            for z in 0..3 {
                if Self::accepts(set, h, z) {
                    ways[len][(h + len as i32) as usize][z] = 1;
                }
            }
        }
        for i in (0..len).rev() {
            for h in -(i as i32)..=(i as i32) {
                for z in 0..3 {
                    let mut total = 0u128;
                    for next in [h - 1, h + 1] {
                        if let Some(nz) = Self::advance(n, set, i + 1, next, z) {
                            total += ways[i + 1][(next + len as i32) as usize][nz];
                        }
                    }
                    ways[i][(h + len as i32) as usize][z] = total;
                }
            }
        }
        CompletionTable { n, set, ways }
    }

    /// Zero-count after moving to height `h` at time `i`, or `None` if the
    /// family forbids that position.
    fn advance(n: usize, set: SetId, i: usize, h: i32, z: usize) -> Option<usize> {
        let len = 2 * n;
        let interior = i < len;
        let allowed = match set {
            SetId::S | SetId::A => true,
            SetId::B => h != 0,
            SetId::APrime => i != 1 || h > 0,
            SetId::BPrime => h > 0,
            SetId::T | SetId::C | SetId::D => !interior || h >= 0,
        };
        if !allowed {
            return None;
        }
        let touch = interior && i.is_multiple_of(2) && h == 0;
        Some(if touch { (z + 1).min(2) } else { z })
    }

    fn accepts(set: SetId, end: i32, z: usize) -> bool {
        match set {
            SetId::S | SetId::B | SetId::BPrime => true,
            SetId::A | SetId::APrime | SetId::T => end == 0,
            SetId::C => end == 0 && z == 0,
            SetId::D => end == 0 && z == 1,
        }
    }

    fn get(&self, i: usize, h: i32, z: usize) -> u128 {
        self.ways[i][(h + 2 * self.n as i32) as usize][z]
    }

    fn total(&self) -> u128 {
        self.get(0, 0, 0)
    }

    /// The `rank`-th member (0-based) in enumeration order.
    fn unrank(&self, mut rank: u128) -> Path {
        assert!(rank < self.total());
        let len = 2 * self.n;
        let mut pos = Vec::with_capacity(len + 1);
        pos.push(0i32);
        let (mut h, mut z) = (0i32, 0usize);
        for i in 1..=len {
            let mut moved = false;
            for next in [h - 1, h + 1] {
                let Some(nz) = Self::advance(self.n, self.set, i, next, z) else {
                    continue;
                };
                let c = self.get(i, next, nz);
                if rank < c {
                    h = next;
                    z = nz;
                    moved = true;
                    break;
                }
                rank -= c;
            }
            assert!(moved, "rank exceeded completion count");
            pos.push(h);
        }
        Path::from_positions_unchecked(pos)
    }
}

#[derive(Debug, Clone)]
enum SampleMode {
    Unrank(CompletionTable),
    Reject,
}

/// A seeded stream of uniform draws from one family.
///
/// For `n` within the exhaustive limit a draw is an exact uniform rank,
/// unranked in enumeration order. Above it, walks are drawn uniformly from
/// all `4^n` and rejected until one lands in the family.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: usize,
    set: SetId,
    rng: ChaCha8Rng,
    mode: SampleMode,
}

impl Sampler {
    pub fn new(n: usize, set: SetId, seed: u64, limit: usize) -> Result<Sampler> {
        if n == 0 {
            return Err(Error::InvalidLength(0));
        }
        if count_formula(n, set).0.is_zero() {
            return Err(Error::EmptyFamily { set: set.to_string(), n });
        }
        let mode = if n <= limit && n <= MAX_UNRANK_N {
            SampleMode::Unrank(CompletionTable::new(n, set))
        } else {
            SampleMode::Reject
        };
        Ok(Sampler {
            n,
            set,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mode,
        })
    }

    pub fn draw(&mut self) -> Path {
        match &self.mode {
            SampleMode::Unrank(table) => {
                let rank = self.rng.gen_range(0..table.total());
                table.unrank(rank)
            }
            SampleMode::Reject => loop {
                let mut pos = Vec::with_capacity(2 * self.n + 1);
                pos.push(0i32);
                let mut h = 0;
                for _ in 0..2 * self.n {
                    h += if self.rng.gen::<bool>() { 1 } else { -1 };
                    pos.push(h);
                }
                if is_member_positions(&pos, self.set) {
                    break Path::from_positions_unchecked(pos);
                }
            },
        }
    }
}

impl Iterator for Sampler {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        Some(self.draw())
    }
}

/// One uniform draw from `set` at size `n`.
pub fn sample(n: usize, set: SetId, seed: u64) -> Result<Path> {
    Ok(Sampler::new(n, set, seed, DEFAULT_EXHAUSTIVE_LIMIT)?.draw())
}
