//! The two path bijections and their inverses.
//!
//! `phi1` sends bridges that start upward (`A'`) to strictly positive walks
//! (`B'`). Below the maximum `M` the bridge splits into valleys
//! `[a_m, b_m]`, each starting and ending at height `m` and dipping below it
//! in between; every valley is reflected about its own height and the final
//! stretch `[a_M, 2n]` is reflected about `M`. `psi1` undoes this using the
//! first and last visits `c_k`, `d_k` of each level below the halved terminal
//! height.
//!
//! `phi2` sends excursions (`C`) to non-negative bridges with one interior
//! zero (`D`): before the first return `tau` to height one, every point that
//! is immediately followed by a down step is lowered by two. `psi2` raises
//! the corresponding points up to the first zero `nu`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::Path;
use crate::sets::{is_member, SetId};

/// Markers of the valley decomposition of a path in `A'`.
///
/// `a` holds `a_1..=a_M` and `b` holds `b_0..=b_{M-1}` (with `b_0 = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValleyDecomposition {
    #[serde(rename = "M")]
    pub max: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl ValleyDecomposition {
    /// `a_k`, `1 <= k <= M`.
    pub fn a(&self, k: usize) -> usize {
        self.a[k - 1]
    }

    /// `b_k`, `0 <= k <= M - 1`.
    pub fn b(&self, k: usize) -> usize {
        self.b[k]
    }
}

/// Markers of the level decomposition of a path in `B'`.
///
/// `c` holds `c_1..=c_h` and `d` holds `d_0..=d_h` (with `d_0 = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AscentDecomposition {
    pub h: usize,
    pub c: Vec<usize>,
    pub d: Vec<usize>,
}

impl AscentDecomposition {
    /// `c_k`, `1 <= k <= h`.
    pub fn c(&self, k: usize) -> usize {
        self.c[k - 1]
    }

    /// `d_k`, `0 <= k <= h`.
    pub fn d(&self, k: usize) -> usize {
        self.d[k]
    }
}

/// `tau` (first revisit of height one after time 1) and `nu` (first interior
/// zero), when they exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StopTimes {
    pub tau: Option<usize>,
    pub nu: Option<usize>,
}

pub fn stop_times(p: &Path) -> StopTimes {
    StopTimes {
        tau: first_return_to_one(p),
        nu: first_zero(p),
    }
}

/// `min{k > 1 : S_k = 1}`.
pub fn first_return_to_one(p: &Path) -> Option<usize> {
    (2..=p.step_count()).find(|&k| p.at(k) == 1)
}

/// `min{k > 0 : T_k = 0}`.
pub fn first_zero(p: &Path) -> Option<usize> {
    (1..=p.step_count()).find(|&k| p.at(k) == 0)
}

fn require(p: &Path, set: SetId, map: &'static str) -> Result<()> {
    if is_member(p, set) {
        Ok(())
    } else {
        Err(Error::NotInDomain {
            map,
            path: p.to_string(),
            expected: set.name(),
        })
    }
}

pub fn decompose_valleys(p: &Path) -> Result<ValleyDecomposition> {
    require(p, SetId::APrime, "decompose_valleys")?;
    Ok(valleys_unchecked(p))
}

fn valleys_unchecked(p: &Path) -> ValleyDecomposition {
    let len = p.step_count();
    let top = p.max_height();
    let max = top as usize;
    let mut a = vec![0; max];
    let mut b = vec![0; max];
    a[max - 1] = (1..=len).find(|&i| p.at(i) == top).expect("maximum is attained");
    for k in (1..max).rev() {
        let bound = a[k];
        let level = k as i32;
        a[k - 1] = (1..=bound).find(|&i| p.at(i) == level).expect("level below the maximum");
        b[k] = (1..=bound).rev().find(|&i| p.at(i) == level).expect("level below the maximum");
    }
    ValleyDecomposition { max, a, b }
}

pub fn decompose_ascents(q: &Path) -> Result<AscentDecomposition> {
    require(q, SetId::BPrime, "decompose_ascents")?;
    Ok(ascents_unchecked(q))
}

fn ascents_unchecked(q: &Path) -> AscentDecomposition {
    let len = q.step_count();
    let h = (q.terminal() / 2) as usize;
    let mut c = vec![0; h];
    let mut d = vec![0; h + 1];
    for k in 1..=h {
        let from = d[k - 1];
        let level = k as i32;
        c[k - 1] = (from..=len).find(|&i| q.at(i) == level).expect("positive walk crosses every level");
        d[k] = (from..=len).rev().find(|&i| q.at(i) == level).expect("positive walk crosses every level");
    }
    AscentDecomposition { h, c, d }
}

/// `A' -> B'`.
pub fn phi1(p: &Path) -> Result<Path> {
    require(p, SetId::APrime, "phi1")?;
    Ok(phi1_unchecked(p))
}

/// [`phi1`] without the domain check; the caller guarantees `p` is in `A'`.
pub(crate) fn phi1_unchecked(p: &Path) -> Path {
    let dec = valleys_unchecked(p);
    let top = dec.max;
    let a_top = dec.a(top);
    // b_1..b_{M-1}, increasing; the valley containing l is the first with b_m >= l.
    let ends = &dec.b[1..];
    let mut out = Vec::with_capacity(p.step_count() + 1);
    out.push(0);
    for l in 1..=p.step_count() {
        let level = if l >= a_top {
            top
        } else {
            ends.partition_point(|&b| b < l) + 1
        };
        out.push(2 * level as i32 - p.at(l));
    }
    Path::from_positions_unchecked(out)
}

/// `B' -> A'`.
pub fn psi1(q: &Path) -> Result<Path> {
    require(q, SetId::BPrime, "psi1")?;
    Ok(psi1_unchecked(q))
}

pub(crate) fn psi1_unchecked(q: &Path) -> Path {
    let dec = ascents_unchecked(q);
    let h = dec.h;
    let c_top = dec.c(h);
    let ends = &dec.d[1..h];
    let mut out = Vec::with_capacity(q.step_count() + 1);
    out.push(0);
    for l in 1..=q.step_count() {
        let level = if l >= c_top {
            h
        } else {
            ends.partition_point(|&d| d < l) + 1
        };
        out.push(2 * level as i32 - q.at(l));
    }
    Path::from_positions_unchecked(out)
}

/// `A -> B`: [`phi1`] on upward bridges, conjugated by negation on downward
/// ones.
pub fn phi1_full(p: &Path) -> Result<Path> {
    require(p, SetId::A, "phi1_full")?;
    Ok(phi1_full_unchecked(p))
}

pub(crate) fn phi1_full_unchecked(p: &Path) -> Path {
    if p.at(1) > 0 {
        phi1_unchecked(p)
    } else {
        phi1_unchecked(&p.negated()).negated()
    }
}

/// `B -> A`, inverse of [`phi1_full`].
pub fn psi1_full(q: &Path) -> Result<Path> {
    require(q, SetId::B, "psi1_full")?;
    Ok(psi1_full_unchecked(q))
}

pub(crate) fn psi1_full_unchecked(q: &Path) -> Path {
    if q.at(1) > 0 {
        psi1_unchecked(q)
    } else {
        psi1_unchecked(&q.negated()).negated()
    }
}

/// `C -> D`, for `n >= 2`.
pub fn phi2(p: &Path) -> Result<Path> {
    if p.half_length() < 2 {
        return Err(Error::NTooSmall { map: "phi2", n: p.half_length() });
    }
    require(p, SetId::C, "phi2")?;
    Ok(phi2_unchecked(p))
}

pub(crate) fn phi2_unchecked(p: &Path) -> Path {
    let tau = first_return_to_one(p).expect("excursions with n >= 2 revisit height one");
    let mut out = p.positions().to_vec();
    for l in 2..tau {
        if p.at(l + 1) == p.at(l) - 1 {
            out[l] -= 2;
        }
    }
    Path::from_positions_unchecked(out)
}

/// `D -> C`.
pub fn psi2(q: &Path) -> Result<Path> {
    require(q, SetId::D, "psi2")?;
    Ok(psi2_unchecked(q))
}

pub(crate) fn psi2_unchecked(q: &Path) -> Path {
    let nu = first_zero(q).expect("members of D touch zero in the interior");
    let mut out = q.positions().to_vec();
    for l in 2..=nu {
        if q.at(l) == q.at(l - 1) - 1 {
            out[l] += 2;
        }
    }
    Path::from_positions_unchecked(out)
}

/// The six maps, addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bijection {
    Phi1,
    Psi1,
    Phi1Full,
    Psi1Full,
    Phi2,
    Psi2,
}

impl Bijection {
    pub const ALL: [Bijection; 6] = [
        Bijection::Phi1,
        Bijection::Psi1,
        Bijection::Phi1Full,
        Bijection::Psi1Full,
        Bijection::Phi2,
        Bijection::Psi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bijection::Phi1 => "phi1",
            Bijection::Psi1 => "psi1",
            Bijection::Phi1Full => "phi1full",
            Bijection::Psi1Full => "psi1full",
            Bijection::Phi2 => "phi2",
            Bijection::Psi2 => "psi2",
        }
    }

    pub fn domain(self) -> SetId {
        match self {
            Bijection::Phi1 => SetId::APrime,
            Bijection::Psi1 => SetId::BPrime,
            Bijection::Phi1Full => SetId::A,
            Bijection::Psi1Full => SetId::B,
            Bijection::Phi2 => SetId::C,
            Bijection::Psi2 => SetId::D,
        }
    }

    pub fn codomain(self) -> SetId {
        self.inverse().domain()
    }

    pub fn inverse(self) -> Bijection {
        match self {
            Bijection::Phi1 => Bijection::Psi1,
            Bijection::Psi1 => Bijection::Phi1,
            Bijection::Phi1Full => Bijection::Psi1Full,
            Bijection::Psi1Full => Bijection::Phi1Full,
            Bijection::Phi2 => Bijection::Psi2,
            Bijection::Psi2 => Bijection::Phi2,
        }
    }

    /// Smallest `n` at which the map is defined.
    pub fn min_n(self) -> usize {
        match self {
            Bijection::Phi2 | Bijection::Psi2 => 2,
            _ => 1,
        }
    }

    pub fn apply(self, p: &Path) -> Result<Path> {
        match self {
            Bijection::Phi1 => phi1(p),
            Bijection::Psi1 => psi1(p),
            Bijection::Phi1Full => phi1_full(p),
            Bijection::Psi1Full => psi1_full(p),
            Bijection::Phi2 => phi2(p),
            Bijection::Psi2 => psi2(p),
        }
    }

    /// Applies the map to a path already known to lie in its domain.
    pub(crate) fn apply_unchecked(self, p: &Path) -> Path {
        match self {
            Bijection::Phi1 => phi1_unchecked(p),
            Bijection::Psi1 => psi1_unchecked(p),
            Bijection::Phi1Full => phi1_full_unchecked(p),
            Bijection::Psi1Full => psi1_full_unchecked(p),
            Bijection::Phi2 => phi2_unchecked(p),
            Bijection::Psi2 => psi2_unchecked(p),
        }
    }

    /// The decomposition or stop time the map reads off its input.
    pub fn markers(self, p: &Path) -> Result<Markers> {
        // Validates the domain (and n) with the same errors as `apply`.
        self.apply(p)?;
        let negated = p.at(1) < 0;
        let upward = if negated { p.negated() } else { p.clone() };
        Ok(match self {
            Bijection::Phi1 | Bijection::Phi1Full => Markers::Valleys {
                negated,
                decomposition: valleys_unchecked(&upward),
            },
            Bijection::Psi1 | Bijection::Psi1Full => Markers::Ascents {
                negated,
                decomposition: ascents_unchecked(&upward),
            },
            Bijection::Phi2 => Markers::Tau {
                tau: first_return_to_one(p).expect("checked by apply"),
            },
            Bijection::Psi2 => Markers::Nu {
                nu: first_zero(p).expect("checked by apply"),
            },
        })
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bijection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Bijection> {
        let key = s.trim().to_ascii_lowercase().replace(['_', '-'], "");
        Bijection::ALL
            .into_iter()
            .find(|b| b.name() == key)
            .ok_or_else(|| Error::Syntax(format!("unknown bijection {s:?}")))
    }
}

/// What a map reads off its input, serialized next to batch results.
/// For the sign-extended maps, `negated` records that the decomposition was
/// taken on the mirrored path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Markers {
    Valleys {
        negated: bool,
        #[serde(flatten)]
        decomposition: ValleyDecomposition,
    },
    Ascents {
        negated: bool,
        #[serde(flatten)]
        decomposition: AscentDecomposition,
    },
    Tau {
        tau: usize,
    },
    Nu {
        nu: usize,
    },
}
