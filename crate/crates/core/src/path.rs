//! Simple random walk paths: the canonical position form, the step view, and
//! the two text encodings (tuple and JSON lines).

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single unit step. `Down` orders before `Up`, which fixes the
/// enumeration order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Down,
    Up,
}

impl Step {
    pub fn delta(self) -> i32 {
        match self {
            Step::Down => -1,
            Step::Up => 1,
        }
    }

    pub fn from_delta(delta: i64) -> Option<Step> {
        match delta {
            -1 => Some(Step::Down),
            1 => Some(Step::Up),
            _ => None,
        }
    }
}

/// The increments of a walk, `S_i - S_{i-1}` for `i = 1..=2n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepSeq(Vec<Step>);

impl StepSeq {
    pub fn new(steps: Vec<Step>) -> Self {
        StepSeq(steps)
    }

    /// Builds a step sequence from `±1` integers.
    pub fn from_deltas(deltas: &[i64]) -> Result<Self> {
        deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                Step::from_delta(d)
                    .ok_or_else(|| Error::Syntax(format!("step {} is {d}, expected -1 or +1", i + 1)))
            })
            .collect::<Result<Vec<_>>>()
            .map(StepSeq)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn deltas(&self) -> Vec<i32> {
        self.0.iter().map(|s| s.delta()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A `2n`-step walk on the integers started at the origin, stored as its
/// positions `S_0, S_1, ..., S_{2n}`.
///
/// Construction always goes through [`Path::validate`] (or a constructor that
/// cannot produce an invalid walk), so every `Path` value satisfies
/// `S_0 = 0`, `|S_i - S_{i-1}| = 1` and has an even, positive number of steps.
///
/// The derived ordering compares positions lexicographically, which agrees
/// with the lexicographic order of the step sequences under `Down < Up`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Path {
    positions: Vec<i32>,
}

impl Path {
    /// Checks a raw position sequence against the walk invariants.
    pub fn validate(raw: &[i64]) -> Result<Path> {
        let Some(&first) = raw.first() else {
            return Err(Error::InvalidLength(0));
        };
        if first != 0 {
            return Err(Error::NonZeroStart(first));
        }
        for (i, w) in raw.windows(2).enumerate() {
            if (w[1] - w[0]).abs() != 1 {
                return Err(Error::BadStep {
                    index: i + 1,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        let steps = raw.len() - 1;
        if steps == 0 {
            return Err(Error::InvalidLength(0));
        }
        if steps % 2 == 1 {
            return Err(Error::OddLength(steps));
        }
        // |S_i| <= i, so every value fits once the steps are valid and the
        // length is sane.
        let positions = raw
            .iter()
            .map(|&v| i32::try_from(v).map_err(|_| Error::Syntax(format!("value {v} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Path { positions })
    }

    /// Prefix sums of the steps, starting at 0.
    pub fn from_steps(steps: &StepSeq) -> Result<Path> {
        if steps.is_empty() || steps.len() % 2 == 1 {
            return Err(Error::InvalidLength(steps.len()));
        }
        let mut positions = Vec::with_capacity(steps.len() + 1);
        let mut height = 0;
        positions.push(height);
        for step in steps.steps() {
            height += step.delta();
            positions.push(height);
        }
        Ok(Path { positions })
    }

    pub fn steps(&self) -> StepSeq {
        StepSeq(
            self.positions
                .windows(2)
                .map(|w| if w[1] > w[0] { Step::Up } else { Step::Down })
                .collect(),
        )
    }

    /// Decodes a `2n`-bit word, most significant bit first, `1` meaning up.
    ///
    /// Words of the same `n` compare in the same order as the paths they
    /// encode.
    pub fn from_step_word(word: u64, n: usize) -> Path {
        assert!(n >= 1 && 2 * n <= 64, "step word holds at most 32 step pairs");
        let len = 2 * n;
        let mut positions = Vec::with_capacity(len + 1);
        let mut height = 0;
        positions.push(0);
        for i in (0..len).rev() {
            height += if (word >> i) & 1 == 1 { 1 } else { -1 };
            positions.push(height);
        }
        Path { positions }
    }

    /// Inverse of [`Path::from_step_word`]; `None` above 32 step pairs.
    pub fn step_word(&self) -> Option<u64> {
        if self.step_count() > 64 {
            return None;
        }
        Some(
            self.positions
                .windows(2)
                .fold(0u64, |acc, w| (acc << 1) | u64::from(w[1] > w[0])),
        )
    }

    pub(crate) fn from_positions_unchecked(positions: Vec<i32>) -> Path {
        debug_assert!(Path::validate(&positions.iter().map(|&v| i64::from(v)).collect::<Vec<_>>()).is_ok());
        Path { positions }
    }

    pub fn positions(&self) -> &[i32] {
        &self.positions
    }

    /// `n`, half the number of steps.
    pub fn half_length(&self) -> usize {
        self.step_count() / 2
    }

    /// `2n`.
    pub fn step_count(&self) -> usize {
        self.positions.len() - 1
    }

    /// `S_i`.
    pub fn at(&self, i: usize) -> i32 {
        self.positions[i]
    }

    /// `S_{2n}`.
    pub fn terminal(&self) -> i32 {
        *self.positions.last().expect("paths are never empty")
    }

    pub fn max_height(&self) -> i32 {
        self.positions.iter().copied().max().unwrap_or(0)
    }

    pub fn min_height(&self) -> i32 {
        self.positions.iter().copied().min().unwrap_or(0)
    }

    /// The mirror image `-S_i`.
    pub fn negated(&self) -> Path {
        Path {
            positions: self.positions.iter().map(|v| -v).collect(),
        }
    }

    /// One JSON array of integers, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("integer arrays always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Path> {
        let raw: Vec<i64> =
            serde_json::from_str(line).map_err(|e| Error::Syntax(e.to_string()))?;
        Path::validate(&raw)
    }
}

impl TryFrom<Vec<i64>> for Path {
    type Error = Error;

    fn try_from(raw: Vec<i64>) -> Result<Path> {
        Path::validate(&raw)
    }
}

impl From<Path> for Vec<i64> {
    fn from(p: Path) -> Vec<i64> {
        p.positions.into_iter().map(i64::from).collect()
    }
}

/// `(0,S_1,...,S_{2n})`, no spaces.
impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Accepts a comma separated integer list, optionally parenthesised.
/// Surrounding whitespace and the Unicode minus sign are tolerated.
impl FromStr for Path {
    type Err = Error;

    fn from_str(text: &str) -> Result<Path> {
        let trimmed = text.trim();
        let inner = match (trimmed.strip_prefix('('), trimmed.ends_with(')')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => trimmed,
            _ => return Err(Error::Syntax(format!("unbalanced parentheses in {trimmed:?}"))),
        };
        if inner.trim().is_empty() {
            return Err(Error::Syntax("empty path".into()));
        }
        let raw = inner
            .split(',')
            .map(|tok| {
                let tok = tok.trim().replace('\u{2212}', "-");
                tok.parse::<i64>()
                    .map_err(|_| Error::Syntax(format!("not an integer: {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Path::validate(&raw)
    }
}

/// Reads one path per non-blank line of JSON arrays.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Path>> {
    let mut paths = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Syntax(format!("line {}: {e}", lineno + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        paths.push(Path::from_json_line(&line)?);
    }
    Ok(paths)
}
