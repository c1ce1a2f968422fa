//! Exhaustive checks of the bijections, cardinality formulas and the
//! structural facts the inverse maps rely on.
//!
//! Sweeps may be split across workers. Each worker fills a [`Tally`]; tallies
//! merge associatively and commutatively (counterexamples are kept sorted and
//! capped), so a report never depends on the worker count.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bijections::{
    decompose_ascents, decompose_valleys, first_return_to_one, first_zero, phi1, phi2, Bijection,
};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::sets::{
    binomial, count_formula, enumerate_excursions, excursion_count, factorial, is_member,
    partition_words, single_touch_count, word_count, zero_touch_count, Enumeration, SetId,
    DEFAULT_EXHAUSTIVE_LIMIT, MAX_ENUMERABLE_N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub exhaustive_limit: usize,
    pub counterexample_cap: usize,
    /// Number of sweep partitions; a hint, never changes the result.
    pub workers: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            counterexample_cap: 10,
            workers: 1,
        }
    }
}

impl VerifyConfig {
    fn check_limit(&self, n: usize) -> Result<()> {
        let limit = self.exhaustive_limit.min(MAX_ENUMERABLE_N);
        if n == 0 {
            return Err(Error::InvalidLength(0));
        }
        if n > limit {
            return Err(Error::LimitExceeded { n, limit });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Counterexample {
    pub path: Path,
    pub detail: String,
}

/// Outcome of one check at one size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub check_name: String,
    #[serde(serialize_with = "decimal")]
    pub domain_size: BigUint,
    #[serde(serialize_with = "decimal")]
    pub image_size: BigUint,
    pub passed: bool,
    /// Total failures seen, including those beyond the counterexample cap.
    pub failures: u64,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} {} n={} domain={} image={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check_name,
            self.n,
            self.domain_size,
            self.image_size
        )?;
        for note in &self.notes {
            writeln!(f, "  {note}")?;
        }
        if self.failures > 0 {
            writeln!(f, "  {} failure(s); first {}:", self.failures, self.counterexamples.len())?;
            for c in &self.counterexamples {
                writeln!(f, "    {}: {}", c.path, c.detail)?;
            }
        }
        Ok(())
    }
}

/// Failures collected by one worker.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    cap: usize,
    failures: u64,
    counterexamples: Vec<Counterexample>,
}

impl Tally {
    pub fn new(cap: usize) -> Self {
        Tally {
            cap: cap.max(1),
            ..Default::default()
        }
    }

    pub fn fail(&mut self, path: &Path, detail: impl Into<String>) {
        self.failures += 1;
        self.counterexamples.push(Counterexample {
            path: path.clone(),
            detail: detail.into(),
        });
        if self.counterexamples.len() > self.cap.saturating_mul(2) {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.counterexamples.sort();
        self.counterexamples.truncate(self.cap);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.counterexamples.extend(other.counterexamples);
        self.compact();
        self
    }

    fn into_report(
        mut self,
        n: usize,
        check_name: &str,
        domain_size: BigUint,
        image_size: BigUint,
        notes: Vec<String>,
    ) -> VerifyReport {
        self.compact();
        VerifyReport {
            n,
            check_name: check_name.to_string(),
            domain_size,
            image_size,
            passed: self.failures == 0,
            failures: self.failures,
            counterexamples: self.counterexamples,
            notes,
        }
    }
}

/// Runs `work` over each sweep partition of `set` and merges the results in
/// partition order.
fn sweep<T, W, M>(n: usize, set: SetId, cfg: &VerifyConfig, work: W, merge: M) -> T
where
    T: Send,
    W: Fn(Enumeration) -> T + Sync,
    M: Fn(T, T) -> T,
{
    let parts: Vec<T> = partition_words(n, cfg.workers)
        .into_par_iter()
        .map(|range| work(Enumeration::over(n, set, range)))
        .collect();
    parts.into_iter().reduce(merge).expect("at least one partition")
}

/// Per-worker state of a bijectivity sweep.
struct BijectionPart {
    tally: Tally,
    domain: u64,
    /// `(image word, input word)` for every input whose image landed in the
    /// codomain.
    hits: Vec<(u64, u64)>,
}

/// Checks that a named map is a bijection from `domain` onto `codomain`
/// with its named inverse as two-sided inverse.
pub fn check_bijection(
    n: usize,
    forward: Bijection,
    domain: SetId,
    codomain: SetId,
    cfg: &VerifyConfig,
) -> Result<VerifyReport> {
    if n < forward.min_n() {
        return Err(Error::NTooSmall { map: forward.name(), n });
    }
    let backward = forward.inverse();
    let name = format!("bijection {forward}: {domain} -> {codomain}");
    // The fast path skips per-call domain checks only when the swept sets
    // are exactly the maps' domains.
    if domain == forward.domain() && codomain == backward.domain() {
        check_bijection_with(
            n,
            &name,
            domain,
            codomain,
            |p| Ok(forward.apply_unchecked(p)),
            |q| Ok(backward.apply_unchecked(q)),
            cfg,
        )
    } else {
        check_bijection_with(n, &name, domain, codomain, |p| forward.apply(p), |q| backward.apply(q), cfg)
    }
}

/// [`check_bijection`] over arbitrary map implementations.
pub fn check_bijection_with<F, G>(
    n: usize,
    check_name: &str,
    domain: SetId,
    codomain: SetId,
    forward: F,
    backward: G,
    cfg: &VerifyConfig,
) -> Result<VerifyReport>
where
    F: Fn(&Path) -> Result<Path> + Sync,
    G: Fn(&Path) -> Result<Path> + Sync,
{
    cfg.check_limit(n)?;
    let cap = cfg.counterexample_cap;
    let part = sweep(
        n,
        domain,
        cfg,
        |paths| {
            let mut part = BijectionPart {
                tally: Tally::new(cap),
                domain: 0,
                hits: Vec::new(),
            };
            for p in paths {
                part.domain += 1;
                let image = match forward(&p) {
                    Ok(image) => image,
                    Err(e) => {
                        part.tally.fail(&p, format!("forward map failed: {e}"));
                        continue;
                    }
                };
                if image.step_count() != p.step_count() || !is_member(&image, codomain) {
                    part.tally.fail(&p, format!("image {image} is not in {codomain}"));
                    continue;
                }
                match backward(&image) {
                    Ok(back) if back == p => {}
                    Ok(back) => part.tally.fail(&p, format!("inverse of image {image} is {back}")),
                    Err(e) => part.tally.fail(&p, format!("inverse failed on {image}: {e}")),
                }
                part.hits.push((
                    image.step_word().expect("enumerable sizes fit a word"),
                    p.step_word().expect("enumerable sizes fit a word"),
                ));
            }
            part
        },
        |mut a, b| {
            a.tally = a.tally.merge(b.tally);
            a.domain += b.domain;
            a.hits.extend(b.hits);
            a
        },
    );
    let BijectionPart { mut tally, domain: domain_size, mut hits } = part;

    // Injectivity via a sorted duplicate scan.
    hits.sort_unstable();
    let mut images: Vec<u64> = Vec::with_capacity(hits.len());
    for &(image, input) in &hits {
        if images.last() == Some(&image) {
            tally.fail(
                &Path::from_step_word(input, n),
                format!("image {} is hit more than once", Path::from_step_word(image, n)),
            );
        } else {
            images.push(image);
        }
    }

    // Surjectivity: every codomain member must be some image.
    let mut pending = images.iter().peekable();
    for target in Enumeration::over(n, codomain, 0..word_count(n)) {
        let word = target.step_word().expect("enumerable sizes fit a word");
        while pending.next_if(|&&w| w < word).is_some() {}
        if pending.next_if_eq(&&word).is_none() {
            tally.fail(&target, format!("{codomain} member is never hit"));
        }
    }

    Ok(tally.into_report(
        n,
        check_name,
        BigUint::from(domain_size),
        BigUint::from(images.len()),
        Vec::new(),
    ))
}

/// Compares enumerated sizes of every family against the closed forms, the
/// direct excursion generator against the filter, and the reflection
/// identity `C(2n-2, n-1) - C(2n-2, n) = (2n-2)! / ((n-1)! n!)`.
pub fn check_counts(n: usize, cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.check_limit(n)?;
    let tallies = sweep(
        n,
        SetId::S,
        cfg,
        |paths| {
            let mut counts = [0u64; SetId::ALL.len()];
            for p in paths {
                for (slot, set) in counts.iter_mut().zip(SetId::ALL) {
                    *slot += u64::from(is_member(&p, set));
                }
            }
            counts
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );

    let mut tally = Tally::new(cfg.counterexample_cap);
    let witness = Path::from_step_word(0, n);
    let mut notes = Vec::new();
    let (mut enumerated, mut formula) = (BigUint::zero(), BigUint::zero());
    for (set, count) in SetId::ALL.into_iter().zip(tallies) {
        let expected = count_formula(n, set).0;
        notes.push(format!("{set}: enumerated {count}, formula {expected}"));
        if BigUint::from(count) != expected {
            tally.fail(&witness, format!("|{set}| enumerated {count} but formula gives {expected}"));
        }
        enumerated += count;
        formula += expected;
    }

    let direct = enumerate_excursions(n, cfg.exhaustive_limit)?;
    let filtered: Vec<Path> = crate::sets::enumerate(n, SetId::C, cfg.exhaustive_limit)?.collect();
    if direct != filtered {
        tally.fail(&witness, "direct excursion generator disagrees with the filter");
    }

    let m = n as u64;
    let reflected = binomial(2 * m - 2, m - 1) - binomial(2 * m - 2, m);
    let closed = factorial(2 * m - 2) / (factorial(m - 1) * factorial(m));
    notes.push(format!("reflection: {reflected}, factorial form: {closed}"));
    if reflected != closed {
        tally.fail(&witness, format!("reflection count {reflected} differs from {closed}"));
    }

    Ok(tally.into_report(n, "counts", enumerated, formula, notes))
}

/// First-return convolution against the closed form for `2 <= n <= n_max`.
pub fn check_catalan_identity(n_max: usize) -> Result<VerifyReport> {
    if n_max < 2 {
        return Err(Error::NTooSmall { map: "catalan", n: n_max });
    }
    let mut tally = Tally::new(usize::MAX);
    let (mut conv_total, mut closed_total) = (BigUint::zero(), BigUint::zero());
    let mut notes = Vec::new();
    for n in 2..=n_max as u64 {
        let conv = single_touch_count(n);
        let closed = excursion_count(n);
        if conv != closed {
            tally.fail(
                &Path::from_step_word(0, 1),
                format!("n={n}: convolution {conv} but closed form {closed}"),
            );
        }
        notes.push(format!("n={n}: {conv}"));
        conv_total += conv;
        closed_total += closed;
    }
    Ok(tally.into_report(n_max, "catalan", conv_total, closed_total, notes))
}

/// Facts the inverse maps rely on, checked on every image:
///
/// * for `p` in `A'` with maximum `M`: `phi1(p)` ends at `2M`, its level
///   markers have `h = M` and `d_i = b_i` for `i < M`;
/// * for `p` in `C` (`n >= 2`): the first zero of `phi2(p)` is `tau - 1`,
///   `S_{l+1} = S_l - 1` iff `T_l = T_{l-1} - 1` for `1 < l < tau`, and the
///   image has exactly one interior zero.
pub fn check_theorem_invariants(n: usize, cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.check_limit(n)?;
    let cap = cfg.counterexample_cap;
    let merge = |(ta, ca): (Tally, u64), (tb, cb): (Tally, u64)| (ta.merge(tb), ca + cb);

    let (first, first_count) = sweep(
        n,
        SetId::APrime,
        cfg,
        |paths| {
            let mut tally = Tally::new(cap);
            let mut count = 0u64;
            for p in paths {
                count += 1;
                if let Err(detail) = first_pair_invariants(&p) {
                    tally.fail(&p, detail);
                }
            }
            (tally, count)
        },
        merge,
    );

    let (second, second_count) = if n >= 2 {
        sweep(
            n,
            SetId::C,
            cfg,
            |paths| {
                let mut tally = Tally::new(cap);
                let mut count = 0u64;
                for p in paths {
                    count += 1;
                    if let Err(detail) = second_pair_invariants(&p) {
                        tally.fail(&p, detail);
                    }
                }
                (tally, count)
            },
            merge,
        )
    } else {
        (Tally::new(cap), 0)
    };

    let notes = vec![
        format!("{first_count} paths in Aprime checked"),
        format!("{second_count} paths in C checked"),
    ];
    let total = BigUint::from(first_count + second_count);
    Ok(first
        .merge(second)
        .into_report(n, "theorems", total.clone(), total, notes))
}

fn first_pair_invariants(p: &Path) -> std::result::Result<(), String> {
    let valleys = decompose_valleys(p).map_err(|e| e.to_string())?;
    let image = phi1(p).map_err(|e| e.to_string())?;
    if image.terminal() != 2 * valleys.max as i32 {
        return Err(format!("image ends at {}, expected {}", image.terminal(), 2 * valleys.max));
    }
    let ascents = decompose_ascents(&image).map_err(|e| e.to_string())?;
    if ascents.h != valleys.max {
        return Err(format!("h = {} but M = {}", ascents.h, valleys.max));
    }
    for i in 0..valleys.max {
        if ascents.d(i) != valleys.b(i) {
            return Err(format!("d_{i} = {} but b_{i} = {}", ascents.d(i), valleys.b(i)));
        }
    }
    Ok(())
}

fn second_pair_invariants(p: &Path) -> std::result::Result<(), String> {
    let tau = first_return_to_one(p).ok_or("no return to height one")?;
    let image = phi2(p).map_err(|e| e.to_string())?;
    let nu = first_zero(&image).ok_or("image never touches zero")?;
    if nu + 1 != tau {
        return Err(format!("nu = {nu} but tau = {tau}"));
    }
    for l in 2..tau {
        let descends = p.at(l + 1) == p.at(l) - 1;
        let image_descended = image.at(l) == image.at(l - 1) - 1;
        if descends != image_descended {
            return Err(format!("descent equivalence fails at l = {l}"));
        }
    }
    if zero_touch_count(&image) != 1 {
        return Err(format!("image has {} interior zeros", zero_touch_count(&image)));
    }
    Ok(())
}

/// A named group of checks, as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Bijection1,
    Bijection2,
    Counts,
    Catalan,
    Theorems,
    All,
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Check> {
        Ok(match s {
            "bijection1" => Check::Bijection1,
            "bijection2" => Check::Bijection2,
            "counts" => Check::Counts,
            "catalan" => Check::Catalan,
            "theorems" => Check::Theorems,
            "all" => Check::All,
            other => return Err(Error::Syntax(format!("unknown check {other:?}"))),
        })
    }
}

/// Runs a check group at size `n`. `bijection1` covers both `A' <-> B'` and
/// the sign extension `A <-> B`; `catalan` treats `n` as the upper bound.
/// Checks undefined at this `n` (`bijection2` and `catalan` at `n = 1`) are
/// skipped by `all` and rejected when asked for directly.
pub fn run_check(check: Check, n: usize, cfg: &VerifyConfig) -> Result<Vec<VerifyReport>> {
    let mut reports = Vec::new();
    let wants = |c: Check| check == c || check == Check::All;
    if wants(Check::Bijection1) {
        reports.push(check_bijection(n, Bijection::Phi1, SetId::APrime, SetId::BPrime, cfg)?);
        reports.push(check_bijection(n, Bijection::Phi1Full, SetId::A, SetId::B, cfg)?);
    }
    if wants(Check::Bijection2) && (check == Check::Bijection2 || n >= 2) {
        reports.push(check_bijection(n, Bijection::Phi2, SetId::C, SetId::D, cfg)?);
    }
    if wants(Check::Counts) {
        reports.push(check_counts(n, cfg)?);
    }
    if wants(Check::Catalan) && (check == Check::Catalan || n >= 2) {
        reports.push(check_catalan_identity(n)?);
    }
    if wants(Check::Theorems) {
        reports.push(check_theorem_invariants(n, cfg)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> VerifyConfig {
        VerifyConfig::default()
    }

    #[test]
    fn bijection_examples() {
        let r = check_bijection(3, Bijection::Phi1, SetId::APrime, SetId::BPrime, &cfg()).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!((r.domain_size.clone(), r.image_size.clone()), (10u32.into(), 10u32.into()));
        let r = check_bijection(4, Bijection::Phi2, SetId::C, SetId::D, &cfg()).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.domain_size, 5u32.into());
        let r = check_bijection(1, Bijection::Phi1, SetId::APrime, SetId::BPrime, &cfg()).unwrap();
        assert!(r.passed);
        assert_eq!(r.image_size, 1u32.into());
        assert_eq!(
            check_bijection(1, Bijection::Phi2, SetId::C, SetId::D, &cfg()).unwrap_err(),
            Error::NTooSmall { map: "phi2", n: 1 }
        );
    }

    #[test]
    fn wrong_codomain_is_reported() {
        // phi1 does not map A' onto A.
        let r = check_bijection(3, Bijection::Phi1, SetId::APrime, SetId::A, &cfg()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.counterexamples.len(), 10);
        assert!(r.failures > 10);
    }

    #[test]
    fn corrupted_output_flips_the_verdict() {
        let target: Path = "(0,1,0,1,0,1,0)".parse().unwrap();
        let forward = |p: &Path| {
            let image = phi1(p)?;
            if *p == target {
                // Send the target where row 1 goes, creating a collision.
                return Ok("(0,1,2,3,4,5,6)".parse().unwrap());
            }
            Ok(image)
        };
        let r = check_bijection_with(
            3,
            "mutant",
            SetId::APrime,
            SetId::BPrime,
            forward,
            |q: &Path| crate::bijections::psi1(q),
            &cfg(),
        )
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.image_size, 9u32.into());
        let details: Vec<&str> = r.counterexamples.iter().map(|c| c.detail.as_str()).collect();
        assert!(details.iter().any(|d| d.contains("hit more than once")), "{r}");
        assert!(details.iter().any(|d| d.contains("never hit")), "{r}");
        assert!(details.iter().any(|d| d.starts_with("inverse of image")), "{r}");
    }

    #[test]
    fn count_examples() {
        let r = check_counts(3, &cfg()).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.notes.contains(&"A: enumerated 20, formula 20".to_string()));
        assert!(r.notes.contains(&"Aprime: enumerated 10, formula 10".to_string()));
        assert!(r.notes.contains(&"C: enumerated 2, formula 2".to_string()));
        assert!(r.notes.contains(&"D: enumerated 2, formula 2".to_string()));
        let r = check_counts(1, &cfg()).unwrap();
        assert!(r.passed && r.notes.contains(&"D: enumerated 0, formula 0".to_string()));
        let r = check_counts(4, &cfg()).unwrap();
        assert!(r.notes.contains(&"C: enumerated 5, formula 5".to_string()));
        assert!(r.notes.contains(&"D: enumerated 5, formula 5".to_string()));
    }

    #[test]
    fn catalan_examples() {
        let r = check_catalan_identity(4).unwrap();
        assert!(r.passed);
        assert_eq!(r.notes.last().unwrap(), "n=4: 5");
        // |C_1||C_3| + |C_2||C_2| + |C_3||C_1| = 2 + 1 + 2.
        assert_eq!(single_touch_count(4), BigUint::from(5u32));
        assert_eq!(check_catalan_identity(2).unwrap().notes, vec!["n=2: 1".to_string()]);
        assert!(check_catalan_identity(30).unwrap().passed);
        assert!(check_catalan_identity(1).is_err());
    }

    #[test]
    fn theorem_examples() {
        let r = check_theorem_invariants(3, &cfg()).unwrap();
        assert!(r.passed);
        assert_eq!(r.notes[0], "10 paths in Aprime checked");
        let r = check_theorem_invariants(4, &cfg()).unwrap();
        assert!(r.passed && r.notes[1] == "5 paths in C checked");
        let r = check_theorem_invariants(2, &cfg()).unwrap();
        assert!(r.passed && r.notes[1] == "1 paths in C checked");
    }

    #[test]
    fn reports_do_not_depend_on_workers() {
        let single = cfg();
        for workers in [2, 5, 16] {
            let many = VerifyConfig { workers, ..cfg() };
            assert_eq!(run_check(Check::All, 5, &single).unwrap(), run_check(Check::All, 5, &many).unwrap());
            let a = check_bijection(4, Bijection::Phi1, SetId::APrime, SetId::A, &single).unwrap();
            let b = check_bijection(4, Bijection::Phi1, SetId::APrime, SetId::A, &many).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tally_merge_is_order_independent() {
        let paths: Vec<Path> = crate::sets::enumerate(3, SetId::A, 12).unwrap().collect();
        let mut x = Tally::new(3);
        let mut y = Tally::new(3);
        for (i, p) in paths.iter().enumerate() {
            if i % 2 == 0 { x.fail(p, "x") } else { y.fail(p, "y") }
        }
        let r1 = x.clone().merge(y.clone()).into_report(3, "t", 0u32.into(), 0u32.into(), vec![]);
        let r2 = y.merge(x).into_report(3, "t", 0u32.into(), 0u32.into(), vec![]);
        assert_eq!(r1, r2);
        assert_eq!(r1.failures, 20);
        assert_eq!(r1.counterexamples.len(), 3);
    }

    #[test]
    fn limit_exceeded() {
        let tight = VerifyConfig { exhaustive_limit: 3, ..cfg() };
        assert_eq!(check_counts(4, &tight).unwrap_err(), Error::LimitExceeded { n: 4, limit: 3 });
        assert!(run_check(Check::Theorems, 4, &tight).is_err());
    }

    #[test]
    fn json_report() {
        let r = check_counts(2, &cfg()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["check_name"], "counts");
        assert!(v["domain_size"].is_string());
    }
}
