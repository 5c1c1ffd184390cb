//! Property suites over the fixtures and seeded random instances.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::checks::{self, Report};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::format::serialize;
use crate::marking::MarkedGGraph;
use crate::moves::to_reduced;
use crate::norms::NormKind;
use crate::random::instances;
use crate::star::{self, Family, Outcome, RetractOptions, Star};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Norms,
    Lemmas,
    Star,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "norms" => Ok(Suite::Norms),
            "lemmas" => Ok(Suite::Lemmas),
            "star" => Ok(Suite::Star),
            "all" => Ok(Suite::All),
            _ => Err(Error::Unknown { kind: "suite", name: s.to_string() }),
        }
    }
}

/// Outcome of one check over the whole corpus.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub report: Report,
    /// Serialized smallest failing instance.
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let status = if self.report.ok() { "PASS" } else { "FAIL" };
        format!(
            "{status} {:<22} checked={} skipped={} failures={} notes={}",
            self.name,
            self.report.checked,
            self.report.skipped,
            self.report.failures.len(),
            self.report.notes.len()
        )
    }
}

/// The fixtures followed by `count` random instances from `seed`.
pub fn corpus(seed: u64, count: usize) -> Result<Vec<(String, MarkedGGraph)>> {
    let mut out: Vec<(String, MarkedGGraph)> =
        fixtures::all().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
    for (i, m) in instances(seed, count)?.into_iter().enumerate() {
        out.push((format!("random-{seed}-{i}"), m));
    }
    Ok(out)
}

/// Instance size used to pick the smallest witness.
fn size(m: &MarkedGGraph) -> (usize, usize, usize) {
    let g = m.graph();
    (g.edge_count(), g.group().order(), serialize(m).len())
}

/// Runs one check on every instance in parallel; errors count as failures.
pub fn run_check<F>(name: &'static str, items: &[(String, MarkedGGraph)], check: F) -> CheckResult
where
    F: Fn(&MarkedGGraph, u64) -> Result<Report> + Sync,
{
    let results: Vec<(usize, Report)> = items
        .par_iter()
        .enumerate()
        .map(|(i, (label, m))| {
            let mut r = check(m, i as u64).unwrap_or_else(|e| Report { failures: vec![e.to_string()], ..Report::default() });
            for f in &mut r.failures {
                *f = format!("{label}: {f}");
            }
            (i, r)
        })
        .collect();
    let mut report = Report::default();
    let mut worst: Option<usize> = None;
    for (i, r) in results {
        if !r.ok() && worst.is_none_or(|w| size(&items[i].1) < size(&items[w].1)) {
            worst = Some(i);
        }
        report.merge(r);
    }
    CheckResult { name, report, witness: worst.map(|i| serialize(&items[i].1)) }
}

/// Reduced instances with a star check: families nest, `S(R)` is acyclic
/// and the retractions reach a single forest.
pub fn star_check(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let mut r = Report::default();
    let reduced = to_reduced(m)?;
    let s = match Star::new(&reduced, horizon) {
        Ok(s) => s,
        Err(Error::Indeterminate { message, .. }) => {
            r.skipped += 1;
            r.notes.push(message);
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let rr = s.family(Family::R)?;
    if rr == 0 {
        r.skipped += 1;
        return Ok(r);
    }
    let c0 = s.family(Family::C0)?;
    let c0p = s.family(Family::C0p)?;
    let c1 = s.family(Family::C1)?;
    let nested = c0 & !c0p == 0 && c0p & !c1 == 0 && c1 & !rr == 0;
    r.checked += 1;
    if !nested {
        r.failures.push("families do not nest".into());
    }
    let betti = star::reduced_homology(&s.star_complex(rr)?.complex)?;
    r.checked += 1;
    if betti.is_empty() || betti.iter().any(|&b| b != 0) {
        r.failures.push(format!("S(R) has reduced Betti numbers {betti:?}"));
    }
    match star::run_retractions(&s, RetractOptions::default()) {
        Ok(t) => match t.outcome {
            Outcome::Point(_) => r.checked += 1,
            Outcome::OutOfScope(why) => {
                r.skipped += 1;
                r.notes.push(why);
            }
            Outcome::Empty => r.failures.push("retraction saw an empty S(R)".into()),
        },
        Err(e) => {
            r.checked += 1;
            r.failures.push(e.to_string());
        }
    }
    Ok(r)
}

/// Runs a suite over the fixtures and `count` random instances.
pub fn run(suite: Suite, seed: u64, horizon: usize, count: usize) -> Result<Vec<CheckResult>> {
    let items = corpus(seed, count)?;
    let h = horizon;
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Norms) {
        out.push(run_check("norm-consistency", &items, |m, _| checks::norm_consistency(m, h)));
        out.push(run_check("inclusion-exclusion", &items, |m, i| {
            checks::inclusion_exclusion(m, h, &mut ChaCha8Rng::seed_from_u64(seed ^ i), 10)
        }));
        out.push(run_check("coset-identity", &items, |m, i| {
            checks::coset_identity(m, h, &mut ChaCha8Rng::seed_from_u64(seed ^ i))
        }));
        out.push(run_check("norm-change-law", &items, |m, _| checks::norm_change_law(m, h)));
        out.push(run_check("blow-up", &items, |m, _| checks::blow_up_correspondence(m, h)));
    }
    if want(Suite::Lemmas) {
        let reduced: Vec<(String, MarkedGGraph)> = items
            .iter()
            .map(|(n, m)| Ok((n.clone(), to_reduced(m)?)))
            .collect::<Result<_>>()?;
        out.push(run_check("crossing", &items, |m, _| checks::crossing_inequalities(m, h)));
        for (name, kind) in [("pushing-shrinking-aut", NormKind::Aut), ("pushing-shrinking-tot", NormKind::Tot)] {
            out.push(run_check(name, &reduced, move |m, _| checks::pushing_shrinking(m, h, kind)));
        }
        out.push(run_check("invertible-symmetry", &reduced, |m, _| checks::invertible_symmetry(m, h)));
        out.push(run_check("out-nonvanishing", &reduced, |m, _| checks::out_reductivity_nonzero(m, h)));
        for (name, kind) in [("conjugation-aut", NormKind::Aut), ("conjugation-tot", NormKind::Tot)] {
            out.push(run_check(name, &reduced, move |m, _| checks::conjugation_edge(m, h, kind)));
        }
        out.push(run_check("descent", &items, |m, _| checks::descent(m, h, 500)));
    }
    if want(Suite::Star) {
        out.push(run_check("star", &items, |m, _| star_check(m, h)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_small_corpus() {
        for r in run(Suite::All, 1, 3, 4).unwrap() {
            assert!(r.report.ok(), "{}: {:?}", r.name, r.report.failures);
            assert!(r.witness.is_none());
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("lemmas".parse::<Suite>().unwrap(), Suite::Lemmas);
        assert!("bogus".parse::<Suite>().is_err());
    }
}
