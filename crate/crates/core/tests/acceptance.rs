//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use auter_core::checks::{self, Report};
use auter_core::format::serialize;
use auter_core::moves::to_reduced;
use auter_core::random::{instances, GeneratorConfig, InstanceGenerator, SmallGroup};
use auter_core::selftest::star_check;
use auter_core::{fixtures, greedy_reduce, MarkedGGraph, NormKind, Norms, Result};

const SEED: u64 = 0xacce;
/// Horizon for the fixtures and for random instances.
const H_FIX: usize = 5;
const H_RAND: usize = 4;
const DRAWS: usize = 1000;
const NORM_BUDGET: Duration = Duration::from_secs(60);
const STAR_BUDGET: Duration = Duration::from_secs(120);

struct Line {
    ok: bool,
    detail: String,
}

fn fixtures() -> Vec<MarkedGGraph> {
    fixtures::all().into_iter().map(|(_, m)| m).collect()
}

fn random(count: usize, salt: u64) -> Vec<MarkedGGraph> {
    instances(SEED ^ salt, count).expect("random instances")
}

/// Random instances over nontrivial groups, where star complexes are richer.
fn random_nontrivial(count: usize, salt: u64) -> Vec<MarkedGGraph> {
    let cfg = GeneratorConfig {
        groups: SmallGroup::ALL[1..].to_vec(),
        ..GeneratorConfig::default()
    };
    let mut gen = InstanceGenerator::new(SEED ^ salt, cfg);
    (0..count).map(|_| gen.next_instance()).collect()
}

fn reduced(ms: &[MarkedGGraph]) -> Vec<MarkedGGraph> {
    ms.iter().map(|m| to_reduced(m).expect("reduce")).collect()
}

fn gather(items: &[(MarkedGGraph, usize)], check: impl Fn(&MarkedGGraph, usize) -> Result<Report>) -> Report {
    let mut r = Report::default();
    for (m, h) in items {
        match check(m, *h) {
            Ok(x) => r.merge(x),
            Err(e) => r.failures.push(format!("{e}")),
        }
    }
    r
}

fn with_h(ms: Vec<MarkedGGraph>, h: usize) -> Vec<(MarkedGGraph, usize)> {
    ms.into_iter().map(|m| (m, h)).collect()
}

fn fixtures_and_random(count: usize, salt: u64) -> Vec<(MarkedGGraph, usize)> {
    let mut v = with_h(fixtures(), H_FIX);
    v.extend(with_h(random(count, salt), H_RAND));
    v
}

fn summary(r: &Report) -> String {
    let mut s = format!("checked={} skipped={} failures={}", r.checked, r.skipped, r.failures.len());
    if let Some(f) = r.failures.first() {
        s.push_str(&format!(" first: {f}"));
    }
    s
}

fn from_report(r: Report) -> Line {
    Line { ok: r.ok() && r.checked > 0, detail: summary(&r) }
}

fn norm_consistency() -> Line {
    let t = Instant::now();
    let r = gather(&fixtures_and_random(100, 1), checks::norm_consistency);
    let el = t.elapsed();
    Line {
        ok: r.ok() && r.checked == 2 * 104 && el < NORM_BUDGET,
        detail: format!("{} in {:.1}s", summary(&r), el.as_secs_f64()),
    }
}

fn inclusion_exclusion() -> Line {
    // 4 fixtures x 100 draws + 60 random instances x 10 draws.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut r = Report::default();
    let mut draws = 0;
    for m in fixtures() {
        r.merge(checks::inclusion_exclusion(&m, H_FIX, &mut rng, 100).unwrap());
        draws += 100;
    }
    for m in random(60, 2) {
        r.merge(checks::inclusion_exclusion(&m, H_RAND, &mut rng, 10).unwrap());
        draws += 10;
    }
    let aut = r.notes.iter().filter(|n| n.starts_with("aut identity fails")).count();
    Line {
        ok: r.ok() && draws == DRAWS && aut > 0,
        detail: format!("{} draws={draws} aut-counterexamples={aut}", summary(&r)),
    }
}

fn coset_identity() -> Line {
    let rng = ChaCha8Rng::seed_from_u64(SEED);
    from_report(gather(&with_h(fixtures(), H_FIX), |m, h| checks::coset_identity(m, h, &mut rng.clone())))
}

fn norm_change_law() -> Line {
    from_report(gather(&fixtures_and_random(50, 4), checks::norm_change_law))
}

fn blow_up() -> Line {
    from_report(gather(&with_h(fixtures(), H_FIX), checks::blow_up_correspondence))
}

fn crossing() -> Line {
    from_report(gather(&fixtures_and_random(50, 6), checks::crossing_inequalities))
}

fn pushing_shrinking() -> Line {
    let mut items = with_h(reduced(&fixtures()), H_FIX);
    items.extend(with_h(reduced(&random(100, 7)), H_RAND));
    items.extend(with_h(reduced(&random_nontrivial(50, 7)), H_RAND));
    let mut r = Report::default();
    let mut witness: Option<&MarkedGGraph> = None;
    for kind in [NormKind::Aut, NormKind::Tot] {
        for (m, h) in &items {
            let x = checks::pushing_shrinking(m, *h, kind).unwrap_or_else(|e| Report {
                failures: vec![e.to_string()],
                ..Report::default()
            });
            if !x.ok() && witness.is_none_or(|w| m.graph().edge_count() < w.graph().edge_count()) {
                witness = Some(m);
            }
            r.merge(x);
        }
    }
    let mut line = from_report(r);
    if let Some(w) = witness {
        let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("pushing-shrinking-witness.txt");
        std::fs::write(&path, serialize(w)).expect("write witness");
        line.detail.push_str(&format!(" witness={}", path.display()));
    }
    line
}

fn invertible_and_conjugation() -> Line {
    let mut items = with_h(reduced(&fixtures()), H_FIX);
    items.extend(with_h(reduced(&random(100, 8)), H_RAND));
    items.extend(with_h(reduced(&random_nontrivial(50, 8)), H_RAND));
    let mut r = gather(&items, checks::invertible_symmetry);
    r.merge(gather(&items, |m, h| checks::conjugation_edge(m, h, NormKind::Tot)));
    from_report(r)
}

fn descent() -> Line {
    let mut items = fixtures_and_random(100, 9);
    items.extend(with_h(random_nontrivial(50, 9), H_RAND));
    let r = gather(&items, |m, h| checks::descent(m, h, 500));
    let rose = (|| -> Result<(bool, String)> {
        let red = greedy_reduce(&fixtures::r2w(), H_FIX, 500)?;
        let out = Norms::new(&red.result, 1)?.norm(NormKind::Out)?;
        let is_rose = red.result.graph().vertex_count() == 1;
        Ok((is_rose && out.coords == [1, 1, 1, 1], format!("R2W -> {} steps, out h=1 {:?}", red.log.len(), out.coords)))
    })();
    let (rose_ok, rose_detail) = rose.unwrap_or_else(|e| (false, e.to_string()));
    Line { ok: r.ok() && r.checked > 0 && rose_ok, detail: format!("{} {rose_detail}", summary(&r)) }
}

fn star() -> Line {
    let mut items = with_h(fixtures(), H_RAND);
    items.extend(with_h(random(200, 10), H_RAND));
    items.extend(with_h(random_nontrivial(100, 10), H_RAND));
    let mut r = Report::default();
    let mut slowest = Duration::ZERO;
    for (m, h) in &items {
        let t = Instant::now();
        match star_check(m, *h) {
            Ok(x) => r.merge(x),
            Err(e) => r.failures.push(e.to_string()),
        }
        slowest = slowest.max(t.elapsed());
    }
    Line {
        ok: r.ok() && r.checked > 0 && slowest < STAR_BUDGET,
        detail: format!("{} slowest={:.2}s", summary(&r), slowest.as_secs_f64()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Line); 10] = [
        ("norm consistency", norm_consistency),
        ("inclusion-exclusion", inclusion_exclusion),
        ("coset identity", coset_identity),
        ("norm-change law", norm_change_law),
        ("blow-up correspondence", blow_up),
        ("crossing inequalities", crossing),
        ("pushing and shrinking", pushing_shrinking),
        ("invertible symmetry and conjugating edge", invertible_and_conjugation),
        ("descent and termination", descent),
        ("star contractibility", star),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let line = run();
        let status = if line.ok { "PASS" } else { "FAIL" };
        if !line.ok {
            failed += 1;
        }
        println!("criterion {} {name}: {status} ({}; {:.1}s)", i + 1, line.detail, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
