//! The acceptance suite: every criterion runs in order and prints one
//! PASS/FAIL line; the process exits nonzero if any criterion fails. Runs
//! without the libtest harness so the lines always show.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subposet::extremal::{
    certify_lattice, construction_avoidance_check, find_copy_guided, find_copy_oracle, hm_certificate, la_exact,
    middle_levels, plant_staircase, SearchBudget, Verdict,
};
use subposet::lattice::{Band, Family};
use subposet::poset::{decompose, saturate, NamedPoset, Poset};
use subposet::report::{
    default_pools, random_family, verify_bad_strings, verify_density, verify_marked_chains, verify_nested,
    verify_zone_bound, Report, RunConfig,
};

use common::{all_tree_posets, binom, random_tree_poset};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn cfg(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        workers: 1,
        ..RunConfig::default()
    }
}

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn la_value(n: usize, p: &Poset, induced: bool) -> Result<usize, String> {
    let out = la_exact(n, p, induced, SearchBudget::unlimited()).map_err(|e| e.to_string())?;
    match out.verdict {
        Verdict::Found(r) => {
            let avoided = find_copy_oracle(&r.witness, p, induced, SearchBudget::unlimited()).verdict.is_absent();
            check(r.witness.len() == r.value && avoided, || format!("witness for n={n} does not avoid"))?;
            Ok(r.value)
        }
        other => Err(format!("la_exact n={n} ended {}", other.label())),
    }
}

fn sperner_values() -> Outcome {
    let start = Instant::now();
    let p2 = NamedPoset::Chain(2).build().unwrap();
    for n in 1..=4usize {
        let want = binom(n as u64, n as u64 / 2) as usize;
        for induced in [false, true] {
            let got = la_value(n, &p2, induced)?;
            check(got == want, || format!("n={n} induced={induced}: {got} != {want}"))?;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok("chain of 2, n=1..4, weak and induced".into())
}

fn erdos_value() -> Outcome {
    let start = Instant::now();
    let p3 = NamedPoset::Chain(3).build().unwrap();
    let got = la_value(4, &p3, false)?;
    let want = (binom(4, 2) + binom(4, 1)) as usize;
    check(got == want, || format!("{got} != {want}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("chain of 3 at n=4 weak = {got}"))
}

fn marked_chain_reports(seed: u64) -> Result<Vec<Report>, String> {
    let mut out = Vec::new();
    for n in 3..=7 {
        for k in [2, 3] {
            out.push(verify_marked_chains(n, k, 100, &cfg(seed)).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn counting_identity(reports: &[Report], elapsed: Duration) -> Outcome {
    let mut families = 0;
    for r in reports {
        let matches = r.summary["identity_matches"].as_u64().unwrap_or(0);
        check(r.rows.len() >= 100 && matches == r.rows.len() as u64, || {
            format!("{}: {matches}/{} matches", r.params, r.rows.len())
        })?;
        families += r.rows.len();
    }
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{families} families over n=3..7, k=2,3, all equal"))
}

fn density_bound() -> Outcome {
    let start = Instant::now();
    let (mut asserted, mut total) = (0, 0);
    for n in 3..=7 {
        for k in [2, 3] {
            for eps in [rational(1, 2), rational(1, 1)] {
                let r = verify_density(n, k, &eps, 40, &cfg(11)).map_err(|e| e.to_string())?;
                check(r.passed, || format!("n={n} k={k} eps={eps}: a family meets the hypothesis but not the bound"))?;
                asserted += r.summary["hypothesis_met"].as_u64().unwrap_or(0);
                total += r.rows.len();
            }
        }
    }
    check(asserted > 0, || "no sampled family met the hypothesis".into())?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{asserted} of {total} families met the hypothesis, all satisfy the bound"))
}

fn lym_consistency(reports: &[Report]) -> Outcome {
    let mut families = 0;
    for r in reports {
        let ok = r.summary["lym_matches"].as_u64().unwrap_or(0);
        check(ok == r.rows.len() as u64, || format!("{}: {ok}/{} consistent", r.params, r.rows.len()))?;
        families += r.rows.len();
    }
    Ok(format!("{families} families, exact rational equality"))
}

fn zone_reports(seed: u64) -> Result<Vec<Report>, String> {
    let mut out = Vec::new();
    for n in [6, 9, 12, 15, 18, 21, 24] {
        for s in [1, 3, 5] {
            out.push(verify_zone_bound(n, s, 10, &cfg(seed)).map_err(|e| e.to_string())?);
        }
    }
    for n in [512, 2048, 8192] {
        for s in [1, 3, 5] {
            let c = RunConfig {
                trials: 10_000,
                ..cfg(seed)
            };
            out.push(verify_zone_bound(n, s, 3, &c).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn zone_bound(reports: &[Report], elapsed: Duration) -> Outcome {
    let (mut exact, mut mc) = (0, 0);
    for r in reports {
        check(r.passed, || format!("{}: bound violated", r.params))?;
        for row in &r.rows {
            if row["asserted"] == true {
                if row["mode"] == "exact" {
                    exact += 1;
                } else {
                    mc += 1;
                }
            }
        }
    }
    check(exact > 0 && mc > 0, || "no asserted instances".into())?;
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{exact} exact and {mc} Monte Carlo instances within the bound"))
}

fn bad_string_bound() -> Outcome {
    let start = Instant::now();
    let mut rows = 0;
    for n in [512, 2048] {
        let c = RunConfig {
            trials: 10_000,
            ..cfg(5)
        };
        let r = verify_bad_strings(n, 1, 2, &c).map_err(|e| e.to_string())?;
        check(r.passed, || format!("n={n}: {}", r.summary))?;
        rows += r.rows.len();
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{rows} position sets, p=1,2, n=512,2048"))
}

fn nested_reports(seed: u64) -> Result<Vec<Report>, String> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 3..=5 {
        let families = [
            Family::all(n).unwrap(),
            random_family(n, (0.5, 0.9), &mut rng).map_err(|e| e.to_string())?,
        ];
        for h in [2, 3] {
            for (i, f) in families.iter().enumerate() {
                let band = Band::central(n);
                let pools = default_pools(f, &band, 3, seed + i as u64).map_err(|e| e.to_string())?;
                out.push(verify_nested(f, &pools, 2, h, &rational(1, 2), &cfg(seed)).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn nested_structure(reports: &[Report], elapsed: Duration) -> Outcome {
    let (mut runs, mut pairs, mut size_bound) = (0, 0, 0);
    for r in reports {
        check(r.passed, || format!("{}: a run failed the initial, shrink or goodness check", r.params))?;
        runs += r.rows.len();
        pairs += r.summary["goodness_pairs_checked"].as_u64().unwrap_or(0);
        size_bound += r.summary["size_bound_holds_iterations"].as_u64().unwrap_or(0);
    }
    check(pairs > 0, || "goodness was never exercised".into())?;
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{runs} runs, {pairs} goodness pairs checked, size bound held in {size_bound} iterations (reported)"))
}

fn guided_embedder() -> Outcome {
    let y = Poset::from_relations(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
    let patterns = [
        ("chain2", NamedPoset::Chain(2).build().unwrap()),
        ("chain3", NamedPoset::Chain(3).build().unwrap()),
        ("fork2", NamedPoset::Fork(2).build().unwrap()),
        ("saturated-y", saturate(&y).unwrap()),
    ];
    let mut instances = 0;
    for (name, h) in &patterns {
        for n in 8..=14 {
            let start = Instant::now();
            let fam = middle_levels(n, h.height()).unwrap();
            let band = Band::central(n);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let out = find_copy_guided(&fam, h, &band, SearchBudget::default(), &mut rng).map_err(|e| e.to_string())?;
            let e = out.verdict.found().ok_or_else(|| format!("{name} n={n}: {}", out.verdict.label()))?;
            let certified = certify_lattice(h, e.assignment().to_vec());
            check(certified.is_some_and(|c| c.is_induced()), || format!("{name} n={n}: embedding not induced"))?;
            check(e.assignment().iter().all(|v| fam.contains(*v)), || format!("{name} n={n}: image outside F"))?;
            if n <= 10 {
                let o = find_copy_oracle(&fam.restrict(&band), h, true, SearchBudget::unlimited());
                check(o.verdict.found().is_some(), || format!("{name} n={n}: oracle disagrees"))?;
            }
            within(start, Duration::from_secs(10)).map_err(|e| format!("{name} n={n}: {e}"))?;
            instances += 1;
        }
    }
    Ok(format!("{instances} instances found and validated, oracle agrees for n <= 10"))
}

fn lower_bound_construction() -> Outcome {
    let start = Instant::now();
    let corpus: Vec<Poset> = (2..=6)
        .flat_map(|m| all_tree_posets(m, |p| p.height() >= 2 && p.is_saturated(p.height())))
        .collect();
    let mut checks = 0;
    for h in &corpus {
        for n in 3..=10 {
            let t = h.height() - 1;
            if t > n + 1 {
                continue;
            }
            let avoided = construction_avoidance_check(n, h, t, SearchBudget::default()).map_err(|e| e.to_string())?;
            check(avoided, || format!("n={n}: middle levels contain {}", h.to_json()))?;
            checks += 1;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{} saturated tree posets, {checks} checks at n=3..10", corpus.len()))
}

fn staircase_separation() -> Outcome {
    let start = Instant::now();
    for m in 2..=4 {
        let hm = NamedPoset::Staircase(m).build().unwrap();
        for n in [6, 8, 10] {
            let fam = middle_levels(n, m - 1).unwrap();
            let out = find_copy_oracle(&fam, &hm, true, SearchBudget::unlimited());
            check(out.verdict.is_absent(), || format!("m={m} n={n}: {}", out.verdict.label()))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut planted = 0;
    for m in 2..=4 {
        let hm = NamedPoset::Staircase(m).build().unwrap();
        for n in 2 * m..=8 {
            for _ in 0..10 {
                let copy = plant_staircase(n, m, &mut rng).map_err(|e| e.to_string())?;
                let e = certify_lattice(&hm, copy).filter(|e| e.is_induced()).ok_or("planted copy not induced")?;
                let cert = hm_certificate(&e, m).map_err(|e| e.to_string())?;
                check(cert.holds && cert.spread >= m as i64 - 1, || format!("m={m} n={n}: spread {}", cert.spread))?;
                planted += 1;
            }
        }
    }
    check(planted >= 50, || format!("only {planted} planted copies"))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("no copy in m-1 middle levels for m=2..4, n=6,8,10; {planted} planted certificates hold"))
}

fn saturation_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tested = 0;
    while tested < 150 {
        let p = random_tree_poset(&mut rng, 8);
        let k = p.height();
        if k < 2 {
            continue;
        }
        let s = saturate(&p).map_err(|e| format!("{}: {e}", p.to_json()))?;
        check(s.is_saturated(k) && s.height() == k, || format!("{}: not saturated", p.to_json()))?;
        check(s.hasse_is_tree(), || format!("{}: Hasse not a tree", p.to_json()))?;
        let copy = (0..p.len()).all(|a| (0..p.len()).all(|b| s.less(a, b) == p.less(a, b)));
        check(copy && s.len() - p.len() <= k * p.len(), || format!("{}: lost induced copy", p.to_json()))?;
        let steps = decompose(&s).map_err(|e| format!("{}: {e}", s.to_json()))?;
        for st in &steps {
            let r = &st.remaining_poset;
            check(r.is_saturated(k) && r.hasse_is_tree(), || format!("{}: bad intermediate", s.to_json()))?;
        }
        let last = steps.last().map_or(s.clone(), |st| st.remaining_poset.clone());
        check(last.is_chain() && last.len() == k, || format!("{}: does not end in a {k}-chain", s.to_json()))?;
        tested += 1;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{tested} random tree posets"))
}

fn reproducibility() -> Outcome {
    let seed = 99;
    let render = |rs: Vec<Report>| rs.iter().map(Report::to_json).collect::<Vec<_>>();
    let a = render(marked_chain_reports(seed)?);
    let b = render(marked_chain_reports(seed)?);
    check(a == b, || "marked-chain reports differ".into())?;
    let a = render(zone_reports(seed)?);
    let b = render(zone_reports(seed)?);
    check(a == b, || "zone reports differ".into())?;
    let a = render(nested_reports(seed)?);
    let b = render(nested_reports(seed)?);
    check(a == b, || "nested reports differ".into())?;
    Ok("two runs each of the marked-chain, zone and nested reports are byte-identical".into())
}

fn main() {
    let timed = |f: &dyn Fn() -> Result<Vec<Report>, String>| {
        let start = Instant::now();
        f().map(|r| (r, start.elapsed()))
    };
    let chains = timed(&|| marked_chain_reports(7));
    let zones = timed(&|| zone_reports(7));
    let nested = timed(&|| nested_reports(7));

    let via = |r: &Result<(Vec<Report>, Duration), String>, f: &dyn Fn(&[Report], Duration) -> Outcome| match r {
        Ok((reports, t)) => f(reports, *t),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("Sperner golden values", sperner_values()),
        ("Erdos golden value", erdos_value()),
        ("marked-chain counting identity", via(&chains, &counting_identity)),
        ("marked-chain density bound", density_bound()),
        ("LYM consistency", via(&chains, &|r, _| lym_consistency(r))),
        ("forbidden-zone probability bound", via(&zones, &zone_bound)),
        ("bad-string probability bound", bad_string_bound()),
        ("nested-family structure", via(&nested, &nested_structure)),
        ("guided induced embedder", guided_embedder()),
        ("middle-levels lower-bound construction", lower_bound_construction()),
        ("staircase separation", staircase_separation()),
        ("saturation and decomposition round trip", saturation_round_trip()),
        ("reproducibility", reproducibility()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", results.len());
}
