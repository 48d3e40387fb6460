//! Run configuration, verification drivers and report emission.
//!
//! Every driver returns a [`Report`]: the effective configuration, the
//! parameters, one row per checked instance and a summary. JSON is the
//! canonical form; CSV flattens rows with dotted column names. Reports carry
//! no timing unless asked, so equal seeds and configurations give identical
//! bytes.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::chains::{
    count_marked_chains, count_marked_chains_oracle, density_check, lym_sum, marker_histogram, to_rational,
};
use crate::error::{Error, Result};
use crate::lattice::{factorial, Band, Direction, Family, LevelOracle, Vertex, WideSet};
use crate::nested::{
    bad_string_prob_mc, build_nested, gamma, verify_goodness, zone_hit_prob, NestedConfig, SwapWitness, ZoneMode,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Effective settings of a run, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 1 is the reproducibility mode.
    pub workers: usize,
    pub trials: u64,
    /// Largest `n` whose full chains get enumerated.
    pub chain_cap: usize,
    /// Largest number of k-chains walked when counting marked chains.
    pub kchain_budget: u64,
    /// Largest number of free elements for exact zone probabilities.
    pub exact_cap: usize,
    pub witness_budget: u64,
    /// Overrides the central band when set.
    pub band: Option<Band>,
    pub node_limit: Option<u64>,
    pub time_limit_ms: Option<u64>,
    pub format: Format,
    /// Adds `elapsed_ms` to reports; off by default to keep output stable.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            trials: 10_000,
            chain_cap: crate::lattice::DEFAULT_CHAIN_CAP,
            kchain_budget: crate::chains::DEFAULT_KCHAIN_BUDGET,
            exact_cap: 16,
            witness_budget: crate::nested::DEFAULT_WITNESS_BUDGET,
            band: None,
            node_limit: None,
            time_limit_ms: None,
            format: Format::Json,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn band_for(&self, n: usize) -> Band {
        self.band.unwrap_or_else(|| Band::central(n))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Runs `f` on a dedicated pool of `workers` threads.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::Param(format!("cannot start workers: {e}")))?;
        Ok(pool.install(f))
    }

    pub fn search_budget(&self) -> crate::extremal::SearchBudget {
        let mut b = crate::extremal::SearchBudget::default();
        if let Some(l) = self.node_limit {
            b.node_limit = Some(l);
        }
        if let Some(t) = self.time_limit_ms {
            b.time_limit = Some(std::time::Duration::from_millis(t));
        }
        b
    }
}

/// A finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub params: Value,
    pub rows: Vec<Value>,
    pub summary: Value,
    /// Whether every assertable row passed.
    pub passed: bool,
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": "subposet",
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "params": self.params,
            "summary": self.summary,
            "passed": self.passed,
            "rows": self.rows,
        });
        if let Some(ms) = self.elapsed_ms {
            v["elapsed_ms"] = json!(ms);
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("reports serialize") + "\n"
    }

    /// One line per row; a leading `#` line carries the command and config.
    pub fn to_csv(&self) -> Result<String> {
        let flat: Vec<Map<String, Value>> = self.rows.iter().map(flatten).collect();
        let mut columns: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        for row in &flat {
            for key in row.keys() {
                if seen.insert(key.clone()) {
                    columns.push(key.clone());
                }
            }
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&columns)?;
        for row in &flat {
            writer.write_record(columns.iter().map(|c| match row.get(c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(other) => other.to_string(),
            }))?;
        }
        let body = String::from_utf8(writer.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("csv output is utf-8");
        Ok(format!(
            "# subposet {VERSION} {} config={} passed={}\n{body}",
            self.command,
            serde_json::to_string(&self.config)?,
            self.passed
        ))
    }

    pub fn render(&self) -> Result<String> {
        match self.config.format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Nested objects become dotted keys; arrays stay as JSON text.
fn flatten(v: &Value) -> Map<String, Value> {
    fn walk(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(_) => {
                out.insert(prefix.to_string(), Value::String(v.to_string()));
            }
            other => {
                out.insert(prefix.to_string(), other.clone());
            }
        }
    }
    let mut out = Map::new();
    walk("", v, &mut out);
    out
}

fn finish(command: &str, cfg: &RunConfig, params: Value, rows: Vec<Value>, summary: Value, passed: bool, start: Instant) -> Report {
    Report {
        command: command.to_string(),
        config: cfg.clone(),
        params,
        rows,
        summary,
        passed,
        elapsed_ms: cfg.timing.then(|| start.elapsed().as_millis()),
    }
}

/// A random family of `B_n` with each vertex kept with probability drawn
/// uniformly from `density`.
pub fn random_family<R: Rng + ?Sized>(n: usize, density: (f64, f64), rng: &mut R) -> Result<Family> {
    let p = rng.gen_range(density.0..=density.1);
    Family::new(n, (0..1u64 << n).filter(|_| rng.gen_bool(p)).map(Vertex::from_bits))
}

fn rational_value(r: &BigRational) -> Value {
    Value::String(r.to_string())
}

/// Marked-chain identity and LYM consistency on random families: the
/// k-chain count against the per-chain sum, and `lym * n!` against the
/// marker histogram.
pub fn verify_marked_chains(n: usize, k: usize, families: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    if k == 0 {
        return Err(Error::Param("k must be at least 1".into()));
    }
    let mut rng = cfg.rng();
    let corpus: Vec<Family> = (0..families)
        .map(|_| random_family(n, (0.05, 0.95), &mut rng))
        .collect::<Result<_>>()?;
    let rows: Vec<Value> = cfg.install(|| {
        corpus
            .par_iter()
            .enumerate()
            .map(|(i, f)| -> Result<Value> {
                let count = count_marked_chains(f, k, cfg.kchain_budget)?;
                let oracle = count_marked_chains_oracle(f, k, n, cfg.chain_cap)?;
                let hist = marker_histogram(f, n, cfg.chain_cap)?;
                let lym = lym_sum(f);
                let lym_scaled = &lym * to_rational(&factorial(n));
                let weighted = to_rational(&hist.weighted_sum());
                let total_ok = num_bigint::BigUint::from(hist.total()) == factorial(n);
                Ok(json!({
                    "family": i,
                    "family_size": f.len(),
                    "count": count.to_string(),
                    "oracle": oracle.to_string(),
                    "identity": count == oracle,
                    "lym_sum": rational_value(&lym),
                    "lym_times_n_factorial": rational_value(&lym_scaled),
                    "histogram_weighted_sum": rational_value(&weighted),
                    "lym_consistent": lym_scaled == weighted && total_ok,
                }))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let identity = rows.iter().filter(|r| r["identity"] == true).count();
    let lym = rows.iter().filter(|r| r["lym_consistent"] == true).count();
    let passed = identity == rows.len() && lym == rows.len();
    Ok(finish(
        "verify marked-chains",
        cfg,
        json!({ "n": n, "k": k, "families": families }),
        rows,
        json!({ "families": families, "identity_matches": identity, "lym_matches": lym }),
        passed,
        start,
    ))
}

/// Density bound on random dense families of random size: whenever the
/// size hypothesis holds, the marked-chain count reaches `(eps/k) n!`.
pub fn verify_density(n: usize, k: usize, epsilon: &BigRational, families: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    if k < 2 {
        return Err(Error::Param("the density bound needs k >= 2".into()));
    }
    if epsilon <= &BigRational::from_integer(BigInt::from(0)) {
        return Err(Error::Param("epsilon must be positive".into()));
    }
    if n > 20 {
        return Err(crate::error::size_error(format!("density sampling over B_{n}"), 20));
    }
    // Sizes from just under the hypothesis threshold up to all of B_n, so
    // most samples are asserted and many sit near the threshold.
    let total = 1usize << n;
    let threshold = (k as f64 - 1.0 + approx(epsilon)) * crate::chains::binomial(n, n / 2).to_f64().unwrap_or(f64::MAX);
    let lo = ((0.8 * threshold) as usize).min(total);
    let mut rng = cfg.rng();
    let corpus: Vec<Family> = (0..families)
        .map(|_| {
            let size = rng.gen_range(lo..=total);
            let picked = rand::seq::index::sample(&mut rng, total, size);
            Family::new(n, picked.into_iter().map(|b| Vertex::from_bits(b as u64)))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Value> = cfg.install(|| {
        corpus
            .par_iter()
            .enumerate()
            .map(|(i, f)| -> Result<Value> {
                let r = density_check(f, k, epsilon, cfg.kchain_budget)?;
                let mut v = serde_json::to_value(&r)?;
                v["family"] = json!(i);
                v["lym_sum"] = rational_value(&lym_sum(f));
                v["asserted"] = json!(r.hypothesis_met);
                v["ok"] = json!(!r.hypothesis_met || r.holds);
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let met = rows.iter().filter(|r| r["hypothesis_met"] == true).count();
    let ok = rows.iter().filter(|r| r["ok"] == true).count();
    Ok(finish(
        "verify density",
        cfg,
        json!({ "n": n, "k": k, "epsilon": epsilon.to_string(), "families": families }),
        rows,
        json!({
            "families": families,
            "hypothesis_met": met,
            "bound_respected": ok,
            "bound": "(eps/k) n!",
            "printed_reading": "(eps/k) k!, with t read as k",
        }),
        ok == families,
        start,
    ))
}

/// `v` of weight `weight` and `s` witnesses, each `v` with `swap` of its
/// elements traded for outside ones (same weight, so outside `U(v)`).
fn zone_instance<R: Rng + ?Sized>(n: usize, weight: usize, s: usize, swap: usize, rng: &mut R) -> (WideSet, Vec<WideSet>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let v = WideSet::from_positions(n, perm[..weight].iter().copied());
    let witnesses = (0..s)
        .map(|_| {
            let mut inside = perm[..weight].to_vec();
            let mut outside = perm[weight..].to_vec();
            inside.shuffle(rng);
            outside.shuffle(rng);
            let swap = swap.min(weight).min(outside.len());
            let mut w = v.clone();
            for i in 0..swap {
                w.remove(inside[i]);
                w.insert(outside[i]);
            }
            w
        })
        .collect();
    (v, witnesses)
}

/// Zone-hit probabilities against `min(1, 27 s sqrt(n ln n) / n)`.
///
/// For `n <= 24` every instance is computed exactly with `|v| <= 8` and a
/// random band; above that, instances use the central band (or the
/// override) and Monte Carlo with `cfg.trials` trials. Vertices below `n/3`
/// are reported but not asserted.
pub fn verify_zone_bound(n: usize, s: usize, instances: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    if n < 2 || s == 0 {
        return Err(Error::Param("need n >= 2 and s >= 1".into()));
    }
    let bound = gamma(n, s).min(1.0);
    let exact = n <= 24;
    let mut rng = cfg.rng();
    let mut specs = Vec::with_capacity(instances);
    for i in 0..instances {
        let (weight, band) = if exact {
            let lo_w = n.div_ceil(3).max(1);
            let hi_w = n.min(8).max(lo_w);
            let weight = rng.gen_range(lo_w..=hi_w);
            let a = rng.gen_range(0..=n) as f64;
            let b = rng.gen_range(0..=n) as f64;
            (weight, cfg.band.unwrap_or(Band::new(a.min(b), a.max(b))?))
        } else {
            let weights = [n.div_ceil(3), n / 2, 2 * n / 3];
            (weights[i % weights.len()], cfg.band_for(n))
        };
        if weight >= n {
            continue;
        }
        let swap = 1 + i % 3;
        let (v, witnesses) = zone_instance(n, weight, s, swap, &mut rng);
        specs.push((i, v, witnesses, band, rng.gen::<u64>()));
    }
    let rows: Vec<Value> = cfg.install(|| {
        specs
            .iter()
            .map(|(i, v, witnesses, band, seed)| -> Result<Value> {
                let mode = if exact {
                    ZoneMode::Exact { cap: cfg.exact_cap }
                } else {
                    ZoneMode::MonteCarlo { trials: cfg.trials }
                };
                let mut r = ChaCha8Rng::seed_from_u64(*seed);
                let est = zone_hit_prob(v, witnesses, Direction::Down, band, mode, &mut r)?;
                let in_regime = 3 * v.weight() >= n;
                let within = est.within(bound, 3.0);
                Ok(json!({
                    "instance": i,
                    "n": n,
                    "s": s,
                    "v_weight": v.weight(),
                    "band": band,
                    "mode": if exact { "exact" } else { "montecarlo" },
                    "estimate": est.estimate,
                    "stderr": est.stderr,
                    "exact": est.exact.as_ref().map(|x| x.to_string()),
                    "bound": bound,
                    "asserted": in_regime,
                    "within": within,
                    "ok": !in_regime || within,
                }))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let asserted = rows.iter().filter(|r| r["asserted"] == true).count();
    let ok = rows.iter().filter(|r| r["ok"] == true).count();
    Ok(finish(
        "verify zone",
        cfg,
        json!({ "n": n, "s": s, "instances": instances, "trials": cfg.trials }),
        rows.clone(),
        json!({
            "instances": rows.len(),
            "asserted": asserted,
            "respected": ok,
            "bound": bound,
            "raw_bound": gamma(n, s),
        }),
        ok == rows.len(),
        start,
    ))
}

/// Bad-string probabilities on chains of `D([n])` with the swap witness rule
/// and the middle band levels as markers, against `min(1, gamma^p)`.
pub fn verify_bad_strings(n: usize, h: usize, p_max: usize, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    if n < 4 || h == 0 || p_max == 0 {
        return Err(Error::Param("need n >= 4, h >= 1, p >= 1".into()));
    }
    let band = cfg.band_for(n);
    let lo = band.lo.max(0.0).ceil() as usize;
    let hi = (band.hi.min(n as f64).floor() as usize).max(lo);
    let markers = LevelOracle::new(n, lo..=hi);
    let top = WideSet::full(n);
    let mut rng = cfg.rng();
    let g = gamma(n, h);
    let mut rows = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    let mut monotone = true;
    for p in 1..=p_max {
        for spacing in [1usize, 2] {
            let positions: Vec<usize> = (0..2 * p).map(|i| 1 + i * spacing).collect();
            let est = cfg.install(|| {
                bad_string_prob_mc(&top, &positions, &markers, &SwapWitness, 1, Direction::Down, &band, cfg.trials, &mut rng)
            })??;
            let bound = g.powi(p as i32).min(1.0);
            if spacing == 1 {
                if let Some((e, se)) = previous {
                    monotone &= est.estimate <= e + 3.0 * se;
                }
                previous = Some((est.estimate, est.stderr));
            }
            rows.push(json!({
                "n": n,
                "p": p,
                "positions": positions,
                "estimate": est.estimate,
                "stderr": est.stderr,
                "bound": bound,
                "ok": est.within(bound, 3.0),
            }));
        }
    }
    let ok = rows.iter().filter(|r| r["ok"] == true).count();
    let passed = ok == rows.len() && monotone;
    Ok(finish(
        "verify bad-strings",
        cfg,
        json!({ "n": n, "h": h, "p_max": p_max, "trials": cfg.trials, "witness_rule": "swap least element" }),
        rows.clone(),
        json!({ "rows": rows.len(), "respected": ok, "gamma": g, "p_monotone": monotone }),
        passed,
        start,
    ))
}

/// The nested construction on `family` once per pool. The initial markers,
/// the shrink inequality and goodness (re-derived from the definition) are
/// asserted; the marked-chain size bound is only reported.
pub fn verify_nested(
    family: &Family,
    pools: &[(String, Family)],
    k: usize,
    h: usize,
    epsilon: &BigRational,
    cfg: &RunConfig,
) -> Result<Report> {
    let start = Instant::now();
    let n = family.n();
    let nested_cfg = NestedConfig {
        k,
        h,
        epsilon: epsilon.clone(),
        band: cfg.band_for(n),
        chain_cap: cfg.chain_cap,
        witness_budget: cfg.witness_budget,
    };
    let rows: Vec<Value> = cfg.install(|| {
        pools
            .iter()
            .map(|(label, pool)| -> Result<Value> {
                let run = build_nested(family, pool, &nested_cfg)?;
                let good = verify_goodness(&run);
                let ok = run.initial_matches_family && run.shrink_holds && run.nested() && good.holds;
                let mut v = run.summary();
                v["pool"] = json!(label);
                v["goodness"] = serde_json::to_value(&good)?;
                v["ok"] = json!(ok);
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let ok = rows.iter().filter(|r| r["ok"] == true).count();
    let checked: u64 = rows.iter().map(|r| r["goodness"]["checked_pairs"].as_u64().unwrap_or(0)).sum();
    let size_bound: usize = rows
        .iter()
        .flat_map(|r| r["iterations"].as_array().cloned().unwrap_or_default())
        .filter(|it| it["holds"] == true)
        .count();
    Ok(finish(
        "verify nested",
        cfg,
        json!({
            "n": n,
            "k": k,
            "h": h,
            "epsilon": epsilon.to_string(),
            "family_size": family.len(),
            "pool_restricted": true,
        }),
        rows.clone(),
        json!({
            "runs": rows.len(),
            "structural_ok": ok,
            "goodness_pairs_checked": checked,
            "size_bound_holds_iterations": size_bound,
        }),
        ok == rows.len(),
        start,
    ))
}

/// Family spec strings: `all`, `middle:t`, `file:path`.
pub fn parse_family_spec(spec: &str, n: usize) -> Result<Family> {
    if spec == "all" {
        return Family::all(n);
    }
    if let Some(t) = spec.strip_prefix("middle:") {
        let t: usize = t.parse().map_err(|_| Error::Parse(format!("bad level count in {spec:?}")))?;
        return crate::extremal::middle_levels(n, t);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let f = Family::parse(&std::fs::read_to_string(path)?, Some(n))?;
        if f.n() != n {
            return Err(Error::Param(format!("family file is over B_{}, expected B_{n}", f.n())));
        }
        return Ok(f);
    }
    Err(Error::Parse(format!("unknown family spec {spec:?}; use all, middle:t or file:path")))
}

/// Default pool: the family restricted to the band, plus `sparse` random
/// subfamilies keeping each member with probability `1/4`.
pub fn default_pools(family: &Family, band: &Band, sparse: usize, seed: u64) -> Result<Vec<(String, Family)>> {
    let base = family.restrict(band);
    let mut out = vec![("family-in-band".to_string(), base.clone())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..sparse {
        let pool = Family::new(family.n(), base.iter().filter(|_| rng.gen_bool(0.25)))?;
        out.push((format!("sparse-{i}"), pool));
    }
    Ok(out)
}

/// `x` as a float, for display.
pub fn approx(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
