//! `subposet`: poset analysis, verification drivers and extremal searches.
//!
//! Exit codes: 0 on success (including indeterminate verdicts), 1 when an
//! asserted check fails, 2 on usage, parse or precondition errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use subposet::chains::parse_rational;
use subposet::error::{Error, Result};
use subposet::extremal::{
    construction_avoidance_check, find_copy_guided, find_copy_oracle, la_exact, middle_levels, Verdict,
};
use subposet::lattice::{Band, Vertex};
use subposet::poset::{decompose, saturate, Embedding, NamedPoset, Poset};
use subposet::report::{self, Format, Report, RunConfig};

#[derive(Parser)]
#[command(name = "subposet", version, about = "Forbidden induced subposets in the Boolean lattice")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials per estimate.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Weight band override as `lo,hi`.
    #[arg(long, global = true, value_parser = parse_band)]
    band: Option<Band>,
    #[arg(long, global = true)]
    node_limit: Option<u64>,
    /// Time limit in seconds for budgeted searches.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Worker threads; 1 gives reproducible output.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Largest n whose full chains are enumerated.
    #[arg(long, global = true)]
    chain_cap: Option<usize>,
    /// Largest free-element count for exact zone probabilities.
    #[arg(long, global = true)]
    exact_cap: Option<usize>,
    /// Include wall-clock time in verification reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Poset analysis, saturation and decomposition.
    #[command(subcommand)]
    Poset(PosetCmd),
    /// Randomized and exhaustive verification drivers.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Extremal numbers and copy searches.
    #[command(subcommand)]
    Extremal(ExtremalCmd),
}

#[derive(Args)]
struct PosetInput {
    /// Poset JSON file: {"n", "labels", "covers": [[lower, upper], ...]}.
    #[arg(long, conflicts_with = "poset")]
    file: Option<PathBuf>,
    /// Named poset: chainK/pK, forkK/vK, butterfly, kR,S, hmM.
    #[arg(long)]
    poset: Option<String>,
}

#[derive(Subcommand)]
enum PosetCmd {
    Analyze {
        #[command(flatten)]
        input: PosetInput,
        /// Saturation level to test; defaults to the height.
        #[arg(long)]
        k: Option<usize>,
    },
    Saturate {
        #[command(flatten)]
        input: PosetInput,
    },
    Decompose {
        #[command(flatten)]
        input: PosetInput,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Marked-chain counting identity and LYM consistency.
    #[command(name = "marked-chains", alias = "2.3")]
    MarkedChains {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        families: usize,
    },
    /// Marked-chain lower bound for dense families.
    #[command(name = "density", alias = "2.4")]
    Density {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        #[arg(long, default_value_t = 100)]
        families: usize,
    },
    /// Forbidden-zone hit probability bound.
    #[command(name = "zone", alias = "3.1")]
    Zone {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 6)]
        instances: usize,
    },
    /// Bad-string probability bound with the swap witness rule.
    #[command(name = "bad-strings", alias = "4.2")]
    BadStrings {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Largest string half-length.
        #[arg(long, default_value_t = 2)]
        p: usize,
    },
    /// Nested-family construction and goodness.
    #[command(name = "nested", alias = "5.1")]
    Nested {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Family spec: all, middle:t or file:path.
        #[arg(long, default_value = "all")]
        family: String,
        /// Extra random pools keeping a quarter of the family in the band.
        #[arg(long, default_value_t = 0)]
        sparse_pools: usize,
        /// Write the per-iteration state dump of the first pool here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Containment {
    /// Weak (order-preserving) containment.
    #[arg(long, conflicts_with = "induced")]
    weak: bool,
    /// Induced containment (default).
    #[arg(long)]
    induced: bool,
}

impl Containment {
    fn induced(&self) -> bool {
        !self.weak
    }
}

#[derive(Subcommand)]
enum ExtremalCmd {
    /// Exact extremal number by exhaustive search (n <= 8).
    La {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        input: PosetInput,
        #[command(flatten)]
        containment: Containment,
    },
    /// Guided induced-copy search in a family.
    Embed {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        input: PosetInput,
        #[arg(long, default_value = "all")]
        family: String,
        /// Cross-check with the exhaustive search.
        #[arg(long)]
        oracle: bool,
    },
    /// The middle-levels family.
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        levels: usize,
        /// Write the family as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether the middle levels avoid a pattern as an induced subposet.
    Check {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        input: PosetInput,
        #[arg(long)]
        levels: usize,
    },
}

fn parse_band(s: &str) -> std::result::Result<Band, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad hi: {e}"))?;
    Band::new(lo, hi).map_err(|e| e.to_string())
}

impl GlobalOpts {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig {
            seed: self.seed,
            workers: self.workers.max(1),
            trials: self.trials,
            band: self.band,
            node_limit: self.node_limit,
            time_limit_ms: self.time_limit.map(|s| (s * 1000.0).round() as u64),
            format: match self.format {
                OutFormat::Json => Format::Json,
                OutFormat::Csv => Format::Csv,
            },
            timing: self.timing,
            ..RunConfig::default()
        };
        if let Some(cap) = self.chain_cap {
            c.chain_cap = cap;
        }
        if let Some(cap) = self.exact_cap {
            c.exact_cap = cap;
        }
        c
    }
}

impl PosetInput {
    fn load(&self) -> Result<(String, Poset)> {
        match (&self.file, &self.poset) {
            (Some(path), _) => Ok((path.display().to_string(), Poset::from_json(&std::fs::read_to_string(path)?)?)),
            (None, Some(name)) => {
                let named: NamedPoset = name.parse()?;
                Ok((named.to_string(), named.build()?))
            }
            (None, None) => Err(Error::Param("give --file or --poset".into())),
        }
    }
}

fn single(command: &str, cfg: &RunConfig, params: Value, row: Value, passed: bool) -> Report {
    Report {
        command: command.to_string(),
        config: cfg.clone(),
        params,
        summary: row.clone(),
        rows: vec![row],
        passed,
        elapsed_ms: None,
    }
}

fn embedding_rows(pattern: &Poset, e: &Embedding<Vertex>) -> Value {
    json!((0..pattern.len())
        .map(|i| json!([pattern.label(i), e.image(i).elements()]))
        .collect::<Vec<_>>())
}

fn run_poset(cmd: &PosetCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        PosetCmd::Analyze { input, k } => {
            let (name, p) = input.load()?;
            let k = k.unwrap_or_else(|| p.height());
            let a = p.analyze(k);
            let row = json!({
                "poset": name,
                "elements": p.len(),
                "k": k,
                "height": a.height,
                "tree": a.tree_hasse,
                "saturated": a.k_saturated,
            });
            Ok(single("poset analyze", cfg, json!({ "poset": name, "k": k }), row, true))
        }
        PosetCmd::Saturate { input } => {
            let (name, p) = input.load()?;
            let s = saturate(&p)?;
            let row = json!({
                "poset": name,
                "height": s.height(),
                "original_elements": p.len(),
                "elements": s.len(),
                "added": s.len() - p.len(),
                "saturated": serde_json::from_str::<Value>(&s.to_json())?,
            });
            Ok(single("poset saturate", cfg, json!({ "poset": name }), row, true))
        }
        PosetCmd::Decompose { input } => {
            let (name, p) = input.load()?;
            let steps = decompose(&p)?;
            let labels = |ix: &[usize]| ix.iter().map(|&i| p.label(i).to_string()).collect::<Vec<_>>();
            let rows: Vec<Value> = steps
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    json!({
                        "step": i + 1,
                        "side": s.side,
                        "anchor": p.label(s.anchor),
                        "leaf": p.label(s.leaf),
                        "interval": labels(&s.interval),
                        "removed": labels(&s.removed),
                        "remaining": labels(&s.remaining),
                    })
                })
                .collect();
            let last = steps.last().map_or_else(|| (0..p.len()).collect(), |s| s.remaining.clone());
            let summary = json!({
                "steps": steps.len(),
                "final_chain": labels(&last),
                "final_chain_length": last.len(),
            });
            Ok(Report {
                command: "poset decompose".into(),
                config: cfg.clone(),
                params: json!({ "poset": name }),
                rows,
                summary,
                passed: true,
                elapsed_ms: None,
            })
        }
    }
}

fn run_verify(cmd: &VerifyCmd, cfg: &RunConfig) -> Result<(Report, Option<(PathBuf, String)>)> {
    let plain = |r: Result<Report>| r.map(|r| (r, None));
    match cmd {
        VerifyCmd::MarkedChains { n, k, families } => plain(report::verify_marked_chains(*n, *k, *families, cfg)),
        VerifyCmd::Density { n, k, epsilon, families } => {
            plain(report::verify_density(*n, *k, &parse_rational(epsilon)?, *families, cfg))
        }
        VerifyCmd::Zone { n, s, instances } => plain(report::verify_zone_bound(*n, *s, *instances, cfg)),
        VerifyCmd::BadStrings { n, h, p } => plain(report::verify_bad_strings(*n, *h, *p, cfg)),
        VerifyCmd::Nested { n, k, h, epsilon, family, sparse_pools, dump } => {
            let eps = parse_rational(epsilon)?;
            let fam = report::parse_family_spec(family, *n)?;
            let pools = report::default_pools(&fam, &cfg.band_for(*n), *sparse_pools, cfg.seed)?;
            let r = report::verify_nested(&fam, &pools, *k, *h, &eps, cfg)?;
            let dump = match dump {
                Some(path) => {
                    let nested_cfg = subposet::nested::NestedConfig {
                        k: *k,
                        h: *h,
                        epsilon: eps,
                        band: cfg.band_for(*n),
                        chain_cap: cfg.chain_cap,
                        witness_budget: cfg.witness_budget,
                    };
                    let run = subposet::nested::build_nested(&fam, &pools[0].1, &nested_cfg)?;
                    Some((path.clone(), serde_json::to_string_pretty(&run.dump())?))
                }
                None => None,
            };
            Ok((r, dump))
        }
    }
}

fn run_extremal(cmd: &ExtremalCmd, cfg: &RunConfig) -> Result<(Report, Option<(PathBuf, String)>)> {
    let start = Instant::now();
    let elapsed = || start.elapsed().as_millis() as u64;
    match cmd {
        ExtremalCmd::La { n, input, containment } => {
            let (name, p) = input.load()?;
            let induced = containment.induced();
            let out = la_exact(*n, &p, induced, cfg.search_budget())?;
            let mut row = json!({
                "op": "la",
                "n": n,
                "H": name,
                "induced": induced,
                "verdict": out.verdict.label(),
                "nodes_expanded": out.stats.nodes_expanded,
                "elapsed_ms": elapsed(),
                "seed": cfg.seed,
            });
            match &out.verdict {
                Verdict::Found(res) => {
                    row["value"] = json!(res.value);
                    row["witness"] = serde_json::to_value(&res.witness)?;
                }
                Verdict::Indeterminate(why) => row["reason"] = json!(why),
                Verdict::Absent => {}
            }
            Ok((single("extremal la", cfg, json!({ "n": n, "poset": name, "induced": induced }), row, true), None))
        }
        ExtremalCmd::Embed { n, input, family, oracle } => {
            let (name, p) = input.load()?;
            let fam = report::parse_family_spec(family, *n)?;
            let band = cfg.band_for(*n);
            let mut rng = cfg.rng();
            let out = find_copy_guided(&fam, &p, &band, cfg.search_budget(), &mut rng)?;
            let mut row = json!({
                "op": "embed",
                "n": n,
                "H": name,
                "induced": true,
                "family": family,
                "verdict": out.verdict.label(),
                "nodes_expanded": out.stats.nodes_expanded,
                "elapsed_ms": elapsed(),
                "seed": cfg.seed,
            });
            match &out.verdict {
                Verdict::Found(e) => row["embedding"] = embedding_rows(&p, e),
                Verdict::Indeterminate(why) => row["reason"] = json!(why),
                Verdict::Absent => {}
            }
            let mut passed = true;
            if *oracle {
                let o = find_copy_oracle(&fam.restrict(&band), &p, true, cfg.search_budget());
                row["oracle_verdict"] = json!(o.verdict.label());
                // a guided copy with an exhaustive "absent" is a contradiction
                passed = !(out.verdict.found().is_some() && o.verdict.is_absent());
            }
            Ok((single("extremal embed", cfg, json!({ "n": n, "poset": name, "family": family }), row, passed), None))
        }
        ExtremalCmd::Construct { n, levels, out } => {
            let fam = middle_levels(*n, *levels)?;
            let weights: std::collections::BTreeSet<usize> = fam.iter().map(|v| v.weight()).collect();
            let row = json!({
                "op": "construct",
                "n": n,
                "levels": weights,
                "size": fam.len(),
                "seed": cfg.seed,
            });
            let write = out.as_ref().map(|p| (p.clone(), fam.to_json() + "\n"));
            Ok((single("extremal construct", cfg, json!({ "n": n, "levels": levels }), row, true), write))
        }
        ExtremalCmd::Check { n, input, levels } => {
            let (name, p) = input.load()?;
            let (verdict, avoided, passed) = match construction_avoidance_check(*n, &p, *levels, cfg.search_budget()) {
                Ok(true) => ("absent", Some(true), true),
                Ok(false) => ("found", Some(false), false),
                Err(Error::Indeterminate(_)) => ("indeterminate", None, true),
                Err(e) => return Err(e),
            };
            let row = json!({
                "op": "check",
                "n": n,
                "H": name,
                "induced": true,
                "levels": levels,
                "verdict": verdict,
                "avoided": avoided,
                "elapsed_ms": elapsed(),
                "seed": cfg.seed,
            });
            Ok((single("extremal check", cfg, json!({ "n": n, "poset": name, "levels": levels }), row, passed), None))
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = cli.global.config();
    let (report, side_file) = match &cli.command {
        Command::Poset(cmd) => (run_poset(cmd, &cfg)?, None),
        Command::Verify(cmd) => run_verify(cmd, &cfg)?,
        Command::Extremal(cmd) => run_extremal(cmd, &cfg)?,
    };
    if let Some((path, text)) = side_file {
        std::fs::write(path, text)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli).and_then(|r| Ok((r.render()?, r.passed))) {
        Ok((text, passed)) => {
            print!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
