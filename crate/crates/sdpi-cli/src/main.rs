//! `sdpi` — command-line front end for the finite-alphabet
//! strong-data-processing toolkit.
//!
//! Subcommands: `eta` (contraction coefficients), `netbound` (Bayesian-network
//! percolation bounds), `ficurve` (information curves), `coupling`
//! (doubly-optimal couplings), `lessnoisy` (sampled channel-ordering checks),
//! `samorodnitsky` (subset-averaged information bound), `table1` (the
//! four-network reference bound table), and `bsc-suite` (binary symmetric
//! tensor-power report).
//!
//! Information quantities are emitted in bits unless `--nats` is given; every
//! artifact states its log base. Exit code 0 on success; 2 on any validation
//! failure, with a diagnostic naming the violated invariant. Output is
//! deterministic for a fixed `(command, args, seed)`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sdpi::chanspec::ChannelSpec;
use sdpi::channels::{Channel, JointDistribution};
use sdpi::contraction::{
    bsc_tensor_eta_bounds, bsc_tensor_eta_kl_lower, bsc_tensor_eta_tv_exact, eta_chi2_at, eta_kl,
    eta_f_ratio_oracle, eta_kl_upper_bounds, EtaOptions,
};
use sdpi::coupling::{doubly_optimal_coupling, triple_coupling_min};
use sdpi::ficurve::{
    bsc_feedback_fi_bound, bsc_fi_exact, erasure_fi_bound, erasure_tightness_witness, fi_estimate,
    FiEstimateOptions, WitnessCode,
};
use sdpi::netbound::{
    es_recursion_bound, path_sum_bounds, perc_exact, perc_mc, table1_rows, BayesNet, EtaMode,
    ShortcutRule,
};
use sdpi::ordering::{
    erasure_dominance_check, less_noisy_sampled, mi_through, samorodnitsky_rhs,
    samorodnitsky_verify,
};
use sdpi::probcore::{Distribution, DivergenceKind};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Parser)]
#[command(
    name = "sdpi",
    version,
    about = "Strong data-processing toolkit for finite alphabets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit information quantities in nats (default: bits).
    #[arg(long, global = true)]
    nats: bool,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Numeric tolerance for emitted self-checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every randomized procedure.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Tv,
    Kl,
    Chi2,
}

impl From<KindArg> for DivergenceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Tv => DivergenceKind::Tv,
            KindArg::Kl => DivergenceKind::Kl,
            KindArg::Chi2 => DivergenceKind::Chi2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NetMethod {
    /// Exact percolation recursion (with the subset-enumeration cross-check).
    Exact,
    /// Seeded Monte Carlo estimate with standard error.
    Mc,
    /// Simple-path sums (shortcut-free and all-paths).
    Paths,
}

#[derive(Subcommand)]
enum Command {
    /// Contraction coefficients of a channel.
    Eta {
        /// Channel spec: bsc:<δ>, ec:<q>:<δ>, bsc^<n>:<δ>, or file:<path>.
        spec: String,
        /// Input distribution (JSON array, inline or a file path) for
        /// input-restricted quantities.
        #[arg(long)]
        input: Option<String>,
        /// Divergence kind for the ratio oracle (needs --input).
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Trials for the ratio oracle (needs --input; 0 disables).
        #[arg(long, default_value_t = 0)]
        oracle_trials: usize,
        /// Shorthand for --format json.
        #[arg(long)]
        json: bool,
    },
    /// Site-percolation bounds on a Bayesian network.
    Netbound {
        /// Network JSON path (omit with --table1).
        net: Option<PathBuf>,
        /// Comma-separated sink node ids.
        #[arg(long, value_delimiter = ',')]
        sinks: Vec<String>,
        #[arg(long, value_enum, default_value_t = NetMethod::Exact)]
        method: NetMethod,
        /// Monte Carlo sample count (method = mc).
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Use total-variation coefficients for kernel nodes instead of KL.
        #[arg(long)]
        tv: bool,
        /// Emit the four-network reference table instead of reading a file.
        #[arg(long)]
        table1: bool,
        /// Common coefficient for --table1.
        #[arg(long, default_value_t = 0.3)]
        eta: f64,
    },
    /// Information curves F(t): estimated lower bounds, exact binary
    /// symmetric curves, and erasure-channel bounds.
    ///
    /// Argument shapes: `ficurve <channel-spec>` (estimator),
    /// `ficurve bsc <δ> [--n N]` (exact curve plus iterated bound),
    /// `ficurve ec <q> <δ> --n N` (average bound plus tightness witnesses).
    Ficurve {
        /// `<channel-spec>` | `bsc <δ>` | `ec <q> <δ>`.
        #[arg(num_args = 1..=3)]
        args: Vec<String>,
        /// Number of grid knots spanning [0, t_max].
        #[arg(long, default_value_t = 65)]
        grid: usize,
        /// Channel uses (iterated bound / erasure blocklength).
        #[arg(long)]
        n: Option<usize>,
        /// Auxiliary alphabet size for the estimator (0 = automatic).
        #[arg(long = "usize", default_value_t = 0)]
        aux_size: usize,
        /// Random restarts per grid point for the estimator.
        #[arg(long, default_value_t = 12)]
        restarts: usize,
    },
    /// Coupling of two joint distributions minimizing pair and first-marginal
    /// mismatch simultaneously.
    Coupling {
        /// Left joint distribution (JSON matrix file).
        p: PathBuf,
        /// Right joint distribution (JSON matrix file).
        q: PathBuf,
        /// Also report the minimal triple mismatch cost.
        #[arg(long)]
        triple: bool,
    },
    /// Sampled falsifier for the less-noisy channel order.
    Lessnoisy {
        /// The weaker channel (spec or JSON path).
        w: String,
        /// The allegedly less noisy channel (spec or JSON path; omit with
        /// --erasure).
        wprime: Option<String>,
        /// Compare against the matched erasure channel instead.
        #[arg(long)]
        erasure: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Subset-averaged information bound for product channels.
    Samorodnitsky {
        /// Component channel spec; repeat for heterogeneous components.
        #[arg(long = "component", required = true)]
        components: Vec<String>,
        /// Replicate a single --component this many times.
        #[arg(long)]
        n: Option<usize>,
        /// Random priors to test beyond the base prior.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Prior joint over U × X₁…Xₙ (JSON matrix file). Default: uniform
        /// binary U with every Xᵢ = U.
        #[arg(long)]
        joint: Option<PathBuf>,
    },
    /// Four-network reference bound table at a common coefficient.
    Table1 {
        #[arg(long, default_value_t = 0.3)]
        eta: f64,
    },
    /// Binary symmetric tensor-power report: exact Dobrushin coefficient and
    /// closed-form bounds per blocklength, with ordering checks.
    BscSuite {
        /// Crossover probability, in (0, ½).
        #[arg(long)]
        delta: f64,
        /// Largest blocklength (≤ 16).
        #[arg(long, default_value_t = 8)]
        n_max: u32,
    },
}

/// Formats a float for text/CSV output: fixed 12 decimals, trailing zeros
/// trimmed (deterministic and readable).
fn fmt_f(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.12}");
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" || t.is_empty() {
        "0".to_string()
    } else {
        t.to_string()
    }
}

fn base_label(nats: bool) -> &'static str {
    if nats {
        "nats"
    } else {
        "bits"
    }
}

/// Scale factor from internal bits to the requested unit.
fn unit_scale(nats: bool) -> f64 {
    if nats {
        LN_2
    } else {
        1.0
    }
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable document");
    s.push('\n');
    s
}

fn lib_err(context: &str, e: sdpi::Error) -> String {
    format!("{context}: {e}")
}

/// Loads a channel argument: a channel-spec string, with a fallback to a
/// bare JSON path when the text is not a valid spec.
fn load_channel(arg: &str) -> Result<Channel, String> {
    match ChannelSpec::parse(arg) {
        Ok(spec) => spec
            .resolve()
            .map_err(|e| lib_err(&format!("channel {arg:?}"), e)),
        Err(spec_err) => {
            let text = std::fs::read_to_string(arg)
                .map_err(|io| format!("channel {arg:?}: {spec_err} (and not a readable file: {io})"))?;
            serde_json::from_str(&text).map_err(|e| format!("channel file {arg:?}: {e}"))
        }
    }
}

fn load_joint(path: &PathBuf) -> Result<JointDistribution, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("joint {}: {e}", path.display()))
}

/// Loads a distribution from inline JSON (`[0.5,0.5]`) or a file path.
fn load_distribution(arg: &str) -> Result<Distribution, String> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("distribution {arg:?}: {e}"))
}

/// A curve-like artifact: rows of (t, value, interpretation).
struct Rows {
    rows: Vec<(f64, f64, String)>,
    base: &'static str,
}

impl Rows {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::from("t,value,interpretation\n");
                for (t, v, what) in &self.rows {
                    let _ = writeln!(out, "{},{},{} [{}]", fmt_f(*t), fmt_f(*v), what, self.base);
                }
                out
            }
            Format::Text => {
                let mut out = String::new();
                let _ = writeln!(out, "base: {}", self.base);
                for (t, v, what) in &self.rows {
                    let _ = writeln!(out, "t={}\tvalue={}\t{}", fmt_f(*t), fmt_f(*v), what);
                }
                out
            }
            Format::Json => {
                let points: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|(t, v, what)| json!({"t": t, "value": v, "interpretation": what}))
                    .collect();
                pretty(&json!({"base": self.base, "points": points}))
            }
        }
    }
}

fn cmd_eta(
    cli: &Cli,
    spec_text: &str,
    input: Option<&str>,
    kind: Option<KindArg>,
    oracle_trials: usize,
    json_flag: bool,
) -> Result<String, String> {
    let w = load_channel(spec_text)?;
    let report = eta_kl(
        &w,
        &EtaOptions {
            seed: cli.seed,
            ..EtaOptions::default()
        },
    )
    .map_err(|e| lib_err("eta", e))?;
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    doc["channel"] = json!(spec_text);
    doc["note"] = json!("contraction coefficients are base-free ratios");
    let method = doc["method"].as_str().unwrap_or("?").to_string();
    let mut text = format!(
        "channel: {spec_text}\neta_tv: {}\neta_chi2_sup: {}\neta_kl: {}\nmethod: {method}\ncertified: tv={} chi2_sup={} kl={}\n",
        fmt_f(report.eta_tv),
        fmt_f(report.eta_chi2_sup),
        fmt_f(report.eta_kl),
        report.certified.eta_tv,
        report.certified.eta_chi2_sup,
        report.certified.eta_kl,
    );
    if let Some(src) = input {
        let q = load_distribution(src)?;
        let chi2_at = eta_chi2_at(&w, &q).map_err(|e| lib_err("eta --input", e))?;
        let (kl_lower, kl_upper) = eta_kl_upper_bounds(&w, &q).map_err(|e| lib_err("eta --input", e))?;
        let mut restricted = json!({
            "eta_chi2_at": chi2_at,
            "eta_kl_lower": kl_lower,
            "eta_kl_min_mass_upper": kl_upper,
        });
        let _ = writeln!(
            text,
            "input-restricted: eta_chi2_at={} eta_kl in [{}, {}]",
            fmt_f(chi2_at),
            fmt_f(kl_lower),
            kl_upper.map(fmt_f).unwrap_or_else(|| "?".into()),
        );
        if oracle_trials > 0 {
            let k: DivergenceKind = kind.unwrap_or(KindArg::Kl).into();
            let v = eta_f_ratio_oracle(&w, k, &q, oracle_trials, cli.seed)
                .map_err(|e| lib_err("eta oracle", e))?;
            restricted["oracle"] = json!({
                "kind": k.to_string(),
                "trials": oracle_trials,
                "value": v,
            });
            let _ = writeln!(text, "ratio oracle ({k}, {oracle_trials} trials): {}", fmt_f(v));
        }
        doc["input_restricted"] = restricted;
    } else if oracle_trials > 0 || kind.is_some() {
        return Err("eta: --kind/--oracle-trials need --input".into());
    }
    let format = if json_flag { Format::Json } else { cli.format };
    match format {
        Format::Json => Ok(pretty(&doc)),
        Format::Text => Ok(text),
        Format::Csv => Err("eta: csv output is reserved for curve artifacts".into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_netbound(
    cli: &Cli,
    net_path: Option<&PathBuf>,
    sinks: &[String],
    method: NetMethod,
    samples: usize,
    tv: bool,
) -> Result<String, String> {
    let path = net_path.ok_or("netbound: missing network JSON path")?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let net: BayesNet =
        serde_json::from_str(&text).map_err(|e| format!("network {}: {e}", path.display()))?;
    if sinks.is_empty() {
        return Err("netbound: --sinks must name at least one node".into());
    }
    let sink_refs: Vec<&str> = sinks.iter().map(|s| s.as_str()).collect();
    let mode = if tv { EtaMode::Tv } else { EtaMode::Kl };
    let mode_name = if tv { "tv" } else { "kl" };
    let mut doc = json!({
        "network": path.display().to_string(),
        "sinks": sinks,
        "coefficients": mode_name,
        "note": "percolation values are base-free mutual-information ratios",
    });
    let mut text_out = format!(
        "network: {}\nsinks: {}\ncoefficients: {}\n",
        path.display(),
        sinks.join(","),
        mode_name
    );
    match method {
        NetMethod::Exact => {
            let p = perc_exact(&net, &sink_refs, mode).map_err(|e| lib_err("netbound", e))?;
            let es = es_recursion_bound(&net, &sink_refs, mode).map_err(|e| lib_err("netbound", e))?;
            doc["percolation"] = serde_json::to_value(&p).expect("serializable");
            doc["recursion_bound"] = json!(es);
            let _ = writeln!(
                text_out,
                "percolation: {} ({})\nrecursion bound: {}",
                fmt_f(p.value),
                p.method,
                fmt_f(es)
            );
        }
        NetMethod::Mc => {
            let p = perc_mc(&net, &sink_refs, mode, samples, cli.seed)
                .map_err(|e| lib_err("netbound", e))?;
            doc["percolation"] = serde_json::to_value(&p).expect("serializable");
            doc["samples"] = json!(samples);
            let _ = writeln!(
                text_out,
                "percolation: {} ± {} ({} samples)",
                fmt_f(p.value),
                fmt_f(p.stderr),
                samples
            );
        }
        NetMethod::Paths => {
            let (sf, all) = path_sum_bounds(&net, &sink_refs, mode, ShortcutRule::StrictSubset)
                .map_err(|e| lib_err("netbound", e))?;
            let p = perc_exact(&net, &sink_refs, mode).map_err(|e| lib_err("netbound", e))?;
            doc["shortcut_free_sum"] = json!(sf);
            doc["all_paths_sum"] = json!(all);
            doc["percolation"] = serde_json::to_value(&p).expect("serializable");
            let _ = writeln!(
                text_out,
                "shortcut-free path sum: {}\nall-paths sum: {}\npercolation: {}",
                fmt_f(sf),
                fmt_f(all),
                fmt_f(p.value)
            );
        }
    }
    match cli.format {
        Format::Json => Ok(pretty(&doc)),
        Format::Text => Ok(text_out),
        Format::Csv => Err("netbound: csv output is reserved for curve artifacts".into()),
    }
}

fn cmd_table1(cli: &Cli, eta: f64) -> Result<String, String> {
    let rows = table1_rows(eta).map_err(|e| lib_err("table1", e))?;
    match cli.format {
        Format::Json => Ok(pretty(&json!({
            "eta": eta,
            "note": "bounds are base-free mutual-information ratios",
            "rows": serde_json::to_value(&rows).expect("serializable"),
        }))),
        Format::Text => {
            let mut out = format!("eta = {}\n", fmt_f(eta));
            let _ = writeln!(
                out,
                "{:<34} {:>12} {:>14} {:>12}",
                "network", "recursion", "shortcut-free", "all-paths"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<34} {:>12} {:>14} {:>12}",
                    r.network,
                    fmt_f(r.recursion_bound),
                    fmt_f(r.shortcut_free_sum),
                    fmt_f(r.all_paths_sum)
                );
            }
            Ok(out)
        }
        Format::Csv => Err("table1: csv output is reserved for curve artifacts".into()),
    }
}

fn cmd_ficurve(
    cli: &Cli,
    args: &[String],
    grid: usize,
    n: Option<usize>,
    aux_size: usize,
    restarts: usize,
) -> Result<String, String> {
    if grid < 2 {
        return Err("ficurve: --grid needs at least two knots".into());
    }
    let scale = unit_scale(cli.nats);
    let base = base_label(cli.nats);
    // Uniform knots on [0, t_max] plus any structural breakpoints, deduped.
    let knots = |t_max: f64, extra: &[f64]| -> Vec<f64> {
        let mut ts: Vec<f64> = (0..grid)
            .map(|i| i as f64 * t_max / (grid - 1) as f64)
            .collect();
        ts.extend(extra.iter().copied().filter(|&t| t > 0.0 && t < t_max));
        ts.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_max.max(1.0));
        ts
    };
    let mut rows: Vec<(f64, f64, String)> = Vec::new();
    match args {
        [head, delta_text] if head == "bsc" => {
            let delta: f64 = delta_text
                .parse()
                .map_err(|_| format!("ficurve bsc: bad crossover probability {delta_text:?}"))?;
            let uses = n.unwrap_or(1);
            for t in knots(1.0, &[]) {
                let exact = bsc_fi_exact(t, delta).map_err(|e| lib_err("ficurve bsc", e))?;
                rows.push((t * scale, exact * scale, "exact-single-use".into()));
                if uses > 1 {
                    let b = bsc_feedback_fi_bound(t, delta, uses)
                        .map_err(|e| lib_err("ficurve bsc", e))?;
                    rows.push((t * scale, b * scale, format!("iterated-bound-n={uses}")));
                }
            }
        }
        [head, q_text, delta_text] if head == "ec" => {
            let q: usize = q_text
                .parse()
                .map_err(|_| format!("ficurve ec: bad alphabet size {q_text:?}"))?;
            let delta: f64 = delta_text
                .parse()
                .map_err(|_| format!("ficurve ec: bad erasure probability {delta_text:?}"))?;
            let uses = n.unwrap_or(1);
            let step = (q.max(1) as f64).log2();
            let t_max = uses as f64 * step;
            // The averaged bound is piecewise between whole-symbol
            // breakpoints; pin a knot at every k·log₂(q).
            let breaks: Vec<f64> = (1..uses).map(|k| k as f64 * step).collect();
            for t in knots(t_max, &breaks) {
                let b = erasure_fi_bound(t, uses, q, delta).map_err(|e| lib_err("ficurve ec", e))?;
                rows.push((t * scale, b * scale, "erasure-average-bound".into()));
            }
            let mut witnesses = vec![(WitnessCode::Repetition, "repetition")];
            if q == 2 && uses >= 2 {
                witnesses.push((WitnessCode::SingleParity, "single-parity"));
            }
            for (code, name) in witnesses {
                let wit = erasure_tightness_witness(uses, q, delta, code)
                    .map_err(|e| lib_err("ficurve ec", e))?;
                rows.push((wit.t * scale, wit.achieved * scale, format!("witness-{name}-achieved")));
                rows.push((wit.t * scale, wit.bound * scale, format!("bound-at-{name}-point")));
            }
        }
        [spec_text] => {
            let w = load_channel(spec_text)?;
            let t_max = (w.input_size() as f64).log2();
            // The origin is pinned exactly; the optimizer sees only the
            // strictly positive knots.
            let ts: Vec<f64> = knots(t_max, &[]).into_iter().filter(|&t| t > 0.0).collect();
            let opts = FiEstimateOptions {
                u_size: aux_size,
                restarts,
                seed: cli.seed,
                ..FiEstimateOptions::default()
            };
            let curve = fi_estimate(&w, &ts, &opts).map_err(|e| lib_err("ficurve", e))?;
            rows.push((0.0, 0.0, "estimated-lower-bound".into()));
            for (t, f) in curve.args().iter().zip(curve.values()) {
                rows.push((t * scale, f * scale, "estimated-lower-bound".into()));
            }
        }
        _ => {
            return Err(
                "ficurve: expected `<channel-spec>`, `bsc <δ>`, or `ec <q> <δ>`".into(),
            );
        }
    }
    Ok(Rows { rows, base }.render(cli.format))
}

fn cmd_coupling(cli: &Cli, p: &PathBuf, q: &PathBuf, triple: bool) -> Result<String, String> {
    let pj = load_joint(p)?;
    let qj = load_joint(q)?;
    let c = doubly_optimal_coupling(&pj, &qj).map_err(|e| lib_err("coupling", e))?;
    let mut doc = serde_json::to_value(&c).expect("coupling serializes");
    doc["note"] = json!("probabilities are base-free");
    let mut text = format!(
        "cost: {}\npr[pair differs]: {} (tv of joints: {})\npr[x differs]: {} (tv of left marginals: {})\npr[y differs]: {} (tv of right marginals: {})\n",
        fmt_f(c.cost),
        fmt_f(c.pr_pair_differs),
        fmt_f(c.tv_joint),
        fmt_f(c.pr_x_differs),
        fmt_f(c.tv_x),
        fmt_f(c.pr_y_differs),
        fmt_f(c.tv_y),
    );
    if triple {
        let t = triple_coupling_min(&pj, &qj).map_err(|e| lib_err("coupling --triple", e))?;
        doc["triple_min"] = json!(t);
        let _ = writeln!(text, "triple mismatch minimum: {}", fmt_f(t));
    }
    match cli.format {
        Format::Json => Ok(pretty(&doc)),
        Format::Text => Ok(text),
        Format::Csv => Err("coupling: csv output is reserved for curve artifacts".into()),
    }
}

fn cmd_lessnoisy(
    cli: &Cli,
    w_arg: &str,
    wprime_arg: Option<&str>,
    erasure: bool,
    trials: usize,
) -> Result<String, String> {
    let scale = unit_scale(cli.nats);
    let base = base_label(cli.nats);
    let w = load_channel(w_arg)?;
    if erasure {
        if wprime_arg.is_some() {
            return Err("lessnoisy: --erasure takes a single channel".into());
        }
        let report = erasure_dominance_check(&w, trials, cli.seed)
            .map_err(|e| lib_err("lessnoisy --erasure", e))?;
        let mut doc = serde_json::to_value(&report).expect("report serializes");
        scale_verdict(&mut doc["verdict"], scale);
        doc["max_identity_gap"] = json!(report.max_identity_gap * scale);
        doc["base"] = json!(base);
        doc["channel"] = json!(w_arg);
        let text = format!(
            "channel: {w_arg}\neta: [{}, {}] ({})\nerasure probability: {}\nverdict: {}\nerasure identity gap: {} {base}\n",
            fmt_f(report.eta_lower),
            fmt_f(report.eta_upper),
            if report.eta_exact { "exact" } else { "bounded" },
            fmt_f(report.erasure_delta),
            verdict_line(&report.verdict, scale, base),
            fmt_f(report.max_identity_gap * scale),
        );
        return match cli.format {
            Format::Json => Ok(pretty(&doc)),
            Format::Text => Ok(text),
            Format::Csv => Err("lessnoisy: csv output is reserved for curve artifacts".into()),
        };
    }
    let wprime_arg = wprime_arg.ok_or("lessnoisy: need a second channel (or --erasure)")?;
    let wprime = load_channel(wprime_arg)?;
    let verdict =
        less_noisy_sampled(&w, &wprime, trials, cli.seed).map_err(|e| lib_err("lessnoisy", e))?;
    let mut vdoc = serde_json::to_value(&verdict).expect("verdict serializes");
    scale_verdict(&mut vdoc, scale);
    let doc = json!({
        "w": w_arg,
        "w_prime": wprime_arg,
        "trials": trials,
        "base": base,
        "verdict": vdoc,
    });
    let text = format!(
        "w: {w_arg}\nw_prime: {wprime_arg}\nverdict: {}\n",
        verdict_line(&verdict, scale, base)
    );
    match cli.format {
        Format::Json => Ok(pretty(&doc)),
        Format::Text => Ok(text),
        Format::Csv => Err("lessnoisy: csv output is reserved for curve artifacts".into()),
    }
}

/// Rescales the information-valued fields of a serialized verdict in place.
fn scale_verdict(vdoc: &mut Value, scale: f64) {
    if scale == 1.0 {
        return;
    }
    for key in ["max_violation", "mi_gap"] {
        if let Some(v) = vdoc.get_mut(key) {
            if let Some(x) = v.as_f64() {
                *v = json!(x * scale);
            }
        }
    }
}

fn verdict_line(v: &sdpi::ordering::LessNoisyVerdict, scale: f64, base: &str) -> String {
    match v {
        sdpi::ordering::LessNoisyVerdict::NoCounterexampleFound {
            trials,
            max_violation,
        } => format!(
            "NO_COUNTEREXAMPLE_FOUND ({trials} trials, max divergence violation {} {base})",
            fmt_f(max_violation * scale)
        ),
        sdpi::ordering::LessNoisyVerdict::NotLessNoisy { mi_gap, .. } => format!(
            "NOT_LESS_NOISY (witness information gap {} {base})",
            fmt_f(mi_gap * scale)
        ),
    }
}

fn cmd_samorodnitsky(
    cli: &Cli,
    component_args: &[String],
    n: Option<usize>,
    trials: usize,
    joint_path: Option<&PathBuf>,
) -> Result<String, String> {
    let scale = unit_scale(cli.nats);
    let base = base_label(cli.nats);
    let mut components: Vec<Channel> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    if let Some(n) = n {
        if component_args.len() != 1 {
            return Err("samorodnitsky: --n replicates exactly one --component".into());
        }
        if n == 0 {
            return Err("samorodnitsky: --n must be positive".into());
        }
        let w = load_channel(&component_args[0])?;
        for _ in 0..n {
            components.push(w.clone());
            names.push(component_args[0].clone());
        }
    } else {
        for a in component_args {
            components.push(load_channel(a)?);
            names.push(a.clone());
        }
    }
    let sizes: Vec<usize> = components.iter().map(|w| w.input_size()).collect();
    let total: usize = sizes.iter().product();
    let joint = match joint_path {
        Some(p) => load_joint(p)?,
        None => {
            // Uniform binary U; every component letter repeats U (mod its
            // alphabet, which is ≥ 2, so the letter simply equals U).
            let mut rows = vec![vec![0.0; total]; 2];
            for (u, row) in rows.iter_mut().enumerate() {
                let mut idx = 0usize;
                for &s in &sizes {
                    idx = idx * s + (u % s);
                }
                row[idx] = 0.5;
            }
            JointDistribution::new(rows).map_err(|e| lib_err("samorodnitsky", e))?
        }
    };
    let etas: Vec<f64> = components
        .iter()
        .map(sdpi::contraction::eta_kl_certified_upper)
        .collect::<Result<_, _>>()
        .map_err(|e| lib_err("samorodnitsky", e))?;
    let product = sdpi::channels::tensor_all(&components).map_err(|e| lib_err("samorodnitsky", e))?;
    let lhs = mi_through(&joint, &product).map_err(|e| lib_err("samorodnitsky", e))?;
    let rhs = samorodnitsky_rhs(&etas, &joint, &sizes).map_err(|e| lib_err("samorodnitsky", e))?;
    let worst = samorodnitsky_verify(&components, &joint, trials, cli.seed)
        .map_err(|e| lib_err("samorodnitsky", e))?;
    let doc = json!({
        "components": names,
        "etas": etas,
        "base": base,
        "base_prior": {
            "lhs": lhs * scale,
            "rhs": rhs * scale,
            "slack": (rhs - lhs) * scale,
        },
        "trials": trials,
        "max_violation": worst * scale,
    });
    let text = format!(
        "components: {}\netas: {}\nbase prior: I(U;Y^n)={} {base}, bound={} {base}\nmax violation over {} sampled priors: {} {base}\n",
        names.join(", "),
        etas.iter().map(|e| fmt_f(*e)).collect::<Vec<_>>().join(", "),
        fmt_f(lhs * scale),
        fmt_f(rhs * scale),
        trials,
        fmt_f(worst * scale),
    );
    match cli.format {
        Format::Json => Ok(pretty(&doc)),
        Format::Text => Ok(text),
        Format::Csv => Err("samorodnitsky: csv output is reserved for curve artifacts".into()),
    }
}

fn cmd_bsc_suite(cli: &Cli, delta: f64, n_max: u32) -> Result<String, String> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(format!(
            "bsc-suite: crossover probability must lie in (0, ½), got {delta}"
        ));
    }
    if n_max == 0 || n_max > 16 {
        return Err(format!("bsc-suite: blocklength must lie in 1..=16, got {n_max}"));
    }
    let scale = unit_scale(cli.nats);
    let base = base_label(cli.nats);
    let mut rows_json = Vec::new();
    let mut text = format!(
        "delta = {}; F-bound column in {base} at t = {}\n{:>3} {:>18} {:>18} {:>18} {:>18}\n",
        fmt_f(delta),
        fmt_f(scale),
        "n",
        "exact eta_tv",
        "kl-feedback-bound",
        "tv-product-bound",
        "f-bound(t=1)"
    );
    for n in 1..=n_max {
        let exact = bsc_tensor_eta_tv_exact(delta, n).map_err(|e| lib_err("bsc-suite", e))?;
        let (kl_bound, tv_bound) =
            bsc_tensor_eta_bounds(delta, n).map_err(|e| lib_err("bsc-suite", e))?;
        let kl_lower = bsc_tensor_eta_kl_lower(delta, n).map_err(|e| lib_err("bsc-suite", e))?;
        let f_bound =
            bsc_feedback_fi_bound(1.0, delta, n as usize).map_err(|e| lib_err("bsc-suite", e))?;
        if exact > tv_bound + cli.tol {
            return Err(format!(
                "bsc-suite: ordering invariant violated at n={n}: exact eta_tv {} > product bound {}",
                fmt_f(exact),
                fmt_f(tv_bound)
            ));
        }
        if kl_lower > kl_bound + cli.tol {
            return Err(format!(
                "bsc-suite: ordering invariant violated at n={n}: eta_kl lower bound {} > feedback bound {}",
                fmt_f(kl_lower),
                fmt_f(kl_bound)
            ));
        }
        // Decay-exponent diagnostic: how far the exact coefficient sits from
        // the square-root of the feedback-bound decay, in log-n units.
        let fit_c = if n >= 2 {
            let lhs = (1.0 - exact).ln() / (4.0 * delta * (1.0 - delta)).ln();
            Some((lhs - n as f64 / 2.0) / (n as f64).ln())
        } else {
            None
        };
        rows_json.push(json!({
            "n": n,
            "eta_tv_exact": exact,
            "kl_feedback_bound": kl_bound,
            "tv_product_bound": tv_bound,
            "eta_kl_lower": kl_lower,
            "f_bound_at_t1": f_bound * scale,
            "decay_fit_c": fit_c,
        }));
        let _ = writeln!(
            text,
            "{n:>3} {:>18} {:>18} {:>18} {:>18}",
            fmt_f(exact),
            fmt_f(kl_bound),
            fmt_f(tv_bound),
            fmt_f(f_bound * scale)
        );
    }
    text.push_str("orderings verified: exact eta_tv <= tv product bound; eta_kl lower <= kl feedback bound\n");
    match cli.format {
        Format::Json => Ok(pretty(&json!({
            "delta": delta,
            "base": base,
            "rows": rows_json,
            "orderings_verified": true,
        }))),
        Format::Text => Ok(text),
        Format::Csv => {
            let mut out = String::from("t,value,interpretation\n");
            for r in &rows_json {
                let n = r["n"].as_u64().expect("n");
                for (key, label) in [
                    ("eta_tv_exact", "exact-eta-tv"),
                    ("kl_feedback_bound", "kl-feedback-bound"),
                    ("tv_product_bound", "tv-product-bound"),
                    ("f_bound_at_t1", "f-bound-at-t1"),
                ] {
                    let v = r[key].as_f64().expect("row value");
                    let _ = writeln!(out, "{n},{},{label} [{base}]", fmt_f(v));
                }
            }
            Ok(out)
        }
    }
}

fn run(cli: &Cli) -> Result<String, String> {
    if !(cli.tol > 0.0) {
        return Err(format!("tolerance must be positive, got {}", cli.tol));
    }
    match &cli.command {
        Command::Eta {
            spec,
            input,
            kind,
            oracle_trials,
            json,
        } => cmd_eta(cli, spec, input.as_deref(), *kind, *oracle_trials, *json),
        Command::Netbound {
            net,
            sinks,
            method,
            samples,
            tv,
            table1,
            eta,
        } => {
            if *table1 {
                cmd_table1(cli, *eta)
            } else {
                cmd_netbound(cli, net.as_ref(), sinks, *method, *samples, *tv)
            }
        }
        Command::Ficurve {
            args,
            grid,
            n,
            aux_size,
            restarts,
        } => cmd_ficurve(cli, args, *grid, *n, *aux_size, *restarts),
        Command::Coupling { p, q, triple } => cmd_coupling(cli, p, q, *triple),
        Command::Lessnoisy {
            w,
            wprime,
            erasure,
            trials,
        } => cmd_lessnoisy(cli, w, wprime.as_deref(), *erasure, *trials),
        Command::Samorodnitsky {
            components,
            n,
            trials,
            joint,
        } => cmd_samorodnitsky(cli, components, *n, *trials, joint.as_ref()),
        Command::Table1 { eta } => cmd_table1(cli, *eta),
        Command::BscSuite { delta, n_max } => cmd_bsc_suite(cli, *delta, *n_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(artifact) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, artifact) {
                    eprintln!("sdpi: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{artifact}");
            }
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("sdpi: {msg}");
            ExitCode::from(2)
        }
    }
}
