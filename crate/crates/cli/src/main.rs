use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use structctl::asymptotics::{greedy_asymptotic, solve_fixed_point, solve_poisson_ks, GenFunc, DEFAULT_TOL};
use structctl::dynamics::{fraction_picks_no_deg1, fraction_time_no_deg1, integrate, OdeSpec};
use structctl::gen::{generate, rewire_preserving_degrees, DegreeDist, GenSpec, Model};
use structctl::ingest::{
    monte_carlo, parse_dist, parse_edge_list, read_weights, table_report, to_json, Directedness, EdgeListFile,
    Indexing, ParsedEdgeList, ReportSpec, TableOptions,
};
use structctl::matching::{max_matching, run_heuristic};
use structctl::{control_config, rng, Algo, BipartiteNet, Error, Result};

#[derive(Parser)]
#[command(name = "structctl", version, about = "Minimum controllers for structural controllability via matchings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random network and print its bipartite edges.
    Generate(GenerateArgs),
    /// Match an edge list and print matching statistics.
    Match(MatchArgs),
    /// Controller placement for an edge list.
    Controllers(MatchArgs),
    /// Fixed-point prediction of the unmatched fraction.
    Predict(PredictArgs),
    /// Integrate the degree-sequence ODE.
    Dynamics(DynamicsArgs),
    /// Degree-preserving rewiring of an edge list.
    Rewire(RewireArgs),
    /// Heuristic, exact and rewired controller counts for an edge list.
    Table(TableArgs),
    /// Matched fraction over independent random networks.
    Mc(McArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list: two labels per line, whitespace or comma separated.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    #[arg(long)]
    undirected: bool,
    /// zero | one | auto (labels numbered by first appearance)
    #[arg(long, default_value = "auto")]
    indexing: String,
    #[arg(long, default_value = "#")]
    comment_prefix: String,
}

impl InputArgs {
    fn file(&self) -> Result<EdgeListFile> {
        let d = if self.undirected { Directedness::Undirected } else { Directedness::Directed };
        let mut f = EdgeListFile::new(&self.input, d, self.indexing.parse::<Indexing>()?);
        f.comment_prefix = self.comment_prefix.clone();
        Ok(f)
    }

    fn load(&self) -> Result<(EdgeListFile, ParsedEdgeList)> {
        let f = self.file()?;
        let p = parse_edge_list(&f)?;
        Ok((f, p))
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "er_directed")]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// poisson:<mean> | file:<path>
    #[arg(long)]
    dist: Option<String>,
    /// Separate in-degree law for directed configuration models.
    #[arg(long)]
    dist_in: Option<String>,
    #[arg(long)]
    dist_out: Option<String>,
    /// Chung-Lu weights file.
    #[arg(long)]
    weights: Option<PathBuf>,
}

impl ModelArgs {
    fn spec(&self, seed: u64) -> Result<GenSpec> {
        let model: Model = self.model.parse()?;
        let mut spec = GenSpec::new(model, self.n, self.lambda, seed);
        let dist = self.dist.as_deref().map(parse_dist).transpose()?;
        spec.dist_in = self.dist_in.as_deref().map(parse_dist).transpose()?.or_else(|| dist.clone());
        spec.dist_out = self.dist_out.as_deref().map(parse_dist).transpose()?.or(dist);
        if let Some(d) = &spec.dist_in {
            spec.lambda = d.mean();
        }
        spec.weights = self.weights.as_deref().map(read_weights).transpose()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    input: InputArgs,
    /// greedy | ks | oks | max
    #[arg(long, default_value = "max")]
    algo: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PredictArgs {
    /// Empirical degree laws of this edge list.
    #[arg(long, conflicts_with_all = ["dist", "lambda"])]
    input: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    undirected: bool,
    #[arg(long, default_value = "auto")]
    indexing: String,
    /// Poisson mean for both degree laws.
    #[arg(long)]
    lambda: Option<f64>,
    /// poisson:<mean> | file:<path> for both degree laws.
    #[arg(long)]
    dist: Option<String>,
    /// Network size for the controller count.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct DynamicsArgs {
    /// greedy | ks | oks
    #[arg(long, default_value = "ks")]
    algo: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    dist: Option<String>,
    /// Stop once either edge mass falls to this level.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Degree truncation; defaults to the support of the initial laws.
    #[arg(long)]
    truncation: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RewireArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include wall times (makes the report non-reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "ks")]
    algo: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    let mut w: Box<dyn Write> = match &out.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn emit_json<T: Serialize>(out: &OutArgs, v: &T) -> Result<()> {
    emit(out, &to_json(v)?)
}

fn edges_csv(net: &BipartiteNet) -> String {
    let mut s = String::from("left,right\n");
    for (l, r) in net.edges() {
        s.push_str(&format!("{l},{r}\n"));
    }
    s
}

fn edges_json(net: &BipartiteNet) -> serde_json::Value {
    json!({ "n": net.n(), "edges": net.edges().collect::<Vec<_>>() })
}

fn generate_cmd(a: &GenerateArgs) -> Result<()> {
    let spec = a.model.spec(a.seed)?;
    let net = generate(&spec)?;
    match a.out.format {
        Format::Csv => emit(&a.out, &edges_csv(&net)),
        Format::Json => {
            let mut v = edges_json(&net);
            v["model"] = json!(spec.model);
            v["seed"] = json!(a.seed);
            emit_json(&a.out, &v)
        }
    }
}

fn match_cmd(a: &MatchArgs, placement: bool) -> Result<()> {
    let (_, p) = a.input.load()?;
    let net = &p.net;
    let algo: Algo = a.algo.parse()?;
    let (matching, stats) = match algo {
        Algo::Max => (max_matching(net), None),
        _ => {
            let s = run_heuristic(algo, net, &mut rng::seeded(a.seed), None)?;
            (s.matching.clone(), Some(s))
        }
    };
    let n = net.n();
    if placement {
        let cfg = control_config(net, &matching)?;
        return match a.out.format {
            Format::Csv => {
                let mut s = String::from("controller,vertex\n");
                for (v, c) in &cfg.b_structure {
                    s.push_str(&format!("{c},{v}\n"));
                }
                emit(&a.out, &s)
            }
            Format::Json => emit_json(
                &a.out,
                &json!({ "algo": algo, "seed": a.seed, "n": n, "labels": p.labels, "config": cfg }),
            ),
        };
    }
    match a.out.format {
        Format::Csv => {
            let mut s = String::from("left,right\n");
            for (l, r) in &matching.pairs {
                s.push_str(&format!("{l},{r}\n"));
            }
            emit(&a.out, &s)
        }
        Format::Json => emit_json(
            &a.out,
            &json!({
                "algo": algo,
                "seed": a.seed,
                "n": n,
                "edges": net.edge_count(),
                "matching_size": matching.len(),
                "controllers": n.saturating_sub(matching.len()).max(1),
                "u1": stats.as_ref().map(|s| s.phase1_unmatched),
                "u2": stats.as_ref().map(|s| s.phase2_unmatched),
                "core_size": stats.as_ref().map(|s| s.core_size),
                "pairs": matching.pairs,
                "labels": p.labels,
            }),
        ),
    }
}

fn predict_cmd(a: &PredictArgs) -> Result<()> {
    let mut out = serde_json::Map::new();
    let (gin, gout, n, lambda) = if let Some(path) = &a.input {
        let d = if a.undirected { Directedness::Undirected } else { Directedness::Directed };
        let p = parse_edge_list(&EdgeListFile::new(path, d, a.indexing.parse()?))?;
        let (gi, go) = structctl::asymptotics::empirical_gen_funcs(&p.net)?;
        (gi, go, Some(a.n.unwrap_or(p.net.n())), None)
    } else {
        let (dist, lambda) = match (&a.dist, a.lambda) {
            (Some(s), _) => {
                let d = parse_dist(s)?;
                let l = matches!(d.kind(), structctl::gen::DistKind::Poisson { .. }).then(|| d.mean());
                (d, l)
            }
            (None, Some(l)) => (DegreeDist::poisson(l)?, Some(l)),
            (None, None) => return Err(Error::Input("predict needs --input, --dist or --lambda".into())),
        };
        (GenFunc::new(dist.clone()), GenFunc::new(dist), a.n, lambda)
    };
    let sol = solve_fixed_point(&gin, &gout, DEFAULT_TOL)?;
    out.insert("u_star".into(), json!(sol.u_star));
    out.insert("w".into(), json!(sol.w));
    out.insert("residual".into(), json!(sol.residual));
    out.insert("iterations".into(), json!(sol.iterations));
    if let Some(n) = n {
        out.insert("n".into(), json!(n));
        out.insert("predicted_controllers".into(), json!(((n as f64 * sol.u_star).round() as usize).max(1)));
    }
    if let Some(l) = lambda {
        let ks = solve_poisson_ks(l)?;
        out.insert("k_lambda".into(), json!(ks.k_lambda));
        out.insert("h_lambda".into(), json!(ks.h_lambda));
        if l > 0.0 {
            out.insert("greedy".into(), json!(greedy_asymptotic(l)?));
        }
    }
    match a.out.format {
        Format::Json => emit_json(&a.out, &out),
        Format::Csv => {
            let keys: Vec<&String> = out.keys().filter(|k| out[*k].is_number()).collect();
            let vals: Vec<String> = keys.iter().map(|k| out[*k].to_string()).collect();
            emit(&a.out, &format!("{}\n{}", keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","), vals.join(",")))
        }
    }
}

fn dynamics_cmd(a: &DynamicsArgs) -> Result<()> {
    let algo: Algo = a.algo.parse()?;
    let mut spec = match (&a.dist, a.lambda) {
        (Some(s), _) => {
            let d = parse_dist(s)?;
            OdeSpec::new(algo, d.clone(), d)?
        }
        (None, Some(l)) => OdeSpec::poisson(algo, l)?,
        (None, None) => return Err(Error::Input("dynamics needs --dist or --lambda".into())),
    };
    spec.eps_stop = a.eps;
    if let Some(t) = a.truncation {
        spec.n_max = t;
    }
    let traj = integrate(&spec)?;
    match a.out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            emit(&a.out, &String::from_utf8_lossy(&buf))
        }
        Format::Json => emit_json(
            &a.out,
            &json!({
                "algo": algo,
                "truncation": spec.n_max,
                "eps_stop": spec.eps_stop,
                "t_stop": traj.t_stop,
                "unmatched_fraction": traj.unmatched_fraction,
                "unmatched_fraction_left": traj.unmatched_fraction_left,
                "fraction_time_no_deg1": fraction_time_no_deg1(&traj),
                "fraction_picks_no_deg1": fraction_picks_no_deg1(&traj),
                "steps": traj.states.len() - 1,
            }),
        ),
    }
}

fn rewire_cmd(a: &RewireArgs) -> Result<()> {
    let (_, p) = a.input.load()?;
    let g = rewire_preserving_degrees(&p.net, a.seed);
    match a.out.format {
        Format::Csv => emit(&a.out, &edges_csv(&g)),
        Format::Json => {
            let mut v = edges_json(&g);
            v["seed"] = json!(a.seed);
            v["labels"] = json!(p.labels);
            emit_json(&a.out, &v)
        }
    }
}

fn table_cmd(a: &TableArgs) -> Result<()> {
    let (f, p) = a.input.load()?;
    let spec = ReportSpec {
        source: f.path.display().to_string(),
        directedness: Some(f.directedness),
        indexing: Some(f.indexing),
        n: p.net.n(),
        edges: p.lines,
        trials: a.trials,
        seed: a.seed,
    };
    let report = table_report(&p.net, spec, &TableOptions { trials: a.trials, seed: a.seed, timing: a.timing })?;
    match a.out.format {
        Format::Json => emit_json(&a.out, &report),
        Format::Csv => emit(&a.out, &report.to_csv()),
    }
}

fn mc_cmd(a: &McArgs) -> Result<()> {
    let spec = a.model.spec(a.seed)?;
    let algo: Algo = a.algo.parse()?;
    let s = monte_carlo(&spec, algo, a.trials, a.seed)?;
    match a.out.format {
        Format::Csv => {
            let mut out = String::from("trial,matched_fraction\n");
            for (t, v) in s.values.iter().enumerate() {
                out.push_str(&format!("{t},{}\n", structctl::ingest::round_sig(*v)));
            }
            emit(&a.out, &out)
        }
        Format::Json => emit_json(
            &a.out,
            &json!({
                "schema": structctl::ingest::REPORT_SCHEMA,
                "spec": {
                    "model": spec.model, "n": spec.n, "lambda": spec.lambda,
                    "dist": a.model.dist, "dist_in": a.model.dist_in, "dist_out": a.model.dist_out,
                    "algo": algo, "trials": a.trials, "seed": a.seed,
                },
                "summary": s,
            }),
        ),
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Generate(a) => generate_cmd(a),
        Cmd::Match(a) => match_cmd(a, false),
        Cmd::Controllers(a) => match_cmd(a, true),
        Cmd::Predict(a) => predict_cmd(a),
        Cmd::Dynamics(a) => dynamics_cmd(a),
        Cmd::Rewire(a) => rewire_cmd(a),
        Cmd::Table(a) => table_cmd(a),
        Cmd::Mc(a) => mc_cmd(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("structctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
