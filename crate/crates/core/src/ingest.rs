//! Edge-list ingestion, report assembly and Monte Carlo batching.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotics::{empirical_gen_funcs, solve_fixed_point, solve_poisson_ks, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::gen::{generate_with, rewire_with, DegreeDist, GenSpec};
use crate::graph::BipartiteNet;
use crate::matching::{max_matching, run_heuristic, Algo};
use crate::rng;

pub const REPORT_SCHEMA: u32 = 1;
/// Significant digits kept for fractional numbers in JSON output.
pub const SIG_DIGITS: i32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directedness {
    Directed,
    Undirected,
}

impl std::str::FromStr for Directedness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "directed" => Ok(Directedness::Directed),
            "undirected" => Ok(Directedness::Undirected),
            _ => Err(Error::Input(format!("unknown directedness `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indexing {
    Zero,
    One,
    /// Labels are arbitrary strings, numbered by first appearance.
    Auto,
}

impl std::str::FromStr for Indexing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(Indexing::Zero),
            "one" | "1" => Ok(Indexing::One),
            "auto" | "auto-remap" => Ok(Indexing::Auto),
            _ => Err(Error::Input(format!("unknown indexing `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EdgeListFile {
    pub path: PathBuf,
    pub directedness: Directedness,
    pub indexing: Indexing,
    pub comment_prefix: String,
}

impl EdgeListFile {
    pub fn new(path: impl Into<PathBuf>, directedness: Directedness, indexing: Indexing) -> Self {
        EdgeListFile { path: path.into(), directedness, indexing, comment_prefix: "#".into() }
    }
}

#[derive(Clone, Debug)]
pub struct ParsedEdgeList {
    pub net: BipartiteNet,
    /// Data lines read; duplicates are kept as parallel edges.
    pub lines: usize,
    /// Original labels by vertex id, present for `Indexing::Auto`.
    pub labels: Option<Vec<String>>,
}

pub fn parse_edge_list(file: &EdgeListFile) -> Result<ParsedEdgeList> {
    let text = std::fs::read_to_string(&file.path)?;
    parse_edge_list_str(&text, file.directedness, file.indexing, &file.comment_prefix)
}

pub fn parse_edge_list_str(
    text: &str,
    directedness: Directedness,
    indexing: Indexing,
    comment_prefix: &str,
) -> Result<ParsedEdgeList> {
    let mut edges = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut max_id: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || (!comment_prefix.is_empty() && line.starts_with(comment_prefix)) {
            continue;
        }
        let tokens: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if tokens.len() != 2 {
            return Err(Error::Parse { line: line_no, msg: format!("expected two vertex labels, found {}", tokens.len()) });
        }
        let mut id = |tok: &str| -> Result<usize> {
            match indexing {
                Indexing::Auto => {
                    let next = labels.len();
                    Ok(*ids.entry(tok.to_string()).or_insert_with(|| {
                        labels.push(tok.to_string());
                        next
                    }))
                }
                Indexing::Zero | Indexing::One => {
                    let v: usize = tok
                        .parse()
                        .map_err(|_| Error::Parse { line: line_no, msg: format!("`{tok}` is not a vertex index") })?;
                    let v = if indexing == Indexing::One {
                        v.checked_sub(1).ok_or_else(|| Error::Parse {
                            line: line_no,
                            msg: "index 0 in a one-indexed file".into(),
                        })?
                    } else {
                        v
                    };
                    max_id = Some(max_id.map_or(v, |m| m.max(v)));
                    Ok(v)
                }
            }
        };
        let u = id(tokens[0])?;
        let v = id(tokens[1])?;
        edges.push((u, v));
    }
    let n = match indexing {
        Indexing::Auto => labels.len(),
        _ => max_id.map_or(0, |m| m + 1),
    };
    let net = match directedness {
        Directedness::Directed => BipartiteNet::from_directed_edges(n, &edges)?,
        Directedness::Undirected => BipartiteNet::from_undirected_edges(n, &edges)?,
    };
    Ok(ParsedEdgeList { net, lines: edges.len(), labels: (indexing == Indexing::Auto).then_some(labels) })
}

/// Reads nonnegative weights separated by whitespace or commas; `#` starts a comment.
pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let w: f64 = tok
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("`{tok}` is not a number") })?;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Parse { line: i + 1, msg: format!("weight {w} must be finite and >= 0") });
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// `poisson:<λ>` or `file:<path>`, the file listing weights for degrees 0, 1, 2, ...
pub fn parse_dist(s: &str) -> Result<DegreeDist> {
    match s.split_once(':') {
        Some(("poisson", l)) => {
            let l: f64 = l.trim().parse().map_err(|_| Error::Input(format!("bad Poisson mean `{l}`")))?;
            DegreeDist::poisson(l)
        }
        Some(("file", p)) => DegreeDist::from_weights(read_weights(Path::new(p))?),
        _ => Err(Error::Input(format!("distribution must be `poisson:<mean>` or `file:<path>`, got `{s}`"))),
    }
}

/// Rounds to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", (SIG_DIGITS - 1) as usize, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *num = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with fractional numbers rounded to ten significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Input(e.to_string()))?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::Input(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub stddev: f64,
}

impl Summary {
    /// Sample statistics; `stddev` uses the `n - 1` denominator and is 0 for one value.
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Summary {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            stddev: var.sqrt(),
        }
    }
}

/// Min, mean and max of a count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountSummary {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

impl CountSummary {
    pub fn of(values: &[usize]) -> CountSummary {
        CountSummary {
            min: values.iter().copied().min().unwrap_or(0),
            mean: values.iter().sum::<usize>() as f64 / values.len().max(1) as f64,
            max: values.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSpec {
    pub source: String,
    pub directedness: Option<Directedness>,
    pub indexing: Option<Indexing>,
    pub n: usize,
    pub edges: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgoRow {
    pub algo: Algo,
    pub matching_size: CountSummary,
    /// `max(1, n - |M|)` per run.
    pub controllers: CountSummary,
    pub u1_mean: f64,
    pub u2_mean: f64,
    pub core_size_mean: f64,
    /// Wall time in seconds over all runs; only filled when timing is requested.
    pub runtime: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Predictions {
    pub u_star: Option<f64>,
    pub predicted_controllers: Option<usize>,
    pub k_lambda: Option<f64>,
    pub h_lambda: Option<f64>,
    pub error: Option<String>,
}

impl Predictions {
    /// Fixed-point prediction from the net's own degree sequences.
    pub fn empirical(net: &BipartiteNet) -> Predictions {
        let sol = empirical_gen_funcs(net).and_then(|(gi, go)| solve_fixed_point(&gi, &go, DEFAULT_TOL));
        match sol {
            Ok(s) => Predictions {
                u_star: Some(s.u_star),
                predicted_controllers: Some(((net.n() as f64 * s.u_star).round() as usize).max(1)),
                ..Default::default()
            },
            Err(e) => Predictions { error: Some(e.to_string()), ..Default::default() },
        }
    }

    /// Adds the closed-form Poisson constants.
    pub fn with_poisson(mut self, lambda: f64) -> Predictions {
        if let Ok(p) = solve_poisson_ks(lambda) {
            self.k_lambda = Some(p.k_lambda);
            self.h_lambda = Some(p.h_lambda);
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RewireStats {
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub spec: ReportSpec,
    pub rows: Vec<AlgoRow>,
    pub predictions: Predictions,
    pub rewire_stats: RewireStats,
}

impl Report {
    /// Columns: algo, matching_min, matching_mean, matching_max, controllers_min,
    /// controllers_mean, controllers_max, u1_mean, u2_mean, core_size_mean.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "algo,matching_min,matching_mean,matching_max,controllers_min,controllers_mean,controllers_max,u1_mean,u2_mean,core_size_mean\n",
        );
        for r in &self.rows {
            let (m, c) = (&r.matching_size, &r.controllers);
            let f = |x: f64| round_sig(x).to_string();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.algo.name(),
                m.min,
                f(m.mean),
                m.max,
                c.min,
                f(c.mean),
                c.max,
                f(r.u1_mean),
                f(r.u2_mean),
                f(r.core_size_mean)
            ));
        }
        out
    }
}

/// Stream index offset separating rewiring draws from tie-break draws.
const REWIRE_STREAM: u64 = 1 << 32;

#[derive(Clone, Debug)]
pub struct TableOptions {
    pub trials: usize,
    pub seed: u64,
    pub timing: bool,
}

pub fn run_table(file: &EdgeListFile, trials: usize, seed: u64) -> Result<Report> {
    let parsed = parse_edge_list(file)?;
    let spec = ReportSpec {
        source: file.path.display().to_string(),
        directedness: Some(file.directedness),
        indexing: Some(file.indexing),
        n: parsed.net.n(),
        edges: parsed.lines,
        trials,
        seed,
    };
    table_report(&parsed.net, spec, &TableOptions { trials, seed, timing: false })
}

/// OKS and KS over `trials` tie-break streams, exact matching once, and exact
/// matching on `trials` degree-preserving rewirings.
pub fn table_report(net: &BipartiteNet, spec: ReportSpec, opts: &TableOptions) -> Result<Report> {
    if opts.trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    let n = net.n();
    let ctrl = |m: usize| n.saturating_sub(m).max(1);
    let mut rows = Vec::new();
    for algo in [Algo::Oks, Algo::Ks] {
        let start = Instant::now();
        let runs: Vec<_> = (0..opts.trials as u64)
            .into_par_iter()
            .map(|t| run_heuristic(algo, net, &mut rng::stream(opts.seed, t), None))
            .collect::<Result<_>>()?;
        let elapsed = start.elapsed().as_secs_f64();
        let sizes: Vec<usize> = runs.iter().map(|r| r.matching.len()).collect();
        let mean_of = |f: &dyn Fn(&crate::matching::RunStats) -> usize| {
            runs.iter().map(|r| f(r) as f64).sum::<f64>() / runs.len() as f64
        };
        rows.push(AlgoRow {
            algo,
            controllers: CountSummary::of(&sizes.iter().map(|&m| ctrl(m)).collect::<Vec<_>>()),
            matching_size: CountSummary::of(&sizes),
            u1_mean: mean_of(&|r| r.phase1_unmatched),
            u2_mean: mean_of(&|r| r.phase2_unmatched),
            core_size_mean: mean_of(&|r| r.core_size),
            runtime: opts.timing.then_some(elapsed),
        });
    }
    let start = Instant::now();
    let size = max_matching(net).len();
    let elapsed = start.elapsed().as_secs_f64();
    let unmatched = (n - size) as f64;
    rows.push(AlgoRow {
        algo: Algo::Max,
        matching_size: CountSummary::of(&[size]),
        controllers: CountSummary::of(&[ctrl(size)]),
        u1_mean: unmatched,
        u2_mean: 0.0,
        core_size_mean: 0.0,
        runtime: opts.timing.then_some(elapsed),
    });
    let rewired: Vec<f64> = (0..opts.trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = rewire_with(net, &mut rng::stream(opts.seed, REWIRE_STREAM + t));
            ctrl(max_matching(&g).len()) as f64
        })
        .collect();
    let rs = Summary::of(&rewired);
    Ok(Report {
        schema: REPORT_SCHEMA,
        spec,
        rows,
        predictions: Predictions::empirical(net),
        rewire_stats: RewireStats { trials: opts.trials, mean: rs.mean, stddev: rs.stddev },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct McSummary {
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    /// Matched fraction `|M| / n` per trial, in trial order.
    pub values: Vec<f64>,
}

/// Trial `t` generates and matches from `stream(master_seed, t)`; results are
/// merged by trial index, so the summary does not depend on scheduling.
pub fn monte_carlo(spec: &GenSpec, algo: Algo, trials: usize, master_seed: u64) -> Result<McSummary> {
    if trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    spec.validate()?;
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(master_seed, t);
            let net = generate_with(spec, &mut r)?;
            let size = match algo {
                Algo::Max => max_matching(&net).len(),
                _ => run_heuristic(algo, &net, &mut r, None)?.matching.len(),
            };
            Ok(size as f64 / spec.n as f64)
        })
        .collect::<Result<_>>()?;
    let s = Summary::of(&values);
    Ok(McSummary { trials, mean: s.mean, stddev: s.stddev, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::Model;

    fn parse(text: &str, d: Directedness, i: Indexing) -> Result<ParsedEdgeList> {
        parse_edge_list_str(text, d, i, "#")
    }

    #[test]
    fn directed_zero_indexed() {
        let p = parse("0 1\n1 2\n", Directedness::Directed, Indexing::Zero).unwrap();
        assert_eq!((p.net.n(), p.net.edge_count()), (3, 2));
    }

    #[test]
    fn undirected_one_indexed_commas() {
        let p = parse("1,2\n2,3\n", Directedness::Undirected, Indexing::One).unwrap();
        assert_eq!((p.net.n(), p.net.edge_count()), (3, 4));
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let p = parse("# header\r\n\r\n0\t1\r\n# 5 6\r\n1  0\r\n", Directedness::Directed, Indexing::Zero).unwrap();
        assert_eq!((p.net.n(), p.net.edge_count(), p.lines), (2, 2, 2));
    }

    #[test]
    fn auto_remap_in_order_of_appearance() {
        let p = parse("b a\na c\nb a\n", Directedness::Directed, Indexing::Auto).unwrap();
        assert_eq!(p.labels.unwrap(), vec!["b", "a", "c"]);
        assert_eq!(p.net.edge_count(), 3);
        assert!(p.net.has_edge(0, 1));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for (text, line) in [("0 1\n0 1 2\n", 2), ("0 1\n\nx 1\n", 3), ("0\n", 1)] {
            match parse(text, Directedness::Directed, Indexing::Zero) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(parse("0 1\n", Directedness::Directed, Indexing::One), Err(Error::Parse { line: 1, .. })));
        assert!(matches!("sideways".parse::<Directedness>(), Err(Error::Input(_))));
    }

    #[test]
    fn rounding_keeps_ten_digits() {
        assert_eq!(round_sig(0.123456789012345), 0.1234567890);
        assert_eq!(round_sig(123456.78901234), 123456.7890);
        let j = to_json(&serde_json::json!({"a": 1.0 / 3.0, "b": 7})).unwrap();
        assert!(j.contains("0.3333333333") && !j.contains("0.33333333333") && j.contains("\"b\": 7"));
    }

    #[test]
    fn empty_net_table_has_n_controllers() {
        let net = BipartiteNet::empty(5);
        let spec = ReportSpec { source: "empty".into(), directedness: None, indexing: None, n: 5, edges: 0, trials: 3, seed: 1 };
        let r = table_report(&net, spec, &TableOptions { trials: 3, seed: 1, timing: false }).unwrap();
        assert_eq!(r.schema, 1);
        for row in &r.rows {
            assert_eq!((row.controllers.min, row.controllers.max), (5, 5));
        }
        assert_eq!(r.rewire_stats.mean, 5.0);
        assert!(r.rows.iter().all(|row| row.runtime.is_none()));
    }

    #[test]
    fn monte_carlo_single_trial_and_determinism() {
        let spec = GenSpec::new(Model::ErDirected, 500, 2.0, 0);
        let one = monte_carlo(&spec, Algo::Ks, 1, 9).unwrap();
        assert_eq!((one.mean, one.stddev), (one.values[0], 0.0));
        let a = monte_carlo(&spec, Algo::Greedy, 8, 4).unwrap();
        let b = monte_carlo(&spec, Algo::Greedy, 8, 4).unwrap();
        assert_eq!(a.values, b.values);
        assert!(matches!(monte_carlo(&spec, Algo::Ks, 0, 1), Err(Error::Input(_))));
    }

    #[test]
    fn dist_strings() {
        assert!((parse_dist("poisson:2").unwrap().mean() - 2.0).abs() < 1e-9);
        assert!(parse_dist("geometric:2").is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        std::fs::write(&p, "# p(0) p(1) p(2)\n0, 1\n1\n").unwrap();
        let d = parse_dist(&format!("file:{}", p.display())).unwrap();
        assert_eq!(d.pmf(), &[0.0, 0.5, 0.5]);
    }
}
