//! percolab: bond percolation on random d-regular graphs in the critical
//! window, as subcommands with reproducible seeds.
//!
//! Data goes to stdout (or --out); progress, effective settings, and
//! human-readable tables go to stderr. Identical argv + seed reproduce
//! identical stdout and files.

use percolab::experiments::{
    persist, phase_statistics, scaling_study, ExperimentConfig, ExperimentError, RunManifest,
};
use percolab::exploration::{run as run_exploration, Input};
use percolab::graph::{GraphError, RegularGraph};
use percolab::metrics::{component_subgraph, summarize_component, DEFAULT_EXACT_CAP};
use percolab::percolation::{critical_p, percolate};
use percolab::sampler::{enumerate_regular, sample_graph, SampleError, SamplerPolicy};
use percolab::verify::{exact_edge_probability, frontier_statistics, growth_check, run_switching_suite};
use percolab::StreamKey;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
percolab — critical bond percolation on random d-regular graphs

USAGE:
  percolab <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
  sample      Sample a d-regular graph and emit its edge list
  percolate   Percolate a graph and report retained edges + components
  explore     Run the frontier exploration and dump the trajectory
  metrics     Component summaries (size, diameter, mixing time)
  verify      Bound-verification suites (switchings, frontier, growth, edgeprob)
  scaling     Replicated critical-window scaling study
  phases      Two-phase stopping-time statistics
  enumerate   Exhaustively enumerate small d-regular graphs

GLOBAL FLAGS (accepted by every subcommand where meaningful):
  --seed <u64>      Master seed; generated and printed if omitted
  --threads <n>     Worker threads (default: available parallelism)
  --out <path>      Output file or directory (default: stdout)
  --format <fmt>    csv | jsonl for tabular outputs (default: jsonl)
  --config <file>   Flat key=value config file (scaling)
  --help            Subcommand help

EXIT CODES:
  0 success, 1 usage error, 2 precondition/parity error,
  3 verification-suite failure, 4 I/O error.
";

enum CliError {
    Usage(String),
    Precondition(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Precondition(m)
            | CliError::Verification(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io(m) => CliError::Io(m),
            ExperimentError::Config(m) => CliError::Usage(m),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(cmd) = args.first() else {
        eprint!("{USAGE}");
        return Err(CliError::Usage("missing subcommand".into()));
    };
    let rest = &args[1..];
    match cmd.as_str() {
        "sample" => cmd_sample(rest),
        "percolate" => cmd_percolate(rest),
        "explore" => cmd_explore(rest),
        "metrics" => cmd_metrics(rest),
        "verify" => cmd_verify(rest),
        "scaling" => cmd_scaling(rest),
        "phases" => cmd_phases(rest),
        "enumerate" => cmd_enumerate(rest),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!(
            "unknown subcommand {other:?}; see --help"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------------

struct Flags {
    pairs: Vec<(String, Option<String>)>,
    used: Vec<bool>,
    known: Vec<&'static str>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, CliError> {
        let mut pairs = Vec::new();
        let mut it = args.iter().peekable();
        while let Some(arg) = it.next() {
            let Some(stripped) = arg.strip_prefix("--") else {
                return Err(CliError::Usage(format!(
                    "unexpected positional argument {arg:?}"
                )));
            };
            if let Some((k, v)) = stripped.split_once('=') {
                pairs.push((k.to_string(), Some(v.to_string())));
            } else if it
                .peek()
                .is_some_and(|next| !next.starts_with("--"))
            {
                pairs.push((stripped.to_string(), Some(it.next().unwrap().clone())));
            } else {
                pairs.push((stripped.to_string(), None));
            }
        }
        let used = vec![false; pairs.len()];
        Ok(Flags {
            pairs,
            used,
            known: Vec::new(),
        })
    }

    fn take(&mut self, name: &'static str) -> Option<String> {
        self.known.push(name);
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == name && !self.used[i] {
                self.used[i] = true;
                return v.clone();
            }
        }
        None
    }

    fn take_bool(&mut self, name: &'static str) -> bool {
        self.known.push(name);
        for (i, (k, _)) in self.pairs.iter().enumerate() {
            if k == name && !self.used[i] {
                self.used[i] = true;
                return true;
            }
        }
        false
    }

    fn take_parsed<T: std::str::FromStr>(
        &mut self,
        name: &'static str,
    ) -> Result<Option<T>, CliError> {
        match self.take(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value for --{name}: {v:?}"))),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, name: &'static str) -> Result<T, CliError> {
        self.take_parsed(name)?
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    /// Errors on any unconsumed flag, suggesting the closest known one.
    fn finish(self) -> Result<(), CliError> {
        for (i, (k, _)) in self.pairs.iter().enumerate() {
            if !self.used[i] {
                let suggestion = self
                    .known
                    .iter()
                    .map(|cand| (edit_distance(k, cand), *cand))
                    .min()
                    .filter(|(dist, _)| *dist <= 3)
                    .map(|(_, cand)| format!("; did you mean --{cand}?"))
                    .unwrap_or_default();
                return Err(CliError::Usage(format!("unknown flag --{k}{suggestion}")));
            }
        }
        Ok(())
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Takes --seed or generates one from system entropy, always reporting the
/// effective value on stderr first so every run is reproducible.
fn effective_seed(flags: &mut Flags) -> Result<u64, CliError> {
    let seed = match flags.take_parsed::<u64>("seed")? {
        Some(s) => s,
        None => {
            let t = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            t ^ (std::process::id() as u64) << 32
        }
    };
    eprintln!("seed: {seed}");
    Ok(seed)
}

fn parse_sampler(flags: &mut Flags) -> Result<SamplerPolicy, CliError> {
    match flags.take("sampler") {
        None => Ok(SamplerPolicy::Auto),
        Some(v) => SamplerPolicy::parse(&v).ok_or_else(|| {
            CliError::Usage(format!(
                "invalid --sampler {v:?} (auto | rejection | chain | pairing-repair)"
            ))
        }),
    }
}

fn threads(flags: &mut Flags) -> Result<usize, CliError> {
    Ok(flags
        .take_parsed::<usize>("threads")?
        .unwrap_or_else(percolab::pool::default_workers))
}

enum Format {
    Jsonl,
    Csv,
}

fn format_flag(flags: &mut Flags) -> Result<Format, CliError> {
    match flags.take("format").as_deref() {
        None | Some("jsonl") => Ok(Format::Jsonl),
        Some("csv") => Ok(Format::Csv),
        Some(other) => Err(CliError::Usage(format!(
            "invalid --format {other:?} (csv | jsonl)"
        ))),
    }
}

/// Writes to --out or stdout.
fn emit(out: &Option<PathBuf>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, data)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{data}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn graph_from_flags(
    flags: &mut Flags,
    seed: u64,
    sampler: SamplerPolicy,
) -> Result<(RegularGraph, String), CliError> {
    if let Some(path) = flags.take("graph") {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let g = RegularGraph::parse_edge_list(&text)?;
        return Ok((g, format!("file:{path}")));
    }
    let n: u32 = flags.require("n")?;
    let d: u32 = flags.require("d")?;
    let stream = StreamKey::new(seed).child(0x5347);
    let (g, kind) = sample_graph(n, d, sampler, &mut stream.rng())?;
    Ok((g, kind.to_string()))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

const SAMPLE_HELP: &str = "\
percolab sample — sample a d-regular graph, emit \"n d m\" edge list

FLAGS:
  --n <int>          vertex count (required)
  --d <int>          degree (required)
  --sampler <name>   auto | rejection | chain | pairing-repair (default auto)
  --seed <u64>       master seed (generated and printed if omitted)
  --out <path>       write to file instead of stdout
  --help
";

fn cmd_sample(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{SAMPLE_HELP}");
        return Ok(());
    }
    let seed = effective_seed(&mut flags)?;
    let n: u32 = flags.require("n")?;
    let d: u32 = flags.require("d")?;
    let sampler = parse_sampler(&mut flags)?;
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;
    let stream = StreamKey::new(seed).child(0x5347);
    let (g, kind) = sample_graph(n, d, sampler, &mut stream.rng())?;
    eprintln!("settings: {{\"n\":{n},\"d\":{d},\"sampler\":\"{kind}\",\"seed\":{seed}}}");
    emit(&out, &g.to_edge_list_string())
}

const PERCOLATE_HELP: &str = "\
percolab percolate — retain each edge with probability p, report outcome

FLAGS:
  --n <int> --d <int>   sample the base graph (or use --graph)
  --graph <file>        read base graph from an edge-list file
  --p <float>           retention probability (or use --lambda)
  --lambda <float>      window location: p = (1 + lambda n^(-1/3))/(d-1)
  --sampler <name>      auto | rejection | chain | pairing-repair
  --seed <u64>          master seed
  --out <path>          write JSON row to file instead of stdout
  --help
";

fn cmd_percolate(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{PERCOLATE_HELP}");
        return Ok(());
    }
    let seed = effective_seed(&mut flags)?;
    let sampler = parse_sampler(&mut flags)?;
    let (g, provenance) = graph_from_flags(&mut flags, seed, sampler)?;
    let p = resolve_p(&mut flags, &g)?;
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;
    let stream = StreamKey::new(seed).child(0x5045_5243);
    let outcome = percolate(&g, p, stream).map_err(|e| CliError::Precondition(e.to_string()))?;
    eprintln!(
        "settings: {{\"graph\":\"{provenance}\",\"p\":{p},\"seed\":{seed},\"l1\":{},\"components\":{}}}",
        outcome.largest(),
        outcome.component_count()
    );
    emit(&out, &(outcome.to_json_row() + "\n"))
}

fn resolve_p(flags: &mut Flags, g: &RegularGraph) -> Result<f64, CliError> {
    let p = flags.take_parsed::<f64>("p")?;
    let lambda = flags.take_parsed::<f64>("lambda")?;
    match (p, lambda) {
        (Some(_), Some(_)) => Err(CliError::Usage("--p conflicts with --lambda".into())),
        (Some(p), None) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Precondition(format!("p = {p} not in [0, 1]")));
            }
            Ok(p)
        }
        (None, Some(l)) => {
            critical_p(g.d(), l, g.n()).map_err(|e| CliError::Precondition(e.to_string()))
        }
        (None, None) => {
            critical_p(g.d(), 0.0, g.n()).map_err(|e| CliError::Precondition(e.to_string()))
        }
    }
}

const EXPLORE_HELP: &str = "\
percolab explore — frontier exploration trajectory dump (JSON lines)

Output: one header object, then one step record per line. The X column of
the trajectory is the header's x0 followed by each step's x_after.

FLAGS:
  --n <int> --d <int>   sample the base graph (or use --graph)
  --graph <file>        read base graph from an edge-list file
  --p <float>           retention probability (or --lambda; default lambda 0)
  --lambda <float>
  --t-max <int>         maximum steps (default n*d)
  --every <int>         downsample: keep every k-th step plus fresh steps
  --sampler <name>
  --seed <u64>
  --out <path>
  --help
";

fn cmd_explore(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{EXPLORE_HELP}");
        return Ok(());
    }
    let seed = effective_seed(&mut flags)?;
    let sampler = parse_sampler(&mut flags)?;
    let (g, provenance) = graph_from_flags(&mut flags, seed, sampler)?;
    let p = resolve_p(&mut flags, &g)?;
    let t_max = flags
        .take_parsed::<u64>("t-max")?
        .unwrap_or(g.n() as u64 * g.d() as u64);
    let every = flags.take_parsed::<u64>("every")?.unwrap_or(1).max(1);
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;
    let root = StreamKey::new(seed);
    let input = Input::random(g, &mut root.child(0x494e).rng());
    let traj = run_exploration(&input, p, root.child(0x5045_5243), t_max);
    let mut buf = String::new();
    buf.push_str(&format!(
        "{{\"type\":\"header\",\"n\":{},\"d\":{},\"p\":{},\"seed\":{},\"t_max\":{},\"x0\":0,\"graph\":\"{}\",\"exhausted\":{},\"steps\":{}}}\n",
        traj.n, traj.d, traj.p, seed, t_max, provenance, traj.exhausted, traj.steps.len()
    ));
    for rec in &traj.steps {
        if rec.t % every == 0 || rec.fresh || rec.t == traj.steps.len() as u64 {
            buf.push_str(&serde_json::to_string(rec).expect("step serializes"));
            buf.push('\n');
        }
    }
    emit(&out, &buf)
}

const METRICS_HELP: &str = "\
percolab metrics — component summaries over replicates

Rows: replicate, size, edge_count, diameter, t_mix, is_exact (jsonl/csv).

FLAGS:
  --n <int> --d <int>     grid point (required)
  --lambda <float>        window location (default 0)
  --replicates <int>      default 1
  --top <int>             components per replicate, largest first (default 1)
  --exact-cap <int>       exact-mixing size cap (default 5000)
  --estimate              estimate mixing for components above the cap
  --no-mixing             skip mixing entirely
  --sampler <name>  --seed <u64>  --threads <n>  --format csv|jsonl  --out <path>
  --help
";

fn cmd_metrics(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{METRICS_HELP}");
        return Ok(());
    }
    let seed = effective_seed(&mut flags)?;
    let n: u32 = flags.require("n")?;
    let d: u32 = flags.require("d")?;
    let lambda = flags.take_parsed::<f64>("lambda")?.unwrap_or(0.0);
    let replicates = flags.take_parsed::<u32>("replicates")?.unwrap_or(1);
    let top = flags.take_parsed::<usize>("top")?.unwrap_or(1).max(1);
    let exact_cap = flags
        .take_parsed::<usize>("exact-cap")?
        .unwrap_or(DEFAULT_EXACT_CAP);
    let estimate = flags.take_bool("estimate");
    let no_mixing = flags.take_bool("no-mixing");
    let sampler = parse_sampler(&mut flags)?;
    let workers = threads(&mut flags)?;
    let format = format_flag(&mut flags)?;
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;

    let p = critical_p(d, lambda, n).map_err(|e| CliError::Precondition(e.to_string()))?;
    eprintln!(
        "settings: {{\"n\":{n},\"d\":{d},\"lambda\":{lambda},\"p\":{p},\"replicates\":{replicates},\"top\":{top},\"exact_cap\":{exact_cap},\"estimate\":{estimate},\"mixing\":{},\"seed\":{seed},\"threads\":{workers}}}",
        !no_mixing
    );
    let rows: Vec<Result<Vec<String>, String>> =
        percolab::pool::parallel_map(replicates as usize, workers, |rep| {
            let stream = percolab::experiments::replicate_stream(seed, n, d, rep as u32);
            let mut rng = stream.child(0x4752_4150_48).rng();
            let (g, _) = sample_graph(n, d, sampler, &mut rng).map_err(|e| e.to_string())?;
            let outcome =
                percolate(&g, p, stream.child(0x5045_5243)).map_err(|e| e.to_string())?;
            let mut size_by_id = vec![0u32; outcome.component_sizes.len()];
            for &c in &outcome.component_id {
                size_by_id[c as usize] += 1;
            }
            let mut ids: Vec<u32> = (0..outcome.component_sizes.len() as u32).collect();
            ids.sort_by_key(|&c| std::cmp::Reverse(size_by_id[c as usize]));
            let mut lines = Vec::new();
            for &comp_id in ids.iter().take(top) {
                let comp = component_subgraph(&outcome, comp_id);
                let s = summarize_component(
                    &comp,
                    percolab::metrics::DEFAULT_MIXING_EPS,
                    exact_cap,
                    !no_mixing,
                    estimate,
                    stream.child(0x4d49_58),
                )
                .map_err(|e| e.to_string())?;
                let line = match format {
                    Format::Jsonl => format!(
                        "{{\"replicate\":{rep},\"size\":{},\"edge_count\":{},\"diameter\":{},\"t_mix\":{},\"is_exact\":{},\"capped\":{}}}",
                        s.size,
                        s.edge_count,
                        s.diameter,
                        s.t_mix.map_or("null".into(), |t| t.to_string()),
                        s.is_exact_mixing,
                        s.mixing_capped
                    ),
                    Format::Csv => format!(
                        "{rep},{},{},{},{},{},{}",
                        s.size,
                        s.edge_count,
                        s.diameter,
                        s.t_mix.map_or(String::new(), |t| t.to_string()),
                        s.is_exact_mixing,
                        s.mixing_capped
                    ),
                };
                lines.push(line);
            }
            Ok(lines)
        });
    let mut buf = String::new();
    if matches!(format, Format::Csv) {
        buf.push_str("replicate,size,edge_count,diameter,t_mix,is_exact,capped\n");
    }
    for r in rows {
        match r {
            Ok(lines) => {
                for line in lines {
                    buf.push_str(&line);
                    buf.push('\n');
                }
            }
            Err(e) => return Err(CliError::Precondition(e)),
        }
    }
    emit(&out, &buf)
}

const VERIFY_HELP: &str = "\
percolab verify — bound-verification suites (exit 3 on failure)

SUITES:
  switchings   deterministic switching-count bounds on explored states
  frontier     frontier moment bounds (E[Y], E[Z], E[eta], E[eta^2])
  growth       explored-growth window bounds over (0, T1)
  edgeprob     exact conditional edge probabilities at enumerable sizes
  all          every suite above

FLAGS:
  --suite <name>        required
  --n <int> --d <int>   state scale (switchings/frontier/growth)
  --trials <int>        states or replicates (default 100)
  --mu <float>          subcritical offset for frontier/growth (default 0)
  --delta <float>       growth slack (default 0.1)
  --seed <u64>  --threads <n>  --out <path>
  --help
";

fn cmd_verify(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{VERIFY_HELP}");
        return Ok(());
    }
    let suite = flags
        .take("suite")
        .ok_or_else(|| CliError::Usage("missing required flag --suite".into()))?;
    let seed = effective_seed(&mut flags)?;
    let n = flags.take_parsed::<u32>("n")?.unwrap_or(200);
    let d = flags.take_parsed::<u32>("d")?.unwrap_or(3);
    let trials = flags.take_parsed::<u32>("trials")?.unwrap_or(100);
    let mu = flags.take_parsed::<f64>("mu")?.unwrap_or(0.0);
    let delta = flags.take_parsed::<f64>("delta")?.unwrap_or(0.1);
    let workers = threads(&mut flags)?;
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;

    let mut results: Vec<(String, bool, String)> = Vec::new();
    let run_suite = |name: &str| suite == name || suite == "all";

    if run_suite("switchings") {
        let report = run_switching_suite(n, d, trials, StreamKey::new(seed).child(1))
            .map_err(|e| CliError::Precondition(e.to_string()))?;
        results.push((
            "switchings".into(),
            report.all_ok,
            serde_json::to_string(&report).unwrap(),
        ));
    }
    if run_suite("frontier") || run_suite("growth") {
        let p = ((1.0 - mu * (n as f64).powf(-1.0 / 3.0)) / (d as f64 - 1.0)).clamp(0.0, 1.0);
        let t1 = (5.0 * d as f64 * (n as f64).powf(2.0 / 3.0) / 6.0).floor() as u64;
        let t_needed = (d as f64 * (n as f64).powf(2.0 / 3.0)).ceil() as u64 + 1;
        let t_max = t1.max(t_needed);
        let trajs: Vec<Result<percolab::exploration::Trajectory, String>> =
            percolab::pool::parallel_map(trials as usize, workers, |rep| {
                let stream = percolab::experiments::replicate_stream(seed, n, d, rep as u32);
                let mut rng = stream.child(0x4752_4150_48).rng();
                let (g, _) = sample_graph(n, d, SamplerPolicy::Auto, &mut rng)
                    .map_err(|e| e.to_string())?;
                let input = Input::random(g, &mut stream.child(0x494e).rng());
                Ok(run_exploration(
                    &input,
                    p,
                    stream.child(0x5045_5243),
                    t_max,
                ))
            });
        let mut ok_trajs = Vec::new();
        for t in trajs {
            ok_trajs.push(t.map_err(CliError::Precondition)?);
        }
        if run_suite("frontier") {
            let report = frontier_statistics(&ok_trajs, mu)
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            results.push((
                "frontier".into(),
                report.all_ok,
                serde_json::to_string(&report).unwrap(),
            ));
        }
        if run_suite("growth") {
            let mut lower = 0u32;
            let mut upper = 0u32;
            let mut a_ok = 0u32;
            let mut count = 0u32;
            for traj in &ok_trajs {
                let t2 = t1.min(traj.steps.len() as u64);
                let r = growth_check(traj, 0, t2, delta)
                    .map_err(|e| CliError::Precondition(e.to_string()))?;
                count += 1;
                lower += r.lower_ok as u32;
                upper += r.upper_ok as u32;
                a_ok += r.a_bound_ok as u32;
            }
            // The window bounds hold with probability 1 - o(1); demand at
            // least 99% here.
            let ok = count > 0
                && lower * 100 >= count * 99
                && upper * 100 >= count * 99
                && a_ok * 100 >= count * 99;
            results.push((
                "growth".into(),
                ok,
                format!(
                    "{{\"trials\":{count},\"lower_ok\":{lower},\"upper_ok\":{upper},\"a_bound_ok\":{a_ok},\"delta\":{delta}}}"
                ),
            ));
        }
    }
    if run_suite("edgeprob") {
        let mut ok = true;
        let mut details = Vec::new();
        for (nn, dd) in [(4u32, 3u32), (5, 2), (6, 2), (6, 3)] {
            let p = exact_edge_probability(nn, dd, &[], &[], &[], 0, 1)
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            let expect_num = dd as u64;
            let expect_den = (nn - 1) as u64;
            let matches = p.numerator * expect_den == expect_num * p.denominator;
            ok &= matches;
            details.push(format!(
                "{{\"n\":{nn},\"d\":{dd},\"num\":{},\"den\":{},\"matches_d_over_n_minus_1\":{matches}}}",
                p.numerator, p.denominator
            ));
        }
        let fixture = exact_edge_probability(6, 3, &[0], &[], &[(0, 1)], 0, 2)
            .map_err(|e| CliError::Precondition(e.to_string()))?;
        let fixture_ok = fixture.reduced() == (1, 2);
        ok &= fixture_ok;
        details.push(format!(
            "{{\"fixture\":\"(6,3) S={{0}} F={{0-1}} P[0-2]\",\"num\":{},\"den\":{},\"ok\":{fixture_ok}}}",
            fixture.numerator, fixture.denominator
        ));
        results.push(("edgeprob".into(), ok, format!("[{}]", details.join(","))));
    }
    if results.is_empty() {
        return Err(CliError::Usage(format!(
            "unknown suite {suite:?} (switchings | frontier | growth | edgeprob | all)"
        )));
    }

    let mut buf = String::new();
    let mut all_ok = true;
    for (name, ok, payload) in &results {
        all_ok &= ok;
        buf.push_str(&format!(
            "{{\"suite\":\"{name}\",\"ok\":{ok},\"report\":{payload}}}\n"
        ));
        eprintln!("{:<12} {}", name, if *ok { "PASS" } else { "FAIL" });
    }
    emit(&out, &buf)?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Verification("one or more suites failed".into()))
    }
}

const SCALING_HELP: &str = "\
percolab scaling — replicated critical-window scaling study

Writes rows.jsonl, rows.csv, manifest.json, summary.json under --out.
Config file keys (all overridable by flags of the same name):
  ns, ds (ints or n-1), lambdas, replicates, seed, sampler, diameter,
  mixing, estimate_mixing, phase, a, exact_cap, eps, workers

FLAGS:
  --config <file>       flat key=value config
  --ns / --ds / --lambdas <comma lists>
  --replicates <int>  --seed <u64>  --sampler <name>  --threads <n>
  --diameter on|off  --mixing on|off  --estimate-mixing on|off
  --phase on|off  --a <float>  --exact-cap <int>  --eps <float>
  --out <dir>           output directory (required)
  --help
";

fn cmd_scaling(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{SCALING_HELP}");
        return Ok(());
    }
    let mut cfg = match flags.take("config") {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for (flag, key) in [
        ("ns", "ns"),
        ("ds", "ds"),
        ("lambdas", "lambdas"),
        ("replicates", "replicates"),
        ("sampler", "sampler"),
        ("diameter", "diameter"),
        ("mixing", "mixing"),
        ("estimate-mixing", "estimate_mixing"),
        ("phase", "phase"),
        ("a", "a"),
        ("exact-cap", "exact_cap"),
        ("eps", "eps"),
    ] {
        if let Some(v) = flags.take(flag) {
            cfg.set(key, &v)
                .map_err(|m| CliError::Usage(format!("--{flag}: {m}")))?;
        }
    }
    if let Some(seed) = flags.take_parsed::<u64>("seed")? {
        cfg.master_seed = seed;
    }
    if let Some(t) = flags.take_parsed::<usize>("threads")? {
        cfg.workers = t;
    }
    let out = PathBuf::from(
        flags
            .take("out")
            .ok_or_else(|| CliError::Usage("missing required flag --out <dir>".into()))?,
    );
    flags.finish()?;
    eprintln!("seed: {}", cfg.master_seed);
    eprintln!(
        "settings: {}",
        serde_json::to_string(&cfg).expect("config serializes")
    );

    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let t0 = std::time::Instant::now();
    let study = scaling_study(&cfg)?;
    let manifest = RunManifest::new(&cfg, study.rows.len() as u64, started, t0.elapsed().as_millis());
    let (jsonl, csv, mpath) = persist(&study.rows, &manifest, &out)?;
    let summary_path = out.join("summary.json");
    let summary_json = serde_json::to_string_pretty(&study.summaries)
        .map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&summary_path, summary_json)
        .map_err(|e| CliError::Io(format!("{}: {e}", summary_path.display())))?;
    for (n, d, lambda, msg) in &study.aborted {
        eprintln!("aborted grid point (n={n}, d={d}, lambda={lambda}): {msg}");
    }
    eprintln!(
        "wrote {} rows: {} {} {} {}",
        study.rows.len(),
        jsonl.display(),
        csv.display(),
        mpath.display(),
        summary_path.display()
    );
    for s in &study.summaries {
        eprintln!(
            "n={:<8} d={:<5} lambda={:<5} L1 median={:<8} L1*n^-2/3={:.3} [{:.3}, {:.3}]{}{}",
            s.n,
            s.d,
            s.lambda,
            s.l1_median,
            s.l1_scaled_median,
            s.l1_scaled_q1,
            s.l1_scaled_q3,
            s.diam_scaled_median
                .map(|v| format!(" diam*n^-1/3={v:.3}"))
                .unwrap_or_default(),
            s.tmix_scaled_median
                .map(|v| format!(" tmix*n^-1={v:.4} ({} values)", s.tmix_values))
                .unwrap_or_default(),
        );
    }
    Ok(())
}

const PHASES_HELP: &str = "\
percolab phases — two-phase stopping-time statistics

Checks the four inequalities P[tau1=T1] <= 12 A^(-1/2),
P[not E] <= 13 A^(-1/2), P[tau2<T2 | E] <= 5 A^(-1/2),
P[L1 < A^(-1) n^(2/3)] <= 19 A^(-1/2).

FLAGS:
  --n <int> --d <int>   grid point (required)
  --mu <float>          subcritical offset (default 0)
  --a <float>           scale parameter A (default 10000)
  --replicates <int>    default 100
  --sampler <name>  --seed <u64>  --threads <n>  --out <path>
  --help
";

fn cmd_phases(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{PHASES_HELP}");
        return Ok(());
    }
    let seed = effective_seed(&mut flags)?;
    let n: u32 = flags.require("n")?;
    let d: u32 = flags.require("d")?;
    let mu = flags.take_parsed::<f64>("mu")?.unwrap_or(0.0);
    let a = flags.take_parsed::<f64>("a")?.unwrap_or(10_000.0);
    let replicates = flags.take_parsed::<u32>("replicates")?.unwrap_or(100);
    let sampler = parse_sampler(&mut flags)?;
    let workers = threads(&mut flags)?;
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;
    eprintln!(
        "settings: {{\"n\":{n},\"d\":{d},\"mu\":{mu},\"a\":{a},\"replicates\":{replicates},\"seed\":{seed},\"threads\":{workers}}}"
    );
    let report = phase_statistics(n, d, mu, a, replicates, seed, sampler, workers)?;
    for (name, check) in [
        ("P[tau1 = T1]", &report.tau1_capped),
        ("P[not E]", &report.not_e),
        ("P[tau2 < T2 | E]", &report.tau2_early_given_e),
        ("P[L1 < n^(2/3)/A]", &report.l1_small),
    ] {
        eprintln!(
            "{:<18} {}/{} = {:.4} vs bound {:.4} {}{}",
            name,
            check.events,
            check.trials,
            check.fraction,
            check.bound,
            if check.ok { "PASS" } else { "FAIL" },
            if check.vacuous { " (vacuous)" } else { "" }
        );
    }
    emit(
        &out,
        &(serde_json::to_string(&report).expect("report serializes") + "\n"),
    )?;
    if report.all_ok {
        Ok(())
    } else {
        Err(CliError::Verification("phase bound violated".into()))
    }
}

const ENUMERATE_HELP: &str = "\
percolab enumerate — all labelled simple d-regular graphs on n vertices

Default output: one \"n d m\" edge-list block per graph, blank-line
separated. With --format jsonl: one {\"edges\": [...]} object per line.

FLAGS:
  --n <int>          vertex count (required; n <= 8 unless d = n-1)
  --d <int>          degree (required)
  --format <fmt>     text | jsonl (default text)
  --out <path>
  --help
";

fn cmd_enumerate(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    if flags.take_bool("help") {
        eprint!("{ENUMERATE_HELP}");
        return Ok(());
    }
    let n: u32 = flags.require("n")?;
    let d: u32 = flags.require("d")?;
    let format = flags.take("format").unwrap_or_else(|| "text".into());
    let out = flags.take("out").map(PathBuf::from);
    flags.finish()?;
    let graphs = enumerate_regular(n, d)?;
    eprintln!("{} graphs", graphs.len());
    let mut buf = String::new();
    match format.as_str() {
        "text" => {
            for g in &graphs {
                buf.push_str(&g.to_edge_list_string());
                buf.push('\n');
            }
        }
        "jsonl" => {
            for g in &graphs {
                let edges: Vec<(u32, u32)> = g.edges().collect();
                buf.push_str(&serde_json::to_string(&serde_json::json!({"edges": edges})).unwrap());
                buf.push('\n');
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "invalid --format {other:?} (text | jsonl)"
            )))
        }
    }
    emit(&out, &buf)
}

