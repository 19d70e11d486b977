//! Command dispatch for the `motzkin` binary. Exit codes: 0 success, 1 a
//! check failed, 2 bad input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use motzkin_core::density::{
    coloring_numbers, density_bounds, BoundMethod, BoundsOptions, ColoringNumbers, DensityBounds, PeriodicSet,
    DEFAULT_STATE_CAP,
};
use motzkin_core::families::{classify, partition_check, BlockFamily, CaseLabel, FamilyCase, PartitionReport};
use motzkin_core::verify::{summarize, sweep, SweepOptions, SweepSummary, VerificationRecord};
use motzkin_core::{kappa_exact, kappa_sweep_oracle, normalize, witness_mset, DifferenceSet, Family, KappaResult, Rational};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: &str = "1";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "motzkin", version, about = "Exact kappa and maximal density for sets of forbidden differences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute kappa exactly from the pair-sum moduli
    Kappa {
        /// Comma-separated positive integers
        #[arg(long)]
        set: String,
        /// Cross-check against a scan of every modulus up to 2*max
        #[arg(long)]
        oracle: bool,
        /// Print the periodic set realizing the witness pair
        #[arg(long)]
        witness_set: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Bound or compute the maximal density
    Mu {
        #[arg(long)]
        set: String,
        /// Horizon for the prefix upper bound
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Seconds allowed for the exact computation
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Locate (a, n) in the block structure of a family
    Classify {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check every family bound over a parameter range
    Verify {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        /// Inclusive range A..B
        #[arg(long, value_parser = parse_range)]
        a_range: RangeInclusive<u64>,
        #[arg(long, value_parser = parse_range)]
        n_range: RangeInclusive<u64>,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Table)]
        format: VerifyFormat,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the exact density computation for exact cases
        #[arg(long)]
        no_mu: bool,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Seconds per record for the exact density computation
        #[arg(long, default_value_t = 5.0)]
        time_budget: f64,
    },
    /// Check that a block family tiles [start, horizon]
    PartitionCheck {
        /// Block family: 2.1 (N), 3.1 (O) or 3.3 (P)
        #[arg(long)]
        obs: String,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        horizon: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: motzkin_core::FamilyError| e.to_string())
}

/// `A..B`, inclusive at both ends.
pub fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range start `{lo}`"))?;
    let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range end `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok(lo..=hi)
}

/// A normalized set plus what normalization did to the input.
pub fn parse_set(spec: &str) -> Result<(DifferenceSet, Vec<String>), String> {
    let mut raw = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        let v: i64 = tok.parse().map_err(|_| format!("`{tok}` is not an integer"))?;
        if v <= 0 {
            return Err(format!("elements must be positive, got {v}"));
        }
        raw.push(v as u64);
    }
    let set = normalize(&raw).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut distinct = raw.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < raw.len() {
        notes.push(format!("removed {} duplicate element(s)", raw.len() - distinct.len()));
    }
    if set.normalization_factor() > 1 {
        notes.push(format!("divided by {}", set.normalization_factor()));
    }
    Ok((set, notes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaOutput {
    pub set: DifferenceSet,
    pub kappa: KappaResult,
    pub oracle: Option<KappaResult>,
    pub oracle_agrees: Option<bool>,
    pub witness_set: Option<PeriodicSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuOutput {
    pub set: DifferenceSet,
    pub bounds: DensityBounds,
    pub coloring: ColoringNumbers,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub summary: SweepSummary,
    pub records: Vec<VerificationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    Kappa(KappaOutput),
    Mu(MuOutput),
    Classify(FamilyCase),
    Verify(VerifyOutput),
    PartitionCheck(PartitionReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEnvelope {
    pub format_version: String,
    pub command: Vec<String>,
    pub notes: Vec<String>,
    pub result: Payload,
}

impl OutputEnvelope {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

struct Done {
    code: u8,
    text: String,
}

fn usage(msg: impl std::fmt::Display) -> Result<Done, Done> {
    Err(Done {
        code: EXIT_USAGE,
        text: format!("error: {msg}\n"),
    })
}

fn rat(r: &Rational) -> String {
    format!("{r} ({})", r.to_decimal(12))
}

fn method_name(m: &BoundMethod) -> String {
    match m {
        BoundMethod::PairSumKappa => "pair-sum kappa".into(),
        BoundMethod::PrefixSearch { k_max, k } => format!("prefix search (k_max={k_max}, k={k})"),
        BoundMethod::WindowCycle => "window-graph cycle".into(),
        BoundMethod::Trivial => "trivial".into(),
    }
}

/// Runs one command line; output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let (code, text, to_err) = match dispatch(cli.command, echo) {
        Ok(d) => (d.code, d.text, false),
        Err(d) => (d.code, d.text, true),
    };
    let sink: &mut dyn Write = if to_err { err } else { out };
    if sink.write_all(text.as_bytes()).is_err() {
        return EXIT_CHECK_FAILED;
    }
    code
}

fn envelope(command: Vec<String>, notes: Vec<String>, result: Payload) -> OutputEnvelope {
    OutputEnvelope {
        format_version: FORMAT_VERSION.into(),
        command,
        notes,
        result,
    }
}

fn dispatch(command: Command, echo: Vec<String>) -> Result<Done, Done> {
    match command {
        Command::Kappa {
            set,
            oracle,
            witness_set,
            format,
        } => cmd_kappa(&set, oracle, witness_set, format, echo),
        Command::Mu {
            set,
            kmax,
            state_cap,
            time_budget,
            format,
        } => cmd_mu(&set, kmax, state_cap, time_budget, format, echo),
        Command::Classify { family, a, n, format } => cmd_classify(family, a, n, format, echo),
        Command::Verify {
            family,
            a_range,
            n_range,
            format,
            out,
            no_mu,
            state_cap,
            time_budget,
        } => {
            if !(time_budget.is_finite() && time_budget >= 0.0) {
                return usage("--time-budget must be a nonnegative number of seconds");
            }
            let options = SweepOptions {
                state_cap,
                time_budget: Duration::from_secs_f64(time_budget),
                skip_mu: no_mu,
            };
            cmd_verify(family, a_range, n_range, format, out, &options, echo)
        }
        Command::PartitionCheck { obs, a, horizon, format } => cmd_partition_check(&obs, a, horizon, format, echo),
    }
}

fn cmd_kappa(spec: &str, oracle: bool, witness_set: bool, format: Format, echo: Vec<String>) -> Result<Done, Done> {
    let (set, notes) = match parse_set(spec) {
        Ok(v) => v,
        Err(e) => return usage(e),
    };
    let kappa = kappa_exact(&set);
    let oracle_result = oracle.then(|| kappa_sweep_oracle(&set, 2 * set.max()).expect("2*max >= 2"));
    let agrees = oracle_result.as_ref().map(|o| o.value == kappa.value);
    let witness = witness_set.then(|| {
        witness_mset(&set, kappa.witness_c, kappa.witness_m).expect("engine witnesses are reduced pairs")
    });
    let code = if agrees == Some(false) { EXIT_CHECK_FAILED } else { EXIT_OK };
    let output = KappaOutput {
        set,
        kappa,
        oracle: oracle_result,
        oracle_agrees: agrees,
        witness_set: witness,
    };
    let text = match format {
        Format::Json => envelope(echo, notes, Payload::Kappa(output)).to_json(),
        Format::Table => {
            let mut t = String::new();
            for n in &notes {
                let _ = writeln!(t, "note: {n}");
            }
            let k = &output.kappa;
            let _ = writeln!(t, "set      {}", output.set);
            let _ = writeln!(t, "kappa    {}", rat(&k.value));
            let _ = writeln!(t, "witness  c={} m={} d={}", k.witness_c, k.witness_m, k.achieved_d);
            if let (Some(o), Some(ok)) = (&output.oracle, output.oracle_agrees) {
                let verdict = if ok { "agrees" } else { "MISMATCH" };
                let _ = writeln!(t, "oracle   {} ({verdict})", rat(&o.value));
            }
            if let Some(w) = &output.witness_set {
                let _ = writeln!(t, "pattern  {} (period {}, density {})", w.bits(), w.period(), w.density());
            }
            t
        }
    };
    Ok(Done { code, text })
}

fn cmd_mu(
    spec: &str,
    kmax: Option<u64>,
    state_cap: usize,
    time_budget: Option<f64>,
    format: Format,
    echo: Vec<String>,
) -> Result<Done, Done> {
    let (set, notes) = match parse_set(spec) {
        Ok(v) => v,
        Err(e) => return usage(e),
    };
    if kmax == Some(0) {
        return usage("--kmax must be at least 1");
    }
    let time_budget = match time_budget {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(_) => return usage("--time-budget must be a nonnegative number of seconds"),
        None => None,
    };
    let options = BoundsOptions {
        k_max: kmax,
        state_cap,
        time_budget,
    };
    let bounds = match density_bounds(&set, &options) {
        Ok(b) => b,
        Err(e) => {
            return Err(Done {
                code: EXIT_CHECK_FAILED,
                text: format!("error: {e}\n"),
            })
        }
    };
    let coloring = coloring_numbers(&bounds).expect("bounds are positive");
    let output = MuOutput { set, bounds, coloring };
    let text = match format {
        Format::Json => envelope(echo, notes, Payload::Mu(output)).to_json(),
        Format::Table => {
            let mut t = String::new();
            for n in &notes {
                let _ = writeln!(t, "note: {n}");
            }
            let b = &output.bounds;
            let _ = writeln!(t, "set      {}", output.set);
            let _ = writeln!(t, "lower    {}  [{}]", rat(&b.lower), method_name(&b.lower_method));
            let _ = writeln!(t, "upper    {}  [{}]", rat(&b.upper), method_name(&b.upper_method));
            match (&b.exact, &b.exact_skipped) {
                (Some(e), _) => {
                    let _ = writeln!(t, "exact    {}", rat(e));
                }
                (None, Some(why)) => {
                    let _ = writeln!(t, "exact    skipped: {why}");
                }
                (None, None) => {}
            }
            if let Some(w) = &b.witness {
                let _ = writeln!(t, "pattern  {} (period {})", w.bits(), w.period());
            }
            if let Some(f) = &output.coloring.chi_f {
                let _ = writeln!(t, "chi_f    {}", rat(f));
            }
            let _ = writeln!(t, "chi_c <= {}", rat(&output.coloring.chi_c_upper));
            t
        }
    };
    Ok(Done { code: EXIT_OK, text })
}

fn cmd_classify(family: Family, a: u64, n: u64, format: Format, echo: Vec<String>) -> Result<Done, Done> {
    let case = match classify(family, a, n) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let mut notes = Vec::new();
    if case.label == CaseLabel::Uncovered {
        notes.push("no theorem bound for this n".to_string());
    }
    if let Some(alt) = case.alternate_bound_form() {
        notes.push(format!("bound equals {alt}"));
    }
    let text = match format {
        Format::Json => envelope(echo, notes, Payload::Classify(case)).to_json(),
        Format::Table => {
            let mut t = String::new();
            let set: Vec<String> = family.base_elements(a).iter().chain([&n]).map(u64::to_string).collect();
            let _ = writeln!(t, "set      {{{}}}", set.join(","));
            let _ = writeln!(t, "case     {}", case.display_label());
            match &case.bound {
                Some(b) => {
                    let _ = writeln!(t, "bound    {}", rat(b));
                }
                None => {
                    let _ = writeln!(t, "bound    none");
                }
            }
            let _ = writeln!(t, "exact    {}", if case.exact { "yes" } else { "no" });
            for n in &notes {
                let _ = writeln!(t, "note: {n}");
            }
            t
        }
    };
    Ok(Done { code: EXIT_OK, text })
}

const CSV_HEADER: &str = "family,a,n,label,i,j,l,q,r,bound_num,bound_den,kappa_num,kappa_den,ok,exact_confirmed";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record_label(r: &VerificationRecord) -> String {
    match &r.case {
        Some(c) => c.label.as_str().to_string(),
        None => "DEGENERATE".to_string(),
    }
}

fn to_csv(records: &[VerificationRecord]) -> String {
    let mut t = String::from(CSV_HEADER);
    t.push('\n');
    for r in records {
        let ix = r.case.as_ref().map(|c| c.indices).unwrap_or_default();
        let _ = writeln!(
            t,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.a,
            r.n,
            record_label(r),
            opt(ix.i),
            opt(ix.j),
            opt(ix.l),
            opt(ix.q),
            opt(ix.r),
            opt(r.theorem_bound.map(|b| b.numer())),
            opt(r.theorem_bound.map(|b| b.denom())),
            opt(r.computed_kappa.map(|k| k.numer())),
            opt(r.computed_kappa.map(|k| k.denom())),
            !r.is_violation(),
            opt(r.exactness_confirmed),
        );
    }
    t
}

fn to_table(records: &[VerificationRecord], summary: &SweepSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<6} {:>6} {:>8}  {:<26} {:<14} {:<14} {:<4} exact",
        "family", "a", "n", "case", "bound", "kappa", "ok"
    );
    for r in records {
        let case = match &r.case {
            Some(c) => c.display_label(),
            None => "DEGENERATE".into(),
        };
        let _ = writeln!(
            t,
            "{:<6} {:>6} {:>8}  {:<26} {:<14} {:<14} {:<4} {}",
            r.family.to_string(),
            r.a,
            r.n,
            case,
            opt(r.theorem_bound),
            opt(r.computed_kappa),
            if r.is_violation() { "FAIL" } else { "ok" },
            match r.exactness_confirmed {
                Some(true) => "confirmed",
                Some(false) => "NOT CONFIRMED",
                None => "",
            }
        );
    }
    let _ = writeln!(
        t,
        "{} records: {} checked, {} uncovered, {} degenerate, {} exact confirmed, {} violations",
        summary.records, summary.checked, summary.uncovered, summary.degenerate, summary.exact_confirmed, summary.violations
    );
    t
}

fn cmd_verify(
    family: Family,
    a_range: RangeInclusive<u64>,
    n_range: RangeInclusive<u64>,
    format: VerifyFormat,
    out: Option<PathBuf>,
    options: &SweepOptions,
    echo: Vec<String>,
) -> Result<Done, Done> {
    let records = match sweep(family, a_range, n_range, options) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let summary = summarize(&records);
    let code = if summary.violations == 0 { EXIT_OK } else { EXIT_CHECK_FAILED };
    let body = match format {
        VerifyFormat::Csv => to_csv(&records),
        VerifyFormat::Table => to_table(&records, &summary),
        VerifyFormat::Json => envelope(echo, Vec::new(), Payload::Verify(VerifyOutput { summary, records })).to_json(),
    };
    let text = match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, body) {
                return Err(Done {
                    code: EXIT_USAGE,
                    text: format!("error: cannot write {}: {e}\n", path.display()),
                });
            }
            format!(
                "wrote {}: {} records, {} violations\n",
                path.display(),
                summary.records,
                summary.violations
            )
        }
        None => body,
    };
    Ok(Done { code, text })
}

fn cmd_partition_check(obs: &str, a: u64, horizon: u64, format: Format, echo: Vec<String>) -> Result<Done, Done> {
    let blocks: BlockFamily = match obs.parse() {
        Ok(b) => b,
        Err(e) => return usage(e),
    };
    let report = match partition_check(blocks, a, horizon) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let code = if report.tiles { EXIT_OK } else { EXIT_CHECK_FAILED };
    let notes = vec![format!(
        "the union starts at {}, so every value in 1..={} is outside it, not only {}",
        report.start, report.uncovered_below_start, report.claimed_excluded
    )];
    let text = match format {
        Format::Json => envelope(echo, notes, Payload::PartitionCheck(report)).to_json(),
        Format::Table => {
            let mut t = String::new();
            let _ = writeln!(t, "blocks   {:?} (a={})", report.blocks, report.a);
            let _ = writeln!(t, "start    {}", report.start);
            let _ = writeln!(t, "period   {}", report.period);
            let _ = writeln!(t, "range    [{}, {}]", report.start, report.horizon);
            let _ = writeln!(t, "overlap  {}", opt(report.first_overlap).if_empty("none"));
            let _ = writeln!(t, "gap      {}", opt(report.first_gap).if_empty("none"));
            let _ = writeln!(t, "tiles    {}", if report.tiles { "yes" } else { "NO" });
            for n in &notes {
                let _ = writeln!(t, "note: {n}");
            }
            t
        }
    };
    Ok(Done { code, text })
}

trait IfEmpty {
    fn if_empty(self, alt: &str) -> String;
}

impl IfEmpty for String {
    fn if_empty(self, alt: &str) -> String {
        if self.is_empty() {
            alt.to_string()
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3"), Ok(1..=3));
        assert_eq!(parse_range("7..7"), Ok(7..=7));
        assert!(parse_range("3..1").is_err());
        assert!(parse_range("1-3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn sets() {
        let (s, notes) = parse_set("4,6,10").unwrap();
        assert_eq!(s.elements(), &[2, 3, 5]);
        assert_eq!(notes, vec!["divided by 2".to_string()]);
        let (s, notes) = parse_set("3, 2,3").unwrap();
        assert_eq!(s.elements(), &[2, 3]);
        assert_eq!(notes.len(), 1);
        assert!(parse_set("0,3").is_err());
        assert!(parse_set("-1").is_err());
        assert!(parse_set("1,,2").is_err());
    }

    #[test]
    fn csv_has_documented_header() {
        let recs = sweep(Family::F1, 2..=2, 16..=16, &SweepOptions::default()).unwrap();
        let csv = to_csv(&recs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("f1,2,16,F1-N1,0,,0,,,2,7,2,7,true,true"));
    }
}
