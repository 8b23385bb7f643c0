//! Command line front end.
//!
//! `run` is the whole program: it parses arguments, writes to the given
//! streams and returns the process exit code, so tests can drive it
//! against byte buffers. Exit codes: 0 satisfiable, 1 unsatisfiable,
//! 2 any error. All output is a pure function of the inputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigInt;
use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraId, DomainElement};
use crate::decide::{self, Diagnostics, SatStatus};
use crate::error::{Error, Result};
use crate::harness;
use crate::parikh::parikh_formula;
use crate::qfbapa::{parse_bapa, qfbapa_solve};
use crate::sfa::propositionalize;
use crate::sfa_file::{load_sfa_file, SfaFile};

pub const EXIT_SAT: u8 = 0;
pub const EXIT_UNSAT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

const MAX_BRUTE_DOMAIN: usize = 1 << 20;

#[derive(Parser)]
#[command(name = "sfasat", version, about = "satisfiability of symbolic automata, with optional cardinality clauses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the automaton in FILE accepts any word
    Check(CheckArgs),
    /// Print the letter-count formula of the automaton in FILE
    Parikh { file: PathBuf },
    /// Decide a set-cardinality formula given as text
    ///
    /// Sets: uppercase names, U, empty, + (union), & (intersection),
    /// ~ (complement). Terms: |S|, integers, lowercase variables, +, -,
    /// scalar *. Atoms: =, <=, A sub B, k dvd t. Connectives: & or &&,
    /// ||, !, parentheses. Example: "|A|=3 & A sub B & |B|=2"
    Qfbapa { formula: String },
    /// Cross-check the solvers against each other on fixed random instances
    Selftest,
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    /// Print a satisfying word after the verdict
    #[arg(long)]
    witness: bool,
    #[arg(long, value_enum, default_value_t = Method::Decomp)]
    method: Method,
    /// Element range for --method brute, both ends inclusive
    #[arg(long, value_name = "LO..HI", value_parser = parse_dom_range, default_value = "-8..8")]
    brute_dom: DomRange,
    /// Word length cap for --method brute
    #[arg(long, value_name = "N", default_value_t = 4)]
    brute_len: usize,
    /// Emit one JSON record instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Letter-count decomposition, the full decision procedure
    Decomp,
    /// Drop unsatisfiable guards and test reachability; no cardinality, no witness
    Prune,
    /// Enumerate words over a finite domain up to a length cap
    Brute,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Decomp => "decomp",
            Method::Prune => "prune",
            Method::Brute => "brute",
        }
    }
}

#[derive(Debug, Copy, Clone)]
struct DomRange {
    lo: i64,
    hi: i64,
}

fn parse_dom_range(s: &str) -> std::result::Result<DomRange, String> {
    let err = || format!("expected LO..HI, got `{s}`");
    let (lo, hi) = s.split_once("..").ok_or_else(err)?;
    let lo: i64 = lo.trim().parse().map_err(|_| err())?;
    let hi: i64 = hi.trim().parse().map_err(|_| err())?;
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok(DomRange { lo, hi })
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_ERROR
            } else {
                // --help and --version land here
                let _ = write!(out, "{rendered}");
                EXIT_SAT
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<u8> {
    match command {
        Command::Check(args) => check(args, out),
        Command::Parikh { file } => parikh(&file, out),
        Command::Qfbapa { formula } => qfbapa(&formula, out),
        Command::Selftest => selftest(out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn check(args: CheckArgs, out: &mut dyn Write) -> Result<u8> {
    let SfaFile { sfa, cardinality } = load_sfa_file(&args.file)?;
    let (status, witness, diagnostics) = match args.method {
        Method::Decomp => {
            let r = match &cardinality {
                Some(c) => decide::check_sat_card(&sfa, c)?,
                None => decide::check_sat(&sfa)?,
            };
            (r.status, r.witness, Some(r.diagnostics))
        }
        Method::Prune => {
            if cardinality.is_some() {
                return Err(Error::Unsupported(
                    "the prune method cannot decide cardinality clauses; use --method decomp"
                        .into(),
                ));
            }
            if args.witness {
                return Err(Error::Unsupported(
                    "the prune method does not produce witnesses".into(),
                ));
            }
            let sat = sfa.prune_and_reach();
            (if sat { SatStatus::Sat } else { SatStatus::Unsat }, None, None)
        }
        Method::Brute => {
            let domain = brute_domain(sfa.algebra(), args.brute_dom)?;
            let r =
                decide::brute_force_check(&sfa, cardinality.as_ref(), &domain, args.brute_len)?;
            (r.status, r.witness, Some(r.diagnostics))
        }
    };

    if args.json {
        let mut rec = Map::new();
        rec.insert("method".into(), json!(args.method.name()));
        rec.insert(
            "status".into(),
            json!(if status.is_sat() { "sat" } else { "unsat" }),
        );
        rec.insert(
            "witness".into(),
            match &witness {
                Some(w) => Value::Array(w.iter().map(element_to_json).collect()),
                None => Value::Null,
            },
        );
        rec.insert(
            "diagnostics".into(),
            diagnostics.as_ref().map_or(Value::Null, diagnostics_to_json),
        );
        writeln!(out, "{}", Value::Object(rec)).map_err(io_err)?;
    } else {
        writeln!(out, "{}", if status.is_sat() { "SAT" } else { "UNSAT" }).map_err(io_err)?;
        if args.witness && status.is_sat() {
            let w = witness.as_ref().expect("sat verdicts carry a witness");
            writeln!(out, "witness=[{}]", join(w.iter())).map_err(io_err)?;
        }
    }
    Ok(if status.is_sat() { EXIT_SAT } else { EXIT_UNSAT })
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn brute_domain(algebra: AlgebraId, range: DomRange) -> Result<Vec<DomainElement>> {
    let too_big = |n: u64| {
        Error::Unsupported(format!(
            "brute-force domain has {n} elements, limit {MAX_BRUTE_DOMAIN}"
        ))
    };
    match algebra {
        AlgebraId::Lia => {
            let n = range.hi.abs_diff(range.lo) + 1;
            if n > MAX_BRUTE_DOMAIN as u64 {
                return Err(too_big(n));
            }
            Ok((range.lo..=range.hi).map(DomainElement::Int).collect())
        }
        AlgebraId::Bv(w) => {
            // clamp to the representable values so the default range works
            let max = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
            if range.hi < 0 {
                return Err(Error::Unsupported(
                    "brute-force domain is empty for this bitvector width".into(),
                ));
            }
            let lo = u64::try_from(range.lo.max(0)).expect("clamped below at 0");
            let hi = (range.hi as u64).min(max);
            let n = hi - lo + 1;
            if n > MAX_BRUTE_DOMAIN as u64 {
                return Err(too_big(n));
            }
            Ok((lo..=hi).map(DomainElement::Bv).collect())
        }
    }
}

fn element_to_json(e: &DomainElement) -> Value {
    match e {
        DomainElement::Int(x) => json!(x),
        DomainElement::Bv(v) => json!(v),
    }
}

fn big_to_json(k: &BigInt) -> Value {
    if let Ok(v) = i64::try_from(k) {
        return json!(v);
    }
    if let Ok(v) = u64::try_from(k) {
        return json!(v);
    }
    json!(k.to_string())
}

fn diagnostics_to_json(d: &Diagnostics) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "letter_counts".into(),
        Value::Array(d.letter_counts.iter().map(big_to_json).collect()),
    );
    obj.insert(
        "flows".into(),
        Value::Array(d.flows.iter().map(big_to_json).collect()),
    );
    let regions: Map<String, Value> = d
        .region_sizes
        .iter()
        .map(|(m, k)| (m.to_string(), big_to_json(k)))
        .collect();
    obj.insert("region_sizes".into(), Value::Object(regions));
    if let Some((domain_size, max_len)) = d.bounded_domain {
        obj.insert(
            "bounded_domain".into(),
            json!({ "domain_size": domain_size, "max_len": max_len }),
        );
    }
    Value::Object(obj)
}

fn parikh(file: &Path, out: &mut dyn Write) -> Result<u8> {
    let SfaFile { sfa, .. } = load_sfa_file(file)?;
    let (gens, ta) = propositionalize(&sfa);
    let rho = parikh_formula(&ta);
    for i in 0..gens.len() {
        writeln!(out, "gen S{} = {}", i + 1, gens.predicate(i)).map_err(io_err)?;
    }
    for (j, letter) in ta.letters.iter().enumerate() {
        writeln!(out, "letter {} = {}", rho.letter_vars[j], letter).map_err(io_err)?;
    }
    writeln!(out, "rho = {}", rho.formula).map_err(io_err)?;
    Ok(EXIT_SAT)
}

fn qfbapa(formula: &str, out: &mut dyn Write) -> Result<u8> {
    let f = parse_bapa(formula)?;
    match qfbapa_solve(&f)? {
        None => {
            writeln!(out, "UNSAT").map_err(io_err)?;
            Ok(EXIT_UNSAT)
        }
        Some(model) => {
            writeln!(out, "SAT").map_err(io_err)?;
            writeln!(out, "|U| = {}", model.universe).map_err(io_err)?;
            let sets = model.sets.as_ref().expect("solver models carry concrete sets");
            for (i, name) in f.set_vars.iter().enumerate() {
                let members = sets[i].iter().map(|x| x.to_string()).collect::<Vec<_>>();
                writeln!(out, "{name} = {{{}}}", members.join(", ")).map_err(io_err)?;
            }
            Ok(EXIT_SAT)
        }
    }
}

fn selftest(out: &mut dyn Write) -> Result<u8> {
    let (ok, report) = harness::selftest();
    write!(out, "{report}").map_err(io_err)?;
    Ok(if ok { EXIT_SAT } else { EXIT_ERROR })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("sfasat").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).expect("stdout is utf-8"),
            String::from_utf8(err).expect("stderr is utf-8"),
        )
    }

    #[test]
    fn qfbapa_verdicts_and_exit_codes() {
        let (code, out, _) = run_args(&["qfbapa", "|A|=3 & A sub B & |B|=2"]);
        assert_eq!(code, EXIT_UNSAT);
        assert_eq!(out, "UNSAT\n");

        let (code, out, _) = run_args(&["qfbapa", "|A| = 2 && A <= B && |B| = 3"]);
        assert_eq!(code, EXIT_SAT);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("SAT"));
        assert_eq!(lines.next(), Some("|U| = 3"));

        let (code, _, err) = run_args(&["qfbapa", "|A| ="]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.starts_with("error: "), "stderr: {err}");
    }

    #[test]
    fn unknown_arguments_exit_two() {
        let (code, _, err) = run_args(&["check"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(!err.is_empty());

        let (code, _, _) = run_args(&["frobnicate"]);
        assert_eq!(code, EXIT_ERROR);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, err) = run_args(&["--help"]);
        assert_eq!(code, EXIT_SAT);
        assert!(out.contains("check"));
        assert!(err.is_empty());
    }

    #[test]
    fn dom_range_parsing() {
        let r = parse_dom_range("-8..8").unwrap();
        assert_eq!((r.lo, r.hi), (-8, 8));
        let r = parse_dom_range("0..63").unwrap();
        assert_eq!((r.lo, r.hi), (0, 63));
        assert!(parse_dom_range("8..-8").is_err());
        assert!(parse_dom_range("5").is_err());
        assert!(parse_dom_range("a..b").is_err());
    }

    #[test]
    fn brute_domain_clamps_to_algebra() {
        let d = brute_domain(AlgebraId::Lia, DomRange { lo: -2, hi: 1 }).unwrap();
        assert_eq!(
            d,
            vec![
                DomainElement::Int(-2),
                DomainElement::Int(-1),
                DomainElement::Int(0),
                DomainElement::Int(1),
            ]
        );
        let d = brute_domain(AlgebraId::Bv(2), DomRange { lo: -8, hi: 8 }).unwrap();
        assert_eq!(
            d,
            vec![
                DomainElement::Bv(0),
                DomainElement::Bv(1),
                DomainElement::Bv(2),
                DomainElement::Bv(3),
            ]
        );
        assert!(brute_domain(AlgebraId::Bv(4), DomRange { lo: -2, hi: -1 }).is_err());
        assert!(brute_domain(AlgebraId::Lia, DomRange { lo: 0, hi: i64::MAX }).is_err());
    }

    #[test]
    fn big_to_json_falls_back_to_strings() {
        assert_eq!(big_to_json(&BigInt::from(-3)), json!(-3));
        assert_eq!(big_to_json(&BigInt::from(u64::MAX)), json!(u64::MAX));
        let huge = BigInt::from(u64::MAX) * BigInt::from(10);
        assert_eq!(big_to_json(&huge), json!(huge.to_string()));
    }
}
