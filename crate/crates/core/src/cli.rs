//! The `dx` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::certain::{certain_answers, eliminate, eliminate_mapping, unfold};
use crate::chase::{naive_chase, restricted_chase, to_term_interpretation};
use crate::error::{Error, Result};
use crate::laconify::{laconic_rules, laconify};
use crate::lang::{join, parse_cq, parse_mapping, SchemaMapping};
use crate::model::{compute_core, parse_facts, write_facts, Instance};
use crate::sqlgen::{encode_value, interpretation_to_sql, read_csv_dir};
use crate::verify::{
    check_cq_equivalent, check_disjunctive_preservation, check_laconic, Bounds, CheckReport, Sampling,
};

/// Exit status for a failed check.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status for usage, parse and I/O errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dx", version, about = "Data exchange: chase, cores, laconic mappings and SQL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical universal solution of a source instance.
    Chase {
        #[command(flatten)]
        input: InstanceInput,
        /// Fire a tgd only when its consequent is not yet satisfied.
        #[arg(long)]
        restricted: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Core universal solution of a source instance.
    Core {
        #[command(flatten)]
        input: InstanceInput,
        #[command(flatten)]
        output: Output,
    },
    /// Print a logically equivalent laconic mapping.
    Laconify {
        #[arg(short, long)]
        mapping: PathBuf,
        /// Replace certain-answer subformulas by plain source formulas.
        #[arg(long)]
        eliminate_certain: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Print the fact block types of a mapping with their preconditions.
    Blocks {
        #[arg(short, long)]
        mapping: PathBuf,
        #[arg(long)]
        eliminate_certain: bool,
        #[command(flatten)]
        output: Output,
    },
    /// SQL computing the mapping's term interpretation.
    EmitSql {
        #[arg(short, long)]
        mapping: PathBuf,
        /// Laconify first, so the views compute core universal solutions.
        #[arg(long)]
        laconify: bool,
        /// Include CREATE TABLE statements for the source schema.
        #[arg(long)]
        ddl: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Certain answers of a conjunctive query, e.g. `[x] exists y: S(x, y)`.
    Certain {
        #[command(flatten)]
        input: InstanceInput,
        #[arg(short, long)]
        query: String,
        /// Evaluate the unfolded source rewriting instead of chasing.
        #[arg(long)]
        unfold: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Sampling-based checks.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
}

#[derive(Subcommand, Debug)]
enum Check {
    /// The canonical solution is a core on every sample.
    Laconic {
        #[arg(short, long)]
        mapping: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Both mappings have isomorphic core solutions on every sample.
    Equiv {
        #[arg(short, long)]
        mapping: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Dependencies valid on non-core canonical solutions stay valid on cores.
    Disjunctive {
        #[arg(short, long)]
        mapping: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
}

#[derive(Args, Debug)]
struct InstanceInput {
    #[arg(short, long)]
    mapping: PathBuf,
    /// Source instance as a fact file.
    #[arg(short, long, conflicts_with = "csv", required_unless_present = "csv")]
    instance: Option<PathBuf>,
    /// Directory with one headerless CSV file per source relation.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, env = "DX_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_consts: usize,
    #[arg(long, default_value_t = 12)]
    max_facts: usize,
    /// Also write one JSON record per sample to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

impl SamplingArgs {
    fn sampling(&self) -> Sampling {
        Sampling {
            samples: self.samples,
            seed: self.seed,
            bounds: Bounds { max_consts: self.max_consts, max_facts: self.max_facts },
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_mapping(path: &Path) -> Result<SchemaMapping> {
    parse_mapping(&read(path)?)
}

fn load_instance(m: &SchemaMapping, input: &InstanceInput) -> Result<Instance> {
    match (&input.instance, &input.csv) {
        (Some(p), _) => parse_facts(&read(p)?, &m.source),
        (None, Some(dir)) => read_csv_dir(dir, &m.source),
        (None, None) => unreachable!("clap requires one input"),
    }
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.output {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn blocks_table(m: &SchemaMapping, eliminate_certain: bool) -> Result<String> {
    let rules = laconic_rules(m)?;
    let mut out = String::new();
    for (i, r) in rules.iter().enumerate() {
        let t = &r.block_type;
        let atoms: Vec<String> = t.atoms.iter().map(ToString::to_string).collect();
        let pre = if eliminate_certain { eliminate(&r.precondition)? } else { r.precondition.clone() };
        out += &format!(
            "t{}({}; {}) = {{{}}}\n  pre: {}\n",
            i + 1,
            join(&t.const_vars, ", "),
            join(&t.null_vars, ", "),
            atoms.join(", "),
            pre
        );
        if !r.side_condition.is_trivial() {
            out += &format!("  side: {}\n", r.side_condition.to_formula());
        }
    }
    Ok(out)
}

fn report(r: &CheckReport, args: &SamplingArgs, stdout: &mut dyn Write) -> Result<i32> {
    write!(stdout, "{r}")?;
    if let Some(p) = &args.jsonl {
        fs::write(p, r.to_jsonl())?;
    }
    Ok(if r.passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Chase { input, restricted, output } => {
            let m = load_mapping(&input.mapping)?;
            let i = load_instance(&m, &input)?;
            let j = if restricted { restricted_chase(&m, &i)? } else { naive_chase(&m, &i)? };
            emit(&output, &write_facts(&j), stdout)?;
        }
        Command::Core { input, output } => {
            let m = load_mapping(&input.mapping)?;
            let i = load_instance(&m, &input)?;
            let (core, _) = compute_core(&naive_chase(&m, &i)?);
            emit(&output, &write_facts(&core.normalize_nulls()), stdout)?;
        }
        Command::Laconify { mapping, eliminate_certain, output } => {
            let m = load_mapping(&mapping)?;
            let mut l = laconify(&m)?;
            if eliminate_certain {
                l = eliminate_mapping(&l)?;
            }
            emit(&output, &l.to_string(), stdout)?;
        }
        Command::Blocks { mapping, eliminate_certain, output } => {
            let m = load_mapping(&mapping)?;
            emit(&output, &blocks_table(&m, eliminate_certain)?, stdout)?;
        }
        Command::EmitSql { mapping, laconify: lac, ddl, output } => {
            let mut m = load_mapping(&mapping)?;
            if lac {
                m = laconify(&m)?;
            }
            if m.has_certain() {
                m = eliminate_mapping(&m)?;
            }
            let art = interpretation_to_sql(&to_term_interpretation(&m)?)?;
            emit(&output, &art.to_script(ddl), stdout)?;
        }
        Command::Certain { input, query, unfold: use_unfold, output } => {
            let m = load_mapping(&input.mapping)?;
            let i = load_instance(&m, &input)?;
            let q = parse_cq(&query, &m.target)?;
            let answers = if use_unfold {
                let f = unfold(&m, &q)?.to_formula();
                crate::lang::ground_answers(&f, &i, &q.answer)?
            } else {
                certain_answers(&m, &q, &i)?
            };
            let mut text = String::new();
            for t in answers {
                let cells: Vec<String> = t.iter().map(encode_value).collect();
                text += &format!("({})\n", cells.join(", "));
            }
            emit(&output, &text, stdout)?;
        }
        Command::Verify { check } => {
            return match check {
                Check::Laconic { mapping, sampling } => {
                    let m = load_mapping(&mapping)?;
                    report(&check_laconic(&m, &sampling.sampling())?, &sampling, stdout)
                }
                Check::Equiv { mapping, against, sampling } => {
                    let m = load_mapping(&mapping)?;
                    let other = load_mapping(&against)?;
                    report(&check_cq_equivalent(&m, &other, &sampling.sampling())?, &sampling, stdout)
                }
                Check::Disjunctive { mapping, sampling } => {
                    let m = load_mapping(&mapping)?;
                    report(&check_disjunctive_preservation(&m, &sampling.sampling())?, &sampling, stdout)
                }
            };
        }
    }
    Ok(0)
}

/// Runs `dx` with the given arguments (including the program name) and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(stdout, "{}", e.render()) } else { write!(stderr, "{}", e.render()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
