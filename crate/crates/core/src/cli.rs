//! Command-line front end. Each command returns its stdout text; failures carry
//! the process exit code.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::analysis::{
    arbr_formula, percent_one_decimal, reference_table, render_table, repair_downloads, Rational,
};
use crate::base_code::{build_parity, BaseKind, CodeParams};
use crate::codec::{
    decode_any_k, encode, read_codeword, read_stripe, repair_systematic, write_codeword,
    write_stripe, Stripe,
};
use crate::construct::{construct, expand_generator, make_plan, BpdCode};
use crate::descriptor;
use crate::error::BpdError;
use crate::field::FieldTower;
use crate::verify::{lambda_census, random_stripe, verify_mds, verify_mds_by_decoding};

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_INPUT: i32 = 2;
    pub const VERIFICATION_FAILED: i32 = 3;
    pub const CONSTRUCTION_FAILED: i32 = 4;
    pub const CORRUPT_FILE: i32 = 5;
    pub const WRONG_DIMENSIONS: i32 = 6;
    pub const INSUFFICIENT_NODES: i32 = 7;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<BpdError> for CliError {
    fn from(e: BpdError) -> Self {
        let code = match e {
            BpdError::InvalidParameter(_)
            | BpdError::Unsupported(_)
            | BpdError::DivisionByZero
            | BpdError::FieldTooSmall { .. } => exit::INVALID_INPUT,
            BpdError::NoValidLambda { .. } => exit::CONSTRUCTION_FAILED,
            BpdError::Singular | BpdError::RepairMismatch { .. } => exit::VERIFICATION_FAILED,
            BpdError::Format(_) => exit::CORRUPT_FILE,
            BpdError::DimensionMismatch { .. } => exit::WRONG_DIMENSIONS,
            BpdError::InsufficientData { .. } => exit::INSUFFICIENT_NODES,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult = std::result::Result<String, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "bpd",
    version,
    about = "Bidirectional piggybacking for (n,k;2) MDS array codes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code, search λ, verify MDS, and write its descriptor.
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "cauchy")]
        base: String,
        /// Extension degree of the λ field (default: chosen from r).
        #[arg(long)]
        m: Option<usize>,
        /// Descriptor path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Re-run the symbolic and the decoding MDS checks on a descriptor.
    Verify {
        #[arg(long)]
        code: PathBuf,
        /// Sampled node subsets when n > 10.
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
    /// Write a stripe file from hex symbols or a random seed.
    Stripe {
        #[arg(long)]
        code: PathBuf,
        /// 2k symbols a_1 b_1 a_2 b_2 …, each in element hex.
        #[arg(long, conflicts_with = "seed")]
        hex: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a stripe file into a codeword file.
    Encode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        stripe: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct the stripe from a subset of a codeword's nodes.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        stripe: PathBuf,
        /// 1-based node numbers, comma separated (default: systematic nodes).
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair one systematic node and report the download count.
    Repair {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        stripe: PathBuf,
        /// 1-based systematic node.
        #[arg(long)]
        node: usize,
    },
    /// Closed-form and measured repair bandwidth ratio.
    Arbr {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "cauchy")]
        base: String,
        #[arg(long)]
        json: bool,
    },
    /// Comparison table for four deployed RS codes.
    Table3 {
        #[arg(long)]
        json: bool,
    },
    /// Classify every λ in GF(256) \ GF(16).
    LambdaCensus {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "cauchy")]
        base: String,
        #[arg(long)]
        json: bool,
    },
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Construct {
            n,
            k,
            base,
            m,
            out,
            json,
        } => cmd_construct(n, k, &base, m, out.as_deref(), json),
        Command::Verify { code, trials, json } => cmd_verify(&code, trials, json),
        Command::Stripe {
            code,
            hex,
            seed,
            out,
        } => cmd_stripe(&code, hex.as_deref(), seed, &out),
        Command::Encode { code, stripe, out } => cmd_encode(&code, &stripe, &out),
        Command::Decode {
            code,
            stripe,
            nodes,
            out,
        } => cmd_decode(&code, &stripe, &nodes, &out),
        Command::Repair { code, stripe, node } => cmd_repair(&code, &stripe, node),
        Command::Arbr { n, k, base, json } => cmd_arbr(n, k, &base, json),
        Command::Table3 { json } => cmd_table3(json),
        Command::LambdaCensus { n, k, base, json } => cmd_lambda_census(n, k, &base, json),
    }
}

fn read_text(path: &Path) -> std::result::Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::INVALID_INPUT, format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> std::result::Result<Vec<u8>, CliError> {
    fs::read(path)
        .map_err(|e| CliError::new(exit::INVALID_INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> std::result::Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::new(exit::INVALID_INPUT, format!("{}: {e}", path.display())))
}

fn load_code(path: &Path) -> std::result::Result<BpdCode, CliError> {
    Ok(descriptor::load(&read_text(path)?)?)
}

fn ratio_json(x: Rational) -> serde_json::Value {
    json!({ "numer": x.numer(), "denom": x.denom(), "percent": percent_one_decimal(x) })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn cmd_construct(
    n: usize,
    k: usize,
    base: &str,
    m: Option<usize>,
    out: Option<&Path>,
    json: bool,
) -> CliResult {
    let base: BaseKind = base.parse()?;
    let built = construct(n, k, base, m)?;
    if !built.report.pass {
        return Err(CliError::new(
            exit::CONSTRUCTION_FAILED,
            format!("constructed code is not MDS\n{}", built.report),
        ));
    }
    let text = descriptor::save(&built.code);
    let tower = built.code.tower();
    let summary = if json {
        pretty(&json!({
            "n": n,
            "k": k,
            "m": tower.degree(),
            "lambda": tower.to_hex(built.code.lambda()),
            "candidates_tried": built.candidates_tried,
            "degrees_tried": built.degrees_tried,
            "mds": built.report,
            "descriptor": out.map(|p| p.display().to_string()),
        }))
    } else {
        format!(
            "({n},{k}) over GF(16^{}) λ = {} ({} candidate(s), degrees tried {:?})\n{}\n",
            tower.degree(),
            tower.to_hex(built.code.lambda()),
            built.candidates_tried,
            built.degrees_tried,
            built.report
        )
    };
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(summary)
        }
        None if json => Ok(summary),
        None => Ok(text),
    }
}

pub fn cmd_verify(code_path: &Path, trials: usize, json: bool) -> CliResult {
    let code = load_code(code_path)?;
    let report = verify_mds(code.generator(), code.lambda(), code.tower());
    let decoding = verify_mds_by_decoding(&code, trials, 0xdec0de);
    let pass = report.pass && decoding;
    let text = if json {
        pretty(&json!({
            "pass": pass,
            "symbolic": report,
            "decoding": { "pass": decoding, "exhaustive": code.params().n <= 10 },
        }))
    } else {
        format!(
            "{report}\ndecoding oracle: {}\n",
            if decoding { "pass" } else { "FAIL" }
        )
    };
    if pass {
        Ok(text)
    } else {
        Err(CliError::new(exit::VERIFICATION_FAILED, text))
    }
}

pub fn cmd_stripe(code_path: &Path, hex: Option<&str>, seed: Option<u64>, out: &Path) -> CliResult {
    let code = load_code(code_path)?;
    let k = code.params().k;
    let stripe = match hex {
        Some(h) => {
            let tower = code.tower();
            let w = 2 * tower.byte_len();
            let h: String = h.split_whitespace().collect();
            if h.len() != 2 * k * w {
                return Err(CliError::new(
                    exit::WRONG_DIMENSIONS,
                    format!("expected {} hex digits, got {}", 2 * k * w, h.len()),
                ));
            }
            let symbols = (0..2 * k)
                .map(|i| tower.from_hex(&h[i * w..(i + 1) * w]))
                .collect::<crate::Result<Vec<_>>>()?;
            let pairs: Vec<_> = symbols.chunks(2).map(|c| (c[0], c[1])).collect();
            Stripe::from_pairs(&pairs)
        }
        None => random_stripe(&code, &mut ChaCha8Rng::seed_from_u64(seed.unwrap_or(0))),
    };
    write_file(out, write_stripe(&code, &stripe))?;
    Ok(format!("wrote stripe ({k} pairs) to {}\n", out.display()))
}

pub fn cmd_encode(code_path: &Path, stripe_path: &Path, out: &Path) -> CliResult {
    let code = load_code(code_path)?;
    let stripe = read_stripe(&code, &read_bytes(stripe_path)?)?;
    let word = encode(&code, &stripe)?;
    write_file(out, write_codeword(&code, &word))?;
    Ok(format!(
        "wrote codeword ({} nodes) to {}\n",
        word.nodes.len(),
        out.display()
    ))
}

pub fn cmd_decode(code_path: &Path, word_path: &Path, nodes: &[usize], out: &Path) -> CliResult {
    let code = load_code(code_path)?;
    let word = read_codeword(&code, &read_bytes(word_path)?)?;
    let CodeParams { n, k, .. } = *code.params();
    let chosen: Vec<usize> = if nodes.is_empty() {
        (1..=k).collect()
    } else {
        nodes.to_vec()
    };
    let mut available = BTreeMap::new();
    for &node in &chosen {
        if node == 0 || node > n {
            return Err(CliError::new(
                exit::INVALID_INPUT,
                format!("node {node} out of range 1..={n}"),
            ));
        }
        available.insert(node - 1, word.nodes[node - 1]);
    }
    let stripe = decode_any_k(&code, &available)?;
    write_file(out, write_stripe(&code, &stripe))?;
    Ok(format!(
        "decoded from nodes {chosen:?}; wrote stripe to {}\n",
        out.display()
    ))
}

pub fn cmd_repair(code_path: &Path, word_path: &Path, node: usize) -> CliResult {
    let code = load_code(code_path)?;
    let word = read_codeword(&code, &read_bytes(word_path)?)?;
    if node == 0 || node > code.params().n {
        return Err(CliError::new(
            exit::INVALID_INPUT,
            format!("node {node} out of range"),
        ));
    }
    let report = repair_systematic(&code, node - 1, &word)?;
    let ok = report.recovered == word.nodes[node - 1];
    let text = pretty(&report.to_json(code.tower(), ok));
    if ok {
        Ok(text)
    } else {
        Err(CliError::new(exit::VERIFICATION_FAILED, text))
    }
}

pub fn cmd_arbr(n: usize, k: usize, base: &str, json: bool) -> CliResult {
    let base: BaseKind = base.parse()?;
    let built = construct(n, k, base, None)?;
    let downloads = repair_downloads(&built.code, 3, 0xa4b4)?;
    let formula = arbr_formula(built.code.params());
    let empirical = Ratio::new(downloads.iter().sum::<usize>() as u64, 2 * (k * k) as u64);
    if json {
        Ok(pretty(&json!({
            "n": n,
            "k": k,
            "formula": ratio_json(formula),
            "empirical": ratio_json(empirical),
            "downloads": downloads,
            "agree": formula == empirical,
        })))
    } else {
        Ok(format!(
            "({n},{k}) formula rho = {formula} ({}%), empirical rho = {empirical} ({}%), downloads {downloads:?}\n",
            percent_one_decimal(formula),
            percent_one_decimal(empirical),
        ))
    }
}

pub fn cmd_table3(json: bool) -> CliResult {
    let rows = reference_table();
    let text = if json {
        pretty(&json!({ "rows": rows }))
    } else {
        render_table(&rows)
    };
    if rows.iter().all(|r| r.matches) {
        Ok(text)
    } else {
        Err(CliError::new(exit::VERIFICATION_FAILED, text))
    }
}

pub fn cmd_lambda_census(n: usize, k: usize, base: &str, json: bool) -> CliResult {
    let base: BaseKind = base.parse()?;
    let params = CodeParams::new(n, k)?;
    let gen = expand_generator(&build_parity(&params, base)?, &make_plan(&params))?;
    let tower = FieldTower::build(2)?;
    let census = lambda_census(&gen, &tower);
    if json {
        Ok(pretty(&json!({
            "n": n,
            "k": k,
            "m": 2,
            "candidates": census.candidates,
            "passing": census.passing.len(),
            "failing": census.failing.len(),
            "failing_lambdas": census.failing.iter().map(|&l| tower.to_hex(l)).collect::<Vec<_>>(),
        })))
    } else {
        Ok(format!(
            "({n},{k}) λ ∈ GF(256)\\GF(16): {} candidates, {} passing, {} failing\n",
            census.candidates,
            census.passing.len(),
            census.failing.len()
        ))
    }
}
