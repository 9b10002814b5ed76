use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tmod_core::harness::{
    compute_report, fields_csv, render, run_family, verify_suite, Config, Family, FamilyTag, Format, Measure,
    MethodChoice, SUITES,
};
use tmod_core::tmod::TP_REPORT_HEADER;

#[derive(Parser)]
#[command(name = "tmod", version, about = "Z_p-torsion of abelian p-ramification over quadratic fields")]
struct Cli {
    /// Starting precision of p-adic logarithms, in bits
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Highest ray-class level tried
    #[arg(long, global = true, default_value_t = tmod_core::rayclass::DEFAULT_NMAX)]
    nmax: u32,
    /// Append-only CSV cache of per-field results
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Md)]
    format: Fmt,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Meth {
    Auto,
    Redei,
    Coates,
    Rayclass,
}

#[derive(Clone, Copy, ValueEnum)]
enum By {
    Radicand,
    Disc,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invariants of T_p(Q(sqrt(m)))
    Compute {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value_t = Meth::Auto)]
        method: Meth,
    },
    /// Empirical distribution over a family against the predicted densities
    Density {
        /// imag-all, real-all, minus-l, minus-2l, plus-l or plus-2l
        #[arg(long)]
        family: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        bound: u64,
        /// Modulus of the congruence filter
        #[arg(long = "mod")]
        modulus: Option<u64>,
        /// Admitted residues, comma separated
        #[arg(long, value_delimiter = ',')]
        res: Vec<u64>,
        /// What the bound applies to; defaults to |D| for full families at odd p
        #[arg(long, value_enum)]
        by: Option<By>,
        #[arg(long, value_enum, default_value_t = Meth::Auto)]
        method: Meth,
        /// Largest |D| sent to the ray-class oracle by the auto method
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
        /// Table output; per-field records go to <out>.fields.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a verification suite; exits with 2 on failure
    Verify {
        /// Suite name, or `all`
        #[arg(long)]
        suite: String,
        #[arg(long)]
        bound: Option<u64>,
    },
}

impl From<Meth> for MethodChoice {
    fn from(m: Meth) -> Self {
        match m {
            Meth::Auto => MethodChoice::Auto,
            Meth::Redei => MethodChoice::Redei,
            Meth::Coates => MethodChoice::Coates,
            Meth::Rayclass => MethodChoice::RayClass,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let format = match cli.format {
        Fmt::Csv => Format::Csv,
        Fmt::Md => Format::Md,
    };
    let mut cfg = Config { precision_bits: cli.precision_bits, nmax: cli.nmax, cache: cli.cache, ..Config::default() };
    match cli.cmd {
        Cmd::Compute { m, p, method } => {
            let rep = compute_report(m, p, method.into(), &cfg).map_err(|e| e.to_string())?;
            match format {
                Format::Csv => println!("{TP_REPORT_HEADER}\n{}", rep.csv_row()),
                Format::Md => print!("{}", rep.text_block()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Density { family, p, bound, modulus, res, by, method, cutoff, out } => {
            let tag: FamilyTag = family.parse().map_err(|e: tmod_core::TmodError| e.to_string())?;
            let mut fam = Family::new(tag, p, bound);
            if let Some(md) = modulus {
                if res.is_empty() {
                    return Err("--mod needs --res".into());
                }
                fam = fam.with_filter(md, &res);
            }
            if let Some(by) = by {
                fam = fam.with_measure(match by {
                    By::Radicand => Measure::Radicand,
                    By::Disc => Measure::Disc,
                });
            }
            cfg.rayclass_cutoff = cutoff;
            let run = run_family(&fam, method.into(), &cfg).map_err(|e| e.to_string())?;
            let table = render(&run, format);
            std::fs::write(&out, &table).map_err(|e| format!("{}: {e}", out.display()))?;
            let mut raw = out.clone().into_os_string();
            raw.push(".fields.csv");
            std::fs::write(&raw, fields_csv(p, &run.fields)).map_err(|e| format!("{raw:?}: {e}"))?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite, bound } => {
            let names: Vec<&str> = if suite == "all" { SUITES.iter().map(|s| s.0).collect() } else { vec![suite.as_str()] };
            let mut ok = true;
            for name in names {
                let rep = verify_suite(name, bound).ok_or_else(|| {
                    let known: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
                    format!("unknown suite `{name}`; known: {}, all", known.join(", "))
                })?;
                println!("{rep}");
                ok &= rep.passed();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
