use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use structvar::hac::{KernelKind, KernelSpec};
use structvar::pipeline::{self, Dgp, PipelineConfig, OUTPUT_DIR_ENV};
use structvar::tscore;
use structvar::unitroot::{self, KpssSpec};
use structvar::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "structvar", version, about = "Structural VAR replication toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecArg {
    Level,
    Trend,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Bartlett,
    Qs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and the environment).
        #[arg(long, env = OUTPUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// KPSS test on one CSV column; prints the result as JSON.
    Kpss {
        csv: PathBuf,
        #[arg(long)]
        col: String,
        #[arg(long, value_enum, default_value = "level")]
        spec: SpecArg,
        /// `auto`, an integer truncation lag, or a real bandwidth; defaults to
        /// the ⌊4(T/100)^{1/4}⌋ lag.
        #[arg(long)]
        bandwidth: Option<String>,
        #[arg(long, value_enum, default_value = "bartlett")]
        kernel: KernelArg,
        #[arg(long, default_value = "year")]
        index_col: String,
    },
    /// Simulate a structural VAR(1) and write it as CSV.
    Synth {
        /// `recursive` or `paper_system11`; ignored when --custom is given.
        #[arg(long, default_value = "paper_system11")]
        dgp: String,
        /// JSON file with `a`, `b`, `a1` (rows) and optional `names`.
        #[arg(long)]
        custom: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write cumulated levels (`X`) instead of the simulated differences (`dX`).
        #[arg(long)]
        levels: bool,
        #[arg(long, default_value = "year")]
        index_col: String,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::Index(_) => EXIT_CONFIG,
        _ => EXIT_STAGE,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_for(&e))
}

fn run(config: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let cfg = match PipelineConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return ExitCode::from(eprintln_code(&e, EXIT_CONFIG)),
    };
    let report = match pipeline::run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => return ExitCode::from(eprintln_code(&e, EXIT_CONFIG)),
    };
    let dir = out.unwrap_or_else(|| pipeline::output_dir(&cfg));
    if let Err(e) = pipeline::emit_artifacts(&report, &dir) {
        return fail(e);
    }
    for s in &report.stages {
        let status = format!("{:?}", s.status).to_lowercase();
        match &s.reason {
            Some(r) => println!("{:<18} {status:<8} {r}", s.stage),
            None => println!("{:<18} {status}", s.stage),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("artifacts written to {}", dir.display());
    if report.failed() {
        ExitCode::from(EXIT_STAGE)
    } else {
        ExitCode::SUCCESS
    }
}

fn eprintln_code(e: &Error, code: u8) -> u8 {
    eprintln!("error: {e}");
    code
}

fn kpss(csv: PathBuf, col: String, spec: SpecArg, bandwidth: Option<String>, kernel: KernelArg, index_col: String) -> ExitCode {
    let ds = match tscore::load_csv(&csv, &index_col) {
        Ok(d) => d,
        Err(e) => return ExitCode::from(eprintln_code(&e, EXIT_CONFIG)),
    };
    let s = match ds.column(&col) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let kind = match kernel {
        KernelArg::Bartlett => KernelKind::Bartlett,
        KernelArg::Qs => KernelKind::QuadraticSpectral,
    };
    let kspec = match bandwidth {
        None => KernelSpec::new(kind, structvar::hac::Bandwidth::Lags(unitroot::default_lag(s.len()))),
        Some(b) => unitroot::parse_bandwidth(&b).and_then(|bw| KernelSpec::new(kind, bw)),
    };
    let kspec = match kspec {
        Ok(k) => k,
        Err(e) => return fail(e),
    };
    let spec = match spec {
        SpecArg::Level => KpssSpec::Level,
        SpecArg::Trend => KpssSpec::Trend,
    };
    match unitroot::kpss_test(s, spec, kspec) {
        Ok(r) => {
            println!("{}", serde_json::to_string_pretty(&r).expect("result serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn synth(dgp: String, custom: Option<PathBuf>, t: usize, seed: u64, out: PathBuf, levels: bool, index_col: String) -> ExitCode {
    let dgp: Result<Dgp, Error> = match custom {
        Some(path) => std::fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|text| {
                let v: serde_json::Value = serde_json::from_str(&text)?;
                Ok(serde_json::from_value(serde_json::json!({ "custom": v }))?)
            }),
        None => dgp.parse(),
    };
    let result = dgp
        .and_then(|d| pipeline::synth_generate(&d, t, seed))
        .and_then(|ds| if levels { pipeline::integrate(&ds) } else { Ok(ds) })
        .and_then(|ds| {
            if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&out, ds.to_csv(&index_col))?;
            Ok(ds.nobs())
        });
    match result {
        Ok(n) => {
            println!("wrote {n} observations to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Kpss {
            csv,
            col,
            spec,
            bandwidth,
            kernel,
            index_col,
        } => kpss(csv, col, spec, bandwidth, kernel, index_col),
        Command::Synth {
            dgp,
            custom,
            t,
            seed,
            out,
            levels,
            index_col,
        } => synth(dgp, custom, t, seed, out, levels, index_col),
    }
}
