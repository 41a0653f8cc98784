use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use synthop::verify::{verify_dataset, VerifyOptions};
use synthop::{
    generate_dataset, BcKind, DatasetConfig, DatasetManifest, Error, Execution, Executor, FieldSpec, Grid,
    OperatorFamily, Precision,
};

#[derive(Parser)]
#[command(
    name = "synthop",
    version,
    about = "Synthetic (f, u) pairs for elliptic operator learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset into a directory.
    Generate(GenerateArgs),
    /// Print a summary of a dataset manifest.
    Inspect { manifest: PathBuf },
    /// Check a dataset against independent finite-difference and sine-transform oracles.
    Verify {
        manifest: PathBuf,
        /// Also evaluate on the nested refined grid and report convergence orders.
        #[arg(long)]
        refine: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Poisson,
    DivformFixed,
    DivformParam,
    Semilinear,
}

impl From<OpArg> for OperatorFamily {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Poisson => OperatorFamily::Poisson,
            OpArg::DivformFixed => OperatorFamily::DivformFixed,
            OpArg::DivformParam => OperatorFamily::DivformParam,
            OpArg::Semilinear => OperatorFamily::Semilinear,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
}

impl From<BcArg> for BcKind {
    fn from(bc: BcArg) -> Self {
        match bc {
            BcArg::Dirichlet => BcKind::Dirichlet,
            BcArg::Neumann => BcKind::Neumann,
        }
    }
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    op: OpArg,
    #[arg(long, value_enum)]
    bc: BcArg,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, default_value_t = 1)]
    m_min: u32,
    #[arg(long, default_value_t = 20)]
    m_max: u32,
    #[arg(long)]
    seed: u64,
    /// Element precision of the stored arrays, 32 or 64.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(32..=64))]
    precision: u32,
    #[arg(long)]
    out: PathBuf,
    /// Also write a `.npy` copy of every array.
    #[arg(long)]
    npy: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn generate(args: GenerateArgs) -> Result<(), Error> {
    let precision = Precision::from_bits(args.precision)
        .ok_or_else(|| Error::InvalidFieldSpec(format!("precision must be 32 or 64, got {}", args.precision)))?;
    let cfg = DatasetConfig {
        spec: FieldSpec::new(args.bc.into(), args.m_min, args.m_max, args.seed)?,
        family: args.op.into(),
        grid: Grid::with_boundary(args.res)?,
        num_samples: args.n,
        precision,
        npy_mirror: args.npy,
    };
    let executor = Executor::new(Execution::from_threads(args.threads))?;
    let manifest = generate_dataset(&cfg, &args.out, &executor)?;
    eprintln!(
        "wrote {} {} samples at {}x{} to {}",
        manifest.num_samples,
        manifest.operator.as_str(),
        manifest.resolution,
        manifest.resolution,
        args.out.display()
    );
    Ok(())
}

fn inspect(path: &Path) -> Result<(), Error> {
    let m = DatasetManifest::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let files = match m.check_files(dir) {
        Ok(()) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    println!("version      {}", m.version);
    println!("operator     {}", m.operator.as_str());
    println!("bc           {}", m.bc.as_str());
    println!(
        "resolution   {} ({})",
        m.resolution,
        if m.includes_boundary {
            "with boundary"
        } else {
            "interior"
        }
    );
    println!("samples      {}", m.num_samples);
    println!("truncation   {}..={}", m.m_min, m.m_max);
    println!("seed         {}", m.master_seed);
    println!("dtype        {}", m.dtype.as_str());
    println!("layout       {}", m.layout);
    for a in &m.arrays {
        println!(
            "array        {:<14} {:<6} {:?} {}",
            a.name,
            a.dtype.as_str(),
            a.shape,
            a.file
        );
    }
    println!("files        {files}");
    Ok(())
}

fn verify(manifest: &Path, refine: bool, report: Option<&Path>, threads: Option<usize>) -> Result<bool, Error> {
    let executor = Executor::new(Execution::from_threads(threads))?;
    let rep = verify_dataset(manifest, VerifyOptions { refine }, &executor)?;
    let json = serde_json::to_string_pretty(&rep).expect("report serializes");
    match report {
        Some(path) => fs::write(path, json + "\n").map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?,
        None => println!("{json}"),
    }
    let s = &rep.summary;
    eprintln!("{} of {} records passed", s.passed, s.records);
    Ok(s.all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args).map(|()| true),
        Command::Inspect { manifest } => inspect(&manifest).map(|()| true),
        Command::Verify {
            manifest,
            refine,
            report,
            threads,
        } => verify(&manifest, refine, report.as_deref(), threads),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error[verification]: one or more records failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(2)
        }
    }
}
