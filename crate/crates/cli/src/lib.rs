//! Command-line front end. Each subcommand validates its parameters, runs one
//! construction or check, writes everything under `--out`, and maps the
//! outcome to an exit code: 0 pass, 1 certified failure, 2 usage or internal
//! error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use mfrep::assembly::{baumslag_presentation, build_baumslag, random_window_words};
use mfrep::certify::{boost_and_recertify, certify_with, CertReport, DEFAULT_SEPARATION_THRESHOLD};
use mfrep::chain::{build_chain, defect_bound, is_prime};
use mfrep::doubling::{cycle_structure, doubling_identity_error, format_census, spectrum_histogram, write_histogram_csv};
use mfrep::matkernel::io::read_unitary;
use mfrep::random::seeded;
use mfrep::words::{GeneratorAssignment, Presentation};
use mfrep::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Largest `n` for which the doubling identity is also checked densely.
pub const DENSE_CHECK_LIMIT: u64 = 1025;

/// Random words drawn for the compression check of `baumslag`.
pub const COMPRESSION_WORDS: usize = 20;
pub const COMPRESSION_WORD_LEN: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "mfrep",
    version,
    about = "Finite-dimensional almost representations of finitely presented groups, certified in operator norm"
)]
pub struct Cli {
    /// Worker threads for block-level parallelism.
    #[arg(long, global = true, env = "MFREP_THREADS")]
    pub threads: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The doubling permutation x ↦ 2x mod n, which conjugates D_n to D_n².
    ///
    /// Writes the cycle census of the permutation and a histogram of the
    /// eigenangles of P_n (one row per bin) as CSV. For n = 2^p − 1 with p
    /// prime every nontrivial cycle has length p.
    Doubling(DoublingArgs),
    /// Chain representation of H_j: unitaries a_{−j−1}..a_{j+1} of dimension
    /// 2^p − 1 with a_{i+1}⁻¹ a_i a_{i+1} ≈ a_i².
    ///
    /// Every generator has the simple (2^p − 1)-th roots of unity as spectrum.
    /// Exits 1 if a measured defect exceeds the a-priori bound.
    Chain(ChainArgs),
    /// Block matrices A, B almost satisfying the Baumslag relation a^{a^b} = a².
    ///
    /// A is block diagonal with conjugated chain generators, B is the block
    /// shift. The instance is certified against the relator, its shifts in the
    /// window |i| ≤ k0, and the words a, b and a_i a_l⁻¹ (a_i = b^{−i} a b^{i}).
    /// The default ε is 17·ε_eff. Exits 0 iff the report passes.
    Baumslag(BaumslagArgs),
    /// Check a presentation against unitary matrices read from files.
    ///
    /// Every relator must lie within ε of the identity and every listed word
    /// at least the separation threshold away from it. Exits 0 iff both hold.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct DoublingArgs {
    /// Odd modulus.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 16)]
    pub bins: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Prime; the block dimension is 2^p − 1.
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub j: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaumslagArgs {
    #[arg(long)]
    pub p: u32,
    /// Half-width of the certified window of indices.
    #[arg(long)]
    pub k0: u64,
    /// Number of path steps between the identity and the wraparound conjugator.
    #[arg(long = "N")]
    pub n: u64,
    /// Relator tolerance; defaults to 17·ε_eff of the instance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write A blocks, chain generators and path points.
    #[arg(long)]
    pub matrices: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Presentation JSON.
    #[arg(long)]
    pub presentation: PathBuf,
    /// Directory with one `<generator>.json` matrix file per generator.
    #[arg(long)]
    pub matrices: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_SEPARATION_THRESHOLD)]
    pub separation_threshold: f64,
    /// Boost separations to √2 first, with spectral threshold δ.
    #[arg(long)]
    pub boost_delta: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse-free entry point: runs the command and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.threads {
        Some(0) => Err(Error::OutOfRange("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            EXIT_ERROR
        }
    }
}

fn error_chain(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut src = e.source();
    while let Some(inner) = src {
        let msg = inner.to_string();
        if !s.contains(&msg) {
            s.push_str(": ");
            s.push_str(&msg);
        }
        src = inner.source();
    }
    s
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Doubling(a) => cmd_doubling(a.n, a.bins, &a.out),
        Command::Chain(a) => cmd_chain(a.p, a.j, &a.out),
        Command::Baumslag(a) => cmd_baumslag(a, cli.seed),
        Command::Certify(a) => cmd_certify(a),
    }
}

fn create_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::OutOfRange(format!("p = {p} is not prime")));
    }
    if p == 2 {
        eprintln!("warning: p = 2 gives block dimension 3, the smallest nontrivial case");
    }
    Ok(())
}

pub fn cmd_doubling(n: u64, bins: u64, out: &Path) -> Result<i32> {
    if n.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!("n = {n} must be odd")));
    }
    if bins == 0 {
        return Err(Error::OutOfRange("bins must be positive".into()));
    }
    let census = cycle_structure(n)?;
    let rows = spectrum_histogram(n, bins)?;
    let identity_error = if n <= DENSE_CHECK_LIMIT {
        Some(doubling_identity_error::<f64>(n)?)
    } else {
        None
    };
    create_out(out)?;
    let csv_path = out.join("histogram.csv");
    let file = fs::File::create(&csv_path).map_err(|source| Error::Io {
        path: csv_path.display().to_string(),
        source,
    })?;
    write_histogram_csv(file, &rows)?;
    let summary = serde_json::json!({
        "n": n,
        "census": census,
        "identity_error": identity_error,
    });
    write_file(&out.join("census.json"), &serde_json::to_string_pretty(&summary).expect("serializes"))?;
    let max_fraction = rows.iter().map(|r| r.fraction).fold(0.0, f64::max);
    println!("n={n} cycles={} max_bin_fraction={max_fraction}", format_census(&census));
    Ok(EXIT_PASS)
}

pub fn cmd_chain(p: u32, j: u64, out: &Path) -> Result<i32> {
    check_prime(p)?;
    let chain = build_chain::<f64>(p, j)?;
    chain.write(out)?;
    for (i, d) in chain.defects() {
        println!("defect[{i}] = {d:e}");
    }
    let max = chain.max_defect();
    let bound = defect_bound(p);
    println!("max_defect = {max:e} (bound {bound:e})");
    Ok(if max <= bound { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_baumslag(args: &BaumslagArgs, seed: u64) -> Result<i32> {
    check_prime(args.p)?;
    if args.n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    if let Some(e) = args.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::OutOfRange(format!("epsilon = {e} must be positive")));
        }
    }
    let inst = build_baumslag::<f64>(args.p, args.k0, args.n)?;
    let pres = baumslag_presentation(args.k0)?;
    let epsilon = args.epsilon.unwrap_or(17.0 * inst.epsilon_eff);
    let words = random_window_words(&mut seeded(seed), args.k0, COMPRESSION_WORDS, COMPRESSION_WORD_LEN);
    let compression_error = inst.compression_error(&words)?;
    let report = certify_with(&pres, &inst.assignment(), epsilon, DEFAULT_SEPARATION_THRESHOLD)?
        .with_param("p", args.p)
        .with_param("k0", args.k0)
        .with_param("N", args.n)
        .with_param("j", inst.j)
        .with_param("block_dim", inst.a.block_dim())
        .with_param("dim", inst.dim())
        .with_param("epsilon_eff", inst.epsilon_eff)
        .with_param("delta_chain", inst.delta_chain)
        .with_param("delta_step", inst.delta_step)
        .with_param("delta_conj", inst.delta_conj)
        .with_param("block_defects", &inst.block_defects)
        .with_param("interior_within_bound", inst.interior_within_bound())
        .with_param("wrap_within_bound", inst.wrap_within_bound())
        .with_param("compression_error", compression_error)
        .with_param("seed", seed);
    create_out(&args.out)?;
    inst.write(&args.out.join("instance"), args.matrices)?;
    write_file(&args.out.join("report.json"), &report.to_json_string())?;
    if !inst.interior_within_bound() || !inst.wrap_within_bound() {
        eprintln!("warning: measured block defects exceed the 17·ε_eff / 3·ε_eff bounds");
    }
    summarize(&report);
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<i32> {
    let pres = Presentation::read(&args.presentation)?;
    let map = pres
        .generators
        .iter()
        .map(|g| Ok((g.clone(), read_unitary::<f64>(&args.matrices.join(format!("{g}.json")))?)))
        .collect::<Result<_>>()?;
    let asg = GeneratorAssignment::new(map)?;
    let report = match args.boost_delta {
        None => certify_with(&pres, &asg, args.epsilon, args.separation_threshold)?.with_param("dim", asg.dim()),
        Some(delta) => boost_and_recertify(&pres, &asg, args.epsilon, args.separation_threshold, delta)?.report,
    };
    create_out(&args.out)?;
    write_file(&args.out.join("report.json"), &report.to_json_string())?;
    summarize(&report);
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn summarize(report: &CertReport) {
    println!(
        "{}: max relator defect {:e} (epsilon {:e}), min separation {} -> {}",
        report.presentation,
        report.max_relator_defect(),
        report.epsilon,
        report
            .min_separation()
            .map_or_else(|| "n/a".to_string(), |s| format!("{s:.6}")),
        if report.pass { "PASS" } else { "FAIL" }
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["mfrep", "chain", "--p", "5", "--j", "1", "--out", "x", "--seed", "9"]).unwrap();
        assert_eq!(cli.seed, 9);
        match cli.command {
            Command::Chain(ref a) => assert_eq!((a.p, a.j), (5, 1)),
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn baumslag_defaults() {
        let cli = Cli::try_parse_from(["mfrep", "baumslag", "--p", "3", "--k0", "1", "--N", "2", "--out", "x"]).unwrap();
        match cli.command {
            Command::Baumslag(ref a) => {
                assert_eq!(a.epsilon, None);
                assert!(!a.matrices);
            }
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prime_checks() {
        assert!(check_prime(9).is_err());
        assert!(check_prime(2).is_ok());
        assert!(check_prime(7).is_ok());
    }

    #[test]
    fn doubling_writes_outputs() {
        let dir = std::env::temp_dir().join(format!("mfrep-unit-{}", std::process::id()));
        assert_eq!(cmd_doubling(15, 5, &dir).unwrap(), EXIT_PASS);
        assert!(dir.join("histogram.csv").exists());
        assert!(dir.join("census.json").exists());
        assert!(cmd_doubling(15, 0, &dir).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
