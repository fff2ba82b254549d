use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use qft_tn::dense::{dft_matrix, operator_schmidt};
use qft_tn::functions::{encode, FunctionKind, FunctionSpec};
use qft_tn::qft::{build_qft_mpo, build_qn_dense, theorem_bound, BoundCurve};
use qft_tn::sft::{benchmark_sweep, compare, format_f64, time_sft, write_csv, Sft, SftOptions, MIN_TIMING_RUNS};
use qft_tn::tn::{schmidt_spectrum_at, TensorChain, TruncationPolicy};
use qft_tn::verify::{run_suite, VerifyConfig, DEFAULT_SEED, MAX_VERIFY_QUBITS};
use qft_tn::SchmidtSpectrum;

const FUNCTION_HELP: &str = "Function spec: plane-wave:k=<real> | delta:p=<index> | constant | \
gaussian:mu=<[0,1)>,s=<positive> | step:e=<[0,1)> | sampled:id=<lorentzian|ramp>. \
The argument is x = q / 2^n.";

/// Tensor-network quantum Fourier transform toolkit.
#[derive(Parser, Debug)]
#[command(name = "qft-tn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Operator {
    /// The QFT without its final bit reversal.
    Qn,
    /// The full DFT.
    Fn,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator Schmidt spectrum at one cut, as CSV `k,sigma,bound`.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// Cut after qubit `j` (1 <= j < n).
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "qn")]
        operator: Operator,
        /// Read the spectrum off a compressed MPO with this bond cap instead
        /// of the dense operator (qn only).
        #[arg(long)]
        chi: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular-value decay bound for k = 2..=kmax, as CSV `k,bound`.
    Bound {
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds the compressed QFT MPO and writes it in binary form.
    BuildMpo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        chi: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transforms one encoded function and reports a timing row.
    Sft {
        #[arg(long, help = FUNCTION_HELP)]
        function: FunctionKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        chi: usize,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        /// Keep the bit-reversed output order of the circuit.
        #[arg(long)]
        no_reverse: bool,
        #[arg(long, default_value_t = MIN_TIMING_RUNS)]
        runs: usize,
        /// Also write the output state in binary form.
        #[arg(long)]
        state_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Times SFT against the radix-2 FFT on one function.
    Compare {
        #[arg(long, help = FUNCTION_HELP)]
        function: FunctionKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        chi: usize,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        #[arg(long, default_value_t = MIN_TIMING_RUNS)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Benchmark table over functions, sizes and bond caps.
    Sweep {
        /// Function specs separated by ';' (the flag may also be repeated).
        #[arg(long, required = true, value_delimiter = ';', help = FUNCTION_HELP)]
        functions: Vec<FunctionKind>,
        #[arg(long)]
        nmin: usize,
        #[arg(long)]
        nmax: usize,
        /// Comma-separated MPO bond caps.
        #[arg(long, required = true, value_delimiter = ',')]
        chis: Vec<usize>,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        #[arg(long, default_value_t = MIN_TIMING_RUNS)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the dense-oracle invariant suite and prints a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn policy_or_usage(cutoff: f64, chi: Option<usize>) -> TruncationPolicy {
    TruncationPolicy::new(cutoff, chi).unwrap_or_else(|e| usage_error(e))
}

fn spec_or_usage(kind: FunctionKind, n: usize) -> FunctionSpec {
    FunctionSpec::new(kind, n).unwrap_or_else(|e| usage_error(e))
}

fn check_runs(runs: usize) {
    if runs < MIN_TIMING_RUNS {
        usage_error(format!("--runs must be at least {MIN_TIMING_RUNS}"));
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_spectrum(s: &SchmidtSpectrum, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "sigma", "bound"])?;
    for (k, &sigma) in s.sigmas().iter().enumerate() {
        let bound = if k >= 2 { format_f64(theorem_bound(k)?) } else { String::new() };
        w.write_record([k.to_string(), format_f64(sigma), bound])?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Spectrum {
            n,
            j,
            operator,
            chi,
            out,
        } => {
            if n < 2 || j == 0 || j >= n {
                usage_error(format!("need n >= 2 and 1 <= j < n, got n = {n}, j = {j}"));
            }
            let spectrum = match (operator, chi) {
                (Operator::Fn, Some(_)) => usage_error("--chi is only available for --operator qn"),
                (_, Some(chi)) => {
                    let mpo = build_qft_mpo(n, &policy_or_usage(0.0, Some(chi)))?;
                    schmidt_spectrum_at(&mpo, j)?
                }
                (op, None) => {
                    if n > MAX_VERIFY_QUBITS {
                        usage_error(format!("dense spectra need n <= {MAX_VERIFY_QUBITS}; pass --chi for larger n"));
                    }
                    let dense = match op {
                        Operator::Qn => build_qn_dense(n)?,
                        Operator::Fn => dft_matrix(n)?,
                    };
                    operator_schmidt(&dense, j)?
                }
            };
            let mut w = output(out.as_ref())?;
            write_spectrum(&spectrum, &mut w)?;
            w.flush()?;
        }
        Command::Bound { kmax, out } => {
            if kmax < 2 {
                usage_error("--kmax must be at least 2");
            }
            let curve = BoundCurve::new(kmax)?;
            let mut w = csv::Writer::from_writer(output(out.as_ref())?);
            w.write_record(["k", "bound"])?;
            for &(k, b) in curve.values() {
                w.write_record([k.to_string(), format_f64(b)])?;
            }
            w.flush()?;
        }
        Command::BuildMpo { n, chi, cutoff, out } => {
            let policy = policy_or_usage(cutoff, chi);
            let engine = Sft::new(
                n,
                SftOptions {
                    mpo_policy: policy,
                    ..SftOptions::default()
                },
            )?;
            engine.mpo().save(&out)?;
            eprintln!(
                "n = {n}, bonds {:?}, built in {:.3e} s, written to {}",
                engine.mpo().bond_dims(),
                engine.build_time().as_secs_f64(),
                out.display()
            );
        }
        Command::Sft {
            function,
            n,
            chi,
            cutoff,
            no_reverse,
            runs,
            state_out,
            out,
        } => {
            let spec = spec_or_usage(function, n);
            check_runs(runs);
            let opts = SftOptions {
                mpo_policy: policy_or_usage(cutoff, Some(chi)),
                apply_policy: policy_or_usage(cutoff, None),
                reverse_output: !no_reverse,
            };
            let engine = Sft::new(n, opts)?;
            let input = encode(&spec, &opts.apply_policy)?;
            let (record, state) = time_sft(&engine, &input, runs)?;
            if let Some(path) = state_out {
                state.save(&path)?;
            }
            let mut w = output(out.as_ref())?;
            write_csv(&[record], &mut w)?;
            w.flush()?;
        }
        Command::Compare {
            function,
            n,
            chi,
            cutoff,
            runs,
            out,
        } => {
            let spec = spec_or_usage(function, n);
            check_runs(runs);
            let opts = SftOptions {
                mpo_policy: policy_or_usage(cutoff, Some(chi)),
                apply_policy: policy_or_usage(cutoff, None),
                reverse_output: true,
            };
            let result = compare(&spec, &opts, runs)?;
            let mut records = vec![result.sft.clone()];
            records.extend(result.fft.clone());
            let mut w = output(out.as_ref())?;
            write_csv(&records, &mut w)?;
            w.flush()?;
            match result.speedup() {
                Some(s) => eprintln!("{spec}: FFT time / SFT time = {s:.3}"),
                None => eprintln!("{spec}: register too large for the FFT baseline, SFT only"),
            }
        }
        Command::Sweep {
            functions,
            nmin,
            nmax,
            chis,
            cutoff,
            runs,
            out,
        } => {
            if nmin == 0 || nmin > nmax {
                usage_error(format!("need 1 <= nmin <= nmax, got {nmin}..{nmax}"));
            }
            check_runs(runs);
            for &chi in &chis {
                policy_or_usage(cutoff, Some(chi));
            }
            let sweep = benchmark_sweep(&functions, nmin..=nmax, &chis, cutoff, runs)?;
            let mut w = output(out.as_ref())?;
            write_csv(&sweep.records, &mut w)?;
            w.flush()?;
            for f in &sweep.failures {
                eprintln!("cell failed: {} n={} chi={}: {}", f.function, f.n, f.chi, f.message);
            }
            if sweep.records.is_empty() {
                eprintln!("every cell failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify { nmax, seed, out } => {
            let config = VerifyConfig::new(nmax, seed).unwrap_or_else(|e| usage_error(e));
            let rows = run_suite(&config);
            let mut w = output(out.as_ref())?;
            for row in &rows {
                writeln!(w, "{row}")?;
            }
            let failed = rows.iter().filter(|r| !r.passed).count();
            writeln!(w, "{} checks, {failed} failed", rows.len())?;
            w.flush()?;
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// A closed downstream pipe (`qft-tn ... | head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io_err = c.downcast_ref::<io::Error>().or_else(|| match c.downcast_ref::<csv::Error>()?.kind() {
            csv::ErrorKind::Io(err) => Some(err),
            _ => None,
        });
        io_err.is_some_and(|err| err.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
