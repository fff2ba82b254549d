//! Superfast Fourier transform: the compressed `Q_n` MPO applied to an MPS,
//! plus timing and accuracy comparison against the radix-2 [`fft`] baseline.
//!
//! The inverse transform is the complex conjugate of the forward one and has
//! no separate pipeline.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::functions::{encode, reference_vector, FunctionKind, FunctionSpec};
use crate::linalg::C64;
use crate::qft::build_qft_mpo;
use crate::tn::{
    apply_mpo_zipup_with, mps_to_vector, reverse_sites, Mpo, Mps, TensorChain, TruncationPolicy, ZipupOptions,
    ZipupReport, MAX_DECODE_QUBITS,
};

/// Largest register compared against the dense FFT.
pub const MAX_FFT_QUBITS: usize = MAX_DECODE_QUBITS;

/// Fewest timed repetitions accepted by [`compare`].
pub const MIN_TIMING_RUNS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SftOptions {
    /// Truncation used while building the `Q_n` MPO.
    pub mpo_policy: TruncationPolicy,
    /// Truncation used when applying the MPO to a state.
    pub apply_policy: TruncationPolicy,
    /// Reverse the output sites so that index `q` of the result is entry `q`
    /// of the DFT.
    pub reverse_output: bool,
}

impl SftOptions {
    /// `chi` caps the MPO bond; both policies use `cutoff`.
    pub fn with_chi(chi: usize, cutoff: f64) -> Result<Self> {
        Ok(Self {
            mpo_policy: TruncationPolicy::new(cutoff, Some(chi))?,
            apply_policy: TruncationPolicy::new(cutoff, None)?,
            reverse_output: true,
        })
    }
}

impl Default for SftOptions {
    /// MPO bond 16, cutoff `1e-10` for both steps.
    fn default() -> Self {
        Self::with_chi(16, 1e-10).expect("valid default policy")
    }
}

/// A `Q_n` MPO built once and reused across inputs.
#[derive(Clone, Debug)]
pub struct Sft {
    mpo: Mpo,
    opts: SftOptions,
    build_time: Duration,
}

impl Sft {
    pub fn new(n: usize, opts: SftOptions) -> Result<Self> {
        let start = Instant::now();
        let mpo = build_qft_mpo(n, &opts.mpo_policy)?;
        let build_time = start.elapsed();
        Ok(Self { mpo, opts, build_time })
    }

    pub fn n(&self) -> usize {
        self.mpo.n()
    }

    pub fn mpo(&self) -> &Mpo {
        &self.mpo
    }

    pub fn options(&self) -> &SftOptions {
        &self.opts
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn apply(&self, input: &Mps) -> Result<Mps> {
        Ok(self.apply_with_report(input)?.0)
    }

    /// Also returns the weights discarded during application.
    pub fn apply_with_report(&self, input: &Mps) -> Result<(Mps, ZipupReport)> {
        let (out, report) =
            apply_mpo_zipup_with(&self.mpo, input, &self.opts.apply_policy, &ZipupOptions::default())?;
        let out = if self.opts.reverse_output {
            reverse_sites(&out)
        } else {
            out
        };
        Ok((out, report))
    }
}

/// One-shot transform; build an [`Sft`] to reuse the MPO.
pub fn sft(input: &Mps, opts: &SftOptions) -> Result<Mps> {
    Sft::new(input.n(), *opts)?.apply(input)
}

/// `min_phi |a/|a| - e^{i phi} b/|b||`.
pub fn rel_error(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "cannot compare vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("relative error of a zero vector".into()));
    }
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na - phase * y / nb).norm_sqr())
        .sum();
    Ok(sq.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Sft,
    Fft,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sft => "sft",
            Method::Fft => "fft",
        })
    }
}

/// One timed measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub n: usize,
    /// MPO bond cap (SFT only).
    pub chi_mpo: Option<usize>,
    /// Largest bond of the output state (SFT only).
    pub chi_state_max: Option<usize>,
    /// MPO construction or FFT plan setup, seconds.
    pub build_time_s: f64,
    /// Median transform time, seconds.
    pub apply_time_s: f64,
    /// Relative error against the FFT output; absent for the FFT itself and
    /// when the register is too large for the FFT.
    pub rel_error: Option<f64>,
    /// Seconds since the Unix epoch at which the measurement finished.
    pub timestamp: u64,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Runs `f` once untimed, then `runs` timed times; returns the median seconds
/// and the last result.
fn time_median<T>(runs: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut last = f()?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        last = f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(times), last))
}

/// SFT timing for an already-encoded state. The MPO build is excluded from
/// the apply time and reported separately.
pub fn time_sft(sft: &Sft, input: &Mps, runs: usize) -> Result<(BenchRecord, Mps)> {
    check_runs(runs)?;
    let (apply, out) = time_median(runs, || sft.apply(input))?;
    let record = BenchRecord {
        method: Method::Sft,
        n: sft.n(),
        chi_mpo: sft.options().mpo_policy.max_chi(),
        chi_state_max: Some(out.max_bond()),
        build_time_s: sft.build_time().as_secs_f64(),
        apply_time_s: apply,
        rel_error: None,
        timestamp: now(),
    };
    Ok((record, out))
}

/// FFT timing; plan construction and input copies are outside the timed region.
pub fn time_fft(input: &[C64], runs: usize) -> Result<(BenchRecord, Vec<C64>)> {
    check_runs(runs)?;
    let n = crate::fft::log2_len(input.len())?;
    let start = Instant::now();
    let plan = FftPlan::new(n);
    let build = start.elapsed().as_secs_f64();
    let mut buf = input.to_vec();
    plan.process(&mut buf)?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        buf.copy_from_slice(input);
        let start = Instant::now();
        plan.process(&mut buf)?;
        times.push(start.elapsed().as_secs_f64());
    }
    let record = BenchRecord {
        method: Method::Fft,
        n,
        chi_mpo: None,
        chi_state_max: None,
        build_time_s: build,
        apply_time_s: median(times),
        rel_error: None,
        timestamp: now(),
    };
    Ok((record, buf))
}

fn check_runs(runs: usize) -> Result<()> {
    if runs < MIN_TIMING_RUNS {
        return Err(Error::TooSmall {
            what: "timing runs",
            got: runs,
            min: MIN_TIMING_RUNS,
        });
    }
    Ok(())
}

/// Both transforms of one encoded function.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub sft: BenchRecord,
    /// `None` above [`MAX_FFT_QUBITS`].
    pub fft: Option<BenchRecord>,
}

impl Comparison {
    /// FFT time over SFT time, when both ran.
    pub fn speedup(&self) -> Option<f64> {
        self.fft.as_ref().map(|f| f.apply_time_s / self.sft.apply_time_s)
    }
}

/// Times SFT and FFT on the same function and measures the SFT error against
/// the FFT of the directly sampled reference vector.
pub fn compare(spec: &FunctionSpec, opts: &SftOptions, runs: usize) -> Result<Comparison> {
    let engine = Sft::new(spec.n(), *opts)?;
    compare_with(&engine, spec, runs)
}

/// [`compare`] with a prebuilt transform.
pub fn compare_with(engine: &Sft, spec: &FunctionSpec, runs: usize) -> Result<Comparison> {
    if engine.n() != spec.n() {
        return Err(Error::SiteMismatch {
            operator: engine.n(),
            state: spec.n(),
        });
    }
    let input = encode(spec, &engine.options().apply_policy)?;
    let (mut sft_rec, out) = time_sft(engine, &input, runs)?;
    if spec.n() > MAX_FFT_QUBITS {
        return Ok(Comparison { sft: sft_rec, fft: None });
    }
    let reference = reference_vector(spec)?;
    let (fft_rec, fft_out) = time_fft(&reference, runs)?;
    drop(reference);
    let mut decoded = mps_to_vector(&out)?;
    if !engine.options().reverse_output {
        let n = spec.n();
        let perm = crate::dense::bit_reversal_permutation(n);
        decoded = perm.iter().map(|&p| decoded[p]).collect();
    }
    sft_rec.rel_error = Some(rel_error(&decoded, &fft_out)?);
    Ok(Comparison {
        sft: sft_rec,
        fft: Some(fft_rec),
    })
}

/// A sweep cell that could not be measured.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub function: FunctionKind,
    pub n: usize,
    pub chi: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<CellFailure>,
}

/// Every function, register size and MPO bond cap, sequentially. Failed cells
/// are collected and the sweep continues. The FFT is timed once per function
/// and size, not once per bond cap.
pub fn benchmark_sweep(
    functions: &[FunctionKind],
    n_range: RangeInclusive<usize>,
    chis: &[usize],
    cutoff: f64,
    runs: usize,
) -> Result<Sweep> {
    check_runs(runs)?;
    if n_range.is_empty() {
        return Err(Error::Domain(format!(
            "empty size range {}..={}",
            n_range.start(),
            n_range.end()
        )));
    }
    if chis.is_empty() {
        return Err(Error::Domain("no bond dimensions to sweep".into()));
    }
    let mut sweep = Sweep::default();
    for n in n_range {
        for (ci, &chi) in chis.iter().enumerate() {
            let engine = SftOptions::with_chi(chi, cutoff).and_then(|opts| Sft::new(n, opts));
            for &function in functions {
                let fail = |message: String| CellFailure { function, n, chi, message };
                let engine = match &engine {
                    Ok(e) => e,
                    Err(e) => {
                        sweep.failures.push(fail(e.to_string()));
                        continue;
                    }
                };
                let result = FunctionSpec::new(function, n).and_then(|spec| compare_with(engine, &spec, runs));
                match result {
                    Ok(c) => {
                        sweep.records.push(c.sft);
                        if ci == 0 {
                            sweep.records.extend(c.fft);
                        }
                    }
                    Err(e) => sweep.failures.push(fail(e.to_string())),
                }
            }
        }
    }
    Ok(sweep)
}

/// CSV header shared by every record table.
pub const CSV_HEADER: [&str; 7] = [
    "method",
    "n",
    "chi_mpo",
    "chi_state_max",
    "build_time_s",
    "apply_time_s",
    "rel_error",
];

/// Formats a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the header and one row per record. Absent values are empty fields.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt_usize = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.method.to_string(),
            r.n.to_string(),
            opt_usize(r.chi_mpo),
            opt_usize(r.chi_state_max),
            format_f64(r.build_time_s),
            format_f64(r.apply_time_s),
            r.rel_error.map(format_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
