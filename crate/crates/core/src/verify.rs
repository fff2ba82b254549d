//! Invariant suite checked against dense oracles.
//!
//! Every check reports the worst measured deviation next to its tolerance.
//! Register sizes run from the smallest meaningful `n` up to the configured
//! cap, so the cost grows quickly with the cap; 10 takes a few seconds.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{bit_reversal_permutation, dft_matrix, operator_schmidt, DenseOperator};
use crate::error::{Error, Result};
use crate::fft::fft;
use crate::linalg::C64;
use crate::qft::{build_qft_mpo, build_qn_dense, theorem_bound};
use crate::sft::{rel_error, Sft, SftOptions};
use crate::tn::{
    all_schmidt_spectra, apply_mpo_zipup, canonicalize, mpo_to_dense, mps_to_vector, reverse_sites,
    truncate_bond, vector_to_mps, Direction, Mpo, Mps, TruncationPolicy,
};

/// Largest accepted cap; dense operators above this size are impractical.
pub const MAX_VERIFY_QUBITS: usize = 12;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5e_ed0f_0ff7;

/// Below this value a singular value is treated as numerical noise.
pub const SIGMA_NOISE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub nmax: usize,
    pub seed: u64,
}

impl VerifyConfig {
    pub fn new(nmax: usize, seed: u64) -> Result<Self> {
        if nmax < 2 {
            return Err(Error::TooSmall {
                what: "verify nmax",
                got: nmax,
                min: 2,
            });
        }
        if nmax > MAX_VERIFY_QUBITS {
            return Err(Error::TooLarge {
                what: "verify nmax",
                got: nmax,
                max: MAX_VERIFY_QUBITS,
            });
        }
        Ok(Self { nmax, seed })
    }
}

/// One row of the pass/fail table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value; `NaN` when the check errored.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<28} {}", self.name, self.detail)
    }
}

struct Ctx {
    nmax: usize,
    rng: ChaCha8Rng,
    qn: Vec<Option<DenseOperator>>,
}

impl Ctx {
    fn qn(&mut self, n: usize) -> Result<&DenseOperator> {
        if self.qn[n].is_none() {
            self.qn[n] = Some(build_qn_dense(n)?);
        }
        Ok(self.qn[n].as_ref().expect("just filled"))
    }

    fn random_vector(&mut self, len: usize) -> Vec<C64> {
        (0..len)
            .map(|_| C64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
            .collect()
    }
}

type Check = fn(&mut Ctx) -> Result<(f64, String)>;

/// Name, tolerance and body of each check, in execution order.
const CHECKS: &[(&str, f64, Check)] = &[
    ("dft-decomposition", 1e-12, dft_decomposition),
    ("qn-unitarity", 1e-12, qn_unitarity),
    ("fn-uniform-spectra", 1e-10, fn_uniform_spectra),
    ("qn-theorem-bound", 1.0, qn_theorem_bound),
    ("qn-cut-mirror", 1e-12, qn_cut_mirror),
    ("mpo-exact-reconstruction", 1e-12, mpo_exact_reconstruction),
    ("mpo-spectra-match-dense", 1e-10, mpo_spectra_match_dense),
    ("eckart-young-bond", 1e-10, eckart_young_bond),
    ("mps-round-trip", 1e-12, mps_round_trip),
    ("gauge-invariance", 1e-12, gauge_invariance),
    ("reverse-sites", 1e-13, reverse_sites_check),
    ("zipup-vs-dense", 1e-11, zipup_vs_dense),
    ("fft-vs-dense", 1e-12, fft_vs_dense),
    ("sft-vs-fft", 1e-8, sft_vs_fft),
    ("sft-linearity", 1e-9, sft_linearity),
    ("sft-norm-exact", 1e-12, sft_norm_exact),
    ("sft-parseval", 1e-9, sft_parseval),
    ("io-round-trip", 0.0, io_round_trip),
];

/// Runs every check; errors inside a check become failed rows.
pub fn run_suite(config: &VerifyConfig) -> Vec<CheckResult> {
    let mut ctx = Ctx {
        nmax: config.nmax,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        qn: vec![None; config.nmax + 1],
    };
    CHECKS
        .iter()
        .map(|&(name, tolerance, check)| match check(&mut ctx) {
            Ok((measured, what)) => CheckResult {
                name,
                passed: measured <= tolerance,
                measured,
                tolerance,
                detail: format!("{what}: {measured:.3e} (limit {tolerance:.0e})"),
            },
            Err(e) => CheckResult {
                name,
                passed: false,
                measured: f64::NAN,
                tolerance,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn relative_distance(a: &DenseOperator, b: &DenseOperator) -> f64 {
    a.frobenius_distance(b) / b.frobenius_norm()
}

fn dft_decomposition(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 1..=ctx.nmax {
        let r = DenseOperator::permutation(n, &bit_reversal_permutation(n))?;
        let f = dft_matrix(n)?;
        worst = worst.max(relative_distance(&r.compose(ctx.qn(n)?)?, &f));
    }
    Ok((worst, format!("|R Q - F| / |F|, n = 1..{}", ctx.nmax)))
}

fn qn_unitarity(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 1..=ctx.nmax {
        worst = worst.max(ctx.qn(n)?.unitarity_defect());
    }
    Ok((worst, format!("max |Q^+ Q - I|, n = 1..{}", ctx.nmax)))
}

fn fn_uniform_spectra(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax.min(10) {
        let f = dft_matrix(n)?;
        for j in 1..n {
            let s = operator_schmidt(&f, j)?;
            let kept = &s.sigmas()[..s.rank_above(1e-8)];
            let hi = kept.iter().copied().fold(f64::MIN, f64::max);
            let lo = kept.iter().copied().fold(f64::MAX, f64::min);
            if kept.len() != 1 << (2 * j.min(n - j)) {
                return Err(Error::Validation(format!("F_{n} has rank {} at cut {j}", kept.len())));
            }
            worst = worst.max(hi - lo);
        }
    }
    Ok((worst, format!("max - min of F_n spectra, n = 2..{}", ctx.nmax.min(10))))
}

/// Reports the largest `sigma_k / bound(k)`; it must not exceed one.
fn qn_theorem_bound(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax.min(10) {
        for j in 1..n {
            let s = operator_schmidt(ctx.qn(n)?, j)?;
            for (k, &sigma) in s.sigmas().iter().enumerate().skip(2) {
                if sigma > SIGMA_NOISE_FLOOR {
                    worst = worst.max(sigma / theorem_bound(k)?);
                }
            }
        }
    }
    Ok((worst, format!("max sigma_k / bound(k), n = 2..{}", ctx.nmax.min(10))))
}

/// `R Q R = Q^T`, so the spectrum at cut `j` equals the one at `n - j`.
fn qn_cut_mirror(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 3..=ctx.nmax.min(10) {
        for j in 1..n / 2 + 1 {
            let a = operator_schmidt(ctx.qn(n)?, j)?;
            let b = operator_schmidt(ctx.qn(n)?, n - j)?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    Ok((worst, format!("spectrum(j) vs spectrum(n - j), n = 3..{}", ctx.nmax.min(10))))
}

fn mpo_exact_reconstruction(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax {
        let mpo = build_qft_mpo(n, &TruncationPolicy::exact())?;
        worst = worst.max(relative_distance(&mpo_to_dense(&mpo)?, ctx.qn(n)?));
    }
    Ok((worst, format!("|MPO - Q| / |Q| at cutoff 0, n = 2..{}", ctx.nmax)))
}

fn mpo_spectra_match_dense(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    let top = ctx.nmax.min(10);
    for n in 2..=top {
        let mpo = build_qft_mpo(n, &TruncationPolicy::exact())?;
        for (j, s) in (1..).zip(all_schmidt_spectra(&mpo)?) {
            worst = worst.max(s.max_abs_diff(&operator_schmidt(ctx.qn(n)?, j)?));
        }
    }
    Ok((worst, format!("MPO vs dense spectra, n = 2..{top}")))
}

/// Truncating one bond of the exact MPO costs exactly the dense tail there.
fn eckart_young_bond(ctx: &mut Ctx) -> Result<(f64, String)> {
    let n = ctx.nmax.min(8);
    let mpo = build_qft_mpo(n, &TruncationPolicy::exact())?;
    let q = ctx.qn(n)?.clone();
    let norm = q.frobenius_norm();
    let mut worst = 0f64;
    for j in 1..n {
        let dense = operator_schmidt(&q, j)?;
        for chi in [1usize, 2, 4] {
            let (cut, _) = truncate_bond(&mpo, j, &TruncationPolicy::new(0.0, Some(chi))?)?;
            let err = mpo_to_dense(&cut)?.frobenius_distance(&q) / norm;
            worst = worst.max((err - dense.tail_norm(chi)).abs());
        }
    }
    Ok((worst, format!("|error - dense tail| per bond, n = {n}, chi = 1, 2, 4")))
}

fn mps_round_trip(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 1..=ctx.nmax {
        let v = ctx.random_vector(1 << n);
        let back = mps_to_vector(&vector_to_mps(&v, &TruncationPolicy::exact())?)?;
        worst = worst.max(rel_error(&back, &v)?);
    }
    Ok((worst, format!("decode(encode(v)) vs v, n = 1..{}", ctx.nmax)))
}

fn gauge_invariance(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax {
        let m = Mps::random(n, 5, &mut ctx.rng)?;
        let v = mps_to_vector(&m)?;
        let spectra = all_schmidt_spectra(&m)?;
        for dir in [Direction::Left, Direction::Right] {
            let c = canonicalize(&m, dir);
            worst = worst.max(rel_error(&mps_to_vector(&c)?, &v)?);
            for (a, b) in all_schmidt_spectra(&c)?.iter().zip(&spectra) {
                worst = worst.max(a.max_abs_diff(b));
            }
        }
    }
    Ok((worst, format!("vector and spectra after canonicalization, n = 2..{}", ctx.nmax)))
}

fn reverse_sites_check(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 1..=ctx.nmax {
        let m = Mps::random(n, 3, &mut ctx.rng)?;
        let v = mps_to_vector(&m)?;
        let r = mps_to_vector(&reverse_sites(&m))?;
        let perm = bit_reversal_permutation(n);
        for (q, &p) in perm.iter().enumerate() {
            worst = worst.max((r[q] - v[p]).norm());
        }
        let twice = mps_to_vector(&reverse_sites(&reverse_sites(&m)))?;
        worst = worst.max(twice.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    Ok((worst, format!("reversal vs bit permutation and involution, n = 1..{}", ctx.nmax)))
}

fn zipup_vs_dense(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax.min(10) {
        let mpo = build_qft_mpo(n, &TruncationPolicy::exact())?;
        let dense = mpo_to_dense(&mpo)?;
        for _ in 0..5 {
            let m = Mps::random(n, 4, &mut ctx.rng)?;
            let out = mps_to_vector(&apply_mpo_zipup(&mpo, &m, &TruncationPolicy::exact())?)?;
            worst = worst.max(rel_error(&out, &dense.apply(&mps_to_vector(&m)?)?)?);
        }
    }
    Ok((worst, format!("zip-up vs dense matvec, n = 2..{}", ctx.nmax.min(10))))
}

fn fft_vs_dense(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 1..=ctx.nmax {
        let v = ctx.random_vector(1 << n);
        worst = worst.max(rel_error(&fft(&v)?, &dft_matrix(n)?.apply(&v)?)?);
    }
    Ok((worst, format!("radix-2 FFT vs dense DFT, n = 1..{}", ctx.nmax)))
}

fn sft_vs_fft(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax {
        let engine = Sft::new(n, SftOptions::default())?;
        let m = Mps::random(n, 4, &mut ctx.rng)?;
        let out = mps_to_vector(&engine.apply(&m)?)?;
        worst = worst.max(rel_error(&out, &fft(&mps_to_vector(&m)?)?)?);
    }
    Ok((worst, format!("SFT (chi 16, cutoff 1e-10) vs FFT, n = 2..{}", ctx.nmax)))
}

fn exact_engine(n: usize) -> Result<Sft> {
    Sft::new(
        n,
        SftOptions {
            mpo_policy: TruncationPolicy::exact(),
            apply_policy: TruncationPolicy::exact(),
            reverse_output: true,
        },
    )
}

fn sft_linearity(ctx: &mut Ctx) -> Result<(f64, String)> {
    let n = ctx.nmax.min(12);
    let engine = exact_engine(n)?;
    let len = 1 << n;
    let a = ctx.random_vector(len);
    let b = ctx.random_vector(len);
    let (alpha, beta) = (C64::new(0.7, -0.2), C64::new(-1.1, 0.4));
    let sum: Vec<C64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
    let run = |v: &[C64]| -> Result<Vec<C64>> {
        mps_to_vector(&engine.apply(&vector_to_mps(v, &TruncationPolicy::exact())?)?)
    };
    let (fa, fb, fs) = (run(&a)?, run(&b)?, run(&sum)?);
    let scale = fs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let worst = fs
        .iter()
        .zip(fa.iter().zip(&fb))
        .map(|(s, (x, y))| (s - (alpha * x + beta * y)).norm() / scale)
        .fold(0.0, f64::max);
    Ok((worst, format!("sft(a x + b y) vs a sft(x) + b sft(y), n = {n}")))
}

fn sft_norm_exact(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax {
        let engine = exact_engine(n)?;
        let m = Mps::random(n, 3, &mut ctx.rng)?;
        worst = worst.max((engine.apply(&m)?.norm() - m.norm()).abs());
    }
    Ok((worst, format!("| |sft(m)| - |m| | at cutoff 0, n = 2..{}", ctx.nmax)))
}

fn sft_parseval(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut worst = 0f64;
    for n in 2..=ctx.nmax {
        let engine = Sft::new(n, SftOptions::default())?;
        let m = Mps::random(n, 4, &mut ctx.rng)?;
        let a: f64 = mps_to_vector(&engine.apply(&m)?)?.iter().map(|z| z.norm_sqr()).sum();
        let b: f64 = fft(&mps_to_vector(&m)?)?.iter().map(|z| z.norm_sqr()).sum();
        worst = worst.max((a - b).abs());
    }
    Ok((worst, format!("sum |sft|^2 vs sum |fft|^2, n = 2..{}", ctx.nmax)))
}

/// Any byte or value difference after a round trip counts as 1.
fn io_round_trip(ctx: &mut Ctx) -> Result<(f64, String)> {
    let mut mismatches = 0usize;
    for n in 1..=ctx.nmax {
        let m = Mps::random(n, 3, &mut ctx.rng)?;
        let back = Mps::read_from(m.to_bytes().as_slice())?;
        mismatches += usize::from(back != m || back.to_bytes() != m.to_bytes());
        let o = build_qft_mpo(n, &TruncationPolicy::new(1e-12, None)?)?;
        let back = Mpo::read_from(o.to_bytes().as_slice())?;
        mismatches += usize::from(back.to_bytes() != o.to_bytes());
    }
    Ok((mismatches as f64, format!("binary MPS/MPO round trips, n = 1..{}", ctx.nmax)))
}
