//! Test-function encoders.
//!
//! A function `f` on `[0, 1)` is sampled at `x = 0.q_1 q_2 ... q_n`, i.e.
//! `x = q / 2^n` for the basis index `q`. Every encoder returns a unit-norm
//! state.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tn::{compress, vector_to_mps, Mps, TruncationPolicy, MAX_DECODE_QUBITS};

/// Largest register for which encoders are defined (delta positions are `u64`).
pub const MAX_FUNCTION_QUBITS: usize = 64;

/// Largest register for sampling-based encoders.
pub const MAX_SAMPLED_QUBITS: usize = 20;

/// Named functions that are only available through sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampledId {
    /// `1 / (1 + ((x - 1/2) / 0.05)^2)`.
    Lorentzian,
    /// `x`.
    Ramp,
}

impl SampledId {
    pub const ALL: [SampledId; 2] = [SampledId::Lorentzian, SampledId::Ramp];

    pub fn name(self) -> &'static str {
        match self {
            SampledId::Lorentzian => "lorentzian",
            SampledId::Ramp => "ramp",
        }
    }

    fn eval(self, x: f64) -> C64 {
        let v = match self {
            SampledId::Lorentzian => {
                let u = (x - 0.5) / 0.05;
                1.0 / (1.0 + u * u)
            }
            SampledId::Ramp => x,
        };
        C64::new(v, 0.0)
    }
}

impl FromStr for SampledId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SampledId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SampledId::ALL.iter().map(|id| id.name()).collect();
                Error::Parse(format!("unknown sampled function `{s}` (known: {})", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionKind {
    /// `exp(2 pi i k x)` for any real `k`.
    PlaneWave { k: f64 },
    /// Unit vector at index `p`.
    Delta { p: u64 },
    Constant,
    /// `exp(-(x - mu)^2 / (2 s^2))`, `mu` in `[0, 1)`, `s > 0`.
    Gaussian { mu: f64, s: f64 },
    /// Indicator of `x >= e`, `e` in `[0, 1)`.
    Step { e: f64 },
    Sampled { id: SampledId },
}

impl FunctionKind {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match *self {
            FunctionKind::PlaneWave { k } if !k.is_finite() => bad(format!("plane-wave k must be finite, got {k}")),
            FunctionKind::Gaussian { mu, .. } if !(0.0..1.0).contains(&mu) => {
                bad(format!("gaussian mu must lie in [0, 1), got {mu}"))
            }
            FunctionKind::Gaussian { s, .. } if !(s > 0.0 && s.is_finite()) => {
                bad(format!("gaussian s must be positive and finite, got {s}"))
            }
            FunctionKind::Step { e } if !(0.0..1.0).contains(&e) => bad(format!("step e must lie in [0, 1), got {e}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionKind::PlaneWave { k } => write!(f, "plane-wave:k={k}"),
            FunctionKind::Delta { p } => write!(f, "delta:p={p}"),
            FunctionKind::Constant => write!(f, "constant"),
            FunctionKind::Gaussian { mu, s } => write!(f, "gaussian:mu={mu},s={s}"),
            FunctionKind::Step { e } => write!(f, "step:e={e}"),
            FunctionKind::Sampled { id } => write!(f, "sampled:id={}", id.name()),
        }
    }
}

/// Parses `name[:key=value,...]`, e.g. `plane-wave:k=3.5`,
/// `gaussian:mu=0.5,s=0.1`, `delta:p=7`, `step:e=0.3`, `constant`,
/// `sampled:id=lorentzian`.
impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.split_once(':') {
            Some((name, args)) => (name.trim(), args.trim()),
            None => (text, ""),
        };
        let mut params: Vec<(&str, &str)> = Vec::new();
        if !args.is_empty() {
            for pair in args.split(',') {
                let (key, value) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value in `{pair}`")))?;
                let key = key.trim();
                if params.iter().any(|(k, _)| *k == key) {
                    return Err(Error::Parse(format!("parameter `{key}` given twice in `{text}`")));
                }
                params.push((key, value.trim()));
            }
        }
        let allowed: &[&str] = match name {
            "plane-wave" => &["k"],
            "delta" => &["p"],
            "constant" => &[],
            "gaussian" => &["mu", "s"],
            "step" => &["e"],
            "sampled" => &["id"],
            _ => {
                return Err(Error::Parse(format!(
                    "unknown function `{name}` (expected plane-wave, delta, constant, gaussian, step or sampled)"
                )))
            }
        };
        if let Some((key, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse(format!("`{name}` takes no parameter `{key}`")));
        }
        let get = |key: &str| {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("`{name}` needs parameter `{key}`")))
        };
        let real = |key: &str| -> Result<f64> {
            let v = get(key)?;
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{key}={v}` is not a number")))
        };
        let kind = match name {
            "plane-wave" => FunctionKind::PlaneWave { k: real("k")? },
            "delta" => {
                let v = get("p")?;
                let p = v
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("`p={v}` is not a non-negative integer")))?;
                FunctionKind::Delta { p }
            }
            "constant" => FunctionKind::Constant,
            "gaussian" => FunctionKind::Gaussian {
                mu: real("mu")?,
                s: real("s")?,
            },
            "step" => FunctionKind::Step { e: real("e")? },
            _ => FunctionKind::Sampled { id: get("id")?.parse()? },
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// A function kind together with a register size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionSpec {
    kind: FunctionKind,
    n: usize,
}

impl FunctionSpec {
    pub fn new(kind: FunctionKind, n: usize) -> Result<Self> {
        kind.validate()?;
        if n == 0 {
            return Err(Error::TooSmall {
                what: "function register",
                got: n,
                min: 1,
            });
        }
        if n > MAX_FUNCTION_QUBITS {
            return Err(Error::TooLarge {
                what: "function register",
                got: n,
                max: MAX_FUNCTION_QUBITS,
            });
        }
        if let FunctionKind::Delta { p } = kind {
            if n < 64 && p >> n != 0 {
                return Err(Error::Domain(format!("delta position {p} outside 0..2^{n}")));
            }
        }
        if let FunctionKind::Step { e } = kind {
            if step_threshold(e, n) >> n != 0 {
                return Err(Error::Domain(format!("step edge {e} leaves no grid point at n = {n}")));
            }
        }
        Ok(FunctionSpec { kind, n })
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether [`encode`] samples the function (and is therefore capped at
    /// [`MAX_SAMPLED_QUBITS`]).
    pub fn is_sampled(&self) -> bool {
        matches!(self.kind, FunctionKind::Gaussian { .. } | FunctionKind::Sampled { .. })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={})", self.kind, self.n)
    }
}

/// Smallest grid index `q` with `q / 2^n >= e`.
fn step_threshold(e: f64, n: usize) -> u128 {
    // Scaling by a power of two is exact, so the ceiling is the true threshold.
    (e * 2f64.powi(n as i32)).ceil() as u128
}

fn eval(kind: FunctionKind, x: f64) -> C64 {
    match kind {
        FunctionKind::PlaneWave { k } => {
            let (s, c) = (TAU * (k * x).rem_euclid(1.0)).sin_cos();
            C64::new(c, s)
        }
        FunctionKind::Constant => C64::new(1.0, 0.0),
        FunctionKind::Gaussian { mu, s } => {
            let u = (x - mu) / s;
            C64::new((-0.5 * u * u).exp(), 0.0)
        }
        FunctionKind::Step { e } => C64::new(if x >= e { 1.0 } else { 0.0 }, 0.0),
        FunctionKind::Sampled { id } => id.eval(x),
        FunctionKind::Delta { .. } => unreachable!("delta is evaluated on indices"),
    }
}

/// Direct pointwise evaluation on the grid, unit-normalized.
pub fn reference_vector(spec: &FunctionSpec) -> Result<Vec<C64>> {
    let n = spec.n;
    if n > MAX_DECODE_QUBITS {
        return Err(Error::TooLarge {
            what: "reference vector",
            got: n,
            max: MAX_DECODE_QUBITS,
        });
    }
    let len = 1usize << n;
    let mut v = match spec.kind {
        FunctionKind::Delta { p } => {
            let mut v = vec![C64::new(0.0, 0.0); len];
            v[p as usize] = C64::new(1.0, 0.0);
            v
        }
        kind => {
            let scale = 1.0 / len as f64;
            (0..len).map(|q| eval(kind, q as f64 * scale)).collect()
        }
    };
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain(format!("{spec} vanishes on the grid")));
    }
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(v)
}

/// Encodes `spec` as a unit-norm MPS.
///
/// Plane waves, deltas and constants are exact product states and step
/// functions an exact bond-2 comparator chain, at any supported `n`. Gaussians
/// and named sampled functions go through [`vector_to_mps`] with `policy` and
/// are limited to [`MAX_SAMPLED_QUBITS`].
pub fn encode(spec: &FunctionSpec, policy: &TruncationPolicy) -> Result<Mps> {
    let n = spec.n;
    match spec.kind {
        FunctionKind::PlaneWave { k } => {
            // x = sum_i q_i 2^-i, so qubit i contributes exp(2 pi i k q_i 2^-i).
            let factors: Vec<[C64; 2]> = (1..=n)
                .map(|i| {
                    let frac = (k * 2f64.powi(-(i as i32))).rem_euclid(1.0);
                    let (s, c) = (TAU * frac).sin_cos();
                    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(c, s) * FRAC_1_SQRT_2]
                })
                .collect();
            Mps::product(&factors)
        }
        FunctionKind::Delta { p } => {
            let factors: Vec<[C64; 2]> = (0..n)
                .map(|i| {
                    let bit = (p >> (n - 1 - i)) & 1;
                    let one = C64::new(1.0, 0.0);
                    let zero = C64::new(0.0, 0.0);
                    if bit == 1 {
                        [zero, one]
                    } else {
                        [one, zero]
                    }
                })
                .collect();
            Mps::product(&factors)
        }
        FunctionKind::Constant => {
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            Mps::product(&vec![[h, h]; n])
        }
        FunctionKind::Step { e } => {
            let mps = step_mps(step_threshold(e, n), n)?;
            Ok(compress(&mps, policy)?.0)
        }
        FunctionKind::Gaussian { .. } | FunctionKind::Sampled { .. } => {
            if n > MAX_SAMPLED_QUBITS {
                return Err(Error::Unsupported(format!(
                    "{spec} has no analytic encoder and sampling is limited to n <= {MAX_SAMPLED_QUBITS}"
                )));
            }
            vector_to_mps(&reference_vector(spec)?, policy)
        }
    }
}

/// Indicator of `q >= t` as a bond-2 automaton reading bits from the most
/// significant end. Bond state 0 means "prefix equals t so far", 1 means
/// "prefix already exceeds t".
fn step_mps(t: u128, n: usize) -> Result<Mps> {
    let count = (1u128 << n) - t;
    let amp = 1.0 / (count as f64).sqrt();
    let one = C64::new(1.0, 0.0);
    let mut tensors = Vec::with_capacity(n);
    for i in 0..n {
        let bit = ((t >> (n - 1 - i)) & 1) as usize;
        let mut core = Array3::<C64>::zeros((2, 2, 2));
        // equal -> equal on matching bit, equal -> greater on 1 over 0
        core[[0, bit, 0]] = one;
        if bit == 0 {
            core[[0, 1, 1]] = one;
        }
        core[[1, 0, 1]] = one;
        core[[1, 1, 1]] = one;
        let l = if i == 0 { 1 } else { 2 };
        let r = if i == n - 1 { 1 } else { 2 };
        let mut site = Array3::<C64>::zeros((l, 2, r));
        for a in 0..l {
            for q in 0..2 {
                for b in 0..2 {
                    let v = core[[a, q, b]];
                    if i == n - 1 {
                        site[[a, q, 0]] += v;
                    } else {
                        site[[a, q, b]] = v;
                    }
                }
            }
        }
        if i == 0 {
            site.mapv_inplace(|z| z * amp);
        }
        tensors.push(site);
    }
    Mps::from_tensors(tensors)
}
