//! Spectral responses `h(λ)` on the interval `[0, 2]` and polynomial filters
//! approximating them.
//!
//! The normalized Laplacian of the bilateral graph has its spectrum inside
//! `[0, 2]`, so a filter is fully described by a scalar gain per frequency.
//! One filter pass has the gain `1 − λ`; `k` fixed-weight passes have
//! `(1 − λ)^k`. Richer responses (regularization-derived low-pass, sharp
//! low-pass) are approximated by truncated Chebyshev series under the affine
//! map `λ = 1 + t`, `t ∈ [−1, 1]`, which the engine can then apply with one
//! sparse pass per polynomial degree.

use crate::error::{Error, Result};

/// Upper end of the spectral interval of the normalized Laplacian.
pub const LAMBDA_MAX: f64 = 2.0;

/// Grid resolution used to validate penalty monotonicity and kernel shape.
const VALIDATION_GRID: usize = 1001;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=LAMBDA_MAX).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// Piecewise-linear interpolation over `(λ, value)` samples sorted by λ,
/// clamped to the end samples outside the covered range.
fn interp_clamped(samples: &[(f64, f64)], lambda: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if lambda <= first.0 {
        return first.1;
    }
    if lambda >= last.0 {
        return last.1;
    }
    let hi = samples.partition_point(|&(l, _)| l <= lambda);
    let (l0, v0) = samples[hi - 1];
    let (l1, v1) = samples[hi];
    let t = (lambda - l0) / (l1 - l0);
    v0 + t * (v1 - v0)
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(
            "tabulated kernel needs at least 2 samples".into(),
        ));
    }
    for pair in samples.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::InvalidParameter(
                "tabulated kernel abscissae must be strictly increasing".into(),
            ));
        }
    }
    for &(l, v) in samples {
        if !(0.0..=LAMBDA_MAX).contains(&l) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tabulated sample ({l}, {v}) invalid"
            )));
        }
    }
    Ok(())
}

/// Penalty profile `h_p(λ)` used by the regularization-derived kernel.
/// Must be nonnegative and non-decreasing on `[0, 2]` so that high
/// frequencies are penalized at least as strongly as low ones.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyKernel {
    /// `h_p(λ) = λ^p` with `p ≥ 0`.
    Power(f64),
    /// Piecewise-linear samples, clamped outside their range.
    Table(Vec<(f64, f64)>),
}

impl PenaltyKernel {
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            PenaltyKernel::Power(p) => lambda.powf(*p),
            PenaltyKernel::Table(samples) => interp_clamped(samples, lambda),
        }
    }
}

/// A scalar spectral response, evaluable anywhere on `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralKernel {
    /// `h(λ) = 1 − λ`: the response of a single bilateral filter pass.
    BfLinear,
    /// `h(λ) = (1 − λ)^k`: `k` fixed-weight passes.
    IteratedBf(u32),
    /// `h(λ) = 1 / (1 + ρ·h_p(λ)²)`: the minimizer of a quadratic
    /// fit-plus-smoothness objective with penalty profile `h_p`.
    Regularized { penalty: PenaltyKernel, rho: f64 },
    /// `h(λ) = 1 / (1 + exp(steepness·(λ − cutoff)))`: a logistic low-pass
    /// step with a sharp transition band.
    SharpLowpass { cutoff: f64, steepness: f64 },
    /// Piecewise-linear samples.
    Tabulated(Vec<(f64, f64)>),
}

impl SpectralKernel {
    pub fn bf() -> Self {
        SpectralKernel::BfLinear
    }

    pub fn iterated_bf(k: u32) -> Self {
        SpectralKernel::IteratedBf(k)
    }

    /// The default denoising low-pass `h(λ) = 1 / (1 + λ²)`, i.e. the
    /// regularized kernel with `h_p(λ) = λ` and `ρ = 1`.
    pub fn denoise() -> Self {
        SpectralKernel::Regularized {
            penalty: PenaltyKernel::Power(1.0),
            rho: 1.0,
        }
    }

    /// Builds the regularization-derived kernel `1 / (1 + ρ·h_p²)`.
    ///
    /// Rejects `ρ ≤ 0` and penalties that are negative or decreasing
    /// anywhere on a 1001-point grid.
    pub fn regularized(penalty: PenaltyKernel, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rho must be finite and > 0, got {rho}"
            )));
        }
        if let PenaltyKernel::Power(p) = penalty {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "penalty exponent must be finite and >= 0, got {p}"
                )));
            }
        }
        if let PenaltyKernel::Table(samples) = &penalty {
            validate_samples(samples)?;
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..VALIDATION_GRID {
            let lambda = LAMBDA_MAX * i as f64 / (VALIDATION_GRID - 1) as f64;
            let v = penalty.eval(lambda);
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "penalty is negative at lambda = {lambda}"
                )));
            }
            if v < prev - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "penalty is decreasing at lambda = {lambda}"
                )));
            }
            prev = v;
        }
        Ok(SpectralKernel::Regularized { penalty, rho })
    }

    /// Logistic low-pass step with midpoint `cutoff` and slope `steepness`.
    pub fn sharp_lowpass(cutoff: f64, steepness: f64) -> Result<Self> {
        if !cutoff.is_finite() || cutoff <= 0.0 || cutoff >= LAMBDA_MAX {
            return Err(Error::InvalidParameter(format!(
                "cutoff must lie in (0, 2), got {cutoff}"
            )));
        }
        if !steepness.is_finite() || steepness <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "steepness must be finite and > 0, got {steepness}"
            )));
        }
        Ok(SpectralKernel::SharpLowpass { cutoff, steepness })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        validate_samples(&samples)?;
        Ok(SpectralKernel::Tabulated(samples))
    }

    /// Evaluates `h(λ)`. Fails when `λ` lies outside `[0, 2]`.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    /// Evaluation with `λ` clamped into `[0, 2]` first. Internal paths use
    /// this where the argument comes from node formulas or eigenvalues that
    /// may overshoot the interval by rounding.
    pub(crate) fn eval_clamped(&self, lambda: f64) -> f64 {
        self.eval_unchecked(lambda.clamp(0.0, LAMBDA_MAX))
    }

    fn eval_unchecked(&self, lambda: f64) -> f64 {
        match self {
            SpectralKernel::BfLinear => 1.0 - lambda,
            SpectralKernel::IteratedBf(k) => (1.0 - lambda).powi(*k as i32),
            SpectralKernel::Regularized { penalty, rho } => {
                let p = penalty.eval(lambda);
                1.0 / (1.0 + rho * p * p)
            }
            SpectralKernel::SharpLowpass { cutoff, steepness } => {
                1.0 / (1.0 + (steepness * (lambda - cutoff)).exp())
            }
            SpectralKernel::Tabulated(samples) => interp_clamped(samples, lambda),
        }
    }

    /// Parses the key–value kernel spec format:
    ///
    /// ```text
    /// # one key = value per line
    /// kind = regularized        # bf | iterated-bf | regularized |
    ///                           # sharp-lowpass | tabulated | denoise
    /// h_p = lambda^2            # penalty: lambda or lambda^<p>
    /// rho = 1.0
    /// k = 20                    # iterated-bf only
    /// cutoff = 0.2              # sharp-lowpass only
    /// steepness = 50            # sharp-lowpass only
    /// table = 0:1 1:0.5 2:0     # tabulated only, lambda:value pairs
    /// ```
    pub fn parse_spec(text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::KernelSpec(format!("line {}: expected key = value", lineno + 1))
            })?;
            fields.insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
        }
        let kind = fields
            .remove("kind")
            .ok_or_else(|| Error::KernelSpec("missing required field: kind".into()))?;

        let parse_f64 = |name: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::KernelSpec(format!("{name}: invalid number {v:?}")))
        };
        let kernel = match kind.as_str() {
            "bf" => SpectralKernel::bf(),
            "iterated-bf" => {
                let k = fields
                    .remove("k")
                    .ok_or_else(|| Error::KernelSpec("iterated-bf requires k".into()))?;
                let k: u32 = k
                    .parse()
                    .map_err(|_| Error::KernelSpec(format!("k: invalid integer {k:?}")))?;
                SpectralKernel::iterated_bf(k)
            }
            "denoise" => SpectralKernel::denoise(),
            "regularized" => {
                let hp = fields
                    .remove("h_p")
                    .ok_or_else(|| Error::KernelSpec("regularized requires h_p".into()))?;
                let rho = fields
                    .remove("rho")
                    .ok_or_else(|| Error::KernelSpec("regularized requires rho".into()))?;
                let penalty = parse_penalty(&hp)?;
                SpectralKernel::regularized(penalty, parse_f64("rho", &rho)?)?
            }
            "sharp-lowpass" => {
                let cutoff = match fields.remove("cutoff") {
                    Some(v) => parse_f64("cutoff", &v)?,
                    None => 0.2,
                };
                let steepness = match fields.remove("steepness") {
                    Some(v) => parse_f64("steepness", &v)?,
                    None => 50.0,
                };
                SpectralKernel::sharp_lowpass(cutoff, steepness)?
            }
            "tabulated" => {
                let table = fields
                    .remove("table")
                    .ok_or_else(|| Error::KernelSpec("tabulated requires table".into()))?;
                let mut samples = Vec::new();
                for pair in table.split_whitespace() {
                    let (l, v) = pair.split_once(':').ok_or_else(|| {
                        Error::KernelSpec(format!("table entry {pair:?} not lambda:value"))
                    })?;
                    samples.push((parse_f64("table lambda", l)?, parse_f64("table value", v)?));
                }
                SpectralKernel::tabulated(samples)?
            }
            other => {
                return Err(Error::KernelSpec(format!("unknown kind {other:?}")));
            }
        };
        if let Some(key) = fields.into_keys().next() {
            return Err(Error::KernelSpec(format!(
                "unexpected field {key:?} for kind {kind:?}"
            )));
        }
        Ok(kernel)
    }
}

fn parse_penalty(text: &str) -> Result<PenaltyKernel> {
    let text = text.trim();
    if text == "lambda" {
        return Ok(PenaltyKernel::Power(1.0));
    }
    if let Some(exp) = text.strip_prefix("lambda^") {
        let p: f64 = exp
            .parse()
            .map_err(|_| Error::KernelSpec(format!("h_p exponent invalid: {exp:?}")))?;
        return Ok(PenaltyKernel::Power(p));
    }
    Err(Error::KernelSpec(format!(
        "h_p must be lambda or lambda^<p>, got {text:?}"
    )))
}

/// One factor of a root-form polynomial `r_0 · ∏ (1 − r_i λ)`. Complex
/// roots always appear as conjugate pairs so the product stays real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootFactor {
    /// `(1 − r λ)`
    Real(f64),
    /// `(1 − (a+bi) λ)(1 − (a−bi) λ) = 1 − 2aλ + (a² + b²)λ²`
    ConjugatePair { re: f64, im: f64 },
}

impl RootFactor {
    pub fn degree(&self) -> usize {
        match self {
            RootFactor::Real(_) => 1,
            RootFactor::ConjugatePair { .. } => 2,
        }
    }

    fn eval(&self, lambda: f64) -> f64 {
        match *self {
            RootFactor::Real(r) => 1.0 - r * lambda,
            RootFactor::ConjugatePair { re, im } => {
                1.0 - 2.0 * re * lambda + (re * re + im * im) * lambda * lambda
            }
        }
    }
}

/// A real polynomial filter on `[0, 2]`, in one of two representations:
/// a scaled product over roots, or a Chebyshev coefficient vector
/// `c_0..c_k` for the basis `T_j(λ − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyFilter {
    Roots {
        scale: f64,
        factors: Vec<RootFactor>,
    },
    Chebyshev {
        coeffs: Vec<f64>,
    },
}

impl PolyFilter {
    pub fn from_roots(scale: f64, factors: Vec<RootFactor>) -> Self {
        PolyFilter::Roots { scale, factors }
    }

    /// Wraps a Chebyshev coefficient vector. Needs at least `c_0` and all
    /// entries finite.
    pub fn from_chebyshev(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "chebyshev filter needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "chebyshev coefficients must be finite".into(),
            ));
        }
        Ok(PolyFilter::Chebyshev { coeffs })
    }

    pub fn degree(&self) -> usize {
        match self {
            PolyFilter::Roots { factors, .. } => factors.iter().map(RootFactor::degree).sum(),
            PolyFilter::Chebyshev { coeffs } => coeffs.len() - 1,
        }
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        match self {
            PolyFilter::Chebyshev { coeffs } => Some(coeffs),
            PolyFilter::Roots { .. } => None,
        }
    }

    /// Evaluates the polynomial. Fails when `λ` lies outside `[0, 2]`.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_clamped(&self, lambda: f64) -> f64 {
        self.eval_unchecked(lambda.clamp(0.0, LAMBDA_MAX))
    }

    fn eval_unchecked(&self, lambda: f64) -> f64 {
        match self {
            PolyFilter::Roots { scale, factors } => {
                factors.iter().fold(*scale, |acc, f| acc * f.eval(lambda))
            }
            PolyFilter::Chebyshev { coeffs } => {
                // Clenshaw recurrence on t = λ − 1.
                let t = lambda - 1.0;
                let mut b1 = 0.0;
                let mut b2 = 0.0;
                for &c in coeffs[1..].iter().rev() {
                    let next = 2.0 * t * b1 - b2 + c;
                    b2 = b1;
                    b1 = next;
                }
                t * b1 - b2 + coeffs[0]
            }
        }
    }

    /// Converts a root-form filter to the equivalent Chebyshev coefficient
    /// form (exact up to rounding, since the projection is taken at enough
    /// quadrature nodes for the polynomial degree). A Chebyshev-form filter
    /// is returned as-is.
    pub fn to_chebyshev(&self) -> PolyFilter {
        match self {
            PolyFilter::Chebyshev { .. } => self.clone(),
            PolyFilter::Roots { .. } => PolyFilter::Chebyshev {
                coeffs: project_chebyshev(|l| self.eval_unchecked(l), self.degree()),
            },
        }
    }
}

/// Chebyshev coefficients `c_0..c_k` of `f(1 + t)` by cosine-node
/// quadrature with `max(64, 4k)` nodes.
fn project_chebyshev(f: impl Fn(f64) -> f64, degree: usize) -> Vec<f64> {
    let n = (4 * degree).max(64);
    let values: Vec<f64> = (0..n)
        .map(|m| {
            let theta = (m as f64 + 0.5) * std::f64::consts::PI / n as f64;
            f(1.0 + theta.cos())
        })
        .collect();
    (0..=degree)
        .map(|j| {
            let mut acc = 0.0;
            for (m, v) in values.iter().enumerate() {
                let theta = (m as f64 + 0.5) * std::f64::consts::PI / n as f64;
                acc += v * (j as f64 * theta).cos();
            }
            let scale = if j == 0 { 1.0 } else { 2.0 };
            scale * acc / n as f64
        })
        .collect()
}

/// Truncated Chebyshev approximation of a kernel at the given degree.
pub fn fit_chebyshev(kernel: &SpectralKernel, degree: usize) -> PolyFilter {
    PolyFilter::Chebyshev {
        coeffs: project_chebyshev(|l| kernel.eval_clamped(l), degree),
    }
}

/// Worst-case kernel-vs-polynomial gap over a uniform grid on `[0, 2]`.
/// This sup norm bounds the operator error of the approximate filter in
/// the normalized signal domain.
pub fn poly_sup_error(
    kernel: &SpectralKernel,
    filter: &PolyFilter,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter(
            "sup-error grid needs at least 2 points".into(),
        ));
    }
    let mut sup = 0.0f64;
    for i in 0..grid_points {
        let lambda = LAMBDA_MAX * i as f64 / (grid_points - 1) as f64;
        let gap = (kernel.eval_clamped(lambda) - filter.eval_clamped(lambda)).abs();
        sup = sup.max(gap);
    }
    Ok(sup)
}
