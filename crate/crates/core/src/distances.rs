//! Hellinger, Kullback–Leibler and `V` discrepancies.
//!
//! For nonnegative integrable `f, g` (not necessarily densities):
//!
//! ```text
//! h²(f, g) = ∫ (√f - √g)²
//! K(f, g)  = ∫ f log(f/g) - ∫ f + ∫ g
//! V(f, g)  = ∫ f log²(f/g)
//! ```
//!
//! Between increment laws the atom at zero contributes a discrete term and
//! the continuous parts are integrated numerically. Dividing by `Δ` gives
//! the scaled versions, whose `Δ → 0` limits are the same discrepancies
//! between the intensity measures `λf` and `λ₀f₀` ([`limit_divergence`]).

use std::fmt;
use std::str::FromStr;

use crate::model::{IncrementLaw, MixtureDensity};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::{Error, Result};

/// Densities below this are treated as zero in the `V` integrand.
const V_DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceKind {
    HellingerSq,
    Kl,
    V,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 3] = [Self::HellingerSq, Self::Kl, Self::V];

    pub fn name(self) -> &'static str {
        match self {
            Self::HellingerSq => "hellinger_sq",
            Self::Kl => "kl",
            Self::V => "v",
        }
    }

    /// Contribution of one point with (unnormalised) masses `f`, `g` given
    /// through their logarithms.
    fn pointwise(self, ln_f: f64, ln_g: f64) -> f64 {
        let f = ln_f.exp();
        let g = ln_g.exp();
        match self {
            Self::HellingerSq => {
                let d = (0.5 * ln_f).exp() - (0.5 * ln_g).exp();
                d * d
            }
            Self::Kl => {
                if f == 0.0 {
                    g
                } else if ln_g == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    f * (ln_f - ln_g) - f + g
                }
            }
            Self::V => {
                if f < V_DENSITY_FLOOR {
                    0.0
                } else {
                    let r = ln_f - ln_g;
                    f * r * r
                }
            }
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hellinger_sq" | "hellinger" | "h2" => Ok(Self::HellingerSq),
            "kl" | "kullback_leibler" => Ok(Self::Kl),
            "v" => Ok(Self::V),
            other => Err(Error::InvalidParameter(format!("unknown divergence kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub value: f64,
    /// Absolute quadrature error estimate (zero for closed-form parts).
    pub quad_error: f64,
}

/// `K(x, y) = x log(x/y) - x + y` for positive scalars.
pub fn scalar_k(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scalar K needs positive arguments, got ({x}, {y})"
        )));
    }
    Ok(x * (x / y).ln() - x + y)
}

fn quad_opts() -> QuadratureOptions {
    QuadratureOptions {
        initial_panels: 64,
        ..Default::default()
    }
}

/// Divergence between two functions given by their logarithms, integrated
/// over `window`.
pub fn log_density_divergence(
    kind: DivergenceKind,
    ln_f: impl Fn(f64) -> f64,
    ln_g: impl Fn(f64) -> f64,
    window: (f64, f64),
) -> Result<Divergence> {
    let r = integrate(|x| kind.pointwise(ln_f(x), ln_g(x)), window.0, window.1, quad_opts())?;
    Ok(Divergence {
        value: r.value.max(0.0),
        quad_error: r.abs_error,
    })
}

/// Divergence between two nonnegative functions over `window`.
pub fn density_divergence(
    kind: DivergenceKind,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    window: (f64, f64),
) -> Result<Divergence> {
    log_density_divergence(kind, |x| f(x).ln(), |x| g(x).ln(), window)
}

fn union(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

/// Divergence between two mixtures over the union of their windows.
pub fn mixture_divergence(
    kind: DivergenceKind,
    f: &MixtureDensity,
    g: &MixtureDensity,
) -> Result<Divergence> {
    log_density_divergence(kind, |x| f.ln_pdf(x), |x| g.ln_pdf(x), union(f.window(), g.window()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementDivergence {
    pub kind: DivergenceKind,
    pub delta: f64,
    /// Divergence between the two increment laws.
    pub raw: f64,
    /// `raw / Δ`.
    pub scaled: f64,
    /// Contribution of the atoms at zero.
    pub atom_term: f64,
    pub quad_error: f64,
}

/// `D(law0, law1)` between increment laws sharing the same `Δ`.
pub fn increment_divergence(
    kind: DivergenceKind,
    law0: &IncrementLaw,
    law1: &IncrementLaw,
) -> Result<IncrementDivergence> {
    let delta = law0.delta();
    if (delta - law1.delta()).abs() > 1e-15 * delta {
        return Err(Error::InvalidParameter(format!(
            "laws have different durations {delta} and {}",
            law1.delta()
        )));
    }
    let atom_term = kind.pointwise(law0.atom().ln(), law1.atom().ln());
    let continuous = log_density_divergence(
        kind,
        |z| law0.continuous_ln_pdf(z),
        |z| law1.continuous_ln_pdf(z),
        union(law0.window(), law1.window()),
    )?;
    let raw = atom_term + continuous.value;
    Ok(IncrementDivergence {
        kind,
        delta,
        raw,
        scaled: raw / delta,
        atom_term,
        quad_error: continuous.quad_error,
    })
}

/// Limit of `D(Q^Δ_{λ,f}, Q^Δ_{λ₀,f₀}) / Δ` as `Δ → 0`, i.e. the divergence
/// between the intensity measures `λf` and `λ₀f₀`.
pub fn limit_divergence(
    kind: DivergenceKind,
    lambda: f64,
    f: &MixtureDensity,
    lambda0: f64,
    f0: &MixtureDensity,
) -> Result<Divergence> {
    // Validates both intensities.
    let k_lambda = scalar_k(lambda, lambda0)?;
    let window = union(f.window(), f0.window());
    match kind {
        DivergenceKind::Kl => {
            let inner = mixture_divergence(DivergenceKind::Kl, f, f0)?;
            Ok(Divergence {
                value: lambda * inner.value + k_lambda,
                quad_error: lambda * inner.quad_error,
            })
        }
        DivergenceKind::HellingerSq | DivergenceKind::V => {
            let (ln_l, ln_l0) = (lambda.ln(), lambda0.ln());
            log_density_divergence(kind, |x| ln_l + f.ln_pdf(x), |x| ln_l0 + f0.ln_pdf(x), window)
        }
    }
}
