//! Lévy measures of Meixner type and their tilted probability measures
//! `ν̃(ds) = s² ν(ds)`.
//!
//! Three regimes share one type:
//! * `λ ∈ [0, 2)`: Meixner law, continuous density on ℝ, infinite ν mass;
//! * `λ = 2`: gamma law `s e^{-s}` on (0, ∞), infinite ν mass;
//! * `λ > 2`: Pascal law, atoms at `√(λ²-4)·k`, finite ν mass.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::jumps::JumpSampler;
use crate::quad;

/// Small-jump cutoff used when a model has infinite Lévy mass.
pub const DEFAULT_EPS: f64 = 1e-4;
/// Moments cached at construction: enough for a recurrence of order 16.
pub const DEFAULT_MAX_MOMENT_ORDER: usize = 40;
/// Pascal atoms are enumerated until their ν̃ mass drops below this.
const ATOM_MASS_CUTOFF: f64 = 1e-40;
const MAX_ATOMS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerDescriptor {
    /// Algebra only; simulation is rejected.
    MomentsOnly,
    /// Finite list of ν̃ atoms `(location, mass)`; ν has finite mass iff no
    /// atom sits at zero.
    Atoms(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Meixner { lambda: f64 },
    CustomTilted {
        moments: Vec<Rational>,
        sampler: SamplerDescriptor,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// `s e^{-s}` on (0, ∞).
    Gamma,
    /// Meixner density for `λ ∈ [0, 2)`.
    Meixner { lambda: f64 },
}

impl Density {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Density::Gamma => {
                if s > 0.0 {
                    s * (-s).exp()
                } else {
                    0.0
                }
            }
            Density::Meixner { lambda } => meixner_density(lambda, s),
        }
    }

    /// Exponential decay rates `(left, right)` of the tails, per unit s.
    pub fn tail_rates(&self) -> (f64, f64) {
        match *self {
            Density::Gamma => (f64::INFINITY, 1.0),
            Density::Meixner { lambda } => {
                let theta = (4.0 - lambda * lambda).sqrt();
                let a = (lambda / theta).atan();
                ((PI + 2.0 * a) / theta, (PI - 2.0 * a) / theta)
            }
        }
    }

    /// Natural length scale near the origin.
    pub fn scale(&self) -> f64 {
        match *self {
            Density::Gamma => 1.0,
            Density::Meixner { lambda } => (4.0 - lambda * lambda).sqrt().min(1.0),
        }
    }

    /// True when the density has mass on the negative half-line.
    pub fn two_sided(&self) -> bool {
        matches!(self, Density::Meixner { .. })
    }
}

/// Meixner density `(θ/2π)·|Γ(1+iy)|²·exp(2y·arctan(λ/θ))` with `y = s/θ`,
/// `θ = √(4-λ²)`, and `|Γ(1+iy)|² = πy/sinh(πy)`.
///
/// The sign of the exponent is the one that gives `∫ s ν̃(ds) = λ`, as the
/// recurrence requires.
pub fn meixner_density(lambda: f64, s: f64) -> f64 {
    let theta = (4.0 - lambda * lambda).sqrt();
    let y = s / theta;
    let a = (lambda / theta).atan();
    let ay = y.abs();
    // πy/sinh(πy) = 2π|y| e^{-π|y|} / (1 - e^{-2π|y|}); folded into one exp
    let ratio = if ay < 1e-8 {
        1.0 - (PI * y).powi(2) / 6.0
    } else {
        2.0 * PI * ay / (-(-2.0 * PI * ay).exp_m1())
    };
    let expo = if ay < 1e-8 { 2.0 * a * y } else { -PI * ay + 2.0 * a * y };
    theta / (2.0 * PI) * ratio * expo.exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TiltedRepr {
    ContinuousDensity { density: Density, support: (f64, f64) },
    AtomList(Vec<(f64, f64)>),
    MomentsOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltedMeasure {
    pub repr: TiltedRepr,
    pub moment_cache: Vec<f64>,
}

/// Bias of dropping jumps with `|s| ≤ ε`, per unit σ-mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasBound {
    /// `∫_{|s|≤ε} |s| ν(ds)`; infinite for λ < 2.
    pub l1: f64,
    /// `ν̃([-ε, ε])`, the L² error of the dropped compensated sum per unit σ.
    pub l2_sq: f64,
}

#[derive(Debug, Clone)]
pub struct LevyModel {
    pub kind: ModelKind,
    pub c_const: f64,
    pub truncation_eps: f64,
    pub tilted: TiltedMeasure,
    pub max_moment_order: usize,
    sampler: Option<JumpSampler>,
}

pub fn pascal_p(lambda: f64) -> f64 {
    let r = (lambda * lambda - 4.0).sqrt();
    (lambda - r) / (lambda + r)
}

pub fn meixner_c(lambda: f64) -> f64 {
    if lambda < 2.0 {
        0.0
    } else {
        2.0 / (lambda + (lambda * lambda - 4.0).sqrt())
    }
}

fn pascal_atoms(lambda: f64) -> Result<Vec<(f64, f64)>> {
    let r = (lambda * lambda - 4.0).sqrt();
    let p = pascal_p(lambda);
    let mut atoms = Vec::new();
    let mut pk = 1.0;
    for k in 1.. {
        pk *= p;
        let mass = (lambda * lambda - 4.0) * pk * k as f64;
        if mass < ATOM_MASS_CUTOFF && k > 2 {
            break;
        }
        if k > MAX_ATOMS {
            return Err(Error::Resource(format!(
                "Pascal atom list for λ={lambda} needs more than {MAX_ATOMS} atoms"
            )));
        }
        atoms.push((r * k as f64, mass));
    }
    Ok(atoms)
}

/// `λ = 2` and `λ > 2` use the closed forms; everything else is numeric.
pub fn meixner_model(lambda: f64) -> Result<LevyModel> {
    meixner_model_with(lambda, DEFAULT_EPS, DEFAULT_MAX_MOMENT_ORDER)
}

pub fn meixner_model_with(lambda: f64, eps: f64, max_moment_order: usize) -> Result<LevyModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be a nonnegative real, got {lambda}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("truncation eps must be nonnegative, got {eps}")));
    }
    let repr = if lambda > 2.0 {
        TiltedRepr::AtomList(pascal_atoms(lambda)?)
    } else if lambda == 2.0 {
        TiltedRepr::ContinuousDensity {
            density: Density::Gamma,
            support: (0.0, f64::INFINITY),
        }
    } else {
        TiltedRepr::ContinuousDensity {
            density: Density::Meixner { lambda },
            support: (f64::NEG_INFINITY, f64::INFINITY),
        }
    };
    // Pascal has finite mass; truncation is a no-op below the first atom.
    let eps = if lambda > 2.0 {
        let first = (lambda * lambda - 4.0).sqrt();
        if eps >= first {
            return Err(Error::Domain(format!(
                "eps={eps} would drop Pascal atoms (smallest at {first})"
            )));
        }
        0.0
    } else {
        if eps <= 0.0 {
            return Err(Error::Domain("λ ≤ 2 has infinite Lévy mass; eps must be > 0".into()));
        }
        eps
    };
    let mut model = LevyModel {
        kind: ModelKind::Meixner { lambda },
        c_const: meixner_c(lambda),
        truncation_eps: eps,
        tilted: TiltedMeasure {
            repr,
            moment_cache: Vec::new(),
        },
        max_moment_order,
        sampler: None,
    };
    let cache = (0..=max_moment_order)
        .map(|k| model.compute_moment(k))
        .collect::<Result<Vec<_>>>()?;
    model.tilted.moment_cache = cache;
    model.sampler = Some(JumpSampler::build(&model)?);
    Ok(model)
}

/// A model known only through its tilted moments, optionally with a finite
/// atom list usable for sampling. Finitely supported ν̃ is accepted for
/// algebra, but orthogonalization then terminates early.
pub fn custom_model(moments: Vec<Rational>, sampler: SamplerDescriptor) -> Result<LevyModel> {
    if moments.is_empty() {
        return Err(Error::Domain("custom model needs at least moment(0)".into()));
    }
    if !moments[0].is_positive() {
        return Err(Error::Domain("moment(0) must be positive".into()));
    }
    let repr = match &sampler {
        SamplerDescriptor::MomentsOnly => TiltedRepr::MomentsOnly,
        SamplerDescriptor::Atoms(atoms) => {
            if atoms.windows(2).any(|w| w[1].0 <= w[0].0) || atoms.iter().any(|a| !(a.1 > 0.0) || a.0 == 0.0) {
                return Err(Error::Domain(
                    "atom locations must be strictly increasing and nonzero with positive masses".into(),
                ));
            }
            TiltedRepr::AtomList(atoms.clone())
        }
    };
    let cache: Vec<f64> = moments.iter().map(exact::to_f64).collect();
    let mut model = LevyModel {
        kind: ModelKind::CustomTilted { moments, sampler },
        c_const: 0.0,
        truncation_eps: 0.0,
        max_moment_order: cache.len() - 1,
        tilted: TiltedMeasure {
            repr,
            moment_cache: cache,
        },
        sampler: None,
    };
    if matches!(model.tilted.repr, TiltedRepr::AtomList(_)) {
        model.sampler = Some(JumpSampler::build(&model)?);
    }
    Ok(model)
}

impl LevyModel {
    pub fn lambda(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Meixner { lambda } => Some(lambda),
            ModelKind::CustomTilted { .. } => None,
        }
    }

    pub fn sampler(&self) -> Result<&JumpSampler> {
        self.sampler
            .as_ref()
            .ok_or_else(|| Error::Unsupported("moments-only model has no sampler".into()))
    }

    /// True when ν̃ is supported on finitely many points, so orthogonal
    /// polynomials exist only up to the number of atoms.
    pub fn finitely_supported(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::CustomTilted {
                sampler: SamplerDescriptor::Atoms(_),
                ..
            }
        )
    }

    /// True when λ<2 style centering applies: the realization is compensated
    /// with the truncated first moment and `c_const` is 0.
    pub fn centered(&self) -> bool {
        match self.kind {
            ModelKind::Meixner { lambda } => lambda < 2.0,
            ModelKind::CustomTilted { .. } => false,
        }
    }

    pub fn tilted_moment(&self, k: usize) -> Result<f64> {
        match self.tilted.moment_cache.get(k) {
            Some(&m) => Ok(m),
            None => self.compute_moment(k),
        }
    }

    fn compute_moment(&self, k: usize) -> Result<f64> {
        match &self.tilted.repr {
            TiltedRepr::AtomList(atoms) => {
                if let ModelKind::Meixner { lambda } = self.kind {
                    Ok(pascal_moment_f64(lambda, k))
                } else {
                    Ok(atoms.iter().map(|&(s, m)| m * s.powi(k as i32)).sum())
                }
            }
            TiltedRepr::ContinuousDensity { density: Density::Gamma, .. } => {
                Ok(exact::to_f64(&exact::factorial_rat(k + 1)))
            }
            TiltedRepr::ContinuousDensity { density, .. } => {
                let d = *density;
                let (lr, rr) = d.tail_rates();
                let sl = tail_extent(lr, k);
                let sr = tail_extent(rr, k);
                let width = 2.0 * d.scale();
                let mut breaks = quad::linspace(-sl, 0.0, ((sl / width).ceil() as usize).max(4));
                breaks.pop();
                breaks.extend(quad::linspace(0.0, sr, ((sr / width).ceil() as usize).max(4)));
                let r = quad::integrate_panels(
                    |s| s.powi(k as i32) * d.eval(s),
                    &breaks,
                    1e-300,
                    &format!("tilted moment {k}"),
                )?;
                Ok(r.value)
            }
            TiltedRepr::MomentsOnly => Err(Error::Unsupported(format!(
                "moment {k} beyond the supplied moments of a moments-only model"
            ))),
        }
    }

    /// Exact rational tilted moments `m_0, …, m_{count-1}`.
    ///
    /// Gamma: `(k+1)!`. Pascal: the atom series summed in fixed point with
    /// tail below 1e-30. Meixner λ<2: exact cumulant series of the Meixner
    /// Fourier transform at the binary value of λ.
    pub fn exact_tilted_moments(&self, count: usize) -> Result<Vec<Rational>> {
        match &self.kind {
            ModelKind::CustomTilted { moments, .. } => {
                if moments.len() < count {
                    return Err(Error::Domain(format!(
                        "custom model supplies {} moments, {count} requested",
                        moments.len()
                    )));
                }
                Ok(moments[..count].to_vec())
            }
            ModelKind::Meixner { lambda } => {
                let lambda = *lambda;
                if lambda == 2.0 {
                    Ok((0..count).map(|k| exact::factorial_rat(k + 1)).collect())
                } else if lambda > 2.0 {
                    Ok(pascal_moments_fixed_point(&exact::from_f64(lambda), count, 90))
                } else {
                    Ok(meixner_cumulant_moments(&exact::from_f64(lambda), count))
                }
            }
        }
    }

    /// `∫_{|s|>eps} g(s) ν(ds)`.
    ///
    /// `vanishing_order` is the known order of the zero of `g` at the origin;
    /// it decides whether `eps = 0` is admissible for densities.
    pub fn nu_integral<G>(&self, eps: f64, g: G, vanishing_order: usize) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        match &self.tilted.repr {
            TiltedRepr::AtomList(atoms) => Ok(atoms
                .iter()
                .filter(|a| a.0.abs() > eps)
                .map(|&(s, m)| g(s) * m / (s * s))
                .sum()),
            TiltedRepr::MomentsOnly => Err(Error::Unsupported(
                "ν integrals need a density or atom list".into(),
            )),
            TiltedRepr::ContinuousDensity { density, .. } => {
                let d = *density;
                let needed = if d.two_sided() { 2 } else { 1 };
                if eps == 0.0 && vanishing_order < needed {
                    return Err(Error::Domain(format!(
                        "∫ g dν diverges at eps=0 (g vanishes to order {vanishing_order}, need {needed})"
                    )));
                }
                let (lr, rr) = d.tail_rates();
                let mut total = nu_side(&d, eps, rr, 1.0, &g)?;
                if d.two_sided() {
                    total += nu_side(&d, eps, lr, -1.0, &g)?;
                }
                Ok(total)
            }
        }
    }

    /// `∫_{|s|>eps} s^j ν(ds)`.
    pub fn truncated_power_moment(&self, eps: f64, j: usize) -> Result<f64> {
        if j == 2 && eps == 0.0 {
            return self.tilted_moment(0);
        }
        self.nu_integral(eps, |s| s.powi(j as i32), j)
    }

    pub fn bias_bound(&self, eps: f64) -> Result<BiasBound> {
        match &self.tilted.repr {
            TiltedRepr::AtomList(atoms) => {
                let inside: Vec<_> = atoms.iter().filter(|a| a.0.abs() <= eps).collect();
                Ok(BiasBound {
                    l1: inside.iter().map(|a| a.1 / a.0.abs()).sum(),
                    l2_sq: inside.iter().map(|a| a.1).sum(),
                })
            }
            TiltedRepr::MomentsOnly => Err(Error::Unsupported("bias bound needs a representation".into())),
            TiltedRepr::ContinuousDensity { density, .. } => {
                let d = *density;
                let lo = if d.two_sided() { -eps } else { 0.0 };
                let breaks = quad::linspace(lo, eps, 4);
                let l2 = quad::integrate_panels(|s| d.eval(s), &breaks, 1e-300, "bias l2")?.value;
                let l1 = if d.two_sided() {
                    f64::INFINITY
                } else {
                    quad::integrate_panels(|s| d.eval(s) / s, &breaks, 1e-300, "bias l1")?.value
                };
                Ok(BiasBound { l1, l2_sq: l2 })
            }
        }
    }

    /// Flat `key=value` descriptor.
    pub fn descriptor(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            ModelKind::Meixner { lambda } => {
                let _ = writeln!(out, "kind=meixner");
                let _ = writeln!(out, "lambda={lambda}");
            }
            ModelKind::CustomTilted { sampler, .. } => {
                let _ = writeln!(out, "kind=custom");
                let s = match sampler {
                    SamplerDescriptor::MomentsOnly => "moments-only",
                    SamplerDescriptor::Atoms(_) => "atoms",
                };
                let _ = writeln!(out, "sampler={s}");
            }
        }
        let _ = writeln!(out, "eps={}", self.truncation_eps);
        let _ = writeln!(out, "max_moment_order={}", self.max_moment_order);
        out
    }

    /// Parse a Meixner descriptor written by [`LevyModel::descriptor`].
    pub fn from_descriptor(text: &str) -> Result<LevyModel> {
        let mut kind = None;
        let mut lambda = None;
        let mut eps = None;
        let mut order = DEFAULT_MAX_MOMENT_ORDER;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {line:?}")))?;
            let v = v.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Config(format!("{k}: {e}")));
            match k.trim() {
                "kind" => kind = Some(v.to_string()),
                "lambda" => lambda = Some(num(v)?),
                "eps" => eps = Some(num(v)?),
                "max_moment_order" => {
                    order = v.parse().map_err(|e| Error::Config(format!("max_moment_order: {e}")))?
                }
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        match kind.as_deref() {
            Some("meixner") => {}
            Some(other) => return Err(Error::Config(format!("cannot rebuild model of kind {other:?}"))),
            None => return Err(Error::Config("missing kind".into())),
        }
        let lambda = lambda.ok_or_else(|| Error::Config("missing lambda".into()))?;
        let eps = match eps {
            Some(e) if e > 0.0 || lambda > 2.0 => e,
            _ => DEFAULT_EPS,
        };
        meixner_model_with(lambda, eps, order)
    }
}

pub fn tilted_moment(model: &LevyModel, k: usize) -> Result<f64> {
    model.tilted_moment(k)
}

/// `ν({|s| > eps})`.
pub fn levy_total_mass(model: &LevyModel, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("eps must be nonnegative, got {eps}")));
    }
    match &model.tilted.repr {
        TiltedRepr::AtomList(_) => model.nu_integral(eps, |_| 1.0, 0),
        TiltedRepr::ContinuousDensity { .. } if eps == 0.0 => Err(Error::Domain(
            "ν has infinite total mass; eps must be > 0".into(),
        )),
        _ => model.nu_integral(eps, |_| 1.0, 0),
    }
}

/// Truncation point where `s^{k+1} e^{-rate·s}` is far below its peak.
fn tail_extent(rate: f64, k: usize) -> f64 {
    if !rate.is_finite() {
        return 0.0;
    }
    (2.0 * (k as f64 + 2.0) + 90.0) / rate
}

/// One half-line of `∫ g dν`: log-spaced panels on `[eps, 1]`, linear beyond.
fn nu_side<G: Fn(f64) -> f64>(d: &Density, eps: f64, rate: f64, sign: f64, g: &G) -> Result<f64> {
    let smax = tail_extent(rate, 40).max(2.0);
    let mut total = 0.0;
    if eps < 1.0 {
        if eps > 0.0 {
            let lo = eps.ln();
            let panels = ((-lo) / 0.5).ceil() as usize;
            let r = quad::integrate_panels(
                |u| {
                    let s = sign * u.exp();
                    g(s) * d.eval(s) / s.abs()
                },
                &quad::linspace(lo, 0.0, panels.max(1)),
                1e-300,
                "ν integral near zero",
            )?;
            total += r.value;
        } else {
            let r = quad::integrate_panels(
                |t| {
                    let s = sign * t;
                    g(s) * d.eval(s) / (s * s)
                },
                &quad::linspace(0.0, 1.0, 4),
                1e-300,
                "ν integral near zero",
            )?;
            total += r.value;
        }
    }
    let start = eps.max(1.0);
    if start < smax {
        let width = 2.0 * d.scale().max(0.25);
        let panels = ((smax - start) / width).ceil() as usize;
        let r = quad::integrate_panels(
            |t| {
                let s = sign * t;
                g(s) * d.eval(s) / (s * s)
            },
            &quad::linspace(start, smax, panels.max(1)),
            1e-300,
            "ν integral tail",
        )?;
        total += r.value;
    }
    Ok(total)
}

/// `(λ²-4)·r^k·Σ_j j^{k+1} p^j` in floating point, with r = √(λ²-4).
fn pascal_moment_f64(lambda: f64, k: usize) -> f64 {
    let r = (lambda * lambda - 4.0).sqrt();
    let p = pascal_p(lambda);
    let mut sum = 0.0;
    let mut pj = 1.0;
    let mut peak: f64 = 0.0;
    for j in 1..10_000_000usize {
        pj *= p;
        let term = (j as f64).powi(k as i32 + 1) * pj;
        peak = peak.max(term);
        sum += term;
        if term < 1e-20 * peak && (j as f64) * (1.0 - p) > (k as f64 + 1.0) {
            break;
        }
    }
    (lambda * lambda - 4.0) * r.powi(k as i32) * sum
}

/// Pascal moments with the atom series summed in fixed point at scale
/// `10^digits`. Even powers of `r = √(λ²-4)` are exact; odd moments carry one
/// fixed-point factor of `r`.
pub fn pascal_moments_fixed_point(lambda: &Rational, count: usize, digits: u32) -> Vec<Rational> {
    let scale = exact::pow10(digits);
    let scale_r = Rational::from_integer(scale.clone());
    let q = lambda * lambda - exact::int(4);
    let r_fix = exact::sqrt_fixed(&q, digits);
    let lam_fix = (lambda * &scale_r).to_integer();
    // p = (λ - r)/(λ + r) at scale 10^digits
    let p_fix: BigInt = ((&lam_fix - &r_fix) * &scale) / (&lam_fix + &r_fix);
    // T_k = Σ_j j^{k+1} p^j, all at scale 10^digits
    let mut t = vec![BigInt::zero(); count];
    let mut pj = scale.clone();
    let mut j: u64 = 0;
    loop {
        j += 1;
        pj = (&pj * &p_fix) / &scale;
        if pj.is_zero() {
            break;
        }
        let jb = BigInt::from(j);
        let mut w = pj.clone();
        for tk in t.iter_mut() {
            w = &w * &jb;
            *tk += &w;
        }
    }
    let r_rat = Rational::new(r_fix, scale.clone());
    (0..count)
        .map(|k| {
            let mut m = exact::rat_pow(&q, 1 + k / 2) * Rational::new(t[k].clone(), scale.clone());
            if k % 2 == 1 {
                m *= &r_rat;
            }
            m
        })
        .collect()
}

/// Exact moments of the Meixner-type ν̃ for rational λ from the cumulant
/// series of the Lévy exponent.
///
/// With `u_0 = 0, u_1 = 1, u_j = -λu_{j-1} - u_{j-2}` and
/// `g(t) = 1 + Σ_{k≥2} (-1)^{k+1} u_{k-1} t^k/k!`, the tilted moments are
/// `m_j = -(j+2)!·[t^{j+2}] log g(t)`. This holds for every λ ≥ 0.
pub fn meixner_cumulant_moments(lambda: &Rational, count: usize) -> Vec<Rational> {
    let n = count + 2;
    let mut u = vec![Rational::zero(), Rational::one()];
    for j in 2..=n {
        let next = -(lambda * &u[j - 1]) - &u[j - 2];
        u.push(next);
    }
    let mut c = vec![Rational::one(), Rational::zero()];
    for k in 2..=n {
        let g = if k % 2 == 1 { u[k - 1].clone() } else { -u[k - 1].clone() };
        c.push(g / exact::factorial_rat(k));
    }
    // log of a power series with c_0 = 1
    let mut l = vec![Rational::zero(); n + 1];
    for m in 1..=n {
        let mut acc = exact::int(m as i64) * &c[m];
        for k in 1..m {
            acc -= exact::int(k as i64) * &l[k] * &c[m - k];
        }
        l[m] = acc / exact::int(m as i64);
    }
    (0..count)
        .map(|j| -(exact::factorial_rat(j + 2) * &l[j + 2]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_closed_forms() {
        let m = meixner_model(2.0).unwrap();
        assert_eq!(m.c_const, 1.0);
        assert_eq!(m.tilted_moment(0).unwrap(), 1.0);
        assert_eq!(m.tilted_moment(2).unwrap(), 6.0);
    }

    #[test]
    fn cumulant_route_gamma_is_factorial() {
        let ms = meixner_cumulant_moments(&exact::int(2), 8);
        for (k, m) in ms.iter().enumerate() {
            assert_eq!(*m, exact::factorial_rat(k + 1));
        }
    }

    #[test]
    fn density_is_normalized_with_mean_lambda() {
        for lambda in [0.0, 0.7, 1.0, 1.9] {
            let m = meixner_model(lambda).unwrap();
            assert!((m.tilted_moment(0).unwrap() - 1.0).abs() < 1e-12);
            assert!((m.tilted_moment(1).unwrap() - lambda).abs() < 1e-11);
        }
    }

    #[test]
    fn negative_lambda_rejected() {
        assert!(matches!(meixner_model(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn descriptor_round_trip() {
        let m = meixner_model(3.0).unwrap();
        let back = LevyModel::from_descriptor(&m.descriptor()).unwrap();
        assert_eq!(back.lambda(), Some(3.0));
        assert!(LevyModel::from_descriptor("kind=meixner\nlambda=1\ncolour=blue\n").is_err());
    }
}
