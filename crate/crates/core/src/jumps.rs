//! Jump-size samplers for the normalized truncated Lévy measure.

use rand::Rng;

use crate::error::{Error, Result};
use crate::levy_models::{pascal_p, Density, LevyModel, ModelKind, TiltedRepr};
use crate::quad;

/// Cells per half-line in the tabulated inverse CDF.
pub const TABLE_CELLS: usize = 8192;

#[derive(Debug, Clone)]
pub struct SideTable {
    sign: f64,
    u_edges: Vec<f64>,
    /// Cumulative ν mass at each right cell edge.
    cdf: Vec<f64>,
}

impl SideTable {
    fn mass(&self) -> f64 {
        *self.cdf.last().unwrap_or(&0.0)
    }

    fn sample(&self, target: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < target).min(self.cdf.len() - 1);
        let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        let w = self.cdf[i] - lo;
        let frac = if w > 0.0 { ((target - lo) / w).clamp(0.0, 1.0) } else { 0.5 };
        let u = self.u_edges[i] + frac * (self.u_edges[i + 1] - self.u_edges[i]);
        self.sign * u.exp()
    }
}

#[derive(Debug, Clone)]
pub enum JumpSampler {
    /// Pascal: ν atoms at `r·k` with mass `p^k / k`, a log-series law.
    LogSeries { p: f64, r: f64, mass: f64 },
    /// Finite atom list with ν weights.
    Discrete { locations: Vec<f64>, cdf: Vec<f64> },
    /// Tabulated inverse CDF in `u = ln|s|` for `|s| > eps`.
    Table { sides: Vec<SideTable>, eps: f64 },
}

impl JumpSampler {
    pub fn build(model: &LevyModel) -> Result<JumpSampler> {
        match (&model.kind, &model.tilted.repr) {
            (ModelKind::Meixner { lambda }, TiltedRepr::AtomList(_)) => {
                let p = pascal_p(*lambda);
                Ok(JumpSampler::LogSeries {
                    p,
                    r: (lambda * lambda - 4.0).sqrt(),
                    mass: -(-p).ln_1p(),
                })
            }
            (_, TiltedRepr::AtomList(atoms)) => {
                let mut cdf = Vec::with_capacity(atoms.len());
                let mut acc = 0.0;
                for &(s, m) in atoms {
                    acc += m / (s * s);
                    cdf.push(acc);
                }
                Ok(JumpSampler::Discrete {
                    locations: atoms.iter().map(|a| a.0).collect(),
                    cdf,
                })
            }
            (_, TiltedRepr::ContinuousDensity { density, .. }) => {
                let eps = model.truncation_eps;
                if eps <= 0.0 {
                    return Err(Error::Domain("tabulated sampler needs eps > 0".into()));
                }
                let (lr, rr) = density.tail_rates();
                let mut sides = vec![side_table(density, eps, rr, 1.0)];
                if density.two_sided() {
                    sides.push(side_table(density, eps, lr, -1.0));
                }
                Ok(JumpSampler::Table { sides, eps })
            }
            (_, TiltedRepr::MomentsOnly) => Err(Error::Unsupported("moments-only model has no sampler".into())),
        }
    }

    /// `ν({|s| > eps})` as seen by the sampler.
    pub fn total_mass(&self) -> f64 {
        match self {
            JumpSampler::LogSeries { mass, .. } => *mass,
            JumpSampler::Discrete { cdf, .. } => *cdf.last().unwrap_or(&0.0),
            JumpSampler::Table { sides, .. } => sides.iter().map(SideTable::mass).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::LogSeries { p, r, .. } => r * log_series(*p, rng) as f64,
            JumpSampler::Discrete { locations, cdf } => {
                let t = rng.random::<f64>() * cdf.last().copied().unwrap_or(0.0);
                let i = cdf.partition_point(|&c| c < t).min(locations.len() - 1);
                locations[i]
            }
            JumpSampler::Table { sides, .. } => {
                let mut t = rng.random::<f64>() * self.total_mass();
                for side in sides {
                    if t <= side.mass() {
                        return side.sample(t);
                    }
                    t -= side.mass();
                }
                let last = sides.last().expect("at least one side");
                last.sample(last.mass())
            }
        }
    }
}

fn side_table(d: &Density, eps: f64, rate: f64, sign: f64) -> SideTable {
    let smax = ((4.0 + 90.0) / rate).max(eps * 2.0);
    let (lo, hi) = (eps.ln(), smax.ln());
    let u_edges = quad::linspace(lo, hi, TABLE_CELLS);
    let (gx, gw) = quad::gauss_legendre(8);
    let mut cdf = Vec::with_capacity(TABLE_CELLS);
    let mut acc = 0.0;
    for w in u_edges.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        let cell: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(x, wt)| {
                let u = mid + half * x;
                wt * d.eval(sign * u.exp()) * (-u).exp()
            })
            .sum();
        acc += cell * half;
        cdf.push(acc);
    }
    SideTable { sign, u_edges, cdf }
}

/// Log-series variate, `P(k) = p^k / (k·(-ln(1-p)))`, by Kemp's LK method.
pub fn log_series<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let r = (-p).ln_1p();
    loop {
        let v: f64 = rng.random();
        if v >= p {
            return 1;
        }
        let u: f64 = rng.random();
        let q = -(r * u).exp_m1();
        if v <= q * q {
            let k = (1.0 + v.ln() / q.ln()).floor();
            if k < 1.0 || v == 0.0 {
                continue;
            }
            return k as u64;
        }
        if v >= q {
            return 1;
        }
        return 2;
    }
}
