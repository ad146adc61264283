//! Synthetic conditional-dependence scenarios with closed-form ground truth.
//!
//! `(X′, Y′) ~ N(0, [[I, ρI], [ρI, I]])`, `Z` drawn from a small-scale noise
//! family, `A, B` with independent `N(0, 1)` entries, and
//! `X = f(AZ + X′)`, `Y = g(BZ + Y′)` for monotone bijections `f`, `g`.
//! Because `X′ ⫫ Z` and the maps are bijections for every fixed `z`,
//! `I(X; Y | Z) = I(X′; Y′) = −(d/2) ln(1 − ρ²)`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::seed::derive_seed;

const CHOICE_STREAM: u64 = 0xc401ce;

/// Slope of the linear member of the bijection set.
pub const LINEAR_SLOPE: f64 = 2.0;
/// Shift applied before `1/x` and `ln x`.
pub const POSITIVE_SHIFT: f64 = 5.0;
/// Standardized pre-activations beyond `±CLIP_BOUND` are clipped before the
/// positive shift.
pub const CLIP_BOUND: f64 = 4.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bijection {
    /// `αx` with `α = 2`.
    Linear,
    Cube,
    /// `e^{−x}`.
    NegExp,
    /// `1/(x + 5)` on clipped input.
    Reciprocal,
    /// `ln(x + 5)` on clipped input.
    Log,
    Sigmoid,
}

impl Bijection {
    pub const ALL: [Bijection; 6] = [
        Bijection::Linear,
        Bijection::Cube,
        Bijection::NegExp,
        Bijection::Reciprocal,
        Bijection::Log,
        Bijection::Sigmoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bijection::Linear => "linear",
            Bijection::Cube => "cube",
            Bijection::NegExp => "neg_exp",
            Bijection::Reciprocal => "reciprocal",
            Bijection::Log => "log",
            Bijection::Sigmoid => "sigmoid",
        }
    }

    /// Whether the input is clipped and shifted to stay positive.
    pub fn needs_positive_input(self) -> bool {
        matches!(self, Bijection::Reciprocal | Bijection::Log)
    }

    /// Applies the map to a standardized pre-activation `v`, including the
    /// clip-and-shift for the positive-domain members. Returns the value and
    /// whether `v` was clipped.
    pub fn apply(self, v: f64) -> (f64, bool) {
        let positive = |v: f64| (v.clamp(-CLIP_BOUND, CLIP_BOUND) + POSITIVE_SHIFT, v.abs() > CLIP_BOUND);
        match self {
            Bijection::Linear => (LINEAR_SLOPE * v, false),
            Bijection::Cube => (v * v * v, false),
            Bijection::NegExp => ((-v).exp(), false),
            Bijection::Reciprocal => {
                let (s, clipped) = positive(v);
                (1.0 / s, clipped)
            }
            Bijection::Log => {
                let (s, clipped) = positive(v);
                (s.ln(), clipped)
            }
            Bijection::Sigmoid => (1.0 / (1.0 + (-v).exp()), false),
        }
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bijection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bijection::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown bijection {s:?}")))
    }
}

/// Distribution of each `Z` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZFamily {
    /// `U(−0.01, 0.01)`.
    Uniform,
    /// `N(0, 0.01)`: variance 0.01.
    Normal,
    /// Laplace with variance 0.01, scale `√0.005`.
    Laplace,
}

impl ZFamily {
    pub const ALL: [ZFamily; 3] = [ZFamily::Uniform, ZFamily::Normal, ZFamily::Laplace];

    pub fn name(self) -> &'static str {
        match self {
            ZFamily::Uniform => "uniform",
            ZFamily::Normal => "normal",
            ZFamily::Laplace => "laplace",
        }
    }

    pub fn sample(self, rng: &mut impl Rng) -> f64 {
        match self {
            ZFamily::Uniform => rng.random_range(-0.01..0.01),
            ZFamily::Normal => 0.1 * rng.sample::<f64, _>(StandardNormal),
            ZFamily::Laplace => {
                let b = 0.005f64.sqrt();
                let u: f64 = rng.random_range(-0.5..0.5);
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

impl fmt::Display for ZFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ZFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ZFamily::ALL
            .into_iter()
            .find(|z| z.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown z family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    /// Shared dimension `d_X = d_Y`.
    pub d: usize,
    pub d_z: usize,
    pub rho: f64,
    pub z_family: ZFamily,
    pub f: Bijection,
    pub g: Bijection,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Linear maps and uniform `Z`.
    pub fn new(n: usize, d: usize, d_z: usize, rho: f64, seed: u64) -> Self {
        Self {
            n,
            d,
            d_z,
            rho,
            z_family: ZFamily::Uniform,
            f: Bijection::Linear,
            g: Bijection::Linear,
            seed,
        }
    }

    /// `f`, `g` and the `Z` family chosen uniformly at random from `seed`.
    pub fn sampled(n: usize, d: usize, d_z: usize, rho: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, CHOICE_STREAM));
        let f = Bijection::ALL[rng.random_range(0..6)];
        let g = Bijection::ALL[rng.random_range(0..6)];
        let z_family = ZFamily::ALL[rng.random_range(0..3)];
        Self {
            z_family,
            f,
            g,
            ..Self::new(n, d, d_z, rho, seed)
        }
    }

    pub fn with_bijections(mut self, f: Bijection, g: Bijection) -> Self {
        self.f = f;
        self.g = g;
        self
    }

    pub fn with_z_family(mut self, z_family: ZFamily) -> Self {
        self.z_family = z_family;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("scenario needs n ≥ 2, got {}", self.n)));
        }
        if self.d == 0 {
            return Err(Error::Config("scenario needs d ≥ 1".into()));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::Domain(format!("rho must lie in (−1, 1), got {}", self.rho)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub dataset: Dataset,
    pub ground_truth_cmi: f64,
    pub config: ScenarioConfig,
    /// `A`, `d × d_z`.
    pub mix_x: Matrix,
    /// `B`, `d × d_z`.
    pub mix_y: Matrix,
    /// The Gaussian pair `(X′, Y′)` before mixing and the bijections.
    pub latent_x: Matrix,
    pub latent_y: Matrix,
    /// Pre-activations clipped to `±CLIP_BOUND` for `1/x` or `ln x`.
    pub clip_events: usize,
}

impl GeneratedScenario {
    /// `key=value` lines describing the scenario, one per field.
    pub fn metadata(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "n={}", c.n);
        let _ = writeln!(out, "d={}", c.d);
        let _ = writeln!(out, "d_z={}", c.d_z);
        let _ = writeln!(out, "rho={}", c.rho);
        let _ = writeln!(out, "z_family={}", c.z_family);
        let _ = writeln!(out, "f={}", c.f);
        let _ = writeln!(out, "g={}", c.g);
        let _ = writeln!(out, "seed={}", c.seed);
        let _ = writeln!(out, "ground_truth_cmi={}", self.ground_truth_cmi);
        let _ = writeln!(out, "clip_events={}", self.clip_events);
        out
    }
}

/// `−(d/2) ln(1 − ρ²)`.
pub fn ground_truth_cmi(rho: f64, d: usize) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (−1, 1), got {rho}")));
    }
    Ok(-(d as f64) / 2.0 * (-rho * rho).ln_1p())
}

/// A correlation for a dependent CI-test run: uniform on
/// `[−0.99, −0.1] ∪ [0.1, 0.99]`.
pub fn draw_dependent_rho(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, RHO_STREAM));
    let magnitude = rng.random_range(0.1..=0.99);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

const RHO_STREAM: u64 = 0x7240;

pub fn generate(cfg: &ScenarioConfig) -> Result<GeneratedScenario> {
    cfg.validate()?;
    let ScenarioConfig { n, d, d_z, rho, .. } = *cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut cov = vec![0.0; 4 * d * d];
    for i in 0..2 * d {
        cov[i * 2 * d + i] = 1.0;
    }
    for i in 0..d {
        cov[i * 2 * d + d + i] = rho;
        cov[(d + i) * 2 * d + i] = rho;
    }
    let chol = linalg::cholesky(&cov, 2 * d)?;

    let gaussian = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Matrix::new(rows, cols, data).expect("shape matches")
    };
    let mix_x = gaussian(&mut rng, d, d_z);
    let mix_y = gaussian(&mut rng, d, d_z);

    let mut latent_x = Matrix::zeros(n, d);
    let mut latent_y = Matrix::zeros(n, d);
    let mut z = Matrix::zeros(n, d_z);
    let mut e = vec![0.0; 2 * d];
    let mut joint = vec![0.0; 2 * d];
    for r in 0..n {
        for v in e.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        linalg::lower_mul(&chol, 2 * d, &e, &mut joint);
        latent_x.row_mut(r).copy_from_slice(&joint[..d]);
        latent_y.row_mut(r).copy_from_slice(&joint[d..]);
        for v in z.row_mut(r) {
            *v = cfg.z_family.sample(&mut rng);
        }
    }

    let mut clip_events = 0;
    let mut observe = |latent: &Matrix, mix: &Matrix, f: Bijection, name: &str| -> Result<Matrix> {
        let mut v = latent.clone();
        for r in 0..n {
            let zr = z.row(r);
            for (j, out) in v.row_mut(r).iter_mut().enumerate() {
                *out += (0..d_z).map(|k| mix.get(j, k) * zr[k]).sum::<f64>();
            }
        }
        let moments = v.column_moments();
        for (j, m) in moments.iter().enumerate() {
            if !(m.variance > 0.0) {
                return Err(Error::Generation(format!("{name} pre-activation column {j} is constant")));
            }
        }
        for r in 0..n {
            for (j, out) in v.row_mut(r).iter_mut().enumerate() {
                let standardized = (*out - moments[j].mean) / moments[j].variance.sqrt();
                let (value, clipped) = f.apply(standardized);
                if !value.is_finite() {
                    return Err(Error::Generation(format!(
                        "{f} produced {value} at row {r}, column {j} of {name}"
                    )));
                }
                clip_events += clipped as usize;
                *out = value;
            }
        }
        Ok(v)
    };
    let x = observe(&latent_x, &mix_x, cfg.f, "x")?;
    let y = observe(&latent_y, &mix_y, cfg.g, "y")?;

    Ok(GeneratedScenario {
        dataset: Dataset::new(x, y, z)?,
        ground_truth_cmi: ground_truth_cmi(rho, d)?,
        config: *cfg,
        mix_x,
        mix_y,
        latent_x,
        latent_y,
        clip_events,
    })
}

/// Histogram plug-in MI between two scalar samples, for cross-checking.
///
/// Both variables are binned into equal-mass bins by rank, with
/// `clamp(round(√(n/5)), 4, 32)` bins per axis; the three plug-in entropies
/// carry the Miller–Madow correction `(m − 1)/(2n)` for `m` occupied cells.
pub fn oracle_mi_gaussian_2d(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Oracle(format!("sample lengths differ: {n} vs {}", y.len())));
    }
    if n < 100 {
        return Err(Error::Oracle(format!("oracle needs at least 100 samples, got {n}")));
    }
    let bins = ((n as f64 / 5.0).sqrt().round() as usize).clamp(4, 32);
    let bx = rank_bins(x, bins)?;
    let by = rank_bins(y, bins)?;
    let mut joint = vec![0usize; bins * bins];
    let mut mx = vec![0usize; bins];
    let mut my = vec![0usize; bins];
    for (&a, &b) in bx.iter().zip(&by) {
        joint[a * bins + b] += 1;
        mx[a] += 1;
        my[b] += 1;
    }
    let entropy = |counts: &[usize]| {
        let occupied = counts.iter().filter(|&&c| c > 0).count();
        let plug_in: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum();
        plug_in + (occupied as f64 - 1.0) / (2.0 * n as f64)
    };
    Ok(entropy(&mx) + entropy(&my) - entropy(&joint))
}

fn rank_bins(v: &[f64], bins: usize) -> Result<Vec<usize>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Oracle("non-finite sample".into()));
    }
    if v.iter().all(|&x| x == v[0]) {
        return Err(Error::Oracle("constant column".into()));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = vec![0; v.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank * bins / v.len();
    }
    Ok(out)
}
