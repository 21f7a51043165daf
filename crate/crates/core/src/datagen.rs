//! Seeded synthetic data: designs, symmetric noise, adversarial outliers,
//! and the block partitions used by median-of-means estimators.
//!
//! Everything is a pure function of `(spec, seed)`. Seeds are expanded with
//! a splitmix-style mixer into independent substreams (one per concern:
//! design, noise, contamination, per-cell experiment streams), and all
//! sampling runs on `ChaCha8`, which is stable across platforms and Rust
//! releases. Two calls with the same arguments produce bitwise-identical
//! output regardless of thread scheduling elsewhere.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::rkhs::{KernelModel, KernelSpec};
use crate::{Error, Result};

/// Design (input) distribution. Rows are i.i.d.; coordinates independent.
///
/// `student` coordinates are rescaled by `1/sqrt(nu/(nu-2))` so the design
/// stays isotropic (unit coordinate variance), which the linear theory
/// assumes. `uniform_unit` draws scalar inputs uniformly on `[0,1]` for
/// kernel experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSpec {
    GaussianIso,
    Student { nu: f64 },
    UniformUnit,
}

/// Symmetric noise law for the regression target.
///
/// `uniform` is parameterized by its half-width (support `[-a, a]`). The
/// same enum doubles as the analytic noise-law input of the Bernstein
/// checkers, which need closed-form CDFs and densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Gaussian { sigma: f64 },
    Student { nu: f64 },
    Cauchy,
    Uniform { half_width: f64 },
}

/// Which part of an outlier row gets replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationMode {
    XOnly,
    YOnly,
    Both,
}

/// Ground truth behind a synthetic dataset.
#[derive(Debug, Clone)]
pub enum Truth {
    /// Linear model `y = <x, t*> + w`.
    Linear(Array1<f64>),
    /// Kernel model `y = f*(x) + w` with `f*` in the RKHS.
    Kernel(KernelModel),
}

/// A (possibly contaminated) regression sample.
///
/// `inputs` is always an `N x p` matrix; kernel settings use `p = 1` and
/// read the single column as scalar points. `outliers` lists the rows whose
/// contents were replaced by [`contaminate`], sorted ascending.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Array1<f64>,
    pub truth: Option<Truth>,
    pub outliers: Vec<usize>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn p(&self) -> usize {
        self.inputs.ncols()
    }

    /// The inputs as scalar points; requires `p == 1`.
    pub fn scalar_inputs(&self) -> Result<Vec<f64>> {
        if self.p() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.p(),
            });
        }
        Ok(self.inputs.column(0).to_vec())
    }

    /// Writes the dataset as CSV with header `x_1..x_p,y,is_outlier`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.p()).map(|j| format!("x_{j}")).collect();
        header.push("y".into());
        header.push("is_outlier".into());
        w.write_record(&header)?;
        let mut is_outlier = vec![false; self.n()];
        for &i in &self.outliers {
            is_outlier[i] = true;
        }
        for i in 0..self.n() {
            let mut rec: Vec<String> = self.inputs.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.targets[i].to_string());
            rec.push(if is_outlier[i] { "1" } else { "0" }.into());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::write_csv`]. The truth is not
    /// stored in the file, so it comes back as `None`.
    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.len() < 3 {
            return Err(Error::domain("dataset CSV needs x_1..x_p, y, is_outlier"));
        }
        let p = header.len() - 2;
        for (j, name) in header.iter().take(p).enumerate() {
            let want = format!("x_{}", j + 1);
            if name != want {
                return Err(Error::domain(format!(
                    "unexpected CSV column {name:?} where {want:?} was expected"
                )));
            }
        }
        if &header[p] != "y" || &header[p + 1] != "is_outlier" {
            return Err(Error::domain("dataset CSV must end with columns y, is_outlier"));
        }
        let mut rows: Vec<f64> = Vec::new();
        let mut targets = Vec::new();
        let mut outliers = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != p + 2 {
                return Err(Error::domain(format!("CSV row {i} has {} fields", rec.len())));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::domain(format!("bad numeric field {s:?} in CSV row {i}")))
            };
            for j in 0..p {
                rows.push(parse(&rec[j])?);
            }
            targets.push(parse(&rec[p])?);
            match &rec[p + 1] {
                "0" => {}
                "1" => outliers.push(i),
                other => {
                    return Err(Error::domain(format!(
                        "is_outlier must be 0 or 1, got {other:?} in row {i}"
                    )))
                }
            }
        }
        let n = targets.len();
        if n == 0 {
            return Err(Error::domain("dataset CSV has no data rows"));
        }
        let inputs = Array2::from_shape_vec((n, p), rows)
            .map_err(|e| Error::domain(format!("bad CSV shape: {e}")))?;
        Ok(Dataset {
            inputs,
            targets: Array1::from_vec(targets),
            truth: None,
            outliers,
        })
    }
}

/// Equal-sized random blocks over `0..n`, with `n mod s` indices dropped.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    /// `s` disjoint blocks, each of size `n / s`, indices sorted ascending.
    pub blocks: Vec<Vec<usize>>,
    /// The `n mod s` indices left out, sorted ascending.
    pub dropped: Vec<usize>,
}

impl BlockPartition {
    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a reproducible generator for the substream identified by `tags`.
///
/// Distinct tag paths give statistically independent streams, so parallel
/// experiment cells can draw without coordinating: the stream depends on the
/// (seed, tags) path only, never on scheduling.
pub fn stream_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for &t in tags {
        state = splitmix64(state ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    ChaCha8Rng::seed_from_u64(state)
}

const TAG_DESIGN: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_CONTAMINATE: u64 = 3;
const TAG_PARTITION: u64 = 4;

/// Samples an `n x p` design matrix.
pub fn generate_design(design: &DesignSpec, n: usize, p: usize, seed: u64) -> Result<Array2<f64>> {
    if n == 0 || p == 0 {
        return Err(Error::domain("design needs n >= 1 and p >= 1"));
    }
    let mut rng = stream_rng(seed, &[TAG_DESIGN]);
    sample_design(design, n, p, &mut rng)
}

fn sample_design(
    design: &DesignSpec,
    n: usize,
    p: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<f64>> {
    match *design {
        DesignSpec::GaussianIso => Ok(Array2::from_shape_fn((n, p), |_| {
            StandardNormal.sample(rng)
        })),
        DesignSpec::Student { nu } => {
            if !(nu.is_finite() && nu > 2.0) {
                return Err(Error::domain(format!(
                    "student design needs nu > 2 for unit-variance rescaling, got {nu}"
                )));
            }
            let dist = StudentT::new(nu)
                .map_err(|e| Error::domain(format!("student design: {e}")))?;
            // Var(t_nu) = nu/(nu-2); dividing restores isotropy.
            let scale = 1.0 / (nu / (nu - 2.0)).sqrt();
            Ok(Array2::from_shape_fn((n, p), |_| {
                let t: f64 = dist.sample(rng);
                t * scale
            }))
        }
        DesignSpec::UniformUnit => Ok(Array2::from_shape_fn((n, p), |_| {
            rng.random_range(0.0..1.0)
        })),
    }
}

/// Samples `n` i.i.d. noise values.
pub fn generate_noise(noise: &NoiseSpec, n: usize, seed: u64) -> Result<Array1<f64>> {
    if n == 0 {
        return Err(Error::domain("noise needs n >= 1"));
    }
    let mut rng = stream_rng(seed, &[TAG_NOISE]);
    sample_noise(noise, n, &mut rng)
}

fn sample_noise(noise: &NoiseSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Array1<f64>> {
    match *noise {
        NoiseSpec::Gaussian { sigma } => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::domain(format!("gaussian sigma must be >= 0, got {sigma}")));
            }
            if sigma == 0.0 {
                return Ok(Array1::zeros(n));
            }
            let dist = Normal::new(0.0, sigma)
                .map_err(|e| Error::domain(format!("gaussian noise: {e}")))?;
            Ok(Array1::from_shape_fn(n, |_| dist.sample(rng)))
        }
        NoiseSpec::Student { nu } => {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::domain(format!("student noise needs nu > 0, got {nu}")));
            }
            let dist =
                StudentT::new(nu).map_err(|e| Error::domain(format!("student noise: {e}")))?;
            Ok(Array1::from_shape_fn(n, |_| dist.sample(rng)))
        }
        NoiseSpec::Cauchy => {
            let dist = Cauchy::new(0.0, 1.0)
                .map_err(|e| Error::domain(format!("cauchy noise: {e}")))?;
            Ok(Array1::from_shape_fn(n, |_| dist.sample(rng)))
        }
        NoiseSpec::Uniform { half_width } => {
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err(Error::domain(format!(
                    "uniform noise needs half_width > 0, got {half_width}"
                )));
            }
            Ok(Array1::from_shape_fn(n, |_| {
                rng.random_range(-half_width..half_width)
            }))
        }
    }
}

/// Builds a clean regression dataset `y = f*(x) + w`.
///
/// For a linear truth the design dimension is the length of `t*`; for a
/// kernel truth inputs are scalar (`p = 1`) and a synthetic Mercer kernel
/// requires the `uniform_unit` design so points stay inside its `[0,1]`
/// domain.
pub fn make_regression_dataset(
    design: &DesignSpec,
    noise: &NoiseSpec,
    truth: &Truth,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut design_rng = stream_rng(seed, &[TAG_DESIGN]);
    let mut noise_rng = stream_rng(seed, &[TAG_NOISE]);
    let (inputs, signal) = match truth {
        Truth::Linear(t_star) => {
            if t_star.is_empty() {
                return Err(Error::domain("linear truth must have p >= 1"));
            }
            let x = sample_design(design, n, t_star.len(), &mut design_rng)?;
            let signal = x.dot(t_star);
            (x, signal)
        }
        Truth::Kernel(model) => {
            if matches!(model.kernel, KernelSpec::SyntheticMercer { .. })
                && *design != DesignSpec::UniformUnit
            {
                return Err(Error::config(
                    "synthetic_mercer truth requires the uniform_unit design on [0,1]",
                ));
            }
            let x = sample_design(design, n, 1, &mut design_rng)?;
            let signal = model.predict(x.column(0).as_slice().expect("contiguous column"))?;
            (x, signal)
        }
    };
    let w = sample_noise(noise, n, &mut noise_rng)?;
    Ok(Dataset {
        inputs,
        targets: signal + w,
        truth: Some(truth.clone()),
        outliers: Vec::new(),
    })
}

/// Replaces `floor(frac * n)` rows with adversarial outliers.
///
/// Selected rows get every affected entry set to `magnitude` with a sign
/// alternating along the (sorted) outlier list, so the corruption does not
/// cancel into a harmless mean shift. Rows outside the outlier set are
/// preserved bit-exactly; previously recorded outliers stay recorded.
pub fn contaminate(
    data: &Dataset,
    frac: f64,
    magnitude: f64,
    mode: ContaminationMode,
    seed: u64,
) -> Result<Dataset> {
    if !(frac.is_finite() && (0.0..1.0).contains(&frac)) {
        return Err(Error::domain(format!("outlier fraction must lie in [0,1), got {frac}")));
    }
    if !(magnitude.is_finite() && magnitude > 0.0) {
        return Err(Error::domain(format!("outlier magnitude must be positive, got {magnitude}")));
    }
    let n = data.n();
    let count = (frac * n as f64).floor() as usize;
    let mut out = data.clone();
    if count == 0 {
        return Ok(out);
    }
    let mut rng = stream_rng(seed, &[TAG_CONTAMINATE]);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut chosen: Vec<usize> = idx.into_iter().take(count).collect();
    chosen.sort_unstable();
    for (ord, &i) in chosen.iter().enumerate() {
        let value = if ord % 2 == 0 { magnitude } else { -magnitude };
        if matches!(mode, ContaminationMode::XOnly | ContaminationMode::Both) {
            out.inputs.row_mut(i).fill(value);
        }
        if matches!(mode, ContaminationMode::YOnly | ContaminationMode::Both) {
            out.targets[i] = value;
        }
    }
    out.outliers.extend(chosen);
    out.outliers.sort_unstable();
    out.outliers.dedup();
    Ok(out)
}

/// Randomly partitions `0..n` into `s` disjoint blocks of size `n / s`.
///
/// Within each block (and in `dropped`) indices are stored ascending, so a
/// single block with `s = 1` is exactly the identity ordering and block
/// means are invariant to how the shuffle happened to order elements.
pub fn partition_blocks(n: usize, s: usize, seed: u64) -> Result<BlockPartition> {
    if s == 0 || s > n {
        return Err(Error::domain(format!("block count must satisfy 1 <= s <= n, got s={s}, n={n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, &[TAG_PARTITION]);
    perm.shuffle(&mut rng);
    let m = n / s;
    let mut blocks = Vec::with_capacity(s);
    for b in 0..s {
        let mut block = perm[b * m..(b + 1) * m].to_vec();
        block.sort_unstable();
        blocks.push(block);
    }
    let mut dropped = perm[s * m..].to_vec();
    dropped.sort_unstable();
    Ok(BlockPartition { blocks, dropped })
}
