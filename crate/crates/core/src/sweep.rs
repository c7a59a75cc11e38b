//! Seeded parameter sweeps over the channel families, one CSV row per sample.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, sample)`,
//! so rows do not depend on evaluation order or thread count.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{gate_channel, GateVerdict, DEFAULT_GATE_TOL};
use crate::zoo::{self, RotatedDominoParams, UsdParams, DEFAULT_ETA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RotatedDomino,
    RandomUnitary,
    Usd,
}

/// Sweep description as read from a JSON config file.
///
/// `theta_range` applies to `rotated_domino` (default `[0, π/4]`, lower end
/// excluded); `dims` and `nu` are required for `random_unitary`, where
/// `samples` counts draws per `nu` value; `eta1`, `eta3` apply to `usd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: Family,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta3: Option<f64>,
}

fn default_rel_tol() -> f64 {
    DEFAULT_GATE_TOL
}

impl SweepConfig {
    fn base(family: Family, samples: usize, seed: u64) -> Self {
        Self {
            family,
            samples,
            seed,
            rel_tol: DEFAULT_GATE_TOL,
            theta_range: None,
            dims: None,
            nu: None,
            eta1: None,
            eta3: None,
        }
    }

    pub fn rotated_domino(samples: usize, seed: u64) -> Self {
        Self::base(Family::RotatedDomino, samples, seed)
    }

    pub fn random_unitary(dims: Vec<usize>, nu: Vec<usize>, samples: usize, seed: u64) -> Self {
        Self {
            dims: Some(dims),
            nu: Some(nu),
            ..Self::base(Family::RandomUnitary, samples, seed)
        }
    }

    pub fn usd(samples: usize, seed: u64) -> Self {
        Self::base(Family::Usd, samples, seed)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSweep(msg));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return bad(format!("rel_tol = {} must be positive", self.rel_tol));
        }
        let stray = |field: &str, set: bool| -> Result<()> {
            if set {
                Err(Error::InvalidSweep(format!(
                    "{field} does not apply to {:?}",
                    self.family
                )))
            } else {
                Ok(())
            }
        };
        match self.family {
            Family::RotatedDomino => {
                stray("dims", self.dims.is_some())?;
                stray("nu", self.nu.is_some())?;
                stray("eta1/eta3", self.eta1.is_some() || self.eta3.is_some())?;
                let [lo, hi] = self.theta_range();
                if !(0.0 <= lo && lo < hi && hi <= FRAC_PI_4 + 1e-12) {
                    return bad(format!("theta_range [{lo}, {hi}] must satisfy 0 <= lo < hi <= pi/4"));
                }
            }
            Family::RandomUnitary => {
                stray("theta_range", self.theta_range.is_some())?;
                stray("eta1/eta3", self.eta1.is_some() || self.eta3.is_some())?;
                let (Some(dims), Some(nu)) = (&self.dims, &self.nu) else {
                    return bad("random_unitary needs dims and nu".into());
                };
                if dims.len() < 2 || dims.contains(&0) {
                    return bad(format!("dims {dims:?} must list at least two positive dimensions"));
                }
                if nu.is_empty() || nu.contains(&0) {
                    return bad(format!("nu {nu:?} must list positive Kraus counts"));
                }
            }
            Family::Usd => {
                stray("theta_range", self.theta_range.is_some())?;
                stray("dims", self.dims.is_some())?;
                stray("nu", self.nu.is_some())?;
                let (e1, e3) = self.etas();
                if !(e1 > 0.0 && e3 > 0.0 && 2.0 * e1 + e3 < 1.0) {
                    return bad(format!("priors eta1 = {e1}, eta3 = {e3} need 2*eta1 + eta3 < 1"));
                }
            }
        }
        Ok(())
    }

    fn theta_range(&self) -> [f64; 2] {
        self.theta_range.unwrap_or([0.0, FRAC_PI_4])
    }

    fn etas(&self) -> (f64, f64) {
        (self.eta1.unwrap_or(DEFAULT_ETA), self.eta3.unwrap_or(DEFAULT_ETA))
    }

    pub fn parties(&self) -> usize {
        match self.family {
            Family::RandomUnitary => self.dims.as_ref().map_or(0, Vec::len),
            Family::RotatedDomino | Family::Usd => 2,
        }
    }

    /// Total number of rows the sweep produces.
    pub fn total_samples(&self) -> usize {
        match self.family {
            Family::RandomUnitary => self.samples * self.nu.as_ref().map_or(0, Vec::len),
            _ => self.samples,
        }
    }

    /// CSV header, in output column order.
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = vec!["sample".into()];
        let params: &[&str] = match self.family {
            Family::RotatedDomino => &["theta1", "theta2", "theta3", "theta4", "theta_min"],
            Family::RandomUnitary => &["dims", "n_u"],
            Family::Usd => &[
                "abs_alpha1",
                "abs_beta1",
                "abs_alpha3",
                "abs_beta3",
                "arg_alpha3",
                "eta1",
                "eta3",
            ],
        };
        h.extend(params.iter().map(|s| s.to_string()));
        h.extend((0..self.parties()).map(|p| format!("ratio_p{p}")));
        h.push("lambda_hat".into());
        h.push("verdict".into());
        h
    }
}

/// Realized family parameters of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SampleParams {
    RotatedDomino { theta: [f64; 4] },
    RandomUnitary { dims: Vec<usize>, n_u: usize },
    Usd(UsdParams),
}

impl SampleParams {
    fn fields(&self) -> Vec<String> {
        match self {
            SampleParams::RotatedDomino { theta } => {
                let min = theta.iter().copied().fold(f64::INFINITY, f64::min);
                theta.iter().chain([&min]).map(f64::to_string).collect()
            }
            SampleParams::RandomUnitary { dims, n_u } => {
                let dims: Vec<String> = dims.iter().map(usize::to_string).collect();
                vec![dims.join("x"), n_u.to_string()]
            }
            SampleParams::Usd(p) => [
                p.alpha1.norm(),
                p.beta1.norm(),
                p.alpha3.norm(),
                p.beta3.norm(),
                p.alpha3.arg(),
                p.eta1,
                p.eta3,
            ]
            .iter()
            .map(f64::to_string)
            .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sample: usize,
    pub params: SampleParams,
    pub ratios: Vec<f64>,
    pub lambda_hat: f64,
    pub verdict: String,
}

impl SweepRow {
    fn new(sample: usize, params: SampleParams, v: &GateVerdict) -> Self {
        Self {
            sample,
            params,
            ratios: v.ratios(),
            lambda_hat: v.lambda_hat,
            verdict: v.verdict.label().to_string(),
        }
    }

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.sample.to_string()];
        r.extend(self.params.fields());
        r.extend(self.ratios.iter().map(f64::to_string));
        r.push(self.lambda_hat.to_string());
        r.push(self.verdict.clone());
        r
    }
}

/// Independent generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Evaluates one sample. Exposed so single rows can be reproduced alone.
pub fn run_sample(config: &SweepConfig, index: usize) -> Result<SweepRow> {
    let mut rng = sample_rng(config.seed, index);
    let (params, channel) = match config.family {
        Family::RotatedDomino => {
            use rand::Rng;
            let [lo, hi] = config.theta_range();
            // 1 - u lies in (0, 1], keeping the lower end open
            let theta: [f64; 4] = std::array::from_fn(|_| hi - (hi - lo) * rng.gen::<f64>());
            let p = RotatedDominoParams::new(theta)?;
            (SampleParams::RotatedDomino { theta }, zoo::rotated_domino_channel(&p)?)
        }
        Family::RandomUnitary => {
            let dims = config.dims.clone().unwrap_or_default();
            let nu = config.nu.as_deref().unwrap_or_default();
            let n_u = nu[index / config.samples];
            let c = zoo::random_unitary_channel(&dims, n_u, &mut rng)?;
            (SampleParams::RandomUnitary { dims, n_u }, c)
        }
        Family::Usd => {
            let (e1, e3) = config.etas();
            let p = UsdParams::sample(&mut rng, e1, e3)?;
            (SampleParams::Usd(p), zoo::usd_channel(&p)?)
        }
    };
    let verdict = gate_channel(&channel, config.rel_tol)?;
    Ok(SweepRow::new(index, params, &verdict))
}

/// Runs every sample in parallel; rows come back in sample order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    (0..config.total_samples())
        .into_par_iter()
        .map(|i| run_sample(config, i))
        .collect()
}

pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(config.header())?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Rank correlation with average ranks for ties. `None` when either input
/// is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}
