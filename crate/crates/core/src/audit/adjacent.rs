use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::mechanisms::{CovarianceScaling, DataMatrix};
use crate::sampling::RngStream;

/// Two datasets that differ in exactly one column.
#[derive(Clone, Debug)]
pub struct AdjacentPair {
    base: DataMatrix,
    neighbor: DataMatrix,
    index: usize,
}

impl AdjacentPair {
    /// `neighbor` is `base` with column `index` replaced by `replacement`.
    pub fn new(base: DataMatrix, index: usize, replacement: &[f64]) -> Result<Self> {
        let neighbor = base.with_column(index, replacement)?;
        Ok(Self {
            base,
            neighbor,
            index,
        })
    }

    pub fn base(&self) -> &DataMatrix {
        &self.base
    }

    pub fn neighbor(&self) -> &DataMatrix {
        &self.neighbor
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The column of `base` that was replaced.
    pub fn v(&self) -> &[f64] {
        self.base.column(self.index)
    }

    /// Its replacement in `neighbor`.
    pub fn v_hat(&self) -> &[f64] {
        self.neighbor.column(self.index)
    }

    pub fn count(&self) -> usize {
        self.base.count()
    }
}

/// `Δ = A − Â = f·(v vᵀ − v̂ v̂ᵀ)` with `f = 1/n` (mean) or `1` (Gram).
pub fn delta_matrix(pair: &AdjacentPair, scaling: CovarianceScaling) -> SymmetricMatrix {
    let f = scaling.factor(pair.count());
    let (v, w) = (pair.v(), pair.v_hat());
    SymmetricMatrix::from_fn(v.len(), |i, j| f * (v[i] * v[j] - w[i] * w[j]))
        .expect("finite columns")
}

/// How the two differing columns are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRegime {
    /// Both uniform on the unit sphere.
    Sphere,
    /// Both uniform in the unit ball.
    Ball,
    /// One unit vector, one zero vector (order random).
    OneZero,
    /// `v̂ ≈ −v`, both near the sphere.
    NearAntipodal,
}

impl PairRegime {
    pub const ALL: [PairRegime; 4] = [
        PairRegime::Sphere,
        PairRegime::Ball,
        PairRegime::OneZero,
        PairRegime::NearAntipodal,
    ];

    /// Round-robin assignment used by the audits.
    pub fn for_trial(trial: u64) -> Self {
        Self::ALL[(trial % Self::ALL.len() as u64) as usize]
    }
}

pub fn random_unit_vector(d: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_ball_vector(d: usize, rng: &mut RngStream) -> Vec<f64> {
    let r = rng.uniform().powf(1.0 / d as f64);
    random_unit_vector(d, rng)
        .into_iter()
        .map(|x| x * r)
        .collect()
}

fn clamp_to_ball(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Draws the replaced column and its replacement under `regime`.
pub fn sample_differing_columns(
    d: usize,
    regime: PairRegime,
    rng: &mut RngStream,
) -> (Vec<f64>, Vec<f64>) {
    match regime {
        PairRegime::Sphere => (random_unit_vector(d, rng), random_unit_vector(d, rng)),
        PairRegime::Ball => (random_ball_vector(d, rng), random_ball_vector(d, rng)),
        PairRegime::OneZero => {
            let u = random_unit_vector(d, rng);
            if rng.uniform() < 0.5 {
                (u, vec![0.0; d])
            } else {
                (vec![0.0; d], u)
            }
        }
        PairRegime::NearAntipodal => {
            let v = random_unit_vector(d, rng);
            let spread = 0.1 * rng.uniform();
            let w: Vec<f64> = v
                .iter()
                .map(|x| -x + spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            (v, clamp_to_ball(w))
        }
    }
}

/// A random `d × n` dataset (columns uniform in the ball) and a neighbour
/// differing at a uniformly chosen column.
pub fn sample_adjacent_pair(
    d: usize,
    n: usize,
    regime: PairRegime,
    rng: &mut RngStream,
) -> Result<AdjacentPair> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!(
            "need d, n >= 1, got d = {d}, n = {n}"
        )));
    }
    let index = rng.random_range(0..n);
    let (v, w) = sample_differing_columns(d, regime, rng);
    let mut points = Vec::with_capacity(d * n);
    for i in 0..n {
        if i == index {
            points.extend_from_slice(&v);
        } else {
            points.extend(random_ball_vector(d, rng));
        }
    }
    let base = DataMatrix::from_column_major(d, n, points)?;
    AdjacentPair::new(base, index, &w)
}
