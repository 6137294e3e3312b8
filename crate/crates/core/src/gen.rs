//! Seeded instance generators for tests and benchmarks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::Instance;
use crate::rational::{rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeDistribution {
    /// Sizes q/denom with q uniform in 1..=denom.
    UniformGrid { denom: u32 },
    /// Sizes near 1/t, jittered on a fine grid.
    Clustered { t: u32 },
    /// A mix of heavy items (>= eps^2-ish) and dust below the threshold.
    HeavyDust {
        dust_denom: u32,
        heavy_denom: u32,
        dust_percent: u32,
    },
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub n: usize,
    pub group_count: usize,
    pub k_range: (u64, u64),
    pub dist: SizeDistribution,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("k range {0}..={1} is empty or starts below 1")]
    BadKRange(u64, u64),
    #[error("group count must be positive for a nonempty instance")]
    NoGroups,
    #[error("distribution parameter out of range: {0}")]
    BadDistribution(String),
}

pub fn generate_instance(spec: &GenSpec) -> Result<Instance, GenError> {
    let (klo, khi) = spec.k_range;
    if klo < 1 || khi < klo {
        return Err(GenError::BadKRange(klo, khi));
    }
    match &spec.dist {
        SizeDistribution::UniformGrid { denom } if *denom == 0 => {
            return Err(GenError::BadDistribution("denom = 0".into()))
        }
        SizeDistribution::Clustered { t } if *t < 2 => {
            return Err(GenError::BadDistribution(format!("t = {t} < 2")))
        }
        SizeDistribution::HeavyDust {
            dust_denom,
            heavy_denom,
            dust_percent,
        } if *dust_denom == 0 || *heavy_denom == 0 || *dust_percent > 100 => {
            return Err(GenError::BadDistribution("heavy+dust parameters".into()))
        }
        _ => {}
    }
    if spec.n == 0 {
        let (inst, _) = Instance::from_items(Vec::new(), &BTreeMap::new());
        return Ok(inst);
    }
    if spec.group_count == 0 {
        return Err(GenError::NoGroups);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut caps: BTreeMap<i64, u64> = BTreeMap::new();
    for g in 0..spec.group_count {
        caps.insert(g as i64 + 1, rng.gen_range(klo..=khi));
    }
    let mut items = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let size = draw_size(&mut rng, &spec.dist);
        let group = rng.gen_range(1..=spec.group_count as i64);
        items.push((size, group));
    }
    let (inst, _) = Instance::from_items(items, &caps);
    Ok(inst)
}

fn draw_size(rng: &mut ChaCha8Rng, dist: &SizeDistribution) -> Rational {
    match dist {
        SizeDistribution::UniformGrid { denom } => {
            let q = rng.gen_range(1..=*denom);
            rat(q as i64, *denom as i64)
        }
        SizeDistribution::Clustered { t } => {
            // 1/t jittered by up to 1/(8t) on a grid of 16t
            let grid = 16 * *t as i64;
            let jitter = rng.gen_range(-2i64..=2);
            rat((16 + jitter).max(1), grid)
        }
        SizeDistribution::HeavyDust {
            dust_denom,
            heavy_denom,
            dust_percent,
        } => {
            if rng.gen_range(0..100) < *dust_percent {
                let q = rng.gen_range(1..=*dust_denom);
                // dust: a fraction of 1/dust_denom-scale, kept tiny
                rat(1, q.max(1) as i64 + *dust_denom as i64)
            } else {
                let q = rng.gen_range(1..=*heavy_denom);
                rat(q as i64, *heavy_denom as i64)
            }
        }
    }
}
