//! Instance reduction and reconstruction. Reduction picks a size scale whose
//! interval carries the least total size, moves all heavy items of
//! low-pressure groups into one cap-relaxed union group, and yields a
//! structured instance (few groups hold large items). Reconstruction undoes
//! this: union-group items are redistributed by a shifting argument (Fill),
//! cap violations are resolved by discarding light items, and everything
//! discarded is repacked by the greedy packer.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::config::{validate_packing, Configuration, Packing};
use crate::constants::{Cap, ConstantSet};
use crate::greedy::{greedy, GreedyError};
use crate::instance::{Group, GroupIdx, Instance, ItemId};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct ReductionMeta {
    /// Pivot scale w: heavy means size >= eps^w, medium lies in
    /// [eps^(w+1), eps^w), light below.
    pub pivot: u32,
    pub heavy: Vec<ItemId>,
    pub medium: Vec<ItemId>,
    /// Original groups keeping their caps (high heavy/medium pressure).
    pub large_groups: Vec<GroupIdx>,
    /// Heavy items of the remaining groups, pooled into the union group.
    pub union_items: Vec<ItemId>,
    /// Medium items of the remaining groups.
    pub omega: Vec<ItemId>,
    /// Union items chunked by non-increasing size for the shifting argument.
    pub shifting_partition: Vec<Vec<ItemId>>,
}

impl ReductionMeta {
    pub fn is_union_item(&self, item: ItemId) -> bool {
        self.union_items.binary_search(&item).is_ok()
    }

    pub fn is_omega_item(&self, item: ItemId) -> bool {
        self.omega.binary_search(&item).is_ok()
    }

    pub fn is_light(&self, inst: &Instance, eps: &Rational, item: ItemId) -> bool {
        *inst.size(item) < crate::rational::pow(eps, self.pivot as i64 + 1)
    }
}

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("reduced instance is not structured: {groups} groups hold large items, budget {budget}")]
    NotStructured { groups: usize, budget: String },
    #[error("fill broke its invariant: {0}")]
    FillContract(String),
    #[error("cap violation not resolvable by discarding light items (bin {bin}, group {group})")]
    Undischargeable { bin: usize, group: i64 },
    #[error("greedy failed on the discarded instance: {0}")]
    Greedy(#[from] GreedyError),
    #[error("reconstructed packing invalid: {0}")]
    Invalid(String),
}

/// The scale whose size interval [eps^(i+1), eps^i) carries the least total
/// item size; ties pick the smallest index.
pub fn minimal_pivot(inst: &Instance, consts: &ConstantSet) -> u32 {
    let eps = consts.eps();
    let mut best: Option<(Rational, u32)> = None;
    for i in 2..=consts.max_pivot() {
        let hi = crate::rational::pow(eps, i as i64);
        let lo = crate::rational::pow(eps, i as i64 + 1);
        let mass = inst
            .item_ids()
            .filter(|&it| *inst.size(it) >= lo && *inst.size(it) < hi)
            .fold(Rational::zero(), |a, it| a + inst.size(it));
        match &best {
            None => best = Some((mass, i)),
            Some((m, _)) if mass < *m => best = Some((mass, i)),
            _ => {}
        }
    }
    best.expect("pivot range nonempty").1
}

pub fn reduce(
    inst: &Instance,
    consts: &ConstantSet,
) -> Result<(Instance, ReductionMeta), ReduceError> {
    let eps = consts.eps();
    let w = minimal_pivot(inst, consts);
    let heavy_cut = crate::rational::pow(eps, w as i64);
    let medium_cut = crate::rational::pow(eps, w as i64 + 1);
    let heavy: Vec<ItemId> = inst
        .item_ids()
        .filter(|&i| *inst.size(i) >= heavy_cut)
        .collect();
    let medium: Vec<ItemId> = inst
        .item_ids()
        .filter(|&i| *inst.size(i) >= medium_cut && *inst.size(i) < heavy_cut)
        .collect();

    // group pressure: heavy + medium members, ties by group order
    let mut pressure: Vec<(usize, GroupIdx)> = inst
        .groups()
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let count = group
                .members
                .iter()
                .filter(|&&i| *inst.size(i) >= medium_cut)
                .count();
            (count, g)
        })
        .collect();
    pressure.sort_by(|(ca, ga), (cb, gb)| cb.cmp(ca).then(ga.cmp(gb)));
    let kappa = consts.kappa(w).min_with(inst.groups().len() as u64) as usize;
    let mut large_groups: Vec<GroupIdx> = pressure[..kappa].iter().map(|(_, g)| *g).collect();
    large_groups.sort_unstable();

    let is_large_group = {
        let mut v = vec![false; inst.groups().len()];
        for &g in &large_groups {
            v[g] = true;
        }
        v
    };
    let union_items: Vec<ItemId> = heavy
        .iter()
        .copied()
        .filter(|&i| !is_large_group[inst.group_of(i)])
        .collect();
    let omega: Vec<ItemId> = medium
        .iter()
        .copied()
        .filter(|&i| !is_large_group[inst.group_of(i)])
        .collect();

    // reduced group structure: large groups unchanged, small groups lose
    // their heavy items, the union group absorbs them with a free cap
    let mut groups: Vec<Group> = Vec::new();
    let mut reduced_idx_of: BTreeMap<GroupIdx, usize> = BTreeMap::new();
    for (g, group) in inst.groups().iter().enumerate() {
        let keeps_items = is_large_group[g]
            || group
                .members
                .iter()
                .any(|&i| !union_items.binary_search(&i).is_ok());
        if !keeps_items {
            continue;
        }
        reduced_idx_of.insert(g, groups.len());
        groups.push(Group {
            external_id: group.external_id,
            cap: group.cap,
            members: Vec::new(),
        });
    }
    let union_idx = if union_items.is_empty() {
        None
    } else {
        let fresh_id = inst
            .groups()
            .iter()
            .map(|g| g.external_id)
            .max()
            .unwrap_or(0)
            + 1;
        groups.push(Group {
            external_id: fresh_id,
            cap: union_items.len() as u64 + 1,
            members: Vec::new(),
        });
        Some(groups.len() - 1)
    };
    let group_of: Vec<GroupIdx> = inst
        .item_ids()
        .map(|i| {
            if union_items.binary_search(&i).is_ok() {
                union_idx.expect("union group exists")
            } else {
                reduced_idx_of[&inst.group_of(i)]
            }
        })
        .collect();
    let reduced = inst.with_regrouped_items(group_of, groups);

    // structured: only large groups and the union group may hold large items
    let eps2 = eps * eps;
    let holders = reduced
        .groups()
        .iter()
        .filter(|g| g.members.iter().any(|&i| *reduced.size(i) >= eps2))
        .count();
    if !consts.structured_cap().admits(holders) {
        return Err(ReduceError::NotStructured {
            groups: holders,
            budget: format!("{}", consts.structured_cap()),
        });
    }

    // shifting partition of the union items (already in non-increasing size order)
    let shifting_partition = chunk_union(&union_items, consts.beta(w));

    Ok((
        reduced,
        ReductionMeta {
            pivot: w,
            heavy,
            medium,
            large_groups,
            union_items,
            omega,
            shifting_partition,
        },
    ))
}

fn chunk_union(union_items: &[ItemId], beta: Cap) -> Vec<Vec<ItemId>> {
    if union_items.is_empty() {
        return Vec::new();
    }
    let n = union_items.len() as u64;
    let chunk = match beta {
        Cap::Finite(b) => n.div_ceil(b.max(1)).max(1) as usize,
        Cap::Unbounded => 1,
    };
    union_items
        .chunks(chunk)
        .map(|c| c.to_vec())
        .collect()
}

/// Redistributes union-group items over the bins of a packing of the reduced
/// instance: an item of chunk j may enter bin i as long as bin i gave up more
/// chunk-(j-1) items than it has received chunk-j ones, and the original
/// group cap of the item is respected. Returns the per-bin additions and the
/// leftover items.
pub fn fill(
    inst: &Instance,
    meta: &ReductionMeta,
    packing: &Packing,
) -> Result<(Vec<Vec<ItemId>>, Vec<ItemId>), ReduceError> {
    let m = packing.bins.len();
    let q = meta.shifting_partition.len();
    let mut chunk_of: BTreeMap<ItemId, usize> = BTreeMap::new();
    for (j, chunk) in meta.shifting_partition.iter().enumerate() {
        for &item in chunk {
            chunk_of.insert(item, j);
        }
    }
    // how many chunk-j items each bin of the packing holds
    let mut held = vec![vec![0usize; q]; m];
    for (i, bin) in packing.bins.iter().enumerate() {
        for item in bin.iter() {
            if let Some(&j) = chunk_of.get(&item) {
                held[i][j] += 1;
            }
        }
    }

    let mut additions: Vec<Vec<ItemId>> = vec![Vec::new(); m];
    let mut added = vec![vec![0usize; q]; m];
    let mut group_added: Vec<BTreeMap<GroupIdx, u64>> = vec![BTreeMap::new(); m];
    let mut rest: Vec<ItemId> = meta.union_items.clone();

    loop {
        let mut moved = false;
        'scan: for j in 1..q {
            for i in 0..m {
                if added[i][j] >= held[i][j - 1] {
                    continue;
                }
                let candidate = rest
                    .iter()
                    .copied()
                    .find(|item| {
                        chunk_of[item] == j && {
                            let g = inst.group_of(*item);
                            let used = group_added[i].get(&g).copied().unwrap_or(0);
                            used < inst.group(g).cap
                        }
                    });
                if let Some(item) = candidate {
                    let g = inst.group_of(item);
                    *group_added[i].entry(g).or_insert(0) += 1;
                    added[i][j] += 1;
                    additions[i].push(item);
                    rest.retain(|&x| x != item);
                    moved = true;
                    break 'scan;
                }
            }
        }
        if !moved {
            break;
        }
    }

    // shifting conditions: nothing from the first chunk moves, and chunk-j
    // additions never exceed the bin's chunk-(j-1) holdings
    for i in 0..m {
        if added[i].first().copied().unwrap_or(0) != 0 {
            return Err(ReduceError::FillContract(format!(
                "bin {i} received first-chunk items"
            )));
        }
        for j in 1..q {
            if added[i][j] > held[i][j - 1] {
                return Err(ReduceError::FillContract(format!(
                    "bin {i} chunk {j} over quota"
                )));
            }
        }
        for (g, &count) in &group_added[i] {
            if count > inst.group(*g).cap {
                return Err(ReduceError::FillContract(format!(
                    "bin {i} exceeds group {} cap",
                    inst.group(*g).external_id
                )));
            }
        }
    }
    for i in 0..m {
        additions[i].sort_unstable();
    }
    rest.sort_unstable();
    Ok((additions, rest))
}

#[derive(Debug)]
pub struct ReconstructOutcome {
    pub packing: Packing,
    /// Union items that could not be shifted into existing bins.
    pub unplaced: Vec<ItemId>,
    /// Light items discarded to restore group caps.
    pub discarded: Vec<ItemId>,
    pub greedy_bins: usize,
}

/// Turns a packing of the reduced instance into one of the original instance.
pub fn reconstruct(
    inst: &Instance,
    consts: &ConstantSet,
    meta: &ReductionMeta,
    structured_packing: &Packing,
) -> Result<ReconstructOutcome, ReduceError> {
    let eps = consts.eps();
    let (additions, rest) = fill(inst, meta, structured_packing)?;

    // rebuild bins: strip union and omega items, add the shifted ones,
    // then append a singleton bin per leftover union item
    let mut bins: Vec<Vec<ItemId>> = Vec::new();
    for (i, bin) in structured_packing.bins.iter().enumerate() {
        let mut items: Vec<ItemId> = bin
            .iter()
            .filter(|&it| !meta.is_union_item(it) && !meta.is_omega_item(it))
            .collect();
        items.extend_from_slice(&additions[i]);
        bins.push(items);
    }
    for &item in &rest {
        bins.push(vec![item]);
    }

    // resolve cap violations by discarding the smallest light items
    let mut discarded: Vec<ItemId> = Vec::new();
    for (i, bin) in bins.iter_mut().enumerate() {
        for (g, group) in inst.groups().iter().enumerate() {
            let count = bin.iter().filter(|&&it| inst.group_of(it) == g).count() as u64;
            if count <= group.cap {
                continue;
            }
            let mut need = count - group.cap;
            // largest ids = smallest sizes first
            let victims: Vec<ItemId> = bin
                .iter()
                .copied()
                .filter(|&it| inst.group_of(it) == g && meta.is_light(inst, eps, it))
                .rev()
                .collect();
            if (victims.len() as u64) < need {
                return Err(ReduceError::Undischargeable {
                    bin: i,
                    group: group.external_id,
                });
            }
            let mut kill: Vec<ItemId> = Vec::new();
            for v in victims {
                if need == 0 {
                    break;
                }
                kill.push(v);
                need -= 1;
            }
            bin.retain(|it| !kill.contains(it));
            discarded.extend(kill);
        }
    }
    discarded.sort_unstable();

    // repack the omega and discarded items on a fresh sub-instance with the
    // original sizes and caps
    let mut pool: Vec<ItemId> = meta.omega.clone();
    pool.extend_from_slice(&discarded);
    pool.sort_unstable();
    let greedy_packed: Vec<Vec<ItemId>> = if pool.is_empty() {
        Vec::new()
    } else {
        let mut caps = BTreeMap::new();
        let items: Vec<(Rational, i64)> = pool
            .iter()
            .map(|&it| {
                let g = inst.group_of(it);
                caps.insert(inst.group(g).external_id, inst.group(g).cap);
                (inst.size(it).clone(), inst.group(g).external_id)
            })
            .collect();
        let (sub, positions) = Instance::from_items(items, &caps);
        let packed = greedy(&sub, eps)?;
        packed
            .bins
            .iter()
            .map(|b| b.iter().map(|i| pool[positions[i.idx()]]).collect())
            .collect()
    };
    let greedy_bins = greedy_packed.len();
    bins.extend(greedy_packed);

    let packing = Packing {
        bins: bins
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(Configuration::new)
            .collect(),
    };
    validate_packing(inst, &packing, true).map_err(|e| ReduceError::Invalid(e.to_string()))?;
    Ok(ReconstructOutcome {
        packing,
        unplaced: rest,
        discarded,
        greedy_bins,
    })
}
