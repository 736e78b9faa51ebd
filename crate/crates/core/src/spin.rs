//! Spin-configuration enumeration and magnetization-based partitions.
//!
//! A chain of `N` spin-1/2 sites has `2^N` basis configurations. Bit `i` of a
//! configuration's index encodes site `i + 1`: set means up (`s = +1`), clear
//! means down (`s = -1`). Canonical basis order is ascending index.
//!
//! Configurations are grouped by their total magnetization `S_z` into disjoint
//! sub-spaces, one per expert network. The partition also fixes the
//! permutation between canonical coefficient order and the order obtained by
//! concatenating the experts' outputs.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest supported chain length; `2^24` coefficients is the memory guard.
pub const MAX_SPINS: usize = 24;

/// One of the `2^N` basis states of an `N`-site chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    index: u32,
    n_spins: u8,
}

impl SpinConfiguration {
    pub fn from_index(index: usize, n_spins: usize) -> Self {
        debug_assert!(n_spins >= 1 && n_spins <= MAX_SPINS);
        debug_assert!(index < (1usize << n_spins));
        SpinConfiguration {
            index: index as u32,
            n_spins: n_spins as u8,
        }
    }

    /// Canonical basis index: the unsigned integer value of the bit vector.
    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins as usize
    }

    /// Whether site `site` (0-based) points up.
    pub fn is_up(&self, site: usize) -> bool {
        debug_assert!(site < self.n_spins());
        self.index >> site & 1 == 1
    }

    /// Spin value `s = +1` (up) or `-1` (down) at site `site` (0-based).
    pub fn spin(&self, site: usize) -> i32 {
        if self.is_up(site) {
            1
        } else {
            -1
        }
    }

    /// The site values as 1.0/0.0 features, site 0 first.
    pub fn bit_features(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_spins()).map(|i| if self.is_up(i) { 1.0 } else { 0.0 })
    }

    pub fn magnetization(&self) -> Magnetization {
        let ups = self.index.count_ones() as i32;
        Magnetization {
            twice_sz: 2 * ups - self.n_spins as i32,
        }
    }
}

/// Total magnetization `S_z = (#up - #down) / 2`, stored as `2 S_z` so that
/// odd chains stay in integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Magnetization {
    twice_sz: i32,
}

impl Magnetization {
    pub fn from_twice_sz(twice_sz: i32) -> Self {
        Magnetization { twice_sz }
    }

    pub fn twice_sz(&self) -> i32 {
        self.twice_sz
    }

    pub fn as_f64(&self) -> f64 {
        self.twice_sz as f64 / 2.0
    }
}

/// All `2^N` configurations in ascending canonical index order.
pub fn enumerate_configs(n_spins: usize) -> Result<Vec<SpinConfiguration>> {
    if n_spins < 1 || n_spins > MAX_SPINS {
        return Err(Error::SpinCountOutOfRange {
            n_spins,
            max: MAX_SPINS,
        });
    }
    Ok((0..1usize << n_spins)
        .map(|i| SpinConfiguration::from_index(i, n_spins))
        .collect())
}

/// Magnetization of a configuration (free-function form of
/// [`SpinConfiguration::magnetization`]).
pub fn magnetization(config: SpinConfiguration) -> Magnetization {
    config.magnetization()
}

/// One row of the external partition-spec format: expert `expert` covers the
/// closed interval `[sz_min, sz_max]` of `S_z` values. An expert may appear in
/// several rows; its group is the union.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzInterval {
    pub expert: usize,
    pub sz_min: f64,
    pub sz_max: f64,
}

impl SzInterval {
    pub fn new(expert: usize, sz_min: f64, sz_max: f64) -> Self {
        SzInterval {
            expert,
            sz_min,
            sz_max,
        }
    }
}

/// Assignment of every configuration to exactly one expert, keyed by `S_z`,
/// together with the permutation between canonical order and gating order.
///
/// Gating order concatenates the experts' blocks in expert order; within a
/// block, configurations appear in ascending canonical index.
#[derive(Clone, Debug, PartialEq)]
pub struct SzPartition {
    n_spins: usize,
    /// Per expert: the sorted `2 S_z` values it owns.
    groups: Vec<Vec<i32>>,
    /// Configuration index -> expert id.
    expert_of_config: Vec<u16>,
    /// `permutation[k]` = canonical index of the `k`-th coefficient in gating order.
    permutation: Vec<u32>,
    /// Expert block offsets into gating order; `offsets[e]..offsets[e+1]`.
    offsets: Vec<usize>,
}

impl SzPartition {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn n_experts(&self) -> usize {
        self.groups.len()
    }

    pub fn expert_of_config(&self, index: usize) -> usize {
        self.expert_of_config[index] as usize
    }

    /// Number of configurations per expert.
    pub fn config_counts(&self) -> Vec<usize> {
        (0..self.n_experts())
            .map(|e| self.offsets[e + 1] - self.offsets[e])
            .collect()
    }

    /// Gating-order permutation; `permutation()[k]` is the canonical index of
    /// the `k`-th concatenated coefficient.
    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    /// Range of gating-order slots owned by expert `e`.
    pub fn block_range(&self, expert: usize) -> std::ops::Range<usize> {
        self.offsets[expert]..self.offsets[expert + 1]
    }

    /// Canonical indices of expert `e`'s configurations, ascending.
    pub fn block_configs(&self, expert: usize) -> &[u32] {
        &self.permutation[self.block_range(expert)]
    }

    /// The `2 S_z` values owned by expert `e`, sorted.
    pub fn group_twice_sz(&self, expert: usize) -> &[i32] {
        &self.groups[expert]
    }

    /// External interval form: one row per maximal run of achievable `S_z`
    /// values inside each group. Contiguous partitions produce one row per
    /// expert; random groupings may produce several.
    pub fn to_intervals(&self) -> Vec<SzInterval> {
        let mut rows = Vec::new();
        for (e, group) in self.groups.iter().enumerate() {
            let mut run_start = group[0];
            let mut prev = group[0];
            for &t in &group[1..] {
                if t != prev + 2 {
                    rows.push(SzInterval::new(e, run_start as f64 / 2.0, prev as f64 / 2.0));
                    run_start = t;
                }
                prev = t;
            }
            rows.push(SzInterval::new(e, run_start as f64 / 2.0, prev as f64 / 2.0));
        }
        rows
    }
}

/// The achievable `2 S_z` values for `n_spins` sites: `-N, -N+2, ..., N`.
fn achievable_twice_sz(n_spins: usize) -> Vec<i32> {
    let n = n_spins as i32;
    (0..=n).map(|ups| 2 * ups - n).collect()
}

fn finish_partition(n_spins: usize, groups: Vec<Vec<i32>>) -> SzPartition {
    let dim = 1usize << n_spins;
    // twice_sz + N maps the value range onto 0..=2N for direct lookup.
    let mut expert_of_twice = vec![u16::MAX; 2 * n_spins + 1];
    for (e, group) in groups.iter().enumerate() {
        for &t in group {
            expert_of_twice[(t + n_spins as i32) as usize] = e as u16;
        }
    }
    let mut expert_of_config = vec![0u16; dim];
    let mut counts = vec![0usize; groups.len()];
    for idx in 0..dim {
        let t = 2 * (idx as u32).count_ones() as i32 - n_spins as i32;
        let e = expert_of_twice[(t + n_spins as i32) as usize];
        expert_of_config[idx] = e;
        counts[e as usize] += 1;
    }
    let mut offsets = vec![0usize; groups.len() + 1];
    for e in 0..groups.len() {
        offsets[e + 1] = offsets[e] + counts[e];
    }
    let mut permutation = vec![0u32; dim];
    let mut cursor = offsets.clone();
    for idx in 0..dim {
        let e = expert_of_config[idx] as usize;
        permutation[cursor[e]] = idx as u32;
        cursor[e] += 1;
    }
    SzPartition {
        n_spins,
        groups,
        expert_of_config,
        permutation,
        offsets,
    }
}

/// Builds the partition described by `intervals`.
///
/// Every achievable `S_z` value must be covered exactly once and expert ids
/// must be the contiguous range `0..n_experts`. Violations report the
/// offending interval.
pub fn build_partition(n_spins: usize, intervals: &[SzInterval]) -> Result<SzPartition> {
    if n_spins < 1 || n_spins > MAX_SPINS {
        return Err(Error::SpinCountOutOfRange {
            n_spins,
            max: MAX_SPINS,
        });
    }
    if intervals.is_empty() {
        return Err(Error::InvalidPartition("empty interval list".into()));
    }
    let n_experts = intervals.iter().map(|iv| iv.expert).max().unwrap() + 1;
    let achievable = achievable_twice_sz(n_spins);
    let mut owner: Vec<Option<usize>> = vec![None; achievable.len()];
    let mut groups: Vec<Vec<i32>> = vec![Vec::new(); n_experts];
    for iv in intervals {
        let tmin = (2.0 * iv.sz_min).round() as i32;
        let tmax = (2.0 * iv.sz_max).round() as i32;
        if tmin > tmax {
            return Err(Error::InvalidPartition(format!(
                "interval {{expert: {}, sz_min: {}, sz_max: {}}} is empty",
                iv.expert, iv.sz_min, iv.sz_max
            )));
        }
        for (slot, &t) in achievable.iter().enumerate() {
            if t >= tmin && t <= tmax {
                if let Some(prev) = owner[slot] {
                    return Err(Error::InvalidPartition(format!(
                        "interval {{expert: {}, sz_min: {}, sz_max: {}}} overlaps expert {} at S_z = {}",
                        iv.expert,
                        iv.sz_min,
                        iv.sz_max,
                        prev,
                        t as f64 / 2.0
                    )));
                }
                owner[slot] = Some(iv.expert);
                groups[iv.expert].push(t);
            }
        }
    }
    for (slot, o) in owner.iter().enumerate() {
        if o.is_none() {
            return Err(Error::InvalidPartition(format!(
                "S_z = {} is not covered by any interval",
                achievable[slot] as f64 / 2.0
            )));
        }
    }
    for (e, group) in groups.iter_mut().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidPartition(format!(
                "expert {e} owns no achievable S_z value"
            )));
        }
        group.sort_unstable();
    }
    Ok(finish_partition(n_spins, groups))
}

/// Single-expert partition covering the whole `S_z` range.
pub fn whole_space_partition(n_spins: usize) -> SzPartition {
    let half = n_spins as f64 / 2.0;
    build_partition(n_spins, &[SzInterval::new(0, -half, half)])
        .expect("whole-space interval is always valid")
}

/// Assigns each achievable `S_z` value to one of `n_groups` groups uniformly
/// at random (redrawing until every group is non-empty). Groups are generally
/// non-contiguous; the result is deterministic for a given seed.
pub fn build_random_partition(n_spins: usize, n_groups: usize, seed: u64) -> Result<SzPartition> {
    if n_spins < 1 || n_spins > MAX_SPINS {
        return Err(Error::SpinCountOutOfRange {
            n_spins,
            max: MAX_SPINS,
        });
    }
    let achievable = achievable_twice_sz(n_spins);
    if n_groups == 0 || n_groups > achievable.len() {
        return Err(Error::TooManyGroups {
            n_groups,
            distinct: achievable.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<Vec<i32>> = vec![Vec::new(); n_groups];
    loop {
        for g in groups.iter_mut() {
            g.clear();
        }
        for &t in &achievable {
            let g = rng.random_range(0..n_groups);
            groups[g].push(t);
        }
        if groups.iter().all(|g| !g.is_empty()) {
            break;
        }
    }
    Ok(finish_partition(n_spins, groups))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermutationDirection {
    /// Canonical order -> gating order: `out[k] = values[p[k]]`.
    Forward,
    /// Gating order -> canonical order: `out[p[k]] = values[k]`.
    Inverse,
}

/// Applies the gating permutation to a coefficient vector.
pub fn apply_permutation(
    values: &[f64],
    permutation: &[u32],
    direction: PermutationDirection,
) -> Result<Vec<f64>> {
    if values.len() != permutation.len() {
        return Err(Error::LengthMismatch {
            expected: permutation.len(),
            got: values.len(),
        });
    }
    let mut out = vec![0.0; values.len()];
    match direction {
        PermutationDirection::Forward => {
            for (k, &p) in permutation.iter().enumerate() {
                out[k] = values[p as usize];
            }
        }
        PermutationDirection::Inverse => {
            for (k, &p) in permutation.iter().enumerate() {
                out[p as usize] = values[k];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut acc = 1usize;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    #[test]
    fn enumerate_base_cases() {
        let one = enumerate_configs(1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(!one[0].is_up(0));
        assert!(one[1].is_up(0));

        assert_eq!(enumerate_configs(4).unwrap().len(), 16);
        assert_eq!(enumerate_configs(10).unwrap().len(), 1024);
        assert!(enumerate_configs(0).is_err());
        assert!(enumerate_configs(MAX_SPINS + 1).is_err());
    }

    #[test]
    fn index_bit_round_trip() {
        for n in [1usize, 3, 6] {
            for c in enumerate_configs(n).unwrap() {
                let rebuilt = (0..n).fold(0usize, |acc, i| acc | (usize::from(c.is_up(i)) << i));
                assert_eq!(rebuilt, c.index());
            }
        }
    }

    #[test]
    fn magnetization_examples() {
        // All up at N=4: S_z = 2.
        let up4 = SpinConfiguration::from_index(0b1111, 4);
        assert_eq!(up4.magnetization().twice_sz(), 4);
        assert_eq!(up4.magnetization().as_f64(), 2.0);

        // Two up, two down: S_z = 0.
        let mixed = SpinConfiguration::from_index(0b0011, 4);
        assert_eq!(mixed.magnetization().twice_sz(), 0);

        // All down: S_z = -N/2 for any N.
        for n in [2usize, 5, 10] {
            let down = SpinConfiguration::from_index(0, n);
            assert_eq!(down.magnetization().twice_sz(), -(n as i32));
        }
    }

    #[test]
    fn popcount_counts_match_binomials() {
        for n in 1..=12usize {
            let mut counts = vec![0usize; n + 1];
            for c in enumerate_configs(n).unwrap() {
                counts[c.index().count_ones() as usize] += 1;
            }
            for (k, &count) in counts.iter().enumerate() {
                assert_eq!(count, binomial(n, k), "N={n} k={k}");
            }
        }
    }

    fn three_expert_intervals_n10() -> Vec<SzInterval> {
        vec![
            SzInterval::new(0, -5.0, 0.0),
            SzInterval::new(1, 1.0, 3.0),
            SzInterval::new(2, 4.0, 5.0),
        ]
    }

    #[test]
    fn ten_site_three_expert_counts() {
        let part = build_partition(10, &three_expert_intervals_n10()).unwrap();
        assert_eq!(part.config_counts(), vec![638, 375, 11]);
    }

    #[test]
    fn whole_space_single_expert() {
        let part = whole_space_partition(10);
        assert_eq!(part.config_counts(), vec![1024]);
        // One expert in ascending canonical order is the identity permutation.
        assert!(part.permutation().iter().enumerate().all(|(k, &p)| k == p as usize));
    }

    #[test]
    fn four_site_symmetric_counts() {
        let intervals = [
            SzInterval::new(0, -2.0, -1.0),
            SzInterval::new(1, 0.0, 0.0),
            SzInterval::new(2, 1.0, 2.0),
        ];
        let part = build_partition(4, &intervals).unwrap();
        // C(4,0)+C(4,1), C(4,2), C(4,3)+C(4,4).
        assert_eq!(part.config_counts(), vec![5, 6, 5]);
    }

    #[test]
    fn partition_validation_errors() {
        // Gap: S_z = 0 uncovered.
        let gap = [SzInterval::new(0, -2.0, -1.0), SzInterval::new(1, 1.0, 2.0)];
        let err = build_partition(4, &gap).unwrap_err();
        assert!(err.to_string().contains("S_z = 0"), "{err}");

        // Overlap at S_z = 1.
        let overlap = [
            SzInterval::new(0, -2.0, 1.0),
            SzInterval::new(1, 1.0, 2.0),
        ];
        let err = build_partition(4, &overlap).unwrap_err();
        assert!(err.to_string().contains("overlaps"), "{err}");

        assert!(build_partition(4, &[]).is_err());
    }

    #[test]
    fn expert_depends_only_on_sz() {
        let part = build_partition(10, &three_expert_intervals_n10()).unwrap();
        let mut by_sz = std::collections::HashMap::new();
        for c in enumerate_configs(10).unwrap() {
            let e = part.expert_of_config(c.index());
            let stored = by_sz.entry(c.magnetization().twice_sz()).or_insert(e);
            assert_eq!(*stored, e);
        }
    }

    #[test]
    fn blocks_cover_all_configs_disjointly() {
        let part = build_partition(10, &three_expert_intervals_n10()).unwrap();
        let mut seen = vec![false; 1 << 10];
        for e in 0..part.n_experts() {
            for &idx in part.block_configs(e) {
                assert!(!seen[idx as usize]);
                seen[idx as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn table_one_style_block_membership() {
        // N=4 decomposition {-2,-1} / {0} / {1,2}: the coefficient of
        // {up,up,down,down} (sites 0,1 up -> index 0b0011, S_z = 0) lands in
        // expert 1's block, and {up,down,down,down} in expert 0's.
        let intervals = [
            SzInterval::new(0, -2.0, -1.0),
            SzInterval::new(1, 0.0, 0.0),
            SzInterval::new(2, 1.0, 2.0),
        ];
        let part = build_partition(4, &intervals).unwrap();
        assert_eq!(part.expert_of_config(0b0011), 1);
        assert_eq!(part.expert_of_config(0b0001), 0);
        assert!(part.block_configs(1).contains(&0b0011));
    }

    #[test]
    fn random_partition_is_deterministic_and_total() {
        let a = build_random_partition(10, 3, 42).unwrap();
        let b = build_random_partition(10, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = build_random_partition(10, 3, 43).unwrap();
        assert_ne!(a.groups, c.groups);

        // Every achievable S_z appears in exactly one group.
        let mut all: Vec<i32> = (0..a.n_experts())
            .flat_map(|e| a.group_twice_sz(e).iter().copied())
            .collect();
        all.sort_unstable();
        assert_eq!(all, achievable_twice_sz(10));

        // Counts still sum to the full space.
        assert_eq!(a.config_counts().iter().sum::<usize>(), 1024);
    }

    #[test]
    fn random_partition_group_count_limits() {
        // N=4 has 5 distinct S_z values; 5 groups are forced to singletons.
        let p = build_random_partition(4, 5, 7).unwrap();
        assert!(p.group_twice_sz(0).len() == 1);
        assert_eq!(p.config_counts().iter().sum::<usize>(), 16);
        assert!(build_random_partition(4, 6, 7).is_err());

        // One group is the whole space.
        let whole = build_random_partition(4, 1, 0).unwrap();
        assert_eq!(whole.config_counts(), vec![16]);
    }

    #[test]
    fn permutation_round_trip() {
        let part = build_partition(6, &[
            SzInterval::new(0, -3.0, 0.0),
            SzInterval::new(1, 1.0, 3.0),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let v: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fwd = apply_permutation(&v, part.permutation(), PermutationDirection::Forward)
                .unwrap();
            let back =
                apply_permutation(&fwd, part.permutation(), PermutationDirection::Inverse).unwrap();
            assert_eq!(back, v);
        }
        let short = vec![0.0; 10];
        assert!(apply_permutation(&short, part.permutation(), PermutationDirection::Forward)
            .is_err());
    }

    #[test]
    fn interval_round_trip_including_random_groups() {
        let direct = build_partition(10, &three_expert_intervals_n10()).unwrap();
        let rebuilt = build_partition(10, &direct.to_intervals()).unwrap();
        assert_eq!(direct, rebuilt);

        let random = build_random_partition(10, 3, 11).unwrap();
        let rebuilt = build_partition(10, &random.to_intervals()).unwrap();
        assert_eq!(random, rebuilt);
    }
}
