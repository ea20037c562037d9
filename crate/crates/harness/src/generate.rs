//! Deterministic random spaces. Streams come from SplitMix64, so any implementation of
//! that generator reproduces them from the seed.

use std::sync::Arc;

use coarsex::constructions::GammaSet;
use coarsex::{Action, Bornology, Entourage, FiniteGroup, PointSet, Space};
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub min_size: usize,
    pub max_size: usize,
    /// Menu names accepted by `FiniteGroup::named`.
    pub groups: Vec<String>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { min_size: 1, max_size: 6, groups: ["trivial", "Z2", "Z3", "Z4", "S3"].map(String::from).to_vec() }
    }
}

const RETRIES: usize = 16;

/// The `index`-th seed of the stream started at `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut out = rng.next_u64();
    for _ in 0..index {
        out = rng.next_u64();
    }
    out
}

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Distinct subgroups, each generated by at most two elements.
pub fn subgroups(group: &FiniteGroup) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for a in group.elements() {
        for b in group.elements() {
            let mut h = group.generated_subgroup(&[a, b]);
            h.sort_unstable();
            if !out.contains(&h) {
                out.push(h);
            }
        }
    }
    out.sort_by_key(|h| (h.len(), h.clone()));
    out
}

/// A disjoint union of coset spaces `Γ/H` filling exactly `n` points.
pub fn random_action(group: &Arc<FiniteGroup>, n: usize, rng: &mut impl Rng) -> Action {
    let subs = subgroups(group);
    let mut perms: Vec<Vec<usize>> = vec![Vec::with_capacity(n); group.order()];
    let mut filled = 0;
    while filled < n {
        let fitting: Vec<&Vec<usize>> = subs.iter().filter(|h| group.order() / h.len() <= n - filled).collect();
        let h = fitting[rng.gen_range(0..fitting.len())];
        let orbit = GammaSet::cosets(group.clone(), h).expect("enumerated subgroup");
        for g in group.elements() {
            perms[g].extend(orbit.action.perm(g).iter().map(|&x| x + filled));
        }
        filled += orbit.size();
    }
    Action::new(group.clone(), perms).expect("union of coset actions")
}

fn random_entourage(action: &Action, rng: &mut impl Rng) -> Entourage {
    let n = action.carrier_size();
    let count = rng.gen_range(0..=n);
    let pairs: Vec<(usize, usize)> = (0..count).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    Entourage::from_pairs(n, pairs).expect("pairs in range").invariant_hull(action)
}

fn attempt(cfg: &GenConfig, rng: &mut SplitMix64) -> Option<Space> {
    let name = &cfg.groups[rng.gen_range(0..cfg.groups.len())];
    let group = Arc::new(FiniteGroup::named(name).ok()?);
    attempt_over(&group, cfg, rng)
}

fn attempt_over(group: &Arc<FiniteGroup>, cfg: &GenConfig, rng: &mut SplitMix64) -> Option<Space> {
    let n = rng.gen_range(cfg.min_size..=cfg.max_size.max(cfg.min_size));
    let action = random_action(group, n, rng);
    let generators: Vec<Entourage> = (0..rng.gen_range(1..=2)).map(|_| random_entourage(&action, rng)).collect();
    let bornology = match rng.gen_range(0..3) {
        0 => Bornology::singletons(n),
        1 => {
            let coarse = Entourage::saturate(&generators, &action).ok()?;
            Bornology::new((0..n).map(|x| coarse.thicken(&PointSet::from([x]))).collect())
        }
        _ => Bornology::maximal(n),
    };
    let names = (0..n).map(|i| format!("p{i}")).collect();
    let space = Space::new(names, action, generators, bornology).ok()?;
    space.validate().passed().then_some(space)
}

/// Always returns a valid space; falls back to a point after repeated failures.
pub fn gen_space(seed: u64, cfg: &GenConfig) -> Space {
    let mut rng = rng(seed);
    (0..RETRIES).find_map(|_| attempt(cfg, &mut rng)).unwrap_or_else(Space::point)
}

/// Like `gen_space` with the group fixed.
pub fn gen_space_over(seed: u64, group: &Arc<FiniteGroup>, cfg: &GenConfig) -> Space {
    let mut rng = rng(seed);
    (0..RETRIES).find_map(|_| attempt_over(group, cfg, &mut rng)).unwrap_or_else(|| Space::point_over(group.clone()))
}
