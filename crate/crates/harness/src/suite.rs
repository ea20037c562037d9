//! Randomized checks of the coarse-homology axioms and the controlled-module laws.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use coarsex::constructions::{build, tensor, GammaSet, SpaceSpec};
use coarsex::controlled::{direct_sum, flasque_sigma_check, hom_basis, pushforward, CtrlObject};
use coarsex::flasque::{flasqueness_check, Endomorphism, ShiftFamily, SpaceDescription};
use coarsex::homology::{additivity_factorization, homology, hx_cont, induced_chain_map, mayer_vietoris, phi_psi, u_continuity, ChainConfig};
use coarsex::linalg::IntMatrix;
use coarsex::subsets::BigFamily;
use coarsex::{analyze_map, Entourage, FiniteGroup, PointSet, Result, SearchConfig, Space, SpaceMap, Verdict};
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::generate::{child_seed, gen_space, gen_space_over, rng, subgroups, GenConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Negates one entry of an ambient boundary matrix in the excision check.
    FlipBoundarySign,
    /// Removes one generator pair, with its translates, before saturation.
    DropEntouragePair,
    /// Replaces one cocycle entry by a non-unit.
    BreakCocycle,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub groups: Vec<String>,
    pub max_degree: usize,
    pub flasque_horizon: usize,
    pub sigma_horizon: usize,
    pub search_bound: usize,
    /// Largest middle complex for which the long exact sequence is checked on homology.
    pub dense_limit: usize,
    pub mutation: Option<Mutation>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let gen = GenConfig::default();
        Self {
            seed: 42,
            trials: 100,
            min_size: 1,
            max_size: 6,
            groups: gen.groups,
            max_degree: 2,
            flasque_horizon: 20,
            sigma_horizon: 10,
            search_bound: 8,
            dense_limit: 400,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail(String),
    Skip,
}

impl Outcome {
    fn check(ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail(witness())
        }
    }

    fn from_result(r: Result<Outcome>) -> Self {
        match r {
            Ok(o) => o,
            Err(coarsex::CoarseError::Resource { .. }) => Outcome::Skip,
            Err(e) => Outcome::Fail(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// No run of the check applied.
    Unknown,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CheckSummary {
    pub name: String,
    pub verdict: Status,
    pub runs: usize,
    pub failures: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub checks: Vec<CheckSummary>,
    /// SHA-256 of the configuration and checks; timings are left out.
    pub digest: String,
    pub timing_ms: BTreeMap<String, u128>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

type Results = Vec<(&'static str, Outcome, u128)>;

fn timed(out: &mut Results, name: &'static str, f: impl FnOnce() -> Result<Outcome>) {
    let start = Instant::now();
    let outcome = Outcome::from_result(f());
    out.push((name, outcome, start.elapsed().as_millis()));
}

/// Removes the first generator pair whose orbit carries a coarse-structure edge nothing else does.
fn drop_bridge(x: &Space) -> Option<(Space, String)> {
    let action = x.action();
    for (i, gen) in x.generators().iter().enumerate() {
        for (p, q) in gen.pairs().filter(|(p, q)| p != q) {
            let orbit = Entourage::from_pairs(x.size(), [(p, q), (q, p)]).ok()?.invariant_hull(action);
            let mut gens = x.generators().to_vec();
            for (a, b) in orbit.pairs() {
                gens[i].remove(a, b);
            }
            let smaller = Space::new(x.names().to_vec(), action.clone(), gens, x.bornology().clone()).ok()?;
            if smaller.coarse_max() != x.coarse_max() {
                return Some((smaller, format!("dropped ({},{}) from generator {i}", x.name(p), x.name(q))));
            }
        }
    }
    None
}

fn coarse_invariance(x: &Arc<Space>, cfg: &SuiteConfig, chain: &ChainConfig) -> Result<Outcome> {
    let top = cfg.max_degree;
    let two = build(&SpaceSpec::MaxMax(GammaSet::trivial(x.group().clone(), 2)))?;
    let cylinder = Arc::new(tensor(&two, x)?);
    let n = x.size();
    let (target, note) = match cfg.mutation {
        Some(Mutation::DropEntouragePair) => match drop_bridge(x) {
            Some((s, note)) => (Arc::new(s), note),
            None => (x.clone(), String::new()),
        },
        _ => (x.clone(), String::new()),
    };
    let projection = SpaceMap::new(cylinder.clone(), target.clone(), (0..2 * n).map(|p| p % n).collect())?;
    let section = SpaceMap::new(target.clone(), cylinder.clone(), (0..n).collect())?;
    let report = analyze_map(&projection, Some(&section), &SearchConfig { carrier_bound: cfg.search_bound })?;
    if report.equivalence != Verdict::True {
        return Ok(Outcome::Fail(format!("{note} projection not an equivalence: {}", report.equivalence_witness.unwrap_or_default()).trim().into()));
    }
    let (h_cyl, h_x) = (homology(&cylinder, top, chain)?, homology(&target, top, chain)?);
    if h_cyl != h_x {
        return Ok(Outcome::Fail(format!("H({{0,1}}⊗X) = {h_cyl:?} but H(X) = {h_x:?}")));
    }
    // p∘s = id on chains makes p_* onto, and an onto map between isomorphic finitely
    // generated groups is an isomorphism.
    let (_, _, p) = induced_chain_map(&projection, top, chain)?;
    let (_, _, s) = induced_chain_map(&section, top, chain)?;
    let identity = (0..=top).find(|&d| p[d].mul(&s[d]) != IntMatrix::identity(p[d].rows()));
    Ok(match identity {
        Some(d) => Outcome::Fail(format!("p∘s ≠ id on chains in degree {d}")),
        None => Outcome::Pass,
    })
}

/// A complementary pair: `Y` absorbs the coarse structure around `X∖Z`.
fn excision(x: &Space, cfg: &SuiteConfig, chain: &ChainConfig, rng: &mut impl Rng) -> Result<Outcome> {
    let orbits = x.action().orbits();
    let seed = orbits[rng.gen_range(0..orbits.len())].clone();
    let family = BigFamily::generated(x, &seed);
    let y = family.last().expect("generated families are nonempty").clone();
    let mut z: PointSet = x.all_points().difference(&y).copied().collect();
    for o in orbits.iter().filter(|o| o.is_subset(&y)) {
        if z.is_empty() || rng.gen_bool(0.5) {
            z.extend(o.iter().copied());
        }
    }
    let mut mv = mayer_vietoris(x, &z, &y, cfg.max_degree, chain)?;
    let mut note = String::new();
    if cfg.mutation == Some(Mutation::FlipBoundarySign) {
        if let Some(d) = (1..=cfg.max_degree).find(|&d| mv.ambient.flip_boundary_sign(d)) {
            note = format!("flipped a sign in ∂_{d}; ");
        }
    }
    let report = mv.certify(cfg.dense_limit);
    Ok(Outcome::check(report.holds(), || {
        let failed = [Some(&report.boundaries), Some(&report.chain_maps), Some(&report.short_exact), report.long_exact.as_ref()]
            .into_iter()
            .flatten()
            .find(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.witness.clone().unwrap_or_default()))
            .unwrap_or_default();
        format!("{note}Z = {}, Y = {}: {failed}", x.fmt_set(&z), x.fmt_set(&y))
    }))
}

fn additivity(x: &Space, cfg: &SuiteConfig, chain: &ChainConfig, rng: &mut impl Rng) -> Result<Outcome> {
    let gen = GenConfig { min_size: cfg.min_size, max_size: cfg.max_size.min(3), groups: Vec::new() };
    let mut family = vec![x.clone()];
    for _ in 0..rng.gen_range(1..=2) {
        family.push(gen_space_over(rng.gen(), x.group(), &gen));
    }
    let r = additivity_factorization(&family, cfg.max_degree, chain)?;
    Ok(Outcome::check(r.chain_isomorphism, || r.witness.unwrap_or_else(|| "restriction is not a chain isomorphism".into())))
}

fn controlled(x: &Arc<Space>, cfg: &SuiteConfig) -> Result<Outcome> {
    let n = x.size();
    let mut obj = CtrlObject::with_identity_cocycle(x.clone(), vec![1; n])?;
    if cfg.mutation == Some(Mutation::BreakCocycle) {
        let g = x.group().order() - 1;
        obj.cocycle[g][0] = IntMatrix::from_i64(&[vec![2]]);
    }
    if let Some(c) = obj.validate().first_failure() {
        return Ok(Outcome::Fail(format!("{}: {}", c.name, c.witness.clone().unwrap_or_default())));
    }
    let a = Arc::new(obj);
    let pair_orbits = {
        let mut seen = std::collections::BTreeSet::new();
        x.coarse_max()
            .pairs()
            .filter(|&(p, q)| {
                let orbit: Vec<(usize, usize)> = x.group().elements().map(|g| (x.action().act(g, p), x.action().act(g, q))).collect();
                let fresh = !seen.contains(&(p, q));
                seen.extend(orbit);
                fresh
            })
            .count()
    };
    let basis = hom_basis(&a, &a, x.coarse_max())?;
    if basis.len() != pair_orbits {
        return Ok(Outcome::Fail(format!("End(A) has rank {}, expected {pair_orbits} orbits of pairs", basis.len())));
    }
    let sum = direct_sum(&a, &a)?;
    let total = sum.inclusions[0].after(&sum.projections[0])?.plus(&sum.inclusions[1].after(&sum.projections[1])?)?;
    if total.matrix != IntMatrix::identity(2 * n) {
        return Ok(Outcome::Fail("ι₀π₀ + ι₁π₁ ≠ id on A ⊕ A".into()));
    }
    let pt = Arc::new(Space::point_over(x.group().clone()));
    let to_point = SpaceMap::new(x.clone(), pt, vec![0; n])?;
    let pushed = pushforward(&a, &to_point)?;
    Ok(Outcome::check(pushed.dims == vec![n], || format!("pushforward to a point has ranks {:?}", pushed.dims)))
}

fn flasque(x: &Arc<Space>) -> Result<Outcome> {
    let fam = ShiftFamily::new(x.clone(), vec![1]);
    let shift = Endomorphism::shift(1, x.size());
    let r = flasqueness_check(&SpaceDescription::Shift(fam.clone()), &shift, 5)?;
    if !r.verified_up_to_horizon() {
        return Ok(Outcome::Fail(format!("ℕ×X shift: {r:?}")));
    }
    let sigma = flasque_sigma_check(&SpaceDescription::Shift(fam), &shift, 3, 1)?;
    if !sigma.holds() {
        return Ok(Outcome::Fail(format!("ℕ×X swindle: {sigma:?}")));
    }
    let identity = flasque_sigma_check(&SpaceDescription::Finite(x.clone()), &Endomorphism::Finite((0..x.size()).collect()), 3, 1)?;
    Ok(Outcome::check(!identity.locally_finite.passed, || "identity on a nonempty finite space passed the swindle".into()))
}

fn run_trial(index: usize, cfg: &SuiteConfig) -> Results {
    let seed = child_seed(cfg.seed, index as u64);
    let gen = GenConfig { min_size: cfg.min_size, max_size: cfg.max_size, groups: cfg.groups.clone() };
    let x = Arc::new(gen_space(seed, &gen));
    let chain = ChainConfig::default();
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    timed(&mut out, "validate", || Ok(Outcome::check(x.validate().passed(), || format!("{:?}", x.validate().first_failure()))));
    timed(&mut out, "coarse_invariance", || coarse_invariance(&x, cfg, &chain));
    timed(&mut out, "mayer_vietoris", || excision(&x, cfg, &chain, &mut rng));
    timed(&mut out, "u_continuity", || {
        let r = u_continuity(&x, cfg.max_degree, &chain)?;
        Ok(Outcome::check(r.agrees, || format!("colimit {:?} ≠ direct {:?}", r.stages.last(), r.direct)))
    });
    timed(&mut out, "additivity", || additivity(&x, cfg, &chain, &mut rng));
    timed(&mut out, "hx_cont", || {
        let r = hx_cont(&x, cfg.max_degree, &chain)?;
        Ok(Outcome::check(r.agrees, || format!("colimit {:?} ≠ direct {:?}", r.colimit, r.direct)))
    });
    timed(&mut out, "flasqueness", || flasque(&x));
    timed(&mut out, "controlled", || controlled(&x, cfg));
    out
}

fn suite_level(cfg: &SuiteConfig) -> Results {
    let chain = ChainConfig::default();
    let mut out = Vec::new();
    timed(&mut out, "flasqueness", || {
        let half = SpaceDescription::Shift(ShiftFamily::half_line());
        let r = flasqueness_check(&half, &Endomorphism::shift(1, 1), cfg.flasque_horizon)?;
        let s = flasque_sigma_check(&half, &Endomorphism::shift(1, 1), cfg.sigma_horizon, 1)?;
        Ok(Outcome::check(r.verified_up_to_horizon() && s.holds(), || format!("half line: {r:?} {s:?}")))
    });
    for name in cfg.groups.iter().filter(|g| g.as_str() != "trivial") {
        timed(&mut out, "phi_psi", || {
            let group = Arc::new(FiniteGroup::named(name)?);
            let mut sets = vec![GammaSet::point(group.clone())];
            for h in subgroups(&group).into_iter().filter(|h| h.len() < group.order()) {
                sets.push(GammaSet::cosets(group.clone(), &h)?);
            }
            for set in &sets {
                let r = phi_psi(set, cfg.max_degree, &chain)?.report;
                if !r.holds() {
                    return Ok(Outcome::Fail(format!("{name} on {} points: {r:?}", set.size())));
                }
            }
            Ok(Outcome::Pass)
        });
    }
    out
}

fn summarize(all: Vec<Results>) -> (Vec<CheckSummary>, BTreeMap<String, u128>) {
    let mut checks: BTreeMap<&str, CheckSummary> = BTreeMap::new();
    let mut timing: BTreeMap<String, u128> = BTreeMap::new();
    for (run, results) in all.iter().enumerate() {
        for (name, outcome, ms) in results {
            *timing.entry(name.to_string()).or_default() += ms;
            let entry = checks.entry(name).or_insert_with(|| CheckSummary {
                name: name.to_string(),
                verdict: Status::Unknown,
                runs: 0,
                failures: 0,
                witness: None,
            });
            match outcome {
                Outcome::Skip => {}
                Outcome::Pass => entry.runs += 1,
                Outcome::Fail(w) => {
                    entry.runs += 1;
                    entry.failures += 1;
                    if entry.witness.is_none() {
                        entry.witness = Some(if run == 0 { format!("suite: {w}") } else { format!("trial {}: {w}", run - 1) });
                    }
                }
            }
        }
    }
    for c in checks.values_mut() {
        c.verdict = match (c.runs, c.failures) {
            (0, _) => Status::Unknown,
            (_, 0) => Status::Pass,
            _ => Status::Fail,
        };
    }
    (checks.into_values().collect(), timing)
}

/// Runs the suite; trials are independent and spread over the available threads.
pub fn axiom_suite(cfg: &SuiteConfig) -> Report {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cfg.trials.max(1));
    let mut per_trial: Vec<Option<Results>> = vec![None; cfg.trials];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..cfg.trials).step_by(workers).map(|i| (i, run_trial(i, cfg))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("trial thread panicked") {
                per_trial[i] = Some(r);
            }
        }
    });
    let mut all = vec![suite_level(cfg)];
    all.extend(per_trial.into_iter().map(|r| r.expect("every trial ran")));
    let (checks, timing_ms) = summarize(all);
    let hashed = serde_json::to_vec(&(cfg, &checks)).expect("report serializes");
    let digest = Sha256::digest(&hashed).iter().map(|b| format!("{b:02x}")).collect();
    Report { config: cfg.clone(), checks, digest, timing_ms }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> SuiteConfig {
        SuiteConfig { trials, max_size: 4, flasque_horizon: 5, sigma_horizon: 3, ..SuiteConfig::default() }
    }

    #[test]
    fn point_only_config_passes() {
        let cfg = SuiteConfig { min_size: 1, max_size: 1, groups: vec!["trivial".into()], ..small(5) };
        let r = axiom_suite(&cfg);
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn report_is_deterministic() {
        let a = axiom_suite(&small(6));
        let b = axiom_suite(&small(6));
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.checks, b.checks);
        assert!(a.passed(), "{:?}", a.checks);
    }

    #[test]
    fn broken_cocycle_is_caught() {
        let r = axiom_suite(&SuiteConfig { mutation: Some(Mutation::BreakCocycle), ..small(3) });
        let c = r.check("controlled").unwrap();
        assert_eq!(c.verdict, Status::Fail);
        assert!(c.witness.is_some());
    }
}
