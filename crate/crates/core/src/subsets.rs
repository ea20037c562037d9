//! Big families, nice subsets, complementary and coarsely excisive pairs, exhaustions.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{precondition, Result};
use crate::maps::{analyze_map, SearchConfig, SpaceMap, Verdict};
use crate::space::{PointSet, Space};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BigFamily {
    pub stages: Vec<PointSet>,
    pub stabilized: bool,
}

impl BigFamily {
    /// Stages `U^k[A]` for the one-step entourage `U`, until they stop growing.
    pub fn generated(space: &Space, seed: &PointSet) -> Self {
        let step = space.step_entourage();
        let mut stages = vec![seed.clone()];
        loop {
            let next = step.thicken(stages.last().unwrap());
            if &next == stages.last().unwrap() {
                break;
            }
            stages.push(next);
        }
        Self { stages, stabilized: true }
    }

    pub fn last(&self) -> Option<&PointSet> {
        self.stages.last()
    }

    /// Failure description when the stages are not monotone, invariant and absorbing.
    pub fn bigness_witness(&self, space: &Space) -> Option<String> {
        let m = space.coarse_max();
        for (i, s) in self.stages.iter().enumerate() {
            if !space.action().is_invariant_set(s) {
                return Some(format!("stage {i} not Γ-invariant"));
            }
            if i > 0 && !self.stages[i - 1].is_subset(s) {
                return Some(format!("stage {} not contained in stage {i}", i - 1));
            }
            let thick = m.thicken(s);
            if !self.stages.iter().any(|t| thick.is_subset(t)) {
                return Some(format!("no stage absorbs U[{}]", space.fmt_set(s)));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetReport {
    pub invariant: bool,
    pub generated: BigFamily,
    pub absorbs: bool,
    pub nice: Verdict,
    pub nice_witness: Option<String>,
    pub complementary: Option<PairVerdict>,
    pub excisive: Option<ExcisiveVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    pub holds: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcisiveVerdict {
    pub holds: bool,
    pub covers: bool,
    pub intersection_condition: bool,
    pub nice_condition: Verdict,
    /// Least `k` with `U[Y]∩U[Z] ⊆ U^k[Y∩Z]` for the one-step entourage `U`.
    pub step_power: Option<usize>,
    pub witness: Option<String>,
}

/// Niceness of `A`: the inclusion `A → M[A]` is an equivalence, where `M` is the maximal entourage.
pub fn niceness(space: &Space, a: &PointSet, cfg: &SearchConfig) -> (Verdict, Option<String>) {
    let thick = space.coarse_max().thicken(a);
    let (Ok((sub_a, inc_a)), Ok((sub_t, inc_t))) = (space.subspace(a), space.subspace(&thick)) else {
        return (Verdict::False, Some("subset not Γ-invariant".into()));
    };
    let assignment: Vec<usize> =
        inc_a.iter().map(|x| inc_t.iter().position(|y| y == x).expect("A ⊆ M[A]")).collect();
    let f = match SpaceMap::new(Arc::new(sub_a), Arc::new(sub_t), assignment) {
        Ok(f) => f,
        Err(e) => return (Verdict::False, Some(e.to_string())),
    };
    match analyze_map(&f, None, cfg) {
        Ok(r) => (r.equivalence, r.equivalence_witness),
        Err(e) => (Verdict::False, Some(e.to_string())),
    }
}

pub fn complementary_pair(space: &Space, z: &PointSet, fam: &BigFamily) -> PairVerdict {
    let fail = |w: String| PairVerdict { holds: false, witness: Some(w) };
    if !space.action().is_invariant_set(z) {
        return fail("Z not Γ-invariant".into());
    }
    if let Some(w) = fam.bigness_witness(space) {
        return fail(w);
    }
    let all = space.all_points();
    if fam.stages.iter().any(|y| y.union(z).copied().collect::<PointSet>() == all) {
        PairVerdict { holds: true, witness: None }
    } else {
        fail("no stage Y with Y ∪ Z = X".into())
    }
}

pub fn excisive_pair(space: &Space, y: &PointSet, z: &PointSet, cfg: &SearchConfig) -> ExcisiveVerdict {
    let m = space.coarse_max();
    let covers = y.union(z).count() == space.size();
    let inter: PointSet = y.intersection(z).copied().collect();
    let my = m.thicken(y);
    let mz = m.thicken(z);
    let lhs: PointSet = my.intersection(&mz).copied().collect();
    let rhs = m.thicken(&inter);
    let intersection_condition = lhs.is_subset(&rhs);
    let nice_set: PointSet = my.intersection(z).copied().collect();
    let (nice_condition, nice_w) = niceness(space, &nice_set, cfg);
    let step = space.step_entourage();
    let step_lhs: PointSet = step.thicken(y).intersection(&step.thicken(z)).copied().collect();
    let mut power = None;
    let mut cur = inter.clone();
    for k in 1..=space.size().max(1) {
        cur = step.thicken(&cur);
        if step_lhs.is_subset(&cur) {
            power = Some(k);
            break;
        }
    }
    let invariant = space.action().is_invariant_set(y) && space.action().is_invariant_set(z);
    let witness = if !invariant {
        Some("Y or Z not Γ-invariant".into())
    } else if !covers {
        Some("Y ∪ Z ≠ X".into())
    } else if !intersection_condition {
        let x = lhs.difference(&rhs).next().copied().unwrap();
        Some(format!("{} ∈ U[Y]∩U[Z] but not in U[Y∩Z]", space.name(x)))
    } else if nice_condition != Verdict::True {
        Some(format!("U[Y]∩Z not nice: {}", nice_w.unwrap_or_default()))
    } else {
        None
    };
    ExcisiveVerdict {
        holds: witness.is_none(),
        covers,
        intersection_condition,
        nice_condition,
        step_power: power,
        witness,
    }
}

pub fn classify_subsets(
    space: &Space,
    a: &PointSet,
    z: Option<&PointSet>,
    fam: Option<&BigFamily>,
    cfg: &SearchConfig,
) -> Result<SubsetReport> {
    if let Some(&x) = a.iter().chain(z.into_iter().flatten()).find(|&&x| x >= space.size()) {
        return crate::error::domain(format!("point {x} outside the carrier"));
    }
    let generated = BigFamily::generated(space, a);
    let last = generated.last().unwrap();
    let absorbs = &space.coarse_max().thicken(last) == last;
    let (nice, nice_witness) = niceness(space, a, cfg);
    let complementary = match (z, fam) {
        (Some(z), Some(fam)) => Some(complementary_pair(space, z, fam)),
        _ => None,
    };
    let excisive = z.map(|z| excisive_pair(space, a, z, cfg));
    Ok(SubsetReport {
        invariant: space.action().is_invariant_set(a),
        generated,
        absorbs,
        nice,
        nice_witness,
        complementary,
        excisive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionReport {
    pub locally_finite: Vec<bool>,
    pub exhausts: bool,
    pub trapping: bool,
    /// Whether trapping was decided by enumerating all invariant subsets.
    pub trapping_enumerated: bool,
    pub co_gamma_bounded: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ExhaustionConfig {
    pub orbit_enumeration_bound: usize,
}

impl Default for ExhaustionConfig {
    fn default() -> Self {
        Self { orbit_enumeration_bound: 16 }
    }
}

/// Bounded for the Γ-completion: contained in a finite union of sets `ΓB`.
pub fn is_gamma_bounded(space: &Space, set: &PointSet) -> bool {
    let reach: PointSet = space
        .bornology()
        .generators()
        .iter()
        .flat_map(|b| space.action().saturate_set(b))
        .collect();
    set.is_subset(&reach)
}

pub fn classify_exhaustion(space: &Space, fam: &[PointSet], cfg: &ExhaustionConfig) -> Result<ExhaustionReport> {
    for (i, member) in fam.iter().enumerate() {
        if !space.action().is_invariant_set(member) {
            return precondition(format!("member {i} is not Γ-invariant"));
        }
    }
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            let union: PointSet = fam[i].union(&fam[j]).copied().collect();
            if !fam.iter().any(|k| union.is_subset(k)) {
                return precondition(format!("members {i} and {j} have no common upper bound"));
            }
        }
    }
    // every subset of a finite carrier meets each bounded set in a finite set
    let locally_finite = vec![true; fam.len()];
    let all = space.all_points();
    let exhausts = fam.iter().flatten().copied().collect::<PointSet>() == all;
    let orbits = space.action().orbits();
    let contained = |f: &PointSet| fam.iter().any(|m| f.is_subset(m));
    let (trapping, trapping_enumerated) = if orbits.len() <= cfg.orbit_enumeration_bound {
        let ok = (0u64..(1u64 << orbits.len())).all(|mask| {
            let f: PointSet = orbits
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, o)| o.iter().copied())
                .collect();
            contained(&f)
        });
        (ok, true)
    } else {
        (contained(&all), false)
    };
    let co_gamma_bounded = exhausts
        && fam.iter().any(|m| {
            let complement: PointSet = all.difference(m).copied().collect();
            is_gamma_bounded(space, &complement)
        });
    Ok(ExhaustionReport { locally_finite, exhausts, trapping, trapping_enumerated, co_gamma_bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::space::{Action, Bornology, Entourage};

    fn band(n: usize) -> Space {
        let g = Arc::new(FiniteGroup::trivial());
        Space::checked(
            (0..n).map(|i| i.to_string()).collect(),
            Action::trivial(g, n),
            vec![Entourage::band(n, 1)],
            Bornology::singletons(n),
        )
        .unwrap()
    }

    #[test]
    fn whole_carrier_stabilizes_immediately_and_is_nice() {
        let x = band(4);
        let r = classify_subsets(&x, &x.all_points(), None, None, &SearchConfig::default()).unwrap();
        assert_eq!(r.generated.stages.len(), 1);
        assert_eq!(r.nice, Verdict::True);
        assert!(r.absorbs);
    }

    #[test]
    fn band_stages_grow_by_one() {
        let x = band(5);
        let r = classify_subsets(&x, &PointSet::from([0]), None, None, &SearchConfig::default()).unwrap();
        let expect: Vec<PointSet> = (0..5).map(|k| (0..=k).collect()).collect();
        assert_eq!(r.generated.stages, expect);
    }

    #[test]
    fn overlapping_halves_are_excisive() {
        let x = band(5);
        let y: PointSet = (0..=2).collect();
        let z: PointSet = (2..5).collect();
        let r = classify_subsets(&x, &y, Some(&z), None, &SearchConfig::default()).unwrap();
        let ex = r.excisive.unwrap();
        assert!(ex.holds, "{:?}", ex.witness);
        assert_eq!(ex.step_power, Some(1));
    }

    #[test]
    fn singleton_exhaustion_traps_iff_union_is_everything() {
        let g = Arc::new(FiniteGroup::trivial());
        let x = Space::checked(
            vec!["a".into(), "b".into(), "c".into()],
            Action::trivial(g, 3),
            vec![],
            Bornology::maximal(3),
        )
        .unwrap();
        let partial = vec![PointSet::from([0]), PointSet::from([0, 1])];
        let full = vec![PointSet::from([0]), PointSet::from([0, 1]), PointSet::from([0, 1, 2])];
        let cfg = ExhaustionConfig::default();
        let r = classify_exhaustion(&x, &partial, &cfg).unwrap();
        assert!(!r.trapping && !r.co_gamma_bounded);
        let r = classify_exhaustion(&x, &full, &cfg).unwrap();
        assert!(r.trapping && r.co_gamma_bounded);
    }

    #[test]
    fn incomparable_family_rejected() {
        let x = band(3);
        let fam = vec![PointSet::from([0]), PointSet::from([1])];
        assert!(classify_exhaustion(&x, &fam, &ExhaustionConfig::default()).is_err());
    }
}
