//! Maps between spaces: morphism checks, closeness, equivalences.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::space::{CheckResult, PointSet, Space};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceMap {
    pub domain: Arc<Space>,
    pub codomain: Arc<Space>,
    pub assignment: Vec<usize>,
}

impl SpaceMap {
    pub fn new(domain: Arc<Space>, codomain: Arc<Space>, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != domain.size() {
            return crate::error::domain(format!(
                "assignment has {} entries for a carrier of {} points",
                assignment.len(),
                domain.size()
            ));
        }
        if let Some(&y) = assignment.iter().find(|&&y| y >= codomain.size()) {
            return crate::error::domain(format!("assignment value {y} outside the codomain"));
        }
        if domain.group() != codomain.group() {
            return crate::error::domain("domain and codomain carry different groups");
        }
        Ok(Self { domain, codomain, assignment })
    }

    pub fn identity(space: Arc<Space>) -> Self {
        let assignment = (0..space.size()).collect();
        Self { domain: space.clone(), codomain: space, assignment }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SpaceMap) -> Result<SpaceMap> {
        if self.codomain.size() != other.domain.size() {
            return domain("maps do not compose");
        }
        let assignment = self.assignment.iter().map(|&y| other.assignment[y]).collect();
        Ok(SpaceMap { domain: self.domain.clone(), codomain: other.codomain.clone(), assignment })
    }

    pub fn equivariance_witness(&self) -> Option<String> {
        self.domain.action().is_equivariant_map(self.codomain.action(), &self.assignment).map(|(g, x)| {
            format!("f({}·{}) ≠ {}·f({})", self.domain.group().name(g), self.domain.name(x), self.domain.group().name(g), self.domain.name(x))
        })
    }

    pub fn controlled_witness(&self) -> Option<String> {
        let target = self.codomain.coarse_max();
        self.domain.coarse_max().pairs().find(|&(x, y)| !target.contains(self.assignment[x], self.assignment[y])).map(
            |(x, y)| {
                format!(
                    "({},{}) maps to ({},{}) outside the target structure",
                    self.domain.name(x),
                    self.domain.name(y),
                    self.codomain.name(self.assignment[x]),
                    self.codomain.name(self.assignment[y])
                )
            },
        )
    }

    pub fn properness_witness(&self) -> Option<String> {
        self.codomain.bornology().generators().iter().find_map(|b| {
            let pre: PointSet = (0..self.domain.size()).filter(|x| b.contains(&self.assignment[*x])).collect();
            (!self.domain.is_bounded(&pre)).then(|| format!("preimage of {} unbounded", self.codomain.fmt_set(b)))
        })
    }

    pub fn morphism_witness(&self) -> Option<String> {
        self.equivariance_witness().or_else(|| self.controlled_witness()).or_else(|| self.properness_witness())
    }

    pub fn is_morphism(&self) -> bool {
        self.morphism_witness().is_none()
    }
}

/// Pairs `(f(x), g(x))` all inside the codomain structure.
pub fn closeness_witness(f: &SpaceMap, g: &SpaceMap) -> Option<String> {
    let m = f.codomain.coarse_max();
    (0..f.domain.size()).find(|&x| !m.contains(f.apply(x), g.apply(x))).map(|x| {
        format!(
            "({}, {}) at {} not an entourage pair",
            f.codomain.name(f.apply(x)),
            f.codomain.name(g.apply(x)),
            f.domain.name(x)
        )
    })
}

pub fn are_close(f: &SpaceMap, g: &SpaceMap) -> bool {
    f.domain.size() == g.domain.size() && f.codomain.size() == g.codomain.size() && closeness_witness(f, g).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub carrier_bound: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { carrier_bound: 8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub equivariant: CheckResult,
    pub controlled: CheckResult,
    pub proper: CheckResult,
    /// Present when the second map has the same domain and codomain.
    pub close: Option<CheckResult>,
    pub equivalence: Verdict,
    pub equivalence_witness: Option<String>,
    /// The inverse up to closeness, supplied or found.
    pub inverse: Option<Vec<usize>>,
}

impl MapReport {
    pub fn is_morphism(&self) -> bool {
        self.equivariant.passed && self.controlled.passed && self.proper.passed
    }
}

fn same_space(a: &Space, b: &Space) -> bool {
    std::ptr::eq(a, b) || a == b
}

/// Checks that `(f, g)` is an equivalence pair; `None` on success.
pub fn equivalence_pair_witness(f: &SpaceMap, g: &SpaceMap) -> Option<String> {
    if let Some(w) = f.morphism_witness() {
        return Some(format!("f is not a morphism: {w}"));
    }
    if let Some(w) = g.morphism_witness() {
        return Some(format!("g is not a morphism: {w}"));
    }
    let gf = f.then(g).ok()?;
    if let Some(w) = closeness_witness(&gf, &SpaceMap::identity(f.domain.clone())) {
        return Some(format!("g∘f not close to id: {w}"));
    }
    let fg = g.then(f).ok()?;
    closeness_witness(&fg, &SpaceMap::identity(f.codomain.clone())).map(|w| format!("f∘g not close to id: {w}"))
}

pub fn analyze_map(f: &SpaceMap, g: Option<&SpaceMap>, cfg: &SearchConfig) -> Result<MapReport> {
    let mut report = MapReport {
        equivariant: CheckResult::from_witness("equivariant", f.equivariance_witness()),
        controlled: CheckResult::from_witness("controlled", f.controlled_witness()),
        proper: CheckResult::from_witness("proper", f.properness_witness()),
        close: None,
        equivalence: Verdict::False,
        equivalence_witness: None,
        inverse: None,
    };
    match g {
        Some(g) => {
            let parallel = same_space(&g.domain, &f.domain) && same_space(&g.codomain, &f.codomain);
            let opposite = same_space(&g.domain, &f.codomain) && same_space(&g.codomain, &f.domain);
            if !parallel && !opposite {
                return domain("second map matches neither direction of the first");
            }
            if parallel {
                report.close = Some(CheckResult::from_witness("close", closeness_witness(f, g)));
            }
            if opposite {
                let w = equivalence_pair_witness(f, g);
                report.equivalence = Verdict::from_bool(w.is_none());
                if w.is_none() {
                    report.inverse = Some(g.assignment.clone());
                }
                report.equivalence_witness = w;
            }
        }
        None => {
            if !report.is_morphism() {
                report.equivalence_witness = Some("not a morphism".into());
            } else if f.domain.size().max(f.codomain.size()) > cfg.carrier_bound {
                report.equivalence = Verdict::Unknown;
                report.equivalence_witness = Some(format!("carrier exceeds search bound {}", cfg.carrier_bound));
            } else {
                match search_inverse(f) {
                    Some(inv) => {
                        report.equivalence = Verdict::True;
                        report.inverse = Some(inv);
                    }
                    None => report.equivalence_witness = Some("no equivariant inverse up to closeness exists".into()),
                }
            }
        }
    }
    Ok(report)
}

/// Exhaustive backtracking over equivariant candidates `g: Y → X`, one choice per orbit of `Y`.
pub fn search_inverse(f: &SpaceMap) -> Option<Vec<usize>> {
    let x_space = &f.domain;
    let y_space = &f.codomain;
    let ya = y_space.action();
    let xa = x_space.action();
    let group = ya.group();
    let reps: Vec<usize> = ya.orbits().iter().map(|o| *o.iter().next().unwrap()).collect();
    let candidates: Vec<Vec<usize>> = reps
        .iter()
        .map(|&y| {
            let stab = ya.stabilizer(y);
            (0..x_space.size()).filter(|&x| stab.iter().all(|&s| xa.act(s, x) == x)).collect()
        })
        .collect();
    let mut g: Vec<Option<usize>> = vec![None; y_space.size()];

    fn consistent(f: &SpaceMap, g: &[Option<usize>]) -> bool {
        let mx = f.domain.coarse_max();
        let my = f.codomain.coarse_max();
        for (y1, &x1) in g.iter().enumerate() {
            let Some(x1) = x1 else { continue };
            if !my.contains(f.apply(x1), y1) {
                return false;
            }
            for (y2, &x2) in g.iter().enumerate() {
                if let Some(x2) = x2 {
                    if my.contains(y1, y2) && !mx.contains(x1, x2) {
                        return false;
                    }
                }
            }
        }
        (0..f.domain.size()).all(|x| g[f.apply(x)].is_none_or(|gx| mx.contains(gx, x)))
    }

    fn rec(
        i: usize,
        f: &SpaceMap,
        reps: &[usize],
        candidates: &[Vec<usize>],
        g: &mut Vec<Option<usize>>,
        group: &crate::group::FiniteGroup,
    ) -> bool {
        if i == reps.len() {
            return true;
        }
        let y = reps[i];
        let ya = f.codomain.action();
        let xa = f.domain.action();
        for &x in &candidates[i] {
            for h in group.elements() {
                g[ya.act(h, y)] = Some(xa.act(h, x));
            }
            if consistent(f, g) && rec(i + 1, f, reps, candidates, g, group) {
                return true;
            }
            for h in group.elements() {
                g[ya.act(h, y)] = None;
            }
        }
        false
    }

    if rec(0, f, &reps, &candidates, &mut g, group) {
        let inv: Vec<usize> = g.into_iter().map(|v| v.expect("every orbit assigned")).collect();
        let gmap = SpaceMap { domain: y_space.clone(), codomain: x_space.clone(), assignment: inv.clone() };
        equivalence_pair_witness(f, &gmap).is_none().then_some(inv)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::space::{Action, Bornology, Entourage};

    fn swap_space(n: usize, moved: usize) -> Arc<Space> {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let mut swap: Vec<usize> = (0..n).collect();
        if moved == 2 {
            swap.swap(0, 1);
        }
        let action = Action::new(z2, vec![(0..n).collect(), swap]).unwrap();
        let names = ["a", "b", "c"].iter().take(n).map(|s| s.to_string()).collect();
        Arc::new(Space::checked(names, action, vec![], Bornology::singletons(n)).unwrap())
    }

    #[test]
    fn identity_is_self_equivalence() {
        let x = swap_space(2, 2);
        let id = SpaceMap::identity(x);
        let report = analyze_map(&id, Some(&id), &SearchConfig::default()).unwrap();
        assert!(report.is_morphism());
        assert_eq!(report.equivalence, Verdict::True);
        assert!(report.close.unwrap().passed);
    }

    #[test]
    fn fixed_point_obstruction_has_no_inverse() {
        let x = swap_space(2, 2);
        let y = swap_space(3, 2);
        let f = SpaceMap::new(x, y, vec![0, 1]).unwrap();
        let report = analyze_map(&f, None, &SearchConfig::default()).unwrap();
        assert!(report.is_morphism());
        assert_eq!(report.equivalence, Verdict::False);
    }

    #[test]
    fn collapse_of_max_space_is_equivalence_by_search() {
        let g = Arc::new(FiniteGroup::trivial());
        let two = Arc::new(
            Space::checked(
                vec!["a".into(), "b".into()],
                Action::trivial(g.clone(), 2),
                vec![Entourage::full(2)],
                Bornology::maximal(2),
            )
            .unwrap(),
        );
        let pt = Arc::new(Space::point());
        let f = SpaceMap::new(two, pt, vec![0, 0]).unwrap();
        let report = analyze_map(&f, None, &SearchConfig::default()).unwrap();
        assert_eq!(report.equivalence, Verdict::True);
    }

    #[test]
    fn beyond_bound_is_unknown() {
        let g = Arc::new(FiniteGroup::trivial());
        let big = Arc::new(
            Space::checked((0..9).map(|i| i.to_string()).collect(), Action::trivial(g, 9), vec![], Bornology::singletons(9))
                .unwrap(),
        );
        let f = SpaceMap::identity(big);
        let report = analyze_map(&f, None, &SearchConfig::default()).unwrap();
        assert_eq!(report.equivalence, Verdict::Unknown);
    }
}
