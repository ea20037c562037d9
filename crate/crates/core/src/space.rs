//! Carriers, entourages, actions, bornologies and the finite Γ-bornological coarse space.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, CoarseError, Result};
use crate::group::FiniteGroup;

pub type PointSet = BTreeSet<usize>;

/// A relation on `{0..n}` stored as a dense bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Entourage {
    n: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for Entourage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

impl Entourage {
    pub fn empty(n: usize) -> Self {
        Self { n, bits: vec![false; n * n] }
    }

    pub fn diagonal(n: usize) -> Self {
        let mut e = Self::empty(n);
        for x in 0..n {
            e.insert(x, x);
        }
        e
    }

    pub fn full(n: usize) -> Self {
        Self { n, bits: vec![true; n * n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut e = Self::empty(n);
        for (x, y) in pairs {
            if x >= n || y >= n {
                return domain(format!("pair ({x},{y}) leaves a carrier of size {n}"));
            }
            e.insert(x, y);
        }
        Ok(e)
    }

    /// `{(x,y) : |x-y| <= width}` on `{0..n}`.
    pub fn band(n: usize, width: usize) -> Self {
        let mut e = Self::empty(n);
        for x in 0..n {
            for y in 0..n {
                if x.abs_diff(y) <= width {
                    e.insert(x, y);
                }
            }
        }
        e
    }

    pub fn carrier_size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.n + y]
    }

    pub fn insert(&mut self, x: usize, y: usize) -> bool {
        let slot = &mut self.bits[x * self.n + y];
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    pub fn remove(&mut self, x: usize, y: usize) -> bool {
        let slot = &mut self.bits[x * self.n + y];
        let had = *slot;
        *slot = false;
        had
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i / n, i % n))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn same_carrier(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return domain(format!("entourages over carriers of size {} and {}", self.n, other.n));
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// First pair of `self` missing from `other`.
    pub fn first_escape(&self, other: &Self) -> Option<(usize, usize)> {
        self.pairs().find(|&(x, y)| !other.contains(x, y))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_carrier(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect();
        Ok(Self { n: self.n, bits })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_carrier(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(Self { n: self.n, bits })
    }

    /// `U∘V = {(x,z) | ∃y: (x,y)∈U, (y,z)∈V}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_carrier(other)?;
        let n = self.n;
        let mut out = Self::empty(n);
        for x in 0..n {
            for y in 0..n {
                if self.contains(x, y) {
                    for z in 0..n {
                        if other.contains(y, z) {
                            out.insert(x, z);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn invert(&self) -> Self {
        let mut out = Self::empty(self.n);
        for (x, y) in self.pairs() {
            out.insert(y, x);
        }
        out
    }

    /// `U[B] = {x | ∃b∈B: (x,b)∈U}`.
    pub fn thicken(&self, set: &PointSet) -> PointSet {
        (0..self.n).filter(|&x| set.iter().any(|&b| self.contains(x, b))).collect()
    }

    pub fn contains_diagonal(&self) -> bool {
        (0..self.n).all(|x| self.contains(x, x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(x, y)| self.contains(y, x))
    }

    pub fn translate(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n);
        for (x, y) in self.pairs() {
            out.insert(perm[x], perm[y]);
        }
        out
    }

    pub fn is_invariant(&self, action: &Action) -> bool {
        action.group().elements().all(|g| {
            let p = action.perm(g);
            self.pairs().all(|(x, y)| self.contains(p[x], p[y]))
        })
    }

    /// `{(γx,γy)}` over all group elements.
    pub fn invariant_hull(&self, action: &Action) -> Self {
        let mut out = Self::empty(self.n);
        for g in action.group().elements() {
            let p = action.perm(g);
            for (x, y) in self.pairs() {
                out.insert(p[x], p[y]);
            }
        }
        out
    }

    /// Image under `f×f` into a carrier of size `m`.
    pub fn image(&self, f: &[usize], m: usize) -> Self {
        let mut out = Self::empty(m);
        for (x, y) in self.pairs() {
            out.insert(f[x], f[y]);
        }
        out
    }

    /// Pullback along `f×f` from a carrier of size `f.len()`.
    pub fn preimage(&self, f: &[usize]) -> Self {
        let n = f.len();
        let mut out = Self::empty(n);
        for x in 0..n {
            for y in 0..n {
                if self.contains(f[x], f[y]) {
                    out.insert(x, y);
                }
            }
        }
        out
    }

    /// Restriction to the points listed in `points`, reindexed by position.
    pub fn restrict(&self, points: &[usize]) -> Self {
        self.preimage(points)
    }

    /// Least relation containing the generators and the diagonal that is Γ-invariant,
    /// symmetric and closed under composition.
    pub fn saturate(generators: &[Entourage], action: &Action) -> Result<Self> {
        let n = action.carrier_size();
        for g in generators {
            if g.n != n {
                return domain(format!("generator over {} points, carrier has {n}", g.n));
            }
        }
        let mut uf = UnionFind::new(n);
        for gen in generators {
            for g in action.group().elements() {
                let p = action.perm(g);
                for (x, y) in gen.pairs() {
                    uf.union(p[x], p[y]);
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
        let mut out = Self::empty(n);
        for x in 0..n {
            for y in 0..n {
                if roots[x] == roots[y] {
                    out.insert(x, y);
                }
            }
        }
        Ok(out)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A left action by permutations: `perm(g)[x] = g·x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    group: Arc<FiniteGroup>,
    perms: Vec<Vec<usize>>,
}

impl Action {
    pub fn new(group: Arc<FiniteGroup>, perms: Vec<Vec<usize>>) -> Result<Self> {
        let action = Self::unchecked(group, perms)?;
        if let Some(w) = action.law_violation() {
            return Err(CoarseError::Validation { check: "action".into(), witness: w });
        }
        Ok(action)
    }

    /// Shape-checked only; the homomorphism law is reported by `law_violation`.
    pub fn unchecked(group: Arc<FiniteGroup>, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != group.order() {
            return domain(format!("{} permutations for a group of order {}", perms.len(), group.order()));
        }
        let n = perms.first().map_or(0, |p| p.len());
        for (g, p) in perms.iter().enumerate() {
            let set: BTreeSet<usize> = p.iter().copied().collect();
            if p.len() != n || set.len() != n || set.iter().any(|&x| x >= n) {
                return domain(format!("element {} does not act by a permutation", group.name(g)));
            }
        }
        Ok(Self { group, perms })
    }

    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Self {
        let perms = vec![(0..n).collect(); group.order()];
        Self { group, perms }
    }

    /// Left translation of the group on itself.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let perms = group.elements().map(|g| group.elements().map(|h| group.mul(g, h)).collect()).collect();
        Self { group, perms }
    }

    pub fn law_violation(&self) -> Option<String> {
        let n = self.carrier_size();
        let e = self.group.identity();
        if let Some(x) = (0..n).find(|&x| self.perms[e][x] != x) {
            return Some(format!("identity moves point {x}"));
        }
        for a in self.group.elements() {
            for b in self.group.elements() {
                let ab = self.group.mul(a, b);
                if let Some(x) = (0..n).find(|&x| self.perms[ab][x] != self.perms[a][self.perms[b][x]]) {
                    return Some(format!(
                        "({}{})·{x} differs from {}·({}·{x})",
                        self.group.name(a),
                        self.group.name(b),
                        self.group.name(a),
                        self.group.name(b)
                    ));
                }
            }
        }
        None
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn carrier_size(&self) -> usize {
        self.perms.first().map_or(0, |p| p.len())
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.perms[g][x]
    }

    pub fn act_set(&self, g: usize, set: &PointSet) -> PointSet {
        set.iter().map(|&x| self.perms[g][x]).collect()
    }

    /// `ΓB`.
    pub fn saturate_set(&self, set: &PointSet) -> PointSet {
        self.group.elements().flat_map(|g| set.iter().map(move |&x| (g, x))).map(|(g, x)| self.perms[g][x]).collect()
    }

    pub fn is_invariant_set(&self, set: &PointSet) -> bool {
        self.group.elements().all(|g| set.iter().all(|&x| set.contains(&self.perms[g][x])))
    }

    pub fn orbit(&self, x: usize) -> PointSet {
        self.group.elements().map(|g| self.perms[g][x]).collect()
    }

    /// Orbits in order of their least point.
    pub fn orbits(&self) -> Vec<PointSet> {
        let n = self.carrier_size();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for x in 0..n {
            if !seen[x] {
                let o = self.orbit(x);
                for &y in &o {
                    seen[y] = true;
                }
                out.push(o);
            }
        }
        out
    }

    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        self.group.elements().filter(|&g| self.perms[g][x] == x).collect()
    }

    pub fn is_free(&self) -> bool {
        (0..self.carrier_size()).all(|x| self.stabilizer(x).len() == 1)
    }

    pub fn is_equivariant_map(&self, other: &Action, f: &[usize]) -> Option<(usize, usize)> {
        for g in self.group.elements() {
            for x in 0..self.carrier_size() {
                if f[self.perms[g][x]] != other.perms[g][f[x]] {
                    return Some((g, x));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bornology {
    generators: Vec<PointSet>,
}

impl Bornology {
    pub fn new(generators: Vec<PointSet>) -> Self {
        Self { generators }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(|x| PointSet::from([x])).collect())
    }

    pub fn maximal(n: usize) -> Self {
        Self::new(vec![(0..n).collect()])
    }

    pub fn generators(&self) -> &[PointSet] {
        &self.generators
    }

    fn reach(&self) -> PointSet {
        self.generators.iter().flatten().copied().collect()
    }

    /// Bounded sets are the subsets of finite unions of generators.
    pub fn is_bounded(&self, set: &PointSet) -> bool {
        let reach = self.reach();
        set.iter().all(|x| reach.contains(x))
    }

    pub fn uncovered(&self, n: usize) -> Option<usize> {
        let reach = self.reach();
        (0..n).find(|x| !reach.contains(x))
    }

    pub fn is_singletons(&self) -> bool {
        self.generators.iter().all(|b| b.len() <= 1)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn pass(name: &str) -> Self {
        Self { name: name.into(), passed: true, witness: None }
    }

    pub fn fail(name: &str, witness: impl Into<String>) -> Self {
        Self { name: name.into(), passed: false, witness: Some(witness.into()) }
    }

    pub fn from_witness(name: &str, witness: Option<String>) -> Self {
        match witness {
            None => Self::pass(name),
            Some(w) => Self::fail(name, w),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn into_result(self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(CoarseError::Validation {
                check: c.name.clone(),
                witness: c.witness.clone().unwrap_or_default(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    names: Vec<String>,
    action: Action,
    coarse_max: Entourage,
    generators: Vec<Entourage>,
    bornology: Bornology,
}

impl Space {
    /// Saturates the generators; run `validate` (or use `checked`) for the remaining laws.
    pub fn new(names: Vec<String>, action: Action, generators: Vec<Entourage>, bornology: Bornology) -> Result<Self> {
        let coarse_max = Entourage::saturate(&generators, &action)?;
        Self::with_coarse_max(names, action, generators, coarse_max, bornology)
    }

    pub fn checked(names: Vec<String>, action: Action, generators: Vec<Entourage>, bornology: Bornology) -> Result<Self> {
        let space = Self::new(names, action, generators, bornology)?;
        space.validate().into_result()?;
        Ok(space)
    }

    /// Takes `coarse_max` as given, without saturating.
    pub fn with_coarse_max(
        names: Vec<String>,
        action: Action,
        generators: Vec<Entourage>,
        coarse_max: Entourage,
        bornology: Bornology,
    ) -> Result<Self> {
        let n = names.len();
        if action.carrier_size() != n {
            return domain(format!("action on {} points, carrier has {n}", action.carrier_size()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != n {
            return domain("duplicate point identifiers");
        }
        if coarse_max.carrier_size() != n || generators.iter().any(|g| g.carrier_size() != n) {
            return domain("entourage over the wrong carrier");
        }
        if let Some(x) = bornology.generators().iter().flatten().find(|&&x| x >= n) {
            return domain(format!("bornology mentions point {x} outside the carrier"));
        }
        Ok(Self { names, action, coarse_max, generators, bornology })
    }

    pub fn point() -> Self {
        let group = Arc::new(FiniteGroup::trivial());
        Self::checked(
            vec!["pt".into()],
            Action::trivial(group, 1),
            vec![Entourage::diagonal(1)],
            Bornology::maximal(1),
        )
        .expect("point is valid")
    }

    /// The point with trivial action by `group`.
    pub fn point_over(group: Arc<FiniteGroup>) -> Self {
        Self::checked(vec!["pt".into()], Action::trivial(group, 1), vec![Entourage::diagonal(1)], Bornology::maximal(1))
            .expect("point is valid")
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name_map(&self) -> HashMap<&str, usize> {
        self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.action.group()
    }

    pub fn coarse_max(&self) -> &Entourage {
        &self.coarse_max
    }

    pub fn generators(&self) -> &[Entourage] {
        &self.generators
    }

    pub fn bornology(&self) -> &Bornology {
        &self.bornology
    }

    pub fn all_points(&self) -> PointSet {
        (0..self.size()).collect()
    }

    pub fn is_bounded(&self, set: &PointSet) -> bool {
        self.bornology.is_bounded(set)
    }

    /// One step of the coarse structure: diagonal plus the Γ-translates of the generators and their inverses.
    pub fn step_entourage(&self) -> Entourage {
        let mut step = Entourage::diagonal(self.size());
        for g in &self.generators {
            let sym = g.union(&g.invert()).expect("same carrier");
            step = step.union(&sym.invariant_hull(&self.action)).expect("same carrier");
        }
        step
    }

    /// Coarse components (classes of the saturated relation), in order of least point.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for x in 0..n {
            if !seen[x] {
                let comp: Vec<usize> = (0..n).filter(|&y| self.coarse_max.contains(x, y)).collect();
                for &y in &comp {
                    seen[y] = true;
                }
                out.push(comp);
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.size();
        let m = &self.coarse_max;
        let mut checks = Vec::new();
        checks.push(CheckResult::from_witness("action homomorphism", self.action.law_violation()));
        checks.push(CheckResult::from_witness(
            "coarse structure contains diagonal",
            (0..n).find(|&x| !m.contains(x, x)).map(|x| format!("({0},{0}) missing", self.names[x])),
        ));
        checks.push(CheckResult::from_witness(
            "coarse structure symmetric",
            m.pairs()
                .find(|&(x, y)| !m.contains(y, x))
                .map(|(x, y)| format!("({},{}) present, inverse missing", self.names[x], self.names[y])),
        ));
        let square = m.compose(m).expect("same carrier");
        checks.push(CheckResult::from_witness(
            "coarse structure closed under composition",
            square.first_escape(m).map(|(x, y)| format!("({},{}) in U∘U only", self.names[x], self.names[y])),
        ));
        let invariance = self.group().elements().find_map(|g| {
            let p = self.action.perm(g);
            m.pairs()
                .find(|&(x, y)| !m.contains(p[x], p[y]))
                .map(|(x, y)| format!("{}·({},{}) leaves the structure", self.group().name(g), self.names[x], self.names[y]))
        });
        checks.push(CheckResult::from_witness("coarse structure Γ-invariant", invariance));
        let escaping = self.generators.iter().enumerate().find_map(|(i, gen)| {
            gen.first_escape(m).map(|(x, y)| format!("generator {i} pair ({},{})", self.names[x], self.names[y]))
        });
        checks.push(CheckResult::from_witness("generators inside coarse structure", escaping));
        checks.push(CheckResult::from_witness(
            "bornology covers carrier",
            self.bornology.uncovered(n).map(|x| format!("{} lies in no generator: does not cover carrier", self.names[x])),
        ));
        let born_inv = self.bornology.generators().iter().find_map(|b| {
            self.group().elements().find_map(|g| {
                let moved = self.action.act_set(g, b);
                (!self.is_bounded(&moved)).then(|| format!("{}·{} unbounded", self.group().name(g), self.fmt_set(b)))
            })
        });
        checks.push(CheckResult::from_witness("bornology Γ-invariant", born_inv));
        let compat = self.bornology.generators().iter().find_map(|b| {
            let thick = m.thicken(b);
            (!self.is_bounded(&thick)).then(|| format!("U[{}] = {} unbounded", self.fmt_set(b), self.fmt_set(&thick)))
        });
        checks.push(CheckResult::from_witness("coarse structure compatible with bornology", compat));
        ValidationReport { checks }
    }

    pub fn fmt_set(&self, set: &PointSet) -> String {
        let parts: Vec<&str> = set.iter().map(|&x| self.names[x].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// The subspace on an invariant subset, with its points listed in increasing order.
    /// Returns the subspace and the inclusion as a point list.
    pub fn subspace(&self, subset: &PointSet) -> Result<(Space, Vec<usize>)> {
        if let Some(&x) = subset.iter().find(|&&x| x >= self.size()) {
            return domain(format!("point {x} outside the carrier"));
        }
        if !self.action.is_invariant_set(subset) {
            return Err(CoarseError::Precondition(format!("subset {} is not Γ-invariant", self.fmt_set(subset))));
        }
        let points: Vec<usize> = subset.iter().copied().collect();
        let pos: HashMap<usize, usize> = points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let perms = self
            .group()
            .elements()
            .map(|g| points.iter().map(|&x| pos[&self.action.act(g, x)]).collect())
            .collect();
        let action = Action::new(self.group().clone(), perms)?;
        let generators = self.generators.iter().map(|g| g.restrict(&points)).collect();
        let coarse_max = self.coarse_max.restrict(&points);
        let bornology = Bornology::new(
            self.bornology
                .generators()
                .iter()
                .map(|b| b.iter().filter_map(|x| pos.get(x).copied()).collect::<PointSet>())
                .filter(|b| !b.is_empty())
                .collect(),
        );
        let names = points.iter().map(|&x| self.names[x].clone()).collect();
        let sub = Space::with_coarse_max(names, action, generators, coarse_max, bornology)?;
        Ok((sub, points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_action(n: usize) -> Action {
        Action::trivial(Arc::new(FiniteGroup::trivial()), n)
    }

    #[test]
    fn compose_single_pairs() {
        let u = Entourage::from_pairs(3, [(0, 1)]).unwrap();
        let v = Entourage::from_pairs(3, [(1, 2)]).unwrap();
        assert_eq!(u.compose(&v).unwrap(), Entourage::from_pairs(3, [(0, 2)]).unwrap());
    }

    #[test]
    fn thicken_band() {
        let band = Entourage::band(5, 1);
        assert_eq!(band.thicken(&PointSet::from([2])), PointSet::from([1, 2, 3]));
    }

    #[test]
    fn saturate_by_hand() {
        let gen = Entourage::from_pairs(3, [(0, 1)]).unwrap();
        let sat = Entourage::saturate(&[gen], &trivial_action(3)).unwrap();
        let expected = Entourage::from_pairs(3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(sat, expected);
    }

    #[test]
    fn out_of_range_pair_is_domain_error() {
        assert!(matches!(Entourage::from_pairs(2, [(0, 2)]), Err(CoarseError::Domain(_))));
    }

    #[test]
    fn swap_with_single_loop_validates() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let action = Action::new(z2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let gen = Entourage::from_pairs(2, [(0, 0)]).unwrap();
        let space = Space::new(vec!["a".into(), "b".into()], action, vec![gen], Bornology::maximal(2)).unwrap();
        assert!(space.coarse_max().contains(1, 1));
        assert!(space.validate().passed());
    }

    #[test]
    fn uncovered_bornology_fails() {
        let space = Space::new(
            vec!["a".into(), "b".into()],
            trivial_action(2),
            vec![],
            Bornology::new(vec![PointSet::from([0])]),
        )
        .unwrap();
        let report = space.validate();
        let failure = report.first_failure().unwrap();
        assert_eq!(failure.name, "bornology covers carrier");
        assert!(failure.witness.as_ref().unwrap().contains("does not cover carrier"));
    }

    #[test]
    fn unsaturated_structure_reports_witness() {
        let raw = Entourage::from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        let space = Space::with_coarse_max(
            vec!["a".into(), "b".into(), "c".into()],
            trivial_action(3),
            vec![],
            raw,
            Bornology::maximal(3),
        )
        .unwrap();
        let report = space.validate();
        assert_eq!(report.first_failure().unwrap().name, "coarse structure closed under composition");
    }

    #[test]
    fn point_validates() {
        assert!(Space::point().validate().passed());
    }

    #[test]
    fn subspace_rejects_non_invariant_subset() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let action = Action::new(z2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let space = Space::checked(vec!["a".into(), "b".into()], action, vec![], Bornology::maximal(2)).unwrap();
        assert!(space.subspace(&PointSet::from([0])).is_err());
    }
}
