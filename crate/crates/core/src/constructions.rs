//! Named spaces and the finite limits and colimits between them.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, precondition, CoarseError, Result};
use crate::group::{FiniteGroup, GroupHom};
use crate::maps::{SearchConfig, SpaceMap};
use crate::space::{Action, Bornology, Entourage, PointSet, Space};
use crate::subsets::{excisive_pair, ExcisiveVerdict};

/// A finite Γ-set with point names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaSet {
    pub names: Vec<String>,
    pub action: Action,
}

impl GammaSet {
    pub fn new(names: Vec<String>, action: Action) -> Result<Self> {
        if names.len() != action.carrier_size() {
            return domain("point names and action disagree on the carrier size");
        }
        Ok(Self { names, action })
    }

    pub fn point(group: Arc<FiniteGroup>) -> Self {
        Self { names: vec!["pt".into()], action: Action::trivial(group, 1) }
    }

    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Self {
        Self { names: (0..n).map(|i| i.to_string()).collect(), action: Action::trivial(group, n) }
    }

    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        Self { names: group.names().to_vec(), action: Action::regular(group) }
    }

    /// `Γ/H` with left translation; cosets ordered by least element, named `gH`.
    pub fn cosets(group: Arc<FiniteGroup>, sub: &[usize]) -> Result<Self> {
        if !group.is_subgroup(sub) {
            return domain(format!("{sub:?} is not a subgroup"));
        }
        let cosets = group.left_cosets(sub);
        let mut class = vec![0; group.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &g in c {
                class[g] = i;
            }
        }
        let perms = group.elements().map(|g| cosets.iter().map(|c| class[group.mul(g, c[0])]).collect()).collect();
        let names = cosets.iter().map(|c| format!("{}H", group.name(c[0]))).collect();
        Ok(Self { names, action: Action::new(group, perms)? })
    }

    /// `k` disjoint copies of the regular action.
    pub fn free(group: Arc<FiniteGroup>, copies: usize) -> Self {
        let n = group.order();
        let perms = group
            .elements()
            .map(|g| (0..copies * n).map(|p| (p / n) * n + group.mul(g, p % n)).collect())
            .collect();
        let names = (0..copies * n).map(|p| format!("{}.{}", p / n, group.name(p % n))).collect();
        Self { names, action: Action::new(group, perms).expect("regular action") }
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone)]
pub enum SpaceSpec {
    CanMin { group: Arc<FiniteGroup> },
    MinMin(GammaSet),
    MaxMax(GammaSet),
    MinMax(GammaSet),
    Metric { set: GammaSet, distances: Vec<Vec<f64>>, scales: Vec<f64> },
    Recoarsen { base: Space, entourage: Entourage },
    Subspace { base: Space, subset: PointSet },
}

pub fn build(spec: &SpaceSpec) -> Result<Space> {
    match spec {
        SpaceSpec::CanMin { group } => {
            let set = GammaSet::regular(group.clone());
            let n = set.size();
            // Γ({e,g}×{e,g}) over all g already generates Γ(B×B) for every finite B
            let generators = group
                .elements()
                .map(|g| {
                    let b = [group.identity(), g];
                    Entourage::from_pairs(n, b.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))))
                        .map(|e| e.invariant_hull(&set.action))
                })
                .collect::<Result<Vec<_>>>()?;
            Space::checked(set.names, set.action, generators, Bornology::singletons(n))
        }
        SpaceSpec::MinMin(set) => {
            let n = set.size();
            Space::checked(set.names.clone(), set.action.clone(), vec![Entourage::diagonal(n)], Bornology::singletons(n))
        }
        SpaceSpec::MaxMax(set) => {
            let n = set.size();
            Space::checked(set.names.clone(), set.action.clone(), vec![Entourage::full(n)], Bornology::maximal(n))
        }
        SpaceSpec::MinMax(set) => {
            let n = set.size();
            Space::checked(set.names.clone(), set.action.clone(), vec![Entourage::diagonal(n)], Bornology::maximal(n))
        }
        SpaceSpec::Metric { set, distances, scales } => build_metric(set, distances, scales),
        SpaceSpec::Recoarsen { base, entourage } => recoarsen(base, entourage),
        SpaceSpec::Subspace { base, subset } => {
            let (sub, _) = base.subspace(subset)?;
            sub.validate().into_result()?;
            Ok(sub)
        }
    }
}

fn build_metric(set: &GammaSet, d: &[Vec<f64>], scales: &[f64]) -> Result<Space> {
    let n = set.size();
    if d.len() != n || d.iter().any(|row| row.len() != n) {
        return domain(format!("distance matrix must be {n}x{n}"));
    }
    for x in 0..n {
        if d[x][x] != 0.0 {
            return precondition(format!("d({0},{0}) ≠ 0", set.names[x]));
        }
        for y in 0..n {
            if d[x][y] != d[y][x] || d[x][y] < 0.0 || d[x][y].is_nan() {
                return precondition(format!("distance between {} and {} not symmetric and non-negative", set.names[x], set.names[y]));
            }
            for g in set.action.group().elements() {
                if d[set.action.act(g, x)][set.action.act(g, y)] != d[x][y] {
                    return precondition(format!("metric not invariant under {}", set.action.group().name(g)));
                }
            }
        }
    }
    let within = |r: f64| Entourage::from_pairs(n, (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| d[x][y] <= r));
    let generators = scales.iter().map(|&r| within(r)).collect::<Result<Vec<_>>>()?;
    let top = scales.iter().copied().fold(0.0, f64::max);
    let balls = (0..n).map(|x| (0..n).filter(|&y| d[x][y] <= top).collect()).collect();
    Space::checked(set.names.clone(), set.action.clone(), generators, Bornology::new(balls))
}

fn recoarsen(base: &Space, u: &Entourage) -> Result<Space> {
    if u.carrier_size() != base.size() {
        return domain("entourage over the wrong carrier");
    }
    if !u.is_invariant(base.action()) {
        return precondition("recoarsening entourage is not Γ-invariant");
    }
    let space = Space::new(base.names().to_vec(), base.action().clone(), vec![u.clone()], base.bornology().clone())?;
    for b in space.bornology().generators() {
        let thick = space.coarse_max().thicken(b);
        if !space.is_bounded(&thick) {
            return Err(CoarseError::Construction(format!(
                "U[{}] = {} is unbounded",
                space.fmt_set(b),
                space.fmt_set(&thick)
            )));
        }
    }
    space.validate().into_result()?;
    Ok(space)
}

fn same_group(spaces: &[&Space]) -> Result<Arc<FiniteGroup>> {
    let first = spaces.first().ok_or_else(|| CoarseError::Precondition("empty limit or colimit requested".into()))?;
    if spaces.iter().any(|s| s.group() != first.group()) {
        return precondition("spaces carry different groups");
    }
    Ok(first.group().clone())
}

fn product_action(x: &Space, y: &Space) -> Result<Action> {
    let group = x.group().clone();
    let ny = y.size();
    let perms = group
        .elements()
        .map(|g| {
            (0..x.size() * ny)
                .map(|p| x.action().act(g, p / ny) * ny + y.action().act(g, p % ny))
                .collect()
        })
        .collect();
    Action::new(group, perms)
}

fn product_entourage(u: &Entourage, v: &Entourage) -> Entourage {
    let (nx, ny) = (u.carrier_size(), v.carrier_size());
    let mut e = Entourage::empty(nx * ny);
    for (x, x2) in u.pairs() {
        for (y, y2) in v.pairs() {
            e.insert(x * ny + y, x2 * ny + y2);
        }
    }
    e
}

fn product_parts(x: &Space, y: &Space) -> Result<(Vec<String>, Action, Vec<Entourage>)> {
    same_group(&[x, y])?;
    let names = x
        .names()
        .iter()
        .flat_map(|a| y.names().iter().map(move |b| format!("({a},{b})")))
        .collect();
    let action = product_action(x, y)?;
    let generators = vec![
        product_entourage(x.coarse_max(), &Entourage::diagonal(y.size())),
        product_entourage(&Entourage::diagonal(x.size()), y.coarse_max()),
    ];
    Ok((names, action, generators))
}

fn product_set(a: &PointSet, b: &PointSet, ny: usize) -> PointSet {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * ny + y)).collect()
}

/// `X ⊗ Y`: product coarse structure, bornology generated by `B×B′`. Point `(x,y)` has index `x·|Y|+y`.
pub fn tensor(x: &Space, y: &Space) -> Result<Space> {
    let (names, action, generators) = product_parts(x, y)?;
    let ny = y.size();
    let born = x
        .bornology()
        .generators()
        .iter()
        .flat_map(|a| y.bornology().generators().iter().map(move |b| product_set(a, b, ny)))
        .collect();
    Space::checked(names, action, generators, Bornology::new(born))
}

/// `X × Y`: bornology generated by `B×Y` and `X×B′`.
pub fn cartesian(x: &Space, y: &Space) -> Result<Space> {
    let (names, action, generators) = product_parts(x, y)?;
    let ny = y.size();
    let mut born: Vec<PointSet> =
        x.bornology().generators().iter().map(|a| product_set(a, &y.all_points(), ny)).collect();
    born.extend(y.bornology().generators().iter().map(|b| product_set(&x.all_points(), b, ny)));
    Space::checked(names, action, generators, Bornology::new(born))
}

struct DisjointParts {
    names: Vec<String>,
    action: Action,
    generators: Vec<Entourage>,
    offsets: Vec<usize>,
}

fn disjoint_parts(family: &[Space]) -> Result<DisjointParts> {
    let refs: Vec<&Space> = family.iter().collect();
    let group = same_group(&refs)?;
    let mut offsets = Vec::new();
    let mut total = 0;
    for s in family {
        offsets.push(total);
        total += s.size();
    }
    let names = family
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.names().iter().map(move |n| format!("{i}:{n}")))
        .collect();
    let perms = group
        .elements()
        .map(|g| {
            family
                .iter()
                .zip(&offsets)
                .flat_map(|(s, &o)| (0..s.size()).map(move |x| o + s.action().act(g, x)))
                .collect()
        })
        .collect();
    let action = Action::new(group, perms)?;
    let generators = family
        .iter()
        .zip(&offsets)
        .map(|(s, &o)| {
            let mut e = Entourage::empty(total);
            for (x, y) in s.coarse_max().pairs() {
                e.insert(o + x, o + y);
            }
            e
        })
        .collect();
    Ok(DisjointParts { names, action, generators, offsets })
}

fn shift_set(b: &PointSet, offset: usize) -> PointSet {
    b.iter().map(|&x| x + offset).collect()
}

/// Free union: bornology generated by the bounded sets of the pieces.
pub fn free_union(family: &[Space]) -> Result<(Space, Vec<usize>)> {
    let parts = disjoint_parts(family)?;
    let born = family
        .iter()
        .zip(&parts.offsets)
        .flat_map(|(s, &o)| s.bornology().generators().iter().map(move |b| shift_set(b, o)))
        .collect();
    let space = Space::checked(parts.names, parts.action, parts.generators, Bornology::new(born))?;
    Ok((space, parts.offsets))
}

/// Coproduct: bornology generated by unions with one bounded set from each piece.
pub fn coproduct(family: &[Space]) -> Result<(Space, Vec<usize>)> {
    let parts = disjoint_parts(family)?;
    let mut born: Vec<PointSet> = vec![PointSet::new()];
    for (s, &o) in family.iter().zip(&parts.offsets) {
        born = born
            .iter()
            .flat_map(|acc| s.bornology().generators().iter().map(move |b| acc.union(&shift_set(b, o)).copied().collect()))
            .collect();
    }
    let space = Space::checked(parts.names, parts.action, parts.generators, Bornology::new(born))?;
    Ok((space, parts.offsets))
}

/// `{(x,y) : a(x) = b(y)}` inside the cartesian product, with both projections.
pub fn fiber_product(a: &SpaceMap, b: &SpaceMap) -> Result<(Space, SpaceMap, SpaceMap)> {
    if a.codomain.as_ref() != b.codomain.as_ref() {
        return domain("maps into different spaces");
    }
    let prod = cartesian(&a.domain, &b.domain)?;
    let ny = b.domain.size();
    let subset: PointSet = (0..prod.size()).filter(|p| a.apply(p / ny) == b.apply(p % ny)).collect();
    let (sub, points) = prod.subspace(&subset)?;
    sub.validate().into_result()?;
    let sub = Arc::new(sub);
    let pa = SpaceMap::new(sub.clone(), a.domain.clone(), points.iter().map(|p| p / ny).collect())?;
    let pb = SpaceMap::new(sub.clone(), b.domain.clone(), points.iter().map(|p| p % ny).collect())?;
    Ok((Arc::try_unwrap(sub).unwrap_or_else(|s| (*s).clone()), pa, pb))
}

#[derive(Debug, Clone)]
pub struct Pushout {
    pub space: Arc<Space>,
    pub from_y: SpaceMap,
    pub from_z: SpaceMap,
    pub excisive: ExcisiveVerdict,
    /// Whether the colimit structure reproduces the ambient one.
    pub matches_ambient: bool,
}

/// Pushout of `Y ← Y∩Z → Z` for a coarsely excisive pair, on carrier `Y ∪ Z = X`.
pub fn pushout_excisive(x: &Space, y: &PointSet, z: &PointSet, cfg: &SearchConfig) -> Result<Pushout> {
    let verdict = excisive_pair(x, y, z, cfg);
    if !verdict.holds {
        return Err(CoarseError::Precondition(format!(
            "pair is not coarsely excisive: {}",
            verdict.witness.clone().unwrap_or_default()
        )));
    }
    let n = x.size();
    let restrict = |part: &PointSet| {
        let mut e = Entourage::empty(n);
        for (p, q) in x.coarse_max().pairs() {
            if part.contains(&p) && part.contains(&q) {
                e.insert(p, q);
            }
        }
        e
    };
    let generators = vec![restrict(y), restrict(z)];
    let born = x
        .bornology()
        .generators()
        .iter()
        .flat_map(|b| [b.intersection(y).copied().collect::<PointSet>(), b.intersection(z).copied().collect()])
        .filter(|b| !b.is_empty())
        .collect();
    let space = Arc::new(Space::checked(x.names().to_vec(), x.action().clone(), generators, Bornology::new(born))?);
    let matches_ambient = space.coarse_max() == x.coarse_max();
    let (sy, iy) = x.subspace(y)?;
    let (sz, iz) = x.subspace(z)?;
    let from_y = SpaceMap::new(Arc::new(sy), space.clone(), iy)?;
    let from_z = SpaceMap::new(Arc::new(sz), space.clone(), iz)?;
    Ok(Pushout { space, from_y, from_z, excisive: verdict, matches_ambient })
}

/// Restriction of the action along a homomorphism into the acting group.
pub fn restrict_action(action: &Action, hom: &GroupHom) -> Result<Action> {
    if hom.target.as_ref() != action.group().as_ref() {
        return domain("homomorphism does not land in the acting group");
    }
    let perms = hom.source.elements().map(|h| action.perm(hom.apply(h)).to_vec()).collect();
    Action::new(hom.source.clone(), perms)
}

/// Orbits of `ι(H)` on `X`: the class of each point and the orbit list.
pub(crate) fn sub_orbits(x: &Space, sub: &[usize]) -> (Vec<usize>, Vec<PointSet>) {
    let mut class = vec![usize::MAX; x.size()];
    let mut orbits = Vec::new();
    for p in 0..x.size() {
        if class[p] == usize::MAX {
            let orbit: PointSet = sub.iter().map(|&h| x.action().act(h, p)).collect();
            for &q in &orbit {
                class[q] = orbits.len();
            }
            orbits.push(orbit);
        }
    }
    (class, orbits)
}

/// `H\X` with the residual action of `N_Γ(ι(H))`, structures pushed forward from `B_H(X)`.
/// Returns the space over the normalizer and the projection from `X`.
pub fn coequalizer_h(x: &Space, hom: &GroupHom) -> Result<(Space, Vec<usize>)> {
    if hom.target.as_ref() != x.group().as_ref() {
        return domain("homomorphism does not land in the acting group");
    }
    let image = hom.image().to_vec();
    // the maximal entourage is Γ-invariant, hence ι(H)-invariant: invariant entourages are cofinal
    debug_assert!(x.coarse_max().is_invariant(x.action()));
    let gamma = x.group().clone();
    let (normalizer, inc) = gamma.subgroup(&gamma.normalizer(&image))?;
    let (class, orbits) = sub_orbits(x, &image);
    let m = orbits.len();
    let perms = normalizer
        .elements()
        .map(|g| (0..m).map(|o| class[x.action().act(inc.apply(g), *orbits[o].iter().next().unwrap())]).collect())
        .collect();
    let action = Action::new(normalizer, perms)?;
    let names = orbits.iter().map(|o| format!("[{}]", x.name(*o.iter().next().unwrap()))).collect();
    let generators = vec![x.coarse_max().image(&class, m)];
    let born = x
        .bornology()
        .generators()
        .iter()
        .map(|b| {
            let hb: PointSet = image.iter().flat_map(|&h| b.iter().map(move |&p| x.action().act(h, p))).collect();
            hb.iter().map(|&p| class[p]).collect()
        })
        .collect();
    let space = Space::checked(names, action, generators, Bornology::new(born))?;
    Ok((space, class))
}

#[derive(Debug, Clone)]
pub struct QuotientAdjunction {
    /// `Γ\X` as a space over the trivial group.
    pub quotient: Space,
    /// The same quotient with trivial Γ-action, the target of the unit.
    pub quotient_gamma: Arc<Space>,
    pub completion: Arc<Space>,
    pub unit: SpaceMap,
}

/// Γ-completion: bornology generated by the sets `ΓB`.
pub fn completion(x: &Space) -> Result<Space> {
    let born = x.bornology().generators().iter().map(|b| x.action().saturate_set(b)).collect();
    Space::checked(x.names().to_vec(), x.action().clone(), x.generators().to_vec(), Bornology::new(born))
}

pub fn quotient_adjunction(x: &Space) -> Result<QuotientAdjunction> {
    let completion = Arc::new(completion(x)?);
    let orbits = x.action().orbits();
    let mut class = vec![0; x.size()];
    for (i, o) in orbits.iter().enumerate() {
        for &p in o {
            class[p] = i;
        }
    }
    let m = orbits.len();
    let names: Vec<String> = orbits.iter().map(|o| format!("[{}]", x.name(*o.iter().next().unwrap()))).collect();
    let generators = vec![x.coarse_max().image(&class, m)];
    let born: Vec<PointSet> = completion
        .bornology()
        .generators()
        .iter()
        .map(|b| b.iter().map(|&p| class[p]).collect())
        .collect();
    let trivial = Arc::new(FiniteGroup::trivial());
    let quotient = Space::checked(names.clone(), Action::trivial(trivial, m), generators.clone(), Bornology::new(born.clone()))?;
    let quotient_gamma = Arc::new(Space::checked(
        names,
        Action::trivial(x.group().clone(), m),
        generators,
        Bornology::new(born),
    )?);
    let unit = SpaceMap::new(completion.clone(), quotient_gamma.clone(), class)?;
    Ok(QuotientAdjunction { quotient, quotient_gamma, completion, unit })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoCheck {
    pub forward: Option<String>,
    pub backward: Option<String>,
}

impl IsoCheck {
    pub fn holds(&self) -> bool {
        self.forward.is_none() && self.backward.is_none()
    }
}

/// Certifies that a bijection and its inverse are both morphisms.
pub fn isomorphism_check(f: &SpaceMap) -> Result<IsoCheck> {
    let n = f.domain.size();
    if n != f.codomain.size() {
        return Ok(IsoCheck { forward: Some("carriers differ in size".into()), backward: None });
    }
    let mut inv = vec![usize::MAX; n];
    for x in 0..n {
        if inv[f.apply(x)] != usize::MAX {
            return Ok(IsoCheck { forward: Some("not injective".into()), backward: None });
        }
        inv[f.apply(x)] = x;
    }
    let g = SpaceMap::new(f.codomain.clone(), f.domain.clone(), inv)?;
    Ok(IsoCheck { forward: f.morphism_witness(), backward: g.morphism_witness() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2))
    }

    #[test]
    fn can_min_of_z2() {
        let x = build(&SpaceSpec::CanMin { group: z2() }).unwrap();
        assert_eq!(x.size(), 2);
        assert_eq!(x.coarse_max(), &Entourage::full(2));
        assert!(x.is_bounded(&x.all_points()));
    }

    #[test]
    fn min_max_has_diagonal_structure() {
        let set = GammaSet::cosets(Arc::new(FiniteGroup::symmetric(3)), &[0, 2]).unwrap();
        let x = build(&SpaceSpec::MinMax(set)).unwrap();
        assert_eq!(x.coarse_max(), &Entourage::diagonal(3));
        assert!(x.is_bounded(&x.all_points()));
    }

    #[test]
    fn metric_cycle_gives_band() {
        let n = 5;
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| { let k = (i as i64 - j as i64).rem_euclid(n as i64) as usize; k.min(n - k) as f64 }).collect())
            .collect();
        let set = GammaSet::trivial(Arc::new(FiniteGroup::trivial()), n);
        let x = build(&SpaceSpec::Metric { set, distances: d, scales: vec![1.0] }).unwrap();
        let gen = &x.generators()[0];
        assert_eq!(gen.len(), 15);
        assert!(gen.contains(0, 4) && gen.contains(4, 0) && !gen.contains(0, 2));
    }

    #[test]
    fn free_union_of_points_equals_coproduct_bornology() {
        let pts = vec![Space::point(), Space::point()];
        let (fu, _) = free_union(&pts).unwrap();
        let (co, _) = coproduct(&pts).unwrap();
        assert_eq!(fu.coarse_max(), &Entourage::diagonal(2));
        assert!(fu.is_bounded(&PointSet::from([0])) && fu.is_bounded(&fu.all_points()));
        assert_eq!(fu.bornology().generators().len(), 2);
        assert_eq!(co.bornology().generators(), &[PointSet::from([0, 1])]);
    }

    #[test]
    fn tensor_with_point_is_identity() {
        let x = build(&SpaceSpec::CanMin { group: z2() }).unwrap();
        let pt = Space::point_over(z2());
        let t = tensor(&pt, &x).unwrap();
        let f = SpaceMap::new(Arc::new(t), Arc::new(x), vec![0, 1]).unwrap();
        assert!(isomorphism_check(&f).unwrap().holds());
    }

    #[test]
    fn fiber_product_of_identities_is_diagonal() {
        let x = Arc::new(build(&SpaceSpec::CanMin { group: z2() }).unwrap());
        let id = SpaceMap::identity(x.clone());
        let (fp, pa, _) = fiber_product(&id, &id).unwrap();
        assert_eq!(fp.size(), 2);
        assert!(isomorphism_check(&pa).unwrap().holds());
    }

    #[test]
    fn non_invariant_recoarsening_rejected() {
        let x = build(&SpaceSpec::MinMax(GammaSet::regular(z2()))).unwrap();
        let u = Entourage::from_pairs(2, [(0, 1)]).unwrap();
        assert!(build(&SpaceSpec::Recoarsen { base: x, entourage: u }).is_err());
    }

    #[test]
    fn swap_quotient_is_point() {
        let x = build(&SpaceSpec::MinMin(GammaSet::regular(z2()))).unwrap();
        let q = quotient_adjunction(&x).unwrap();
        assert_eq!(q.quotient.size(), 1);
        assert!(q.unit.is_morphism());
    }

    #[test]
    fn non_excisive_pushout_rejected() {
        let g = Arc::new(FiniteGroup::trivial());
        let x = Space::checked(
            vec!["a".into(), "b".into()],
            Action::trivial(g, 2),
            vec![Entourage::full(2)],
            Bornology::maximal(2),
        )
        .unwrap();
        let err = pushout_excisive(&x, &PointSet::from([0]), &PointSet::from([1]), &SearchConfig::default());
        assert!(matches!(err, Err(CoarseError::Precondition(_))));
    }
}
