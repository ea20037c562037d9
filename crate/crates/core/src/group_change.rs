//! Restriction, H-completion, quotient by a subgroup and induction, with the Mackey and
//! adjunction certificates.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::constructions::{coequalizer_h, coproduct, isomorphism_check, restrict_action, IsoCheck};
use crate::error::{domain, precondition, Result};
use crate::group::{FiniteGroup, GroupHom};
use crate::maps::SpaceMap;
use crate::space::{Action, Bornology, Entourage, PointSet, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChangeKind {
    Res,
    Bh,
    Qh,
    Ind,
}

pub fn change_group(kind: ChangeKind, space: &Space, hom: &GroupHom) -> Result<Space> {
    match kind {
        ChangeKind::Res => restrict(space, hom),
        ChangeKind::Bh => h_completion(space, hom).map(|(s, _)| s),
        ChangeKind::Qh => quotient_by(space, hom).map(|q| q.over_weyl),
        ChangeKind::Ind => induce(space, hom).map(|i| i.space),
    }
}

pub fn restrict(space: &Space, hom: &GroupHom) -> Result<Space> {
    let action = restrict_action(space.action(), hom)?;
    Space::checked(space.names().to_vec(), action, space.generators().to_vec(), space.bornology().clone())
}

/// `B_H(X)` over `N_Γ(ι(H))`, together with the inclusion of the normalizer.
pub fn h_completion(space: &Space, hom: &GroupHom) -> Result<(Space, GroupHom)> {
    let gamma = space.group().clone();
    if hom.target.as_ref() != gamma.as_ref() {
        return domain("homomorphism does not land in the acting group");
    }
    let image = hom.image();
    let (_, inc) = gamma.subgroup(&gamma.normalizer(image))?;
    let action = restrict_action(space.action(), &inc)?;
    let born = space
        .bornology()
        .generators()
        .iter()
        .map(|b| image.iter().flat_map(|&h| b.iter().map(move |&p| space.action().act(h, p))).collect())
        .collect();
    let out = Space::checked(space.names().to_vec(), action, space.generators().to_vec(), Bornology::new(born))?;
    Ok((out, inc))
}

#[derive(Debug, Clone)]
pub struct SubgroupQuotient {
    /// `H\X` with the Weyl group `N/ι(H)` acting.
    pub over_weyl: Space,
    /// The same space with the normalizer acting.
    pub over_normalizer: Space,
    pub projection: Vec<usize>,
    pub normalizer: GroupHom,
    pub to_weyl: GroupHom,
}

pub fn quotient_by(space: &Space, hom: &GroupHom) -> Result<SubgroupQuotient> {
    let (over_normalizer, projection) = coequalizer_h(space, hom)?;
    let gamma = space.group().clone();
    let (normalizer_group, inc) = gamma.subgroup(&gamma.normalizer(hom.image()))?;
    let pos: HashMap<usize, usize> = inc.map().iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let sub_in_n: Vec<usize> = hom.image().iter().map(|g| pos[g]).collect();
    let (weyl, to_weyl) = normalizer_group.quotient(&sub_in_n)?;
    let n_action = over_normalizer.action();
    let perms = weyl
        .elements()
        .map(|w| {
            let rep = normalizer_group.elements().find(|&n| to_weyl.apply(n) == w).expect("surjective");
            n_action.perm(rep).to_vec()
        })
        .collect();
    let action = Action::new(weyl, perms)?;
    let over_weyl = Space::checked(
        over_normalizer.names().to_vec(),
        action,
        over_normalizer.generators().to_vec(),
        over_normalizer.bornology().clone(),
    )?;
    Ok(SubgroupQuotient { over_weyl, over_normalizer, projection, normalizer: inc, to_weyl })
}

/// `Γ ×_H X` together with the class of each pair `(γ, x)`.
#[derive(Debug, Clone)]
pub struct Induced {
    pub space: Space,
    /// `class[γ][x]` is the point `[γ, x]`.
    pub class: Vec<Vec<usize>>,
    /// Least pair `(γ, x)` of each class.
    pub reps: Vec<(usize, usize)>,
}

impl Induced {
    pub fn point(&self, gamma: usize, x: usize) -> usize {
        self.class[gamma][x]
    }
}

pub fn induce(space: &Space, hom: &GroupHom) -> Result<Induced> {
    let h = space.group();
    if hom.source.as_ref() != h.as_ref() {
        return domain("homomorphism does not start at the acting group");
    }
    let gamma = hom.target.clone();
    let n = space.size();
    let mut class = vec![vec![usize::MAX; n]; gamma.order()];
    let mut reps = Vec::new();
    for g in gamma.elements() {
        for x in 0..n {
            if class[g][x] != usize::MAX {
                continue;
            }
            for k in h.elements() {
                let g2 = gamma.mul(g, gamma.inv(hom.apply(k)));
                let x2 = space.action().act(k, x);
                class[g2][x2] = reps.len();
            }
            reps.push((g, x));
        }
    }
    let m = reps.len();
    let names = reps.iter().map(|&(g, x)| format!("[{},{}]", gamma.name(g), space.name(x))).collect();
    let perms = gamma
        .elements()
        .map(|a| reps.iter().map(|&(g, x)| class[gamma.mul(a, g)][x]).collect())
        .collect();
    let action = Action::new(gamma.clone(), perms)?;
    let mut coarse = Entourage::empty(m);
    for g in gamma.elements() {
        for (x, y) in space.coarse_max().pairs() {
            coarse.insert(class[g][x], class[g][y]);
        }
    }
    let born = gamma
        .elements()
        .flat_map(|g| space.bornology().generators().iter().map(move |b| (g, b)))
        .map(|(g, b)| b.iter().map(|&x| class[g][x]).collect::<PointSet>())
        .collect();
    let space = Space::checked(names, action, vec![coarse], Bornology::new(born))?;
    Ok(Induced { space, class, reps })
}

/// `Ind(f): [γ,x] ↦ [γ,f(x)]` for an H-map `f: X → X′`.
pub fn induce_map(source: &Induced, target: &Induced, f: &[usize]) -> Vec<usize> {
    source.reps.iter().map(|&(g, x)| target.point(g, f[x])).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleCosetSummand {
    pub representative: String,
    pub double_coset: Vec<String>,
    pub summand_size: usize,
    /// Whether `h̄ ↦ γ⁻¹h̄γ` on `H̄∩γ⁻¹H̄′γ` lands in `H̄′`.
    pub literal_orientation_well_typed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MackeyReport {
    pub summands: Vec<DoubleCosetSummand>,
    pub left_size: usize,
    pub right_size: usize,
    /// Image in the left side of each right-side point.
    pub bijection: Vec<usize>,
    pub iso: IsoCheck,
}

impl MackeyReport {
    pub fn holds(&self) -> bool {
        self.iso.holds()
    }
}

/// `Res_{H′} Ind_H^Γ X ≅ ⨆_{H̄′γH̄} Res_{H′} Ind_{L_γ}^{H̄′} c_γ^* X` with `L_γ = H̄′ ∩ γH̄γ⁻¹`,
/// `c_γ(l) = γ⁻¹lγ`, certified by the bijection `[h̄′,x] ↦ [h̄′γ,x]`.
pub fn mackey_check(x: &Space, iota: &GroupHom, iota_prime: &GroupHom) -> Result<MackeyReport> {
    if !iota.is_injective() {
        return precondition("the Mackey certificate needs an injective homomorphism for the induced side");
    }
    if iota.target.as_ref() != iota_prime.target.as_ref() {
        return domain("homomorphisms land in different groups");
    }
    let gamma = iota.target.clone();
    let induced = induce(x, iota)?;
    let left = Arc::new(restrict(&induced.space, iota_prime)?);
    let hbar = iota.image().to_vec();
    let hbar_prime = iota_prime.image().to_vec();
    let (hbar_prime_group, hbar_prime_inc) = gamma.subgroup(&hbar_prime)?;
    let pos_hp: HashMap<usize, usize> = hbar_prime_inc.map().iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let iota_prime_bar = GroupHom::new(
        iota_prime.source.clone(),
        hbar_prime_group.clone(),
        iota_prime.map().iter().map(|g| pos_hp[g]).collect(),
    )?;
    let lift: HashMap<usize, usize> = iota.map().iter().enumerate().map(|(h, &g)| (g, h)).collect();
    let double = gamma.double_cosets(&hbar_prime, &hbar);
    let mut summand_spaces = Vec::new();
    let mut summand_meta = Vec::new();
    let mut pieces = Vec::new();
    for dc in &double {
        let g = dc[0];
        let conj: Vec<usize> = hbar.iter().map(|&h| gamma.mul(gamma.mul(g, h), gamma.inv(g))).collect();
        let l: Vec<usize> = hbar_prime.iter().copied().filter(|a| conj.contains(a)).collect();
        let (l_group, l_inc) = gamma.subgroup(&l)?;
        // L acts on X through c_γ and the inverse of ι
        let perms = l_group
            .elements()
            .map(|a| x.action().perm(lift[&gamma.conj_by(g, l_inc.apply(a))]).to_vec())
            .collect();
        let x_gamma = Space::checked(
            x.names().to_vec(),
            Action::new(l_group.clone(), perms)?,
            x.generators().to_vec(),
            x.bornology().clone(),
        )?;
        let l_to_hp = GroupHom::new(l_group.clone(), hbar_prime_group.clone(), l_inc.map().iter().map(|a| pos_hp[a]).collect())?;
        let summand_ind = induce(&x_gamma, &l_to_hp)?;
        let summand = restrict(&summand_ind.space, &iota_prime_bar)?;
        let literal: Vec<usize> = {
            let conj_inv: Vec<usize> = hbar_prime.iter().map(|&h| gamma.conj_by(g, h)).collect();
            hbar.iter().copied().filter(|a| conj_inv.contains(a)).collect()
        };
        let literal_ok = literal.iter().all(|&a| hbar_prime.contains(&gamma.conj_by(g, a)));
        summand_meta.push(DoubleCosetSummand {
            representative: gamma.name(g).to_string(),
            double_coset: dc.iter().map(|&a| gamma.name(a).to_string()).collect(),
            summand_size: summand.size(),
            literal_orientation_well_typed: literal_ok,
        });
        pieces.push((g, summand_ind, hbar_prime_inc.clone()));
        summand_spaces.push(summand);
    }
    let (right, offsets) = coproduct(&summand_spaces)?;
    let right = Arc::new(right);
    let mut bijection = vec![0; right.size()];
    for ((g, summand_ind, inc), &offset) in pieces.iter().zip(&offsets) {
        for (p, &(hp, xp)) in summand_ind.reps.iter().enumerate() {
            bijection[offset + p] = induced.point(gamma.mul(inc.apply(hp), *g), xp);
        }
    }
    let map = SpaceMap::new(right.clone(), left.clone(), bijection.clone())?;
    let iso = isomorphism_check(&map)?;
    Ok(MackeyReport { summands: summand_meta, left_size: left.size(), right_size: right.size(), bijection, iso })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjunctionReport {
    pub unit: Vec<usize>,
    pub counit: Vec<usize>,
    pub unit_morphism: Option<String>,
    pub counit_morphism: Option<String>,
    pub triangle_ind: Option<String>,
    pub triangle_res: Option<String>,
}

impl AdjunctionReport {
    pub fn holds(&self) -> bool {
        self.unit_morphism.is_none()
            && self.counit_morphism.is_none()
            && self.triangle_ind.is_none()
            && self.triangle_res.is_none()
    }
}

/// Unit `x ↦ [e,x]`, counit `[γ,y] ↦ γy`, and both triangle identities.
pub fn adjunction_check(iota: &GroupHom, x: &Space, y: &Space) -> Result<AdjunctionReport> {
    let gamma = iota.target.clone();
    let e = gamma.identity();
    let ind_x = induce(x, iota)?;
    let res_ind_x = Arc::new(restrict(&ind_x.space, iota)?);
    let unit: Vec<usize> = (0..x.size()).map(|p| ind_x.point(e, p)).collect();
    let unit_map = SpaceMap::new(Arc::new(x.clone()), res_ind_x.clone(), unit.clone())?;

    let res_y = restrict(y, iota)?;
    let ind_res_y = induce(&res_y, iota)?;
    let counit: Vec<usize> = ind_res_y.reps.iter().map(|&(g, p)| y.action().act(g, p)).collect();
    let counit_map = SpaceMap::new(Arc::new(ind_res_y.space.clone()), Arc::new(y.clone()), counit.clone())?;

    // Ind X → Ind Res Ind X → Ind X
    let ind_res_ind_x = induce(&res_ind_x, iota)?;
    let ind_unit = induce_map(&ind_x, &ind_res_ind_x, &unit);
    let counit_ind: Vec<usize> =
        ind_res_ind_x.reps.iter().map(|&(g, p)| ind_x.space.action().act(g, p)).collect();
    let triangle_ind = (0..ind_x.space.size())
        .find(|&p| counit_ind[ind_unit[p]] != p)
        .map(|p| format!("ε∘Ind(η) moves {}", ind_x.space.name(p)));

    // Res Y → Res Ind Res Y → Res Y
    let triangle_res = (0..y.size())
        .find(|&p| counit[ind_res_y.point(e, p)] != p)
        .map(|p| format!("Res(ε)∘η moves {}", y.name(p)));

    Ok(AdjunctionReport {
        unit,
        counit,
        unit_morphism: unit_map.morphism_witness(),
        counit_morphism: counit_map.morphism_witness(),
        triangle_ind,
        triangle_res,
    })
}

/// `Ind X ≅ Ind B_K(X)` for `K = ker ι`, via the identity of carriers.
pub fn ind_kernel_completion_check(x: &Space, iota: &GroupHom) -> Result<IsoCheck> {
    let h = x.group().clone();
    let (_, kernel_inc) = h.subgroup(iota.kernel())?;
    let (bk, normalizer_inc) = h_completion(x, &kernel_inc)?;
    // K is normal in H, so B_K(X) is again an H-space
    if normalizer_inc.image().len() != h.order() {
        return precondition("kernel is not normal");
    }
    let bk_over_h = Space::checked(bk.names().to_vec(), x.action().clone(), bk.generators().to_vec(), bk.bornology().clone())?;
    let a = induce(x, iota)?;
    let b = induce(&bk_over_h, iota)?;
    let map = SpaceMap::new(Arc::new(a.space), Arc::new(b.space), (0..a.reps.len()).collect())?;
    isomorphism_check(&map)
}

/// For finite `H`, `B_H(X)` and `Res_N X` agree via the identity of carriers.
pub fn bh_res_check(x: &Space, iota: &GroupHom) -> Result<IsoCheck> {
    let (bh, inc) = h_completion(x, iota)?;
    let res = restrict(x, &inc)?;
    let map = SpaceMap::new(Arc::new(bh), Arc::new(res), (0..x.size()).collect())?;
    isomorphism_check(&map)
}

/// `Res_N Q_H(X)` and the coequalizer of the `H`-action agree via the identity of carriers.
pub fn qh_coequalizer_check(x: &Space, iota: &GroupHom) -> Result<IsoCheck> {
    let q = quotient_by(x, iota)?;
    let res = restrict(&q.over_weyl, &q.to_weyl)?;
    let (coeq, _) = coequalizer_h(x, iota)?;
    let map = SpaceMap::new(Arc::new(res), Arc::new(coeq), (0..q.over_weyl.size()).collect())?;
    isomorphism_check(&map)
}

/// Convenience: `ι` for a subgroup given by elements.
pub fn subgroup_inclusion(group: &Arc<FiniteGroup>, elems: &[usize]) -> Result<GroupHom> {
    group.subgroup(elems).map(|(_, inc)| inc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build, GammaSet, SpaceSpec};

    fn z4() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(4))
    }

    #[test]
    fn res_along_identity_is_identity() {
        let x = build(&SpaceSpec::CanMin { group: z4() }).unwrap();
        let r = change_group(ChangeKind::Res, &x, &GroupHom::identity(z4())).unwrap();
        assert_eq!(r, x);
    }

    #[test]
    fn qh_of_can_min_by_everything_is_point() {
        let x = build(&SpaceSpec::CanMin { group: z4() }).unwrap();
        let q = change_group(ChangeKind::Qh, &x, &GroupHom::identity(z4())).unwrap();
        assert_eq!(q.size(), 1);
        assert_eq!(q.group().order(), 1);
    }

    #[test]
    fn ind_of_point_is_coset_space() {
        let inc = subgroup_inclusion(&z4(), &[0, 2]).unwrap();
        let pt = Space::point_over(inc.source.clone());
        let ind = induce(&pt, &inc).unwrap();
        assert_eq!(ind.space.size(), 2);
        let cosets = build(&SpaceSpec::MinMin(GammaSet::cosets(z4(), &[0, 2]).unwrap())).unwrap();
        assert_eq!(ind.space.coarse_max(), cosets.coarse_max());
        assert_eq!(ind.space.action().perms(), cosets.action().perms());
    }

    #[test]
    fn mackey_for_s3_reflection() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let t = s3.index_of("(12)").unwrap();
        let inc = subgroup_inclusion(&s3, &[0, t]).unwrap();
        let pt = Space::point_over(inc.source.clone());
        let r = mackey_check(&pt, &inc, &inc).unwrap();
        assert_eq!(r.summands.len(), 2);
        let mut sizes: Vec<usize> = r.summands.iter().map(|s| s.summand_size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert!(r.holds(), "{:?}", r.iso);
    }

    #[test]
    fn mackey_for_z4() {
        let inc = subgroup_inclusion(&z4(), &[0, 2]).unwrap();
        let pt = Space::point_over(inc.source.clone());
        let r = mackey_check(&pt, &inc, &inc).unwrap();
        assert_eq!(r.summands.len(), 2);
        assert!(r.summands.iter().all(|s| s.summand_size == 1));
        assert!(r.holds());
    }

    #[test]
    fn adjunction_for_z2_in_z4() {
        let inc = subgroup_inclusion(&z4(), &[0, 2]).unwrap();
        let pt = Space::point_over(inc.source.clone());
        let y = build(&SpaceSpec::CanMin { group: z4() }).unwrap();
        let r = adjunction_check(&inc, &pt, &y).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn kernel_completion_and_bh_checks() {
        let z4 = z4();
        let to_z2 = GroupHom::new(z4.clone(), Arc::new(FiniteGroup::cyclic(2)), vec![0, 1, 0, 1]).unwrap();
        let x = build(&SpaceSpec::MinMin(GammaSet::regular(z4.clone()))).unwrap();
        assert!(ind_kernel_completion_check(&x, &to_z2).unwrap().holds());
        let inc = subgroup_inclusion(&z4, &[0, 2]).unwrap();
        assert!(bh_res_check(&x, &inc).unwrap().holds());
        assert!(qh_coequalizer_check(&x, &inc).unwrap().holds());
    }
}
