//! Equivariant X-controlled objects over finitely generated free abelian groups, the
//! functors comparing them with representations and convolution categories, Karoubi
//! completions, quotient hom-groups and the horizon-bounded Eilenberg swindle.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::constructions::{build, tensor, GammaSet, SpaceSpec};
use crate::error::{precondition, CoarseError, Result};
use crate::flasque::{Endomorphism, SpaceDescription};
use crate::group::{FiniteGroup, GroupHom};
use crate::homology::HomologyGroup;
use crate::linalg::{determinant, elementary_divisors, kernel, smith_normal_form, solve_with, IntMatrix};
use crate::maps::SpaceMap;
use crate::space::{CheckResult, Entourage, PointSet, Space, ValidationReport};
use crate::subsets::BigFamily;

/// Finitely generated abelian group in canonical form.
pub type AbelianGroup = HomologyGroup;

/// `(A, ρ)` stored on singletons: `A({x}) = ℤ^{dims[x]}` and `ρ(γ)_x : A_x → A_{γ⁻¹x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrlObject {
    pub space: Arc<Space>,
    pub support: PointSet,
    pub dims: Vec<usize>,
    /// `cocycle[γ][x]`.
    pub cocycle: Vec<Vec<IntMatrix>>,
}

fn is_unimodular(m: &IntMatrix) -> bool {
    m.rows() == m.cols() && determinant(m).abs().is_one()
}

impl CtrlObject {
    pub fn new(space: Arc<Space>, support: PointSet, dims: Vec<usize>, cocycle: Vec<Vec<IntMatrix>>) -> Result<Self> {
        let obj = Self { space, support, dims, cocycle };
        obj.validate().into_result()?;
        Ok(obj)
    }

    /// Identity matrices as cocycle; `dims` must be constant on orbits.
    pub fn with_identity_cocycle(space: Arc<Space>, dims: Vec<usize>) -> Result<Self> {
        let support = dims.iter().enumerate().filter(|(_, &d)| d > 0).map(|(x, _)| x).collect();
        let cocycle = space
            .group()
            .elements()
            .map(|_| dims.iter().map(|&d| IntMatrix::identity(d)).collect())
            .collect();
        Self::new(space, support, dims, cocycle)
    }

    pub fn zero(space: Arc<Space>) -> Self {
        let n = space.size();
        Self::with_identity_cocycle(space, vec![0; n]).expect("zero object is valid")
    }

    /// Rank `|Γ_x|` at each point of the orbit of `x`, with `Γ` permuting the elements sending `x` there.
    pub fn free_on_orbit(space: Arc<Space>, x: usize) -> Result<Self> {
        let group = space.group().clone();
        let action = space.action().clone();
        let fibers: Vec<Vec<usize>> =
            (0..space.size()).map(|y| group.elements().filter(|&d| action.act(d, x) == y).collect()).collect();
        let dims: Vec<usize> = fibers.iter().map(Vec::len).collect();
        let support = action.orbit(x);
        let cocycle = group
            .elements()
            .map(|g| {
                let gi = group.inv(g);
                (0..space.size())
                    .map(|y| {
                        let target = &fibers[action.act(gi, y)];
                        let t = fibers[y].iter().enumerate().map(|(c, &d)| {
                            let r = target.iter().position(|&e| e == group.mul(gi, d)).expect("fiber of γ⁻¹y");
                            (r, c, BigInt::one())
                        });
                        IntMatrix::from_triplets(target.len(), fibers[y].len(), t)
                    })
                    .collect()
            })
            .collect();
        Self::new(space, support, dims, cocycle)
    }

    /// Rank one on the orbit of `x` with trivial cocycle.
    pub fn permutation_on_orbit(space: Arc<Space>, x: usize) -> Result<Self> {
        let orbit = space.action().orbit(x);
        let dims = (0..space.size()).map(|y| usize::from(orbit.contains(&y))).collect();
        Self::with_identity_cocycle(space, dims)
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.space.size();
        let group = self.space.group().clone();
        let action = self.space.action();
        let mut checks = Vec::new();
        let shape_ok = self.dims.len() == n && self.cocycle.len() == group.order() && self.cocycle.iter().all(|c| c.len() == n);
        checks.push(CheckResult::from_witness(
            "data sized to carrier and group",
            (!shape_ok).then(|| "dims or cocycle has the wrong length".to_string()),
        ));
        if !shape_ok {
            return ValidationReport { checks };
        }
        checks.push(CheckResult::from_witness(
            "support Γ-invariant",
            (!action.is_invariant_set(&self.support)).then(|| format!("{} is not invariant", self.space.fmt_set(&self.support))),
        ));
        checks.push(CheckResult::from_witness(
            "ranks vanish off the support",
            (0..n).find(|x| self.dims[*x] > 0 && !self.support.contains(x)).map(|x| format!("rank {} at {}", self.dims[x], self.space.name(x))),
        ));
        let orbit_break = group.elements().find_map(|g| {
            (0..n).find(|&x| self.dims[action.act(group.inv(g), x)] != self.dims[x]).map(|x| {
                format!("dims({}) ≠ dims({}⁻¹·{})", self.space.name(x), group.name(g), self.space.name(x))
            })
        });
        checks.push(CheckResult::from_witness("ranks constant on orbits", orbit_break.clone()));
        if orbit_break.is_some() {
            return ValidationReport { checks };
        }
        let shape = group.elements().find_map(|g| {
            (0..n).find_map(|x| {
                let m = &self.cocycle[g][x];
                let want = (self.dims[action.act(group.inv(g), x)], self.dims[x]);
                ((m.rows(), m.cols()) != want).then(|| format!("ρ({})_{} has shape {}x{}", group.name(g), self.space.name(x), m.rows(), m.cols()))
            })
        });
        checks.push(CheckResult::from_witness("cocycle shapes", shape.clone()));
        if shape.is_some() {
            return ValidationReport { checks };
        }
        let e = group.identity();
        checks.push(CheckResult::from_witness(
            "ρ(e) = id",
            (0..n).find(|&x| self.cocycle[e][x] != IntMatrix::identity(self.dims[x])).map(|x| format!("ρ(e)_{} ≠ id", self.space.name(x))),
        ));
        checks.push(CheckResult::from_witness(
            "cocycle invertible",
            group.elements().find_map(|g| {
                (0..n)
                    .find(|&x| !is_unimodular(&self.cocycle[g][x]))
                    .map(|x| format!("ρ({})_{} not invertible over ℤ", group.name(g), self.space.name(x)))
            }),
        ));
        let law = group.elements().find_map(|g| {
            group.elements().find_map(|h| {
                (0..n).find_map(|x| {
                    let lhs = &self.cocycle[group.mul(g, h)][x];
                    let rhs = self.cocycle[h][action.act(group.inv(g), x)].mul(&self.cocycle[g][x]);
                    (lhs != &rhs).then(|| format!("(γ,γ′,x) = ({},{},{})", group.name(g), group.name(h), self.space.name(x)))
                })
            })
        });
        checks.push(CheckResult::from_witness("cocycle law", law));
        ValidationReport { checks }
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.dims.iter().scan(0, |acc, &d| { let o = *acc; *acc += d; Some(o) }).collect()
    }

    pub fn total_rank(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `σ(B)`: the least subset of `B` carrying all of `A(B)`.
    pub fn support_of(&self, bounded: &PointSet) -> PointSet {
        bounded.intersection(&self.support).copied().collect()
    }

    pub fn rank_on(&self, set: &PointSet) -> usize {
        set.iter().map(|&x| self.dims[x]).sum()
    }

    /// `ρ(γ)` as one matrix on `⊕_x A_x`, block `γ⁻¹x ← x`.
    pub fn action_matrix(&self, g: usize) -> IntMatrix {
        let off = self.offsets();
        let gi = self.space.group().inv(g);
        let total = self.total_rank();
        IntMatrix::from_triplets(
            total,
            total,
            (0..self.space.size()).flat_map(|x| {
                let row = off[self.space.action().act(gi, x)];
                let col = off[x];
                self.cocycle[g][x].triplets().map(move |(r, c, v)| (row + r, col + c, v.clone())).collect::<Vec<_>>()
            }),
        )
    }

    /// Rebuilds a cocycle from whole-space action matrices.
    fn from_action_matrices(space: Arc<Space>, support: PointSet, dims: Vec<usize>, mats: &[IntMatrix]) -> Result<Self> {
        let off: Vec<usize> = dims.iter().scan(0, |acc, &d| { let o = *acc; *acc += d; Some(o) }).collect();
        let group = space.group().clone();
        let cocycle = group
            .elements()
            .map(|g| {
                (0..space.size())
                    .map(|x| {
                        let y = space.action().act(group.inv(g), x);
                        mats[g].block(off[y], off[x], dims[y], dims[x])
                    })
                    .collect()
            })
            .collect();
        Self::new(space, support, dims, cocycle)
    }
}

/// An equivariant controlled morphism, stored as one matrix `⊕_x A_x → ⊕_y A′_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrlMorphism {
    pub source: Arc<CtrlObject>,
    pub target: Arc<CtrlObject>,
    /// Pairs `(y, x)` allowed to carry a nonzero block `A_x → A′_y`.
    pub control: Entourage,
    pub matrix: IntMatrix,
}

impl CtrlMorphism {
    pub fn new(source: Arc<CtrlObject>, target: Arc<CtrlObject>, control: Entourage, matrix: IntMatrix) -> Result<Self> {
        let f = Self { source, target, control, matrix };
        f.validate().into_result()?;
        Ok(f)
    }

    pub fn identity(obj: Arc<CtrlObject>) -> Self {
        let n = obj.space.size();
        let m = IntMatrix::identity(obj.total_rank());
        Self { source: obj.clone(), target: obj, control: Entourage::diagonal(n), matrix: m }
    }

    pub fn zero(source: Arc<CtrlObject>, target: Arc<CtrlObject>) -> Self {
        let m = IntMatrix::zeros(target.total_rank(), source.total_rank());
        Self { control: Entourage::empty(source.space.size()), source, target, matrix: m }
    }

    pub fn block(&self, y: usize, x: usize) -> IntMatrix {
        let (so, to) = (self.source.offsets(), self.target.offsets());
        self.matrix.block(to[y], so[x], self.target.dims[y], self.source.dims[x])
    }

    /// Pairs `(y, x)` whose block is nonzero.
    pub fn block_support(&self) -> BTreeSet<(usize, usize)> {
        let owner = |dims: &[usize]| -> Vec<usize> { dims.iter().enumerate().flat_map(|(x, &d)| std::iter::repeat_n(x, d)).collect() };
        let (rows, cols) = (owner(&self.target.dims), owner(&self.source.dims));
        self.matrix.triplets().map(|(r, c, _)| (rows[r], cols[c])).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let space = &self.source.space;
        let mut checks = vec![CheckResult::from_witness(
            "objects over one space",
            (space.size() != self.target.space.size() || space.group() != self.target.space.group())
                .then(|| "source and target live on different spaces".to_string()),
        )];
        let shape = (self.matrix.rows(), self.matrix.cols()) != (self.target.total_rank(), self.source.total_rank());
        checks.push(CheckResult::from_witness("matrix shape", shape.then(|| "matrix does not match the ranks".to_string())));
        if !checks.iter().all(|c| c.passed) {
            return ValidationReport { checks };
        }
        checks.push(CheckResult::from_witness(
            "control inside the coarse structure",
            self.control.first_escape(space.coarse_max()).map(|(y, x)| format!("({},{}) not an entourage pair", space.name(y), space.name(x))),
        ));
        checks.push(CheckResult::from_witness(
            "blocks inside control",
            self.block_support()
                .into_iter()
                .find(|&(y, x)| !self.control.contains(y, x))
                .map(|(y, x)| format!("block ({},{}) outside the control", space.name(y), space.name(x))),
        ));
        let broken = space.group().elements().find(|&g| {
            self.target.action_matrix(g).mul(&self.matrix) != self.matrix.mul(&self.source.action_matrix(g))
        });
        checks.push(CheckResult::from_witness(
            "equivariance",
            broken.map(|g| format!("ρ′(γ)f ≠ (γf)ρ(γ) for γ = {}", space.group().name(g))),
        ));
        ValidationReport { checks }
    }

    /// `self ∘ first`, controlled by the composite of the controls.
    pub fn after(&self, first: &CtrlMorphism) -> Result<CtrlMorphism> {
        if first.target.dims != self.source.dims {
            return precondition("composition of morphisms with mismatched middle objects");
        }
        let control = self.control.compose(&first.control)?;
        Ok(CtrlMorphism { source: first.source.clone(), target: self.target.clone(), control, matrix: self.matrix.mul(&first.matrix) })
    }

    pub fn plus(&self, other: &CtrlMorphism) -> Result<CtrlMorphism> {
        if self.source.dims != other.source.dims || self.target.dims != other.target.dims {
            return precondition("sum of morphisms between different objects");
        }
        Ok(CtrlMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            control: self.control.union(&other.control)?,
            matrix: self.matrix.add(&other.matrix),
        })
    }
}

/// `A ⊕ B` with its inclusions and projections.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub object: Arc<CtrlObject>,
    pub inclusions: [CtrlMorphism; 2],
    pub projections: [CtrlMorphism; 2],
}

/// Reorders `⊕_x (A_x ⊕ B_x)` by point, summand `A` first in each fiber.
fn sum_order(a: &CtrlObject, b: &CtrlObject) -> (Vec<usize>, Vec<usize>) {
    let (oa, ob) = (a.offsets(), b.offsets());
    let mut pos_a = vec![0; a.total_rank()];
    let mut pos_b = vec![0; b.total_rank()];
    let mut next = 0;
    for x in 0..a.dims.len() {
        for i in 0..a.dims[x] {
            pos_a[oa[x] + i] = next;
            next += 1;
        }
        for i in 0..b.dims[x] {
            pos_b[ob[x] + i] = next;
            next += 1;
        }
    }
    (pos_a, pos_b)
}

fn selection(rows: usize, positions: &[usize]) -> IntMatrix {
    IntMatrix::from_triplets(rows, positions.len(), positions.iter().enumerate().map(|(c, &r)| (r, c, BigInt::one())))
}

pub fn direct_sum(a: &Arc<CtrlObject>, b: &Arc<CtrlObject>) -> Result<DirectSum> {
    if a.space.size() != b.space.size() || a.space.group() != b.space.group() {
        return precondition("direct sum of objects over different spaces");
    }
    let dims: Vec<usize> = a.dims.iter().zip(&b.dims).map(|(x, y)| x + y).collect();
    let support = a.support.union(&b.support).copied().collect();
    let (pa, pb) = sum_order(a, b);
    let total = dims.iter().sum();
    let (ia, ib) = (selection(total, &pa), selection(total, &pb));
    let mats: Vec<IntMatrix> = a
        .space
        .group()
        .elements()
        .map(|g| {
            let ma = ia.mul(&a.action_matrix(g)).mul(&ia.transpose());
            ma.add(&ib.mul(&b.action_matrix(g)).mul(&ib.transpose()))
        })
        .collect();
    let object = Arc::new(CtrlObject::from_action_matrices(a.space.clone(), support, dims, &mats)?);
    let diag = Entourage::diagonal(a.space.size());
    let mk = |s: &Arc<CtrlObject>, t: &Arc<CtrlObject>, m: IntMatrix| CtrlMorphism { source: s.clone(), target: t.clone(), control: diag.clone(), matrix: m };
    Ok(DirectSum {
        inclusions: [mk(a, &object, ia.clone()), mk(b, &object, ib.clone())],
        projections: [mk(&object, a, ia.transpose()), mk(&object, b, ib.transpose())],
        object,
    })
}

pub fn direct_sum_morphism(f: &CtrlMorphism, g: &CtrlMorphism) -> Result<CtrlMorphism> {
    let src = direct_sum(&f.source, &g.source)?;
    let tgt = direct_sum(&f.target, &g.target)?;
    let m = tgt.inclusions[0]
        .matrix
        .mul(&f.matrix)
        .mul(&src.projections[0].matrix)
        .add(&tgt.inclusions[1].matrix.mul(&g.matrix).mul(&src.projections[1].matrix));
    CtrlMorphism::new(src.object, tgt.object, f.control.union(&g.control)?, m)
}

/// Basis positions of `φ_*A` for a partial point map: each source vector and where it lands.
fn push_positions(obj: &CtrlObject, f: &[Option<usize>], m: usize) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut dims = vec![0; m];
    for (x, t) in f.iter().enumerate() {
        if let Some(t) = t {
            dims[*t] += obj.dims[x];
        }
    }
    let off: Vec<usize> = dims.iter().scan(0, |acc, &d| { let o = *acc; *acc += d; Some(o) }).collect();
    let mut fill = vec![0; m];
    let mut pos = Vec::with_capacity(obj.total_rank());
    for (x, t) in f.iter().enumerate() {
        for _ in 0..obj.dims[x] {
            pos.push(t.map(|t| {
                fill[t] += 1;
                off[t] + fill[t] - 1
            }));
        }
    }
    (dims, pos)
}

fn partial_selection(rows: usize, positions: &[Option<usize>]) -> IntMatrix {
    IntMatrix::from_triplets(
        rows,
        positions.len(),
        positions.iter().enumerate().filter_map(|(c, r)| r.map(|r| (r, c, BigInt::one()))),
    )
}

/// `φ_*A` along an equivariant partial map whose domain is invariant; points mapped to
/// `None` are dropped. Returns the object and the matrix sending `A` onto it.
pub fn pushforward_partial(obj: &CtrlObject, f: &[Option<usize>], target: Arc<Space>) -> Result<(CtrlObject, IntMatrix)> {
    let (dims, pos) = push_positions(obj, f, target.size());
    let total: usize = dims.iter().sum();
    let p = partial_selection(total, &pos);
    let mats: Vec<IntMatrix> = obj.space.group().elements().map(|g| p.mul(&obj.action_matrix(g)).mul(&p.transpose())).collect();
    let support = dims.iter().enumerate().filter(|(_, &d)| d > 0).map(|(x, _)| x).collect();
    Ok((CtrlObject::from_action_matrices(target, support, dims, &mats)?, p))
}

pub fn pushforward(obj: &CtrlObject, f: &SpaceMap) -> Result<CtrlObject> {
    if let Some(w) = f.morphism_witness() {
        return precondition(format!("pushforward along a non-morphism: {w}"));
    }
    let map: Vec<Option<usize>> = f.assignment.iter().map(|&y| Some(y)).collect();
    Ok(pushforward_partial(obj, &map, f.codomain.clone())?.0)
}

pub fn pushforward_morphism(m: &CtrlMorphism, f: &SpaceMap) -> Result<CtrlMorphism> {
    let map: Vec<Option<usize>> = f.assignment.iter().map(|&y| Some(y)).collect();
    let (src, ps) = pushforward_partial(&m.source, &map, f.codomain.clone())?;
    let (tgt, pt) = pushforward_partial(&m.target, &map, f.codomain.clone())?;
    let control = m.control.image(&f.assignment, f.codomain.size());
    if control.first_escape(f.codomain.coarse_max()).is_some() {
        return Err(CoarseError::Construction("pushed control escapes the codomain coarse structure".into()));
    }
    CtrlMorphism::new(Arc::new(src), Arc::new(tgt), control, pt.mul(&m.matrix).mul(&ps.transpose()))
}

/// `C|_Z` with the inclusion into and projection from `C`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub object: Arc<CtrlObject>,
    pub inclusion: CtrlMorphism,
    pub projection: CtrlMorphism,
}

pub fn restrict(obj: &Arc<CtrlObject>, z: &PointSet) -> Result<Restriction> {
    if !obj.space.action().is_invariant_set(z) {
        return precondition(format!("restriction to non-invariant {}", obj.space.fmt_set(z)));
    }
    let map: Vec<Option<usize>> = (0..obj.space.size()).map(|x| z.contains(&x).then_some(x)).collect();
    let (object, p) = pushforward_partial(obj, &map, obj.space.clone())?;
    let object = Arc::new(object);
    let diag = Entourage::diagonal(obj.space.size());
    Ok(Restriction {
        inclusion: CtrlMorphism { source: object.clone(), target: obj.clone(), control: diag.clone(), matrix: p.transpose() },
        projection: CtrlMorphism { source: obj.clone(), target: object.clone(), control: diag, matrix: p },
        object,
    })
}

/// Saturated basis of equivariant morphisms `source → target` with blocks inside `control`.
pub fn hom_basis(source: &Arc<CtrlObject>, target: &Arc<CtrlObject>, control: &Entourage) -> Result<Vec<CtrlMorphism>> {
    let space = &source.space;
    let action = space.action();
    let group = space.group().clone();
    if !control.is_invariant(action) {
        return precondition("hom lattice over a non-invariant control");
    }
    let (so, to) = (source.offsets(), target.offsets());
    let positions: Vec<(usize, usize)> =
        control.pairs().filter(|&(y, x)| source.dims[x] > 0 && target.dims[y] > 0).collect();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut basis = Vec::new();
    for &start in &positions {
        if seen.contains(&start) {
            continue;
        }
        let orbit: Vec<(usize, usize)> = group
            .elements()
            .map(|g| (action.act(g, start.0), action.act(g, start.1)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        seen.extend(orbit.iter().copied());
        let mut var = HashMap::new();
        let mut count = 0;
        for &(y, x) in &orbit {
            var.insert((y, x), count);
            count += target.dims[y] * source.dims[x];
        }
        let entry = |(y, x): (usize, usize), r: usize, c: usize| var[&(y, x)] + r * source.dims[x] + c;
        let mut rows = Vec::new();
        let mut eq = 0;
        for g in group.elements() {
            let gi = group.inv(g);
            for &(y, x) in &orbit {
                let (y2, x2) = (action.act(gi, y), action.act(gi, x));
                let (rho_t, rho_s) = (&target.cocycle[g][y], &source.cocycle[g][x]);
                // ρ′(γ)_y f_{y,x} − f_{γ⁻¹y,γ⁻¹x} ρ(γ)_x = 0, entry (r, c)
                for r in 0..target.dims[y2] {
                    for c in 0..source.dims[x] {
                        for k in 0..target.dims[y] {
                            let v = rho_t.get(r, k);
                            if !v.is_zero() {
                                rows.push((eq, entry((y, x), k, c), v));
                            }
                        }
                        for k in 0..source.dims[x2] {
                            let v = rho_s.get(k, c);
                            if !v.is_zero() {
                                rows.push((eq, entry((y2, x2), r, k), -v));
                            }
                        }
                        eq += 1;
                    }
                }
            }
        }
        let k = kernel(&IntMatrix::from_triplets(eq, count, rows));
        for j in 0..k.cols() {
            let mut triplets = Vec::new();
            for &(y, x) in &orbit {
                for r in 0..target.dims[y] {
                    for c in 0..source.dims[x] {
                        let v = k.get(entry((y, x), r, c), j);
                        if !v.is_zero() {
                            triplets.push((to[y] + r, so[x] + c, v));
                        }
                    }
                }
            }
            let matrix = IntMatrix::from_triplets(target.total_rank(), source.total_rank(), triplets);
            basis.push(CtrlMorphism::new(source.clone(), target.clone(), control.clone(), matrix)?);
        }
    }
    Ok(basis)
}

fn flatten(m: &IntMatrix) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); m.rows() * m.cols()];
    for (r, c, x) in m.triplets() {
        v[r * m.cols() + c] = x.clone();
    }
    v
}

fn columns_matrix(vectors: &[Vec<BigInt>], len: usize) -> IntMatrix {
    IntMatrix::from_triplets(
        len,
        vectors.len(),
        vectors.iter().enumerate().flat_map(|(j, v)| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(i, x)| (i, j, x.clone()))),
    )
}

/// `Hom(C, D)` modulo the morphisms factoring through objects supported in `sub`.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientHom {
    pub hom_rank: usize,
    /// Middle objects whose composites span the factoring sublattice.
    pub menu: Vec<String>,
    pub factoring_rank: usize,
    pub quotient: AbelianGroup,
    /// Quotient by the morphisms whose blocks `(y, x)` vanish unless `x` or `y` lies in `sub`.
    pub simple_quotient: AbelianGroup,
    pub agrees_with_simple: bool,
    pub witness: Option<String>,
}

pub fn quotient_hom(c: &Arc<CtrlObject>, d: &Arc<CtrlObject>, sub: &PointSet) -> Result<QuotientHom> {
    let space = c.space.clone();
    if !space.action().is_invariant_set(sub) {
        return precondition(format!("{} is not invariant", space.fmt_set(sub)));
    }
    let full = space.coarse_max().clone();
    let hom = hom_basis(c, d, &full)?;
    let len = d.total_rank() * c.total_rank();
    let hom_mat = columns_matrix(&hom.iter().map(|f| flatten(&f.matrix)).collect::<Vec<_>>(), len);
    let hom_smith = smith_normal_form(&hom_mat);
    let coords = |m: &IntMatrix| solve_with(&hom_smith, &flatten(m)).expect("element of the hom lattice");

    let mut menu: Vec<(String, Arc<CtrlObject>)> = vec![
        ("C|sub".into(), restrict(c, sub)?.object),
        ("D|sub".into(), restrict(d, sub)?.object),
    ];
    for orbit in space.action().orbits().into_iter().filter(|o| o.is_subset(sub)) {
        let x = *orbit.iter().next().expect("orbits are nonempty");
        menu.push((format!("permutation on Γ{}", space.name(x)), Arc::new(CtrlObject::permutation_on_orbit(space.clone(), x)?)));
        menu.push((format!("free on Γ{}", space.name(x)), Arc::new(CtrlObject::free_on_orbit(space.clone(), x)?)));
    }
    let mut generated = Vec::new();
    for (_, m) in &menu {
        let into = hom_basis(c, m, &full)?;
        let out = hom_basis(m, d, &full)?;
        for p in &out {
            for q in &into {
                generated.push(coords(&p.after(q)?.matrix));
            }
        }
    }
    let h = hom.len();
    let gen_mat = columns_matrix(&generated, h);
    let gen = elementary_divisors(&gen_mat);
    let quotient = AbelianGroup { rank: h - gen.rank, torsion: gen.nontrivial.clone() };

    let mut simple_control = Entourage::empty(space.size());
    for (y, x) in full.pairs().filter(|(y, x)| sub.contains(x) || sub.contains(y)) {
        simple_control.insert(y, x);
    }
    let simple: Vec<Vec<BigInt>> = hom_basis(c, d, &simple_control)?.iter().map(|f| coords(&f.matrix)).collect();
    let simple_mat = columns_matrix(&simple, h);
    let simple_rank = elementary_divisors(&simple_mat).rank;
    let simple_quotient = AbelianGroup { rank: h - simple_rank, torsion: Vec::new() };
    let gen_in_simple = {
        let s = smith_normal_form(&simple_mat);
        generated.iter().all(|v| solve_with(&s, v).is_some())
    };
    let simple_in_gen = {
        let s = smith_normal_form(&gen_mat);
        simple.iter().all(|v| solve_with(&s, v).is_some())
    };
    let witness = match (gen_in_simple, simple_in_gen) {
        (true, true) => None,
        (false, _) => Some("a composite through sub has a block outside sub; factoring lattice strictly larger".into()),
        (true, false) => Some("a morphism with blocks meeting sub does not factor through the menu".into()),
    };
    Ok(QuotientHom {
        hom_rank: h,
        menu: menu.into_iter().map(|(n, _)| n).collect(),
        factoring_rank: gen.rank,
        quotient,
        simple_quotient,
        agrees_with_simple: witness.is_none(),
        witness,
    })
}

/// The Karoubi extension of `A →f C →g B` through `D = C|_{Y_j}`.
#[derive(Debug, Clone)]
pub struct KaroubiDiagram {
    pub stage_in: usize,
    pub stage_out: usize,
    pub control: Entourage,
    pub piece: Restriction,
    pub complement: Restriction,
    pub commutes: CheckResult,
}

pub fn karoubi_complete(f: &CtrlMorphism, g: &CtrlMorphism, family: &BigFamily) -> Result<KaroubiDiagram> {
    let space = f.source.space.clone();
    if f.target.dims != g.source.dims {
        return precondition("f and g do not meet in one object");
    }
    let outer: PointSet = f.source.support.union(&g.target.support).copied().collect();
    let stage_in = family
        .stages
        .iter()
        .position(|s| outer.is_subset(s))
        .ok_or_else(|| CoarseError::Precondition(format!("{} lies in no stage", space.fmt_set(&outer))))?;
    let u = f.control.union(&g.control)?;
    let u = u.union(&u.invert())?;
    let reach = u.thicken(&family.stages[stage_in]);
    let stage_out = family.stages.iter().position(|s| reach.is_subset(s)).ok_or_else(|| {
        let pairs: Vec<String> = u.pairs().map(|(a, b)| format!("({},{})", space.name(a), space.name(b))).collect();
        CoarseError::Construction(format!("family not big for this control: U = {{{}}}", pairs.join(",")))
    })?;
    let y = &family.stages[stage_out];
    let c = f.target.clone();
    let piece = restrict(&c, y)?;
    let rest: PointSet = space.all_points().difference(y).copied().collect();
    let complement = restrict(&c, &rest)?;
    let through = piece.inclusion.matrix.mul(&piece.projection.matrix);
    let other = complement.inclusion.matrix.mul(&complement.projection.matrix);
    let witness = if piece.projection.matrix.mul(&piece.inclusion.matrix) != IntMatrix::identity(piece.object.total_rank()) {
        Some("π∘ι ≠ id_D".to_string())
    } else if through.add(&other) != IntMatrix::identity(c.total_rank()) {
        Some("C ≇ D ⊕ D^⊥".to_string())
    } else if through.mul(&f.matrix) != f.matrix {
        Some("f does not factor through D".to_string())
    } else if g.matrix.mul(&through) != g.matrix {
        Some("g ≠ g∘ι∘π".to_string())
    } else if !g.matrix.mul(&complement.inclusion.matrix).is_zero() {
        Some("g does not vanish on C|_{X∖Y_j}".to_string())
    } else {
        None
    };
    Ok(KaroubiDiagram { stage_in, stage_out, control: u, piece, complement, commutes: CheckResult::from_witness("diagram commutes", witness) })
}

/// A representation of a finite group on `ℤ^rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhRep {
    pub group: Arc<FiniteGroup>,
    pub rank: usize,
    pub matrices: Vec<IntMatrix>,
}

impl BhRep {
    pub fn new(group: Arc<FiniteGroup>, rank: usize, matrices: Vec<IntMatrix>) -> Result<Self> {
        let rep = Self { group, rank, matrices };
        if let Some(w) = rep.law_violation() {
            return Err(CoarseError::Validation { check: "representation law".into(), witness: w });
        }
        Ok(rep)
    }

    pub fn law_violation(&self) -> Option<String> {
        let g = &self.group;
        if self.matrices.len() != g.order() {
            return Some("one matrix per group element required".into());
        }
        if let Some(h) = g.elements().find(|&h| self.matrices[h].rows() != self.rank || !is_unimodular(&self.matrices[h])) {
            return Some(format!("F({}) not an automorphism of ℤ^{}", g.name(h), self.rank));
        }
        if self.matrices[g.identity()] != IntMatrix::identity(self.rank) {
            return Some("F(e) ≠ id".into());
        }
        g.elements().find_map(|a| {
            g.elements()
                .find(|&b| self.matrices[g.mul(a, b)] != self.matrices[a].mul(&self.matrices[b]))
                .map(|b| format!("F({}{}) ≠ F({})F({})", g.name(a), g.name(b), g.name(a), g.name(b)))
        })
    }
}

/// `V((Γ/H)_min,min) ≃ Fun(BH, A)` through the fiber at the base coset.
#[derive(Debug, Clone)]
pub struct BhFunctor {
    pub space: Arc<Space>,
    pub iota: GroupHom,
    pub base: usize,
    /// `s(x)`: least group element carrying the base point to `x`.
    pub section: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BhReport {
    pub section: Vec<String>,
    pub phi_psi_identity: CheckResult,
    pub unit_isomorphism: CheckResult,
    pub naturality: CheckResult,
}

impl BhReport {
    pub fn holds(&self) -> bool {
        self.phi_psi_identity.passed && self.unit_isomorphism.passed && self.naturality.passed
    }
}

impl BhFunctor {
    pub fn new(space: Arc<Space>, iota: GroupHom) -> Result<Self> {
        let gamma = space.group().clone();
        if iota.target.as_ref() != gamma.as_ref() || !iota.is_injective() {
            return precondition("ι must embed H into the acting group");
        }
        if space.coarse_max() != &Entourage::diagonal(space.size()) {
            return precondition("bh functor needs the minimal coarse structure");
        }
        let mut image = iota.image().to_vec();
        image.sort_unstable();
        let base = (0..space.size())
            .find(|&x| {
                let mut s = space.action().stabilizer(x);
                s.sort_unstable();
                s == image
            })
            .ok_or_else(|| CoarseError::Precondition("no point with stabilizer ι(H)".into()))?;
        if space.action().orbit(base).len() != space.size() {
            return precondition("action is not transitive");
        }
        let section = (0..space.size())
            .map(|x| gamma.elements().find(|&g| space.action().act(g, base) == x).expect("transitive"))
            .collect();
        Ok(Self { space, iota, base, section })
    }

    fn preimage(&self, g: usize) -> usize {
        
        self.iota.source.elements().find(|&h| self.iota.apply(h) == g).expect("element of ι(H)")
    }

    /// `Φ(A)(h) = ρ(ι(h)⁻¹)_{eH}`.
    pub fn phi(&self, obj: &CtrlObject) -> Result<BhRep> {
        let gamma = self.space.group();
        let matrices = self
            .iota
            .source
            .elements()
            .map(|h| obj.cocycle[gamma.inv(self.iota.apply(h))][self.base].clone())
            .collect();
        BhRep::new(self.iota.source.clone(), obj.dims[self.base], matrices)
    }

    pub fn phi_morphism(&self, f: &CtrlMorphism) -> IntMatrix {
        f.block(self.base, self.base)
    }

    /// `h(γ, x)` with `γ⁻¹ s(x) = s(γ⁻¹x) h`.
    fn twist(&self, g: usize, x: usize) -> usize {
        let gamma = self.space.group();
        let gi = gamma.inv(g);
        let y = self.space.action().act(gi, x);
        self.preimage(gamma.mul(gamma.inv(self.section[y]), gamma.mul(gi, self.section[x])))
    }

    pub fn psi(&self, rep: &BhRep) -> Result<CtrlObject> {
        let gamma = self.space.group();
        let n = self.space.size();
        let cocycle = gamma
            .elements()
            .map(|g| (0..n).map(|x| rep.matrices[self.twist(g, x)].clone()).collect())
            .collect();
        CtrlObject::new(self.space.clone(), self.space.all_points(), vec![rep.rank; n], cocycle)
    }

    pub fn psi_morphism(&self, source: &Arc<CtrlObject>, target: &Arc<CtrlObject>, t: &IntMatrix) -> Result<CtrlMorphism> {
        let n = self.space.size();
        let m = (0..n).fold(IntMatrix::zeros(target.total_rank(), source.total_rank()), |acc, x| {
            acc.add(&t.embed(target.total_rank(), source.total_rank(), target.offsets()[x], source.offsets()[x]))
        });
        CtrlMorphism::new(source.clone(), target.clone(), Entourage::diagonal(n), m)
    }

    /// `η_x = ρ(s(x))_x : A → ΨΦ(A)`.
    pub fn unit(&self, obj: &Arc<CtrlObject>) -> Result<CtrlMorphism> {
        let round = Arc::new(self.psi(&self.phi(obj)?)?);
        let n = self.space.size();
        let (so, to) = (obj.offsets(), round.offsets());
        let m = (0..n).fold(IntMatrix::zeros(round.total_rank(), obj.total_rank()), |acc, x| {
            acc.add(&obj.cocycle[self.section[x]][x].embed(round.total_rank(), obj.total_rank(), to[x], so[x]))
        });
        CtrlMorphism::new(obj.clone(), round, Entourage::diagonal(n), m)
    }

    pub fn round_trip(&self, objects: &[Arc<CtrlObject>], morphisms: &[CtrlMorphism]) -> BhReport {
        let section = self.section.iter().map(|&g| self.space.group().name(g).to_string()).collect();
        let ident = objects.iter().enumerate().find_map(|(i, a)| {
            let rep = self.phi(a).ok()?;
            let back = self.psi(&rep).and_then(|o| self.phi(&o));
            (back.as_ref().ok() != Some(&rep)).then(|| format!("ΦΨΦ(A_{i}) ≠ Φ(A_{i})"))
        });
        let unit = objects.iter().enumerate().find_map(|(i, a)| match self.unit(a) {
            Err(e) => Some(format!("η at A_{i}: {e}")),
            Ok(eta) => (!is_unimodular(&eta.matrix)).then(|| format!("η at A_{i} not invertible")),
        });
        let natural = morphisms.iter().enumerate().find_map(|(i, f)| {
            let run = || -> Result<bool> {
                let (ea, eb) = (self.unit(&f.source)?, self.unit(&f.target)?);
                let tf = self.psi_morphism(&ea.target, &eb.target, &self.phi_morphism(f))?;
                Ok(tf.matrix.mul(&ea.matrix) == eb.matrix.mul(&f.matrix))
            };
            match run() {
                Ok(true) => None,
                Ok(false) => Some(format!("η not natural at morphism {i}")),
                Err(e) => Some(format!("morphism {i}: {e}")),
            }
        });
        BhReport {
            section,
            phi_psi_identity: CheckResult::from_witness("Φ∘Ψ = id", ident),
            unit_isomorphism: CheckResult::from_witness("η: id ≅ Ψ∘Φ", unit),
            naturality: CheckResult::from_witness("η natural", natural),
        }
    }
}

/// Object of `A ∗_Γ X`: a rank at each point of `X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvObject {
    pub ranks: Vec<usize>,
}

/// Morphism of `A ∗_Γ X`: `blocks[x][g] : A_x → B_{g⁻¹x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvMorphism {
    pub source: ConvObject,
    pub target: ConvObject,
    pub blocks: Vec<Vec<IntMatrix>>,
}

/// `V(X_min,max ⊗ Γ_can,min) → A ∗_Γ X`.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub set: GammaSet,
    pub space: Arc<Space>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FullnessReport {
    pub hom_rank: usize,
    pub convolution_rank: usize,
    pub faithful: bool,
    pub full: bool,
}

impl Convolution {
    pub fn new(set: GammaSet) -> Result<Self> {
        let group = set.action.group().clone();
        let space = tensor(&build(&SpaceSpec::MinMax(set.clone()))?, &build(&SpaceSpec::CanMin { group })?)?;
        Ok(Self { set, space: Arc::new(space) })
    }

    fn order(&self) -> usize {
        self.set.action.group().order()
    }

    pub fn point(&self, x: usize, g: usize) -> usize {
        x * self.order() + g
    }

    fn check(&self, obj: &CtrlObject) -> Result<()> {
        if obj.space.size() != self.space.size() || obj.space.coarse_max() != self.space.coarse_max() {
            return precondition("object does not live on X_min,max ⊗ Γ_can,min");
        }
        Ok(())
    }

    pub fn phi(&self, obj: &CtrlObject) -> Result<ConvObject> {
        self.check(obj)?;
        let e = self.set.action.group().identity();
        Ok(ConvObject { ranks: (0..self.set.size()).map(|x| obj.dims[self.point(x, e)]).collect() })
    }

    /// `Φ(f)_{x,g} = ρ′(g)_{(x,g)} ∘ f_{(x,g),(x,1)}`.
    pub fn phi_morphism(&self, f: &CtrlMorphism) -> Result<ConvMorphism> {
        self.check(&f.source)?;
        let e = self.set.action.group().identity();
        let blocks = (0..self.set.size())
            .map(|x| {
                self.set
                    .action
                    .group()
                    .elements()
                    .map(|g| f.target.cocycle[g][self.point(x, g)].mul(&f.block(self.point(x, g), self.point(x, e))))
                    .collect()
            })
            .collect();
        Ok(ConvMorphism { source: self.phi(&f.source)?, target: self.phi(&f.target)?, blocks })
    }

    /// Rank `A_{g⁻¹y}` at `(y, g)` with identity cocycle; `Φ` of it is `A` on the nose.
    pub fn preimage(&self, a: &ConvObject) -> Result<CtrlObject> {
        let group = self.set.action.group();
        let dims = (0..self.set.size())
            .flat_map(|y| group.elements().map(move |g| (y, g)))
            .map(|(y, g)| a.ranks[self.set.action.act(group.inv(g), y)])
            .collect();
        CtrlObject::with_identity_cocycle(self.space.clone(), dims)
    }

    /// `(ψ∗φ)_{x,g} = Σ_h ψ_{h⁻¹x, h⁻¹g} φ_{x,h}`.
    pub fn convolve(&self, psi: &ConvMorphism, phi: &ConvMorphism) -> ConvMorphism {
        let group = self.set.action.group();
        let blocks = (0..self.set.size())
            .map(|x| {
                group
                    .elements()
                    .map(|g| {
                        let rows = psi.target.ranks[self.set.action.act(group.inv(g), x)];
                        group.elements().fold(IntMatrix::zeros(rows, phi.source.ranks[x]), |acc, h| {
                            let hi = group.inv(h);
                            acc.add(&psi.blocks[self.set.action.act(hi, x)][group.mul(hi, g)].mul(&phi.blocks[x][h]))
                        })
                    })
                    .collect()
            })
            .collect();
        ConvMorphism { source: phi.source.clone(), target: psi.target.clone(), blocks }
    }

    /// Compares the lattice of equivariant morphisms with all convolution families.
    pub fn fullness(&self, c: &Arc<CtrlObject>, d: &Arc<CtrlObject>) -> Result<FullnessReport> {
        let basis = hom_basis(c, d, self.space.coarse_max())?;
        let images = basis.iter().map(|f| self.phi_morphism(f)).collect::<Result<Vec<_>>>()?;
        let flat: Vec<Vec<BigInt>> = images.iter().map(|m| m.blocks.iter().flatten().flat_map(flatten).collect()).collect();
        let (a, b) = (self.phi(c)?, self.phi(d)?);
        let group = self.set.action.group();
        let convolution_rank = (0..self.set.size())
            .flat_map(|x| group.elements().map(move |g| (x, g)))
            .map(|(x, g)| a.ranks[x] * b.ranks[self.set.action.act(group.inv(g), x)])
            .sum();
        let comparison = columns_matrix(&flat, convolution_rank);
        let div = elementary_divisors(&comparison);
        Ok(FullnessReport {
            hom_rank: basis.len(),
            convolution_rank,
            faithful: div.rank == basis.len(),
            full: div.rank == convolution_rank && div.nontrivial.is_empty(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaReport {
    pub horizon: usize,
    /// Fiber ranks of `Σ = ⊕_{n≤horizon}(φⁿ)_*A` on the window.
    pub sigma_ranks: Vec<usize>,
    /// Fiber ranks of `A ⊕ φ_*(⊕_{n<horizon}(φⁿ)_*A)` on the window.
    pub swindle_ranks: Vec<usize>,
    pub ranks_agree: CheckResult,
    pub isomorphism: CheckResult,
    /// Fiber ranks inside the window no longer change between horizons.
    pub locally_finite: CheckResult,
}

impl SigmaReport {
    pub fn holds(&self) -> bool {
        self.ranks_agree.passed && self.isomorphism.passed && self.locally_finite.passed
    }
}

/// An object together with the summand and source vector each basis vector came from.
struct Tagged {
    object: CtrlObject,
    tags: Vec<(usize, usize)>,
}

fn tagged_sum(parts: &[Tagged]) -> Result<Tagged> {
    let mut iter = parts.iter();
    let first = iter.next().expect("nonempty");
    let mut acc = Arc::new(first.object.clone());
    let mut tags = first.tags.clone();
    for p in iter {
        let b = Arc::new(p.object.clone());
        let sum = direct_sum(&acc, &b)?;
        let mut merged = vec![(0, 0); sum.object.total_rank()];
        for (i, t) in tags.iter().enumerate() {
            merged[sum.inclusions[0].matrix.column(i)[0].0] = *t;
        }
        for (i, t) in p.tags.iter().enumerate() {
            merged[sum.inclusions[1].matrix.column(i)[0].0] = *t;
        }
        acc = sum.object;
        tags = merged;
    }
    Ok(Tagged { object: Arc::unwrap_or_clone(acc), tags })
}

fn tagged_push(t: &Tagged, map: &[Option<usize>], bump: usize) -> Result<Tagged> {
    let (object, p) = pushforward_partial(&t.object, map, t.object.space.clone())?;
    let mut tags = vec![(0, 0); object.total_rank()];
    for (i, tag) in t.tags.iter().enumerate() {
        if let Some(&(r, _)) = p.column(i).first() {
            tags[r] = (tag.0 + bump, tag.1);
        }
    }
    Ok(Tagged { object, tags })
}

/// Horizon-bounded Eilenberg swindle `A ⊕ φ_*Σ ≅ Σ` for a sample object of the given rank.
pub fn flasque_sigma_check(space: &SpaceDescription, f: &Endomorphism, horizon: usize, sample_rank: usize) -> Result<SigmaReport> {
    if horizon < 1 {
        return precondition("horizon must be at least 1");
    }
    let (carrier, map, window): (Arc<Space>, Vec<Option<usize>>, Vec<usize>) = match (space, f) {
        (SpaceDescription::Finite(x), Endomorphism::Finite(m)) => {
            if m.len() != x.size() {
                return precondition("endomorphism sized to a different carrier");
            }
            (x.clone(), m.iter().map(|&y| Some(y)).collect(), (0..x.size()).collect())
        }
        (SpaceDescription::Shift(fam), Endomorphism::Shift { offset, base_map }) => {
            let k = fam.base.size();
            let positions = (horizon + 1) * offset.max(&1) + 2;
            let t = Arc::new(fam.truncation(positions)?);
            let map = (0..t.size())
                .map(|p| {
                    let (m, x) = (p / k, p % k);
                    (m + offset < positions).then(|| fam.index(m + offset, base_map[x]))
                })
                .collect();
            (t, map, (0..(horizon + 1) * k).collect())
        }
        _ => return precondition("endomorphism kind does not match the space description"),
    };
    let n = carrier.size();
    let base = CtrlObject::with_identity_cocycle(carrier.clone(), vec![sample_rank; n])?;
    let base_tags: Vec<(usize, usize)> = (0..base.total_rank()).map(|i| (0, i)).collect();
    let powers = |count: usize| -> Result<Vec<Tagged>> {
        let mut out = vec![Tagged { object: base.clone(), tags: base_tags.clone() }];
        while out.len() < count {
            let next = tagged_push(out.last().expect("nonempty"), &map, 1)?;
            out.push(next);
        }
        Ok(out)
    };
    let sigma = tagged_sum(&powers(horizon + 1)?)?;
    let shorter = tagged_sum(&powers(horizon)?)?;
    let pushed = tagged_push(&shorter, &map, 1)?;
    let swindle = tagged_sum(&[Tagged { object: base.clone(), tags: base_tags.clone() }, pushed])?;
    let sigma_ranks: Vec<usize> = window.iter().map(|&p| sigma.object.dims[p]).collect();
    let swindle_ranks: Vec<usize> = window.iter().map(|&p| swindle.object.dims[p]).collect();
    let ranks_agree = CheckResult::from_witness(
        "fiber ranks agree",
        window.iter().find(|&&p| sigma.object.dims[p] != swindle.object.dims[p]).map(|&p| {
            format!("rank {} vs {} at {}", sigma.object.dims[p], swindle.object.dims[p], carrier.name(p))
        }),
    );
    // match basis vectors by tag; only meaningful when the objects agree everywhere
    let iso = (|| -> Option<String> {
        if sigma.object.dims != swindle.object.dims {
            return Some("objects differ outside the window".into());
        }
        let index: HashMap<(usize, usize), usize> = swindle.tags.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        let t = sigma.tags.iter().enumerate().map(|(c, tag)| index.get(tag).map(|&r| (r, c, BigInt::one())));
        let t: Option<Vec<_>> = t.collect();
        let total = sigma.object.total_rank();
        let m = IntMatrix::from_triplets(total, total, t?);
        let f = CtrlMorphism::new(Arc::new(sigma.object.clone()), Arc::new(swindle.object.clone()), Entourage::diagonal(n), m.clone());
        match f {
            Err(e) => Some(format!("tag matching is not a controlled morphism: {e}")),
            Ok(_) if m.transpose().mul(&m) != IntMatrix::identity(total) => Some("tag matching not invertible".into()),
            Ok(_) => None,
        }
    })();
    let isomorphism = CheckResult::from_witness("Σ ≅ id ⊕ φ_*Σ blockwise", iso);
    let stable: Vec<usize> = match space {
        SpaceDescription::Finite(_) => window.clone(),
        SpaceDescription::Shift(fam) => (0..horizon * fam.base.size()).collect(),
    };
    let locally_finite = CheckResult::from_witness(
        "fiber ranks stabilize",
        stable.iter().find(|&&p| sigma.object.dims[p] != shorter.object.dims[p]).map(|&p| {
            format!("rank at {} grows from {} to {} at horizon {horizon}", carrier.name(p), shorter.object.dims[p], sigma.object.dims[p])
        }),
    );
    Ok(SigmaReport { horizon, sigma_ranks, swindle_ranks, ranks_agree, isomorphism, locally_finite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flasque::ShiftFamily;
    use crate::group_change::subgroup_inclusion;
    use crate::space::{Action, Bornology};

    fn zn(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n))
    }

    fn band(n: usize) -> Arc<Space> {
        let g = Arc::new(FiniteGroup::trivial());
        Arc::new(
            Space::checked((0..n).map(|i| i.to_string()).collect(), Action::trivial(g, n), vec![Entourage::band(n, 1)], Bornology::singletons(n))
                .unwrap(),
        )
    }

    fn ints(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn zero_and_free_objects_validate() {
        let can = Arc::new(build(&SpaceSpec::CanMin { group: zn(2) }).unwrap());
        let z = CtrlObject::zero(can.clone());
        assert!(z.support_of(&can.all_points()).is_empty());
        let free = CtrlObject::with_identity_cocycle(can.clone(), vec![1, 1]).unwrap();
        assert_eq!(free.total_rank(), 2);
        assert!(CtrlObject::with_identity_cocycle(can, vec![1, 2]).is_err());
    }

    #[test]
    fn broken_cocycle_is_reported() {
        let can = Arc::new(build(&SpaceSpec::CanMin { group: zn(2) }).unwrap());
        let mut obj = CtrlObject::with_identity_cocycle(can, vec![1, 1]).unwrap();
        obj.cocycle[1][0] = ints(&[vec![-1]]);
        let report = obj.validate();
        assert_eq!(report.first_failure().map(|c| c.name.as_str()), Some("cocycle law"));
    }

    #[test]
    fn pushforward_to_point_aggregates_ranks() {
        let x = band(3);
        let obj = CtrlObject::with_identity_cocycle(x.clone(), vec![1, 1, 1]).unwrap();
        let pt = Arc::new(Space::point());
        let f = SpaceMap::new(x, pt, vec![0, 0, 0]).unwrap();
        assert_eq!(pushforward(&obj, &f).unwrap().dims, vec![3]);
    }

    #[test]
    fn composition_and_sums() {
        let x = band(3);
        let a = Arc::new(CtrlObject::with_identity_cocycle(x.clone(), vec![1, 2, 1]).unwrap());
        let basis = hom_basis(&a, &a, x.coarse_max()).unwrap();
        assert_eq!(basis.len(), 16);
        let id = CtrlMorphism::identity(a.clone());
        assert_eq!(id.after(&basis[3]).unwrap().matrix, basis[3].matrix);
        let s = direct_sum(&a, &a).unwrap();
        let pi = s.projections[0].after(&s.inclusions[0]).unwrap();
        assert_eq!(pi.matrix, IntMatrix::identity(a.total_rank()));
        assert!(s.projections[1].after(&s.inclusions[0]).unwrap().matrix.is_zero());
        let total = s.inclusions[0].after(&s.projections[0]).unwrap().plus(&s.inclusions[1].after(&s.projections[1]).unwrap()).unwrap();
        assert_eq!(total.matrix, IntMatrix::identity(s.object.total_rank()));
        let r = restrict(&a, &[0, 1].into()).unwrap();
        assert_eq!(r.projection.after(&r.inclusion).unwrap().matrix, IntMatrix::identity(r.object.total_rank()));
    }

    #[test]
    fn bh_sign_representation() {
        let g = zn(2);
        let set = GammaSet::cosets(g.clone(), &[0, 1]).unwrap();
        let space = Arc::new(build(&SpaceSpec::MinMin(set)).unwrap());
        let iota = subgroup_inclusion(&g, &[0, 1]).unwrap();
        let bh = BhFunctor::new(space.clone(), iota).unwrap();
        let sign = CtrlObject::new(space.clone(), space.all_points(), vec![1], vec![vec![ints(&[vec![1]])], vec![ints(&[vec![-1]])]]).unwrap();
        let rep = bh.phi(&sign).unwrap();
        assert_eq!(rep.matrices[1], ints(&[vec![-1]]));
        let a = Arc::new(sign);
        let report = bh.round_trip(std::slice::from_ref(&a), &[CtrlMorphism::identity(a.clone())]);
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn bh_round_trip_on_cosets() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let h = [s3.identity(), s3.index_of("(12)").unwrap()];
        let space = Arc::new(build(&SpaceSpec::MinMin(GammaSet::cosets(s3.clone(), &h).unwrap())).unwrap());
        let iota = subgroup_inclusion(&s3, &h).unwrap();
        let bh = BhFunctor::new(space.clone(), iota.clone()).unwrap();
        let swap = BhRep::new(iota.source.clone(), 2, vec![IntMatrix::identity(2), ints(&[vec![0, 1], vec![1, 0]])]).unwrap();
        let obj = Arc::new(bh.psi(&swap).unwrap());
        let endo = hom_basis(&obj, &obj, space.coarse_max()).unwrap();
        let report = bh.round_trip(&[obj], &endo);
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn convolution_fully_faithful_on_s3_cosets() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let h = [s3.identity(), s3.index_of("(12)").unwrap()];
        let conv = Convolution::new(GammaSet::cosets(s3, &h).unwrap()).unwrap();
        let a = ConvObject { ranks: vec![1, 0, 2] };
        let b = ConvObject { ranks: vec![1, 1, 0] };
        let (c, d) = (Arc::new(conv.preimage(&a).unwrap()), Arc::new(conv.preimage(&b).unwrap()));
        assert_eq!(conv.phi(&c).unwrap(), a);
        let r = conv.fullness(&c, &d).unwrap();
        assert!(r.full && r.faithful && r.hom_rank == r.convolution_rank, "{r:?}");
        let f = &hom_basis(&c, &d, conv.space.coarse_max()).unwrap()[1];
        let g = &hom_basis(&d, &c, conv.space.coarse_max()).unwrap()[2];
        let composite = conv.phi_morphism(&g.after(f).unwrap()).unwrap();
        assert_eq!(composite, conv.convolve(&conv.phi_morphism(g).unwrap(), &conv.phi_morphism(f).unwrap()));
    }

    #[test]
    fn karoubi_on_band_family() {
        let x = band(6);
        let c = Arc::new(CtrlObject::with_identity_cocycle(x.clone(), vec![1; 6]).unwrap());
        let a = Arc::new(CtrlObject::with_identity_cocycle(x.clone(), vec![1, 1, 0, 0, 0, 0]).unwrap());
        let step = x.step_entourage();
        let f = hom_basis(&a, &c, &step).unwrap().into_iter().reduce(|p, q| p.plus(&q).unwrap()).unwrap();
        let g = hom_basis(&c, &a, &step).unwrap().into_iter().reduce(|p, q| p.plus(&q).unwrap()).unwrap();
        let fam = BigFamily::generated(&x, &[0].into());
        let d = karoubi_complete(&f, &g, &fam).unwrap();
        assert!(d.commutes.passed, "{:?}", d.commutes);
        assert_eq!(d.piece.object.support, [0, 1, 2].into());
        let zero = CtrlMorphism::zero(a.clone(), c.clone());
        let zero_back = CtrlMorphism::zero(c, a);
        assert!(karoubi_complete(&zero, &zero_back, &fam).unwrap().commutes.passed);
    }

    #[test]
    fn quotient_hom_extremes_and_two_points() {
        let g = Arc::new(FiniteGroup::trivial());
        let x = Arc::new(build(&SpaceSpec::MaxMax(GammaSet::trivial(g, 2))).unwrap());
        let c = Arc::new(CtrlObject::with_identity_cocycle(x.clone(), vec![1, 1]).unwrap());
        let all = quotient_hom(&c, &c, &x.all_points()).unwrap();
        assert!(all.quotient.is_zero());
        let none = quotient_hom(&c, &c, &PointSet::new()).unwrap();
        assert_eq!(none.quotient, AbelianGroup::free(4));
        let one = quotient_hom(&c, &c, &[0].into()).unwrap();
        // every block factors through the point 0 in the max structure
        assert!(one.quotient.is_zero());
        assert_eq!(one.simple_quotient, AbelianGroup::free(1));
        assert!(!one.agrees_with_simple);
    }

    #[test]
    fn swindle_on_half_line_and_identity() {
        let fam = ShiftFamily::half_line();
        let r = flasque_sigma_check(&SpaceDescription::Shift(fam), &Endomorphism::shift(1, 1), 10, 1).unwrap();
        assert!(r.holds(), "{r:?}");
        let expected: Vec<usize> = (0..=10).map(|m: usize| (m + 1).min(11)).collect();
        assert_eq!(r.sigma_ranks, expected);
        let zero = flasque_sigma_check(&SpaceDescription::Shift(ShiftFamily::half_line()), &Endomorphism::shift(1, 1), 3, 0).unwrap();
        assert!(zero.holds());
        let pt = Arc::new(Space::point());
        let r = flasque_sigma_check(&SpaceDescription::Finite(pt), &Endomorphism::Finite(vec![0]), 4, 1).unwrap();
        assert!(!r.locally_finite.passed);
    }
}
