//! Equivariant coarse homology over ℤ on orbit bases, group homology via the standard
//! complex, and the chain maps relating them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::constructions::{build, free_union, tensor, GammaSet, SpaceSpec};
use crate::error::{precondition, CoarseError, Result};
use crate::group::GroupHom;
use crate::group_change::{induce, quotient_by, restrict};
use crate::linalg::{column_basis, elementary_divisors, kernel, lattice_basis, serialize_bigints, smith_normal_form, solve_with, IntMatrix, Smith};
use crate::maps::SpaceMap;
use crate::space::{Action, CheckResult, Entourage, PointSet, Space};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OrbitBasisElement {
    pub tuple: Vec<usize>,
    pub stabilizer: usize,
    pub orbit_size: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// Largest admissible basis in any single degree.
    pub basis_cap: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { basis_cap: 400_000 }
    }
}

/// Orbit-basis chain complex in degrees `0..=top`.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub bases: Vec<Vec<OrbitBasisElement>>,
    /// `boundaries[n]` is `∂_n: C_n → C_{n-1}`; `boundaries[0]` has no rows.
    pub boundaries: Vec<IntMatrix>,
    /// Carrier permutations used to normalize tuples; empty for the standard complex.
    perms: Vec<Vec<usize>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

/// Least tuple in the orbit and the order of the stabilizer.
fn normalize(perms: &[Vec<usize>], t: &[usize]) -> (Vec<usize>, usize) {
    let mut best = t.to_vec();
    let mut stab = 0;
    let mut image = vec![0; t.len()];
    for p in perms {
        for (slot, &x) in image.iter_mut().zip(t) {
            *slot = p[x];
        }
        if image == t {
            stab += 1;
        } else if image < best {
            best.clone_from(&image);
        }
    }
    (best, stab.max(1))
}

impl ChainComplex {
    fn from_bases(bases: Vec<Vec<OrbitBasisElement>>, perms: Vec<Vec<usize>>) -> Self {
        let index = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, e)| (e.tuple.clone(), i)).collect())
            .collect();
        let boundaries = Vec::new();
        Self { bases, boundaries, perms, index }
    }

    pub fn top(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn dim(&self, n: usize) -> usize {
        self.bases[n].len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn boundary(&self, n: usize) -> &IntMatrix {
        &self.boundaries[n]
    }

    pub fn index_of(&self, n: usize, rep: &[usize]) -> Option<usize> {
        self.index.get(n)?.get(rep).copied()
    }

    /// Basis index of the orbit of `t` together with `|Γ_t|`; `None` if `t` is uncontrolled.
    pub fn locate(&self, t: &[usize]) -> Option<(usize, usize)> {
        let n = t.len().checked_sub(1)?;
        let (rep, stab) = normalize(&self.perms, t);
        self.index_of(n, &rep).map(|i| (i, stab))
    }

    /// First degree where `∂∘∂ ≠ 0`, with an offending entry.
    pub fn boundary_defect(&self) -> Option<String> {
        (2..=self.top()).find_map(|n| {
            let sq = self.boundaries[n - 1].mul(&self.boundaries[n]);
            let first = sq.triplets().next().map(|(r, c, v)| format!("(∂_{}∂_{n})[{r},{c}] = {v}", n - 1));
            first
        })
    }

    /// Negates the first stored entry of `∂_n`; used to exercise the checks.
    pub fn flip_boundary_sign(&mut self, n: usize) -> bool {
        let Some((r, c, _)) = self.boundaries.get(n).and_then(|m| m.triplets().next()) else { return false };
        self.boundaries[n].negate_entry(r, c);
        true
    }

    /// `H_0 … H_{top-1}`; the top degree only feeds `∂_top`.
    pub fn homology(&self) -> Vec<HomologyGroup> {
        let divisors: Vec<_> = (0..=self.top())
            .map(|n| if n == 0 { None } else { Some(elementary_divisors(&self.boundaries[n])) })
            .collect();
        (0..self.top())
            .map(|n| {
                let in_rank = divisors[n].as_ref().map_or(0, |d| d.rank);
                let out = divisors[n + 1].as_ref().expect("degree ≥ 1");
                HomologyGroup { rank: self.dim(n) - in_rank - out.rank, torsion: out.nontrivial.clone() }
            })
            .collect()
    }

    /// Dense presentation of `H_n`; requires `n < top`.
    pub fn presentation(&self, n: usize) -> HomologyPresentation {
        HomologyPresentation::new(self, n)
    }
}

fn check_cap(degree: usize, size: usize, cfg: &ChainConfig) -> Result<()> {
    if size > cfg.basis_cap {
        return Err(CoarseError::Resource { degree, size, cap: cfg.basis_cap });
    }
    Ok(())
}

/// Orbits of coarse-controlled tuples with stabilizer-index boundary coefficients.
pub fn chain_complex(space: &Space, top: usize, cfg: &ChainConfig) -> Result<ChainComplex> {
    let perms = space.action().perms().to_vec();
    let order = perms.len();
    let components = space.components();
    let mut bases = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let len = n + 1;
        let raw: usize = components.iter().map(|c| c.len().saturating_pow(len as u32)).fold(0, usize::saturating_add);
        check_cap(n, raw / order.max(1), cfg)?;
        let mut basis = Vec::new();
        for comp in &components {
            let k = comp.len();
            let mut digits = vec![0usize; len];
            loop {
                let t: Vec<usize> = digits.iter().map(|&d| comp[d]).collect();
                let (rep, stab) = normalize(&perms, &t);
                if rep == t {
                    basis.push(OrbitBasisElement { tuple: t, stabilizer: stab, orbit_size: order / stab });
                }
                let Some(pos) = (0..len).rev().find(|&i| digits[i] + 1 < k) else { break };
                digits[pos] += 1;
                for d in &mut digits[pos + 1..] {
                    *d = 0;
                }
            }
        }
        check_cap(n, basis.len(), cfg)?;
        bases.push(basis);
    }
    let mut cx = ChainComplex::from_bases(bases, perms);
    cx.boundaries = (0..=top).map(|n| face_boundary(&cx, n)).collect();
    if let Some(w) = cx.boundary_defect() {
        return Err(CoarseError::Validation { check: "∂∘∂ = 0".into(), witness: w });
    }
    Ok(cx)
}

fn face_boundary(cx: &ChainComplex, n: usize) -> IntMatrix {
    if n == 0 {
        return IntMatrix::zeros(0, cx.dim(0));
    }
    let mut triplets = Vec::new();
    for (j, e) in cx.bases[n].iter().enumerate() {
        for i in 0..=n {
            let mut face = e.tuple.clone();
            face.remove(i);
            let (row, stab) = cx.locate(&face).expect("faces of controlled tuples are controlled");
            let sign = if i % 2 == 0 { 1 } else { -1 };
            triplets.push((row, j, BigInt::from(sign * (stab / e.stabilizer) as i64)));
        }
    }
    IntMatrix::from_triplets(cx.dim(n - 1), cx.dim(n), triplets)
}

/// `ℤ^rank ⊕ ⨁ ℤ/dᵢ` with `d₁ | d₂ | …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HomologyGroup {
    pub rank: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn zero() -> Self {
        Self { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        Self { rank, torsion: Vec::new() }
    }

    pub fn cyclic(order: u64) -> Self {
        match order {
            0 => Self::free(1),
            1 => Self::zero(),
            m => Self { rank: 0, torsion: vec![BigInt::from(m)] },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `H_0 … H_top` of the space.
pub fn homology(space: &Space, top: usize, cfg: &ChainConfig) -> Result<Vec<HomologyGroup>> {
    Ok(chain_complex(space, top + 1, cfg)?.homology())
}

/// Cycles modulo boundaries in explicit coordinates: torsion summands first, then free ones.
#[derive(Debug, Clone)]
pub struct HomologyPresentation {
    pub degree: usize,
    pub group: HomologyGroup,
    /// Cycle representatives of the summands.
    pub generators: Vec<Vec<BigInt>>,
    /// Rows of `Q⁻¹` from the Smith form of `∂_n`: the first `rank` vanish exactly on cycles,
    /// the rest give coordinates in the kernel basis.
    coords: IntMatrix,
    rank: usize,
    reduce: IntMatrix,
    kept: Vec<usize>,
    moduli: Vec<BigInt>,
}

fn cycle_coordinates(coords: &IntMatrix, rank: usize, chain: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut y = coords.apply(chain);
    if y[..rank].iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(y.split_off(rank))
}

impl HomologyPresentation {
    fn new(cx: &ChainComplex, n: usize) -> Self {
        let dim = cx.dim(n);
        let (k, coords, rank) = if n == 0 {
            (IntMatrix::identity(dim), IntMatrix::identity(dim), 0)
        } else {
            let s = smith_normal_form(&cx.boundaries[n]);
            let k = s.cols.select_columns(&(s.rank..dim).collect::<Vec<_>>());
            (k, s.cols_inv, s.rank)
        };
        let next = &cx.boundaries[n + 1];
        let image = column_basis(next);
        let b = lattice_basis(
            k.cols(),
            (0..image.cols()).map(|j| {
                let mut col = vec![BigInt::zero(); dim];
                for (r, v) in image.column(j) {
                    col[*r] = v.clone();
                }
                cycle_coordinates(&coords, rank, &col).expect("boundaries are cycles")
            }),
        );
        let s = smith_normal_form(&b);
        let mut kept = Vec::new();
        let mut moduli = Vec::new();
        for i in 0..k.cols() {
            let d = s.diagonal.get(i).cloned().unwrap_or_default();
            if !d.is_one() {
                kept.push(i);
                moduli.push(d);
            }
        }
        let gens = k.mul(&s.rows_inv);
        let generators = kept
            .iter()
            .map(|&i| {
                let mut v = vec![BigInt::zero(); dim];
                for (r, x) in gens.column(i) {
                    v[*r] = x.clone();
                }
                v
            })
            .collect();
        let group = HomologyGroup {
            rank: moduli.iter().filter(|d| d.is_zero()).count(),
            torsion: moduli.iter().filter(|d| !d.is_zero()).cloned().collect(),
        };
        Self { degree: n, group, generators, coords, rank, reduce: s.rows, kept, moduli }
    }

    /// Coordinates of a cycle in the summands, torsion entries reduced; `None` off the cycles.
    pub fn coordinates(&self, cycle: &[BigInt]) -> Option<Vec<BigInt>> {
        let x = cycle_coordinates(&self.coords, self.rank, cycle)?;
        let w = self.reduce.apply(&x);
        Some(
            self.kept
                .iter()
                .zip(&self.moduli)
                .map(|(&i, d)| if d.is_zero() { w[i].clone() } else { w[i].mod_floor(d) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Matrix of the map on homology: column `j` holds the image of generator `j`.
pub fn homology_map(source: &HomologyPresentation, target: &HomologyPresentation, chain: &IntMatrix) -> Result<IntMatrix> {
    let mut triplets = Vec::new();
    for (j, g) in source.generators.iter().enumerate() {
        let image = chain.apply(g);
        let coords = target
            .coordinates(&image)
            .ok_or_else(|| CoarseError::Validation { check: "chain map".into(), witness: "image of a cycle is not a cycle".into() })?;
        triplets.extend(coords.into_iter().enumerate().map(|(i, v)| (i, j, v)));
    }
    Ok(IntMatrix::from_triplets(target.len(), source.len(), triplets))
}

/// Whether `second∘first` is the identity on the presented group.
pub fn composes_to_identity(p: &HomologyPresentation, first: &IntMatrix, second: &IntMatrix) -> bool {
    p.generators.iter().enumerate().all(|(j, g)| {
        let back = second.apply(&first.apply(g));
        let expected: Vec<BigInt> = (0..p.len()).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect();
        p.coordinates(&back).is_some_and(|c| {
            c.iter().zip(&expected).zip(&p.moduli).all(|((a, b), d)| if d.is_zero() { a == b } else { (a - b).mod_floor(d).is_zero() })
        })
    })
}

/// Push forward orbit basis elements along a point map: `e_t ↦ [Γ_{f t} : Γ_t]·e_{f t}`.
pub(crate) fn pushforward(source: &ChainComplex, target: &ChainComplex, n: usize, f: &[usize]) -> IntMatrix {
    let triplets = source.bases[n].iter().enumerate().map(|(j, e)| {
        let image: Vec<usize> = e.tuple.iter().map(|&x| f[x]).collect();
        let (row, stab) = target.locate(&image).expect("controlled maps send controlled tuples to controlled tuples");
        (row, j, BigInt::from((stab / e.stabilizer) as i64))
    });
    IntMatrix::from_triplets(target.dim(n), source.dim(n), triplets)
}

/// First degree `n ≤ top` where `∂∘f ≠ f∘∂`.
pub fn chain_map_defect(source: &ChainComplex, target: &ChainComplex, maps: &[IntMatrix]) -> Option<String> {
    (1..maps.len()).find_map(|n| {
        let left = target.boundaries[n].mul(&maps[n]);
        let right = maps[n - 1].mul(&source.boundaries[n]);
        (left != right).then(|| format!("∂f ≠ f∂ in degree {n}"))
    })
}

#[derive(Debug, Clone)]
pub struct InducedMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    /// Chain matrices in degrees `0..=top+1`.
    pub chain: Vec<IntMatrix>,
    pub source_homology: Vec<HomologyPresentation>,
    pub target_homology: Vec<HomologyPresentation>,
    /// Homology matrices in degrees `0..=top`.
    pub homology: Vec<IntMatrix>,
}

impl InducedMap {
    pub fn is_isomorphism(&self, inverse: &InducedMap) -> bool {
        self.source_homology.iter().zip(&self.target_homology).enumerate().all(|(n, (s, t))| {
            composes_to_identity(s, &self.chain[n], &inverse.chain[n])
                && composes_to_identity(t, &inverse.chain[n], &self.chain[n])
        })
    }
}

/// The chain map of `f` in degrees `0..=top`, without homology presentations.
pub fn induced_chain_map(f: &SpaceMap, top: usize, cfg: &ChainConfig) -> Result<(ChainComplex, ChainComplex, Vec<IntMatrix>)> {
    if let Some(w) = f.morphism_witness() {
        return precondition(format!("not a morphism: {w}"));
    }
    let source = chain_complex(&f.domain, top, cfg)?;
    let target = chain_complex(&f.codomain, top, cfg)?;
    let chain: Vec<IntMatrix> = (0..=top).map(|n| pushforward(&source, &target, n, &f.assignment)).collect();
    if let Some(w) = chain_map_defect(&source, &target, &chain) {
        return Err(CoarseError::Validation { check: "chain map".into(), witness: w });
    }
    Ok((source, target, chain))
}

pub fn induced_map(f: &SpaceMap, top: usize, cfg: &ChainConfig) -> Result<InducedMap> {
    if let Some(w) = f.morphism_witness() {
        return precondition(format!("not a morphism: {w}"));
    }
    let (source, target, chain) = induced_chain_map(f, top + 1, cfg)?;
    let source_homology: Vec<_> = (0..=top).map(|n| source.presentation(n)).collect();
    let target_homology: Vec<_> = (0..=top).map(|n| target.presentation(n)).collect();
    let homology = (0..=top)
        .map(|n| homology_map(&source_homology[n], &target_homology[n], &chain[n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedMap { source, target, chain, source_homology, target_homology, homology })
}

/// `ℤ ⊗_{ℤΓ} ℤ[Γ^{n+1} × S]` on normal forms `(1, g₁, …, g_n, s)`.
pub fn standard_group_complex(set: &Action, top: usize, cfg: &ChainConfig) -> Result<ChainComplex> {
    let group = set.group().clone();
    let order = group.order();
    let e = group.identity();
    let mut bases = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let size = order.checked_pow(n as u32).and_then(|p| p.checked_mul(set.carrier_size())).unwrap_or(usize::MAX);
        check_cap(n, size, cfg)?;
        let basis = (0..size)
            .map(|mut code| {
                let s = code % set.carrier_size();
                code /= set.carrier_size();
                let mut gs = vec![0; n];
                for slot in gs.iter_mut().rev() {
                    *slot = code % order;
                    code /= order;
                }
                let mut tuple = Vec::with_capacity(n + 2);
                tuple.push(e);
                tuple.extend(gs);
                tuple.push(s);
                OrbitBasisElement { tuple, stabilizer: 1, orbit_size: order }
            })
            .collect();
        bases.push(basis);
    }
    let mut cx = ChainComplex::from_bases(bases, Vec::new());
    let mut boundaries = vec![IntMatrix::zeros(0, cx.dim(0))];
    for n in 1..=top {
        let mut triplets = Vec::new();
        for (j, b) in cx.bases[n].iter().enumerate() {
            let (gs, s) = (&b.tuple[..=n], b.tuple[n + 1]);
            for i in 0..=n {
                let mut face: Vec<usize> = gs.to_vec();
                face.remove(i);
                let mut s = s;
                if i == 0 {
                    let shift = group.inv(face[0]);
                    for g in &mut face {
                        *g = group.mul(shift, *g);
                    }
                    s = set.act(shift, s);
                }
                face.push(s);
                let row = cx.index_of(n - 1, &face).expect("normal form");
                triplets.push((row, j, BigInt::from(if i % 2 == 0 { 1 } else { -1 })));
            }
        }
        boundaries.push(IntMatrix::from_triplets(cx.dim(n - 1), cx.dim(n), triplets));
    }
    cx.boundaries = boundaries;
    if let Some(w) = cx.boundary_defect() {
        return Err(CoarseError::Validation { check: "∂∘∂ = 0".into(), witness: w });
    }
    Ok(cx)
}

/// `H_0(Γ, ℤ[S]) … H_top(Γ, ℤ[S])`.
pub fn group_homology(set: &Action, top: usize, cfg: &ChainConfig) -> Result<Vec<HomologyGroup>> {
    Ok(standard_group_complex(set, top + 1, cfg)?.homology())
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiPsiReport {
    pub degrees: usize,
    pub psi_phi_identity: bool,
    pub phi_psi_identity: bool,
    pub phi_chain_map: bool,
    pub psi_chain_map: bool,
    pub standard: Vec<HomologyGroup>,
    pub coarse: Vec<HomologyGroup>,
}

impl PhiPsiReport {
    pub fn holds(&self) -> bool {
        self.psi_phi_identity && self.phi_psi_identity && self.phi_chain_map && self.psi_chain_map && self.standard == self.coarse
    }
}

#[derive(Debug, Clone)]
pub struct PhiPsi {
    pub standard: ChainComplex,
    pub coarse: ChainComplex,
    pub phi: Vec<IntMatrix>,
    pub psi: Vec<IntMatrix>,
    pub report: PhiPsiReport,
}

/// The chain isomorphism between the standard complex of `S` and the coarse complex of
/// `Γ_can,min ⊗ S_min,max`, in degrees `0..=top+1`.
pub fn phi_psi(set: &GammaSet, top: usize, cfg: &ChainConfig) -> Result<PhiPsi> {
    let group = set.action.group().clone();
    let space = tensor(&build(&SpaceSpec::CanMin { group: group.clone() })?, &build(&SpaceSpec::MinMax(set.clone()))?)?;
    let k = set.size();
    let standard = standard_group_complex(&set.action, top + 1, cfg)?;
    let coarse = chain_complex(&space, top + 1, cfg)?;
    let e = group.identity();
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for n in 0..=top + 1 {
        let forward = standard.bases[n].iter().enumerate().map(|(j, b)| {
            let s = b.tuple[n + 1];
            let t: Vec<usize> = b.tuple[..=n].iter().map(|&g| g * k + s).collect();
            // Σ_γ γ·t read at the orbit representative
            let (row, stab) = coarse.locate(&t).expect("tuples over one s are controlled");
            (row, j, BigInt::from(stab as i64))
        });
        phi.push(IntMatrix::from_triplets(coarse.dim(n), standard.dim(n), forward));
        let mut backward = Vec::new();
        for (j, b) in coarse.bases[n].iter().enumerate() {
            let mut orbit: Vec<Vec<usize>> = space.action().perms().iter().map(|p| b.tuple.iter().map(|&x| p[x]).collect()).collect();
            orbit.sort();
            orbit.dedup();
            for u in orbit.iter().filter(|u| u[0] / k == e) {
                let s = u[0] % k;
                let mut normal: Vec<usize> = u.iter().map(|&x| x / k).collect();
                normal.push(s);
                let row = standard.index_of(n, &normal).expect("normal form");
                backward.push((row, j, BigInt::one()));
            }
        }
        psi.push(IntMatrix::from_triplets(standard.dim(n), coarse.dim(n), backward));
    }
    let report = PhiPsiReport {
        degrees: top + 1,
        psi_phi_identity: (0..=top + 1).all(|n| psi[n].mul(&phi[n]) == IntMatrix::identity(standard.dim(n))),
        phi_psi_identity: (0..=top + 1).all(|n| phi[n].mul(&psi[n]) == IntMatrix::identity(coarse.dim(n))),
        phi_chain_map: chain_map_defect(&standard, &coarse, &phi).is_none(),
        psi_chain_map: chain_map_defect(&coarse, &standard, &psi).is_none(),
        standard: standard.homology(),
        coarse: coarse.homology(),
    };
    Ok(PhiPsi { standard, coarse, phi, psi, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityStage {
    pub subset: String,
    pub homology: Vec<HomologyGroup>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub trace: Vec<ContinuityStage>,
    pub colimit: Vec<HomologyGroup>,
    pub direct: Vec<HomologyGroup>,
    pub agrees: bool,
    pub note: String,
}

/// Colimit of `H(F_X)` along invariant subsets growing one orbit at a time up to `X`.
pub fn hx_cont(space: &Space, top: usize, cfg: &ChainConfig) -> Result<ContinuityReport> {
    let direct = homology(space, top, cfg)?;
    let mut trace = Vec::new();
    let mut subset = PointSet::new();
    for orbit in space.action().orbits() {
        subset.extend(orbit);
        let (sub, _) = space.subspace(&subset)?;
        trace.push(ContinuityStage { subset: space.fmt_set(&subset), homology: homology(&sub, top, cfg)? });
    }
    let (colimit, note) = match trace.last() {
        Some(stage) => (stage.homology.clone(), "every subset of a finite carrier is locally finite; the chain ends at X".to_string()),
        None => (direct.clone(), "empty carrier: no nonempty invariant locally finite subset".to_string()),
    };
    Ok(ContinuityReport { agrees: colimit == direct, trace, colimit, direct, note })
}

/// Orbits of tuples all of whose pairs lie in `u`; the subcomplex `C_U(X)`.
pub fn controlled_complex(space: &Space, u: &Entourage, top: usize, cfg: &ChainConfig) -> Result<ChainComplex> {
    if !u.is_invariant(space.action()) || !u.contains_diagonal() {
        return precondition("control entourage must be invariant and contain the diagonal");
    }
    let perms = space.action().perms().to_vec();
    let n = space.size();
    let linked: Vec<Vec<usize>> = (0..n).map(|x| (0..n).filter(|&y| u.contains(x, y) && u.contains(y, x)).collect()).collect();
    let mut bases = Vec::with_capacity(top + 1);
    let mut layer: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    for degree in 0..=top {
        if degree > 0 {
            layer = layer
                .iter()
                .flat_map(|t| {
                    linked[t[0]].iter().filter(|y| t.iter().all(|x| linked[*x].binary_search(y).is_ok())).map(move |&y| {
                        let mut next = t.clone();
                        next.push(y);
                        next
                    })
                })
                .collect();
            check_cap(degree, layer.len() / perms.len().max(1), cfg)?;
        }
        let basis = layer
            .iter()
            .filter_map(|t| {
                let (rep, stab) = normalize(&perms, t);
                (&rep == t).then(|| OrbitBasisElement { tuple: rep, stabilizer: stab, orbit_size: perms.len() / stab })
            })
            .collect();
        bases.push(basis);
    }
    let mut cx = ChainComplex::from_bases(bases, perms);
    cx.boundaries = (0..=top).map(|n| face_boundary(&cx, n)).collect();
    if let Some(w) = cx.boundary_defect() {
        return Err(CoarseError::Validation { check: "∂∘∂ = 0".into(), witness: w });
    }
    Ok(cx)
}

#[derive(Debug, Clone, Serialize)]
pub struct UContinuityReport {
    /// `H(C_{U^k}(X))` for `k = 1, 2, …` with `U` the one-step entourage.
    pub stages: Vec<Vec<HomologyGroup>>,
    /// First `k` with `U^k` equal to the saturated structure.
    pub stabilized_at: usize,
    pub direct: Vec<HomologyGroup>,
    pub agrees: bool,
}

/// `H(X)` as the colimit over the powers of the one-step entourage.
pub fn u_continuity(space: &Space, top: usize, cfg: &ChainConfig) -> Result<UContinuityReport> {
    let step = space.step_entourage();
    let direct = homology(space, top, cfg)?;
    let mut power = step.clone();
    let mut stages = Vec::new();
    loop {
        stages.push(controlled_complex(space, &power, top + 1, cfg)?.homology());
        if &power == space.coarse_max() {
            break;
        }
        let next = power.compose(&step)?;
        if next == power {
            return Err(CoarseError::Construction("powers of the step entourage stop short of the coarse structure".into()));
        }
        power = next;
    }
    let agrees = stages.last() == Some(&direct);
    Ok(UContinuityReport { stabilized_at: stages.len(), stages, direct, agrees })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub union_dims: Vec<usize>,
    pub product_dims: Vec<usize>,
    pub bijective: bool,
    pub chain_isomorphism: bool,
    pub witness: Option<String>,
}

/// Restriction `C(⨆^free X_i) → ∏ C(X_i)` checked to be a chain isomorphism in degrees `0..=top`.
pub fn additivity_factorization(family: &[Space], top: usize, cfg: &ChainConfig) -> Result<AdditivityReport> {
    let (union, offsets) = free_union(family)?;
    let whole = chain_complex(&union, top, cfg)?;
    let pieces = family.iter().map(|x| chain_complex(x, top, cfg)).collect::<Result<Vec<_>>>()?;
    let union_dims = whole.dims();
    let product_dims: Vec<usize> = (0..=top).map(|n| pieces.iter().map(|p| p.dim(n)).sum()).collect();
    let mut witness = None;
    let mut restriction = Vec::new();
    'degrees: for (n, &size) in product_dims.iter().enumerate() {
        let block: Vec<usize> =
            pieces.iter().scan(0, |acc, p| { let start = *acc; *acc += p.dim(n); Some(start) }).collect();
        let mut hit = vec![false; size];
        let mut map = Vec::with_capacity(whole.dim(n));
        for e in &whole.bases[n] {
            let i = offsets.iter().rposition(|&o| o <= e.tuple[0]).expect("offsets start at 0");
            let local: Vec<usize> = e.tuple.iter().map(|&x| x.wrapping_sub(offsets[i])).collect();
            let Some(j) = local.iter().all(|&x| x < family[i].size()).then(|| pieces[i].index_of(n, &local)).flatten() else {
                witness = Some(format!("tuple {:?} of degree {n} does not restrict to one piece", e.tuple));
                break 'degrees;
            };
            hit[block[i] + j] = true;
            map.push((i, j, block[i] + j));
        }
        if hit.iter().any(|h| !h) || map.len() != size {
            witness = Some(format!("restriction in degree {n} is not onto"));
            break;
        }
        restriction.push(map);
    }
    let bijective = witness.is_none();
    if bijective {
        'check: for n in 1..=top {
            for (col, &(i, j, _)) in restriction[n].iter().enumerate() {
                let mapped: BTreeMap<usize, BigInt> =
                    whole.boundaries[n].column(col).iter().map(|(r, v)| (restriction[n - 1][*r].2, v.clone())).collect();
                let shift = restriction[n - 1].iter().find(|m| m.0 == i).map_or(0, |m| m.2 - m.1);
                let expected: BTreeMap<usize, BigInt> =
                    pieces[i].boundaries[n].column(j).iter().map(|(r, v)| (r + shift, v.clone())).collect();
                if mapped != expected {
                    witness = Some(format!("boundary of basis element {col} in degree {n} differs after restriction"));
                    break 'check;
                }
            }
        }
    }
    Ok(AdditivityReport { union_dims, product_dims, bijective, chain_isomorphism: witness.is_none(), witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    Res,
    Qh,
    Ind,
}

#[derive(Debug, Clone)]
pub struct ChainTransform {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub maps: Vec<IntMatrix>,
    pub chain_map: Option<String>,
    /// qH only: independence of the representative choice and invariance of the values.
    pub well_defined: Option<String>,
    /// ind only: whether restriction to `[1, X]` inverts the map.
    pub isomorphism: Option<bool>,
    pub note: Option<String>,
}

impl ChainTransform {
    pub fn holds(&self) -> bool {
        self.chain_map.is_none() && self.well_defined.is_none() && self.isomorphism != Some(false)
    }
}

fn lifts_product(lifts: &[Vec<usize>], prefix: usize, mut visit: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; lifts.len()];
    if lifts.iter().any(Vec::is_empty) {
        return;
    }
    loop {
        let mut t = vec![prefix];
        t.extend(digits.iter().zip(lifts).map(|(&d, l)| l[d]));
        visit(&t);
        let Some(pos) = (0..lifts.len()).rev().find(|&i| digits[i] + 1 < lifts[i].len()) else { break };
        digits[pos] += 1;
        for d in &mut digits[pos + 1..] {
            *d = 0;
        }
    }
}

/// Value of the transformed basis chain at `tuple`, summed over lifts whose first entry is `first`.
fn lift_sums(source: &ChainComplex, first: usize, lifts: &[Vec<usize>]) -> BTreeMap<usize, i64> {
    let mut acc = BTreeMap::new();
    lifts_product(lifts, first, |t| {
        if let Some((idx, _)) = source.locate(t) {
            *acc.entry(idx).or_insert(0) += 1;
        }
    });
    acc
}

fn matrix_from_rows(rows: usize, cols: usize, values: &[BTreeMap<usize, i64>]) -> IntMatrix {
    IntMatrix::from_triplets(
        rows,
        cols,
        values.iter().enumerate().flat_map(|(r, m)| m.iter().map(move |(&c, &v)| (r, c, BigInt::from(v)))),
    )
}

pub fn chain_transform(kind: TransformKind, iota: &GroupHom, x: &Space, top: usize, cfg: &ChainConfig) -> Result<ChainTransform> {
    match kind {
        TransformKind::Res => {
            let target_space = restrict(x, iota)?;
            let source = chain_complex(x, top, cfg)?;
            let target = chain_complex(&target_space, top, cfg)?;
            let maps: Vec<IntMatrix> = (0..=top)
                .map(|n| {
                    let t = target.bases[n].iter().enumerate().map(|(r, u)| {
                        let (c, _) = source.locate(&u.tuple).expect("same carrier and coarse structure");
                        (r, c, BigInt::one())
                    });
                    IntMatrix::from_triplets(target.dim(n), source.dim(n), t)
                })
                .collect();
            let chain_map = chain_map_defect(&source, &target, &maps);
            Ok(ChainTransform { source, target, maps, chain_map, well_defined: None, isomorphism: None, note: None })
        }
        TransformKind::Qh => {
            let q = quotient_by(x, iota)?;
            let source = chain_complex(x, top, cfg)?;
            let target = chain_complex(&q.over_weyl, top, cfg)?;
            let classes: Vec<Vec<usize>> =
                (0..q.over_weyl.size()).map(|c| (0..x.size()).filter(|&p| q.projection[p] == c).collect()).collect();
            let values = |tuple: &[usize], pick_last: bool| {
                let lifts: Vec<Vec<usize>> = tuple[1..].iter().map(|&c| classes[c].clone()).collect();
                let reps = &classes[tuple[0]];
                let first = if pick_last { *reps.last().expect("nonempty class") } else { reps[0] };
                lift_sums(&source, first, &lifts)
            };
            let mut maps = Vec::new();
            let mut well_defined = None;
            for n in 0..=top {
                let rows: Vec<BTreeMap<usize, i64>> = target.bases[n].iter().map(|r| values(&r.tuple, false)).collect();
                for (r, e) in target.bases[n].iter().enumerate() {
                    if well_defined.is_some() {
                        break;
                    }
                    if values(&e.tuple, true) != rows[r] {
                        well_defined = Some(format!("value at {:?} depends on the representative set", e.tuple));
                    }
                    for p in q.over_weyl.action().perms() {
                        let moved: Vec<usize> = e.tuple.iter().map(|&c| p[c]).collect();
                        if values(&moved, false) != rows[r] {
                            well_defined = Some(format!("values at {:?} and {moved:?} differ", e.tuple));
                            break;
                        }
                    }
                }
                maps.push(matrix_from_rows(target.dim(n), source.dim(n), &rows));
            }
            let chain_map = chain_map_defect(&source, &target, &maps);
            Ok(ChainTransform { source, target, maps, chain_map, well_defined, isomorphism: None, note: None })
        }
        TransformKind::Ind => {
            let induced = induce(x, iota)?;
            let gamma = iota.target.clone();
            let source = chain_complex(x, top, cfg)?;
            let target = chain_complex(&induced.space, top, cfg)?;
            let mut maps = Vec::new();
            for n in 0..=top {
                let rows: Vec<BTreeMap<usize, i64>> = target.bases[n]
                    .iter()
                    .map(|r| {
                        let (g0, x0) = induced.reps[r.tuple[0]];
                        let lifts: Vec<Vec<usize>> = r.tuple[1..]
                            .iter()
                            .map(|&y| (0..x.size()).filter(|&p| induced.point(g0, p) == y).collect())
                            .collect();
                        lift_sums(&source, x0, &lifts)
                    })
                    .collect();
                maps.push(matrix_from_rows(target.dim(n), source.dim(n), &rows));
            }
            let chain_map = chain_map_defect(&source, &target, &maps);
            let (isomorphism, note) = if iota.is_injective() {
                let e = gamma.identity();
                let inverse_holds = (0..=top).all(|n| {
                    let t = source.bases[n].iter().enumerate().map(|(r, t)| {
                        let image: Vec<usize> = t.tuple.iter().map(|&p| induced.point(e, p)).collect();
                        let (c, _) = target.locate(&image).expect("[1,X] is a coarse component");
                        (r, c, BigInt::one())
                    });
                    let back = IntMatrix::from_triplets(source.dim(n), target.dim(n), t);
                    back.mul(&maps[n]) == IntMatrix::identity(source.dim(n))
                        && maps[n].mul(&back) == IntMatrix::identity(target.dim(n))
                });
                (Some(inverse_holds), None)
            } else {
                (None, Some("isomorphism not asserted: ι is not injective".to_string()))
            };
            Ok(ChainTransform { source, target, maps, chain_map, well_defined: None, isomorphism, note })
        }
    }
}

/// The four complexes of an excision square and the inclusions between them.
#[derive(Debug, Clone)]
pub struct MayerVietoris {
    pub ambient: ChainComplex,
    pub z: ChainComplex,
    pub y: ChainComplex,
    pub meet: ChainComplex,
    pub z_in: Vec<IntMatrix>,
    pub y_in: Vec<IntMatrix>,
    pub meet_in_z: Vec<IntMatrix>,
    pub meet_in_y: Vec<IntMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MvReport {
    pub boundaries: CheckResult,
    pub chain_maps: CheckResult,
    pub short_exact: CheckResult,
    /// Exactness of the long sequence on homology, checked when the complexes are small.
    pub long_exact: Option<CheckResult>,
}

impl MvReport {
    pub fn holds(&self) -> bool {
        self.boundaries.passed && self.chain_maps.passed && self.short_exact.passed && self.long_exact.as_ref().is_none_or(|c| c.passed)
    }
}

pub fn mayer_vietoris(space: &Space, z: &PointSet, y: &PointSet, top: usize, cfg: &ChainConfig) -> Result<MayerVietoris> {
    let meet_set: PointSet = z.intersection(y).copied().collect();
    let (zs, z_pts) = space.subspace(z)?;
    let (ys, y_pts) = space.subspace(y)?;
    let (ms, m_pts) = space.subspace(&meet_set)?;
    let ambient = chain_complex(space, top, cfg)?;
    let zc = chain_complex(&zs, top, cfg)?;
    let yc = chain_complex(&ys, top, cfg)?;
    let mc = chain_complex(&ms, top, cfg)?;
    let local = |pts: &[usize], within: &[usize]| -> Vec<usize> {
        pts.iter().map(|p| within.iter().position(|q| q == p).expect("meet inside both")).collect()
    };
    let m_in_z = local(&m_pts, &z_pts);
    let m_in_y = local(&m_pts, &y_pts);
    Ok(MayerVietoris {
        z_in: (0..=top).map(|n| pushforward(&zc, &ambient, n, &z_pts)).collect(),
        y_in: (0..=top).map(|n| pushforward(&yc, &ambient, n, &y_pts)).collect(),
        meet_in_z: (0..=top).map(|n| pushforward(&mc, &zc, n, &m_in_z)).collect(),
        meet_in_y: (0..=top).map(|n| pushforward(&mc, &yc, n, &m_in_y)).collect(),
        ambient,
        z: zc,
        y: yc,
        meet: mc,
    })
}

fn stack_rows(a: &IntMatrix, b: &IntMatrix, negate_b: bool) -> IntMatrix {
    let shift = a.rows();
    let sign = if negate_b { BigInt::from(-1) } else { BigInt::one() };
    IntMatrix::from_triplets(
        a.rows() + b.rows(),
        a.cols(),
        a.triplets().map(|(r, c, v)| (r, c, v.clone())).chain(b.triplets().map(|(r, c, v)| (r + shift, c, v * &sign))),
    )
}

fn stack_cols(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let shift = a.cols();
    IntMatrix::from_triplets(
        a.rows(),
        a.cols() + b.cols(),
        a.triplets().map(|(r, c, v)| (r, c, v.clone())).chain(b.triplets().map(|(r, c, v)| (r, c + shift, v.clone()))),
    )
}

fn block_diag(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    IntMatrix::from_triplets(
        a.rows() + b.rows(),
        a.cols() + b.cols(),
        a.triplets()
            .map(|(r, c, v)| (r, c, v.clone()))
            .chain(b.triplets().map(|(r, c, v)| (r + a.rows(), c + a.cols(), v.clone()))),
    )
}

/// Span inclusion test of column lattices.
fn lattice_contains(outer: &Smith, inner: &IntMatrix) -> bool {
    (0..inner.cols()).all(|j| {
        let mut v = vec![BigInt::zero(); inner.rows()];
        for (r, x) in inner.column(j) {
            v[*r] = x.clone();
        }
        solve_with(outer, &v).is_some()
    })
}

fn same_lattice(a: &IntMatrix, b: &IntMatrix) -> bool {
    lattice_contains(&smith_normal_form(a), b) && lattice_contains(&smith_normal_form(b), a)
}

/// `{z ∈ span(domain) : g z ∈ span(target)}` as columns.
fn preimage(domain: &IntMatrix, g: &IntMatrix, target: &IntMatrix) -> IntMatrix {
    let gd = g.mul(domain);
    let neg: IntMatrix = IntMatrix::from_triplets(target.rows(), target.cols(), target.triplets().map(|(r, c, v)| (r, c, -v)));
    let k = kernel(&stack_cols(&gd, &neg));
    let take = IntMatrix::from_triplets(
        domain.cols(),
        k.cols(),
        k.triplets().filter(|(r, _, _)| *r < domain.cols()).map(|(r, c, v)| (r, c, v.clone())),
    );
    domain.mul(&take)
}

/// Cycles of a complex in degree `n`, as columns.
fn cycles(cx: &ChainComplex, n: usize) -> IntMatrix {
    if n == 0 {
        IntMatrix::identity(cx.dim(0))
    } else {
        kernel(&cx.boundaries[n])
    }
}

impl MayerVietoris {
    fn alpha(&self, n: usize) -> IntMatrix {
        stack_rows(&self.meet_in_z[n], &self.meet_in_y[n], true)
    }

    fn beta(&self, n: usize) -> IntMatrix {
        stack_cols(&self.z_in[n], &self.y_in[n])
    }

    fn middle_boundary(&self, n: usize) -> IntMatrix {
        block_diag(&self.z.boundaries[n], &self.y.boundaries[n])
    }

    /// Certifies `0 → C(Z∩Y) → C(Z)⊕C(Y) → C(X) → 0`; the long exact sequence is also
    /// checked on homology when every middle space has at most `dense_limit` basis elements.
    pub fn certify(&self, dense_limit: usize) -> MvReport {
        let top = self.ambient.top();
        let defect = [&self.ambient, &self.z, &self.y, &self.meet]
            .iter()
            .find_map(|c| c.boundary_defect());
        let boundaries = CheckResult::from_witness("∂∘∂ = 0", defect);
        let maps = chain_map_defect(&self.z, &self.ambient, &self.z_in)
            .or_else(|| chain_map_defect(&self.y, &self.ambient, &self.y_in))
            .or_else(|| chain_map_defect(&self.meet, &self.z, &self.meet_in_z))
            .or_else(|| chain_map_defect(&self.meet, &self.y, &self.meet_in_y));
        let chain_maps = CheckResult::from_witness("inclusions are chain maps", maps);
        let mut short = None;
        for n in 0..=top {
            let (a, b) = (self.alpha(n), self.beta(n));
            let da = elementary_divisors(&a);
            let db = elementary_divisors(&b);
            let middle = a.rows();
            short = if !b.mul(&a).is_zero() {
                Some(format!("composite nonzero in degree {n}"))
            } else if da.rank != a.cols() || !da.nontrivial.is_empty() {
                Some(format!("C(Z∩Y) → C(Z)⊕C(Y) not split injective in degree {n}"))
            } else if db.rank != b.rows() || !db.nontrivial.is_empty() {
                Some(format!("C(Z)⊕C(Y) → C(X) not onto in degree {n}"))
            } else if da.rank + db.rank != middle {
                Some(format!("ranks {} + {} ≠ {middle} in degree {n}", da.rank, db.rank))
            } else {
                None
            };
            if short.is_some() {
                break;
            }
        }
        let short_exact = CheckResult::from_witness("short exact sequence of complexes", short);
        let small = (0..=top).all(|n| self.z.dim(n) + self.y.dim(n) <= dense_limit);
        let long_exact = (small && top >= 1 && boundaries.passed && chain_maps.passed && short_exact.passed)
            .then(|| CheckResult::from_witness("long exact sequence", self.long_exact_defect()));
        MvReport { boundaries, chain_maps, short_exact, long_exact }
    }

    fn long_exact_defect(&self) -> Option<String> {
        let top = self.ambient.top();
        for n in 0..top {
            let b_meet = |k: usize| self.meet.boundaries[k + 1].clone();
            let b_mid = self.middle_boundary(n + 1);
            let b_x = self.ambient.boundaries[n + 1].clone();
            let z_mid = if n == 0 {
                IntMatrix::identity(self.z.dim(0) + self.y.dim(0))
            } else {
                kernel(&self.middle_boundary(n))
            };
            let z_x = cycles(&self.ambient, n);
            let z_meet = cycles(&self.meet, n);
            // at H_n(Z)⊕H_n(Y)
            let image = stack_cols(&self.alpha(n).mul(&z_meet), &b_mid);
            if !same_lattice(&image, &preimage(&z_mid, &self.beta(n), &b_x)) {
                return Some(format!("not exact at H_{n}(Z)⊕H_{n}(Y)"));
            }
            // at H_n(X)
            let delta = self.connecting(n, &z_x);
            let image = stack_cols(&self.beta(n).mul(&z_mid), &b_x);
            let kernel_side = match &delta {
                Some((d, meet_bd)) => preimage(&z_x, d, meet_bd),
                None => z_x.clone(),
            };
            if !same_lattice(&image, &kernel_side) {
                return Some(format!("not exact at H_{n}(X)"));
            }
            // at H_{n-1}(Z∩Y)
            if let Some((d, _)) = delta {
                let m = n - 1;
                let image = stack_cols(&d.mul(&z_x), &b_meet(m));
                let z_prev = cycles(&self.meet, m);
                let b_mid_prev = self.middle_boundary(m + 1);
                if !same_lattice(&image, &preimage(&z_prev, &self.alpha(m), &b_mid_prev)) {
                    return Some(format!("not exact at H_{m}(Z∩Y)"));
                }
            }
        }
        None
    }

    /// `δ = α⁻¹∘∂∘β⁻¹` on cycle coordinates, written as a matrix from `C_n(X)` (valid on
    /// cycles), with the boundaries of the meet in degree `n-1`.
    fn connecting(&self, n: usize, z_x: &IntMatrix) -> Option<(IntMatrix, IntMatrix)> {
        if n == 0 {
            return None;
        }
        let beta = smith_normal_form(&self.beta(n));
        let alpha = smith_normal_form(&self.alpha(n - 1));
        let dm = self.middle_boundary(n);
        let dim_x = self.ambient.dim(n);
        let mut triplets = Vec::new();
        for j in 0..z_x.cols() {
            let mut c = vec![BigInt::zero(); dim_x];
            for (r, v) in z_x.column(j) {
                c[*r] = v.clone();
            }
            let lift = solve_with(&beta, &c)?;
            let w = solve_with(&alpha, &dm.apply(&lift))?;
            triplets.extend(w.into_iter().enumerate().map(|(i, v)| (i, j, v)));
        }
        let on_coords = IntMatrix::from_triplets(self.meet.dim(n - 1), z_x.cols(), triplets);
        Some((on_coords.mul(&solve_left(z_x)), self.meet.boundaries[n].clone()))
    }
}

/// A left inverse of a saturated column lattice basis: `L·K = I`.
fn solve_left(k: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(k);
    // K = P⁻¹ S Q⁻¹ with S = [I; 0] for a saturated basis, so L = Q [I 0] P
    let r = k.cols();
    let proj = IntMatrix::from_triplets(r, k.rows(), (0..r).map(|i| (i, i, BigInt::one())));
    s.cols.mul(&proj).mul(&s.rows)
}

/// `H_n(ℤ/m; ℤ)` read off the 2-periodic resolution.
pub fn cyclic_group_oracle(m: u64, n: usize) -> HomologyGroup {
    match n {
        0 => HomologyGroup::free(1),
        n if n % 2 == 1 => HomologyGroup::cyclic(m),
        _ => HomologyGroup::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use std::sync::Arc;

    fn cfg() -> ChainConfig {
        ChainConfig::default()
    }

    fn zn(n: u64) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n as usize))
    }

    #[test]
    fn point_complex_alternates() {
        let cx = chain_complex(&Space::point(), 3, &cfg()).unwrap();
        assert_eq!(cx.dims(), vec![1, 1, 1, 1]);
        assert!(cx.boundary(1).is_zero());
        assert_eq!(cx.boundary(2), &IntMatrix::identity(1));
        assert!(cx.boundary(3).is_zero());
    }

    #[test]
    fn point_homology() {
        let h = homology(&Space::point(), 4, &cfg()).unwrap();
        assert_eq!(h[0], HomologyGroup::free(1));
        assert!(h[1..].iter().all(HomologyGroup::is_zero));
    }

    #[test]
    fn two_point_min_and_max() {
        let g = Arc::new(FiniteGroup::trivial());
        let set = GammaSet::trivial(g.clone(), 2);
        let min = build(&SpaceSpec::MinMin(set.clone())).unwrap();
        let cx = chain_complex(&min, 1, &cfg()).unwrap();
        assert_eq!(cx.dims(), vec![2, 2]);
        assert!(cx.boundary(1).is_zero());
        assert_eq!(homology(&min, 0, &cfg()).unwrap()[0], HomologyGroup::free(2));
        let max = build(&SpaceSpec::MaxMax(set)).unwrap();
        let h = homology(&max, 1, &cfg()).unwrap();
        assert_eq!(h, homology(&Space::point(), 1, &cfg()).unwrap());
    }

    #[test]
    fn swap_orbit_counts() {
        let set = GammaSet::regular(zn(2));
        let x = build(&SpaceSpec::MaxMax(set)).unwrap();
        let cx = chain_complex(&x, 1, &cfg()).unwrap();
        assert_eq!(cx.dims(), vec![1, 2]);
    }

    #[test]
    fn basis_cap_names_degree() {
        let x = build(&SpaceSpec::MaxMax(GammaSet::trivial(Arc::new(FiniteGroup::trivial()), 5))).unwrap();
        let err = chain_complex(&x, 3, &ChainConfig { basis_cap: 100 }).unwrap_err();
        assert!(matches!(err, CoarseError::Resource { degree: 2, .. }), "{err:?}");
    }

    #[test]
    fn standard_complex_dims_and_oracle() {
        let pt = GammaSet::point(zn(2));
        let cx = standard_group_complex(&pt.action, 4, &cfg()).unwrap();
        assert_eq!(cx.dims(), vec![1, 2, 4, 8, 16]);
        for m in [2u64, 3, 4] {
            let set = GammaSet::point(zn(m));
            let h = group_homology(&set.action, 3, &cfg()).unwrap();
            let oracle: Vec<_> = (0..=3).map(|n| cyclic_group_oracle(m, n)).collect();
            assert_eq!(h, oracle, "Z/{m}");
        }
    }

    #[test]
    fn symmetric_group_homology() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let h = group_homology(&GammaSet::point(s3).action, 3, &cfg()).unwrap();
        let shown: Vec<String> = h.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["Z", "Z/2", "0", "Z/6"]);
    }

    #[test]
    fn phi_psi_inverse_for_z2_and_s3() {
        let r = phi_psi(&GammaSet::point(zn(2)), 3, &cfg()).unwrap();
        assert!(r.report.holds(), "{:?}", r.report);
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let h = s3.index_of("(12)").unwrap();
        let set = GammaSet::cosets(s3.clone(), &[s3.identity(), h]).unwrap();
        let r = phi_psi(&set, 2, &cfg()).unwrap();
        assert!(r.report.holds(), "{:?}", r.report);
    }

    #[test]
    fn trivial_group_phi_is_identity() {
        let g = Arc::new(FiniteGroup::trivial());
        let r = phi_psi(&GammaSet::trivial(g, 2), 2, &cfg()).unwrap();
        for (n, m) in r.phi.iter().enumerate() {
            assert_eq!(m.rows(), r.standard.dim(n));
            assert_eq!(m.nnz(), m.rows());
        }
        assert!(r.report.holds());
    }

    #[test]
    fn collapse_induces_isomorphism() {
        let set = GammaSet::trivial(Arc::new(FiniteGroup::trivial()), 2);
        let max = Arc::new(build(&SpaceSpec::MaxMax(set)).unwrap());
        let pt = Arc::new(Space::point());
        let f = SpaceMap::new(max.clone(), pt.clone(), vec![0, 0]).unwrap();
        let g = SpaceMap::new(pt, max.clone(), vec![0]).unwrap();
        let fi = induced_map(&f, 2, &cfg()).unwrap();
        let gi = induced_map(&g, 2, &cfg()).unwrap();
        assert!(fi.is_isomorphism(&gi));
        let h = SpaceMap::new(Arc::new(Space::point()), max, vec![1]).unwrap();
        let hi = induced_map(&h, 2, &cfg()).unwrap();
        assert_eq!(gi.homology, hi.homology);
    }

    #[test]
    fn identity_induces_identity() {
        let x = Arc::new(build(&SpaceSpec::CanMin { group: zn(3) }).unwrap());
        let m = induced_map(&SpaceMap::identity(x.clone()), 1, &cfg()).unwrap();
        for (n, c) in m.chain.iter().enumerate() {
            assert_eq!(c, &IntMatrix::identity(m.source.dim(n)));
        }
    }

    #[test]
    fn continuity_and_additivity() {
        let x = build(&SpaceSpec::MinMin(GammaSet::regular(zn(2)))).unwrap();
        let r = hx_cont(&x, 2, &cfg()).unwrap();
        assert!(r.agrees);
        let g = Arc::new(FiniteGroup::trivial());
        let bands: Vec<Space> = [2, 3, 4]
            .iter()
            .map(|&n| Space::checked(
                (0..n).map(|i| i.to_string()).collect(),
                Action::trivial(g.clone(), n),
                vec![crate::space::Entourage::band(n, 1)],
                crate::space::Bornology::singletons(n),
            ).unwrap())
            .collect();
        let r = additivity_factorization(&bands, 2, &cfg()).unwrap();
        assert!(r.bijective && r.chain_isomorphism, "{r:?}");
        let pts = vec![Space::point(), Space::point()];
        let r = additivity_factorization(&pts, 1, &cfg()).unwrap();
        assert_eq!(r.union_dims[0], 2);
        assert!(r.chain_isomorphism);
    }

    #[test]
    fn transforms() {
        let z4 = zn(4);
        let iota = crate::group_change::subgroup_inclusion(&z4, &[0, 2]).unwrap();
        let pt = Space::point_over(iota.source.clone());
        let ind = chain_transform(TransformKind::Ind, &iota, &pt, 2, &cfg()).unwrap();
        assert!(ind.holds() && ind.isomorphism == Some(true), "{:?}", ind.chain_map);
        let can = build(&SpaceSpec::CanMin { group: z4.clone() }).unwrap();
        let all = GroupHom::identity(z4.clone());
        let q = chain_transform(TransformKind::Qh, &all, &can, 2, &cfg()).unwrap();
        assert!(q.holds(), "{:?} {:?}", q.chain_map, q.well_defined);
        assert_eq!(q.target.dims(), vec![1, 1, 1]);
        assert_eq!(crate::linalg::rank(&q.maps[0]), 1);
        let res = chain_transform(TransformKind::Res, &all, &can, 2, &cfg()).unwrap();
        for (n, m) in res.maps.iter().enumerate() {
            assert_eq!(m, &IntMatrix::identity(res.source.dim(n)));
        }
    }

    #[test]
    fn twelve_point_max_space_is_acyclic() {
        let x = build(&SpaceSpec::MaxMax(GammaSet::trivial(Arc::new(FiniteGroup::trivial()), 12))).unwrap();
        let h = homology(&x, 2, &cfg()).unwrap();
        assert_eq!(h, homology(&Space::point(), 2, &cfg()).unwrap());
    }

    #[test]
    fn mayer_vietoris_on_band_halves() {
        let g = Arc::new(FiniteGroup::trivial());
        let x = Space::checked(
            (0..4).map(|i| i.to_string()).collect(),
            Action::trivial(g, 4),
            vec![crate::space::Entourage::from_pairs(4, [(0, 1), (2, 3)]).unwrap()],
            crate::space::Bornology::singletons(4),
        )
        .unwrap();
        let z: PointSet = [0, 1, 2].into();
        let y: PointSet = [2, 3].into();
        let mut mv = mayer_vietoris(&x, &z, &y, 2, &cfg()).unwrap();
        let r = mv.certify(200);
        assert!(r.holds(), "{r:?}");
        assert!(r.long_exact.is_some());
        mv.ambient.flip_boundary_sign(2);
        assert!(!mv.certify(200).holds());
    }
    #[test]
    fn u_continuity_on_band() {
        let g = Arc::new(FiniteGroup::trivial());
        let x = Space::checked((0..5).map(|i| i.to_string()).collect(), Action::trivial(g, 5), vec![Entourage::band(5, 1)], crate::Bornology::singletons(5)).unwrap();
        let r = u_continuity(&x, 1, &cfg()).unwrap();
        assert_eq!(r.stabilized_at, 4);
        assert!(r.agrees);
        assert!(r.stages.iter().all(|h| h == &r.direct));
        let full = controlled_complex(&x, x.coarse_max(), 2, &cfg()).unwrap();
        assert_eq!(full.dims(), chain_complex(&x, 2, &cfg()).unwrap().dims());
    }
}
