//! Rips complexes `P_U(X)` in their simplicial model on the vertex set, Dirac maps,
//! simplicial homology and strongly bounded geometry.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

use crate::constructions::{build, tensor, SpaceSpec};
use crate::error::{precondition, CoarseError, Result};
use crate::group::FiniteGroup;
use crate::homology::HomologyGroup;
use crate::linalg::{elementary_divisors, IntMatrix};
use crate::maps::{analyze_map, MapReport, SearchConfig, SpaceMap};
use crate::space::{Action, CheckResult, Entourage, PointSet, Space, ValidationReport};

pub const DEFAULT_MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub action: Action,
    /// `simplices[n]`: sorted vertex tuples of the `n`-simplices, in lexicographic order.
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    pub fn new(action: Action, mut simplices: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        for layer in &mut simplices {
            for s in layer.iter_mut() {
                s.sort_unstable();
            }
            layer.sort();
            layer.dedup();
        }
        while simplices.last().is_some_and(Vec::is_empty) {
            simplices.pop();
        }
        let k = Self { action, simplices };
        k.validate().into_result()?;
        Ok(k)
    }

    pub fn vertices(&self) -> usize {
        self.action.carrier_size()
    }

    /// Dimension, or `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, n: usize) -> usize {
        self.simplices.get(n).map_or(0, Vec::len)
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        simplex.len().checked_sub(1).and_then(|n| self.simplices.get(n)).is_some_and(|l| l.binary_search(&simplex.to_vec()).is_ok())
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.vertices();
        let range = self.simplices.iter().enumerate().find_map(|(d, layer)| {
            layer.iter().find(|s| s.len() != d + 1 || s.iter().any(|&v| v >= n) || s.windows(2).any(|w| w[0] >= w[1])).map(|s| format!("{s:?} in layer {d}"))
        });
        let closure = self.simplices.iter().skip(1).flatten().find_map(|s| {
            (0..s.len()).map(|i| face(s, i)).find(|f| !self.contains(f)).map(|f| format!("face {f:?} of {s:?} missing"))
        });
        let invariance = self.action.group().elements().find_map(|g| {
            self.simplices.iter().flatten().find_map(|s| {
                let mut moved: Vec<usize> = s.iter().map(|&v| self.action.act(g, v)).collect();
                moved.sort_unstable();
                (!self.contains(&moved)).then(|| format!("{}·{s:?} missing", self.action.group().name(g)))
            })
        });
        ValidationReport {
            checks: vec![
                CheckResult::from_witness("simplices sorted and in range", range),
                CheckResult::from_witness("downward closed", closure),
                CheckResult::from_witness("Γ-invariant", invariance),
            ],
        }
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.simplices.iter().flatten().all(|s| other.contains(s))
    }

    /// One simplex per line, grouped by dimension.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for s in self.simplices.iter().flatten() {
            let parts: Vec<String> = s.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        }
        out
    }

    /// Reads the export format; the vertex set is `0..=max` with trivial action.
    pub fn parse(text: &str) -> Result<Self> {
        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut top = 0;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let s = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| CoarseError::Parse(format!("line {}: {e}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            top = top.max(s.iter().max().map_or(0, |m| m + 1));
            if simplices.len() < s.len() {
                simplices.resize(s.len(), Vec::new());
            }
            simplices[s.len() - 1].push(s);
        }
        Self::new(Action::trivial(Arc::new(FiniteGroup::trivial()), top), simplices)
    }
}

fn face(s: &[usize], i: usize) -> Vec<usize> {
    s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect()
}

/// `P_U(X)` together with its bornological coarse space on the vertex set.
#[derive(Debug, Clone)]
pub struct RipsComplex {
    pub complex: SimplicialComplex,
    pub space: Arc<Space>,
    pub entourage: Entourage,
}

fn check_entourage(space: &Space, u: &Entourage) -> Result<()> {
    if u.carrier_size() != space.size() {
        return crate::error::domain("entourage over the wrong carrier");
    }
    if !u.is_invariant(space.action()) {
        return precondition("U is not Γ-invariant");
    }
    if let Some((x, y)) = u.first_escape(space.coarse_max()) {
        return precondition(format!("U leaves the coarse structure at ({},{})", space.name(x), space.name(y)));
    }
    if !u.contains_diagonal() {
        return precondition("U does not contain the diagonal");
    }
    Ok(())
}

/// All `U`-bounded vertex sets of size at most `max_dim + 1`.
fn cliques(n: usize, u: &Entourage, max_dim: usize) -> Vec<Vec<Vec<usize>>> {
    let adjacent: Vec<Vec<usize>> = (0..n).map(|x| (x + 1..n).filter(|&y| u.contains(x, y) && u.contains(y, x)).collect()).collect();
    let mut layers = vec![Vec::new(); max_dim + 1];
    fn grow(current: &mut Vec<usize>, candidates: &[usize], adjacent: &[Vec<usize>], layers: &mut [Vec<Vec<usize>>]) {
        layers[current.len() - 1].push(current.clone());
        if current.len() == layers.len() {
            return;
        }
        for (i, &v) in candidates.iter().enumerate() {
            // candidates are increasing, so the intersection stays sorted
            let next: Vec<usize> = candidates[i + 1..].iter().copied().filter(|w| adjacent[v].binary_search(w).is_ok()).collect();
            current.push(v);
            grow(current, &next, adjacent, layers);
            current.pop();
        }
    }
    for v in 0..n {
        grow(&mut vec![v], &adjacent[v], &adjacent, &mut layers);
    }
    for layer in &mut layers {
        layer.sort();
    }
    layers
}

fn path_distances(n: usize, edges: &[Vec<usize>]) -> Vec<Vec<Option<usize>>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            dist[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                let d = dist[x].expect("queued vertices are reached");
                for &y in &adj[x] {
                    if dist[y].is_none() {
                        dist[y] = Some(d + 1);
                        queue.push_back(y);
                    }
                }
            }
            dist
        })
        .collect()
}

/// `P_U(X)_bd` on the vertex set: path-metric scales `1..=diameter`, bornology generated by `P_U(B)`.
fn rips_space(space: &Space, complex: &SimplicialComplex) -> Result<Space> {
    let n = space.size();
    let dist = path_distances(n, complex.simplices.get(1).map_or(&[][..], Vec::as_slice));
    let diameter = dist.iter().flatten().flatten().copied().max().unwrap_or(0);
    let scales = (0..=diameter.max(1))
        .map(|r| Entourage::from_pairs(n, (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| dist[x][y].is_some_and(|d| d <= r))))
        .collect::<Result<Vec<_>>>()?;
    Space::checked(space.names().to_vec(), space.action().clone(), scales, space.bornology().clone())
}

pub fn rips_complex(space: &Space, u: &Entourage, max_dim: usize) -> Result<RipsComplex> {
    check_entourage(space, u)?;
    let complex = SimplicialComplex::new(space.action().clone(), cliques(space.size(), u, max_dim))?;
    let rips = rips_space(space, &complex)?;
    Ok(RipsComplex { complex, space: Arc::new(rips), entourage: u.clone() })
}

/// Rips complexes along an increasing chain of entourages, with the inclusions between them.
#[derive(Debug, Clone)]
pub struct RipsFiltration {
    pub stages: Vec<RipsComplex>,
    pub inclusions: Vec<SimplicialMap>,
}

pub fn rips_filtration(space: &Space, chain: &[Entourage], max_dim: usize) -> Result<RipsFiltration> {
    if let Some(i) = (1..chain.len()).find(|&i| !chain[i - 1].is_subset(&chain[i])) {
        return precondition(format!("entourage {} does not contain entourage {}", i, i - 1));
    }
    let stages = chain.iter().map(|u| rips_complex(space, u, max_dim)).collect::<Result<Vec<_>>>()?;
    let inclusions = stages
        .windows(2)
        .map(|w| SimplicialMap::new(&w[0], &w[1], (0..space.size()).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RipsFiltration { stages, inclusions })
}

/// A vertex map between Rips complexes with its certificates.
#[derive(Debug, Clone)]
pub struct SimplicialMap {
    pub vertex_map: Vec<usize>,
    pub simplicial: CheckResult,
    pub morphism: SpaceMap,
    pub morphism_check: CheckResult,
}

impl SimplicialMap {
    fn new(source: &RipsComplex, target: &RipsComplex, vertex_map: Vec<usize>) -> Result<Self> {
        let miss = source.complex.simplices.iter().flatten().find_map(|s| {
            let mut image: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
            image.sort_unstable();
            image.dedup();
            (!target.complex.contains(&image)).then(|| format!("image of {s:?} is {image:?}, not a simplex"))
        });
        let morphism = SpaceMap::new(source.space.clone(), target.space.clone(), vertex_map.clone())?;
        let morphism_check = CheckResult::from_witness("morphism of P_U(X)_bd", morphism.morphism_witness());
        Ok(Self { vertex_map, simplicial: CheckResult::from_witness("simplicial", miss), morphism, morphism_check })
    }

    pub fn holds(&self) -> bool {
        self.simplicial.passed && self.morphism_check.passed
    }
}

/// `P_U(X) → P_{U′}(X′)` induced by `f`, requiring `(f×f)(U) ⊆ U′`.
pub fn rips_functorial(f: &SpaceMap, u: &Entourage, u_target: &Entourage, max_dim: usize) -> Result<(RipsComplex, RipsComplex, SimplicialMap)> {
    let pushed = u.image(&f.assignment, f.codomain.size());
    if let Some((a, b)) = pushed.first_escape(u_target) {
        return precondition(format!("(f×f)(U) ⊄ U′: ({},{}) missing", f.codomain.name(a), f.codomain.name(b)));
    }
    let source = rips_complex(&f.domain, u, max_dim)?;
    let target = rips_complex(&f.codomain, u_target, max_dim)?;
    let map = SimplicialMap::new(&source, &target, f.assignment.clone())?;
    Ok((source, target, map))
}

#[derive(Debug, Clone)]
pub struct DiracEquivalence {
    /// `δ: X_U → P_U(X)_bd`, or `δ × id_Q`.
    pub delta: SpaceMap,
    pub inverse: SpaceMap,
    pub left_identity: CheckResult,
    pub report: MapReport,
}

impl DiracEquivalence {
    pub fn holds(&self) -> bool {
        self.left_identity.passed && self.report.equivalence == crate::maps::Verdict::True
    }
}

/// The Dirac map and an inverse built from orbit representatives and their least support vertex.
pub fn dirac_equivalence(space: &Space, u: &Entourage, twist: Option<&Space>) -> Result<DiracEquivalence> {
    check_entourage(space, u)?;
    match twist {
        None if space.group().order() > 1 => {
            return precondition("Γ has torsion: the untwisted Dirac equivalence needs a torsion-free Γ acting freely; supply a free twist Q")
        }
        Some(q) if !q.action().is_free() => return precondition("the twist Q is not a free Γ-set"),
        _ => {}
    }
    let x_u = build(&SpaceSpec::Recoarsen { base: space.clone(), entourage: u.clone() })?;
    let rips = rips_complex(space, u, 1)?;
    let (domain, codomain) = match twist {
        None => (x_u, (*rips.space).clone()),
        Some(q) => (tensor(&x_u, q)?, tensor(&rips.space, q)?),
    };
    let (domain, codomain) = (Arc::new(domain), Arc::new(codomain));
    let delta = SpaceMap::new(domain.clone(), codomain.clone(), (0..domain.size()).collect())?;
    // in the vertex model (μ, q) has support {μ}, so its least support vertex gives (μ, q) back
    let action = codomain.action();
    let mut assignment = vec![usize::MAX; codomain.size()];
    for orbit in action.orbits() {
        let rep = *orbit.iter().next().expect("orbits are nonempty");
        let image = rep;
        for g in space.group().elements() {
            let (p, v) = (action.act(g, rep), domain.action().act(g, image));
            if assignment[p] != usize::MAX && assignment[p] != v {
                return Err(CoarseError::Construction(format!("inverse ill-defined at {}", codomain.name(p))));
            }
            assignment[p] = v;
        }
    }
    let inverse = SpaceMap::new(codomain, domain.clone(), assignment)?;
    let round = delta.then(&inverse)?;
    let left_identity = CheckResult::from_witness(
        "g∘δ = id",
        (0..domain.size()).find(|&p| round.apply(p) != p).map(|p| format!("g(δ({})) ≠ {}", domain.name(p), domain.name(p))),
    );
    let report = analyze_map(&delta, Some(&inverse), &SearchConfig::default())?;
    Ok(DiracEquivalence { delta, inverse, left_identity, report })
}

/// Oriented simplicial homology `H_0..=H_top` over ℤ; needs simplices up to dimension `top + 1`.
pub fn simplicial_homology(k: &SimplicialComplex, top: usize) -> Vec<HomologyGroup> {
    let index: Vec<HashMap<&[usize], usize>> =
        k.simplices.iter().map(|layer| layer.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect()).collect();
    let boundary = |n: usize| -> IntMatrix {
        let rows = k.count(n - 1);
        let cols = k.count(n);
        let triplets = (0..cols).flat_map(|c| {
            let s = &k.simplices[n][c];
            let index = &index;
            (0..s.len()).map(move |i| {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                (index[n - 1][face(s, i).as_slice()], c, BigInt::from(sign))
            })
        });
        IntMatrix::from_triplets(rows, cols, triplets)
    };
    let divisors: Vec<_> = (1..=top + 1).map(|n| elementary_divisors(&boundary(n))).collect();
    (0..=top)
        .map(|n| {
            let outgoing = if n == 0 { 0 } else { divisors[n - 1].rank };
            let incoming = &divisors[n];
            HomologyGroup { rank: k.count(n) - outgoing - incoming.rank, torsion: incoming.nontrivial.clone() }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SbgReport {
    pub minimal_bornology: CheckResult,
    /// `max_x |U[x]|` for the one-step entourage.
    pub bound: usize,
    pub attained_at: Option<String>,
}

impl SbgReport {
    pub fn holds(&self) -> bool {
        self.minimal_bornology.passed
    }
}

pub fn sbg_check(space: &Space) -> SbgReport {
    let n = space.size();
    let larger = space.bornology().generators().iter().find(|b| b.len() > 1).map(|b| format!("generator {} is not a singleton", space.fmt_set(b)));
    let missing = space.bornology().uncovered(n).map(|x| format!("{{{}}} is unbounded", space.name(x)));
    let step = space.step_entourage();
    let (bound, at) = (0..n).map(|x| (step.thicken(&PointSet::from([x])).len(), x)).max_by_key(|&(b, x)| (b, std::cmp::Reverse(x))).unwrap_or((0, 0));
    SbgReport {
        minimal_bornology: CheckResult::from_witness("minimal bornology", missing.or(larger)),
        bound,
        attained_at: (n > 0).then(|| space.name(at).to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::GammaSet;

    fn cycle(n: usize) -> Space {
        let d = (0..n).map(|i| (0..n).map(|j| { let k = i.abs_diff(j); k.min(n - k) as f64 }).collect()).collect();
        let set = GammaSet::trivial(Arc::new(FiniteGroup::trivial()), n);
        build(&SpaceSpec::Metric { set, distances: d, scales: vec![1.0, 2.0] }).unwrap()
    }

    fn band(n: usize) -> Space {
        let g = Arc::new(FiniteGroup::trivial());
        Space::checked((0..n).map(|i| i.to_string()).collect(), Action::trivial(g, n), vec![Entourage::band(n, 1)], crate::Bornology::singletons(n)).unwrap()
    }

    #[test]
    fn five_cycle_complexes() {
        let c5 = cycle(5);
        let u1 = c5.generators()[0].clone();
        let r1 = rips_complex(&c5, &u1, 4).unwrap();
        assert_eq!((r1.complex.count(0), r1.complex.count(1), r1.complex.count(2)), (5, 5, 0));
        let h = simplicial_homology(&r1.complex, 1);
        assert_eq!(h, vec![HomologyGroup::free(1), HomologyGroup::free(1)]);
        let r2 = rips_complex(&c5, &c5.generators()[1], 4).unwrap();
        assert_eq!(r2.complex.count(4), 1);
        let h = simplicial_homology(&r2.complex, 3);
        assert_eq!(h, vec![HomologyGroup::free(1), HomologyGroup::zero(), HomologyGroup::zero(), HomologyGroup::zero()]);
    }

    #[test]
    fn diagonal_gives_discrete_complex() {
        let c5 = cycle(5);
        let r = rips_complex(&c5, &Entourage::diagonal(5), 4).unwrap();
        assert_eq!(r.complex.dimension(), Some(0));
        assert_eq!(simplicial_homology(&r.complex, 0), vec![HomologyGroup::free(5)]);
    }

    #[test]
    fn empty_complex_and_round_trip() {
        let empty = SimplicialComplex::parse("").unwrap();
        assert_eq!(simplicial_homology(&empty, 2), vec![HomologyGroup::zero(); 3]);
        let r = rips_complex(&cycle(5), &cycle(5).generators()[0], 2).unwrap();
        assert_eq!(SimplicialComplex::parse(&r.complex.export()).unwrap(), r.complex);
        assert!(SimplicialComplex::parse("0 1\n").is_err());
    }

    #[test]
    fn torsion_in_projective_plane() {
        // six-vertex triangulation of RP²
        let faces = "0 1 3\n0 1 4\n0 2 3\n0 2 5\n0 4 5\n1 2 4\n1 2 5\n1 3 5\n2 3 4\n3 4 5";
        let mut lines: Vec<String> = (0..6).map(|v| v.to_string()).collect();
        let mut edges = std::collections::BTreeSet::new();
        for f in faces.lines() {
            let v: Vec<usize> = f.split(' ').map(|t| t.parse().unwrap()).collect();
            for i in 0..3 {
                edges.insert(face(&v, i));
            }
        }
        lines.extend(edges.iter().map(|e| format!("{} {}", e[0], e[1])));
        lines.push(faces.to_string());
        let k = SimplicialComplex::parse(&lines.join("\n")).unwrap();
        let h = simplicial_homology(&k, 2);
        assert_eq!(h, vec![HomologyGroup::free(1), HomologyGroup::cyclic(2), HomologyGroup::zero()]);
    }

    #[test]
    fn functoriality_examples() {
        let c5 = Arc::new(cycle(5));
        let u1 = c5.generators()[0].clone();
        let u2 = c5.generators()[1].clone();
        let (_, _, inc) = rips_functorial(&SpaceMap::identity(c5.clone()), &u1, &u2, 3).unwrap();
        assert!(inc.holds());
        let rot = SpaceMap::new(c5.clone(), c5.clone(), (0..5).map(|i| (i + 1) % 5).collect()).unwrap();
        assert!(rips_functorial(&rot, &u1, &u1, 3).unwrap().2.holds());
        let pt = Arc::new(Space::point());
        let collapse = SpaceMap::new(c5.clone(), pt, vec![0; 5]).unwrap();
        let (_, _, m) = rips_functorial(&collapse, &u1, &Entourage::diagonal(1), 3).unwrap();
        assert!(m.simplicial.passed);
        assert!(rips_functorial(&SpaceMap::identity(c5), &u2, &u1, 3).is_err());
    }

    #[test]
    fn filtration_is_monotone() {
        let c5 = cycle(5);
        let chain = vec![Entourage::diagonal(5), c5.generators()[0].clone(), c5.generators()[1].clone()];
        let f = rips_filtration(&c5, &chain, 4).unwrap();
        assert!(f.stages.windows(2).all(|w| w[0].complex.is_subcomplex_of(&w[1].complex)));
        assert!(f.inclusions.iter().all(SimplicialMap::holds));
    }

    #[test]
    fn dirac_untwisted_twisted_and_rejected() {
        let b = band(5);
        let d = dirac_equivalence(&b, &Entourage::band(5, 1), None).unwrap();
        assert!(d.holds(), "{:?}", d.report);
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let pt = Space::point_over(z2.clone());
        let q = build(&SpaceSpec::MinMin(GammaSet::regular(z2.clone()))).unwrap();
        assert!(dirac_equivalence(&pt, &Entourage::diagonal(1), Some(&q)).unwrap().holds());
        let swap = build(&SpaceSpec::MaxMax(GammaSet::regular(z2))).unwrap();
        assert!(matches!(dirac_equivalence(&swap, &Entourage::full(2), None), Err(CoarseError::Precondition(_))));
    }

    #[test]
    fn strongly_bounded_geometry() {
        assert_eq!(sbg_check(&Space::point()).bound, 1);
        let r = sbg_check(&band(10));
        assert!(r.holds());
        assert_eq!(r.bound, 3);
        let set = GammaSet::trivial(Arc::new(FiniteGroup::trivial()), 4);
        assert!(!sbg_check(&build(&SpaceSpec::MaxMax(set)).unwrap()).holds());
    }
}
