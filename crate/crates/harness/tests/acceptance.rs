//! One PASS/FAIL line per acceptance criterion; exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use coarsex::constructions::{build, GammaSet, SpaceSpec};
use coarsex::controlled::{flasque_sigma_check, hom_basis, karoubi_complete, restrict, BhFunctor, BhRep, ConvObject, Convolution, CtrlMorphism, CtrlObject};
use coarsex::flasque::{flasqueness_check, Endomorphism, ShiftFamily, SpaceDescription};
use coarsex::group_change::{adjunction_check, mackey_check, subgroup_inclusion};
use coarsex::homology::{cyclic_group_oracle, group_homology, homology, phi_psi, ChainConfig, HomologyGroup};
use coarsex::linalg::IntMatrix;
use coarsex::rips::{dirac_equivalence, rips_complex, simplicial_homology};
use coarsex::subsets::BigFamily;
use coarsex::{Action, Bornology, Entourage, FiniteGroup, PointSet, Space};
use coarsex_harness::generate::{child_seed, gen_space_over, rng, subgroups, GenConfig};
use coarsex_harness::suite::{axiom_suite, Mutation, Status, SuiteConfig};
use rand::Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, witness: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(witness())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn point_homology() -> Outcome {
    let h = homology(&Space::point(), 4, &ChainConfig::default()).map_err(err)?;
    // the point's complex is ℤ in each degree with ∂_n = 0 for odd n and 1 for even n > 0
    let oracle: Vec<HomologyGroup> = (0..=4).map(|n| if n == 0 { HomologyGroup::free(1) } else { HomologyGroup::zero() }).collect();
    ensure(h == oracle, || format!("{h:?}"))
}

fn group_homology_oracle() -> Outcome {
    for m in [2u64, 3, 4] {
        let start = Instant::now();
        let group = Arc::new(FiniteGroup::cyclic(m as usize));
        let h = group_homology(&Action::trivial(group, 1), 3, &ChainConfig::default()).map_err(err)?;
        let oracle: Vec<HomologyGroup> = (0..=3).map(|n| cyclic_group_oracle(m, n)).collect();
        ensure(h == oracle, || format!("Z/{m}: {h:?} ≠ {oracle:?}"))?;
        ensure(start.elapsed() < Duration::from_secs(10), || format!("Z/{m} took {:?}", start.elapsed()))?;
    }
    Ok(())
}

fn phi_psi_isomorphism() -> Outcome {
    for group in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric(3)] {
        let group = Arc::new(group);
        let mut sets = vec![GammaSet::point(group.clone())];
        for h in subgroups(&group).into_iter().filter(|h| h.len() < group.order()) {
            sets.push(GammaSet::cosets(group.clone(), &h).map_err(err)?);
        }
        for set in &sets {
            let r = phi_psi(set, 3, &ChainConfig::default()).map_err(err)?.report;
            ensure(r.holds(), || format!("order {} on {} points: {r:?}", group.order(), set.size()))?;
        }
    }
    Ok(())
}

fn axiom_suite_passes() -> Outcome {
    let cfg = SuiteConfig { seed: 42, trials: 100, max_size: 6, max_degree: 2, ..SuiteConfig::default() };
    let r = axiom_suite(&cfg);
    for name in ["coarse_invariance", "mayer_vietoris", "u_continuity", "additivity", "hx_cont"] {
        let c = r.check(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(c.verdict == Status::Pass && c.runs == 100, || format!("{name}: {c:?}"))?;
    }
    ensure(r.passed(), || format!("{:?}", r.checks.iter().find(|c| c.verdict == Status::Fail)))
}

fn flasqueness() -> Outcome {
    let half = SpaceDescription::Shift(ShiftFamily::half_line());
    let shift = Endomorphism::shift(1, 1);
    let r = flasqueness_check(&half, &shift, 20).map_err(err)?;
    ensure(r.verified_up_to_horizon(), || format!("{r:?}"))?;
    let s = flasque_sigma_check(&half, &shift, 10, 1).map_err(err)?;
    ensure(s.holds(), || format!("{s:?}"))?;
    let pt = SpaceDescription::Finite(Arc::new(Space::point()));
    let id = Endomorphism::Finite(vec![0]);
    let r = flasqueness_check(&pt, &id, 20).map_err(err)?;
    ensure(!r.escapes_bounded_sets.passed, || "identity on a point escapes bounded sets".into())?;
    let s = flasque_sigma_check(&pt, &id, 10, 1).map_err(err)?;
    ensure(!s.locally_finite.passed, || "Σ of the identity on a point is locally finite".into())
}

fn mackey() -> Outcome {
    let s3 = Arc::new(FiniteGroup::symmetric(3));
    let z4 = Arc::new(FiniteGroup::cyclic(4));
    let cases = [
        (s3.clone(), vec![s3.identity(), s3.index_of("(12)").ok_or("no (12)")?]),
        (z4.clone(), vec![0, 2]),
    ];
    for (gamma, h) in cases {
        let iota = subgroup_inclusion(&gamma, &h).map_err(err)?;
        let group = iota.source.clone();
        let spaces = [
            Space::point_over(group.clone()),
            build(&SpaceSpec::MinMin(GammaSet::regular(group.clone()))).map_err(err)?,
            build(&SpaceSpec::MaxMax(GammaSet::regular(group))).map_err(err)?,
        ];
        for x in &spaces {
            let r = mackey_check(x, &iota, &iota).map_err(err)?;
            ensure(r.holds(), || format!("order {} over {} points: {:?}", gamma.order(), x.size(), r.iso))?;
        }
    }
    Ok(())
}

fn adjunction() -> Outcome {
    let z4 = Arc::new(FiniteGroup::cyclic(4));
    let iota = subgroup_inclusion(&z4, &[0, 2]).map_err(err)?;
    let cfg = GenConfig { min_size: 1, max_size: 4, groups: Vec::new() };
    for i in 0..3 {
        let x = gen_space_over(child_seed(7, 2 * i), &iota.source, &cfg);
        let y = gen_space_over(child_seed(7, 2 * i + 1), &z4, &cfg);
        let r = adjunction_check(&iota, &x, &y).map_err(err)?;
        ensure(r.holds(), || format!("sample {i}: {r:?}"))?;
    }
    Ok(())
}

fn band(n: usize) -> Arc<Space> {
    let g = Arc::new(FiniteGroup::trivial());
    let names = (0..n).map(|i| i.to_string()).collect();
    Arc::new(Space::checked(names, Action::trivial(g, n), vec![Entourage::band(n, 1)], Bornology::singletons(n)).expect("band space"))
}

fn rips_and_dirac() -> Outcome {
    let set = GammaSet::trivial(Arc::new(FiniteGroup::trivial()), 5);
    let distances = (0..5usize).map(|i| (0..5).map(|j: usize| (i.abs_diff(j)).min(5 - i.abs_diff(j)) as f64).collect()).collect();
    let c5 = build(&SpaceSpec::Metric { set, distances, scales: vec![1.0, 2.0] }).map_err(err)?;
    let h1 = |u: &Entourage| -> Result<HomologyGroup, String> {
        let k = rips_complex(&c5, u, 4).map_err(err)?.complex;
        Ok(simplicial_homology(&k, 1)[1].clone())
    };
    ensure(h1(&c5.generators()[0])? == HomologyGroup::free(1), || "H1 of P_U1(C5) is not Z".into())?;
    ensure(h1(&c5.generators()[1])?.is_zero(), || "H1 of P_U2(C5) is not 0".into())?;
    let b = band(6);
    let d = dirac_equivalence(&b, &Entourage::band(6, 1), None).map_err(err)?;
    ensure(d.holds(), || format!("band: {:?}", d.report))?;
    let z2 = Arc::new(FiniteGroup::cyclic(2));
    let q = build(&SpaceSpec::MinMin(GammaSet::regular(z2.clone()))).map_err(err)?;
    for x in [Space::point_over(z2.clone()), build(&SpaceSpec::MaxMax(GammaSet::regular(z2))).map_err(err)?] {
        let u = x.coarse_max().clone();
        let d = dirac_equivalence(&x, &u, Some(&q)).map_err(err)?;
        ensure(d.holds(), || format!("twisted over {} points: {:?}", x.size(), d.report))?;
    }
    Ok(())
}

fn random_combination(basis: Vec<CtrlMorphism>, source: &Arc<CtrlObject>, target: &Arc<CtrlObject>, rng: &mut impl Rng) -> Result<CtrlMorphism, String> {
    basis.into_iter().try_fold(CtrlMorphism::zero(source.clone(), target.clone()), |acc, f| {
        let k = rng.gen_range(-2i64..=2);
        let matrix = IntMatrix::from_triplets(f.matrix.rows(), f.matrix.cols(), f.matrix.triplets().map(|(r, c, v)| (r, c, v * k)));
        let scaled = CtrlMorphism::new(f.source.clone(), f.target.clone(), f.control.clone(), matrix).map_err(err)?;
        acc.plus(&scaled).map_err(err)
    })
}

fn controlled_categories() -> Outcome {
    let mut rng = rng(2024);
    // convolution on S3/<(12)>
    let s3 = Arc::new(FiniteGroup::symmetric(3));
    let h = [s3.identity(), s3.index_of("(12)").ok_or("no (12)")?];
    let conv = Convolution::new(GammaSet::cosets(s3, &h).map_err(err)?).map_err(err)?;
    let mut pairs = 0;
    while pairs < 10 {
        let a = ConvObject { ranks: (0..3).map(|_| rng.gen_range(0..=2)).collect() };
        let b = ConvObject { ranks: (0..3).map(|_| rng.gen_range(0..=2)).collect() };
        let c = Arc::new(conv.preimage(&a).map_err(err)?);
        let d = Arc::new(conv.preimage(&b).map_err(err)?);
        ensure(conv.phi(&c).map_err(err)? == a, || format!("Φ(preimage({a:?})) ≠ {a:?}"))?;
        let r = conv.fullness(&c, &d).map_err(err)?;
        ensure(r.full && r.faithful && r.hom_rank == r.convolution_rank, || format!("{a:?} → {b:?}: {r:?}"))?;
        pairs += 1;
    }
    // bh over Z2 ≤ Z2 on the point, trivial and sign representations
    let z2 = Arc::new(FiniteGroup::cyclic(2));
    let space = Arc::new(build(&SpaceSpec::MinMin(GammaSet::cosets(z2.clone(), &[0, 1]).map_err(err)?)).map_err(err)?);
    let bh = BhFunctor::new(space.clone(), subgroup_inclusion(&z2, &[0, 1]).map_err(err)?).map_err(err)?;
    let int = |v: i64| IntMatrix::from_i64(&[vec![v]]);
    let reps = [
        BhRep::new(z2.clone(), 1, vec![int(1), int(1)]).map_err(err)?,
        BhRep::new(z2.clone(), 1, vec![int(1), int(-1)]).map_err(err)?,
        BhRep::new(z2.clone(), 2, vec![IntMatrix::identity(2), IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]])]).map_err(err)?,
    ];
    for rep in &reps {
        let obj = Arc::new(bh.psi(rep).map_err(err)?);
        let endo = hom_basis(&obj, &obj, space.coarse_max()).map_err(err)?;
        let r = bh.round_trip(&[obj], &endo);
        ensure(r.holds(), || format!("rank {}: {r:?}", rep.rank))?;
    }
    // karoubi on band families
    for run in 0..20 {
        let n = rng.gen_range(4..=8);
        let x = band(n);
        let seed: PointSet = [rng.gen_range(0..n)].into();
        let family = BigFamily::generated(&x, &seed);
        let c = Arc::new(CtrlObject::with_identity_cocycle(x.clone(), (0..n).map(|_| rng.gen_range(0..=2)).collect()).map_err(err)?);
        let stage = family.stages[rng.gen_range(0..family.stages.len())].clone();
        let inner: PointSet = stage.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        let a = restrict(&c, &inner).map_err(err)?.object;
        let b = restrict(&c, &stage).map_err(err)?.object;
        let step = x.step_entourage();
        let f = random_combination(hom_basis(&a, &c, &step).map_err(err)?, &a, &c, &mut rng)?;
        let g = random_combination(hom_basis(&c, &b, &step).map_err(err)?, &c, &b, &mut rng)?;
        let d = karoubi_complete(&f, &g, &family).map_err(|e| format!("run {run}: {e}"))?;
        ensure(d.commutes.passed, || format!("run {run}: {:?}", d.commutes))?;
    }
    Ok(())
}

fn mutation_sensitivity() -> Outcome {
    let cases = [
        (Mutation::FlipBoundarySign, "mayer_vietoris"),
        (Mutation::DropEntouragePair, "coarse_invariance"),
        (Mutation::BreakCocycle, "controlled"),
    ];
    for (mutation, check) in cases {
        let r = axiom_suite(&SuiteConfig { trials: 20, mutation: Some(mutation), ..SuiteConfig::default() });
        let c = r.check(check).ok_or_else(|| format!("{check} missing"))?;
        ensure(c.verdict == Status::Fail && c.failures > 0 && c.witness.is_some(), || format!("{mutation:?} not caught: {c:?}"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 point homology", point_homology, Duration::from_secs(1)),
        ("2 group homology oracle", group_homology_oracle, Duration::from_secs(30)),
        ("3 phi/psi isomorphism", phi_psi_isomorphism, Duration::from_secs(60)),
        ("4 axiom suite", axiom_suite_passes, Duration::from_secs(300)),
        ("5 flasqueness", flasqueness, Duration::from_secs(10)),
        ("6 Mackey decomposition", mackey, Duration::from_secs(5)),
        ("7 induction adjunction", adjunction, Duration::from_secs(5)),
        ("8 Rips and Dirac", rips_and_dirac, Duration::from_secs(5)),
        ("9 controlled categories", controlled_categories, Duration::from_secs(60)),
        ("10 mutation sensitivity", mutation_sensitivity, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| ensure(elapsed <= budget, || format!("took {elapsed:?}, budget {budget:?}")));
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({} ms)", elapsed.as_millis()),
            Err(w) => {
                failed += 1;
                println!("FAIL criterion {name} ({} ms): {w}", elapsed.as_millis());
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
