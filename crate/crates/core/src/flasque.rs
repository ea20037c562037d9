//! Horizon-bounded flasqueness checks on finite spaces and truncated shift families `ℕ×F₀`.

use serde::Serialize;
use std::sync::Arc;

use crate::error::{precondition, Result};
use crate::space::{Action, Bornology, CheckResult, Entourage, PointSet, Space};

/// `ℕ×F₀` with band generators `{((m,x),(m',x')) : |m-m'| ≤ w, (x,x') ∈ M₀}` and finite sets bounded.
#[derive(Debug, Clone)]
pub struct ShiftFamily {
    pub base: Arc<Space>,
    pub band_widths: Vec<usize>,
}

impl ShiftFamily {
    pub fn new(base: Arc<Space>, band_widths: Vec<usize>) -> Self {
        Self { base, band_widths }
    }

    /// The half line `ℕ×{pt}` with band-1 generator.
    pub fn half_line() -> Self {
        Self::new(Arc::new(Space::point()), vec![1])
    }

    pub fn max_width(&self) -> usize {
        self.band_widths.iter().copied().max().unwrap_or(0)
    }

    fn related(&self, width: usize, (m, x): (usize, usize), (m2, x2): (usize, usize)) -> bool {
        m.abs_diff(m2) <= width && self.base.coarse_max().contains(x, x2)
    }

    /// Point index of `(m, x)` in a truncation.
    pub fn index(&self, m: usize, x: usize) -> usize {
        m * self.base.size() + x
    }

    /// Finite model on positions `0..positions`.
    pub fn truncation(&self, positions: usize) -> Result<Space> {
        let k = self.base.size();
        let n = positions * k;
        let names = (0..positions)
            .flat_map(|m| (0..k).map(move |x| (m, x)))
            .map(|(m, x)| format!("({m},{})", self.base.name(x)))
            .collect();
        let group = self.base.group().clone();
        let perms = group
            .elements()
            .map(|g| (0..n).map(|p| self.index(p / k, self.base.action().act(g, p % k))).collect())
            .collect();
        let action = Action::new(group, perms)?;
        let generators = self
            .band_widths
            .iter()
            .map(|&w| {
                let mut e = Entourage::empty(n);
                for p in 0..n {
                    for q in 0..n {
                        if self.related(w, (p / k, p % k), (q / k, q % k)) {
                            e.insert(p, q);
                        }
                    }
                }
                e
            })
            .collect();
        Space::checked(names, action, generators, Bornology::singletons(n))
    }
}

#[derive(Debug, Clone)]
pub enum SpaceDescription {
    Finite(Arc<Space>),
    Shift(ShiftFamily),
}

/// Endomorphisms: a point map on a finite space, or `(m,x) ↦ (m+offset, base_map(x))`.
#[derive(Debug, Clone)]
pub enum Endomorphism {
    Finite(Vec<usize>),
    Shift { offset: usize, base_map: Vec<usize> },
}

impl Endomorphism {
    pub fn shift(offset: usize, base_size: usize) -> Self {
        Endomorphism::Shift { offset, base_map: (0..base_size).collect() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlasquenessReport {
    pub horizon: usize,
    pub endomorphism: CheckResult,
    pub close_to_identity: CheckResult,
    pub uniformly_controlled: CheckResult,
    pub escapes_bounded_sets: CheckResult,
}

impl FlasquenessReport {
    /// Verified up to the horizon; never a proof for unbounded iteration.
    pub fn verified_up_to_horizon(&self) -> bool {
        self.endomorphism.passed
            && self.close_to_identity.passed
            && self.uniformly_controlled.passed
            && self.escapes_bounded_sets.passed
    }
}

pub fn flasqueness_check(space: &SpaceDescription, f: &Endomorphism, horizon: usize) -> Result<FlasquenessReport> {
    if horizon < 1 {
        return precondition("horizon must be at least 1");
    }
    match (space, f) {
        (SpaceDescription::Finite(x), Endomorphism::Finite(map)) => finite_check(x, map, horizon),
        (SpaceDescription::Shift(fam), Endomorphism::Shift { offset, base_map }) => {
            shift_check(fam, *offset, base_map, horizon)
        }
        _ => precondition("endomorphism kind does not match the space description"),
    }
}

fn finite_check(x: &Arc<Space>, map: &[usize], horizon: usize) -> Result<FlasquenessReport> {
    let fmap = crate::maps::SpaceMap::new(x.clone(), x.clone(), map.to_vec())?;
    let m = x.coarse_max();
    let close = (0..x.size())
        .find(|&p| !m.contains(map[p], p))
        .map(|p| format!("(f({0}), {0}) not an entourage pair", x.name(p)));
    let mut uniform = None;
    'gens: for (i, gen) in x.generators().iter().enumerate() {
        let mut iter: Vec<usize> = (0..x.size()).collect();
        for n in 0..=horizon {
            if let Some((p, q)) = gen.pairs().find(|&(p, q)| !m.contains(iter[p], iter[q])) {
                uniform = Some(format!("generator {i}: f^{n} moves ({},{}) out of the structure", x.name(p), x.name(q)));
                break 'gens;
            }
            iter = iter.iter().map(|&p| map[p]).collect();
        }
    }
    let mut bounded: Vec<PointSet> = x.bornology().generators().to_vec();
    bounded.push(x.all_points());
    let escape = bounded.iter().filter(|b| !b.is_empty()).find_map(|b| {
        let gb = x.action().saturate_set(b);
        let mut image = x.all_points();
        for _ in 0..=horizon {
            if gb.is_disjoint(&image) {
                return None;
            }
            image = image.iter().map(|&p| map[p]).collect();
        }
        Some(format!("ΓB meets f^n(X) for every n ≤ {horizon}, B = {}", x.fmt_set(b)))
    });
    Ok(FlasquenessReport {
        horizon,
        endomorphism: CheckResult::from_witness("endomorphism", fmap.morphism_witness()),
        close_to_identity: CheckResult::from_witness("close to identity", close),
        uniformly_controlled: CheckResult::from_witness("uniformly controlled", uniform),
        escapes_bounded_sets: CheckResult::from_witness("escapes bounded sets", escape),
    })
}

fn shift_check(fam: &ShiftFamily, offset: usize, base_map: &[usize], horizon: usize) -> Result<FlasquenessReport> {
    let base = &fam.base;
    let k = base.size();
    let pi = crate::maps::SpaceMap::new(base.clone(), base.clone(), base_map.to_vec())?;
    let declared = fam.max_width().max(offset);
    let apply = |(m, x): (usize, usize), n: usize| -> (usize, usize) {
        let mut x = x;
        for _ in 0..n {
            x = base_map[x];
        }
        (m + n * offset, x)
    };
    let window: Vec<(usize, usize)> = (0..=horizon).flat_map(|m| (0..k).map(move |x| (m, x))).collect();
    let close = window
        .iter()
        .find(|&&p| !fam.related(declared, apply(p, 1), p))
        .map(|&(m, x)| format!("f({m},{}) not within width {declared}", base.name(x)));
    let mut uniform = None;
    'outer: for &w in &fam.band_widths {
        for &p in &window {
            for &q in &window {
                if !fam.related(w, p, q) {
                    continue;
                }
                for n in 0..=horizon {
                    if !fam.related(declared, apply(p, n), apply(q, n)) {
                        uniform = Some(format!("width {w}: f^{n} spreads ({},{}) beyond width {declared}", p.0, q.0));
                        break 'outer;
                    }
                }
            }
        }
    }
    // f^n(ℕ×F₀) = {m ≥ n·offset} × π^n(F₀); bornology generated by singletons inside the window
    let escape = (0..horizon).flat_map(|m| (0..k).map(move |x| (m, x))).find_map(|(m, x)| {
        let orbit = base.action().orbit(x);
        let hit = (0..=horizon).all(|n| {
            let mut image: PointSet = (0..k).collect();
            for _ in 0..n {
                image = image.iter().map(|&y| base_map[y]).collect();
            }
            m >= n * offset && !orbit.is_disjoint(&image)
        });
        hit.then(|| format!("Γ{{({m},{})}} meets f^n(X) for every n ≤ {horizon}", base.name(x)))
    });
    Ok(FlasquenessReport {
        horizon,
        endomorphism: CheckResult::from_witness("endomorphism", pi.morphism_witness()),
        close_to_identity: CheckResult::from_witness("close to identity", close),
        uniformly_controlled: CheckResult::from_witness("uniformly controlled", uniform),
        escapes_bounded_sets: CheckResult::from_witness("escapes bounded sets", escape),
    })
}
