//! Finite groups given by multiplication tables, and homomorphisms between them.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, CoarseError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Checks closure, associativity, identity and inverses on the full table.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return domain("group must have at least one element");
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return domain(format!("multiplication table must be {n}x{n}"));
        }
        if let Some((a, b)) = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .find(|&(a, b)| table[a][b] >= n)
        {
            return domain(format!("table entry ({a},{b}) out of range"));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != n {
            return domain("duplicate group element names");
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(CoarseError::Validation {
                            check: "associativity".into(),
                            witness: format!("({}, {}, {})", names[a], names[b], names[c]),
                        });
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| CoarseError::Validation {
                check: "identity".into(),
                witness: "no two-sided identity".into(),
            })?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| CoarseError::Validation {
                    check: "inverse".into(),
                    witness: format!("{} has no inverse", names[a]),
                })?;
            inverses.push(inv);
        }
        Ok(Self { names, table, identity, inverses })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order zero");
        let names = (0..n).map(|k| if k == 0 { "e".to_string() } else { format!("t{k}") }).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(names, table).expect("cyclic table is a group")
    }

    /// The symmetric group on `{1..n}`; elements are permutations in lexicographic order,
    /// named in cycle notation, multiplied as composition `(ab)(i) = a(b(i))`.
    pub fn symmetric(n: usize) -> Self {
        let perms = all_permutations(n);
        let index: HashMap<&Vec<usize>, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index[&compose_perm(a, b)]).collect())
            .collect();
        let names = perms.iter().map(|p| cycle_name(p)).collect();
        Self::from_table(names, table).expect("symmetric table is a group")
    }

    /// Menu names used by the harness and the document format.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "trivial" | "1" => Ok(Self::trivial()),
            "Z2" => Ok(Self::cyclic(2)),
            "Z3" => Ok(Self::cyclic(3)),
            "Z4" => Ok(Self::cyclic(4)),
            "S3" => Ok(Self::symmetric(3)),
            other => domain(format!("unknown group name {other:?}")),
        }
    }

    /// Closure of a set of permutations of `{0..degree}` under composition.
    /// Returns the group together with the permutation of each element.
    pub fn from_permutations(degree: usize, generators: &[Vec<usize>]) -> Result<(Self, Vec<Vec<usize>>)> {
        for g in generators {
            let set: BTreeSet<usize> = g.iter().copied().collect();
            if g.len() != degree || set.len() != degree || set.iter().any(|&i| i >= degree) {
                return domain(format!("{g:?} is not a permutation of {degree} points"));
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elems = vec![identity];
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        seen.insert(elems[0].clone(), 0);
        let mut frontier = 0;
        while frontier < elems.len() {
            let cur = elems[frontier].clone();
            frontier += 1;
            for g in generators {
                let next = compose_perm(g, &cur);
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), elems.len());
                    elems.push(next);
                }
            }
        }
        let table = elems
            .iter()
            .map(|a| elems.iter().map(|b| seen[&compose_perm(a, b)]).collect())
            .collect();
        let names = (0..elems.len()).map(|i| if i == 0 { "e".to_string() } else { format!("p{i}") }).collect();
        Ok((Self::from_table(names, table)?, elems))
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `g⁻¹ a g`.
    pub fn conj_by(&self, g: usize, a: usize) -> usize {
        self.mul(self.mul(self.inv(g), a), g)
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = BTreeSet::from([self.identity]);
        let mut stack = vec![self.identity];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    stack.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        set.contains(&self.identity)
            && set.iter().all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, self.inv(b)))))
    }

    pub fn normalizer(&self, sub: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = sub.iter().copied().collect();
        self.elements()
            .filter(|&g| set.iter().all(|&h| set.contains(&self.conj_by(g, h))))
            .collect()
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        self.normalizer(sub).len() == self.order()
    }

    /// Left cosets `gH`, each sorted, listed in order of their least element.
    pub fn left_cosets(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in self.elements() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = sub.iter().map(|&h| self.mul(g, h)).collect();
            coset.sort_unstable();
            coset.dedup();
            for &x in &coset {
                seen[x] = true;
            }
            out.push(coset);
        }
        out
    }

    /// Double cosets `left · g · right`, each sorted, in order of first occurrence.
    pub fn double_cosets(&self, left: &[usize], right: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in self.elements() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = left
                .iter()
                .flat_map(|&a| right.iter().map(move |&b| (a, b)))
                .map(|(a, b)| self.mul(self.mul(a, g), b))
                .collect();
            coset.sort_unstable();
            coset.dedup();
            for &x in &coset {
                seen[x] = true;
            }
            out.push(coset);
        }
        out
    }

    /// The subgroup on `elems` as a group of its own, with its inclusion.
    pub fn subgroup(self: &Arc<Self>, elems: &[usize]) -> Result<(Arc<FiniteGroup>, GroupHom)> {
        if !self.is_subgroup(elems) {
            return domain(format!("{elems:?} is not a subgroup"));
        }
        let mut elems: Vec<usize> = elems.to_vec();
        elems.sort_unstable();
        elems.dedup();
        // identity first so that the subgroup's identity index stays 0 whenever ours is
        elems.retain(|&e| e != self.identity);
        elems.insert(0, self.identity);
        let pos: HashMap<usize, usize> = elems.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let table = elems
            .iter()
            .map(|&a| elems.iter().map(|&b| pos[&self.mul(a, b)]).collect())
            .collect();
        let names = elems.iter().map(|&g| self.names[g].clone()).collect();
        let sub = Arc::new(FiniteGroup::from_table(names, table)?);
        let hom = GroupHom::new(sub.clone(), self.clone(), elems)?;
        Ok((sub, hom))
    }

    /// `G/N` for normal `N`, with the projection. Cosets are ordered by least element.
    pub fn quotient(self: &Arc<Self>, normal: &[usize]) -> Result<(Arc<FiniteGroup>, GroupHom)> {
        if !self.is_subgroup(normal) || !self.is_normal(normal) {
            return domain(format!("{normal:?} is not a normal subgroup"));
        }
        let cosets = self.left_cosets(normal);
        let mut class = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &g in c {
                class[g] = i;
            }
        }
        let table = cosets
            .iter()
            .map(|a| cosets.iter().map(|b| class[self.mul(a[0], b[0])]).collect())
            .collect();
        let names = cosets.iter().map(|c| format!("{}N", self.names[c[0]])).collect();
        let q = Arc::new(FiniteGroup::from_table(names, table)?);
        let hom = GroupHom::new(self.clone(), q.clone(), class)?;
        Ok((q, hom))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    pub source: Arc<FiniteGroup>,
    pub target: Arc<FiniteGroup>,
    map: Vec<usize>,
    kernel: Vec<usize>,
    image: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: Arc<FiniteGroup>, target: Arc<FiniteGroup>, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.order() {
            return domain("element map must cover the source group");
        }
        if let Some(&bad) = map.iter().find(|&&t| t >= target.order()) {
            return domain(format!("element map value {bad} outside the target group"));
        }
        for a in source.elements() {
            for b in source.elements() {
                if map[source.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(CoarseError::Validation {
                        check: "homomorphism".into(),
                        witness: format!("({}, {})", source.name(a), source.name(b)),
                    });
                }
            }
        }
        let kernel = source.elements().filter(|&h| map[h] == target.identity()).collect();
        let image: BTreeSet<usize> = map.iter().copied().collect();
        Ok(Self { source, target, map, kernel, image: image.into_iter().collect() })
    }

    pub fn identity(group: Arc<FiniteGroup>) -> Self {
        let map = group.elements().collect();
        Self::new(group.clone(), group, map).expect("identity is a homomorphism")
    }

    pub fn apply(&self, h: usize) -> usize {
        self.map[h]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn kernel(&self) -> &[usize] {
        &self.kernel
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_injective(&self) -> bool {
        self.kernel.len() == 1
    }
}

pub(crate) fn compose_perm(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn cycle_name(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut parts = Vec::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push((i + 1).to_string());
            i = p[i];
        }
        parts.push(format!("({})", cycle.join("")));
    }
    if parts.is_empty() {
        "e".into()
    } else {
        parts.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_has_expected_structure() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        let t = s3.index_of("(12)").unwrap();
        assert_eq!(s3.element_order(t), 2);
        let h = s3.generated_subgroup(&[t]);
        assert_eq!(h.len(), 2);
        assert_eq!(s3.normalizer(&h), h);
        assert_eq!(s3.left_cosets(&h).len(), 3);
        assert_eq!(s3.double_cosets(&h, &h).len(), 2);
    }

    #[test]
    fn rejects_non_associative_table() {
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let table = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 0]];
        assert!(FiniteGroup::from_table(names, table).is_err());
    }

    #[test]
    fn quotient_of_z4_by_z2_is_z2() {
        let z4 = Arc::new(FiniteGroup::cyclic(4));
        let (q, proj) = z4.quotient(&[0, 2]).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(proj.kernel(), &[0, 2]);
    }

    #[test]
    fn subgroup_inclusion_is_injective() {
        let z4 = Arc::new(FiniteGroup::cyclic(4));
        let (h, inc) = z4.subgroup(&[0, 2]).unwrap();
        assert_eq!(h.order(), 2);
        assert!(inc.is_injective());
        assert_eq!(inc.image(), &[0, 2]);
    }

    #[test]
    fn permutation_closure_builds_cyclic_group() {
        let (g, perms) = FiniteGroup::from_permutations(3, &[vec![1, 2, 0]]).unwrap();
        assert_eq!(g.order(), 3);
        assert!(g.is_abelian());
        assert_eq!(perms[0], vec![0, 1, 2]);
    }

    #[test]
    fn non_homomorphism_rejected() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        assert!(GroupHom::new(z2, z3, vec![0, 1]).is_err());
    }
}
