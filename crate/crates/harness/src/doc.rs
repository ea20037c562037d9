//! The shared JSON document format, version `coarsex/1`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use coarsex::controlled::CtrlObject;
use coarsex::linalg::IntMatrix;
use coarsex::{Action, Bornology, CoarseError, Entourage, FiniteGroup, GroupHom, PointSet, Result, Space, SpaceMap};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "coarsex/1";

/// A point or group element, by index or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupDoc {
    Named(String),
    Table { elements: Vec<String>, table: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDoc {
    /// Omitted for endomorphisms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<Box<SpaceDoc>>,
    pub assignment: Vec<Ref>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub format: String,
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupDoc>,
    /// Permutation per group element name; omitted for the trivial action.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub action: BTreeMap<String, Vec<Ref>>,
    #[serde(default)]
    pub entourages: BTreeMap<String, Vec<[Ref; 2]>>,
    /// Bornology generators; omitted means singletons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bornology: Option<Vec<Vec<Ref>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomBody {
    pub source: GroupDoc,
    pub target: GroupDoc,
    pub map: Vec<Ref>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomDoc {
    pub format: String,
    pub hom: HomBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectBody {
    pub dims: Vec<usize>,
    /// Per group element name, one dense matrix (list of rows) per point; omitted means identity.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cocycle: BTreeMap<String, Vec<Vec<Vec<i64>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtrlDoc {
    pub format: String,
    pub space: SpaceDoc,
    pub object: ObjectBody,
    /// Elements of the subgroup `H` for the bh functor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<Ref>>,
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CoarseError::Parse(msg.into()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CoarseError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CoarseError::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn check_format(found: &str) -> Result<()> {
    if found != FORMAT {
        return parse_err(format!("format: expected {FORMAT:?}, found {found:?}"));
    }
    Ok(())
}

fn resolve(r: &Ref, names: &[String], at: &str) -> Result<usize> {
    match r {
        Ref::Index(i) if *i < names.len() => Ok(*i),
        Ref::Index(i) => parse_err(format!("{at}: index {i} out of range")),
        Ref::Name(n) => names.iter().position(|m| m == n).ok_or_else(|| CoarseError::Parse(format!("{at}: unknown name {n:?}"))),
    }
}

pub fn load_group(doc: &GroupDoc) -> Result<FiniteGroup> {
    match doc {
        GroupDoc::Named(name) => FiniteGroup::named(name),
        GroupDoc::Table { elements, table } => FiniteGroup::from_table(elements.clone(), table.clone()),
    }
}

pub fn group_doc(group: &FiniteGroup) -> GroupDoc {
    GroupDoc::Table { elements: group.names().to_vec(), table: group.table().to_vec() }
}

/// A space with the names of its entourage generators, in generator order.
#[derive(Debug, Clone)]
pub struct LoadedSpace {
    pub space: Arc<Space>,
    pub entourage_names: Vec<String>,
    pub maps: BTreeMap<String, SpaceMap>,
}

impl LoadedSpace {
    pub fn entourage(&self, name: &str) -> Result<&Entourage> {
        self.entourage_names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.space.generators()[i])
            .ok_or_else(|| CoarseError::Parse(format!("entourages: no entourage named {name:?}")))
    }
}

/// Builds the space without validating it; callers decide how to report failed laws.
pub fn load_space(doc: &SpaceDoc) -> Result<LoadedSpace> {
    check_format(&doc.format)?;
    let group = Arc::new(doc.group.as_ref().map_or_else(|| Ok(FiniteGroup::trivial()), load_group)?);
    let n = doc.points.len();
    let action = if doc.action.is_empty() {
        Action::trivial(group.clone(), n)
    } else {
        let perms = group
            .names()
            .iter()
            .map(|g| {
                let perm = doc.action.get(g).ok_or_else(|| CoarseError::Parse(format!("action: no permutation for {g:?}")))?;
                perm.iter().enumerate().map(|(i, r)| resolve(r, &doc.points, &format!("action.{g}[{i}]"))).collect()
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        if let Some(extra) = doc.action.keys().find(|k| group.index_of(k).is_none()) {
            return parse_err(format!("action: {extra:?} is not a group element"));
        }
        Action::unchecked(group.clone(), perms)?
    };
    let mut entourage_names = Vec::new();
    let mut generators = Vec::new();
    for (name, pairs) in &doc.entourages {
        let pairs = pairs
            .iter()
            .enumerate()
            .map(|(i, [a, b])| {
                let at = format!("entourages.{name}[{i}]");
                Ok((resolve(a, &doc.points, &at)?, resolve(b, &doc.points, &at)?))
            })
            .collect::<Result<Vec<_>>>()?;
        entourage_names.push(name.clone());
        generators.push(Entourage::from_pairs(n, pairs)?);
    }
    if generators.is_empty() {
        generators.push(Entourage::diagonal(n));
    }
    let bornology = match &doc.bornology {
        None => Bornology::singletons(n),
        Some(sets) => Bornology::new(
            sets.iter()
                .enumerate()
                .map(|(i, set)| set.iter().map(|r| resolve(r, &doc.points, &format!("bornology[{i}]"))).collect::<Result<PointSet>>())
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let space = Arc::new(Space::new(doc.points.clone(), action, generators, bornology)?);
    let mut maps = BTreeMap::new();
    for (name, m) in &doc.maps {
        let codomain = match &m.codomain {
            None => space.clone(),
            Some(d) => load_space(d)?.space,
        };
        let assignment = m
            .assignment
            .iter()
            .enumerate()
            .map(|(i, r)| resolve(r, codomain.names(), &format!("maps.{name}.assignment[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        maps.insert(name.clone(), SpaceMap::new(space.clone(), codomain, assignment)?);
    }
    Ok(LoadedSpace { space, entourage_names, maps })
}

pub fn space_doc(space: &Space, entourage_names: Option<&[String]>) -> SpaceDoc {
    let group = space.group();
    let nontrivial = group.order() > 1;
    let action = if nontrivial {
        group.elements().map(|g| (group.name(g).to_string(), space.action().perm(g).iter().map(|&x| Ref::Index(x)).collect())).collect()
    } else {
        BTreeMap::new()
    };
    let entourages = space
        .generators()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let name = entourage_names.and_then(|n| n.get(i).cloned()).unwrap_or_else(|| format!("U{i}"));
            (name, e.pairs().map(|(a, b)| [Ref::Index(a), Ref::Index(b)]).collect())
        })
        .collect();
    SpaceDoc {
        format: FORMAT.into(),
        points: space.names().to_vec(),
        group: nontrivial.then(|| group_doc(group)),
        action,
        entourages,
        bornology: Some(space.bornology().generators().iter().map(|b| b.iter().map(|&x| Ref::Index(x)).collect()).collect()),
        maps: BTreeMap::new(),
    }
}

pub fn load_hom(doc: &HomDoc) -> Result<GroupHom> {
    check_format(&doc.format)?;
    let source = Arc::new(load_group(&doc.hom.source)?);
    let target = Arc::new(load_group(&doc.hom.target)?);
    let map = doc
        .hom
        .map
        .iter()
        .enumerate()
        .map(|(i, r)| resolve(r, target.names(), &format!("hom.map[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    GroupHom::new(source, target, map)
}

/// The controlled object of a document, unvalidated, and the subgroup if one is named.
pub fn load_object(doc: &CtrlDoc) -> Result<(LoadedSpace, CtrlObject, Option<Vec<usize>>)> {
    check_format(&doc.format)?;
    let loaded = load_space(&doc.space)?;
    let space = loaded.space.clone();
    let n = space.size();
    let dims = doc.object.dims.clone();
    if dims.len() != n {
        return parse_err(format!("object.dims: {} entries for {n} points", dims.len()));
    }
    let group = space.group().clone();
    let cocycle = group
        .elements()
        .map(|g| {
            let name = group.name(g);
            (0..n)
                .map(|x| {
                    let rows = dims[space.action().act(group.inv(g), x)];
                    let cols = dims[x];
                    match doc.object.cocycle.get(name) {
                        None => Ok(IntMatrix::identity(cols)),
                        Some(per_point) => {
                            let m = per_point.get(x).ok_or_else(|| CoarseError::Parse(format!("object.cocycle.{name}: no matrix for point {x}")))?;
                            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                                return parse_err(format!("object.cocycle.{name}[{x}]: expected {rows}x{cols}"));
                            }
                            Ok(IntMatrix::from_i64(m))
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let support = (0..n).filter(|&x| dims[x] > 0).collect();
    let object = CtrlObject { space: space.clone(), support, dims, cocycle };
    let subgroup = doc
        .subgroup
        .as_ref()
        .map(|refs| refs.iter().enumerate().map(|(i, r)| resolve(r, group.names(), &format!("subgroup[{i}]"))).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok((loaded, object, subgroup))
}

/// Comma-separated element names of `group`.
pub fn parse_elements(group: &FiniteGroup, list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| group.index_of(s).ok_or_else(|| CoarseError::Parse(format!("{s:?} is not an element of the group"))))
        .collect()
}

/// Comma-separated point names of `space`.
pub fn parse_points(space: &Space, list: &str) -> Result<PointSet> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| space.index_of(s).ok_or_else(|| CoarseError::Parse(format!("{s:?} is not a point of the space"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = r#"{
        "format": "coarsex/1",
        "points": ["a", "b"],
        "group": "Z2",
        "action": {"e": [0, 1], "t1": ["b", "a"]},
        "entourages": {"U": [["a", "b"]]},
        "bornology": [["a", "b"]]
    }"#;

    #[test]
    fn loads_names_and_indices() {
        let doc: SpaceDoc = serde_json::from_str(SWAP).unwrap();
        let loaded = load_space(&doc).unwrap();
        assert!(loaded.space.validate().passed());
        assert_eq!(loaded.space.coarse_max(), &Entourage::full(2));
        assert_eq!(loaded.entourage("U").unwrap().len(), 1);
    }

    #[test]
    fn round_trips_through_json() {
        let doc: SpaceDoc = serde_json::from_str(SWAP).unwrap();
        let space = load_space(&doc).unwrap().space;
        let again = serde_json::to_string(&space_doc(&space, Some(&["U".into()]))).unwrap();
        let back = load_space(&serde_json::from_str(&again).unwrap()).unwrap().space;
        assert_eq!(*back, *space);
    }

    #[test]
    fn reports_locations() {
        let bad = SWAP.replace(r#"["a", "b"]]"#, r#"["a", "z"]]"#);
        let err = load_space(&serde_json::from_str(&bad).unwrap()).unwrap_err();
        assert!(err.to_string().contains("entourages.U[0]"), "{err}");
        let wrong = SWAP.replace("coarsex/1", "coarsex/0");
        assert!(load_space(&serde_json::from_str(&wrong).unwrap()).is_err());
    }
}
