use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::value::{Null, Value};

/// A relation symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation(Arc<str>);

impl Relation {
    pub fn new(name: impl AsRef<str>) -> Self {
        Relation(name.as_ref().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Relation {
    fn from(s: &str) -> Self {
        Relation::new(s)
    }
}

/// Relation symbols with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    arities: BTreeMap<Relation, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, arity: usize) -> Self {
        self.arities.insert(Relation::new(name), arity);
        self
    }

    pub fn insert(&mut self, rel: Relation, arity: usize) -> Option<usize> {
        self.arities.insert(rel, arity)
    }

    pub fn arity(&self, rel: &Relation) -> Option<usize> {
        self.arities.get(rel).copied()
    }

    pub fn contains(&self, rel: &Relation) -> bool {
        self.arities.contains_key(rel)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Relation, usize)> {
        self.arities.iter().map(|(r, a)| (r, *a))
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn check(&self, rel: &Relation, found: usize) -> Result<()> {
        match self.arity(rel) {
            None => Err(Error::UnknownRelation(rel.to_string())),
            Some(expected) if expected != found => Err(Error::Arity { relation: rel.to_string(), expected, found }),
            Some(_) => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub relation: Relation,
    pub args: Vec<Value>,
}

impl Fact {
    pub fn new(relation: impl Into<Relation>, args: Vec<Value>) -> Self {
        Fact { relation: relation.into(), args }
    }

    pub fn nulls(&self) -> impl Iterator<Item = &Value> {
        self.args.iter().filter(|v| v.is_null())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Value::is_const)
    }

    pub fn map_values(&self, mut f: impl FnMut(&Value) -> Value) -> Fact {
        Fact { relation: self.relation.clone(), args: self.args.iter().map(&mut f).collect() }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A finite set of facts over a schema. Facts are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    schema: Schema,
    facts: BTreeSet<Fact>,
}

impl Instance {
    pub fn new(schema: Schema) -> Self {
        Instance { schema, facts: BTreeSet::new() }
    }

    pub fn from_facts(schema: Schema, facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut inst = Instance::new(schema);
        for f in facts {
            inst.insert(f)?;
        }
        Ok(inst)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Inserts a fact after checking it against the schema. Returns whether it was new.
    pub fn insert(&mut self, fact: Fact) -> Result<bool> {
        self.schema.check(&fact.relation, fact.args.len())?;
        Ok(self.facts.insert(fact))
    }

    /// Insert without schema validation, for facts built from validated mappings.
    pub(crate) fn insert_unchecked(&mut self, fact: Fact) -> bool {
        debug_assert_eq!(self.schema.arity(&fact.relation), Some(fact.args.len()));
        self.facts.insert(fact)
    }

    pub fn remove(&mut self, fact: &Fact) -> bool {
        self.facts.remove(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> + Clone {
        self.facts.iter()
    }

    pub fn facts_of<'a>(&'a self, rel: &'a Relation) -> impl Iterator<Item = &'a Fact> + 'a {
        let start = Fact { relation: rel.clone(), args: Vec::new() };
        self.facts.range((Bound::Included(start), Bound::Unbounded)).take_while(move |f| &f.relation == rel)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// dom(I): every value occurring in some fact.
    pub fn domain(&self) -> BTreeSet<Value> {
        self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect()
    }

    pub fn nulls(&self) -> BTreeSet<Value> {
        self.facts.iter().flat_map(|f| f.nulls().cloned()).collect()
    }

    pub fn has_nulls(&self) -> bool {
        self.facts.iter().any(|f| !f.is_ground())
    }

    pub fn is_subinstance_of(&self, other: &Instance) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn union_with(&mut self, other: &Instance) {
        for f in other.facts() {
            self.facts.insert(f.clone());
        }
    }

    /// Image of the instance under a value map; unmapped values are kept.
    pub fn map_values(&self, f: impl Fn(&Value) -> Value) -> Instance {
        Instance { schema: self.schema.clone(), facts: self.facts.iter().map(|fact| fact.map_values(&f)).collect() }
    }

    pub(crate) fn with_facts(&self, facts: impl IntoIterator<Item = Fact>) -> Instance {
        Instance { schema: self.schema.clone(), facts: facts.into_iter().collect() }
    }

    /// Connected components of the fact graph, each as a sub-instance.
    /// Ground facts are singleton components. Components are returned in
    /// order of their least fact.
    pub fn blocks(&self) -> Vec<Instance> {
        let facts: Vec<&Fact> = self.facts.iter().collect();
        let mut parent: Vec<usize> = (0..facts.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut owner: HashMap<&Value, usize> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            for n in f.nulls() {
                match owner.get(n) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(n, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<Fact>> = BTreeMap::new();
        for (i, f) in facts.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push((*f).clone());
        }
        groups.into_values().map(|fs| self.with_facts(fs)).collect()
    }

    /// Edges of the fact graph as index pairs into `facts()` order.
    pub fn fact_graph_edges(&self) -> Vec<(usize, usize)> {
        let facts: Vec<&Fact> = self.facts.iter().collect();
        let mut edges = Vec::new();
        for i in 0..facts.len() {
            for j in i + 1..facts.len() {
                if facts[i].nulls().any(|n| facts[j].args.contains(n)) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    pub fn is_connected(&self) -> bool {
        self.blocks().len() <= 1
    }

    /// Renames nulls to `?N1, ?N2, ...` in order of first occurrence.
    pub fn normalize_nulls(&self) -> Instance {
        let mut names: HashMap<Value, Value> = HashMap::new();
        for f in &self.facts {
            for v in f.nulls() {
                let next = names.len() as u64 + 1;
                names.entry(v.clone()).or_insert(Value::Null(Null::Fresh(next)));
            }
        }
        self.map_values(|v| names.get(v).cloned().unwrap_or_else(|| v.clone()))
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}
