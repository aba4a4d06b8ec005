use std::fmt;

use serde::{Deserialize, Serialize};

use super::iri::Iri;

/// Class expressions over the OWL subset handled by the toolkit.
///
/// `IntersectionOf` and `UnionOf` always hold at least two operands; the
/// parser rejects shorter lists. Constructs outside the subset survive as
/// `Opaque`, holding their token-normalised source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassExpression {
    Named(Iri),
    SomeValuesFrom {
        property: Iri,
        filler: Box<ClassExpression>,
    },
    AllValuesFrom {
        property: Iri,
        filler: Box<ClassExpression>,
    },
    IntersectionOf(Vec<ClassExpression>),
    UnionOf(Vec<ClassExpression>),
    ComplementOf(Box<ClassExpression>),
    HasValue {
        property: Iri,
        individual: Iri,
    },
    Opaque(String),
}

/// Constructor tag of a single expression node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construct {
    Named,
    SomeValuesFrom,
    AllValuesFrom,
    IntersectionOf,
    UnionOf,
    ComplementOf,
    HasValue,
    Opaque,
}

impl Construct {
    /// The partner a Type 3 swap exchanges this construct with, if any.
    pub fn dual(self) -> Option<Construct> {
        match self {
            Construct::SomeValuesFrom => Some(Construct::AllValuesFrom),
            Construct::AllValuesFrom => Some(Construct::SomeValuesFrom),
            Construct::IntersectionOf => Some(Construct::UnionOf),
            Construct::UnionOf => Some(Construct::IntersectionOf),
            _ => None,
        }
    }

    pub fn is_swappable(self) -> bool {
        self.dual().is_some()
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Construct::Named => "Named",
            Construct::SomeValuesFrom => "SomeValuesFrom",
            Construct::AllValuesFrom => "AllValuesFrom",
            Construct::IntersectionOf => "IntersectionOf",
            Construct::UnionOf => "UnionOf",
            Construct::ComplementOf => "ComplementOf",
            Construct::HasValue => "HasValue",
            Construct::Opaque => "Opaque",
        };
        f.write_str(s)
    }
}

/// Position of a node inside an expression tree: the child index taken at
/// each level, starting from the root. Restrictions and complements have a
/// single child at index 0.
pub type ExprPath = Vec<usize>;

impl ClassExpression {
    pub fn named(iri: Iri) -> Self {
        ClassExpression::Named(iri)
    }

    pub fn construct(&self) -> Construct {
        match self {
            ClassExpression::Named(_) => Construct::Named,
            ClassExpression::SomeValuesFrom { .. } => Construct::SomeValuesFrom,
            ClassExpression::AllValuesFrom { .. } => Construct::AllValuesFrom,
            ClassExpression::IntersectionOf(_) => Construct::IntersectionOf,
            ClassExpression::UnionOf(_) => Construct::UnionOf,
            ClassExpression::ComplementOf(_) => Construct::ComplementOf,
            ClassExpression::HasValue { .. } => Construct::HasValue,
            ClassExpression::Opaque(_) => Construct::Opaque,
        }
    }

    pub fn children(&self) -> Vec<&ClassExpression> {
        match self {
            ClassExpression::SomeValuesFrom { filler, .. }
            | ClassExpression::AllValuesFrom { filler, .. } => vec![filler.as_ref()],
            ClassExpression::ComplementOf(inner) => vec![inner.as_ref()],
            ClassExpression::IntersectionOf(ops) | ClassExpression::UnionOf(ops) => {
                ops.iter().collect()
            }
            ClassExpression::Named(_)
            | ClassExpression::HasValue { .. }
            | ClassExpression::Opaque(_) => Vec::new(),
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut ClassExpression> {
        match self {
            ClassExpression::SomeValuesFrom { filler, .. }
            | ClassExpression::AllValuesFrom { filler, .. }
                if index == 0 =>
            {
                Some(filler.as_mut())
            }
            ClassExpression::ComplementOf(inner) if index == 0 => Some(inner.as_mut()),
            ClassExpression::IntersectionOf(ops) | ClassExpression::UnionOf(ops) => {
                ops.get_mut(index)
            }
            _ => None,
        }
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&ClassExpression> {
        let mut node = self;
        for &i in path {
            node = *node.children().get(i)?;
        }
        Some(node)
    }

    pub fn node_at_mut(&mut self, path: &[usize]) -> Option<&mut ClassExpression> {
        let mut node = self;
        for &i in path {
            node = node.child_mut(i)?;
        }
        Some(node)
    }

    /// Pre-order walk yielding every node with its path.
    pub fn walk(&self) -> Vec<(ExprPath, &ClassExpression)> {
        let mut out = Vec::new();
        let mut stack: Vec<(ExprPath, &ClassExpression)> = vec![(Vec::new(), self)];
        while let Some((path, node)) = stack.pop() {
            let children = node.children();
            for (i, child) in children.into_iter().enumerate().rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((p, child));
            }
            out.push((path, node));
        }
        out
    }

    /// Paths to the nodes a Type 3 swap may rewrite, in pre-order.
    pub fn swappable_paths(&self) -> Vec<ExprPath> {
        self.walk()
            .into_iter()
            .filter(|(_, n)| n.construct().is_swappable())
            .map(|(p, _)| p)
            .collect()
    }

    pub fn has_swappable(&self) -> bool {
        self.construct().is_swappable() || self.children().iter().any(|c| c.has_swappable())
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}
