use thiserror::Error;

use crate::ontology::{ClassExpression, Construct};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwapError {
    #[error("path {0:?} does not address a node")]
    PathOutOfRange(Vec<usize>),
    #[error("{construct} at {path:?} has no dual construct")]
    NotSwappable { path: Vec<usize>, construct: Construct },
}

/// Replaces the constructor of the node at `path` with its dual
/// (some/only, and/or). Everything else in the tree is left untouched.
pub fn swap_construct(
    expr: &ClassExpression,
    path: &[usize],
) -> Result<ClassExpression, SwapError> {
    let mut out = expr.clone();
    let node = out
        .node_at_mut(path)
        .ok_or_else(|| SwapError::PathOutOfRange(path.to_vec()))?;
    let taken = std::mem::replace(node, ClassExpression::Opaque(String::new()));
    *node = match taken {
        ClassExpression::SomeValuesFrom { property, filler } => {
            ClassExpression::AllValuesFrom { property, filler }
        }
        ClassExpression::AllValuesFrom { property, filler } => {
            ClassExpression::SomeValuesFrom { property, filler }
        }
        ClassExpression::IntersectionOf(ops) => ClassExpression::UnionOf(ops),
        ClassExpression::UnionOf(ops) => ClassExpression::IntersectionOf(ops),
        other => {
            return Err(SwapError::NotSwappable {
                path: path.to_vec(),
                construct: other.construct(),
            })
        }
    };
    Ok(out)
}
