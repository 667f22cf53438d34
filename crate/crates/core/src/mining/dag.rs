use std::collections::BTreeMap;

use thiserror::Error;

use crate::prestige::AccountId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("node {0} is not in the DAG")]
    UnknownNode(AccountId),
    #[error("parent {0} is not in the DAG")]
    UnknownParent(AccountId),
    #[error("node {0} is already in the DAG")]
    DuplicateNode(AccountId),
}

/// Distribution forest: every node has at most one parent, and following
/// parents always ends at a root.
///
/// Nodes can only be attached under nodes that already exist, so cycles
/// cannot be built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningDag {
    parent: BTreeMap<AccountId, Option<AccountId>>,
}

impl MiningDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_root(&mut self, root: AccountId) -> Result<(), DagError> {
        if self.parent.contains_key(&root) {
            return Err(DagError::DuplicateNode(root));
        }
        self.parent.insert(root, None);
        Ok(())
    }

    pub fn attach_node(&mut self, parent: AccountId, child: AccountId) -> Result<(), DagError> {
        if !self.parent.contains_key(&parent) {
            return Err(DagError::UnknownParent(parent));
        }
        if self.parent.contains_key(&child) {
            return Err(DagError::DuplicateNode(child));
        }
        self.parent.insert(child, Some(parent));
        Ok(())
    }

    /// Value-returning form of [`attach_node`](Self::attach_node).
    pub fn with_node(mut self, parent: AccountId, child: AccountId) -> Result<Self, DagError> {
        self.attach_node(parent, child)?;
        Ok(self)
    }

    pub fn contains(&self, node: AccountId) -> bool {
        self.parent.contains_key(&node)
    }

    pub fn parent(&self, node: AccountId) -> Result<Option<AccountId>, DagError> {
        self.parent.get(&node).copied().ok_or(DagError::UnknownNode(node))
    }

    pub fn is_root(&self, node: AccountId) -> bool {
        matches!(self.parent.get(&node), Some(None))
    }

    /// Ancestors of `node`, nearest first, ending at its root. Empty for a
    /// root.
    pub fn ancestors(&self, node: AccountId) -> Result<Vec<AccountId>, DagError> {
        let mut out = Vec::new();
        let mut cur = self.parent(node)?;
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[&p];
        }
        Ok(out)
    }

    /// Number of edges between `node` and its root.
    pub fn depth(&self, node: AccountId) -> Result<usize, DagError> {
        let mut depth = 0;
        let mut cur = self.parent(node)?;
        while let Some(p) = cur {
            depth += 1;
            cur = self.parent[&p];
        }
        Ok(depth)
    }

    pub fn root_of(&self, node: AccountId) -> Result<AccountId, DagError> {
        Ok(self.ancestors(node)?.last().copied().unwrap_or(node))
    }

    pub fn roots(&self) -> impl Iterator<Item = AccountId> + '_ {
        self.parent.iter().filter(|(_, p)| p.is_none()).map(|(n, _)| *n)
    }

    /// `(child, parent)` for every non-root node, ordered by child id.
    pub fn edges(&self) -> impl Iterator<Item = (AccountId, AccountId)> + '_ {
        self.parent.iter().filter_map(|(n, p)| p.map(|p| (*n, p)))
    }

    pub fn nodes(&self) -> impl Iterator<Item = AccountId> + '_ {
        self.parent.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u32) -> AccountId {
        AccountId(n)
    }

    #[test]
    fn attach_examples() {
        let mut dag = MiningDag::new();
        dag.add_root(id(0)).unwrap();
        let dag = dag.with_node(id(0), id(1)).unwrap().with_node(id(1), id(2)).unwrap();
        assert_eq!(dag.ancestors(id(2)).unwrap(), vec![id(1), id(0)]);
        assert_eq!(dag.depth(id(2)).unwrap(), 2);
        assert_eq!(dag.root_of(id(2)).unwrap(), id(0));
        assert_eq!(dag.root_of(id(0)).unwrap(), id(0));

        let mut d = dag.clone();
        assert_eq!(d.attach_node(id(0), id(1)), Err(DagError::DuplicateNode(id(1))));
        assert_eq!(d.attach_node(id(9), id(5)), Err(DagError::UnknownParent(id(9))));
        assert_eq!(d.add_root(id(2)), Err(DagError::DuplicateNode(id(2))));
        assert_eq!(d, dag);
    }

    #[test]
    fn forest_queries() {
        let mut dag = MiningDag::new();
        dag.add_root(id(0)).unwrap();
        dag.add_root(id(10)).unwrap();
        dag.attach_node(id(10), id(11)).unwrap();
        assert_eq!(dag.roots().collect::<Vec<_>>(), vec![id(0), id(10)]);
        assert_eq!(dag.edges().collect::<Vec<_>>(), vec![(id(11), id(10))]);
        assert!(dag.is_root(id(10)) && !dag.is_root(id(11)) && !dag.is_root(id(3)));
        assert_eq!(dag.depth(id(3)), Err(DagError::UnknownNode(id(3))));
        assert_eq!(dag.len(), 3);
    }
}
