use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{ActionGraphGame, StrategyGraph};
use crate::StrategyId;

/// The strategy tree hung from a degree-one root.
///
/// Children are ordered by id: `right` is the lower-id child, `left` the
/// higher one; a node with one child has it on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: StrategyId,
    parent: Vec<Option<StrategyId>>,
    right: Vec<Option<StrategyId>>,
    left: Vec<Option<StrategyId>>,
    post_order: Vec<StrategyId>,
}

impl RootedTree {
    pub fn root(&self) -> StrategyId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, s: StrategyId) -> Option<StrategyId> {
        self.parent[s]
    }

    pub fn right(&self, s: StrategyId) -> Option<StrategyId> {
        self.right[s]
    }

    pub fn left(&self, s: StrategyId) -> Option<StrategyId> {
        self.left[s]
    }

    pub fn children(&self, s: StrategyId) -> impl Iterator<Item = StrategyId> {
        self.right[s].into_iter().chain(self.left[s])
    }

    /// Every node after all of its descendants.
    pub fn post_order(&self) -> &[StrategyId] {
        &self.post_order
    }
}

/// Roots the strategy tree at its lowest-id leaf (a single node is its own
/// root). Self-loops are ignored for the shape checks.
pub fn choose_root(graph: &StrategyGraph) -> Result<RootedTree> {
    let count = graph.node_count();
    if count == 0 {
        return Err(Error::NotATree("the strategy graph is empty".into()));
    }
    if !graph.is_forest() {
        return Err(Error::NotATree("the strategy graph has a cycle".into()));
    }
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::NotATree(format!("the strategy graph has {components} components")));
    }
    let degree = graph.max_degree();
    if degree > 3 {
        return Err(Error::DegreeTooLarge { degree });
    }
    let adj = graph.undirected_adjacency();
    let root = if count == 1 { 0 } else { (0..count).find(|&s| adj[s].len() == 1).expect("a tree has a leaf") };

    let mut parent = vec![None; count];
    let mut right = vec![None; count];
    let mut left = vec![None; count];
    let mut pre = Vec::with_capacity(count);
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        pre.push(x);
        let kids: Vec<StrategyId> = adj[x].iter().copied().filter(|&y| Some(y) != parent[x]).collect();
        for &y in &kids {
            parent[y] = Some(x);
        }
        right[x] = kids.first().copied();
        left[x] = kids.get(1).copied();
        stack.extend(kids);
    }
    let post_order = pre.into_iter().rev().collect();
    Ok(RootedTree { root, parent, right, left, post_order })
}

/// The degree bound `d` of the step-size formula: the larger of the
/// undirected degree and the neighborhood size, at least one.
pub fn degree_bound(game: &ActionGraphGame) -> usize {
    let g = game.graph();
    let nu = (0..g.node_count()).map(|s| g.neighbors(s).len()).max().unwrap_or(0);
    g.max_degree().max(nu).max(1)
}

/// Which player types live where on the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRegions {
    /// `own[s]`: types allowed to play `s`, ascending.
    pub own: Vec<Vec<usize>>,
    /// `region[s]`: types whose connected closure contains `s`, ascending.
    pub region: Vec<Vec<usize>>,
    /// Connected closure of each type's strategy set, ascending.
    pub closures: Vec<Vec<StrategyId>>,
    /// Largest number of closures meeting at one node.
    pub overlap: usize,
}

impl TypeRegions {
    /// True when the type's strategy set is itself connected.
    pub fn is_connected(&self, game: &ActionGraphGame, j: usize) -> bool {
        self.closures[j].len() == game.types()[j].strategies.len()
    }
}

/// Smallest connected subtree containing each type's strategies.
pub fn type_regions(game: &ActionGraphGame, tree: &RootedTree) -> TypeRegions {
    let count = tree.len();
    let mut own = vec![Vec::new(); count];
    let mut region = vec![Vec::new(); count];
    let mut closures = Vec::with_capacity(game.types().len());
    for (j, t) in game.types().iter().enumerate() {
        let mut mark = vec![false; count];
        for &s in &t.strategies {
            if s < count {
                mark[s] = true;
                own[s].push(j);
            }
        }
        let total = mark.iter().filter(|&&m| m).count();
        let mut below = vec![0usize; count];
        for &x in tree.post_order() {
            below[x] = usize::from(mark[x]) + tree.children(x).map(|c| below[c]).sum::<usize>();
        }
        let mut closure = Vec::new();
        for x in 0..count {
            let branches = tree.children(x).filter(|&c| below[c] > 0).count();
            let inside = mark[x] || branches >= 2 || (below[x] > 0 && below[x] < total);
            if inside && below[x] > 0 {
                closure.push(x);
                region[x].push(j);
            }
        }
        closures.push(closure);
    }
    let overlap = region.iter().map(Vec::len).max().unwrap_or(0);
    TypeRegions { own, region, closures, overlap }
}
