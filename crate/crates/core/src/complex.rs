//! Graph-based combinatorial complexes of rank at most 2.
//!
//! A complex holds a fixed node set `0..num_nodes`, a list of 1-cells (node
//! pairs) and a list of 2-cells (node subsets of size at least 2 that are not
//! themselves 1-cells). Cells are stored as strictly increasing index lists
//! and, within a rank, sorted lexicographically. This canonical order is what
//! the co-incidence rows, serialization and the encoder all index by.
//!
//! All indices are 0-based. Worked examples in the literature usually count
//! nodes from 1; translate before comparing.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::collections::BTreeSet;
use std::fmt;

pub type Cell = Vec<usize>;

/// Simple undirected graph on a fixed node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Build a graph; endpoints are normalized to `u < v` and edges sorted.
    /// Self-loops, out-of-range endpoints and duplicates are errors.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at node {u}")));
            }
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Graph {
            num_nodes,
            edges: set.into_iter().collect(),
        })
    }

    /// Like [`Graph::new`] but silently drops self-loops and duplicates.
    pub fn new_lenient(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        Ok(Graph {
            num_nodes,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Graph {
            num_nodes,
            edges: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Mat {
        let mut a = Mat::zeros(self.num_nodes, self.num_nodes);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        Graph::new(self.num_nodes, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
            .expect("permutation of a valid graph is valid")
    }
}

/// Sparse binary matrix stored as sorted column-index lists per row.
///
/// As a co-incidence matrix its rows are cells and its columns are nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseBinary {
    pub rows: Vec<Vec<usize>>,
    pub num_cols: usize,
}

pub type CoIncidenceMatrix = SparseBinary;

impl SparseBinary {
    pub fn new(rows: Vec<Vec<usize>>, num_cols: usize) -> Self {
        SparseBinary { rows, num_cols }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.rows.len(), self.num_cols);
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Read a 0/1 dense matrix (entries > 0.5 count as ones).
    pub fn from_dense(m: &Mat) -> Self {
        let rows = (0..m.rows)
            .map(|i| (0..m.cols).filter(|&j| m[(i, j)] > 0.5).collect())
            .collect();
        SparseBinary {
            rows,
            num_cols: m.cols,
        }
    }

    pub fn transpose(&self) -> SparseBinary {
        let mut cols = vec![Vec::new(); self.num_cols];
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                cols[j].push(i);
            }
        }
        SparseBinary {
            rows: cols,
            num_cols: self.rows.len(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows.len() == self.num_cols
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| r.iter().all(|&j| self.get(j, i)))
    }
}

/// A broken invariant found by [`CombinatorialComplex::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NodeOutOfRange { rank: u8, cell: usize, node: usize },
    /// A node repeated inside one cell, e.g. the self-loop `{0,0}`.
    DegenerateCell { rank: u8, cell: usize },
    EmptyCell { rank: u8, cell: usize },
    EdgeNotPair { cell: usize, size: usize },
    TwoCellTooSmall { cell: usize, size: usize },
    DuplicateCell { rank: u8, cell: usize },
    /// A 2-cell equal as a set to a 1-cell: the rank function would not be
    /// order preserving.
    RankOrderBroken { cell2: usize, cell1: usize },
    NotCanonical { rank: u8 },
    FeatureShape { expected_rows: usize, rows: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeOutOfRange { rank, cell, node } => {
                write!(f, "rank-{rank} cell {cell}: node {node} out of range")
            }
            Violation::DegenerateCell { rank, cell } => {
                write!(f, "rank-{rank} cell {cell}: self-loop / duplicate node in cell")
            }
            Violation::EmptyCell { rank, cell } => write!(f, "rank-{rank} cell {cell}: empty"),
            Violation::EdgeNotPair { cell, size } => {
                write!(f, "1-cell {cell} has {size} nodes, expected 2")
            }
            Violation::TwoCellTooSmall { cell, size } => {
                write!(f, "2-cell {cell} has {size} nodes, expected at least 2")
            }
            Violation::DuplicateCell { rank, cell } => {
                write!(f, "rank-{rank} cell {cell} duplicates an earlier cell")
            }
            Violation::RankOrderBroken { cell2, cell1 } => {
                write!(f, "rank order broken: 2-cell {cell2} equals 1-cell {cell1}")
            }
            Violation::NotCanonical { rank } => {
                write!(f, "rank-{rank} cells are not in canonical order")
            }
            Violation::FeatureShape { expected_rows, rows } => {
                write!(f, "node features have {rows} rows, expected {expected_rows}")
            }
        }
    }
}

/// Graph-based combinatorial complex with cells of rank 0, 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialComplex {
    num_nodes: usize,
    cells1: Vec<Cell>,
    cells2: Vec<Cell>,
    features: Option<Mat>,
}

fn normalize(cells: Vec<Cell>) -> Vec<Cell> {
    let mut cells: Vec<Cell> = cells
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    cells.sort();
    cells
}

impl CombinatorialComplex {
    /// Canonicalize (sort nodes inside cells, sort cells) and validate.
    pub fn new(num_nodes: usize, cells1: Vec<Cell>, cells2: Vec<Cell>) -> Result<Self> {
        let cc = CombinatorialComplex {
            num_nodes,
            cells1: normalize(cells1),
            cells2: normalize(cells2),
            features: None,
        };
        cc.check()?;
        Ok(cc)
    }

    /// Build from `(rank, cell)` pairs. Rank 0 entries must be singletons and
    /// are implied by the node set; ranks above 2 are outside this model.
    pub fn from_ranked_cells(num_nodes: usize, cells: &[(usize, Cell)]) -> Result<Self> {
        let mut c1 = Vec::new();
        let mut c2 = Vec::new();
        for (rank, cell) in cells {
            match rank {
                0 if cell.len() == 1 && cell[0] < num_nodes => {}
                0 => {
                    return Err(Error::InvalidComplex(format!(
                        "rank-0 cell {cell:?} is not a single node of the node set"
                    )))
                }
                1 => c1.push(cell.clone()),
                2 => c2.push(cell.clone()),
                r => {
                    return Err(Error::InvalidComplex(format!(
                        "cell {cell:?} has rank {r}; only ranks 0 to 2 are representable"
                    )))
                }
            }
        }
        CombinatorialComplex::new(num_nodes, c1, c2)
    }

    /// Store cells as given, without canonicalizing or validating. Use
    /// [`CombinatorialComplex::validate`] to inspect the result.
    pub fn unchecked(num_nodes: usize, cells1: Vec<Cell>, cells2: Vec<Cell>) -> Self {
        CombinatorialComplex {
            num_nodes,
            cells1,
            cells2,
            features: None,
        }
    }

    pub fn with_features(mut self, features: Option<Mat>) -> Result<Self> {
        if let Some(f) = &features {
            if f.rows != self.num_nodes {
                return Err(Error::InvalidComplex(
                    Violation::FeatureShape {
                        expected_rows: self.num_nodes,
                        rows: f.rows,
                    }
                    .to_string(),
                ));
            }
        }
        self.features = features;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::InvalidComplex(msgs.join("; ")))
        }
    }

    /// Report every broken invariant. An empty list means the complex is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (rank, cells) in [(1u8, &self.cells1), (2u8, &self.cells2)] {
            let mut seen = BTreeSet::new();
            for (i, c) in cells.iter().enumerate() {
                if c.is_empty() {
                    out.push(Violation::EmptyCell { rank, cell: i });
                    continue;
                }
                for &n in c {
                    if n >= self.num_nodes {
                        out.push(Violation::NodeOutOfRange { rank, cell: i, node: n });
                    }
                }
                let mut s = c.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != c.len() {
                    out.push(Violation::DegenerateCell { rank, cell: i });
                }
                if rank == 1 && s.len() != 2 && s.len() == c.len() {
                    out.push(Violation::EdgeNotPair { cell: i, size: s.len() });
                }
                if rank == 2 && s.len() < 2 {
                    out.push(Violation::TwoCellTooSmall { cell: i, size: s.len() });
                }
                if !seen.insert(s) {
                    out.push(Violation::DuplicateCell { rank, cell: i });
                }
            }
            let sorted = cells.iter().all(|c| c.windows(2).all(|w| w[0] < w[1]))
                && cells.windows(2).all(|w| w[0] < w[1]);
            if !sorted && !out.iter().any(|v| matches!(v, Violation::DuplicateCell { rank: r, .. } if *r == rank)) {
                out.push(Violation::NotCanonical { rank });
            }
        }
        for (j, c2) in self.cells2.iter().enumerate() {
            let mut s2 = c2.clone();
            s2.sort_unstable();
            for (i, c1) in self.cells1.iter().enumerate() {
                let mut s1 = c1.clone();
                s1.sort_unstable();
                if s1 == s2 {
                    out.push(Violation::RankOrderBroken { cell2: j, cell1: i });
                }
            }
        }
        if let Some(f) = &self.features {
            if f.rows != self.num_nodes {
                out.push(Violation::FeatureShape {
                    expected_rows: self.num_nodes,
                    rows: f.rows,
                });
            }
        }
        out
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn cells1(&self) -> &[Cell] {
        &self.cells1
    }

    pub fn cells2(&self) -> &[Cell] {
        &self.cells2
    }

    pub fn features(&self) -> Option<&Mat> {
        self.features.as_ref()
    }

    pub fn num_cells(&self, rank: usize) -> usize {
        match rank {
            0 => self.num_nodes,
            1 => self.cells1.len(),
            2 => self.cells2.len(),
            _ => 0,
        }
    }

    /// Co-incidence matrix `coB_{0,rank}`: one row per cell, one column per node.
    pub fn co_incidence(&self, rank: usize) -> Result<CoIncidenceMatrix> {
        let cells = match rank {
            1 => &self.cells1,
            2 => &self.cells2,
            r => return Err(Error::InvalidArgument(format!("co_incidence rank {r} not in {{1,2}}"))),
        };
        Ok(SparseBinary::new(cells.clone(), self.num_nodes))
    }

    /// Rebuild a complex from co-incidence rows. Zero rows are dropped,
    /// repeated rows collapse to one cell, and a 2-row equal to a 1-row is
    /// dropped (the 1-cell wins). Singleton rows and rank-1 rows with more
    /// than two nodes are errors.
    pub fn from_co_incidence(rows1: &CoIncidenceMatrix, rows2: &CoIncidenceMatrix, num_nodes: usize) -> Result<Self> {
        let collect = |m: &CoIncidenceMatrix, rank: usize| -> Result<BTreeSet<Cell>> {
            let mut set = BTreeSet::new();
            for (i, r) in m.rows.iter().enumerate() {
                let mut c = r.clone();
                c.sort_unstable();
                c.dedup();
                if let Some(&bad) = c.iter().find(|&&n| n >= num_nodes) {
                    return Err(Error::InvalidArgument(format!(
                        "rank-{rank} row {i}: column {bad} out of range for {num_nodes} nodes"
                    )));
                }
                match c.len() {
                    0 => continue,
                    1 => {
                        return Err(Error::InvalidComplex(format!(
                            "rank-{rank} row {i} has a single nonzero entry"
                        )))
                    }
                    n if rank == 1 && n > 2 => {
                        return Err(Error::InvalidComplex(format!(
                            "rank-1 row {i} has {n} nonzero entries, expected 2"
                        )))
                    }
                    _ => {}
                }
                set.insert(c);
            }
            Ok(set)
        };
        let c1 = collect(rows1, 1)?;
        let c2: BTreeSet<Cell> = collect(rows2, 2)?.into_iter().filter(|c| !c1.contains(c)).collect();
        Ok(CombinatorialComplex {
            num_nodes,
            cells1: c1.into_iter().collect(),
            cells2: c2.into_iter().collect(),
            features: None,
        })
    }

    /// Incidence matrix `B_{r,k}` for `(r,k)` in `{(0,1), (0,2), (1,2)}`:
    /// entry `(i,j)` is set iff rank-r cell i is a strict subset of rank-k
    /// cell j.
    pub fn incidence(&self, r: usize, k: usize) -> Result<SparseBinary> {
        match (r, k) {
            (0, 1) | (0, 2) => Ok(self.co_incidence(k)?.transpose()),
            (1, 2) => {
                let rows = self
                    .cells1
                    .iter()
                    .map(|e| {
                        self.cells2
                            .iter()
                            .enumerate()
                            .filter(|(_, z)| is_strict_subset(e, z))
                            .map(|(j, _)| j)
                            .collect()
                    })
                    .collect();
                Ok(SparseBinary::new(rows, self.cells2.len()))
            }
            _ => Err(Error::InvalidArgument(format!("incidence ({r},{k}) not supported"))),
        }
    }

    /// Adjacency among rank-r cells through shared rank-(r+1) cells, r in {0,1}.
    ///
    /// The diagonal entry of a cell is set iff it lies in at least one
    /// higher cell, because a cell is then trivially a neighbour of itself.
    pub fn adjacency(&self, r: usize) -> Result<SparseBinary> {
        let b = match r {
            0 => self.incidence(0, 1)?,
            1 => self.incidence(1, 2)?,
            _ => return Err(Error::InvalidArgument(format!("adjacency rank {r} not in {{0,1}}"))),
        };
        Ok(through(&b))
    }

    /// Coadjacency among rank-r cells through shared rank-(r-1) cells, r in
    /// {1,2}. For r = 2 the shared cells are 1-cells, which is the 2-cell
    /// neighbourhood the encoder uses.
    pub fn coadjacency(&self, r: usize) -> Result<SparseBinary> {
        let b = match r {
            1 => self.incidence(0, 1)?,
            2 => self.incidence(1, 2)?,
            _ => return Err(Error::InvalidArgument(format!("coadjacency rank {r} not in {{1,2}}"))),
        };
        Ok(through(&b.transpose()))
    }

    /// The 1-skeleton.
    pub fn skeleton(&self) -> Graph {
        Graph::new(self.num_nodes, self.cells1.iter().map(|c| (c[0], c[1]))).expect("valid complex has a valid skeleton")
    }

    /// Relabel nodes (node i becomes perm[i]) and re-canonicalize.
    pub fn permuted_nodes(&self, perm: &[usize]) -> Result<Self> {
        let map = |cs: &[Cell]| cs.iter().map(|c| c.iter().map(|&n| perm[n]).collect()).collect();
        let cc = CombinatorialComplex::new(self.num_nodes, map(&self.cells1), map(&self.cells2))?;
        let feats = self.features.as_ref().map(|f| {
            let mut g = Mat::zeros(f.rows, f.cols);
            for i in 0..f.rows {
                g.row_mut(perm[i]).copy_from_slice(f.row(i));
            }
            g
        });
        cc.with_features(feats)
    }
}

/// Strict subset test on sorted index lists.
pub fn is_strict_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.binary_search(x).is_ok())
}

/// `M M^T` as a boolean pattern: rows i and j are linked iff they share a column.
fn through(b: &SparseBinary) -> SparseBinary {
    let bt = b.transpose();
    let rows = b
        .rows
        .iter()
        .map(|r| {
            let mut s = BTreeSet::new();
            for &z in r {
                s.extend(bt.rows[z].iter().copied());
            }
            s.into_iter().collect()
        })
        .collect();
    SparseBinary::new(rows, b.rows.len())
}

/// Ordered sequence of graphs on a shared node set.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSeries {
    pub num_nodes: usize,
    pub graphs: Vec<Graph>,
    pub features: Option<Vec<Mat>>,
}

impl GraphSeries {
    pub fn new(num_nodes: usize, graphs: Vec<Graph>, features: Option<Vec<Mat>>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::InvalidArgument("series must have at least one timestep".into()));
        }
        if let Some(g) = graphs.iter().find(|g| g.num_nodes() != num_nodes) {
            return Err(Error::InvalidArgument(format!(
                "timestep has {} nodes, series has {num_nodes}",
                g.num_nodes()
            )));
        }
        if let Some(f) = &features {
            if f.len() != graphs.len() || f.iter().any(|m| m.rows != num_nodes) {
                return Err(Error::InvalidArgument("feature matrices do not match series shape".into()));
            }
        }
        Ok(GraphSeries {
            num_nodes,
            graphs,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

/// Ordered sequence of complexes on a shared node set. Node features, when
/// present, live on each complex.
#[derive(Debug, Clone, PartialEq)]
pub struct CcSeries {
    pub num_nodes: usize,
    pub ccs: Vec<CombinatorialComplex>,
}

impl CcSeries {
    pub fn new(num_nodes: usize, ccs: Vec<CombinatorialComplex>) -> Result<Self> {
        if ccs.is_empty() {
            return Err(Error::InvalidArgument("series must have at least one timestep".into()));
        }
        if let Some(c) = ccs.iter().find(|c| c.num_nodes() != num_nodes) {
            return Err(Error::InvalidArgument(format!(
                "timestep has {} nodes, series has {num_nodes}",
                c.num_nodes()
            )));
        }
        Ok(CcSeries { num_nodes, ccs })
    }

    pub fn len(&self) -> usize {
        self.ccs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ccs.is_empty()
    }

    pub fn skeletons(&self) -> GraphSeries {
        GraphSeries {
            num_nodes: self.num_nodes,
            graphs: self.ccs.iter().map(|c| c.skeleton()).collect(),
            features: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> CombinatorialComplex {
        CombinatorialComplex::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]], vec![]).unwrap()
    }

    #[test]
    fn triangle_is_valid() {
        assert!(k3().validate().is_empty());
        assert_eq!(k3().co_incidence(1).unwrap().rows, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(k3().co_incidence(2).unwrap().num_rows(), 0);
    }

    #[test]
    fn self_loop_and_rank_order_reported() {
        let cc = CombinatorialComplex::unchecked(3, vec![vec![0, 0]], vec![]);
        let v = cc.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::DegenerateCell { rank: 1, .. })), "{v:?}");
        assert!(v[0].to_string().contains("self-loop"));

        let cc = CombinatorialComplex::unchecked(3, vec![vec![1, 2]], vec![vec![1, 2]]);
        assert_eq!(cc.validate(), vec![Violation::RankOrderBroken { cell2: 0, cell1: 0 }]);
        assert!(CombinatorialComplex::new(3, vec![vec![1, 2]], vec![vec![2, 1]]).is_err());
    }

    #[test]
    fn non_canonical_reported() {
        let cc = CombinatorialComplex::unchecked(3, vec![vec![1, 2], vec![0, 1]], vec![]);
        assert_eq!(cc.validate(), vec![Violation::NotCanonical { rank: 1 }]);
    }

    #[test]
    fn from_co_incidence_dedups_and_rejects_singletons() {
        let r1 = SparseBinary::new(vec![vec![0, 1], vec![0, 1], vec![1, 2]], 3);
        let cc = CombinatorialComplex::from_co_incidence(&r1, &SparseBinary::new(vec![], 3), 3).unwrap();
        assert_eq!(cc.cells1(), &[vec![0, 1], vec![1, 2]]);
        let empty = SparseBinary::new(vec![vec![]], 3);
        let cc = CombinatorialComplex::from_co_incidence(&empty, &empty, 3).unwrap();
        assert_eq!((cc.num_cells(1), cc.num_cells(2)), (0, 0));
        let single = SparseBinary::new(vec![vec![2]], 3);
        assert!(CombinatorialComplex::from_co_incidence(&single, &empty, 3).is_err());
        assert!(CombinatorialComplex::from_co_incidence(&empty, &single, 3).is_err());
    }

    #[test]
    fn rank_three_rejected() {
        let e = CombinatorialComplex::from_ranked_cells(4, &[(1, vec![0, 1]), (3, vec![0, 1, 2, 3])]);
        assert!(e.is_err());
    }

    #[test]
    fn incidence_one_two_and_adjacency() {
        let cc = CombinatorialComplex::new(3, k3().cells1().to_vec(), vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(cc.incidence(1, 2).unwrap().rows, vec![vec![0], vec![0], vec![0]]);
        let a = cc.adjacency(1).unwrap();
        assert!(a.rows.iter().all(|r| r == &vec![0, 1, 2]));
        // P3 node adjacency with self loops on covered nodes
        let p3 = CombinatorialComplex::new(3, vec![vec![0, 1], vec![1, 2]], vec![]).unwrap();
        assert_eq!(p3.adjacency(0).unwrap().rows, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
    }

    #[test]
    fn isolated_node_has_zero_adjacency_row() {
        let cc = CombinatorialComplex::new(3, vec![vec![0, 1]], vec![]).unwrap();
        let a = cc.adjacency(0).unwrap();
        assert!(a.rows[2].is_empty());
        assert!(a.rows.iter().all(|r| !r.contains(&2)));
    }

    #[test]
    fn coadjacency_of_two_cells() {
        let cc = CombinatorialComplex::new(
            4,
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 3], vec![2, 3]],
            vec![vec![0, 1, 2], vec![1, 2, 3]],
        )
        .unwrap();
        assert_eq!(cc.coadjacency(2).unwrap().rows, vec![vec![0, 1], vec![0, 1]]);
        // a 2-cell with no 1-cell inside it has an empty row
        let bare = CombinatorialComplex::new(4, vec![vec![0, 1]], vec![vec![1, 2, 3]]).unwrap();
        assert!(bare.coadjacency(2).unwrap().rows[0].is_empty());
    }

    #[test]
    fn transpose_of_adjacency_differs_from_coadjacency() {
        // path 0-1-2-3: A_{1} (edges through 2-cells) is zero, coA_{1} (edges
        // through shared nodes) is not.
        let cc = CombinatorialComplex::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]], vec![]).unwrap();
        let a = cc.adjacency(1).unwrap().transpose();
        let co = cc.coadjacency(1).unwrap();
        assert_ne!(a.to_dense(), co.to_dense());
    }

    #[test]
    fn skeleton_roundtrip() {
        assert_eq!(k3().skeleton().num_edges(), 3);
        let cc = CombinatorialComplex::new(4, vec![], vec![]).unwrap();
        assert_eq!(cc.skeleton().num_edges(), 0);
    }
}
