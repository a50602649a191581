//! Ring topology. Edge `j` joins vertex `j` to vertex `j ⊕ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolygonGraph {
    vertices: usize,
}

impl PolygonGraph {
    pub fn new(vertices: usize) -> Result<Self> {
        if vertices < 3 {
            return Err(Error::TooFewVertices(vertices));
        }
        Ok(Self { vertices })
    }

    /// Vertex count, which is also the edge count.
    pub fn len(&self) -> usize {
        self.vertices
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, j: usize) -> Result<()> {
        if j >= self.vertices {
            return Err(Error::VertexOutOfRange {
                vertex: j,
                vertices: self.vertices,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn succ(&self, j: usize) -> usize {
        if j + 1 == self.vertices {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub fn pred(&self, j: usize) -> usize {
        if j == 0 {
            self.vertices - 1
        } else {
            j - 1
        }
    }

    /// Returns `(j ⊖ 1, j ⊕ 1)`.
    pub fn neighbors(&self, j: usize) -> Result<(usize, usize)> {
        self.check(j)?;
        Ok((self.pred(j), self.succ(j)))
    }

    /// The edge label `j` with `{u, w} = {j, j ⊕ 1}`.
    pub fn edge_between(&self, u: usize, w: usize) -> Result<usize> {
        self.check(u)?;
        self.check(w)?;
        if self.succ(u) == w {
            Ok(u)
        } else if self.succ(w) == u {
            Ok(w)
        } else {
            Err(Error::InvalidEdge(u, w))
        }
    }

    /// Endpoints `(j, j ⊕ 1)` of edge `j`.
    pub fn endpoints(&self, edge: usize) -> Result<(usize, usize)> {
        self.check(edge)?;
        Ok((edge, self.succ(edge)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn neighbors_wrap() {
        let tri = PolygonGraph::new(3).unwrap();
        assert_eq!(tri.neighbors(0).unwrap(), (2, 1));
        assert_eq!(tri.neighbors(1).unwrap(), (0, 2));
        let pent = PolygonGraph::new(5).unwrap();
        assert_eq!(pent.neighbors(4).unwrap(), (3, 0));
        assert!(matches!(
            pent.neighbors(5),
            Err(Error::VertexOutOfRange { vertex: 5, .. })
        ));
    }

    #[test]
    fn edge_labels() {
        let tri = PolygonGraph::new(3).unwrap();
        assert_eq!(tri.edge_between(0, 1).unwrap(), 0);
        assert_eq!(tri.edge_between(1, 0).unwrap(), 0);
        assert_eq!(tri.edge_between(2, 0).unwrap(), 2);
        let sq = PolygonGraph::new(4).unwrap();
        assert!(matches!(sq.edge_between(0, 2), Err(Error::InvalidEdge(0, 2))));
        assert!(matches!(sq.edge_between(1, 1), Err(Error::InvalidEdge(1, 1))));
    }

    #[test]
    fn rejects_digon() {
        assert!(matches!(PolygonGraph::new(2), Err(Error::TooFewVertices(2))));
    }

    proptest! {
        #[test]
        fn neighbors_and_edges_agree(v in 3usize..64, j in 0usize..64) {
            let g = PolygonGraph::new(v).unwrap();
            let j = j % v;
            let (left, right) = g.neighbors(j).unwrap();
            prop_assert_eq!(g.edge_between(j, right).unwrap(), j);
            prop_assert_eq!(g.edge_between(left, j).unwrap(), left);
            prop_assert_eq!(g.endpoints(j).unwrap(), (j, right));
            prop_assert_eq!(g.neighbors(right).unwrap().0, j);
        }
    }
}
