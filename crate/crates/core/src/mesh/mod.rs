//! Polygonal meshes of an axis-aligned box.
//!
//! Every edge is stored once with an orientation `v0 -> v1` that keeps its
//! `left` cell on the left; the unit normal therefore points from `left`
//! into `right`. Cells refer to edges with a sign that is `+1` when the
//! stored normal is outward for that cell. With periodic boundaries the
//! right cell sees a translated copy of the edge; normals and lengths are
//! translation invariant so nothing else changes.

mod generate;
mod io;
mod validate;

pub use generate::{build_cartesian, build_perturbed_cartesian};
pub use io::{read_mesh, write_mesh};
pub use validate::{validate_mesh, RegularityReport};

use crate::geometry::{self, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl DomainBox {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || !(max.x > min.x && max.y > min.y) {
            return Err(Error::invalid(format!(
                "degenerate domain [{}, {}] x [{}, {}]",
                min.x, max.x, min.y, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn unit() -> Self {
        Self {
            min: Vec2::ZERO,
            max: Vec2::new(1.0, 1.0),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Largest side, used as the length scale of the domain.
    pub fn size(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min.x - tol && p.x <= self.max.x + tol && p.y >= self.min.y - tol && p.y <= self.max.y + tol
    }

    /// Periodic image of `p` inside `[min, max)`.
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.min.x + (p.x - self.min.x).rem_euclid(self.width()),
            self.min.y + (p.y - self.min.y).rem_euclid(self.height()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// No flux crosses the domain boundary.
    Impermeable,
    /// Opposite sides of the box are identified.
    Periodic,
}

impl BoundaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::Impermeable => "impermeable",
            BoundaryKind::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impermeable" => Ok(BoundaryKind::Impermeable),
            "periodic" => Ok(BoundaryKind::Periodic),
            other => Err(Error::invalid(format!("unknown boundary kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub position: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub endpoints: [usize; 2],
    pub left: usize,
    /// `None` on the boundary of an impermeable mesh.
    pub right: Option<usize>,
    /// Unit normal pointing from `left` into `right`.
    pub normal: Vec2,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// The cell on the other side of this edge as seen from `cell`.
    pub fn neighbor_of(&self, cell: usize, sign: f64) -> Option<usize> {
        if sign > 0.0 {
            debug_assert_eq!(self.left, cell);
            self.right
        } else {
            Some(self.left)
        }
    }
}

/// Reference from a cell to one of its edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge {
    pub edge: usize,
    /// `+1.0` when the edge normal points out of the cell, `-1.0` otherwise.
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    /// Counterclockwise vertex ids.
    pub vertex_loop: Vec<usize>,
    pub area: f64,
    pub perimeter: f64,
    pub centroid: Vec2,
    pub edges: Vec<CellEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
    pub domain: DomainBox,
    pub boundary: BoundaryKind,
}

/// Topological description of an edge used to assemble a [`Mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSpec {
    pub v0: usize,
    pub v1: usize,
    pub left: usize,
    pub right: Option<usize>,
}

impl Mesh {
    /// Assembles a mesh and derives all geometric quantities. Cell edge lists
    /// are ordered by edge id, outward references first.
    pub fn from_parts(
        positions: Vec<Vec2>,
        loops: Vec<Vec<usize>>,
        edges: Vec<EdgeSpec>,
        domain: DomainBox,
        boundary: BoundaryKind,
    ) -> Result<Self> {
        let nv = positions.len();
        if let Some((i, p)) = positions.iter().enumerate().find(|(_, p)| !p.is_finite()) {
            return Err(Error::invalid(format!("vertex {i} has non-finite position {p:?}")));
        }
        let vertices: Vec<Vertex> = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| Vertex { id, position })
            .collect();

        let nc = loops.len();
        let mut cell_edges: Vec<Vec<CellEdge>> = vec![Vec::new(); nc];
        let mut out_edges = Vec::with_capacity(edges.len());
        for (id, e) in edges.into_iter().enumerate() {
            if e.v0 >= nv || e.v1 >= nv {
                return Err(Error::invalid(format!("edge {id} references a missing vertex")));
            }
            if e.left >= nc || e.right.is_some_and(|r| r >= nc) {
                return Err(Error::invalid(format!("edge {id} references a missing cell")));
            }
            let a = vertices[e.v0].position;
            let b = vertices[e.v1].position;
            let d = b - a;
            let length = d.norm();
            if length == 0.0 {
                return Err(Error::invalid(format!("edge {id} has zero length")));
            }
            let normal = Vec2::new(d.y, -d.x) / length;
            cell_edges[e.left].push(CellEdge { edge: id, sign: 1.0 });
            if let Some(r) = e.right {
                cell_edges[r].push(CellEdge { edge: id, sign: -1.0 });
            }
            out_edges.push(Edge {
                id,
                endpoints: [e.v0, e.v1],
                left: e.left,
                right: e.right,
                normal,
                length,
            });
        }

        let mut cells = Vec::with_capacity(nc);
        for (id, (vertex_loop, edges)) in loops.into_iter().zip(cell_edges).enumerate() {
            if vertex_loop.len() < 3 || vertex_loop.iter().any(|&v| v >= nv) {
                return Err(Error::invalid(format!("cell {id} has an invalid vertex loop")));
            }
            let pts: Vec<Vec2> = vertex_loop.iter().map(|&v| vertices[v].position).collect();
            let area = geometry::signed_area(&pts);
            let perimeter = geometry::perimeter(&pts);
            let centroid = geometry::centroid(&pts);
            cells.push(Cell {
                id,
                vertex_loop,
                area,
                perimeter,
                centroid,
                edges,
            });
        }

        Ok(Mesh {
            vertices,
            edges: out_edges,
            cells,
            domain,
            boundary,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, cell: usize) -> Vec<Vec2> {
        self.cells[cell]
            .vertex_loop
            .iter()
            .map(|&v| self.vertices[v].position)
            .collect()
    }

    pub fn edge_points(&self, edge: usize) -> (Vec2, Vec2) {
        let [a, b] = self.edges[edge].endpoints;
        (self.vertices[a].position, self.vertices[b].position)
    }

    /// Axis-aligned bounding box of a cell.
    pub fn cell_bounds(&self, cell: usize) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &v in &self.cells[cell].vertex_loop {
            let p = self.vertices[v].position;
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Maximum cell diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| geometry::diameter(&self.cell_points(c)))
            .fold(0.0, f64::max)
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn total_area(&self) -> f64 {
        crate::sum::compensated_sum(self.cells.iter().map(|c| c.area))
    }
}
