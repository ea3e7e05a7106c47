use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryKind, DomainBox, EdgeSpec, Mesh};
use crate::geometry::Vec2;
use crate::{Error, Result};

/// `nx * ny` rectangles tiling `domain`, cells numbered row-major from the
/// lower-left corner. Vertical edges are numbered before horizontal ones.
pub fn build_cartesian(nx: usize, ny: usize, domain: DomainBox, boundary: BoundaryKind) -> Result<Mesh> {
    let positions = grid_positions(nx, ny, &domain)?;
    assemble(nx, ny, positions, domain, boundary)
}

/// Cartesian topology with interior vertices displaced by at most
/// `magnitude` times the smaller cell side, uniformly in a disk. Boundary
/// vertices never move, so the domain (and any periodic identification) is
/// preserved exactly.
pub fn build_perturbed_cartesian(
    nx: usize,
    ny: usize,
    domain: DomainBox,
    boundary: BoundaryKind,
    magnitude: f64,
    seed: u64,
) -> Result<Mesh> {
    if !(0.0..0.5).contains(&magnitude) {
        return Err(Error::invalid(format!(
            "perturbation magnitude {magnitude} outside [0, 0.5)"
        )));
    }
    let mut positions = grid_positions(nx, ny, &domain)?;
    let side = (domain.width() / nx as f64).min(domain.height() / ny as f64);
    let radius = magnitude * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 1..ny {
        for i in 1..nx {
            // Draw for every interior vertex even when the radius is zero so
            // the stream position only depends on the topology.
            let r: f64 = radius * rng.gen::<f64>().sqrt();
            let theta: f64 = std::f64::consts::TAU * rng.gen::<f64>();
            if radius > 0.0 {
                positions[j * (nx + 1) + i] += Vec2::new(r * theta.cos(), r * theta.sin());
            }
        }
    }
    let mesh = assemble(nx, ny, positions, domain, boundary)?;
    if let Some(c) = mesh.cells.iter().find(|c| !(c.area > 0.0)) {
        return Err(Error::DegenerateMesh {
            cell: c.id,
            area: c.area,
        });
    }
    Ok(mesh)
}

fn grid_positions(nx: usize, ny: usize, domain: &DomainBox) -> Result<Vec<Vec2>> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid(format!("cell counts must be positive, got {nx} x {ny}")));
    }
    DomainBox::new(domain.min, domain.max)?;
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = lerp(domain.min.y, domain.max.y, j, ny);
        for i in 0..=nx {
            positions.push(Vec2::new(lerp(domain.min.x, domain.max.x, i, nx), y));
        }
    }
    Ok(positions)
}

// Exact at both ends, and exact everywhere for power-of-two divisions of
// dyadic intervals.
fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    if i == n {
        b
    } else {
        a + (b - a) * (i as f64 / n as f64)
    }
}

fn assemble(nx: usize, ny: usize, positions: Vec<Vec2>, domain: DomainBox, boundary: BoundaryKind) -> Result<Mesh> {
    let v = |i: usize, j: usize| j * (nx + 1) + i;
    let c = |i: usize, j: usize| j * nx + i;
    let periodic = boundary == BoundaryKind::Periodic;

    let loops: Vec<Vec<usize>> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]))
        .collect();

    let mut edges = Vec::new();
    // Vertical edges, oriented upward with the west cell on the left.
    for j in 0..ny {
        for i in 0..=nx {
            if i == 0 {
                if !periodic {
                    edges.push(EdgeSpec {
                        v0: v(0, j + 1),
                        v1: v(0, j),
                        left: c(0, j),
                        right: None,
                    });
                }
            } else if i == nx {
                edges.push(EdgeSpec {
                    v0: v(nx, j),
                    v1: v(nx, j + 1),
                    left: c(nx - 1, j),
                    right: periodic.then(|| c(0, j)),
                });
            } else {
                edges.push(EdgeSpec {
                    v0: v(i, j),
                    v1: v(i, j + 1),
                    left: c(i - 1, j),
                    right: Some(c(i, j)),
                });
            }
        }
    }
    // Horizontal edges, oriented eastward with the north cell on the left.
    for j in 0..=ny {
        for i in 0..nx {
            if j == 0 {
                edges.push(EdgeSpec {
                    v0: v(i, 0),
                    v1: v(i + 1, 0),
                    left: c(i, 0),
                    right: periodic.then(|| c(i, ny - 1)),
                });
            } else if j == ny {
                if !periodic {
                    edges.push(EdgeSpec {
                        v0: v(i + 1, ny),
                        v1: v(i, ny),
                        left: c(i, ny - 1),
                        right: None,
                    });
                }
            } else {
                edges.push(EdgeSpec {
                    v0: v(i, j),
                    v1: v(i + 1, j),
                    left: c(i, j),
                    right: Some(c(i, j - 1)),
                });
            }
        }
    }

    Mesh::from_parts(positions, loops, edges, domain, boundary)
}
