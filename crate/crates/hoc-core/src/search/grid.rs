//! POET grid genome: parameters encoded on a 2-D grid of (c, k) cells.
//!
//! Each cell holds a real contribution `c` and a parameter id `k`;
//! parameter i is the sum of `c` over cells with `k == i`. A genome is
//! an ordered list of change events replayed onto the initial grid:
//! proliferation overwrites `c` in a square area, swap exchanges the
//! `k` values of two same-shaped areas. Events below `frozen_prefix`
//! are no longer mutable.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::unit_at;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub k: usize,
}

/// Square grid of cells; the decode target of every genome in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoetGrid {
    side: usize,
    cells: Vec<GridCell>,
}

impl PoetGrid {
    /// Initial grid: k uniform over the parameter ids, c all zero, so
    /// the undecoded network is entirely sentinel nodes.
    pub fn init(side: usize, param_count: usize, rng: &mut ChaCha8Rng) -> Self {
        let cells = (0..side * side)
            .map(|_| GridCell {
                c: 0.0,
                k: rng.random_range(0..param_count.max(1)),
            })
            .collect();
        Self { side, cells }
    }

    pub fn from_cells(side: usize, cells: Vec<GridCell>) -> Self {
        assert_eq!(cells.len(), side * side);
        Self { side, cells }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    fn at(&self, x: usize, y: usize) -> usize {
        y * self.side + x
    }
}

/// One developmental change. Areas are squares of `center +- radius`,
/// clipped at the grid borders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChangeEvent {
    Proliferation {
        center: (usize, usize),
        radius: usize,
        base: f64,
        spread: f64,
        jitter_seed: u64,
    },
    Swap {
        center_a: (usize, usize),
        center_b: (usize, usize),
        radius: usize,
    },
}

/// Ordered event list with an immutable frozen prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoetGenome {
    pub events: Vec<ChangeEvent>,
    pub frozen_prefix: usize,
}

impl PoetGenome {
    pub fn new() -> Self {
        Self {
            events: Vec::new(),
            frozen_prefix: 0,
        }
    }

    /// Freeze everything currently present; newer events stay mutable.
    pub fn freeze_all(&mut self) {
        self.frozen_prefix = self.events.len();
    }
}

impl Default for PoetGenome {
    fn default() -> Self {
        Self::new()
    }
}

fn clipped_range(center: usize, radius: usize, side: usize) -> std::ops::RangeInclusive<usize> {
    center.saturating_sub(radius)..=(center + radius).min(side - 1)
}

/// Replay the genome onto a copy of the initial grid and sum cell
/// contributions per parameter id. Ids without cells decode to 0.
pub fn decode_grid(genome: &PoetGenome, grid_init: &PoetGrid, param_count: usize) -> Vec<f64> {
    let side = grid_init.side;
    let mut grid = grid_init.clone();
    for event in &genome.events {
        match *event {
            ChangeEvent::Proliferation {
                center: (cx, cy),
                radius,
                base,
                spread,
                jitter_seed,
            } => {
                for y in clipped_range(cy, radius, side) {
                    for x in clipped_range(cx, radius, side) {
                        let jitter = spread * (2.0 * unit_at(jitter_seed, x as u64, y as u64) - 1.0);
                        let idx = grid.at(x, y);
                        grid.cells[idx].c = base + jitter;
                    }
                }
            }
            ChangeEvent::Swap {
                center_a: (ax, ay),
                center_b: (bx, by),
                radius,
            } => {
                let r = radius as isize;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let pa = (ax as isize + dx, ay as isize + dy);
                        let pb = (bx as isize + dx, by as isize + dy);
                        let inside = |p: (isize, isize)| {
                            p.0 >= 0 && p.1 >= 0 && (p.0 as usize) < side && (p.1 as usize) < side
                        };
                        if inside(pa) && inside(pb) {
                            let ia = grid.at(pa.0 as usize, pa.1 as usize);
                            let ib = grid.at(pb.0 as usize, pb.1 as usize);
                            let ka = grid.cells[ia].k;
                            grid.cells[ia].k = grid.cells[ib].k;
                            grid.cells[ib].k = ka;
                        }
                    }
                }
            }
        }
    }
    let mut params = vec![0.0f64; param_count];
    for cell in &grid.cells {
        if cell.k < param_count {
            params[cell.k] += cell.c;
        }
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn grid_2x2() -> PoetGrid {
        PoetGrid::from_cells(
            2,
            vec![
                GridCell { c: 0.3, k: 0 },
                GridCell { c: 0.2, k: 0 },
                GridCell { c: 0.5, k: 1 },
                GridCell { c: -0.1, k: 2 },
            ],
        )
    }

    #[test]
    fn sum_rule_on_2x2_grid() {
        let genome = PoetGenome::new();
        let params = decode_grid(&genome, &grid_2x2(), 3);
        assert_eq!(params, vec![0.5, 0.5, -0.1]);
    }

    #[test]
    fn distinct_ids_decode_to_their_own_cell() {
        let grid = PoetGrid::from_cells(
            2,
            vec![
                GridCell { c: 0.7, k: 2 },
                GridCell { c: -0.4, k: 0 },
                GridCell { c: 0.1, k: 3 },
                GridCell { c: 0.9, k: 1 },
            ],
        );
        let params = decode_grid(&PoetGenome::new(), &grid, 5);
        assert_eq!(params, vec![-0.4, 0.9, 0.7, 0.1, 0.0]);
    }

    #[test]
    fn replay_is_deterministic() {
        let mut rng = stream_rng(3, 0);
        let grid = PoetGrid::init(8, 10, &mut rng);
        let genome = PoetGenome {
            events: vec![
                ChangeEvent::Proliferation {
                    center: (1, 1),
                    radius: 2,
                    base: 0.4,
                    spread: 0.2,
                    jitter_seed: 99,
                },
                ChangeEvent::Swap {
                    center_a: (0, 0),
                    center_b: (5, 5),
                    radius: 1,
                },
                ChangeEvent::Proliferation {
                    center: (6, 6),
                    radius: 1,
                    base: -0.3,
                    spread: 0.0,
                    jitter_seed: 7,
                },
            ],
            frozen_prefix: 0,
        };
        let a = decode_grid(&genome, &grid, 10);
        let b = decode_grid(&genome, &grid, 10);
        assert_eq!(a, b);
    }

    #[test]
    fn proliferation_overwrites_area_within_spread() {
        let mut rng = stream_rng(4, 0);
        let grid = PoetGrid::init(6, 4, &mut rng);
        let genome = PoetGenome {
            events: vec![ChangeEvent::Proliferation {
                center: (2, 2),
                radius: 1,
                base: 1.0,
                spread: 0.25,
                jitter_seed: 5,
            }],
            frozen_prefix: 0,
        };
        let params = decode_grid(&genome, &grid, 4);
        let total: f64 = params.iter().sum();
        // 9 cells were overwritten; their sum lands in 9 * (1.0 +- 0.25)
        assert!(total > 9.0 * 0.75 && total < 9.0 * 1.25);
    }

    #[test]
    fn border_clipping_keeps_events_total() {
        let mut rng = stream_rng(6, 0);
        let grid = PoetGrid::init(4, 3, &mut rng);
        let genome = PoetGenome {
            events: vec![
                ChangeEvent::Proliferation {
                    center: (0, 0),
                    radius: 5,
                    base: 0.1,
                    spread: 0.0,
                    jitter_seed: 0,
                },
                ChangeEvent::Swap {
                    center_a: (0, 0),
                    center_b: (3, 3),
                    radius: 2,
                },
            ],
            frozen_prefix: 0,
        };
        // with radius 5 the whole 4x4 grid is covered: each cell holds 0.1
        let params = decode_grid(&genome, &grid, 3);
        assert!((params.iter().sum::<f64>() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn swap_exchanges_parameter_ids() {
        let grid = PoetGrid::from_cells(
            2,
            vec![
                GridCell { c: 1.0, k: 0 },
                GridCell { c: 0.0, k: 1 },
                GridCell { c: 0.0, k: 1 },
                GridCell { c: 0.0, k: 1 },
            ],
        );
        let genome = PoetGenome {
            events: vec![ChangeEvent::Swap {
                center_a: (0, 0),
                center_b: (1, 1),
                radius: 0,
            }],
            frozen_prefix: 0,
        };
        let params = decode_grid(&genome, &grid, 2);
        // the c=1.0 cell now feeds parameter 1
        assert_eq!(params, vec![0.0, 1.0]);
    }
}
