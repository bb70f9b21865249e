//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use mep_core::geometry::{sample_grid, triangulate, Polygon};
use mep_core::sensing::{DEFAULT_EPS_FLOOR, DEFAULT_OMEGA};
use mep_core::{
    Domain, GridConfig, IntensityField, IntensityMode, SensingModel, SensorNode, SpatialGrid,
    Vec2,
};

pub struct Problem {
    pub domain: Domain,
    pub field: IntensityField,
    pub source: Vec2,
    pub goal: Vec2,
    pub grid_config: GridConfig,
}

/// A mid-size field: eight attenuated sensors on a 10×10 domain with one
/// rectangular obstacle.
pub fn problem(points_per_node: usize) -> Problem {
    let obstacle = Polygon::new(vec![
        Vec2::new(4.2, 3.0),
        Vec2::new(5.4, 3.0),
        Vec2::new(5.4, 5.2),
        Vec2::new(4.2, 5.2),
    ])
    .unwrap();
    let domain = Domain::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0), vec![obstacle]).unwrap();
    let positions = [
        (1.5, 2.0),
        (2.5, 6.5),
        (4.5, 8.0),
        (5.0, 1.5),
        (6.5, 6.0),
        (7.5, 2.5),
        (8.5, 7.5),
        (3.5, 4.0),
    ];
    let nodes: Vec<SensorNode> = positions
        .iter()
        .map(|&(x, y)| {
            SensorNode::new(
                Vec2::new(x, y),
                SensingModel::AttenuatedDisk {
                    lambda: 4.0,
                    mu: 2.0,
                    s_max: 1e6,
                },
            )
        })
        .collect();
    let field = IntensityField::new(
        nodes,
        IntensityMode::MaxSensor,
        DEFAULT_OMEGA,
        DEFAULT_EPS_FLOOR,
    )
    .unwrap();
    let mut grid_config = GridConfig::for_domain(&domain);
    grid_config.points_per_node = points_per_node;
    grid_config.seed = 5;
    Problem {
        domain,
        field,
        source: Vec2::new(0.0, 5.0),
        goal: Vec2::new(10.0, 5.0),
        grid_config,
    }
}

pub fn build_grid(p: &Problem) -> Arc<SpatialGrid> {
    let points = sample_grid(&p.domain, &p.field, p.goal, &[p.source], &p.grid_config).unwrap();
    Arc::new(triangulate(&points).unwrap())
}
