//! Built-in test domains and Halton samples restricted to them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, halton, reduce_to_domain, ConvexDomain, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Square,
    Pentagon,
    Triangle,
    Cube,
    Cylinder,
    Pyramid,
}

impl Shape {
    pub const ALL: [Shape; 6] = [
        Shape::Square,
        Shape::Pentagon,
        Shape::Triangle,
        Shape::Cube,
        Shape::Cylinder,
        Shape::Pyramid,
    ];

    pub fn dim(self) -> usize {
        match self {
            Shape::Square | Shape::Pentagon | Shape::Triangle => 2,
            Shape::Cube | Shape::Cylinder | Shape::Pyramid => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Pentagon => "pentagon",
            Shape::Triangle => "triangle",
            Shape::Cube => "cube",
            Shape::Cylinder => "cylinder",
            Shape::Pyramid => "pyramid",
        }
    }

    /// Points whose convex hull is the shape.
    pub fn vertices(self) -> PointSet {
        let coords: Vec<f64> = match self {
            Shape::Square => vec![0., 0., 1., 0., 1., 1., 0., 1.],
            Shape::Pentagon => (0..5)
                .flat_map(|k| {
                    let a = PI / 2.0 + 2.0 * PI * k as f64 / 5.0;
                    [0.5 + 0.5 * a.cos(), 0.5 + 0.5 * a.sin()]
                })
                .collect(),
            Shape::Triangle => vec![0., 0., 1., 0., 0.5, 1.],
            Shape::Cube => (0..8)
                .flat_map(|i| [(i >> 2 & 1) as f64, (i >> 1 & 1) as f64, (i & 1) as f64])
                .collect(),
            Shape::Cylinder => {
                let mut c = Vec::with_capacity(64 * 16 * 3);
                for j in 0..16 {
                    let z = 0.05 + 0.9 * j as f64 / 15.0;
                    for k in 0..64 {
                        let a = 2.0 * PI * k as f64 / 64.0;
                        c.extend([0.5 + 0.4 * a.cos(), 0.5 + 0.4 * a.sin(), z]);
                    }
                }
                c
            }
            Shape::Pyramid => vec![
                0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.9, 0.9, 0.1, 0.1, 0.9, 0.1, 0.5, 0.5, 0.9,
            ],
        };
        PointSet::new(self.dim(), coords).expect("shape vertices are finite")
    }

    pub fn domain(self) -> ConvexDomain {
        convex_hull(&self.vertices()).expect("shapes are full dimensional")
    }

    /// The first `n_raw` Halton points of the unit square or cube that fall
    /// inside the shape.
    pub fn halton_points(self, n_raw: usize) -> Result<PointSet> {
        reduce_to_domain(&halton(n_raw, self.dim(), 0)?, &self.domain())
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown shape '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        let cases = [
            (Shape::Square, 1.0, 1e-12),
            (Shape::Cube, 1.0, 1e-12),
            (Shape::Triangle, 0.5, 1e-12),
            (Shape::Pentagon, 0.594_410_322_684_471, 1e-12),
            (Shape::Pyramid, 0.64 * 0.8 / 3.0, 1e-12),
            // 64-gon area 64/2 * r^2 * sin(2pi/64), times height 0.9
            (Shape::Cylinder, 32.0 * 0.16 * (2.0 * PI / 64.0).sin() * 0.9, 1e-9),
        ];
        for (shape, want, tol) in cases {
            let got = shape.domain().measure();
            assert!((got - want).abs() < tol, "{}: {got}", shape.name());
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Shape::ALL {
            assert_eq!(s.name().parse::<Shape>().unwrap(), s);
        }
        assert!("hexagon".parse::<Shape>().is_err());
    }

    #[test]
    fn samples_lie_inside() {
        for s in Shape::ALL {
            let dom = s.domain();
            let pts = s.halton_points(500).unwrap();
            assert!(!pts.is_empty());
            assert!(pts.iter().all(|p| dom.contains(p)));
        }
        let tri = Shape::Triangle.halton_points(4000).unwrap().len() as f64;
        assert!((tri / 4000.0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn pentagon_apex_on_top() {
        let v = Shape::Pentagon.vertices();
        assert!((v.point(0)[0] - 0.5).abs() < 1e-15);
        assert!((v.point(0)[1] - 1.0).abs() < 1e-15);
    }
}
