//! Adaptive cubature over convex polygons in the plane.
//!
//! Polygons are fan-triangulated; each triangle is integrated with a
//! conical-product Gauss-Legendre rule and recursively split into four
//! congruent children until the parent and child estimates agree within the
//! triangle's share of the tolerance.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Points per direction of the product rule.
const ORDER: usize = 8;

/// Convex polygon, vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon(pub Vec<Point>);

impl Polygon {
    pub fn triangle(a: Point, b: Point, c: Point) -> Self {
        Polygon(vec![a, b, c])
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Polygon(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// Keep the part where `a x + b y <= c` (Sutherland-Hodgman).
    pub fn clip(&self, a: f64, b: f64, c: f64) -> Polygon {
        let inside = |p: &Point| a * p[0] + b * p[1] <= c;
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for (i, p) in self.0.iter().enumerate() {
            let q = &self.0[(i + 1) % self.0.len()];
            let (pin, qin) = (inside(p), inside(q));
            if pin {
                out.push(*p);
            }
            if pin != qin {
                let fp = a * p[0] + b * p[1] - c;
                let fq = a * q[0] + b * q[1] - c;
                let t = fp / (fp - fq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        Polygon(out)
    }

    pub fn area(&self) -> f64 {
        let n = self.0.len();
        if n < 3 {
            return 0.0;
        }
        let twice: f64 = (0..n)
            .map(|i| {
                let (p, q) = (self.0[i], self.0[(i + 1) % n]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        0.5 * twice.abs()
    }

    fn triangles(&self) -> Vec<[Point; 3]> {
        if self.0.len() < 3 {
            return Vec::new();
        }
        (1..self.0.len() - 1)
            .map(|i| [self.0[0], self.0[i], self.0[i + 1]])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    /// Maximum depth of four-way triangle refinement.
    pub max_subdivisions: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_subdivisions: 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubature {
    pub value: f64,
    /// Sum of the accepted local error estimates.
    pub error: f64,
    pub evaluations: usize,
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        // Nodes and weights on [0, 1] by Newton iteration on P_ORDER.
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let k = ORDER as f64;
        for i in 0..ORDER {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=ORDER {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = k * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = 0.5 * (1.0 - x);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn triangle_area(t: &[Point; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
}

/// Conical product rule: point = (1-s) P0 + s((1-t) P1 + t P2), Jacobian 2 A s.
fn rule(f: &impl Fn(f64, f64) -> f64, t: &[Point; 3]) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let mut acc = CompensatedSum::default();
    for (si, &s) in nodes.iter().enumerate() {
        for (ti, &u) in nodes.iter().enumerate() {
            let x = (1.0 - s) * t[0][0] + s * ((1.0 - u) * t[1][0] + u * t[2][0]);
            let y = (1.0 - s) * t[0][1] + s * ((1.0 - u) * t[1][1] + u * t[2][1]);
            acc.add(weights[si] * weights[ti] * s * f(x, y));
        }
    }
    2.0 * triangle_area(t) * acc.value()
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn children(t: &[Point; 3]) -> [[Point; 3]; 4] {
    let (ab, bc, ca) = (midpoint(t[0], t[1]), midpoint(t[1], t[2]), midpoint(t[2], t[0]));
    [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [ab, bc, ca]]
}

/// Integrate `f` over the union of the given convex pieces to absolute
/// tolerance `cfg.abs_tol`.
pub fn integrate(f: impl Fn(f64, f64) -> f64, pieces: &[Polygon], cfg: &QuadratureConfig) -> Result<Cubature> {
    cfg.validate()?;
    let per_point = ORDER * ORDER;
    let triangles: Vec<[Point; 3]> = pieces.iter().flat_map(Polygon::triangles).collect();
    let total_area: f64 = triangles.iter().map(triangle_area).sum();
    if total_area == 0.0 {
        return Ok(Cubature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }

    let mut value = CompensatedSum::default();
    let mut error = CompensatedSum::default();
    let mut evaluations = 0usize;
    let mut converged = true;

    // Depth-first with an explicit stack; the visiting order is fixed so the
    // result is reproducible.
    let mut stack: Vec<([Point; 3], f64, u32)> = triangles
        .iter()
        .filter(|t| triangle_area(t) > 0.0)
        .map(|t| {
            evaluations += per_point;
            (*t, rule(&f, t), 0)
        })
        .collect();
    stack.reverse();

    while let Some((tri, coarse, depth)) = stack.pop() {
        let kids = children(&tri);
        let fine: [f64; 4] = kids.map(|k| rule(&f, &k));
        evaluations += 4 * per_point;
        let fine_sum = fine.iter().fold(CompensatedSum::default(), |mut s, &v| {
            s.add(v);
            s
        });
        let est = (fine_sum.value() - coarse).abs();
        let local_tol = cfg.abs_tol * triangle_area(&tri) / total_area;
        if est <= local_tol || depth + 1 >= cfg.max_subdivisions {
            if est > local_tol {
                converged = false;
            }
            value.add(fine_sum.value());
            error.add(est);
        } else {
            for (k, v) in kids.iter().zip(fine).rev() {
                stack.push((*k, v, depth + 1));
            }
        }
    }

    let result = Cubature {
        value: value.value(),
        error: error.value(),
        evaluations,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::Convergence {
            estimate: result.value,
            error_bound: result.error,
        })
    }
}
