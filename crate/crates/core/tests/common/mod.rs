#![allow(dead_code)]

use nlsfv::mesh::PolygonCell;
use nlsfv::{DomainSpec, Mesh, Vec2};
use num_complex::Complex64;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].norm().partial_cmp(&m[j][k].norm()).unwrap())
            .unwrap();
        m.swap(k, piv);
        x.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
            let v = x[k];
            x[i] -= f * v;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    x
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn square(x0: f64, y0: f64, side: f64) -> Vec<Vec2> {
    vec![
        Vec2::new(x0, y0),
        Vec2::new(x0 + side, y0),
        Vec2::new(x0 + side, y0 + side),
        Vec2::new(x0, y0 + side),
    ]
}

/// One square cell of side `side` with its point at the centre.
pub fn single_square(side: f64) -> Mesh {
    Mesh::from_polygons(
        DomainSpec::disk(side).unwrap(),
        vec![PolygonCell {
            point: Vec2::new(0.5 * side, 0.5 * side),
            vertices: square(0.0, 0.0, side),
            neighbors: vec![None; 4],
        }],
    )
    .unwrap()
}

/// `n × n` grid of unit squares.
pub fn square_grid(n: usize) -> Mesh {
    let mut polys = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let id = |a: isize, b: isize| {
                (a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n).then(|| b as usize * n + a as usize)
            };
            let (a, b) = (i as isize, j as isize);
            polys.push(PolygonCell {
                point: Vec2::new(i as f64 + 0.5, j as f64 + 0.5),
                vertices: square(i as f64, j as f64, 1.0),
                neighbors: vec![id(a, b - 1), id(a + 1, b), id(a, b + 1), id(a - 1, b)],
            });
        }
    }
    Mesh::from_polygons(DomainSpec::disk(n as f64).unwrap(), polys).unwrap()
}
