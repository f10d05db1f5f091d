use crate::geometry::{BoundingBox, Vec2};

/// Uniform bucket grid over a point set, used for neighbour searches.
#[derive(Debug, Clone)]
pub struct PointGrid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
    points: Vec<Vec2>,
}

impl PointGrid {
    /// `cell` is the bucket edge length; points outside `bbox` are clamped
    /// into the border buckets.
    pub fn new(points: Vec<Vec2>, bbox: BoundingBox, cell: f64) -> Self {
        let cell = if cell > 0.0 { cell } else { 1.0 };
        let nx = ((bbox.width() / cell).ceil() as usize).max(1);
        let ny = ((bbox.height() / cell).ceil() as usize).max(1);
        let mut g = PointGrid {
            origin: bbox.min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            points: Vec::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let (ix, iy) = g.bucket_of(p);
            g.buckets[iy * nx + ix].push(i as u32);
        }
        g.points = points;
        g
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    fn bucket_of(&self, p: Vec2) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor();
        let fy = ((p.y - self.origin.y) / self.cell).floor();
        let ix = (fx.max(0.0) as usize).min(self.nx - 1);
        let iy = (fy.max(0.0) as usize).min(self.ny - 1);
        (ix, iy)
    }

    /// Largest ring index that still touches the grid from `p`'s bucket.
    pub fn max_ring(&self, p: Vec2) -> usize {
        let (ix, iy) = self.bucket_of(p);
        ix.max(self.nx - 1 - ix).max(iy).max(self.ny - 1 - iy)
    }

    /// Calls `f` for every point index in the buckets at Chebyshev distance
    /// exactly `k` from the bucket containing `p`.
    pub fn for_each_in_ring(&self, p: Vec2, k: usize, mut f: impl FnMut(usize)) {
        let (ix, iy) = self.bucket_of(p);
        let (ix, iy, k) = (ix as isize, iy as isize, k as isize);
        let mut visit = |x: isize, y: isize| {
            if x >= 0 && y >= 0 && (x as usize) < self.nx && (y as usize) < self.ny {
                for &i in &self.buckets[y as usize * self.nx + x as usize] {
                    f(i as usize);
                }
            }
        };
        if k == 0 {
            visit(ix, iy);
            return;
        }
        for x in ix - k..=ix + k {
            visit(x, iy - k);
            visit(x, iy + k);
        }
        for y in iy - k + 1..iy + k {
            visit(ix - k, y);
            visit(ix + k, y);
        }
    }

    /// Index of the point nearest to `p` (lowest index on ties).
    pub fn nearest(&self, p: Vec2) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        let last = self.max_ring(p);
        for k in 0..=last {
            self.for_each_in_ring(p, k, |i| {
                let d = self.points[i].dist(p);
                if best.map_or(true, |(bd, bi)| d < bd || (d == bd && i < bi)) {
                    best = Some((d, i));
                }
            });
            // Everything within distance k * cell of p has been seen.
            if let Some((bd, _)) = best {
                if bd <= k as f64 * self.cell {
                    break;
                }
            }
        }
        best.map(|(_, i)| i)
    }
}
