use std::cmp::Ordering;
use std::fmt;

use crate::units::Nm;

use super::GeometryError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: Nm,
    pub y: Nm,
}

impl Point {
    pub const fn new(x: Nm, y: Nm) -> Self {
        Self { x, y }
    }

    /// Rotates about the origin by `quarters` × 90° counter-clockwise.
    pub fn rotate_quarters(self, quarters: i32) -> Self {
        match quarters.rem_euclid(4) {
            0 => self,
            1 => Self::new(-self.y, self.x),
            2 => Self::new(-self.x, -self.y),
            _ => Self::new(self.y, -self.x),
        }
    }

    pub fn offset(self, dx: Nm, dy: Nm) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

fn cross(o: Point, a: Point, b: Point) -> i128 {
    let (ax, ay) = ((a.x - o.x) as i128, (a.y - o.y) as i128);
    let (bx, by) = ((b.x - o.x) as i128, (b.y - o.y) as i128);
    ax * by - ay * bx
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rect {
    pub x0: Nm,
    pub y0: Nm,
    pub x1: Nm,
    pub y1: Nm,
}

impl Rect {
    /// Builds from any two opposite corners.
    pub fn from_corners(a: Point, b: Point) -> Self {
        Self {
            x0: a.x.min(b.x),
            y0: a.y.min(b.y),
            x1: a.x.max(b.x),
            y1: a.y.max(b.y),
        }
    }

    pub fn width(&self) -> Nm {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Nm {
        self.y1 - self.y0
    }

    pub fn area(&self) -> i128 {
        self.width() as i128 * self.height() as i128
    }

    pub fn min_corner(&self) -> Point {
        Point::new(self.x0, self.y0)
    }

    /// Interiors intersect with positive area.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// Closed rectangles intersect (touching counts).
    pub fn meets(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ])
    }
}

/// Ordered vertex loop on the nm grid. The constructor stores vertices
/// verbatim; [`Polygon::normalize`] produces the canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn rect(x0: Nm, y0: Nm, x1: Nm, y1: Nm) -> Self {
        Rect::from_corners(Point::new(x0, y0), Point::new(x1, y1)).to_polygon()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Twice the signed shoelace area; positive for counter-clockwise loops.
    pub fn twice_signed_area(&self) -> i128 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128
            })
            .sum()
    }

    pub fn bbox(&self) -> Rect {
        let mut r = Rect {
            x0: Nm::MAX,
            y0: Nm::MAX,
            x1: Nm::MIN,
            y1: Nm::MIN,
        };
        for p in &self.vertices {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    /// Every edge is horizontal or vertical.
    pub fn is_rectilinear(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            a.x == b.x || a.y == b.y
        })
    }

    /// The rectangle this polygon covers, if it is exactly one.
    pub fn as_rect(&self) -> Option<Rect> {
        let p = self.normalize().ok()?;
        if p.vertices.len() == 4 && p.is_rectilinear() {
            Some(p.bbox())
        } else {
            None
        }
    }

    pub fn translate(&self, dx: Nm, dy: Nm) -> Self {
        Self::new(self.vertices.iter().map(|p| p.offset(dx, dy)).collect())
    }

    pub fn rotate_quarters(&self, quarters: i32) -> Self {
        Self::new(
            self.vertices
                .iter()
                .map(|p| p.rotate_quarters(quarters))
                .collect(),
        )
    }

    /// Canonical form: duplicate and collinear vertices removed,
    /// counter-clockwise, lexicographically smallest vertex first.
    pub fn normalize(&self) -> Result<Polygon, GeometryError> {
        let mut v = self.vertices.clone();
        v.dedup();
        while v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        loop {
            let n = v.len();
            if n < 3 {
                return Err(GeometryError::Degenerate);
            }
            let redundant = (0..n).find(|&i| cross(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) == 0);
            match redundant {
                Some(i) => {
                    v.remove(i);
                }
                None => break,
            }
        }
        let mut p = Polygon::new(v);
        match p.twice_signed_area().cmp(&0) {
            Ordering::Equal => return Err(GeometryError::Degenerate),
            Ordering::Less => p.vertices.reverse(),
            Ordering::Greater => {}
        }
        let first = p
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|(_, pt)| **pt)
            .map(|(i, _)| i)
            .unwrap_or(0);
        p.vertices.rotate_left(first);
        Ok(p)
    }

    /// No two edges intersect except adjacent edges at their shared vertex.
    pub fn is_simple(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if a == b {
                return false;
            }
            for j in (i + 1)..n {
                let (c, d) = (v[j], v[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if cross(shared, p, q) == 0 && dot(shared, p, q) > 0 {
                        return false;
                    }
                } else if segments_meet(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

fn dot(o: Point, a: Point, b: Point) -> i128 {
    let (ax, ay) = ((a.x - o.x) as i128, (a.y - o.y) as i128);
    let (bx, by) = ((b.x - o.x) as i128, (b.y - o.y) as i128);
    ax * bx + ay * by
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_meet(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a).signum();
    let d2 = cross(c, d, b).signum();
    let d3 = cross(a, b, c).signum();
    let d4 = cross(a, b, d).signum();
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(c, d, a))
        || (d2 == 0 && on_segment(c, d, b))
        || (d3 == 0 && on_segment(a, b, c))
        || (d4 == 0 && on_segment(a, b, d))
}

impl PartialOrd for Polygon {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Polygon {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices.cmp(&other.vertices)
    }
}

/// True iff the two multisets are equal after normalization, vertex for vertex.
pub fn polygon_set_equal(a: &[Polygon], b: &[Polygon]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let canon = |set: &[Polygon]| {
        let mut out: Vec<Polygon> = set
            .iter()
            .map(|p| p.normalize().unwrap_or_else(|_| p.clone()))
            .collect();
        out.sort();
        out
    };
    canon(a) == canon(b)
}
