//! Exact plane geometry for Dirichlet-line configurations.
//!
//! A rescaled loop `x + t·ℓ` crosses the line `{n·y = c}` exactly when
//! `c − t·M ≤ n·x ≤ c − t·m`, where `(m, M)` is the extent of `ℓ` along `n`.
//! The set of translations crossing every line is therefore an intersection
//! of slabs, which is computed here as a convex polygon.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::bridges::UnitBridge;
use crate::error::{require_positive, Error, Result};
use crate::spectral::PotentialObject;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise rotation by `angle` radians.
    #[inline]
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit vector at `angle` from the x-axis.
    #[inline]
    pub fn unit(angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c, s)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

/// An infinite line `{x : normal·x = offset}` carrying Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineObject {
    normal: Vec2,
    offset: f64,
}

impl LineObject {
    /// Builds a line from any nonzero normal; the normal is rescaled to unit
    /// length together with the offset.
    pub fn new(normal: Vec2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len.is_finite() && len > 0.0) || !offset.is_finite() {
            return Err(Error::invalid("normal", "line normal must be finite and nonzero"));
        }
        Ok(LineObject {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    /// Line through two distinct points.
    pub fn through(p: Vec2, q: Vec2) -> Result<Self> {
        let d = q - p;
        let normal = Vec2::new(-d.y, d.x);
        LineObject::new(normal, normal.dot(p))
    }

    #[inline]
    pub fn normal(&self) -> Vec2 {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The same line with its normal reversed.
    pub fn flipped(&self) -> Self {
        LineObject {
            normal: -self.normal,
            offset: -self.offset,
        }
    }
}

#[inline]
pub fn signed_distance(line: &LineObject, point: Vec2) -> f64 {
    line.normal.dot(point) - line.offset
}

/// Smallest and largest projection of `points` onto `direction`.
pub fn projection_extent(points: &[Vec2], direction: Vec2) -> Result<(f64, f64)> {
    let mut it = points.iter().map(|p| p.dot(direction));
    let first = it.next().ok_or(Error::EmptyPath)?;
    Ok(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

/// Convex polygon with counterclockwise vertices. Zero vertices means empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        ConvexPolygon::default()
    }

    /// Wraps vertices, reversing clockwise input.
    pub fn from_vertices(mut vertices: Vec<Vec2>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; zero for degenerate polygons.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            signed_area(&self.vertices).max(0.0)
        }
    }

    /// Keeps the part with `normal·x ≤ bound`.
    pub fn clip(&self, normal: Vec2, bound: f64) -> ConvexPolygon {
        let mut out = Vec::with_capacity(self.vertices.len() + 1);
        clip_into(&self.vertices, normal, bound, &mut out);
        ConvexPolygon { vertices: out }
    }

    /// Intersection with the slab `lo ≤ normal·x ≤ hi`.
    pub fn clip_slab(&self, slab: &Slab) -> ConvexPolygon {
        if slab.lo > slab.hi {
            return ConvexPolygon::empty();
        }
        self.clip(slab.normal, slab.hi).clip(-slab.normal, -slab.lo)
    }
}

fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

/// Sutherland–Hodgman step against one half-plane.
fn clip_into(polygon: &[Vec2], normal: Vec2, bound: f64, out: &mut Vec<Vec2>) {
    out.clear();
    let Some(&last) = polygon.last() else {
        return;
    };
    let mut prev = last;
    let mut prev_d = normal.dot(prev) - bound;
    for &cur in polygon {
        let cur_d = normal.dot(cur) - bound;
        if cur_d <= 0.0 {
            if prev_d > 0.0 {
                out.push(prev + (cur - prev) * (prev_d / (prev_d - cur_d)));
            }
            out.push(cur);
        } else if prev_d <= 0.0 {
            out.push(prev + (cur - prev) * (prev_d / (prev_d - cur_d)));
        }
        prev = cur;
        prev_d = cur_d;
    }
    if out.len() < 3 {
        out.clear();
    }
}

/// `lo ≤ normal·x ≤ hi` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub normal: Vec2,
    pub lo: f64,
    pub hi: f64,
}

/// Picks the pair of slabs whose normals are closest to orthogonal.
fn best_pair(slabs: &[Slab]) -> Option<(usize, usize)> {
    let mut best = None;
    let mut best_cross = 1e-12;
    for i in 0..slabs.len() {
        for j in i + 1..slabs.len() {
            let c = slabs[i].normal.cross(slabs[j].normal).abs();
            if c > best_cross {
                best_cross = c;
                best = Some((i, j));
            }
        }
    }
    best
}

/// Solves `a·x = p`, `b·x = q`.
#[inline]
fn solve2(a: Vec2, p: f64, b: Vec2, q: f64) -> Vec2 {
    let det = a.cross(b);
    Vec2::new((p * b.y - q * a.y) / det, (a.x * q - b.x * p) / det)
}

/// Intersection of slabs. Errors when all normals are parallel, since the
/// intersection is then unbounded.
pub fn slab_intersection(slabs: &[Slab]) -> Result<ConvexPolygon> {
    let (i, j) = best_pair(slabs).ok_or(Error::AllParallel)?;
    let (a, b) = (slabs[i], slabs[j]);
    if a.lo > a.hi || b.lo > b.hi {
        return Ok(ConvexPolygon::empty());
    }
    let corners = vec![
        solve2(a.normal, a.lo, b.normal, b.lo),
        solve2(a.normal, a.hi, b.normal, b.lo),
        solve2(a.normal, a.hi, b.normal, b.hi),
        solve2(a.normal, a.lo, b.normal, b.hi),
    ];
    let mut poly = ConvexPolygon::from_vertices(corners);
    for (k, slab) in slabs.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        poly = poly.clip_slab(slab);
        if poly.is_empty() {
            break;
        }
    }
    Ok(poly)
}

/// Horizontal gap `w` and vertical gap `h` of a tic-tac-toe pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TicTacToe {
    pub w: f64,
    pub h: f64,
}

impl TicTacToe {
    pub fn new(w: f64, h: f64) -> Result<Self> {
        require_positive("w", w)?;
        require_positive("h", h)?;
        Ok(TicTacToe { w, h })
    }

    /// Fixed enclosed `area` at aspect ratio `w/h`.
    pub fn with_ratio(ratio: f64, area: f64) -> Result<Self> {
        require_positive("ratio", ratio)?;
        require_positive("area", area)?;
        TicTacToe::new((area * ratio).sqrt(), (area / ratio).sqrt())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Lines x = 0, x = w, y = 0, y = h.
    pub fn lines(&self) -> [LineObject; 4] {
        [
            LineObject {
                normal: Vec2::new(1.0, 0.0),
                offset: 0.0,
            },
            LineObject {
                normal: Vec2::new(1.0, 0.0),
                offset: self.w,
            },
            LineObject {
                normal: Vec2::new(0.0, 1.0),
                offset: 0.0,
            },
            LineObject {
                normal: Vec2::new(0.0, 1.0),
                offset: self.h,
            },
        ]
    }
}

/// Isosceles triangle with its base on the x-axis, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoTriangle {
    pub base: f64,
    pub height: f64,
}

impl IsoTriangle {
    pub fn new(base: f64, height: f64) -> Result<Self> {
        require_positive("base", base)?;
        require_positive("height", height)?;
        Ok(IsoTriangle { base, height })
    }

    /// Fixed enclosed `area` at ratio `base/height`.
    pub fn with_ratio(ratio: f64, area: f64) -> Result<Self> {
        require_positive("ratio", ratio)?;
        require_positive("area", area)?;
        IsoTriangle::new((2.0 * area * ratio).sqrt(), (2.0 * area / ratio).sqrt())
    }

    pub fn area(&self) -> f64 {
        0.5 * self.base * self.height
    }

    pub fn vertices(&self) -> [Vec2; 3] {
        let b = 0.5 * self.base;
        [Vec2::new(-b, 0.0), Vec2::new(b, 0.0), Vec2::new(0.0, self.height)]
    }

    /// The three side lines with inward normals.
    pub fn lines(&self) -> [LineObject; 3] {
        let v = self.vertices();
        let centroid = (v[0] + v[1] + v[2]) * (1.0 / 3.0);
        let side = |p: Vec2, q: Vec2| {
            let line = LineObject::through(p, q).expect("triangle vertices are distinct");
            if signed_distance(&line, centroid) < 0.0 {
                line.flipped()
            } else {
                line
            }
        };
        [side(v[0], v[1]), side(v[1], v[2]), side(v[2], v[0])]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Line(LineObject),
    Potential(PotentialObject),
}

/// Closed-form geometries the engine recognizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    TicTacToe(TicTacToe),
    IsoTriangle(IsoTriangle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    objects: Vec<Object>,
    shape: Option<Shape>,
}

impl Configuration {
    pub fn new(objects: Vec<Object>) -> Self {
        Configuration { objects, shape: None }
    }

    pub fn from_lines(lines: impl IntoIterator<Item = LineObject>) -> Self {
        Configuration::new(lines.into_iter().map(Object::Line).collect())
    }

    pub fn tictactoe(t: TicTacToe) -> Self {
        Configuration {
            shape: Some(Shape::TicTacToe(t)),
            ..Configuration::from_lines(t.lines())
        }
    }

    pub fn triangle(t: IsoTriangle) -> Self {
        Configuration {
            shape: Some(Shape::IsoTriangle(t)),
            ..Configuration::from_lines(t.lines())
        }
    }

    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    /// Area of the figure enclosed by a named geometry.
    pub fn enclosed_area(&self) -> Option<f64> {
        match self.shape? {
            Shape::TicTacToe(t) => Some(t.area()),
            Shape::IsoTriangle(t) => Some(t.area()),
        }
    }

    pub fn lines(&self) -> Result<Vec<LineObject>> {
        self.objects
            .iter()
            .map(|o| match o {
                Object::Line(l) => Ok(*l),
                Object::Potential(_) => Err(Error::NotLines),
            })
            .collect()
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y) {
            return Err(Error::invalid("box", "rectangle must have positive extent"));
        }
        Ok(Rect { min, max })
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

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, margin: f64) -> Rect {
        Rect {
            min: self.min - Vec2::new(margin, margin),
            max: self.max + Vec2::new(margin, margin),
        }
    }

    /// Whether `other` lies inside `self`.
    pub fn covers(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    /// Point at fractional coordinates `(u, v)` in `[0, 1]²`.
    pub fn at(&self, u: f64, v: f64) -> Vec2 {
        Vec2::new(self.min.x + u * self.width(), self.min.y + v * self.height())
    }
}

/// Per-line loop extents `(m_i, M_i)` along each line normal.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopExtents {
    lines: Vec<LineObject>,
    extents: Vec<(f64, f64)>,
}

impl LoopExtents {
    pub fn new(lines: &[LineObject], bridge: &UnitBridge) -> Self {
        LoopExtents {
            lines: lines.to_vec(),
            extents: lines.iter().map(|l| bridge.extent(l.normal())).collect(),
        }
    }

    pub fn lines(&self) -> &[LineObject] {
        &self.lines
    }

    pub fn extents(&self) -> &[(f64, f64)] {
        &self.extents
    }

    /// Crossing slabs for the loop rescaled by `scale = √β`.
    pub fn slabs(&self, scale: f64) -> Vec<Slab> {
        self.lines
            .iter()
            .zip(&self.extents)
            .map(|(l, &(m, big_m))| Slab {
                normal: l.normal(),
                lo: l.offset() - scale * big_m,
                hi: l.offset() - scale * m,
            })
            .collect()
    }

    pub fn support_polygon(&self, scale: f64) -> Result<ConvexPolygon> {
        slab_intersection(&self.slabs(scale))
    }

    pub fn area(&self, scale: f64) -> Result<f64> {
        Ok(self.support_polygon(scale)?.area())
    }

    /// Whether all lines pass through one point.
    pub fn common_point(&self) -> bool {
        lines_share_point(&self.lines)
    }

    /// Smallest β at which some translate of the rescaled loop crosses
    /// every line.
    ///
    /// With `t = √β` the crossing conditions are linear in `(x, y, t)`, so
    /// the minimum of `t` is attained at a vertex of that polytope; all
    /// vertices are enumerated.
    pub fn minimal_scale(&self) -> Result<f64> {
        if self.lines.len() <= 1 || self.common_point() {
            return Ok(0.0);
        }
        if self.extents.iter().any(|&(m, big_m)| !(big_m - m > 0.0)) {
            return Err(Error::DegenerateLoop);
        }
        if best_pair(&self.slabs(1.0)).is_none() {
            return Err(Error::AllParallel);
        }
        // rows (a, b) meaning a·(x, y, t) ≤ b
        let mut rows: Vec<([f64; 3], f64)> = Vec::with_capacity(2 * self.lines.len() + 1);
        for (l, &(m, big_m)) in self.lines.iter().zip(&self.extents) {
            let n = l.normal();
            rows.push(([-n.x, -n.y, -big_m], -l.offset()));
            rows.push(([n.x, n.y, m], l.offset()));
        }
        rows.push(([0.0, 0.0, -1.0], 0.0));
        let scale = rows.iter().map(|r| r.1.abs()).fold(1.0, f64::max);
        let tol = 1e-9 * scale;
        let mut best = f64::INFINITY;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                for k in j + 1..rows.len() {
                    let Some(v) = solve3([rows[i], rows[j], rows[k]]) else {
                        continue;
                    };
                    if v[2] < best
                        && rows
                            .iter()
                            .all(|(a, b)| a[0] * v[0] + a[1] * v[1] + a[2] * v[2] <= b + tol)
                    {
                        best = v[2];
                    }
                }
            }
        }
        if !best.is_finite() {
            return Err(Error::DegenerateLoop);
        }
        Ok(best.max(0.0).powi(2))
    }
}

/// Cramer's rule; `None` for a (nearly) singular system.
fn solve3(rows: [([f64; 3], f64); 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [rows[0].0, rows[1].0, rows[2].0];
    let d = det(a);
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if d.abs() <= 1e-12 * norm.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = rows[r].1;
        }
        *o = det(m) / d;
    }
    Some(out)
}

fn lines_share_point(lines: &[LineObject]) -> bool {
    let mut best: Option<(usize, usize)> = None;
    let mut best_cross = 1e-12;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let c = lines[i].normal.cross(lines[j].normal).abs();
            if c > best_cross {
                best_cross = c;
                best = Some((i, j));
            }
        }
    }
    let Some((i, j)) = best else {
        // all parallel: a shared point requires identical lines
        return lines
            .windows(2)
            .all(|w| (w[0].offset - w[1].offset * w[0].normal.dot(w[1].normal)).abs() < 1e-12);
    };
    let p = solve2(lines[i].normal, lines[i].offset, lines[j].normal, lines[j].offset);
    let tol = 1e-10 * (1.0 + p.norm());
    lines.iter().all(|l| signed_distance(l, p).abs() <= tol)
}

/// Area of translations for which `√β·ℓ` crosses every line of `config`.
pub fn support_area(config: &Configuration, bridge: &UnitBridge, beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    let lines = config.lines()?;
    LoopExtents::new(&lines, bridge).area(beta.sqrt())
}

/// Infimum β₀ with positive support area for all β > β₀.
pub fn minimal_scale(config: &Configuration, bridge: &UnitBridge) -> Result<f64> {
    let lines = config.lines()?;
    LoopExtents::new(&lines, bridge).minimal_scale()
}
