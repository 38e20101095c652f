//! Upper half-plane geometry: geodesic polygons, right-angled hexagons and their
//! degenerations, symmetric-difference areas, sampled pants and degeneration runs.
//!
//! Areas are always angle deficits. Polygons are convex and counterclockwise.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C;
use serde::Serialize;
use thiserror::Error;

use crate::ghlp::{self, Budget, Provenance, RhoWitness};
use crate::gluing::{glued_distance, GluingSpec};
use crate::space::{DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, SpaceError};

/// Side values below this count as "on the line" when clipping.
const CLIP_TOL: f64 = 1e-12;
/// Pieces with smaller area are dropped from decompositions.
const PIECE_AREA_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HyperbolicError {
    #[error("polygon has nonpositive area {0}")]
    NonpositiveArea(f64),
    #[error("polygon needs at least 3 vertices")]
    TooFewVertices,
    #[error("hexagon side lengths must be finite and nonnegative")]
    BadSpec,
    #[error("specs do not share b1 and b3 (or b1 = 0), no common embedding")]
    NotAlignable,
    #[error("identification: {0}")]
    Identification(String),
    #[error("map violates the q condition at {0:?}")]
    QuasiIsometry((usize, usize)),
    #[error("map violates the mass ratio condition at point {0}")]
    MassRatio(usize),
    #[error("map is not a bijection between the samples")]
    NotBijective,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Witness(#[from] ghlp::WitnessError),
}

/// Point of the open upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(y > 0.0, "point must lie in the upper half-plane");
        HPoint { x, y }
    }

    fn z(self) -> C {
        C::new(self.x, self.y)
    }
}

/// Polygon vertex: a point, an ideal point on the real axis, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Vertex {
    Point { x: f64, y: f64 },
    Ideal { x: f64 },
    Infinity,
}

impl Vertex {
    fn from_z(z: C) -> Self {
        if z.im > 0.0 {
            Vertex::Point { x: z.re, y: z.im }
        } else {
            Vertex::Ideal { x: z.re }
        }
    }

    pub fn is_ideal(&self) -> bool {
        !matches!(self, Vertex::Point { .. })
    }

    pub fn point(&self) -> Option<HPoint> {
        match *self {
            Vertex::Point { x, y } => Some(HPoint { x, y }),
            _ => None,
        }
    }

    /// Complex coordinate, `None` at infinity. Ideal points sit on the real axis.
    fn z(&self) -> Option<C> {
        match *self {
            Vertex::Point { x, y } => Some(C::new(x, y)),
            Vertex::Ideal { x } => Some(C::new(x, 0.0)),
            Vertex::Infinity => None,
        }
    }

    fn close_to(&self, other: &Vertex) -> bool {
        match (self, other) {
            (Vertex::Infinity, Vertex::Infinity) => true,
            (Vertex::Ideal { x: a }, Vertex::Ideal { x: b }) => (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())),
            (Vertex::Point { .. }, Vertex::Point { .. }) => {
                hyp_distance(self.point().expect("point"), other.point().expect("point")) <= 1e-12
            }
            _ => false,
        }
    }
}

/// `d(p, q) = 2 asinh(|p − q| / (2 √(p_y q_y)))`.
pub fn hyp_distance(p: HPoint, q: HPoint) -> f64 {
    2.0 * ((p.z() - q.z()).norm() / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// Geodesic with a direction, given by its ideal endpoints (`None` is ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
struct DirGeodesic {
    from: Option<f64>,
    to: Option<f64>,
}

/// Vertical line `x = c` or semicircle with endpoints `lo < hi`.
#[derive(Debug, Clone, Copy)]
enum Geodesic {
    Line { c: f64 },
    Circle { lo: f64, hi: f64 },
}

impl DirGeodesic {
    fn through(a: &Vertex, b: &Vertex) -> Self {
        match (a.z(), b.z()) {
            (Some(p), None) => DirGeodesic { from: Some(p.re), to: None },
            (None, Some(q)) => DirGeodesic { from: None, to: Some(q.re) },
            (Some(p), Some(q)) => {
                let dx = p.re - q.re;
                if dx.abs() <= 1e-15 * (1.0 + p.re.abs().max(q.re.abs())) {
                    let c = if a.is_ideal() { p.re } else if b.is_ideal() { q.re } else { 0.5 * (p.re + q.re) };
                    if q.im > p.im {
                        DirGeodesic { from: Some(c), to: None }
                    } else {
                        DirGeodesic { from: None, to: Some(c) }
                    }
                } else {
                    // Center from the half-difference form, which keeps x-offsets exact.
                    let c = 0.5 * (p.re + q.re) + (p.im - q.im) * (p.im + q.im) / (2.0 * dx);
                    let r = ((p.re - c).hypot(p.im) + (q.re - c).hypot(q.im)) / 2.0;
                    let (lo, hi) = (c - r, c + r);
                    let (lo, hi) = (
                        if a.is_ideal() && p.re < q.re { p.re } else if b.is_ideal() && q.re < p.re { q.re } else { lo },
                        if a.is_ideal() && p.re > q.re { p.re } else if b.is_ideal() && q.re > p.re { q.re } else { hi },
                    );
                    if p.re < q.re {
                        DirGeodesic { from: Some(lo), to: Some(hi) }
                    } else {
                        DirGeodesic { from: Some(hi), to: Some(lo) }
                    }
                }
            }
            (None, None) => unreachable!("edge from infinity to itself"),
        }
    }

    /// The geodesic traced by walking from the frame's position along its heading.
    fn from_frame(m: &Mobius) -> Self {
        let [a, b, c, d] = m.0;
        let scale = a.abs() + b.abs() + c.abs() + d.abs();
        let end = |num: f64, den: f64| if den.abs() <= 1e-15 * scale { None } else { Some(num / den) };
        DirGeodesic { from: end(b, d), to: end(a, c) }
    }

    fn between(a: &Vertex, b: &Vertex) -> Self {
        let end = |v: &Vertex| v.z().map(|z| z.re);
        DirGeodesic { from: end(a), to: end(b) }
    }

    fn reversed(self) -> Self {
        DirGeodesic { from: self.to, to: self.from }
    }

    fn shape(&self) -> Geodesic {
        match (self.from, self.to) {
            (Some(c), None) | (None, Some(c)) => Geodesic::Line { c },
            (Some(u), Some(v)) => Geodesic::Circle { lo: u.min(v), hi: u.max(v) },
            (None, None) => unreachable!("geodesic needs a finite endpoint"),
        }
    }

    /// `+1` when the left side is `x < c` (lines) or the outside (circles).
    fn left_sign(&self) -> f64 {
        match (self.from, self.to) {
            (Some(_), None) => 1.0,
            (None, _) => -1.0,
            (Some(u), Some(v)) => {
                if u < v {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Unit tangent at `v` in the direction of travel.
    fn tangent(&self, v: C) -> C {
        match self.shape() {
            Geodesic::Line { .. } => C::new(0.0, self.left_sign()),
            Geodesic::Circle { lo, hi } => {
                let rho = v - (lo + 0.5 * (hi - lo));
                let t = C::new(rho.im, -rho.re) * self.left_sign();
                t / t.norm()
            }
        }
    }

    fn left(&self) -> HalfPlane {
        HalfPlane { g: *self }
    }
}

/// Angle between `−t_in` and `t_out`.
fn corner_angle(t_in: C, t_out: C) -> f64 {
    let a = -t_in;
    let cross = a.re * t_out.im - a.im * t_out.re;
    let dot = a.re * t_out.re + a.im * t_out.im;
    cross.abs().atan2(dot)
}

/// Geodesic polygon with interior angles (0 at ideal vertices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPolygon {
    pub vertices: Vec<Vertex>,
    pub angles: Vec<f64>,
    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    #[serde(skip)]
    edges: Vec<DirGeodesic>,
}

impl GeodesicPolygon {
    /// Convex polygon through the given vertices; angles come from the edge tangents.
    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<Self, HyperbolicError> {
        let n = vertices.len();
        if n < 3 {
            return Err(HyperbolicError::TooFewVertices);
        }
        let edges = (0..n).map(|i| DirGeodesic::through(&vertices[i], &vertices[(i + 1) % n])).collect();
        Self::with_edges(vertices, edges)
    }

    fn with_edges(vertices: Vec<Vertex>, edges: Vec<DirGeodesic>) -> Result<Self, HyperbolicError> {
        let n = vertices.len();
        if n < 3 {
            return Err(HyperbolicError::TooFewVertices);
        }
        let angles = (0..n)
            .map(|i| match vertices[i] {
                Vertex::Point { x, y } => {
                    let v = C::new(x, y);
                    corner_angle(edges[(i + n - 1) % n].tangent(v), edges[i].tangent(v))
                }
                _ => 0.0,
            })
            .collect();
        Ok(GeodesicPolygon { vertices, angles, edges })
    }

    pub fn area(&self) -> Result<f64, HyperbolicError> {
        polygon_area(self)
    }

    /// Lengths of the edges `v_i v_{i+1}`, infinite at ideal vertices.
    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| match (self.vertices[i].point(), self.vertices[(i + 1) % n].point()) {
                (Some(p), Some(q)) => hyp_distance(p, q),
                _ => f64::INFINITY,
            })
            .collect()
    }

    fn transformed(&self, m: &Mobius) -> Result<Self, HyperbolicError> {
        Self::from_vertices(self.vertices.iter().map(|v| m.apply_vertex(v)).collect())
    }
}

/// `(n − 2)π − Σ angles`.
pub fn polygon_area(poly: &GeodesicPolygon) -> Result<f64, HyperbolicError> {
    let n = poly.vertices.len();
    if n < 3 {
        return Err(HyperbolicError::TooFewVertices);
    }
    let a = (n as f64 - 2.0) * PI - poly.angles.iter().sum::<f64>();
    if a > 0.0 {
        Ok(a)
    } else {
        Err(HyperbolicError::NonpositiveArea(a))
    }
}

/// Orientation-preserving isometry `z ↦ (az + b)/(cz + d)`.
#[derive(Debug, Clone, Copy)]
struct Mobius([f64; 4]);

impl Mobius {
    const IDENTITY: Mobius = Mobius([1.0, 0.0, 0.0, 1.0]);

    fn mul(&self, o: &Mobius) -> Mobius {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mobius([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    /// Unit-speed move of length `s` along the current heading (up at `i`).
    fn walk(&self, s: f64) -> Mobius {
        self.mul(&Mobius([(s / 2.0).exp(), 0.0, 0.0, (-s / 2.0).exp()]))
    }

    /// Counterclockwise rotation of the heading by `phi`.
    fn turn(&self, phi: f64) -> Mobius {
        let (s, c) = (phi / 2.0).sin_cos();
        self.mul(&Mobius([c, s, -s, c]))
    }

    fn apply(&self, z: C) -> Option<C> {
        let [a, b, c, d] = self.0;
        let den = z * c + d;
        if den.norm() == 0.0 {
            None
        } else {
            Some((z * a + b) / den)
        }
    }

    /// Image of the point at infinity, snapped to infinity when `c` is rounding noise.
    fn apply_inf(&self) -> Vertex {
        let [a, _, c, d] = self.0;
        if c.abs() <= 1e-15 * (a.abs() + d.abs()) {
            Vertex::Infinity
        } else {
            Vertex::Ideal { x: a / c }
        }
    }

    fn apply_vertex(&self, v: &Vertex) -> Vertex {
        match v.z() {
            None => self.apply_inf(),
            Some(z) => match self.apply(z) {
                None => Vertex::Infinity,
                Some(w) => match v {
                    Vertex::Point { .. } => Vertex::from_z(C::new(w.re, w.im.max(f64::MIN_POSITIVE))),
                    _ => Vertex::Ideal { x: w.re },
                },
            },
        }
    }

    /// Current position (image of `i`).
    fn here(&self) -> Vertex {
        Vertex::from_z(self.apply(C::i()).expect("i maps to a finite point"))
    }
}

/// Alternate side lengths of a right-angled hexagon; 0 collapses that side to an ideal vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HexagonSpec {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl HexagonSpec {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Self {
        HexagonSpec { b1, b2, b3 }
    }

    fn valid(&self) -> bool {
        [self.b1, self.b2, self.b3].iter().all(|b| b.is_finite() && *b >= 0.0)
    }

    fn b(&self, k: usize) -> f64 {
        [self.b1, self.b2, self.b3][k]
    }
}

/// Length of the side opposite `b_k` between `b_i` and `b_j`:
/// `cosh c = (cosh b_i cosh b_j + cosh b_k)/(sinh b_i sinh b_j)`, infinite if `b_i` or `b_j` is 0.
fn opposite_side(bi: f64, bj: f64, bk: f64) -> f64 {
    if bi == 0.0 || bj == 0.0 {
        return f64::INFINITY;
    }
    ((bi.cosh() * bj.cosh() + bk.cosh()) / (bi.sinh() * bj.sinh())).acosh()
}

/// Hexagon together with the six nominal corners V1..V6 (a zero side repeats its ideal vertex).
#[derive(Debug, Clone)]
struct HexagonLayout {
    polygon: GeodesicPolygon,
    /// Polygon index of V1..V6.
    corners: [usize; 6],
}

/// Nominal sides in cyclic order: b1 = V1V2, c3 = V2V3, b2 = V3V4, c1 = V4V5, b3 = V5V6, c2 = V6V1.
fn nominal_sides(spec: &HexagonSpec) -> [f64; 6] {
    let (b1, b2, b3) = (spec.b1, spec.b2, spec.b3);
    [b1, opposite_side(b1, b2, b3), b2, opposite_side(b2, b3, b1), b3, opposite_side(b3, b1, b2)]
}

/// Walks the hexagon from the end of its first positive b-side, with `frame` placing that
/// vertex and the heading along the following side. Edges are taken from the walking
/// frames, so long thin hexagons keep exact geodesics.
fn layout_hexagon(spec: &HexagonSpec, frame: Mobius) -> Result<HexagonLayout, HyperbolicError> {
    if !spec.valid() {
        return Err(HyperbolicError::BadSpec);
    }
    let sides = nominal_sides(spec);
    let Some(anchor) = (0..3).find(|&k| spec.b(k) > 0.0) else {
        // Ideal triangle.
        let polygon = GeodesicPolygon::from_vertices(vec![
            Vertex::Ideal { x: -1.0 },
            Vertex::Ideal { x: 1.0 },
            Vertex::Infinity,
        ])?;
        return Ok(HexagonLayout { polygon, corners: [0, 0, 1, 1, 2, 2] });
    };
    let a_side = 2 * anchor;
    let corner_after = |side: usize| (side + 1) % 6;

    // (vertex, nominal corner, outgoing edge)
    let mut fwd: Vec<(Vertex, usize, DirGeodesic)> = Vec::new();
    let mut here = (frame.here(), corner_after(a_side));
    let mut m = frame;
    let mut fwd_stop = None;
    let closed = sides.iter().all(|s| s.is_finite());
    // A closed hexagon is walked two sides forward and three back, then joined; a full
    // loop would carry rounding from the far end of a long side back to the start.
    let fwd_sides = if closed { 2 } else { 5 };
    for k in 1..=fwd_sides {
        let s = (a_side + k) % 6;
        fwd.push((here.0, here.1, DirGeodesic::from_frame(&m)));
        if sides[s].is_infinite() {
            fwd_stop = Some((m.apply_inf(), s));
            break;
        }
        m = m.walk(sides[s]);
        here = (m.here(), corner_after(s));
        m = m.turn(FRAC_PI_2);
    }
    let join_from = DirGeodesic::from_frame(&m).from;
    if closed {
        fwd.push((here.0, here.1, DirGeodesic { from: join_from, to: None }));
    }
    let mut vertices: Vec<Vertex> = fwd.iter().map(|p| p.0).collect();
    let mut edges: Vec<DirGeodesic> = fwd.iter().map(|p| p.2).collect();
    let mut corners = [usize::MAX; 6];
    for (i, p) in fwd.iter().enumerate() {
        corners[p.1] = i;
    }
    // Backward from the anchor's end vertex: anchor reversed, then earlier sides.
    // Each entry carries the edge leaving it in the forward direction.
    let mut bwd: Vec<(Vertex, usize, DirGeodesic)> = Vec::new();
    let mut m = frame.turn(FRAC_PI_2);
    let mut bwd_stop = None;
    let bwd_sides = if closed { 3 } else { 6 };
    for k in 0..bwd_sides {
        let s = (a_side + 6 - k) % 6;
        let back_edge = DirGeodesic::from_frame(&m).reversed();
        if sides[s].is_infinite() {
            bwd_stop = Some((m.apply_inf(), s, back_edge));
            break;
        }
        m = m.walk(sides[s]);
        bwd.push((m.here(), s, back_edge));
        m = m.turn(-FRAC_PI_2);
    }
    if closed {
        let last = edges.len() - 1;
        edges[last].to = DirGeodesic::from_frame(&m).reversed().to;
    } else {
        let (ideal_f, s_f) = fwd_stop.expect("open hexagon has an infinite side");
        let (ideal_b, s_b, edge_b) = bwd_stop.expect("infinite sides come in pairs");
        let fi = vertices.len();
        let mut s = s_f;
        while s != s_b {
            corners[corner_after(s)] = fi;
            s = (s + 1) % 6;
        }
        vertices.push(ideal_f);
        if ideal_f.close_to(&ideal_b) {
            edges.push(edge_b);
        } else {
            edges.push(DirGeodesic::between(&ideal_f, &ideal_b));
            vertices.push(ideal_b);
            edges.push(edge_b);
            let mut s = (s_f + 2) % 6;
            while s != s_b {
                corners[corner_after(s)] = fi + 1;
                s = (s + 1) % 6;
            }
        }
    }
    for &(v, c, e) in bwd.iter().rev() {
        corners[c] = vertices.len();
        vertices.push(v);
        edges.push(e);
    }
    debug_assert!(corners.iter().all(|&c| c < vertices.len()));
    // V1 first.
    let start = corners[0];
    let n = vertices.len();
    vertices.rotate_left(start);
    edges.rotate_left(start);
    for c in corners.iter_mut() {
        *c = (*c + n - start) % n;
    }
    let polygon = GeodesicPolygon::with_edges(vertices, edges)?;
    Ok(HexagonLayout { polygon, corners })
}

/// Heading right at `i`: the first positive b-side ends at `i` coming down the imaginary axis.
fn canonical_frame() -> Mobius {
    Mobius::IDENTITY.turn(-FRAC_PI_2)
}

/// Right-angled hexagon with alternate sides `b1, b2, b3` in the canonical position:
/// the first positive side runs down the imaginary axis from `i·e^b` to `i`, vertices
/// counterclockwise. Zero sides become ideal vertices.
pub fn build_hexagon(spec: HexagonSpec) -> Result<GeodesicPolygon, HyperbolicError> {
    Ok(layout_hexagon(&spec, canonical_frame())?.polygon)
}

/// Lengths of the b-sides measured back from a built hexagon (0 for collapsed sides).
pub fn measure_alternate_sides(spec: HexagonSpec) -> Result<[f64; 3], HyperbolicError> {
    let lay = layout_hexagon(&spec, canonical_frame())?;
    let v = &lay.polygon.vertices;
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let (a, b) = (lay.corners[2 * k], lay.corners[2 * k + 1]);
        if a != b {
            *o = match (v[a].point(), v[b].point()) {
                (Some(p), Some(q)) => hyp_distance(p, q),
                _ => f64::INFINITY,
            };
        }
    }
    Ok(out)
}

/// Half-plane to the left of a directed geodesic; `value > 0` inside.
#[derive(Debug, Clone, Copy)]
struct HalfPlane {
    g: DirGeodesic,
}

impl HalfPlane {
    fn flipped(self) -> Self {
        HalfPlane { g: self.g.reversed() }
    }

    /// Signed side value: `sinh` of the hyperbolic distance to the geodesic for finite
    /// points, a scale-free ratio for ideal ones.
    fn value(&self, v: &Vertex) -> f64 {
        let raw = match (self.g.shape(), v.z()) {
            (Geodesic::Line { .. }, None) => 0.0,
            (Geodesic::Circle { .. }, None) => 1.0,
            (Geodesic::Line { c }, Some(z)) => {
                if z.im > 0.0 {
                    (c - z.re) / z.im
                } else if c == z.re {
                    0.0
                } else {
                    (c - z.re).signum()
                }
            }
            (Geodesic::Circle { lo, hi }, Some(z)) => {
                // |z − c|² − r² from the endpoints.
                let power = (z.re - lo) * (z.re - hi) + z.im * z.im;
                let r = 0.5 * (hi - lo);
                if z.im > 0.0 {
                    power / (2.0 * r * z.im)
                } else {
                    let dx = z.re - (lo + r);
                    power / (dx * dx + r * r)
                }
            }
        };
        raw * self.g.left_sign()
    }

    /// Crossing of this geodesic with `other`.
    fn crossing(&self, other: &DirGeodesic) -> Vertex {
        let to_vertex = |x: f64, y2: f64| {
            if y2 > 0.0 {
                Vertex::Point { x, y: y2.sqrt() }
            } else {
                Vertex::Ideal { x }
            }
        };
        match (self.g.shape(), other.shape()) {
            (Geodesic::Line { .. }, Geodesic::Line { .. }) => Vertex::Infinity,
            (Geodesic::Line { c }, Geodesic::Circle { lo, hi }) | (Geodesic::Circle { lo, hi }, Geodesic::Line { c }) => {
                to_vertex(c, (c - lo) * (hi - c))
            }
            (Geodesic::Circle { lo: a1, hi: b1 }, Geodesic::Circle { lo: a2, hi: b2 }) => {
                // Solve (x − a1)(b1 − x) = (x − a2)(b2 − x) in coordinates shifted by a1,
                // so huge far endpoints do not swamp the crossing.
                let (b1, a2, b2) = (b1 - a1, a2 - a1, b2 - a1);
                let t = -a2 * b2 / (b1 - a2 - b2);
                to_vertex(a1 + t, t * (b1 - t))
            }
        }
    }
}

/// Collapses repeated vertices; the later copy's outgoing edge is kept.
fn dedupe(vs: Vec<(Vertex, DirGeodesic)>) -> Vec<(Vertex, DirGeodesic)> {
    let mut out: Vec<(Vertex, DirGeodesic)> = Vec::with_capacity(vs.len());
    for (v, e) in vs {
        match out.last_mut() {
            Some(last) if last.0.close_to(&v) => last.1 = e,
            _ => out.push((v, e)),
        }
    }
    while out.len() > 1 && out[0].0.close_to(&out.last().expect("nonempty").0) {
        out.pop();
    }
    out
}

/// Sutherland–Hodgman step with geodesic edges.
fn clip(poly: &[(Vertex, DirGeodesic)], h: &HalfPlane) -> Vec<(Vertex, DirGeodesic)> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, e) = poly[i];
        let q = poly[(i + 1) % n].0;
        let (sp, sq) = (h.value(&p), h.value(&q));
        let (p_in, p_on) = (sp > CLIP_TOL, sp.abs() <= CLIP_TOL);
        let (q_in, q_on) = (sq > CLIP_TOL, sq.abs() <= CLIP_TOL);
        let q_out = !q_in && !q_on;
        if p_in && q_out {
            out.push((p, e));
            out.push((h.crossing(&e), h.g));
        } else if p_on && q_out {
            out.push((p, h.g));
        } else if p_in || p_on {
            out.push((p, e));
        } else if q_in {
            out.push((h.crossing(&e), e));
        }
    }
    dedupe(out)
}

fn polygon_from_clip(vs: Vec<(Vertex, DirGeodesic)>) -> Result<GeodesicPolygon, HyperbolicError> {
    let (v, e) = vs.into_iter().unzip();
    GeodesicPolygon::with_edges(v, e)
}

/// `A ∖ B` as pieces `A ∩ h_1 ∩ … ∩ h_{i−1} ∩ ¬h_i` over the sides `h_i` of `B`.
fn difference_pieces(a: &GeodesicPolygon, b: &GeodesicPolygon) -> Result<Vec<GeodesicPolygon>, HyperbolicError> {
    let mut pieces = Vec::new();
    let mut rest: Vec<(Vertex, DirGeodesic)> = a.vertices.iter().copied().zip(a.edges.iter().copied()).collect();
    for h in b.edges.iter().map(DirGeodesic::left) {
        let outside = clip(&rest, &h.flipped());
        if outside.len() >= 3 {
            let p = polygon_from_clip(outside)?;
            if polygon_area(&p).is_ok_and(|x| x > PIECE_AREA_FLOOR) {
                pieces.push(p);
            }
        }
        rest = clip(&rest, &h);
        if rest.len() < 3 {
            break;
        }
    }
    Ok(pieces)
}

/// The closed-form value `π − 2θ − β` of the symmetric difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub theta: f64,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricDifference {
    pub area: f64,
    /// Convex pieces of `(H1 ∖ H2) ∪ (H2 ∖ H1)`, in the comparison frame.
    pub pieces: Vec<GeodesicPolygon>,
    /// Only for `(b1, b2, b3)` against `(b1, 0, b3)` when the c1 ray of the degenerate
    /// hexagon crosses the b2 side of the other.
    pub closed_form: Option<ClosedForm>,
}

/// `θ` from the cusp picture: with the ideal vertex at ∞ and `V2 = i`, the degenerate
/// hexagon's c1 ray is `x = w`, `w = (cosh b1 + cosh b3)/sinh b1`, and the b2 side of the
/// other hexagon lies on `|z| = e^{c3}`, so `cos θ = w e^{−c3}`. The picture holds when the
/// crossing lies on both the b2 segment and the ray above the b3 foot `r = sinh b3/sinh b1`.
fn closed_form(b1: f64, b2: f64, b3: f64) -> Option<ClosedForm> {
    if b1 <= 0.0 || b2 <= 0.0 || b3 <= 0.0 {
        return None;
    }
    let w = (b1.cosh() + b3.cosh()) / b1.sinh();
    let foot = b3.sinh() / b1.sinh();
    let c3 = opposite_side(b1, b2, b3);
    let big_r = c3.exp();
    let on_segment = w <= big_r * b2.tanh();
    let on_ray = (big_r - w) * (big_r + w) >= foot * foot;
    if !(on_segment && on_ray) {
        return None;
    }
    let theta = (w / big_r).acos();
    Some(ClosedForm { theta, beta: 0.0, value: PI - 2.0 * theta })
}

/// Symmetric difference of two hexagons glued along their common b1 side and the
/// vertex V2, both heading up the imaginary axis along c3 from `V2 = i` (so a collapsed
/// b2 puts the ideal vertex at ∞).
pub fn symmetric_difference_area(s1: HexagonSpec, s2: HexagonSpec) -> Result<SymmetricDifference, HyperbolicError> {
    if !s1.valid() || !s2.valid() {
        return Err(HyperbolicError::BadSpec);
    }
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
    if !same(s1.b1, s2.b1) || !same(s1.b3, s2.b3) || s1.b1 == 0.0 {
        return Err(HyperbolicError::NotAlignable);
    }
    let h1 = layout_hexagon(&s1, Mobius::IDENTITY)?.polygon;
    let h2 = layout_hexagon(&s2, Mobius::IDENTITY)?.polygon;
    let mut pieces = difference_pieces(&h1, &h2)?;
    pieces.extend(difference_pieces(&h2, &h1)?);
    let area = pieces.iter().map(|p| polygon_area(p).expect("filtered")).sum();
    let closed_form = if s2.b2 == 0.0 && s1.b2 > 0.0 {
        closed_form(s1.b1, s1.b2, s1.b3)
    } else if s1.b2 == 0.0 && s2.b2 > 0.0 {
        closed_form(s2.b1, s2.b2, s2.b3)
    } else {
        None
    };
    Ok(SymmetricDifference { area, pieces, closed_form })
}

// --- Sampling -------------------------------------------------------------

fn to_klein(v: &Vertex) -> [f64; 2] {
    match v.z() {
        None => [1.0, 0.0],
        Some(z) => {
            let w = (z - C::i()) / (z + C::i());
            let k = w * (2.0 / (1.0 + w.norm_sqr()));
            [k.re, k.im]
        }
    }
}

fn from_klein(k: [f64; 2]) -> Vertex {
    let r2 = k[0] * k[0] + k[1] * k[1];
    let w = C::new(k[0], k[1]) / (1.0 + (1.0 - r2).max(0.0).sqrt());
    if r2 >= 1.0 {
        if (w - 1.0).norm() < 1e-15 {
            return Vertex::Infinity;
        }
        return Vertex::Ideal { x: (C::i() * (1.0 + w) / (1.0 - w)).re };
    }
    let z = C::i() * (1.0 + w) / (1.0 - w);
    Vertex::Point { x: z.re, y: z.im.max(f64::MIN_POSITIVE) }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Identifies edge `edge_a` of piece `piece_a` with edge `edge_b` of `piece_b`.
/// Edge `i` runs from vertex `i` to vertex `i + 1`; `reversed` pairs start with end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Identification {
    pub piece_a: usize,
    pub edge_a: usize,
    pub piece_b: usize,
    pub edge_b: usize,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub piece: usize,
    /// Fan triangle, then the subdivision path.
    pub key: String,
    pub centroid: HPoint,
    pub area: f64,
    /// Largest distance from the centroid to a corner; infinite with an ideal corner.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceProvenance {
    pub pieces: usize,
    pub identifications: Vec<Identification>,
    pub depth: u32,
    pub seam_spacing: SeamSpacing,
    pub seam_samples: usize,
    pub cells: Vec<Cell>,
    /// `min_r max(r, mass of cells with radius ≥ r)`: moving each cell's area to its
    /// centroid changes the measure by at most this in `d_π`.
    pub mesh_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSurface {
    pub space: FiniteSpace<f64>,
    pub provenance: SurfaceProvenance,
}

fn mesh_bound(cells: &[Cell]) -> f64 {
    let mut radii: Vec<f64> = cells.iter().map(|c| c.radius).filter(|r| r.is_finite()).collect();
    radii.push(0.0);
    radii.sort_by(f64::total_cmp);
    radii
        .iter()
        .map(|&r| {
            let beyond: f64 = cells.iter().filter(|c| c.radius > r).map(|c| c.area).sum();
            r.max(beyond)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Cells of a fan triangulation from `corners[0]` over the given corner cycle, each
/// triangle split `depth` times at Klein midpoints. Repeated corners give no triangle.
fn triangulate(vertices: &[Vertex], cycle: &[usize], depth: u32, piece: usize) -> Result<Vec<Cell>, HyperbolicError> {
    let mut cells = Vec::new();
    for j in 1..cycle.len() - 1 {
        let (a, b, c) = (cycle[0], cycle[j], cycle[j + 1]);
        if a == b || b == c || a == c {
            continue;
        }
        let tri = [to_klein(&vertices[a]), to_klein(&vertices[b]), to_klein(&vertices[c])];
        let ideal = [vertices[a].is_ideal(), vertices[b].is_ideal(), vertices[c].is_ideal()];
        subdivide(tri, ideal, depth, format!("p{piece}/t{j}/"), piece, &mut cells)?;
    }
    Ok(cells)
}

fn subdivide(
    t: [[f64; 2]; 3],
    ideal: [bool; 3],
    depth: u32,
    key: String,
    piece: usize,
    out: &mut Vec<Cell>,
) -> Result<(), HyperbolicError> {
    if depth == 0 {
        let verts: Vec<Vertex> = (0..3)
            .map(|i| if ideal[i] { from_klein(t[i]) } else { finite_from_klein(t[i]) })
            .collect();
        let poly = GeodesicPolygon::from_vertices(verts.clone())?;
        let area = polygon_area(&poly)?;
        let centroid = finite_from_klein([(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0])
            .point()
            .expect("centroid is interior");
        let radius = verts
            .iter()
            .map(|v| v.point().map_or(f64::INFINITY, |p| hyp_distance(centroid, p)))
            .fold(0.0, f64::max);
        out.push(Cell { piece, key, centroid, area, radius });
        return Ok(());
    }
    let m = [lerp(t[1], t[2], 0.5), lerp(t[2], t[0], 0.5), lerp(t[0], t[1], 0.5)];
    let kids = [
        ([t[0], m[2], m[1]], [ideal[0], false, false]),
        ([m[2], t[1], m[0]], [false, ideal[1], false]),
        ([m[1], m[0], t[2]], [false, false, ideal[2]]),
        ([m[0], m[1], m[2]], [false, false, false]),
    ];
    for (i, (kt, ki)) in kids.into_iter().enumerate() {
        subdivide(kt, ki, depth - 1, format!("{key}{i}"), piece, out)?;
    }
    Ok(())
}

/// Klein point known to be interior; rounding toward the boundary is pulled back.
fn finite_from_klein(k: [f64; 2]) -> Vertex {
    let r2 = k[0] * k[0] + k[1] * k[1];
    let k = if r2 >= 1.0 - 1e-15 {
        let s = ((1.0 - 1e-15) / r2).sqrt();
        [k[0] * s, k[1] * s]
    } else {
        k
    };
    from_klein(k)
}

/// Points along edge `a → b` at hyperbolic arc length `t_k` from the base end.
/// Finite edges get `segments + 1` evenly spaced points; edges with one ideal end are
/// sampled from the finite end every `ray_step` up to `ray_len`.
fn seam_points(a: &Vertex, b: &Vertex, segments: usize, ray_step: f64, ray_len: f64) -> Result<Vec<HPoint>, HyperbolicError> {
    let (ka, kb) = (to_klein(a), to_klein(b));
    let at = |s: f64| finite_from_klein(lerp(ka, kb, s)).point().expect("interior");
    let (base, toward_b) = match (a.point(), b.point()) {
        (Some(p), _) => (p, true),
        (None, Some(q)) => (q, false),
        (None, None) => {
            return Err(HyperbolicError::Identification("edge between two ideal vertices".into()));
        }
    };
    let param_at_distance = |t: f64| -> HPoint {
        // Bisection on the Klein parameter measured from the base end.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s = if toward_b { mid } else { 1.0 - mid };
            if hyp_distance(base, at(s)) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        at(if toward_b { s } else { 1.0 - s })
    };
    let mut pts = Vec::new();
    match (a.point(), b.point()) {
        (Some(p), Some(q)) => {
            let len = hyp_distance(p, q);
            pts.push(p);
            for k in 1..segments {
                pts.push(param_at_distance(len * k as f64 / segments as f64));
            }
            pts.push(q);
        }
        _ => {
            pts.push(base);
            let mut t = ray_step;
            while t <= ray_len + 1e-12 {
                pts.push(param_at_distance(t));
                t += ray_step;
            }
        }
    }
    Ok(pts)
}

/// Points along edge `a → b` at Klein parameters `k/segments`; an ideal end is skipped.
/// Samples move continuously with the vertices, also when an end goes ideal.
fn klein_seam_points(a: &Vertex, b: &Vertex, segments: usize) -> Result<Vec<HPoint>, HyperbolicError> {
    if a.is_ideal() && b.is_ideal() {
        return Err(HyperbolicError::Identification("edge between two ideal vertices".into()));
    }
    let (ka, kb) = (to_klein(a), to_klein(b));
    Ok((0..=segments)
        .filter_map(|k| match k {
            0 => a.point(),
            k if k == segments => b.point(),
            k => finite_from_klein(lerp(ka, kb, k as f64 / segments as f64)).point(),
        })
        .collect())
}

/// How seams between pieces are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeamSpacing {
    /// Even arc length on finite edges, fixed steps along edges to a cusp.
    ArcLength,
    /// Even Klein parameter, `2^(depth+1)` segments per edge.
    Klein,
}

/// Samples convex pieces with identified edges into a finite space of cell centroids.
///
/// Within a piece distances are hyperbolic; across pieces they run through seam samples,
/// glued with δ = 0 one piece at a time. Every identification must join a new piece to
/// the earlier ones or two earlier pieces.
pub fn sample_surface(
    pieces: &[GeodesicPolygon],
    identifications: &[Identification],
    depth: u32,
) -> Result<SampledSurface, HyperbolicError> {
    let fans: Vec<Vec<usize>> = pieces.iter().map(|p| (0..p.vertices.len()).collect()).collect();
    sample_with_fans(pieces, &fans, identifications, depth, SeamSpacing::ArcLength)
}

fn sample_with_fans(
    pieces: &[GeodesicPolygon],
    fans: &[Vec<usize>],
    identifications: &[Identification],
    depth: u32,
    spacing: SeamSpacing,
) -> Result<SampledSurface, HyperbolicError> {
    let segments = 1usize << depth;
    let ray_step = 4.0 / segments as f64;
    let ray_len = 6.0;

    // Per-piece node lists: cells first, then seam samples.
    let mut cells_per_piece = Vec::new();
    let mut seam_per_piece: Vec<Vec<HPoint>> = vec![Vec::new(); pieces.len()];
    let mut seam_index: Vec<(usize, usize, usize)> = Vec::new(); // (piece, edge, offset into seams)
    for (p, poly) in pieces.iter().enumerate() {
        cells_per_piece.push(triangulate(&poly.vertices, &fans[p], depth, p)?);
    }
    let mut pairs_global: Vec<((usize, usize), (usize, usize))> = Vec::new(); // ((piece, node), (piece, node))
    for id in identifications {
        if id.piece_a >= pieces.len() || id.piece_b >= pieces.len() || id.piece_a == id.piece_b {
            return Err(HyperbolicError::Identification(format!("bad pieces in {id:?}")));
        }
        let mut edge_samples = |piece: usize, edge: usize, rev: bool| -> Result<Vec<usize>, HyperbolicError> {
            let vs = &pieces[piece].vertices;
            if edge >= vs.len() {
                return Err(HyperbolicError::Identification(format!("edge {edge} out of range")));
            }
            let (a, b) = (vs[edge], vs[(edge + 1) % vs.len()]);
            let (a, b) = if rev { (b, a) } else { (a, b) };
            let pts = match spacing {
                SeamSpacing::ArcLength => seam_points(&a, &b, segments, ray_step, ray_len)?,
                SeamSpacing::Klein => klein_seam_points(&a, &b, 2 * segments)?,
            };
            let n_cells = cells_per_piece[piece].len();
            let start = seam_per_piece[piece].len();
            seam_index.push((piece, edge, start));
            seam_per_piece[piece].extend(pts.iter().copied());
            Ok((0..pts.len()).map(|k| n_cells + start + k).collect())
        };
        let sa = edge_samples(id.piece_a, id.edge_a, false)?;
        let sb = edge_samples(id.piece_b, id.edge_b, id.reversed)?;
        if sa.len() != sb.len() {
            return Err(HyperbolicError::Identification(format!("edges of {id:?} have different lengths")));
        }
        pairs_global.extend(sa.into_iter().zip(sb).map(|(x, y)| ((id.piece_a, x), (id.piece_b, y))));
    }

    let piece_matrix = |p: usize| -> DistanceMatrix<f64> {
        let nodes: Vec<HPoint> = cells_per_piece[p]
            .iter()
            .map(|c| c.centroid)
            .chain(seam_per_piece[p].iter().copied())
            .collect();
        DistanceMatrix::from_fn(nodes.len(), |i, j| Finite(hyp_distance(nodes[i], nodes[j])))
    };

    // Glue pieces one at a time; offsets[p] is piece p's first node in the running matrix.
    let mut offsets = vec![0usize; pieces.len()];
    let mut current = piece_matrix(0);
    for p in 1..pieces.len() {
        offsets[p] = current.len();
        let next = piece_matrix(p);
        let mut pairs = Vec::new();
        for &((pa, xa), (pb, xb)) in &pairs_global {
            if pb == p && pa < p {
                pairs.push((offsets[pa] + xa, xb));
            } else if pa == p && pb < p {
                pairs.push((offsets[pb] + xb, xa));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let g = glued_distance(&current, &next, GluingSpec::new(pairs, 0.0)).map_err(ghlp::WitnessError::from)?;
        current = g.dist;
    }
    // Identifications between two earlier pieces are already-placed nodes; close over them.
    let mut extra = false;
    for &((pa, xa), (pb, xb)) in &pairs_global {
        let (i, j) = (offsets[pa] + xa, offsets[pb] + xb);
        if current.get(i, j) != ExtendedDistance::zero() {
            current.set(i, j, ExtendedDistance::zero());
            extra = true;
        }
    }
    if extra {
        current.metric_closure();
    }

    let mut keep = Vec::new();
    let mut cells = Vec::new();
    for (p, cs) in cells_per_piece.into_iter().enumerate() {
        for (k, c) in cs.into_iter().enumerate() {
            keep.push(offsets[p] + k);
            cells.push(c);
        }
    }
    let dist = current.restrict(&keep);
    let labels = cells.iter().map(|c| c.key.clone()).collect();
    let mass = cells.iter().map(|c| c.area).collect();
    let space = FiniteSpace::with_tol(labels, dist, mass, 1e-9)?;
    let provenance = SurfaceProvenance {
        pieces: pieces.len(),
        identifications: identifications.to_vec(),
        depth,
        seam_spacing: spacing,
        seam_samples: seam_per_piece.iter().map(Vec::len).sum(),
        mesh_bound: mesh_bound(&cells),
        cells,
    };
    Ok(SampledSurface { space, provenance })
}

/// Default subdivision depth for pants samples.
pub const DEFAULT_DEPTH: u32 = 2;

/// Pants with boundary lengths `(l1, l2, l3)` (0 = cusp): two copies of the hexagon
/// with `b_i = l_i/2` glued along their three c-sides.
pub fn build_pants(lengths: [f64; 3], depth: u32) -> Result<SampledSurface, HyperbolicError> {
    let spec = HexagonSpec::new(lengths[0] / 2.0, lengths[1] / 2.0, lengths[2] / 2.0);
    let lay = layout_hexagon(&spec, canonical_frame())?;
    let n = lay.polygon.vertices.len();
    let mut ids = Vec::new();
    // c-sides are V2V3, V4V5, V6V1; collapsed ones (both ends ideal or equal) are skipped.
    for (from, to) in [(1usize, 2usize), (3, 4), (5, 0)] {
        let (a, b) = (lay.corners[from], lay.corners[to]);
        if a == b || (a + 1) % n != b {
            continue;
        }
        let v = &lay.polygon.vertices;
        if v[a].is_ideal() && v[b].is_ideal() {
            continue;
        }
        ids.push(Identification { piece_a: 0, edge_a: a, piece_b: 1, edge_b: a, reversed: false });
    }
    // Fan over the nominal corners so that hexagons with and without collapsed sides
    // share cell keys.
    let fan: Vec<usize> = lay.corners.to_vec();
    let pieces = [lay.polygon.clone(), lay.polygon];
    sample_with_fans(&pieces, &[fan.clone(), fan], &ids, depth, SeamSpacing::Klein)
}

/// Hint pairs `(i, j)` matching cells with equal keys.
pub fn matching_cells(a: &SampledSurface, b: &SampledSurface) -> Vec<(usize, usize)> {
    let index: std::collections::HashMap<&str, usize> =
        b.space.labels().iter().enumerate().map(|(j, l)| (l.as_str(), j)).collect();
    a.space
        .labels()
        .iter()
        .enumerate()
        .filter_map(|(i, l)| index.get(l.as_str()).map(|&j| (i, j)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIsometryBound {
    /// `max{(1 − 1/q²) μ_R(R), (1 − 1/q²) μ_S(S), (q − 1) max(diam R, diam S)}`.
    pub bound: f64,
    pub witness_objective: f64,
    #[serde(skip)]
    pub witness: RhoWitness<f64>,
}

/// Bound on `d_ρ(R, S)` for a bijection `map: R → S` with `d/q ≤ d' ≤ q d` and point
/// masses within a factor `q²`; the witness glues `x` to `map[x]` with slack
/// `(q − 1) max(diam R, diam S)`.
pub fn quasi_isometry_rho_bound(
    r: &FiniteSpace<f64>,
    s: &FiniteSpace<f64>,
    q: f64,
    map: &[usize],
    tol: f64,
) -> Result<QuasiIsometryBound, HyperbolicError> {
    assert!(q >= 1.0, "q must be at least 1");
    let n = r.len();
    let mut seen = vec![false; s.len()];
    if map.len() != n || s.len() != n || map.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(HyperbolicError::NotBijective);
    }
    for i in 0..n {
        for k in (i + 1)..n {
            let (d, e) = (r.d(i, k), s.d(map[i], map[k]));
            let ok = match (d, e) {
                (Infinite, Infinite) => true,
                (Finite(d), Finite(e)) => d / q <= e * (1.0 + tol) + tol && e <= q * d * (1.0 + tol) + tol,
                _ => false,
            };
            if !ok {
                return Err(HyperbolicError::QuasiIsometry((i, k)));
            }
        }
        let (m, m2) = (r.mass()[i], s.mass()[map[i]]);
        if m2 * q * q < m * (1.0 - tol) || m2 > m * q * q * (1.0 + tol) {
            return Err(HyperbolicError::MassRatio(i));
        }
    }
    let shrink = 1.0 - 1.0 / (q * q);
    let diam = |x: &FiniteSpace<f64>| x.dist().finite_diameter().unwrap_or(0.0);
    let delta = (q - 1.0) * diam(r).max(diam(s));
    let bound = (shrink * r.total_mass()).max(shrink * s.total_mass()).max(delta);
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, map[i])).collect();
    let witness = RhoWitness::from_gluing(r, s, GluingSpec::new(pairs.clone(), delta), vec![], vec![], tol)?;
    debug_assert!(matches!(witness.provenance, Provenance::Glued { .. }));
    let v = ghlp::rho_upper_from_witness(r, s, &witness, tol)?;
    Ok(QuasiIsometryBound { bound, witness_objective: v.objective, witness })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerationRow {
    pub b2: f64,
    pub lower: f64,
    pub upper: f64,
    /// Larger mesh bound of the two samples.
    pub mesh_bound: f64,
    pub symmetric_difference: f64,
    pub evaluated: usize,
}

/// `d_ρ` bounds between the pants of `(b1, b2, b3)` and of `(b1, 0, b3)` (lengths doubled)
/// for each `b2`, searching from the cell-key matching.
pub fn degeneration_family(
    b1: f64,
    b3: f64,
    b2_values: &[f64],
    depth: u32,
    budget: &Budget<f64>,
    seed: u64,
) -> Result<Vec<DegenerationRow>, HyperbolicError> {
    let limit = build_pants([2.0 * b1, 0.0, 2.0 * b3], depth)?;
    b2_values
        .iter()
        .map(|&b2| {
            let s = build_pants([2.0 * b1, 2.0 * b2, 2.0 * b3], depth)?;
            let hint = matching_cells(&s, &limit);
            let est = ghlp::rho_search_from(&s.space, &limit.space, budget, seed, Some(&hint));
            if let Some(w) = &est.witness {
                ghlp::rho_upper_from_witness(&s.space, &limit.space, w, 1e-9)?;
            }
            let sd = symmetric_difference_area(HexagonSpec::new(b1, b2, b3), HexagonSpec::new(b1, 0.0, b3))?;
            Ok(DegenerationRow {
                b2,
                lower: est.lower,
                upper: est.upper,
                mesh_bound: s.provenance.mesh_bound.max(limit.provenance.mesh_bound),
                symmetric_difference: sd.area,
                evaluated: est.evaluated,
            })
        })
        .collect()
}

/// Budget used by the degeneration runs: local search from the hint only.
pub fn degeneration_budget() -> Budget<f64> {
    Budget { max_deltas: 8, max_removed: 24, local_search_iters: 24, ..Budget::default() }
}

/// Re-embeds a sampled surface by an isometry of the plane; distances and masses are unchanged.
pub fn moved_polygon(poly: &GeodesicPolygon, shift: f64, scale: f64) -> Result<GeodesicPolygon, HyperbolicError> {
    poly.transformed(&Mobius([scale.sqrt(), shift / scale.sqrt(), 0.0, 1.0 / scale.sqrt()]))
}
