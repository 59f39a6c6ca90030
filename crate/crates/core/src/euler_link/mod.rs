//! Exact Euler calculus on curve diagrams.
//!
//! A diagram is a cellulated closed surface (a rotation system) with two
//! labelled curves drawn along its edges. A null-homologous oriented curve
//! determines an integer function on faces, up to a constant, that jumps by
//! one when the curve is crossed from its right to its left. Euler
//! characteristics of superlevel sets of these functions give the linking
//! number of the two conormal lifts and the value at zero of the Poincaré
//! series of orthogeodesic arcs.
//!
//! Conventions: `next` is the clockwise successor around the origin vertex,
//! so the face of a half-edge `h`, traced by `h ↦ next(twin(h))`, lies on
//! its left. Faces are numbered by their smallest half-edge id.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

pub mod cdg;
pub mod fixtures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Curve {
    C1,
    C2,
}

impl Curve {
    pub const BOTH: [Curve; 2] = [Curve::C1, Curve::C2];

    pub fn index(self) -> usize {
        match self {
            Curve::C1 => 0,
            Curve::C2 => 1,
        }
    }

    pub fn other(self) -> Curve {
        match self {
            Curve::C1 => Curve::C2,
            Curve::C2 => Curve::C1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Curve::C1 => "c1",
            Curve::C2 => "c2",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: usize,
    pub twin: usize,
    /// Clockwise successor among the half-edges leaving `origin`.
    pub next: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub half_edge: usize,
    pub label: Option<Curve>,
    /// The half-edge of this edge pointing along the curve.
    pub along: Option<usize>,
}

/// What a curve of the diagram represents.
///
/// A point class is either a bare point in a face, or a small circle pushed
/// off a point and drawn with labelled edges; never both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Point { face: Option<usize> },
    Loop,
}

impl CurveKind {
    pub fn face(&self) -> Option<usize> {
        match self {
            CurveKind::Point { face } => *face,
            CurveKind::Loop => None,
        }
    }
}

/// Sign relating the series to the linking number: +1 for the trivial
/// class, −1 otherwise.
pub fn epsilon_of(kind: CurveKind) -> i64 {
    match kind {
        CurveKind::Point { .. } => 1,
        CurveKind::Loop => -1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveDiagram {
    pub n_vertices: usize,
    pub half_edges: Vec<HalfEdge>,
    pub edges: Vec<EdgeRecord>,
    pub kinds: [CurveKind; 2],
    /// Declared Euler characteristic of the surface.
    pub chi: i64,
}

impl CurveDiagram {
    /// Exchanges the roles of the two curves.
    pub fn swapped(&self) -> CurveDiagram {
        let mut d = self.clone();
        for e in &mut d.edges {
            e.label = e.label.map(Curve::other);
        }
        d.kinds.swap(0, 1);
        d
    }

    /// Reverses the orientation of one curve.
    pub fn reversed(&self, curve: Curve) -> CurveDiagram {
        let mut d = self.clone();
        for e in &mut d.edges {
            if e.label == Some(curve) {
                e.along = e.along.map(|h| self.half_edges[h].twin);
            }
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("invalid diagram: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("curve {0} is not null-homologous")]
    NotNullHomologous(Curve),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Cell structure derived from a structurally sound diagram.
#[derive(Debug, Clone)]
pub struct Cells {
    pub face_of: Vec<usize>,
    pub n_faces: usize,
    pub edge_of: Vec<usize>,
    pub n_edges: usize,
    pub n_vertices: usize,
    /// Curve running along each half-edge in its direction.
    pub along: Vec<Option<Curve>>,
    /// Half-edges leaving each vertex, in rotation order.
    pub rotation: Vec<Vec<usize>>,
    twin: Vec<usize>,
    origin: Vec<usize>,
}

impl Cells {
    fn new(d: &CurveDiagram) -> Cells {
        let n = d.half_edges.len();
        let twin: Vec<usize> = d.half_edges.iter().map(|h| h.twin).collect();
        let origin: Vec<usize> = d.half_edges.iter().map(|h| h.origin).collect();
        let fnext = |h: usize| d.half_edges[twin[h]].next;

        let mut face_of = vec![usize::MAX; n];
        let mut n_faces = 0;
        for h0 in 0..n {
            if face_of[h0] != usize::MAX {
                continue;
            }
            let mut h = h0;
            while face_of[h] == usize::MAX {
                face_of[h] = n_faces;
                h = fnext(h);
            }
            n_faces += 1;
        }

        let mut edge_of = vec![usize::MAX; n];
        let mut n_edges = 0;
        for h in 0..n {
            if edge_of[h] == usize::MAX {
                edge_of[h] = n_edges;
                edge_of[twin[h]] = n_edges;
                n_edges += 1;
            }
        }

        let mut along = vec![None; n];
        for e in &d.edges {
            if let (Some(c), Some(a)) = (e.label, e.along) {
                along[a] = Some(c);
            }
        }

        let mut rotation = vec![Vec::new(); d.n_vertices];
        for h0 in 0..n {
            let v = origin[h0];
            if rotation[v].is_empty() {
                let mut h = h0;
                loop {
                    rotation[v].push(h);
                    h = d.half_edges[h].next;
                    if h == h0 {
                        break;
                    }
                }
            }
        }

        Cells { face_of, n_faces, edge_of, n_edges, n_vertices: d.n_vertices, along, rotation, twin, origin }
    }

    pub fn chi(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges as i64 + self.n_faces as i64
    }

    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    pub fn origin(&self, h: usize) -> usize {
        self.origin[h]
    }

    /// Curve and direction (true = leaving) at each labelled half-edge
    /// around `v`, in rotation order.
    fn strands(&self, v: usize) -> Vec<(Curve, bool)> {
        self.rotation[v]
            .iter()
            .filter_map(|&h| match (self.along[h], self.along[self.twin[h]]) {
                (Some(c), _) => Some((c, true)),
                (None, Some(c)) => Some((c, false)),
                _ => None,
            })
            .collect()
    }

    /// Closed subcomplex spanned by the faces in `mask`.
    pub fn closure(&self, mask: &[bool]) -> Closure {
        let mut c = Closure {
            faces: mask.to_vec(),
            edges: vec![false; self.n_edges],
            vertices: vec![false; self.n_vertices],
        };
        for h in 0..self.face_of.len() {
            if mask[self.face_of[h]] {
                c.edges[self.edge_of[h]] = true;
                c.vertices[self.origin[h]] = true;
            }
        }
        c
    }
}

/// A closed subcomplex given by its cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub faces: Vec<bool>,
    pub edges: Vec<bool>,
    pub vertices: Vec<bool>,
}

impl Closure {
    pub fn chi(&self) -> i64 {
        let count = |v: &[bool]| v.iter().filter(|&&b| b).count() as i64;
        count(&self.vertices) - count(&self.edges) + count(&self.faces)
    }

    pub fn intersect(&self, other: &Closure) -> Closure {
        let and = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(x, y)| *x && *y).collect();
        Closure {
            faces: and(&self.faces, &other.faces),
            edges: and(&self.edges, &other.edges),
            vertices: and(&self.vertices, &other.vertices),
        }
    }
}

fn structural_violations(d: &CurveDiagram) -> Vec<String> {
    let mut out = Vec::new();
    let n = d.half_edges.len();
    if n == 0 || d.n_vertices == 0 {
        out.push("diagram has no cells".to_string());
        return out;
    }
    for (i, h) in d.half_edges.iter().enumerate() {
        if h.twin >= n || h.next >= n || h.origin >= d.n_vertices {
            out.push(format!("half-edge {i} refers to a missing id"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut hit = vec![false; n];
    for (i, h) in d.half_edges.iter().enumerate() {
        if h.twin == i || d.half_edges[h.twin].twin != i {
            out.push(format!("twin of half-edge {i} is not an involution"));
        }
        if std::mem::replace(&mut hit[h.next], true) {
            out.push(format!("half-edge {} is the rotation successor of two half-edges", h.next));
        }
        if d.half_edges[h.next].origin != h.origin {
            out.push(format!("rotation at half-edge {i} leaves its vertex"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut seen_vertex = vec![false; d.n_vertices];
    let mut visited = vec![false; n];
    for h0 in 0..n {
        if visited[h0] {
            continue;
        }
        let v = d.half_edges[h0].origin;
        if std::mem::replace(&mut seen_vertex[v], true) {
            out.push(format!("rotation at vertex {v} splits into several cycles"));
        }
        let mut h = h0;
        while !visited[h] {
            visited[h] = true;
            h = d.half_edges[h].next;
        }
    }
    for (v, s) in seen_vertex.iter().enumerate() {
        if !s {
            out.push(format!("vertex {v} has no half-edges"));
        }
    }
    let mut edge_seen = vec![false; n];
    for e in &d.edges {
        if e.half_edge >= n {
            out.push(format!("edge record names missing half-edge {}", e.half_edge));
            continue;
        }
        let key = e.half_edge.min(d.half_edges[e.half_edge].twin);
        if std::mem::replace(&mut edge_seen[key], true) {
            out.push(format!("edge of half-edge {} is listed twice", e.half_edge));
        }
        let pair = [e.half_edge, d.half_edges[e.half_edge].twin];
        match (e.label, e.along) {
            (None, None) => {}
            (Some(_), Some(a)) if pair.contains(&a) => {}
            (Some(c), _) => out.push(format!(
                "edge of half-edge {} labelled {c} needs an orientation on that edge",
                e.half_edge
            )),
            (None, Some(_)) => out.push(format!("unlabelled edge of half-edge {} has an orientation", e.half_edge)),
        }
    }
    out
}

fn connected(cells: &Cells) -> bool {
    let mut seen = vec![false; cells.n_faces];
    let mut by_face = vec![Vec::new(); cells.n_faces];
    for h in 0..cells.face_of.len() {
        by_face[cells.face_of[h]].push(h);
    }
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(f) = stack.pop() {
        for &h in &by_face[f] {
            let g = cells.face_of[cells.twin[h]];
            if !std::mem::replace(&mut seen[g], true) {
                stack.push(g);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Checks the rotation system, the Euler characteristic and the genericity
/// of the curves: only transverse double points, alternating crossings and
/// no self-intersection at a crossing.
pub fn validate_diagram(d: &CurveDiagram) -> ValidationReport {
    let mut out = structural_violations(d);
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }
    let cells = Cells::new(d);
    if cells.chi() != d.chi {
        out.push(format!("V - E + F = {} but the declared Euler characteristic is {}", cells.chi(), d.chi));
    }
    if d.chi >= 0 {
        out.push(format!("Euler characteristic {} is not negative", d.chi));
    }
    if !connected(&cells) {
        out.push("surface is not connected".to_string());
    }

    let mut has_edges = [false; 2];
    for c in cells.along.iter().flatten() {
        has_edges[c.index()] = true;
    }
    for c in Curve::BOTH {
        match d.kinds[c.index()] {
            CurveKind::Loop if !has_edges[c.index()] => out.push(format!("loop curve {c} has no edges")),
            CurveKind::Point { face: Some(_) } if has_edges[c.index()] => {
                out.push(format!("point curve {c} has both a marked face and edges"))
            }
            CurveKind::Point { face: None } if !has_edges[c.index()] => {
                out.push(format!("point curve {c} has neither a marked face nor edges"))
            }
            CurveKind::Point { face: Some(f) } if f >= cells.n_faces => {
                out.push(format!("point curve {c} marks missing face {f}"))
            }
            _ => {}
        }
    }
    if let [CurveKind::Point { face: Some(f1) }, CurveKind::Point { face: Some(f2) }] = d.kinds {
        if f1 == f2 {
            out.push("coincident points must be modelled with a pushed-off circle".to_string());
        }
    }

    for v in 0..cells.n_vertices {
        let strands = cells.strands(v);
        let mut degree = [0usize; 2];
        for &(c, _) in &strands {
            degree[c.index()] += 1;
        }
        for c in Curve::BOTH {
            let mine: Vec<bool> = strands.iter().filter(|s| s.0 == c).map(|s| s.1).collect();
            let k = mine.len();
            if k > 4 {
                out.push(format!("multiplicity > 2 at vertex {v} on {c}"));
                continue;
            }
            let outs = mine.iter().filter(|&&o| o).count();
            if 2 * outs != k {
                out.push(format!("{c} enters and leaves vertex {v} unequally"));
                continue;
            }
            if k == 4 && (mine[0] == mine[2] || mine[1] == mine[3]) {
                out.push(format!("self-intersection of {c} at vertex {v} is not transverse"));
            }
        }
        if degree[0] > 0 && degree[1] > 0 {
            if degree[0] == 4 || degree[1] == 4 {
                out.push(format!("self-intersection at crossing vertex {v}"));
            } else if degree == [2, 2] {
                let alternating = (0..4).all(|i| strands[i].0 != strands[(i + 1) % 4].0);
                if !alternating {
                    out.push(format!("non-alternating crossing at vertex {v}"));
                }
            }
        }
    }
    ValidationReport { violations: out }
}

/// Integer function on faces attached to a null-homologous curve,
/// normalized to minimum zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructibleFunction {
    pub curve: Curve,
    pub values: Vec<i64>,
}

impl ConstructibleFunction {
    pub fn max(&self) -> i64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    fn superlevel(&self, j: i64) -> Vec<bool> {
        self.values.iter().map(|&v| v >= j).collect()
    }
}

/// The function a curve contributes to the Euler integrals: a face function
/// for drawn curves, or a bare point carried by a face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveFunction {
    Faces(ConstructibleFunction),
    Point { face: usize },
}

fn checked(d: &CurveDiagram) -> Result<Cells, LinkError> {
    let report = validate_diagram(d);
    if !report.is_valid() {
        return Err(LinkError::Invalid(report.violations));
    }
    Ok(Cells::new(d))
}

fn face_values(cells: &Cells, curve: Curve) -> Result<Vec<i64>, LinkError> {
    let n = cells.face_of.len();
    let mut by_face = vec![Vec::new(); cells.n_faces];
    for h in 0..n {
        by_face[cells.face_of[h]].push(h);
    }
    // Change of value when stepping from the face of h across its edge.
    let jump = |h: usize| -> i64 {
        let t = cells.twin[h];
        if cells.along[t] == Some(curve) {
            1
        } else if cells.along[h] == Some(curve) {
            -1
        } else {
            0
        }
    };
    let mut values: Vec<Option<i64>> = vec![None; cells.n_faces];
    values[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        let base = values[f].expect("queued faces carry values");
        for &h in &by_face[f] {
            let g = cells.face_of[cells.twin[h]];
            let want = base + jump(h);
            match values[g] {
                None => {
                    values[g] = Some(want);
                    queue.push_back(g);
                }
                Some(have) if have != want => return Err(LinkError::NotNullHomologous(curve)),
                Some(_) => {}
            }
        }
    }
    let values: Vec<i64> = values.into_iter().map(|v| v.expect("surface is connected")).collect();
    let min = values.iter().copied().min().unwrap_or(0);
    Ok(values.into_iter().map(|v| v - min).collect())
}

/// Face function of a drawn curve, rising by one from its right to its left.
pub fn constructible_function(d: &CurveDiagram, curve: Curve) -> Result<ConstructibleFunction, LinkError> {
    let cells = checked(d)?;
    Ok(ConstructibleFunction { curve, values: face_values(&cells, curve)? })
}

pub fn curve_function(d: &CurveDiagram, curve: Curve) -> Result<CurveFunction, LinkError> {
    let cells = checked(d)?;
    curve_function_in(d, &cells, curve)
}

fn curve_function_in(d: &CurveDiagram, cells: &Cells, curve: Curve) -> Result<CurveFunction, LinkError> {
    match d.kinds[curve.index()] {
        CurveKind::Point { face: Some(face) } => Ok(CurveFunction::Point { face }),
        _ => Ok(CurveFunction::Faces(ConstructibleFunction { curve, values: face_values(cells, curve)? })),
    }
}

/// Euler characteristic of the closed subcomplex of faces with `f ≥ j`.
pub fn sublevel_chi(d: &CurveDiagram, f: &ConstructibleFunction, j: i64) -> Result<i64, LinkError> {
    let cells = checked(d)?;
    Ok(cells.closure(&f.superlevel(j)).chi())
}

fn chi_faces(cells: &Cells, f: &ConstructibleFunction) -> i64 {
    (1..=f.max()).map(|j| cells.closure(&f.superlevel(j)).chi()).sum()
}

/// `χ(f) = Σ_{j ≥ 1} χ({f ≥ j})`; a bare point has χ = 1.
pub fn chi_of_f(d: &CurveDiagram, f: &CurveFunction) -> Result<i64, LinkError> {
    let cells = checked(d)?;
    Ok(chi_of_f_in(&cells, f))
}

fn chi_of_f_in(cells: &Cells, f: &CurveFunction) -> i64 {
    match f {
        CurveFunction::Faces(f) => chi_faces(cells, f),
        CurveFunction::Point { .. } => 1,
    }
}

/// `χ(f1·f2) = Σ_{j1, j2} χ({f1 ≥ j1} ∩ {f2 ≥ j2})` over closed superlevel
/// complexes.
pub fn chi_product(d: &CurveDiagram, f1: &CurveFunction, f2: &CurveFunction) -> Result<i64, LinkError> {
    let cells = checked(d)?;
    Ok(chi_product_in(&cells, f1, f2))
}

fn chi_product_in(cells: &Cells, f1: &CurveFunction, f2: &CurveFunction) -> i64 {
    use CurveFunction::*;
    match (f1, f2) {
        (Faces(a), Faces(b)) => {
            let bs: Vec<Closure> = (1..=b.max()).map(|j| cells.closure(&b.superlevel(j))).collect();
            (1..=a.max())
                .map(|j| {
                    let ca = cells.closure(&a.superlevel(j));
                    bs.iter().map(|cb| ca.intersect(cb).chi()).sum::<i64>()
                })
                .sum()
        }
        (Faces(a), Point { face }) | (Point { face }, Faces(a)) => a.values[*face],
        (Point { face: p }, Point { face: q }) => i64::from(p == q),
    }
}

/// Euler characteristic of the common part of the two drawn curves:
/// crossing vertices minus shared edges.
pub fn chi_curve_intersection(d: &CurveDiagram) -> Result<i64, LinkError> {
    let cells = checked(d)?;
    Ok(chi_intersection_in(&cells))
}

fn chi_intersection_in(cells: &Cells) -> i64 {
    let vertices = (0..cells.n_vertices)
        .filter(|&v| {
            let s = cells.strands(v);
            Curve::BOTH.iter().all(|c| s.iter().any(|x| x.0 == *c))
        })
        .count() as i64;
    // An edge carries one label, so curves never share an edge.
    vertices
}

/// Every intermediate and final quantity of the linking formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkReport {
    pub chi: i64,
    pub chi_f: [i64; 2],
    pub chi_product: i64,
    pub chi_intersection: i64,
    pub linking: BigRational,
    pub value_at_zero: BigRational,
    pub epsilon: i64,
}

impl LinkReport {
    /// Whether `χ(X)·L` is an integer.
    pub fn integral(&self) -> bool {
        (&self.linking * BigRational::from_integer(BigInt::from(self.chi))).is_integer()
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Evaluates `L = −χ(f1)χ(f2)/χ(X) + χ(f1f2) − ½χ(c1 ∩ c2)` and the value
/// at zero `ε(c1)·(−L)`.
pub fn analyze(d: &CurveDiagram) -> Result<LinkReport, LinkError> {
    let cells = checked(d)?;
    let f1 = curve_function_in(d, &cells, Curve::C1)?;
    let f2 = curve_function_in(d, &cells, Curve::C2)?;
    let chi_f = [chi_of_f_in(&cells, &f1), chi_of_f_in(&cells, &f2)];
    let chi_product = chi_product_in(&cells, &f1, &f2);
    let chi_intersection = chi_intersection_in(&cells);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let linking = -(rational(chi_f[0] * chi_f[1]) / rational(d.chi)) + rational(chi_product)
        - half * rational(chi_intersection);
    let epsilon = epsilon_of(d.kinds[0]);
    let value_at_zero = rational(-epsilon) * &linking;
    Ok(LinkReport { chi: d.chi, chi_f, chi_product, chi_intersection, linking, value_at_zero, epsilon })
}

pub fn linking(d: &CurveDiagram) -> Result<BigRational, LinkError> {
    Ok(analyze(d)?.linking)
}

pub fn value_at_zero(d: &CurveDiagram) -> Result<BigRational, LinkError> {
    Ok(analyze(d)?.value_at_zero)
}

/// Multiplicity of each half-edge in `Σ_j ∂{f ≥ j}`, the sum of oriented
/// boundaries of the superlevel sets.
pub fn boundary_decomposition(d: &CurveDiagram, f: &ConstructibleFunction) -> Result<Vec<i64>, LinkError> {
    let cells = checked(d)?;
    Ok((0..cells.face_of.len())
        .map(|h| {
            let left = f.values[cells.face_of[h]];
            let right = f.values[cells.face_of[cells.twin[h]]];
            (left - right).max(0)
        })
        .collect())
}

/// Derived cells of a valid diagram.
pub fn cells(d: &CurveDiagram) -> Result<Cells, LinkError> {
    checked(d)
}

/// `p/q`, or `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double, for comparisons with numerical estimates.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
