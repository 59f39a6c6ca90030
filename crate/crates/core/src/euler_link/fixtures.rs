//! Curve diagrams on a square-grid genus-2 surface.
//!
//! The surface is an `n × n` grid of unit squares whose boundary, read
//! counterclockwise from the origin, is cut into eight sides of `n/2` unit
//! edges glued in the pattern `a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹`. Curves are drawn as
//! lattice paths; a square is a face until subdivided.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Curve, CurveDiagram, CurveKind, EdgeRecord, HalfEdge};

/// Side pairs of the octagon, each glued with reversed order and direction.
const GLUING: [(usize, usize); 4] = [(0, 2), (1, 3), (4, 6), (5, 7)];

pub type Lattice = (i64, i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixtureError {
    #[error("grid size {0} must be a positive multiple of 2")]
    BadSize(usize),
    #[error("step {0:?} -> {1:?} is not a grid edge")]
    NotAnEdge(Lattice, Lattice),
    #[error("edge {0:?} -> {1:?} is already labelled")]
    AlreadyLabelled(Lattice, Lattice),
    #[error("path needs at least two corners")]
    OpenPath,
    #[error("half-edges {0} and {1} do not bound the same face")]
    NotSameFace(usize, usize),
}

/// How a curve is realized when the mesh is converted to a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Loop,
    /// A circle pushed off a point class.
    PushOff,
    /// A bare point in the face left of this half-edge.
    Point(usize),
}

/// Half-edge mesh given by twins and face successors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mesh {
    pub twin: Vec<usize>,
    /// Successor of a half-edge around the face on its left.
    pub fnext: Vec<usize>,
    pub along: Vec<Option<Curve>>,
    pub roles: [Role; 2],
    pub chi: i64,
}

impl Mesh {
    fn fprev(&self, h: usize) -> usize {
        (0..self.fnext.len()).find(|&k| self.fnext[k] == h).expect("fnext is a permutation")
    }

    /// Half-edges of the face left of `h`, starting at `h`.
    pub fn face_cycle(&self, h: usize) -> Vec<usize> {
        let mut out = vec![h];
        let mut k = self.fnext[h];
        while k != h {
            out.push(k);
            k = self.fnext[k];
        }
        out
    }

    /// Inserts a vertex in the middle of the edge of `h`. Labels carry over.
    pub fn split_edge(&mut self, h: usize) {
        let t = self.twin[h];
        let (n1, n2) = (self.fnext.len(), self.fnext.len() + 1);
        self.twin.extend([t, h]);
        self.twin[h] = n2;
        self.twin[t] = n1;
        let (fh, ft) = (self.fnext[h], self.fnext[t]);
        self.fnext.extend([fh, ft]);
        self.fnext[h] = n1;
        self.fnext[t] = n2;
        self.along.extend([self.along[h], self.along[t]]);
    }

    /// Cuts the face containing `a` and `b` by a new unlabelled edge from
    /// the start of `a` to the start of `b`.
    pub fn split_face(&mut self, a: usize, b: usize) -> Result<(), FixtureError> {
        if a == b || !self.face_cycle(a).contains(&b) {
            return Err(FixtureError::NotSameFace(a, b));
        }
        let (pa, pb) = (self.fprev(a), self.fprev(b));
        let (d, e) = (self.fnext.len(), self.fnext.len() + 1);
        self.twin.extend([e, d]);
        self.fnext.extend([b, a]);
        self.fnext[pa] = d;
        self.fnext[pb] = e;
        self.along.extend([None, None]);
        Ok(())
    }

    pub fn label(&mut self, h: usize, curve: Curve) {
        self.along[h] = Some(curve);
    }

    pub fn to_diagram(&self) -> CurveDiagram {
        let n = self.fnext.len();
        let next: Vec<usize> = (0..n).map(|k| self.fnext[self.twin[k]]).collect();
        let mut origin = vec![usize::MAX; n];
        let mut n_vertices = 0;
        for h0 in 0..n {
            if origin[h0] != usize::MAX {
                continue;
            }
            let mut h = h0;
            while origin[h] == usize::MAX {
                origin[h] = n_vertices;
                h = next[h];
            }
            n_vertices += 1;
        }
        let half_edges = (0..n).map(|h| HalfEdge { origin: origin[h], twin: self.twin[h], next: next[h] }).collect();
        let edges = (0..n)
            .filter(|&h| h < self.twin[h])
            .map(|h| {
                let t = self.twin[h];
                match (self.along[h], self.along[t]) {
                    (Some(c), _) => EdgeRecord { half_edge: h, label: Some(c), along: Some(h) },
                    (None, Some(c)) => EdgeRecord { half_edge: h, label: Some(c), along: Some(t) },
                    _ => EdgeRecord { half_edge: h, label: None, along: None },
                }
            })
            .collect();
        let face_of = self.face_ids();
        let kinds = self.roles.map(|r| match r {
            Role::Loop => CurveKind::Loop,
            Role::PushOff => CurveKind::Point { face: None },
            Role::Point(h) => CurveKind::Point { face: Some(face_of[h]) },
        });
        CurveDiagram { n_vertices, half_edges, edges, kinds, chi: self.chi }
    }

    fn face_ids(&self) -> Vec<usize> {
        let n = self.fnext.len();
        let mut face = vec![usize::MAX; n];
        let mut count = 0;
        for h0 in 0..n {
            if face[h0] == usize::MAX {
                for h in self.face_cycle(h0) {
                    face[h] = count;
                }
                count += 1;
            }
        }
        face
    }
}

/// The grid surface with a lookup from lattice steps to half-edges.
#[derive(Debug, Clone)]
pub struct GridSurface {
    pub n: usize,
    pub mesh: Mesh,
    steps: HashMap<(Lattice, Lattice), usize>,
}

impl GridSurface {
    pub fn genus2(n: usize) -> Result<GridSurface, FixtureError> {
        if n == 0 || n % 2 != 0 {
            return Err(FixtureError::BadSize(n));
        }
        let m = n / 2;
        let ni = n as i64;
        let mut steps = HashMap::new();
        let mut fnext = Vec::with_capacity(4 * n * n);
        for y in 0..ni {
            for x in 0..ni {
                let c = 4 * (y * ni + x) as usize;
                let corners = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)];
                for k in 0..4 {
                    steps.insert((corners[k], corners[(k + 1) % 4]), c + k);
                    fnext.push(c + (k + 1) % 4);
                }
            }
        }
        let mut twin = vec![usize::MAX; fnext.len()];
        for (&(p, q), &h) in &steps {
            if let Some(&t) = steps.get(&(q, p)) {
                twin[h] = t;
            }
        }
        let mut perimeter = Vec::with_capacity(4 * n);
        perimeter.extend((0..ni).map(|x| steps[&((x, 0), (x + 1, 0))]));
        perimeter.extend((0..ni).map(|y| steps[&((ni, y), (ni, y + 1))]));
        perimeter.extend((0..ni).rev().map(|x| steps[&((x + 1, ni), (x, ni))]));
        perimeter.extend((0..ni).rev().map(|y| steps[&((0, y + 1), (0, y))]));
        for (i, j) in GLUING {
            for k in 0..m {
                let (a, b) = (perimeter[i * m + k], perimeter[j * m + m - 1 - k]);
                twin[a] = b;
                twin[b] = a;
            }
        }
        let along = vec![None; fnext.len()];
        let mesh = Mesh { twin, fnext, along, roles: [Role::Loop, Role::Loop], chi: -2 };
        Ok(GridSurface { n, mesh, steps })
    }

    /// Half-edge running from `p` to `q`.
    pub fn step(&self, p: Lattice, q: Lattice) -> Result<usize, FixtureError> {
        if let Some(&h) = self.steps.get(&(p, q)) {
            return Ok(h);
        }
        // Clockwise along the boundary: the glued partner runs the other way.
        self.steps.get(&(q, p)).map(|&h| self.mesh.twin[h]).ok_or(FixtureError::NotAnEdge(p, q))
    }

    /// Labels a path of lattice corners; consecutive corners must be
    /// axis-aligned and are joined by unit steps. The ends must be the same
    /// point of the surface, which validation checks.
    pub fn draw(&mut self, curve: Curve, corners: &[Lattice]) -> Result<(), FixtureError> {
        if corners.len() < 2 {
            return Err(FixtureError::OpenPath);
        }
        let mut hs = Vec::new();
        for w in corners.windows(2) {
            let (mut p, q) = (w[0], w[1]);
            if p.0 != q.0 && p.1 != q.1 {
                return Err(FixtureError::NotAnEdge(p, q));
            }
            while p != q {
                let r = (p.0 + (q.0 - p.0).signum(), p.1 + (q.1 - p.1).signum());
                hs.push((self.step(p, r)?, p, r));
                p = r;
            }
        }
        for &(h, p, r) in &hs {
            let t = self.mesh.twin[h];
            if self.mesh.along[h].is_some() || self.mesh.along[t].is_some() {
                return Err(FixtureError::AlreadyLabelled(p, r));
            }
            self.mesh.along[h] = Some(curve);
        }
        Ok(())
    }

    /// Axis-parallel rectangle, counterclockwise unless `ccw` is false.
    pub fn rectangle(&mut self, curve: Curve, lo: Lattice, hi: Lattice, ccw: bool) -> Result<(), FixtureError> {
        let mut path = vec![lo, (hi.0, lo.1), hi, (lo.0, hi.1), lo];
        if !ccw {
            path.reverse();
        }
        self.draw(curve, &path)
    }

    /// Bottom half-edge of the unit square with lower-left corner `(x, y)`.
    pub fn cell(&self, x: i64, y: i64) -> usize {
        self.steps[&((x, y), (x + 1, y))]
    }

    pub fn mark_point(&mut self, curve: Curve, x: i64, y: i64) {
        self.mesh.roles[curve.index()] = Role::Point(self.cell(x, y));
    }

    pub fn set_role(&mut self, curve: Curve, role: Role) {
        self.mesh.roles[curve.index()] = role;
    }

    pub fn diagram(&self) -> CurveDiagram {
        self.mesh.to_diagram()
    }
}

fn grid8() -> GridSurface {
    GridSurface::genus2(8).expect("8 is even")
}

/// Staircase on even corners from `(0, 0)` to `(n, n)`; both ends are the
/// single octagon vertex, and the loop cuts the surface into two one-holed
/// tori. The upper-left one lies on its left.
pub fn separating_path(n: i64) -> Vec<Lattice> {
    let mut path = vec![(0, 0)];
    let mut k = 0;
    while k < n {
        path.push((k + 2, k));
        path.push((k + 2, k + 2));
        k += 2;
    }
    path
}

/// Limaçon through `x`: a large L-shaped loop and a small inner loop,
/// crossing transversally at `x`, both counterclockwise.
pub fn limacon_path() -> Vec<Lattice> {
    vec![(4, 4), (4, 7), (1, 7), (1, 1), (7, 1), (7, 4), (4, 4), (2, 4), (2, 2), (4, 2), (4, 4)]
}

/// Bare points in two different faces.
pub fn distinct_points() -> CurveDiagram {
    let mut g = grid8();
    g.mark_point(Curve::C1, 1, 1);
    g.mark_point(Curve::C2, 5, 5);
    g.diagram()
}

/// A point (c2) and the circle pushed off it (c1), bounding a disk around it.
pub fn pushed_off_point() -> CurveDiagram {
    let mut g = grid8();
    g.rectangle(Curve::C1, (2, 2), (4, 4), true).expect("free edges");
    g.set_role(Curve::C1, Role::PushOff);
    g.mark_point(Curve::C2, 2, 3);
    g.diagram()
}

/// Two disjoint counterclockwise circles, the second inside the first.
pub fn nested_disks() -> CurveDiagram {
    let mut g = grid8();
    g.rectangle(Curve::C1, (1, 1), (7, 7), true).expect("free edges");
    g.rectangle(Curve::C2, (2, 2), (4, 4), true).expect("free edges");
    g.diagram()
}

/// Two counterclockwise circles with disjoint disks.
pub fn disjoint_disks() -> CurveDiagram {
    let mut g = grid8();
    g.rectangle(Curve::C1, (1, 1), (3, 3), true).expect("free edges");
    g.rectangle(Curve::C2, (4, 4), (6, 6), true).expect("free edges");
    g.diagram()
}

/// Separating loop (c1) and a circle (c2) whose disk lies in the one-holed
/// torus to the left of c1.
pub fn separating_with_disk() -> CurveDiagram {
    let mut g = grid8();
    g.draw(Curve::C1, &separating_path(8)).expect("free edges");
    g.rectangle(Curve::C2, (1, 5), (3, 7), true).expect("free edges");
    g.diagram()
}

/// Loop along the bottom of the octagon, which is not null-homologous.
pub fn non_separating_loop() -> CurveDiagram {
    let mut g = grid8();
    let path: Vec<Lattice> = (0..=8).map(|x| (x, 0)).collect();
    let hs: Vec<usize> = path.windows(2).map(|w| g.step(w[0], w[1]).expect("boundary step")).collect();
    for h in hs {
        g.mesh.label(h, Curve::C1);
    }
    g.mark_point(Curve::C2, 4, 4);
    g.diagram()
}

/// Limaçon (c1) with a point (c2) in the inner loop.
pub fn limacon_with_point() -> CurveDiagram {
    let mut g = grid8();
    g.draw(Curve::C1, &limacon_path()).expect("free edges");
    g.mark_point(Curve::C2, 2, 2);
    g.diagram()
}

/// Counterclockwise circles crossing at two points.
pub fn two_crossings() -> CurveDiagram {
    let mut g = grid8();
    g.rectangle(Curve::C1, (1, 1), (5, 5), true).expect("free edges");
    g.rectangle(Curve::C2, (2, 2), (6, 6), true).expect("free edges");
    g.diagram()
}

/// Counterclockwise circles in a plus shape, crossing at four points.
pub fn four_crossings() -> CurveDiagram {
    let mut g = grid8();
    g.rectangle(Curve::C1, (1, 3), (7, 5), true).expect("free edges");
    g.rectangle(Curve::C2, (3, 1), (5, 7), true).expect("free edges");
    g.diagram()
}

/// A single region indicator: a disk, an annulus or a one-holed torus.
pub fn region(shape: &str) -> Option<CurveDiagram> {
    let mut g = grid8();
    match shape {
        "disk" => g.rectangle(Curve::C1, (1, 1), (5, 5), true).ok()?,
        "annulus" => {
            g.rectangle(Curve::C1, (1, 1), (7, 7), true).ok()?;
            g.rectangle(Curve::C1, (3, 3), (5, 5), false).ok()?;
        }
        "torus" => g.draw(Curve::C1, &separating_path(8)).ok()?,
        _ => return None,
    }
    g.mark_point(Curve::C2, 0, 7);
    Some(g.diagram())
}

/// Names accepted by [`named`].
pub const NAMES: [&str; 9] = [
    "distinct-points",
    "push-off",
    "nested-disks",
    "disjoint-disks",
    "separating-disk",
    "non-separating",
    "limacon",
    "two-crossings",
    "four-crossings",
];

pub fn named(name: &str) -> Option<CurveDiagram> {
    Some(match name {
        "distinct-points" => distinct_points(),
        "push-off" => pushed_off_point(),
        "nested-disks" => nested_disks(),
        "disjoint-disks" => disjoint_disks(),
        "separating-disk" => separating_with_disk(),
        "non-separating" => non_separating_loop(),
        "limacon" => limacon_with_point(),
        "two-crossings" => two_crossings(),
        "four-crossings" => four_crossings(),
        _ => return None,
    })
}

fn random_rectangle(rng: &mut impl Rng, coords: &[i64]) -> (Lattice, Lattice) {
    let mut pick = || {
        let mut v = coords.choose_multiple(rng, 2).copied().collect::<Vec<_>>();
        v.sort();
        (v[0], v[1])
    };
    let (x0, x1) = pick();
    let (y0, y1) = pick();
    ((x0, y0), (x1, y1))
}

fn random_rectangles(
    rng: &mut impl Rng,
    g: &mut GridSurface,
    curve: Curve,
    coords: &[i64],
) -> Result<(), FixtureError> {
    for _ in 0..rng.gen_range(1..=3) {
        let (lo, hi) = random_rectangle(rng, coords);
        let ccw = rng.gen_bool(0.7);
        g.rectangle(curve, lo, hi, ccw)?;
    }
    Ok(())
}

fn random_cell(rng: &mut impl Rng, n: i64) -> (i64, i64) {
    (rng.gen_range(0..n), rng.gen_range(0..n))
}

/// Applies random edge and face subdivisions.
pub fn subdivide(mesh: &mut Mesh, rng: &mut impl Rng, edge_splits: usize, face_splits: usize) {
    for _ in 0..edge_splits {
        let h = rng.gen_range(0..mesh.fnext.len());
        mesh.split_edge(h);
    }
    for _ in 0..face_splits {
        let a = rng.gen_range(0..mesh.fnext.len());
        let face = mesh.face_cycle(a);
        if face.len() < 2 {
            continue;
        }
        let b = *face[1..].choose(rng).expect("face has another half-edge");
        mesh.split_face(a, b).expect("same face");
    }
}

/// One draw from the randomized template suite, before subdivision.
pub fn random_grid(rng: &mut impl Rng) -> GridSurface {
    const N: i64 = 12;
    let odd: Vec<i64> = (1..N).step_by(2).collect();
    let even: Vec<i64> = (2..N).step_by(2).collect();
    loop {
        let mut g = GridSurface::genus2(N as usize).expect("12 is even");
        let template = rng.gen_range(0..6);
        let built = match template {
            0 => random_rectangles(rng, &mut g, Curve::C1, &odd)
                .and_then(|_| random_rectangles(rng, &mut g, Curve::C2, &even)),
            1 => random_rectangles(rng, &mut g, Curve::C1, &odd).map(|_| {
                let (x, y) = random_cell(rng, N);
                g.mark_point(Curve::C2, x, y);
            }),
            2 => {
                let (a, b) = (random_cell(rng, N), random_cell(rng, N));
                if a == b {
                    continue;
                }
                g.mark_point(Curve::C1, a.0, a.1);
                g.mark_point(Curve::C2, b.0, b.1);
                Ok(())
            }
            3 => g
                .draw(Curve::C1, &separating_path(N))
                .and_then(|_| random_rectangles(rng, &mut g, Curve::C2, &odd)),
            4 => g.draw(Curve::C1, &limacon_path()).map(|_| {
                let (x, y) = random_cell(rng, N);
                g.mark_point(Curve::C2, x, y);
            }),
            _ => {
                let (x, y) = (rng.gen_range(1..N - 2), rng.gen_range(1..N - 2));
                let (w, h) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
                g.rectangle(Curve::C1, (x, y), ((x + w).min(N - 1), (y + h).min(N - 1)), rng.gen_bool(0.5))
                    .map(|_| {
                        g.set_role(Curve::C1, Role::PushOff);
                        let (px, py) = if rng.gen_bool(0.5) { (x, y) } else { random_cell(rng, N) };
                        g.mark_point(Curve::C2, px, py);
                    })
            }
        };
        if built.is_err() {
            continue;
        }
        if rng.gen_bool(0.5) {
            g.mesh.roles.swap(0, 1);
            for a in g.mesh.along.iter_mut().flatten() {
                *a = a.other();
            }
        }
        if super::validate_diagram(&g.diagram()).is_valid() {
            return g;
        }
    }
}

/// A valid random diagram: a template instance followed by subdivisions.
pub fn random_diagram(rng: &mut impl Rng) -> CurveDiagram {
    let mut g = random_grid(rng);
    let (e, f) = (rng.gen_range(0..20), rng.gen_range(0..20));
    subdivide(&mut g.mesh, rng, e, f);
    g.diagram()
}
