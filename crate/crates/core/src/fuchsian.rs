//! Cocompact surface groups acting on the upper half-plane, with complete
//! enumeration of group elements by displacement of a basepoint and
//! extraction of double-coset representatives.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::hyp_plane::{
    axis, common_perpendicular, displacement, mobius_apply, point_to_line, translation_length,
    GeodesicLine, GeomError, HPoint, Isometry, PerpSegment,
};

/// Default cap on the number of group elements an enumeration may touch.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Grid used to key floating-point group elements.
const KEY_SCALE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroupError {
    #[error("projected element count {projected:.3e} exceeds the cap {cap}")]
    RadiusTooLarge { projected: f64, cap: usize },
    #[error("element is not in the group (no word witness found)")]
    NotInGroup,
    #[error("invalid group: {0}")]
    Invalid(String),
    #[error("unknown generator in word at '{0}'")]
    BadWord(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// A word in the generators. Letter `k < n` is generator `k`, letter
/// `n + k` its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGroup {
    pub names: Vec<String>,
    pub generators: Vec<Isometry>,
    pub relator: Word,
    pub genus: u32,
    pub basepoint: HPoint,
    /// Covering radius of a fundamental domain around the basepoint whose
    /// side pairings are the generators. When absent, enumeration falls
    /// back to twice the largest generator displacement.
    pub margin: Option<f64>,
}

impl SurfaceGroup {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// Generators followed by their inverses, indexed by letter.
    pub fn letters(&self) -> Vec<Isometry> {
        let mut v = self.generators.clone();
        v.extend(self.generators.iter().map(|g| g.inverse()));
        v
    }

    pub fn inverse_letter(&self, l: u8) -> u8 {
        let n = self.rank() as u8;
        if l < n {
            l + n
        } else {
            l - n
        }
    }

    pub fn evaluate(&self, w: &Word) -> Isometry {
        let letters = self.letters();
        w.0.iter().fold(Isometry::identity(), |acc, &l| acc.compose(&letters[l as usize]))
    }

    pub fn max_generator_displacement(&self) -> f64 {
        self.generators.iter().map(|g| displacement(g, self.basepoint)).fold(0.0, f64::max)
    }

    pub fn coverage_margin(&self) -> f64 {
        self.margin.unwrap_or(2.0 * self.max_generator_displacement())
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        if self.genus < 2 {
            return Err(GroupError::Invalid("genus must be ≥ 2".into()));
        }
        if self.generators.len() != 2 * self.genus as usize {
            return Err(GroupError::Invalid(format!(
                "genus {} needs {} generators, found {}",
                self.genus,
                2 * self.genus,
                self.generators.len()
            )));
        }
        if self.names.len() != self.generators.len() {
            return Err(GroupError::Invalid("generator names and matrices differ in count".into()));
        }
        for (name, g) in self.names.iter().zip(&self.generators) {
            if g.trace().abs() <= 2.0 {
                return Err(GroupError::Invalid(format!("generator {name} is not hyperbolic")));
            }
        }
        let r = self.evaluate(&self.relator);
        if r.matrix_distance(&Isometry::identity()) > 1e-8 {
            return Err(GroupError::Invalid(format!("relator evaluates to {r}, not ±identity")));
        }
        if self.euler_characteristic() >= 0 {
            return Err(GroupError::Invalid("Euler characteristic must be negative".into()));
        }
        Ok(())
    }

    /// Parses a word: generator names matched greedily (longest first),
    /// each optionally followed by `^-1` or `'`; the upper-cased name also
    /// denotes the inverse. Whitespace, `.` and `*` separate freely.
    pub fn parse_word(&self, s: &str) -> Result<Word, GroupError> {
        let n = self.rank() as u8;
        let mut forms: Vec<(String, u8)> = Vec::new();
        for (k, name) in self.names.iter().enumerate() {
            forms.push((name.clone(), k as u8));
            let upper = name.to_uppercase();
            if upper != *name && !self.names.contains(&upper) {
                forms.push((upper, n + k as u8));
            }
        }
        forms.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
        let mut out = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix(|c: char| c.is_whitespace() || c == '.' || c == '*') {
                rest = r;
                continue;
            }
            let Some((form, letter)) = forms.iter().find(|(f, _)| rest.starts_with(f.as_str()))
            else {
                return Err(GroupError::BadWord(rest.to_string()));
            };
            rest = &rest[form.len()..];
            let mut letter = *letter;
            if let Some(r) = rest.strip_prefix("^-1").or_else(|| rest.strip_prefix('\'')) {
                rest = r;
                letter = self.inverse_letter(letter);
            }
            out.push(letter);
        }
        Ok(Word(out))
    }

    pub fn format_word(&self, w: &Word) -> String {
        let n = self.rank() as u8;
        let mut s = String::new();
        for &l in &w.0 {
            if l < n {
                s.push_str(&self.names[l as usize]);
            } else {
                let name = &self.names[(l - n) as usize];
                let upper = name.to_uppercase();
                if upper != *name && !self.names.contains(&upper) {
                    s.push_str(&upper);
                } else {
                    s.push_str(name);
                    s.push_str("^-1");
                }
            }
        }
        s
    }
}

/// Surface group of the regular hyperbolic 4g-gon with interior angles
/// 2π/4g, sides paired by the commutator relator Π [a_i, b_i].
pub fn standard_group(genus: u32) -> Result<SurfaceGroup, GroupError> {
    if genus < 2 {
        return Err(GroupError::Invalid("genus must be ≥ 2".into()));
    }
    let sides = 4 * genus as usize;
    let cot = 1.0 / (PI / sides as f64).tan();
    let inradius = cot.acosh();
    let circumradius = (cot * cot).acosh();
    let theta = |k: usize| 2.0 * PI * k as f64 / sides as f64;
    // Half-turn about the midpoint of side k.
    let half_turn = |k: usize| {
        let m = Isometry::rotation(theta(k)).compose(&Isometry::translation(inradius));
        m.compose(&Isometry::rotation(PI)).compose(&m.inverse())
    };
    // Maps side j onto side k, carrying the polygon across side k.
    let pairing = |j: usize, k: usize| half_turn(k).compose(&Isometry::rotation(theta(k) - theta(j)));

    let mut names = Vec::new();
    let mut generators = Vec::new();
    for i in 0..genus as usize {
        let s = 4 * i;
        let (an, bn) = if genus == 2 {
            (["a", "c"][i].to_string(), ["b", "d"][i].to_string())
        } else {
            (format!("a{}", i + 1), format!("b{}", i + 1))
        };
        names.push(an);
        generators.push(pairing(s + 2, s).renormalized());
        names.push(bn);
        generators.push(pairing(s + 1, s + 3).renormalized());
    }
    let n = generators.len() as u8;
    let mut relator = Vec::new();
    for i in 0..genus as u8 {
        let (a, b) = (2 * i, 2 * i + 1);
        relator.extend([a, b, a + n, b + n]);
    }
    let g = SurfaceGroup {
        names,
        generators,
        relator: Word(relator),
        genus,
        basepoint: HPoint::i(),
        margin: Some(circumradius + 1e-6),
    };
    g.validate()?;
    Ok(g)
}

pub fn standard_genus2_group() -> SurfaceGroup {
    standard_group(2).expect("genus-2 octagon group is valid")
}

/// Text serialization of a surface group.
pub fn write_grp(g: &SurfaceGroup) -> String {
    let mut s = String::new();
    writeln!(s, "# surface group").unwrap();
    writeln!(s, "genus {}", g.genus).unwrap();
    for (name, m) in g.names.iter().zip(&g.generators) {
        writeln!(s, "gen {} {} {} {} {}", name, m.a, m.b, m.c, m.d).unwrap();
    }
    writeln!(s, "relator {}", g.format_word(&g.relator)).unwrap();
    writeln!(s, "basepoint {} {}", g.basepoint.x, g.basepoint.y).unwrap();
    if let Some(m) = g.margin {
        writeln!(s, "margin {m}").unwrap();
    }
    s
}

pub fn parse_grp(text: &str) -> Result<SurfaceGroup, GroupError> {
    let mut names = Vec::new();
    let mut generators = Vec::new();
    let mut relator_src: Option<(usize, String)> = None;
    let mut genus = None;
    let mut basepoint = HPoint::i();
    let mut margin = None;
    let num = |line: usize, t: &str| {
        t.parse::<f64>().map_err(|_| GroupError::Parse { line, msg: format!("bad number '{t}'") })
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some(&head) = toks.first() else { continue };
        match head {
            "gen" => {
                if toks.len() != 6 {
                    return Err(GroupError::Parse { line, msg: "expected gen <name> a b c d".into() });
                }
                let v: Vec<f64> =
                    toks[2..].iter().map(|t| num(line, t)).collect::<Result<_, _>>()?;
                let m = Isometry::new(v[0], v[1], v[2], v[3])
                    .map_err(|e| GroupError::Parse { line, msg: e.to_string() })?;
                names.push(toks[1].to_string());
                generators.push(m);
            }
            "relator" => relator_src = Some((line, toks[1..].join(" "))),
            "basepoint" => {
                if toks.len() != 3 {
                    return Err(GroupError::Parse { line, msg: "expected basepoint x y".into() });
                }
                basepoint = HPoint::new(num(line, toks[1])?, num(line, toks[2])?)
                    .map_err(|e| GroupError::Parse { line, msg: e.to_string() })?;
            }
            "genus" => {
                let g = toks.get(1).and_then(|t| t.parse::<u32>().ok());
                genus = Some(g.ok_or(GroupError::Parse { line, msg: "expected genus <n>".into() })?);
            }
            "margin" => {
                let t = toks.get(1).ok_or(GroupError::Parse { line, msg: "expected margin <x>".into() })?;
                margin = Some(num(line, t)?);
            }
            other => {
                return Err(GroupError::Parse { line, msg: format!("unknown record '{other}'") })
            }
        }
    }
    let genus = genus.ok_or(GroupError::Invalid("missing genus record".into()))?;
    let mut g = SurfaceGroup { names, generators, relator: Word::default(), genus, basepoint, margin };
    let (line, src) = relator_src.ok_or(GroupError::Invalid("missing relator record".into()))?;
    g.relator = g.parse_word(&src).map_err(|e| GroupError::Parse { line, msg: e.to_string() })?;
    g.validate()?;
    Ok(g)
}

/// One enumerated group element.
#[derive(Debug, Clone, PartialEq)]
pub struct BallElement {
    pub element: Isometry,
    pub word: Word,
    pub displacement: f64,
}

#[derive(Debug, Clone)]
pub struct GroupBall {
    pub radius: f64,
    /// Sorted by word length, then lexicographically by word.
    pub elements: Vec<BallElement>,
    /// Number of distinct elements visited while enumerating.
    pub explored: usize,
    /// Smallest displacement among pruned frontier words; exceeds
    /// radius + margin whenever the frontier is nonempty.
    pub frontier_min: f64,
    pub margin: f64,
}

impl GroupBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn key_sign(g: &Isometry) -> f64 {
    let t = g.trace();
    if t.abs() > 1e-6 {
        t.signum()
    } else if g.canonical() == *g {
        1.0
    } else {
        -1.0
    }
}

/// Hash table over group elements keyed by their sign-normalized matrix
/// on a 1e-6 grid. Lookups probe neighbouring cells for coordinates close
/// to a rounding boundary.
#[derive(Debug, Default, Clone)]
pub struct ElementTable {
    map: HashMap<[i64; 4], u32>,
}

impl ElementTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn scaled(g: &Isometry) -> [f64; 4] {
        let s = key_sign(g);
        let e = g.entries();
        [e[0] * s * KEY_SCALE, e[1] * s * KEY_SCALE, e[2] * s * KEY_SCALE, e[3] * s * KEY_SCALE]
    }

    pub fn key(g: &Isometry) -> [i64; 4] {
        Self::scaled(g).map(|v| v.round() as i64)
    }

    pub fn get(&self, g: &Isometry) -> Option<u32> {
        let v = Self::scaled(g);
        let base = v.map(|x| x.round() as i64);
        if let Some(&id) = self.map.get(&base) {
            return Some(id);
        }
        let mut alts: Vec<(usize, i64)> = Vec::new();
        for (k, x) in v.iter().enumerate() {
            let f = x - x.floor();
            if (f - 0.5).abs() < 0.05 {
                let other = if x.round() == x.floor() { x.floor() as i64 + 1 } else { x.floor() as i64 };
                alts.push((k, other));
            }
        }
        for mask in 1u32..(1 << alts.len()) {
            let mut key = base;
            for (bit, &(k, val)) in alts.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    key[k] = val;
                }
            }
            if let Some(&id) = self.map.get(&key) {
                return Some(id);
            }
        }
        None
    }

    pub fn insert(&mut self, g: &Isometry, id: u32) {
        self.map.insert(Self::key(g), id);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

struct Node {
    g: Isometry,
    parent: u32,
    letter: u8,
    disp: f64,
}

fn word_of(nodes: &[Node], mut id: u32) -> Word {
    let mut w = Vec::new();
    while id != 0 {
        w.push(nodes[id as usize].letter);
        id = nodes[id as usize].parent;
    }
    w.reverse();
    Word(w)
}

/// Projected number of elements within distance `r` of the basepoint:
/// hyperbolic disk area over fundamental-domain area.
pub fn projected_count(g: &SurfaceGroup, r: f64) -> f64 {
    (r.cosh() - 1.0) / (-g.euler_characteristic()) as f64 + 1.0
}

pub fn enumerate_ball(g: &SurfaceGroup, r: f64) -> Result<GroupBall, GroupError> {
    enumerate_ball_capped(g, r, DEFAULT_CAP)
}

/// All elements h with dist(o, h·o) ≤ r, by breadth-first growth of words.
/// Words whose displacement exceeds r + margin are not expanded; since every
/// tile met by the segment from o to h·o has its centre within r + margin,
/// adjacent-tile steps reach each element through expanded words only.
pub fn enumerate_ball_capped(g: &SurfaceGroup, r: f64, cap: usize) -> Result<GroupBall, GroupError> {
    let r = r.max(0.0);
    let margin = g.coverage_margin();
    let limit = r + margin;
    let projected = projected_count(g, limit);
    if projected > cap as f64 {
        return Err(GroupError::RadiusTooLarge { projected, cap });
    }
    let o = g.basepoint;
    let letters = g.letters();
    let mut nodes = vec![Node { g: Isometry::identity(), parent: 0, letter: u8::MAX, disp: 0.0 }];
    let mut table = ElementTable::new();
    table.insert(&Isometry::identity(), 0);
    let mut layer: Vec<u32> = vec![0];
    let mut frontier_min = f64::INFINITY;
    while !layer.is_empty() {
        let expanded: Vec<Vec<(u32, u8, Isometry, f64)>> = layer
            .par_iter()
            .map(|&p| {
                let node = &nodes[p as usize];
                let back = if p == 0 { u8::MAX } else { g.inverse_letter(node.letter) };
                letters
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l as u8 != back)
                    .map(|(l, s)| {
                        let h = node.g.compose(s);
                        (p, l as u8, h, displacement(&h, o))
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (p, l, h, d) in expanded.into_iter().flatten() {
            if d > limit {
                frontier_min = frontier_min.min(d);
                continue;
            }
            if table.get(&h).is_some() {
                continue;
            }
            let id = nodes.len() as u32;
            table.insert(&h, id);
            nodes.push(Node { g: h, parent: p, letter: l, disp: d });
            next.push(id);
            if nodes.len() > cap {
                return Err(GroupError::RadiusTooLarge { projected: nodes.len() as f64, cap });
            }
        }
        layer = next;
    }
    let elements = (0..nodes.len())
        .filter(|&i| nodes[i].disp <= r)
        .map(|i| BallElement {
            element: nodes[i].g,
            word: word_of(&nodes, i as u32),
            displacement: nodes[i].disp,
        })
        .collect();
    Ok(GroupBall { radius: r, elements, explored: nodes.len(), frontier_min, margin })
}

/// Finds a word witness for `h`, searching the ball of its displacement.
pub fn find_element(g: &SurfaceGroup, h: &Isometry) -> Result<BallElement, GroupError> {
    let d = displacement(h, g.basepoint);
    let ball = enumerate_ball(g, d + 1e-7)?;
    ball.elements
        .into_iter()
        .find(|e| e.element.matrix_distance(h) < 1e-6)
        .ok_or(GroupError::NotInGroup)
}

/// True when `h` has no proper root in the group.
pub fn is_primitive(g: &SurfaceGroup, h: &Isometry) -> Result<bool, GroupError> {
    let len = translation_length(h)?;
    let l = axis(h)?;
    let delta = point_to_line(g.basepoint, &l).length;
    // A root shares the axis, so it moves o by at most len/2 + 2·delta.
    let ball = enumerate_ball(g, len / 2.0 + 2.0 * delta + 1e-7)?;
    for e in &ball.elements {
        let Ok(el) = translation_length(&e.element) else { continue };
        let p = (len / el).round();
        if p < 2.0 || (p * el - len).abs() > 1e-6 {
            continue;
        }
        if e.element.pow(p as i64).matrix_distance(h) < 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Normal form of elements of a double coset ⟨g1⟩ h ⟨g2⟩ (or, with no
/// left factor, a coset h⟨g2⟩): powers are chosen so that the feet of the
/// perpendicular sit in a fundamental interval of each axis.
#[derive(Debug, Clone)]
pub struct CosetKeyer {
    left: Option<(Isometry, Isometry, f64)>,
    right: (Isometry, GeodesicLine, Isometry, f64),
    table: ElementTable,
    count: u32,
}

const WRAP_TOL: f64 = 1e-6;

fn shifts(param: f64, period: f64) -> (i64, Vec<i64>) {
    let q = param / period;
    let k = q.floor();
    let f = q - k;
    let mut extra = Vec::new();
    if f < WRAP_TOL {
        extra.push(k as i64 - 1);
    }
    if f > 1.0 - WRAP_TOL {
        extra.push(k as i64 + 1);
    }
    (k as i64, extra)
}

impl CosetKeyer {
    pub fn new(left: Option<&Isometry>, right: &Isometry) -> Result<Self, GeomError> {
        let left = match left {
            Some(g1) => Some((*g1, axis(g1)?.standard_frame(), translation_length(g1)?)),
            None => None,
        };
        let l2 = axis(right)?;
        Ok(CosetKeyer {
            left,
            right: (*right, l2, l2.standard_frame(), translation_length(right)?),
            table: ElementTable::new(),
            count: 0,
        })
    }

    fn candidates(&self, h: &Isometry, foot1: Option<HPoint>, foot2: HPoint) -> Vec<Isometry> {
        let (g2, _, frame2, len2) = &self.right;
        let back = mobius_apply(&h.inverse(), foot2);
        let u = mobius_apply(frame2, back).y.ln();
        let (n0, nx) = shifts(u, *len2);
        let ns: Vec<i64> = std::iter::once(n0).chain(nx).collect();
        let ms: Vec<i64> = match (&self.left, foot1) {
            (Some((_, frame1, len1)), Some(f1)) => {
                let t = mobius_apply(frame1, f1).y.ln();
                let (m0, mx) = shifts(t, *len1);
                std::iter::once(-m0).chain(mx.into_iter().map(|m| -m)).collect()
            }
            _ => vec![0],
        };
        let mut out = Vec::new();
        for &m in &ms {
            let lhs = match &self.left {
                Some((g1, _, _)) => g1.pow(m).compose(h),
                None => *h,
            };
            for &n in &ns {
                out.push(lhs.compose(&g2.pow(n)));
            }
        }
        out
    }

    /// Registers the coset of `h`, given the feet of its perpendicular.
    /// Returns `true` if the coset had not been seen before.
    pub fn insert(&mut self, h: &Isometry, foot1: Option<HPoint>, foot2: HPoint) -> bool {
        let cands = self.candidates(h, foot1, foot2);
        if cands.iter().any(|c| self.table.get(c).is_some()) {
            return false;
        }
        let id = self.count;
        self.count += 1;
        for c in &cands {
            self.table.insert(c, id);
        }
        true
    }
}

/// A double-coset representative and its common perpendicular.
#[derive(Debug, Clone)]
pub struct CosetRep {
    pub element: BallElement,
    pub perp: PerpSegment,
}

/// Representatives of ⟨g1⟩\Γ/⟨g2⟩ whose perpendicular between axis(g1) and
/// h·axis(g2) has length ≤ r, each with its minimal word witness.
pub fn double_coset_reps(
    g: &SurfaceGroup,
    g1: &Isometry,
    g2: &Isometry,
    r: f64,
) -> Result<Vec<CosetRep>, GroupError> {
    double_coset_reps_capped(g, g1, g2, r, DEFAULT_CAP)
}

pub fn double_coset_reps_capped(
    g: &SurfaceGroup,
    g1: &Isometry,
    g2: &Isometry,
    r: f64,
    cap: usize,
) -> Result<Vec<CosetRep>, GroupError> {
    find_element(g, g1)?;
    find_element(g, g2)?;
    let l1 = axis(g1)?;
    let l2 = axis(g2)?;
    if r <= 0.0 {
        return Ok(Vec::new());
    }
    let o = g.basepoint;
    let radius = r
        + translation_length(g1)? / 2.0
        + translation_length(g2)? / 2.0
        + point_to_line(o, &l1).length
        + point_to_line(o, &l2).length
        + 1e-9;
    let ball = enumerate_ball_capped(g, radius, cap)?;
    let mut keyer = CosetKeyer::new(Some(g1), g2)?;
    let mut reps = Vec::new();
    for e in ball.elements {
        let m = e.element.apply_line(&l2);
        let perp = match common_perpendicular(&l1, &m) {
            Ok(Some(p)) if p.length <= r => p,
            _ => continue,
        };
        if keyer.insert(&e.element, Some(perp.foot1), perp.foot2) {
            reps.push(CosetRep { element: e, perp });
        }
    }
    Ok(reps)
}
