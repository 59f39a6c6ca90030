//! Census of geodesic arcs joining two representatives (points or closed
//! geodesics) and directly orthogonal to both, as sorted length spectra.
//!
//! An arc leaving a closed geodesic is kept when its initial velocity and
//! the geodesic's tangent form a positive frame, and likewise for its final
//! velocity at the other end. At a point endpoint the condition is vacuous.

use std::fmt::Write as _;

use crate::fuchsian::{
    double_coset_reps_capped, enumerate_ball_capped, find_element, is_primitive, CosetKeyer,
    GroupError, SurfaceGroup, Word, DEFAULT_CAP,
};
use crate::hyp_plane::{
    axis, dist, mobius_apply, point_to_line, side_sign, translation_length, GeodesicLine,
    GeomError, HPoint, Isometry, TangentVector,
};
use crate::numfmt::sig12;

/// Lengths closer than this are one length with multiplicity.
pub const MULTIPLICITY_TOL: f64 = 1e-7;

/// Arcs shorter than this are a representative meeting a lift of the
/// other and are excluded as zero-length.
pub const ZERO_LENGTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("closed geodesic representative is not primitive")]
    NotPrimitive,
    #[error("expected {0}")]
    WrongKind(&'static str),
    #[error("spectrum csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepKind {
    Point(HPoint),
    ClosedGeodesic { element: Isometry, word: Word, orientation: Orientation },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub kind: RepKind,
    /// +1 for a point (trivial class), -1 for a closed geodesic.
    pub epsilon: i8,
}

impl Representative {
    pub fn point(q: HPoint) -> Self {
        Representative { kind: RepKind::Point(q), epsilon: 1 }
    }

    /// Closed geodesic of a primitive hyperbolic group element.
    pub fn geodesic(
        g: &SurfaceGroup,
        element: &Isometry,
        orientation: Orientation,
    ) -> Result<Self, CensusError> {
        translation_length(element)?;
        let found = find_element(g, element)?;
        if !is_primitive(g, element)? {
            return Err(CensusError::NotPrimitive);
        }
        Ok(Representative {
            kind: RepKind::ClosedGeodesic { element: *element, word: found.word, orientation },
            epsilon: -1,
        })
    }

    pub fn geodesic_from_word(
        g: &SurfaceGroup,
        word: &Word,
        orientation: Orientation,
    ) -> Result<Self, CensusError> {
        let element = g.evaluate(word);
        translation_length(&element)?;
        if !is_primitive(g, &element)? {
            return Err(CensusError::NotPrimitive);
        }
        Ok(Representative {
            kind: RepKind::ClosedGeodesic { element, word: word.clone(), orientation },
            epsilon: -1,
        })
    }

    /// Axis with the orientation of the closed geodesic.
    pub fn oriented_axis(&self) -> Option<GeodesicLine> {
        match &self.kind {
            RepKind::Point(_) => None,
            RepKind::ClosedGeodesic { element, orientation, .. } => {
                let l = axis(element).ok()?;
                Some(match orientation {
                    Orientation::Forward => l,
                    Orientation::Reversed => l.reversed(),
                })
            }
        }
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        if let RepKind::ClosedGeodesic { orientation, .. } = &mut r.kind {
            *orientation = match orientation {
                Orientation::Forward => Orientation::Reversed,
                Orientation::Reversed => Orientation::Forward,
            };
        }
        r
    }

    /// Image under a deck transformation or conjugation by `k`.
    pub fn translated(&self, k: &Isometry) -> Self {
        let mut r = self.clone();
        match &mut r.kind {
            RepKind::Point(q) => *q = mobius_apply(k, *q),
            RepKind::ClosedGeodesic { element, .. } => {
                *element = k.compose(element).compose(&k.inverse())
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcRecord {
    pub length: f64,
    pub coset_witness: Isometry,
    pub word: Word,
    pub start_sign: i8,
    pub end_sign: i8,
}

/// Bookkeeping of the orientation filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CensusDiagnostics {
    /// Perpendiculars found with orientation ignored.
    pub perpendiculars: usize,
    pub excluded_by_orientation: usize,
    pub ball_size: usize,
    pub explored: usize,
}

#[derive(Debug, Clone)]
pub struct LengthSpectrum {
    pub records: Vec<ArcRecord>,
    pub t_max: f64,
    pub rep1: Representative,
    pub rep2: Representative,
    pub diagnostics: CensusDiagnostics,
}

impl LengthSpectrum {
    pub fn lengths(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.length).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn finish(
    mut records: Vec<ArcRecord>,
    t_max: f64,
    rep1: Representative,
    rep2: Representative,
    diagnostics: CensusDiagnostics,
) -> LengthSpectrum {
    records.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.word.cmp(&b.word)));
    LengthSpectrum { records, t_max, rep1, rep2, diagnostics }
}

fn as_geodesic(r: &Representative) -> Result<(Isometry, GeodesicLine), CensusError> {
    match &r.kind {
        RepKind::ClosedGeodesic { element, .. } => {
            Ok((*element, r.oriented_axis().ok_or(GeomError::NotHyperbolic(element.trace()))?))
        }
        _ => Err(CensusError::WrongKind("a closed geodesic representative")),
    }
}

/// Arcs between two points: one per group element g with
/// 0 < dist(q1, g·q2) ≤ t.
pub fn census_point_point(
    g: &SurfaceGroup,
    q1: HPoint,
    q2: HPoint,
    t: f64,
) -> Result<LengthSpectrum, CensusError> {
    point_point(g, q1, q2, t, DEFAULT_CAP)
}

fn point_point(g: &SurfaceGroup, q1: HPoint, q2: HPoint, t: f64, cap: usize) -> Result<LengthSpectrum, CensusError> {
    let o = g.basepoint;
    let ball = enumerate_ball_capped(g, t.max(0.0) + dist(o, q1) + dist(o, q2), cap)?;
    let records: Vec<ArcRecord> = ball
        .elements
        .iter()
        .filter_map(|e| {
            let d = dist(q1, mobius_apply(&e.element, q2));
            (d > ZERO_LENGTH_TOL && d <= t).then(|| ArcRecord {
                length: d,
                coset_witness: e.element,
                word: e.word.clone(),
                start_sign: 1,
                end_sign: 1,
            })
        })
        .collect();
    let diag = CensusDiagnostics {
        perpendiculars: records.len(),
        excluded_by_orientation: 0,
        ball_size: ball.len(),
        explored: ball.explored,
    };
    Ok(finish(records, t, Representative::point(q1), Representative::point(q2), diag))
}

/// Arcs between two closed geodesics: one per double coset with disjoint
/// lifts, perpendicular length ≤ t and direct orientation at both feet.
pub fn census_geod_geod(
    g: &SurfaceGroup,
    c1: &Representative,
    c2: &Representative,
    t: f64,
) -> Result<LengthSpectrum, CensusError> {
    geod_geod(g, c1, c2, t, DEFAULT_CAP)
}

fn geod_geod(
    g: &SurfaceGroup,
    c1: &Representative,
    c2: &Representative,
    t: f64,
    cap: usize,
) -> Result<LengthSpectrum, CensusError> {
    let (g1, l1) = as_geodesic(c1)?;
    let (g2, l2) = as_geodesic(c2)?;
    let mut diag = CensusDiagnostics::default();
    let mut records = Vec::new();
    for rep in double_coset_reps_capped(g, &g1, &g2, t, cap)? {
        let h = rep.element.element;
        let p = rep.perp;
        diag.perpendiculars += 1;
        let start_sign = side_sign(&l1, &TangentVector { base: p.foot1, dir: p.dir1 })?;
        let end_sign = side_sign(&h.apply_line(&l2), &TangentVector { base: p.foot2, dir: p.dir2 })?;
        if start_sign == 1 && end_sign == 1 {
            records.push(ArcRecord {
                length: p.length,
                coset_witness: h,
                word: rep.element.word,
                start_sign,
                end_sign,
            });
        } else {
            diag.excluded_by_orientation += 1;
        }
    }
    Ok(finish(records, t, c1.clone(), c2.clone(), diag))
}

/// Arcs from a point to a closed geodesic: one per coset h⟨g2⟩ with
/// 0 < distance ≤ t and direct orientation at the arrival foot.
pub fn census_point_geod(
    g: &SurfaceGroup,
    q: HPoint,
    c2: &Representative,
    t: f64,
) -> Result<LengthSpectrum, CensusError> {
    let arcs = point_geod_arcs(g, q, c2, t, false, DEFAULT_CAP)?;
    Ok(finish(arcs.0, t, Representative::point(q), c2.clone(), arcs.1))
}

/// Arcs from a closed geodesic to a point; the orientation test applies at
/// the departure foot.
pub fn census_geod_point(
    g: &SurfaceGroup,
    c1: &Representative,
    q: HPoint,
    t: f64,
) -> Result<LengthSpectrum, CensusError> {
    let arcs = point_geod_arcs(g, q, c1, t, true, DEFAULT_CAP)?;
    Ok(finish(arcs.0, t, c1.clone(), Representative::point(q), arcs.1))
}

fn point_geod_arcs(
    g: &SurfaceGroup,
    q: HPoint,
    c: &Representative,
    t: f64,
    geodesic_first: bool,
    cap: usize,
) -> Result<(Vec<ArcRecord>, CensusDiagnostics), CensusError> {
    let (gc, lo) = as_geodesic(c)?;
    let l = axis(&gc)?;
    let o = g.basepoint;
    let mut diag = CensusDiagnostics::default();
    let mut records = Vec::new();
    if t <= 0.0 {
        return Ok((records, diag));
    }
    let radius =
        t + dist(o, q) + translation_length(&gc)? / 2.0 + point_to_line(o, &l).length + 1e-9;
    let ball = enumerate_ball_capped(g, radius, cap)?;
    diag.ball_size = ball.len();
    diag.explored = ball.explored;
    let mut keyer = CosetKeyer::new(None, &gc)?;
    for e in &ball.elements {
        let h = e.element;
        let pr = point_to_line(q, &h.apply_line(&l));
        let Some(toward_q) = pr.dir_at_foot else { continue };
        if pr.length <= ZERO_LENGTH_TOL || pr.length > t || !keyer.insert(&h, None, pr.foot) {
            continue;
        }
        diag.perpendiculars += 1;
        let line = h.apply_line(&lo);
        let (start_sign, end_sign) = if geodesic_first {
            (side_sign(&line, &TangentVector { base: pr.foot, dir: toward_q })?, 1)
        } else {
            let away = [-toward_q[0], -toward_q[1]];
            (1, side_sign(&line, &TangentVector { base: pr.foot, dir: away })?)
        };
        if start_sign == 1 && end_sign == 1 {
            records.push(ArcRecord {
                length: pr.length,
                coset_witness: h,
                word: e.word.clone(),
                start_sign,
                end_sign,
            });
        } else {
            diag.excluded_by_orientation += 1;
        }
    }
    Ok((records, diag))
}

/// Dispatches on the kinds of the two representatives.
pub fn census(
    g: &SurfaceGroup,
    c1: &Representative,
    c2: &Representative,
    t: f64,
) -> Result<LengthSpectrum, CensusError> {
    census_capped(g, c1, c2, t, DEFAULT_CAP)
}

/// [`census`] with an explicit cap on the enumerated group elements.
pub fn census_capped(
    g: &SurfaceGroup,
    c1: &Representative,
    c2: &Representative,
    t: f64,
    cap: usize,
) -> Result<LengthSpectrum, CensusError> {
    match (&c1.kind, &c2.kind) {
        (RepKind::Point(p), RepKind::Point(q)) => point_point(g, *p, *q, t, cap),
        (RepKind::Point(p), _) => {
            let (records, diag) = point_geod_arcs(g, *p, c2, t, false, cap)?;
            Ok(finish(records, t, c1.clone(), c2.clone(), diag))
        }
        (_, RepKind::Point(q)) => {
            let (records, diag) = point_geod_arcs(g, *q, c1, t, true, cap)?;
            Ok(finish(records, t, c1.clone(), c2.clone(), diag))
        }
        _ => geod_geod(g, c1, c2, t, cap),
    }
}

/// Right-continuous counting function N(T) = #{lengths ≤ T}, stored as
/// (jump abscissa, cumulative count) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountingFunction {
    pub steps: Vec<(f64, usize)>,
}

impl CountingFunction {
    /// Builds the step data from lengths in any order.
    pub fn from_lengths(lengths: &[f64]) -> Self {
        let mut v = lengths.to_vec();
        v.sort_by(f64::total_cmp);
        let mut steps: Vec<(f64, usize)> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (i, x) in v.iter().enumerate() {
            if x - last > MULTIPLICITY_TOL || steps.is_empty() {
                steps.push((*x, i + 1));
            } else {
                steps.last_mut().expect("nonempty").1 = i + 1;
            }
            last = *x;
        }
        CountingFunction { steps }
    }

    pub fn eval(&self, t: f64) -> usize {
        match self.steps.partition_point(|&(x, _)| x <= t) {
            0 => 0,
            k => self.steps[k - 1].1,
        }
    }

    /// Number of records with length in [t0, t1).
    pub fn window(&self, t0: f64, t1: f64) -> usize {
        let below = |t: f64| match self.steps.partition_point(|&(x, _)| x < t) {
            0 => 0,
            k => self.steps[k - 1].1,
        };
        below(t1) - below(t0)
    }
}

pub fn counting_function(s: &LengthSpectrum) -> CountingFunction {
    CountingFunction::from_lengths(&s.lengths())
}

/// One CSV row: a merged length with its multiplicity and signs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub length: f64,
    pub multiplicity: usize,
    pub start_sign: i8,
    pub end_sign: i8,
}

/// Merges consecutive lengths within `MULTIPLICITY_TOL`, one row per sign
/// pair inside each merged cluster.
pub fn spectrum_rows(s: &LengthSpectrum) -> Vec<SpectrumRow> {
    let rec = &s.records;
    let mut rows = Vec::new();
    let mut i = 0;
    while i < rec.len() {
        let mut j = i + 1;
        while j < rec.len() && rec[j].length - rec[j - 1].length <= MULTIPLICITY_TOL {
            j += 1;
        }
        let mut cluster: Vec<SpectrumRow> = Vec::new();
        for r in &rec[i..j] {
            match cluster
                .iter_mut()
                .find(|row| row.start_sign == r.start_sign && row.end_sign == r.end_sign)
            {
                Some(row) => row.multiplicity += 1,
                None => cluster.push(SpectrumRow {
                    length: rec[i].length,
                    multiplicity: 1,
                    start_sign: r.start_sign,
                    end_sign: r.end_sign,
                }),
            }
        }
        cluster.sort_by_key(|row| (-row.start_sign, -row.end_sign));
        rows.extend(cluster);
        i = j;
    }
    rows
}

pub const CSV_HEADER: &str = "length,multiplicity,start_sign,end_sign";

pub fn write_spectrum_csv(s: &LengthSpectrum) -> String {
    write_rows_csv(&spectrum_rows(s))
}

pub fn write_rows_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for row in rows {
        writeln!(out, "{},{},{},{}", sig12(row.length), row.multiplicity, row.start_sign, row.end_sign)
            .unwrap();
    }
    out
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>, CensusError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(CensusError::Csv { line: 1, msg: format!("expected header '{CSV_HEADER}'") }),
    }
    let mut rows = Vec::new();
    for (idx, l) in lines {
        let line = idx + 1;
        let err = |msg: &str| CensusError::Csv { line, msg: msg.to_string() };
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(err("expected four fields"));
        }
        let length: f64 = f[0].parse().map_err(|_| err("bad length"))?;
        let multiplicity: usize = f[1].parse().map_err(|_| err("bad multiplicity"))?;
        let start_sign: i8 = f[2].parse().map_err(|_| err("bad start sign"))?;
        let end_sign: i8 = f[3].parse().map_err(|_| err("bad end sign"))?;
        if !(length > 0.0) || start_sign.abs() != 1 || end_sign.abs() != 1 {
            return Err(err("length must be positive and signs ±1"));
        }
        rows.push(SpectrumRow { length, multiplicity, start_sign, end_sign });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::standard_genus2_group;

    #[test]
    fn point_point_examples() {
        let g = standard_genus2_group();
        let o = HPoint::i();
        assert!(census_point_point(&g, o, o, 3.0).unwrap().is_empty());
        let s = census_point_point(&g, o, o, 3.06).unwrap();
        assert_eq!(s.len(), 8);
        let expect = 2.0 * (1.0 + 2f64.sqrt()).acosh();
        assert!(s.records.iter().all(|r| (r.length - expect).abs() < 1e-9));
        assert!(s.records.iter().all(|r| r.start_sign == 1 && r.end_sign == 1));
    }

    #[test]
    fn point_point_symmetry() {
        let g = standard_genus2_group();
        let (p, q) = (HPoint::new(0.1, 0.9).unwrap(), HPoint::new(-0.3, 1.3).unwrap());
        let a = census_point_point(&g, p, q, 7.0).unwrap();
        let b = census_point_point(&g, q, p, 7.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.length - y.length).abs() < 1e-9);
        }
    }

    #[test]
    fn same_geodesic_below_first_perpendicular_is_empty() {
        let g = standard_genus2_group();
        let c = Representative::geodesic(&g, &g.generators[0], Orientation::Forward).unwrap();
        let s = census_geod_geod(&g, &c, &c, 0.1).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.diagnostics.perpendiculars, 0);
    }

    #[test]
    fn non_primitive_rejected() {
        let g = standard_genus2_group();
        let a2 = g.generators[0].pow(2);
        assert_eq!(
            Representative::geodesic(&g, &a2, Orientation::Forward),
            Err(CensusError::NotPrimitive)
        );
    }

    #[test]
    fn point_geod_zero_radius_is_empty() {
        let g = standard_genus2_group();
        let c = Representative::geodesic(&g, &g.generators[1], Orientation::Forward).unwrap();
        assert!(census_point_geod(&g, HPoint::i(), &c, 0.0).unwrap().is_empty());
    }

    #[test]
    fn counting_function_examples() {
        let n = CountingFunction::from_lengths(&[]);
        assert_eq!(n.eval(100.0), 0);
        let n = CountingFunction::from_lengths(&[2.5; 8]);
        assert_eq!(n.steps, vec![(2.5, 8)]);
        assert_eq!(n.eval(2.4999), 0);
        assert_eq!(n.eval(2.5), 8);
        let n = CountingFunction::from_lengths(&[1.0, 3.0, 2.0, 2.0 + 1e-9]);
        assert_eq!(n.steps.len(), 3);
        assert_eq!(n.eval(10.0), 4);
        assert_eq!(n.window(2.0, 3.0), 2);
    }

    #[test]
    fn csv_round_trip() {
        let g = standard_genus2_group();
        let o = HPoint::i();
        let s = census_point_point(&g, o, o, 5.0).unwrap();
        let text = write_spectrum_csv(&s);
        assert!(text.starts_with(CSV_HEADER));
        let rows = parse_spectrum_csv(&text).unwrap();
        assert_eq!(rows.iter().map(|r| r.multiplicity).sum::<usize>(), s.len());
        for w in rows.windows(2) {
            assert!(w[0].length < w[1].length);
        }
        assert_eq!(rows[0].multiplicity, 8);
        assert!(parse_spectrum_csv("length,mult\n").is_err());
    }
}
