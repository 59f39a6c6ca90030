//! Brute-force oracles shared by the integration tests. They enumerate
//! every freely reduced word up to a fixed length, with no displacement
//! pruning, and reduce results by their own tolerance-based matching.
#![allow(dead_code)]

use orthogeo::fuchsian::SurfaceGroup;
use orthogeo::hyp_plane::{
    axis, common_perpendicular, dist, mobius_apply, side_sign, translation_length, GeodesicLine,
    HPoint, Isometry, TangentVector,
};

/// Every element represented by a freely reduced word of length ≤ `max_len`,
/// without deduplication.
pub fn all_words(g: &SurfaceGroup, max_len: usize) -> Vec<Isometry> {
    let letters = g.letters();
    let n = g.rank();
    let mut out = vec![Isometry::identity()];
    let mut stack: Vec<(Isometry, usize, usize)> = vec![(Isometry::identity(), usize::MAX, 0)];
    while let Some((m, last, len)) = stack.pop() {
        if len == max_len {
            continue;
        }
        for (l, s) in letters.iter().enumerate() {
            if last != usize::MAX && (l + n) % (2 * n) == last {
                continue;
            }
            let h = m.compose(s);
            out.push(h);
            stack.push((h, l, len + 1));
        }
    }
    out
}

fn sign_normalized(m: &Isometry) -> [f64; 4] {
    let s = if m.trace() < 0.0 { -1.0 } else { 1.0 };
    m.entries().map(|x| x * s)
}

/// Distinct elements, matched entrywise within 1e-7 after sorting.
pub fn distinct(mut v: Vec<Isometry>) -> Vec<Isometry> {
    v.sort_by(|x, y| sign_normalized(x)[0].total_cmp(&sign_normalized(y)[0]));
    let mut out: Vec<Isometry> = Vec::new();
    let mut start = 0;
    for m in v {
        let a = sign_normalized(&m)[0];
        while start < out.len() && sign_normalized(&out[start])[0] < a - 1e-6 {
            start += 1;
        }
        if !out[start..].iter().any(|o| o.matrix_distance(&m) < 1e-7) {
            out.push(m);
        }
    }
    out
}

pub fn oracle_point_point(g: &SurfaceGroup, q1: HPoint, q2: HPoint, t: f64, max_len: usize) -> Vec<f64> {
    let mut lengths: Vec<f64> = distinct(all_words(g, max_len))
        .iter()
        .map(|h| dist(q1, mobius_apply(h, q2)))
        .filter(|&d| d > 1e-12 && d <= t)
        .collect();
    lengths.sort_by(f64::total_cmp);
    lengths
}

/// Perpendiculars between two oriented closed geodesics, one per double
/// coset, identified by (length, foot position along the first axis modulo
/// its period, side of departure). Returns (length, start_sign, end_sign).
pub fn oracle_geod_geod(
    g: &SurfaceGroup,
    g1: &Isometry,
    l1: &GeodesicLine,
    g2: &Isometry,
    l2: &GeodesicLine,
    t: f64,
    max_len: usize,
) -> Vec<(f64, i8, i8)> {
    let natural1 = axis(g1).unwrap();
    let natural2 = axis(g2).unwrap();
    let frame = natural1.standard_frame();
    let period = translation_length(g1).unwrap();
    let mut found: Vec<(f64, f64, i8, i8, i8)> = Vec::new();
    for h in all_words(g, max_len) {
        let Ok(Some(p)) = common_perpendicular(&natural1, &h.apply_line(&natural2)) else { continue };
        if p.length > t {
            continue;
        }
        let pos = mobius_apply(&frame, p.foot1).y.ln().rem_euclid(period);
        let side = side_sign(&natural1, &TangentVector { base: p.foot1, dir: p.dir1 }).unwrap();
        let dup = found.iter().any(|&(len, q, s, _, _)| {
            let dq = (q - pos).abs();
            (len - p.length).abs() < 1e-7 && dq.min(period - dq) < 1e-6 && s == side
        });
        if dup {
            continue;
        }
        let start = side_sign(l1, &TangentVector { base: p.foot1, dir: p.dir1 }).unwrap();
        let end = side_sign(&h.apply_line(l2), &TangentVector { base: p.foot2, dir: p.dir2 }).unwrap();
        found.push((p.length, pos, side, start, end));
    }
    let mut out: Vec<(f64, i8, i8)> = found.into_iter().map(|(l, _, _, a, b)| (l, a, b)).collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Multisets of lengths equal within `tol` per length.
pub fn same_lengths(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
