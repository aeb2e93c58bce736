//! Incremental convex hull in eight dimensions (beneath-beyond with
//! visibility search), producing the outward facet normals that serve as
//! witness candidates.
//!
//! The triangulation is simplicial. Inputs in special position (the grid
//! vertex family has many coplanar degeneracies) are handled by a
//! deterministic hash-based joggle with escalating amplitude; every
//! successful build is verified to contain all input points before being
//! returned. Point sets that do not span all eight dimensions are rejected
//! with [`Error::Degenerate`] so callers can fall back to LP separation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::DIM;

/// One facet of the hull: supporting inequality `normal . x <= offset`
/// (unit normal, pointing away from the interior) plus the indices of the
/// input points spanning it.
#[derive(Debug, Clone, Copy)]
pub struct Facet {
    pub normal: [f64; DIM],
    pub offset: f64,
    pub vertices: [u32; DIM],
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub facets: Vec<Facet>,
    /// Joggle amplitude that produced a consistent triangulation; 0 means
    /// the input was used exactly.
    pub joggle: f64,
}

/// Residual below which a direction counts as affinely dependent.
const RANK_TOL: f64 = 1e-9;
/// A point this far beyond a facet plane sees the facet.
const VIS_EPS: f64 = 1e-12;
/// Escalating joggle amplitudes; the first attempt is exact.
const JOGGLE_AMPS: [f64; 4] = [0.0, 3e-6, 3e-5, 3e-4];

struct Rec {
    normal: [f64; DIM],
    offset: f64,
    /// Sorted ascending.
    verts: [u32; DIM],
    /// `neigh[i]` lies across the ridge omitting `verts[i]`.
    neigh: [u32; DIM],
    alive: bool,
    visit: u32,
}

/// Marker for an inconsistent triangulation attempt (resolved by joggling).
struct BuildFail;
type BResult<T> = std::result::Result<T, BuildFail>;

/// Convex hull of `points`, joggling as needed. Errors: [`Error::Degenerate`]
/// when the points span fewer than eight dimensions, [`Error::Numerical`]
/// when no joggle amplitude yields a verifiable triangulation.
pub fn convex_hull(points: &[[f64; DIM]]) -> Result<Hull> {
    let seed = seed_simplex(points)?;
    for (attempt, &amp) in JOGGLE_AMPS.iter().enumerate() {
        let owned;
        let pts: &[[f64; DIM]] = if amp == 0.0 {
            points
        } else {
            owned = joggled(points, amp, attempt as u64);
            &owned
        };
        if let Ok(hull) = build(pts, &seed) {
            // Containment certificate against the *original* coordinates.
            let tol = VIS_EPS + 20.0 * amp;
            if verify_containment(points, &hull, tol) {
                log::debug!(
                    "hull: {} facets from {} points (joggle {amp:.1e})",
                    hull.facets.len(),
                    points.len()
                );
                return Ok(Hull { facets: hull.facets, joggle: amp });
            }
        }
        log::debug!("hull attempt {attempt} (joggle {amp:.1e}) inconsistent; retrying");
    }
    Err(Error::Numerical(
        "hull construction failed for every joggle amplitude".into(),
    ))
}

/// Hull without any joggle; fails on inputs in special position. Used when
/// the exact triangulation itself is the object of interest.
pub fn convex_hull_exact(points: &[[f64; DIM]]) -> Result<Hull> {
    let seed = seed_simplex(points)?;
    match build(points, &seed) {
        Ok(hull) if verify_containment(points, &hull, VIS_EPS * 10.0) => Ok(hull),
        _ => Err(Error::Numerical(
            "input is not in general position; exact triangulation inconsistent".into(),
        )),
    }
}

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy affinely independent subset of size DIM+1, or the Degenerate error.
fn seed_simplex(points: &[[f64; DIM]]) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(DIM + 1);
    let mut basis: Vec<[f64; DIM]> = Vec::with_capacity(DIM);
    if points.is_empty() {
        return Err(Error::Degenerate("empty point set".into()));
    }
    idx.push(0);
    let p0 = points[0];
    for (i, p) in points.iter().enumerate().skip(1) {
        if idx.len() == DIM + 1 {
            break;
        }
        let mut d: [f64; DIM] = std::array::from_fn(|k| p[k] - p0[k]);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&d, q);
                for (dk, qk) in d.iter_mut().zip(q) {
                    *dk -= c * qk;
                }
            }
        }
        let norm = dot(&d, &d).sqrt();
        if norm > RANK_TOL {
            for dk in d.iter_mut() {
                *dk /= norm;
            }
            basis.push(d);
            idx.push(i);
        }
    }
    if idx.len() < DIM + 1 {
        return Err(Error::Degenerate(format!(
            "points span only {} of {DIM} dimensions",
            idx.len() - 1
        )));
    }
    Ok(idx)
}

/// Deterministic pseudo-random displacement for attempt `salt`.
fn joggled(points: &[[f64; DIM]], amp: f64, salt: u64) -> Vec<[f64; DIM]> {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            std::array::from_fn(|j| {
                let h = splitmix64((salt << 48) ^ ((i as u64) << 16) ^ j as u64);
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                p[j] + amp * (2.0 * u - 1.0)
            })
        })
        .collect()
}

/// Unit normal and offset of the hyperplane through the 8 facet points,
/// orientation unspecified. None when the points are too flat to define one.
fn facet_plane(pts: &[[f64; DIM]], verts: &[u32; DIM]) -> Option<([f64; DIM], f64)> {
    let x0 = &pts[verts[0] as usize];
    let mut basis: Vec<[f64; DIM]> = Vec::with_capacity(DIM - 1);
    for &vi in &verts[1..] {
        let p = &pts[vi as usize];
        let mut d: [f64; DIM] = std::array::from_fn(|k| p[k] - x0[k]);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&d, q);
                for (dk, qk) in d.iter_mut().zip(q) {
                    *dk -= c * qk;
                }
            }
        }
        let norm = dot(&d, &d).sqrt();
        if norm < 1e-12 {
            return None;
        }
        for dk in d.iter_mut() {
            *dk /= norm;
        }
        basis.push(d);
    }
    // The normal is the largest residual of the coordinate axes against the
    // in-plane basis; picking the largest keeps the computation conditioned.
    let mut best: Option<([f64; DIM], f64)> = None;
    for axis in 0..DIM {
        let mut d = [0.0; DIM];
        d[axis] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&d, q);
                for (dk, qk) in d.iter_mut().zip(q) {
                    *dk -= c * qk;
                }
            }
        }
        let norm = dot(&d, &d).sqrt();
        if best.as_ref().map_or(true, |&(_, bn)| norm > bn) {
            best = Some((d, norm));
        }
    }
    let (mut normal, norm) = best?;
    if norm < 1e-9 {
        return None;
    }
    for nk in normal.iter_mut() {
        *nk /= norm;
    }
    let offset = dot(&normal, x0);
    Some((normal, offset))
}

fn verify_containment(points: &[[f64; DIM]], hull: &Hull, tol: f64) -> bool {
    points.iter().all(|p| {
        hull.facets
            .iter()
            .all(|f| dot(&f.normal, p) - f.offset <= tol)
    })
}

fn build(pts: &[[f64; DIM]], seed: &[usize]) -> BResult<Hull> {
    let interior: [f64; DIM] = std::array::from_fn(|k| {
        seed.iter().map(|&i| pts[i][k]).sum::<f64>() / (DIM + 1) as f64
    });

    let mut recs: Vec<Rec> = Vec::new();
    let mut free: Vec<u32> = Vec::new();
    let mut visit_epoch: u32 = 0;

    let new_facet =
        |recs: &mut Vec<Rec>, free: &mut Vec<u32>, verts: [u32; DIM]| -> BResult<u32> {
            let (mut normal, mut offset) = facet_plane(pts, &verts).ok_or(BuildFail)?;
            let side = dot(&normal, &interior) - offset;
            if side.abs() < VIS_EPS {
                return Err(BuildFail);
            }
            if side > 0.0 {
                for nk in normal.iter_mut() {
                    *nk = -*nk;
                }
                offset = -offset;
            }
            let rec = Rec { normal, offset, verts, neigh: [u32::MAX; DIM], alive: true, visit: 0 };
            Ok(if let Some(id) = free.pop() {
                recs[id as usize] = rec;
                id
            } else {
                recs.push(rec);
                (recs.len() - 1) as u32
            })
        };

    // Initial simplex: one facet per omitted seed vertex.
    let mut facet_of_omitted = [0u32; DIM + 1];
    for omit in 0..=DIM {
        let mut verts: Vec<u32> = seed
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != omit)
            .map(|(_, &i)| i as u32)
            .collect();
        verts.sort_unstable();
        let arr: [u32; DIM] = verts.as_slice().try_into().unwrap();
        facet_of_omitted[omit] = new_facet(&mut recs, &mut free, arr)?;
    }
    for a in 0..=DIM {
        let fa = facet_of_omitted[a];
        for b in 0..=DIM {
            if a == b {
                continue;
            }
            // facets[a] contains seed[b]; across the ridge omitting it
            // lies the facet that omits seed[b].
            let vb = seed[b] as u32;
            let pos = recs[fa as usize].verts.iter().position(|&v| v == vb).unwrap();
            recs[fa as usize].neigh[pos] = facet_of_omitted[b];
        }
    }

    // Insert the remaining points one at a time.
    for (p_idx, p) in pts.iter().enumerate() {
        if seed.contains(&p_idx) {
            continue;
        }
        // Most-violated facet as the visibility seed.
        let mut start: Option<(u32, f64)> = None;
        for (id, r) in recs.iter().enumerate() {
            if !r.alive {
                continue;
            }
            let d = dot(&r.normal, p) - r.offset;
            if start.map_or(true, |(_, bd)| d > bd) {
                start = Some((id as u32, d));
            }
        }
        let Some((start_id, best_d)) = start else { return Err(BuildFail) };
        if best_d <= VIS_EPS {
            continue; // interior (or on the boundary): nothing to do
        }

        // Flood the visible region; collect horizon ridges on its rim.
        visit_epoch += 1;
        let mut visible: Vec<u32> = vec![start_id];
        recs[start_id as usize].visit = visit_epoch;
        let mut stack = vec![start_id];
        // (outer facet id, visible facet id, ridge vertices sorted)
        let mut horizon: Vec<(u32, u32, [u32; DIM - 1])> = Vec::new();
        while let Some(fid) = stack.pop() {
            let rec = &recs[fid as usize];
            let verts = rec.verts;
            let neigh = rec.neigh;
            for i in 0..DIM {
                let nid = neigh[i];
                if nid == u32::MAX {
                    return Err(BuildFail);
                }
                let nrec = &recs[nid as usize];
                if nrec.visit == visit_epoch {
                    continue;
                }
                if dot(&nrec.normal, p) - nrec.offset > VIS_EPS {
                    recs[nid as usize].visit = visit_epoch;
                    visible.push(nid);
                    stack.push(nid);
                } else {
                    let mut ridge = [0u32; DIM - 1];
                    let mut w = 0;
                    for (j, &v) in verts.iter().enumerate() {
                        if j != i {
                            ridge[w] = v;
                            w += 1;
                        }
                    }
                    horizon.push((nid, fid, ridge));
                }
            }
        }

        // Cone of new facets from p over each horizon ridge.
        let mut half_ridges: HashMap<[u32; DIM - 1], (u32, usize, bool)> = HashMap::new();
        for &(outer, dead, ridge) in &horizon {
            let mut verts = [0u32; DIM];
            verts[..DIM - 1].copy_from_slice(&ridge);
            verts[DIM - 1] = p_idx as u32;
            verts.sort_unstable();
            let fid = new_facet(&mut recs, &mut free, verts)?;
            let p_pos = verts.iter().position(|&v| v == p_idx as u32).unwrap();
            recs[fid as usize].neigh[p_pos] = outer;
            // Point the outer facet back at the cone facet: its slot for
            // this ridge is its single vertex not on the ridge.
            let outer_rec = &recs[outer as usize];
            let mut slot = None;
            for (j, &v) in outer_rec.verts.iter().enumerate() {
                if !ridge.contains(&v) {
                    slot = Some(j);
                    break;
                }
            }
            let Some(j) = slot else { return Err(BuildFail) };
            if recs[outer as usize].neigh[j] != dead {
                return Err(BuildFail);
            }
            recs[outer as usize].neigh[j] = fid;
            // Pair up the ridges interior to the cone (those containing p).
            for i in 0..DIM {
                if i == p_pos {
                    continue;
                }
                let mut key = [0u32; DIM - 1];
                let mut w = 0;
                for (j, &v) in recs[fid as usize].verts.iter().enumerate() {
                    if j != i {
                        key[w] = v;
                        w += 1;
                    }
                }
                match half_ridges.get_mut(&key) {
                    None => {
                        half_ridges.insert(key, (fid, i, false));
                    }
                    Some((ofid, oi, matched)) => {
                        if *matched {
                            return Err(BuildFail); // ridge shared three ways
                        }
                        let (ofid, oi) = (*ofid, *oi);
                        *matched = true;
                        recs[fid as usize].neigh[i] = ofid;
                        recs[ofid as usize].neigh[oi] = fid;
                    }
                }
            }
        }
        if half_ridges.values().any(|&(_, _, matched)| !matched) {
            return Err(BuildFail);
        }
        for fid in visible {
            recs[fid as usize].alive = false;
            free.push(fid);
        }
    }

    // Adjacency sanity, then strip the scaffolding.
    for r in recs.iter().filter(|r| r.alive) {
        for &n in &r.neigh {
            if n == u32::MAX || !recs[n as usize].alive {
                return Err(BuildFail);
            }
        }
    }
    let facets = recs
        .iter()
        .filter(|r| r.alive)
        .map(|r| Facet { normal: r.normal, offset: r.offset, vertices: r.verts })
        .collect();
    Ok(Hull { facets, joggle: 0.0 })
}
