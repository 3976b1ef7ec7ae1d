//! Fixed-point search: quadtree candidates, capital-point checks and the
//! single-map and staged localization pipelines.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    convex_hull, detect_recurrence, displacement_index, gamma_from_orbit, hull_boundary_dist, hull_excess,
    iterate_orbit, sample_group_orbit, strictly_inside, winding_number, IndexConfig, OrbitError, OrbitRecord, PolyLoop,
    Result, EVAL_TOL,
};
use crate::geom::{BoxRegion, Point};
use crate::lipcalc::{CertifiedMap, Provenance};

/// Upper limit on the number of cells alive at one quadtree level.
const MAX_CELLS: usize = 1 << 20;

#[derive(Clone, Copy, Debug)]
struct Cell {
    region: BoxRegion,
    /// Integer position at the current level, used for adjacency.
    ij: (i64, i64),
    center_disp: f64,
}

/// Whether a cell may contain a fixed point.
///
/// If `q` is fixed and `c` the center, `|f(c) - c| <= eps |c - q| <= eps d / 2`
/// for the cell diagonal `d`. Maps whose bound is only estimated also keep
/// cells whose boundary index is nonzero.
fn may_contain_fixed(f: &CertifiedMap, region: &BoxRegion) -> Result<(bool, f64)> {
    let c = region.center();
    let d = f.displacement(c, EVAL_TOL)?.norm();
    let slack = 1e-12 + 4.0 * EVAL_TOL;
    if d <= f.eps * region.diag() / 2.0 + slack {
        return Ok((true, d));
    }
    if f.provenance == Provenance::Estimated {
        let lp = PolyLoop::new(region.corners().to_vec());
        let cfg = IndexConfig { samples: 64, ..IndexConfig::default() };
        let keep = match displacement_index(f, &lp, &cfg) {
            Ok(i) => i != 0,
            Err(OrbitError::FixedPointOnCurve { .. }) => true,
            Err(e) => return Err(e),
        };
        return Ok((keep, d));
    }
    Ok((false, d))
}

fn children(cell: &Cell) -> [(BoxRegion, (i64, i64)); 4] {
    let r = cell.region;
    let c = r.center();
    let (i, j) = cell.ij;
    [
        (BoxRegion::new(r.min, c), (2 * i, 2 * j)),
        (BoxRegion::new(Point::new(c.x, r.min.y), Point::new(r.max.x, c.y)), (2 * i + 1, 2 * j)),
        (BoxRegion::new(Point::new(r.min.x, c.y), Point::new(c.x, r.max.y)), (2 * i, 2 * j + 1)),
        (BoxRegion::new(c, r.max), (2 * i + 1, 2 * j + 1)),
    ]
}

fn filter_cells(f: &CertifiedMap, cand: Vec<(BoxRegion, (i64, i64))>) -> Result<Vec<Cell>> {
    let kept: Vec<Result<Option<Cell>>> = cand
        .into_par_iter()
        .map(|(region, ij)| {
            let (keep, d) = may_contain_fixed(f, &region)?;
            Ok(keep.then_some(Cell { region, ij, center_disp: d }))
        })
        .collect();
    let mut out = Vec::new();
    for k in kept {
        if let Some(c) = k? {
            out.push(c);
        }
    }
    Ok(out)
}

fn cell_size(r: &BoxRegion) -> f64 {
    r.width().max(r.height())
}

/// All leaf cells of the subdivision, before clustering.
fn candidate_cells(f: &CertifiedMap, region: &BoxRegion, depth_cap: usize, tol: f64) -> Result<Vec<Cell>> {
    if f.eps >= 1.0 {
        return Err(OrbitError::PreconditionViolated(format!("eps = {} is not below 1", f.eps)));
    }
    let mut cells = filter_cells(f, vec![(*region, (0, 0))])?;
    let mut depth = 0;
    while depth < depth_cap && cells.first().map(|c| cell_size(&c.region) > tol).unwrap_or(false) {
        let next: Vec<_> = cells.iter().flat_map(children).collect();
        if next.len() > MAX_CELLS {
            return Err(OrbitError::RefinementCap { cap: MAX_CELLS });
        }
        cells = filter_cells(f, next)?;
        depth += 1;
    }
    let size = cells.first().map(|c| cell_size(&c.region)).unwrap_or(tol);
    let accept = (1.0 + f.eps) * size.max(tol);
    cells.retain(|c| c.center_disp <= accept);
    Ok(cells)
}

/// Approximate fixed points of `f` in `region`, one per connected group of
/// surviving quadtree leaves: the leaf center with the smallest displacement.
pub fn fixed_point_candidates(f: &CertifiedMap, region: &BoxRegion, depth_cap: usize, tol: f64) -> Result<Vec<Point>> {
    let cells = candidate_cells(f, region, depth_cap, tol)?;
    let index: BTreeMap<(i64, i64), usize> = cells.iter().enumerate().map(|(k, c)| (c.ij, k)).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in index.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut stack = vec![start];
        let mut best: Option<&Cell> = None;
        while let Some((i, j)) = stack.pop() {
            let c = &cells[index[&(i, j)]];
            if best.map(|b| c.center_disp < b.center_disp).unwrap_or(true) {
                best = Some(c);
            }
            for di in -1..=1 {
                for dj in -1..=1 {
                    let nb = (i + di, j + dj);
                    if index.contains_key(&nb) && seen.insert(nb) {
                        stack.push(nb);
                    }
                }
            }
        }
        out.push(best.expect("component is nonempty").region.center());
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(out)
}

/// Descends from `start` keeping the `beam` surviving children with the
/// smallest center displacement at each level, until cells are below `tol`.
/// The result satisfies `|f(q) - q| <= (1 + eps) tol`.
pub fn refine_fixed_point(f: &CertifiedMap, start: &BoxRegion, tol: f64, beam: usize) -> Result<Option<Point>> {
    let mut cells = filter_cells(f, vec![(*start, (0, 0))])?;
    for _ in 0..200 {
        let Some(first) = cells.first() else { return Ok(None) };
        if cell_size(&first.region) <= tol {
            break;
        }
        let next: Vec<_> = cells.iter().flat_map(children).collect();
        cells = filter_cells(f, next)?;
        cells.sort_by(|a, b| a.center_disp.total_cmp(&b.center_disp).then(a.ij.cmp(&b.ij)));
        cells.truncate(beam.max(1));
    }
    let accept = (1.0 + f.eps) * tol;
    Ok(cells.first().filter(|c| c.center_disp <= accept).map(|c| c.region.center()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapitalReport {
    pub q: Point,
    /// `(n, Ind_q(Gamma_(p, n)))` for every tested `n`.
    pub indices: Vec<(usize, i64)>,
    /// All tested indices are nonzero. Only the listed `n` were tested.
    pub capital: bool,
}

/// Winding numbers of `Gamma_(p, n)` around `q` for each `n` in `m_list`,
/// using the iterates already recorded in `orbit`.
pub fn capital_point_check(orbit: &OrbitRecord, q: Point, m_list: &[usize], guard: f64) -> Result<CapitalReport> {
    if m_list.is_empty() {
        return Err(OrbitError::DegenerateInput("no return times to test".into()));
    }
    let mut indices = Vec::with_capacity(m_list.len());
    for &n in m_list {
        let g = gamma_from_orbit(orbit, n)?;
        indices.push((n, winding_number(&g, q, guard)?));
    }
    let capital = indices.iter().all(|&(_, w)| w != 0);
    Ok(CapitalReport { q, indices, capital })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocateConfig {
    pub orbit_len: usize,
    pub escape_radius: f64,
    /// Target cell size and displacement tolerance for the returned point.
    pub tol: f64,
    /// A point within this distance of an orbit sample gets a closure certificate.
    pub closure_tol: f64,
    /// Coarse search cells are `diam / coarse_cells` across.
    pub coarse_cells: usize,
    pub depth_cap: usize,
    pub beam: usize,
    /// Recurrence tolerance as a fraction of the orbit diameter.
    pub recurrence_rel: f64,
    pub max_recurrences: usize,
    pub guard: f64,
    /// Search margin around the orbit bounding box, relative to its diameter.
    pub margin: f64,
    pub max_attempts: usize,
    /// Accept maps whose bound is a sampled estimate.
    pub allow_estimated: bool,
    /// Largest admissible `eps`; the enclosure argument needs `1/8`.
    pub max_eps: f64,
}

impl Default for LocateConfig {
    fn default() -> Self {
        Self {
            orbit_len: 2000,
            escape_radius: 1e3,
            tol: 1e-8,
            closure_tol: 1e-6,
            coarse_cells: 128,
            depth_cap: 60,
            beam: 8,
            recurrence_rel: 1e-3,
            max_recurrences: 4,
            guard: 1e-9,
            margin: 0.05,
            max_attempts: 32,
            allow_estimated: false,
            max_eps: 0.125,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `q` is within `distance` of the orbit sample `sample`.
    Closure { distance: f64, sample: usize },
    /// `q` is strictly inside the orbit hull and a capital point.
    Enclosed { hull_margin: f64, recurrence_tol: f64, capital: CapitalReport },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Located {
    pub q: Point,
    pub displacement: f64,
    pub certificate: Certificate,
    pub orbit_len: usize,
}

fn nearest_sample(points: &[Point], q: Point) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.dist(q)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

fn check_preconditions(f: &CertifiedMap, cfg: &LocateConfig) -> Result<()> {
    if f.eps > cfg.max_eps {
        return Err(OrbitError::PreconditionViolated(format!("eps = {} exceeds {}", f.eps, cfg.max_eps)));
    }
    if f.provenance == Provenance::Estimated && !cfg.allow_estimated {
        return Err(OrbitError::PreconditionViolated("map bound is estimated; set allow_estimated to proceed".into()));
    }
    Ok(())
}

/// Finds `q` with `|f(q) - q| <= (1 + eps) tol` that is either close to the
/// orbit of `p` or enclosed by it.
pub fn locate_fixed_point(f: &CertifiedMap, p: Point, cfg: &LocateConfig) -> Result<Located> {
    locate_filtered(f, p, cfg, &|_| true)
}

fn locate_filtered(
    f: &CertifiedMap,
    p: Point,
    cfg: &LocateConfig,
    accept: &(dyn Fn(Point) -> bool + Sync),
) -> Result<Located> {
    check_preconditions(f, cfg)?;
    let dp = f.displacement(p, EVAL_TOL)?.norm();
    if dp <= cfg.tol && accept(p) {
        return Ok(Located {
            q: p,
            displacement: dp,
            certificate: Certificate::Closure { distance: 0.0, sample: 0 },
            orbit_len: 0,
        });
    }
    let orbit = iterate_orbit(f, p, cfg.orbit_len, cfg.escape_radius)?;
    orbit.require_bounded()?;
    let pts = &orbit.iterates;
    let n_iter = pts.len() - 1;

    // Closure: refine in boxes small enough that every point is within
    // closure_tol of the sample at their center, starting from the samples
    // that move least.
    let mut disp: Vec<(f64, usize)> = Vec::with_capacity(pts.len() - 1);
    for (i, w) in pts.windows(2).enumerate() {
        disp.push((w[0].dist(w[1]), i));
    }
    disp.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let half = 0.99 * cfg.closure_tol / std::f64::consts::SQRT_2;
    let mut centers: Vec<Point> = Vec::new();
    for &(_, i) in &disp {
        if centers.len() >= cfg.max_attempts {
            break;
        }
        let y = pts[i];
        if centers.iter().any(|c| c.dist(y) < half) {
            continue;
        }
        centers.push(y);
        if let Some(q) = refine_fixed_point(f, &BoxRegion::around(y, half), cfg.tol, cfg.beam)? {
            if accept(q) {
                let (sample, dist) = nearest_sample(pts, q);
                return Ok(Located {
                    q,
                    displacement: f.displacement(q, EVAL_TOL)?.norm(),
                    certificate: Certificate::Closure { distance: dist, sample },
                    orbit_len: n_iter,
                });
            }
        }
    }

    // Enclosed: a capital point strictly inside the hull.
    let hull = convex_hull(pts);
    let bbox = BoxRegion::bounding(pts).expect("orbit is nonempty");
    let diam = bbox.diag().max(cfg.tol);
    let region = bbox.expand(cfg.margin * diam);
    let mut coarse = candidate_cells(f, &region, cfg.depth_cap, diam / cfg.coarse_cells.max(1) as f64)?;
    coarse.retain(|c| hull_excess(&hull, c.region.center()) <= cell_size(&c.region));
    coarse.sort_by(|a, b| a.center_disp.total_cmp(&b.center_disp).then(a.ij.cmp(&b.ij)));

    let mut recurrence: Option<(f64, Vec<usize>)> = None;
    let mut tried: Vec<Point> = Vec::new();
    for c in coarse.iter().take(cfg.max_attempts) {
        let search = c.region.expand(cell_size(&c.region) / 2.0);
        let Some(q) = refine_fixed_point(f, &search, cfg.tol, cfg.beam)? else { continue };
        if tried.iter().any(|t| t.dist(q) <= 2.0 * cfg.tol) || !accept(q) {
            continue;
        }
        tried.push(q);
        if !strictly_inside(&hull, q) {
            continue;
        }
        if recurrence.is_none() {
            recurrence = Some(return_times(&orbit, cfg, diam)?);
        }
        let (rtol, times) = recurrence.as_ref().expect("set above");
        if times.is_empty() {
            continue;
        }
        match capital_point_check(&orbit, q, times, cfg.guard) {
            Ok(rep) if rep.capital => {
                return Ok(Located {
                    q,
                    displacement: f.displacement(q, EVAL_TOL)?.norm(),
                    certificate: Certificate::Enclosed {
                        hull_margin: hull_boundary_dist(&hull, q),
                        recurrence_tol: *rtol,
                        capital: rep,
                    },
                    orbit_len: n_iter,
                })
            }
            Ok(_) | Err(OrbitError::OnCurve { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(OrbitError::SearchFailed(format!(
        "no fixed point within {:.3e} of {} orbit samples; {} candidates in the hull region, none capital",
        cfg.closure_tol,
        centers.len(),
        tried.len()
    )))
}

/// Return times at the configured relative tolerance, loosened by doubling
/// until at least one return is found or the tolerance reaches the diameter.
fn return_times(orbit: &OrbitRecord, cfg: &LocateConfig, diam: f64) -> Result<(f64, Vec<usize>)> {
    let mut tol = cfg.recurrence_rel * diam;
    loop {
        let ev: Vec<usize> = detect_recurrence(orbit, tol)?
            .into_iter()
            .map(|e| e.n)
            .filter(|&n| n >= 2)
            .take(cfg.max_recurrences)
            .collect();
        if !ev.is_empty() || tol >= diam {
            return Ok((tol, ev));
        }
        tol *= 2.0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalConfig {
    pub locate: LocateConfig,
    /// Number of distinct points sampled from each group orbit.
    pub word_budget: usize,
    /// Allowed distance of a new orbit sample outside the previous hull.
    pub inclusion_tol: f64,
    /// Displacement below which a point counts as fixed by an earlier map.
    pub fix_tol: f64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self { locate: LocateConfig::default(), word_budget: 2000, inclusion_tol: 1e-6, fix_tol: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub q: Point,
    /// `|g_j(q) - q|` for every map `j`, including later stages.
    pub displacements: Vec<f64>,
    pub certificate: Certificate,
    /// Largest distance of a sampled orbit point of `q` outside the hull of
    /// the previous stage's sampled orbit.
    pub inclusion_excess: f64,
    pub inclusion_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalLocate {
    pub q: Point,
    pub stages: Vec<StageReport>,
}

/// Stage `i` finds a point fixed by `g_1, ..., g_i`, starting from the point
/// of the previous stage, and checks that its sampled group orbit lies in the
/// hull of the previous sampled group orbit.
pub fn locate_global_fixed_point(maps: &[CertifiedMap], p: Point, cfg: &GlobalConfig) -> Result<GlobalLocate> {
    if maps.is_empty() {
        return Err(OrbitError::DegenerateInput("no maps".into()));
    }
    let fixed_by = |q: Point, upto: usize| -> bool {
        maps[..upto].iter().all(|g| g.displacement(q, EVAL_TOL).map(|d| d.norm() <= cfg.fix_tol).unwrap_or(false))
    };
    let mut q_prev = p;
    let mut prev_orbit = sample_group_orbit(maps, p, cfg.word_budget, cfg.locate.escape_radius)?;
    let mut stages = Vec::with_capacity(maps.len());
    for (i, g) in maps.iter().enumerate() {
        let stage = i + 1;
        let fail = |e: OrbitError| OrbitError::StageFailed { stage, detail: e.to_string() };
        let located = locate_filtered(g, q_prev, &cfg.locate, &|q| fixed_by(q, i)).map_err(fail)?;
        let q = located.q;
        let orbit = sample_group_orbit(maps, q, cfg.word_budget, cfg.locate.escape_radius).map_err(fail)?;
        let hull = convex_hull(&prev_orbit);
        let excess = orbit.iter().map(|&z| hull_excess(&hull, z)).fold(0.0, f64::max);
        let displacements = maps
            .iter()
            .map(|m| m.displacement(q, EVAL_TOL).map(|d| d.norm()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| fail(e.into()))?;
        let pass = excess <= cfg.inclusion_tol;
        stages.push(StageReport {
            stage,
            q,
            displacements,
            certificate: located.certificate,
            inclusion_excess: excess,
            inclusion_pass: pass,
        });
        if !pass {
            return Err(OrbitError::StageFailed {
                stage,
                detail: format!("orbit leaves the previous hull by {excess:.3e} > {:.3e}", cfg.inclusion_tol),
            });
        }
        q_prev = q;
        prev_orbit = orbit;
    }
    Ok(GlobalLocate { q: q_prev, stages })
}
