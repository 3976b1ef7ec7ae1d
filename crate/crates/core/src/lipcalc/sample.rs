//! Seeded random expressions over analytic leaves, for soundness experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MapExpr, TrigMap};
use crate::geom::Point;

fn leaf(rng: &mut ChaCha8Rng, scale: f64) -> MapExpr {
    let unit = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    match rng.gen_range(0..4) {
        0 => MapExpr::Rotation { theta: scale * unit(rng), center: Point::new(2.0 * unit(rng), 2.0 * unit(rng)) },
        1 => MapExpr::Translation { offset: Point::new(unit(rng), unit(rng)) },
        2 => {
            let m = [[unit(rng), unit(rng)], [unit(rng), unit(rng)]];
            let norm = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let s = scale * rng.gen_range(0.1..1.0) / norm;
            MapExpr::Affine {
                linear: [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]],
                offset: Point::new(0.1 * unit(rng), 0.1 * unit(rng)),
            }
        }
        _ => {
            let w = rng.gen_range(0.5..2.0);
            let a = scale * rng.gen_range(0.1..1.0) / w;
            if rng.gen_bool(0.5) {
                MapExpr::Trig(TrigMap::shear(a, w))
            } else {
                MapExpr::Trig(TrigMap {
                    ax: 0.0,
                    wx: Point::ORIGIN,
                    phx: 0.0,
                    ay: a,
                    wy: Point::new(w, 0.0),
                    phy: unit(rng),
                })
            }
        }
    }
}

fn node(rng: &mut ChaCha8Rng, depth: u32, scale: f64) -> MapExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng, scale);
    }
    match rng.gen_range(0..3) {
        0 => MapExpr::compose(node(rng, depth - 1, scale), node(rng, depth - 1, scale)),
        1 => MapExpr::inverse(node(rng, depth - 1, scale)),
        _ => MapExpr::commutator(node(rng, depth - 1, scale), node(rng, depth - 1, scale)),
    }
}

/// A random expression of depth at most `depth` whose leaves have bounds at
/// most `scale`, redrawn until its propagated bound is below `max_bound`.
pub fn random_expression(seed: u64, depth: u32, scale: f64, max_bound: f64) -> MapExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let e = node(&mut rng, depth, scale);
        if matches!(e.propagate_bound(), Ok(b) if b <= max_bound) {
            return e;
        }
    }
}
