//! Level-curve extraction from gridded scalar fields (marching squares with
//! linear edge interpolation), used for the (T3, T4) alpha contours.

use alloc::vec::Vec;

/// A polyline in the field's coordinate system.
pub type Polyline = Vec<(f64, f64)>;

/// Extract the level-`z` contours of a row-major field `values[iy * nx + ix]`
/// sampled at `xs[ix], ys[iy]`.
///
/// Each cell contributes segments by the standard 16-case table with linear
/// interpolation along the crossing edges; segments are then chained into
/// polylines (closed loops repeat their first point at the end).
pub fn march(xs: &[f64], ys: &[f64], values: &[f64], z: f64) -> Vec<Polyline> {
    let nx = xs.len();
    let ny = ys.len();
    debug_assert_eq!(values.len(), nx * ny);
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();

    // Signed offset from the level. Nodes within roundoff of the level are
    // snapped a finite hair above it: a crossing then lands measurably off
    // the node, so two curve passes near the same node stay distinct, no
    // micro-segments of a few ULPs appear, and every junction has degree
    // two.
    let mut span = 0.0f64;
    for &val in values {
        span = span.max((val - z).abs());
    }
    if span == 0.0 {
        return Vec::new();
    }
    let nudge = 1e-6 * span;
    let v = |ix: usize, iy: usize| {
        let d = values[iy * nx + ix] - z;
        if d.abs() < nudge {
            nudge
        } else {
            d
        }
    };
    // Interpolated zero crossing on the edge between two nodes.
    let cross = |pa: (f64, f64), da: f64, pb: (f64, f64), db: f64| -> (f64, f64) {
        let t = (da / (da - db)).clamp(0.0, 1.0);
        (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
    };

    for iy in 0..ny.saturating_sub(1) {
        for ix in 0..nx.saturating_sub(1) {
            let bl = ((xs[ix], ys[iy]), v(ix, iy));
            let br = ((xs[ix + 1], ys[iy]), v(ix + 1, iy));
            let tl = ((xs[ix], ys[iy + 1]), v(ix, iy + 1));
            let tr = ((xs[ix + 1], ys[iy + 1]), v(ix + 1, iy + 1));

            let mut case = 0u8;
            if bl.1 > 0.0 {
                case |= 1;
            }
            if br.1 > 0.0 {
                case |= 2;
            }
            if tr.1 > 0.0 {
                case |= 4;
            }
            if tl.1 > 0.0 {
                case |= 8;
            }
            if case == 0 || case == 15 {
                continue;
            }

            let bottom = || cross(bl.0, bl.1, br.0, br.1);
            let right = || cross(br.0, br.1, tr.0, tr.1);
            let top = || cross(tl.0, tl.1, tr.0, tr.1);
            let left = || cross(bl.0, bl.1, tl.0, tl.1);

            match case {
                1 => segments.push((left(), bottom())),
                2 => segments.push((bottom(), right())),
                3 => segments.push((left(), right())),
                4 => segments.push((right(), top())),
                5 => {
                    // Saddle: resolve by the cell-center average.
                    let center = (bl.1 + br.1 + tl.1 + tr.1) / 4.0;
                    if center > 0.0 {
                        segments.push((left(), top()));
                        segments.push((right(), bottom()));
                    } else {
                        segments.push((left(), bottom()));
                        segments.push((right(), top()));
                    }
                }
                6 => segments.push((bottom(), top())),
                7 => segments.push((left(), top())),
                8 => segments.push((top(), left())),
                9 => segments.push((top(), bottom())),
                10 => {
                    let center = (bl.1 + br.1 + tl.1 + tr.1) / 4.0;
                    if center > 0.0 {
                        segments.push((top(), right()));
                        segments.push((bottom(), left()));
                    } else {
                        segments.push((top(), left()));
                        segments.push((bottom(), right()));
                    }
                }
                11 => segments.push((top(), right())),
                12 => segments.push((right(), left())),
                13 => segments.push((right(), bottom())),
                14 => segments.push((bottom(), left())),
                _ => unreachable!(),
            }
        }
    }
    chain(segments)
}

/// Chain loose segments into polylines by matching endpoints.
fn chain(mut segments: Vec<((f64, f64), (f64, f64))>) -> Vec<Polyline> {
    let close = |a: (f64, f64), b: (f64, f64)| {
        (a.0 - b.0).abs() <= 1e-12 * (1.0 + a.0.abs()) && (a.1 - b.1).abs() <= 1e-12 * (1.0 + a.1.abs())
    };
    let mut out = Vec::new();
    while let Some((start, end)) = segments.pop() {
        let mut line = alloc::vec![start, end];
        loop {
            let tail = *line.last().unwrap();
            let mut found = None;
            for (i, seg) in segments.iter().enumerate() {
                if close(seg.0, tail) {
                    found = Some((i, seg.1));
                    break;
                }
                if close(seg.1, tail) {
                    found = Some((i, seg.0));
                    break;
                }
            }
            match found {
                Some((i, next)) => {
                    line.push(next);
                    segments.swap_remove(i);
                }
                None => break,
            }
        }
        // Extend backwards from the head as well.
        loop {
            let head = line[0];
            let mut found = None;
            for (i, seg) in segments.iter().enumerate() {
                if close(seg.1, head) {
                    found = Some((i, seg.0));
                    break;
                }
                if close(seg.0, head) {
                    found = Some((i, seg.1));
                    break;
                }
            }
            match found {
                Some((i, prev)) => {
                    line.insert(0, prev);
                    segments.swap_remove(i);
                }
                None => break,
            }
        }
        out.push(line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_contour_radius_recovered() {
        // Field r^2 on a grid; the level r^2 = 1 contour is the unit circle.
        let n = 101;
        let xs: Vec<f64> = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect();
        let ys = xs.clone();
        let mut vals = alloc::vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                vals[iy * n + ix] = xs[ix] * xs[ix] + ys[iy] * ys[iy];
            }
        }
        let lines = march(&xs, &ys, &vals, 1.0);
        assert_eq!(lines.len(), 1, "one closed loop expected");
        let line = &lines[0];
        assert!(line.len() > 50);
        for &(x, y) in line {
            let r = (x * x + y * y).sqrt();
            assert!((r - 1.0).abs() < 0.02, "point ({x},{y}) radius {r}");
        }
        // Closed: endpoints coincide.
        let first = line[0];
        let last = *line.last().unwrap();
        assert!((first.0 - last.0).abs() < 1e-9 && (first.1 - last.1).abs() < 1e-9);
    }

    #[test]
    fn constant_field_has_no_contour() {
        let xs = alloc::vec![0.0, 1.0, 2.0];
        let ys = xs.clone();
        let vals = alloc::vec![3.0; 9];
        assert!(march(&xs, &ys, &vals, 1.0).is_empty());
        assert!(march(&xs, &ys, &vals, 5.0).is_empty());
    }
}
