//! Connected components and Moore-neighbor boundary tracing.

use std::collections::VecDeque;

use super::{BinaryMask, Contour, MaskError, Orientation, Point};

/// Moore neighborhood, clockwise on screen starting from west.
const MOORE: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// The largest 8-connected foreground component as its own mask. Ties go to
/// the component whose first pixel comes first in row-major order.
pub fn largest_component(mask: &BinaryMask) -> Result<BinaryMask, MaskError> {
    let (w, h) = (mask.width(), mask.height());
    let mut label = vec![0u32; w * h];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 0u32;
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !mask.data()[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in MOORE {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_signed(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
    }

    let (keep, _) = best.ok_or(MaskError::EmptyMask)?;
    BinaryMask::from_vec(w, h, label.iter().map(|&l| l == keep).collect())
}

/// Traces the outer boundary of the largest foreground component.
///
/// Moore-neighbor tracing with Jacob's stopping criterion (plus a stop when
/// the first move would repeat), starting from the first foreground pixel in
/// row-major order. The result passes through the
/// centers of boundary pixels and is oriented counter-clockwise in the sense
/// of [`Orientation::CounterClockwise`]. Holes are ignored.
pub fn extract_contour(mask: &BinaryMask) -> Result<Contour, MaskError> {
    let component = largest_component(mask)?;
    let size = component.foreground_count();
    if size < 3 {
        return Err(MaskError::DegenerateComponent(size));
    }

    let start_idx = component
        .data()
        .iter()
        .position(|&v| v)
        .expect("component is non-empty");
    let w = component.width();
    let start = ((start_idx % w) as i64, (start_idx / w) as i64);

    // The start pixel is the first in raster order, so its west neighbor is
    // background; that is where we "entered" from.
    const ENTRY_DIR: usize = 0;
    let mut pixels = vec![start];
    let mut cur = start;
    let mut back_dir = ENTRY_DIR;
    let limit = 4 * size + 8;

    loop {
        let mut found = None;
        for k in 1..=8 {
            let d = (back_dir + k) % 8;
            let cand = (cur.0 + MOORE[d].0, cur.1 + MOORE[d].1);
            if component.get_signed(cand.0, cand.1) {
                let prev = (back_dir + k - 1) % 8;
                let back = (cur.0 + MOORE[prev].0, cur.1 + MOORE[prev].1);
                found = Some((cand, back));
                break;
            }
        }
        let (next, back) = found.expect("component of >= 3 pixels has neighbors");
        let dir_to_back = direction(next, back);
        if next == start && dir_to_back == ENTRY_DIR {
            break;
        }
        // Jacob's criterion never fires when the start is only ever re-entered
        // diagonally; stopping before the first move repeats covers that case.
        if cur == start && pixels.len() > 1 && next == pixels[1] {
            pixels.pop();
            break;
        }
        pixels.push(next);
        cur = next;
        back_dir = dir_to_back;
        if pixels.len() > limit {
            // Jacob's criterion always terminates on a finite component; this
            // guards against a logic error turning into an endless loop.
            return Err(MaskError::DegenerateContour(
                "boundary tracing did not close".into(),
            ));
        }
    }

    let points: Vec<Point> = pixels
        .iter()
        .map(|&(x, y)| Point::new(x as f64, y as f64))
        .collect();
    let contour = Contour::new(points)?;
    Ok(match contour.orientation() {
        Orientation::Clockwise => contour.reversed(),
        _ => contour,
    })
}

fn direction(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    MOORE
        .iter()
        .position(|&m| m == d)
        .expect("backtrack pixel is a Moore neighbor")
}

/// Foreground pixels with at least one 4-neighbor that is background or
/// outside the frame, in row-major order. Covers every component and hole
/// border; used as the boundary point set by the distance metrics.
pub fn boundary_pixels(mask: &BinaryMask) -> Vec<(usize, usize)> {
    mask.foreground_pixels()
        .filter(|&(x, y)| {
            let (x, y) = (x as i64, y as i64);
            !mask.get_signed(x - 1, y)
                || !mask.get_signed(x + 1, y)
                || !mask.get_signed(x, y - 1)
                || !mask.get_signed(x, y + 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(w: usize, h: usize, x0: usize, y0: usize, bw: usize, bh: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            (x0..x0 + bw).contains(&x) && (y0..y0 + bh).contains(&y)
        })
        .unwrap()
    }

    fn as_pairs(c: &Contour) -> Vec<(i64, i64)> {
        c.points()
            .iter()
            .map(|p| (p.x as i64, p.y as i64))
            .collect()
    }

    #[test]
    fn block_3x3_gives_eight_perimeter_pixels_in_order() {
        let m = block(5, 5, 1, 1, 3, 3);
        let c = extract_contour(&m).unwrap();
        // Hand-enumerated perimeter of the block, starting at its top-left
        // pixel and running with positive shoelace area.
        assert_eq!(
            as_pairs(&c),
            vec![
                (1, 1),
                (2, 1),
                (3, 1),
                (3, 2),
                (3, 3),
                (2, 3),
                (1, 3),
                (1, 2)
            ]
        );
        assert_eq!(c.orientation(), Orientation::CounterClockwise);
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let m = block(5, 5, 2, 2, 1, 1);
        assert!(matches!(
            extract_contour(&m),
            Err(MaskError::DegenerateComponent(1))
        ));
        let two = block(5, 5, 2, 2, 2, 1);
        assert!(matches!(
            extract_contour(&two),
            Err(MaskError::DegenerateComponent(2))
        ));
    }

    #[test]
    fn empty_mask_errors() {
        let m = BinaryMask::new(4, 4).unwrap();
        assert!(matches!(extract_contour(&m), Err(MaskError::EmptyMask)));
    }

    #[test]
    fn largest_component_wins() {
        let m = BinaryMask::from_fn(20, 20, |x, y| {
            (x < 10 && y < 10) || ((15..17).contains(&x) && (15..17).contains(&y))
        })
        .unwrap();
        let c = extract_contour(&m).unwrap();
        assert_eq!(c.len(), 36);
        assert!(c.points().iter().all(|p| p.x < 10.0 && p.y < 10.0));
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let m = BinaryMask::from_ascii(&["#..", ".#.", "..#"]).unwrap();
        assert_eq!(largest_component(&m).unwrap().foreground_count(), 3);
        let c = extract_contour(&m).unwrap();
        // a line is traced out and back
        assert_eq!(as_pairs(&c), vec![(0, 0), (1, 1), (2, 2), (1, 1)]);
        assert_eq!(c.orientation(), Orientation::Collinear);
    }

    #[test]
    fn every_contour_point_touches_background() {
        let m = BinaryMask::from_ascii(&[
            "..........",
            "..####....",
            ".######...",
            ".###..##..",
            ".###..###.",
            "..#######.",
            "...####...",
            "..........",
        ])
        .unwrap();
        let c = extract_contour(&m).unwrap();
        for p in c.points() {
            let (x, y) = (p.x as i64, p.y as i64);
            assert!(m.get_signed(x, y));
            let touches = MOORE.iter().any(|&(dx, dy)| !m.get_signed(x + dx, y + dy));
            assert!(touches, "({x},{y}) is interior");
        }
    }

    #[test]
    fn contour_independent_of_padding() {
        let m = BinaryMask::from_ascii(&["####.", "###..", "#####", ".####"]).unwrap();
        let base = extract_contour(&m).unwrap();
        let padded = extract_contour(&m.pad(2, 1, 3, 4)).unwrap();
        assert_eq!(padded, base.translated(Point::new(3.0, 2.0)));
    }

    #[test]
    fn boundary_of_block_and_border_touching_mask() {
        let m = block(5, 5, 1, 1, 3, 3);
        assert_eq!(boundary_pixels(&m).len(), 8);
        let full = BinaryMask::from_fn(3, 3, |_, _| true).unwrap();
        assert_eq!(boundary_pixels(&full).len(), 8);
        assert_eq!(boundary_pixels(&full.pad(1, 1, 1, 1)).len(), 8);
    }
}
