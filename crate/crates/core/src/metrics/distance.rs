//! Boundary distances, the Mahalanobis distance and the medical similarity
//! index.
//!
//! Distances between point sets go through an exact squared Euclidean
//! distance transform (lower envelope of parabolas, one pass per axis). All
//! inputs are integer pixel coordinates, so squared distances are exact
//! integers and a brute-force all-pairs search gives bit-identical results.

use super::{Metric, MetricReport, MetricValue, MetricsError};
use crate::mask_io::{boundary_pixels, BinaryMask};

/// Squared distance from every pixel to the nearest site, `INFINITY` when
/// there are no sites. Row-major, `width * height` entries.
pub fn squared_distance_transform(
    width: usize,
    height: usize,
    sites: &[(usize, usize)],
) -> Vec<f64> {
    let mut grid = vec![f64::INFINITY; width * height];
    for &(x, y) in sites {
        grid[y * width + x] = 0.0;
    }
    let mut line = Vec::with_capacity(width.max(height));
    let mut out = Vec::with_capacity(width.max(height));
    for x in 0..width {
        line.clear();
        line.extend((0..height).map(|y| grid[y * width + x]));
        lower_envelope(&line, &mut out);
        for (y, &v) in out.iter().enumerate() {
            grid[y * width + x] = v;
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        line.clear();
        line.extend_from_slice(row);
        lower_envelope(&line, &mut out);
        row.copy_from_slice(&out);
    }
    grid
}

/// One-dimensional transform `out[q] = min_p (q - p)^2 + f[p]` over the
/// finite entries of `f`.
fn lower_envelope(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in (0..n).filter(|&q| f[q].is_finite()) {
        let qf = q as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let pf = p as f64;
                    let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
                    if s <= *z.last().expect("z tracks v") {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.resize(n, f64::INFINITY);
        return;
    }
    let mut k = 0;
    for q in 0..n {
        let qf = q as f64;
        while k + 1 < v.len() && z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        out.push(d * d + f[v[k]]);
    }
}

/// Directed distances from each point of `from` to the set `to`, in the
/// order of `from`.
fn directed(
    width: usize,
    height: usize,
    from: &[(usize, usize)],
    to: &[(usize, usize)],
) -> Vec<f64> {
    let dt = squared_distance_transform(width, height, to);
    from.iter()
        .map(|&(x, y)| dt[y * width + x].sqrt())
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Hausdorff and average Hausdorff distance between the boundary pixel
/// sets, each the larger of its two directed values.
pub fn hausdorff(
    truth: &BinaryMask,
    pred: &BinaryMask,
) -> Result<(MetricValue, MetricValue), MetricsError> {
    truth.check_same_frame(pred)?;
    if let Some(reason) = empty_reason(truth, pred) {
        return Ok((
            MetricValue::undefined(reason),
            MetricValue::undefined(reason),
        ));
    }
    let (w, h) = (truth.width(), truth.height());
    let a = boundary_pixels(truth);
    let b = boundary_pixels(pred);
    let ab = directed(w, h, &a, &b);
    let ba = directed(w, h, &b, &a);
    Ok((
        MetricValue::Value(max(&ab).max(max(&ba))),
        MetricValue::Value(mean(&ab).max(mean(&ba))),
    ))
}

fn empty_reason(truth: &BinaryMask, pred: &BinaryMask) -> Option<&'static str> {
    match (truth.has_foreground(), pred.has_foreground()) {
        (false, false) => Some("truth and prediction are both empty"),
        (false, true) => Some("truth is empty"),
        (true, false) => Some("prediction is empty"),
        (true, true) => None,
    }
}

/// Mahalanobis distance between the foreground point clouds, using the
/// pixel-count weighted pooled covariance. Coordinates are taken relative
/// to the top-left corner of the union bounding box, so padding the frame
/// leaves the result bit-identical.
pub fn mahalanobis(truth: &BinaryMask, pred: &BinaryMask) -> Result<MetricValue, MetricsError> {
    truth.check_same_frame(pred)?;
    if let Some(reason) = empty_reason(truth, pred) {
        return Ok(MetricValue::undefined(reason));
    }
    let origin = truth
        .foreground_pixels()
        .chain(pred.foreground_pixels())
        .fold((usize::MAX, usize::MAX), |(mx, my), (x, y)| {
            (mx.min(x), my.min(y))
        });
    let moments = |m: &BinaryMask| {
        let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) =
            (0u64, 0u64, 0u64, 0u64, 0u64, 0u64);
        for (x, y) in m.foreground_pixels() {
            let (x, y) = ((x - origin.0) as u64, (y - origin.1) as u64);
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let (mx, my) = (sx as f64 / nf, sy as f64 / nf);
        // population covariance from integer moments
        let cxx = (nf * sxx as f64 - (sx as f64).powi(2)) / (nf * nf);
        let cyy = (nf * syy as f64 - (sy as f64).powi(2)) / (nf * nf);
        let cxy = (nf * sxy as f64 - sx as f64 * sy as f64) / (nf * nf);
        (nf, mx, my, cxx, cyy, cxy)
    };
    let (n1, x1, y1, a1, b1, c1) = moments(truth);
    let (n2, x2, y2, a2, b2, c2) = moments(pred);
    let (dx, dy) = (x1 - x2, y1 - y2);
    if dx == 0.0 && dy == 0.0 {
        return Ok(MetricValue::Value(0.0));
    }
    let n = n1 + n2;
    let sxx = (n1 * a1 + n2 * a2) / n;
    let syy = (n1 * b1 + n2 * b2) / n;
    let sxy = (n1 * c1 + n2 * c2) / n;
    let det = sxx * syy - sxy * sxy;
    if det <= 1e-12 * (sxx * syy).max(f64::MIN_POSITIVE) || det <= 0.0 {
        return Ok(MetricValue::undefined("pooled covariance is singular"));
    }
    let q = (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
    Ok(MetricValue::Value(q.max(0.0).sqrt()))
}

/// Medical similarity index with boundary tolerance `tolerance` (pixels).
///
/// Every misclassified pixel (FP or FN) is charged
/// `g(d) = max(0, d - tolerance) / tolerance`, where `d` is its distance to
/// the nearest truth boundary pixel, and
/// `MSI = 2 TP / (2 TP + sum g)`. Errors inside the tolerance band are free,
/// errors further away cost proportionally more; the value is 1 for a
/// perfect match and 0 without overlap.
pub fn msi(
    truth: &BinaryMask,
    pred: &BinaryMask,
    tolerance: f64,
) -> Result<MetricValue, MetricsError> {
    truth.check_same_frame(pred)?;
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(MetricsError::InvalidTolerance(tolerance));
    }
    if let Some(reason) = empty_reason(truth, pred) {
        return Ok(MetricValue::undefined(reason));
    }
    let (w, h) = (truth.width(), truth.height());
    let dt = squared_distance_transform(w, h, &boundary_pixels(truth));
    let mut tp = 0u64;
    let mut penalty = 0.0;
    for (i, (&t, &p)) in truth.data().iter().zip(pred.data()).enumerate() {
        if t && p {
            tp += 1;
        } else if t != p {
            penalty += (dt[i].sqrt() - tolerance).max(0.0) / tolerance;
        }
    }
    if tp == 0 {
        return Ok(MetricValue::Value(0.0));
    }
    let two_tp = 2.0 * tp as f64;
    Ok(MetricValue::Value(two_tp / (two_tp + penalty)))
}

pub fn distance_metrics(
    truth: &BinaryMask,
    pred: &BinaryMask,
) -> Result<MetricReport, MetricsError> {
    let (hd, avd) = hausdorff(truth, pred)?;
    let mut r = MetricReport::new();
    r.set(Metric::Hd, hd);
    r.set(Metric::Avd, avd);
    r.set(Metric::Mhd, mahalanobis(truth, pred)?);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(w: usize, h: usize, sites: &[(usize, usize)]) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; w * h];
        for y in 0..h {
            for x in 0..w {
                for &(sx, sy) in sites {
                    let dx = x as f64 - sx as f64;
                    let dy = y as f64 - sy as f64;
                    out[y * w + x] = out[y * w + x].min(dx * dx + dy * dy);
                }
            }
        }
        out
    }

    fn pixel(w: usize, h: usize, px: usize, py: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| (x, y) == (px, py)).unwrap()
    }

    #[test]
    fn single_pixels() {
        let (hd, avd) = hausdorff(&pixel(6, 6, 0, 0), &pixel(6, 6, 3, 4)).unwrap();
        assert_eq!(hd, MetricValue::Value(5.0));
        assert_eq!(avd, MetricValue::Value(5.0));
    }

    #[test]
    fn identity_is_zero() {
        let m = BinaryMask::from_fn(9, 7, |x, y| {
            (2..6).contains(&x) && (1..5).contains(&y) && x + y != 4
        })
        .unwrap();
        let r = distance_metrics(&m, &m).unwrap();
        for metric in [Metric::Hd, Metric::Avd, Metric::Mhd] {
            assert_eq!(r.value(metric), Some(0.0));
        }
        assert_eq!(msi(&m, &m, 1.0).unwrap(), MetricValue::Value(1.0));
    }

    #[test]
    fn empty_is_undefined() {
        let m = pixel(4, 4, 1, 1);
        let e = BinaryMask::new(4, 4).unwrap();
        let r = distance_metrics(&m, &e).unwrap();
        assert_eq!(
            r.get(Metric::Hd),
            Some(&MetricValue::undefined("prediction is empty"))
        );
        assert!(r.value(Metric::Mhd).is_none());
        assert!(msi(&e, &m, 1.0).unwrap().value().is_none());
    }

    #[test]
    fn shifted_block_matches_all_pairs() {
        let a = BinaryMask::from_fn(8, 5, |x, y| x < 3 && y < 3).unwrap();
        let b = BinaryMask::from_fn(8, 5, |x, y| (2..5).contains(&x) && y < 3).unwrap();
        let (pa, pb) = (boundary_pixels(&a), boundary_pixels(&b));
        assert_eq!((pa.len(), pb.len()), (8, 8));
        let d = |p: (usize, usize), q: (usize, usize)| {
            ((p.0 as f64 - q.0 as f64).powi(2) + (p.1 as f64 - q.1 as f64).powi(2)).sqrt()
        };
        let dir = |from: &[(usize, usize)], to: &[(usize, usize)]| {
            from.iter()
                .map(|&p| to.iter().map(|&q| d(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let want = dir(&pa, &pb).max(dir(&pb, &pa));
        assert_eq!(hausdorff(&a, &b).unwrap().0, MetricValue::Value(want));
        assert_eq!(want, 2.0);
    }

    #[test]
    fn mahalanobis_of_translated_blob() {
        // same shape shifted by 2 in x: covariance is the blob's own
        let a =
            BinaryMask::from_fn(12, 6, |x, y| (1..5).contains(&x) && (1..3).contains(&y)).unwrap();
        let b =
            BinaryMask::from_fn(12, 6, |x, y| (3..7).contains(&x) && (1..3).contains(&y)).unwrap();
        // x in {0,1,2,3}: var 1.25; y in {0,1}: var 0.25; no correlation
        let want = (4.0f64 / 1.25).sqrt();
        let got = mahalanobis(&a, &b).unwrap().value().unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn mahalanobis_singular() {
        let a = BinaryMask::from_fn(6, 6, |x, y| y == 1 && x < 4).unwrap();
        let b = BinaryMask::from_fn(6, 6, |x, y| y == 3 && x < 4).unwrap();
        assert!(mahalanobis(&a, &b).unwrap().value().is_none());
    }

    #[test]
    fn msi_dilation_within_tolerance() {
        let truth =
            BinaryMask::from_fn(20, 20, |x, y| (5..15).contains(&x) && (6..13).contains(&y))
                .unwrap();
        let dilated =
            BinaryMask::from_fn(20, 20, |x, y| (4..16).contains(&x) && (5..14).contains(&y))
                .unwrap();
        assert_eq!(msi(&truth, &dilated, 2.0).unwrap(), MetricValue::Value(1.0));
        let far = BinaryMask::from_fn(20, 20, |x, y| (0..20).contains(&x) && (0..20).contains(&y))
            .unwrap();
        let v = msi(&truth, &far, 2.0).unwrap().value().unwrap();
        assert!(v > 0.0 && v < 1.0);
        let disjoint = BinaryMask::from_fn(20, 20, |x, y| x < 3 && y < 3).unwrap();
        assert_eq!(
            msi(&truth, &disjoint, 2.0).unwrap(),
            MetricValue::Value(0.0)
        );
        assert!(msi(&truth, &far, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn transform_matches_brute_force(
            w in 1usize..14,
            h in 1usize..14,
            raw in prop::collection::vec((0usize..14, 0usize..14), 0..10),
        ) {
            let sites: Vec<(usize, usize)> = raw.into_iter().filter(|&(x, y)| x < w && y < h).collect();
            prop_assert_eq!(squared_distance_transform(w, h, &sites), brute(w, h, &sites));
        }

        #[test]
        fn hausdorff_is_symmetric(
            a in prop::collection::vec(any::<bool>(), 64),
            b in prop::collection::vec(any::<bool>(), 64),
        ) {
            let a = BinaryMask::from_vec(8, 8, a).unwrap();
            let b = BinaryMask::from_vec(8, 8, b).unwrap();
            prop_assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
        }
    }
}
