//! Sample Kendall's tau in O(n log n).

/// Kendall's tau-b (Knight's merge-sort algorithm).
pub fn tau_b(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));

    let total = (n as u64) * (n as u64 - 1) / 2;
    let tied = |eq: &dyn Fn(usize) -> bool| {
        let (mut acc, mut run) = (0u64, 1u64);
        for i in 1..n {
            if eq(i) {
                run += 1;
            } else {
                acc += run * (run - 1) / 2;
                run = 1;
            }
        }
        acc + run * (run - 1) / 2
    };
    let ties_x = tied(&|i| pts[i][0] == pts[i - 1][0]);
    let ties_xy = tied(&|i| pts[i] == pts[i - 1]);

    let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let ties_y = {
        let (mut acc, mut run) = (0u64, 1u64);
        for i in 1..n {
            if ys[i] == ys[i - 1] {
                run += 1;
            } else {
                acc += run * (run - 1) / 2;
                run = 1;
            }
        }
        acc + run * (run - 1) / 2
    };

    let concordant_minus_discordant =
        total as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * swaps as i64;
    let denom = (((total - ties_x) as f64) * ((total - ties_y) as f64)).sqrt();
    concordant_minus_discordant as f64 / denom
}

// Sorts `v` ascending and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps =
        merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k2 = k + mid - i;
    buf[k2..].copy_from_slice(&v[j..]);
    v.copy_from_slice(&buf[..n]);
    swaps
}
