//! Monotone searches over closed integer intervals.

/// Largest `x` in `[lo, hi]` with `pred(x)`, assuming `pred` is monotone
/// (true on a prefix of the interval). `None` when `pred(lo)` is false.
pub(crate) fn max_satisfying(lo: u64, hi: u64, mut pred: impl FnMut(u64) -> bool) -> Option<u64> {
    debug_assert!(lo <= hi);
    if !pred(lo) {
        return None;
    }
    let (mut ok, mut cand) = (lo, hi);
    while ok < cand {
        let mid = ok + (cand - ok + 1) / 2;
        if pred(mid) {
            ok = mid;
        } else {
            cand = mid - 1;
        }
    }
    Some(ok)
}

/// Linear-scan twin of [`max_satisfying`], used as the slow reference path.
pub(crate) fn max_satisfying_linear(
    lo: u64,
    hi: u64,
    mut pred: impl FnMut(u64) -> bool,
) -> Option<u64> {
    let mut best = None;
    for x in lo..=hi {
        if pred(x) {
            best = Some(x);
        } else {
            break;
        }
    }
    best
}

/// Smallest `x` in `[lo, hi]` with `pred(x)`, assuming `pred` is monotone
/// (true on a suffix of the interval). `None` when `pred(hi)` is false.
pub(crate) fn min_satisfying(lo: u64, hi: u64, mut pred: impl FnMut(u64) -> bool) -> Option<u64> {
    debug_assert!(lo <= hi);
    if !pred(hi) {
        return None;
    }
    let (mut cand, mut ok) = (lo, hi);
    while cand < ok {
        let mid = cand + (ok - cand) / 2;
        if pred(mid) {
            ok = mid;
        } else {
            cand = mid + 1;
        }
    }
    Some(ok)
}

/// Linear-scan twin of [`min_satisfying`].
pub(crate) fn min_satisfying_linear(
    lo: u64,
    hi: u64,
    mut pred: impl FnMut(u64) -> bool,
) -> Option<u64> {
    (lo..=hi).find(|&x| pred(x))
}
