//! Brute-force reference implementations shared by the integration tests.
//! They count errors directly at every threshold and never touch the
//! library's DET or hull code.

#![allow(dead_code)]

/// `(p_miss, p_fa)` at every distinct score and at `+∞`, by direct counting.
pub fn operating_points(bona: &[f64], spoof: &[f64]) -> Vec<(f64, f64)> {
    let mut thresholds: Vec<f64> = bona.iter().chain(spoof).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);
    thresholds
        .iter()
        .map(|&t| {
            let miss = bona.iter().filter(|&&s| s < t).count() as f64 / bona.len() as f64;
            let fa = spoof.iter().filter(|&&s| s >= t).count() as f64 / spoof.len() as f64;
            (miss, fa)
        })
        .collect()
}

/// Lowest point of the operating points' convex hull on the line
/// `p_miss = p_fa`, found by trying every pair of points.
pub fn eer_oracle(bona: &[f64], spoof: &[f64]) -> f64 {
    let pts = operating_points(bona, spoof);
    let mut best = f64::INFINITY;
    for &(ma, fa) in &pts {
        let da = ma - fa;
        if da == 0.0 {
            best = best.min(ma);
        }
        if da <= 0.0 {
            continue;
        }
        for &(mb, fb) in &pts {
            let db = mb - fb;
            if db >= 0.0 {
                continue;
            }
            let t = -db / (da - db);
            best = best.min(t * ma + (1.0 - t) * mb);
        }
    }
    best
}

pub struct Costs {
    pub p_target: f64,
    pub p_nontarget: f64,
    pub p_spoof: f64,
    pub c_miss: f64,
    pub c_fa: f64,
    pub c_fa_spoof: f64,
    pub asv_pmiss: f64,
    pub asv_pfa: f64,
    pub asv_pmiss_spoof: f64,
}

/// Tandem cost at every threshold, normalized by the better of the two
/// trivial countermeasures (accept all, reject all); minimum returned.
pub fn min_tdcf_oracle(bona: &[f64], spoof: &[f64], c: &Costs) -> f64 {
    let asv_floor = c.p_target * c.c_miss * c.asv_pmiss + c.p_nontarget * c.c_fa * c.asv_pfa;
    let miss_weight =
        c.p_target * c.c_miss * (1.0 - c.asv_pmiss) - c.p_nontarget * c.c_fa * c.asv_pfa;
    let fa_weight = c.p_spoof * c.c_fa_spoof * (1.0 - c.asv_pmiss_spoof);
    let accept_all = asv_floor + fa_weight;
    let reject_all = asv_floor + miss_weight;
    let norm = accept_all.min(reject_all);
    operating_points(bona, spoof)
        .iter()
        .map(|&(m, f)| (asv_floor + miss_weight * m + fa_weight * f) / norm)
        .fold(f64::INFINITY, f64::min)
}
