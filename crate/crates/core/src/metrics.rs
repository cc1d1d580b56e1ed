//! DET curve, equal error rate and normalized minimum tandem detection cost.
//!
//! Scores follow the CM convention: higher means more bona fide. At threshold
//! `τ`, `p_miss` is the fraction of bona fide scores below `τ` and `p_fa` the
//! fraction of spoof scores at or above `τ`.
//!
//! The EER is read off the lower convex hull of the DET operating points: the
//! hull edge that crosses `p_miss = p_fa` is interpolated linearly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonafide" => Ok(Label::Bonafide),
            "spoof" => Ok(Label::Spoof),
            other => Err(Error::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub utterance_id: String,
    pub label: Label,
    /// Attack id such as `A08`; `-` for bona fide.
    pub attack_id: String,
    pub score: f64,
}

impl ScoreRecord {
    pub fn new(
        utterance_id: impl Into<String>,
        label: Label,
        attack_id: impl Into<String>,
        score: f64,
    ) -> Self {
        Self {
            utterance_id: utterance_id.into(),
            label,
            attack_id: attack_id.into(),
            score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub p_miss: f64,
    pub p_fa: f64,
}

fn split_scores(records: &[ScoreRecord]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut bona = Vec::new();
    let mut spoof = Vec::new();
    for r in records {
        if !r.score.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite score for {}",
                r.utterance_id
            )));
        }
        match r.label {
            Label::Bonafide => bona.push(r.score),
            Label::Spoof => spoof.push(r.score),
        }
    }
    if bona.is_empty() {
        return Err(Error::SingleClass("no bona fide records"));
    }
    if spoof.is_empty() {
        return Err(Error::SingleClass("no spoof records"));
    }
    Ok((bona, spoof))
}

/// Operating points at every distinct score, ascending, followed by `τ = +∞`.
pub fn det_curve(records: &[ScoreRecord]) -> Result<Vec<DetPoint>> {
    let (bona, spoof) = split_scores(records)?;
    let (nb, ns) = (bona.len() as f64, spoof.len() as f64);

    let mut all: Vec<(f64, bool)> = bona
        .iter()
        .map(|&s| (s, true))
        .chain(spoof.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points = Vec::new();
    let (mut bona_below, mut spoof_below) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let threshold = all[i].0;
        points.push(DetPoint {
            threshold,
            p_miss: bona_below as f64 / nb,
            p_fa: (spoof.len() - spoof_below) as f64 / ns,
        });
        while i < all.len() && all[i].0 == threshold {
            if all[i].1 {
                bona_below += 1;
            } else {
                spoof_below += 1;
            }
            i += 1;
        }
    }
    points.push(DetPoint {
        threshold: f64::INFINITY,
        p_miss: 1.0,
        p_fa: 0.0,
    });
    Ok(points)
}

/// Where the segment `a → b` crosses `p_miss = p_fa`.
pub(crate) fn diagonal_crossing(a: (f64, f64), b: (f64, f64)) -> f64 {
    let da = a.0 - a.1;
    let db = b.0 - b.1;
    if da == db {
        return a.0;
    }
    let t = -da / (db - da);
    a.0 + t * (b.0 - a.0)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

pub fn eer(records: &[ScoreRecord]) -> Result<f64> {
    let points = det_curve(records)?;
    // Points arrive with p_miss non-decreasing and p_fa non-increasing.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points.iter().map(|p| (p.p_miss, p.p_fa)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    let idx = hull
        .iter()
        .position(|&(pm, pfa)| pm >= pfa)
        .expect("the final point (1, 0) lies on or past the diagonal");
    let (pm, pfa) = hull[idx];
    if pm == pfa || idx == 0 {
        return Ok(pm);
    }
    Ok(diagonal_crossing(hull[idx - 1], hull[idx]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdcfParams {
    pub p_target: f64,
    pub p_nontarget: f64,
    pub p_spoof: f64,
    pub c_miss: f64,
    pub c_fa: f64,
    pub c_fa_spoof: f64,
    /// ASV miss rate on target trials.
    pub asv_pmiss: f64,
    /// ASV false-alarm rate on zero-effort non-target trials.
    pub asv_pfa: f64,
    /// ASV miss rate on spoof trials; `1 − asv_pmiss_spoof` spoofs pass the ASV.
    pub asv_pmiss_spoof: f64,
}

pub const DEFAULT_TDCF_TOML: &str = include_str!("../configs/tdcf_default.toml");

impl Default for TdcfParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_TDCF_TOML).expect("bundled t-DCF parameters are valid")
    }
}

impl TdcfParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: TdcfParams = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let priors = [self.p_target, self.p_nontarget, self.p_spoof];
        if priors.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("priors must lie in [0, 1]".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("priors sum to {sum}, expected 1")));
        }
        if [self.c_miss, self.c_fa, self.c_fa_spoof]
            .iter()
            .any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(Error::Config(
                "costs must be finite and non-negative".into(),
            ));
        }
        if [self.asv_pmiss, self.asv_pfa, self.asv_pmiss_spoof]
            .iter()
            .any(|r| !(0.0..=1.0).contains(r))
        {
            return Err(Error::Config("ASV error rates must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `(C0, C1, C2)` of the constrained-ASV tandem cost
    /// `C0 + C1·p_miss_cm + C2·p_fa_cm`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        let c0 = self.p_target * self.c_miss * self.asv_pmiss
            + self.p_nontarget * self.c_fa * self.asv_pfa;
        let c1 = self.p_target * self.c_miss - c0;
        let c2 = self.p_spoof * self.c_fa_spoof * (1.0 - self.asv_pmiss_spoof);
        (c0, c1, c2)
    }
}

/// Normalized minimum t-DCF over all DET thresholds.
pub fn min_tdcf(records: &[ScoreRecord], params: &TdcfParams) -> Result<f64> {
    params.validate()?;
    let (c0, c1, c2) = params.coefficients();
    if c1 <= 0.0 || c2 <= 0.0 {
        return Err(Error::DegenerateCoefficients { c1, c2 });
    }
    let norm = (c0 + c1).min(c0 + c2);
    let points = det_curve(records)?;
    Ok(points
        .iter()
        .map(|p| (c0 + c1 * p.p_miss + c2 * p.p_fa) / norm)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// `pooled` or an attack id.
    pub scope: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub n_bonafide: usize,
    pub n_spoof: usize,
}

pub const POOLED_SCOPE: &str = "pooled";

impl Report {
    pub fn get(&self, scope: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.scope == scope && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scope,metric,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.scope, r.metric, r.value));
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trials: {} bona fide, {} spoof",
            self.n_bonafide, self.n_spoof
        )?;
        for r in &self.rows {
            writeln!(f, "{:<10} {:<12} {:.6}", r.scope, r.metric, r.value)?;
        }
        Ok(())
    }
}

/// Pooled EER (percent) and min t-DCF, optionally with per-attack EER that
/// pits each attack's spoofs against all bona fide trials.
pub fn report(
    records: &[ScoreRecord],
    params: &TdcfParams,
    group_by_attack: bool,
) -> Result<Report> {
    let mut rows = vec![
        ReportRow {
            scope: POOLED_SCOPE.into(),
            metric: "eer_percent".into(),
            value: 100.0 * eer(records)?,
        },
        ReportRow {
            scope: POOLED_SCOPE.into(),
            metric: "min_tdcf".into(),
            value: min_tdcf(records, params)?,
        },
    ];

    let bona: Vec<ScoreRecord> = records
        .iter()
        .filter(|r| r.label == Label::Bonafide)
        .cloned()
        .collect();
    let mut by_attack: BTreeMap<&str, Vec<ScoreRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.label == Label::Spoof) {
        by_attack
            .entry(r.attack_id.as_str())
            .or_default()
            .push(r.clone());
    }
    let n_spoof = by_attack.values().map(Vec::len).sum();

    if group_by_attack {
        for (attack, spoofs) in &by_attack {
            let mut subset = bona.clone();
            subset.extend(spoofs.iter().cloned());
            rows.push(ReportRow {
                scope: (*attack).to_string(),
                metric: "eer_percent".into(),
                value: 100.0 * eer(&subset)?,
            });
        }
    }

    Ok(Report {
        rows,
        n_bonafide: bona.len(),
        n_spoof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn records(bona: &[f64], spoof: &[f64]) -> Vec<ScoreRecord> {
        bona.iter()
            .enumerate()
            .map(|(i, &s)| ScoreRecord::new(format!("b{i}"), Label::Bonafide, "-", s))
            .chain(
                spoof
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| ScoreRecord::new(format!("s{i}"), Label::Spoof, "A01", s)),
            )
            .collect()
    }

    fn unit_cost_params() -> TdcfParams {
        // C0 = 0, C1 = C2 = 0.5
        TdcfParams {
            p_target: 0.5,
            p_nontarget: 0.0,
            p_spoof: 0.5,
            c_miss: 1.0,
            c_fa: 1.0,
            c_fa_spoof: 1.0,
            asv_pmiss: 0.0,
            asv_pfa: 0.0,
            asv_pmiss_spoof: 0.0,
        }
    }

    #[test]
    fn separated_scores_reach_origin() {
        let recs = records(&[0.9, 0.8], &[0.1, 0.2]);
        let curve = det_curve(&recs).unwrap();
        assert!(curve.iter().any(|p| p.p_miss == 0.0 && p.p_fa == 0.0));
        assert_eq!(eer(&recs).unwrap(), 0.0);
    }

    #[test]
    fn tied_scores_give_endpoints_only() {
        let recs = records(&[0.5, 0.5], &[0.5]);
        let curve = det_curve(&recs).unwrap();
        let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.p_miss, p.p_fa)).collect();
        assert_eq!(pts, vec![(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(eer(&recs).unwrap(), 0.5);
    }

    #[test]
    fn four_record_example() {
        let recs = records(&[0.8, 0.4], &[0.6, 0.2]);
        let curve = det_curve(&recs).unwrap();
        // τ = 0.5 sits between 0.4 and 0.6, i.e. the operating point at τ = 0.6
        let at = curve.iter().find(|p| p.threshold == 0.6).unwrap();
        assert_eq!((at.p_miss, at.p_fa), (0.5, 0.5));
        let pm: Vec<f64> = curve.iter().map(|p| p.p_miss).collect();
        let pfa: Vec<f64> = curve.iter().map(|p| p.p_fa).collect();
        assert!(pm.windows(2).all(|w| w[1] >= w[0]));
        assert!(pfa.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(eer(&recs).unwrap(), 0.25);
        assert_eq!(min_tdcf(&recs, &unit_cost_params()).unwrap(), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let recs = records(&[0.1, 0.2], &[]);
        assert!(matches!(det_curve(&recs), Err(Error::SingleClass(_))));
        assert!(matches!(eer(&recs), Err(Error::SingleClass(_))));
        assert!(eer(&records(&[], &[0.3])).is_err());
    }

    #[test]
    fn tdcf_degenerate_and_separated() {
        let recs = records(&[0.9, 0.8], &[0.1, 0.2]);
        assert_eq!(min_tdcf(&recs, &unit_cost_params()).unwrap(), 0.0);

        // C1 = Ptar·Cmiss − C0 = 0 when the ASV misses every target
        let p = TdcfParams {
            asv_pmiss: 1.0,
            ..unit_cost_params()
        };
        assert!(matches!(
            min_tdcf(&recs, &p),
            Err(Error::DegenerateCoefficients { .. })
        ));
        let p = TdcfParams {
            asv_pmiss_spoof: 1.0,
            ..unit_cost_params()
        };
        assert!(matches!(
            min_tdcf(&recs, &p),
            Err(Error::DegenerateCoefficients { .. })
        ));
    }

    #[test]
    fn default_params_load() {
        let p = TdcfParams::default();
        let (c0, c1, c2) = p.coefficients();
        assert!(c0 > 0.0 && c1 > 0.0 && c2 > 0.0);
        assert!((p.p_target - 0.95 * 0.99).abs() < 1e-12);
        assert!(TdcfParams::from_toml_str("p_target = 0.5\np_nontarget = 0.1\np_spoof = 0.1\nc_miss = 1\nc_fa = 1\nc_fa_spoof = 1\nasv_pmiss = 0\nasv_pfa = 0\nasv_pmiss_spoof = 0").is_err());
    }

    #[test]
    fn report_grouping() {
        let recs = records(&[0.8, 0.4], &[0.6, 0.2]);
        let r = report(&recs, &unit_cost_params(), true).unwrap();
        assert_eq!(
            r.get(POOLED_SCOPE, "eer_percent"),
            r.get("A01", "eer_percent")
        );
        assert_eq!(r.get(POOLED_SCOPE, "eer_percent"), Some(25.0));

        let r = report(&recs, &unit_cost_params(), false).unwrap();
        assert!(r.rows.iter().all(|row| row.scope == POOLED_SCOPE));
        assert_eq!(r.rows.len(), 2);
        assert!(r
            .to_csv()
            .starts_with("scope,metric,value\npooled,eer_percent,25\n"));
    }

    #[test]
    fn per_attack_isolates_separable_attack() {
        let mut recs = records(&[0.9, 0.7, 0.5, 0.3], &[]);
        for (i, s) in [0.1, 0.0].iter().enumerate() {
            recs.push(ScoreRecord::new(format!("x{i}"), Label::Spoof, "A08", *s));
        }
        for (i, s) in [0.8, 0.4].iter().enumerate() {
            recs.push(ScoreRecord::new(format!("y{i}"), Label::Spoof, "A18", *s));
        }
        let r = report(&recs, &unit_cost_params(), true).unwrap();
        assert_eq!(r.get("A08", "eer_percent"), Some(0.0));
        assert!(r.get(POOLED_SCOPE, "eer_percent").unwrap() > 0.0);
        assert!(r.get("A18", "eer_percent").unwrap() > 0.0);
        assert_eq!((r.n_bonafide, r.n_spoof), (4, 4));
    }
}
