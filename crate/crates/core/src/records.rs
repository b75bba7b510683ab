//! Result documents shared by the command line and the HTTP service.

use crate::error::{AtlasError, Result};
use crate::family::{cstr, parse_complex, region_membership, Family, Parameter, Region, C64};
use crate::orbit::{center_newton, classify_tier, ComponentType, OrbitClassification, Tier};
use crate::parabolic::{
    arc_normal, critical_ecalle_height, find_boundary_parabolic, repelling_fatou_and_phase, trace_arc, ArcTrace,
    ParabolicDatum, PhaseSample, TraceSettings,
};
use crate::visibility::{
    arc_neighborhood_scan, coroot_visibility, cylinder_projection, half_return_boundary_points, BoundaryTriple, RootTag,
    ScanReport, VisibilityVerdict,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestCenter {
    #[serde(with = "cstr")]
    pub parameter: C64,
    pub period: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicNote {
    pub h: f64,
    pub multiplier_residual: f64,
}

/// Point classification document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub family: Family,
    #[serde(with = "cstr")]
    pub parameter: C64,
    pub tier: Tier,
    /// Newton parameters only.
    pub region: Option<Region>,
    /// Component label, or OutsideDomain.
    pub verdict: String,
    pub period: Option<usize>,
    pub multiplier: Option<String>,
    pub self_symmetric: Option<bool>,
    pub budget_spent: usize,
    pub classification: Option<OrbitClassification>,
    pub nearest_center: Option<NearestCenter>,
    pub parabolic: Option<ParabolicNote>,
}

/// Multiplier residual below which a cycle is treated as parabolic and its height reported.
pub const PARABOLIC_NOTE_TOL: f64 = 1e-6;

pub fn classify_query(param: &Parameter, tier: Tier) -> Result<QueryResult> {
    param.check_finite()?;
    let region = match param.family {
        Family::NewtonQuartic => Some(region_membership(param.value).region),
        Family::AntipodalCubic => None,
    };
    let mut q = QueryResult {
        family: param.family,
        parameter: param.value,
        tier,
        region,
        verdict: "OutsideDomain".into(),
        period: None,
        multiplier: None,
        self_symmetric: None,
        budget_spent: 0,
        classification: None,
        nearest_center: None,
        parabolic: None,
    };
    if !param.in_u {
        return Ok(q);
    }
    let c = classify_tier(param, tier)?;
    q.verdict = c.component_type.to_string();
    q.budget_spent = c.iterations;
    if let Some(cy) = c.cycle() {
        q.period = Some(cy.period);
        q.multiplier = Some(crate::family::format_complex(cy.multiplier));
        q.self_symmetric = Some(cy.self_symmetric);
        if let ComponentType::Tricorn(p) = c.component_type {
            if p % 2 == 0 {
                q.nearest_center = center_newton(param.family, param.value, p / 2).map(|a| NearestCenter {
                    parameter: a,
                    period: p,
                    distance: (a - param.value).norm(),
                });
            }
        }
        let d = ParabolicDatum::at(*param, cy.period, cy.points[0]);
        if cy.period % 2 == 0 && d.multiplier_residual() < PARABOLIC_NOTE_TOL {
            if let Ok(e) = critical_ecalle_height(&d) {
                q.parabolic = Some(ParabolicNote { h: e.h, multiplier_residual: d.multiplier_residual() });
            }
        }
    }
    q.classification = Some(c);
    Ok(q)
}

/// Locates the arc where the ray from `center` leaves its tricorn component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcRequest {
    pub family: Family,
    #[serde(with = "cstr")]
    pub center: C64,
    #[serde(with = "cstr")]
    pub direction: C64,
    pub period: usize,
}

impl ArcRequest {
    pub fn datum(&self) -> Result<ParabolicDatum> {
        find_boundary_parabolic(Parameter::new(self.family, self.center), self.direction, self.period)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcTraceRecord {
    #[serde(flatten)]
    pub arc: ArcRequest,
    #[serde(with = "cstr")]
    pub start: C64,
    pub trace: ArcTrace,
}

pub fn arc_trace_record(arc: &ArcRequest, targets: &[f64]) -> Result<ArcTraceRecord> {
    let dm = arc.datum()?;
    let trace = trace_arc(&dm, targets, &TraceSettings::default())?;
    Ok(ArcTraceRecord { arc: arc.clone(), start: dm.param.value, trace })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    #[serde(flatten)]
    pub arc: ArcRequest,
    #[serde(with = "cstr")]
    pub start: C64,
    /// Outward unit normal of the arc at the start.
    #[serde(with = "cstr")]
    pub normal: C64,
    pub samples: Vec<PhaseEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub distance: f64,
    pub sample: Option<PhaseSample>,
    pub error: Option<String>,
}

/// Perturbed-coordinate samples at the given distances along the outward normal.
pub fn phase_record(arc: &ArcRequest, distances: &[f64]) -> Result<PhaseRecord> {
    let dm = arc.datum()?;
    let normal = arc_normal(&dm)?;
    let samples = distances
        .iter()
        .map(|&d| match repelling_fatou_and_phase(dm.param.value + d * normal, &dm) {
            Ok(s) => PhaseEntry { distance: d, sample: Some(s), error: None },
            Err(e) => PhaseEntry { distance: d, sample: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(PhaseRecord { arc: arc.clone(), start: dm.param.value, normal, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleEntry {
    #[serde(with = "cstr")]
    pub point: C64,
    pub tag: RootTag,
    /// Present for co-roots.
    pub verdict: Option<VisibilityVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRecord {
    pub family: Family,
    #[serde(with = "cstr")]
    pub parameter: C64,
    pub triple: BoundaryTriple,
    pub entries: Vec<TripleEntry>,
}

pub fn visibility_record(param: &Parameter) -> Result<VisibilityRecord> {
    let triple = half_return_boundary_points(param)?;
    let entries = triple
        .points
        .iter()
        .zip(&triple.tags)
        .map(|(&p, &tag)| {
            let verdict = match tag {
                RootTag::CoRoot => Some(coroot_visibility(param, p)?),
                RootTag::Root => None,
            };
            Ok(TripleEntry { point: p, tag, verdict })
        })
        .collect::<Result<_>>()?;
    Ok(VisibilityRecord { family: param.family, parameter: param.value, triple, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(flatten)]
    pub arc: ArcRequest,
    pub heights: Vec<f64>,
    pub window: f64,
    pub offsets: usize,
    pub report: ScanReport,
}

/// Default scan heights: -u_h/2, 0, u_h/2 from a 64 x 64 cylinder of height 4.
pub fn default_scan_heights(dm: &ParabolicDatum) -> Result<Vec<f64>> {
    let cyl = cylinder_projection(dm, 64, 64, 4.0)?;
    Ok(vec![-0.5 * cyl.u_h, 0.0, 0.5 * cyl.u_h])
}

pub fn scan_record(arc: &ArcRequest, heights: Option<&[f64]>, window: f64, offsets: usize) -> Result<ScanRecord> {
    let dm = arc.datum()?;
    let heights = match heights {
        Some(h) if !h.is_empty() => h.to_vec(),
        _ => default_scan_heights(&dm)?,
    };
    let tr = trace_arc(&dm, &heights, &TraceSettings::default())?;
    if !tr.unreached.is_empty() {
        return Err(AtlasError::ContinuationStalled(format!("heights {:?} not reached", tr.unreached)));
    }
    let report = arc_neighborhood_scan(&tr.samples, arc.period, arc.family, window, offsets)?;
    Ok(ScanRecord { arc: arc.clone(), heights, window, offsets, report })
}

/// Body of POST /analyze.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisRequest {
    ArcTrace {
        family: Family,
        #[serde(with = "cstr")]
        center: C64,
        #[serde(with = "cstr")]
        direction: C64,
        period: usize,
        targets: Vec<f64>,
    },
    Visibility {
        family: Family,
        #[serde(with = "cstr")]
        param: C64,
    },
    Scan {
        family: Family,
        #[serde(with = "cstr")]
        center: C64,
        #[serde(with = "cstr")]
        direction: C64,
        period: usize,
        #[serde(default)]
        heights: Option<Vec<f64>>,
        #[serde(default = "default_window")]
        window: f64,
        #[serde(default = "default_offsets")]
        offsets: usize,
    },
}

fn default_window() -> f64 {
    1e-2
}

fn default_offsets() -> usize {
    64
}

/// Record produced by an analysis; serialized untagged so it equals the CLI output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnalysisRecord {
    ArcTrace(ArcTraceRecord),
    Visibility(VisibilityRecord),
    Scan(ScanRecord),
}

impl AnalysisRequest {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AtlasError::InvalidArgument(m.into()));
        match self {
            AnalysisRequest::ArcTrace { period, targets, .. } => {
                if *period == 0 || targets.is_empty() || targets.iter().any(|t| t.is_nan()) {
                    return bad("arc-trace needs a positive period and non-NaN targets");
                }
            }
            AnalysisRequest::Visibility { .. } => {}
            AnalysisRequest::Scan { period, window, offsets, .. } => {
                if *period == 0 || window.is_nan() || *window <= 0.0 || *offsets < 2 {
                    return bad("scan needs a positive period, a positive window and at least 2 offsets");
                }
            }
        }
        Ok(())
    }

    pub fn run(&self) -> Result<AnalysisRecord> {
        self.validate()?;
        match self {
            AnalysisRequest::ArcTrace { family, center, direction, period, targets } => {
                let arc = ArcRequest { family: *family, center: *center, direction: *direction, period: *period };
                Ok(AnalysisRecord::ArcTrace(arc_trace_record(&arc, targets)?))
            }
            AnalysisRequest::Visibility { family, param } => {
                Ok(AnalysisRecord::Visibility(visibility_record(&Parameter::new(*family, *param))?))
            }
            AnalysisRequest::Scan { family, center, direction, period, heights, window, offsets } => {
                let arc = ArcRequest { family: *family, center: *center, direction: *direction, period: *period };
                Ok(AnalysisRecord::Scan(scan_record(&arc, heights.as_deref(), *window, *offsets)?))
            }
        }
    }
}

/// Parses "re,im" for query strings and flags.
pub fn parse_param(family: Family, s: &str) -> Result<Parameter> {
    Ok(Parameter::new(family, parse_complex(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_newton_parameter_is_a_verdict_not_an_error() {
        let q = classify_query(&Parameter::newton(C64::new(2.0, 0.0)), Tier::Preview).unwrap();
        assert_eq!(q.verdict, "OutsideDomain");
        assert_eq!(q.region, Some(Region::Outside));
        assert!(q.classification.is_none());
    }

    #[test]
    fn analysis_body_round_trips() {
        let body = r#"{"kind":"arc-trace","family":"newton","center":"0,4.6","direction":"0,-1","period":4,"targets":[-0.5,0,0.5]}"#;
        let r: AnalysisRequest = serde_json::from_str(body).unwrap();
        assert!(matches!(r, AnalysisRequest::ArcTrace { period: 4, .. }));
        let back: AnalysisRequest = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, back);
        assert!(serde_json::from_str::<AnalysisRequest>(r#"{"kind":"nope"}"#).is_err());
        let scan: AnalysisRequest =
            serde_json::from_str(r#"{"kind":"scan","family":"antipodal","center":"0,3","direction":"0,-1","period":2}"#).unwrap();
        assert!(matches!(scan, AnalysisRequest::Scan { offsets: 64, .. }));
    }
}
