//! Assembly of the per-graph analysis report and the sum-mode calibration.

use serde::Serialize;
use serde_json::Value;

use crate::graph::{Graph, GraphDocument};
use crate::quad::{
    build_twisted, h2_basis, pbw_check, quadratic_dual, GeneratorOrder, PbwOutcome, QuadError,
};
use crate::recognition::{canonical_form, enumerate_gr_p, is_in_gr_p, DecompositionTree};
use crate::series::{
    gocha_series, lie_dims_from_gocha, poincare_series, realizability_check, RealizabilityWitness,
    SumMode,
};
use crate::words::ZVector;

pub const REPORT_SCHEMA: &str = "draag-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct RecognitionSection {
    #[serde(rename = "in_GrP")]
    pub in_gr_p: bool,
    pub witness: Option<DecompositionTree>,
    pub reason: Option<String>,
    pub rejection_witness: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizabilitySection {
    pub mode_requested: String,
    pub mode_used: String,
    pub witness: Option<RealizabilityWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PbwSection {
    pub order: Vec<String>,
    pub confluent: bool,
    pub heads: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<PbwCounterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PbwCounterexample {
    pub critical: String,
    pub left_normal_form: Vec<String>,
    pub right_normal_form: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologySection {
    pub generators: Vec<String>,
    pub relations: Vec<String>,
    pub presentation: crate::quad::PresentationDocument,
    pub h2_basis: Vec<String>,
    pub h2_dimension: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencySection {
    /// Poincare coefficient 1 equals d + 1.
    pub poincare_degree_one: bool,
    /// H^2 dimension equals d + r + 1.
    pub h2_dimension_formula: bool,
    /// gocha(-t) * poincare(t) = 1 at this truncation.
    pub series_product_is_one: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub seed: u64,
    pub graph: GraphDocument,
    pub canonical_graph: GraphDocument,
    pub clique_polynomial: Vec<u64>,
    pub trunc: usize,
    pub gocha: Vec<Value>,
    pub poincare: Vec<Value>,
    pub lie_dims: Vec<Value>,
    pub recognition: RecognitionSection,
    pub realizability: RealizabilitySection,
    pub pbw: PbwSection,
    pub cohomology: CohomologySection,
    pub consistency: ConsistencySection,
    /// Transcript of a prescribed-superdiagonal lifting, when requested.
    pub massey: Option<Value>,
    /// Transcript of a kernel-unipotent witness, when requested.
    pub ku: Option<Value>,
}

/// One graph where the two sum modes disagree about witness existence.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationDisagreement {
    pub graph: GraphDocument,
    pub witness_under_d: bool,
    pub witness_under_d_plus_one: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    /// The mode under which every accepted graph admits a witness while the
    /// 4-cycle admits none, or null when no mode qualifies.
    pub selected_mode: Option<String>,
    pub max_vertices: usize,
    pub accepted_graphs_checked: usize,
    pub c4_witness_free_under_both: bool,
    pub disagreements: Vec<CalibrationDisagreement>,
}

/// Calibrate the sum constant against the closure enumeration: accepted
/// graphs up to `n_max` vertices must all admit a witness and the 4-cycle
/// must admit none. The empty graph is excluded: it admits no witness under
/// either mode.
pub fn calibrate_sum_mode(
    n_max: usize,
) -> Result<CalibrationReport, crate::recognition::RecognitionError> {
    let closure = enumerate_gr_p(n_max)?;
    let mut all_d = true;
    let mut all_d1 = true;
    let mut checked = 0;
    let mut disagreements = Vec::new();
    for canon in &closure {
        if canon.vertices == 0 {
            continue;
        }
        let g = canon.to_graph();
        let p = g.clique_polynomial();
        let wd = realizability_check(&p, SumMode::VertexCount).is_some();
        let wd1 = realizability_check(&p, SumMode::VertexCountPlusOne).is_some();
        all_d &= wd;
        all_d1 &= wd1;
        checked += 1;
        if wd != wd1 {
            disagreements.push(CalibrationDisagreement {
                graph: g.to_document(),
                witness_under_d: wd,
                witness_under_d_plus_one: wd1,
            });
        }
    }
    let c4 = Graph::cycle(4).unwrap().clique_polynomial();
    let c4_free = realizability_check(&c4, SumMode::VertexCount).is_none()
        && realizability_check(&c4, SumMode::VertexCountPlusOne).is_none();
    let selected_mode = if all_d1 && c4_free {
        Some(SumMode::VertexCountPlusOne.label().to_string())
    } else if all_d && c4_free {
        Some(SumMode::VertexCount.label().to_string())
    } else {
        None
    };
    Ok(CalibrationReport {
        selected_mode,
        max_vertices: n_max,
        accepted_graphs_checked: checked,
        c4_witness_free_under_both: c4_free,
        disagreements,
    })
}

/// Requested sum mode for the analysis pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumModeRequest {
    Fixed(SumMode),
    Auto,
}

impl SumModeRequest {
    pub fn label(self) -> String {
        match self {
            SumModeRequest::Fixed(m) => m.label().to_string(),
            SumModeRequest::Auto => "auto".to_string(),
        }
    }
}

/// Vertex count used by the auto-calibration run inside reports; kept small
/// so the pipeline stays interactive.
pub const CALIBRATION_MAX_VERTICES: usize = 6;

pub fn build_analysis(
    graph: &Graph,
    z: &ZVector,
    order_text: Option<&str>,
    trunc: usize,
    mode: SumModeRequest,
    seed: u64,
) -> Result<AnalysisReport, QuadError> {
    let p = graph.clique_polynomial();
    let gocha = gocha_series(&p, trunc);
    let poincare = poincare_series(&p, trunc);
    let lie = lie_dims_from_gocha(&gocha, trunc).map(|dims| {
        dims.into_iter()
            .map(|d| match i64::try_from(d.clone()) {
                Ok(v) => Value::from(v),
                Err(_) => Value::String(d.to_string()),
            })
            .collect::<Vec<_>>()
    });

    let recognition = match is_in_gr_p(graph) {
        Ok(tree) => RecognitionSection {
            in_gr_p: true,
            witness: Some(tree),
            reason: None,
            rejection_witness: None,
        },
        Err(rej) => RecognitionSection {
            in_gr_p: false,
            witness: None,
            reason: Some(rej.reason.to_string()),
            rejection_witness: Some(rej.witness),
        },
    };

    let (mode_used, calibration) = match mode {
        SumModeRequest::Fixed(m) => (m, None),
        SumModeRequest::Auto => {
            let report = calibrate_sum_mode(CALIBRATION_MAX_VERTICES)
                .expect("calibration bound is within the enumeration limit");
            let selected = match report.selected_mode.as_deref() {
                Some("d") => SumMode::VertexCount,
                _ => SumMode::VertexCountPlusOne,
            };
            (selected, Some(report))
        }
    };
    let witness = realizability_check(&p, mode_used);

    let pres = build_twisted(graph, z)?;
    let order = match order_text {
        Some(text) => GeneratorOrder::parse(text, &pres)?,
        None => GeneratorOrder::natural(pres.generator_count()),
    };
    let (system, outcome) = pbw_check(&pres, &order)?;
    let pbw = PbwSection {
        order: order
            .descending()
            .iter()
            .map(|&i| pres.generator_name(i).to_string())
            .collect(),
        confluent: outcome.is_confluent(),
        heads: system
            .heads()
            .iter()
            .map(|&m| pres.monomial_name(m))
            .collect(),
        counterexample: match &outcome {
            PbwOutcome::Confluent => None,
            PbwOutcome::Counterexample {
                critical,
                left,
                right,
            } => {
                let name3 = |m: &(usize, usize, usize)| {
                    format!(
                        "{}*{}*{}",
                        pres.generator_name(m.0),
                        pres.generator_name(m.1),
                        pres.generator_name(m.2)
                    )
                };
                Some(PbwCounterexample {
                    critical: name3(critical),
                    left_normal_form: left.iter().map(name3).collect(),
                    right_normal_form: right.iter().map(name3).collect(),
                })
            }
        },
    };

    let dual = quadratic_dual(&pres);
    let h2 = h2_basis(&dual, &order)?;
    let cohomology = CohomologySection {
        generators: dual.generators().to_vec(),
        relations: dual
            .relations()
            .iter()
            .map(|r| dual.relation_name(r))
            .collect(),
        presentation: dual.to_document(),
        h2_basis: h2.classes.iter().map(|&m| dual.monomial_name(m)).collect(),
        h2_dimension: h2.dimension(),
    };

    let d = graph.vertex_count() as u64;
    let r = graph.edge_count() as u64;
    let consistency = ConsistencySection {
        poincare_degree_one: trunc < 1
            || poincare.coefficient(1) == num_bigint::BigInt::from(d + 1),
        h2_dimension_formula: h2.dimension() as u64 == d + r + 1,
        series_product_is_one: gocha
            .mul(&poincare.negate_variable())
            .map(|prod| prod == crate::series::IntSeries::one(trunc))
            .unwrap_or(false),
    };

    let canonical_graph = canonical_form(graph)
        .map(|(canon, _)| canon.to_graph().to_document())
        .unwrap_or_else(|_| graph.to_document());

    Ok(AnalysisReport {
        schema: REPORT_SCHEMA.to_string(),
        seed,
        graph: graph.to_document(),
        canonical_graph,
        clique_polynomial: p.coefficients().to_vec(),
        trunc,
        gocha: gocha.to_json_values(),
        poincare: poincare.to_json_values(),
        lie_dims: lie.unwrap_or_default(),
        recognition,
        realizability: RealizabilitySection {
            mode_requested: mode.label(),
            mode_used: mode_used.label().to_string(),
            witness,
            calibration,
        },
        pbw,
        cohomology,
        consistency,
        massey: None,
        ku: None,
    })
}
