use std::io::Write;

use super::{free_resolvent_bound, m_log, model_m, CostFunction, Envelope, PipelineParams};
use crate::cli::{fmt_f64, fmt_ln};
use crate::error::Result;
use crate::generators::ModelKind;

/// One row of the pipeline table, every value stored as its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineRow {
    pub lambda: f64,
    pub ln_g: f64,
    pub ln_gfrak: f64,
    pub ln_m: f64,
    pub ln_mlog: f64,
}

pub fn pipeline_table(
    cost: &CostFunction,
    params: &PipelineParams,
    kind: ModelKind,
    lambdas: &[f64],
    polynomial: bool,
) -> Result<Vec<PipelineRow>> {
    let gfrak = free_resolvent_bound(cost, params)?;
    let m = model_m(kind, &gfrak);
    let ml = m_log(&m, polynomial);
    Ok(lambdas
        .iter()
        .map(|&lambda| PipelineRow {
            lambda,
            ln_g: cost.ln_value(lambda),
            ln_gfrak: gfrak.ln_eval(lambda),
            ln_m: m.ln_eval(lambda),
            ln_mlog: ml.ln_eval(lambda),
        })
        .collect())
}

/// Table with header `lambda,G,Gfrak,M,Mlog`.
pub fn write_pipeline_table(rows: &[PipelineRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "lambda,G,Gfrak,M,Mlog")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_ln(r.ln_g),
            fmt_ln(r.ln_gfrak),
            fmt_ln(r.ln_m),
            fmt_ln(r.ln_mlog)
        )?;
    }
    Ok(())
}

/// CSV with header `t,envelope`.
pub fn write_envelope_csv(env: &Envelope, times: &[f64], out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,envelope")?;
    for &t in times {
        writeln!(out, "{},{}", fmt_f64(t), fmt_ln(env.ln_eval_ln_t(t.ln())))?;
    }
    Ok(())
}
