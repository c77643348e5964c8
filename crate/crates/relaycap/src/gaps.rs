//! Channel-independent gap guarantees, the Monte Carlo gap experiment, and
//! the partial-decode vs. decode–forward separation example.
//!
//! The gap formulas depend only on antenna counts (and, for half-duplex
//! variants, the band split): they bound how far each achievable scheme can
//! fall below the cutset bound on *every* channel. The Monte Carlo experiment
//! measures the same gaps on random Rayleigh channels and checks them against
//! the formulas; the separation curve exhibits a family of channels where
//! partial decoding beats both pure decoding and direct transmission by an
//! unbounded margin.

use crate::channel::{random_channel_stream, AntennaConfig, ChannelError};
use crate::optimizer::{compute_suite, BoundKind, OptimizerError, SolverConfig};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GapsError {
    #[error("{kind} requires {what}")]
    MissingArgument {
        kind: GapBoundKind,
        what: &'static str,
    },
    #[error("invalid split {got} for {kind}: must satisfy 0 < split < {limit}")]
    BadSplit {
        kind: GapBoundKind,
        got: usize,
        limit: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// The stated gap guarantees, one per theorem/proposition. Additive kinds are
/// bits; `Multiplicative*` kinds are capacity ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapBoundKind {
    /// Cutset minus partial decode–forward ≤ min(t1, r2).
    PdfAdditive,
    /// Cutset minus noncoherent partial decode–forward ≤
    /// max[min(t1, r2), min(t1+t2, r3)].
    NpdfAdditive,
    /// Cutset minus compress–forward ≤ min(t1+t2, r3) + r2.
    CfAdditive,
    /// σ²-resolved compress–forward gap
    /// max[min(t1+t2, r3) + r2·log₂(1+1/σ²), min(t1, r2+r3)·log₂(1+σ²)];
    /// minimized over σ² when none is supplied.
    CfAdditiveSigma,
    /// The earlier network-coding gap with coefficient
    /// min(t1+t2, r3)·log₂(1 + (t1+t2)/min(t1+t2, r3)); dominated by
    /// `CfAdditiveSigma` everywhere.
    CfKolte,
    /// Partial decode–forward achieves at least half the cutset bound.
    MultiplicativePdf,
    /// So does its noncoherent version.
    MultiplicativeNpdf,
    /// And so does the better of decode–forward and compress–forward.
    MultiplicativeDfCf,
    /// Sender-division capacity minus its noncoherent scheme ≤ min(t1'+t2, r3).
    SfdNpdf,
    /// Sender-division capacity minus compress–forward ≤ min(t1'+t2, r3) + r2.
    SfdCf,
    /// Receiver-division cutset minus partial decode–forward ≤ min(t1, r2).
    RfdPdf,
    /// Receiver-division cutset minus compress–forward ≤
    /// max[min(t1, r2+r3'), r2].
    RfdCf,
}

impl GapBoundKind {
    pub const ALL: [GapBoundKind; 12] = [
        GapBoundKind::PdfAdditive,
        GapBoundKind::NpdfAdditive,
        GapBoundKind::CfAdditive,
        GapBoundKind::CfAdditiveSigma,
        GapBoundKind::CfKolte,
        GapBoundKind::MultiplicativePdf,
        GapBoundKind::MultiplicativeNpdf,
        GapBoundKind::MultiplicativeDfCf,
        GapBoundKind::SfdNpdf,
        GapBoundKind::SfdCf,
        GapBoundKind::RfdPdf,
        GapBoundKind::RfdCf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GapBoundKind::PdfAdditive => "PDF_ADDITIVE",
            GapBoundKind::NpdfAdditive => "NPDF_ADDITIVE",
            GapBoundKind::CfAdditive => "CF_ADDITIVE",
            GapBoundKind::CfAdditiveSigma => "CF_ADDITIVE_SIGMA",
            GapBoundKind::CfKolte => "CF_KOLTE",
            GapBoundKind::MultiplicativePdf => "MULTIPLICATIVE_PDF",
            GapBoundKind::MultiplicativeNpdf => "MULTIPLICATIVE_NPDF",
            GapBoundKind::MultiplicativeDfCf => "MULTIPLICATIVE_DF_CF",
            GapBoundKind::SfdNpdf => "SFD_NPDF",
            GapBoundKind::SfdCf => "SFD_CF",
            GapBoundKind::RfdPdf => "RFD_PDF",
            GapBoundKind::RfdCf => "RFD_CF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let up = s.trim().to_ascii_uppercase();
        Self::ALL.into_iter().find(|k| k.label() == up)
    }
}

impl std::fmt::Display for GapBoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn cf_sigma_expr(config: AntennaConfig, first_coefficient: f64, sigma2: f64) -> f64 {
    let (t1, r2, r3) = (config.t1 as f64, config.r2 as f64, config.r3 as f64);
    let first = first_coefficient + r2 * (1.0 + 1.0 / sigma2).log2();
    let second = t1.min(r2 + r3) * (1.0 + sigma2).log2();
    first.max(second)
}

/// Golden-section minimization of a unimodal function of log σ² over
/// σ² ∈ [2⁻²⁰, 2²⁰], interval tolerance 1e-6.
fn minimize_over_sigma2(f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-20.0 * std::f64::consts::LN_2, 20.0 * std::f64::consts::LN_2);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1.exp());
    let mut f2 = f(x2.exp());
    while hi - lo > 1e-6 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1.exp());
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2.exp());
        }
    }
    f(((lo + hi) / 2.0).exp()).min(f1).min(f2)
}

/// Evaluates a gap guarantee. `sigma2` feeds the σ²-resolved compress–forward
/// kinds (omitting it minimizes over σ²); `split` is `t1'` for sender-division
/// kinds and `r3'` for the receiver-division compress–forward kind.
pub fn theoretical_gap(
    kind: GapBoundKind,
    config: AntennaConfig,
    sigma2: Option<f64>,
    split: Option<usize>,
) -> Result<f64, GapsError> {
    let (t1, t2, r2, r3) = (config.t1, config.t2, config.r2, config.r3);
    if let Some(s) = sigma2 {
        if !(s > 0.0 && s.is_finite()) {
            return Err(GapsError::InvalidInput(format!(
                "sigma2 must be positive and finite, got {s}"
            )));
        }
    }
    let value = match kind {
        GapBoundKind::PdfAdditive => t1.min(r2) as f64,
        GapBoundKind::NpdfAdditive => t1.min(r2).max((t1 + t2).min(r3)) as f64,
        GapBoundKind::CfAdditive => ((t1 + t2).min(r3) + r2) as f64,
        GapBoundKind::CfAdditiveSigma => {
            let coef = (t1 + t2).min(r3) as f64;
            match sigma2 {
                Some(s) => cf_sigma_expr(config, coef, s),
                None => minimize_over_sigma2(|s| cf_sigma_expr(config, coef, s)),
            }
        }
        GapBoundKind::CfKolte => {
            let m = (t1 + t2).min(r3) as f64;
            let coef = m * (1.0 + (t1 + t2) as f64 / m).log2();
            match sigma2 {
                Some(s) => cf_sigma_expr(config, coef, s),
                None => minimize_over_sigma2(|s| cf_sigma_expr(config, coef, s)),
            }
        }
        GapBoundKind::MultiplicativePdf
        | GapBoundKind::MultiplicativeNpdf
        | GapBoundKind::MultiplicativeDfCf => 2.0,
        GapBoundKind::SfdNpdf | GapBoundKind::SfdCf => {
            let t1p = split.ok_or(GapsError::MissingArgument {
                kind,
                what: "a sender split t1'",
            })?;
            if t1p == 0 || t1p >= t1 {
                return Err(GapsError::BadSplit {
                    kind,
                    got: t1p,
                    limit: t1,
                });
            }
            let base = (t1p + t2).min(r3) as f64;
            if kind == GapBoundKind::SfdNpdf {
                base
            } else {
                base + r2 as f64
            }
        }
        GapBoundKind::RfdPdf => t1.min(r2) as f64,
        GapBoundKind::RfdCf => {
            let r3p = split.ok_or(GapsError::MissingArgument {
                kind,
                what: "a receiver split r3'",
            })?;
            if r3p == 0 || r3p >= r3 {
                return Err(GapsError::BadSplit {
                    kind,
                    got: r3p,
                    limit: r3,
                });
            }
            (t1.min(r2 + r3p).max(r2)) as f64
        }
    };
    Ok(value)
}

/// One bound value at one Monte Carlo grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub channel_id: u64,
    pub snr_db: f64,
    pub bound_kind: BoundKind,
    pub value_bits: f64,
    /// Solver convergence flag of this bound (flagged rows are excluded from
    /// aggregates but kept in the report).
    pub flagged: bool,
}

/// Per-SNR max/average gap statistics over the non-flagged channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapAggregate {
    pub snr_db: f64,
    /// Channels contributing to the additive aggregates.
    pub n_channels: usize,
    /// Channels excluded because some bound was solver-flagged.
    pub n_flagged: usize,
    /// Channels excluded from the ratio aggregates because CS ≤ 1e-6 bits.
    pub n_low_rate: usize,
    pub max_add_pdf: f64,
    pub avg_add_pdf: f64,
    pub max_add_npdf: f64,
    pub avg_add_npdf: f64,
    pub max_add_cf: f64,
    pub avg_add_cf: f64,
    pub max_ratio_pdf: f64,
    pub avg_ratio_pdf: f64,
    pub max_ratio_npdf: f64,
    pub avg_ratio_npdf: f64,
    pub max_ratio_dfcf: f64,
    pub avg_ratio_dfcf: f64,
}

/// The Monte Carlo gap experiment result: one row per (channel, SNR, bound)
/// in deterministic (channel_id, SNR-grid) order, plus per-SNR aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    pub aggregates: Vec<GapAggregate>,
    /// Total (channel, SNR) cells excluded from aggregates by solver flags.
    pub flagged_cells: usize,
    /// Total cells excluded from ratio aggregates as low-rate.
    pub low_rate_cells: usize,
}

struct Cell {
    channel_id: u64,
    snr_idx: usize,
    values: [f64; 6],
    flags: [bool; 6],
}

const CELL_KINDS: [BoundKind; 6] = [
    BoundKind::Cs,
    BoundKind::Df,
    BoundKind::Dt,
    BoundKind::Pdf,
    BoundKind::Npdf,
    BoundKind::Cf,
];

/// Draws `n_channels` unit-variance Rayleigh channels (one deterministic
/// stream per channel id) and computes all six full-duplex bounds at every
/// SNR grid point (`P = 10^(snr_db/10)` with unit noise). Cells whose solver
/// flagged any bound are excluded from aggregates and counted; cells with
/// CS ≤ 1e-6 bits contribute to additive but not ratio aggregates.
pub fn montecarlo_gaps(
    config: AntennaConfig,
    n_channels: usize,
    snr_db_grid: &[f64],
    seed: u64,
    cfg: &SolverConfig,
) -> Result<GapReport, GapsError> {
    let mut points = Vec::with_capacity(n_channels * snr_db_grid.len());
    for channel_id in 0..n_channels as u64 {
        for (snr_idx, &snr_db) in snr_db_grid.iter().enumerate() {
            points.push((channel_id, snr_idx, snr_db));
        }
    }
    let mut cells = points
        .into_par_iter()
        .map(|(channel_id, snr_idx, snr_db)| -> Result<Cell, GapsError> {
            let ch = random_channel_stream(config, seed, channel_id);
            let p = 10f64.powf(snr_db / 10.0);
            let suite = compute_suite(&ch, p, cfg)?;
            let mut values = [0.0; 6];
            let mut flags = [false; 6];
            for (i, kind) in CELL_KINDS.iter().enumerate() {
                let b = suite.get(*kind).expect("full-duplex kind");
                values[i] = b.value_bits;
                flags[i] = b.flagged;
            }
            Ok(Cell {
                channel_id,
                snr_idx,
                values,
                flags,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    cells.sort_by_key(|c| (c.channel_id, c.snr_idx));

    let mut rows = Vec::with_capacity(cells.len() * 6);
    for c in &cells {
        for (i, kind) in CELL_KINDS.iter().enumerate() {
            rows.push(GapRow {
                channel_id: c.channel_id,
                snr_db: snr_db_grid[c.snr_idx],
                bound_kind: *kind,
                value_bits: c.values[i],
                flagged: c.flags[i],
            });
        }
    }

    let mut aggregates = Vec::new();
    let mut flagged_cells = 0;
    let mut low_rate_cells = 0;
    if n_channels > 0 {
        for (snr_idx, &snr_db) in snr_db_grid.iter().enumerate() {
            let mut agg = GapAggregate {
                snr_db,
                n_channels: 0,
                n_flagged: 0,
                n_low_rate: 0,
                max_add_pdf: 0.0,
                avg_add_pdf: 0.0,
                max_add_npdf: 0.0,
                avg_add_npdf: 0.0,
                max_add_cf: 0.0,
                avg_add_cf: 0.0,
                max_ratio_pdf: 0.0,
                avg_ratio_pdf: 0.0,
                max_ratio_npdf: 0.0,
                avg_ratio_npdf: 0.0,
                max_ratio_dfcf: 0.0,
                avg_ratio_dfcf: 0.0,
            };
            let mut first_add = true;
            let mut first_ratio = true;
            let mut n_ratio = 0usize;
            for c in cells.iter().filter(|c| c.snr_idx == snr_idx) {
                if c.flags.iter().any(|&f| f) {
                    agg.n_flagged += 1;
                    continue;
                }
                let [cs, df, _dt, pdf, npdf, cf] = c.values;
                agg.n_channels += 1;
                let (a_pdf, a_npdf, a_cf) = (cs - pdf, cs - npdf, cs - cf);
                if first_add {
                    agg.max_add_pdf = a_pdf;
                    agg.max_add_npdf = a_npdf;
                    agg.max_add_cf = a_cf;
                    first_add = false;
                } else {
                    agg.max_add_pdf = agg.max_add_pdf.max(a_pdf);
                    agg.max_add_npdf = agg.max_add_npdf.max(a_npdf);
                    agg.max_add_cf = agg.max_add_cf.max(a_cf);
                }
                agg.avg_add_pdf += a_pdf;
                agg.avg_add_npdf += a_npdf;
                agg.avg_add_cf += a_cf;
                if cs > 1e-6 {
                    let (r_pdf, r_npdf, r_dfcf) =
                        (cs / pdf, cs / npdf, cs / df.max(cf));
                    if first_ratio {
                        agg.max_ratio_pdf = r_pdf;
                        agg.max_ratio_npdf = r_npdf;
                        agg.max_ratio_dfcf = r_dfcf;
                        first_ratio = false;
                    } else {
                        agg.max_ratio_pdf = agg.max_ratio_pdf.max(r_pdf);
                        agg.max_ratio_npdf = agg.max_ratio_npdf.max(r_npdf);
                        agg.max_ratio_dfcf = agg.max_ratio_dfcf.max(r_dfcf);
                    }
                    agg.avg_ratio_pdf += r_pdf;
                    agg.avg_ratio_npdf += r_npdf;
                    agg.avg_ratio_dfcf += r_dfcf;
                    n_ratio += 1;
                } else {
                    agg.n_low_rate += 1;
                }
            }
            if agg.n_channels > 0 {
                agg.avg_add_pdf /= agg.n_channels as f64;
                agg.avg_add_npdf /= agg.n_channels as f64;
                agg.avg_add_cf /= agg.n_channels as f64;
            }
            if n_ratio > 0 {
                agg.avg_ratio_pdf /= n_ratio as f64;
                agg.avg_ratio_npdf /= n_ratio as f64;
                agg.avg_ratio_dfcf /= n_ratio as f64;
            }
            flagged_cells += agg.n_flagged;
            low_rate_cells += agg.n_low_rate;
            aggregates.push(agg);
        }
    }
    Ok(GapReport {
        rows,
        aggregates,
        flagged_cells,
        low_rate_cells,
    })
}

/// One point of the separation example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationRow {
    pub g: f64,
    pub pdf_lower_bits: f64,
    pub dfdt_upper_bits: f64,
    pub separation_bits: f64,
}

/// Separation of partial decoding from the better of full decoding and direct
/// transmission on the diagonal family `G31 = diag(g, 1)`, `G21 = diag(1, g)`,
/// `G32 = diag(g, g)`: the lower bound on the partial-decode rate is
/// `min{log₂[(1+g²P)(1+(1+g²)P/2)], 2·log₂(1+(1+g²)P/2) − 2}` while
/// `max(R_DF, R_DT) ≤ log₂[(1+P)(1+g²P)]`; their difference grows without
/// bound in `g`.
pub fn separation_curve(g_values: &[f64], p: f64) -> Result<Vec<SeparationRow>, GapsError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(GapsError::InvalidInput(format!(
            "power must be positive and finite, got {p}"
        )));
    }
    let mut rows = Vec::with_capacity(g_values.len());
    for &g in g_values {
        if !(g > 0.0 && g.is_finite()) {
            return Err(GapsError::InvalidInput(format!(
                "gain must be positive and finite, got {g}"
            )));
        }
        let half = 1.0 + (1.0 + g * g) * p / 2.0;
        let pdf_lower = ((1.0 + g * g * p).log2() + half.log2()).min(2.0 * half.log2() - 2.0);
        let dfdt_upper = ((1.0 + p) * (1.0 + g * g * p)).log2();
        rows.push(SeparationRow {
            g,
            pdf_lower_bits: pdf_lower,
            dfdt_upper_bits: dfdt_upper,
            separation_bits: pdf_lower - dfdt_upper,
        });
    }
    Ok(rows)
}
