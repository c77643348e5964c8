//! Channel-model data types, seeded random channel generation, and the
//! half-duplex embeddings into the full-duplex model.
//!
//! The model is the three-node Gaussian network
//!
//! ```text
//!   Y2 = G21 X1 + Z2          (relay observation,  r2 antennas)
//!   Y3 = G31 X1 + G32 X2 + Z3 (receiver,           r3 antennas)
//! ```
//!
//! with identity noise covariances, `t1` transmit antennas at the sender and
//! `t2` at the relay. Noise is implicit — the types store only the gains.
//!
//! Random channels are reproducible across platforms: generation uses the
//! self-contained counter-based generator in [`GaussianStream`] rather than an
//! external RNG, so a `(config, seed)` pair always yields bit-identical gains.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::CMat;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid antenna config: {what} = {got} outside 1..=16")]
    InvalidConfig { what: &'static str, got: usize },
    #[error("field \"{field}\": expected {expected}, got {got}")]
    DimensionMismatch {
        field: &'static str,
        expected: String,
        got: String,
    },
    #[error("missing field \"{0}\"")]
    MissingField(&'static str),
    #[error("wrong half-duplex mode: expected {expected}")]
    WrongMode { expected: &'static str },
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error("channel JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Deterministic random number generation
// ---------------------------------------------------------------------------

/// Counter-based pseudo-random stream with a documented, self-contained
/// algorithm (no platform or crate dependence), so seeded experiments are
/// bit-reproducible everywhere.
///
/// The `(seed, stream)` pair is hashed into a 64-bit key; the i-th raw output
/// is `mix64(key + i·GAMMA)` where `GAMMA` is the golden-ratio increment and
/// `mix64` is the SplitMix64 finalizer (xor-shift/multiply avalanche). Because
/// outputs are pure functions of the counter, distinct streams (and distinct
/// positions) can be generated concurrently with no shared state.
///
/// Complex Gaussians use the Box–Muller transform: from uniforms
/// `u1 ∈ (0,1]`, `u2 ∈ [0,1)`, the draw `√(−ln u1)·e^{2πi·u2}` is CN(0,1)
/// (real and imaginary parts independent N(0, 1/2)).
#[derive(Debug, Clone)]
pub struct GaussianStream {
    key: u64,
    counter: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix64(seed ^ mix64(stream.wrapping_mul(GAMMA) ^ 0x1F83_D9AB_FB41_BD6B));
        Self { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`; the Box–Muller logarithm needs to avoid zero.
    #[inline]
    fn next_uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One circularly-symmetric complex Gaussian CN(0,1) draw.
    pub fn next_cn01(&mut self) -> Complex64 {
        let u1 = self.next_uniform_open();
        let u2 = self.next_uniform();
        let r = (-u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }
}

// ---------------------------------------------------------------------------
// Full-duplex channel types
// ---------------------------------------------------------------------------

/// Antenna counts: `t1`/`t2` transmit antennas at sender/relay, `r2`/`r3`
/// receive antennas at relay/receiver. All in `1..=16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub t1: usize,
    pub t2: usize,
    pub r2: usize,
    pub r3: usize,
}

impl AntennaConfig {
    pub fn new(t1: usize, t2: usize, r2: usize, r3: usize) -> Result<Self, ChannelError> {
        for (what, got) in [("t1", t1), ("t2", t2), ("r2", r2), ("r3", r3)] {
            if got == 0 || got > 16 {
                return Err(ChannelError::InvalidConfig { what, got });
            }
        }
        Ok(Self { t1, t2, r2, r3 })
    }
}

/// Average per-node transmit power budget `P ≥ 0` (linear scale; with unit
/// noise, `P` equals the SNR).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstraint {
    pub p: f64,
}

impl PowerConstraint {
    pub fn new(p: f64) -> Self {
        assert!(p >= 0.0 && p.is_finite(), "power must be nonnegative");
        Self { p }
    }

    /// `P = 10^(snr_db/10)` (unit noise makes SNR and power coincide).
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self::new(10f64.powf(snr_db / 10.0))
    }
}

/// Gain matrices of a full-duplex relay channel.
#[derive(Debug, Clone)]
pub struct ChannelMatrices {
    config: AntennaConfig,
    g21: CMat,
    g31: CMat,
    g32: CMat,
}

impl ChannelMatrices {
    pub fn new(
        config: AntennaConfig,
        g21: CMat,
        g31: CMat,
        g32: CMat,
    ) -> Result<Self, ChannelError> {
        let checks: [(&'static str, &CMat, usize, usize); 3] = [
            ("G21", &g21, config.r2, config.t1),
            ("G31", &g31, config.r3, config.t1),
            ("G32", &g32, config.r3, config.t2),
        ];
        for (field, m, rows, cols) in checks {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(ChannelError::DimensionMismatch {
                    field,
                    expected: format!("{rows}x{cols}"),
                    got: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
        }
        Ok(Self {
            config,
            g21,
            g31,
            g32,
        })
    }

    pub fn config(&self) -> AntennaConfig {
        self.config
    }

    pub fn g21(&self) -> &CMat {
        &self.g21
    }

    pub fn g31(&self) -> &CMat {
        &self.g31
    }

    pub fn g32(&self) -> &CMat {
        &self.g32
    }

    /// `G3* = [G31 G32]`, the receiver's view of both transmitters
    /// (r3 × (t1+t2)).
    pub fn g3s(&self) -> CMat {
        let cfg = self.config;
        let mut m = CMat::zeros(cfg.r3, cfg.t1 + cfg.t2);
        m.view_mut((0, 0), (cfg.r3, cfg.t1)).copy_from(&self.g31);
        m.view_mut((0, cfg.t1), (cfg.r3, cfg.t2)).copy_from(&self.g32);
        m
    }

    /// `G*1 = [G21; G31]`, both receivers' view of the sender
    /// ((r2+r3) × t1).
    pub fn gs1(&self) -> CMat {
        let cfg = self.config;
        let mut m = CMat::zeros(cfg.r2 + cfg.r3, cfg.t1);
        m.view_mut((0, 0), (cfg.r2, cfg.t1)).copy_from(&self.g21);
        m.view_mut((cfg.r2, 0), (cfg.r3, cfg.t1)).copy_from(&self.g31);
        m
    }
}

/// Draws i.i.d. CN(0,1) gains for every entry of G21, G31, G32, reading a
/// single stream in that (row-major) order. Pure function of its arguments.
pub fn random_channel(config: AntennaConfig, seed: u64) -> ChannelMatrices {
    random_channel_stream(config, seed, 0)
}

/// As [`random_channel`] but on an explicit stream index, so harnesses can
/// draw many independent channels from one base seed concurrently.
pub fn random_channel_stream(config: AntennaConfig, seed: u64, stream: u64) -> ChannelMatrices {
    let mut s = GaussianStream::new(seed, stream);
    let mut draw = |rows: usize, cols: usize| {
        // from_fn fills column-major; index arithmetic keeps the documented
        // row-major draw order.
        let flat: Vec<Complex64> = (0..rows * cols).map(|_| s.next_cn01()).collect();
        DMatrix::from_fn(rows, cols, |i, j| flat[i * cols + j])
    };
    let g21 = draw(config.r2, config.t1);
    let g31 = draw(config.r3, config.t1);
    let g32 = draw(config.r3, config.t2);
    ChannelMatrices::new(config, g21, g31, g32).expect("shapes are consistent by construction")
}

// ---------------------------------------------------------------------------
// Half-duplex models
// ---------------------------------------------------------------------------

/// Sender frequency division: the sender splits its antennas into a block of
/// `t1'` seen only by the receiver (through `G31'`) and a block of `t1''` seen
/// only by the relay (through `G21''`); the relay's `G32` is unchanged.
#[derive(Debug, Clone)]
pub struct SfdChannel {
    pub t1p: usize,
    pub t1pp: usize,
    /// r3 × t1'
    pub g31p: CMat,
    /// r2 × t1''
    pub g21pp: CMat,
    /// r3 × t2
    pub g32: CMat,
}

/// Receiver frequency division: the receiver splits its antennas into a block
/// of `r3'` hearing only the sender (through `G31'`) and a block of `r3''`
/// hearing only the relay (through `G32''`); the relay observation `G21` is
/// unchanged.
#[derive(Debug, Clone)]
pub struct RfdChannel {
    pub r3p: usize,
    pub r3pp: usize,
    /// r2 × t1
    pub g21: CMat,
    /// r3' × t1
    pub g31p: CMat,
    /// r3'' × t2
    pub g32pp: CMat,
}

#[derive(Debug, Clone)]
pub enum HalfDuplexChannel {
    Sfd(SfdChannel),
    Rfd(RfdChannel),
}

impl HalfDuplexChannel {
    /// Carves an SFD channel out of a full-duplex one: the first `t1p` sender
    /// antennas keep their `G31` columns (receiver band), the remaining
    /// `t1 − t1p` keep their `G21` columns (relay band).
    pub fn carve_sfd(ch: &ChannelMatrices, t1p: usize) -> Result<Self, ChannelError> {
        let cfg = ch.config();
        if t1p == 0 || t1p >= cfg.t1 {
            return Err(ChannelError::BadSplit(format!(
                "SFD split t1' = {t1p} must satisfy 0 < t1' < t1 = {}",
                cfg.t1
            )));
        }
        let t1pp = cfg.t1 - t1p;
        Ok(Self::Sfd(SfdChannel {
            t1p,
            t1pp,
            g31p: ch.g31().view((0, 0), (cfg.r3, t1p)).into_owned(),
            g21pp: ch.g21().view((0, t1p), (cfg.r2, t1pp)).into_owned(),
            g32: ch.g32().clone(),
        }))
    }

    /// Carves an RFD channel: the first `r3p` receiver antennas keep their
    /// `G31` rows (sender band), the remaining `r3 − r3p` keep their `G32`
    /// rows (relay band).
    pub fn carve_rfd(ch: &ChannelMatrices, r3p: usize) -> Result<Self, ChannelError> {
        let cfg = ch.config();
        if r3p == 0 || r3p >= cfg.r3 {
            return Err(ChannelError::BadSplit(format!(
                "RFD split r3' = {r3p} must satisfy 0 < r3' < r3 = {}",
                cfg.r3
            )));
        }
        let r3pp = cfg.r3 - r3p;
        Ok(Self::Rfd(RfdChannel {
            r3p,
            r3pp,
            g21: ch.g21().clone(),
            g31p: ch.g31().view((0, 0), (r3p, cfg.t1)).into_owned(),
            g32pp: ch.g32().view((r3p, 0), (r3pp, cfg.t2)).into_owned(),
        }))
    }

    pub fn as_sfd(&self) -> Result<&SfdChannel, ChannelError> {
        match self {
            Self::Sfd(c) => Ok(c),
            Self::Rfd(_) => Err(ChannelError::WrongMode { expected: "SFD" }),
        }
    }

    pub fn as_rfd(&self) -> Result<&RfdChannel, ChannelError> {
        match self {
            Self::Rfd(c) => Ok(c),
            Self::Sfd(_) => Err(ChannelError::WrongMode { expected: "RFD" }),
        }
    }
}

/// Embeds an SFD channel into the full-duplex model: `t1 = t1' + t1''` with
/// `G31 = [G31' 0]` and `G21 = [0 G21'']` (the zero blocks realize the
/// orthogonal sender components), `G32` unchanged.
pub fn sfd_embed(hd: &HalfDuplexChannel) -> Result<ChannelMatrices, ChannelError> {
    let c = hd.as_sfd()?;
    let r2 = c.g21pp.nrows();
    let r3 = c.g31p.nrows();
    let t2 = c.g32.ncols();
    let t1 = c.t1p + c.t1pp;
    let mut g31 = CMat::zeros(r3, t1);
    g31.view_mut((0, 0), (r3, c.t1p)).copy_from(&c.g31p);
    let mut g21 = CMat::zeros(r2, t1);
    g21.view_mut((0, c.t1p), (r2, c.t1pp)).copy_from(&c.g21pp);
    let config = AntennaConfig::new(t1, t2, r2, r3)?;
    ChannelMatrices::new(config, g21, g31, c.g32.clone())
}

/// Embeds an RFD channel into the full-duplex model: `r3 = r3' + r3''` with
/// `G31 = [G31'; 0]` and `G32 = [0; G32'']` (zero rows realize the orthogonal
/// receiver components), `G21` unchanged.
pub fn rfd_embed(hd: &HalfDuplexChannel) -> Result<ChannelMatrices, ChannelError> {
    let c = hd.as_rfd()?;
    let t1 = c.g21.ncols();
    let r2 = c.g21.nrows();
    let t2 = c.g32pp.ncols();
    let r3 = c.r3p + c.r3pp;
    let mut g31 = CMat::zeros(r3, t1);
    g31.view_mut((0, 0), (c.r3p, t1)).copy_from(&c.g31p);
    let mut g32 = CMat::zeros(r3, t2);
    g32.view_mut((c.r3p, 0), (c.r3pp, t2)).copy_from(&c.g32pp);
    let config = AntennaConfig::new(t1, t2, r2, r3)?;
    ChannelMatrices::new(config, c.g21.clone(), g31, g32)
}

// ---------------------------------------------------------------------------
// Channel file format
// ---------------------------------------------------------------------------

/// On-disk JSON schema: integer antenna counts plus the three gain matrices as
/// row-major arrays of `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelJson {
    t1: usize,
    t2: usize,
    r2: usize,
    r3: usize,
    #[serde(rename = "G21")]
    g21: Vec<[f64; 2]>,
    #[serde(rename = "G31")]
    g31: Vec<[f64; 2]>,
    #[serde(rename = "G32")]
    g32: Vec<[f64; 2]>,
}

fn matrix_from_pairs(
    field: &'static str,
    rows: usize,
    cols: usize,
    pairs: &[[f64; 2]],
) -> Result<CMat, ChannelError> {
    if pairs.len() != rows * cols {
        return Err(ChannelError::DimensionMismatch {
            field,
            expected: format!("{rows}x{cols} = {} [re,im] pairs", rows * cols),
            got: format!("{} pairs", pairs.len()),
        });
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let [re, im] = pairs[i * cols + j];
        Complex64::new(re, im)
    }))
}

fn matrix_to_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let (rows, cols) = (m.nrows(), m.ncols());
    (0..rows * cols)
        .map(|idx| {
            let z = m[(idx / cols, idx % cols)];
            [z.re, z.im]
        })
        .collect()
}

/// Parses the channel JSON document, validating every dimension.
pub fn channel_from_json(text: &str) -> Result<ChannelMatrices, ChannelError> {
    let raw: ChannelJson = serde_json::from_str(text)?;
    let config = AntennaConfig::new(raw.t1, raw.t2, raw.r2, raw.r3)?;
    let g21 = matrix_from_pairs("G21", config.r2, config.t1, &raw.g21)?;
    let g31 = matrix_from_pairs("G31", config.r3, config.t1, &raw.g31)?;
    let g32 = matrix_from_pairs("G32", config.r3, config.t2, &raw.g32)?;
    ChannelMatrices::new(config, g21, g31, g32)
}

/// Serializes a channel to the JSON document format.
pub fn channel_to_json(ch: &ChannelMatrices) -> String {
    let cfg = ch.config();
    let doc = ChannelJson {
        t1: cfg.t1,
        t2: cfg.t2,
        r2: cfg.r2,
        r3: cfg.r3,
        g21: matrix_to_pairs(ch.g21()),
        g31: matrix_to_pairs(ch.g31()),
        g32: matrix_to_pairs(ch.g32()),
    };
    serde_json::to_string_pretty(&doc).expect("channel serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_channel_is_deterministic() {
        let cfg = AntennaConfig::new(2, 2, 2, 2).unwrap();
        let a = random_channel(cfg, 42);
        let b = random_channel(cfg, 42);
        assert_eq!(a.g21(), b.g21());
        assert_eq!(a.g31(), b.g31());
        assert_eq!(a.g32(), b.g32());
        let c = random_channel(cfg, 43);
        assert_ne!(a.g21(), c.g21(), "different seeds must differ");
        let d = random_channel_stream(cfg, 42, 1);
        assert_ne!(a.g21(), d.g21(), "different streams must differ");
    }

    #[test]
    fn random_channel_shapes() {
        let cfg = AntennaConfig::new(2, 2, 2, 2).unwrap();
        let ch = random_channel(cfg, 7);
        assert_eq!((ch.g21().nrows(), ch.g21().ncols()), (2, 2));
        assert_eq!((ch.g31().nrows(), ch.g31().ncols()), (2, 2));
        assert_eq!((ch.g32().nrows(), ch.g32().ncols()), (2, 2));
        assert_eq!((ch.g3s().nrows(), ch.g3s().ncols()), (2, 4));
        assert_eq!((ch.gs1().nrows(), ch.gs1().ncols()), (4, 2));
    }

    #[test]
    fn unit_variance_by_law_of_large_numbers() {
        let mut s = GaussianStream::new(123, 0);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| s.next_cn01().norm_sqr()).sum::<f64>() / n as f64;
        assert!(
            (mean - 1.0).abs() <= 0.05,
            "empirical mean |entry|^2 = {mean}"
        );
    }

    #[test]
    fn config_rejects_out_of_range() {
        assert!(AntennaConfig::new(0, 1, 1, 1).is_err());
        assert!(AntennaConfig::new(1, 17, 1, 1).is_err());
    }

    #[test]
    fn sfd_embedding_zero_blocks() {
        let cfg = AntennaConfig::new(2, 1, 1, 1).unwrap();
        let full = random_channel(cfg, 5);
        let hd = HalfDuplexChannel::carve_sfd(&full, 1).unwrap();
        let emb = sfd_embed(&hd).unwrap();
        // t1' = t1'' = 1: G21 column 0 and G31 column 1 are identically zero.
        assert_eq!(emb.g21()[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(emb.g31()[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(emb.g31()[(0, 0)], full.g31()[(0, 0)]);
        assert_eq!(emb.g21()[(0, 1)], full.g21()[(0, 1)]);
    }

    #[test]
    fn rfd_embedding_zero_blocks() {
        let cfg = AntennaConfig::new(1, 1, 1, 2).unwrap();
        let full = random_channel(cfg, 6);
        let hd = HalfDuplexChannel::carve_rfd(&full, 1).unwrap();
        let emb = rfd_embed(&hd).unwrap();
        // r3' = r3'' = 1: G32 row 0 and G31 row 1 are identically zero.
        assert_eq!(emb.g32()[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(emb.g31()[(1, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(emb.g31()[(0, 0)], full.g31()[(0, 0)]);
        assert_eq!(emb.g32()[(1, 0)], full.g32()[(1, 0)]);
    }

    #[test]
    fn embeddings_preserve_block_norms_and_orthogonality() {
        let cfg = AntennaConfig::new(3, 2, 2, 2).unwrap();
        let full = random_channel(cfg, 8);
        let hd = HalfDuplexChannel::carve_sfd(&full, 2).unwrap();
        let sfd = hd.as_sfd().unwrap();
        let emb = sfd_embed(&hd).unwrap();
        assert_eq!(emb.g31().norm(), sfd.g31p.norm());
        assert_eq!(emb.g21().norm(), sfd.g21pp.norm());
        // Orthogonality of the sender components: G21 · G31^H = 0 exactly.
        let cross = emb.g21() * emb.g31().adjoint();
        assert_eq!(cross.norm(), 0.0);
    }

    #[test]
    fn carve_rejects_invalid_split() {
        let cfg = AntennaConfig::new(2, 1, 1, 2).unwrap();
        let full = random_channel(cfg, 9);
        assert!(HalfDuplexChannel::carve_sfd(&full, 0).is_err());
        assert!(HalfDuplexChannel::carve_sfd(&full, 2).is_err());
        assert!(HalfDuplexChannel::carve_rfd(&full, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = AntennaConfig::new(2, 1, 1, 2).unwrap();
        let ch = random_channel(cfg, 21);
        let text = channel_to_json(&ch);
        let back = channel_from_json(&text).unwrap();
        assert_eq!(ch.g21(), back.g21());
        assert_eq!(ch.g31(), back.g31());
        assert_eq!(ch.g32(), back.g32());
    }

    #[test]
    fn json_validation_names_the_field() {
        let missing = r#"{"t1":1,"t2":1,"r2":1,"r3":1,"G21":[[1,0]],"G31":[[1,0]]}"#;
        let err = channel_from_json(missing).unwrap_err();
        assert!(err.to_string().contains("G32"), "diagnostic was: {err}");

        let wrong_len =
            r#"{"t1":1,"t2":1,"r2":1,"r3":1,"G21":[[1,0]],"G31":[[1,0]],"G32":[[1,0],[2,0]]}"#;
        let err = channel_from_json(wrong_len).unwrap_err();
        assert!(err.to_string().contains("G32"), "diagnostic was: {err}");
        assert!(matches!(err, ChannelError::DimensionMismatch { .. }));
    }
}
