//! The portable JSON code-spec artifact shared by all CLI commands.
//!
//! One file carries the reliability profile, the information/frozen sets
//! and, for the concatenated construction, the enlarged set and repetition
//! blocks. Plain codes omit the `blocks` field entirely; a concatenated
//! design without blocks serializes `blocks: []`; `enlarged_set` is `null`
//! whenever there are no blocks.

use crate::decode::CodeRef;
use crate::design::{CodeSpec, ConcatenatedCodeSpec, RepetitionBlock};
use crate::error::{Error, Result};
use crate::reliability::{DesignChannel, ReliabilityMethod, ReliabilityProfile};
use crate::xform::PolarParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// On-disk code-spec document. Field names and order are part of the file
/// format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpecFile {
    pub n: u32,
    #[serde(rename = "N")]
    pub block_len: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rate: f64,
    pub design: DesignEntry,
    pub method: String,
    pub pe: Vec<f64>,
    pub llr_mean: Option<Vec<f64>>,
    pub info_set: Vec<usize>,
    pub frozen_set: Vec<usize>,
    pub enlarged_set: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DesignEntry {
    pub channel: String,
    pub es_n0_db: f64,
}

/// The code reconstructed from a spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedCode {
    Plain(CodeSpec),
    Concatenated(ConcatenatedCodeSpec),
}

impl LoadedCode {
    pub fn code_ref(&self) -> CodeRef<'_> {
        match self {
            LoadedCode::Plain(s) => CodeRef::Plain(s),
            LoadedCode::Concatenated(s) => CodeRef::Concatenated(s),
        }
    }

    pub fn dimension(&self) -> usize {
        self.code_ref().dimension()
    }

    pub fn rate(&self) -> f64 {
        match self {
            LoadedCode::Plain(s) => s.rate(),
            LoadedCode::Concatenated(s) => s.rate(),
        }
    }

    pub fn blocks(&self) -> &[RepetitionBlock] {
        match self {
            LoadedCode::Plain(_) => &[],
            LoadedCode::Concatenated(s) => s.blocks(),
        }
    }
}

fn design_entry(channel: DesignChannel) -> Result<DesignEntry> {
    match channel {
        DesignChannel::BiAwgn { es_n0_db } => Ok(DesignEntry {
            channel: "bi-awgn".into(),
            es_n0_db,
        }),
        DesignChannel::Bec { .. } => Err(Error::UnsupportedMethod(
            "only the bi-awgn design channel has a spec-file representation".into(),
        )),
    }
}

fn method_tag(method: ReliabilityMethod) -> Result<&'static str> {
    match method {
        ReliabilityMethod::GaussianApprox => Ok("ga"),
        ReliabilityMethod::GenieMonteCarlo { .. } => Ok("genie"),
        ReliabilityMethod::ExactBecRecursion => Err(Error::UnsupportedMethod(
            "the BEC recursion has no spec-file representation".into(),
        )),
    }
}

impl SpecFile {
    pub fn from_plain(spec: &CodeSpec, profile: &ReliabilityProfile) -> Result<SpecFile> {
        check_profile(profile, spec.params())?;
        Ok(SpecFile {
            n: spec.params().stages(),
            block_len: spec.params().block_len(),
            k: spec.dimension(),
            rate: spec.rate(),
            design: design_entry(spec.design_channel())?,
            method: method_tag(spec.design_method())?.into(),
            pe: profile.pe().to_vec(),
            llr_mean: profile.llr_mean().map(<[f64]>::to_vec),
            info_set: spec.info_set().to_vec(),
            frozen_set: spec.frozen_set(),
            enlarged_set: None,
            blocks: None,
        })
    }

    pub fn from_concatenated(
        spec: &ConcatenatedCodeSpec,
        profile: &ReliabilityProfile,
    ) -> Result<SpecFile> {
        check_profile(profile, spec.params())?;
        // one index per information carrier: block heads plus unblocked
        // members of the enlarged set
        let mut info_set: Vec<usize> = spec
            .carriers()
            .iter()
            .map(|c| match c {
                crate::design::Carrier::Single(i) => *i,
                crate::design::Carrier::Block(b) => spec.blocks()[*b].head(),
            })
            .collect();
        info_set.sort_unstable();
        let blocks: Vec<Vec<usize>> = spec
            .blocks()
            .iter()
            .map(|b| b.indices().to_vec())
            .collect();
        Ok(SpecFile {
            n: spec.params().stages(),
            block_len: spec.params().block_len(),
            k: spec.dimension(),
            rate: spec.rate(),
            design: design_entry(spec.design_channel())?,
            method: method_tag(spec.design_method())?.into(),
            pe: profile.pe().to_vec(),
            llr_mean: profile.llr_mean().map(<[f64]>::to_vec),
            info_set,
            frozen_set: spec.frozen_set(),
            enlarged_set: if blocks.is_empty() {
                None
            } else {
                Some(spec.enlarged_set().to_vec())
            },
            blocks: Some(blocks),
        })
    }

    /// Reconstruct the reliability profile and the code, re-checking every
    /// structural invariant of the file format.
    pub fn into_parts(self) -> Result<(ReliabilityProfile, LoadedCode)> {
        let params = PolarParams::from_block_len(self.block_len)
            .map_err(|e| Error::SpecFile(e.to_string()))?;
        if params.stages() != self.n {
            return Err(Error::SpecFile(format!(
                "n = {} inconsistent with N = {}",
                self.n, self.block_len
            )));
        }
        if self.design.channel != "bi-awgn" {
            return Err(Error::SpecFile(format!(
                "unknown design channel {:?}",
                self.design.channel
            )));
        }
        let channel = DesignChannel::BiAwgn {
            es_n0_db: self.design.es_n0_db,
        };
        let method = match self.method.as_str() {
            "ga" => {
                if self.llr_mean.is_none() {
                    return Err(Error::SpecFile("method \"ga\" requires llr_mean".into()));
                }
                ReliabilityMethod::GaussianApprox
            }
            // trial count and seed are not part of the file format
            "genie" => ReliabilityMethod::GenieMonteCarlo { trials: 0, seed: 0 },
            other => return Err(Error::SpecFile(format!("unknown method {other:?}"))),
        };
        let profile =
            ReliabilityProfile::from_parts(params, channel, method, self.pe, self.llr_mean)
                .map_err(|e| Error::SpecFile(e.to_string()))?;

        if self.k != self.info_set.len() {
            return Err(Error::SpecFile(format!(
                "K = {} but info_set has {} entries",
                self.k,
                self.info_set.len()
            )));
        }
        let expected_rate = self.k as f64 / self.block_len as f64;
        if (self.rate - expected_rate).abs() > 1e-9 {
            return Err(Error::SpecFile(format!(
                "rate {} inconsistent with K/N = {expected_rate}",
                self.rate
            )));
        }

        let code = match self.blocks {
            None => {
                if self.enlarged_set.is_some() {
                    return Err(Error::SpecFile(
                        "enlarged_set present without a blocks field".into(),
                    ));
                }
                let spec = CodeSpec::new(params, self.info_set, channel, method)
                    .map_err(|e| Error::SpecFile(e.to_string()))?;
                check_frozen(&self.frozen_set, &spec.frozen_set())?;
                LoadedCode::Plain(spec)
            }
            Some(blocks) => {
                let enlarged = match (self.enlarged_set, blocks.is_empty()) {
                    (None, true) => self.info_set.clone(),
                    (None, false) => {
                        return Err(Error::SpecFile(
                            "blocks present but enlarged_set is null".into(),
                        ))
                    }
                    (Some(e), _) => e,
                };
                let blocks = blocks
                    .into_iter()
                    .map(RepetitionBlock::new)
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::SpecFile(e.to_string()))?;
                let spec =
                    ConcatenatedCodeSpec::new(params, enlarged, blocks, channel, method)
                        .map_err(|e| Error::SpecFile(e.to_string()))?;
                let derived = SpecFile::from_concatenated(&spec, &profile)?;
                if derived.info_set != self.info_set {
                    return Err(Error::SpecFile(format!(
                        "info_set {:?} does not match the carrier heads {:?}",
                        self.info_set, derived.info_set
                    )));
                }
                check_frozen(&self.frozen_set, &spec.frozen_set())?;
                LoadedCode::Concatenated(spec)
            }
        };
        Ok((profile, code))
    }
}

fn check_profile(profile: &ReliabilityProfile, params: &PolarParams) -> Result<()> {
    if profile.params() != params {
        return Err(Error::invalid(
            "reliability profile block length does not match the code",
        ));
    }
    Ok(())
}

fn check_frozen(stored: &[usize], derived: &[usize]) -> Result<()> {
    if stored != derived {
        return Err(Error::SpecFile(
            "frozen_set is not the complement of the information-carrying set".into(),
        ));
    }
    Ok(())
}

/// Write a spec file as pretty-printed JSON.
pub fn save_spec(path: &Path, spec: &SpecFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(spec)
        .map_err(|e| Error::SpecFile(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Parse a spec file; JSON errors surface as spec-file errors.
pub fn load_spec(path: &Path) -> Result<SpecFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::SpecFile(e.to_string()))
}

/// Load and reconstruct in one step.
pub fn load_code(path: &Path) -> Result<(ReliabilityProfile, LoadedCode)> {
    load_spec(path)?.into_parts()
}
