//! Model files: a JSON header describing the architecture (layer dims,
//! activation slopes, orthonormalization modes, ambient dims, problem
//! reference, RNG seed, training metadata) followed by a binary
//! little-endian f64 parameter blob in declared ordering, and a CRC32
//! over header and blob.
//!
//! ```text
//! header_len  u64 LE
//! header      JSON bytes
//! blob        f64 LE values, section order fixed by the header
//! crc         u32 LE, CRC32 of header bytes ++ blob bytes
//! ```

use super::{atomic_write, bytes_to_f64s, f64s_to_bytes};
use crate::baselines::{ClusteredPod, PodAutoencoder};
use crate::dod::DodModel;
use crate::error::{Error, Result};
use crate::linalg::{GramMatrix, Matrix, OrthMode};
use crate::nets::{DenseNet, NetSpec};
use crate::pod::AmbientBasis;
use crate::rom::{BenchmarkModel, BenchmarkVariant, DodNnModel, SegregatedNet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u16 = 1;

/// Any persistable model.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Ambient(AmbientBasis),
    Dod(DodModel),
    DodNn(DodNnModel),
    ClusteredPod(ClusteredPod),
    Autoencoder(PodAutoencoder),
    Benchmark(BenchmarkModel),
}

impl AnyModel {
    pub fn type_name(&self) -> &'static str {
        match self {
            AnyModel::Ambient(_) => "ambient",
            AnyModel::Dod(_) => "dod",
            AnyModel::DodNn(_) => "dod-nn",
            AnyModel::ClusteredPod(_) => "cpod",
            AnyModel::Autoencoder(_) => "ae",
            AnyModel::Benchmark(_) => "benchmark",
        }
    }
}

/// Provenance carried in every model file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelMeta {
    /// Path or name of the problem definition the data came from.
    pub problem_ref: Option<String>,
    pub rng_seed: Option<u64>,
    pub training: Option<TrainingMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GramKindHeader {
    Identity,
    Diagonal,
    Dense,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GramHeader {
    kind: GramKindHeader,
    dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AmbientHeader {
    gram: GramHeader,
    n_h: usize,
    n_a: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DodHeader {
    ambient: AmbientHeader,
    n: usize,
    orth_mode: OrthMode,
    seed_arch: NetSpec,
    root_arch: NetSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DodNnHeader {
    dod: DodHeader,
    phi1: NetSpec,
    phi2: NetSpec,
    m: usize,
    coeff_orth_mode: OrthMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CpodHeader {
    gram: GramHeader,
    n_h: usize,
    n: usize,
    clusters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AeHeader {
    ambient: AmbientHeader,
    encoder: NetSpec,
    decoder: NetSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BenchmarkHeader {
    ambient: AmbientHeader,
    monolithic: Option<NetSpec>,
    segregated: Option<SegregatedHeader>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SegregatedHeader {
    phi1: NetSpec,
    phi2: NetSpec,
    m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "kebab-case")]
enum ModelHeader {
    Ambient(AmbientHeader),
    Dod(DodHeader),
    DodNn(DodNnHeader),
    Cpod(CpodHeader),
    Ae(AeHeader),
    Benchmark(BenchmarkHeader),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FileHeader {
    format_version: u16,
    meta: ModelMeta,
    model: ModelHeader,
}

// ── blob writing ─────────────────────────────────────────────────────

fn gram_header(g: &GramMatrix) -> GramHeader {
    GramHeader {
        kind: match g {
            GramMatrix::Identity { .. } => GramKindHeader::Identity,
            GramMatrix::Diagonal { .. } => GramKindHeader::Diagonal,
            GramMatrix::Dense { .. } => GramKindHeader::Dense,
        },
        dim: g.dim(),
    }
}

fn push_gram(g: &GramMatrix, blob: &mut Vec<f64>) {
    match g {
        GramMatrix::Identity { .. } => {}
        GramMatrix::Diagonal { weights } => blob.extend_from_slice(weights),
        GramMatrix::Dense { matrix } => blob.extend_from_slice(matrix.data()),
    }
}

fn push_ambient(a: &AmbientBasis, blob: &mut Vec<f64>) -> AmbientHeader {
    let header = AmbientHeader {
        gram: gram_header(&a.g),
        n_h: a.full_dim(),
        n_a: a.dim(),
    };
    push_gram(&a.g, blob);
    blob.extend_from_slice(a.a.data());
    blob.extend_from_slice(&a.retained_eigenvalues);
    blob.push(a.discarded_energy);
    header
}

fn push_net(net: &DenseNet, blob: &mut Vec<f64>) {
    let mut params = Vec::new();
    net.get_params(&mut params);
    blob.extend_from_slice(&params);
}

fn dod_header_and_blob(model: &DodModel, blob: &mut Vec<f64>) -> Result<DodHeader> {
    let ambient = push_ambient(&model.ambient, blob);
    push_net(&model.seed, blob);
    for root in &model.roots {
        push_net(root, blob);
    }
    Ok(DodHeader {
        ambient,
        n: model.n,
        orth_mode: model.orth_mode,
        seed_arch: model.seed.spec(),
        root_arch: model.roots[0].spec(),
    })
}

/// Serializes a model with its metadata.
pub fn save_model(path: &Path, model: &AnyModel, meta: &ModelMeta) -> Result<()> {
    let mut blob: Vec<f64> = Vec::new();
    let header = match model {
        AnyModel::Ambient(a) => ModelHeader::Ambient(push_ambient(a, &mut blob)),
        AnyModel::Dod(d) => ModelHeader::Dod(dod_header_and_blob(d, &mut blob)?),
        AnyModel::DodNn(m) => {
            let dod = dod_header_and_blob(&m.dod, &mut blob)?;
            push_net(&m.phi.phi1, &mut blob);
            push_net(&m.phi.phi2, &mut blob);
            ModelHeader::DodNn(DodNnHeader {
                dod,
                phi1: m.phi.phi1.spec(),
                phi2: m.phi.phi2.spec(),
                m: m.phi.m,
                coeff_orth_mode: m.coeff_orth_mode,
            })
        }
        AnyModel::ClusteredPod(c) => {
            push_gram(&c.g, &mut blob);
            for basis in &c.bases {
                blob.extend_from_slice(basis.data());
            }
            for centroid in &c.centroids {
                blob.extend_from_slice(centroid);
            }
            ModelHeader::Cpod(CpodHeader {
                gram: gram_header(&c.g),
                n_h: c.g.dim(),
                n: c.rank(),
                clusters: c.n_clusters(),
            })
        }
        AnyModel::Autoencoder(ae) => {
            let ambient = push_ambient(&ae.ambient, &mut blob);
            push_net(&ae.encoder, &mut blob);
            push_net(&ae.decoder, &mut blob);
            ModelHeader::Ae(AeHeader {
                ambient,
                encoder: ae.encoder.spec(),
                decoder: ae.decoder.spec(),
            })
        }
        AnyModel::Benchmark(b) => {
            let ambient = push_ambient(&b.ambient, &mut blob);
            let (monolithic, segregated) = match &b.variant {
                BenchmarkVariant::Monolithic(net) => {
                    push_net(net, &mut blob);
                    (Some(net.spec()), None)
                }
                BenchmarkVariant::Segregated(seg) => {
                    push_net(&seg.phi1, &mut blob);
                    push_net(&seg.phi2, &mut blob);
                    (
                        None,
                        Some(SegregatedHeader {
                            phi1: seg.phi1.spec(),
                            phi2: seg.phi2.spec(),
                            m: seg.m,
                        }),
                    )
                }
            };
            ModelHeader::Benchmark(BenchmarkHeader {
                ambient,
                monolithic,
                segregated,
            })
        }
    };

    let file_header = FileHeader {
        format_version: MODEL_FORMAT_VERSION,
        meta: meta.clone(),
        model: header,
    };
    let header_bytes = serde_json::to_vec(&file_header)
        .map_err(|e| Error::Format(format!("header encoding failed: {e}")))?;
    let mut blob_bytes = Vec::with_capacity(blob.len() * 8);
    f64s_to_bytes(&blob, &mut blob_bytes);

    let mut bytes = Vec::with_capacity(8 + header_bytes.len() + blob_bytes.len() + 4);
    bytes.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_bytes);
    bytes.extend_from_slice(&blob_bytes);
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&header_bytes);
    hasher.update(&blob_bytes);
    bytes.extend_from_slice(&hasher.finalize().to_le_bytes());
    atomic_write(path, &bytes)
}

// ── blob reading ─────────────────────────────────────────────────────

struct BlobReader<'a> {
    values: &'a [f64],
    pos: usize,
}

impl<'a> BlobReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [f64]> {
        if self.pos + n > self.values.len() {
            return Err(Error::Format(format!(
                "blob underrun: need {n} values at offset {}, have {}",
                self.pos,
                self.values.len()
            )));
        }
        let out = &self.values[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.values.len() {
            return Err(Error::Format(format!(
                "blob has {} unread values",
                self.values.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn read_gram(header: &GramHeader, blob: &mut BlobReader) -> Result<GramMatrix> {
    match header.kind {
        GramKindHeader::Identity => Ok(GramMatrix::identity(header.dim)),
        GramKindHeader::Diagonal => GramMatrix::diagonal(blob.take(header.dim)?.to_vec()),
        GramKindHeader::Dense => {
            let data = blob.take(header.dim * header.dim)?.to_vec();
            GramMatrix::dense(Matrix::from_col_major(header.dim, header.dim, data)?)
        }
    }
}

fn read_ambient(header: &AmbientHeader, blob: &mut BlobReader) -> Result<AmbientBasis> {
    let g = read_gram(&header.gram, blob)?;
    let a = Matrix::from_col_major(header.n_h, header.n_a, blob.take(header.n_h * header.n_a)?.to_vec())?;
    let retained = blob.take(header.n_a)?.to_vec();
    let discarded = blob.take(1)?[0];
    Ok(AmbientBasis {
        a,
        g,
        retained_eigenvalues: retained,
        discarded_energy: discarded,
    })
}

fn read_net(spec: &NetSpec, blob: &mut BlobReader) -> Result<DenseNet> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut net = spec.build(&mut rng)?;
    let count = net.param_count();
    net.set_params(blob.take(count)?)?;
    Ok(net)
}

fn read_dod(header: &DodHeader, blob: &mut BlobReader) -> Result<DodModel> {
    let ambient = read_ambient(&header.ambient, blob)?;
    let seed = read_net(&header.seed_arch, blob)?;
    let roots = (0..header.n)
        .map(|_| read_net(&header.root_arch, blob))
        .collect::<Result<Vec<_>>>()?;
    Ok(DodModel {
        ambient,
        seed,
        roots,
        orth_mode: header.orth_mode,
        n: header.n,
    })
}

/// Loads any model file, verifying the CRC and the header/blob
/// consistency.
pub fn load_model(path: &Path) -> Result<(AnyModel, ModelMeta)> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 12 {
        return Err(Error::Format("model file too short".into()));
    }
    let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    if 8 + header_len + 4 > bytes.len() {
        return Err(Error::Format("declared header length exceeds file".into()));
    }
    let header_bytes = &bytes[8..8 + header_len];
    let blob_bytes = &bytes[8 + header_len..bytes.len() - 4];
    let stored_crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(header_bytes);
    hasher.update(blob_bytes);
    let crc = hasher.finalize();
    if crc != stored_crc {
        return Err(Error::Format(format!(
            "model CRC mismatch: stored {stored_crc:#010x}, computed {crc:#010x}"
        )));
    }
    let file_header: FileHeader = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::Format(format!("header decoding failed: {e}")))?;
    if file_header.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported model format version {}",
            file_header.format_version
        )));
    }
    let values = bytes_to_f64s(blob_bytes)?;
    let mut blob = BlobReader {
        values: &values,
        pos: 0,
    };
    let model = match &file_header.model {
        ModelHeader::Ambient(h) => AnyModel::Ambient(read_ambient(h, &mut blob)?),
        ModelHeader::Dod(h) => AnyModel::Dod(read_dod(h, &mut blob)?),
        ModelHeader::DodNn(h) => {
            let dod = read_dod(&h.dod, &mut blob)?;
            let phi1 = read_net(&h.phi1, &mut blob)?;
            let phi2 = read_net(&h.phi2, &mut blob)?;
            let phi = SegregatedNet::new(phi1, phi2, h.m, h.dod.n)?;
            AnyModel::DodNn(DodNnModel {
                dod,
                phi,
                coeff_orth_mode: h.coeff_orth_mode,
            })
        }
        ModelHeader::Cpod(h) => {
            let g = read_gram(&h.gram, &mut blob)?;
            let bases = (0..h.clusters)
                .map(|_| {
                    Matrix::from_col_major(h.n_h, h.n, blob.take(h.n_h * h.n).map(|s| s.to_vec())?)
                })
                .collect::<Result<Vec<_>>>()?;
            let centroids = (0..h.clusters)
                .map(|_| blob.take(h.n_h).map(|s| s.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            AnyModel::ClusteredPod(ClusteredPod { bases, centroids, g })
        }
        ModelHeader::Ae(h) => {
            let ambient = read_ambient(&h.ambient, &mut blob)?;
            let encoder = read_net(&h.encoder, &mut blob)?;
            let decoder = read_net(&h.decoder, &mut blob)?;
            AnyModel::Autoencoder(PodAutoencoder {
                ambient,
                encoder,
                decoder,
            })
        }
        ModelHeader::Benchmark(h) => {
            let ambient = read_ambient(&h.ambient, &mut blob)?;
            let variant = match (&h.monolithic, &h.segregated) {
                (Some(spec), None) => BenchmarkVariant::Monolithic(read_net(spec, &mut blob)?),
                (None, Some(seg)) => {
                    let phi1 = read_net(&seg.phi1, &mut blob)?;
                    let phi2 = read_net(&seg.phi2, &mut blob)?;
                    let n = phi1.output_dim() / seg.m;
                    BenchmarkVariant::Segregated(SegregatedNet::new(phi1, phi2, seg.m, n)?)
                }
                _ => {
                    return Err(Error::Format(
                        "benchmark header must carry exactly one variant".into(),
                    ))
                }
            };
            AnyModel::Benchmark(BenchmarkModel { variant, ambient })
        }
    };
    blob.finish()?;
    Ok((model, file_header.meta))
}
