//! Binary weight files.
//!
//! Layout, all integers `u32` little-endian:
//!
//! ```text
//! "OUSG" | version | level count
//! per level:  index | frozen | layer count (6)
//!             per layer: kind (0 dense, 1 lstm) | inputs | outputs (hidden for lstm)
//! then every parameter as f64 LE: per level the generator
//! (lstm W, b, fc1 W, b, fc2 W, b) followed by the discriminator
//! (fc1 W, b, fc2 W, b, fc3 W, b).
//! ```
//!
//! Optimizer state is not stored; loaded levels start with fresh Adam
//! moments.

use std::fs;
use std::path::Path;

use hgan_core::gan::GanLevel;
use hgan_core::hierarchy::Hierarchy;
use hgan_core::nn::{Adam, Dense, DiscriminatorNet, GeneratorNet, Lstm, Params};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"OUSG";
pub const VERSION: u32 = 1;
const LAYERS_PER_LEVEL: u32 = 6;
const KIND_DENSE: u32 = 0;
const KIND_LSTM: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("not a weight file: bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("truncated file while reading {0}")]
    Truncated(String),
    #[error("shape mismatch in {field}: expected {expected}, found {found}")]
    Shape {
        field: String,
        expected: u64,
        found: u64,
    },
    #[error("{0} trailing bytes after parameters")]
    Trailing(usize),
    #[error("invalid network in {field}: {source}")]
    Network {
        field: String,
        #[source]
        source: hgan_core::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    kind: u32,
    n_in: u32,
    n_out: u32,
}

fn level_shapes(level: &GanLevel) -> [LayerShape; 6] {
    let g = level.generator();
    let d = level.discriminator();
    let dense = |l: &Dense| LayerShape {
        kind: KIND_DENSE,
        n_in: l.n_in as u32,
        n_out: l.n_out as u32,
    };
    [
        LayerShape {
            kind: KIND_LSTM,
            n_in: g.lstm().n_in as u32,
            n_out: g.lstm().hidden as u32,
        },
        dense(g.fc1()),
        dense(g.fc2()),
        dense(d.fc1()),
        dense(d.fc2()),
        dense(d.fc3()),
    ]
}

pub fn encode(h: &Hierarchy) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(h.depth() as u32).to_le_bytes());
    for level in h.levels() {
        out.extend_from_slice(&(level.index() as u32).to_le_bytes());
        out.extend_from_slice(&u32::from(level.is_frozen()).to_le_bytes());
        out.extend_from_slice(&LAYERS_PER_LEVEL.to_le_bytes());
        for s in level_shapes(level) {
            for v in [s.kind, s.n_in, s.n_out] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    for level in h.levels() {
        let mut put = |s: &[f64]| {
            for v in s {
                out.extend_from_slice(&v.to_le_bytes());
            }
        };
        level.generator().visit(&mut put);
        level.discriminator().visit(&mut put);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8], PersistError> {
        if self.buf.len() - self.pos < n {
            return Err(PersistError::Truncated(field.to_string()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, field: &str) -> Result<u32, PersistError> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, field: &str) -> Result<Vec<f64>, PersistError> {
        let b = self.take(n * 8, field)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn expect(field: String, expected: u64, found: u64) -> Result<(), PersistError> {
    if expected != found {
        return Err(PersistError::Shape {
            field,
            expected,
            found,
        });
    }
    Ok(())
}

const LAYER_NAMES: [&str; 6] = [
    "generator.lstm",
    "generator.fc1",
    "generator.fc2",
    "discriminator.fc1",
    "discriminator.fc2",
    "discriminator.fc3",
];

pub fn decode(bytes: &[u8]) -> Result<Hierarchy, PersistError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(PersistError::Magic(magic));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(PersistError::Version {
            found: version,
            expected: VERSION,
        });
    }
    let n_levels = r.u32("level count")? as usize;

    let mut headers = Vec::new();
    for k in 1..=n_levels {
        let index = r.u32(&format!("level {k} index"))?;
        expect(format!("level {k} index"), k as u64, index as u64)?;
        let frozen = r.u32(&format!("level {k} frozen flag"))? != 0;
        let n_layers = r.u32(&format!("level {k} layer count"))?;
        expect(
            format!("level {k} layer count"),
            LAYERS_PER_LEVEL as u64,
            n_layers as u64,
        )?;
        let mut shapes = Vec::with_capacity(6);
        for name in LAYER_NAMES {
            let field = format!("level {k} {name}");
            let s = LayerShape {
                kind: r.u32(&format!("{field} kind"))?,
                n_in: r.u32(&format!("{field} inputs"))?,
                n_out: r.u32(&format!("{field} outputs"))?,
            };
            let want = if name == "generator.lstm" {
                KIND_LSTM
            } else {
                KIND_DENSE
            };
            expect(format!("{field} kind"), want as u64, s.kind as u64)?;
            shapes.push(s);
        }
        headers.push((k, frozen, shapes));
    }

    let mut levels = Vec::with_capacity(headers.len());
    for (k, frozen, shapes) in headers {
        let mut dense = |s: LayerShape, name: &str| -> Result<Dense, PersistError> {
            let (n_in, n_out) = (s.n_in as usize, s.n_out as usize);
            Ok(Dense {
                n_in,
                n_out,
                weights: r.f64s(n_in * n_out, &format!("level {k} {name} weights"))?,
                bias: r.f64s(n_out, &format!("level {k} {name} bias"))?,
            })
        };
        let net_err = |field: &str| {
            let field = format!("level {k} {field}");
            move |source| PersistError::Network { field, source }
        };
        // An LSTM is stored exactly like a dense layer of 4H outputs over
        // I + H inputs.
        let (li, lh) = (shapes[0].n_in, shapes[0].n_out);
        let packed = dense(
            LayerShape {
                kind: KIND_DENSE,
                n_in: li + lh,
                n_out: 4 * lh,
            },
            LAYER_NAMES[0],
        )?;
        let lstm = Lstm {
            n_in: li as usize,
            hidden: lh as usize,
            weights: packed.weights,
            bias: packed.bias,
        };
        let g1 = dense(shapes[1], LAYER_NAMES[1])?;
        let g2 = dense(shapes[2], LAYER_NAMES[2])?;
        let d1 = dense(shapes[3], LAYER_NAMES[3])?;
        let d2 = dense(shapes[4], LAYER_NAMES[4])?;
        let d3 = dense(shapes[5], LAYER_NAMES[5])?;
        let g = GeneratorNet::from_layers(k, lstm, g1, g2).map_err(net_err("generator"))?;
        let d = DiscriminatorNet::from_layers(d1, d2, d3).map_err(net_err("discriminator"))?;
        let mut level = GanLevel::from_nets(k, g, d, Adam::DEFAULT_LR).map_err(net_err("nets"))?;
        if frozen {
            level.freeze();
        }
        levels.push(level);
    }
    if r.pos != bytes.len() {
        return Err(PersistError::Trailing(bytes.len() - r.pos));
    }
    Hierarchy::from_levels(levels).map_err(|source| PersistError::Network {
        field: "hierarchy".into(),
        source,
    })
}

pub fn save_weights(h: &Hierarchy, path: &Path) -> crate::Result<()> {
    fs::write(path, encode(h)).map_err(crate::error::io_err(path))
}

pub fn load_weights(path: &Path) -> crate::Result<Hierarchy> {
    let bytes = fs::read(path).map_err(crate::error::io_err(path))?;
    Ok(decode(&bytes)?)
}
