use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::config::{model_from_text, model_to_text};
use crate::numerics::Tensor;

use super::{Model, ModelError};

/// Checkpoint layout (all integers little-endian):
///
/// ```text
/// magic   b"CTXNMT01"
/// u32     config text length, then that many UTF-8 bytes (key = value)
/// u32     tensor count
/// per tensor:
///   u32   name length, then UTF-8 name
///   u32   rank, then rank x u32 extents
///   f64   raw IEEE-754 bits per value
/// ```
///
/// Values are written bit-exactly, so save -> load round-trips are
/// byte-identical.
const MAGIC: &[u8; 8] = b"CTXNMT01";

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<(), ModelError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    let cfg_text = model_to_text(&model.cfg);
    write_u32(&mut buf, cfg_text.len() as u32);
    buf.extend_from_slice(cfg_text.as_bytes());
    write_u32(&mut buf, model.params.len() as u32);
    for (_, name, tensor) in model.params.iter() {
        write_u32(&mut buf, name.len() as u32);
        buf.extend_from_slice(name.as_bytes());
        write_u32(&mut buf, tensor.shape().len() as u32);
        for &dim in tensor.shape() {
            write_u32(&mut buf, dim as u32);
        }
        for v in tensor.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)
        .map_err(|e| ModelError::Checkpoint(format!("create {}: {e}", path.display())))?;
    file.write_all(&buf)
        .map_err(|e| ModelError::Checkpoint(format!("write {}: {e}", path.display())))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Model, ModelError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(|e| ModelError::Checkpoint(format!("open {}: {e}", path.display())))?
        .read_to_end(&mut bytes)
        .map_err(|e| ModelError::Checkpoint(format!("read {}: {e}", path.display())))?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    let magic = cur.take(8)?;
    if magic != MAGIC {
        return Err(ModelError::Checkpoint(format!(
            "{} is not a model checkpoint (bad magic)",
            path.display()
        )));
    }
    let cfg_len = cur.u32()? as usize;
    let cfg_text = std::str::from_utf8(cur.take(cfg_len)?)
        .map_err(|_| ModelError::Checkpoint("config header is not UTF-8".into()))?;
    let cfg = model_from_text(cfg_text)
        .map_err(|e| ModelError::Checkpoint(format!("config header: {e}")))?;

    // Materialize the parameter skeleton, then overwrite every tensor.
    let mut model = Model::new(cfg, 0)?;
    let n_tensors = cur.u32()? as usize;
    if n_tensors != model.params.len() {
        return Err(ModelError::Checkpoint(format!(
            "checkpoint stores {} tensors, config implies {}",
            n_tensors,
            model.params.len()
        )));
    }
    for _ in 0..n_tensors {
        let name_len = cur.u32()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| ModelError::Checkpoint("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = cur.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cur.u32()? as usize);
        }
        let count: usize = shape.iter().product();
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let raw = cur.take(8)?;
            data.push(f64::from_le_bytes(raw.try_into().unwrap()));
        }
        let id = model
            .params
            .id_by_name(&name)
            .ok_or_else(|| ModelError::Checkpoint(format!("unknown tensor {name}")))?;
        if model.params.get(id).shape() != shape.as_slice() {
            return Err(ModelError::Checkpoint(format!(
                "tensor {name}: shape {:?} does not match config {:?}",
                shape,
                model.params.get(id).shape()
            )));
        }
        *model.params.get_mut(id) = Tensor::from_vec(&shape, data)
            .map_err(|e| ModelError::Checkpoint(format!("tensor {name}: {e}")))?;
    }
    if cur.pos != bytes.len() {
        return Err(ModelError::Checkpoint("trailing bytes after tensors".into()));
    }
    Ok(model)
}

fn write_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.pos + n > self.bytes.len() {
            return Err(ModelError::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{ContextKind, IntegrationKind};
    use crate::seq2seq::{Direction, ModelConfig};

    fn cfg() -> ModelConfig {
        ModelConfig {
            d: 6,
            hidden: 6,
            direction: Direction::Bi,
            enc_layers: 2,
            dec_layers: 2,
            context: ContextKind::Bilstm,
            integration: IntegrationKind::Concat,
            src_vocab: 11,
            tgt_vocab: 13,
            dropout: 0.3,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let model = Model::new(cfg(), 1234).unwrap();
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.cfg, model.cfg);
        for (id, name, tensor) in model.params.iter() {
            let other = loaded.params.get(loaded.params.id_by_name(name).unwrap());
            assert_eq!(tensor.shape(), other.shape(), "{name}");
            for (a, b) in tensor.data().iter().zip(other.data()) {
                assert_eq!(a.to_bits(), b.to_bits(), "{name}");
            }
            let _ = id;
        }
        // Saving the loaded model reproduces the same bytes.
        let path2 = dir.path().join("m2.ckpt");
        save_checkpoint(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ModelError::Checkpoint(_))
        ));
    }
}
