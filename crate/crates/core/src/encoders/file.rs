//! Versioned JSON cache of encoded samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EncodedSample, InputSpike};
use crate::error::{Error, Result};

pub const ENCODED_FORMAT: &str = "first-spike-encoded";
pub const ENCODED_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleDoc {
    label: usize,
    /// (neuron, time ms) pairs.
    spikes: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EncodedDoc {
    format: String,
    version: u32,
    inputs: usize,
    classes: usize,
    /// Free-form description of the encoder that produced the spikes.
    encoder: serde_json::Value,
    samples: Vec<SampleDoc>,
}

/// Contents of an encoded-sample file.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFile {
    pub inputs: usize,
    pub classes: usize,
    pub encoder: serde_json::Value,
    pub samples: Vec<EncodedSample<f64>>,
}

pub fn write_encoded(path: &Path, file: &EncodedFile) -> Result<()> {
    if let Some(s) = file.samples.iter().find(|s| s.inputs != file.inputs) {
        return Err(Error::Shape(format!(
            "sample with {} inputs in a file of {}-input samples",
            s.inputs, file.inputs
        )));
    }
    let doc = EncodedDoc {
        format: ENCODED_FORMAT.into(),
        version: ENCODED_VERSION,
        inputs: file.inputs,
        classes: file.classes,
        encoder: file.encoder.clone(),
        samples: file
            .samples
            .iter()
            .map(|s| SampleDoc {
                label: s.label,
                spikes: s.spikes.iter().map(|x| (x.neuron, x.time)).collect(),
            })
            .collect(),
    };
    let out = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(out);
    serde_json::to_writer(&mut w, &doc)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_encoded(path: &Path) -> Result<EncodedFile> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let doc: EncodedDoc = serde_json::from_reader(BufReader::new(f))?;
    if doc.format != ENCODED_FORMAT {
        return Err(Error::Format(format!("{}: not an encoded-sample file ({})", path.display(), doc.format)));
    }
    if doc.version != ENCODED_VERSION {
        return Err(Error::Format(format!(
            "{}: encoded-sample version {} is not supported",
            path.display(),
            doc.version
        )));
    }
    let samples = doc
        .samples
        .into_iter()
        .map(|s| {
            if s.label >= doc.classes {
                return Err(Error::Format(format!("label {} outside {} classes", s.label, doc.classes)));
            }
            let spikes = s.spikes.into_iter().map(|(neuron, time)| InputSpike { neuron, time }).collect();
            EncodedSample::from_spikes(doc.inputs, spikes, s.label)
        })
        .collect::<Result<_>>()?;
    Ok(EncodedFile {
        inputs: doc.inputs,
        classes: doc.classes,
        encoder: doc.encoder,
        samples,
    })
}
