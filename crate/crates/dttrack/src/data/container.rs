//! The on-disk sequence container.
//!
//! Layout of a `.seq` file:
//!   magic "DTSQ1"
//!   u32 LE frame count, u32 LE height, u32 LE width
//!   frames as raw 8-bit RGB, row-major
//!   CSV block: header `frame,cx,cy,w,h,visible`, one row per frame,
//!   boxes in canvas-normalized units, floats in shortest round-trip form.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::loss::NormBox;

use super::generate::Sequence;

const MAGIC: &[u8; 5] = b"DTSQ1";

pub fn write_sequence(seq: &Sequence, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(seq.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(seq.canvas as u32).to_le_bytes());
    bytes.extend_from_slice(&(seq.canvas as u32).to_le_bytes());
    for frame in &seq.frames {
        bytes.extend_from_slice(frame);
    }
    bytes.extend_from_slice(b"frame,cx,cy,w,h,visible\n");
    for (i, (b, v)) in seq.boxes.iter().zip(&seq.visible).enumerate() {
        bytes.extend_from_slice(
            format!(
                "{i},{},{},{},{},{}\n",
                b.cx,
                b.cy,
                b.w,
                b.h,
                if *v { 1 } else { 0 }
            )
            .as_bytes(),
        );
    }
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_sequence(path: &Path) -> Result<Sequence> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let fail = |msg: &str| Error::Integrity(format!("{}: {msg}", path.display()));

    if bytes.len() < 17 || &bytes[..5] != MAGIC {
        return Err(fail("missing DTSQ1 magic"));
    }
    let u32_at = |off: usize| {
        u32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]]) as usize
    };
    let count = u32_at(5);
    let h = u32_at(9);
    let w = u32_at(13);
    if h != w {
        return Err(fail("canvas must be square"));
    }
    let frame_len = h * w * 3;
    let frames_end = 17 + count * frame_len;
    if bytes.len() < frames_end {
        return Err(fail("truncated frame data"));
    }
    let frames: Vec<Vec<u8>> = (0..count)
        .map(|i| bytes[17 + i * frame_len..17 + (i + 1) * frame_len].to_vec())
        .collect();

    let csv = std::str::from_utf8(&bytes[frames_end..]).map_err(|_| fail("csv block not utf-8"))?;
    let mut lines = csv.lines();
    match lines.next() {
        Some("frame,cx,cy,w,h,visible") => {}
        _ => return Err(fail("missing csv header")),
    }
    let mut boxes = Vec::with_capacity(count);
    let mut visible = Vec::with_capacity(count);
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(fail("csv row must have 6 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| fail("bad float in csv"));
        boxes.push(NormBox {
            cx: num(fields[1])?,
            cy: num(fields[2])?,
            w: num(fields[3])?,
            h: num(fields[4])?,
        });
        visible.push(fields[5] == "1");
    }
    if boxes.len() != count {
        return Err(fail("csv row count does not match frame count"));
    }

    Ok(Sequence {
        canvas: h,
        frames,
        boxes,
        visible,
        occluders: vec![None; count],
    })
}
