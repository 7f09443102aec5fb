//! External-process backend speaking the PDX1 wire protocol.
//!
//! Frames are length-prefixed little-endian binary:
//!
//! - handshake (server → client on start): magic `PDX1`, then u32 num_classes
//! - request: u32 payload length; payload = u32 width, u32 height, then
//!   width×height×3 f32 samples, row-major interleaved RGB
//! - response: u32 payload length; payload = num_classes f32 probabilities
//!
//! Images travel at native resolution; any resizing is the model side's
//! responsibility. Calls are serialized over the single pipe pair and the
//! handle is poisoned after the first transport failure.

use std::io::{Read, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::imagery::RasterImage;

use super::{BackendKind, Classifier, ClassifierHandle};

const MAGIC: &[u8; 4] = b"PDX1";

struct Pipes {
    child: Child,
    stdin: ChildStdin,
    stdout: ChildStdout,
    poisoned: bool,
}

struct ExternalClassifier {
    num_classes: usize,
    pipes: Mutex<Pipes>,
}

/// Spawn `command` and complete the handshake, requiring the server to
/// announce exactly `num_classes` classes.
pub fn open_external(command: &[String], num_classes: usize) -> Result<ClassifierHandle> {
    let handle = open_external_announced(command)?;
    if handle.num_classes() != num_classes {
        return Err(Error::Protocol(format!(
            "handshake mismatch: server announced {} classes, expected {num_classes}",
            handle.num_classes()
        )));
    }
    Ok(handle)
}

/// Spawn `command` and accept whatever class count the server announces.
pub fn open_external_announced(command: &[String]) -> Result<ClassifierHandle> {
    let (program, args) = command
        .split_first()
        .ok_or_else(|| Error::invalid("empty external classifier command"))?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Backend(format!("failed to spawn '{program}': {e}")))?;
    let stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");

    let mut magic = [0u8; 4];
    stdout
        .read_exact(&mut magic)
        .map_err(|e| Error::Protocol(format!("handshake read failed: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Protocol(format!("bad handshake magic {magic:?}")));
    }
    let mut count = [0u8; 4];
    stdout
        .read_exact(&mut count)
        .map_err(|e| Error::Protocol(format!("handshake read failed: {e}")))?;
    let num_classes = u32::from_le_bytes(count) as usize;
    if num_classes == 0 {
        return Err(Error::Protocol("server announced zero classes".into()));
    }

    Ok(ClassifierHandle::new(
        BackendKind::External,
        Box::new(ExternalClassifier {
            num_classes,
            pipes: Mutex::new(Pipes { child, stdin, stdout, poisoned: false }),
        }),
    ))
}

impl Classifier for ExternalClassifier {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_raw(&self, image: &RasterImage) -> Result<Vec<f32>> {
        let mut pipes = self.pipes.lock().expect("external pipe lock");
        if pipes.poisoned {
            return Err(Error::Backend("external classifier handle is poisoned".into()));
        }
        match exchange(&mut pipes, image, self.num_classes) {
            Ok(probs) => Ok(probs),
            Err(e) => {
                pipes.poisoned = true;
                Err(e)
            }
        }
    }
}

fn exchange(pipes: &mut Pipes, image: &RasterImage, num_classes: usize) -> Result<Vec<f32>> {
    let transport = |e: std::io::Error| Error::Backend(format!("external classifier i/o: {e}"));

    let payload_len = 8 + image.data().len() * 4;
    let mut frame = Vec::with_capacity(4 + payload_len);
    frame.extend_from_slice(&(payload_len as u32).to_le_bytes());
    frame.extend_from_slice(&(image.width() as u32).to_le_bytes());
    frame.extend_from_slice(&(image.height() as u32).to_le_bytes());
    for v in image.data() {
        frame.extend_from_slice(&v.to_le_bytes());
    }
    pipes.stdin.write_all(&frame).map_err(transport)?;
    pipes.stdin.flush().map_err(transport)?;

    let mut len = [0u8; 4];
    pipes.stdout.read_exact(&mut len).map_err(transport)?;
    let len = u32::from_le_bytes(len) as usize;
    if len != num_classes * 4 {
        return Err(Error::Protocol(format!(
            "response length {len} does not match {num_classes} classes"
        )));
    }
    let mut bytes = vec![0u8; len];
    pipes.stdout.read_exact(&mut bytes).map_err(transport)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

impl Drop for ExternalClassifier {
    fn drop(&mut self) {
        if let Ok(mut pipes) = self.pipes.lock() {
            let _ = pipes.child.kill();
            let _ = pipes.child.wait();
        }
    }
}
