//! Reference PDX1 classifier stub.
//!
//! Announces its class count, then answers every request frame with a fixed
//! probability vector. Useful as a loopback test peer and as a template for
//! wiring real models into the `external:` backend.
//!
//! Usage: pdx1-stub <p0> <p1> [...] [--exit-after N] [--wrong-length]

use std::io::{Read, Write};

fn main() {
    let mut probs: Vec<f32> = Vec::new();
    let mut exit_after: Option<u64> = None;
    let mut wrong_length = false;

    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--exit-after" => {
                let n = args.next().and_then(|s| s.parse().ok()).unwrap_or_else(|| {
                    eprintln!("pdx1-stub: --exit-after needs a count");
                    std::process::exit(2);
                });
                exit_after = Some(n);
            }
            "--wrong-length" => wrong_length = true,
            other => match other.parse::<f32>() {
                Ok(p) => probs.push(p),
                Err(_) => {
                    eprintln!("pdx1-stub: unexpected argument '{other}'");
                    std::process::exit(2);
                }
            },
        }
    }
    if probs.is_empty() {
        probs = vec![0.5, 0.5];
    }

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut input = stdin.lock();
    let mut output = stdout.lock();

    // handshake: magic + class count
    output.write_all(b"PDX1").unwrap();
    output.write_all(&(probs.len() as u32).to_le_bytes()).unwrap();
    output.flush().unwrap();

    let mut answered = 0u64;
    loop {
        let mut len = [0u8; 4];
        match input.read_exact(&mut len) {
            Ok(()) => {}
            Err(_) => return, // client closed the pipe
        }
        let len = u32::from_le_bytes(len) as usize;
        let mut payload = vec![0u8; len];
        if input.read_exact(&mut payload).is_err() {
            return;
        }
        if len < 8 {
            eprintln!("pdx1-stub: short payload");
            std::process::exit(1);
        }
        let w = u32::from_le_bytes([payload[0], payload[1], payload[2], payload[3]]) as usize;
        let h = u32::from_le_bytes([payload[4], payload[5], payload[6], payload[7]]) as usize;
        if len != 8 + w * h * 3 * 4 {
            eprintln!("pdx1-stub: payload does not match {w}x{h}x3 samples");
            std::process::exit(1);
        }

        let mut body = Vec::with_capacity(probs.len() * 4);
        for p in &probs {
            body.extend_from_slice(&p.to_le_bytes());
        }
        if wrong_length {
            body.extend_from_slice(&0.0f32.to_le_bytes());
        }
        output.write_all(&(body.len() as u32).to_le_bytes()).unwrap();
        output.write_all(&body).unwrap();
        output.flush().unwrap();

        answered += 1;
        if exit_after.is_some_and(|n| answered >= n) {
            return;
        }
    }
}
