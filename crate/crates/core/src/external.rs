//! Sampler backed by a child process speaking a line protocol.
//!
//! The client writes `SAMPLE <n> <d>` and reads back `n` lines of `d`
//! space-separated decimals. One child serves every batch of a run.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::rng::SeededRng;
use crate::sampler::SamplerOracle;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Environment variable through which the child learns the run seed.
pub const SEED_ENV: &str = "DATACOPY_SAMPLER_SEED";

pub struct ExternalSampler {
    command: String,
    dim: usize,
    timeout: Duration,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl ExternalSampler {
    /// Spawns `command` through `sh -c`.
    pub fn spawn(command: &str, dim: usize, timeout: Duration, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("sampler dimension must be >= 1"));
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .env(SEED_ENV, seed.to_string())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Sampler(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            command: command.to_string(),
            dim,
            timeout,
            child,
            stdin,
            lines: rx,
        })
    }

    fn request(&mut self, count: usize) -> Result<PointSet> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Sampler("sampler input already closed".into()))?;
        writeln!(stdin, "SAMPLE {count} {}", self.dim)
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Protocol {
                line: 0,
                message: format!("cannot write request: {e}"),
            })?;
        let deadline = Instant::now() + self.timeout;
        let mut coords = Vec::with_capacity(count * self.dim);
        for line_no in 1..=count {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(left) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => {
                    return Err(Error::Protocol {
                        line: line_no,
                        message: format!("read failed: {e}"),
                    })
                }
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Sampler(format!(
                        "timed out after {:?} waiting for line {line_no} of {count}",
                        self.timeout
                    )))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Protocol {
                        line: line_no,
                        message: format!("sampler exited after {} of {count} lines", line_no - 1),
                    })
                }
            };
            let before = coords.len();
            for field in line.split_whitespace() {
                let v: f64 = field.parse().map_err(|_| Error::Protocol {
                    line: line_no,
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Protocol {
                        line: line_no,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                coords.push(v);
            }
            let arity = coords.len() - before;
            if arity != self.dim {
                return Err(Error::Protocol {
                    line: line_no,
                    message: format!("expected {} values, found {arity}", self.dim),
                });
            }
        }
        PointSet::new(self.dim, coords)
    }
}

impl SamplerOracle for ExternalSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&mut self, count: usize, _rng: &mut SeededRng) -> Result<PointSet> {
        if count == 0 {
            return PointSet::empty(self.dim);
        }
        self.request(count)
    }

    fn describe(&self) -> String {
        format!("command:{}", self.command)
    }
}

impl Drop for ExternalSampler {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
