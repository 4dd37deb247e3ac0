//! Paraphrase hooks used to derive the paraphrased-sentence query set.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Maps a sentence to a paraphrase. Failures are reported as text and the
/// query is skipped.
pub trait Paraphraser: Sync {
    fn paraphrase(&self, text: &str) -> Result<String, String>;
}

impl<F> Paraphraser for F
where
    F: Fn(&str) -> Result<String, String> + Sync,
{
    fn paraphrase(&self, text: &str) -> Result<String, String> {
        self(text)
    }
}

/// Returns its input unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityParaphraser;

impl Paraphraser for IdentityParaphraser {
    fn paraphrase(&self, text: &str) -> Result<String, String> {
        Ok(text.to_string())
    }
}

/// Runs an external program per sentence: text on stdin, paraphrase on
/// stdout. A non-zero exit status is a failure.
#[derive(Clone, Debug)]
pub struct CommandParaphraser {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandParaphraser {
    /// Splits a command line on whitespace; no shell quoting is interpreted.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(CommandParaphraser {
            program,
            args: parts.collect(),
        })
    }
}

impl Paraphraser for CommandParaphraser {
    fn paraphrase(&self, text: &str) -> Result<String, String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("cannot start {}: {e}", self.program))?;
        {
            let mut stdin = child.stdin.take().ok_or("stdin unavailable")?;
            stdin
                .write_all(text.as_bytes())
                .map_err(|e| format!("writing to {}: {e}", self.program))?;
        }
        let output = child
            .wait_with_output()
            .map_err(|e| format!("waiting for {}: {e}", self.program))?;
        if !output.status.success() {
            return Err(format!(
                "{} exited with {}: {}",
                self.program,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ));
        }
        String::from_utf8(output.stdout).map_err(|e| format!("non-UTF-8 output: {e}"))
    }
}

/// Applies the hook to every input with at most `concurrency` calls in
/// flight. Results come back in input order.
pub fn paraphrase_all<P: Paraphraser + ?Sized>(
    hook: &P,
    inputs: &[&str],
    concurrency: usize,
) -> Vec<Result<String, String>> {
    let slots: Vec<Mutex<Option<Result<String, String>>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = concurrency.max(1).min(inputs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= inputs.len() {
                    break;
                }
                let result = hook.paraphrase(inputs[i]);
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}
