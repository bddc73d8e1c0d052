use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};
use softsheaf::report::Check;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

/// Streams checks and informational records in the chosen format, and
/// remembers whether every check passed.
pub struct Output {
    format: Format,
    sink: Box<dyn Write>,
    failed: usize,
    checks: usize,
}

impl Output {
    pub fn new(format: Format, out: Option<&Path>) -> io::Result<Self> {
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Output { format, sink, failed: 0, checks: 0 })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn check(&mut self, c: &Check) -> io::Result<()> {
        self.checks += 1;
        if !c.pass {
            self.failed += 1;
        }
        match self.format {
            Format::Text => writeln!(self.sink, "{}", c.to_text()),
            Format::Json => writeln!(self.sink, "{}", serde_json::to_string(c).expect("plain struct")),
            Format::Dot => writeln!(self.sink, "// {}", c.to_text()),
        }
    }

    pub fn checks(&mut self, cs: &[Check]) -> io::Result<()> {
        cs.iter().try_for_each(|c| self.check(c))
    }

    /// A named fact about the instance, printed before its checks.
    pub fn info(&mut self, key: &str, value: Value) -> io::Result<()> {
        match self.format {
            Format::Text => match &value {
                Value::String(s) => writeln!(self.sink, "{key}: {s}"),
                v => writeln!(self.sink, "{key}: {v}"),
            },
            Format::Json => writeln!(self.sink, "{}", json!({ "info": key, "value": value })),
            Format::Dot => Ok(()),
        }
    }

    /// Raw DOT text, emitted only in DOT mode.
    pub fn dot(&mut self, text: &str) -> io::Result<()> {
        if self.format == Format::Dot {
            self.sink.write_all(text.as_bytes())?;
        }
        Ok(())
    }

    /// Flushes and returns whether every check passed.
    pub fn finish(mut self) -> io::Result<bool> {
        if self.format == Format::Text && self.checks > 0 {
            writeln!(self.sink, "{} checks, {} failed", self.checks, self.failed)?;
        }
        self.sink.flush()?;
        Ok(self.failed == 0)
    }
}
