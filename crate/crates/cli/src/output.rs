use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rcc_core::Graph;

use crate::error::{CliError, Result};

/// Writes a line to stdout. A closed pipe (`rcc ... | head`) ends output
/// quietly.
pub fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

/// Output directory of one command invocation.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file(&mut self, name: &str) -> Result<FileSink> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(FileSink {
            out: BufWriter::new(file),
            path,
        })
    }

    /// Writes `value` as pretty JSON followed by a newline.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut f = self.file(name)?;
        serde_json::to_writer_pretty(&mut f.out, value).map_err(rcc_core::Error::from)?;
        writeln!(f.out).map_err(|e| CliError::io(&f.path, e))?;
        f.finish()
    }

    /// Writes through `body`, attaching the path to any error.
    pub fn with<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> rcc_core::Result<()>,
    {
        let mut f = self.file(name)?;
        body(&mut f.out).map_err(|e| CliError::in_file(&f.path, e))?;
        f.finish()
    }

    /// Records the invocation; written last so it lists every file.
    pub fn manifest<T: Serialize>(mut self, command: &str, options: &T, seeds: Value) -> Result<()> {
        let mut files = std::mem::take(&mut self.files);
        files.push("manifest.json".into());
        let manifest = Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            options: serde_json::to_value(options).expect("options serialize"),
            seeds,
            files,
        };
        self.json("manifest.json", &manifest)
    }
}

pub struct FileSink {
    pub out: BufWriter<File>,
    pub path: PathBuf,
}

impl FileSink {
    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub options: Value,
    pub seeds: Value,
    pub files: Vec<String>,
}

pub fn read_graph(path: &Path, multigraph: bool) -> Result<Graph> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = BufReader::new(file);
    let g = if multigraph {
        rcc_core::Multigraph::read_edge_list(reader).map(|m| m.collapse())
    } else {
        Graph::read_edge_list(reader)
    };
    g.map_err(|e| CliError::in_file(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub(crate) fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}
