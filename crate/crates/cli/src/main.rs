use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use gmt_lab_cli::{run, Analysis, Document, RunOptions, DIM_CAP_VAR};
use gmtlab::lp::Certificate;
use gmtlab::states::verify_certificate;

#[derive(Parser)]
#[command(name = "gmt-lab", version, about = "Exact analyses of finite measurement-theory fragments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses of a fragment document.
    Run {
        doc: PathBuf,
        /// Comma-separated analyses, replacing those listed in the document.
        #[arg(long, value_delimiter = ',')]
        analyses: Option<Vec<String>>,
        /// Override the document's bound.
        #[arg(long)]
        bound: Option<usize>,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the plain-text narrative.
        #[arg(long)]
        text: bool,
        /// Write the infeasibility certificate, if any, to this file.
        #[arg(long)]
        cert_out: Option<PathBuf>,
        /// Largest free dimension for polytope construction.
        #[arg(long, env = DIM_CAP_VAR, default_value_t = gmtlab::gpt::DEFAULT_DIMENSION_CAP)]
        dim_cap: usize,
    },
    /// Check a certificate against the fragment described by a document.
    VerifyCert {
        doc: PathBuf,
        cert: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
}

const SCHEMA_ERROR: u8 = 2;

fn read_doc(path: &PathBuf) -> anyhow::Result<Result<Document, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Document::parse(&text).map_err(|e| format!("{}: schema error {e}", path.display())))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> anyhow::Result<u8> {
    match Cli::parse().command {
        Command::Run {
            doc,
            analyses,
            bound,
            report,
            text,
            cert_out,
            dim_cap,
        } => {
            let document = match read_doc(&doc)? {
                Ok(d) => d,
                Err(msg) => {
                    eprintln!("{msg}");
                    return Ok(SCHEMA_ERROR);
                }
            };
            let analyses = match analyses {
                None => None,
                Some(names) => {
                    let mut out = Vec::new();
                    for n in names {
                        match Analysis::parse(n.trim()) {
                            Some(a) => out.push(a),
                            None => {
                                eprintln!("--analyses: unknown analysis `{n}`");
                                return Ok(SCHEMA_ERROR);
                            }
                        }
                    }
                    Some(out)
                }
            };
            let opts = RunOptions { analyses, bound, dim_cap };
            let rep = match run(&document, &opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: schema error {e}", doc.display());
                    return Ok(SCHEMA_ERROR);
                }
            };
            if let (Some(path), Some(cert)) = (&cert_out, &rep.certificate) {
                std::fs::write(path, cert).with_context(|| format!("writing {}", path.display()))?;
            }
            let json = serde_json::to_string_pretty(&rep)? + "\n";
            match &report {
                Some(path) => std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?,
                None if !text => print!("{json}"),
                None => {}
            }
            if text {
                print!("{}", rep.text());
            }
            Ok(rep.exit_code() as u8)
        }
        Command::VerifyCert { doc, cert, bound } => {
            let document = match read_doc(&doc)? {
                Ok(d) => d,
                Err(msg) => {
                    eprintln!("{msg}");
                    return Ok(SCHEMA_ERROR);
                }
            };
            let built = match document.build(bound) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("{}: schema error {e}", doc.display());
                    return Ok(SCHEMA_ERROR);
                }
            };
            let text = std::fs::read_to_string(&cert).with_context(|| format!("reading {}", cert.display()))?;
            let certificate = Certificate::parse(&text)?;
            if verify_certificate(&built.fragment, &certificate)? {
                println!("valid: the fragment has no probabilistic state");
                Ok(0)
            } else {
                bail!("certificate does not prove infeasibility")
            }
        }
    }
}
