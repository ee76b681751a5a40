use std::io;
use std::net::TcpListener;
use std::path::PathBuf;

use clap::Args;
use newscap_core::gateway::{Endpoint, MockModel};
use newscap_core::ner::GazetteerTagger;

use super::{read_corpus, settings};
use crate::error::{input, CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct MockArgs {
    #[arg(long)]
    pub gazetteer: PathBuf,
    /// Corpus whose captions drive the yes/no answers.
    #[arg(long)]
    pub corpus: PathBuf,
    /// `tcp:<host:port>` or `unix:<path>`; standard streams when omitted.
    #[arg(long)]
    pub listen: Option<String>,
}

pub fn run(common: &Common, args: MockArgs) -> Result<()> {
    let mut s = settings(common)?;
    let corpus = read_corpus(&mut s, &args.corpus)?;
    let model = MockModel::with_corpus(GazetteerTagger::load(input(&args.gazetteer)?)?.without_rules(), &corpus);
    match args.listen.as_deref().map(str::parse::<Endpoint>).transpose()? {
        None => model.serve(io::stdin().lock(), io::stdout().lock())?,
        Some(Endpoint::Tcp(addr)) => {
            let listener = TcpListener::bind(&addr)?;
            eprintln!("listening on {}", listener.local_addr()?);
            model.serve_tcp(listener)?;
        }
        #[cfg(unix)]
        Some(Endpoint::Unix(path)) => {
            let listener = std::os::unix::net::UnixListener::bind(&path)?;
            eprintln!("listening on {}", path.display());
            std::thread::scope(|scope| -> io::Result<()> {
                for stream in listener.incoming() {
                    let stream = stream?;
                    let model = &model;
                    scope.spawn(move || {
                        let reader = io::BufReader::new(stream.try_clone()?);
                        model.serve(reader, stream)
                    });
                }
                Ok(())
            })?;
        }
        Some(other) => return Err(CliError::Usage(format!("cannot listen on {other}"))),
    }
    Ok(())
}
