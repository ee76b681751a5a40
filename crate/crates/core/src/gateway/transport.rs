use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use super::{GatewayError, Transport};

/// Where the model lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// The built-in mock, in-process.
    Mock,
    /// A subprocess speaking the protocol on stdin/stdout.
    Command(Vec<String>),
    Tcp(String),
    Unix(PathBuf),
}

impl FromStr for Endpoint {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GatewayError::BadEndpoint(s.to_string());
        if s == "mock" {
            return Ok(Endpoint::Mock);
        }
        let (scheme, rest) = s.split_once(':').ok_or_else(bad)?;
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(bad());
        }
        match scheme {
            "cmd" => Ok(Endpoint::Command(rest.split_whitespace().map(String::from).collect())),
            "tcp" => Ok(Endpoint::Tcp(rest.to_string())),
            "unix" => Ok(Endpoint::Unix(PathBuf::from(rest))),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Mock => f.write_str("mock"),
            Endpoint::Command(argv) => write!(f, "cmd:{}", argv.join(" ")),
            Endpoint::Tcp(addr) => write!(f, "tcp:{addr}"),
            Endpoint::Unix(path) => write!(f, "unix:{}", path.display()),
        }
    }
}

impl Endpoint {
    /// Opens a connection to an external endpoint. The mock has no
    /// connection; build a [`super::MockTransport`] instead.
    pub fn connect(&self) -> Result<LineTransport, GatewayError> {
        match self {
            Endpoint::Mock => Err(GatewayError::BadEndpoint("mock has no external connection".into())),
            Endpoint::Command(argv) => LineTransport::spawn(argv),
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr)?;
                stream.set_nodelay(true)?;
                Ok(LineTransport::new(stream.try_clone()?, stream, None))
            }
            #[cfg(unix)]
            Endpoint::Unix(path) => {
                let stream = std::os::unix::net::UnixStream::connect(path)?;
                Ok(LineTransport::new(stream.try_clone()?, stream, None))
            }
            #[cfg(not(unix))]
            Endpoint::Unix(_) => Err(GatewayError::BadEndpoint("unix sockets are not supported here".into())),
        }
    }
}

/// Writes request lines and reads response lines on a background thread so
/// that reads can time out.
///
/// After a timeout the stream is out of step with the requests, so the
/// transport refuses further use.
pub struct LineTransport {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    poisoned: bool,
}

impl fmt::Debug for LineTransport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineTransport").field("child", &self.child.as_ref().map(Child::id)).field("poisoned", &self.poisoned).finish()
    }
}

impl LineTransport {
    pub fn new(reader: impl Read + Send + 'static, writer: impl Write + Send + 'static, child: Option<Child>) -> Self {
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        LineTransport { writer: Box::new(writer), lines: rx, child, poisoned: false }
    }

    pub fn spawn(argv: &[String]) -> Result<Self, GatewayError> {
        let (program, args) = argv.split_first().ok_or_else(|| GatewayError::BadEndpoint("empty command".into()))?;
        let mut child = Command::new(program).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::inherit()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(LineTransport::new(stdout, stdin, Some(child)))
    }
}

impl Transport for LineTransport {
    fn exchange(&mut self, request_id: &str, line: &str, timeout: Duration) -> Result<String, GatewayError> {
        if self.poisoned {
            return Err(GatewayError::Disconnected);
        }
        let sent = writeln!(self.writer, "{line}").and_then(|_| self.writer.flush());
        if let Err(e) = sent {
            self.poisoned = true;
            return Err(if e.kind() == std::io::ErrorKind::BrokenPipe { GatewayError::Disconnected } else { e.into() });
        }
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => {
                self.poisoned = true;
                Err(e.into())
            }
            Err(RecvTimeoutError::Timeout) => {
                self.poisoned = true;
                Err(GatewayError::Timeout { request_id: request_id.to_string(), after: timeout })
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.poisoned = true;
                Err(GatewayError::Disconnected)
            }
        }
    }
}

impl Drop for LineTransport {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_specs() {
        assert_eq!("mock".parse::<Endpoint>().unwrap(), Endpoint::Mock);
        assert_eq!("tcp:127.0.0.1:9000".parse::<Endpoint>().unwrap(), Endpoint::Tcp("127.0.0.1:9000".into()));
        assert_eq!("cmd:python3 model.py".parse::<Endpoint>().unwrap(), Endpoint::Command(vec!["python3".into(), "model.py".into()]));
        assert_eq!("unix:/tmp/m.sock".parse::<Endpoint>().unwrap().to_string(), "unix:/tmp/m.sock");
        assert!("ftp:x".parse::<Endpoint>().is_err());
        assert!("tcp:".parse::<Endpoint>().is_err());
    }

    #[cfg(unix)]
    #[test]
    fn subprocess_round_trip() {
        let mut t = LineTransport::spawn(&["cat".to_string()]).unwrap();
        assert_eq!(t.exchange("a", "hello", Duration::from_secs(5)).unwrap(), "hello");
        assert_eq!(t.exchange("b", "world", Duration::from_secs(5)).unwrap(), "world");
    }

    #[cfg(unix)]
    #[test]
    fn silent_subprocess_times_out_then_refuses() {
        let mut t = LineTransport::spawn(&["sleep".to_string(), "5".to_string()]).unwrap();
        let err = t.exchange("a", "hello", Duration::from_millis(100)).unwrap_err();
        assert!(matches!(err, GatewayError::Timeout { .. }));
        assert!(matches!(t.exchange("b", "hello", Duration::from_millis(100)), Err(GatewayError::Disconnected)));
    }

    #[cfg(unix)]
    #[test]
    fn exiting_subprocess_disconnects() {
        let mut t = LineTransport::spawn(&["true".to_string()]).unwrap();
        std::thread::sleep(Duration::from_millis(100));
        assert!(t.exchange("a", "hello", Duration::from_secs(5)).is_err());
    }
}
