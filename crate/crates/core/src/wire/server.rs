//! Unix-domain socket endpoint for the monitor.

use std::io::{self, Read, Write};
use std::os::unix::fs::FileTypeExt;
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use super::event::{decode_event, encode_outcome};
use super::framing::FrameSplitter;
use crate::runtime::engine::{Inbound, OutcomeSink};
use crate::runtime::Outcome;

pub const DEFAULT_SOCKET: &str = "/tmp/rips.sock";

/// Decoded events waiting for the loop. Reads stall when it is full.
pub const QUEUE_CAPACITY: usize = 1024;

type Writer = Arc<Mutex<Option<UnixStream>>>;

/// Listens for one monitor at a time. Dropping the server stops accepting,
/// closes the active connection and removes the socket file.
#[derive(Debug)]
pub struct SocketServer {
    path: PathBuf,
    stop: Arc<AtomicBool>,
    writer: Writer,
    acceptor: Option<JoinHandle<()>>,
}

impl SocketServer {
    /// Bind `path` and start accepting. A stale socket file left by a dead
    /// engine is replaced; a live one is an error.
    pub fn bind(path: &Path) -> io::Result<(Self, Receiver<Inbound>)> {
        if let Ok(meta) = std::fs::symlink_metadata(path) {
            if !meta.file_type().is_socket() {
                return Err(io::Error::new(
                    io::ErrorKind::AlreadyExists,
                    format!("{} exists and is not a socket", path.display()),
                ));
            }
            if UnixStream::connect(path).is_ok() {
                return Err(io::Error::new(
                    io::ErrorKind::AddrInUse,
                    format!("another engine is listening on {}", path.display()),
                ));
            }
            std::fs::remove_file(path)?;
        }
        let listener = UnixListener::bind(path)?;
        let (tx, rx) = sync_channel(QUEUE_CAPACITY);
        let stop = Arc::new(AtomicBool::new(false));
        let writer: Writer = Arc::new(Mutex::new(None));
        let acceptor = {
            let stop = Arc::clone(&stop);
            let writer = Arc::clone(&writer);
            std::thread::Builder::new()
                .name("rips-accept".into())
                .spawn(move || accept_loop(listener, tx, stop, writer))?
        };
        tracing::info!(path = %path.display(), "listening for the monitor");
        Ok((
            Self {
                path: path.to_path_buf(),
                stop,
                writer,
                acceptor: Some(acceptor),
            },
            rx,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// A sink writing outcomes to whichever monitor is connected.
    pub fn sink(&self) -> SocketSink {
        SocketSink {
            writer: Arc::clone(&self.writer),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.writer.lock().map(|w| w.is_some()).unwrap_or(false)
    }

    pub fn shutdown(&mut self) {
        if self.stop.swap(true, Ordering::SeqCst) {
            return;
        }
        if let Ok(mut w) = self.writer.lock() {
            if let Some(s) = w.take() {
                let _ = s.shutdown(std::net::Shutdown::Both);
            }
        }
        // Wake the acceptor so it observes the stop flag.
        let _ = UnixStream::connect(&self.path);
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
        let _ = std::fs::remove_file(&self.path);
    }
}

impl Drop for SocketServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn accept_loop(listener: UnixListener, tx: SyncSender<Inbound>, stop: Arc<AtomicBool>, writer: Writer) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let conn = match conn {
            Ok(c) => c,
            Err(e) => {
                tracing::warn!("accept failed: {e}");
                continue;
            }
        };
        let mut slot = match writer.lock() {
            Ok(s) => s,
            Err(_) => break,
        };
        if slot.is_some() {
            tracing::warn!("rejecting a second monitor connection");
            let _ = conn.shutdown(std::net::Shutdown::Both);
            continue;
        }
        let write_half = match conn.try_clone() {
            Ok(w) => w,
            Err(e) => {
                tracing::warn!("cannot clone monitor connection: {e}");
                continue;
            }
        };
        *slot = Some(write_half);
        drop(slot);
        tracing::info!("monitor connected");
        let tx = tx.clone();
        let writer = Arc::clone(&writer);
        let spawned = std::thread::Builder::new()
            .name("rips-read".into())
            .spawn(move || {
                read_connection(conn, &tx);
                if let Ok(mut w) = writer.lock() {
                    *w = None;
                }
                tracing::info!("monitor disconnected");
            });
        if let Err(e) = spawned {
            tracing::error!("cannot start reader thread: {e}");
        }
    }
}

fn read_connection(mut conn: UnixStream, tx: &SyncSender<Inbound>) {
    let mut splitter = FrameSplitter::new();
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        let n = match conn.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => {
                tracing::warn!("monitor read failed: {e}");
                break;
            }
        };
        for frame in splitter.push(&buf[..n]) {
            let item = match frame {
                Ok(doc) => match decode_event(&doc) {
                    Ok(ev) => Inbound::Event(Box::new(ev)),
                    Err(e) => Inbound::Malformed(e.to_string()),
                },
                Err(e) => Inbound::Malformed(format!("document is not UTF-8: {e}")),
            };
            if tx.send(item).is_err() {
                return;
            }
        }
    }
    if splitter.finish() {
        tracing::warn!("discarding a partial document at disconnect");
    }
}

#[derive(Debug, Clone)]
pub struct SocketSink {
    writer: Writer,
}

impl OutcomeSink for SocketSink {
    fn emit(&mut self, o: &Outcome) -> bool {
        let doc = encode_outcome(o);
        let Ok(mut w) = self.writer.lock() else {
            return false;
        };
        let Some(stream) = w.as_mut() else {
            return false;
        };
        match stream.write_all(doc.as_bytes()) {
            Ok(()) => true,
            Err(e) => {
                tracing::warn!("monitor write failed: {e}");
                *w = None;
                false
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::event::decode_outcome;
    use std::io::BufRead;
    use std::time::Duration;

    #[test]
    fn events_in_order_outcomes_back_and_reconnect() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.sock");
        let (server, rx) = SocketServer::bind(&path).unwrap();
        let mut sink = server.sink();
        for round in 0..2 {
            let mut c = UnixStream::connect(&path).unwrap();
            c.write_all(b"---\nevent: graph\ncontext: {}\n...\n---\nevent: bogus\ncontext: {}\n...\n")
                .unwrap();
            let a = rx.recv_timeout(Duration::from_secs(5)).unwrap();
            let b = rx.recv_timeout(Duration::from_secs(5)).unwrap();
            assert!(matches!(a, Inbound::Event(_)), "round {round}");
            assert!(matches!(b, Inbound::Malformed(_)));
            // A second monitor is turned away while the first is connected.
            let mut other = UnixStream::connect(&path).unwrap();
            other.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
            let mut byte = [0u8; 1];
            assert_eq!(other.read(&mut byte).unwrap_or(0), 0);
            assert!(sink.emit(&Outcome::alert("hi", 5)));
            let mut reader = std::io::BufReader::new(c.try_clone().unwrap());
            let mut doc = String::new();
            while !doc.ends_with("...\n") {
                reader.read_line(&mut doc).unwrap();
            }
            assert_eq!(decode_outcome(&doc).unwrap(), Outcome::alert("hi", 5));
            drop(reader);
            drop(c);
            let deadline = std::time::Instant::now() + Duration::from_secs(5);
            while server.is_connected() && std::time::Instant::now() < deadline {
                std::thread::sleep(Duration::from_millis(5));
            }
        }
        drop(server);
        assert!(!path.exists());
    }

    #[test]
    fn live_socket_is_not_stolen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.sock");
        let (_server, _rx) = SocketServer::bind(&path).unwrap();
        assert_eq!(SocketServer::bind(&path).unwrap_err().kind(), io::ErrorKind::AddrInUse);
    }
}
