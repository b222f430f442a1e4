//! Framed TCP transport between a user and a dataset-holding server.
//!
//! A frame is `len u32 LE | kind u8 | payload`, with `len = payload + 1`.
//! A session opens with the client's HELLO `(p u64, m u16, K u32)`; the server
//! echoes it back when it matches the dataset, or sends ERROR code 1 and
//! closes. After that the client may send any number of QUERY frames, each
//! carrying only `rows u32 | cols u32 | G row-major`, and gets one ANSWER
//! (`n u32 | n*m elements`) or ERROR (`code u16 | utf8`) per query.

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use crate::codec::{put_matrix_body, put_messages, read_matrix_body, read_messages, Reader};
use crate::error::{Error, Result};
use crate::ff::{Dataset, PrimeField};
use crate::protocol::{server_answer, Answer, Query};

/// Upper bound on a single frame, to refuse absurd length prefixes.
pub const MAX_FRAME: u32 = 1 << 30;

pub const ERR_HELLO_MISMATCH: u16 = 1;
pub const ERR_MALFORMED: u16 = 2;
pub const ERR_QUERY_MISMATCH: u16 = 3;
pub const ERR_UNEXPECTED: u16 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameKind {
    Query = 0x01,
    Answer = 0x02,
    Error = 0x03,
    Hello = 0x04,
}

impl TryFrom<u8> for FrameKind {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        Ok(match b {
            0x01 => FrameKind::Query,
            0x02 => FrameKind::Answer,
            0x03 => FrameKind::Error,
            0x04 => FrameKind::Hello,
            _ => return Err(Error::Malformed(format!("unknown frame kind {b:#04x}"))),
        })
    }
}

pub fn write_frame<W: Write>(w: &mut W, kind: FrameKind, payload: &[u8]) -> Result<()> {
    let len = u32::try_from(payload.len() + 1)
        .ok()
        .filter(|&l| l <= MAX_FRAME)
        .ok_or_else(|| Error::ParamInvalid(format!("frame payload of {} bytes", payload.len())))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(&[kind as u8])?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// `Ok(None)` on a clean EOF before the length prefix.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<(FrameKind, Vec<u8>)>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len);
    if len == 0 || len > MAX_FRAME {
        return Err(Error::Malformed(format!("frame length {len}")));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Malformed("truncated frame".into()),
        _ => e.into(),
    })?;
    let kind = FrameKind::try_from(body[0])?;
    body.remove(0);
    Ok(Some((kind, body)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hello {
    pub p: u64,
    pub m: u16,
    pub k: u32,
}

impl Hello {
    pub fn for_dataset(data: &Dataset) -> Result<Hello> {
        Ok(Hello {
            p: data.field().modulus(),
            m: u16::try_from(data.m()).map_err(|_| Error::ParamInvalid("m too large".into()))?,
            k: u32::try_from(data.k()).map_err(|_| Error::ParamInvalid("K too large".into()))?,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(14);
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Hello> {
        let mut r = Reader::new(payload);
        let hello = Hello {
            p: r.u64()?,
            m: r.u16()?,
            k: r.u32()?,
        };
        r.finish()?;
        Ok(hello)
    }
}

pub fn encode_query_payload(query: &Query) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + 8 * query.generator.entries().len());
    put_matrix_body(&mut out, &query.generator)?;
    Ok(out)
}

pub fn decode_query_payload(field: PrimeField, payload: &[u8]) -> Result<Query> {
    let mut r = Reader::new(payload);
    let generator = read_matrix_body(&mut r, field)?;
    r.finish()?;
    Ok(Query { generator })
}

pub fn encode_answer_payload(answer: &Answer) -> Result<Vec<u8>> {
    let n = u32::try_from(answer.len()).map_err(|_| Error::ParamInvalid("answer too long".into()))?;
    let mut out = Vec::new();
    out.extend_from_slice(&n.to_le_bytes());
    put_messages(&mut out, &answer.entries);
    Ok(out)
}

pub fn decode_answer_payload(field: PrimeField, m: usize, payload: &[u8]) -> Result<Answer> {
    let mut r = Reader::new(payload);
    let n = r.u32()? as usize;
    let entries = read_messages(&mut r, field, m, n)?;
    r.finish()?;
    Ok(Answer { entries })
}

fn error_payload(code: u16, message: &str) -> Vec<u8> {
    let mut out = code.to_le_bytes().to_vec();
    out.extend_from_slice(message.as_bytes());
    out
}

fn decode_error_payload(payload: &[u8]) -> Error {
    if payload.len() < 2 {
        return Error::Malformed("short error frame".into());
    }
    let code = u16::from_le_bytes([payload[0], payload[1]]);
    Error::Remote {
        code,
        message: String::from_utf8_lossy(&payload[2..]).into_owned(),
    }
}

/// Runs one session to completion. The only inputs are the frames received and
/// the read-only dataset.
pub fn handle_connection(stream: TcpStream, data: &Dataset) -> Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let ours = Hello::for_dataset(data)?;

    let Some((kind, payload)) = read_frame(&mut reader)? else {
        return Ok(());
    };
    if kind != FrameKind::Hello {
        write_frame(
            &mut writer,
            FrameKind::Error,
            &error_payload(ERR_UNEXPECTED, "expected HELLO"),
        )?;
        return Ok(());
    }
    match Hello::decode(&payload) {
        Ok(theirs) if theirs == ours => write_frame(&mut writer, FrameKind::Hello, &ours.encode())?,
        Ok(theirs) => {
            let msg = format!(
                "server has p={} m={} K={}, client sent p={} m={} K={}",
                ours.p, ours.m, ours.k, theirs.p, theirs.m, theirs.k
            );
            write_frame(&mut writer, FrameKind::Error, &error_payload(ERR_HELLO_MISMATCH, &msg))?;
            return Ok(());
        }
        Err(e) => {
            write_frame(
                &mut writer,
                FrameKind::Error,
                &error_payload(ERR_MALFORMED, &e.to_string()),
            )?;
            return Ok(());
        }
    }

    loop {
        let frame = match read_frame(&mut reader) {
            Ok(Some(f)) => f,
            Ok(None) => return Ok(()),
            Err(e) => {
                let _ = write_frame(
                    &mut writer,
                    FrameKind::Error,
                    &error_payload(ERR_MALFORMED, &e.to_string()),
                );
                return Err(e);
            }
        };
        match frame {
            (FrameKind::Query, payload) => {
                let reply = decode_query_payload(data.field(), &payload)
                    .map_err(|e| (ERR_MALFORMED, e))
                    .and_then(|q| server_answer(&q, data).map_err(|e| (ERR_QUERY_MISMATCH, e)))
                    .and_then(|a| encode_answer_payload(&a).map_err(|e| (ERR_QUERY_MISMATCH, e)));
                match reply {
                    Ok(bytes) => write_frame(&mut writer, FrameKind::Answer, &bytes)?,
                    Err((code, e)) => write_frame(&mut writer, FrameKind::Error, &error_payload(code, &e.to_string()))?,
                }
            }
            (kind, _) => {
                let msg = format!("unexpected {kind:?} frame");
                write_frame(&mut writer, FrameKind::Error, &error_payload(ERR_UNEXPECTED, &msg))?;
                return Ok(());
            }
        }
    }
}

pub struct Server {
    listener: TcpListener,
    data: Arc<Dataset>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, data: Dataset) -> Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            data: Arc::new(data),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts forever, one thread per connection.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(_) => continue,
            };
            let data = Arc::clone(&self.data);
            thread::spawn(move || {
                let _ = handle_connection(stream, &data);
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread and returns its address.
    pub fn spawn(self) -> Result<SocketAddr> {
        let addr = self.local_addr()?;
        thread::spawn(move || self.run());
        Ok(addr)
    }
}

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    field: PrimeField,
    m: usize,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A, field: PrimeField, m: usize, k: usize) -> Result<Client> {
        let stream = TcpStream::connect(addr)?;
        let mut client = Client {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
            field,
            m,
        };
        let hello = Hello {
            p: field.modulus(),
            m: u16::try_from(m).map_err(|_| Error::ParamInvalid("m too large".into()))?,
            k: u32::try_from(k).map_err(|_| Error::ParamInvalid("K too large".into()))?,
        };
        write_frame(&mut client.writer, FrameKind::Hello, &hello.encode())?;
        match client.expect_reply()? {
            (FrameKind::Hello, payload) if Hello::decode(&payload)? == hello => Ok(client),
            (kind, _) => Err(Error::Malformed(format!("expected HELLO reply, got {kind:?}"))),
        }
    }

    fn expect_reply(&mut self) -> Result<(FrameKind, Vec<u8>)> {
        match read_frame(&mut self.reader)? {
            None => Err(Error::Malformed("server closed the connection".into())),
            Some((FrameKind::Error, payload)) => Err(decode_error_payload(&payload)),
            Some(frame) => Ok(frame),
        }
    }

    pub fn fetch(&mut self, query: &Query) -> Result<Answer> {
        write_frame(&mut self.writer, FrameKind::Query, &encode_query_payload(query)?)?;
        match self.expect_reply()? {
            (FrameKind::Answer, payload) => decode_answer_payload(self.field, self.m, &payload),
            (kind, _) => Err(Error::Malformed(format!("expected ANSWER, got {kind:?}"))),
        }
    }
}

/// One-shot connect, HELLO, QUERY, ANSWER.
pub fn fetch<A: ToSocketAddrs>(addr: A, m: usize, query: &Query) -> Result<Answer> {
    let g = &query.generator;
    Client::connect(addr, g.field(), m, g.cols())?.fetch(query)
}
