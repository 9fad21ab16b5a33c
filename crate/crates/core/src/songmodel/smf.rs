//! Minimal Standard MIDI File reader and writer. Only what the song model
//! needs survives parsing: note on/off, tempo and time signature.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    NoteOn { channel: u8, key: u8, velocity: u8 },
    NoteOff { channel: u8, key: u8 },
    /// Microseconds per quarter note.
    Tempo(u32),
    TimeSignature { numerator: u8, denominator_pow2: u8 },
    TrackName,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Event {
    /// Absolute tick.
    pub tick: u64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Smf {
    pub format: u16,
    pub ticks_per_quarter: u16,
    pub tracks: Vec<Vec<Event>>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Midi(msg.into())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> Result<u8> {
        let b = *self.data.get(self.pos).ok_or_else(|| err("unexpected end of data"))?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(err("unexpected end of data"));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32> {
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(err("variable-length quantity longer than 4 bytes"))
    }
}

pub fn read(bytes: &[u8]) -> Result<Smf> {
    let mut c = Cursor { data: bytes, pos: 0 };
    if c.take(4)? != b"MThd" {
        return Err(err("missing MThd header"));
    }
    let header_len = c.u32()? as usize;
    if header_len < 6 {
        return Err(err("short MThd header"));
    }
    let format = c.u16()?;
    let ntracks = c.u16()?;
    let division = c.u16()?;
    c.take(header_len - 6)?;
    if division & 0x8000 != 0 {
        return Err(err("SMPTE time division is not supported"));
    }
    if division == 0 {
        return Err(err("zero ticks per quarter note"));
    }

    let mut tracks = Vec::with_capacity(ntracks as usize);
    while tracks.len() < ntracks as usize {
        let id = c.take(4)?;
        let len = c.u32()? as usize;
        let body = c.take(len)?;
        if id == b"MTrk" {
            tracks.push(read_track(body)?);
        }
    }
    Ok(Smf {
        format,
        ticks_per_quarter: division,
        tracks,
    })
}

fn read_track(body: &[u8]) -> Result<Vec<Event>> {
    let mut c = Cursor { data: body, pos: 0 };
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    let mut events = Vec::new();
    while c.pos < body.len() {
        tick += c.vlq()? as u64;
        let mut status = c.u8()?;
        let first_data = if status < 0x80 {
            let s = running.ok_or_else(|| err("running status without a previous status"))?;
            let d = status;
            status = s;
            Some(d)
        } else {
            None
        };
        let kind = match status {
            0xff => {
                let ty = c.u8()?;
                let len = c.vlq()? as usize;
                let data = c.take(len)?;
                match ty {
                    0x2f => {
                        events.push(Event { tick, kind: EventKind::Other });
                        break;
                    }
                    0x51 if len == 3 => EventKind::Tempo(
                        (data[0] as u32) << 16 | (data[1] as u32) << 8 | data[2] as u32,
                    ),
                    0x58 if len >= 2 => EventKind::TimeSignature {
                        numerator: data[0],
                        denominator_pow2: data[1],
                    },
                    0x03 => EventKind::TrackName,
                    _ => EventKind::Other,
                }
            }
            0xf0 | 0xf7 => {
                let len = c.vlq()? as usize;
                c.take(len)?;
                EventKind::Other
            }
            0x80..=0xef => {
                running = Some(status);
                let d1 = match first_data {
                    Some(d) => d,
                    None => c.u8()?,
                };
                let channel = status & 0x0f;
                match status & 0xf0 {
                    0x80 => {
                        c.u8()?;
                        EventKind::NoteOff { channel, key: d1 }
                    }
                    0x90 => {
                        let velocity = c.u8()?;
                        if velocity == 0 {
                            EventKind::NoteOff { channel, key: d1 }
                        } else {
                            EventKind::NoteOn { channel, key: d1, velocity }
                        }
                    }
                    0xc0 | 0xd0 => EventKind::Other,
                    _ => {
                        c.u8()?;
                        EventKind::Other
                    }
                }
            }
            other => return Err(err(format!("unsupported status byte {other:#04x}"))),
        };
        events.push(Event { tick, kind });
    }
    Ok(events)
}

fn write_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 4];
    let mut n = 0;
    loop {
        buf[n] = (value & 0x7f) as u8;
        n += 1;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        out.push(if i > 0 { buf[i] | 0x80 } else { buf[i] });
    }
}

/// A track to write: a name plus events, which must be sorted by tick.
pub struct TrackOut<'a> {
    pub name: &'a str,
    pub events: Vec<Event>,
}

pub fn write(ticks_per_quarter: u16, tracks: &[TrackOut<'_>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&(tracks.len() as u16).to_be_bytes());
    out.extend_from_slice(&ticks_per_quarter.to_be_bytes());
    for t in tracks {
        let mut body = Vec::new();
        write_vlq(&mut body, 0);
        body.extend_from_slice(&[0xff, 0x03]);
        write_vlq(&mut body, t.name.len() as u32);
        body.extend_from_slice(t.name.as_bytes());
        let mut last = 0u64;
        for e in &t.events {
            debug_assert!(e.tick >= last);
            write_vlq(&mut body, (e.tick - last) as u32);
            last = e.tick;
            match e.kind {
                EventKind::NoteOn { channel, key, velocity } => {
                    body.extend_from_slice(&[0x90 | channel, key, velocity])
                }
                EventKind::NoteOff { channel, key } => {
                    body.extend_from_slice(&[0x80 | channel, key, 0])
                }
                EventKind::Tempo(us) => body.extend_from_slice(&[
                    0xff,
                    0x51,
                    0x03,
                    (us >> 16) as u8,
                    (us >> 8) as u8,
                    us as u8,
                ]),
                EventKind::TimeSignature {
                    numerator,
                    denominator_pow2,
                } => body.extend_from_slice(&[0xff, 0x58, 0x04, numerator, denominator_pow2, 24, 8]),
                EventKind::TrackName | EventKind::Other => {}
            }
        }
        write_vlq(&mut body, 0);
        body.extend_from_slice(&[0xff, 0x2f, 0x00]);
        out.extend_from_slice(b"MTrk");
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vlq_encoding() {
        let cases: [(u32, &[u8]); 5] = [
            (0, &[0x00]),
            (0x7f, &[0x7f]),
            (0x80, &[0x81, 0x00]),
            (0x2000, &[0xc0, 0x00]),
            (0x0fff_ffff, &[0xff, 0xff, 0xff, 0x7f]),
        ];
        for (v, bytes) in cases {
            let mut out = Vec::new();
            write_vlq(&mut out, v);
            assert_eq!(out, bytes);
            let mut c = Cursor { data: bytes, pos: 0 };
            assert_eq!(c.vlq().unwrap(), v);
        }
    }

    #[test]
    fn running_status_and_zero_velocity_note_off() {
        // delta 0: note on 60; delta 96: (running) 60 vel 0; end of track
        let body = [0x00, 0x90, 60, 100, 0x60, 60, 0, 0x00, 0xff, 0x2f, 0x00];
        let events = read_track(&body).unwrap();
        assert_eq!(
            events[0].kind,
            EventKind::NoteOn { channel: 0, key: 60, velocity: 100 }
        );
        assert_eq!(events[1].tick, 96);
        assert_eq!(events[1].kind, EventKind::NoteOff { channel: 0, key: 60 });
    }

    #[test]
    fn rejects_garbage() {
        assert!(read(b"RIFF....").is_err());
        assert!(read(b"MThd\x00\x00\x00\x06\x00\x01\x00\x01\xe7\x28").is_err());
    }
}
