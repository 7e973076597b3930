//! Plain-text room format.
//!
//! ```text
//! 5 3
//! wwdww
//! fEtff
//! wwwww
//! ```
//!
//! The header holds width and height, followed by one line per row. Tiles are
//! `f`loor, `w`all, `e`nemy, `t`reasure and `d`oor; an uppercase letter marks
//! a locked tile. Doors are never locked and must sit on the border.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::room::{Room, RoomError, TileKind};

impl Room {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width() + 1) * (self.height() + 1) + 6);
        out.push_str(&alloc::format!("{} {}\n", self.width(), self.height()));
        for (i, (&tile, &locked)) in self.tiles().iter().zip(self.locks()).enumerate() {
            let c = tile.symbol();
            out.push(if locked { c.to_ascii_uppercase() } else { c });
            if (i + 1) % self.width() == 0 {
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Room, RoomError> {
        let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines.next().unwrap_or("");
        let (width, height) = parse_header(header)?;

        let mut tiles = Vec::with_capacity(width * height);
        let mut locks = Vec::with_capacity(width * height);
        for row in 0..height {
            let line_no = row + 2;
            let line = lines.next().ok_or(RoomError::DimensionMismatch {
                line: line_no,
                expected: "more rows",
                found: row,
            })?;
            let chars = line.chars().count();
            if chars != width {
                return Err(RoomError::DimensionMismatch {
                    line: line_no,
                    expected: "a row of `width` tiles",
                    found: chars,
                });
            }
            for (col, c) in line.chars().enumerate() {
                let kind =
                    TileKind::from_symbol(c.to_ascii_lowercase()).ok_or(RoomError::Parse {
                        line: line_no,
                        column: col + 1,
                        message: "unknown tile symbol",
                    })?;
                let locked = c.is_ascii_uppercase();
                if kind == TileKind::Door {
                    if locked {
                        return Err(RoomError::Parse {
                            line: line_no,
                            column: col + 1,
                            message: "doors cannot be locked",
                        });
                    }
                    let border = row == 0 || col == 0 || row + 1 == height || col + 1 == width;
                    if !border {
                        return Err(RoomError::Parse {
                            line: line_no,
                            column: col + 1,
                            message: "door is not on the room border",
                        });
                    }
                }
                tiles.push(kind);
                locks.push(locked);
            }
        }
        for (extra, line) in lines.enumerate() {
            if !line.is_empty() {
                return Err(RoomError::DimensionMismatch {
                    line: height + 2 + extra,
                    expected: "no rows after the last one",
                    found: height + 1 + extra,
                });
            }
        }
        Room::from_tiles(width, height, tiles, locks)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize), RoomError> {
    let mut fields = Vec::new();
    let mut start = None;
    for (i, c) in header
        .char_indices()
        .chain(core::iter::once((header.len(), ' ')))
    {
        match (c == ' ', start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                fields.push((s, &header[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if fields.len() != 2 {
        return Err(RoomError::Parse {
            line: 1,
            column: fields.get(2).map_or(1, |f| f.0 + 1),
            message: "header must be `<width> <height>`",
        });
    }
    let number = |(col, field): (usize, &str)| {
        field.parse::<usize>().map_err(|_| RoomError::Parse {
            line: 1,
            column: col + 1,
            message: "expected a tile count",
        })
    };
    let width = number(fields[0])?;
    let height = number(fields[1])?;
    Room::new(width, height)?;
    Ok((width, height))
}

impl fmt::Display for Room {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Room {
    type Err = RoomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Room::parse(s)
    }
}
