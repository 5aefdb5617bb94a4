//! Reading and writing portable graymap (PGM) images.
//!
//! Both the ASCII (`P2`) and binary (`P5`) encodings are read; writing
//! always produces `P5`. Only 8-bit images (`maxval ≤ 255`) are supported,
//! and pixel values are stored exactly as they appear in the file — no
//! rescaling to the maxval. `#` comments are honored anywhere in the header,
//! and parse failures point at the offending line.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::profile::raster::Raster;

/// Header tokenizer that tracks line numbers for error reporting.
struct Scanner<'a> {
    bytes: &'a [u8],
    position: usize,
    line: usize,
}

impl<'a> Scanner<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Scanner {
            bytes,
            position: 0,
            line: 1,
        }
    }

    fn advance(&mut self) -> Option<u8> {
        let byte = *self.bytes.get(self.position)?;
        self.position += 1;
        if byte == b'\n' {
            self.line += 1;
        }
        Some(byte)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.position).copied()
    }

    fn skip_separators(&mut self) {
        while let Some(byte) = self.peek() {
            if byte.is_ascii_whitespace() {
                self.advance();
            } else if byte == b'#' {
                while let Some(byte) = self.advance() {
                    if byte == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Next whitespace/comment-delimited token and the line it starts on.
    fn token(&mut self) -> Option<(String, usize)> {
        self.skip_separators();
        self.peek()?;
        let line = self.line;
        let mut token = Vec::new();
        while let Some(byte) = self.peek() {
            if byte.is_ascii_whitespace() || byte == b'#' {
                break;
            }
            token.push(byte);
            self.advance();
        }
        Some((String::from_utf8_lossy(&token).into_owned(), line))
    }
}

fn numeric_token(scanner: &mut Scanner, path: &Path, what: &str) -> Result<(u32, usize)> {
    let Some((token, line)) = scanner.token() else {
        return Err(Error::parse(
            path,
            scanner.line,
            format!("missing {what} in header"),
        ));
    };
    let value = token
        .parse::<u32>()
        .map_err(|_| Error::parse(path, line, format!("{what} must be a number, got {token:?}")))?;
    Ok((value, line))
}

pub(crate) fn parse_pgm(bytes: &[u8], path: &Path) -> Result<Raster> {
    let mut scanner = Scanner::new(bytes);
    let Some((magic, magic_line)) = scanner.token() else {
        return Err(Error::parse(path, 1, "empty file"));
    };
    if magic != "P2" && magic != "P5" {
        return Err(Error::parse(
            path,
            magic_line,
            format!("expected magic P2 or P5, got {magic:?}"),
        ));
    }
    let (width, _) = numeric_token(&mut scanner, path, "width")?;
    let (height, _) = numeric_token(&mut scanner, path, "height")?;
    let (maxval, maxval_line) = numeric_token(&mut scanner, path, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(
            path,
            maxval_line,
            format!("maxval must be in 1..=255, got {maxval}"),
        ));
    }
    let count = width as usize * height as usize;

    let pixels = if magic == "P2" {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let (value, line) = numeric_token(&mut scanner, path, "pixel")?;
            if value > maxval {
                return Err(Error::parse(
                    path,
                    line,
                    format!("pixel {value} exceeds maxval {maxval}"),
                ));
            }
            pixels.push(value as u8);
        }
        if scanner.token().is_some() {
            return Err(Error::parse(
                path,
                scanner.line,
                format!("trailing data after {count} pixels"),
            ));
        }
        pixels
    } else {
        // P5: exactly one whitespace byte after the maxval, then raw bytes.
        match scanner.advance() {
            Some(byte) if byte.is_ascii_whitespace() => {}
            _ => {
                return Err(Error::parse(
                    path,
                    scanner.line,
                    "maxval must be followed by a single whitespace byte",
                ));
            }
        }
        let data = &bytes[scanner.position..];
        if data.len() < count {
            return Err(Error::parse(
                path,
                scanner.line,
                format!("pixel data truncated: need {count} bytes, found {}", data.len()),
            ));
        }
        if data[count..].iter().any(|b| !b.is_ascii_whitespace()) {
            return Err(Error::parse(
                path,
                scanner.line,
                format!("trailing data after {count} pixel bytes"),
            ));
        }
        if let Some(bad) = data[..count].iter().find(|&&b| u32::from(b) > maxval) {
            return Err(Error::parse(
                path,
                scanner.line,
                format!("pixel {bad} exceeds maxval {maxval}"),
            ));
        }
        data[..count].to_vec()
    };

    Raster::new(width, height, pixels)
}

/// Read a PGM image (either encoding).
///
/// # Errors
///
/// [`Error::Io`] when the file cannot be read; [`Error::Parse`] with the
/// offending line when it is not a valid 8-bit PGM.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes, path)
}

/// Write a raster as binary PGM (`P5`, maxval 255), atomically.
///
/// # Errors
///
/// [`Error::Io`] when the file cannot be written.
pub fn write_pgm(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = format!("P5\n{} {}\n255\n", raster.width(), raster.height()).into_bytes();
    bytes.extend_from_slice(raster.pixels());
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_path() -> &'static Path {
        Path::new("test.pgm")
    }

    #[test]
    fn parses_ascii_with_comments_and_odd_whitespace() {
        let text = b"P2 # magic\n# a comment line\n3 2\n# another\n255\n0 10 20\n30   40\t50\n";
        let raster = parse_pgm(text, fake_path()).unwrap();
        assert_eq!(raster.width(), 3);
        assert_eq!(raster.height(), 2);
        assert_eq!(raster.pixels(), &[0, 10, 20, 30, 40, 50]);
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("image.pgm");
        let original = Raster::new(9, 8, (0..72).collect()).unwrap();
        write_pgm(&path, &original).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), original);
    }

    #[test]
    fn binary_tolerates_trailing_newline_only() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        bytes.push(b'\n');
        assert!(parse_pgm(&bytes, fake_path()).is_ok());
        bytes.push(b'x');
        assert!(matches!(
            parse_pgm(&bytes, fake_path()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = parse_pgm(b"P2\n1 1\n65535\n0\n", fake_path()).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("test.pgm:3"), "{message}");
        assert!(message.contains("maxval"), "{message}");
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(
            parse_pgm(b"P6\n1 1\n255\n...", fake_path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_truncated_binary_pixels() {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend_from_slice(&[7; 10]);
        let message = parse_pgm(&bytes, fake_path()).unwrap_err().to_string();
        assert!(message.contains("truncated"), "{message}");
        assert!(message.contains("need 16 bytes, found 10"), "{message}");
    }

    #[test]
    fn rejects_ascii_pixel_above_maxval_with_its_line() {
        let err = parse_pgm(b"P2\n2 1\n100\n5\n200\n", fake_path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn rejects_binary_pixel_above_maxval() {
        let mut bytes = b"P5\n2 1\n100\n".to_vec();
        bytes.extend_from_slice(&[5, 200]);
        assert!(matches!(
            parse_pgm(&bytes, fake_path()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn rejects_ascii_trailing_tokens_and_missing_fields() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0\n99\n", fake_path()).is_err());
        assert!(parse_pgm(b"P2\n1\n", fake_path()).is_err());
        assert!(parse_pgm(b"", fake_path()).is_err());
        assert!(parse_pgm(b"P2\n1 one\n255\n0\n", fake_path()).is_err());
    }

    #[test]
    fn missing_file_reports_io_error_with_path() {
        let err = read_pgm("/nonexistent/image.pgm").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/image.pgm"));
    }
}
