//! Image containers and PGM (Netpbm P2/P5) I/O.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// 8-bit grayscale image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    /// Image of the given size with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Lifts intensities to a real-valued grid.
    pub fn to_grid<T: Scalar>(&self) -> Grid<T> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| T::from_count(v as u64)).collect(),
        }
    }
}

/// Binary mask stored row-major; hand pixels are 1, background 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(i) = data.iter().position(|&v| v > 1) {
            return Err(invalid(format!("binary image entry {i} is {}, expected 0 or 1", data[i])));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width.saturating_mul(height)])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    /// Like [`get`](Self::get) but treats out-of-frame coordinates as background.
    pub fn get_or_zero(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v as u8;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage { width: self.width, height: self.height, data: self.data.iter().map(|&v| 1 - v).collect() }
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    /// Number of pixels where the two masks differ. Panics on size mismatch.
    pub fn hamming(&self, other: &BinaryImage) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height), "mask size mismatch");
        self.data.iter().zip(&other.data).filter(|(a, b)| a != b).count()
    }

    /// Lifts the mask to a real grid with values {0, 1}.
    pub fn to_grid<T: Scalar>(&self) -> Grid<T> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v == 1 { T::one() } else { T::zero() }).collect(),
        }
    }
}

/// Dense row-major grid of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Grid<T> {
        Grid { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Copies the `w`×`h` sub-grid whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Grid<T>> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(invalid(format!("crop {w}x{h}+{x0}+{y0} outside {}x{} grid", self.width, self.height)));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.row(y)[x0..x0 + w]);
        }
        Ok(Grid { width: w, height: h, data })
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(invalid(format!("image dimensions must be positive, got {width}x{height}")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(invalid(format!("data length {len} does not match {width}x{height}")));
    }
    Ok(())
}

/// Maps 1 to `fg` and 0 to `bg`.
pub fn binary_to_gray(img: &BinaryImage, fg: u8, bg: u8) -> Result<GrayImage> {
    if fg == bg {
        return Err(invalid(format!("foreground and background levels are both {fg}")));
    }
    let data = img.pixels().iter().map(|&v| if v == 1 { fg } else { bg }).collect();
    GrayImage::new(img.width(), img.height(), data)
}

/// Nearest-neighbour resampling; destination index `d` reads source index `d * src / dst`.
pub fn resize_nearest(img: &BinaryImage, out_w: usize, out_h: usize) -> Result<BinaryImage> {
    if out_w == 0 || out_h == 0 {
        return Err(invalid(format!("resize target {out_w}x{out_h} has a zero dimension")));
    }
    let (w, h) = (img.width(), img.height());
    let cols: Vec<usize> = (0..out_w).map(|x| x * w / out_w).collect();
    let mut data = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let sy = y * h / out_h;
        let row = &img.pixels()[sy * w..(sy + 1) * w];
        data.extend(cols.iter().map(|&sx| row[sx]));
    }
    BinaryImage::new(out_w, out_h, data)
}

/// Encodes as canonical binary PGM: `P5\n<w> <h>\n255\n` followed by raw bytes.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

/// Decodes an ASCII (P2) or binary (P5) PGM with maxval at most 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let ascii = match magic.1 {
        b"P2" => true,
        b"P5" => false,
        _ => return Err(parse_err(magic.0, "bad magic number, expected P2 or P5")),
    };
    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    cur.skip_space();
    let maxval_at = cur.pos;
    let maxval = cur.header_number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(maxval_at, format!("maxval {maxval} outside 1..=255")));
    }
    let len = width.checked_mul(height).ok_or_else(|| parse_err(0, "image dimensions overflow"))?;

    let data = if ascii {
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let at = cur.skip_space();
            let v = cur.number()?;
            if v > maxval {
                return Err(parse_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
        data
    } else {
        // exactly one whitespace byte separates maxval from the payload
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(parse_err(cur.pos, "expected whitespace after maxval")),
        }
        let payload = &bytes[cur.pos..];
        if payload.len() < len {
            return Err(parse_err(bytes.len(), format!("truncated payload: {} of {len} bytes", payload.len())));
        }
        if let Some(i) = payload[..len].iter().position(|&v| v as usize > maxval) {
            return Err(parse_err(cur.pos + i, format!("sample exceeds maxval {maxval}")));
        }
        payload[..len].to_vec()
    };
    GrayImage::new(width, height, data)
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments; returns the new position.
    fn skip_space(&mut self) -> usize {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.pos
    }

    fn token(&mut self) -> Result<(usize, &'a [u8])> {
        let start = self.skip_space();
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, "unexpected end of data"));
        }
        Ok((start, &self.bytes[start..self.pos]))
    }

    fn number(&mut self) -> Result<usize> {
        let (at, tok) = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                parse_err(at, format!("expected a decimal number, found {:?}", String::from_utf8_lossy(tok)))
            })
    }

    fn header_number(&mut self, what: &str) -> Result<usize> {
        let at = self.skip_space();
        let v = self.number()?;
        if v == 0 {
            return Err(parse_err(at, format!("{what} must be positive")));
        }
        Ok(v)
    }
}
