//! The storage tape.
//!
//! Every square holds a base symbol (the head mark, or one signed digit per
//! track), a left or right overarrow, per-track underlines, and zero to two
//! primes. Arrows and primes live on a control track shared by all `k`
//! counters, since head motion and messages do not depend on the commands.
//!
//! Squares are addressed by a signed offset; the head starts at offset 0.
//! Squares that were never written are blank: digit 0 on every track, no
//! underline, no prime, and an arrow pointing away from the origin (left for
//! negative offsets, right for positive ones). Materializing a blank square
//! is never observable.
//!
//! An optional ghost track records the true radix position held by each
//! square. It exists only for verification. Rule selection goes through
//! [`Neighborhood`](crate::engine::Neighborhood), which has no access to it.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest radix accepted anywhere in the crate.
pub const MAX_RADIX: u32 = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arrow {
    Left,
    Right,
}

impl Arrow {
    /// -1 for left, +1 for right.
    pub fn step(self) -> i64 {
        match self {
            Arrow::Left => -1,
            Arrow::Right => 1,
        }
    }

    pub fn from_step(step: i64) -> Arrow {
        if step < 0 {
            Arrow::Left
        } else {
            Arrow::Right
        }
    }

    pub fn flipped(self) -> Arrow {
        match self {
            Arrow::Left => Arrow::Right,
            Arrow::Right => Arrow::Left,
        }
    }

    fn glyph(self) -> char {
        match self {
            Arrow::Left => '<',
            Arrow::Right => '>',
        }
    }
}

/// Message annotation on a square: absent, single prime, or double prime.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Primes(u8);

impl Primes {
    pub const NONE: Primes = Primes(0);
    pub const ONE: Primes = Primes(1);
    pub const TWO: Primes = Primes(2);

    pub fn new(count: u8) -> Option<Primes> {
        (count <= 2).then_some(Primes(count))
    }

    pub fn count(self) -> u8 {
        self.0
    }
}

/// The part of a square shared by all tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub head: bool,
    pub arrow: Arrow,
    pub primes: Primes,
}

impl Control {
    fn blank_at(offset: i64) -> Control {
        Control {
            head: false,
            arrow: if offset < 0 {
                Arrow::Left
            } else {
                Arrow::Right
            },
            primes: Primes::NONE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    HeadMark,
    Digits(Vec<i32>),
}

/// An owned copy of one square, as seen by callers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub base: Base,
    pub arrow: Arrow,
    pub underlines: Vec<bool>,
    pub primes: Primes,
}

impl Cell {
    pub fn is_head(&self) -> bool {
        matches!(self.base, Base::HeadMark)
    }

    pub fn digits(&self) -> &[i32] {
        match &self.base {
            Base::HeadMark => &[],
            Base::Digits(d) => d,
        }
    }

    /// Token in the rendered notation, e.g. `_>-1''` or `>(0|_2)'`.
    pub fn token(&self) -> String {
        let mut s = String::new();
        match &self.base {
            Base::HeadMark => {
                s.push(self.arrow.glyph());
                s.push('*');
            }
            Base::Digits(d) if d.len() == 1 => {
                if self.underlines[0] {
                    s.push('_');
                }
                s.push(self.arrow.glyph());
                let _ = write!(s, "{}", d[0]);
            }
            Base::Digits(d) => {
                s.push(self.arrow.glyph());
                s.push('(');
                for (t, digit) in d.iter().enumerate() {
                    if t > 0 {
                        s.push('|');
                    }
                    if self.underlines[t] {
                        s.push('_');
                    }
                    let _ = write!(s, "{digit}");
                }
                s.push(')');
            }
        }
        for _ in 0..self.primes.count() {
            s.push('\'');
        }
        s
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Inclusive range of offsets to render.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderWindow {
    pub left: i64,
    pub right: i64,
}

impl RenderWindow {
    pub fn new(left: i64, right: i64) -> RenderWindow {
        assert!(left <= right, "empty render window {left}..={right}");
        RenderWindow { left, right }
    }

    /// `radius` squares on each side of the head.
    pub fn around_head(tape: &Tape, radius: u64) -> RenderWindow {
        let h = tape.head_offset();
        RenderWindow::new(h - radius as i64, h + radius as i64)
    }

    /// The non-blank extent (always including the head), widened by `pad`
    /// blank squares on each side.
    pub fn padded(tape: &Tape, pad: u64) -> RenderWindow {
        let (lo, hi) = tape.nonblank_extent();
        RenderWindow::new(lo - pad as i64, hi + pad as i64)
    }
}

pub(crate) fn check_params(k: usize, radix: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidTrackCount);
    }
    if !(4..=MAX_RADIX).contains(&radix) {
        return Err(Error::InvalidRadix(radix));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Tape {
    k: usize,
    radix: u32,
    /// Offset of storage index 0.
    origin: i64,
    control: Vec<Control>,
    /// `k` digits per square, square-major.
    digits: Vec<i32>,
    underlines: Vec<bool>,
    head: usize,
    ghost: Option<Vec<Option<u64>>>,
}

impl Tape {
    /// Initial tape: the head at offset 0 pointing right, and a singly
    /// primed all-zero endmarker at offset -1.
    pub fn new(k: usize, radix: u32) -> Result<Tape> {
        check_params(k, radix)?;
        let mut tape = Tape {
            k,
            radix,
            origin: -1,
            control: vec![
                Control::blank_at(-1),
                Control::blank_at(0),
                Control::blank_at(1),
            ],
            digits: vec![0; 3 * k],
            underlines: vec![false; 3 * k],
            head: 1,
            ghost: None,
        };
        tape.control[0].primes = Primes::ONE;
        tape.control[1] = Control {
            head: true,
            arrow: Arrow::Right,
            primes: Primes::NONE,
        };
        Ok(tape)
    }

    /// Like [`Tape::new`], with the ghost position track enabled.
    pub fn with_ghost(k: usize, radix: u32) -> Result<Tape> {
        let mut tape = Tape::new(k, radix)?;
        tape.ghost = Some(vec![None, None, Some(0)]);
        Ok(tape)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn ghost_enabled(&self) -> bool {
        self.ghost.is_some()
    }

    pub fn head_offset(&self) -> i64 {
        self.offset_of(self.head)
    }

    /// Materialized extent, inclusive.
    pub fn extent(&self) -> (i64, i64) {
        (self.origin, self.origin + self.control.len() as i64 - 1)
    }

    pub fn control_at(&self, offset: i64) -> Control {
        match self.index_of(offset) {
            Some(i) => self.control[i],
            None => Control::blank_at(offset),
        }
    }

    pub fn digit_at(&self, offset: i64, track: usize) -> i32 {
        self.index_of(offset)
            .map_or(0, |i| self.digits[i * self.k + track])
    }

    pub fn underline_at(&self, offset: i64, track: usize) -> bool {
        self.index_of(offset)
            .is_some_and(|i| self.underlines[i * self.k + track])
    }

    /// Ghost position of the square at `offset`, if the ghost track is on.
    /// Squares left of the original head never hold a radix position.
    pub fn ghost_at(&self, offset: i64) -> Option<u64> {
        let ghost = self.ghost.as_ref()?;
        match self.index_of(offset) {
            Some(i) => ghost[i],
            None => blank_ghost(offset),
        }
    }

    pub fn cell_at(&self, offset: i64) -> Cell {
        let ctl = self.control_at(offset);
        if ctl.head {
            return Cell {
                base: Base::HeadMark,
                arrow: ctl.arrow,
                underlines: vec![false; self.k],
                primes: ctl.primes,
            };
        }
        let (digits, underlines) = match self.index_of(offset) {
            Some(i) => (
                self.digits[i * self.k..(i + 1) * self.k].to_vec(),
                self.underlines[i * self.k..(i + 1) * self.k].to_vec(),
            ),
            None => (vec![0; self.k], vec![false; self.k]),
        };
        Cell {
            base: Base::Digits(digits),
            arrow: ctl.arrow,
            underlines,
            primes: ctl.primes,
        }
    }

    /// Blank as seen from the head: a zero square whose arrow points away
    /// from it. Squares the head has crossed count as non-blank even when
    /// they match the initial contents.
    fn is_blank(&self, offset: i64) -> bool {
        let Some(i) = self.index_of(offset) else {
            return true;
        };
        self.control[i] == Control::blank_at(offset - self.head_offset())
            && self.digits[i * self.k..(i + 1) * self.k]
                .iter()
                .all(|&d| d == 0)
            && !self.underlines[i * self.k..(i + 1) * self.k]
                .iter()
                .any(|&u| u)
    }

    /// Smallest range covering every square that differs from a blank,
    /// plus the head.
    pub fn nonblank_extent(&self) -> (i64, i64) {
        let (lo, hi) = self.extent();
        let h = self.head_offset();
        let first = (lo..=hi).find(|&o| !self.is_blank(o)).unwrap_or(h).min(h);
        let last = (lo..=hi)
            .rev()
            .find(|&o| !self.is_blank(o))
            .unwrap_or(h)
            .max(h);
        (first, last)
    }

    pub fn render(&self, window: RenderWindow) -> String {
        let mut out = String::new();
        for offset in window.left..=window.right {
            if offset > window.left {
                out.push(' ');
            }
            out.push_str(&self.cell_at(offset).token());
        }
        out
    }

    /// Ghost positions over `window`, `*` for the head and `.` where a
    /// square holds no position.
    pub fn render_ghost(&self, window: RenderWindow) -> Result<String> {
        if !self.ghost_enabled() {
            return Err(Error::GhostDisabled);
        }
        let tokens: Vec<String> = (window.left..=window.right)
            .map(|o| {
                if self.control_at(o).head {
                    "*".to_string()
                } else {
                    self.ghost_at(o).map_or(".".to_string(), |p| p.to_string())
                }
            })
            .collect();
        Ok(tokens.join(" "))
    }

    /// Parses the rendered notation. The head lands at offset 0 and squares
    /// outside the text are blank. The ghost track is off.
    pub fn parse_rendered(text: &str, radix: u32) -> Result<Tape> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let heads = tokens.iter().filter(|t| t.contains('*')).count();
        if heads != 1 {
            return Err(Error::HeadCount(heads));
        }
        let head_index = tokens.iter().position(|t| t.contains('*')).unwrap();
        let mut k = None;
        let mut parsed = Vec::with_capacity(tokens.len());
        for (index, token) in tokens.iter().enumerate() {
            let cell = parse_token(token, radix).map_err(|reason| Error::MalformedCell {
                index,
                token: token.to_string(),
                reason,
            })?;
            if !cell.is_head() {
                let width = cell.digits().len();
                if *k.get_or_insert(width) != width {
                    return Err(Error::MalformedCell {
                        index,
                        token: token.to_string(),
                        reason: format!("expected {} tracks", k.unwrap()),
                    });
                }
            }
            parsed.push(cell);
        }
        let k = k.unwrap_or(1);
        check_params(k, radix)?;
        let origin = -(head_index as i64);
        let mut tape = Tape {
            k,
            radix,
            origin,
            control: Vec::with_capacity(parsed.len()),
            digits: Vec::with_capacity(parsed.len() * k),
            underlines: Vec::with_capacity(parsed.len() * k),
            head: head_index,
            ghost: None,
        };
        for cell in parsed {
            tape.control.push(Control {
                head: cell.is_head(),
                arrow: cell.arrow,
                primes: cell.primes,
            });
            match cell.base {
                Base::HeadMark => {
                    tape.digits.extend(std::iter::repeat_n(0, k));
                    tape.underlines.extend(std::iter::repeat_n(false, k));
                }
                Base::Digits(d) => {
                    tape.digits.extend(d);
                    tape.underlines.extend(cell.underlines);
                }
            }
        }
        // Keep offset 0 (the head) and its neighbors materialized.
        tape.ensure(-1);
        tape.ensure(1);
        Ok(tape)
    }

    /// True when both tapes show the same squares relative to their heads.
    /// Ghost data is ignored.
    pub fn same_configuration(&self, other: &Tape) -> bool {
        if self.k != other.k {
            return false;
        }
        let (a_lo, a_hi) = self.extent();
        let (b_lo, b_hi) = other.extent();
        let (ha, hb) = (self.head_offset(), other.head_offset());
        let lo = (a_lo - ha).min(b_lo - hb);
        let hi = (a_hi - ha).max(b_hi - hb);
        (lo..=hi).all(|rel| self.cell_at(ha + rel) == other.cell_at(hb + rel))
    }

    /// Digits of `track` in ghost order, least significant first, up to the
    /// highest position currently materialized.
    pub fn ghost_digits(&self, track: usize) -> Result<Vec<i32>> {
        let ghost = self.ghost.as_ref().ok_or(Error::GhostDisabled)?;
        let top = ghost.iter().flatten().copied().max().unwrap_or(0) as usize;
        let mut out = vec![0; top + 1];
        for (i, pos) in ghost.iter().enumerate() {
            if let Some(p) = pos {
                out[*p as usize] = self.digits[i * self.k + track];
            }
        }
        Ok(out)
    }

    /// The integer held by `track`: the sum of digit * radix^position.
    pub fn represented_value(&self, track: usize) -> Result<BigInt> {
        let digits = self.ghost_digits(track)?;
        let radix = BigInt::from(self.radix);
        Ok(digits
            .iter()
            .rev()
            .fold(BigInt::from(0), |acc, &d| acc * &radix + d))
    }

    // Storage-level helpers for the engine.

    pub(crate) fn offset_of(&self, index: usize) -> i64 {
        index as i64 + self.origin
    }

    pub(crate) fn index_of(&self, offset: i64) -> Option<usize> {
        let i = offset - self.origin;
        (i >= 0 && (i as usize) < self.control.len()).then_some(i as usize)
    }

    /// Materializes squares up to and including `offset`; returns its index.
    pub(crate) fn ensure(&mut self, offset: i64) -> usize {
        if offset < self.origin {
            let grow = (self.origin - offset) as usize;
            let mut control: Vec<Control> = (offset..self.origin).map(Control::blank_at).collect();
            control.extend_from_slice(&self.control);
            self.control = control;
            let mut digits = vec![0; grow * self.k];
            digits.extend_from_slice(&self.digits);
            self.digits = digits;
            let mut underlines = vec![false; grow * self.k];
            underlines.extend_from_slice(&self.underlines);
            self.underlines = underlines;
            if let Some(g) = self.ghost.as_mut() {
                let mut ghost: Vec<Option<u64>> = (offset..self.origin).map(blank_ghost).collect();
                ghost.extend_from_slice(g);
                *g = ghost;
            }
            self.head += grow;
            self.origin = offset;
        }
        while self.offset_of(self.control.len()) <= offset {
            let next = self.offset_of(self.control.len());
            self.control.push(Control::blank_at(next));
            self.digits.extend(std::iter::repeat_n(0, self.k));
            self.underlines.extend(std::iter::repeat_n(false, self.k));
            if let Some(g) = self.ghost.as_mut() {
                g.push(blank_ghost(next));
            }
        }
        (offset - self.origin) as usize
    }

    pub(crate) fn head_index(&self) -> usize {
        self.head
    }

    pub(crate) fn control_mut(&mut self, index: usize) -> &mut Control {
        &mut self.control[index]
    }

    pub(crate) fn digit(&self, index: usize, track: usize) -> i32 {
        self.digits[index * self.k + track]
    }

    pub(crate) fn set_digit(&mut self, index: usize, track: usize, value: i32) {
        self.digits[index * self.k + track] = value;
    }

    pub(crate) fn underline(&self, index: usize, track: usize) -> bool {
        self.underlines[index * self.k + track]
    }

    pub(crate) fn set_underline(&mut self, index: usize, track: usize, value: bool) {
        self.underlines[index * self.k + track] = value;
    }

    pub(crate) fn ghost_of(&self, index: usize) -> Option<u64> {
        self.ghost.as_ref().and_then(|g| g[index])
    }

    /// Exchanges the full contents of two squares, head mark included.
    pub(crate) fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.control.swap(a, b);
        for t in 0..self.k {
            self.digits.swap(a * self.k + t, b * self.k + t);
            self.underlines.swap(a * self.k + t, b * self.k + t);
        }
        if let Some(g) = self.ghost.as_mut() {
            g.swap(a, b);
        }
        if self.head == a {
            self.head = b;
        } else if self.head == b {
            self.head = a;
        }
    }

    /// Overwrites one digit without any bookkeeping. Exists so that
    /// verification tooling can prove it notices corruption.
    #[doc(hidden)]
    pub fn corrupt_digit(&mut self, offset: i64, track: usize, value: i32) {
        let i = self.ensure(offset);
        self.set_digit(i, track, value);
    }
}

fn blank_ghost(offset: i64) -> Option<u64> {
    (offset > 0).then(|| offset as u64 - 1)
}

fn parse_token(token: &str, radix: u32) -> std::result::Result<Cell, String> {
    let limit = radix as i64 - 1;
    let parse_digit = |s: &str| -> std::result::Result<i32, String> {
        let d: i64 = s.parse().map_err(|_| format!("bad digit `{s}`"))?;
        if d.abs() > limit {
            return Err(format!("digit {d} exceeds radix bound {limit}"));
        }
        Ok(d as i32)
    };

    let mut rest = token;
    let outer_underline = rest.starts_with('_');
    if outer_underline {
        rest = &rest[1..];
    }
    let arrow = match rest.chars().next() {
        Some('<') => Arrow::Left,
        Some('>') => Arrow::Right,
        _ => return Err("missing arrow".into()),
    };
    rest = &rest[1..];
    let body_end = rest.find('\'').unwrap_or(rest.len());
    let (body, primes_text) = rest.split_at(body_end);
    if primes_text.chars().any(|c| c != '\'') {
        return Err("characters after primes".into());
    }
    let primes = Primes::new(primes_text.len() as u8).ok_or("more than two primes")?;

    let cell = if body == "*" {
        if outer_underline {
            return Err("head mark cannot be underlined".into());
        }
        if primes != Primes::NONE {
            return Err("head mark cannot carry primes".into());
        }
        Cell {
            base: Base::HeadMark,
            arrow,
            underlines: Vec::new(),
            primes,
        }
    } else if let Some(inner) = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
        if outer_underline {
            return Err("multi-track cells carry underlines inside the parentheses".into());
        }
        let mut digits = Vec::new();
        let mut underlines = Vec::new();
        for part in inner.split('|') {
            let (u, d) = match part.strip_prefix('_') {
                Some(d) => (true, d),
                None => (false, part),
            };
            digits.push(parse_digit(d)?);
            underlines.push(u);
        }
        Cell {
            base: Base::Digits(digits),
            arrow,
            underlines,
            primes,
        }
    } else {
        Cell {
            base: Base::Digits(vec![parse_digit(body)?]),
            arrow,
            underlines: vec![outer_underline],
            primes,
        }
    };
    Ok(cell)
}
