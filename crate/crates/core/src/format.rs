//! Plain-text file formats. All numbers are exact rationals written `p/q`
//! (or `p`); `#` starts a comment.
//!
//! ```text
//! MAT <rows> <cols>            POLY <name>              DECOMP <m> <n> <r>
//! <rows lines of cols values>  DIM <d>                  <u_1: m values>
//!                              H <m>                    <w_1: n values>
//!                              <m lines: a_1..a_d b>    ...
//!                              V <n>
//!                              <n lines: d values>
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{parse_rational, RatMatrix, Rational};
use crate::nnrank::{Decomposition, RankOneFactor};
use crate::polytope::{HRep, Polytope, VRep};

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(n, line)| {
                let content = line.split('#').next().unwrap_or("");
                content.split_whitespace().map(move |t| (n + 1, t))
            })
            .collect();
        Tokens {
            items,
            pos: 0,
            last_line: 1,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.get(self.pos) {
            Some(&(line, tok)) => {
                self.pos += 1;
                self.last_line = line;
                Ok((line, tok))
            }
            None => Err(Error::parse(
                self.last_line,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (line, tok) = self.next(kw)?;
        if tok != kw {
            return Err(Error::parse(
                line,
                format!("expected `{kw}`, found `{tok}`"),
            ));
        }
        Ok(())
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse()
            .map_err(|_| Error::parse(line, format!("expected {what}, found `{tok}`")))
    }

    fn rational(&mut self) -> Result<Rational> {
        let (line, tok) = self.next("a rational")?;
        parse_rational(tok).map_err(|msg| Error::parse(line, msg))
    }

    fn rationals(&mut self, n: usize) -> Result<Vec<Rational>> {
        (0..n).map(|_| self.rational()).collect()
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            Some(&(line, tok)) => Err(Error::parse(line, format!("trailing token `{tok}`"))),
            None => Ok(()),
        }
    }
}

fn write_row(out: &mut String, row: &[Rational]) {
    let parts: Vec<String> = row.iter().map(ToString::to_string).collect();
    out.push_str(&parts.join(" "));
    out.push('\n');
}

fn read_matrix_body(tokens: &mut Tokens, rows: usize, cols: usize) -> Result<RatMatrix> {
    let data = tokens.rationals(rows * cols)?;
    RatMatrix::from_vec(rows, cols, data)
}

pub fn write_matrix(m: &RatMatrix) -> String {
    let mut out = format!("MAT {} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        write_row(&mut out, m.row(i));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<RatMatrix> {
    let mut tokens = Tokens::new(text);
    tokens.keyword("MAT")?;
    let rows = tokens.count("a row count")?;
    let cols = tokens.count("a column count")?;
    let m = read_matrix_body(&mut tokens, rows, cols)?;
    tokens.finish()?;
    Ok(m)
}

pub fn write_polytope(p: &Polytope) -> String {
    let d = p.dim();
    let mut out = String::new();
    let _ = writeln!(out, "POLY {}", p.name);
    let _ = writeln!(out, "DIM {d}");
    let _ = writeln!(out, "H {}", p.num_constraints());
    for i in 0..p.num_constraints() {
        let mut row = p.h.normals.row(i).to_vec();
        row.push(p.h.offsets[i].clone());
        write_row(&mut out, &row);
    }
    let _ = writeln!(out, "V {}", p.num_vertices());
    for j in 0..p.num_vertices() {
        write_row(&mut out, p.v.vertex(j));
    }
    out
}

pub fn parse_polytope(text: &str) -> Result<Polytope> {
    // the name is the rest of the first non-comment line
    let (header_idx, header) = text
        .lines()
        .enumerate()
        .find(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .ok_or_else(|| Error::parse(1, "empty polytope file"))?;
    let name = header
        .trim()
        .strip_prefix("POLY")
        .ok_or_else(|| Error::parse(header_idx + 1, "expected `POLY <name>`"))?
        .trim()
        .to_string();

    let body: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == header_idx { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let mut tokens = Tokens::new(&body);
    tokens.keyword("DIM")?;
    let d = tokens.count("a dimension")?;
    tokens.keyword("H")?;
    let m = tokens.count("a constraint count")?;
    let mut normals = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = tokens.rationals(d + 1)?;
        offsets.push(row.pop().expect("d + 1 >= 1 entries"));
        normals.push(row);
    }
    tokens.keyword("V")?;
    let n = tokens.count("a vertex count")?;
    let vertices = read_matrix_body(&mut tokens, n, d)?;
    tokens.finish()?;
    let h = HRep::new(RatMatrix::from_rows(d, normals)?, offsets)?;
    Polytope::new(name, h, VRep::new(vertices))
}

pub fn write_decomposition(d: &Decomposition) -> String {
    let mut out = format!("DECOMP {} {} {}\n", d.rows(), d.cols(), d.len());
    for f in d.factors() {
        write_row(&mut out, &f.u);
        write_row(&mut out, &f.w);
    }
    out
}

pub fn parse_decomposition(text: &str) -> Result<Decomposition> {
    let mut tokens = Tokens::new(text);
    tokens.keyword("DECOMP")?;
    let m = tokens.count("a row count")?;
    let n = tokens.count("a column count")?;
    let r = tokens.count("a factor count")?;
    let mut factors = Vec::with_capacity(r);
    for _ in 0..r {
        let u = tokens.rationals(m)?;
        let w = tokens.rationals(n)?;
        factors.push(RankOneFactor::new(u, w)?);
    }
    tokens.finish()?;
    Decomposition::new(m, n, factors)
}
