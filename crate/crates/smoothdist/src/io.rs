//! Mesh files: OBJ (`v`, `f`, `l`), XYZ point lists and PLY vertices.
//!
//! OBJ faces with more than three corners are fanned into triangles and
//! `l` records with more than two indices become consecutive edges. A file
//! with vertices but no elements is read as a point cloud, as are XYZ and
//! PLY files (PLY faces are ignored).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use smoothdist_core::prelude::*;

/// Supported formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Wavefront OBJ.
    Obj,
    /// Whitespace-separated `x y z` per line.
    Xyz,
    /// Stanford PLY, ASCII or binary.
    Ply,
}

impl Format {
    /// Guesses from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Format::Obj),
            "xyz" | "txt" => Some(Format::Xyz),
            "ply" => Some(Format::Ply),
            _ => None,
        }
    }
}

/// Errors from reading or writing mesh files.
#[derive(Debug, thiserror::Error)]
pub enum MeshIoError {
    /// Underlying IO failure.
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// Malformed input at a 1-based line number (0 for binary payloads).
    #[error("line {line}: {msg}")]
    Parse {
        /// Line number.
        line: usize,
        /// What went wrong.
        msg: String,
    },
    /// The file parsed but the geometry is invalid.
    #[error("{0}")]
    Mesh(#[from] smoothdist_core::Error),
    /// Extension not recognized and no format given.
    #[error("cannot infer mesh format from {0}")]
    UnknownFormat(String),
}

fn perr(line: usize, msg: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse { line, msg: msg.into() }
}

fn cloud(verts: Vec<Vec3>, line: usize) -> Result<SimplexMesh, MeshIoError> {
    if verts.is_empty() {
        return Err(perr(line, "no vertices"));
    }
    Ok(SimplexMesh::point_cloud(verts)?)
}

/// Loads a mesh, inferring the format from the extension when `format` is `None`.
pub fn load_mesh(path: &Path, format: Option<Format>) -> Result<SimplexMesh, MeshIoError> {
    let format = format
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| MeshIoError::UnknownFormat(path.display().to_string()))?;
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    match format {
        Format::Obj => read_obj(r),
        Format::Xyz => read_xyz(r),
        Format::Ply => read_ply(&mut r),
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshIoError> {
    let t = tok.ok_or_else(|| perr(line, "missing coordinate"))?;
    let v: f64 = t.parse().map_err(|_| perr(line, format!("bad number '{t}'")))?;
    if !v.is_finite() {
        return Err(perr(line, format!("non-finite coordinate '{t}'")));
    }
    Ok(v)
}

/// OBJ index: 1-based, negative counts back from the last vertex, and
/// anything after the first `/` is ignored.
fn parse_obj_index(tok: &str, nverts: usize, line: usize) -> Result<usize, MeshIoError> {
    let head = tok.split('/').next().unwrap_or("");
    let i: i64 = head.parse().map_err(|_| perr(line, format!("bad index '{tok}'")))?;
    let idx = if i > 0 {
        i - 1
    } else if i < 0 {
        nverts as i64 + i
    } else {
        return Err(perr(line, "index 0 is not valid in OBJ"));
    };
    if idx < 0 {
        return Err(perr(line, format!("index '{tok}' out of range")));
    }
    Ok(idx as usize)
}

/// Reads OBJ text.
pub fn read_obj<R: BufRead>(r: R) -> Result<SimplexMesh, MeshIoError> {
    let mut verts = Vec::new();
    let mut simplices = Vec::new();
    let mut last = 0;
    for (ln, line) in r.lines().enumerate() {
        let ln = ln + 1;
        last = ln;
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let x = parse_f64(it.next(), ln)?;
                let y = parse_f64(it.next(), ln)?;
                let z = parse_f64(it.next(), ln)?;
                verts.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let idx: Vec<usize> = it.map(|t| parse_obj_index(t, verts.len(), ln)).collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(perr(ln, "face needs at least 3 indices"));
                }
                for k in 1..idx.len() - 1 {
                    simplices.push(Simplex::Triangle([idx[0], idx[k], idx[k + 1]]));
                }
            }
            Some("l") => {
                let idx: Vec<usize> = it.map(|t| parse_obj_index(t, verts.len(), ln)).collect::<Result<_, _>>()?;
                if idx.len() < 2 {
                    return Err(perr(ln, "line needs at least 2 indices"));
                }
                for w in idx.windows(2) {
                    simplices.push(Simplex::Edge([w[0], w[1]]));
                }
            }
            Some("p") => {
                for t in it {
                    simplices.push(Simplex::Point(parse_obj_index(t, verts.len(), ln)?));
                }
            }
            _ => {}
        }
    }
    if simplices.is_empty() {
        return cloud(verts, last);
    }
    Ok(SimplexMesh::new(verts, simplices)?)
}

/// Reads an XYZ point list; extra columns (normals, colors) are ignored.
pub fn read_xyz<R: BufRead>(r: R) -> Result<SimplexMesh, MeshIoError> {
    let mut verts = Vec::new();
    let mut last = 0;
    for (ln, line) in r.lines().enumerate() {
        last = ln + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let x = parse_f64(it.next(), ln + 1)?;
        let y = parse_f64(it.next(), ln + 1)?;
        let z = parse_f64(it.next(), ln + 1)?;
        verts.push(Vec3::new(x, y, z));
    }
    cloud(verts, last)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PlyEncoding {
    Ascii,
    LittleEndian,
    BigEndian,
}

#[derive(Clone, Copy)]
enum PlyType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => PlyType::I8,
            "uchar" | "uint8" => PlyType::U8,
            "short" | "int16" => PlyType::I16,
            "ushort" | "uint16" => PlyType::U16,
            "int" | "int32" => PlyType::I32,
            "uint" | "uint32" => PlyType::U32,
            "float" | "float32" => PlyType::F32,
            "double" | "float64" => PlyType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            PlyType::I8 | PlyType::U8 => 1,
            PlyType::I16 | PlyType::U16 => 2,
            PlyType::I32 | PlyType::U32 | PlyType::F32 => 4,
            PlyType::F64 => 8,
        }
    }

    fn read(self, b: &[u8], enc: PlyEncoding) -> f64 {
        macro_rules! num {
            ($t:ty, $n:expr) => {{
                let a: [u8; $n] = b[..$n].try_into().expect("sized slice");
                (if enc == PlyEncoding::BigEndian { <$t>::from_be_bytes(a) } else { <$t>::from_le_bytes(a) }) as f64
            }};
        }
        match self {
            PlyType::I8 => b[0] as i8 as f64,
            PlyType::U8 => b[0] as f64,
            PlyType::I16 => num!(i16, 2),
            PlyType::U16 => num!(u16, 2),
            PlyType::I32 => num!(i32, 4),
            PlyType::U32 => num!(u32, 4),
            PlyType::F32 => num!(f32, 4),
            PlyType::F64 => num!(f64, 8),
        }
    }
}

fn next_line<R: BufRead>(r: &mut R, line: &mut String, ln: &mut usize) -> Result<usize, MeshIoError> {
    line.clear();
    if r.read_line(line)? == 0 {
        return Err(perr(*ln + 1, "unexpected end of file"));
    }
    *ln += 1;
    Ok(*ln)
}

/// Reads the `vertex` element of a PLY file as a point cloud.
pub fn read_ply<R: BufRead>(r: &mut R) -> Result<SimplexMesh, MeshIoError> {
    let mut line = String::new();
    let mut ln = 0;
    let l = next_line(r, &mut line, &mut ln)?;
    if line.trim() != "ply" {
        return Err(perr(l, "missing 'ply' magic"));
    }
    let mut enc = None;
    let mut nverts = None;
    let mut in_vertex = false;
    let mut props: Vec<(String, PlyType)> = Vec::new();
    loop {
        let l = next_line(r, &mut line, &mut ln)?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", f, ..] => {
                enc = Some(match *f {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::LittleEndian,
                    "binary_big_endian" => PlyEncoding::BigEndian,
                    _ => return Err(perr(l, format!("unknown format '{f}'"))),
                })
            }
            ["element", name, n] => {
                if nverts.is_some() && in_vertex {
                    in_vertex = false;
                }
                if *name == "vertex" {
                    nverts = Some(n.parse::<usize>().map_err(|_| perr(l, "bad vertex count"))?);
                    in_vertex = true;
                } else if nverts.is_none() {
                    return Err(perr(l, "elements before 'vertex' are not supported"));
                }
            }
            ["property", "list", ..] if in_vertex => return Err(perr(l, "list properties on vertices are not supported")),
            ["property", ty, name] if in_vertex => {
                let t = PlyType::parse(ty).ok_or_else(|| perr(l, format!("unknown type '{ty}'")))?;
                props.push((name.to_string(), t));
            }
            ["end_header"] => break,
            _ => {}
        }
    }
    let enc = enc.ok_or_else(|| perr(ln, "missing format line"))?;
    let n = nverts.ok_or_else(|| perr(ln, "no vertex element"))?;
    let pos = |name: &str| props.iter().position(|(p, _)| p == name).ok_or_else(|| perr(ln, format!("vertex property '{name}' missing")));
    let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
    let mut verts = Vec::with_capacity(n);
    if enc == PlyEncoding::Ascii {
        for _ in 0..n {
            let l = next_line(r, &mut line, &mut ln)?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < props.len() {
                return Err(perr(l, "too few vertex values"));
            }
            let get = |i: usize| parse_f64(Some(toks[i]), l);
            verts.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
        }
    } else {
        let stride: usize = props.iter().map(|p| p.1.size()).sum();
        let offsets: Vec<usize> = props.iter().scan(0, |o, p| {
            let cur = *o;
            *o += p.1.size();
            Some(cur)
        }).collect();
        let mut buf = vec![0u8; stride];
        for k in 0..n {
            r.read_exact(&mut buf).map_err(|_| perr(0, format!("binary payload ends at vertex {k}")))?;
            let get = |i: usize| {
                let v = props[i].1.read(&buf[offsets[i]..], enc);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(perr(0, format!("non-finite coordinate at vertex {k}")))
                }
            };
            verts.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
        }
    }
    cloud(verts, ln)
}

/// Writes OBJ text. Coordinates use the shortest round-trip decimal form,
/// so reading the file back reproduces them bit for bit.
pub fn write_obj<W: Write>(mesh: &SimplexMesh, mut w: W) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    let point_cloud = mesh.simplices().iter().enumerate().all(|(i, s)| *s == Simplex::Point(i));
    if point_cloud && mesh.len() == mesh.vertices().len() {
        return Ok(());
    }
    for s in mesh.simplices() {
        match *s {
            Simplex::Point(a) => writeln!(w, "p {}", a + 1)?,
            Simplex::Edge([a, b]) => writeln!(w, "l {} {}", a + 1, b + 1)?,
            Simplex::Triangle([a, b, c]) => writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?,
        }
    }
    Ok(())
}

/// Writes OBJ to a file.
pub fn save_obj(mesh: &SimplexMesh, path: &Path) -> Result<(), MeshIoError> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    write_obj(mesh, &mut f)?;
    f.flush()?;
    Ok(())
}
