//! OBJ (ASCII), PLY (binary little-endian) and STL (binary) mesh files.
//! Positions are stored as 32-bit floats in PLY/STL and printed with
//! shortest round-trip `f32` formatting in OBJ.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::Vec3;

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).unwrap_or_default()
}

/// Writes OBJ or PLY depending on the file extension.
pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "obj" => write_obj(mesh, path),
        "ply" => write_ply(mesh, path),
        "stl" => write_stl(mesh, path),
        other => Err(Error::Config(format!("unsupported mesh extension {other:?}"))),
    }
}

/// Reads OBJ, PLY or STL depending on the file extension.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "obj" => read_obj(path),
        "ply" => read_ply(path),
        "stl" => read_stl(path),
        other => Err(Error::Config(format!("unsupported mesh extension {other:?}"))),
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

pub fn write_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let res: std::io::Result<()> = (|| {
        for v in &mesh.vertices {
            writeln!(w, "v {} {} {}", v.x as f32, v.y as f32, v.z as f32)?;
        }
        for t in &mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut mesh = Mesh::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        let bad = |msg: &str| Error::format("OBJ", format!("line {}: {msg}", lineno + 1));
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f32>().map(f64::from))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("bad vertex coordinate"))?;
                if c.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let n = mesh.vertices.len() as i64;
                let idx: Vec<u32> = parts
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| bad("bad face index"))?;
                        let i = if i < 0 { n + i } else { i - 1 };
                        if i < 0 || i >= n {
                            return Err(bad("face index out of range"));
                        }
                        Ok(i as u32)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs at least 3 vertices"));
                }
                for j in 1..idx.len() - 1 {
                    mesh.triangles.push([idx[0], idx[j], idx[j + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn write_ply(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let res: std::io::Result<()> = (|| {
        write!(
            w,
            "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
            mesh.vertices.len(),
            mesh.triangles.len()
        )?;
        for v in &mesh.vertices {
            for c in [v.x, v.y, v.z] {
                w.write_all(&(c as f32).to_le_bytes())?;
            }
        }
        for t in &mesh.triangles {
            w.write_all(&[3u8])?;
            for i in t {
                w.write_all(&(*i as i32).to_le_bytes())?;
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Reads the binary little-endian PLY subset written by [`write_ply`]:
/// float xyz vertices and uchar/int (or uint) index lists.
pub fn read_ply(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = read_all(path)?;
    let bad = |m: &str| Error::format("PLY", m.to_string());
    let end = b"end_header\n";
    let header_len =
        bytes.windows(end.len()).position(|w| w == end).ok_or_else(|| bad("missing end_header"))? + end.len();
    let header = std::str::from_utf8(&bytes[..header_len]).map_err(|_| bad("non-UTF8 header"))?;
    let mut lines = header.lines();
    if lines.next() != Some("ply") {
        return Err(bad("missing magic"));
    }
    let mut n_vertices = 0usize;
    let mut n_faces = 0usize;
    let mut current = "";
    let mut vertex_props = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["format", fmt, _] if *fmt != "binary_little_endian" => {
                return Err(bad("only binary_little_endian is supported"))
            }
            ["element", "vertex", n] => {
                n_vertices = n.parse().map_err(|_| bad("bad vertex count"))?;
                current = "vertex";
            }
            ["element", "face", n] => {
                n_faces = n.parse().map_err(|_| bad("bad face count"))?;
                current = "face";
            }
            ["element", ..] => current = "other",
            ["property", ty, name] if current == "vertex" => vertex_props.push((*ty, *name)),
            ["property", "list", "uchar", "int" | "uint", _] if current == "face" => {}
            ["property", ..] if current == "face" => return Err(bad("unsupported face property")),
            _ => {}
        }
    }
    if vertex_props.len() != 3
        || vertex_props.iter().zip(["x", "y", "z"]).any(|((ty, name), want)| *ty != "float" || *name != want)
    {
        return Err(bad("vertices must be float x, y, z"));
    }
    let mut body = &bytes[header_len..];
    let mut take = |n: usize| -> Result<&[u8]> {
        if body.len() < n {
            return Err(bad("truncated body"));
        }
        let (h, t) = body.split_at(n);
        body = t;
        Ok(h)
    };
    let mut mesh = Mesh::default();
    for _ in 0..n_vertices {
        let b = take(12)?;
        let c = |i: usize| f32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        mesh.vertices.push(Vec3::new(c(0), c(1), c(2)));
    }
    for _ in 0..n_faces {
        let count = take(1)?[0] as usize;
        let b = take(4 * count)?;
        let idx: Vec<u32> =
            (0..count).map(|i| i32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap()) as u32).collect();
        if count < 3 || idx.iter().any(|&i| i as usize >= n_vertices) {
            return Err(bad("bad face"));
        }
        for j in 1..count - 1 {
            mesh.triangles.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    Ok(mesh)
}

pub fn write_stl(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let res: std::io::Result<()> = (|| {
        w.write_all(&[0u8; 80])?;
        w.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.triangle(t);
            let n = (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_default();
            for v in [n, a, b, c] {
                for x in [v.x, v.y, v.z] {
                    w.write_all(&(x as f32).to_le_bytes())?;
                }
            }
            w.write_all(&[0u8; 2])?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Binary STL. Vertices are welded by exact position.
pub fn read_stl(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = read_all(path)?;
    if bytes.len() < 84 {
        return Err(Error::format("STL", "file shorter than header"));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * n {
        return Err(Error::format("STL", format!("{n} triangles need {} bytes, found {}", 84 + 50 * n, bytes.len())));
    }
    let mut soup = Mesh::default();
    for t in 0..n {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        let base = soup.vertices.len() as u32;
        for v in 1..4 {
            soup.vertices.push(Vec3::new(f(3 * v), f(3 * v + 1), f(3 * v + 2)));
        }
        soup.triangles.push([base, base + 1, base + 2]);
    }
    Ok(soup.welded())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f32_rounded(m: &Mesh) -> Mesh {
        Mesh {
            vertices: m.vertices.iter().map(|v| v.map(|c| c as f32 as f64)).collect(),
            triangles: m.triangles.clone(),
        }
    }

    #[test]
    fn round_trips_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = Mesh::icosphere(Vec3::new(0.01, 0.02, -0.03), 0.3, 2);
        let expected = f32_rounded(&mesh);
        for ext in ["obj", "ply"] {
            let p = dir.path().join(format!("m.{ext}"));
            write_mesh(&mesh, &p).unwrap();
            assert_eq!(read_mesh(&p).unwrap(), expected, "{ext}");
        }
        let p = dir.path().join("m.stl");
        write_mesh(&mesh, &p).unwrap();
        let back = read_mesh(&p).unwrap();
        assert_eq!(back.triangles.len(), mesh.triangles.len());
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        assert!(back.topology().is_closed());
    }

    #[test]
    fn unit_triangle_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let tri = Mesh::new(vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)], vec![[0, 1, 2]]);
        for ext in ["obj", "ply"] {
            let p = dir.path().join(format!("t.{ext}"));
            write_mesh(&tri, &p).unwrap();
            assert_eq!(read_mesh(&p).unwrap(), tri);
            let p = dir.path().join(format!("e.{ext}"));
            write_mesh(&Mesh::default(), &p).unwrap();
            assert_eq!(read_mesh(&p).unwrap(), Mesh::default());
        }
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_mesh(&Mesh::default(), "/nonexistent-dir/x/m.obj").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn obj_polygons_and_negative_indices() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.obj");
        std::fs::write(&p, "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\nf -4 -3 -2\n").unwrap();
        let m = read_obj(&p).unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3], [0, 1, 2]]);
    }
}
