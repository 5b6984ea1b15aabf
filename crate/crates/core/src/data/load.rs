use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::manifest::{DatasetManifest, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, MultiViewGraph};
use crate::tensor::Tensor;

/// A loaded dataset directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub graph: MultiViewGraph,
}

fn read(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_err(file: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        message,
    }
}

fn read_features(path: &Path, n: usize, d: usize) -> Result<Tensor> {
    let text = read(path)?;
    let mut data = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (ln, line) in lines(&text) {
        let before = data.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(path, ln, format!("`{tok}` is not a real number")))?;
            if !v.is_finite() {
                return Err(parse_err(path, ln, format!("non-finite feature value `{tok}`")));
            }
            data.push(v);
        }
        let cols = data.len() - before;
        if cols != d {
            return Err(Error::DimensionMismatch {
                file: path.to_path_buf(),
                expected: format!("d = {d} columns"),
                found: format!("{cols} columns on line {ln}"),
            });
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::DimensionMismatch {
            file: path.to_path_buf(),
            expected: format!("n = {n} rows"),
            found: format!("{rows} rows"),
        });
    }
    Tensor::from_vec(n, d, data)
}

fn read_edges(path: &Path, n: usize) -> Result<Adjacency> {
    let text = read(path)?;
    let mut edges = Vec::new();
    for (ln, line) in lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(path, ln, format!("expected `i j`, found `{line}`")));
        }
        let mut ids = [0usize; 2];
        for (slot, tok) in ids.iter_mut().zip(&toks) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(path, ln, format!("`{tok}` is not a node index")))?;
            if *slot >= n {
                return Err(parse_err(path, ln, format!("node {slot} out of range for n = {n}")));
            }
        }
        edges.push((ids[0], ids[1]));
    }
    Adjacency::from_edges(n, edges)
}

fn read_labels(path: &Path, n: usize, k: usize) -> Result<Vec<usize>> {
    let text = read(path)?;
    let mut labels = Vec::with_capacity(n);
    for (ln, line) in lines(&text) {
        let v: usize = line
            .parse()
            .map_err(|_| parse_err(path, ln, format!("`{line}` is not a non-negative integer label")))?;
        if v >= k {
            return Err(parse_err(path, ln, format!("label {v} outside [0, k = {k})")));
        }
        labels.push(v);
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            file: path.to_path_buf(),
            expected: format!("n = {n} labels"),
            found: format!("{} labels", labels.len()),
        });
    }
    Ok(labels)
}

/// Rescales each column to [0, 1]; constant columns become 0.
pub fn min_max_scale(x: &Tensor) -> Tensor {
    let (n, d) = x.shape();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for r in x.row_iter() {
        for j in 0..d {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    Tensor::from_fn(n, d, |i, j| {
        let span = hi[j] - lo[j];
        if span > 0.0 {
            (x.get(i, j) - lo[j]) / span
        } else {
            0.0
        }
    })
}

/// Parses a dataset directory. Adjacencies are symmetrized, deduplicated,
/// and given self-loops.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let manifest = DatasetManifest::read(dir)?;
    let features = read_features(&dir.join(&manifest.features), manifest.n, manifest.d)?;
    let features = if manifest.scale_features {
        min_max_scale(&features)
    } else {
        features
    };
    let views = manifest
        .views
        .iter()
        .map(|v| read_edges(&dir.join(v), manifest.n))
        .collect::<Result<Vec<_>>>()?;
    let labels = manifest
        .labels
        .as_ref()
        .map(|l| read_labels(&dir.join(l), manifest.n, manifest.k))
        .transpose()?;
    let graph = MultiViewGraph::new(views, features, labels)?;
    Ok(Dataset { manifest, graph })
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `graph` as a dataset directory. Features are written with the
/// shortest round-trip decimal representation, so loading reproduces them
/// exactly when `scale_features` is off.
pub fn write_dataset(dir: impl AsRef<Path>, name: &str, k: usize, graph: &MultiViewGraph) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = DatasetManifest {
        name: name.to_string(),
        n: graph.n(),
        d: graph.feature_dim(),
        k,
        views: (1..=graph.num_views()).map(|v| format!("view_{v}.txt")).collect(),
        features: "features.csv".into(),
        labels: graph.labels.as_ref().map(|_| "labels.txt".into()),
        scale_features: false,
    };

    let mut buf = String::new();
    for r in graph.features.row_iter() {
        for (j, v) in r.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            write!(buf, "{v}").unwrap();
        }
        buf.push('\n');
    }
    write(dir.join(&manifest.features), &buf)?;

    for (file, a) in manifest.views.iter().zip(&graph.views) {
        buf.clear();
        for (i, j) in a.edges() {
            writeln!(buf, "{i} {j}").unwrap();
        }
        write(dir.join(file), &buf)?;
    }

    if let (Some(file), Some(labels)) = (&manifest.labels, &graph.labels) {
        buf.clear();
        for l in labels {
            writeln!(buf, "{l}").unwrap();
        }
        write(dir.join(file), &buf)?;
    }
    write(dir.join(MANIFEST_FILE), &manifest.to_json())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaffold(dir: &Path, n: usize, features: &str, edges: &str, labels: Option<&str>) {
        let m = DatasetManifest {
            name: "t".into(),
            n,
            d: 2,
            k: 2,
            views: vec!["a.txt".into()],
            features: "x.csv".into(),
            labels: labels.map(|_| "y.txt".into()),
            scale_features: false,
        };
        std::fs::write(dir.join(MANIFEST_FILE), m.to_json()).unwrap();
        std::fs::write(dir.join("x.csv"), features).unwrap();
        std::fs::write(dir.join("a.txt"), edges).unwrap();
        if let Some(l) = labels {
            std::fs::write(dir.join("y.txt"), l).unwrap();
        }
    }

    #[test]
    fn extra_feature_row_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        scaffold(dir.path(), 3, "0,1\n1,0\n0.5,0.5\n1,1\n", "0 1\n", None);
        let err = load_dataset(dir.path()).unwrap_err();
        match &err {
            Error::DimensionMismatch { file, .. } => assert!(file.ends_with("x.csv")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("x.csv"));
    }

    #[test]
    fn both_directions_collapse_to_one_edge() {
        let dir = tempfile::tempdir().unwrap();
        scaffold(dir.path(), 3, "0,1\n1,0\n0.5,0.5\n", "1 0\n0 1\n1 0\n", Some("0\n1\n1\n"));
        let ds = load_dataset(dir.path()).unwrap();
        let a = &ds.graph.views[0];
        assert!(a.is_symmetric(0.0));
        assert_eq!(a.edges(), vec![(0, 1)]);
        for i in 0..3 {
            assert_eq!(a.matrix().get(i, i), 1.0);
        }
        assert_eq!(ds.graph.labels, Some(vec![0, 1, 1]));
    }

    #[test]
    fn labels_are_optional() {
        let dir = tempfile::tempdir().unwrap();
        scaffold(dir.path(), 2, "0,1\n1,0\n", "", None);
        let ds = load_dataset(dir.path()).unwrap();
        assert!(ds.graph.labels.is_none());
    }

    #[test]
    fn distinct_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        scaffold(dir.path(), 2, "0,1\n1,0\n", "0 1\n", Some("0\nx\n"));
        match load_dataset(dir.path()).unwrap_err() {
            Error::Parse { file, line, .. } => {
                assert!(file.ends_with("y.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }

        scaffold(dir.path(), 2, "0,1\n1,0\n", "0 1\n0 7\n", None);
        match load_dataset(dir.path()).unwrap_err() {
            Error::Parse { file, line, .. } => {
                assert!(file.ends_with("a.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }

        scaffold(dir.path(), 2, "0,1\n1,abc\n", "0 1\n", None);
        assert!(matches!(load_dataset(dir.path()), Err(Error::Parse { line: 2, .. })));

        scaffold(dir.path(), 2, "0,1\n1,0\n", "0 1\n", None);
        std::fs::remove_file(dir.path().join("a.txt")).unwrap();
        match load_dataset(dir.path()).unwrap_err() {
            Error::MissingFile(p) => assert!(p.ends_with("a.txt")),
            other => panic!("unexpected {other:?}"),
        }

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(empty.path()), Err(Error::MissingFile(_))));
    }

    #[test]
    fn scaling_maps_columns_to_unit_interval() {
        let x = Tensor::from_rows(&[[1.0, 5.0, 2.0], [3.0, 5.0, -2.0]]).unwrap();
        let s = min_max_scale(&x);
        assert_eq!(s.data(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    }
}
