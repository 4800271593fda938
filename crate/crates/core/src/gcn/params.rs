use std::fmt::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mat, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::instance::format::{fmt_f64, parse_row};

pub const DEFAULT_HIDDEN: usize = 128;
pub const MODEL_HEADER: &str = "bundle-gcn v1";

/// Two-layer node update `affine -> ReLU -> affine`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub w1: Mat,
    pub b1: Mat,
    pub w2: Mat,
    pub b2: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub fw: Mlp,
    pub bw: Mlp,
}

/// Scalar-to-scalar edge correction `w2 . ReLU(w1 z + b1) + b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMlp {
    pub w1: Mat,
    pub b1: Mat,
    pub w2: Mat,
    pub b2: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    pub d_hidden: usize,
    pub layers: [LayerParams; 2],
    pub bilinear: Mat,
    pub edge: EdgeMlp,
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize) -> Mat {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..bound))
        .collect();
    Mat::from_vec(rows, cols, data)
}

impl Mlp {
    fn init(rng: &mut ChaCha8Rng, d_in: usize, d_hidden: usize) -> Self {
        Mlp {
            w1: uniform(rng, d_in, d_hidden, d_in),
            b1: uniform(rng, 1, d_hidden, d_in),
            w2: uniform(rng, d_hidden, d_hidden, d_hidden),
            b2: uniform(rng, 1, d_hidden, d_hidden),
        }
    }

    fn zeros_like(&self) -> Self {
        Mlp {
            w1: Mat::zeros(self.w1.rows, self.w1.cols),
            b1: Mat::zeros(1, self.b1.cols),
            w2: Mat::zeros(self.w2.rows, self.w2.cols),
            b2: Mat::zeros(1, self.b2.cols),
        }
    }
}

impl GcnParams {
    /// Fan-in scaled uniform initialization.
    pub fn init(d_hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l1 = LayerParams {
            fw: Mlp::init(&mut rng, FEATURE_DIM, d_hidden),
            bw: Mlp::init(&mut rng, FEATURE_DIM, d_hidden),
        };
        let l2 = LayerParams {
            fw: Mlp::init(&mut rng, d_hidden, d_hidden),
            bw: Mlp::init(&mut rng, d_hidden, d_hidden),
        };
        let bilinear = uniform(&mut rng, d_hidden, d_hidden, d_hidden);
        let edge = EdgeMlp {
            w1: uniform(&mut rng, 1, d_hidden, 1),
            b1: uniform(&mut rng, 1, d_hidden, 1),
            w2: uniform(&mut rng, 1, d_hidden, d_hidden),
            b2: uniform(&mut rng, 1, 1, d_hidden),
        };
        GcnParams {
            d_hidden,
            layers: [l1, l2],
            bilinear,
            edge,
        }
    }

    pub fn zeros_like(&self) -> Self {
        GcnParams {
            d_hidden: self.d_hidden,
            layers: [
                LayerParams {
                    fw: self.layers[0].fw.zeros_like(),
                    bw: self.layers[0].bw.zeros_like(),
                },
                LayerParams {
                    fw: self.layers[1].fw.zeros_like(),
                    bw: self.layers[1].bw.zeros_like(),
                },
            ],
            bilinear: Mat::zeros(self.d_hidden, self.d_hidden),
            edge: EdgeMlp {
                w1: Mat::zeros(1, self.d_hidden),
                b1: Mat::zeros(1, self.d_hidden),
                w2: Mat::zeros(1, self.d_hidden),
                b2: Mat::zeros(1, 1),
            },
        }
    }

    pub fn tensor_names() -> Vec<String> {
        let mut names = Vec::new();
        for layer in 1..=2 {
            for dir in ["fw", "bw"] {
                for t in ["w1", "b1", "w2", "b2"] {
                    names.push(format!("layer{layer}.{dir}.{t}"));
                }
            }
        }
        names.push("bilinear".into());
        for t in ["w1", "b1", "w2", "b2"] {
            names.push(format!("edge.{t}"));
        }
        names
    }

    /// Every tensor in [`GcnParams::tensor_names`] order.
    pub fn tensors(&self) -> Vec<&Mat> {
        let mut out = Vec::with_capacity(21);
        for layer in &self.layers {
            for mlp in [&layer.fw, &layer.bw] {
                out.extend([&mlp.w1, &mlp.b1, &mlp.w2, &mlp.b2]);
            }
        }
        out.push(&self.bilinear);
        out.extend([&self.edge.w1, &self.edge.b1, &self.edge.w2, &self.edge.b2]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        let mut out = Vec::with_capacity(21);
        for layer in self.layers.iter_mut() {
            let LayerParams { fw, bw } = layer;
            for mlp in [fw, bw] {
                let Mlp { w1, b1, w2, b2 } = mlp;
                out.extend([w1, b1, w2, b2]);
            }
        }
        out.push(&mut self.bilinear);
        let EdgeMlp { w1, b1, w2, b2 } = &mut self.edge;
        out.extend([w1, b1, w2, b2]);
        out
    }

    /// Tensor shapes implied by `d_hidden`, in [`GcnParams::tensor_names`] order.
    pub fn expected_shapes(d_hidden: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(21);
        for d_in in [FEATURE_DIM, d_hidden] {
            for _ in 0..2 {
                out.extend([
                    (d_in, d_hidden),
                    (1, d_hidden),
                    (d_hidden, d_hidden),
                    (1, d_hidden),
                ]);
            }
        }
        out.push((d_hidden, d_hidden));
        out.extend([(1, d_hidden), (1, d_hidden), (1, d_hidden), (1, 1)]);
        out
    }

    pub fn shapes_ok(&self) -> bool {
        let shapes = Self::expected_shapes(self.d_hidden);
        self.tensors()
            .iter()
            .zip(&shapes)
            .all(|(t, &(r, c))| t.rows == r && t.cols == c && t.data.len() == r * c)
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MODEL_HEADER}").unwrap();
        writeln!(out, "d_hidden = {}", self.d_hidden).unwrap();
        for (name, t) in Self::tensor_names().iter().zip(self.tensors()) {
            writeln!(out, "tensor {name} {} {}", t.rows, t.cols).unwrap();
            for i in 0..t.rows {
                let row: Vec<String> = t.row(i).iter().map(|&v| fmt_f64(v)).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| {
                Error::parse(0, format!("unexpected end of document, expected {what}"))
            })
        };
        let (line, header) = next("header")?;
        if header != MODEL_HEADER {
            return Err(Error::parse(
                line,
                format!("expected header `{MODEL_HEADER}`"),
            ));
        }
        let (line, dim) = next("d_hidden")?;
        let d_hidden: usize = dim
            .strip_prefix("d_hidden")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .and_then(|v| v.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::parse(line, "expected `d_hidden = <positive integer>`"))?;
        let mut params = GcnParams::init(d_hidden, 0).zeros_like();
        let names = Self::tensor_names();
        for (name, t) in names.iter().zip(params.tensors_mut()) {
            let (line, decl) = next("tensor declaration")?;
            let parts: Vec<&str> = decl.split_whitespace().collect();
            let expected = [t.rows.to_string(), t.cols.to_string()];
            if parts.len() != 4 || parts[0] != "tensor" || parts[1] != name {
                return Err(Error::parse(
                    line,
                    format!("expected `tensor {name} <rows> <cols>`"),
                ));
            }
            if parts[2] != expected[0] || parts[3] != expected[1] {
                return Err(Error::parse(
                    line,
                    format!(
                        "tensor {name} has shape {}x{}, expected {}x{}",
                        parts[2], parts[3], t.rows, t.cols
                    ),
                ));
            }
            for i in 0..t.rows {
                let (line, row) = next("tensor row")?;
                let values = parse_row(line, row)?;
                if values.len() != t.cols {
                    return Err(Error::parse(
                        line,
                        format!(
                            "row of {name} has {} values, expected {}",
                            values.len(),
                            t.cols
                        ),
                    ));
                }
                t.row_mut(i).copy_from_slice(&values);
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::parse(line, "trailing content after the last tensor"));
        }
        Ok(params)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.serialize()).map_err(|e| Error::io(path, e))
    }
}
