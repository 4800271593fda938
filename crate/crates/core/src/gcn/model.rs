use rand::Rng;

use super::mat::Tr;
use super::{GcnParams, GraphData, LabeledExample, Mat, Mlp, ProbMatrix};
use crate::error::{Error, Result};

/// Offset added to every message.
pub const EPSILON: f64 = 1e-7;
pub const DEFAULT_DROPOUT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active.
    Train,
    Eval,
}

/// One directional pass restricted to the nodes whose rows survive fusion.
struct DirCache {
    dst: Vec<usize>,
    /// Incoming slots grouped by destination: `(source node, attribute)`.
    slots: Vec<(usize, f64)>,
    ranges: Vec<(usize, usize)>,
    pre: Mat,
    phi: Mat,
    weight: Mat,
    agg: Mat,
    h: Mat,
    z1: Mat,
    a1: Mat,
}

struct LayerCache {
    fw: DirCache,
    bw: DirCache,
    fused: Mat,
    /// Dropout multipliers (`0` or `1 / (1 - p)`), train mode only.
    scale: Option<Mat>,
    out: Mat,
}

struct Cache {
    layers: Vec<LayerCache>,
    edge_pre: Mat,
    q: Mat,
}

fn relu_inplace(m: &mut Mat) {
    m.data.iter_mut().for_each(|x| *x = x.max(0.0));
}

fn gather_rows(x: &Mat, rows: &[usize]) -> Mat {
    let mut out = Mat::zeros(rows.len(), x.cols);
    for (r, &i) in rows.iter().enumerate() {
        out.row_mut(r).copy_from_slice(x.row(i));
    }
    out
}

fn dir_forward(
    mlp: &Mlp,
    x: &Mat,
    g: &GraphData,
    edges: &[(usize, usize)],
    products: bool,
) -> (DirCache, Mat) {
    let nodes = g.num_nodes();
    let dst: Vec<usize> = (0..nodes)
        .filter(|&i| g.product_mask[i] == products)
        .collect();
    let mut local = vec![usize::MAX; nodes];
    for (r, &i) in dst.iter().enumerate() {
        local[i] = r;
    }
    let mut grouped: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dst.len()];
    for (e, &(src, to)) in edges.iter().enumerate() {
        if local[to] != usize::MAX {
            grouped[local[to]].push((src, g.edge_attr[e]));
        }
    }
    let mut slots = Vec::with_capacity(edges.len());
    let mut ranges = Vec::with_capacity(dst.len());
    for group in grouped {
        let start = slots.len();
        slots.extend(group);
        ranges.push((start, slots.len()));
    }
    let d = x.cols;
    let mut pre = Mat::zeros(slots.len(), d);
    for (s, &(src, z)) in slots.iter().enumerate() {
        for (p, xv) in pre.row_mut(s).iter_mut().zip(x.row(src)) {
            *p = xv + z;
        }
    }
    let mut phi = pre.clone();
    phi.data.iter_mut().for_each(|v| *v = v.max(0.0) + EPSILON);
    let mut weight = Mat::zeros(slots.len(), d);
    let mut agg = Mat::zeros(dst.len(), d);
    for (r, &(lo, hi)) in ranges.iter().enumerate() {
        for c in 0..d {
            let mx = (lo..hi)
                .map(|s| phi.get(s, c))
                .fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for s in lo..hi {
                let e = (phi.get(s, c) - mx).exp();
                weight.set(s, c, e);
                total += e;
            }
            let mut acc = 0.0;
            for s in lo..hi {
                let w = weight.get(s, c) / total;
                weight.set(s, c, w);
                acc += w * phi.get(s, c);
            }
            debug_assert!(
                hi == lo || ((lo..hi).map(|s| weight.get(s, c)).sum::<f64>() - 1.0).abs() < 1e-9,
                "softmax weights must sum to one"
            );
            agg.set(r, c, acc);
        }
    }
    let mut h = gather_rows(x, &dst);
    h.add_assign(&agg);
    let mut z1 = Mat::mul(&h, Tr::N, &mlp.w1, Tr::N);
    z1.add_row_vec(&mlp.b1);
    let mut a1 = z1.clone();
    relu_inplace(&mut a1);
    let mut o = Mat::mul(&a1, Tr::N, &mlp.w2, Tr::N);
    o.add_row_vec(&mlp.b2);
    let cache = DirCache {
        dst,
        slots,
        ranges,
        pre,
        phi,
        weight,
        agg,
        h,
        z1,
        a1,
    };
    (cache, o)
}

fn dir_backward(mlp: &Mlp, grad: &mut Mlp, c: &DirCache, d_o: &Mat, dx: &mut Mat) {
    Mat::gemm(&mut grad.w2, &c.a1, Tr::T, d_o, Tr::N, 1.0);
    d_o.col_sums_into(&mut grad.b2);
    let mut dz1 = Mat::mul(d_o, Tr::N, &mlp.w2, Tr::T);
    for (g, z) in dz1.data.iter_mut().zip(&c.z1.data) {
        if *z <= 0.0 {
            *g = 0.0;
        }
    }
    Mat::gemm(&mut grad.w1, &c.h, Tr::T, &dz1, Tr::N, 1.0);
    dz1.col_sums_into(&mut grad.b1);
    let dh = Mat::mul(&dz1, Tr::N, &mlp.w1, Tr::T);
    let d = dh.cols;
    for (r, &i) in c.dst.iter().enumerate() {
        for (t, v) in dx.row_mut(i).iter_mut().zip(dh.row(r)) {
            *t += v;
        }
        let (lo, hi) = c.ranges[r];
        for s in lo..hi {
            let src = c.slots[s].0;
            for col in 0..d {
                if c.pre.get(s, col) <= 0.0 {
                    continue;
                }
                let w = c.weight.get(s, col);
                let dphi = dh.get(r, col) * w * (1.0 + c.phi.get(s, col) - c.agg.get(r, col));
                dx.data[src * d + col] += dphi;
            }
        }
    }
}

fn layer_forward<R: Rng>(
    params: &super::LayerParams,
    x: &Mat,
    g: &GraphData,
    mode: Mode,
    dropout: f64,
    rng: &mut R,
) -> LayerCache {
    let (fw, o_fw) = dir_forward(&params.fw, x, g, &g.forward_edges, false);
    let (bw, o_bw) = dir_forward(&params.bw, x, g, &g.backward_edges, true);
    let hidden = o_fw.cols;
    let mut fused = Mat::zeros(g.num_nodes(), hidden);
    for (r, &i) in fw.dst.iter().enumerate() {
        fused.row_mut(i).copy_from_slice(o_fw.row(r));
    }
    for (r, &i) in bw.dst.iter().enumerate() {
        fused.row_mut(i).copy_from_slice(o_bw.row(r));
    }
    let mut out = fused.clone();
    relu_inplace(&mut out);
    let scale = if mode == Mode::Train && dropout > 0.0 {
        let keep = 1.0 / (1.0 - dropout);
        let mut s = Mat::zeros(out.rows, out.cols);
        for v in s.data.iter_mut() {
            *v = if rng.gen::<f64>() < dropout {
                0.0
            } else {
                keep
            };
        }
        for (o, k) in out.data.iter_mut().zip(&s.data) {
            *o *= k;
        }
        Some(s)
    } else {
        None
    };
    LayerCache {
        fw,
        bw,
        fused,
        scale,
        out,
    }
}

fn layer_backward(
    params: &super::LayerParams,
    grad: &mut super::LayerParams,
    c: &LayerCache,
    d_out: &Mat,
    d_in_cols: usize,
) -> Mat {
    let mut d_fused = d_out.clone();
    if let Some(s) = &c.scale {
        for (g, k) in d_fused.data.iter_mut().zip(&s.data) {
            *g *= k;
        }
    }
    for (g, f) in d_fused.data.iter_mut().zip(&c.fused.data) {
        if *f <= 0.0 {
            *g = 0.0;
        }
    }
    let mut dx = Mat::zeros(d_out.rows, d_in_cols);
    let fw_rows = gather_rows(&d_fused, &c.fw.dst);
    dir_backward(&params.fw, &mut grad.fw, &c.fw, &fw_rows, &mut dx);
    let bw_rows = gather_rows(&d_fused, &c.bw.dst);
    dir_backward(&params.bw, &mut grad.bw, &c.bw, &bw_rows, &mut dx);
    dx
}

fn check_shapes(params: &GcnParams, g: &GraphData) -> Result<()> {
    let ok_graph = g.features.rows == g.num_nodes()
        && g.features.cols == super::FEATURE_DIM
        && g.forward_edges.len() == g.edge_attr.len()
        && g.backward_edges.len() == g.edge_attr.len()
        && g.product_mask.len() == g.num_nodes()
        && g.edge_attr.len() == g.n * g.m;
    if !ok_graph {
        return Err(Error::arg("graph arrays have inconsistent shapes"));
    }
    if !params.shapes_ok() {
        return Err(Error::arg("parameter shapes do not match d_hidden"));
    }
    Ok(())
}

fn forward_cached<R: Rng>(
    params: &GcnParams,
    g: &GraphData,
    mode: Mode,
    dropout: f64,
    rng: &mut R,
) -> Result<(Mat, Cache)> {
    check_shapes(params, g)?;
    let l1 = layer_forward(&params.layers[0], &g.features, g, mode, dropout, rng);
    let l2 = layer_forward(&params.layers[1], &l1.out, g, mode, dropout, rng);
    let (n, m) = (g.n, g.m);
    let yp = gather_rows(&l2.out, &(0..n).collect::<Vec<_>>());
    let ys = gather_rows(&l2.out, &(n..n + m).collect::<Vec<_>>());
    let q = Mat::mul(&yp, Tr::N, &params.bilinear, Tr::N);
    let mut logits = Mat::mul(&q, Tr::N, &ys, Tr::T);
    let h = params.d_hidden;
    let mut edge_pre = Mat::zeros(n * m, h);
    let e = &params.edge;
    for j in 0..n {
        for k in 0..m {
            let idx = g.edge_index(j, k);
            let z = g.edge_attr[idx];
            let mut val = e.b2.data[0];
            for c in 0..h {
                let p = e.w1.data[c] * z + e.b1.data[c];
                edge_pre.set(idx, c, p);
                val += e.w2.data[c] * p.max(0.0);
            }
            logits.data[j * m + k] += val;
        }
    }
    Ok((
        logits,
        Cache {
            layers: vec![l1, l2],
            edge_pre,
            q,
        },
    ))
}

/// Edge logits `E[j][k]` as an `n x m` matrix.
pub fn forward<R: Rng>(params: &GcnParams, g: &GraphData, mode: Mode, rng: &mut R) -> Result<Mat> {
    forward_with(params, g, mode, DEFAULT_DROPOUT, rng)
}

pub fn forward_with<R: Rng>(
    params: &GcnParams,
    g: &GraphData,
    mode: Mode,
    dropout: f64,
    rng: &mut R,
) -> Result<Mat> {
    forward_cached(params, g, mode, dropout, rng).map(|(e, _)| e)
}

/// Node states after each layer, for inspection.
pub fn layer_outputs(params: &GcnParams, g: &GraphData) -> Result<[Mat; 2]> {
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    let (_, cache) = forward_cached(params, g, Mode::Eval, 0.0, &mut rng)?;
    let mut it = cache.layers.into_iter().map(|l| l.out);
    Ok([it.next().unwrap(), it.next().unwrap()])
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross-entropy of a logit.
pub fn bce_with_logit(x: f64, target: f64) -> f64 {
    x.max(0.0) - x * target + (-x.abs()).exp().ln_1p()
}

pub fn predict_probs(params: &GcnParams, g: &GraphData) -> Result<ProbMatrix> {
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    let logits = forward_with(params, g, Mode::Eval, 0.0, &mut rng)?;
    let values = (0..g.m)
        .map(|k| (0..g.n).map(|j| logistic(logits.get(j, k))).collect())
        .collect();
    Ok(ProbMatrix::from_rows_unchecked(values))
}

/// Edges of one example that enter a loss, as `(product, segment)` pairs.
#[derive(Clone, Debug)]
pub struct BatchPart<'a> {
    pub example: &'a LabeledExample,
    pub edges: Vec<(usize, usize)>,
}

impl<'a> BatchPart<'a> {
    pub fn all_edges(example: &'a LabeledExample) -> Self {
        let (n, m) = (example.graph.n, example.graph.m);
        BatchPart {
            example,
            edges: (0..n).flat_map(|j| (0..m).map(move |k| (j, k))).collect(),
        }
    }
}

/// Mean edge BCE over every edge of every example, and its gradient.
pub fn loss_and_grad<R: Rng>(
    params: &GcnParams,
    batch: &[LabeledExample],
    mode: Mode,
    rng: &mut R,
) -> Result<(f64, GcnParams)> {
    let parts: Vec<BatchPart> = batch.iter().map(BatchPart::all_edges).collect();
    loss_and_grad_parts(params, &parts, mode, DEFAULT_DROPOUT, rng)
}

/// Mean BCE over the listed edges. Each example is run through the full
/// network once; its dropout masks come from `rng` in batch order.
pub fn loss_and_grad_parts<R: Rng>(
    params: &GcnParams,
    parts: &[BatchPart],
    mode: Mode,
    dropout: f64,
    rng: &mut R,
) -> Result<(f64, GcnParams)> {
    let total: usize = parts.iter().map(|p| p.edges.len()).sum();
    if total == 0 {
        return Err(Error::arg("batch contains no edges"));
    }
    let mut grad = params.zeros_like();
    let mut loss = 0.0;
    let inv = 1.0 / total as f64;
    let h = params.d_hidden;
    for part in parts {
        let g = &part.example.graph;
        let (n, m) = (g.n, g.m);
        let (logits, cache) = forward_cached(params, g, mode, dropout, rng)?;
        let mut d_e = Mat::zeros(n, m);
        for &(j, k) in &part.edges {
            let x = logits.get(j, k);
            let t = part.example.target[k][j] as f64;
            loss += bce_with_logit(x, t) * inv;
            d_e.data[j * m + k] += (logistic(x) - t) * inv;
        }
        let e = &params.edge;
        for j in 0..n {
            for k in 0..m {
                let d = d_e.get(j, k);
                if d == 0.0 {
                    continue;
                }
                let idx = g.edge_index(j, k);
                let z = g.edge_attr[idx];
                grad.edge.b2.data[0] += d;
                for c in 0..h {
                    let p = cache.edge_pre.get(idx, c);
                    if p > 0.0 {
                        grad.edge.w2.data[c] += d * p;
                        let dp = d * e.w2.data[c];
                        grad.edge.w1.data[c] += dp * z;
                        grad.edge.b1.data[c] += dp;
                    }
                }
            }
        }
        let l2 = &cache.layers[1];
        let yp = gather_rows(&l2.out, &(0..n).collect::<Vec<_>>());
        let ys = gather_rows(&l2.out, &(n..n + m).collect::<Vec<_>>());
        let dq = Mat::mul(&d_e, Tr::N, &ys, Tr::N);
        let dys = Mat::mul(&d_e, Tr::T, &cache.q, Tr::N);
        Mat::gemm(&mut grad.bilinear, &yp, Tr::T, &dq, Tr::N, 1.0);
        let dyp = Mat::mul(&dq, Tr::N, &params.bilinear, Tr::T);
        let mut d_out = Mat::zeros(n + m, h);
        for j in 0..n {
            d_out.row_mut(j).copy_from_slice(dyp.row(j));
        }
        for k in 0..m {
            d_out.row_mut(n + k).copy_from_slice(dys.row(k));
        }
        let (g0, g1) = grad.layers.split_at_mut(1);
        let d_mid = layer_backward(&params.layers[1], &mut g1[0], l2, &d_out, h);
        let d_in = g.features.cols;
        layer_backward(
            &params.layers[0],
            &mut g0[0],
            &cache.layers[0],
            &d_mid,
            d_in,
        );
    }
    Ok((loss, grad))
}

/// Mean edge BCE in eval mode.
pub fn eval_loss(params: &GcnParams, examples: &[LabeledExample]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for ex in examples {
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let logits = forward_with(params, &ex.graph, Mode::Eval, 0.0, &mut rng)?;
        for k in 0..ex.graph.m {
            for j in 0..ex.graph.n {
                total += bce_with_logit(logits.get(j, k), ex.target[k][j] as f64);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::arg("no examples to evaluate"));
    }
    Ok(total / count as f64)
}

/// Fraction of edges whose thresholded probability (`>= 0.5`) matches the label.
pub fn edge_accuracy(params: &GcnParams, examples: &[LabeledExample]) -> Result<f64> {
    let mut hits = 0usize;
    let mut count = 0usize;
    for ex in examples {
        let probs = predict_probs(params, &ex.graph)?;
        for k in 0..ex.graph.m {
            for j in 0..ex.graph.n {
                let predicted = probs.get(k, j) >= 0.5;
                hits += (predicted == (ex.target[k][j] == 1)) as usize;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::arg("no examples to evaluate"));
    }
    Ok(hits as f64 / count as f64)
}
