use super::Mat;
use crate::instance::Instance;

/// Width of the raw node features.
pub const FEATURE_DIM: usize = 4;

/// Complete bipartite product/segment graph of an instance.
///
/// Nodes `0..n` are products and `n..n+m` are segments. Forward edge
/// `j * m + k` runs from product `j` to segment `k`; backward edge with the
/// same index is its reverse and carries the same attribute `u[k][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphData {
    pub n: usize,
    pub m: usize,
    pub features: Mat,
    pub forward_edges: Vec<(usize, usize)>,
    pub backward_edges: Vec<(usize, usize)>,
    pub edge_attr: Vec<f64>,
    /// One entry per node, true for products.
    pub product_mask: Vec<bool>,
}

impl GraphData {
    pub fn num_nodes(&self) -> usize {
        self.n + self.m
    }

    pub fn edge_index(&self, j: usize, k: usize) -> usize {
        j * self.m + k
    }
}

pub fn build_graph(inst: &Instance) -> GraphData {
    let (n, m) = (inst.n(), inst.m());
    let mut features = Mat::zeros(n + m, FEATURE_DIM);
    for j in 0..n {
        let mean = (0..m).map(|k| inst.utility()[k][j]).sum::<f64>() / m as f64;
        features.set(j, 0, inst.unit_cost()[j]);
        features.set(j, 1, mean);
    }
    for k in 0..m {
        features.set(n + k, 2, inst.alpha()[k]);
        features.set(n + k, 3, inst.serve_cost()[k]);
    }
    let mut forward_edges = Vec::with_capacity(n * m);
    let mut backward_edges = Vec::with_capacity(n * m);
    let mut edge_attr = Vec::with_capacity(n * m);
    for j in 0..n {
        for k in 0..m {
            forward_edges.push((j, n + k));
            backward_edges.push((n + k, j));
            edge_attr.push(inst.utility()[k][j]);
        }
    }
    GraphData {
        n,
        m,
        features,
        forward_edges,
        backward_edges,
        edge_attr,
        product_mask: (0..n + m).map(|i| i < n).collect(),
    }
}
