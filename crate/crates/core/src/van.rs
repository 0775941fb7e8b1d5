//! Leontief system and value-added networks.
//!
//! The global value-added network is `G = diag(V) L diag(F)`: entry `G_ij`
//! is value added in node `i` induced by final demand for the output of
//! node `j`. The international network zeroes every within-country block.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ingest::IoTable;
use crate::network::{FlowNetwork, NetworkKind, NodeLabel};

#[derive(Clone, Debug)]
pub struct LeontiefSystem {
    pub nodes: Vec<NodeLabel>,
    pub n_sectors: usize,
    /// Technical coefficients `Z_ij / T_j`; zero columns where `T_j = 0`.
    pub a: DMatrix<f64>,
    /// `(I - A)^-1`.
    pub l: DMatrix<f64>,
    /// Value-added coefficients `VA_i / T_i`.
    pub v: Vec<f64>,
    /// Total final demand per node.
    pub f: Vec<f64>,
}

impl LeontiefSystem {
    /// Max-norm of `L (I - A) - I`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.a.nrows();
        let i_minus_a = DMatrix::identity(n, n) - &self.a;
        (&self.l * i_minus_a - DMatrix::identity(n, n)).amax()
    }
}

/// Upper bound on the spectral radius of `|A|` via Collatz-Wielandt ratios.
/// Returns `Ok(bound)` once the bound is below one, or an error once the
/// lower bound reaches one.
pub fn spectral_radius_bound(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let abs = a.abs();
    let col_bound = (0..n).map(|j| abs.column(j).sum()).fold(0.0, f64::max);
    if col_bound < 1.0 {
        return Ok(col_bound);
    }
    let row_bound = (0..n).map(|i| abs.row(i).sum()).fold(0.0, f64::max);
    if row_bound < 1.0 {
        return Ok(row_bound);
    }
    let mut x = nalgebra::DVector::from_element(n, 1.0);
    let mut upper = row_bound;
    for _ in 0..2000 {
        // A small floor keeps the ratios defined on reducible matrices.
        let y = &abs * &x + nalgebra::DVector::from_element(n, 1e-300);
        let ratios = y.iter().zip(x.iter()).map(|(yi, xi)| yi / xi);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        upper = upper.min(hi);
        if upper < 1.0 {
            return Ok(upper);
        }
        if lo >= 1.0 {
            return Err(Error::SpectralRadius(lo));
        }
        let norm = y.amax();
        x = y / norm;
    }
    Err(Error::SpectralRadius(upper))
}

pub fn build_leontief(table: &IoTable) -> Result<LeontiefSystem> {
    let n = table.n_nodes();
    let mut a = table.z.clone();
    for j in 0..n {
        let tj = table.t[j];
        if tj == 0.0 {
            a.column_mut(j).fill(0.0);
        } else {
            a.column_mut(j).scale_mut(1.0 / tj);
        }
    }
    let v: Vec<f64> = (0..n)
        .map(|i| {
            if table.t[i] == 0.0 {
                0.0
            } else {
                table.va[i] / table.t[i]
            }
        })
        .collect();
    if let Some(i) = v.iter().position(|vi| *vi > 1.0 + 1e-9) {
        log::warn!(
            "year {}: value-added share {:.6} > 1 at {}",
            table.year,
            v[i],
            table.node_label(i)
        );
    }

    spectral_radius_bound(&a)?;
    let l = leontief_inverse(&a)?;
    Ok(LeontiefSystem {
        nodes: table.node_labels(),
        n_sectors: table.n_sectors(),
        a,
        l,
        v,
        f: table.final_demand_totals(),
    })
}

/// Dense LU inverse of `I - A`.
pub fn leontief_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let i_minus_a = DMatrix::identity(n, n) - a;
    i_minus_a.lu().try_inverse().ok_or(Error::Singular)
}

/// `G = diag(V) L diag(F)`. Non-positive entries are stored as zero; the
/// second return value counts strictly negative entries that were clamped.
pub fn build_gvan(system: &LeontiefSystem) -> (FlowNetwork, usize) {
    let n = system.l.nrows();
    let mut clamped = 0usize;
    let weights = DMatrix::from_fn(n, n, |i, j| {
        let g = system.v[i] * system.l[(i, j)] * system.f[j];
        if g > 0.0 {
            g
        } else {
            if g < 0.0 {
                clamped += 1;
            }
            0.0
        }
    });
    if clamped > 0 {
        log::warn!("{clamped} negative induced value-added flows clamped to zero");
    }
    let network = FlowNetwork {
        nodes: system.nodes.clone(),
        weights,
        kind: NetworkKind::Gvan,
    };
    (network, clamped)
}

/// Zeroes every `n_sectors x n_sectors` block on the diagonal.
pub fn build_ivan(gvan: &FlowNetwork, n_sectors: usize) -> Result<FlowNetwork> {
    let n = gvan.len();
    if n_sectors == 0 || !n.is_multiple_of(n_sectors) {
        return Err(Error::InvalidArgument(format!(
            "{n} nodes cannot be split into blocks of {n_sectors} sectors"
        )));
    }
    let mut weights = gvan.weights.clone();
    for block in 0..n / n_sectors {
        let start = block * n_sectors;
        weights.view_mut((start, start), (n_sectors, n_sectors)).fill(0.0);
    }
    Ok(FlowNetwork {
        nodes: gvan.nodes.clone(),
        weights,
        kind: NetworkKind::Ivan,
    })
}

/// Keeps the `k` heaviest links. Equal weights are ordered by
/// `(source, target)` so the retained set is nested in `k`.
pub fn threshold_top_k(network: &FlowNetwork, k: usize) -> Result<FlowNetwork> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut links = network.links();
    if k >= links.len() {
        if k > links.len() {
            log::warn!(
                "threshold k = {k} exceeds the {} links of the network; keeping all",
                links.len()
            );
        }
        return Ok(network.clone());
    }
    links.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    let n = network.len();
    let mut weights = DMatrix::zeros(n, n);
    for &(i, j, w) in &links[..k] {
        weights[(i, j)] = w;
    }
    Ok(FlowNetwork {
        nodes: network.nodes.clone(),
        weights,
        kind: network.kind.clone(),
    })
}
