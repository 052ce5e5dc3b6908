//! Construction networks: the input replicator, two-element min/max networks,
//! and the divide-and-conquer k-element min/max networks built from pairwise
//! reduction stages.

use ndarray::{arr1, arr2, Array1, Array2};

use crate::error::{Error, Result};
use crate::network::{direct_sum, sequential_compose, Layer, ReluNetwork};

/// Single linear layer copying its `n` inputs and repeating the last input
/// until there are `m > n` outputs.
pub fn input_replicator(n: usize, m: usize) -> Result<ReluNetwork> {
    if n == 0 || m <= n {
        return Err(Error::InvalidNetwork(format!(
            "input replicator needs 0 < n < m, got ({n}, {m})"
        )));
    }
    let mut w = Array2::<f64>::zeros((m, n));
    for i in 0..m {
        w[[i, i.min(n - 1)]] = 1.0;
    }
    ReluNetwork::new(vec![Layer::linear(w, Array1::zeros(m))?])
}

/// `min(x1, x2)` as `½(x1+x2) − ½|x1−x2|`, spelled with four ReLUs.
pub fn two_element_min() -> ReluNetwork {
    let first = Layer::nonlinear(
        arr2(&[[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]]),
        Array1::zeros(4),
    )
    .unwrap();
    let second = Layer::linear(arr2(&[[-0.5, 0.5, -0.5, -0.5]]), arr1(&[0.0])).unwrap();
    ReluNetwork::new(vec![first, second]).unwrap()
}

/// `max(x1, x2)` as `½(x1+x2) + ½|x1−x2|`.
pub fn two_element_max() -> ReluNetwork {
    let first = Layer::nonlinear(
        arr2(&[[1.0, 1.0], [-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0]]),
        Array1::zeros(4),
    )
    .unwrap();
    let second = Layer::linear(arr2(&[[0.5, -0.5, 0.5, 0.5]]), arr1(&[0.0])).unwrap();
    ReluNetwork::new(vec![first, second]).unwrap()
}

#[derive(Clone, Copy)]
enum Extreme {
    Min,
    Max,
}

/// One pairwise reduction stage: `width` inputs to `ceil(width/2)` outputs.
/// Odd widths are padded by replicating the last input first.
fn pairwise_stage(width: usize, which: Extreme) -> Result<ReluNetwork> {
    debug_assert!(width >= 2);
    let pairs = width.div_ceil(2);
    let unit = match which {
        Extreme::Min => two_element_min(),
        Extreme::Max => two_element_max(),
    };
    let mut stack = unit.clone();
    for _ in 1..pairs {
        stack = direct_sum(&stack, &unit)?;
    }
    if width % 2 == 1 {
        sequential_compose(&stack, &input_replicator(width, 2 * pairs)?)
    } else {
        Ok(stack)
    }
}

fn build_extreme_network(k: usize, which: Extreme) -> Result<ReluNetwork> {
    if k < 2 {
        return Err(Error::InvalidNetwork(format!(
            "min/max networks need at least 2 inputs, got {k}"
        )));
    }
    let mut width = k;
    let mut net = pairwise_stage(width, which)?;
    width = width.div_ceil(2);
    while width > 1 {
        net = sequential_compose(&pairwise_stage(width, which)?, &net)?;
        width = width.div_ceil(2);
    }
    Ok(net)
}

/// Network computing the minimum of its `k ≥ 2` inputs via cascaded pairwise
/// stages.
pub fn build_min_network(k: usize) -> Result<ReluNetwork> {
    build_extreme_network(k, Extreme::Min)
}

/// Network computing the maximum of its `k ≥ 2` inputs.
pub fn build_max_network(k: usize) -> Result<ReluNetwork> {
    build_extreme_network(k, Extreme::Max)
}
