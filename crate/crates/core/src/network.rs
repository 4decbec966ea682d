//! Dense ReLU feed-forward networks and their activation bit vectors.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Pre-activations with magnitude at or below this are treated as zero when
/// computing bit vectors.
pub const DEFAULT_BIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Self {
        Layer { weights, bias }
    }

    pub fn width(&self) -> usize {
        self.weights.rows()
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weights.mul_vec(x);
        for (v, b) in y.iter_mut().zip(&self.bias) {
            *v += b;
        }
        y
    }
}

/// A network `R^m -> R^n`: every layer but the last is followed by ReLU.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    input_dim: usize,
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    input_dim: usize,
    layers: Vec<RawLayer>,
}

impl NetworkSpec {
    /// Validates the dimension chain. Layers are numbered from 1 in errors.
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input_dim must be positive".into()));
        }
        if layers.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least one hidden layer and an output layer".into(),
            ));
        }
        let mut prev = input_dim;
        for (idx, layer) in layers.iter().enumerate() {
            let number = idx + 1;
            if layer.weights.rows() == 0 {
                return Err(Error::LayerDimension { layer: number, message: "layer has no nodes".into() });
            }
            if layer.weights.cols() != prev {
                return Err(Error::LayerDimension {
                    layer: number,
                    message: format!(
                        "weight matrix is {}x{} but the previous layer has {} outputs",
                        layer.weights.rows(),
                        layer.weights.cols(),
                        prev
                    ),
                });
            }
            if layer.bias.len() != layer.weights.rows() {
                return Err(Error::LayerDimension {
                    layer: number,
                    message: format!(
                        "bias has length {} but weights have {} rows",
                        layer.bias.len(),
                        layer.weights.rows()
                    ),
                });
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite { layer: number });
            }
            prev = layer.weights.rows();
        }
        Ok(NetworkSpec { input_dim, layers })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        // serde_json rejects bare NaN/Infinity tokens, so scan for them first
        // to give the more useful error.
        let value: serde_json::Value = match serde_json::from_str(s) {
            Ok(v) => v,
            Err(e) => {
                if let Some(layer) = non_finite_token_layer(s) {
                    return Err(Error::NonFinite { layer });
                }
                return Err(Error::Parse(e.to_string()));
            }
        };
        if let Some(layer) = non_finite_string_layer(&value) {
            return Err(Error::NonFinite { layer });
        }
        let raw: RawNetwork = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        let mut layers = Vec::with_capacity(raw.layers.len());
        for (idx, l) in raw.layers.into_iter().enumerate() {
            let weights = Matrix::from_rows(&l.weights).ok_or_else(|| Error::LayerDimension {
                layer: idx + 1,
                message: "weight rows have different lengths".into(),
            })?;
            layers.push(Layer::new(weights, l.bias));
        }
        NetworkSpec::new(raw.input_dim, layers)
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut buf = String::new();
        source.read_to_string(&mut buf)?;
        NetworkSpec::from_json_str(&buf)
    }

    pub fn to_json(&self) -> String {
        let raw = RawNetwork {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| RawLayer { weights: l.weights.to_rows(), bias: l.bias.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("network serializes")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_layer().width()
    }

    pub fn hidden_layers(&self) -> &[Layer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &Layer {
        self.layers.last().expect("validated non-empty")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.hidden_layers().iter().map(Layer::width).collect()
    }

    /// Total number of hidden nodes, the bit-vector length.
    pub fn hidden_count(&self) -> usize {
        self.hidden_layers().iter().map(Layer::width).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension { expected: self.input_dim, actual: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        self.check_input(x)?;
        let mut layer_outputs = Vec::with_capacity(self.layers.len());
        layer_outputs.push(x.to_vec());
        for layer in self.hidden_layers() {
            let mut y = layer.affine(layer_outputs.last().unwrap());
            for v in y.iter_mut() {
                *v = v.max(0.0);
            }
            layer_outputs.push(y);
        }
        let output = self.output_layer().affine(layer_outputs.last().unwrap());
        Ok(ForwardPass { layer_outputs, output })
    }

    /// Hidden-node pre-activations `w_{i,j} F_{i-1}(x) + b_{i,j}`, stacked
    /// layer-major.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = Vec::with_capacity(self.hidden_count());
        let mut current = x.to_vec();
        for layer in self.hidden_layers() {
            let pre = layer.affine(&current);
            out.extend_from_slice(&pre);
            current = pre.into_iter().map(|v| v.max(0.0)).collect();
        }
        Ok(out)
    }

    pub fn bit_vector(&self, x: &[f64]) -> Result<BitVector> {
        self.bit_vector_with(x, DEFAULT_BIT_TOLERANCE)
    }

    /// Bit is set iff the pre-activation exceeds `tol`.
    pub fn bit_vector_with(&self, x: &[f64], tol: f64) -> Result<BitVector> {
        let pre = self.pre_activations(x)?;
        Ok(BitVector::from_fn(pre.len(), |i| pre[i] > tol))
    }
}

fn non_finite_token_layer(s: &str) -> Option<usize> {
    let pos = ["NaN", "Infinity", "inf"].iter().filter_map(|t| s.find(t)).min()?;
    Some(s[..pos].matches("\"weights\"").count().max(1))
}

fn non_finite_string_layer(v: &serde_json::Value) -> Option<usize> {
    let layers = v.get("layers")?.as_array()?;
    let bad = |x: &serde_json::Value| -> bool {
        fn walk(x: &serde_json::Value) -> bool {
            match x {
                serde_json::Value::String(s) => {
                    let s = s.trim().to_ascii_lowercase();
                    s == "nan" || s.ends_with("inf") || s.ends_with("infinity")
                }
                serde_json::Value::Array(a) => a.iter().any(walk),
                _ => false,
            }
        }
        walk(x)
    };
    layers
        .iter()
        .position(|l| l.get("weights").is_some_and(bad) || l.get("bias").is_some_and(bad))
        .map(|i| i + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardPass {
    /// `F_0 = x, F_1, ..., F_L`.
    pub layer_outputs: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

/// Packed activation pattern, layer 1 node 1 first.
#[derive(Clone, Eq)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut bv = BitVector::zeros(len);
        for i in 0..len {
            if f(i) {
                bv.set(i, true);
            }
        }
        bv
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitVector::from_fn(bits.len(), |i| bits[i])
    }

    /// Bits `0..len` taken from the low bits of `value`, bit 0 first.
    pub fn from_index(len: usize, value: u64) -> Self {
        assert!(len <= 64);
        let mut bv = BitVector::zeros(len);
        if len > 0 {
            bv.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        bv
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.set(i, !self.get(i));
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn parity(&self) -> bool {
        self.count_ones() % 2 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Popcount of the XOR. Panics on length mismatch; see
    /// [`crate::metric::hamming`] for the checked version.
    pub fn hamming(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "bit vectors of different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Indices where `self` and `other` differ.
    pub fn diff_positions(&self, other: &BitVector) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i) != other.get(i)).collect()
    }
}

impl PartialEq for BitVector {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.words == other.words
    }
}

impl Hash for BitVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.len.hash(state);
        self.words.hash(state);
    }
}

/// Lexicographic on the 0/1 string.
impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in 0..self.len.min(other.len) {
            match self.get(i).cmp(&other.get(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bools = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bools.push(false),
                '1' => bools.push(true),
                other => return Err(Error::Parse(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(BitVector::from_bools(&bools))
    }
}

impl Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
