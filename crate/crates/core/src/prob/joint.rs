use serde::{Deserialize, Serialize};

use super::{check_probs, entropy_of, ConditionalPmf, Pmf};
use crate::error::{Error, Result};

/// A named finite alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Axis {
            name: name.into(),
            size,
        }
    }
}

/// Dense joint pmf over named axes, stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    axes: Vec<Axis>,
    tensor: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: Vec<Axis>, tensor: Vec<f64>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if a.size == 0 {
                return Err(Error::DimensionMismatch(format!("axis `{}` is empty", a.name)));
            }
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::DuplicateAxis(a.name.clone()));
            }
        }
        let len: usize = axes.iter().map(|a| a.size).product();
        if tensor.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "tensor has {} entries, axes need {len}",
                tensor.len()
            )));
        }
        check_probs(&tensor, &"joint pmf")?;
        Ok(JointPmf { axes, tensor })
    }

    /// The trivial joint over no axes (a single unit mass).
    pub fn unit() -> Self {
        JointPmf {
            axes: Vec::new(),
            tensor: vec![1.0],
        }
    }

    pub fn from_pmf(name: impl Into<String>, p: &Pmf) -> Self {
        JointPmf {
            axes: vec![Axis::new(name, p.len())],
            tensor: p.probs().to_vec(),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn tensor(&self) -> &[f64] {
        &self.tensor
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn size_of(&self, name: &str) -> Result<usize> {
        Ok(self.axes[self.axis_index(name)?].size)
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.axis_index(n)?;
            if out.contains(&i) {
                return Err(Error::DuplicateAxis(n.to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Flat marginal over `keep` (in the given order) without validation.
    fn marginal_flat(&self, keep: &[usize]) -> Vec<f64> {
        let k = self.axes.len();
        let mut kstride = vec![0usize; k];
        let mut s = 1;
        for &i in keep.iter().rev() {
            kstride[i] = s;
            s *= self.axes[i].size;
        }
        let mut out = vec![0.0; s];
        if k == 0 {
            out[0] = self.tensor[0];
            return out;
        }
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.size).collect();
        let mut digits = vec![0usize; k];
        let mut tgt = 0usize;
        for &p in &self.tensor {
            out[tgt] += p;
            // Odometer increment, last axis fastest.
            let mut a = k;
            while a > 0 {
                a -= 1;
                digits[a] += 1;
                tgt += kstride[a];
                if digits[a] < sizes[a] {
                    break;
                }
                tgt -= kstride[a] * sizes[a];
                digits[a] = 0;
            }
        }
        out
    }

    /// Sums out every axis not in `keep`; result axes follow `keep`'s order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let idx = self.indices(keep)?;
        let tensor = self.marginal_flat(&idx);
        Ok(JointPmf {
            axes: idx.iter().map(|&i| self.axes[i].clone()).collect(),
            tensor,
        })
    }

    /// Marginal of one axis as a plain pmf.
    pub fn marginal_pmf(&self, name: &str) -> Result<Pmf> {
        let i = self.axis_index(name)?;
        Pmf::normalized(self.marginal_flat(&[i]))
    }

    /// Joint entropy of the named axes (empty set gives 0).
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let idx = self.indices(names)?;
        if idx.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal_flat(&idx)))
    }

    /// `H(A | C)`.
    pub fn conditional_entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        disjoint(a, c)?;
        let ac: Vec<&str> = a.iter().chain(c).copied().collect();
        Ok((self.entropy(&ac)? - self.entropy(c)?).max(0.0))
    }

    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// `I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`, clamped at zero.
    pub fn conditional_mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        disjoint(a, b)?;
        disjoint(a, c)?;
        disjoint(b, c)?;
        let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
        let m = self.marginalize(&abc)?;
        let (na, nb) = (a.len(), b.len());
        let all: Vec<usize> = (0..abc.len()).collect();
        let ac: Vec<usize> = all[..na].iter().chain(&all[na + nb..]).copied().collect();
        let bc: Vec<usize> = all[na..].to_vec();
        let cc: Vec<usize> = all[na + nb..].to_vec();
        let h = |keep: &[usize]| {
            if keep.is_empty() {
                0.0
            } else {
                entropy_of(&m.marginal_flat(keep))
            }
        };
        let v = h(&ac) + h(&bc) - entropy_of(&m.tensor) - h(&cc);
        Ok(v.max(0.0))
    }

    /// Appends `targets` drawn from `cond` given the `given` axes. Rows of `cond`
    /// index the given axes in mixed radix (first most significant); columns
    /// index the targets likewise.
    pub fn extend(&self, given: &[&str], targets: &[Axis], cond: &ConditionalPmf) -> Result<JointPmf> {
        let gidx = self.indices(given)?;
        for (i, t) in targets.iter().enumerate() {
            if self.has_axis(&t.name) || targets[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::DuplicateAxis(t.name.clone()));
            }
        }
        let rows: usize = gidx.iter().map(|&i| self.axes[i].size).product();
        let cols: usize = targets.iter().map(|t| t.size).product();
        if cond.rows() != rows || cond.cols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "factor table is {}x{}, axes need {rows}x{cols}",
                cond.rows(),
                cond.cols()
            )));
        }
        let k = self.axes.len();
        let mut gstride = vec![0usize; k];
        let mut s = 1;
        for &i in gidx.iter().rev() {
            gstride[i] = s;
            s *= self.axes[i].size;
        }
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.size).collect();
        let mut tensor = Vec::with_capacity(self.tensor.len() * cols);
        let mut digits = vec![0usize; k];
        let mut g = 0usize;
        for &p in &self.tensor {
            tensor.extend(cond.row(g).iter().map(|q| p * q));
            let mut a = k;
            while a > 0 {
                a -= 1;
                digits[a] += 1;
                g += gstride[a];
                if digits[a] < sizes[a] {
                    break;
                }
                g -= gstride[a] * sizes[a];
                digits[a] = 0;
            }
        }
        let mut axes = self.axes.clone();
        axes.extend(targets.iter().cloned());
        Ok(JointPmf { axes, tensor })
    }

    /// Appends the output of `channel` driven by the single axis `input`.
    pub fn attach_channel(&self, input: &str, output: &str, channel: &ConditionalPmf) -> Result<JointPmf> {
        self.extend(&[input], &[Axis::new(output, channel.cols())], channel)
    }

    /// Largest absolute entry difference against a joint with identical axes.
    pub fn max_abs_diff(&self, other: &JointPmf) -> f64 {
        if self.axes != other.axes {
            return f64::INFINITY;
        }
        self.tensor
            .iter()
            .zip(&other.tensor)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    match a.iter().find(|x| b.contains(x)) {
        Some(x) => Err(Error::OverlappingAxes(x.to_string())),
        None => Ok(()),
    }
}
