//! Node-list paths: piecewise linear and monotone cubic (Fritsch-Carlson)
//! interpolation, both extended linearly beyond the first and last node
//! with the end-segment slopes.

use super::PathError;

/// Checks a node list: at least two nodes, strictly increasing abscissae,
/// strictly monotone ordinates. Returns +1.0 or -1.0 for the direction.
pub(crate) fn check_nodes(nodes: &[(f64, f64)]) -> Result<f64, PathError> {
    if nodes.len() < 2 {
        return Err(PathError::InvalidRule("node list needs at least two nodes".into()));
    }
    if nodes.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
        return Err(PathError::InvalidRule("node list contains a non-finite value".into()));
    }
    let sign = (nodes[1].1 - nodes[0].1).signum();
    for (i, w) in nodes.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(PathError::InvalidRule(format!(
                "node abscissae must increase strictly (node {})",
                i + 1
            )));
        }
        if (w[1].1 - w[0].1) * sign <= 0.0 {
            return Err(PathError::InvalidRule(format!(
                "node values must be strictly monotone (node {})",
                i + 1
            )));
        }
    }
    Ok(sign)
}

/// Parses the two-column whitespace-separated node format. Blank lines and
/// `#` comments are skipped.
pub fn parse_nodes(text: &str) -> Result<Vec<(f64, f64)>, PathError> {
    let mut nodes = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(PathError::InvalidRule(format!(
                "line {}: expected two columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        let parse = |c: &str| {
            c.parse::<f64>().map_err(|_| {
                PathError::InvalidRule(format!("line {}: `{c}` is not a number", lineno + 1))
            })
        };
        nodes.push((parse(cols[0])?, parse(cols[1])?));
    }
    for (i, w) in nodes.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(PathError::InvalidRule(format!(
                "first column must increase strictly (data row {})",
                i + 2
            )));
        }
    }
    Ok(nodes)
}

fn segment(nodes: &[(f64, f64)], s: f64) -> usize {
    // index i such that the segment [i, i+1] is used for s (clamped to the ends)
    let idx = nodes.partition_point(|(x, _)| *x <= s);
    idx.saturating_sub(1).min(nodes.len() - 2)
}

fn secant(nodes: &[(f64, f64)], i: usize) -> f64 {
    (nodes[i + 1].1 - nodes[i].1) / (nodes[i + 1].0 - nodes[i].0)
}

pub(crate) fn polyline_eval(nodes: &[(f64, f64)], s: f64) -> f64 {
    let i = segment(nodes, s);
    nodes[i].1 + secant(nodes, i) * (s - nodes[i].0)
}

/// Slope of the segment used just right of `s`.
pub(crate) fn polyline_right_slope(nodes: &[(f64, f64)], s: f64) -> f64 {
    secant(nodes, segment(nodes, s))
}

pub(crate) fn polyline_inverse(nodes: &[(f64, f64)], x: f64) -> f64 {
    let increasing = nodes[1].1 > nodes[0].1;
    let idx = if increasing {
        nodes.partition_point(|(_, v)| *v <= x)
    } else {
        nodes.partition_point(|(_, v)| *v >= x)
    };
    let i = idx.saturating_sub(1).min(nodes.len() - 2);
    if nodes[i].1 == x {
        return nodes[i].0;
    }
    nodes[i].0 + (x - nodes[i].1) / secant(nodes, i)
}

/// Monotone cubic Hermite interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    nodes: Vec<(f64, f64)>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self, PathError> {
        check_nodes(&nodes)?;
        let n = nodes.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| secant(&nodes, i)).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secants[i - 1], secants[i]);
            let (h0, h1) = (nodes[i].0 - nodes[i - 1].0, nodes[i + 1].0 - nodes[i].0);
            // weighted harmonic mean keeps each cubic piece monotone
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            slopes[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
        }
        Ok(MonotoneCubic { nodes, slopes })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.nodes.len();
        if s <= self.nodes[0].0 {
            return self.nodes[0].1 + self.slopes[0] * (s - self.nodes[0].0);
        }
        if s >= self.nodes[n - 1].0 {
            return self.nodes[n - 1].1 + self.slopes[n - 1] * (s - self.nodes[n - 1].0);
        }
        let i = segment(&self.nodes, s);
        let (x0, y0) = self.nodes[i];
        let (x1, y1) = self.nodes[i + 1];
        let h = x1 - x0;
        let u = (s - x0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * y0 + h10 * h * self.slopes[i] + h01 * y1 + h11 * h * self.slopes[i + 1]
    }
}
