use super::{CollarError, CollarFamily};
use crate::expr::{Expr, JetEnv};
use crate::jet::Jet;
use crate::linalg::determinant;

/// Collar of a hypersurface in flat space, swept by straight inner normals:
/// `h_ij(t, u) = ⟨∂_iX + t ∂_iN, ∂_jX + t ∂_jN⟩`. This is exactly geodesic
/// normal form since flat geodesics are lines.
#[derive(Debug, Clone)]
pub struct FlatAmbientCollar {
    dim: usize,
    depth: f64,
    surface: Vec<Expr>,
    interior: Vec<f64>,
}

impl FlatAmbientCollar {
    /// `surface` gives the `n` ambient coordinates as expressions in the chart
    /// variables `x1, .., x_{n−1}`; `interior` is any point of the bounded
    /// side, which fixes the inner normal.
    pub fn new(surface: Vec<Expr>, interior: Vec<f64>, depth: f64) -> Result<Self, CollarError> {
        let dim = surface.len();
        if interior.len() != dim {
            return Err(CollarError::Invalid(format!(
                "interior point has {} coordinates, surface has {dim}",
                interior.len()
            )));
        }
        for e in &surface {
            e.validate_dimension(dim)?;
            if e.variables().contains("t") {
                return Err(CollarError::Invalid(
                    "surface parameterization must not depend on t".into(),
                ));
            }
        }
        if !(depth > 0.0) {
            return Err(CollarError::Invalid(format!("collar depth must be positive, got {depth}")));
        }
        Ok(FlatAmbientCollar {
            dim,
            depth,
            surface,
            interior,
        })
    }

    /// Ellipsoid `Σ y_k² / a_k² = 1` in hyperspherical coordinates:
    /// `y_0 = a_0 cos x1`, `y_1 = a_1 sin x1 cos x2`, ..,
    /// `y_{n−1} = a_{n−1} sin x1 ⋯ sin x_{n−1}`.
    pub fn ellipsoid(axes: &[f64], depth: f64) -> Result<Self, CollarError> {
        let n = axes.len();
        let mut comps = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = format!("{:?}", axes[k]);
            for i in 1..=k {
                s.push_str(&format!(" * sin(x{i})"));
            }
            if k + 1 < n {
                s.push_str(&format!(" * cos(x{})", k + 1));
            }
            comps.push(Expr::parse(&s).expect("generated expression parses"));
        }
        Self::new(comps, vec![0.0; n], depth)
    }

    pub fn surface(&self) -> &[Expr] {
        &self.surface
    }

    /// Ambient position, tangents and unit inner normal at a chart point, as
    /// jets of the given order (tangents and normal one order lower).
    #[allow(clippy::type_complexity)]
    pub fn frame_jets(
        &self,
        point: &[f64],
        order: usize,
    ) -> Result<(Vec<Jet>, Vec<Vec<Jet>>, Vec<Jet>), CollarError> {
        let n = self.dim;
        let m = n - 1;
        let env = JetEnv::coordinates(point, order);
        let x: Vec<Jet> = self
            .surface
            .iter()
            .map(|e| e.eval_jet(&env))
            .collect::<Result<_, _>>()?;
        let mut tangents = Vec::with_capacity(m);
        for i in 1..n {
            let t: Vec<Jet> = x.iter().map(|c| c.partial(i)).collect::<Result<_, _>>()?;
            tangents.push(t);
        }
        // N_k = (−1)^k det(tangent matrix without column k)
        let mut normal = Vec::with_capacity(n);
        for k in 0..n {
            let mut minor = Vec::with_capacity(m * m);
            for t in &tangents {
                for (c, v) in t.iter().enumerate() {
                    if c != k {
                        minor.push(v.clone());
                    }
                }
            }
            let d = determinant(m, &minor);
            normal.push(if k % 2 == 0 { d } else { -d });
        }
        let mut norm2 = Jet::zero_in(normal[0].layout());
        for c in &normal {
            norm2 = norm2 + c * c;
        }
        let inv = norm2.sqrt()?.recip()?;
        let mut normal: Vec<Jet> = normal.iter().map(|c| c * &inv).collect();
        let toward: f64 = (0..n)
            .map(|k| normal[k].constant_term() * (self.interior[k] - x[k].constant_term()))
            .sum();
        if toward < 0.0 {
            normal = normal.iter().map(|c| -c).collect();
        }
        Ok((x, tangents, normal))
    }
}

impl CollarFamily for FlatAmbientCollar {
    fn dim(&self) -> usize {
        self.dim
    }

    fn depth(&self) -> f64 {
        self.depth
    }

    fn h_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, CollarError> {
        let n = self.dim;
        let m = n - 1;
        let (_, tangents, normal) = self.frame_jets(point, order + 2)?;
        let t = Jet::variable(n, order, 0, point[0]);
        // ∂_i X + t ∂_i N, truncated to the requested order
        let mut cols: Vec<Vec<Jet>> = Vec::with_capacity(m);
        for (i, tan) in tangents.iter().enumerate() {
            let mut col = Vec::with_capacity(n);
            for k in 0..n {
                let dn = normal[k].partial(i + 1)?.truncate(order);
                col.push(tan[k].truncate(order) + &t * &dn);
            }
            cols.push(col);
        }
        let mut h: Vec<Jet> = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                if j < i {
                    h.push(h[j * m + i].clone());
                    continue;
                }
                let mut s = Jet::zero_in(t.layout());
                for k in 0..n {
                    s = s + &cols[i][k] * &cols[j][k];
                }
                h.push(s);
            }
        }
        let det = determinant(m, &h.iter().map(|j| j.constant_term()).collect::<Vec<_>>());
        if !(det > 0.0) {
            return Err(CollarError::Degenerate { t: point[0] });
        }
        Ok(h)
    }
}
