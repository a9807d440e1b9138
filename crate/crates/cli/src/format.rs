//! The on-disk JSON model and its conversion to core matrices.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qcoh_core::mat::{CMatrix, DimPair, C64};

/// Nested row-major complex matrix, each entry `[re, im]`.
pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Channel,
    Superchannel,
    State,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Channel => "channel",
            Kind::Superchannel => "superchannel",
            Kind::State => "state",
        }
    }
}

/// One stored object: a Choi matrix (channel or superchannel) or a
/// density matrix (state), with its declared dimensions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub kind: Kind,
    /// `[a, b]` for channels, `[a, b, a', b']` for superchannels, `[d]`
    /// for states.
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
    /// Alternative channel representation: a list of `b x a` operators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Matrix>>,
}

/// A parsed and shape-checked object.
#[derive(Clone, Debug)]
pub enum Loaded {
    Channel { dims: DimPair, matrix: CMatrix },
    Superchannel {
        in_dims: DimPair,
        out_dims: DimPair,
        matrix: CMatrix,
    },
    State { matrix: CMatrix },
}

pub fn matrix_to_cmatrix(matrix: &Matrix) -> Result<CMatrix> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|row| row.len() != cols) {
        bail!("matrix rows have unequal lengths");
    }
    let out = CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = matrix[i][j];
        C64::new(re, im)
    });
    if !out.all_finite() {
        bail!("matrix contains non-finite entries");
    }
    Ok(out)
}

pub fn cmatrix_to_matrix(m: &CMatrix) -> Matrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m[(i, j)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn dim_pair(dims: &[usize], at: usize) -> Result<DimPair> {
    DimPair::new(dims[at], dims[at + 1]).context("dimensions must be at least 1")
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed matrix file")
    }

    /// Check the dims header against the kind and extract the matrix.
    /// With `use_kraus`, channels are assembled from the `kraus` field
    /// instead (completeness is *not* checked here; validation is the
    /// caller's step).
    pub fn load(&self, use_kraus: bool) -> Result<Loaded> {
        match self.kind {
            Kind::Channel => {
                if self.dims.len() != 2 {
                    bail!("channel files need dims [input, output]");
                }
                let dims = dim_pair(&self.dims, 0)?;
                let matrix = if use_kraus {
                    let ops = self
                        .kraus
                        .as_ref()
                        .context("--kraus given but the file has no kraus field")?;
                    let mut parsed = Vec::with_capacity(ops.len());
                    for (i, op) in ops.iter().enumerate() {
                        let m = matrix_to_cmatrix(op)
                            .with_context(|| format!("kraus operator {i}"))?;
                        if m.rows() != dims.b || m.cols() != dims.a {
                            bail!(
                                "kraus operator {i} is {}x{}, expected {}x{}",
                                m.rows(),
                                m.cols(),
                                dims.b,
                                dims.a
                            );
                        }
                        parsed.push(m);
                    }
                    kraus_choi(dims, &parsed)
                } else {
                    let m = self.require_matrix()?;
                    expect_square(&m, dims.prod())?;
                    m
                };
                Ok(Loaded::Channel { dims, matrix })
            }
            Kind::Superchannel => {
                if self.dims.len() != 4 {
                    bail!("superchannel files need dims [a, b, a', b']");
                }
                let in_dims = dim_pair(&self.dims, 0)?;
                let out_dims = dim_pair(&self.dims, 2)?;
                let matrix = self.require_matrix()?;
                expect_square(&matrix, in_dims.prod() * out_dims.prod())?;
                Ok(Loaded::Superchannel {
                    in_dims,
                    out_dims,
                    matrix,
                })
            }
            Kind::State => {
                if self.dims.len() != 1 {
                    bail!("state files need dims [d]");
                }
                let matrix = self.require_matrix()?;
                expect_square(&matrix, self.dims[0])?;
                Ok(Loaded::State { matrix })
            }
        }
    }

    fn require_matrix(&self) -> Result<CMatrix> {
        let matrix = self.matrix.as_ref().context("file has no matrix field")?;
        matrix_to_cmatrix(matrix)
    }

    pub fn channel(channel: &qcoh_core::channel::Channel) -> Self {
        MatrixFile {
            kind: Kind::Channel,
            dims: vec![channel.dims().a, channel.dims().b],
            matrix: Some(cmatrix_to_matrix(channel.choi())),
            kraus: None,
        }
    }

    pub fn superchannel(s: &qcoh_core::superchannel::Superchannel) -> Self {
        MatrixFile {
            kind: Kind::Superchannel,
            dims: vec![
                s.in_dims().a,
                s.in_dims().b,
                s.out_dims().a,
                s.out_dims().b,
            ],
            matrix: Some(cmatrix_to_matrix(s.choi())),
            kraus: None,
        }
    }

    pub fn state(matrix: &CMatrix) -> Self {
        MatrixFile {
            kind: Kind::State,
            dims: vec![matrix.rows()],
            matrix: Some(cmatrix_to_matrix(matrix)),
            kraus: None,
        }
    }
}

fn expect_square(m: &CMatrix, side: usize) -> Result<()> {
    if m.rows() != side || m.cols() != side {
        bail!(
            "matrix is {}x{}, dims declare {side}x{side}",
            m.rows(),
            m.cols()
        );
    }
    Ok(())
}

/// Assemble the Choi matrix of `sum_m |M_m><M_m|` without requiring the
/// operators to be complete; validation reports the defect instead.
fn kraus_choi(dims: DimPair, ops: &[CMatrix]) -> CMatrix {
    let side = dims.prod();
    let mut choi = CMatrix::zeros(side, side);
    for op in ops {
        let vec: Vec<C64> = (0..dims.a)
            .flat_map(|j| (0..dims.b).map(move |alpha| op[(alpha, j)]))
            .collect();
        for r in 0..side {
            for s in 0..side {
                choi[(r, s)] += vec[r] * vec[s].conj();
            }
        }
    }
    choi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_channel_file() {
        let channel = qcoh_core::channel::identity_channel(2);
        let file = MatrixFile::channel(&channel);
        let text = serde_json::to_string(&file).unwrap();
        let parsed = MatrixFile::parse(&text).unwrap();
        match parsed.load(false).unwrap() {
            Loaded::Channel { dims, matrix } => {
                assert_eq!(dims, channel.dims());
                assert_eq!(matrix.max_abs_diff(channel.choi()), 0.0);
            }
            _ => panic!("expected a channel"),
        }
    }

    #[test]
    fn rejects_ragged_matrix() {
        let text = r#"{"kind":"state","dims":[2],"matrix":[[[1,0]],[[0,0],[0,0]]]}"#;
        let file = MatrixFile::parse(text).unwrap();
        assert!(file.load(false).is_err());
    }

    #[test]
    fn rejects_wrong_dims() {
        let text = r#"{"kind":"channel","dims":[2,2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        let file = MatrixFile::parse(text).unwrap();
        assert!(file.load(false).is_err());
    }

    #[test]
    fn loads_kraus_form() {
        let text = r#"{"kind":"channel","dims":[2,2],
            "kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let file = MatrixFile::parse(text).unwrap();
        match file.load(true).unwrap() {
            Loaded::Channel { matrix, .. } => {
                let expected = qcoh_core::channel::identity_channel(2);
                assert!(matrix.max_abs_diff(expected.choi()) < 1e-15);
            }
            _ => panic!("expected a channel"),
        }
    }
}
