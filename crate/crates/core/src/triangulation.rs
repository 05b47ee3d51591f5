//! Ideal triangulations of punctured surfaces, as pure combinatorics.
//!
//! A triangulation is a list of triangles, each with three sides mapped to
//! edge indices (counterclockwise) and three corner labels mapping the
//! corner between consecutive sides to a puncture.  Closed surfaces require
//! every edge to appear on exactly two sides (self-folded triangles may use
//! the same edge twice); gluing always identifies the two occurrences with
//! opposite orientation, so every valid complex is a closed oriented surface
//! of genus g >= 1 with s punctures, n = 6g-6+3s edges and m = 4g-4+2s
//! faces.  [`SurfaceMode::Open`] relaxes gluing for small test fixtures such
//! as a single triangle.
//!
//! Two derived structures feed the algebra downstream: the skew form sigma
//! (each corner between sides (c, c+1) contributes +1 to a[edge(c)][edge(c+1)]
//! and sigma = a - a^T), and the puncture profile k[j][i] counting how often
//! a small loop around puncture j crosses edge i.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("missing `{0}` declaration")]
    MissingHeader(&'static str),
    #[error("triangulation has no triangles")]
    NoTriangles,
    #[error("edge {edge} out of range: triangle {triangle} side {side} (declared {edges} edges)")]
    EdgeIndexOutOfRange {
        triangle: usize,
        side: usize,
        edge: usize,
        edges: usize,
    },
    #[error(
        "corner label {label} out of range: triangle {triangle} corner {corner} (declared {punctures} punctures)"
    )]
    CornerLabelOutOfRange {
        triangle: usize,
        corner: usize,
        label: usize,
        punctures: usize,
    },
    #[error("unused edge {0}: it appears on no triangle side")]
    UnusedEdge(usize),
    #[error("unglued edge {0}: it appears on only one triangle side")]
    UngluedEdge(usize),
    #[error("edge {edge} appears on {count} sides, at most two allowed")]
    OverusedEdge { edge: usize, count: usize },
    #[error(
        "sector orbit starting at triangle {start_tri} corner {start_corner} mixes puncture labels: \
         {label_a} at triangle {tri_a} corner {corner_a} vs {label_b} at triangle {tri_b} corner {corner_b}"
    )]
    OrbitLabelConflict {
        start_tri: usize,
        start_corner: usize,
        label_a: usize,
        tri_a: usize,
        corner_a: usize,
        label_b: usize,
        tri_b: usize,
        corner_b: usize,
    },
    #[error("found {found} sector orbits around vertices but {declared} punctures declared")]
    OrbitCount { found: usize, declared: usize },
    #[error("puncture label {label} is shared by two distinct sector orbits")]
    DuplicateOrbitLabel { label: usize },
    #[error("Euler characteristic {chi} is not 2-2g for any genus g >= 1")]
    EulerCharacteristic { chi: i64 },
    #[error("unknown builtin triangulation `{0}` (available: torus-1p, torus-2p, genus2-1p)")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceMode {
    /// Every edge glued on exactly two sides; full surface invariants hold.
    Closed,
    /// Edges may be boundary (one side).  Orbit, Euler and count checks are
    /// skipped; used for one-triangle test fixtures.
    Open,
}

/// One ideal triangle: sides in counterclockwise order mapped to edges, and
/// the corner between side c and side c+1 labelled with a puncture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub sides: [usize; 3],
    pub corners: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceCounts {
    pub genus: usize,
    pub punctures: usize,
    pub edges: usize,
    pub faces: usize,
}

/// The Weil-Petersson skew form on edges: sigma_ij counts corners from
/// edge i to edge j minus corners from j to i, so entries lie in [-2, 2].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMatrix {
    rows: Vec<Vec<i64>>,
}

impl SkewMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let n = rows.len();
        for r in &rows {
            assert_eq!(r.len(), n, "skew matrix must be square");
        }
        SkewMatrix { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| self.rows[i][j] == -self.rows[j][i]))
    }
}

/// Crossing counts k[j][i] of a small loop around puncture j with edge i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctureProfile {
    rows: Vec<Vec<u64>>,
}

impl PunctureProfile {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == width),
            "profile rows must share one edge count"
        );
        PunctureProfile { rows }
    }

    pub fn punctures(&self) -> usize {
        self.rows.len()
    }

    pub fn edges(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn k(&self, puncture: usize, edge: usize) -> u64 {
        self.rows[puncture][edge]
    }

    pub fn row(&self, puncture: usize) -> &[u64] {
        &self.rows[puncture]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    punctures: usize,
    edges: usize,
    triangles: Vec<Triangle>,
    mode: SurfaceMode,
    /// Side occurrences per edge, sorted by (triangle, side).
    occurrences: Vec<Vec<(usize, usize)>>,
    /// None in open mode.
    genus: Option<usize>,
}

impl Triangulation {
    pub fn new(
        punctures: usize,
        edges: usize,
        triangles: Vec<Triangle>,
        mode: SurfaceMode,
    ) -> Result<Self, TriangulationError> {
        if triangles.is_empty() {
            return Err(TriangulationError::NoTriangles);
        }
        for (t, tri) in triangles.iter().enumerate() {
            for c in 0..3 {
                if tri.sides[c] >= edges {
                    return Err(TriangulationError::EdgeIndexOutOfRange {
                        triangle: t,
                        side: c,
                        edge: tri.sides[c],
                        edges,
                    });
                }
                if tri.corners[c] >= punctures {
                    return Err(TriangulationError::CornerLabelOutOfRange {
                        triangle: t,
                        corner: c,
                        label: tri.corners[c],
                        punctures,
                    });
                }
            }
        }
        let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); edges];
        for (t, tri) in triangles.iter().enumerate() {
            for (c, &e) in tri.sides.iter().enumerate() {
                occurrences[e].push((t, c));
            }
        }
        for (e, occ) in occurrences.iter().enumerate() {
            match (occ.len(), mode) {
                (2, _) | (1, SurfaceMode::Open) => {}
                (0, _) => return Err(TriangulationError::UnusedEdge(e)),
                (1, SurfaceMode::Closed) => return Err(TriangulationError::UngluedEdge(e)),
                (count, _) => return Err(TriangulationError::OverusedEdge { edge: e, count }),
            }
        }
        let genus = match mode {
            SurfaceMode::Open => None,
            SurfaceMode::Closed => {
                let tri = Triangulation {
                    punctures,
                    edges,
                    triangles: triangles.clone(),
                    mode,
                    occurrences: occurrences.clone(),
                    genus: None,
                };
                tri.validate_orbits()?;
                let chi = punctures as i64 - edges as i64 + triangles.len() as i64;
                if chi > 0 || chi % 2 != 0 {
                    return Err(TriangulationError::EulerCharacteristic { chi });
                }
                let g = ((2 - chi) / 2) as usize;
                debug_assert_eq!(edges, 6 * g - 6 + 3 * punctures);
                debug_assert_eq!(triangles.len(), 4 * g - 4 + 2 * punctures);
                Some(g)
            }
        };
        Ok(Triangulation {
            punctures,
            edges,
            triangles,
            mode,
            occurrences,
            genus,
        })
    }

    /// Parses the plain-text format:
    ///
    /// ```text
    /// punctures <s>
    /// edges <n>
    /// tri <e0> <e1> <e2> corners <p0> <p1> <p2>
    /// ```
    ///
    /// `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, TriangulationError> {
        Self::parse_with_mode(text, SurfaceMode::Closed)
    }

    pub fn parse_with_mode(text: &str, mode: SurfaceMode) -> Result<Self, TriangulationError> {
        let mut punctures: Option<usize> = None;
        let mut edges: Option<usize> = None;
        let mut triangles: Vec<Triangle> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let tokens: Vec<(usize, &str)> = tokenize(line);
            if tokens.is_empty() {
                continue;
            }
            let (kw_col, keyword) = tokens[0];
            match keyword {
                "punctures" => {
                    parse_header(&tokens, line_no, "punctures", &mut punctures)?;
                }
                "edges" => {
                    parse_header(&tokens, line_no, "edges", &mut edges)?;
                }
                "tri" => {
                    if tokens.len() != 8 {
                        return Err(TriangulationError::Syntax {
                            line: line_no,
                            col: kw_col,
                            msg: format!(
                                "expected `tri e0 e1 e2 corners p0 p1 p2`, found {} tokens",
                                tokens.len()
                            ),
                        });
                    }
                    if tokens[4].1 != "corners" {
                        return Err(TriangulationError::Syntax {
                            line: line_no,
                            col: tokens[4].0,
                            msg: format!("expected keyword `corners`, found `{}`", tokens[4].1),
                        });
                    }
                    let mut nums = [0usize; 6];
                    for (slot, &(col, tok)) in
                        tokens[1..4].iter().chain(tokens[5..8].iter()).enumerate()
                    {
                        nums[slot] = parse_usize(tok, line_no, col)?;
                    }
                    triangles.push(Triangle {
                        sides: [nums[0], nums[1], nums[2]],
                        corners: [nums[3], nums[4], nums[5]],
                    });
                }
                other => {
                    return Err(TriangulationError::Syntax {
                        line: line_no,
                        col: kw_col,
                        msg: format!("unknown keyword `{}`", other),
                    });
                }
            }
        }
        let punctures = punctures.ok_or(TriangulationError::MissingHeader("punctures"))?;
        let edges = edges.ok_or(TriangulationError::MissingHeader("edges"))?;
        Triangulation::new(punctures, edges, triangles, mode)
    }

    /// Builtin closed surfaces: `torus-1p`, `torus-2p`, `genus2-1p`.
    pub fn builtin(name: &str) -> Result<Self, TriangulationError> {
        let data: (usize, usize, &[[usize; 6]]) = match name {
            // Two triangles glued along all three edges.
            "torus-1p" => (1, 3, &[[0, 1, 2, 0, 0, 0], [0, 1, 2, 0, 0, 0]]),
            // Split one puncture of the torus: a square fundamental domain
            // with corners at puncture 0, coned from an interior puncture 1.
            "torus-2p" => (
                2,
                6,
                &[
                    [0, 3, 2, 0, 1, 0],
                    [1, 4, 3, 0, 1, 0],
                    [0, 5, 4, 0, 1, 0],
                    [1, 2, 5, 0, 1, 0],
                ],
            ),
            // Octagon with identification aba'b'cdc'd', fanned from one
            // vertex by five diagonals.
            "genus2-1p" => (
                1,
                9,
                &[
                    [0, 1, 4, 0, 0, 0],
                    [4, 0, 5, 0, 0, 0],
                    [5, 1, 6, 0, 0, 0],
                    [6, 2, 7, 0, 0, 0],
                    [7, 3, 8, 0, 0, 0],
                    [8, 2, 3, 0, 0, 0],
                ],
            ),
            other => return Err(TriangulationError::UnknownBuiltin(other.to_string())),
        };
        let triangles = data
            .2
            .iter()
            .map(|row| Triangle {
                sides: [row[0], row[1], row[2]],
                corners: [row[3], row[4], row[5]],
            })
            .collect();
        Triangulation::new(data.0, data.1, triangles, SurfaceMode::Closed)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["torus-1p", "torus-2p", "genus2-1p"]
    }

    pub fn mode(&self) -> SurfaceMode {
        self.mode
    }

    pub fn n_punctures(&self) -> usize {
        self.punctures
    }

    pub fn n_edges(&self) -> usize {
        self.edges
    }

    pub fn n_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn genus(&self) -> Option<usize> {
        self.genus
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Side occurrences of an edge, sorted by (triangle, side); length is 2
    /// for glued edges, 1 for boundary edges in open mode.
    pub fn occurrences(&self, edge: usize) -> &[(usize, usize)] {
        &self.occurrences[edge]
    }

    /// True when both sides of the edge lie on the same triangle.
    pub fn is_self_folded(&self, edge: usize) -> bool {
        let occ = &self.occurrences[edge];
        occ.len() == 2 && occ[0].0 == occ[1].0
    }

    pub fn counts(&self) -> Option<SurfaceCounts> {
        self.genus.map(|genus| SurfaceCounts {
            genus,
            punctures: self.punctures,
            edges: self.edges,
            faces: self.triangles.len(),
        })
    }

    /// The skew form sigma = a - a^T with one unit per corner.
    pub fn sigma(&self) -> SkewMatrix {
        let n = self.edges;
        let mut a = vec![vec![0i64; n]; n];
        for tri in &self.triangles {
            for c in 0..3 {
                let i = tri.sides[c];
                let j = tri.sides[(c + 1) % 3];
                a[i][j] += 1;
            }
        }
        let rows = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] - a[j][i]).collect())
            .collect();
        SkewMatrix::from_rows(rows)
    }

    /// Loop-crossing counts per puncture.  Every corner is incident to its
    /// two flanking sides; in a closed surface each geometric edge end is
    /// seen from two corners, hence the halving.
    pub fn puncture_profile(&self) -> PunctureProfile {
        let mut incidence = vec![vec![0u64; self.edges]; self.punctures];
        for tri in &self.triangles {
            for c in 0..3 {
                let label = tri.corners[c];
                incidence[label][tri.sides[c]] += 1;
                incidence[label][tri.sides[(c + 1) % 3]] += 1;
            }
        }
        if self.mode == SurfaceMode::Closed {
            for row in &mut incidence {
                for v in row.iter_mut() {
                    debug_assert_eq!(*v % 2, 0, "closed-surface incidences come in pairs");
                    *v /= 2;
                }
            }
        }
        PunctureProfile { rows: incidence }
    }

    /// Corner orbits of the vertex identification: repeatedly cross the
    /// corner's counterclockwise flanking side to the glued triangle.  Each
    /// orbit is one vertex of the complex.  Closed mode only.
    pub fn sector_orbits(&self) -> Vec<Vec<(usize, usize)>> {
        assert_eq!(self.mode, SurfaceMode::Closed, "orbits need a closed surface");
        let m = self.triangles.len();
        let mut seen = vec![[false; 3]; m];
        let mut orbits = Vec::new();
        for t0 in 0..m {
            for c0 in 0..3 {
                if seen[t0][c0] {
                    continue;
                }
                let mut orbit = Vec::new();
                let (mut t, mut c) = (t0, c0);
                loop {
                    seen[t][c] = true;
                    orbit.push((t, c));
                    let side = (c + 1) % 3;
                    let edge = self.triangles[t].sides[side];
                    let occ = &self.occurrences[edge];
                    let (nt, nc) = if occ[0] == (t, side) { occ[1] } else { occ[0] };
                    t = nt;
                    c = nc;
                    if (t, c) == (t0, c0) {
                        break;
                    }
                }
                orbits.push(orbit);
            }
        }
        orbits
    }

    fn validate_orbits(&self) -> Result<(), TriangulationError> {
        let orbits = self.sector_orbits();
        let mut label_seen: Vec<Option<(usize, usize)>> = vec![None; self.punctures];
        for orbit in &orbits {
            let (t0, c0) = orbit[0];
            let label = self.triangles[t0].corners[c0];
            for &(t, c) in orbit.iter().skip(1) {
                let other = self.triangles[t].corners[c];
                if other != label {
                    return Err(TriangulationError::OrbitLabelConflict {
                        start_tri: t0,
                        start_corner: c0,
                        label_a: label,
                        tri_a: t0,
                        corner_a: c0,
                        label_b: other,
                        tri_b: t,
                        corner_b: c,
                    });
                }
            }
            if label_seen[label].is_some() {
                return Err(TriangulationError::DuplicateOrbitLabel { label });
            }
            label_seen[label] = Some((t0, c0));
        }
        if orbits.len() != self.punctures {
            return Err(TriangulationError::OrbitCount {
                found: orbits.len(),
                declared: self.punctures,
            });
        }
        Ok(())
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_usize(tok: &str, line: usize, col: usize) -> Result<usize, TriangulationError> {
    tok.parse::<usize>().map_err(|_| TriangulationError::Syntax {
        line,
        col,
        msg: format!("expected a nonnegative integer, found `{}`", tok),
    })
}

fn parse_header(
    tokens: &[(usize, &str)],
    line: usize,
    name: &'static str,
    slot: &mut Option<usize>,
) -> Result<(), TriangulationError> {
    if tokens.len() != 2 {
        return Err(TriangulationError::Syntax {
            line,
            col: tokens[0].0,
            msg: format!("expected `{} <count>`", name),
        });
    }
    let v = parse_usize(tokens[1].1, line, tokens[1].0)?;
    if slot.is_some() {
        return Err(TriangulationError::Syntax {
            line,
            col: tokens[0].0,
            msg: format!("duplicate `{}` declaration", name),
        });
    }
    *slot = Some(v);
    Ok(())
}
