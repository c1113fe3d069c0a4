use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsplibError {
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: malformed coordinate record `{text}`")]
    MalformedCoordinate { line: usize, text: String },
    #[error("line {line}: no NODE_COORD_SECTION or DISPLAY_DATA_SECTION found")]
    MissingCoordinates { line: usize },
    #[error("line {line}: DIMENSION is {expected} but {found} coordinates were read")]
    CountMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: DIMENSION header missing")]
    MissingDimension { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsplibNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsplibData {
    pub name: Option<String>,
    pub dimension: usize,
    pub nodes: Vec<TsplibNode>,
    /// Raw EDGE_WEIGHT_SECTION numbers. Not used by the solver.
    pub edge_weights: Vec<f64>,
}

impl TsplibData {
    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().map(|n| (n.x, n.y)).collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    NodeCoord,
    DisplayData,
    EdgeWeight,
    Other,
}

fn section_for(keyword: &str) -> Option<Section> {
    match keyword {
        "NODE_COORD_SECTION" => Some(Section::NodeCoord),
        "DISPLAY_DATA_SECTION" => Some(Section::DisplayData),
        "EDGE_WEIGHT_SECTION" => Some(Section::EdgeWeight),
        k if k.ends_with("_SECTION") => Some(Section::Other),
        _ => None,
    }
}

fn starts_numeric(line: &str) -> bool {
    line.split_whitespace()
        .next()
        .is_some_and(|t| t.parse::<f64>().is_ok())
}

/// Read vertex coordinates from a TSPLIB document. Coordinates come from
/// NODE_COORD_SECTION when present, otherwise from DISPLAY_DATA_SECTION.
pub fn parse_tsplib(text: &str) -> Result<TsplibData, TsplibError> {
    let mut name = None;
    let mut dimension: Option<(usize, usize)> = None;
    let mut node_coords = Vec::new();
    let mut display = Vec::new();
    let mut edge_weights = Vec::new();
    let mut section = Section::Header;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if section != Section::Header && starts_numeric(line) {
            match section {
                Section::NodeCoord | Section::DisplayData => {
                    let node = parse_coordinate(line, line_no)?;
                    if section == Section::NodeCoord {
                        node_coords.push(node);
                    } else {
                        display.push(node);
                    }
                }
                Section::EdgeWeight => {
                    for tok in line.split_whitespace() {
                        let w = tok.parse::<f64>().map_err(|_| TsplibError::MalformedCoordinate {
                            line: line_no,
                            text: line.to_string(),
                        })?;
                        edge_weights.push(w);
                    }
                }
                _ => {}
            }
            continue;
        }
        if let Some(s) = section_for(line.trim_end_matches(':').trim()) {
            section = s;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(TsplibError::MalformedHeader { line: line_no, text: line.to_string() });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_uppercase() || c == '_' || c.is_ascii_digit()) {
            return Err(TsplibError::MalformedHeader { line: line_no, text: line.to_string() });
        }
        section = Section::Header;
        match key {
            "NAME" => name = Some(value.to_string()),
            "DIMENSION" => {
                let d = value
                    .parse::<usize>()
                    .map_err(|_| TsplibError::MalformedHeader { line: line_no, text: line.to_string() })?;
                dimension = Some((d, line_no));
            }
            _ => {}
        }
    }

    let (dimension, dim_line) = dimension.ok_or(TsplibError::MissingDimension { line: last_line })?;
    let nodes = if !node_coords.is_empty() {
        node_coords
    } else if !display.is_empty() {
        display
    } else {
        return Err(TsplibError::MissingCoordinates { line: last_line });
    };
    if nodes.len() != dimension {
        return Err(TsplibError::CountMismatch { line: dim_line, expected: dimension, found: nodes.len() });
    }
    Ok(TsplibData { name, dimension, nodes, edge_weights })
}

fn parse_coordinate(line: &str, line_no: usize) -> Result<TsplibNode, TsplibError> {
    let bad = || TsplibError::MalformedCoordinate { line: line_no, text: line.to_string() };
    let mut toks = line.split_whitespace();
    let id = toks.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad)?;
    let x = toks.next().and_then(|t| t.parse::<f64>().ok()).ok_or_else(bad)?;
    let y = toks.next().and_then(|t| t.parse::<f64>().ok()).ok_or_else(bad)?;
    Ok(TsplibNode { id, x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3.5 1\n3 -2 4e1\nEOF\n";

    #[test]
    fn reads_node_coords_in_order() {
        let d = parse_tsplib(SMALL).unwrap();
        assert_eq!(d.name.as_deref(), Some("tiny"));
        assert_eq!(d.coordinates(), vec![(0.0, 0.0), (3.5, 1.0), (-2.0, 40.0)]);
        assert_eq!(d.nodes[2].id, 3);
    }

    #[test]
    fn display_section_used_when_no_node_coords() {
        let text = "NAME: m\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 5\n5 0\nDISPLAY_DATA_SECTION\n1 10.0 20.0\n2 30.0 40.0\n";
        let d = parse_tsplib(text).unwrap();
        assert_eq!(d.coordinates(), vec![(10.0, 20.0), (30.0, 40.0)]);
        assert_eq!(d.edge_weights, vec![0.0, 5.0, 5.0, 0.0]);
    }

    #[test]
    fn node_coords_preferred_over_display() {
        let text = "DIMENSION: 1\nDISPLAY_DATA_SECTION\n1 9 9\nNODE_COORD_SECTION\n1 1 2\n";
        assert_eq!(parse_tsplib(text).unwrap().coordinates(), vec![(1.0, 2.0)]);
    }

    #[test]
    fn count_mismatch_names_dimension_line() {
        let text = "NAME: x\nDIMENSION: 5\nNODE_COORD_SECTION\n1 0 0\n2 0 1\n3 1 1\n4 1 0\n";
        assert_eq!(
            parse_tsplib(text).unwrap_err(),
            TsplibError::CountMismatch { line: 2, expected: 5, found: 4 }
        );
    }

    #[test]
    fn missing_coordinates() {
        let text = "NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_SECTION\n0 1\n1 0\nEOF\n";
        assert!(matches!(parse_tsplib(text), Err(TsplibError::MissingCoordinates { .. })));
    }

    #[test]
    fn malformed_header() {
        let text = "NAME: x\nthis is not a header\n";
        assert_eq!(
            parse_tsplib(text).unwrap_err(),
            TsplibError::MalformedHeader { line: 2, text: "this is not a header".into() }
        );
        let text = "DIMENSION: many\n";
        assert!(matches!(parse_tsplib(text), Err(TsplibError::MalformedHeader { line: 1, .. })));
    }

    #[test]
    fn malformed_coordinate() {
        let text = "DIMENSION: 1\nNODE_COORD_SECTION\n1 2\n";
        assert!(matches!(parse_tsplib(text), Err(TsplibError::MalformedCoordinate { line: 3, .. })));
    }

    #[test]
    fn eof_is_optional() {
        let text = "DIMENSION: 1\nNODE_COORD_SECTION\n1 2 3";
        assert_eq!(parse_tsplib(text).unwrap().nodes.len(), 1);
    }
}
