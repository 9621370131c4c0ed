//! Tab-separated survey ingestion.
//!
//! One respondent per row, fixed header, empty cell = question skipped.
//! List-valued cells (news sources, interests) use `;` between items;
//! figure thermometers use `name=value` pairs, also `;`-separated.

use super::{DiscussFreq, SocialMediaFreq};
use std::io::{self, BufRead, Write};
use std::path::Path;
use thiserror::Error;

pub const SURVEY_COLUMNS: [&str; 16] = [
    "id",
    "age",
    "gender",
    "race",
    "education",
    "income_class",
    "religion",
    "state",
    "therm_dem",
    "therm_rep",
    "therm_figures",
    "vote_2020",
    "discuss_politics",
    "social_media_freq",
    "news_sources",
    "nonpolitical_interests",
];

/// One raw survey row. `None` means the respondent skipped the question.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurveyRespondent {
    pub id: String,
    pub age: Option<u32>,
    pub gender: Option<String>,
    pub race: Option<String>,
    pub education: Option<String>,
    pub income_class: Option<String>,
    pub religion: Option<String>,
    pub state: Option<String>,
    /// Feeling thermometer toward the Democratic party, 0..=100.
    pub therm_dem: Option<f64>,
    /// Feeling thermometer toward the Republican party, 0..=100.
    pub therm_rep: Option<f64>,
    /// Feeling thermometers toward named public figures, in file order.
    pub therm_figures: Vec<(String, f64)>,
    pub vote_2020: Option<String>,
    pub discuss_politics: Option<DiscussFreq>,
    /// Required: drives the activity urn, so a row without it is useless.
    pub social_media_freq: SocialMediaFreq,
    pub news_sources: Vec<String>,
    pub nonpolitical_interests: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("survey header mismatch: expected {expected:?}, got {got:?}")]
    Header { expected: String, got: String },
    #[error("survey row {row}: expected {expected} columns, got {got}")]
    ColumnCount { row: usize, expected: usize, got: usize },
    #[error("survey row {row}, field {field}: {reason}")]
    Field { row: usize, field: &'static str, reason: String },
    #[error("survey row {row}: duplicate respondent id {id:?}")]
    DuplicateId { row: usize, id: String },
}

fn opt(cell: &str) -> Option<&str> {
    let t = cell.trim();
    if t.is_empty() {
        None
    } else {
        Some(t)
    }
}

fn list(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn field_err(row: usize, field: &'static str, reason: impl Into<String>) -> SurveyError {
    SurveyError::Field { row, field, reason: reason.into() }
}

fn parse_therm(cell: &str, row: usize, field: &'static str) -> Result<Option<f64>, SurveyError> {
    match opt(cell) {
        None => Ok(None),
        Some(s) => {
            let v: f64 = s
                .parse()
                .map_err(|_| field_err(row, field, format!("not a number: {s:?}")))?;
            if !(0.0..=100.0).contains(&v) {
                return Err(field_err(row, field, format!("thermometer {v} outside 0..=100")));
            }
            Ok(Some(v))
        }
    }
}

/// Parse a survey TSV. Rows are validated eagerly; the first bad cell
/// aborts the load with the row number and field name.
pub fn load_survey<R: BufRead>(r: R) -> Result<Vec<SurveyRespondent>, SurveyError> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(SurveyError::Header {
                expected: SURVEY_COLUMNS.join("\t"),
                got: String::new(),
            })
        }
    };
    let expected = SURVEY_COLUMNS.join("\t");
    if header.trim_end_matches(['\r', '\n']) != expected {
        return Err(SurveyError::Header { expected, got: header });
    }

    let mut out = Vec::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2; // 1-based, after the header
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != SURVEY_COLUMNS.len() {
            return Err(SurveyError::ColumnCount {
                row,
                expected: SURVEY_COLUMNS.len(),
                got: cells.len(),
            });
        }

        let id = cells[0].trim().to_string();
        if id.is_empty() {
            return Err(field_err(row, "id", "must not be empty"));
        }
        if !seen_ids.insert(id.clone()) {
            return Err(SurveyError::DuplicateId { row, id });
        }

        let age = match opt(cells[1]) {
            None => None,
            Some(s) => {
                let v: u32 = s
                    .parse()
                    .map_err(|_| field_err(row, "age", format!("not an integer: {s:?}")))?;
                if !(18..=110).contains(&v) {
                    return Err(field_err(row, "age", format!("age {v} outside 18..=110")));
                }
                Some(v)
            }
        };

        let therm_dem = parse_therm(cells[8], row, "therm_dem")?;
        let therm_rep = parse_therm(cells[9], row, "therm_rep")?;

        let mut therm_figures = Vec::new();
        for item in list(cells[10]) {
            let (name, value) = item.split_once('=').ok_or_else(|| {
                field_err(row, "therm_figures", format!("expected name=value, got {item:?}"))
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(field_err(row, "therm_figures", "empty figure name"));
            }
            let v: f64 = value.trim().parse().map_err(|_| {
                field_err(row, "therm_figures", format!("not a number: {:?}", value.trim()))
            })?;
            if !(0.0..=100.0).contains(&v) {
                return Err(field_err(
                    row,
                    "therm_figures",
                    format!("thermometer {v} outside 0..=100"),
                ));
            }
            therm_figures.push((name.to_string(), v));
        }

        let discuss_politics = match opt(cells[12]) {
            None => None,
            Some(s) => Some(DiscussFreq::parse(s).ok_or_else(|| {
                field_err(row, "discuss_politics", format!("unknown level {s:?}"))
            })?),
        };

        let social_media_freq = match opt(cells[13]) {
            None => return Err(field_err(row, "social_media_freq", "required field is empty")),
            Some(s) => SocialMediaFreq::parse(s).ok_or_else(|| {
                field_err(row, "social_media_freq", format!("unknown level {s:?}"))
            })?,
        };

        out.push(SurveyRespondent {
            id,
            age,
            gender: opt(cells[2]).map(str::to_string),
            race: opt(cells[3]).map(str::to_string),
            education: opt(cells[4]).map(str::to_string),
            income_class: opt(cells[5]).map(str::to_string),
            religion: opt(cells[6]).map(str::to_string),
            state: opt(cells[7]).map(str::to_string),
            therm_dem,
            therm_rep,
            therm_figures,
            vote_2020: opt(cells[11]).map(str::to_string),
            discuss_politics,
            social_media_freq,
            news_sources: list(cells[14]),
            nonpolitical_interests: list(cells[15]),
        });
    }
    Ok(out)
}

pub fn load_survey_file(path: &Path) -> Result<Vec<SurveyRespondent>, SurveyError> {
    let f = std::fs::File::open(path)?;
    load_survey(io::BufReader::new(f))
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Write respondents back out in the same TSV format.
pub fn write_survey<W: Write>(mut w: W, rows: &[SurveyRespondent]) -> io::Result<()> {
    writeln!(w, "{}", SURVEY_COLUMNS.join("\t"))?;
    for r in rows {
        let figures = r
            .therm_figures
            .iter()
            .map(|(n, v)| format!("{n}={}", fmt_num(*v)))
            .collect::<Vec<_>>()
            .join(";");
        let cells = [
            r.id.clone(),
            r.age.map(|a| a.to_string()).unwrap_or_default(),
            r.gender.clone().unwrap_or_default(),
            r.race.clone().unwrap_or_default(),
            r.education.clone().unwrap_or_default(),
            r.income_class.clone().unwrap_or_default(),
            r.religion.clone().unwrap_or_default(),
            r.state.clone().unwrap_or_default(),
            r.therm_dem.map(fmt_num).unwrap_or_default(),
            r.therm_rep.map(fmt_num).unwrap_or_default(),
            figures,
            r.vote_2020.clone().unwrap_or_default(),
            r.discuss_politics.map(|d| d.label().to_string()).unwrap_or_default(),
            r.social_media_freq.label().to_string(),
            r.news_sources.join(";"),
            r.nonpolitical_interests.join(";"),
        ];
        writeln!(w, "{}", cells.join("\t"))?;
    }
    Ok(())
}

pub fn write_survey_file(path: &Path, rows: &[SurveyRespondent]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_survey(&mut w, rows)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> String {
        let mut s = SURVEY_COLUMNS.join("\t");
        s.push('\n');
        s.push_str("r0001\t34\tfemale\tWhite\tbachelor's degree\tmiddle\tCatholic\tOhio\t70\t30\tDonald Trump=10;Joe Biden=75\tJoe Biden\toften\tonce a day\tcnn;npr\treading;gardening\n");
        s
    }

    #[test]
    fn parses_full_row() {
        let rows = load_survey(sample_row().as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!(r.id, "r0001");
        assert_eq!(r.age, Some(34));
        assert_eq!(r.therm_dem, Some(70.0));
        assert_eq!(r.therm_figures, vec![
            ("Donald Trump".to_string(), 10.0),
            ("Joe Biden".to_string(), 75.0),
        ]);
        assert_eq!(r.discuss_politics, Some(DiscussFreq::Often));
        assert_eq!(r.social_media_freq, SocialMediaFreq::OnceADay);
        assert_eq!(r.news_sources, vec!["cnn", "npr"]);
    }

    #[test]
    fn empty_cells_are_absent() {
        let mut s = SURVEY_COLUMNS.join("\t");
        s.push('\n');
        s.push_str("r0002\t\t\t\t\t\t\t\t\t\t\t\t\tonce a week\t\t\n");
        let rows = load_survey(s.as_bytes()).unwrap();
        let r = &rows[0];
        assert_eq!(r.age, None);
        assert_eq!(r.therm_dem, None);
        assert!(r.therm_figures.is_empty());
        assert!(r.news_sources.is_empty());
        assert_eq!(r.social_media_freq, SocialMediaFreq::OnceAWeek);
    }

    #[test]
    fn thermometer_out_of_range_names_row_and_field() {
        let mut s = SURVEY_COLUMNS.join("\t");
        s.push('\n');
        s.push_str("r0003\t\t\t\t\t\t\t\t130\t\t\t\t\tonce a week\t\t\n");
        let err = load_survey(s.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("therm_dem"), "{msg}");
    }

    #[test]
    fn missing_social_media_freq_is_an_error() {
        let mut s = SURVEY_COLUMNS.join("\t");
        s.push('\n');
        s.push_str("r0004\t\t\t\t\t\t\t\t\t\t\t\t\t\t\t\n");
        let err = load_survey(s.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("social_media_freq"));
    }

    #[test]
    fn wrong_column_count_is_an_error() {
        let mut s = SURVEY_COLUMNS.join("\t");
        s.push('\n');
        s.push_str("r0005\t34\n");
        let err = load_survey(s.as_bytes()).unwrap_err();
        assert!(matches!(err, SurveyError::ColumnCount { row: 2, .. }));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut s = sample_row();
        s.push_str("r0001\t\t\t\t\t\t\t\t\t\t\t\t\tnever\t\t\n");
        let err = load_survey(s.as_bytes()).unwrap_err();
        assert!(matches!(err, SurveyError::DuplicateId { .. }));
    }

    #[test]
    fn header_mismatch_rejected() {
        let err = load_survey("id\tage\nr1\t30\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SurveyError::Header { .. }));
    }

    #[test]
    fn roundtrip() {
        let rows = load_survey(sample_row().as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_survey(&mut buf, &rows).unwrap();
        let back = load_survey(&buf[..]).unwrap();
        assert_eq!(back, rows);
    }
}
