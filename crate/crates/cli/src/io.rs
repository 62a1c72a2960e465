//! CSV readers and writers for panels and posterior draws.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use panelqr::model::{DrawMatrix, RunMeta};
use panelqr::{Error, PanelData, PosteriorDraws, Result};

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Data(format!("{}: {e}", path.display()));
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => unreachable!("checked by is_io_error"),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Reads a panel with header `id,t,y,<covariates...>`. Rows of one id must
/// be contiguous and strictly increasing in `t`. `mundlak` names the
/// covariates entering the individual means (all covariates if `None`).
pub fn ingest_panel_csv(path: &Path, mundlak: Option<&[String]>) -> Result<PanelData> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "t" || &header[2] != "y" {
        return Err(Error::Data(format!(
            "{}: header must start with id,t,y, got `{}`",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let names: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let mut seen_names = HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen_names.insert(n.as_str())) {
        return Err(Error::Data(format!("{}: duplicate column `{dup}`", path.display())));
    }

    let mut ids: Vec<String> = Vec::new();
    let mut lengths: Vec<usize> = Vec::new();
    let mut periods = Vec::new();
    let mut y = Vec::new();
    let mut cov = Vec::new();
    let mut finished: HashSet<String> = HashSet::new();

    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |col: &str, msg: String| Error::Data(format!("{}: line {line}, column `{col}`: {msg}", path.display()));
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "{}: line {line}: expected {} fields, got {}",
                path.display(),
                header.len(),
                record.len()
            )));
        }
        let id = &record[0];
        let t: i64 = record[1].parse().map_err(|_| at("t", format!("`{}` is not an integer", &record[1])))?;
        let yv: u8 = match &record[2] {
            "0" => 0,
            "1" => 1,
            other => return Err(at("y", format!("outcome must be 0 or 1, got `{other}`"))),
        };
        for (j, name) in names.iter().enumerate() {
            let v: f64 = record[3 + j]
                .parse()
                .map_err(|_| at(name, format!("`{}` is not a number", &record[3 + j])))?;
            if !v.is_finite() {
                return Err(at(name, format!("`{}` is not finite", &record[3 + j])));
            }
            cov.push(v);
        }

        if ids.last().map(String::as_str) == Some(id) {
            let prev = *periods.last().unwrap();
            if t == prev {
                return Err(at("t", format!("duplicate observation (id `{id}`, t {t})")));
            }
            if t < prev {
                return Err(at("t", format!("periods of id `{id}` are not increasing ({prev} then {t})")));
            }
            *lengths.last_mut().unwrap() += 1;
        } else {
            if finished.contains(id) {
                return Err(at("id", format!("rows of id `{id}` are not contiguous")));
            }
            if let Some(last) = ids.last() {
                finished.insert(last.clone());
            }
            ids.push(id.to_string());
            lengths.push(1);
        }
        periods.push(t);
        y.push(yv);
    }

    let mundlak_cols = match mundlak {
        None => None,
        Some(list) => Some(
            list.iter()
                .map(|name| {
                    names
                        .iter()
                        .position(|n| n == name)
                        .map(|j| j + 1)
                        .ok_or_else(|| Error::config("mundlak", format!("no column `{name}` in {}", path.display())))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    PanelData::new(ids, &lengths, periods, y, &cov, names, mundlak_cols)
}

/// Writes a panel back in the ingest format. Numbers use the shortest
/// representation that parses back to the same value.
pub fn write_panel_csv(path: &Path, data: &PanelData) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["id".to_string(), "t".into(), "y".into()];
    header.extend(data.columns()[1..].iter().cloned());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..data.n() {
        for r in data.rows(i) {
            row.clear();
            row.push(data.ids()[i].clone());
            row.push(data.periods()[r].to_string());
            row.push(data.y()[r].to_string());
            row.extend(data.row(r)[1..].iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per kept draw: `beta_*`, `zeta_*`, `sigma_alpha2`, then
/// `alpha_1..alpha_n` when stored.
pub fn write_draws_csv(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let mut out = std::io::BufWriter::new(create(path)?);
    let io = |e| Error::io(path, e);
    let mut header: Vec<String> = draws.beta_names.iter().chain(&draws.zeta_names).cloned().collect();
    header.push("sigma_alpha2".into());
    if let Some(a) = &draws.alpha {
        header.extend((1..=a.ncols()).map(|i| format!("alpha_{i}")));
    }
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let mut line = String::new();
    for m in 0..draws.len() {
        line.clear();
        let alpha_row = draws.alpha.as_ref().map(|a| a.row(m)).unwrap_or(&[]);
        let values = draws.beta.row(m).iter().chain(draws.zeta.row(m)).chain([&draws.sigma_alpha_sq[m]]).chain(alpha_row);
        for (j, v) in values.enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Draws file contents before they are attached to run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawsTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DrawsTable {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Structural parameters, i.e. every column except `alpha_*`.
    pub fn parameters(&self) -> Vec<(String, Vec<f64>)> {
        self.names
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.starts_with("alpha_"))
            .map(|(j, n)| (n.clone(), self.column(j)))
            .collect()
    }

    pub fn into_draws(self, meta: RunMeta) -> Result<PosteriorDraws> {
        let pick = |prefix: &str| -> Vec<usize> {
            self.names.iter().enumerate().filter(|(_, n)| n.starts_with(prefix)).map(|(j, _)| j).collect()
        };
        let (b, z, a) = (pick("beta_"), pick("zeta_"), pick("alpha_"));
        let s = self
            .names
            .iter()
            .position(|n| n == "sigma_alpha2")
            .ok_or_else(|| Error::Data("draws file has no sigma_alpha2 column".into()))?;
        let gather = |cols: &[usize]| {
            let mut m = DrawMatrix::with_capacity(cols.len(), self.rows.len());
            for r in &self.rows {
                let row: Vec<f64> = cols.iter().map(|&j| r[j]).collect();
                m.push_row(&row);
            }
            m
        };
        Ok(PosteriorDraws {
            beta_names: b.iter().map(|&j| self.names[j].clone()).collect(),
            zeta_names: z.iter().map(|&j| self.names[j].clone()).collect(),
            beta: gather(&b),
            zeta: gather(&z),
            sigma_alpha_sq: self.column(s),
            alpha: (!a.is_empty()).then(|| gather(&a)),
            meta,
        })
    }
}

pub fn read_draws_csv(path: &Path) -> Result<DrawsTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(file);
    let names: Vec<String> = reader.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(Error::Data(format!("{}: line 1: malformed header", path.display())));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(Error::Data(format!(
                "{}: line {line}: expected {} fields, got {}",
                path.display(),
                names.len(),
                record.len()
            )));
        }
        let row = record
            .iter()
            .zip(&names)
            .map(|(v, n)| {
                v.parse::<f64>()
                    .map_err(|_| Error::Data(format!("{}: line {line}, column `{n}`: `{v}` is not a number", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(DrawsTable { names, rows })
}
