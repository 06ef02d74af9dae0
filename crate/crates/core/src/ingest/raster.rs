use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// Gridded population counts in an ESRI ASCII grid layout.
///
/// `values` is row-major with row 0 at the northern edge, as in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRaster {
    pub ncols: usize,
    pub nrows: usize,
    /// Longitude of the lower-left corner.
    pub xll: f64,
    /// Latitude of the lower-left corner.
    pub yll: f64,
    pub cellsize: f64,
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl PopulationRaster {
    pub fn new(
        ncols: usize,
        nrows: usize,
        xll: f64,
        yll: f64,
        cellsize: f64,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let r = PopulationRaster {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata,
            values,
        };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.ncols * self.nrows != self.values.len() {
            return Err(Error::Invalid(format!(
                "raster has {} values for a {}x{} grid",
                self.values.len(),
                self.ncols,
                self.nrows
            )));
        }
        if !(self.cellsize > 0.0) {
            return Err(Error::Invalid(format!("raster cellsize {} must be positive", self.cellsize)));
        }
        if let Some(v) = self
            .values
            .iter()
            .find(|&&v| v != self.nodata && !(v >= 0.0 && v.is_finite()))
        {
            return Err(Error::Invalid(format!("negative or non-finite population value {v}")));
        }
        Ok(())
    }

    /// Population of a cell; `None` for the no-data sentinel.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.values[row * self.ncols + col];
        (v != self.nodata).then_some(v)
    }

    /// Centre of a cell as (lon, lat).
    pub fn centroid(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.xll + (col as f64 + 0.5) * self.cellsize,
            self.yll + (self.nrows as f64 - row as f64 - 0.5) * self.cellsize,
        )
    }

    /// Row and column of the cell covering (lon, lat), if any.
    pub fn cell_at(&self, lon: f64, lat: f64) -> Option<(usize, usize)> {
        let c = ((lon - self.xll) / self.cellsize).floor();
        let r_from_bottom = ((lat - self.yll) / self.cellsize).floor();
        if c < 0.0 || r_from_bottom < 0.0 {
            return None;
        }
        let (c, rb) = (c as usize, r_from_bottom as usize);
        if c >= self.ncols || rb >= self.nrows {
            return None;
        }
        Some((self.nrows - 1 - rb, c))
    }

    /// Iterates populated cells as `((lon, lat), population)`, skipping
    /// no-data and zero cells.
    pub fn populated_cells(&self) -> impl Iterator<Item = ((f64, f64), f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (0..self.ncols).filter_map(move |c| match self.value(r, c) {
                Some(v) if v > 0.0 => Some((self.centroid(r, c), v)),
                _ => None,
            })
        })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().filter(|&&v| v != self.nodata).sum()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    pub fn read<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut ncols = None;
        let mut nrows = None;
        let mut xll = None;
        let mut yll = None;
        let mut centre_ref = (false, false);
        let mut cellsize = None;
        let mut nodata = -9999.0;
        let mut values = Vec::new();
        let mut in_header = true;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let first = trimmed.split_whitespace().next().unwrap_or("");
            if in_header && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let mut parts = trimmed.split_whitespace();
                let key = parts.next().unwrap().to_ascii_lowercase();
                let val = parts
                    .next()
                    .ok_or_else(|| Error::parse(source_name, line_no, format!("missing value for {key}")))?;
                let num: f64 = val
                    .parse()
                    .map_err(|_| Error::parse(source_name, line_no, format!("bad value {val:?} for {key}")))?;
                match key.as_str() {
                    "ncols" => ncols = Some(num as usize),
                    "nrows" => nrows = Some(num as usize),
                    "xllcorner" => xll = Some(num),
                    "yllcorner" => yll = Some(num),
                    "xllcenter" => {
                        xll = Some(num);
                        centre_ref.0 = true;
                    }
                    "yllcenter" => {
                        yll = Some(num);
                        centre_ref.1 = true;
                    }
                    "cellsize" => cellsize = Some(num),
                    "nodata_value" => nodata = num,
                    other => {
                        return Err(Error::parse(source_name, line_no, format!("unknown header key {other}")))
                    }
                }
                continue;
            }
            in_header = false;
            for tok in trimmed.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(source_name, line_no, format!("bad cell value {tok:?}")))?;
                values.push(v);
            }
        }

        let missing = |k: &str| Error::parse(source_name, 0, format!("missing header {k}"));
        let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
        let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
        let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
        if centre_ref.0 {
            xll -= cellsize / 2.0;
        }
        if centre_ref.1 {
            yll -= cellsize / 2.0;
        }
        Self::new(
            ncols.ok_or_else(|| missing("ncols"))?,
            nrows.ok_or_else(|| missing("nrows"))?,
            xll,
            yll,
            cellsize,
            nodata,
            values,
        )
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ncols {}", self.ncols)?;
        writeln!(w, "nrows {}", self.nrows)?;
        writeln!(w, "xllcorner {}", self.xll)?;
        writeln!(w, "yllcorner {}", self.yll)?;
        writeln!(w, "cellsize {}", self.cellsize)?;
        writeln!(w, "NODATA_value {}", self.nodata)?;
        for row in self.values.chunks(self.ncols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}
