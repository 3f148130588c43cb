use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::QuadVal;
use crate::surface::SurfaceModel;

use super::enumerate::{enumerate_orbit, HolonomyWindow};

/// Ordered heights `ζ_1 < ζ_2 < …` below a cutoff, with the geometric totient
/// `φ(ζ_k)` = number of Λ points at height `ζ_k` with `0 ≤ x < α ζ_k`.
#[derive(Clone, Debug)]
pub struct HeightTable {
    pub surface: Arc<SurfaceModel>,
    pub cutoff: QuadVal,
    pub heights: Vec<QuadVal>,
    pub phi: Vec<u64>,
}

#[derive(Serialize)]
struct HeightRow {
    zeta: f64,
    zeta_exact: String,
    phi: u64,
}

impl HeightTable {
    /// Enumerates the orbit just far enough for the triangle `0 < y < R`,
    /// `0 ≤ x < α y`.
    pub fn compute(surface: &Arc<SurfaceModel>, cutoff: &QuadVal) -> Result<Self> {
        let x_max = &surface.alpha * cutoff;
        let window = enumerate_orbit(surface, &x_max, cutoff)?;
        heights_table(&window, cutoff)
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn heights_f64(&self) -> Vec<f64> {
        self.heights.iter().map(QuadVal::to_f64).collect()
    }

    /// `φ(j)`, or 0 when `j` is not a height.
    pub fn phi_of(&self, j: &QuadVal) -> u64 {
        self.heights.binary_search(j).map(|i| self.phi[i]).unwrap_or(0)
    }

    /// Restriction to heights below a smaller cutoff.
    pub fn truncated(&self, cutoff: &QuadVal) -> Result<Self> {
        if *cutoff > self.cutoff {
            return Err(Error::UndersizedWindow(format!(
                "table cutoff {} is below the requested {}",
                self.cutoff, cutoff
            )));
        }
        let n = self.heights.partition_point(|h| h < cutoff);
        Ok(HeightTable {
            surface: self.surface.clone(),
            cutoff: cutoff.clone(),
            heights: self.heights[..n].to_vec(),
            phi: self.phi[..n].to_vec(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.is_empty() {
            w.write_record(["zeta", "zeta_exact", "phi"])?;
        }
        for (h, p) in self.heights.iter().zip(&self.phi) {
            w.serialize(HeightRow { zeta: h.to_f64(), zeta_exact: h.to_string(), phi: *p })?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn heights_table(window: &HolonomyWindow, cutoff: &QuadVal) -> Result<HeightTable> {
    let alpha = &window.surface.alpha;
    if *cutoff > window.y_max || (alpha * cutoff) > window.x_max {
        return Err(Error::UndersizedWindow(format!(
            "heights below {cutoff} need y_max >= {cutoff} and x_max >= {}, window has ({}, {})",
            alpha * cutoff,
            window.x_max,
            window.y_max
        )));
    }
    let mut heights: Vec<QuadVal> = Vec::new();
    let mut phi: Vec<u64> = Vec::new();
    for c in window.classes() {
        if c.y >= *cutoff {
            break;
        }
        match heights.last() {
            Some(h) if *h == c.y => *phi.last_mut().unwrap() += 1,
            _ => {
                heights.push(c.y.clone());
                phi.push(1);
            }
        }
    }
    Ok(HeightTable { surface: window.surface.clone(), cutoff: cutoff.clone(), heights, phi })
}

/// `R^{-2} Σ_{j < R} φ(j)`.
pub fn estimate_c_omega(table: &HeightTable) -> f64 {
    let r = table.cutoff.to_f64();
    let total: u64 = table.phi.iter().sum();
    total as f64 / (r * r)
}

/// `R^{-1} Σ_{j < R} φ(j)/j`.
pub fn weighted_height_sum(table: &HeightTable) -> f64 {
    let r = table.cutoff.to_f64();
    let total: f64 = table.heights.iter().zip(&table.phi).map(|(h, p)| *p as f64 / h.to_f64()).sum();
    total / r
}

/// Number of pairs `(e1, v)`, `v ∈ ±Λ`, with `|det(e1, v)| = j` and
/// `0 ≤ v_x < α j`, counted from the expanded window vectors.
pub fn det_class_count(window: &HolonomyWindow, j: &QuadVal) -> Result<u64> {
    if j.is_negative() {
        return Err(Error::Domain(format!("negative determinant {j}")));
    }
    let alpha = &window.surface.alpha;
    let width = alpha * j;
    if *j >= window.y_max || width > window.x_max {
        return Err(Error::UndersizedWindow(format!("determinant {j} needs y_max > {j} and x_max >= {width}")));
    }
    let vectors = window.vectors();
    if j.is_zero() {
        // ±e1 are the only horizontal vectors collinear with e1
        let n = vectors.iter().filter(|v| v.y.is_zero()).count() as u64;
        return Ok(2 * n);
    }
    let zero = QuadVal::zero();
    let neg_width = -&width;
    let mut n = 0;
    for v in vectors.iter().filter(|v| v.y == *j) {
        // v itself, and −v reflected back to positive x
        if v.x >= zero && v.x < width {
            n += 1;
        }
        if v.x <= zero && v.x > neg_width {
            n += 1;
        }
    }
    Ok(n)
}

/// Largest gap `ζ_{k+1} − ζ_k` in the table.
pub fn max_height_gap(table: &HeightTable) -> Result<QuadVal> {
    if table.len() < 2 {
        return Err(Error::Degenerate(format!("gap needs at least two heights, table has {}", table.len())));
    }
    Ok(table.heights.windows(2).map(|w| &w[1] - &w[0]).max().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_orbit;

    #[test]
    fn torus_totient() {
        let t = HeightTable::compute(&SurfaceModel::torus(), &QuadVal::int(10)).unwrap();
        let hs: Vec<i64> = t.heights.iter().map(|h| h.floor_i64()).collect();
        assert_eq!(hs, (1..10).collect::<Vec<_>>());
        assert_eq!(t.phi, vec![1, 1, 2, 2, 4, 2, 6, 4, 6]);
        assert_eq!(max_height_gap(&t).unwrap(), QuadVal::one());
    }

    #[test]
    fn empty_table_below_first_height() {
        let t = HeightTable::compute(&SurfaceModel::torus(), &QuadVal::one()).unwrap();
        assert!(t.is_empty());
        assert_eq!(estimate_c_omega(&t), 0.0);
        assert_eq!(weighted_height_sum(&t), 0.0);
        assert!(max_height_gap(&t).is_err());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "zeta,zeta_exact,phi\n");
    }

    #[test]
    fn undersized_window_rejected() {
        let s = SurfaceModel::torus();
        let w = enumerate_orbit(&s, &QuadVal::int(3), &QuadVal::int(10)).unwrap();
        assert!(matches!(heights_table(&w, &QuadVal::int(10)), Err(Error::UndersizedWindow(_))));
    }

    #[test]
    fn det_classes_torus() {
        let s = SurfaceModel::torus();
        let w = enumerate_orbit(&s, &QuadVal::int(10), &QuadVal::int(10)).unwrap();
        assert_eq!(det_class_count(&w, &QuadVal::int(6)).unwrap(), 4);
        assert_eq!(det_class_count(&w, &QuadVal::zero()).unwrap(), 2);
        assert_eq!(det_class_count(&w, &QuadVal::ratio(1, 2)).unwrap(), 0);
    }

    #[test]
    fn csv_columns() {
        let t = HeightTable::compute(&SurfaceModel::torus(), &QuadVal::int(4)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "zeta,zeta_exact,phi\n1.0,1,1\n2.0,2,1\n3.0,3,2\n");
    }
}
