use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::QuadVal;
use crate::scalar::Scalar;
use crate::surface::SurfaceModel;

use super::enumerate::{enumerate_orbit_with, EnumerationOptions, HolonomyWindow};

/// All class representatives at one height, with lift columns when tracked.
#[derive(Clone, Debug)]
pub struct Layer<S> {
    pub y: S,
    pub xs: Vec<S>,
    /// `(γ_12, γ_22)` for a γ ∈ Γ with `γ e1 = (x, y)`; empty when not tracked.
    pub lifts: Vec<(S, S)>,
}

/// Λ grouped by height up to (excluding) `cover`, in a chosen arithmetic.
#[derive(Clone, Debug)]
pub struct Layers<S> {
    pub surface: Arc<SurfaceModel>,
    pub alpha: S,
    pub cover: S,
    pub cover_exact: QuadVal,
    pub rows: Vec<Layer<S>>,
    pub has_lifts: bool,
}

impl<S: Scalar> Layers<S> {
    pub fn build(surface: &Arc<SurfaceModel>, cover: &QuadVal, with_lifts: bool) -> Result<Self> {
        Self::build_with(surface, cover, &EnumerationOptions { track_lifts: with_lifts, ..Default::default() })
    }

    pub fn build_with(surface: &Arc<SurfaceModel>, cover: &QuadVal, opts: &EnumerationOptions) -> Result<Self> {
        let window = enumerate_orbit_with(surface, &(&surface.alpha * cover), cover, opts)?;
        Ok(Self::from_window(&window))
    }

    pub fn from_window(window: &HolonomyWindow) -> Self {
        let lifts = window.lifts();
        let mut rows: Vec<Layer<S>> = Vec::new();
        let mut current: Option<QuadVal> = None;
        for (i, c) in window.classes().iter().enumerate() {
            if current.as_ref() != Some(&c.y) {
                current = Some(c.y.clone());
                rows.push(Layer { y: S::from_quad(&c.y), xs: Vec::new(), lifts: Vec::new() });
            }
            let row = rows.last_mut().expect("row pushed");
            row.xs.push(S::from_quad(&c.x));
            if let Some(l) = lifts {
                row.lifts.push((S::from_quad(&l[i].x), S::from_quad(&l[i].y)));
            }
        }
        Layers {
            surface: window.surface.clone(),
            alpha: S::from_quad(&window.surface.alpha),
            cover: S::from_quad(&window.y_max),
            cover_exact: window.y_max.clone(),
            rows,
            has_lifts: lifts.is_some(),
        }
    }

    pub fn class_count(&self) -> usize {
        self.rows.iter().map(|r| r.xs.len()).sum()
    }

    /// Fails unless every height below `y` is present.
    pub fn require_cover(&self, y: &S) -> Result<()> {
        if self.cover.lt(y) {
            return Err(Error::UndersizedWindow(format!(
                "heights up to {} needed, layers cover {}",
                y.to_f64(),
                self.cover.to_f64()
            )));
        }
        Ok(())
    }

    /// Rows with `y < bound`.
    pub fn below<'a>(&'a self, bound: &'a S) -> impl Iterator<Item = &'a Layer<S>> + 'a {
        self.rows.iter().take_while(move |r| r.y.lt(bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_layers_match_totient() {
        let l = Layers::<f64>::build(&SurfaceModel::torus(), &QuadVal::int(7), true).unwrap();
        let sizes: Vec<usize> = l.rows.iter().map(|r| r.xs.len()).collect();
        assert_eq!(sizes, vec![1, 1, 2, 2, 4, 2]);
        assert_eq!(l.rows[4].xs, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(l.rows.iter().all(|r| r.lifts.len() == r.xs.len()));
        // S e1 = (0, 1) with second column (−1, 0)
        assert_eq!(l.rows[0].lifts[0], (-1.0, 0.0));
        assert!(l.require_cover(&7.0).is_ok());
        assert!(l.require_cover(&7.5).is_err());
    }
}
