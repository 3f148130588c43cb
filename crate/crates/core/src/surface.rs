//! Lattice-surface models: Veech-group generators, orbit representatives and
//! the parabolic parameter α, loaded from JSON presets and validated.

use std::collections::{HashSet, VecDeque};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{valid_field_tag, Mat2, QuadVal, Rational, Vec2};

/// One field element in the preset encoding `a_num/a_den + (b_num/b_den)√d`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuadEntry {
    pub a_num: i64,
    pub a_den: i64,
    pub b_num: i64,
    pub b_den: i64,
}

impl QuadEntry {
    fn decode(&self, d: u32) -> Result<QuadVal> {
        if self.a_den == 0 || self.b_den == 0 {
            return Err(Error::Preset("zero denominator".into()));
        }
        let b = Rational::new(self.b_num, self.b_den);
        if d == 0 && !b.is_zero() {
            return Err(Error::Preset("irrational entry with d = 0".into()));
        }
        QuadVal::new(Rational::new(self.a_num, self.a_den), b, d)
    }

    pub fn encode(q: &QuadVal) -> Result<Self> {
        let small = |r: &Rational| -> Result<(i64, i64)> {
            use num_traits::ToPrimitive;
            match (r.numer().to_i64(), r.denom().to_i64()) {
                (Some(n), Some(d)) => Ok((n, d)),
                _ => Err(Error::Preset(format!("entry {r} exceeds the i64 encoding"))),
            }
        };
        let (a_num, a_den) = small(q.a())?;
        let (b_num, b_den) = small(q.b())?;
        Ok(QuadEntry { a_num, a_den, b_num, b_den })
    }
}

/// On-disk preset document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresetFile {
    pub name: String,
    pub d: u32,
    pub alpha: QuadEntry,
    pub generators: Vec<[QuadEntry; 4]>,
    pub reps: Vec<[QuadEntry; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

const BUILTIN: [(&str, &str); 3] = [
    ("torus", include_str!("../presets/torus.json")),
    ("golden-l", include_str!("../presets/golden-l.json")),
    ("hecke-sqrt2", include_str!("../presets/hecke-sqrt2.json")),
];

/// Maximum word length searched when validating group data.
const WORD_SEARCH_DEPTH: usize = 6;

/// A lattice surface described by its Veech group Γ and orbit representatives
/// `v_i` with Λ = ⊔ Γ v_i.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub name: String,
    pub d: u32,
    /// Generator of the stabilizer `[[1, α], [0, 1]]` of (1, 0).
    pub alpha: QuadVal,
    pub generators: Vec<Mat2>,
    pub reps: Vec<Vec2>,
    pub has_minus_id: bool,
    pub notes: Option<String>,
    /// Generator indices whose product is `[[1, α], [0, 1]]`.
    pub parabolic_word: Vec<usize>,
}

impl SurfaceModel {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<Arc<Self>> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Preset(format!("unknown preset {name:?}")))?;
        Self::from_json(text)
    }

    pub fn torus() -> Arc<Self> {
        Self::preset("torus").expect("builtin torus preset")
    }

    pub fn golden_l() -> Arc<Self> {
        Self::preset("golden-l").expect("builtin golden-l preset")
    }

    pub fn hecke_sqrt2() -> Arc<Self> {
        Self::preset("hecke-sqrt2").expect("builtin hecke-sqrt2 preset")
    }

    pub fn all_presets() -> Vec<Arc<Self>> {
        Self::builtin_names().map(|n| Self::preset(n).expect("builtin preset")).collect()
    }

    pub fn from_path(path: &Path) -> Result<Arc<Self>> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Arc<Self>> {
        let file: PresetFile = serde_json::from_str(text)?;
        Self::from_preset(&file).map(Arc::new)
    }

    pub fn from_preset(file: &PresetFile) -> Result<Self> {
        let d = file.d;
        if !valid_field_tag(d) {
            return Err(Error::Preset(format!("field tag {d} is not square-free")));
        }
        let alpha = file.alpha.decode(d)?;
        if !alpha.is_positive() {
            return Err(Error::Preset("alpha must be positive".into()));
        }
        let generators = file
            .generators
            .iter()
            .map(|[a, b, c, e]| Ok(Mat2::new(a.decode(d)?, b.decode(d)?, c.decode(d)?, e.decode(d)?)))
            .collect::<Result<Vec<_>>>()?;
        let reps =
            file.reps.iter().map(|[x, y]| Ok(Vec2::new(x.decode(d)?, y.decode(d)?))).collect::<Result<Vec<_>>>()?;
        Self::validated(file.name.clone(), d, alpha, generators, reps, file.notes.clone())
    }

    /// Checks the standing assumptions that can be checked from the data.
    pub fn validated(
        name: String,
        d: u32,
        alpha: QuadVal,
        generators: Vec<Mat2>,
        reps: Vec<Vec2>,
        notes: Option<String>,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Preset("no generators".into()));
        }
        for g in &generators {
            if g.det() != QuadVal::one() {
                return Err(Error::Preset(format!("generator {g} has determinant != 1")));
            }
            if !generators.contains(&g.inverse_unimodular()) {
                return Err(Error::Preset(format!("inverse of generator {g} is not listed")));
            }
        }
        if reps.iter().any(Vec2::is_zero) {
            return Err(Error::Preset("zero orbit representative".into()));
        }
        if !reps.contains(&Vec2::e1()) {
            return Err(Error::Preset("orbit representatives must contain (1, 0)".into()));
        }

        let parabolic = Mat2::stable_horocycle(&alpha);
        let mut parabolic_word = None;
        let mut has_minus_id = false;
        let minus_id = Mat2::minus_identity();
        for (m, word) in words(&generators, WORD_SEARCH_DEPTH) {
            if parabolic_word.is_none() && m == parabolic {
                parabolic_word = Some(word.clone());
            }
            if m == minus_id {
                has_minus_id = true;
            }
            // every element fixing (1,0) up to sign must be a power of the parabolic
            if m.e21.is_zero() && (m.e11 == QuadVal::one() || m.e11 == -QuadVal::one()) {
                let k = &m.e12 / &alpha;
                if !is_integer(&k) {
                    return Err(Error::Preset(format!(
                        "stabilizer element {m} is not a power of [[1, alpha], [0, 1]]: alpha is not maximal"
                    )));
                }
            }
        }
        let parabolic_word = parabolic_word.ok_or_else(|| {
            Error::Preset(format!("[[1, alpha], [0, 1]] not found among words of length <= {WORD_SEARCH_DEPTH}"))
        })?;

        Ok(SurfaceModel { name, d, alpha, generators, reps, has_minus_id, notes, parabolic_word })
    }

    pub fn parabolic(&self) -> Mat2 {
        Mat2::stable_horocycle(&self.alpha)
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64()
    }

    /// Generators up to sign; `g` and `−g` act identically on classes modulo ±Id.
    pub fn projective_generators(&self) -> Vec<Mat2> {
        let mut out: Vec<Mat2> = Vec::new();
        for g in &self.generators {
            if !out.contains(g) && !out.contains(&-g) {
                out.push(g.clone());
            }
        }
        out
    }

    /// Largest operator norm among the generators.
    pub fn max_generator_norm(&self) -> f64 {
        self.generators.iter().map(Mat2::operator_norm).fold(1.0, f64::max)
    }

    pub fn to_preset(&self) -> Result<PresetFile> {
        let enc = |m: &Mat2| -> Result<[QuadEntry; 4]> {
            Ok([
                QuadEntry::encode(&m.e11)?,
                QuadEntry::encode(&m.e12)?,
                QuadEntry::encode(&m.e21)?,
                QuadEntry::encode(&m.e22)?,
            ])
        };
        Ok(PresetFile {
            name: self.name.clone(),
            d: self.d,
            alpha: QuadEntry::encode(&self.alpha)?,
            generators: self.generators.iter().map(enc).collect::<Result<_>>()?,
            reps: self
                .reps
                .iter()
                .map(|v| Ok([QuadEntry::encode(&v.x)?, QuadEntry::encode(&v.y)?]))
                .collect::<Result<_>>()?,
            notes: self.notes.clone(),
        })
    }
}

fn is_integer(q: &QuadVal) -> bool {
    q.is_rational() && q.a().is_integer()
}

/// All distinct group elements given by words of length ≤ `depth`, with a
/// shortest word for each.
fn words(generators: &[Mat2], depth: usize) -> Vec<(Mat2, Vec<usize>)> {
    let mut seen: HashSet<Mat2> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(Mat2::identity(), Vec::new())]);
    seen.insert(Mat2::identity());
    while let Some((m, word)) = queue.pop_front() {
        if word.len() < depth {
            for (i, g) in generators.iter().enumerate() {
                let next = &m * g;
                if seen.insert(next.clone()) {
                    let mut w = word.clone();
                    w.push(i);
                    queue.push_back((next, w));
                }
            }
        }
        out.push((m, word));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_presets_validate() {
        for s in SurfaceModel::all_presets() {
            assert!(s.has_minus_id, "{}", s.name);
            let mut m = Mat2::identity();
            for &i in &s.parabolic_word {
                m = &m * &s.generators[i];
            }
            assert_eq!(m, s.parabolic());
            assert_eq!(s.reps, vec![Vec2::e1()]);
        }
        assert_eq!(SurfaceModel::torus().alpha, QuadVal::one());
        assert!((SurfaceModel::golden_l().alpha_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn non_maximal_alpha_rejected() {
        let torus = SurfaceModel::torus();
        let mut file = torus.to_preset().unwrap();
        file.alpha = QuadEntry::encode(&QuadVal::int(2)).unwrap();
        let err = SurfaceModel::from_preset(&file).unwrap_err();
        assert!(err.to_string().contains("not maximal"), "{err}");
    }

    #[test]
    fn missing_inverse_rejected() {
        let mut file = SurfaceModel::torus().to_preset().unwrap();
        file.generators.pop();
        assert!(SurfaceModel::from_preset(&file).is_err());
    }

    #[test]
    fn missing_e1_rejected() {
        let mut file = SurfaceModel::torus().to_preset().unwrap();
        file.reps = vec![[QuadEntry::encode(&QuadVal::zero()).unwrap(), QuadEntry::encode(&QuadVal::one()).unwrap()]];
        assert!(SurfaceModel::from_preset(&file).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(SurfaceModel::preset("octagon").is_err());
    }

    #[test]
    fn projective_generators_drop_signs() {
        // S and S⁻¹ = −S collapse; T and T⁻¹ stay
        assert_eq!(SurfaceModel::torus().projective_generators().len(), 3);
    }
}
