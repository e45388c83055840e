use handcorr::correlation::CropGeometry;
use handcorr::morphology::StructuringElement;
use handcorr::synthgest::Perturbation;
use handcorr::{Error, Result};

/// Settings shared by every subcommand, checked once before any work starts.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub canonical_size: usize,
    pub kernel_fraction: f64,
    pub se_side: usize,
    pub perturbation: Perturbation,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.canonical_size;
        let crop = CropGeometry::central(s, s, self.kernel_fraction).map_err(|e| Error::Config(e.to_string()))?;
        if s < 2 * crop.width {
            return Err(Error::Config(format!(
                "canonical size {s} must be at least twice the {}-pixel kernel crop",
                crop.width
            )));
        }
        if self.se_side.is_multiple_of(2) {
            return Err(Error::Config(format!("structuring element side {} must be odd", self.se_side)));
        }
        let p = &self.perturbation;
        let ranges = [p.rotation_deg, p.translation_px, p.noise_sigma, p.speck_prob];
        if ranges.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("perturbation ranges must be finite and non-negative".into()));
        }
        if p.speck_prob > 0.01 {
            return Err(Error::Config(format!("speck probability {} exceeds 0.01", p.speck_prob)));
        }
        Ok(())
    }

    pub fn structuring_element(&self) -> Result<StructuringElement> {
        StructuringElement::square(self.se_side).map_err(|e| Error::Config(e.to_string()))
    }
}
