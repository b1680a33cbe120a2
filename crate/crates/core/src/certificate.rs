//! Either kind of certificate behind one interface.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Matrix;
use crate::model::{ControlKind, Controller, PolytopicPlant};
use crate::scalar::Real;
use crate::sim::CertificateClaims;
use crate::uvc::UvcCertificate;
use crate::vsc::VscCertificate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Certificate<T: Real> {
    Vsc(VscCertificate<T>),
    Uvc(UvcCertificate<T>),
}

impl<T: Real> Certificate<T> {
    pub fn kind(&self) -> ControlKind {
        match self {
            Certificate::Vsc(_) => ControlKind::Vsc,
            Certificate::Uvc(_) => ControlKind::Uvc,
        }
    }

    pub fn t_bound(&self) -> T {
        match self {
            Certificate::Vsc(c) => c.t_bound,
            Certificate::Uvc(c) => c.t_bound,
        }
    }

    pub fn gain(&self) -> &Matrix<T> {
        match self {
            Certificate::Vsc(c) => &c.gain,
            Certificate::Uvc(c) => &c.gain,
        }
    }

    pub fn sigma0(&self) -> &[T] {
        match self {
            Certificate::Vsc(c) => &c.sigma0,
            Certificate::Uvc(c) => &c.sigma0,
        }
    }

    /// `ρ` for unit vector control.
    pub fn rho(&self) -> Option<T> {
        match self {
            Certificate::Vsc(_) => None,
            Certificate::Uvc(c) => Some(c.rho),
        }
    }

    pub fn controller(&self) -> Controller<T> {
        match self {
            Certificate::Vsc(c) => c.controller(),
            Certificate::Uvc(c) => c.controller(),
        }
    }

    pub fn claims(&self) -> Result<CertificateClaims<T>> {
        match self {
            Certificate::Vsc(c) => Ok(CertificateClaims::from(c)),
            Certificate::Uvc(c) => CertificateClaims::try_from(c),
        }
    }

    /// Smallest block margin of the rebuilt program at the stored variables.
    pub fn recheck(&self, plant: &PolytopicPlant<T>) -> Result<T> {
        match self {
            Certificate::Vsc(c) => c.recheck(plant),
            Certificate::Uvc(c) => c.recheck(plant),
        }
    }

    pub fn conditioning_warning(&self) -> bool {
        match self {
            Certificate::Vsc(c) => c.conditioning_warning,
            Certificate::Uvc(c) => c.conditioning_warning,
        }
    }
}
