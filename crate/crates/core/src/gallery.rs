//! Reference parameter sets for the seventeen steady-state phases.

use core::f64::consts::PI;

use crate::error::Result;
use crate::lattice::{ArrayGeometry, ChiralCoupling};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalleryEntry {
    pub tag: char,
    /// Expected `left-right` shape labels.
    pub label: &'static str,
    pub directionality: f64,
    pub xi1_over_pi: f64,
    pub xi2_over_pi: f64,
    pub n_atoms: usize,
}

impl GalleryEntry {
    /// Geometry with the interface at `⌈N/2⌉`.
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::centered(self.n_atoms, self.xi1_over_pi * PI, self.xi2_over_pi * PI)
    }

    pub fn coupling(&self) -> Result<ChiralCoupling> {
        ChiralCoupling::new(self.directionality)
    }
}

const fn entry(
    tag: char,
    label: &'static str,
    directionality: f64,
    xi1_over_pi: f64,
    xi2_over_pi: f64,
    n_atoms: usize,
) -> GalleryEntry {
    GalleryEntry {
        tag,
        label,
        directionality,
        xi1_over_pi,
        xi2_over_pi,
        n_atoms,
    }
}

pub const GALLERY: [GalleryEntry; 17] = [
    entry('a', "CO-ETD", 0.5, 0.1, 1e-4, 100),
    entry('b', "BE-ETD", 0.5, 0.25, 1e-4, 100),
    entry('c', "BH-ETD", 0.5, 0.5, 1e-4, 100),
    entry('d', "ETD-eCFD", 0.2, 1e-4, 1.0, 100),
    entry('e', "ETD-oCFD", 0.2, 1e-4, 1.0, 101),
    entry('f', "CO-CO", 0.5, 0.15, 0.9, 100),
    entry('g', "CO-BE", 0.5, 0.1, 0.3, 100),
    entry('h', "CO-BH", 0.5, 0.1, 0.6, 100),
    entry('i', "CO-eCFD", 0.4, 0.1, 1.0, 100),
    entry('j', "CO-oCFD", 0.5, 0.1, 1.0, 100),
    entry('k', "EH-HE", 0.5, 0.25, 0.2, 100),
    entry('l', "BH-BE", 0.5, 0.6, 0.25, 100),
    entry('m', "eCFD-BE", 0.5, 1.0, 0.25, 100),
    entry('n', "BE-oCFD", 0.5, 0.25, 1.0, 100),
    entry('o', "BH-BH", 0.7, 0.6, 0.7, 100),
    entry('p', "eCFD-EH", 0.5, 1.0, 0.75, 100),
    entry('q', "HE-oCFD", 0.5, 0.75, 1.0, 100),
];

pub fn lookup(tag: char) -> Option<&'static GalleryEntry> {
    GALLERY.iter().find(|e| e.tag == tag)
}
