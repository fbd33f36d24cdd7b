use super::output::Table;
use crate::error::Result;
use crate::model::{Model, NamedLabel};

pub const DARKSTATE_COLUMNS: [&str; 11] = [
    "t", "omega", "g1", "g2", "theta", "beta", "gamma", "vartheta", "dark_A", "dark_C", "dark_E",
];

/// Mixing angles and |A⟩, |C⟩, |E⟩ coordinates of the global dark state at
/// each time. Undefined entries are left empty.
pub fn darkstate_table(model: &Model, times: &[f64]) -> Result<Table> {
    let mut table = Table::new(&DARKSTATE_COLUMNS);
    let basis = model.named_basis();
    for &t in times {
        let (omega, g1, g2) = model.couplings(t);
        let angles = model.mixing_angles(t);
        let dark = model.dark_state_global(t).ok();
        let coord = |l: NamedLabel| dark.as_ref().map(|d| basis.amplitude(l, d).re);
        table.push(vec![
            Some(t),
            Some(omega),
            Some(g1),
            Some(g2),
            angles.theta,
            angles.beta,
            angles.gamma,
            angles.vartheta,
            coord(NamedLabel::A),
            coord(NamedLabel::C),
            coord(NamedLabel::E),
        ])?;
    }
    Ok(table)
}
