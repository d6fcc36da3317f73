use super::PathError;
use crate::store::{LinkId, Spectrum, TwinStore};

/// Per-slot availability across every link of `route`.
pub fn free_mask(store: &TwinStore, route: &[LinkId]) -> Vec<bool> {
    let mut free = vec![true; store.topology().band.slot_count() as usize];
    for link in route {
        for (first, n, _) in store.occupancy(link.as_str()) {
            free[first as usize..(first + n) as usize].fill(false);
        }
    }
    free
}

/// First-fit: the lowest-frequency run of `slots` free on every route link.
pub fn assign_spectrum(store: &TwinStore, route: &[LinkId], slots: u32) -> Result<Spectrum, PathError> {
    let free = free_mask(store, route);
    let n = slots as usize;
    let mut run = 0;
    for (i, &f) in free.iter().enumerate() {
        run = if f { run + 1 } else { 0 };
        if n > 0 && run == n {
            return Ok(store.topology().band.spectrum((i + 1 - n) as u32, slots));
        }
    }
    Err(PathError::NoSpectrum { slots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::store::{Lightpath, LpState};

    fn occupy(store: &mut TwinStore, id: &str, route: &[&str], first: u32, n: u32) {
        let (src, dst) = match route {
            ["R1-R2"] => ("R1", "R2"),
            ["R2-R3"] => ("R2", "R3"),
            _ => ("R1", "R3"),
        };
        let lp = Lightpath {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
            route: route.iter().map(|&l| LinkId::from(l)).collect(),
            spectrum: store.topology().band.spectrum(first, n),
            trx: "100G-QPSK-32GBd-SCFEC".into(),
            target_margin_db: 0.0,
            service_class: "standard".into(),
            state: LpState::Planned,
            backups: Vec::new(),
        };
        store.register_lightpath(lp).unwrap();
    }

    #[test]
    fn empty_network_starts_at_band_edge() {
        let store = fixtures::ring_store();
        let s = assign_spectrum(&store, &[LinkId::from("R1-R2")], 7).unwrap();
        assert_eq!(store.topology().band.slot_range(&s).unwrap(), (0, 7));
    }

    #[test]
    fn full_link_has_no_spectrum() {
        let mut store = fixtures::ring_store();
        let total = store.topology().band.slot_count();
        occupy(&mut store, "LP1", &["R1-R2"], 0, total);
        let route = [LinkId::from("R1-R2"), LinkId::from("R2-R3")];
        assert!(matches!(assign_spectrum(&store, &route, 1), Err(PathError::NoSpectrum { .. })));
    }

    #[test]
    fn fragmented_first_fit_matches_exhaustive_scan() {
        let mut store = fixtures::ring_store();
        occupy(&mut store, "LP1", &["R1-R2"], 0, 5);
        occupy(&mut store, "LP2", &["R2-R3"], 8, 6);
        occupy(&mut store, "LP3", &["R1-R2"], 20, 3);
        occupy(&mut store, "LP4", &["R2-R3"], 26, 13);
        let route = [LinkId::from("R1-R2"), LinkId::from("R2-R3")];
        let band = store.topology().band;
        for n in 1..30 {
            // Oracle: every aligned start, lowest conflict-free one.
            let want = (0..=band.slot_count() - n)
                .map(|first| band.spectrum(first, n))
                .find(|s| store.conflicts(&route, s, None).unwrap().is_empty());
            let got = assign_spectrum(&store, &route, n).ok();
            assert_eq!(got, want, "width {n}");
        }
    }
}
