use perigrid::gallery::{build, named_set, GalleryKind};
use perigrid_demo::{cycles_view, domain_view, extension_view};

fn parse(summary: &str) -> serde_json::Value {
    serde_json::from_str(summary).expect("summary is JSON")
}

#[test]
fn domain_view_paints_every_set_cell_and_nothing_else() {
    let view = domain_view("disk", 6).unwrap();
    assert_eq!((view.width(), view.height()), (64, 64));
    let dom = build(GalleryKind::Disk, 6).unwrap();
    let background = view
        .pixels()
        .chunks_exact(4)
        .filter(|p| p == &[248, 248, 246, 255])
        .count();
    assert_eq!(background, 64 * 64 - dom.omega.count());
    let summary = parse(&view.summary());
    assert_eq!(summary["cells"], dom.omega.count());
    // Coarse grids keep proportionally more floor cells; the share only
    // needs to be a visible but minor slice of the picture here.
    let floor = summary["floor_fraction"].as_f64().unwrap();
    assert!(floor > 0.0 && floor < 0.2, "floor fraction {floor}");
}

#[test]
fn cycles_view_covers_the_set_with_parts_and_contours() {
    let view = cycles_view("slit_disk", 6, None).unwrap();
    let dom = build(GalleryKind::SlitDisk, 6).unwrap();
    let painted = view
        .pixels()
        .chunks_exact(4)
        .filter(|p| p != &[248, 248, 246, 255])
        .count();
    assert_eq!(painted, dom.omega.count());
    let summary = parse(&view.summary());
    assert!(summary["outer_cycles"].as_u64().unwrap() >= 1);
    assert_eq!(
        summary["parts"].as_u64().unwrap(),
        summary["outer_cycles"].as_u64().unwrap()
    );
}

#[test]
fn extension_view_accounts_for_chamber_added_and_hairline_cells() {
    let view = extension_view(7).unwrap();
    let summary = parse(&view.summary());
    let dom = build(GalleryKind::Comb42, 7).unwrap();
    let chamber = named_set(&dom, "left-half").unwrap();
    assert_eq!(summary["chamber_cells"], chamber.count());
    assert!(summary["perimeter_ratio"].as_f64().unwrap() <= 10.0);
    let added = summary["added_cells"].as_u64().unwrap() as usize;
    assert!(added > 0);
    let green = view
        .pixels()
        .chunks_exact(4)
        .filter(|p| p == &[88, 160, 98, 255])
        .count();
    // Hairline paint covers added cells that lie on the shared boundary,
    // so green counts cells gained strictly off the hairline.
    assert!(green <= added && green > 0, "green {green}, added {added}");
}

#[test]
fn solid_domains_are_rejected_politely() {
    let err = domain_view("fat_cantor_3d", 4).unwrap_err();
    assert!(err.contains("planar"), "{err}");
    assert!(domain_view("no_such_domain", 6).is_err());
}
