use giml_core::corpus::CORPUS;
use giml_core::diagnostics::{count_errors, Code};
use giml_core::expr::ValueExpr;
use giml_core::inspect::inspect_body;
use giml_core::paths::{resolve_resource_path, ResourceKind};
use giml_core::{parse, translate, validate, Language};

#[test]
fn every_fixture_parses_and_validates_cleanly() {
    for (name, text) in CORPUS {
        let (doc, diags) = parse(text, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(count_errors(&diags), 0, "{name}: {diags:?}");
        let semantic = validate(&doc, None);
        assert_eq!(count_errors(&semantic), 0, "{name}: {semantic:?}");
        assert!(diags.iter().all(|d| d.code != Code::UnknownAttribute), "{name}: {diags:?}");
    }
}

#[test]
fn resource_path_worked_example() {
    let (doc, _) = parse(giml_core::corpus::fixture("resources.giml").unwrap(), None).unwrap();
    assert_eq!(doc.settings.folder.as_deref(), Some(r"C:\Users\Jacek\GIML\Assets"));
    assert_eq!(doc.images.len(), 1);
    assert_eq!(doc.images[0].name, "img1");
    assert_eq!(
        resolve_resource_path(&doc, ResourceKind::Image, &doc.images[0].path),
        r"C:\Users\Jacek\GIML\Assets\img\img1.png"
    );
}

#[test]
fn percent_geometry_is_parsed_per_axis() {
    let (doc, _) = parse(giml_core::corpus::fixture("percent_region.giml").unwrap(), None).unwrap();
    let r = &doc.scenes[0].regions[0];
    assert!(matches!(r.location_of_center_x.expr, ValueExpr::Percent { fraction, .. } if (fraction - 0.3).abs() < 1e-12));
}

#[test]
fn upper_cased_document_is_identical() {
    let src = giml_core::corpus::fixture("color_words.giml").unwrap();
    let mut shouted = String::new();
    let (orig, _) = parse(src, None).unwrap();
    // Upper-case every tag and attribute name but leave values alone.
    let mut in_tag = false;
    let mut in_value = false;
    for c in src.chars() {
        match c {
            '<' if !in_value => in_tag = true,
            '>' if !in_value => in_tag = false,
            '"' if in_tag => in_value = !in_value,
            _ => {}
        }
        if in_tag && !in_value {
            shouted.extend(c.to_uppercase());
        } else {
            shouted.push(c);
        }
    }
    let shouted = shouted.replace("<?XML VERSION=", "<?xml version=").replace(" ENCODING=", " encoding=");
    let (upper, diags) = parse(&shouted, None).unwrap();
    assert!(diags.is_empty(), "{diags:?}");
    assert!(orig.canonical_eq(&upper));
}

#[test]
fn translation_round_trips_over_all_language_pairs() {
    for (name, text) in CORPUS {
        let (orig, _) = parse(text, None).unwrap();
        let texts: Vec<String> = orig.scenes.iter().flat_map(|s| &s.regions).flat_map(|r| r.overlays()).filter_map(|o| o.text.as_ref().map(|t| t.raw.clone())).collect();
        for l1 in Language::ALL {
            let t1 = translate(text, l1, None).unwrap_or_else(|e| panic!("{name} -> {l1}: {e}"));
            let (d1, diags) = parse(&t1, None).unwrap();
            assert_eq!(count_errors(&diags), 0, "{name} {l1}: {diags:?}");
            assert_eq!(d1.language(), l1);
            assert!(orig.canonical_eq(&d1), "{name} -> {l1}");
            assert_eq!(inspect_body(&orig), inspect_body(&d1));
            for l2 in Language::ALL {
                let t2 = translate(&t1, l2, None).unwrap();
                let (d2, _) = parse(&t2, None).unwrap();
                assert!(orig.canonical_eq(&d2), "{name}: {l1} -> {l2}");
                let back = translate(&t2, orig.language(), None).unwrap();
                let (d3, _) = parse(&back, None).unwrap();
                assert!(orig.canonical_eq(&d3), "{name}: {l1} -> {l2} -> source");
                let texts3: Vec<String> = d3.scenes.iter().flat_map(|s| &s.regions).flat_map(|r| r.overlays()).filter_map(|o| o.text.as_ref().map(|t| t.raw.clone())).collect();
                assert_eq!(texts, texts3);
            }
        }
    }
}
