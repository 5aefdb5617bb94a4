//! Compare two account profiles: similarity features, match probability,
//! and rule-based bootstrap labels.
//!
//! A profile contributes four features: weighted edit-distance ratios over
//! the screen name and display name, and exact fingerprint matches of the
//! profile and banner images (64-bit average hashes). A bundled logistic
//! model turns the four features into a same-person probability.
//!
//! Run with: `cargo run --example profile_matching`

use resurface::profile::matching::{
    auto_label_pair, compare_profiles, match_probability, MatchModel, ProfileRecord,
};
use resurface::profile::raster::{average_hash, Raster};
use resurface::profile::text::{levenshtein_ratio, levenshtein_ratio_with, RatioVariant};

fn main() -> resurface::Result<()> {
    // Edit-distance ratios: 1.0 is identical, 0.0 shares nothing.
    println!("text similarity:");
    for (a, b) in [
        ("ada_lovelace", "ada_lovelace"),
        ("ada_lovelace", "ada_lovelace2"),
        ("ada_lovelace", "ace_of_lovel"),
        ("ada_lovelace", "zq"),
    ] {
        println!(
            "  {a:<14} vs {b:<14}  weighted {:.3}  simple {:.3}",
            levenshtein_ratio(a, b),
            levenshtein_ratio_with(a, b, RatioVariant::Simple)
        );
    }

    // Images reduce to a 64-bit brightness fingerprint; matching means
    // identical fingerprints, so a re-uploaded avatar keeps the match even
    // through uniform brightness shifts, while a genuinely different image
    // breaks it.
    let gradient = |shift: u8| -> resurface::Result<Raster> {
        let pixels = (0..64).map(|i| (i as u8) * 4 + shift).collect();
        Raster::new(8, 8, pixels)
    };
    let checkerboard = |light: u8| -> resurface::Result<Raster> {
        let pixels = (0..64).map(|i| if (i + i / 8) % 2 == 0 { light } else { 0 }).collect();
        Raster::new(8, 8, pixels)
    };
    let original = gradient(0)?;
    let brightened = gradient(3)?;
    println!("\nimage fingerprints:");
    println!("  original   {:016x}", average_hash(&original)?);
    println!("  brightened {:016x} (brightness alone preserves the hash)", average_hash(&brightened)?);
    println!("  unrelated  {:016x}", average_hash(&checkerboard(240)?)?);

    let same_person = ProfileRecord {
        user_id: "1001".into(),
        screen_name: "ada_lovelace".into(),
        name: "Ada Lovelace".into(),
        profile_image: Some(original),
        banner_image: Some(checkerboard(200)?),
    };
    let returned = ProfileRecord {
        user_id: "2002".into(),
        screen_name: "ada_lovelace2".into(),
        name: "Ada Lovelace".into(),
        profile_image: Some(brightened),
        banner_image: Some(checkerboard(200)?),
    };
    let stranger = ProfileRecord {
        user_id: "3003".into(),
        screen_name: "zq".into(),
        name: "Zq".into(),
        profile_image: Some(checkerboard(240)?),
        banner_image: Some(Raster::new(8, 8, vec![90; 64])?),
    };

    let model = MatchModel::bundled();
    println!("\npairwise comparison (bundled model, threshold {:.3}):", model.threshold);
    for (a, b, caption) in [
        (&same_person, &returned, "original vs. suspected return"),
        (&same_person, &stranger, "original vs. stranger"),
    ] {
        let features = compare_profiles(a, b)?;
        let probability = match_probability(&model, &features);
        let label = auto_label_pair(a, b, &features);
        println!("  {caption}:");
        println!(
            "    features [screen {:.3}, name {:.3}, profile img {:.0}, banner img {:.0}]",
            features.screen_name_similarity,
            features.name_similarity,
            features.profile_image_match,
            features.banner_image_match
        );
        println!(
            "    same-person probability {probability:.4} -> {}",
            if probability >= model.threshold { "match" } else { "no match" }
        );
        println!(
            "    bootstrap label: {:?} (review candidate: {})",
            label.class, label.manual_review_candidate
        );
    }
    Ok(())
}
