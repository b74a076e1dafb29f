//! Random topologies checked against an independent forwarding model.

mod support;

#[test]
fn ping_matches_forwarding_oracle() {
    let s = support::oracle::compare(1000, 0x5eed_0001);
    assert!(
        s.disagreements.is_empty(),
        "{} disagreements, first: {:?}",
        s.disagreements.len(),
        s.disagreements.first()
    );
    // both outcomes must be well represented for the comparison to mean anything
    assert!(
        s.delivered > 1000 && s.failed > 1000,
        "delivered={} failed={} over {} cases",
        s.delivered,
        s.failed,
        s.cases
    );
}
