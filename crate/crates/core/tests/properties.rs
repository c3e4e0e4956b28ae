mod common;

use dunstan::Codebook;

#[test]
fn postfix_reversal_is_an_involution() {
    common::reversal_involution().unwrap();
}

#[test]
fn merge_keeps_order_and_drops_at_most_one_letter_per_junction() {
    common::merge_properties().unwrap();
}

#[test]
fn encoded_text_is_in_its_lattice() {
    common::encode_decode_membership(&Codebook::shipped()).unwrap();
}

#[test]
fn decoding_is_deterministic() {
    common::decode_determinism(&Codebook::shipped()).unwrap();
}

#[test]
fn serialize_then_parse_is_identity() {
    common::parse_serialize_identity(&Codebook::shipped()).unwrap();
}
