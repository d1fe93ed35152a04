//! Property tests for the serialization and share-algebra invariants.

use proptest::prelude::*;
use sfe_core::bits::{xor_reconstruct, BitString};
use sfe_core::channel::{decode_frame, encode_frame, FrameType};

fn bits_strategy(max_len: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..=max_len).prop_map(|v| BitString::from_bits(&v))
}

proptest! {
    #[test]
    fn wire_roundtrip(s in bits_strategy(200)) {
        let wire = s.to_wire();
        prop_assert_eq!(BitString::from_wire(&wire).unwrap(), s);
    }

    #[test]
    fn xor_involution(pair in bits_strategy(128).prop_flat_map(|a| {
        let len = a.len();
        (Just(a), prop::collection::vec(any::<bool>(), len..=len))
    })) {
        let (a, b_bits) = pair;
        let b = BitString::from_bits(&b_bits);
        let x = xor_reconstruct(&a, &b).unwrap();
        prop_assert_eq!(xor_reconstruct(&x, &b).unwrap(), a);
    }

    #[test]
    fn concat_slice_inverse(a in bits_strategy(100), b in bits_strategy(100)) {
        let joined = a.concat(&b);
        prop_assert_eq!(joined.slice(0, a.len()), a.clone());
        prop_assert_eq!(joined.slice(a.len(), b.len()), b);
    }

    #[test]
    fn frame_roundtrip(ftype in 0u8..4, payload in prop::collection::vec(any::<u8>(), 0..300)) {
        let ftype = FrameType::from_byte(ftype).unwrap();
        let encoded = encode_frame(ftype, &payload);
        let (t, p) = decode_frame(&encoded).unwrap();
        prop_assert_eq!(t, ftype);
        prop_assert_eq!(p, payload);
    }

    #[test]
    fn u64_roundtrip(v in any::<u64>(), extra in 0usize..8) {
        let len = (64 - v.leading_zeros() as usize).max(1) + extra;
        if len <= 64 {
            let s = BitString::from_u64(v, len);
            prop_assert_eq!(s.to_u64(), v);
        }
    }
}
