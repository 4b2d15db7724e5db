use hppk_qpp::codec::{self, Object};
use hppk_qpp::{
    decapsulate, ds_keygen, encapsulate, generate_pad, keygen, sign, verify, DispatchMode, ParamSet,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn kem_through_the_codec() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for set in ParamSet::KEM {
        let params = set.params();
        let (sk, pk) = keygen(&params, &mut rng).unwrap();

        let pk_bytes = codec::encode(&Object::KemPublicKey(params.clone(), pk)).unwrap();
        let sk_bytes = codec::encode(&Object::KemPrivateKey(params.clone(), sk)).unwrap();
        let Object::KemPublicKey(pk_params, pk) = codec::decode(&pk_bytes).unwrap() else {
            panic!("{set}: public key decoded as another kind");
        };
        let Object::KemPrivateKey(_, sk) = codec::decode(&sk_bytes).unwrap() else {
            panic!("{set}: private key decoded as another kind");
        };

        for _ in 0..20 {
            let (secret, ct) = encapsulate(&pk, &pk_params, &mut rng).unwrap();
            let ct_bytes = codec::encode(&Object::KemCiphertext(params.clone(), ct)).unwrap();
            let Object::KemCiphertext(_, ct) = codec::decode(&ct_bytes).unwrap() else {
                panic!("{set}: ciphertext decoded as another kind");
            };
            assert_eq!(decapsulate(&sk, &ct, &params).unwrap(), secret, "{set}");
        }
    }
}

#[test]
fn signatures_survive_serialization() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for set in ParamSet::DS {
        let params = set.params();
        let triple = ds_keygen(&params, &mut rng).unwrap();
        let msg = format!("release notes for {set}");
        let sig = sign(&triple.sk, &triple.vk, &params, msg.as_bytes(), &mut rng).unwrap();

        let vk_bytes = codec::encode(&Object::DsVerificationKey(
            params.clone(),
            triple.vk.clone(),
        ))
        .unwrap();
        let sig_bytes = codec::encode(&Object::DsSignature(params.clone(), sig)).unwrap();
        let Object::DsVerificationKey(vk_params, vk) = codec::decode(&vk_bytes).unwrap() else {
            panic!("{set}: vk decoded as another kind");
        };
        let Object::DsSignature(_, sig) = codec::decode(&sig_bytes).unwrap() else {
            panic!("{set}: signature decoded as another kind");
        };

        assert!(
            verify(&vk, &vk_params, msg.as_bytes(), &sig).unwrap(),
            "{set}"
        );
        assert!(
            !verify(&vk, &vk_params, b"something else", &sig).unwrap(),
            "{set}"
        );
    }
}

#[test]
fn decoding_rejects_a_truncated_key() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let params = ParamSet::KEM[0].params();
    let (_, pk) = keygen(&params, &mut rng).unwrap();
    let bytes = codec::encode(&Object::KemPublicKey(params, pk)).unwrap();
    for cut in [0, 3, 12, bytes.len() - 1] {
        assert!(codec::decode(&bytes[..cut]).is_err(), "cut at {cut}");
    }
}

#[test]
fn qpp_stream_in_both_modes() {
    let pad = generate_pad(b"integration pad", 8, 64).unwrap();
    let msg: Vec<u8> = (0..4096u32).map(|i| (i * 31 % 251) as u8).collect();
    for mode in [DispatchMode::Random, DispatchMode::Sequential] {
        let ct = hppk_qpp::qpp::encrypt_stream_with_mode(&pad, b"stream seed", &msg, mode).unwrap();
        assert_ne!(ct, msg);
        let back =
            hppk_qpp::qpp::decrypt_stream_with_mode(&pad, b"stream seed", &ct, mode).unwrap();
        assert_eq!(back, msg, "{mode:?}");
    }
}
