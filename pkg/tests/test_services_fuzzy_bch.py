import numpy as np
import pytest

from app.core.errors import InputError, ParameterError
from app.services.fuzzy.bch import (
    BchCode, GaloisField, bch_build, bch_decode, bch_encode, bch_from_descriptor, clmod, clmul, divides_cyclic,
    select_m,
)


def test_polynomial_arithmetic():
    # (x + 1)(x + 1) = x² + 1
    assert clmul(0b11, 0b11) == 0b101
    assert clmod(0b101, 0b11) == 0
    assert clmod(0b1000, 0b1011) == 0b011


def test_galois_field_gf8():
    gf = GaloisField(3)
    assert gf.order == 7
    assert gf.alpha_pow(3) == 0b011
    assert gf.mul(2, 4) == 3
    assert gf.inv(3) == 6
    assert gf.mul(3, gf.inv(3)) == 1
    assert gf.cyclotomic_coset(3) == [3, 6, 5]
    assert gf.minimal_poly(1) == 0b1011
    with pytest.raises(ZeroDivisionError):
        gf.inv(0)
    with pytest.raises(ParameterError):
        GaloisField(1)


def test_every_nonzero_element_has_inverse():
    gf = GaloisField(5)
    assert all(gf.mul(a, gf.inv(a)) == 1 for a in range(1, 32))


def test_select_m():
    assert select_m(1060, 32) == 11
    assert select_m(4, 1) == 3
    with pytest.raises(ParameterError):
        select_m(70000, 40)


def test_hamming_code_case():
    code = bch_build(4, 1)
    assert (code.m, code.n, code.k, code.parity_bits, code.shortening) == (3, 7, 4, 3, 0)
    assert code.generator == 0b1011
    assert divides_cyclic(code)


def test_key_sized_code_parameters():
    code = bch_build(1060, 32)
    assert code.m == 11
    assert code.parity_bits == 352
    assert code.codeword_length == 1412
    assert code.shortening == code.k - 1060
    assert divides_cyclic(code)


def test_bch_build_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        bch_build(0, 2)
    with pytest.raises(ParameterError):
        bch_build(10, 0)
    with pytest.raises(ParameterError):
        BchCode(3, 1, 5)


def test_codeword_has_zero_syndromes(rng):
    code = bch_build(100, 4)
    word = bch_encode(code, rng.integers(0, 2, 100, dtype=np.uint8))
    assert not np.any(code.syndromes(word))


def test_decode_noiseless(rng):
    code = bch_build(100, 4)
    message = rng.integers(0, 2, 100, dtype=np.uint8)
    result = bch_decode(code, bch_encode(code, message))
    assert result.ok and result.error_count == 0
    assert np.array_equal(result.message, message)


@pytest.mark.parametrize("errors", [1, 2, 3, 4])
def test_decode_corrects_up_to_t(rng, errors):
    code = bch_build(100, 4)
    for _ in range(20):
        message = rng.integers(0, 2, 100, dtype=np.uint8)
        word = bch_encode(code, message)
        positions = rng.choice(word.size, size=errors, replace=False)
        word[positions] ^= 1
        result = bch_decode(code, word)
        assert result.ok
        assert result.error_count == errors
        assert sorted(result.error_positions) == sorted(positions.tolist())
        assert np.array_equal(result.message, message)


def test_decode_errors_in_parity_only(rng):
    code = bch_build(60, 3)
    message = rng.integers(0, 2, 60, dtype=np.uint8)
    word = bch_encode(code, message)
    word[-3:] ^= 1
    result = bch_decode(code, word)
    assert result.ok and np.array_equal(result.message, message)


def test_decode_beyond_capacity_never_returns_original_silently(rng):
    code = bch_build(100, 2)
    for _ in range(50):
        message = rng.integers(0, 2, 100, dtype=np.uint8)
        word = bch_encode(code, message)
        word[rng.choice(word.size, size=6, replace=False)] ^= 1
        result = bch_decode(code, word)
        if result.ok:
            # 误纠到另一个码字：结果必须仍是合法码字
            assert not np.any(code.syndromes(bch_encode(code, result.message)))


def test_decode_rejects_wrong_length():
    code = bch_build(10, 1)
    with pytest.raises(InputError):
        bch_decode(code, np.zeros(5, dtype=np.uint8))


def test_descriptor_round_trip():
    code = bch_build(50, 3)
    descriptor = code.descriptor()
    assert descriptor.codeword_length == code.codeword_length
    assert bch_from_descriptor(descriptor) is code
    tampered = descriptor.model_copy(update={"generator": "1"})
    with pytest.raises(ParameterError):
        bch_from_descriptor(tampered)
