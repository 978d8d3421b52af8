import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import classes_upto
from cubic_shapes import enumeration as en
from cubic_shapes import forms, reduction
from cubic_shapes.verify import random_sl2z


def test_reduce_examples():
    canon, gamma = reduction.reduce((0, 1, 0, 1))
    assert forms.act(gamma, (0, 1, 0, 1)) == canon
    assert reduction.reduce(canon) == (canon, forms.IDENTITY)
    with pytest.raises(forms.SingularFormError):
        reduction.reduce((1, 0, 0, 0))


def test_stabilizer_examples():
    assert reduction.stabilizer_order((0, 1, -1, 0)) == 3
    assert reduction.stabilizer_order((0, 1, 0, 1)) == 1
    assert reduction.stabilizer_order((1, 0, -1, -1)) == 1


def test_stabilizer_matches_exhaustive_search():
    for r in classes_upto(2000)[::7]:
        assert reduction.stabilizer_order(r.rep) == reduction.stabilizer_bruteforce(r.rep)


def test_enumerate_examples():
    recs = en.enumerate_classes(1)
    x_plus = reduction.canonical(forms.X_PLUS)
    assert any(r.rep == x_plus and r.stabilizer_order == 3 for r in recs)
    recs4 = en.enumerate_classes(4)
    assert any(r.rep == reduction.canonical(forms.X_MINUS) and r.disc == -4 for r in recs4)


def test_brute_force_examples():
    assert en.brute_force_classes(1) == en.enumerate_classes(1)
    assert all(r.rep[1] % 3 == 0 and r.rep[2] % 3 == 0 for r in en.brute_force_classes(300, dual=True))
    with pytest.raises(ValueError):
        en.brute_force_classes(en.ORACLE_MAX + 1)
    with pytest.raises(ValueError):
        en.enumerate_classes(0)


def test_class_number_weight_for_x_plus():
    h, w = en.class_numbers(en.enumerate_classes(1))[1]
    assert h == 1 and w == pytest.approx(1 / 3)


@pytest.mark.parametrize("dual", [False, True])
@pytest.mark.parametrize("X", [50, 300, 2000])
def test_oracle_equivalence(X, dual):
    assert en.enumerate_classes(X, dual=dual) == en.brute_force_classes(X, dual=dual)


def test_records_satisfy_invariants():
    for r in classes_upto(5000):
        assert forms.disc(r.rep) == r.disc != 0
        assert r.stabilizer_order in (1, 3)
        if r.stabilizer_order == 3:
            assert r.disc > 0
        assert r.in_dual == forms.in_dual_lattice(r.rep)
        assert r.irreducible == forms.is_irreducible(r.rep)
        assert reduction.is_reduced(r.rep)
    keys = [(r.disc, r.rep) for r in classes_upto(5000)]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_stabilizer_three_discriminants_are_recorded():
    # observed: order-3 stabilizers occur only at D > 0; the shape of D is printed, not asserted
    discs = sorted({r.disc for r in classes_upto(5000) if r.stabilizer_order == 3})
    assert discs and all(m > 0 for m in discs)
    squares = sum(math.isqrt(m) ** 2 == m for m in discs)
    print(f"stabilizer-3 discriminants: {discs[:12]} ... ({squares}/{len(discs)} perfect squares)")


def test_orbit_soundness():
    rng = random.Random(17)
    recs = classes_upto(3000)
    for r in rng.sample(recs, 60):
        for _ in range(100):
            assert reduction.canonical(forms.act(random_sl2z(rng, 10), r.rep)) == r.rep


def test_completeness_spot_check():
    reps = {r.rep for r in classes_upto(300)}
    rng = range(-12, 13)
    for a in rng:
        for b in rng:
            for c in rng:
                for d in rng:
                    D = forms.disc((a, b, c, d))
                    if 0 < abs(D) <= 300:
                        assert reduction.canonical((a, b, c, d)) in reps


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(-30, 30)] * 4).filter(lambda f: forms.disc(f) != 0),
       st.lists(st.sampled_from([forms.S, forms.T, forms.T_INV]), max_size=12))
def test_reduce_is_orbit_invariant(f, word):
    gamma = forms.IDENTITY
    for w in word:
        gamma = forms.matmul(gamma, w)
    canon, g = reduction.reduce(f)
    assert forms.act(g, f) == canon
    assert forms.det(g) == 1
    assert reduction.canonical(forms.act(gamma, f)) == canon


def test_sharding_determinism():
    base = en.records_to_csv(en.enumerate_classes(6000, shards=1))
    for k in (2, 8):
        assert en.records_to_csv(en.enumerate_classes(6000, shards=k)) == base


def test_threads_match_serial():
    assert en.enumerate_classes(3000, shards=4, threads=2) == en.enumerate_classes(3000)


def test_checkpoint_resume_after_torn_write(tmp_path):
    ck = tmp_path / "run.ckpt"
    full = en.enumerate_classes(25000)
    en.enumerate_classes(20000, checkpoint=str(ck))
    with open(ck, "a") as fh:
        fh.write("20001,1,2,")  # interrupted mid-row
    done, recs = en.read_checkpoint(str(ck))
    assert done == 20000 and sorted(recs) == [r for r in full if abs(r.disc) <= 20000]
    assert en.enumerate_classes(25000, checkpoint=str(ck)) == full
    # the torn row is gone and the file now covers the full run
    done, recs = en.read_checkpoint(str(ck))
    assert done == 25000 and sorted(recs) == full
    assert "20001,1,2,\n" not in ck.read_text() and "20001,1,2,2" not in ck.read_text()


def test_ceiling_error_reports_progress(tmp_path):
    ck = tmp_path / "c.ckpt"
    with pytest.raises(en.EnumerationCeilingError) as info:
        en.enumerate_classes(30000, checkpoint=str(ck), max_records=100)
    assert info.value.completed == 10000
    assert en.read_checkpoint(str(ck))[0] == 10000


def test_csv_round_trip():
    recs = en.enumerate_classes(500)
    text = en.records_to_csv(recs, ["note=x"])
    assert text.splitlines()[1] == "disc,a,b,c,d,stab,dual,irreducible"
    assert en.records_from_csv(text) == recs


def test_gl2_fusion_halves_irreducible_classes():
    recs = [r for r in classes_upto(5000) if r.irreducible]
    fused = en.gl2_classes(recs)
    assert 2 * len(fused) == len(recs)
    # smallest irreducible cubic-order discriminants
    assert sorted({r.disc for r in fused if abs(r.disc) <= 110}) == [
        -108, -107, -104, -87, -83, -76, -59, -44, -31, -23, 49, 81]
