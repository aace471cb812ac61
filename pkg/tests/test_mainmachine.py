"""Parameters, recognizer plugins, and the assembled main machine."""

import itertools

import pytest

from smforge.words import Word, relabel
from smforge.smachine import (StepError, is_admissible, machine_from_text,
                              machine_to_text, reduce_history)
from smforge.machines import marker_split
from smforge.mainmachine import (DivisibleRecognizer, Params,
                                 PAPER_CONSTRAINTS, RejectingRecognizer,
                                 accepting_run, build_main, history_ell,
                                 lambda_accept, main_time_bound,
                                 paper_violations, validate_plugin)

p = pytest.mark.parametrize

DESK4 = Params(2, 4, 5, 4, 7, 8, 9, check_chain=False)


@pytest.fixture(scope="module")
def main1():
    return build_main(("a",), DivisibleRecognizer(("a",), 1), DESK4)


@pytest.fixture(scope="module")
def main_rej():
    return build_main(("a",), RejectingRecognizer(("a",)), DESK4,
                      name="Mmain_rej")


def payload(main, k):
    return main.machine.hw.alpha.word([main.A[0]] * k)


# -- parameters ------------------------------------------------------------------


def test_params_desk_profile():
    d = Params.desk()
    assert (d.N, d.C, d.c0, d.L, d.c1, d.delta_inv, d.K) == \
        (2, 4, 5, 6, 7, 8, 9)
    assert paper_violations(d) == ["C >= 2744", "L >= 33"]


def test_params_chain_enforced():
    with pytest.raises(ValueError, match="increase"):
        Params(2, 4, 5, 4, 7, 8, 9)
    assert DESK4.L == 4
    with pytest.raises(ValueError, match="positive"):
        Params(0, 4, 5, 6, 7, 8, 9)
    with pytest.raises(ValueError, match="two copies"):
        Params(2, 4, 5, 1, 7, 8, 9, check_chain=False)


def test_paper_constraints_are_satisfiable():
    big = Params(2, 2744, 2745, 2746, 2747, 2748, 2749)
    assert paper_violations(big) == []
    assert len(PAPER_CONSTRAINTS) == 8


# -- plugins ---------------------------------------------------------------------


@p("k,member", [(0, False), (1, False), (2, False), (3, True),
                (4, False), (5, False), (6, True)])
def test_divisible_membership(k, member):
    plug = DivisibleRecognizer(("a",), 3)
    w = plug.machine.hw.alpha.word([plug.tape[0]] * k)
    assert plug.member(w) is member
    if k:
        assert plug.member(~w) is False


@p("k", [3, 6])
def test_divisible_accepting_runs(k):
    plug = DivisibleRecognizer(("a",), 3)
    w = plug.machine.hw.alpha.word([plug.tape[0]] * k)
    hist = plug.accept_run(w)
    assert len(hist) == k + 1 <= plug.time_bound(k)
    C = plug.machine.run(plug.machine.input_config({2: w}), hist)
    assert C.final() == plug.machine.accept_config()


def test_divisible_rejects_by_state_count():
    plug = DivisibleRecognizer(("a",), 3)
    al = plug.machine.hw.alpha
    w2 = al.word([plug.tape[0]] * 2)
    with pytest.raises(ValueError):
        plug.accept_run(w2)
    hist = [("tau_a_s", 1), ("tau_a_1", 1), ("tau_fin", 1)]
    with pytest.raises(StepError):
        plug.machine.run(plug.machine.input_config({2: w2}), hist)


def test_divisible_two_letters():
    plug = DivisibleRecognizer(("x", "y"), 2)
    al = plug.machine.hw.alpha
    w = al.word([al.id_of("x_p"), al.id_of("y_p")])
    assert plug.member(w)
    hist = plug.accept_run(w)
    assert hist == [("tau_y_s", 1), ("tau_x_1", 1), ("tau_fin", 1)]
    C = plug.machine.run(plug.machine.input_config({2: w}), hist)
    assert C.final() == plug.machine.accept_config()
    with pytest.raises(ValueError):
        DivisibleRecognizer(("x",), 0)
    with pytest.raises(ValueError):
        DivisibleRecognizer((), 2)


def test_rejecting_recognizer():
    plug = RejectingRecognizer(("a",))
    al = plug.machine.hw.alpha
    w = al.word([plug.tape[0]])
    assert plug.member(w) is False
    with pytest.raises(ValueError):
        plug.accept_run(w)
    with pytest.raises(StepError):
        plug.machine.run(plug.machine.input_config({2: w}),
                         [("tau_idle", 1)])


def test_validate_plugin_guards():
    validate_plugin(DivisibleRecognizer(("a",), 2), n_letters=1)
    with pytest.raises(ValueError, match="letters"):
        validate_plugin(DivisibleRecognizer(("x", "y"), 2), n_letters=1)


# -- assembled machine -------------------------------------------------------------


def test_main_structure(main1):
    mm = main1.machine
    assert main1.L == 4 and main1.P == 7
    assert mm.hw.cyclic and mm.hw.n_parts == 28
    working = set(main1.m5.rules)
    assert set(mm.rules) == ({"s1", "s2", "a1", "a2"}
                             | {"1." + n for n in working}
                             | {"2." + n for n in working})
    assert main1.q_inputs == (2, 9, 16, 23)
    assert main1.r_inputs == (6, 13, 20, 27)
    assert main1.special_sector == 2
    assert sorted(mm.input_sectors) == sorted(main1.q_inputs
                                              + main1.r_inputs)
    assert sorted(mm.noise.K) == sorted(mm.input_sectors)
    assert mm.hw.tapes[2] == mm.hw.tapes[9] == mm.hw.tapes[16]
    assert mm.hw.tapes[0] == mm.hw.tapes[7] == ()
    al = mm.hw.alpha
    assert al.name_of(mm.hw.parts[0].start) == "t"
    assert al.name_of(mm.hw.parts[7].start) == "t(2)"
    assert al.name_of(mm.hw.parts[1].start) == "qs1"
    assert al.name_of(mm.hw.parts[1].end) == "qa1"
    names1 = {al.name_of(q) for q in mm.hw.parts[1].letters}
    assert {"q0.1", "q0.2", "qs1", "qa1"} <= names1


def test_input_shapes(main1):
    w = payload(main1, 2)
    I = main1.input_i(w)
    content = dict(zip(I.sectors, I.tapes))
    mw = main1.mirror(w)
    assert all(content[g] == w for g in main1.q_inputs)
    assert all(content[g] == mw for g in main1.r_inputs)
    assert len(mw) == 2 and all(x < 0 for x in mw.ltrs)
    J = main1.input_j(w)
    cj = dict(zip(J.sectors, J.tapes))
    assert not cj[main1.special_sector]
    assert all(cj[g] == content[g] for g in content
               if g != main1.special_sector)
    W = main1.w_ac()
    assert W.is_configuration() and not any(len(t) for t in W.tapes)
    marked = main1.machine.hw.alpha.word([main1.A1[0]])
    with pytest.raises(ValueError, match="plain"):
        main1.input_i(marked)


def test_start_rule_asymmetry(main1):
    w = payload(main1, 1)
    I, J = main1.input_i(w), main1.input_j(w)
    mm = main1.machine
    assert is_admissible(I, mm.rule("s1")) is None
    assert is_admissible(I, mm.rule("s2")) is not None
    assert is_admissible(J, mm.rule("s1")) is None
    assert is_admissible(J, mm.rule("s2")) is None
    assert is_admissible(I, mm.rule("a1")) is not None
    E = main1.input_i(mm.hw.alpha.word())
    assert E == main1.input_j(mm.hw.alpha.word())
    assert is_admissible(E, mm.rule("s2")) is None


@p("k", [1, 2])
@p("shape", ["I", "J"])
def test_accepting_runs(main1, k, shape):
    w = payload(main1, k)
    W = main1.input_i(w) if shape == "I" else main1.input_j(w)
    res = accepting_run(W, main1)
    assert res is not None
    comp, ell = res
    assert comp.final() == main1.w_ac()
    assert ell == 1
    assert comp.time <= main_time_bound(main1, 2 * k)
    c = "1" if shape == "I" else "2"
    assert comp.history[0] == ("s" + c, 1)
    assert comp.history[-1] == ("a" + c, 1)


def test_accepting_run_rejections(main1, main_rej):
    mm = main1.machine
    res = accepting_run(main1.w_ac(), main1)
    assert res is not None and res[0].time == 0 and res[1] == 0
    assert accepting_run(main1.input_i(~payload(main1, 1)), main1) is None
    assert accepting_run(main1.input_i(mm.hw.alpha.word()), main1) is None
    w = payload(main1, 1)
    lopsided = mm.configuration({main1.special_sector: w})
    assert accepting_run(lopsided, main1) is None
    stray = mm.configuration({3: mm.hw.alpha.word([mm.hw.tapes[3][0]])})
    assert accepting_run(stray, main1) is None
    unmirrored = {g: w for g in main1.q_inputs}
    unmirrored.update({g: relabel(w, main1.bar, mm.hw.alpha)
                       for g in main1.r_inputs})
    assert accepting_run(mm.configuration(unmirrored), main1) is None
    wr = payload(main_rej, 1)
    assert accepting_run(main_rej.input_i(wr), main_rej) is None
    assert accepting_run(main_rej.input_j(wr), main_rej) is None


def test_history_ell():
    assert history_ell([]) == 0
    assert history_ell([("s1", 1), ("1.sigma", 1), ("a1", 1)]) == 1
    assert history_ell([("a1", 1), ("a2", 1), ("s1", 1)]) == 2


def test_build_main_guards():
    with pytest.raises(ValueError, match="N =="):
        build_main(("a",), DivisibleRecognizer(("a",), 1),
                   Params(3, 4, 5, 6, 7, 8, 9))
    with pytest.raises(ValueError, match="letters"):
        build_main(("a",), DivisibleRecognizer(("x", "y"), 1), DESK4)


def test_main_round_trips(main1):
    text = machine_to_text(main1.machine)
    assert machine_to_text(machine_from_text(text)) == text


# -- the sector language ------------------------------------------------------------


def even_positive(u):
    return len(u) > 0 and len(u) % 2 == 0 and all(x > 0 for x in u.ltrs)


def test_lambda_accepts_plain_members(main1):
    w2 = payload(main1, 2)
    res = lambda_accept(w2, main1, even_positive)
    assert res == ([], [w2])
    assert lambda_accept(payload(main1, 1), main1, even_positive) is None


def test_lambda_accepts_marked_members(main1):
    al = main1.machine.hw.alpha
    marked = al.word([main1.A1[0]] * 2)
    res = lambda_accept(marked, main1, even_positive)
    assert res is not None
    hist, words = res
    assert hist == [("s1", -1)]
    assert words[-1] == payload(main1, 2)


@p("push", [[("1.theta_b1", 1)],
            [("1.theta_b1", 1), ("1.theta_b2", 1)],
            [("1.theta_b2", -1)]])
def test_lambda_strips_noise_decorations(main1, push):
    al = main1.machine.hw.alpha
    marked = al.word([main1.A1[0]] * 2)
    pushed = main1.machine.semi_run(marked, main1.special_sector, push)[-1]
    res = lambda_accept(pushed, main1, even_positive)
    assert res is not None
    hist, words = res
    assert hist == [(n, -s) for n, s in reversed(push)] + [("s1", -1)]
    assert words[0] == pushed and words[-1] == payload(main1, 2)


def test_lambda_rejects_mixed_and_noise(main1):
    al = main1.machine.hw.alpha
    mixed = al.word([main1.A[0], main1.A1[0]])
    assert lambda_accept(mixed, main1, even_positive) is None
    noise = al.word([main1.B[0]])
    assert lambda_accept(noise, main1, even_positive) is None
    barred = al.word([main1.bar[main1.A[0]]])
    assert lambda_accept(barred, main1, even_positive) is None
    marked_odd = al.word([main1.A1[0]])
    assert lambda_accept(marked_odd, main1, even_positive) is None


def test_lambda_recovers_payload_pushes(main1):
    al = main1.machine.hw.alpha
    marked = al.word([main1.A1[0]] * 2)
    pushed = main1.machine.semi_run(marked, main1.special_sector,
                                    [("1.theta_a", -1)])[-1]
    res = lambda_accept(pushed, main1, even_positive)
    assert res is not None
    hist, words = res
    assert hist == [("1.theta_a", 1), ("s1", -1)]
    assert words[-1] == payload(main1, 2)


def test_lambda_rejects_unreduced_skeletons(main1):
    al = main1.machine.hw.alpha
    w = al.word([main1.A1[0], main1.B[0], -main1.A1[0]])
    assert lambda_accept(w, main1, even_positive) is None


# -- compressed semi-computations ----------------------------------------------------


def test_compressed_semi_tracks_marking(main1):
    w = payload(main1, 2)
    words = main1.compressed_semi(w, [("s1", 1), ("1.theta_b1", 1)])
    sch = main1.scheme
    assert words[0] == main1.to_m1(w)
    assert words[1] == sch.alpha.word([sch.A1[0]] * 2)
    assert len(words[2]) == 2 + sch.D
    assert abs(words[2].ltrs[0]) == sch.A1[0]
    assert abs(words[2].ltrs[-1]) == sch.A1[0]
    back = main1.compressed_semi(w, [("s1", 1), ("s1", -1)])
    assert back[-1] == main1.to_m1(w)


def test_compressed_semi_guards(main1):
    al = main1.machine.hw.alpha
    e = al.word()
    words = main1.compressed_semi(e, [("a1", 1), ("2.theta_a", 1)])
    assert all(not len(u) for u in words)
    with pytest.raises(StepError):
        main1.compressed_semi(payload(main1, 1), [("s2", 1)])
    with pytest.raises(StepError):
        main1.compressed_semi(payload(main1, 1), [("s1", -1)])


@pytest.fixture(scope="module")
def main3():
    return build_main(("x", "y", "z"),
                      DivisibleRecognizer(("x", "y", "z"), 1), DESK4,
                      name="Mmain3")


def test_compressed_gap_growth_bounds(main3):
    sch = main3.scheme
    D = sch.D
    assert D == 60
    al = main3.machine.hw.alpha
    w0 = al.word([al.id_of(n) for n in ("x", "y", "z")])
    skeleton = [sch.mark(sch.alpha.id_of(n)) for n in ("x", "y", "z")]
    signed = [("1.theta_" + n, s)
              for n in ("x", "y", "z", "b1", "b2") for s in (1, -1)]
    hists = [[a] for a in signed]
    hists += [[a, b] for a, b in itertools.product(signed, signed)
              if reduce_history([a, b]) == [a, b]]
    for seq in hists:
        words = main3.compressed_semi(w0, [("s1", 1)] + seq)
        gaps, markers = marker_split(words[-1], sch)
        assert markers == skeleton
        interior = len(gaps[1]) + len(gaps[2])
        k = len(seq)
        assert D * k // 2 <= interior <= 3 * D * k


def test_compressed_steps_decorate_not_erase(main3):
    sch = main3.scheme
    al = main3.machine.hw.alpha
    w0 = al.word([al.id_of(n) for n in ("x", "y", "z")])
    ids = {n: sch.alpha.id_of(n) for n in ("x", "y", "z")}
    x1, y1, z1 = (sch.alpha.word([sch.mark(ids[n])]) for n in ("x", "y", "z"))
    fwd = main3.compressed_semi(w0, [("s1", 1), ("1.theta_z", 1)])[-1]
    assert fwd == (x1 * sch.noise_word(ids["z"], ids["y"]) * y1
                   * sch.noise_word(ids["z"], ids["z"]) * z1)
    bwd = main3.compressed_semi(w0, [("s1", 1), ("1.theta_x", -1)])[-1]
    assert bwd == (x1 * sch.noise_word(ids["x"], ids["y"], -1) * y1
                   * sch.noise_word(ids["x"], ids["z"], -1) * z1)
    gaps, markers = marker_split(fwd, sch)
    assert markers == [sch.mark(ids[n]) for n in ("x", "y", "z")]
    assert not len(gaps[0]) and not len(gaps[3])
