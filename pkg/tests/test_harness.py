import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from checker import Derivation, check_derivation, rule_table, set_extension
from constants import CLL, CYCLE_RULES, ILL, SYSTEMS, ULL, ULLM
from core import (
    BOT, EMPTY, INACT, ONE, CloseOut, Judgment, Server, alpha_eq, as_cut, copy_request, cut,
)
from dynamics import find_redex, run_closed
from errors import BudgetOverflow
from harness import (
    SUITES, GenConfig, PropertyReport, case_seed, exhaustive_oracle, gen_closed_derivation,
    gen_cut_derivation, gen_derivation, rule_coverage, run_property, server_guarded,
)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(max_depth=0)
    with pytest.raises(ValueError):
        GenConfig(labels=())
    with pytest.raises(ValueError):
        GenConfig(system="lk")


def test_generation_is_deterministic():
    cfg = GenConfig(seed=7)
    assert gen_derivation(cfg) == gen_derivation(cfg)


@pytest.mark.parametrize("system", SYSTEMS)
@pytest.mark.parametrize("seed", range(4))
def test_generated_derivations_are_valid(system, seed):
    cfg = GenConfig(seed=seed, system=system)
    d = gen_derivation(cfg)
    assert d.system == system
    assert check_derivation(d, cfg.checker_config) is None


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 64 - 1), st.booleans())
def test_generator_never_builds_invalid_derivations(seed, mix):
    cfg = GenConfig(seed=seed, max_depth=4, mix=mix)
    assert check_derivation(gen_derivation(cfg), cfg.checker_config) is None


def test_depth_one_gives_axioms():
    for seed in range(10):
        assert gen_derivation(GenConfig(seed=seed, max_depth=1)).rule in {"1R", "botL", "idR", "idL"}


def test_cut_derivations_have_a_cut_at_the_root():
    for seed in range(5):
        d = gen_cut_derivation(GenConfig(seed=seed))
        assert as_cut(d.conclusion.process) is not None
        assert check_derivation(d) is None


@pytest.mark.parametrize("seed, mix", [(6018027440424182934, True), (6018027440424182960, False)])
def test_cut_derivations_make_progress(seed, mix):
    cfg = GenConfig(seed=seed, max_depth=5, mix=mix)
    d = gen_cut_derivation(cfg)
    assert check_derivation(d, cfg.checker_config) is None
    assert not server_guarded(d)
    _, reduct = find_redex(d, cfg.checker_config)
    assert not alpha_eq(reduct, d.conclusion.process)


def test_server_guarded_cut_is_recognised():
    request = copy_request("x", "v", CloseOut("v"))
    guarded = cut("x", Server("x", "y", CloseOut("y")), Server("w", "z", request))
    assert server_guarded(Derivation("cutLL", Judgment(ULL, EMPTY, EMPTY, guarded)))
    open_server = cut("x", Server("x", "y", CloseOut("y")), request)
    assert not server_guarded(Derivation("cut!L", Judgment(ULL, EMPTY, EMPTY, open_server)))


def test_closed_programs_run_to_close():
    for seed in range(5):
        d = gen_closed_derivation(GenConfig(seed=seed))
        assert not len(d.conclusion.gamma) and not len(d.conclusion.delta)
        assert alpha_eq(run_closed(d), CloseOut("z"))


def test_case_seeds_differ():
    seeds = {case_seed(3, i) for i in range(100)}
    assert len(seeds) == 100
    assert case_seed(3, 5) == case_seed(3, 5)


def _placements(found, process):
    return {(j.region_of("x"), next(iter(j.types()))) for p, j in found if p == process}


def test_oracle_types_close_on_both_sides():
    found = exhaustive_oracle(1, (ONE, BOT), ULL)
    assert _placements(found, CloseOut("x")) == {("right", ONE), ("delta", BOT)}
    assert not any(p == INACT for p, _ in found)


def test_oracle_intuitionistic_close():
    found = exhaustive_oracle(1, (ONE, BOT), ILL)
    assert _placements(found, CloseOut("x")) == {("right", ONE)}


def test_oracle_with_mix_types_inaction():
    found = exhaustive_oracle(1, (ONE, BOT), ULL, set_extension("mix"))
    assert any(p == INACT for p, _ in found)


def test_oracle_cap():
    with pytest.raises(BudgetOverflow):
        exhaustive_oracle(2, (ONE, BOT), ULL, cap=1)


@pytest.mark.parametrize("name", SUITES)
def test_property_suites_hold(name):
    report = run_property(name, GenConfig(seed=11, max_depth=4), 3)
    assert isinstance(report, PropertyReport)
    assert report.cases == 3
    assert report.failures == []


@pytest.mark.parametrize("mix", [False, True])
@pytest.mark.parametrize("name", ["star_elim_roundtrip", "u_equals_c", "deadlock_freedom", "progress"])
def test_translation_and_dynamics_suites_hold_at_scale(name, mix):
    report = run_property(name, GenConfig(seed=7, mix=mix), 120)
    assert report.cases == 120
    assert report.failures == []


def test_united_equals_classical_on_the_oracle():
    report = run_property("u_equals_c", GenConfig(seed=2, oracle_size=2), 1)
    assert report.ok


def test_report_serialises():
    payload = run_property("duality_involution", GenConfig(seed=1), 5).to_dict()
    assert payload["name"] == "duality_involution"
    assert payload["failures"] == []


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_property("strong_normalisation", GenConfig(), 1)


@pytest.mark.parametrize("system", [ULL, ULLM, ILL, CLL])
def test_coverage_counts_every_rule(system):
    cfg = GenConfig(system=system, seed=5)
    counts = rule_coverage(cfg, 3)
    expected = {rule for rule in rule_table(system) if rule not in CYCLE_RULES}
    assert expected <= set(counts)
    assert sum(counts.values()) > 0
