"""Acceptance criteria, one test per registry check.

Each test delegates to the same frozen check the ``vines validate``
command runs, so the CLI report and this suite can never disagree about
what passed.  The check's detail string carries the measured numbers and
is surfaced on failure.
"""

from vines import validate


def _run(check_id):
    r = validate.run_check(check_id)
    assert r.passed, f"[{r.id:02d} {r.name}] {r.detail}"


def test_01_impact_map_exactness():
    _run(1)


def test_02_energy_ledger_closure():
    _run(2)


def test_03_conservative_energy_drift():
    _run(3)


def test_04_closed_form_first_impact():
    _run(4)


def test_05_exact_flow_agreement():
    _run(5)


def test_06_relative_energy_identity():
    _run(6)


def test_07_reference_interval_rows():
    _run(7)


def test_08_two_impacts_per_cycle_signature():
    _run(8)


def test_09_coil_coefficient_monotonicity():
    _run(9)


def test_10_stochastic_design_dominance():
    _run(10)


def test_11_joint_search_beats_single_variable():
    _run(11)


def test_12_optimizer_sanity():
    _run(12)


def test_13_end_to_end_determinism():
    _run(13)
