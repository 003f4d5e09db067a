"""Brute-force enumeration, reachability, misreports, impossibility."""

import random

import pytest

from camatch import (
    CANONICAL,
    Instance,
    Matching,
    MisreportStatus,
    SearchLimitExceeded,
    check_reachability,
    enumerate_feasible_matchings,
    enumerate_poms,
    find_beneficial_misreport,
    is_pareto_optimal,
    run_gsdt,
    verify_impossibility_scenario,
)
from camatch.oracle import (
    consecutive_orderings,
    distinct_orderings,
    misreport_space,
    with_prefs,
)

MU1 = Matching([("a1", "c2"), ("a2", "c1")])
MU2 = Matching([("a1", "c1"), ("a1", "c2")])


def test_enumerate_feasible_tiny():
    inst = Instance.build([("c1", 1)], [("a1", 1, [["c1"]])])
    pool = enumerate_feasible_matchings(inst)
    assert pool == [Matching(), Matching([("a1", "c1")])]


def test_enumerate_feasible_manipulation(ex1):
    # hand count: a1 takes a subset of {c1,c2}, a2 takes c1 or nothing,
    # minus the two c1 conflicts
    pool = enumerate_feasible_matchings(ex1)
    assert len(pool) == 6
    assert Matching() in pool
    assert MU1 in pool and MU2 in pool


def test_enumerate_feasible_no_acceptables():
    inst = Instance.build([("c1", 1)], [("a1", 2, [])])
    assert enumerate_feasible_matchings(inst) == [Matching()]


def test_enumerate_limit():
    inst = Instance.build(
        [(f"c{i}", 1) for i in range(1, 9)],
        [(f"a{i}", 4, [[f"c{j}" for j in range(1, 9)]]) for i in range(1, 7)],
    )
    with pytest.raises(SearchLimitExceeded):
        enumerate_feasible_matchings(inst, limit=1000)


def test_pom_catalog_manipulation(ex1):
    catalog = enumerate_poms(ex1)
    assert set(catalog.poms) == {MU1, MU2}
    assert catalog.examined == 6
    assert catalog.fingerprint == ex1.fingerprint()


def test_pom_catalog_impossibility_family(impossibility_family):
    counts = {k: len(enumerate_poms(inst).poms) for k, inst in impossibility_family.items()}
    assert counts == {1: 3, 2: 2, 3: 2, 4: 2}
    mu_i1 = set(enumerate_poms(impossibility_family[1]).poms)
    assert mu_i1 == {
        Matching([("a1", "c1"), ("a2", "c2")]),
        MU2,
        MU1,
    }
    assert set(enumerate_poms(impossibility_family[4]).poms) == {MU2, MU1}


def test_catalog_entries_are_mutually_undominated(fleet):
    from camatch.oracle import preference_profile, profile_dominates

    rng = random.Random(21)
    for inst in rng.sample(fleet, 12):
        catalog = enumerate_poms(inst)
        profs = [preference_profile(inst, m) for m in catalog.poms]
        for i in range(len(profs)):
            assert is_pareto_optimal(inst, catalog.poms[i])
            for j in range(len(profs)):
                if i != j:
                    assert not profile_dominates(profs[i], profs[j])


def test_reachability_manipulation(ex1):
    report = check_reachability(ex1)
    assert report.all_reproduced
    assert report.sweep_ran and report.sweep_orderings == 3
    assert set(report.sweep_outputs) == {MU1, MU2}
    assert report.sweep_outputs_all_pom
    # the specific ordering-to-outcome map
    assert run_gsdt(ex1, ("a1", "a1", "a2")).matching == MU2
    assert run_gsdt(ex1, ("a1", "a2", "a1")).matching == MU1
    assert any("ordering=a1 a1 a2" in line for line in report.to_lines())


def test_reachability_walkthrough(t1):
    report = check_reachability(t1)
    assert report.all_reproduced
    assert report.sweep_ran  # B = 7
    assert report.sweep_outputs_all_pom


def test_reachability_skips_sweep_when_quota_large():
    inst = Instance.build(
        [("c1", 3), ("c2", 3), ("c3", 3)],
        [(f"a{k}", 3, [["c1", "c2", "c3"]]) for k in (1, 2, 3)],
    )
    report = check_reachability(inst, sweep_bound=8)  # total quota 9
    assert not report.sweep_ran
    assert report.sweep_orderings == 0
    assert report.all_reproduced


def test_canonical_outputs_always_poms(fleet):
    rng = random.Random(23)
    for inst in rng.sample(fleet, 15):
        poms = set(enumerate_poms(inst).poms)
        for sigma in distinct_orderings(inst):
            assert run_gsdt(inst, sigma, CANONICAL).matching in poms


def test_misreport_space_size(ex1):
    # 2 acceptable courses: empty list, two singletons, and the three
    # orderings-with-ties of both
    assert sum(1 for _ in misreport_space(ex1, "a1")) == 6
    inst3 = Instance.build(
        [("c1", 1), ("c2", 1), ("c3", 1)],
        [("a1", 1, [["c1"], ["c2"], ["c3"]])],
    )
    assert sum(1 for _ in misreport_space(inst3, "a1")) == 26


def test_misreport_found(ex1):
    search = find_beneficial_misreport(ex1, ("a1", "a2", "a1"), "a1")
    assert search.status is MisreportStatus.FOUND
    finding = search.finding
    assert finding.fabricated_prefs == (frozenset({"c1"}), frozenset({"c2"}))
    assert finding.truthful_outcome == frozenset({"c2"})
    assert finding.lying_outcome == frozenset({"c1", "c2"})
    assert finding.strict_improvement
    # self-verification: replaying the fabricated profile reproduces the
    # recorded outcome
    replay = run_gsdt(
        with_prefs(ex1, "a1", finding.fabricated_prefs), finding.ordering)
    assert replay.matching.of_applicant("a1") == finding.lying_outcome


def test_misreport_none_for_consecutive(ex1):
    search = find_beneficial_misreport(ex1, ("a1", "a1", "a2"), "a1")
    assert search.status is MisreportStatus.NONE
    assert search.examined == 6  # the whole space, no early exit


def test_misreport_inconclusive_is_distinct(ex1):
    search = find_beneficial_misreport(
        ex1, ("a1", "a2", "a1"), "a1", search_limit=2)
    assert search.status is MisreportStatus.INCONCLUSIVE
    assert search.examined == 2
    assert "INCONCLUSIVE" in "\n".join(search.to_lines())


def test_misreport_rejects_unknown_applicant(ex1):
    with pytest.raises(ValueError):
        find_beneficial_misreport(ex1, ("a1", "a1", "a2"), "zz")


def test_misreport_none_when_quotas_are_one(fleet):
    # unit quotas make the mechanism immune under every ordering
    ones = [inst for inst in fleet
            if inst.applicants and all(b == 1 for b in inst.quota.values())]
    rng = random.Random(29)
    for inst in rng.sample(ones, 6):
        for sigma in distinct_orderings(inst):
            for a in inst.applicants:
                search = find_beneficial_misreport(inst, sigma, a)
                assert search.status is MisreportStatus.NONE


def test_consecutive_orderings_shape(t1):
    blocks = list(consecutive_orderings(t1))
    assert len(blocks) == 6
    assert ("a1", "a1", "a2", "a2", "a2", "a3", "a3") in blocks
    for sigma in blocks:
        assert len(sigma) == t1.total_quota()


def test_distinct_orderings_count(ex1):
    # 3 slots, a1 twice and a2 once: 3 distinct sequences
    assert len(list(distinct_orderings(ex1))) == 3


def test_reports_have_csv_renderings(ex1):
    reach = check_reachability(ex1)
    rows = reach.to_csv()
    assert rows[0] == "reproduced,ordering,matching"
    assert len(rows) == 3 and all(r.startswith("1,") for r in rows[1:])
    search = find_beneficial_misreport(ex1, ("a1", "a2", "a1"), "a1")
    rows = search.to_csv()
    assert rows[0].startswith("status,")
    assert rows[1].startswith("found,")
    rows = verify_impossibility_scenario().to_csv()
    assert len(rows) == 5 and rows[1].endswith(",1")


def test_impossibility_scenario():
    report = verify_impossibility_scenario()
    assert report.confirmed
    assert report.pom_counts == (("I1", 3), ("I2", 2), ("I3", 2), ("I4", 2))
    assert report.catalogs_match
    assert report.forces_mu2_on_i2.improves
    assert report.forces_mu2_on_i2.truthful_outcome == frozenset({"c2"})
    assert report.forces_mu2_on_i2.lying_outcome == frozenset({"c1"})
    assert report.forces_mu2_on_i3.improves
    assert report.i4_choice_mu2_fails.improves
    assert report.i4_choice_mu3_fails.truthful_outcome == frozenset()
    assert report.i4_choice_mu3_fails.lying_outcome == frozenset({"c1"})
    lines = "\n".join(report.to_lines())
    assert "CONFIRMED" in lines
