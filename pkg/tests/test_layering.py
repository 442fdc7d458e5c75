import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinmpi.errors import ProfileError
from thinmpi.layering import (FrequencyProfile, Trace, assign_layers,
                              assignment_from_document, assignment_to_document,
                              average_layer_number, build_profile, parse_trace,
                              profile_from_document, profile_to_document)
from thinmpi.registry import load_registry
from thinmpi.scanner import scan_text

from conftest import SIX_FUNC_PROGRAM, SIX_FUNC_REGISTRY_DOC

REGISTRY = load_registry(SIX_FUNC_REGISTRY_DOC)


def profile_of(counts, weighting="sum"):
    return FrequencyProfile(counts=dict(counts), sources=("t",), weighting=weighting)


def test_parse_trace_basics():
    trace = parse_trace("# comment\nMPI_Send,1000\n\nMPI_Recv, 10\n", app_id="t1")
    assert trace.counts == {"MPI_Send": 1000, "MPI_Recv": 10}
    assert trace.app_id == "t1"


def test_parse_trace_rejects_garbage():
    with pytest.raises(ProfileError, match="line 1"):
        parse_trace("MPI_Send")
    with pytest.raises(ProfileError, match="line 2"):
        parse_trace("MPI_Send,3\nMPI_Recv,many")
    with pytest.raises(ProfileError, match="negative"):
        parse_trace("MPI_Send,-1")


def test_build_profile_single_trace():
    profile = build_profile([Trace("t", {"MPI_Send": 1000})], REGISTRY)
    assert profile.counts == {"MPI_Send": 1000}
    assert profile.sources == ("t",)


def test_build_profile_sum_is_additive():
    profile = build_profile([Trace("a", {"MPI_Send": 1000}),
                             Trace("b", {"MPI_Send": 3000})], REGISTRY)
    assert profile.counts == {"MPI_Send": 4000}


def test_build_profile_per_app_normalized():
    # DERIVED: (90/100 + 10/100)/2 = 0.5 for each function, scaled by 1e6.
    profile = build_profile(
        [Trace("app1", {"MPI_Send": 90, "MPI_Recv": 10}),
         Trace("app2", {"MPI_Send": 10, "MPI_Recv": 90})],
        REGISTRY, weighting="per_app_normalized")
    assert profile.counts == {"MPI_Send": 500000, "MPI_Recv": 500000}


def test_build_profile_rejects_unknown_and_empty():
    with pytest.raises(ProfileError, match="MPI_Mystery"):
        build_profile([Trace("t", {"MPI_Mystery": 1})], REGISTRY)
    with pytest.raises(ProfileError, match="empty input"):
        build_profile([], REGISTRY)


def test_usage_set_contributes_one_per_call_site():
    usage = scan_text(SIX_FUNC_PROGRAM + "MPI_Send(&x, 1, MPI_INT, 1, 0, c);\n",
                      REGISTRY, app_id="ring")
    profile = build_profile([usage], REGISTRY)
    assert profile.counts["MPI_Send"] == 2
    assert profile.counts["MPI_Init"] == 1


def test_assign_layers_matches_frequency_extremes():
    profile = profile_of({"MPI_Send": 1000, "MPI_Recv": 1000,
                          "MPI_Init": 1, "MPI_Finalize": 1})
    assignment = assign_layers(profile, 2)
    assert assignment.layers["MPI_Send"] == 1
    assert assignment.layers["MPI_Recv"] == 1
    assert assignment.layers["MPI_Init"] == 2
    assert assignment.layers["MPI_Finalize"] == 2


def test_assign_layers_single_function():
    assignment = assign_layers(profile_of({"MPI_Send": 3}), 1)
    assert assignment.layers == {"MPI_Send": 1}


def test_assign_layers_equal_count_split():
    # DERIVED: sorted by count, six names split into three equal groups.
    profile = profile_of({"MPI_a": 60, "MPI_b": 25, "MPI_c": 10,
                          "MPI_d": 3, "MPI_e": 1, "MPI_f": 1})
    assignment = assign_layers(profile, 3)
    assert assignment.layers == {"MPI_a": 1, "MPI_b": 1, "MPI_c": 2,
                                 "MPI_d": 2, "MPI_e": 3, "MPI_f": 3}


def test_assign_layers_mass_quantile_groups_by_mass():
    profile = profile_of({"MPI_a": 90, "MPI_b": 4, "MPI_c": 3,
                          "MPI_d": 2, "MPI_e": 1})
    assignment = assign_layers(profile, 2, policy="mass_quantile")
    assert assignment.layers["MPI_a"] == 1
    assert {assignment.layers[f] for f in ("MPI_b", "MPI_c", "MPI_d", "MPI_e")} == {2}


def test_more_layers_than_functions_allowed():
    assignment = assign_layers(profile_of({"MPI_a": 2, "MPI_b": 1}), 5)
    assert assignment.layers == {"MPI_a": 1, "MPI_b": 2}


def test_unprofiled_registry_functions_get_top_layer():
    profile = profile_of({"MPI_Send": 10})
    assignment = assign_layers(profile, 3, registry=REGISTRY)
    assert assignment.layers["MPI_Send"] == 1
    assert assignment.layers["MPI_Finalize"] == 3
    assert set(assignment.layers) == set(REGISTRY.functions)


def test_average_layer_number_values():
    profile = profile_of({"MPI_Send": 1000, "MPI_Init": 1, "MPI_Finalize": 1})
    uniform = assign_layers(profile_of({"MPI_Send": 1}), 1)

    constant = {"MPI_Send": 4, "MPI_Init": 4, "MPI_Finalize": 4}
    from thinmpi.layering import LayerAssignment
    assert average_layer_number(
        LayerAssignment(layers=constant, num_layers=4, policy="equal_count"),
        profile) == pytest.approx(4.0)

    # DERIVED: (1000*1 + 1*2 + 1*2) / 1002
    assignment = LayerAssignment(layers={"MPI_Send": 1, "MPI_Init": 2,
                                         "MPI_Finalize": 2},
                                 num_layers=2, policy="equal_count")
    assert average_layer_number(assignment, profile) == pytest.approx(
        1004 / 1002, rel=1e-9)

    depth_one = LayerAssignment(layers={k: 1 for k in profile.counts},
                                num_layers=1, policy="equal_count")
    assert average_layer_number(depth_one, profile) == pytest.approx(1.0)


def test_average_layer_number_zero_total_is_error():
    profile = profile_of({"MPI_Send": 0})
    assignment = assign_layers(profile, 2)
    with pytest.raises(ProfileError, match="zero total"):
        average_layer_number(assignment, profile)


counts_strategy = st.dictionaries(
    st.sampled_from([f"MPI_P{i}" for i in range(12)]),
    st.integers(0, 10 ** 6), min_size=1).filter(lambda d: sum(d.values()) > 0)


@given(counts_strategy, st.integers(1, 6))
@settings(max_examples=300)
def test_monotonicity_property(counts, num_layers):
    profile = profile_of(counts)
    assignment = assign_layers(profile, num_layers)
    for f in counts:
        for g in counts:
            if counts[f] > counts[g]:
                assert assignment.layers[f] <= assignment.layers[g]


@given(counts_strategy, st.integers(1, 6),
       st.sampled_from(["equal_count", "mass_quantile"]))
@settings(max_examples=300)
def test_scale_invariance(counts, num_layers, policy):
    profile = profile_of(counts)
    scaled = profile_of({k: v * 7 for k, v in counts.items()})
    a1 = assign_layers(profile, num_layers, policy=policy)
    a2 = assign_layers(scaled, num_layers, policy=policy)
    assert a1.layers == a2.layers
    if sum(counts.values()) > 0:
        assert average_layer_number(a1, profile) == pytest.approx(
            average_layer_number(a2, scaled), rel=1e-12)


@given(counts_strategy, st.integers(2, 6))
@settings(max_examples=100)
def test_rearrangement_optimality(counts, num_layers):
    profile = profile_of(counts)
    assignment = assign_layers(profile, num_layers)
    base = average_layer_number(assignment, profile)
    names = sorted(counts)
    layer_values = [assignment.layers[n] for n in names]
    rng = random.Random(0)
    from thinmpi.layering import LayerAssignment
    for _ in range(50):
        shuffled = layer_values[:]
        rng.shuffle(shuffled)
        permuted = LayerAssignment(layers=dict(zip(names, shuffled)),
                                   num_layers=num_layers, policy="equal_count")
        assert base <= average_layer_number(permuted, profile) + 1e-9


def test_profile_and_assignment_documents_round_trip():
    profile = profile_of({"MPI_Send": 3, "MPI_Recv": 1})
    doc = profile_to_document(profile)
    assert profile_to_document(profile_from_document(doc)) == doc

    assignment = assign_layers(profile, 2)
    adoc = assignment_to_document(assignment, profile)
    assert '"average_layer_number"' in adoc
    loaded = assignment_from_document(adoc)
    assert loaded.layers == dict(assignment.layers)
    assert loaded.num_layers == 2
