import json

import numpy as np
import pytest
from pytest_check import check

from protowarp.diagnosis import (
    ConfusionMatrix,
    DiagnosisReport,
    classify_bsw,
    diagnose,
    evaluate,
    measure_voltages,
    modified_cornell,
    nearest_prototypes,
    prototype_distance,
    r_and_s,
    self_consistency,
    sokolow_lyon,
)
from protowarp.exceptions import EmptyLibrary, MissingLead
from protowarp.library import Libraries, Prototype, PrototypeLibraryFile
from protowarp.records import Label, LeadId
from protowarp.settings import PipelineConfig, WarpConfig
from protowarp.warping import WarpResult
from test_infrastructure import make_beat
from test_infrastructure.factories import gaussian

FAST_WARP = WarpConfig(max_iters=300)
DECISION_LEADS = (LeadId.V1, LeadId.V5, LeadId.V6)

NORMAL_BEAT = make_beat(texture=0.2, r_amplitude=1.0)
LVH_BEAT = make_beat(texture=0.2, r_amplitude=2.2, s_depth=0.8)


def warp_result(r, s):
    return WarpResult(
        r=np.full(500, r, dtype=float),
        s=np.full(500, s, dtype=float),
        loss=0.0,
        converged=True,
        iters=0,
    )


def libraries(normal, lvh, leads=DECISION_LEADS):
    def library(label, beats):
        return [
            PrototypeLibraryFile(
                lead=lead,
                class_label=label,
                prototypes=tuple(
                    Prototype(samples=beat, occurrence=k + 1)
                    for k, beat in enumerate(beats)
                ),
            )
            for lead in leads
        ]

    return Libraries(library(Label.NORMAL, normal) + library(Label.LVH, lvh))


def record_beats(beat, leads=DECISION_LEADS + (LeadId.aVL,)):
    return {lead: beat for lead in leads}


def test_distance_of_identity_warp():
    assert prototype_distance(warp_result(1.0, 0.0)) == 0


def test_distance_of_constant_ratio():
    assert prototype_distance(warp_result(1.2, 0.0)) == pytest.approx(2.0)


def test_distance_of_constant_shift():
    assert prototype_distance(warp_result(1.0, 50.0)) == pytest.approx(0.1)


def test_distance_is_positive_away_from_identity():
    s = np.zeros(500)
    s[250] = 0.5
    result = WarpResult(r=np.ones(500), s=s, loss=0.0, converged=True, iters=0)
    assert prototype_distance(result) > 0


def test_nearest_prototypes_orders_by_distance():
    prototypes = [
        Prototype(samples=LVH_BEAT, occurrence=3),
        Prototype(samples=NORMAL_BEAT, occurrence=5),
    ]

    nearest = nearest_prototypes(NORMAL_BEAT, prototypes, FAST_WARP)

    assert [x.index for x in nearest] == [1, 0]
    assert nearest[0].distance == 0
    assert nearest[0].occurrence == 5
    assert nearest[1].distance > 0


def test_single_prototype_counts_twice():
    prototypes = [Prototype(samples=LVH_BEAT, occurrence=1)]
    first, second = nearest_prototypes(NORMAL_BEAT, prototypes, FAST_WARP)
    assert first == second


def test_duplicate_prototypes_change_nothing():
    single = [Prototype(samples=LVH_BEAT, occurrence=1)]
    doubled = single + [Prototype(samples=LVH_BEAT, occurrence=4)]
    once = nearest_prototypes(NORMAL_BEAT, single, FAST_WARP)
    twice = nearest_prototypes(NORMAL_BEAT, doubled, FAST_WARP)
    assert [x.distance for x in once] == [x.distance for x in twice]


def test_empty_library():
    with pytest.raises(EmptyLibrary):
        nearest_prototypes(NORMAL_BEAT, [], FAST_WARP)


def test_record_matching_a_normal_prototype_is_normal():
    result = classify_bsw(
        record_beats(NORMAL_BEAT),
        libraries([NORMAL_BEAT], [LVH_BEAT]),
        FAST_WARP,
    )
    with check:
        assert result.total_normal == 0
    with check:
        assert result.total_lvh > 0
    with check:
        assert result.decision is Label.NORMAL


def test_record_matching_an_lvh_prototype_is_lvh():
    result = classify_bsw(
        record_beats(LVH_BEAT), libraries([NORMAL_BEAT], [LVH_BEAT]), FAST_WARP
    )
    assert result.total_lvh == 0
    assert result.decision is Label.LVH


def test_tie_is_normal():
    result = classify_bsw(
        record_beats(NORMAL_BEAT), libraries([LVH_BEAT], [LVH_BEAT]), FAST_WARP
    )
    assert result.total_normal == result.total_lvh > 0
    assert result.decision is Label.NORMAL


def test_totals_sum_two_nearest_over_decision_leads():
    result = classify_bsw(
        record_beats(NORMAL_BEAT),
        libraries([NORMAL_BEAT], [LVH_BEAT]),
        FAST_WARP,
    )
    assert set(result.per_lead) == set(DECISION_LEADS)
    lead_total = result.per_lead[LeadId.V5].total(Label.LVH)
    assert len(result.per_lead[LeadId.V5].distances(Label.LVH)) == 2
    assert result.total_lvh == pytest.approx(3 * lead_total)


def test_prototype_order_does_not_matter():
    normal = [make_beat(texture=0.2, r_amplitude=a) for a in (0.9, 1.1, 1.3)]
    lvh = [make_beat(texture=0.2, r_amplitude=a) for a in (1.9, 2.2, 2.5)]
    beat = make_beat(texture=0.2, r_amplitude=1.6)

    forward = classify_bsw(
        record_beats(beat), libraries(normal, lvh), FAST_WARP
    )
    backward = classify_bsw(
        record_beats(beat), libraries(normal[::-1], lvh[::-1]), FAST_WARP
    )

    assert forward.decision is backward.decision
    assert forward.total_normal == pytest.approx(backward.total_normal)
    assert forward.total_lvh == pytest.approx(backward.total_lvh)


def test_missing_decision_lead():
    beats = record_beats(NORMAL_BEAT)
    del beats[LeadId.V6]
    with pytest.raises(MissingLead):
        classify_bsw(beats, libraries([NORMAL_BEAT], [LVH_BEAT]), FAST_WARP)


def test_missing_library():
    with pytest.raises(EmptyLibrary):
        classify_bsw(
            record_beats(NORMAL_BEAT),
            libraries([NORMAL_BEAT], [LVH_BEAT], leads=(LeadId.V1,)),
            FAST_WARP,
        )


def pure_wave(amplitude, centre=250):
    return gaussian(np.arange(500, dtype=float), centre, 6, amplitude)


def voltage_beats(s_v1=0.0, r_v5=0.0, r_v6=0.0, r_avl=0.0):
    return {
        LeadId.V1: pure_wave(-s_v1, centre=265),
        LeadId.V5: pure_wave(r_v5),
        LeadId.V6: pure_wave(r_v6),
        LeadId.aVL: pure_wave(r_avl),
    }


def test_r_and_s_of_a_full_beat():
    beat = make_beat(r_amplitude=1.5, s_depth=0.6)
    r, s = r_and_s(beat)
    assert r == pytest.approx(1.5, abs=0.01)
    assert s == pytest.approx(0.55, abs=0.03)


def test_measurements():
    measured = measure_voltages(voltage_beats(2.0, 2.0, 1.0, 0.4))
    assert measured.S_V1 == 2.0
    assert measured.R_V5 == 2.0
    assert measured.R_V6 == 1.0
    assert measured.R_aVL == 0.4


def test_sokolow_lyon_above_threshold():
    result = sokolow_lyon(voltage_beats(s_v1=2.0, r_v5=2.0, r_v6=1.0))
    assert result.value_mv == 4.0
    assert result.decision is Label.LVH


def test_sokolow_lyon_on_threshold_is_normal():
    result = sokolow_lyon(voltage_beats(s_v1=1.5, r_v5=2.0))
    assert result.value_mv == 3.5
    assert result.decision is Label.NORMAL


def test_sokolow_lyon_uses_the_taller_lateral_lead():
    result = sokolow_lyon(voltage_beats(s_v1=1.5, r_v5=1.0, r_v6=2.1))
    assert result.decision is Label.LVH


def test_sokolow_lyon_of_flat_beats():
    result = sokolow_lyon(voltage_beats())
    assert result.value_mv == 0
    assert result.decision is Label.NORMAL


@pytest.mark.parametrize(
    "r_avl, decision",
    [(1.3, Label.LVH), (1.2, Label.NORMAL), (0.0, Label.NORMAL)],
)
def test_modified_cornell(r_avl, decision):
    assert modified_cornell(voltage_beats(r_avl=r_avl)).decision is decision


def test_voltage_criteria_grow_with_amplitude():
    beats = {
        LeadId.V1: make_beat(r_amplitude=0.4, s_depth=0.9),
        LeadId.V5: make_beat(r_amplitude=1.6),
        LeadId.V6: make_beat(r_amplitude=1.3),
        LeadId.aVL: make_beat(r_amplitude=0.5),
    }
    sokolow = []
    cornell = []
    for alpha in (1.0, 1.3, 2.0, 3.0):
        scaled = {lead: alpha * beat for lead, beat in beats.items()}
        sokolow.append(sokolow_lyon(scaled))
        cornell.append(modified_cornell(scaled))

    for results in (sokolow, cornell):
        values = [x.value_mv for x in results]
        assert values == sorted(values)
        decisions = [x.decision is Label.LVH for x in results]
        assert decisions == sorted(decisions)
    assert sokolow[0].decision is Label.NORMAL
    assert sokolow[-1].decision is Label.LVH
    assert cornell[-1].decision is Label.LVH


def test_voltage_criteria_need_their_leads():
    beats = voltage_beats()
    del beats[LeadId.aVL]
    with pytest.raises(MissingLead):
        modified_cornell(beats)


def test_diagnose_runs_every_method():
    config = PipelineConfig().replace(warp=FAST_WARP)
    beats = record_beats(LVH_BEAT)
    beats[LeadId.aVL] = pure_wave(1.4)

    report = diagnose(
        "00042_hr",
        beats,
        libraries([NORMAL_BEAT], [LVH_BEAT]),
        config,
        true_label=Label.LVH,
        max_vh=0.5,
    )

    assert report.bsw_decision is Label.LVH
    assert report.cornell is Label.LVH
    assert report.measured.R_aVL == 1.4
    assert report.true_label is Label.LVH
    assert not report.regular


def report(
    true_label, bsw, sokolow=Label.NORMAL, cornell=Label.NORMAL, **kwargs
):
    return DiagnosisReport(
        record_id=kwargs.pop("record_id", "r"),
        per_lead={},
        total_normal=kwargs.pop("total_normal", 1.0),
        total_lvh=kwargs.pop("total_lvh", 1.0),
        bsw_decision=bsw,
        sokolow_lyon=sokolow,
        cornell=cornell,
        true_label=true_label,
        **kwargs
    )


def test_report_survives_json():
    config = PipelineConfig().replace(warp=FAST_WARP)
    original = diagnose(
        "00042_hr",
        record_beats(NORMAL_BEAT),
        libraries([NORMAL_BEAT], [LVH_BEAT]),
        config,
        true_label=Label.NORMAL,
        max_vh=0.12,
    )

    restored = DiagnosisReport.from_document(
        json.loads(json.dumps(original.to_document()))
    )

    assert restored == original


def test_all_correct_predictions():
    reports = [report(Label.LVH, Label.LVH)] * 10 + [
        report(Label.NORMAL, Label.NORMAL)
    ] * 10
    matrix = evaluate(reports)["bsw"]
    assert (matrix.tp, matrix.fp, matrix.tn, matrix.fn) == (10, 0, 10, 0)
    assert matrix.sensitivity == 1.0
    assert matrix.specificity == 1.0


def test_everything_predicted_normal():
    reports = [report(Label.LVH, Label.NORMAL)] * 10 + [
        report(Label.NORMAL, Label.NORMAL)
    ] * 10
    matrix = evaluate(reports)["sokolow_lyon"]
    assert matrix.sensitivity == 0.0
    assert matrix.specificity == 1.0


def test_cohort_size_is_preserved():
    reports = [report(Label.LVH, Label.LVH, cornell=Label.LVH)] * 100 + [
        report(Label.NORMAL, Label.LVH)
    ] * 100
    matrices = evaluate(reports)
    assert set(matrices) == {"bsw", "sokolow_lyon", "cornell"}
    for matrix in matrices.values():
        assert matrix.total == 200
        assert matrix.counts().sum(axis=1).tolist() == [100, 100]


def test_unlabelled_reports_are_skipped():
    reports = [report(Label.UNKNOWN, Label.LVH), report(Label.LVH, Label.LVH)]
    assert evaluate(reports)["bsw"].total == 1


def test_normalized_rows():
    matrix = ConfusionMatrix(tp=3, fn=1, tn=2, fp=2)
    assert matrix.normalized().tolist() == [[0.5, 0.5], [0.25, 0.75]]
    assert ConfusionMatrix().normalized().tolist() == [[0, 0], [0, 0]]
    assert np.isnan(ConfusionMatrix().sensitivity)


def test_confusion_from_labels():
    truth = [Label.LVH, Label.LVH, Label.NORMAL, Label.NORMAL, Label.NORMAL]
    predicted = [Label.LVH, Label.NORMAL, Label.LVH, Label.NORMAL, "Normal"]

    matrix = ConfusionMatrix.from_labels(truth, predicted)

    assert matrix == ConfusionMatrix(tp=1, fn=1, fp=1, tn=2)
    assert matrix.counts().tolist() == [[2, 1], [1, 1]]


def test_confusion_from_no_labels():
    assert ConfusionMatrix.from_labels([], []) == ConfusionMatrix()


def test_confusion_counts_are_nonnegative():
    with pytest.raises(ValueError):
        ConfusionMatrix(tp=-1)


def test_self_consistency():
    reports = [
        report(Label.NORMAL, Label.NORMAL, total_normal=0.0, total_lvh=2.0),
        report(Label.LVH, Label.LVH, total_normal=2.0, total_lvh=0.5),
        report(Label.LVH, Label.NORMAL, total_normal=1.0, total_lvh=3.0),
        report(Label.UNKNOWN, Label.NORMAL),
    ]
    assert self_consistency(reports) == pytest.approx(2 / 3)
    assert self_consistency([]) is None
