import numpy as np
import pytest

from detdiar import kernels
from detdiar.formats import ProposalRecord
from detdiar.timeline import DiarizationAnnotation


def make_ann(spans, rec="rec"):
    """``{"A": [(0, 2), ...]}`` -> normalized annotation."""
    return DiarizationAnnotation.from_spans(rec, spans)


def prop(start, end, speaker="A", score=0.5, rec="r", source="unknown"):
    return ProposalRecord(rec, start, end, speaker, score, source)


def random_ms_annotation(rng, rec="rec", max_speakers=5, max_segments=20, horizon_ms=20000):
    n_spk = int(rng.integers(1, max_speakers + 1))
    n_seg = int(rng.integers(0, max_segments + 1))
    spans = {}
    for _ in range(n_seg):
        s = int(rng.integers(0, horizon_ms))
        d = int(rng.integers(1, 3000))
        spans.setdefault(f"S{rng.integers(0, n_spk)}", []).append((s / 1000, (s + d) / 1000))
    return make_ann(spans, rec)


BACKENDS = [kernels.python_kernels] + ([kernels.compiled_kernels] if kernels.compiled_kernels else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    monkeypatch.setattr(kernels, "soft_nms_kernel", request.param.soft_nms_kernel)
    monkeypatch.setattr(kernels, "ahc_kernel", request.param.ahc_kernel)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
