import numpy as np
import pytest

from advstego.data import gen_dataset, stack_unit
from advstego.diffnet import TrainConfig, init_network, train
from advstego.pipeline import STAGES, ImageResult, StageRecord

# Trained model used across attack/pipeline/acceptance tests.
ACCEPT_N = 1000
ACCEPT_SEED = 42
ACCEPT_DIMS = [784, 128, 64, 4]


@pytest.fixture(scope="session")
def shapes():
    return gen_dataset(ACCEPT_N, seed=ACCEPT_SEED)


@pytest.fixture(scope="session")
def trained(shapes):
    net = init_network(ACCEPT_DIMS, seed=ACCEPT_SEED)
    return train(net, stack_unit(shapes.train_images), shapes.train_labels, TrainConfig(seed=ACCEPT_SEED))


def random_net(seed, max_dim=32):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, 4))
    dims = [int(d) for d in rng.integers(2, max_dim + 1, size=depth + 1)]
    net = init_network(dims, seed=seed)
    for layer in net.layers:
        layer.bias[:] = rng.normal(0, 0.1, size=layer.bias.shape)
    return net


def _record(stage, label, conf):
    return StageRecord(stage, label, conf, (conf, 1.0 - conf), 0.5)


def make_fixture_results(n=15, correct_clean=8, correct_fgsm=8, extractions=14,
                         conf_up_clean=15, conf_up_injected=14):
    """Hand-built per-image results with exactly the requested counts."""
    results = []
    for i in range(n):
        true_label = 0
        clean_label = 0 if i < correct_clean else 1
        fgsm_label = 0 if i < correct_fgsm else 1
        up_c = i < conf_up_clean
        up_i = i < conf_up_injected
        stages = [
            _record("clean", clean_label, 0.6),
            _record("injected", clean_label, 0.6),
            _record("fgsm_clean", fgsm_label, 0.8 if up_c else 0.55),
            _record("fgsm_injected", fgsm_label, 0.8 if up_i else 0.55),
        ]
        assert tuple(s.stage for s in stages) == STAGES
        results.append(ImageResult(
            image_id=f"img{i:02d}", true_label=true_label, stages=stages,
            payload_injected=True, extraction_ok_pre_attack=i < extractions,
            extraction_ok_post_attack=False, linf_clean_vs_adv=8,
        ))
    return results


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion."""
    state = {"detail": ""}

    def note(detail):
        state["detail"] = detail

    yield note
    rep = getattr(request.node, "rep_call", None)
    verdict = "PASS" if rep is not None and rep.passed else "FAIL"
    line = f"[{verdict}] {request.node.name}: {state['detail']}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
