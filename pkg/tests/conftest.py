"""Shared fixtures: random chains carrying drift certificates by construction."""

from collections import namedtuple

import numpy as np
import pytest

from ergobounds.chain import FiniteChain, WeightFunction
from ergobounds.drift import fit_drift
from ergobounds.errors import NoContractionError

CertifiedChain = namedtuple("CertifiedChain", ["chain", "weights", "cert"])

CORPUS_SEED = 20240817


def random_chain(rng, n, floor=0.02):
    m = rng.random((n, n)) + floor
    m /= m.sum(axis=1, keepdims=True)
    return FiniteChain(m)


def certify(chain, weights):
    """Fit a drift certificate, growing the small set from the lightest states."""
    order = np.argsort(weights.values)
    for size in range(1, chain.n_states):
        small = [chain.states[i] for i in order[:size]]
        try:
            return fit_drift(chain, weights, small)
        except NoContractionError:
            continue
    raise NoContractionError("no proper small set achieves contraction")


@pytest.fixture(scope="session")
def chain_corpus():
    rng = np.random.default_rng(CORPUS_SEED)
    corpus = []
    while len(corpus) < 25:
        n = 2 + len(corpus) % 11
        chain = random_chain(rng, n)
        weights = WeightFunction(1.0 + 9.0 * rng.random(n))
        try:
            cert = certify(chain, weights)
        except NoContractionError:
            continue
        corpus.append(CertifiedChain(chain, weights, cert))
    return corpus


_acceptance_results = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.failed:
        _acceptance_results[name] = "FAIL"
    elif report.skipped:
        _acceptance_results.setdefault(name, "SKIP")
    elif report.when == "call" and report.passed:
        _acceptance_results.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results):
        terminalreporter.write_line(f"{_acceptance_results[name]} {name}")
